//! General initial conditions for the Fisher equation.
//!
//! Data that decays like `exp(−λξ)` does not travel at one fixed speed from
//! the start; the front accelerates towards the asymptotic speed
//! `c(λ) = λ + 1/λ` (for `λ < 1`, otherwise 2) with a logarithmic lag. The
//! network replaces the linear shift `ωτ` by
//!
//! ```text
//! d̂(τ; λ) = c(λ) τ − 3/2 · ln(τ + 1) + w λ
//! ```
//!
//! where only `w` (and the profile weights) are trained. The initial and
//! boundary data are fitted during the first part of training and then
//! dropped, leaving the residual alone to shape the profile.

use serde::{Deserialize, Serialize};

use crate::checkpoint::TrainMeta;
use crate::equations::{EquationKind, PhysicalCoeffs, ReactionSpec};
use crate::error::{Error, Result};
use crate::math::logistic;
use crate::training::{
    classify_convergence, labeled_points, lhs, rng_stream, init_profile, run_optimizer,
    CosineSchedule, Objective, Rect, TrainReport, Verdict,
};
use crate::wavenet::{Bounds, CollocationPoint, LabeledPoint, ProfileNet, Workspace, DEFAULT_WIDTH};

pub const MODEL_TAG: &str = "gtw-pinn";

/// Asymptotic front speed for initial data decaying at rate `lambda`.
pub fn asymptotic_speed(lambda: f64) -> Result<f64> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::param("lambda", format!("must be positive, got {lambda}")));
    }
    Ok(if lambda < 1.0 { lambda + 1.0 / lambda } else { 2.0 })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GeneralIC {
    /// 1 for ξ < 0, 0 otherwise.
    Step,
    /// `1 / (1 + exp(λξ/2))²`.
    Logistic { lambda: f64 },
}

impl GeneralIC {
    pub fn validate(&self) -> Result<()> {
        match *self {
            GeneralIC::Step => Ok(()),
            GeneralIC::Logistic { lambda } => asymptotic_speed(lambda).map(|_| ()),
        }
    }

    /// Decay rate fed to the shift law; the step behaves like any λ ≥ 1.
    pub fn lambda(&self) -> f64 {
        match *self {
            GeneralIC::Step => 1.0,
            GeneralIC::Logistic { lambda } => lambda,
        }
    }

    pub fn name(&self) -> String {
        match *self {
            GeneralIC::Step => "step".into(),
            GeneralIC::Logistic { lambda } => format!("logistic{lambda}"),
        }
    }
}

/// Initial profile in scaled coordinates.
pub fn ic_eval(ic: &GeneralIC, xi: f64) -> f64 {
    match *ic {
        GeneralIC::Step => {
            if xi < 0.0 {
                1.0
            } else {
                0.0
            }
        }
        GeneralIC::Logistic { lambda } => {
            let s = logistic(-0.5 * lambda * xi);
            s * s
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GtwParams {
    pub lambda: f64,
    pub w: f64,
    #[serde(flatten)]
    pub net: ProfileNet,
}

impl GtwParams {
    pub fn validate(&self) -> Result<()> {
        asymptotic_speed(self.lambda)?;
        if !self.w.is_finite() {
            return Err(Error::NonFinite("gTW shift coefficient"));
        }
        self.net.validate()
    }

    pub fn n_params(&self) -> usize {
        1 + 3 * self.net.width()
    }

    /// Layout `[w, a.., b.., c..]`.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n_params()];
        out[0] = self.w;
        self.net.write_flat(&mut out[1..]);
        out
    }

    pub fn set_flat(&mut self, flat: &[f64]) {
        self.w = flat[0];
        self.net.read_flat(&flat[1..]);
    }

    /// Network output at a scaled point.
    pub fn value(&self, xi: f64, tau: f64) -> f64 {
        self.value_with_shift(xi, shift_unchecked(self.lambda, self.w, tau))
    }

    /// Output for an arbitrary shift `d`, i.e. `v̂ = φ(Σ cᵢσ(aᵢ(ξ − d) + bᵢ))`.
    pub fn value_with_shift(&self, xi: f64, d: f64) -> f64 {
        self.net.value(xi - d)
    }

    /// Physical-coordinate evaluation, `u(x, t) = v̂(√(ρ/D) x, ρ t)`.
    pub fn predict(&self, coeffs: &PhysicalCoeffs, x: f64, t: f64) -> f64 {
        self.value(coeffs.length_scale() * x, coeffs.rho * t)
    }
}

fn speed_of(lambda: f64) -> f64 {
    if lambda < 1.0 {
        lambda + 1.0 / lambda
    } else {
        2.0
    }
}

#[inline]
fn shift_unchecked(lambda: f64, w: f64, tau: f64) -> f64 {
    speed_of(lambda) * tau - 1.5 * tau.ln_1p() + w * lambda
}

/// `d̂(τ) = c(λ)τ − 1.5 ln(τ+1) + wλ`.
pub fn wave_shift(params: &GtwParams, tau: f64) -> Result<f64> {
    if !(tau >= 0.0) {
        return Err(Error::param("tau", format!("must be non-negative, got {tau}")));
    }
    asymptotic_speed(params.lambda)?;
    Ok(shift_unchecked(params.lambda, params.w, tau))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GtwConfig {
    pub seed: u64,
    pub ic: GeneralIC,
    #[serde(default = "defaults::epochs")]
    pub epochs: usize,
    #[serde(default = "defaults::n_points")]
    pub n_icbc: usize,
    #[serde(default = "defaults::n_points")]
    pub n_res: usize,
    #[serde(default = "defaults::lr0")]
    pub lr0: f64,
    #[serde(default)]
    pub lr_min: f64,
    #[serde(default = "defaults::width")]
    pub width: usize,
    #[serde(default = "defaults::domain")]
    pub domain: Rect,
    /// Fraction of epochs during which the initial/boundary term is used.
    #[serde(default = "defaults::icbc_fraction")]
    pub icbc_fraction: f64,
    #[serde(default = "ReactionSpec::fisher")]
    pub reaction: ReactionSpec,
}

mod defaults {
    use super::*;
    pub fn epochs() -> usize {
        30_000
    }
    pub fn n_points() -> usize {
        1024
    }
    pub fn lr0() -> f64 {
        0.01
    }
    pub fn width() -> usize {
        DEFAULT_WIDTH
    }
    pub fn domain() -> Rect {
        Rect::new(-300.0, 900.0, 0.0, 300.0)
    }
    pub fn icbc_fraction() -> f64 {
        0.3
    }
}

impl GtwConfig {
    pub fn new(ic: GeneralIC, seed: u64) -> Self {
        Self {
            seed,
            ic,
            epochs: defaults::epochs(),
            n_icbc: defaults::n_points(),
            n_res: defaults::n_points(),
            lr0: defaults::lr0(),
            lr_min: 0.0,
            width: DEFAULT_WIDTH,
            domain: defaults::domain(),
            icbc_fraction: defaults::icbc_fraction(),
            reaction: ReactionSpec::fisher(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.reaction.kind != EquationKind::Fisher {
            return Err(Error::Unsupported(format!(
                "general initial conditions are implemented for fisher only, got {}",
                self.reaction.name()
            )));
        }
        self.ic.validate()?;
        self.domain.validate()?;
        if self.domain.tau[0] != 0.0 {
            return Err(Error::Config("training domain must start at τ = 0".into()));
        }
        if self.n_icbc < 1 || self.n_res < 1 || self.width < 1 {
            return Err(Error::Config("point counts and width must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.icbc_fraction) {
            return Err(Error::Config("icbc_fraction must lie in [0, 1]".into()));
        }
        if !(self.lr0 > 0.0) || !(self.lr_min >= 0.0) {
            return Err(Error::Config("need lr0 > 0 and lr_min >= 0".into()));
        }
        Ok(())
    }

    /// First epoch at which the initial/boundary term is no longer used.
    pub fn icbc_cutoff(&self) -> usize {
        (self.icbc_fraction * self.epochs as f64).round() as usize
    }

    pub fn schedule(&self) -> CosineSchedule {
        CosineSchedule {
            lr0: self.lr0,
            lr_min: self.lr_min,
            epochs: self.epochs,
        }
    }

    pub fn meta(&self, report: &TrainReport<GtwParams>) -> TrainMeta {
        let last = report.history.last();
        let verdict = report.verdict;
        let final_loss = last.map(|r| r.loss).unwrap_or(f64::NAN);
        let final_monitor = last.map(|r| r.omega).unwrap_or(f64::NAN);
        TrainMeta {
            verdict,
            final_loss,
            final_monitor,
            ..self.meta_template_inner()
        }
    }

    /// `stored` with its configuration fields replaced by this config's; equal
    /// to `stored` exactly when the stored run used this configuration.
    pub fn meta_template(&self, stored: &TrainMeta) -> TrainMeta {
        TrainMeta {
            verdict: stored.verdict,
            final_loss: stored.final_loss,
            final_monitor: stored.final_monitor,
            ..self.meta_template_inner()
        }
    }

    fn meta_template_inner(&self) -> TrainMeta {
        TrainMeta {
            seed: self.seed,
            epochs: self.epochs,
            preset: None,
            domain: self.domain,
            n_icbc: self.n_icbc,
            n_res: self.n_res,
            lr0: self.lr0,
            lr_min: self.lr_min,
            width: self.width,
            omega_init: None,
            ic: Some(self.ic),
            verdict: Verdict::Spurious,
            final_loss: f64::NAN,
            final_monitor: f64::NAN,
        }
    }
}

pub fn gtw_icbc(config: &GtwConfig) -> Vec<LabeledPoint> {
    let ic = config.ic;
    let mut rng = rng_stream(config.seed, 1);
    labeled_points(
        &config.domain,
        config.n_icbc,
        Bounds::of(&config.reaction),
        |xi| ic_eval(&ic, xi),
        &mut rng,
    )
}

pub fn gtw_residual_points(config: &GtwConfig) -> Vec<CollocationPoint> {
    let mut rng = rng_stream(config.seed, 2);
    lhs::lhs_in_rect(&config.domain, config.n_res, &mut rng)
        .into_iter()
        .map(|[xi, tau]| CollocationPoint { xi, tau })
        .collect()
}

pub fn init_gtw(config: &GtwConfig) -> GtwParams {
    let mut rng = rng_stream(config.seed, 0);
    GtwParams {
        lambda: config.ic.lambda(),
        w: 0.0,
        net: init_profile(config.width, Bounds::of(&config.reaction), &mut rng),
    }
}

/// Loss and gradient with the initial/boundary term scaled by `icbc_scale`.
pub fn gtw_loss_grad(
    params: &GtwParams,
    spec: &ReactionSpec,
    icbc: &[LabeledPoint],
    res: &[CollocationPoint],
    icbc_scale: f64,
    grad: &mut [f64],
) -> Result<(f64, f64)> {
    let mut ws = Workspace::default();
    accumulate(params, spec, icbc, res, icbc_scale, &mut ws, grad)
}

fn accumulate(
    params: &GtwParams,
    spec: &ReactionSpec,
    icbc: &[LabeledPoint],
    res: &[CollocationPoint],
    icbc_scale: f64,
    ws: &mut Workspace,
    grad: &mut [f64],
) -> Result<(f64, f64)> {
    if icbc.is_empty() || res.is_empty() {
        return Err(Error::Config("empty training point set".into()));
    }
    let (lambda, w) = (params.lambda, params.w);
    let c = speed_of(lambda);
    let (g_w, g_net) = grad.split_first_mut().expect("non-empty gradient");

    let mut data = 0.0;
    if icbc_scale != 0.0 {
        let wd = icbc_scale / icbc.len() as f64;
        for p in icbc {
            let zeta = p.xi - shift_unchecked(lambda, w, p.tau);
            let (e, zeta_bar) = params.net.data_term(zeta, p.target, wd, ws, g_net);
            data += wd * e * e;
            *g_w -= lambda * zeta_bar;
        }
    }
    let wr = 1.0 / res.len() as f64;
    let mut resid = 0.0;
    for p in res {
        let zeta = p.xi - shift_unchecked(lambda, w, p.tau);
        let zeta_tau = -(c - 1.5 / (p.tau + 1.0));
        let (r, zeta_bar, _) = params.net.residual_term(spec, zeta, zeta_tau, wr, ws, g_net);
        resid += wr * r * r;
        *g_w -= lambda * zeta_bar;
    }
    Ok((data, resid))
}

struct GtwObjective<'a> {
    template: GtwParams,
    spec: ReactionSpec,
    icbc: &'a [LabeledPoint],
    res: &'a [CollocationPoint],
    cutoff: usize,
    ws: Workspace,
}

impl Objective for GtwObjective<'_> {
    fn loss_grad(&mut self, params: &[f64], epoch: usize, grad: &mut [f64]) -> Result<f64> {
        self.template.set_flat(params);
        let scale = if epoch < self.cutoff { 1.0 } else { 0.0 };
        let (d, r) = accumulate(&self.template, &self.spec, self.icbc, self.res, scale, &mut self.ws, grad)?;
        Ok(d + r)
    }

    fn monitor(&self, params: &[f64]) -> f64 {
        params[0]
    }
}

/// Trains the general-initial-condition network.
pub fn train_gtw(config: &GtwConfig) -> Result<TrainReport<GtwParams>> {
    config.validate()?;
    let start = std::time::Instant::now();
    let icbc = gtw_icbc(config);
    let res = gtw_residual_points(config);
    let init = init_gtw(config);
    let mut objective = GtwObjective {
        template: init.clone(),
        spec: config.reaction,
        icbc: &icbc,
        res: &res,
        cutoff: config.icbc_cutoff(),
        ws: Workspace::default(),
    };
    let outcome = run_optimizer(&mut objective, init.to_flat(), config.schedule());
    let mut final_params = init;
    final_params.set_flat(&outcome.params);
    let verdict = if config.epochs == 0 || outcome.aborted.is_some() {
        Verdict::Spurious
    } else {
        classify_convergence(&outcome.history, None)
    };
    Ok(TrainReport {
        history: outcome.history,
        final_params,
        verdict,
        wall_time: start.elapsed().as_secs_f64(),
        aborted: outcome.aborted,
    })
}

/// Position where a sampled profile crosses `level`, by linear interpolation.
///
/// Exactly one crossing is required; a profile that never reaches the level or
/// crosses it several times is rejected.
pub fn front_position(xs: &[f64], values: &[f64], level: f64) -> Result<f64> {
    if xs.len() != values.len() || xs.len() < 2 {
        return Err(Error::Front(format!(
            "need matching coordinate and value slices of length ≥ 2, got {} and {}",
            xs.len(),
            values.len()
        )));
    }
    let mut found = None;
    for i in 0..xs.len() - 1 {
        let (d0, d1) = (values[i] - level, values[i + 1] - level);
        let crosses = (d0 > 0.0 && d1 <= 0.0) || (d0 < 0.0 && d1 >= 0.0);
        if crosses {
            if found.is_some() {
                return Err(Error::Front(format!("profile crosses {level} more than once")));
            }
            let s = d0 / (d0 - d1);
            found = Some(xs[i] + s * (xs[i + 1] - xs[i]));
        }
    }
    found.ok_or_else(|| Error::Front(format!("profile never crosses {level}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn speed_law() {
        assert_eq!(asymptotic_speed(0.5).unwrap(), 2.5);
        assert_eq!(asymptotic_speed(2.0).unwrap(), 2.0);
        assert_eq!(asymptotic_speed(1.0).unwrap(), 2.0);
        assert!((asymptotic_speed(1.0 - 1e-9).unwrap() - 2.0).abs() < 1e-12);
        assert!(asymptotic_speed(0.0).is_err());
        assert!(asymptotic_speed(-1.0).is_err());
    }

    fn params(lambda: f64, w: f64) -> GtwParams {
        let net = ProfileNet::new(vec![0.1], vec![0.0], vec![0.5], Bounds::new(1.0, 0.0)).unwrap();
        GtwParams { lambda, w, net }
    }

    #[test]
    fn shift_values() {
        let p = params(2.0, 0.7);
        assert_eq!(wave_shift(&p, 0.0).unwrap(), 1.4);
        let q = params(2.0, 0.0);
        let e = std::f64::consts::E;
        assert!((wave_shift(&q, e - 1.0).unwrap() - (2.0 * (e - 1.0) - 1.5)).abs() < 1e-14);
        assert!((wave_shift(&q, e - 1.0).unwrap() - 1.93656).abs() < 1e-5);
        assert!(wave_shift(&q, -0.1).is_err());
        let slope = wave_shift(&q, 1e7 + 1.0).unwrap() - wave_shift(&q, 1e7).unwrap();
        assert!((slope - 2.0).abs() < 1e-6);
    }

    #[test]
    fn initial_conditions() {
        let l = GeneralIC::Logistic { lambda: 2.0 };
        assert_eq!(ic_eval(&l, 0.0), 0.25);
        assert_eq!(ic_eval(&GeneralIC::Step, -1.0), 1.0);
        assert_eq!(ic_eval(&GeneralIC::Step, 0.0), 0.0);
        let slow = GeneralIC::Logistic { lambda: 0.5 };
        let xi = 200.0;
        assert!((ic_eval(&slow, xi) * (0.5 * xi).exp() - 1.0).abs() < 1e-12);
        assert!(GeneralIC::Logistic { lambda: 0.0 }.validate().is_err());
        assert_eq!(ic_eval(&l, -1e6), 1.0);
        assert_eq!(ic_eval(&l, 1e6), 0.0);
    }

    #[test]
    fn front_crossings() {
        let xs = [0.0, 1.0];
        assert_eq!(front_position(&xs, &[1.0, 0.0], 0.5).unwrap(), 0.5);
        assert!(front_position(&xs, &[1.0, 0.9], 0.5).is_err());
        let ys = [0.0, 1.0, 2.0, 3.0];
        assert!(front_position(&ys, &[1.0, 0.2, 0.8, 0.0], 0.5).is_err());
        let f = ReactionSpec::fisher();
        let grid: Vec<f64> = (0..401).map(|i| -20.0 + 0.1 * i as f64).collect();
        let prof: Vec<f64> = grid
            .iter()
            .map(|&z| crate::equations::exact_profile(&f, &PhysicalCoeffs::unit(), z))
            .collect();
        assert!(front_position(&grid, &prof, 0.25).unwrap().abs() < 1e-12);
    }

    #[test]
    fn non_fisher_is_unsupported() {
        let mut cfg = GtwConfig::new(GeneralIC::Step, 1);
        cfg.reaction = ReactionSpec::zeldovich();
        assert_eq!(train_gtw(&cfg).unwrap_err().kind(), "unsupported");
    }

    #[test]
    fn icbc_term_switches_off_at_cutoff() {
        let cfg = GtwConfig::new(GeneralIC::Logistic { lambda: 2.0 }, 3);
        assert_eq!(cfg.icbc_cutoff(), 9000);
        let p = init_gtw(&cfg);
        let icbc = gtw_icbc(&cfg);
        let res = gtw_residual_points(&cfg);
        let mut g_on = vec![0.0; p.n_params()];
        let mut g_off = vec![0.0; p.n_params()];
        let (d_on, r_on) = gtw_loss_grad(&p, &cfg.reaction, &icbc, &res, 1.0, &mut g_on).unwrap();
        let (d_off, r_off) = gtw_loss_grad(&p, &cfg.reaction, &icbc, &res, 0.0, &mut g_off).unwrap();
        assert!(d_on > 0.0);
        assert_eq!(d_off, 0.0);
        assert_eq!(r_on, r_off);
    }

    #[test]
    fn constant_shift_matches_wave_layer() {
        let p = params(3.0, 0.0);
        let c = 2.0;
        let tw = crate::wavenet::WaveNetParams::new(c, p.net.clone()).unwrap();
        for i in 0..20 {
            let (xi, tau) = (-10.0 + 1.3 * i as f64, 0.7 * i as f64);
            assert_eq!(p.value_with_shift(xi, c * tau), tw.value(xi, tau));
        }
    }
}
