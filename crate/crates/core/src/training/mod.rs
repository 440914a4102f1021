//! Training the traveling-wave network on the scaled 1-D equation.
//!
//! One run samples a fixed collocation set (Latin hypercube), then takes
//! `epochs` full-batch Adam steps under a single cosine cycle. The loop itself
//! ([`run_optimizer`]) is shared by the general initial-condition network and
//! the wave-PINN baseline through the [`Objective`] trait.

pub mod adam;
pub mod convergence;
pub mod lhs;
pub mod schedule;

use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use adam::{adam_step, AdamState};
pub use convergence::{classify_convergence, Verdict};
pub use lhs::{lhs_sample, Rect};
pub use schedule::CosineSchedule;

use crate::equations::{exact_profile, exact_speed, PhysicalCoeffs, ReactionSpec};
use crate::error::{Error, Result};
use crate::wavenet::{
    accumulate_loss_grad, Bounds, CollocationPoint, LabeledPoint, ProfileNet, WaveNetParams,
    Workspace, DEFAULT_WIDTH,
};

/// Histories are recorded every epoch up to this many epochs, and every
/// [`LONG_RUN_STRIDE`] epochs beyond it.
pub const DENSE_HISTORY_LIMIT: usize = 10_000;
pub const LONG_RUN_STRIDE: usize = 10;

const STREAM_INIT: u64 = 0;
const STREAM_ICBC: u64 = 1;
const STREAM_RESIDUAL: u64 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainPreset {
    /// `[-5000, 5000] × [0, 2000]`
    Original,
    /// `[-500, 500] × [0, 20]`
    Restricted,
}

impl DomainPreset {
    pub fn rect(self) -> Rect {
        match self {
            DomainPreset::Original => Rect::new(-5000.0, 5000.0, 0.0, 2000.0),
            DomainPreset::Restricted => Rect::new(-500.0, 500.0, 0.0, 20.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DomainPreset::Original => "original",
            DomainPreset::Restricted => "restricted",
        }
    }
}

impl std::str::FromStr for DomainPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "original" => Ok(DomainPreset::Original),
            "restricted" => Ok(DomainPreset::Restricted),
            other => Err(Error::Config(format!("unknown domain preset `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub seed: u64,
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
    pub preset: DomainPreset,
    /// Overrides the preset rectangle when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Rect>,
    pub reaction: ReactionSpec,
    #[serde(default)]
    pub omega_init: OmegaInit,
}

/// Starting value of the trainable speed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OmegaInit {
    /// Speed of the linearization about the unstable equilibrium `v_u`,
    /// `2√max(f'(v_u), 0)`, signed so the front moves into `v_u`.
    #[default]
    LinearSpreading,
    Zero,
    Value(f64),
}

impl OmegaInit {
    pub fn value(self, spec: &ReactionSpec) -> f64 {
        match self {
            OmegaInit::Zero => 0.0,
            OmegaInit::Value(w) => w,
            OmegaInit::LinearSpreading => {
                // v+ is reached as ξ → ∞; a front invading v+ moves right.
                let unstable = |v: f64| spec.unit_reaction_deriv(v) > 0.0;
                let (v_u, sign) = if unstable(spec.v_plus) {
                    (spec.v_plus, 1.0)
                } else if unstable(spec.v_minus) {
                    (spec.v_minus, -1.0)
                } else {
                    return 0.0;
                };
                sign * 2.0 * spec.unit_reaction_deriv(v_u).sqrt()
            }
        }
    }
}

mod defaults {
    pub fn epochs() -> usize {
        100_000
    }
    pub fn n_points() -> usize {
        1024
    }
    pub fn lr0() -> f64 {
        0.01
    }
    pub fn width() -> usize {
        super::DEFAULT_WIDTH
    }
}

impl TrainConfig {
    pub fn new(reaction: ReactionSpec, preset: DomainPreset, seed: u64) -> Self {
        Self {
            seed,
            epochs: defaults::epochs(),
            n_icbc: defaults::n_points(),
            n_res: defaults::n_points(),
            lr0: defaults::lr0(),
            lr_min: 0.0,
            width: DEFAULT_WIDTH,
            preset,
            domain: None,
            reaction,
            omega_init: OmegaInit::default(),
        }
    }

    pub fn with_epochs(mut self, epochs: usize) -> Self {
        self.epochs = epochs;
        self
    }

    pub fn rect(&self) -> Rect {
        self.domain.unwrap_or_else(|| self.preset.rect())
    }

    pub fn schedule(&self) -> CosineSchedule {
        CosineSchedule {
            lr0: self.lr0,
            lr_min: self.lr_min,
            epochs: self.epochs,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let rect = self.rect();
        rect.validate()?;
        if rect.tau[0] != 0.0 {
            return Err(Error::Config("training domain must start at τ = 0".into()));
        }
        if self.n_icbc < 1 || self.n_res < 1 {
            return Err(Error::Config("point counts must be at least 1".into()));
        }
        if self.width < 1 {
            return Err(Error::Config("hidden width must be at least 1".into()));
        }
        if !(self.lr0 > 0.0) || !(self.lr_min >= 0.0) {
            return Err(Error::Config("need lr0 > 0 and lr_min >= 0".into()));
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Parse { reason, .. } => Error::Parse {
                path: path.display().to_string(),
                reason,
            },
            other => other,
        })
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Parse {
            path: "<config>".into(),
            reason: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

/// `lr_min + (lr0 - lr_min)/2 · (1 + cos(π·epoch/(epochs-1)))`.
pub fn cosine_lr(epoch: usize, config: &TrainConfig) -> f64 {
    config.schedule().lr(epoch)
}

/// Exact speed of the scaled (ρ = D = 1) traveling wave.
pub fn scaled_speed(spec: &ReactionSpec) -> f64 {
    exact_speed(spec, &PhysicalCoeffs::unit())
}

/// Scaled closed-form initial profile, the τ = 0 target.
pub fn initial_target(spec: &ReactionSpec, xi: f64) -> f64 {
    exact_profile(spec, &PhysicalCoeffs::unit(), xi)
}

pub(crate) fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Labeled points: half on τ = 0 carrying `initial(ξ)`, a quarter on each
/// spatial edge carrying the equilibrium reached there.
pub(crate) fn labeled_points<R: Rng>(
    rect: &Rect,
    n: usize,
    bounds: Bounds,
    initial: impl Fn(f64) -> f64,
    rng: &mut R,
) -> Vec<LabeledPoint> {
    let n_ic = n / 2;
    let n_lo = (n - n_ic) / 2;
    let n_hi = n - n_ic - n_lo;
    let [x0, x1] = rect.xi;
    let [t0, t1] = rect.tau;
    let mut out = Vec::with_capacity(n);
    for xi in lhs::lhs_interval(x0, x1, n_ic, rng) {
        out.push(LabeledPoint { xi, tau: t0, target: initial(xi) });
    }
    for tau in lhs::lhs_interval(t0, t1, n_lo, rng) {
        out.push(LabeledPoint { xi: x0, tau, target: bounds.v_minus });
    }
    for tau in lhs::lhs_interval(t0, t1, n_hi, rng) {
        out.push(LabeledPoint { xi: x1, tau, target: bounds.v_plus });
    }
    out
}

/// Initial/boundary training data for `config`.
pub fn assemble_icbc(config: &TrainConfig) -> Vec<LabeledPoint> {
    let spec = config.reaction;
    let mut rng = rng_stream(config.seed, STREAM_ICBC);
    labeled_points(
        &config.rect(),
        config.n_icbc,
        Bounds::of(&spec),
        |xi| initial_target(&spec, xi),
        &mut rng,
    )
}

/// Residual collocation points for `config`.
pub fn residual_points(config: &TrainConfig) -> Vec<CollocationPoint> {
    let mut rng = rng_stream(config.seed, STREAM_RESIDUAL);
    lhs::lhs_in_rect(&config.rect(), config.n_res, &mut rng)
        .into_iter()
        .map(|[xi, tau]| CollocationPoint { xi, tau })
        .collect()
}

/// Hidden weights uniform on `[-1, 1]/√N`.
pub(crate) fn init_profile<R: Rng>(width: usize, bounds: Bounds, rng: &mut R) -> ProfileNet {
    let scale = 1.0 / (width as f64).sqrt();
    let mut draw = || (0..width).map(|_| scale * rng.random_range(-1.0..=1.0)).collect::<Vec<f64>>();
    let a = draw();
    let b = draw();
    let c = draw();
    ProfileNet { a, b, c, bounds }
}

/// Seed-determined starting point: random hidden layer, ω from
/// [`TrainConfig::omega_init`].
pub fn init_params(config: &TrainConfig) -> WaveNetParams {
    let mut rng = rng_stream(config.seed, STREAM_INIT);
    WaveNetParams {
        omega: config.omega_init.value(&config.reaction),
        net: init_profile(config.width, Bounds::of(&config.reaction), &mut rng),
    }
}

/// One row of the training history.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryRecord {
    pub epoch: usize,
    pub loss: f64,
    /// ω for the wave-speed network, `w` for the general-IC network,
    /// `ω₂/ω₁`-derived speed for the baseline.
    pub omega: f64,
    pub lr: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainReport<P> {
    pub history: Vec<HistoryRecord>,
    pub final_params: P,
    pub verdict: Verdict,
    pub wall_time: f64,
    /// Diagnostic when the run stopped early on a non-finite value.
    pub aborted: Option<String>,
}

impl<P> TrainReport<P> {
    pub fn loss_history(&self) -> Vec<f64> {
        self.history.iter().map(|r| r.loss).collect()
    }

    pub fn omega_history(&self) -> Vec<f64> {
        self.history.iter().map(|r| r.omega).collect()
    }

    pub fn final_loss(&self) -> f64 {
        self.history.last().map(|r| r.loss).unwrap_or(f64::NAN)
    }

    /// Mean loss over records within `window` epochs ending at `epoch`.
    pub fn moving_average_loss(&self, epoch: usize, window: usize) -> f64 {
        let lo = epoch.saturating_sub(window);
        let (sum, n) = self
            .history
            .iter()
            .filter(|r| r.epoch > lo && r.epoch <= epoch)
            .fold((0.0, 0usize), |(s, n), r| (s + r.loss, n + 1));
        if n == 0 {
            f64::NAN
        } else {
            sum / n as f64
        }
    }

    /// Run-log rows `epoch,loss,omega,lr`.
    pub fn write_runlog(&self, path: impl AsRef<Path>, monitor_name: &str) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["epoch", "loss", monitor_name, "lr"])?;
        for r in &self.history {
            w.write_record([
                r.epoch.to_string(),
                r.loss.to_string(),
                r.omega.to_string(),
                r.lr.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

/// A differentiable training objective over a flat parameter vector.
pub trait Objective {
    /// Writes `∂L/∂θ` into `grad` (zeroed by the caller) and returns `L`.
    fn loss_grad(&mut self, params: &[f64], epoch: usize, grad: &mut [f64]) -> Result<f64>;

    /// Scalar logged next to the loss.
    fn monitor(&self, params: &[f64]) -> f64;
}

pub struct OptimOutcome {
    pub params: Vec<f64>,
    pub history: Vec<HistoryRecord>,
    pub aborted: Option<String>,
}

/// Full-batch Adam with cosine annealing.
pub fn run_optimizer<O: Objective>(
    objective: &mut O,
    mut params: Vec<f64>,
    schedule: CosineSchedule,
) -> OptimOutcome {
    let epochs = schedule.epochs;
    let stride = if epochs > DENSE_HISTORY_LIMIT { LONG_RUN_STRIDE } else { 1 };
    let mut state = AdamState::new(params.len());
    let mut grad = vec![0.0; params.len()];
    let mut history = Vec::with_capacity(epochs / stride + 2);
    let mut aborted = None;

    if epochs == 0 {
        grad.fill(0.0);
        match objective.loss_grad(&params, 0, &mut grad) {
            Ok(loss) => history.push(HistoryRecord {
                epoch: 0,
                loss,
                omega: objective.monitor(&params),
                lr: 0.0,
            }),
            Err(e) => aborted = Some(e.to_string()),
        }
    }

    for epoch in 0..epochs {
        grad.fill(0.0);
        let lr = schedule.lr(epoch);
        let loss = match objective.loss_grad(&params, epoch, &mut grad) {
            Ok(l) => l,
            Err(e) => {
                aborted = Some(e.to_string());
                break;
            }
        };
        if epoch % stride == 0 || epoch + 1 == epochs || !loss.is_finite() {
            history.push(HistoryRecord {
                epoch,
                loss,
                omega: objective.monitor(&params),
                lr,
            });
        }
        if !loss.is_finite() {
            aborted = Some(format!("non-finite loss at epoch {epoch}"));
            break;
        }
        if let Err(e) = adam_step(&mut state, &mut params, &grad, lr) {
            aborted = Some(format!("epoch {epoch}: {e}"));
            break;
        }
    }
    OptimOutcome { params, history, aborted }
}

struct WaveObjective<'a> {
    template: WaveNetParams,
    spec: ReactionSpec,
    icbc: &'a [LabeledPoint],
    res: &'a [CollocationPoint],
    ws: Workspace,
}

impl Objective for WaveObjective<'_> {
    fn loss_grad(&mut self, params: &[f64], _epoch: usize, grad: &mut [f64]) -> Result<f64> {
        self.template.set_flat(params);
        let (a, b) = accumulate_loss_grad(
            &self.template,
            &self.spec,
            self.icbc,
            self.res,
            1.0,
            &mut self.ws,
            grad,
        )?;
        Ok(a + b)
    }

    fn monitor(&self, params: &[f64]) -> f64 {
        params[0]
    }
}

/// Trains the traveling-wave network described by `config`.
pub fn train(config: &TrainConfig) -> Result<TrainReport<WaveNetParams>> {
    config.validate()?;
    let start = Instant::now();
    let icbc = assemble_icbc(config);
    let res = residual_points(config);
    let init = init_params(config);

    let mut objective = WaveObjective {
        template: init.clone(),
        spec: config.reaction,
        icbc: &icbc,
        res: &res,
        ws: Workspace::default(),
    };
    let outcome = run_optimizer(&mut objective, init.to_flat(), config.schedule());

    let mut final_params = init;
    final_params.set_flat(&outcome.params);
    let verdict = if config.epochs == 0 || outcome.aborted.is_some() {
        Verdict::Spurious
    } else {
        classify_convergence(&outcome.history, Some(scaled_speed(&config.reaction)))
    };
    Ok(TrainReport {
        history: outcome.history,
        final_params,
        verdict,
        wall_time: start.elapsed().as_secs_f64(),
        aborted: outcome.aborted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fisher_cfg() -> TrainConfig {
        TrainConfig::new(ReactionSpec::fisher(), DomainPreset::Restricted, 5)
    }

    #[test]
    fn omega_starts_at_linear_spreading_speed() {
        let w = |spec: ReactionSpec| OmegaInit::LinearSpreading.value(&spec);
        assert!((w(ReactionSpec::fisher()) - 2.0).abs() < 1e-12);
        assert!((w(ReactionSpec::nws(3.0).unwrap()) - 2.0).abs() < 1e-12);
        assert_eq!(w(ReactionSpec::zeldovich()), 0.0);
        assert!((w(ReactionSpec::bistable(0.2).unwrap()) + 0.8).abs() < 1e-12);
        assert_eq!(OmegaInit::Zero.value(&ReactionSpec::fisher()), 0.0);
        assert_eq!(init_params(&fisher_cfg()).omega, 2.0);
    }

    #[test]
    fn defaults_follow_training_protocol() {
        let c = fisher_cfg();
        assert_eq!((c.n_icbc, c.n_res, c.epochs), (1024, 1024, 100_000));
        assert_eq!(c.lr0, 0.01);
        assert_eq!(cosine_lr(0, &c), 0.01);
        assert_eq!(c.rect(), Rect::new(-500.0, 500.0, 0.0, 20.0));
        assert_eq!(DomainPreset::Original.rect(), Rect::new(-5000.0, 5000.0, 0.0, 2000.0));
    }

    #[test]
    fn icbc_layout_and_targets() {
        let c = fisher_cfg();
        let pts = assemble_icbc(&c);
        assert_eq!(pts.len(), 1024);
        let ic: Vec<_> = pts.iter().filter(|p| p.tau == 0.0 && p.xi > -500.0 && p.xi < 500.0).collect();
        assert_eq!(ic.len(), 512);
        assert_eq!(pts.iter().filter(|p| p.xi == -500.0).count(), 256);
        assert_eq!(pts.iter().filter(|p| p.xi == 500.0).count(), 256);
        for p in &pts {
            if p.xi == -500.0 {
                assert_eq!(p.target, 1.0);
            } else if p.xi == 500.0 {
                assert_eq!(p.target, 0.0);
            } else {
                assert_eq!(p.target, initial_target(&c.reaction, p.xi));
            }
            assert!(c.rect().contains(p.xi, p.tau));
        }
        assert_eq!(initial_target(&c.reaction, 0.0), 0.25);
        let b = ReactionSpec::bistable(0.2).unwrap();
        assert!((initial_target(&b, 0.0) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn residual_points_inside_domain() {
        let c = TrainConfig::new(ReactionSpec::zeldovich(), DomainPreset::Original, 1);
        let pts = residual_points(&c);
        assert_eq!(pts.len(), 1024);
        assert!(pts.iter().all(|p| c.rect().contains(p.xi, p.tau)));
    }

    #[test]
    fn init_is_small_and_seeded() {
        let c = fisher_cfg();
        let p = init_params(&c);
        assert_eq!(p.omega, 2.0);
        assert_eq!(p.width(), 20);
        let bound = 1.0 / 20f64.sqrt();
        assert!(p.to_flat()[1..].iter().all(|w| w.abs() <= bound));
        assert_eq!(p, init_params(&c));
        let mut other = c.clone();
        other.seed = 6;
        assert_ne!(p, init_params(&other));
    }

    #[test]
    fn zero_epochs_returns_initial_params() {
        let c = fisher_cfg().with_epochs(0);
        let r = train(&c).unwrap();
        assert_eq!(r.final_params, init_params(&c));
        assert_eq!(r.verdict, Verdict::Spurious);
        assert_eq!(r.history.len(), 1);
    }

    #[test]
    fn short_runs_are_deterministic_and_reduce_loss() {
        let c = fisher_cfg().with_epochs(300);
        let a = train(&c).unwrap();
        let b = train(&c).unwrap();
        assert_eq!(a.history, b.history);
        assert_eq!(a.final_params, b.final_params);
        assert!(a.final_loss() < a.history[0].loss);
    }

    #[test]
    fn config_toml_round_trip() {
        let c = TrainConfig::new(ReactionSpec::nws(3.0).unwrap(), DomainPreset::Original, 42);
        let back = TrainConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(c, back);
        let minimal = "seed = 3\npreset = \"restricted\"\n[reaction]\nkind = \"fisher\"\n";
        let m = TrainConfig::from_toml(minimal).unwrap();
        assert_eq!(m.epochs, 100_000);
        assert!(TrainConfig::from_toml("seed = 3\npreset = \"restricted\"\nn_res = 0\n[reaction]\nkind = \"fisher\"\n").is_err());
    }
}
