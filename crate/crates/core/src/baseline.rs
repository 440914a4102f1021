//! The wave-PINN comparator for the Fisher equation.
//!
//! ρ enters through the input layer, `ẑ = ω₁√ρ x + ω₂ρ t + ω₃`, followed by
//! three dense logistic layers of width 20 and the same output constraint as
//! the traveling-wave network. D is fixed to 1. The profile `U(ẑ)` and its
//! first two ẑ-derivatives are carried forward layer by layer, and the
//! backward pass runs the same recurrences in reverse.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::equations::{exact_profile, exact_speed, EquationKind, PhysicalCoeffs, ReactionSpec};
use crate::checkpoint::TrainMeta;
use crate::error::{Error, Result};
use crate::math::{linspace, logistic_pair};
use crate::pipeline::{EvalDomain, FieldGrid, GridCounts};
use crate::training::{OmegaInit, 
    classify_convergence, lhs, run_optimizer, CosineSchedule, Objective, Rect, TrainReport, Verdict,
};
use crate::wavenet::Bounds;

pub const MODEL_TAG: &str = "wave-pinn";
pub const DEPTH: usize = 3;
pub const WIDTH: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    /// Row-major `out × in`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub n_in: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WavePinnParams {
    pub omega1: f64,
    pub omega2: f64,
    pub omega3: f64,
    pub layers: Vec<DenseLayer>,
    pub out_weights: Vec<f64>,
    pub out_bias: f64,
    pub bounds: Bounds,
}

impl WavePinnParams {
    /// Zero-weight network with the given wave layer.
    pub fn zeros(omega: [f64; 3], bounds: Bounds) -> Self {
        let layers = (0..DEPTH)
            .map(|l| {
                let n_in = if l == 0 { 1 } else { WIDTH };
                DenseLayer {
                    weights: vec![0.0; WIDTH * n_in],
                    bias: vec![0.0; WIDTH],
                    n_in,
                }
            })
            .collect();
        Self {
            omega1: omega[0],
            omega2: omega[1],
            omega3: omega[2],
            layers,
            out_weights: vec![0.0; WIDTH],
            out_bias: 0.0,
            bounds,
        }
    }

    /// Weights uniform on `[-1, 1]/√fan_in`, zero biases, `ω = (1, 0, 0)`.
    pub fn init(seed: u64, bounds: Bounds) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = Self::zeros([1.0, 0.0, 0.0], bounds);
        for layer in &mut p.layers {
            let s = 1.0 / (layer.n_in as f64).sqrt();
            for w in &mut layer.weights {
                *w = s * rng.random_range(-1.0..=1.0);
            }
        }
        let s = 1.0 / (WIDTH as f64).sqrt();
        for w in &mut p.out_weights {
            *w = s * rng.random_range(-1.0..=1.0);
        }
        p
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers.len() != DEPTH
            || self.out_weights.len() != WIDTH
            || self.layers.iter().enumerate().any(|(l, layer)| {
                let n_in = if l == 0 { 1 } else { WIDTH };
                layer.n_in != n_in || layer.bias.len() != WIDTH || layer.weights.len() != WIDTH * n_in
            })
        {
            return Err(Error::Shape("wave-PINN must have 3 dense layers of width 20".into()));
        }
        if !self.to_flat().iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("wave-PINN parameters"));
        }
        Ok(())
    }

    pub fn n_params(&self) -> usize {
        3 + self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum::<usize>() + WIDTH + 1
    }

    /// Layout `[ω₁, ω₂, ω₃, (W, b) per layer, w_out, b_out]`.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.n_params());
        v.extend([self.omega1, self.omega2, self.omega3]);
        for l in &self.layers {
            v.extend_from_slice(&l.weights);
            v.extend_from_slice(&l.bias);
        }
        v.extend_from_slice(&self.out_weights);
        v.push(self.out_bias);
        v
    }

    pub fn set_flat(&mut self, flat: &[f64]) {
        self.omega1 = flat[0];
        self.omega2 = flat[1];
        self.omega3 = flat[2];
        let mut k = 3;
        for l in &mut self.layers {
            let nw = l.weights.len();
            l.weights.copy_from_slice(&flat[k..k + nw]);
            k += nw;
            let nb = l.bias.len();
            l.bias.copy_from_slice(&flat[k..k + nb]);
            k += nb;
        }
        self.out_weights.copy_from_slice(&flat[k..k + WIDTH]);
        self.out_bias = flat[k + WIDTH];
    }

    /// Front speed in scaled units implied by the wave layer, `−ω₂/ω₁`.
    pub fn scaled_speed(&self) -> f64 {
        -self.omega2 / self.omega1
    }

    pub fn wave_input(&self, rho: f64, x: f64, t: f64) -> f64 {
        self.omega1 * rho.sqrt() * x + self.omega2 * rho * t + self.omega3
    }
}

/// Per-layer activations kept for the backward pass.
#[derive(Default)]
struct Tape {
    /// Pre-activation value and ẑ-derivatives, per layer.
    z: Vec<[Vec<f64>; 3]>,
    /// Post-activation value and ẑ-derivatives, per layer.
    h: Vec<[Vec<f64>; 3]>,
    /// σ, σ', σ'', σ''' per layer.
    sig: Vec<[Vec<f64>; 4]>,
}

struct Output {
    s: [f64; 3],
    phi: [f64; 4],
    u: [f64; 3],
}

impl Tape {
    fn ensure(&mut self) {
        if self.z.len() != DEPTH {
            let v = || vec![0.0; WIDTH];
            self.z = (0..DEPTH).map(|_| [v(), v(), v()]).collect();
            self.h = (0..DEPTH).map(|_| [v(), v(), v()]).collect();
            self.sig = (0..DEPTH).map(|_| [v(), v(), v(), v()]).collect();
        }
    }
}

fn forward(p: &WavePinnParams, zhat: f64, tape: &mut Tape) -> Output {
    tape.ensure();
    for l in 0..DEPTH {
        let layer = &p.layers[l];
        {
            let [z0, z1, z2] = &mut tape.z[l];
            if l == 0 {
                for i in 0..WIDTH {
                    let w = layer.weights[i];
                    z0[i] = w * zhat + layer.bias[i];
                    z1[i] = w;
                    z2[i] = 0.0;
                }
            } else {
                let [h0, h1, h2] = &tape.h[l - 1];
                for i in 0..WIDTH {
                    let row = &layer.weights[i * WIDTH..(i + 1) * WIDTH];
                    let (mut a, mut b, mut c) = (layer.bias[i], 0.0, 0.0);
                    for j in 0..WIDTH {
                        a += row[j] * h0[j];
                        b += row[j] * h1[j];
                        c += row[j] * h2[j];
                    }
                    z0[i] = a;
                    z1[i] = b;
                    z2[i] = c;
                }
            }
        }
        let [z0, z1, z2] = &tape.z[l];
        let [s0, s1, s2, s3] = &mut tape.sig[l];
        let [h0, h1, h2] = &mut tape.h[l];
        for i in 0..WIDTH {
            let (sg, sc) = logistic_pair(z0[i]);
            let d1 = sg * sc;
            let d2 = d1 * (sc - sg);
            let d3 = d1 * (1.0 - 6.0 * d1);
            s0[i] = sg;
            s1[i] = d1;
            s2[i] = d2;
            s3[i] = d3;
            h0[i] = sg;
            h1[i] = d1 * z1[i];
            h2[i] = d2 * z1[i] * z1[i] + d1 * z2[i];
        }
    }
    let [h0, h1, h2] = &tape.h[DEPTH - 1];
    let (mut s, mut s1, mut s2) = (p.out_bias, 0.0, 0.0);
    for i in 0..WIDTH {
        let w = p.out_weights[i];
        s += w * h0[i];
        s1 += w * h1[i];
        s2 += w * h2[i];
    }
    let (lam, lamc) = logistic_pair(s);
    let span = p.bounds.v_plus - p.bounds.v_minus;
    let v = if lam < 0.5 { p.bounds.v_minus + span * lam } else { p.bounds.v_plus - span * lamc };
    let g = lam * lamc;
    let phi = [v, span * g, span * g * (lamc - lam), span * g * (1.0 - 6.0 * g)];
    let u = [v, phi[1] * s1, phi[2] * s1 * s1 + phi[1] * s2];
    Output { s: [s, s1, s2], phi, u }
}

/// Accumulates the gradient for adjoints `(Ū, Ū', Ū'')` of the profile jet
/// into `grad` (network part, after the three ω slots) and returns `∂/∂ẑ`.
fn backward(p: &WavePinnParams, zhat: f64, tape: &Tape, out: &Output, u_bar: [f64; 3], grad: &mut [f64]) -> f64 {
    let [_, s1, s2] = out.s;
    let [_, p1, p2, p3] = out.phi;
    let sb0 = u_bar[0] * p1 + u_bar[1] * p2 * s1 + u_bar[2] * (p3 * s1 * s1 + p2 * s2);
    let sb1 = u_bar[1] * p1 + 2.0 * u_bar[2] * p2 * s1;
    let sb2 = u_bar[2] * p1;

    let offsets = layer_offsets(p);
    let out_off = offsets[DEPTH];
    let mut hb = [[0.0; WIDTH]; 3];
    {
        let [h0, h1, h2] = &tape.h[DEPTH - 1];
        for i in 0..WIDTH {
            grad[out_off + i] += sb0 * h0[i] + sb1 * h1[i] + sb2 * h2[i];
            let w = p.out_weights[i];
            hb[0][i] = w * sb0;
            hb[1][i] = w * sb1;
            hb[2][i] = w * sb2;
        }
        grad[out_off + WIDTH] += sb0;
    }

    let mut zhat_bar = 0.0;
    for l in (0..DEPTH).rev() {
        let layer = &p.layers[l];
        let [_, z1, z2] = &tape.z[l];
        let [_, q1, q2, q3] = &tape.sig[l];
        let mut zb = [[0.0; WIDTH]; 3];
        for i in 0..WIDTH {
            let (a, b, c) = (hb[0][i], hb[1][i], hb[2][i]);
            zb[0][i] = a * q1[i] + b * q2[i] * z1[i] + c * (q3[i] * z1[i] * z1[i] + q2[i] * z2[i]);
            zb[1][i] = b * q1[i] + 2.0 * c * q2[i] * z1[i];
            zb[2][i] = c * q1[i];
        }
        let off = offsets[l];
        let n_w = layer.weights.len();
        if l == 0 {
            for i in 0..WIDTH {
                // z = w ẑ + b, z' = w, z'' = 0
                grad[off + i] += zb[0][i] * zhat + zb[1][i];
                grad[off + n_w + i] += zb[0][i];
                zhat_bar += layer.weights[i] * zb[0][i];
            }
        } else {
            let [h0, h1, h2] = &tape.h[l - 1];
            let mut next = [[0.0; WIDTH]; 3];
            for i in 0..WIDTH {
                let row = &layer.weights[i * WIDTH..(i + 1) * WIDTH];
                let g_row = &mut grad[off + i * WIDTH..off + (i + 1) * WIDTH];
                let (a, b, c) = (zb[0][i], zb[1][i], zb[2][i]);
                for j in 0..WIDTH {
                    g_row[j] += a * h0[j] + b * h1[j] + c * h2[j];
                    next[0][j] += row[j] * a;
                    next[1][j] += row[j] * b;
                    next[2][j] += row[j] * c;
                }
                grad[off + n_w + i] += a;
            }
            hb = next;
        }
    }
    zhat_bar
}

/// Start of each layer's weights in the flat layout; the last entry is the
/// output layer.
fn layer_offsets(p: &WavePinnParams) -> [usize; DEPTH + 1] {
    let mut out = [0; DEPTH + 1];
    let mut k = 3;
    for (l, layer) in p.layers.iter().enumerate() {
        out[l] = k;
        k += layer.weights.len() + layer.bias.len();
    }
    out[DEPTH] = k;
    out
}

/// `u(x, t)` for reaction coefficient `rho`.
pub fn wavepinn_forward(params: &WavePinnParams, rho: f64, x: f64, t: f64) -> Result<f64> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::param("rho", format!("must be positive, got {rho}")));
    }
    let mut tape = Tape::default();
    Ok(forward(params, params.wave_input(rho, x, t), &mut tape).u[0])
}

/// Gradient of the network output with respect to every trainable.
pub fn wavepinn_output_grad(params: &WavePinnParams, rho: f64, x: f64, t: f64) -> Result<Vec<f64>> {
    wavepinn_forward(params, rho, x, t)?;
    let mut tape = Tape::default();
    let zhat = params.wave_input(rho, x, t);
    let out = forward(params, zhat, &mut tape);
    let mut grad = vec![0.0; params.n_params()];
    let zb = backward(params, zhat, &tape, &out, [1.0, 0.0, 0.0], &mut grad);
    grad[0] += zb * rho.sqrt() * x;
    grad[1] += zb * rho * t;
    grad[2] += zb;
    Ok(grad)
}

/// A labeled point `(ρ, x, t, target)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RhoLabeled {
    pub rho: f64,
    pub x: f64,
    pub t: f64,
    pub target: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RhoPoint {
    pub rho: f64,
    pub x: f64,
    pub t: f64,
}

/// Residual divided by ρ: `ω₂U' − ω₁²U'' − f(U)`.
pub fn wavepinn_residual(params: &WavePinnParams, spec: &ReactionSpec, rho: f64, x: f64, t: f64) -> f64 {
    let mut tape = Tape::default();
    let out = forward(params, params.wave_input(rho, x, t), &mut tape);
    let [u, u1, u2] = out.u;
    params.omega2 * u1 - params.omega1 * params.omega1 * u2 - spec.unit_reaction(u)
}

/// Mean-squared data loss plus mean-squared normalized residual, with gradient.
pub fn wavepinn_loss_grad(
    params: &WavePinnParams,
    spec: &ReactionSpec,
    icbc: &[RhoLabeled],
    res: &[RhoPoint],
    grad: &mut [f64],
) -> Result<(f64, f64)> {
    let mut tape = Tape::default();
    accumulate(params, spec, icbc, res, &mut tape, grad)
}

fn accumulate(
    p: &WavePinnParams,
    spec: &ReactionSpec,
    icbc: &[RhoLabeled],
    res: &[RhoPoint],
    tape: &mut Tape,
    grad: &mut [f64],
) -> Result<(f64, f64)> {
    if icbc.is_empty() || res.is_empty() {
        return Err(Error::Config("empty training point set".into()));
    }
    let wd = 1.0 / icbc.len() as f64;
    let mut data = 0.0;
    for q in icbc {
        let zhat = p.wave_input(q.rho, q.x, q.t);
        let out = forward(p, zhat, tape);
        let e = out.u[0] - q.target;
        data += wd * e * e;
        let zb = backward(p, zhat, tape, &out, [2.0 * wd * e, 0.0, 0.0], grad);
        grad[0] += zb * q.rho.sqrt() * q.x;
        grad[1] += zb * q.rho * q.t;
        grad[2] += zb;
    }
    let wr = 1.0 / res.len() as f64;
    let mut resid = 0.0;
    let (w1, w2) = (p.omega1, p.omega2);
    for q in res {
        let zhat = p.wave_input(q.rho, q.x, q.t);
        let out = forward(p, zhat, tape);
        let [u, u1, u2] = out.u;
        let r = w2 * u1 - w1 * w1 * u2 - spec.unit_reaction(u);
        resid += wr * r * r;
        let gr = 2.0 * wr * r;
        let ub = [-spec.unit_reaction_deriv(u) * gr, w2 * gr, -w1 * w1 * gr];
        let zb = backward(p, zhat, tape, &out, ub, grad);
        grad[0] += zb * q.rho.sqrt() * q.x - 2.0 * w1 * u2 * gr;
        grad[1] += zb * q.rho * q.t + u1 * gr;
        grad[2] += zb;
    }
    Ok((data, resid))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WavePinnConfig {
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
    /// Sampled reaction coefficients are log-uniform on this interval.
    #[serde(default = "defaults::rho_range")]
    pub rho_range: [f64; 2],
    /// Physical window `x ∈ [x_lo, x_hi]`, `t ∈ [0, t_scale/√ρ]`.
    #[serde(default = "defaults::x_window")]
    pub x_window: [f64; 2],
    #[serde(default = "defaults::t_scale")]
    pub t_scale: f64,
    #[serde(default = "ReactionSpec::fisher")]
    pub reaction: ReactionSpec,
    /// Starting speed `-ω₂/ω₁`, as for the traveling-wave network.
    #[serde(default)]
    pub omega_init: OmegaInit,
}

mod defaults {
    pub fn epochs() -> usize {
        100_000
    }
    pub fn n_points() -> usize {
        1024
    }
    pub fn lr0() -> f64 {
        0.001
    }
    pub fn rho_range() -> [f64; 2] {
        [1.0, 1e6]
    }
    pub fn x_window() -> [f64; 2] {
        [-1.0, 5.0]
    }
    pub fn t_scale() -> f64 {
        2.0
    }
}

impl WavePinnConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            epochs: defaults::epochs(),
            n_icbc: defaults::n_points(),
            n_res: defaults::n_points(),
            lr0: defaults::lr0(),
            lr_min: 0.0,
            rho_range: defaults::rho_range(),
            x_window: defaults::x_window(),
            t_scale: defaults::t_scale(),
            reaction: ReactionSpec::fisher(),
            omega_init: OmegaInit::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.reaction.kind != EquationKind::Fisher {
            return Err(Error::Unsupported(format!(
                "the wave-PINN baseline is defined for fisher only, got {}",
                self.reaction.name()
            )));
        }
        let [r0, r1] = self.rho_range;
        if !(r0 > 0.0 && r0 < r1 && r1.is_finite()) {
            return Err(Error::Config("rho_range must satisfy 0 < lo < hi".into()));
        }
        if !(self.x_window[0] < self.x_window[1]) || !(self.t_scale > 0.0) {
            return Err(Error::Config("bad wave-PINN sampling window".into()));
        }
        if self.n_icbc < 1 || self.n_res < 1 {
            return Err(Error::Config("point counts must be at least 1".into()));
        }
        if !(self.lr0 > 0.0) || !(self.lr_min >= 0.0) {
            return Err(Error::Config("need lr0 > 0 and lr_min >= 0".into()));
        }
        Ok(())
    }

    fn rho_at(&self, u: f64) -> f64 {
        let [r0, r1] = self.rho_range;
        (r0.ln() + u * (r1.ln() - r0.ln())).exp()
    }

    pub fn schedule(&self) -> CosineSchedule {
        CosineSchedule {
            lr0: self.lr0,
            lr_min: self.lr_min,
            epochs: self.epochs,
        }
    }
}

fn stream(seed: u64, s: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(s);
    rng
}

/// Exact closed-form value used as initial and boundary data.
fn exact_at(spec: &ReactionSpec, rho: f64, x: f64, t: f64) -> f64 {
    let coeffs = PhysicalCoeffs { rho, d: 1.0 };
    exact_profile(spec, &coeffs, x - exact_speed(spec, &coeffs) * t)
}

/// Labeled data: half at t = 0, a quarter on each spatial edge, each point
/// with its own ρ. Targets come from the closed-form solution.
pub fn wavepinn_icbc(cfg: &WavePinnConfig) -> Vec<RhoLabeled> {
    let mut rng = stream(cfg.seed, 1);
    let spec = cfg.reaction;
    let [x0, x1] = cfg.x_window;
    let n_ic = cfg.n_icbc / 2;
    let n_lo = (cfg.n_icbc - n_ic) / 2;
    let n_hi = cfg.n_icbc - n_ic - n_lo;
    let mut out = Vec::with_capacity(cfg.n_icbc);
    for p in lhs::lhs_unit(2, n_ic, &mut rng) {
        let rho = cfg.rho_at(p[1]);
        let x = x0 + (x1 - x0) * p[0];
        out.push(RhoLabeled { rho, x, t: 0.0, target: exact_at(&spec, rho, x, 0.0) });
    }
    for (n, x) in [(n_lo, x0), (n_hi, x1)] {
        for p in lhs::lhs_unit(2, n, &mut rng) {
            let rho = cfg.rho_at(p[1]);
            let t = p[0] * cfg.t_scale / rho.sqrt();
            out.push(RhoLabeled { rho, x, t, target: exact_at(&spec, rho, x, t) });
        }
    }
    out
}

pub fn wavepinn_residual_points(cfg: &WavePinnConfig) -> Vec<RhoPoint> {
    let mut rng = stream(cfg.seed, 2);
    let [x0, x1] = cfg.x_window;
    lhs::lhs_unit(3, cfg.n_res, &mut rng)
        .into_iter()
        .map(|p| {
            let rho = cfg.rho_at(p[2]);
            RhoPoint {
                rho,
                x: x0 + (x1 - x0) * p[0],
                t: p[1] * cfg.t_scale / rho.sqrt(),
            }
        })
        .collect()
}

struct WpObjective<'a> {
    template: WavePinnParams,
    spec: ReactionSpec,
    icbc: &'a [RhoLabeled],
    res: &'a [RhoPoint],
    tape: Tape,
}

impl Objective for WpObjective<'_> {
    fn loss_grad(&mut self, params: &[f64], _epoch: usize, grad: &mut [f64]) -> Result<f64> {
        self.template.set_flat(params);
        let (d, r) = accumulate(&self.template, &self.spec, self.icbc, self.res, &mut self.tape, grad)?;
        Ok(d + r)
    }

    fn monitor(&self, params: &[f64]) -> f64 {
        -params[1] / params[0]
    }
}

/// Trains the baseline. The run-log monitor is the implied scaled speed.
pub fn train_wavepinn(cfg: &WavePinnConfig) -> Result<TrainReport<WavePinnParams>> {
    cfg.validate()?;
    let start = std::time::Instant::now();
    let icbc = wavepinn_icbc(cfg);
    let res = wavepinn_residual_points(cfg);
    let mut init = WavePinnParams::init(stream(cfg.seed, 0).random(), Bounds::of(&cfg.reaction));
    init.omega2 = -cfg.omega_init.value(&cfg.reaction) * init.omega1;
    let mut objective = WpObjective {
        template: init.clone(),
        spec: cfg.reaction,
        icbc: &icbc,
        res: &res,
        tape: Tape::default(),
    };
    let outcome = run_optimizer(&mut objective, init.to_flat(), cfg.schedule());
    let mut final_params = init;
    final_params.set_flat(&outcome.params);
    let verdict = if cfg.epochs == 0 || outcome.aborted.is_some() {
        Verdict::Spurious
    } else {
        classify_convergence(&outcome.history, Some(exact_speed(&cfg.reaction, &PhysicalCoeffs::unit())))
    };
    Ok(TrainReport {
        history: outcome.history,
        final_params,
        verdict,
        wall_time: start.elapsed().as_secs_f64(),
        aborted: outcome.aborted,
    })
}

impl WavePinnConfig {
    /// Checkpoint metadata. The stored domain is the ρ = 1 window.
    pub fn meta(&self, report: &TrainReport<WavePinnParams>) -> TrainMeta {
        let last = report.history.last();
        TrainMeta {
            seed: self.seed,
            epochs: self.epochs,
            preset: None,
            domain: Rect::new(self.x_window[0], self.x_window[1], 0.0, self.t_scale),
            n_icbc: self.n_icbc,
            n_res: self.n_res,
            lr0: self.lr0,
            lr_min: self.lr_min,
            width: WIDTH,
            omega_init: Some(self.omega_init),
            ic: None,
            verdict: report.verdict,
            final_loss: last.map(|r| r.loss).unwrap_or(f64::NAN),
            final_monitor: last.map(|r| r.omega).unwrap_or(f64::NAN),
        }
    }

    pub fn matches(&self, meta: &TrainMeta) -> bool {
        meta.seed == self.seed
            && meta.epochs == self.epochs
            && meta.preset.is_none()
            && meta.domain == Rect::new(self.x_window[0], self.x_window[1], 0.0, self.t_scale)
            && meta.n_icbc == self.n_icbc
            && meta.n_res == self.n_res
            && meta.lr0 == self.lr0
            && meta.lr_min == self.lr_min
            && meta.omega_init == Some(self.omega_init)
    }
}

/// The baseline sampled on the tabulated grid for `rho`, in the layout of
/// [`crate::pipeline::evaluate_grid`].
pub fn wavepinn_grid(params: &WavePinnParams, rho: f64, domain: &EvalDomain, counts: GridCounts) -> Result<FieldGrid> {
    if domain.dim() != 1 {
        return Err(Error::Unsupported("the wave-PINN baseline is one-dimensional".into()));
    }
    if counts.x < 2 || counts.t < 2 {
        return Err(Error::param("counts", "need at least 2 samples per axis"));
    }
    let xs = linspace(domain.x[0][0], domain.x[0][1], counts.x);
    let ts = linspace(domain.t[0], domain.t[1], counts.t);
    let mut values = Vec::with_capacity(xs.len() * ts.len());
    for &t in &ts {
        for &x in &xs {
            values.push(wavepinn_forward(params, rho, x, t)?);
        }
    }
    Ok(FieldGrid {
        axes: vec![xs],
        t: ts,
        values,
        direction: vec![1.0],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_weights_give_midpoint() {
        let p = WavePinnParams::zeros([0.3, -0.2, 0.1], Bounds::new(1.0, 0.0));
        assert_eq!(wavepinn_forward(&p, 1e4, 0.5, 0.01).unwrap(), 0.5);
        assert!(wavepinn_forward(&p, 0.0, 0.5, 0.01).is_err());
    }

    #[test]
    fn wave_input_at_unit_rho() {
        let p = WavePinnParams::zeros([1.5, -2.0, 0.25], Bounds::new(1.0, 0.0));
        assert_eq!(p.wave_input(1.0, 2.0, 3.0), 1.5 * 2.0 - 2.0 * 3.0 + 0.25);
    }

    #[test]
    fn flat_round_trip_and_shape() {
        let p = WavePinnParams::init(4, Bounds::new(1.0, 0.0));
        assert_eq!(p.n_params(), 3 + 40 + 420 + 420 + 21);
        let mut q = WavePinnParams::zeros([0.0; 3], p.bounds);
        q.set_flat(&p.to_flat());
        assert_eq!(p, q);
        p.validate().unwrap();
        let mut bad = p.clone();
        bad.layers.pop();
        assert!(bad.validate().is_err());
    }

    #[test]
    fn sampling_windows() {
        let cfg = WavePinnConfig::new(3);
        let icbc = wavepinn_icbc(&cfg);
        assert_eq!(icbc.len(), 1024);
        assert!(icbc.iter().all(|p| p.rho > 1.0 && p.rho < 1e6));
        let res = wavepinn_residual_points(&cfg);
        assert!(res.iter().all(|p| p.t <= 2.0 / p.rho.sqrt() && (-1.0..=5.0).contains(&p.x)));
        let logs: Vec<f64> = res.iter().map(|p| p.rho.log10()).collect();
        let below_3 = logs.iter().filter(|&&l| l < 3.0).count();
        assert!((below_3 as i64 - 512).abs() < 4);
    }

    #[test]
    fn non_fisher_is_unsupported() {
        let mut cfg = WavePinnConfig::new(1);
        cfg.reaction = ReactionSpec::zeldovich();
        assert_eq!(train_wavepinn(&cfg).unwrap_err().kind(), "unsupported");
    }

    #[test]
    fn starts_at_the_spreading_speed() {
        let mut cfg = WavePinnConfig::new(3);
        cfg.epochs = 1;
        cfg.lr0 = 1e-12;
        let r = train_wavepinn(&cfg).unwrap();
        assert!((r.final_params.scaled_speed() - 2.0).abs() < 1e-9);
        cfg.omega_init = OmegaInit::Zero;
        let r = train_wavepinn(&cfg).unwrap();
        assert!(r.final_params.scaled_speed().abs() < 1e-9);
        assert!(cfg.matches(&cfg.meta(&r)));
        let mut other = cfg.clone();
        other.omega_init = OmegaInit::LinearSpreading;
        assert!(!other.matches(&cfg.meta(&r)));
    }
}
