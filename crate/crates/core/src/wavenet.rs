//! The shallow traveling-wave network and its closed-form derivatives.
//!
//! The network maps `(ξ, τ)` to `v̂ = φ(Σ cᵢ σ(aᵢ ζ̂ + bᵢ))` with the wave layer
//! `ζ̂ = ξ - ω τ` and the output constraint
//! `φ(s) = v₋ + (v₊ - v₋) σ(s)`. Because the whole network is a function of the
//! single scalar ζ̂, every derivative the residual needs follows from the
//! chain rule through one hidden layer, and the parameter gradient of the
//! loss is accumulated by hand in reverse order over those formulas.
//!
//! [`ProfileNet`] is the `ζ̂ ↦ v̂` part and is shared with the general
//! layer.

use serde::{Deserialize, Serialize};

use crate::equations::ReactionSpec;
use crate::error::{Error, Result};
use crate::math::logistic_pair;

pub const DEFAULT_WIDTH: usize = 20;

/// Output range of the network: the open interval between the two equilibria.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub v_minus: f64,
    pub v_plus: f64,
}

impl Bounds {
    pub fn new(v_minus: f64, v_plus: f64) -> Self {
        Self { v_minus, v_plus }
    }

    pub fn of(spec: &ReactionSpec) -> Self {
        Self::new(spec.v_minus, spec.v_plus)
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.v_minus + self.v_plus)
    }

    pub fn lower(&self) -> f64 {
        self.v_minus.min(self.v_plus)
    }

    pub fn upper(&self) -> f64 {
        self.v_minus.max(self.v_plus)
    }
}

/// Value and first three derivatives of φ at `s`.
#[derive(Clone, Copy, Debug)]
struct Constrained {
    v: f64,
    d1: f64,
    d2: f64,
    d3: f64,
}

impl Bounds {
    #[inline]
    fn constrain(&self, s: f64) -> Constrained {
        let (lam, lamc) = logistic_pair(s);
        let span = self.v_plus - self.v_minus;
        // Anchor on the nearer endpoint so the tail keeps relative precision.
        let v = if lam < 0.5 {
            self.v_minus + span * lam
        } else {
            self.v_plus - span * lamc
        };
        let g = lam * lamc;
        Constrained {
            v,
            d1: span * g,
            d2: span * g * (lamc - lam),
            d3: span * g * (1.0 - 6.0 * g),
        }
    }
}

/// The `ζ̂ ↦ v̂` map: one logistic hidden layer followed by φ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileNet {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub bounds: Bounds,
}

/// `v̂` and its first two derivatives with respect to the wave coordinate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProfileJet {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

/// Per-neuron activations cached between the forward and reverse sweeps.
#[derive(Default, Debug)]
pub(crate) struct Workspace {
    sig: Vec<f64>,
    sigc: Vec<f64>,
}

/// Intermediate values of one forward sweep with derivatives.
struct Sweep {
    s1: f64,
    s2: f64,
    phi: Constrained,
    jet: ProfileJet,
}

impl ProfileNet {
    pub fn new(a: Vec<f64>, b: Vec<f64>, c: Vec<f64>, bounds: Bounds) -> Result<Self> {
        let net = Self { a, b, c, bounds };
        net.validate()?;
        Ok(net)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.a.len();
        if n == 0 {
            return Err(Error::param("width", "hidden width must be at least 1"));
        }
        if self.b.len() != n || self.c.len() != n {
            return Err(Error::Shape(format!(
                "hidden arrays have lengths a={}, b={}, c={}",
                n,
                self.b.len(),
                self.c.len()
            )));
        }
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !(finite(&self.a) && finite(&self.b) && finite(&self.c)) {
            return Err(Error::NonFinite("network weights"));
        }
        Ok(())
    }

    pub fn width(&self) -> usize {
        self.a.len()
    }

    /// Hidden-layer output `s(ζ̂) = Σ cᵢ σ(aᵢ ζ̂ + bᵢ)`.
    #[inline]
    pub fn hidden(&self, zeta: f64) -> f64 {
        let mut s = 0.0;
        for i in 0..self.a.len() {
            let (sig, _) = logistic_pair(self.a[i] * zeta + self.b[i]);
            s += self.c[i] * sig;
        }
        s
    }

    #[inline]
    pub fn value(&self, zeta: f64) -> f64 {
        self.bounds.constrain(self.hidden(zeta)).v
    }

    pub fn jet(&self, zeta: f64) -> ProfileJet {
        let mut ws = Workspace::default();
        self.sweep(zeta, &mut ws).jet
    }

    fn sweep(&self, zeta: f64, ws: &mut Workspace) -> Sweep {
        let n = self.a.len();
        ws.sig.resize(n, 0.0);
        ws.sigc.resize(n, 0.0);
        let (mut s, mut s1, mut s2) = (0.0, 0.0, 0.0);
        for i in 0..n {
            let a = self.a[i];
            let c = self.c[i];
            let (sig, sigc) = logistic_pair(a * zeta + self.b[i]);
            ws.sig[i] = sig;
            ws.sigc[i] = sigc;
            let d1 = sig * sigc;
            let d2 = d1 * (sigc - sig);
            s += c * sig;
            s1 += c * a * d1;
            s2 += c * a * a * d2;
        }
        let phi = self.bounds.constrain(s);
        let jet = ProfileJet {
            v: phi.v,
            d1: phi.d1 * s1,
            d2: phi.d2 * s1 * s1 + phi.d1 * s2,
        };
        Sweep { s1, s2, phi, jet }
    }

    /// Adds `weight · r²` for the residual `r = ζ̂_τ v̂' - v̂'' - f(v̂)` of the
    /// unit-coefficient equation, accumulating its gradient into `grad`
    /// (layout `[a.., b.., c..]`).
    ///
    /// Returns `(r, ∂/∂ζ̂, ∂/∂ζ̂_τ)` of the weighted term so the caller can push the
    /// adjoint through its own wave layer.
    pub(crate) fn residual_term(
        &self,
        spec: &ReactionSpec,
        zeta: f64,
        zeta_tau: f64,
        weight: f64,
        ws: &mut Workspace,
        grad: &mut [f64],
    ) -> (f64, f64, f64) {
        let sw = self.sweep(zeta, ws);
        let ProfileJet { v, d1, d2 } = sw.jet;
        let r = zeta_tau * d1 - d2 - spec.unit_reaction(v);

        let gr = 2.0 * weight * r;
        let v_bar = -spec.unit_reaction_deriv(v) * gr;
        let d1_bar = zeta_tau * gr;
        let d2_bar = -gr;
        let zeta_tau_bar = d1 * gr;

        let Constrained { d1: p1, d2: p2, d3: p3, .. } = sw.phi;
        let (s1, s2) = (sw.s1, sw.s2);
        let s_bar = v_bar * p1 + d1_bar * p2 * s1 + d2_bar * (p3 * s1 * s1 + p2 * s2);
        let s1_bar = d1_bar * p1 + d2_bar * 2.0 * p2 * s1;
        let s2_bar = d2_bar * p1;

        let n = self.a.len();
        let (ga, rest) = grad.split_at_mut(n);
        let (gb, gc) = rest.split_at_mut(n);
        let mut zeta_bar = 0.0;
        for i in 0..n {
            let a = self.a[i];
            let c = self.c[i];
            let sig = ws.sig[i];
            let sigc = ws.sigc[i];
            let q1 = sig * sigc;
            let q2 = q1 * (sigc - sig);
            let q3 = q1 * (1.0 - 6.0 * q1);
            gc[i] += s_bar * sig + s1_bar * a * q1 + s2_bar * a * a * q2;
            let z_bar = c * (s_bar * q1 + s1_bar * a * q2 + s2_bar * a * a * q3);
            ga[i] += c * (s1_bar * q1 + 2.0 * s2_bar * a * q2) + z_bar * zeta;
            gb[i] += z_bar;
            zeta_bar += z_bar * a;
        }
        (r, zeta_bar, zeta_tau_bar)
    }

    /// Adds `weight · (v̂ - target)²`, accumulating into `grad`. Returns the
    /// signed error and the adjoint of ζ̂.
    pub(crate) fn data_term(
        &self,
        zeta: f64,
        target: f64,
        weight: f64,
        ws: &mut Workspace,
        grad: &mut [f64],
    ) -> (f64, f64) {
        let n = self.a.len();
        ws.sig.resize(n, 0.0);
        ws.sigc.resize(n, 0.0);
        let mut s = 0.0;
        for i in 0..n {
            let (sig, sigc) = logistic_pair(self.a[i] * zeta + self.b[i]);
            ws.sig[i] = sig;
            ws.sigc[i] = sigc;
            s += self.c[i] * sig;
        }
        let phi = self.bounds.constrain(s);
        let e = phi.v - target;
        let s_bar = 2.0 * weight * e * phi.d1;

        let (ga, rest) = grad.split_at_mut(n);
        let (gb, gc) = rest.split_at_mut(n);
        let mut zeta_bar = 0.0;
        for i in 0..n {
            let sig = ws.sig[i];
            gc[i] += s_bar * sig;
            let z_bar = self.c[i] * s_bar * sig * ws.sigc[i];
            ga[i] += z_bar * zeta;
            gb[i] += z_bar;
            zeta_bar += z_bar * self.a[i];
        }
        (e, zeta_bar)
    }

    pub(crate) fn write_flat(&self, out: &mut [f64]) {
        let n = self.width();
        out[..n].copy_from_slice(&self.a);
        out[n..2 * n].copy_from_slice(&self.b);
        out[2 * n..3 * n].copy_from_slice(&self.c);
    }

    pub(crate) fn read_flat(&mut self, src: &[f64]) {
        let n = self.width();
        self.a.copy_from_slice(&src[..n]);
        self.b.copy_from_slice(&src[n..2 * n]);
        self.c.copy_from_slice(&src[2 * n..3 * n]);
    }
}

/// Trainable parameters of the traveling-wave network: predicted speed ω plus
/// the hidden layer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveNetParams {
    pub omega: f64,
    #[serde(flatten)]
    pub net: ProfileNet,
}

/// Solution value and the derivatives the residual needs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolutionJet {
    pub v: f64,
    pub v_tau: f64,
    pub v_xi: f64,
    pub v_xixi: f64,
}

/// A labeled initial/boundary sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LabeledPoint {
    pub xi: f64,
    pub tau: f64,
    pub target: f64,
}

/// A residual collocation point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CollocationPoint {
    pub xi: f64,
    pub tau: f64,
}

/// Loss value with its gradient over the flat parameter vector
/// `[ω, a₁..a_N, b₁..b_N, c₁..c_N]`.
#[derive(Clone, Debug, PartialEq)]
pub struct LossGrad {
    pub loss: f64,
    pub icbc_loss: f64,
    pub residual_loss: f64,
    pub grad: Vec<f64>,
}

impl LossGrad {
    pub fn d_omega(&self) -> f64 {
        self.grad[0]
    }

    fn slice(&self, k: usize) -> &[f64] {
        let n = (self.grad.len() - 1) / 3;
        &self.grad[1 + k * n..1 + (k + 1) * n]
    }

    pub fn d_a(&self) -> &[f64] {
        self.slice(0)
    }

    pub fn d_b(&self) -> &[f64] {
        self.slice(1)
    }

    pub fn d_c(&self) -> &[f64] {
        self.slice(2)
    }
}

impl WaveNetParams {
    pub fn new(omega: f64, net: ProfileNet) -> Result<Self> {
        if !omega.is_finite() {
            return Err(Error::NonFinite("omega"));
        }
        net.validate()?;
        Ok(Self { omega, net })
    }

    pub fn width(&self) -> usize {
        self.net.width()
    }

    pub fn bounds(&self) -> Bounds {
        self.net.bounds
    }

    pub fn n_params(&self) -> usize {
        1 + 3 * self.width()
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n_params()];
        out[0] = self.omega;
        self.net.write_flat(&mut out[1..]);
        out
    }

    pub fn set_flat(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.n_params(), "flat parameter length");
        self.omega = flat[0];
        self.net.read_flat(&flat[1..]);
    }

    /// Network output at a scaled point.
    #[inline]
    pub fn value(&self, xi: f64, tau: f64) -> f64 {
        self.net.value(wave_coordinate(self, xi, tau))
    }
}

/// `ζ̂ = ξ - ω τ`.
#[inline]
pub fn wave_coordinate(params: &WaveNetParams, xi: f64, tau: f64) -> f64 {
    xi - params.omega * tau
}

pub fn forward_jet(params: &WaveNetParams, xi: f64, tau: f64) -> SolutionJet {
    let j = params.net.jet(wave_coordinate(params, xi, tau));
    SolutionJet {
        v: j.v,
        v_tau: -params.omega * j.d1,
        v_xi: j.d1,
        v_xixi: j.d2,
    }
}

/// Residual of the unit-coefficient equation, `v̂_τ - v̂_ξξ - f(v̂)`.
pub fn residual(params: &WaveNetParams, spec: &ReactionSpec, xi: f64, tau: f64) -> f64 {
    let j = forward_jet(params, xi, tau);
    j.v_tau - j.v_xixi - spec.unit_reaction(j.v)
}

/// Mean-squared data loss plus mean-squared residual loss, with the exact
/// gradient over every trainable.
///
/// Points are visited in slice order, so the result is bitwise reproducible
/// for a fixed input ordering.
pub fn loss_grad(
    params: &WaveNetParams,
    spec: &ReactionSpec,
    icbc_points: &[LabeledPoint],
    res_points: &[CollocationPoint],
) -> Result<LossGrad> {
    let mut grad = vec![0.0; params.n_params()];
    let mut ws = Workspace::default();
    let (icbc_loss, residual_loss) =
        accumulate_loss_grad(params, spec, icbc_points, res_points, 1.0, &mut ws, &mut grad)?;
    Ok(LossGrad {
        loss: icbc_loss + residual_loss,
        icbc_loss,
        residual_loss,
        grad,
    })
}

/// Shared body of [`loss_grad`]; `icbc_scale` multiplies the data term
/// (set to zero to drop it). `grad` must be zeroed by the caller.
pub(crate) fn accumulate_loss_grad(
    params: &WaveNetParams,
    spec: &ReactionSpec,
    icbc_points: &[LabeledPoint],
    res_points: &[CollocationPoint],
    icbc_scale: f64,
    ws: &mut Workspace,
    grad: &mut [f64],
) -> Result<(f64, f64)> {
    if icbc_points.is_empty() {
        return Err(Error::Config("no initial/boundary points".into()));
    }
    if res_points.is_empty() {
        return Err(Error::Config("no residual collocation points".into()));
    }
    let omega = params.omega;
    let (g_omega, g_net) = grad.split_first_mut().expect("non-empty gradient");

    let w_data = icbc_scale / icbc_points.len() as f64;
    let mut data_sum = 0.0;
    if icbc_scale != 0.0 {
        for p in icbc_points {
            let zeta = p.xi - omega * p.tau;
            let (e, zeta_bar) = params.net.data_term(zeta, p.target, w_data, ws, g_net);
            data_sum += e * e;
            *g_omega -= zeta_bar * p.tau;
        }
    }

    let w_res = 1.0 / res_points.len() as f64;
    let mut res_sum = 0.0;
    for p in res_points {
        let zeta = p.xi - omega * p.tau;
        let (r, zeta_bar, zeta_tau_bar) =
            params.net.residual_term(spec, zeta, -omega, w_res, ws, g_net);
        res_sum += r * r;
        *g_omega -= zeta_bar * p.tau + zeta_tau_bar;
    }

    Ok((data_sum * w_data, res_sum * w_res))
}
