//! Finite-difference reference solver and residual oracle.
//!
//! [`ref_solve`] integrates `u_t = D u_xx + R(u)` on a cell-centred grid with
//! the method of lines: a central stencil for diffusion, the reaction applied
//! pointwise, and the three-stage strong-stability-preserving Runge–Kutta
//! scheme in time.

use serde::{Deserialize, Serialize};

use crate::equations::{exact_profile, reaction_eval, PhysicalCoeffs, ReactionSpec};
use crate::error::{Error, Result};
use crate::gtw::{ic_eval, GeneralIC};
use crate::pipeline::FieldGrid;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Fourth-order central diffusion stencil.
    Weno5Central,
    /// Three-point second-order stencil.
    Central2,
}

impl Scheme {
    fn ghosts(self) -> usize {
        match self {
            Scheme::Weno5Central => 2,
            Scheme::Central2 => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefConfig {
    pub x_domain: [f64; 2],
    pub cells: usize,
    pub t_final: f64,
    pub cfl: f64,
    pub scheme: Scheme,
    /// Output times in `(0, t_final]`; `t_final` alone when empty. The initial
    /// state is always the first snapshot.
    #[serde(default)]
    pub snapshots: Vec<f64>,
}

impl RefConfig {
    pub fn new(x_domain: [f64; 2], t_final: f64) -> Self {
        Self {
            x_domain,
            cells: 2000,
            t_final,
            cfl: 0.4,
            scheme: Scheme::Weno5Central,
            snapshots: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let [lo, hi] = self.x_domain;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Config(format!("bad reference domain [{lo}, {hi}]")));
        }
        if self.cells < 16 {
            return Err(Error::Config("reference grid needs at least 16 cells".into()));
        }
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(Error::Config("cfl must lie in (0, 1)".into()));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::Config("t_final must be positive".into()));
        }
        if self.snapshots.iter().any(|&t| !(t > 0.0 && t <= self.t_final)) {
            return Err(Error::Config("snapshot times must lie in (0, t_final]".into()));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x_domain[1] - self.x_domain[0]) / self.cells as f64
    }

    /// Cell centres.
    pub fn centres(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.cells).map(|i| self.x_domain[0] + (i as f64 + 0.5) * dx).collect()
    }

    pub fn time_step(&self, coeffs: &PhysicalCoeffs) -> f64 {
        let dx = self.dx();
        self.cfl * (dx * dx / (2.0 * coeffs.d)).min(0.5 / coeffs.rho)
    }
}

/// Initial data for the reference solver, in physical coordinates.
#[derive(Clone, Debug, PartialEq)]
pub enum RefInitial {
    /// A general initial condition given in scaled form, `u₀(x) = v₀(√(ρ/D) x)`.
    General(GeneralIC),
    /// The closed-form traveling wave at t = 0.
    Exact,
    Constant(f64),
    /// Values at the cell centres.
    Samples(Vec<f64>),
}

fn initial_values(spec: &ReactionSpec, coeffs: &PhysicalCoeffs, ic: &RefInitial, xs: &[f64]) -> Result<Vec<f64>> {
    let k = coeffs.length_scale();
    Ok(match ic {
        RefInitial::General(g) => {
            g.validate()?;
            xs.iter().map(|&x| ic_eval(g, k * x)).collect()
        }
        RefInitial::Exact => xs.iter().map(|&x| exact_profile(spec, coeffs, x)).collect(),
        RefInitial::Constant(c) => vec![*c; xs.len()],
        RefInitial::Samples(v) => {
            if v.len() != xs.len() {
                return Err(Error::Shape(format!("{} samples for {} cells", v.len(), xs.len())));
            }
            v.clone()
        }
    })
}

/// The equilibrium nearest to `u`, used as the Dirichlet value at that end.
fn nearest_equilibrium(spec: &ReactionSpec, u: f64) -> f64 {
    if (u - spec.v_minus).abs() <= (u - spec.v_plus).abs() {
        spec.v_minus
    } else {
        spec.v_plus
    }
}

struct Stepper<'a> {
    spec: &'a ReactionSpec,
    coeffs: PhysicalCoeffs,
    scheme: Scheme,
    inv_dx2: f64,
    left: f64,
    right: f64,
    padded: Vec<f64>,
}

impl Stepper<'_> {
    /// `out = D u_xx + R(u)`.
    fn rhs(&mut self, u: &[f64], out: &mut [f64]) -> Result<()> {
        let g = self.scheme.ghosts();
        let n = u.len();
        self.padded.clear();
        self.padded.extend(std::iter::repeat_n(self.left, g));
        self.padded.extend_from_slice(u);
        self.padded.extend(std::iter::repeat_n(self.right, g));
        let p = &self.padded;
        let dk = self.coeffs.d * self.inv_dx2;
        match self.scheme {
            Scheme::Weno5Central => {
                let w = dk / 12.0;
                for i in 0..n {
                    let j = i + 2;
                    let lap = -p[j - 2] + 16.0 * p[j - 1] - 30.0 * p[j] + 16.0 * p[j + 1] - p[j + 2];
                    out[i] = w * lap;
                }
            }
            Scheme::Central2 => {
                for i in 0..n {
                    let j = i + 1;
                    out[i] = dk * (p[j - 1] - 2.0 * p[j] + p[j + 1]);
                }
            }
        }
        for (o, &ui) in out.iter_mut().zip(u) {
            *o += reaction_eval(self.spec, ui, self.coeffs.rho)?;
        }
        Ok(())
    }
}

/// Solves the 1-D equation, returning the initial state and every snapshot.
pub fn ref_solve(
    spec: &ReactionSpec,
    coeffs: &PhysicalCoeffs,
    ic: &RefInitial,
    cfg: &RefConfig,
) -> Result<FieldGrid> {
    cfg.validate()?;
    let xs = cfg.centres();
    let mut u = initial_values(spec, coeffs, ic, &xs)?;
    let n = u.len();
    let mut stepper = Stepper {
        spec,
        coeffs: *coeffs,
        scheme: cfg.scheme,
        inv_dx2: 1.0 / (cfg.dx() * cfg.dx()),
        left: nearest_equilibrium(spec, u[0]),
        right: nearest_equilibrium(spec, u[n - 1]),
        padded: Vec::with_capacity(n + 4),
    };

    let mut times = if cfg.snapshots.is_empty() { vec![cfg.t_final] } else { cfg.snapshots.clone() };
    times.sort_by(f64::total_cmp);
    times.dedup();

    let dt_max = cfg.time_step(coeffs);
    let mut values = u.clone();
    let mut out_t = vec![0.0];
    let (mut k, mut u1, mut u2) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut t = 0.0;
    let mut step = 0usize;
    for &target in &times {
        while t < target {
            let dt = dt_max.min(target - t);
            stepper.rhs(&u, &mut k)?;
            for i in 0..n {
                u1[i] = u[i] + dt * k[i];
            }
            stepper.rhs(&u1, &mut k)?;
            for i in 0..n {
                u2[i] = 0.75 * u[i] + 0.25 * (u1[i] + dt * k[i]);
            }
            stepper.rhs(&u2, &mut k)?;
            for i in 0..n {
                u[i] = (u[i] + 2.0 * (u2[i] + dt * k[i])) / 3.0;
            }
            step += 1;
            t = if target - t <= dt { target } else { t + dt };
            let max_abs = u.iter().fold(0.0f64, |m, v| if v.is_finite() { m.max(v.abs()) } else { f64::INFINITY });
            if max_abs > 10.0 {
                return Err(Error::Instability { step, t, max_abs });
            }
        }
        values.extend_from_slice(&u);
        out_t.push(target);
    }
    Ok(FieldGrid {
        axes: vec![xs],
        t: out_t,
        values,
        direction: vec![1.0],
    })
}

/// Finite-difference step sizes in space and time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FdSteps {
    pub x: f64,
    pub t: f64,
}

/// Fourth-order central-difference estimate of `u_t − D Δu − R(u)` for a field
/// given as a function of `(x, t)`.
pub fn fd_residual(
    field: impl Fn(&[f64], f64) -> f64,
    coeffs: &PhysicalCoeffs,
    spec: &ReactionSpec,
    point: &crate::equations::PhysicalPoint,
    steps: FdSteps,
) -> Result<f64> {
    let (hx, ht) = (steps.x, steps.t);
    if !(hx > 0.0 && ht > 0.0) {
        return Err(Error::param("steps", "finite-difference steps must be positive"));
    }
    let x = &point.x;
    let t = point.t;
    let u0 = field(x, t);
    let d1 = |f: &dyn Fn(f64) -> f64, h: f64| (f(-2.0 * h) - 8.0 * f(-h) + 8.0 * f(h) - f(2.0 * h)) / (12.0 * h);
    let u_t = d1(&|s| field(x, t + s), ht);
    let mut lap = 0.0;
    let mut shifted = x.clone();
    for d in 0..x.len() {
        let mut at = |s: f64| {
            shifted[d] = x[d] + s;
            let v = field(&shifted, t);
            shifted[d] = x[d];
            v
        };
        let (m2, m1, p1, p2) = (at(-2.0 * hx), at(-hx), at(hx), at(2.0 * hx));
        lap += (-m2 + 16.0 * m1 - 30.0 * u0 + 16.0 * p1 - p2) / (12.0 * hx * hx);
    }
    Ok(u_t - coeffs.d * lap - reaction_eval(spec, u0, coeffs.rho)?)
}

/// Samples a 1-D field at `x` by cubic Lagrange interpolation between cell
/// centres (clamped to the nearest interior stencil).
pub fn interpolate(xs: &[f64], u: &[f64], x: f64) -> f64 {
    let n = xs.len();
    let dx = xs[1] - xs[0];
    let s = (x - xs[0]) / dx;
    let i = (s.floor() as isize).clamp(1, n as isize - 3) as usize;
    let r = s - i as f64;
    let (a, b, c, d) = (u[i - 1], u[i], u[i + 1], u[i + 2]);
    // Nodes at -1, 0, 1, 2.
    let l0 = -r * (r - 1.0) * (r - 2.0) / 6.0;
    let l1 = (r + 1.0) * (r - 1.0) * (r - 2.0) / 2.0;
    let l2 = -(r + 1.0) * r * (r - 2.0) / 2.0;
    let l3 = (r + 1.0) * r * (r - 1.0) / 6.0;
    l0 * a + l1 * b + l2 * c + l3 * d
}
