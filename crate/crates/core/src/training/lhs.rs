//! Latin hypercube sampling.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use crate::error::{Error, Result};

/// An axis-aligned rectangle `[xi_lo, xi_hi] × [tau_lo, tau_hi]`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Rect {
    pub xi: [f64; 2],
    pub tau: [f64; 2],
}

impl Rect {
    pub fn new(xi_lo: f64, xi_hi: f64, tau_lo: f64, tau_hi: f64) -> Self {
        Self {
            xi: [xi_lo, xi_hi],
            tau: [tau_lo, tau_hi],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |[lo, hi]: [f64; 2]| lo.is_finite() && hi.is_finite() && lo < hi;
        if !ok(self.xi) || !ok(self.tau) {
            return Err(Error::Config(format!("degenerate rectangle {self:?}")));
        }
        Ok(())
    }

    pub fn contains(&self, xi: f64, tau: f64) -> bool {
        (self.xi[0]..=self.xi[1]).contains(&xi) && (self.tau[0]..=self.tau[1]).contains(&tau)
    }
}

/// `n` points in the unit cube `[0,1)^dims` with exactly one point per stratum
/// `[k/n, (k+1)/n)` on every axis.
pub fn lhs_unit<R: Rng>(dims: usize, n: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut points = vec![vec![0.0; dims]; n];
    let inv = 1.0 / n as f64;
    let mut perm: Vec<usize> = (0..n).collect();
    for d in 0..dims {
        perm.shuffle(rng);
        for (p, &k) in points.iter_mut().zip(&perm) {
            let u: f64 = rng.random();
            p[d] = ((k as f64 + u) * inv).min(((k + 1) as f64 * inv).next_down());
        }
    }
    points
}

/// One-dimensional LHS over `[lo, hi]`.
pub fn lhs_interval<R: Rng>(lo: f64, hi: f64, n: usize, rng: &mut R) -> Vec<f64> {
    lhs_unit(1, n, rng)
        .into_iter()
        .map(|p| lo + (hi - lo) * p[0])
        .collect()
}

/// Latin hypercube sample of `n` points in `rect`, reproducible per seed.
pub fn lhs_sample(rect: &Rect, n: usize, seed: u64) -> Result<Vec<[f64; 2]>> {
    rect.validate()?;
    if n == 0 {
        return Err(Error::Config("sample count must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(lhs_in_rect(rect, n, &mut rng))
}

pub(crate) fn lhs_in_rect<R: Rng>(rect: &Rect, n: usize, rng: &mut R) -> Vec<[f64; 2]> {
    let [x0, x1] = rect.xi;
    let [t0, t1] = rect.tau;
    lhs_unit(2, n, rng)
        .into_iter()
        .map(|p| [x0 + (x1 - x0) * p[0], t0 + (t1 - t0) * p[1]])
        .collect()
}
