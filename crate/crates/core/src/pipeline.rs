//! Scale, solve, unscale: using one trained network for any ρ, D and
//! dimension.
//!
//! A physical point `(x, t)` is mapped to `ξ = √(ρ/D) x`, `τ = ρ t`, the
//! network is evaluated on the planar wave coordinate `ζ̂ = n̂·ξ − ωτ`, and the
//! value comes back unchanged (the field itself is not rescaled).

use std::path::{Path, PathBuf};

use crate::checkpoint::{Checkpoint, TrainMeta};
use crate::equations::{exact_profile, exact_speed, PhysicalCoeffs, ReactionSpec};
use crate::error::{Error, Result};
use crate::math::{dot, linspace, norm};
use crate::wavenet::WaveNetParams;

/// Model tag written into traveling-wave checkpoints.
pub const MODEL_TAG: &str = "tw-pinn";

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Provenance {
    pub path: Option<PathBuf>,
    pub meta: Option<TrainMeta>,
}

/// A trained network bound to the equation it was trained on.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverHandle {
    pub params: WaveNetParams,
    pub spec: ReactionSpec,
    pub provenance: Provenance,
}

impl SolverHandle {
    pub fn new(params: WaveNetParams, spec: ReactionSpec) -> Result<Self> {
        let b = params.bounds();
        if b.v_minus != spec.v_minus || b.v_plus != spec.v_plus {
            return Err(Error::Config(format!(
                "network bounds ({}, {}) differ from the equilibria of {}",
                b.v_minus,
                b.v_plus,
                spec.name()
            )));
        }
        Ok(Self {
            params,
            spec,
            provenance: Provenance::default(),
        })
    }

    pub fn from_checkpoint(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let ck = Checkpoint::<WaveNetParams>::load(path, MODEL_TAG)?;
        let mut handle = Self::new(ck.params, ck.reaction)?;
        handle.provenance = Provenance {
            path: Some(path.to_path_buf()),
            meta: Some(ck.meta),
        };
        Ok(handle)
    }

    /// Physical front speed `ω √(ρ D)` implied by the learned ω.
    pub fn speed(&self, coeffs: &PhysicalCoeffs) -> f64 {
        self.params.omega * (coeffs.rho * coeffs.d).sqrt()
    }
}

/// Returns `n / |n|`.
pub fn normalize_direction(n_dir: &[f64]) -> Result<Vec<f64>> {
    let len = norm(n_dir);
    if n_dir.is_empty() || !len.is_finite() || len == 0.0 {
        return Err(Error::param("n_dir", "direction must be a nonzero finite vector"));
    }
    Ok(n_dir.iter().map(|v| v / len).collect())
}

#[inline]
fn predict_unit(handle: &SolverHandle, coeffs: &PhysicalCoeffs, unit: &[f64], x: &[f64], t: f64) -> f64 {
    let k = coeffs.length_scale();
    let zeta = k * dot(unit, x) - handle.params.omega * (coeffs.rho * t);
    handle.params.net.value(zeta)
}

/// `û(x, t)` for any dimension; `n_dir` is normalized here.
pub fn predict(
    handle: &SolverHandle,
    coeffs: &PhysicalCoeffs,
    n_dir: &[f64],
    point: &crate::equations::PhysicalPoint,
) -> Result<f64> {
    let unit = normalize_direction(n_dir)?;
    if unit.len() != point.x.len() {
        return Err(Error::Shape(format!(
            "direction has dimension {}, point has {}",
            unit.len(),
            point.x.len()
        )));
    }
    Ok(predict_unit(handle, coeffs, &unit, &point.x, point.t))
}

/// A tensor-product evaluation box: one interval per spatial axis and a time
/// interval.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalDomain {
    pub x: Vec<[f64; 2]>,
    pub t: [f64; 2],
}

impl EvalDomain {
    pub fn dim(&self) -> usize {
        self.x.len()
    }
}

/// The tabulated evaluation box for `spec` at `rho ∈ {1, 1e2, 1e4, 1e6}`,
/// with the same interval on every spatial axis.
pub fn table_domain(spec: &ReactionSpec, rho: f64, dim: usize) -> Result<EvalDomain> {
    use crate::equations::EquationKind::*;
    if dim == 0 {
        return Err(Error::param("dim", "must be at least 1"));
    }
    let decade = [1.0, 1e2, 1e4, 1e6]
        .iter()
        .position(|&r| r == rho)
        .ok_or_else(|| Error::param("rho", format!("no tabulated domain for ρ = {rho}")))?;
    let (wide, narrow, t_unit): ([f64; 2], [f64; 2], f64) = match spec.kind {
        Fisher | Nws => ([-5.0, 25.0], [-1.0, 5.0], 10.0),
        Zeldovich => ([-5.0, 25.0], [-1.0, 5.0], 30.0),
        Bistable => ([-25.0, 5.0], [-5.0, 1.0], 25.0),
    };
    // t_max = t_unit at ρ = 1, then t_unit/50, /500, /5000.
    let (x, t_max) = match decade {
        0 => (wide, t_unit),
        k => (narrow, t_unit / (50.0 * 10f64.powi(k as i32 - 1))),
    };
    Ok(EvalDomain {
        x: vec![x; dim],
        t: [0.0, t_max],
    })
}

/// Samples per axis; the default is 500 for 1-D and 100 for 2-D grids.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct GridCounts {
    pub x: usize,
    pub t: usize,
}

impl GridCounts {
    pub fn default_for(dim: usize) -> Self {
        if dim == 1 {
            Self { x: 500, t: 500 }
        } else {
            Self { x: 100, t: 100 }
        }
    }
}

/// Field values on a uniform tensor grid, stored `[t][x1][x2]...` with `t`
/// slowest and the last spatial axis fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldGrid {
    pub axes: Vec<Vec<f64>>,
    pub t: Vec<f64>,
    pub values: Vec<f64>,
    pub direction: Vec<f64>,
}

impl FieldGrid {
    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    /// Number of spatial samples per time slice.
    pub fn slice_len(&self) -> usize {
        self.axes.iter().map(Vec::len).product()
    }

    pub fn slice(&self, ti: usize) -> &[f64] {
        let n = self.slice_len();
        &self.values[ti * n..(ti + 1) * n]
    }

    fn same_shape(&self, other: &FieldGrid) -> Result<()> {
        if self.axes.len() != other.axes.len()
            || self.axes.iter().zip(&other.axes).any(|(a, b)| a.len() != b.len())
            || self.t.len() != other.t.len()
            || self.values.len() != other.values.len()
        {
            return Err(Error::Shape("field grids have different shapes".into()));
        }
        Ok(())
    }

    /// Spatial coordinates of flat index `j` within a slice.
    fn coords(&self, mut j: usize, out: &mut [f64]) {
        for d in (0..self.axes.len()).rev() {
            let n = self.axes[d].len();
            out[d] = self.axes[d][j % n];
            j /= n;
        }
    }

    /// Writes `x1[,x2],t,u_pred[,u_exact,abs_err]`.
    pub fn write_csv(&self, path: impl AsRef<Path>, oracle: Option<&FieldGrid>) -> Result<()> {
        self.write_csv_as(path, oracle, "u_exact")
    }

    /// As [`FieldGrid::write_csv`] with the oracle column named `label`.
    pub fn write_csv_as(&self, path: impl AsRef<Path>, oracle: Option<&FieldGrid>, label: &str) -> Result<()> {
        let path = path.as_ref();
        if let Some(o) = oracle {
            self.same_shape(o)?;
        }
        let mut w = csv::Writer::from_path(path)?;
        let mut header: Vec<String> = (1..=self.dim()).map(|d| format!("x{d}")).collect();
        header.extend(["t".to_string(), "u_pred".to_string()]);
        if oracle.is_some() {
            header.extend([label.to_string(), "abs_err".to_string()]);
        }
        w.write_record(&header)?;
        let n = self.slice_len();
        let mut x = vec![0.0; self.dim()];
        let mut row = Vec::with_capacity(header.len());
        for (ti, &t) in self.t.iter().enumerate() {
            for j in 0..n {
                self.coords(j, &mut x);
                let k = ti * n + j;
                row.clear();
                row.extend(x.iter().map(f64::to_string));
                row.push(t.to_string());
                row.push(self.values[k].to_string());
                if let Some(o) = oracle {
                    row.push(o.values[k].to_string());
                    row.push((self.values[k] - o.values[k]).abs().to_string());
                }
                w.write_record(&row)?;
            }
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

fn build_grid(
    n_dir: &[f64],
    domain: &EvalDomain,
    counts: GridCounts,
    mut f: impl FnMut(&[f64], &[f64], f64) -> f64,
) -> Result<FieldGrid> {
    let unit = normalize_direction(n_dir)?;
    if unit.len() != domain.dim() {
        return Err(Error::Shape(format!(
            "domain has dimension {}, direction has {}",
            domain.dim(),
            unit.len()
        )));
    }
    if counts.x < 2 || counts.t < 2 {
        return Err(Error::param("counts", "need at least 2 samples per axis"));
    }
    let axes: Vec<Vec<f64>> = domain.x.iter().map(|&[lo, hi]| linspace(lo, hi, counts.x)).collect();
    let t = linspace(domain.t[0], domain.t[1], counts.t);
    let mut grid = FieldGrid {
        axes,
        t,
        values: Vec::new(),
        direction: unit,
    };
    let n = grid.slice_len();
    grid.values.reserve(n * grid.t.len());
    let mut x = vec![0.0; grid.dim()];
    for &tv in &grid.t {
        for j in 0..n {
            grid.coords(j, &mut x);
            grid.values.push(f(&grid.direction, &x, tv));
        }
    }
    Ok(grid)
}

/// Dense evaluation of [`predict`] over the grid.
pub fn evaluate_grid(
    handle: &SolverHandle,
    coeffs: &PhysicalCoeffs,
    n_dir: &[f64],
    domain: &EvalDomain,
    counts: GridCounts,
) -> Result<FieldGrid> {
    build_grid(n_dir, domain, counts, |u, x, t| predict_unit(handle, coeffs, u, x, t))
}

/// The closed-form solution sampled on the same grid as [`evaluate_grid`].
pub fn exact_grid(
    spec: &ReactionSpec,
    coeffs: &PhysicalCoeffs,
    n_dir: &[f64],
    domain: &EvalDomain,
    counts: GridCounts,
) -> Result<FieldGrid> {
    let c = exact_speed(spec, coeffs);
    build_grid(n_dir, domain, counts, |u, x, t| exact_profile(spec, coeffs, dot(u, x) - c * t))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorReport {
    pub l2: f64,
    pub linf: f64,
    pub n_points: usize,
}

/// Root-mean-square and maximum absolute difference over all samples.
pub fn error_report(predicted: &FieldGrid, oracle: &FieldGrid) -> Result<ErrorReport> {
    predicted.same_shape(oracle)?;
    let n = predicted.values.len();
    if n == 0 {
        return Err(Error::Shape("empty field".into()));
    }
    let mut sq = 0.0;
    let mut linf: f64 = 0.0;
    for (p, o) in predicted.values.iter().zip(&oracle.values) {
        let d = (p - o).abs();
        sq += d * d;
        linf = linf.max(d);
    }
    Ok(ErrorReport {
        l2: (sq / n as f64).sqrt(),
        linf,
        n_points: n,
    })
}

/// Maximum absolute error on each time slice.
pub fn max_error_over_time(predicted: &FieldGrid, oracle: &FieldGrid) -> Result<Vec<f64>> {
    predicted.same_shape(oracle)?;
    Ok((0..predicted.t.len())
        .map(|ti| {
            predicted
                .slice(ti)
                .iter()
                .zip(oracle.slice(ti))
                .fold(0.0f64, |m, (p, o)| m.max((p - o).abs()))
        })
        .collect())
}

/// Evaluates `handle` against the closed form on the tabulated domain.
pub fn tabulated_error(
    handle: &SolverHandle,
    rho: f64,
    n_dir: &[f64],
    counts: Option<GridCounts>,
) -> Result<ErrorReport> {
    let coeffs = PhysicalCoeffs::new(rho, 1.0)?;
    let domain = table_domain(&handle.spec, rho, n_dir.len())?;
    let counts = counts.unwrap_or_else(|| GridCounts::default_for(n_dir.len()));
    let pred = evaluate_grid(handle, &coeffs, n_dir, &domain, counts)?;
    let exact = exact_grid(&handle.spec, &coeffs, n_dir, &domain, counts)?;
    error_report(&pred, &exact)
}
