//! Experiment plans, seed sweeps, cached checkpoints and result tables.
//!
//! A plan trains each (equation, preset) cell over a list of seeds, keeps the
//! runs whose verdict is physical, evaluates every kept solver on the
//! tabulated grids and aggregates mean and sample standard deviation over
//! seeds. Re-running a plan reuses the checkpoints written by earlier runs.

pub mod cli;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::baseline::{self, WavePinnConfig, WavePinnParams};
use crate::checkpoint::{Checkpoint, TrainMeta};
use crate::equations::{exact_profile, exact_speed, PhysicalCoeffs, ReactionSpec};
use crate::error::{Error, Result};
use crate::gtw::{self, front_position, GtwConfig, GtwParams};
use crate::reference::{ref_solve, RefConfig, RefInitial};
use crate::math::linspace;
use crate::pipeline::{
    error_report, evaluate_grid, exact_grid, table_domain, tabulated_error, ErrorReport, FieldGrid, GridCounts,
    SolverHandle, MODEL_TAG,
};
use crate::training::{scaled_speed, train, DomainPreset, TrainConfig, Verdict};
use crate::wavenet::WaveNetParams;

pub const TABLE_RHOS: [f64; 4] = [1.0, 1e2, 1e4, 1e6];

/// How many seeds of the list are consumed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SweepMode {
    /// Train seeds in order until `count` physical solvers exist.
    CountTarget { count: usize },
    /// Train every seed and keep the physical ones.
    FixedBudget,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    /// Short names as accepted by [`ReactionSpec::from_name`].
    pub equations: Vec<String>,
    pub presets: Vec<DomainPreset>,
    #[serde(default = "defaults::rhos")]
    pub rhos: Vec<f64>,
    #[serde(default = "defaults::dims")]
    pub dims: Vec<usize>,
    #[serde(default = "defaults::directions")]
    pub directions: Vec<Vec<f64>>,
    pub seeds: Vec<u64>,
    #[serde(default = "defaults::mode")]
    pub mode: SweepMode,
    /// Training overrides; unset fields keep the training defaults.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epochs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_1d: Option<GridCounts>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_2d: Option<GridCounts>,
    #[serde(default = "defaults::out_dir")]
    pub out_dir: PathBuf,
    /// Fail with "checkpoint not found" instead of training.
    #[serde(skip)]
    pub require_cached: bool,
}

mod defaults {
    use super::*;
    pub fn rhos() -> Vec<f64> {
        TABLE_RHOS.to_vec()
    }
    pub fn dims() -> Vec<usize> {
        vec![1, 2]
    }
    pub fn directions() -> Vec<Vec<f64>> {
        vec![vec![1.0, 1.0], vec![1.0, 3.0]]
    }
    pub fn mode() -> SweepMode {
        SweepMode::CountTarget { count: 10 }
    }
    pub fn out_dir() -> PathBuf {
        PathBuf::from("results")
    }
}

impl ExperimentPlan {
    pub fn new(equations: &[&str], presets: &[DomainPreset], seeds: Vec<u64>) -> Self {
        Self {
            equations: equations.iter().map(|s| s.to_string()).collect(),
            presets: presets.to_vec(),
            rhos: defaults::rhos(),
            dims: defaults::dims(),
            directions: defaults::directions(),
            seeds,
            mode: SweepMode::FixedBudget,
            epochs: None,
            n_points: None,
            grid_1d: None,
            grid_2d: None,
            out_dir: defaults::out_dir(),
            require_cached: false,
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let plan: Self = toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn specs(&self) -> Result<Vec<ReactionSpec>> {
        self.equations.iter().map(|n| ReactionSpec::from_name(n)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let empty = |what: &str| Err(Error::Config(format!("plan has an empty {what} list")));
        if self.equations.is_empty() {
            return empty("equation");
        }
        if self.presets.is_empty() {
            return empty("preset");
        }
        if self.seeds.is_empty() {
            return empty("seed");
        }
        if self.rhos.is_empty() {
            return empty("rho");
        }
        if self.dims.is_empty() {
            return empty("dimension");
        }
        self.specs()?;
        if self.seeds.iter().collect::<BTreeSet<_>>().len() != self.seeds.len() {
            return Err(Error::Config("plan seeds must be distinct".into()));
        }
        if let Some(r) = self.rhos.iter().find(|r| !TABLE_RHOS.contains(r)) {
            return Err(Error::Config(format!("no tabulated domain for rho = {r}")));
        }
        if let Some(d) = self.dims.iter().find(|&&d| d != 1 && d != 2) {
            return Err(Error::Config(format!("dimension {d} is not tabulated; use 1 or 2")));
        }
        if self.dims.contains(&2) && (self.directions.is_empty() || self.directions.iter().any(|d| d.len() != 2)) {
            return Err(Error::Config("2-D evaluation needs a list of 2-component directions".into()));
        }
        if let SweepMode::CountTarget { count: 0 } = self.mode {
            return Err(Error::Config("count target must be at least 1".into()));
        }
        Ok(())
    }

    /// Training configuration for one cell of the plan.
    pub fn train_config(&self, spec: ReactionSpec, preset: DomainPreset, seed: u64) -> TrainConfig {
        let mut cfg = TrainConfig::new(spec, preset, seed);
        if let Some(e) = self.epochs {
            cfg.epochs = e;
        }
        if let Some(n) = self.n_points {
            cfg.n_icbc = n;
            cfg.n_res = n;
        }
        cfg
    }

    fn counts(&self, dim: usize) -> GridCounts {
        let chosen = if dim == 1 { self.grid_1d } else { self.grid_2d };
        chosen.unwrap_or_else(|| GridCounts::default_for(dim))
    }
}

/// A trained (or reloaded) solver.
#[derive(Clone, Debug)]
pub struct TrainedSolver {
    pub handle: SolverHandle,
    pub meta: TrainMeta,
    pub path: PathBuf,
    /// `None` when the checkpoint came from the cache.
    pub wall_time: Option<f64>,
}

pub fn checkpoint_path(dir: &Path, config: &TrainConfig) -> PathBuf {
    dir.join(format!(
        "{}_{}_seed{}.toml",
        config.reaction.name(),
        config.preset.name(),
        config.seed
    ))
}

/// Loads the checkpoint for `config` from `dir` if one with matching
/// metadata exists, otherwise trains and saves it. A run log is written
/// next to fresh runs when `runlog` is given.
pub fn train_or_load(config: &TrainConfig, dir: &Path, runlog: Option<&Path>) -> Result<TrainedSolver> {
    load_or_train(config, dir, runlog, true)
}

fn load_or_train(config: &TrainConfig, dir: &Path, runlog: Option<&Path>, allow_training: bool) -> Result<TrainedSolver> {
    let path = checkpoint_path(dir, config);
    match Checkpoint::<WaveNetParams>::load(&path, MODEL_TAG) {
        Ok(ck) if ck.reaction == config.reaction && ck.meta.matches(config) => {
            let handle = SolverHandle::from_checkpoint(&path)?;
            return Ok(TrainedSolver {
                handle,
                meta: ck.meta,
                path,
                wall_time: None,
            });
        }
        Ok(_) | Err(Error::CheckpointNotFound(_)) => {}
        Err(e) => return Err(e),
    }
    if !allow_training {
        return Err(Error::CheckpointNotFound(path));
    }
    let report = train(config)?;
    if let Some(log) = runlog {
        if let Some(parent) = log.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        report.write_runlog(log, "omega")?;
    }
    let meta = TrainMeta::from_run(config, &report);
    Checkpoint::new(MODEL_TAG, config.reaction, meta.clone(), report.final_params.clone()).save(&path)?;
    let mut handle = SolverHandle::new(report.final_params, config.reaction)?;
    handle.provenance.path = Some(path.clone());
    handle.provenance.meta = Some(meta.clone());
    Ok(TrainedSolver {
        handle,
        meta,
        path,
        wall_time: Some(report.wall_time),
    })
}

/// Wave-PINN counterpart of [`train_or_load`].
pub fn train_or_load_wavepinn(config: &WavePinnConfig, dir: &Path, runlog: Option<&Path>) -> Result<(WavePinnParams, TrainMeta)> {
    let path = dir.join(format!("wavepinn_seed{}.toml", config.seed));
    match Checkpoint::<WavePinnParams>::load(&path, baseline::MODEL_TAG) {
        Ok(ck) if config.matches(&ck.meta) => {
            ck.params.validate()?;
            return Ok((ck.params, ck.meta));
        }
        Ok(_) | Err(Error::CheckpointNotFound(_)) => {}
        Err(e) => return Err(e),
    }
    let report = baseline::train_wavepinn(config)?;
    if let Some(log) = runlog {
        if let Some(parent) = log.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        report.write_runlog(log, "speed")?;
    }
    let meta = config.meta(&report);
    Checkpoint::new(baseline::MODEL_TAG, config.reaction, meta.clone(), report.final_params.clone()).save(&path)?;
    Ok((report.final_params, meta))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L2,
    Linf,
}

impl Norm {
    pub fn name(self) -> &'static str {
        match self {
            Norm::L2 => "L2",
            Norm::Linf => "Linf",
        }
    }

    fn of(self, r: &ErrorReport) -> f64 {
        match self {
            Norm::L2 => r.l2,
            Norm::Linf => r.linf,
        }
    }
}

/// One training run of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub equation: String,
    pub preset: DomainPreset,
    pub seed: u64,
    pub verdict: Verdict,
    pub omega: f64,
    pub exact: f64,
    pub abs_err: f64,
    pub final_loss: f64,
}

/// Error of one physical solver on one tabulated grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedError {
    pub equation: String,
    pub preset: DomainPreset,
    pub seed: u64,
    pub rho: f64,
    pub dim: usize,
    pub direction: String,
    pub l2: f64,
    pub linf: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub equation: String,
    pub preset: DomainPreset,
    pub rho: f64,
    pub dim: usize,
    pub direction: String,
    pub norm: Norm,
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

/// Learned-speed statistics over the physical runs of one cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeedRow {
    pub equation: String,
    pub preset: DomainPreset,
    pub runs: usize,
    pub physical: usize,
    pub exact: f64,
    pub omega_mean: f64,
    pub omega_std: f64,
    pub abs_err_mean: f64,
    pub abs_err_std: f64,
    /// `ok`, or a note that the seed list ran out.
    pub status: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ResultsTable {
    pub runs: Vec<RunRecord>,
    pub seed_errors: Vec<SeedError>,
    pub rows: Vec<TableRow>,
    pub speeds: Vec<SpeedRow>,
    pub warnings: Vec<String>,
}

impl ResultsTable {
    pub fn get(&self, equation: &str, preset: DomainPreset, rho: f64, direction: &str, norm: Norm) -> Option<&TableRow> {
        self.rows.iter().find(|r| {
            r.equation == equation && r.preset == preset && r.rho == rho && r.direction == direction && r.norm == norm
        })
    }
}

/// Mean and sample standard deviation (divisor `n − 1`). A single value
/// has standard deviation 0.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1) as f64).sqrt())
}

pub fn direction_label(n_dir: &[f64]) -> String {
    n_dir.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(",")
}

/// Timing and cache information for the summary file.
#[derive(Clone, Debug, Default, Serialize)]
pub struct RunStats {
    pub trained: usize,
    pub cached: usize,
    pub training_seconds: f64,
    pub total_seconds: f64,
}

/// Executes `plan`, writing checkpoints, run logs and CSV tables under
/// `plan.out_dir`.
pub fn run_plan(plan: &ExperimentPlan) -> Result<ResultsTable> {
    let (table, _) = run_plan_with_stats(plan)?;
    Ok(table)
}

pub fn run_plan_with_stats(plan: &ExperimentPlan) -> Result<(ResultsTable, RunStats)> {
    plan.validate()?;
    let start = Instant::now();
    let out = &plan.out_dir;
    let ck_dir = out.join("checkpoints");
    let mut table = ResultsTable::default();
    let mut stats = RunStats::default();

    for spec in plan.specs()? {
        let name = spec.name();
        for &preset in &plan.presets {
            let mut kept: Vec<TrainedSolver> = Vec::new();
            let mut runs = 0;
            for &seed in &plan.seeds {
                if let SweepMode::CountTarget { count } = plan.mode {
                    if kept.len() >= count {
                        break;
                    }
                }
                let cfg = plan.train_config(spec, preset, seed);
                let log = out.join("runlogs").join(format!("{name}_{}", preset.name())).join(format!("runlog_{seed}.csv"));
                let solver = load_or_train(&cfg, &ck_dir, Some(&log), !plan.require_cached)?;
                match solver.wall_time {
                    Some(t) => {
                        stats.trained += 1;
                        stats.training_seconds += t;
                    }
                    None => stats.cached += 1,
                }
                runs += 1;
                let exact = scaled_speed(&spec);
                let omega = solver.handle.params.omega;
                table.runs.push(RunRecord {
                    equation: name.clone(),
                    preset,
                    seed,
                    verdict: solver.meta.verdict,
                    omega,
                    exact,
                    abs_err: (omega - exact).abs(),
                    final_loss: solver.meta.final_loss,
                });
                if solver.meta.verdict.is_physical() {
                    kept.push(solver);
                }
            }

            let mut status = "ok".to_string();
            if let SweepMode::CountTarget { count } = plan.mode {
                if kept.len() < count {
                    status = format!("partial: {} of {count} physical solvers", kept.len());
                    table.warnings.push(format!(
                        "{name}/{}: seed list exhausted with {} of {count} physical solvers",
                        preset.name(),
                        kept.len()
                    ));
                }
            }
            let exact = scaled_speed(&spec);
            let omegas: Vec<f64> = kept.iter().map(|s| s.handle.params.omega).collect();
            let errs: Vec<f64> = omegas.iter().map(|w| (w - exact).abs()).collect();
            let (omega_mean, omega_std) = mean_std(&omegas);
            let (abs_err_mean, abs_err_std) = mean_std(&errs);
            table.speeds.push(SpeedRow {
                equation: name.clone(),
                preset,
                runs,
                physical: kept.len(),
                exact,
                omega_mean,
                omega_std,
                abs_err_mean,
                abs_err_std,
                status,
            });

            let mut cases: Vec<Vec<f64>> = Vec::new();
            for &dim in &plan.dims {
                if dim == 1 {
                    cases.push(vec![1.0]);
                } else {
                    cases.extend(plan.directions.iter().cloned());
                }
            }
            for n_dir in &cases {
                let dim = n_dir.len();
                let label = direction_label(n_dir);
                for &rho in &plan.rhos {
                    let mut reports = Vec::with_capacity(kept.len());
                    for s in &kept {
                        let r = tabulated_error(&s.handle, rho, n_dir, Some(plan.counts(dim)))?;
                        table.seed_errors.push(SeedError {
                            equation: name.clone(),
                            preset,
                            seed: s.meta.seed,
                            rho,
                            dim,
                            direction: label.clone(),
                            l2: r.l2,
                            linf: r.linf,
                        });
                        reports.push(r);
                    }
                    for norm in [Norm::L2, Norm::Linf] {
                        let vals: Vec<f64> = reports.iter().map(|r| norm.of(r)).collect();
                        let (mean, std) = mean_std(&vals);
                        table.rows.push(TableRow {
                            equation: name.clone(),
                            preset,
                            rho,
                            dim,
                            direction: label.clone(),
                            norm,
                            mean,
                            std,
                            n: vals.len(),
                        });
                    }
                }
            }
        }
    }
    stats.total_seconds = start.elapsed().as_secs_f64();
    write_tables(&table, out, &plan.rhos)?;
    write_summary(plan, &table, &stats, &out.join("summary.toml"))?;
    Ok((table, stats))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_rows<T: Serialize>(path: &Path, header_only: &[&str], rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(!rows.is_empty()).from_path(path)?;
    if rows.is_empty() {
        w.write_record(header_only)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn rho_label(rho: f64) -> String {
    format!("{rho:e}")
}

/// Writes `wavespeed.csv`, `runs.csv`, `seed_errors.csv`, `errors_1d.csv`
/// and `errors_2d.csv`. The error tables have one row per (equation,
/// preset, direction, norm) and a mean/std column pair per ρ.
pub fn write_tables(table: &ResultsTable, out: &Path, rhos: &[f64]) -> Result<()> {
    ensure_dir(out)?;
    write_rows(
        &out.join("wavespeed.csv"),
        &["equation", "preset", "runs", "physical", "exact", "omega_mean", "omega_std", "abs_err_mean", "abs_err_std", "status"],
        &table.speeds,
    )?;
    write_rows(
        &out.join("runs.csv"),
        &["equation", "preset", "seed", "verdict", "omega", "exact", "abs_err", "final_loss"],
        &table.runs,
    )?;
    write_rows(
        &out.join("seed_errors.csv"),
        &["equation", "preset", "seed", "rho", "dim", "direction", "l2", "linf"],
        &table.seed_errors,
    )?;
    for dim in [1, 2] {
        let path = out.join(format!("errors_{dim}d.csv"));
        let mut w = csv::Writer::from_path(&path)?;
        let mut header: Vec<String> = ["equation", "preset", "direction", "norm", "n"].map(String::from).to_vec();
        for &rho in rhos {
            header.push(format!("mean_rho={}", rho_label(rho)));
            header.push(format!("std_rho={}", rho_label(rho)));
        }
        w.write_record(&header)?;
        let mut keys: Vec<(String, DomainPreset, String, Norm)> = Vec::new();
        for r in table.rows.iter().filter(|r| r.dim == dim) {
            let k = (r.equation.clone(), r.preset, r.direction.clone(), r.norm);
            if !keys.contains(&k) {
                keys.push(k);
            }
        }
        for (eq, preset, dir, norm) in keys {
            let mut rec = vec![eq.clone(), preset.name().to_string(), dir.clone(), norm.name().to_string()];
            let mut n = 0;
            let mut cells = Vec::new();
            for &rho in rhos {
                match table.get(&eq, preset, rho, &dir, norm) {
                    Some(row) => {
                        n = row.n;
                        cells.push(row.mean.to_string());
                        cells.push(row.std.to_string());
                    }
                    None => cells.extend([String::new(), String::new()]),
                }
            }
            rec.push(n.to_string());
            rec.extend(cells);
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct Summary<'a> {
    version: &'static str,
    std_convention: &'static str,
    plan: &'a ExperimentPlan,
    timings: &'a RunStats,
    warnings: &'a [String],
}

fn write_summary(plan: &ExperimentPlan, table: &ResultsTable, stats: &RunStats, path: &Path) -> Result<()> {
    let s = Summary {
        version: env!("CARGO_PKG_VERSION"),
        std_convention: "sample (n - 1)",
        plan,
        timings: stats,
        warnings: &table.warnings,
    };
    let text = toml::to_string(&s).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Head-to-head errors of both models at one ρ.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub model: String,
    pub rho: f64,
    pub l2_mean: f64,
    pub l2_std: f64,
    pub linf_mean: f64,
    pub linf_std: f64,
    pub n: usize,
}

/// Front locations at the final tabulated time.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrontRow {
    pub model: String,
    pub seed: u64,
    pub rho: f64,
    pub t: f64,
    pub front: f64,
    pub exact_front: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
    pub fronts: Vec<FrontRow>,
}

/// Samples for locating fronts on the tabulated spatial interval.
const FRONT_SAMPLES: usize = 20_001;

fn front_of(f: impl Fn(f64) -> Result<f64>, x: [f64; 2], level: f64) -> Result<f64> {
    let xs = linspace(x[0], x[1], FRONT_SAMPLES);
    let vs = xs.iter().map(|&x| f(x)).collect::<Result<Vec<f64>>>()?;
    front_position(&xs, &vs, level)
}

/// Errors of trained TW-PINN and wave-PINN solvers for the Fisher equation
/// on the tabulated 1-D grids, plus the midpoint front position of each
/// solver at the final time.
pub fn compare_models(
    tw: &[(u64, SolverHandle)],
    wp: &[(u64, WavePinnParams)],
    rhos: &[f64],
    counts: Option<GridCounts>,
) -> Result<Comparison> {
    let spec = ReactionSpec::fisher();
    let counts = counts.unwrap_or_else(|| GridCounts::default_for(1));
    let level = 0.5 * (spec.v_minus + spec.v_plus);
    let mut out = Comparison::default();
    for &rho in rhos {
        let coeffs = PhysicalCoeffs::new(rho, 1.0)?;
        let domain = table_domain(&spec, rho, 1)?;
        let exact = exact_grid(&spec, &coeffs, &[1.0], &domain, counts)?;
        let t_end = domain.t[1];
        let c = exact_speed(&spec, &coeffs);
        let exact_front = front_of(|x| Ok(exact_profile(&spec, &coeffs, x - c * t_end)), domain.x[0], level)?;

        let mut tw_reports = Vec::new();
        for (seed, h) in tw {
            let pred = evaluate_grid(h, &coeffs, &[1.0], &domain, counts)?;
            tw_reports.push(error_report(&pred, &exact)?);
            let k = coeffs.length_scale();
            let front = front_of(|x| Ok(h.params.net.value(k * x - h.params.omega * rho * t_end)), domain.x[0], level)?;
            out.fronts.push(FrontRow { model: "scaled-tw-pinn".into(), seed: *seed, rho, t: t_end, front, exact_front });
        }
        let mut wp_reports = Vec::new();
        for (seed, p) in wp {
            let pred = baseline::wavepinn_grid(p, rho, &domain, counts)?;
            wp_reports.push(error_report(&pred, &exact)?);
            let front = front_of(|x| baseline::wavepinn_forward(p, rho, x, t_end), domain.x[0], level)?;
            out.fronts.push(FrontRow { model: "wave-pinn".into(), seed: *seed, rho, t: t_end, front, exact_front });
        }
        for (model, reports) in [("wave-pinn", &wp_reports), ("scaled-tw-pinn", &tw_reports)] {
            if reports.is_empty() {
                continue;
            }
            let (l2_mean, l2_std) = mean_std(&reports.iter().map(|r| r.l2).collect::<Vec<_>>());
            let (linf_mean, linf_std) = mean_std(&reports.iter().map(|r| r.linf).collect::<Vec<_>>());
            out.rows.push(ComparisonRow {
                model: model.into(),
                rho,
                l2_mean,
                l2_std,
                linf_mean,
                linf_std,
                n: reports.len(),
            });
        }
    }
    Ok(out)
}

/// Writes `comparison.csv` (model × norm rows, a mean/std pair per ρ) and
/// `fronts.csv`.
pub fn write_comparison(cmp: &Comparison, out: &Path) -> Result<()> {
    ensure_dir(out)?;
    let mut rhos: Vec<f64> = Vec::new();
    for r in &cmp.rows {
        if !rhos.contains(&r.rho) {
            rhos.push(r.rho);
        }
    }
    let path = out.join("comparison.csv");
    let mut w = csv::Writer::from_path(&path)?;
    let mut header: Vec<String> = vec!["model".into(), "norm".into(), "n".into()];
    for &rho in &rhos {
        header.push(format!("mean_rho={}", rho_label(rho)));
        header.push(format!("std_rho={}", rho_label(rho)));
    }
    w.write_record(&header)?;
    for model in ["wave-pinn", "scaled-tw-pinn"] {
        for norm in [Norm::L2, Norm::Linf] {
            let mut rec = vec![model.to_string(), norm.name().to_string()];
            let mut n = 0;
            let mut cells = Vec::new();
            for &rho in &rhos {
                match cmp.rows.iter().find(|r| r.model == model && r.rho == rho) {
                    Some(r) => {
                        n = r.n;
                        let (m, s) = match norm {
                            Norm::L2 => (r.l2_mean, r.l2_std),
                            Norm::Linf => (r.linf_mean, r.linf_std),
                        };
                        cells.push(m.to_string());
                        cells.push(s.to_string());
                    }
                    None => cells.extend([String::new(), String::new()]),
                }
            }
            if n == 0 {
                continue;
            }
            rec.push(n.to_string());
            rec.extend(cells);
            w.write_record(&rec)?;
        }
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    write_rows(&out.join("fronts.csv"), &["model", "seed", "rho", "t", "front", "exact_front"], &cmp.fronts)
}

/// Outcome of a general-IC run compared against the reference solver.
#[derive(Clone, Debug)]
pub struct GtwComparison {
    pub params: GtwParams,
    pub meta: TrainMeta,
    /// Network values on the reference grid and snapshot times.
    pub predicted: FieldGrid,
    pub reference: FieldGrid,
    /// Midpoint fronts at the final time.
    pub front: f64,
    pub reference_front: f64,
}

pub fn train_or_load_gtw(config: &GtwConfig, dir: &Path, runlog: Option<&Path>) -> Result<(GtwParams, TrainMeta)> {
    let path = dir.join(format!("gtw_{}_seed{}.toml", config.ic.name(), config.seed));
    match Checkpoint::<GtwParams>::load(&path, gtw::MODEL_TAG) {
        Ok(ck) if ck.meta == config.meta_template(&ck.meta) && ck.params.lambda == config.ic.lambda() => {
            ck.params.validate()?;
            return Ok((ck.params, ck.meta));
        }
        Ok(_) | Err(Error::CheckpointNotFound(_)) => {}
        Err(e) => return Err(e),
    }
    let report = gtw::train_gtw(config)?;
    if let Some(log) = runlog {
        if let Some(parent) = log.parent() {
            ensure_dir(parent)?;
        }
        report.write_runlog(log, "w")?;
    }
    let meta = config.meta(&report);
    Checkpoint::new(gtw::MODEL_TAG, config.reaction, meta.clone(), report.final_params.clone()).save(&path)?;
    Ok((report.final_params, meta))
}

/// Trains (or reloads) a general-IC network and compares it with
/// [`ref_solve`] started from the same initial data at reaction coefficient
/// `rho` (D = 1).
pub fn gtw_comparison(config: &GtwConfig, rho: f64, reference: &RefConfig, dir: &Path, runlog: Option<&Path>) -> Result<GtwComparison> {
    config.validate()?;
    let coeffs = PhysicalCoeffs::new(rho, 1.0)?;
    let (params, meta) = train_or_load_gtw(config, dir, runlog)?;
    let ref_grid = ref_solve(&config.reaction, &coeffs, &RefInitial::General(config.ic), reference)?;
    let mut values = Vec::with_capacity(ref_grid.values.len());
    for &t in &ref_grid.t {
        for &x in &ref_grid.axes[0] {
            values.push(params.predict(&coeffs, x, t));
        }
    }
    let predicted = FieldGrid {
        axes: ref_grid.axes.clone(),
        t: ref_grid.t.clone(),
        values,
        direction: vec![1.0],
    };
    let last = ref_grid.t.len() - 1;
    let xs = &ref_grid.axes[0];
    let level = 0.5 * (config.reaction.v_minus + config.reaction.v_plus);
    let front = front_position(xs, predicted.slice(last), level)?;
    let reference_front = front_position(xs, ref_grid.slice(last), level)?;
    Ok(GtwComparison {
        params,
        meta,
        predicted,
        reference: ref_grid,
        front,
        reference_front,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_std() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_std(&[7.0]), (7.0, 0.0));
        assert!(mean_std(&[]).0.is_nan());
    }

    #[test]
    fn plan_validation() {
        let plan = ExperimentPlan::new(&["fisher"], &[DomainPreset::Restricted], vec![1, 2]);
        plan.validate().unwrap();
        let mut p = plan.clone();
        p.seeds.clear();
        assert_eq!(p.validate().unwrap_err().kind(), "config");
        let mut p = plan.clone();
        p.seeds = vec![3, 3];
        assert!(p.validate().is_err());
        let mut p = plan.clone();
        p.rhos = vec![10.0];
        assert!(p.validate().is_err());
        let mut p = plan.clone();
        p.equations = vec!["heat".into()];
        assert!(p.validate().is_err());
        let mut p = plan;
        p.directions = vec![vec![1.0, 1.0, 1.0]];
        assert!(p.validate().is_err());
    }

    #[test]
    fn plan_toml_defaults() {
        let text = "equations = [\"fisher\", \"nws3\"]\npresets = [\"restricted\"]\nseeds = [1, 2, 3]\n";
        let plan: ExperimentPlan = toml::from_str(text).unwrap();
        assert_eq!(plan.rhos, TABLE_RHOS.to_vec());
        assert_eq!(plan.mode, SweepMode::CountTarget { count: 10 });
        assert_eq!(plan.dims, vec![1, 2]);
        let back: ExperimentPlan = toml::from_str(&toml::to_string(&plan).unwrap()).unwrap();
        assert_eq!(plan, back);
    }

    #[test]
    fn labels() {
        assert_eq!(direction_label(&[1.0, 3.0]), "1,3");
        assert_eq!(rho_label(1e6), "1e6");
        assert_eq!(rho_label(1.0), "1e0");
    }
}
