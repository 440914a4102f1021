//! Command-line front end.
//!
//! Failures print one line `error[<kind>]: <message>` on stderr and exit
//! with status 1; usage errors exit with status 2.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use super::{
    compare_models, gtw_comparison, run_plan_with_stats, train_or_load, train_or_load_wavepinn, write_comparison,
    ExperimentPlan, TABLE_RHOS,
};
use crate::baseline::WavePinnConfig;
use crate::equations::{PhysicalCoeffs, ReactionSpec};
use crate::error::{Error, Result};
use crate::gtw::{GeneralIC, GtwConfig};
use crate::pipeline::{
    error_report, evaluate_grid, exact_grid, max_error_over_time, normalize_direction, table_domain, GridCounts,
    SolverHandle,
};
use crate::reference::{ref_solve, RefConfig, RefInitial};
use crate::training::{train, DomainPreset, TrainConfig};

#[derive(Parser, Debug)]
#[command(name = "twpinn", version, about = "Scaled traveling-wave PINNs for reaction-diffusion equations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Train one network and write its checkpoint and run log.
    Train(TrainArgs),
    /// Run an experiment plan (seed sweep) and write the result tables.
    Sweep(PlanArgs),
    /// Evaluate a checkpoint on a tabulated grid against the closed form.
    Eval(EvalArgs),
    /// Train a general-initial-condition network and compare with the reference solver.
    Gtw(GtwArgs),
    /// Train the wave-PINN baseline and compare it with a TW-PINN checkpoint.
    Baseline(BaselineArgs),
    /// Run the finite-difference reference solver on its own.
    Reference(ReferenceArgs),
    /// Rebuild the result tables of a plan from cached checkpoints only.
    Tables(PlanArgs),
    /// Write the CSV files used for plotting.
    ExportPlots(ExportArgs),
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// A TOML training config, or a built-in name `<equation>_<preset>`
    /// such as `fisher_restricted`.
    #[arg(long)]
    pub config: String,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub preset: Option<DomainPreset>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct PlanArgs {
    /// A TOML experiment plan.
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the plan's output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub preset: Option<DomainPreset>,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Defaults to every tabulated value.
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    /// Propagation direction, e.g. `1,3`; defaults to all ones.
    #[arg(long, value_delimiter = ',')]
    pub dir: Option<Vec<f64>>,
    /// Where to write one field CSV per ρ; nothing is written when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct GtwArgs {
    /// A TOML general-IC training config; overrides `--ic`.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `step` or `logistic:<lambda>`.
    #[arg(long, default_value = "step")]
    pub ic: String,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 100.0)]
    pub rho: f64,
    #[arg(long, default_value_t = 0.3)]
    pub t_final: f64,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long, default_value = "gtw-out")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct BaselineArgs {
    /// TW-PINN checkpoint to compare with; when absent a Fisher network is
    /// trained on `--preset` with the same seed.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// A TOML wave-PINN config.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value = "original")]
    pub preset: DomainPreset,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Defaults to every tabulated value.
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long, default_value = "baseline-out")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ReferenceArgs {
    /// A TOML reference job; see [`ReferenceJob`].
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = "fisher")]
    pub equation: String,
    /// `exact`, `step`, `logistic:<lambda>` or `constant:<value>`.
    #[arg(long, default_value = "exact")]
    pub ic: String,
    #[arg(long, default_value_t = 1.0)]
    pub rho: f64,
    #[arg(long, default_value_t = 1.0)]
    pub diffusion: f64,
    #[arg(long, default_value = "-40,60", value_delimiter = ',')]
    pub x: Vec<f64>,
    #[arg(long, default_value_t = 5.0)]
    pub t_final: f64,
    #[arg(long, default_value_t = 2000)]
    pub cells: usize,
    #[arg(long, default_value = "reference.csv")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ExportArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long, default_value_t = 1e6)]
    pub rho: f64,
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    #[arg(long, value_delimiter = ',')]
    pub dir: Option<Vec<f64>>,
    #[arg(long, default_value = "plots")]
    pub out: PathBuf,
}

/// Reference-solver job file.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReferenceJob {
    pub equation: String,
    pub rho: f64,
    #[serde(default = "unit")]
    pub diffusion: f64,
    /// Same syntax as `--ic`.
    pub ic: String,
    pub solver: RefConfig,
}

fn unit() -> f64 {
    1.0
}

/// Parses argv and runs the command; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.kind());
            1
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train(a) => cmd_train(a),
        Command::Sweep(a) => cmd_plan(a, true),
        Command::Tables(a) => cmd_plan(a, false),
        Command::Eval(a) => cmd_eval(a),
        Command::Gtw(a) => cmd_gtw(a),
        Command::Baseline(a) => cmd_baseline(a),
        Command::Reference(a) => cmd_reference(a),
        Command::ExportPlots(a) => cmd_export(a),
    }
}

/// Reads a TOML training config, or builds one from `<equation>_<preset>`.
pub fn resolve_train_config(config: &str, seed: Option<u64>) -> Result<TrainConfig> {
    let path = Path::new(config);
    if path.exists() {
        let mut cfg = TrainConfig::load(path)?;
        if let Some(s) = seed {
            cfg.seed = s;
        }
        return Ok(cfg);
    }
    let (eq, preset) = config
        .rsplit_once('_')
        .ok_or_else(|| Error::Config(format!("`{config}` is neither a file nor a `<equation>_<preset>` name")))?;
    Ok(TrainConfig::new(ReactionSpec::from_name(eq)?, preset.parse()?, seed.unwrap_or(1)))
}

fn cmd_train(a: TrainArgs) -> Result<()> {
    let mut cfg = resolve_train_config(&a.config, a.seed)?;
    if let Some(p) = a.preset {
        cfg.preset = p;
    }
    if let Some(e) = a.epochs {
        cfg.epochs = e;
    }
    cfg.validate()?;
    std::fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    let report = train(&cfg)?;
    report.write_runlog(a.out.join(format!("runlog_{}.csv", cfg.seed)), "omega")?;
    let meta = crate::checkpoint::TrainMeta::from_run(&cfg, &report);
    let ck_path = super::checkpoint_path(&a.out, &cfg);
    crate::checkpoint::Checkpoint::new(crate::pipeline::MODEL_TAG, cfg.reaction, meta, report.final_params.clone())
        .save(&ck_path)?;
    println!(
        "{} seed {}: omega {:.10} loss {:.3e} verdict {} ({:.1} s) -> {}",
        cfg.reaction.name(),
        cfg.seed,
        report.final_params.omega,
        report.final_loss(),
        report.verdict,
        report.wall_time,
        ck_path.display()
    );
    if let Some(msg) = report.aborted {
        println!("aborted: {msg}");
    }
    Ok(())
}

fn cmd_plan(a: PlanArgs, allow_training: bool) -> Result<()> {
    let mut plan = ExperimentPlan::load(&a.config)?;
    if let Some(out) = a.out {
        plan.out_dir = out;
    }
    if let Some(p) = a.preset {
        plan.presets = vec![p];
    }
    if !allow_training {
        plan.require_cached = true;
    }
    let (table, stats) = run_plan_with_stats(&plan)?;
    for s in &table.speeds {
        println!(
            "{:<10} {:<10} physical {}/{}  omega {:.8} ± {:.2e}  |c-omega| {:.2e}  {}",
            s.equation,
            s.preset.name(),
            s.physical,
            s.runs,
            s.omega_mean,
            s.omega_std,
            s.abs_err_mean,
            s.status
        );
    }
    for w in &table.warnings {
        println!("warning: {w}");
    }
    println!(
        "trained {} cached {} in {:.1} s; tables in {}",
        stats.trained,
        stats.cached,
        stats.total_seconds,
        plan.out_dir.display()
    );
    Ok(())
}

fn direction(dir: Option<Vec<f64>>, dim: usize) -> Result<Vec<f64>> {
    let d = dir.unwrap_or_else(|| vec![1.0; dim]);
    if d.len() != dim {
        return Err(Error::Shape(format!("--dir has {} components, --dim is {dim}", d.len())));
    }
    normalize_direction(&d)?;
    Ok(d)
}

fn rho_tag(rho: f64) -> String {
    format!("{rho:e}")
}

fn dir_tag(d: &[f64]) -> String {
    d.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("-")
}

fn cmd_eval(a: EvalArgs) -> Result<()> {
    let handle = SolverHandle::from_checkpoint(&a.checkpoint)?;
    let n_dir = direction(a.dir, a.dim)?;
    let rhos = a.rho.map(|r| vec![r]).unwrap_or_else(|| TABLE_RHOS.to_vec());
    let counts = GridCounts::default_for(a.dim);
    if let Some(out) = &a.out {
        std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    }
    println!("rho,l2,linf");
    for rho in rhos {
        let coeffs = PhysicalCoeffs::new(rho, 1.0)?;
        let domain = table_domain(&handle.spec, rho, a.dim)?;
        let pred = evaluate_grid(&handle, &coeffs, &n_dir, &domain, counts)?;
        let exact = exact_grid(&handle.spec, &coeffs, &n_dir, &domain, counts)?;
        let r = error_report(&pred, &exact)?;
        println!("{rho:e},{:e},{:e}", r.l2, r.linf);
        if let Some(out) = &a.out {
            let name = format!("field_{}_rho{}_dir{}.csv", handle.spec.name(), rho_tag(rho), dir_tag(&n_dir));
            pred.write_csv(out.join(name), Some(&exact))?;
        }
    }
    Ok(())
}

/// Parses `step`, `logistic:<lambda>`.
pub fn parse_general_ic(s: &str) -> Result<GeneralIC> {
    let ic = match s.split_once(':') {
        None if s == "step" => GeneralIC::Step,
        Some(("logistic", l)) => GeneralIC::Logistic {
            lambda: l.parse().map_err(|_| Error::Config(format!("bad lambda in `{s}`")))?,
        },
        _ => return Err(Error::Config(format!("unknown initial condition `{s}`"))),
    };
    ic.validate()?;
    Ok(ic)
}

fn load_toml<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    toml::from_str(&text).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        reason: e.to_string(),
    })
}

/// The comparison grid: x ∈ [−3, 9], 2000 cells, snapshots every tenth of
/// the final time.
pub fn gtw_reference_config(t_final: f64) -> RefConfig {
    let mut cfg = RefConfig::new([-3.0, 9.0], t_final);
    cfg.snapshots = (1..=10).map(|k| t_final * k as f64 / 10.0).collect();
    cfg
}

fn cmd_gtw(a: GtwArgs) -> Result<()> {
    let mut cfg = match &a.config {
        Some(p) => load_toml::<GtwConfig>(p)?,
        None => GtwConfig::new(parse_general_ic(&a.ic)?, a.seed),
    };
    if let Some(e) = a.epochs {
        cfg.epochs = e;
    }
    let out = &a.out;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let log = out.join(format!("runlog_{}.csv", cfg.seed));
    let cmp = gtw_comparison(&cfg, a.rho, &gtw_reference_config(a.t_final), out, Some(&log))?;
    let name = format!("field_gtw_{}_rho{}.csv", cfg.ic.name(), rho_tag(a.rho));
    cmp.predicted.write_csv_as(out.join(name), Some(&cmp.reference), "u_ref")?;
    println!(
        "{} seed {}: w {:.6} verdict {}; front at t={}: gtw {:.4} reference {:.4} (diff {:+.4})",
        cfg.ic.name(),
        cfg.seed,
        cmp.params.w,
        cmp.meta.verdict,
        a.t_final,
        cmp.front,
        cmp.reference_front,
        cmp.front - cmp.reference_front
    );
    Ok(())
}

fn cmd_baseline(a: BaselineArgs) -> Result<()> {
    let out = &a.out;
    let ck_dir = out.join("checkpoints");
    let mut wcfg = match &a.config {
        Some(p) => load_toml::<WavePinnConfig>(p)?,
        None => WavePinnConfig::new(a.seed),
    };
    if let Some(e) = a.epochs {
        wcfg.epochs = e;
    }
    let tw = match &a.checkpoint {
        Some(p) => SolverHandle::from_checkpoint(p)?,
        None => {
            let mut cfg = TrainConfig::new(ReactionSpec::fisher(), a.preset, a.seed);
            if let Some(e) = a.epochs {
                cfg.epochs = e;
            }
            train_or_load(&cfg, &ck_dir, Some(&out.join(format!("runlog_tw_{}.csv", a.seed))))?.handle
        }
    };
    let (wp, meta) = train_or_load_wavepinn(&wcfg, &ck_dir, Some(&out.join(format!("runlog_wavepinn_{}.csv", wcfg.seed))))?;
    let rhos = a.rho.map(|r| vec![r]).unwrap_or_else(|| TABLE_RHOS.to_vec());
    let cmp = compare_models(&[(a.seed, tw)], &[(wcfg.seed, wp)], &rhos, None)?;
    write_comparison(&cmp, out)?;
    println!("wave-PINN verdict {} final loss {:.3e}", meta.verdict, meta.final_loss);
    for r in &cmp.rows {
        println!("{:<15} rho {:e}: L2 {:.3e} Linf {:.3e}", r.model, r.rho, r.l2_mean, r.linf_mean);
    }
    for f in &cmp.fronts {
        println!(
            "{:<15} rho {:e}: front {:.5} exact {:.5} at t={}",
            f.model, f.rho, f.front, f.exact_front, f.t
        );
    }
    Ok(())
}

/// Parses the reference `--ic` syntax.
pub fn parse_reference_ic(s: &str) -> Result<RefInitial> {
    if s == "exact" {
        return Ok(RefInitial::Exact);
    }
    if let Some(v) = s.strip_prefix("constant:") {
        let c = v.parse().map_err(|_| Error::Config(format!("bad constant in `{s}`")))?;
        return Ok(RefInitial::Constant(c));
    }
    Ok(RefInitial::General(parse_general_ic(s)?))
}

fn cmd_reference(a: ReferenceArgs) -> Result<()> {
    let job = match &a.config {
        Some(p) => load_toml::<ReferenceJob>(p)?,
        None => {
            if a.x.len() != 2 {
                return Err(Error::Config("--x takes two values, `lo,hi`".into()));
            }
            let mut solver = RefConfig::new([a.x[0], a.x[1]], a.t_final);
            solver.cells = a.cells;
            ReferenceJob {
                equation: a.equation.clone(),
                rho: a.rho,
                diffusion: a.diffusion,
                ic: a.ic.clone(),
                solver,
            }
        }
    };
    let spec = ReactionSpec::from_name(&job.equation)?;
    let coeffs = PhysicalCoeffs::new(job.rho, job.diffusion)?;
    let grid = ref_solve(&spec, &coeffs, &parse_reference_ic(&job.ic)?, &job.solver)?;
    if let Some(parent) = a.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    grid.write_csv(&a.out, None)?;
    println!("{} cells, {} snapshots -> {}", job.solver.cells, grid.t.len(), a.out.display());
    Ok(())
}

fn cmd_export(a: ExportArgs) -> Result<()> {
    let handle = SolverHandle::from_checkpoint(&a.checkpoint)?;
    let n_dir = direction(a.dir, a.dim)?;
    let out = &a.out;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let coeffs = PhysicalCoeffs::new(a.rho, 1.0)?;
    let domain = table_domain(&handle.spec, a.rho, a.dim)?;
    let counts = GridCounts::default_for(a.dim);
    let pred = evaluate_grid(&handle, &coeffs, &n_dir, &domain, counts)?;
    let exact = exact_grid(&handle.spec, &coeffs, &n_dir, &domain, counts)?;
    let tag = format!("{}_rho{}_dir{}", handle.spec.name(), rho_tag(a.rho), dir_tag(&n_dir));
    pred.write_csv(out.join(format!("field_{tag}.csv")), Some(&exact))?;

    let path = out.join(format!("maxerr_{tag}.csv"));
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["t", "max_abs_err"])?;
    for (t, e) in pred.t.iter().zip(max_error_over_time(&pred, &exact)?) {
        w.write_record([t.to_string(), e.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    println!("wrote field and max-error series for {tag} to {}", out.display());
    Ok(())
}
