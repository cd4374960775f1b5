//! Command-line experiment runner.

mod figures;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::analysis::{
    coverage, AnalysisOptions, Approach, CoverageCurve, HoleDensityForm, HoleStates, IntensityFlavor, Sweep,
    SweepVariable, DEFAULT_FIXED_TAU_DB,
};
use crate::io::{write_curve_files, write_histogram_csv, write_json, write_trial_dump, Sidecar};
use crate::model::config::{self, env_overrides, PRESETS};
use crate::model::{LinkState, NetworkConfig, Tier};
use crate::montecarlo::{estimate_coverage_sweep, estimate_nearest_distance_hist, run_trials, SimulationOptions};
use crate::quadrature::QuadratureSpec;
use crate::units::db_to_linear;
use crate::{Error, Result};

pub use figures::Figure;

/// Process exit statuses.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const TOLERANCE_FAILURE: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const NUMERICAL: i32 = 3;
}

#[derive(Debug, Parser)]
#[command(
    name = "phpnet",
    version,
    about = "Coverage of two-tier mmWave networks with sector-hole small cells"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analytical coverage curves.
    Analyze(AnalyzeArgs),
    /// Monte Carlo coverage curves with standard errors.
    Simulate(SimulateArgs),
    /// Analytical curves against simulation, with pass/fail per approach.
    Validate(ValidateArgs),
    /// Data files for one figure, or all of them.
    Figures(FiguresArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ConfigArgs {
    /// Built-in parameter set.
    #[arg(long, default_value = "setup2", conflicts_with = "config")]
    pub preset: String,
    /// TOML configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override one configuration key, e.g. `--set holes.radius=100m`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Cap on worker threads.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Sweep as `name:start:stop:count`; names: tau, theta_c, lambda1, lambda2_over_lambda1, r_los.
    #[arg(long, default_value = "tau:-10:30:41")]
    pub sweep: String,
    /// SINR threshold in dB for sweeps over anything but tau.
    #[arg(long, default_value_t = DEFAULT_FIXED_TAU_DB, allow_negative_numbers = true)]
    pub tau: f64,
}

#[derive(Debug, Clone, Args)]
pub struct QuadratureArgs {
    /// Relative tolerance of the innermost integral; outer levels are 10× looser each.
    #[arg(long, default_value_t = QuadratureSpec::default().rel_tol)]
    pub rel_tol: f64,
    /// Absolute tolerance of the innermost integral.
    #[arg(long, default_value_t = QuadratureSpec::default().abs_tol)]
    pub abs_tol: f64,
    /// Override the intensity flavor of the serving and exclusion terms.
    #[arg(long, value_enum)]
    pub intensity_flavor: Option<FlavorArg>,
    /// Which interfering MBS holes the hole-aware corrections include.
    #[arg(long, value_enum, default_value = "both")]
    pub hole_states: HoleStatesArg,
    /// Hole density in the all-holes correction.
    #[arg(long, value_enum, default_value = "radial")]
    pub hole_density: HoleDensityArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FlavorArg {
    Baseline,
    #[value(alias = "php_equivalent")]
    PhpEquivalent,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum HoleStatesArg {
    Both,
    #[value(alias = "los_only")]
    LosOnly,
    #[value(alias = "nlos_only")]
    NlosOnly,
    None,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum HoleDensityArg {
    Radial,
    Cumulative,
}

#[derive(Debug, Clone, Args)]
pub struct SimulationArgs {
    /// Monte Carlo trials per grid point.
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    /// Master seed; a random one is drawn and recorded when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Simulation disk radius in m.
    #[arg(long)]
    pub window: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(flatten)]
    pub sweep: SweepArgs,
    #[command(flatten)]
    pub quadrature: QuadratureArgs,
    /// Comma-separated approaches, or `all`.
    #[arg(long, default_value = "all")]
    pub approach: String,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(flatten)]
    pub sweep: SweepArgs,
    #[command(flatten)]
    pub simulation: SimulationArgs,
    /// Also write the nearest-distance histogram of one BS class.
    #[arg(long, value_enum)]
    pub dump_distances: Option<DistanceClass>,
    /// Histogram bin width in m.
    #[arg(long, default_value_t = 10.0)]
    pub bin_width: f64,
    /// Also write one row per trial of the first grid point.
    #[arg(long)]
    pub dump_trials: bool,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(flatten)]
    pub sweep: SweepArgs,
    #[command(flatten)]
    pub quadrature: QuadratureArgs,
    #[command(flatten)]
    pub simulation: SimulationArgs,
    /// Comma-separated approaches, or `all`.
    #[arg(long, default_value = "all")]
    pub approach: String,
    /// Largest accepted absolute deviation from simulation.
    #[arg(long, default_value_t = 0.05)]
    pub tolerance: f64,
}

#[derive(Debug, Args)]
pub struct FiguresArgs {
    /// Figure to produce.
    #[arg(value_enum)]
    pub figure: Figure,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(flatten)]
    pub quadrature: QuadratureArgs,
    #[command(flatten)]
    pub simulation: SimulationArgs,
    /// Points on the threshold grid of the coverage-vs-threshold figures.
    #[arg(long, default_value_t = 9)]
    pub points: usize,
    /// SINR threshold in dB of the figures swept over other variables.
    #[arg(long, default_value_t = DEFAULT_FIXED_TAU_DB, allow_negative_numbers = true)]
    pub tau: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DistanceClass {
    #[value(name = "los_sbs", alias = "los-sbs")]
    LosSbs,
    #[value(name = "nlos_sbs", alias = "nlos-sbs")]
    NlosSbs,
    #[value(name = "los_mbs", alias = "los-mbs")]
    LosMbs,
    #[value(name = "nlos_mbs", alias = "nlos-mbs")]
    NlosMbs,
}

impl DistanceClass {
    pub fn tier_state(self) -> (Tier, LinkState) {
        match self {
            DistanceClass::LosSbs => (Tier::Small, LinkState::Los),
            DistanceClass::NlosSbs => (Tier::Small, LinkState::Nlos),
            DistanceClass::LosMbs => (Tier::Macro, LinkState::Los),
            DistanceClass::NlosMbs => (Tier::Macro, LinkState::Nlos),
        }
    }

    fn name(self) -> &'static str {
        match self {
            DistanceClass::LosSbs => "los_sbs",
            DistanceClass::NlosSbs => "nlos_sbs",
            DistanceClass::LosMbs => "los_mbs",
            DistanceClass::NlosMbs => "nlos_mbs",
        }
    }
}

/// Everything an experiment needs, resolved from the command line.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub config: NetworkConfig,
    pub approaches: Vec<Approach>,
    pub sweep: Sweep,
    pub analysis: AnalysisOptions,
    pub simulation: Option<SimulationOptions>,
    pub out_dir: PathBuf,
}

impl ConfigArgs {
    /// Preset or file, then `PHPNET_*` environment overrides, then `--set`.
    pub fn load(&self) -> Result<NetworkConfig> {
        let text = match &self.config {
            Some(path) => std::fs::read_to_string(path)
                .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?,
            None => config::preset_text(&self.preset)
                .ok_or_else(|| {
                    Error::config(format!(
                        "unknown preset '{}'; valid presets: {}",
                        self.preset,
                        PRESETS.join(", ")
                    ))
                })?
                .to_string(),
        };
        let mut overrides = env_overrides();
        for item in &self.overrides {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::config(format!("--set expects KEY=VALUE, got '{item}'")))?;
            overrides.push((k.trim().to_string(), v.trim().to_string()));
        }
        config::parse_with_overrides(&text, overrides)
    }
}

impl SweepArgs {
    fn resolve(&self, cfg: NetworkConfig) -> Result<(NetworkConfig, Sweep)> {
        let sweep = Sweep::parse(&self.sweep)?;
        Ok((fixed_threshold(cfg, &sweep, self.tau), sweep))
    }
}

/// Non-threshold sweeps run at `tau_db` on both tiers.
fn fixed_threshold(cfg: NetworkConfig, sweep: &Sweep, tau_db: f64) -> NetworkConfig {
    if sweep.variable == SweepVariable::Tau {
        cfg
    } else {
        cfg.with_threshold(db_to_linear(tau_db))
    }
}

impl QuadratureArgs {
    pub fn options(&self) -> Result<AnalysisOptions> {
        let quadrature = QuadratureSpec::with_tolerances(self.rel_tol, self.abs_tol);
        if !quadrature.is_valid() {
            return Err(Error::config("quadrature tolerances must be positive"));
        }
        Ok(AnalysisOptions {
            quadrature,
            intensity_flavor: self.intensity_flavor.map(|f| match f {
                FlavorArg::Baseline => IntensityFlavor::Baseline,
                FlavorArg::PhpEquivalent => IntensityFlavor::PhpEquivalent,
            }),
            hole_density: match self.hole_density {
                HoleDensityArg::Radial => HoleDensityForm::Radial,
                HoleDensityArg::Cumulative => HoleDensityForm::Cumulative,
            },
            hole_states: match self.hole_states {
                HoleStatesArg::Both => HoleStates::BOTH,
                HoleStatesArg::LosOnly => HoleStates::LOS_ONLY,
                HoleStatesArg::NlosOnly => HoleStates::NLOS_ONLY,
                HoleStatesArg::None => HoleStates::NONE,
            },
        })
    }
}

impl SimulationArgs {
    pub fn options(&self) -> Result<SimulationOptions> {
        if self.trials == 0 {
            return Err(Error::config("--trials must be at least 1"));
        }
        let mut opts = SimulationOptions::new(self.trials, self.seed.unwrap_or_else(rand::random));
        opts.window_radius = self.window;
        Ok(opts)
    }
}

pub fn parse_approaches(list: &str) -> Result<Vec<Approach>> {
    if list.trim().eq_ignore_ascii_case("all") {
        return Ok(Approach::ALL.to_vec());
    }
    let approaches: Vec<Approach> = list.split(',').map(str::parse).collect::<Result<_>>()?;
    if approaches.is_empty() {
        return Err(Error::config("no approach requested"));
    }
    Ok(approaches)
}

fn install_workers(workers: Option<usize>) -> Result<()> {
    if let Some(n) = workers {
        if n == 0 {
            return Err(Error::config("--workers must be at least 1"));
        }
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Maps an error to its exit status.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Quadrature { .. } | Error::NoBaseStation { .. } => exit::NUMERICAL,
        _ => exit::USAGE,
    }
}

/// Runs the CLI on `args` (program name first) and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::USAGE } else { exit::PASS };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::Analyze(a) => cmd_analyze(&a).map(|_| exit::PASS),
        Command::Simulate(a) => cmd_simulate(&a).map(|_| exit::PASS),
        Command::Validate(a) => cmd_validate(&a).map(|r| if r.passed { exit::PASS } else { exit::TOLERANCE_FAILURE }),
        Command::Figures(a) => {
            install_workers(a.config.workers)?;
            let cfg = a.config.load()?;
            let settings = figures::Settings {
                base: cfg,
                analysis: a.quadrature.options()?,
                simulation: a.simulation.options()?,
                points: a.points,
                tau_db: a.tau,
                out_dir: a.config.out.clone(),
            };
            figures::run(a.figure, &settings)?;
            Ok(exit::PASS)
        }
    }
}

/// Analytical curves for every requested approach.
pub fn analytical_curves(spec: &ExperimentSpec) -> Result<Vec<CoverageCurve>> {
    spec.approaches
        .iter()
        .map(|&a| {
            log::info!(
                "analysing {a} over {} {} points",
                spec.sweep.values.len(),
                spec.sweep.variable
            );
            coverage(a, &spec.config, &spec.sweep, &spec.analysis)
        })
        .collect()
}

fn cmd_analyze(a: &AnalyzeArgs) -> Result<Vec<CoverageCurve>> {
    install_workers(a.config.workers)?;
    let (config, sweep) = a.sweep.resolve(a.config.load()?)?;
    let spec = ExperimentSpec {
        config,
        approaches: parse_approaches(&a.approach)?,
        sweep,
        analysis: a.quadrature.options()?,
        simulation: None,
        out_dir: a.config.out.clone(),
    };
    let start = Instant::now();
    let curves = analytical_curves(&spec)?;
    let mut sidecar = Sidecar::new("analyze", &spec.config).with_curves(&curves);
    sidecar.quadrature = Some(spec.analysis.quadrature);
    sidecar.wall_clock_seconds = start.elapsed().as_secs_f64();
    let path = write_curve_files(
        &spec.out_dir,
        &format!("analysis_{}", spec.sweep.variable),
        &curves,
        &sidecar,
    )?;
    println!("{}", path.display());
    Ok(curves)
}

fn cmd_simulate(a: &SimulateArgs) -> Result<CoverageCurve> {
    install_workers(a.config.workers)?;
    let (cfg, sweep) = a.sweep.resolve(a.config.load()?)?;
    let opts = a.simulation.options()?;
    let out = &a.config.out;
    let start = Instant::now();
    let curve = estimate_coverage_sweep(&cfg, &sweep, &opts)?;
    let elapsed = start.elapsed().as_secs_f64();

    let mut sidecar = Sidecar::new("simulate", &cfg);
    sidecar.seed = Some(opts.seed);
    sidecar.trials = Some(opts.trials);
    sidecar.wall_clock_seconds = elapsed;
    let path = write_curve_files(
        out,
        &format!("simulation_{}", sweep.variable),
        std::slice::from_ref(&curve),
        &sidecar,
    )?;
    println!("{}", path.display());

    if let Some(class) = a.dump_distances {
        let path = write_distance_dump(&cfg, class, a.bin_width, &opts, out)?;
        println!("{}", path.display());
    }
    if a.dump_trials {
        let point_cfg = sweep.variable.apply(&cfg, sweep.values[0])?;
        let trials = run_trials(&point_cfg, &opts)?;
        let path = out.join("trials.csv");
        write_trial_dump(&trials, std::io::BufWriter::new(std::fs::File::create(&path)?))?;
        println!("{}", path.display());
    }
    Ok(curve)
}

/// Simulated nearest-distance histogram of `class` next to its analytical density.
pub fn write_distance_dump(
    cfg: &NetworkConfig,
    class: DistanceClass,
    bin_width: f64,
    opts: &SimulationOptions,
    out: &Path,
) -> Result<PathBuf> {
    let (tier, state) = class.tier_state();
    let hist = estimate_nearest_distance_hist(cfg, tier, state, bin_width, opts)?;
    std::fs::create_dir_all(out)?;
    let path = out.join(format!("distance_{}.csv", class.name()));
    let pdf = |r: f64| crate::analysis::nearest_bs_pdf(tier, state, r, cfg).unwrap_or(0.0);
    write_histogram_csv(&hist, pdf, std::io::BufWriter::new(std::fs::File::create(&path)?))?;
    let mut sidecar = Sidecar::new("distance", cfg);
    sidecar.seed = Some(opts.seed);
    sidecar.trials = Some(opts.trials);
    sidecar.extra =
        json!({ "class": class.name(), "bin_width_m": bin_width, "samples": hist.samples, "missing": hist.missing });
    write_json(&crate::io::sidecar_path(&path), &sidecar)?;
    Ok(path)
}

/// Deviation of one analytical curve from simulation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApproachReport {
    pub approach: String,
    pub max_abs_deviation: f64,
    pub mean_abs_deviation: f64,
    pub passed: bool,
    /// Strictly smaller maximum deviation than the baseline PPP curve, when both were run.
    pub beats_baseline: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub tolerance: f64,
    pub passed: bool,
    pub approaches: Vec<ApproachReport>,
}

/// Compares each analytical curve with the simulated one on the same grid.
pub fn compare(analytical: &[CoverageCurve], simulated: &CoverageCurve, tolerance: f64) -> Result<ValidationReport> {
    let mut approaches = Vec::with_capacity(analytical.len());
    for c in analytical {
        let diffs: Vec<f64> = c
            .points
            .iter()
            .zip(&simulated.points)
            .map(|(a, s)| (a.probability - s.probability).abs())
            .collect();
        let max = c.max_abs_difference(simulated)?;
        approaches.push(ApproachReport {
            approach: c.approach.clone(),
            max_abs_deviation: max,
            mean_abs_deviation: diffs.iter().sum::<f64>() / diffs.len() as f64,
            passed: max <= tolerance,
            beats_baseline: None,
        });
    }
    let baseline = approaches
        .iter()
        .find(|r| r.approach == Approach::BaselinePpp.name())
        .map(|r| r.max_abs_deviation);
    if let Some(b) = baseline {
        for r in approaches
            .iter_mut()
            .filter(|r| r.approach != Approach::BaselinePpp.name())
        {
            r.beats_baseline = Some(r.max_abs_deviation < b);
        }
    }
    Ok(ValidationReport {
        tolerance,
        passed: approaches.iter().all(|r| r.passed),
        approaches,
    })
}

fn write_validation_table(analytical: &[CoverageCurve], simulated: &CoverageCurve, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "sweep_var",
        "value",
        "approach",
        "analytical",
        "simulated",
        "stderr",
        "abs_difference",
    ])?;
    for c in analytical {
        for (a, s) in c.points.iter().zip(&simulated.points) {
            w.write_record([
                c.sweep_var.name().to_string(),
                format!("{}", a.value),
                c.approach.clone(),
                format!("{}", a.probability),
                format!("{}", s.probability),
                s.stderr.map(|e| format!("{e}")).unwrap_or_default(),
                format!("{}", (a.probability - s.probability).abs()),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn cmd_validate(a: &ValidateArgs) -> Result<ValidationReport> {
    if !(a.tolerance >= 0.0) {
        return Err(Error::config("--tolerance must be non-negative"));
    }
    install_workers(a.config.workers)?;
    let (config, sweep) = a.sweep.resolve(a.config.load()?)?;
    let spec = ExperimentSpec {
        config,
        approaches: parse_approaches(&a.approach)?,
        sweep,
        analysis: a.quadrature.options()?,
        simulation: Some(a.simulation.options()?),
        out_dir: a.config.out.clone(),
    };
    let sim_opts = spec.simulation.expect("set above");
    let start = Instant::now();
    let analytical = analytical_curves(&spec)?;
    let simulated = estimate_coverage_sweep(&spec.config, &spec.sweep, &sim_opts)?;
    let report = compare(&analytical, &simulated, a.tolerance)?;

    let mut curves = analytical.clone();
    curves.push(simulated.clone());
    let mut sidecar = Sidecar::new("validate", &spec.config).with_curves(&curves);
    sidecar.quadrature = Some(spec.analysis.quadrature);
    sidecar.seed = Some(sim_opts.seed);
    sidecar.trials = Some(sim_opts.trials);
    sidecar.wall_clock_seconds = start.elapsed().as_secs_f64();
    sidecar.extra = serde_json::to_value(&report)?;
    let stem = format!("validation_{}", spec.sweep.variable);
    write_curve_files(&spec.out_dir, &stem, &curves, &sidecar)?;
    let table = spec.out_dir.join(format!("{stem}_deviation.csv"));
    write_validation_table(&analytical, &simulated, &table)?;

    for r in &report.approaches {
        println!(
            "{:<20} max {:.4} mean {:.4} {}",
            r.approach,
            r.max_abs_deviation,
            r.mean_abs_deviation,
            if r.passed { "PASS" } else { "FAIL" }
        );
    }
    println!("{}", table.display());
    Ok(report)
}
