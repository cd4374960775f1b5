//! Data behind each published figure, written as CSV with a plot script stub.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::ValueEnum;
use serde_json::json;

use super::{analytical_curves, compare, write_distance_dump, DistanceClass, ExperimentSpec};
use crate::analysis::{
    association_probabilities, coverage, AnalysisOptions, Approach, CoverageCurve, HoleStates, IntensityFlavor, Sweep,
    SweepVariable,
};
use crate::io::{write_curve_files, write_json, Sidecar};
use crate::model::config::preset;
use crate::model::NetworkConfig;
use crate::montecarlo::{estimate_association, estimate_coverage_sweep, SimulationOptions};
use crate::units::db_to_linear;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    /// Nearest LOS/NLOS SBS distance histograms against their densities.
    #[value(name = "fig2", alias = "fig2_distance")]
    Distance,
    /// Association probabilities against mean LOS distance.
    #[value(name = "fig3", alias = "fig3_association")]
    Association,
    /// Coverage against threshold, setup1.
    #[value(name = "fig4", alias = "fig4_setup1")]
    Setup1,
    /// Coverage against threshold, setup2.
    #[value(name = "fig5", alias = "fig5_setup2")]
    Setup2,
    /// Coverage against threshold with full circular holes of radius 100 m.
    #[value(name = "fig6", alias = "fig6_circular")]
    Circular,
    /// All-holes coverage against mean LOS distance with LOS-only, NLOS-only and both hole kinds.
    #[value(name = "fig7", alias = "fig7_los_nlos")]
    LosNlos,
    /// Coverage against hole central angle.
    #[value(name = "fig8", alias = "fig8_theta_c")]
    ThetaC,
    /// Coverage against MBS density.
    #[value(name = "fig9", alias = "fig9_lambda1")]
    Lambda1,
    /// Coverage against the SBS-to-MBS density ratio.
    #[value(name = "fig10", alias = "fig10_ratio")]
    Ratio,
    /// Every figure above.
    All,
}

impl Figure {
    pub const EACH: [Figure; 9] = [
        Figure::Distance,
        Figure::Association,
        Figure::Setup1,
        Figure::Setup2,
        Figure::Circular,
        Figure::LosNlos,
        Figure::ThetaC,
        Figure::Lambda1,
        Figure::Ratio,
    ];

    pub fn stem(self) -> &'static str {
        match self {
            Figure::Distance => "fig2_distance",
            Figure::Association => "fig3_association",
            Figure::Setup1 => "fig4_setup1",
            Figure::Setup2 => "fig5_setup2",
            Figure::Circular => "fig6_circular",
            Figure::LosNlos => "fig7_los_nlos",
            Figure::ThetaC => "fig8_theta_c",
            Figure::Lambda1 => "fig9_lambda1",
            Figure::Ratio => "fig10_ratio",
            Figure::All => "all",
        }
    }
}

pub struct Settings {
    /// Configuration of every figure except the two fixed-setup threshold sweeps.
    pub base: NetworkConfig,
    pub analysis: AnalysisOptions,
    pub simulation: SimulationOptions,
    /// Threshold grid size for the coverage-vs-threshold figures.
    pub points: usize,
    pub tau_db: f64,
    pub out_dir: PathBuf,
}

/// Mean LOS distances of the blockage figures, m.
const R_LOS_GRID: [f64; 4] = [50.0, 100.0, 200.0, 400.0];

pub fn run(figure: Figure, s: &Settings) -> Result<Vec<PathBuf>> {
    if figure == Figure::All {
        let mut paths = Vec::new();
        for f in Figure::EACH {
            paths.extend(run(f, s)?);
        }
        return Ok(paths);
    }
    let dir = s.out_dir.join(figure.stem());
    std::fs::create_dir_all(&dir)?;
    log::info!("writing {} into {}", figure.stem(), dir.display());
    let tau_grid = || Sweep::linspace(SweepVariable::Tau, -10.0, 30.0, s.points);
    let paths = match figure {
        Figure::Distance => vec![
            write_distance_dump(&s.base, DistanceClass::LosSbs, 10.0, &s.simulation, &dir)?,
            write_distance_dump(&s.base, DistanceClass::NlosSbs, 10.0, &s.simulation, &dir)?,
        ],
        Figure::Association => vec![association_figure(s, &dir)?],
        Figure::Setup1 => vec![comparison_figure(figure, &preset("setup1")?, tau_grid()?, s, &dir)?],
        Figure::Setup2 => vec![comparison_figure(figure, &preset("setup2")?, tau_grid()?, s, &dir)?],
        Figure::Circular => {
            let mut cfg = s.base.clone();
            cfg.hole_angle = std::f64::consts::TAU;
            cfg.hole_radius = 100.0;
            vec![comparison_figure(figure, &cfg, tau_grid()?, s, &dir)?]
        }
        Figure::LosNlos => vec![hole_kind_figure(s, &dir)?],
        Figure::ThetaC => {
            let sweep = Sweep::linspace(SweepVariable::ThetaC, 0.0, std::f64::consts::TAU, 13)?;
            vec![comparison_figure(figure, &at_fixed_tau(s), sweep, s, &dir)?]
        }
        Figure::Lambda1 => {
            let sweep = Sweep::linspace(SweepVariable::Lambda1, 2.0, 20.0, 10)?;
            vec![comparison_figure(figure, &at_fixed_tau(s), sweep, s, &dir)?]
        }
        Figure::Ratio => {
            let sweep = Sweep::linspace(SweepVariable::Lambda2OverLambda1, 5.0, 50.0, 10)?;
            vec![comparison_figure(figure, &at_fixed_tau(s), sweep, s, &dir)?]
        }
        Figure::All => unreachable!("expanded above"),
    };
    write_plot_stub(figure, &dir, &paths)?;
    for p in &paths {
        println!("{}", p.display());
    }
    Ok(paths)
}

fn at_fixed_tau(s: &Settings) -> NetworkConfig {
    s.base.with_threshold(db_to_linear(s.tau_db))
}

/// Every approach and the simulation over `sweep`, plus a deviation report.
fn comparison_figure(figure: Figure, cfg: &NetworkConfig, sweep: Sweep, s: &Settings, dir: &Path) -> Result<PathBuf> {
    let spec = ExperimentSpec {
        config: cfg.clone(),
        approaches: Approach::ALL.to_vec(),
        sweep,
        analysis: s.analysis,
        simulation: Some(s.simulation),
        out_dir: dir.to_path_buf(),
    };
    let start = Instant::now();
    let mut curves = analytical_curves(&spec)?;
    let simulated = estimate_coverage_sweep(&spec.config, &spec.sweep, &s.simulation)?;
    let report = compare(&curves, &simulated, f64::INFINITY)?;
    curves.push(simulated);
    let mut sidecar = Sidecar::new(figure.stem(), cfg).with_curves(&curves);
    sidecar.quadrature = Some(s.analysis.quadrature);
    sidecar.seed = Some(s.simulation.seed);
    sidecar.trials = Some(s.simulation.trials);
    sidecar.wall_clock_seconds = start.elapsed().as_secs_f64();
    sidecar.extra = json!({ "deviation_from_simulation": report.approaches });
    write_curve_files(dir, figure.stem(), &curves, &sidecar)
}

fn association_figure(s: &Settings, dir: &Path) -> Result<PathBuf> {
    let start = Instant::now();
    let path = dir.join(format!("{}.csv", Figure::Association.stem()));
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["r_los", "serving", "analytical", "simulated", "stderr"])?;
    for r_los in R_LOS_GRID {
        let cfg = SweepVariable::RLos.apply(&s.base, r_los)?;
        let analytical = association_probabilities(&cfg, IntensityFlavor::PhpEquivalent, &s.analysis.quadrature)?;
        let simulated = estimate_association(&cfg, &s.simulation)?;
        for ((class, a), (_, e)) in analytical.iter().zip(&simulated) {
            w.write_record([
                format!("{r_los}"),
                class.label(),
                format!("{a}"),
                format!("{}", e.estimate),
                format!("{}", e.stderr),
            ])?;
        }
    }
    w.flush()?;
    let mut sidecar = Sidecar::new(Figure::Association.stem(), &s.base);
    sidecar.quadrature = Some(s.analysis.quadrature);
    sidecar.seed = Some(s.simulation.seed);
    sidecar.trials = Some(s.simulation.trials);
    sidecar.wall_clock_seconds = start.elapsed().as_secs_f64();
    sidecar.extra = json!({ "r_los_m": R_LOS_GRID });
    write_json(&crate::io::sidecar_path(&path), &sidecar)?;
    Ok(path)
}

/// All-holes coverage against mean LOS distance for each choice of hole kinds.
fn hole_kind_figure(s: &Settings, dir: &Path) -> Result<PathBuf> {
    let start = Instant::now();
    let cfg = at_fixed_tau(s);
    let sweep = Sweep::new(SweepVariable::RLos, R_LOS_GRID.to_vec())?;
    let mut curves = Vec::new();
    for states in [
        HoleStates::NONE,
        HoleStates::LOS_ONLY,
        HoleStates::NLOS_ONLY,
        HoleStates::BOTH,
    ] {
        let opts = AnalysisOptions {
            hole_states: states,
            ..s.analysis
        };
        let mut c: CoverageCurve = coverage(Approach::AllNonServingHoles, &cfg, &sweep, &opts)?;
        c.approach = format!("{}_{}", c.approach, states.label());
        curves.push(c);
    }
    let mut sidecar = Sidecar::new(Figure::LosNlos.stem(), &cfg).with_curves(&curves);
    sidecar.quadrature = Some(s.analysis.quadrature);
    sidecar.wall_clock_seconds = start.elapsed().as_secs_f64();
    sidecar.extra = json!({ "tau_db": s.tau_db });
    write_curve_files(dir, Figure::LosNlos.stem(), &curves, &sidecar)
}

/// A short matplotlib script that draws the CSV files next to it.
fn write_plot_stub(figure: Figure, dir: &Path, data: &[PathBuf]) -> Result<()> {
    let names: Vec<String> = data
        .iter()
        .filter_map(|p| p.file_name().map(|n| format!("{:?}", n.to_string_lossy())))
        .collect();
    let body = match figure {
        Figure::Distance => HISTOGRAM_STUB,
        Figure::Association => ASSOCIATION_STUB,
        _ => CURVE_STUB,
    };
    let mut f = std::fs::File::create(dir.join("plot.py"))?;
    writeln!(f, "# Plots {} from the CSV files in this directory.", figure.stem())?;
    writeln!(f, "FILES = [{}]", names.join(", "))?;
    f.write_all(body.as_bytes())?;
    Ok(())
}

const CURVE_STUB: &str = r#"
import csv
import collections
import matplotlib.pyplot as plt

for name in FILES:
    series = collections.defaultdict(list)
    with open(name) as f:
        rows = list(csv.DictReader(f))
    for r in rows:
        series[r["approach"]].append((float(r["value"]), float(r["probability"])))
    for approach, pts in series.items():
        xs, ys = zip(*pts)
        plt.plot(xs, ys, "o" if approach == "simulation" else "-", label=approach)
    plt.xlabel(rows[0]["sweep_var"])
    plt.ylabel("coverage probability")
    plt.legend()
    plt.savefig(name.replace(".csv", ".pdf"))
    plt.clf()
"#;

const HISTOGRAM_STUB: &str = r#"
import csv
import matplotlib.pyplot as plt

for name in FILES:
    with open(name) as f:
        rows = list(csv.DictReader(f))
    lo = [float(r["bin_low"]) for r in rows]
    width = float(rows[0]["bin_high"]) - lo[0]
    plt.bar(lo, [float(r["empirical"]) for r in rows], width=width, align="edge", alpha=0.5, label="simulation")
    plt.plot([x + width / 2 for x in lo], [float(r["analytical"]) for r in rows], label="analytical")
    plt.xlabel("distance (m)")
    plt.ylabel("density")
    plt.legend()
    plt.savefig(name.replace(".csv", ".pdf"))
    plt.clf()
"#;

const ASSOCIATION_STUB: &str = r#"
import csv
import collections
import matplotlib.pyplot as plt

for name in FILES:
    series = collections.defaultdict(list)
    with open(name) as f:
        for r in csv.DictReader(f):
            series[r["serving"]].append((float(r["r_los"]), float(r["analytical"]), float(r["simulated"])))
    for serving, pts in series.items():
        xs, a, s = zip(*pts)
        line, = plt.plot(xs, a, "-", label=serving)
        plt.plot(xs, s, "o", color=line.get_color())
    plt.xlabel("mean LOS distance (m)")
    plt.ylabel("association probability")
    plt.legend()
    plt.savefig(name.replace(".csv", ".pdf"))
    plt.clf()
"#;
