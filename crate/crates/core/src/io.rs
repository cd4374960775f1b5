//! Curve files: a CSV table `sweep_var,value,approach,probability[,stderr]`
//! plus a JSON sidecar describing how the curves were produced.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::analysis::{CoverageCurve, PointDiagnostics};
use crate::model::{NetworkConfig, Tier};
use crate::montecarlo::{DistanceHistogram, TrialResult};
use crate::quadrature::QuadratureSpec;
use crate::units::linear_to_db;
use crate::{Error, Result};

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub sweep_var: String,
    pub value: f64,
    pub approach: String,
    pub probability: f64,
    #[serde(default)]
    pub stderr: Option<f64>,
}

pub fn records(curves: &[CoverageCurve]) -> Vec<CurveRecord> {
    curves
        .iter()
        .flat_map(|c| {
            c.points.iter().map(|p| CurveRecord {
                sweep_var: c.sweep_var.name().to_string(),
                value: p.value,
                approach: c.approach.clone(),
                probability: p.probability,
                stderr: p.stderr,
            })
        })
        .collect()
}

/// Writes every curve as rows; the stderr column appears when any point carries one.
pub fn write_curves_csv<W: Write>(curves: &[CoverageCurve], out: W) -> Result<()> {
    let rows = records(curves);
    let with_stderr = rows.iter().any(|r| r.stderr.is_some());
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["sweep_var", "value", "approach", "probability"];
    if with_stderr {
        header.push("stderr");
    }
    w.write_record(&header)?;
    for r in &rows {
        // `{}` prints the shortest string that parses back to the same f64.
        let mut fields = vec![
            r.sweep_var.clone(),
            format!("{}", r.value),
            r.approach.clone(),
            format!("{}", r.probability),
        ];
        if with_stderr {
            fields.push(r.stderr.map(|s| format!("{s}")).unwrap_or_default());
        }
        w.write_record(&fields)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_curves_csv<R: Read>(input: R) -> Result<Vec<CurveRecord>> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    let expected = ["sweep_var", "value", "approach", "probability"];
    if headers.len() < 4 || headers.iter().take(4).ne(expected) {
        return Err(Error::config(format!("unexpected curve header {:?}", headers)));
    }
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn load_curves_csv(path: &Path) -> Result<Vec<CurveRecord>> {
    read_curves_csv(File::open(path)?)
}

/// Per-trial dump: `trial_index,serving_tier,serving_state,serving_distance,sinr_db`.
/// Trials without a BS leave the last four fields empty.
pub fn write_trial_dump<W: Write>(trials: &[Option<TrialResult>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "trial_index",
        "serving_tier",
        "serving_state",
        "serving_distance",
        "sinr_db",
    ])?;
    for (i, t) in trials.iter().enumerate() {
        let fields = match t {
            Some(t) => [
                i.to_string(),
                t.serving.tier.as_str().to_string(),
                t.serving.state.as_str().to_string(),
                format!("{}", t.serving_distance),
                format!("{}", linear_to_db(t.sinr)),
            ],
            None => [
                i.to_string(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
            ],
        };
        w.write_record(&fields)?;
    }
    w.flush()?;
    Ok(())
}

/// Histogram against an analytical density: `bin_low,bin_high,empirical,analytical`.
pub fn write_histogram_csv<W: Write>(hist: &DistanceHistogram, pdf: impl Fn(f64) -> f64, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["bin_low", "bin_high", "empirical", "analytical"])?;
    for (i, (&h, c)) in hist.density.iter().zip(hist.bin_centers()).enumerate() {
        let low = i as f64 * hist.bin_width;
        w.write_record([
            format!("{low}"),
            format!("{}", low + hist.bin_width),
            format!("{h}"),
            format!("{}", pdf(c)),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Physical parameters of `cfg` in SI units.
pub fn config_json(cfg: &NetworkConfig) -> Value {
    let tier = |t: Tier| {
        let p = cfg.tier(t);
        json!({
            "density_per_m2": p.density,
            "power_w": p.power,
            "antenna": p.antenna,
            "threshold": p.threshold,
        })
    };
    json!({
        "name": cfg.name,
        "macro": tier(Tier::Macro),
        "small": tier(Tier::Small),
        "ue_antenna": cfg.ue,
        "ue_density_per_m2": cfg.ue_density,
        "path_loss_exponent": cfg.alpha,
        "nakagami": cfg.nu,
        "blockage": { "model": cfg.blockage.name(), "parameters": cfg.blockage.parameters() },
        "hole_radius_m": cfg.hole_radius,
        "hole_angle_rad": cfg.hole_angle,
        "noise_power_w": cfg.noise_power,
    })
}

/// Truncation radii of one analytical curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveDiagnostics {
    pub approach: String,
    pub points: Vec<PointDiagnostics>,
}

/// Contents of the JSON file written next to each CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sidecar {
    pub command: String,
    pub version: &'static str,
    pub fingerprint: String,
    pub config: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<QuadratureSpec>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<CurveDiagnostics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    pub wall_clock_seconds: f64,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub extra: Value,
}

impl Sidecar {
    pub fn new(command: &str, cfg: &NetworkConfig) -> Self {
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION"),
            fingerprint: cfg.fingerprint(),
            config: config_json(cfg),
            quadrature: None,
            diagnostics: Vec::new(),
            seed: None,
            trials: None,
            wall_clock_seconds: 0.0,
            extra: Value::Null,
        }
    }

    /// Records the truncation radii of the analytical curves among `curves`.
    pub fn with_curves(mut self, curves: &[CoverageCurve]) -> Self {
        self.diagnostics.extend(
            curves
                .iter()
                .filter(|c| !c.diagnostics.is_empty())
                .map(|c| CurveDiagnostics {
                    approach: c.approach.clone(),
                    points: c.diagnostics.clone(),
                }),
        );
        self
    }
}

/// `path` with its extension replaced by `json`.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

/// Writes `<stem>.csv` and `<stem>.json`, returning the CSV path.
pub fn write_curve_files(dir: &Path, stem: &str, curves: &[CoverageCurve], sidecar: &Sidecar) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("{stem}.csv"));
    write_curves_csv(curves, BufWriter::new(File::create(&csv_path)?))?;
    write_json(&sidecar_path(&csv_path), sidecar)?;
    Ok(csv_path)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}
