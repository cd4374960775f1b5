use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::model::{Blockage, NetworkConfig, Tier};
use crate::units::{db_to_linear, per_km2_to_per_m2};
use crate::{Error, Result};

/// Threshold used when the sweep variable is not the threshold itself.
pub const DEFAULT_FIXED_TAU_DB: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    /// SINR threshold of both tiers, dB.
    Tau,
    /// Hole central angle, rad.
    ThetaC,
    /// MBS density, km⁻², with the SBS density held fixed.
    Lambda1,
    /// SBS density as a multiple of the MBS density.
    Lambda2OverLambda1,
    /// Mean LOS distance, m.
    RLos,
}

impl SweepVariable {
    pub const ALL: [SweepVariable; 5] = [
        SweepVariable::Tau,
        SweepVariable::ThetaC,
        SweepVariable::Lambda1,
        SweepVariable::Lambda2OverLambda1,
        SweepVariable::RLos,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::Tau => "tau",
            SweepVariable::ThetaC => "theta_c",
            SweepVariable::Lambda1 => "lambda1",
            SweepVariable::Lambda2OverLambda1 => "lambda2_over_lambda1",
            SweepVariable::RLos => "r_los",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            SweepVariable::Tau => "dB",
            SweepVariable::ThetaC => "rad",
            SweepVariable::Lambda1 => "km^-2",
            SweepVariable::Lambda2OverLambda1 => "1",
            SweepVariable::RLos => "m",
        }
    }

    /// `cfg` with this variable set to `value` (in the variable's unit).
    pub fn apply(self, cfg: &NetworkConfig, value: f64) -> Result<NetworkConfig> {
        let mut c = cfg.clone();
        match self {
            SweepVariable::Tau => c = c.with_threshold(db_to_linear(value)),
            SweepVariable::ThetaC => {
                // Grids written with a rounded 2π (e.g. 6.2832) still mean the full circle.
                let tau = std::f64::consts::TAU;
                c.hole_angle = if (value - tau).abs() < 1e-4 { tau } else { value };
            }
            SweepVariable::Lambda1 => c.tier_mut(Tier::Macro).density = per_km2_to_per_m2(value),
            SweepVariable::Lambda2OverLambda1 => {
                c.tier_mut(Tier::Small).density = value * cfg.tier(Tier::Macro).density;
            }
            SweepVariable::RLos => {
                c.blockage = match &cfg.blockage {
                    Blockage::Exponential { .. } => Blockage::from_mean_los_distance(value),
                    Blockage::Ball { .. } => Blockage::Ball { radius: value },
                    Blockage::Custom(_) => {
                        return Err(Error::config("r_los cannot be swept for a custom blockage model"))
                    }
                }
            }
        }
        c.validate()?;
        Ok(c)
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase();
        SweepVariable::ALL
            .into_iter()
            .find(|v| v.name() == norm)
            .or(match norm.as_str() {
                "theta" | "thetac" => Some(SweepVariable::ThetaC),
                "ratio" | "lambda2/lambda1" => Some(SweepVariable::Lambda2OverLambda1),
                "rlos" | "r_los_m" => Some(SweepVariable::RLos),
                _ => None,
            })
            .ok_or_else(|| {
                let names: Vec<_> = SweepVariable::ALL.iter().map(|v| v.name()).collect();
                Error::config(format!(
                    "unknown sweep variable '{s}'; expected one of {}",
                    names.join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
}

impl Sweep {
    pub fn new(variable: SweepVariable, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::config("sweep grid is empty"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("sweep values must be finite"));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config("sweep values must be strictly increasing"));
        }
        Ok(Self { variable, values })
    }

    pub fn tau(values_db: Vec<f64>) -> Result<Self> {
        Self::new(SweepVariable::Tau, values_db)
    }

    /// `count` evenly spaced values from `start` to `stop` inclusive.
    pub fn linspace(variable: SweepVariable, start: f64, stop: f64, count: usize) -> Result<Self> {
        let values = match count {
            0 => Vec::new(),
            1 => vec![start],
            _ => (0..count)
                .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
                .collect(),
        };
        Self::new(variable, values)
    }

    /// Parses `name:start:stop:count`.
    pub fn parse(spec: &str) -> Result<Self> {
        let parts: Vec<&str> = spec.split(':').collect();
        let [name, start, stop, count] = parts[..] else {
            return Err(Error::config(format!(
                "sweep '{spec}' is not of the form name:start:stop:count"
            )));
        };
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::config(format!("sweep '{spec}': '{s}' is not a number")))
        };
        let count = count
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::config(format!("sweep '{spec}': '{count}' is not a point count")))?;
        Self::linspace(name.parse()?, num(start)?, num(stop)?, count)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub value: f64,
    pub probability: f64,
    pub stderr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointDiagnostics {
    pub value: f64,
    pub raw_probability: f64,
    /// Upper limit of the serving-distance integral per serving class.
    pub truncation_radii: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageCurve {
    pub sweep_var: SweepVariable,
    /// Approach name, or `simulation` for Monte Carlo estimates.
    pub approach: String,
    pub fingerprint: String,
    pub points: Vec<CurvePoint>,
    pub diagnostics: Vec<PointDiagnostics>,
}

impl CoverageCurve {
    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.probability).collect()
    }

    /// Largest absolute pointwise difference; the curves must share a grid.
    pub fn max_abs_difference(&self, other: &CoverageCurve) -> Result<f64> {
        if self.values() != other.values() {
            return Err(Error::config("curves are on different sweep grids"));
        }
        Ok(self
            .points
            .iter()
            .zip(&other.points)
            .map(|(a, b)| (a.probability - b.probability).abs())
            .fold(0.0, f64::max))
    }
}
