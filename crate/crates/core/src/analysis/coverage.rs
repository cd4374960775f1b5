use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use super::association::{exclusion_exponent, kernel_support, Serving};
use super::curve::{CoverageCurve, CurvePoint, PointDiagnostics, Sweep};
use super::holes::{q_terms, t_exponent, z_term};
use super::intensity::IntensityMeasure;
use super::interference::{gamma_tail_weight, w_term};
use super::{AnalysisOptions, IntensityFlavor};
use crate::model::{LinkState, NetworkConfig, Tier};
use crate::quadrature::integrate;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Approach {
    /// SBSs modelled by the unthinned PPP of density λ2.
    BaselinePpp,
    /// SBS interferers modelled by a PPP of the equivalent PHP density.
    EquivalentDensity,
    /// Baseline plus the hole of the serving MBS.
    ServingHole,
    /// Baseline plus the holes of the nearest interfering LOS and NLOS MBSs.
    NearestNonServingHoles,
    /// Baseline plus every interfering MBS hole, overlaps ignored.
    AllNonServingHoles,
}

impl Approach {
    pub const ALL: [Approach; 5] = [
        Approach::BaselinePpp,
        Approach::EquivalentDensity,
        Approach::ServingHole,
        Approach::NearestNonServingHoles,
        Approach::AllNonServingHoles,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Approach::BaselinePpp => "baseline_ppp",
            Approach::EquivalentDensity => "equivalent_density",
            Approach::ServingHole => "serving_hole",
            Approach::NearestNonServingHoles => "nearest_holes",
            Approach::AllNonServingHoles => "all_holes",
        }
    }

    /// Intensity flavor of the serving density and exclusion terms.
    pub fn default_flavor(self) -> IntensityFlavor {
        match self {
            Approach::BaselinePpp | Approach::EquivalentDensity | Approach::ServingHole => {
                IntensityFlavor::PhpEquivalent
            }
            Approach::NearestNonServingHoles | Approach::AllNonServingHoles => IntensityFlavor::Baseline,
        }
    }

    /// Intensity flavor of the SBS interference field.
    pub fn interference_flavor(self) -> IntensityFlavor {
        match self {
            Approach::EquivalentDensity => IntensityFlavor::PhpEquivalent,
            _ => IntensityFlavor::Baseline,
        }
    }

    /// Number of integration levels nested below the serving-distance integral.
    pub fn nesting_depth(self) -> i32 {
        match self {
            Approach::NearestNonServingHoles | Approach::AllNonServingHoles => 2,
            _ => 1,
        }
    }

    pub fn is_hole_aware(self) -> bool {
        self != Approach::BaselinePpp
    }
}

impl fmt::Display for Approach {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Approach {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        Approach::ALL
            .into_iter()
            .find(|a| a.name() == norm)
            .or(match norm.as_str() {
                "baseline" | "ppp" => Some(Approach::BaselinePpp),
                "equivalent" | "php" => Some(Approach::EquivalentDensity),
                "nearest_nonserving_holes" | "nearest" => Some(Approach::NearestNonServingHoles),
                "all_nonserving_holes" => Some(Approach::AllNonServingHoles),
                _ => None,
            })
            .ok_or_else(|| {
                let names: Vec<_> = Approach::ALL.iter().map(|a| a.name()).collect();
                Error::config(format!("unknown approach '{s}'; expected one of {}", names.join(", ")))
            })
    }
}

/// Contribution of one serving class to the coverage probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassTerm {
    pub serving: Serving,
    /// Upper limit of the serving-distance integral; `None` if the class never serves.
    pub truncation_radius: Option<f64>,
    pub contribution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageBreakdown {
    /// Clamped to [0, 1].
    pub probability: f64,
    /// Value of the alternating sum before clamping.
    pub raw: f64,
    pub classes: Vec<ClassTerm>,
}

/// Relative excess outside [0, 1] above which clamping is reported.
const CLAMP_WARNING: f64 = 1e-3;

fn binomial(n: u32, k: u32) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * (n + 1 - i) as f64 / i as f64)
}

/// Integrand of one (class, n) term at serving distance x.
#[allow(clippy::too_many_arguments)]
fn term_integrand(
    approach: Approach,
    serving: Serving,
    n: u32,
    x: f64,
    cfg: &NetworkConfig,
    opts: &AnalysisOptions,
    flavor: IntensityFlavor,
) -> Result<f64> {
    if x <= 0.0 {
        return Ok(0.0);
    }
    let (k, s) = (serving.tier, serving.state);
    let density = IntensityMeasure::new(cfg, k, s, flavor).derivative(x);
    if density == 0.0 {
        return Ok(0.0);
    }
    let mu = gamma_tail_weight(n, k, s, x, cfg, cfg.tier(k).threshold);
    let mut exponent = -mu * cfg.noise_power - exclusion_exponent(serving, x, cfg, flavor);
    if !exponent.is_finite() || exponent < -745.0 {
        return Ok(0.0);
    }
    let inner = outer_spec(approach, opts).tightened(1);
    for j in Tier::ALL {
        for sp in LinkState::ALL {
            let r = super::association::exclusion_radius(j, sp, k, s, x, cfg);
            exponent -= w_term(j, sp, r, mu, cfg, approach.interference_flavor(), &inner)?;
            if exponent < -745.0 {
                return Ok(0.0);
            }
        }
    }
    let correction = match approach {
        Approach::BaselinePpp | Approach::EquivalentDensity => 1.0,
        Approach::ServingHole if k == Tier::Macro => {
            let q = q_terms(x, mu, cfg, &inner)?;
            (q.los + q.nlos).exp()
        }
        Approach::ServingHole => 1.0,
        Approach::NearestNonServingHoles => z_term(serving, x, mu, cfg, opts.hole_states, &inner)?,
        Approach::AllNonServingHoles => {
            exponent += t_exponent(serving, x, mu, cfg, opts.hole_states, opts.hole_density, &inner)?;
            1.0
        }
    };
    Ok(exponent.exp() * correction * density)
}

/// The configured tolerances apply to the innermost level; each level outwards is 10× looser.
fn outer_spec(approach: Approach, opts: &AnalysisOptions) -> crate::quadrature::QuadratureSpec {
    opts.quadrature.tightened(-approach.nesting_depth())
}

/// Coverage probability of `approach` at the thresholds stored in `cfg`.
pub fn coverage_probability(
    approach: Approach,
    cfg: &NetworkConfig,
    opts: &AnalysisOptions,
) -> Result<CoverageBreakdown> {
    if !opts.quadrature.is_valid() {
        return Err(Error::config("quadrature tolerances must be positive"));
    }
    let flavor = opts.intensity_flavor.unwrap_or(approach.default_flavor());
    let mut classes = Vec::with_capacity(4);
    let mut raw = 0.0;
    for serving in Serving::all() {
        let support = kernel_support(serving, cfg, flavor);
        let mut contribution = 0.0;
        if let Some(upper) = support {
            let nu = cfg.nu[serving.state];
            for n in 1..=nu {
                let failure = std::cell::RefCell::new(None::<Error>);
                let est = integrate(
                    |x| {
                        term_integrand(approach, serving, n, x, cfg, opts, flavor).unwrap_or_else(|e| {
                            failure.borrow_mut().get_or_insert(e);
                            0.0
                        })
                    },
                    0.0,
                    upper,
                    &outer_spec(approach, opts),
                )
                .map_err(Error::from);
                let context = || {
                    format!(
                        "{approach}, {} serving, n = {n}, tau = {}",
                        serving.label(),
                        cfg.tier(serving.tier).threshold
                    )
                };
                if let Some(e) = failure.into_inner() {
                    return Err(e.within(context));
                }
                let value = est.map_err(|e| e.within(context))?.value;
                let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
                contribution += sign * binomial(nu, n) * value;
            }
        }
        raw += contribution;
        classes.push(ClassTerm {
            serving,
            truncation_radius: support,
            contribution,
        });
    }
    if !(-CLAMP_WARNING..=1.0 + CLAMP_WARNING).contains(&raw) {
        log::warn!("{approach}: coverage {raw} lies outside [0, 1] and was clamped");
    }
    Ok(CoverageBreakdown {
        probability: raw.clamp(0.0, 1.0),
        raw,
        classes,
    })
}

/// Evaluates `approach` at every sweep point, in parallel, returned in sweep order.
pub fn coverage(
    approach: Approach,
    cfg: &NetworkConfig,
    sweep: &Sweep,
    opts: &AnalysisOptions,
) -> Result<CoverageCurve> {
    let results: Vec<(CurvePoint, PointDiagnostics)> = sweep
        .values
        .par_iter()
        .map(|&value| {
            let point_cfg = sweep.variable.apply(cfg, value)?;
            let b = coverage_probability(approach, &point_cfg, opts)?;
            Ok((
                CurvePoint {
                    value,
                    probability: b.probability,
                    stderr: None,
                },
                PointDiagnostics {
                    value,
                    raw_probability: b.raw,
                    truncation_radii: b
                        .classes
                        .iter()
                        .filter_map(|c| c.truncation_radius.map(|r| (c.serving.label(), r)))
                        .collect(),
                },
            ))
        })
        .collect::<Result<_>>()?;
    let (points, diagnostics) = results.into_iter().unzip();
    Ok(CoverageCurve {
        sweep_var: sweep.variable,
        approach: approach.name().to_string(),
        fingerprint: cfg.fingerprint(),
        points,
        diagnostics,
    })
}

fn over_tau(approach: Approach, cfg: &NetworkConfig, tau_db: &[f64], opts: &AnalysisOptions) -> Result<CoverageCurve> {
    coverage(approach, cfg, &Sweep::tau(tau_db.to_vec())?, opts)
}

/// Coverage with SBSs taken as the unthinned PPP, over thresholds in dB.
pub fn coverage_baseline_ppp(cfg: &NetworkConfig, tau_db: &[f64], opts: &AnalysisOptions) -> Result<CoverageCurve> {
    over_tau(Approach::BaselinePpp, cfg, tau_db, opts)
}

pub fn coverage_equivalent_density(
    cfg: &NetworkConfig,
    tau_db: &[f64],
    opts: &AnalysisOptions,
) -> Result<CoverageCurve> {
    over_tau(Approach::EquivalentDensity, cfg, tau_db, opts)
}

pub fn coverage_serving_hole(cfg: &NetworkConfig, tau_db: &[f64], opts: &AnalysisOptions) -> Result<CoverageCurve> {
    over_tau(Approach::ServingHole, cfg, tau_db, opts)
}

pub fn coverage_nearest_nonserving_holes(
    cfg: &NetworkConfig,
    tau_db: &[f64],
    opts: &AnalysisOptions,
) -> Result<CoverageCurve> {
    over_tau(Approach::NearestNonServingHoles, cfg, tau_db, opts)
}

pub fn coverage_all_nonserving_holes(
    cfg: &NetworkConfig,
    tau_db: &[f64],
    opts: &AnalysisOptions,
) -> Result<CoverageCurve> {
    over_tau(Approach::AllNonServingHoles, cfg, tau_db, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::config::preset;
    use crate::units::db_to_linear;

    fn at(approach: Approach, cfg: &NetworkConfig, tau_db: f64) -> f64 {
        coverage_probability(
            approach,
            &cfg.with_threshold(db_to_linear(tau_db)),
            &AnalysisOptions::default(),
        )
        .unwrap()
        .probability
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(3, 1), 3.0);
        assert_eq!(binomial(3, 2), 3.0);
        assert_eq!(binomial(3, 3), 1.0);
        assert_eq!(binomial(2, 1), 2.0);
    }

    #[test]
    fn approach_names_round_trip() {
        for a in Approach::ALL {
            assert_eq!(a.name().parse::<Approach>().unwrap(), a);
        }
        assert!("bogus".parse::<Approach>().is_err());
    }

    #[test]
    fn threshold_extremes() {
        let cfg = preset("setup2").unwrap();
        let low = at(Approach::BaselinePpp, &cfg, -60.0);
        let high = at(Approach::BaselinePpp, &cfg, 60.0);
        assert!((low - 1.0).abs() < 0.01, "{low}");
        assert!(high <= 0.05, "{high}");
    }

    #[test]
    fn degenerate_holes_collapse_cheap_approaches() {
        let mut cfg = preset("setup2").unwrap();
        cfg.hole_angle = 0.0;
        let base = at(Approach::BaselinePpp, &cfg, 5.0);
        for a in [Approach::EquivalentDensity, Approach::ServingHole] {
            assert!((at(a, &cfg, 5.0) - base).abs() < 1e-6);
        }
    }

    #[test]
    fn cheap_approaches_dominate_baseline() {
        let cfg = preset("setup2").unwrap();
        for tau in [-5.0, 10.0] {
            let base = at(Approach::BaselinePpp, &cfg, tau);
            assert!(at(Approach::EquivalentDensity, &cfg, tau) >= base);
            assert!(at(Approach::ServingHole, &cfg, tau) >= base);
        }
    }

    #[test]
    fn dispatch_matches_named_wrapper() {
        let cfg = preset("setup1").unwrap();
        let opts = AnalysisOptions::default();
        let a = coverage_baseline_ppp(&cfg, &[0.0, 10.0], &opts).unwrap();
        let b = coverage(
            Approach::BaselinePpp,
            &cfg,
            &Sweep::tau(vec![0.0, 10.0]).unwrap(),
            &opts,
        )
        .unwrap();
        assert_eq!(a, b);
        assert!(a.points.iter().all(|p| (0.0..=1.0).contains(&p.probability)));
    }
}
