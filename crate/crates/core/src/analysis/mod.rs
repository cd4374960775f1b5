//! Closed-form and quadrature evaluation of the analytical model:
//! intensity measures, nearest-BS distance laws, association probabilities
//! and five approximations of the SINR coverage probability.

mod association;
mod coverage;
mod curve;
mod holes;
mod intensity;
mod interference;

use serde::Serialize;

use crate::model::LinkState;
use crate::quadrature::QuadratureSpec;

pub use association::{
    association_kernel, association_probabilities, association_probability, exclusion_radius, Serving,
};
pub use coverage::{
    coverage, coverage_all_nonserving_holes, coverage_baseline_ppp, coverage_equivalent_density,
    coverage_nearest_nonserving_holes, coverage_probability, coverage_serving_hole, Approach, ClassTerm,
    CoverageBreakdown,
};
pub use curve::{CoverageCurve, CurvePoint, PointDiagnostics, Sweep, SweepVariable, DEFAULT_FIXED_TAU_DB};
pub use holes::{
    interferer_mbs_distance_pdf, q_term, q_term_circular, q_term_polar, q_terms, t_exponent, t_term, z_term,
};
pub use intensity::{equivalent_density, nearest_bs_pdf, nearest_bs_presence, IntensityMeasure};
pub use interference::{eta, gamma_tail_weight, laplace_f, w_term};

/// Which SBS density the tier-2 intensity measures use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IntensityFlavor {
    /// The unthinned density λ2.
    Baseline,
    /// The equivalent PHP density λ2·exp(−λ1θ_cD²/2).
    PhpEquivalent,
}

impl IntensityFlavor {
    pub fn as_str(self) -> &'static str {
        match self {
            IntensityFlavor::Baseline => "baseline",
            IntensityFlavor::PhpEquivalent => "php_equivalent",
        }
    }
}

/// Measure against which non-serving hole corrections are integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HoleDensityForm {
    /// The radial density Λ'₁(y), which the PGFL of the MBS process yields.
    #[default]
    Radial,
    /// The cumulative measure Λ₁([0, y)), as the closed form is printed.
    Cumulative,
}

/// Which MBS link states carry holes in the non-serving hole corrections.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HoleStates {
    pub los: bool,
    pub nlos: bool,
}

impl HoleStates {
    pub const BOTH: HoleStates = HoleStates { los: true, nlos: true };
    pub const NONE: HoleStates = HoleStates {
        los: false,
        nlos: false,
    };
    pub const LOS_ONLY: HoleStates = HoleStates { los: true, nlos: false };
    pub const NLOS_ONLY: HoleStates = HoleStates { los: false, nlos: true };

    pub fn includes(&self, s: LinkState) -> bool {
        match s {
            LinkState::Los => self.los,
            LinkState::Nlos => self.nlos,
        }
    }

    pub fn label(&self) -> &'static str {
        match (self.los, self.nlos) {
            (true, true) => "both",
            (true, false) => "los_only",
            (false, true) => "nlos_only",
            (false, false) => "none",
        }
    }
}

impl Default for HoleStates {
    fn default() -> Self {
        HoleStates::BOTH
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalysisOptions {
    /// Tolerances of the outermost integral; each nested level is 10× tighter.
    pub quadrature: QuadratureSpec,
    /// Overrides the approach's default intensity flavor in serving and exclusion terms.
    pub intensity_flavor: Option<IntensityFlavor>,
    pub hole_density: HoleDensityForm,
    pub hole_states: HoleStates,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            quadrature: QuadratureSpec::default(),
            intensity_flavor: None,
            hole_density: HoleDensityForm::Radial,
            hole_states: HoleStates::BOTH,
        }
    }
}
