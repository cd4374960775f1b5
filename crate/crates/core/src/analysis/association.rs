use serde::Serialize;

use super::intensity::IntensityMeasure;
use super::IntensityFlavor;
use crate::model::{LinkState, NetworkConfig, Tier};
use crate::quadrature::{integrate, QuadratureSpec};
use crate::{Error, Result};

/// The class of the serving BS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Serving {
    pub tier: Tier,
    pub state: LinkState,
}

impl Serving {
    pub fn new(tier: Tier, state: LinkState) -> Self {
        Self { tier, state }
    }

    /// The four classes, macro before small and LOS before NLOS.
    pub fn all() -> [Serving; 4] {
        [
            Serving::new(Tier::Macro, LinkState::Los),
            Serving::new(Tier::Macro, LinkState::Nlos),
            Serving::new(Tier::Small, LinkState::Los),
            Serving::new(Tier::Small, LinkState::Nlos),
        ]
    }

    pub fn label(&self) -> String {
        format!("{}_{}", self.tier.as_str(), self.state.as_str())
    }
}

/// Distance below which no state-`s_prime` tier-`j` BS can lie when the UE is
/// served by a state-`s` tier-`k` BS at distance `x`.
pub fn exclusion_radius(j: Tier, s_prime: LinkState, k: Tier, s: LinkState, x: f64, cfg: &NetworkConfig) -> f64 {
    if j == k && s_prime == s {
        return x;
    }
    let power = cfg.tier(j).power / cfg.tier(k).power;
    let gain = cfg.tier(j).antenna.main_gain / cfg.tier(k).antenna.main_gain;
    let a = cfg.alpha[s_prime];
    (power * gain).powf(1.0 / a) * x.powf(cfg.alpha[s] / a)
}

/// Σ_j Σ_s' Λ^{s'}_j([0, R_j^{s'}(x))): expected number of BSs that would out-power the server.
pub(crate) fn exclusion_exponent(serving: Serving, x: f64, cfg: &NetworkConfig, flavor: IntensityFlavor) -> f64 {
    let mut sum = 0.0;
    for j in Tier::ALL {
        for sp in LinkState::ALL {
            let r = exclusion_radius(j, sp, serving.tier, serving.state, x, cfg);
            sum += IntensityMeasure::new(cfg, j, sp, flavor).measure(r);
        }
    }
    sum
}

/// Density in x of "served by class `serving` at distance x".
pub fn association_kernel(serving: Serving, x: f64, cfg: &NetworkConfig, flavor: IntensityFlavor) -> f64 {
    if x <= 0.0 || cfg.tier(serving.tier).power <= 0.0 {
        return 0.0;
    }
    let density = IntensityMeasure::new(cfg, serving.tier, serving.state, flavor).derivative(x);
    if density == 0.0 {
        return 0.0;
    }
    density * (-exclusion_exponent(serving, x, cfg, flavor)).exp()
}

/// Relative level below which the association kernel is treated as zero.
const SUPPORT_CUTOFF: f64 = 1e-12;

/// Radius beyond which the association kernel stays below 1e-12 of its peak,
/// or `None` when the class can never serve.
pub(crate) fn kernel_support(serving: Serving, cfg: &NetworkConfig, flavor: IntensityFlavor) -> Option<f64> {
    const POINTS_PER_DECADE: f64 = 80.0;
    const START: f64 = 1e-2;
    const LIMIT: f64 = 1e8;
    let step = 10f64.powf(1.0 / POINTS_PER_DECADE);
    let mut values = Vec::new();
    let mut x = START;
    let mut peak = 0.0f64;
    while x <= LIMIT {
        let k = association_kernel(serving, x, cfg, flavor);
        peak = peak.max(k);
        values.push((x, k));
        // Stop once well past the peak and below the cutoff.
        if peak > 0.0 && k < SUPPORT_CUTOFF * peak * 1e-3 && x > 1e3 {
            break;
        }
        x *= step;
    }
    if peak <= 0.0 {
        return None;
    }
    let last = values.iter().rposition(|&(_, k)| k >= SUPPORT_CUTOFF * peak)?;
    Some(values.get(last + 1).map_or(LIMIT, |&(x, _)| x))
}

/// A^s_k with the tier-2 measures at the equivalent PHP density.
pub fn association_probability(tier: Tier, state: LinkState, cfg: &NetworkConfig) -> Result<f64> {
    association_probability_with(
        Serving::new(tier, state),
        cfg,
        IntensityFlavor::PhpEquivalent,
        &QuadratureSpec::default(),
    )
}

pub(crate) fn association_probability_with(
    serving: Serving,
    cfg: &NetworkConfig,
    flavor: IntensityFlavor,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let Some(upper) = kernel_support(serving, cfg, flavor) else {
        return Ok(0.0);
    };
    let est = integrate(|x| association_kernel(serving, x, cfg, flavor), 0.0, upper, spec)
        .map_err(|e| Error::from(e).within(|| format!("association {}", serving.label())))?;
    Ok(est.value)
}

/// All four association probabilities in [`Serving::all`] order.
pub fn association_probabilities(
    cfg: &NetworkConfig,
    flavor: IntensityFlavor,
    spec: &QuadratureSpec,
) -> Result<Vec<(Serving, f64)>> {
    Serving::all()
        .into_iter()
        .map(|c| association_probability_with(c, cfg, flavor, spec).map(|p| (c, p)))
        .collect()
}
