use std::f64::consts::PI;

use super::IntensityFlavor;
use crate::model::{LinkState, NetworkConfig, Tier};
use crate::{Error, Result};

/// λ2·exp(−λ1·θ_c·D²/2): density of the PPP matching the PHP's first moment.
pub fn equivalent_density(cfg: &NetworkConfig) -> f64 {
    let lambda1 = cfg.tier(Tier::Macro).density;
    cfg.tier(Tier::Small).density * (-lambda1 * cfg.hole_angle * cfg.hole_radius.powi(2) / 2.0).exp()
}

/// Intensity measure Λ([0, r)) of the state-`state` BSs of one tier, seen from the origin.
#[derive(Debug, Clone, Copy)]
pub struct IntensityMeasure<'a> {
    cfg: &'a NetworkConfig,
    pub tier: Tier,
    pub state: LinkState,
    /// Planar density used for this tier, per m².
    pub density: f64,
}

impl<'a> IntensityMeasure<'a> {
    /// The macro tier is a PPP, so its measure ignores `flavor`.
    pub fn new(cfg: &'a NetworkConfig, tier: Tier, state: LinkState, flavor: IntensityFlavor) -> Self {
        let density = match (tier, flavor) {
            (Tier::Macro, _) | (Tier::Small, IntensityFlavor::Baseline) => cfg.tier(tier).density,
            (Tier::Small, IntensityFlavor::PhpEquivalent) => equivalent_density(cfg),
        };
        Self {
            cfg,
            tier,
            state,
            density,
        }
    }

    /// Λ([0, r)) = 2πλ ∫₀^r t P^s(t) dt.
    pub fn measure(&self, r: f64) -> f64 {
        if self.density == 0.0 || r <= 0.0 {
            return 0.0;
        }
        if r.is_infinite() {
            return self.total();
        }
        2.0 * PI * self.density * self.cfg.blockage.moment(self.state, r)
    }

    /// Λ'([0, r)) = 2πλ r P^s(r).
    pub fn derivative(&self, r: f64) -> f64 {
        if self.density == 0.0 || r <= 0.0 {
            return 0.0;
        }
        2.0 * PI * self.density * r * self.cfg.blockage.state(self.state, r)
    }

    /// Λ([0, ∞)), infinite when the expected count diverges.
    pub fn total(&self) -> f64 {
        if self.density == 0.0 {
            return 0.0;
        }
        match self.cfg.blockage.total_moment(self.state) {
            Some(m) => 2.0 * PI * self.density * m,
            None => f64::INFINITY,
        }
    }

    /// Λ([r, ∞)).
    pub fn tail(&self, r: f64) -> f64 {
        let total = self.total();
        if total.is_infinite() {
            f64::INFINITY
        } else {
            (total - self.measure(r)).max(0.0)
        }
    }
}

/// B^s_k: probability that at least one state-s BS of tier k exists.
pub fn nearest_bs_presence(tier: Tier, state: LinkState, cfg: &NetworkConfig) -> f64 {
    let total = IntensityMeasure::new(cfg, tier, state, IntensityFlavor::PhpEquivalent).total();
    -(-total).exp_m1()
}

/// PDF of the distance to the nearest state-s BS of tier k, given that one exists.
pub fn nearest_bs_pdf(tier: Tier, state: LinkState, r: f64, cfg: &NetworkConfig) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::domain(format!("distance must be non-negative, got {r}")));
    }
    let presence = nearest_bs_presence(tier, state, cfg);
    if presence <= 0.0 {
        return Err(Error::NoBaseStation { tier, state });
    }
    let m = IntensityMeasure::new(cfg, tier, state, IntensityFlavor::PhpEquivalent);
    Ok(m.derivative(r) * (-m.measure(r)).exp() / presence)
}
