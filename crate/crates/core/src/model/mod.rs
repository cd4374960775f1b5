//! Domain types and pointwise channel primitives.
//!
//! Everything here is in SI units: metres, watts, linear gains, radians and
//! points per square metre. Engineering units are converted once, in
//! [`config`], when a configuration is loaded.

mod antenna;
mod blockage;
pub mod config;
mod fading;

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::Serialize;
use sha2::{Digest, Sha256};

pub use antenna::{directivity_pmf, DirectivityPmf, GainAtom};
pub use blockage::{Blockage, LosProbability};
pub use fading::{sample_fading, FadingLaw};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum LinkState {
    Los,
    Nlos,
}

impl LinkState {
    /// LOS first; this order is also the association tie-break order.
    pub const ALL: [LinkState; 2] = [LinkState::Los, LinkState::Nlos];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LinkState::Los => "los",
            LinkState::Nlos => "nlos",
        }
    }
}

impl fmt::Display for LinkState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LinkState::Los => "LOS",
            LinkState::Nlos => "NLOS",
        })
    }
}

/// Tier 1 is the macro tier (hole centres), tier 2 the small cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Tier {
    Macro,
    Small,
}

impl Tier {
    pub const ALL: [Tier; 2] = [Tier::Macro, Tier::Small];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn number(self) -> u8 {
        self as u8 + 1
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Tier::Macro => "macro",
            Tier::Small => "small",
        }
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A value for each link state.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct PerState<T> {
    pub los: T,
    pub nlos: T,
}

impl<T> PerState<T> {
    pub fn new(los: T, nlos: T) -> Self {
        Self { los, nlos }
    }
}

impl<T> Index<LinkState> for PerState<T> {
    type Output = T;
    fn index(&self, s: LinkState) -> &T {
        match s {
            LinkState::Los => &self.los,
            LinkState::Nlos => &self.nlos,
        }
    }
}

impl<T> IndexMut<LinkState> for PerState<T> {
    fn index_mut(&mut self, s: LinkState) -> &mut T {
        match s {
            LinkState::Los => &mut self.los,
            LinkState::Nlos => &mut self.nlos,
        }
    }
}

/// Two-level sectored antenna: main-lobe gain over `beamwidth`, side-lobe gain elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Antenna {
    pub main_gain: f64,
    pub side_gain: f64,
    pub beamwidth: f64,
}

impl Antenna {
    /// Fraction of the circle covered by the main lobe.
    pub fn main_lobe_fraction(&self) -> f64 {
        self.beamwidth / (2.0 * std::f64::consts::PI)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TierParams {
    /// Points per m².
    pub density: f64,
    /// Transmit power, W.
    pub power: f64,
    pub antenna: Antenna,
    /// SINR threshold for UEs served by this tier, linear.
    pub threshold: f64,
}

#[derive(Debug, Clone)]
pub struct NetworkConfig {
    pub name: String,
    /// Indexed by [`Tier::index`].
    pub tiers: [TierParams; 2],
    pub ue: Antenna,
    /// Accepted for completeness; no formula depends on it.
    pub ue_density: f64,
    pub alpha: PerState<f64>,
    pub nu: PerState<u32>,
    pub blockage: Blockage,
    /// Hole radius D, m.
    pub hole_radius: f64,
    /// Hole central angle θ_c, rad.
    pub hole_angle: f64,
    /// σ², W.
    pub noise_power: f64,
}

impl NetworkConfig {
    pub fn tier(&self, t: Tier) -> &TierParams {
        &self.tiers[t.index()]
    }

    pub fn tier_mut(&mut self, t: Tier) -> &mut TierParams {
        &mut self.tiers[t.index()]
    }

    /// Same configuration with both tiers' SINR thresholds set to `tau` (linear).
    pub fn with_threshold(&self, tau: f64) -> Self {
        let mut c = self.clone();
        for t in Tier::ALL {
            c.tier_mut(t).threshold = tau;
        }
        c
    }

    /// Gain of a perfectly aligned serving link, M_k · M_UE.
    pub fn serving_gain(&self, t: Tier) -> f64 {
        self.tier(t).antenna.main_gain * self.ue.main_gain
    }

    pub fn fading(&self) -> FadingLaw {
        FadingLaw { nu: self.nu }
    }

    /// Checks the hard invariants; soft ones (α ordering) are only logged.
    pub fn validate(&self) -> Result<()> {
        use std::f64::consts::TAU;
        let positive = |v: f64, what: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(format!("{what} must be positive and finite, got {v}")))
            }
        };
        let non_negative = |v: f64, what: &str| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(format!(
                    "{what} must be non-negative and finite, got {v}"
                )))
            }
        };
        let antenna = |a: &Antenna, who: &str| -> Result<()> {
            positive(a.main_gain, &format!("{who} main-lobe gain"))?;
            positive(a.side_gain, &format!("{who} side-lobe gain"))?;
            if a.side_gain > a.main_gain {
                return Err(Error::config(format!("{who} side-lobe gain exceeds main-lobe gain")));
            }
            if !(a.beamwidth > 0.0 && a.beamwidth <= TAU) {
                return Err(Error::config(format!(
                    "{who} beamwidth must lie in (0, 2π], got {}",
                    a.beamwidth
                )));
            }
            Ok(())
        };
        for t in Tier::ALL {
            let p = self.tier(t);
            // A zero density or power switches a tier off, which the simulators accept.
            non_negative(p.density, &format!("{t} density"))?;
            non_negative(p.power, &format!("{t} transmit power"))?;
            positive(p.threshold, &format!("{t} SINR threshold"))?;
            antenna(&p.antenna, t.as_str())?;
        }
        antenna(&self.ue, "UE")?;
        non_negative(self.ue_density, "UE density")?;
        non_negative(self.hole_radius, "hole radius")?;
        if !(0.0..=TAU).contains(&self.hole_angle) {
            return Err(Error::config(format!(
                "hole central angle must lie in [0, 2π], got {}",
                self.hole_angle
            )));
        }
        positive(self.noise_power, "noise power")?;
        for s in LinkState::ALL {
            positive(self.alpha[s], &format!("{s} path-loss exponent"))?;
            if self.nu[s] == 0 {
                return Err(Error::config(format!("{s} Nakagami parameter must be at least 1")));
            }
        }
        match &self.blockage {
            Blockage::Exponential { beta } if beta.is_nan() || *beta < 0.0 => {
                return Err(Error::config(format!("blockage rate must be non-negative, got {beta}")))
            }
            Blockage::Ball { radius } if !(*radius >= 0.0) => {
                return Err(Error::config(format!(
                    "LOS ball radius must be non-negative, got {radius}"
                )))
            }
            _ => {}
        }
        if self.alpha.nlos < self.alpha.los {
            log::warn!(
                "NLOS path-loss exponent {} is below the LOS exponent {}",
                self.alpha.nlos,
                self.alpha.los
            );
        }
        Ok(())
    }

    /// Short hash over every physical parameter.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        let mut put = |v: f64| h.update(v.to_bits().to_le_bytes());
        for t in Tier::ALL {
            let p = self.tier(t);
            for v in [
                p.density,
                p.power,
                p.antenna.main_gain,
                p.antenna.side_gain,
                p.antenna.beamwidth,
                p.threshold,
            ] {
                put(v);
            }
        }
        for v in [self.ue.main_gain, self.ue.side_gain, self.ue.beamwidth, self.ue_density] {
            put(v);
        }
        for v in [self.alpha.los, self.alpha.nlos, self.nu.los as f64, self.nu.nlos as f64] {
            put(v);
        }
        for v in [self.hole_radius, self.hole_angle, self.noise_power] {
            put(v);
        }
        for v in self.blockage.parameters() {
            put(v);
        }
        h.update(self.blockage.name().as_bytes());
        let digest = h.finalize();
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// P^LOS(r) under the configured blockage model.
pub fn los_probability(r: f64, cfg: &NetworkConfig) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::domain(format!("link length must be non-negative, got {r}")));
    }
    Ok(cfg.blockage.los(r))
}

pub fn nlos_probability(r: f64, cfg: &NetworkConfig) -> Result<f64> {
    los_probability(r, cfg).map(|p| 1.0 - p)
}

/// Linear attenuation r^(-α) for the given link state.
pub fn path_loss(r: f64, state: LinkState, cfg: &NetworkConfig) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::domain(format!("path loss is singular at r = {r}")));
    }
    Ok(pow_neg(r, cfg.alpha[state]))
}

/// r^(-alpha), through `powi` when alpha is integral.
#[inline]
pub(crate) fn pow_neg(r: f64, alpha: f64) -> f64 {
    if alpha.fract() == 0.0 && alpha.abs() < 64.0 {
        1.0 / r.powi(alpha as i32)
    } else {
        r.powf(-alpha)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::config::preset;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn path_loss_values() {
        let cfg = preset("setup2").unwrap();
        assert_eq!(path_loss(1.0, LinkState::Los, &cfg).unwrap(), 1.0);
        assert_relative_eq!(
            path_loss(100.0, LinkState::Los, &cfg).unwrap(),
            1e-4,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            path_loss(10.0, LinkState::Nlos, &cfg).unwrap(),
            1e-4,
            max_relative = 1e-15
        );
        assert!(matches!(path_loss(0.0, LinkState::Los, &cfg), Err(Error::Domain(_))));
    }

    #[test]
    fn los_probability_domain() {
        let cfg = preset("setup2").unwrap();
        assert_eq!(los_probability(0.0, &cfg).unwrap(), 1.0);
        assert_relative_eq!(
            los_probability(200.0, &cfg).unwrap(),
            0.243_116_734_434_2,
            max_relative = 1e-12
        );
        assert!(los_probability(-1.0, &cfg).is_err());
        assert_eq!(los_probability(1e7, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn fractional_exponent_uses_powf() {
        assert_relative_eq!(pow_neg(10.0, 2.5), 10f64.powf(-2.5), max_relative = 1e-15);
        assert_relative_eq!(pow_neg(10.0, 4.0), 1e-4, max_relative = 1e-15);
    }

    #[test]
    fn fingerprint_tracks_parameters() {
        let a = preset("setup2").unwrap();
        let mut b = a.clone();
        assert_eq!(a.fingerprint(), b.fingerprint());
        b.hole_angle *= 1.0 + 1e-12;
        assert_ne!(a.fingerprint(), b.fingerprint());
        let mut c = a.clone();
        c.name = "renamed".into();
        assert_eq!(a.fingerprint(), c.fingerprint());
    }

    #[test]
    fn validation_rejects_bad_values() {
        let base = preset("setup1").unwrap();
        let mut c = base.clone();
        c.nu.los = 0;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.hole_angle = 7.0;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.ue.side_gain = c.ue.main_gain * 2.0;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.alpha = PerState::new(4.0, 2.0);
        assert!(c.validate().is_ok(), "α ordering only warns");
    }

    proptest! {
        #[test]
        fn path_loss_strictly_decreasing(r in 0.1f64..1e4, dr in 1e-3f64..100.0, alpha in 0.5f64..6.0) {
            prop_assert!(pow_neg(r + dr, alpha) < pow_neg(r, alpha));
        }

        #[test]
        fn los_and_nlos_sum_to_one(r in 0.0f64..1e5) {
            let cfg = preset("setup2").unwrap();
            let total = los_probability(r, &cfg).unwrap() + nlos_probability(r, &cfg).unwrap();
            prop_assert!((total - 1.0).abs() <= f64::EPSILON);
        }
    }
}
