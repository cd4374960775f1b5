use rand::Rng;
use rand_distr::{Distribution, Gamma};

use super::{LinkState, PerState};

/// Nakagami-m small-scale fading: |h|² ~ Gamma(ν, 1/ν), unit mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingLaw {
    pub nu: PerState<u32>,
}

impl FadingLaw {
    /// Pre-built samplers, one per state.
    pub fn samplers(&self) -> PerState<Gamma<f64>> {
        let make = |nu: u32| {
            let shape = nu.max(1) as f64;
            Gamma::new(shape, 1.0 / shape).expect("shape and scale are positive")
        };
        PerState::new(make(self.nu.los), make(self.nu.nlos))
    }
}

/// One draw of the channel power gain |h|² for a link in `state`.
pub fn sample_fading<R: Rng + ?Sized>(state: LinkState, law: &FadingLaw, rng: &mut R) -> f64 {
    law.samplers()[state].sample(rng)
}
