use rand::Rng;
use serde::Serialize;

use super::{NetworkConfig, Tier};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GainAtom {
    /// Linear directivity gain, BS × UE.
    pub gain: f64,
    pub probability: f64,
}

/// Distribution of the directivity gain of an interfering link for one tier:
/// four atoms from main/side lobes at the BS and at the UE, with lobe
/// probabilities equal to the beamwidth fractions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DirectivityPmf {
    pub atoms: [GainAtom; 4],
}

impl DirectivityPmf {
    pub fn total_probability(&self) -> f64 {
        self.atoms.iter().map(|a| a.probability).sum()
    }

    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|a| a.gain * a.probability).sum()
    }

    /// Atoms with non-zero probability.
    pub fn support(&self) -> impl Iterator<Item = &GainAtom> {
        self.atoms.iter().filter(|a| a.probability > 0.0)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for a in &self.atoms {
            acc += a.probability;
            if u < acc {
                return a.gain;
            }
        }
        // u fell in the rounding gap above the cumulative sum.
        self.support().last().map_or(self.atoms[0].gain, |a| a.gain)
    }
}

pub fn directivity_pmf(tier: Tier, cfg: &NetworkConfig) -> DirectivityPmf {
    let bs = cfg.tier(tier).antenna;
    let ue = cfg.ue;
    let (ck, cu) = (bs.main_lobe_fraction(), ue.main_lobe_fraction());
    let atom = |gain, probability| GainAtom { gain, probability };
    DirectivityPmf {
        atoms: [
            atom(bs.main_gain * ue.main_gain, ck * cu),
            atom(bs.main_gain * ue.side_gain, ck * (1.0 - cu)),
            atom(bs.side_gain * ue.main_gain, (1.0 - ck) * cu),
            atom(bs.side_gain * ue.side_gain, (1.0 - ck) * (1.0 - cu)),
        ],
    }
}
