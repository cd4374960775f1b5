//! LOS probability models.

use std::fmt;
use std::sync::Arc;

use super::LinkState;
use crate::quadrature::{integrate, integrate_semi_infinite, QuadratureSpec};

/// A non-increasing LOS probability P^LOS(r) of link length r.
///
/// `moment` is ∫₀^r t·P^LOS(t) dt, the kernel of every intensity measure.
/// The default evaluates it by quadrature; built-in models override it with
/// closed forms.
pub trait LosProbability: Send + Sync + fmt::Debug {
    fn probability(&self, r: f64) -> f64;

    fn moment(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let spec = QuadratureSpec::with_tolerances(1e-10, 1e-12);
        integrate(|t| t * self.probability(t), 0.0, r, &spec)
            .map(|e| e.value)
            .unwrap_or(f64::NAN)
    }

    /// ∫₀^∞ t·P^LOS(t) dt, or `None` when it diverges.
    fn total_moment(&self) -> Option<f64> {
        let spec = QuadratureSpec::with_tolerances(1e-10, 1e-12).with_scale(100.0);
        integrate_semi_infinite(|t| t * self.probability(t), 0.0, &spec)
            .ok()
            .map(|e| e.value)
    }

    /// Length over which P^LOS decays, used to size simulation windows.
    fn decay_length(&self) -> Option<f64> {
        None
    }

    fn name(&self) -> &str {
        "custom"
    }
}

/// Built-in blockage models plus an escape hatch for user-supplied ones.
#[derive(Clone, Debug)]
pub enum Blockage {
    /// P^LOS(r) = exp(-β r).
    Exponential {
        beta: f64,
    },
    /// P^LOS(r) = 1 for r ≤ radius, 0 beyond.
    Ball {
        radius: f64,
    },
    Custom(Arc<dyn LosProbability>),
}

impl Blockage {
    /// Exponential model parameterized by the mean LOS distance, β = √2 / R_LOS.
    pub fn from_mean_los_distance(r_los: f64) -> Self {
        Blockage::Exponential {
            beta: std::f64::consts::SQRT_2 / r_los,
        }
    }

    pub fn los(&self, r: f64) -> f64 {
        match self {
            Blockage::Exponential { beta } => {
                if r <= 0.0 {
                    1.0
                } else {
                    (-beta * r).exp()
                }
            }
            Blockage::Ball { radius } => {
                if r <= *radius {
                    1.0
                } else {
                    0.0
                }
            }
            Blockage::Custom(model) => model.probability(r),
        }
    }

    pub fn nlos(&self, r: f64) -> f64 {
        1.0 - self.los(r)
    }

    pub fn state(&self, state: LinkState, r: f64) -> f64 {
        match state {
            LinkState::Los => self.los(r),
            LinkState::Nlos => self.nlos(r),
        }
    }

    /// ∫₀^r t·P^LOS(t) dt.
    pub fn los_moment(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        match self {
            Blockage::Exponential { beta } => exponential_moment(*beta, r),
            Blockage::Ball { radius } => 0.5 * r.min(*radius).powi(2),
            Blockage::Custom(model) => model.moment(r),
        }
    }

    /// ∫₀^r t·P^s(t) dt for either state.
    pub fn moment(&self, state: LinkState, r: f64) -> f64 {
        match state {
            LinkState::Los => self.los_moment(r),
            LinkState::Nlos => {
                if r <= 0.0 {
                    0.0
                } else {
                    (0.5 * r * r - self.los_moment(r)).max(0.0)
                }
            }
        }
    }

    /// ∫₀^∞ t·P^s(t) dt; `None` (infinite) for NLOS and for unbounded LOS.
    pub fn total_moment(&self, state: LinkState) -> Option<f64> {
        match state {
            LinkState::Nlos => match self {
                Blockage::Exponential { beta } if *beta == 0.0 => Some(0.0),
                _ => None,
            },
            LinkState::Los => match self {
                Blockage::Exponential { beta } => {
                    if *beta == 0.0 {
                        None
                    } else {
                        Some(1.0 / (beta * beta))
                    }
                }
                Blockage::Ball { radius } => Some(0.5 * radius * radius),
                Blockage::Custom(model) => model.total_moment(),
            },
        }
    }

    pub fn decay_length(&self) -> Option<f64> {
        match self {
            Blockage::Exponential { beta } => (*beta > 0.0).then(|| 1.0 / beta),
            Blockage::Ball { radius } => Some(*radius),
            Blockage::Custom(model) => model.decay_length(),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Blockage::Exponential { .. } => "exponential",
            Blockage::Ball { .. } => "ball",
            Blockage::Custom(model) => model.name(),
        }
    }

    /// Canonical parameter list for fingerprinting.
    pub(crate) fn parameters(&self) -> Vec<f64> {
        match self {
            Blockage::Exponential { beta } => vec![*beta],
            Blockage::Ball { radius } => vec![*radius],
            Blockage::Custom(_) => vec![],
        }
    }
}

/// (1 - e^{-βr}(1 + βr)) / β², with a series where the closed form cancels.
fn exponential_moment(beta: f64, r: f64) -> f64 {
    if beta == 0.0 {
        return 0.5 * r * r;
    }
    if beta.is_infinite() {
        return 0.0;
    }
    let z = beta * r;
    let head = if z < 1e-2 {
        z * z * (0.5 - z * (1.0 / 3.0 - z * (1.0 / 8.0 - z * (1.0 / 30.0 - z / 144.0))))
    } else {
        -(-z).exp_m1() - z * (-z).exp()
    };
    head / (beta * beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[derive(Debug)]
    struct Linear(f64);

    impl LosProbability for Linear {
        fn probability(&self, r: f64) -> f64 {
            (1.0 - r / self.0).max(0.0)
        }
    }

    #[test]
    fn exponential_reference_points() {
        let b = Blockage::from_mean_los_distance(200.0);
        assert_eq!(b.los(0.0), 1.0);
        assert_relative_eq!(b.los(200.0), (-2f64.sqrt()).exp(), max_relative = 1e-15);
        assert_relative_eq!(b.los(200.0), 0.243_116_734_434_2, max_relative = 1e-12);
        assert_eq!(b.los(1e6), 0.0);
        assert_eq!(b.los(123.0) + b.nlos(123.0), 1.0);
    }

    #[test]
    fn moment_matches_quadrature() {
        let spec = QuadratureSpec::with_tolerances(1e-12, 1e-14);
        for &beta in &[1e-5, 2f64.sqrt() / 200.0, 0.3] {
            let b = Blockage::Exponential { beta };
            for &r in &[1e-3, 0.5, 10.0, 700.0, 5000.0] {
                let q = integrate(|t| t * (-beta * t).exp(), 0.0, r, &spec).unwrap().value;
                assert_relative_eq!(b.los_moment(r), q, max_relative = 1e-10);
                let qn = integrate(|t| t * (1.0 - (-beta * t).exp()), 0.0, r, &spec)
                    .unwrap()
                    .value;
                assert_relative_eq!(b.moment(LinkState::Nlos, r), qn, max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn degenerate_rates() {
        let clear = Blockage::Exponential { beta: 0.0 };
        assert_eq!(clear.los(1e9), 1.0);
        assert_eq!(clear.los_moment(2.0), 2.0);
        assert_eq!(clear.total_moment(LinkState::Los), None);
        let blocked = Blockage::Exponential { beta: f64::INFINITY };
        assert_eq!(blocked.los(1e-9), 0.0);
        assert_eq!(blocked.los_moment(10.0), 0.0);
    }

    #[test]
    fn ball_model() {
        let b = Blockage::Ball { radius: 100.0 };
        assert_eq!(b.los(100.0), 1.0);
        assert_eq!(b.los(100.1), 0.0);
        assert_eq!(b.los_moment(50.0), 1250.0);
        assert_eq!(b.los_moment(500.0), 5000.0);
        assert_eq!(b.total_moment(LinkState::Los), Some(5000.0));
    }

    #[test]
    fn custom_model_uses_quadrature_defaults() {
        let b = Blockage::Custom(Arc::new(Linear(300.0)));
        // ∫₀^r t (1 - t/L) dt = r²/2 - r³/(3L)
        assert_relative_eq!(
            b.los_moment(150.0),
            150f64.powi(2) / 2.0 - 150f64.powi(3) / 900.0,
            max_relative = 1e-9
        );
        assert_relative_eq!(
            b.total_moment(LinkState::Los).unwrap(),
            300f64.powi(2) / 6.0,
            max_relative = 1e-6
        );
        assert_eq!(b.name(), "custom");
    }

    #[test]
    fn los_is_non_increasing() {
        let models = [
            Blockage::from_mean_los_distance(50.0),
            Blockage::Ball { radius: 80.0 },
            Blockage::Custom(Arc::new(Linear(120.0))),
        ];
        for m in &models {
            let mut prev = 1.0;
            for i in 0..400 {
                let p = m.los(i as f64);
                assert!(p <= prev && (0.0..=1.0).contains(&p));
                prev = p;
            }
        }
    }
}
