//! Corrections for SBSs removed by the hole of an MBS.
//!
//! A hole centred at distance x from the UE removes the SBSs it covers; Q(x)
//! is the interference exponent those SBSs would have contributed, averaged
//! over the hole orientation. The serving-hole, nearest-hole and all-hole
//! approximations each fold Q into the coverage integrand differently.

use std::cell::RefCell;
use std::f64::consts::{PI, TAU};

use super::association::{exclusion_radius, Serving};
use super::intensity::IntensityMeasure;
use super::interference::{atom_weights, mean_deficit};
use super::{HoleDensityForm, HoleStates, IntensityFlavor};
use crate::model::{pow_neg, LinkState, NetworkConfig, PerState, Tier};
use crate::quadrature::{integrate, integrate_many, integrate_semi_infinite, QuadratureSpec};
use crate::{Error, Result};

fn has_holes(cfg: &NetworkConfig) -> bool {
    cfg.hole_radius > 0.0
        && cfg.hole_angle > 0.0
        && cfg.tier(Tier::Small).density > 0.0
        && cfg.tier(Tier::Small).power > 0.0
}

/// Q for both link states, for a hole covering `fraction` of the disk of radius D.
fn hole_exponents(x: f64, mu: f64, cfg: &NetworkConfig, fraction: f64, spec: &QuadratureSpec) -> Result<[f64; 2]> {
    if !(x > 0.0) {
        return Err(Error::domain(format!("hole centre distance must be positive, got {x}")));
    }
    if !has_holes(cfg) || fraction == 0.0 || mu == 0.0 {
        return Ok([0.0; 2]);
    }
    let d = cfg.hole_radius;
    let weight = TAU * cfg.tier(Tier::Small).density * fraction;
    let atoms = LinkState::ALL.map(|s| atom_weights(Tier::Small, cfg.nu[s], mu, cfg));
    // Integrand per unit u with the angular share `arc/π` of the circle of radius u inside the disk.
    let ring = |u: f64, arc: f64| -> [f64; 2] {
        let mut out = [0.0; 2];
        let los = cfg.blockage.los(u);
        for s in LinkState::ALL {
            let p = if s == LinkState::Los { los } else { 1.0 - los };
            if p > 0.0 {
                let i = s.index();
                out[i] = mean_deficit(&atoms[i], cfg.nu[s], pow_neg(u, cfg.alpha[s])) * weight * (arc / PI) * p * u;
            }
        }
        out
    };

    let mut total = [0.0; 2];
    let context = |what: &str| format!("Q {what} at x = {x}");
    if x < d {
        // Circles of radius u < D − x around the UE lie entirely inside the disk.
        let inner =
            integrate_many(|u| ring(u, PI), 0.0, d - x, spec).map_err(|e| Error::from(e).within(|| context("core")))?;
        total = inner.value;
    }
    // Annulus |x − D| < u < x + D; u = m + h(3t − t³)/2 removes the square-root
    // endpoint behaviour of the arccos.
    let (a, b) = ((x - d).abs(), x + d);
    let (m, h) = ((a + b) / 2.0, (b - a) / 2.0);
    let annulus = integrate_many(
        |t| {
            let u = m + h * (3.0 * t - t * t * t) / 2.0;
            if u <= 0.0 {
                return [0.0; 2];
            }
            let jac = 1.5 * h * (1.0 - t * t);
            let cos = ((u * u + x * x - d * d) / (2.0 * u * x)).clamp(-1.0, 1.0);
            let v = ring(u, cos.acos());
            [v[0] * jac, v[1] * jac]
        },
        -1.0,
        1.0,
        spec,
    )
    .map_err(|e| Error::from(e).within(|| context("annulus")))?;
    total[0] += annulus.value[0];
    total[1] += annulus.value[1];
    Ok(total)
}

/// Q^{s'}(x) for a sector hole of central angle θ_c and random orientation.
pub fn q_term(s_prime: LinkState, x: f64, mu: f64, cfg: &NetworkConfig, spec: &QuadratureSpec) -> Result<f64> {
    Ok(q_terms(x, mu, cfg, spec)?[s_prime])
}

/// Q for both link states on one set of quadrature nodes.
pub fn q_terms(x: f64, mu: f64, cfg: &NetworkConfig, spec: &QuadratureSpec) -> Result<PerState<f64>> {
    let [los, nlos] = hole_exponents(x, mu, cfg, cfg.hole_angle / TAU, spec)?;
    Ok(PerState::new(los, nlos))
}

/// Q^{s'}(x) for a full circular hole of radius D.
pub fn q_term_circular(s_prime: LinkState, x: f64, mu: f64, cfg: &NetworkConfig, spec: &QuadratureSpec) -> Result<f64> {
    Ok(hole_exponents(x, mu, cfg, 1.0, spec)?[s_prime.index()])
}

/// Q^{s'}(x) as a two-fold integral over the hole in polar coordinates
/// around its centre, with link lengths from the cosine law.
pub fn q_term_polar(s_prime: LinkState, x: f64, mu: f64, cfg: &NetworkConfig, spec: &QuadratureSpec) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain(format!("hole centre distance must be positive, got {x}")));
    }
    if !has_holes(cfg) || mu == 0.0 {
        return Ok(0.0);
    }
    let d = cfg.hole_radius;
    let nu = cfg.nu[s_prime];
    let alpha = cfg.alpha[s_prime];
    let atoms = atom_weights(Tier::Small, nu, mu, cfg);
    let inner_spec = spec.tightened(1);
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let radial = |phi: f64| -> f64 {
        let (cos, x2) = (phi.cos(), x * x);
        let f = |u: f64| {
            let r = (u * u + x2 - 2.0 * u * x * cos).max(0.0).sqrt();
            let p = cfg.blockage.state(s_prime, r);
            if p == 0.0 || r == 0.0 {
                return p * u;
            }
            mean_deficit(&atoms, nu, pow_neg(r, alpha)) * p * u
        };
        // The link length vanishes at u = x on the ray towards the UE.
        let result = if x < d {
            integrate(f, 0.0, x, &inner_spec).and_then(|a| integrate(f, x, d, &inner_spec).map(|b| a.value + b.value))
        } else {
            integrate(f, 0.0, d, &inner_spec).map(|e| e.value)
        };
        result.unwrap_or_else(|e| {
            failure.borrow_mut().get_or_insert(Error::from(e));
            0.0
        })
    };
    // The integrand is even in φ.
    let outer = integrate(radial, 0.0, PI, spec).map_err(Error::from)?;
    if let Some(e) = failure.into_inner() {
        return Err(e.within(|| format!("polar Q at x = {x}")));
    }
    let fraction = cfg.hole_angle / TAU;
    Ok(fraction * cfg.tier(Tier::Small).density * 2.0 * outer.value)
}

/// Conditional PDF of the distance to the nearest state-s'' interfering MBS,
/// given service by `serving` at distance x. `None` when no such MBS can exist.
pub fn interferer_mbs_distance_pdf(
    s_dprime: LinkState,
    y: f64,
    serving: Serving,
    x: f64,
    cfg: &NetworkConfig,
) -> Option<f64> {
    let lower = exclusion_radius(Tier::Macro, s_dprime, serving.tier, serving.state, x, cfg);
    let m = IntensityMeasure::new(cfg, Tier::Macro, s_dprime, IntensityFlavor::Baseline);
    let tail = m.tail(lower);
    if !(tail > 0.0) {
        return None;
    }
    if y < lower {
        return Some(0.0);
    }
    Some(m.derivative(y) * (-(m.measure(y) - m.measure(lower))).exp() / -(-tail).exp_m1())
}

/// Runs `f` as a quadrature integrand, parking the first inner failure.
struct Nested {
    failure: RefCell<Option<Error>>,
}

impl Nested {
    fn new() -> Self {
        Self {
            failure: RefCell::new(None),
        }
    }

    fn eval(&self, r: Result<f64>) -> f64 {
        r.unwrap_or_else(|e| {
            self.failure.borrow_mut().get_or_insert(e);
            0.0
        })
    }

    fn finish<T>(self, outer: Result<T>) -> Result<T> {
        match self.failure.into_inner() {
            Some(e) => Err(e),
            None => outer,
        }
    }
}

fn tail_scale(lower: f64, cfg: &NetworkConfig) -> f64 {
    lower.max(cfg.hole_radius).clamp(1.0, 1e5)
}

/// Z(x): expected boost from the holes of the nearest interfering LOS and NLOS MBSs.
pub fn z_term(
    serving: Serving,
    x: f64,
    mu: f64,
    cfg: &NetworkConfig,
    states: HoleStates,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if !has_holes(cfg) || mu == 0.0 {
        return Ok(1.0);
    }
    let inner = spec.tightened(1);
    let mut z = 1.0;
    for sd in LinkState::ALL.into_iter().filter(|&s| states.includes(s)) {
        let lower = exclusion_radius(Tier::Macro, sd, serving.tier, serving.state, x, cfg);
        let m = IntensityMeasure::new(cfg, Tier::Macro, sd, IntensityFlavor::Baseline);
        let tail = m.tail(lower);
        if !(tail > 0.0) {
            continue;
        }
        let presence = -(-tail).exp_m1();
        let base = m.measure(lower);
        let nested = Nested::new();
        // ∫ e^{ΣQ} f dy = 1 + ∫ (e^{ΣQ} − 1) f dy keeps the small correction accurate.
        let outer = integrate_semi_infinite(
            |y| {
                if y <= 0.0 {
                    return 0.0;
                }
                let pdf = m.derivative(y) * (-(m.measure(y) - base)).exp() / presence;
                if pdf == 0.0 {
                    return 0.0;
                }
                let q = nested.eval(q_terms(y, mu, cfg, &inner).map(|q| q.los + q.nlos));
                q.exp_m1() * pdf
            },
            lower,
            &spec.with_scale(tail_scale(lower, cfg)),
        )
        .map_err(Error::from);
        let value = nested
            .finish(outer)
            .map_err(|e| e.within(|| format!("Z {sd} holes at x = {x}")))?
            .value;
        z *= 1.0 + value;
    }
    Ok(z)
}

/// T(x): boost from all interfering MBS holes, ignoring their overlaps.
pub fn t_term(
    serving: Serving,
    x: f64,
    mu: f64,
    cfg: &NetworkConfig,
    states: HoleStates,
    form: HoleDensityForm,
    spec: &QuadratureSpec,
) -> Result<f64> {
    t_exponent(serving, x, mu, cfg, states, form, spec).map(f64::exp)
}

/// ln T(x). Large serving distances push T past the f64 range while the
/// interference term underflows, so callers combine the two in log space.
pub fn t_exponent(
    serving: Serving,
    x: f64,
    mu: f64,
    cfg: &NetworkConfig,
    states: HoleStates,
    form: HoleDensityForm,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if !has_holes(cfg) || mu == 0.0 {
        return Ok(0.0);
    }
    let inner = spec.tightened(1);
    let mut exponent = 0.0;
    for sd in LinkState::ALL.into_iter().filter(|&s| states.includes(s)) {
        let lower = exclusion_radius(Tier::Macro, sd, serving.tier, serving.state, x, cfg);
        let m = IntensityMeasure::new(cfg, Tier::Macro, sd, IntensityFlavor::Baseline);
        if m.density == 0.0 || lower.is_infinite() {
            continue;
        }
        let nested = Nested::new();
        let outer = integrate_semi_infinite(
            |y| {
                if y <= 0.0 {
                    return 0.0;
                }
                let density = match form {
                    HoleDensityForm::Radial => m.derivative(y),
                    HoleDensityForm::Cumulative => m.measure(y),
                };
                if density == 0.0 {
                    return 0.0;
                }
                let q = nested.eval(q_terms(y, mu, cfg, &inner).map(|q| q.los.exp_m1() + q.nlos.exp_m1()));
                q * density
            },
            lower,
            &spec.with_scale(tail_scale(lower, cfg)),
        )
        .map_err(Error::from);
        exponent += nested
            .finish(outer)
            .map_err(|e| e.within(|| format!("T {sd} holes at x = {x}")))?
            .value;
    }
    Ok(exponent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::interference::gamma_tail_weight;
    use crate::model::config::preset;
    use approx::assert_relative_eq;

    fn probe_mu(cfg: &NetworkConfig, x: f64) -> f64 {
        // Serving MBS at x with a 0 dB threshold.
        gamma_tail_weight(1, Tier::Macro, LinkState::Los, x, cfg, 1.0)
    }

    #[test]
    fn empty_hole_has_no_effect() {
        let mut cfg = preset("setup2").unwrap();
        cfg.hole_radius = 0.0;
        let spec = QuadratureSpec::default();
        assert_eq!(q_terms(100.0, 1e3, &cfg, &spec).unwrap(), PerState::new(0.0, 0.0));
        let s = Serving::new(Tier::Macro, LinkState::Los);
        assert_eq!(z_term(s, 100.0, 1e3, &cfg, HoleStates::BOTH, &spec).unwrap(), 1.0);
        assert_eq!(
            t_term(s, 100.0, 1e3, &cfg, HoleStates::BOTH, HoleDensityForm::Radial, &spec).unwrap(),
            1.0
        );
        assert!(q_term(LinkState::Los, 0.0, 1.0, &preset("setup2").unwrap(), &spec).is_err());
    }

    #[test]
    fn one_fold_form_matches_polar_oracle() {
        let spec = QuadratureSpec::with_tolerances(1e-9, 1e-15);
        for name in ["setup1", "setup2"] {
            let cfg = preset(name).unwrap();
            let d = cfg.hole_radius;
            for x in [d / 2.0, d, 2.0 * d, 10.0 * d] {
                let mu = probe_mu(&cfg, x);
                for s in LinkState::ALL {
                    let one = q_term(s, x, mu, &cfg, &spec).unwrap();
                    let two = q_term_polar(s, x, mu, &cfg, &spec).unwrap();
                    assert!(one > 0.0);
                    assert_relative_eq!(one, two, max_relative = 1e-4);
                }
            }
        }
    }

    #[test]
    fn full_sector_equals_circular_hole() {
        let mut cfg = preset("setup2").unwrap();
        cfg.hole_angle = TAU;
        let spec = QuadratureSpec::default();
        for x in [30.0, 200.0, 450.0] {
            for mu in [1e-2, 1.0, 1e4] {
                for s in LinkState::ALL {
                    let sector = q_term(s, x, mu, &cfg, &spec).unwrap();
                    let circle = q_term_circular(s, x, mu, &cfg, &spec).unwrap();
                    assert_relative_eq!(sector, circle, max_relative = 1e-6);
                }
            }
        }
    }

    #[test]
    fn sector_scales_circular_by_angle_fraction() {
        let cfg = preset("setup2").unwrap();
        let spec = QuadratureSpec::default();
        let q = q_term(LinkState::Nlos, 150.0, 10.0, &cfg, &spec).unwrap();
        let c = q_term_circular(LinkState::Nlos, 150.0, 10.0, &cfg, &spec).unwrap();
        assert_relative_eq!(q / c, cfg.hole_angle / TAU, max_relative = 1e-9);
    }

    #[test]
    fn interferer_pdf_normalized_and_supported() {
        let cfg = preset("setup2").unwrap();
        let spec = QuadratureSpec::with_tolerances(1e-9, 1e-13);
        for serving in Serving::all() {
            for sd in LinkState::ALL {
                let lower = exclusion_radius(Tier::Macro, sd, serving.tier, serving.state, 100.0, &cfg);
                if interferer_mbs_distance_pdf(sd, lower, serving, 100.0, &cfg).is_none() {
                    // Beyond the last possible LOS MBS.
                    assert_eq!(sd, LinkState::Los);
                    continue;
                }
                assert_eq!(
                    interferer_mbs_distance_pdf(sd, lower * 0.99, serving, 100.0, &cfg),
                    Some(0.0)
                );
                let mass = integrate_semi_infinite(
                    |y| interferer_mbs_distance_pdf(sd, y, serving, 100.0, &cfg).unwrap(),
                    lower,
                    &spec.with_scale(lower.max(100.0)),
                )
                .unwrap()
                .value;
                assert!((mass - 1.0).abs() < 1e-4, "{serving:?} {sd}: {mass}");
            }
        }
        let mut none = cfg.clone();
        none.tier_mut(Tier::Macro).density = 0.0;
        let s = Serving::new(Tier::Small, LinkState::Los);
        assert_eq!(interferer_mbs_distance_pdf(LinkState::Los, 50.0, s, 100.0, &none), None);
    }

    #[test]
    fn corrections_are_at_least_one() {
        let cfg = preset("setup2").unwrap();
        let spec = QuadratureSpec::default();
        for serving in Serving::all() {
            for x in [20.0, 150.0, 600.0] {
                let mu = gamma_tail_weight(1, serving.tier, serving.state, x, &cfg, 10.0);
                let z = z_term(serving, x, mu, &cfg, HoleStates::BOTH, &spec).unwrap();
                let t = t_term(serving, x, mu, &cfg, HoleStates::BOTH, HoleDensityForm::Radial, &spec).unwrap();
                assert!(z >= 1.0 && t >= 1.0, "{serving:?} {x}: Z {z} T {t}");
            }
        }
    }

    #[test]
    fn z_matches_direct_expectation() {
        let cfg = preset("setup2").unwrap();
        let spec = QuadratureSpec::with_tolerances(1e-8, 1e-13);
        let serving = Serving::new(Tier::Small, LinkState::Los);
        let x = 60.0;
        let mu = gamma_tail_weight(1, serving.tier, serving.state, x, &cfg, 10.0);
        let z = z_term(serving, x, mu, &cfg, HoleStates::NLOS_ONLY, &spec).unwrap();
        let lower = exclusion_radius(Tier::Macro, LinkState::Nlos, serving.tier, serving.state, x, &cfg);
        let direct = integrate_semi_infinite(
            |y| {
                let q = q_terms(y, mu, &cfg, &spec.tightened(1)).unwrap();
                (q.los + q.nlos).exp() * interferer_mbs_distance_pdf(LinkState::Nlos, y, serving, x, &cfg).unwrap()
            },
            lower,
            &spec.with_scale(200.0),
        )
        .unwrap()
        .value;
        assert_relative_eq!(z, direct, max_relative = 1e-6);
    }

    #[test]
    fn nlos_holes_dominate_all_hole_correction() {
        let cfg = preset("setup2").unwrap();
        let spec = QuadratureSpec::default();
        let serving = Serving::new(Tier::Macro, LinkState::Los);
        let x = 100.0;
        let mu = probe_mu(&cfg, x);
        let t = |st| t_term(serving, x, mu, &cfg, st, HoleDensityForm::Radial, &spec).unwrap();
        let both = t(HoleStates::BOTH).ln();
        let without_nlos = t(HoleStates::LOS_ONLY).ln();
        let without_los = t(HoleStates::NLOS_ONLY).ln();
        assert!(
            both - without_nlos > both - without_los,
            "{both} {without_nlos} {without_los}"
        );
    }
}
