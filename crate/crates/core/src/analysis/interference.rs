use super::intensity::IntensityMeasure;
use super::IntensityFlavor;
use crate::model::{directivity_pmf, pow_neg, LinkState, NetworkConfig, Tier};
use crate::quadrature::{integrate_semi_infinite, QuadratureSpec};
use crate::{Error, Result};

/// η = ν·(ν!)^(−1/ν), the scale in the gamma tail bound P(|h|² > z) ≈ Σ_n (−1)^{n+1} C(ν,n) e^{−nηz}.
pub fn eta(nu: u32) -> f64 {
    let nu_f = nu as f64;
    let ln_factorial: f64 = (2..=nu).map(|i| (i as f64).ln()).sum();
    nu_f * (-ln_factorial / nu_f).exp()
}

/// μ^s_{k,n} = n τ_k η^s x^{α^s} / (P_k G_{k,0}), with G_{k,0} the aligned serving gain.
pub fn gamma_tail_weight(n: u32, k: Tier, s: LinkState, x: f64, cfg: &NetworkConfig, tau: f64) -> f64 {
    let p = cfg.tier(k);
    n as f64 * tau * eta(cfg.nu[s]) / (p.power * cfg.serving_gain(k) * pow_neg(x, cfg.alpha[s]))
}

/// F(v, z) = 1 − (1 + z)^(−v).
pub fn laplace_f(v: u32, z: f64) -> f64 {
    if z < 1e-4 {
        // Series keeps relative accuracy where the closed form cancels.
        let v = v as f64;
        return v * z * (1.0 - (v + 1.0) / 2.0 * z * (1.0 - (v + 2.0) / 3.0 * z));
    }
    if z.is_infinite() {
        return 1.0;
    }
    // Relative error stays near 1e-12 for z ≥ 1e-4.
    1.0 - (1.0 + z).powi(v as i32).recip()
}

/// Per-atom factors μ P_j A_{j,g} / ν' and their probabilities.
pub(crate) fn atom_weights(j: Tier, nu: u32, mu: f64, cfg: &NetworkConfig) -> [(f64, f64); 4] {
    let pmf = directivity_pmf(j, cfg);
    let scale = mu * cfg.tier(j).power / nu as f64;
    pmf.atoms.map(|a| (a.probability, scale * a.gain))
}

/// Σ_g P_g F(ν', c_g r^{−α'}), the mean per-interferer Laplace deficit at distance r.
#[inline]
pub(crate) fn mean_deficit(atoms: &[(f64, f64); 4], nu: u32, path_loss: f64) -> f64 {
    atoms
        .iter()
        .filter(|(p, _)| *p > 0.0)
        .map(|(p, c)| p * laplace_f(nu, c * path_loss))
        .sum()
}

/// W_j^{s'}: interference exponent of the state-s' tier-j BSs beyond `lower`.
pub fn w_term(
    j: Tier,
    s_prime: LinkState,
    lower: f64,
    mu: f64,
    cfg: &NetworkConfig,
    flavor: IntensityFlavor,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let m = IntensityMeasure::new(cfg, j, s_prime, flavor);
    if m.density == 0.0 || mu == 0.0 || lower.is_infinite() || cfg.tier(j).power == 0.0 {
        return Ok(0.0);
    }
    let nu = cfg.nu[s_prime];
    let alpha = cfg.alpha[s_prime];
    let atoms = atom_weights(j, nu, mu, cfg);
    // Distance at which the strongest atom's argument reaches one.
    let knee = atoms.iter().map(|a| a.1).fold(0.0, f64::max).powf(1.0 / alpha);
    let scale = lower.max(knee).clamp(1.0, 1e5);
    let spec = spec.with_scale(scale);
    integrate_semi_infinite(
        |r| {
            if r <= 0.0 {
                return 0.0;
            }
            let density = m.derivative(r);
            if density == 0.0 {
                return 0.0;
            }
            mean_deficit(&atoms, nu, pow_neg(r, alpha)) * density
        },
        lower.max(0.0),
        &spec,
    )
    .map(|e| e.value)
    .map_err(|e| Error::from(e).within(|| format!("W tier {j} {s_prime}")))
}
