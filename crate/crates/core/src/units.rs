//! Unit conversions between the engineering units used in configuration
//! files (dB, dBm, km⁻²) and the SI units used everywhere else.

/// Thermal noise power spectral density at 290 K, dBm/Hz.
pub const THERMAL_NOISE_DBM_PER_HZ: f64 = -174.0;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

pub fn dbm_to_watt(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watt_to_dbm(watt: f64) -> f64 {
    10.0 * watt.log10() + 30.0
}

pub fn per_km2_to_per_m2(per_km2: f64) -> f64 {
    per_km2 * 1e-6
}

pub fn per_m2_to_per_km2(per_m2: f64) -> f64 {
    per_m2 * 1e6
}

/// Receiver noise power in dBm for a bandwidth in Hz and a noise figure in dB.
pub fn noise_power_dbm(bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
    THERMAL_NOISE_DBM_PER_HZ + 10.0 * bandwidth_hz.log10() + noise_figure_db
}
