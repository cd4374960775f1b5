//! Monte Carlo simulation of the full network model.
//!
//! Each trial samples a network realization on a disk around the typical UE,
//! associates the UE with the BS of largest average received power and
//! records the SINR of that link. Trial `i` draws from its own ChaCha8 stream
//! keyed by `(seed, i)`, so results do not depend on the worker count.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{CoverageCurve, CurvePoint, Serving, Sweep, SweepVariable};
use crate::geometry::{default_window_radius, sample_network, PointPattern};
use crate::model::{directivity_pmf, pow_neg, DirectivityPmf, LinkState, NetworkConfig, PerState, Tier};
use crate::units::db_to_linear;
use crate::{Error, Result};

/// Name used in place of an approach for simulated curves.
pub const SIMULATION_LABEL: &str = "simulation";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimulationOptions {
    pub trials: usize,
    pub seed: u64,
    /// Radius of the simulation disk; defaults to [`default_window_radius`].
    pub window_radius: Option<f64>,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
}

impl SimulationOptions {
    pub fn new(trials: usize, seed: u64) -> Self {
        Self {
            trials,
            seed,
            window_radius: None,
            workers: None,
        }
    }

    pub fn with_window(mut self, radius: f64) -> Self {
        self.window_radius = Some(radius);
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::config("trial count must be at least 1"));
        }
        if self.workers == Some(0) {
            return Err(Error::config("worker count must be at least 1"));
        }
        if let Some(r) = self.window_radius {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::config(format!("window radius must be positive, got {r}")));
            }
        }
        Ok(())
    }

    fn window(&self, cfg: &NetworkConfig) -> f64 {
        self.window_radius.unwrap_or_else(|| default_window_radius(cfg))
    }
}

/// Outcome of one realization that contains at least one BS.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialResult {
    pub serving: Serving,
    pub serving_distance: f64,
    /// Linear SINR of the serving link.
    pub sinr: f64,
    /// Distance to the nearest BS of each tier and state, indexed `[tier][state]`.
    pub nearest: [[Option<f64>; 2]; 2],
    /// Distance to the nearest MBS of each state other than the serving BS.
    pub nearest_interfering_mbs: [Option<f64>; 2],
}

impl TrialResult {
    pub fn nearest(&self, tier: Tier, state: LinkState) -> Option<f64> {
        self.nearest[tier.index()][state.index()]
    }

    pub fn nearest_interfering_mbs(&self, state: LinkState) -> Option<f64> {
        self.nearest_interfering_mbs[state.index()]
    }

    /// SINR above the serving tier's threshold in `cfg`.
    pub fn is_covered(&self, cfg: &NetworkConfig) -> bool {
        self.sinr > cfg.tier(self.serving.tier).threshold
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateWithError {
    pub estimate: f64,
    pub stderr: f64,
    pub trials: usize,
    pub seed: u64,
}

impl EstimateWithError {
    /// Binomial proportion `hits / trials` with stderr √(p(1−p)/n).
    pub fn proportion(hits: usize, trials: usize, seed: u64) -> Self {
        let p = hits as f64 / trials as f64;
        Self {
            estimate: p,
            stderr: (p * (1.0 - p) / trials as f64).sqrt(),
            trials,
            seed,
        }
    }
}

/// The random stream of trial `index`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Per-configuration constants shared by all trials.
struct Channel<'a> {
    cfg: &'a NetworkConfig,
    fading: PerState<Gamma<f64>>,
    pmf: [DirectivityPmf; 2],
}

impl<'a> Channel<'a> {
    fn new(cfg: &'a NetworkConfig) -> Self {
        Self {
            cfg,
            fading: cfg.fading().samplers(),
            pmf: Tier::ALL.map(|t| directivity_pmf(t, cfg)),
        }
    }

    fn average_power(&self, tier: Tier, state: LinkState, r: f64) -> f64 {
        self.cfg.tier(tier).power * self.cfg.serving_gain(tier) * pow_neg(r, self.cfg.alpha[state])
    }

    fn evaluate<R: Rng + ?Sized>(&self, pattern: &PointPattern, rng: &mut R) -> Option<TrialResult> {
        let mut nearest = [[None::<(usize, f64)>; 2]; 2];
        for (i, bs) in pattern.stations.iter().enumerate() {
            let r = bs.distance();
            let slot = &mut nearest[bs.tier.index()][bs.state.index()];
            if slot.is_none_or(|(_, best)| r < best) {
                *slot = Some((i, r));
            }
        }

        // The strongest candidate; ties go to the earlier class in `Serving::all`.
        let mut best: Option<(Serving, usize, f64, f64)> = None;
        for class in Serving::all() {
            if self.cfg.tier(class.tier).power <= 0.0 {
                continue;
            }
            if let Some((i, r)) = nearest[class.tier.index()][class.state.index()] {
                let power = self.average_power(class.tier, class.state, r);
                if best.is_none_or(|(_, _, _, p)| power > p) {
                    best = Some((class, i, r, power));
                }
            }
        }
        let (serving, serving_index, serving_distance, _) = best?;

        let h = self.fading[serving.state].sample(rng);
        let signal = self.cfg.tier(serving.tier).power
            * self.cfg.serving_gain(serving.tier)
            * h
            * pow_neg(serving_distance, self.cfg.alpha[serving.state]);
        let mut interference = 0.0;
        let mut interfering_mbs = [None::<f64>; 2];
        for (i, bs) in pattern.stations.iter().enumerate() {
            if i == serving_index {
                continue;
            }
            let r = bs.distance();
            if bs.tier == Tier::Macro {
                let slot = &mut interfering_mbs[bs.state.index()];
                if slot.is_none_or(|best| r < best) {
                    *slot = Some(r);
                }
            }
            let gain = self.pmf[bs.tier.index()].sample(rng);
            let fade = self.fading[bs.state].sample(rng);
            interference += self.cfg.tier(bs.tier).power * gain * fade * pow_neg(r, self.cfg.alpha[bs.state]);
        }

        Some(TrialResult {
            serving,
            serving_distance,
            sinr: signal / (interference + self.cfg.noise_power),
            nearest: nearest.map(|row| row.map(|slot| slot.map(|(_, r)| r))),
            nearest_interfering_mbs: interfering_mbs,
        })
    }
}

/// One realization on a disk of radius `window`; `None` when it holds no BS that can serve.
pub fn run_trial<R: Rng + ?Sized>(cfg: &NetworkConfig, window: f64, rng: &mut R) -> Option<TrialResult> {
    let pattern = sample_network(cfg, window, rng);
    Channel::new(cfg).evaluate(&pattern, rng)
}

/// Association and SINR for a given realization. Fading and gains are drawn
/// from `rng` in station order, so a pattern extended by appending stations
/// sees the same draws for the stations it shares with the original.
pub fn evaluate_pattern<R: Rng + ?Sized>(
    cfg: &NetworkConfig,
    pattern: &PointPattern,
    rng: &mut R,
) -> Option<TrialResult> {
    Channel::new(cfg).evaluate(pattern, rng)
}

fn in_pool<T: Send>(workers: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(job()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::config(format!("cannot start {n} workers: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

/// Applies `f` to the sampled pattern of every trial, results in trial order.
fn map_patterns<T, F>(cfg: &NetworkConfig, opts: &SimulationOptions, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&PointPattern, &mut ChaCha8Rng) -> T + Sync,
{
    opts.validate()?;
    cfg.validate()?;
    let window = opts.window(cfg);
    in_pool(opts.workers, || {
        (0..opts.trials as u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = trial_rng(opts.seed, i);
                let pattern = sample_network(cfg, window, &mut rng);
                f(&pattern, &mut rng)
            })
            .collect()
    })
}

/// Every trial's outcome, in trial order.
pub fn run_trials(cfg: &NetworkConfig, opts: &SimulationOptions) -> Result<Vec<Option<TrialResult>>> {
    let channel = Channel::new(cfg);
    map_patterns(cfg, opts, |pattern, rng| channel.evaluate(pattern, rng))
}

fn coverage_point(value: f64, covered: usize, opts: &SimulationOptions) -> CurvePoint {
    let e = EstimateWithError::proportion(covered, opts.trials, opts.seed);
    CurvePoint {
        value,
        probability: e.estimate,
        stderr: Some(e.stderr),
    }
}

fn simulated_curve(variable: SweepVariable, cfg: &NetworkConfig, points: Vec<CurvePoint>) -> CoverageCurve {
    CoverageCurve {
        sweep_var: variable,
        approach: SIMULATION_LABEL.to_string(),
        fingerprint: cfg.fingerprint(),
        points,
        diagnostics: Vec::new(),
    }
}

/// Coverage over a threshold grid in dB, with every threshold applied to the same trials.
pub fn estimate_coverage(cfg: &NetworkConfig, tau_db: &[f64], opts: &SimulationOptions) -> Result<CoverageCurve> {
    let sweep = Sweep::tau(tau_db.to_vec())?;
    let sinr: Vec<Option<f64>> = run_trials(cfg, opts)?.into_iter().map(|t| t.map(|t| t.sinr)).collect();
    let points = sweep
        .values
        .iter()
        .map(|&db| {
            let tau = db_to_linear(db);
            let covered = sinr.iter().filter(|s| s.is_some_and(|s| s > tau)).count();
            coverage_point(db, covered, opts)
        })
        .collect();
    Ok(simulated_curve(SweepVariable::Tau, cfg, points))
}

/// Coverage along any sweep. Threshold sweeps share one trial set; other
/// variables rerun the same seeds at every grid point.
pub fn estimate_coverage_sweep(cfg: &NetworkConfig, sweep: &Sweep, opts: &SimulationOptions) -> Result<CoverageCurve> {
    if sweep.variable == SweepVariable::Tau {
        return estimate_coverage(cfg, &sweep.values, opts);
    }
    let mut points = Vec::with_capacity(sweep.values.len());
    for &value in &sweep.values {
        let point_cfg = sweep.variable.apply(cfg, value)?;
        let covered = run_trials(&point_cfg, opts)?
            .iter()
            .filter(|t| t.is_some_and(|t| t.is_covered(&point_cfg)))
            .count();
        points.push(coverage_point(value, covered, opts));
    }
    Ok(simulated_curve(sweep.variable, cfg, points))
}

/// Frequency of each serving class in [`Serving::all`] order; trials without a BS count for none.
pub fn estimate_association(
    cfg: &NetworkConfig,
    opts: &SimulationOptions,
) -> Result<Vec<(Serving, EstimateWithError)>> {
    let trials = run_trials(cfg, opts)?;
    Ok(Serving::all()
        .into_iter()
        .map(|class| {
            let hits = trials.iter().filter(|t| t.is_some_and(|t| t.serving == class)).count();
            (class, EstimateWithError::proportion(hits, opts.trials, opts.seed))
        })
        .collect())
}

/// Normalized histogram of a distance sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceHistogram {
    pub bin_width: f64,
    /// Probability density per bin; bin `i` covers `[i·w, (i+1)·w)`.
    pub density: Vec<f64>,
    /// Number of samples behind the histogram.
    pub samples: usize,
    /// Trials in which no qualifying BS existed.
    pub missing: usize,
}

impl DistanceHistogram {
    pub fn from_samples(samples: &[f64], missing: usize, bin_width: f64) -> Result<Self> {
        if !(bin_width > 0.0 && bin_width.is_finite()) {
            return Err(Error::config(format!("bin width must be positive, got {bin_width}")));
        }
        let mut counts: Vec<usize> = Vec::new();
        for &r in samples {
            let i = (r / bin_width) as usize;
            if i >= counts.len() {
                counts.resize(i + 1, 0);
            }
            counts[i] += 1;
        }
        let norm = samples.len() as f64 * bin_width;
        Ok(Self {
            bin_width,
            density: counts.iter().map(|&c| c as f64 / norm).collect(),
            samples: samples.len(),
            missing,
        })
    }

    pub fn bin_centers(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.density.len()).map(|i| (i as f64 + 0.5) * self.bin_width)
    }

    /// ∫|ĥ − f| over the histogram's support, with f averaged over each bin by
    /// the midpoint rule, plus the mass of f beyond the last bin.
    pub fn l1_distance(&self, pdf: impl Fn(f64) -> f64, tail_mass: f64) -> f64 {
        self.bin_centers()
            .zip(&self.density)
            .map(|(c, h)| (h - pdf(c)).abs() * self.bin_width)
            .sum::<f64>()
            + tail_mass
    }
}

/// Histogram of the distance to the nearest state-`state` BS of `tier`, over trials where one exists.
pub fn estimate_nearest_distance_hist(
    cfg: &NetworkConfig,
    tier: Tier,
    state: LinkState,
    bin_width: f64,
    opts: &SimulationOptions,
) -> Result<DistanceHistogram> {
    let nearest = map_patterns(cfg, opts, |pattern, _| {
        pattern
            .stations
            .iter()
            .filter(|bs| bs.tier == tier && bs.state == state)
            .map(|bs| bs.distance())
            .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a| a.min(r))))
    })?;
    let samples: Vec<f64> = nearest.iter().flatten().copied().collect();
    DistanceHistogram::from_samples(&samples, nearest.len() - samples.len(), bin_width)
}

/// Fraction of baseline SBSs that survive the holes, with the standard error of the per-trial mean.
pub fn estimate_retention(cfg: &NetworkConfig, opts: &SimulationOptions) -> Result<EstimateWithError> {
    let counts = map_patterns(cfg, opts, |pattern, _| {
        (pattern.count(Tier::Small), pattern.removed.len())
    })?;
    let fractions: Vec<f64> = counts
        .iter()
        .filter(|(kept, removed)| kept + removed > 0)
        .map(|&(kept, removed)| kept as f64 / (kept + removed) as f64)
        .collect();
    if fractions.is_empty() {
        return Err(Error::config("no baseline SBS was sampled in any trial"));
    }
    let n = fractions.len() as f64;
    let mean = fractions.iter().sum::<f64>() / n;
    let var = if fractions.len() > 1 {
        fractions.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok(EstimateWithError {
        estimate: mean,
        stderr: (var / n).sqrt(),
        trials: opts.trials,
        seed: opts.seed,
    })
}
