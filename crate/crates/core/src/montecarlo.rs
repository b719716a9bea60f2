//! Event-level simulation of Rayleigh-faded links.
//!
//! Every trial draws all link gains, forms the decoding set, selects the best
//! relay and evaluates the eavesdropper's selection combining. Comparisons are
//! made in the gain domain against `alpha`/`delta`, which is equivalent to
//! comparing capacities against the rate.
//!
//! Event convention: outage is `gain < threshold`, intercept and successful
//! relay decoding are `gain > threshold`. A gain exactly at the threshold is
//! neither an outage nor an intercept.
//!
//! Randomness is addressed by trial index: the uniforms of trial `t` sit at a
//! fixed offset in a ChaCha8 keystream keyed by the seed, so any partition of
//! trials across workers yields identical counts.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::model::{ChannelProfile, SystemConfig, Thresholds};

/// Trials handled by one work item.
const CHUNK_TRIALS: u64 = 1 << 14;

pub const DEFAULT_CONFIDENCE: f64 = 0.999;

/// Instantaneous squared gains of one channel realisation.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDraw {
    pub g_sd: f64,
    pub g_se: f64,
    pub g_si: Vec<f64>,
    pub g_id: Vec<f64>,
    pub g_ie: Vec<f64>,
}

impl ChannelDraw {
    fn zeroed(n: usize) -> Self {
        ChannelDraw {
            g_sd: 0.0,
            g_se: 0.0,
            g_si: vec![0.0; n],
            g_id: vec![0.0; n],
            g_ie: vec![0.0; n],
        }
    }
}

/// Keystream positioned at a trial boundary.
#[derive(Debug, Clone)]
pub struct TrialStream {
    rng: ChaCha8Rng,
}

impl TrialStream {
    /// Stream for `seed`, positioned at the first uniform of trial `trial`
    /// when every trial consumes `uniforms_per_trial` values.
    pub fn at_trial(seed: u64, trial: u64, uniforms_per_trial: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // Each uniform consumes one u64, i.e. two 32-bit keystream words.
        rng.set_word_pos(2 * trial as u128 * uniforms_per_trial as u128);
        TrialStream { rng }
    }

    /// Uniform on the open interval (0, 1).
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Exponential variate with the given mean.
    #[inline]
    pub fn exponential(&mut self, mean: f64) -> f64 {
        -mean * self.uniform().ln()
    }
}

/// Number of uniforms one trial consumes for a network of `n` relays.
pub fn uniforms_per_trial(n: usize) -> u64 {
    2 + 3 * n as u64
}

/// Draw every link gain of `profile`. Order: sd, se, then (si, id, ie) per relay.
pub fn draw_channel(profile: &ChannelProfile, stream: &mut TrialStream) -> ChannelDraw {
    let mut draw = ChannelDraw::zeroed(profile.n_relays());
    draw_channel_into(profile, stream, &mut draw);
    draw
}

fn draw_channel_into(profile: &ChannelProfile, stream: &mut TrialStream, draw: &mut ChannelDraw) {
    draw.g_sd = stream.exponential(profile.sigma_sd2());
    draw.g_se = stream.exponential(profile.sigma_se2());
    for i in 0..profile.n_relays() {
        draw.g_si[i] = stream.exponential(profile.sigma_si2()[i]);
        draw.g_id[i] = stream.exponential(profile.sigma_id2()[i]);
        draw.g_ie[i] = stream.exponential(profile.sigma_ie2()[i]);
    }
}

/// Outage and intercept indicators of one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TrialEvents {
    pub outage: bool,
    pub intercept: bool,
}

/// Direct transmission events at single-slot threshold `alpha`.
pub fn dt_events(draw: &ChannelDraw, alpha: f64) -> TrialEvents {
    TrialEvents {
        outage: draw.g_sd < alpha,
        intercept: draw.g_se > alpha,
    }
}

/// Relay selection events at two-slot threshold `delta`.
pub fn ors_events(draw: &ChannelDraw, delta: f64) -> TrialEvents {
    // Best decoding relay by relay-to-destination gain; strict `>` keeps the
    // lowest index on ties.
    let mut best: Option<usize> = None;
    for i in 0..draw.g_si.len() {
        if draw.g_si[i] > delta && best.is_none_or(|b| draw.g_id[i] > draw.g_id[b]) {
            best = Some(i);
        }
    }
    match best {
        None => TrialEvents {
            outage: true,
            intercept: draw.g_se > delta,
        },
        Some(b) => TrialEvents {
            outage: draw.g_id[b] < delta,
            intercept: draw.g_se.max(draw.g_ie[b]) > delta,
        },
    }
}

/// Run configuration of a simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McOptions {
    pub trials: u64,
    pub seed: u64,
    /// Worker threads; 0 uses the machine's parallelism.
    pub workers: usize,
    pub confidence: f64,
}

impl McOptions {
    pub fn new(trials: u64, seed: u64) -> Self {
        McOptions {
            trials,
            seed,
            workers: 0,
            confidence: DEFAULT_CONFIDENCE,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::domain("trials must be at least 1"));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::domain(format!(
                "confidence level must lie in (0, 1), got {}",
                self.confidence
            )));
        }
        Ok(())
    }
}

/// Event-frequency estimate of a probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub events: u64,
    pub trials: u64,
    pub p_hat: f64,
    pub ci_half_width: f64,
    pub confidence: f64,
    pub seed: u64,
    /// Set when the normal-approximation interval collapses to zero width
    /// (no events, or every trial an event).
    pub degenerate_ci: bool,
}

impl McEstimate {
    pub fn new(events: u64, trials: u64, confidence: f64, seed: u64) -> Result<Self> {
        let ci_half_width = confidence_interval(events, trials, confidence)?;
        Ok(McEstimate {
            events,
            trials,
            p_hat: events as f64 / trials as f64,
            ci_half_width,
            confidence,
            seed,
            degenerate_ci: events == 0 || events == trials,
        })
    }

    /// Whether `value` lies within the confidence interval.
    pub fn contains(&self, value: f64) -> bool {
        (self.p_hat - value).abs() <= self.ci_half_width
    }
}

/// Two-sided standard-normal quantile for a confidence level.
pub fn z_for_confidence(level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::domain(format!(
            "confidence level must lie in (0, 1), got {level}"
        )));
    }
    let normal = Normal::standard();
    Ok(normal.inverse_cdf(0.5 + level / 2.0))
}

/// Normal-approximation half-width `z sqrt(p(1-p)/trials)`.
pub fn confidence_interval(events: u64, trials: u64, confidence_level: f64) -> Result<f64> {
    if trials == 0 {
        return Err(Error::domain("trials must be at least 1"));
    }
    if events > trials {
        return Err(Error::domain(format!(
            "events ({events}) exceed trials ({trials})"
        )));
    }
    let z = z_for_confidence(confidence_level)?;
    let p = events as f64 / trials as f64;
    Ok(z * (p * (1.0 - p) / trials as f64).sqrt())
}

/// Outage and intercept estimates from the same trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub outage: McEstimate,
    pub intercept: McEstimate,
}

fn run_trials<F>(profile: &ChannelProfile, opts: &McOptions, events: F) -> Result<SimulationResult>
where
    F: Fn(&ChannelDraw) -> TrialEvents + Sync,
{
    opts.validate()?;
    let per_trial = uniforms_per_trial(profile.n_relays());
    let chunks = opts.trials.div_ceil(CHUNK_TRIALS);
    let count = || {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let start = c * CHUNK_TRIALS;
                let end = (start + CHUNK_TRIALS).min(opts.trials);
                let mut stream = TrialStream::at_trial(opts.seed, start, per_trial);
                let mut draw = ChannelDraw::zeroed(profile.n_relays());
                let (mut out, mut int) = (0u64, 0u64);
                for _ in start..end {
                    draw_channel_into(profile, &mut stream, &mut draw);
                    let ev = events(&draw);
                    out += ev.outage as u64;
                    int += ev.intercept as u64;
                }
                (out, int)
            })
            .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1))
    };
    let (out, int) = if opts.workers == 0 {
        count()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(opts.workers)
            .build()
            .map_err(|e| Error::Numerical(format!("cannot start worker pool: {e}")))?
            .install(count)
    };
    Ok(SimulationResult {
        outage: McEstimate::new(out, opts.trials, opts.confidence, opts.seed)?,
        intercept: McEstimate::new(int, opts.trials, opts.confidence, opts.seed)?,
    })
}

/// Simulate direct transmission at threshold `alpha`.
pub fn simulate_dt_at(
    profile: &ChannelProfile,
    alpha: f64,
    opts: &McOptions,
) -> Result<SimulationResult> {
    run_trials(profile, opts, |d| dt_events(d, alpha))
}

/// Simulate relay selection at threshold `delta`.
pub fn simulate_ors_at(
    profile: &ChannelProfile,
    delta: f64,
    opts: &McOptions,
) -> Result<SimulationResult> {
    run_trials(profile, opts, |d| ors_events(d, delta))
}

pub fn simulate_dt(
    config: &SystemConfig,
    profile: &ChannelProfile,
    opts: &McOptions,
) -> Result<SimulationResult> {
    simulate_dt_at(profile, config.thresholds().alpha, opts)
}

pub fn simulate_ors(
    config: &SystemConfig,
    profile: &ChannelProfile,
    opts: &McOptions,
) -> Result<SimulationResult> {
    simulate_ors_at(profile, config.thresholds().delta, opts)
}

/// Both schemes on shared draws at the thresholds of one configuration.
pub fn simulate_both(
    thresholds: Thresholds,
    profile: &ChannelProfile,
    opts: &McOptions,
) -> Result<(SimulationResult, SimulationResult)> {
    Ok((
        simulate_dt_at(profile, thresholds.alpha, opts)?,
        simulate_ors_at(profile, thresholds.delta, opts)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::IidProfile;

    fn unit(n: usize) -> ChannelProfile {
        IidProfile::new(1.0, 1.0, n).unwrap().expand()
    }

    fn draw(sd: f64, se: f64, si: &[f64], id: &[f64], ie: &[f64]) -> ChannelDraw {
        ChannelDraw {
            g_sd: sd,
            g_se: se,
            g_si: si.to_vec(),
            g_id: id.to_vec(),
            g_ie: ie.to_vec(),
        }
    }

    #[test]
    fn stream_is_deterministic_and_addressable() {
        let mut a = TrialStream::at_trial(7, 0, 5);
        let seq: Vec<f64> = (0..50).map(|_| a.uniform()).collect();
        let mut b = TrialStream::at_trial(7, 3, 5);
        let tail: Vec<f64> = (0..35).map(|_| b.uniform()).collect();
        assert_eq!(&seq[15..], &tail[..]);
        assert!(seq.iter().all(|&u| u > 0.0 && u < 1.0));
        let mut c = TrialStream::at_trial(8, 0, 5);
        assert_ne!(seq[0], c.uniform());
    }

    #[test]
    fn sample_mean_matches_gain() {
        let p = ChannelProfile::new(2.5, 1.0, vec![], vec![], vec![]).unwrap();
        let mut s = TrialStream::at_trial(11, 0, 2);
        let n = 1_000_000;
        let mean = (0..n).map(|_| draw_channel(&p, &mut s).g_sd).sum::<f64>() / n as f64;
        assert!((mean - 2.5).abs() < 3.0 * 2.5 / (n as f64).sqrt());
    }

    #[test]
    fn equality_counts_as_neither_outage_nor_intercept() {
        let d = draw(0.5, 0.5, &[0.5, 0.9], &[0.2, 0.5], &[0.5, 0.5]);
        assert_eq!(
            dt_events(&d, 0.5),
            TrialEvents {
                outage: false,
                intercept: false
            }
        );
        // Relay 0 sits exactly at delta and does not decode; relay 1 decodes
        // and its destination gain equals delta, which is not an outage.
        let ev = ors_events(&d, 0.5);
        assert_eq!(
            ev,
            TrialEvents {
                outage: false,
                intercept: false
            }
        );
    }

    #[test]
    fn ties_pick_lowest_index() {
        let d = draw(1.0, 0.0, &[1.0, 1.0], &[0.7, 0.7], &[0.0, 2.0]);
        // Relay 0 wins the tie, so its low wiretap gain is used.
        assert!(!ors_events(&d, 0.5).intercept);
    }

    #[test]
    fn empty_decoding_set_is_outage() {
        let d = draw(9.0, 0.9, &[0.1, 0.2], &[5.0, 5.0], &[0.0, 0.0]);
        assert_eq!(
            ors_events(&d, 0.5),
            TrialEvents {
                outage: true,
                intercept: true
            }
        );
    }

    #[test]
    fn zero_rate_limits() {
        let cfg = SystemConfig::new(0.0, 4.0).unwrap();
        let opts = McOptions::new(20_000, 1);
        let dt = simulate_dt(&cfg, &unit(2), &opts).unwrap();
        assert_eq!(dt.outage.events, 0);
        let ors = simulate_ors(&cfg, &unit(2), &opts).unwrap();
        assert_eq!(ors.outage.events, 0);
        assert_eq!(ors.intercept.events, opts.trials);
        assert!(ors.intercept.degenerate_ci && ors.outage.degenerate_ci);
    }

    #[test]
    fn no_relays_always_outage() {
        let p = ChannelProfile::new(1.0, 1.0, vec![], vec![], vec![]).unwrap();
        let r = simulate_ors_at(&p, 0.3, &McOptions::new(10_000, 3)).unwrap();
        assert_eq!(r.outage.events, 10_000);
    }

    #[test]
    fn dt_matches_closed_forms() {
        let p = ChannelProfile::new(1.0, 1.0, vec![], vec![], vec![]).unwrap();
        let opts = McOptions::new(1_000_000, 5);
        let r = simulate_dt_at(&p, 1.0, &opts).unwrap();
        assert!(r.outage.contains(1.0 - (-1.0f64).exp()));
        let r = simulate_dt_at(&p, std::f64::consts::LN_2, &opts).unwrap();
        assert!(r.intercept.contains(0.5));
    }

    #[test]
    fn counts_independent_of_workers() {
        let p = ChannelProfile::new(
            1.0,
            0.3,
            vec![0.5, 2.0, 1.0],
            vec![1.0, 0.7, 3.0],
            vec![0.2, 0.1, 0.4],
        )
        .unwrap();
        let base = McOptions::new(100_003, 99);
        let a = simulate_ors_at(&p, 0.2, &base.with_workers(1)).unwrap();
        let b = simulate_ors_at(&p, 0.2, &base.with_workers(3)).unwrap();
        let c = simulate_ors_at(&p, 0.2, &base).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn confidence_interval_examples() {
        assert_eq!(confidence_interval(0, 1000, 0.999).unwrap(), 0.0);
        let w = confidence_interval(500_000, 1_000_000, 0.999).unwrap();
        assert!((w - 3.2905267314919255 * 0.0005).abs() < 1e-12, "{w}");
        let w1 = confidence_interval(2_500, 10_000, 0.999).unwrap();
        let w4 = confidence_interval(10_000, 40_000, 0.999).unwrap();
        assert!((w1 / w4 - 2.0).abs() < 1e-12);
        assert!(confidence_interval(5, 4, 0.99).is_err());
        assert!(confidence_interval(0, 0, 0.99).is_err());
        assert!((z_for_confidence(0.95).unwrap() - 1.959963984540054).abs() < 1e-9);
    }

    #[test]
    fn options_validation() {
        assert!(simulate_dt_at(&unit(1), 0.1, &McOptions::new(0, 1)).is_err());
        let mut o = McOptions::new(10, 1);
        o.confidence = 1.0;
        assert!(simulate_dt_at(&unit(1), 0.1, &o).is_err());
    }
}
