//! Closed forms against a from-scratch simulation that works with capacities
//! rather than gain thresholds and uses an unrelated generator.

use rand::rngs::StdRng;
use rand::SeedableRng;
use rand_distr::{Distribution, Exp};

use srt_core::analytic_dt::dt_srt;
use srt_core::analytic_ors::ors_srt;
use srt_core::model::{ChannelProfile, SystemConfig};

const TRIALS: u32 = 400_000;

fn gain(rng: &mut StdRng, mean: f64) -> f64 {
    Exp::new(1.0 / mean).unwrap().sample(rng)
}

fn half_rate_capacity(snr: f64, g: f64) -> f64 {
    0.5 * (1.0 + snr * g).log2()
}

fn capacity(snr: f64, g: f64) -> f64 {
    (1.0 + snr * g).log2()
}

/// 4.4 standard errors: loose enough that a handful of seeded runs never trip.
fn assert_close(name: &str, hits: u32, exact: f64) {
    let p = hits as f64 / TRIALS as f64;
    let se = (exact * (1.0 - exact) / TRIALS as f64)
        .sqrt()
        .max(1.0 / TRIALS as f64);
    assert!(
        (p - exact).abs() <= 4.4 * se,
        "{name}: simulated {p}, exact {exact}"
    );
}

fn simulate(p: &ChannelProfile, cfg: &SystemConfig, seed: u64) -> [u32; 4] {
    let (r, snr) = (cfg.rate(), cfg.snr());
    let n = p.n_relays();
    let mut rng = StdRng::seed_from_u64(seed);
    let mut counts = [0u32; 4];
    for _ in 0..TRIALS {
        let sd = gain(&mut rng, p.sigma_sd2());
        let se = gain(&mut rng, p.sigma_se2());
        if capacity(snr, sd) < r {
            counts[0] += 1;
        }
        if capacity(snr, se) > r {
            counts[1] += 1;
        }

        let mut best: Option<(f64, usize)> = None;
        let mut ie = Vec::with_capacity(n);
        for i in 0..n {
            let si = gain(&mut rng, p.sigma_si2()[i]);
            let id = gain(&mut rng, p.sigma_id2()[i]);
            ie.push(gain(&mut rng, p.sigma_ie2()[i]));
            if half_rate_capacity(snr, si) > r && best.is_none_or(|(b, _)| id > b) {
                best = Some((id, i));
            }
        }
        // Source slot plus the selected relay's slot, selection-combined at the eavesdropper.
        let eav_source = half_rate_capacity(snr, se);
        match best {
            None => {
                counts[2] += 1;
                if eav_source > r {
                    counts[3] += 1;
                }
            }
            Some((id, i)) => {
                if half_rate_capacity(snr, id) < r {
                    counts[2] += 1;
                }
                if eav_source.max(half_rate_capacity(snr, ie[i])) > r {
                    counts[3] += 1;
                }
            }
        }
    }
    counts
}

fn check(p: &ChannelProfile, cfg: &SystemConfig, seed: u64) {
    let t = cfg.thresholds();
    let dt = dt_srt(p.sigma_sd2(), p.sigma_se2(), t.alpha).unwrap();
    let (ors_out, ors_int) = ors_srt(p, t.delta).unwrap();
    let c = simulate(p, cfg, seed);
    assert_close("dt outage", c[0], dt.p_out);
    assert_close("dt intercept", c[1], dt.p_int);
    assert_close("ors outage", c[2], ors_out);
    assert_close("ors intercept", c[3], ors_int);
}

#[test]
fn heterogeneous_three_relays() {
    let p = ChannelProfile::new(
        1.0,
        0.3,
        vec![0.8, 2.0, 1.3],
        vec![1.5, 0.6, 1.0],
        vec![0.2, 0.05, 0.4],
    )
    .unwrap();
    check(&p, &SystemConfig::from_snr_db(1.0, 10.0).unwrap(), 7);
}

#[test]
fn weak_source_links_at_higher_rate() {
    let p = ChannelProfile::new(2.0, 0.5, vec![0.3, 0.4], vec![3.0, 3.0], vec![0.1, 0.3]).unwrap();
    check(&p, &SystemConfig::from_snr_db(1.5, 15.0).unwrap(), 11);
}

#[test]
fn no_relays() {
    let p = ChannelProfile::new(1.0, 0.5, vec![], vec![], vec![]).unwrap();
    check(&p, &SystemConfig::from_snr_db(0.5, 5.0).unwrap(), 13);
}
