//! System parameters, channel-gain profiles and decoding thresholds.
//!
//! All gains are average squared magnitudes of Rayleigh-faded links, so every
//! instantaneous gain is exponentially distributed with the stated mean. SNR is
//! always stored linear; dB only appears at construction.

use serde::{Deserialize, Serialize};

use crate::error::{check_gain, Error, Result};

/// Convert a dB quantity to a linear power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Main-to-eavesdropper ratio from its dB value.
pub fn mer_from_db(db: f64) -> f64 {
    db_to_linear(db)
}

fn check_rate_snr(rate: f64, snr: f64) -> Result<()> {
    if !(rate.is_finite() && rate >= 0.0) {
        return Err(Error::domain(format!(
            "rate must be finite and non-negative, got {rate}"
        )));
    }
    if !(snr.is_finite() && snr > 0.0) {
        return Err(Error::domain(format!(
            "snr must be finite and positive, got {snr}"
        )));
    }
    Ok(())
}

/// Decoding threshold of a single-slot (direct) link: `(2^R - 1) / snr`.
pub fn alpha_threshold(rate: f64, snr: f64) -> Result<f64> {
    check_rate_snr(rate, snr)?;
    Ok(pow2_minus_one(rate) / snr)
}

/// Decoding threshold of a half-rate two-slot link: `(2^{2R} - 1) / snr`.
pub fn delta_threshold(rate: f64, snr: f64) -> Result<f64> {
    check_rate_snr(rate, snr)?;
    Ok(pow2_minus_one(2.0 * rate) / snr)
}

/// `2^r - 1`, precise for tiny `r`.
#[inline]
fn pow2_minus_one(r: f64) -> f64 {
    (r * std::f64::consts::LN_2).exp_m1()
}

/// Data rate and SNR of the transmission.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    rate: f64,
    snr: f64,
}

impl SystemConfig {
    pub fn new(rate: f64, snr: f64) -> Result<Self> {
        check_rate_snr(rate, snr)?;
        Ok(Self { rate, snr })
    }

    pub fn from_snr_db(rate: f64, snr_db: f64) -> Result<Self> {
        Self::new(rate, db_to_linear(snr_db))
    }

    /// Build from transmit power and noise power; `snr = power / noise`.
    pub fn from_power(rate: f64, power: f64, noise: f64) -> Result<Self> {
        if !(power.is_finite() && power > 0.0 && noise.is_finite() && noise > 0.0) {
            return Err(Error::domain(format!(
                "power and noise must be finite and positive, got P={power}, N0={noise}"
            )));
        }
        Self::new(rate, power / noise)
    }

    /// The configuration at `rate` whose two-slot threshold equals `delta`.
    pub fn from_rate_and_delta(rate: f64, delta: f64) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::domain(format!(
                "delta must be finite and positive to recover an SNR, got {delta}"
            )));
        }
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::domain(format!(
                "rate must be positive to recover an SNR from delta, got {rate}"
            )));
        }
        Self::new(rate, pow2_minus_one(2.0 * rate) / delta)
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn snr(&self) -> f64 {
        self.snr
    }

    pub fn snr_db(&self) -> f64 {
        linear_to_db(self.snr)
    }

    pub fn thresholds(&self) -> Thresholds {
        Thresholds {
            alpha: pow2_minus_one(self.rate) / self.snr,
            delta: pow2_minus_one(2.0 * self.rate) / self.snr,
        }
    }
}

/// SNR-normalised gain thresholds: a link decodes when its instantaneous gain
/// exceeds `alpha` (single slot) or `delta` (half-rate relaying).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub alpha: f64,
    pub delta: f64,
}

/// Average gains of every link in the network.
///
/// Relay `i` has source link `si[i]`, destination link `id[i]` and wiretap link
/// `ie[i]`. Zero relays is allowed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelProfile {
    sigma_sd2: f64,
    sigma_se2: f64,
    sigma_si2: Vec<f64>,
    sigma_id2: Vec<f64>,
    sigma_ie2: Vec<f64>,
}

impl ChannelProfile {
    pub fn new(
        sigma_sd2: f64,
        sigma_se2: f64,
        sigma_si2: Vec<f64>,
        sigma_id2: Vec<f64>,
        sigma_ie2: Vec<f64>,
    ) -> Result<Self> {
        check_gain("sigma_sd2", sigma_sd2)?;
        check_gain("sigma_se2", sigma_se2)?;
        let n = sigma_si2.len();
        if sigma_id2.len() != n || sigma_ie2.len() != n {
            return Err(Error::domain(format!(
                "per-relay gain lists must have equal length, got si={}, id={}, ie={}",
                n,
                sigma_id2.len(),
                sigma_ie2.len()
            )));
        }
        for (name, list) in [
            ("sigma_si2", &sigma_si2),
            ("sigma_id2", &sigma_id2),
            ("sigma_ie2", &sigma_ie2),
        ] {
            for (i, &g) in list.iter().enumerate() {
                check_gain(&format!("{name}[{i}]"), g)?;
            }
        }
        Ok(Self {
            sigma_sd2,
            sigma_se2,
            sigma_si2,
            sigma_id2,
            sigma_ie2,
        })
    }

    pub fn n_relays(&self) -> usize {
        self.sigma_si2.len()
    }

    pub fn sigma_sd2(&self) -> f64 {
        self.sigma_sd2
    }

    pub fn sigma_se2(&self) -> f64 {
        self.sigma_se2
    }

    pub fn sigma_si2(&self) -> &[f64] {
        &self.sigma_si2
    }

    pub fn sigma_id2(&self) -> &[f64] {
        &self.sigma_id2
    }

    pub fn sigma_ie2(&self) -> &[f64] {
        &self.sigma_ie2
    }
}

/// Network where every main link shares one average gain and every wiretap
/// link shares another.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IidProfile {
    sigma_m2: f64,
    sigma_e2: f64,
    n_relays: usize,
}

impl IidProfile {
    pub fn new(sigma_m2: f64, sigma_e2: f64, n_relays: usize) -> Result<Self> {
        check_gain("sigma_m2", sigma_m2)?;
        check_gain("sigma_e2", sigma_e2)?;
        if n_relays == 0 {
            return Err(Error::domain("i.i.d. profile needs at least one relay"));
        }
        Ok(Self {
            sigma_m2,
            sigma_e2,
            n_relays,
        })
    }

    /// Unit main-link gain and wiretap gain `1 / mer`.
    pub fn from_mer(mer: f64, n_relays: usize) -> Result<Self> {
        check_gain("mer", mer)?;
        Self::new(1.0, 1.0 / mer, n_relays)
    }

    pub fn sigma_m2(&self) -> f64 {
        self.sigma_m2
    }

    pub fn sigma_e2(&self) -> f64 {
        self.sigma_e2
    }

    pub fn n_relays(&self) -> usize {
        self.n_relays
    }

    pub fn mer(&self) -> f64 {
        self.sigma_m2 / self.sigma_e2
    }

    pub fn expand(&self) -> ChannelProfile {
        let n = self.n_relays;
        ChannelProfile {
            sigma_sd2: self.sigma_m2,
            sigma_se2: self.sigma_e2,
            sigma_si2: vec![self.sigma_m2; n],
            sigma_id2: vec![self.sigma_m2; n],
            sigma_ie2: vec![self.sigma_e2; n],
        }
    }
}

/// Set of relay indices (zero-based) that decoded the source message, stored
/// as a bitmask. Bit `i` set means relay `i` decoded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct DecodingSet(u64);

impl DecodingSet {
    pub const MAX_RELAYS: usize = 64;

    pub const fn empty() -> Self {
        DecodingSet(0)
    }

    pub const fn from_mask(mask: u64) -> Self {
        DecodingSet(mask)
    }

    /// All relays `0..n`.
    pub fn full(n: usize) -> Self {
        assert!(
            n <= Self::MAX_RELAYS,
            "at most 64 relays fit in a decoding set"
        );
        if n == 64 {
            DecodingSet(u64::MAX)
        } else {
            DecodingSet((1u64 << n) - 1)
        }
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Result<Self> {
        let mut mask = 0u64;
        for i in indices {
            if i >= Self::MAX_RELAYS {
                return Err(Error::domain(format!("relay index {i} out of range")));
            }
            mask |= 1 << i;
        }
        Ok(DecodingSet(mask))
    }

    pub fn mask(self) -> u64 {
        self.0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, i: usize) -> bool {
        i < Self::MAX_RELAYS && self.0 & (1 << i) != 0
    }

    pub fn insert(&mut self, i: usize) {
        self.0 |= 1 << i;
    }

    pub fn without(self, i: usize) -> Self {
        DecodingSet(self.0 & !(1u64 << i))
    }

    /// Relays in `0..n` that are not members.
    pub fn complement(self, n: usize) -> Self {
        DecodingSet(!self.0 & Self::full(n).0)
    }

    /// Whether every member is a valid index for `n` relays.
    pub fn fits(self, n: usize) -> bool {
        self.0 & !Self::full(n).0 == 0
    }

    /// Members in increasing order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let i = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(i)
            }
        })
    }

    /// Non-empty subsets of this set in increasing mask order.
    pub fn nonempty_subsets(self) -> impl Iterator<Item = DecodingSet> {
        // Enumerates submasks of `self` in increasing order.
        let full = self.0;
        let mut sub = 0u64;
        let mut done = full == 0;
        std::iter::from_fn(move || {
            if done {
                return None;
            }
            sub = (sub.wrapping_sub(full)) & full;
            if sub == full {
                done = true;
            }
            Some(DecodingSet(sub))
        })
    }
}
