//! Exact outage and intercept probabilities of opportunistic decode-and-forward
//! relay selection with arbitrary per-link average gains.
//!
//! Both probabilities are sums over every possible decoding set. A relay joins
//! the decoding set when its source link gain exceeds `delta`; the relay with
//! the strongest relay-to-destination gain in that set forwards. The
//! destination hears only the relay, while the eavesdropper keeps the better
//! of the source copy and the relay copy.
//!
//! Relay indices are zero-based throughout.

use serde::{Deserialize, Serialize};

use crate::error::{check_threshold, Error, Result};
use crate::model::{ChannelProfile, DecodingSet};
use crate::numeric::{clamp_unit, one_minus_exp_neg, CompensatedSum};

/// Largest relay count accepted by the exact subset enumeration.
pub const ENUMERATION_CAP: usize = 20;

/// Above this many relays, [`ors_intercept`] evaluates the same sum with the
/// set and competitor enumerations interchanged, which is `O(N 2^N)` instead
/// of `O(N 3^N)`.
pub const DIRECT_INTERCEPT_LIMIT: usize = 12;

/// One decoding set's contribution to the total-probability sums.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubsetTerm {
    #[serde(with = "mask_serde")]
    pub set: DecodingSet,
    pub weight: f64,
    pub conditional_outage: f64,
    pub conditional_intercept: f64,
}

mod mask_serde {
    use crate::model::DecodingSet;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(set: &DecodingSet, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(set.mask())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DecodingSet, D::Error> {
        Ok(DecodingSet::from_mask(u64::deserialize(d)?))
    }
}

fn check_enumerable(n: usize) -> Result<()> {
    if n > ENUMERATION_CAP {
        Err(Error::Capacity {
            n,
            cap: ENUMERATION_CAP,
        })
    } else {
        Ok(())
    }
}

fn check_set(set: DecodingSet, n: usize) -> Result<()> {
    if set.fits(n) {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "decoding set {:#b} references relays beyond index {}",
            set.mask(),
            n.saturating_sub(1)
        )))
    }
}

fn check_nonempty(set: DecodingSet) -> Result<()> {
    if set.is_empty() {
        Err(Error::domain("decoding set must be non-empty"))
    } else {
        Ok(())
    }
}

/// Probability that no relay decodes the source message.
///
/// With zero relays the decoding set is empty with certainty.
pub fn pr_decoding_set_empty(sigma_si2: &[f64], delta: f64) -> Result<f64> {
    check_threshold("delta", delta)?;
    Ok(sigma_si2
        .iter()
        .map(|&s| one_minus_exp_neg(delta / s))
        .product())
}

/// Probability that exactly the relays in `set` decode.
pub fn pr_decoding_set(set: DecodingSet, sigma_si2: &[f64], delta: f64) -> Result<f64> {
    check_threshold("delta", delta)?;
    check_set(set, sigma_si2.len())?;
    Ok(sigma_si2
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            if set.contains(i) {
                (-delta / s).exp()
            } else {
                one_minus_exp_neg(delta / s)
            }
        })
        .product())
}

/// Probability that the best relay of `set` cannot reach the destination,
/// i.e. every member's relay-to-destination gain is below `delta`.
pub fn pr_best_outage(set: DecodingSet, sigma_id2: &[f64], delta: f64) -> Result<f64> {
    check_threshold("delta", delta)?;
    check_set(set, sigma_id2.len())?;
    check_nonempty(set)?;
    Ok(set
        .iter()
        .map(|i| one_minus_exp_neg(delta / sigma_id2[i]))
        .product())
}

/// Probability that relay `i` has the strongest relay-to-destination gain
/// among the members of `set`.
///
/// Inclusion-exclusion over the competitors `A ⊆ set \ {i}`:
/// `1 + Σ_{A≠∅} (-1)^{|A|} / (1 + Σ_{j∈A} σ²_id / σ²_jd)`.
pub fn pr_best_is(set: DecodingSet, i: usize, sigma_id2: &[f64]) -> Result<f64> {
    check_set(set, sigma_id2.len())?;
    if !set.contains(i) {
        return Err(Error::domain(format!(
            "relay {i} is not a member of the decoding set"
        )));
    }
    let competitors = set.without(i);
    let ratios: Vec<(usize, f64)> = competitors
        .iter()
        .map(|j| (j, sigma_id2[i] / sigma_id2[j]))
        .collect();
    let mut acc = CompensatedSum::new();
    acc.add(1.0);
    for subset in competitors.nonempty_subsets() {
        let denom = 1.0
            + ratios
                .iter()
                .filter(|(j, _)| subset.contains(*j))
                .map(|(_, r)| r)
                .sum::<f64>();
        let sign = if subset.len() % 2 == 0 { 1.0 } else { -1.0 };
        acc.add(sign / denom);
    }
    Ok(clamp_unit(acc.total()))
}

/// Probability that the selected relay's wiretap gain is below `delta`.
pub fn pr_best_eav_below(
    set: DecodingSet,
    sigma_id2: &[f64],
    sigma_ie2: &[f64],
    delta: f64,
) -> Result<f64> {
    check_threshold("delta", delta)?;
    check_nonempty(set)?;
    check_set(set, sigma_ie2.len())?;
    let mut acc = CompensatedSum::new();
    for i in set.iter() {
        acc.add(pr_best_is(set, i, sigma_id2)? * one_minus_exp_neg(delta / sigma_ie2[i]));
    }
    Ok(clamp_unit(acc.total()))
}

/// Probability that the eavesdropper decodes given decoding set `set`, from
/// the complement of both copies failing.
pub fn pr_eav_intercept_given_set(
    set: DecodingSet,
    sigma_se2: f64,
    sigma_id2: &[f64],
    sigma_ie2: &[f64],
    delta: f64,
) -> Result<f64> {
    let below = pr_best_eav_below(set, sigma_id2, sigma_ie2, delta)?;
    Ok(clamp_unit(
        1.0 - one_minus_exp_neg(delta / sigma_se2) * below,
    ))
}

/// Same quantity as [`pr_eav_intercept_given_set`], evaluated as the expanded
/// per-relay sum `Σ_i Pr(best = i) [e_ie + e_se - e_ie e_se]` with
/// `e_x = exp(-delta / σ²_x)`.
pub fn pr_eav_intercept_given_set_expanded(
    set: DecodingSet,
    sigma_se2: f64,
    sigma_id2: &[f64],
    sigma_ie2: &[f64],
    delta: f64,
) -> Result<f64> {
    check_threshold("delta", delta)?;
    check_nonempty(set)?;
    check_set(set, sigma_ie2.len())?;
    let e_se = (-delta / sigma_se2).exp();
    let mut acc = CompensatedSum::new();
    for i in set.iter() {
        let e_ie = (-delta / sigma_ie2[i]).exp();
        acc.add(pr_best_is(set, i, sigma_id2)? * (e_ie + e_se - e_ie * e_se));
    }
    Ok(clamp_unit(acc.total()))
}

/// [`pr_eav_intercept_given_set`] rearranged as `e_se + (1 - e_se) Σ_i Pr(best = i) e_ie`,
/// which keeps full relative precision when the result is tiny.
fn intercept_given_set(
    set: DecodingSet,
    e_se: f64,
    sigma_id2: &[f64],
    sigma_ie2: &[f64],
    delta: f64,
) -> Result<f64> {
    let mut above = CompensatedSum::new();
    for i in set.iter() {
        above.add(pr_best_is(set, i, sigma_id2)? * (-delta / sigma_ie2[i]).exp());
    }
    Ok(clamp_unit(e_se + (1.0 - e_se) * above.total()))
}

/// Every decoding set (empty set first, then increasing mask) with its
/// probability and conditional outage/intercept probabilities.
pub fn subset_terms(profile: &ChannelProfile, delta: f64) -> Result<Vec<SubsetTerm>> {
    check_threshold("delta", delta)?;
    let n = profile.n_relays();
    check_enumerable(n)?;
    let e_se = (-delta / profile.sigma_se2()).exp();
    let mut terms = Vec::with_capacity(1 << n);
    terms.push(SubsetTerm {
        set: DecodingSet::empty(),
        weight: pr_decoding_set_empty(profile.sigma_si2(), delta)?,
        conditional_outage: 1.0,
        conditional_intercept: e_se,
    });
    for set in DecodingSet::full(n).nonempty_subsets() {
        terms.push(SubsetTerm {
            set,
            weight: pr_decoding_set(set, profile.sigma_si2(), delta)?,
            conditional_outage: pr_best_outage(set, profile.sigma_id2(), delta)?,
            conditional_intercept: intercept_given_set(
                set,
                e_se,
                profile.sigma_id2(),
                profile.sigma_ie2(),
                delta,
            )?,
        });
    }
    Ok(terms)
}

/// Outage probability at the destination, summed over all decoding sets.
///
/// With zero relays the destination never receives the message.
pub fn ors_outage(profile: &ChannelProfile, delta: f64) -> Result<f64> {
    check_threshold("delta", delta)?;
    let n = profile.n_relays();
    check_enumerable(n)?;
    let mut acc = CompensatedSum::new();
    acc.add(pr_decoding_set_empty(profile.sigma_si2(), delta)?);
    for set in DecodingSet::full(n).nonempty_subsets() {
        acc.add(
            pr_decoding_set(set, profile.sigma_si2(), delta)?
                * pr_best_outage(set, profile.sigma_id2(), delta)?,
        );
    }
    Ok(clamp_unit(acc.total()))
}

/// Intercept probability at the eavesdropper, summed over all decoding sets.
pub fn ors_intercept(profile: &ChannelProfile, delta: f64) -> Result<f64> {
    check_threshold("delta", delta)?;
    let n = profile.n_relays();
    check_enumerable(n)?;
    if n > DIRECT_INTERCEPT_LIMIT {
        return ors_intercept_interchanged(profile, delta);
    }
    ors_intercept_direct(profile, delta)
}

/// Set-by-set evaluation of the intercept sum; cost `O(N 3^N)`.
pub fn ors_intercept_direct(profile: &ChannelProfile, delta: f64) -> Result<f64> {
    check_threshold("delta", delta)?;
    let n = profile.n_relays();
    check_enumerable(n)?;
    let e_se = (-delta / profile.sigma_se2()).exp();
    let mut acc = CompensatedSum::new();
    acc.add(pr_decoding_set_empty(profile.sigma_si2(), delta)? * e_se);
    for set in DecodingSet::full(n).nonempty_subsets() {
        acc.add(
            pr_decoding_set(set, profile.sigma_si2(), delta)?
                * intercept_given_set(set, e_se, profile.sigma_id2(), profile.sigma_ie2(), delta)?,
        );
    }
    Ok(clamp_unit(acc.total()))
}

/// The intercept sum with the order of summation exchanged.
///
/// For relay `i` and competitor set `A`, the decoding sets containing
/// `A ∪ {i}` have total probability `∏_{j∈A∪{i}} s_j` with
/// `s_j = exp(-delta/σ²_sj)`, so
/// `Σ_D Pr(D) Pr_D(best = i) = s_i Σ_{A∌i} (-1)^{|A|} ∏_{j∈A} s_j / (1 + Σ_{j∈A} σ²_id/σ²_jd)`.
pub fn ors_intercept_interchanged(profile: &ChannelProfile, delta: f64) -> Result<f64> {
    check_threshold("delta", delta)?;
    let n = profile.n_relays();
    check_enumerable(n)?;
    let e_se = (-delta / profile.sigma_se2()).exp();
    if n == 0 {
        return Ok(e_se);
    }
    let decode: Vec<f64> = profile
        .sigma_si2()
        .iter()
        .map(|&s| (-delta / s).exp())
        .collect();
    let rate: Vec<f64> = profile.sigma_id2().iter().map(|&s| 1.0 / s).collect();

    // Per-mask running sums over the N-1 competitors of relay i.
    let m = n - 1;
    let mut rate_sum = vec![0.0f64; 1 << m];
    let mut decode_prod = vec![1.0f64; 1 << m];
    let mut best_above = CompensatedSum::new();
    for i in 0..n {
        let others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        let mut t = CompensatedSum::new();
        t.add(1.0);
        for mask in 1usize..(1 << m) {
            let low = mask.trailing_zeros() as usize;
            let prev = mask & (mask - 1);
            let j = others[low];
            rate_sum[mask] = rate_sum[prev] + rate[j];
            decode_prod[mask] = decode_prod[prev] * decode[j];
            let sign = if mask.count_ones() % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            t.add(sign * decode_prod[mask] * rate[i] / (rate[i] + rate_sum[mask]));
        }
        let e_ie = (-delta / profile.sigma_ie2()[i]).exp();
        best_above.add(e_ie * decode[i] * t.total());
    }
    Ok(clamp_unit(e_se + (1.0 - e_se) * best_above.total()))
}

/// Outage and intercept probability pair.
pub fn ors_srt(profile: &ChannelProfile, delta: f64) -> Result<(f64, f64)> {
    Ok((ors_outage(profile, delta)?, ors_intercept(profile, delta)?))
}
