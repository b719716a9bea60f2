//! Adaptive Gauss-Kronrod quadrature used as an independent check of the
//! best-relay selection probabilities.

use crate::error::{Error, Result};
use crate::model::DecodingSet;

// 15-point Kronrod nodes on [-1, 1] (non-negative half, descending) and
// weights; the odd-indexed nodes are the 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_INTERVALS: usize = 100_000;

/// Kronrod estimate and |Kronrod - Gauss| on one interval.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for k in 0..7 {
        let dx = half * XGK[k];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[k] * pair;
        if k % 2 == 1 {
            gauss += WG[k / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Integrate `f` over `[a, b]` to absolute error `abs_tol`, bisecting the
/// interval with the largest error estimate until the total estimate meets
/// the target.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite() && a <= b) {
        return Err(Error::domain(format!(
            "invalid integration bounds [{a}, {b}]"
        )));
    }
    if abs_tol.is_nan() || abs_tol <= 0.0 {
        return Err(Error::domain("quadrature tolerance must be positive"));
    }
    // (lo, hi, value, error)
    let (v, e) = gk15(&f, a, b);
    let mut intervals = vec![(a, b, v, e)];
    loop {
        let total_err: f64 = intervals.iter().map(|iv| iv.3).sum();
        if total_err <= abs_tol {
            return Ok(intervals.iter().map(|iv| iv.2).sum());
        }
        if intervals.len() >= MAX_INTERVALS {
            return Err(Error::Numerical(format!(
                "quadrature did not converge: error estimate {total_err:e} after {} intervals",
                intervals.len()
            )));
        }
        let (worst, _) =
            intervals
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |acc, (k, iv)| {
                    if iv.3 > acc.1 {
                        (k, iv.3)
                    } else {
                        acc
                    }
                });
        let (lo, hi, _, _) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            return Err(Error::Numerical(format!(
                "quadrature interval [{lo}, {hi}] cannot be subdivided further"
            )));
        }
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
}

/// Absolute error target of [`quadrature_pr_best_is`].
pub const BEST_IS_ABS_TOL: f64 = 1e-10;

/// Truncation point, in units of the largest member gain.
pub const TRUNCATION_SCALE: f64 = 40.0;

/// Probability that relay `i` has the largest relay-to-destination gain in
/// `set`, from the integral of the competitors' joint CDF against relay `i`'s
/// density, truncated at `40 * max gain`.
pub fn quadrature_pr_best_is(set: DecodingSet, i: usize, sigma_id2: &[f64]) -> Result<f64> {
    if !set.fits(sigma_id2.len()) {
        return Err(Error::domain(
            "decoding set references relays beyond the profile",
        ));
    }
    if !set.contains(i) {
        return Err(Error::domain(format!(
            "relay {i} is not a member of the decoding set"
        )));
    }
    let own = sigma_id2[i];
    let competitors: Vec<f64> = set.without(i).iter().map(|j| sigma_id2[j]).collect();
    let x_max = TRUNCATION_SCALE * set.iter().map(|j| sigma_id2[j]).fold(0.0, f64::max);
    let integrand = |x: f64| {
        let cdf: f64 = competitors.iter().map(|&s| -(-x / s).exp_m1()).product();
        cdf * (-x / own).exp() / own
    };
    integrate(integrand, 0.0, x_max, BEST_IS_ABS_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_smooth_functions() {
        let v = integrate(|x| (-x).exp(), 0.0, 40.0, 1e-13).unwrap();
        assert!((v - (1.0 - (-40.0f64).exp())).abs() < 1e-13);
        let v = integrate(|x| x.sin(), 0.0, std::f64::consts::PI, 1e-13).unwrap();
        assert!((v - 2.0).abs() < 1e-13);
        // Polynomial of degree 20 is beyond a single rule; needs subdivision.
        let v = integrate(|x| x.powi(20), 0.0, 1.0, 1e-14).unwrap();
        assert!((v - 1.0 / 21.0).abs() < 1e-14);
    }

    #[test]
    fn gauss_kronrod_weights_are_normalised() {
        let k: f64 = WGK[7] + 2.0 * WGK[..7].iter().sum::<f64>();
        let g: f64 = WG[3] + 2.0 * WG[..3].iter().sum::<f64>();
        assert!((k - 2.0).abs() < 1e-15);
        assert!((g - 2.0).abs() < 1e-15);
    }

    #[test]
    fn best_is_examples() {
        let one = DecodingSet::from_indices([1]).unwrap();
        assert!((quadrature_pr_best_is(one, 1, &[9.0, 0.7]).unwrap() - 1.0).abs() < 1e-10);
        let pair = DecodingSet::full(2);
        assert!((quadrature_pr_best_is(pair, 0, &[1.3, 1.3]).unwrap() - 0.5).abs() < 1e-10);
        assert!((quadrature_pr_best_is(pair, 0, &[2.0, 1.0]).unwrap() - 2.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn rejects_non_member() {
        let s = DecodingSet::from_indices([0]).unwrap();
        assert!(matches!(
            quadrature_pr_best_is(s, 1, &[1.0, 1.0]),
            Err(Error::Domain(_))
        ));
        assert!(integrate(|x| x, 1.0, 0.0, 1e-9).is_err());
    }
}
