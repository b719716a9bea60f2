//! Direct source-to-destination transmission overheard by one eavesdropper.

use serde::{Deserialize, Serialize};

use crate::error::{check_gain, check_probability, check_threshold, Result};
use crate::numeric::{clamp_unit, one_minus_exp_neg};

/// Intercept and outage probability of direct transmission at one threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DtSrtResult {
    pub p_int: f64,
    pub p_out: f64,
}

/// Probability that the wiretap gain exceeds `alpha`.
pub fn dt_intercept(sigma_se2: f64, alpha: f64) -> Result<f64> {
    check_gain("sigma_se2", sigma_se2)?;
    check_threshold("alpha", alpha)?;
    Ok((-alpha / sigma_se2).exp())
}

/// Probability that the main-link gain falls below `alpha`.
pub fn dt_outage(sigma_sd2: f64, alpha: f64) -> Result<f64> {
    check_gain("sigma_sd2", sigma_sd2)?;
    check_threshold("alpha", alpha)?;
    Ok(one_minus_exp_neg(alpha / sigma_sd2))
}

/// Outage probability implied by an intercept probability:
/// `1 - p_int^(sigma_se2 / sigma_sd2)`. The SNR and rate cancel out.
pub fn dt_outage_from_intercept(p_int: f64, sigma_se2: f64, sigma_sd2: f64) -> Result<f64> {
    check_probability("p_int", p_int)?;
    check_gain("sigma_se2", sigma_se2)?;
    check_gain("sigma_sd2", sigma_sd2)?;
    if p_int == 0.0 {
        return Ok(1.0);
    }
    // 1 - exp(k ln p) keeps precision when p_int is close to 1.
    let k = sigma_se2 / sigma_sd2;
    Ok(clamp_unit(-(k * p_int.ln()).exp_m1()))
}

/// Inverse of [`dt_outage_from_intercept`]: `(1 - p_out)^(sigma_sd2 / sigma_se2)`.
pub fn dt_intercept_from_outage(p_out: f64, sigma_se2: f64, sigma_sd2: f64) -> Result<f64> {
    check_probability("p_out", p_out)?;
    check_gain("sigma_se2", sigma_se2)?;
    check_gain("sigma_sd2", sigma_sd2)?;
    if p_out == 1.0 {
        return Ok(0.0);
    }
    let k = sigma_sd2 / sigma_se2;
    Ok(clamp_unit((k * (-p_out).ln_1p()).exp()))
}

pub fn dt_srt(sigma_sd2: f64, sigma_se2: f64, alpha: f64) -> Result<DtSrtResult> {
    Ok(DtSrtResult {
        p_int: dt_intercept(sigma_se2, alpha)?,
        p_out: dt_outage(sigma_sd2, alpha)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use proptest::prelude::*;

    #[test]
    fn intercept_examples() {
        assert_eq!(dt_intercept(1.0, 0.0).unwrap(), 1.0);
        assert!((dt_intercept(1.0, std::f64::consts::LN_2).unwrap() - 0.5).abs() < 1e-15);
        // exp(-1/2)
        assert!((dt_intercept(2.0, 1.0).unwrap() - 0.6065306597126334).abs() < 1e-15);
    }

    #[test]
    fn outage_examples() {
        assert_eq!(dt_outage(1.0, 0.0).unwrap(), 0.0);
        assert!((dt_outage(1.0, 1.0).unwrap() - 0.6321205588285577).abs() < 1e-15);
        let tiny = dt_outage(1e9, 1.0).unwrap();
        assert!(((tiny - 1e-9) / 1e-9).abs() < 1e-8, "{tiny}");
    }

    #[test]
    fn outage_is_cancellation_safe() {
        let x = 1e-300;
        let got = dt_outage(1.0, x).unwrap();
        assert!(((got - x) / x).abs() < 1e-12);
    }

    #[test]
    fn tradeoff_examples() {
        assert!((dt_outage_from_intercept(0.1, 1.0, 1.0).unwrap() - 0.9).abs() < 1e-15);
        assert_eq!(dt_outage_from_intercept(1.0, 3.0, 0.2).unwrap(), 0.0);
        assert_eq!(dt_outage_from_intercept(0.0, 3.0, 0.2).unwrap(), 1.0);
        // 1 - 0.1^{0.1}
        let got = dt_outage_from_intercept(0.1, 1.0, 10.0).unwrap();
        assert!((got - 0.2056717652757185).abs() < 1e-15);
    }

    #[test]
    fn tradeoff_example_matches_shared_threshold_composition() {
        // Pick alpha so that the intercept probability is 0.1 with sigma_se2 = 1.
        let alpha = -(0.1f64).ln();
        let p_int = dt_intercept(1.0, alpha).unwrap();
        let p_out = dt_outage(10.0, alpha).unwrap();
        assert!((p_int - 0.1).abs() < 1e-15);
        assert!((p_out - 0.2056717652757185).abs() < 1e-14);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(dt_intercept(0.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(dt_outage(-1.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(dt_outage(1.0, -1.0), Err(Error::Domain(_))));
        assert!(matches!(
            dt_outage_from_intercept(1.5, 1.0, 1.0),
            Err(Error::Domain(_))
        ));
        assert!(dt_outage_from_intercept(-0.1, 1.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_identity(sd in 1e-3f64..1e3, se in 1e-3f64..1e3, alpha in 1e-6f64..50.0) {
            // Below this the intercept rounds to within a few ulps of one and
            // its logarithm no longer carries 12 digits.
            prop_assume!(alpha / se >= 1e-3);
            let direct = dt_outage(sd, alpha).unwrap();
            let via = dt_outage_from_intercept(dt_intercept(se, alpha).unwrap(), se, sd).unwrap();
            if direct > 1e-300 {
                prop_assert!(((direct - via) / direct).abs() <= 1e-12, "{} vs {}", direct, via);
            }
        }

        #[test]
        fn tradeoff_strictly_decreasing(se in 1e-2f64..1e2, sd in 1e-2f64..1e2, a in 0.01f64..0.98, gap in 0.001f64..0.02) {
            let lo = dt_outage_from_intercept(a, se, sd).unwrap();
            let hi = dt_outage_from_intercept(a + gap, se, sd).unwrap();
            prop_assert!(hi <= lo);
            if lo < 1.0 - 1e-9 {
                prop_assert!(hi < lo);
            }
        }

        #[test]
        fn curve_depends_only_on_gain_ratio(ratio in 0.01f64..100.0, scale in 0.01f64..100.0, alpha in 0.0f64..10.0) {
            let a = dt_srt(1.0, ratio, alpha).unwrap();
            // Same ratio, scaled gains: the threshold that reproduces a.p_int is alpha * scale.
            let b = dt_srt(scale, ratio * scale, alpha * scale).unwrap();
            prop_assert!((a.p_int - b.p_int).abs() < 1e-12);
            prop_assert!((a.p_out - b.p_out).abs() < 1e-12);
        }

        #[test]
        fn inverse_round_trip(p in 0.001f64..0.999, se in 0.1f64..10.0, sd in 0.1f64..10.0) {
            let out = dt_outage_from_intercept(p, se, sd).unwrap();
            prop_assume!(out < 0.999);
            let back = dt_intercept_from_outage(out, se, sd).unwrap();
            prop_assert!((back - p).abs() < 1e-12);
        }
    }
}
