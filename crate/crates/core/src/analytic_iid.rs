//! Closed forms for identically distributed links: every main link has
//! average gain `sigma_m2`, every wiretap link `sigma_e2`.
//!
//! In this case the outage/intercept pair collapses onto a one-parameter curve
//! indexed by `theta = 1 - p_out^(1/n)`, which is also `exp(-2 delta / sigma_m2)`.

use serde::{Deserialize, Serialize};

use crate::error::{check_gain, check_open_probability, check_threshold, Error, Result};
use crate::numeric::{clamp_unit, one_minus_exp_neg, pow_one_minus, pow_unit};

/// Default bisection cap for [`solve_outage_given_intercept_finite`].
pub const MAX_BISECTION_STEPS: usize = 200;

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::domain("number of relays must be at least 1"))
    } else {
        Ok(())
    }
}

/// A point on the i.i.d. tradeoff curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IidSrtQuery {
    pub n_relays: usize,
    pub mer: f64,
    pub theta: f64,
}

impl IidSrtQuery {
    pub fn new(n_relays: usize, mer: f64, theta: f64) -> Result<Self> {
        check_n(n_relays)?;
        check_gain("mer", mer)?;
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::domain(format!(
                "theta must lie in [0, 1], got {theta}"
            )));
        }
        Ok(Self {
            n_relays,
            mer,
            theta,
        })
    }

    pub fn from_outage(p_out: f64, n_relays: usize, mer: f64) -> Result<Self> {
        check_open_probability("p_out", p_out)?;
        check_n(n_relays)?;
        Self::new(n_relays, mer, theta_from_outage(p_out, n_relays))
    }

    pub fn outage(&self) -> f64 {
        pow_one_minus(self.theta, self.n_relays as f64)
    }

    pub fn intercept_finite(&self) -> f64 {
        intercept_at_theta(self.theta, self.n_relays, self.mer)
    }

    pub fn intercept_asymptotic(&self) -> f64 {
        eavesdropper_given_relay(self.theta, self.mer)
    }
}

/// `1 - p_out^(1/n)`, via `expm1(ln(p_out) / n)` so large `n` keeps precision.
pub fn theta_from_outage(p_out: f64, n: usize) -> f64 {
    -(p_out.ln() / n as f64).exp_m1()
}

/// `2 t - t^2` with `t = theta^(mer/2)`: the eavesdropper's success probability
/// once a relay forwards.
fn eavesdropper_given_relay(theta: f64, mer: f64) -> f64 {
    let t = pow_unit(theta, mer / 2.0);
    clamp_unit(t * (2.0 - t))
}

fn intercept_at_theta(theta: f64, n: usize, mer: f64) -> f64 {
    let t = pow_unit(theta, mer / 2.0);
    let none_decode = pow_one_minus(theta.sqrt(), n as f64);
    clamp_unit(none_decode * t + (1.0 - none_decode) * t * (2.0 - t))
}

/// Outage probability `[1 - exp(-2 delta / sigma_m2)]^n`.
pub fn iid_outage(n: usize, sigma_m2: f64, delta: f64) -> Result<f64> {
    check_n(n)?;
    check_gain("sigma_m2", sigma_m2)?;
    check_threshold("delta", delta)?;
    Ok(pow_unit(
        one_minus_exp_neg(2.0 * delta / sigma_m2),
        n as f64,
    ))
}

/// Intercept probability of the i.i.d. network at threshold `delta`.
pub fn iid_intercept(n: usize, sigma_m2: f64, sigma_e2: f64, delta: f64) -> Result<f64> {
    check_n(n)?;
    check_gain("sigma_m2", sigma_m2)?;
    check_gain("sigma_e2", sigma_e2)?;
    check_threshold("delta", delta)?;
    let none_decode = pow_unit(one_minus_exp_neg(delta / sigma_m2), n as f64);
    let e = (-delta / sigma_e2).exp();
    Ok(clamp_unit(
        none_decode * e + (1.0 - none_decode) * e * (2.0 - e),
    ))
}

/// Intercept probability implied by an outage probability at finite `n`.
pub fn intercept_from_outage_finite(p_out: f64, n: usize, mer: f64) -> Result<f64> {
    Ok(IidSrtQuery::from_outage(p_out, n, mer)?.intercept_finite())
}

/// Large-`n` intercept law, dropping the empty-decoding-set term:
/// `2 theta^(mer/2) - theta^mer`.
pub fn intercept_asymptotic(p_out: f64, n: usize, mer: f64) -> Result<f64> {
    Ok(IidSrtQuery::from_outage(p_out, n, mer)?.intercept_asymptotic())
}

/// Inverse of [`intercept_asymptotic`]:
/// `[1 - (1 - sqrt(1 - p_int))^(2/mer)]^n`.
pub fn outage_from_intercept_asymptotic(p_int: f64, n: usize, mer: f64) -> Result<f64> {
    check_open_probability("p_int", p_int)?;
    check_n(n)?;
    check_gain("mer", mer)?;
    // 1 - sqrt(1 - p) written without cancellation.
    let t = p_int / (1.0 + (1.0 - p_int).sqrt());
    let theta = pow_unit(t, 2.0 / mer);
    Ok(pow_one_minus(theta, n as f64))
}

/// Solution of the finite-`n` inversion problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiniteSolution {
    pub p_out: f64,
    pub theta: f64,
    /// Intercept probability at the returned `theta`.
    pub p_int: f64,
    pub iterations: usize,
}

/// Find the outage probability whose finite-`n` intercept probability equals
/// `p_int_target`, by bisection on `theta` in `[0, 1]`.
///
/// `tol` bounds the final bracket width relative to `theta`.
pub fn solve_outage_given_intercept_finite(
    p_int_target: f64,
    n: usize,
    mer: f64,
    tol: f64,
) -> Result<FiniteSolution> {
    check_open_probability("p_int_target", p_int_target)?;
    check_n(n)?;
    check_gain("mer", mer)?;
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::domain(format!("tol must be positive, got {tol}")));
    }
    let f = |theta: f64| intercept_at_theta(theta, n, mer);

    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let (f_lo, f_hi) = (f(lo), f(hi));
    if !(f_lo <= p_int_target && p_int_target <= f_hi) {
        return Err(Error::Infeasible(format!(
            "intercept target {p_int_target} outside attainable range [{f_lo}, {f_hi}] \
             for n={n}, mer={mer}"
        )));
    }
    const PROBES: usize = 64;
    let mut prev = f_lo;
    for k in 1..=PROBES {
        let v = f(k as f64 / PROBES as f64);
        if v < prev {
            return Err(Error::Numerical(format!(
                "intercept is not monotone in theta near {} (n={n}, mer={mer})",
                k as f64 / PROBES as f64
            )));
        }
        prev = v;
    }

    let mut iterations = 0;
    while iterations < MAX_BISECTION_STEPS && hi - lo > tol * hi {
        let mid = 0.5 * (lo + hi);
        if f(mid) < p_int_target {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let theta = 0.5 * (lo + hi);
    Ok(FiniteSolution {
        p_out: pow_one_minus(theta, n as f64),
        theta,
        p_int: f(theta),
        iterations,
    })
}
