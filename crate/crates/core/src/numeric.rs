//! Small floating-point helpers shared by the analytic engines.

/// `1 - exp(-x)` without cancellation for small `x`.
#[inline]
pub fn one_minus_exp_neg(x: f64) -> f64 {
    -(-x).exp_m1()
}

/// `base^exponent` for `base` in `[0, 1]`, evaluated in the log domain when
/// the base is tiny so that huge exponents and subnormal bases behave.
pub fn pow_unit(base: f64, exponent: f64) -> f64 {
    if exponent == 0.0 {
        return 1.0;
    }
    if base <= 0.0 {
        return 0.0;
    }
    if base < 1e-280 {
        (exponent * base.ln()).exp()
    } else {
        base.powf(exponent)
    }
}

/// `(1 - x)^n` for `x` in `[0, 1]`, accurate for small `x` and large `n`.
pub fn pow_one_minus(x: f64, n: f64) -> f64 {
    if x >= 1.0 {
        return if n == 0.0 { 1.0 } else { 0.0 };
    }
    (n * (-x).ln_1p()).exp()
}

/// Neumaier-compensated accumulator.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl Extend<f64> for CompensatedSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for v in iter {
            self.add(v);
        }
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        acc.extend(iter);
        acc
    }
}

/// Clamp a value that is a probability up to rounding.
#[inline]
pub fn clamp_unit(p: f64) -> f64 {
    p.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_minus_exp_is_accurate_for_tiny_arguments() {
        for &x in &[1e-300, 1e-200, 1e-20, 1e-9, 1e-3] {
            let got = one_minus_exp_neg(x);
            // 1 - e^{-x} = x - x^2/2 + x^3/6 - x^4/24 + x^5/120 - ...
            let series = x * (1.0 - x / 2.0 * (1.0 - x / 3.0 * (1.0 - x / 4.0 * (1.0 - x / 5.0))));
            assert!(
                ((got - series) / series).abs() < 1e-12,
                "x={x}: {got} vs {series}"
            );
        }
        assert_eq!(one_minus_exp_neg(0.0), 0.0);
        assert_eq!(one_minus_exp_neg(f64::INFINITY), 1.0);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut acc = CompensatedSum::new();
        acc.add(1.0);
        for _ in 0..1_000_000 {
            acc.add(1e-16);
        }
        assert!((acc.total() - (1.0 + 1e-10)).abs() < 1e-15);
    }

    #[test]
    fn pow_unit_handles_tiny_bases() {
        assert_eq!(pow_unit(0.0, 2.0), 0.0);
        assert_eq!(pow_unit(0.3, 0.0), 1.0);
        let b = 1e-300;
        let got = pow_unit(b, 0.5);
        assert!((got / 1e-150 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pow_one_minus_large_n() {
        let got = pow_one_minus(1e-6, 1e6);
        assert!((got - (-1.0f64 - 5e-7).exp()).abs() < 1e-9);
    }
}
