//! Log-domain accumulation of `sum c^l` style costs.

/// Streaming `ln(sum exp(x_i))` with a running maximum shift.
///
/// Terms equal to the running maximum contribute exactly `1.0` to the scaled
/// sum, so a run of `k` equal terms yields exactly `x + ln k`.
#[derive(Debug, Clone, Copy)]
pub struct LogSumExp {
    max: f64,
    scaled: f64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self::new()
    }
}

impl LogSumExp {
    pub fn new() -> Self {
        LogSumExp { max: f64::NEG_INFINITY, scaled: 0.0 }
    }

    pub fn push(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x <= self.max {
            self.scaled += (x - self.max).exp();
        } else {
            self.scaled = self.scaled * (self.max - x).exp() + 1.0;
            self.max = x;
        }
    }

    /// `ln` of the accumulated sum; `-inf` for the empty sum.
    pub fn value(&self) -> f64 {
        if self.scaled == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.max + self.scaled.ln()
        }
    }
}

impl FromIterator<f64> for LogSumExp {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = LogSumExp::new();
        for x in iter {
            acc.push(x);
        }
        acc
    }
}

/// `ln(sum_l c^l)` over the given budgets.
pub fn log_cost<I: IntoIterator<Item = u32>>(budgets: I, c: f64) -> f64 {
    let ln_c = c.ln();
    budgets.into_iter().map(|l| l as f64 * ln_c).collect::<LogSumExp>().value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_sum_is_negative_infinity() {
        assert_eq!(LogSumExp::new().value(), f64::NEG_INFINITY);
    }

    #[test]
    fn equal_terms_are_exact() {
        assert_eq!(log_cost([0, 0, 0], 2.0), 3f64.ln());
        assert_eq!(log_cost(vec![5; 1000], 1.0), 1000f64.ln());
    }

    #[test]
    fn matches_direct_sum() {
        assert!((log_cost([3, 1], 2.0) - 10f64.ln()).abs() < 1e-15);
        let budgets = [0u32, 7, 2, 9, 9, 1];
        let direct: f64 = budgets.iter().map(|&l| 1.7f64.powi(l as i32)).sum();
        assert!((log_cost(budgets, 1.7) - direct.ln()).abs() < 1e-12);
    }

    #[test]
    fn huge_exponents_do_not_overflow() {
        let v = log_cost([5000, 5000], 10.0);
        assert!((v - (5000.0 * 10f64.ln() + 2f64.ln())).abs() < 1e-9);
    }
}
