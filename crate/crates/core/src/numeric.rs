//! Log-domain accumulation helpers.

/// Stabilized `log(sum(exp(a_i)))`.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let mut acc = LogSumAcc::new();
    for &v in values {
        acc.add(v);
    }
    acc.value()
}

/// Online log-sum-exp accumulator: keeps a running maximum and a sum of
/// exponentials rescaled to it, so terms spanning hundreds of nats never
/// overflow.
#[derive(Clone, Copy, Debug)]
pub struct LogSumAcc {
    max: f64,
    scaled_sum: f64,
}

impl LogSumAcc {
    pub fn new() -> Self {
        LogSumAcc {
            max: f64::NEG_INFINITY,
            scaled_sum: 0.0,
        }
    }

    pub fn add(&mut self, log_term: f64) {
        if log_term == f64::NEG_INFINITY {
            return;
        }
        if log_term > self.max {
            if self.max != f64::NEG_INFINITY {
                self.scaled_sum *= (self.max - log_term).exp();
            }
            self.scaled_sum += 1.0;
            self.max = log_term;
        } else {
            self.scaled_sum += (log_term - self.max).exp();
        }
    }

    /// log of the accumulated sum; -inf when nothing (finite) was added.
    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.scaled_sum.ln()
        }
    }
}

impl Default for LogSumAcc {
    fn default() -> Self {
        Self::new()
    }
}

/// `x log x` with the 0 log 0 = 0 convention.
pub fn xlogx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// Shannon entropy (natural log) of a non-negative weight vector that is
/// assumed to sum to one.
pub fn entropy_nats(p: &[f64]) -> f64 {
    -p.iter().map(|&x| xlogx(x)).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_naive_on_small_inputs() {
        let a = [0.5f64, 2.0, -1.0];
        let naive = a.iter().map(|x| x.exp()).sum::<f64>().ln();
        assert!((log_sum_exp(&a) - naive).abs() < 1e-14);
    }

    #[test]
    fn survives_large_offsets() {
        let a = [1000.0f64, 1000.0 + (3.0f64).ln()];
        // log(e^1000 (1 + 3)) = 1000 + log 4
        assert!((log_sum_exp(&a) - (1000.0 + (4.0f64).ln())).abs() < 1e-12);
        let naive = a.iter().map(|x| x.exp()).sum::<f64>().ln();
        assert!(naive.is_infinite());
    }

    #[test]
    fn empty_is_neg_infinity() {
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
    }

    #[test]
    fn exact_counts_for_equal_terms() {
        let mut acc = LogSumAcc::new();
        for _ in 0..1_000_000 {
            acc.add(0.0);
        }
        assert_eq!(acc.value(), (1_000_000f64).ln());
    }
}
