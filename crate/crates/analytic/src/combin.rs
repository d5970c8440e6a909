//! Small combinatorial helpers in double precision.

/// Probabilities below this are flushed to zero.
pub const UNDERFLOW: f64 = 1e-300;

/// `C(n, k)`, zero outside `0 <= k <= n`.
pub fn binom(n: i64, k: i64) -> f64 {
    if k < 0 || n < 0 || k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round_if_small()
}

trait RoundIfSmall {
    fn round_if_small(self) -> f64;
}

impl RoundIfSmall for f64 {
    // Exact integers are representable up to 2^53; snap accumulated drift.
    fn round_if_small(self) -> f64 {
        if self < 9.0e15 {
            self.round()
        } else {
            self
        }
    }
}

pub fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// `C(n, k) p^k (1-p)^(n-k)`.
pub fn binomial_pmf(n: u32, k: u32, p: f64) -> f64 {
    if k > n {
        return 0.0;
    }
    let v = binom(n as i64, k as i64) * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32);
    if v < UNDERFLOW {
        0.0
    } else {
        v
    }
}

/// Whole pmf of `Bin(n, p)` as a vector indexed by the count.
pub fn binomial_vec(n: u32, p: f64) -> Vec<f64> {
    (0..=n).map(|k| binomial_pmf(n, k, p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_binomials() {
        assert_eq!(binom(5, 2), 10.0);
        assert_eq!(binom(5, 0), 1.0);
        assert_eq!(binom(5, 6), 0.0);
        assert_eq!(binom(3, -1), 0.0);
        assert_eq!(binom(40, 20), 137_846_528_820.0);
    }

    #[test]
    fn binomial_sums_to_one() {
        for n in 0..12 {
            let s: f64 = binomial_vec(n, 0.37).iter().sum();
            assert!((s - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn degenerate_probabilities() {
        assert_eq!(binomial_pmf(3, 0, 0.0), 1.0);
        assert_eq!(binomial_pmf(3, 3, 1.0), 1.0);
        assert_eq!(binomial_pmf(3, 1, 0.0), 0.0);
    }
}
