//! Which table entries are served in the contention-free period.

use crate::combin::binom;
use crate::error::AnalyticError;
use crate::state::SystemState;

/// Joint probability that `x1` state-3 senders and `x3` state-4 senders are
/// scheduled while `x2` state-3 senders miss the frame, given `m` grants.
///
/// Grants go to `min(n2+n3+n4, m)` table entries drawn uniformly without
/// replacement. A state-3 sender is either scheduled or expires, so
/// `x1 + x2 = n3`.
pub fn cf_pmf(x1: u32, x2: u32, x3: u32, s: &SystemState, n: u32, m: u32) -> Result<f64, AnalyticError> {
    s.check(n)?;
    Ok(cf_pmf_unchecked(x1, x2, x3, s, m))
}

fn cf_pmf_unchecked(x1: u32, x2: u32, x3: u32, s: &SystemState, m: u32) -> f64 {
    if x1 + x2 != s.n3 || x1 > s.n3 || x3 > s.n4 {
        return 0.0;
    }
    let total = s.in_table();
    if total <= m {
        return if (x1, x2, x3) == (s.n3, 0, s.n4) { 1.0 } else { 0.0 };
    }
    let from_n2 = m as i64 - x1 as i64 - x3 as i64;
    binom(s.n3 as i64, x1 as i64) * binom(s.n4 as i64, x3 as i64) * binom(s.n2 as i64, from_n2)
        / binom(total as i64, m as i64)
}

/// Nonzero outcomes `((x1, x2, x3), probability)`.
pub fn cf_support(s: &SystemState, m: u32) -> Vec<((u32, u32, u32), f64)> {
    let mut out = Vec::new();
    for x1 in 0..=s.n3 {
        for x3 in 0..=s.n4 {
            let p = cf_pmf_unchecked(x1, s.n3 - x1, x3, s, m);
            if p > 0.0 {
                out.push(((x1, s.n3 - x1, x3), p));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::StateSpace;
    use approx::assert_relative_eq;

    #[test]
    fn everyone_fits() {
        let s = SystemState::new(0, 1, 1, 1);
        for m in 3..6 {
            assert_eq!(cf_pmf(1, 0, 1, &s, 3, m).unwrap(), 1.0);
        }
    }

    #[test]
    fn one_of_three_schedules() {
        // schedules of size 2 from {a(2), b(3), c(4)}: ab, ac, bc
        let s = SystemState::new(0, 1, 1, 1);
        assert_relative_eq!(cf_pmf(1, 0, 1, &s, 3, 2).unwrap(), 1.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(cf_pmf(1, 0, 0, &s, 3, 2).unwrap(), 1.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(cf_pmf(0, 1, 1, &s, 3, 2).unwrap(), 1.0 / 3.0, epsilon = 1e-15);
        let total: f64 = cf_support(&s, 2).iter().map(|(_, p)| p).sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn two_pending_one_slot() {
        let s = SystemState::new(0, 0, 2, 0);
        assert_eq!(cf_pmf(1, 1, 0, &s, 2, 1).unwrap(), 1.0);
    }

    #[test]
    fn infeasible_state_is_error() {
        assert!(cf_pmf(0, 0, 0, &SystemState::new(3, 0, 0, 0), 2, 1).is_err());
    }

    #[test]
    fn normalizes_exhaustively() {
        for n in 0..=8 {
            for s in StateSpace::new(n).states() {
                for m in 0..=n + 1 {
                    let total: f64 = cf_support(s, m).iter().map(|(_, p)| p).sum();
                    assert!((total - 1.0).abs() < 1e-12, "{s:?} m={m} sum={total}");
                }
            }
        }
    }
}
