//! Number of successful transmission requests in one contention period.
//!
//! Each of `n1` contenders draws a backoff `w` uniformly from `[0, W-1]`.
//! Counters freeze while the medium is busy, so the request of a node with
//! backoff `w` that follows `j` earlier transmissions starts at `w + j*t_q`.
//! It goes out only if it ends inside the period, `w + (j+1)*t_q <= T_cp`.
//! Equal backoffs collide; a collision occupies `t_q` like a success.
//! All quantities are in mini-slots.

use crate::combin::{binom, factorial};
use crate::error::AnalyticError;

/// Which contention pmf the chain uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ContentionModel {
    /// Exact distribution of the slotted model described above.
    #[default]
    Exact,
    /// Closed-form counting formula, renormalized over its own support.
    ClosedForm,
}

/// Result of the closed-form counting formula.
#[derive(Debug, Clone, PartialEq)]
pub struct FormulaPmf {
    /// Counts divided by their own total; a point mass at 0 if all are zero.
    pub pmf: Vec<f64>,
    /// Total counted mass divided by `W^n1` before renormalization.
    pub raw_mass: f64,
}

fn pow_i(base: i64, exp: u32) -> f64 {
    (base as f64).powi(exp as i32)
}

/// The closed-form count of backoff vectors yielding `x4` successes and
/// `x4p` collisions, with the last transmission at backoff `w_l`:
///
/// `C(w_l, x4+x4p-1) C(x4+x4p, x4) n1!/((n1-x4-2x4p)! 2^x4p) (W-1-w_x+x4p)^(n1-x4-2x4p)`
///
/// where `I_cp = T_cp - (x4+x4p) t_q` and `w_x = min(I_cp - t_q, W-1)`.
pub fn contention_pmf_formula(n1: u32, t_cp: u32, w: u32, t_q: u32) -> FormulaPmf {
    let w = w.max(1) as i64;
    let mut counts = vec![0.0; n1 as usize + 1];
    for x4 in 0..=n1 {
        for x4p in 0..=(n1 - x4) / 2 {
            let rest = n1 - x4 - 2 * x4p;
            let events = (x4 + x4p) as i64;
            let i_cp = t_cp as i64 - events * t_q as i64;
            let w_x = (i_cp - t_q as i64).min(w - 1).max(-1);
            if events == 0 {
                counts[0] += pow_i(w - 1 - w_x, n1);
                continue;
            }
            let pairing = factorial(n1) / (factorial(rest) * 2f64.powi(x4p as i32));
            let tail = pow_i(w - 1 - w_x + x4p as i64, rest);
            let choose = binom(events, x4 as i64);
            for w_l in (events - 1)..=w_x {
                counts[x4 as usize] += binom(w_l, events - 1) * choose * pairing * tail;
            }
        }
    }
    let total: f64 = counts.iter().sum();
    let raw_mass = total / pow_i(w, n1);
    let pmf = if total > 0.0 {
        counts.iter().map(|c| c / total).collect()
    } else {
        let mut v = vec![0.0; n1 as usize + 1];
        v[0] = 1.0;
        v
    };
    FormulaPmf { pmf, raw_mass }
}

/// Successes for one explicit backoff vector.
pub fn successes_for(backoffs: &[u32], t_cp: u32, w: u32, t_q: u32) -> u32 {
    let mut counts = vec![0u32; w as usize];
    for &b in backoffs {
        counts[b as usize] += 1;
    }
    let mut j = 0u64;
    let mut ok = 0;
    for (v, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        if v as u64 + (j + 1) * t_q as u64 > t_cp as u64 {
            break;
        }
        j += 1;
        if c == 1 {
            ok += 1;
        }
    }
    ok
}

/// Exhaustive enumeration over all `W^n1` backoff vectors.
pub fn contention_pmf_oracle(n1: u32, t_cp: u32, w: u32, t_q: u32) -> Result<Vec<f64>, AnalyticError> {
    if n1 > 6 || w > 16 || w == 0 {
        return Err(AnalyticError::OracleTooLarge { n1, w });
    }
    let mut tally = vec![0u64; n1 as usize + 1];
    let mut vec = vec![0u32; n1 as usize];
    loop {
        tally[successes_for(&vec, t_cp, w, t_q) as usize] += 1;
        // odometer increment
        let mut i = 0;
        loop {
            if i == vec.len() {
                let total = (w as u64).pow(n1) as f64;
                return Ok(tally.iter().map(|&c| c as f64 / total).collect());
            }
            vec[i] += 1;
            if vec[i] < w {
                break;
            }
            vec[i] = 0;
            i += 1;
        }
    }
}

/// Exact pmf by dynamic programming over backoff values.
///
/// Walks `v = 0..W-1`, choosing how many of the remaining nodes picked `v`.
/// State is `(remaining, transmissions so far, successes)`.
pub fn contention_pmf_exact(n1: u32, t_cp: u32, w: u32, t_q: u32) -> Vec<f64> {
    let n = n1 as usize;
    let w = w.max(1);
    // dp[rem][j][succ], counts of backoff assignments (as f64)
    let idx = |rem: usize, j: usize, s: usize| (rem * (n + 1) + j) * (n + 1) + s;
    let size = (n + 1) * (n + 1) * (n + 1);
    let mut dp = vec![0.0f64; size];
    dp[idx(n, 0, 0)] = 1.0;
    for v in 0..w {
        let last = v == w - 1;
        let mut next = vec![0.0f64; size];
        for rem in 0..=n {
            for j in 0..=n {
                for s in 0..=n {
                    let cur = dp[idx(rem, j, s)];
                    if cur == 0.0 {
                        continue;
                    }
                    let ks: Box<dyn Iterator<Item = usize>> = if last { Box::new(rem..=rem) } else { Box::new(0..=rem) };
                    for k in ks {
                        let weight = cur * binom(rem as i64, k as i64);
                        let fits = v as u64 + (j as u64 + 1) * t_q as u64 <= t_cp as u64;
                        let (nj, ns) = match k {
                            0 => (j, s),
                            _ if !fits => (j, s),
                            1 => (j + 1, s + 1),
                            _ => (j + 1, s),
                        };
                        next[idx(rem - k, nj, ns)] += weight;
                    }
                }
            }
        }
        dp = next;
    }
    let total = (w as f64).powi(n1 as i32);
    let mut pmf = vec![0.0; n + 1];
    for j in 0..=n {
        for s in 0..=n {
            pmf[s] += dp[idx(0, j, s)] / total;
        }
    }
    pmf
}

pub fn contention_pmf(model: ContentionModel, n1: u32, t_cp: u32, w: u32, t_q: u32) -> Vec<f64> {
    match model {
        ContentionModel::Exact => contention_pmf_exact(n1, t_cp, w, t_q),
        ContentionModel::ClosedForm => contention_pmf_formula(n1, t_cp, w, t_q).pmf,
    }
}

/// One line of the formula-versus-enumeration comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffRow {
    pub n1: u32,
    pub w: u32,
    pub t_cp: u32,
    pub t_q: u32,
    pub x4: u32,
    pub formula: f64,
    pub oracle: f64,
    pub exact: f64,
    pub formula_raw_mass: f64,
}

impl DiffRow {
    pub fn abs_diff(&self) -> f64 {
        (self.formula - self.oracle).abs()
    }

    pub fn flagged(&self, tol: f64) -> bool {
        self.abs_diff() > tol
    }
}

/// Contention period lengths covering the three regimes for `(n1, W, t_q)`:
/// too short for any request, moderate, and long enough for everyone.
pub fn regime_grid(n1: u32, w: u32, t_q: u32) -> [u32; 3] {
    let long = w + (n1 + 1) * t_q;
    [t_q.saturating_sub(1), (w / 2 + t_q).max(t_q + 1).min(long), long]
}

/// Compares the formula, the enumeration and the exact DP for every `x4`.
pub fn compare_with_oracle(n1: u32, t_cp: u32, w: u32, t_q: u32) -> Result<Vec<DiffRow>, AnalyticError> {
    let oracle = contention_pmf_oracle(n1, t_cp, w, t_q)?;
    let formula = contention_pmf_formula(n1, t_cp, w, t_q);
    let exact = contention_pmf_exact(n1, t_cp, w, t_q);
    Ok((0..=n1 as usize)
        .map(|x4| DiffRow {
            n1,
            w,
            t_cp,
            t_q,
            x4: x4 as u32,
            formula: formula.pmf[x4],
            oracle: oracle[x4],
            exact: exact[x4],
            formula_raw_mass: formula.raw_mass,
        })
        .collect())
}

/// Full comparison grid: `n1 <= n1_max`, `1 <= W <= w_max`, three regimes each.
pub fn oracle_diff_table(n1_max: u32, w_max: u32, t_q: u32) -> Result<Vec<DiffRow>, AnalyticError> {
    let mut rows = Vec::new();
    for n1 in 0..=n1_max {
        for w in 1..=w_max {
            for t_cp in regime_grid(n1, w, t_q) {
                rows.extend(compare_with_oracle(n1, t_cp, w, t_q)?);
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn no_contenders() {
        assert_eq!(contention_pmf_formula(0, 10, 8, 3).pmf, vec![1.0]);
        assert_eq!(contention_pmf_oracle(0, 10, 8, 3).unwrap(), vec![1.0]);
        assert_eq!(contention_pmf_exact(0, 10, 8, 3), vec![1.0]);
    }

    #[test]
    fn single_contender_succeeds() {
        for w in 1..10 {
            let t_q = 3;
            // the closed form wants one spare request time after the last one
            let f = contention_pmf_formula(1, w + 2 * t_q, w, t_q);
            assert_relative_eq!(f.pmf[1], 1.0, epsilon = 1e-15);
            assert_relative_eq!(f.raw_mass, 1.0, epsilon = 1e-15);
            assert_relative_eq!(contention_pmf_exact(1, w + t_q, w, t_q)[1], 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn two_nodes_two_slots() {
        let t_q = 2;
        let t_cp = 2 * t_q + 2;
        let expect = [0.5, 0.0, 0.5];
        let f = contention_pmf_formula(2, 100, 2, t_q);
        let o = contention_pmf_oracle(2, t_cp, 2, t_q).unwrap();
        let e = contention_pmf_exact(2, t_cp, 2, t_q);
        for i in 0..3 {
            assert_relative_eq!(f.pmf[i], expect[i], epsilon = 1e-12);
            assert_relative_eq!(o[i], expect[i], epsilon = 1e-12);
            assert_relative_eq!(e[i], expect[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn oracle_edge_cases() {
        assert_eq!(contention_pmf_oracle(1, 2, 4, 3).unwrap(), vec![1.0, 0.0]);
        assert_eq!(contention_pmf_oracle(3, 100, 1, 3).unwrap(), vec![1.0, 0.0, 0.0, 0.0]);
        assert!(contention_pmf_oracle(7, 100, 2, 3).is_err());
        assert!(contention_pmf_oracle(2, 100, 17, 3).is_err());
    }

    #[test]
    fn formula_counts_three_way_ties_wrongly() {
        // n1 = 3, W = 1: the formula books the triple tie three times over.
        let f = contention_pmf_formula(3, 100, 1, 3);
        assert_relative_eq!(f.raw_mass, 3.0, epsilon = 1e-12);
    }

    #[test]
    fn exact_matches_enumeration() {
        for n1 in 0..=5 {
            for w in 1..=9 {
                for t_q in [1, 2, 5] {
                    for t_cp in 0..(w + (n1 + 1) * t_q + 2) {
                        let o = contention_pmf_oracle(n1, t_cp, w, t_q).unwrap();
                        let e = contention_pmf_exact(n1, t_cp, w, t_q);
                        for (a, b) in o.iter().zip(&e) {
                            assert!((a - b).abs() < 1e-12, "n1={n1} w={w} tq={t_q} tcp={t_cp}: {o:?} {e:?}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn formula_normalizes_by_construction() {
        for n1 in 0..=4 {
            for w in 1..=8 {
                for t_cp in regime_grid(n1, w, 15) {
                    let s: f64 = contention_pmf_formula(n1, t_cp, w, 15).pmf.iter().sum();
                    assert!((s - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn exact_pmf_sums_to_one(n1 in 0u32..12, w in 1u32..64, t_q in 1u32..20, t_cp in 0u32..400) {
            let s: f64 = contention_pmf_exact(n1, t_cp, w, t_q).iter().sum();
            proptest::prop_assert!((s - 1.0).abs() < 1e-12);
        }

        #[test]
        fn more_time_never_hurts(n1 in 1u32..6, w in 1u32..32, t_q in 1u32..20, t_cp in 0u32..300) {
            // mean successes are non-decreasing in the period length
            let mean = |t: u32| contention_pmf_exact(n1, t, w, t_q).iter().enumerate().map(|(k, p)| k as f64 * p).sum::<f64>();
            proptest::prop_assert!(mean(t_cp + 1) + 1e-12 >= mean(t_cp));
        }
    }
}
