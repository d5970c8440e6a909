//! Call on/off switching between two realtime beacons.

use crate::combin::binomial_pmf;
use crate::error::AnalyticError;
use crate::state::SystemState;

/// `p = 1 - exp(-T_rb/t_off)` (off to on) and `q = 1 - exp(-T_rb/t_on)`.
pub fn switch_probs(t_rb_s: f64, t_on_s: f64, t_off_s: f64) -> (f64, f64) {
    (1.0 - (-t_rb_s / t_off_s).exp(), 1.0 - (-t_rb_s / t_on_s).exp())
}

/// Populations exposed to each switch given the service tallies `x1..x4`:
/// `(n2+x4, n4+x2-x3, n1-x4, n5+x1+x3)`.
pub fn switch_populations(
    x: [u32; 4],
    s: &SystemState,
    n: u32,
) -> Result<[u32; 4], AnalyticError> {
    let [x1, x2, x3, x4] = x.map(i64::from);
    let n5 = s.n5(n)? as i64;
    let pops = [
        (s.n2 as i64 + x4, "n2 + x4"),
        (s.n4 as i64 + x2 - x3, "n4 + x2 - x3"),
        (s.n1 as i64 - x4, "n1 - x4"),
        (n5 + x1 + x3, "n5 + x1 + x3"),
    ];
    let mut out = [0u32; 4];
    for (o, (v, name)) in out.iter_mut().zip(pops) {
        if v < 0 {
            return Err(AnalyticError::InfeasibleTransition(name));
        }
        *o = v as u32;
    }
    Ok(out)
}

/// `P(x5, x6, x7, x8 | x1..x4, s)`: four independent binomials,
/// `x5 ~ Bin(n2+x4, q)`, `x6 ~ Bin(n4+x2-x3, p)`, `x7 ~ Bin(n1-x4, q)`,
/// `x8 ~ Bin(n5+x1+x3, p)`.
pub fn status_change_pmf(
    x5_8: [u32; 4],
    x1_4: [u32; 4],
    s: &SystemState,
    n: u32,
    p: f64,
    q: f64,
) -> Result<f64, AnalyticError> {
    let pops = switch_populations(x1_4, s, n)?;
    let probs = [q, p, q, p];
    Ok((0..4).map(|i| binomial_pmf(pops[i], x5_8[i], probs[i])).product())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn beacon_switch_probabilities() {
        assert_eq!(switch_probs(0.0, 1.8, 1.2), (0.0, 0.0));
        let (p, q) = switch_probs(0.05, 1.8, 1.2);
        assert_relative_eq!(p, 1.0 - (-1.0f64 / 24.0).exp(), epsilon = 1e-15);
        assert_relative_eq!(q, 1.0 - (-1.0f64 / 36.0).exp(), epsilon = 1e-15);
        assert!((p - 0.04083).abs() < 5e-5);
        assert!((q - 0.02740).abs() < 1e-5);
    }

    #[test]
    fn frozen_calls() {
        let s = SystemState::new(1, 1, 0, 1);
        assert_eq!(status_change_pmf([0; 4], [0; 4], &s, 4, 0.0, 0.0).unwrap(), 1.0);
        assert_eq!(status_change_pmf([0, 0, 0, 1], [0; 4], &s, 4, 0.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn single_bernoulli() {
        let s = SystemState::new(0, 1, 0, 0);
        assert_eq!(status_change_pmf([1, 0, 0, 0], [0; 4], &s, 1, 0.0, 0.5).unwrap(), 0.5);
    }

    #[test]
    fn hand_product() {
        // s=(1,1,0,1), N=4 so n5=1; x4=1: populations (2, 1, 0, 1).
        let s = SystemState::new(1, 1, 0, 1);
        let v = status_change_pmf([0, 0, 0, 1], [0, 0, 0, 1], &s, 4, 0.1, 0.1).unwrap();
        // Bin(2,.1)(0) * Bin(1,.1)(0) * Bin(0,.1)(0) * Bin(1,.1)(1)
        assert_relative_eq!(v, 0.81 * 0.9 * 1.0 * 0.1, epsilon = 1e-15);
    }

    #[test]
    fn negative_population_rejected() {
        let s = SystemState::new(0, 0, 0, 0);
        assert!(status_change_pmf([0; 4], [0, 0, 0, 1], &s, 2, 0.1, 0.1).is_err());
        assert!(status_change_pmf([0; 4], [0, 0, 1, 0], &s, 2, 0.1, 0.1).is_err());
    }

    #[test]
    fn sums_to_one_exhaustively() {
        // every population combination up to 5 reached through x1..x4
        for n2 in 0..=5u32 {
            for n4 in 0..=5u32 {
                for n1 in 0..=5u32 {
                    let s = SystemState::new(n1, n2, 0, n4);
                    let n = n1 + n2 + n4 + 2;
                    let pops = switch_populations([0; 4], &s, n).unwrap();
                    let mut total = 0.0;
                    for a in 0..=pops[0] {
                        for b in 0..=pops[1] {
                            for c in 0..=pops[2] {
                                for d in 0..=pops[3] {
                                    total += status_change_pmf([a, b, c, d], [0; 4], &s, n, 0.3, 0.17).unwrap();
                                }
                            }
                        }
                    }
                    assert!((total - 1.0).abs() < 1e-12);
                }
            }
        }
    }
}
