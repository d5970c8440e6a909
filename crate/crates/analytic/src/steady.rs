//! Stationary distribution of a row-stochastic matrix.

use nalgebra::{DMatrix, DVector};

use crate::chain::{MarkovChain, SparseMatrix};
use crate::error::AnalyticError;

/// Chains up to this many states are solved directly.
pub const DIRECT_LIMIT: usize = 5000;
pub const RESIDUAL_TARGET: f64 = 1e-10;
const POWER_TARGET: f64 = 1e-12;
const POWER_MAX_ITER: usize = 200_000;

/// `max_j |(pi P)_j - pi_j|`.
pub fn residual(pi: &[f64], p: &SparseMatrix) -> f64 {
    p.left_mul(pi).iter().zip(pi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

/// Shannon entropy in nats.
pub fn entropy(pi: &[f64]) -> f64 {
    -pi.iter().filter(|v| **v > 0.0).map(|v| v * v.ln()).sum::<f64>()
}

/// Solves `pi P = pi`, `sum(pi) = 1`.
///
/// Small chains replace one balance equation with the normalization and
/// solve by LU; larger ones use power iteration. A singular system (for
/// instance the identity matrix) is reported as degenerate.
pub fn stationary_distribution(p: &SparseMatrix) -> Result<Vec<f64>, AnalyticError> {
    let pi = if p.dim() <= DIRECT_LIMIT { direct(p)? } else { power(p)? };
    let r = residual(&pi, p);
    if r >= RESIDUAL_TARGET {
        return Err(AnalyticError::NonConvergence { residual: r });
    }
    Ok(pi)
}

fn direct(p: &SparseMatrix) -> Result<Vec<f64>, AnalyticError> {
    let n = p.dim();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for (j, v) in p.row(i) {
            // transpose: equation j collects inflow from state i
            a[(j, i)] += v;
        }
    }
    for i in 0..n {
        a[(i, i)] -= 1.0;
    }
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(n);
    b[n - 1] = 1.0;
    let x = a
        .lu()
        .solve(&b)
        .ok_or_else(|| AnalyticError::Degenerate("singular balance equations (reducible chain)".into()))?;
    clean(x.iter().copied().collect())
}

fn clean(mut pi: Vec<f64>) -> Result<Vec<f64>, AnalyticError> {
    if pi.iter().any(|v| !v.is_finite() || *v < -1e-9) {
        return Err(AnalyticError::Degenerate("balance solution has negative mass".into()));
    }
    for v in pi.iter_mut() {
        *v = v.max(0.0);
    }
    let s: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|v| *v /= s);
    Ok(pi)
}

fn power(p: &SparseMatrix) -> Result<Vec<f64>, AnalyticError> {
    let n = p.dim();
    let mut pi = vec![1.0 / n as f64; n];
    let mut r = f64::INFINITY;
    for _ in 0..POWER_MAX_ITER {
        let next = p.left_mul(&pi);
        r = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        pi = next;
        if r < POWER_TARGET {
            return clean(pi);
        }
    }
    Err(AnalyticError::NonConvergence { residual: r })
}

/// Stationary distribution of the sender-population chain.
///
/// With `p = 0` or `q = 0` some calls never switch and the chain is
/// reducible, so these are rejected.
pub fn steady_state(chain: &MarkovChain) -> Result<Vec<f64>, AnalyticError> {
    let (p, q) = (chain.params.p, chain.params.q);
    if chain.params.n > 0 && (p == 0.0 || q == 0.0) {
        return Err(AnalyticError::Degenerate(format!("switch probabilities p = {p}, q = {q} make the chain reducible")));
    }
    stationary_distribution(&chain.matrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::ChainParams;
    use approx::assert_relative_eq;
    use beaconmac_core::ProtocolParams;

    #[test]
    fn two_state_textbook() {
        let m = SparseMatrix::from_dense(&[vec![0.9, 0.1], vec![0.2, 0.8]]);
        let pi = stationary_distribution(&m).unwrap();
        assert_relative_eq!(pi[0], 2.0 / 3.0, epsilon = 1e-14);
        assert_relative_eq!(pi[1], 1.0 / 3.0, epsilon = 1e-14);
        let pw = power(&m).unwrap();
        assert_relative_eq!(pw[0], 2.0 / 3.0, epsilon = 1e-10);
    }

    #[test]
    fn identity_is_degenerate() {
        let m = SparseMatrix::from_dense(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert!(matches!(stationary_distribution(&m), Err(AnalyticError::Degenerate(_))));
    }

    #[test]
    fn periodic_chain_solved_directly() {
        let m = SparseMatrix::from_dense(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert_relative_eq!(stationary_distribution(&m).unwrap()[0], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn frozen_switching_rejected() {
        let c = ChainParams { p: 0.0, ..ChainParams::from_protocol(&ProtocolParams::default(), 2, 100) };
        let chain = MarkovChain::build(c).unwrap();
        assert!(matches!(steady_state(&chain), Err(AnalyticError::Degenerate(_))));
    }

    #[test]
    fn chain_residual_small() {
        for n in [2, 4, 6] {
            let chain = MarkovChain::build(ChainParams::from_protocol(&ProtocolParams::default(), n, 30 * n)).unwrap();
            let pi = steady_state(&chain).unwrap();
            assert!(residual(&pi, &chain.matrix) < 1e-10);
            assert_relative_eq!(pi.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
            assert!(pi.iter().all(|v| *v >= 0.0));
        }
    }

    #[test]
    fn power_iteration_agrees_with_direct() {
        let chain = MarkovChain::build(ChainParams::from_protocol(&ProtocolParams::default(), 3, 90)).unwrap();
        let d = direct(&chain.matrix).unwrap();
        let p = power(&chain.matrix).unwrap();
        let tv: f64 = d.iter().zip(&p).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0;
        assert!(tv < 1e-9);
    }
}
