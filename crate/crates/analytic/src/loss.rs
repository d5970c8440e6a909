//! MAC-level realtime packet loss.

use crate::chain::MarkovChain;
use crate::error::AnalyticError;
use crate::frame::scheduled_count_m;
use crate::state::SystemState;

/// How per-state delivery is averaged into one loss rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LossAveraging {
    /// `1 - E[r] / E[g]`: delivered over generated payload in the long run.
    #[default]
    RatioOfMeans,
    /// `1 - E[r/g]`, with states generating nothing counted as lossless.
    MeanOfRatios,
}

/// Expected payload delivered in state `s`: the `min(n2+n3+n4, M)` granted
/// entries are uniform over the table, and only states 2 and 3 hold data.
pub fn delivered(s: &SystemState, m_max: u32, rho: f64) -> f64 {
    let tot = s.in_table();
    if tot == 0 {
        return 0.0;
    }
    scheduled_count_m(s, m_max) as f64 * (s.n2 + s.n3) as f64 / tot as f64 * rho
}

/// Payload generated in state `s` by calls that are on.
pub fn generated(s: &SystemState, rho: f64) -> f64 {
    (s.n1 + s.n2) as f64 * rho
}

pub fn loss_rate_delta_mac(chain: &MarkovChain, pi: &[f64], rho: f64) -> f64 {
    loss_rate_with(chain, pi, rho, LossAveraging::default())
}

pub fn loss_rate_with(chain: &MarkovChain, pi: &[f64], rho: f64, averaging: LossAveraging) -> f64 {
    let m_max = chain.params.m_max();
    let states = chain.space.states();
    match averaging {
        LossAveraging::RatioOfMeans => {
            let (mut r, mut g) = (0.0, 0.0);
            for (s, w) in states.iter().zip(pi) {
                r += w * delivered(s, m_max, rho);
                g += w * generated(s, rho);
            }
            if g > 0.0 {
                (1.0 - r / g).clamp(0.0, 1.0)
            } else {
                0.0
            }
        }
        LossAveraging::MeanOfRatios => {
            let mut acc = 0.0;
            for (s, w) in states.iter().zip(pi) {
                let g = generated(s, rho);
                acc += w * if g > 0.0 { delivered(s, m_max, rho) / g } else { 1.0 };
            }
            1.0 - acc
        }
    }
}

/// Largest MAC loss compatible with an end-to-end target, given the
/// channel loss: `1 - (1 - delta_star) / (1 - delta_ch)`.
pub fn max_allowable_mac_loss(delta_star: f64, delta_ch: f64) -> Result<f64, AnalyticError> {
    if !(0.0..1.0).contains(&delta_ch) || !(0.0..1.0).contains(&delta_star) || delta_ch > delta_star {
        return Err(AnalyticError::InfeasibleQos { delta_star, delta_ch });
    }
    Ok((1.0 - (1.0 - delta_star) / (1.0 - delta_ch)).max(0.0))
}

/// End-to-end loss of independent MAC and channel losses.
pub fn compose_loss(delta_mac: f64, delta_ch: f64) -> f64 {
    1.0 - (1.0 - delta_mac) * (1.0 - delta_ch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{ChainParams, MarkovChain};
    use crate::state::StateSpace;
    use approx::assert_relative_eq;
    use beaconmac_core::ProtocolParams;

    #[test]
    fn allowable_loss() {
        assert_relative_eq!(max_allowable_mac_loss(0.01, 0.0).unwrap(), 0.01, epsilon = 1e-15);
        assert_relative_eq!(max_allowable_mac_loss(0.01, 0.005).unwrap(), 1.0 - 0.99 / 0.995, epsilon = 1e-15);
        assert!((max_allowable_mac_loss(0.01, 0.005).unwrap() - 0.005025).abs() < 1e-6);
        assert_eq!(max_allowable_mac_loss(0.02, 0.02).unwrap(), 0.0);
        assert!(max_allowable_mac_loss(0.01, 0.02).is_err());
    }

    #[test]
    fn composition_inverts() {
        assert_relative_eq!(compose_loss(0.01, 0.0), 0.01, epsilon = 1e-15);
        let m = max_allowable_mac_loss(0.01, 0.005).unwrap();
        assert_relative_eq!(compose_loss(m, 0.005), 0.01, epsilon = 1e-15);
        assert_relative_eq!(compose_loss(0.0, 0.02), 0.02, epsilon = 1e-15);
    }

    fn chain(n: u32, t_rf: u32) -> MarkovChain {
        MarkovChain::build(ChainParams::from_protocol(&ProtocolParams::default(), n, t_rf)).unwrap()
    }

    #[test]
    fn fully_served_state_is_lossless() {
        let c = chain(3, 120);
        let mut pi = vec![0.0; c.space.len()];
        pi[c.space.index_of(&SystemState::new(0, 3, 0, 0)).unwrap()] = 1.0;
        assert_eq!(loss_rate_delta_mac(&c, &pi, 3200.0), 0.0);
        assert_eq!(loss_rate_with(&c, &pi, 3200.0, LossAveraging::MeanOfRatios), 0.0);
    }

    #[test]
    fn silent_network_is_lossless() {
        let c = chain(2, 90);
        let mut pi = vec![0.0; c.space.len()];
        pi[0] = 1.0;
        assert_eq!(loss_rate_delta_mac(&c, &pi, 3200.0), 0.0);
        assert_eq!(loss_rate_with(&c, &pi, 3200.0, LossAveraging::MeanOfRatios), 0.0);
    }

    #[test]
    fn rho_cancels() {
        let c = chain(3, 100);
        let pi: Vec<f64> = vec![1.0 / c.space.len() as f64; c.space.len()];
        assert_relative_eq!(loss_rate_delta_mac(&c, &pi, 1.0), loss_rate_delta_mac(&c, &pi, 3200.0), epsilon = 1e-14);
        assert_eq!(StateSpace::expected_len(3), pi.len());
    }
}
