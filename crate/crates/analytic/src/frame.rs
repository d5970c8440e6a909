//! Realtime frame sizing.

use beaconmac_core::time::aggregate_payload_bits;
use beaconmac_core::ProtocolParams;

use crate::chain::{ChainParams, MarkovChain};
use crate::contention::ContentionModel;
use crate::error::AnalyticError;
use crate::loss::{loss_rate_with, LossAveraging};
use crate::state::SystemState;
use crate::steady::steady_state;

/// `floor(T_rf / t_v)`.
pub fn max_scheduled_m(t_rf: u32, t_v: u32) -> u32 {
    assert!(t_v > 0, "t_v must be positive");
    t_rf / t_v
}

/// `min(n2 + n3 + n4, M)`.
pub fn scheduled_count_m(s: &SystemState, m_max: u32) -> u32 {
    s.in_table().min(m_max)
}

/// Contention-free and contention period lengths `(T_cf, T_cp)`.
pub fn period_durations(s: &SystemState, m_max: u32, t_rf: u32, t_v: u32) -> Result<(u32, u32), AnalyticError> {
    let t_cf = scheduled_count_m(s, m_max) * t_v;
    if t_cf > t_rf {
        return Err(AnalyticError::InfeasibleParameters(format!(
            "T_rf = {t_rf} cannot hold {} aggregates of {t_v}",
            scheduled_count_m(s, m_max)
        )));
    }
    Ok((t_cf, t_rf - t_cf))
}

/// Options for evaluating the loss of a given frame length.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Analysis {
    pub model: ContentionModel,
    pub averaging: LossAveraging,
}

impl Analysis {
    /// MAC loss rate with `n` calls and a realtime frame of `t_rf` mini-slots.
    pub fn delta_mac(&self, params: &ProtocolParams, n: u32, t_rf: u32) -> Result<f64, AnalyticError> {
        if n == 0 {
            return Ok(0.0);
        }
        let chain = MarkovChain::build(ChainParams::from_protocol(params, n, t_rf).with_model(self.model))?;
        let pi = steady_state(&chain)?;
        Ok(loss_rate_with(&chain, &pi, aggregate_payload_bits(params).as_f64(), self.averaging))
    }

    /// Smallest `T_rf` (mini-slots) whose loss does not exceed `delta_mac_star`.
    ///
    /// Binary search over `[0, T_rb - min_contention]`, followed by a check
    /// that the slot just below the answer violates the target.
    pub fn min_frame_duration(&self, params: &ProtocolParams, n: u32, delta_mac_star: f64) -> Result<FrameSearch, AnalyticError> {
        if !(delta_mac_star > 0.0 && delta_mac_star < 1.0) {
            return Err(AnalyticError::InfeasibleParameters(format!("loss target {delta_mac_star} outside (0, 1)")));
        }
        if n == 0 {
            return Ok(FrameSearch { n, t_rf: 0, delta_at: 0.0, delta_below: None, evaluations: 0 });
        }
        let max_slots = ((params.t_rb_us() - params.min_contention_us()) / params.mini_slot_us) as u32;
        let mut evaluations = 0;
        let mut eval = |t: u32| {
            evaluations += 1;
            self.delta_mac(params, n, t)
        };
        let at_max = eval(max_slots)?;
        if at_max > delta_mac_star {
            return Err(AnalyticError::CapacityExceeded { n, max_minislots: max_slots, delta_at_max: at_max });
        }
        let (mut lo, mut hi, mut delta_hi) = (0u32, max_slots, at_max);
        // invariant: delta(hi) <= target; every t < lo violates it
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            let d = eval(mid)?;
            if d <= delta_mac_star {
                hi = mid;
                delta_hi = d;
            } else {
                lo = mid + 1;
            }
        }
        let delta_below = if hi > 0 { Some(eval(hi - 1)?) } else { None };
        if delta_below.is_some_and(|d| d <= delta_mac_star) {
            return Err(AnalyticError::BracketViolation { t_rf: hi });
        }
        Ok(FrameSearch { n, t_rf: hi, delta_at: delta_hi, delta_below, evaluations })
    }
}

/// Outcome of the minimum frame search.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSearch {
    pub n: u32,
    pub t_rf: u32,
    pub delta_at: f64,
    /// Loss one mini-slot below the answer.
    pub delta_below: Option<f64>,
    pub evaluations: u32,
}

pub fn delta_mac_at(params: &ProtocolParams, n: u32, t_rf: u32) -> Result<f64, AnalyticError> {
    Analysis::default().delta_mac(params, n, t_rf)
}

pub fn min_frame_duration(params: &ProtocolParams, n: u32, delta_mac_star: f64) -> Result<FrameSearch, AnalyticError> {
    Analysis::default().min_frame_duration(params, n, delta_mac_star)
}

#[cfg(test)]
mod tests {
    use super::*;
    use beaconmac_core::time::{aggregate_tx_time_tv, us_to_minislots};

    #[test]
    fn m_is_floor() {
        assert_eq!(max_scheduled_m(150, 30), 5);
        assert_eq!(max_scheduled_m(29, 30), 0);
        // 7 ms = 350 mini-slots, t_v = 30 mini-slots
        let p = ProtocolParams::default();
        let t_v = us_to_minislots(aggregate_tx_time_tv(&p), &p);
        assert_eq!(max_scheduled_m(350, t_v), 11);
    }

    #[test]
    fn scheduled_count() {
        assert_eq!(scheduled_count_m(&SystemState::new(1, 2, 1, 0), 5), 3);
        assert_eq!(scheduled_count_m(&SystemState::new(0, 4, 3, 2), 5), 5);
        assert_eq!(scheduled_count_m(&SystemState::new(0, 0, 0, 0), 7), 0);
    }

    #[test]
    fn period_split() {
        assert_eq!(period_durations(&SystemState::new(3, 0, 0, 0), 4, 120, 30).unwrap(), (0, 120));
        assert_eq!(period_durations(&SystemState::new(0, 4, 0, 0), 4, 120, 30).unwrap(), (120, 0));
        assert_eq!(period_durations(&SystemState::new(2, 3, 0, 1), 2, 350, 100).unwrap(), (200, 150));
        assert!(period_durations(&SystemState::new(0, 4, 0, 0), 4, 100, 30).is_err());
    }

    #[test]
    fn no_calls_need_no_frame() {
        let r = min_frame_duration(&ProtocolParams::default(), 0, 0.01).unwrap();
        assert_eq!(r.t_rf, 0);
    }

    #[test]
    fn generous_target_for_one_call() {
        let p = ProtocolParams::default();
        let r = min_frame_duration(&p, 1, 0.5).unwrap();
        // one aggregate plus room for a request
        assert!(r.t_rf <= 30 + 15 + 32, "{r:?}");
    }

    #[test]
    fn bad_target_rejected() {
        assert!(min_frame_duration(&ProtocolParams::default(), 2, 0.0).is_err());
        assert!(min_frame_duration(&ProtocolParams::default(), 2, 1.0).is_err());
    }

    #[test]
    fn search_matches_linear_scan() {
        let p = ProtocolParams::default();
        let r = min_frame_duration(&p, 2, 0.01).unwrap();
        let first = (0..).find(|t| delta_mac_at(&p, 2, *t).unwrap() <= 0.01).unwrap();
        assert_eq!(r.t_rf, first);
        assert!(r.delta_below.unwrap() > 0.01);
    }

    #[test]
    fn capacity_exceeded() {
        // an aggregate longer than the whole searchable frame
        let p = ProtocolParams { voice_payload_bits: 300_000, ..Default::default() };
        assert!(matches!(min_frame_duration(&p, 2, 0.01), Err(AnalyticError::CapacityExceeded { .. })));
    }
}
