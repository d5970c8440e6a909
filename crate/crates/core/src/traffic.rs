//! Traffic sources: Poisson data packets and on/off voice calls.

use std::collections::VecDeque;

use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::params::ProtocolParams;
use crate::time::Micros;

/// Poisson packet arrivals with a FIFO of ready timestamps.
#[derive(Debug, Clone)]
pub struct PoissonSource {
    rate_pkts_per_s: f64,
    next_arrival_s: f64,
    pub queue: VecDeque<Micros>,
}

impl PoissonSource {
    pub fn new<R: Rng + ?Sized>(rate_pkts_per_s: f64, start: Micros, rng: &mut R) -> Self {
        let mut src = Self {
            rate_pkts_per_s,
            next_arrival_s: start as f64 * 1e-6,
            queue: VecDeque::new(),
        };
        src.next_arrival_s += src.draw_gap(rng);
        src
    }

    fn draw_gap<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.rate_pkts_per_s > 0.0 && self.rate_pkts_per_s.is_finite() {
            Exp::new(self.rate_pkts_per_s).expect("positive rate").sample(rng)
        } else {
            f64::INFINITY
        }
    }

    pub fn rate(&self) -> f64 {
        self.rate_pkts_per_s
    }

    /// Time of the next arrival, `Micros::MAX` for a silent source.
    pub fn next_arrival(&self) -> Micros {
        if self.next_arrival_s.is_finite() {
            (self.next_arrival_s * 1e6).ceil() as Micros
        } else {
            Micros::MAX
        }
    }

    /// Enqueues the pending arrival and draws the one after it.
    pub fn arrive<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Micros {
        let t = self.next_arrival();
        self.queue.push_back(t);
        self.next_arrival_s += self.draw_gap(rng);
        t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CallMode {
    On,
    Off,
}

/// Voice packets accumulated over one realtime beacon, sent as one frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Aggregate {
    pub packets: u32,
    pub payload_bits: u64,
    pub formed_at: Micros,
    pub deadline: Micros,
}

/// Constant-rate voice call alternating exponential on and off periods.
#[derive(Debug, Clone)]
pub struct OnOffCall {
    t_on_s: f64,
    t_off_s: f64,
    t_a_us: Micros,
    payload_h_bits: u64,
    mode: CallMode,
    next_switch_s: f64,
    phase_us: Micros,
    pending: Option<Aggregate>,
}

impl OnOffCall {
    /// Starts the call in its stationary mode distribution at `start`.
    pub fn new<R: Rng + ?Sized>(params: &ProtocolParams, start: Micros, rng: &mut R) -> Self {
        let p_on = params.t_on_s / (params.t_on_s + params.t_off_s);
        let mode = if rng.random::<f64>() < p_on { CallMode::On } else { CallMode::Off };
        let mut call = Self {
            t_on_s: params.t_on_s,
            t_off_s: params.t_off_s,
            t_a_us: params.t_a_us(),
            payload_h_bits: params.voice_payload_bits,
            mode,
            next_switch_s: start as f64 * 1e-6,
            phase_us: rng.random_range(0..params.t_a_us()),
            pending: None,
        };
        call.next_switch_s += call.draw_period(rng);
        call
    }

    fn draw_period<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let mean = match self.mode {
            CallMode::On => self.t_on_s,
            CallMode::Off => self.t_off_s,
        };
        Exp::new(1.0 / mean).expect("positive mean").sample(rng)
    }

    pub fn mode(&self) -> CallMode {
        self.mode
    }

    pub fn next_switch(&self) -> f64 {
        self.next_switch_s
    }

    pub fn t_a_us(&self) -> Micros {
        self.t_a_us
    }

    pub fn payload_h_bits(&self) -> u64 {
        self.payload_h_bits
    }

    /// Advances the on/off process to `t` and returns the mode there.
    /// Queries must be non-decreasing in `t`.
    pub fn mode_at<R: Rng + ?Sized>(&mut self, t: Micros, rng: &mut R) -> CallMode {
        let ts = t as f64 * 1e-6;
        while self.next_switch_s <= ts {
            self.mode = match self.mode {
                CallMode::On => CallMode::Off,
                CallMode::Off => CallMode::On,
            };
            self.next_switch_s += self.draw_period(rng);
        }
        self.mode
    }

    /// Packet generation instants of the call's periodic clock in `[from, to)`.
    pub fn ticks_between(&self, from: Micros, to: Micros) -> impl Iterator<Item = Micros> + '_ {
        let first_k = if from <= self.phase_us { 0 } else { (from - self.phase_us).div_ceil(self.t_a_us) };
        (first_k..)
            .map(move |k| self.phase_us + k * self.t_a_us)
            .take_while(move |t| *t < to)
    }

    /// Number of periodic ticks in `[from, to)`, regardless of mode.
    pub fn ticks_in(&self, from: Micros, to: Micros) -> u32 {
        self.ticks_between(from, to).count() as u32
    }

    /// Replaces the pending aggregate. Returns the previous one if it was
    /// still held, which callers account as lost.
    pub fn form_aggregate(&mut self, now: Micros, packets: u32, d_m_us: Micros) -> Option<Aggregate> {
        let agg = (packets > 0).then_some(Aggregate {
            packets,
            payload_bits: packets as u64 * self.payload_h_bits,
            formed_at: now,
            deadline: now + d_m_us,
        });
        std::mem::replace(&mut self.pending, agg)
    }

    /// Drops the pending aggregate if its deadline has passed.
    pub fn expire(&mut self, now: Micros) -> Option<Aggregate> {
        match self.pending {
            Some(a) if now >= a.deadline => self.pending.take(),
            _ => None,
        }
    }

    /// Removes the pending aggregate for transmission if it is still valid.
    pub fn take_pending(&mut self, now: Micros) -> Option<Aggregate> {
        match self.pending {
            Some(a) if now < a.deadline => self.pending.take(),
            _ => None,
        }
    }

    pub fn pending(&self) -> Option<&Aggregate> {
        self.pending.as_ref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    #[test]
    fn poisson_mean_gap_within_two_percent() {
        let mut rng = stream_rng(7, 0);
        let mut src = PoissonSource::new(200.0, 0, &mut rng);
        let n = 200_000;
        let mut last = 0;
        for _ in 0..n {
            last = src.arrive(&mut rng);
        }
        let mean_gap_s = last as f64 * 1e-6 / n as f64;
        assert!((mean_gap_s * 200.0 - 1.0).abs() < 0.02, "mean gap {mean_gap_s}");
        assert!(src.queue.iter().zip(src.queue.iter().skip(1)).all(|(a, b)| a <= b));
    }

    #[test]
    fn silent_source_never_arrives() {
        let mut rng = stream_rng(1, 0);
        let src = PoissonSource::new(0.0, 0, &mut rng);
        assert_eq!(src.next_arrival(), Micros::MAX);
    }

    #[test]
    fn on_periods_match_mean() {
        let p = ProtocolParams::default();
        let mut rng = stream_rng(11, 3);
        let mut call = OnOffCall::new(&p, 0, &mut rng);
        let mut on_total = 0.0;
        let mut cycles = 0;
        while cycles < 20_000 {
            let start = call.next_switch();
            let before = call.mode();
            let t = (start * 1e6).ceil() as Micros;
            call.mode_at(t, &mut rng);
            if before == CallMode::Off && call.mode() == CallMode::On {
                // start of an on period; measure it exactly from switch times
                let on_start = start;
                let end = call.next_switch();
                on_total += end - on_start;
                cycles += 1;
            }
        }
        let mean = on_total / cycles as f64;
        assert!((mean / p.t_on_s - 1.0).abs() < 0.05, "mean on {mean}");
    }

    #[test]
    fn ticks_are_periodic() {
        let p = ProtocolParams::default();
        let mut rng = stream_rng(2, 0);
        let call = OnOffCall::new(&p, 0, &mut rng);
        let total: u32 = (0..100).map(|k| call.ticks_in(k * 50_000, (k + 1) * 50_000)).sum();
        assert_eq!(total, 250);
        for k in 0..100 {
            let c = call.ticks_in(k * 50_000, (k + 1) * 50_000);
            assert!(c == 2 || c == 3);
        }
    }

    #[test]
    fn aggregate_expiry() {
        let p = ProtocolParams::default();
        let mut rng = stream_rng(2, 0);
        let mut call = OnOffCall::new(&p, 0, &mut rng);
        assert!(call.form_aggregate(50_000, 3, p.d_m_us()).is_none());
        assert!(call.expire(99_999).is_none());
        let lost = call.expire(100_000).unwrap();
        assert_eq!(lost.packets, 3);
        assert_eq!(lost.payload_bits, 3 * 1280);
        assert!(call.take_pending(100_001).is_none());
        call.form_aggregate(100_000, 2, p.d_m_us());
        assert_eq!(call.take_pending(120_000).unwrap().packets, 2);
    }
}
