//! Simulated nodes and their radio activity.

use std::collections::VecDeque;

use beaconmac_core::{EnergyLedger, Micros, OnOffCall, PoissonSource, PowerProfile, RadioMode};
use rand_chacha::ChaCha8Rng;

fn rank(mode: RadioMode) -> u8 {
    match mode {
        RadioMode::Transmit => 3,
        RadioMode::Receive => 2,
        RadioMode::Idle => 1,
        RadioMode::Sleep => 0,
    }
}

/// Radio activity as a set of intervals, folded into an energy ledger.
///
/// Where intervals overlap the most active mode wins; uncovered time is
/// sleep. Every microsecond up to the settled point is booked exactly once.
#[derive(Debug, Clone)]
pub struct Radio {
    ledger: EnergyLedger,
    settled: Micros,
    marks: Vec<(Micros, Micros, RadioMode)>,
}

impl Radio {
    pub fn new(power: PowerProfile, start: Micros) -> Self {
        Self { ledger: EnergyLedger::new(power), settled: start, marks: Vec::new() }
    }

    /// Declares `mode` over `[start, end)`. Time already settled is ignored.
    pub fn mark(&mut self, start: Micros, end: Micros, mode: RadioMode) {
        let start = start.max(self.settled);
        if end > start && mode != RadioMode::Sleep {
            self.marks.push((start, end, mode));
        }
    }

    /// Books all time in `[settled, upto)`.
    pub fn settle(&mut self, upto: Micros) {
        if upto <= self.settled {
            return;
        }
        let mut cuts: Vec<Micros> = vec![self.settled, upto];
        for &(s, e, _) in &self.marks {
            if s < upto {
                cuts.push(s.max(self.settled));
                cuts.push(e.min(upto));
            }
        }
        cuts.sort_unstable();
        cuts.dedup();
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let mode = self
                .marks
                .iter()
                .filter(|(s, e, _)| *s <= a && *e >= b)
                .map(|(_, _, m)| *m)
                .max_by_key(|m| rank(*m))
                .unwrap_or(RadioMode::Sleep);
            self.ledger.add(mode, b - a);
        }
        self.settled = upto;
        self.marks.retain(|(_, e, _)| *e > upto);
    }

    pub fn settled(&self) -> Micros {
        self.settled
    }

    pub fn ledger(&self) -> &EnergyLedger {
        &self.ledger
    }
}

/// A packet waiting in a MAC queue.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Packet {
    pub arrival: Micros,
    pub voice: bool,
}

#[derive(Debug, Clone)]
pub enum Traffic {
    Data(PoissonSource),
    Voice(OnOffCall),
}

/// One station of the fully connected network.
#[derive(Debug, Clone)]
pub struct NodeSim {
    pub id: usize,
    pub dest: usize,
    pub radio: Radio,
    pub traffic: Traffic,
    pub queue: VecDeque<Packet>,
    pub traffic_rng: ChaCha8Rng,
    pub mac_rng: ChaCha8Rng,
    pub is_head: bool,
}

impl NodeSim {
    pub fn is_voice(&self) -> bool {
        matches!(self.traffic, Traffic::Voice(_))
    }

    /// Next Poisson arrival, `Micros::MAX` for voice nodes.
    pub fn next_arrival(&self) -> Micros {
        match &self.traffic {
            Traffic::Data(src) => src.next_arrival(),
            Traffic::Voice(_) => Micros::MAX,
        }
    }

    /// Moves every data arrival up to and including `t` into the queue and
    /// returns their timestamps.
    pub fn pull_arrivals(&mut self, t: Micros) -> Vec<Micros> {
        let mut out = Vec::new();
        if let Traffic::Data(src) = &mut self.traffic {
            while src.next_arrival() <= t {
                let a = src.arrive(&mut self.traffic_rng);
                src.queue.pop_back();
                self.queue.push_back(Packet { arrival: a, voice: false });
                out.push(a);
            }
        }
        out
    }

    /// The voice call together with the generator that drives it.
    pub fn call_and_rng(&mut self) -> Option<(&mut OnOffCall, &mut ChaCha8Rng)> {
        match &mut self.traffic {
            Traffic::Voice(c) => Some((c, &mut self.traffic_rng)),
            Traffic::Data(_) => None,
        }
    }

    pub fn call_mut(&mut self) -> Option<&mut OnOffCall> {
        match &mut self.traffic {
            Traffic::Voice(c) => Some(c),
            Traffic::Data(_) => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use beaconmac_core::ProtocolParams;

    fn radio() -> Radio {
        Radio::new(PowerProfile::from_params(&ProtocolParams::default()), 0)
    }

    #[test]
    fn uncovered_time_is_sleep() {
        let mut r = radio();
        r.settle(1000);
        assert_eq!(r.ledger().mode_time_us(RadioMode::Sleep), 1000);
    }

    #[test]
    fn most_active_mode_wins() {
        let mut r = radio();
        r.mark(0, 100, RadioMode::Idle);
        r.mark(10, 20, RadioMode::Transmit);
        r.mark(15, 30, RadioMode::Receive);
        r.settle(200);
        let l = r.ledger();
        assert_eq!(l.mode_time_us(RadioMode::Transmit), 10);
        assert_eq!(l.mode_time_us(RadioMode::Receive), 10);
        assert_eq!(l.mode_time_us(RadioMode::Idle), 80);
        assert_eq!(l.mode_time_us(RadioMode::Sleep), 100);
        assert_eq!(l.total_time_us(), 200);
    }

    #[test]
    fn settling_in_pieces_matches_once() {
        let marks = [(5, 50, RadioMode::Idle), (40, 70, RadioMode::Transmit), (60, 90, RadioMode::Receive)];
        let mut a = radio();
        let mut b = radio();
        for m in marks {
            a.mark(m.0, m.1, m.2);
            b.mark(m.0, m.1, m.2);
        }
        a.settle(100);
        for t in [10, 45, 65, 100] {
            b.settle(t);
        }
        assert_eq!(a.ledger(), b.ledger());
    }

    proptest::proptest! {
        #[test]
        fn booked_time_equals_elapsed(marks in proptest::collection::vec((0u64..1000, 0u64..300, 0usize..4), 0..20),
                                      cuts in proptest::collection::vec(0u64..1500, 0..5)) {
            let mut r = radio();
            for (s, d, m) in marks {
                r.mark(s, s + d, RadioMode::ALL[m]);
            }
            let mut cuts = cuts;
            cuts.sort_unstable();
            for c in cuts {
                r.settle(c);
            }
            r.settle(1500);
            proptest::prop_assert_eq!(r.ledger().total_time_us(), 1500);
        }
    }
}
