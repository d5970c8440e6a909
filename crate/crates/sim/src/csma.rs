//! Slotted CSMA/CA contention shared by the 802.11 baselines.
//!
//! A station counts down its backoff in idle slots that start `aifs` after
//! the medium became idle. The earliest station(s) to reach zero transmit;
//! the rest freeze with the slots already counted taken off.

use std::collections::VecDeque;

use beaconmac_core::Micros;
use rand::Rng;

use crate::node::Packet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Access {
    pub aifs_us: Micros,
    pub cw_min: u32,
    pub cw_max: u32,
    pub retry_limit: u32,
    pub txop_us: Micros,
}

#[derive(Debug, Clone)]
pub struct Station {
    pub node: usize,
    /// Higher wins when two queues of one node expire together.
    pub priority: u8,
    pub access: Access,
    pub queue: VecDeque<Packet>,
    pub enabled: bool,
    cw: u32,
    retries: u32,
    backoff: Option<u32>,
    resume_at: Micros,
}

impl Station {
    pub fn new(node: usize, priority: u8, access: Access) -> Self {
        Self {
            node,
            priority,
            access,
            queue: VecDeque::new(),
            enabled: true,
            cw: access.cw_min,
            retries: 0,
            backoff: None,
            resume_at: 0,
        }
    }

    pub fn cw(&self) -> u32 {
        self.cw
    }

    pub fn backoff(&self) -> Option<u32> {
        self.backoff
    }
}

#[derive(Debug, Clone)]
pub struct Csma {
    pub stations: Vec<Station>,
    pub slot: Micros,
    idle_since: Micros,
}

/// What happened to a station after a failed attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Failure {
    Retry,
    Dropped(Packet),
}

impl Csma {
    pub fn new(slot: Micros) -> Self {
        Self { stations: Vec::new(), slot, idle_since: 0 }
    }

    pub fn add(&mut self, st: Station) -> usize {
        self.stations.push(st);
        self.stations.len() - 1
    }

    pub fn idle_since(&self) -> Micros {
        self.idle_since
    }

    fn base(&self, i: usize) -> Micros {
        self.idle_since + self.stations[i].access.aifs_us
    }

    /// Makes station `i` contend from `now`, drawing a backoff if it has none.
    pub fn activate<R: Rng + ?Sized>(&mut self, i: usize, now: Micros, rng: &mut R) {
        let base = self.base(i);
        let slot = self.slot;
        let st = &mut self.stations[i];
        if st.backoff.is_none() {
            st.backoff = Some(rng.random_range(0..=st.cw));
            st.resume_at = if now <= base { base } else { base + (now - base).div_ceil(slot) * slot };
        }
    }

    /// Earliest transmission instant of station `i`, if it contends.
    pub fn fire_time(&self, i: usize) -> Option<Micros> {
        let st = &self.stations[i];
        if !st.enabled || st.queue.is_empty() {
            return None;
        }
        st.backoff.map(|b| st.resume_at.max(self.base(i)) + b as Micros * self.slot)
    }

    pub fn next_fire(&self) -> Option<Micros> {
        (0..self.stations.len()).filter_map(|i| self.fire_time(i)).min()
    }

    pub fn firing_at(&self, t: Micros) -> Vec<usize> {
        (0..self.stations.len()).filter(|&i| self.fire_time(i) == Some(t)).collect()
    }

    /// Medium goes busy at `t` until `end`: stations that did not fire keep
    /// the slots they counted and resume `aifs` after `end`.
    pub fn busy(&mut self, t: Micros, end: Micros, fired: &[usize]) {
        for i in 0..self.stations.len() {
            if fired.contains(&i) {
                continue;
            }
            let start = self.stations[i].resume_at.max(self.base(i));
            let slot = self.slot;
            let st = &mut self.stations[i];
            if let Some(b) = st.backoff.as_mut() {
                if st.enabled && !st.queue.is_empty() && t > start {
                    *b -= (((t - start) / slot) as u32).min(*b);
                }
            }
        }
        self.idle_since = end;
        for st in &mut self.stations {
            st.resume_at = end + st.access.aifs_us;
        }
    }

    /// Resets the medium to idle from `t`, e.g. at a phase boundary.
    pub fn restart(&mut self, t: Micros) {
        self.idle_since = t;
        for st in &mut self.stations {
            st.resume_at = t + st.access.aifs_us;
        }
    }

    pub fn success<R: Rng + ?Sized>(&mut self, i: usize, rng: &mut R) {
        let st = &mut self.stations[i];
        st.cw = st.access.cw_min;
        st.retries = 0;
        st.backoff = None;
        if !st.queue.is_empty() {
            st.backoff = Some(rng.random_range(0..=st.cw));
        }
    }

    pub fn failure<R: Rng + ?Sized>(&mut self, i: usize, rng: &mut R) -> Failure {
        let st = &mut self.stations[i];
        st.retries += 1;
        let out = if st.retries > st.access.retry_limit {
            st.retries = 0;
            st.cw = st.access.cw_min;
            Failure::Dropped(st.queue.pop_front().expect("failed station has a frame"))
        } else {
            st.cw = (2 * st.cw + 1).min(st.access.cw_max);
            Failure::Retry
        };
        st.backoff = if st.queue.is_empty() { None } else { Some(rng.random_range(0..=st.cw)) };
        out
    }

    /// Forgets the pending backoff, e.g. when the queue emptied by expiry.
    pub fn reset_backoff(&mut self, i: usize) {
        self.stations[i].backoff = None;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn access() -> Access {
        Access { aifs_us: 50, cw_min: 15, cw_max: 1023, retry_limit: 7, txop_us: 0 }
    }

    fn pkt() -> Packet {
        Packet { arrival: 0, voice: false }
    }

    #[test]
    fn frozen_counter_resumes() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let mut c = Csma::new(20);
        let a = c.add(Station::new(0, 0, access()));
        let b = c.add(Station::new(1, 0, access()));
        for i in [a, b] {
            c.stations[i].queue.push_back(pkt());
            c.activate(i, 0, &mut rng);
        }
        c.stations[a].backoff = Some(2);
        c.stations[b].backoff = Some(5);
        assert_eq!(c.fire_time(a), Some(90));
        assert_eq!(c.fire_time(b), Some(150));
        c.busy(90, 1000, &[a]);
        // b counted two slots before a fired
        assert_eq!(c.stations[b].backoff(), Some(3));
        assert_eq!(c.fire_time(b), Some(1050 + 60));
    }

    #[test]
    fn equal_counters_collide() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let mut c = Csma::new(20);
        for n in 0..2 {
            let i = c.add(Station::new(n, 0, access()));
            c.stations[i].queue.push_back(pkt());
            c.activate(i, 0, &mut rng);
            c.stations[i].backoff = Some(4);
        }
        assert_eq!(c.firing_at(c.next_fire().unwrap()), vec![0, 1]);
    }

    #[test]
    fn late_arrival_aligns_to_slot() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let mut c = Csma::new(20);
        let i = c.add(Station::new(0, 0, access()));
        c.stations[i].queue.push_back(pkt());
        c.activate(i, 75, &mut rng);
        c.stations[i].backoff = Some(0);
        assert_eq!(c.fire_time(i), Some(90));
    }

    #[test]
    fn exponential_backoff_and_drop() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let mut c = Csma::new(20);
        let i = c.add(Station::new(0, 0, access()));
        c.stations[i].queue.push_back(pkt());
        c.activate(i, 0, &mut rng);
        let mut cws = vec![];
        for _ in 0..7 {
            assert_eq!(c.failure(i, &mut rng), Failure::Retry);
            cws.push(c.stations[i].cw());
        }
        assert_eq!(cws, vec![31, 63, 127, 255, 511, 1023, 1023]);
        assert!(matches!(c.failure(i, &mut rng), Failure::Dropped(_)));
        assert_eq!(c.stations[i].cw(), 15);
        assert!(c.stations[i].queue.is_empty());
    }
}
