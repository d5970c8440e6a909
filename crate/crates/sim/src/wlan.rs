//! Always-awake 802.11 baselines: DCF and two-category EDCA.

use beaconmac_core::time::{ack_airtime, data_frame_airtime, voice_frame_airtime};
use beaconmac_core::{Micros, ProtocolParams, RadioMode};

use crate::csma::{Access, Csma, Failure, Station};
use crate::event::EventQueue;
use crate::node::{Packet, Traffic};
use crate::world::World;

/// How often radios are settled and the channel record checked.
pub(crate) const SETTLE_EVERY_US: Micros = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Ev {
    Arrival,
    VoiceTick,
    Settle,
}

impl Ev {
    pub(crate) fn priority(self) -> u8 {
        match self {
            Ev::Settle => 0,
            Ev::Arrival => 1,
            Ev::VoiceTick => 2,
        }
    }
}

pub(crate) fn dcf_access(p: &ProtocolParams) -> Access {
    Access { aifs_us: p.difs_us, cw_min: p.cw_min, cw_max: p.cw_max, retry_limit: p.retry_limit, txop_us: 0 }
}

pub(crate) fn voice_access(p: &ProtocolParams) -> Access {
    Access {
        aifs_us: p.sifs_us + p.vo_aifsn as Micros * p.mini_slot_us,
        cw_min: p.vo_cw_min,
        cw_max: p.vo_cw_max,
        retry_limit: p.retry_limit,
        txop_us: p.vo_txop_us,
    }
}

pub(crate) fn best_effort_access(p: &ProtocolParams) -> Access {
    Access {
        aifs_us: p.sifs_us + p.be_aifsn as Micros * p.mini_slot_us,
        cw_min: p.be_cw_min,
        cw_max: p.be_cw_max,
        retry_limit: p.retry_limit,
        txop_us: p.be_txop_us,
    }
}

/// Frame airtimes used by the CSMA engines.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Airtimes {
    pub data: Micros,
    pub voice: Micros,
    pub ack: Micros,
    pub sifs: Micros,
}

impl Airtimes {
    pub(crate) fn new(p: &ProtocolParams) -> Self {
        Self { data: data_frame_airtime(p), voice: voice_frame_airtime(p), ack: ack_airtime(p), sifs: p.sifs_us }
    }

    pub(crate) fn frame(&self, pkt: &Packet) -> Micros {
        if pkt.voice {
            self.voice
        } else {
            self.data
        }
    }

    pub(crate) fn exchange(&self, pkt: &Packet) -> Micros {
        self.frame(pkt) + self.sifs + self.ack
    }
}

/// Seeds the arrival and voice-tick events of every node.
pub(crate) fn seed_traffic(world: &World, q: &mut EventQueue<Ev>) {
    for n in &world.nodes {
        match &n.traffic {
            Traffic::Data(src) => {
                if src.next_arrival() < world.end {
                    q.push(src.next_arrival(), n.id, Ev::Arrival.priority(), Ev::Arrival);
                }
            }
            Traffic::Voice(call) => {
                if let Some(t) = call.ticks_between(0, world.end).next() {
                    q.push(t, n.id, Ev::VoiceTick.priority(), Ev::VoiceTick);
                }
            }
        }
    }
    q.push(SETTLE_EVERY_US.min(world.end), usize::MAX, Ev::Settle.priority(), Ev::Settle);
}

/// Handles a traffic event. Returns the node whose queue got a packet.
pub(crate) fn traffic_event(world: &mut World, q: &mut EventQueue<Ev>, t: Micros, node: usize, ev: Ev) -> Option<Packet> {
    match ev {
        Ev::Arrival => {
            let n = &mut world.nodes[node];
            let Traffic::Data(src) = &mut n.traffic else { return None };
            let a = src.arrive(&mut n.traffic_rng);
            src.queue.pop_back();
            if src.next_arrival() < world.end {
                q.push(src.next_arrival(), node, ev.priority(), ev);
            }
            world.counters.generated(a);
            Some(Packet { arrival: a, voice: false })
        }
        Ev::VoiceTick => {
            let end = world.end;
            let n = &mut world.nodes[node];
            let Traffic::Voice(call) = &mut n.traffic else { return None };
            let on = call.mode_at(t, &mut n.traffic_rng) == beaconmac_core::CallMode::On;
            if let Some(next) = call.ticks_between(t + 1, end).next() {
                q.push(next, node, ev.priority(), ev);
            }
            if on {
                world.counters.rt_generated(1, t);
                Some(Packet { arrival: t, voice: true })
            } else {
                None
            }
        }
        Ev::Settle => None,
    }
}

/// Drops voice packets at the head of station `i` that are past the deadline.
pub(crate) fn expire_voice(world: &mut World, csma: &mut Csma, i: usize, now: Micros) {
    let d_m = world.params().d_m_us();
    let st = &mut csma.stations[i];
    let mut dropped = false;
    while let Some(p) = st.queue.front() {
        if p.voice && now >= p.arrival + d_m {
            world.counters.rt_lost(1, p.arrival);
            st.queue.pop_front();
            dropped = true;
        } else {
            break;
        }
    }
    if dropped && csma.stations[i].queue.is_empty() {
        csma.reset_backoff(i);
    }
}

pub(crate) fn deliver(world: &mut World, pkt: Packet, at: Micros) {
    if pkt.voice {
        world.counters.rt_delivered(1, pkt.arrival);
    } else {
        world.counters.delivered(pkt.arrival, at);
    }
}

pub(crate) fn lose(world: &mut World, pkt: Packet, at: Micros) {
    if pkt.voice {
        world.counters.rt_lost(1, pkt.arrival);
    } else {
        world.counters.dropped(at);
    }
}

/// Resolves a transmission attempt at `t` by the stations in `fired`.
/// Returns when the medium becomes idle again.
pub(crate) fn attempt(world: &mut World, csma: &mut Csma, air: &Airtimes, t: Micros, fired: &[usize], limit: Micros) -> Micros {
    // one node, several queues: the highest priority goes, the rest back off
    let mut senders: Vec<usize> = Vec::new();
    for &i in fired {
        let node = csma.stations[i].node;
        match senders.iter().position(|&j| csma.stations[j].node == node) {
            Some(pos) if csma.stations[senders[pos]].priority < csma.stations[i].priority => {
                let loser = senders[pos];
                senders[pos] = i;
                internal_collision(world, csma, loser, t);
            }
            Some(_) => internal_collision(world, csma, i, t),
            None => senders.push(i),
        }
    }
    if senders.len() == 1 {
        let i = senders[0];
        let node = csma.stations[i].node;
        let dest = world.nodes[node].dest;
        let txop = csma.stations[i].access.txop_us;
        let mut cur = t;
        loop {
            let Some(pkt) = csma.stations[i].queue.front().copied() else { break };
            let ex = air.exchange(&pkt);
            if cur > t && (cur + ex - t > txop || cur + ex > limit) {
                break;
            }
            let frame = air.frame(&pkt);
            world.frame(node, Some(dest), cur, frame, false);
            world.frame(dest, Some(node), cur + frame + air.sifs, air.ack, false);
            csma.stations[i].queue.pop_front();
            deliver(world, pkt, cur + ex);
            cur += ex;
            expire_voice(world, csma, i, cur);
            if txop == 0 {
                break;
            }
            cur += air.sifs;
        }
        let end = if cur > t + air.sifs && txop > 0 { cur - air.sifs } else { cur };
        csma.success(i, &mut world.nodes[node].mac_rng);
        csma.busy(t, end, fired);
        end
    } else {
        let mut longest = 0;
        for &i in &senders {
            let node = csma.stations[i].node;
            let pkt = *csma.stations[i].queue.front().expect("contender has a frame");
            let frame = air.frame(&pkt);
            longest = longest.max(frame);
            world.frame(node, None, t, frame, true);
        }
        let end = t + longest + air.sifs + air.ack;
        for &i in &senders {
            let node = csma.stations[i].node;
            // awaiting an ACK that never comes
            world.mark(node, t, end, RadioMode::Idle);
            if let Failure::Dropped(p) = csma.failure(i, &mut world.nodes[node].mac_rng) {
                lose(world, p, end);
            }
        }
        csma.busy(t, end, fired);
        end
    }
}

fn internal_collision(world: &mut World, csma: &mut Csma, i: usize, t: Micros) {
    let node = csma.stations[i].node;
    if let Failure::Dropped(p) = csma.failure(i, &mut world.nodes[node].mac_rng) {
        lose(world, p, t);
    }
}

/// DCF (`edca = false`) or EDCA with voice and best-effort categories.
/// Every radio stays on for the whole run.
pub fn run_always_awake(world: &mut World, edca: bool) {
    let p = world.params().clone();
    let air = Airtimes::new(&p);
    let mut csma = Csma::new(p.mini_slot_us);
    let mut station_of = vec![0usize; world.nodes.len()];
    for n in &world.nodes {
        let access = match (edca, n.is_voice()) {
            (false, _) => dcf_access(&p),
            (true, true) => voice_access(&p),
            (true, false) => best_effort_access(&p),
        };
        station_of[n.id] = csma.add(Station::new(n.id, u8::from(n.is_voice()), access));
    }
    let end = world.end;
    for i in 0..world.nodes.len() {
        world.mark(i, 0, end, RadioMode::Idle);
    }
    let mut q = EventQueue::new();
    seed_traffic(world, &mut q);
    run_loop(world, &mut csma, &air, &mut q, &station_of, end);
    for st in &mut csma.stations {
        world.nodes[st.node].queue.extend(st.queue.drain(..));
    }
}

fn run_loop(world: &mut World, csma: &mut Csma, air: &Airtimes, q: &mut EventQueue<Ev>, station_of: &[usize], end: Micros) {
    loop {
        let ev_t = q.peek_time().unwrap_or(Micros::MAX);
        let fire = csma.next_fire().unwrap_or(Micros::MAX);
        if ev_t.min(fire) >= end {
            break;
        }
        if ev_t <= fire {
            let (key, ev) = q.pop().expect("peeked");
            if ev == Ev::Settle {
                world.settle(key.time);
                world.medium.flush(csma.idle_since().max(key.time));
                let next = key.time + SETTLE_EVERY_US;
                if next < end {
                    q.push(next, usize::MAX, ev.priority(), ev);
                }
                continue;
            }
            if let Some(pkt) = traffic_event(world, q, key.time, key.node, ev) {
                let i = station_of[key.node];
                csma.stations[i].queue.push_back(pkt);
                let rng = &mut world.nodes[key.node].mac_rng;
                csma.activate(i, key.time, rng);
            }
            continue;
        }
        let fired = csma.firing_at(fire);
        let before: usize = fired.iter().map(|&i| csma.stations[i].queue.len()).sum();
        for &i in &fired {
            expire_voice(world, csma, i, fire);
        }
        let after: usize = fired.iter().map(|&i| csma.stations[i].queue.len()).sum();
        if after < before {
            // expired frames changed the contenders; recompute
            continue;
        }
        attempt(world, csma, air, fire, &fired, Micros::MAX);
    }
}
