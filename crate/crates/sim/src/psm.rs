//! 802.11 power-save mode: an ATIM window at the start of every beacon,
//! then DCF among the announced pairs while everybody else sleeps.

use beaconmac_core::time::frame_airtime;
use beaconmac_core::{Micros, RadioMode};

use crate::csma::{Access, Csma, Station};
use crate::event::EventQueue;
use crate::wlan::{attempt, dcf_access, expire_voice, run_always_awake, seed_traffic, traffic_event, Airtimes, Ev};
use crate::world::World;

/// ATIM, SIFS and ATIM-ACK.
fn atim_exchange(world: &World) -> (Micros, Micros, Micros) {
    let p = world.params();
    let atim = frame_airtime(p.atim_bits, p.basic_rate_bps, p);
    let ack = frame_airtime(p.atim_ack_bits, p.basic_rate_bps, p);
    (atim, ack, atim + p.sifs_us + ack)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Phase {
    Atim,
    Data,
}

pub fn run_psm(world: &mut World) {
    let p = world.params().clone();
    let beacon = p.t_nb_us();
    let window = world.cfg.atim_us();
    if window >= beacon {
        // nobody ever sleeps: plain DCF
        run_always_awake(world, false);
        return;
    }
    let air = Airtimes::new(&p);
    let (atim_air, atim_ack_air, atim_ex) = atim_exchange(world);
    let n = world.nodes.len();
    let end = world.end;

    // ATIM frames retry until the window closes
    let atim_access = Access { retry_limit: u32::MAX, ..dcf_access(&p) };
    let mut atim = Csma::new(p.mini_slot_us);
    let mut data = Csma::new(p.mini_slot_us);
    for i in 0..n {
        atim.add(Station::new(i, 0, atim_access));
        data.add(Station::new(i, 0, dcf_access(&p)));
    }
    let mut q = EventQueue::new();
    seed_traffic(world, &mut q);

    let mut announced = vec![false; n];
    let mut awake = vec![false; n];
    let mut beacon_start = 0;
    let mut phase = Phase::Atim;
    begin_beacon(world, &mut atim, &mut data, 0, window, &mut announced, &mut awake);

    loop {
        let phase_end = match phase {
            Phase::Atim => beacon_start + window,
            Phase::Data => beacon_start + beacon,
        };
        let ev_t = q.peek_time().unwrap_or(Micros::MAX);
        let csma = if phase == Phase::Atim { &mut atim } else { &mut data };
        let fire = csma.next_fire().unwrap_or(Micros::MAX);
        let next = ev_t.min(fire).min(phase_end);
        if next >= end {
            break;
        }
        if phase_end <= ev_t.min(fire) {
            // phase boundary
            match phase {
                Phase::Atim => {
                    phase = Phase::Data;
                    let t = phase_end;
                    for i in 0..n {
                        if awake[i] {
                            world.mark(i, t, beacon_start + beacon, RadioMode::Idle);
                        }
                        data.stations[i].enabled = announced[i];
                    }
                    data.restart(t);
                    for i in 0..n {
                        if announced[i] && !data.stations[i].queue.is_empty() {
                            data.activate(i, t, &mut world.nodes[i].mac_rng);
                        }
                    }
                }
                Phase::Data => {
                    beacon_start += beacon;
                    phase = Phase::Atim;
                    world.settle(beacon_start);
                    world.medium.flush(beacon_start);
                    begin_beacon(world, &mut atim, &mut data, beacon_start, window, &mut announced, &mut awake);
                }
            }
            continue;
        }
        if ev_t <= fire {
            let (key, ev) = q.pop().expect("peeked");
            if ev == Ev::Settle {
                continue;
            }
            if let Some(pkt) = traffic_event(world, &mut q, key.time, key.node, ev) {
                let i = key.node;
                data.stations[i].queue.push_back(pkt);
                match phase {
                    Phase::Atim if !announced[i] => {
                        atim.stations[i].queue.push_back(pkt);
                        atim.stations[i].queue.truncate(1);
                        atim.activate(i, key.time, &mut world.nodes[i].mac_rng);
                    }
                    Phase::Data if announced[i] => data.activate(i, key.time, &mut world.nodes[i].mac_rng),
                    _ => {}
                }
            }
            continue;
        }
        let t = fire;
        match phase {
            Phase::Atim => {
                let fired = atim.firing_at(t);
                if t + atim_ex > phase_end {
                    for &i in &fired {
                        atim.stations[i].enabled = false;
                    }
                    continue;
                }
                if fired.len() == 1 {
                    let i = fired[0];
                    let dest = world.nodes[i].dest;
                    world.frame(i, Some(dest), t, atim_air, false);
                    world.frame(dest, Some(i), t + atim_air + p.sifs_us, atim_ack_air, false);
                    announced[i] = true;
                    awake[i] = true;
                    awake[dest] = true;
                    atim.stations[i].queue.clear();
                    atim.success(i, &mut world.nodes[i].mac_rng);
                    atim.busy(t, t + atim_ex, &fired);
                } else {
                    for &i in &fired {
                        world.frame(i, None, t, atim_air, true);
                        let _ = atim.failure(i, &mut world.nodes[i].mac_rng);
                    }
                    atim.busy(t, t + atim_air + p.sifs_us + atim_ack_air, &fired);
                }
            }
            Phase::Data => {
                let fired = data.firing_at(t);
                let before: usize = fired.iter().map(|&i| data.stations[i].queue.len()).sum();
                for &i in &fired {
                    expire_voice(world, &mut data, i, t);
                }
                let after: usize = fired.iter().map(|&i| data.stations[i].queue.len()).sum();
                if after < before {
                    continue;
                }
                let longest = fired
                    .iter()
                    .map(|&i| air.exchange(data.stations[i].queue.front().expect("contender has a frame")))
                    .max()
                    .unwrap_or(0);
                if t + longest > phase_end {
                    for &i in &fired {
                        data.stations[i].enabled = false;
                    }
                    continue;
                }
                attempt(world, &mut data, &air, t, &fired, phase_end);
            }
        }
    }
    // packets live in the data stations' queues; hand them to the nodes
    for i in 0..n {
        world.nodes[i].queue = std::mem::take(&mut data.stations[i].queue);
    }
}

fn begin_beacon(
    world: &mut World,
    atim: &mut Csma,
    data: &mut Csma,
    t: Micros,
    window: Micros,
    announced: &mut [bool],
    awake: &mut [bool],
) {
    announced.iter_mut().for_each(|a| *a = false);
    awake.iter_mut().for_each(|a| *a = false);
    atim.restart(t);
    for i in 0..world.nodes.len() {
        world.mark(i, t, t + window, RadioMode::Idle);
        let d = world.params().d_m_us();
        // stale voice never gets announced
        while data.stations[i].queue.front().is_some_and(|p| p.voice && t >= p.arrival + d) {
            let p = data.stations[i].queue.pop_front().expect("checked");
            world.counters.rt_lost(1, p.arrival);
        }
        if data.stations[i].queue.is_empty() {
            data.reset_backoff(i);
        }
        atim.stations[i].enabled = true;
        atim.stations[i].queue.clear();
        if let Some(pkt) = data.stations[i].queue.front().copied() {
            atim.stations[i].queue.push_back(pkt);
            atim.activate(i, t, &mut world.nodes[i].mac_rng);
        } else {
            atim.reset_backoff(i);
        }
    }
}
