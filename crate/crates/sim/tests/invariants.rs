use beaconmac_core::rng::stream_rng;
use beaconmac_core::time::{ack_airtime, data_frame_airtime};
use beaconmac_core::{PoissonSource, Protocol, ProtocolParams, ScenarioConfig};
use beaconmac_sim::node::Traffic;
use beaconmac_sim::wlan::run_always_awake;
use beaconmac_sim::{run_proposed, run_scenario, RunMetrics, World, CSV_HEADER};
use proptest::prelude::*;

const ALL: [Protocol; 4] = [Protocol::Proposed, Protocol::Psm, Protocol::Dcf, Protocol::Edca];

fn cfg(protocol: Protocol, k: u32, n: u32, load: f64, seed: u64, duration_s: f64) -> ScenarioConfig {
    ScenarioConfig {
        protocol,
        k_nonrealtime: k,
        n_realtime: n,
        load_pkts_s: load,
        seed,
        duration_s,
        warmup_s: 1.0,
        t_rf_minislots: (n > 0).then_some(150),
        ..Default::default()
    }
}

fn conserved(m: &RunMetrics) -> bool {
    let c = &m.counters;
    c.generated_total == c.delivered_total + c.dropped_total + m.queued_at_end.0
        && c.rt_generated_total == c.rt_delivered_total + c.rt_lost_total + m.queued_at_end.1
}

#[test]
fn every_protocol_conserves_packets_and_keeps_the_channel_exclusive() {
    for p in ALL {
        let m = run_scenario(&cfg(p, 6, 3, 400.0, 3, 4.0)).unwrap();
        assert!(conserved(&m), "{p}: {:?} queued {:?}", m.counters, m.queued_at_end);
        assert_eq!(m.exclusivity_violations, 0, "{p}");
        assert!(m.counters.delivered > 0 && m.counters.rt_delivered > 0, "{p}");
        let sum: f64 = m.per_node_energy_j.iter().sum();
        assert!((sum - m.total_energy_j).abs() < 1e-9 * sum.max(1.0));
        let by_mode: f64 = m.energy_by_mode_j.iter().sum();
        assert!((by_mode - m.total_energy_j).abs() < 1e-9 * sum.max(1.0));
    }
}

#[test]
fn light_load_is_carried_by_every_protocol() {
    for p in ALL {
        let m = run_scenario(&cfg(p, 10, 0, 200.0, 1, 12.0)).unwrap();
        assert!((m.throughput - 200.0).abs() < 12.0, "{p}: {}", m.throughput);
    }
}

#[test]
fn single_backlogged_dcf_node_matches_closed_form() {
    let p = ProtocolParams::default();
    let c = ScenarioConfig { protocol: Protocol::Dcf, k_nonrealtime: 2, load_pkts_s: 0.0, duration_s: 3.0, warmup_s: 1.0, ..Default::default() };
    let mut world = World::new(&c);
    let mut rng = stream_rng(9, 0);
    world.nodes[0].traffic = Traffic::Data(PoissonSource::new(5000.0, 0, &mut rng));
    run_always_awake(&mut world, false);
    let m = world.finish(0);
    let mean_backoff = p.cw_min as f64 / 2.0 * p.mini_slot_us as f64;
    let cycle_us = p.difs_us as f64 + mean_backoff + data_frame_airtime(&p) as f64 + p.sifs_us as f64 + ack_airtime(&p) as f64;
    let expected = 1e6 / cycle_us;
    assert!((m.throughput / expected - 1.0).abs() < 0.01, "{} vs {expected}", m.throughput);
}

#[test]
fn psm_with_full_window_is_dcf() {
    let base = cfg(Protocol::Dcf, 10, 0, 500.0, 4, 4.0);
    let dcf = run_scenario(&base).unwrap();
    let psm = run_scenario(&ScenarioConfig { protocol: Protocol::Psm, atim_ms: 100.0, ..base }).unwrap();
    assert_eq!(dcf.counters, psm.counters);
    assert_eq!(dcf.total_energy_j, psm.total_energy_j);
}

#[test]
fn idle_dcf_burns_idle_power_everywhere() {
    let m = run_scenario(&cfg(Protocol::Dcf, 10, 0, 0.0, 1, 5.0)).unwrap();
    let p = ProtocolParams::default();
    assert!((m.total_energy_j - p.power_idle_w * 4.0 * 10.0).abs() < 1e-9);
    assert!(m.energy_per_pkt_j.is_infinite());
    assert!(m.csv_row().contains(",inf,"));
}

#[test]
fn proposed_keeps_contention_period_and_serves_every_request() {
    let c = cfg(Protocol::Proposed, 10, 4, 2000.0, 2, 5.0);
    let mut world = World::new(&c);
    let stats = run_proposed(&mut world, 150);
    assert_eq!(stats.requests_unserved, 0);
    assert_eq!(stats.schedules_overlapping, 0);
    assert!(stats.rts_success > 0);
    let m = world.finish(0);
    let min_cp = m.min_contention_us.unwrap();
    assert!(min_cp >= ProtocolParams::default().min_contention_us(), "{min_cp}");
    assert_eq!(m.exclusivity_violations, 0);
}

#[test]
fn head_stays_when_nominee_never_confirms() {
    let mut c = cfg(Protocol::Proposed, 6, 0, 300.0, 5, 3.0);
    c.head_ack_loss = 1.0;
    let mut w = World::new(&c);
    assert_eq!(run_proposed(&mut w, 0).head_changes, 0);
    c.head_ack_loss = 0.0;
    let mut w = World::new(&c);
    assert!(run_proposed(&mut w, 0).head_changes > 10);
}

#[test]
fn edca_single_call_loses_nothing() {
    let m = run_scenario(&cfg(Protocol::Edca, 1, 1, 0.0, 8, 10.0)).unwrap();
    assert!(m.counters.rt_generated > 0);
    assert_eq!(m.counters.rt_lost, 0);
}

#[test]
fn realtime_frame_must_fit_the_beacon() {
    let mut c = cfg(Protocol::Proposed, 4, 2, 0.0, 1, 3.0);
    c.t_rf_minislots = Some(2500);
    assert!(run_scenario(&c).is_err());
}

#[test]
fn csv_row_matches_header() {
    let m = run_scenario(&cfg(Protocol::Psm, 4, 0, 100.0, 1, 3.0)).unwrap();
    assert_eq!(m.csv_row().split(',').count(), CSV_HEADER.split(',').count());
    assert!(m.csv_row().starts_with("psm,4,0,"));
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]

    #[test]
    fn runs_are_pure_functions_of_the_config(p in 0usize..4, seed in 0u64..1000, k in 2u32..6, n in 0u32..3, load in 0.0f64..900.0) {
        let c = cfg(ALL[p], k, n, load, seed, 2.0);
        let a = run_scenario(&c).unwrap();
        let b = run_scenario(&c).unwrap();
        prop_assert_eq!(a.csv_row(), b.csv_row());
        prop_assert_eq!(&a.counters, &b.counters);
        prop_assert_eq!(&a.per_node_energy_j, &b.per_node_energy_j);
        prop_assert!(conserved(&a));
        prop_assert_eq!(a.exclusivity_violations, 0);
    }
}
