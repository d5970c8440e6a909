//! State shared by every protocol engine: nodes, counters, channel record.

use beaconmac_core::rng::stream_rng;
use beaconmac_core::{EnergyLedger, Micros, OnOffCall, PoissonSource, PowerProfile, ProtocolParams, RadioMode, ScenarioConfig};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::medium::Medium;
use crate::metrics::{Counters, RunMetrics};
use crate::node::{NodeSim, Radio, Traffic};

/// Stream index of the protocol-level generator (head choice, destinations).
const PROTOCOL_STREAM: u64 = 1 << 40;

pub struct World {
    pub cfg: ScenarioConfig,
    pub nodes: Vec<NodeSim>,
    pub counters: Counters,
    pub medium: Medium,
    pub end: Micros,
    pub rng: ChaCha8Rng,
    pub min_contention_us: Option<Micros>,
    warm: Option<Vec<EnergyLedger>>,
}

impl World {
    /// Data nodes are `0..K`, voice nodes `K..K+N`. Each node sends to one
    /// fixed destination drawn uniformly among the others.
    pub fn new(cfg: &ScenarioConfig) -> Self {
        let p = &cfg.params;
        let power = PowerProfile::from_params(p);
        let k = cfg.k_nonrealtime as usize;
        let total = k + cfg.n_realtime as usize;
        let mut rng = stream_rng(cfg.seed, PROTOCOL_STREAM);
        let rate = if k > 0 { cfg.load_pkts_s / k as f64 } else { 0.0 };
        let nodes = (0..total)
            .map(|id| {
                let mut traffic_rng = stream_rng(cfg.seed, 2 * id as u64);
                let mac_rng = stream_rng(cfg.seed, 2 * id as u64 + 1);
                let traffic = if id < k {
                    Traffic::Data(PoissonSource::new(rate, 0, &mut traffic_rng))
                } else {
                    Traffic::Voice(OnOffCall::new(p, 0, &mut traffic_rng))
                };
                let mut dest = rng.random_range(0..total - 1);
                if dest >= id {
                    dest += 1;
                }
                NodeSim {
                    id,
                    dest,
                    radio: Radio::new(power, 0),
                    traffic,
                    queue: Default::default(),
                    traffic_rng,
                    mac_rng,
                    is_head: false,
                }
            })
            .collect();
        Self {
            cfg: cfg.clone(),
            nodes,
            counters: Counters::new(cfg.warmup_us()),
            medium: Medium::default(),
            end: cfg.duration_us(),
            rng,
            min_contention_us: None,
            warm: None,
        }
    }

    pub fn params(&self) -> &ProtocolParams {
        &self.cfg.params
    }

    pub fn k(&self) -> usize {
        self.cfg.k_nonrealtime as usize
    }

    pub fn mark(&mut self, node: usize, start: Micros, end: Micros, mode: RadioMode) {
        self.nodes[node].radio.mark(start, end, mode);
    }

    /// A frame from `from` to `to` over `[start, start + len)`.
    pub fn frame(&mut self, from: usize, to: Option<usize>, start: Micros, len: Micros, collided: bool) {
        self.medium.record(start, start + len, from, collided);
        self.mark(from, start, start + len, RadioMode::Transmit);
        if let Some(to) = to {
            self.mark(to, start, start + len, RadioMode::Receive);
        }
    }

    /// Books radio time up to `t`, snapshotting the ledgers at the end of
    /// the warm-up on the way.
    pub fn settle(&mut self, t: Micros) {
        let t = t.min(self.end);
        let warmup = self.counters.warmup;
        if self.warm.is_none() && t >= warmup {
            for n in &mut self.nodes {
                n.radio.settle(warmup);
            }
            self.warm = Some(self.nodes.iter().map(|n| n.radio.ledger().clone()).collect());
        }
        for n in &mut self.nodes {
            n.radio.settle(t);
        }
    }

    pub fn note_contention(&mut self, len: Micros) {
        self.min_contention_us = Some(self.min_contention_us.map_or(len, |m| m.min(len)));
    }

    /// Pulls Poisson arrivals of `node` up to `t`, counting them.
    pub fn pull(&mut self, node: usize, t: Micros) {
        let t = t.min(self.end - 1);
        for a in self.nodes[node].pull_arrivals(t) {
            self.counters.generated(a);
        }
    }

    pub fn finish(mut self, voice_pending: u64) -> RunMetrics {
        let end = self.end;
        for i in 0..self.nodes.len() {
            self.pull(i, end - 1);
        }
        self.settle(end);
        let warm = self.warm.take().expect("warm-up snapshot");
        let window = self.nodes.iter().zip(&warm).map(|(n, w)| n.radio.ledger().since(w)).collect::<Vec<_>>();
        let per_node: Vec<f64> = window.iter().map(|l| l.joules()).collect();
        let total: f64 = per_node.iter().sum();
        let mut by_mode = [0.0; 4];
        for l in &window {
            for (i, m) in RadioMode::ALL.iter().enumerate() {
                by_mode[i] += l.mode_joules(*m);
            }
        }
        let measured_s = (end - self.counters.warmup) as f64 * 1e-6;
        let c = &self.counters;
        let delivered_all = c.delivered + c.rt_delivered;
        let resolved = c.rt_delivered + c.rt_lost;
        let data_queued = self.nodes.iter().map(|n| n.queue.iter().filter(|p| !p.voice).count() as u64).sum();
        let voice_queued = self.nodes.iter().map(|n| n.queue.iter().filter(|p| p.voice).count() as u64).sum::<u64>() + voice_pending;
        let violations = self.medium.exclusivity_violations();
        RunMetrics {
            protocol: self.cfg.protocol,
            k: self.cfg.k_nonrealtime,
            n: self.cfg.n_realtime,
            load_pkts_s: self.cfg.load_pkts_s,
            atim_ms: self.cfg.atim_ms,
            seed: self.cfg.seed,
            measured_s,
            throughput: c.delivered as f64 / measured_s,
            energy_per_pkt_j: if delivered_all > 0 { total / delivered_all as f64 } else { f64::INFINITY },
            mean_delay_s: match (c.delivered, c.generated) {
                (0, 0) => 0.0,
                (0, _) => f64::INFINITY,
                (d, _) => c.delay_sum_us as f64 * 1e-6 / d as f64,
            },
            rt_loss_rate: if resolved > 0 { c.rt_lost as f64 / resolved as f64 } else { 0.0 },
            total_energy_j: total,
            total_power_w: total / measured_s,
            energy_by_mode_j: by_mode,
            per_node_energy_j: per_node,
            counters: self.counters.clone(),
            queued_at_end: (data_queued, voice_queued),
            collided_frames: self.medium.collided_frames(),
            exclusivity_violations: violations,
            min_contention_us: self.min_contention_us,
        }
    }
}
