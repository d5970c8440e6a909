//! Run counters and the per-run result row.

use beaconmac_core::{Micros, Protocol, RadioMode};

/// Packet accounting. Totals cover the whole run and back the
/// conservation check; the windowed figures skip the warm-up.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Counters {
    pub warmup: Micros,
    pub generated_total: u64,
    pub delivered_total: u64,
    pub dropped_total: u64,
    pub rt_generated_total: u64,
    pub rt_delivered_total: u64,
    pub rt_lost_total: u64,
    pub generated: u64,
    pub delivered: u64,
    pub dropped: u64,
    pub delay_sum_us: u128,
    pub rt_generated: u64,
    pub rt_delivered: u64,
    pub rt_lost: u64,
}

impl Counters {
    pub fn new(warmup: Micros) -> Self {
        Self { warmup, ..Default::default() }
    }

    pub fn generated(&mut self, at: Micros) {
        self.generated_total += 1;
        if at >= self.warmup {
            self.generated += 1;
        }
    }

    pub fn delivered(&mut self, arrival: Micros, at: Micros) {
        self.delivered_total += 1;
        if at >= self.warmup {
            self.delivered += 1;
            self.delay_sum_us += (at - arrival) as u128;
        }
    }

    pub fn dropped(&mut self, at: Micros) {
        self.dropped_total += 1;
        if at >= self.warmup {
            self.dropped += 1;
        }
    }

    /// Voice packets are windowed by generation time.
    pub fn rt_generated(&mut self, packets: u64, generated_at: Micros) {
        self.rt_generated_total += packets;
        if generated_at >= self.warmup {
            self.rt_generated += packets;
        }
    }

    pub fn rt_delivered(&mut self, packets: u64, generated_at: Micros) {
        self.rt_delivered_total += packets;
        if generated_at >= self.warmup {
            self.rt_delivered += packets;
        }
    }

    pub fn rt_lost(&mut self, packets: u64, generated_at: Micros) {
        self.rt_lost_total += packets;
        if generated_at >= self.warmup {
            self.rt_lost += packets;
        }
    }
}

/// Result of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub protocol: Protocol,
    pub k: u32,
    pub n: u32,
    pub load_pkts_s: f64,
    pub atim_ms: f64,
    pub seed: u64,
    pub measured_s: f64,
    /// Delivered non-realtime packets per second.
    pub throughput: f64,
    /// Joules per delivered packet (data and voice), infinite if none.
    pub energy_per_pkt_j: f64,
    /// Mean non-realtime delay in seconds; infinite if packets were generated
    /// but none delivered, zero with no traffic at all.
    pub mean_delay_s: f64,
    /// Lost over resolved voice packets.
    pub rt_loss_rate: f64,
    pub total_energy_j: f64,
    pub total_power_w: f64,
    pub energy_by_mode_j: [f64; 4],
    pub per_node_energy_j: Vec<f64>,
    pub counters: Counters,
    /// Packets still queued at the end (data, voice).
    pub queued_at_end: (u64, u64),
    pub collided_frames: u64,
    pub exclusivity_violations: usize,
    pub min_contention_us: Option<Micros>,
}

/// Written for an infinite energy-per-packet figure.
pub const INFINITE_MARKER: &str = "inf";

pub const CSV_HEADER: &str =
    "protocol,K,N,load_pkts_s,atim_ms,seed,throughput,energy_per_pkt_J,mean_delay_s,rt_loss_rate,total_energy_J";

fn cell(v: f64) -> String {
    if v.is_infinite() {
        INFINITE_MARKER.to_string()
    } else if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v:.12}")
    }
}

impl RunMetrics {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.protocol,
            self.k,
            self.n,
            self.load_pkts_s,
            self.atim_ms,
            self.seed,
            cell(self.throughput),
            cell(self.energy_per_pkt_j),
            cell(self.mean_delay_s),
            cell(self.rt_loss_rate),
            cell(self.total_energy_j),
        )
    }

    pub fn mode_energy(&self, mode: RadioMode) -> f64 {
        let i = RadioMode::ALL.iter().position(|m| *m == mode).unwrap();
        self.energy_by_mode_j[i]
    }
}

pub fn format_cell(v: f64) -> String {
    cell(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn windowed_counts() {
        let mut c = Counters::new(100);
        c.generated(50);
        c.generated(150);
        c.delivered(50, 120);
        c.delivered(150, 160);
        assert_eq!((c.generated_total, c.generated), (2, 1));
        assert_eq!((c.delivered_total, c.delivered), (2, 2));
        assert_eq!(c.delay_sum_us, 70 + 10);
        c.rt_generated(3, 90);
        c.rt_lost(3, 90);
        assert_eq!((c.rt_generated, c.rt_lost, c.rt_lost_total), (0, 0, 3));
    }

    #[test]
    fn cells() {
        assert_eq!(cell(f64::INFINITY), "inf");
        assert_eq!(cell(0.5), "0.500000000000");
    }
}
