//! Protocol and radio constants.
//!
//! Defaults reproduce the simulation table used throughout: 20 µs slots,
//! 11/2 Mbps data/basic rates, 100/50 ms beacons, G.711 voice calls and the
//! Cisco Aironet 350 power figures.

use crate::error::ParamError;
use crate::time::Micros;

/// All tunable constants shared by the analysis and the simulator.
///
/// Field names double as keys in the scenario configuration format.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolParams {
    pub mini_slot_us: Micros,
    pub sifs_us: Micros,
    pub difs_us: Micros,
    pub phy_preamble_us: Micros,
    pub data_rate_bps: u64,
    pub basic_rate_bps: u64,
    /// Backoff range of the proposed protocol's contention periods is `[0, W-1]`.
    pub contention_window_w: u32,
    pub cw_min: u32,
    pub cw_max: u32,
    pub retry_limit: u32,
    pub rts_bits: u64,
    pub cts_bits: u64,
    pub ack_bits: u64,
    pub atim_bits: u64,
    pub atim_ack_bits: u64,
    pub sched_entry_bits: u64,
    pub sched_header_bits: u64,
    pub t_rb_ms: u64,
    pub t_nb_ms: u64,
    pub beta: u64,
    pub d_m_ms: u64,
    pub min_contention_ms: u64,
    pub power_tx_w: f64,
    pub power_rx_w: f64,
    pub power_idle_w: f64,
    pub power_sleep_w: f64,
    pub t_on_s: f64,
    pub t_off_s: f64,
    pub t_a_ms: u64,
    pub voice_payload_bits: u64,
    pub udp_bits: u64,
    pub rtp_bits: u64,
    pub ip_bits: u64,
    pub mac_overhead_bits: u64,
    pub data_packet_bits: u64,
    pub vo_cw_min: u32,
    pub vo_cw_max: u32,
    pub vo_aifsn: u32,
    pub vo_txop_us: Micros,
    pub be_cw_min: u32,
    pub be_cw_max: u32,
    pub be_aifsn: u32,
    pub be_txop_us: Micros,
    pub delta_star: f64,
    pub delta_ch: f64,
}

impl Default for ProtocolParams {
    fn default() -> Self {
        Self {
            mini_slot_us: 20,
            sifs_us: 10,
            difs_us: 50,
            phy_preamble_us: 192,
            data_rate_bps: 11_000_000,
            basic_rate_bps: 2_000_000,
            contention_window_w: 32,
            cw_min: 15,
            cw_max: 1023,
            retry_limit: 7,
            rts_bits: 160,
            cts_bits: 112,
            ack_bits: 112,
            atim_bits: 224,
            atim_ack_bits: 112,
            sched_entry_bits: 160,
            sched_header_bits: 160,
            t_rb_ms: 50,
            t_nb_ms: 100,
            beta: 2,
            d_m_ms: 50,
            min_contention_ms: 2,
            power_tx_w: 2.25,
            power_rx_w: 1.25,
            power_idle_w: 1.25,
            power_sleep_w: 0.075,
            t_on_s: 1.8,
            t_off_s: 1.2,
            t_a_ms: 20,
            voice_payload_bits: 160 * 8,
            udp_bits: 8 * 8,
            rtp_bits: 12 * 8,
            ip_bits: 20 * 8,
            mac_overhead_bits: 20 * 8,
            data_packet_bits: 1024 * 8,
            vo_cw_min: 3,
            vo_cw_max: 7,
            vo_aifsn: 2,
            vo_txop_us: 1504,
            be_cw_min: 15,
            be_cw_max: 1023,
            be_aifsn: 3,
            be_txop_us: 0,
            delta_star: 0.01,
            delta_ch: 0.0,
        }
    }
}

macro_rules! param_keys {
    ($($field:ident),* $(,)?) => {
        /// Every configuration key understood by [`ProtocolParams::set`].
        pub const PARAM_KEYS: &[&str] = &[$(stringify!($field)),*];

        impl ProtocolParams {
            /// Assigns one field from its textual form.
            ///
            /// Returns `Ok(false)` if `key` is not a parameter name so callers
            /// can layer their own keys on top.
            pub fn set(&mut self, key: &str, value: &str) -> Result<bool, ParamError> {
                match key {
                    $(stringify!($field) => {
                        self.$field = value.trim().parse().map_err(|_| ParamError::BadValue {
                            key: key.to_string(),
                            value: value.to_string(),
                        })?;
                        Ok(true)
                    })*
                    _ => Ok(false),
                }
            }

            /// Textual form of one field, the inverse of [`ProtocolParams::set`].
            pub fn get(&self, key: &str) -> Option<String> {
                match key {
                    $(stringify!($field) => Some(format!("{:?}", self.$field)),)*
                    _ => None,
                }
            }
        }
    };
}

param_keys!(
    mini_slot_us,
    sifs_us,
    difs_us,
    phy_preamble_us,
    data_rate_bps,
    basic_rate_bps,
    contention_window_w,
    cw_min,
    cw_max,
    retry_limit,
    rts_bits,
    cts_bits,
    ack_bits,
    atim_bits,
    atim_ack_bits,
    sched_entry_bits,
    sched_header_bits,
    t_rb_ms,
    t_nb_ms,
    beta,
    d_m_ms,
    min_contention_ms,
    power_tx_w,
    power_rx_w,
    power_idle_w,
    power_sleep_w,
    t_on_s,
    t_off_s,
    t_a_ms,
    voice_payload_bits,
    udp_bits,
    rtp_bits,
    ip_bits,
    mac_overhead_bits,
    data_packet_bits,
    vo_cw_min,
    vo_cw_max,
    vo_aifsn,
    vo_txop_us,
    be_cw_min,
    be_cw_max,
    be_aifsn,
    be_txop_us,
    delta_star,
    delta_ch,
);

impl ProtocolParams {
    /// Checks the structural invariants every consumer relies on.
    pub fn validate(&self) -> Result<(), ParamError> {
        let positive: [(&str, u64); 9] = [
            ("mini_slot_us", self.mini_slot_us),
            ("phy_preamble_us", self.phy_preamble_us),
            ("data_rate_bps", self.data_rate_bps),
            ("basic_rate_bps", self.basic_rate_bps),
            ("t_rb_ms", self.t_rb_ms),
            ("t_nb_ms", self.t_nb_ms),
            ("d_m_ms", self.d_m_ms),
            ("t_a_ms", self.t_a_ms),
            ("data_packet_bits", self.data_packet_bits),
        ];
        for (key, v) in positive {
            if v == 0 {
                return Err(ParamError::Invariant(format!("{key} must be positive")));
            }
        }
        if self.sifs_us == 0 || self.difs_us == 0 {
            return Err(ParamError::Invariant("inter-frame spaces must be positive".into()));
        }
        if self.contention_window_w == 0 {
            return Err(ParamError::Invariant("contention_window_w must be >= 1".into()));
        }
        if self.cw_min > self.cw_max || self.vo_cw_min > self.vo_cw_max || self.be_cw_min > self.be_cw_max {
            return Err(ParamError::Invariant("cw_min exceeds cw_max".into()));
        }
        if self.beta == 0 || self.t_nb_ms != self.beta * self.t_rb_ms {
            return Err(ParamError::Invariant(format!(
                "t_nb_ms ({}) must equal beta ({}) x t_rb_ms ({})",
                self.t_nb_ms, self.beta, self.t_rb_ms
            )));
        }
        if self.t_rb_ms > self.d_m_ms {
            return Err(ParamError::Invariant("t_rb_ms must not exceed d_m_ms".into()));
        }
        if self.min_contention_ms >= self.t_rb_ms {
            return Err(ParamError::Invariant("min_contention_ms must be below t_rb_ms".into()));
        }
        let p = [self.power_sleep_w, self.power_idle_w, self.power_rx_w, self.power_tx_w];
        if !p.iter().all(|w| w.is_finite() && *w >= 0.0) {
            return Err(ParamError::Invariant("power draws must be finite and non-negative".into()));
        }
        if !(p[0] < p[1] && p[1] <= p[2] && p[2] <= p[3]) {
            return Err(ParamError::Invariant("power ordering sleep < idle <= rx <= tx violated".into()));
        }
        if !(self.t_on_s > 0.0 && self.t_off_s > 0.0 && self.t_on_s.is_finite() && self.t_off_s.is_finite()) {
            return Err(ParamError::Invariant("t_on_s and t_off_s must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.delta_star) || !(0.0..1.0).contains(&self.delta_ch) {
            return Err(ParamError::Invariant("loss targets must lie in [0, 1)".into()));
        }
        Ok(())
    }

    pub fn t_rb_us(&self) -> Micros {
        self.t_rb_ms * 1000
    }

    pub fn t_nb_us(&self) -> Micros {
        self.t_nb_ms * 1000
    }

    pub fn d_m_us(&self) -> Micros {
        self.d_m_ms * 1000
    }

    pub fn t_a_us(&self) -> Micros {
        self.t_a_ms * 1000
    }

    pub fn min_contention_us(&self) -> Micros {
        self.min_contention_ms * 1000
    }

    /// Per-subpacket UDP/RTP/IP header bits.
    pub fn voice_header_bits(&self) -> u64 {
        self.udp_bits + self.rtp_bits + self.ip_bits
    }
}
