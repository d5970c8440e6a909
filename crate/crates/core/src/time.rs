//! Integer-microsecond time base and frame airtimes.

use crate::params::ProtocolParams;

/// Simulated time and durations, in whole microseconds.
pub type Micros = u64;

/// Durations measured in analysis mini-slots.
pub type MiniSlots = u32;

/// Rounds a duration up to whole mini-slots.
pub fn us_to_minislots(t: Micros, params: &ProtocolParams) -> MiniSlots {
    t.div_ceil(params.mini_slot_us) as MiniSlots
}

pub fn minislots_to_us(slots: MiniSlots, params: &ProtocolParams) -> Micros {
    slots as Micros * params.mini_slot_us
}

/// Non-negative rational number, kept reduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rational {
    num: u64,
    den: u64,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Rational {
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den != 0, "zero denominator");
        let g = gcd(num, den).max(1);
        Self { num: num / g, den: den / g }
    }

    pub fn integer(v: u64) -> Self {
        Self { num: v, den: 1 }
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn add(self, other: Self) -> Self {
        Self::new(self.num * other.den + other.num * self.den, self.den * other.den)
    }

    pub fn mul_int(self, k: u64) -> Self {
        Self::new(self.num * k, self.den)
    }

    pub fn ceil(self) -> u64 {
        self.num.div_ceil(self.den)
    }

    pub fn as_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

/// PHY preamble plus the payload at `rate_bps`, rounded up to a microsecond.
pub fn frame_airtime(bits: u64, rate_bps: u64, params: &ProtocolParams) -> Micros {
    params.phy_preamble_us + Rational::new(bits * 1_000_000, rate_bps).ceil()
}

/// Mean voice packets accumulated per realtime beacon, `T_rb / t_a`.
pub fn packets_per_beacon(params: &ProtocolParams) -> Rational {
    Rational::new(params.t_rb_ms, params.t_a_ms)
}

/// Payload of one aggregated realtime packet, `(T_rb / t_a) * h` bits.
pub fn aggregate_payload_bits(params: &ProtocolParams) -> Rational {
    packets_per_beacon(params).mul_int(params.voice_payload_bits)
}

/// Total bits of a mean-sized aggregate: payload plus UDP/RTP/IP headers for
/// every subpacket, plus a single MAC header.
pub fn aggregate_frame_bits(params: &ProtocolParams) -> Rational {
    aggregate_payload_bits(params)
        .add(packets_per_beacon(params).mul_int(params.voice_header_bits()))
        .add(Rational::integer(params.mac_overhead_bits))
}

/// Airtime of one aggregated realtime packet including the trailing SIFS.
pub fn aggregate_tx_time_tv(params: &ProtocolParams) -> Micros {
    let bits = aggregate_frame_bits(params);
    let payload_us = Rational::new(bits.num() * 1_000_000, bits.den() * params.data_rate_bps).ceil();
    params.phy_preamble_us + payload_us + params.sifs_us
}

/// Airtime of one transmission request (RTS at basic rate) including SIFS.
pub fn request_tx_time_tq(params: &ProtocolParams) -> Micros {
    frame_airtime(params.rts_bits, params.basic_rate_bps, params) + params.sifs_us
}

/// A non-realtime data frame (payload plus MAC header) at the data rate.
pub fn data_frame_airtime(params: &ProtocolParams) -> Micros {
    frame_airtime(params.data_packet_bits + params.mac_overhead_bits, params.data_rate_bps, params)
}

/// A single (non-aggregated) voice frame at the data rate.
pub fn voice_frame_airtime(params: &ProtocolParams) -> Micros {
    frame_airtime(
        params.voice_payload_bits + params.voice_header_bits() + params.mac_overhead_bits,
        params.data_rate_bps,
        params,
    )
}

pub fn ack_airtime(params: &ProtocolParams) -> Micros {
    frame_airtime(params.ack_bits, params.basic_rate_bps, params)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minislot_rounding() {
        let p = ProtocolParams::default();
        assert_eq!(us_to_minislots(282, &p), 15);
        assert_eq!(us_to_minislots(0, &p), 0);
        assert_eq!(us_to_minislots(40, &p), 2);
    }

    #[test]
    fn request_time_table_values() {
        let p = ProtocolParams::default();
        // 192 + 160 bits / 2 Mbps + 10
        assert_eq!(request_tx_time_tq(&p), 282);
        let p0 = ProtocolParams { rts_bits: 0, ..Default::default() };
        assert_eq!(request_tx_time_tq(&p0), 202);
        let p2 = ProtocolParams { basic_rate_bps: 4_000_000, ..Default::default() };
        assert_eq!(request_tx_time_tq(&p2), 242);
    }

    #[test]
    fn aggregate_time_table_values() {
        let p = ProtocolParams::default();
        // payload 2.5 * 1280 = 3200, headers 2.5 * 320 = 800, MAC 160:
        // 4160 bits / 11 Mbps = 378.18.. -> 379, plus 192 + 10.
        assert_eq!(aggregate_frame_bits(&p), Rational::integer(4160));
        assert_eq!(aggregate_tx_time_tv(&p), 581);
        assert_eq!(us_to_minislots(aggregate_tx_time_tv(&p), &p), 30);
    }

    #[test]
    fn aggregate_time_degenerate_payload() {
        let p = ProtocolParams {
            voice_payload_bits: 0,
            udp_bits: 0,
            rtp_bits: 0,
            ip_bits: 0,
            mac_overhead_bits: 0,
            ..Default::default()
        };
        assert_eq!(aggregate_tx_time_tv(&p), 202);
    }

    #[test]
    fn aggregate_payload_is_exact_rational() {
        let p = ProtocolParams::default();
        assert_eq!(aggregate_payload_bits(&p), Rational::integer(3200));
        let odd = ProtocolParams { t_a_ms: 30, ..Default::default() };
        // 50/30 * 1280 = 6400/3
        assert_eq!(aggregate_payload_bits(&odd), Rational::new(6400, 3));
    }

    #[test]
    fn frame_airtimes() {
        let p = ProtocolParams::default();
        assert_eq!(ack_airtime(&p), 248);
        // (8192 + 160) / 11 = 759.27 -> 760
        assert_eq!(data_frame_airtime(&p), 952);
        // 1760 / 11 = 160
        assert_eq!(voice_frame_airtime(&p), 352);
    }

    proptest::proptest! {
        #[test]
        fn rho_matches_cross_multiplication(t_rb in 1u64..200, t_a in 1u64..100, h in 0u64..4000) {
            let p = ProtocolParams { t_rb_ms: t_rb, t_a_ms: t_a, voice_payload_bits: h, ..Default::default() };
            let rho = aggregate_payload_bits(&p);
            proptest::prop_assert_eq!(rho.num() * t_a, rho.den() * t_rb * h);
        }

        #[test]
        fn minislots_is_ceiling(t in 0u64..10_000_000, slot in 1u64..1000) {
            let p = ProtocolParams { mini_slot_us: slot, ..Default::default() };
            let m = us_to_minislots(t, &p) as u64;
            proptest::prop_assert!(m * slot >= t);
            proptest::prop_assert!(m == 0 || (m - 1) * slot < t);
        }
    }
}
