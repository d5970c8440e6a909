//! Per-node radio energy bookkeeping.

use crate::error::EnergyError;
use crate::params::ProtocolParams;
use crate::time::Micros;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RadioMode {
    Transmit,
    Receive,
    Idle,
    Sleep,
}

impl RadioMode {
    pub const ALL: [RadioMode; 4] = [RadioMode::Transmit, RadioMode::Receive, RadioMode::Idle, RadioMode::Sleep];

    fn index(self) -> usize {
        match self {
            RadioMode::Transmit => 0,
            RadioMode::Receive => 1,
            RadioMode::Idle => 2,
            RadioMode::Sleep => 3,
        }
    }
}

/// Power draw of each radio mode in watts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerProfile {
    watts: [f64; 4],
}

impl PowerProfile {
    pub fn from_params(params: &ProtocolParams) -> Self {
        Self {
            watts: [params.power_tx_w, params.power_rx_w, params.power_idle_w, params.power_sleep_w],
        }
    }

    pub fn watts(&self, mode: RadioMode) -> f64 {
        self.watts[mode.index()]
    }
}

/// Accumulated time per radio mode.
///
/// Joules are always derived from the integer mode times, so the ledger can
/// never drift from `sum(mode_time * mode_power)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyLedger {
    power: PowerProfile,
    time_us: [Micros; 4],
}

impl EnergyLedger {
    pub fn new(power: PowerProfile) -> Self {
        Self { power, time_us: [0; 4] }
    }

    /// Adds `duration_us` of `mode`. Negative durations are rejected.
    pub fn accrue(&mut self, mode: RadioMode, duration_us: i64) -> Result<(), EnergyError> {
        if duration_us < 0 {
            return Err(EnergyError::NegativeDuration(duration_us));
        }
        self.time_us[mode.index()] += duration_us as Micros;
        Ok(())
    }

    /// Infallible variant for callers that already hold an unsigned duration.
    pub fn add(&mut self, mode: RadioMode, duration_us: Micros) {
        self.time_us[mode.index()] += duration_us;
    }

    pub fn mode_time_us(&self, mode: RadioMode) -> Micros {
        self.time_us[mode.index()]
    }

    pub fn total_time_us(&self) -> Micros {
        self.time_us.iter().sum()
    }

    pub fn mode_joules(&self, mode: RadioMode) -> f64 {
        self.time_us[mode.index()] as f64 * 1e-6 * self.power.watts(mode)
    }

    pub fn joules(&self) -> f64 {
        RadioMode::ALL.iter().map(|m| self.mode_joules(*m)).sum()
    }

    /// Mode-wise difference `self - earlier`, used to trim warm-up periods.
    pub fn since(&self, earlier: &EnergyLedger) -> EnergyLedger {
        let mut out = self.clone();
        for (o, e) in out.time_us.iter_mut().zip(earlier.time_us) {
            *o -= e;
        }
        out
    }
}
