//! Flat `key = value` scenario files.
//!
//! ```text
//! # saturated 10-node run
//! protocol = proposed
//! K = 10
//! load = 2000
//! seed = 7
//! duration_s = 20
//! sifs_us = 10
//! ```
//!
//! Keys are the scenario fields below plus every [`ProtocolParams`] field.
//! Unknown or repeated keys are errors; `#` starts a comment.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use crate::error::ConfigError;
use crate::params::{ProtocolParams, PARAM_KEYS};
use crate::time::{Micros, MiniSlots};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Protocol {
    Proposed,
    Psm,
    Dcf,
    Edca,
}

impl Protocol {
    pub const ALL: [Protocol; 4] = [Protocol::Proposed, Protocol::Psm, Protocol::Dcf, Protocol::Edca];

    pub fn as_str(&self) -> &'static str {
        match self {
            Protocol::Proposed => "proposed",
            Protocol::Psm => "psm",
            Protocol::Dcf => "dcf",
            Protocol::Edca => "edca",
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Protocol {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "proposed" => Ok(Protocol::Proposed),
            "psm" => Ok(Protocol::Psm),
            "dcf" | "dcf-w" => Ok(Protocol::Dcf),
            "edca" | "edca-w" => Ok(Protocol::Edca),
            other => Err(format!("unknown protocol `{other}`")),
        }
    }
}

/// One simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub protocol: Protocol,
    /// Nodes originating a realtime call.
    pub n_realtime: u32,
    /// Nodes with non-realtime (Poisson) traffic.
    pub k_nonrealtime: u32,
    /// Aggregate non-realtime packet rate over all K nodes.
    pub load_pkts_s: f64,
    pub seed: u64,
    pub duration_s: f64,
    pub warmup_s: f64,
    /// PSM announcement window.
    pub atim_ms: f64,
    /// Realtime frame duration of the proposed protocol.
    pub t_rf_minislots: Option<MiniSlots>,
    /// Probability that a head nominee's confirmation is lost.
    pub head_ack_loss: f64,
    pub params: ProtocolParams,
}

/// Scenario-level keys, in serialisation order.
pub const SCENARIO_KEYS: &[&str] = &[
    "protocol",
    "N",
    "K",
    "load",
    "seed",
    "duration_s",
    "warmup_s",
    "atim_ms",
    "T_rf_minislots",
    "head_ack_loss",
];

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            protocol: Protocol::Proposed,
            n_realtime: 0,
            k_nonrealtime: 10,
            load_pkts_s: 0.0,
            seed: 1,
            duration_s: 20.0,
            warmup_s: 2.0,
            atim_ms: 4.0,
            t_rf_minislots: None,
            head_ack_loss: 0.0,
            params: ProtocolParams::default(),
        }
    }
}

fn parse_num<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::Param {
        line,
        source: crate::error::ParamError::BadValue { key: key.to_string(), value: value.to_string() },
    })
}

/// Splits a config text into `(line_no, key, value)` triples, rejecting
/// malformed lines and duplicate keys.
pub fn parse_pairs(text: &str) -> Result<Vec<(usize, String, String)>, ConfigError> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (k, v) = content.split_once('=').ok_or(ConfigError::Syntax { line })?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() {
            return Err(ConfigError::Syntax { line });
        }
        if !seen.insert(k.to_string()) {
            return Err(ConfigError::DuplicateKey { line, key: k.to_string() });
        }
        out.push((line, k.to_string(), v.to_string()));
    }
    Ok(out)
}

impl ScenarioConfig {
    /// Parses and validates a scenario file.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = ScenarioConfig::default();
        for (line, key, value) in parse_pairs(text)? {
            cfg.apply(line, &key, &value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Assigns one key. Unknown keys are rejected.
    pub fn apply(&mut self, line: usize, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "protocol" => {
                self.protocol = value.parse().map_err(|e: String| ConfigError::Invalid(e))?;
            }
            "N" => self.n_realtime = parse_num(line, key, value)?,
            "K" => self.k_nonrealtime = parse_num(line, key, value)?,
            "load" => self.load_pkts_s = parse_num(line, key, value)?,
            "seed" => self.seed = parse_num(line, key, value)?,
            "duration_s" => self.duration_s = parse_num(line, key, value)?,
            "warmup_s" => self.warmup_s = parse_num(line, key, value)?,
            "atim_ms" => self.atim_ms = parse_num(line, key, value)?,
            "T_rf_minislots" => {
                self.t_rf_minislots = if value.eq_ignore_ascii_case("none") {
                    None
                } else {
                    Some(parse_num(line, key, value)?)
                }
            }
            "head_ack_loss" => self.head_ack_loss = parse_num(line, key, value)?,
            _ => {
                let known = self
                    .params
                    .set(key, value)
                    .map_err(|source| ConfigError::Param { line, source })?;
                if !known {
                    return Err(ConfigError::UnknownKey { line, key: key.to_string() });
                }
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.params.validate().map_err(|source| ConfigError::Param { line: 0, source })?;
        let finite_nonneg = |x: f64| x.is_finite() && x >= 0.0;
        if !finite_nonneg(self.load_pkts_s) {
            return Err(ConfigError::Invalid("load must be finite and non-negative".into()));
        }
        if !(finite_nonneg(self.warmup_s) && self.duration_s.is_finite() && self.duration_s > self.warmup_s) {
            return Err(ConfigError::Invalid("need 0 <= warmup_s < duration_s".into()));
        }
        if self.duration_s > 1.0e5 {
            return Err(ConfigError::Invalid("duration_s above 1e5 s".into()));
        }
        if self.n_realtime + self.k_nonrealtime < 2 || self.n_realtime + self.k_nonrealtime > 10_000 {
            return Err(ConfigError::Invalid("need between 2 and 10000 nodes in total".into()));
        }
        if !(self.atim_ms.is_finite() && self.atim_ms > 0.0 && self.atim_ms <= self.params.t_nb_ms as f64) {
            return Err(ConfigError::Invalid("atim_ms must lie in (0, t_nb_ms]".into()));
        }
        if !(0.0..=1.0).contains(&self.head_ack_loss) {
            return Err(ConfigError::Invalid("head_ack_loss must be a probability".into()));
        }
        if let Some(trf) = self.t_rf_minislots {
            let trf_us = trf as Micros * self.params.mini_slot_us;
            if trf_us >= self.params.t_rb_us() {
                return Err(ConfigError::Invalid(format!(
                    "T_rf ({trf_us} us) must be shorter than the realtime beacon ({} us)",
                    self.params.t_rb_us()
                )));
            }
        }
        Ok(())
    }

    pub fn duration_us(&self) -> Micros {
        (self.duration_s * 1e6).round() as Micros
    }

    pub fn warmup_us(&self) -> Micros {
        (self.warmup_s * 1e6).round() as Micros
    }

    pub fn atim_us(&self) -> Micros {
        (self.atim_ms * 1e3).round() as Micros
    }

    /// Serialises every key; `parse(to_config_string())` reproduces `self`.
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("protocol = {}\n", self.protocol));
        s.push_str(&format!("N = {}\n", self.n_realtime));
        s.push_str(&format!("K = {}\n", self.k_nonrealtime));
        s.push_str(&format!("load = {:?}\n", self.load_pkts_s));
        s.push_str(&format!("seed = {}\n", self.seed));
        s.push_str(&format!("duration_s = {:?}\n", self.duration_s));
        s.push_str(&format!("warmup_s = {:?}\n", self.warmup_s));
        s.push_str(&format!("atim_ms = {:?}\n", self.atim_ms));
        match self.t_rf_minislots {
            Some(t) => s.push_str(&format!("T_rf_minislots = {t}\n")),
            None => s.push_str("T_rf_minislots = none\n"),
        }
        s.push_str(&format!("head_ack_loss = {:?}\n", self.head_ack_loss));
        for key in PARAM_KEYS {
            s.push_str(&format!("{key} = {}\n", self.params.get(key).expect("known key")));
        }
        s
    }
}
