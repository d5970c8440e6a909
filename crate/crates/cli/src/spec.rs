//! Experiment files: the same `key = value` syntax as scenario files, with
//! comma-separated lists for the swept quantities.
//!
//! ```text
//! kind = throughput_vs_load
//! protocols = proposed, psm, dcf
//! loads = 200, 600, 1000
//! K = 10
//! atim_ms = best
//! reps = 5
//! out = fig3.csv
//! ```
//!
//! Keys: `kind`, `protocols`, `loads`, `K`, `N`, `atim_ms` (list or `best`),
//! `atim_grid` (candidates for `best`), `T_rf_minislots` (list or `auto`),
//! `reps`, `seed`, `duration_s`, `warmup_s`, `head_ack_loss`, `out`, plus
//! every protocol parameter. Omitted grids take per-kind defaults.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use beaconmac_core::config::parse_pairs;
use beaconmac_core::{Protocol, ScenarioConfig};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentKind {
    ThroughputVsLoad,
    EnergyVsLoad,
    DelayVsLoad,
    LossVsTrf,
    MinTrfVsN,
    MixedTraffic,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::ThroughputVsLoad,
        ExperimentKind::EnergyVsLoad,
        ExperimentKind::DelayVsLoad,
        ExperimentKind::LossVsTrf,
        ExperimentKind::MinTrfVsN,
        ExperimentKind::MixedTraffic,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::ThroughputVsLoad => "throughput_vs_load",
            ExperimentKind::EnergyVsLoad => "energy_vs_load",
            ExperimentKind::DelayVsLoad => "delay_vs_load",
            ExperimentKind::LossVsTrf => "loss_vs_Trf",
            ExperimentKind::MinTrfVsN => "min_Trf_vs_N",
            ExperimentKind::MixedTraffic => "mixed_traffic",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown experiment kind `{}`", s.trim()))
    }
}

/// PSM announcement windows to sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum AtimChoice {
    List(Vec<f64>),
    /// One run per point at the throughput-maximising window from the grid.
    Best(Vec<f64>),
}

/// Realtime frame lengths of the proposed protocol.
#[derive(Debug, Clone, PartialEq)]
pub enum FrameChoice {
    /// Shortest frame meeting the loss target, per N.
    Auto,
    List(Vec<u32>),
}

pub const DEFAULT_ATIM_GRID: [f64; 5] = [2.0, 4.0, 6.0, 8.0, 10.0];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub protocols: Vec<Protocol>,
    pub loads: Vec<f64>,
    pub k: Vec<u32>,
    pub n: Vec<u32>,
    pub atim: AtimChoice,
    pub t_rf: FrameChoice,
    pub reps: u32,
    /// Replication `r` runs with seed `seed + r`.
    pub seed: u64,
    pub out: Option<PathBuf>,
    /// Duration, warm-up, head handover loss and protocol parameters shared
    /// by every run.
    pub base: ScenarioConfig,
}

impl ExperimentSpec {
    /// Defaults for `kind`; grids are the desk-scale figure set.
    pub fn new(kind: ExperimentKind) -> Self {
        use ExperimentKind::*;
        let (protocols, loads, k, n, t_rf) = match kind {
            ThroughputVsLoad | EnergyVsLoad | DelayVsLoad => (
                vec![Protocol::Proposed, Protocol::Psm, Protocol::Dcf],
                vec![200.0, 400.0, 600.0, 800.0, 1000.0],
                vec![10],
                vec![0],
                FrameChoice::Auto,
            ),
            LossVsTrf => (
                vec![Protocol::Proposed],
                vec![0.0],
                vec![0],
                vec![6, 8, 10],
                FrameChoice::List((10..=30).map(|i| i * 10).collect()),
            ),
            MinTrfVsN => (vec![Protocol::Proposed], vec![0.0], vec![0], (1..=10).collect(), FrameChoice::Auto),
            MixedTraffic => (
                vec![Protocol::Proposed, Protocol::Edca],
                vec![200.0, 600.0, 1000.0],
                vec![20],
                vec![5, 10],
                FrameChoice::Auto,
            ),
        };
        Self {
            kind,
            protocols,
            loads,
            k,
            n,
            atim: AtimChoice::Best(DEFAULT_ATIM_GRID.to_vec()),
            t_rf,
            reps: 5,
            seed: 1,
            out: None,
            base: ScenarioConfig::default(),
        }
    }

    /// Parses and validates an experiment file. `kind` is required.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let pairs = parse_pairs(text)?;
        let (kind_line, _, kind) = pairs
            .iter()
            .find(|(_, k, _)| k == "kind")
            .ok_or(CliError::Spec { line: 0, msg: "missing `kind`".into() })?;
        let kind = kind.parse().map_err(|msg| CliError::Spec { line: *kind_line, msg })?;
        let mut spec = Self::new(kind);
        for (line, key, value) in &pairs {
            spec.apply(*line, key, value)?;
        }
        spec.validate()?;
        Ok(spec)
    }

    fn apply(&mut self, line: usize, key: &str, value: &str) -> Result<(), CliError> {
        let bad = |msg: String| CliError::Spec { line, msg };
        match key {
            "kind" => {}
            "protocols" => self.protocols = list(value, |s| s.parse::<Protocol>()).map_err(bad)?,
            "loads" => self.loads = list(value, num).map_err(bad)?,
            "K" => self.k = list(value, num).map_err(bad)?,
            "N" => self.n = list(value, num).map_err(bad)?,
            "atim_ms" => {
                self.atim = if value.eq_ignore_ascii_case("best") {
                    match &self.atim {
                        AtimChoice::Best(g) => AtimChoice::Best(g.clone()),
                        AtimChoice::List(_) => AtimChoice::Best(DEFAULT_ATIM_GRID.to_vec()),
                    }
                } else {
                    AtimChoice::List(list(value, num).map_err(bad)?)
                }
            }
            "atim_grid" => {
                let g = list(value, num).map_err(bad)?;
                if let AtimChoice::Best(_) = self.atim {
                    self.atim = AtimChoice::Best(g);
                }
            }
            "T_rf_minislots" => {
                self.t_rf = if value.eq_ignore_ascii_case("auto") {
                    FrameChoice::Auto
                } else {
                    FrameChoice::List(list(value, num).map_err(bad)?)
                }
            }
            "reps" => self.reps = num(value).map_err(bad)?,
            "seed" => self.seed = num(value).map_err(bad)?,
            "out" => self.out = Some(PathBuf::from(value)),
            "protocol" | "load" => return Err(bad(format!("`{key}` is swept here; use `{key}s`"))),
            "duration_s" | "warmup_s" | "head_ack_loss" => self.base.apply(line, key, value)?,
            _ => self.base.apply(line, key, value).map_err(|e| match e {
                beaconmac_core::ConfigError::UnknownKey { line, key } => {
                    CliError::Spec { line, msg: format!("unknown key `{key}`") }
                }
                other => other.into(),
            })?,
        }
        Ok(())
    }

    /// Checks every grid before anything runs.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.protocols.is_empty() {
            return Err(CliError::EmptyGrid("protocols"));
        }
        if self.loads.is_empty() {
            return Err(CliError::EmptyGrid("loads"));
        }
        if self.k.is_empty() {
            return Err(CliError::EmptyGrid("K"));
        }
        if self.n.is_empty() {
            return Err(CliError::EmptyGrid("N"));
        }
        match &self.atim {
            AtimChoice::List(v) if v.is_empty() => return Err(CliError::EmptyGrid("atim_ms")),
            AtimChoice::Best(v) if v.is_empty() => return Err(CliError::EmptyGrid("atim_grid")),
            AtimChoice::Best(v) if v.iter().any(|a| !(2.0..=10.0).contains(a)) => {
                return Err(CliError::Invalid("atim_grid values must lie in [2, 10] ms".into()))
            }
            _ => {}
        }
        if let FrameChoice::List(v) = &self.t_rf {
            if v.is_empty() {
                return Err(CliError::EmptyGrid("T_rf_minislots"));
            }
        }
        if self.reps == 0 {
            return Err(CliError::Invalid("reps must be at least 1".into()));
        }
        if self.seed.checked_add(self.reps as u64).is_none() {
            return Err(CliError::Invalid("seed + reps overflows".into()));
        }
        self.base.validate()?;
        if self.kind != ExperimentKind::MinTrfVsN {
            for cfg in self.sample_configs() {
                cfg.validate()?;
            }
        }
        Ok(())
    }

    /// Non-realtime node count actually simulated. Loss sweeps pad K so
    /// that a lone call (or none) still has a peer to talk to.
    pub fn nodes_k(&self, k: u32, n: u32) -> u32 {
        if self.kind == ExperimentKind::LossVsTrf {
            k.max(2u32.saturating_sub(n))
        } else {
            k
        }
    }

    /// One configuration per grid combination, with a placeholder frame, so
    /// that node counts, loads and windows are checked up front.
    fn sample_configs(&self) -> Vec<ScenarioConfig> {
        let atims = match &self.atim {
            AtimChoice::List(v) | AtimChoice::Best(v) => v.clone(),
        };
        let frames = match &self.t_rf {
            FrameChoice::Auto => vec![None],
            FrameChoice::List(v) => v.iter().map(|t| Some(*t)).collect(),
        };
        let mut out = Vec::new();
        for &k in &self.k {
            for &n in &self.n {
                for &load in &self.loads {
                    for &atim in &atims {
                        for &t_rf in &frames {
                            out.push(ScenarioConfig {
                                k_nonrealtime: self.nodes_k(k, n),
                                n_realtime: n,
                                load_pkts_s: load,
                                atim_ms: atim,
                                t_rf_minislots: t_rf,
                                ..self.base.clone()
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

fn num<T: FromStr>(s: &str) -> Result<T, String> {
    s.parse().map_err(|_| format!("bad number `{s}`"))
}

/// Comma-separated list; empty items are skipped so `loads = ,` is an empty
/// grid rather than a syntax error.
fn list<T, E: ToString>(value: &str, f: impl Fn(&str) -> Result<T, E>) -> Result<Vec<T>, String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| f(s).map_err(|e| e.to_string()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_spec_gets_kind_defaults() {
        let s = ExperimentSpec::parse("kind = mixed_traffic\n").unwrap();
        assert_eq!(s.k, vec![20]);
        assert_eq!(s.n, vec![5, 10]);
        assert_eq!(s.protocols, vec![Protocol::Proposed, Protocol::Edca]);
        assert_eq!(s.reps, 5);
    }

    #[test]
    fn lists_and_overrides() {
        let s = ExperimentSpec::parse(
            "kind = throughput_vs_load\nloads = 100, 200\nprotocols = dcf,psm\natim_ms = 2,4\nreps = 2\nsifs_us = 16\nduration_s = 5\n",
        )
        .unwrap();
        assert_eq!(s.loads, vec![100.0, 200.0]);
        assert_eq!(s.protocols, vec![Protocol::Dcf, Protocol::Psm]);
        assert_eq!(s.atim, AtimChoice::List(vec![2.0, 4.0]));
        assert_eq!(s.base.params.sifs_us, 16);
        assert_eq!(s.base.duration_s, 5.0);
    }

    #[test]
    fn best_window_grid() {
        let s = ExperimentSpec::parse("kind = delay_vs_load\natim_ms = best\natim_grid = 2, 10\n").unwrap();
        assert_eq!(s.atim, AtimChoice::Best(vec![2.0, 10.0]));
        assert!(ExperimentSpec::parse("kind = delay_vs_load\natim_grid = 1\n").is_err());
    }

    #[test]
    fn empty_grids_rejected() {
        assert!(matches!(
            ExperimentSpec::parse("kind = throughput_vs_load\nloads = ,\n"),
            Err(CliError::EmptyGrid("loads"))
        ));
        assert!(matches!(ExperimentSpec::parse("kind = loss_vs_Trf\nN = ,\n"), Err(CliError::EmptyGrid("N"))));
        assert!(ExperimentSpec::parse("kind = loss_vs_Trf\nreps = 0\n").is_err());
    }

    #[test]
    fn errors_carry_lines() {
        match ExperimentSpec::parse("kind = loss_vs_Trf\nloads = 1, x\n") {
            Err(CliError::Spec { line: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(matches!(ExperimentSpec::parse("K = 3\n"), Err(CliError::Spec { line: 0, .. })));
        assert!(matches!(ExperimentSpec::parse("kind = fig9\n"), Err(CliError::Spec { line: 1, .. })));
        assert!(matches!(ExperimentSpec::parse("kind = loss_vs_Trf\nbogus = 1\n"), Err(CliError::Spec { line: 2, .. })));
    }

    proptest::proptest! {
        #[test]
        fn parser_never_panics(kind in 0usize..6, body in "\\PC{0,200}") {
            let text = format!("kind = {}\n{body}", ExperimentKind::ALL[kind]);
            if let Ok(s) = ExperimentSpec::parse(&text) {
                proptest::prop_assert!(s.reps >= 1 && !s.loads.is_empty());
            }
        }
    }

    #[test]
    fn too_few_nodes_rejected_up_front() {
        assert!(ExperimentSpec::parse("kind = throughput_vs_load\nK = 1\n").is_err());
    }
}
