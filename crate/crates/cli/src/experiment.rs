//! Grid expansion, parallel dispatch and CSV assembly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;

use beaconmac_analytic::{delta_mac_at, max_allowable_mac_loss, min_frame_duration, FrameSearch};
use beaconmac_core::{Protocol, ProtocolParams, ScenarioConfig};
use beaconmac_sim::{format_cell, run_scenario, RunMetrics, CSV_HEADER};
use rayon::prelude::*;

use crate::error::CliError;
use crate::spec::{AtimChoice, ExperimentKind, ExperimentSpec, FrameChoice};

/// First line of every table.
pub const CSV_VERSION: &str = "beaconmac-csv/1";

/// Columns of the load sweeps and the mixed-traffic table. Summary rows
/// (`mean`, `stddev`) put the replication count in `rep` and the seed base
/// in `seed`. `T_rf_minislots` is 0 for protocols without a realtime frame.
pub fn sim_header() -> String {
    format!("row_type,rep,T_rf_minislots,{CSV_HEADER},total_power_W")
}

/// Columns of the loss sweep. The `mean` row's `delta_sim` is pooled:
/// lost over resolved packets summed across replications.
pub const LOSS_HEADER: &str =
    "row_type,rep,N,K,load_pkts_s,T_rf_minislots,seed,delta_mac_analytic,delta_sim,rt_resolved,rt_lost";

pub const FRAME_HEADER: &str = "N,T_rf_minislots,T_rf_ms,T_rf_per_N,delta_mac";

fn version_line(kind: &str) -> String {
    format!("# {CSV_VERSION} kind={kind}\n")
}

/// Mean of `xs`; infinite if any value is.
pub fn mean(xs: &[f64]) -> f64 {
    if xs.iter().any(|x| x.is_infinite()) {
        return f64::INFINITY;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation, 0 for a single value, infinite if any value is.
pub fn stddev(xs: &[f64]) -> f64 {
    if xs.iter().any(|x| x.is_infinite()) {
        return f64::INFINITY;
    }
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Shortest realtime frame meeting the configured voice loss target.
pub fn frame_minimum(params: &ProtocolParams, n: u32) -> Result<FrameSearch, CliError> {
    let star = max_allowable_mac_loss(params.delta_star, params.delta_ch)?;
    Ok(min_frame_duration(params, n, star)?)
}

/// `frame_minimum` for each distinct N, computed in parallel.
pub fn frame_table(params: &ProtocolParams, ns: &[u32]) -> Result<BTreeMap<u32, FrameSearch>, CliError> {
    let mut distinct = ns.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    distinct
        .par_iter()
        .map(|&n| frame_minimum(params, n).map(|f| (n, f)))
        .collect()
}

/// `reps` runs of `cfg` with seeds `cfg.seed + r`, in replication order.
pub fn run_replications(cfg: &ScenarioConfig, reps: u32) -> Result<Vec<RunMetrics>, CliError> {
    (0..reps)
        .into_par_iter()
        .map(|r| run_scenario(&ScenarioConfig { seed: cfg.seed + r as u64, ..cfg.clone() }).map_err(CliError::from))
        .collect()
}

/// Result of the announcement window sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct BestPsm {
    pub atim_ms: f64,
    /// `(window, mean throughput)` for every candidate, in grid order.
    pub sweep: Vec<(f64, f64)>,
}

/// Runs PSM at every window in `atim_grid` and keeps the one with the
/// highest mean throughput; ties go to the shorter window.
pub fn best_psm(base: &ScenarioConfig, atim_grid: &[f64], reps: u32) -> Result<BestPsm, CliError> {
    if atim_grid.is_empty() {
        return Err(CliError::EmptyGrid("atim_grid"));
    }
    let sweep: Vec<(f64, f64)> = atim_grid
        .par_iter()
        .map(|&atim_ms| {
            let cfg = ScenarioConfig { protocol: Protocol::Psm, atim_ms, ..base.clone() };
            let runs = run_replications(&cfg, reps)?;
            let tput: Vec<f64> = runs.iter().map(|m| m.throughput).collect();
            Ok((atim_ms, mean(&tput)))
        })
        .collect::<Result<_, CliError>>()?;
    let mut best = sweep[0];
    for &(a, t) in &sweep[1..] {
        if t > best.1 || (t == best.1 && a < best.0) {
            best = (a, t);
        }
    }
    Ok(BestPsm { atim_ms: best.0, sweep })
}

/// One row group of a simulation table.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub cfg: ScenarioConfig,
    pub t_rf: u32,
}

/// Expands the grid in file order: K, N, load, protocol, then the
/// protocol's own axis (windows for PSM, frame lengths for the proposed
/// protocol). Frames and best windows are resolved here.
pub fn expand(spec: &ExperimentSpec) -> Result<Vec<Point>, CliError> {
    let frames = match spec.t_rf {
        FrameChoice::Auto if spec.protocols.contains(&Protocol::Proposed) || spec.kind == ExperimentKind::LossVsTrf => {
            frame_table(&spec.base.params, &spec.n)?
        }
        _ => BTreeMap::new(),
    };
    let frames_for = |n: u32| -> Vec<u32> {
        match &spec.t_rf {
            FrameChoice::Auto => vec![frames[&n].t_rf],
            FrameChoice::List(v) => v.clone(),
        }
    };
    let mut points = Vec::new();
    let mut best_slots = Vec::new();
    for &k in &spec.k {
        for &n in &spec.n {
            for &load in &spec.loads {
                let cfg = ScenarioConfig {
                    k_nonrealtime: spec.nodes_k(k, n),
                    n_realtime: n,
                    load_pkts_s: load,
                    seed: spec.seed,
                    ..spec.base.clone()
                };
                let protocols: &[Protocol] =
                    if spec.kind == ExperimentKind::LossVsTrf { &[Protocol::Proposed] } else { &spec.protocols };
                for &protocol in protocols {
                    let cfg = ScenarioConfig { protocol, ..cfg.clone() };
                    match (protocol, &spec.atim) {
                        (Protocol::Psm, AtimChoice::List(v)) => {
                            for &atim_ms in v {
                                points.push(Point { cfg: ScenarioConfig { atim_ms, ..cfg.clone() }, t_rf: 0 });
                            }
                        }
                        (Protocol::Psm, AtimChoice::Best(_)) => {
                            best_slots.push(points.len());
                            points.push(Point { cfg, t_rf: 0 });
                        }
                        (Protocol::Proposed, _) => {
                            for t_rf in frames_for(n) {
                                points.push(Point { cfg: ScenarioConfig { t_rf_minislots: Some(t_rf), ..cfg.clone() }, t_rf });
                            }
                        }
                        _ => points.push(Point { cfg, t_rf: 0 }),
                    }
                }
            }
        }
    }
    if let AtimChoice::Best(grid) = &spec.atim {
        let chosen: Vec<f64> = best_slots
            .par_iter()
            .map(|&i| best_psm(&points[i].cfg, grid, spec.reps).map(|b| b.atim_ms))
            .collect::<Result<_, _>>()?;
        for (&i, atim_ms) in best_slots.iter().zip(chosen) {
            points[i].cfg.atim_ms = atim_ms;
        }
    }
    Ok(points)
}

/// Runs every replication of every point; results keep grid order.
fn simulate(points: &[Point], reps: u32) -> Result<Vec<Vec<RunMetrics>>, CliError> {
    let jobs: Vec<(usize, u32)> = (0..points.len()).flat_map(|i| (0..reps).map(move |r| (i, r))).collect();
    let flat: Vec<RunMetrics> = jobs
        .par_iter()
        .map(|&(i, r)| {
            let cfg = &points[i].cfg;
            run_scenario(&ScenarioConfig { seed: cfg.seed + r as u64, ..cfg.clone() }).map_err(CliError::from)
        })
        .collect::<Result<_, _>>()?;
    Ok(flat.chunks(reps as usize).map(<[RunMetrics]>::to_vec).collect())
}

fn sim_table(spec: &ExperimentSpec) -> Result<String, CliError> {
    let points = expand(spec)?;
    let runs = simulate(&points, spec.reps)?;
    let mut out = version_line(spec.kind.as_str());
    out.push_str(&sim_header());
    out.push('\n');
    for (pt, runs) in points.iter().zip(&runs) {
        for (r, m) in runs.iter().enumerate() {
            writeln!(out, "rep,{r},{},{},{}", pt.t_rf, m.csv_row(), format_cell(m.total_power_w)).unwrap();
        }
        let cols: [fn(&RunMetrics) -> f64; 6] = [
            |m| m.throughput,
            |m| m.energy_per_pkt_j,
            |m| m.mean_delay_s,
            |m| m.rt_loss_rate,
            |m| m.total_energy_j,
            |m| m.total_power_w,
        ];
        for (label, f) in [("mean", mean as fn(&[f64]) -> f64), ("stddev", stddev)] {
            let c = &pt.cfg;
            write!(
                out,
                "{label},{},{},{},{},{},{},{},{}",
                spec.reps, pt.t_rf, c.protocol, c.k_nonrealtime, c.n_realtime, c.load_pkts_s, c.atim_ms, c.seed
            )
            .unwrap();
            for col in cols {
                let xs: Vec<f64> = runs.iter().map(col).collect();
                write!(out, ",{}", format_cell(f(&xs))).unwrap();
            }
            out.push('\n');
        }
    }
    Ok(out)
}

/// Pooled voice loss over a set of runs.
pub fn pooled_loss(runs: &[RunMetrics]) -> f64 {
    let lost: u64 = runs.iter().map(|m| m.counters.rt_lost).sum();
    let resolved: u64 = runs.iter().map(|m| m.counters.rt_lost + m.counters.rt_delivered).sum();
    if resolved == 0 {
        0.0
    } else {
        lost as f64 / resolved as f64
    }
}

/// Analytic loss for every distinct `(N, T_rf)`, in parallel.
pub fn analytic_losses(params: &ProtocolParams, pairs: &[(u32, u32)]) -> Result<BTreeMap<(u32, u32), f64>, CliError> {
    let mut distinct = pairs.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    distinct
        .par_iter()
        .map(|&(n, t)| delta_mac_at(params, n, t).map(|d| ((n, t), d)).map_err(CliError::from))
        .collect()
}

fn loss_table(spec: &ExperimentSpec) -> Result<String, CliError> {
    let points = expand(spec)?;
    let pairs: Vec<(u32, u32)> = points.iter().map(|p| (p.cfg.n_realtime, p.t_rf)).collect();
    let (analytic, runs) = rayon::join(
        || analytic_losses(&spec.base.params, &pairs),
        || simulate(&points, spec.reps),
    );
    let (analytic, runs) = (analytic?, runs?);
    let mut out = version_line(spec.kind.as_str());
    out.push_str(LOSS_HEADER);
    out.push('\n');
    for (pt, runs) in points.iter().zip(&runs) {
        let c = &pt.cfg;
        let a = format_cell(analytic[&(c.n_realtime, pt.t_rf)]);
        let lead = |label: &str, rep: u32, seed: u64| {
            format!("{label},{rep},{},{},{},{},{seed},{a}", c.n_realtime, c.k_nonrealtime, c.load_pkts_s, pt.t_rf)
        };
        let resolved: Vec<f64> = runs.iter().map(|m| (m.counters.rt_lost + m.counters.rt_delivered) as f64).collect();
        let lost: Vec<f64> = runs.iter().map(|m| m.counters.rt_lost as f64).collect();
        let rates: Vec<f64> = runs.iter().map(|m| pooled_loss(std::slice::from_ref(m))).collect();
        for (r, m) in runs.iter().enumerate() {
            writeln!(
                out,
                "{},{},{},{}",
                lead("rep", r as u32, m.seed),
                format_cell(rates[r]),
                resolved[r],
                lost[r]
            )
            .unwrap();
        }
        writeln!(
            out,
            "{},{},{},{}",
            lead("mean", spec.reps, c.seed),
            format_cell(pooled_loss(runs)),
            format_cell(mean(&resolved)),
            format_cell(mean(&lost))
        )
        .unwrap();
        writeln!(
            out,
            "{},{},{},{}",
            lead("stddev", spec.reps, c.seed),
            format_cell(stddev(&rates)),
            format_cell(stddev(&resolved)),
            format_cell(stddev(&lost))
        )
        .unwrap();
    }
    Ok(out)
}

/// The minimum frame table for the N grid.
pub fn frame_csv(params: &ProtocolParams, ns: &[u32]) -> Result<String, CliError> {
    let table = frame_table(params, ns)?;
    let mut out = version_line(ExperimentKind::MinTrfVsN.as_str());
    out.push_str(FRAME_HEADER);
    out.push('\n');
    for &n in ns {
        let f = &table[&n];
        let per_n = if n == 0 { 0.0 } else { f.t_rf as f64 / n as f64 };
        let ms = f.t_rf as f64 * params.mini_slot_us as f64 / 1000.0;
        writeln!(out, "{n},{},{},{},{}", f.t_rf, format_cell(ms), format_cell(per_n), format_cell(f.delta_at)).unwrap();
    }
    Ok(out)
}

/// Builds the table for `spec` without touching the filesystem.
pub fn render_experiment(spec: &ExperimentSpec) -> Result<String, CliError> {
    spec.validate()?;
    match spec.kind {
        ExperimentKind::LossVsTrf => loss_table(spec),
        ExperimentKind::MinTrfVsN => frame_csv(&spec.base.params, &spec.n),
        _ => sim_table(spec),
    }
}

/// Renders the table and writes it to `spec.out` if set. The output file
/// is created before any run so an unwritable path fails fast.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<String, CliError> {
    spec.validate()?;
    if let Some(path) = &spec.out {
        fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    }
    let csv = render_experiment(spec)?;
    if let Some(path) = &spec.out {
        fs::write(path, &csv).map_err(|e| CliError::io(path, e))?;
    }
    Ok(csv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_statistics() {
        assert_eq!(mean(&[1.0, 2.0, 3.0]), 2.0);
        assert_eq!(stddev(&[1.0, 2.0, 3.0]), 1.0);
        assert_eq!(stddev(&[5.0]), 0.0);
        assert!(mean(&[1.0, f64::INFINITY]).is_infinite());
        assert!(stddev(&[1.0, f64::INFINITY]).is_infinite());
    }

    #[test]
    fn grid_order_and_axes() {
        let mut spec = ExperimentSpec::new(ExperimentKind::ThroughputVsLoad);
        spec.loads = vec![100.0, 300.0];
        spec.protocols = vec![Protocol::Psm, Protocol::Dcf, Protocol::Proposed];
        spec.atim = AtimChoice::List(vec![2.0, 8.0]);
        spec.t_rf = FrameChoice::List(vec![0]);
        let pts = expand(&spec).unwrap();
        let got: Vec<(f64, Protocol, f64)> = pts.iter().map(|p| (p.cfg.load_pkts_s, p.cfg.protocol, p.cfg.atim_ms)).collect();
        let d = ScenarioConfig::default().atim_ms;
        assert_eq!(
            got,
            vec![
                (100.0, Protocol::Psm, 2.0),
                (100.0, Protocol::Psm, 8.0),
                (100.0, Protocol::Dcf, d),
                (100.0, Protocol::Proposed, d),
                (300.0, Protocol::Psm, 2.0),
                (300.0, Protocol::Psm, 8.0),
                (300.0, Protocol::Dcf, d),
                (300.0, Protocol::Proposed, d),
            ]
        );
    }

    #[test]
    fn single_window_is_best() {
        let base = ScenarioConfig { k_nonrealtime: 4, load_pkts_s: 100.0, duration_s: 2.0, warmup_s: 0.5, ..Default::default() };
        let b = best_psm(&base, &[6.0], 1).unwrap();
        assert_eq!(b.atim_ms, 6.0);
        assert_eq!(b.sweep.len(), 1);
    }

    #[test]
    fn ties_go_to_the_shorter_window() {
        // no traffic: every window delivers nothing
        let base = ScenarioConfig { k_nonrealtime: 4, load_pkts_s: 0.0, duration_s: 2.0, warmup_s: 0.5, ..Default::default() };
        assert_eq!(best_psm(&base, &[8.0, 4.0, 6.0], 1).unwrap().atim_ms, 4.0);
    }

    #[test]
    fn zero_calls_need_no_frame() {
        let t = frame_table(&ProtocolParams::default(), &[0, 0]).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t[&0].t_rf, 0);
    }
}
