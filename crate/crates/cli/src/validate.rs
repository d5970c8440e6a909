//! Analysis against simulation on a grid of `(N, T_rf)` points.

use std::fmt::Write as _;

use beaconmac_core::{Protocol, ProtocolParams, ScenarioConfig};
use beaconmac_sim::format_cell;
use rayon::prelude::*;

use crate::error::CliError;
use crate::experiment::{analytic_losses, pooled_loss, run_replications, CSV_VERSION};

pub const VALIDATION_HEADER: &str =
    "N,T_rf_minislots,delta_mac_analytic,delta_sim,abs_diff,tolerance,within_tolerance,analytic_monotone";

/// Accepted gap between simulated and analytic loss.
pub fn tolerance(delta_mac: f64) -> f64 {
    (0.25 * delta_mac).max(0.005)
}

/// Settings shared by every simulated point.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationOptions {
    /// Template run: K, load, duration, warm-up and protocol parameters.
    pub base: ScenarioConfig,
    pub reps: u32,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self {
            base: ScenarioConfig { protocol: Protocol::Proposed, k_nonrealtime: 0, ..Default::default() },
            reps: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationRow {
    pub n: u32,
    pub t_rf: u32,
    pub analytic: f64,
    /// Pooled over the replications.
    pub sim: f64,
    /// Analytic loss did not rise since the previous row with the same N.
    pub monotone: bool,
}

impl ValidationRow {
    pub fn abs_diff(&self) -> f64 {
        (self.sim - self.analytic).abs()
    }

    pub fn tolerance(&self) -> f64 {
        tolerance(self.analytic)
    }

    pub fn within(&self) -> bool {
        self.abs_diff() <= self.tolerance()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub rows: Vec<ValidationRow>,
}

impl ValidationReport {
    /// Rows outside the band or breaking monotonicity.
    pub fn failures(&self) -> Vec<&ValidationRow> {
        self.rows.iter().filter(|r| !r.within() || !r.monotone).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# {CSV_VERSION} kind=validate\n{VALIDATION_HEADER}\n");
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.n,
                r.t_rf,
                format_cell(r.analytic),
                format_cell(r.sim),
                format_cell(r.abs_diff()),
                format_cell(r.tolerance()),
                r.within(),
                r.monotone
            )
            .unwrap();
        }
        out
    }
}

/// Every `N` against every `T_rf`.
pub fn validate_analysis(n_grid: &[u32], t_rf_grid: &[u32], opts: &ValidationOptions) -> Result<ValidationReport, CliError> {
    let points: Vec<(u32, u32)> = n_grid.iter().flat_map(|&n| t_rf_grid.iter().map(move |&t| (n, t))).collect();
    validate_points(&points, opts)
}

/// Explicit `(N, T_rf)` points, reported in the given order.
pub fn validate_points(points: &[(u32, u32)], opts: &ValidationOptions) -> Result<ValidationReport, CliError> {
    if points.is_empty() {
        return Err(CliError::EmptyGrid("N x T_rf"));
    }
    if opts.reps == 0 {
        return Err(CliError::Invalid("reps must be at least 1".into()));
    }
    let analytic = analytic_losses(&opts.base.params, points)?;
    let sims: Vec<f64> = points
        .par_iter()
        .map(|&(n, t_rf)| {
            let cfg = ScenarioConfig {
                protocol: Protocol::Proposed,
                n_realtime: n,
                k_nonrealtime: opts.base.k_nonrealtime.max(2u32.saturating_sub(n)),
                t_rf_minislots: Some(t_rf),
                ..opts.base.clone()
            };
            run_replications(&cfg, opts.reps).map(|runs| pooled_loss(&runs))
        })
        .collect::<Result<_, _>>()?;
    let mut rows: Vec<ValidationRow> = Vec::with_capacity(points.len());
    for (&(n, t_rf), sim) in points.iter().zip(sims) {
        let a = analytic[&(n, t_rf)];
        let prev = rows.iter().rev().find(|r| r.n == n);
        let monotone = prev.is_none_or(|p| t_rf < p.t_rf || a <= p.analytic + 1e-12);
        rows.push(ValidationRow { n, t_rf, analytic: a, sim, monotone });
    }
    Ok(ValidationReport { rows })
}

/// Frame lengths on `[from, to]` in steps of `step` whose analytic loss
/// lies in `[lo, hi]`: the points worth comparing against simulation.
pub fn loss_band(params: &ProtocolParams, n: u32, (from, to, step): (u32, u32, u32), (lo, hi): (f64, f64)) -> Result<Vec<u32>, CliError> {
    let grid: Vec<(u32, u32)> = (from..=to).step_by(step.max(1) as usize).map(|t| (n, t)).collect();
    let losses = analytic_losses(params, &grid)?;
    Ok(grid.iter().filter(|p| (lo..=hi).contains(&losses[p])).map(|p| p.1).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_floor_and_scale() {
        assert_eq!(tolerance(0.0), 0.005);
        assert_eq!(tolerance(0.1), 0.025);
    }

    #[test]
    fn no_calls_no_loss() {
        let opts = ValidationOptions {
            base: ScenarioConfig { duration_s: 3.0, warmup_s: 1.0, k_nonrealtime: 0, ..Default::default() },
            reps: 1,
        };
        let rep = validate_analysis(&[0], &[100], &opts).unwrap();
        assert_eq!(rep.rows[0].analytic, 0.0);
        assert_eq!(rep.rows[0].sim, 0.0);
        assert!(rep.failures().is_empty());
    }

    #[test]
    fn csv_has_one_line_per_row() {
        let r = ValidationReport {
            rows: vec![ValidationRow { n: 4, t_rf: 90, analytic: 0.07, sim: 0.2, monotone: true }],
        };
        let csv = r.to_csv();
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.lines().nth(2).unwrap().ends_with(",false,true"));
        assert_eq!(r.failures().len(), 1);
    }
}
