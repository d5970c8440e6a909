//! Closed-form contention pmf against brute-force enumeration.

use std::fmt::Write as _;

use beaconmac_analytic::contention::oracle_diff_table;
use beaconmac_analytic::DiffRow;
use beaconmac_sim::format_cell;

use crate::error::CliError;
use crate::experiment::CSV_VERSION;

pub const ORACLE_HEADER: &str = "n1,W,T_cp,t_q,x4,formula,oracle,exact,formula_raw_mass,abs_diff,flagged";

#[derive(Debug, Clone, PartialEq)]
pub struct OracleTable {
    pub rows: Vec<DiffRow>,
    pub tol: f64,
}

impl OracleTable {
    pub fn build(n1_max: u32, w_max: u32, t_q: u32, tol: f64) -> Result<Self, CliError> {
        Ok(Self { rows: oracle_diff_table(n1_max, w_max, t_q)?, tol })
    }

    pub fn max_abs_diff(&self) -> f64 {
        self.rows.iter().map(DiffRow::abs_diff).fold(0.0, f64::max)
    }

    pub fn flagged(&self) -> Vec<&DiffRow> {
        self.rows.iter().filter(|r| r.flagged(self.tol)).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# {CSV_VERSION} kind=oracle tol={}\n{ORACLE_HEADER}\n", self.tol);
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.n1,
                r.w,
                r.t_cp,
                r.t_q,
                r.x4,
                format_cell(r.formula),
                format_cell(r.oracle),
                format_cell(r.exact),
                format_cell(r.formula_raw_mass),
                format_cell(r.abs_diff()),
                r.flagged(self.tol)
            )
            .unwrap();
        }
        out
    }
}
