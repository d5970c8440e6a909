//! Transition matrix of the realtime sender populations.

use std::collections::HashMap;

use beaconmac_core::time::{aggregate_tx_time_tv, request_tx_time_tq, us_to_minislots};
use beaconmac_core::ProtocolParams;

use crate::cf::{cf_pmf, cf_support};
use crate::combin::{binomial_vec, UNDERFLOW};
use crate::contention::{contention_pmf, ContentionModel};
use crate::error::AnalyticError;
use crate::frame::{max_scheduled_m, period_durations};
use crate::state::{StateSpace, SystemState};
use crate::status::{status_change_pmf, switch_populations, switch_probs};

/// Chain parameters, durations in mini-slots.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainParams {
    pub n: u32,
    pub t_rf: u32,
    pub t_v: u32,
    pub t_q: u32,
    pub w: u32,
    pub p: f64,
    pub q: f64,
    pub model: ContentionModel,
}

impl ChainParams {
    /// Derives `t_v`, `t_q`, `W`, `p` and `q` from the protocol constants.
    pub fn from_protocol(params: &ProtocolParams, n: u32, t_rf: u32) -> Self {
        let (p, q) = switch_probs(params.t_rb_ms as f64 * 1e-3, params.t_on_s, params.t_off_s);
        Self {
            n,
            t_rf,
            t_v: us_to_minislots(aggregate_tx_time_tv(params), params),
            t_q: us_to_minislots(request_tx_time_tq(params), params),
            w: params.contention_window_w,
            p,
            q,
            model: ContentionModel::Exact,
        }
    }

    pub fn with_model(mut self, model: ContentionModel) -> Self {
        self.model = model;
        self
    }

    /// Maximum number of aggregates that fit the realtime frame.
    pub fn m_max(&self) -> u32 {
        max_scheduled_m(self.t_rf, self.t_v)
    }
}

/// Row-compressed square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseMatrix {
    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let mut m = Self { dim: rows.len(), row_ptr: vec![0], cols: Vec::new(), vals: Vec::new() };
        for r in rows {
            assert_eq!(r.len(), rows.len(), "matrix must be square");
            for (j, &v) in r.iter().enumerate() {
                if v != 0.0 {
                    m.cols.push(j);
                    m.vals.push(v);
                }
            }
            m.row_ptr.push(m.cols.len());
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|(c, _)| *c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.row(i).map(|(_, v)| v).sum()
    }

    /// `x P` for a row vector `x`.
    pub fn left_mul(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (i, xi) in x.iter().enumerate() {
            if *xi == 0.0 {
                continue;
            }
            for (j, v) in self.row(i) {
                out[j] += xi * v;
            }
        }
        out
    }
}

/// The chain: feasible states and their transition matrix.
#[derive(Debug, Clone)]
pub struct MarkovChain {
    pub params: ChainParams,
    pub space: StateSpace,
    pub matrix: SparseMatrix,
}

impl MarkovChain {
    /// Builds every row by accumulating forward over the tallies `x1..x8`.
    pub fn build(params: ChainParams) -> Result<Self, AnalyticError> {
        if params.t_v == 0 || params.t_q == 0 || params.w == 0 {
            return Err(AnalyticError::InfeasibleParameters("t_v, t_q and W must be positive".into()));
        }
        if !(0.0..=1.0).contains(&params.p) || !(0.0..=1.0).contains(&params.q) {
            return Err(AnalyticError::InfeasibleParameters("switch probabilities must lie in [0, 1]".into()));
        }
        let space = StateSpace::new(params.n);
        let m_max = params.m_max();
        let mut contention_cache: HashMap<(u32, u32), Vec<f64>> = HashMap::new();
        let mut binom_cache: HashMap<(u32, bool), Vec<f64>> = HashMap::new();
        let mut bin = |pop: u32, use_p: bool| -> Vec<f64> {
            binom_cache
                .entry((pop, use_p))
                .or_insert_with(|| binomial_vec(pop, if use_p { params.p } else { params.q }))
                .clone()
        };

        let dim = space.len();
        let mut row = vec![0.0f64; dim];
        let mut touched: Vec<usize> = Vec::new();
        let mut matrix = SparseMatrix { dim, row_ptr: vec![0], cols: Vec::new(), vals: Vec::new() };

        for s in space.states() {
            let (_, t_cp) = period_durations(s, m_max, params.t_rf, params.t_v)?;
            let cont = contention_cache
                .entry((s.n1, t_cp))
                .or_insert_with(|| contention_pmf(params.model, s.n1, t_cp, params.w, params.t_q))
                .clone();
            for ((x1, x2, x3), p_cf) in cf_support(s, m_max) {
                for (x4, &p_ct) in cont.iter().enumerate() {
                    if p_ct == 0.0 {
                        continue;
                    }
                    let x4 = x4 as u32;
                    let pops = switch_populations([x1, x2, x3, x4], s, params.n)?;
                    let (b5, b6, b7, b8) = (bin(pops[0], false), bin(pops[1], true), bin(pops[2], false), bin(pops[3], true));
                    let base = p_cf * p_ct;
                    for (x5, p5) in b5.iter().enumerate().filter(|(_, v)| **v > 0.0) {
                        for (x6, p6) in b6.iter().enumerate().filter(|(_, v)| **v > 0.0) {
                            for (x7, p7) in b7.iter().enumerate().filter(|(_, v)| **v > 0.0) {
                                for (x8, p8) in b8.iter().enumerate().filter(|(_, v)| **v > 0.0) {
                                    let pr = base * p5 * p6 * p7 * p8;
                                    if pr < UNDERFLOW {
                                        continue;
                                    }
                                    let (x5, x6, x7, x8) = (x5 as u32, x6 as u32, x7 as u32, x8 as u32);
                                    let t = SystemState::new(
                                        s.n1 + x8 - x7 - x4,
                                        s.n2 + x4 + x6 - x5,
                                        x5,
                                        s.n4 + x2 - x3 - x6,
                                    );
                                    let j = space.index_of(&t).ok_or(AnalyticError::InfeasibleState(t.as_array(), params.n))?;
                                    if row[j] == 0.0 {
                                        touched.push(j);
                                    }
                                    row[j] += pr;
                                }
                            }
                        }
                    }
                }
            }
            touched.sort_unstable();
            for &j in &touched {
                if row[j] >= UNDERFLOW {
                    matrix.cols.push(j);
                    matrix.vals.push(row[j]);
                }
                row[j] = 0.0;
            }
            touched.clear();
            matrix.row_ptr.push(matrix.cols.len());
        }
        Ok(Self { params, space, matrix })
    }

    /// Largest deviation of a row sum from one.
    pub fn max_row_error(&self) -> f64 {
        (0..self.matrix.dim()).map(|i| (self.matrix.row_sum(i) - 1.0).abs()).fold(0.0, f64::max)
    }

    pub fn probability(&self, s: &SystemState, t: &SystemState) -> f64 {
        match (self.space.index_of(s), self.space.index_of(t)) {
            (Some(i), Some(j)) => self.matrix.get(i, j),
            _ => 0.0,
        }
    }
}

/// `P(s -> t)` by direct enumeration of every tally vector that satisfies
/// the five balance equations, independent of the forward construction.
pub fn transition_probability(s: &SystemState, t: &SystemState, params: &ChainParams) -> Result<f64, AnalyticError> {
    s.check(params.n)?;
    t.check(params.n)?;
    let m_max = params.m_max();
    let (_, t_cp) = period_durations(s, m_max, params.t_rf, params.t_v)?;
    let cont = contention_pmf(params.model, s.n1, t_cp, params.w, params.t_q);
    let x5 = t.n3;
    let d1 = t.n1 as i64 - s.n1 as i64;
    let d2 = t.n2 as i64 - s.n2 as i64;
    let d4 = t.n4 as i64 - s.n4 as i64;
    let mut total = 0.0;
    for x1 in 0..=s.n3 {
        let x2 = s.n3 - x1;
        for x3 in 0..=s.n4 {
            let p_cf = cf_pmf(x1, x2, x3, s, params.n, m_max)?;
            if p_cf == 0.0 {
                continue;
            }
            for x4 in 0..=s.n1 {
                // x6 is fixed by the n2 and n4 balances; they must agree
                let x6 = d2 - x4 as i64 + x5 as i64;
                if x6 < 0 || x2 as i64 - x3 as i64 - x6 != d4 {
                    continue;
                }
                let x6 = x6 as u32;
                for x7 in 0..=s.n1 {
                    let x8 = d1 + x7 as i64 + x4 as i64;
                    if x8 < 0 {
                        continue;
                    }
                    let p_st = match status_change_pmf([x5, x6, x7, x8 as u32], [x1, x2, x3, x4], s, params.n, params.p, params.q) {
                        Ok(v) => v,
                        Err(_) => continue,
                    };
                    total += p_cf * cont[x4 as usize] * p_st;
                }
            }
        }
    }
    Ok(if total < UNDERFLOW { 0.0 } else { total })
}
