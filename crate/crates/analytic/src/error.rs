use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum AnalyticError {
    #[error("state {0:?} is infeasible for N = {1}")]
    InfeasibleState([u32; 4], u32),
    #[error("infeasible parameters: {0}")]
    InfeasibleParameters(String),
    #[error("infeasible transition: population {0} would be negative")]
    InfeasibleTransition(&'static str),
    #[error("enumeration too large: n1 = {n1}, W = {w} (limit n1 <= 6, W <= 16)")]
    OracleTooLarge { n1: u32, w: u32 },
    #[error("degenerate chain: {0}")]
    Degenerate(String),
    #[error("steady state did not converge: residual {residual:e}")]
    NonConvergence { residual: f64 },
    #[error("infeasible QoS target: channel loss {delta_ch} exceeds target {delta_star}")]
    InfeasibleQos { delta_star: f64, delta_ch: f64 },
    #[error("capacity exceeded: {n} calls need more than {max_minislots} mini-slots (loss {delta_at_max:.4})")]
    CapacityExceeded { n: u32, max_minislots: u32, delta_at_max: f64 },
    #[error("loss is not monotone around T_rf = {t_rf}: bracketing check failed")]
    BracketViolation { t_rf: u32 },
}
