//! Documents produced by `solve-vs`, `solve-stoch`, `oracle` and `verify`.

use serde::{Deserialize, Serialize};

use crate::format::Placement;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VsConstants {
    pub q_numerator: f64,
    pub threshold_factor: f64,
    pub q_denominator: String,
    /// `L = max(ln d, U, 1)`.
    pub scale_l: f64,
    /// Candidate subsets per round, `ceil(log2(3m))`.
    pub trial_budget: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSummary {
    pub route: String,
    pub makespan: f64,
    pub lb: f64,
    pub bound: f64,
    pub certified: bool,
    pub iterations: usize,
    pub resamples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VsSolution {
    pub kind: String,
    pub seed: u64,
    pub m: usize,
    pub d: usize,
    pub n: usize,
    pub retries: usize,
    pub attempts: usize,
    pub constants: VsConstants,
    pub schedule: ScheduleSummary,
    /// Largest load per machine over all dimensions, indexed from machine 1.
    pub machine_loads: Vec<f64>,
    pub assignment: Vec<Placement>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StochRow {
    pub ell: usize,
    pub lambda: usize,
    pub t: f64,
    pub t_prime: f64,
    pub degenerate: bool,
    pub opt_lower: Option<f64>,
    pub alg_upper: f64,
    pub loose_upper: f64,
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StochSolution {
    pub kind: String,
    pub seed: u64,
    pub m: usize,
    pub n: usize,
    pub epsilon: f64,
    pub retries: usize,
    pub attempts: usize,
    pub pos: Vec<usize>,
    pub alpha: f64,
    pub constants: VsConstants,
    /// Scheduler run on the reduction instance; absent when every job is zero.
    pub schedule: Option<ScheduleSummary>,
    pub rows: Vec<StochRow>,
    pub assignment: Vec<Placement>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub ell: usize,
    pub opt: Option<f64>,
    pub expected: Option<f64>,
    pub monte_carlo: Option<Estimate>,
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub kind: String,
    pub seed: u64,
    pub instance: String,
    pub m: usize,
    pub n: usize,
    pub lb: Option<f64>,
    pub opt: Option<f64>,
    pub makespan: Option<f64>,
    pub rows: Vec<OracleRow>,
    pub norm_expected: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteLine {
    pub name: String,
    pub statement: String,
    pub cases: usize,
    pub violations: usize,
    pub skipped: usize,
    pub max_tightness: Option<f64>,
    pub first_violation: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepLine {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    pub passed: bool,
    pub metric_name: String,
    pub metric: f64,
    pub first_failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub kind: String,
    pub seed: u64,
    pub cases: usize,
    pub sweep_cases: usize,
    pub epsilon: f64,
    pub passed: bool,
    pub total_violations: usize,
    pub suites: Vec<SuiteLine>,
    pub sweeps: Vec<SweepLine>,
}

#[derive(Debug, Deserialize)]
pub struct KindProbe {
    pub kind: String,
}
