//! LB-relative randomized vector scheduling and its use for stochastic
//! minimum-norm load balancing on identical machines.
//!
//! - [`model`]: instances, assignments, loads, the natural lower bound, and
//!   ordered norms.
//! - [`vecsched`]: the randomized `O(log d)`-vs-LB scheduler and greedy list
//!   scheduling.
//! - [`dist`]: finite discrete random variables, truncation, effective sizes,
//!   exact convolution.
//! - [`minnorm`]: threshold search and the reduction to vector scheduling.
//! - [`oracle`]: brute-force optima, exact expectations, Monte Carlo, and the
//!   inequality verification suite.
//! - [`sweep`]: seeded end-to-end property sweeps.

pub mod dist;
pub mod error;
pub mod gen;
pub mod minnorm;
pub mod model;
pub mod oracle;
pub mod seed;
pub mod sweep;
pub mod vecsched;

pub use dist::{Atom, DiscreteDistribution};
pub use error::{Error, Result};
pub use minnorm::{
    build_reduction_instance, pos_set, solve_min_norm, solve_min_norm_with, threshold_predicate,
    threshold_search, MinNormCertificate, MinNormSolution, StochInstance, StochJob,
    ThresholdProfile, ThresholdRow,
};
pub use model::{
    compute_lb, load_matrix, makespan, ordered_norm_eval, top_ell, Assignment, LoadMatrix,
    OrderedNorm, VectorJob, VsInstance,
};
pub use oracle::OracleBudget;
pub use vecsched::{
    list_schedule, vs_schedule, vs_schedule_with_retries, ScheduleResult, VsFailure, VsParams,
};
