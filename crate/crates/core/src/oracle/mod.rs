//! Ground-truth engines for checking the solvers at desk scale: exhaustive
//! optimal assignments, exact expected norms, Monte Carlo estimates, and a
//! randomized suite that evaluates both sides of every inequality the
//! analysis relies on.

mod brute;
mod expect;
pub mod lemmas;

use serde::Serialize;

pub use brute::{brute_force_stoch_opt, brute_force_vs_opt, brute_force_vs_opt_unpruned};
pub use expect::{
    exact_expected_norm, exact_expected_topl, load_distributions, mc_expected_topl,
    product_expected_norm, product_expected_topl, McEstimate,
};
pub use lemmas::{verify_lemma_suite, LemmaReport, SuiteReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OracleBudget {
    pub max_assignments: u64,
    pub max_outcomes: u64,
    pub mc_samples: u64,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            max_assignments: 3u64.pow(10),
            max_outcomes: 1 << 20,
            mc_samples: 100_000,
        }
    }
}

impl OracleBudget {
    pub fn validate(&self) -> crate::Result<()> {
        if self.max_assignments == 0 || self.max_outcomes == 0 || self.mc_samples == 0 {
            return Err(crate::Error::Argument(
                "oracle budgets must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// `m^n`, saturating.
pub(crate) fn assignment_count(m: usize, n: usize) -> u128 {
    (0..n).fold(1u128, |acc, _| acc.saturating_mul(m as u128))
}
