//! Seeded end-to-end sweeps over generated instances. Each sweep checks one
//! guarantee of the solvers against exact quantities and reports a summary.

use rand::Rng;
use serde::Serialize;

use crate::dist::DiscreteDistribution;
use crate::error::Result;
use crate::gen::{gen_stoch, gen_vs, normalize_lb, StochFamily, VsFamily};
use crate::minnorm::{reduction_bounds_hold, row_properties_hold, solve_min_norm, StochInstance};
use crate::model::{compute_lb, makespan, TOL};
use crate::oracle::{brute_force_stoch_opt, brute_force_vs_opt, exact_expected_topl, OracleBudget};
use crate::seed::{derive_path, rng_from_seed, stream, StreamRng};
use crate::vecsched::{list_schedule, vs_schedule, vs_schedule_with_retries, VsParams};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    pub passed: bool,
    /// Sweep-specific headline number (worst ratio, success fraction, ...).
    pub metric: f64,
    pub metric_name: &'static str,
    pub first_failure: Option<String>,
}

impl SweepReport {
    fn new(name: &'static str, metric_name: &'static str) -> Self {
        SweepReport {
            name,
            cases: 0,
            failures: 0,
            passed: true,
            metric: 0.0,
            metric_name,
            first_failure: None,
        }
    }

    fn record(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            self.passed = false;
            self.first_failure.get_or_insert_with(detail);
        }
    }
}

fn case_rng(seed: u64, sweep: u64, case: usize) -> StreamRng {
    rng_from_seed(derive_path(seed, &[stream::SWEEP, sweep, case as u64]))
}

fn pick<T: Copy>(rng: &mut StreamRng, xs: &[T]) -> T {
    xs[rng.random_range(0..xs.len())]
}

/// Certified makespan `<= 14 max(ln d, 1)` with retries on LB-normalized instances.
pub fn vs_certificate(
    seed: u64,
    count: usize,
    retries: usize,
    max_n: usize,
) -> Result<SweepReport> {
    let mut rep = SweepReport::new("vs-certificate", "max makespan / bound");
    let params = VsParams::default();
    for case in 0..count {
        let mut rng = case_rng(seed, 1, case);
        let m = pick(&mut rng, &[8, 16, 32, 64]);
        let d = pick(&mut rng, &[2, 4, 16, 64]);
        let n = rng.random_range(1..=max_n);
        let family = pick(&mut rng, VsFamily::ALL);
        let inst = normalize_lb(&gen_vs(family, n, m, d, &mut rng)?)?;
        let bound = 14.0 * (d as f64).ln().max(1.0);
        match vs_schedule_with_retries(&inst, &params, &mut rng, retries) {
            Ok((res, _)) => {
                rep.metric = rep.metric.max(res.makespan / bound);
                rep.record(res.makespan <= bound + TOL, || {
                    format!("case {case}: makespan {} > {bound}", res.makespan)
                });
            }
            Err(e) => rep.record(false, || format!("case {case}: {e}")),
        }
    }
    Ok(rep)
}

/// Fraction of single attempts that succeed; passes when at least `min_rate`.
pub fn vs_success_rate(seed: u64, count: usize, min_rate: f64) -> Result<SweepReport> {
    let mut rep = SweepReport::new("vs-success-rate", "success fraction");
    let params = VsParams::default();
    let mut successes = 0;
    for case in 0..count {
        let mut rng = case_rng(seed, 2, case);
        let m = rng.random_range(7..=40);
        let d = rng.random_range(2..=32);
        let n = rng.random_range(m..=20 * m);
        let family = pick(&mut rng, VsFamily::ALL);
        let inst = normalize_lb(&gen_vs(family, n, m, d, &mut rng)?)?;
        rep.cases += 1;
        if vs_schedule(&inst, &params, &mut rng).is_ok_and(|r| r.certified) {
            successes += 1;
        }
    }
    rep.metric = successes as f64 / count.max(1) as f64;
    rep.passed = rep.metric >= min_rate;
    if !rep.passed {
        rep.failures = count - successes;
        rep.first_failure = Some(format!("success fraction {} < {min_rate}", rep.metric));
    }
    Ok(rep)
}

/// `LB <= OPT <= scheduler makespan <= 14 max(ln d, 1) LB` on tiny instances.
pub fn oracle_sandwich(seed: u64, count: usize) -> Result<SweepReport> {
    let mut rep = SweepReport::new("oracle-sandwich", "max makespan / OPT");
    let params = VsParams::default();
    let budget = OracleBudget::default();
    for case in 0..count {
        let mut rng = case_rng(seed, 3, case);
        let n = rng.random_range(1..=9);
        let m = rng.random_range(1..=3);
        let d = rng.random_range(1..=3);
        let inst = gen_vs(pick(&mut rng, VsFamily::ALL), n, m, d, &mut rng)?;
        let lb = compute_lb(&inst);
        let (_, opt) = brute_force_vs_opt(&inst, &budget)?;
        let res = vs_schedule(&inst, &params, &mut rng)?;
        let cap = 14.0 * (d as f64).ln().max(1.0) * lb;
        if opt > 0.0 {
            rep.metric = rep.metric.max(res.makespan / opt);
        }
        let ok = lb <= opt + TOL && opt <= res.makespan + TOL && res.makespan <= cap + TOL;
        rep.record(ok, || {
            format!(
                "case {case}: lb {lb}, opt {opt}, alg {}, cap {cap}",
                res.makespan
            )
        });
    }
    Ok(rep)
}

/// Scalar list scheduling stays within `2 LB`.
pub fn list_schedule_ratio(seed: u64, count: usize) -> Result<SweepReport> {
    let mut rep = SweepReport::new("list-schedule", "max makespan / LB");
    for case in 0..count {
        let mut rng = case_rng(seed, 4, case);
        let n = rng.random_range(1..=50);
        let m = rng.random_range(1..=10);
        let inst = gen_vs(pick(&mut rng, VsFamily::ALL), n, m, 1, &mut rng)?;
        let lb = compute_lb(&inst);
        let value = makespan(&inst, &list_schedule(&inst))?;
        if lb > 0.0 {
            rep.metric = rep.metric.max(value / lb);
        }
        rep.record(value <= 2.0 * lb + TOL, || {
            format!("case {case}: makespan {value} > 2 * {lb}")
        });
    }
    Ok(rep)
}

fn small_dist(rng: &mut StreamRng) -> DiscreteDistribution {
    let k = rng.random_range(1..=4);
    let weights: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    DiscreteDistribution::new(
        weights
            .iter()
            .map(|w| (rng.random_range(0..40) as f64 / 8.0, w / total))
            .collect::<Vec<_>>(),
    )
    .expect("normalized")
}

/// Additivity under convolution, `β_1 = mean`, and `mean <= β_λ <= max`.
pub fn effective_size_calculus(seed: u64, count: usize) -> Result<SweepReport> {
    let mut rep = SweepReport::new("effective-size", "max relative additivity error");
    for case in 0..count {
        let mut rng = case_rng(seed, 5, case);
        let x = small_dist(&mut rng);
        let y = small_dist(&mut rng);
        let s = x.convolve(&y, 1 << 12)?;
        let mut ok = (x.effective_size(1.0) - x.mean()).abs() <= TOL;
        for lambda in [1.0, 2.0, 4.0, 8.0, 64.0] {
            let lhs = s.effective_size(lambda);
            let rhs = x.effective_size(lambda) + y.effective_size(lambda);
            let rel = (lhs - rhs).abs() / rhs.abs().max(1e-300);
            if rhs > 0.0 {
                rep.metric = rep.metric.max(rel);
            }
            ok &= (lhs - rhs).abs() <= 1e-9 * rhs.abs().max(1.0);
            let b = x.effective_size(lambda);
            ok &= x.mean() <= b + TOL && b <= x.max_value() + TOL;
        }
        rep.record(ok, || format!("case {case}: calculus identity failed"));
    }
    Ok(rep)
}

fn random_stoch(rng: &mut StreamRng, max_n: usize, m: usize) -> Result<StochInstance> {
    let n = rng.random_range(1..=max_n);
    gen_stoch(pick(rng, StochFamily::ALL), n, m, rng)
}

/// Threshold pairs satisfy the bracket and predicate properties, and the
/// reduction instance has entries `<= 1/4`, column sums `<= 8m`, `LB <= 8`.
pub fn threshold_profiles(seed: u64, count: usize, epsilon: f64) -> Result<SweepReport> {
    let mut rep = SweepReport::new("threshold-search", "max reduction LB");
    let params = VsParams::default();
    for case in 0..count {
        let mut rng = case_rng(seed, 6, case);
        let m = rng.random_range(1..=16);
        let inst = random_stoch(&mut rng, 30, m)?;
        if inst.kappa() <= 0.0 {
            rep.record(true, String::new);
            continue;
        }
        let sol = solve_min_norm(&inst, epsilon, &mut rng, &params)?;
        let lb = compute_lb(&sol.reduction);
        rep.metric = rep.metric.max(lb);
        let rows_ok = sol
            .profile
            .rows
            .iter()
            .all(|r| row_properties_hold(&inst, r, epsilon));
        let ok = rows_ok && reduction_bounds_hold(&sol.reduction) && lb <= 8.0 + TOL;
        rep.record(ok, || {
            format!("case {case}: threshold or reduction property failed")
        });
    }
    Ok(rep)
}

/// On four machines with up to eight Bernoulli jobs, exact `E[Top-ℓ]` of the
/// returned assignment stays below the certificate for every `ℓ ∈ POS`.
pub fn simultaneity(seed: u64, count: usize, epsilon: f64) -> Result<SweepReport> {
    let mut rep = SweepReport::new("simultaneity", "max E[Top-l] / OPT_l");
    let params = VsParams::default();
    let budget = OracleBudget {
        max_assignments: 4u64.pow(8),
        ..OracleBudget::default()
    };
    for case in 0..count {
        let mut rng = case_rng(seed, 7, case);
        let n = rng.random_range(1..=8);
        let inst = gen_stoch(StochFamily::Bernoulli, n, 4, &mut rng)?;
        let sol = match solve_min_norm(&inst, epsilon, &mut rng, &params) {
            Ok(s) => s,
            Err(e) => {
                rep.record(false, || format!("case {case}: {e}"));
                continue;
            }
        };
        let mut ok = true;
        for row in &sol.certificate.rows {
            let value = exact_expected_topl(&inst, &sol.assignment, row.ell, &budget)?;
            let (_, opt) = brute_force_stoch_opt(&inst, row.ell, &budget)?;
            if opt > 0.0 {
                rep.metric = rep.metric.max(value / opt);
            }
            ok &= value <= row.alg_upper + TOL && opt.is_finite();
        }
        rep.record(ok, || format!("case {case}: certificate exceeded"));
    }
    Ok(rep)
}

pub fn all_sweeps(
    seed: u64,
    scale: usize,
    epsilon: f64,
    retries: usize,
) -> Result<Vec<SweepReport>> {
    Ok(vec![
        vs_certificate(seed, scale, retries, 2000)?,
        vs_success_rate(seed, 2 * scale, 0.55)?,
        oracle_sandwich(seed, scale)?,
        list_schedule_ratio(seed, 2 * scale)?,
        effective_size_calculus(seed, 5 * scale)?,
        threshold_profiles(seed, scale, epsilon)?,
        simultaneity(seed, scale.min(30), epsilon)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sweeps_pass() {
        for rep in all_sweeps(3, 4, 1e-3, 10).unwrap() {
            assert!(rep.passed, "{rep:?}");
            assert!(rep.cases > 0);
        }
    }
}
