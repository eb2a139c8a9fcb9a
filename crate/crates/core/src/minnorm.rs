//! Reduction from stochastic Top-ℓ load balancing (for all ℓ in `POS(m)`
//! simultaneously) to one `|POS(m)|`-dimensional vector-scheduling instance.
//!
//! For each `ℓ` a threshold `t_ℓ` is located on a geometric grid such that
//! both the exceptional mass and the truncated effective sizes fit their
//! budgets at `t_ℓ` but not at the grid point just below. Job `j` then gets
//! the size vector `p_{j,ℓ} = β_{λ_ℓ}(X_j^{<t_ℓ} / 4 t_ℓ)`, whose lower bound
//! is at most 8, and a single call to an LB-relative scheduler finishes the job.

use rand::RngCore;
use serde::Serialize;
use std::collections::HashSet;

use crate::dist::DiscreteDistribution;
use crate::error::{Error, Result};
use crate::model::{makespan, Assignment, VectorJob, VsInstance, TOL};
use crate::vecsched::{RandomizedScheduler, ScheduleResult, VectorScheduler, VsParams};

pub const DEFAULT_EPSILON: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StochJob {
    pub id: String,
    pub dist: DiscreteDistribution,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StochInstance {
    m: usize,
    jobs: Vec<StochJob>,
}

impl StochInstance {
    pub fn new(m: usize, jobs: Vec<StochJob>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidInstance(
                "machine count must be at least 1".into(),
            ));
        }
        let mut seen = HashSet::with_capacity(jobs.len());
        for job in &jobs {
            if !seen.insert(job.id.as_str()) {
                return Err(Error::InvalidInstance(format!(
                    "duplicate job id {:?}",
                    job.id
                )));
            }
        }
        Ok(StochInstance { m, jobs })
    }

    /// Name jobs `j0, j1, ...`.
    pub fn from_dists(m: usize, dists: Vec<DiscreteDistribution>) -> Result<Self> {
        let jobs = dists
            .into_iter()
            .enumerate()
            .map(|(i, dist)| StochJob {
                id: format!("j{i}"),
                dist,
            })
            .collect();
        StochInstance::new(m, jobs)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.jobs.len()
    }

    pub fn jobs(&self) -> &[StochJob] {
        &self.jobs
    }

    pub fn dists(&self) -> impl Iterator<Item = &DiscreteDistribution> {
        self.jobs.iter().map(|j| &j.dist)
    }

    /// `κ = max_j E[X_j]`.
    pub fn kappa(&self) -> f64 {
        self.dists()
            .map(DiscreteDistribution::mean)
            .fold(0.0, f64::max)
    }
}

/// `{1, 2, 4, ..., 2^floor(log2 m)}`.
pub fn pos_set(m: usize) -> Vec<usize> {
    assert!(m >= 1, "POS needs m >= 1");
    std::iter::successors(Some(1usize), |&l| l.checked_mul(2))
        .take_while(|&l| l <= m)
        .collect()
}

/// `λ_ℓ = floor(2m / ℓ)`.
pub fn lambda_for(m: usize, ell: usize) -> usize {
    2 * m / ell
}

/// The truncated, rescaled job whose effective size enters the reduction.
pub fn reduced_job(x: &DiscreteDistribution, theta: f64) -> DiscreteDistribution {
    x.truncate(theta).scale(1.0 / (4.0 * theta))
}

/// Both sides of the threshold test at scale `θ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdSums {
    /// `Σ_j E[X_j^{>=θ}]`, compared against `ℓ θ`.
    pub exceptional: f64,
    /// `Σ_j β_λ(X_j^{<θ} / 4θ)`, compared against `8 m`.
    pub effective: f64,
}

pub fn threshold_sums(inst: &StochInstance, ell: usize, theta: f64) -> ThresholdSums {
    let lambda = lambda_for(inst.m, ell) as f64;
    let mut exceptional = 0.0;
    let mut effective = 0.0;
    for x in inst.dists() {
        exceptional += x.exceptional_mean(theta);
        effective += reduced_job(x, theta).effective_size(lambda);
    }
    ThresholdSums {
        exceptional,
        effective,
    }
}

/// True iff both `Σ_j E[X_j^{>=θ}] <= ℓθ` and `Σ_j β_λ(X_j^{<θ}/4θ) <= 8m`.
pub fn threshold_predicate(inst: &StochInstance, ell: usize, theta: f64) -> bool {
    let s = threshold_sums(inst, ell, theta);
    s.exceptional <= ell as f64 * theta && s.effective <= 8.0 * inst.m as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdRow {
    pub ell: usize,
    pub lambda: usize,
    pub t: f64,
    pub t_prime: f64,
    /// The predicate already held at the bottom of the search interval, so
    /// `t_prime` is not a certified failure point.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdProfile {
    pub epsilon: f64,
    pub rows: Vec<ThresholdRow>,
}

/// Find adjacent points `t' < t <= (1+ε) t'` on the grid `low (1+ε)^k`,
/// `low = κ/(m+2)`, reaching past `hi = 2nκ`, with the predicate false at `t'`
/// and true at `t`.
pub fn threshold_search(inst: &StochInstance, ell: usize, epsilon: f64) -> Result<ThresholdRow> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Argument(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if ell == 0 || ell > inst.m {
        return Err(Error::Argument(format!(
            "ell must be in 1..={}, got {ell}",
            inst.m
        )));
    }
    let kappa = inst.kappa();
    if kappa <= 0.0 {
        return Err(Error::Search("all jobs are zero almost surely".into()));
    }
    let lambda = lambda_for(inst.m, ell);
    let low = kappa / (inst.m as f64 + 2.0);
    let hi = 2.0 * inst.n() as f64 * kappa;
    let step = 1.0 + epsilon;
    let top = ((hi / low).ln() / epsilon.ln_1p()).ceil().max(1.0) as i32;
    let grid = |k: i32| low * step.powi(k);
    let pred = |theta: f64| threshold_predicate(inst, ell, theta);

    if pred(low) {
        return Ok(ThresholdRow {
            ell,
            lambda,
            t: low,
            t_prime: low / step,
            degenerate: true,
        });
    }
    if !pred(grid(top)) {
        return Err(Error::Search(format!(
            "predicate fails at the top of the grid ({}) for ell = {ell}",
            grid(top)
        )));
    }
    let (mut lo, mut up) = (0i32, top);
    while up - lo > 1 {
        let mid = lo + (up - lo) / 2;
        if pred(grid(mid)) {
            up = mid;
        } else {
            lo = mid;
        }
    }
    let t_prime = grid(lo);
    let stepped = t_prime * step;
    let t = if stepped > t_prime && pred(stepped) {
        stepped
    } else {
        grid(up)
    };
    Ok(ThresholdRow {
        ell,
        lambda,
        t,
        t_prime,
        degenerate: false,
    })
}

pub fn threshold_profile(inst: &StochInstance, epsilon: f64) -> Result<ThresholdProfile> {
    let rows = pos_set(inst.m)
        .into_iter()
        .map(|ell| threshold_search(inst, ell, epsilon))
        .collect::<Result<Vec<_>>>()?;
    Ok(ThresholdProfile { epsilon, rows })
}

/// One dimension per profile row: `p_{j,ℓ} = β_{λ_ℓ}(X_j^{<t_ℓ} / 4 t_ℓ)`.
pub fn build_reduction_instance(
    inst: &StochInstance,
    profile: &ThresholdProfile,
) -> Result<VsInstance> {
    let jobs = inst
        .jobs()
        .iter()
        .map(|job| {
            let p = profile
                .rows
                .iter()
                .map(|row| reduced_job(&job.dist, row.t).effective_size(row.lambda as f64))
                .collect();
            VectorJob::new(job.id.clone(), p)
        })
        .collect();
    VsInstance::new(inst.m, profile.rows.len().max(1), jobs)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateRow {
    pub ell: usize,
    pub t: f64,
    /// `ℓ t'_ℓ / 2`, absent when the search was degenerate.
    pub opt_lower: Option<f64>,
    /// `2 ℓ t_ℓ + 8 (α + 3) ℓ t_ℓ`.
    pub alg_upper: f64,
    /// `2 ℓ t_ℓ + 32 α ℓ t_ℓ`.
    pub loose_upper: f64,
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinNormCertificate {
    /// `max(1, makespan of the assignment under the reduction sizes)`.
    pub alpha: f64,
    pub rows: Vec<CertificateRow>,
}

impl MinNormCertificate {
    pub fn from_profile(profile: &ThresholdProfile, alpha: f64) -> Self {
        let rows = profile
            .rows
            .iter()
            .map(|row| {
                let scale = row.ell as f64 * row.t;
                let alg_upper = 2.0 * scale + 8.0 * (alpha + 3.0) * scale;
                let opt_lower = (!row.degenerate).then(|| row.ell as f64 * row.t_prime / 2.0);
                CertificateRow {
                    ell: row.ell,
                    t: row.t,
                    opt_lower,
                    alg_upper,
                    loose_upper: 2.0 * scale + 32.0 * alpha * scale,
                    ratio: opt_lower.filter(|v| *v > 0.0).map(|v| alg_upper / v),
                }
            })
            .collect();
        MinNormCertificate { alpha, rows }
    }

    fn zero(m: usize) -> Self {
        let rows = pos_set(m)
            .into_iter()
            .map(|ell| CertificateRow {
                ell,
                t: 0.0,
                opt_lower: None,
                alg_upper: 0.0,
                loose_upper: 0.0,
                ratio: None,
            })
            .collect();
        MinNormCertificate { alpha: 1.0, rows }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinNormSolution {
    pub assignment: Assignment,
    pub profile: ThresholdProfile,
    pub certificate: MinNormCertificate,
    pub reduction: VsInstance,
    /// Absent for the all-zero instance, which needs no scheduling.
    pub schedule: Option<ScheduleResult>,
}

pub fn solve_min_norm(
    inst: &StochInstance,
    epsilon: f64,
    rng: &mut dyn RngCore,
    params: &VsParams,
) -> Result<MinNormSolution> {
    params.validate()?;
    solve_min_norm_with(
        inst,
        epsilon,
        rng,
        &RandomizedScheduler::new(params.clone()),
    )
}

/// Same as [`solve_min_norm`] with any LB-relative scheduler, called exactly
/// once unless every job is zero almost surely.
pub fn solve_min_norm_with(
    inst: &StochInstance,
    epsilon: f64,
    rng: &mut dyn RngCore,
    scheduler: &dyn VectorScheduler,
) -> Result<MinNormSolution> {
    if inst.kappa() <= 0.0 {
        let d = pos_set(inst.m).len();
        let jobs = inst
            .jobs()
            .iter()
            .map(|j| VectorJob::new(j.id.clone(), vec![0.0; d]))
            .collect();
        return Ok(MinNormSolution {
            assignment: Assignment::all_on_first(inst.n()),
            profile: ThresholdProfile {
                epsilon,
                rows: Vec::new(),
            },
            certificate: MinNormCertificate::zero(inst.m),
            reduction: VsInstance::new(inst.m, d, jobs)?,
            schedule: None,
        });
    }
    let profile = threshold_profile(inst, epsilon)?;
    let reduction = build_reduction_instance(inst, &profile)?;
    let schedule = scheduler.schedule(&reduction, rng)?;
    if !schedule.certified {
        return Err(Error::Uncertified {
            makespan: schedule.makespan,
            bound: schedule.bound,
        });
    }
    let alpha = makespan(&reduction, &schedule.assignment)?.max(1.0);
    Ok(MinNormSolution {
        assignment: schedule.assignment.clone(),
        certificate: MinNormCertificate::from_profile(&profile, alpha),
        profile,
        reduction,
        schedule: Some(schedule),
    })
}

/// Post-hoc check of the three threshold properties for one row.
pub fn row_properties_hold(inst: &StochInstance, row: &ThresholdRow, epsilon: f64) -> bool {
    let bracket = row.t_prime < row.t && row.t <= (1.0 + epsilon) * row.t_prime;
    let at_t = threshold_predicate(inst, row.ell, row.t);
    let at_prime = !threshold_predicate(inst, row.ell, row.t_prime);
    bracket && at_t && (row.degenerate || at_prime)
}

/// `0 <= p <= 1/4` per entry and `Σ_j p_{j,ℓ} <= 8m` per dimension.
pub fn reduction_bounds_hold(reduction: &VsInstance) -> bool {
    let m = reduction.m() as f64;
    let entries = reduction
        .jobs()
        .iter()
        .flat_map(|j| j.p.iter())
        .all(|&p| (0.0..=0.25 + TOL).contains(&p));
    entries && reduction.totals().iter().all(|&s| s <= 8.0 * m + TOL)
}
