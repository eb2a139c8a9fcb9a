//! LB-relative randomized vector scheduling.
//!
//! After scaling so that the natural lower bound is 1, the scheduler
//! repeatedly samples each residual job with probability `7 / machines_left`
//! and commits the first sample that is small in every dimension (at most
//! `14 L`) while leaving a residual that still fits on the remaining machines
//! (at most `(machines_left - 1) L` per dimension). When six machines are
//! left, everything that remains goes to one machine. Each round draws at most
//! `N = ceil(log2(3 m))` candidates; running out is a detectable failure.

use rand::{Rng, RngCore, SeedableRng};
use serde::Serialize;
use thiserror::Error;

use crate::model::{compute_lb, makespan, Assignment, VsInstance, TOL};
use crate::seed::{derive_path, StreamRng};

/// Which machine count the sampling probability is divided by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum QDenominator {
    /// Machines still unassigned in the current round.
    Residual,
    /// The machine count of the input instance.
    Original,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VsParams {
    pub q_numerator: f64,
    pub threshold_factor: f64,
    /// Optional `U` with `Σ_j p_{j,r} <= m U LB`; the scale becomes `max(ln d, U, 1)`.
    pub load_bound: Option<f64>,
    pub q_denominator: QDenominator,
}

impl Default for VsParams {
    fn default() -> Self {
        VsParams {
            q_numerator: 7.0,
            threshold_factor: 14.0,
            load_bound: None,
            q_denominator: QDenominator::Residual,
        }
    }
}

impl VsParams {
    pub fn validate(&self) -> crate::Result<()> {
        if !(self.q_numerator > 0.0 && self.q_numerator.is_finite()) {
            return Err(crate::Error::Argument(
                "q_numerator must be positive".into(),
            ));
        }
        if self.threshold_factor < 2.0 * self.q_numerator {
            return Err(crate::Error::Argument(
                "threshold_factor must be at least 2 * q_numerator".into(),
            ));
        }
        if let Some(u) = self.load_bound {
            if !(u > 0.0 && u.is_finite()) {
                return Err(crate::Error::Argument("load bound must be positive".into()));
            }
        }
        Ok(())
    }

    /// `L = max(ln d, U, 1)`.
    pub fn scale_l(&self, d: usize) -> f64 {
        (d as f64).ln().max(self.load_bound.unwrap_or(1.0)).max(1.0)
    }

    /// `N = ceil(log2(3 m))` for the original machine count.
    pub fn trial_budget(&self, m: usize) -> usize {
        (3.0 * m as f64).log2().ceil().max(1.0) as usize
    }

    fn sampling_probability(&self, machines_left: usize, original: usize) -> f64 {
        let denom = match self.q_denominator {
            QDenominator::Residual => machines_left,
            QDenominator::Original => original,
        };
        (self.q_numerator / denom as f64).min(1.0)
    }
}

/// How a schedule was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    /// No jobs or all-zero sizes.
    Trivial,
    /// One dimension: greedy list scheduling.
    ListSchedule,
    /// At most six machines: everything on one machine.
    SingleMachine,
    Randomized,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduleResult {
    pub assignment: Assignment,
    pub makespan: f64,
    pub lb: f64,
    pub scale_l: f64,
    /// `threshold_factor * scale_l * lb`.
    pub bound: f64,
    pub certified: bool,
    /// Subsets committed by the randomized rounds.
    pub iterations: usize,
    /// Candidate subsets that were drawn and rejected.
    pub resamples: usize,
    pub trial_budget: usize,
    pub route: Route,
}

/// A round exhausted its candidate budget without finding a good subset.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[error("no good subset in round {iteration} ({machines_left} machines left) after {candidates} candidates")]
pub struct VsFailure {
    pub iteration: usize,
    pub machines_left: usize,
    pub candidates: usize,
}

/// Include each of `jobs` independently with probability `q`.
pub fn sample_subset<R: Rng + ?Sized>(jobs: &[usize], q: f64, rng: &mut R) -> Vec<usize> {
    jobs.iter()
        .copied()
        .filter(|_| rng.random::<f64>() < q)
        .collect()
}

/// Whether `subset` fits under `threshold_factor * scale_l` in every dimension
/// and leaves a complement of at most `(machines_left - 1) * scale_l`.
pub fn is_good_subset(
    inst: &VsInstance,
    subset: &[usize],
    scale_l: f64,
    machines_left: usize,
    params: &VsParams,
) -> bool {
    let mut chosen = vec![false; inst.n()];
    for &j in subset {
        chosen[j] = true;
    }
    let sizes: Vec<&[f64]> = inst.jobs().iter().map(|j| j.p.as_slice()).collect();
    let all: Vec<usize> = (0..inst.n()).collect();
    good_split(
        &sizes,
        &all,
        &chosen,
        inst.d(),
        scale_l,
        machines_left,
        params,
    )
}

fn good_split(
    sizes: &[&[f64]],
    remaining: &[usize],
    chosen: &[bool],
    d: usize,
    scale_l: f64,
    machines_left: usize,
    params: &VsParams,
) -> bool {
    let mut inside = vec![0.0; d];
    let mut outside = vec![0.0; d];
    for &j in remaining {
        let acc = if chosen[j] { &mut inside } else { &mut outside };
        for (a, v) in acc.iter_mut().zip(sizes[j]) {
            *a += v;
        }
    }
    let cap_in = params.threshold_factor * scale_l;
    let cap_out = (machines_left as f64 - 1.0) * scale_l;
    inside.iter().all(|&s| s <= cap_in) && outside.iter().all(|&s| s <= cap_out)
}

/// Greedy list scheduling in input order: each job goes to the machine whose
/// resulting largest coordinate is smallest, lowest index on ties.
pub fn list_schedule(inst: &VsInstance) -> Assignment {
    let mut loads = vec![vec![0.0; inst.d()]; inst.m()];
    let mut machines = Vec::with_capacity(inst.n());
    for job in inst.jobs() {
        let mut best = 0;
        let mut best_val = f64::INFINITY;
        for (i, row) in loads.iter().enumerate() {
            let val = row
                .iter()
                .zip(&job.p)
                .map(|(l, p)| l + p)
                .fold(0.0, f64::max);
            if val < best_val {
                best = i;
                best_val = val;
            }
        }
        for (l, p) in loads[best].iter_mut().zip(&job.p) {
            *l += p;
        }
        machines.push(best);
    }
    Assignment::new(machines)
}

/// Run the scheduler once. The random stream seeds per-candidate substreams,
/// so the committed subset is always the first good one in substream order.
pub fn vs_schedule<R: Rng + ?Sized>(
    inst: &VsInstance,
    params: &VsParams,
    rng: &mut R,
) -> Result<ScheduleResult, VsFailure> {
    let base: u64 = rng.random();
    let lb = compute_lb(inst);
    let (m, d, n) = (inst.m(), inst.d(), inst.n());
    let scale_l = params.scale_l(d);
    let trial_budget = params.trial_budget(m);

    let mut iterations = 0;
    let mut resamples = 0;
    let (assignment, route) = if n == 0 || lb == 0.0 {
        (Assignment::all_on_first(n), Route::Trivial)
    } else if d == 1 {
        (list_schedule(inst), Route::ListSchedule)
    } else if m <= 6 {
        (Assignment::all_on_first(n), Route::SingleMachine)
    } else {
        let normalized: Vec<Vec<f64>> = inst
            .jobs()
            .iter()
            .map(|j| j.p.iter().map(|v| v / lb).collect())
            .collect();
        let sizes: Vec<&[f64]> = normalized.iter().map(Vec::as_slice).collect();
        let mut machines = vec![usize::MAX; n];
        let mut remaining: Vec<usize> = (0..n).collect();
        let mut chosen = vec![false; n];
        let mut machines_left = m;
        let mut next_machine = 0;

        while machines_left >= 7 && !remaining.is_empty() {
            let q = params.sampling_probability(machines_left, m);
            let mut committed = None;
            for k in 0..trial_budget {
                let mut sub =
                    StreamRng::seed_from_u64(derive_path(base, &[iterations as u64, k as u64]));
                let subset = sample_subset(&remaining, q, &mut sub);
                for &j in &subset {
                    chosen[j] = true;
                }
                let good = good_split(
                    &sizes,
                    &remaining,
                    &chosen,
                    d,
                    scale_l,
                    machines_left,
                    params,
                );
                for &j in &subset {
                    chosen[j] = false;
                }
                if good {
                    committed = Some(subset);
                    break;
                }
                resamples += 1;
            }
            let Some(subset) = committed else {
                return Err(VsFailure {
                    iteration: iterations + 1,
                    machines_left,
                    candidates: trial_budget,
                });
            };
            for &j in &subset {
                machines[j] = next_machine;
                chosen[j] = true;
            }
            remaining.retain(|&j| !chosen[j]);
            for &j in &subset {
                chosen[j] = false;
            }
            iterations += 1;
            machines_left -= 1;
            next_machine += 1;
        }
        for &j in &remaining {
            machines[j] = next_machine;
        }
        (Assignment::new(machines), Route::Randomized)
    };

    let value = makespan(inst, &assignment).expect("scheduler produced a total assignment");
    let bound = params.threshold_factor * scale_l * lb;
    Ok(ScheduleResult {
        assignment,
        makespan: value,
        lb,
        scale_l,
        bound,
        certified: value <= bound + TOL,
        iterations,
        resamples,
        trial_budget,
        route,
    })
}

/// Rerun until a certified schedule appears or `retries` attempts are used.
/// Returns the result and the number of attempts made.
pub fn vs_schedule_with_retries<R: Rng + ?Sized>(
    inst: &VsInstance,
    params: &VsParams,
    rng: &mut R,
    retries: usize,
) -> Result<(ScheduleResult, usize), VsFailure> {
    let attempts = retries.max(1);
    let mut last = None;
    for attempt in 1..=attempts {
        match vs_schedule(inst, params, rng) {
            Ok(res) if res.certified => return Ok((res, attempt)),
            Ok(res) => {
                last = Some(VsFailure {
                    iteration: res.iterations,
                    machines_left: 0,
                    candidates: 0,
                })
            }
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

/// A vector scheduler usable as a black box by the stochastic reduction.
pub trait VectorScheduler {
    fn schedule(
        &self,
        inst: &VsInstance,
        rng: &mut dyn RngCore,
    ) -> Result<ScheduleResult, VsFailure>;
}

/// The randomized scheduler with fixed parameters.
#[derive(Debug, Clone, Default)]
pub struct RandomizedScheduler {
    pub params: VsParams,
}

impl RandomizedScheduler {
    pub fn new(params: VsParams) -> Self {
        RandomizedScheduler { params }
    }
}

impl VectorScheduler for RandomizedScheduler {
    fn schedule(
        &self,
        inst: &VsInstance,
        rng: &mut dyn RngCore,
    ) -> Result<ScheduleResult, VsFailure> {
        vs_schedule(inst, &self.params, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::compute_lb;
    use crate::seed::rng_from_seed;

    fn sizes(m: usize, d: usize, s: &[&[f64]]) -> VsInstance {
        VsInstance::from_sizes(m, d, s.iter().map(|v| v.to_vec()).collect()).unwrap()
    }

    #[test]
    fn full_probability_takes_everything() {
        let jobs: Vec<usize> = (0..10).collect();
        let mut rng = rng_from_seed(1);
        assert_eq!(sample_subset(&jobs, 1.0, &mut rng), jobs);
    }

    #[test]
    fn sampling_is_reproducible() {
        let jobs: Vec<usize> = (0..50).collect();
        let a = sample_subset(&jobs, 7.0 / 1000.0, &mut rng_from_seed(9));
        let b = sample_subset(&jobs, 7.0 / 1000.0, &mut rng_from_seed(9));
        assert_eq!(a, b);
    }

    #[test]
    fn inclusion_frequency() {
        let jobs: Vec<usize> = (0..20).collect();
        let mut counts = [0usize; 20];
        let mut rng = rng_from_seed(2024);
        let draws = 10_000;
        for _ in 0..draws {
            for j in sample_subset(&jobs, 0.35, &mut rng) {
                counts[j] += 1;
            }
        }
        for c in counts {
            let freq = c as f64 / draws as f64;
            assert!((freq - 0.35).abs() <= 0.02, "frequency {freq}");
        }
    }

    #[test]
    fn good_subset_edge_cases() {
        let params = VsParams::default();
        let inst = sizes(8, 2, &[&[1.0, 1.0], &[1.0, 0.5], &[0.5, 1.0]]);
        assert!(is_good_subset(&inst, &[], 1.0, 8, &params));
        let heavy = VsInstance::from_sizes(8, 2, vec![vec![1.0, 0.0]; 20]).unwrap();
        let all: Vec<usize> = (0..20).collect();
        assert!(!is_good_subset(&heavy, &all, 1.0, 8, &params));
        // Complement too large for the remaining machines.
        assert!(!is_good_subset(&heavy, &[0], 1.0, 8, &params));
        assert!(is_good_subset(&heavy, &all[..14], 1.0, 8, &params));
    }

    #[test]
    fn list_schedule_hand_example() {
        let inst = sizes(2, 1, &[&[3.0], &[3.0], &[2.0]]);
        let a = list_schedule(&inst);
        assert_eq!(a.machines(), &[0, 1, 0]);
        assert_eq!(makespan(&inst, &a).unwrap(), 5.0);
        assert_eq!(compute_lb(&inst), 4.0);
    }

    #[test]
    fn single_job() {
        let inst = sizes(9, 3, &[&[0.5, 2.0, 1.0]]);
        let res = vs_schedule(&inst, &VsParams::default(), &mut rng_from_seed(3)).unwrap();
        assert_eq!(res.makespan, 2.0);
        assert_eq!(res.lb, 2.0);
        assert!(res.certified);
    }

    #[test]
    fn zero_instance_goes_to_first_machine() {
        let inst = VsInstance::from_sizes(10, 3, vec![vec![0.0; 3]; 5]).unwrap();
        let res = vs_schedule(&inst, &VsParams::default(), &mut rng_from_seed(0)).unwrap();
        assert_eq!(res.route, Route::Trivial);
        assert_eq!(res.assignment, Assignment::all_on_first(5));
        assert_eq!(res.makespan, 0.0);
        assert!(res.certified);
        let empty = VsInstance::from_sizes(4, 2, vec![]).unwrap();
        let res = vs_schedule(&empty, &VsParams::default(), &mut rng_from_seed(0)).unwrap();
        assert!(res.assignment.is_empty());
    }

    #[test]
    fn few_machines_use_one() {
        let inst = VsInstance::from_sizes(5, 2, vec![vec![1.0, 1.0]; 5]).unwrap();
        let res = vs_schedule(&inst, &VsParams::default(), &mut rng_from_seed(0)).unwrap();
        assert_eq!(res.route, Route::SingleMachine);
        assert_eq!(res.makespan, 5.0);
        assert!(res.makespan <= 6.0 * res.lb);
    }

    #[test]
    fn unit_jobs_meet_certificate() {
        for d in [2usize, 5, 30] {
            let m = 20;
            let inst = VsInstance::from_sizes(m, d, vec![vec![1.0; d]; m]).unwrap();
            let res =
                vs_schedule(&inst, &VsParams::default(), &mut rng_from_seed(d as u64)).unwrap();
            assert_eq!(res.route, Route::Randomized);
            assert!(res.makespan <= 14.0 * (d as f64).ln().max(1.0) + TOL);
            assert!(res.certified);
        }
    }

    #[test]
    fn parameters() {
        let p = VsParams::default();
        assert_eq!(p.trial_budget(7), 5);
        assert_eq!(p.trial_budget(64), 8);
        assert_eq!(p.scale_l(2), 1.0);
        assert!((p.scale_l(64) - 64f64.ln()).abs() < 1e-15);
        let with_u = VsParams {
            load_bound: Some(9.0),
            ..VsParams::default()
        };
        assert_eq!(with_u.scale_l(64), 9.0);
        assert!(VsParams {
            threshold_factor: 10.0,
            ..VsParams::default()
        }
        .validate()
        .is_err());
        assert!(p.validate().is_ok());
    }

    #[test]
    fn retries_return_first_certified() {
        let inst = VsInstance::from_sizes(12, 4, vec![vec![0.5; 4]; 40]).unwrap();
        let (res, attempts) =
            vs_schedule_with_retries(&inst, &VsParams::default(), &mut rng_from_seed(5), 10)
                .unwrap();
        assert!(res.certified);
        assert!(attempts >= 1);
    }
}
