use super::expect::{check_outcomes, load_distributions, product_expected_topl};
use super::{assignment_count, OracleBudget};
use crate::error::{Error, Result};
use crate::minnorm::StochInstance;
use crate::model::{Assignment, VsInstance};

fn check_assignments(m: usize, n: usize, budget: &OracleBudget) -> Result<()> {
    let needed = assignment_count(m, n);
    if needed > budget.max_assignments as u128 {
        return Err(Error::capacity(
            "assignments",
            needed,
            budget.max_assignments as u128,
        ));
    }
    Ok(())
}

/// Visit assignments of `n` jobs to `m` identical machines. With `prune`,
/// job `j` only opens the lowest-numbered unused machine, so each partition
/// is visited once.
fn for_each_assignment<F: FnMut(&[usize])>(n: usize, m: usize, prune: bool, mut visit: F) {
    let mut machines = vec![0usize; n];
    fn rec<F: FnMut(&[usize])>(
        job: usize,
        used: usize,
        m: usize,
        prune: bool,
        machines: &mut Vec<usize>,
        visit: &mut F,
    ) {
        if job == machines.len() {
            visit(machines);
            return;
        }
        let limit = if prune { (used + 1).min(m) } else { m };
        for i in 0..limit {
            machines[job] = i;
            rec(job + 1, used.max(i + 1), m, prune, machines, visit);
        }
    }
    rec(0, 0, m, prune, &mut machines, &mut visit);
}

fn vs_opt(inst: &VsInstance, budget: &OracleBudget, prune: bool) -> Result<(Assignment, f64)> {
    check_assignments(inst.m(), inst.n(), budget)?;
    let (m, d) = (inst.m(), inst.d());
    let mut best = (Assignment::all_on_first(inst.n()), f64::INFINITY);
    let mut loads = vec![0.0; m * d];
    for_each_assignment(inst.n(), m, prune, |machines| {
        loads.iter_mut().for_each(|l| *l = 0.0);
        for (job, &i) in inst.jobs().iter().zip(machines) {
            for (r, v) in job.p.iter().enumerate() {
                loads[i * d + r] += v;
            }
        }
        let value = loads.iter().copied().fold(0.0, f64::max);
        if value < best.1 {
            best = (Assignment::new(machines.to_vec()), value);
        }
    });
    Ok(best)
}

/// Optimal makespan by enumerating assignments up to machine relabelling.
pub fn brute_force_vs_opt(inst: &VsInstance, budget: &OracleBudget) -> Result<(Assignment, f64)> {
    vs_opt(inst, budget, true)
}

/// Optimal makespan over all `m^n` assignments, without symmetry pruning.
pub fn brute_force_vs_opt_unpruned(
    inst: &VsInstance,
    budget: &OracleBudget,
) -> Result<(Assignment, f64)> {
    vs_opt(inst, budget, false)
}

/// The assignment minimising exact `E[Top-ℓ]`. Machine loads are independent,
/// so each candidate is evaluated from the per-machine load laws.
pub fn brute_force_stoch_opt(
    inst: &StochInstance,
    ell: usize,
    budget: &OracleBudget,
) -> Result<(Assignment, f64)> {
    if ell == 0 || ell > inst.m() {
        return Err(Error::Argument(format!(
            "ell must be in 1..={}, got {ell}",
            inst.m()
        )));
    }
    check_assignments(inst.m(), inst.n(), budget)?;
    check_outcomes(inst, budget)?;
    let atom_budget = budget.max_outcomes as usize;
    let mut best = (Assignment::all_on_first(inst.n()), f64::INFINITY);
    let mut err = None;
    for_each_assignment(inst.n(), inst.m(), true, |machines| {
        if err.is_some() {
            return;
        }
        let a = Assignment::new(machines.to_vec());
        let value = load_distributions(inst, &a, atom_budget)
            .and_then(|loads| product_expected_topl(&loads, ell));
        match value {
            Ok(v) if v < best.1 => best = (a, v),
            Ok(_) => {}
            Err(e) => err = Some(e),
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(best),
    }
}
