use rand::Rng;
use serde::Serialize;

use super::OracleBudget;
use crate::dist::DiscreteDistribution;
use crate::error::{Error, Result};
use crate::minnorm::StochInstance;
use crate::model::{ordered_norm_eval, top_ell, Assignment, OrderedNorm};

fn outcome_count(inst: &StochInstance) -> u128 {
    inst.dists()
        .fold(1u128, |acc, d| acc.saturating_mul(d.support_size() as u128))
}

pub(crate) fn check_outcomes(inst: &StochInstance, budget: &OracleBudget) -> Result<()> {
    let needed = outcome_count(inst);
    if needed > budget.max_outcomes as u128 {
        return Err(Error::capacity(
            "joint outcomes",
            needed,
            budget.max_outcomes as u128,
        ));
    }
    Ok(())
}

/// `Σ_outcomes Pr[outcome] · g(load vector)` by walking every joint outcome.
fn enumerate<F: Fn(&[f64]) -> f64>(
    inst: &StochInstance,
    a: &Assignment,
    budget: &OracleBudget,
    g: F,
) -> Result<f64> {
    a.validate(inst.n(), inst.m())?;
    check_outcomes(inst, budget)?;
    let dists: Vec<&DiscreteDistribution> = inst.dists().collect();
    let mut loads = vec![0.0; inst.m()];
    let mut total = 0.0;
    walk(&dists, a.machines(), 0, 1.0, &mut loads, &g, &mut total);
    Ok(total)
}

fn walk<F: Fn(&[f64]) -> f64>(
    dists: &[&DiscreteDistribution],
    machines: &[usize],
    job: usize,
    prob: f64,
    loads: &mut [f64],
    g: &F,
    total: &mut f64,
) {
    if job == dists.len() {
        *total += prob * g(loads);
        return;
    }
    let i = machines[job];
    let base = loads[i];
    for atom in dists[job].atoms() {
        loads[i] = base + atom.v;
        walk(dists, machines, job + 1, prob * atom.q, loads, g, total);
    }
    loads[i] = base;
}

/// Exact `E[Top-ℓ(load vector)]` by joint-outcome enumeration.
pub fn exact_expected_topl(
    inst: &StochInstance,
    a: &Assignment,
    ell: usize,
    budget: &OracleBudget,
) -> Result<f64> {
    if ell == 0 || ell > inst.m() {
        return Err(Error::Argument(format!(
            "ell must be in 1..={}, got {ell}",
            inst.m()
        )));
    }
    enumerate(inst, a, budget, |loads| {
        top_ell(loads, ell).expect("ell checked")
    })
}

/// Exact `E[f(load vector)]` by joint-outcome enumeration.
pub fn exact_expected_norm(
    inst: &StochInstance,
    a: &Assignment,
    f: &OrderedNorm,
    budget: &OracleBudget,
) -> Result<f64> {
    if f.dim() != inst.m() {
        return Err(Error::Argument(format!(
            "norm has dimension {}, instance has {} machines",
            f.dim(),
            inst.m()
        )));
    }
    enumerate(inst, a, budget, |loads| {
        ordered_norm_eval(f, loads).expect("dimension checked")
    })
}

/// Exact law of each machine's load, by convolution.
pub fn load_distributions(
    inst: &StochInstance,
    a: &Assignment,
    atom_budget: usize,
) -> Result<Vec<DiscreteDistribution>> {
    a.validate(inst.n(), inst.m())?;
    let mut per_machine: Vec<Vec<&DiscreteDistribution>> = vec![Vec::new(); inst.m()];
    for (job, &i) in inst.jobs().iter().zip(a.machines()) {
        per_machine[i].push(&job.dist);
    }
    per_machine
        .into_iter()
        .map(|parts| DiscreteDistribution::sum_of(parts, atom_budget))
        .collect()
}

/// Exact `E[Top-ℓ(Y)]` for independent coordinates `Y_i`, using
/// `Top-ℓ(y) = ∫_0^∞ min(ℓ, #{i : y_i > s}) ds`. On each gap between
/// consecutive support points the count is Poisson-binomial.
pub fn product_expected_topl(coords: &[DiscreteDistribution], ell: usize) -> Result<f64> {
    if ell == 0 || ell > coords.len() {
        return Err(Error::Argument(format!(
            "ell must be in 1..={}, got {ell}",
            coords.len()
        )));
    }
    let mut points: Vec<f64> = coords
        .iter()
        .flat_map(|d| d.atoms().iter().map(|a| a.v))
        .chain(std::iter::once(0.0))
        .collect();
    points.sort_by(f64::total_cmp);
    points.dedup();

    // suffix[i][k] = Pr[Y_i >= value of atom k]
    let suffix: Vec<Vec<f64>> = coords
        .iter()
        .map(|d| {
            let mut s: Vec<f64> = d
                .atoms()
                .iter()
                .rev()
                .scan(0.0, |acc, a| {
                    *acc += a.q;
                    Some(*acc)
                })
                .collect();
            s.reverse();
            s.push(0.0);
            s
        })
        .collect();

    let mut total = 0.0;
    let mut counts = vec![0.0; ell + 1];
    for w in points.windows(2) {
        let (s, width) = (w[0], w[1] - w[0]);
        counts.iter_mut().for_each(|c| *c = 0.0);
        counts[0] = 1.0;
        for (d, suf) in coords.iter().zip(&suffix) {
            let idx = d.atoms().partition_point(|a| a.v <= s);
            let p = suf[idx];
            if p == 0.0 {
                continue;
            }
            // capped Poisson-binomial update, state ℓ absorbs
            counts[ell] += counts[ell - 1] * p;
            for c in (1..ell).rev() {
                counts[c] = counts[c] * (1.0 - p) + counts[c - 1] * p;
            }
            counts[0] *= 1.0 - p;
        }
        let expected: f64 = counts.iter().enumerate().map(|(c, pr)| c as f64 * pr).sum();
        total += width * expected;
    }
    Ok(total)
}

/// Exact `E[f(Y)]` for independent coordinates via `f = Σ_k (w_k - w_{k+1}) Top-k`.
pub fn product_expected_norm(coords: &[DiscreteDistribution], f: &OrderedNorm) -> Result<f64> {
    if f.dim() != coords.len() {
        return Err(Error::Argument(format!(
            "norm has dimension {}, got {} coordinates",
            f.dim(),
            coords.len()
        )));
    }
    let mut total = 0.0;
    for (k, c) in f.top_ell_coefficients().into_iter().enumerate() {
        if c > 0.0 {
            total += c * product_expected_topl(coords, k + 1)?;
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: u64,
}

/// Monte Carlo estimate of `E[Top-ℓ(load vector)]` with its standard error.
pub fn mc_expected_topl<R: Rng + ?Sized>(
    inst: &StochInstance,
    a: &Assignment,
    ell: usize,
    samples: u64,
    rng: &mut R,
) -> Result<McEstimate> {
    a.validate(inst.n(), inst.m())?;
    if ell == 0 || ell > inst.m() {
        return Err(Error::Argument(format!(
            "ell must be in 1..={}, got {ell}",
            inst.m()
        )));
    }
    if samples < 2 {
        return Err(Error::Argument(
            "Monte Carlo needs at least 2 samples".into(),
        ));
    }
    let mut loads = vec![0.0; inst.m()];
    let (mut mean, mut m2) = (0.0, 0.0);
    for k in 1..=samples {
        loads.iter_mut().for_each(|l| *l = 0.0);
        for (job, &i) in inst.jobs().iter().zip(a.machines()) {
            loads[i] += job.dist.sample(rng);
        }
        let x = top_ell(&loads, ell)?;
        let delta = x - mean;
        mean += delta / k as f64;
        m2 += delta * (x - mean);
    }
    let var = m2 / (samples - 1) as f64;
    Ok(McEstimate {
        estimate: mean,
        std_error: (var / samples as f64).sqrt(),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;

    fn bern(p: f64, v: f64) -> DiscreteDistribution {
        DiscreteDistribution::bernoulli(p, v).unwrap()
    }

    fn point(v: f64) -> DiscreteDistribution {
        DiscreteDistribution::point_mass(v).unwrap()
    }

    #[test]
    fn deterministic_jobs_match_load_vector() {
        let inst = StochInstance::from_dists(3, vec![point(2.0), point(5.0), point(1.0)]).unwrap();
        let a = Assignment::new(vec![0, 1, 0]);
        let b = OracleBudget::default();
        assert_eq!(exact_expected_topl(&inst, &a, 1, &b).unwrap(), 5.0);
        assert_eq!(exact_expected_topl(&inst, &a, 2, &b).unwrap(), 8.0);
        let f = OrderedNorm::new(vec![2.0, 1.0, 0.5]).unwrap();
        assert_eq!(exact_expected_norm(&inst, &a, &f, &b).unwrap(), 13.0);
        let mc = mc_expected_topl(&inst, &a, 2, 100, &mut rng_from_seed(1)).unwrap();
        assert_eq!(mc.estimate, 8.0);
        assert_eq!(mc.std_error, 0.0);
    }

    #[test]
    fn single_bernoulli() {
        let inst = StochInstance::from_dists(3, vec![bern(0.3, 10.0)]).unwrap();
        let a = Assignment::new(vec![2]);
        let v = exact_expected_topl(&inst, &a, 1, &OracleBudget::default()).unwrap();
        assert!((v - 3.0).abs() < 1e-12);
    }

    #[test]
    fn top_one_norm_consistency() {
        let inst =
            StochInstance::from_dists(2, vec![bern(0.5, 3.0), bern(0.2, 4.0), bern(0.7, 1.0)])
                .unwrap();
        let a = Assignment::new(vec![0, 1, 1]);
        let b = OracleBudget::default();
        let f = OrderedNorm::top_ell(2, 1).unwrap();
        let x = exact_expected_norm(&inst, &a, &f, &b).unwrap();
        let y = exact_expected_topl(&inst, &a, 1, &b).unwrap();
        assert!((x - y).abs() < 1e-12);
    }

    #[test]
    fn budget_and_argument_errors() {
        let inst = StochInstance::from_dists(2, vec![bern(0.5, 1.0); 4]).unwrap();
        let a = Assignment::new(vec![0; 4]);
        let tight = OracleBudget {
            max_outcomes: 8,
            ..OracleBudget::default()
        };
        assert!(matches!(
            exact_expected_topl(&inst, &a, 1, &tight),
            Err(Error::Capacity { needed: 16, .. })
        ));
        assert!(exact_expected_topl(&inst, &a, 3, &OracleBudget::default()).is_err());
        assert!(mc_expected_topl(&inst, &a, 1, 1, &mut rng_from_seed(0)).is_err());
    }

    #[test]
    fn product_route_matches_enumeration() {
        let dists = vec![
            bern(0.5, 3.0),
            DiscreteDistribution::new([(0.0, 0.2), (1.0, 0.3), (2.5, 0.5)]).unwrap(),
            bern(0.7, 1.0),
            point(0.5),
            bern(0.1, 6.0),
        ];
        let inst = StochInstance::from_dists(3, dists).unwrap();
        let a = Assignment::new(vec![0, 1, 1, 2, 0]);
        let loads = load_distributions(&inst, &a, 1000).unwrap();
        let b = OracleBudget::default();
        for ell in 1..=3 {
            let joint = exact_expected_topl(&inst, &a, ell, &b).unwrap();
            let prod = product_expected_topl(&loads, ell).unwrap();
            assert!((joint - prod).abs() < 1e-12, "ell={ell}: {joint} vs {prod}");
        }
        let f = OrderedNorm::new(vec![3.0, 1.0, 0.25]).unwrap();
        let joint = exact_expected_norm(&inst, &a, &f, &b).unwrap();
        let prod = product_expected_norm(&loads, &f).unwrap();
        assert!((joint - prod).abs() < 1e-12);
    }

    #[test]
    fn top_m_is_total_mean() {
        let inst =
            StochInstance::from_dists(2, vec![bern(0.5, 3.0), bern(0.25, 2.0), bern(0.9, 1.0)])
                .unwrap();
        let b = OracleBudget::default();
        let total: f64 = inst.dists().map(DiscreteDistribution::mean).sum();
        for machines in [[0, 0, 0], [0, 1, 0], [1, 0, 1], [0, 1, 1]] {
            let v = exact_expected_topl(&inst, &Assignment::new(machines.to_vec()), 2, &b).unwrap();
            assert!((v - total).abs() < 1e-12);
        }
    }
}
