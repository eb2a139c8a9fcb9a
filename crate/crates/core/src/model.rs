//! Deterministic data model: vector jobs, instances, assignments, loads,
//! the natural lower bound, and ordered (Top-ℓ style) norms.

use std::collections::HashSet;

use serde::Serialize;

use crate::error::{Error, Result};

/// Absolute tolerance used wherever an inequality is claimed exactly.
pub const TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VectorJob {
    pub id: String,
    pub p: Vec<f64>,
}

impl VectorJob {
    pub fn new(id: impl Into<String>, p: Vec<f64>) -> Self {
        VectorJob { id: id.into(), p }
    }
}

/// A vector-scheduling instance on `m` identical machines with `d` dimensions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VsInstance {
    m: usize,
    d: usize,
    jobs: Vec<VectorJob>,
}

impl VsInstance {
    pub fn new(m: usize, d: usize, jobs: Vec<VectorJob>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidInstance(
                "machine count must be at least 1".into(),
            ));
        }
        if d == 0 {
            return Err(Error::InvalidInstance(
                "dimension count must be at least 1".into(),
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
            if job.p.len() != d {
                return Err(Error::InvalidInstance(format!(
                    "job {:?} has {} coordinates, expected {}",
                    job.id,
                    job.p.len(),
                    d
                )));
            }
            if let Some(bad) = job.p.iter().find(|v| !v.is_finite() || **v < 0.0) {
                return Err(Error::InvalidInstance(format!(
                    "job {:?} has invalid size {}",
                    job.id, bad
                )));
            }
        }
        Ok(VsInstance { m, d, jobs })
    }

    /// Build from raw size vectors, naming jobs `j0, j1, ...`.
    pub fn from_sizes(m: usize, d: usize, sizes: Vec<Vec<f64>>) -> Result<Self> {
        let jobs = sizes
            .into_iter()
            .enumerate()
            .map(|(i, p)| VectorJob::new(format!("j{i}"), p))
            .collect();
        VsInstance::new(m, d, jobs)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.jobs.len()
    }

    pub fn jobs(&self) -> &[VectorJob] {
        &self.jobs
    }

    pub fn job_index(&self, id: &str) -> Option<usize> {
        self.jobs.iter().position(|j| j.id == id)
    }

    /// Per-dimension totals `Σ_j p_{j,r}`.
    pub fn totals(&self) -> Vec<f64> {
        let mut totals = vec![0.0; self.d];
        for job in &self.jobs {
            for (t, v) in totals.iter_mut().zip(&job.p) {
                *t += v;
            }
        }
        totals
    }

    /// Multiply every size by `c > 0`.
    pub fn scale(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Argument(format!(
                "scale factor must be positive, got {c}"
            )));
        }
        let jobs = self
            .jobs
            .iter()
            .map(|j| VectorJob::new(j.id.clone(), j.p.iter().map(|v| v * c).collect()))
            .collect();
        Ok(VsInstance {
            m: self.m,
            d: self.d,
            jobs,
        })
    }

    pub fn with_machines(&self, m: usize) -> Result<Self> {
        VsInstance::new(m, self.d, self.jobs.clone())
    }
}

/// A total map from jobs (by position in the instance) to 0-based machine indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Assignment {
    machines: Vec<usize>,
}

impl Assignment {
    pub fn new(machines: Vec<usize>) -> Self {
        Assignment { machines }
    }

    /// Every job on machine 0.
    pub fn all_on_first(n: usize) -> Self {
        Assignment::new(vec![0; n])
    }

    pub fn machines(&self) -> &[usize] {
        &self.machines
    }

    pub fn machine_of(&self, job: usize) -> usize {
        self.machines[job]
    }

    pub fn len(&self) -> usize {
        self.machines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.machines.is_empty()
    }

    /// Check totality and machine range against `n` jobs on `m` machines.
    pub fn validate(&self, n: usize, m: usize) -> Result<()> {
        if self.machines.len() != n {
            return Err(Error::Structural(format!(
                "assignment covers {} jobs, instance has {}",
                self.machines.len(),
                n
            )));
        }
        if let Some((j, &i)) = self.machines.iter().enumerate().find(|(_, &i)| i >= m) {
            return Err(Error::Structural(format!(
                "job {j} assigned to machine {} but only {m} machines exist",
                i + 1
            )));
        }
        Ok(())
    }

    /// Build from `(job id, 0-based machine)` pairs, requiring every job exactly once.
    pub fn from_pairs<'a>(
        inst_ids: impl IntoIterator<Item = &'a str>,
        m: usize,
        pairs: &[(String, usize)],
    ) -> Result<Self> {
        let ids: Vec<&str> = inst_ids.into_iter().collect();
        let mut machines = vec![usize::MAX; ids.len()];
        for (id, machine) in pairs {
            let pos = ids
                .iter()
                .position(|x| x == id)
                .ok_or_else(|| Error::Structural(format!("unknown job id {id:?}")))?;
            if machines[pos] != usize::MAX {
                return Err(Error::Structural(format!("job id {id:?} assigned twice")));
            }
            if *machine >= m {
                return Err(Error::Structural(format!(
                    "job {id:?} assigned to machine {} but only {m} machines exist",
                    machine + 1
                )));
            }
            machines[pos] = *machine;
        }
        if let Some(pos) = machines.iter().position(|&i| i == usize::MAX) {
            return Err(Error::Structural(format!(
                "job id {:?} is unassigned",
                ids[pos]
            )));
        }
        Ok(Assignment::new(machines))
    }
}

/// `loads[i][r]` is the total size in dimension `r` placed on machine `i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoadMatrix {
    loads: Vec<Vec<f64>>,
}

impl LoadMatrix {
    pub fn rows(&self) -> &[Vec<f64>] {
        &self.loads
    }

    pub fn get(&self, machine: usize, dim: usize) -> f64 {
        self.loads[machine][dim]
    }

    pub fn max_entry(&self) -> f64 {
        self.loads
            .iter()
            .flat_map(|row| row.iter().copied())
            .fold(0.0, f64::max)
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let d = self.loads.first().map_or(0, Vec::len);
        let mut sums = vec![0.0; d];
        for row in &self.loads {
            for (s, v) in sums.iter_mut().zip(row) {
                *s += v;
            }
        }
        sums
    }
}

/// The natural lower bound: `max(max_{j,r} p_{j,r}, max_r Σ_j p_{j,r} / m)`.
pub fn compute_lb(inst: &VsInstance) -> f64 {
    let largest = inst
        .jobs
        .iter()
        .flat_map(|j| j.p.iter().copied())
        .fold(0.0, f64::max);
    let average = inst.totals().into_iter().fold(0.0, f64::max) / inst.m as f64;
    largest.max(average)
}

pub fn load_matrix(inst: &VsInstance, a: &Assignment) -> Result<LoadMatrix> {
    a.validate(inst.n(), inst.m)?;
    let mut loads = vec![vec![0.0; inst.d]; inst.m];
    for (job, &i) in inst.jobs.iter().zip(a.machines()) {
        for (l, v) in loads[i].iter_mut().zip(&job.p) {
            *l += v;
        }
    }
    Ok(LoadMatrix { loads })
}

pub fn makespan(inst: &VsInstance, a: &Assignment) -> Result<f64> {
    Ok(load_matrix(inst, a)?.max_entry())
}

/// Sum of the `ell` largest entries of `x`.
pub fn top_ell(x: &[f64], ell: usize) -> Result<f64> {
    if ell == 0 || ell > x.len() {
        return Err(Error::Argument(format!(
            "ell must be in 1..={}, got {ell}",
            x.len()
        )));
    }
    Ok(sorted_desc(x).iter().take(ell).sum())
}

pub(crate) fn sorted_desc(x: &[f64]) -> Vec<f64> {
    let mut v = x.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// A monotone symmetric norm `f(x) = Σ_i w_i x↓_i` with nonincreasing,
/// nonnegative weights. Top-ℓ is the 0/1 weight vector with `ℓ` ones.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderedNorm {
    w: Vec<f64>,
}

impl OrderedNorm {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::Argument("norm weight vector is empty".into()));
        }
        if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Argument(
                "norm weights must be finite and nonnegative".into(),
            ));
        }
        if w.windows(2).any(|p| p[1] > p[0]) {
            return Err(Error::Argument("norm weights must be nonincreasing".into()));
        }
        if w[0] <= 0.0 {
            return Err(Error::Argument(
                "leading norm weight must be positive".into(),
            ));
        }
        Ok(OrderedNorm { w })
    }

    pub fn top_ell(m: usize, ell: usize) -> Result<Self> {
        if ell == 0 || ell > m {
            return Err(Error::Argument(format!(
                "ell must be in 1..={m}, got {ell}"
            )));
        }
        OrderedNorm::new((0..m).map(|i| if i < ell { 1.0 } else { 0.0 }).collect())
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    pub fn dim(&self) -> usize {
        self.w.len()
    }

    /// Coefficients `c_k = w_k - w_{k+1}` so that `f = Σ_k c_k Top-k`.
    pub fn top_ell_coefficients(&self) -> Vec<f64> {
        (0..self.w.len())
            .map(|k| self.w[k] - self.w.get(k + 1).copied().unwrap_or(0.0))
            .collect()
    }
}

pub fn ordered_norm_eval(f: &OrderedNorm, x: &[f64]) -> Result<f64> {
    if x.len() != f.w.len() {
        return Err(Error::Argument(format!(
            "vector has length {}, norm expects {}",
            x.len(),
            f.w.len()
        )));
    }
    Ok(f.w.iter().zip(sorted_desc(x)).map(|(w, v)| w * v).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(m: usize, d: usize, sizes: &[&[f64]]) -> VsInstance {
        VsInstance::from_sizes(m, d, sizes.iter().map(|s| s.to_vec()).collect()).unwrap()
    }

    #[test]
    fn lb_examples() {
        assert_eq!(compute_lb(&inst(2, 1, &[&[3.0], &[3.0]])), 3.0);
        assert_eq!(compute_lb(&inst(1, 2, &[&[1.0, 0.0], &[0.0, 5.0]])), 5.0);
        assert_eq!(compute_lb(&inst(3, 2, &[])), 0.0);
    }

    #[test]
    fn load_matrix_examples() {
        let i = inst(2, 2, &[&[2.0, 3.0]]);
        let lm = load_matrix(&i, &Assignment::new(vec![0])).unwrap();
        assert_eq!(lm.rows(), &[vec![2.0, 3.0], vec![0.0, 0.0]]);
        assert_eq!(lm.max_entry(), 3.0);

        let i = inst(2, 2, &[&[1.0, 1.0], &[1.0, 1.0]]);
        let lm = load_matrix(&i, &Assignment::new(vec![0, 0])).unwrap();
        assert_eq!(lm.rows()[0], vec![2.0, 2.0]);
    }

    #[test]
    fn perfect_balance() {
        let i = inst(3, 1, &[&[1.0], &[1.0], &[1.0]]);
        let a = Assignment::new(vec![0, 1, 2]);
        assert_eq!(makespan(&i, &a).unwrap(), 1.0);
        assert_eq!(compute_lb(&i), 1.0);
    }

    #[test]
    fn structural_errors() {
        let i = inst(2, 1, &[&[1.0], &[2.0]]);
        assert!(matches!(
            load_matrix(&i, &Assignment::new(vec![0])),
            Err(Error::Structural(_))
        ));
        assert!(matches!(
            makespan(&i, &Assignment::new(vec![0, 2])),
            Err(Error::Structural(_))
        ));
        let ids = ["j0", "j1"];
        assert!(Assignment::from_pairs(ids, 2, &[("j0".into(), 0), ("zz".into(), 1)]).is_err());
        assert!(Assignment::from_pairs(ids, 2, &[("j0".into(), 0)]).is_err());
        assert!(Assignment::from_pairs(ids, 2, &[("j0".into(), 0), ("j1".into(), 5)]).is_err());
        let a = Assignment::from_pairs(ids, 2, &[("j1".into(), 1), ("j0".into(), 0)]).unwrap();
        assert_eq!(a.machines(), &[0, 1]);
    }

    #[test]
    fn instance_validation() {
        assert!(VsInstance::from_sizes(0, 1, vec![]).is_err());
        assert!(VsInstance::from_sizes(1, 0, vec![]).is_err());
        assert!(VsInstance::from_sizes(1, 2, vec![vec![1.0]]).is_err());
        assert!(VsInstance::from_sizes(1, 1, vec![vec![-1.0]]).is_err());
        assert!(VsInstance::from_sizes(1, 1, vec![vec![f64::INFINITY]]).is_err());
        let dup = vec![
            VectorJob::new("a", vec![1.0]),
            VectorJob::new("a", vec![2.0]),
        ];
        assert!(VsInstance::new(1, 1, dup).is_err());
    }

    #[test]
    fn top_ell_examples() {
        let x = [5.0, 1.0, 3.0];
        assert_eq!(top_ell(&x, 1).unwrap(), 5.0);
        assert_eq!(top_ell(&x, 2).unwrap(), 8.0);
        assert_eq!(top_ell(&x, 3).unwrap(), 9.0);
        assert!(top_ell(&x, 0).is_err());
        assert!(top_ell(&x, 4).is_err());
    }

    #[test]
    fn ordered_norm_examples() {
        let x = [2.0, 7.0, 1.0];
        let eval =
            |w: &[f64]| ordered_norm_eval(&OrderedNorm::new(w.to_vec()).unwrap(), &x).unwrap();
        assert_eq!(eval(&[1.0, 0.0, 0.0]), 7.0);
        assert_eq!(eval(&[1.0, 1.0, 1.0]), 10.0);
        assert_eq!(eval(&[2.0, 1.0, 0.0]), 16.0);
        let f = OrderedNorm::new(vec![1.0, 1.0]).unwrap();
        assert!(ordered_norm_eval(&f, &x).is_err());
    }

    #[test]
    fn ordered_norm_validation() {
        assert!(OrderedNorm::new(vec![]).is_err());
        assert!(OrderedNorm::new(vec![1.0, 2.0]).is_err());
        assert!(OrderedNorm::new(vec![0.0, 0.0]).is_err());
        assert!(OrderedNorm::new(vec![1.0, -0.5]).is_err());
        let t = OrderedNorm::top_ell(4, 2).unwrap();
        assert_eq!(t.weights(), &[1.0, 1.0, 0.0, 0.0]);
        assert_eq!(t.top_ell_coefficients(), vec![0.0, 1.0, 0.0, 0.0]);
    }
}
