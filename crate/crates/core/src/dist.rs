//! Finite discrete nonnegative random variables.
//!
//! Atoms are kept sorted by strictly increasing value with strictly positive
//! probabilities summing to one.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Total probability must be within this of 1.
pub const PROB_TOL: f64 = 1e-12;

/// Values closer than this are merged during convolution.
pub const MERGE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Atom {
    pub v: f64,
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct DiscreteDistribution {
    atoms: Vec<Atom>,
}

impl DiscreteDistribution {
    /// Validate and normalize a list of `(value, probability)` pairs:
    /// zero-probability atoms are dropped, equal values are merged, and the
    /// result is sorted by value.
    pub fn new(pairs: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut atoms = Vec::new();
        let mut total = 0.0;
        for (v, q) in pairs {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "value {v} is not a finite nonnegative real"
                )));
            }
            if !q.is_finite() || !(0.0..=1.0 + PROB_TOL).contains(&q) {
                return Err(Error::InvalidDistribution(format!(
                    "probability {q} is outside [0, 1]"
                )));
            }
            total += q;
            if q > 0.0 {
                atoms.push(Atom { v, q });
            }
        }
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        Ok(DiscreteDistribution {
            atoms: merge_sorted(atoms, 0.0),
        })
    }

    pub fn point_mass(v: f64) -> Result<Self> {
        DiscreteDistribution::new([(v, 1.0)])
    }

    /// Value `v` with probability `p`, otherwise 0.
    pub fn bernoulli(p: f64, v: f64) -> Result<Self> {
        DiscreteDistribution::new([(0.0, 1.0 - p), (v, p)])
    }

    pub fn uniform(values: &[f64]) -> Result<Self> {
        let q = 1.0 / values.len() as f64;
        DiscreteDistribution::new(values.iter().map(|&v| (v, q)))
    }

    /// Internal constructor for atoms already sorted and merged.
    fn from_atoms(atoms: Vec<Atom>) -> Self {
        DiscreteDistribution { atoms }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn support_size(&self) -> usize {
        self.atoms.len()
    }

    pub fn max_value(&self) -> f64 {
        self.atoms.last().map_or(0.0, |a| a.v)
    }

    pub fn is_zero(&self) -> bool {
        self.max_value() == 0.0
    }

    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|a| a.v * a.q).sum()
    }

    /// `Pr[X >= x]`.
    pub fn tail(&self, x: f64) -> f64 {
        self.atoms.iter().filter(|a| a.v >= x).map(|a| a.q).sum()
    }

    /// `X · 1{X < θ}`: mass at values `>= θ` moves to 0.
    pub fn truncate(&self, theta: f64) -> Self {
        self.split_at(theta, true)
    }

    /// `X · 1{X >= θ}`: mass at values `< θ` moves to 0.
    pub fn exceptional(&self, theta: f64) -> Self {
        self.split_at(theta, false)
    }

    fn split_at(&self, theta: f64, keep_below: bool) -> Self {
        let mut zero = 0.0;
        let mut kept = Vec::with_capacity(self.atoms.len());
        for a in &self.atoms {
            let below = a.v < theta;
            if below == keep_below && a.v > 0.0 {
                kept.push(a.clone());
            } else {
                zero += a.q;
            }
        }
        let mut atoms = Vec::with_capacity(kept.len() + 1);
        if zero > 0.0 {
            atoms.push(Atom { v: 0.0, q: zero });
        }
        atoms.extend(kept);
        DiscreteDistribution::from_atoms(atoms)
    }

    /// `E[X · 1{X >= θ}]`.
    pub fn exceptional_mean(&self, theta: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|a| a.v >= theta)
            .map(|a| a.v * a.q)
            .sum()
    }

    /// The λ-effective size `log_λ E[λ^X]`, or `E[X]` when `λ = 1`.
    pub fn effective_size(&self, lambda: f64) -> f64 {
        assert!(
            lambda >= 1.0,
            "effective size needs lambda >= 1, got {lambda}"
        );
        if lambda == 1.0 {
            return self.mean();
        }
        let ln_l = lambda.ln();
        let shift = self.max_value() * ln_l;
        let sum: f64 = self
            .atoms
            .iter()
            .map(|a| a.q * (a.v * ln_l - shift).exp())
            .sum();
        ((shift + sum.ln()) / ln_l).clamp(0.0, self.max_value())
    }

    /// Multiply every value by `c > 0`.
    pub fn scale(&self, c: f64) -> Self {
        assert!(c > 0.0, "scale factor must be positive, got {c}");
        DiscreteDistribution::from_atoms(
            self.atoms
                .iter()
                .map(|a| Atom { v: a.v * c, q: a.q })
                .collect(),
        )
    }

    /// Exact law of `X + Y` for independent `X`, `Y`.
    pub fn convolve(&self, other: &Self, atom_budget: usize) -> Result<Self> {
        let needed = self.atoms.len() as u128 * other.atoms.len() as u128;
        if needed > atom_budget as u128 {
            return Err(Error::capacity(
                "convolution atoms",
                needed,
                atom_budget as u128,
            ));
        }
        let mut atoms = Vec::with_capacity(needed as usize);
        for a in &self.atoms {
            for b in &other.atoms {
                atoms.push(Atom {
                    v: a.v + b.v,
                    q: a.q * b.q,
                });
            }
        }
        Ok(DiscreteDistribution::from_atoms(merge_sorted(
            atoms, MERGE_TOL,
        )))
    }

    /// Exact law of an independent sum; `atom_budget` bounds each pairwise step.
    pub fn sum_of<'a>(
        parts: impl IntoIterator<Item = &'a DiscreteDistribution>,
        atom_budget: usize,
    ) -> Result<Self> {
        let mut acc = DiscreteDistribution::from_atoms(vec![Atom { v: 0.0, q: 1.0 }]);
        for p in parts {
            acc = acc.convolve(p, atom_budget)?;
        }
        Ok(acc)
    }

    /// Inverse-CDF draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for a in &self.atoms {
            acc += a.q;
            if u < acc {
                return a.v;
            }
        }
        self.max_value()
    }
}

fn merge_sorted(mut atoms: Vec<Atom>, tol: f64) -> Vec<Atom> {
    atoms.sort_by(|a, b| a.v.total_cmp(&b.v));
    let mut out: Vec<Atom> = Vec::with_capacity(atoms.len());
    for a in atoms {
        match out.last_mut() {
            Some(last) if a.v - last.v <= tol => last.q += a.q,
            _ => out.push(a),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(pairs: &[(f64, f64)]) -> DiscreteDistribution {
        DiscreteDistribution::new(pairs.iter().copied()).unwrap()
    }

    #[test]
    fn construction_rules() {
        let x = d(&[(3.0, 0.25), (1.0, 0.5), (3.0, 0.25), (7.0, 0.0)]);
        assert_eq!(
            x.atoms(),
            &[Atom { v: 1.0, q: 0.5 }, Atom { v: 3.0, q: 0.5 }]
        );
        assert!(DiscreteDistribution::new([(1.0, 0.5)]).is_err());
        assert!(DiscreteDistribution::new([(-1.0, 1.0)]).is_err());
        assert!(DiscreteDistribution::new([(f64::NAN, 1.0)]).is_err());
        assert!(DiscreteDistribution::new([(1.0, 1.5), (2.0, -0.5)]).is_err());
    }

    #[test]
    fn means() {
        assert_eq!(DiscreteDistribution::point_mass(5.0).unwrap().mean(), 5.0);
        assert!((DiscreteDistribution::bernoulli(0.3, 10.0).unwrap().mean() - 3.0).abs() < 1e-12);
        assert_eq!(
            DiscreteDistribution::uniform(&[1.0, 2.0, 3.0, 4.0])
                .unwrap()
                .mean(),
            2.5
        );
    }

    #[test]
    fn truncate_and_exceptional() {
        let x = DiscreteDistribution::uniform(&[1.0, 5.0]).unwrap();
        assert_eq!(x.truncate(3.0), d(&[(0.0, 0.5), (1.0, 0.5)]));
        assert_eq!(x.exceptional(3.0), d(&[(0.0, 0.5), (5.0, 0.5)]));
        assert_eq!(x.truncate(6.0), x);
        assert_eq!(x.exceptional(1.0), x);
        let with_zero = d(&[(0.0, 0.5), (2.0, 0.25), (4.0, 0.25)]);
        assert_eq!(with_zero.truncate(3.0), d(&[(0.0, 0.75), (2.0, 0.25)]));
        let ex = with_zero.exceptional(3.0);
        assert!(ex.atoms().iter().all(|a| a.v == 0.0 || a.v >= 3.0));
    }

    #[test]
    fn exceptional_mean_examples() {
        let p = DiscreteDistribution::point_mass(5.0).unwrap();
        assert_eq!(p.exceptional_mean(3.0), 5.0);
        assert_eq!(p.exceptional_mean(6.0), 0.0);
    }

    #[test]
    fn effective_size_examples() {
        let c = DiscreteDistribution::point_mass(2.5).unwrap();
        for l in [1.0, 1.5, 2.0, 64.0] {
            assert!((c.effective_size(l) - 2.5).abs() < 1e-12);
        }
        assert_eq!(
            DiscreteDistribution::point_mass(0.0)
                .unwrap()
                .effective_size(4.0),
            0.0
        );
        // log_4(0.5 + 0.5 * 4) by direct evaluation.
        let b = DiscreteDistribution::bernoulli(0.5, 1.0).unwrap();
        let direct = (0.5f64 + 0.5 * 4.0).ln() / 4f64.ln();
        assert!((b.effective_size(4.0) - direct).abs() < 1e-12);
        assert!((b.effective_size(4.0) - 0.6610).abs() < 1e-4);
    }

    #[test]
    fn effective_size_large_values_do_not_overflow() {
        let x = d(&[(0.0, 0.5), (1000.0, 0.5)]);
        let b = x.effective_size(64.0);
        assert!(b.is_finite());
        assert!((b - (1000.0 - 2f64.ln() / 64f64.ln())).abs() < 1e-9);
    }

    #[test]
    fn scale_examples() {
        let p = DiscreteDistribution::point_mass(4.0).unwrap();
        assert_eq!(
            p.scale(0.25),
            DiscreteDistribution::point_mass(1.0).unwrap()
        );
        let x = d(&[(1.0, 0.2), (3.0, 0.8)]);
        assert!((x.scale(3.0).mean() - 3.0 * x.mean()).abs() < 1e-12);
        assert_eq!(x.scale(1.0).effective_size(2.0), x.effective_size(2.0));
    }

    #[test]
    fn convolve_examples() {
        let a = DiscreteDistribution::point_mass(1.5).unwrap();
        let b = DiscreteDistribution::point_mass(2.0).unwrap();
        assert_eq!(
            a.convolve(&b, 10).unwrap(),
            DiscreteDistribution::point_mass(3.5).unwrap()
        );
        let x = d(&[(1.0, 0.2), (3.0, 0.8)]);
        let zero = DiscreteDistribution::point_mass(0.0).unwrap();
        assert_eq!(x.convolve(&zero, 10).unwrap(), x);
        let coin = DiscreteDistribution::bernoulli(0.5, 1.0).unwrap();
        assert_eq!(
            coin.convolve(&coin, 10).unwrap(),
            d(&[(0.0, 0.25), (1.0, 0.5), (2.0, 0.25)])
        );
        assert!(matches!(
            coin.convolve(&coin, 3),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn near_duplicates_merge() {
        let a = d(&[(0.1, 0.5), (0.2, 0.5)]);
        let b = d(&[(0.2, 0.5), (0.1, 0.5)]);
        // 0.1 + 0.2 and 0.2 + 0.1 differ by rounding but land on one atom.
        let s = a.convolve(&b, 100).unwrap();
        assert_eq!(s.support_size(), 3);
    }

    fn arb_dist() -> impl Strategy<Value = DiscreteDistribution> {
        prop::collection::vec((0u32..20, 1u32..10), 1..5).prop_map(|raw| {
            let total: u32 = raw.iter().map(|(_, w)| w).sum();
            DiscreteDistribution::new(
                raw.iter()
                    .map(|&(v, w)| (v as f64 * 0.5, w as f64 / total as f64)),
            )
            .unwrap()
        })
    }

    proptest! {
        #[test]
        fn decomposition_identity(x in arb_dist(), theta in 0.1f64..12.0) {
            let lhs = x.truncate(theta).mean() + x.exceptional_mean(theta);
            prop_assert!((lhs - x.mean()).abs() <= 1e-12);
            prop_assert!((x.exceptional(theta).mean() - x.exceptional_mean(theta)).abs() <= 1e-12);
        }

        #[test]
        fn effective_size_additive(x in arb_dist(), y in arb_dist(), lambda in 1.0f64..64.0) {
            let s = x.convolve(&y, 1000).unwrap();
            let lhs = s.effective_size(lambda);
            let rhs = x.effective_size(lambda) + y.effective_size(lambda);
            prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.abs().max(1.0));
        }

        #[test]
        fn effective_size_bounds_and_monotone(x in arb_dist()) {
            let mut prev = x.mean();
            for lambda in [1.0, 1.01, 1.5, 2.0, 4.0, 8.0, 64.0, 1e6] {
                let b = x.effective_size(lambda);
                prop_assert!(b + 1e-12 >= prev);
                prop_assert!(b <= x.max_value() + 1e-12);
                prev = b;
            }
        }

        #[test]
        fn probabilities_stay_normalized(x in arb_dist(), y in arb_dist(), theta in 0.1f64..12.0) {
            for z in [x.truncate(theta), x.exceptional(theta), x.convolve(&y, 1000).unwrap()] {
                let total: f64 = z.atoms().iter().map(|a| a.q).sum();
                prop_assert!((total - 1.0).abs() <= 1e-12);
                prop_assert!(z.atoms().windows(2).all(|w| w[0].v < w[1].v));
            }
        }
    }
}
