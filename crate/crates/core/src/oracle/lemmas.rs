//! Randomized verification of the inequalities behind the stochastic
//! reduction. Every case generates a small product distribution or
//! instance, evaluates both sides exactly, and records whether the stated
//! relation holds (absolute tolerance [`TOL`]).
//!
//! Suites:
//! - `effective-size-tail`: `β_λ(V) <= b` implies `Pr[V >= b + c] <= λ^{-c}`.
//! - `effective-size-exceptional-mean`: for `λ >= 2`,
//!   `E[V^{>= β+1}] <= (β + 3) / λ`.
//! - `bounded-sum-exceptional-mass`: for a sum `S` of independent
//!   `[0,θ]`-bounded terms and integer `λ >= 1`,
//!   `E[S^{>=θ}] >= θ/(4λ) (Σ_j β_λ(X_j/4θ) - 6)`.
//! - `separable-proxy-upper` / `-lower`: for a product distribution `Y`,
//!   `Σ_i E[Y_i^{>=θ}] <= ℓθ` implies `E[Top-ℓ(Y)] <= 2ℓθ`, and
//!   `> ℓθ` implies `E[Top-ℓ(Y)] > ℓθ/2`.
//! - `exceptional-instance-upper` / `-lower`: jobs on `{0} ∪ [θ, ∞)`,
//!   any assignment, with `Σ_j E[X_j]` against `ℓθ`.
//! - `truncated-instance-upper` / `-lower`: jobs on `[0, θ)`,
//!   `λ = floor(2m/ℓ)`, any assignment; upper bounds `8(α+3)ℓθ` and `32αℓθ`,
//!   lower bound `ℓθ/2` once `Σ_j β_λ(X_j/4θ) > 8m`.
//! - `stochastic-majorization-all-ell` / `-pos`: if
//!   `E[Top-ℓ(Y)] <= α E[Top-ℓ(W)]` for every `ℓ` (resp. `ℓ ∈ POS`), then
//!   `E[f(Y)] <= 28 α E[f(W)]` (resp. `56 α`) for ordered norms `f`.

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::Serialize;

use super::expect::{load_distributions, product_expected_norm, product_expected_topl};
use crate::dist::DiscreteDistribution;
use crate::error::Result;
use crate::minnorm::{lambda_for, pos_set, StochInstance};
use crate::model::{Assignment, OrderedNorm, TOL};
use crate::seed::{derive_path, rng_from_seed, stream, StreamRng};

const ATOM_BUDGET: usize = 1 << 20;
const MAX_ATTEMPTS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    AtMost,
    AtLeast,
    Exceeds,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Check {
    pub lhs: f64,
    pub rhs: f64,
    pub relation: Relation,
    pub holds: bool,
}

impl Check {
    pub fn at_most(lhs: f64, rhs: f64) -> Self {
        Check {
            lhs,
            rhs,
            relation: Relation::AtMost,
            holds: lhs <= rhs + TOL,
        }
    }

    pub fn at_least(lhs: f64, rhs: f64) -> Self {
        Check {
            lhs,
            rhs,
            relation: Relation::AtLeast,
            holds: lhs >= rhs - TOL,
        }
    }

    pub fn exceeds(lhs: f64, rhs: f64) -> Self {
        Check {
            lhs,
            rhs,
            relation: Relation::Exceeds,
            holds: lhs > rhs - TOL,
        }
    }

    /// How close the case came to violating the relation; above 1 means the
    /// relation failed (up to tolerance). `None` when the bound is vacuous.
    pub fn tightness(&self) -> Option<f64> {
        match self.relation {
            Relation::AtMost if self.rhs > 0.0 => Some(self.lhs / self.rhs),
            Relation::AtLeast | Relation::Exceeds if self.rhs > 0.0 => Some(if self.lhs > 0.0 {
                self.rhs / self.lhs
            } else {
                f64::INFINITY
            }),
            _ => None,
        }
    }
}

/// Which half of a two-sided statement a case exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    Upper,
    Lower,
}

/// Tail form: requires `β_λ(x) <= b` and `c >= 0`.
pub fn tail_bound_check(x: &DiscreteDistribution, lambda: f64, b: f64, c: f64) -> Option<Check> {
    if x.effective_size(lambda) > b || c < 0.0 {
        return None;
    }
    Some(Check::at_most(x.tail(b + c), lambda.powf(-c)))
}

/// Exceptional-mean form: requires `λ >= 2`.
pub fn exceptional_tail_check(x: &DiscreteDistribution, lambda: f64) -> Option<Check> {
    if lambda < 2.0 {
        return None;
    }
    let beta = x.effective_size(lambda);
    Some(Check::at_most(
        x.exceptional_mean(beta + 1.0),
        (beta + 3.0) / lambda,
    ))
}

/// Requires every `x_j` supported on `[0, θ]` and integer `λ >= 1`.
pub fn bounded_sum_check(
    xs: &[DiscreteDistribution],
    theta: f64,
    lambda: usize,
) -> Result<Option<Check>> {
    if lambda == 0 || xs.iter().any(|x| x.max_value() > theta) {
        return Ok(None);
    }
    let sum = DiscreteDistribution::sum_of(xs, ATOM_BUDGET)?;
    let eff: f64 = xs
        .iter()
        .map(|x| x.scale(1.0 / (4.0 * theta)).effective_size(lambda as f64))
        .sum();
    let rhs = theta / (4.0 * lambda as f64) * (eff - 6.0);
    Ok(Some(Check::at_least(sum.exceptional_mean(theta), rhs)))
}

/// Separable proxy for `E[Top-ℓ(Y)]` at scale `θ`.
pub fn separable_proxy_check(
    coords: &[DiscreteDistribution],
    ell: usize,
    theta: f64,
) -> Result<(Side, Check)> {
    let proxy: f64 = coords.iter().map(|y| y.exceptional_mean(theta)).sum();
    let value = product_expected_topl(coords, ell)?;
    let scale = ell as f64 * theta;
    Ok(if proxy <= scale {
        (Side::Upper, Check::at_most(value, 2.0 * scale))
    } else {
        (Side::Lower, Check::exceeds(value, scale / 2.0))
    })
}

/// Jobs supported on `{0} ∪ [θ, ∞)`; `None` if some job is not.
pub fn exceptional_instance_check(
    inst: &StochInstance,
    a: &Assignment,
    ell: usize,
    theta: f64,
) -> Result<Option<(Side, Check)>> {
    let supported = inst
        .dists()
        .all(|x| x.atoms().iter().all(|at| at.v == 0.0 || at.v >= theta));
    if !supported {
        return Ok(None);
    }
    let total: f64 = inst.dists().map(DiscreteDistribution::mean).sum();
    let value = product_expected_topl(&load_distributions(inst, a, ATOM_BUDGET)?, ell)?;
    let scale = ell as f64 * theta;
    Ok(Some(if total <= scale {
        (Side::Upper, Check::at_most(value, 2.0 * scale))
    } else {
        (Side::Lower, Check::exceeds(value, scale / 2.0))
    }))
}

/// Jobs supported on `[0, θ)`; `None` if some job is not. The upper side
/// returns the sharp `8(α+3)ℓθ` check followed by the `32αℓθ` check.
pub fn truncated_instance_check(
    inst: &StochInstance,
    a: &Assignment,
    ell: usize,
    theta: f64,
) -> Result<Option<(Side, Vec<Check>)>> {
    if inst.dists().any(|x| x.max_value() >= theta) {
        return Ok(None);
    }
    a.validate(inst.n(), inst.m())?;
    let lambda = lambda_for(inst.m(), ell) as f64;
    let sizes: Vec<f64> = inst
        .dists()
        .map(|x| x.scale(1.0 / (4.0 * theta)).effective_size(lambda))
        .collect();
    let total: f64 = sizes.iter().sum();
    let value = product_expected_topl(&load_distributions(inst, a, ATOM_BUDGET)?, ell)?;
    let scale = ell as f64 * theta;
    if total <= 8.0 * inst.m() as f64 {
        let mut per_machine = vec![0.0; inst.m()];
        for (s, &i) in sizes.iter().zip(a.machines()) {
            per_machine[i] += s;
        }
        let alpha = per_machine.into_iter().fold(1.0, f64::max);
        Ok(Some((
            Side::Upper,
            vec![
                Check::at_most(value, 8.0 * (alpha + 3.0) * scale),
                Check::at_most(value, 32.0 * alpha * scale),
            ],
        )))
    } else {
        Ok(Some((
            Side::Lower,
            vec![Check::exceeds(value, scale / 2.0)],
        )))
    }
}

/// `E[f(Y)] <= C α E[f(W)]` with `α` the worst Top-ℓ ratio over `ℓ ∈ [m]`
/// (`C = 28`) or over `ℓ ∈ POS(m)` (`C = 56`). `None` if `W` is a.s. zero.
pub fn majorization_check(
    y: &[DiscreteDistribution],
    w: &[DiscreteDistribution],
    f: &OrderedNorm,
    pos_only: bool,
) -> Result<Option<Check>> {
    let m = y.len();
    let ells: Vec<usize> = if pos_only {
        pos_set(m)
    } else {
        (1..=m).collect()
    };
    let mut alpha: f64 = 0.0;
    for &ell in &ells {
        let wy = product_expected_topl(y, ell)?;
        let ww = product_expected_topl(w, ell)?;
        if ww <= 0.0 {
            return Ok(None);
        }
        alpha = alpha.max(wy / ww);
    }
    let constant = if pos_only { 56.0 } else { 28.0 };
    let lhs = product_expected_norm(y, f)?;
    let rhs = constant * alpha * product_expected_norm(w, f)?;
    Ok(Some(Check::at_most(lhs, rhs)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub name: &'static str,
    pub statement: &'static str,
    pub cases: usize,
    pub violations: usize,
    /// Cases for which no instance meeting the hypothesis was generated.
    pub skipped: usize,
    pub max_tightness: Option<f64>,
    pub first_violation: Option<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.skipped == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaReport {
    pub seed: u64,
    pub case_count: usize,
    pub suites: Vec<SuiteReport>,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteReport::passed)
    }

    pub fn total_violations(&self) -> usize {
        self.suites.iter().map(|s| s.violations).sum()
    }
}

type Generator = fn(&mut StreamRng) -> Result<Option<Vec<Check>>>;

struct Suite {
    name: &'static str,
    statement: &'static str,
    generate: Generator,
}

const SUITES: &[Suite] = &[
    Suite {
        name: "effective-size-tail",
        statement: "beta_lambda(V) <= b  =>  Pr[V >= b + c] <= lambda^-c",
        generate: gen_tail,
    },
    Suite {
        name: "effective-size-exceptional-mean",
        statement: "lambda >= 2  =>  E[V^{>= beta+1}] <= (beta + 3) / lambda",
        generate: gen_exceptional_tail,
    },
    Suite {
        name: "bounded-sum-exceptional-mass",
        statement: "E[S^{>=theta}] >= theta/(4 lambda) (sum_j beta_lambda(X_j/4theta) - 6)",
        generate: gen_bounded_sum,
    },
    Suite {
        name: "separable-proxy-upper",
        statement: "sum_i E[Y_i^{>=theta}] <= l theta  =>  E[Top-l(Y)] <= 2 l theta",
        generate: gen_proxy_upper,
    },
    Suite {
        name: "separable-proxy-lower",
        statement: "sum_i E[Y_i^{>=theta}] > l theta  =>  E[Top-l(Y)] > l theta / 2",
        generate: gen_proxy_lower,
    },
    Suite {
        name: "exceptional-instance-upper",
        statement: "support {0} u [theta, inf), sum_j E[X_j] <= l theta  =>  E[Top-l] <= 2 l theta",
        generate: gen_exceptional_upper,
    },
    Suite {
        name: "exceptional-instance-lower",
        statement: "support {0} u [theta, inf), sum_j E[X_j] > l theta  =>  E[Top-l] > l theta / 2",
        generate: gen_exceptional_lower,
    },
    Suite {
        name: "truncated-instance-upper",
        statement: "support [0, theta), sum_j beta <= 8m  =>  E[Top-l] <= 8(alpha+3) l theta <= 32 alpha l theta",
        generate: gen_truncated_upper,
    },
    Suite {
        name: "truncated-instance-lower",
        statement: "support [0, theta), sum_j beta > 8m  =>  E[Top-l] > l theta / 2",
        generate: gen_truncated_lower,
    },
    Suite {
        name: "stochastic-majorization-all-ell",
        statement: "E[Top-l(Y)] <= alpha E[Top-l(W)] for all l  =>  E[f(Y)] <= 28 alpha E[f(W)]",
        generate: gen_majorization_all,
    },
    Suite {
        name: "stochastic-majorization-pos",
        statement: "E[Top-l(Y)] <= alpha E[Top-l(W)] for l in POS  =>  E[f(Y)] <= 56 alpha E[f(W)]",
        generate: gen_majorization_pos,
    },
];

/// Run every suite for `case_count` cases. Each case draws from its own
/// stream derived from `(seed, suite, case)`.
pub fn verify_lemma_suite(seed: u64, case_count: usize) -> Result<LemmaReport> {
    let mut suites = Vec::with_capacity(SUITES.len());
    for (si, suite) in SUITES.iter().enumerate() {
        let mut report = SuiteReport {
            name: suite.name,
            statement: suite.statement,
            cases: 0,
            violations: 0,
            skipped: 0,
            max_tightness: None,
            first_violation: None,
        };
        for case in 0..case_count {
            let mut rng = rng_from_seed(derive_path(
                seed,
                &[stream::LEMMA_SUITE, si as u64, case as u64],
            ));
            let mut checks = None;
            for _ in 0..MAX_ATTEMPTS {
                if let Some(c) = (suite.generate)(&mut rng)? {
                    checks = Some(c);
                    break;
                }
            }
            let Some(checks) = checks else {
                report.skipped += 1;
                continue;
            };
            report.cases += 1;
            let mut violated = false;
            for c in &checks {
                if let Some(t) = c.tightness() {
                    report.max_tightness = Some(report.max_tightness.map_or(t, |m| m.max(t)));
                }
                if !c.holds {
                    violated = true;
                    report.first_violation.get_or_insert_with(|| {
                        format!("case {case}: lhs {} {:?} rhs {}", c.lhs, c.relation, c.rhs)
                    });
                }
            }
            if violated {
                report.violations += 1;
            }
        }
        suites.push(report);
    }
    Ok(LemmaReport {
        seed,
        case_count,
        suites,
    })
}

/// A distribution on at most `max_support` points of `grid` with random weights.
fn grid_dist(rng: &mut StreamRng, grid: &[f64], max_support: usize) -> DiscreteDistribution {
    let k = rng.random_range(1..=max_support.min(grid.len()));
    let values: Vec<f64> = grid.choose_multiple(rng, k).copied().collect();
    let weights: Vec<f64> = (0..k).map(|_| rng.random_range(1..=9) as f64).collect();
    let total: f64 = weights.iter().sum();
    DiscreteDistribution::new(
        values
            .into_iter()
            .zip(weights.into_iter().map(|w| w / total)),
    )
    .expect("normalized weights")
}

fn grid(step: f64, count: usize) -> Vec<f64> {
    (0..=count).map(|k| k as f64 * step).collect()
}

fn random_assignment(rng: &mut StreamRng, n: usize, m: usize) -> Assignment {
    Assignment::new((0..n).map(|_| rng.random_range(0..m)).collect())
}

fn pick_lambda(rng: &mut StreamRng, lo: f64) -> f64 {
    let fixed = [1.0, 1.5, 2.0, 3.0, 4.0, 8.0, 64.0];
    let choices: Vec<f64> = fixed.iter().copied().filter(|&l| l >= lo).collect();
    if rng.random_bool(0.8) {
        *choices.choose(rng).expect("nonempty")
    } else {
        rng.random_range(lo..100.0)
    }
}

fn gen_tail(rng: &mut StreamRng) -> Result<Option<Vec<Check>>> {
    let x = grid_dist(rng, &grid(0.25, 16), 3);
    let lambda = pick_lambda(rng, 1.0);
    let beta = x.effective_size(lambda);
    let b = if rng.random_bool(0.5) {
        beta
    } else {
        beta + rng.random_range(0.0..1.0)
    };
    let c = if rng.random_bool(0.5) {
        let v = x.atoms().choose(rng).expect("nonempty").v;
        (v - b).max(0.0)
    } else {
        rng.random_range(0.0..3.0)
    };
    Ok(tail_bound_check(&x, lambda, b, c).map(|c| vec![c]))
}

fn gen_exceptional_tail(rng: &mut StreamRng) -> Result<Option<Vec<Check>>> {
    let x = grid_dist(rng, &grid(0.5, 20), 3);
    let lambda = pick_lambda(rng, 2.0);
    Ok(exceptional_tail_check(&x, lambda).map(|c| vec![c]))
}

fn gen_bounded_sum(rng: &mut StreamRng) -> Result<Option<Vec<Check>>> {
    let theta = rng.random_range(0.5..3.0);
    let n = if rng.random_bool(0.5) {
        rng.random_range(1..=10)
    } else {
        rng.random_range(20..=60)
    };
    let values: Vec<f64> = (0..=8).map(|k| theta * k as f64 / 8.0).collect();
    let xs: Vec<_> = (0..n).map(|_| grid_dist(rng, &values, 3)).collect();
    let lambda = *[1usize, 2, 3, 4, 8, 16].choose(rng).expect("nonempty");
    Ok(bounded_sum_check(&xs, theta, lambda)?.map(|c| vec![c]))
}

fn gen_proxy(rng: &mut StreamRng, want: Side) -> Result<Option<Vec<Check>>> {
    let m = rng.random_range(1..=5);
    let coords: Vec<_> = (0..m).map(|_| grid_dist(rng, &grid(0.25, 16), 3)).collect();
    let ell = rng.random_range(1..=m);
    let theta = if rng.random_bool(0.5) {
        let y = coords.choose(rng).expect("nonempty");
        let v = y.atoms().choose(rng).expect("nonempty").v;
        if v > 0.0 {
            v
        } else {
            rng.random_range(0.05..4.0)
        }
    } else {
        rng.random_range(0.05f64.ln()..8f64.ln()).exp()
    };
    let (side, check) = separable_proxy_check(&coords, ell, theta)?;
    Ok((side == want).then(|| vec![check]))
}

fn gen_proxy_upper(rng: &mut StreamRng) -> Result<Option<Vec<Check>>> {
    gen_proxy(rng, Side::Upper)
}

fn gen_proxy_lower(rng: &mut StreamRng) -> Result<Option<Vec<Check>>> {
    gen_proxy(rng, Side::Lower)
}

fn gen_exceptional(rng: &mut StreamRng, want: Side) -> Result<Option<Vec<Check>>> {
    let m = rng.random_range(1..=4);
    let n = rng.random_range(1..=8);
    let ell = rng.random_range(1..=m);
    let theta = rng.random_range(0.5..2.0);
    let values: Vec<f64> = (0..=12).map(|k| theta * (1.0 + k as f64 / 4.0)).collect();
    // shape of each job's nonzero part, rescaled below to hit a target total mean
    let shapes: Vec<(DiscreteDistribution, f64)> = (0..n)
        .map(|_| (grid_dist(rng, &values, 2), rng.random_range(0.05..1.0)))
        .collect();
    let base: f64 = shapes.iter().map(|(s, mass)| s.mean() * mass).sum();
    let scale = ell as f64 * theta;
    let target = match want {
        Side::Upper => rng.random_range(0.05..=1.0) * scale,
        Side::Lower => rng.random_range(1.0001..5.0) * scale,
    };
    let c = target / base;
    if shapes.iter().any(|(_, mass)| mass * c > 1.0) {
        return Ok(None);
    }
    let dists: Vec<_> = shapes
        .iter()
        .map(|(s, mass)| {
            let p = mass * c;
            DiscreteDistribution::new(
                std::iter::once((0.0, 1.0 - p)).chain(s.atoms().iter().map(|a| (a.v, a.q * p))),
            )
            .expect("valid mixture")
        })
        .collect();
    let inst = StochInstance::from_dists(m, dists)?;
    let a = random_assignment(rng, n, m);
    Ok(exceptional_instance_check(&inst, &a, ell, theta)?
        .filter(|(side, _)| *side == want)
        .map(|(_, c)| vec![c]))
}

fn gen_exceptional_upper(rng: &mut StreamRng) -> Result<Option<Vec<Check>>> {
    gen_exceptional(rng, Side::Upper)
}

fn gen_exceptional_lower(rng: &mut StreamRng) -> Result<Option<Vec<Check>>> {
    gen_exceptional(rng, Side::Lower)
}

fn gen_truncated_upper(rng: &mut StreamRng) -> Result<Option<Vec<Check>>> {
    let m = rng.random_range(1..=4);
    let ell = rng.random_range(1..=m);
    let theta = rng.random_range(0.5..2.0);
    let values: Vec<f64> = (0..8).map(|k| theta * k as f64 / 8.0).collect();
    let n = rng.random_range(1..=40);
    let dists: Vec<_> = (0..n).map(|_| grid_dist(rng, &values, 3)).collect();
    let inst = StochInstance::from_dists(m, dists)?;
    let a = random_assignment(rng, n, m);
    Ok(truncated_instance_check(&inst, &a, ell, theta)?
        .filter(|(side, _)| *side == Side::Upper)
        .map(|(_, c)| c))
}

fn gen_truncated_lower(rng: &mut StreamRng) -> Result<Option<Vec<Check>>> {
    let m = rng.random_range(1..=4);
    let ell = rng.random_range(1..=m);
    let theta = 1.0;
    let lambda = lambda_for(m, ell) as f64;
    let high: Vec<f64> = (4..8).map(|k| k as f64 / 8.0).collect();
    let low: Vec<f64> = (0..8).map(|k| k as f64 / 8.0).collect();
    let budget = 8.0 * m as f64 + rng.random_range(0.0..2.0);
    let mut dists = Vec::new();
    let mut total = 0.0;
    while total <= budget {
        let x = if rng.random_bool(0.85) {
            grid_dist(rng, &high, 2)
        } else {
            grid_dist(rng, &low, 3)
        };
        total += x.scale(1.0 / (4.0 * theta)).effective_size(lambda);
        dists.push(x);
    }
    let n = dists.len();
    let inst = StochInstance::from_dists(m, dists)?;
    let a = random_assignment(rng, n, m);
    Ok(truncated_instance_check(&inst, &a, ell, theta)?
        .filter(|(side, _)| *side == Side::Lower)
        .map(|(_, c)| c))
}

fn random_norm(rng: &mut StreamRng, m: usize) -> OrderedNorm {
    let mut w: Vec<f64> = (0..m)
        .map(|_| {
            if rng.random_bool(0.3) {
                0.0
            } else {
                rng.random_range(0.0..1.0)
            }
        })
        .collect();
    w.sort_by(|a, b| b.total_cmp(a));
    if w[0] <= 0.0 {
        w[0] = 1.0;
    }
    OrderedNorm::new(w).expect("sorted nonnegative weights")
}

fn gen_majorization(rng: &mut StreamRng, pos_only: bool) -> Result<Option<Vec<Check>>> {
    let m = rng.random_range(1..=6);
    let values = grid(0.25, 16);
    let y: Vec<_> = (0..m).map(|_| grid_dist(rng, &values, 3)).collect();
    let w: Vec<_> = (0..m).map(|_| grid_dist(rng, &values, 3)).collect();
    let f = random_norm(rng, m);
    Ok(majorization_check(&y, &w, &f, pos_only)?.map(|c| vec![c]))
}

fn gen_majorization_all(rng: &mut StreamRng) -> Result<Option<Vec<Check>>> {
    gen_majorization(rng, false)
}

fn gen_majorization_pos(rng: &mut StreamRng) -> Result<Option<Vec<Check>>> {
    gen_majorization(rng, true)
}
