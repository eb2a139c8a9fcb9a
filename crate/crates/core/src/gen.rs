//! Seeded instance generators used by the CLI, the tests, and the benches.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::Serialize;

use crate::dist::DiscreteDistribution;
use crate::error::{Error, Result};
use crate::minnorm::StochInstance;
use crate::model::{compute_lb, VsInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VsFamily {
    /// Coordinates uniform on `[0, 1)`.
    Uniform,
    /// Each job is large in one random dimension and small elsewhere.
    Spike,
    /// Bounded Pareto coordinates with shape 1.5.
    PowerLaw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StochFamily {
    Bernoulli,
    PointMass,
    /// Up to three atoms with bounded Pareto values.
    PowerLaw,
}

macro_rules! family_names {
    ($ty:ty, $($variant:ident => $name:literal),+) => {
        impl $ty {
            pub const ALL: &'static [$ty] = &[$(<$ty>::$variant),+];

            pub fn name(self) -> &'static str {
                match self { $(<$ty>::$variant => $name),+ }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($name => Ok(<$ty>::$variant),)+
                    other => Err(Error::Argument(format!("unknown family {other:?}"))),
                }
            }
        }
    };
}

family_names!(VsFamily, Uniform => "uniform", Spike => "spike", PowerLaw => "power-law");
family_names!(StochFamily, Bernoulli => "bernoulli", PointMass => "point-mass", PowerLaw => "power-law");

fn pareto<R: Rng + ?Sized>(rng: &mut R, shape: f64, cap: f64) -> f64 {
    let u: f64 = rng.random_range(f64::EPSILON..1.0);
    u.powf(-1.0 / shape).min(cap)
}

pub fn gen_vs<R: Rng + ?Sized>(
    family: VsFamily,
    n: usize,
    m: usize,
    d: usize,
    rng: &mut R,
) -> Result<VsInstance> {
    let sizes = (0..n)
        .map(|_| match family {
            VsFamily::Uniform => (0..d).map(|_| rng.random_range(0.0..1.0)).collect(),
            VsFamily::Spike => {
                let hot = rng.random_range(0..d);
                (0..d)
                    .map(|r| {
                        if r == hot {
                            rng.random_range(0.5..1.0)
                        } else {
                            rng.random_range(0.0..0.05)
                        }
                    })
                    .collect()
            }
            VsFamily::PowerLaw => (0..d).map(|_| pareto(rng, 1.5, 100.0)).collect(),
        })
        .collect();
    VsInstance::from_sizes(m, d, sizes)
}

/// Rescale so that the natural lower bound is exactly 1 (no-op when it is 0).
pub fn normalize_lb(inst: &VsInstance) -> Result<VsInstance> {
    let lb = compute_lb(inst);
    if lb == 0.0 {
        return Ok(inst.clone());
    }
    inst.scale(1.0 / lb)
}

pub fn gen_stoch<R: Rng + ?Sized>(
    family: StochFamily,
    n: usize,
    m: usize,
    rng: &mut R,
) -> Result<StochInstance> {
    let dists = (0..n)
        .map(|_| match family {
            StochFamily::Bernoulli => DiscreteDistribution::bernoulli(
                rng.random_range(0.05..0.95),
                rng.random_range(0.5..10.0),
            ),
            StochFamily::PointMass => DiscreteDistribution::point_mass(rng.random_range(0.0..5.0)),
            StochFamily::PowerLaw => {
                let k = rng.random_range(1..=3);
                let weights: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.0)).collect();
                let total: f64 = weights.iter().sum();
                DiscreteDistribution::new(
                    weights
                        .into_iter()
                        .map(|w| (pareto(rng, 1.2, 1000.0) - 1.0, w / total)),
                )
            }
        })
        .collect::<Result<Vec<_>>>()?;
    StochInstance::from_dists(m, dists)
}
