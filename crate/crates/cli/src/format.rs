//! On-disk formats. Instances, norms and assignments are JSON documents;
//! every file written by the tool carries a `kind` tag so `report` can tell
//! them apart. Machine numbers in files are 1-based.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use lbsched::{
    Assignment, DiscreteDistribution, OrderedNorm, StochInstance, StochJob, VectorJob, VsInstance,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VsInstanceFile {
    pub m: usize,
    pub d: usize,
    pub jobs: Vec<VsJobFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VsJobFile {
    pub id: String,
    pub p: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StochInstanceFile {
    pub m: usize,
    pub jobs: Vec<StochJobFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StochJobFile {
    pub id: String,
    pub dist: Vec<AtomFile>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomFile {
    pub v: f64,
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormFile {
    pub w: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub job: String,
    pub machine: usize,
}

/// Anything with an `assignment` field, e.g. a solution file.
#[derive(Debug, Deserialize)]
struct HasAssignment {
    assignment: Vec<Placement>,
}

/// Deserialize with the JSON path of the offending field in the message.
pub fn parse_json<T: DeserializeOwned>(text: &str, origin: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let (line, column) = (inner.line(), inner.column());
        let message = inner.to_string();
        let suffix = format!(" at line {line} column {column}");
        let message = message.strip_suffix(&suffix).unwrap_or(&message);
        anyhow!("{origin}: line {line}, column {column}: field `{path}`: {message}")
    })
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

impl VsInstanceFile {
    pub fn from_instance(inst: &VsInstance) -> Self {
        VsInstanceFile {
            m: inst.m(),
            d: inst.d(),
            jobs: inst
                .jobs()
                .iter()
                .map(|j| VsJobFile {
                    id: j.id.clone(),
                    p: j.p.clone(),
                })
                .collect(),
        }
    }

    pub fn into_instance(self) -> Result<VsInstance> {
        let jobs = self
            .jobs
            .into_iter()
            .map(|j| VectorJob::new(j.id, j.p))
            .collect();
        Ok(VsInstance::new(self.m, self.d, jobs)?)
    }
}

impl StochInstanceFile {
    pub fn from_instance(inst: &StochInstance) -> Self {
        StochInstanceFile {
            m: inst.m(),
            jobs: inst
                .jobs()
                .iter()
                .map(|j| StochJobFile {
                    id: j.id.clone(),
                    dist: j
                        .dist
                        .atoms()
                        .iter()
                        .map(|a| AtomFile { v: a.v, q: a.q })
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn into_instance(self) -> Result<StochInstance> {
        let jobs = self
            .jobs
            .into_iter()
            .enumerate()
            .map(|(k, j)| {
                let dist = DiscreteDistribution::new(j.dist.iter().map(|a| (a.v, a.q)))
                    .with_context(|| format!("field `jobs[{k}].dist` (job {:?})", j.id))?;
                Ok(StochJob { id: j.id, dist })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(StochInstance::new(self.m, jobs)?)
    }
}

pub enum AnyInstance {
    Vector(VsInstance),
    Stochastic(StochInstance),
}

pub fn parse_vs_instance(text: &str, origin: &str) -> Result<VsInstance> {
    parse_json::<VsInstanceFile>(text, origin)?
        .into_instance()
        .with_context(|| format!("{origin}: invalid vector-scheduling instance"))
}

pub fn parse_stoch_instance(text: &str, origin: &str) -> Result<StochInstance> {
    parse_json::<StochInstanceFile>(text, origin)?
        .into_instance()
        .with_context(|| format!("{origin}: invalid stochastic instance"))
}

pub fn read_vs_instance(path: &Path) -> Result<VsInstance> {
    parse_vs_instance(&read(path)?, &path.display().to_string())
}

pub fn read_stoch_instance(path: &Path) -> Result<StochInstance> {
    parse_stoch_instance(&read(path)?, &path.display().to_string())
}

/// A vector instance has a `d` field; a stochastic one does not.
pub fn read_any_instance(path: &Path) -> Result<AnyInstance> {
    let text = read(path)?;
    let origin = path.display().to_string();
    let probe: serde_json::Value = parse_json(&text, &origin)?;
    if probe.get("d").is_some() {
        Ok(AnyInstance::Vector(parse_vs_instance(&text, &origin)?))
    } else {
        Ok(AnyInstance::Stochastic(parse_stoch_instance(
            &text, &origin,
        )?))
    }
}

pub fn read_norm(path: &Path) -> Result<OrderedNorm> {
    let origin = path.display().to_string();
    let file: NormFile = parse_json(&read(path)?, &origin)?;
    OrderedNorm::new(file.w).with_context(|| format!("{origin}: field `w`"))
}

pub fn placements(ids: impl IntoIterator<Item = String>, a: &Assignment) -> Vec<Placement> {
    ids.into_iter()
        .zip(a.machines())
        .map(|(job, &i)| Placement {
            job,
            machine: i + 1,
        })
        .collect()
}

pub fn assignment_from_placements<'a>(
    ids: impl IntoIterator<Item = &'a str>,
    m: usize,
    placements: &[Placement],
) -> Result<Assignment> {
    let mut pairs = Vec::with_capacity(placements.len());
    for (k, p) in placements.iter().enumerate() {
        if p.machine == 0 {
            bail!("field `assignment[{k}].machine`: machines are numbered from 1");
        }
        pairs.push((p.job.clone(), p.machine - 1));
    }
    Ok(Assignment::from_pairs(ids, m, &pairs)?)
}

pub fn read_assignment<'a>(
    path: &Path,
    ids: impl IntoIterator<Item = &'a str>,
    m: usize,
) -> Result<Assignment> {
    let origin = path.display().to_string();
    let file: HasAssignment = parse_json(&read(path)?, &origin)?;
    assignment_from_placements(ids, m, &file.assignment).context(origin)
}
