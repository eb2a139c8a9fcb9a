use std::path::{Path, PathBuf};

use anyhow::{bail, Result};
use lbsched::gen::{gen_stoch, gen_vs, normalize_lb, StochFamily, VsFamily};
use lbsched::oracle::{
    brute_force_stoch_opt, brute_force_vs_opt, exact_expected_norm, exact_expected_topl,
    mc_expected_topl, verify_lemma_suite,
};
use lbsched::seed::{stream, stream_rng};
use lbsched::sweep::all_sweeps;
use lbsched::{
    compute_lb, load_matrix, pos_set, solve_min_norm, vs_schedule_with_retries, Error,
    OracleBudget, ScheduleResult, StochInstance, VsInstance, VsParams,
};

use crate::format::{
    placements, read_any_instance, read_assignment, read_norm, read_stoch_instance,
    read_vs_instance, AnyInstance, StochInstanceFile, VsInstanceFile,
};
use crate::output::emit_json;
use crate::solution::{
    Estimate, OracleResult, OracleRow, ScheduleSummary, StochRow, StochSolution, SuiteLine,
    SweepLine, VerifyReport, VsConstants, VsSolution,
};

/// Whether every requested check or certificate held.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Passed,
    Failed,
}

#[derive(Debug, Clone)]
pub struct Common {
    pub seed: u64,
    pub epsilon: f64,
    pub retries: usize,
    pub budget: OracleBudget,
    pub cases: usize,
}

pub fn gen_vs_cmd(
    c: &Common,
    family: VsFamily,
    n: usize,
    m: usize,
    d: usize,
    normalize: bool,
    out: Option<&Path>,
) -> Result<Outcome> {
    let mut rng = stream_rng(c.seed, stream::GEN_VS);
    let mut inst = gen_vs(family, n, m, d, &mut rng)?;
    if normalize {
        inst = normalize_lb(&inst)?;
    }
    emit_json(out, &VsInstanceFile::from_instance(&inst))?;
    Ok(Outcome::Passed)
}

pub fn gen_stoch_cmd(
    c: &Common,
    family: StochFamily,
    n: usize,
    m: usize,
    out: Option<&Path>,
) -> Result<Outcome> {
    let mut rng = stream_rng(c.seed, stream::GEN_STOCH);
    let inst = gen_stoch(family, n, m, &mut rng)?;
    emit_json(out, &StochInstanceFile::from_instance(&inst))?;
    Ok(Outcome::Passed)
}

fn constants(params: &VsParams, m: usize, d: usize) -> VsConstants {
    VsConstants {
        q_numerator: params.q_numerator,
        threshold_factor: params.threshold_factor,
        q_denominator: format!("{:?}", params.q_denominator).to_lowercase(),
        scale_l: params.scale_l(d),
        trial_budget: params.trial_budget(m),
    }
}

fn summary(res: &ScheduleResult) -> ScheduleSummary {
    ScheduleSummary {
        route: serde_json::to_value(res.route)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default(),
        makespan: res.makespan,
        lb: res.lb,
        bound: res.bound,
        certified: res.certified,
        iterations: res.iterations,
        resamples: res.resamples,
    }
}

fn vs_ids(inst: &VsInstance) -> impl Iterator<Item = String> + '_ {
    inst.jobs().iter().map(|j| j.id.clone())
}

fn stoch_ids(inst: &StochInstance) -> impl Iterator<Item = String> + '_ {
    inst.jobs().iter().map(|j| j.id.clone())
}

pub fn solve_vs_cmd(
    c: &Common,
    input: &Path,
    params: &VsParams,
    out: Option<&Path>,
) -> Result<Outcome> {
    params.validate()?;
    let inst = read_vs_instance(input)?;
    let mut rng = stream_rng(c.seed, stream::SOLVE_VS);
    let (res, attempts) = match vs_schedule_with_retries(&inst, params, &mut rng, c.retries) {
        Ok(ok) => ok,
        Err(f) => {
            eprintln!(
                "error: scheduling failed after {} attempts: {f}",
                c.retries.max(1)
            );
            return Ok(Outcome::Failed);
        }
    };
    let loads = load_matrix(&inst, &res.assignment)?;
    let solution = VsSolution {
        kind: "vs-solution".into(),
        seed: c.seed,
        m: inst.m(),
        d: inst.d(),
        n: inst.n(),
        retries: c.retries,
        attempts,
        constants: constants(params, inst.m(), inst.d()),
        schedule: summary(&res),
        machine_loads: loads
            .rows()
            .iter()
            .map(|row| row.iter().copied().fold(0.0, f64::max))
            .collect(),
        assignment: placements(vs_ids(&inst), &res.assignment),
    };
    emit_json(out, &solution)?;
    Ok(if res.certified {
        Outcome::Passed
    } else {
        Outcome::Failed
    })
}

pub fn solve_stoch_cmd(c: &Common, input: &Path, out: Option<&Path>) -> Result<Outcome> {
    let inst = read_stoch_instance(input)?;
    let params = VsParams::default();
    let mut rng = stream_rng(c.seed, stream::SOLVE_STOCH);
    let attempts_allowed = c.retries.max(1);
    let mut attempts = 0;
    let sol = loop {
        attempts += 1;
        match solve_min_norm(&inst, c.epsilon, &mut rng, &params) {
            Ok(sol) => break sol,
            Err(Error::Failure(_)) | Err(Error::Uncertified { .. })
                if attempts < attempts_allowed => {}
            Err(e @ (Error::Failure(_) | Error::Uncertified { .. })) => {
                eprintln!("error: scheduling failed after {attempts} attempts: {e}");
                return Ok(Outcome::Failed);
            }
            Err(e) => return Err(e.into()),
        }
    };
    let rows = sol
        .profile
        .rows
        .iter()
        .zip(&sol.certificate.rows)
        .map(|(p, cert)| StochRow {
            ell: p.ell,
            lambda: p.lambda,
            t: p.t,
            t_prime: p.t_prime,
            degenerate: p.degenerate,
            opt_lower: cert.opt_lower,
            alg_upper: cert.alg_upper,
            loose_upper: cert.loose_upper,
            ratio: cert.ratio,
        })
        .collect();
    let solution = StochSolution {
        kind: "stoch-solution".into(),
        seed: c.seed,
        m: inst.m(),
        n: inst.n(),
        epsilon: c.epsilon,
        retries: c.retries,
        attempts,
        pos: pos_set(inst.m()),
        alpha: sol.certificate.alpha,
        constants: constants(&params, inst.m(), sol.reduction.d()),
        schedule: sol.schedule.as_ref().map(summary),
        rows,
        assignment: placements(stoch_ids(&inst), &sol.assignment),
    };
    emit_json(out, &solution)?;
    Ok(Outcome::Passed)
}

pub struct OracleArgs {
    pub input: PathBuf,
    pub assignment: Option<PathBuf>,
    pub ell: Option<usize>,
    pub norm: Option<PathBuf>,
}

pub fn oracle_cmd(c: &Common, args: &OracleArgs, out: Option<&Path>) -> Result<Outcome> {
    c.budget.validate()?;
    let instance_name = args.input.display().to_string();
    let result = match read_any_instance(&args.input)? {
        AnyInstance::Vector(inst) => {
            if args.ell.is_some() || args.norm.is_some() {
                bail!("--ell and --norm apply to stochastic instances only");
            }
            let (_, opt) = brute_force_vs_opt(&inst, &c.budget)?;
            let makespan = match &args.assignment {
                Some(path) => {
                    let a =
                        read_assignment(path, inst.jobs().iter().map(|j| j.id.as_str()), inst.m())?;
                    Some(lbsched::makespan(&inst, &a)?)
                }
                None => None,
            };
            OracleResult {
                kind: "vs-oracle".into(),
                seed: c.seed,
                instance: instance_name,
                m: inst.m(),
                n: inst.n(),
                lb: Some(compute_lb(&inst)),
                opt: Some(opt),
                makespan,
                rows: Vec::new(),
                norm_expected: None,
            }
        }
        AnyInstance::Stochastic(inst) => {
            let a = match &args.assignment {
                Some(path) => Some(read_assignment(
                    path,
                    inst.jobs().iter().map(|j| j.id.as_str()),
                    inst.m(),
                )?),
                None => None,
            };
            let ells = match args.ell {
                Some(ell) => vec![ell],
                None => pos_set(inst.m()),
            };
            let mut rng = stream_rng(c.seed, stream::ORACLE_MC);
            let mut rows = Vec::with_capacity(ells.len());
            for ell in ells {
                let (_, opt) = brute_force_stoch_opt(&inst, ell, &c.budget)?;
                let (expected, monte_carlo) = match &a {
                    Some(a) => {
                        let exact = exact_expected_topl(&inst, a, ell, &c.budget)?;
                        let mc = mc_expected_topl(&inst, a, ell, c.budget.mc_samples, &mut rng)?;
                        let est = Estimate {
                            estimate: mc.estimate,
                            std_error: mc.std_error,
                            samples: mc.samples,
                        };
                        (Some(exact), Some(est))
                    }
                    None => (None, None),
                };
                rows.push(OracleRow {
                    ell,
                    opt: Some(opt),
                    expected,
                    monte_carlo,
                    ratio: expected.filter(|_| opt > 0.0).map(|e| e / opt),
                });
            }
            let norm_expected = match (&args.norm, &a) {
                (Some(path), Some(a)) => {
                    Some(exact_expected_norm(&inst, a, &read_norm(path)?, &c.budget)?)
                }
                (Some(_), None) => bail!("--norm needs --assignment"),
                _ => None,
            };
            OracleResult {
                kind: "stoch-oracle".into(),
                seed: c.seed,
                instance: instance_name,
                m: inst.m(),
                n: inst.n(),
                lb: None,
                opt: None,
                makespan: None,
                rows,
                norm_expected,
            }
        }
    };
    emit_json(out, &result)?;
    Ok(Outcome::Passed)
}

pub fn verify_cmd(c: &Common, sweep_cases: usize, out: Option<&Path>) -> Result<Outcome> {
    let lemmas = verify_lemma_suite(c.seed, c.cases)?;
    let sweeps = all_sweeps(c.seed, sweep_cases, c.epsilon, c.retries)?;
    let suites: Vec<SuiteLine> = lemmas
        .suites
        .iter()
        .map(|s| SuiteLine {
            name: s.name.into(),
            statement: s.statement.into(),
            cases: s.cases,
            violations: s.violations,
            skipped: s.skipped,
            max_tightness: s.max_tightness,
            first_violation: s.first_violation.clone(),
        })
        .collect();
    let sweeps: Vec<SweepLine> = sweeps
        .into_iter()
        .map(|s| SweepLine {
            name: s.name.into(),
            cases: s.cases,
            failures: s.failures,
            passed: s.passed,
            metric_name: s.metric_name.into(),
            metric: s.metric,
            first_failure: s.first_failure,
        })
        .collect();
    let passed = lemmas.passed() && sweeps.iter().all(|s| s.passed);
    let report = VerifyReport {
        kind: "verify-report".into(),
        seed: c.seed,
        cases: c.cases,
        sweep_cases,
        epsilon: c.epsilon,
        passed,
        total_violations: lemmas.total_violations()
            + sweeps.iter().map(|s| s.failures).sum::<usize>(),
        suites,
        sweeps,
    };
    if let Some(path) = out {
        emit_json(Some(path), &report)?;
    }
    print!("{}", crate::report::render_verify(&report));
    Ok(if passed {
        Outcome::Passed
    } else {
        Outcome::Failed
    })
}
