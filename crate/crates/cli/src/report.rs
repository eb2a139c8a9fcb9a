//! Plain-text rendering of the JSON documents written by the other commands.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Result};
use lbsched::oracle::{brute_force_stoch_opt, exact_expected_topl};
use lbsched::{Error, OracleBudget, StochInstance};

use crate::format::{assignment_from_placements, parse_json, read_stoch_instance};
use crate::solution::{
    KindProbe, OracleResult, StochSolution, VerifyReport, VsConstants, VsSolution,
};

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.6}"))
}

fn constants_block(out: &mut String, c: &VsConstants) {
    let _ = writeln!(out, "constants");
    let _ = writeln!(out, "  sampling numerator   {}", c.q_numerator);
    let _ = writeln!(out, "  threshold factor     {}", c.threshold_factor);
    let _ = writeln!(out, "  sampling denominator {}", c.q_denominator);
    let _ = writeln!(out, "  scale L              {:.6}", c.scale_l);
    let _ = writeln!(out, "  candidates per round {}", c.trial_budget);
}

pub fn render_vs(s: &VsSolution) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "vector scheduling: m = {}, d = {}, n = {}, seed = {}",
        s.m, s.d, s.n, s.seed
    );
    constants_block(&mut out, &s.constants);
    let sch = &s.schedule;
    let _ = writeln!(out, "schedule");
    let _ = writeln!(out, "  route       {}", sch.route);
    let _ = writeln!(out, "  attempts    {} of {}", s.attempts, s.retries);
    let _ = writeln!(
        out,
        "  rounds      {} ({} rejected candidates)",
        sch.iterations, sch.resamples
    );
    let _ = writeln!(out, "  LB          {:.6}", sch.lb);
    let _ = writeln!(out, "  makespan    {:.6}", sch.makespan);
    let _ = writeln!(out, "  bound       {:.6}", sch.bound);
    let ratio = if sch.lb > 0.0 {
        sch.makespan / sch.lb
    } else {
        0.0
    };
    let _ = writeln!(out, "  makespan/LB {ratio:.6}");
    let _ = writeln!(out, "  certified   {}", sch.certified);
    let _ = writeln!(out, "machine  jobs  max load");
    for (i, load) in s.machine_loads.iter().enumerate() {
        let jobs = s.assignment.iter().filter(|p| p.machine == i + 1).count();
        let _ = writeln!(out, "{:>7}  {jobs:>4}  {load:.6}", i + 1);
    }
    out
}

fn exact_columns(
    s: &StochSolution,
    inst: &StochInstance,
    budget: &OracleBudget,
) -> Result<Vec<Option<(f64, f64)>>> {
    let a = assignment_from_placements(
        inst.jobs().iter().map(|j| j.id.as_str()),
        inst.m(),
        &s.assignment,
    )?;
    s.rows
        .iter()
        .map(|row| {
            let exact = exact_expected_topl(inst, &a, row.ell, budget);
            let best = brute_force_stoch_opt(inst, row.ell, budget);
            match (exact, best) {
                (Ok(e), Ok((_, o))) => Ok(Some((e, o))),
                (Err(Error::Capacity { .. }), _) | (_, Err(Error::Capacity { .. })) => Ok(None),
                (Err(e), _) | (_, Err(e)) => Err(e.into()),
            }
        })
        .collect()
}

pub fn render_stoch(
    s: &StochSolution,
    inst: Option<&StochInstance>,
    budget: &OracleBudget,
) -> Result<String> {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "stochastic load balancing: m = {}, n = {}, epsilon = {}, seed = {}",
        s.m, s.n, s.epsilon, s.seed
    );
    let pos: Vec<String> = s.pos.iter().map(ToString::to_string).collect();
    let _ = writeln!(out, "thresholds computed for l in {{{}}}", pos.join(", "));
    constants_block(&mut out, &s.constants);
    let _ = writeln!(out, "  alpha                {:.6}", s.alpha);
    if let Some(sch) = &s.schedule {
        let _ = writeln!(
            out,
            "  reduction schedule   {} route, makespan {:.6}, bound {:.6}, attempts {}",
            sch.route, sch.makespan, sch.bound, s.attempts
        );
    }
    let exact = match inst {
        Some(inst) => Some(exact_columns(s, inst, budget)?),
        None => None,
    };
    let _ = write!(
        out,
        "{:>5} {:>7} {:>12} {:>12} {:>12} {:>12} {:>12} {:>10}",
        "l", "lambda", "t", "t'", "opt_lower", "alg_upper", "loose_upper", "ratio"
    );
    if exact.is_some() {
        let _ = write!(out, " {:>12} {:>12} {:>10}", "E[Top-l]", "OPT_l", "E/OPT");
    }
    out.push('\n');
    for (k, r) in s.rows.iter().enumerate() {
        let _ = write!(
            out,
            "{:>5} {:>7} {:>12.6} {:>12.6} {:>12} {:>12.6} {:>12.6} {:>10}",
            r.ell,
            r.lambda,
            r.t,
            r.t_prime,
            opt(r.opt_lower),
            r.alg_upper,
            r.loose_upper,
            r.ratio.map_or_else(|| "-".into(), |x| format!("{x:.3}"))
        );
        if let Some(cols) = &exact {
            match cols[k] {
                Some((e, o)) => {
                    let ratio = if o > 0.0 {
                        format!("{:.4}", e / o)
                    } else {
                        "-".into()
                    };
                    let _ = write!(out, " {e:>12.6} {o:>12.6} {ratio:>10}");
                }
                None => {
                    let _ = write!(out, " {:>12} {:>12} {:>10}", "over budget", "-", "-");
                }
            }
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn render_oracle(r: &OracleResult) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "oracle for {} (m = {}, n = {})", r.instance, r.m, r.n);
    if r.kind == "vs-oracle" {
        let _ = writeln!(out, "  LB        {}", opt(r.lb));
        let _ = writeln!(out, "  OPT       {}", opt(r.opt));
        let _ = writeln!(out, "  makespan  {}", opt(r.makespan));
        return out;
    }
    let _ = writeln!(
        out,
        "{:>5} {:>12} {:>12} {:>12} {:>10} {:>8}",
        "l", "OPT_l", "E[Top-l]", "MC", "MC s.e.", "E/OPT"
    );
    for row in &r.rows {
        let (mc, se) = row
            .monte_carlo
            .as_ref()
            .map_or(("-".into(), "-".into()), |m| {
                (format!("{:.6}", m.estimate), format!("{:.2e}", m.std_error))
            });
        let _ = writeln!(
            out,
            "{:>5} {:>12} {:>12} {:>12} {:>10} {:>8}",
            row.ell,
            opt(row.opt),
            opt(row.expected),
            mc,
            se,
            row.ratio.map_or_else(|| "-".into(), |x| format!("{x:.4}"))
        );
    }
    if let Some(v) = r.norm_expected {
        let _ = writeln!(out, "  E[f(load)] = {v:.6}");
    }
    out
}

pub fn render_verify(r: &VerifyReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "verification: seed = {}, {} cases per suite, sweep scale {}, epsilon = {}",
        r.seed, r.cases, r.sweep_cases, r.epsilon
    );
    let _ = writeln!(
        out,
        "{:<36} {:>6} {:>10} {:>8} {:>12}",
        "suite", "cases", "violations", "skipped", "tightness"
    );
    for s in &r.suites {
        let _ = writeln!(
            out,
            "{:<36} {:>6} {:>10} {:>8} {:>12}",
            s.name,
            s.cases,
            s.violations,
            s.skipped,
            s.max_tightness
                .map_or_else(|| "-".into(), |x| format!("{x:.4}"))
        );
        if let Some(v) = &s.first_violation {
            let _ = writeln!(out, "    first violation: {v}");
        }
    }
    let _ = writeln!(
        out,
        "{:<36} {:>6} {:>10} {:>8}  metric",
        "sweep", "cases", "failures", "status"
    );
    for s in &r.sweeps {
        let _ = writeln!(
            out,
            "{:<36} {:>6} {:>10} {:>8}  {} = {:.4}",
            s.name,
            s.cases,
            s.failures,
            if s.passed { "pass" } else { "FAIL" },
            s.metric_name,
            s.metric
        );
        if let Some(v) = &s.first_failure {
            let _ = writeln!(out, "    first failure: {v}");
        }
    }
    let _ = writeln!(
        out,
        "total violations: {} ({})",
        r.total_violations,
        if r.passed {
            "all checks passed"
        } else {
            "checks FAILED"
        }
    );
    out
}

/// Render any document written by this tool.
pub fn render_file(
    text: &str,
    origin: &str,
    instance: Option<&Path>,
    budget: &OracleBudget,
) -> Result<String> {
    let probe: KindProbe = parse_json(text, origin)?;
    match probe.kind.as_str() {
        "vs-solution" => Ok(render_vs(&parse_json(text, origin)?)),
        "stoch-solution" => {
            let s: StochSolution = parse_json(text, origin)?;
            let inst = instance.map(read_stoch_instance).transpose()?;
            render_stoch(&s, inst.as_ref(), budget)
        }
        "vs-oracle" | "stoch-oracle" => Ok(render_oracle(&parse_json(text, origin)?)),
        "verify-report" => Ok(render_verify(&parse_json(text, origin)?)),
        other => bail!("{origin}: field `kind`: unknown document kind {other:?}"),
    }
}
