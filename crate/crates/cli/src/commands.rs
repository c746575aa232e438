use std::fmt::Write as _;

use anyhow::{anyhow, bail, Context, Result};
use fracineq::explorer::{
    alpha_scan, counterexample_search, parse_alpha_grid, FamilyDescriptor, RowStatus, ScanPlan, ScanReport,
    SearchBudget, SearchReport,
};
use fracineq::expr::Expr;
use fracineq::fracint::{left_integral, right_integral, FracOrder, QuadratureConfig};
use fracineq::invexity::{
    certify_preinvex, certify_prequasiinvex, certify_quasiconvex, check_condition_c, check_interpolation_identity,
    check_invex_set, CertReport, DerivativePower, EtaMap, Interval, RealFn, SamplingPlan,
};
use fracineq::report::sig17;
use fracineq::verify::{verify, HypothesisCheck, InequalityCase, TheoremId, Verdict, VerificationResult};
use fracineq::DEFAULT_SEED;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Property, RunConfig, Side};

pub const CSV_HEADER: [&str; 6] = ["alpha", "lhs", "rhs", "margin", "ratio", "status"];

/// Result of one command: exit code, human summary, JSON payload, and
/// optionally CSV rows in the fixed column layout.
pub struct Outcome {
    pub exit: u8,
    pub summary: String,
    pub result: Value,
    pub csv: Option<Vec<[String; 6]>>,
}

/// Shortest round-trip decimal, switching to exponent form for very small
/// or very large magnitudes.
pub struct Short(pub f64);

impl std::fmt::Display for Short {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let a = self.0.abs();
        if a == 0.0 || !a.is_finite() || (1e-5..1e16).contains(&a) {
            write!(f, "{}", self.0)
        } else {
            write!(f, "{:e}", self.0)
        }
    }
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    Ok(serde_json::to_value(v)?)
}

fn need<T: Copy>(v: Option<T>, flag: &str) -> Result<T> {
    v.ok_or_else(|| anyhow!("missing --{flag}"))
}

fn need_str<'a>(v: &'a Option<String>, flag: &str) -> Result<&'a str> {
    v.as_deref().ok_or_else(|| anyhow!("missing --{flag}"))
}

fn quad_config(cfg: &RunConfig) -> QuadratureConfig {
    let mut q = QuadratureConfig::default();
    if let Some(n) = cfg.nodes {
        q.nodes_per_panel = n;
    }
    if let Some(m) = cfg.max_panels {
        q.max_panels = m;
    }
    if let Some(m) = cfg.method {
        q.method = m;
    }
    q
}

fn sampling(cfg: &RunConfig) -> SamplingPlan {
    let mut s = SamplingPlan { seed: cfg.seed.unwrap_or(DEFAULT_SEED), ..Default::default() };
    if let Some(g) = cfg.grid_points {
        s.grid_points = g;
    }
    if let Some(n) = cfg.samples {
        s.random_samples = n;
    }
    s
}

/// Fills defaults so the stored configuration is complete.
pub fn resolve(mut cfg: RunConfig) -> RunConfig {
    cfg.seed.get_or_insert(DEFAULT_SEED);
    cfg
}

fn case_from(cfg: &RunConfig, theorem: TheoremId, f: &str, a: f64, b: f64) -> Result<InequalityCase> {
    let mut case = InequalityCase::new(theorem, f, a, b);
    case.eta = cfg.eta.clone();
    case.domain = cfg.domain.map(|[lo, hi]| Interval { lo, hi });
    case.alpha = cfg.alpha.unwrap_or(1.0);
    case.p = cfg.p;
    case.q = cfg.q;
    case.remark_base = cfg.remark_base;
    if let Some(t) = cfg.tol {
        case.tol = t;
    }
    case.quad = quad_config(cfg);
    case.sampling = sampling(cfg);
    case.check_hypotheses = cfg.check_hypotheses.unwrap_or(true);
    Ok(case)
}

fn csv_num(v: Option<f64>) -> String {
    v.map(sig17).unwrap_or_else(|| "n/a".into())
}

pub fn integrate(cfg: &RunConfig) -> Result<Outcome> {
    let f = Expr::parse(need_str(&cfg.f, "f")?).context("parsing --f")?;
    let alpha = FracOrder::new(need(cfg.alpha, "alpha")?)?;
    let x = need(cfg.x, "x")?;
    let mut quad = quad_config(cfg);
    if let Some(t) = cfg.tol {
        quad.abs_tol = t;
    }
    let side = cfg.side.unwrap_or(Side::Left);
    let r = match side {
        Side::Left => left_integral(&f, need(cfg.a, "a")?, x, alpha, &quad)?,
        Side::Right => right_integral(&f, x, need(cfg.b, "b")?, alpha, &quad)?,
    };
    let mut summary = String::new();
    writeln!(summary, "value = {}", Short(r.value))?;
    writeln!(summary, "error_estimate = {}", Short(r.error_estimate))?;
    writeln!(summary, "panels = {}", r.panels_used)?;
    if !r.converged {
        writeln!(summary, "quadrature did not converge within {} panels", quad.max_panels)?;
    }
    Ok(Outcome { exit: if r.converged { 0 } else { 2 }, summary, result: to_value(&r)?, csv: None })
}

fn verdict_exit(v: Verdict) -> u8 {
    match v {
        Verdict::Holds => 0,
        Verdict::Violated => 1,
        Verdict::Inconclusive => 3,
    }
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Holds => "holds",
        Verdict::Violated => "violated",
        Verdict::Inconclusive => "inconclusive",
    }
}

fn describe_cert(out: &mut String, r: &CertReport) -> std::fmt::Result {
    let tag = if r.certified() { "certified on samples" } else { "violated" };
    write!(out, "{tag} ({} samples, max violation {})", r.samples_used, Short(r.max_violation))?;
    if let Some(w) = &r.witness {
        write!(out, "; witness x = {}, y = {}, t = {}", Short(w.x), Short(w.y), Short(w.t))?;
        if let Some(t2) = w.t2 {
            write!(out, ", t2 = {}", Short(t2))?;
        }
        write!(out, ", lhs = {}, rhs = {}", Short(w.lhs), Short(w.rhs))?;
    }
    Ok(())
}

fn describe_hypotheses(out: &mut String, hyps: &[HypothesisCheck]) -> std::fmt::Result {
    if hyps.is_empty() {
        return Ok(());
    }
    writeln!(out, "hypotheses:")?;
    for h in hyps {
        write!(out, "  {}: ", h.statement)?;
        match (&h.report, &h.error) {
            (Some(r), _) => describe_cert(out, r)?,
            (None, Some(e)) => write!(out, "could not be checked: {e}")?,
            (None, None) => write!(out, "not checked")?,
        }
        writeln!(out)?;
    }
    Ok(())
}

fn describe_result(r: &VerificationResult) -> Result<String> {
    let mut s = String::new();
    writeln!(s, "{}: {}", r.theorem_id, verdict_str(r.status))?;
    writeln!(s, "  lhs    = {}", Short(r.lhs))?;
    writeln!(s, "  rhs    = {}", Short(r.rhs))?;
    writeln!(s, "  margin = {}", Short(r.margin))?;
    for st in &r.stages {
        writeln!(s, "  stage {}: {} (margin {})", st.label, verdict_str(st.status), Short(st.margin))?;
    }
    describe_hypotheses(&mut s, &r.hypotheses)?;
    for w in &r.warnings {
        writeln!(s, "warning: {w}")?;
    }
    for n in &r.notes {
        writeln!(s, "note: {n}")?;
    }
    Ok(s)
}

pub fn verify_cmd(cfg: &RunConfig) -> Result<Outcome> {
    let theorem = need(cfg.theorem, "theorem")?;
    let case = case_from(cfg, theorem, need_str(&cfg.f, "f")?, need(cfg.a, "a")?, need(cfg.b, "b")?)?;
    let r = verify(&case)?;
    let ratio = (r.rhs > fracineq::explorer::RATIO_FLOOR).then(|| r.lhs / r.rhs);
    let row = [
        sig17(r.inputs.alpha),
        sig17(r.lhs),
        sig17(r.rhs),
        sig17(r.margin),
        csv_num(ratio),
        verdict_str(r.status).to_string(),
    ];
    Ok(Outcome {
        exit: verdict_exit(r.status),
        summary: describe_result(&r)?,
        result: to_value(&r)?,
        csv: Some(vec![row]),
    })
}

pub fn certify(cfg: &RunConfig) -> Result<Outcome> {
    let property = need(cfg.property, "property")?;
    let plan = sampling(cfg);
    let plan = SamplingPlan { tolerance: cfg.tol.unwrap_or(plan.tolerance), ..plan };
    let (lo, hi) = match cfg.domain {
        Some([lo, hi]) => (lo, hi),
        None => (cfg.a.unwrap_or(0.0), cfg.b.unwrap_or(1.0)),
    };
    let domain = Interval::new(lo, hi)?;
    let eta = EtaMap::from_spec(cfg.eta.as_deref().unwrap_or("y - x"), domain)?;
    let f_expr = || -> Result<Expr> { Expr::parse(need_str(&cfg.f, "f")?).context("parsing --f") };

    let report = match property {
        Property::ConditionC => {
            let plan = SamplingPlan { residual_tolerance: cfg.tol.unwrap_or(plan.residual_tolerance), ..plan };
            check_condition_c(&eta, domain, &plan)?
        }
        Property::Interpolation => {
            let plan = SamplingPlan { residual_tolerance: cfg.tol.unwrap_or(plan.residual_tolerance), ..plan };
            check_interpolation_identity(&eta, domain, &plan)?
        }
        Property::InvexSet => check_invex_set(domain, &eta, &plan)?,
        Property::Quasiconvex | Property::Preinvex | Property::Prequasiinvex => {
            let f = f_expr()?;
            let power = cfg.derivative_power.map(|q| DerivativePower { f: &f, q });
            let target: &dyn RealFn = match &power {
                Some(p) => p,
                None => &f,
            };
            match property {
                Property::Quasiconvex => certify_quasiconvex(target, lo, hi, &plan)?,
                Property::Preinvex => certify_preinvex(target, &eta, domain, &plan)?,
                _ => certify_prequasiinvex(target, &eta, domain, &plan)?,
            }
        }
    };
    let mut summary = format!("{}: ", report.property);
    describe_cert(&mut summary, &report)?;
    summary.push('\n');
    Ok(Outcome { exit: if report.certified() { 0 } else { 1 }, summary, result: to_value(&report)?, csv: None })
}

fn scan_rows(report: &ScanReport) -> Vec<[String; 6]> {
    report
        .rows
        .iter()
        .map(|r| {
            [sig17(r.alpha), csv_num(r.lhs), csv_num(r.rhs), csv_num(r.margin), csv_num(r.ratio), r.status.as_str().into()]
        })
        .collect()
}

pub fn scan(cfg: &RunConfig) -> Result<Outcome> {
    let theorem = need(cfg.theorem, "theorem")?;
    let alphas = parse_alpha_grid(need_str(&cfg.alpha_grid, "alpha-grid")?)?;
    let case = case_from(cfg, theorem, need_str(&cfg.f, "f")?, need(cfg.a, "a")?, need(cfg.b, "b")?)?;
    let report = alpha_scan(&ScanPlan { case, alphas })?;
    let mut s = String::new();
    writeln!(s, "{}", CSV_HEADER.join("\t"))?;
    let show = |v: Option<f64>| v.map(|x| Short(x).to_string()).unwrap_or_else(|| "n/a".into());
    for r in &report.rows {
        writeln!(s, "{}\t{}\t{}\t{}\t{}\t{}", Short(r.alpha), show(r.lhs), show(r.rhs), show(r.margin), show(r.ratio), r.status.as_str())?;
        if let Some(e) = &r.error {
            writeln!(s, "  error: {e}")?;
        }
    }
    describe_hypotheses(&mut s, &report.hypotheses)?;
    let exit = match report.overall() {
        RowStatus::Holds => 0,
        RowStatus::Violated => 1,
        RowStatus::Inconclusive => 3,
        RowStatus::Failed => 2,
    };
    Ok(Outcome { exit, summary: s, csv: Some(scan_rows(&report)), result: to_value(&report)? })
}

pub fn search(cfg: &RunConfig) -> Result<Outcome> {
    let theorem = need(cfg.theorem, "theorem")?;
    let family = FamilyDescriptor::from_spec(cfg.family.as_deref().unwrap_or("quadratic"))?;
    let budget = SearchBudget { max_evals: cfg.budget.unwrap_or(200), seed: cfg.seed.unwrap_or(DEFAULT_SEED) };
    let template = case_from(cfg, theorem, cfg.f.as_deref().unwrap_or("x"), cfg.a.unwrap_or(0.0), cfg.b.unwrap_or(1.0))?;
    let report: SearchReport = counterexample_search(theorem, &family, budget, &template)?;
    let mut s = String::new();
    writeln!(s, "{} evaluations over `{}`", report.evaluations, family.expr)?;
    let csv = match &report.witness {
        Some(w) => {
            let params: Vec<String> = w.params.iter().map(|(n, v)| format!("{n} = {}", Short(*v))).collect();
            writeln!(s, "witness: {}", params.join(", "))?;
            writeln!(s, "  f = {}", w.result.inputs.f)?;
            s.push_str(&describe_result(&w.result)?);
            let r = &w.result;
            let ratio = (r.rhs > fracineq::explorer::RATIO_FLOOR).then(|| r.lhs / r.rhs);
            Some(vec![[
                sig17(r.inputs.alpha),
                sig17(r.lhs),
                sig17(r.rhs),
                sig17(r.margin),
                csv_num(ratio),
                verdict_str(r.status).into(),
            ]])
        }
        None => {
            writeln!(s, "no counterexample found within budget")?;
            Some(Vec::new())
        }
    };
    Ok(Outcome { exit: if report.witness.is_some() { 1 } else { 0 }, summary: s, result: to_value(&report)?, csv })
}

/// Dispatches on the command name stored in the configuration.
pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    match cfg.command.as_deref() {
        Some("integrate") => integrate(cfg),
        Some("verify") => verify_cmd(cfg),
        Some("certify") => certify(cfg),
        Some("scan") => scan(cfg),
        Some("search") => search(cfg),
        Some(other) => bail!("unknown command `{other}`"),
        None => bail!("configuration does not name a command"),
    }
}

/// JSON report document: the resolved configuration and the result.
pub fn document(cfg: &RunConfig, result: &Value) -> Value {
    json!({ "config": cfg.reproducible(), "result": result })
}
