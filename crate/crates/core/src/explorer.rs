//! Batch studies on top of the verifiers: α-scans, reduction sweeps between
//! the η-bounds and their classical counterparts, and seeded counterexample
//! search over parametric function families.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{EvalError, Expr, ParseError};
use crate::fracint::FracOrder;
use crate::verify::{
    classical_mean, endpoint_slope, trapezoid_bound_first_order, trapezoid_bound_holder, verify, Fixture,
    HypothesisCheck, InequalityCase, TheoremId, Verdict, VerificationResult, VerifyError,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExploreError {
    #[error("invalid α grid: {0}")]
    Grid(String),
    #[error("invalid family: {0}")]
    Family(String),
    #[error("family expression: {0}")]
    FamilyParse(#[from] ParseError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
}

/// Rows with `rhs` at or below this report no ratio.
pub const RATIO_FLOOR: f64 = 1e-14;

/// Parses `start:stop:step` (inclusive) or a comma-separated list.
pub fn parse_alpha_grid(text: &str) -> Result<Vec<f64>, ExploreError> {
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| ExploreError::Grid(format!("`{}` is not a number", s.trim())))
    };
    let t = text.trim();
    if t.contains(':') {
        let parts: Vec<&str> = t.split(':').collect();
        if parts.len() != 3 {
            return Err(ExploreError::Grid(format!("expected start:stop:step, got `{t}`")));
        }
        let (start, stop, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
            return Err(ExploreError::Grid(format!("`{t}` does not describe an increasing range")));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        if n > 100_000 {
            return Err(ExploreError::Grid(format!("`{t}` has more than 100000 points")));
        }
        Ok((0..=n).map(|k| start + k as f64 * step).collect())
    } else {
        t.split(',').filter(|s| !s.trim().is_empty()).map(num).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanPlan {
    pub case: InequalityCase,
    pub alphas: Vec<f64>,
}

impl ScanPlan {
    pub fn validate(&self) -> Result<(), ExploreError> {
        if self.alphas.is_empty() {
            return Err(ExploreError::Grid("empty grid".into()));
        }
        Expr::parse(&self.case.f).map_err(|e| ExploreError::Verify(e.into()))?;
        for w in self.alphas.windows(2) {
            if !(w[1] > w[0]) {
                return Err(ExploreError::Grid(format!("grid must be strictly increasing ({} then {})", w[0], w[1])));
            }
        }
        for &al in &self.alphas {
            FracOrder::new(al).map_err(|e| ExploreError::Grid(e.to_string()))?;
            let unit_only = self.case.theorem.needs_unit_alpha()
                || (self.case.theorem == TheoremId::RemarkCVariants && self.case.remark_base == Some(TheoremId::T2_4));
            if unit_only && al > 1.0 {
                return Err(ExploreError::Verify(VerifyError::AlphaRange(al)));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowStatus {
    Holds,
    Violated,
    Inconclusive,
    Failed,
}

impl From<Verdict> for RowStatus {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::Holds => RowStatus::Holds,
            Verdict::Violated => RowStatus::Violated,
            Verdict::Inconclusive => RowStatus::Inconclusive,
        }
    }
}

impl RowStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RowStatus::Holds => "holds",
            RowStatus::Violated => "violated",
            RowStatus::Inconclusive => "inconclusive",
            RowStatus::Failed => "failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub alpha: f64,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub margin: Option<f64>,
    /// `lhs/rhs`, absent when `rhs ≤ RATIO_FLOOR`.
    pub ratio: Option<f64>,
    pub status: RowStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub plan: ScanPlan,
    pub rows: Vec<ScanRow>,
    /// α-independent hypothesis checks, run once.
    pub hypotheses: Vec<HypothesisCheck>,
}

impl ScanReport {
    /// Worst row status: failed, then violated, then inconclusive.
    pub fn overall(&self) -> RowStatus {
        let has = |s| self.rows.iter().any(|r| r.status == s);
        if has(RowStatus::Failed) {
            RowStatus::Failed
        } else if has(RowStatus::Violated) {
            RowStatus::Violated
        } else if has(RowStatus::Inconclusive) {
            RowStatus::Inconclusive
        } else {
            RowStatus::Holds
        }
    }
}

fn row_from(alpha: f64, r: Result<VerificationResult, VerifyError>) -> ScanRow {
    match r {
        Ok(v) => ScanRow {
            alpha,
            lhs: Some(v.lhs),
            rhs: Some(v.rhs),
            margin: Some(v.margin),
            ratio: (v.rhs > RATIO_FLOOR).then(|| v.lhs / v.rhs),
            status: v.status.into(),
            error: None,
        },
        Err(e) => ScanRow {
            alpha,
            lhs: None,
            rhs: None,
            margin: None,
            ratio: None,
            status: RowStatus::Failed,
            error: Some(e.to_string()),
        },
    }
}

/// One row per grid point, in grid order. Row failures are recorded and
/// the scan continues.
pub fn alpha_scan(plan: &ScanPlan) -> Result<ScanReport, ExploreError> {
    plan.validate()?;
    let hypotheses = if plan.case.check_hypotheses {
        let first = InequalityCase { alpha: plan.alphas[0], ..plan.case.clone() };
        verify(&first).map(|r| r.hypotheses).unwrap_or_default()
    } else {
        Vec::new()
    };
    let rows = plan
        .alphas
        .par_iter()
        .map(|&alpha| {
            let case = InequalityCase { alpha, check_hypotheses: false, ..plan.case.clone() };
            row_from(alpha, verify(&case))
        })
        .collect();
    Ok(ScanReport { plan: plan.clone(), rows, hypotheses })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionRow {
    pub function: String,
    pub alpha: f64,
    /// e.g. `T2_2 -> T1_3` or `T2_2 -> trapezoid bound (alpha = 1)`.
    pub reduction: String,
    pub lhs_deviation: Option<f64>,
    pub rhs_deviation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    pub rows: Vec<ReductionRow>,
    pub max_deviation: f64,
}

const REDUCTIONS: [(TheoremId, TheoremId); 4] = [
    (TheoremId::T2_1, TheoremId::T1_2),
    (TheoremId::T2_2, TheoremId::T1_3),
    (TheoremId::T2_5, TheoremId::T1_5),
    (TheoremId::T2_4, TheoremId::T1_4),
];

fn sweep_case(theorem: TheoremId, fx: &Fixture, alpha: f64) -> InequalityCase {
    let mut c = InequalityCase::new(theorem, fx.f, fx.a, fx.b).alpha(alpha).q(2.0).without_hypotheses();
    if theorem.uses_eta() {
        c = c.eta("y - x");
    }
    c
}

fn deviation_row(function: &str, alpha: f64, reduction: String, pair: Result<(f64, f64, f64, f64), VerifyError>) -> ReductionRow {
    match pair {
        Ok((l1, r1, l2, r2)) => ReductionRow {
            function: function.to_string(),
            alpha,
            reduction,
            lhs_deviation: Some((l1 - l2).abs()),
            rhs_deviation: Some((r1 - r2).abs()),
            error: None,
        },
        Err(e) => ReductionRow {
            function: function.to_string(),
            alpha,
            reduction,
            lhs_deviation: None,
            rhs_deviation: None,
            error: Some(e.to_string()),
        },
    }
}

fn eta_reduction(gen: TheoremId, base: TheoremId, fx: &Fixture, alpha: f64) -> ReductionRow {
    let pair = (|| {
        let g = verify(&sweep_case(gen, fx, alpha))?;
        let c = verify(&sweep_case(base, fx, alpha))?;
        Ok((g.lhs, g.rhs, c.lhs, c.rhs))
    })();
    deviation_row(fx.name, alpha, format!("{gen} -> {base}"), pair)
}

/// α = 1 against the classical trapezoid bounds, with the lhs recomputed
/// from the ordinary integral mean.
fn unit_alpha_reductions(fx: &Fixture) -> Vec<ReductionRow> {
    let classical = |theorem: TheoremId| -> Result<(f64, f64, f64, f64), VerifyError> {
        let r = verify(&sweep_case(theorem, fx, 1.0))?;
        let f = Expr::parse(fx.f)?;
        let eta = fx.b - fx.a;
        let mean = classical_mean(&f, fx.a, eta, &r.inputs.quad)?;
        let lhs = (0.5 * (f.eval(fx.a)? + f.eval(fx.b)?) - mean.value).abs();
        let (da, db) = (endpoint_slope(&f, fx.a)?, endpoint_slope(&f, fx.b)?);
        let rhs = match theorem {
            TheoremId::T2_2 => trapezoid_bound_first_order(eta, da, db),
            _ => trapezoid_bound_holder(eta, 2.0, da, db),
        };
        Ok((r.lhs, r.rhs, lhs, rhs))
    };
    vec![
        deviation_row(fx.name, 1.0, "T2_2 -> first-order trapezoid bound".into(), classical(TheoremId::T2_2)),
        deviation_row(fx.name, 1.0, "T2_4 -> Hölder trapezoid bound (p = 2)".into(), classical(TheoremId::T2_4)),
    ]
}

/// Checks that the η = y − x instances of the η-bounds reproduce their
/// classical counterparts and that α = 1 reproduces the ordinary-integral
/// trapezoid bounds. Deviations are reported, never raised.
pub fn reduction_sweep(battery: &[Fixture], alphas: &[f64]) -> ReductionReport {
    let mut jobs = Vec::new();
    for fx in battery {
        for &al in alphas {
            for (gen, base) in REDUCTIONS {
                if gen.needs_unit_alpha() && al > 1.0 {
                    continue;
                }
                jobs.push((fx, al, Some((gen, base))));
            }
        }
        jobs.push((fx, 1.0, None));
    }
    let rows: Vec<ReductionRow> = jobs
        .par_iter()
        .flat_map_iter(|&(fx, al, pair)| match pair {
            Some((gen, base)) => vec![eta_reduction(gen, base, fx, al)],
            None => unit_alpha_reductions(fx),
        })
        .collect();
    let max_deviation = rows
        .iter()
        .flat_map(|r| [r.lhs_deviation, r.rhs_deviation])
        .flatten()
        .fold(0.0, f64::max);
    ReductionReport { rows, max_deviation }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamRange {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
}

/// Expression in `x` with named parameters, each sampled from a box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyDescriptor {
    pub expr: String,
    pub params: Vec<ParamRange>,
}

impl FamilyDescriptor {
    /// `c1·x + c2·x(1−x)` with `c1 ∈ [−1, 1]`, `c2 ∈ [0.5, 2]`.
    pub fn quadratic() -> FamilyDescriptor {
        FamilyDescriptor {
            expr: "c1*x + c2*x*(1-x)".into(),
            params: vec![
                ParamRange { name: "c1".into(), lo: -1.0, hi: 1.0 },
                ParamRange { name: "c2".into(), lo: 0.5, hi: 2.0 },
            ],
        }
    }

    /// `quadratic`, or `EXPR | name=lo:hi, name=lo:hi`.
    pub fn from_spec(spec: &str) -> Result<FamilyDescriptor, ExploreError> {
        let s = spec.trim();
        if s == "quadratic" {
            return Ok(FamilyDescriptor::quadratic());
        }
        let (expr, ranges) = s
            .split_once('|')
            .ok_or_else(|| ExploreError::Family(format!("expected `quadratic` or `EXPR | name=lo:hi, ...`, got `{s}`")))?;
        let mut params = Vec::new();
        for item in ranges.split(',').filter(|i| !i.trim().is_empty()) {
            let bad = || ExploreError::Family(format!("bad parameter range `{}`", item.trim()));
            let (name, range) = item.split_once('=').ok_or_else(bad)?;
            let (lo, hi) = range.split_once(':').ok_or_else(bad)?;
            params.push(ParamRange {
                name: name.trim().to_string(),
                lo: lo.trim().parse().map_err(|_| bad())?,
                hi: hi.trim().parse().map_err(|_| bad())?,
            });
        }
        let fam = FamilyDescriptor { expr: expr.trim().to_string(), params };
        fam.compile()?;
        Ok(fam)
    }

    fn compile(&self) -> Result<Expr, ExploreError> {
        for p in &self.params {
            if !(p.lo <= p.hi) || !p.lo.is_finite() || !p.hi.is_finite() {
                return Err(ExploreError::Family(format!("empty range for `{}`", p.name)));
            }
        }
        let names: Vec<&str> = self.params.iter().map(|p| p.name.as_str()).collect();
        let e = Expr::parse_with_params(&self.expr, &names)?;
        // every declared parameter must be bindable
        e.bind(&names.iter().map(|n| (*n, 0.0)).collect::<Vec<_>>())
            .map_err(|err: EvalError| ExploreError::Family(err.to_string()))?;
        Ok(e)
    }

    /// Source text of the family member at `values`.
    pub fn instantiate(&self, values: &[f64]) -> Result<String, ExploreError> {
        let e = self.compile()?;
        let binding: Vec<(&str, f64)> = self.params.iter().map(|p| p.name.as_str()).zip(values.iter().copied()).collect();
        Ok(e.bind(&binding).map_err(|err| ExploreError::Family(err.to_string()))?.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchBudget {
    pub max_evals: usize,
    pub seed: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { max_evals: 200, seed: crate::DEFAULT_SEED }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchStep {
    pub params: Vec<f64>,
    /// Absent when the candidate could not be evaluated.
    pub margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchWitness {
    pub params: Vec<(String, f64)>,
    /// Re-verification of the witness case with hypotheses checked.
    pub result: VerificationResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub theorem: TheoremId,
    pub family: FamilyDescriptor,
    pub budget: SearchBudget,
    pub template: InequalityCase,
    pub evaluations: usize,
    pub trajectory: Vec<SearchStep>,
    pub witness: Option<SearchWitness>,
}

const CHUNK: usize = 16;
const REFINE_CAP: usize = 50;

/// Seeded uniform sampling of the family box, then coordinate descent on the
/// margin around the best candidate. Stops at the first candidate whose
/// margin is below `−tol`.
///
/// Candidates are evaluated in parallel chunks, but the trajectory and the
/// evaluation count are those of a sequential scan in index order.
pub fn counterexample_search(
    theorem: TheoremId,
    family: &FamilyDescriptor,
    budget: SearchBudget,
    template: &InequalityCase,
) -> Result<SearchReport, ExploreError> {
    family.compile()?;
    let template = InequalityCase { theorem, ..template.clone() };
    let tol = template.tol;
    let mut report = SearchReport {
        theorem,
        family: family.clone(),
        budget,
        template: template.clone(),
        evaluations: 0,
        trajectory: Vec::new(),
        witness: None,
    };
    if budget.max_evals == 0 {
        return Ok(report);
    }

    let margin_at = |values: &[f64]| -> Option<f64> {
        let f = family.instantiate(values).ok()?;
        let case = InequalityCase { f, check_hypotheses: false, ..template.clone() };
        let r = verify(&case).ok()?;
        (r.status != Verdict::Inconclusive).then_some(r.margin)
    };
    let violated = |m: Option<f64>| m.is_some_and(|m| m < -tol);

    let refine_budget = REFINE_CAP.min(budget.max_evals / 2);
    let random_budget = budget.max_evals - refine_budget;
    let sample = |index: usize| -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
        rng.set_stream(index as u64);
        family
            .params
            .iter()
            .map(|p| if p.lo == p.hi { p.lo } else { rng.gen_range(p.lo..=p.hi) })
            .collect()
    };

    let mut found: Option<Vec<f64>> = None;
    let mut start = 0;
    while start < random_budget && found.is_none() {
        let end = (start + CHUNK).min(random_budget);
        let steps: Vec<SearchStep> = (start..end)
            .into_par_iter()
            .map(|i| {
                let params = sample(i);
                let margin = margin_at(&params);
                SearchStep { params, margin }
            })
            .collect();
        for step in steps {
            report.evaluations += 1;
            let hit = violated(step.margin);
            if hit {
                found = Some(step.params.clone());
            }
            report.trajectory.push(step);
            if hit {
                break;
            }
        }
        start = end;
    }

    if found.is_none() {
        found = refine(family, &mut report, budget.max_evals, &margin_at, &violated);
    }

    if let Some(values) = found {
        let f = family.instantiate(&values)?;
        let result = verify(&InequalityCase { f, check_hypotheses: true, ..template })?;
        report.witness = Some(SearchWitness {
            params: family.params.iter().map(|p| p.name.clone()).zip(values).collect(),
            result,
        });
    }
    Ok(report)
}

/// Coordinate descent from the lowest-margin candidate so far: try `±step`
/// per coordinate, halve the step after a sweep without improvement.
fn refine(
    family: &FamilyDescriptor,
    report: &mut SearchReport,
    max_evals: usize,
    margin_at: &dyn Fn(&[f64]) -> Option<f64>,
    violated: &dyn Fn(Option<f64>) -> bool,
) -> Option<Vec<f64>> {
    let (mut best, mut best_m) = report
        .trajectory
        .iter()
        .filter_map(|s| s.margin.map(|m| (s.params.clone(), m)))
        .min_by(|a, b| a.1.total_cmp(&b.1))?;
    let mut steps: Vec<f64> = family.params.iter().map(|p| 0.25 * (p.hi - p.lo)).collect();
    while report.evaluations < max_evals && steps.iter().any(|s| *s > 1e-12) {
        let mut improved = false;
        for d in 0..best.len() {
            for dir in [1.0, -1.0] {
                if report.evaluations >= max_evals || steps[d] == 0.0 {
                    continue;
                }
                let p = &family.params[d];
                let mut cand = best.clone();
                cand[d] = (cand[d] + dir * steps[d]).clamp(p.lo, p.hi);
                if cand[d] == best[d] {
                    continue;
                }
                let margin = margin_at(&cand);
                report.evaluations += 1;
                report.trajectory.push(SearchStep { params: cand.clone(), margin });
                if violated(margin) {
                    return Some(cand);
                }
                if let Some(m) = margin {
                    if m < best_m {
                        best = cand;
                        best_m = m;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            for s in &mut steps {
                *s *= 0.5;
            }
        }
    }
    None
}
