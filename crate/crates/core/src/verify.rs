//! Both sides of the Hermite–Hadamard-type inequalities, the trapezoid
//! identity behind them, and the hypothesis diagnostics for each bound.
//!
//! A case is described by [`InequalityCase`], which stores the function and
//! η map as source text so that every result can be re-executed from its
//! serialized inputs.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{EvalError, Expr, ParseError};
use crate::fracint::{
    frac_trapezoid_mean, graded_breaks, integrate, FracError, FracOrder, QuadResult, QuadratureConfig,
};
use crate::invexity::{
    certify_preinvex, certify_prequasiinvex, certify_quasiconvex, check_condition_c, check_invex_set,
    CertError, CertReport, DerivativePower, EtaMap, Interval, RealFn, SamplingPlan,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("invalid expression: {0}")]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Frac(#[from] FracError),
    #[error(transparent)]
    Cert(#[from] CertError),
    #[error("alpha must lie in (0,1] for this theorem, got {0}")]
    AlphaRange(f64),
    #[error("invalid exponents: {0}")]
    Exponents(String),
    #[error("need a < a + η(b,a), but η(b,a) = {0}")]
    NonPositiveEta(f64),
    #[error("need a < b, got a = {a}, b = {b}")]
    Interval { a: f64, b: f64 },
    #[error("f is not differentiable at x = {0}")]
    Kinked(f64),
    #[error("quadrature did not converge: {0}")]
    NotConverged(String),
    #[error("invalid case: {0}")]
    InvalidCase(String),
}

impl From<EvalError> for VerifyError {
    fn from(e: EvalError) -> Self {
        VerifyError::Frac(FracError::Eval(e))
    }
}

/// Hölder conjugate exponents `1/p + 1/q = 1`, both `> 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentPair {
    pub p: f64,
    pub q: f64,
}

impl ExponentPair {
    pub fn new(p: f64, q: f64) -> Result<ExponentPair, VerifyError> {
        if !(p > 1.0 && q > 1.0 && p.is_finite() && q.is_finite()) {
            return Err(VerifyError::Exponents(format!("need p > 1 and q > 1, got p = {p}, q = {q}")));
        }
        if (1.0 / p + 1.0 / q - 1.0).abs() > 1e-12 {
            return Err(VerifyError::Exponents(format!("1/p + 1/q must equal 1, got p = {p}, q = {q}")));
        }
        Ok(ExponentPair { p, q })
    }

    pub fn from_p(p: f64) -> Result<ExponentPair, VerifyError> {
        ExponentPair::new(p, p / (p - 1.0))
    }

    pub fn from_q(q: f64) -> Result<ExponentPair, VerifyError> {
        ExponentPair::new(q / (q - 1.0), q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TheoremId {
    #[serde(rename = "HH_CLASSICAL")]
    HhClassical,
    #[serde(rename = "T1_2")]
    T1_2,
    #[serde(rename = "T1_3")]
    T1_3,
    #[serde(rename = "T1_4")]
    T1_4,
    #[serde(rename = "T1_5")]
    T1_5,
    #[serde(rename = "T2_1")]
    T2_1,
    #[serde(rename = "T2_2")]
    T2_2,
    #[serde(rename = "T2_4")]
    T2_4,
    #[serde(rename = "T2_5")]
    T2_5,
    #[serde(rename = "LEMMA_1_4")]
    Lemma1_4,
    #[serde(rename = "REMARK_C_VARIANTS")]
    RemarkCVariants,
}

impl TheoremId {
    pub const ALL: [TheoremId; 11] = [
        TheoremId::HhClassical,
        TheoremId::T1_2,
        TheoremId::T1_3,
        TheoremId::T1_4,
        TheoremId::T1_5,
        TheoremId::T2_1,
        TheoremId::T2_2,
        TheoremId::T2_4,
        TheoremId::T2_5,
        TheoremId::Lemma1_4,
        TheoremId::RemarkCVariants,
    ];

    /// The nine inequality verifiers (the identity and remark variants excluded).
    pub const INEQUALITIES: [TheoremId; 9] = [
        TheoremId::HhClassical,
        TheoremId::T1_2,
        TheoremId::T1_3,
        TheoremId::T1_4,
        TheoremId::T1_5,
        TheoremId::T2_1,
        TheoremId::T2_2,
        TheoremId::T2_4,
        TheoremId::T2_5,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TheoremId::HhClassical => "HH_CLASSICAL",
            TheoremId::T1_2 => "T1_2",
            TheoremId::T1_3 => "T1_3",
            TheoremId::T1_4 => "T1_4",
            TheoremId::T1_5 => "T1_5",
            TheoremId::T2_1 => "T2_1",
            TheoremId::T2_2 => "T2_2",
            TheoremId::T2_4 => "T2_4",
            TheoremId::T2_5 => "T2_5",
            TheoremId::Lemma1_4 => "LEMMA_1_4",
            TheoremId::RemarkCVariants => "REMARK_C_VARIANTS",
        }
    }

    /// Bounds whose Hölder step needs `0 < α ≤ 1`.
    pub fn needs_unit_alpha(self) -> bool {
        matches!(self, TheoremId::T1_4 | TheoremId::T2_4)
    }

    /// Whether the bound is stated for a general η map.
    pub fn uses_eta(self) -> bool {
        matches!(
            self,
            TheoremId::T2_1
                | TheoremId::T2_2
                | TheoremId::T2_4
                | TheoremId::T2_5
                | TheoremId::Lemma1_4
                | TheoremId::RemarkCVariants
        )
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TheoremId {
    type Err = VerifyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TheoremId::ALL
            .into_iter()
            .find(|t| t.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                let known: Vec<_> = TheoremId::ALL.iter().map(|t| t.as_str()).collect();
                VerifyError::InvalidCase(format!("unknown theorem `{s}`; expected one of {}", known.join(", ")))
            })
    }
}

fn default_alpha() -> f64 {
    1.0
}

fn default_tol() -> f64 {
    1e-9
}

fn default_true() -> bool {
    true
}

/// One theorem instance. `eta` is η(y, x) source text; absent means `y - x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InequalityCase {
    pub theorem: TheoremId,
    pub f: String,
    pub a: f64,
    pub b: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<String>,
    /// Invex set used for the η-hypotheses; defaults to the hull of
    /// `a`, `b`, and `a + η(b,a)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Interval>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    /// Base bound for the Condition-C variants: T2_2, T2_5, or T2_4.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub remark_base: Option<TheoremId>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub quad: QuadratureConfig,
    #[serde(default)]
    pub sampling: SamplingPlan,
    #[serde(default = "default_true")]
    pub check_hypotheses: bool,
}

impl InequalityCase {
    pub fn new(theorem: TheoremId, f: impl Into<String>, a: f64, b: f64) -> InequalityCase {
        InequalityCase {
            theorem,
            f: f.into(),
            a,
            b,
            eta: None,
            domain: None,
            alpha: 1.0,
            p: None,
            q: None,
            remark_base: None,
            tol: default_tol(),
            quad: QuadratureConfig::default(),
            sampling: SamplingPlan::default(),
            check_hypotheses: true,
        }
    }

    pub fn alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn eta(mut self, eta: impl Into<String>) -> Self {
        self.eta = Some(eta.into());
        self
    }

    pub fn p(mut self, p: f64) -> Self {
        self.p = Some(p);
        self
    }

    pub fn q(mut self, q: f64) -> Self {
        self.q = Some(q);
        self
    }

    pub fn remark_base(mut self, base: TheoremId) -> Self {
        self.remark_base = Some(base);
        self
    }

    pub fn without_hypotheses(mut self) -> Self {
        self.check_hypotheses = false;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Violated,
    Inconclusive,
}

/// One comparison `lhs ≤ rhs` inside a chained inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub status: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub statement: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<CertReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl HypothesisCheck {
    pub fn certified(&self) -> bool {
        self.report.as_ref().is_some_and(CertReport::certified)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadRecord {
    pub label: String,
    pub value: f64,
    pub error_estimate: f64,
    pub panels_used: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationResult {
    pub theorem_id: TheoremId,
    pub inputs: InequalityCase,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub status: Verdict,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub stages: Vec<Stage>,
    pub hypotheses: Vec<HypothesisCheck>,
    pub quadrature: Vec<QuadRecord>,
    pub warnings: Vec<String>,
    pub notes: Vec<String>,
}

impl VerificationResult {
    pub fn holds(&self) -> bool {
        self.status == Verdict::Holds
    }

    pub fn hypotheses_certified(&self) -> bool {
        self.hypotheses.iter().all(HypothesisCheck::certified)
    }
}

/// `∫₀¹ |t^α − (1−t)^α| dt = 2/(α+1)·(1 − 2^{−α})`.
pub fn kernel_abs_integral(alpha: FracOrder) -> f64 {
    let a = alpha.get();
    2.0 / (a + 1.0) * (1.0 - 0.5f64.powf(a))
}

/// `∫₀¹ |1 − 2t|^{s} dt = 1/(s+1)` with `s = αp`.
pub fn kernel_pow_integral(alpha: f64, p: f64) -> Result<f64, VerifyError> {
    let s = alpha * p;
    if !(s > -1.0) || !s.is_finite() {
        return Err(VerifyError::InvalidCase(format!("need αp > -1, got {s}")));
    }
    Ok(1.0 / (s + 1.0))
}

/// `(η/(α+1))·(1 − 2^{−α})`, the constant shared by the first-order bounds.
fn first_order_factor(eta: f64, alpha: f64) -> f64 {
    eta / (alpha + 1.0) * (1.0 - 0.5f64.powf(alpha))
}

/// `η/(2(αp+1)^{1/p})`.
fn holder_factor(eta: f64, alpha: f64, p: f64) -> f64 {
    eta / (2.0 * (alpha * p + 1.0).powf(1.0 / p))
}

/// `(max{|d₁|^q, |d₂|^q})^{1/q}`.
fn power_max(d1: f64, d2: f64, q: f64) -> f64 {
    if q == 1.0 {
        d1.abs().max(d2.abs())
    } else {
        d1.abs().powf(q).max(d2.abs().powf(q)).powf(1.0 / q)
    }
}

/// Classical trapezoid bound for a prequasiinvex `|f′|`: `(|η|/4)·max{|f′(a)|, |f′(b)|}`.
pub fn trapezoid_bound_first_order(eta: f64, da: f64, db: f64) -> f64 {
    eta.abs() / 4.0 * da.abs().max(db.abs())
}

/// Classical Hölder trapezoid bound for a preinvex `|f′|^{p/(p−1)}`:
/// `|η|/(2(p+1)^{1/p})·(max{|f′(a)|^{p/(p−1)}, |f′(b)|^{p/(p−1)}})^{(p−1)/p}`.
pub fn trapezoid_bound_holder(eta: f64, p: f64, da: f64, db: f64) -> f64 {
    let r = p / (p - 1.0);
    let m = da.abs().powf(r).max(db.abs().powf(r)).powf((p - 1.0) / p);
    eta.abs() / (2.0 * (p + 1.0).powf(1.0 / p)) * m
}

/// Derivative at an endpoint; kinks abort.
pub fn endpoint_slope(f: &Expr, x: f64) -> Result<f64, VerifyError> {
    let d = f.eval_dual(x)?;
    if d.kink {
        return Err(VerifyError::Kinked(x));
    }
    Ok(d.deriv)
}

/// Classical mean `(1/η)∫_a^{a+η} f`.
pub fn classical_mean(f: &Expr, a: f64, eta_val: f64, cfg: &QuadratureConfig) -> Result<QuadResult, VerifyError> {
    if !(eta_val > 0.0) {
        return Err(VerifyError::NonPositiveEta(eta_val));
    }
    let b = a + eta_val;
    let kinks = f.kink_points(a, b);
    Ok(integrate(|t| f.eval(t), a, b, &kinks, cfg)?.scaled(1.0 / eta_val))
}

/// `[f(a) + f(a+η)]/2 −` the symmetric fractional mean, with the mean's
/// quadrature diagnostics.
pub fn trapezoid_defect_measured(
    f: &Expr,
    a: f64,
    eta_val: f64,
    alpha: FracOrder,
    cfg: &QuadratureConfig,
) -> Result<QuadResult, VerifyError> {
    if !(eta_val > 0.0) {
        return Err(VerifyError::NonPositiveEta(eta_val));
    }
    let mean = frac_trapezoid_mean(f, a, eta_val, alpha, cfg)?;
    let ends = 0.5 * (f.eval(a)? + f.eval(a + eta_val)?);
    Ok(QuadResult { value: ends - mean.value, ..mean })
}

pub fn trapezoid_defect(
    f: &Expr,
    a: f64,
    eta_val: f64,
    alpha: FracOrder,
    cfg: &QuadratureConfig,
) -> Result<f64, VerifyError> {
    let d = trapezoid_defect_measured(f, a, eta_val, alpha, cfg)?;
    if !d.converged {
        return Err(VerifyError::NotConverged("fractional mean".into()));
    }
    Ok(d.value)
}

/// `(η/2)∫₀¹ [t^α − (1−t)^α] f′(a + tη) dt`, split at `t = 1/2` and graded
/// toward both ends when `α` is not an integer.
pub fn lemma_kernel_side(
    f: &Expr,
    a: f64,
    eta_val: f64,
    alpha: FracOrder,
    cfg: &QuadratureConfig,
) -> Result<QuadResult, VerifyError> {
    if !(eta_val > 0.0) {
        return Err(VerifyError::NonPositiveEta(eta_val));
    }
    if let Some(&k) = f.kink_points(a, a + eta_val).first() {
        return Err(VerifyError::Kinked(k));
    }
    let al = alpha.get();
    let mut breaks = vec![0.5];
    for g in graded_breaks(al) {
        breaks.push(g);
        breaks.push(1.0 - g);
    }
    let r = integrate(
        |t| {
            let x = a + t * eta_val;
            let d = f.eval_dual(x)?;
            if d.kink {
                return Err(EvalError::Domain(format!("f is not differentiable at x = {x}")));
            }
            Ok((t.powf(al) - (1.0 - t).powf(al)) * d.deriv)
        },
        0.0,
        1.0,
        &breaks,
        cfg,
    )?;
    Ok(r.scaled(0.5 * eta_val))
}

/// `|trapezoid defect − kernel side|` of the fractional trapezoid identity.
pub fn lemma_identity_residual(
    f: &Expr,
    a: f64,
    eta_val: f64,
    alpha: FracOrder,
    cfg: &QuadratureConfig,
) -> Result<f64, VerifyError> {
    let kernel = lemma_kernel_side(f, a, eta_val, alpha, cfg)?;
    let defect = trapezoid_defect(f, a, eta_val, alpha, cfg)?;
    if !kernel.converged {
        return Err(VerifyError::NotConverged("kernel integral".into()));
    }
    Ok((defect - kernel.value).abs())
}

/// Parsed and validated form of a case.
struct Prepared<'c> {
    case: &'c InequalityCase,
    f: Expr,
    eta: EtaMap,
    eta_val: f64,
    alpha: FracOrder,
    domain: Interval,
    hypotheses: Vec<HypothesisCheck>,
    quadrature: Vec<QuadRecord>,
    warnings: Vec<String>,
    notes: Vec<String>,
}

impl<'c> Prepared<'c> {
    fn new(case: &'c InequalityCase) -> Result<Prepared<'c>, VerifyError> {
        if !(case.a.is_finite() && case.b.is_finite()) {
            return Err(VerifyError::Interval { a: case.a, b: case.b });
        }
        if !(case.tol >= 0.0) {
            return Err(VerifyError::InvalidCase(format!("tolerance must be non-negative, got {}", case.tol)));
        }
        case.quad.validate()?;
        let f = Expr::parse(&case.f)?;
        let theorem = effective_theorem(case)?;
        let alpha = FracOrder::new(case.alpha)?;
        if (theorem.needs_unit_alpha()) && case.alpha > 1.0 {
            return Err(VerifyError::AlphaRange(case.alpha));
        }

        let uses_eta = case.theorem.uses_eta();
        if !uses_eta && case.eta.is_some() {
            return Err(VerifyError::InvalidCase(format!("{} does not take an η map", case.theorem)));
        }
        if !uses_eta && !(case.a < case.b) {
            return Err(VerifyError::Interval { a: case.a, b: case.b });
        }
        let placeholder = Interval { lo: case.a.min(case.b), hi: case.a.max(case.b).max(case.a.min(case.b) + 1.0) };
        let mut eta = match &case.eta {
            Some(src) => EtaMap::from_spec(src, placeholder)?,
            None => EtaMap::linear(placeholder),
        };
        let eta_val = if uses_eta { eta.eval(case.b, case.a)? } else { case.b - case.a };
        if !(eta_val > 0.0) {
            return Err(VerifyError::NonPositiveEta(eta_val));
        }
        let domain = match case.domain {
            Some(d) => Interval::new(d.lo, d.hi)?,
            None => {
                let lo = case.a.min(case.b);
                let hi = case.a.max(case.b).max(case.a + eta_val);
                Interval::new(lo, hi)?
            }
        };
        eta.domain = domain;
        Ok(Prepared {
            case,
            f,
            eta,
            eta_val,
            alpha,
            domain,
            hypotheses: Vec::new(),
            quadrature: Vec::new(),
            warnings: Vec::new(),
            notes: Vec::new(),
        })
    }

    fn end(&self) -> f64 {
        self.case.a + self.eta_val
    }

    fn plan(&self) -> &SamplingPlan {
        &self.case.sampling
    }

    fn hypothesis(&mut self, statement: impl Into<String>, run: impl FnOnce(&Self) -> Result<CertReport, CertError>) {
        if !self.case.check_hypotheses {
            return;
        }
        let (report, error) = match run(self) {
            Ok(r) => (Some(r), None),
            Err(e) => (None, Some(e.to_string())),
        };
        self.hypotheses.push(HypothesisCheck { statement: statement.into(), report, error });
    }

    fn record(&mut self, label: &str, r: &QuadResult) {
        self.quadrature.push(QuadRecord {
            label: label.to_string(),
            value: r.value,
            error_estimate: r.error_estimate,
            panels_used: r.panels_used,
            converged: r.converged,
        });
    }

    fn warn_if_not_positive(&mut self, lo: f64, hi: f64) -> Result<(), VerifyError> {
        let n = 64;
        let mut min = f64::INFINITY;
        for k in 0..=n {
            min = min.min(self.f.eval(lo + (hi - lo) * k as f64 / n as f64)?);
        }
        if min <= 0.0 {
            self.warnings.push(format!(
                "f is not positive on [{lo}, {hi}] (sampled minimum {min}); the bound assumes a positive f"
            ));
        }
        Ok(())
    }

    fn classical_hypotheses_on_derivative(&mut self, q: f64) {
        let (a, b) = (self.case.a, self.case.b);
        let statement = if q == 1.0 {
            format!("|f'| quasi-convex on [{a}, {b}]")
        } else {
            format!("|f'|^{q} quasi-convex on [{a}, {b}]")
        };
        self.hypothesis(statement, |s| {
            certify_quasiconvex(&DerivativePower { f: &s.f, q }, a, b, s.plan())
        });
    }

    fn eta_set_hypotheses(&mut self) {
        let d = self.domain;
        self.hypothesis(format!("({}, {}) invex with respect to η = {}", d.lo, d.hi, self.eta.label), |s| {
            check_invex_set(d, &s.eta, s.plan())
        });
    }

    fn condition_c_hypothesis(&mut self) {
        let d = self.domain;
        self.hypothesis(format!("η = {} satisfies Condition C on ({}, {})", self.eta.label, d.lo, d.hi), |s| {
            check_condition_c(&s.eta, d, s.plan())
        });
    }

    fn eta_hypotheses_on_derivative(&mut self, q: f64) {
        let d = self.domain;
        let statement = if q == 1.0 {
            format!("|f'| prequasiinvex with respect to η = {} on ({}, {})", self.eta.label, d.lo, d.hi)
        } else {
            format!("|f'|^{q} prequasiinvex with respect to η = {} on ({}, {})", self.eta.label, d.lo, d.hi)
        };
        self.hypothesis(statement, |s| {
            certify_prequasiinvex(&DerivativePower { f: &s.f, q }, &s.eta, d, s.plan())
        });
    }

    fn finish(self, lhs: f64, rhs: f64, stages: Vec<Stage>) -> VerificationResult {
        let tol = self.case.tol;
        let margin = rhs - lhs;
        let noisy = self.quadrature.iter().any(|r| !r.converged || !(r.error_estimate < tol / 10.0));
        let status = if noisy { Verdict::Inconclusive } else { verdict(margin, tol) };
        let mut notes = self.notes;
        if noisy {
            notes.push(format!(
                "a quadrature failed to converge or its error estimate is not below tol/10 = {}",
                tol / 10.0
            ));
        }
        VerificationResult {
            theorem_id: self.case.theorem,
            inputs: self.case.clone(),
            lhs,
            rhs,
            margin,
            status,
            stages,
            hypotheses: self.hypotheses,
            quadrature: self.quadrature,
            warnings: self.warnings,
            notes,
        }
    }
}

fn verdict(margin: f64, tol: f64) -> Verdict {
    if margin >= -tol {
        Verdict::Holds
    } else {
        Verdict::Violated
    }
}

fn stage(label: &str, lhs: f64, rhs: f64, tol: f64) -> Stage {
    let margin = rhs - lhs;
    Stage { label: label.to_string(), lhs, rhs, margin, status: verdict(margin, tol) }
}

/// The theorem whose preconditions govern the case (the base for remark variants).
fn effective_theorem(case: &InequalityCase) -> Result<TheoremId, VerifyError> {
    match case.theorem {
        TheoremId::RemarkCVariants => match case.remark_base.unwrap_or(TheoremId::T2_2) {
            b @ (TheoremId::T2_2 | TheoremId::T2_5 | TheoremId::T2_4) => Ok(b),
            other => Err(VerifyError::InvalidCase(format!(
                "Condition-C variants exist for T2_2, T2_5 and T2_4, not {other}"
            ))),
        },
        t => Ok(t),
    }
}

fn holder_pair(case: &InequalityCase, notes: &mut Vec<String>) -> Result<ExponentPair, VerifyError> {
    match (case.p, case.q) {
        (Some(p), Some(q)) => ExponentPair::new(p, q),
        (Some(p), None) => ExponentPair::from_p(p),
        (None, Some(q)) => ExponentPair::from_q(q),
        (None, None) => {
            notes.push("no exponents given; using p = q = 2".into());
            Ok(ExponentPair { p: 2.0, q: 2.0 })
        }
    }
}

fn power_q(case: &InequalityCase, notes: &mut Vec<String>) -> Result<f64, VerifyError> {
    let q = match (case.q, case.p) {
        (Some(q), _) => q,
        (None, Some(p)) => ExponentPair::from_p(p)?.q,
        (None, None) => {
            notes.push("no q given; using q = 2".into());
            2.0
        }
    };
    if !(q >= 1.0) || !q.is_finite() {
        return Err(VerifyError::Exponents(format!("need q >= 1, got {q}")));
    }
    Ok(q)
}

/// Runs one case.
pub fn verify(case: &InequalityCase) -> Result<VerificationResult, VerifyError> {
    let mut s = Prepared::new(case)?;
    match case.theorem {
        TheoremId::HhClassical => hh_classical(s),
        TheoremId::T1_2 => {
            if case.a < 0.0 {
                s.warnings.push(format!("a = {} is negative; the bound is stated for 0 <= a", case.a));
            }
            s.warn_if_not_positive(case.a, case.b)?;
            let (a, b) = (case.a, case.b);
            s.hypothesis(format!("f quasi-convex on [{a}, {b}]"), |s| certify_quasiconvex(&s.f, a, b, s.plan()));
            mean_vs_endpoint_max(s)
        }
        TheoremId::T1_3 => {
            s.classical_hypotheses_on_derivative(1.0);
            first_order(s, 1.0, false)
        }
        TheoremId::T1_5 => {
            let q = power_q(case, &mut s.notes)?;
            s.classical_hypotheses_on_derivative(q);
            first_order(s, q, false)
        }
        TheoremId::T1_4 => {
            let pair = holder_pair(case, &mut s.notes)?;
            s.notes.push("the Hölder bound is evaluated only for 0 < α <= 1".into());
            s.classical_hypotheses_on_derivative(pair.q);
            holder(s, pair, false)
        }
        TheoremId::T2_1 => {
            s.warn_if_not_positive(case.a, s.end())?;
            s.eta_set_hypotheses();
            s.condition_c_hypothesis();
            let d = s.domain;
            s.hypothesis(
                format!("f prequasiinvex with respect to η = {} on ({}, {})", s.eta.label, d.lo, d.hi),
                |s| certify_prequasiinvex(&s.f, &s.eta, d, s.plan()),
            );
            two_stage_prequasiinvex(s)
        }
        TheoremId::T2_2 => {
            s.eta_set_hypotheses();
            s.eta_hypotheses_on_derivative(1.0);
            first_order(s, 1.0, false)
        }
        TheoremId::T2_5 => {
            let q = power_q(case, &mut s.notes)?;
            if q == 1.0 {
                s.notes.push("q = 1 is outside the q > 1 range of this bound; evaluated anyway".into());
            }
            s.eta_set_hypotheses();
            s.eta_hypotheses_on_derivative(q);
            first_order(s, q, false)
        }
        TheoremId::T2_4 => {
            let pair = holder_pair(case, &mut s.notes)?;
            s.eta_set_hypotheses();
            s.eta_hypotheses_on_derivative(pair.q);
            holder(s, pair, true)
        }
        TheoremId::Lemma1_4 => lemma(s),
        TheoremId::RemarkCVariants => {
            s.eta_set_hypotheses();
            s.condition_c_hypothesis();
            match effective_theorem(case)? {
                TheoremId::T2_2 => {
                    s.eta_hypotheses_on_derivative(1.0);
                    first_order(s, 1.0, true)
                }
                TheoremId::T2_5 => {
                    let q = power_q(case, &mut s.notes)?;
                    s.eta_hypotheses_on_derivative(q);
                    first_order(s, q, true)
                }
                _ => {
                    let pair = holder_pair(case, &mut s.notes)?;
                    s.notes.push("the T2_4 bound already uses f'(a+η(b,a)); the variant coincides with it".into());
                    s.eta_hypotheses_on_derivative(pair.q);
                    holder(s, pair, true)
                }
            }
        }
    }
}

fn hh_classical(mut s: Prepared<'_>) -> Result<VerificationResult, VerifyError> {
    let (a, b) = (s.case.a, s.case.b);
    let domain = Interval::new(a, b)?;
    s.hypothesis(format!("f convex on [{a}, {b}]"), |s| {
        certify_preinvex(&s.f, &EtaMap::linear(domain), domain, s.plan())
    });
    let mean = classical_mean(&s.f, a, b - a, &s.case.quad)?;
    s.record("mean", &mean);
    let mid = s.f.eval(0.5 * (a + b))?;
    let ends = 0.5 * (s.f.eval(a)? + s.f.eval(b)?);
    let tol = s.case.tol;
    let left = stage("f((a+b)/2) <= mean", mid, mean.value, tol);
    let right = stage("mean <= (f(a)+f(b))/2", mean.value, ends, tol);
    // the binding comparison is the headline
    let (lhs, rhs) = if left.margin <= right.margin { (left.lhs, left.rhs) } else { (right.lhs, right.rhs) };
    Ok(s.finish(lhs, rhs, vec![left, right]))
}

fn mean_vs_endpoint_max(mut s: Prepared<'_>) -> Result<VerificationResult, VerifyError> {
    let mean = frac_trapezoid_mean(&s.f, s.case.a, s.eta_val, s.alpha, &s.case.quad)?;
    s.record("fractional mean", &mean);
    let rhs = s.f.eval(s.case.a)?.max(s.f.eval(s.case.b)?);
    Ok(s.finish(mean.value, rhs, Vec::new()))
}

fn two_stage_prequasiinvex(mut s: Prepared<'_>) -> Result<VerificationResult, VerifyError> {
    let mean = frac_trapezoid_mean(&s.f, s.case.a, s.eta_val, s.alpha, &s.case.quad)?;
    s.record("fractional mean", &mean);
    let fa = s.f.eval(s.case.a)?;
    let inner = fa.max(s.f.eval(s.end())?);
    let outer = fa.max(s.f.eval(s.case.b)?);
    let tol = s.case.tol;
    let stages = vec![
        stage("mean <= max{f(a), f(a+η(b,a))}", mean.value, inner, tol),
        stage("max{f(a), f(a+η(b,a))} <= max{f(a), f(b)}", inner, outer, tol),
    ];
    for st in &stages {
        if st.status == Verdict::Violated {
            s.notes.push(format!("stage `{}` fails with margin {}", st.label, st.margin));
        }
    }
    Ok(s.finish(mean.value, outer, stages))
}

/// Shared body of the `(η/(α+1))(1−2^{−α})·(max |f′|^q)^{1/q}` bounds.
/// `at_end` uses `f′(a+η(b,a))` in place of `f′(b)`.
fn first_order(mut s: Prepared<'_>, q: f64, at_end: bool) -> Result<VerificationResult, VerifyError> {
    let defect = trapezoid_defect_measured(&s.f, s.case.a, s.eta_val, s.alpha, &s.case.quad)?;
    s.record("fractional mean", &defect);
    let da = endpoint_slope(&s.f, s.case.a)?;
    let db = endpoint_slope(&s.f, if at_end { s.end() } else { s.case.b })?;
    let rhs = first_order_factor(s.eta_val, s.alpha.get()) * power_max(da, db, q);
    Ok(s.finish(defect.value.abs(), rhs, Vec::new()))
}

/// Shared body of the `η/(2(αp+1)^{1/p})·(max |f′|^q)^{1/q}` bounds.
fn holder(mut s: Prepared<'_>, pair: ExponentPair, at_end: bool) -> Result<VerificationResult, VerifyError> {
    let defect = trapezoid_defect_measured(&s.f, s.case.a, s.eta_val, s.alpha, &s.case.quad)?;
    s.record("fractional mean", &defect);
    let da = endpoint_slope(&s.f, s.case.a)?;
    let db = endpoint_slope(&s.f, if at_end { s.end() } else { s.case.b })?;
    let rhs = holder_factor(s.eta_val, s.alpha.get(), pair.p) * power_max(da, db, pair.q);
    Ok(s.finish(defect.value.abs(), rhs, Vec::new()))
}

/// The identity is reported as `lhs` = defect, `rhs` = kernel side, and
/// `margin = −|lhs − rhs|`, so it holds when the residual is within `tol`.
fn lemma(mut s: Prepared<'_>) -> Result<VerificationResult, VerifyError> {
    s.eta_set_hypotheses();
    let d = s.domain;
    s.hypothesis(format!("f' preinvex with respect to η = {} on ({}, {})", s.eta.label, d.lo, d.hi), |s| {
        certify_preinvex(&Slope(&s.f), &s.eta, d, s.plan())
    });
    let kernel = lemma_kernel_side(&s.f, s.case.a, s.eta_val, s.alpha, &s.case.quad)?;
    let defect = trapezoid_defect_measured(&s.f, s.case.a, s.eta_val, s.alpha, &s.case.quad)?;
    s.record("fractional mean", &defect);
    s.record("kernel integral", &kernel);
    let residual = (defect.value - kernel.value).abs();
    let mut r = s.finish(defect.value, kernel.value, Vec::new());
    r.margin = -residual;
    if r.status != Verdict::Inconclusive {
        r.status = verdict(r.margin, r.inputs.tol);
    }
    Ok(r)
}

/// Signed derivative `f′`.
struct Slope<'a>(&'a Expr);

impl RealFn for Slope<'_> {
    fn value(&self, x: f64) -> Result<f64, EvalError> {
        Ok(self.0.eval_dual(x)?.deriv)
    }
}

/// Shipped test functions with a default interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fixture {
    pub name: &'static str,
    pub f: &'static str,
    pub a: f64,
    pub b: f64,
    /// Differentiable on `[a, b]`.
    pub smooth: bool,
}

pub const BATTERY: [Fixture; 9] = [
    Fixture { name: "identity", f: "x", a: 0.0, b: 1.0, smooth: true },
    Fixture { name: "square", f: "x^2", a: 0.0, b: 1.0, smooth: true },
    Fixture { name: "cube", f: "x^3", a: 0.0, b: 1.0, smooth: true },
    Fixture { name: "exp", f: "exp(x)", a: 0.0, b: 1.0, smooth: true },
    Fixture { name: "exp-neg", f: "exp(-x)", a: 0.0, b: 1.0, smooth: true },
    Fixture { name: "abs", f: "abs(x)", a: -1.0, b: 1.0, smooth: false },
    Fixture { name: "double-well", f: "x^4 - x^2", a: -1.0, b: 1.0, smooth: true },
    Fixture { name: "parabola-cap", f: "x*(1-x)", a: 0.0, b: 1.0, smooth: true },
    Fixture { name: "constant", f: "2", a: 0.0, b: 1.0, smooth: true },
];
