//! η maps, Condition C, and sample-based certification of generalized
//! convexity (quasi-convex, preinvex, prequasiinvex).
//!
//! Every certificate here is "on samples": a tensor grid plus seeded random
//! points. A reported violation carries a concrete witness that can be
//! re-evaluated independently; a certification is evidence, not a proof.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{EvalError, Expr, ParseError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CertError {
    #[error("invalid domain ({lo}, {hi})")]
    InvalidDomain { lo: f64, hi: f64 },
    #[error("invalid η expression: {0}")]
    Parse(#[from] ParseError),
    #[error("unknown built-in η map `{0}`")]
    UnknownEta(String),
    #[error("evaluation failed at {point:?}: {source}")]
    Eval { point: Vec<f64>, source: EvalError },
}

/// Open interval `(lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Interval, CertError> {
        if lo < hi && lo.is_finite() && hi.is_finite() {
            Ok(Interval { lo, hi })
        } else {
            Err(CertError::InvalidDomain { lo, hi })
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, z: f64) -> bool {
        z > self.lo && z < self.hi
    }

    /// Sampling range for the open interval, pulled in by `inset·width`.
    fn inset(&self, inset: f64) -> (f64, f64) {
        let d = inset * self.width();
        (self.lo + d, self.hi - d)
    }
}

/// Bivariate map η(y, x) on a domain A ⊂ ℝ.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaMap {
    pub expr: Expr,
    pub source: String,
    pub domain: Interval,
    pub label: String,
}

impl EtaMap {
    pub fn parse(text: &str, domain: Interval) -> Result<EtaMap, CertError> {
        Ok(EtaMap {
            expr: Expr::parse_bivariate(text)?,
            source: text.to_string(),
            domain,
            label: text.trim().to_string(),
        })
    }

    /// η(y, x) = y − x.
    pub fn linear(domain: Interval) -> EtaMap {
        EtaMap { expr: Expr::linear_eta(), source: "y - x".into(), domain, label: "linear".into() }
    }

    pub fn zero(domain: Interval) -> EtaMap {
        EtaMap { expr: Expr::Const(0.0), source: "0".into(), domain, label: "zero".into() }
    }

    /// η(y, x) = k(y − x).
    pub fn scaled(k: f64, domain: Interval) -> EtaMap {
        let source = format!("({k}) * (y - x)");
        EtaMap {
            expr: Expr::parse_bivariate(&source).expect("scaled η is well formed"),
            source,
            domain,
            label: format!("scaled({k})"),
        }
    }

    /// η(y, x) = y − x + c. Invex on domains wide enough to absorb the shift;
    /// fails Condition C for c ≠ 0.
    pub fn shifted_linear(c: f64, domain: Interval) -> EtaMap {
        let source = format!("y - x + ({c})");
        EtaMap {
            expr: Expr::parse_bivariate(&source).expect("shifted η is well formed"),
            source,
            domain,
            label: format!("shifted-linear({c})"),
        }
    }

    /// Resolves a built-in name (`linear`, `zero`, `scaled(k)`,
    /// `shifted-linear(c)`) or parses a user expression in `y` and `x`.
    pub fn from_spec(spec: &str, domain: Interval) -> Result<EtaMap, CertError> {
        let s = spec.trim();
        let arg = |prefix: &str| -> Option<Result<f64, CertError>> {
            let inner = s.strip_prefix(prefix)?.strip_prefix('(')?.strip_suffix(')')?;
            Some(inner.trim().parse::<f64>().map_err(|_| CertError::UnknownEta(s.to_string())))
        };
        match s {
            "linear" => return Ok(EtaMap::linear(domain)),
            "zero" => return Ok(EtaMap::zero(domain)),
            _ => {}
        }
        if let Some(k) = arg("scaled") {
            return Ok(EtaMap::scaled(k?, domain));
        }
        if let Some(c) = arg("shifted-linear") {
            return Ok(EtaMap::shifted_linear(c?, domain));
        }
        EtaMap::parse(s, domain)
    }

    /// η(y, x): `first` binds the variable `y`, `second` binds `x`.
    pub fn eval(&self, first: f64, second: f64) -> Result<f64, EvalError> {
        self.expr.eval_xy(second, first)
    }

    pub fn is_linear(&self) -> bool {
        self.expr == Expr::linear_eta()
    }
}

/// Scalar function of one variable that can be certified.
pub trait RealFn: Sync {
    fn value(&self, x: f64) -> Result<f64, EvalError>;
}

impl RealFn for Expr {
    fn value(&self, x: f64) -> Result<f64, EvalError> {
        self.eval(x)
    }
}

/// `|f′(x)|^q`, with `f′` from forward-mode differentiation. At kinks the
/// symmetric subgradient choice of the dual evaluator is used.
#[derive(Debug, Clone)]
pub struct DerivativePower<'a> {
    pub f: &'a Expr,
    pub q: f64,
}

impl RealFn for DerivativePower<'_> {
    fn value(&self, x: f64) -> Result<f64, EvalError> {
        let d = self.f.eval_dual(x)?.deriv.abs();
        Ok(if self.q == 1.0 { d } else { d.powf(self.q) })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplingPlan {
    pub grid_points: usize,
    pub random_samples: usize,
    pub seed: u64,
    /// Absolute tolerance on `lhs − rhs` for the convexity-type certificates.
    pub tolerance: f64,
    /// Absolute tolerance on Condition C and interpolation-identity residuals.
    pub residual_tolerance: f64,
    /// Golden-section iterations per coordinate when sharpening a witness.
    pub refine_steps: usize,
    /// Relative inset applied to open-interval endpoints.
    pub inset: f64,
}

impl Default for SamplingPlan {
    fn default() -> Self {
        SamplingPlan {
            grid_points: 33,
            random_samples: 10_000,
            seed: crate::DEFAULT_SEED,
            tolerance: 1e-9,
            residual_tolerance: 1e-10,
            refine_steps: 20,
            inset: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertStatus {
    CertifiedOnSamples,
    Violated,
}

/// Sample point where `lhs > rhs + tolerance`. `t2` is only used by the
/// two-parameter interpolation identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: f64,
    pub y: f64,
    pub t: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub t2: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertReport {
    pub property: String,
    pub status: CertStatus,
    pub witness: Option<Witness>,
    pub samples_used: usize,
    /// Largest `lhs − rhs` seen, including the refined witness.
    pub max_violation: f64,
    pub tolerance: f64,
}

impl CertReport {
    pub fn certified(&self) -> bool {
        self.status == CertStatus::CertifiedOnSamples
    }
}

type Sample = Vec<f64>;

struct Probe<'a> {
    bounds: Vec<(f64, f64)>,
    plan: &'a SamplingPlan,
    tolerance: f64,
    property: String,
}

impl Probe<'_> {
    fn grid_len(&self) -> usize {
        self.plan.grid_points.pow(self.bounds.len() as u32)
    }

    fn point(&self, index: usize) -> Sample {
        let g = self.grid_len();
        if index < g {
            let n = self.plan.grid_points;
            let mut rem = index;
            self.bounds
                .iter()
                .map(|&(lo, hi)| {
                    let k = rem % n;
                    rem /= n;
                    if n == 1 {
                        0.5 * (lo + hi)
                    } else {
                        lo + (hi - lo) * k as f64 / (n - 1) as f64
                    }
                })
                .collect()
        } else {
            // one independent stream per random sample index
            let mut rng = ChaCha8Rng::seed_from_u64(self.plan.seed);
            rng.set_stream((index - g) as u64);
            self.bounds.iter().map(|&(lo, hi)| rng.gen_range(lo..=hi)).collect()
        }
    }

    fn run<F>(&self, eval: F) -> Result<CertReport, CertError>
    where
        F: Fn(&[f64]) -> Result<(f64, f64), EvalError> + Sync,
    {
        let total = self.grid_len() + self.plan.random_samples;
        let gaps: Vec<Result<f64, CertError>> = (0..total)
            .into_par_iter()
            .map(|i| {
                let p = self.point(i);
                eval(&p)
                    .map(|(l, r)| l - r)
                    .map_err(|source| CertError::Eval { point: p, source })
            })
            .collect();

        let mut best: Option<(usize, f64)> = None;
        for (i, g) in gaps.into_iter().enumerate() {
            let g = g?;
            if best.is_none_or(|(_, b)| g > b) {
                best = Some((i, g));
            }
        }
        let (best_i, best_gap) = best.unwrap_or((0, f64::NEG_INFINITY));
        let mut report = CertReport {
            property: self.property.clone(),
            status: CertStatus::CertifiedOnSamples,
            witness: None,
            samples_used: total,
            max_violation: best_gap,
            tolerance: self.tolerance,
        };
        if best_gap > self.tolerance {
            let (p, extra) = self.refine(self.point(best_i), best_gap, &eval);
            let (lhs, rhs) = eval(&p).map_err(|source| CertError::Eval { point: p.clone(), source })?;
            report.status = CertStatus::Violated;
            report.samples_used += extra + 1;
            report.max_violation = report.max_violation.max(lhs - rhs);
            report.witness = Some(Witness {
                x: p[0],
                y: p[1],
                t: p[2],
                t2: p.get(3).copied(),
                lhs,
                rhs,
            });
        }
        Ok(report)
    }

    /// Coordinate-wise golden-section maximization of `lhs − rhs`, each
    /// coordinate bracketed by one grid spacing around the current point.
    fn refine<F>(&self, mut p: Sample, mut best: f64, eval: &F) -> (Sample, usize)
    where
        F: Fn(&[f64]) -> Result<(f64, f64), EvalError>,
    {
        const INV_PHI: f64 = 0.618_033_988_749_894_8;
        let mut evals = 0;
        let gap = |q: &[f64], evals: &mut usize| {
            *evals += 1;
            eval(q).map(|(l, r)| l - r).unwrap_or(f64::NEG_INFINITY)
        };
        let spacing = (self.plan.grid_points.max(2) - 1) as f64;
        for d in 0..p.len() {
            let (lo, hi) = self.bounds[d];
            let step = (hi - lo) / spacing;
            let mut a = (p[d] - step).max(lo);
            let mut b = (p[d] + step).min(hi);
            let mut q = p.clone();
            let mut c = b - INV_PHI * (b - a);
            let mut e = a + INV_PHI * (b - a);
            q[d] = c;
            let mut fc = gap(&q, &mut evals);
            q[d] = e;
            let mut fe = gap(&q, &mut evals);
            for _ in 0..self.plan.refine_steps {
                if fc > fe {
                    b = e;
                    e = c;
                    fe = fc;
                    c = b - INV_PHI * (b - a);
                    q[d] = c;
                    fc = gap(&q, &mut evals);
                } else {
                    a = c;
                    c = e;
                    fc = fe;
                    e = a + INV_PHI * (b - a);
                    q[d] = e;
                    fe = gap(&q, &mut evals);
                }
            }
            let (cand, val) = if fc > fe { (c, fc) } else { (e, fe) };
            if val > best {
                best = val;
                p[d] = cand;
            }
        }
        (p, evals)
    }
}

fn check_plan(plan: &SamplingPlan) -> Result<(), CertError> {
    if plan.grid_points == 0 && plan.random_samples == 0 {
        return Err(CertError::InvalidDomain { lo: f64::NAN, hi: f64::NAN });
    }
    Ok(())
}

fn open_bounds(domain: Interval, plan: &SamplingPlan) -> (f64, f64) {
    domain.inset(plan.inset)
}

/// `x + tη(y, x) ∈ A` for sampled `x, y ∈ A`, `t ∈ [0, 1]`.
///
/// The witness `lhs` is the signed distance of `x + tη(y,x)` outside `A`
/// (non-negative means outside or on the boundary).
pub fn check_invex_set(domain: Interval, eta: &EtaMap, plan: &SamplingPlan) -> Result<CertReport, CertError> {
    check_plan(plan)?;
    let xb = open_bounds(domain, plan);
    let probe = Probe {
        bounds: vec![xb, xb, (0.0, 1.0)],
        plan,
        tolerance: 0.0,
        property: format!("invex set ({}, {}) w.r.t. η = {}", domain.lo, domain.hi, eta.label),
    };
    let r = probe.run(|p| {
        let (x, y, t) = (p[0], p[1], p[2]);
        let z = x + t * eta.eval(y, x)?;
        Ok(((domain.lo - z).max(z - domain.hi), 0.0))
    })?;
    Ok(r)
}

/// Residuals of the two Condition C identities:
/// `η(y, y+tη(x,y)) + tη(x,y)` and `η(x, y+tη(x,y)) − (1−t)η(x,y)`.
/// The larger absolute residual is the sample's `lhs`; `rhs` is 0.
pub fn check_condition_c(eta: &EtaMap, domain: Interval, plan: &SamplingPlan) -> Result<CertReport, CertError> {
    check_plan(plan)?;
    let xb = open_bounds(domain, plan);
    let probe = Probe {
        bounds: vec![xb, xb, (0.0, 1.0)],
        plan,
        tolerance: plan.residual_tolerance,
        property: format!("Condition C for η = {}", eta.label),
    };
    probe.run(|p| {
        let (x, y, t) = (p[0], p[1], p[2]);
        let e = eta.eval(x, y)?;
        let z = y + t * e;
        let r1 = eta.eval(y, z)? + t * e;
        let r2 = eta.eval(x, z)? - (1.0 - t) * e;
        Ok((r1.abs().max(r2.abs()), 0.0))
    })
}

/// Residual of `η(y + t₂η(x,y), y + t₁η(x,y)) = (t₂ − t₁)η(x,y)`.
pub fn check_interpolation_identity(
    eta: &EtaMap,
    domain: Interval,
    plan: &SamplingPlan,
) -> Result<CertReport, CertError> {
    check_plan(plan)?;
    let xb = open_bounds(domain, plan);
    let probe = Probe {
        bounds: vec![xb, xb, (0.0, 1.0), (0.0, 1.0)],
        plan,
        tolerance: plan.residual_tolerance,
        property: format!("η(y+t₂η(x,y), y+t₁η(x,y)) = (t₂−t₁)η(x,y) for η = {}", eta.label),
    };
    probe.run(|p| {
        let (x, y, t1, t2) = (p[0], p[1], p[2], p[3]);
        let e = eta.eval(x, y)?;
        let r = eta.eval(y + t2 * e, y + t1 * e)? - (t2 - t1) * e;
        Ok((r.abs(), 0.0))
    })
}

/// `f(tx + (1−t)y) ≤ max{f(x), f(y)}` on the closed interval `[a, b]`.
pub fn certify_quasiconvex<F: RealFn + ?Sized>(
    f: &F,
    a: f64,
    b: f64,
    plan: &SamplingPlan,
) -> Result<CertReport, CertError> {
    check_plan(plan)?;
    let d = Interval::new(a, b)?;
    let probe = Probe {
        bounds: vec![(d.lo, d.hi), (d.lo, d.hi), (0.0, 1.0)],
        plan,
        tolerance: plan.tolerance,
        property: format!("quasi-convex on [{a}, {b}]"),
    };
    probe.run(|p| {
        let (x, y, t) = (p[0], p[1], p[2]);
        let lhs = f.value(t * x + (1.0 - t) * y)?;
        Ok((lhs, f.value(x)?.max(f.value(y)?)))
    })
}

/// `f(x + tη(y,x)) ≤ (1−t)f(x) + tf(y)` on the invex set `A`.
pub fn certify_preinvex<F: RealFn + ?Sized>(
    f: &F,
    eta: &EtaMap,
    domain: Interval,
    plan: &SamplingPlan,
) -> Result<CertReport, CertError> {
    check_plan(plan)?;
    let xb = open_bounds(domain, plan);
    let probe = Probe {
        bounds: vec![xb, xb, (0.0, 1.0)],
        plan,
        tolerance: plan.tolerance,
        property: format!("preinvex w.r.t. η = {} on ({}, {})", eta.label, domain.lo, domain.hi),
    };
    probe.run(|p| {
        let (x, y, t) = (p[0], p[1], p[2]);
        let lhs = f.value(x + t * eta.eval(y, x)?)?;
        Ok((lhs, (1.0 - t) * f.value(x)? + t * f.value(y)?))
    })
}

/// `f(x + tη(y,x)) ≤ max{f(x), f(y)}` on the invex set `A`.
pub fn certify_prequasiinvex<F: RealFn + ?Sized>(
    f: &F,
    eta: &EtaMap,
    domain: Interval,
    plan: &SamplingPlan,
) -> Result<CertReport, CertError> {
    check_plan(plan)?;
    let xb = open_bounds(domain, plan);
    let probe = Probe {
        bounds: vec![xb, xb, (0.0, 1.0)],
        plan,
        tolerance: plan.tolerance,
        property: format!("prequasiinvex w.r.t. η = {} on ({}, {})", eta.label, domain.lo, domain.hi),
    };
    probe.run(|p| {
        let (x, y, t) = (p[0], p[1], p[2]);
        let lhs = f.value(x + t * eta.eval(y, x)?)?;
        Ok((lhs, f.value(x)?.max(f.value(y)?)))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    fn quick() -> SamplingPlan {
        SamplingPlan { grid_points: 17, random_samples: 2_000, ..Default::default() }
    }

    fn f(s: &str) -> Expr {
        Expr::parse(s).unwrap()
    }

    #[test]
    fn eta_argument_order() {
        let eta = EtaMap::parse("2*y - x", iv(0.0, 1.0)).unwrap();
        // η(first, second) binds y = first, x = second
        assert_eq!(eta.eval(3.0, 1.0).unwrap(), 5.0);
        assert!(EtaMap::linear(iv(0.0, 1.0)).is_linear());
    }

    #[test]
    fn builtin_registry() {
        let d = iv(-1.0, 1.0);
        assert_eq!(EtaMap::from_spec("linear", d).unwrap().eval(0.5, 0.25).unwrap(), 0.25);
        assert_eq!(EtaMap::from_spec("zero", d).unwrap().eval(0.5, 0.25).unwrap(), 0.0);
        assert_eq!(EtaMap::from_spec("scaled(2)", d).unwrap().eval(0.5, 0.25).unwrap(), 0.5);
        assert_eq!(EtaMap::from_spec("shifted-linear(0.1)", d).unwrap().eval(0.5, 0.25).unwrap(), 0.35);
        assert_eq!(EtaMap::from_spec("(y-x)^3", d).unwrap().eval(1.0, 0.0).unwrap(), 1.0);
        assert!(EtaMap::from_spec("scaled(two)", d).is_err());
        assert!(EtaMap::from_spec("y - z", d).is_err());
    }

    #[test]
    fn invex_set_examples() {
        let plan = quick();
        assert!(check_invex_set(iv(0.0, 10.0), &EtaMap::linear(iv(0.0, 10.0)), &plan).unwrap().certified());
        assert!(check_invex_set(iv(-5.0, 5.0), &EtaMap::zero(iv(-5.0, 5.0)), &plan).unwrap().certified());

        let d = iv(0.0, 1.0);
        let r = check_invex_set(d, &EtaMap::scaled(2.0, d), &plan).unwrap();
        assert_eq!(r.status, CertStatus::Violated);
        let w = r.witness.unwrap();
        assert!(w.x + w.t * 2.0 * (w.y - w.x) > 1.0 || w.x + w.t * 2.0 * (w.y - w.x) < 0.0);
        // the explicit point from the definition
        let z: f64 = 0.1 + 1.0 * EtaMap::scaled(2.0, d).eval(0.9, 0.1).unwrap();
        assert!((z - 1.7).abs() < 1e-12 && !d.contains(z));
    }

    #[test]
    fn condition_c_examples() {
        let plan = quick();
        let d = iv(-1.0, 1.0);
        let lin = check_condition_c(&EtaMap::linear(d), d, &plan).unwrap();
        assert!(lin.certified());
        assert!(lin.max_violation <= 1e-15);
        assert!(check_condition_c(&EtaMap::zero(d), d, &plan).unwrap().certified());

        let cubic = EtaMap::parse("(y - x)^3", d).unwrap();
        // explicit point x = 0.5, y = −0.5, t = 0.5
        let e = cubic.eval(0.5, -0.5).unwrap();
        let r1 = cubic.eval(-0.5, -0.5 + 0.5 * e).unwrap() + 0.5 * e;
        assert!((r1 - 0.375).abs() < 1e-15);
        let r = check_condition_c(&cubic, d, &plan).unwrap();
        assert_eq!(r.status, CertStatus::Violated);
        assert!(r.witness.unwrap().lhs > r.tolerance);

        let shifted = EtaMap::shifted_linear(0.1, d);
        assert!(!check_condition_c(&shifted, d, &plan).unwrap().certified());
    }

    #[test]
    fn interpolation_identity_examples() {
        let plan = SamplingPlan { grid_points: 9, random_samples: 2_000, ..Default::default() };
        let d = iv(-1.0, 1.0);
        let lin = check_interpolation_identity(&EtaMap::linear(d), d, &plan).unwrap();
        assert!(lin.certified() && lin.max_violation <= 1e-15);
        // t₁ = t₂ leaves η(z, z), which vanishes for the linear map
        let e = EtaMap::linear(d);
        assert_eq!(e.eval(0.3, 0.3).unwrap(), 0.0);
        let cubic = EtaMap::parse("(y - x)^3", d).unwrap();
        let r = check_interpolation_identity(&cubic, d, &plan).unwrap();
        assert_eq!(r.status, CertStatus::Violated);
        assert!(r.witness.unwrap().t2.is_some());
    }

    #[test]
    fn quasiconvex_examples() {
        let plan = quick();
        assert!(certify_quasiconvex(&f("x^2"), -1.0, 2.0, &plan).unwrap().certified());
        let c = certify_quasiconvex(&f("3"), 0.0, 1.0, &plan).unwrap();
        assert!(c.certified() && c.max_violation == 0.0);

        let r = certify_quasiconvex(&f("x*(1-x)"), 0.0, 1.0, &plan).unwrap();
        assert_eq!(r.status, CertStatus::Violated);
        let w = r.witness.unwrap();
        assert!((w.lhs - 0.25).abs() < 1e-12 && w.rhs.abs() < 1e-12);
        assert!((r.max_violation - 0.25).abs() < 1e-12);
    }

    #[test]
    fn preinvex_and_prequasiinvex_examples() {
        let plan = quick();
        let d = iv(-3.0, 3.0);
        assert!(certify_preinvex(&f("x^2"), &EtaMap::linear(d), d, &plan).unwrap().certified());

        let u = iv(0.0, 1.0);
        let r = certify_preinvex(&f("x*(1-x)"), &EtaMap::linear(u), u, &plan).unwrap();
        assert_eq!(r.status, CertStatus::Violated);

        let r = certify_prequasiinvex(&f("x*(1-x)"), &EtaMap::linear(u), u, &plan).unwrap();
        assert_eq!(r.status, CertStatus::Violated);
        let w = r.witness.unwrap();
        // the grid contains (0, 1, 1/2) up to the open-interval inset
        assert!((w.lhs - w.rhs - 0.25).abs() < 1e-8);

        for g in ["x*(1-x)", "-exp(x)", "x^4 - x^2"] {
            assert!(certify_prequasiinvex(&f(g), &EtaMap::zero(u), u, &plan).unwrap().certified());
        }
    }

    #[test]
    fn derivative_power_function() {
        let g = f("x^3");
        let h = DerivativePower { f: &g, q: 2.0 };
        assert!((h.value(2.0).unwrap() - 144.0).abs() < 1e-12);
        let plan = quick();
        assert!(certify_quasiconvex(&h, -1.0, 1.0, &plan).unwrap().certified());
    }

    #[test]
    fn eval_failures_surface_as_errors() {
        let plan = quick();
        let r = certify_quasiconvex(&f("log(x)"), -1.0, 1.0, &plan);
        assert!(matches!(r, Err(CertError::Eval { .. })));
        assert!(Interval::new(1.0, 1.0).is_err());
    }

    #[test]
    fn reports_are_deterministic_across_thread_counts() {
        let plan = quick();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| certify_quasiconvex(&f("x^4 - x^2"), -1.0, 1.0, &plan).unwrap())
        };
        assert_eq!(run(1), run(4));
    }
}
