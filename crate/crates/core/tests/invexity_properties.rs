use fracineq::expr::Expr;
use fracineq::invexity::{
    certify_preinvex, certify_prequasiinvex, check_condition_c, check_interpolation_identity, CertStatus, EtaMap,
    Interval, SamplingPlan,
};
use proptest::prelude::*;

fn small_plan(seed: u64) -> SamplingPlan {
    SamplingPlan { grid_points: 7, random_samples: 300, seed, ..Default::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn preinvex_certificate_implies_prequasiinvex(
        c2 in -1.0f64..1.0,
        c3 in -0.5f64..0.5,
        k in 0.0f64..1.0,
        seed in any::<u64>(),
    ) {
        let f = Expr::parse(&format!("({c2})*x^2 + ({c3})*x^3")).unwrap();
        let d = Interval::new(-1.0, 1.0).unwrap();
        let eta = EtaMap::scaled(k, d);
        let plan = small_plan(seed);
        let pre = certify_preinvex(&f, &eta, d, &plan).unwrap();
        let quasi = certify_prequasiinvex(&f, &eta, d, &plan).unwrap();
        if pre.certified() {
            prop_assert!(quasi.certified());
        }
    }

    #[test]
    fn witnesses_reproduce_their_violation(c in 0.5f64..2.0, seed in any::<u64>()) {
        let f = Expr::parse(&format!("({c})*x*(1-x)")).unwrap();
        let d = Interval::new(0.0, 1.0).unwrap();
        let eta = EtaMap::linear(d);
        let r = certify_prequasiinvex(&f, &eta, d, &small_plan(seed)).unwrap();
        prop_assert_eq!(r.status, CertStatus::Violated);
        let w = r.witness.unwrap();
        let lhs = f.eval(w.x + w.t * eta.eval(w.y, w.x).unwrap()).unwrap();
        let rhs = f.eval(w.x).unwrap().max(f.eval(w.y).unwrap());
        prop_assert_eq!(lhs, w.lhs);
        prop_assert_eq!(rhs, w.rhs);
        prop_assert!(lhs > rhs + r.tolerance);
        prop_assert!(r.max_violation >= lhs - rhs);
    }

    #[test]
    fn linear_eta_residuals_vanish(lo in -1.0f64..0.0, w in 0.1f64..1.0, seed in any::<u64>()) {
        let d = Interval::new(lo, lo + w).unwrap();
        let eta = EtaMap::linear(d);
        let c = check_condition_c(&eta, d, &small_plan(seed)).unwrap();
        let i = check_interpolation_identity(&eta, d, &small_plan(seed)).unwrap();
        prop_assert!(c.certified() && c.max_violation <= 1e-15);
        prop_assert!(i.certified() && i.max_violation <= 1e-15);
    }
}

#[test]
fn default_plan_condition_c_examples() {
    let d = Interval::new(-1.0, 1.0).unwrap();
    let plan = SamplingPlan::default();
    let lin = check_condition_c(&EtaMap::linear(d), d, &plan).unwrap();
    assert!(lin.certified() && lin.max_violation <= 1e-15);
    assert_eq!(lin.samples_used, 33usize.pow(3) + 10_000);

    let cubic = EtaMap::parse("(y - x)^3", d).unwrap();
    let r = check_condition_c(&cubic, d, &plan).unwrap();
    let w = r.witness.unwrap();
    // independent re-evaluation of both residuals, η(u, v) = (u − v)³
    let eta = |u: f64, v: f64| (u - v).powi(3);
    let e = eta(w.x, w.y);
    let z = w.y + w.t * e;
    let r1 = (eta(w.y, z) + w.t * e).abs();
    let r2 = (eta(w.x, z) - (1.0 - w.t) * e).abs();
    assert!((r1.max(r2) - w.lhs).abs() <= 1e-15);
    assert!(w.lhs > r.tolerance);
}
