use fracineq::expr::Expr;
use fracineq::fracint::{
    frac_trapezoid_mean, integrate, left_integral, monomial_oracle, right_integral, FracOrder,
    QuadratureConfig,
};
use proptest::prelude::*;

fn ord(a: f64) -> FracOrder {
    FracOrder::new(a).unwrap()
}

fn shifted_monomial(a: f64, beta: f64) -> Expr {
    Expr::parse(&format!("(x - ({a}))^{beta}")).unwrap()
}

#[test]
fn left_integral_matches_monomial_oracle_grid() {
    let cfg = QuadratureConfig::default();
    let mut worst = 0.0f64;
    for alpha in [0.25, 0.5, 1.0, 1.5, 2.5] {
        for beta in [0.0, 1.0, 2.0, 3.0] {
            for a in [0.0, -1.0, 2.0] {
                for width in [0.5, 1.0, 3.0] {
                    let x = a + width;
                    let got = left_integral(&shifted_monomial(a, beta), a, x, ord(alpha), &cfg).unwrap();
                    let want = monomial_oracle(a, beta, ord(alpha), x).unwrap();
                    let tol = 1e-10f64.max(1e-9 * want.abs());
                    assert!(got.converged);
                    assert!(
                        (got.value - want).abs() <= tol,
                        "α={alpha} β={beta} a={a} x={x}: {} vs {want}",
                        got.value
                    );
                    worst = worst.max((got.value - want).abs() / want.abs());
                }
            }
        }
    }
    assert!(worst < 1e-9);
}

#[test]
fn right_integral_matches_mirrored_oracle() {
    // J_{b−}^α (b−t)^β (x) = Γ(β+1)/Γ(α+β+1)·(b−x)^{α+β}
    let cfg = QuadratureConfig::default();
    for alpha in [0.25, 0.5, 1.0, 2.5] {
        for beta in [0.0, 1.0, 3.0] {
            let (x, b) = (-0.5, 1.5);
            let f = Expr::parse(&format!("({b} - x)^{beta}")).unwrap();
            let got = right_integral(&f, x, b, ord(alpha), &cfg).unwrap();
            let want = monomial_oracle(x, beta, ord(alpha), b).unwrap();
            assert!((got.value - want).abs() <= 1e-10f64.max(1e-9 * want.abs()));
        }
    }
}

#[test]
fn reflection_identity_battery() {
    let cfg = QuadratureConfig::default();
    let (a, b) = (-0.3, 1.4);
    for (f, reflected) in [
        ("exp(x)", "exp(1.1 - x)"),
        ("x^3 - x", "(1.1 - x)^3 - (1.1 - x)"),
        ("abs(x - 0.2)", "abs(1.1 - x - 0.2)"),
    ] {
        for alpha in [0.25, 0.75, 1.5] {
            let r = right_integral(&Expr::parse(f).unwrap(), a, b, ord(alpha), &cfg).unwrap();
            let l = left_integral(&Expr::parse(reflected).unwrap(), a, b, ord(alpha), &cfg).unwrap();
            assert!((r.value - l.value).abs() <= 1e-10, "{f} α={alpha}");
        }
    }
}

const SMOOTH_BATTERY: [&str; 6] = ["x", "x^2", "x^3", "exp(x)", "exp(-x)", "x^4 - x^2"];

#[test]
fn alpha_one_mean_is_the_classical_mean() {
    let cfg = QuadratureConfig::default();
    for f in SMOOTH_BATTERY.iter().chain(["abs(x)", "x*(1-x)", "2"].iter()) {
        let e = Expr::parse(f).unwrap();
        for (a, eta) in [(0.0, 1.0), (-1.0, 2.0), (0.5, 0.25)] {
            let mean = frac_trapezoid_mean(&e, a, eta, ord(1.0), &cfg).unwrap();
            let kinks = e.kink_points(a, a + eta);
            let direct = integrate(|t| e.eval(t), a, a + eta, &kinks, &cfg).unwrap().value / eta;
            assert!((mean.value - direct).abs() <= 1e-10, "{f} on [{a}, {}]", a + eta);
        }
    }
}

proptest! {
    #[test]
    fn linearity_on_random_polynomials(
        c in prop::collection::vec(-2.0f64..2.0, 8),
        k1 in -3.0f64..3.0,
        k2 in -3.0f64..3.0,
        alpha in 0.2f64..2.5,
    ) {
        let cfg = QuadratureConfig::default();
        let p1 = format!("{} + {}*x + {}*x^2 + {}*x^3", c[0], c[1], c[2], c[3]);
        let p2 = format!("{} + {}*x + {}*x^2 + {}*x^3", c[4], c[5], c[6], c[7]);
        let combo = format!("({k1})*({p1}) + ({k2})*({p2})");
        let j = |s: &str| left_integral(&Expr::parse(s).unwrap(), -0.5, 1.5, ord(alpha), &cfg).unwrap().value;
        let lhs = j(&combo);
        let rhs = k1 * j(&p1) + k2 * j(&p2);
        prop_assert!((lhs - rhs).abs() <= 1e-10, "{} vs {}", lhs, rhs);
    }

    #[test]
    fn monotone_in_the_integrand(shift in 0.0f64..1.0, alpha in 0.2f64..2.5) {
        // f = g + shift + x^2 ≥ g pointwise
        let cfg = QuadratureConfig::default();
        let g = Expr::parse("exp(-x) * (x - 0.3)").unwrap();
        let f = Expr::parse(&format!("exp(-x) * (x - 0.3) + {shift} + x^2")).unwrap();
        let jf = left_integral(&f, -1.0, 1.0, ord(alpha), &cfg).unwrap().value;
        let jg = left_integral(&g, -1.0, 1.0, ord(alpha), &cfg).unwrap().value;
        prop_assert!(jf >= jg - 1e-12);
    }
}
