use serde::{Deserialize, Serialize};

use super::{domain, int_pow, EvalError, Scalar};

/// Forward-mode dual number `value + deriv·ε`.
///
/// `kink` is set when evaluation passed through a point where the expression
/// is not differentiable (an `abs` argument crossing zero, a `min`/`max` tie,
/// or a piecewise breakpoint). The reported `deriv` there is a one-sided or
/// symmetric choice, not a true derivative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualValue {
    pub value: f64,
    pub deriv: f64,
    pub kink: bool,
}

impl DualValue {
    pub fn new(value: f64, deriv: f64) -> Self {
        DualValue { value, deriv, kink: false }
    }

    fn with(self, value: f64, deriv: f64) -> Self {
        DualValue { value, deriv, kink: self.kink }
    }

    fn join(self, o: Self, value: f64, deriv: f64) -> Self {
        DualValue { value, deriv, kink: self.kink || o.kink }
    }
}

impl Scalar for DualValue {
    fn constant(c: f64) -> Self {
        DualValue::new(c, 0.0)
    }
    fn var(v: f64) -> Self {
        DualValue::new(v, 1.0)
    }
    fn value(self) -> f64 {
        self.value
    }
    fn add(self, o: Self) -> Self {
        self.join(o, self.value + o.value, self.deriv + o.deriv)
    }
    fn sub(self, o: Self) -> Self {
        self.join(o, self.value - o.value, self.deriv - o.deriv)
    }
    fn mul(self, o: Self) -> Self {
        self.join(o, self.value * o.value, self.deriv * o.value + self.value * o.deriv)
    }
    fn div(self, o: Self) -> Result<Self, EvalError> {
        if o.value == 0.0 {
            return Err(domain("division by zero"));
        }
        let v = self.value / o.value;
        Ok(self.join(o, v, (self.deriv - v * o.deriv) / o.value))
    }
    fn neg(self) -> Self {
        self.with(-self.value, -self.deriv)
    }
    fn exp(self) -> Self {
        let e = self.value.exp();
        self.with(e, e * self.deriv)
    }
    fn ln(self) -> Result<Self, EvalError> {
        let v = Scalar::ln(self.value)?;
        Ok(self.with(v, self.deriv / self.value))
    }
    fn abs(self) -> Self {
        if self.value > 0.0 {
            self
        } else if self.value < 0.0 {
            self.neg()
        } else {
            // symmetric subgradient at the kink
            DualValue { value: 0.0, deriv: 0.0, kink: self.kink || self.deriv != 0.0 }
        }
    }
    fn sqrt(self) -> Result<Self, EvalError> {
        let s = Scalar::sqrt(self.value)?;
        if s == 0.0 {
            if self.deriv == 0.0 {
                return Ok(self.with(0.0, 0.0));
            }
            return Err(domain("sqrt is not differentiable at 0"));
        }
        Ok(self.with(s, self.deriv / (2.0 * s)))
    }
    fn powi(self, n: i32) -> Result<Self, EvalError> {
        let v = int_pow(self.value, n)?;
        let d = if n == 0 {
            0.0
        } else {
            n as f64 * int_pow(self.value, n - 1)? * self.deriv
        };
        Ok(self.with(v, d))
    }
    fn powf(self, e: Self) -> Result<Self, EvalError> {
        let v = super::real_pow(self.value, e.value)?;
        if self.value == 0.0 {
            // 0^e with e > 0: derivative exists only for e > 1 and constant e
            if e.deriv == 0.0 && (e.value > 1.0 || self.deriv == 0.0) {
                return Ok(self.join(e, 0.0, 0.0));
            }
            return Err(domain("power is not differentiable at a zero base"));
        }
        let d = v * (e.deriv * self.value.ln() + e.value * self.deriv / self.value);
        Ok(self.join(e, v, d))
    }
    fn min(self, o: Self) -> Self {
        pick(self, o, o.value < self.value)
    }
    fn max(self, o: Self) -> Self {
        pick(self, o, o.value > self.value)
    }
    fn is_constant(self) -> bool {
        self.deriv == 0.0 && !self.kink
    }
    fn flag_kink(self) -> Self {
        DualValue { kink: true, ..self }
    }
}

fn pick(a: DualValue, b: DualValue, take_b: bool) -> DualValue {
    if a.value == b.value {
        let kink = a.kink || b.kink || a.deriv != b.deriv;
        return DualValue { kink, ..a };
    }
    if take_b {
        b
    } else {
        a
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::Expr;
    use proptest::prelude::*;

    fn d(s: &str, x: f64) -> (f64, f64, bool) {
        let v = Expr::parse(s).unwrap().eval_dual(x).unwrap();
        (v.value, v.deriv, v.kink)
    }

    fn central_difference(e: &Expr, x: f64, h: f64) -> f64 {
        (e.eval(x + h).unwrap() - e.eval(x - h).unwrap()) / (2.0 * h)
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(d("x^2", 3.0), (9.0, 6.0, false));
        assert_eq!(d("exp(x)", 0.0), (1.0, 1.0, false));

        let e = Expr::parse("x^3 - x").unwrap();
        let v = e.eval_dual(0.7).unwrap();
        assert!((v.value - (-0.357)).abs() < 1e-15);
        assert!((v.deriv - 0.47).abs() < 1e-14);
        let fd = central_difference(&e, 0.7, 1e-6);
        assert!((v.deriv - fd).abs() < 1e-6);
    }

    #[test]
    fn abs_at_zero_is_flagged() {
        assert_eq!(d("abs(x)", 0.0), (0.0, 0.0, true));
        assert_eq!(d("abs(1-2*x)", 0.5), (0.0, 0.0, true));
        assert_eq!(d("abs(x)", -2.0), (2.0, -1.0, false));
        // smooth through zero, no kink
        assert_eq!(d("abs(x^2)", 0.0), (0.0, 0.0, false));
    }

    #[test]
    fn min_max_ties_are_flagged() {
        assert!(d("max(x, 1-x)", 0.5).2);
        assert!(!d("max(x, 1-x)", 0.7).2);
        assert_eq!(d("max(x, 1-x)", 0.7).1, 1.0);
        assert_eq!(d("min(x, 1-x)", 0.7).1, -1.0);
    }

    #[test]
    fn general_powers() {
        let (v, dv, _) = d("x^x", 2.0);
        assert!((v - 4.0).abs() < 1e-14);
        assert!((dv - 4.0 * (2f64.ln() + 1.0)).abs() < 1e-13);
        let (_, dv, _) = d("x^2.5", 4.0);
        assert!((dv - 2.5 * 8.0).abs() < 1e-12);
        assert!(Expr::parse("sqrt(x)").unwrap().eval_dual(0.0).is_err());
        assert_eq!(d("x^2.5", 0.0), (0.0, 0.0, false));
    }

    const FAMILIES: [&str; 10] = [
        "x",
        "x^2",
        "x^3 - x",
        "exp(x)",
        "exp(-x)",
        "x^4 - x^2",
        "x*(1-x)",
        "log(1 + x^2) / (2 + x)",
        "sqrt(4 + x) * exp(-x^2)",
        "(x^2 + 1)^1.5 - min(x, 3) * max(x, -3)",
    ];

    proptest! {
        #[test]
        fn dual_matches_central_difference(idx in 0usize..FAMILIES.len(), x in -1.5f64..1.5) {
            let e = Expr::parse(FAMILIES[idx]).unwrap();
            let v = e.eval_dual(x).unwrap();
            prop_assume!(!v.kink);
            let fd = central_difference(&e, x, 1e-6);
            prop_assert!((v.deriv - fd).abs() <= 1e-5 * (1.0 + v.deriv.abs()));
            // value component is bitwise identical to real evaluation
            prop_assert_eq!(v.value.to_bits(), e.eval(x).unwrap().to_bits());
        }

        #[test]
        fn printed_expression_evaluates_identically(idx in 0usize..FAMILIES.len(), x in -1.5f64..1.5) {
            let e = Expr::parse(FAMILIES[idx]).unwrap();
            let again = Expr::parse(&e.to_string()).unwrap();
            prop_assert_eq!(e.eval(x).unwrap().to_bits(), again.eval(x).unwrap().to_bits());
        }
    }
}
