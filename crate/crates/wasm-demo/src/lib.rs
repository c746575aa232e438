//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each export takes plain strings and numbers and returns a JSON string; the
//! pure `*_json` functions behind them are ordinary Rust and tested natively.

use fracineq::explorer::{alpha_scan, parse_alpha_grid, ScanPlan};
use fracineq::expr::Expr;
use fracineq::fracint::{left_integral, FracOrder, QuadratureConfig};
use fracineq::invexity::SamplingPlan;
use fracineq::verify::{verify, InequalityCase, TheoremId};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Lighter sampling than the CLI default so the page stays responsive.
fn demo_sampling() -> SamplingPlan {
    SamplingPlan { grid_points: 17, random_samples: 2_000, ..Default::default() }
}

/// The page has one η field for every theorem; it is ignored by theorems
/// stated without η.
fn case(theorem: &str, f: &str, a: f64, b: f64, eta: &str, alpha: f64) -> Result<InequalityCase, String> {
    let theorem: TheoremId = theorem.parse().map_err(|e: fracineq::verify::VerifyError| e.to_string())?;
    let mut case = InequalityCase::new(theorem, f, a, b).alpha(alpha);
    if theorem.uses_eta() && !eta.trim().is_empty() {
        case = case.eta(eta.trim());
    }
    case.sampling = demo_sampling();
    Ok(case)
}

/// `J_{a+}^α f` sampled at `points` evenly spaced abscissae in `(a, x_max]`.
pub fn integral_curve_json(f: &str, a: f64, x_max: f64, alpha: f64, points: usize) -> Result<String, String> {
    if x_max.partial_cmp(&a) != Some(std::cmp::Ordering::Greater) {
        return Err(format!("need x_max > a, got a = {a}, x_max = {x_max}"));
    }
    let f = Expr::parse(f).map_err(|e| e.to_string())?;
    let order = FracOrder::new(alpha).map_err(|e| e.to_string())?;
    let cfg = QuadratureConfig::default();
    let n = points.clamp(2, 400);
    let mut xs = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for i in 1..=n {
        let x = a + (x_max - a) * i as f64 / n as f64;
        let r = left_integral(&f, a, x, order, &cfg).map_err(|e| e.to_string())?;
        xs.push(x);
        values.push(r.value);
    }
    Ok(json!({ "x": xs, "value": values }).to_string())
}

pub fn verify_json(theorem: &str, f: &str, a: f64, b: f64, eta: &str, alpha: f64) -> Result<String, String> {
    let r = verify(&case(theorem, f, a, b, eta, alpha)?).map_err(|e| e.to_string())?;
    serde_json::to_string(&r).map_err(|e| e.to_string())
}

pub fn scan_json(theorem: &str, f: &str, a: f64, b: f64, eta: &str, alpha_grid: &str) -> Result<String, String> {
    let alphas = parse_alpha_grid(alpha_grid).map_err(|e| e.to_string())?;
    let plan = ScanPlan { case: case(theorem, f, a, b, eta, 1.0)?, alphas };
    let report = alpha_scan(&plan).map_err(|e| e.to_string())?;
    serde_json::to_string(&report).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn integral_curve(f: &str, a: f64, x_max: f64, alpha: f64, points: usize) -> Result<String, JsValue> {
    integral_curve_json(f, a, x_max, alpha, points).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn verify_case(theorem: &str, f: &str, a: f64, b: f64, eta: &str, alpha: f64) -> Result<String, JsValue> {
    verify_json(theorem, f, a, b, eta, alpha).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn scan_alpha(theorem: &str, f: &str, a: f64, b: f64, eta: &str, alpha_grid: &str) -> Result<String, JsValue> {
    scan_json(theorem, f, a, b, eta, alpha_grid).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn curve_of_a_constant_is_a_power() {
        // J_{0+}^{1/2} 1 (x) = 2√x/√π
        let v: Value = serde_json::from_str(&integral_curve_json("1", 0.0, 1.0, 0.5, 4).unwrap()).unwrap();
        let xs = v["x"].as_array().unwrap();
        assert_eq!(xs.len(), 4);
        for (x, y) in xs.iter().zip(v["value"].as_array().unwrap()) {
            let (x, y) = (x.as_f64().unwrap(), y.as_f64().unwrap());
            assert!((y - 2.0 * x.sqrt() / std::f64::consts::PI.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn verify_reports_the_violated_quasiconvex_case() {
        let v: Value = serde_json::from_str(&verify_json("T1_2", "x*(1-x)", 0.0, 1.0, "", 1.0).unwrap()).unwrap();
        assert_eq!(v["status"], "violated");
        let with_eta = verify_json("T1_2", "x*(1-x)", 0.0, 1.0, "y - x", 1.0).unwrap();
        assert_eq!(serde_json::from_str::<Value>(&with_eta).unwrap(), v);
        assert!((v["lhs"].as_f64().unwrap() - 1.0 / 6.0).abs() < 1e-10);
    }

    #[test]
    fn scan_returns_one_row_per_alpha() {
        let v: Value = serde_json::from_str(&scan_json("T2_2", "x^2", 0.0, 1.0, "y - x", "0.5,1,2").unwrap()).unwrap();
        let rows = v["rows"].as_array().unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| r["status"] == "holds"));
    }

    #[test]
    fn errors_are_messages() {
        assert!(integral_curve_json("1", 0.0, 1.0, -1.0, 4).unwrap_err().contains("alpha must be positive"));
        assert!(verify_json("T2_4", "x^2", 0.0, 1.0, "", 1.5).unwrap_err().contains("alpha must lie in (0,1]"));
        assert!(scan_json("T1_3", "x^", 0.0, 1.0, "", "1").is_err());
    }
}
