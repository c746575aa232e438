//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p fracineq-cli --test acceptance`.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use fracineq::explorer::reduction_sweep;
use fracineq::expr::Expr;
use fracineq::fracint::{gamma_fn, integrate, left_integral, monomial_oracle, FracOrder, QuadratureConfig};
use fracineq::invexity::{check_condition_c, check_interpolation_identity, EtaMap, Interval, SamplingPlan};
use fracineq::verify::{
    kernel_abs_integral, kernel_pow_integral, lemma_identity_residual, verify, InequalityCase, TheoremId, Verdict,
    BATTERY,
};

const BIN: &str = env!("CARGO_BIN_EXE_fracineq");

fn ord(a: f64) -> FracOrder {
    FracOrder::new(a).unwrap()
}

type Check = Result<String, String>;
type Criterion<'a> = (&'static str, Duration, Box<dyn Fn() -> Check + 'a>);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn gamma_oracle() -> Check {
    for (n, fact) in [(1.0, 1.0), (2.0, 1.0), (3.0, 2.0), (4.0, 6.0), (5.0, 24.0)] {
        let g = gamma_fn(n).map_err(|e| e.to_string())?;
        ensure((g - fact).abs() <= 1e-13 * fact, format!("gamma({n}) = {g}"))?;
    }
    // Γ(7/2) = (5/2)(3/2)(1/2)√π
    let want = 2.5 * 1.5 * 0.5 * std::f64::consts::PI.sqrt();
    let g = gamma_fn(3.5).map_err(|e| e.to_string())?;
    ensure((g - 3.3233509704478426).abs() <= 1e-12 * want, format!("gamma(3.5) = {g}"))?;
    ensure((want - 3.3233509704478426).abs() <= 1e-15 * want, "half-integer product disagrees with pinned value")?;
    Ok(format!("gamma(3.5) = {g}"))
}

fn monomial_grid() -> Check {
    let cfg = QuadratureConfig::default();
    let mut worst = 0.0f64;
    let mut cases = 0;
    for alpha in [0.25, 0.5, 1.0, 1.5, 2.5] {
        for beta in [0.0, 1.0, 2.0, 3.0] {
            for a in [0.0, -1.0, 2.0] {
                for width in [0.5, 1.0, 3.0] {
                    let x = a + width;
                    let f = Expr::parse(&format!("(x - ({a}))^{beta}")).unwrap();
                    let got = left_integral(&f, a, x, ord(alpha), &cfg).map_err(|e| e.to_string())?;
                    let want = monomial_oracle(a, beta, ord(alpha), x).unwrap();
                    let tol = 1e-10f64.max(1e-9 * want.abs());
                    let err = (got.value - want).abs();
                    ensure(err <= tol, format!("α={alpha} β={beta} a={a} x={x}: error {err:e}"))?;
                    worst = worst.max(err / tol);
                    cases += 1;
                }
            }
        }
    }
    Ok(format!("{cases} cases, worst error {worst:.2e} of tolerance"))
}

fn kernel_breaks() -> Vec<f64> {
    let mut b = vec![0.5];
    for k in 2..=60 {
        let h = 0.5f64.powi(k);
        b.push(h);
        b.push(1.0 - h);
    }
    b
}

fn brute(f: impl Fn(f64) -> f64) -> f64 {
    let cfg = QuadratureConfig { abs_tol: 1e-14, rel_tol: 1e-13, ..Default::default() };
    integrate(|t| Ok(f(t)), 0.0, 1.0, &kernel_breaks(), &cfg).unwrap().value
}

fn closed_form_kernels() -> Check {
    let mut worst = 0.0f64;
    for al in [0.1, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0] {
        let q = brute(|t| (t.powf(al) - (1.0 - t).powf(al)).abs());
        let d = (q - kernel_abs_integral(ord(al))).abs();
        ensure(d <= 1e-10, format!("abs kernel α={al}: {d:e}"))?;
        worst = worst.max(d);
        if al > 1.0 {
            continue;
        }
        for p in [1.25, 2.0, 4.0] {
            if al * p > 3.0 {
                continue;
            }
            let q = brute(|t| (1.0 - 2.0 * t).abs().powf(al * p));
            let d = (q - kernel_pow_integral(al, p).unwrap()).abs();
            ensure(d <= 1e-10, format!("power kernel α={al} p={p}: {d:e}"))?;
            worst = worst.max(d);
        }
    }
    Ok(format!("max deviation {worst:e}"))
}

fn lemma_identity() -> Check {
    let cfg = QuadratureConfig::default();
    let mut worst = 0.0f64;
    for fx in BATTERY.iter().filter(|f| f.smooth) {
        let f = Expr::parse(fx.f).unwrap();
        for a in [0.0, -1.0] {
            for eta in [0.5, 1.0, 2.0] {
                for al in [0.25, 0.5, 1.0, 2.0] {
                    let r = lemma_identity_residual(&f, a, eta, ord(al), &cfg).map_err(|e| e.to_string())?;
                    ensure(r <= 1e-8, format!("{} a={a} η={eta} α={al}: residual {r:e}", fx.f))?;
                    worst = worst.max(r);
                }
            }
        }
    }
    Ok(format!("max residual {worst:e}"))
}

fn theorem_suite() -> Check {
    let (mut certified, mut total) = (0, 0);
    let mut min_margin = f64::INFINITY;
    for fx in BATTERY {
        for theorem in TheoremId::INEQUALITIES {
            for al in [0.25, 0.5, 0.75, 1.0, 1.5, 2.0] {
                if theorem.needs_unit_alpha() && al > 1.0 {
                    continue;
                }
                let mut case = InequalityCase::new(theorem, fx.f, fx.a, fx.b).alpha(al);
                if theorem.uses_eta() {
                    case = case.eta("y - x");
                }
                case = if matches!(theorem, TheoremId::T1_5 | TheoremId::T2_5) { case.q(3.0) } else { case.p(2.0) };
                let r = verify(&case).map_err(|e| format!("{theorem} {} α={al}: {e}", fx.f))?;
                total += 1;
                if r.hypotheses_certified() {
                    certified += 1;
                    ensure(
                        r.status == Verdict::Holds && r.margin >= -1e-9,
                        format!("{theorem} {} α={al}: {:?} with margin {:e}", fx.f, r.status, r.margin),
                    )?;
                    min_margin = min_margin.min(r.margin);
                }
            }
        }
    }
    ensure(certified > 0, "no case had certified hypotheses")?;
    Ok(format!("{certified}/{total} cases certified, all hold, min margin {min_margin:e}"))
}

fn reductions() -> Check {
    let r = reduction_sweep(&BATTERY, &[0.25, 0.5, 0.75, 1.0, 1.5, 2.0]);
    if let Some(row) = r.rows.iter().find(|row| row.error.is_some()) {
        return Err(format!("{} α={}: {}", row.function, row.alpha, row.error.as_deref().unwrap_or("")));
    }
    ensure(r.max_deviation <= 1e-12, format!("max deviation {:e}", r.max_deviation))?;
    Ok(format!("{} rows, max deviation {:e}", r.rows.len(), r.max_deviation))
}

fn run_cli(args: &[&str], threads: Option<&str>) -> std::process::Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("FRACINEQ_THREADS", t),
        None => cmd.env_remove("FRACINEQ_THREADS"),
    };
    cmd.output().expect("failed to launch the CLI")
}

fn hypothesis_necessity(dir: &Path) -> Check {
    let r = verify(&InequalityCase::new(TheoremId::T1_2, "x*(1-x)", 0.0, 1.0)).map_err(|e| e.to_string())?;
    ensure(r.status == Verdict::Violated, format!("status {:?}", r.status))?;
    ensure((r.lhs - 1.0 / 6.0).abs() <= 1e-10, format!("lhs {}", r.lhs))?;
    ensure(r.rhs == 0.0, format!("rhs {}", r.rhs))?;

    let out = run_cli(&["verify", "--theorem", "T1_2", "--f", "x*(1-x)", "--a", "0", "--b", "1", "--alpha", "1"], None);
    ensure(out.status.code() == Some(1), format!("verify exit {:?}", out.status.code()))?;

    let witness = dir.join("witness.json");
    let out = run_cli(
        &["search", "--theorem", "T1_2", "--family", "quadratic", "--budget", "200", "--out", witness.to_str().unwrap()],
        None,
    );
    ensure(out.status.code() == Some(1), format!("search exit {:?}", out.status.code()))?;
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&witness).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let evals = doc["result"]["evaluations"].as_u64().unwrap_or(u64::MAX);
    ensure(evals <= 200, format!("{evals} evaluations"))?;
    let w = &doc["result"]["witness"]["result"];
    ensure(w["status"] == "violated", "witness does not violate")?;
    Ok(format!("lhs = {}, search witness after {evals} evaluations", r.lhs))
}

fn condition_c() -> Check {
    let d = Interval::new(-1.0, 1.0).unwrap();
    let plan = SamplingPlan::default();
    let lin = EtaMap::linear(d);
    let c = check_condition_c(&lin, d, &plan).map_err(|e| e.to_string())?;
    let i = check_interpolation_identity(&lin, d, &plan).map_err(|e| e.to_string())?;
    ensure(c.certified() && c.max_violation <= 1e-15, format!("linear Condition C residual {:e}", c.max_violation))?;
    ensure(i.certified() && i.max_violation <= 1e-15, format!("linear interpolation residual {:e}", i.max_violation))?;

    let cubic = EtaMap::parse("(y - x)^3", d).unwrap();
    let first = check_condition_c(&cubic, d, &plan).map_err(|e| e.to_string())?;
    let again = check_condition_c(&cubic, d, &plan).map_err(|e| e.to_string())?;
    ensure(!first.certified(), "cubic η certified")?;
    ensure(first == again, "cubic witness changed between runs")?;
    let w = first.witness.as_ref().ok_or("no witness")?;
    let eta = |u: f64, v: f64| (u - v).powi(3);
    let e = eta(w.x, w.y);
    let z = w.y + w.t * e;
    let residual = (eta(w.y, z) + w.t * e).abs().max((eta(w.x, z) - (1.0 - w.t) * e).abs());
    ensure((residual - w.lhs).abs() <= 1e-12 * residual.max(1.0), "witness residual does not reproduce")?;
    Ok(format!(
        "linear residuals {:e} / {:e}; cubic witness residual {}",
        c.max_violation, i.max_violation, w.lhs
    ))
}

fn determinism(dir: &Path) -> Check {
    let jobs: [(&str, Vec<&str>); 2] = [
        ("scan", vec!["scan", "--theorem", "T2_2", "--f", "x^2", "--a", "0", "--b", "1", "--alpha-grid", "0.25:1:0.25"]),
        ("search", vec!["search", "--theorem", "T1_2", "--family", "quadratic", "--budget", "200", "--seed", "7"]),
    ];
    for (name, args) in jobs {
        let mut files = Vec::new();
        for threads in ["1", "8"] {
            let path = dir.join(format!("{name}-{threads}.json"));
            let mut full = args.clone();
            full.extend(["--out", path.to_str().unwrap()]);
            let out = run_cli(&full, Some(threads));
            ensure(matches!(out.status.code(), Some(0 | 1)), format!("{name} exit {:?}", out.status.code()))?;
            files.push(std::fs::read(&path).map_err(|e| e.to_string())?);
        }
        ensure(files[0] == files[1], format!("{name} reports differ between 1 and 8 threads"))?;
    }
    Ok("scan and search reports identical at 1 and 8 threads".into())
}

fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let criteria: Vec<Criterion> = vec![
        ("gamma oracle", Duration::from_secs(1), Box::new(gamma_oracle)),
        ("quadrature vs monomial oracle", Duration::from_secs(10), Box::new(monomial_grid)),
        ("closed-form kernels", Duration::from_secs(5), Box::new(closed_form_kernels)),
        ("trapezoid identity residual", Duration::from_secs(30), Box::new(lemma_identity)),
        ("theorem suite", Duration::from_secs(60), Box::new(theorem_suite)),
        ("reductions", Duration::from_secs(10), Box::new(reductions)),
        ("hypothesis necessity", Duration::from_secs(60), Box::new(|| hypothesis_necessity(dir.path()))),
        ("Condition C", Duration::from_secs(60), Box::new(condition_c)),
        ("determinism", Duration::from_secs(120), Box::new(|| determinism(dir.path()))),
    ];
    let mut failures = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > *budget => Err(format!("{detail}; took {elapsed:.2?}, budget {budget:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail} ({elapsed:.2?})", i + 1),
            Err(why) => {
                failures += 1;
                println!("FAIL {} {name}: {why} ({elapsed:.2?})", i + 1);
            }
        }
    }
    if failures > 0 {
        std::process::exit(1);
    }
}
