//! One pass/fail line per acceptance criterion.
//!
//! Exits nonzero when a criterion fails that is not listed in `KNOWN`.
//! `HBPROOF_WINDOW` fixes the left end of the random continuation window.

#![allow(dead_code, unused_imports)]

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use hbproof::bvp::{solve_orbit, Chart};
use hbproof::config::ProofConfig;
use hbproof::continuation::ProofLedger;
use hbproof::manifold::{maximize_gamma, newton_solve};
use rand::Rng;

#[path = "cert_cli.rs"]
mod cert_cli;
#[path = "interval_props.rs"]
mod interval_props;
#[path = "seq_space.rs"]
mod seq_space;

/// Parts expected to fail, as `(criterion, part)`.
const KNOWN: &[(usize, &str)] = &[(2, "beta = 1.9")];

struct Part {
    name: String,
    ok: bool,
    detail: String,
}

fn part(name: &str, f: impl FnOnce() -> Result<String, String>) -> Part {
    let t = Instant::now();
    let (ok, detail) = match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(d)) => (true, d),
        Ok(Err(e)) => (false, e),
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            (false, format!("panic: {msg}"))
        }
    };
    Part {
        name: name.into(),
        ok,
        detail: format!("{detail} ({:.1} s)", t.elapsed().as_secs_f64()),
    }
}

fn suite(name: &str, tests: &[fn()]) -> Part {
    part(name, || {
        for t in tests {
            t();
        }
        Ok(format!("{} checks", tests.len()))
    })
}

fn hbproof(args: &[&str]) -> Result<(String, String), String> {
    let o = Command::new(env!("CARGO_BIN_EXE_hbproof")).args(args).output().map_err(|e| e.to_string())?;
    let out = String::from_utf8_lossy(&o.stdout).into_owned();
    let err = String::from_utf8_lossy(&o.stderr).into_owned();
    match o.status.code() {
        Some(0) => Ok((out, err)),
        c => Err(format!("exit {c:?}: {}", err.lines().last().unwrap_or(""))),
    }
}

fn json(s: &str) -> Result<serde_json::Value, String> {
    serde_json::from_str(s.trim()).map_err(|e| e.to_string())
}

fn criterion1(dir: &Path) -> Vec<Part> {
    vec![part("prove [1.2, 1.20025]", || {
        let out = dir.join("single.json");
        let t = Instant::now();
        let (stdout, _) = hbproof(&[
            "prove", "--beta0", "1.2", "--beta1", "1.20025", "--N", "30", "--m", "350", "--out", out.to_str().unwrap(),
        ])?;
        let secs = t.elapsed().as_secs_f64();
        let s = json(&stdout)?;
        let r = s["r"].as_f64().ok_or("no r")?;
        let l = s["L0"].as_f64().ok_or("no L0")?;
        let msg = format!("r = {r:.3e}, L = {l:.6}, {secs:.1} s");
        if r > 0.0 && (l - 1.7671).abs() <= 5e-3 && secs <= 120.0 {
            Ok(msg)
        } else {
            Err(msg)
        }
    })]
}

fn endpoint(beta: f64, want: f64) -> Result<String, String> {
    let cfg = ProofConfig::default();
    let (gamma, _) = maximize_gamma(beta, cfg.order, cfg.nu_tilde, cfg.eta).map_err(|e| e.to_string())?;
    let a = newton_solve(beta, cfg.order, gamma, None).map_err(|e| e.to_string())?;
    let m = cfg.m_for_beta(beta);
    let x = solve_orbit(beta, m, &Chart { coeffs: &a, rho: cfg.rho }).map_err(|e| e.to_string())?;
    let msg = format!("m = {m}, L = {:.6}, expected {want}", x.l);
    if (x.l - want).abs() <= 5e-3 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion2() -> Vec<Part> {
    vec![
        part("beta = 0.5", || endpoint(0.5, 3.1312)),
        part("beta = 1.9", || endpoint(1.9, 2.6170)),
    ]
}

fn run_continue(dir: &Path, name: &str, from: f64, to: f64, max_steps: Option<usize>) -> Result<String, String> {
    let path = dir.join(name);
    let p = path.to_str().unwrap();
    let (from_s, to_s) = (from.to_string(), to.to_string());
    let (stdout, _) = hbproof(&["continue", "--from", &from_s, "--to", &to_s, "--out", p])?;
    let s = json(&stdout)?;
    let ledger = ProofLedger::read(&path).map_err(|e| e.to_string())?;
    let (lo, hi) = ledger.covered().map_err(|e| e.to_string())?;
    let steps = ledger.entries.len();
    if lo.to_bits() != from.to_bits() || hi.to_bits() != to.to_bits() {
        return Err(format!("covers [{lo}, {hi}]"));
    }
    if s["steps"].as_u64() != Some(steps as u64) {
        return Err("summary does not match ledger".into());
    }
    if let Some(max) = max_steps {
        if steps > max {
            return Err(format!("{steps} steps"));
        }
    }
    let (vout, _) = hbproof(&["verify", p])?;
    let v = json(&vout)?;
    if v["verified"].as_u64() != Some(steps as u64) {
        return Err("verify count mismatch".into());
    }
    Ok(format!("{steps} steps, verified"))
}

fn criterion3(dir: &Path) -> Vec<Part> {
    let start = match std::env::var("HBPROOF_WINDOW") {
        Ok(s) => s.parse::<f64>().expect("HBPROOF_WINDOW must be a number"),
        Err(_) => (rand::rng().random_range(0.6..1.69f64) * 1e4).round() / 1e4,
    };
    let end = ((start + 0.01) * 1e4).round() / 1e4;
    vec![
        part("continue [1.2, 1.21]", || run_continue(dir, "mini.jsonl", 1.2, 1.21, Some(60))),
        part(&format!("continue [{start}, {end}]"), || run_continue(dir, "window.jsonl", start, end, None)),
    ]
}

fn criterion4() -> Vec<Part> {
    use interval_props::*;
    vec![
        suite(
            "containment",
            &[
                addition_contains_exact_sums,
                subtraction_contains_exact_differences,
                multiplication_contains_exact_products,
                division_contains_exact_quotients,
                division_by_zero_containing_interval_is_refused,
                sqrt_contains_exact_roots,
                square_and_powers_contain_products,
                exp_contains_sampled_values,
                ln_contains_sampled_values,
                cos_contains_sampled_values,
                sin_contains_sampled_values,
                abs_and_neg_contain_sampled_values,
                elementary_functions_enclose_high_precision_values,
                complex_products_contain_sampled_products,
                pi_is_enclosed,
            ],
        ),
        suite("inclusion monotonicity", &[inclusion_monotonicity]),
    ]
}

fn criterion5() -> Vec<Part> {
    use seq_space::*;
    vec![
        suite(
            "Banach algebra",
            &[chebyshev_convolution_is_submultiplicative, taylor_cauchy_product_is_submultiplicative],
        ),
        suite(
            "operator norms",
            &[
                chebyshev_operator_norm_matches_column_maximum,
                taylor_operator_norm_matches_column_maximum,
                functional_and_vector_norms_match_direct_formulas,
            ],
        ),
        suite("convolution tail bounds", &[q_bounds_dominate_sampled_convolutions]),
    ]
}

fn criterion6() -> Vec<Part> {
    vec![
        suite(
            "manifold",
            &[manifold_oracles::sampled_residuals_stay_below_y, manifold_oracles::sampled_derivatives_stay_below_z],
        ),
        suite("orbit", &[bvp_oracles::sampled_residuals_stay_below_y, bvp_oracles::sampled_derivatives_stay_below_z]),
    ]
}

fn criterion7() -> Vec<Part> {
    vec![
        suite("orbit structure", &[bvp_oracles::certified_orbit_is_consistent_with_its_radius]),
        suite("eigenpair", &[manifold_oracles::eigenvector_identity_holds_at_random_parameters]),
    ]
}

fn criterion8(dir: &Path) -> Vec<Part> {
    vec![
        part("verify emitted files", || {
            let mut n = 0;
            for name in ["single.json", "mini.jsonl", "window.jsonl"] {
                let p = dir.join(name);
                if p.exists() {
                    hbproof(&["verify", p.to_str().unwrap()])?;
                    n += 1;
                }
            }
            if n == 0 {
                return Err("no certificates were emitted".into());
            }
            Ok(format!("{n} files"))
        }),
        suite("single-bit tampering", &[cert_cli::single_bit_flips_are_rejected]),
    ]
}

fn criterion9() -> Vec<Part> {
    vec![suite("derivative bound", &[manifold_oracles::derivative_bound_dominates_finite_differences])]
}

fn main() {
    let dir = tempfile::tempdir().expect("temporary directory");
    let d = dir.path();
    let criteria: Vec<(usize, &str, Box<dyn Fn() -> Vec<Part>>)> = vec![
        (1, "single-interval proof", Box::new(|| criterion1(d))),
        (2, "endpoint orbit lengths", Box::new(criterion2)),
        (3, "continuation", Box::new(|| criterion3(d))),
        (4, "interval arithmetic", Box::new(criterion4)),
        (5, "sequence spaces", Box::new(criterion5)),
        (6, "bounds against oracles", Box::new(criterion6)),
        (7, "structural checks", Box::new(criterion7)),
        (8, "certificate integrity", Box::new(|| criterion8(d))),
        (9, "derivative bound", Box::new(criterion9)),
    ];
    let mut unexpected = 0;
    let mut lines = Vec::new();
    for (n, title, run) in &criteria {
        let parts = run();
        let ok = parts.iter().all(|p| p.ok);
        let known = parts.iter().filter(|p| !p.ok).all(|p| KNOWN.contains(&(*n, p.name.as_str())));
        if !ok && !known {
            unexpected += 1;
        }
        let status = match (ok, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        let detail: Vec<String> = parts
            .iter()
            .map(|p| format!("{} {}: {}", if p.ok { "ok" } else { "failed" }, p.name, p.detail))
            .collect();
        let line = format!("criterion {n} {status}: {title} | {}", detail.join("; "));
        println!("{line}");
        lines.push(line);
    }
    println!("\nsummary");
    for l in &lines {
        println!("{}", l.split(" | ").next().unwrap_or(l));
    }
    if unexpected > 0 {
        std::process::exit(1);
    }
}
