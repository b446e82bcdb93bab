use std::path::Path;
use std::process::{Command, Output};
use std::sync::OnceLock;

use hbproof::cert::{Certificate, VerifyError};
use hbproof::config::ProofConfig;
use hbproof::continuation::prove_interval;
use hbproof::export::{export, ExportKind};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use sha2::{Digest, Sha256};

#[macro_use]
#[path = "common/mod.rs"]
mod common;

const GAMMA: f64 = 0.866;

fn certificate() -> &'static Certificate {
    static C: OnceLock<Certificate> = OnceLock::new();
    C.get_or_init(|| prove_interval(1.2, 1.20025, Some(GAMMA), &ProofConfig::default()).unwrap())
}

fn hbproof(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hbproof")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn write_cert(dir: &Path) -> String {
    let path = dir.join("cert.json");
    std::fs::write(&path, certificate().to_json() + "\n").unwrap();
    path.to_str().unwrap().to_string()
}

pub fn round_trip_is_bit_exact_and_verifies() {
    let c = certificate();
    let text = c.to_json();
    let back = Certificate::from_json(&text).unwrap();
    assert_eq!(&back, c);
    assert_eq!(back.to_json(), text);
    let d = back.decode().unwrap();
    assert_eq!(d.beta0, 1.2);
    assert_eq!(d.beta1, 1.20025);
    assert_eq!(d.gamma, GAMMA);
    let rep = back.verify().unwrap();
    assert!(rep.bounds_reproduced);
    assert!(rep.r > 0.0 && rep.r_m > 0.0);
    assert!(rep.worst_manifold < 0.0 && rep.worst_bvp < 0.0);
}

pub fn single_bit_flips_are_rejected() {
    let text = certificate().to_json();
    let bytes = text.as_bytes();
    let start = text.find("\"payload\"").unwrap();
    let end = text.find("\"digest\"").unwrap();
    let mut rng = StdRng::seed_from_u64(51);
    for _ in 0..100 {
        let mut b = bytes.to_vec();
        let i = rng.random_range(start..end);
        b[i] ^= 1 << rng.random_range(0..8);
        let Ok(s) = String::from_utf8(b) else { continue };
        let outcome = Certificate::from_json(&s).and_then(|c| c.verify());
        assert!(outcome.is_err(), "flip at byte {i} accepted");
    }
}

pub fn tampered_values_fail_the_digest_or_the_bounds() {
    let c = certificate();
    let mut t = c.clone();
    t.payload.bvp.r = hbproof::interval::f64_to_hex(1.0);
    assert_eq!(Certificate::from_json(&t.to_json()), Err(VerifyError::Digest));
    // a consistent digest does not rescue a false claim
    let mut forged = t.clone();
    forged.digest = String::new();
    let text = forged.to_json();
    let payload_json = serde_json::to_string(&forged.payload).unwrap();
    let digest: String = Sha256::digest(payload_json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect();
    let text = text.replace("\"digest\":\"\"", &format!("\"digest\":\"{digest}\""));
    let reparsed = Certificate::from_json(&text).unwrap();
    assert!(matches!(reparsed.verify(), Err(VerifyError::NotNegative { .. })));
}

pub fn non_canonical_text_is_rejected() {
    let text = certificate().to_json();
    let spaced = text.replacen(':', ": ", 1);
    assert_eq!(Certificate::from_json(&spaced), Err(VerifyError::NonCanonical));
    assert!(matches!(Certificate::from_json("{}"), Err(VerifyError::Malformed(_))));
    let other = text.replacen("hbcert/1", "hbcert/2", 1);
    assert!(matches!(Certificate::from_json(&other), Err(VerifyError::Format(_))));
}

pub fn export_orbit_matches_endpoint_identities() {
    let d = certificate().decode().unwrap();
    let mut buf = Vec::new();
    export(ExportKind::Orbit, &d.x0, &d.a0, 11, &mut buf).unwrap();
    let mut rdr = csv::Reader::from_reader(buf.as_slice());
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["t", "v1", "v2", "v3", "v4", "u"]);
    let rows: Vec<Vec<f64>> = rdr
        .records()
        .map(|r| r.unwrap().iter().map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 11);
    assert!(rows.iter().flatten().all(|v| v.is_finite()));
    assert_eq!(rows[0][0], -1.0);
    assert_eq!(rows[10][0], 1.0);
    assert!(rows[0][2].abs() < 1e-10 && rows[0][4].abs() < 1e-10);
    let p = hbproof::manifold::eval_real(&d.a0, d.config.rho, d.x0.psi);
    for c in 0..4 {
        assert!((rows[10][1 + c] - p[c]).abs() < 1e-10);
    }
    for row in &rows {
        assert!((row[5] - row[1].ln_1p()).abs() < 1e-14);
    }
}

pub fn every_export_kind_writes_finite_data() {
    let d = certificate().decode().unwrap();
    for (kind, cols) in [
        (ExportKind::Decay, 5),
        (ExportKind::Manifold, 8),
        (ExportKind::UProfile, 2),
        (ExportKind::Orbit, 6),
    ] {
        let mut buf = Vec::new();
        export(kind, &d.x1, &d.a1, 9, &mut buf).unwrap();
        let mut rdr = csv::Reader::from_reader(buf.as_slice());
        assert_eq!(rdr.headers().unwrap().len(), cols);
        for r in rdr.records() {
            let r = r.unwrap();
            assert!(r.iter().all(|v| v.parse::<f64>().unwrap().is_finite()));
        }
    }
    assert!("spectrum".parse::<ExportKind>().is_err());
}

pub fn cli_verify_accepts_and_rejects() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_cert(dir.path());
    let ok = hbproof(&["verify", &path]);
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(summary["verified"], 1);

    let mut text = std::fs::read_to_string(&path).unwrap();
    let i = text.find("\"r\":\"").unwrap() + 6;
    let flipped = if &text[i..i + 1] == "0" { "1" } else { "0" };
    text.replace_range(i..i + 1, flipped);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, text).unwrap();
    let out = hbproof(&["verify", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "verification_failure");

    let missing = dir.path().join("missing.json");
    assert_eq!(code(&hbproof(&["verify", missing.to_str().unwrap()])), 4);
}

pub fn cli_export_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_cert(dir.path());
    let out = dir.path().join("orbit.csv");
    let o = hbproof(&["export", &path, "--kind", "orbit", "--samples", "21", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("t,v1,v2,v3,v4,u\n"));
    assert_eq!(text.lines().count(), 22);
    let o = hbproof(&["export", &path, "--what", "u-profile"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("tau,u\n"));
    assert_eq!(code(&hbproof(&["export", &path, "--kind", "spectrum"])), 4);
    assert_eq!(code(&hbproof(&["export", &path, "--kind", "orbit", "--entry", "3"])), 4);
}

pub fn cli_rejects_bad_input() {
    assert_eq!(code(&hbproof(&[])), 4);
    assert_eq!(code(&hbproof(&["prove", "--beta0", "x", "--beta1", "1"])), 4);
    assert_eq!(code(&hbproof(&["prove", "--beta0", "1.3", "--beta1", "1.2"])), 4);
    assert_eq!(code(&hbproof(&["prove", "--beta0", "1.2", "--beta1", "1.2", "--rho", "1.5"])), 4);
    assert_eq!(code(&hbproof(&["continue", "--from", "1.2", "--to", "1.3", "--jobs", "0"])), 4);
    assert_eq!(code(&hbproof(&["--help"])), 0);
    assert_eq!(code(&hbproof(&["--version"])), 0);
}

pub fn cli_prove_writes_a_verifiable_certificate_and_reports_failure() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.json");
    let o = hbproof(&["prove", "--beta0", "1.2", "--beta1", "1.2001", "--gamma", "0.866", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(summary["r"].as_f64().unwrap() > 0.0);
    assert_eq!(code(&hbproof(&["verify", out.to_str().unwrap()])), 0);

    let o = hbproof(&["prove", "--beta0", "1.2", "--beta1", "1.3", "--gamma", "0.866"]);
    assert_eq!(code(&o), 2);
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "proof_failure");
}

tests!(
    round_trip_is_bit_exact_and_verifies,
    single_bit_flips_are_rejected,
    tampered_values_fail_the_digest_or_the_bounds,
    non_canonical_text_is_rejected,
    export_orbit_matches_endpoint_identities,
    every_export_kind_writes_finite_data,
    cli_verify_accepts_and_rejects,
    cli_export_writes_csv,
    cli_rejects_bad_input,
    cli_prove_writes_a_verifiable_certificate_and_reports_failure,
);
