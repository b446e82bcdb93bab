use std::fs;

use hbproof::config::ProofConfig;
use hbproof::continuation::{continue_chunked, continue_range, ContinuationConfig, ContinuationError, LedgerEntry, ProofLedger};
use proptest::prelude::*;

const GAMMA: f64 = 0.866;

fn short_run(a: f64, b: f64) -> ContinuationConfig {
    ContinuationConfig {
        gamma: Some(GAMMA),
        ..ContinuationConfig::new(a, b)
    }
}

#[test]
fn configuration_is_validated() {
    let good = short_run(1.2, 1.3);
    assert!(good.check().is_ok());
    let bad = [
        ContinuationConfig::new(1.3, 1.2),
        ContinuationConfig::new(1.2, 2.5),
        ContinuationConfig { dbeta: 1e-7, ..good.clone() },
        ContinuationConfig { min_dbeta: 0.0, ..good.clone() },
        ContinuationConfig { growth: 0.5, ..good.clone() },
        ContinuationConfig { max_retries: 0, ..good.clone() },
        ContinuationConfig { gamma: Some(-1.0), ..good.clone() },
        ContinuationConfig {
            proof: ProofConfig { rho: 1.5, ..ProofConfig::default() },
            ..good.clone()
        },
        ContinuationConfig {
            proof: ProofConfig { m: 2, ..ProofConfig::default() },
            ..good.clone()
        },
    ];
    for c in bad {
        assert!(matches!(c.check(), Err(ContinuationError::Config(_))), "{c:?}");
        assert!(matches!(continue_range(&c, None, false), Err(ContinuationError::Config(_))));
    }
}

#[test]
fn resumed_run_reproduces_the_ledger() {
    let dir = tempfile::tempdir().unwrap();
    let full = dir.path().join("full.jsonl");
    let cfg = short_run(1.2, 1.2005);
    let ledger = continue_range(&cfg, Some(&full), false).unwrap();
    assert_eq!(ledger.entries.len(), 2);
    assert_eq!(ledger.covered().unwrap(), (1.2, 1.2005));
    let text = fs::read_to_string(&full).unwrap();

    let partial = dir.path().join("partial.jsonl");
    fs::write(&partial, format!("{}\n", text.lines().next().unwrap())).unwrap();
    let resumed = continue_range(&cfg, Some(&partial), true).unwrap();
    assert_eq!(resumed.entries.len(), 2);
    assert_eq!(fs::read_to_string(&partial).unwrap(), text);

    // a complete ledger resumes to itself
    continue_range(&cfg, Some(&partial), true).unwrap();
    assert_eq!(fs::read_to_string(&partial).unwrap(), text);

    // resuming against a different range is refused
    let other = short_run(1.19, 1.2005);
    assert!(matches!(continue_range(&other, Some(&partial), true), Err(ContinuationError::Ledger(_))));

    for e in &ProofLedger::read(&full).unwrap().entries {
        e.certificate.verify().unwrap();
        assert!(e.next_dbeta().unwrap() <= cfg.dbeta);
    }
}

#[test]
fn tampered_ledger_lines_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("l.jsonl");
    let ledger = continue_range(&short_run(1.3, 1.30025), Some(&path), false).unwrap();
    let line = ledger.entries[0].to_line();
    assert_eq!(LedgerEntry::from_line(&line).unwrap(), ledger.entries[0]);
    let spaced = line.replacen(':', ": ", 1);
    assert!(LedgerEntry::from_line(&spaced).is_err());
    let i = line.find("\"r_m\":\"").unwrap() + 8;
    let mut bad = line.clone();
    let flipped = if &bad[i..i + 1] == "a" { "b" } else { "a" };
    bad.replace_range(i..i + 1, flipped);
    assert!(LedgerEntry::from_line(&bad).is_err());
    fs::write(&path, format!("{bad}\n")).unwrap();
    assert!(ProofLedger::read(&path).is_err());
}

#[test]
fn chunked_run_abuts_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.jsonl");
    let cfg = short_run(1.25, 1.2505);
    let ledger = continue_chunked(&cfg, 2, Some(&path), false).unwrap();
    assert_eq!(ledger.covered().unwrap(), (1.25, 1.2505));
    let ranges = ledger.ranges().unwrap();
    let cut = 1.25 + (1.2505 - 1.25) * 0.5;
    assert!(ranges.iter().any(|r| r.1 == cut));
    let back = ProofLedger::read(&path).unwrap();
    assert_eq!(back.entries, ledger.entries);
    assert!(!dir.path().join("c.jsonl.part0").exists());
}

#[test]
fn gaps_are_detected() {
    let dir = tempfile::tempdir().unwrap();
    let a = continue_range(&short_run(1.4, 1.40025), None, false).unwrap();
    let b = continue_range(&short_run(1.4003, 1.40055), None, false).unwrap();
    let joined = ProofLedger {
        entries: a.entries.iter().chain(&b.entries).cloned().collect(),
        timings: Vec::new(),
    };
    assert!(matches!(joined.covered(), Err(ContinuationError::Ledger(_))));
    assert!(matches!(ProofLedger::default().covered(), Err(ContinuationError::Ledger(_))));
    let path = dir.path().join("g.jsonl");
    joined.write(&path).unwrap();
    assert_eq!(ProofLedger::read(&path).unwrap().entries.len(), 2);
}

#[test]
fn oversized_steps_underflow() {
    let cfg = ContinuationConfig {
        dbeta: 0.1,
        min_dbeta: 0.05,
        max_retries: 1,
        ..short_run(1.2, 1.5)
    };
    match continue_range(&cfg, None, false) {
        Err(ContinuationError::StepUnderflow { beta, dbeta, .. }) => {
            assert_eq!(beta, 1.2);
            assert!(dbeta < 0.1);
        }
        other => panic!("expected underflow, got {:?}", other.map(|l| l.entries.len())),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn valid_ranges_pass_configuration_checks(a in -1.9f64..1.8, w in 1e-4f64..0.1, d in 1e-6f64..1e-2) {
        let cfg = ContinuationConfig { dbeta: d, ..ContinuationConfig::new(a, a + w) };
        prop_assert!(cfg.check().is_ok());
        let rev = ContinuationConfig::new(a + w, a);
        prop_assert!(rev.check().is_err());
    }
}
