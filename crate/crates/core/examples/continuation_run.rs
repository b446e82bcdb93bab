//! Short continuation with a JSON-lines ledger that can be resumed.

use hbproof::continuation::{continue_range, ContinuationConfig, ProofLedger};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let path = dir.path().join("ledger.jsonl");
    let cfg = ContinuationConfig {
        gamma: Some(0.866),
        ..ContinuationConfig::new(1.2, 1.201)
    };
    let ledger = continue_range(&cfg, Some(&path), false)?;
    for ((a, b), t) in ledger.ranges()?.iter().zip(&ledger.timings) {
        println!("[{a:.6}, {b:.6}] in {:.1} s", t.as_secs_f64());
    }
    let back = ProofLedger::read(&path)?;
    let (lo, hi) = back.covered()?;
    println!("{} certificates cover [{lo}, {hi}] without gaps", back.entries.len());
    Ok(())
}
