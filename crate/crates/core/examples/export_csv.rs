//! CSV samples of a certified orbit and its chart.

use hbproof::config::ProofConfig;
use hbproof::continuation::prove_interval;
use hbproof::export::{export, ExportKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let kind: ExportKind = std::env::args().nth(1).as_deref().unwrap_or("orbit").parse()?;
    let cert = prove_interval(1.2, 1.20025, Some(0.866), &ProofConfig::default())?;
    let d = cert.decode()?;
    export(kind, &d.x0, &d.a0, 21, std::io::stdout().lock())?;
    Ok(())
}
