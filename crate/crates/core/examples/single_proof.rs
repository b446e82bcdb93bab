//! Proof over one parameter range with a fixed eigenvector scale.

use hbproof::config::ProofConfig;
use hbproof::continuation::prove_interval;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ProofConfig::default();
    let cert = prove_interval(1.2, 1.20025, Some(0.866), &cfg)?;
    let d = cert.decode()?;
    println!("certified [{}, {}]", d.beta0, d.beta1);
    println!("chart error r_m = {:.3e}", d.r_m);
    println!("orbit error r   = {:.3e}", d.r);
    println!("L in [{:.8}, {:.8}]", d.x0.l - d.r, d.x0.l + d.r);
    Ok(())
}
