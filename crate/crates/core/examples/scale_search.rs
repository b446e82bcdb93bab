//! Largest eigenvector scale for which the chart proof stays contractive.

use hbproof::manifold::maximize_gamma;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for beta in [0.5, 1.2] {
        let (gamma, eta) = maximize_gamma(beta, 30, 1.0, 0.5)?;
        println!("beta = {beta}: gamma = {gamma:.5} (contraction target {eta})");
    }
    Ok(())
}
