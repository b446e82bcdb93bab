//! Independent re-check of a certificate, and rejection of a tampered copy.
//!
//! With a path argument the certificate is read from that file.

use hbproof::cert::Certificate;
use hbproof::config::ProofConfig;
use hbproof::continuation::prove_interval;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cert = match std::env::args().nth(1) {
        Some(p) => Certificate::from_json(std::fs::read_to_string(p)?.trim_end())?,
        None => prove_interval(1.2, 1.20025, Some(0.866), &ProofConfig::default())?,
    };
    let rep = cert.verify()?;
    println!(
        "verified [{}, {}]: r_m = {:.3e}, r = {:.3e}, bounds reproduced: {}",
        rep.beta0, rep.beta1, rep.r_m, rep.r, rep.bounds_reproduced
    );

    let text = cert.to_json();
    let i = text.find("\"l0\":\"").expect("orbit length field") + 10;
    let mut tampered = text.into_bytes();
    tampered[i] ^= 1;
    match Certificate::from_json(std::str::from_utf8(&tampered)?) {
        Ok(_) => println!("tampered copy accepted"),
        Err(e) => println!("tampered copy rejected: {e}"),
    }
    Ok(())
}
