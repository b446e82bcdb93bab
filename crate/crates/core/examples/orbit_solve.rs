//! Approximate symmetric homoclinic orbit by shooting and Chebyshev Newton.

use hbproof::bvp::{diagnostics, solve_orbit, Chart};
use hbproof::manifold::newton_solve;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let beta: f64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(1.2);
    let a = newton_solve(beta, 30, 0.866, None)?;
    let chart = Chart { coeffs: &a, rho: 0.895 };
    let orbit = solve_orbit(beta, 350, &chart)?;
    let d = diagnostics(beta, &orbit, &chart, 256);
    println!("beta = {beta}: L = {:.6}, psi = {:.6}", orbit.l, orbit.psi);
    println!("ODE residual {:.2e}, boundary {:.2e}, symmetry {:.2e} {:.2e}", d.ode_residual, d.boundary, d.symmetry[0], d.symmetry[1]);
    for t in [-1.0, -0.5, 0.0, 0.5, 1.0] {
        println!("u({t:+.1}) = {:+.6}", orbit.u(t)?);
    }
    Ok(())
}
