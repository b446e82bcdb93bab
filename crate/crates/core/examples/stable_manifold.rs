//! Taylor coefficients of the stable manifold chart and a validated error
//! bound over a short parameter range.

use hbproof::manifold::{eval_real, lambda_f64, newton_solve, residual, validate_manifold_range};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let beta = 1.2;
    let order = 30;
    let gamma = 0.866;
    println!("stable eigenvalue at beta = {beta}: {}", lambda_f64(beta));

    let a = newton_solve(beta, order, gamma, None)?;
    let res = residual(beta, gamma, &a)
        .comps
        .iter()
        .flat_map(|c| c.data().iter().map(|z| z.norm()))
        .fold(0.0, f64::max);
    println!("coefficient residual after Newton: {res:.2e}");

    for psi in [0.0, 1.0, 2.0, 3.0] {
        let p = eval_real(&a, 0.895, psi);
        println!("P(psi = {psi}) = [{:+.6}, {:+.6}, {:+.6}, {:+.6}]", p[0], p[1], p[2], p[3]);
    }

    let proof = validate_manifold_range(beta, beta + 2.5e-4, order, gamma, 1.0)?;
    println!("chart error over [{beta}, {}] is at most {:.3e}", beta + 2.5e-4, proof.r());
    Ok(())
}
