//! Weighted l1 norms, convolutions and the operator norm of a finite matrix.

use hbproof::interval::Interval;
use hbproof::seq::{cheb_conv, cheb_norm, opnorm_cheb_bound, qk_estimates};

fn main() {
    let nu = Interval::point(1.05);
    let a: Vec<Interval> = (0..20).map(|k| Interval::point(0.5f64.powi(k))).collect();
    let b: Vec<Interval> = (0..20).map(|k| Interval::point((-0.3f64).powi(k))).collect();

    let ab = cheb_conv(&a, &b);
    let lhs = cheb_norm(&ab, nu);
    let rhs = cheb_norm(&a, nu) * cheb_norm(&b, nu);
    println!("||a * b|| = {lhs}");
    println!("||a|| ||b|| = {rhs}");

    let n = 8;
    let mat = |r: usize, c: usize| if r == c { 1.0 } else { 0.1 / (1.0 + r.abs_diff(c) as f64) };
    let bound = opnorm_cheb_bound(n, nu, 0.0625, mat);
    println!("operator norm of an {n}x{n} block with tail 1/16: {bound:.6}");

    let (q, qhat) = qk_estimates(&a, nu, 10, 12);
    for k in [0, 1, 5, 10] {
        println!("k = {k:2}: sup |(a * v)_k| <= {:.4e}, tail-only {:.4e}", q[k], qhat[k]);
    }
}
