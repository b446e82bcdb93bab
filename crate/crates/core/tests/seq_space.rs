use hbproof::interval::{CInterval, Interval};
use hbproof::seq::{
    cheb_conv, cheb_dual_bound, cheb_dual_norm, cheb_norm, cheb_norm_bound, cheb_norm_f64, opnorm_cheb_bound,
    opnorm_taylor_bound, qk_estimates, taylor_norm, tri_count, tri_degrees, tri_index, tri_indices, tri_multi,
    Taylor2Seq,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

#[macro_use]
#[path = "common/mod.rs"]
mod common;

fn decaying(rng: &mut StdRng, n: usize, rate: f64) -> Vec<f64> {
    (0..n).map(|k| rng.random_range(-1.0..1.0) * rate.powi(k as i32)).collect()
}

fn ivs(x: &[f64]) -> Vec<Interval> {
    x.iter().map(|v| Interval::point(*v)).collect()
}

/// Direct sum over all signed index pairs of the cosine convolution.
fn conv_oracle(a: &[f64], b: &[f64], k: usize) -> f64 {
    let at = |y: &[f64], i: i64| y.get(i.unsigned_abs() as usize).copied().unwrap_or(0.0);
    let lim = (a.len() + b.len()) as i64;
    (-lim..=lim).map(|k1| at(a, k1) * at(b, k as i64 - k1)).sum()
}

fn rand_taylor(rng: &mut StdRng, order: usize, rate: f64) -> Taylor2Seq<CInterval> {
    let data = tri_indices(order)
        .map(|(a1, a2)| {
            let s = rate.powi((a1 + a2) as i32);
            CInterval::point(Complex64::new(rng.random_range(-s..s), rng.random_range(-s..s)))
        })
        .collect();
    Taylor2Seq::from_vec(order, data)
}

pub fn chebyshev_convolution_is_submultiplicative() {
    let mut rng = StdRng::seed_from_u64(21);
    let nu = Interval::point(1.05);
    for _ in 0..1000 {
        let (na, nb) = (rng.random_range(1..40), rng.random_range(1..40));
        let a = ivs(&decaying(&mut rng, na, 0.9));
        let b = ivs(&decaying(&mut rng, nb, 0.8));
        let lhs = cheb_norm(&cheb_conv(&a, &b), nu);
        let rhs = cheb_norm(&a, nu) * cheb_norm(&b, nu);
        assert!(lhs.lo() <= rhs.hi(), "{lhs:?} > {rhs:?}");
    }
}

pub fn taylor_cauchy_product_is_submultiplicative() {
    let mut rng = StdRng::seed_from_u64(22);
    for _ in 0..1000 {
        let order = rng.random_range(2..12);
        let nu = Interval::point(rng.random_range(0.5..1.5));
        let a = rand_taylor(&mut rng, order, 0.7);
        let b = rand_taylor(&mut rng, order, 0.9);
        let full = a.cauchy(&b, 2 * order - 1);
        let lhs = taylor_norm(&full, nu);
        let rhs = taylor_norm(&a, nu) * taylor_norm(&b, nu);
        assert!(lhs.lo() <= rhs.hi(), "{lhs:?} > {rhs:?}");
    }
}

pub fn chebyshev_convolution_matches_direct_sum() {
    let mut rng = StdRng::seed_from_u64(23);
    for _ in 0..200 {
        let (na, nb) = (rng.random_range(1..20), rng.random_range(1..20));
        let a = decaying(&mut rng, na, 0.9);
        let b = decaying(&mut rng, nb, 0.9);
        let c = cheb_conv(&a, &b);
        assert_eq!(c.len(), a.len() + b.len() - 1);
        for (k, v) in c.iter().enumerate() {
            assert!((v - conv_oracle(&a, &b, k)).abs() <= 1e-14);
        }
    }
}

pub fn cauchy_product_matches_brute_force() {
    let mut rng = StdRng::seed_from_u64(24);
    let order = 7;
    let a = rand_taylor(&mut rng, order, 1.0).map(|z| z.mid());
    let b = rand_taylor(&mut rng, order, 1.0).map(|z| z.mid());
    let c = a.cauchy(&b, order);
    for (a1, a2) in tri_indices(order) {
        let mut s = Complex64::new(0.0, 0.0);
        for s1 in 0..=a1 {
            for s2 in 0..=a2 {
                s += a.get(s1, s2) * b.get(a1 - s1, a2 - s2);
            }
        }
        assert!((c.get(a1, a2) - s).norm() <= 1e-14, "({a1},{a2})");
    }
}

fn brute_opnorm(mat: &[Vec<f64>], w: &[f64], tail: f64) -> f64 {
    let n = w.len();
    (0..n)
        .map(|c| (0..n).map(|r| mat[r][c].abs() * w[r]).sum::<f64>() / w[c])
        .fold(tail, f64::max)
}

pub fn chebyshev_operator_norm_matches_column_maximum() {
    let mut rng = StdRng::seed_from_u64(25);
    for _ in 0..50 {
        let n = rng.random_range(1..30);
        let nu: f64 = rng.random_range(1.0..1.3);
        let mat: Vec<Vec<f64>> = (0..n).map(|_| decaying(&mut rng, n, 0.95)).collect();
        let w: Vec<f64> = (0..n).map(|k| if k == 0 { 1.0 } else { 2.0 * nu.powi(k as i32) }).collect();
        let tail = rng.random_range(0.0..0.5);
        let exact = brute_opnorm(&mat, &w, tail);
        let bound = opnorm_cheb_bound(n, Interval::point(nu), tail, |r, c| mat[r][c].abs());
        assert!(bound >= exact && (bound - exact) <= 1e-12 * exact, "{bound} vs {exact}");
    }
}

pub fn taylor_operator_norm_matches_column_maximum() {
    let mut rng = StdRng::seed_from_u64(26);
    for _ in 0..30 {
        let order = rng.random_range(1..9);
        let n = tri_count(order);
        let nu: f64 = rng.random_range(0.6..1.4);
        let degs = tri_degrees(order);
        let mat: Vec<Vec<f64>> = (0..n).map(|_| decaying(&mut rng, n, 0.97)).collect();
        let w: Vec<f64> = degs.iter().map(|d| nu.powi(*d as i32)).collect();
        let exact = brute_opnorm(&mat, &w, 0.0);
        let bound = opnorm_taylor_bound(order, Interval::point(nu), 0.0, |r, c| mat[r][c].abs());
        assert!(bound >= exact && (bound - exact) <= 1e-12 * exact, "{bound} vs {exact}");
    }
}

pub fn functional_and_vector_norms_match_direct_formulas() {
    let mut rng = StdRng::seed_from_u64(27);
    for _ in 0..100 {
        let n = rng.random_range(1..40);
        let nu: f64 = rng.random_range(1.0..1.2);
        let c = decaying(&mut rng, n, 1.02);
        let dual = c
            .iter()
            .enumerate()
            .map(|(k, v)| if k == 0 { v.abs() } else { v.abs() / (2.0 * nu.powi(k as i32)) })
            .fold(0.0, f64::max);
        let b = cheb_dual_bound(n, Interval::point(nu), |k| c[k].abs());
        assert!(b >= dual && b - dual <= 1e-12 * dual.max(1e-300));
        assert!(cheb_dual_norm(&ivs(&c), Interval::point(nu)).contains(dual) || (b - dual).abs() <= 1e-12 * dual);
        // the functional attains its norm on a scaled basis vector
        let k = (0..n)
            .max_by(|&i, &j| {
                let f = |k: usize| if k == 0 { c[0].abs() } else { c[k].abs() / (2.0 * nu.powi(k as i32)) };
                f(i).total_cmp(&f(j))
            })
            .unwrap();
        let wk = if k == 0 { 1.0 } else { 2.0 * nu.powi(k as i32) };
        assert!(((c[k] / wk).abs() - dual).abs() <= 1e-14 * dual.max(1e-300));
        let norm = cheb_norm_f64(&c, nu);
        let nb = cheb_norm_bound(n, Interval::point(nu), |k| c[k].abs());
        assert!(nb >= norm && nb - norm <= 1e-12 * norm);
    }
}

pub fn q_bounds_dominate_sampled_convolutions() {
    let mut rng = StdRng::seed_from_u64(28);
    let nu = 1.05;
    let m = 20;
    let kmax = 25;
    for trial in 0..1000 {
        let na = rng.random_range(2..30);
        let a = decaying(&mut rng, na, 0.85);
        let (q, qh) = qk_estimates(&ivs(&a), Interval::point(nu), m, kmax);
        let v: Vec<f64> = if trial % 2 == 0 {
            // scaled basis vector of unit norm
            let j = rng.random_range(0..60);
            let mut v = vec![0.0; j + 1];
            v[j] = if j == 0 { 1.0 } else { 1.0 / (2.0 * nu.powi(j as i32)) };
            v
        } else {
            let len = rng.random_range(1..60);
            let mut v: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
            let s = cheb_norm_f64(&v, nu);
            v.iter_mut().for_each(|x| *x /= s);
            v
        };
        let tail_only = v.iter().take(m).all(|x| *x == 0.0);
        for k in 0..=kmax {
            let c = conv_oracle(&a, &v, k).abs();
            assert!(c <= q[k] * (1.0 + 1e-12), "k = {k}: {c} > {}", q[k]);
            if tail_only {
                assert!(c <= qh[k] * (1.0 + 1e-12), "k = {k}: {c} > hat {}", qh[k]);
            }
        }
    }
}

proptest! {
    #[test]
    fn tri_index_round_trips(idx in 0usize..100_000) {
        let (a1, a2) = tri_multi(idx);
        prop_assert_eq!(tri_index(a1, a2), idx);
    }

    #[test]
    fn chebyshev_norm_is_subadditive(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let nu = Interval::point(1.1);
        let a = ivs(&decaying(&mut rng, 15, 0.9));
        let b = ivs(&decaying(&mut rng, 15, 0.9));
        let s: Vec<Interval> = a.iter().zip(&b).map(|(x, y)| *x + *y).collect();
        prop_assert!(cheb_norm(&s, nu).lo() <= (cheb_norm(&a, nu) + cheb_norm(&b, nu)).hi());
    }

    #[test]
    fn cauchy_product_commutes(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let a = rand_taylor(&mut rng, 6, 1.0).map(|z| z.mid());
        let b = rand_taylor(&mut rng, 6, 1.0).map(|z| z.mid());
        let (ab, ba) = (a.cauchy(&b, 11), b.cauchy(&a, 11));
        for (x, y) in ab.data().iter().zip(ba.data()) {
            prop_assert!((x - y).norm() <= 1e-13);
        }
    }
}

tests!(
    chebyshev_convolution_is_submultiplicative,
    taylor_cauchy_product_is_submultiplicative,
    chebyshev_convolution_matches_direct_sum,
    cauchy_product_matches_brute_force,
    chebyshev_operator_norm_matches_column_maximum,
    taylor_operator_norm_matches_column_maximum,
    functional_and_vector_norms_match_direct_formulas,
    q_bounds_dominate_sampled_convolutions,
);
