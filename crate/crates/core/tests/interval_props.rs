use hbproof::interval::{f64_from_hex, f64_to_hex, CInterval, Interval};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

#[macro_use]
#[path = "common/mod.rs"]
mod common;

const CASES: usize = 100_000;
const MONO_CASES: usize = 10_000;

fn rand_interval(rng: &mut StdRng, lo: f64, hi: f64) -> Interval {
    let a = rng.random_range(lo..hi);
    let w = if rng.random_bool(0.1) {
        0.0
    } else {
        10f64.powf(rng.random_range(-12.0..0.5))
    };
    Interval::new(a, (a + w).min(hi.max(a))).unwrap()
}

fn member(rng: &mut StdRng, x: Interval) -> f64 {
    match rng.random_range(0..4) {
        0 => x.lo(),
        1 => x.hi(),
        _ => (x.lo() + rng.random::<f64>() * (x.hi() - x.lo())).clamp(x.lo(), x.hi()),
    }
}

/// Exact value `s + e` lies in `x`, where `e` is the (exact) rounding error of `s`.
fn holds(x: Interval, s: f64, e: f64) -> bool {
    let lo_ok = x.lo() < s || (x.lo() == s && e >= 0.0);
    let hi_ok = s < x.hi() || (s == x.hi() && e <= 0.0);
    lo_ok && hi_ok
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn check_binary(name: &str, seed: u64, op: impl Fn(Interval, Interval) -> Option<Interval>, exact: impl Fn(f64, f64) -> (f64, f64)) {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut n = 0;
    while n < CASES {
        let x = rand_interval(&mut rng, -1e3, 1e3);
        let y = rand_interval(&mut rng, -1e3, 1e3);
        let Some(z) = op(x, y) else { continue };
        let (a, b) = (member(&mut rng, x), member(&mut rng, y));
        let (s, e) = exact(a, b);
        assert!(holds(z, s, e), "{name}: {a} op {b} = {s} + {e} not in {z:?}");
        n += 1;
    }
}

pub fn addition_contains_exact_sums() {
    check_binary("add", 1, |x, y| Some(x + y), two_sum);
}

pub fn subtraction_contains_exact_differences() {
    check_binary("sub", 2, |x, y| Some(x - y), |a, b| two_sum(a, -b));
}

pub fn multiplication_contains_exact_products() {
    check_binary("mul", 3, |x, y| Some(x * y), |a, b| {
        let p = a * b;
        (p, a.mul_add(b, -p))
    });
}

pub fn division_contains_exact_quotients() {
    check_binary("div", 4, |x, y| x.try_div(y).ok(), |a, b| {
        let q = a / b;
        // a - q b is exact; the true quotient is q + (a - q b) / b
        let r = (-q).mul_add(b, a);
        (q, r * b.signum())
    });
}

pub fn division_by_zero_containing_interval_is_refused() {
    let x = Interval::new(1.0, 2.0).unwrap();
    assert!(x.try_div(Interval::new(-1.0, 1.0).unwrap()).is_err());
    assert!(x.recip().is_ok());
}

pub fn sqrt_contains_exact_roots() {
    let mut rng = StdRng::seed_from_u64(5);
    for _ in 0..CASES {
        let x = rand_interval(&mut rng, 0.0, 1e6);
        let z = x.sqrt().unwrap();
        let a = member(&mut rng, x);
        let s = a.sqrt();
        // sign of a - s^2 is the sign of the correction
        let r = (-s).mul_add(s, a);
        assert!(holds(z, s, r), "sqrt({a})");
    }
}

pub fn square_and_powers_contain_products() {
    let mut rng = StdRng::seed_from_u64(6);
    for _ in 0..CASES {
        let x = rand_interval(&mut rng, -4.0, 4.0);
        let a = member(&mut rng, x);
        let p = a * a;
        assert!(holds(x.sqr(), p, a.mul_add(a, -p)), "sqr({a})");
        let n = rng.random_range(0..7u32);
        let v = a.powi(n as i32);
        // correctly rounded products stay within 8 ulp for n < 7
        let pad = 8.0 * f64::EPSILON * v.abs();
        let z = x.powi(n);
        assert!(z.lo() <= v + pad && v - pad <= z.hi(), "powi({a}, {n})");
    }
}

fn check_unary(name: &str, seed: u64, lo: f64, hi: f64, op: impl Fn(Interval) -> Interval, f: impl Fn(f64) -> f64) {
    let mut rng = StdRng::seed_from_u64(seed);
    for _ in 0..CASES {
        let x = rand_interval(&mut rng, lo, hi);
        let a = member(&mut rng, x);
        let z = op(x);
        let v = f(a);
        assert!(z.contains(v), "{name}({a}) = {v} not in {z:?}");
    }
}

pub fn exp_contains_sampled_values() {
    check_unary("exp", 7, -50.0, 50.0, |x| x.exp(), f64::exp);
}

pub fn ln_contains_sampled_values() {
    check_unary("ln", 8, 1e-9, 1e6, |x| x.ln().unwrap(), f64::ln);
}

pub fn cos_contains_sampled_values() {
    check_unary("cos", 9, -40.0, 40.0, |x| x.cos(), f64::cos);
}

pub fn sin_contains_sampled_values() {
    check_unary("sin", 10, -40.0, 40.0, |x| x.sin(), f64::sin);
}

pub fn abs_and_neg_contain_sampled_values() {
    check_unary("abs", 11, -10.0, 10.0, |x| x.abs(), f64::abs);
    check_unary("neg", 12, -10.0, 10.0, |x| -x, |a| -a);
}

pub fn elementary_functions_enclose_high_precision_values() {
    let text = include_str!("data/elementary_oracle.csv");
    let mut count = 0;
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let x = f64_from_hex(f[1]).unwrap();
        let lo = f64_from_hex(f[2]).unwrap();
        let hi = f64_from_hex(f[3]).unwrap();
        let p = Interval::point(x);
        let z = match f[0] {
            "exp" => p.exp(),
            "ln" => p.ln().unwrap(),
            "sin" => p.sin(),
            "cos" => p.cos(),
            "sqrt" => p.sqrt().unwrap(),
            other => panic!("unknown function {other}"),
        };
        // the exact value lies in [lo, hi], so both must be covered
        assert!(z.lo() <= lo && hi <= z.hi(), "{}({x}): [{lo}, {hi}] not in {z:?}", f[0]);
        count += 1;
    }
    assert_eq!(count, 2000);
}

fn sub_interval(rng: &mut StdRng, x: Interval) -> Interval {
    let a = member(rng, x);
    let b = member(rng, x);
    Interval::new(a.min(b), a.max(b)).unwrap()
}

pub fn inclusion_monotonicity() {
    let mut rng = StdRng::seed_from_u64(13);
    for _ in 0..MONO_CASES {
        let x = rand_interval(&mut rng, -5.0, 5.0);
        let y = rand_interval(&mut rng, 0.5, 5.0);
        let (xs, ys) = (sub_interval(&mut rng, x), sub_interval(&mut rng, y));
        let pos = Interval::new(x.lo().abs() + 1e-3, x.hi().abs() + x.lo().abs() + 1e-3).unwrap();
        let ps = sub_interval(&mut rng, pos);
        let pairs = [
            (xs + ys, x + y),
            (xs - ys, x - y),
            (xs * ys, x * y),
            (xs.try_div(ys).unwrap(), x.try_div(y).unwrap()),
            (xs.sqr(), x.sqr()),
            (xs.powi(3), x.powi(3)),
            (xs.exp(), x.exp()),
            (xs.cos(), x.cos()),
            (xs.sin(), x.sin()),
            (xs.abs(), x.abs()),
            (ps.ln().unwrap(), pos.ln().unwrap()),
            (ps.sqrt().unwrap(), pos.sqrt().unwrap()),
        ];
        for (k, (inner, outer)) in pairs.iter().enumerate() {
            assert!(outer.encloses(*inner), "op {k}: {inner:?} not in {outer:?}");
        }
    }
}

pub fn complex_products_contain_sampled_products() {
    let mut rng = StdRng::seed_from_u64(14);
    for _ in 0..CASES / 10 {
        let z: Vec<CInterval> = (0..2)
            .map(|_| CInterval::new(rand_interval(&mut rng, -3.0, 3.0), rand_interval(&mut rng, -3.0, 3.0)))
            .collect();
        let p = Complex64::new(member(&mut rng, z[0].re), member(&mut rng, z[0].im));
        let q = Complex64::new(member(&mut rng, z[1].re), member(&mut rng, z[1].im));
        let w = p * q;
        let pad = 4.0 * f64::EPSILON * (p.norm() * q.norm());
        let e = z[0] * z[1];
        assert!(e.re.lo() <= w.re + pad && w.re - pad <= e.re.hi());
        assert!(e.im.lo() <= w.im + pad && w.im - pad <= e.im.hi());
        assert!(e.abs().hi() >= w.norm() * (1.0 - 4.0 * f64::EPSILON));
    }
}

pub fn pi_is_enclosed() {
    let p = Interval::pi();
    assert!(p.lo() <= std::f64::consts::PI && p.hi() > std::f64::consts::PI);
    assert!((p.hi() - p.lo()) <= 2.0 * f64::EPSILON * 4.0);
}

proptest! {
    #[test]
    fn hex_round_trip_is_bit_exact(bits in any::<u64>()) {
        let x = f64::from_bits(bits);
        let back = f64_from_hex(&f64_to_hex(x)).unwrap();
        prop_assert_eq!(back.to_bits(), bits);
    }

    #[test]
    fn uppercase_hex_is_rejected(bits in any::<u64>()) {
        let s = f64_to_hex(f64::from_bits(bits)).to_uppercase();
        prop_assert_eq!(f64_from_hex(&s).is_ok(), s.bytes().all(|b| b.is_ascii_digit()));
    }

    #[test]
    fn hull_encloses_both(a in -1e6f64..1e6, b in -1e6f64..1e6, w in 0.0f64..10.0) {
        let x = Interval::new(a, a + w).unwrap();
        let y = Interval::point(b);
        let h = x.hull(y);
        prop_assert!(h.encloses(x) && h.encloses(y));
    }

    #[test]
    fn ball_contains_its_centre(mid in -1e9f64..1e9, rad in 0.0f64..1e3) {
        let b = Interval::ball(mid, rad);
        prop_assert!(b.contains(mid) && b.rad() >= rad);
    }

    #[test]
    fn cis_has_unit_modulus(psi in -10.0f64..10.0) {
        let z = CInterval::cis(Interval::point(psi));
        prop_assert!(z.norm_sqr().contains(1.0));
    }
}

tests!(
    addition_contains_exact_sums,
    subtraction_contains_exact_differences,
    multiplication_contains_exact_products,
    division_contains_exact_quotients,
    division_by_zero_containing_interval_is_refused,
    sqrt_contains_exact_roots,
    square_and_powers_contain_products,
    exp_contains_sampled_values,
    ln_contains_sampled_values,
    cos_contains_sampled_values,
    sin_contains_sampled_values,
    abs_and_neg_contain_sampled_values,
    elementary_functions_enclose_high_precision_values,
    inclusion_monotonicity,
    complex_products_contain_sampled_products,
    pi_is_enclosed,
);
