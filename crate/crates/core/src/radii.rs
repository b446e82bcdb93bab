//! Radii polynomials `p(r) = Y + (Z0 + Z1 - 1) r + Z2 r^2 + Z3 r^3`.

use crate::interval::Interval;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RadiiFailure {
    #[error("component {component}: no radius makes the polynomial negative")]
    NoRoot { component: usize },
    #[error("admissible radii do not overlap: need r > {lo:e} and r < {hi:e}")]
    Disjoint { lo: f64, hi: f64 },
    #[error("interval check of p(r) failed at every candidate radius")]
    Unverified,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadiiOutcome {
    /// Validated radius.
    pub r: f64,
    /// Upper end of the admissible range in floating point.
    pub r_max: f64,
    /// Enclosures of `p_j(r)`, all strictly negative.
    pub values: Vec<Interval>,
}

/// Polynomial coefficients `[Y, Z0 + Z1 - 1, Z2, Z3]` as intervals.
pub fn radii_coeffs(y: Interval, z0: Interval, z1: Interval, z2: Interval, z3: Interval) -> Vec<Interval> {
    vec![y, z0 + z1 - Interval::ONE, z2, z3]
}

/// Enclosure of `p(r)` by Horner's scheme.
pub fn eval_poly(coeffs: &[Interval], r: Interval) -> Interval {
    coeffs.iter().rev().fold(Interval::ZERO, |acc, c| acc * r + *c)
}

fn eval_upper(c: &[f64], r: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, x| acc * r + x)
}

/// Open range `(lo, hi)` on which the upper coefficient polynomial is negative.
fn negative_range(c: &[f64]) -> Option<(f64, f64)> {
    let c0 = c[0];
    let c1 = c[1];
    if !(c1 < 0.0) || !c.iter().all(|x| x.is_finite()) {
        return None;
    }
    if c0 <= 0.0 {
        return None;
    }
    let c2 = c.get(2).copied().unwrap_or(0.0);
    let c3 = c.get(3).copied().unwrap_or(0.0);
    // minimiser of the convex polynomial on r > 0
    let rstar = if c3 > 0.0 {
        let disc = c2 * c2 - 3.0 * c3 * c1;
        (-c2 + disc.sqrt()) / (3.0 * c3)
    } else if c2 > 0.0 {
        -c1 / (2.0 * c2)
    } else {
        f64::INFINITY
    };
    if rstar.is_infinite() {
        return Some((c0 / -c1, f64::INFINITY));
    }
    if !(eval_upper(c, rstar) < 0.0) {
        return None;
    }
    let mut a = 0.0;
    let mut b = rstar;
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if eval_upper(c, mid) < 0.0 {
            b = mid;
        } else {
            a = mid;
        }
    }
    let lo = b;
    let mut big = rstar.max(1e-300) * 2.0;
    while eval_upper(c, big) < 0.0 && big.is_finite() {
        big *= 2.0;
    }
    let (mut a, mut b) = (rstar, big);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if eval_upper(c, mid) < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    Some((lo, a))
}

/// Finds the smallest float radius (up to a tiny relative margin) at which
/// every polynomial is rigorously negative.
pub fn radii_check(polys: &[Vec<Interval>]) -> Result<RadiiOutcome, RadiiFailure> {
    let mut lo = 0.0f64;
    let mut hi = f64::INFINITY;
    for (j, p) in polys.iter().enumerate() {
        let upper: Vec<f64> = p.iter().map(|x| x.hi()).collect();
        let (l, h) = negative_range(&upper).ok_or(RadiiFailure::NoRoot { component: j })?;
        lo = lo.max(l);
        hi = hi.min(h);
    }
    if !(lo < hi) {
        return Err(RadiiFailure::Disjoint { lo, hi });
    }
    let far = if hi.is_finite() { (lo * hi).sqrt() } else { 2.0 * lo };
    let candidates = [
        lo * (1.0 + 1e-9),
        lo * (1.0 + 1e-6),
        lo * (1.0 + 1e-3),
        lo * 1.05,
        far,
    ];
    for r in candidates {
        if !(r > 0.0 && r < hi) {
            continue;
        }
        let ri = Interval::point(r);
        let values: Vec<Interval> = polys.iter().map(|p| eval_poly(p, ri)).collect();
        if values.iter().all(|v| v.is_negative()) {
            return Ok(RadiiOutcome { r, r_max: hi, values });
        }
    }
    Err(RadiiFailure::Unverified)
}
