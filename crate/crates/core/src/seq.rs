//! Weighted sequence spaces: two-variable Taylor coefficients with the
//! `l1` weight `nu^|alpha|`, and cosine (Chebyshev) coefficients with the
//! weights `1, 2 nu, 2 nu^2, ...`.
//!
//! Functions named `*_bound` return rigorous upper bounds as plain floats,
//! built from [`add_up`] and [`mul_up`].

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::interval::{add_up, mul_up, CInterval, Interval};

/// Coefficient ring for sequence products.
pub trait Scalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn zero() -> Self;
    fn from_f64(x: f64) -> Self;
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }

    fn zero() -> Self {
        0.0
    }
}

impl Scalar for Complex64 {
    fn from_f64(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
}

impl Scalar for Interval {
    fn from_f64(x: f64) -> Self {
        Interval::point(x)
    }

    fn zero() -> Self {
        Interval::ZERO
    }
}

impl Scalar for CInterval {
    fn from_f64(x: f64) -> Self {
        CInterval::point(Complex64::new(x, 0.0))
    }

    fn zero() -> Self {
        CInterval::ZERO
    }
}

/// Position of `(a1, a2)` in degree-major order, `a2` increasing within a degree.
#[inline]
pub fn tri_index(a1: usize, a2: usize) -> usize {
    let d = a1 + a2;
    d * (d + 1) / 2 + a2
}

/// Number of multi-indices with `|alpha| < order`.
#[inline]
pub fn tri_count(order: usize) -> usize {
    order * (order + 1) / 2
}

/// Inverse of [`tri_index`].
pub fn tri_multi(idx: usize) -> (usize, usize) {
    let mut d = ((((8 * idx + 1) as f64).sqrt() - 1.0) / 2.0) as usize;
    while tri_count(d + 1) <= idx {
        d += 1;
    }
    while tri_count(d) > idx {
        d -= 1;
    }
    let a2 = idx - tri_count(d);
    (d - a2, a2)
}

/// All multi-indices with `|alpha| < order`, in storage order.
pub fn tri_indices(order: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..order).flat_map(|d| (0..=d).map(move |a2| (d - a2, a2)))
}

/// Degree `|alpha|` of every stored slot.
pub fn tri_degrees(order: usize) -> Vec<usize> {
    tri_indices(order).map(|(a, b)| a + b).collect()
}

/// Coefficients `a_alpha` for `|alpha| < order`.
#[derive(Clone, Debug, PartialEq)]
pub struct Taylor2Seq<T> {
    order: usize,
    data: Vec<T>,
}

impl<T: Scalar> Taylor2Seq<T> {
    pub fn zeros(order: usize) -> Self {
        Taylor2Seq {
            order,
            data: vec![T::zero(); tri_count(order)],
        }
    }

    pub fn from_vec(order: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), tri_count(order), "length does not match order");
        Taylor2Seq { order, data }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    /// Zero outside the stored range.
    pub fn get(&self, a1: usize, a2: usize) -> T {
        if a1 + a2 < self.order {
            self.data[tri_index(a1, a2)]
        } else {
            T::zero()
        }
    }

    pub fn set(&mut self, a1: usize, a2: usize, v: T) {
        self.data[tri_index(a1, a2)] = v;
    }

    /// Truncates or zero-pads to `order`.
    pub fn resized(&self, order: usize) -> Self {
        let mut data = self.data.clone();
        data.resize(tri_count(order), T::zero());
        Taylor2Seq { order, data }
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> Taylor2Seq<U> {
        Taylor2Seq {
            order: self.order,
            data: self.data.iter().map(|x| f(*x)).collect(),
        }
    }

    /// Cauchy product `(a * b)_alpha = sum_{sigma <= alpha} a_sigma b_{alpha - sigma}`,
    /// kept for `|alpha| < out_order`.
    pub fn cauchy(&self, other: &Self, out_order: usize) -> Self {
        let mut out = Taylor2Seq::zeros(out_order);
        for (i, &(s1, s2)) in tri_list(self.order).iter().enumerate() {
            let a = self.data[i];
            let room = out_order.saturating_sub(s1 + s2);
            let lim = room.min(other.order);
            for (j, &(t1, t2)) in tri_list(lim).iter().enumerate() {
                let idx = tri_index(s1 + t1, s2 + t2);
                out.data[idx] = out.data[idx] + a * other.data[j];
            }
        }
        out
    }
}

fn tri_list(order: usize) -> Vec<(usize, usize)> {
    tri_indices(order).collect()
}

impl<T: Scalar> Add for &Taylor2Seq<T> {
    type Output = Taylor2Seq<T>;
    fn add(self, rhs: &Taylor2Seq<T>) -> Taylor2Seq<T> {
        let order = self.order.max(rhs.order);
        let (a, b) = (self.resized(order), rhs.resized(order));
        Taylor2Seq {
            order,
            data: a.data.iter().zip(&b.data).map(|(x, y)| *x + *y).collect(),
        }
    }
}

impl<T: Scalar> Sub for &Taylor2Seq<T> {
    type Output = Taylor2Seq<T>;
    fn sub(self, rhs: &Taylor2Seq<T>) -> Taylor2Seq<T> {
        let order = self.order.max(rhs.order);
        let (a, b) = (self.resized(order), rhs.resized(order));
        Taylor2Seq {
            order,
            data: a.data.iter().zip(&b.data).map(|(x, y)| *x - *y).collect(),
        }
    }
}

/// `[nu^0, nu^1, ..., nu^(n-1)]`.
pub fn powers(nu: Interval, n: usize) -> Vec<Interval> {
    let mut out = Vec::with_capacity(n);
    let mut p = Interval::ONE;
    for _ in 0..n {
        out.push(p);
        p = p * nu;
    }
    out
}

/// `sum |a_alpha| nu^|alpha|`.
pub fn taylor_norm(a: &Taylor2Seq<CInterval>, nu: Interval) -> Interval {
    let pw = powers(nu, a.order().max(1));
    tri_indices(a.order())
        .zip(a.data())
        .map(|((a1, a2), z)| z.abs() * pw[a1 + a2])
        .sum()
}

/// Floating point version of [`taylor_norm`] for diagnostics.
pub fn taylor_norm_f64(a: &Taylor2Seq<Complex64>, nu: f64) -> f64 {
    tri_indices(a.order())
        .zip(a.data())
        .map(|((a1, a2), z)| z.norm() * nu.powi((a1 + a2) as i32))
        .sum()
}

/// Upper bound of the weighted `l1` operator norm of a finite block acting on
/// Taylor coefficients of order `order`, combined with a diagonal tail whose
/// entries are bounded by `tail`.
///
/// `mag(row, col)` must return an upper bound on the modulus of each entry.
pub fn opnorm_taylor_bound(
    order: usize,
    nu: Interval,
    tail: f64,
    mag: impl Fn(usize, usize) -> f64,
) -> f64 {
    let degs = tri_degrees(order);
    let wup: Vec<f64> = powers(nu, order).iter().map(|p| p.hi()).collect();
    let inv = Interval::ONE / nu;
    let winv: Vec<f64> = powers(inv, order).iter().map(|p| p.hi()).collect();
    let n = degs.len();
    let mut best = tail;
    for c in 0..n {
        let mut s = 0.0;
        for r in 0..n {
            let m = mag(r, c);
            if m != 0.0 {
                s = add_up(s, mul_up(m, wup[degs[r]]));
            }
        }
        best = best.max(mul_up(s, winv[degs[c]]));
    }
    best
}

/// Cosine-series convolution `(a * b)_k = sum_{k1 + k2 = k} a_|k1| b_|k2|`,
/// full length `a.len() + b.len() - 1`.
pub fn cheb_conv<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let (la, lb) = (a.len() as isize, b.len() as isize);
    let n = (la + lb - 1) as usize;
    let mut out = vec![T::zero(); n];
    for (k, slot) in out.iter_mut().enumerate() {
        let k = k as isize;
        let mut acc = T::zero();
        let lo = (k - lb + 1).max(-(la - 1));
        let hi = (k + lb - 1).min(la - 1);
        for k1 in lo..=hi {
            let k2 = (k - k1).unsigned_abs();
            if (k2 as isize) < lb {
                acc = acc + a[k1.unsigned_abs()] * b[k2];
            }
        }
        *slot = acc;
    }
    out
}

/// `omega_0 = 1`, `omega_k = 2 nu^k`.
pub fn cheb_weights(n: usize, nu: Interval) -> Vec<Interval> {
    let mut w = powers(nu, n);
    for x in w.iter_mut().skip(1) {
        *x = *x * 2.0;
    }
    w
}

/// `|x_0| + 2 sum |x_k| nu^k`.
pub fn cheb_norm(x: &[Interval], nu: Interval) -> Interval {
    let w = cheb_weights(x.len(), nu);
    x.iter().zip(&w).map(|(a, w)| a.abs() * *w).sum()
}

pub fn cheb_norm_f64(x: &[f64], nu: f64) -> f64 {
    x.iter()
        .enumerate()
        .map(|(k, v)| if k == 0 { v.abs() } else { 2.0 * v.abs() * nu.powi(k as i32) })
        .sum()
}

/// Norm of the functional `x -> sum c_k x_k` on the cosine space:
/// `max(|c_0|, sup_k |c_k| / (2 nu^k))`.
pub fn cheb_dual_norm(c: &[Interval], nu: Interval) -> Interval {
    let inv = Interval::ONE / nu;
    let p = powers(inv, c.len());
    let mut best = c.first().map(|x| x.abs()).unwrap_or(Interval::ZERO);
    for k in 1..c.len() {
        best = best.max(c[k].abs() * p[k] * 0.5);
    }
    best
}

/// Upper bound version of [`cheb_dual_norm`] on entry magnitudes.
pub fn cheb_dual_bound(n: usize, nu: Interval, mag: impl Fn(usize) -> f64) -> f64 {
    let inv = Interval::ONE / nu;
    let p = powers(inv, n);
    let mut best = if n > 0 { mag(0) } else { 0.0 };
    for (k, pk) in p.iter().enumerate().skip(1) {
        best = best.max(mul_up(mag(k), mul_up(0.5, pk.hi())));
    }
    best
}

/// Upper bound on `|x_0| + 2 sum |x_k| nu^k` from entry magnitudes.
pub fn cheb_norm_bound(n: usize, nu: Interval, mag: impl Fn(usize) -> f64) -> f64 {
    let w = cheb_weights(n, nu);
    let mut s = 0.0;
    for (k, wk) in w.iter().enumerate() {
        s = add_up(s, mul_up(mag(k), wk.hi()));
    }
    s
}

/// Upper bound of the operator norm of an `n x n` block on the weighted
/// cosine space, together with a diagonal tail bounded by `tail`.
pub fn opnorm_cheb_bound(n: usize, nu: Interval, tail: f64, mag: impl Fn(usize, usize) -> f64) -> f64 {
    let w = cheb_weights(n, nu);
    let wup: Vec<f64> = w.iter().map(|x| x.hi()).collect();
    let winv: Vec<f64> = w.iter().map(|x| (Interval::ONE / *x).hi()).collect();
    let mut best = tail;
    for c in 0..n {
        let mut s = 0.0;
        for r in 0..n {
            let m = mag(r, c);
            if m != 0.0 {
                s = add_up(s, mul_up(m, wup[r]));
            }
        }
        best = best.max(mul_up(s, winv[c]));
    }
    best
}

/// Bounds used for convolutions against the unit ball of the cosine space.
///
/// For `a` with entries beyond its length equal to zero, returns for every
/// `k <= kmax` the pair
/// `Q_k = max(|a_k|, sup_{j>=1} (|a_|k-j|| + |a_{k+j}|) / (2 nu^j))` and
/// `Qhat_k = sup_{j>=m} (|a_|k-j|| + |a_{k+j}|) / (2 nu^j)`.
pub fn qk_estimates(a: &[Interval], nu: Interval, m: usize, kmax: usize) -> (Vec<f64>, Vec<f64>) {
    let n = a.len();
    let mag: Vec<f64> = a.iter().map(|x| x.mag()).collect();
    let at = |i: usize| if i < n { mag[i] } else { 0.0 };
    let inv = Interval::ONE / nu;
    let half_w: Vec<f64> = powers(inv, kmax + n + 2)
        .iter()
        .map(|p| mul_up(0.5, p.hi()))
        .collect();
    let mut q = Vec::with_capacity(kmax + 1);
    let mut qh = Vec::with_capacity(kmax + 1);
    for k in 0..=kmax {
        let mut best = at(k);
        let mut best_hat = 0.0f64;
        for j in 1..=(k + n) {
            let s = add_up(at(k.abs_diff(j)), at(k + j));
            if s == 0.0 {
                continue;
            }
            let t = mul_up(s, half_w[j]);
            best = best.max(t);
            if j >= m {
                best_hat = best_hat.max(t);
            }
        }
        q.push(best);
        qh.push(best_hat);
    }
    (q, qh)
}
