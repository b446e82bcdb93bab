//! Closed intervals over binary64 with outward rounding.
//!
//! Every arithmetic result is computed in round-to-nearest and then pushed one
//! floating point step outward, so the exact real result is always enclosed.
//! Library transcendentals get two steps.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IntervalError {
    #[error("division by an interval containing zero: [{lo:e}, {hi:e}]")]
    DivisionByZero { lo: f64, hi: f64 },
    #[error("{op} is undefined on [{lo:e}, {hi:e}]")]
    Domain { op: &'static str, lo: f64, hi: f64 },
    #[error("malformed interval [{lo:e}, {hi:e}]")]
    Malformed { lo: f64, hi: f64 },
    #[error("bad hex float {0:?}")]
    Hex(String),
}

/// Smallest float strictly above `x` (identity on `+inf`).
#[inline]
pub fn up(x: f64) -> f64 {
    x.next_up()
}

/// Largest float strictly below `x` (identity on `-inf`).
#[inline]
pub fn down(x: f64) -> f64 {
    x.next_down()
}

/// Upper bound of `a + b`.
#[inline]
pub fn add_up(a: f64, b: f64) -> f64 {
    up(a + b)
}

/// Upper bound of `a * b`.
#[inline]
pub fn mul_up(a: f64, b: f64) -> f64 {
    up(a * b)
}

/// Upper bound of `a / b`, `b > 0`.
#[inline]
pub fn div_up(a: f64, b: f64) -> f64 {
    up(a / b)
}

/// Lower bound of `a * b`.
#[inline]
pub fn mul_down(a: f64, b: f64) -> f64 {
    down(a * b)
}

/// Bit-exact hexadecimal form of a binary64 value.
pub fn f64_to_hex(x: f64) -> String {
    format!("{:016x}", x.to_bits())
}

pub fn f64_from_hex(s: &str) -> Result<f64, IntervalError> {
    if s.len() != 16 || !s.bytes().all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b)) {
        return Err(IntervalError::Hex(s.to_string()));
    }
    u64::from_str_radix(s, 16)
        .map(f64::from_bits)
        .map_err(|_| IntervalError::Hex(s.to_string()))
}

#[derive(Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.17e}, {:.17e}]", self.lo, self.hi)
    }
}

impl Default for Interval {
    fn default() -> Self {
        Interval::ZERO
    }
}

impl From<f64> for Interval {
    fn from(x: f64) -> Self {
        Interval::point(x)
    }
}

impl Interval {
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };
    pub const ONE: Interval = Interval { lo: 1.0, hi: 1.0 };
    pub const ENTIRE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn new(lo: f64, hi: f64) -> Result<Self, IntervalError> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(IntervalError::Malformed { lo, hi });
        }
        Ok(Interval { lo, hi })
    }

    /// Degenerate interval. Panics on NaN.
    pub fn point(x: f64) -> Self {
        assert!(!x.is_nan(), "NaN cannot be enclosed");
        Interval { lo: x, hi: x }
    }

    /// `[mid - rad, mid + rad]`, rounded outward.
    pub fn ball(mid: f64, rad: f64) -> Self {
        let rad = rad.abs();
        Interval {
            lo: down(mid - rad),
            hi: up(mid + rad),
        }
    }

    /// Interval from bounds that are already known to be ordered.
    #[inline]
    fn raw(lo: f64, hi: f64) -> Self {
        if lo.is_nan() || hi.is_nan() {
            return Interval::ENTIRE;
        }
        Interval { lo, hi }
    }

    #[inline]
    fn widened(lo: f64, hi: f64) -> Self {
        Interval::raw(down(lo), up(hi))
    }

    /// Enclosure of pi.
    pub fn pi() -> Self {
        Interval {
            lo: std::f64::consts::PI,
            hi: up(std::f64::consts::PI),
        }
    }

    #[inline]
    pub fn lo(self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn mid(self) -> f64 {
        if self.lo == self.hi {
            return self.lo;
        }
        let m = 0.5 * self.lo + 0.5 * self.hi;
        if m.is_finite() {
            m
        } else {
            0.0
        }
    }

    /// Upper bound on the distance from `mid()` to either endpoint.
    pub fn rad(self) -> f64 {
        let m = self.mid();
        up(m - self.lo).max(up(self.hi - m))
    }

    /// Upper bound on `hi - lo`.
    pub fn width(self) -> f64 {
        up(self.hi - self.lo)
    }

    /// Upper bound on `|x|` over the interval.
    #[inline]
    pub fn mag(self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// Lower bound on `|x|` over the interval.
    pub fn mig(self) -> f64 {
        if self.contains_zero() {
            0.0
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }

    pub fn contains(self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_zero(self) -> bool {
        self.contains(0.0)
    }

    pub fn encloses(self, other: Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn hull(self, other: Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    pub fn intersect(self, other: Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    pub fn is_finite(self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn is_point(self) -> bool {
        self.lo == self.hi
    }

    /// `|x|` as an interval.
    pub fn abs(self) -> Interval {
        if self.lo >= 0.0 {
            self
        } else if self.hi <= 0.0 {
            -self
        } else {
            Interval {
                lo: 0.0,
                hi: self.mag(),
            }
        }
    }

    pub fn max(self, other: Interval) -> Interval {
        Interval {
            lo: self.lo.max(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    pub fn min(self, other: Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.min(other.hi),
        }
    }

    pub fn sqr(self) -> Interval {
        let a = self.mig();
        let b = self.mag();
        let lo = if a == 0.0 { 0.0 } else { down(a * a).max(0.0) };
        Interval::raw(lo, up(b * b))
    }

    pub fn powi(self, n: u32) -> Interval {
        let mut acc = Interval::ONE;
        let mut base = self;
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            e >>= 1;
            if e > 0 {
                base = if base.lo >= 0.0 { base * base } else { base.sqr() };
            }
        }
        acc
    }

    pub fn recip(self) -> Result<Interval, IntervalError> {
        Interval::ONE.try_div(self)
    }

    pub fn try_div(self, rhs: Interval) -> Result<Interval, IntervalError> {
        if rhs.contains_zero() {
            return Err(IntervalError::DivisionByZero {
                lo: rhs.lo,
                hi: rhs.hi,
            });
        }
        let q = [
            self.lo / rhs.lo,
            self.lo / rhs.hi,
            self.hi / rhs.lo,
            self.hi / rhs.hi,
        ];
        Ok(hull4(q))
    }

    pub fn sqrt(self) -> Result<Interval, IntervalError> {
        if self.lo < 0.0 {
            return Err(IntervalError::Domain {
                op: "sqrt",
                lo: self.lo,
                hi: self.hi,
            });
        }
        let lo = if self.lo == 0.0 {
            0.0
        } else {
            down(self.lo.sqrt()).max(0.0)
        };
        Ok(Interval::raw(lo, up(self.hi.sqrt())))
    }

    pub fn ln(self) -> Result<Interval, IntervalError> {
        if self.lo <= 0.0 {
            return Err(IntervalError::Domain {
                op: "ln",
                lo: self.lo,
                hi: self.hi,
            });
        }
        Ok(Interval::raw(
            down(down(self.lo.ln())),
            up(up(self.hi.ln())),
        ))
    }

    pub fn exp(self) -> Interval {
        Interval::raw(
            down(down(self.lo.exp())).max(0.0),
            up(up(self.hi.exp())),
        )
    }

    pub fn cos(self) -> Interval {
        if !(self.hi - self.lo < 6.0) {
            return Interval { lo: -1.0, hi: 1.0 };
        }
        let pi = Interval::pi();
        let jlo = (Interval::point(self.lo) / pi).lo.ceil();
        let jhi = (Interval::point(self.hi) / pi).hi.floor();
        let (c0, c1) = (self.lo.cos(), self.hi.cos());
        let mut lo = down(down(c0.min(c1)));
        let mut hi = up(up(c0.max(c1)));
        let mut j = jlo;
        while j <= jhi {
            if j.rem_euclid(2.0) == 0.0 {
                hi = 1.0;
            } else {
                lo = -1.0;
            }
            j += 1.0;
        }
        Interval {
            lo: lo.max(-1.0),
            hi: hi.min(1.0),
        }
    }

    pub fn sin(self) -> Interval {
        if !(self.hi - self.lo < 6.0) {
            return Interval { lo: -1.0, hi: 1.0 };
        }
        let pi = Interval::pi();
        let half = Interval::point(0.5);
        let jlo = (Interval::point(self.lo) / pi - half).lo.ceil();
        let jhi = (Interval::point(self.hi) / pi - half).hi.floor();
        let (s0, s1) = (self.lo.sin(), self.hi.sin());
        let mut lo = down(down(s0.min(s1)));
        let mut hi = up(up(s0.max(s1)));
        let mut j = jlo;
        while j <= jhi {
            if j.rem_euclid(2.0) == 0.0 {
                hi = 1.0;
            } else {
                lo = -1.0;
            }
            j += 1.0;
        }
        Interval {
            lo: lo.max(-1.0),
            hi: hi.min(1.0),
        }
    }

    /// Strictly below zero for every member.
    pub fn is_negative(self) -> bool {
        self.hi < 0.0
    }

    pub fn to_hex_pair(self) -> [String; 2] {
        [f64_to_hex(self.lo), f64_to_hex(self.hi)]
    }

    pub fn from_hex_pair(lo: &str, hi: &str) -> Result<Interval, IntervalError> {
        Interval::new(f64_from_hex(lo)?, f64_from_hex(hi)?)
    }
}

#[inline]
fn hull4(v: [f64; 4]) -> Interval {
    if v.iter().any(|x| x.is_nan()) {
        return Interval::ENTIRE;
    }
    let lo = v[0].min(v[1]).min(v[2].min(v[3]));
    let hi = v[0].max(v[1]).max(v[2].max(v[3]));
    Interval::widened(lo, hi)
}

impl Add for Interval {
    type Output = Interval;
    #[inline]
    fn add(self, rhs: Interval) -> Interval {
        Interval::widened(self.lo + rhs.lo, self.hi + rhs.hi)
    }
}

impl Sub for Interval {
    type Output = Interval;
    #[inline]
    fn sub(self, rhs: Interval) -> Interval {
        Interval::widened(self.lo - rhs.hi, self.hi - rhs.lo)
    }
}

impl Mul for Interval {
    type Output = Interval;
    #[inline]
    fn mul(self, rhs: Interval) -> Interval {
        if self.lo >= 0.0 && rhs.lo >= 0.0 {
            let lo = self.lo * rhs.lo;
            let lo = if lo == 0.0 { 0.0 } else { down(lo) };
            return Interval::raw(lo, up(self.hi * rhs.hi));
        }
        hull4([
            self.lo * rhs.lo,
            self.lo * rhs.hi,
            self.hi * rhs.lo,
            self.hi * rhs.hi,
        ])
    }
}

/// Panics when the divisor contains zero; see [`Interval::try_div`].
impl Div for Interval {
    type Output = Interval;
    fn div(self, rhs: Interval) -> Interval {
        match self.try_div(rhs) {
            Ok(q) => q,
            Err(e) => panic!("{e}"),
        }
    }
}

impl Neg for Interval {
    type Output = Interval;
    #[inline]
    fn neg(self) -> Interval {
        Interval {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

impl Add<f64> for Interval {
    type Output = Interval;
    fn add(self, rhs: f64) -> Interval {
        self + Interval::point(rhs)
    }
}

impl Sub<f64> for Interval {
    type Output = Interval;
    fn sub(self, rhs: f64) -> Interval {
        self - Interval::point(rhs)
    }
}

impl Mul<f64> for Interval {
    type Output = Interval;
    fn mul(self, rhs: f64) -> Interval {
        self * Interval::point(rhs)
    }
}

impl Div<f64> for Interval {
    type Output = Interval;
    fn div(self, rhs: f64) -> Interval {
        self / Interval::point(rhs)
    }
}

impl AddAssign for Interval {
    fn add_assign(&mut self, rhs: Interval) {
        *self = *self + rhs;
    }
}

impl SubAssign for Interval {
    fn sub_assign(&mut self, rhs: Interval) {
        *self = *self - rhs;
    }
}

impl MulAssign for Interval {
    fn mul_assign(&mut self, rhs: Interval) {
        *self = *self * rhs;
    }
}

impl std::iter::Sum for Interval {
    fn sum<I: Iterator<Item = Interval>>(iter: I) -> Interval {
        iter.fold(Interval::ZERO, |a, b| a + b)
    }
}

/// Rectangular complex interval.
#[derive(Clone, Copy, PartialEq, Default)]
pub struct CInterval {
    pub re: Interval,
    pub im: Interval,
}

impl fmt::Debug for CInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} + i{:?}", self.re, self.im)
    }
}

impl From<Complex64> for CInterval {
    fn from(z: Complex64) -> Self {
        CInterval::point(z)
    }
}

impl From<Interval> for CInterval {
    fn from(x: Interval) -> Self {
        CInterval {
            re: x,
            im: Interval::ZERO,
        }
    }
}

impl CInterval {
    pub const ZERO: CInterval = CInterval {
        re: Interval::ZERO,
        im: Interval::ZERO,
    };
    pub const ONE: CInterval = CInterval {
        re: Interval::ONE,
        im: Interval::ZERO,
    };

    pub fn new(re: Interval, im: Interval) -> Self {
        CInterval { re, im }
    }

    pub fn point(z: Complex64) -> Self {
        CInterval {
            re: Interval::point(z.re),
            im: Interval::point(z.im),
        }
    }

    pub fn mid(self) -> Complex64 {
        Complex64::new(self.re.mid(), self.im.mid())
    }

    pub fn conj(self) -> CInterval {
        CInterval {
            re: self.re,
            im: -self.im,
        }
    }

    pub fn norm_sqr(self) -> Interval {
        self.re.sqr() + self.im.sqr()
    }

    /// `|z|` as an interval.
    pub fn abs(self) -> Interval {
        let lo = self.norm_sqr().lo().max(0.0);
        let lo = if lo == 0.0 { 0.0 } else { down(lo.sqrt()).max(0.0) };
        Interval::raw(lo, self.mag())
    }

    /// Upper bound on `|z|`.
    pub fn mag(self) -> f64 {
        let a = self.re.mag();
        let b = self.im.mag();
        if b == 0.0 {
            return a;
        }
        if a == 0.0 {
            return b;
        }
        up(up(up(a * a) + up(b * b)).sqrt())
    }

    pub fn contains(self, z: Complex64) -> bool {
        self.re.contains(z.re) && self.im.contains(z.im)
    }

    pub fn hull(self, other: CInterval) -> CInterval {
        CInterval {
            re: self.re.hull(other.re),
            im: self.im.hull(other.im),
        }
    }

    pub fn scale(self, s: Interval) -> CInterval {
        CInterval {
            re: self.re * s,
            im: self.im * s,
        }
    }

    pub fn recip(self) -> Result<CInterval, IntervalError> {
        let n = self.norm_sqr();
        Ok(CInterval {
            re: self.re.try_div(n)?,
            im: (-self.im).try_div(n)?,
        })
    }

    /// `e^{i psi}`.
    pub fn cis(psi: Interval) -> CInterval {
        CInterval {
            re: psi.cos(),
            im: psi.sin(),
        }
    }
}

impl Add for CInterval {
    type Output = CInterval;
    #[inline]
    fn add(self, rhs: CInterval) -> CInterval {
        CInterval {
            re: self.re + rhs.re,
            im: self.im + rhs.im,
        }
    }
}

impl Sub for CInterval {
    type Output = CInterval;
    #[inline]
    fn sub(self, rhs: CInterval) -> CInterval {
        CInterval {
            re: self.re - rhs.re,
            im: self.im - rhs.im,
        }
    }
}

impl Mul for CInterval {
    type Output = CInterval;
    #[inline]
    fn mul(self, rhs: CInterval) -> CInterval {
        CInterval {
            re: self.re * rhs.re - self.im * rhs.im,
            im: self.re * rhs.im + self.im * rhs.re,
        }
    }
}

impl Mul<Interval> for CInterval {
    type Output = CInterval;
    fn mul(self, rhs: Interval) -> CInterval {
        self.scale(rhs)
    }
}

impl Neg for CInterval {
    type Output = CInterval;
    fn neg(self) -> CInterval {
        CInterval {
            re: -self.re,
            im: -self.im,
        }
    }
}

impl AddAssign for CInterval {
    fn add_assign(&mut self, rhs: CInterval) {
        *self = *self + rhs;
    }
}

impl SubAssign for CInterval {
    fn sub_assign(&mut self, rhs: CInterval) {
        *self = *self - rhs;
    }
}

/// Dense row-major matrix of intervals.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Interval>,
}

impl IntervalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntervalMatrix {
            rows,
            cols,
            data: vec![Interval::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntervalMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Interval::ONE);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> Interval) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        IntervalMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Interval {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Interval) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Interval] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Enclosure of the matrix-vector product.
    pub fn mul_vec(&self, x: &[Interval]) -> Vec<Interval> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .fold(Interval::ZERO, |acc, (a, b)| acc + *a * *b)
            })
            .collect()
    }

    /// Entrywise upper bounds on `|m_ij|`, row-major.
    pub fn mag(&self) -> Vec<f64> {
        self.data.iter().map(|x| x.mag()).collect()
    }
}
