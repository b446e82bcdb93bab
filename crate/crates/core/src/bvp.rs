//! Projected boundary value problem for half of a symmetric homoclinic orbit.
//!
//! With time rescaled to `[-1, 1]` the orbit solves `v' = L Psi_beta(v)`,
//! `v2(-1) = v4(-1) = 0` and `v(1) = P_beta(psi)`, where `P_beta` is the real
//! stable manifold chart on the circle of radius `rho`. Each component is a
//! cosine series `v(t) = x_0 + 2 sum x_k T_k(t)`.
//!
//! Unknowns are laid out as `(L, psi, x1[0..m], x2[..], x3[..], x4[..])` and
//! equations as `(eta1, eta2, f1[0..m], .., f4[0..m])`.

use crate::interval::IntervalError;
use crate::linalg::{self, ColMajor, LinalgError};
use crate::manifold::{self, ManifoldCoeffs};
use crate::seq::{cheb_conv, Scalar};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BvpError {
    #[error("Newton iteration did not converge (residual {0:e})")]
    NewtonDiverged(f64),
    #[error("no orbit found by shooting from the manifold")]
    NoInitialGuess,
    #[error("need at least 4 Chebyshev modes, got {0}")]
    Size(usize),
    #[error("v1 = {0} is not above -1")]
    LogDomain(f64),
    #[error("rho must satisfy 0 < rho < nu_tilde")]
    RhoNotLessThanNu,
    #[error(transparent)]
    Interval(#[from] IntervalError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Manifold(#[from] manifold::ManifoldError),
    #[error("orbit proof failed: {0}")]
    Radii(#[from] crate::radii::RadiiFailure),
}

/// Approximate orbit `(L, psi, x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChebOrbit {
    pub l: f64,
    pub psi: f64,
    pub x: [Vec<f64>; 4],
}

impl ChebOrbit {
    pub fn m(&self) -> usize {
        self.x[0].len()
    }

    pub fn dim(&self) -> usize {
        4 * self.m() + 2
    }

    pub fn flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.dim());
        v.push(self.l);
        v.push(self.psi);
        for c in &self.x {
            v.extend_from_slice(c);
        }
        v
    }

    pub fn from_flat(m: usize, v: &[f64]) -> Self {
        assert_eq!(v.len(), 4 * m + 2);
        ChebOrbit {
            l: v[0],
            psi: v[1],
            x: std::array::from_fn(|c| v[2 + c * m..2 + (c + 1) * m].to_vec()),
        }
    }

    /// Same orbit with `m` modes, padded with zeros or truncated.
    pub fn resized(&self, m: usize) -> Self {
        ChebOrbit {
            l: self.l,
            psi: self.psi,
            x: std::array::from_fn(|c| {
                let mut v = self.x[c].clone();
                v.resize(m, 0.0);
                v
            }),
        }
    }

    /// `v(t)` by Clenshaw's recurrence.
    pub fn eval(&self, t: f64) -> [f64; 4] {
        std::array::from_fn(|c| cheb_eval(&self.x[c], t))
    }

    /// `dv/dt` from the differentiated series.
    pub fn eval_dt(&self, t: f64) -> [f64; 4] {
        std::array::from_fn(|c| cheb_eval(&cheb_derivative(&self.x[c]), t))
    }

    /// `u = ln(1 + v1)` at `t`.
    pub fn u(&self, t: f64) -> Result<f64, BvpError> {
        reconstruct_u(self.eval(t)[0])
    }

    /// `max(|L|, |psi|, ||x_i||)`.
    pub fn norm(&self, nu: f64) -> f64 {
        self.x
            .iter()
            .map(|c| crate::seq::cheb_norm_f64(c, nu))
            .fold(self.l.abs().max(self.psi.abs()), f64::max)
    }
}

pub fn reconstruct_u(v1: f64) -> Result<f64, BvpError> {
    if v1 > -1.0 {
        Ok(v1.ln_1p())
    } else {
        Err(BvpError::LogDomain(v1))
    }
}

/// `x_0 + 2 sum_{k>=1} x_k T_k(t)`.
pub fn cheb_eval(x: &[f64], t: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &c in x.iter().skip(1).rev() {
        let b0 = 2.0 * c + 2.0 * t * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    let first = x.first().copied().unwrap_or(0.0);
    first + t * b1 - b2
}

/// Coefficients of `dv/dt` in the same cosine normalization.
pub fn cheb_derivative(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n < 2 {
        return vec![0.0];
    }
    // standard coefficients c_0 = x_0, c_k = 2 x_k
    let c: Vec<f64> = x.iter().enumerate().map(|(k, v)| if k == 0 { *v } else { 2.0 * v }).collect();
    let mut d = vec![0.0; n + 1];
    for k in (0..n - 1).rev() {
        d[k] = d[k + 2] + 2.0 * (k + 1) as f64 * c[k + 1];
    }
    d[0] *= 0.5;
    d.truncate(n - 1);
    // back to x_0 + 2 sum x_k T_k
    d.iter().enumerate().map(|(k, v)| if k == 0 { *v } else { 0.5 * v }).collect()
}

#[inline]
fn shift<T: Scalar>(y: &[T], k: usize) -> T {
    // y_{k+1} - y_{k-1}
    let at = |i: usize| if i < y.len() { y[i] } else { T::zero() };
    at(k + 1) - at(k - 1)
}

/// `F(beta, x)` truncated to `m` modes, given the manifold value `p = P(psi)`.
pub fn residual_generic<T: Scalar>(beta: T, l: T, x: &[Vec<T>; 4], p: [T; 4]) -> Vec<T> {
    let m = x[0].len();
    let mut f = vec![T::zero(); 4 * m + 2];
    let two = T::from_f64(2.0);
    let alt = |y: &[T]| {
        let mut s = y[0];
        for (k, v) in y.iter().enumerate().skip(1) {
            s = if k % 2 == 0 { s + two * *v } else { s - two * *v };
        }
        s
    };
    f[0] = alt(&x[1]);
    f[1] = alt(&x[3]);
    let conv = cheb_conv(&x[0], &x[1]);
    let g: [Vec<T>; 4] = [
        conv.iter().enumerate().map(|(k, b)| if k < m { x[1][k] + *b } else { *b }).collect(),
        x[2].clone(),
        x[3].clone(),
        x[0].iter().zip(&x[2]).map(|(a, b)| -*a - beta * *b).collect(),
    ];
    for c in 0..4 {
        let row = 2 + c * m;
        let mut s = x[c][0];
        for v in x[c].iter().skip(1) {
            s = s + two * *v;
        }
        f[row] = s - p[c];
        for k in 1..m {
            f[row + k] = T::from_f64(2.0 * k as f64) * x[c][k] + l * shift(&g[c], k);
        }
    }
    f
}

/// Dense Jacobian of [`residual_generic`] in column-major order, given
/// `dp = dP/dpsi`.
pub fn jacobian_generic<T: Scalar>(beta: T, l: T, x: &[Vec<T>; 4], dp: [T; 4]) -> Vec<T> {
    let m = x[0].len();
    let n = 4 * m + 2;
    let mut j = vec![T::zero(); n * n];
    let idx = |r: usize, c: usize| c * n + r;
    let xc = |c: usize| 2 + c * m;
    let two = T::from_f64(2.0);
    let one = T::from_f64(1.0);
    // symmetry rows
    for (row, comp) in [(0usize, 1usize), (1, 3)] {
        for k in 0..m {
            j[idx(row, xc(comp) + k)] = if k == 0 {
                one
            } else if k % 2 == 0 {
                two
            } else {
                -two
            };
        }
    }
    // boundary rows
    for c in 0..4 {
        let row = 2 + c * m;
        for k in 0..m {
            j[idx(row, xc(c) + k)] = if k == 0 { one } else { two };
        }
        j[idx(row, 1)] = -dp[c];
    }
    // d/dL
    let conv = cheb_conv(&x[0], &x[1]);
    let g: [Vec<T>; 4] = [
        conv.iter().enumerate().map(|(k, b)| if k < m { x[1][k] + *b } else { *b }).collect(),
        x[2].clone(),
        x[3].clone(),
        x[0].iter().zip(&x[2]).map(|(a, b)| -*a - beta * *b).collect(),
    ];
    for c in 0..4 {
        for k in 1..m {
            j[idx(2 + c * m + k, 0)] = shift(&g[c], k);
        }
    }
    // diagonal 2k
    for c in 0..4 {
        for k in 1..m {
            j[idx(2 + c * m + k, xc(c) + k)] = T::from_f64(2.0 * k as f64);
        }
    }
    // linear couplings: f^(c) depends on x^(d) through L y_{k+1} - L y_{k-1}
    let lin: [(usize, usize, T); 4] = [(0, 1, l), (1, 2, l), (2, 3, l), (3, 0, -l)];
    for &(c, d, coef) in &lin {
        for k in 1..m {
            let row = 2 + c * m + k;
            if k + 1 < m {
                j[idx(row, xc(d) + k + 1)] = j[idx(row, xc(d) + k + 1)] + coef;
            }
            j[idx(row, xc(d) + k - 1)] = j[idx(row, xc(d) + k - 1)] - coef;
        }
    }
    let lb = -(l * beta);
    for k in 1..m {
        let row = 2 + 3 * m + k;
        if k + 1 < m {
            j[idx(row, xc(2) + k + 1)] = j[idx(row, xc(2) + k + 1)] + lb;
        }
        j[idx(row, xc(2) + k - 1)] = j[idx(row, xc(2) + k - 1)] - lb;
    }
    // product term in f^(1): d (x1*x2)_n / d x1_i = x2_|n-i| + x2_(n+i), i >= 1
    let at = |y: &[T], i: usize| if i < y.len() { y[i] } else { T::zero() };
    let dconv = |y: &[T], nn: usize, i: usize| {
        if i == 0 {
            at(y, nn)
        } else {
            at(y, nn.abs_diff(i)) + at(y, nn + i)
        }
    };
    for k in 1..m {
        let row = 2 + k;
        for i in 0..m {
            let d1 = dconv(&x[1], k + 1, i) - dconv(&x[1], k - 1, i);
            let d2 = dconv(&x[0], k + 1, i) - dconv(&x[0], k - 1, i);
            j[idx(row, xc(0) + i)] = j[idx(row, xc(0) + i)] + l * d1;
            j[idx(row, xc(1) + i)] = j[idx(row, xc(1) + i)] + l * d2;
        }
    }
    j
}

/// Manifold chart data on the circle of radius `rho`.
#[derive(Clone, Debug)]
pub struct Chart<'a> {
    pub coeffs: &'a ManifoldCoeffs,
    pub rho: f64,
}

impl Chart<'_> {
    pub fn p(&self, psi: f64) -> [f64; 4] {
        manifold::eval_real(self.coeffs, self.rho, psi)
    }

    pub fn dp(&self, psi: f64) -> [f64; 4] {
        manifold::eval_real_dpsi(self.coeffs, self.rho, psi)
    }
}

pub fn residual(beta: f64, orbit: &ChebOrbit, chart: &Chart) -> Vec<f64> {
    residual_generic(beta, orbit.l, &orbit.x, chart.p(orbit.psi))
}

pub fn jacobian(beta: f64, orbit: &ChebOrbit, chart: &Chart) -> ColMajor {
    let n = orbit.dim();
    ColMajor {
        rows: n,
        cols: n,
        data: jacobian_generic(beta, orbit.l, &orbit.x, chart.dp(orbit.psi)),
    }
}

/// Representative of `psi` modulo `2 pi` closest to `reference`.
fn wrap_near(psi: f64, reference: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let d = (psi - reference + std::f64::consts::PI).rem_euclid(tau) - std::f64::consts::PI;
    reference + d
}

/// Newton's method on the truncated problem with dense LU solves.
pub fn newton(beta: f64, init: &ChebOrbit, chart: &Chart, tol: f64) -> Result<ChebOrbit, BvpError> {
    let m = init.m();
    if m < 4 {
        return Err(BvpError::Size(m));
    }
    let mut x = init.clone();
    let mut last = f64::INFINITY;
    for _ in 0..40 {
        let f = residual(beta, &x, chart);
        let res = f.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if !res.is_finite() {
            return Err(BvpError::NewtonDiverged(res));
        }
        let jac = jacobian(beta, &x, chart);
        let dx = linalg::solve(&jac, &f)?;
        let step = dx.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let mut flat = x.flat();
        for (v, d) in flat.iter_mut().zip(&dx) {
            *v -= d;
        }
        x = ChebOrbit::from_flat(m, &flat);
        if step <= tol || (res <= tol && res >= 0.5 * last) {
            let f = residual(beta, &x, chart);
            let res = f.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            if res > 1e-10 {
                return Err(BvpError::NewtonDiverged(res));
            }
            x.psi = wrap_near(x.psi, init.psi);
            return Ok(x);
        }
        last = res;
    }
    Err(BvpError::NewtonDiverged(last))
}

fn vector_field(beta: f64, v: [f64; 4]) -> [f64; 4] {
    [v[1] + v[0] * v[1], v[2], v[3], -beta * v[2] - v[0]]
}

/// One classical Runge-Kutta step of `v' = -Psi(v)` (backward time).
fn rk4_back(beta: f64, v: [f64; 4], h: f64) -> [f64; 4] {
    let f = |w: [f64; 4]| {
        let d = vector_field(beta, w);
        [-d[0], -d[1], -d[2], -d[3]]
    };
    let add = |a: [f64; 4], b: [f64; 4], s: f64| -> [f64; 4] { std::array::from_fn(|i| a[i] + s * b[i]) };
    let k1 = f(v);
    let k2 = f(add(v, k1, h / 2.0));
    let k3 = f(add(v, k2, h / 2.0));
    let k4 = f(add(v, k3, h));
    std::array::from_fn(|i| v[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

const SHOOT_STEP: f64 = 2e-3;
const SHOOT_TMAX: f64 = 30.0;
const BLOWUP: f64 = 1e3;

/// Zero crossings of `v2` along the backward orbit, as `(tau, v4)`.
fn crossings(beta: f64, start: [f64; 4], max: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut v = start;
    let mut tau = 0.0;
    while tau < SHOOT_TMAX && out.len() < max {
        let w = rk4_back(beta, v, SHOOT_STEP);
        if w.iter().any(|c| !c.is_finite() || c.abs() > BLOWUP) {
            break;
        }
        if v[1] != 0.0 && v[1].signum() != w[1].signum() {
            let t = v[1] / (v[1] - w[1]);
            out.push((tau + t * SHOOT_STEP, v[3] + t * (w[3] - v[3])));
        }
        v = w;
        tau += SHOOT_STEP;
    }
    out
}

/// Integrates backward for time `tau` exactly.
fn flow_back(beta: f64, start: [f64; 4], tau: f64) -> [f64; 4] {
    let steps = (tau / SHOOT_STEP).ceil().max(1.0) as usize;
    let h = tau / steps as f64;
    (0..steps).fold(start, |v, _| rk4_back(beta, v, h))
}

/// Shooting from the chart circle: finds `(psi, tau)` such that the backward
/// orbit from `P(psi)` reaches `v2 = v4 = 0` after time `tau`, with `tau`
/// as small as possible.
pub fn shoot(beta: f64, chart: &Chart, grid: usize) -> Result<(f64, f64), BvpError> {
    const MAXC: usize = 6;
    let psis: Vec<f64> = (0..=grid).map(|i| std::f64::consts::TAU * i as f64 / grid as f64).collect();
    let data: Vec<Vec<(f64, f64)>> = psis.iter().map(|&p| crossings(beta, chart.p(p), MAXC)).collect();
    let mut best: Option<(f64, f64)> = None;
    for j in 0..MAXC {
        for i in 0..grid {
            let (Some(a), Some(b)) = (data[i].get(j), data[i + 1].get(j)) else {
                continue;
            };
            if a.1.signum() == b.1.signum() || (a.0 - b.0).abs() > 1.0 {
                continue;
            }
            if let Some(&(t, _)) = best.as_ref() {
                if a.0.min(b.0) > t + 1.0 {
                    continue;
                }
            }
            let g = |p: f64| crossings(beta, chart.p(p), j + 1).get(j).copied();
            let (mut lo, mut hi) = (psis[i], psis[i + 1]);
            let mut glo = a.1;
            let mut ok = true;
            for _ in 0..50 {
                let mid = 0.5 * (lo + hi);
                match g(mid) {
                    Some((_, v)) if v.signum() == glo.signum() => {
                        lo = mid;
                        glo = v;
                    }
                    Some(_) => hi = mid,
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                continue;
            }
            let psi = 0.5 * (lo + hi);
            let Some((tau, v4)) = g(psi) else { continue };
            if v4.abs() > 1e-6 || tau < 1e-3 {
                continue;
            }
            if best.map_or(true, |(_, t)| tau < t) {
                best = Some((psi, tau));
            }
        }
    }
    best.ok_or(BvpError::NoInitialGuess)
}

/// Samples a function on the Chebyshev-Lobatto grid of `2m + 1` points and
/// returns its first `m` coefficients in the cosine normalization.
pub fn interpolate(m: usize, f: impl Fn(f64) -> [f64; 4]) -> [Vec<f64>; 4] {
    let big = 2 * m;
    let pi = std::f64::consts::PI;
    let vals: Vec<[f64; 4]> = (0..=big).map(|j| f((pi * j as f64 / big as f64).cos())).collect();
    std::array::from_fn(|c| {
        (0..m)
            .map(|k| {
                let mut s = 0.0;
                for (j, v) in vals.iter().enumerate() {
                    let w = if j == 0 || j == big { 0.5 } else { 1.0 };
                    s += w * v[c] * (pi * (j * k) as f64 / big as f64).cos();
                }
                s / big as f64
            })
            .collect()
    })
}

/// First guess for the orbit at `beta` by shooting and interpolation.
pub fn initial_guess(beta: f64, m: usize, chart: &Chart) -> Result<ChebOrbit, BvpError> {
    let (psi, tau) = shoot(beta, chart, 256)?;
    let l = tau / 2.0;
    let start = chart.p(psi);
    // v(t) at physical time L t, i.e. backward time L (1 - t) from t = 1
    let big = 2 * m;
    let pi = std::f64::consts::PI;
    let nodes: Vec<f64> = (0..=big).map(|j| (pi * j as f64 / big as f64).cos()).collect();
    let mut samples = vec![[0.0; 4]; nodes.len()];
    let mut v = start;
    let mut tau_now = 0.0;
    for (j, &t) in nodes.iter().enumerate() {
        let target = l * (1.0 - t);
        if target > tau_now {
            v = flow_back(beta, v, target - tau_now);
            tau_now = target;
        }
        samples[j] = v;
    }
    let lookup = |t: f64| {
        let j = nodes
            .iter()
            .position(|&n| (n - t).abs() < 1e-15)
            .expect("interpolation node");
        samples[j]
    };
    Ok(ChebOrbit {
        l,
        psi,
        x: interpolate(m, lookup),
    })
}

/// Shooting followed by Newton.
pub fn solve_orbit(beta: f64, m: usize, chart: &Chart) -> Result<ChebOrbit, BvpError> {
    let guess = initial_guess(beta, m, chart)?;
    newton(beta, &guess, chart, 1e-13)
}

/// Non-rigorous residual report for an approximate orbit.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostics {
    /// `sup |v' - L Psi(v)|` over sample points.
    pub ode_residual: f64,
    /// `max_i |v_i(1) - P_i(psi)|`.
    pub boundary: f64,
    /// `|v2(-1)|`, `|v4(-1)|`.
    pub symmetry: [f64; 2],
}

pub fn diagnostics(beta: f64, orbit: &ChebOrbit, chart: &Chart, samples: usize) -> Diagnostics {
    let d: [Vec<f64>; 4] = std::array::from_fn(|c| cheb_derivative(&orbit.x[c]));
    let mut ode: f64 = 0.0;
    for i in 0..samples {
        let t = -1.0 + 2.0 * i as f64 / (samples - 1).max(1) as f64;
        let v = orbit.eval(t);
        let f = vector_field(beta, v);
        for c in 0..4 {
            ode = ode.max((cheb_eval(&d[c], t) - orbit.l * f[c]).abs());
        }
    }
    let v1 = orbit.eval(1.0);
    let p = chart.p(orbit.psi);
    let boundary = (0..4).fold(0.0f64, |a, c| a.max((v1[c] - p[c]).abs()));
    let vm = orbit.eval(-1.0);
    Diagnostics {
        ode_residual: ode,
        boundary,
        symmetry: [vm[1].abs(), vm[3].abs()],
    }
}
