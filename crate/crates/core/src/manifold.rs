//! Two-dimensional stable manifold of the origin for the first order system
//! `v' = Psi_beta(v)`, `Psi_beta(v) = (v2 + v1 v2, v3, v4, -beta v3 - v1)`,
//! parameterized by `Q(theta) = sum a_alpha theta^alpha`.
//!
//! The coefficients solve `F(beta, a) = 0`, with `F_00 = a_00`,
//! `F_10 = a_10 - gamma V`, `F_01 = a_01 - gamma conj(V)` and, for
//! `|alpha| >= 2`,
//! `F_alpha = mu_alpha a_alpha - (a2 + a1*a2, a3, a4, -a1 - beta a3)_alpha`
//! where `mu_alpha = alpha1 lambda + alpha2 conj(lambda)`.
//! The scale `gamma` is applied to the eigenvector so that the proof can use
//! unit weights.

use num_complex::Complex64;

use crate::interval::{add_up, mul_up, CInterval, Interval, IntervalError};
use crate::linalg::{residual_bound_complex, CColMajor, CSparseCols, LinalgError};
use crate::radii::{radii_check, radii_coeffs, RadiiFailure, RadiiOutcome};
use crate::seq::{opnorm_taylor_bound, powers, taylor_norm, tri_count, tri_degrees, tri_index, tri_indices, Taylor2Seq};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ManifoldError {
    #[error("beta = {0} is outside (-2, 2)")]
    BetaOutOfRange(f64),
    #[error("truncation order must be at least 2, got {0}")]
    Order(usize),
    #[error("Newton iteration did not converge (residual {0:e})")]
    NewtonDiverged(f64),
    #[error(transparent)]
    Interval(#[from] IntervalError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("manifold proof failed: {0}")]
    Radii(#[from] RadiiFailure),
    #[error("no admissible scaling found at beta = {0}")]
    NoScaling(f64),
}

/// Four coefficient sequences of equal order.
#[derive(Clone, Debug, PartialEq)]
pub struct ManifoldCoeffs {
    pub order: usize,
    pub comps: [Taylor2Seq<Complex64>; 4],
}

pub type IntervalCoeffs = [Taylor2Seq<CInterval>; 4];

impl ManifoldCoeffs {
    pub fn zeros(order: usize) -> Self {
        ManifoldCoeffs {
            order,
            comps: std::array::from_fn(|_| Taylor2Seq::zeros(order)),
        }
    }

    /// Component-major flat layout used for the linear algebra.
    pub fn flat(&self) -> Vec<Complex64> {
        self.comps.iter().flat_map(|c| c.data().iter().copied()).collect()
    }

    pub fn from_flat(order: usize, v: &[Complex64]) -> Self {
        let nt = tri_count(order);
        assert_eq!(v.len(), 4 * nt);
        ManifoldCoeffs {
            order,
            comps: std::array::from_fn(|c| Taylor2Seq::from_vec(order, v[c * nt..(c + 1) * nt].to_vec())),
        }
    }

    pub fn to_intervals(&self) -> IntervalCoeffs {
        std::array::from_fn(|c| self.comps[c].map(CInterval::point))
    }

    /// `a_alpha -> factor^|alpha| a_alpha`.
    pub fn rescaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for comp in out.comps.iter_mut() {
            for ((a1, a2), z) in tri_indices(self.order).zip(comp.data_mut()) {
                *z *= factor.powi((a1 + a2) as i32);
            }
        }
        out
    }

    /// Imposes `a_(a2,a1) = conj(a_(a1,a2))`, which the exact solution satisfies.
    pub fn symmetrize(&mut self) {
        for comp in self.comps.iter_mut() {
            for (a1, a2) in tri_indices(self.order) {
                if a1 > a2 {
                    let z = comp.get(a1, a2);
                    comp.set(a2, a1, z.conj());
                } else if a1 == a2 {
                    let z = comp.get(a1, a2);
                    comp.set(a1, a2, Complex64::new(z.re, 0.0));
                }
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|c| c.data().iter())
            .fold(0.0, |m, z| m.max(z.norm()))
    }
}

fn check_beta(beta: f64) -> Result<(), ManifoldError> {
    if beta > -2.0 && beta < 2.0 {
        Ok(())
    } else {
        Err(ManifoldError::BetaOutOfRange(beta))
    }
}

/// Stable eigenvalue `-sqrt(2 - beta)/2 + i sqrt(2 + beta)/2`.
pub fn lambda_f64(beta: f64) -> Complex64 {
    Complex64::new(-0.5 * (2.0 - beta).sqrt(), 0.5 * (2.0 + beta).sqrt())
}

pub fn lambda(beta: Interval) -> Result<CInterval, IntervalError> {
    let two = Interval::point(2.0);
    Ok(CInterval::new(
        -((two - beta).sqrt()? * 0.5),
        (two + beta).sqrt()? * 0.5,
    ))
}

/// `d lambda / d beta`.
pub fn lambda_prime(beta: Interval) -> Result<CInterval, IntervalError> {
    let two = Interval::point(2.0);
    Ok(CInterval::new(
        (two - beta).sqrt()?.recip()? * 0.25,
        (two + beta).sqrt()?.recip()? * 0.25,
    ))
}

pub fn eigenvector(lam: CInterval) -> [CInterval; 4] {
    let l2 = lam * lam;
    [CInterval::ONE, lam, l2, l2 * lam]
}

pub fn eigenvector_f64(lam: Complex64) -> [Complex64; 4] {
    [Complex64::new(1.0, 0.0), lam, lam * lam, lam * lam * lam]
}

#[derive(Clone, Debug)]
pub struct EigenData {
    pub beta: Interval,
    pub lambda: CInterval,
    pub v: [CInterval; 4],
}

pub fn eigen_data(beta: Interval) -> Result<EigenData, ManifoldError> {
    check_beta(beta.lo())?;
    check_beta(beta.hi())?;
    let lam = lambda(beta)?;
    Ok(EigenData {
        beta,
        lambda: lam,
        v: eigenvector(lam),
    })
}

#[inline]
fn mu_f64(a1: usize, a2: usize, lam: Complex64) -> Complex64 {
    lam * a1 as f64 + lam.conj() * a2 as f64
}

#[inline]
fn mu_iv(a1: usize, a2: usize, lam: CInterval) -> CInterval {
    lam.scale(Interval::point(a1 as f64)) + lam.conj().scale(Interval::point(a2 as f64))
}

/// Truncated zero finding map in floating point, same order as `a`.
pub fn residual(beta: f64, gamma: f64, a: &ManifoldCoeffs) -> ManifoldCoeffs {
    let n = a.order;
    let lam = lambda_f64(beta);
    let v = eigenvector_f64(lam);
    let conv = a.comps[0].cauchy(&a.comps[1], n);
    let mut f = ManifoldCoeffs::zeros(n);
    for (a1, a2) in tri_indices(n) {
        let x: [Complex64; 4] = std::array::from_fn(|c| a.comps[c].get(a1, a2));
        let out: [Complex64; 4] = match a1 + a2 {
            0 => x,
            1 => std::array::from_fn(|c| {
                let vc = if a1 == 1 { v[c] } else { v[c].conj() };
                x[c] - vc * gamma
            }),
            _ => {
                let mu = mu_f64(a1, a2, lam);
                [
                    mu * x[0] - x[1] - conv.get(a1, a2),
                    mu * x[1] - x[2],
                    mu * x[2] - x[3],
                    mu * x[3] + x[0] + x[2] * beta,
                ]
            }
        };
        for c in 0..4 {
            f.comps[c].set(a1, a2, out[c]);
        }
    }
    f
}

/// Enclosure of `F(beta, a)` for `|alpha| < out_order`.
pub fn residual_enclosure(
    beta: Interval,
    gamma: f64,
    a: &IntervalCoeffs,
    out_order: usize,
) -> Result<IntervalCoeffs, ManifoldError> {
    let eig = eigen_data(beta)?;
    let g = Interval::point(gamma);
    let conv = a[0].cauchy(&a[1], out_order);
    let mut f: IntervalCoeffs = std::array::from_fn(|_| Taylor2Seq::zeros(out_order));
    for (a1, a2) in tri_indices(out_order) {
        let x: [CInterval; 4] = std::array::from_fn(|c| a[c].get(a1, a2));
        let out: [CInterval; 4] = match a1 + a2 {
            0 => x,
            1 => std::array::from_fn(|c| {
                let vc = if a1 == 1 { eig.v[c] } else { eig.v[c].conj() };
                x[c] - vc.scale(g)
            }),
            _ => {
                let mu = mu_iv(a1, a2, eig.lambda);
                [
                    mu * x[0] - x[1] - conv.get(a1, a2),
                    mu * x[1] - x[2],
                    mu * x[2] - x[3],
                    mu * x[3] + x[0] + x[2].scale(beta),
                ]
            }
        };
        for c in 0..4 {
            f[c].set(a1, a2, out[c]);
        }
    }
    Ok(f)
}

/// Per-index data for solving with the block lower triangular Jacobian.
struct Triangular {
    order: usize,
    degs: Vec<usize>,
    multi: Vec<(usize, usize)>,
    mu: Vec<Complex64>,
    beta: f64,
    p: Complex64,
    q: Complex64,
}

impl Triangular {
    fn new(beta: f64, a: &ManifoldCoeffs) -> Self {
        let lam = lambda_f64(beta);
        let multi: Vec<(usize, usize)> = tri_indices(a.order).collect();
        Triangular {
            order: a.order,
            degs: tri_degrees(a.order),
            mu: multi.iter().map(|&(a1, a2)| mu_f64(a1, a2, lam)).collect(),
            multi,
            beta,
            p: -a.comps[1].get(0, 0),
            q: Complex64::new(1.0, 0.0) + a.comps[0].get(0, 0),
        }
    }

    /// Solves `DF(a) x = r` by forward substitution. Only rows `alpha >= start`
    /// are visited, which is exact when `r` vanishes elsewhere.
    fn solve(&self, a: &ManifoldCoeffs, r: &[Complex64], start: (usize, usize)) -> Vec<Complex64> {
        let nt = tri_count(self.order);
        let mut x = vec![Complex64::new(0.0, 0.0); 4 * nt];
        let (a1c, a2c) = (a.comps[0].data(), a.comps[1].data());
        for (idx, &(al1, al2)) in self.multi.iter().enumerate() {
            if al1 < start.0 || al2 < start.1 {
                continue;
            }
            let rr: [Complex64; 4] = std::array::from_fn(|c| r[c * nt + idx]);
            if self.degs[idx] <= 1 {
                for c in 0..4 {
                    x[c * nt + idx] = rr[c];
                }
                continue;
            }
            let mut r1 = rr[0];
            for s1 in start.0..=al1 {
                for s2 in start.1..=al2 {
                    if s1 == al1 && s2 == al2 {
                        continue;
                    }
                    let sidx = tri_index(s1, s2);
                    let didx = tri_index(al1 - s1, al2 - s2);
                    r1 += a2c[didx] * x[sidx] + a1c[didx] * x[nt + sidx];
                }
            }
            let mu = self.mu[idx];
            let b = self.beta;
            let p = mu + self.p;
            let q = self.q;
            let mu2 = mu * mu;
            let den = p * (mu2 * mu + mu * b) + q;
            let x2 = (p * (rr[3] + mu2 * rr[1] + mu * rr[2] + rr[1] * b) - r1) / den;
            let x3 = mu * x2 - rr[1];
            let x4 = mu * x3 - rr[2];
            let x1 = rr[3] - mu * x4 - x3 * b;
            x[idx] = x1;
            x[nt + idx] = x2;
            x[2 * nt + idx] = x3;
            x[3 * nt + idx] = x4;
        }
        x
    }
}

/// Newton's method on the truncated map, with block forward substitution for
/// the linear solves.
pub fn newton_solve(
    beta: f64,
    order: usize,
    gamma: f64,
    init: Option<&ManifoldCoeffs>,
) -> Result<ManifoldCoeffs, ManifoldError> {
    check_beta(beta)?;
    if order < 2 {
        return Err(ManifoldError::Order(order));
    }
    let mut a = match init {
        Some(a0) if a0.order == order => a0.clone(),
        Some(a0) => ManifoldCoeffs {
            order,
            comps: std::array::from_fn(|c| a0.comps[c].resized(order)),
        },
        None => {
            let v = eigenvector_f64(lambda_f64(beta));
            let mut a = ManifoldCoeffs::zeros(order);
            for c in 0..4 {
                a.comps[c].set(1, 0, v[c] * gamma);
                a.comps[c].set(0, 1, v[c].conj() * gamma);
            }
            a
        }
    };
    let mut last = f64::INFINITY;
    for _ in 0..60 {
        let f = residual(beta, gamma, &a);
        let res = f.max_abs();
        let scale = 1.0 + a.max_abs();
        if !res.is_finite() {
            return Err(ManifoldError::NewtonDiverged(res));
        }
        if res <= 4.0 * f64::EPSILON * scale || res >= last {
            if res > 1e-8 * scale {
                return Err(ManifoldError::NewtonDiverged(res));
            }
            break;
        }
        last = res;
        let tri = Triangular::new(beta, &a);
        let rhs: Vec<Complex64> = f.flat().iter().map(|z| -z).collect();
        let dx = tri.solve(&a, &rhs, (0, 0));
        let mut flat = a.flat();
        for (x, d) in flat.iter_mut().zip(&dx) {
            *x += d;
        }
        a = ManifoldCoeffs::from_flat(order, &flat);
    }
    a.symmetrize();
    for c in 0..4 {
        a.comps[c].set(0, 0, Complex64::new(0.0, 0.0));
    }
    Ok(a)
}

/// Approximate inverse of the truncated Jacobian at `a`, component-major.
pub fn approx_inverse(beta: f64, a: &ManifoldCoeffs) -> CColMajor {
    let nt = tri_count(a.order);
    let n = 4 * nt;
    let tri = Triangular::new(beta, a);
    let mut j = CColMajor::zeros(n);
    let mut rhs = vec![Complex64::new(0.0, 0.0); n];
    for d in 0..4 {
        for (idx, &(t1, t2)) in tri.multi.iter().enumerate() {
            let col = d * nt + idx;
            rhs[col] = Complex64::new(1.0, 0.0);
            let x = tri.solve(a, &rhs, (t1, t2));
            rhs[col] = Complex64::new(0.0, 0.0);
            for (i, z) in x.iter().enumerate() {
                if z.re != 0.0 || z.im != 0.0 {
                    j.set(i, col, *z);
                }
            }
        }
    }
    j
}

/// Interval Jacobian of the truncated map in sparse column form.
pub fn jacobian_sparse(beta: Interval, a: &IntervalCoeffs) -> Result<CSparseCols, ManifoldError> {
    let order = a[0].order();
    let nt = tri_count(order);
    let eig = eigen_data(beta)?;
    let mut m = CSparseCols::new(4 * nt, 4 * nt);
    let one = CInterval::ONE;
    for (sidx, (s1, s2)) in tri_indices(order).enumerate() {
        let col = |d: usize| d * nt + sidx;
        if s1 + s2 <= 1 {
            for d in 0..4 {
                m.push(col(d), col(d), one);
            }
        } else {
            let mu = mu_iv(s1, s2, eig.lambda);
            m.push(sidx, col(0), mu);
            m.push(3 * nt + sidx, col(0), one);
            m.push(sidx, col(1), -one);
            m.push(nt + sidx, col(1), mu);
            m.push(nt + sidx, col(2), -one);
            m.push(2 * nt + sidx, col(2), mu);
            m.push(3 * nt + sidx, col(2), CInterval::from(beta));
            m.push(2 * nt + sidx, col(3), -one);
            m.push(3 * nt + sidx, col(3), mu);
        }
        // derivative of -(a1 * a2)_alpha in rows |alpha| >= 2
        for d1 in 0..(order - s1) {
            for d2 in 0..(order - s1 - d1).min(order).saturating_sub(s2) {
                let (al1, al2) = (s1 + d1, s2 + d2);
                if al1 + al2 < 2 || al1 + al2 >= order {
                    continue;
                }
                let row = tri_index(al1, al2);
                m.push(row, col(0), -a[1].get(d1, d2));
                m.push(row, col(1), -a[0].get(d1, d2));
            }
        }
    }
    Ok(m)
}

/// Upper bound on `|h'|` for a function analytic on the polydisc of radius
/// `nu_tilde` with sup norm `delta`, evaluated on the polydisc of radius `rho`.
pub fn derivative_bound_h(delta: Interval, nu_tilde: Interval, rho: Interval) -> Result<Interval, IntervalError> {
    let l = (nu_tilde.try_div(rho)?).ln()?;
    (Interval::pi() * 4.0 * delta).try_div(nu_tilde * l)
}

/// Finite block data reused across parameter steps starting at `beta0`.
#[derive(Clone, Debug)]
pub struct ManifoldOperator {
    pub beta0: f64,
    pub gamma: f64,
    pub order: usize,
    pub nu: f64,
    pub a0: ManifoldCoeffs,
    pub j: CColMajor,
    pub z0: [Interval; 4],
    /// `K^(i,j)(J)`.
    pub k: [[f64; 4]; 4],
    /// `K~^(i,j)(J)`, columns weighted by `|alpha|`.
    pub kt: [[f64; 4]; 4],
}

#[derive(Clone, Debug, PartialEq)]
pub struct ManifoldBounds {
    pub y: [Interval; 4],
    pub z0: [Interval; 4],
    pub z1: [Interval; 4],
    pub z2: [Interval; 4],
}

impl ManifoldBounds {
    pub fn polys(&self) -> Vec<Vec<Interval>> {
        (0..4)
            .map(|j| radii_coeffs(self.y[j], self.z0[j], self.z1[j], self.z2[j], Interval::ZERO))
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct ManifoldProof {
    pub beta0: f64,
    pub beta1: f64,
    pub gamma: f64,
    pub order: usize,
    pub nu: f64,
    pub bounds: ManifoldBounds,
    pub radii: RadiiOutcome,
    pub a0: ManifoldCoeffs,
    pub a1: ManifoldCoeffs,
}

impl ManifoldProof {
    pub fn r(&self) -> f64 {
        self.radii.r
    }
}

impl ManifoldOperator {
    /// Builds `J`, `Z0` and the block norms of `J` at `(beta0, a0)`.
    pub fn build(beta0: f64, gamma: f64, nu: f64, a0: &ManifoldCoeffs) -> Result<Self, ManifoldError> {
        check_beta(beta0)?;
        let order = a0.order;
        let nt = tri_count(order);
        let j = approx_inverse(beta0, a0);
        let dfs = jacobian_sparse(Interval::point(beta0), &a0.to_intervals())?;
        let bmag = residual_bound_complex(&j, &dfs)?;
        let n = 4 * nt;
        let nui = Interval::point(nu);
        let mut z0 = [Interval::ZERO; 4];
        for (i, z) in z0.iter_mut().enumerate() {
            let mut s = 0.0;
            for jj in 0..4 {
                let kb = opnorm_taylor_bound(order, nui, 0.0, |r, c| bmag[(jj * nt + c) * n + i * nt + r]);
                s = add_up(s, kb);
            }
            *z = Interval::new(0.0, s)?;
        }
        let degs = tri_degrees(order);
        let mut k = [[0.0; 4]; 4];
        let mut kt = [[0.0; 4]; 4];
        for i in 0..4 {
            for jj in 0..4 {
                k[i][jj] = opnorm_taylor_bound(order, nui, 0.0, |r, c| j.mag(i * nt + r, jj * nt + c));
                kt[i][jj] = opnorm_taylor_bound(order, nui, 0.0, |r, c| {
                    mul_up(j.mag(i * nt + r, jj * nt + c), degs[c] as f64)
                });
            }
        }
        Ok(ManifoldOperator {
            beta0,
            gamma,
            order,
            nu,
            a0: a0.clone(),
            j,
            z0,
            k,
            kt,
        })
    }

    /// Computes `Y`, `Z1`, `Z2` on the segment from `(beta0, a0)` to
    /// `(beta1, a1)` and solves the radii polynomials.
    pub fn validate(&self, beta1: f64, a1: &ManifoldCoeffs) -> Result<ManifoldProof, ManifoldError> {
        let bounds = self.bounds(beta1, a1)?;
        let radii = radii_check(&bounds.polys())?;
        Ok(ManifoldProof {
            beta0: self.beta0,
            beta1,
            gamma: self.gamma,
            order: self.order,
            nu: self.nu,
            bounds,
            radii,
            a0: self.a0.clone(),
            a1: a1.clone(),
        })
    }

    pub fn bounds(&self, beta1: f64, a1: &ManifoldCoeffs) -> Result<ManifoldBounds, ManifoldError> {
        check_beta(beta1)?;
        let order = self.order;
        let nt = tri_count(order);
        let big = 2 * order - 1;
        let b0 = Interval::point(self.beta0);
        let b1 = Interval::point(beta1);
        let bh = b0.hull(b1);
        let db = b1 - b0;
        let dba = db.abs();
        let two = Interval::point(2.0);
        let nui = Interval::point(self.nu);
        let g = Interval::point(self.gamma);

        let eig = eigen_data(b0)?;
        let lp = lambda_prime(b0)?;
        let a0i = self.a0.to_intervals();
        let a1i = a1.to_intervals();
        let da: IntervalCoeffs = std::array::from_fn(|c| &a1i[c] - &a0i[c]);

        // F at the left end
        let f0 = residual_enclosure(b0, self.gamma, &a0i, big)?;

        // first order term in s
        let conv_lin = &a0i[0].cauchy(&da[1], big) + &a0i[1].cauchy(&da[0], big);
        let vprime = {
            let l = eig.lambda;
            [
                CInterval::ZERO,
                lp,
                (l * lp).scale(two),
                (l * l * lp).scale(Interval::point(3.0)),
            ]
        };
        // second order bounds, suprema over the parameter hull
        let lpp_mag = {
            let num = Interval::point(4.0) + bh.sqr() * 3.0;
            let den = ((two - bh) * (two + bh)).powi(3);
            (num.try_div(den)?.sqrt()? * 0.25).hi()
        };
        let lp_sq = (Interval::point(0.25).try_div((two - bh) * (two + bh))?).hi();
        let conv_dd = da[0].cauchy(&da[1], big);

        let mut ftilde: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; tri_count(big)]);
        for (idx, (al1, al2)) in tri_indices(big).enumerate() {
            let deg = al1 + al2;
            let x: [CInterval; 4] = std::array::from_fn(|c| da[c].get(al1, al2));
            let lin: [CInterval; 4] = match deg {
                0 => x,
                1 => std::array::from_fn(|c| {
                    let v = if al1 == 1 { vprime[c] } else { vprime[c].conj() };
                    x[c] - v.scale(g * db)
                }),
                _ => {
                    let mu = mu_iv(al1, al2, eig.lambda);
                    let mup = mu_iv(al1, al2, lp);
                    let a: [CInterval; 4] = std::array::from_fn(|c| a0i[c].get(al1, al2));
                    [
                        mu * x[0] - x[1] - conv_lin.get(al1, al2) + (mup * a[0]).scale(db),
                        mu * x[1] - x[2] + (mup * a[1]).scale(db),
                        mu * x[2] - x[3] + (mup * a[2]).scale(db),
                        mu * x[3] + x[0] + x[2].scale(b0) + (mup * a[3] + a[2]).scale(db),
                    ]
                }
            };
            let db2 = db.sqr();
            let gsec: [f64; 4] = match deg {
                0 => [0.0; 4],
                1 => {
                    let w = [0.0, 1.0, 2.0, 3.0];
                    let w2 = [0.0, 0.0, 2.0, 6.0];
                    std::array::from_fn(|c| {
                        let t = Interval::point(lpp_mag) * w[c] + Interval::point(lp_sq) * w2[c];
                        (t * db2 * g * 0.5).hi()
                    })
                }
                _ => {
                    let s = Interval::point((al1 + al2) as f64).sqr();
                    let d = Interval::point(al1 as f64 - al2 as f64).sqr();
                    let mup_mag = ((s.try_div(two - bh)? + d.try_div(two + bh)?).sqrt()? * 0.25).hi();
                    let mupp_mag = ((s.try_div((two - bh).powi(3))? + d.try_div((two + bh).powi(3))?).sqrt()?
                        * 0.125)
                        .hi();
                    std::array::from_fn(|c| {
                        let mut t = mul_up(mul_up(mup_mag, dba.hi()), x[c].mag());
                        if c == 0 {
                            t = add_up(t, conv_dd.get(al1, al2).mag());
                        }
                        if c == 3 {
                            t = add_up(t, mul_up(dba.hi(), x[2].mag()));
                        }
                        if deg < order {
                            let amax = a0i[c].get(al1, al2).mag().max(a1i[c].get(al1, al2).mag());
                            let sec = mul_up(mul_up(0.5, db2.hi()), mul_up(mupp_mag, amax));
                            t = add_up(t, sec);
                        }
                        t
                    })
                }
            };
            for c in 0..4 {
                let v = add_up(add_up(f0[c].data()[idx].mag(), lin[c].mag()), gsec[c]);
                ftilde[c][idx] = v;
            }
        }

        // Y
        let nup: Vec<f64> = powers(nui, big).iter().map(|p| p.hi()).collect();
        let degs_big = tri_degrees(big);
        let mut y = [Interval::ZERO; 4];
        for (c, yc) in y.iter_mut().enumerate() {
            let mut total = 0.0;
            for r in 0..nt {
                let row = c * nt + r;
                let mut s = 0.0;
                for d in 0..4 {
                    for sidx in 0..nt {
                        let f = ftilde[d][sidx];
                        if f != 0.0 {
                            s = add_up(s, mul_up(self.j.mag(row, d * nt + sidx), f));
                        }
                    }
                }
                total = add_up(total, mul_up(s, nup[degs_big[r]]));
            }
            for (idx, (al1, al2)) in tri_indices(big).enumerate().skip(nt) {
                let f = ftilde[c][idx];
                if f != 0.0 {
                    let m = mu_iv(al1, al2, eig.lambda).abs().recip()?.hi();
                    total = add_up(total, mul_up(mul_up(m, f), nup[degs_big[idx]]));
                }
            }
            *yc = Interval::new(0.0, total)?;
        }

        // Z1, Z2
        let nn = Interval::point(order as f64);
        let sq0 = (two - b0).sqrt()?;
        let tail = Interval::point(2.0).try_div(nn * sq0)?;
        let tail_t = Interval::point(2.0).try_div(sq0)?;
        let kb_den = ((two - bh) * (two + bh)).sqrt()? * 2.0;
        let iv = |x: f64| Interval::new(0.0, x).expect("nonnegative bound");
        let k = |i: usize, jj: usize| iv(self.k[i][jj]);
        let kbar: [Interval; 4] = std::array::from_fn(|i| {
            let mut s = Interval::ZERO;
            for jj in 0..4 {
                if jj != i {
                    s += iv(self.kt[i][jj]);
                }
            }
            (s + iv(self.kt[i][i]).max(tail_t)).try_div(kb_den).expect("positive")
        });
        let norm_a0: [Interval; 4] = std::array::from_fn(|c| taylor_norm(&a0i[c], nui));
        let norm_da: [Interval; 4] = std::array::from_fn(|c| taylor_norm(&da[c], nui));
        let sda = norm_da[0] + norm_da[1];
        let z1 = [
            tail * (Interval::ONE + norm_a0[0] + norm_a0[1]) + k(0, 0).max(tail) * sda + dba * (kbar[0] + k(0, 3)),
            tail + k(1, 0) * sda + dba * (kbar[1] + k(1, 3)),
            tail + k(2, 0) * sda + dba * (kbar[2] + k(2, 3)),
            tail * (Interval::ONE + b0.abs()) + k(3, 0) * sda + dba * (kbar[3] + k(3, 3).max(tail)),
        ];
        let z2 = [
            k(0, 0).max(tail) * 2.0,
            k(1, 0) * 2.0,
            k(2, 0) * 2.0,
            k(3, 0) * 2.0,
        ];
        Ok(ManifoldBounds {
            y,
            z0: self.z0,
            z1,
            z2,
        })
    }
}

/// Solves, builds and validates on `[beta0, beta1]` in one call.
pub fn validate_manifold_range(
    beta0: f64,
    beta1: f64,
    order: usize,
    gamma: f64,
    nu: f64,
) -> Result<ManifoldProof, ManifoldError> {
    let a0 = newton_solve(beta0, order, gamma, None)?;
    let a1 = newton_solve(beta1, order, gamma, Some(&a0))?;
    ManifoldOperator::build(beta0, gamma, nu, &a0)?.validate(beta1, &a1)
}

/// Checks one scaling at a single parameter value.
/// Largest `Z0 + Z1` over components when the single-parameter proof at
/// scale `gamma` succeeds.
fn gamma_linear_term(beta: f64, order: usize, gamma: f64, nu: f64) -> Option<f64> {
    let a = newton_solve(beta, order, gamma, None).ok()?;
    let op = ManifoldOperator::build(beta, gamma, nu, &a).ok()?;
    let b = op.bounds(beta, &a).ok()?;
    radii_check(&b.polys()).ok()?;
    Some((0..4).map(|j| (b.z0[j] + b.z1[j]).hi()).fold(0.0, f64::max))
}

/// Threshold actually used at `beta`: `eta`, unless the scale independent
/// floor of `Z0 + Z1` already exceeds it, in which case the midpoint
/// between that floor and 1.
pub fn effective_eta(beta: f64, order: usize, nu: f64, eta: f64) -> Result<f64, ManifoldError> {
    let floor = gamma_linear_term(beta, order, GAMMA_FLOOR_PROBE, nu).ok_or(ManifoldError::NoScaling(beta))?;
    if floor < eta {
        Ok(eta)
    } else if floor < 1.0 {
        Ok(0.5 * (1.0 + floor))
    } else {
        Err(ManifoldError::NoScaling(beta))
    }
}

const GAMMA_FLOOR_PROBE: f64 = 1.0 / 64.0;
const GAMMA_RATIO: f64 = 1.001;

/// Largest eigenvector scale for which the proof at a single parameter value
/// succeeds with `Z0 + Z1 <= eta`, by doubling and then geometric bisection.
/// Returns the scale and the threshold that was applied.
pub fn maximize_gamma(beta: f64, order: usize, nu: f64, eta: f64) -> Result<(f64, f64), ManifoldError> {
    const CAP: usize = 32;
    let mut evals = 0;
    let mut eta = eta;
    let ok = |g: f64, eta: f64, evals: &mut usize| {
        *evals += 1;
        gamma_linear_term(beta, order, g, nu).is_some_and(|z| z <= eta)
    };
    let (mut good, mut bad);
    if ok(1.0, eta, &mut evals) {
        good = 1.0;
        bad = 2.0;
        while evals < CAP && ok(bad, eta, &mut evals) {
            good = bad;
            bad *= 2.0;
        }
    } else {
        bad = 1.0;
        good = 0.5;
        loop {
            if ok(good, eta, &mut evals) {
                break;
            }
            bad = good;
            good *= 0.5;
            if good < GAMMA_FLOOR_PROBE {
                let raised = effective_eta(beta, order, nu, eta)?;
                if raised == eta {
                    return Err(ManifoldError::NoScaling(beta));
                }
                eta = raised;
                bad = 1.0;
                good = 0.5;
                if ok(1.0, eta, &mut evals) {
                    good = 1.0;
                    bad = 2.0;
                    while evals < CAP && ok(bad, eta, &mut evals) {
                        good = bad;
                        bad *= 2.0;
                    }
                    break;
                }
            }
            if evals >= CAP {
                return Err(ManifoldError::NoScaling(beta));
            }
        }
    }
    while evals < CAP && bad / good > GAMMA_RATIO {
        let mid = (good * bad).sqrt();
        if ok(mid, eta, &mut evals) {
            good = mid;
        } else {
            bad = mid;
        }
    }
    Ok((good, eta))
}

/// `sum a_alpha rho^|alpha| e^{i psi (alpha1 - alpha2)}` for one component,
/// with `k` derivatives in `psi`.
fn eval_circle_f64(a: &Taylor2Seq<Complex64>, rho: f64, psi: f64, k: u32) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for ((a1, a2), z) in tri_indices(a.order()).zip(a.data()) {
        let w = a1 as f64 - a2 as f64;
        let d = Complex64::new(0.0, w).powu(k);
        s += z * rho.powi((a1 + a2) as i32) * Complex64::from_polar(1.0, psi * w) * d;
    }
    s
}

/// Real manifold point `P(psi)` on the circle of radius `rho`.
pub fn eval_real(a: &ManifoldCoeffs, rho: f64, psi: f64) -> [f64; 4] {
    std::array::from_fn(|c| eval_circle_f64(&a.comps[c], rho, psi, 0).re)
}

/// `dP/dpsi`.
pub fn eval_real_dpsi(a: &ManifoldCoeffs, rho: f64, psi: f64) -> [f64; 4] {
    std::array::from_fn(|c| eval_circle_f64(&a.comps[c], rho, psi, 1).re)
}

/// `d^2P/dpsi^2`.
pub fn eval_real_dpsi2(a: &ManifoldCoeffs, rho: f64, psi: f64) -> [f64; 4] {
    std::array::from_fn(|c| eval_circle_f64(&a.comps[c], rho, psi, 2).re)
}

/// Enclosure of the `k`-th `psi` derivative of `Re sum a_alpha rho^|alpha| e^{i psi (alpha1-alpha2)}`
/// for an interval `psi` and interval coefficients.
pub fn eval_real_iv(a: &Taylor2Seq<CInterval>, rho: Interval, psi: Interval, k: u32) -> Interval {
    let order = a.order();
    let rp = powers(rho, order.max(1));
    let maxw = order as i64;
    let cis: Vec<CInterval> = (-maxw..=maxw)
        .map(|w| CInterval::cis(psi * Interval::point(w as f64)))
        .collect();
    let mut s = CInterval::ZERO;
    for ((a1, a2), z) in tri_indices(order).zip(a.data()) {
        let w = a1 as i64 - a2 as i64;
        let mut term = (*z * cis[(w + maxw) as usize]).scale(rp[a1 + a2]);
        // multiply by (i w)^k
        for _ in 0..k {
            term = CInterval::new(-term.im, term.re).scale(Interval::point(w as f64));
        }
        s += term;
    }
    s.re
}

/// `sum |a_alpha| rho^|alpha| |alpha1 - alpha2|^p`.
pub fn weighted_abs_sum(a: &Taylor2Seq<CInterval>, rho: Interval, p: u32) -> Interval {
    let rp = powers(rho, a.order().max(1));
    tri_indices(a.order())
        .zip(a.data())
        .map(|((a1, a2), z)| z.abs() * rp[a1 + a2] * Interval::point((a1 as f64 - a2 as f64).abs()).powi(p))
        .sum()
}

/// Real-valued parameterization of the local stable manifold in polar form,
/// used as the right boundary condition of the connecting orbit problem.
#[derive(Clone, Debug)]
pub struct RealManifold {
    pub coeffs: ManifoldCoeffs,
    pub rho: f64,
}

impl RealManifold {
    pub fn point(&self, psi: f64) -> [f64; 4] {
        eval_real(&self.coeffs, self.rho, psi)
    }

    pub fn dpsi(&self, psi: f64) -> [f64; 4] {
        eval_real_dpsi(&self.coeffs, self.rho, psi)
    }
}
