//! Uniform validation of the orbit problem on a parameter segment.
//!
//! `A` is a floating point inverse of the finite Jacobian at `(beta0, x0)`,
//! extended by `1/(2k)` on the diagonal tail. Bounds are split into the
//! six blocks `(eta1, eta2, F1, .., F4)`.

use crate::bvp::{jacobian_generic, BvpError, ChebOrbit};
use crate::interval::{add_up, mul_up, Interval};
use crate::linalg::{self, ColMajor};
use crate::manifold::{derivative_bound_h, eval_real_iv, weighted_abs_sum, IntervalCoeffs, ManifoldCoeffs};
use crate::radii::{radii_check, radii_coeffs, RadiiOutcome};
use crate::seq::{cheb_conv, cheb_dual_bound, cheb_norm, cheb_norm_bound, cheb_weights, opnorm_cheb_bound, powers, qk_estimates};

/// `(start, len)` of block `b` in the unknown and equation layout.
fn block(b: usize, m: usize) -> (usize, usize) {
    match b {
        0 => (0, 1),
        1 => (1, 1),
        _ => (2 + (b - 2) * m, m),
    }
}

fn iv(x: &[f64]) -> Vec<Interval> {
    x.iter().map(|v| Interval::point(*v)).collect()
}

fn at(y: &[Interval], i: usize) -> Interval {
    y.get(i).copied().unwrap_or(Interval::ZERO)
}

/// `y_{k+1} - y_{k-1}`.
fn shift(y: &[Interval], k: usize) -> Interval {
    at(y, k + 1) - at(y, k - 1)
}

fn alt(y: &[Interval]) -> Interval {
    let mut s = y[0];
    for (k, v) in y.iter().enumerate().skip(1) {
        if k % 2 == 0 {
            s += *v * 2.0;
        } else {
            s -= *v * 2.0;
        }
    }
    s
}

fn total(y: &[Interval]) -> Interval {
    let mut s = y[0];
    for v in y.iter().skip(1) {
        s += *v * 2.0;
    }
    s
}

fn nonneg(x: f64) -> Interval {
    Interval::new(0.0, x).expect("nonnegative upper bound")
}

/// Chart values entering the `k = 0` rows of the expansion in `s`.
#[derive(Clone, Debug)]
pub struct ChartTerms {
    /// `P_beta0(psi0)`.
    pub p0: [Interval; 4],
    /// `DeltaP(psi0)`.
    pub dp0: [Interval; 4],
    /// `P_beta0'` over the hull of `psi0, psi1`.
    pub p0_prime: [Interval; 4],
    /// `DeltaP'` over the same hull.
    pub dp_prime: [Interval; 4],
}

impl ChartTerms {
    pub fn new(a0: &IntervalCoeffs, da: &IntervalCoeffs, rho: f64, psi0: f64, psi1: f64) -> Self {
        let rho = Interval::point(rho);
        let p = Interval::point(psi0);
        let hull = p.hull(Interval::point(psi1));
        ChartTerms {
            p0: std::array::from_fn(|c| eval_real_iv(&a0[c], rho, p, 0)),
            dp0: std::array::from_fn(|c| eval_real_iv(&da[c], rho, p, 0)),
            p0_prime: std::array::from_fn(|c| eval_real_iv(&a0[c], rho, hull, 1)),
            dp_prime: std::array::from_fn(|c| eval_real_iv(&da[c], rho, hull, 1)),
        }
    }
}

/// Coefficients of `F(beta_s, x0 + s Dx) = S0 + s S1 + s^2 S2 + s^3 S3`
/// with the approximate chart. Each `S_i` has length `2 + 4 * 2m`: the two
/// symmetry rows, then each component for `k = 0..2m-1`.
pub fn s_coefficients(beta0: Interval, dbeta: Interval, x0: &ChebOrbit, x1: &ChebOrbit, chart: &ChartTerms) -> [Vec<Interval>; 4] {
    let m = x0.m();
    let len = 2 * m;
    let xa: [Vec<Interval>; 4] = std::array::from_fn(|c| iv(&x0.x[c]));
    let d: [Vec<Interval>; 4] = std::array::from_fn(|c| {
        x1.x[c].iter().zip(&x0.x[c]).map(|(a, b)| Interval::point(*a) - Interval::point(*b)).collect()
    });
    let l0 = Interval::point(x0.l);
    let dl = Interval::point(x1.l) - l0;
    let dpsi = Interval::point(x1.psi) - Interval::point(x0.psi);
    let mut s: [Vec<Interval>; 4] = std::array::from_fn(|_| vec![Interval::ZERO; 2 + 4 * len]);
    s[0][0] = alt(&xa[1]);
    s[1][0] = alt(&d[1]);
    s[0][1] = alt(&xa[3]);
    s[1][1] = alt(&d[3]);

    let plus = |mut a: Vec<Interval>, b: &[Interval]| {
        for (i, x) in b.iter().enumerate() {
            a[i] += *x;
        }
        a
    };
    let neg_comb = |a: &[Interval], b: &[Interval], beta: Interval| -> Vec<Interval> {
        a.iter().zip(b).map(|(p, q)| -*p - beta * *q).collect()
    };
    // polynomial coefficients of g in s, per component
    let g: [[Vec<Interval>; 3]; 4] = [
        [
            plus(cheb_conv(&xa[0], &xa[1]), &xa[1]),
            plus(plus(cheb_conv(&xa[0], &d[1]), &cheb_conv(&d[0], &xa[1])), &d[1]),
            cheb_conv(&d[0], &d[1]),
        ],
        [xa[2].clone(), d[2].clone(), Vec::new()],
        [xa[3].clone(), d[3].clone(), Vec::new()],
        [
            neg_comb(&xa[0], &xa[2], beta0),
            {
                let mut v = neg_comb(&d[0], &d[2], beta0);
                for (i, x) in xa[2].iter().enumerate() {
                    v[i] -= dbeta * *x;
                }
                v
            },
            d[2].iter().map(|q| -dbeta * *q).collect(),
        ],
    ];
    for c in 0..4 {
        let base = 2 + c * len;
        s[0][base] = total(&xa[c]) - chart.p0[c];
        s[1][base] = total(&d[c]) - chart.dp0[c] - dpsi * chart.p0_prime[c];
        s[2][base] = -(dpsi * chart.dp_prime[c]);
        for k in 1..len {
            let two_k = Interval::point(2.0 * k as f64);
            let (g0, g1, g2) = (shift(&g[c][0], k), shift(&g[c][1], k), shift(&g[c][2], k));
            s[0][base + k] = two_k * at(&xa[c], k) + l0 * g0;
            s[1][base + k] = two_k * at(&d[c], k) + l0 * g1 + dl * g0;
            s[2][base + k] = l0 * g2 + dl * g1;
            s[3][base + k] = dl * g2;
        }
    }
    s
}

/// Bounds of the six radii polynomials.
#[derive(Clone, Debug, PartialEq)]
pub struct BvpBounds {
    pub y: [Interval; 6],
    pub z0: [Interval; 6],
    pub z1: [Interval; 6],
    pub z2: [Interval; 6],
    pub z3: [Interval; 6],
}

impl BvpBounds {
    pub fn polys(&self) -> Vec<Vec<Interval>> {
        (0..6)
            .map(|l| {
                let mut p = radii_coeffs(self.y[l], self.z0[l], self.z1[l], self.z2[l], Interval::ZERO);
                p[3] = self.z3[l];
                p
            })
            .collect()
    }

    /// `Z(r) = (Z0 + Z1) r + Z2 r^2 + Z3 r^3` for each block.
    pub fn z_of_r(&self, r: f64) -> [f64; 6] {
        let r = Interval::point(r);
        std::array::from_fn(|l| ((self.z0[l] + self.z1[l]) * r + self.z2[l] * r * r + self.z3[l] * r * r * r).hi())
    }
}

/// Validated orbit segment.
#[derive(Clone, Debug)]
pub struct BvpProof {
    pub beta0: f64,
    pub beta1: f64,
    pub nu: f64,
    pub rho: f64,
    pub r_manifold: f64,
    pub bounds: BvpBounds,
    pub radii: RadiiOutcome,
    pub x0: ChebOrbit,
    pub x1: ChebOrbit,
}

impl BvpProof {
    pub fn r(&self) -> f64 {
        self.radii.r
    }

    /// Enclosure of the true `L` at the segment start.
    pub fn l_enclosure(&self) -> Interval {
        Interval::ball(self.x0.l, self.r())
    }
}

/// Data at `(beta0, x0)` reused for every `beta1`.
#[derive(Clone, Debug)]
pub struct BvpOperator {
    pub beta0: f64,
    pub nu: f64,
    pub nu_tilde: f64,
    pub rho: f64,
    pub x0: ChebOrbit,
    pub a0: ManifoldCoeffs,
    pub a: ColMajor,
    pub z0: [Interval; 6],
    /// `||A_{l,i}||` in the norm matching block `(l, i)`, tail included.
    pub anorm: [[f64; 6]; 6],
    /// `||A_{l,(i,0)}||` of the column through the `k = 0` entry of block `i`.
    pub acol0: [[f64; 6]; 6],
}

impl BvpOperator {
    pub fn build(beta0: f64, x0: &ChebOrbit, a0: &ManifoldCoeffs, nu: f64, nu_tilde: f64, rho: f64) -> Result<Self, BvpError> {
        if !(rho > 0.0 && rho < nu_tilde) {
            return Err(BvpError::RhoNotLessThanNu);
        }
        if !(nu >= 1.0) {
            return Err(BvpError::Size(0));
        }
        let m = x0.m();
        if m < 4 {
            return Err(BvpError::Size(m));
        }
        let n = 4 * m + 2;
        let ai = a0.to_intervals();
        let dp: [Interval; 4] = std::array::from_fn(|c| eval_real_iv(&ai[c], Interval::point(rho), Interval::point(x0.psi), 1));
        let xs: [Vec<Interval>; 4] = std::array::from_fn(|c| iv(&x0.x[c]));
        let jac = jacobian_generic(Interval::point(beta0), Interval::point(x0.l), &xs, dp);
        let mut mid = ColMajor::zeros(n, n);
        let mut rad = ColMajor::zeros(n, n);
        for j in 0..n {
            for i in 0..n {
                let v = jac[j * n + i];
                if v != Interval::ZERO {
                    let c = v.mid();
                    mid.set(i, j, c);
                    rad.set(i, j, (v.hi() - c).max(c - v.lo()).next_up());
                }
            }
        }
        drop(jac);
        let a = linalg::inverse(&mid)?;
        let b = linalg::residual_bound_dense(&a, &mid, &rad)?;
        let nui = Interval::point(nu);
        let tail_inv = 1.0 / (2.0 * m as f64);
        let norms = |mat: &ColMajor, diag_tail: bool| -> [[f64; 6]; 6] {
            std::array::from_fn(|l| {
                std::array::from_fn(|i| {
                    let (rs, rl) = block(l, m);
                    let (cs, cl) = block(i, m);
                    let mag = |r: usize, c: usize| mat.get(rs + r, cs + c).abs();
                    match (l < 2, i < 2) {
                        (true, true) => mag(0, 0),
                        (true, false) => cheb_dual_bound(cl, nui, |k| mag(0, k)),
                        (false, true) => cheb_norm_bound(rl, nui, |k| mag(k, 0)),
                        (false, false) => {
                            let tail = if diag_tail && l == i { tail_inv.next_up() } else { 0.0 };
                            opnorm_cheb_bound(m, nui, tail, mag)
                        }
                    }
                })
            })
        };
        let bn = norms(&b, false);
        let z0: [Interval; 6] = std::array::from_fn(|l| nonneg(bn[l].iter().fold(0.0, |s, v| add_up(s, *v))));
        let anorm = norms(&a, true);
        let acol0 = std::array::from_fn(|l| {
            std::array::from_fn(|i| {
                if i < 2 {
                    return 0.0;
                }
                let (rs, rl) = block(l, m);
                let (cs, _) = block(i, m);
                if l < 2 {
                    a.get(rs, cs).abs()
                } else {
                    cheb_norm_bound(rl, nui, |k| a.get(rs + k, cs).abs())
                }
            })
        });
        Ok(BvpOperator {
            beta0,
            nu,
            nu_tilde,
            rho,
            x0: x0.clone(),
            a0: a0.clone(),
            a,
            z0,
            anorm,
            acol0,
        })
    }

    pub fn m(&self) -> usize {
        self.x0.m()
    }

    pub fn validate(&self, beta1: f64, x1: &ChebOrbit, a1: &ManifoldCoeffs, r_manifold: f64) -> Result<BvpProof, BvpError> {
        let bounds = self.bounds(beta1, x1, a1, r_manifold)?;
        let radii = radii_check(&bounds.polys())?;
        Ok(BvpProof {
            beta0: self.beta0,
            beta1,
            nu: self.nu,
            rho: self.rho,
            r_manifold,
            bounds,
            radii,
            x0: self.x0.clone(),
            x1: x1.clone(),
        })
    }

    /// `Y`, `Z1`, `Z2`, `Z3` on the segment towards `(beta1, x1)`, with
    /// chart coefficients `a1` at `beta1` and manifold error `r_manifold`.
    pub fn bounds(&self, beta1: f64, x1: &ChebOrbit, a1: &ManifoldCoeffs, r_manifold: f64) -> Result<BvpBounds, BvpError> {
        let m = self.m();
        if x1.m() != m {
            return Err(BvpError::Size(x1.m()));
        }
        let n = 4 * m + 2;
        let x0 = &self.x0;
        let nui = Interval::point(self.nu);
        let nt = Interval::point(self.nu_tilde);
        let rho = Interval::point(self.rho);
        let b0 = Interval::point(self.beta0);
        let b1 = Interval::point(beta1);
        let dbeta = b1 - b0;
        let a0i = self.a0.to_intervals();
        let a1i = a1.to_intervals();
        let da: IntervalCoeffs = std::array::from_fn(|c| &a1i[c] - &a0i[c]);
        let chart = ChartTerms::new(&a0i, &da, self.rho, x0.psi, x1.psi);
        let rm = Interval::point(r_manifold);
        let a = &self.a;
        let amag = |i: usize, j: usize| a.get(i, j).abs();

        // Y
        let s = s_coefficients(b0, dbeta, x0, x1, &chart);
        let len = 2 * m;
        let fin_idx = |row: usize| -> usize {
            // equation row of the finite system to index in S
            if row < 2 {
                row
            } else {
                let c = (row - 2) / m;
                let k = (row - 2) % m;
                2 + c * len + k
            }
        };
        let mut v = vec![0.0f64; n];
        for si in &s {
            let fin: Vec<Interval> = (0..n).map(|r| si[fin_idx(r)]).collect();
            let prod = a.mul_ivec(&fin);
            for (vi, p) in v.iter_mut().zip(&prod) {
                *vi = add_up(*vi, p.mag());
            }
        }
        let mu = ((rho / nt) * rm).hi();
        for c in 0..4 {
            let col = 2 + c * m;
            for (r, vi) in v.iter_mut().enumerate() {
                *vi = add_up(*vi, mul_up(amag(r, col), mu));
            }
        }
        let w = cheb_weights(len, nui);
        let wup: Vec<f64> = w.iter().map(|x| x.hi()).collect();
        let mut y = [Interval::ZERO; 6];
        y[0] = nonneg(v[0]);
        y[1] = nonneg(v[1]);
        for c in 0..4 {
            let mut t = 0.0;
            for k in 0..m {
                t = add_up(t, mul_up(v[2 + c * m + k], wup[k]));
            }
            for k in m..len {
                let mut sk = Interval::ZERO;
                for si in &s {
                    sk += si[2 + c * len + k].abs();
                }
                let wk = (sk / Interval::point(2.0 * k as f64)).hi();
                t = add_up(t, mul_up(wk, wup[k]));
            }
            y[2 + c] = nonneg(t);
        }

        // constants
        let l0 = Interval::point(x0.l);
        let dl = Interval::point(x1.l) - l0;
        let dl_abs = dl.abs();
        let dpsi = Interval::point(x1.psi) - Interval::point(x0.psi);
        let xa: [Vec<Interval>; 4] = std::array::from_fn(|c| iv(&x0.x[c]));
        let dx: [Vec<Interval>; 4] = std::array::from_fn(|c| {
            x1.x[c].iter().zip(&x0.x[c]).map(|(p, q)| Interval::point(*p) - Interval::point(*q)).collect()
        });
        let two_nu = nui * 2.0;
        let num = nui.powi(m as u32);
        let inv_num = Interval::ONE.try_div(num)?;
        let lam_t: [Interval; 4] = std::array::from_fn(|c| weighted_abs_sum(&a0i[c], rho, 2));
        let lam: [Interval; 4] = std::array::from_fn(|c| dpsi.abs() * lam_t[c] + weighted_abs_sum(&da[c], rho, 1));
        let dh = derivative_bound_h(rm, nt, rho)? * rho * 2.0;
        let w1: [Interval; 4] = std::array::from_fn(|c| lam[c] + dh + inv_num);
        let norm_x: [Interval; 4] = std::array::from_fn(|c| cheb_norm(&xa[c], nui));
        let norm_d: [Interval; 4] = std::array::from_fn(|c| cheb_norm(&dx[c], nui));
        let w2: [Interval; 4] = [
            lam_t[0] + two_nu * 2.0 * (norm_x[0] + norm_x[1] + norm_d[0] + norm_d[1] + Interval::ONE + l0 + dl_abs),
            lam_t[1] + two_nu * 2.0,
            lam_t[2] + two_nu * 2.0,
            lam_t[3] + two_nu * 2.0 * (b1 + Interval::ONE),
        ];
        let w3 = two_nu * 3.0;

        // z, zhat, zhathat for k = 1..m-1
        let (q1, qh1) = qk_estimates(&xa[0], nui, m, m);
        let (q2, qh2) = qk_estimates(&xa[1], nui, m, m);
        let (dq1, _) = qk_estimates(&dx[0], nui, m, m);
        let (dq2, _) = qk_estimates(&dx[1], nui, m, m);
        let inv_nu = Interval::ONE.try_div(nui)?;
        let inv_pows = powers(inv_nu, m);
        let l0dl = l0 + dl_abs;
        let c6 = (l0 * dbeta + dl * b0).abs() + dl_abs + (dl * dbeta).abs();
        let mut z = [vec![0.0f64; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]];
        for k in 1..m {
            let p = inv_pows[k - 1] * 2.0;
            let om = |q: &[f64]| nonneg(add_up(q[k - 1], q[k + 1]));
            z[0][k] = (dl_abs * (p + om(&q1) + om(&q2)) + l0dl * (om(&dq1) + om(&dq2)) + l0 * (om(&qh1) + om(&qh2))).hi();
            z[1][k] = (dl_abs * p).hi();
            z[2][k] = (dl_abs * p).hi();
            z[3][k] = (c6 * p).hi();
        }
        let c01 = cheb_conv(&xa[0], &dx[1]);
        let c10 = cheb_conv(&dx[0], &xa[1]);
        let cdd = cheb_conv(&dx[0], &dx[1]);
        let mut zh: [Vec<Interval>; 4] = std::array::from_fn(|_| vec![Interval::ZERO; m]);
        let mut zhh: [Vec<Interval>; 4] = std::array::from_fn(|_| vec![Interval::ZERO; m]);
        for k in 1..m {
            zh[0][k] = shift(&dx[1], k) + shift(&c01, k) + shift(&c10, k);
            zh[1][k] = shift(&dx[2], k);
            zh[2][k] = shift(&dx[3], k);
            zh[3][k] = dbeta * shift(&xa[2], k) + shift(&dx[0], k) + b0 * shift(&dx[2], k);
            zhh[0][k] = shift(&cdd, k);
            zhh[3][k] = dbeta * shift(&dx[2], k);
        }
        let edge: [f64; 4] = std::array::from_fn(|i| {
            let f = if i == 3 { b0 + Interval::ONE } else { Interval::ONE };
            (l0 * f * inv_num).hi()
        });
        // per equation row, sum over blocks i of the k >= 1 part of |A z~_1|
        let mut zrow = vec![0.0f64; n];
        for i in 0..4 {
            let cs = 2 + i * m;
            let mut hat = vec![Interval::ZERO; n];
            let mut hathat = vec![Interval::ZERO; n];
            for k in 1..m {
                let col = a.col(cs + k);
                let (h, hh) = (zh[i][k], zhh[i][k]);
                for r in 0..n {
                    let ar = col[r];
                    if ar == 0.0 {
                        continue;
                    }
                    hat[r] += h * ar;
                    if hh != Interval::ZERO {
                        hathat[r] += hh * ar;
                    }
                    zrow[r] = add_up(zrow[r], mul_up(ar.abs(), z[i][k]));
                }
            }
            for r in 0..n {
                let e = mul_up(amag(r, cs + m - 1), edge[i]);
                zrow[r] = add_up(add_up(add_up(zrow[r], e), hat[r].mag()), hathat[r].mag());
            }
        }

        // tails of the diagonal blocks
        let nm_over_m = (num / Interval::point(m as f64)).hi();
        let shift_tail = (nui + inv_nu) / Interval::point(2.0 * m as f64);
        let last = |y: &[Interval]| y[m - 1].abs();
        let cxx = cheb_conv(&xa[0], &xa[1]);
        let mut conv_tail = Interval::ZERO;
        let pw = powers(nui, len);
        for k in m..len {
            let t = shift(&cxx, k).abs() + shift(&c01, k).abs() + shift(&c10, k).abs() + shift(&cdd, k).abs();
            conv_tail += t * pw[k] / Interval::point(k as f64);
        }
        let nmm = Interval::new(0.0, nm_over_m)?;
        let ztail = [
            shift_tail * l0dl * (norm_x[0] + norm_x[1] + norm_d[0] + norm_d[1] + Interval::ONE)
                + conv_tail
                + nmm * (last(&dx[1]) + last(&xa[1])),
            shift_tail * l0dl + nmm * (last(&xa[2]) + last(&dx[2])),
            shift_tail * l0dl + nmm * (last(&xa[3]) + last(&dx[3])),
            shift_tail * l0dl * (Interval::ONE + b1) + nmm * (b1 * (last(&xa[2]) + last(&dx[2])) + last(&xa[0]) + last(&dx[0])),
        ];

        let mut z1 = [Interval::ZERO; 6];
        let mut z2 = [Interval::ZERO; 6];
        let mut z3 = [Interval::ZERO; 6];
        for l in 0..6 {
            let an = &self.anorm[l];
            let mut t = (nonneg(an[0]) + nonneg(an[1])) * inv_num;
            for i in 0..4 {
                t += w1[i] * nonneg(self.acol0[l][2 + i]);
                z2[l] += nonneg(an[2 + i]) * w2[i];
            }
            z3[l] = nonneg(an[2]) * w3;
            if l < 2 {
                t += nonneg(zrow[l]);
            } else {
                let (rs, _) = block(l, m);
                let mut acc = 0.0;
                for k in 0..m {
                    acc = add_up(acc, mul_up(zrow[rs + k], wup[k]));
                }
                t += nonneg(acc) + ztail[l - 2];
            }
            z1[l] = t;
        }
        Ok(BvpBounds {
            y,
            z0: self.z0,
            z1,
            z2,
            z3,
        })
    }
}
