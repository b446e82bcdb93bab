//! Dense floating point solves and rigorous residual bounds `|I - A M|`.
//!
//! The approximate inverse `A` is an ordinary float matrix. `M` is a sparse
//! matrix whose entries are intervals stored as midpoint and radius. Each
//! entry of `A M` is accumulated in round-to-nearest and the rounding error
//! is bounded a posteriori by `gamma_n sum |a_ik m_kj|`, so no rounding mode
//! switch is needed.

use faer::linalg::solvers::{DenseSolveCore, Solve};
use faer::Mat;
use num_complex::Complex64;

use crate::interval::{add_up, mul_up, up, CInterval, Interval};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinalgError {
    #[error("matrix is numerically singular")]
    Singular,
    #[error("dimension mismatch: {0}")]
    Shape(String),
}

/// Dense column-major float matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ColMajor {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl ColMajor {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ColMajor {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.rows + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[j * self.rows + i] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.data[j * self.rows + i] += v;
    }

    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.rows];
        for (j, xj) in x.iter().enumerate() {
            if *xj != 0.0 {
                for (yi, a) in y.iter_mut().zip(self.col(j)) {
                    *yi += a * xj;
                }
            }
        }
        y
    }

    /// Enclosure of `A x` for an interval vector `x`.
    pub fn mul_ivec(&self, x: &[Interval]) -> Vec<Interval> {
        let mut y = vec![Interval::ZERO; self.rows];
        for (j, xj) in x.iter().enumerate() {
            if *xj != Interval::ZERO {
                for (yi, a) in y.iter_mut().zip(self.col(j)) {
                    *yi += *xj * *a;
                }
            }
        }
        y
    }

    fn to_faer(&self) -> Mat<f64> {
        Mat::from_fn(self.rows, self.cols, |i, j| self.get(i, j))
    }

    fn from_faer(m: &Mat<f64>) -> Self {
        let mut out = ColMajor::zeros(m.nrows(), m.ncols());
        for j in 0..m.ncols() {
            out.data[j * m.nrows()..(j + 1) * m.nrows()].copy_from_slice(m.col_as_slice(j));
        }
        out
    }
}

fn check_finite(m: &Mat<f64>) -> Result<(), LinalgError> {
    for j in 0..m.ncols() {
        if m.col_as_slice(j).iter().any(|x| !x.is_finite()) {
            return Err(LinalgError::Singular);
        }
    }
    Ok(())
}

/// Approximate inverse by partial pivoting LU.
pub fn inverse(a: &ColMajor) -> Result<ColMajor, LinalgError> {
    if a.rows != a.cols {
        return Err(LinalgError::Shape(format!("{}x{}", a.rows, a.cols)));
    }
    let inv = a.to_faer().partial_piv_lu().inverse();
    check_finite(&inv)?;
    Ok(ColMajor::from_faer(&inv))
}

/// Solves `A x = b` by partial pivoting LU.
pub fn solve(a: &ColMajor, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    if a.rows != a.cols || b.len() != a.rows {
        return Err(LinalgError::Shape(format!("{}x{} vs {}", a.rows, a.cols, b.len())));
    }
    let lu = a.to_faer().partial_piv_lu();
    let mut rhs = Mat::from_fn(b.len(), 1, |i, _| b[i]);
    lu.solve_in_place(rhs.as_mut());
    check_finite(&rhs)?;
    Ok(rhs.col_as_slice(0).to_vec())
}

/// Sparse columns with interval entries stored as `(row, mid, rad)`.
#[derive(Clone, Debug, Default)]
pub struct SparseCols {
    pub rows: usize,
    pub cols: Vec<Vec<(usize, f64, f64)>>,
}

impl SparseCols {
    pub fn new(rows: usize, ncols: usize) -> Self {
        SparseCols {
            rows,
            cols: vec![Vec::new(); ncols],
        }
    }

    pub fn push(&mut self, row: usize, col: usize, v: Interval) {
        if v != Interval::ZERO {
            self.cols[col].push((row, v.mid(), v.rad()));
        }
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(Vec::len).sum()
    }

    /// Floating point midpoint as a dense matrix.
    pub fn to_dense_mid(&self) -> ColMajor {
        let mut m = ColMajor::zeros(self.rows, self.cols.len());
        for (j, col) in self.cols.iter().enumerate() {
            for &(i, v, _) in col {
                m.add(i, j, v);
            }
        }
        m
    }
}

/// Complex analogue of [`SparseCols`]: `(row, mid, rad_re, rad_im)`.
#[derive(Clone, Debug, Default)]
pub struct CSparseCols {
    pub rows: usize,
    pub cols: Vec<Vec<(usize, Complex64, f64, f64)>>,
}

impl CSparseCols {
    pub fn new(rows: usize, ncols: usize) -> Self {
        CSparseCols {
            rows,
            cols: vec![Vec::new(); ncols],
        }
    }

    pub fn push(&mut self, row: usize, col: usize, v: CInterval) {
        if v != CInterval::ZERO {
            self.cols[col].push((row, v.mid(), v.re.rad(), v.im.rad()));
        }
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(Vec::len).sum()
    }
}

/// Dense complex matrix in split column-major storage.
#[derive(Clone, Debug, PartialEq)]
pub struct CColMajor {
    pub n: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl CColMajor {
    pub fn zeros(n: usize) -> Self {
        CColMajor {
            n,
            re: vec![0.0; n * n],
            im: vec![0.0; n * n],
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let k = j * self.n + i;
        Complex64::new(self.re[k], self.im[k])
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, z: Complex64) {
        let k = j * self.n + i;
        self.re[k] = z.re;
        self.im[k] = z.im;
    }

    /// Upper bound on `|a_ij|`.
    #[inline]
    pub fn mag(&self, i: usize, j: usize) -> f64 {
        let k = j * self.n + i;
        up(self.re[k].hypot(self.im[k]))
    }
}

/// Upper bound for the relative accumulation constant `n u / (1 - n u)`.
fn gamma(n: usize) -> f64 {
    let u = f64::EPSILON / 2.0;
    let nu = up(n as f64 * u);
    up(nu / (1.0 - nu).next_down())
}

/// Tiny absolute term covering underflow in `n` products.
fn underflow(n: usize) -> f64 {
    up((2 * n + 2) as f64 * f64::from_bits(1))
}

/// Upper bounds on `|(I - A M)_ij|`, column-major `n x n`.
pub fn residual_bound(a: &ColMajor, m: &SparseCols) -> Result<Vec<f64>, LinalgError> {
    let n = a.rows;
    if a.cols != m.rows || m.cols.len() != n {
        return Err(LinalgError::Shape("residual".into()));
    }
    let mut out = vec![0.0; n * n];
    let mut c = vec![0.0; n];
    let mut s1 = vec![0.0; n];
    let mut s2 = vec![0.0; n];
    for (j, col) in m.cols.iter().enumerate() {
        c.fill(0.0);
        s1.fill(0.0);
        s2.fill(0.0);
        for &(k, mid, rad) in col {
            let ak = a.col(k);
            for i in 0..n {
                let p = ak[i] * mid;
                c[i] += p;
                s1[i] += p.abs();
            }
            if rad != 0.0 {
                for i in 0..n {
                    s2[i] += ak[i].abs() * rad;
                }
            }
        }
        let t = col.len();
        let g = gamma(t + 1);
        let scale = up(1.0 / (1.0 - g).next_down());
        let tiny = underflow(t);
        let dst = &mut out[j * n..(j + 1) * n];
        for i in 0..n {
            let delta = if i == j { 1.0 } else { 0.0 };
            let centre = up((delta - c[i]).abs());
            let err = add_up(mul_up(add_up(mul_up(g, s1[i]), s2[i]), scale), tiny);
            dst[i] = add_up(centre, err);
        }
    }
    Ok(out)
}

/// Complex analogue of [`residual_bound`].
pub fn residual_bound_complex(a: &CColMajor, m: &CSparseCols) -> Result<Vec<f64>, LinalgError> {
    let n = a.n;
    if m.rows != n || m.cols.len() != n {
        return Err(LinalgError::Shape("complex residual".into()));
    }
    let mut out = vec![0.0; n * n];
    let mut cr = vec![0.0; n];
    let mut ci = vec![0.0; n];
    let mut sr = vec![0.0; n];
    let mut si = vec![0.0; n];
    let mut rr = vec![0.0; n];
    let mut ri = vec![0.0; n];
    for (j, col) in m.cols.iter().enumerate() {
        cr.fill(0.0);
        ci.fill(0.0);
        sr.fill(0.0);
        si.fill(0.0);
        rr.fill(0.0);
        ri.fill(0.0);
        let mut any_rad = false;
        for &(k, z, dr, di) in col {
            let (xr, xi) = (&a.re[k * n..(k + 1) * n], &a.im[k * n..(k + 1) * n]);
            for i in 0..n {
                let p1 = xr[i] * z.re;
                let p2 = xi[i] * z.im;
                let p3 = xr[i] * z.im;
                let p4 = xi[i] * z.re;
                cr[i] += p1 - p2;
                ci[i] += p3 + p4;
                sr[i] += p1.abs() + p2.abs();
                si[i] += p3.abs() + p4.abs();
            }
            if dr != 0.0 || di != 0.0 {
                any_rad = true;
                for i in 0..n {
                    let (ar, ai) = (xr[i].abs(), xi[i].abs());
                    rr[i] += ar * dr + ai * di;
                    ri[i] += ar * di + ai * dr;
                }
            }
        }
        // each product difference adds one more rounding per term
        let t = 2 * col.len() + 1;
        let g = gamma(t + 1);
        let scale = up(1.0 / (1.0 - g).next_down());
        let tiny = underflow(2 * t);
        let dst = &mut out[j * n..(j + 1) * n];
        for i in 0..n {
            let delta = if i == j { 1.0 } else { 0.0 };
            let er = add_up(mul_up(add_up(mul_up(g, sr[i]), if any_rad { rr[i] } else { 0.0 }), scale), tiny);
            let ei = add_up(mul_up(add_up(mul_up(g, si[i]), if any_rad { ri[i] } else { 0.0 }), scale), tiny);
            let br = add_up(up((delta - cr[i]).abs()), er);
            let bi = add_up(up(ci[i].abs()), ei);
            dst[i] = up(up(add_up(mul_up(br, br), mul_up(bi, bi))).sqrt());
        }
    }
    Ok(out)
}

fn matmul_f64(a: &Mat<f64>, b: &Mat<f64>) -> Mat<f64> {
    let mut out = Mat::<f64>::zeros(a.nrows(), b.ncols());
    faer::linalg::matmul::matmul(
        out.as_mut(),
        faer::Accum::Replace,
        a.as_ref(),
        b.as_ref(),
        1.0,
        faer::Par::Seq,
    );
    out
}

/// Upper bounds on `|(I - A M)_ij|` for a dense interval matrix `M` given as
/// midpoint and radius, column-major.
///
/// The three products are formed by blocked floating point kernels. Whatever
/// the summation order, a sum of `n` products has error at most
/// `gamma_{n+1} sum |a_ik m_kj|`, and a computed sum of nonnegative terms is
/// at least `(1 - gamma_{n+1})` times the exact one.
pub fn residual_bound_dense(a: &ColMajor, m_mid: &ColMajor, m_rad: &ColMajor) -> Result<ColMajor, LinalgError> {
    let n = a.rows;
    if a.cols != n || m_mid.rows != n || m_mid.cols != n || m_rad.rows != n || m_rad.cols != n {
        return Err(LinalgError::Shape("dense residual".into()));
    }
    let fa = a.to_faer();
    let abs_a = Mat::from_fn(n, n, |i, j| a.get(i, j).abs());
    let c = matmul_f64(&fa, &m_mid.to_faer());
    let s1 = matmul_f64(&abs_a, &Mat::from_fn(n, n, |i, j| m_mid.get(i, j).abs()));
    let s2 = matmul_f64(&abs_a, &m_rad.to_faer());
    let g = gamma(n + 2);
    let scale = up(1.0 / (1.0 - g).next_down());
    let tiny = underflow(n);
    let mut out = ColMajor::zeros(n, n);
    for j in 0..n {
        let (cj, s1j, s2j) = (c.col_as_slice(j), s1.col_as_slice(j), s2.col_as_slice(j));
        for i in 0..n {
            let delta = if i == j { 1.0 } else { 0.0 };
            let err = add_up(mul_up(add_up(mul_up(g, s1j[i]), s2j[i]), scale), tiny);
            out.set(i, j, add_up(up((delta - cj[i]).abs()), err));
        }
    }
    Ok(out)
}
