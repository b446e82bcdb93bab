//! CSV samples of certified solutions.

use std::io::Write;
use std::str::FromStr;

use crate::bvp::{reconstruct_u, BvpError, ChebOrbit};
use crate::manifold::{eval_real, ManifoldCoeffs};

#[derive(Debug, thiserror::Error)]
pub enum ExportError {
    #[error("unknown export kind {0:?} (expected orbit, decay, manifold or u-profile)")]
    Kind(String),
    #[error("need at least 2 samples, got {0}")]
    Samples(usize),
    #[error(transparent)]
    Bvp(#[from] BvpError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportKind {
    /// `t, v1..v4, u` on `[-1, 1]`.
    Orbit,
    /// `k` and `log10 |x_k|` per component.
    Decay,
    /// Polar grid of the real chart and its four components.
    Manifold,
    /// `u` against physical time over the whole symmetric orbit.
    UProfile,
}

impl FromStr for ExportKind {
    type Err = ExportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "orbit" => Ok(ExportKind::Orbit),
            "decay" => Ok(ExportKind::Decay),
            "manifold" => Ok(ExportKind::Manifold),
            "u-profile" => Ok(ExportKind::UProfile),
            _ => Err(ExportError::Kind(s.into())),
        }
    }
}

fn grid(n: usize, lo: f64, hi: f64) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
}

fn row<W: Write>(w: &mut csv::Writer<W>, vals: &[f64]) -> Result<(), csv::Error> {
    w.write_record(vals.iter().map(|v| format!("{v:e}")))
}

/// Writes samples of `kind`. `samples` is the number of grid points per axis,
/// or the number of coefficients for `Decay`.
pub fn export<W: Write>(
    kind: ExportKind,
    orbit: &ChebOrbit,
    chart: &ManifoldCoeffs,
    samples: usize,
    out: W,
) -> Result<(), ExportError> {
    if samples < 2 {
        return Err(ExportError::Samples(samples));
    }
    let mut w = csv::Writer::from_writer(out);
    match kind {
        ExportKind::Orbit => {
            w.write_record(["t", "v1", "v2", "v3", "v4", "u"])?;
            for t in grid(samples, -1.0, 1.0) {
                let v = orbit.eval(t);
                row(&mut w, &[t, v[0], v[1], v[2], v[3], reconstruct_u(v[0])?])?;
            }
        }
        ExportKind::Decay => {
            w.write_record(["k", "log10_abs_x1", "log10_abs_x2", "log10_abs_x3", "log10_abs_x4"])?;
            for k in 0..samples.min(orbit.m()) {
                let mut vals = vec![k as f64];
                vals.extend(orbit.x.iter().map(|c| c[k].abs().max(f64::MIN_POSITIVE).log10()));
                row(&mut w, &vals)?;
            }
        }
        ExportKind::Manifold => {
            w.write_record(["sigma", "psi", "theta1", "theta2", "p1", "p2", "p3", "p4"])?;
            for sigma in grid(samples, 0.0, 1.0) {
                for psi in grid(samples, 0.0, 2.0 * std::f64::consts::PI) {
                    let p = eval_real(chart, sigma, psi);
                    row(&mut w, &[sigma, psi, sigma * psi.cos(), sigma * psi.sin(), p[0], p[1], p[2], p[3]])?;
                }
            }
        }
        ExportKind::UProfile => {
            w.write_record(["tau", "u"])?;
            let l = orbit.l;
            for tau in grid(2 * samples - 1, -2.0 * l, 2.0 * l) {
                let t = tau.abs() / l - 1.0;
                row(&mut w, &[tau, orbit.u(t.min(1.0))?])?;
            }
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
