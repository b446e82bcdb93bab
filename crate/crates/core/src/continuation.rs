//! Adaptive parameter continuation with an append-only ledger.
//!
//! Each step proves the chart and then the orbit on `[beta0, beta1]` with the
//! operators built at `beta0`. A failed step halves `dbeta` and keeps the
//! operators; a successful one grows `dbeta` and rebuilds them at `beta1`.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::bvp::{self, BvpError, Chart, ChebOrbit};
use crate::bvp_proof::{BvpOperator, BvpProof};
use crate::cert::{Certificate, VerifyError};
use crate::config::ProofConfig;
use crate::interval::{f64_from_hex, f64_to_hex};
use crate::manifold::{self, ManifoldCoeffs, ManifoldError, ManifoldOperator, ManifoldProof};

/// Residual tolerance of the orbit Newton iteration.
pub const ORBIT_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ContinuationError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("step size fell below the minimum at beta = {beta} (dbeta = {dbeta:e}): {reason}")]
    StepUnderflow { beta: f64, dbeta: f64, reason: String },
    #[error(transparent)]
    Manifold(#[from] ManifoldError),
    #[error(transparent)]
    Bvp(#[from] BvpError),
    #[error("ledger: {0}")]
    Ledger(String),
    #[error(transparent)]
    Certificate(#[from] VerifyError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContinuationConfig {
    pub beta_start: f64,
    pub beta_end: f64,
    pub proof: ProofConfig,
    /// Initial and largest step.
    pub dbeta: f64,
    pub min_dbeta: f64,
    /// Step multiplier after a success.
    pub growth: f64,
    /// Consecutive failures tolerated at one anchor.
    pub max_retries: usize,
    /// Eigenvector scale at the start; searched for when absent.
    pub gamma: Option<f64>,
}

impl ContinuationConfig {
    pub fn new(beta_start: f64, beta_end: f64) -> Self {
        ContinuationConfig {
            beta_start,
            beta_end,
            proof: ProofConfig::default(),
            dbeta: 2.5e-4,
            min_dbeta: 1e-6,
            growth: 1.2,
            max_retries: 40,
            gamma: None,
        }
    }

    pub fn check(&self) -> Result<(), ContinuationError> {
        self.proof.check().map_err(ContinuationError::Config)?;
        if !(self.beta_start < self.beta_end) {
            return Err(ContinuationError::Config("beta_start must be below beta_end".into()));
        }
        if !(self.beta_start > -2.0 && self.beta_end < 2.0) {
            return Err(ContinuationError::Config("parameter range must lie in (-2, 2)".into()));
        }
        if !(self.min_dbeta > 0.0 && self.dbeta >= self.min_dbeta && self.dbeta.is_finite()) {
            return Err(ContinuationError::Config("need 0 < min_dbeta <= dbeta".into()));
        }
        if !(self.growth >= 1.0 && self.growth.is_finite()) {
            return Err(ContinuationError::Config("growth must be at least 1".into()));
        }
        if self.max_retries == 0 {
            return Err(ContinuationError::Config("max_retries must be positive".into()));
        }
        check_gamma(self.gamma)
    }
}

fn check_gamma(gamma: Option<f64>) -> Result<(), ContinuationError> {
    match gamma {
        Some(g) if !(g > 0.0 && g.is_finite()) => Err(ContinuationError::Config(format!("gamma must be positive, got {g}"))),
        _ => Ok(()),
    }
}

/// One ledger line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LedgerEntry {
    /// Step size the controller continues with after this certificate.
    pub next_dbeta: String,
    pub certificate: Certificate,
}

impl LedgerEntry {
    pub fn next_dbeta(&self) -> Result<f64, ContinuationError> {
        f64_from_hex(&self.next_dbeta).map_err(|e| ContinuationError::Ledger(e.to_string()))
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("ledger entry serializes")
    }

    /// Parses one line and checks the embedded certificate's integrity.
    pub fn from_line(line: &str) -> Result<Self, ContinuationError> {
        let e: LedgerEntry = serde_json::from_str(line).map_err(|e| ContinuationError::Ledger(e.to_string()))?;
        if e.to_line() != line {
            return Err(ContinuationError::Ledger("line is not in canonical form".into()));
        }
        Certificate::from_json(&e.certificate.to_json())?;
        e.next_dbeta()?;
        Ok(e)
    }
}

/// Certified steps in order, with wall-clock time per step.
#[derive(Clone, Debug, Default)]
pub struct ProofLedger {
    pub entries: Vec<LedgerEntry>,
    pub timings: Vec<Duration>,
}

impl ProofLedger {
    /// Parameter ranges of the entries.
    pub fn ranges(&self) -> Result<Vec<(f64, f64)>, ContinuationError> {
        self.entries
            .iter()
            .map(|e| {
                let d = e.certificate.decode()?;
                Ok((d.beta0, d.beta1))
            })
            .collect()
    }

    /// Union of the ranges, provided consecutive ranges share endpoints exactly.
    pub fn covered(&self) -> Result<(f64, f64), ContinuationError> {
        let r = self.ranges()?;
        let (first, last) = match (r.first(), r.last()) {
            (Some(f), Some(l)) => (f, l),
            _ => return Err(ContinuationError::Ledger("empty ledger".into())),
        };
        for (k, w) in r.windows(2).enumerate() {
            if w[0].1.to_bits() != w[1].0.to_bits() {
                return Err(ContinuationError::Ledger(format!("gap after entry {k}")));
            }
        }
        for (k, (a, b)) in r.iter().enumerate() {
            if !(a < b) {
                return Err(ContinuationError::Ledger(format!("empty range in entry {k}")));
            }
        }
        Ok((first.0, last.1))
    }

    pub fn read(path: &Path) -> Result<Self, ContinuationError> {
        let f = File::open(path).map_err(|e| ContinuationError::Ledger(format!("{}: {e}", path.display())))?;
        let mut entries = Vec::new();
        for line in BufReader::new(f).lines() {
            let line = line.map_err(|e| ContinuationError::Ledger(e.to_string()))?;
            if line.is_empty() {
                continue;
            }
            entries.push(LedgerEntry::from_line(&line)?);
        }
        Ok(ProofLedger {
            entries,
            timings: Vec::new(),
        })
    }

    pub fn write(&self, path: &Path) -> Result<(), ContinuationError> {
        let mut f = File::create(path).map_err(|e| ContinuationError::Ledger(e.to_string()))?;
        for e in &self.entries {
            writeln!(f, "{}", e.to_line()).map_err(|e| ContinuationError::Ledger(e.to_string()))?;
        }
        Ok(())
    }
}

/// Continuation state at the left end of the next step.
struct Anchor {
    beta: f64,
    gamma: f64,
    a: ManifoldCoeffs,
    x: ChebOrbit,
    mop: ManifoldOperator,
    bop: BvpOperator,
}

impl Anchor {
    fn new(beta: f64, gamma: f64, a: ManifoldCoeffs, x: ChebOrbit, cfg: &ProofConfig) -> Result<Self, ContinuationError> {
        let m = cfg.m_for_beta(beta);
        let x = if x.m() == m {
            x
        } else {
            let chart = Chart { coeffs: &a, rho: cfg.rho };
            bvp::newton(beta, &x.resized(m), &chart, ORBIT_TOL)?
        };
        let mop = ManifoldOperator::build(beta, gamma, cfg.nu_tilde, &a)?;
        let bop = BvpOperator::build(beta, &x, &a, cfg.nu, cfg.nu_tilde, cfg.rho)?;
        Ok(Anchor {
            beta,
            gamma,
            a,
            x,
            mop,
            bop,
        })
    }

    /// Fresh start: scale search unless `gamma` is given, chart and orbit
    /// from scratch.
    fn bootstrap(beta: f64, gamma: Option<f64>, cfg: &ProofConfig) -> Result<Self, ContinuationError> {
        let gamma = match gamma {
            Some(g) => g,
            None => manifold::maximize_gamma(beta, cfg.order, cfg.nu_tilde, cfg.eta)?.0,
        };
        let a = manifold::newton_solve(beta, cfg.order, gamma, None)?;
        let x = bvp::solve_orbit(beta, cfg.m_for_beta(beta), &Chart { coeffs: &a, rho: cfg.rho })?;
        Anchor::new(beta, gamma, a, x, cfg)
    }

    fn from_entry(e: &LedgerEntry, cfg: &ProofConfig) -> Result<Self, ContinuationError> {
        let d = e.certificate.decode()?;
        Anchor::new(d.beta1, d.gamma, d.a1, d.x1, cfg)
    }

    /// Same parameter with a new eigenvector scale.
    fn rescale(&self, gamma: f64, cfg: &ProofConfig) -> Result<Self, ContinuationError> {
        let seed = self.a.rescaled(gamma / self.gamma);
        let a = manifold::newton_solve(self.beta, cfg.order, gamma, Some(&seed))?;
        let chart = Chart { coeffs: &a, rho: cfg.rho };
        let x = match bvp::newton(self.beta, &self.x, &chart, ORBIT_TOL) {
            Ok(x) => x,
            Err(_) => bvp::solve_orbit(self.beta, self.x.m(), &chart)?,
        };
        Anchor::new(self.beta, gamma, a, x, cfg)
    }

    fn step(&self, beta1: f64, cfg: &ProofConfig) -> Result<(ManifoldProof, BvpProof), String> {
        let (a1, x1) = transport_guess(&self.a, &self.x, self.gamma, beta1, cfg).map_err(|e| e.to_string())?;
        let mp = self.mop.validate(beta1, &a1).map_err(|e| format!("manifold: {e}"))?;
        let bp = self
            .bop
            .validate(beta1, &x1, &a1, mp.r())
            .map_err(|e| format!("orbit: {e}"))?;
        Ok((mp, bp))
    }
}

/// Chart coefficients and orbit at `beta_next`, by Newton's method seeded
/// with the data at the previous parameter.
pub fn transport_guess(
    a_prev: &ManifoldCoeffs,
    x_prev: &ChebOrbit,
    gamma: f64,
    beta_next: f64,
    cfg: &ProofConfig,
) -> Result<(ManifoldCoeffs, ChebOrbit), ContinuationError> {
    let a = manifold::newton_solve(beta_next, cfg.order, gamma, Some(a_prev))?;
    let x = bvp::newton(beta_next, x_prev, &Chart { coeffs: &a, rho: cfg.rho }, ORBIT_TOL)?;
    Ok((a, x))
}

/// Proves a single range, searching for the scale unless `gamma` is given.
pub fn prove_interval(beta0: f64, beta1: f64, gamma: Option<f64>, cfg: &ProofConfig) -> Result<Certificate, ContinuationError> {
    cfg.check().map_err(ContinuationError::Config)?;
    check_gamma(gamma)?;
    if !(beta0 <= beta1) {
        return Err(ContinuationError::Config("beta0 must not exceed beta1".into()));
    }
    let anchor = Anchor::bootstrap(beta0, gamma, cfg)?;
    let (mp, bp) = anchor.step(beta1, cfg).map_err(|reason| ContinuationError::StepUnderflow {
        beta: beta0,
        dbeta: beta1 - beta0,
        reason,
    })?;
    Ok(Certificate::new(cfg, &mp, &bp))
}

fn append_line(path: &Path, line: &str) -> Result<(), ContinuationError> {
    let mut f = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| ContinuationError::Ledger(e.to_string()))?;
    writeln!(f, "{line}").map_err(|e| ContinuationError::Ledger(e.to_string()))?;
    f.sync_data().map_err(|e| ContinuationError::Ledger(e.to_string()))
}

/// Runs the controller over `[beta_start, beta_end]`. With a ledger path each
/// certified step is appended to it; with `resume` an existing ledger is
/// extended from its last entry.
pub fn continue_range(cfg: &ContinuationConfig, ledger: Option<&Path>, resume: bool) -> Result<ProofLedger, ContinuationError> {
    cfg.check()?;
    let pc = &cfg.proof;
    let mut out = ProofLedger::default();
    let existing = match ledger {
        Some(p) if resume && p.exists() => ProofLedger::read(p)?,
        Some(p) => {
            File::create(p).map_err(|e| ContinuationError::Ledger(e.to_string()))?;
            ProofLedger::default()
        }
        None => ProofLedger::default(),
    };
    let (mut anchor, mut dbeta) = match existing.entries.last() {
        Some(last) => {
            let (lo, hi) = existing.covered()?;
            if lo.to_bits() != cfg.beta_start.to_bits() || hi > cfg.beta_end {
                return Err(ContinuationError::Ledger("existing ledger does not match the requested range".into()));
            }
            (Anchor::from_entry(last, pc)?, last.next_dbeta()?)
        }
        None => (Anchor::bootstrap(cfg.beta_start, cfg.gamma, pc)?, cfg.dbeta),
    };
    out.entries = existing.entries;
    let mut rescaled = false;
    let mut failures = 0;
    while anchor.beta < cfg.beta_end {
        let t = Instant::now();
        let beta1 = if anchor.beta + dbeta >= cfg.beta_end - 0.5 * cfg.min_dbeta {
            cfg.beta_end
        } else {
            anchor.beta + dbeta
        };
        match anchor.step(beta1, pc) {
            Ok((mp, bp)) => {
                let next = (dbeta * cfg.growth).min(cfg.dbeta);
                let entry = LedgerEntry {
                    next_dbeta: f64_to_hex(next),
                    certificate: Certificate::new(pc, &mp, &bp),
                };
                if let Some(p) = ledger {
                    append_line(p, &entry.to_line())?;
                }
                eprintln!(
                    "certified [{:.10}, {:.10}] r_m = {:.3e} r = {:.3e} L = {:.6}",
                    anchor.beta,
                    beta1,
                    mp.r(),
                    bp.r(),
                    bp.x1.l
                );
                anchor = Anchor::new(beta1, anchor.gamma, mp.a1, bp.x1, pc)?;
                out.entries.push(entry);
                out.timings.push(t.elapsed());
                dbeta = next;
                rescaled = false;
                failures = 0;
            }
            Err(reason) => {
                failures += 1;
                dbeta *= 0.5;
                eprintln!("step from {:.10} failed ({reason}); dbeta -> {dbeta:.3e}", anchor.beta);
                if dbeta < cfg.min_dbeta || failures >= cfg.max_retries {
                    let (gamma, _) = if rescaled {
                        (anchor.gamma, 0.0)
                    } else {
                        manifold::maximize_gamma(anchor.beta, pc.order, pc.nu_tilde, pc.eta)?
                    };
                    if rescaled || gamma == anchor.gamma {
                        return Err(ContinuationError::StepUnderflow {
                            beta: anchor.beta,
                            dbeta,
                            reason,
                        });
                    }
                    eprintln!("rescaling at {:.10}: gamma {} -> {}", anchor.beta, anchor.gamma, gamma);
                    anchor = anchor.rescale(gamma, pc)?;
                    dbeta = cfg.dbeta;
                    rescaled = true;
                    failures = 0;
                }
            }
        }
    }
    Ok(out)
}

/// Splits the range into `jobs` pieces continued independently on separate
/// threads, then concatenates them in order. Pieces are checkpointed to
/// `<ledger>.part<k>` while running.
pub fn continue_chunked(cfg: &ContinuationConfig, jobs: usize, ledger: Option<&Path>, resume: bool) -> Result<ProofLedger, ContinuationError> {
    cfg.check()?;
    if jobs <= 1 {
        return continue_range(cfg, ledger, resume);
    }
    let width = cfg.beta_end - cfg.beta_start;
    let cuts: Vec<f64> = (0..=jobs)
        .map(|k| match k {
            0 => cfg.beta_start,
            k if k == jobs => cfg.beta_end,
            k => cfg.beta_start + width * k as f64 / jobs as f64,
        })
        .collect();
    let parts: Vec<Option<PathBuf>> = (0..jobs)
        .map(|k| {
            ledger.map(|p| {
                let mut s = p.as_os_str().to_owned();
                s.push(format!(".part{k}"));
                PathBuf::from(s)
            })
        })
        .collect();
    let results: Vec<Result<ProofLedger, ContinuationError>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..jobs)
            .map(|k| {
                let mut sub = cfg.clone();
                sub.beta_start = cuts[k];
                sub.beta_end = cuts[k + 1];
                let part = parts[k].clone();
                s.spawn(move || continue_range(&sub, part.as_deref(), resume))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(ContinuationError::Ledger("worker panicked".into()))))
            .collect()
    });
    let mut all = ProofLedger::default();
    for r in results {
        let l = r?;
        all.entries.extend(l.entries);
        all.timings.extend(l.timings);
    }
    if let Some(p) = ledger {
        all.write(p)?;
        for part in parts.iter().flatten() {
            let _ = std::fs::remove_file(part);
        }
    }
    Ok(all)
}
