//! Certificate files.
//!
//! Every binary64 value is stored as 16 lowercase hex digits of its bit
//! pattern. The digest is the SHA-256 of the compact JSON of the payload, and
//! a file is only accepted in the exact form this module writes it.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bvp::{BvpError, ChebOrbit};
use crate::bvp_proof::{BvpBounds, BvpOperator, BvpProof};
use crate::config::ProofConfig;
use crate::interval::{f64_from_hex, f64_to_hex, Interval};
use crate::manifold::{ManifoldBounds, ManifoldCoeffs, ManifoldError, ManifoldOperator, ManifoldProof};
use crate::radii::eval_poly;
use crate::seq::{tri_count, Taylor2Seq};

pub const FORMAT: &str = "hbcert/1";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VerifyError {
    #[error("malformed certificate: {0}")]
    Malformed(String),
    #[error("unsupported format {0:?}")]
    Format(String),
    #[error("file is not in canonical form")]
    NonCanonical,
    #[error("digest mismatch")]
    Digest,
    #[error("inconsistent payload: {0}")]
    Inconsistent(String),
    #[error("{part} polynomial {component} is not negative at the stored radius")]
    NotNegative { part: &'static str, component: usize },
    #[error(transparent)]
    Manifold(#[from] ManifoldError),
    #[error(transparent)]
    Bvp(#[from] BvpError),
}

type Hex = String;
type HexInterval = [Hex; 2];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigEcho {
    pub order: usize,
    pub m: usize,
    pub m_high: usize,
    pub m_switch: Hex,
    pub nu: Hex,
    pub nu_tilde: Hex,
    pub rho: Hex,
    pub eta: Hex,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldCertificate {
    pub beta0: Hex,
    pub beta1: Hex,
    pub order: usize,
    pub gamma: Hex,
    pub nu_tilde: Hex,
    pub r_m: Hex,
    pub y: Vec<HexInterval>,
    pub z0: Vec<HexInterval>,
    pub z1: Vec<HexInterval>,
    pub z2: Vec<HexInterval>,
    /// `[component][index] = [re, im]` in graded order.
    pub a0_coeffs: Vec<Vec<[Hex; 2]>>,
    pub a1_coeffs: Vec<Vec<[Hex; 2]>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BvpCertificate {
    pub beta0: Hex,
    pub beta1: Hex,
    pub m: usize,
    pub nu: Hex,
    pub rho: Hex,
    pub r: Hex,
    pub y: Vec<HexInterval>,
    pub z0: Vec<HexInterval>,
    pub z1: Vec<HexInterval>,
    pub z2: Vec<HexInterval>,
    pub z3: Vec<HexInterval>,
    pub l0: Hex,
    pub l1: Hex,
    pub psi0: Hex,
    pub psi1: Hex,
    pub x0_coeffs: Vec<Vec<Hex>>,
    pub x1_coeffs: Vec<Vec<Hex>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Meta {
    pub producer: String,
    pub version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Payload {
    pub config: ConfigEcho,
    pub manifold: ManifoldCertificate,
    pub bvp: BvpCertificate,
    pub meta: Meta,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Certificate {
    pub format: String,
    pub payload: Payload,
    pub digest: String,
}

/// Decoded proof data of one certificate.
#[derive(Clone, Debug)]
pub struct Decoded {
    pub config: ProofConfig,
    pub beta0: f64,
    pub beta1: f64,
    pub gamma: f64,
    pub r_m: f64,
    pub r: f64,
    pub manifold_bounds: ManifoldBounds,
    pub bvp_bounds: BvpBounds,
    pub a0: ManifoldCoeffs,
    pub a1: ManifoldCoeffs,
    pub x0: ChebOrbit,
    pub x1: ChebOrbit,
}

/// Outcome of a successful verification.
#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub beta0: f64,
    pub beta1: f64,
    pub r_m: f64,
    pub r: f64,
    /// Largest upper value of the recomputed polynomials at the stored radii.
    pub worst_manifold: f64,
    pub worst_bvp: f64,
    /// Whether the recomputed bounds equal the stored ones bit for bit.
    pub bounds_reproduced: bool,
}

fn hx(x: f64) -> Hex {
    f64_to_hex(x)
}

fn hiv(x: Interval) -> HexInterval {
    x.to_hex_pair()
}

fn hivs(x: &[Interval]) -> Vec<HexInterval> {
    x.iter().map(|v| hiv(*v)).collect()
}

fn unhex(s: &str) -> Result<f64, VerifyError> {
    f64_from_hex(s).map_err(|e| VerifyError::Malformed(e.to_string()))
}

fn univ(p: &HexInterval) -> Result<Interval, VerifyError> {
    Interval::from_hex_pair(&p[0], &p[1]).map_err(|e| VerifyError::Malformed(e.to_string()))
}

fn univs<const K: usize>(v: &[HexInterval]) -> Result<[Interval; K], VerifyError> {
    if v.len() != K {
        return Err(VerifyError::Malformed(format!("expected {K} bounds, found {}", v.len())));
    }
    let mut out = [Interval::ZERO; K];
    for (o, p) in out.iter_mut().zip(v) {
        *o = univ(p)?;
    }
    Ok(out)
}

fn coeffs_hex(a: &ManifoldCoeffs) -> Vec<Vec<[Hex; 2]>> {
    a.comps
        .iter()
        .map(|c| c.data().iter().map(|z| [hx(z.re), hx(z.im)]).collect())
        .collect()
}

fn coeffs_unhex(order: usize, v: &[Vec<[Hex; 2]>]) -> Result<ManifoldCoeffs, VerifyError> {
    let nt = tri_count(order);
    if v.len() != 4 || v.iter().any(|c| c.len() != nt) {
        return Err(VerifyError::Malformed("manifold coefficient shape".into()));
    }
    let mut comps: [Taylor2Seq<Complex64>; 4] = std::array::from_fn(|_| Taylor2Seq::zeros(order));
    for (c, src) in comps.iter_mut().zip(v) {
        for (z, p) in c.data_mut().iter_mut().zip(src) {
            *z = Complex64::new(unhex(&p[0])?, unhex(&p[1])?);
        }
    }
    Ok(ManifoldCoeffs { order, comps })
}

fn orbit_unhex(m: usize, l: &str, psi: &str, v: &[Vec<Hex>]) -> Result<ChebOrbit, VerifyError> {
    if v.len() != 4 || v.iter().any(|c| c.len() != m) {
        return Err(VerifyError::Malformed("orbit coefficient shape".into()));
    }
    let mut x: [Vec<f64>; 4] = Default::default();
    for (dst, src) in x.iter_mut().zip(v) {
        *dst = src.iter().map(|s| unhex(s)).collect::<Result<_, _>>()?;
    }
    Ok(ChebOrbit { l: unhex(l)?, psi: unhex(psi)?, x })
}

fn digest_of(payload: &Payload) -> String {
    let bytes = serde_json::to_vec(payload).expect("payload serializes");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl Certificate {
    /// Packs a manifold proof and the orbit proof built on it.
    pub fn new(config: &ProofConfig, mp: &ManifoldProof, bp: &BvpProof) -> Self {
        let mb = &mp.bounds;
        let bb = &bp.bounds;
        let payload = Payload {
            config: ConfigEcho {
                order: config.order,
                m: config.m,
                m_high: config.m_high,
                m_switch: hx(config.m_switch),
                nu: hx(config.nu),
                nu_tilde: hx(config.nu_tilde),
                rho: hx(config.rho),
                eta: hx(config.eta),
            },
            manifold: ManifoldCertificate {
                beta0: hx(mp.beta0),
                beta1: hx(mp.beta1),
                order: mp.order,
                gamma: hx(mp.gamma),
                nu_tilde: hx(mp.nu),
                r_m: hx(mp.r()),
                y: hivs(&mb.y),
                z0: hivs(&mb.z0),
                z1: hivs(&mb.z1),
                z2: hivs(&mb.z2),
                a0_coeffs: coeffs_hex(&mp.a0),
                a1_coeffs: coeffs_hex(&mp.a1),
            },
            bvp: BvpCertificate {
                beta0: hx(bp.beta0),
                beta1: hx(bp.beta1),
                m: bp.x0.m(),
                nu: hx(bp.nu),
                rho: hx(bp.rho),
                r: hx(bp.r()),
                y: hivs(&bb.y),
                z0: hivs(&bb.z0),
                z1: hivs(&bb.z1),
                z2: hivs(&bb.z2),
                z3: hivs(&bb.z3),
                l0: hx(bp.x0.l),
                l1: hx(bp.x1.l),
                psi0: hx(bp.x0.psi),
                psi1: hx(bp.x1.psi),
                x0_coeffs: bp.x0.x.iter().map(|c| c.iter().map(|v| hx(*v)).collect()).collect(),
                x1_coeffs: bp.x1.x.iter().map(|c| c.iter().map(|v| hx(*v)).collect()).collect(),
            },
            meta: Meta {
                producer: env!("CARGO_PKG_NAME").into(),
                version: env!("CARGO_PKG_VERSION").into(),
            },
        };
        let digest = digest_of(&payload);
        Certificate {
            format: FORMAT.into(),
            payload,
            digest,
        }
    }

    /// Canonical single-line JSON.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("certificate serializes")
    }

    /// Parses a certificate and checks format, canonical form and digest.
    pub fn from_json(text: &str) -> Result<Self, VerifyError> {
        let text = text.strip_suffix('\n').unwrap_or(text);
        let cert: Certificate = serde_json::from_str(text).map_err(|e| VerifyError::Malformed(e.to_string()))?;
        if cert.format != FORMAT {
            return Err(VerifyError::Format(cert.format));
        }
        if cert.to_json() != text {
            return Err(VerifyError::NonCanonical);
        }
        if digest_of(&cert.payload) != cert.digest {
            return Err(VerifyError::Digest);
        }
        Ok(cert)
    }

    pub fn decode(&self) -> Result<Decoded, VerifyError> {
        let p = &self.payload;
        let (c, mc, bc) = (&p.config, &p.manifold, &p.bvp);
        let config = ProofConfig {
            order: c.order,
            m: c.m,
            m_high: c.m_high,
            m_switch: unhex(&c.m_switch)?,
            nu: unhex(&c.nu)?,
            nu_tilde: unhex(&c.nu_tilde)?,
            rho: unhex(&c.rho)?,
            eta: unhex(&c.eta)?,
        };
        let beta0 = unhex(&mc.beta0)?;
        let beta1 = unhex(&mc.beta1)?;
        if unhex(&bc.beta0)?.to_bits() != beta0.to_bits() || unhex(&bc.beta1)?.to_bits() != beta1.to_bits() {
            return Err(VerifyError::Inconsistent("parameter ranges differ".into()));
        }
        if !(beta0 <= beta1) {
            return Err(VerifyError::Inconsistent("beta0 > beta1".into()));
        }
        if mc.order != c.order || mc.order < 3 {
            return Err(VerifyError::Inconsistent("truncation order".into()));
        }
        let nu_tilde = unhex(&mc.nu_tilde)?;
        let (nu, rho) = (unhex(&bc.nu)?, unhex(&bc.rho)?);
        if nu_tilde.to_bits() != config.nu_tilde.to_bits()
            || nu.to_bits() != config.nu.to_bits()
            || rho.to_bits() != config.rho.to_bits()
        {
            return Err(VerifyError::Inconsistent("weights differ from the configuration".into()));
        }
        if bc.m < 4 {
            return Err(VerifyError::Inconsistent("too few Chebyshev modes".into()));
        }
        let r_m = unhex(&mc.r_m)?;
        let r = unhex(&bc.r)?;
        if !(r_m > 0.0 && r_m.is_finite() && r > 0.0 && r.is_finite()) {
            return Err(VerifyError::Inconsistent("radii must be positive".into()));
        }
        Ok(Decoded {
            beta0,
            beta1,
            gamma: unhex(&mc.gamma)?,
            r_m,
            r,
            manifold_bounds: ManifoldBounds {
                y: univs(&mc.y)?,
                z0: univs(&mc.z0)?,
                z1: univs(&mc.z1)?,
                z2: univs(&mc.z2)?,
            },
            bvp_bounds: BvpBounds {
                y: univs(&bc.y)?,
                z0: univs(&bc.z0)?,
                z1: univs(&bc.z1)?,
                z2: univs(&bc.z2)?,
                z3: univs(&bc.z3)?,
            },
            a0: coeffs_unhex(mc.order, &mc.a0_coeffs)?,
            a1: coeffs_unhex(mc.order, &mc.a1_coeffs)?,
            x0: orbit_unhex(bc.m, &bc.l0, &bc.psi0, &bc.x0_coeffs)?,
            x1: orbit_unhex(bc.m, &bc.l1, &bc.psi1, &bc.x1_coeffs)?,
            config,
        })
    }

    /// Recomputes every bound from the stored approximations and checks that
    /// all radii polynomials are negative at the stored radii.
    pub fn verify(&self) -> Result<VerifyReport, VerifyError> {
        let d = self.decode()?;
        let cfg = &d.config;
        let mop = ManifoldOperator::build(d.beta0, d.gamma, cfg.nu_tilde, &d.a0)?;
        let mb = mop.bounds(d.beta1, &d.a1)?;
        let worst_manifold = check_negative("manifold", &mb.polys(), d.r_m)?;
        check_negative("stored manifold", &d.manifold_bounds.polys(), d.r_m)?;
        let bop = BvpOperator::build(d.beta0, &d.x0, &d.a0, cfg.nu, cfg.nu_tilde, cfg.rho)?;
        let bb = bop.bounds(d.beta1, &d.x1, &d.a1, d.r_m)?;
        let worst_bvp = check_negative("orbit", &bb.polys(), d.r)?;
        check_negative("stored orbit", &d.bvp_bounds.polys(), d.r)?;
        Ok(VerifyReport {
            beta0: d.beta0,
            beta1: d.beta1,
            r_m: d.r_m,
            r: d.r,
            worst_manifold,
            worst_bvp,
            bounds_reproduced: mb == d.manifold_bounds && bb == d.bvp_bounds,
        })
    }
}

fn check_negative(part: &'static str, polys: &[Vec<Interval>], r: f64) -> Result<f64, VerifyError> {
    let ri = Interval::point(r);
    let mut worst = f64::NEG_INFINITY;
    for (component, p) in polys.iter().enumerate() {
        let v = eval_poly(p, ri);
        if !v.is_negative() {
            return Err(VerifyError::NotNegative { part, component });
        }
        worst = worst.max(v.hi());
    }
    Ok(worst)
}
