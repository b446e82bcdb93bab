//! Numerical parameters shared by the manifold and orbit proofs.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProofConfig {
    /// Taylor truncation order `N` of the manifold chart.
    pub order: usize,
    /// Number of Chebyshev modes `m` per component up to `m_switch`.
    pub m: usize,
    /// Number of Chebyshev modes above `m_switch`.
    pub m_high: usize,
    /// Parameter value above which `m_high` modes are used.
    pub m_switch: f64,
    /// Chebyshev decay weight `nu >= 1`.
    pub nu: f64,
    /// Validation radius of the manifold chart, kept at 1 after rescaling.
    pub nu_tilde: f64,
    /// Radius of the circle on which the orbit meets the chart.
    pub rho: f64,
    /// Ceiling on `Z0 + Z1` accepted when choosing the eigenvector scale.
    pub eta: f64,
}

impl Default for ProofConfig {
    fn default() -> Self {
        ProofConfig {
            order: 30,
            m: 350,
            m_high: 400,
            m_switch: 1.8,
            nu: 1.05,
            nu_tilde: 1.0,
            rho: 0.895,
            eta: 0.5,
        }
    }
}

impl ProofConfig {
    /// Chebyshev size used at `beta`.
    pub fn m_for_beta(&self, beta: f64) -> usize {
        if beta > self.m_switch {
            self.m_high
        } else {
            self.m
        }
    }

    /// Rejects values outside the domain of the proofs.
    pub fn check(&self) -> Result<(), String> {
        if self.order < 3 {
            return Err(format!("order must be at least 3, got {}", self.order));
        }
        if self.m < 4 || self.m_high < self.m {
            return Err(format!("need 4 <= m <= m_high, got m = {}, m_high = {}", self.m, self.m_high));
        }
        if !(self.nu >= 1.0 && self.nu.is_finite()) {
            return Err(format!("nu must be finite and at least 1, got {}", self.nu));
        }
        if !(self.nu_tilde > 0.0 && self.nu_tilde.is_finite()) {
            return Err(format!("nu_tilde must be positive, got {}", self.nu_tilde));
        }
        if !(self.rho > 0.0 && self.rho < self.nu_tilde) {
            return Err(format!("rho must lie in (0, nu_tilde), got {}", self.rho));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(format!("eta must lie in (0, 1), got {}", self.eta));
        }
        if !self.m_switch.is_finite() {
            return Err("m_switch must be finite".into());
        }
        Ok(())
    }
}
