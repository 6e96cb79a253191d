//! Exponent bookkeeping shared by every module: (d, p) ↔ κ ↔ q.

use serde::{Deserialize, Serialize};

use crate::error::{LtError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub d: usize,
    pub p: f64,
}

impl ProblemParams {
    /// Checked constructor: d ≥ 1 and 1 < p below the Sobolev exponent.
    pub fn new(d: usize, p: f64) -> Result<Self> {
        if d == 0 {
            return Err(LtError::InvalidParameter(
                "dimension must be at least 1".into(),
            ));
        }
        if !(p > 1.0) || !p.is_finite() {
            return Err(LtError::InvalidParameter(format!("need p > 1, got {p}")));
        }
        if d >= 3 && p >= d as f64 / (d as f64 - 2.0) {
            return Err(LtError::InvalidParameter(format!(
                "p = {p} is not Sobolev-subcritical in d = {d}"
            )));
        }
        Ok(Self { d, p })
    }

    /// Parameters with κ + d/2 = p′.
    pub fn from_kappa(kappa: f64, d: usize) -> Result<Self> {
        let pp = kappa + d as f64 / 2.0;
        if !(pp > 1.0) {
            return Err(LtError::InvalidParameter(format!(
                "kappa + d/2 must exceed 1, got {pp}"
            )));
        }
        Self::new(d, pp / (pp - 1.0))
    }

    pub fn dim(&self) -> f64 {
        self.d as f64
    }

    /// p′ = p/(p−1).
    pub fn p_prime(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    /// κ = p/(p−1) − d/2.
    pub fn kappa(&self) -> f64 {
        self.p_prime() - self.dim() / 2.0
    }

    /// The mass-critical exponent 1 + 2/d.
    pub fn p_critical(&self) -> f64 {
        1.0 + 2.0 / self.dim()
    }

    pub fn is_mass_critical(&self) -> bool {
        (self.p - self.p_critical()).abs() <= 1e-14 * self.p_critical()
    }

    pub fn is_mass_subcritical(&self) -> bool {
        self.p < self.p_critical() && !self.is_mass_critical()
    }

    /// q = (2p + d − dp)/(2 + d − dp); infinite at p = 1 + 2/d.
    pub fn q(&self) -> f64 {
        if self.is_mass_critical() {
            return f64::INFINITY;
        }
        let d = self.dim();
        (2.0 * self.p + d - d * self.p) / (2.0 + d - d * self.p)
    }

    /// q as the dual exponent κ′ = κ/(κ−1); agrees with `q()`.
    pub fn q_from_kappa(&self) -> f64 {
        let k = self.kappa();
        if (k - 1.0).abs() <= 1e-14 {
            f64::INFINITY
        } else {
            k / (k - 1.0)
        }
    }

    pub fn require_subcritical(&self) -> Result<()> {
        if self.is_mass_subcritical() {
            Ok(())
        } else {
            Err(LtError::InvalidParameter(format!(
                "need p < 1 + 2/d = {}, got {}",
                self.p_critical(),
                self.p
            )))
        }
    }

    pub fn require_at_most_critical(&self) -> Result<()> {
        if self.p <= self.p_critical() || self.is_mass_critical() {
            Ok(())
        } else {
            Err(LtError::InvalidParameter(format!(
                "need p <= 1 + 2/d = {}, got {}",
                self.p_critical(),
                self.p
            )))
        }
    }
}
