use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Physical parameters shared by all models. Units default to ell_B = eps_B = 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub ell_b: f64,
    pub eps_b: f64,
    /// Shift in Q_{B,xi} = Q_B + 2 xi.
    pub xi: f64,
    /// Non-Abelian coupling c_b = b / (B ell_B).
    pub c_b: f64,
    /// Quaternionic couplings (r0, r1, r2), unit norm.
    pub r: [f64; 3],
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            ell_b: 1.0,
            eps_b: 1.0,
            xi: 0.0,
            c_b: 0.0,
            r: [0.0, 1.0, 0.0],
        }
    }
}

impl ModelParams {
    pub fn with_c_b(mut self, c_b: f64) -> Self {
        self.c_b = c_b;
        self
    }

    pub fn with_xi(mut self, xi: f64) -> Self {
        self.xi = xi;
        self
    }

    pub fn with_ell_b(mut self, ell_b: f64) -> Self {
        self.ell_b = ell_b;
        self
    }

    pub fn with_r(mut self, r: [f64; 3]) -> Self {
        self.r = r;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ell_b > 0.0 && self.ell_b.is_finite()) {
            return domain(format!("ell_B must be positive, got {}", self.ell_b));
        }
        if !(self.eps_b > 0.0 && self.eps_b.is_finite()) {
            return domain(format!("eps_B must be positive, got {}", self.eps_b));
        }
        if !(self.xi >= 0.0 && self.xi.is_finite()) {
            return domain(format!("xi must be nonnegative, got {}", self.xi));
        }
        if !(self.c_b >= 0.0 && self.c_b.is_finite()) {
            return domain(format!("c_b must be nonnegative, got {}", self.c_b));
        }
        Ok(())
    }

    pub fn validate_r(&self) -> Result<()> {
        let n = self.r.iter().map(|v| v * v).sum::<f64>();
        if (n - 1.0).abs() > 1e-12 {
            return domain(format!("r0^2 + r1^2 + r2^2 = {n}, expected 1"));
        }
        Ok(())
    }
}
