//! Artificial-game homotopies (logarithmic and entropy barriers) after the
//! inequality-free substitution, with closed-form starts and analytic Jacobians.

mod kernel;
mod system;

pub use kernel::{c_of_t, dc_dt, dphi, phi, psi, Psi};
pub use system::{HomotopyState, HomotopySystem, Layout};

use crate::error::{Error, Result};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Lgpr,
    Etpr,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::Lgpr, Method::Etpr];

    pub fn name(self) -> &'static str {
        match self {
            Method::Lgpr => "lgpr",
            Method::Etpr => "etpr",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lgpr" => Ok(Method::Lgpr),
            "etpr" => Ok(Method::Etpr),
            _ => Err(Error::InvalidParameter(format!("unknown method `{s}` (expected lgpr or etpr)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomotopyConfig {
    pub method: Method,
    /// ω₀ > 1.
    pub omega0: f64,
    /// δ₀ ∈ (0, 1].
    pub delta0: f64,
    /// κ₀ > 1.
    pub kappa0: f64,
    pub alpha_max: f64,
    pub alpha_seed: u64,
    /// Use α = 0.
    pub zero_alpha: bool,
}

impl Default for HomotopyConfig {
    fn default() -> Self {
        HomotopyConfig { method: Method::Lgpr, omega0: 2.0, delta0: 0.5, kappa0: 2.0, alpha_max: 1e-2, alpha_seed: 0, zero_alpha: false }
    }
}

impl HomotopyConfig {
    pub fn new(method: Method) -> Self {
        HomotopyConfig { method, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega0 > 1.0) {
            return Err(Error::InvalidParameter(format!("omega0 must exceed 1, got {}", self.omega0)));
        }
        if !(self.delta0 > 0.0 && self.delta0 <= 1.0) {
            return Err(Error::InvalidParameter(format!("delta0 must lie in (0, 1], got {}", self.delta0)));
        }
        if !(self.kappa0 > 1.0) || !self.kappa0.is_finite() {
            return Err(Error::InvalidParameter(format!("kappa0 must exceed 1, got {}", self.kappa0)));
        }
        if !(self.alpha_max >= 0.0) || !self.alpha_max.is_finite() {
            return Err(Error::InvalidParameter(format!("alpha_max must be nonnegative, got {}", self.alpha_max)));
        }
        Ok(())
    }
}

/// α with i.i.d. uniform entries in [−α_max, α_max], one per nonroot sequence.
pub fn sample_alpha(cfg: &HomotopyConfig, n0: usize) -> Vec<f64> {
    if cfg.zero_alpha || cfg.alpha_max == 0.0 {
        return vec![0.0; n0];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.alpha_seed);
    (0..n0).map(|_| rng.random_range(-cfg.alpha_max..=cfg.alpha_max)).collect()
}
