//! Run configuration shared by every entry point, and the provenance block
//! stamped onto each report.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budgets {
    pub driver_steps: u64,
    pub cert_nodes: u64,
    pub poly_degree: u64,
    pub vdw_nodes: u64,
    pub digit_limit: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            driver_steps: 1_000_000,
            cert_nodes: 1_000_000,
            poly_degree: 64,
            vdw_nodes: 10_000_000_000,
            digit_limit: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    pub tol: f64,
    pub budgets: Budgets,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            tol: crate::DEFAULT_TOL,
            budgets: Budgets::default(),
            format: OutputFormat::Json,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidConfiguration(format!("tol must be positive, got {}", self.tol)));
        }
        let b = &self.budgets;
        for (name, value) in [
            ("driver_steps", b.driver_steps),
            ("cert_nodes", b.cert_nodes),
            ("poly_degree", b.poly_degree),
            ("vdw_nodes", b.vdw_nodes),
            ("digit_limit", b.digit_limit),
        ] {
            if value == 0 {
                return Err(Error::InvalidConfiguration(format!("budget {name} must be positive")));
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON encoding, in hex.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("plain data serializes");
        Sha256::digest(&canonical).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn provenance(&self) -> Provenance {
        Provenance {
            seed: self.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_digest: self.digest(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub seed: u64,
    pub version: String,
    pub config_digest: String,
}
