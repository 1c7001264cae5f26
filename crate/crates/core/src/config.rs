use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;

/// Solver and harness parameters; hashed into every artifact.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Number of eigenpairs per solve.
    pub m: usize,
    /// Residual tolerance of the eigensolver.
    pub tol: f64,
    pub seed: u64,
    pub max_iters: usize,
    /// Certification band of the counting functions.
    pub count_margin: f64,
    /// Relative gap for multiplicity clustering.
    pub cluster_gap: f64,
    /// Relative zero threshold of nodal decompositions.
    pub eps_zero: f64,
    /// Subgroup enumeration caps.
    pub enum_bound_free: usize,
    pub enum_bound_surface: usize,
    /// Degree cap of the minimal-generator search.
    pub degree_cap: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            m: 12,
            tol: 1e-10,
            seed: 7,
            max_iters: 4000,
            count_margin: 1e-9,
            cluster_gap: 1e-7,
            eps_zero: 1e-8,
            enum_bound_free: 6,
            enum_bound_surface: 4,
            degree_cap: 24,
        }
    }
}

impl RunConfig {
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Hash of the canonical JSON form; identical configs hash identically.
    pub fn config_hash(&self) -> String {
        let canon = serde_json::to_string(self).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(canon.as_bytes());
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Metadata embedded in every emitted artifact.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Meta {
    pub schema_version: String,
    pub config_hash: String,
    pub seed: u64,
}

impl Meta {
    pub fn of(cfg: &RunConfig) -> Self {
        Meta { schema_version: "1".into(), config_hash: cfg.config_hash(), seed: cfg.seed }
    }
}
