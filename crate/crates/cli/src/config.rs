//! Run configuration: defaults, an optional TOML file, flag overrides, and
//! the hash line that stamps every output file.
//!
//! Outputs carry no timestamps and no machine state, so a rerun with the
//! same configuration is byte-identical; the hash makes accidental
//! parameter drift visible when comparing artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use scatterer::error::{Error, Result};
use scatterer::lattice::LatticeSpec;
use scatterer::sieves::SieveParams;
use scatterer::spectral::SpectralParams;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// `p/q` for an exact ratio a⁴ = p/q, or a decimal a² for a generic
    /// aspect ratio.
    pub lattice: String,
    /// Extension phase φ ∈ (−π, π); φ = 0 is the half-bound state.
    pub phi: f64,
    /// Spectral cutoff: norms and eigenvalues up to this value.
    pub x: f64,
    /// Annulus sieve exponent δ.
    pub delta: f64,
    /// Gap sieve exponent ε.
    pub epsilon_gap: f64,
    /// Annulus-counting exponent θ bounding the δ-window.
    pub theta: f64,
    /// Tail tolerance for banded lattice sums.
    pub tail_tol: f64,
    /// Seed for randomized sweeps.
    pub seed: u64,
    /// Directory receiving the output files.
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let sieve = SieveParams::default();
        let spectral = SpectralParams::default();
        RunConfig {
            lattice: "1/1".into(),
            phi: spectral.phi,
            x: 100.0,
            delta: sieve.delta,
            epsilon_gap: sieve.epsilon_gap,
            theta: sieve.theta,
            tail_tol: spectral.tail_tol,
            seed: 0,
            output_dir: PathBuf::from("."),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::domain(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| Error::domain(format!("config {}: {e}", path.display())))
    }

    /// The lattice named by the `lattice` field.
    pub fn spec(&self) -> Result<LatticeSpec> {
        let text = self.lattice.trim();
        if let Some((p, q)) = text.split_once('/') {
            let parse = |s: &str| {
                s.trim().parse::<u64>().map_err(|_| {
                    Error::domain(format!("lattice ratio part {s:?} is not a positive integer"))
                })
            };
            return LatticeSpec::rational(parse(p)?, parse(q)?);
        }
        let a_sq = text
            .parse::<f64>()
            .map_err(|_| Error::domain(format!("lattice {text:?} is neither p/q nor a decimal")))?;
        LatticeSpec::generic(a_sq)
    }

    pub fn spectral(&self) -> SpectralParams {
        SpectralParams {
            phi: self.phi,
            theta: self.theta,
            tail_tol: self.tail_tol,
            ..SpectralParams::default()
        }
    }

    pub fn sieve(&self) -> SieveParams {
        SieveParams {
            delta: self.delta,
            epsilon_gap: self.epsilon_gap,
            theta: self.theta,
        }
    }

    /// First 16 hex digits of the SHA-256 over the parameters that decide
    /// the numbers. The output directory only says where artifacts land,
    /// so the same run into two directories stamps the same hash.
    pub fn hash(&self) -> String {
        let identity = serde_json::json!([
            &self.lattice,
            self.phi,
            self.x,
            self.delta,
            self.epsilon_gap,
            self.theta,
            self.tail_tol,
            self.seed,
        ]);
        let canonical = serde_json::to_string(&identity).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        let mut out = String::with_capacity(16);
        for byte in &digest[..8] {
            out.push_str(&format!("{byte:02x}"));
        }
        out
    }

    /// The comment line leading every output file.
    pub fn header(&self) -> String {
        format!(
            "# config={} lattice={} phi={} X={} delta={} eps_gap={} theta={} tail_tol={} seed={}",
            self.hash(),
            self.lattice,
            self.phi,
            self.x,
            self.delta,
            self.epsilon_gap,
            self.theta,
            self.tail_tol,
            self.seed
        )
    }
}
