use std::path::{Path, PathBuf};

use mchgap::curve::{RawParams, SpectralParams};
use mchgap::homology::QuadratureRule;
use mchgap::solution::Grid;
use mchgap::verification::Tolerances;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const TAU_RANGE: (f64, f64) = (1e-14, 1e-6);
pub const NODE_RANGE: (usize, usize) = (16, 4096);
pub const CACHE_ENV: &str = "MCHGAP_CACHE_DIR";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Quadrature {
    pub nodes: usize,
    pub max_depth: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        let r = QuadratureRule::default();
        Quadrature {
            nodes: r.nodes,
            max_depth: r.max_depth,
        }
    }
}

impl Quadrature {
    pub fn rule(&self) -> QuadratureRule {
        QuadratureRule {
            nodes: self.nodes,
            max_depth: self.max_depth,
            ..QuadratureRule::default()
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Outputs {
    pub periods: Option<PathBuf>,
    pub samples: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

fn default_grid() -> Grid {
    Grid {
        y0: -1.0,
        y1: 1.0,
        ny: 11,
        t0: -1.0,
        t1: 1.0,
        nt: 11,
    }
}

fn default_tau() -> f64 {
    1e-14
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub spectral: RawParams,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub quadrature: Quadrature,
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default = "default_grid")]
    pub grid: Grid,
    #[serde(default)]
    pub output: Outputs,
    #[serde(default)]
    pub cache_dir: Option<PathBuf>,
}

/// A config that passed parsing and every bound check.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub config: RunConfig,
    pub params: SpectralParams,
    /// Directory of the config file; relative output paths resolve here.
    pub base: PathBuf,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn sha256_json<T: Serialize>(value: &T) -> String {
    // struct field order is fixed and floats print in shortest round-trip
    // form, so the serialization is canonical
    let text = serde_json::to_string(value).expect("serializable");
    hex(&Sha256::digest(text.as_bytes()))
}

impl RunConfig {
    pub fn check_bounds(&self) -> Result<(), CliError> {
        let (lo, hi) = TAU_RANGE;
        if !(self.tau >= lo && self.tau <= hi) {
            return Err(CliError::Config(format!(
                "tau = {:e} outside [{lo:e}, {hi:e}]",
                self.tau
            )));
        }
        let (lo, hi) = NODE_RANGE;
        let n = self.quadrature.nodes;
        if !(lo..=hi).contains(&n) {
            return Err(CliError::Config(format!("quadrature.nodes = {n} outside [{lo}, {hi}]")));
        }
        if self.quadrature.max_depth == 0 || self.quadrature.max_depth > 60 {
            return Err(CliError::Config(format!(
                "quadrature.max_depth = {} outside [1, 60]",
                self.quadrature.max_depth
            )));
        }
        let g = &self.grid;
        if g.ny < 2 || g.nt < 2 {
            return Err(CliError::Config(format!(
                "grid needs ny, nt >= 2 (got {}, {})",
                g.ny, g.nt
            )));
        }
        if ![g.y0, g.y1, g.t0, g.t1].iter().all(|v| v.is_finite()) {
            return Err(CliError::Config("grid ranges must be finite".into()));
        }
        let t = &self.tolerances;
        if !(t.relax.is_finite() && t.relax >= 1.0) {
            return Err(CliError::Config(format!("tolerances.relax = {} must be >= 1", t.relax)));
        }
        if !(t.fd_step > 0.0 && t.fd_step < 0.1) {
            return Err(CliError::Config(format!(
                "tolerances.fd_step = {} outside (0, 0.1)",
                t.fd_step
            )));
        }
        Ok(())
    }

    /// SHA-256 of the period-affecting part: spectral data, quadrature, τ.
    pub fn cache_key(&self) -> String {
        #[derive(Serialize)]
        struct Key<'a> {
            spectral: &'a RawParams,
            quadrature: &'a Quadrature,
            tau: f64,
        }
        sha256_json(&Key {
            spectral: &self.spectral,
            quadrature: &self.quadrature,
            tau: self.tau,
        })
    }

    /// SHA-256 of the spectral data and tolerances, stamped on reports.
    pub fn fingerprint(&self) -> String {
        #[derive(Serialize)]
        struct Print<'a> {
            spectral: &'a RawParams,
            tolerances: &'a Tolerances,
        }
        sha256_json(&Print {
            spectral: &self.spectral,
            tolerances: &self.tolerances,
        })
    }
}

impl Loaded {
    pub fn cache_dir(&self) -> PathBuf {
        if let Some(dir) = std::env::var_os(CACHE_ENV) {
            return PathBuf::from(dir);
        }
        match &self.config.cache_dir {
            Some(d) => self.resolve(d),
            None => self.base.join(".mchgap-cache"),
        }
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }
}

/// Parses and validates a config file. Errors name the offending field.
pub fn load(path: &Path) -> Result<Loaded, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        CliError::Config(format!("{}: field `{field}`: {}", path.display(), e.inner()))
    })?;
    config.check_bounds()?;
    let params =
        SpectralParams::validate(&config.spectral).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(Loaded { config, params, base })
}
