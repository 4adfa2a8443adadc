//! Scenario configuration: JSON ingestion with schema-style error paths,
//! defaulting, and cross-field constraint validation before any compute.

use dirac_homog::expr::Expr;
use dirac_homog::torus::{PeriodicField, PeriodicGrid};
use dirac_homog::wall::WallShape;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("constraint violated ({field}): {rule}")]
    Constraint { field: String, rule: String },
    #[error("potential {field}: {message}")]
    Potential { field: String, message: String },
}

fn d_grid_n() -> usize {
    64
}
fn d_output_dir() -> PathBuf {
    PathBuf::from("out")
}
fn d_true() -> bool {
    true
}

/// A potential is either a closed-form expression over (y1, y2) or a CSV of
/// samples in the field dump format.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PotentialSource {
    Expr(String),
    Csv { csv: PathBuf },
}

impl Default for PotentialSource {
    fn default() -> Self {
        PotentialSource::Expr("0".to_string())
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialsConfig {
    #[serde(default)]
    pub v0: PotentialSource,
    #[serde(default)]
    pub v1: PotentialSource,
    #[serde(default)]
    pub v2: PotentialSource,
    #[serde(default)]
    pub v3: PotentialSource,
    /// Free-text smoothness provenance; not checkable from samples.
    #[serde(default)]
    pub hoelder_note: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WallConfig {
    pub a: f64,
    pub b: f64,
    #[serde(default = "d_wall_shape")]
    pub shape: WallShape,
}

fn d_wall_shape() -> WallShape {
    WallShape::SmoothstepQuintic
}

impl Default for WallConfig {
    fn default() -> Self {
        Self {
            a: -1.0,
            b: 1.0,
            shape: WallShape::SmoothstepQuintic,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BulkConfig {
    /// Radial × angular quadrature resolution of the Chern integral.
    #[serde(default = "d_chern_radial")]
    pub chern_radial: usize,
    #[serde(default = "d_chern_angular")]
    pub chern_angular: usize,
    /// Band-surface CSV sampling.
    #[serde(default = "d_surface_radius")]
    pub surface_radius: f64,
    #[serde(default = "d_surface_samples")]
    pub surface_samples: usize,
}

fn d_chern_radial() -> usize {
    2000
}
fn d_chern_angular() -> usize {
    256
}
fn d_surface_radius() -> f64 {
    3.0
}
fn d_surface_samples() -> usize {
    61
}

impl Default for BulkConfig {
    fn default() -> Self {
        Self {
            chern_radial: d_chern_radial(),
            chern_angular: d_chern_angular(),
            surface_radius: d_surface_radius(),
            surface_samples: d_surface_samples(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectTraceConfig {
    #[serde(default = "d_trace_l1")]
    pub l1: f64,
    #[serde(default = "d_trace_l2")]
    pub l2: f64,
    #[serde(default = "d_trace_h")]
    pub h: f64,
    /// Run the 1.25×-box drift check (doubles the cost).
    #[serde(default)]
    pub check_drift: bool,
}

fn d_trace_l1() -> f64 {
    20.0
}
fn d_trace_l2() -> f64 {
    16.0
}
fn d_trace_h() -> f64 {
    0.4
}

impl Default for DirectTraceConfig {
    fn default() -> Self {
        Self {
            l1: d_trace_l1(),
            l2: d_trace_l2(),
            h: d_trace_h(),
            check_drift: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterfaceConfig {
    #[serde(default = "d_strip_l")]
    pub l: f64,
    #[serde(default = "d_strip_n")]
    pub n: usize,
    #[serde(default = "d_xi_half_range")]
    pub xi1_half_range: f64,
    #[serde(default = "d_steps")]
    pub steps: usize,
    /// Override the switch half-width m₀ (defaults to the common-gap value).
    #[serde(default)]
    pub m0_override: Option<f64>,
    #[serde(default = "d_true")]
    pub direct_trace_enabled: bool,
    #[serde(default)]
    pub direct_trace: DirectTraceConfig,
}

fn d_strip_l() -> f64 {
    30.0
}
fn d_strip_n() -> usize {
    1024
}
fn d_xi_half_range() -> f64 {
    3.0
}
fn d_steps() -> usize {
    121
}

impl Default for InterfaceConfig {
    fn default() -> Self {
        Self {
            l: d_strip_l(),
            n: d_strip_n(),
            xi1_half_range: d_xi_half_range(),
            steps: d_steps(),
            m0_override: None,
            direct_trace_enabled: true,
            direct_trace: DirectTraceConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsProbeConfig {
    pub eps_large: f64,
    pub eps_small: f64,
    #[serde(default = "d_trace_l1")]
    pub l1: f64,
    #[serde(default = "d_trace_l2")]
    pub l2: f64,
    #[serde(default = "d_trace_h")]
    pub h: f64,
}

impl Default for EpsProbeConfig {
    fn default() -> Self {
        Self {
            eps_large: 2.0,
            eps_small: 1.0 / 16.0,
            l1: d_trace_l1(),
            l2: d_trace_l2(),
            h: d_trace_h(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    #[serde(default = "d_epsilons")]
    pub epsilons: Vec<f64>,
    /// Primary shift [re, im].
    #[serde(default = "d_z")]
    pub z: [f64; 2],
    /// Additional shifts exercising the (1 + |Im z|⁻²) prefactor.
    #[serde(default = "d_extra_z")]
    pub extra_z: Vec<[f64; 2]>,
    #[serde(default = "d_box_l")]
    pub box_l: f64,
    #[serde(default = "d_box_n")]
    pub box_n: usize,
    #[serde(default = "d_seed")]
    pub seed: u64,
    #[serde(default = "d_random_sources")]
    pub random_sources: usize,
    #[serde(default = "d_structured_sources")]
    pub structured_sources: usize,
    /// Exploratory finite-ε interface probe (direct trace on H^ε).
    #[serde(default)]
    pub eps_probe_enabled: bool,
    #[serde(default)]
    pub eps_probe: EpsProbeConfig,
    /// Power-iteration true-norm estimate of R_ε − R_0 at the largest ε
    /// (four resolvent solves per iteration, hence opt-in).
    #[serde(default)]
    pub true_norm: bool,
}

fn d_epsilons() -> Vec<f64> {
    vec![0.25, 0.125, 0.0625, 0.03125]
}
fn d_z() -> [f64; 2] {
    [0.0, 1.0]
}
fn d_extra_z() -> Vec<[f64; 2]> {
    vec![[0.1, 0.25]]
}
fn d_box_l() -> f64 {
    1.0
}
fn d_box_n() -> usize {
    256
}
fn d_seed() -> u64 {
    7
}
fn d_random_sources() -> usize {
    16
}
fn d_structured_sources() -> usize {
    8
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            epsilons: d_epsilons(),
            z: d_z(),
            extra_z: d_extra_z(),
            box_l: d_box_l(),
            box_n: d_box_n(),
            seed: d_seed(),
            random_sources: d_random_sources(),
            structured_sources: d_structured_sources(),
            eps_probe_enabled: false,
            eps_probe: EpsProbeConfig::default(),
            true_norm: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub potentials: PotentialsConfig,
    pub m: f64,
    pub beta: f64,
    #[serde(default = "d_grid_n")]
    pub grid_n: usize,
    #[serde(default)]
    pub wall: WallConfig,
    #[serde(default)]
    pub bulk: BulkConfig,
    #[serde(default)]
    pub interface: InterfaceConfig,
    #[serde(default)]
    pub bench: BenchConfig,
    #[serde(default = "d_output_dir")]
    pub output_dir: PathBuf,
}

impl ScenarioConfig {
    /// Parse, default and cross-validate a config file.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let de = &mut serde_json::Deserializer::from_str(&text);
        let cfg: ScenarioConfig =
            serde_path_to_error::deserialize(de).map_err(|e| ConfigError::Schema {
                path: e.path().to_string(),
                message: e.inner().to_string(),
            })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |field: &str, rule: &str| {
            Err(ConfigError::Constraint {
                field: field.to_string(),
                rule: rule.to_string(),
            })
        };
        if self.beta == 0.0 {
            return fail("beta", "beta must be nonzero");
        }
        if self.m == 0.0 {
            return fail("m", "m must be nonzero");
        }
        if self.grid_n < 8 || self.grid_n % 2 != 0 {
            return fail("grid_n", "cell grid must be even and at least 8");
        }
        if !(self.wall.a < 0.0 && 0.0 < self.wall.b) {
            return fail("wall", "wall endpoints must satisfy a < 0 < b");
        }
        let margin = 0.2 * self.interface.l;
        if self.wall.a <= -self.interface.l + margin || self.wall.b >= self.interface.l - margin {
            return fail(
                "wall",
                "wall must sit inside (-L, L) with margin at least 0.2 L",
            );
        }
        if self.interface.steps < 2 {
            return fail("interface.steps", "need at least 2 xi1 steps");
        }
        if self.interface.n < 16 {
            return fail("interface.n", "need at least 16 transverse points");
        }
        if let Some(m0) = self.interface.m0_override {
            if m0 <= 0.0 {
                return fail("interface.m0_override", "m0 must be positive");
            }
        }
        if self.bench.z[1] == 0.0 {
            return fail("bench.z", "Im z must be nonzero");
        }
        for (i, z) in self.bench.extra_z.iter().enumerate() {
            if z[1] == 0.0 {
                return fail(&format!("bench.extra_z[{i}]"), "Im z must be nonzero");
            }
        }
        for (i, &eps) in self.bench.epsilons.iter().enumerate() {
            let k = self.bench.box_l / eps;
            let k_int = k.round();
            if k_int < 1.0 || (k - k_int).abs() > 1e-9 {
                return fail(
                    &format!("bench.epsilons[{i}]"),
                    "epsilon must equal box_l / k for an integer k",
                );
            }
            if self.bench.box_n % (8 * k_int as usize) != 0 {
                return fail(
                    &format!("bench.epsilons[{i}]"),
                    "box_n must be a multiple of 8k so each epsilon cell is resolved by 8 points",
                );
            }
        }
        Ok(())
    }

    /// Resolve the four potentials into sampled fields on the cell grid.
    pub fn load_potentials(&self) -> Result<dirac_homog::cell::PotentialSet, ConfigError> {
        let grid = PeriodicGrid::new(self.grid_n).map_err(|e| ConfigError::Constraint {
            field: "grid_n".into(),
            rule: e.to_string(),
        })?;
        let mut fields = Vec::with_capacity(4);
        for (name, src) in [
            ("v0", &self.potentials.v0),
            ("v1", &self.potentials.v1),
            ("v2", &self.potentials.v2),
            ("v3", &self.potentials.v3),
        ] {
            let field = match src {
                PotentialSource::Expr(text) => {
                    let expr = Expr::parse(text).map_err(|e| ConfigError::Potential {
                        field: name.into(),
                        message: e.to_string(),
                    })?;
                    PeriodicField::sample_real(grid, |y1, y2| expr.eval(y1, y2))
                }
                PotentialSource::Csv { csv } => {
                    load_field_csv(csv, grid).map_err(|m| ConfigError::Potential {
                        field: name.into(),
                        message: m,
                    })?
                }
            };
            fields.push(field);
        }
        let v3 = fields.pop().unwrap();
        let v2 = fields.pop().unwrap();
        let v1 = fields.pop().unwrap();
        let v0 = fields.pop().unwrap();
        dirac_homog::cell::PotentialSet::new(v0, v1, v2, v3, self.potentials.hoelder_note.clone())
            .map_err(|e| ConfigError::Potential {
                field: "potentials".into(),
                message: e.to_string(),
            })
    }
}

/// Read a field CSV in the dump format (header y1,y2,re,im; row-major by y₂
/// then y₁) and check it matches the expected grid.
fn load_field_csv(path: &Path, grid: PeriodicGrid) -> Result<PeriodicField, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {path:?}: {e}"))?;
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            if line.trim() != "y1,y2,re,im" {
                return Err(format!("expected header y1,y2,re,im, got {line:?}"));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 4 {
            return Err(format!(
                "line {} has {} columns, expected 4",
                i + 1,
                cols.len()
            ));
        }
        let re: f64 = cols[2]
            .parse()
            .map_err(|e| format!("line {}: {e}", i + 1))?;
        let im: f64 = cols[3]
            .parse()
            .map_err(|e| format!("line {}: {e}", i + 1))?;
        values.push(Complex64::new(re, im));
    }
    let n = grid.n();
    if values.len() != n * n {
        return Err(format!(
            "csv has {} samples but the grid needs {} (n = {})",
            values.len(),
            n * n,
            n
        ));
    }
    Ok(PeriodicField::from_values(grid, values))
}
