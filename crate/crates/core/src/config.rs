//! Run configuration, read from JSON.
//!
//! Required keys are `scenario`, `h`, `dt` and `t_end`; everything else has a
//! default. [`SimConfig::resolved`] fills the defaults in, and the resolved
//! form is what gets echoed next to the run output.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::particles::{self, DipoleParams};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Scenario {
    GaussianDipole {
        #[serde(default = "dipole_r0")]
        r0: f64,
        #[serde(default = "dipole_z0")]
        z0: f64,
        #[serde(default = "dipole_sigma")]
        sigma: f64,
        #[serde(default = "one")]
        amp: f64,
    },
    Patch {
        r0: f64,
        z0: f64,
        a: f64,
    },
    FromSnapshot {
        path: PathBuf,
    },
}

fn dipole_r0() -> f64 {
    DipoleParams::default().r0
}
fn dipole_z0() -> f64 {
    DipoleParams::default().z0
}
fn dipole_sigma() -> f64 {
    DipoleParams::default().sigma
}
fn one() -> f64 {
    1.0
}

/// Kernel used for the velocity on the symmetry plane and axis.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineKernel {
    /// Unregularized kernel; particles never sit on either line.
    #[default]
    Exact,
    /// The blob kernel that moves the particles.
    Blob,
}

/// Adaptive quadrature settings for the line integrals along the two axes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AxisQuadConfig {
    pub rel_tol: f64,
    pub max_intervals: usize,
    pub kernel: LineKernel,
}

impl Default for AxisQuadConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            max_intervals: 4000,
            kernel: LineKernel::Exact,
        }
    }
}

impl AxisQuadConfig {
    /// Blob width for line velocities of a system with blob width `delta`.
    pub fn line_delta(&self, delta: f64) -> f64 {
        match self.kernel {
            LineKernel::Exact => 0.0,
            LineKernel::Blob => delta,
        }
    }
}

/// Tensor Gauss–Legendre grid for area integrals over the quadrant.
///
/// The box holding the particles (plus a margin) is cut into panels of width
/// `panel_width_over_delta · δ`; the remainder of each half-line is mapped
/// onto `outer_panels` panels. Each panel carries an `order`-point rule, and
/// the same panels with `check_order` points give the convergence estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub panel_width_over_delta: f64,
    pub order: usize,
    pub check_order: usize,
    pub outer_panels: usize,
    pub rel_tol: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            panel_width_over_delta: 3.0,
            order: 6,
            check_order: 4,
            outer_panels: 8,
            rel_tol: 1e-3,
        }
    }
}

impl GridConfig {
    /// Same grid with panels `factor` times narrower.
    pub fn refined(self, factor: f64) -> Self {
        Self {
            panel_width_over_delta: self.panel_width_over_delta / factor,
            outer_panels: (self.outer_panels as f64 * factor).ceil() as usize,
            ..self
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadConfig {
    pub axis: AxisQuadConfig,
    pub grid: GridConfig,
}

fn default_mass_floor() -> f64 {
    particles::DEFAULT_MASS_FLOOR
}
fn default_record_every() -> usize {
    1
}
fn default_cfl() -> f64 {
    0.5
}
fn yes() -> bool {
    true
}
fn default_k_list() -> Vec<f64> {
    vec![2.0, 3.0]
}
fn default_p_list() -> Vec<f64> {
    vec![1.0, 2.0]
}
fn default_r_list() -> Vec<f64> {
    vec![1.0, 2.0]
}
fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_identity_every() -> usize {
    50
}
fn default_clamp_abort() -> f64 {
    1e-3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub scenario: Scenario,
    /// Seeding spacing.
    pub h: f64,
    /// Blob width; `1.5 h` when absent.
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default = "default_mass_floor")]
    pub mass_floor: f64,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    /// Steps between snapshots; 0 disables them.
    #[serde(default)]
    pub snap_every: usize,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default = "yes")]
    pub cfl_check: bool,
    #[serde(default = "default_k_list")]
    pub k_list: Vec<f64>,
    /// Finite exponents for `‖ω‖_{L^p}`; the sup norm is always recorded.
    #[serde(default = "default_p_list")]
    pub p_list: Vec<f64>,
    #[serde(default = "default_r_list", rename = "R_list")]
    pub r_list: Vec<f64>,
    #[serde(default)]
    pub deterministic: bool,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default)]
    pub seed_meta: serde_json::Value,
    /// Records between evaluations of the area-integral identity; 0 means
    /// only the first record.
    #[serde(default = "default_identity_every")]
    pub identity_every: usize,
    /// Abort once more than this fraction of particles has been clamped.
    #[serde(default = "default_clamp_abort")]
    pub clamp_abort_fraction: f64,
    #[serde(default)]
    pub quadrature: QuadConfig,
}

impl SimConfig {
    /// The reference dipole run: `h = 0.0275` (about 2000 particles),
    /// `dt = 0.02`, `t_end = 10`.
    pub fn default_dipole() -> Self {
        let d = DipoleParams::default();
        Self {
            scenario: Scenario::GaussianDipole {
                r0: d.r0,
                z0: d.z0,
                sigma: d.sigma,
                amp: d.amp,
            },
            h: 0.0275,
            delta: None,
            mass_floor: default_mass_floor(),
            dt: 0.02,
            t_end: 10.0,
            record_every: default_record_every(),
            snap_every: 0,
            cfl: default_cfl(),
            cfl_check: true,
            k_list: default_k_list(),
            p_list: default_p_list(),
            r_list: default_r_list(),
            deterministic: false,
            out_dir: default_out_dir(),
            seed_meta: serde_json::Value::Null,
            identity_every: default_identity_every(),
            clamp_abort_fraction: default_clamp_abort(),
            quadrature: QuadConfig::default(),
        }
    }

    /// Parse JSON; on failure the message names the offending key path.
    pub fn from_json_str(text: &str, origin: &Path) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let msg = if path == "." {
                e.inner().to_string()
            } else {
                format!("at `{path}`: {}", e.inner())
            };
            Error::Parse {
                path: origin.to_path_buf(),
                msg,
            }
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text, path)
    }

    /// All semantic problems at once, one per line.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        let mut positive = |name: &str, v: f64| {
            if !(v > 0.0 && v.is_finite()) {
                problems.push(format!("`{name}` must be positive, got {v}"));
            }
        };
        positive("h", self.h);
        positive("dt", self.dt);
        positive("cfl", self.cfl);
        if let Some(d) = self.delta {
            positive("delta", d);
        }
        match &self.scenario {
            Scenario::GaussianDipole { r0, z0, sigma, amp } => {
                positive("scenario.r0", *r0);
                positive("scenario.z0", *z0);
                positive("scenario.sigma", *sigma);
                if !(*amp >= 0.0) {
                    problems.push(format!("`scenario.amp` must be nonnegative, got {amp}"));
                }
            }
            Scenario::Patch { r0, z0, a } => {
                positive("scenario.r0", *r0);
                positive("scenario.z0", *z0);
                positive("scenario.a", *a);
            }
            Scenario::FromSnapshot { .. } => {}
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            problems.push(format!("`t_end` must be nonnegative, got {}", self.t_end));
        }
        if self.record_every == 0 {
            problems.push("`record_every` must be at least 1".into());
        }
        if !(0.0..1.0).contains(&self.mass_floor) {
            problems.push(format!("`mass_floor` must lie in [0, 1), got {}", self.mass_floor));
        }
        if let Some(k) = self.k_list.iter().find(|k| !(**k >= 1.0)) {
            problems.push(format!("`k_list` entries must be >= 1, got {k}"));
        }
        if let Some(p) = self.p_list.iter().find(|p| !(**p >= 1.0 && p.is_finite())) {
            problems.push(format!("`p_list` entries must be finite and >= 1, got {p}"));
        }
        if let Some(r) = self.r_list.iter().find(|r| !(**r >= 0.0)) {
            problems.push(format!("`R_list` entries must be >= 0, got {r}"));
        }
        if !(self.clamp_abort_fraction >= 0.0) {
            problems.push("`clamp_abort_fraction` must be nonnegative".into());
        }
        let g = &self.quadrature.grid;
        if g.order == 0 || g.check_order == 0 || g.outer_panels == 0 || !(g.panel_width_over_delta > 0.0) {
            problems.push("`quadrature.grid` needs positive orders, panels and panel width".into());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems.join("; ")))
        }
    }

    /// Blob width actually used.
    pub fn resolved_delta(&self) -> f64 {
        self.delta.unwrap_or(particles::DELTA_OVER_H * self.h)
    }

    /// Copy with every optional value made explicit.
    pub fn resolved(&self) -> Self {
        Self {
            delta: Some(self.resolved_delta()),
            ..self.clone()
        }
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
