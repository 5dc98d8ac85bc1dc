//! Scalar functionals of a particle system and both sides of the moment
//! identities.
//!
//! Bulk quantities are particle sums over `ω dr dz = ζ dμ`. Their
//! counterparts on the other side of each identity are integrals of the
//! velocity field along the symmetry plane `z = 0`, the axis `r = 0`, or over
//! the quadrant. Line velocities use the unregularized kernel by default
//! (see [`crate::config::LineKernel`]); the area integral always uses the blob
//! kernel, since its nodes pass through the particle cloud.

use std::collections::HashMap;

use crate::config::{AxisQuadConfig, GridConfig, QuadConfig};
use crate::field::{self, FieldRequest, Reduction, SelfField};
use crate::particles::ParticleSystem;
use crate::quadrature::{adaptive_with_breaks, composite_nodes, half_line, GaussLegendre, Tolerance};
use crate::{Error, Result};

/// `P_k = Σ r_i^k ζ_i μ_i`.
pub fn moment_pk(system: &ParticleSystem, k: f64) -> f64 {
    system.particles().iter().map(|p| p.r().powf(k) * p.strength()).sum()
}

/// `Z = Σ z_i ζ_i μ_i`.
pub fn vertical_z(system: &ParticleSystem) -> f64 {
    system.particles().iter().map(|p| p.z() * p.strength()).sum()
}

/// Mass inside the cylinder `r ≤ radius`.
pub fn mass_m_r(system: &ParticleSystem, radius: f64) -> Result<f64> {
    if !(radius >= 0.0) {
        return Err(Error::Domain(format!("radius R = {radius} must be >= 0")));
    }
    Ok(system
        .particles()
        .iter()
        .filter(|p| p.r() <= radius)
        .map(|p| p.strength())
        .sum())
}

/// `E₀ = 2 Σ ψ(x_i) ζ_i μ_i`, the stream-vorticity pairing over the whole
/// half-plane.
pub fn energy_e0(system: &ParticleSystem) -> Result<f64> {
    if system.is_empty() {
        return Ok(0.0);
    }
    let field = field::self_induced(system, Reduction::Fast, true)?;
    Ok(energy_from_field(system, &field))
}

pub(crate) fn energy_from_field(system: &ParticleSystem, field: &SelfField) -> f64 {
    let psi = field.psi.as_deref().expect("stream function requested with the field");
    2.0 * system.particles().iter().zip(psi).map(|(p, s)| s * p.strength()).sum::<f64>()
}

#[derive(Clone, Debug, PartialEq)]
pub struct OmegaNorms {
    /// `max ζ_i r_i`.
    pub sup: f64,
    /// `‖ω‖_{L^p(ℝ³)}` for each requested `p`.
    pub lp: Vec<f64>,
}

/// `‖ω‖_∞` and `‖ω‖_p` with `‖ω‖_p^p = 4π Σ (ζ_i r_i)^p μ_i`.
pub fn omega_norms(system: &ParticleSystem, p_list: &[f64]) -> Result<OmegaNorms> {
    if let Some(p) = p_list.iter().find(|p| !(**p >= 1.0)) {
        return Err(Error::Domain(format!("norm exponent p = {p} must be >= 1")));
    }
    let ps = system.particles();
    let sup = ps.iter().map(|p| p.zeta() * p.r()).fold(0.0, f64::max);
    let lp = p_list
        .iter()
        .map(|&q| {
            let s: f64 = ps.iter().map(|p| (p.zeta() * p.r()).powf(q) * p.mu()).sum();
            (4.0 * std::f64::consts::PI * s).powf(1.0 / q)
        })
        .collect();
    Ok(OmegaNorms { sup, lp })
}

/// `(Σ z_i/|x_i| ζ_i μ_i, Σ (1 − z_i/|x_i|) ζ_i μ_i)`.
pub fn weighted_masses(system: &ParticleSystem) -> (f64, f64) {
    system.particles().iter().fold((0.0, 0.0), |(wz, wr), p| {
        let c = p.z() / p.r().hypot(p.z());
        (wz + c * p.strength(), wr + (1.0 - c) * p.strength())
    })
}

/// Lower bound for `∫₀^∞ u_r(r, 0) dr` from the initial mass `m0`, vertical
/// moment `z0` and `a0 = ‖ω₀/r‖_∞`.
pub fn gamma_bound(m0: f64, z0: f64, a0: f64) -> Result<f64> {
    if !(m0 > 0.0 && z0 > 0.0 && a0 > 0.0) {
        return Err(Error::Domain(format!(
            "lower bound needs positive mass, vertical moment and sup (got {m0}, {z0}, {a0})"
        )));
    }
    let k = a0.sqrt() * m0 / (2.0 * z0.powf(1.5));
    Ok((1.0 - k / (1.0 + k * k).sqrt()) * m0 / 4.0)
}

pub fn gamma_bound_of(initial: &ParticleSystem) -> Result<f64> {
    gamma_bound(initial.total_mass(), vertical_z(initial), initial.a0())
}

/// Extents of the particle cloud: `(r_min, r_max, z_min, z_max)`.
fn extents(system: &ParticleSystem) -> (f64, f64, f64, f64) {
    system.particles().iter().fold(
        (f64::INFINITY, 0.0, f64::INFINITY, 0.0),
        |(a, b, c, d), p| (a.min(p.r()), b.max(p.r()), c.min(p.z()), d.max(p.z())),
    )
}

fn axis_tolerance(cfg: &AxisQuadConfig) -> Tolerance {
    Tolerance::new(0.0, cfg.rel_tol).with_max_intervals(cfg.max_intervals)
}

/// Finite pieces `[0, lo, hi, end]` then the half-line `[end, ∞)`.
fn integrate_axis<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, end: f64, tol: Tolerance) -> (f64, bool) {
    let mut pts = vec![0.0];
    for x in [lo, hi, end] {
        if x > *pts.last().unwrap() {
            pts.push(x);
        }
    }
    let inner = adaptive_with_breaks(&mut f, &pts, tol);
    let tail = half_line(&mut f, end, end, tol);
    (inner.value + tail.value, inner.converged && tail.converged)
}

/// Integrals of `u_r(r, 0)` along the symmetry plane.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PlaneIntegrals {
    /// `∫ u_r dr`.
    pub ur: f64,
    /// `∫ r u_r² dr`.
    pub r_ur2: f64,
    /// `∫ r² u_r dr`.
    pub r2_ur: f64,
    /// Largest `|u_r|` seen at any quadrature node.
    pub ur_max: f64,
    pub converged: bool,
}

/// `u_r(·, 0)` with memoized nodes, so the three integrals share evaluations.
struct PlaneField<'a> {
    system: &'a ParticleSystem,
    delta: f64,
    memo: HashMap<u64, f64>,
    error: Option<Error>,
}

impl PlaneField<'_> {
    fn at(&mut self, r: f64) -> f64 {
        if !(r > 0.0) || self.error.is_some() {
            return 0.0;
        }
        if let Some(&v) = self.memo.get(&r.to_bits()) {
            return v;
        }
        let v = match field::axis_radial_velocity(r, self.system, self.delta) {
            Ok(v) => v,
            Err(e) => {
                self.error = Some(e);
                0.0
            }
        };
        self.memo.insert(r.to_bits(), v);
        v
    }
}

pub fn plane_integrals(system: &ParticleSystem, cfg: &AxisQuadConfig) -> Result<PlaneIntegrals> {
    if system.is_empty() {
        return Ok(PlaneIntegrals {
            converged: true,
            ..Default::default()
        });
    }
    let (r_min, r_max, _, z_max) = extents(system);
    let d = 3.0 * system.delta();
    let (lo, hi, end) = ((r_min - d).max(0.0), r_max + d, r_max.max(z_max) + d);
    let tol = axis_tolerance(cfg);
    let mut fld = PlaneField {
        system,
        delta: cfg.line_delta(system.delta()),
        memo: HashMap::new(),
        error: None,
    };
    let (ur, c1) = integrate_axis(|r| fld.at(r), lo, hi, end, tol);
    let (r_ur2, c2) = integrate_axis(
        |r| {
            let u = fld.at(r);
            r * u * u
        },
        lo,
        hi,
        end,
        tol,
    );
    let (r2_ur, c3) = integrate_axis(|r| r * r * fld.at(r), lo, hi, end, tol);
    if let Some(e) = fld.error {
        return Err(e);
    }
    let ur_max = fld.memo.values().fold(0.0_f64, |m, v| m.max(v.abs()));
    Ok(PlaneIntegrals {
        ur,
        r_ur2,
        r2_ur,
        ur_max,
        converged: c1 && c2 && c3,
    })
}

/// Integrals of `u_z(0, z)` along the symmetry axis.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AxisIntegrals {
    /// `∫ (−u_z) dz`.
    pub neg_uz: f64,
    /// `∫ z (−u_z) dz`.
    pub z_neg_uz: f64,
    /// `∫ u_z²/2 dz`.
    pub half_uz2: f64,
    pub converged: bool,
}

pub fn axis_integrals(system: &ParticleSystem, cfg: &AxisQuadConfig) -> AxisIntegrals {
    if system.is_empty() {
        return AxisIntegrals {
            converged: true,
            ..Default::default()
        };
    }
    let (_, r_max, z_min, z_max) = extents(system);
    let d = 3.0 * system.delta();
    let (lo, hi, end) = ((z_min - d).max(0.0), z_max + d, r_max.max(z_max) + d);
    let tol = axis_tolerance(cfg);
    let delta = cfg.line_delta(system.delta());
    let uz = |z: f64| field::axis_vertical_velocity(z, system, delta);
    let (neg_uz, c1) = integrate_axis(|z| -uz(z), lo, hi, end, tol);
    let (z_neg_uz, c2) = integrate_axis(|z| -z * uz(z), lo, hi, end, tol);
    let (half_uz2, c3) = integrate_axis(|z| 0.5 * uz(z).powi(2), lo, hi, end, tol);
    AxisIntegrals {
        neg_uz,
        z_neg_uz,
        half_uz2,
        converged: c1 && c2 && c3,
    }
}

/// Composite rule along one coordinate: equal panels on `[0, extent]`, then
/// `[extent, ∞)` mapped from `t ∈ [0, 1)` by `x = extent (1 + t/(1 − t))`.
fn coordinate_nodes(rule: &GaussLegendre, extent: f64, width: f64, outer: usize) -> Vec<(f64, f64)> {
    let panels = (extent / width).ceil().max(1.0) as usize;
    let mut nodes = composite_nodes(rule, 0.0, extent, panels);
    for (t, w) in composite_nodes(rule, 0.0, 1.0, outer) {
        let s = 1.0 - t;
        nodes.push((extent + extent * t / s, w * extent / (s * s)));
    }
    nodes
}

/// `∬_{Π⁺} u_r²/r dr dz` with a convergence estimate.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GridIntegral {
    pub value: f64,
    /// Same panels with the lower-order rule.
    pub check: f64,
    pub nodes: usize,
    pub converged: bool,
}

fn grid_pass(system: &ParticleSystem, grid: &GridConfig, order: usize) -> Result<(f64, usize)> {
    let (_, r_max, _, z_max) = extents(system);
    let delta = system.delta();
    let width = grid.panel_width_over_delta * delta;
    let rule = GaussLegendre::new(order);
    let rn = coordinate_nodes(&rule, r_max + 2.0 * width, width, grid.outer_panels);
    let zn = coordinate_nodes(&rule, z_max + 2.0 * width, width, grid.outer_panels);
    let probes: Vec<(f64, f64)> = rn.iter().flat_map(|&(r, _)| zn.iter().map(move |&(z, _)| (r, z))).collect();
    let n = probes.len();
    let vel = field::induced_velocity(&FieldRequest::new(probes, delta), system)?;
    let mut total = field::Compensated::default();
    for (i, &(r, wr)) in rn.iter().enumerate() {
        for (j, &(_, wz)) in zn.iter().enumerate() {
            let u = vel[i * zn.len() + j].ur;
            total.add(wr * wz * u * u / r);
        }
    }
    Ok((total.value(), n))
}

pub fn grid_ur2_over_r(system: &ParticleSystem, grid: &GridConfig) -> Result<GridIntegral> {
    if system.is_empty() {
        return Ok(GridIntegral {
            converged: true,
            ..Default::default()
        });
    }
    let (value, n1) = grid_pass(system, grid, grid.order)?;
    let (check, n2) = grid_pass(system, grid, grid.check_order)?;
    Ok(GridIntegral {
        value,
        check,
        nodes: n1 + n2,
        converged: (value - check).abs() <= grid.rel_tol * value.abs(),
    })
}

/// `(2 Σ r_i u_r(x_i) ζ_i μ_i, ∫ r u_r(r, 0)² dr)`: two forms of `P₂'`.
pub fn dp2_two_ways(system: &ParticleSystem, quad: &QuadConfig) -> Result<(f64, f64)> {
    if system.is_empty() {
        return Ok((0.0, 0.0));
    }
    let f = field::self_induced(system, Reduction::Fast, false)?;
    let plane = plane_integrals(system, &quad.axis)?;
    Ok((dp2_bulk(system, &f), plane.r_ur2))
}

/// `(Σ u_z(x_i) ζ_i μ_i, −[∫ u_z(0, z)²/2 dz + ∬ u_r²/r dr dz])`: two forms
/// of `Z'`.
pub fn dz_two_ways(system: &ParticleSystem, quad: &QuadConfig) -> Result<(f64, f64)> {
    if system.is_empty() {
        return Ok((0.0, 0.0));
    }
    let f = field::self_induced(system, Reduction::Fast, false)?;
    let axis = axis_integrals(system, &quad.axis);
    let grid = grid_ur2_over_r(system, &quad.grid)?;
    Ok((dz_bulk(system, &f), -(axis.half_uz2 + grid.value)))
}

fn dp2_bulk(system: &ParticleSystem, f: &SelfField) -> f64 {
    2.0 * system.particles().iter().zip(&f.ur).map(|(p, u)| p.r() * u * p.strength()).sum::<f64>()
}

fn dz_bulk(system: &ParticleSystem, f: &SelfField) -> f64 {
    system.particles().iter().zip(&f.uz).map(|(p, u)| u * p.strength()).sum()
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MassIdentities {
    /// `∫₀^∞ u_r(r, 0) dr`.
    pub axis_r: f64,
    /// `∫₀^∞ −u_z(0, z) dz`.
    pub axis_z: f64,
    pub weighted_z: f64,
    pub weighted_r: f64,
    pub converged: bool,
}

pub fn mass_identities(system: &ParticleSystem, quad: &QuadConfig) -> Result<MassIdentities> {
    let plane = plane_integrals(system, &quad.axis)?;
    let axis = axis_integrals(system, &quad.axis);
    let (weighted_z, weighted_r) = weighted_masses(system);
    Ok(MassIdentities {
        axis_r: plane.ur,
        axis_z: axis.neg_uz,
        weighted_z,
        weighted_r,
        converged: plane.converged && axis.converged,
    })
}

/// `∫₀^∞ r² u_r(r, 0) dr`, which equals `P₂`.
pub fn p2_line_integral(system: &ParticleSystem, quad: &QuadConfig) -> Result<f64> {
    Ok(plane_integrals(system, &quad.axis)?.r2_ur)
}

/// `∫₀^∞ z (−u_z(0, z)) dz`, which equals `Z`.
pub fn z_line_integral(system: &ParticleSystem, quad: &QuadConfig) -> f64 {
    axis_integrals(system, &quad.axis).z_neg_uz
}

/// Every identity at once, sharing the field evaluations.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Identities {
    pub m0: f64,
    pub p2: f64,
    pub big_z: f64,
    pub dp2_bulk: f64,
    pub dp2_axis: f64,
    pub dz_bulk: f64,
    pub dz_axis: f64,
    pub mass: MassIdentities,
    pub p2_line: f64,
    pub z_line: f64,
    pub grid: GridIntegral,
    pub plane: PlaneIntegrals,
    pub axis: AxisIntegrals,
}

impl Identities {
    /// Named relative residuals, scaled as in the identity tolerances.
    pub fn residuals(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("dp2", rel(self.dp2_bulk - self.dp2_axis, self.dp2_bulk)),
            ("dz", rel(self.dz_bulk - self.dz_axis, self.dz_bulk)),
            ("mass", rel(self.mass.axis_r + self.mass.axis_z - self.m0, self.m0)),
            ("mass_z", rel(self.mass.axis_z - self.mass.weighted_z, self.m0)),
            ("p2_line", rel(self.p2_line - self.p2, self.p2)),
            ("z_line", rel(self.z_line - self.big_z, self.big_z)),
        ]
    }

    pub fn converged(&self) -> bool {
        self.mass.converged && self.grid.converged
    }
}

/// `|a|/|b|`, with `0/0 = 0` so an empty field passes.
pub fn rel(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else {
        (a / b).abs()
    }
}

pub fn identities(system: &ParticleSystem, quad: &QuadConfig, reduction: Reduction) -> Result<Identities> {
    if system.is_empty() {
        return Ok(Identities {
            mass: MassIdentities {
                converged: true,
                ..Default::default()
            },
            grid: GridIntegral {
                converged: true,
                ..Default::default()
            },
            ..Default::default()
        });
    }
    let f = field::self_induced(system, reduction, false)?;
    let plane = plane_integrals(system, &quad.axis)?;
    let axis = axis_integrals(system, &quad.axis);
    let grid = grid_ur2_over_r(system, &quad.grid)?;
    let (weighted_z, weighted_r) = weighted_masses(system);
    Ok(Identities {
        m0: system.total_mass(),
        p2: moment_pk(system, 2.0),
        big_z: vertical_z(system),
        dp2_bulk: dp2_bulk(system, &f),
        dp2_axis: plane.r_ur2,
        dz_bulk: dz_bulk(system, &f),
        dz_axis: -(axis.half_uz2 + grid.value),
        mass: MassIdentities {
            axis_r: plane.ur,
            axis_z: axis.neg_uz,
            weighted_z,
            weighted_r,
            converged: plane.converged && axis.converged,
        },
        p2_line: plane.r2_ur,
        z_line: axis.z_neg_uz,
        grid,
        plane,
        axis,
    })
}

/// Least-squares fit of `log Q = a + slope · log t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in `log Q`.
    pub residual: f64,
    pub samples: usize,
}

pub fn fit_exponent(series: &[(f64, f64)], window: (f64, f64)) -> Result<PowerFit> {
    let (lo, hi) = window;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::Domain(format!("fit window [{lo}, {hi}] needs 0 < t_lo < t_hi")));
    }
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|(t, _)| *t >= lo && *t <= hi)
        .map(|&(t, q)| (t.ln(), q))
        .collect();
    if pts.len() < 5 {
        return Err(Error::Domain(format!(
            "fit window [{lo}, {hi}] holds {} samples, need at least 5",
            pts.len()
        )));
    }
    if let Some((_, q)) = pts.iter().find(|(_, q)| !(*q > 0.0)) {
        return Err(Error::Domain(format!("log-log fit needs positive values, got {q}")));
    }
    let pts: Vec<(f64, f64)> = pts.into_iter().map(|(x, q)| (x, q.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    Ok(PowerFit {
        slope,
        intercept,
        residual: (ss / n).sqrt(),
        samples: pts.len(),
    })
}

/// Which exponents, norms and radii each record carries.
#[derive(Clone, Debug, PartialEq)]
pub struct RecordSpec {
    pub k_list: Vec<f64>,
    pub p_list: Vec<f64>,
    pub r_list: Vec<f64>,
    pub quad: QuadConfig,
}

impl Default for RecordSpec {
    fn default() -> Self {
        Self {
            k_list: vec![2.0, 3.0],
            p_list: vec![1.0, 2.0],
            r_list: vec![1.0, 2.0],
            quad: QuadConfig::default(),
        }
    }
}

/// One row of the time series.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub p_k: Vec<f64>,
    pub big_z: f64,
    pub m0: f64,
    pub m_r: Vec<f64>,
    pub e0: f64,
    pub omega_sup: f64,
    pub omega_lp: Vec<f64>,
    pub dp2_bulk: f64,
    pub dp2_axis: f64,
    pub dz_bulk: f64,
    /// NaN on records where the area integral was skipped.
    pub dz_axis: f64,
    pub mass_axis_r: f64,
    pub mass_axis_z: f64,
    pub mass_weighted_z: f64,
    pub gamma0: f64,
    pub ur_axis_integral: f64,
    pub ineq_resid: f64,
    pub lj_ratio: f64,
    pub clamp_count: usize,
    pub mass_weighted_r: f64,
    pub p2_line: f64,
    pub z_line: f64,
    /// Running `∫₀^t m_R⁴ dt` for each radius.
    pub mr4_integral: Vec<f64>,
    /// `(−Z') R⁴ / m_R⁴` for each radius.
    pub z_ratio: Vec<f64>,
    pub flags: Vec<&'static str>,
}

/// Builds successive records of one run and carries the running integrals.
#[derive(Clone, Debug)]
pub struct Tracker {
    spec: RecordSpec,
    gamma0: f64,
    e0_initial: Option<f64>,
    last: Option<(f64, Vec<f64>)>,
    mr4_integral: Vec<f64>,
}

impl Tracker {
    /// `initial` fixes `γ`; an empty system has none and records NaN.
    pub fn new(spec: RecordSpec, initial: &ParticleSystem) -> Self {
        let gamma0 = gamma_bound_of(initial).unwrap_or(f64::NAN);
        let n = spec.r_list.len();
        Self {
            spec,
            gamma0,
            e0_initial: None,
            last: None,
            mr4_integral: vec![0.0; n],
        }
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    /// Record at time `t`. `field` must hold the velocity and stream function
    /// at the particles of `system`; the area integral for `dz_axis` runs
    /// only when `full` is set.
    pub fn record(
        &mut self,
        t: f64,
        system: &ParticleSystem,
        field: &SelfField,
        clamp_count: usize,
        full: bool,
    ) -> Result<DiagnosticsRecord> {
        let spec = &self.spec;
        let mut flags = Vec::new();
        let plane = plane_integrals(system, &spec.quad.axis)?;
        let axis = axis_integrals(system, &spec.quad.axis);
        if !(plane.converged && axis.converged) {
            flags.push("axis_quadrature");
        }
        let dz_axis = if full {
            let grid = grid_ur2_over_r(system, &spec.quad.grid)?;
            if !grid.converged {
                flags.push("grid");
            }
            -(axis.half_uz2 + grid.value)
        } else {
            f64::NAN
        };
        let e0 = if system.is_empty() { 0.0 } else { energy_from_field(system, field) };
        let e0_initial = *self.e0_initial.get_or_insert(e0);
        let a0 = system.a0();
        let p2 = moment_pk(system, 2.0);
        let dp2 = dp2_bulk(system, field);
        let dz = dz_bulk(system, field);
        let m_r = spec
            .r_list
            .iter()
            .map(|&r| mass_m_r(system, r))
            .collect::<Result<Vec<_>>>()?;
        let mr4: Vec<f64> = m_r.iter().map(|m| m.powi(4)).collect();
        if let Some((t_prev, prev)) = &self.last {
            let dt = t - t_prev;
            for (acc, (a, b)) in self.mr4_integral.iter_mut().zip(prev.iter().zip(&mr4)) {
                *acc += 0.5 * dt * (a + b);
            }
        }
        self.last = Some((t, mr4.clone()));
        let norms = omega_norms(system, &spec.p_list)?;
        let (weighted_z, weighted_r) = weighted_masses(system);
        let ur_sup = field.ur.iter().fold(plane.ur_max, |m, u| m.max(u.abs()));
        let record = DiagnosticsRecord {
            t,
            p_k: spec.k_list.iter().map(|&k| moment_pk(system, k)).collect(),
            big_z: vertical_z(system),
            m0: system.total_mass(),
            m_r,
            e0,
            omega_sup: norms.sup,
            omega_lp: norms.lp,
            dp2_bulk: dp2,
            dp2_axis: plane.r_ur2,
            dz_bulk: dz,
            dz_axis,
            mass_axis_r: plane.ur,
            mass_axis_z: axis.neg_uz,
            mass_weighted_z: weighted_z,
            gamma0: self.gamma0,
            ur_axis_integral: plane.ur,
            ineq_resid: 2.0 * (a0 * e0_initial).sqrt() * p2.sqrt() - dp2,
            lj_ratio: ur_sup / (e0.cbrt() * a0.sqrt() * p2.powf(1.0 / 6.0)),
            clamp_count,
            mass_weighted_r: weighted_r,
            p2_line: plane.r2_ur,
            z_line: axis.z_neg_uz,
            mr4_integral: self.mr4_integral.clone(),
            z_ratio: spec
                .r_list
                .iter()
                .zip(&mr4)
                .map(|(r, m4)| -dz * r.powi(4) / m4)
                .collect(),
            flags,
        };
        Ok(record)
    }
}
