//! Particle representation of the upper-quadrant vorticity.
//!
//! Each particle carries a position, the transported invariant `ζ = ω/r` and
//! a volume weight `μ ≈ r·Δr·Δz`, so `ω dr dz ≈ ζ μ`. `ζ` and `μ` are fixed
//! at seeding; only positions change afterwards, and only through
//! [`Particle::set_position`], which is crate-private.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::{Error, Result};

/// Default blob width as a multiple of the seeding spacing.
pub const DELTA_OVER_H: f64 = 1.5;
/// Default relative mass below which seeded cells are dropped.
pub const DEFAULT_MASS_FLOOR: f64 = 1e-8;
/// Gaussian cores are seeded out to this many widths from the centre.
const GAUSSIAN_CUTOFF: f64 = 6.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Particle {
    r: f64,
    z: f64,
    zeta: f64,
    mu: f64,
}

impl Particle {
    pub fn new(r: f64, z: f64, zeta: f64, mu: f64) -> Result<Self> {
        let finite = r.is_finite() && z.is_finite() && zeta.is_finite() && mu.is_finite();
        if !finite || r <= 0.0 || z < 0.0 || zeta < 0.0 || mu <= 0.0 {
            return Err(Error::Domain(format!(
                "invalid particle r = {r}, z = {z}, zeta = {zeta}, mu = {mu} \
                 (need r > 0, z >= 0, zeta >= 0, mu > 0)"
            )));
        }
        Ok(Self { r, z, zeta, mu })
    }

    #[inline]
    pub fn r(&self) -> f64 {
        self.r
    }

    #[inline]
    pub fn z(&self) -> f64 {
        self.z
    }

    #[inline]
    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    #[inline]
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Vorticity mass `ζ μ` carried by the particle.
    #[inline]
    pub fn strength(&self) -> f64 {
        self.zeta * self.mu
    }

    #[inline]
    pub(crate) fn set_position(&mut self, r: f64, z: f64) {
        self.r = r;
        self.z = z;
    }
}

/// Where a system came from; written into run metadata.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Provenance {
    pub scenario: String,
    pub params: Vec<(String, f64)>,
}

impl Provenance {
    fn new(scenario: &str, params: &[(&str, f64)]) -> Self {
        Self {
            scenario: scenario.to_string(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }
}

/// Upper-quadrant particles of an odd-in-z vorticity field.
#[derive(Clone, Debug, PartialEq)]
pub struct ParticleSystem {
    particles: Vec<Particle>,
    delta: f64,
    a0: f64,
    pub meta: Provenance,
}

impl ParticleSystem {
    /// `a0` is the sup of `ω₀/r` of the field the particles sample; it must
    /// dominate every particle's `ζ`.
    pub fn new(particles: Vec<Particle>, delta: f64, a0: f64) -> Result<Self> {
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(Error::Domain(format!("blob width delta = {delta} must be >= 0")));
        }
        let max_zeta = particles.iter().map(Particle::zeta).fold(0.0, f64::max);
        if !(a0 >= max_zeta) {
            return Err(Error::Domain(format!(
                "a0 = {a0} is below the largest particle zeta {max_zeta}"
            )));
        }
        if !particles.is_empty() && particles.iter().all(|p| p.zeta == 0.0) {
            return Err(Error::Domain("nonempty system with zero total mass".into()));
        }
        Ok(Self {
            particles,
            delta,
            a0,
            meta: Provenance::default(),
        })
    }

    /// Builds a system whose `a0` is the largest particle `ζ`.
    pub fn from_particles(particles: Vec<Particle>, delta: f64) -> Result<Self> {
        let a0 = particles.iter().map(Particle::zeta).fold(0.0, f64::max);
        Self::new(particles, delta, a0)
    }

    pub fn empty(delta: f64) -> Self {
        Self {
            particles: Vec::new(),
            delta,
            a0: 0.0,
            meta: Provenance::default(),
        }
    }

    #[inline]
    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub(crate) fn particles_mut(&mut self) -> &mut [Particle] {
        &mut self.particles
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn with_delta(mut self, delta: f64) -> Result<Self> {
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(Error::Domain(format!("blob width delta = {delta} must be >= 0")));
        }
        self.delta = delta;
        Ok(self)
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    /// `Σ ζ_i μ_i`.
    pub fn total_mass(&self) -> f64 {
        self.particles.iter().map(Particle::strength).sum()
    }

    pub fn max_zeta(&self) -> f64 {
        self.particles.iter().map(Particle::zeta).fold(0.0, f64::max)
    }

    pub fn max_r(&self) -> f64 {
        self.particles.iter().map(Particle::r).fold(0.0, f64::max)
    }
}

/// Axis-aligned seeding rectangle in the `(r, z)` quadrant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BBox {
    pub r_min: f64,
    pub r_max: f64,
    pub z_min: f64,
    pub z_max: f64,
}

/// Midpoint discretization of `ζ₀` on a uniform grid of spacing `h`.
///
/// Cells whose mass falls below `mass_floor` times the total are dropped and
/// the survivors' weights rescaled so the total equals the full midpoint sum.
/// `delta` defaults to `1.5 h`.
pub fn seed_grid<F>(
    zeta0: F,
    bbox: BBox,
    h: f64,
    mass_floor: f64,
    delta: Option<f64>,
) -> Result<ParticleSystem>
where
    F: Fn(f64, f64) -> f64,
{
    let BBox {
        r_min,
        r_max,
        z_min,
        z_max,
    } = bbox;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Config(format!("seeding spacing h = {h} must be positive")));
    }
    if !(r_max > r_min && z_max > z_min) {
        return Err(Error::Config(format!("empty seeding box {bbox:?}")));
    }
    if r_min < 0.0 || z_min < 0.0 {
        return Err(Error::Config(format!("seeding box {bbox:?} leaves the upper quadrant")));
    }
    if h >= r_max - r_min || h >= z_max - z_min {
        return Err(Error::Config(format!(
            "spacing h = {h} is not smaller than the seeding box {bbox:?}"
        )));
    }
    if !(0.0..1.0).contains(&mass_floor) {
        return Err(Error::Config(format!("mass_floor = {mass_floor} outside [0, 1)")));
    }
    let delta = delta.unwrap_or(DELTA_OVER_H * h);
    let nr = ((r_max - r_min) / h - 1e-9).ceil() as usize;
    let nz = ((z_max - z_min) / h - 1e-9).ceil() as usize;

    let mut cells = Vec::with_capacity(nr * nz);
    let mut sup: f64 = 0.0;
    for i in 0..nr {
        let r = r_min + (i as f64 + 0.5) * h;
        for j in 0..nz {
            let z = z_min + (j as f64 + 0.5) * h;
            let zeta = zeta0(r, z);
            if !(zeta >= 0.0 && zeta.is_finite()) {
                return Err(Error::Config(format!(
                    "initial zeta = {zeta} at ({r}, {z}) must be finite and nonnegative"
                )));
            }
            sup = sup.max(zeta);
            if zeta > 0.0 {
                cells.push((r, z, zeta, r * h * h));
            }
        }
    }
    let total: f64 = cells.iter().map(|c| c.2 * c.3).sum();
    if total == 0.0 {
        return Ok(ParticleSystem::empty(delta));
    }
    let floor = mass_floor * total;
    cells.retain(|c| c.2 * c.3 >= floor);
    let kept: f64 = cells.iter().map(|c| c.2 * c.3).sum();
    let scale = total / kept;
    let particles = cells
        .into_iter()
        .map(|(r, z, zeta, mu)| Particle::new(r, z, zeta, mu * scale))
        .collect::<Result<Vec<_>>>()?;
    ParticleSystem::new(particles, delta, sup)
}

/// Parameters of a Gaussian vortex-ring core `amp·exp(−|x − x₀|²/σ²)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DipoleParams {
    pub r0: f64,
    pub z0: f64,
    pub sigma: f64,
    pub amp: f64,
}

impl Default for DipoleParams {
    fn default() -> Self {
        Self {
            r0: 1.0,
            z0: 0.5,
            sigma: 0.2,
            amp: 1.0,
        }
    }
}

fn floor_to_grid(x: f64, h: f64) -> f64 {
    (x / h).floor() * h
}

/// Upper ring of an anti-parallel pair; the lower ring is its mirror image.
pub fn seed_gaussian_dipole(
    params: DipoleParams,
    h: f64,
    mass_floor: f64,
    delta: Option<f64>,
) -> Result<ParticleSystem> {
    let DipoleParams { r0, z0, sigma, amp } = params;
    if !(r0 > 0.0 && z0 > 0.0 && sigma > 0.0 && amp >= 0.0) {
        return Err(Error::Config(format!(
            "dipole needs r0, z0, sigma > 0 and amp >= 0, got {params:?}"
        )));
    }
    let delta_or_default = delta.unwrap_or(DELTA_OVER_H * h);
    if amp == 0.0 {
        return Ok(ParticleSystem::empty(delta_or_default));
    }
    let reach = GAUSSIAN_CUTOFF * sigma;
    // cell edges sit on multiples of h so halving h nests the grids
    let bbox = BBox {
        r_min: floor_to_grid((r0 - reach).max(0.0), h),
        r_max: r0 + reach,
        z_min: 0.0,
        z_max: z0 + reach,
    };
    let inv_s2 = 1.0 / (sigma * sigma);
    let zeta0 = |r: f64, z: f64| {
        let d2 = (r - r0).powi(2) + (z - z0).powi(2);
        amp * (-d2 * inv_s2).exp()
    };
    let mut system = seed_grid(zeta0, bbox, h, mass_floor, delta)?;
    system.a0 = amp;
    system.meta = Provenance::new(
        "gaussian_dipole",
        &[("r0", r0), ("z0", z0), ("sigma", sigma), ("amp", amp), ("h", h)],
    );
    Ok(system)
}

/// Patch data `ω₀/r = 1` on the disc of radius `a` about `(r0, z0)`.
pub fn seed_patch(
    r0: f64,
    z0: f64,
    a: f64,
    h: f64,
    mass_floor: f64,
    delta: Option<f64>,
) -> Result<ParticleSystem> {
    if !(a > 0.0 && r0 - a > 0.0 && z0 - a > 0.0) {
        return Err(Error::Config(format!(
            "patch disc centre ({r0}, {z0}) radius {a} must lie inside the upper quadrant"
        )));
    }
    let bbox = BBox {
        r_min: floor_to_grid(r0 - a, h),
        r_max: r0 + a + h,
        z_min: floor_to_grid(z0 - a, h),
        z_max: z0 + a + h,
    };
    let a2 = a * a;
    let zeta0 = |r: f64, z: f64| {
        if (r - r0).powi(2) + (z - z0).powi(2) <= a2 {
            1.0
        } else {
            0.0
        }
    };
    let mut system = seed_grid(zeta0, bbox, h, mass_floor, delta)?;
    system.a0 = 1.0;
    system.meta = Provenance::new("patch", &[("r0", r0), ("z0", z0), ("a", a), ("h", h)]);
    Ok(system)
}

/// A particle system together with the time it was captured at.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub system: ParticleSystem,
}

impl Snapshot {
    /// Plain-text form: a header `count delta a0 time`, then `r z zeta mu`
    /// per particle, every number in shortest round-trip notation.
    pub fn to_text(&self) -> String {
        let sys = &self.system;
        let mut out = String::with_capacity(64 * (sys.len() + 1));
        let _ = writeln!(out, "{} {:e} {:e} {:e}", sys.len(), sys.delta, sys.a0, self.time);
        for p in sys.particles() {
            let _ = writeln!(out, "{:e} {:e} {:e} {:e}", p.r, p.z, p.zeta, p.mu);
        }
        out
    }

    pub fn from_text(text: &str, origin: &Path) -> Result<Self> {
        let err = |msg: String| Error::Parse {
            path: origin.to_path_buf(),
            msg,
        };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| err("missing header line".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(err(format!("header has {} fields, expected 4", fields.len())));
        }
        let count: usize = fields[0]
            .parse()
            .map_err(|e| err(format!("particle count {:?}: {e}", fields[0])))?;
        let num = |s: &str, what: &str, line: usize| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|e| err(format!("line {}: {what} {s:?}: {e}", line + 1)))
        };
        let delta = num(fields[1], "delta", 0)?;
        let a0 = num(fields[2], "a0", 0)?;
        let time = num(fields[3], "time", 0)?;
        let mut particles = Vec::with_capacity(count);
        for (idx, line) in lines {
            let v: Vec<&str> = line.split_whitespace().collect();
            if v.len() != 4 {
                return Err(err(format!("line {}: expected 4 columns", idx + 1)));
            }
            let p = Particle::new(
                num(v[0], "r", idx)?,
                num(v[1], "z", idx)?,
                num(v[2], "zeta", idx)?,
                num(v[3], "mu", idx)?,
            )
            .map_err(|e| err(format!("line {}: {e}", idx + 1)))?;
            particles.push(p);
        }
        if particles.len() != count {
            return Err(err(format!(
                "header announces {count} particles, found {}",
                particles.len()
            )));
        }
        let mut system = ParticleSystem::new(particles, delta, a0).map_err(|e| err(e.to_string()))?;
        system.meta = Provenance::new("from_snapshot", &[("time", time)]);
        Ok(Self { time, system })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text, path)
    }
}
