//! Biot–Savart evaluation by direct summation over particles.
//!
//! Per source `j` with strength `γ_j = ζ_j μ_j` the probe at `(r, z)` picks up
//!
//! ```text
//! u_r += γ_j/(π r) · (z − z̄)/√(r r̄) · F'(D_δ)
//! u_z −= γ_j/(π r) · √(r r̄) [F(D_δ)/(4r) + ((r − r̄)/(r r̄) − D_δ/(2r)) F'(D_δ)]
//! ψ   += γ_j/(2π) · √(r r̄) F(D_δ)
//! ```
//!
//! and, with odd folding, the same terms for the mirror source `(r̄, −z̄)`
//! with strength `−γ_j`. Each probe's sum is independent, so probes are
//! evaluated in parallel and every sum runs in fixed source order.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::kernel::{desing_d_unchecked, f_and_fp};
use crate::particles::ParticleSystem;
use crate::{Error, Result};

/// Relative radius below which a probe is treated as lying on the axis.
pub const AXIS_EPS: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VelocitySample {
    pub r: f64,
    pub z: f64,
    pub ur: f64,
    pub uz: f64,
}

#[derive(Clone, Debug)]
pub struct FieldRequest {
    pub probes: Vec<(f64, f64)>,
    pub delta: f64,
    pub fold_odd: bool,
}

impl FieldRequest {
    pub fn new(probes: Vec<(f64, f64)>, delta: f64) -> Self {
        Self {
            probes,
            delta,
            fold_odd: true,
        }
    }
}

/// How self-interaction sums are reduced.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Reduction {
    /// One fixed-order sum per probe; bit-identical for any thread count.
    Deterministic,
    /// Each pair kernel is evaluated once and applied to both particles.
    /// Partial sums are combined in scheduling order.
    #[default]
    Fast,
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Default)]
pub(crate) struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    #[inline]
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub(crate) fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

#[derive(Clone, Copy)]
struct Source {
    r: f64,
    z: f64,
    gamma: f64,
}

fn sources_of(system: &ParticleSystem) -> Vec<Source> {
    system
        .particles()
        .iter()
        .map(|p| Source {
            r: p.r(),
            z: p.z(),
            gamma: p.strength(),
        })
        .collect()
}

fn axis_threshold(system: &ParticleSystem) -> f64 {
    AXIS_EPS * system.max_r()
}

fn check_delta(delta: f64) -> Result<()> {
    if delta >= 0.0 && delta.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("blob width delta = {delta} must be >= 0")))
    }
}

/// Unscaled velocity sums at one off-axis probe.
#[inline]
fn probe_sums(r: f64, z: f64, sources: &[Source], delta2: f64, fold: bool) -> Result<(f64, f64)> {
    let mut ur = Compensated::default();
    let mut uz = Compensated::default();
    let mut one = |zb: f64, rb: f64, gamma: f64| -> Result<()> {
        let d = desing_d_unchecked(r, z, rb, zb, delta2);
        if d <= 0.0 {
            return Err(Error::Singular { r, z });
        }
        let (f, fp) = f_and_fp(d);
        let rr = r * rb;
        let sq = rr.sqrt();
        ur.add(gamma * (z - zb) / sq * fp);
        uz.add(gamma * sq * (0.25 * f / r + ((r - rb) / rr - 0.5 * d / r) * fp));
        Ok(())
    };
    for s in sources {
        one(s.z, s.r, s.gamma)?;
        if fold {
            one(-s.z, s.r, -s.gamma)?;
        }
    }
    Ok((ur.value(), uz.value()))
}

/// Velocity at each probe induced by `sources` (and their mirror images when
/// `fold_odd` is set).
pub fn induced_velocity(
    request: &FieldRequest,
    sources: &ParticleSystem,
) -> Result<Vec<VelocitySample>> {
    check_delta(request.delta)?;
    if let Some(&(r, z)) = request.probes.iter().find(|(r, z)| !(*r >= 0.0) || !z.is_finite()) {
        return Err(Error::Domain(format!("probe ({r}, {z}) must have r >= 0")));
    }
    let src = sources_of(sources);
    let delta2 = request.delta * request.delta;
    let eps = axis_threshold(sources);
    request
        .probes
        .par_iter()
        .map(|&(r, z)| {
            if src.is_empty() {
                return Ok(VelocitySample { r, z, ur: 0.0, uz: 0.0 });
            }
            if r <= eps {
                let uz = axis_vertical_sum(z, &src, delta2, request.fold_odd);
                return Ok(VelocitySample { r, z, ur: 0.0, uz });
            }
            let (ur, uz) = probe_sums(r, z, &src, delta2, request.fold_odd)?;
            Ok(VelocitySample {
                r,
                z,
                ur: ur / (PI * r),
                uz: -uz / (PI * r),
            })
        })
        .collect()
}

fn axis_vertical_sum(z: f64, sources: &[Source], delta2: f64, fold: bool) -> f64 {
    let mut acc = Compensated::default();
    for s in sources {
        let base = s.r * s.r + delta2;
        let rb2 = s.r * s.r;
        let lo = base + (z - s.z).powi(2);
        let mut term = rb2 / (lo * lo.sqrt());
        if fold {
            let hi = base + (z + s.z).powi(2);
            term -= rb2 / (hi * hi.sqrt());
        }
        acc.add(s.gamma * term);
    }
    -0.5 * acc.value()
}

/// `u_r(r, 0)` on the symmetry plane of an odd field:
/// `(2/π) Σ γ_j z̄_j / (r √(r r̄_j)) · (−F'(D_δ(r, 0; r̄_j, z̄_j)))`.
pub fn axis_radial_velocity(r: f64, sources: &ParticleSystem, delta: f64) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!("axis radius r = {r} must be positive")));
    }
    check_delta(delta)?;
    let delta2 = delta * delta;
    let mut acc = Compensated::default();
    for p in sources.particles() {
        let d = desing_d_unchecked(r, 0.0, p.r(), p.z(), delta2);
        if d <= 0.0 {
            return Err(Error::Singular { r, z: 0.0 });
        }
        let (_, fp) = f_and_fp(d);
        acc.add(p.strength() * p.z() / (r * (r * p.r()).sqrt()) * (-fp));
    }
    Ok(2.0 / PI * acc.value())
}

/// `u_z(0, z)` on the symmetry axis of an odd field:
/// `−½ Σ γ_j r̄_j² [(r̄_j² + (z − z̄_j)² + δ²)^{-3/2} − (r̄_j² + (z + z̄_j)² + δ²)^{-3/2}]`.
///
/// This is the `r → 0` limit of the regularized kernel; at `δ = 0` it is the
/// elementary unregularized axis formula.
pub fn axis_vertical_velocity(z: f64, sources: &ParticleSystem, delta: f64) -> f64 {
    let src = sources_of(sources);
    axis_vertical_sum(z, &src, delta * delta, true)
}

/// Stream function of the odd field at one probe.
pub fn stream_function(probe: (f64, f64), sources: &ParticleSystem, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    let (r, z) = probe;
    if !(r >= 0.0) {
        return Err(Error::Domain(format!("probe ({r}, {z}) must have r >= 0")));
    }
    if r == 0.0 {
        return Ok(0.0);
    }
    let delta2 = delta * delta;
    let mut acc = Compensated::default();
    for p in sources.particles() {
        let rr = r * p.r();
        let sq = rr.sqrt();
        let d = desing_d_unchecked(r, z, p.r(), p.z(), delta2);
        let dm = desing_d_unchecked(r, z, p.r(), -p.z(), delta2);
        if d <= 0.0 || dm <= 0.0 {
            return Err(Error::Singular { r, z });
        }
        acc.add(p.strength() * sq * (f_and_fp(d).0 - f_and_fp(dm).0));
    }
    Ok(acc.value() / (2.0 * PI))
}

/// Velocity (and optionally stream function) at the particles themselves.
#[derive(Clone, Debug, Default)]
pub struct SelfField {
    pub ur: Vec<f64>,
    pub uz: Vec<f64>,
    pub psi: Option<Vec<f64>>,
}

/// Self-induced field of an odd system at its own particle positions,
/// self-interaction included through the regularized kernel. Needs `δ > 0`.
pub fn self_induced(system: &ParticleSystem, reduction: Reduction, want_psi: bool) -> Result<SelfField> {
    let delta = system.delta();
    if system.is_empty() {
        return Ok(SelfField {
            psi: want_psi.then(Vec::new),
            ..Default::default()
        });
    }
    if !(delta > 0.0) {
        return Err(Error::Domain("self-induced velocity needs a positive blob width".into()));
    }
    let src = sources_of(system);
    let near_axis = src.iter().any(|s| s.r <= axis_threshold(system));
    match reduction {
        Reduction::Fast if !near_axis => Ok(self_induced_pairs(&src, delta * delta, want_psi)),
        _ => self_induced_per_probe(system, &src, want_psi),
    }
}

fn self_induced_per_probe(system: &ParticleSystem, src: &[Source], want_psi: bool) -> Result<SelfField> {
    let probes: Vec<(f64, f64)> = src.iter().map(|s| (s.r, s.z)).collect();
    let req = FieldRequest::new(probes, system.delta());
    let vel = induced_velocity(&req, system)?;
    let psi = if want_psi {
        Some(
            src.par_iter()
                .map(|s| stream_function((s.r, s.z), system, system.delta()))
                .collect::<Result<Vec<_>>>()?,
        )
    } else {
        None
    };
    Ok(SelfField {
        ur: vel.iter().map(|v| v.ur).collect(),
        uz: vel.iter().map(|v| v.uz).collect(),
        psi,
    })
}

#[derive(Clone)]
struct Accum {
    ur: Vec<f64>,
    uz: Vec<f64>,
    psi: Vec<f64>,
}

impl Accum {
    fn zeros(n: usize) -> Self {
        Self {
            ur: vec![0.0; n],
            uz: vec![0.0; n],
            psi: vec![0.0; n],
        }
    }

    fn merge(mut self, other: Self) -> Self {
        for (a, b) in self.ur.iter_mut().zip(other.ur) {
            *a += b;
        }
        for (a, b) in self.uz.iter_mut().zip(other.uz) {
            *a += b;
        }
        for (a, b) in self.psi.iter_mut().zip(other.psi) {
            *a += b;
        }
        self
    }
}

/// Row `i` of the symmetric pair sum: pairs `(i, j)` for `j ≥ i`, direct and mirror.
#[inline]
fn pair_row(i: usize, src: &[Source], delta2: f64, acc: &mut Accum) {
    let si = src[i];
    let (ri, zi, gi) = (si.r, si.z, si.gamma);
    for (j, sj) in src.iter().enumerate().skip(i) {
        let (rj, zj, gj) = (sj.r, sj.z, sj.gamma);
        let rr = ri * rj;
        let sq = rr.sqrt();
        let dr2 = (ri - rj) * (ri - rj);

        // direct pair
        let dz = zi - zj;
        let d = (dr2 + dz * dz + delta2) / rr;
        let (f, fp) = f_and_fp(d);
        // mirror pair: D(x_i; r_j, -z_j) = D(x_j; r_i, -z_i)
        let sz = zi + zj;
        let dm = (dr2 + sz * sz + delta2) / rr;
        let (fm, fpm) = f_and_fp(dm);

        let a_ur = dz / sq * fp - sz / sq * fpm;
        let cross = (ri - rj) / rr;
        let uz_i = sq * (0.25 * (f - fm) / ri + (cross - 0.5 * d / ri) * fp - (cross - 0.5 * dm / ri) * fpm);
        let psi = sq * (f - fm);
        acc.ur[i] += gj * a_ur;
        acc.uz[i] += gj * uz_i;
        acc.psi[i] += gj * psi;
        if j != i {
            let b_ur = -dz / sq * fp - sz / sq * fpm;
            let uz_j = sq * (0.25 * (f - fm) / rj + (-cross - 0.5 * d / rj) * fp - (-cross - 0.5 * dm / rj) * fpm);
            acc.ur[j] += gi * b_ur;
            acc.uz[j] += gi * uz_j;
            acc.psi[j] += gi * psi;
        }
    }
}

fn self_induced_pairs(src: &[Source], delta2: f64, want_psi: bool) -> SelfField {
    let n = src.len();
    // rows get shorter with i; pair long and short rows so chunks balance
    let order: Vec<usize> = (0..n.div_ceil(2))
        .flat_map(|k| {
            let hi = n - 1 - k;
            if hi != k {
                vec![k, hi]
            } else {
                vec![k]
            }
        })
        .collect();
    let acc = order
        .par_chunks(32)
        .fold(
            || Accum::zeros(n),
            |mut acc, rows| {
                for &i in rows {
                    pair_row(i, src, delta2, &mut acc);
                }
                acc
            },
        )
        .reduce(|| Accum::zeros(n), Accum::merge);
    let ur = acc.ur.iter().zip(src).map(|(u, s)| u / (PI * s.r)).collect();
    let uz = acc.uz.iter().zip(src).map(|(u, s)| -u / (PI * s.r)).collect();
    let psi = want_psi.then(|| acc.psi.iter().map(|p| p / (2.0 * PI)).collect());
    SelfField { ur, uz, psi }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::particles::{seed_gaussian_dipole, DipoleParams, Particle, DEFAULT_MASS_FLOOR};

    fn blob(r: f64, z: f64, gamma: f64, delta: f64) -> ParticleSystem {
        ParticleSystem::from_particles(vec![Particle::new(r, z, gamma, 1.0).unwrap()], delta).unwrap()
    }

    fn small_dipole() -> ParticleSystem {
        seed_gaussian_dipole(DipoleParams::default(), 0.08, DEFAULT_MASS_FLOOR, None).unwrap()
    }

    #[test]
    fn empty_sources_give_zero() {
        let sys = ParticleSystem::empty(0.1);
        let req = FieldRequest::new(vec![(1.0, 1.0), (0.0, 2.0)], 0.1);
        for v in induced_velocity(&req, &sys).unwrap() {
            assert_eq!((v.ur, v.uz), (0.0, 0.0));
        }
    }

    #[test]
    fn reflection_symmetry_of_folded_field() {
        let sys = blob(1.0, 0.7, 1.0, 0.1);
        let req = FieldRequest::new(vec![(1.3, 0.4), (1.3, -0.4)], 0.1);
        let v = induced_velocity(&req, &sys).unwrap();
        assert!((v[0].ur - v[1].ur).abs() <= 1e-14 * v[0].ur.abs());
        assert!((v[0].uz + v[1].uz).abs() <= 1e-14 * v[0].uz.abs());
    }

    #[test]
    fn symmetry_plane_has_no_vertical_velocity() {
        let sys = small_dipole();
        let req = FieldRequest::new(vec![(0.5, 0.0), (1.0, 0.0), (2.0, 0.0)], sys.delta());
        for v in induced_velocity(&req, &sys).unwrap() {
            assert!(v.uz.abs() < 1e-15, "{v:?}");
        }
    }

    #[test]
    fn axis_probe_has_no_radial_velocity() {
        let sys = small_dipole();
        let req = FieldRequest::new(vec![(0.0, 0.3)], sys.delta());
        let v = induced_velocity(&req, &sys).unwrap();
        assert_eq!(v[0].ur, 0.0);
        assert_eq!(v[0].uz, axis_vertical_velocity(0.3, &sys, sys.delta()));
    }

    #[test]
    fn near_axis_vertical_velocity_converges_quadratically() {
        let sys = small_dipole();
        let z = 0.4;
        let axis = axis_vertical_velocity(z, &sys, sys.delta());
        let diff = |r: f64| {
            let req = FieldRequest::new(vec![(r, z)], sys.delta());
            (induced_velocity(&req, &sys).unwrap()[0].uz - axis).abs()
        };
        let (d1, d2) = (diff(1e-3), diff(5e-4));
        let c = d1 / 1e-6;
        let ratio = d1 / d2;
        assert!((ratio - 4.0).abs() < 0.2, "halving ratio {ratio}");
        assert!(d1 <= 1.01 * c * 1e-6);
    }

    #[test]
    fn axis_radial_velocity_matches_general_sum() {
        let sys = small_dipole();
        for r in [0.3, 1.0, 2.5] {
            let a = axis_radial_velocity(r, &sys, sys.delta()).unwrap();
            let req = FieldRequest::new(vec![(r, 0.0)], sys.delta());
            let b = induced_velocity(&req, &sys).unwrap()[0].ur;
            assert!(a > 0.0);
            assert!((a - b).abs() <= 1e-13 * a.abs(), "{a} vs {b}");
        }
        assert!(axis_radial_velocity(0.0, &sys, sys.delta()).is_err());
    }

    #[test]
    fn axis_velocities_vanish_for_zero_vorticity() {
        let sys = ParticleSystem::empty(0.1);
        assert_eq!(axis_radial_velocity(1.0, &sys, 0.1).unwrap(), 0.0);
        assert_eq!(axis_vertical_velocity(1.0, &sys, 0.1), 0.0);
    }

    #[test]
    fn axis_vertical_velocity_sign_and_plane() {
        let sys = small_dipole();
        assert_eq!(axis_vertical_velocity(0.0, &sys, sys.delta()), 0.0);
        for z in [0.1, 0.5, 2.0] {
            assert!(axis_vertical_velocity(z, &sys, sys.delta()) < 0.0);
        }
    }

    #[test]
    fn single_particle_axis_formula() {
        let sys = blob(0.8, 0.3, 1.0, 0.0);
        let z = 0.5;
        let expect = -0.5 * (0.64 / (0.64 + 0.04f64).powf(1.5) - 0.64 / (0.64 + 0.64f64).powf(1.5));
        assert!((axis_vertical_velocity(z, &sys, 0.0) - expect).abs() < 1e-15);
    }

    #[test]
    fn coincident_probe_without_blob_is_singular() {
        let sys = blob(1.0, 0.5, 1.0, 0.0);
        let req = FieldRequest::new(vec![(1.0, 0.5)], 0.0);
        assert!(matches!(induced_velocity(&req, &sys), Err(Error::Singular { .. })));
    }

    #[test]
    fn stream_function_vanishes_on_axis_and_plane() {
        let sys = small_dipole();
        assert_eq!(stream_function((0.0, 0.5), &sys, sys.delta()).unwrap(), 0.0);
        assert_eq!(stream_function((1.0, 0.0), &sys, sys.delta()).unwrap(), 0.0);
    }

    #[test]
    fn fast_and_deterministic_self_fields_agree() {
        let sys = small_dipole();
        let a = self_induced(&sys, Reduction::Fast, true).unwrap();
        let b = self_induced(&sys, Reduction::Deterministic, true).unwrap();
        let scale = b.ur.iter().chain(&b.uz).fold(0.0f64, |m, x| m.max(x.abs()));
        for k in 0..sys.len() {
            assert!((a.ur[k] - b.ur[k]).abs() < 1e-12 * scale);
            assert!((a.uz[k] - b.uz[k]).abs() < 1e-12 * scale);
            let (pa, pb) = (a.psi.as_ref().unwrap()[k], b.psi.as_ref().unwrap()[k]);
            assert!((pa - pb).abs() < 1e-12 * pb.abs().max(1e-300));
        }
    }

    #[test]
    fn deterministic_reduction_is_bitwise_repeatable() {
        let sys = small_dipole();
        let a = self_induced(&sys, Reduction::Deterministic, false).unwrap();
        let b = self_induced(&sys, Reduction::Deterministic, false).unwrap();
        assert_eq!(a.ur, b.ur);
        assert_eq!(a.uz, b.uz);
    }
}
