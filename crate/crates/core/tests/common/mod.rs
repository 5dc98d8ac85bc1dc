#![allow(dead_code)]

use axisym::field::{induced_velocity, FieldRequest};
use axisym::particles::{seed_gaussian_dipole, DipoleParams, ParticleSystem, DEFAULT_MASS_FLOOR};
use axisym::quadrature::{composite_nodes, GaussLegendre};

/// Thin Gaussian ring of about 500 particles, far enough from the plane that
/// its image barely overlaps it.
pub fn ring_fixture() -> ParticleSystem {
    let params = DipoleParams {
        r0: 1.0,
        z0: 1.0,
        sigma: 0.05,
        amp: 1.0,
    };
    seed_gaussian_dipole(params, 0.015, DEFAULT_MASS_FLOOR, None).unwrap()
}

/// Total circulation of the regularized field: each blob's axis flux falls
/// short of its strength by the factor `r^2 / (r^2 + delta^2)`.
pub fn regularized_circulation(sys: &ParticleSystem) -> f64 {
    let d2 = sys.delta() * sys.delta();
    sys.particles().iter().map(|p| p.strength() * p.r() * p.r() / (p.r() * p.r() + d2)).sum()
}

pub fn velocities(sys: &ParticleSystem, probes: Vec<(f64, f64)>, fold: bool) -> Vec<(f64, f64)> {
    let mut req = FieldRequest::new(probes, sys.delta());
    req.fold_odd = fold;
    induced_velocity(&req, sys).unwrap().iter().map(|v| (v.ur, v.uz)).collect()
}

/// `∮ u·dl` counterclockwise around `[r0, r1] × [z0, z1]` by composite
/// Gauss–Legendre with `panels` panels per edge.
pub fn circulation(sys: &ParticleSystem, rect: (f64, f64, f64, f64), panels: usize, fold: bool) -> f64 {
    let (r0, r1, z0, z1) = rect;
    let rule = GaussLegendre::new(8);
    let rn = composite_nodes(&rule, r0, r1, panels);
    let zn = composite_nodes(&rule, z0, z1, panels);
    let line = |pts: Vec<(f64, f64)>| velocities(sys, pts, fold);
    let bottom = line(rn.iter().map(|&(r, _)| (r, z0)).collect());
    let top = line(rn.iter().map(|&(r, _)| (r, z1)).collect());
    let right = line(zn.iter().map(|&(z, _)| (r1, z)).collect());
    let left = line(zn.iter().map(|&(z, _)| (r0, z)).collect());
    let mut c = 0.0;
    for (i, &(_, w)) in rn.iter().enumerate() {
        c += w * (bottom[i].0 - top[i].0);
    }
    for (i, &(_, w)) in zn.iter().enumerate() {
        c += w * (right[i].1 - left[i].1);
    }
    c
}

/// Probe grid spanning the ring and its surroundings.
pub fn probe_grid() -> Vec<(f64, f64)> {
    let mut p = Vec::new();
    for r in [0.4, 0.8, 1.0, 1.3, 1.9] {
        for z in [0.3, 0.7, 1.0, 1.2, 1.8] {
            p.push((r, z));
        }
    }
    p
}

/// Max over `probes` of `|∂_r(r u_r) + ∂_z(r u_z)|` by centered differences
/// with spacing `eps`.
pub fn divergence_residual(sys: &ParticleSystem, probes: &[(f64, f64)], eps: f64) -> f64 {
    let mut pts = Vec::new();
    for &(r, z) in probes {
        pts.extend([(r + eps, z), (r - eps, z), (r, z + eps), (r, z - eps)]);
    }
    let v = velocities(sys, pts, true);
    probes
        .iter()
        .enumerate()
        .map(|(i, &(r, _))| {
            let (rp, rm, zp, zm) = (v[4 * i], v[4 * i + 1], v[4 * i + 2], v[4 * i + 3]);
            let d_r = ((r + eps) * rp.0 - (r - eps) * rm.0) / (2.0 * eps);
            let d_z = r * (zp.1 - zm.1) / (2.0 * eps);
            (d_r + d_z).abs()
        })
        .fold(0.0, f64::max)
}

/// Max over `probes` of the gap between `(∂_z ψ, −∂_r ψ)/r` by centered
/// differences and the summed velocity.
pub fn stream_velocity_gap(sys: &ParticleSystem, probes: &[(f64, f64)], eps: f64) -> f64 {
    let psi = |r: f64, z: f64| axisym::field::stream_function((r, z), sys, sys.delta()).unwrap();
    let v = velocities(sys, probes.to_vec(), true);
    probes
        .iter()
        .zip(v)
        .map(|(&(r, z), (ur, uz))| {
            let fr = (psi(r, z + eps) - psi(r, z - eps)) / (2.0 * eps) / r;
            let fz = -(psi(r + eps, z) - psi(r - eps, z)) / (2.0 * eps) / r;
            (fr - ur).abs().max((fz - uz).abs())
        })
        .fold(0.0, f64::max)
}

pub fn slope(coarse: f64, fine: f64, ratio: f64) -> f64 {
    (coarse / fine).ln() / ratio.ln()
}

/// Composite Gauss–Legendre nodes over consecutive segments, `(end, panels)`
/// per segment starting from `start`.
pub fn graded_nodes(start: f64, segments: &[(f64, usize)]) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(6);
    let mut a = start;
    let mut out = Vec::new();
    for &(b, panels) in segments {
        out.extend(composite_nodes(&rule, a, b, panels));
        a = b;
    }
    out
}

/// `∬_Π r (u_r² + u_z²) dr dz` on a tensor grid, doubled from the upper
/// quadrant by symmetry.
pub fn grid_energy(sys: &ParticleSystem, r_nodes: &[(f64, f64)], z_nodes: &[(f64, f64)]) -> f64 {
    let mut pts = Vec::with_capacity(r_nodes.len() * z_nodes.len());
    let mut w = Vec::with_capacity(pts.capacity());
    for &(r, wr) in r_nodes {
        for &(z, wz) in z_nodes {
            pts.push((r, z));
            w.push(wr * wz * r);
        }
    }
    let v = velocities(sys, pts, true);
    2.0 * v.iter().zip(&w).map(|(u, w)| w * (u.0 * u.0 + u.1 * u.1)).sum::<f64>()
}
