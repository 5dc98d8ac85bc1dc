mod common;

use axisym::diagnostics::energy_e0;
use axisym::particles::{seed_gaussian_dipole, DipoleParams, ParticleSystem, DEFAULT_MASS_FLOOR};
use common::*;

fn thin_ring(h: f64) -> ParticleSystem {
    let params = DipoleParams {
        r0: 1.0,
        z0: 1.0,
        sigma: 0.05,
        amp: 1.0,
    };
    seed_gaussian_dipole(params, h, DEFAULT_MASS_FLOOR, None).unwrap()
}

/// Panels dense around the core at `(1, 1)`, scaled by `k`, out to `end`.
fn grid(k: f64, end: f64) -> Vec<(f64, f64)> {
    let n = |p: f64| (p * k).ceil() as usize;
    let mut seg = vec![(0.75, n(4.0)), (1.25, n(25.0)), (3.0, n(9.0)), (8.0, n(5.0))];
    if end > 8.0 {
        seg.push((end, n(4.0)));
    }
    graded_nodes(0.0, &seg)
}

fn gap(sys: &ParticleSystem) -> f64 {
    let g = grid(1.0, 8.0);
    let oracle = grid_energy(sys, &g, &g);
    (energy_e0(sys).unwrap() - oracle) / oracle
}

#[test]
fn pairing_energy_matches_grid_quadrature() {
    let sys = thin_ring(0.0075);
    let base = grid(1.0, 8.0);
    let e_grid = grid_energy(&sys, &base, &base);
    let finer = grid(1.5, 8.0);
    assert!((grid_energy(&sys, &finer, &finer) / e_grid - 1.0).abs() < 1e-4);
    let wider = grid(1.0, 16.0);
    assert!((grid_energy(&sys, &wider, &wider) / e_grid - 1.0).abs() < 1e-4);
    let e0 = energy_e0(&sys).unwrap();
    assert!(((e0 - e_grid) / e_grid).abs() < 0.02, "{e0} vs {e_grid}");
}

#[test]
fn pairing_gap_shrinks_with_the_blob_width() {
    let coarse = gap(&thin_ring(0.015));
    let fine = gap(&thin_ring(0.0075));
    assert!(fine.abs() < 0.5 * coarse.abs(), "{coarse} -> {fine}");
}

#[test]
fn energy_scales_quadratically_with_strength() {
    let sys = thin_ring(0.03);
    let doubled = ParticleSystem::from_particles(
        sys.particles()
            .iter()
            .map(|p| axisym::particles::Particle::new(p.r(), p.z(), 2.0 * p.zeta(), p.mu()).unwrap())
            .collect(),
        sys.delta(),
    )
    .unwrap();
    let (a, b) = (energy_e0(&sys).unwrap(), energy_e0(&doubled).unwrap());
    assert!((b / a - 4.0).abs() < 1e-12);
}
