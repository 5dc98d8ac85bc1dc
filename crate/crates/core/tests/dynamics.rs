mod common;

use axisym::config::{Scenario, SimConfig};
use axisym::dynamics::{self, rk4_frozen, MemorySink};
use axisym::particles::{seed_gaussian_dipole, DipoleParams, Snapshot, DEFAULT_MASS_FLOOR};
use common::*;

fn small_config() -> SimConfig {
    SimConfig {
        h: 0.11,
        dt: 0.05,
        t_end: 0.3,
        identity_every: 0,
        deterministic: true,
        ..SimConfig::default_dipole()
    }
}

#[test]
fn frozen_field_round_trip_error_is_fifth_order() {
    let sources = seed_gaussian_dipole(DipoleParams::default(), 0.11, DEFAULT_MASS_FLOOR, None).unwrap();
    let start = vec![(0.6, 0.4), (1.1, 0.8), (1.5, 0.2)];
    let gap = |dt: f64| {
        let there = rk4_frozen(&start, &sources, dt).unwrap();
        let back = rk4_frozen(&there, &sources, -dt).unwrap();
        back.iter()
            .zip(&start)
            .map(|(a, b)| (a.0 - b.0).hypot(a.1 - b.1))
            .fold(0.0, f64::max)
    };
    let (coarse, fine) = (gap(0.4), gap(0.2));
    assert!(slope(coarse, fine, 2.0) > 4.5, "{coarse:e} -> {fine:e}");
}

#[test]
fn vertical_velocity_is_linear_near_the_plane() {
    let sys = seed_gaussian_dipole(DipoleParams::default(), 0.11, DEFAULT_MASS_FLOOR, None).unwrap();
    for r in [0.5, 1.0, 1.6] {
        let v = velocities(&sys, vec![(r, 1e-3), (r, 1e-4)], true);
        let ratio = v[0].1 / v[1].1;
        assert!((ratio - 10.0).abs() < 1e-3, "r={r}: ratio {ratio}");
    }
}

fn p2_derivative_gap(dt: f64) -> f64 {
    let config = SimConfig {
        dt,
        t_end: 0.4,
        ..small_config()
    };
    let mut sink = MemorySink::default();
    dynamics::run(&config, &mut sink).unwrap();
    let recs = &sink.records;
    let mid = recs.iter().position(|r| (r.t - 0.2).abs() < 1e-9).unwrap();
    let fd = (recs[mid + 1].p_k[0] - recs[mid - 1].p_k[0]) / (2.0 * dt);
    (fd - recs[mid].dp2_bulk).abs() / recs[mid].dp2_bulk
}

#[test]
fn bulk_p2_derivative_matches_the_trajectory() {
    let (coarse, fine) = (p2_derivative_gap(0.1), p2_derivative_gap(0.05));
    assert!(fine < 1e-3, "{fine:e}");
    assert!(slope(coarse, fine, 2.0) > 1.8, "{coarse:e} -> {fine:e}");
}

#[test]
fn seeding_is_deterministic() {
    let c = small_config();
    assert_eq!(dynamics::seed(&c).unwrap(), dynamics::seed(&c).unwrap());
}

#[test]
fn runs_keep_strengths_and_repeat_bitwise() {
    let config = small_config();
    let initial = dynamics::seed(&config).unwrap().system;
    let mut a = MemorySink::default();
    let mut b = MemorySink::default();
    let sa = dynamics::run(&config, &mut a).unwrap();
    let sb = dynamics::run(&config, &mut b).unwrap();
    assert_eq!(sa.final_state, sb.final_state);
    assert_eq!(a.records.len(), b.records.len());
    for (x, y) in a.records.iter().zip(&b.records) {
        assert_eq!(x.p_k[0].to_bits(), y.p_k[0].to_bits());
        assert_eq!(x.e0.to_bits(), y.e0.to_bits());
    }
    for (p, q) in initial.particles().iter().zip(sa.final_state.system.particles()) {
        assert_eq!(p.zeta().to_bits(), q.zeta().to_bits());
        assert_eq!(p.mu().to_bits(), q.mu().to_bits());
    }
    assert!(sa.final_state.system.particles().iter().zip(initial.particles()).any(|(p, q)| p.r() != q.r()));
    assert!((sa.final_state.time - 0.3).abs() < 1e-12);
}

#[test]
fn restart_from_snapshot_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let config = SimConfig {
        snap_every: 2,
        ..small_config()
    };
    let mut full = MemorySink::default();
    let whole = dynamics::run(&config, &mut full).unwrap();
    let (step, snap) = full.snapshots[1].clone();
    assert_eq!(step, 2);
    let path = dir.path().join("snap.txt");
    snap.save(&path).unwrap();
    let loaded = Snapshot::load(&path).unwrap();
    assert_eq!(loaded.time.to_bits(), snap.time.to_bits());
    assert_eq!(loaded.system.particles(), snap.system.particles());

    let restart = SimConfig {
        scenario: Scenario::FromSnapshot { path },
        snap_every: 0,
        ..small_config()
    };
    let mut tail = MemorySink::default();
    let resumed = dynamics::run(&restart, &mut tail).unwrap();
    assert_eq!(resumed.final_state.system.particles(), whole.final_state.system.particles());
    let offset = full.records.len() - tail.records.len();
    assert_eq!(offset, 2);
    for (x, y) in full.records[offset..].iter().zip(&tail.records) {
        assert_eq!(x.t.to_bits(), y.t.to_bits());
        for (a, b) in [(x.p_k[0], y.p_k[0]), (x.big_z, y.big_z), (x.e0, y.e0), (x.dp2_bulk, y.dp2_bulk)] {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}

#[test]
fn energy_is_nearly_conserved_over_a_short_run() {
    let config = SimConfig {
        t_end: 1.0,
        ..small_config()
    };
    let mut sink = MemorySink::default();
    dynamics::run(&config, &mut sink).unwrap();
    let e0 = sink.records[0].e0;
    for r in &sink.records {
        assert!(((r.e0 - e0) / e0).abs() < 1e-6);
    }
}
