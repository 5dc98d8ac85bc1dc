//! Particle advection by classical RK4 and the run driver.

use crate::config::{Scenario, SimConfig};
use crate::diagnostics::{DiagnosticsRecord, RecordSpec, Tracker};
use crate::field::{self, FieldRequest, Reduction, SelfField, VelocitySample};
use crate::particles::{self, DipoleParams, ParticleSystem, Snapshot};
use crate::{Error, Result};

/// Time plus particle positions; `ζ` and `μ` never change.
#[derive(Clone, Debug, PartialEq)]
pub struct SimState {
    pub time: f64,
    pub system: ParticleSystem,
    /// Position components pulled back into the quadrant so far.
    pub clamp_count: usize,
}

impl SimState {
    pub fn new(system: ParticleSystem, time: f64) -> Self {
        Self {
            time,
            system,
            clamp_count: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepOptions {
    /// Reject steps with `dt > cfl · δ / max|u|`; `None` skips the check.
    pub cfl: Option<f64>,
    pub reduction: Reduction,
}

impl Default for StepOptions {
    fn default() -> Self {
        Self {
            cfl: Some(0.5),
            reduction: Reduction::Fast,
        }
    }
}

/// Velocity at every particle.
pub fn rhs(state: &SimState, reduction: Reduction) -> Result<Vec<VelocitySample>> {
    let f = field::self_induced(&state.system, reduction, false)?;
    Ok(state
        .system
        .particles()
        .iter()
        .zip(f.ur.iter().zip(&f.uz))
        .map(|(p, (&ur, &uz))| VelocitySample {
            r: p.r(),
            z: p.z(),
            ur,
            uz,
        })
        .collect())
}

fn moved(system: &ParticleSystem, base: &[(f64, f64)], k: &SelfField, h: f64) -> ParticleSystem {
    let mut s = system.clone();
    for (i, p) in s.particles_mut().iter_mut().enumerate() {
        p.set_position(base[i].0 + h * k.ur[i], base[i].1 + h * k.uz[i]);
    }
    s
}

/// Largest stable step for the velocities `k`, or `None` if the field is at rest.
pub fn admissible_dt(k: &SelfField, delta: f64, cfl: f64) -> Option<f64> {
    let umax = k.ur.iter().zip(&k.uz).map(|(a, b)| a.hypot(*b)).fold(0.0, f64::max);
    (umax > 0.0).then(|| cfl * delta / umax)
}

pub fn step_rk4(state: &SimState, dt: f64, opts: &StepOptions) -> Result<SimState> {
    let k1 = field::self_induced(&state.system, opts.reduction, false)?;
    step_from_first_stage(state, dt, &k1, opts)
}

/// RK4 step when the first stage (the field at the current positions) is
/// already known.
pub fn step_from_first_stage(state: &SimState, dt: f64, k1: &SelfField, opts: &StepOptions) -> Result<SimState> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Domain(format!("time step dt = {dt} must be positive")));
    }
    if state.system.is_empty() {
        return Ok(SimState {
            time: state.time + dt,
            ..state.clone()
        });
    }
    if let Some(cfl) = opts.cfl {
        if let Some(admissible) = admissible_dt(k1, state.system.delta(), cfl) {
            if dt > admissible {
                return Err(Error::StepRejected { dt, admissible });
            }
        }
    }
    let sys = &state.system;
    let base: Vec<(f64, f64)> = sys.particles().iter().map(|p| (p.r(), p.z())).collect();
    let k2 = field::self_induced(&moved(sys, &base, k1, 0.5 * dt), opts.reduction, false)?;
    let k3 = field::self_induced(&moved(sys, &base, &k2, 0.5 * dt), opts.reduction, false)?;
    let k4 = field::self_induced(&moved(sys, &base, &k3, dt), opts.reduction, false)?;
    let mut next = sys.clone();
    let mut clamps = 0;
    let w = dt / 6.0;
    for (i, p) in next.particles_mut().iter_mut().enumerate() {
        let mut r = base[i].0 + w * (k1.ur[i] + 2.0 * k2.ur[i] + 2.0 * k3.ur[i] + k4.ur[i]);
        let mut z = base[i].1 + w * (k1.uz[i] + 2.0 * k2.uz[i] + 2.0 * k3.uz[i] + k4.uz[i]);
        if r <= 0.0 {
            r = f64::MIN_POSITIVE;
            clamps += 1;
        }
        if z < 0.0 {
            z = f64::MIN_POSITIVE;
            clamps += 1;
        }
        p.set_position(r, z);
    }
    Ok(SimState {
        time: state.time + dt,
        system: next,
        clamp_count: state.clamp_count + clamps,
    })
}

/// One RK4 step of passive points in the fixed field of `sources`; a
/// negative `dt` integrates backwards.
pub fn rk4_frozen(points: &[(f64, f64)], sources: &ParticleSystem, dt: f64) -> Result<Vec<(f64, f64)>> {
    let vel = |pts: Vec<(f64, f64)>| -> Result<Vec<VelocitySample>> {
        field::induced_velocity(&FieldRequest::new(pts, sources.delta()), sources)
    };
    let shift = |k: &[VelocitySample], h: f64| -> Vec<(f64, f64)> {
        points.iter().zip(k).map(|(&(r, z), v)| (r + h * v.ur, z + h * v.uz)).collect()
    };
    let k1 = vel(points.to_vec())?;
    let k2 = vel(shift(&k1, 0.5 * dt))?;
    let k3 = vel(shift(&k2, 0.5 * dt))?;
    let k4 = vel(shift(&k3, dt))?;
    Ok((0..points.len())
        .map(|i| {
            let (r, z) = points[i];
            (
                r + dt / 6.0 * (k1[i].ur + 2.0 * k2[i].ur + 2.0 * k3[i].ur + k4[i].ur),
                z + dt / 6.0 * (k1[i].uz + 2.0 * k2[i].uz + 2.0 * k3[i].uz + k4[i].uz),
            )
        })
        .collect())
}

/// Initial state described by `config`.
pub fn seed(config: &SimConfig) -> Result<SimState> {
    let floor = config.mass_floor;
    let (system, time) = match &config.scenario {
        Scenario::GaussianDipole { r0, z0, sigma, amp } => {
            let p = DipoleParams {
                r0: *r0,
                z0: *z0,
                sigma: *sigma,
                amp: *amp,
            };
            (particles::seed_gaussian_dipole(p, config.h, floor, config.delta)?, 0.0)
        }
        Scenario::Patch { r0, z0, a } => (particles::seed_patch(*r0, *z0, *a, config.h, floor, config.delta)?, 0.0),
        Scenario::FromSnapshot { path } => {
            let snap = Snapshot::load(path)?;
            let sys = match config.delta {
                Some(d) => snap.system.with_delta(d)?,
                None => snap.system,
            };
            (sys, snap.time)
        }
    };
    Ok(SimState::new(system, time))
}

/// Receives the output of [`run`].
pub trait RunSink {
    fn record(&mut self, record: &DiagnosticsRecord) -> Result<()>;
    fn snapshot(&mut self, step: usize, snapshot: &Snapshot) -> Result<()>;
}

/// Keeps everything in memory.
#[derive(Clone, Debug, Default)]
pub struct MemorySink {
    pub records: Vec<DiagnosticsRecord>,
    pub snapshots: Vec<(usize, Snapshot)>,
}

impl RunSink for MemorySink {
    fn record(&mut self, record: &DiagnosticsRecord) -> Result<()> {
        self.records.push(record.clone());
        Ok(())
    }

    fn snapshot(&mut self, step: usize, snapshot: &Snapshot) -> Result<()> {
        self.snapshots.push((step, snapshot.clone()));
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub steps: usize,
    pub records: usize,
    pub final_state: SimState,
    /// Why the run stopped before `t_end`, if it did.
    pub aborted: Option<String>,
}

pub fn record_spec(config: &SimConfig) -> RecordSpec {
    RecordSpec {
        k_list: config.k_list.clone(),
        p_list: config.p_list.clone(),
        r_list: config.r_list.clone(),
        quad: config.quadrature,
    }
}

fn aborted_record(spec: &RecordSpec, state: &SimState, flag: &'static str) -> DiagnosticsRecord {
    let nan = |n: usize| vec![f64::NAN; n];
    DiagnosticsRecord {
        t: state.time,
        p_k: nan(spec.k_list.len()),
        big_z: f64::NAN,
        m0: state.system.total_mass(),
        m_r: nan(spec.r_list.len()),
        e0: f64::NAN,
        omega_sup: f64::NAN,
        omega_lp: nan(spec.p_list.len()),
        dp2_bulk: f64::NAN,
        dp2_axis: f64::NAN,
        dz_bulk: f64::NAN,
        dz_axis: f64::NAN,
        mass_axis_r: f64::NAN,
        mass_axis_z: f64::NAN,
        mass_weighted_z: f64::NAN,
        gamma0: f64::NAN,
        ur_axis_integral: f64::NAN,
        ineq_resid: f64::NAN,
        lj_ratio: f64::NAN,
        clamp_count: state.clamp_count,
        mass_weighted_r: f64::NAN,
        p2_line: f64::NAN,
        z_line: f64::NAN,
        mr4_integral: nan(spec.r_list.len()),
        z_ratio: nan(spec.r_list.len()),
        flags: vec![flag],
    }
}

fn all_finite(f: &SelfField) -> bool {
    f.ur.iter().chain(&f.uz).all(|v| v.is_finite())
}

/// Seed, integrate to `t_end`, and stream records and snapshots to `sink`.
///
/// Records fall on every `record_every`-th step and on the last one. The area
/// integral behind `dZ_axis` runs on every `identity_every`-th record.
pub fn run(config: &SimConfig, sink: &mut dyn RunSink) -> Result<RunSummary> {
    config.validate()?;
    let state = seed(config)?;
    run_from(config, state, sink)
}

pub fn run_from(config: &SimConfig, mut state: SimState, sink: &mut dyn RunSink) -> Result<RunSummary> {
    let spec = record_spec(config);
    let mut tracker = Tracker::new(spec.clone(), &state.system);
    let opts = StepOptions {
        cfl: config.cfl_check.then_some(config.cfl),
        reduction: if config.deterministic {
            Reduction::Deterministic
        } else {
            Reduction::Fast
        },
    };
    let span = (config.t_end - state.time).max(0.0);
    let n_steps = (span / config.dt - 1e-9).ceil().max(0.0) as usize;
    let clamp_limit = config.clamp_abort_fraction * state.system.len() as f64;
    let mut records = 0;
    for step in 0..=n_steps {
        let last = step == n_steps;
        let recording = step % config.record_every == 0 || last;
        if config.snap_every > 0 && step % config.snap_every == 0 {
            let snap = Snapshot {
                time: state.time,
                system: state.system.clone(),
            };
            sink.snapshot(step, &snap)?;
        }
        let k1 = field::self_induced(&state.system, opts.reduction, recording)?;
        if !all_finite(&k1) {
            sink.record(&aborted_record(&spec, &state, "nan"))?;
            return Ok(RunSummary {
                steps: step,
                records: records + 1,
                final_state: state,
                aborted: Some("non-finite velocity".into()),
            });
        }
        if recording {
            let full = match config.identity_every {
                0 => records == 0,
                n => records % n == 0,
            };
            let mut rec = tracker.record(state.time, &state.system, &k1, state.clamp_count, full)?;
            let over = state.clamp_count as f64 > clamp_limit;
            if over {
                rec.flags.push("clamp_abort");
            }
            sink.record(&rec)?;
            records += 1;
            if over {
                let why = format!(
                    "{} clamped coordinates exceed {} of {} particles",
                    state.clamp_count,
                    config.clamp_abort_fraction,
                    state.system.len()
                );
                return Ok(RunSummary {
                    steps: step,
                    records,
                    final_state: state,
                    aborted: Some(why),
                });
            }
        }
        if last {
            break;
        }
        let dt = if step + 1 == n_steps {
            config.t_end - state.time
        } else {
            config.dt
        };
        state = step_from_first_stage(&state, dt, &k1, &opts)?;
    }
    Ok(RunSummary {
        steps: n_steps,
        records,
        final_state: state,
        aborted: None,
    })
}
