//! Verification suites behind the `verify-kernel` and `verify-identities`
//! subcommands.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use crate::config::QuadConfig;
use crate::diagnostics::{self, Identities};
use crate::field::Reduction;
use crate::kernel::{self, oracle, Convention};
use crate::particles::ParticleSystem;
use crate::{Error, Result};

/// One line of a verification table. `tol = None` marks a reported value.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tol: Option<f64>,
}

impl Check {
    fn gated(name: &str, value: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tol: Some(tol),
        }
    }

    fn reported(name: &str, value: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tol: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.tol.map_or(true, |t| self.value <= t)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<34} {:>14} {:>11}  status", "check", "value", "tolerance")?;
        for c in &self.checks {
            let (tol, status) = match c.tol {
                Some(t) => (format!("{t:.1e}"), if c.passed() { "ok" } else { "FAIL" }),
                None => ("-".to_string(), "info"),
            };
            writeln!(f, "{:<34} {:>14.6e} {:>11}  {status}", c.name, c.value, tol)?;
        }
        Ok(())
    }
}

/// Log-spaced points from `lo` to `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Kernel against quadrature of its defining integral, its asymptotes, and
/// the Legendre relation. `convention` exists to show the suite catches a
/// mixed-up elliptic argument.
pub fn verify_kernel(convention: Convention) -> Result<Report> {
    let eval = |s: f64| kernel::kernel_eval_with(s, convention);
    let mut checks = Vec::new();

    let sweep = log_space(1e-6, 1e6, 200);
    let mut worst_f: f64 = 0.0;
    let mut worst_fp: f64 = 0.0;
    let mut monotone = true;
    let mut prev: Option<(f64, f64)> = None;
    for &s in &sweep {
        let k = eval(s)?;
        let (qf, qfp) = (oracle::f_by_quadrature(s), oracle::f_prime_by_quadrature(s));
        worst_f = worst_f.max(((k.f - qf) / qf).abs());
        worst_fp = worst_fp.max(((k.fp - qfp) / qfp).abs());
        if let Some((pf, pfp)) = prev {
            monotone &= k.f < pf && k.fp > pfp && k.f > 0.0 && k.fp < 0.0;
        }
        prev = Some((k.f, k.fp));
    }
    checks.push(Check::gated("F vs quadrature (max rel)", worst_f, 1e-9));
    checks.push(Check::gated("F' vs quadrature (max rel)", worst_fp, 1e-9));
    checks.push(Check::gated("sign/monotonicity violations", if monotone { 0.0 } else { 1.0 }, 0.0));

    let big = 1e6;
    let f_big = eval(big)?;
    checks.push(Check::gated(
        "F(1e6) s^3/2 vs pi/2 (rel)",
        ((f_big.f * big.powf(1.5) - FRAC_PI_2) / FRAC_PI_2).abs(),
        1e-3,
    ));
    let tiny = 1e-8;
    let small_asym = |s: f64| 0.5 * (1.0 / s).ln() + 8f64.ln() - 2.0;
    checks.push(Check::gated(
        "F(1e-8) vs log asymptote (abs)",
        (eval(tiny)?.f - small_asym(tiny)).abs(),
        1e-4,
    ));
    let s = 1e-6;
    checks.push(Check::gated(
        "-F'(1e-6) vs 1/(2s) (rel)",
        ((-eval(s)?.fp - 0.5 / s) * 2.0 * s).abs(),
        1e-2,
    ));
    let lead = 0.75 * PI * big.powf(-2.5);
    checks.push(Check::gated(
        "-F'(1e6) vs 3pi/4 s^-5/2 (rel)",
        ((-f_big.fp - lead) / lead).abs(),
        1e-2,
    ));

    let mut env_small: f64 = 0.0;
    for s in log_space(1e-8, 1e-4, 60) {
        env_small = env_small.max((eval(s)?.f - small_asym(s)).abs() / (s * (1.0 / s).ln()));
    }
    let mut env_large: f64 = 0.0;
    for s in log_space(1e2, 1e6, 60) {
        env_large = env_large.max((eval(s)?.f * s.powf(1.5) - FRAC_PI_2).abs() * s);
    }
    checks.push(Check::reported("small-s envelope sup", env_small));
    checks.push(Check::reported("large-s envelope sup", env_large));

    let mut legendre: f64 = 0.0;
    for i in 1..40 {
        let m = i as f64 / 40.0;
        let (a, b) = (kernel::elliptic_ke(m)?, kernel::elliptic_ke(1.0 - m)?);
        legendre = legendre.max((a.big_e * b.big_k + b.big_e * a.big_k - a.big_k * b.big_k - FRAC_PI_2).abs());
    }
    checks.push(Check::gated("Legendre relation (abs)", legendre, 1e-10));
    checks.push(Check::reported("reference coefficient pi/2", FRAC_PI_2));
    checks.push(Check::reported("reference coefficient 3pi/4", 0.75 * PI));
    Ok(Report { checks })
}

/// Relative tolerances for the identity residuals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdentityTolerances {
    pub dp2: f64,
    pub dz: f64,
    pub mass: f64,
    pub mass_z: f64,
    pub p2_line: f64,
    pub z_line: f64,
}

impl Default for IdentityTolerances {
    fn default() -> Self {
        Self {
            dp2: 1e-2,
            dz: 2e-2,
            mass: 1e-3,
            mass_z: 1e-3,
            p2_line: 1e-2,
            z_line: 1e-2,
        }
    }
}

impl IdentityTolerances {
    pub fn get(&self, name: &str) -> Option<f64> {
        Some(match name {
            "dp2" => self.dp2,
            "dz" => self.dz,
            "mass" => self.mass,
            "mass_z" => self.mass_z,
            "p2_line" => self.p2_line,
            "z_line" => self.z_line,
            _ => return None,
        })
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        let slot = match name {
            "dp2" => &mut self.dp2,
            "dz" => &mut self.dz,
            "mass" => &mut self.mass,
            "mass_z" => &mut self.mass_z,
            "p2_line" => &mut self.p2_line,
            "z_line" => &mut self.z_line,
            _ => {
                return Err(Error::Config(format!(
                    "unknown tolerance `{name}` (expected dp2, dz, mass, mass_z, p2_line or z_line)"
                )))
            }
        };
        if !(value >= 0.0) {
            return Err(Error::Config(format!("tolerance `{name}` must be >= 0, got {value}")));
        }
        *slot = value;
        Ok(())
    }

    /// Apply a `NAME=VALUE` override.
    pub fn apply(&mut self, spec: &str) -> Result<()> {
        let (name, value) = spec
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("tolerance `{spec}` is not NAME=VALUE")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|e| Error::Config(format!("tolerance `{spec}`: {e}")))?;
        self.set(name.trim(), value)
    }
}

/// Identity residuals of one system, plus the raw sides as reported rows.
pub fn verify_identities(
    system: &ParticleSystem,
    quad: &QuadConfig,
    tol: &IdentityTolerances,
    reduction: Reduction,
) -> Result<(Report, Identities)> {
    let id = diagnostics::identities(system, quad, reduction)?;
    let mut checks: Vec<Check> = id
        .residuals()
        .into_iter()
        .map(|(name, r)| Check::gated(name, r, tol.get(name).expect("known residual")))
        .collect();
    checks.push(Check::gated(
        "quadrature unconverged",
        if id.converged() { 0.0 } else { 1.0 },
        0.0,
    ));
    for (name, v) in [
        ("m0", id.m0),
        ("P2", id.p2),
        ("Z", id.big_z),
        ("dP2 bulk", id.dp2_bulk),
        ("dP2 axis", id.dp2_axis),
        ("dZ bulk", id.dz_bulk),
        ("dZ axis+field", id.dz_axis),
        ("mass axis r", id.mass.axis_r),
        ("mass axis z", id.mass.axis_z),
        ("mass weighted z", id.mass.weighted_z),
        ("mass weighted r", id.mass.weighted_r),
    ] {
        checks.push(Check::reported(name, v));
    }
    Ok((Report { checks }, id))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_suite_passes() {
        let r = verify_kernel(Convention::Parameter).unwrap();
        assert!(r.passed(), "{r}");
        assert!(r.get("F vs quadrature (max rel)").unwrap().value < 1e-12);
    }

    #[test]
    fn swapped_convention_is_caught() {
        let r = verify_kernel(Convention::SwappedModulus).unwrap();
        assert!(!r.passed());
    }

    #[test]
    fn tolerance_overrides() {
        let mut t = IdentityTolerances::default();
        t.apply("dz=0.5").unwrap();
        assert_eq!(t.dz, 0.5);
        assert!(t.apply("nope=1").is_err());
        assert!(t.apply("dz").is_err());
        assert!(t.apply("dz=-1").is_err());
    }

    #[test]
    fn empty_system_passes_identities() {
        let (r, _) = verify_identities(
            &ParticleSystem::empty(0.1),
            &QuadConfig::default(),
            &IdentityTolerances::default(),
            Reduction::Fast,
        )
        .unwrap();
        assert!(r.passed(), "{r}");
    }

    #[test]
    fn log_space_endpoints() {
        let v = log_space(1e-6, 1e6, 200);
        assert_eq!(v.len(), 200);
        assert!((v[0] - 1e-6).abs() < 1e-20 && (v[199] / 1e6 - 1.0).abs() < 1e-12);
    }
}
