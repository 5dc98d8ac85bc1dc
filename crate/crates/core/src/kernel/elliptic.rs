//! Complete elliptic integrals of the first and second kind by the
//! arithmetic-geometric mean.
//!
//! Everything here takes the parameter `m = k²`, never the modulus `k`.
//! Alongside `K` and `E` the iteration also yields `K − E` as a sum of
//! positive terms, which the ring kernel needs free of cancellation when
//! `m` is small.

use std::f64::consts::FRAC_PI_2;

use crate::{Error, Result};

/// `K(m)` and `E(m)` for one parameter value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EllipticPair {
    pub m: f64,
    pub big_k: f64,
    pub big_e: f64,
}

/// Raw output of one AGM pass.
#[derive(Clone, Copy, Debug)]
pub(crate) struct AgmSums {
    pub k: f64,
    pub e: f64,
    pub k_minus_e: f64,
    pub iterations: u32,
}

// Stop once c_n < CONVERGED * a_n; the next correction to a is then O(c_n^2).
const CONVERGED: f64 = 1e-9;
const MAX_ITER: u32 = 40;

/// AGM for parameter `m` with complementary parameter `mc = 1 − m` passed in
/// separately so callers that know `1 − m` in closed form keep its digits.
#[inline]
pub(crate) fn agm(m: f64, mc: f64) -> AgmSums {
    let b0 = mc.sqrt();
    let mut a = 0.5 * (1.0 + b0);
    let mut b = b0.sqrt();
    // c_1 = (1 - sqrt(mc)) / 2 without the subtraction
    let mut c = m / (2.0 * (1.0 + b0));
    let mut sum = 0.5 * m;
    let mut weight = 1.0;
    let mut iterations = 1;
    loop {
        sum += weight * c * c;
        if c <= CONVERGED * a || iterations >= MAX_ITER {
            break;
        }
        let a_next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = a_next;
        c = c * c / (4.0 * a);
        weight *= 2.0;
        iterations += 1;
    }
    let k = FRAC_PI_2 / a;
    AgmSums {
        k,
        e: k * (1.0 - sum),
        k_minus_e: k * sum,
        iterations,
    }
}

/// Complete elliptic integrals `K(m)` and `E(m)` for `0 ≤ m < 1`.
pub fn elliptic_ke(m: f64) -> Result<EllipticPair> {
    if !(0.0..1.0).contains(&m) {
        return Err(Error::Domain(format!(
            "elliptic parameter m = {m} outside [0, 1)"
        )));
    }
    let sums = agm(m, 1.0 - m);
    Ok(EllipticPair {
        m,
        big_k: sums.k,
        big_e: sums.e,
    })
}

/// Number of AGM steps taken for parameter `m`.
pub fn agm_iterations(m: f64) -> u32 {
    agm(m, 1.0 - m).iterations
}
