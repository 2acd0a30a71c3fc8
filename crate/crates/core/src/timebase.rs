//! Exact time-resolution ratios.
//!
//! Symbol and bin durations arrive as `f64` seconds (and as whole nanoseconds
//! from spectrogram files), but the transmitter/receiver relationship is a
//! small rational number such as 24/25. Everything that places samples on a
//! time grid goes through [`DurationRatio`] so that long streams never
//! accumulate floating-point phase error.

use num_rational::Ratio;

use crate::{Error, Result};

/// Relative tolerance used when snapping a ratio of durations to a fraction.
///
/// Large enough to absorb whole-nanosecond rounding of an ~11 µs bin width
/// (about 5e-5), small enough that distinct realistic ratios never collide.
pub const RATIO_TOLERANCE: f64 = 1e-4;

const MAX_DENOMINATOR: u64 = 1 << 20;

/// `numer / denom` with both terms positive and coprime.
pub type DurationRatio = Ratio<u64>;

/// Returns the simplest fraction within `rel_tol` of `x` (x > 0).
///
/// Walks the continued-fraction convergents of `x` and stops at the first one
/// inside the tolerance band.
pub fn simplest_fraction(x: f64, rel_tol: f64) -> Result<DurationRatio> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::Argument(format!("ratio {x} is not a positive finite number")));
    }
    let (mut p0, mut q0, mut p1, mut q1) = (0u64, 1u64, 1u64, 0u64);
    let mut rem = x;
    loop {
        let a = rem.floor();
        if a > MAX_DENOMINATOR as f64 * 4.0 {
            break;
        }
        let a = a as u64;
        let p2 = a.checked_mul(p1).and_then(|v| v.checked_add(p0));
        let q2 = a.checked_mul(q1).and_then(|v| v.checked_add(q0));
        let (Some(p2), Some(q2)) = (p2, q2) else { break };
        if q2 > MAX_DENOMINATOR {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        if q1 > 0 && p1 > 0 && ((p1 as f64 / q1 as f64) - x).abs() <= rel_tol * x {
            return Ok(Ratio::new(p1, q1));
        }
        let frac = rem - rem.floor();
        if frac <= f64::EPSILON {
            break;
        }
        rem = 1.0 / frac;
    }
    if q1 > 0 && p1 > 0 && ((p1 as f64 / q1 as f64) - x).abs() <= rel_tol * x {
        Ok(Ratio::new(p1, q1))
    } else {
        Err(Error::Argument(format!(
            "duration ratio {x} has no fraction with denominator <= {MAX_DENOMINATOR}"
        )))
    }
}

/// Ratio `to / from` of two durations, snapped to a fraction.
pub fn duration_ratio(to_s: f64, from_s: f64) -> Result<DurationRatio> {
    if !(to_s.is_finite() && to_s > 0.0 && from_s.is_finite() && from_s > 0.0) {
        return Err(Error::Argument(format!(
            "durations must be positive and finite (got {to_s} s and {from_s} s)"
        )));
    }
    simplest_fraction(to_s / from_s, RATIO_TOLERANCE)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rx_over_tx_is_25_over_24() {
        let r = duration_ratio(1.0 / 90_000.0, 1.0 / 93_750.0).unwrap();
        assert_eq!(r, Ratio::new(25, 24));
    }

    #[test]
    fn nanosecond_rounded_bin_still_snaps() {
        let r = duration_ratio(11_111e-9, 1.0 / 93_750.0).unwrap();
        assert_eq!(r, Ratio::new(25, 24));
    }

    #[test]
    fn exact_halving() {
        let r = duration_ratio(0.5e-5, 1e-5).unwrap();
        assert_eq!(r, Ratio::new(1, 2));
    }

    #[test]
    fn integers_and_simple_fractions() {
        assert_eq!(simplest_fraction(3.0, 1e-9).unwrap(), Ratio::new(3, 1));
        assert_eq!(simplest_fraction(0.75, 1e-9).unwrap(), Ratio::new(3, 4));
        assert_eq!(simplest_fraction(355.0 / 113.0, 1e-12).unwrap(), Ratio::new(355, 113));
    }

    #[test]
    fn rejects_non_positive() {
        assert!(duration_ratio(0.0, 1.0).is_err());
        assert!(duration_ratio(1.0, f64::NAN).is_err());
        assert!(simplest_fraction(-1.0, 1e-4).is_err());
    }
}
