//! Powers of an irrational rotation: which `k` brings `kθ₀` within a
//! tolerance of a target angle.
//!
//! Angles are mapped to fixed point on the circle, `x ↦ round(x/2π · 2^64)`,
//! and the smallest `k` with `k·a mod 2^64` inside the target window is found
//! by the Euclid-style recursion on `(a, m)`, i.e. by walking the continued
//! fraction of `θ₀/2π` rather than scanning `k`.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};

const MODULUS: u128 = 1 << 64;

/// Distance from `x` to the nearest multiple of `period`.
pub fn circle_distance(x: f64, period: f64) -> f64 {
    let r = x.rem_euclid(period);
    r.min(period - r)
}

fn to_fixed(angle: f64) -> u64 {
    let frac = (angle / TAU).rem_euclid(1.0);
    // frac == 1.0 can appear through rounding
    ((frac * MODULUS as f64) as u128 % MODULUS) as u64
}

fn ceil_div(n: u128, d: u128) -> u128 {
    n / d + u128::from(n % d != 0)
}

/// Smallest `x ≥ 0` with `l ≤ (a·x mod m) ≤ r`, for `0 ≤ l ≤ r < m`.
fn min_multiple_in(a: u128, m: u128, l: u128, r: u128) -> Option<u128> {
    if l == 0 {
        return Some(0);
    }
    let a = a % m;
    if a == 0 {
        return None;
    }
    let x = ceil_div(l, a);
    if a.checked_mul(x)? <= r {
        return Some(x);
    }
    // no multiple of a in [l, r]: find the least wrap count y first
    let y = min_multiple_in(m % a, a, (a - r % a) % a, (a - l % a) % a)?;
    let x = ceil_div(l.checked_add(m.checked_mul(y)?)?, a);
    Some(x)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerApprox {
    pub k: u64,
    /// Circle distance between `kθ₀` and the target, in radians.
    pub error: f64,
}

/// Smallest `k ≤ k_max` with `circle_distance(kθ₀ − target) < tol`.
pub fn approx_power(theta_target: f64, theta0: f64, tol: f64, k_max: u64) -> Result<PowerApprox> {
    if !(tol > 0.0) || !theta_target.is_finite() || !theta0.is_finite() {
        return Err(Error::InvalidArgument(
            "approx_power needs tol > 0 and finite angles".into(),
        ));
    }
    let err_of = |k: u64| circle_distance(k as f64 * theta0 - theta_target, TAU);
    if tol > PI {
        return Ok(PowerApprox { k: 0, error: err_of(0) });
    }
    // keep a margin for fixed-point rounding over k ≤ 2^53 steps
    let margin = 1e-12;
    let width = ((tol - margin).max(0.0) / TAU * MODULUS as f64) as u128;
    let t = to_fixed(theta_target) as u128;
    let a = to_fixed(theta0) as u128;
    let lo = (t + MODULUS - width % MODULUS) % MODULUS;
    let hi = (t + width) % MODULUS;
    let found = if lo <= hi {
        min_multiple_in(a, MODULUS, lo, hi)
    } else {
        // the window wraps through zero, so k = 0 qualifies
        Some(0)
    };
    match found {
        Some(k) if k <= k_max as u128 => {
            let k = k as u64;
            let error = err_of(k);
            if error < tol {
                Ok(PowerApprox { k, error })
            } else {
                Err(Error::NumericGuard(format!(
                    "fixed-point search returned k = {k} with error {error:e} >= {tol:e}"
                )))
            }
        }
        _ => Err(Error::PowerNotFound { k_max, tol }),
    }
}

/// Continued-fraction convergent denominators of `θ/period`, up to `q_max`.
pub fn convergent_denominators(theta: f64, period: f64, q_max: u64) -> Vec<u64> {
    // exact Euclid on the fixed-point rational; agrees with the real expansion
    // while q² stays far below 2^64
    let mut num = to_fixed(theta * TAU / period) as u128;
    let mut den = MODULUS;
    let (mut q_prev, mut q) = (0u128, 1u128);
    let mut out = vec![1u64];
    while num != 0 {
        let digit = den / num;
        (den, num) = (num, den % num);
        let next = digit * q + q_prev;
        if next > q_max as u128 {
            break;
        }
        (q_prev, q) = (q, next);
        if q as u64 != *out.last().expect("non-empty") {
            out.push(q as u64);
        }
    }
    out
}

/// `min_{1≤k≤k_max} circle_distance(kθ, period)`, evaluated only at the
/// convergent denominators (best approximations of the second kind).
pub fn min_return_distance(theta: f64, period: f64, k_max: u64) -> (u64, f64) {
    convergent_denominators(theta, period, k_max)
        .into_iter()
        .map(|q| (q, circle_distance(q as f64 * theta, period)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("1 is always a denominator")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthesis::su11::theta0;

    fn brute_force(target: f64, th: f64, tol: f64, k_max: u64) -> Option<u64> {
        (0..=k_max).find(|&k| circle_distance(k as f64 * th - target, TAU) < tol)
    }

    #[test]
    fn trivial_targets() {
        let th = theta0();
        assert_eq!(approx_power(0.0, th, 1e-6, 10).unwrap(), PowerApprox { k: 0, error: 0.0 });
        let p = approx_power(th, th, 1e-9, 10).unwrap();
        assert_eq!(p.k, 1);
        assert!(p.error < 1e-15);
        assert!(approx_power(0.5, th, 0.0, 10).is_err());
    }

    #[test]
    fn matches_brute_force() {
        let th = theta0();
        for (i, tol) in [1e-1, 1e-2, 1e-3, 3e-4].into_iter().enumerate() {
            for j in 0..10 {
                let target = -3.0 + 0.61 * j as f64 + 0.07 * i as f64;
                let fast = approx_power(target, th, tol, 1_000_000).unwrap();
                assert_eq!(Some(fast.k), brute_force(target, th, tol, 1_000_000), "target {target} tol {tol}");
                assert!(fast.error < tol);
            }
        }
    }

    #[test]
    fn reports_exhaustion() {
        let err = approx_power(1.0, theta0(), 1e-9, 100).unwrap_err();
        assert!(matches!(err, Error::PowerNotFound { k_max: 100, .. }));
    }

    #[test]
    fn rational_rotation_never_reaches_off_lattice_targets() {
        // θ = 2π/8 only reaches multiples of π/4
        assert!(approx_power(0.3, TAU / 8.0, 1e-3, 1_000_000).is_err());
        assert_eq!(approx_power(PI, TAU / 8.0, 1e-9, 100).unwrap().k, 4);
    }

    #[test]
    fn min_return_matches_scan() {
        let th = theta0();
        let k_max = 200_000;
        let (_, fast) = min_return_distance(th, PI, k_max);
        let scan = (1..=k_max)
            .map(|k| circle_distance(k as f64 * th, PI))
            .fold(f64::INFINITY, f64::min);
        assert!((fast - scan).abs() < 1e-12, "{fast} vs {scan}");
    }

    #[test]
    fn convergents_of_golden_ratio_are_fibonacci() {
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        let q = convergent_denominators(phi, 1.0, 100);
        assert_eq!(q, vec![1, 2, 3, 5, 8, 13, 21, 34, 55, 89]);
    }
}
