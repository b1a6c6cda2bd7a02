//! Bessel functions of the first kind for integer and half-integer orders.
//!
//! Small arguments use the power series; larger ones use Miller's backward
//! recurrence, normalized by `J_0 + 2 Σ J_2k = 1` for integer orders and by
//! the closed forms of the spherical Bessel functions `j_0`, `j_1` for
//! half-integer orders.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::sphmath::gamma_half;

const SERIES_LIMIT: f64 = 8.0;
const RESCALE: f64 = 1e250;

/// `J_ν(x)` for `ν ≥ 0` with `2ν` an integer and `x ≥ 0`.
pub fn bessel_j(nu: f64, x: f64) -> Result<f64> {
    let twice = 2.0 * nu;
    if nu < 0.0 || (twice - twice.round()).abs() > 1e-12 {
        return Err(Error::Domain(format!(
            "Bessel order {nu} must be a non-negative integer or half-integer"
        )));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("Bessel argument {x} must be finite and >= 0")));
    }
    let twice = twice.round() as usize;
    if x == 0.0 {
        return Ok(if twice == 0 { 1.0 } else { 0.0 });
    }
    if x <= SERIES_LIMIT {
        return Ok(series(twice, x));
    }
    Ok(if twice.is_multiple_of(2) {
        miller_integer(twice / 2, x)
    } else {
        miller_half_integer(twice / 2, x)
    })
}

fn series(twice_nu: usize, x: f64) -> f64 {
    let nu = twice_nu as f64 / 2.0;
    let q = -0.25 * x * x;
    let lead = (0.5 * x).powf(nu) / gamma_half(twice_nu + 2);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        let kf = k as f64;
        term *= q / (kf * (nu + kf));
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    lead * sum
}

fn start_index(order: usize, x: f64) -> usize {
    let top = x.max(order as f64);
    let m = (top + 24.0 + 12.0 * top.cbrt()).ceil() as usize + 1;
    m + (m % 2)
}

fn miller_integer(n: usize, x: f64) -> f64 {
    let m = start_index(n, x);
    let mut above = 0.0;
    let mut current = 1e-30;
    let mut norm = 2.0 * current; // m is even
    let mut result = if m == n { current } else { 0.0 };
    for k in (1..=m).rev() {
        let below = 2.0 * k as f64 / x * current - above;
        above = current;
        current = below;
        let index = k - 1;
        if index == n {
            result = current;
        }
        if index > 0 && index % 2 == 0 {
            norm += 2.0 * current;
        }
        if current.abs() > RESCALE {
            current /= RESCALE;
            above /= RESCALE;
            norm /= RESCALE;
            result /= RESCALE;
        }
    }
    norm += current;
    result / norm
}

fn miller_half_integer(l: usize, x: f64) -> f64 {
    let m = start_index(l, x);
    let mut above = 0.0;
    let mut current = 1e-30;
    let mut result = if m == l { current } else { 0.0 };
    let mut j1 = 0.0;
    for k in (1..=m).rev() {
        let below = (2 * k + 1) as f64 / x * current - above;
        above = current;
        current = below;
        if k - 1 == l {
            result = current;
        }
        if k == 1 {
            j1 = above;
        }
        if current.abs() > RESCALE {
            current /= RESCALE;
            above /= RESCALE;
            result /= RESCALE;
            j1 /= RESCALE;
        }
    }
    let (s, c) = x.sin_cos();
    let true_j0 = s / x;
    let true_j1 = s / (x * x) - c / x;
    let scale = if true_j0.abs() >= true_j1.abs() {
        true_j0 / current
    } else {
        true_j1 / j1
    };
    (2.0 * x / PI).sqrt() * result * scale
}
