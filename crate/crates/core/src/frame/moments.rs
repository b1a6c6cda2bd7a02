//! Numerical vanishing-moment check for the finest-scale wavelets.
//!
//! On a periodic grid the monomial `x^α` is replaced by `s(x)^α` with
//! `s(x) = (n/2π) sin(2πx/n)`, which agrees with `x` to third order near the
//! origin. `Σ_x s^α ψ` is then a finite combination of `ψ̂` at bins within
//! `|α|` of DC, so it vanishes exactly (up to rounding) while that
//! neighbourhood stays inside the region where the windows are zero.

use ndarray::{ArrayD, IxDyn};
use num_complex::Complex64;

use super::SteerableFrame;
use crate::fft::signed_index;

#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub order: usize,
    /// Orders up to this one see only bins where the band filters vanish.
    pub reliable_order: usize,
    /// `per_order[k]`: largest normalized moment of total order `k` over the
    /// scale-0 channels.
    pub per_order: Vec<f64>,
    /// Zeroth moment `|Σ_x φ(x)| = |â_J(0)|` of the lowpass filter.
    pub lowpass_zeroth: f64,
}

impl MomentReport {
    /// Largest normalized band moment over the reliable orders.
    pub fn band_max(&self) -> f64 {
        self.per_order
            .iter()
            .take(self.reliable_order.min(self.order) + 1)
            .copied()
            .fold(0.0, f64::max)
    }

    pub fn unreliable_orders(&self) -> Vec<usize> {
        (self.reliable_order + 1..=self.order).collect()
    }
}

fn multi_indices(d: usize, total: usize) -> Vec<Vec<usize>> {
    if d == 1 {
        return vec![vec![total]];
    }
    (0..=total)
        .flat_map(|first| {
            multi_indices(d - 1, total - first).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

// |Σ s^α ψ| / Σ |s^α ψ|
fn normalized_moment(psi: &ArrayD<Complex64>, coords: &[Vec<f64>], alpha: &[usize]) -> f64 {
    let mut num = Complex64::default();
    let mut den = 0.0;
    for (idx, v) in psi.indexed_iter() {
        let w: f64 = alpha
            .iter()
            .enumerate()
            .map(|(a, &p)| coords[a][idx[a]].powi(p as i32))
            .product();
        num += v * w;
        den += (v * w).norm();
    }
    if den > 0.0 {
        num.norm() / den
    } else {
        0.0
    }
}

fn spatial_filter(frame: &SteerableFrame, filter: impl Iterator<Item = f64>) -> ArrayD<Complex64> {
    let data = filter.map(|w| Complex64::new(w, 0.0)).collect();
    let mut a = ArrayD::from_shape_vec(IxDyn(frame.shape()), data).expect("shape matches");
    frame.fft().inverse(&mut a);
    a
}

/// Normalized discrete moments of the scale-0 wavelets up to total order
/// `order`, plus the zeroth moment of the lowpass.
pub fn moments_smoke_check(frame: &SteerableFrame, order: usize) -> MomentReport {
    let shape = frame.shape();
    let d = shape.len();
    let coords: Vec<Vec<f64>> = shape
        .iter()
        .map(|&n| {
            (0..n)
                .map(|k| {
                    n as f64 / (2.0 * std::f64::consts::PI)
                        * (2.0 * std::f64::consts::PI * signed_index(k, n) as f64 / n as f64).sin()
                })
                .collect()
        })
        .collect();

    let mut per_order = vec![0.0; order + 1];
    let mut radius = f64::INFINITY;
    if frame.scales() > 0 {
        for (flat, idx) in ndarray::indices(IxDyn(shape)).into_iter().enumerate() {
            if frame.band_window(0)[flat] != 0.0 {
                let r = (0..d)
                    .map(|a| (signed_index(idx[a], shape[a]) as f64).powi(2))
                    .sum::<f64>()
                    .sqrt();
                radius = radius.min(r);
            }
        }
        for n in 0..frame.channels() {
            let filter = frame.band_window(0).iter().zip(frame.multiplier(n)).map(|(h, m)| h * m);
            let psi = spatial_filter(frame, filter);
            for (k, slot) in per_order.iter_mut().enumerate() {
                for alpha in multi_indices(d, k) {
                    *slot = f64::max(*slot, normalized_moment(&psi, &coords, &alpha));
                }
            }
        }
    }
    // Shifts of total order k stay within Euclidean distance k of DC.
    let reliable_order = if radius.is_finite() {
        (radius.ceil() as usize).saturating_sub(1)
    } else {
        order
    };
    let low = spatial_filter(frame, frame.lowpass_window().iter().copied());
    MomentReport {
        order,
        reliable_order,
        per_order,
        lowpass_zeroth: low.iter().sum::<Complex64>().norm(),
    }
}
