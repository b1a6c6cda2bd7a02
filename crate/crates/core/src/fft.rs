//! Multi-dimensional complex FFT over `ndarray`, applied axis by axis.
//!
//! The forward transform is unnormalized and the inverse divides by the
//! number of samples, so `inverse(forward(x)) = x`.

use std::sync::Arc;

use ndarray::{ArrayD, Axis};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Planned transforms for one grid shape. Cheap to share between threads.
#[derive(Clone)]
pub struct FftNd {
    shape: Vec<usize>,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
}

impl std::fmt::Debug for FftNd {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FftNd").field("shape", &self.shape).finish()
    }
}

impl FftNd {
    pub fn new(shape: &[usize]) -> Self {
        let mut planner = FftPlanner::new();
        FftNd {
            shape: shape.to_vec(),
            forward: shape.iter().map(|&n| planner.plan_fft_forward(n)).collect(),
            inverse: shape.iter().map(|&n| planner.plan_fft_inverse(n)).collect(),
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn forward(&self, data: &mut ArrayD<Complex64>) {
        self.run(data, &self.forward);
    }

    pub fn inverse(&self, data: &mut ArrayD<Complex64>) {
        self.run(data, &self.inverse);
        let scale = 1.0 / data.len() as f64;
        data.mapv_inplace(|v| v * scale);
    }

    fn run(&self, data: &mut ArrayD<Complex64>, plans: &[Arc<dyn Fft<f64>>]) {
        assert_eq!(
            data.shape(),
            &self.shape[..],
            "array shape differs from the planned shape"
        );
        let longest = self.shape.iter().copied().max().unwrap_or(0);
        let scratch_len = plans.iter().map(|p| p.get_inplace_scratch_len()).max().unwrap_or(0);
        let mut scratch = vec![Complex64::default(); scratch_len];
        let mut buffer = vec![Complex64::default(); longest];
        for (axis, plan) in plans.iter().enumerate() {
            let n = self.shape[axis];
            if n <= 1 {
                continue;
            }
            for mut lane in data.lanes_mut(Axis(axis)) {
                match lane.as_slice_mut() {
                    Some(slice) => plan.process_with_scratch(slice, &mut scratch),
                    None => {
                        let buf = &mut buffer[..n];
                        buf.iter_mut().zip(lane.iter()).for_each(|(b, v)| *b = *v);
                        plan.process_with_scratch(buf, &mut scratch);
                        lane.iter_mut().zip(buf.iter()).for_each(|(v, b)| *v = *b);
                    }
                }
            }
        }
    }
}

/// Signed frequency of DFT bin `k` on an axis of length `n`, in cycles per
/// sample, in `[-1/2, 1/2)`.
pub fn bin_frequency(k: usize, n: usize) -> f64 {
    if 2 * k < n {
        k as f64 / n as f64
    } else {
        k as f64 / n as f64 - 1.0
    }
}

/// Signed offset of index `k` from the origin on a periodic axis of length `n`.
pub fn signed_index(k: usize, n: usize) -> i64 {
    if 2 * k < n {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::IxDyn;
    use std::f64::consts::PI;

    // O(N²) DFT straight from the definition.
    fn naive_dft(x: &ArrayD<Complex64>) -> ArrayD<Complex64> {
        let shape = x.shape().to_vec();
        let mut out = ArrayD::zeros(IxDyn(&shape));
        for (kidx, o) in out.indexed_iter_mut() {
            let mut acc = Complex64::default();
            for (nidx, v) in x.indexed_iter() {
                let phase: f64 = (0..shape.len())
                    .map(|a| kidx[a] as f64 * nidx[a] as f64 / shape[a] as f64)
                    .sum();
                acc += v * Complex64::from_polar(1.0, -2.0 * PI * phase);
            }
            *o = acc;
        }
        out
    }

    #[test]
    fn matches_naive_dft() {
        let shape = [4usize, 6, 5];
        let x = ArrayD::from_shape_fn(IxDyn(&shape), |i| {
            Complex64::new(
                (i[0] * 7 + i[1] * 3 + i[2]) as f64 % 5.0 - 2.0,
                (i[1] * i[2]) as f64 * 0.1,
            )
        });
        let fft = FftNd::new(&shape);
        let mut y = x.clone();
        fft.forward(&mut y);
        let want = naive_dft(&x);
        let err = (&y - &want).iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(err < 1e-11, "{err}");
        fft.inverse(&mut y);
        let err = (&y - &x).iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(err < 1e-13, "{err}");
    }

    #[test]
    fn frequencies() {
        assert_eq!(bin_frequency(0, 8), 0.0);
        assert_eq!(bin_frequency(3, 8), 0.375);
        assert_eq!(bin_frequency(4, 8), -0.5);
        assert_eq!(bin_frequency(2, 5), 0.4);
        assert_eq!(bin_frequency(3, 5), -0.4);
        assert_eq!(signed_index(7, 8), -1);
    }
}
