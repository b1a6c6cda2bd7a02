//! Undecimated steerable wavelet frame on periodic `d`-dimensional grids.
//!
//! Scale `j < J` uses the radial window `ĥ_j(ω) = h(2^j |ω|)`; the residual
//! lowpass `â_J` with `|â_J|² = 1 − Σ_j |ĥ_j|²` completes the partition and
//! also covers the grid corners beyond `|ω| = 1/2`. Every scale is split into
//! the channels of a [`MultiplierBank`]. Frequencies are in cycles per sample.

mod moments;
mod radial;

use ndarray::{ArrayD, IxDyn};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use moments::{moments_smoke_check, MomentReport};
pub use radial::{make_radial, RadialKind, RadialProfile};

use crate::angular::{BankDescriptor, MultiplierBank, Scratch};
use crate::error::{Error, Result};
use crate::fft::{bin_frequency, FftNd};

/// Tolerance of the discrete partition check in [`build_frame`].
pub const PARTITION_TOLERANCE: f64 = 1e-12;

/// A frame sampled on a concrete DFT grid. Immutable once built.
#[derive(Debug, Clone)]
pub struct SteerableFrame {
    shape: Vec<usize>,
    scales: usize,
    radial: RadialProfile,
    bank: MultiplierBank,
    // Flattened in row-major (standard ndarray) order.
    band_windows: Vec<Vec<f64>>,
    lowpass: Vec<f64>,
    multipliers: Vec<Vec<f64>>,
    fft: FftNd,
    partition_residual: f64,
}

/// Samples all windows on the grid and checks
/// `Σ_j |ĥ_j|² Σ_n |m_n|² + |â_J|² = 1` at every bin.
///
/// Every side must be at least `4·2^J`. The DC bin belongs to the lowpass.
pub fn build_frame(
    shape: &[usize],
    scales: usize,
    radial: RadialProfile,
    bank: MultiplierBank,
) -> Result<SteerableFrame> {
    if shape.is_empty() {
        return Err(Error::InvalidArgument("grid shape must have at least one axis".into()));
    }
    if bank.dim() != shape.len() {
        return Err(Error::DimensionMismatch {
            expected: shape.len(),
            found: bank.dim(),
        });
    }
    let required = 4usize
        .checked_shl(scales as u32)
        .filter(|_| scales < 60)
        .ok_or_else(|| Error::InvalidArgument(format!("{scales} scales is too many")))?;
    if let Some(&side) = shape.iter().find(|&&n| n < required) {
        return Err(Error::ShapeTooSmall { side, scales, required });
    }

    let total: usize = shape.iter().product();
    let d = shape.len();
    let channels = bank.len();
    let mut band_windows = vec![vec![0.0; total]; scales];
    let mut lowpass = vec![0.0; total];
    let mut multipliers = vec![vec![0.0; total]; channels];

    let mut omega = vec![0.0; d];
    let mut values = vec![0.0; channels];
    let mut scratch = Scratch::default();
    let mut worst: f64 = 0.0;
    for (flat, idx) in ndarray::indices(IxDyn(shape)).into_iter().enumerate() {
        for a in 0..d {
            omega[a] = bin_frequency(idx[a], shape[a]);
        }
        let radius = omega.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut band_energy = 0.0;
        for (j, win) in band_windows.iter_mut().enumerate() {
            let h = radial.eval(2f64.powi(j as i32) * radius);
            win[flat] = h;
            band_energy += h * h;
        }
        if band_energy > 1.0 + PARTITION_TOLERANCE {
            return Err(Error::PartitionViolation(band_energy - 1.0));
        }
        lowpass[flat] = (1.0 - band_energy).max(0.0).sqrt();

        bank.eval_into(&omega, &mut scratch, &mut values);
        let mut angular = 0.0;
        for (m, v) in multipliers.iter_mut().zip(&values) {
            m[flat] = *v;
            angular += v * v;
        }
        let sum = band_energy * angular + lowpass[flat] * lowpass[flat];
        worst = worst.max((sum - 1.0).abs());
    }
    if !(worst <= PARTITION_TOLERANCE) {
        return Err(Error::PartitionViolation(worst));
    }
    Ok(SteerableFrame {
        shape: shape.to_vec(),
        scales,
        radial,
        bank,
        band_windows,
        lowpass,
        multipliers,
        fft: FftNd::new(shape),
        partition_residual: worst,
    })
}

impl SteerableFrame {
    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn scales(&self) -> usize {
        self.scales
    }

    pub fn channels(&self) -> usize {
        self.bank.len()
    }

    pub fn radial(&self) -> &RadialProfile {
        &self.radial
    }

    pub fn bank(&self) -> &MultiplierBank {
        &self.bank
    }

    /// Largest deviation of the sampled partition from one.
    pub fn partition_residual(&self) -> f64 {
        self.partition_residual
    }

    /// Number of coefficient arrays in a pyramid: `n_max·J + 1`.
    pub fn array_count(&self) -> usize {
        self.scales * self.channels() + 1
    }

    /// Sampled `ĥ_j`, flattened row-major.
    pub fn band_window(&self, j: usize) -> &[f64] {
        &self.band_windows[j]
    }

    /// Sampled `â_J`, flattened row-major.
    pub fn lowpass_window(&self) -> &[f64] {
        &self.lowpass
    }

    /// Sampled `m_n`, flattened row-major.
    pub fn multiplier(&self, n: usize) -> &[f64] {
        &self.multipliers[n]
    }

    pub fn fft(&self) -> &FftNd {
        &self.fft
    }

    /// Manifest of a pyramid produced by this frame, with `energy` filled in.
    pub fn manifest(&self, energy: f64) -> Manifest {
        Manifest {
            shape: self.shape.clone(),
            scales: self.scales,
            channels: self.channels(),
            radial: self.radial.kind(),
            bank: self.bank.descriptor(),
            energy,
        }
    }

    /// Fails unless `manifest` describes a pyramid of this frame.
    pub fn check_manifest(&self, manifest: &Manifest) -> Result<()> {
        let mismatch = |what: &str| Err(Error::ManifestMismatch(what.to_string()));
        if manifest.shape != self.shape {
            return mismatch("grid shape");
        }
        if manifest.scales != self.scales {
            return mismatch("number of scales");
        }
        if manifest.channels != self.channels() {
            return mismatch("number of channels");
        }
        if manifest.radial != self.radial.kind() {
            return mismatch("radial profile");
        }
        if manifest.bank != self.bank.descriptor() {
            return mismatch("multiplier bank");
        }
        Ok(())
    }

    // Product of the band window and multiplier for array `idx`.
    fn filter(&self, idx: usize) -> impl Iterator<Item = f64> + '_ {
        let (j, n) = (idx / self.channels(), idx % self.channels());
        self.band_windows[j]
            .iter()
            .zip(&self.multipliers[n])
            .map(|(h, m)| h * m)
    }
}

/// Description of a pyramid: enough to rebuild the frame that made it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub shape: Vec<usize>,
    pub scales: usize,
    pub channels: usize,
    pub radial: RadialKind,
    pub bank: BankDescriptor,
    /// Total coefficient energy `Σ |c|²`.
    pub energy: f64,
}

/// Full-resolution coefficients: `J·n_max` band arrays and one lowpass.
#[derive(Debug, Clone, PartialEq)]
pub struct Pyramid {
    manifest: Manifest,
    bands: Vec<ArrayD<Complex64>>,
    lowpass: ArrayD<Complex64>,
}

fn array_energy(a: &ArrayD<Complex64>) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum()
}

impl Pyramid {
    /// Assembles a pyramid; `bands[j·n_max + n]` holds scale `j`, channel
    /// `n`. The manifest energy is recomputed from the arrays.
    pub fn new(mut manifest: Manifest, bands: Vec<ArrayD<Complex64>>, lowpass: ArrayD<Complex64>) -> Result<Self> {
        let expected = manifest.scales * manifest.channels;
        if bands.len() != expected {
            return Err(Error::ManifestMismatch(format!(
                "{} band arrays for {} scales × {} channels",
                bands.len(),
                manifest.scales,
                manifest.channels
            )));
        }
        for a in bands.iter().chain(std::iter::once(&lowpass)) {
            if a.shape() != &manifest.shape[..] {
                return Err(Error::ShapeMismatch {
                    expected: manifest.shape.clone(),
                    found: a.shape().to_vec(),
                });
            }
        }
        manifest.energy = bands.iter().map(array_energy).sum::<f64>() + array_energy(&lowpass);
        Ok(Pyramid {
            manifest,
            bands,
            lowpass,
        })
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    pub fn scales(&self) -> usize {
        self.manifest.scales
    }

    pub fn channels(&self) -> usize {
        self.manifest.channels
    }

    pub fn band(&self, j: usize, n: usize) -> &ArrayD<Complex64> {
        &self.bands[j * self.channels() + n]
    }

    pub fn bands(&self) -> &[ArrayD<Complex64>] {
        &self.bands
    }

    pub fn lowpass(&self) -> &ArrayD<Complex64> {
        &self.lowpass
    }

    /// Total number of arrays, lowpass included.
    pub fn array_count(&self) -> usize {
        self.bands.len() + 1
    }

    /// `Σ |c|²` over every array.
    pub fn energy(&self) -> f64 {
        self.manifest.energy
    }

    /// Energy of a single band array.
    pub fn band_energy(&self, j: usize, n: usize) -> f64 {
        array_energy(self.band(j, n))
    }

    pub fn into_parts(self) -> (Manifest, Vec<ArrayD<Complex64>>, ArrayD<Complex64>) {
        (self.manifest, self.bands, self.lowpass)
    }
}

fn spectrum(signal: &ArrayD<f64>, frame: &SteerableFrame) -> Result<ArrayD<Complex64>> {
    if signal.shape() != frame.shape() {
        return Err(Error::ShapeMismatch {
            expected: frame.shape.clone(),
            found: signal.shape().to_vec(),
        });
    }
    if signal.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mut spec = signal
        .mapv(|v| Complex64::new(v, 0.0))
        .as_standard_layout()
        .into_owned();
    frame.fft.forward(&mut spec);
    Ok(spec)
}

fn filtered(spec: &[Complex64], filter: impl Iterator<Item = f64>, shape: &[usize], fft: &FftNd) -> ArrayD<Complex64> {
    let data = spec.iter().zip(filter).map(|(f, w)| f * w).collect();
    let mut a = ArrayD::from_shape_vec(IxDyn(shape), data).expect("shape matches");
    fft.inverse(&mut a);
    a
}

/// `c_{j,n} = F⁻¹{m_n ĥ_j f̂}` for every scale and channel, plus the lowpass
/// `F⁻¹{â_J f̂}`. Channels are computed in parallel.
pub fn analyze(signal: &ArrayD<f64>, frame: &SteerableFrame) -> Result<Pyramid> {
    let spec = spectrum(signal, frame)?;
    let spec = spec.as_slice().expect("standard layout");
    let bands: Vec<ArrayD<Complex64>> = (0..frame.scales * frame.channels())
        .into_par_iter()
        .map(|idx| filtered(spec, frame.filter(idx), &frame.shape, &frame.fft))
        .collect();
    let lowpass = filtered(spec, frame.lowpass.iter().copied(), &frame.shape, &frame.fft);
    Pyramid::new(frame.manifest(0.0), bands, lowpass)
}

/// `f = F⁻¹{Σ_{j,n} m_n ĥ_j ĉ_{j,n} + â_J ĉ_low}`, the adjoint of
/// [`analyze`] and its inverse.
pub fn synthesize(pyramid: &Pyramid, frame: &SteerableFrame) -> Result<ArrayD<f64>> {
    frame.check_manifest(pyramid.manifest())?;
    let total: usize = frame.shape.iter().product();
    let accumulate = |mut acc: Vec<Complex64>, (array, filter): (&ArrayD<Complex64>, Vec<f64>)| {
        let mut a = array.as_standard_layout().into_owned();
        frame.fft.forward(&mut a);
        acc.iter_mut()
            .zip(a.iter())
            .zip(filter)
            .for_each(|((s, c), w)| *s += c * w);
        acc
    };
    let mut sum = (0..pyramid.bands.len())
        .into_par_iter()
        .map(|idx| (&pyramid.bands[idx], frame.filter(idx).collect::<Vec<f64>>()))
        .fold(|| vec![Complex64::default(); total], accumulate)
        .reduce(
            || vec![Complex64::default(); total],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    sum = accumulate(sum, (&pyramid.lowpass, frame.lowpass.clone()));
    let mut out = ArrayD::from_shape_vec(IxDyn(&frame.shape), sum).expect("shape matches");
    frame.fft.inverse(&mut out);
    Ok(out.mapv(|v| v.re))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular::{harmonic_bank, window_coeffs, zonal_bank, AngularCoeffs, Window};
    use crate::designs::{builtin_design, BuiltinDesign};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn random_signal(shape: &[usize], seed: u64) -> ArrayD<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ArrayD::from_shape_simple_fn(IxDyn(shape), || StandardNormal.sample(&mut rng))
    }

    fn norm2(a: &ArrayD<f64>) -> f64 {
        a.iter().map(|v| v * v).sum()
    }

    fn rel_err(a: &ArrayD<f64>, b: &ArrayD<f64>) -> f64 {
        ((a - b).iter().map(|v| v * v).sum::<f64>() / norm2(b)).sqrt()
    }

    fn zonal_2d(n: usize, lmax: usize) -> MultiplierBank {
        let design = builtin_design(BuiltinDesign::Equiangular(n)).unwrap();
        zonal_bank(&design, &window_coeffs(Window::Cubic, lmax, 2).unwrap()).unwrap()
    }

    fn ico_bank() -> MultiplierBank {
        let design = builtin_design(BuiltinDesign::Icosahedron).unwrap();
        zonal_bank(&design, &window_coeffs(Window::Cubic, 2, 3).unwrap()).unwrap()
    }

    fn simoncelli() -> RadialProfile {
        make_radial(RadialKind::SimoncelliLogcos)
    }

    #[test]
    fn partition_on_grid() {
        let bank = harmonic_bank(&window_coeffs(Window::Cubic, 1, 2).unwrap()).unwrap();
        let frame = build_frame(&[64, 64], 3, simoncelli(), bank).unwrap();
        assert!(frame.partition_residual() < 1e-12);
        assert_eq!(frame.lowpass_window()[0], 1.0);
        assert!(frame.multiplier(0)[0] == 0.0 && frame.band_window(0)[0] == 0.0);
    }

    #[test]
    fn size_and_dimension_checks() {
        let err = build_frame(&[8, 8], 3, simoncelli(), zonal_2d(12, 3)).unwrap_err();
        assert!(matches!(
            err,
            Error::ShapeTooSmall {
                side: 8,
                scales: 3,
                required: 32
            }
        ));
        let err = build_frame(&[32, 32, 32], 2, simoncelli(), zonal_2d(12, 3)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn tight_frame_and_reconstruction_2d() {
        let frame = build_frame(&[64, 64], 4, simoncelli(), zonal_2d(12, 3)).unwrap();
        for seed in 0..5 {
            let f = random_signal(&[64, 64], seed);
            let pyr = analyze(&f, &frame).unwrap();
            assert_eq!(pyr.array_count(), 12 * 4 + 1);
            assert!((pyr.energy() - norm2(&f)).abs() / norm2(&f) < 1e-9);
            let rec = synthesize(&pyr, &frame).unwrap();
            assert!(rel_err(&rec, &f) < 1e-9);
        }
    }

    #[test]
    fn tight_frame_and_reconstruction_3d() {
        let frame = build_frame(&[32, 32, 32], 2, make_radial(RadialKind::MeyerSmooth), ico_bank()).unwrap();
        let f = random_signal(&[32, 32, 32], 7);
        let pyr = analyze(&f, &frame).unwrap();
        assert_eq!(pyr.array_count(), 12 * 2 + 1);
        assert!((pyr.energy() - norm2(&f)).abs() / norm2(&f) < 1e-9);
        assert!(rel_err(&synthesize(&pyr, &frame).unwrap(), &f) < 1e-9);
    }

    #[test]
    fn lowpass_only_frame() {
        let frame = build_frame(&[16, 16], 0, simoncelli(), zonal_2d(5, 2)).unwrap();
        let f = random_signal(&[16, 16], 3);
        let pyr = analyze(&f, &frame).unwrap();
        assert_eq!(pyr.array_count(), 1);
        let err = pyr
            .lowpass()
            .iter()
            .zip(f.iter())
            .map(|(c, v)| (c - v).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-13);
    }

    #[test]
    fn isotropic_bank_is_the_primary_frame() {
        let c = AngularCoeffs::new(2, vec![1.0], "flat").unwrap();
        let frame = build_frame(&[32, 32], 2, simoncelli(), harmonic_bank(&c).unwrap()).unwrap();
        for j in 0..2 {
            let m = frame.multiplier(0);
            let h = frame.band_window(j);
            for k in 1..m.len() {
                assert!((m[k] - 1.0).abs() < 1e-15);
                assert!(h[k] >= 0.0);
            }
        }
        let f = random_signal(&[32, 32], 1);
        let pyr = analyze(&f, &frame).unwrap();
        assert!((pyr.energy() - norm2(&f)).abs() / norm2(&f) < 1e-12);
    }

    #[test]
    fn constant_signal_stays_in_lowpass() {
        let frame = build_frame(&[32, 32], 3, simoncelli(), zonal_2d(7, 3)).unwrap();
        let f = ArrayD::from_elem(IxDyn(&[32, 32]), 2.5);
        let pyr = analyze(&f, &frame).unwrap();
        for b in pyr.bands() {
            assert!(b.iter().all(|v| v.norm() < 1e-12));
        }
        assert!((array_energy(pyr.lowpass()) - norm2(&f)).abs() < 1e-9);
    }

    #[test]
    fn sinusoid_channel_energies() {
        let n = 64;
        let frame = build_frame(&[n, n], 3, simoncelli(), zonal_2d(12, 3)).unwrap();
        let f = ArrayD::from_shape_fn(IxDyn(&[n, n]), |i| {
            (2.0 * std::f64::consts::PI * 0.25 * i[0] as f64).cos()
        });
        let pyr = analyze(&f, &frame).unwrap();
        let bank = frame.bank();
        let plus = bank.eval(&[1.0, 0.0]);
        let minus = bank.eval(&[-1.0, 0.0]);
        let radial = simoncelli();
        // Both spectral peaks at ±e₁/4 have height n²/2.
        for j in 0..3 {
            let h = radial.eval(2f64.powi(j as i32) * 0.25);
            for ch in 0..12 {
                let want = (n * n) as f64 / 4.0 * h * h * (plus[ch].powi(2) + minus[ch].powi(2));
                let got = pyr.band_energy(j, ch);
                assert!(
                    (got - want).abs() <= 1e-9 * want.max(1e-300) + 1e-12,
                    "j={j} n={ch}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn translation_covariance() {
        let frame = build_frame(&[32, 32], 2, simoncelli(), zonal_2d(7, 3)).unwrap();
        let f = random_signal(&[32, 32], 11);
        let shifted = ArrayD::from_shape_fn(IxDyn(&[32, 32]), |i| f[[(i[0] + 32 - 5) % 32, (i[1] + 32 - 9) % 32]]);
        let a = analyze(&f, &frame).unwrap();
        let b = analyze(&shifted, &frame).unwrap();
        for (x, y) in a.bands().iter().zip(b.bands()) {
            for i in ndarray::indices(IxDyn(&[32, 32])) {
                let src = [(i[0] + 32 - 5) % 32, (i[1] + 32 - 9) % 32];
                assert!((y[&i] - x[&src[..]]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn linearity() {
        let frame = build_frame(&[32, 32, 32], 2, simoncelli(), ico_bank()).unwrap();
        let f = random_signal(&[32, 32, 32], 1);
        let g = random_signal(&[32, 32, 32], 2);
        let (alpha, beta) = (0.7, -1.3);
        let h = &f * alpha + &g * beta;
        let (pf, pg, ph) = (
            analyze(&f, &frame).unwrap(),
            analyze(&g, &frame).unwrap(),
            analyze(&h, &frame).unwrap(),
        );
        for ((a, b), c) in pf.bands().iter().zip(pg.bands()).zip(ph.bands()) {
            let err = (a * alpha + b * beta - c).iter().map(|v| v.norm()).fold(0.0, f64::max);
            assert!(err < 1e-10);
        }
    }

    #[test]
    fn zero_and_lowpass_only_pyramids() {
        let frame = build_frame(&[32, 32], 3, simoncelli(), zonal_2d(7, 3)).unwrap();
        let f = random_signal(&[32, 32], 5);
        let pyr = analyze(&f, &frame).unwrap();
        let (manifest, bands, lowpass) = pyr.into_parts();
        let zeros: Vec<_> = bands.iter().map(|b| b.mapv(|_| Complex64::default())).collect();

        let zero = Pyramid::new(manifest.clone(), zeros.clone(), lowpass.mapv(|_| Complex64::default())).unwrap();
        assert!(synthesize(&zero, &frame).unwrap().iter().all(|v| *v == 0.0));

        // Keeping only the lowpass filters f by |â|²: ⟨f_rec, f⟩ is the lowpass
        // energy and ‖f_rec‖² = Σ |â|⁴ |f̂|² / N.
        let low_energy = array_energy(&lowpass);
        let low = Pyramid::new(manifest, zeros, lowpass).unwrap();
        let rec = synthesize(&low, &frame).unwrap();
        let inner: f64 = rec.iter().zip(f.iter()).map(|(a, b)| a * b).sum();
        assert!((inner - low_energy).abs() < 1e-10 * norm2(&f));
        let mut spec = f.mapv(|v| Complex64::new(v, 0.0));
        frame.fft().forward(&mut spec);
        let quartic: f64 = spec
            .iter()
            .zip(frame.lowpass_window())
            .map(|(s, a)| a.powi(4) * s.norm_sqr())
            .sum::<f64>()
            / spec.len() as f64;
        assert!((norm2(&rec) - quartic).abs() < 1e-10 * norm2(&f));
    }

    #[test]
    fn rejects_bad_input() {
        let frame = build_frame(&[16, 16], 1, simoncelli(), zonal_2d(5, 2)).unwrap();
        let mut f = random_signal(&[16, 16], 0);
        assert!(matches!(
            analyze(&random_signal(&[16, 8], 0), &frame),
            Err(Error::ShapeMismatch { .. })
        ));
        f[[3, 3]] = f64::NAN;
        assert!(matches!(analyze(&f, &frame), Err(Error::NonFinite)));
        let other = build_frame(&[16, 16], 2, simoncelli(), zonal_2d(5, 2)).unwrap();
        let pyr = analyze(&random_signal(&[16, 16], 0), &frame).unwrap();
        assert!(matches!(synthesize(&pyr, &other), Err(Error::ManifestMismatch(_))));
    }
}
