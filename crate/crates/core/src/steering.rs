//! Rotations and coefficient-space steering.
//!
//! Steering a pyramid by `R` replaces every channel `m_n` by its rotated
//! copy `ω ↦ m_n(Rᵀω)` using only the stored coefficients: for zonal banks
//! through `S = U_{RX}U_Xᵀ` with entries `Λ_lmax(Rω_{n1}·ω_{n2})`, for
//! harmonic banks through orthogonal per-degree blocks computed by
//! quadrature. Rotations compose in the bank's own frame: steering by `R₁`
//! then `R₂` gives orientation `R₁R₂`.

use nalgebra::DMatrix;
use ndarray::ArrayD;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::angular::{BankDescriptor, BankKind, MultiplierBank};
use crate::designs::{projection_kernel, QuadratureRule};
use crate::error::{Error, Result};
use crate::frame::Pyramid;
use crate::sphmath::{dim_harmonics, sph_basis_eval};

/// Allowed deviation of `RᵀR` from `I` and of `det R` from one.
pub const ROTATION_TOLERANCE: f64 = 1e-12;

/// A proper rotation of `R^d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Rotation {
    dim: usize,
    m: Vec<f64>,
}

impl Rotation {
    pub fn identity(dim: usize) -> Self {
        let mut m = vec![0.0; dim * dim];
        (0..dim).for_each(|i| m[i * dim + i] = 1.0);
        Rotation { dim, m }
    }

    /// Counter-clockwise rotation of the plane by `angle` radians.
    pub fn planar(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Rotation {
            dim: 2,
            m: vec![c, -s, s, c],
        }
    }

    /// Right-handed rotation of `R^3` about `axis` by `angle` (Rodrigues).
    pub fn axis_angle(axis: [f64; 3], angle: f64) -> Result<Self> {
        let norm = axis.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidArgument(
                "rotation axis must be a nonzero finite vector".into(),
            ));
        }
        let [x, y, z] = axis.map(|v| v / norm);
        let (s, c) = angle.sin_cos();
        let t = 1.0 - c;
        Ok(Rotation {
            dim: 3,
            m: vec![
                c + t * x * x,
                t * x * y - s * z,
                t * x * z + s * y,
                t * x * y + s * z,
                c + t * y * y,
                t * y * z - s * x,
                t * x * z - s * y,
                t * y * z + s * x,
                c + t * z * z,
            ],
        })
    }

    /// Validates a row-major `d×d` matrix: `‖RᵀR − I‖_max` and `|det R − 1|`
    /// must both stay below [`ROTATION_TOLERANCE`].
    pub fn from_matrix(dim: usize, m: Vec<f64>) -> Result<Self> {
        if m.len() != dim * dim || dim == 0 {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: m.len(),
            });
        }
        let mat = DMatrix::from_row_slice(dim, dim, &m);
        let ortho = (mat.transpose() * &mat - DMatrix::identity(dim, dim)).amax();
        let det = (mat.determinant() - 1.0).abs();
        let residual = ortho.max(det);
        if !(residual < ROTATION_TOLERANCE) {
            return Err(Error::NotARotation(residual));
        }
        Ok(Rotation { dim, m })
    }

    /// Haar-distributed random rotation (QR of a Gaussian matrix).
    pub fn random(dim: usize, rng: &mut impl Rng) -> Self {
        let g = DMatrix::<f64>::from_fn(dim, dim, |_, _| rng.sample(StandardNormal));
        let qr = g.qr();
        let (mut q, r) = (qr.q(), qr.r());
        for j in 0..dim {
            if r[(j, j)] < 0.0 {
                q.column_mut(j).neg_mut();
            }
        }
        if q.determinant() < 0.0 {
            q.column_mut(0).neg_mut();
        }
        Rotation {
            dim,
            m: q.transpose().as_slice().to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Row-major entries.
    pub fn matrix(&self) -> &[f64] {
        &self.m
    }

    pub fn is_identity(&self) -> bool {
        *self == Rotation::identity(self.dim)
    }

    pub fn apply(&self, p: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.m[i * self.dim + j] * p[j]).sum())
            .collect()
    }

    /// Component `i` of `Rᵀv`.
    pub fn apply_transpose_row(&self, i: usize, v: &[f64]) -> f64 {
        (0..self.dim).map(|j| self.m[j * self.dim + i] * v[j]).sum()
    }

    pub fn transpose(&self) -> Self {
        let d = self.dim;
        Rotation {
            dim: d,
            m: (0..d * d).map(|k| self.m[(k % d) * d + k / d]).collect(),
        }
    }

    /// `self · other`.
    pub fn compose(&self, other: &Rotation) -> Result<Self> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let d = self.dim;
        let m = (0..d * d)
            .map(|k| (0..d).map(|l| self.m[(k / d) * d + l] * other.m[l * d + k % d]).sum())
            .collect();
        Ok(Rotation { dim: d, m })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SteeringKind {
    Zonal,
    Harmonic,
}

/// Channel-space operator realizing a rotation of a bank.
#[derive(Debug, Clone)]
pub struct SteeringMatrix {
    kind: SteeringKind,
    rotation: Rotation,
    bank: BankDescriptor,
    entries: DMatrix<f64>,
    // (degree, first channel, block) for harmonic steering.
    blocks: Vec<(usize, usize, DMatrix<f64>)>,
}

impl SteeringMatrix {
    pub fn kind(&self) -> SteeringKind {
        self.kind
    }

    pub fn rotation(&self) -> &Rotation {
        &self.rotation
    }

    /// Descriptor of the bank the matrix was built for.
    pub fn bank(&self) -> &BankDescriptor {
        &self.bank
    }

    /// Full channel matrix (block diagonal in the harmonic case).
    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// Per-degree blocks of a harmonic steering matrix.
    pub fn blocks(&self) -> impl Iterator<Item = (usize, &DMatrix<f64>)> {
        self.blocks.iter().map(|(l, _, b)| (*l, b))
    }

    /// `S·v` for one channel vector.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        (&self.entries * nalgebra::DVector::from_column_slice(v))
            .as_slice()
            .to_vec()
    }
}

/// `[S]_{n1,n2} = Λ_lmax(Rω_{n1}·ω_{n2})` for a zonal bank on `X = {ω_n}`.
///
/// Maps the channels of the bank on `X` onto those of the bank on `RX`;
/// this holds for any per-degree weights because the design's
/// characteristic matrix is an isometry.
pub fn steering_matrix_zonal(bank: &MultiplierBank, rotation: &Rotation) -> Result<SteeringMatrix> {
    let design = bank
        .design()
        .ok_or_else(|| Error::BankKind("zonal steering needs a zonal bank".into()))?;
    if rotation.dim() != bank.dim() {
        return Err(Error::DimensionMismatch {
            expected: bank.dim(),
            found: rotation.dim(),
        });
    }
    let required = 2 * bank.lmax();
    if design.strength() < required {
        return Err(Error::InsufficientStrength {
            required,
            available: design.strength(),
        });
    }
    let n = design.len();
    let rotated: Vec<Vec<f64>> = design.points().map(|p| rotation.apply(p)).collect();
    let entries = DMatrix::from_fn(n, n, |a, b| {
        let dot: f64 = rotated[a].iter().zip(design.point(b)).map(|(x, y)| x * y).sum();
        projection_kernel(bank.dim(), bank.lmax(), n, dot.clamp(-1.0, 1.0))
    });
    Ok(SteeringMatrix {
        kind: SteeringKind::Zonal,
        rotation: rotation.clone(),
        bank: bank.descriptor(),
        entries,
        blocks: Vec::new(),
    })
}

/// The block `V_ℓ(R)` with `Σ_k [V_ℓ]_{k0,k} Y_{ℓ,k}(ω) = Y_{ℓ,k0}(Rω)`,
/// computed as `[V_ℓ]_{k0,k} = Σ_n w_n Y_{ℓ,k0}(Rω_n) Y_{ℓ,k}(ω_n)` with a
/// rule exact through degree `2ℓ`.
pub fn steering_matrix_harmonic(
    d: usize,
    l: usize,
    rotation: &Rotation,
    quad: &QuadratureRule,
) -> Result<DMatrix<f64>> {
    if d != 2 && d != 3 {
        return Err(Error::UnsupportedDimension(d));
    }
    if rotation.dim() != d || quad.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: if rotation.dim() != d {
                rotation.dim()
            } else {
                quad.dim()
            },
        });
    }
    if quad.strength() < 2 * l {
        return Err(Error::InsufficientStrength {
            required: 2 * l,
            available: quad.strength(),
        });
    }
    let size = dim_harmonics(d, l)?;
    let mut v = DMatrix::zeros(size, size);
    for (p, w) in quad.points().zip(quad.weights()) {
        let y = sph_basis_eval(d, l, p)?;
        let yr = sph_basis_eval(d, l, &rotation.apply(p))?;
        for a in 0..size {
            for b in 0..size {
                v[(a, b)] += w * yr[a] * y[b];
            }
        }
    }
    Ok(v)
}

/// Block-diagonal steering for a harmonic bank. Uses `V_ℓ(Rᵀ)` so that, as
/// in the zonal case, steered channels are `ω ↦ m(Rᵀω)`.
pub fn steering_matrix_harmonic_bank(
    bank: &MultiplierBank,
    rotation: &Rotation,
    quad: &QuadratureRule,
) -> Result<SteeringMatrix> {
    let channels = bank
        .harmonic_channels()
        .ok_or_else(|| Error::BankKind("harmonic steering needs a harmonic bank".into()))?;
    let inverse = rotation.transpose();
    let mut entries = DMatrix::zeros(channels.len(), channels.len());
    let mut blocks = Vec::new();
    let mut start = 0;
    while start < channels.len() {
        let l = channels[start].degree;
        let v = steering_matrix_harmonic(bank.dim(), l, &inverse, quad)?;
        entries.view_mut((start, start), v.shape()).copy_from(&v);
        blocks.push((l, start, v));
        start += dim_harmonics(bank.dim(), l)?;
    }
    Ok(SteeringMatrix {
        kind: SteeringKind::Harmonic,
        rotation: rotation.clone(),
        bank: bank.descriptor(),
        entries,
        blocks,
    })
}

/// Left-multiplies every channel vector (per scale and grid position) by
/// `S`. The lowpass is untouched and the manifest orientation becomes
/// `R_old·R`.
pub fn steer_pyramid(pyramid: &Pyramid, steering: &SteeringMatrix) -> Result<Pyramid> {
    let manifest = pyramid.manifest();
    if steering.entries.nrows() != manifest.channels {
        return Err(Error::DimensionMismatch {
            expected: manifest.channels,
            found: steering.entries.nrows(),
        });
    }
    let mut own = manifest.bank.clone();
    let mut theirs = steering.bank.clone();
    own.orientation = None;
    theirs.orientation = None;
    if own != theirs {
        return Err(Error::ManifestMismatch(
            "steering matrix was built for a different bank".into(),
        ));
    }
    let kind_ok = matches!(
        (steering.kind, manifest.bank.kind),
        (SteeringKind::Zonal, BankKind::Zonal) | (SteeringKind::Harmonic, BankKind::Harmonic)
    );
    if !kind_ok {
        return Err(Error::BankKind("steering kind does not match the bank kind".into()));
    }

    let d = manifest.shape.len();
    let old = match &manifest.bank.orientation {
        Some(m) => Rotation::from_matrix(d, m.clone())?,
        None => Rotation::identity(d),
    };
    let orientation = old.compose(&steering.rotation)?;

    let n = manifest.channels;
    let s = &steering.entries;
    let bands: Vec<ArrayD<Complex64>> = (0..manifest.scales * n)
        .into_par_iter()
        .map(|idx| {
            let (j, row) = (idx / n, idx % n);
            let mut out = pyramid.band(j, 0).mapv(|_| Complex64::default());
            for col in 0..n {
                let w = s[(row, col)];
                if w != 0.0 {
                    out.zip_mut_with(pyramid.band(j, col), |o, c| *o += c * w);
                }
            }
            out
        })
        .collect();
    let mut new_manifest = manifest.clone();
    new_manifest.bank.orientation = if orientation.is_identity() {
        None
    } else {
        Some(orientation.matrix().to_vec())
    };
    Pyramid::new(new_manifest, bands, pyramid.lowpass().clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular::{harmonic_bank, sphere_samples, window_coeffs, zonal_bank, Window};
    use crate::designs::{builtin_design, quadrature_rule, BuiltinDesign};
    use crate::frame::{analyze, build_frame, make_radial, synthesize, RadialKind};
    use ndarray::IxDyn;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::Distribution;
    use std::f64::consts::PI;

    fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn rotation_constructors() {
        assert!(Rotation::planar(0.0).is_identity());
        let r = Rotation::axis_angle([0.0, 0.0, 1.0], PI / 2.0).unwrap();
        assert!(max_abs_diff(&r.apply(&[1.0, 0.0, 0.0]), &[0.0, 1.0, 0.0]) < 1e-15);
        assert!(Rotation::axis_angle([0.0; 3], 1.0).is_err());

        let mut m = Rotation::axis_angle([1.0, 2.0, 3.0], 0.7).unwrap().matrix().to_vec();
        Rotation::from_matrix(3, m.clone()).unwrap();
        for row in 0..3 {
            m[row * 3 + 1] *= 1.01;
        }
        match Rotation::from_matrix(3, m) {
            Err(Error::NotARotation(res)) => assert!((res - 0.0201).abs() < 1e-9, "{res}"),
            other => panic!("{other:?}"),
        }
        // A reflection is orthogonal but has determinant −1.
        assert!(Rotation::from_matrix(2, vec![1.0, 0.0, 0.0, -1.0]).is_err());
    }

    #[test]
    fn random_rotations_are_proper() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for d in 2..=5 {
            for _ in 0..20 {
                let r = Rotation::random(d, &mut rng);
                Rotation::from_matrix(d, r.matrix().to_vec()).unwrap();
                let back = r.compose(&r.transpose()).unwrap();
                assert!(max_abs_diff(back.matrix(), Rotation::identity(d).matrix()) < 1e-14);
            }
        }
    }

    #[test]
    fn identity_zonal_matrix_is_the_channel_projection() {
        let design = builtin_design(BuiltinDesign::Icosahedron).unwrap();
        let bank = zonal_bank(&design, &window_coeffs(Window::Cubic, 2, 3).unwrap()).unwrap();
        let s = steering_matrix_zonal(&bank, &Rotation::identity(3)).unwrap();
        for p in sphere_samples(3, 50) {
            let m = bank.eval(&p);
            assert!(max_abs_diff(&s.apply(&m), &m) < 1e-12);
        }
        let s2 = s.entries() * s.entries();
        assert!((s2 - s.entries()).amax() < 1e-12);
        // Λ(1) = Σ N(3,ℓ)/12 for ℓ ≤ 2.
        assert!((s.entries()[(0, 0)] - 9.0 / 12.0).abs() < 1e-14);
    }

    #[test]
    fn function_level_steering() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let cases = [
            (builtin_design(BuiltinDesign::Icosahedron).unwrap(), 2usize),
            (builtin_design(BuiltinDesign::Dodecahedron).unwrap(), 2),
            (builtin_design(BuiltinDesign::Equiangular(9)).unwrap(), 4),
        ];
        for (design, lmax) in cases {
            let d = design.dim();
            for window in [Window::Flat, Window::Cubic] {
                let bank = zonal_bank(&design, &window_coeffs(window, lmax, d).unwrap()).unwrap();
                for _ in 0..5 {
                    let r = Rotation::random(d, &mut rng);
                    let s = steering_matrix_zonal(&bank, &r).unwrap();
                    let rotated = zonal_bank(&design.rotated(&r).unwrap(), bank.coeffs()).unwrap();
                    let oriented = bank.oriented(r.clone()).unwrap();
                    for _ in 0..100 {
                        let w: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
                        let steered = s.apply(&bank.eval(&w));
                        assert!(max_abs_diff(&steered, &rotated.eval(&w)) < 1e-9);
                        assert!(max_abs_diff(&steered, &oriented.eval(&w)) < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn harmonic_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in [2usize, 3] {
            for l in 0..=5 {
                let quad = quadrature_rule(d, 2 * l).unwrap();
                let id = steering_matrix_harmonic(d, l, &Rotation::identity(d), &quad).unwrap();
                let n = id.nrows();
                assert!((&id - DMatrix::identity(n, n)).amax() < 1e-12);
                for _ in 0..5 {
                    let r1 = Rotation::random(d, &mut rng);
                    let r2 = Rotation::random(d, &mut rng);
                    let v1 = steering_matrix_harmonic(d, l, &r1, &quad).unwrap();
                    let v2 = steering_matrix_harmonic(d, l, &r2, &quad).unwrap();
                    let v12 = steering_matrix_harmonic(d, l, &r1.compose(&r2).unwrap(), &quad).unwrap();
                    assert!((&v1 * v1.transpose() - DMatrix::identity(n, n)).amax() < 1e-10);
                    assert!((&v1 * &v2 - v12).amax() < 1e-9);
                    for p in sphere_samples(d, 20) {
                        let y = DMatrix::from_column_slice(n, 1, &sph_basis_eval(d, l, &p).unwrap());
                        let want = sph_basis_eval(d, l, &r1.apply(&p)).unwrap();
                        let got = &v1 * y;
                        assert!(max_abs_diff(got.as_slice(), &want) < 1e-9);
                    }
                }
            }
        }
        let low = quadrature_rule(3, 3).unwrap();
        assert!(matches!(
            steering_matrix_harmonic(3, 2, &Rotation::identity(3), &low),
            Err(Error::InsufficientStrength {
                required: 4,
                available: 3
            })
        ));
    }

    #[test]
    fn planar_first_degree_block() {
        let alpha = 0.83;
        let quad = quadrature_rule(2, 2).unwrap();
        let v = steering_matrix_harmonic(2, 1, &Rotation::planar(alpha), &quad).unwrap();
        // Basis (cos θ, sin θ)/√π rotates like the coordinates themselves.
        let want = DMatrix::from_row_slice(2, 2, &[alpha.cos(), -alpha.sin(), alpha.sin(), alpha.cos()]);
        assert!((v - want).amax() < 1e-12);
    }

    fn random_signal(shape: &[usize], seed: u64) -> ArrayD<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ArrayD::from_shape_simple_fn(IxDyn(shape), || StandardNormal.sample(&mut rng))
    }

    #[test]
    fn one_step_rotation_permutes_channels() {
        let n = 12;
        let design = builtin_design(BuiltinDesign::Equiangular(n)).unwrap();
        let bank = zonal_bank(&design, &window_coeffs(Window::Flat, 3, 2).unwrap()).unwrap();
        let frame = build_frame(&[64, 64], 3, make_radial(RadialKind::SimoncelliLogcos), bank.clone()).unwrap();
        let pyr = analyze(&random_signal(&[64, 64], 4), &frame).unwrap();
        let s = steering_matrix_zonal(&bank, &Rotation::planar(2.0 * PI / n as f64)).unwrap();
        let steered = steer_pyramid(&pyr, &s).unwrap();
        let scale = pyr
            .bands()
            .iter()
            .flat_map(|b| b.iter())
            .map(|v| v.norm())
            .fold(0.0, f64::max);
        for j in 0..3 {
            for ch in 0..n {
                // Steered channel ch is centered on Rω_ch = ω_{ch+1}.
                let err = (steered.band(j, ch) - pyr.band(j, (ch + 1) % n))
                    .iter()
                    .map(|v| v.norm())
                    .fold(0.0, f64::max);
                assert!(err < 1e-9 * scale, "j={j} ch={ch}: {err}");
            }
        }
        assert_eq!(steered.lowpass(), pyr.lowpass());
    }

    #[test]
    fn steered_pyramid_reconstructs_with_oriented_bank() {
        let design = builtin_design(BuiltinDesign::Icosahedron).unwrap();
        let bank = zonal_bank(&design, &window_coeffs(Window::Cubic, 2, 3).unwrap()).unwrap();
        let radial = make_radial(RadialKind::MeyerSmooth);
        let frame = build_frame(&[16, 16, 16], 2, radial, bank.clone()).unwrap();
        let f = random_signal(&[16, 16, 16], 8);
        let pyr = analyze(&f, &frame).unwrap();
        let r = Rotation::axis_angle([1.0, -1.0, 0.5], 0.4).unwrap();
        let steered = steer_pyramid(&pyr, &steering_matrix_zonal(&bank, &r).unwrap()).unwrap();
        assert!(steered.energy() <= pyr.energy() * (1.0 + 1e-12));

        let rotated_frame = build_frame(&[16, 16, 16], 2, radial, bank.oriented(r).unwrap()).unwrap();
        let direct = analyze(&f, &rotated_frame).unwrap();
        for (a, b) in steered.bands().iter().zip(direct.bands()) {
            assert!((a - b).iter().map(|v| v.norm()).fold(0.0, f64::max) < 1e-10);
        }
        let rec = synthesize(&steered, &rotated_frame).unwrap();
        let err = (&rec - &f).iter().map(|v| v * v).sum::<f64>() / f.iter().map(|v| v * v).sum::<f64>();
        assert!(err.sqrt() < 1e-9);
    }

    #[test]
    fn harmonic_steering_preserves_degree_energy() {
        let coeffs = window_coeffs(Window::Cubic, 3, 3).unwrap();
        let bank = harmonic_bank(&coeffs).unwrap();
        let frame = build_frame(
            &[16, 16, 16],
            1,
            make_radial(RadialKind::SimoncelliLogcos),
            bank.clone(),
        )
        .unwrap();
        let f = random_signal(&[16, 16, 16], 9);
        let pyr = analyze(&f, &frame).unwrap();
        let quad = quadrature_rule(3, 6).unwrap();
        let r = Rotation::axis_angle([0.2, 0.9, -0.3], 2.1).unwrap();
        let s = steering_matrix_harmonic_bank(&bank, &r, &quad).unwrap();
        let steered = steer_pyramid(&pyr, &s).unwrap();
        let channels = bank.harmonic_channels().unwrap();
        for l in 0..=3 {
            let energy = |p: &Pyramid| -> f64 {
                channels
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| c.degree == l)
                    .map(|(n, _)| p.band_energy(0, n))
                    .sum()
            };
            let (a, b) = (energy(&pyr), energy(&steered));
            assert!((a - b).abs() <= 1e-10 * pyr.energy(), "ℓ={l}: {a} vs {b}");
        }
        let rotated_frame = build_frame(
            &[16, 16, 16],
            1,
            make_radial(RadialKind::SimoncelliLogcos),
            bank.oriented(r).unwrap(),
        )
        .unwrap();
        let rec = synthesize(&steered, &rotated_frame).unwrap();
        assert!((&rec - &f).iter().map(|v| v.abs()).fold(0.0, f64::max) < 1e-9);

        let id = steering_matrix_harmonic_bank(&bank, &Rotation::identity(3), &quad).unwrap();
        let same = steer_pyramid(&pyr, &id).unwrap();
        for (a, b) in same.bands().iter().zip(pyr.bands()) {
            assert!((a - b).iter().map(|v| v.norm()).fold(0.0, f64::max) < 1e-12);
        }
    }

    #[test]
    fn steering_checks_kinds() {
        let coeffs = window_coeffs(Window::Cubic, 2, 3).unwrap();
        let harmonic = harmonic_bank(&coeffs).unwrap();
        assert!(matches!(
            steering_matrix_zonal(&harmonic, &Rotation::identity(3)),
            Err(Error::BankKind(_))
        ));
        let zonal = zonal_bank(&builtin_design(BuiltinDesign::Icosahedron).unwrap(), &coeffs).unwrap();
        let quad = quadrature_rule(3, 4).unwrap();
        assert!(matches!(
            steering_matrix_harmonic_bank(&zonal, &Rotation::identity(3), &quad),
            Err(Error::BankKind(_))
        ));
    }

    proptest! {
        #[test]
        fn kernel_is_rotation_invariant(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for d in [2usize, 3, 4] {
                let r = Rotation::random(d, &mut rng);
                let a = Rotation::random(d, &mut rng).apply(&{ let mut e = vec![0.0; d]; e[0] = 1.0; e });
                let b = Rotation::random(d, &mut rng).apply(&{ let mut e = vec![0.0; d]; e[0] = 1.0; e });
                let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>().clamp(-1.0, 1.0);
                let before = projection_kernel(d, 6, 40, dot(&a, &b));
                let after = projection_kernel(d, 6, 40, dot(&r.apply(&a), &r.apply(&b)));
                prop_assert!((before - after).abs() < 1e-12);
            }
        }
    }
}
