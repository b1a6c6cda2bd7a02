//! Admissible angular multiplier banks.
//!
//! A bank is a finite family `{m_n}` of functions on the sphere, extended to
//! `R^d \ {0}` by homogeneity of degree zero, whose squared moduli sum to one.
//! Two constructions are provided:
//!
//! * harmonic banks, `m_{ℓ,k}(ω) = c_ℓ √(σ/N(d,ℓ)) Y_{ℓ,k}(ω/|ω|)`;
//! * zonal banks on a spherical design `{ω_n}` of strength `≥ 2·lmax`,
//!   `m_n(ω) = Σ_ℓ c_ℓ √(N(d,ℓ)/n_max) P_ℓ(d; ω_n·ω/|ω|)`.

mod energy;

use std::f64::consts::PI;
use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

pub use energy::{assemble_gram, optimal_coeffs, EnergyProblem, Sense, GRAM_NODES, GRAM_TOLERANCE};

use crate::designs::{projection_kernel, SphericalDesign};
use crate::error::{Error, Result};
use crate::sphmath::{
    circular_harmonics, dim_harmonics, dim_harmonics_upto, legendre_all, legendre_unchecked, sphere_area,
    spherical_harmonics,
};
use crate::steering::Rotation;

/// Per-degree weights `c = (c_0, …, c_lmax)` with `‖c‖₂ = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngularCoeffs {
    dim: usize,
    values: Vec<f64>,
    label: String,
}

impl AngularCoeffs {
    /// Wraps an already normalized vector; fails unless `|‖c‖ − 1| ≤ 1e-12`.
    pub fn new(dim: usize, values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        check_dim(dim)?;
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if values.is_empty() || !((norm - 1.0).abs() <= 1e-12) {
            return Err(Error::InvalidArgument(format!(
                "angular coefficients must be a unit vector (norm {norm})"
            )));
        }
        Ok(AngularCoeffs {
            dim,
            values,
            label: label.into(),
        })
    }

    /// Normalizes raw weights to unit length.
    pub fn from_weights(dim: usize, weights: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        check_dim(dim)?;
        let norm = weights.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidArgument("angular weights must not all vanish".into()));
        }
        Ok(AngularCoeffs {
            dim,
            values: weights.iter().map(|v| v / norm).collect(),
            label: label.into(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lmax(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Name of the construction that produced the weights.
    pub fn label(&self) -> &str {
        &self.label
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::Domain(format!("dimension d = {d} must be at least 2")));
    }
    Ok(())
}

/// Window profiles `â` on `[0, 1]` with `â(0) = 1` and `â(1) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    /// `(1 − ω)²(1 + 2ω)`.
    Cubic,
    /// `1 − ω`.
    Bspline1,
    /// Centered cubic B-spline, `β³(2ω)/β³(0)`.
    Bspline3,
    /// Equal weight for every degree.
    Flat,
}

impl Window {
    pub fn name(&self) -> &'static str {
        match self {
            Window::Cubic => "cubic",
            Window::Bspline1 => "bspline1",
            Window::Bspline3 => "bspline3",
            Window::Flat => "flat",
        }
    }

    pub fn eval(&self, w: f64) -> f64 {
        let w = w.max(0.0);
        match self {
            Window::Cubic => {
                if w >= 1.0 {
                    0.0
                } else {
                    (1.0 - w) * (1.0 - w) * (1.0 + 2.0 * w)
                }
            }
            Window::Bspline1 => (1.0 - w).max(0.0),
            Window::Bspline3 => cubic_bspline(2.0 * w) / cubic_bspline(0.0),
            Window::Flat => 1.0,
        }
    }
}

impl std::str::FromStr for Window {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cubic" => Ok(Window::Cubic),
            "bspline1" => Ok(Window::Bspline1),
            "bspline3" => Ok(Window::Bspline3),
            "flat" => Ok(Window::Flat),
            other => Err(Error::InvalidArgument(format!("unknown window `{other}`"))),
        }
    }
}

fn cubic_bspline(x: f64) -> f64 {
    let a = x.abs();
    if a < 1.0 {
        2.0 / 3.0 - a * a + 0.5 * a * a * a
    } else if a < 2.0 {
        (2.0 - a).powi(3) / 6.0
    } else {
        0.0
    }
}

/// `c ∝ (â(ℓ/(lmax + 1)))_ℓ`, normalized to a unit vector.
pub fn window_coeffs(window: Window, lmax: usize, d: usize) -> Result<AngularCoeffs> {
    let weights = (0..=lmax)
        .map(|l| window.eval(l as f64 / (lmax as f64 + 1.0)))
        .collect();
    AngularCoeffs::from_weights(d, weights, window.name())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BankKind {
    Harmonic,
    Zonal,
}

/// One harmonic channel: degree, basis index within the degree, and the
/// position of `Y_{ℓ,k}` in the concatenated basis of degrees `0..=lmax`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HarmonicChannel {
    pub degree: usize,
    pub index: usize,
    basis_slot: usize,
}

#[derive(Debug, Clone)]
enum Layout {
    Harmonic {
        channels: Vec<HarmonicChannel>,
        scales: Vec<f64>,
    },
    Zonal {
        design: SphericalDesign,
        // c_ℓ √(N(d,ℓ)/n_max)
        degree_weights: Vec<f64>,
    },
}

/// Serializable summary of how a bank was built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BankDescriptor {
    pub kind: BankKind,
    pub dim: usize,
    pub lmax: usize,
    pub window: String,
    pub coeffs: Vec<f64>,
    pub channels: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub design: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub design_checksum: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub design_strength: Option<usize>,
    /// Row-major rotation `R`; the channels are `ω ↦ m_n(Rᵀω)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orientation: Option<Vec<f64>>,
}

/// An admissible collection of degree-0 homogeneous multipliers.
#[derive(Debug, Clone)]
pub struct MultiplierBank {
    dim: usize,
    coeffs: AngularCoeffs,
    layout: Layout,
    orientation: Option<Rotation>,
}

/// Harmonic bank from per-degree weights; degrees with `c_ℓ = 0` contribute
/// no channels. Requires `d ∈ {2, 3}`.
pub fn harmonic_bank(coeffs: &AngularCoeffs) -> Result<MultiplierBank> {
    let d = coeffs.dim();
    if d != 2 && d != 3 {
        return Err(Error::UnsupportedDimension(d));
    }
    let area = sphere_area(d)?;
    let mut channels = Vec::new();
    let mut scales = Vec::new();
    let mut slot = 0;
    for (l, &c) in coeffs.values().iter().enumerate() {
        let count = dim_harmonics(d, l)?;
        if c != 0.0 {
            let scale = c * (area / count as f64).sqrt();
            for k in 0..count {
                channels.push(HarmonicChannel {
                    degree: l,
                    index: k,
                    basis_slot: slot + k,
                });
                scales.push(scale);
            }
        }
        slot += count;
    }
    Ok(MultiplierBank {
        dim: d,
        coeffs: coeffs.clone(),
        layout: Layout::Harmonic { channels, scales },
        orientation: None,
    })
}

/// Zonal bank centered on the points of `design`, which must have strength
/// at least `2·lmax`.
pub fn zonal_bank(design: &SphericalDesign, coeffs: &AngularCoeffs) -> Result<MultiplierBank> {
    let d = design.dim();
    if coeffs.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: coeffs.dim(),
        });
    }
    let required = 2 * coeffs.lmax();
    if design.strength() < required {
        return Err(Error::InsufficientStrength {
            required,
            available: design.strength(),
        });
    }
    let n_max = design.len() as f64;
    let degree_weights = coeffs
        .values()
        .iter()
        .enumerate()
        .map(|(l, &c)| Ok(c * (dim_harmonics(d, l)? as f64 / n_max).sqrt()))
        .collect::<Result<Vec<f64>>>()?;
    Ok(MultiplierBank {
        dim: d,
        coeffs: coeffs.clone(),
        layout: Layout::Zonal {
            design: design.clone(),
            degree_weights,
        },
        orientation: None,
    })
}

/// Rebuilds a bank from its descriptor. Zonal banks need their center
/// design, whose checksum must match the recorded one.
pub fn bank_from_descriptor(desc: &BankDescriptor, design: Option<&SphericalDesign>) -> Result<MultiplierBank> {
    let coeffs = AngularCoeffs::new(desc.dim, desc.coeffs.clone(), desc.window.clone())?;
    let bank = match desc.kind {
        BankKind::Harmonic => harmonic_bank(&coeffs)?,
        BankKind::Zonal => {
            let design = design.ok_or_else(|| Error::BankKind("zonal bank needs its design".into()))?;
            if let Some(sum) = &desc.design_checksum {
                if *sum != design.checksum() {
                    return Err(Error::ManifestMismatch(format!(
                        "design checksum {} differs from recorded {sum}",
                        design.checksum()
                    )));
                }
            }
            zonal_bank(design, &coeffs)?
        }
    };
    if bank.len() != desc.channels {
        return Err(Error::ManifestMismatch(format!(
            "descriptor lists {} channels, bank has {}",
            desc.channels,
            bank.len()
        )));
    }
    match &desc.orientation {
        Some(m) => bank.oriented(Rotation::from_matrix(desc.dim, m.clone())?),
        None => Ok(bank),
    }
}

impl MultiplierBank {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lmax(&self) -> usize {
        self.coeffs.lmax()
    }

    pub fn coeffs(&self) -> &AngularCoeffs {
        &self.coeffs
    }

    pub fn kind(&self) -> BankKind {
        match self.layout {
            Layout::Harmonic { .. } => BankKind::Harmonic,
            Layout::Zonal { .. } => BankKind::Zonal,
        }
    }

    pub fn len(&self) -> usize {
        match &self.layout {
            Layout::Harmonic { channels, .. } => channels.len(),
            Layout::Zonal { design, .. } => design.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Center design of a zonal bank.
    pub fn design(&self) -> Option<&SphericalDesign> {
        match &self.layout {
            Layout::Zonal { design, .. } => Some(design),
            Layout::Harmonic { .. } => None,
        }
    }

    /// Channel layout of a harmonic bank.
    pub fn harmonic_channels(&self) -> Option<&[HarmonicChannel]> {
        match &self.layout {
            Layout::Harmonic { channels, .. } => Some(channels),
            Layout::Zonal { .. } => None,
        }
    }

    /// Rotation applied to every channel: the oriented bank evaluates
    /// `m_n(Rᵀω)`. `None` means the identity.
    pub fn orientation(&self) -> Option<&Rotation> {
        self.orientation.as_ref()
    }

    /// The same bank with channels rotated by `rotation` (replacing any
    /// previous orientation).
    pub fn oriented(&self, rotation: Rotation) -> Result<Self> {
        if rotation.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: rotation.dim(),
            });
        }
        let mut bank = self.clone();
        bank.orientation = if rotation.is_identity() { None } else { Some(rotation) };
        Ok(bank)
    }

    pub fn descriptor(&self) -> BankDescriptor {
        let design = self.design();
        BankDescriptor {
            kind: self.kind(),
            dim: self.dim,
            lmax: self.lmax(),
            window: self.coeffs.label().to_string(),
            coeffs: self.coeffs.values().to_vec(),
            channels: self.len(),
            design: design.map(|d| d.source().to_string()),
            design_checksum: design.map(SphericalDesign::checksum),
            design_strength: design.map(SphericalDesign::strength),
            orientation: self.orientation.as_ref().map(|r| r.matrix().to_vec()),
        }
    }

    /// Evaluates every channel at `omega` (any nonzero vector; the bank is
    /// homogeneous of degree zero). At the origin all channels are zero.
    pub fn eval(&self, omega: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.eval_into(omega, &mut Scratch::default(), &mut out);
        out
    }

    /// Allocation-free variant of [`MultiplierBank::eval`].
    pub fn eval_into(&self, omega: &[f64], scratch: &mut Scratch, out: &mut [f64]) {
        assert_eq!(omega.len(), self.dim, "evaluation point has wrong dimension");
        assert_eq!(out.len(), self.len(), "output buffer has wrong length");
        let norm = omega.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            out.fill(0.0);
            return;
        }
        scratch.unit.clear();
        match &self.orientation {
            Some(r) => scratch
                .unit
                .extend((0..self.dim).map(|i| r.apply_transpose_row(i, omega) / norm)),
            None => scratch.unit.extend(omega.iter().map(|v| v / norm)),
        }
        let u = &scratch.unit;
        match &self.layout {
            Layout::Harmonic { channels, scales } => {
                let lmax = self.lmax();
                scratch
                    .basis
                    .resize(dim_harmonics_upto(self.dim, lmax).expect("valid"), 0.0);
                if self.dim == 2 {
                    circular_harmonics(u[1].atan2(u[0]), lmax, &mut scratch.basis);
                } else {
                    spherical_harmonics(u, lmax, &mut scratch.basis);
                }
                for ((o, ch), s) in out.iter_mut().zip(channels).zip(scales) {
                    *o = s * scratch.basis[ch.basis_slot];
                }
            }
            Layout::Zonal { design, degree_weights } => {
                let lmax = degree_weights.len() - 1;
                scratch.legendre.resize(lmax + 1, 0.0);
                for (o, center) in out.iter_mut().zip(design.points()) {
                    let dot: f64 = center.iter().zip(u.iter()).map(|(a, b)| a * b).sum();
                    legendre_all(self.dim, lmax, dot.clamp(-1.0, 1.0), &mut scratch.legendre);
                    *o = degree_weights.iter().zip(&scratch.legendre).map(|(w, p)| w * p).sum();
                }
            }
        }
    }
}

/// Reusable buffers for [`MultiplierBank::eval_into`].
#[derive(Debug, Default, Clone)]
pub struct Scratch {
    unit: Vec<f64>,
    basis: Vec<f64>,
    legendre: Vec<f64>,
}

/// Deterministic, roughly uniform sample of `count` points on `S^{d-1}`:
/// an offset equiangular grid for `d = 2`, a Fibonacci lattice for `d = 3`,
/// and seeded Gaussian directions otherwise.
pub fn sphere_samples(d: usize, count: usize) -> Vec<Vec<f64>> {
    match d {
        2 => (0..count)
            .map(|k| {
                let t = 2.0 * PI * (k as f64 + 0.5) / count as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        3 => {
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let phi = golden * k as f64;
                    vec![r * phi.cos(), r * phi.sin(), z]
                })
                .collect()
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
            (0..count)
                .map(|_| {
                    let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
                    let n = v.iter().map(|x: &f64| x * x).sum::<f64>().sqrt();
                    v.iter().map(|x| x / n).collect()
                })
                .collect()
        }
    }
}

/// Maximum of `|Σ_n m_n(ω)² − 1|` over [`sphere_samples`].
pub fn verify_partition(bank: &MultiplierBank, samples: usize) -> f64 {
    partition_defect(bank, &sphere_samples(bank.dim(), samples.max(1)))
}

/// Maximum of `|Σ_n m_n(ω)² − 1|` over the given points.
pub fn partition_defect(bank: &MultiplierBank, points: &[Vec<f64>]) -> f64 {
    let mut scratch = Scratch::default();
    let mut values = vec![0.0; bank.len()];
    points
        .iter()
        .map(|p| {
            bank.eval_into(p, &mut scratch, &mut values);
            (values.iter().map(|v| v * v).sum::<f64>() - 1.0).abs()
        })
        .fold(0.0, f64::max)
}

/// Samples the zonal kernel `Λ(cos θ) = Σ_ℓ c_ℓ √(N(d,ℓ)/n_max) P_ℓ(d; cos θ)`.
pub fn kernel_profile(coeffs: &AngularCoeffs, n_max: usize, thetas: &[f64]) -> Vec<(f64, f64)> {
    let d = coeffs.dim();
    let weights: Vec<f64> = coeffs
        .values()
        .iter()
        .enumerate()
        .map(|(l, c)| c * (dim_harmonics(d, l).expect("valid dimension") as f64 / n_max as f64).sqrt())
        .collect();
    thetas
        .iter()
        .map(|&t| {
            let x = t.cos();
            let v = weights
                .iter()
                .enumerate()
                .map(|(l, w)| w * legendre_unchecked(d, l, x))
                .sum();
            (t, v)
        })
        .collect()
}

/// Samples the steering kernel `Λ_lmax(cos θ) = Σ_ℓ (N(d,ℓ)/n_max) P_ℓ(d; cos θ)`,
/// whose values at `Rω_{n1}·ω_{n2}` are the zonal steering matrix entries.
pub fn steering_kernel_profile(d: usize, lmax: usize, n_max: usize, thetas: &[f64]) -> Vec<(f64, f64)> {
    thetas
        .iter()
        .map(|&t| (t, projection_kernel(d, lmax, n_max, t.cos())))
        .collect()
}

/// `count` equispaced angles covering `[0, π]`.
pub fn theta_grid(count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..count).map(|i| PI * i as f64 / (count - 1) as f64).collect(),
    }
}

/// Writes `theta,lambda` CSV rows at 17 significant digits with LF endings.
pub fn write_profile_csv(rows: &[(f64, f64)], mut out: impl Write) -> std::io::Result<()> {
    out.write_all(b"theta,lambda\n")?;
    for (t, v) in rows {
        writeln!(out, "{t:.16e},{v:.16e}")?;
    }
    Ok(())
}
