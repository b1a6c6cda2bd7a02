//! Optimal angular localization: the energy `E(P_c; W)` of a zonal
//! polynomial `P_c = Σ c_ℓ P̃_ℓ` reduces to the quadratic form `cᵀ A c`,
//! where `A` is the `W`-weighted Gram matrix of the normalized Legendre
//! polynomials. Extremal unit vectors `c` are extreme eigenvectors of `A`.

use nalgebra::{DMatrix, SymmetricEigen};

use super::AngularCoeffs;
use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;
use crate::sphmath::{dim_harmonics, gamma_half, legendre_all};

/// Starting Gauss–Legendre rule size for Gram assembly.
pub const GRAM_NODES: usize = 512;
/// Successive Gram estimates must agree to this before assembly stops.
pub const GRAM_TOLERANCE: f64 = 1e-11;
const GRAM_MAX_NODES: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// The quadratic form of the energy functional in the basis of
/// Legendre polynomials normalized to unit mean square on the sphere.
#[derive(Debug, Clone)]
pub struct EnergyProblem {
    dim: usize,
    lmax: usize,
    gram: DMatrix<f64>,
    nodes: usize,
}

impl EnergyProblem {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    /// Quadrature size at which assembly converged.
    pub fn nodes(&self) -> usize {
        self.nodes
    }

    /// `cᵀ A c`.
    pub fn energy(&self, c: &[f64]) -> f64 {
        let v = nalgebra::DVector::from_column_slice(c);
        (v.transpose() * &self.gram * &v)[(0, 0)]
    }
}

fn gram_with(d: usize, lmax: usize, nodes: usize, weight: &impl Fn(f64) -> f64) -> Result<DMatrix<f64>> {
    let (x, w) = gauss_legendre(nodes);
    let kappa = gamma_half(d) / (std::f64::consts::PI.sqrt() * gamma_half(d - 1));
    let norms: Vec<f64> = (0..=lmax)
        .map(|l| (dim_harmonics(d, l).expect("d >= 2") as f64).sqrt())
        .collect();
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut p = vec![0.0; lmax + 1];
    let mut gram = DMatrix::zeros(lmax + 1, lmax + 1);
    for (&xi, &wi) in x.iter().zip(&w) {
        let theta = half_pi * (xi + 1.0);
        let t = theta.cos();
        let wt = weight(t);
        if !(wt > 0.0) {
            return Err(Error::NonPositiveWeight(t));
        }
        legendre_all(d, lmax, t, &mut p);
        let measure = kappa * half_pi * wi * wt * theta.sin().powi(d as i32 - 2);
        for a in 0..=lmax {
            let pa = norms[a] * p[a] * measure;
            for b in a..=lmax {
                gram[(a, b)] += pa * norms[b] * p[b];
            }
        }
    }
    for a in 0..=lmax {
        for b in 0..a {
            gram[(a, b)] = gram[(b, a)];
        }
    }
    Ok(gram)
}

/// Assembles `A_{ℓℓ'} = κ ∫_0^π P̃_ℓ(cos θ) P̃_ℓ'(cos θ) W(cos θ) sin^{d−2}θ dθ`
/// with `κ = Γ(d/2)/(√π Γ((d−1)/2))` and `P̃_ℓ = √N(d,ℓ) P_ℓ(d; ·)`, so that
/// `W ≡ 1` gives the identity. The Gauss–Legendre rule in `θ` starts at
/// [`GRAM_NODES`] nodes and doubles until successive estimates agree to
/// [`GRAM_TOLERANCE`].
pub fn assemble_gram(d: usize, lmax: usize, weight: impl Fn(f64) -> f64) -> Result<EnergyProblem> {
    if d < 2 {
        return Err(Error::Domain(format!("dimension d = {d} must be at least 2")));
    }
    let mut nodes = GRAM_NODES;
    let mut gram = gram_with(d, lmax, nodes, &weight)?;
    loop {
        let next = gram_with(d, lmax, 2 * nodes, &weight)?;
        let change = (&next - &gram).amax();
        nodes *= 2;
        gram = next;
        if change <= GRAM_TOLERANCE {
            break;
        }
        if nodes >= GRAM_MAX_NODES {
            return Err(Error::Quadrature(format!(
                "Gram entries still moved by {change:.3e} at {nodes} nodes"
            )));
        }
    }
    Ok(EnergyProblem {
        dim: d,
        lmax,
        gram,
        nodes,
    })
}

/// Unit vector minimizing (or maximizing) the energy: an extreme eigenvector
/// of the Gram matrix.
///
/// Eigenvectors are normalized so their first non-negligible entry is
/// positive. When the extreme eigenvalue is degenerate, the returned vector
/// is the normalized projection of the first coordinate axis `e_i` that has
/// a non-zero component in the eigenspace; `W ≡ 1` therefore yields `e_0`.
pub fn optimal_coeffs(problem: &EnergyProblem, sense: Sense) -> Result<AngularCoeffs> {
    let n = problem.lmax + 1;
    let eig = SymmetricEigen::try_new(problem.gram.clone(), 1e-15, 10_000).ok_or(Error::EigenNonConvergence)?;
    let values = eig.eigenvalues.as_slice();
    let target = match sense {
        Sense::Minimize => values.iter().copied().fold(f64::INFINITY, f64::min),
        Sense::Maximize => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    };
    let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let cluster: Vec<usize> = (0..n).filter(|&i| (values[i] - target).abs() <= 1e-9 * scale).collect();

    let mut c = vec![0.0; n];
    if cluster.len() == 1 {
        c.copy_from_slice(eig.eigenvectors.column(cluster[0]).as_slice());
    } else {
        for axis in 0..n {
            let mut proj = vec![0.0; n];
            for &k in &cluster {
                let v = eig.eigenvectors.column(k);
                let coef = v[axis];
                proj.iter_mut().zip(v.iter()).for_each(|(p, vi)| *p += coef * vi);
            }
            let norm = proj.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 1e-8 {
                c = proj.iter().map(|v| v / norm).collect();
                break;
            }
        }
    }
    if let Some(first) = c.iter().copied().find(|v| v.abs() > 1e-12) {
        if first < 0.0 {
            c.iter_mut().for_each(|v| *v = -*v);
        }
    }
    let label = match sense {
        Sense::Minimize => "optimal-min",
        Sense::Maximize => "optimal-max",
    };
    AngularCoeffs::from_weights(problem.dim, c, label)
}
