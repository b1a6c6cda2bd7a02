//! Spherical `t`-designs: built-in point sets, file ingestion, quadrature
//! exactness checks and characteristic (isometry) matrices.
//!
//! A design `X = {ω_n}` of strength `t` integrates every spherical harmonic
//! of degree `1..=t` to zero with equal weights `σ(S^{d-1})/n`.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::sphmath::{dim_harmonics, dim_harmonics_upto, legendre_unchecked, real_harmonics_upto, sphere_area};

/// Residual below which a degree counts as integrated exactly.
pub const DESIGN_TOLERANCE: f64 = 1e-10;

/// File points whose norm deviates from one by more than this are rejected.
pub const NORM_REJECT: f64 = 1e-6;

// Norm deviations below this are left untouched so save/load round trips
// stay byte-identical.
const NORM_KEEP: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DesignSource {
    Builtin(BuiltinDesign),
    File(PathBuf),
    Rotated(Box<DesignSource>),
    /// Restored from a stored name, e.g. a pyramid manifest.
    Named(String),
}

impl fmt::Display for DesignSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DesignSource::Builtin(b) => write!(f, "{b}"),
            DesignSource::File(p) => write!(f, "file:{}", p.display()),
            DesignSource::Rotated(inner) => write!(f, "rotated({inner})"),
            DesignSource::Named(name) => f.write_str(name),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinDesign {
    /// `n` equally spaced points on the circle.
    Equiangular(usize),
    Icosahedron,
    Dodecahedron,
    Octahedron,
    Cube,
}

impl fmt::Display for BuiltinDesign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BuiltinDesign::Equiangular(n) => write!(f, "equiangular:{n}"),
            BuiltinDesign::Icosahedron => f.write_str("icosahedron"),
            BuiltinDesign::Dodecahedron => f.write_str("dodecahedron"),
            BuiltinDesign::Octahedron => f.write_str("octahedron"),
            BuiltinDesign::Cube => f.write_str("cube"),
        }
    }
}

impl std::str::FromStr for BuiltinDesign {
    type Err = Error;

    /// Accepts `icosahedron`, `dodecahedron`, `octahedron`, `cube` and
    /// `equiangular:N` (also `equiangular(N)`).
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "icosahedron" => return Ok(BuiltinDesign::Icosahedron),
            "dodecahedron" => return Ok(BuiltinDesign::Dodecahedron),
            "octahedron" => return Ok(BuiltinDesign::Octahedron),
            "cube" => return Ok(BuiltinDesign::Cube),
            _ => {}
        }
        let count = lower
            .strip_prefix("equiangular")
            .map(|rest| rest.trim_matches(|c| c == ':' || c == '(' || c == ')'))
            .and_then(|n| n.parse::<usize>().ok())
            .filter(|&n| n >= 1);
        count
            .map(BuiltinDesign::Equiangular)
            .ok_or_else(|| Error::UnknownDesign(s.to_string()))
    }
}

impl BuiltinDesign {
    pub fn dim(&self) -> usize {
        match self {
            BuiltinDesign::Equiangular(_) => 2,
            _ => 3,
        }
    }

    /// Known design strength.
    pub fn strength(&self) -> usize {
        match self {
            BuiltinDesign::Equiangular(n) => n - 1,
            BuiltinDesign::Icosahedron | BuiltinDesign::Dodecahedron => 4,
            BuiltinDesign::Octahedron | BuiltinDesign::Cube => 3,
        }
    }

    fn points(&self) -> Vec<f64> {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let mut raw: Vec<[f64; 3]> = Vec::new();
        match *self {
            BuiltinDesign::Equiangular(n) => {
                return (0..n)
                    .flat_map(|k| {
                        let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                        [t.cos(), t.sin()]
                    })
                    .collect();
            }
            BuiltinDesign::Icosahedron => {
                for s1 in [1.0, -1.0] {
                    for s2 in [1.0, -1.0] {
                        cyclic(&mut raw, [0.0, s1, s2 * phi]);
                    }
                }
            }
            BuiltinDesign::Dodecahedron => {
                for s1 in [1.0, -1.0] {
                    for s2 in [1.0, -1.0] {
                        for s3 in [1.0, -1.0] {
                            raw.push([s1, s2, s3]);
                        }
                    }
                }
                for s1 in [1.0, -1.0] {
                    for s2 in [1.0, -1.0] {
                        cyclic(&mut raw, [0.0, s1 / phi, s2 * phi]);
                    }
                }
            }
            BuiltinDesign::Octahedron => {
                for axis in 0..3 {
                    for s in [1.0, -1.0] {
                        let mut p = [0.0; 3];
                        p[axis] = s;
                        raw.push(p);
                    }
                }
            }
            BuiltinDesign::Cube => {
                for s1 in [1.0, -1.0] {
                    for s2 in [1.0, -1.0] {
                        for s3 in [1.0, -1.0] {
                            raw.push([s1, s2, s3]);
                        }
                    }
                }
            }
        }
        raw.iter()
            .flat_map(|p| {
                let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
                [p[0] / n, p[1] / n, p[2] / n]
            })
            .collect()
    }
}

fn cyclic(out: &mut Vec<[f64; 3]>, p: [f64; 3]) {
    out.push([p[0], p[1], p[2]]);
    out.push([p[2], p[0], p[1]]);
    out.push([p[1], p[2], p[0]]);
}

/// A finite set of unit vectors on `S^{d-1}` with a (verified) design strength.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalDesign {
    dim: usize,
    coords: Vec<f64>,
    strength: usize,
    source: DesignSource,
}

impl SphericalDesign {
    /// Builds a design from raw coordinates, renormalizing points and
    /// verifying the claimed strength.
    pub fn from_points(dim: usize, coords: Vec<f64>, claimed_t: usize, source: DesignSource) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Domain(format!("dimension d = {dim} must be at least 2")));
        }
        if coords.is_empty() {
            return Err(Error::Parse("design has no points".into()));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: coords.len() % dim,
            });
        }
        let mut coords = coords;
        for (i, p) in coords.chunks_mut(dim).enumerate() {
            let norm = p.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !((norm - 1.0).abs() <= NORM_REJECT) {
                return Err(Error::Parse(format!(
                    "point {i} has norm {norm}, which deviates from 1 by more than {NORM_REJECT:e}"
                )));
            }
            if (norm - 1.0).abs() > NORM_KEEP {
                p.iter_mut().for_each(|v| *v /= norm);
            }
        }
        let design = SphericalDesign {
            dim,
            coords,
            strength: claimed_t,
            source,
        };
        let report = verify_design(&design, claimed_t);
        if let Some(err) = report.failure() {
            return Err(err);
        }
        Ok(design)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn strength(&self) -> usize {
        self.strength
    }

    pub fn source(&self) -> &DesignSource {
        &self.source
    }

    pub fn point(&self, n: usize) -> &[f64] {
        &self.coords[n * self.dim..(n + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks(self.dim)
    }

    /// The design `R X`, which has the same strength since rotations map
    /// harmonics of each degree onto themselves.
    pub fn rotated(&self, rotation: &crate::steering::Rotation) -> Result<Self> {
        if rotation.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: rotation.dim(),
            });
        }
        let coords = self.points().flat_map(|p| rotation.apply(p)).collect();
        Ok(SphericalDesign {
            dim: self.dim,
            coords,
            strength: self.strength,
            source: DesignSource::Rotated(Box::new(self.source.clone())),
        })
    }

    /// SHA-256 of the design's text serialization.
    pub fn checksum(&self) -> String {
        hex::encode(Sha256::digest(self.to_text().as_bytes()))
    }

    /// `n` lines of `d` coordinates at 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for p in self.points() {
            let line: Vec<String> = p.iter().map(|v| format!("{v:.16e}")).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| Error::file(path, e))
    }
}

/// Returns the named built-in design with its known strength.
pub fn builtin_design(which: BuiltinDesign) -> Result<SphericalDesign> {
    if let BuiltinDesign::Equiangular(0) = which {
        return Err(Error::InvalidArgument(
            "equiangular design needs at least one point".into(),
        ));
    }
    Ok(SphericalDesign {
        dim: which.dim(),
        coords: which.points(),
        strength: which.strength(),
        source: DesignSource::Builtin(which),
    })
}

/// Looks a built-in design up by name (see [`BuiltinDesign::from_str`]).
pub fn builtin_design_named(name: &str) -> Result<SphericalDesign> {
    builtin_design(name.parse()?)
}

/// Parses design text: either one point per line (`d` numbers each) or a
/// single stream of `n·d` numbers. Lines starting with `#` are ignored.
pub fn parse_design_text(text: &str, dim: usize) -> Result<Vec<f64>> {
    if dim < 2 {
        return Err(Error::Domain(format!("dimension d = {dim} must be at least 2")));
    }
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("line {}: `{t}` is not a number", lineno + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    let total: usize = rows.iter().map(Vec::len).sum();
    if total == 0 {
        return Err(Error::Parse("design file contains no coordinates".into()));
    }
    let per_line = rows.iter().all(|r| r.len() == dim);
    if !per_line && !total.is_multiple_of(dim) {
        let found = rows.iter().map(Vec::len).find(|&n| n != dim).unwrap_or(total);
        return Err(Error::DimensionMismatch { expected: dim, found });
    }
    Ok(rows.into_iter().flatten().collect())
}

/// Reads a design file and verifies the claimed strength before returning it.
pub fn load_design(path: impl AsRef<Path>, dim: usize, claimed_t: usize) -> Result<SphericalDesign> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
    let coords = parse_design_text(&text, dim)?;
    SphericalDesign::from_points(dim, coords, claimed_t, DesignSource::File(path.to_path_buf()))
}

/// Per-degree quadrature residuals of a design.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignReport {
    pub dim: usize,
    pub points: usize,
    pub requested: usize,
    /// `residuals[ℓ − 1]` is the residual for degree `ℓ`.
    pub residuals: Vec<f64>,
}

impl DesignReport {
    pub fn passed(&self) -> bool {
        self.residuals.iter().all(|&r| r < DESIGN_TOLERANCE)
    }

    /// Lowest degree whose residual exceeds the tolerance.
    pub fn first_failure(&self) -> Option<(usize, f64)> {
        self.residuals
            .iter()
            .enumerate()
            .find(|(_, &r)| !(r < DESIGN_TOLERANCE))
            .map(|(i, &r)| (i + 1, r))
    }

    pub fn worst(&self) -> Option<(usize, f64)> {
        self.residuals
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, &r)| (i + 1, r))
    }

    pub fn failure(&self) -> Option<Error> {
        let (degree, residual) = self.first_failure()?;
        let (worst_degree, worst_residual) = self.worst().unwrap_or((degree, residual));
        Some(Error::DesignVerification {
            degree,
            residual,
            worst_degree,
            worst_residual,
        })
    }
}

/// Checks quadrature exactness of `design` for degrees `1..=t`.
///
/// For `d ∈ {2, 3}` the residual of degree `ℓ` is the larger of the explicit
/// basis residual `max_k |(σ/n) Σ_n Y_{ℓ,k}(ω_n)|` and the zonal Gram
/// residual; other dimensions use the Gram residual alone. The Gram residual
/// is `|(N(d,ℓ)/n²) Σ_{n,n'} P_ℓ(d; ω_n·ω_{n'})|`, which by the addition
/// formula equals `Σ_k r_k² / σ` for the explicit residuals `r_k`: it needs
/// no basis but is quadratic in the defect.
pub fn verify_design(design: &SphericalDesign, t: usize) -> DesignReport {
    let d = design.dim;
    let n = design.len();
    let area = sphere_area(d).expect("design dimension is at least 2");
    let mut residuals = vec![0.0; t];

    if t > 0 && (d == 2 || d == 3) {
        let mut sums = vec![0.0; dim_harmonics_upto(d, t).expect("valid dimension")];
        for p in design.points() {
            let y = real_harmonics_upto(d, t, p).expect("dimension 2 or 3");
            sums.iter_mut().zip(&y).for_each(|(s, v)| *s += v);
        }
        let mut offset = 1;
        for l in 1..=t {
            let count = dim_harmonics(d, l).expect("valid dimension");
            residuals[l - 1] = sums[offset..offset + count]
                .iter()
                .map(|s| (area / n as f64 * s).abs())
                .fold(0.0, f64::max);
            offset += count;
        }
    }

    if t > 0 {
        let mut gram = vec![0.0; t + 1];
        let mut values = vec![0.0; t + 1];
        for a in design.points() {
            for b in design.points() {
                let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                crate::sphmath::legendre_all(d, t, dot.clamp(-1.0, 1.0), &mut values);
                gram.iter_mut().zip(&values).for_each(|(g, v)| *g += v);
            }
        }
        for l in 1..=t {
            let count = dim_harmonics(d, l).expect("valid dimension") as f64;
            let zonal = (count / (n * n) as f64 * gram[l]).abs();
            residuals[l - 1] = residuals[l - 1].max(zonal);
        }
    }

    DesignReport {
        dim: d,
        points: n,
        requested: t,
        residuals,
    }
}

/// `[U]_{n,m} = sqrt(σ/n_max) · Y_m(ω_n)`, columns ordered by degree then
/// basis index.
#[derive(Debug, Clone)]
pub struct CharacteristicMatrix {
    lmax: usize,
    entries: DMatrix<f64>,
    isometric: bool,
}

impl CharacteristicMatrix {
    pub fn lmax(&self) -> usize {
        self.lmax
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// Whether the design strength guarantees `UᵀU = I`.
    pub fn is_isometry_guaranteed(&self) -> bool {
        self.isometric
    }

    /// `max |UᵀU − I|`.
    pub fn isometry_defect(&self) -> f64 {
        let g = self.entries.transpose() * &self.entries;
        let mut worst = 0.0f64;
        for i in 0..g.nrows() {
            for j in 0..g.ncols() {
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - want).abs());
            }
        }
        worst
    }
}

/// A weighted quadrature rule on `S^{d-1}`, exact for polynomials of degree
/// at most `strength`. Designs are the equal-weight special case.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    dim: usize,
    coords: Vec<f64>,
    weights: Vec<f64>,
    strength: usize,
}

impl QuadratureRule {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn strength(&self) -> usize {
        self.strength
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks(self.dim)
    }
}

impl From<&SphericalDesign> for QuadratureRule {
    fn from(design: &SphericalDesign) -> Self {
        let w = sphere_area(design.dim).expect("valid dimension") / design.len() as f64;
        QuadratureRule {
            dim: design.dim,
            coords: design.coords.clone(),
            weights: vec![w; design.len()],
            strength: design.strength,
        }
    }
}

/// Product rule on `S^2`: Gauss–Legendre in `z` with `⌊t/2⌋ + 1` nodes times
/// `t + 1` equispaced azimuths, exact through degree `t`.
pub fn gauss_product_rule(strength: usize) -> QuadratureRule {
    let (z, wz) = crate::quadrature::gauss_legendre(strength / 2 + 1);
    let m = strength + 1;
    let dphi = 2.0 * std::f64::consts::PI / m as f64;
    let mut coords = Vec::with_capacity(3 * z.len() * m);
    let mut weights = Vec::with_capacity(z.len() * m);
    for (&zi, &wi) in z.iter().zip(&wz) {
        let r = (1.0 - zi * zi).sqrt();
        for k in 0..m {
            let (s, c) = (k as f64 * dphi).sin_cos();
            coords.extend_from_slice(&[r * c, r * s, zi]);
            weights.push(wi * dphi);
        }
    }
    QuadratureRule {
        dim: 3,
        coords,
        weights,
        strength,
    }
}

/// A rule of strength at least `t` on `S^{d-1}` for `d ∈ {2, 3}`:
/// `equiangular(t + 1)` on the circle, [`gauss_product_rule`] on the sphere.
pub fn quadrature_rule(d: usize, t: usize) -> Result<QuadratureRule> {
    match d {
        2 => Ok(QuadratureRule::from(&builtin_design(BuiltinDesign::Equiangular(
            t + 1,
        ))?)),
        3 => Ok(gauss_product_rule(t)),
        _ => Err(Error::UnsupportedDimension(d)),
    }
}

/// Builds the characteristic matrix of `design` for harmonics up to `lmax`.
/// Needs an explicit basis (`d ∈ {2, 3}`); when the design strength is below
/// `2·lmax` the matrix is still returned but a warning is logged and
/// [`CharacteristicMatrix::is_isometry_guaranteed`] is false.
pub fn characteristic_matrix(design: &SphericalDesign, lmax: usize) -> Result<CharacteristicMatrix> {
    let d = design.dim;
    if d != 2 && d != 3 {
        return Err(Error::UnsupportedDimension(d));
    }
    let cols = dim_harmonics_upto(d, lmax)?;
    let rows = design.len();
    let scale = (sphere_area(d)? / rows as f64).sqrt();
    let mut entries = DMatrix::zeros(rows, cols);
    for (n, p) in design.points().enumerate() {
        let y = real_harmonics_upto(d, lmax, p)?;
        for (m, v) in y.iter().enumerate() {
            entries[(n, m)] = scale * v;
        }
    }
    let isometric = design.strength >= 2 * lmax;
    if !isometric {
        log::warn!(
            "design {} has strength {} < 2·{lmax}; the characteristic matrix need not be an isometry",
            design.source,
            design.strength
        );
    }
    Ok(CharacteristicMatrix {
        lmax,
        entries,
        isometric,
    })
}

/// Legendre sum `Σ_ℓ (N(d,ℓ)/n_max) P_ℓ(d; x)`, the kernel of `U Uᵀ`.
pub(crate) fn projection_kernel(d: usize, lmax: usize, n_max: usize, x: f64) -> f64 {
    (0..=lmax)
        .map(|l| dim_harmonics(d, l).expect("valid dimension") as f64 / n_max as f64 * legendre_unchecked(d, l, x))
        .sum()
}
