//! Special functions on the sphere: harmonic-space dimensions, sphere area,
//! generalized Legendre polynomials, explicit real spherical-harmonic bases
//! for `d = 2, 3`, and the spatial radial profile of a harmonic wavelet.

mod bessel;

use std::f64::consts::PI;

pub use bessel::bessel_j;

use crate::error::{Error, Result};
use crate::quadrature::integrate_adaptive;

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::Domain(format!("dimension d = {d} must be at least 2")));
    }
    Ok(())
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

/// Dimension `N(d, ℓ)` of the space of spherical harmonics of degree `ℓ` on
/// the sphere in `R^d`.
pub fn dim_harmonics(d: usize, l: usize) -> Result<usize> {
    check_dim(d)?;
    let (d, l) = (d as u128, l as u128);
    let lead = binomial(d + l - 1, l);
    let tail = if l >= 2 { binomial(d + l - 3, l - 2) } else { 0 };
    usize::try_from(lead - tail).map_err(|_| Error::Domain("harmonic dimension overflows usize".into()))
}

/// Dimension of the harmonics of degree at most `lmax`, i.e. `N(d + 1, lmax)`.
pub fn dim_harmonics_upto(d: usize, lmax: usize) -> Result<usize> {
    check_dim(d)?;
    dim_harmonics(d + 1, lmax)
}

/// `Γ(k/2)` for `k ≥ 1`.
pub(crate) fn gamma_half(k: usize) -> f64 {
    assert!(k >= 1, "Gamma(0) is undefined");
    let mut value = if k.is_multiple_of(2) { 1.0 } else { PI.sqrt() };
    let mut j = if k.is_multiple_of(2) { 2 } else { 1 };
    while j < k {
        value *= j as f64 / 2.0;
        j += 2;
    }
    value
}

/// Surface area `σ(S^{d-1}) = 2π^{d/2} / Γ(d/2)`.
pub fn sphere_area(d: usize) -> Result<f64> {
    check_dim(d)?;
    Ok(2.0 * PI.powf(d as f64 / 2.0) / gamma_half(d))
}

/// Generalized Legendre polynomial `P_ℓ(d; x)`, normalized so that
/// `P_ℓ(d; 1) = 1`.
///
/// Uses the recurrence
/// `(ℓ + d − 2) P_{ℓ+1} = (2ℓ + d − 2) x P_ℓ − ℓ P_{ℓ−1}`.
/// Arguments within `1e-12` outside `[-1, 1]` are clamped.
pub fn legendre(d: usize, l: usize, x: f64) -> Result<f64> {
    check_dim(d)?;
    if !(x.abs() <= 1.0 + 1e-12) {
        return Err(Error::Domain(format!("Legendre argument {x} outside [-1, 1]")));
    }
    Ok(legendre_unchecked(d, l, x.clamp(-1.0, 1.0)))
}

/// `legendre` without argument validation, for hot loops that already
/// guarantee `d ≥ 2` and `|x| ≤ 1`.
pub(crate) fn legendre_unchecked(d: usize, l: usize, x: f64) -> f64 {
    if l == 0 {
        return 1.0;
    }
    let shift = d as f64 - 2.0;
    let mut prev = 1.0;
    let mut cur = x;
    for k in 1..l {
        let kf = k as f64;
        let next = ((2.0 * kf + shift) * x * cur - kf * prev) / (kf + shift);
        prev = cur;
        cur = next;
    }
    cur
}

/// All of `P_0(d; x), …, P_lmax(d; x)`.
pub(crate) fn legendre_all(d: usize, lmax: usize, x: f64, out: &mut [f64]) {
    let shift = d as f64 - 2.0;
    out[0] = 1.0;
    if lmax == 0 {
        return;
    }
    out[1] = x;
    for k in 1..lmax {
        let kf = k as f64;
        out[k + 1] = ((2.0 * kf + shift) * x * out[k] - kf * out[k - 1]) / (kf + shift);
    }
}

fn unit(point: &[f64]) -> Result<Vec<f64>> {
    let norm = point.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::Domain("cannot evaluate harmonics at the zero vector".into()));
    }
    Ok(point.iter().map(|v| v / norm).collect())
}

/// Values `[Y_{ℓ,1}(p), …, Y_{ℓ,N(d,ℓ)}(p)]` of the real orthonormal basis of
/// degree-`ℓ` harmonics at `point` (renormalized to unit length).
///
/// For `d = 2` the basis is `1/√(2π)` at `ℓ = 0` and
/// `(cos ℓθ/√π, sin ℓθ/√π)` above. For `d = 3` it is the real spherical
/// harmonics ordered by `m = −ℓ, …, ℓ`, where `m < 0` carries `sin(|m|φ)`,
/// `m > 0` carries `cos(mφ)`, and the Condon–Shortley phase is omitted.
pub fn sph_basis_eval(d: usize, l: usize, point: &[f64]) -> Result<Vec<f64>> {
    let all = real_harmonics_upto(d, l, point)?;
    let start = dim_harmonics_upto(d, l)? - dim_harmonics(d, l)?;
    Ok(all[start..].to_vec())
}

/// Real orthonormal harmonics of every degree `0..=lmax` at `point`,
/// concatenated degree by degree (length `N(d + 1, lmax)`).
pub fn real_harmonics_upto(d: usize, lmax: usize, point: &[f64]) -> Result<Vec<f64>> {
    if d != 2 && d != 3 {
        return Err(Error::UnsupportedDimension(d));
    }
    if point.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: point.len(),
        });
    }
    let p = unit(point)?;
    let mut out = vec![0.0; dim_harmonics_upto(d, lmax)?];
    if d == 2 {
        circular_harmonics(p[1].atan2(p[0]), lmax, &mut out);
    } else {
        spherical_harmonics(&p, lmax, &mut out);
    }
    Ok(out)
}

pub(crate) fn circular_harmonics(theta: f64, lmax: usize, out: &mut [f64]) {
    let inv_sqrt_pi = 1.0 / PI.sqrt();
    out[0] = 1.0 / (2.0 * PI).sqrt();
    for l in 1..=lmax {
        let (s, c) = (l as f64 * theta).sin_cos();
        out[2 * l - 1] = c * inv_sqrt_pi;
        out[2 * l] = s * inv_sqrt_pi;
    }
}

/// Real spherical harmonics up to `lmax` at the unit vector `p`, using the
/// fully normalized associated Legendre recurrences.
#[allow(clippy::needless_range_loop)]
pub(crate) fn spherical_harmonics(p: &[f64], lmax: usize, out: &mut [f64]) {
    let z = p[2].clamp(-1.0, 1.0);
    let s = (p[0] * p[0] + p[1] * p[1]).sqrt();
    let phi = p[1].atan2(p[0]);
    // plm[l][m] = sqrt((2l+1)/4π · (l−m)!/(l+m)!) P_l^m(z), without (−1)^m.
    let mut plm = vec![vec![0.0; lmax + 1]; lmax + 1];
    plm[0][0] = (1.0 / (4.0 * PI)).sqrt();
    for m in 1..=lmax {
        let mf = m as f64;
        plm[m][m] = ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s * plm[m - 1][m - 1];
    }
    for m in 0..lmax {
        plm[m + 1][m] = (2.0 * m as f64 + 3.0).sqrt() * z * plm[m][m];
    }
    for m in 0..=lmax {
        let mf = m as f64;
        for l in (m + 2)..=lmax {
            let lf = l as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
            plm[l][m] = a * (z * plm[l - 1][m] - b * plm[l - 2][m]);
        }
    }
    let sqrt2 = std::f64::consts::SQRT_2;
    for l in 0..=lmax {
        let base = l * l; // N(4, l − 1) = l²
        out[base + l] = plm[l][0];
        for m in 1..=l {
            let (sm, cm) = (m as f64 * phi).sin_cos();
            out[base + l + m] = sqrt2 * plm[l][m] * cm;
            out[base + l - m] = sqrt2 * plm[l][m] * sm;
        }
    }
}

/// Spatial radial factor of a harmonic wavelet whose Fourier transform is
/// `h(|ω|) P(ω)/|ω|^ℓ` with `P` a degree-`ℓ` harmonic polynomial: the wavelet
/// is `ψ(x) = i^ℓ F(|x|) P(x)` and this returns the real factor
///
/// `F(r) = 2π r^{−ν} ∫_0^{1/2} h(s) J_ν(2π r s) s^{d/2} ds`, `ν = (d + 2ℓ − 2)/2`.
///
/// The phase `i^ℓ` is left to the caller (see [`spatial_phase_power`]).
/// `h` must vanish outside `[0, 1/2]`; `knots` lists interior points where
/// `h` is not smooth so the adaptive rule can split there.
pub fn radial_profile_spatial(h: impl Fn(f64) -> f64, knots: &[f64], d: usize, l: usize, r: f64) -> Result<f64> {
    check_dim(d)?;
    if !(r > 0.0) {
        return Err(Error::Domain(format!("radius {r} must be positive")));
    }
    let nu = (d + 2 * l - 2) as f64 / 2.0;
    let half_d = d as f64 / 2.0;
    let mut breaks = vec![0.0];
    breaks.extend(knots.iter().copied().filter(|&k| k > 0.0 && k < 0.5));
    breaks.push(0.5);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    // Split further so each piece spans at most a few Bessel oscillations.
    let pieces = (2.0 * r).ceil().max(1.0) as usize;
    let mut refined = Vec::with_capacity(breaks.len() * pieces);
    for w in breaks.windows(2) {
        for i in 0..pieces {
            refined.push(w[0] + (w[1] - w[0]) * i as f64 / pieces as f64);
        }
    }
    refined.push(0.5);

    let failure = std::cell::Cell::new(None);
    let integral = integrate_adaptive(
        |s| {
            let hs = h(s);
            if hs == 0.0 {
                return 0.0;
            }
            match bessel_j(nu, 2.0 * PI * r * s) {
                Ok(j) => hs * j * s.powf(half_d),
                Err(e) => {
                    failure.set(Some(e));
                    f64::NAN
                }
            }
        },
        &refined,
        1e-15,
        1e-10,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let integral = integral?;
    Ok(2.0 * PI * r.powf(-nu) * integral)
}

/// Power `k = ℓ mod 4` of the phase `i^k` that [`radial_profile_spatial`]
/// factors out; even degrees give real wavelets, odd degrees imaginary ones.
pub fn spatial_phase_power(l: usize) -> u32 {
    (l % 4) as u32
}
