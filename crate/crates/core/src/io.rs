//! On-disk formats.
//!
//! A tensor file is one line of JSON, `{"magic":"SWT1","dtype":"f64","shape":[..]}`,
//! a newline, then the row-major little-endian payload: 8 bytes per `f64`
//! sample, or 16 per `c128` sample stored as interleaved `re, im`.
//!
//! A pyramid is a directory holding `manifest.json`, one `band_j{j}_n{n}.swt`
//! per scale and channel, `lowpass.swt`, and for zonal banks the center
//! design as `design.txt`.

use std::fs;
use std::path::Path;

use ndarray::{ArrayD, IxDyn};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::angular::BankKind;
use crate::designs::{parse_design_text, DesignSource, SphericalDesign};
use crate::error::{Error, Result};
use crate::frame::{Manifest, Pyramid};

pub const MAGIC: &str = "SWT1";

/// Relative tolerance between stored and recomputed pyramid energy.
pub const ENERGY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    magic: String,
    dtype: String,
    shape: Vec<usize>,
}

/// Contents of a tensor file.
#[derive(Debug, Clone, PartialEq)]
pub enum Tensor {
    Real(ArrayD<f64>),
    Complex(ArrayD<Complex64>),
}

fn encode(dtype: &str, shape: &[usize], values: impl Iterator<Item = f64>, count: usize) -> Vec<u8> {
    let header = serde_json::to_string(&Header {
        magic: MAGIC.into(),
        dtype: dtype.into(),
        shape: shape.to_vec(),
    })
    .expect("header serializes");
    let mut out = Vec::with_capacity(header.len() + 1 + 8 * count);
    out.extend_from_slice(header.as_bytes());
    out.push(b'\n');
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn encode_real(a: &ArrayD<f64>) -> Vec<u8> {
    encode("f64", a.shape(), a.iter().copied(), a.len())
}

pub fn encode_complex(a: &ArrayD<Complex64>) -> Vec<u8> {
    encode("c128", a.shape(), a.iter().flat_map(|c| [c.re, c.im]), 2 * a.len())
}

pub fn decode(bytes: &[u8]) -> Result<Tensor> {
    let newline = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::Parse("tensor header is not terminated by a newline".into()))?;
    let header: Header =
        serde_json::from_slice(&bytes[..newline]).map_err(|e| Error::Parse(format!("bad tensor header: {e}")))?;
    if header.magic != MAGIC {
        return Err(Error::Parse(format!("bad magic `{}`", header.magic)));
    }
    let count = header
        .shape
        .iter()
        .try_fold(1usize, |acc, &n| acc.checked_mul(n))
        .ok_or_else(|| Error::Parse("tensor shape overflows".into()))?;
    let width = match header.dtype.as_str() {
        "f64" => 8,
        "c128" => 16,
        other => return Err(Error::Parse(format!("unsupported dtype `{other}`"))),
    };
    let payload = &bytes[newline + 1..];
    if Some(payload.len()) != count.checked_mul(width) {
        return Err(Error::Parse(format!(
            "payload has {} bytes, expected {width}·{count}",
            payload.len()
        )));
    }
    let floats: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    let shape = IxDyn(&header.shape);
    Ok(if width == 8 {
        Tensor::Real(ArrayD::from_shape_vec(shape, floats).expect("length checked"))
    } else {
        let data = floats.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect();
        Tensor::Complex(ArrayD::from_shape_vec(shape, data).expect("length checked"))
    })
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::file(path, e))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::file(path, e))
}

pub fn write_tensor(path: impl AsRef<Path>, a: &ArrayD<f64>) -> Result<()> {
    write_bytes(path.as_ref(), &encode_real(a))
}

pub fn write_complex_tensor(path: impl AsRef<Path>, a: &ArrayD<Complex64>) -> Result<()> {
    write_bytes(path.as_ref(), &encode_complex(a))
}

pub fn read_tensor(path: impl AsRef<Path>) -> Result<Tensor> {
    let path = path.as_ref();
    decode(&read_bytes(path)?).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Reads an `f64` tensor.
pub fn read_real_tensor(path: impl AsRef<Path>) -> Result<ArrayD<f64>> {
    match read_tensor(path.as_ref())? {
        Tensor::Real(a) => Ok(a),
        Tensor::Complex(_) => Err(Error::Parse(format!("{}: expected dtype f64", path.as_ref().display()))),
    }
}

/// Reads a `c128` tensor.
pub fn read_complex_tensor(path: impl AsRef<Path>) -> Result<ArrayD<Complex64>> {
    match read_tensor(path.as_ref())? {
        Tensor::Complex(a) => Ok(a),
        Tensor::Real(_) => Err(Error::Parse(format!(
            "{}: expected dtype c128",
            path.as_ref().display()
        ))),
    }
}

fn band_name(j: usize, n: usize) -> String {
    format!("band_j{j}_n{n}.swt")
}

/// Writes `pyramid` into directory `dir` (created if needed). Zonal
/// pyramids need their center design, which must match the manifest checksum.
pub fn write_pyramid(dir: impl AsRef<Path>, pyramid: &Pyramid, design: Option<&SphericalDesign>) -> Result<()> {
    let dir = dir.as_ref();
    let manifest = pyramid.manifest();
    if manifest.bank.kind == BankKind::Zonal {
        let design = design.ok_or_else(|| Error::BankKind("a zonal pyramid needs its design".into()))?;
        if manifest.bank.design_checksum.as_deref() != Some(design.checksum().as_str()) {
            return Err(Error::ManifestMismatch(
                "design checksum differs from the manifest".into(),
            ));
        }
    }
    fs::create_dir_all(dir).map_err(|e| Error::file(dir, e))?;
    let mut json = serde_json::to_string_pretty(manifest)?;
    json.push('\n');
    write_bytes(&dir.join("manifest.json"), json.as_bytes())?;
    for j in 0..pyramid.scales() {
        for n in 0..pyramid.channels() {
            write_complex_tensor(dir.join(band_name(j, n)), pyramid.band(j, n))?;
        }
    }
    write_complex_tensor(dir.join("lowpass.swt"), pyramid.lowpass())?;
    if let (BankKind::Zonal, Some(design)) = (manifest.bank.kind, design) {
        write_bytes(&dir.join("design.txt"), design.to_text().as_bytes())?;
    }
    Ok(())
}

/// Reads a pyramid directory and its design (zonal banks only).
///
/// Fails when the number of band files differs from `scales·channels` or
/// when the stored energy differs from the recomputed one by more than
/// [`ENERGY_TOLERANCE`] relative.
pub fn read_pyramid(dir: impl AsRef<Path>) -> Result<(Pyramid, Option<SphericalDesign>)> {
    let dir = dir.as_ref();
    let manifest_path = dir.join("manifest.json");
    let manifest: Manifest = serde_json::from_slice(&read_bytes(&manifest_path)?)
        .map_err(|e| Error::Parse(format!("{}: {e}", manifest_path.display())))?;

    let listing = fs::read_dir(dir).map_err(|e| Error::file(dir, e))?;
    let mut band_files = 0;
    for entry in listing {
        let name = entry.map_err(|e| Error::file(dir, e))?.file_name();
        let name = name.to_string_lossy();
        if name.starts_with("band_") && name.ends_with(".swt") {
            band_files += 1;
        }
    }
    let expected = manifest.scales * manifest.channels;
    if band_files != expected {
        return Err(Error::ManifestMismatch(format!(
            "manifest lists {expected} band arrays but the directory holds {band_files}"
        )));
    }

    let mut bands = Vec::with_capacity(expected);
    for j in 0..manifest.scales {
        for n in 0..manifest.channels {
            bands.push(read_complex_tensor(dir.join(band_name(j, n)))?);
        }
    }
    let lowpass = read_complex_tensor(dir.join("lowpass.swt"))?;
    let stored = manifest.energy;
    let pyramid = Pyramid::new(manifest, bands, lowpass)?;
    let recomputed = pyramid.energy();
    if !((stored - recomputed).abs() <= ENERGY_TOLERANCE * recomputed.abs().max(f64::MIN_POSITIVE)) {
        return Err(Error::ManifestMismatch(format!(
            "stored energy {stored:e} differs from recomputed {recomputed:e}"
        )));
    }

    let bank = &pyramid.manifest().bank;
    let design = match bank.kind {
        BankKind::Harmonic => None,
        BankKind::Zonal => {
            let path = dir.join("design.txt");
            let text = fs::read_to_string(&path).map_err(|e| Error::file(&path, e))?;
            let coords = parse_design_text(&text, bank.dim)?;
            let name = bank.design.clone().unwrap_or_else(|| path.display().to_string());
            let strength = bank.design_strength.unwrap_or(2 * bank.lmax);
            Some(SphericalDesign::from_points(
                bank.dim,
                coords,
                strength,
                DesignSource::Named(name),
            )?)
        }
    };
    Ok((pyramid, design))
}
