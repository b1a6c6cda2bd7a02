//! Parsing of the `--rotation` argument.

use std::path::Path;

use anyhow::{bail, Context};
use steerwave::steering::Rotation;

fn parse_angle(text: &str) -> anyhow::Result<f64> {
    let angle: f64 = text
        .trim()
        .parse()
        .with_context(|| format!("`{text}` is not an angle"))?;
    if !angle.is_finite() {
        bail!("rotation angle must be finite");
    }
    Ok(angle)
}

/// Accepts `angle=A`, `axis=x,y,z;angle=A`, or the path of a CSV file
/// holding a `d×d` matrix one row per line.
pub fn parse_rotation(arg: &str, dim: usize) -> anyhow::Result<Rotation> {
    let arg = arg.trim();
    if let Some(rest) = arg.strip_prefix("angle=") {
        if dim != 2 {
            bail!("`angle=` describes a planar rotation but the pyramid has d = {dim}");
        }
        return Ok(Rotation::planar(parse_angle(rest)?));
    }
    if let Some(rest) = arg.strip_prefix("axis=") {
        if dim != 3 {
            bail!("`axis=` describes a rotation in 3-space but the pyramid has d = {dim}");
        }
        let (axis, angle) = rest.split_once(';').context("expected `axis=x,y,z;angle=A`")?;
        let angle = angle
            .trim()
            .strip_prefix("angle=")
            .context("expected `angle=` after the axis")?;
        let axis: Vec<f64> = axis
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .with_context(|| format!("`{v}` is not a number"))
            })
            .collect::<anyhow::Result<_>>()?;
        let axis: [f64; 3] = axis
            .try_into()
            .map_err(|_| anyhow::anyhow!("rotation axis needs three components"))?;
        return Ok(Rotation::axis_angle(axis, parse_angle(angle)?)?);
    }
    let path = Path::new(arg);
    let text = std::fs::read_to_string(path).with_context(|| format!("reading rotation file {}", path.display()))?;
    let mut entries = Vec::new();
    for line in text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
    {
        for v in line.split(',') {
            entries.push(
                v.trim()
                    .parse::<f64>()
                    .with_context(|| format!("`{v}` is not a number"))?,
            );
        }
    }
    Ok(Rotation::from_matrix(dim, entries)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planar_and_axis_forms() {
        let r = parse_rotation("angle=0.5", 2).unwrap();
        assert_eq!(r.matrix(), Rotation::planar(0.5).matrix());
        let r = parse_rotation("axis=0,0,1;angle=0.5", 3).unwrap();
        let m = r.matrix();
        assert!((m[0] - 0.5f64.cos()).abs() < 1e-15);
        assert!(parse_rotation("angle=0.5", 3).is_err());
        assert!(parse_rotation("axis=1,0;angle=1", 3).is_err());
    }

    #[test]
    fn matrix_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        std::fs::write(&path, "0,-1\n1,0\n").unwrap();
        let r = parse_rotation(path.to_str().unwrap(), 2).unwrap();
        assert_eq!(r.matrix(), &[0.0, -1.0, 1.0, 0.0]);
        std::fs::write(&path, "1,1\n0,1\n").unwrap();
        assert!(parse_rotation(path.to_str().unwrap(), 2).is_err());
    }
}
