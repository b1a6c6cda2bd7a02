use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

/// Radial window family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RadialKind {
    /// Log-cosine bump, continuous but with kinks at the band edges.
    SimoncelliLogcos,
    /// Same bands, transitions reshaped by `ν(t) = t⁴(35 − 84t + 70t² − 20t³)`.
    MeyerSmooth,
}

impl RadialKind {
    pub fn name(&self) -> &'static str {
        match self {
            RadialKind::SimoncelliLogcos => "simoncelli-logcos",
            RadialKind::MeyerSmooth => "meyer-smooth",
        }
    }
}

impl std::fmt::Display for RadialKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for RadialKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "simoncelli-logcos" | "simoncelli" => Ok(RadialKind::SimoncelliLogcos),
            "meyer-smooth" | "meyer" => Ok(RadialKind::MeyerSmooth),
            other => Err(crate::Error::InvalidArgument(format!(
                "unknown radial profile `{other}`"
            ))),
        }
    }
}

/// Mother-wavelet radial window `h` on `[0, ∞)`, supported in `(1/8, 1/2]`
/// with `Σ_j |h(2^j ω)|² = 1` for `ω ∈ (0, 1/2]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RadialProfile {
    kind: RadialKind,
}

pub fn make_radial(kind: RadialKind) -> RadialProfile {
    RadialProfile { kind }
}

fn meyer_nu(t: f64) -> f64 {
    t.powi(4) * (35.0 - 84.0 * t + 70.0 * t * t - 20.0 * t * t * t)
}

impl RadialProfile {
    pub fn kind(&self) -> RadialKind {
        self.kind
    }

    /// Points where `h` is not smooth (band edges).
    pub fn knots(&self) -> [f64; 3] {
        [0.125, 0.25, 0.5]
    }

    pub fn eval(&self, w: f64) -> f64 {
        let warp = |t: f64| match self.kind {
            RadialKind::SimoncelliLogcos => t,
            RadialKind::MeyerSmooth => meyer_nu(t),
        };
        if w > 0.125 && w <= 0.25 {
            (FRAC_PI_2 * warp((8.0 * w).log2())).sin()
        } else if w > 0.25 && w <= 0.5 {
            (FRAC_PI_2 * warp((4.0 * w).log2())).cos()
        } else {
            0.0
        }
    }

    /// `Σ_{j ∈ Z} |h(2^j ω)|²`, summing the finitely many nonzero terms.
    pub fn dyadic_sum(&self, w: f64) -> f64 {
        if !(w > 0.0) || !w.is_finite() {
            return 0.0;
        }
        // Nonzero terms need 2^j ω ∈ (1/8, 1/2].
        let lo = (0.125 / w).log2().floor() as i32 - 1;
        let hi = (0.5 / w).log2().ceil() as i32 + 1;
        (lo..=hi).map(|j| self.eval(2f64.powi(j) * w).powi(2)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn simoncelli_values() {
        let h = make_radial(RadialKind::SimoncelliLogcos);
        assert!((h.eval(0.25) - 1.0).abs() < 1e-15);
        assert!(h.eval(0.5).abs() < 1e-15);
        assert_eq!(h.eval(0.125), 0.0);
        assert_eq!(h.eval(0.6), 0.0);
        assert_eq!(h.eval(0.0), 0.0);
    }

    #[test]
    fn neighbouring_bands_telescope() {
        for kind in [RadialKind::SimoncelliLogcos, RadialKind::MeyerSmooth] {
            let h = make_radial(kind);
            for i in 1..=10_000 {
                let w = 0.125 + 0.125 * i as f64 / 10_000.0;
                let s = h.eval(w).powi(2) + h.eval(2.0 * w).powi(2);
                assert!((s - 1.0).abs() < 1e-14, "{kind:?} at {w}: {s}");
            }
        }
    }

    #[test]
    fn dyadic_sum_on_log_grid() {
        for kind in [RadialKind::SimoncelliLogcos, RadialKind::MeyerSmooth] {
            let h = make_radial(kind);
            for i in 0..=20_000 {
                let w = 0.5 * 2f64.powf(-20.0 * i as f64 / 20_000.0);
                assert!((h.dyadic_sum(w) - 1.0).abs() < 1e-12, "{kind:?} at {w}");
            }
        }
    }

    #[test]
    fn meyer_transition() {
        assert_eq!(meyer_nu(0.0), 0.0);
        assert_eq!(meyer_nu(1.0), 1.0);
        for i in 0..=100 {
            let t = i as f64 / 100.0;
            assert!((meyer_nu(t) + meyer_nu(1.0 - t) - 1.0).abs() < 1e-13);
        }
    }

    proptest! {
        #[test]
        fn bounded_and_supported(w in 0.0f64..4.0) {
            for kind in [RadialKind::SimoncelliLogcos, RadialKind::MeyerSmooth] {
                let v = make_radial(kind).eval(w);
                prop_assert!((0.0..=1.0 + 1e-15).contains(&v));
                if w > 0.5 || w <= 0.125 {
                    prop_assert_eq!(v, 0.0);
                }
            }
        }
    }
}
