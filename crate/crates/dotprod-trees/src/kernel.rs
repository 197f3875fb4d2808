//! Window kernels `rho_eps(u)` applied to dot-product gaps, and the
//! per-edge gap specification (targets + width + kernel).
//!
//! All kernels are even and supported on the open window `|u| < eps`.
//! The raw variants have peak height 1 (an indicator-style membership
//! test); the normalized variants integrate to 1 so that counts carry
//! the `eps^-1`-per-edge mollifier convention.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GapError {
    #[error("epsilon must be positive, got {0}")]
    NonPositiveEpsilon(f64),
    #[error("unknown kernel '{0}' (expected indicator, triangle, or smooth-bump)")]
    UnknownKernel(String),
    #[error("edge ({0}, {1}) has no dot-product target")]
    MissingTarget(usize, usize),
    #[error("normalized kernel integrates to {integral}, expected 1 within 1e-9")]
    BadNormalization { integral: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    Indicator,
    Triangle,
    SmoothBump,
}

impl FromStr for KernelKind {
    type Err = GapError;

    fn from_str(s: &str) -> Result<Self, GapError> {
        match s {
            "indicator" => Ok(KernelKind::Indicator),
            "triangle" => Ok(KernelKind::Triangle),
            "smooth-bump" => Ok(KernelKind::SmoothBump),
            other => Err(GapError::UnknownKernel(other.to_string())),
        }
    }
}

/// `integral of exp(-1/(1-v^2)) over [-1, 1]`, computed once by midpoint
/// quadrature. The integrand is smooth with all derivatives vanishing at
/// the endpoints, so the rule converges far below 1e-12 here.
fn bump_mass() -> f64 {
    use std::sync::OnceLock;
    static MASS: OnceLock<f64> = OnceLock::new();
    *MASS.get_or_init(|| {
        let n = 1 << 20;
        let h = 2.0 / n as f64;
        let mut sum = 0.0;
        for i in 0..n {
            let v: f64 = -1.0 + (i as f64 + 0.5) * h;
            sum += (-1.0 / (1.0 - v * v)).exp();
        }
        sum * h
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    pub kind: KernelKind,
    pub normalized: bool,
}

impl Kernel {
    pub const fn raw_indicator() -> Self {
        Kernel {
            kind: KernelKind::Indicator,
            normalized: false,
        }
    }

    pub const fn normalized_triangle() -> Self {
        Kernel {
            kind: KernelKind::Triangle,
            normalized: true,
        }
    }

    /// Evaluates the kernel at gap `u` with window half-width `epsilon`.
    /// The window is open: `|u| = epsilon` gives 0 for every kind.
    pub fn eval(&self, epsilon: f64, u: f64) -> f64 {
        debug_assert!(epsilon > 0.0);
        let a = u.abs();
        if a >= epsilon {
            return 0.0;
        }
        match (self.kind, self.normalized) {
            (KernelKind::Indicator, false) => 1.0,
            (KernelKind::Indicator, true) => 0.5 / epsilon,
            (KernelKind::Triangle, false) => 1.0 - a / epsilon,
            (KernelKind::Triangle, true) => (1.0 - a / epsilon) / epsilon,
            (KernelKind::SmoothBump, normalized) => {
                let v = u / epsilon;
                let g = (-1.0 / (1.0 - v * v)).exp();
                if normalized {
                    g / (epsilon * bump_mass())
                } else {
                    g * std::f64::consts::E // peak height 1 at u = 0
                }
            }
        }
    }

    /// Midpoint quadrature of the kernel over its support.
    pub fn integral(&self, epsilon: f64) -> f64 {
        let n = 1 << 16;
        let h = 2.0 * epsilon / n as f64;
        let mut sum = 0.0;
        for i in 0..n {
            let u = -epsilon + (i as f64 + 0.5) * h;
            sum += self.eval(epsilon, u);
        }
        sum * h
    }
}

/// Per-edge dot-product targets: one scalar applied to every edge, or an
/// explicit map keyed by the normalized `(min, max)` edge.
#[derive(Debug, Clone, PartialEq)]
pub enum EdgeTargets {
    Scalar(f64),
    PerEdge(BTreeMap<(usize, usize), f64>),
}

impl EdgeTargets {
    pub fn get(&self, a: usize, b: usize) -> Option<f64> {
        match self {
            EdgeTargets::Scalar(t) => Some(*t),
            EdgeTargets::PerEdge(map) => {
                let key = if a < b { (a, b) } else { (b, a) };
                map.get(&key).copied()
            }
        }
    }
}

/// Gap specification for a counting run: targets, window half-width,
/// and kernel. Construction checks that a normalized kernel integrates
/// to 1 within 1e-9.
#[derive(Debug, Clone, PartialEq)]
pub struct GapSpec {
    pub targets: EdgeTargets,
    pub epsilon: f64,
    pub kernel: Kernel,
}

impl GapSpec {
    pub fn new(targets: EdgeTargets, epsilon: f64, kernel: Kernel) -> Result<Self, GapError> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(GapError::NonPositiveEpsilon(epsilon));
        }
        if kernel.normalized {
            let integral = kernel.integral(epsilon);
            if (integral - 1.0).abs() > 1e-9 {
                return Err(GapError::BadNormalization { integral });
            }
        }
        Ok(GapSpec {
            targets,
            epsilon,
            kernel,
        })
    }

    /// Scalar target on every edge, raw indicator kernel.
    pub fn scalar_indicator(t: f64, epsilon: f64) -> Result<Self, GapError> {
        GapSpec::new(EdgeTargets::Scalar(t), epsilon, Kernel::raw_indicator())
    }

    pub fn target_for(&self, a: usize, b: usize) -> Result<f64, GapError> {
        self.targets.get(a, b).ok_or(GapError::MissingTarget(
            a.min(b),
            a.max(b),
        ))
    }

    /// Checks that every edge of `tree` has a target.
    pub fn validate_for(&self, tree: &crate::tree::Tree) -> Result<(), GapError> {
        for &(a, b) in tree.edges() {
            self.target_for(a, b)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indicator_window_is_open() {
        let k = Kernel::raw_indicator();
        assert_eq!(k.eval(0.1, 0.05), 1.0);
        assert_eq!(k.eval(0.1, 0.1), 0.0);
        assert_eq!(k.eval(0.1, -0.1), 0.0);
        assert_eq!(k.eval(0.1, 0.0999), 1.0);
    }

    #[test]
    fn triangle_peak_height() {
        let k = Kernel::normalized_triangle();
        assert!((k.eval(0.2, 0.0) - 5.0).abs() < 1e-15);
        assert_eq!(k.eval(0.2, 0.2), 0.0);
    }

    #[test]
    fn kernels_are_even() {
        for kind in [KernelKind::Indicator, KernelKind::Triangle, KernelKind::SmoothBump] {
            for normalized in [false, true] {
                let k = Kernel { kind, normalized };
                for u in [0.0, 0.01, 0.049, 0.07] {
                    assert_eq!(k.eval(0.08, u), k.eval(0.08, -u), "{kind:?}");
                }
            }
        }
    }

    #[test]
    fn normalized_kernels_integrate_to_one() {
        for kind in [KernelKind::Indicator, KernelKind::Triangle, KernelKind::SmoothBump] {
            for eps in [0.01, 0.3, 2.0] {
                let k = Kernel {
                    kind,
                    normalized: true,
                };
                let integral = k.integral(eps);
                assert!(
                    (integral - 1.0).abs() <= 1e-9,
                    "{kind:?} eps={eps}: {integral}"
                );
                assert!(GapSpec::new(EdgeTargets::Scalar(0.0), eps, k).is_ok());
            }
        }
    }

    #[test]
    fn raw_bump_peaks_at_one() {
        let k = Kernel {
            kind: KernelKind::SmoothBump,
            normalized: false,
        };
        assert!((k.eval(0.5, 0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gap_spec_rejects_bad_epsilon_and_missing_target() {
        assert!(matches!(
            GapSpec::scalar_indicator(0.0, 0.0),
            Err(GapError::NonPositiveEpsilon(_))
        ));
        let mut map = BTreeMap::new();
        map.insert((0usize, 1usize), 0.5);
        let spec = GapSpec::new(EdgeTargets::PerEdge(map), 0.1, Kernel::raw_indicator()).unwrap();
        let tree = crate::tree::Tree::path(2);
        assert!(matches!(
            spec.validate_for(&tree),
            Err(GapError::MissingTarget(1, 2))
        ));
        assert_eq!(spec.target_for(1, 0).unwrap(), 0.5);
    }

    #[test]
    fn unknown_kernel_name() {
        assert!(matches!(
            "gaussian".parse::<KernelKind>(),
            Err(GapError::UnknownKernel(_))
        ));
        assert_eq!(
            "smooth-bump".parse::<KernelKind>().unwrap(),
            KernelKind::SmoothBump
        );
    }
}
