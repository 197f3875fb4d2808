//! Low-frequency Fourier mass of a weighted point cloud and its growth
//! exponent across dyadic frequency balls.
//!
//! The transform of `f` against the measure is evaluated directly,
//!
//! ```text
//! F(xi) = sum_m  w_m f(x_m) exp(-2 pi i x_m . xi),
//! ```
//!
//! and the mass at level `j` is the L2 norm of `F` over the ball
//! `|xi| <= 2^j`, integrated on a uniform grid. For an `s`-regular
//! measure the mass grows like `2^(j (d - s) / 2)`, so the fitted slope
//! of `log mass` against `j log 2` estimates `(d - s) / 2`.

use crate::measure::DiscreteMeasure;
use crate::numeric::ols_fit;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("frequency-ball integration supports dimension 1 or 2, got {0}")]
    DimensionTooHigh(usize),
    #[error("grid density {got} per unit frequency cannot resolve oscillations up to |x| = {max_norm}; need at least {need}")]
    GridTooCoarse { got: u32, need: u32, max_norm: f64 },
    #[error("f values length {got} does not match the cloud size {expected}")]
    LengthMismatch { got: usize, expected: usize },
    #[error("need at least {need} frequency levels, got {got}")]
    TooFewLevels { got: usize, need: usize },
    #[error("mass at level j={j} is not positive; nothing to fit")]
    NonPositiveMass { j: u32 },
}

/// Guards the frequency grid: the integrand oscillates at rate up to
/// `max |x|` per unit of `xi`, so the sampling density must be at least
/// twice that (and at least the stated minimum of 4 per unit).
fn check_grid(m: &DiscreteMeasure, grid_density: u32) -> Result<(), SpectralError> {
    let max_norm = m.max_norm();
    let need = (2.0 * max_norm).ceil().max(4.0) as u32;
    if grid_density < need {
        return Err(SpectralError::GridTooCoarse {
            got: grid_density,
            need,
            max_norm,
        });
    }
    Ok(())
}

/// L2 mass of the transform of `f * measure` over the ball
/// `|xi| <= 2^j`, by midpoint quadrature with `grid_density` samples per
/// unit frequency. Deterministic for a fixed grid; masses at different
/// `j` share grid points, so they are exactly monotone in `j`.
pub fn windowed_fourier_mass(
    m: &DiscreteMeasure,
    f: &[f64],
    j: u32,
    grid_density: u32,
) -> Result<f64, SpectralError> {
    if m.dim() > 2 {
        return Err(SpectralError::DimensionTooHigh(m.dim()));
    }
    if f.len() != m.len() {
        return Err(SpectralError::LengthMismatch {
            got: f.len(),
            expected: m.len(),
        });
    }
    check_grid(m, grid_density)?;
    let radius = 2f64.powi(j as i32);
    let h = 1.0 / grid_density as f64;
    let steps = 2u64 * (1u64 << j) * grid_density as u64;

    let modulus_sq = |xi: &[f64]| -> f64 {
        let mut re = 0.0;
        let mut im = 0.0;
        for i in 0..m.len() {
            let phase = -2.0 * std::f64::consts::PI * crate::numeric::dot(m.point(i), xi);
            let (sin, cos) = phase.sin_cos();
            let a = m.weights()[i] * f[i];
            re += a * cos;
            im += a * sin;
        }
        re * re + im * im
    };

    // Per-sample terms are collected in grid order and reduced
    // sequentially, so the result does not depend on the worker count.
    let terms: Vec<f64> = match m.dim() {
        1 => (0..steps)
            .into_par_iter()
            .map(|i| {
                let xi = [-radius + (i as f64 + 0.5) * h];
                modulus_sq(&xi) * h
            })
            .collect(),
        2 => (0..steps)
            .into_par_iter()
            .map(|ix| {
                let x = -radius + (ix as f64 + 0.5) * h;
                let mut row = crate::numeric::Kahan::new();
                for iy in 0..steps {
                    let y = -radius + (iy as f64 + 0.5) * h;
                    if x * x + y * y <= radius * radius {
                        row.add(modulus_sq(&[x, y]) * h * h);
                    }
                }
                row.value()
            })
            .collect(),
        _ => unreachable!("dimension checked above"),
    };
    Ok(crate::numeric::pairwise_sum(&terms).sqrt())
}

/// Fourier masses across a range of dyadic levels with the fitted
/// growth exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralProbe {
    pub j_values: Vec<u32>,
    pub masses: Vec<f64>,
    /// Fitted exponent: `mass ~ 2^(j * slope)`.
    pub slope: f64,
    pub residual: f64,
}

/// Computes the mass at each level and fits `log mass` against
/// `j log 2`. For an `s`-regular cloud in dimension `d` the slope
/// approximates `(d - s) / 2` while `2^j` stays below the reciprocal of
/// the cloud's resolution.
pub fn frostman_fourier_slope(
    m: &DiscreteMeasure,
    f: &[f64],
    j_range: &[u32],
    grid_density: u32,
) -> Result<SpectralProbe, SpectralError> {
    if j_range.len() < 4 {
        return Err(SpectralError::TooFewLevels {
            got: j_range.len(),
            need: 4,
        });
    }
    let mut masses = Vec::with_capacity(j_range.len());
    for &j in j_range {
        let mass = windowed_fourier_mass(m, f, j, grid_density)?;
        if !(mass > 0.0) {
            return Err(SpectralError::NonPositiveMass { j });
        }
        masses.push(mass);
    }
    let xs: Vec<f64> = j_range
        .iter()
        .map(|&j| j as f64 * std::f64::consts::LN_2)
        .collect();
    let ys: Vec<f64> = masses.iter().map(|&v| v.ln()).collect();
    let fit = ols_fit(&xs, &ys);
    Ok(SpectralProbe {
        j_values: j_range.to_vec(),
        masses,
        slope: fit.slope,
        residual: fit.residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{cantor_1d, DiscreteMeasure, MeasureMeta};

    fn single_atom_at(x: f64) -> DiscreteMeasure {
        DiscreteMeasure::new(
            1,
            vec![x],
            vec![1.0],
            MeasureMeta {
                family: "atoms".into(),
                ..Default::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn single_atom_mass_is_ball_volume_sqrt() {
        let m = single_atom_at(0.5);
        for j in [1u32, 3, 5] {
            let mass = windowed_fourier_mass(&m, &[1.0], j, 8).unwrap();
            let expect = (2.0 * 2f64.powi(j as i32)).sqrt();
            assert!((mass - expect).abs() < 1e-9, "j={j}: {mass} vs {expect}");
        }
    }

    #[test]
    fn zero_f_gives_zero_mass() {
        let m = cantor_1d(1.0 / 3.0, 2, 4).unwrap();
        let mass = windowed_fourier_mass(&m, &vec![0.0; m.len()], 4, 8).unwrap();
        assert_eq!(mass, 0.0);
    }

    #[test]
    fn mass_monotone_in_j_and_linear_in_f() {
        let m = cantor_1d(1.0 / 3.0, 2, 5).unwrap();
        let ones = vec![1.0; m.len()];
        let mut prev = 0.0;
        for j in 1..=5u32 {
            let mass = windowed_fourier_mass(&m, &ones, j, 8).unwrap();
            assert!(mass >= prev);
            prev = mass;
        }
        let doubled: Vec<f64> = ones.iter().map(|&v| 3.0 * v).collect();
        let a = windowed_fourier_mass(&m, &ones, 4, 8).unwrap();
        let b = windowed_fourier_mass(&m, &doubled, 4, 8).unwrap();
        assert!((b - 3.0 * a).abs() <= 1e-12 * b.abs());
    }

    #[test]
    fn masses_invariant_under_translation() {
        let m = cantor_1d(1.0 / 3.0, 2, 5).unwrap();
        let translated = DiscreteMeasure::new(
            1,
            m.coords().iter().map(|&c| c + 0.37).collect(),
            m.weights().to_vec(),
            m.meta().clone(),
        )
        .unwrap();
        let ones = vec![1.0; m.len()];
        for j in [2u32, 4] {
            let a = windowed_fourier_mass(&m, &ones, j, 8).unwrap();
            let b = windowed_fourier_mass(&translated, &ones, j, 8).unwrap();
            assert!((a - b).abs() <= 1e-9 * a, "j={j}: {a} vs {b}");
        }
    }

    #[test]
    fn single_atom_slope_is_half() {
        let m = single_atom_at(0.5);
        let probe = frostman_fourier_slope(&m, &[1.0], &[2, 3, 4, 5, 6, 7], 8).unwrap();
        assert!((probe.slope - 0.5).abs() < 0.02, "{}", probe.slope);
    }

    #[test]
    fn dimension_guard_and_grid_guard() {
        let m = crate::measure::uniform_cube_sample(10, 3, 0.3, 1).unwrap();
        assert!(matches!(
            windowed_fourier_mass(&m, &vec![1.0; 10], 2, 8),
            Err(SpectralError::DimensionTooHigh(3))
        ));
        let m1 = cantor_1d(1.0 / 3.0, 2, 3).unwrap();
        assert!(matches!(
            windowed_fourier_mass(&m1, &vec![1.0; m1.len()], 2, 2),
            Err(SpectralError::GridTooCoarse { .. })
        ));
    }
}
