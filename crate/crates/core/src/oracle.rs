//! Closed-form harmonic functions used as ground truth.
//!
//! When the boundary data is the trace of a function harmonic on a
//! neighbourhood of the closed domain, every walk value equals that
//! function, so these oracles give exact expected values for the
//! estimators.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{param, Error, Result};
use crate::geometry::Domain;
use crate::point::Point;

#[derive(Clone, Debug, PartialEq)]
pub enum HarmonicOracle {
    /// `a . x + b`.
    Linear { a: Point, b: f64 },
    /// `x^T A x` with `A` symmetric and trace-free (row-major, `dim x dim`).
    HarmonicQuadratic { matrix: Vec<f64>, dim: usize },
    /// `v(|x - z0|)` with the radial profile [`radial_profile`].
    FundamentalSolution { z0: Point },
    /// Poisson integral over the unit circle of data sampled at `M`
    /// equispaced angles `2 pi k / M`.
    PoissonDisk { values: Vec<f64> },
}

/// The radial harmonic profile: `sgn(N - 2) t^(2 - N)` for `N != 2` and
/// `-log t` for `N = 2`. Decreasing on `(0, inf)` for every `N`.
pub fn radial_profile(dim: usize, t: f64) -> f64 {
    match dim {
        1 => -t,
        2 => -libm::log(t),
        n => libm::pow(t, 2.0 - n as f64),
    }
}

impl HarmonicOracle {
    pub fn linear(a: Point, b: f64) -> Result<Self> {
        if !b.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(Self::Linear { a, b })
    }

    /// Validates symmetry and zero trace (relative tolerance `1e-12`).
    pub fn quadratic(matrix: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 || dim > crate::point::MAX_DIM {
            return Err(Error::InvalidDimension(dim));
        }
        if matrix.len() != dim * dim {
            return Err(param("matrix", "must have dim * dim entries"));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let scale = matrix.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        for i in 0..dim {
            for j in 0..i {
                if (matrix[i * dim + j] - matrix[j * dim + i]).abs() > 1e-12 * scale {
                    return Err(param("matrix", "must be symmetric"));
                }
            }
        }
        let trace: f64 = (0..dim).map(|i| matrix[i * dim + i]).sum();
        if trace.abs() > 1e-12 * scale {
            return Err(param("matrix", "must have zero trace"));
        }
        Ok(Self::HarmonicQuadratic { matrix, dim })
    }

    /// Diagonal trace-free quadratic `sum_i d_i x_i^2`.
    pub fn diagonal_quadratic(diagonal: &[f64]) -> Result<Self> {
        let dim = diagonal.len();
        let mut matrix = alloc::vec![0.0; dim * dim];
        for (i, d) in diagonal.iter().enumerate() {
            matrix[i * dim + i] = *d;
        }
        Self::quadratic(matrix, dim)
    }

    pub fn fundamental(z0: Point) -> Self {
        Self::FundamentalSolution { z0 }
    }

    pub fn poisson_disk(values: Vec<f64>) -> Result<Self> {
        if values.len() < 64 {
            return Err(param("values", "need at least 64 equispaced samples"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self::PoissonDisk { values })
    }

    /// Ambient dimension, when the oracle fixes one.
    pub fn dim(&self) -> usize {
        match self {
            Self::Linear { a, .. } => a.dim(),
            Self::HarmonicQuadratic { dim, .. } => *dim,
            Self::FundamentalSolution { z0 } => z0.dim(),
            Self::PoissonDisk { .. } => 2,
        }
    }

    /// Checks that the oracle is harmonic on a neighbourhood of the closed
    /// domain: the pole of a fundamental solution must lie strictly outside,
    /// and the Poisson oracle needs the unit disk itself.
    pub fn check_region(&self, domain: &Domain) -> Result<()> {
        if self.dim() != domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: domain.dim(),
                found: self.dim(),
            });
        }
        match self {
            Self::FundamentalSolution { z0 } if domain.signed_distance(z0) <= 0.0 => {
                Err(Error::OutsideOracleRegion)
            }
            Self::PoissonDisk { .. } => match domain.shape() {
                crate::geometry::Shape::Ball { center, radius }
                    if *radius == 1.0 && center.norm() == 0.0 =>
                {
                    Ok(())
                }
                _ => Err(Error::OutsideOracleRegion),
            },
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: &Point) -> Result<f64> {
        x.check_dim(self.dim())?;
        match self {
            Self::Linear { a, b } => Ok(a.dot(x) + b),
            Self::HarmonicQuadratic { matrix, dim } => {
                let mut acc = 0.0;
                for i in 0..*dim {
                    let row: f64 = (0..*dim).map(|j| matrix[i * dim + j] * x[j]).sum();
                    acc += x[i] * row;
                }
                Ok(acc)
            }
            Self::FundamentalSolution { z0 } => {
                let t = x.distance(z0);
                if t == 0.0 {
                    Err(Error::OutsideOracleRegion)
                } else {
                    Ok(radial_profile(z0.dim(), t))
                }
            }
            Self::PoissonDisk { values } => poisson_disk_eval(values, x),
        }
    }

    /// Value on the boundary. Identical to [`eval`](Self::eval) except for
    /// the Poisson oracle, whose kernel is singular on the circle; there the
    /// tabulated data is interpolated linearly in angle.
    pub fn trace(&self, y: &Point) -> Result<f64> {
        match self {
            Self::PoissonDisk { values } => {
                y.check_dim(2)?;
                let m = values.len();
                let mut theta = libm::atan2(y[1], y[0]);
                if theta < 0.0 {
                    theta += 2.0 * PI;
                }
                let s = theta * m as f64 / (2.0 * PI);
                let k = (libm::floor(s) as usize) % m;
                let frac = s - libm::floor(s);
                Ok(values[k] * (1.0 - frac) + values[(k + 1) % m] * frac)
            }
            _ => self.eval(y),
        }
    }
}

/// Trapezoid rule for the Poisson integral of the unit disk,
/// `(1/2pi) ∫ F(theta) (1 - |x|^2) / |x - e^{i theta}|^2 d theta`, with `F`
/// sampled at `M >= 64` equispaced angles starting at 0.
///
/// The rule is spectrally accurate for smooth periodic data: the kernel's
/// Fourier coefficients decay like `|x|^k`, so the error for a trigonometric
/// polynomial of degree `d` is of order `|x|^(M - d)`. Points with
/// `|x| >= 1 - 1e-6` are refused.
pub fn poisson_disk_eval(values: &[f64], x: &Point) -> Result<f64> {
    x.check_dim(2)?;
    if values.len() < 64 {
        return Err(param("values", "need at least 64 equispaced samples"));
    }
    let r2 = x.norm_squared();
    if r2 >= (1.0 - 1e-6) * (1.0 - 1e-6) {
        return Err(Error::OutsideOracleRegion);
    }
    let m = values.len();
    let mut acc = 0.0;
    for (k, f) in values.iter().enumerate() {
        let theta = 2.0 * PI * k as f64 / m as f64;
        let dx = x[0] - libm::cos(theta);
        let dy = x[1] - libm::sin(theta);
        acc += f * (1.0 - r2) / (dx * dx + dy * dy);
    }
    Ok(acc / m as f64)
}

/// Laplacian of a harmonic oracle: zero wherever it is defined.
pub fn laplacian_of(oracle: &HarmonicOracle, x: &Point) -> Result<f64> {
    oracle.eval(x).map(|_| 0.0)
}

/// Non-harmonic smooth functions with known Laplacians, for probing the
/// second-order averaging expansion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TestFunction {
    /// `|x|^2`, Laplacian `2N`.
    SquaredNorm,
    /// `x_1^4`, Laplacian `12 x_1^2`.
    QuarticFirst,
}

impl TestFunction {
    pub fn eval(&self, x: &Point) -> f64 {
        match self {
            Self::SquaredNorm => x.norm_squared(),
            Self::QuarticFirst => {
                let s = x[0] * x[0];
                s * s
            }
        }
    }

    pub fn laplacian(&self, x: &Point) -> f64 {
        match self {
            Self::SquaredNorm => 2.0 * x.dim() as f64,
            Self::QuarticFirst => 12.0 * x[0] * x[0],
        }
    }
}
