//! Named analytic densities used as initial data and bridge endpoints.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{Field, Grid};
use crate::Scalar;

/// Product densities on `ℝⁿ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    /// Isotropic Gaussian with per-axis `mean` and common `variance`.
    Gaussian { mean: Vec<f64>, variance: f64 },
    /// Uniform on the cube `[a, b]ⁿ`.
    Uniform { a: f64, b: f64 },
}

impl Profile {
    pub fn gaussian_1d(mean: f64, variance: f64) -> Self {
        Profile::Gaussian {
            mean: vec![mean],
            variance,
        }
    }

    pub fn density<T: Scalar>(&self, z: &[T]) -> Result<T> {
        match self {
            Profile::Gaussian { mean, variance } => {
                if mean.len() != z.len() {
                    return Err(Error::DimensionMismatch {
                        expected: z.len(),
                        got: mean.len(),
                    });
                }
                if !(*variance > 0.0) {
                    return Err(Error::InvalidField(format!(
                        "variance {variance} must be positive"
                    )));
                }
                let var = T::lit(*variance);
                let n = z.len() as i32;
                let d2: T = z
                    .iter()
                    .zip(mean)
                    .map(|(&x, &m)| (x - T::lit(m)) * (x - T::lit(m)))
                    .sum();
                Ok(
                    (-d2 / (T::lit(2.0) * var)).exp()
                        / (T::lit(2.0) * T::PI() * var).sqrt().powi(n),
                )
            }
            Profile::Uniform { a, b } => {
                if !(b > a) {
                    return Err(Error::InvalidField(format!(
                        "uniform bounds [{a}, {b}] are empty"
                    )));
                }
                let (a, b) = (T::lit(*a), T::lit(*b));
                let inside = z.iter().all(|&x| x >= a && x <= b);
                Ok(if inside {
                    (b - a).powi(z.len() as i32).recip()
                } else {
                    T::zero()
                })
            }
        }
    }

    pub fn sample<T: Scalar>(&self, grid: &Grid<T>) -> Result<Field<T>> {
        let values = grid
            .points()
            .iter()
            .map(|p| self.density(p))
            .collect::<Result<Vec<T>>>()?;
        Field::new(grid.clone(), values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;

    #[test]
    fn profiles_have_unit_mass() {
        let g = Grid::<f64>::line(8.0, 801).unwrap();
        let f = Profile::gaussian_1d(0.5, 0.7).sample(&g).unwrap();
        assert!((integrate(&f) - 1.0).abs() < 1e-10);
        let g2 = Grid::<f64>::new(vec![9.0, 9.0], vec![181, 181]).unwrap();
        let f = Profile::Gaussian {
            mean: vec![0.0, 1.0],
            variance: 1.0,
        }
        .sample(&g2)
        .unwrap();
        assert!((integrate(&f) - 1.0).abs() < 1e-9);
        let u = Profile::Uniform { a: -1.0, b: 1.0 };
        assert_eq!(u.density(&[0.3f64]).unwrap(), 0.5);
        assert_eq!(u.density(&[1.3f64]).unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Profile::gaussian_1d(0.0, 0.0).density(&[0.0f64]).is_err());
        assert!(Profile::gaussian_1d(0.0, 1.0)
            .density(&[0.0f64, 1.0])
            .is_err());
        assert!(Profile::Uniform { a: 1.0, b: 1.0 }
            .density(&[1.0f64])
            .is_err());
    }
}
