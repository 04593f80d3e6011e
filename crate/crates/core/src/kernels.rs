//! Closed-form log-kernels of `∂φ/∂t = Δφ - (½ zᵀQz + rᵀz + s) φ`.
//!
//! All kernels factor over modal coordinates. Per mode with `θ = √λ τ`:
//!
//! ```text
//! log κ_k = ¼ log λ - ½ log(2π sinh 2θ)
//!         - (√λ/2)(x - y)² coth 2θ - √λ x y tanh θ          (quadratic)
//!         + σ(-c τ) - tanh(θ)/√λ · (b(x + y)/2 + b²/(4λ))   (affine part)
//! ```
//!
//! The quadratic line is the usual `-(√λ/2)(x²+y²) coth 2θ + √λ x y csch 2θ`
//! regrouped so that nothing cancels as `θ → 0`.

use crate::error::{Error, Result};
use crate::special::{coth2, log_sinh, tanh_over_sqrt};
use crate::spectral::{to_modal, SpectralData};
use crate::weyl::{AffineSign, TimeWindow, AFFINE_SIGN};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Heat,
    Quadratic,
    Affine,
}

/// `log` of the heat kernel `(4πτ)^{-n/2} exp(-|x - y|²/(4τ))`.
pub fn log_kernel_heat<T: Scalar>(x: &[T], y: &[T], tau: T) -> Result<T> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    if !(tau > T::zero()) {
        return Err(Error::NonpositiveTime(tau.as_f64()));
    }
    let n = T::from_usize(x.len()).expect("dimension fits scalar");
    let dist2: T = x.iter().zip(y).map(|(&a, &b)| (a - b) * (a - b)).sum();
    Ok(-n / T::lit(2.0) * (T::lit(4.0) * T::PI() * tau).ln() - dist2 / (T::lit(4.0) * tau))
}

/// Immutable evaluator for one rate and one time window.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelEvaluator<T> {
    dec: SpectralData<T>,
    window: TimeWindow<T>,
    sign: AffineSign,
    kind: KernelKind,
}

impl<T: Scalar> KernelEvaluator<T> {
    pub fn new(dec: SpectralData<T>, window: TimeWindow<T>) -> Result<Self> {
        if !(window.tau() > T::zero()) {
            return Err(Error::NonpositiveTime(window.tau().as_f64()));
        }
        let kind = if dec.has_affine_part() {
            KernelKind::Affine
        } else if dec.is_heat() {
            KernelKind::Heat
        } else {
            KernelKind::Quadratic
        };
        Ok(Self {
            dec,
            window,
            sign: AFFINE_SIGN,
            kind,
        })
    }

    /// Same evaluator with a different affine sign. Only useful for checking
    /// that the verification oracles reject the wrong one.
    pub fn with_sign(mut self, sign: AffineSign) -> Self {
        self.sign = sign;
        self
    }

    pub fn with_window(&self, window: TimeWindow<T>) -> Result<Self> {
        let mut ev = Self::new(self.dec.clone(), window)?;
        ev.sign = self.sign;
        Ok(ev)
    }

    pub fn spectral(&self) -> &SpectralData<T> {
        &self.dec
    }

    pub fn window(&self) -> &TimeWindow<T> {
        &self.window
    }

    pub fn sign(&self) -> AffineSign {
        self.sign
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dec.dim()
    }

    fn check(&self, x: &[T], y: &[T]) -> Result<()> {
        for len in [x.len(), y.len()] {
            if len != self.dec.dim() {
                return Err(Error::DimensionMismatch {
                    expected: self.dec.dim(),
                    got: len,
                });
            }
        }
        Ok(())
    }

    fn quadratic_mode(&self, k: usize, x: T, y: T, tau: T) -> T {
        let lam = self.dec.lambdas()[k];
        let two = T::lit(2.0);
        let four = T::lit(4.0);
        if lam <= T::tol_eig() {
            let d = x - y;
            return -(four * T::PI() * tau).ln() / two - d * d / (four * tau);
        }
        let m = lam.sqrt();
        let theta = m * tau;
        let d = x - y;
        lam.ln() / four
            - ((two * T::PI()).ln() + log_sinh(two * theta)) / two
            - m / two * d * d * coth2(theta)
            - m * x * y * theta.tanh()
    }

    fn affine_mode(&self, k: usize, x: T, y: T, tau: T) -> T {
        let lam = self.dec.lambdas()[k];
        let b = self.dec.b()[k];
        let c = self.dec.c()[k];
        let mut acc = -self.sign.value::<T>() * c * tau;
        if b != T::zero() {
            let shape = b / T::lit(2.0) * (x + y) + b * b / (T::lit(4.0) * lam);
            acc = acc - tanh_over_sqrt(lam, tau) * shape;
        }
        acc
    }

    fn log_quadratic_tau(&self, x: &[T], y: &[T], tau: T) -> T {
        (0..self.dec.dim())
            .map(|k| self.quadratic_mode(k, x[k], y[k], tau))
            .sum()
    }

    fn log_affine_tau(&self, x: &[T], y: &[T], tau: T) -> T {
        (0..self.dec.dim())
            .map(|k| self.quadratic_mode(k, x[k], y[k], tau) + self.affine_mode(k, x[k], y[k], tau))
            .sum()
    }

    /// Modal log-kernel at an arbitrary elapsed time, ignoring the stored window.
    pub fn log_kernel_tau(&self, tau: T, x: &[T], y: &[T]) -> Result<T> {
        self.check(x, y)?;
        if !(tau > T::zero()) {
            return Err(Error::NonpositiveTime(tau.as_f64()));
        }
        Ok(match self.kind {
            KernelKind::Heat => log_kernel_heat(x, y, tau)?,
            KernelKind::Quadratic => self.log_quadratic_tau(x, y, tau),
            KernelKind::Affine => self.log_affine_tau(x, y, tau),
        })
    }

    /// Modal log-kernel over the stored window.
    pub fn log_kernel(&self, x: &[T], y: &[T]) -> Result<T> {
        self.log_kernel_tau(self.window.tau(), x, y)
    }

    pub fn kernel(&self, x: &[T], y: &[T]) -> Result<T> {
        self.log_kernel(x, y).map(|l| l.exp())
    }

    /// Log-kernel in original coordinates, `log κ(V z_x, V z_y)`.
    pub fn log_kernel_original(&self, z_x: &[T], z_y: &[T]) -> Result<T> {
        let x = to_modal(&self.dec, z_x)?;
        let y = to_modal(&self.dec, z_y)?;
        self.log_kernel(&x, &y)
    }
}

/// Pure-quadratic log-kernel; the affine data of `ev`, if any, is ignored.
pub fn log_kernel_quadratic<T: Scalar>(ev: &KernelEvaluator<T>, x: &[T], y: &[T]) -> Result<T> {
    ev.check(x, y)?;
    Ok(ev.log_quadratic_tau(x, y, ev.window.tau()))
}

/// Affine-quadratic log-kernel. Reduces to [`log_kernel_quadratic`] when
/// `b = 0` and `s = 0` since every affine term is then exactly zero.
pub fn log_kernel_affine<T: Scalar>(ev: &KernelEvaluator<T>, x: &[T], y: &[T]) -> Result<T> {
    ev.check(x, y)?;
    Ok(ev.log_affine_tau(x, y, ev.window.tau()))
}

/// Kernel in original coordinates: `κ(V z_x, V z_y)`.
pub fn kernel_original_coords<T: Scalar>(
    ev: &KernelEvaluator<T>,
    z_x: &[T],
    z_y: &[T],
) -> Result<T> {
    ev.log_kernel_original(z_x, z_y).map(|l| l.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::csch2;
    use crate::spectral::{decompose, QuadraticRate};
    use std::f64::consts::PI;

    fn ev(l: &[f64], b: &[f64], s: f64, tau: f64) -> KernelEvaluator<f64> {
        let dec = SpectralData::from_modal(l.to_vec(), b.to_vec(), s).unwrap();
        KernelEvaluator::new(dec, TimeWindow::elapsed(tau).unwrap()).unwrap()
    }

    #[test]
    fn heat_examples() {
        let v = log_kernel_heat(&[0.0], &[0.0], 1.0 / (4.0 * PI)).unwrap();
        assert!(v.abs() < 1e-15);
        let v = log_kernel_heat(&[0.0], &[1.0], 0.25).unwrap();
        assert!((v - (-0.5 * PI.ln() - 1.0)).abs() < 1e-15);
        let two: f64 = log_kernel_heat(&[0.0, 0.0], &[1.0, 1.0], 0.5).unwrap();
        let one = log_kernel_heat(&[0.0], &[1.0], 0.5).unwrap();
        assert!((two - 2.0 * one).abs() < 1e-15);
        assert!(matches!(
            log_kernel_heat(&[0.0], &[0.0], 0.0),
            Err(Error::NonpositiveTime(_))
        ));
    }

    #[test]
    fn quadratic_origin_value() {
        let e = ev(&[1.0], &[0.0], 0.0, 1.0);
        assert_eq!(e.kind(), KernelKind::Quadratic);
        let v = log_kernel_quadratic(&e, &[0.0], &[0.0]).unwrap();
        assert!((v - (1.0 / (2.0 * PI * 2f64.sinh()).sqrt()).ln()).abs() < 1e-15);
    }

    #[test]
    fn quadratic_matches_textbook_form() {
        let e = ev(&[2.5], &[0.0], 0.0, 0.4);
        let (x, y) = (0.7, -1.3);
        let m = 2.5f64.sqrt();
        let th = m * 0.4;
        let textbook = 0.25 * 2.5f64.ln()
            - 0.5 * (2.0 * PI * (2.0 * th).sinh()).ln()
            - m / 2.0 * (x * x + y * y) * coth2(th)
            + m * x * y * csch2(th);
        let v = e.log_kernel(&[x], &[y]).unwrap();
        assert!((v - textbook).abs() < 1e-13);
    }

    #[test]
    fn small_lambda_matches_heat() {
        let e = ev(&[1e-12], &[0.0], 0.0, 0.8);
        for &(x, y) in &[(0.0, 0.0), (1.0, -1.0), (3.0, 2.5), (-4.0, 4.0)] {
            let a = e.log_kernel(&[x], &[y]).unwrap();
            let b = log_kernel_heat(&[x], &[y], 0.8).unwrap();
            assert!((a - b).abs() <= 1e-6);
        }
        // just above the branch threshold the closed form is still close
        let e = ev(&[2e-10], &[0.0], 0.0, 0.8);
        let a = e.log_kernel(&[1.0], &[-1.0]).unwrap();
        let b = log_kernel_heat(&[1.0], &[-1.0], 0.8).unwrap();
        assert!((a - b).abs() <= 1e-6);
    }

    #[test]
    fn affine_reduces_to_quadratic() {
        let e = ev(&[1.0, 3.0], &[0.0, 0.0], 0.0, 0.9);
        let a = log_kernel_affine(&e, &[0.3, -0.4], &[1.1, 0.2]).unwrap();
        let q = log_kernel_quadratic(&e, &[0.3, -0.4], &[1.1, 0.2]).unwrap();
        assert_eq!(a, q);
    }

    #[test]
    fn affine_shift_example() {
        // λ=1, b=2: δ = 1, c = 1
        let e = ev(&[1.0], &[2.0], 0.0, 1.0);
        let q = ev(&[1.0], &[0.0], 0.0, 1.0);
        let a = log_kernel_affine(&e, &[0.0], &[0.0]).unwrap();
        let shifted = q.log_kernel(&[1.0], &[1.0]).unwrap();
        assert!((a - (1.0 + shifted)).abs() < 1e-14);
    }

    #[test]
    fn constant_rate_is_pure_decay() {
        let e = ev(&[1.0], &[0.0], 3.0, 0.5);
        let q = ev(&[1.0], &[0.0], 0.0, 0.5);
        let a = e.kernel(&[0.2], &[-0.6]).unwrap();
        let b = (-1.5f64).exp() * q.kernel(&[0.2], &[-0.6]).unwrap();
        assert!((a / b - 1.0).abs() < 1e-14);
    }

    #[test]
    fn original_coordinates() {
        let rate = QuadraticRate::new(vec![4.0, 2.0, 2.0, 4.0], vec![0.0, 0.0], 0.0).unwrap();
        let dec = decompose(&rate).unwrap();
        let e = KernelEvaluator::new(dec, TimeWindow::elapsed(1.0).unwrap()).unwrap();
        let v = e.log_kernel_original(&[0.0, 0.0], &[0.0, 0.0]).unwrap();
        let expect: f64 = [1.0f64, 3.0]
            .iter()
            .map(|l| 0.25 * l.ln() - 0.5 * (2.0 * PI * (2.0 * l.sqrt()).sinh()).ln())
            .sum();
        assert!((v - expect).abs() < 1e-14);
        assert!(
            (kernel_original_coords(&e, &[0.0, 0.0], &[0.0, 0.0]).unwrap() - expect.exp()).abs()
                < 1e-15
        );
    }

    #[test]
    fn degenerate_basis_invariance() {
        let dec = decompose(&QuadraticRate::diagonal(&[2.0, 2.0])).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let rotated = dec.with_basis(vec![h, h, -h, h]).unwrap();
        let w = TimeWindow::elapsed(0.7).unwrap();
        let a = KernelEvaluator::new(dec, w).unwrap();
        let b = KernelEvaluator::new(rotated, w).unwrap();
        let za = [0.4, -1.2];
        let zb = [1.0, 0.3];
        let va = a.log_kernel_original(&za, &zb).unwrap();
        let vb = b.log_kernel_original(&za, &zb).unwrap();
        assert!((va - vb).abs() < 1e-13);
    }

    #[test]
    fn symmetric_and_finite() {
        let kinds = [
            ev(&[0.0], &[0.0], 0.0, 0.3),
            ev(&[2.0], &[0.0], 0.0, 0.3),
            ev(&[2.0], &[1.5], -0.7, 0.3),
        ];
        for e in &kinds {
            for &(x, y) in &[(0.1, 2.3), (-5.0, 1.0), (7.5, -7.5)] {
                assert_eq!(
                    e.log_kernel(&[x], &[y]).unwrap(),
                    e.log_kernel(&[y], &[x]).unwrap()
                );
            }
        }
        let stiff = ev(&[9.0], &[0.0], 0.0, 100.0); // √λτ = 300
        let v = stiff.log_kernel(&[1.0], &[2.0]).unwrap();
        assert!(v.is_finite());
        let tiny = ev(&[1.0], &[0.0], 0.0, 1e-9);
        assert!(tiny.log_kernel(&[0.0], &[1e-5]).unwrap().is_finite());
    }

    #[test]
    fn rejects_zero_window() {
        let dec = SpectralData::from_modal(vec![1.0], vec![0.0], 0.0).unwrap();
        assert!(matches!(
            KernelEvaluator::new(dec, TimeWindow::new(1.0, 1.0).unwrap()),
            Err(Error::NonpositiveTime(_))
        ));
    }

    #[test]
    fn f32_kernel() {
        let dec = SpectralData::<f32>::from_modal(vec![1.0], vec![0.0], 0.0).unwrap();
        let e = KernelEvaluator::new(dec, TimeWindow::elapsed(1.0f32).unwrap()).unwrap();
        let v = e.log_kernel(&[0.0], &[0.0]).unwrap();
        assert!((v as f64 - (1.0 / (2.0 * PI * 2f64.sinh()).sqrt()).ln()).abs() < 1e-5);
    }
}
