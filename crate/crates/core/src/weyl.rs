//! Weyl symbols of the reaction-diffusion semigroup and their building blocks.
//!
//! In modal coordinates the symbol of `exp(-τ(|D|² + Σ λ_k X_k² + b_k X_k + s))`
//! has the form `α(τ) exp(-Σ β_k(τ) q_k(x, ξ))` with
//! `q_k = ξ_k² + λ_k x_k² + b_k x_k + s/n`,
//! `β_k = tanh(√λ_k τ)/√λ_k` and
//! `log α = Σ_k -log cosh(√λ_k τ) + σ(-c_k τ + c_k β_k)`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::special::{log_cosh, tanh_over_sqrt};
use crate::spectral::SpectralData;
use crate::Scalar;

/// Sign multiplying the `-c_k τ` terms of the affine prefactor.
///
/// `Plus` reproduces the prefactor `exp(-c_k τ)` as it is commonly printed;
/// `Minus` is what the PDE actually requires (see `DERIVATION.md`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum AffineSign {
    Plus,
    Minus,
}

impl AffineSign {
    pub fn value<T: Scalar>(self) -> T {
        match self {
            AffineSign::Plus => T::one(),
            AffineSign::Minus => -T::one(),
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            AffineSign::Plus => AffineSign::Minus,
            AffineSign::Minus => AffineSign::Plus,
        }
    }

    pub fn from_i8(v: i8) -> Option<Self> {
        match v {
            1 => Some(AffineSign::Plus),
            -1 => Some(AffineSign::Minus),
            _ => None,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            AffineSign::Plus => 1,
            AffineSign::Minus => -1,
        }
    }
}

/// Resolved by `verify::resolve_affine_sign`; asserted in the test suites.
pub const AFFINE_SIGN: AffineSign = AffineSign::Minus;

/// A phase-space point `(x, ξ)` in modal coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolPoint<T> {
    pub x: Vec<T>,
    pub xi: Vec<T>,
}

impl<T: Scalar> SymbolPoint<T> {
    pub fn new(x: Vec<T>, xi: Vec<T>) -> Result<Self> {
        if x.len() != xi.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                got: xi.len(),
            });
        }
        Ok(Self { x, xi })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    fn sup_norm(&self) -> T {
        self.x
            .iter()
            .chain(&self.xi)
            .fold(T::zero(), |m, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeWindow<T> {
    t0: T,
    t: T,
}

impl<T: Scalar> TimeWindow<T> {
    pub fn new(t0: T, t: T) -> Result<Self> {
        if !(t0 >= T::zero() && t >= t0 && t.is_finite()) {
            return Err(Error::InvalidWindow {
                t0: t0.as_f64(),
                t: t.as_f64(),
            });
        }
        Ok(Self { t0, t })
    }

    /// Window `[0, tau]`.
    pub fn elapsed(tau: T) -> Result<Self> {
        Self::new(T::zero(), tau)
    }

    pub fn t0(&self) -> T {
        self.t0
    }

    pub fn t(&self) -> T {
        self.t
    }

    pub fn tau(&self) -> T {
        self.t - self.t0
    }
}

/// `β_k(τ)` and `log α(τ)` for one time window.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolCoefficients<T> {
    pub beta: Vec<T>,
    pub log_alpha: T,
}

/// `β(τ) = tanh(√λ τ)/√λ`, the solution of `β' = 1 - λβ²`, `β(0) = 0`.
pub fn beta_closed<T: Scalar>(lambda: T, tau: T) -> T {
    tanh_over_sqrt(lambda, tau)
}

/// `log α(τ)` using the resolved [`AFFINE_SIGN`].
pub fn log_alpha_closed<T: Scalar>(dec: &SpectralData<T>, tau: T) -> T {
    log_alpha_with_sign(dec, tau, AFFINE_SIGN)
}

pub fn log_alpha_with_sign<T: Scalar>(dec: &SpectralData<T>, tau: T, sign: AffineSign) -> T {
    let sigma = sign.value::<T>();
    let mut acc = T::zero();
    for k in 0..dec.dim() {
        let lam = dec.lambdas()[k];
        let c = dec.c()[k];
        acc = acc - log_cosh(lam.sqrt() * tau);
        if c != T::zero() {
            acc = acc + sigma * (c * beta_closed(lam, tau) - c * tau);
        }
    }
    acc
}

pub fn symbol_coefficients<T: Scalar>(
    dec: &SpectralData<T>,
    window: &TimeWindow<T>,
) -> SymbolCoefficients<T> {
    let tau = window.tau();
    SymbolCoefficients {
        beta: dec.lambdas().iter().map(|&l| beta_closed(l, tau)).collect(),
        log_alpha: log_alpha_closed(dec, tau),
    }
}

fn check_point<T: Scalar>(dec: &SpectralData<T>, p: &SymbolPoint<T>) -> Result<()> {
    if p.dim() != dec.dim() {
        return Err(Error::DimensionMismatch {
            expected: dec.dim(),
            got: p.dim(),
        });
    }
    Ok(())
}

/// Per-mode `q_k = ξ_k² + λ_k x_k² + b_k x_k + s/n`.
fn mode_q<T: Scalar>(dec: &SpectralData<T>, p: &SymbolPoint<T>, k: usize) -> T {
    let x = p.x[k];
    let xi = p.xi[k];
    xi * xi + dec.lambdas()[k] * x * x + dec.b()[k] * x + dec.s_per_mode()
}

/// Symbol of the generator, `|ξ|² + Σ λ_k x_k² + b_k x_k + s`.
pub fn symbol_q<T: Scalar>(dec: &SpectralData<T>, p: &SymbolPoint<T>) -> Result<T> {
    check_point(dec, p)?;
    let mut acc = dec.s();
    for k in 0..dec.dim() {
        let x = p.x[k];
        acc = acc + p.xi[k] * p.xi[k] + dec.lambdas()[k] * x * x + dec.b()[k] * x;
    }
    Ok(acc)
}

fn log_symbol_at<T: Scalar>(
    dec: &SpectralData<T>,
    p: &SymbolPoint<T>,
    tau: T,
    sign: AffineSign,
) -> T {
    if tau == T::zero() {
        return T::zero();
    }
    let mut acc = log_alpha_with_sign(dec, tau, sign);
    for k in 0..dec.dim() {
        acc = acc - beta_closed(dec.lambdas()[k], tau) * mode_q(dec, p, k);
    }
    acc
}

/// `log h(x, ξ)`, assembled without exponentiating intermediate factors.
pub fn log_symbol_h<T: Scalar>(
    dec: &SpectralData<T>,
    p: &SymbolPoint<T>,
    window: &TimeWindow<T>,
) -> Result<T> {
    check_point(dec, p)?;
    Ok(log_symbol_at(dec, p, window.tau(), AFFINE_SIGN))
}

pub fn log_symbol_h_with_sign<T: Scalar>(
    dec: &SpectralData<T>,
    p: &SymbolPoint<T>,
    window: &TimeWindow<T>,
    sign: AffineSign,
) -> Result<T> {
    check_point(dec, p)?;
    Ok(log_symbol_at(dec, p, window.tau(), sign))
}

/// Weyl symbol `h(x, ξ)` of the semigroup over `window`. Exactly 1 at `τ = 0`.
pub fn symbol_h<T: Scalar>(
    dec: &SpectralData<T>,
    p: &SymbolPoint<T>,
    window: &TimeWindow<T>,
) -> Result<T> {
    log_symbol_h(dec, p, window).map(|l| l.exp())
}

/// Hessian of `f` over `u = (x, ξ)` by central differences, row-major `2n × 2n`.
fn hessian<T, F>(f: &F, p: &SymbolPoint<T>, step: T) -> Vec<T>
where
    T: Scalar,
    F: Fn(&[T], &[T]) -> T,
{
    let n = p.dim();
    let m = 2 * n;
    let base: Vec<T> = p.x.iter().chain(&p.xi).copied().collect();
    let eval = |u: &[T]| f(&u[..n], &u[n..]);
    let f0 = eval(&base);
    let mut h = vec![T::zero(); m * m];
    let mut u = base.clone();
    for a in 0..m {
        u[a] = base[a] + step;
        let fp = eval(&u);
        u[a] = base[a] - step;
        let fm = eval(&u);
        u[a] = base[a];
        h[a * m + a] = (fp - T::lit(2.0) * f0 + fm) / (step * step);
        for b in (a + 1)..m {
            let mut corner = |da: T, db: T| {
                u[a] = base[a] + da;
                u[b] = base[b] + db;
                let v = eval(&u);
                u[a] = base[a];
                u[b] = base[b];
                v
            };
            let pp = corner(step, step);
            let pm = corner(step, -step);
            let mp = corner(-step, step);
            let mm = corner(-step, -step);
            let v = (pp - pm - mp + mm) / (T::lit(4.0) * step * step);
            h[a * m + b] = v;
            h[b * m + a] = v;
        }
    }
    h
}

fn gradient<T, F>(f: &F, p: &SymbolPoint<T>, step: T) -> Vec<T>
where
    T: Scalar,
    F: Fn(&[T], &[T]) -> T,
{
    let n = p.dim();
    let mut u: Vec<T> = p.x.iter().chain(&p.xi).copied().collect();
    let mut g = Vec::with_capacity(2 * n);
    for a in 0..2 * n {
        let orig = u[a];
        u[a] = orig + step;
        let fp = f(&u[..n], &u[n..]);
        u[a] = orig - step;
        let fm = f(&u[..n], &u[n..]);
        u[a] = orig;
        g.push((fp - fm) / (T::lit(2.0) * step));
    }
    g
}

/// `{f, g}_j(x, ξ)` for `j ≤ 2`, derivatives by central differences.
///
/// `j = 0` is the product, `j = 1` is `(1/2i)` times the Poisson bracket and
/// `j = 2` is `(1/2i)² Σ_{k,l} (∂_{y_k}∂_{ξ_k} - ∂_{x_k}∂_{η_k})(…_l) f(x,ξ) g(y,η)`
/// on the diagonal `y = x`, `η = ξ`.
pub fn poisson_bracket_j<T, F, G>(f: F, g: G, p: &SymbolPoint<T>, j: u32) -> Result<Complex<T>>
where
    T: Scalar,
    F: Fn(&[T], &[T]) -> T,
    G: Fn(&[T], &[T]) -> T,
{
    let n = p.dim();
    let scale = T::one() + p.sup_norm();
    match j {
        0 => Ok(Complex::new(f(&p.x, &p.xi) * g(&p.x, &p.xi), T::zero())),
        1 => {
            let step = T::lit(1e-5) * scale;
            let df = gradient(&f, p, step);
            let dg = gradient(&g, p, step);
            let mut pb = T::zero();
            for k in 0..n {
                pb = pb + df[n + k] * dg[k] - df[k] * dg[n + k];
            }
            // 1/(2i) = -i/2
            Ok(Complex::new(T::zero(), -pb / T::lit(2.0)))
        }
        2 => {
            let step = T::lit(1e-4) * scale;
            let hf = hessian(&f, p, step);
            let hg = hessian(&g, p, step);
            let m = 2 * n;
            let (x, xi) = (|k: usize| k, |k: usize| n + k);
            let mut acc = T::zero();
            for k in 0..n {
                for l in 0..n {
                    acc = acc + hf[xi(k) * m + xi(l)] * hg[x(k) * m + x(l)]
                        - hf[xi(k) * m + x(l)] * hg[x(k) * m + xi(l)]
                        - hf[x(k) * m + xi(l)] * hg[xi(k) * m + x(l)]
                        + hf[x(k) * m + x(l)] * hg[xi(k) * m + xi(l)];
                }
            }
            // (1/2i)² = -1/4
            Ok(Complex::new(-acc / T::lit(4.0), T::zero()))
        }
        _ => Err(Error::UnsupportedOrder(j)),
    }
}

/// Residual of `∂h/∂t = -q h + ¼ Σ_k (λ_k ∂²_{ξ_k} h + ∂²_{x_k} h)`.
///
/// The time derivative is a central difference; the spatial ones are exact.
pub fn symbol_pde_residual<T: Scalar>(
    dec: &SpectralData<T>,
    p: &SymbolPoint<T>,
    window: &TimeWindow<T>,
) -> Result<T> {
    symbol_pde_residual_with_sign(dec, p, window, AFFINE_SIGN)
}

pub fn symbol_pde_residual_with_sign<T: Scalar>(
    dec: &SpectralData<T>,
    p: &SymbolPoint<T>,
    window: &TimeWindow<T>,
    sign: AffineSign,
) -> Result<T> {
    check_point(dec, p)?;
    let tau = window.tau();
    if tau <= T::zero() {
        return Err(Error::NonpositiveTime(tau.as_f64()));
    }
    let dt = (T::lit(1e-6) * (T::one() + tau)).min(tau / T::lit(2.0));
    let h_at = |s: T| log_symbol_at(dec, p, s, sign).exp();
    let dh_dt = (h_at(tau + dt) - h_at(tau - dt)) / (T::lit(2.0) * dt);
    let h = h_at(tau);

    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let mut diffusion = T::zero();
    for k in 0..dec.dim() {
        let lam = dec.lambdas()[k];
        let beta = beta_closed(lam, tau);
        let dx = two * lam * p.x[k] + dec.b()[k];
        let d2x = h * (beta * beta * dx * dx - two * lam * beta);
        let d2xi = h * (four * beta * beta * p.xi[k] * p.xi[k] - two * beta);
        diffusion = diffusion + lam * d2xi + d2x;
    }
    let q = symbol_q(dec, p)?;
    Ok((dh_dt + q * h - diffusion / four).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{decompose, QuadraticRate};

    fn modal(l: &[f64], b: &[f64], s: f64) -> SpectralData<f64> {
        SpectralData::from_modal(l.to_vec(), b.to_vec(), s).unwrap()
    }

    fn pt(x: &[f64], xi: &[f64]) -> SymbolPoint<f64> {
        SymbolPoint::new(x.to_vec(), xi.to_vec()).unwrap()
    }

    #[test]
    fn beta_examples() {
        assert!((beta_closed(4.0f64, 0.5) - 1f64.tanh() / 2.0).abs() < 1e-16);
        assert_eq!(beta_closed(1.0f64, 0.0), 0.0);
        assert_eq!(beta_closed(0.0f64, 2.5), 2.5);
    }

    #[test]
    fn beta_monotone_and_bounded() {
        let lam = 2.0f64;
        let mut prev = 0.0;
        for i in 1..200 {
            let b = beta_closed(lam, i as f64 * 0.05);
            assert!(b > prev || (b - 1.0 / lam.sqrt()).abs() < 1e-15);
            assert!(b <= 1.0 / lam.sqrt());
            prev = b;
        }
    }

    #[test]
    fn beta_continuous_in_lambda() {
        // tanh(√λτ)/√λ = τ - λτ³/3 + …, so C = τ³/3 ≤ 334 for τ ≤ 10.
        for &tau in &[0.1f64, 1.0, 10.0] {
            for &lam in &[1e-9f64, 1e-7, 1e-6] {
                let d = (beta_closed(lam, tau) - beta_closed(0.0, tau)).abs();
                assert!(d <= (tau.powi(3) / 3.0 + 1e-3) * lam, "{lam} {tau}");
            }
        }
    }

    #[test]
    fn log_alpha_examples() {
        let d = modal(&[1.0], &[0.0], 0.0);
        assert!((log_alpha_closed(&d, 1.0) - (1.0f64 / 1f64.cosh()).ln()).abs() < 1e-15);
        assert_eq!(log_alpha_closed(&d, 0.0), 0.0);
        let affine = modal(&[1.0], &[2.0], 0.0);
        assert_eq!(log_alpha_closed(&affine, 0.0), 0.0);
    }

    #[test]
    fn symbol_q_examples() {
        assert_eq!(
            symbol_q(&modal(&[1.0], &[0.0], 0.0), &pt(&[0.0], &[0.0])).unwrap(),
            0.0
        );
        assert_eq!(
            symbol_q(
                &modal(&[1.0, 4.0], &[0.0, 0.0], 0.0),
                &pt(&[1.0, 1.0], &[2.0, 0.0])
            )
            .unwrap(),
            9.0
        );
        assert_eq!(
            symbol_q(&modal(&[1.0], &[3.0], 5.0), &pt(&[2.0], &[0.0])).unwrap(),
            15.0
        );
        assert!(symbol_q(&modal(&[1.0], &[0.0], 0.0), &pt(&[0.0, 1.0], &[0.0, 1.0])).is_err());
    }

    #[test]
    fn symbol_h_examples() {
        let d = modal(&[1.0], &[0.0], 0.0);
        let w0 = TimeWindow::new(0.3, 0.3).unwrap();
        assert_eq!(symbol_h(&d, &pt(&[3.0], &[-2.0]), &w0).unwrap(), 1.0);
        let w1 = TimeWindow::elapsed(1.0).unwrap();
        let v = symbol_h(&d, &pt(&[0.0], &[0.0]), &w1).unwrap();
        assert!((v - 0.648_054_273_663_885_4).abs() < 1e-12);

        let heat = modal(&[0.0, 0.0], &[0.0, 0.0], 0.0);
        let w = TimeWindow::elapsed(0.7).unwrap();
        let p = pt(&[1.0, -2.0], &[0.5, 1.5]);
        let expect = (-0.7f64 * (0.25 + 2.25)).exp();
        assert!((symbol_h(&heat, &p, &w).unwrap() - expect).abs() < 1e-15);
    }

    #[test]
    fn symbol_does_not_overflow() {
        let d = modal(&[1.0], &[0.0], 0.0);
        let w = TimeWindow::elapsed(800.0).unwrap();
        let l = log_symbol_h(&d, &pt(&[0.0], &[0.0]), &w).unwrap();
        assert!(l.is_finite());
        assert!((l - (2f64.ln() - 800.0)).abs() < 1e-9);
    }

    #[test]
    fn symbol_pde_residuals() {
        let d = modal(&[1.0], &[0.0], 0.0);
        let p = pt(&[0.3], &[-0.2]);
        let r = symbol_pde_residual(&d, &p, &TimeWindow::elapsed(0.7).unwrap()).unwrap();
        assert!(r <= 1e-6, "{r}");

        let heat = modal(&[0.0], &[0.0], 0.0);
        let r = symbol_pde_residual(
            &heat,
            &pt(&[0.3], &[0.8]),
            &TimeWindow::elapsed(0.7).unwrap(),
        )
        .unwrap();
        assert!(r <= 1e-8, "{r}");

        let r = symbol_pde_residual(&d, &p, &TimeWindow::elapsed(1e-6).unwrap()).unwrap();
        assert!(r <= 1e-4, "{r}");
    }

    #[test]
    fn symbol_pde_selects_affine_sign() {
        let d = modal(&[1.0], &[2.0], 0.0);
        let p = pt(&[0.4], &[0.1]);
        let w = TimeWindow::elapsed(1.0).unwrap();
        let good = symbol_pde_residual_with_sign(&d, &p, &w, AFFINE_SIGN).unwrap();
        let bad = symbol_pde_residual_with_sign(&d, &p, &w, AFFINE_SIGN.flipped()).unwrap();
        assert!(good < 1e-6, "{good}");
        assert!(bad > 1e-2, "{bad}");
    }

    #[test]
    fn bracket_orders() {
        let f = |x: &[f64], xi: &[f64]| x[0] * x[0] + 3.0 * xi[0];
        let p = pt(&[0.5], &[0.25]);
        let b0 = poisson_bracket_j(f, f, &p, 0).unwrap();
        assert!((b0.re - 1.0).abs() < 1e-15);
        let b1 = poisson_bracket_j(f, f, &p, 1).unwrap();
        assert!(b1.norm() < 1e-9);
        assert!(matches!(
            poisson_bracket_j(f, f, &p, 3),
            Err(Error::UnsupportedOrder(3))
        ));
    }

    #[test]
    fn bracket_of_x_and_xi() {
        // {ξ, x} = ∂_ξ ξ · ∂_x x = 1, so {ξ, x}_1 = 1/(2i) = -i/2
        let p = pt(&[0.2], &[-0.7]);
        let b = poisson_bracket_j(
            |_x: &[f64], xi: &[f64]| xi[0],
            |x: &[f64], _xi: &[f64]| x[0],
            &p,
            1,
        )
        .unwrap();
        assert!(b.re.abs() < 1e-12);
        assert!((b.im + 0.5).abs() < 1e-9);
    }

    #[test]
    fn generator_commutes_with_symbol() {
        let rate = QuadraticRate::new(vec![4.0, 2.0, 2.0, 4.0], vec![0.0, 0.0], 0.0).unwrap();
        let dec = decompose(&rate).unwrap();
        let w = TimeWindow::elapsed(0.6).unwrap();
        let q = |x: &[f64], xi: &[f64]| {
            symbol_q(&dec, &SymbolPoint::new(x.to_vec(), xi.to_vec()).unwrap()).unwrap()
        };
        let h = |x: &[f64], xi: &[f64]| {
            symbol_h(
                &dec,
                &SymbolPoint::new(x.to_vec(), xi.to_vec()).unwrap(),
                &w,
            )
            .unwrap()
        };
        let p = pt(&[0.3, -0.5], &[0.1, 0.8]);
        let b1 = poisson_bracket_j(q, h, &p, 1).unwrap();
        assert!(b1.norm() < 1e-6, "{b1}");

        // {q, h}_2 = -½ Σ (∂²_x h + λ ∂²_ξ h) for the true symbol as well
        let b2 = poisson_bracket_j(q, h, &p, 2).unwrap();
        let tau = 0.6;
        let hv = h(&p.x, &p.xi);
        let mut expect = 0.0;
        for k in 0..2 {
            let lam = dec.lambdas()[k];
            let beta = beta_closed(lam, tau);
            let d2x = hv * (beta * beta * 4.0 * lam * lam * p.x[k] * p.x[k] - 2.0 * lam * beta);
            let d2xi = hv * (4.0 * beta * beta * p.xi[k] * p.xi[k] - 2.0 * beta);
            expect += -0.5 * (d2x + lam * d2xi);
        }
        assert!((b2.re - expect).abs() < 1e-6, "{} vs {expect}", b2.re);
        assert!(b2.im.abs() == 0.0);
    }
}
