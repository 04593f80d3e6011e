//! Overflow-free hyperbolic primitives used by the symbol and kernel closed forms.

use crate::Scalar;

/// `log(sinh z)` for `z > 0`.
pub fn log_sinh<T: Scalar>(z: T) -> T {
    if z > T::lit(20.0) {
        z + (-(T::lit(-2.0) * z).exp()).ln_1p() - T::LN_2()
    } else {
        z.sinh().ln()
    }
}

/// `log(cosh z)`, valid for all finite `z`.
pub fn log_cosh<T: Scalar>(z: T) -> T {
    let a = z.abs();
    if a > T::lit(20.0) {
        a + (T::lit(-2.0) * a).exp().ln_1p() - T::LN_2()
    } else {
        a.cosh().ln()
    }
}

/// `coth(2θ)`, with a Laurent expansion for tiny `θ`.
pub fn coth2<T: Scalar>(theta: T) -> T {
    let two = T::lit(2.0);
    if theta < T::lit(1e-8) {
        T::one() / (two * theta) + two * theta / T::lit(3.0)
    } else {
        T::one() / (two * theta).tanh()
    }
}

/// `csch(2θ)`, with a Laurent expansion for tiny `θ`.
pub fn csch2<T: Scalar>(theta: T) -> T {
    let two = T::lit(2.0);
    if theta < T::lit(1e-8) {
        T::one() / (two * theta) - theta / T::lit(3.0)
    } else if theta > T::lit(10.0) {
        // 2 e^{-2θ} / (1 - e^{-4θ})
        let e = (-(two * theta)).exp();
        two * e / (T::one() - e * e)
    } else {
        T::one() / (two * theta).sinh()
    }
}

/// `tanh(√λ τ)/√λ`, continuous through `λ → 0` where it tends to `τ`.
pub fn tanh_over_sqrt<T: Scalar>(lambda: T, tau: T) -> T {
    if lambda <= T::tol_eig() {
        tau
    } else {
        let m = lambda.sqrt();
        (m * tau).tanh() / m
    }
}

/// Pairwise summation in a fixed order, independent of thread count.
pub fn pairwise_sum<T: Scalar>(v: &[T]) -> T {
    const BLOCK: usize = 32;
    if v.len() <= BLOCK {
        let mut acc = T::zero();
        for &x in v {
            acc = acc + x;
        }
        acc
    } else {
        let mid = v.len() / 2;
        pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_sinh_branches_agree() {
        for &z in &[0.5f64, 5.0, 19.999, 20.001, 30.0] {
            let direct = z.sinh().ln();
            assert!(
                (log_sinh(z) - direct).abs() <= 1e-14 * direct.abs().max(1.0),
                "{z}"
            );
        }
        // no overflow far beyond cosh's range
        assert!((log_sinh(800.0f64) - (800.0 - 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn log_cosh_large_argument() {
        assert!((log_cosh(1000.0f64) - (1000.0 - 2f64.ln())).abs() < 1e-12);
        assert!((log_cosh(-3.0f64) - 3f64.cosh().ln()).abs() < 1e-15);
    }

    #[test]
    fn laurent_branches_continuous() {
        let below = 0.999_999e-8f64;
        let above = 1.000_001e-8f64;
        assert!((coth2(below) * below - coth2(above) * above).abs() < 1e-12);
        assert!((csch2(below) * below - csch2(above) * above).abs() < 1e-12);
        let t = 12.0f64;
        assert!((csch2(t) - 1.0 / (2.0 * t).sinh()).abs() < 1e-24);
    }

    #[test]
    fn tanh_over_sqrt_limit() {
        assert_eq!(tanh_over_sqrt(0.0f64, 2.5), 2.5);
        assert!((tanh_over_sqrt(1e-9f64, 2.0) - 2.0).abs() < 1e-8);
    }

    #[test]
    fn pairwise_sum_matches_naive() {
        let v: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 499_500.0);
    }
}
