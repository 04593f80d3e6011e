//! Quadratic reaction rates and their modal (eigen) coordinates.
//!
//! The rate `½ zᵀQz + rᵀz + s` is diagonalised as `½Q = Vᵀ Λ V`. In the
//! coordinates `x = V z` the Laplacian is unchanged and the rate splits into
//! independent per-mode terms `λ_k x_k² + b_k x_k + s/n` with `b = V r`.

use crate::error::{Error, Result};
use crate::Scalar;

/// Reaction rate `½ zᵀQz + rᵀz + s` with `Q` symmetric positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticRate<T> {
    n: usize,
    q: Vec<T>,
    r: Vec<T>,
    s: T,
}

impl<T: Scalar> QuadraticRate<T> {
    /// `q` is row-major `n × n`. Symmetry is checked here, semidefiniteness in
    /// [`decompose`].
    pub fn new(q: Vec<T>, r: Vec<T>, s: T) -> Result<Self> {
        let n = r.len();
        if n == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        if q.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: q.len(),
            });
        }
        if q.iter().chain(r.iter()).any(|v| !v.is_finite()) || !s.is_finite() {
            return Err(Error::NonSymmetric(f64::NAN));
        }
        let mut asym = T::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                asym = asym.max((q[i * n + j] - q[j * n + i]).abs());
            }
        }
        if asym > T::tol_sym() {
            return Err(Error::NonSymmetric(asym.as_f64()));
        }
        Ok(Self { n, q, r, s })
    }

    pub fn from_rows(rows: &[Vec<T>], r: Vec<T>, s: T) -> Result<Self> {
        let n = r.len();
        if rows.len() != n || rows.iter().any(|row| row.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: rows.len(),
            });
        }
        Self::new(rows.concat(), r, s)
    }

    /// Zero rate: the pure heat equation in `n` dimensions.
    pub fn heat(n: usize) -> Self {
        Self {
            n,
            q: vec![T::zero(); n * n],
            r: vec![T::zero(); n],
            s: T::zero(),
        }
    }

    /// Diagonal `Q` with no affine part.
    pub fn diagonal(diag: &[T]) -> Self {
        let n = diag.len();
        let mut q = vec![T::zero(); n * n];
        for (k, &d) in diag.iter().enumerate() {
            q[k * n + k] = d;
        }
        Self {
            n,
            q,
            r: vec![T::zero(); n],
            s: T::zero(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> &[T] {
        &self.q
    }

    pub fn r(&self) -> &[T] {
        &self.r
    }

    pub fn s(&self) -> T {
        self.s
    }

    /// Value of the rate at `z` in original coordinates.
    pub fn eval(&self, z: &[T]) -> T {
        let n = self.n;
        let quad: T = self
            .q
            .chunks(n)
            .zip(z)
            .map(|(row, &zi)| zi * row.iter().zip(z).map(|(&q, &zj)| q * zj).sum::<T>())
            .sum();
        let lin: T = self.r.iter().zip(z).map(|(&a, &b)| a * b).sum();
        T::lit(0.5) * quad + lin + self.s
    }
}

/// Modal data of a rate: `½Q = Vᵀ diag(λ) V`, `b = V r`, and the
/// completing-the-square constants `c_k = b_k²/(4λ_k) − s/n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData<T> {
    n: usize,
    /// Row-major; row `k` is the eigenvector for `lambdas[k]`.
    v: Vec<T>,
    lambdas: Vec<T>,
    b: Vec<T>,
    s: T,
    c: Vec<T>,
}

impl<T: Scalar> SpectralData<T> {
    /// Builds modal data directly from eigenvalues, with `V = I`.
    ///
    /// Applies the same clamping and singular-mode rules as [`decompose`].
    pub fn from_modal(lambdas: Vec<T>, b: Vec<T>, s: T) -> Result<Self> {
        let n = lambdas.len();
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: b.len(),
            });
        }
        let mut v = vec![T::zero(); n * n];
        for k in 0..n {
            v[k * n + k] = T::one();
        }
        Self::assemble(v, lambdas, b, s)
    }

    fn assemble(v: Vec<T>, mut lambdas: Vec<T>, mut b: Vec<T>, s: T) -> Result<Self> {
        let n = lambdas.len();
        let tol = T::tol_eig();
        for lam in lambdas.iter_mut() {
            if *lam < -tol {
                return Err(Error::NotPsd(lam.as_f64()));
            }
            if lam.abs() < tol {
                *lam = T::zero();
            }
        }
        let per_mode = s / T::from_usize(n).expect("dimension fits scalar");
        let mut c = Vec::with_capacity(n);
        for k in 0..n {
            if lambdas[k] > tol {
                c.push(b[k] * b[k] / (T::lit(4.0) * lambdas[k]) - per_mode);
            } else if b[k].abs() <= tol {
                b[k] = T::zero();
                c.push(-per_mode);
            } else {
                return Err(Error::SingularAffineMode {
                    mode: k,
                    b: b[k].as_f64(),
                });
            }
        }
        Ok(Self {
            n,
            v,
            lambdas,
            b,
            s,
            c,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Row-major orthogonal matrix; rows are eigenvectors of `½Q`.
    pub fn v(&self) -> &[T] {
        &self.v
    }

    pub fn lambdas(&self) -> &[T] {
        &self.lambdas
    }

    pub fn b(&self) -> &[T] {
        &self.b
    }

    pub fn s(&self) -> T {
        self.s
    }

    pub fn c(&self) -> &[T] {
        &self.c
    }

    /// `s/n`, the share of the constant offset carried by each mode.
    pub fn s_per_mode(&self) -> T {
        self.s / T::from_usize(self.n).expect("dimension fits scalar")
    }

    pub fn has_affine_part(&self) -> bool {
        self.s != T::zero() || self.b.iter().any(|&b| b != T::zero())
    }

    pub fn is_heat(&self) -> bool {
        !self.has_affine_part() && self.lambdas.iter().all(|&l| l == T::zero())
    }

    /// Modal rate `Σ λ_k x_k² + b_k x_k + s/n` at modal point `x`.
    pub fn modal_rate(&self, x: &[T]) -> T {
        let per_mode = self.s_per_mode();
        (0..self.n)
            .map(|k| self.lambdas[k] * x[k] * x[k] + self.b[k] * x[k] + per_mode)
            .sum()
    }

    /// Same modal data with every `V` replaced; used to test basis invariance.
    pub fn with_basis(&self, v: Vec<T>) -> Result<Self> {
        if v.len() != self.n * self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n * self.n,
                got: v.len(),
            });
        }
        Ok(Self { v, ..self.clone() })
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: len,
            });
        }
        Ok(())
    }
}

/// Decomposes `½Q` by cyclic Jacobi rotations.
///
/// Eigenvalues come out ascending and each eigenvector has its first
/// nonzero component positive, so identical input gives identical output.
pub fn decompose<T: Scalar>(rate: &QuadraticRate<T>) -> Result<SpectralData<T>> {
    let n = rate.n;
    let half: Vec<T> = rate.q.iter().map(|&q| T::lit(0.5) * q).collect();
    let (eigvals, vecs) = jacobi_eigen(&half, n);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eigvals[i]
            .partial_cmp(&eigvals[j])
            .expect("finite eigenvalues")
            .then(i.cmp(&j))
    });

    let sign_tol = T::epsilon() * T::lit(16.0);
    let mut v = vec![T::zero(); n * n];
    let mut lambdas = Vec::with_capacity(n);
    for (row, &col) in order.iter().enumerate() {
        lambdas.push(eigvals[col]);
        let mut flip = false;
        for i in 0..n {
            let comp = vecs[i * n + col];
            if comp.abs() > sign_tol {
                flip = comp < T::zero();
                break;
            }
        }
        for i in 0..n {
            let comp = vecs[i * n + col];
            v[row * n + i] = if flip { -comp } else { comp };
        }
    }

    let b: Vec<T> = (0..n)
        .map(|k| (0..n).map(|i| v[k * n + i] * rate.r[i]).sum())
        .collect();
    SpectralData::assemble(v, lambdas, b, rate.s)
}

/// Symmetric eigen-decomposition `A = W diag(d) Wᵀ`; returns `(d, W)` with
/// eigenvectors in the columns of the row-major `W`.
pub fn jacobi_eigen<T: Scalar>(a: &[T], n: usize) -> (Vec<T>, Vec<T>) {
    let mut a = a.to_vec();
    let mut w = vec![T::zero(); n * n];
    for i in 0..n {
        w[i * n + i] = T::one();
    }
    let frob = a.iter().map(|&x| x * x).sum::<T>().sqrt();
    let threshold = T::jacobi_tol() * frob;
    const MAX_SWEEPS: usize = 100;

    for _ in 0..MAX_SWEEPS {
        let mut off = T::zero();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off = off + a[i * n + j] * a[i * n + j];
                }
            }
        }
        if off.sqrt() <= threshold || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = T::zero();
                a[q * n + p] = T::zero();
                for k in 0..n {
                    let wkp = w[k * n + p];
                    let wkq = w[k * n + q];
                    w[k * n + p] = c * wkp - s * wkq;
                    w[k * n + q] = s * wkp + c * wkq;
                }
            }
        }
    }
    let d = (0..n).map(|i| a[i * n + i]).collect();
    (d, w)
}

/// Original coordinates to modal: `x = V z`.
pub fn to_modal<T: Scalar>(dec: &SpectralData<T>, z: &[T]) -> Result<Vec<T>> {
    dec.check_dim(z.len())?;
    let n = dec.n;
    Ok((0..n)
        .map(|i| (0..n).map(|j| dec.v[i * n + j] * z[j]).sum())
        .collect())
}

/// Inverse of [`to_modal`]: `z = Vᵀ x`.
pub fn from_modal<T: Scalar>(dec: &SpectralData<T>, x: &[T]) -> Result<Vec<T>> {
    dec.check_dim(x.len())?;
    let n = dec.n;
    Ok((0..n)
        .map(|j| (0..n).map(|i| dec.v[i * n + j] * x[i]).sum())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn max_abs(a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn diagonal_rate_is_already_modal() {
        let rate = QuadraticRate::diagonal(&[2.0, 8.0]);
        let dec = decompose(&rate).unwrap();
        assert_eq!(dec.lambdas(), &[1.0, 4.0]);
        assert_eq!(dec.v(), &[1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn coupled_two_by_two() {
        let rate =
            QuadraticRate::<f64>::new(vec![4.0, 2.0, 2.0, 4.0], vec![0.0, 0.0], 0.0).unwrap();
        let dec = decompose(&rate).unwrap();
        assert!((dec.lambdas()[0] - 1.0).abs() < 1e-14);
        assert!((dec.lambdas()[1] - 3.0).abs() < 1e-14);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(max_abs(dec.v(), &[h, -h, h, h]) < 1e-14);
    }

    #[test]
    fn identity_curvature() {
        let rate = QuadraticRate::diagonal(&[2.0; 3]);
        let dec = decompose(&rate).unwrap();
        assert_eq!(dec.lambdas(), &[1.0; 3]);
    }

    #[test]
    fn modal_round_trip_examples() {
        let rate =
            QuadraticRate::<f64>::new(vec![4.0, 2.0, 2.0, 4.0], vec![0.0, 0.0], 0.0).unwrap();
        let dec = decompose(&rate).unwrap();
        let x = to_modal(&dec, &[1.0, 1.0]).unwrap();
        assert!(x[0].abs() < 1e-15);
        assert!((x[1] - 2f64.sqrt()).abs() < 1e-15);
        let z = from_modal(&dec, &x).unwrap();
        assert!(max_abs(&z, &[1.0, 1.0]) < 1e-13);

        let id = decompose(&QuadraticRate::<f64>::heat(2)).unwrap();
        assert_eq!(to_modal(&id, &[1.0, 2.0]).unwrap(), vec![1.0, 2.0]);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            QuadraticRate::new(vec![1.0, 0.5, 0.4, 1.0], vec![0.0, 0.0], 0.0),
            Err(Error::NonSymmetric(_))
        ));
        let indefinite =
            QuadraticRate::new(vec![1.0, 0.0, 0.0, -1.0], vec![0.0, 0.0], 0.0).unwrap();
        assert!(matches!(decompose(&indefinite), Err(Error::NotPsd(_))));
        let singular = QuadraticRate::new(vec![0.0], vec![1.0], 0.0).unwrap();
        assert!(matches!(
            decompose(&singular),
            Err(Error::SingularAffineMode { mode: 0, .. })
        ));
        let dec = decompose(&QuadraticRate::<f64>::heat(2)).unwrap();
        assert!(matches!(
            to_modal(&dec, &[1.0]),
            Err(Error::DimensionMismatch {
                expected: 2,
                got: 1
            })
        ));
    }

    #[test]
    fn constants_for_zero_modes() {
        let rate =
            QuadraticRate::<f64>::new(vec![0.0, 0.0, 0.0, 2.0], vec![0.0, 2.0], 3.0).unwrap();
        let dec = decompose(&rate).unwrap();
        assert_eq!(dec.lambdas(), &[0.0, 1.0]);
        assert_eq!(dec.c()[0], -1.5);
        assert!((dec.c()[1] - (1.0 - 1.5)).abs() < 1e-15);
    }

    #[test]
    fn f32_decomposition() {
        let rate =
            QuadraticRate::<f32>::new(vec![4.0, 2.0, 2.0, 4.0], vec![0.0, 0.0], 0.0).unwrap();
        let dec = decompose(&rate).unwrap();
        assert!((dec.lambdas()[0] - 1.0).abs() < 1e-5);
        assert!((dec.lambdas()[1] - 3.0).abs() < 1e-5);
    }

    fn random_psd(n: usize, entries: &[f64]) -> Vec<f64> {
        // Q = AᵀA
        let mut q = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                q[i * n + j] = (0..n)
                    .map(|k| entries[k * n + i] * entries[k * n + j])
                    .sum();
            }
        }
        for i in 0..n {
            for j in 0..i {
                q[i * n + j] = q[j * n + i];
            }
        }
        q
    }

    proptest! {
        #[test]
        fn reconstruction_and_orthogonality(
            n in 1usize..=8,
            entries in proptest::collection::vec(-2.0f64..2.0, 64),
            z in proptest::collection::vec(-5.0f64..5.0, 8),
        ) {
            let q = random_psd(n, &entries);
            let rate = QuadraticRate::new(q.clone(), vec![0.0; n], 0.0).unwrap();
            let dec = decompose(&rate).unwrap();
            let v = dec.v();
            let qmax = q.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            for i in 0..n {
                for j in 0..n {
                    let vvt: f64 = (0..n).map(|k| v[i * n + k] * v[j * n + k]).sum();
                    let id = if i == j { 1.0 } else { 0.0 };
                    prop_assert!((vvt - id).abs() <= 1e-10);
                    let rec: f64 = (0..n).map(|k| v[k * n + i] * dec.lambdas()[k] * v[k * n + j]).sum();
                    prop_assert!((rec - 0.5 * q[i * n + j]).abs() <= 1e-9 * (1.0 + qmax));
                }
            }
            for w in dec.lambdas().windows(2) {
                prop_assert!(w[0] <= w[1]);
            }
            let z = &z[..n];
            let back = from_modal(&dec, &to_modal(&dec, z).unwrap()).unwrap();
            prop_assert!(max_abs(&back, z) <= 1e-13);

            let again = decompose(&rate).unwrap();
            prop_assert_eq!(again, dec);
        }
    }
}
