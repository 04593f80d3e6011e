//! Discrete Schrödinger bridge between two densities on a shared grid,
//! solved by Sinkhorn scaling of the closed-form kernel.
//!
//! With `κ_ij = κ(z_i, z_j)` and trapezoid weights `w`, the potentials
//! `a`, `b` satisfy
//!
//! ```text
//! a_i Σ_j κ_ij w_j b_j = ρ0_i,     b_j Σ_i κ_ij w_i a_i = ρ1_j,
//! ```
//!
//! so the coupling density `a_i κ_ij b_j` has the endpoint densities as its
//! trapezoid marginals.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::KernelEvaluator;
use crate::quadrature::{integrate, Field, Grid};
use crate::special::pairwise_sum;
use crate::spectral::{decompose, to_modal, QuadraticRate};
use crate::weyl::TimeWindow;
use crate::Scalar;

/// Above this many entries the kernel matrix is evaluated on the fly.
pub const MAX_DENSE_ENTRIES: usize = 100_000_000;

/// Endpoint masses must be within this of 1.
pub const MASS_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct BridgeProblem<T> {
    pub grid: Grid<T>,
    pub rho0: Field<T>,
    pub rho1: Field<T>,
    pub rate: QuadraticRate<T>,
    pub window: TimeWindow<T>,
    pub tol: T,
    pub max_iter: usize,
}

impl<T: Scalar> BridgeProblem<T> {
    pub fn new(
        rho0: Field<T>,
        rho1: Field<T>,
        rate: QuadraticRate<T>,
        window: TimeWindow<T>,
    ) -> Result<Self> {
        if rho0.grid() != rho1.grid() {
            return Err(Error::InvalidProblem(
                "endpoints must share one grid".into(),
            ));
        }
        if rho0.grid().dim() != rate.dim() {
            return Err(Error::DimensionMismatch {
                expected: rate.dim(),
                got: rho0.grid().dim(),
            });
        }
        if !(window.tau() > T::zero()) {
            return Err(Error::NonpositiveTime(window.tau().as_f64()));
        }
        for (name, rho) in [("rho0", &rho0), ("rho1", &rho1)] {
            if rho.values().iter().any(|&v| v < T::zero()) {
                return Err(Error::InvalidProblem(format!("{name} has negative values")));
            }
            let mass = integrate(rho);
            if (mass - T::one()).abs() > T::lit(MASS_TOL) {
                return Err(Error::InvalidProblem(format!(
                    "{name} has trapezoid mass {mass}, expected 1"
                )));
            }
        }
        Ok(Self {
            grid: rho0.grid().clone(),
            rho0,
            rho1,
            rate,
            window,
            tol: T::lit(1e-8),
            max_iter: 5000,
        })
    }

    pub fn with_tolerance(mut self, tol: T, max_iter: usize) -> Self {
        self.tol = tol;
        self.max_iter = max_iter;
        self
    }

    /// Largest boundary value of either endpoint relative to its maximum.
    /// Values above `1e-10` mean the box cuts off visible mass.
    pub fn boundary_ratio(&self) -> T {
        [&self.rho0, &self.rho1]
            .iter()
            .map(|rho| {
                let max = rho.values().iter().fold(T::zero(), |m, &v| m.max(v));
                let edge = rho
                    .values()
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| self.grid.is_boundary(*i))
                    .fold(T::zero(), |m, (_, &v)| m.max(v));
                if max > T::zero() {
                    edge / max
                } else {
                    T::zero()
                }
            })
            .fold(T::zero(), |a, b| a.max(b))
    }
}

/// Rescales a nonnegative field to unit trapezoid mass; returns the factor applied.
pub fn normalize<T: Scalar>(rho: &Field<T>) -> Result<(Field<T>, T)> {
    let mass = integrate(rho);
    if !(mass > T::zero()) {
        return Err(Error::InvalidProblem(format!("density has mass {mass}")));
    }
    Ok((rho.scaled(mass.recip()), mass.recip()))
}

enum Storage<T> {
    Dense(Vec<T>),
    Lazy {
        ev: KernelEvaluator<T>,
        modal: Vec<Vec<T>>,
    },
}

/// `κ(z_i, z_j) e^{-shift}` on a grid, with trapezoid weights kept apart.
///
/// `shift` is the largest log-kernel value, so every stored entry is in (0, 1].
pub struct KernelMatrix<T> {
    storage: Storage<T>,
    weights: Vec<T>,
    shift: T,
    scale: T,
    m: usize,
}

impl<T: Scalar> KernelMatrix<T> {
    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.storage, Storage::Dense(_))
    }

    /// Largest log-kernel value, subtracted before exponentiating.
    pub fn log_shift(&self) -> T {
        self.shift
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Kernel entry without weight.
    pub fn kernel_entry(&self, i: usize, j: usize) -> T {
        let v = match &self.storage {
            Storage::Dense(g) => g[i * self.m + j],
            Storage::Lazy { ev, modal } => (ev
                .log_kernel(&modal[i], &modal[j])
                .expect("validated evaluator")
                - self.shift)
                .exp(),
        };
        v * self.scale
    }

    /// `K_ij = κ_ij w_j`.
    pub fn entry(&self, i: usize, j: usize) -> T {
        self.kernel_entry(i, j) * self.weights[j]
    }

    pub fn row(&self, i: usize) -> Vec<T> {
        (0..self.m).map(|j| self.entry(i, j)).collect()
    }

    /// Same matrix multiplied by `factor`.
    pub fn scaled(mut self, factor: T) -> Self {
        self.scale = self.scale * factor;
        self
    }

    /// `(K v)_i = Σ_j κ_ij w_j v_j`.
    pub fn apply(&self, v: &[T]) -> Vec<T> {
        let wv: Vec<T> = v.iter().zip(&self.weights).map(|(&a, &w)| a * w).collect();
        (0..self.m)
            .into_par_iter()
            .map(|i| {
                let terms: Vec<T> = (0..self.m)
                    .map(|j| self.kernel_entry(i, j) * wv[j])
                    .collect();
                pairwise_sum(&terms)
            })
            .collect()
    }

    /// Adjoint in the trapezoid inner product, `Σ_i κ_ij w_i v_i`.
    pub fn apply_adjoint(&self, v: &[T]) -> Vec<T> {
        let wv: Vec<T> = v.iter().zip(&self.weights).map(|(&a, &w)| a * w).collect();
        (0..self.m)
            .into_par_iter()
            .map(|j| {
                let terms: Vec<T> = (0..self.m)
                    .map(|i| self.kernel_entry(i, j) * wv[i])
                    .collect();
                pairwise_sum(&terms)
            })
            .collect()
    }
}

/// Evaluates the kernel on the problem grid in original coordinates.
pub fn build_kernel_matrix<T: Scalar>(problem: &BridgeProblem<T>) -> Result<KernelMatrix<T>> {
    let dec = decompose(&problem.rate)?;
    let ev = KernelEvaluator::new(dec.clone(), problem.window)?;
    let modal: Vec<Vec<T>> = problem
        .grid
        .points()
        .iter()
        .map(|z| to_modal(&dec, z))
        .collect::<Result<_>>()?;
    let m = modal.len();
    let entries = m
        .checked_mul(m)
        .ok_or_else(|| Error::CostGuard("grid too large".into()))?;

    let logs_row = |i: usize| -> Result<Vec<T>> {
        modal.iter().map(|y| ev.log_kernel(&modal[i], y)).collect()
    };
    let weights = problem.grid.weights();

    if entries <= MAX_DENSE_ENTRIES {
        let rows = (0..m)
            .into_par_iter()
            .map(logs_row)
            .collect::<Result<Vec<_>>>()?;
        let shift = rows
            .iter()
            .flatten()
            .fold(T::neg_infinity(), |acc, &v| acc.max(v));
        let g = rows
            .into_iter()
            .flatten()
            .map(|l| (l - shift).exp())
            .collect();
        Ok(KernelMatrix {
            storage: Storage::Dense(g),
            weights,
            shift,
            scale: T::one(),
            m,
        })
    } else {
        let shift = (0..m)
            .into_par_iter()
            .map(|i| logs_row(i).map(|r| r.into_iter().fold(T::neg_infinity(), T::max)))
            .collect::<Result<Vec<T>>>()?
            .into_iter()
            .fold(T::neg_infinity(), T::max);
        Ok(KernelMatrix {
            storage: Storage::Lazy { ev, modal },
            weights,
            shift,
            scale: T::one(),
            m,
        })
    }
}

#[derive(Debug, Clone)]
pub struct BridgeSolution<T> {
    /// Potential at `t0`, for the shifted kernel matrix.
    pub a: Field<T>,
    /// Potential at `t`, for the shifted kernel matrix.
    pub b: Field<T>,
    /// Max endpoint-marginal error after each iteration.
    pub residual_history: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
    /// `log_shift` of the kernel matrix the potentials refer to.
    pub log_shift: T,
}

impl<T: Scalar> BridgeSolution<T> {
    pub fn final_residual(&self) -> T {
        self.residual_history
            .last()
            .copied()
            .unwrap_or(T::infinity())
    }

    pub fn ensure_converged(&self) -> Result<&Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged {
                iterations: self.iterations,
                residual: self.final_residual().as_f64(),
            })
        }
    }

    /// Coupling density `a_i κ_ij b_j` (for the matrix the solution was built with).
    pub fn coupling(&self, k: &KernelMatrix<T>, i: usize, j: usize) -> T {
        self.a.values()[i] * k.kernel_entry(i, j) * self.b.values()[j]
    }
}

fn guarded_ratio<T: Scalar>(num: &[T], den: &[T]) -> Result<Vec<T>> {
    num.iter()
        .zip(den)
        .enumerate()
        .map(|(i, (&n, &d))| {
            if d < T::lit(1e-300) {
                Err(Error::DegenerateCoupling {
                    index: i,
                    value: d.as_f64(),
                })
            } else {
                Ok(n / d)
            }
        })
        .collect()
}

fn max_error<T: Scalar>(scale: &[T], image: &[T], target: &[T]) -> T {
    scale
        .iter()
        .zip(image)
        .zip(target)
        .fold(T::zero(), |m, ((&s, &k), &t)| m.max((s * k - t).abs()))
}

/// Sinkhorn iteration on a prebuilt kernel matrix.
///
/// Each iteration updates `a` then `b`. Hitting `max_iter` is not an error:
/// the partial solution comes back with `converged = false`.
pub fn sinkhorn_with_matrix<T: Scalar>(
    problem: &BridgeProblem<T>,
    k: &KernelMatrix<T>,
) -> Result<BridgeSolution<T>> {
    let rho0 = problem.rho0.values();
    let rho1 = problem.rho1.values();
    let mut a = vec![T::one(); k.len()];
    let mut b = vec![T::one(); k.len()];
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < problem.max_iter {
        iterations += 1;
        let kb = k.apply(&b);
        a = guarded_ratio(rho0, &kb)?;
        let ka = k.apply_adjoint(&a);
        b = guarded_ratio(rho1, &ka)?;

        let err0 = max_error(&a, &k.apply(&b), rho0);
        let err1 = max_error(&b, &ka, rho1);
        let residual = err0.max(err1);
        history.push(residual);
        if residual <= problem.tol {
            converged = true;
            break;
        }
    }

    // Potentials are defined up to (γa, b/γ); pick γ giving equal weighted mass.
    let w = problem.grid.weights();
    let mass =
        |v: &[T]| pairwise_sum(&v.iter().zip(&w).map(|(&x, &wi)| x * wi).collect::<Vec<T>>());
    let gamma = (mass(&b) / mass(&a)).sqrt();
    if gamma.is_finite() && gamma > T::zero() {
        a.iter_mut().for_each(|v| *v = *v * gamma);
        b.iter_mut().for_each(|v| *v = *v / gamma);
    }

    Ok(BridgeSolution {
        a: Field::new(problem.grid.clone(), a)?,
        b: Field::new(problem.grid.clone(), b)?,
        residual_history: history,
        iterations,
        converged,
        log_shift: k.log_shift(),
    })
}

pub fn sinkhorn_solve<T: Scalar>(problem: &BridgeProblem<T>) -> Result<BridgeSolution<T>> {
    let k = build_kernel_matrix(problem)?;
    sinkhorn_with_matrix(problem, &k)
}

/// Bridge marginal at an intermediate time.
#[derive(Debug, Clone)]
pub struct Marginal<T> {
    pub t: T,
    pub density: Field<T>,
    /// Factor applied to reach unit mass; 1 up to quadrature error.
    pub renormalization: T,
}

fn log_sum_exp<T: Scalar>(terms: &[T]) -> T {
    let max = terms.iter().fold(T::neg_infinity(), |m, &v| m.max(v));
    if max == T::neg_infinity() {
        return max;
    }
    let shifted: Vec<T> = terms.iter().map(|&v| (v - max).exp()).collect();
    max + pairwise_sum(&shifted).ln()
}

/// `ρ(t_mid, x) ∝ [Σ_i κ(t0, z_i, t_mid, x) a_i w_i] · [Σ_j κ(t_mid, x, t, z_j) b_j w_j]`.
///
/// At the endpoints the delta initial condition replaces the degenerate
/// kernel, giving `a ⊙ K b` and `b ⊙ K* a`.
pub fn interpolate_marginal<T: Scalar>(
    problem: &BridgeProblem<T>,
    solution: &BridgeSolution<T>,
    t_mid: T,
) -> Result<Marginal<T>> {
    solution.ensure_converged()?;
    let t0 = problem.window.t0();
    let t1 = problem.window.t();
    if !(t_mid >= t0 && t_mid <= t1) {
        return Err(Error::InvalidWindow {
            t0: t0.as_f64(),
            t: t_mid.as_f64(),
        });
    }
    let a = solution.a.values();
    let b = solution.b.values();
    let raw = if t_mid == t0 || t_mid == t1 {
        let k = build_kernel_matrix(problem)?;
        if k.log_shift() != solution.log_shift {
            return Err(Error::InvalidProblem(
                "solution does not match problem".into(),
            ));
        }
        if t_mid == t0 {
            k.apply(b).iter().zip(a).map(|(&kb, &ai)| ai * kb).collect()
        } else {
            k.apply_adjoint(a)
                .iter()
                .zip(b)
                .map(|(&ka, &bj)| bj * ka)
                .collect()
        }
    } else {
        let dec = decompose(&problem.rate)?;
        let fwd = KernelEvaluator::new(dec.clone(), TimeWindow::new(t0, t_mid)?)?;
        let bwd = KernelEvaluator::new(dec.clone(), TimeWindow::new(t_mid, t1)?)?;
        let modal: Vec<Vec<T>> = problem
            .grid
            .points()
            .iter()
            .map(|z| to_modal(&dec, z))
            .collect::<Result<_>>()?;
        let w = problem.grid.weights();
        let log_aw: Vec<T> = a.iter().zip(&w).map(|(&v, &wi)| (v * wi).ln()).collect();
        let log_bw: Vec<T> = b.iter().zip(&w).map(|(&v, &wi)| (v * wi).ln()).collect();
        modal
            .par_iter()
            .map(|x| {
                let fwd_terms = modal
                    .iter()
                    .zip(&log_aw)
                    .map(|(z, &l)| fwd.log_kernel(z, x).map(|k| k + l))
                    .collect::<Result<Vec<T>>>()?;
                let bwd_terms = modal
                    .iter()
                    .zip(&log_bw)
                    .map(|(z, &l)| bwd.log_kernel(x, z).map(|k| k + l))
                    .collect::<Result<Vec<T>>>()?;
                let log_rho =
                    log_sum_exp(&fwd_terms) + log_sum_exp(&bwd_terms) - solution.log_shift;
                Ok(log_rho.exp())
            })
            .collect::<Result<Vec<T>>>()?
    };
    let field = Field::new(problem.grid.clone(), raw)?;
    let (density, renormalization) = normalize(&field)?;
    Ok(Marginal {
        t: t_mid,
        density,
        renormalization,
    })
}
