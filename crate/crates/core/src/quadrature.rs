//! Tensor-product grids, trapezoid quadrature, Fourier inversion of symbols
//! and kernel propagation.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::KernelEvaluator;
use crate::special::pairwise_sum;
use crate::spectral::{decompose, to_modal, QuadraticRate, SpectralData};
use crate::weyl::{log_symbol_h, SymbolPoint, TimeWindow};
use crate::Scalar;

/// Hard cap on grid points.
pub const MAX_GRID_POINTS: usize = 10_000_000;
/// Cap on points per side of a dense kernel operation.
pub const MAX_DENSE_POINTS: usize = 100_000;
/// Highest dimension supported for grid operations.
pub const MAX_GRID_DIM: usize = 3;

/// Uniform tensor-product grid on `Π [-L_k, L_k]` with an odd node count per
/// axis so that the origin is a node. Flattened in row-major order (last axis
/// fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    half_widths: Vec<T>,
    counts: Vec<usize>,
}

impl<T: Scalar> Grid<T> {
    pub fn new(half_widths: Vec<T>, counts: Vec<usize>) -> Result<Self> {
        if half_widths.is_empty() || half_widths.len() != counts.len() {
            return Err(Error::InvalidGrid(format!(
                "{} half-widths for {} axes",
                half_widths.len(),
                counts.len()
            )));
        }
        if half_widths.len() > MAX_GRID_DIM {
            return Err(Error::CostGuard(format!(
                "grid dimension {} exceeds {MAX_GRID_DIM}",
                half_widths.len()
            )));
        }
        for (&l, &m) in half_widths.iter().zip(&counts) {
            if !(l > T::zero() && l.is_finite()) {
                return Err(Error::InvalidGrid(format!(
                    "half-width {l} must be positive"
                )));
            }
            if m < 3 || m % 2 == 0 {
                return Err(Error::InvalidGrid(format!(
                    "node count {m} must be odd and >= 3"
                )));
            }
        }
        let total = counts
            .iter()
            .try_fold(1usize, |acc, &m| acc.checked_mul(m))
            .unwrap_or(usize::MAX);
        if total > MAX_GRID_POINTS {
            return Err(Error::CostGuard(format!(
                "{total} grid points exceed {MAX_GRID_POINTS}"
            )));
        }
        Ok(Self {
            half_widths,
            counts,
        })
    }

    /// One-dimensional grid on `[-l, l]`.
    pub fn line(l: T, m: usize) -> Result<Self> {
        Self::new(vec![l], vec![m])
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    pub fn half_widths(&self) -> &[T] {
        &self.half_widths
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self, axis: usize) -> T {
        T::lit(2.0) * self.half_widths[axis]
            / T::from_usize(self.counts[axis] - 1).expect("count fits")
    }

    pub fn axis_nodes(&self, axis: usize) -> Vec<T> {
        let h = self.spacing(axis);
        let l = self.half_widths[axis];
        let m = self.counts[axis];
        let mid = (m - 1) / 2;
        (0..m)
            .map(|i| {
                // symmetric construction keeps node i and m-1-i exact negatives
                if i < mid {
                    -(l - T::from_usize(i).expect("index fits") * h)
                } else if i == mid {
                    T::zero()
                } else {
                    l - T::from_usize(m - 1 - i).expect("index fits") * h
                }
            })
            .collect()
    }

    fn axis_unit_weights(&self, axis: usize) -> Vec<T> {
        let m = self.counts[axis];
        (0..m)
            .map(|i| {
                if i == 0 || i == m - 1 {
                    T::lit(0.5)
                } else {
                    T::one()
                }
            })
            .collect()
    }

    /// Product of the spacings.
    pub fn cell_volume(&self) -> T {
        (0..self.dim()).fold(T::one(), |acc, a| acc * self.spacing(a))
    }

    /// Trapezoid weights divided by [`Grid::cell_volume`] (products of 1 and ½).
    pub fn unit_weights(&self) -> Vec<T> {
        let axes: Vec<Vec<T>> = (0..self.dim()).map(|a| self.axis_unit_weights(a)).collect();
        (0..self.len())
            .map(|i| {
                self.unravel(i)
                    .iter()
                    .enumerate()
                    .fold(T::one(), |acc, (a, &j)| acc * axes[a][j])
            })
            .collect()
    }

    /// Multi-index of flat index `idx`.
    pub fn unravel(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim()];
        for axis in (0..self.dim()).rev() {
            out[axis] = idx % self.counts[axis];
            idx /= self.counts[axis];
        }
        out
    }

    /// All nodes, flattened.
    pub fn points(&self) -> Vec<Vec<T>> {
        let axes: Vec<Vec<T>> = (0..self.dim()).map(|a| self.axis_nodes(a)).collect();
        (0..self.len())
            .map(|i| {
                self.unravel(i)
                    .iter()
                    .enumerate()
                    .map(|(a, &j)| axes[a][j])
                    .collect()
            })
            .collect()
    }

    /// Tensor-product trapezoid weights, flattened.
    pub fn weights(&self) -> Vec<T> {
        let vol = self.cell_volume();
        self.unit_weights().into_iter().map(|w| w * vol).collect()
    }

    /// True for nodes on the outer boundary of the box.
    pub fn is_boundary(&self, idx: usize) -> bool {
        self.unravel(idx)
            .iter()
            .zip(&self.counts)
            .any(|(&j, &m)| j == 0 || j == m - 1)
    }
}

/// Samples on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    grid: Grid<T>,
    values: Vec<T>,
}

impl<T: Scalar> Field<T> {
    pub fn new(grid: Grid<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidField(format!(
                "{} values for {} grid points",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidField(format!("non-finite value at node {i}")));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn<F: Fn(&[T]) -> T>(grid: Grid<T>, f: F) -> Result<Self> {
        let values = grid.points().iter().map(|p| f(p)).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| v * factor).collect(),
        }
    }

    /// Trapezoid mass, mean and per-axis variance.
    pub fn moments(&self) -> Moments<T> {
        let mass = integrate(self);
        let pts = self.grid.points();
        let w = self.grid.weights();
        let n = self.grid.dim();
        let mean: Vec<T> = (0..n)
            .map(|a| {
                let terms: Vec<T> = (0..pts.len())
                    .map(|i| w[i] * self.values[i] * pts[i][a])
                    .collect();
                pairwise_sum(&terms) / mass
            })
            .collect();
        let variance = (0..n)
            .map(|a| {
                let terms: Vec<T> = (0..pts.len())
                    .map(|i| {
                        let d = pts[i][a] - mean[a];
                        w[i] * self.values[i] * d * d
                    })
                    .collect();
                pairwise_sum(&terms) / mass
            })
            .collect();
        Moments {
            mass,
            mean,
            variance,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Moments<T> {
    pub mass: T,
    pub mean: Vec<T>,
    pub variance: Vec<T>,
}

/// Tensor-product trapezoid rule.
pub fn integrate<T: Scalar>(f: &Field<T>) -> T {
    let w = f.grid.unit_weights();
    let terms: Vec<T> = w.iter().zip(&f.values).map(|(&a, &b)| a * b).collect();
    pairwise_sum(&terms) * f.grid.cell_volume()
}

/// Result of a numerical symbol-to-kernel inversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inversion<T> {
    /// `(2π)^{-n} ∫ h cos⟨x - y, ξ⟩ dξ`.
    pub value: T,
    /// The sine part, zero for symbols even in `ξ`.
    pub sine_residual: T,
    /// `max |h|` on the boundary over `max |h|`.
    pub boundary_ratio: T,
}

impl<T: Scalar> Inversion<T> {
    /// The ξ-box cut off a non-negligible part of the symbol.
    pub fn truncation_warning(&self) -> bool {
        self.boundary_ratio > T::lit(1e-12)
    }
}

/// Kernel value at `(x, y)` (modal coordinates) by trapezoid inversion of the
/// symbol evaluated at the midpoint `(x + y)/2`.
pub fn symbol_to_kernel_numeric<T: Scalar>(
    dec: &SpectralData<T>,
    window: &TimeWindow<T>,
    x: &[T],
    y: &[T],
    xi_grid: &Grid<T>,
) -> Result<Inversion<T>> {
    let n = dec.dim();
    if n > 2 {
        return Err(Error::CostGuard(format!(
            "Fourier inversion limited to n <= 2, got {n}"
        )));
    }
    for len in [x.len(), y.len(), xi_grid.dim()] {
        if len != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: len,
            });
        }
    }
    let half = T::lit(0.5);
    let mid: Vec<T> = x.iter().zip(y).map(|(&a, &b)| half * (a + b)).collect();
    let diff: Vec<T> = x.iter().zip(y).map(|(&a, &b)| a - b).collect();
    let pts = xi_grid.points();
    let w = xi_grid.weights();

    let mut cos_terms = Vec::with_capacity(pts.len());
    let mut sin_terms = Vec::with_capacity(pts.len());
    let mut h_max = T::zero();
    let mut h_boundary = T::zero();
    for (i, xi) in pts.iter().enumerate() {
        let p = SymbolPoint::new(mid.clone(), xi.clone())?;
        let h = log_symbol_h(dec, &p, window)?.exp();
        let phase: T = diff.iter().zip(xi).map(|(&d, &k)| d * k).sum();
        cos_terms.push(w[i] * h * phase.cos());
        sin_terms.push(w[i] * h * phase.sin());
        h_max = h_max.max(h.abs());
        if xi_grid.is_boundary(i) {
            h_boundary = h_boundary.max(h.abs());
        }
    }
    let norm = (T::lit(2.0) * T::PI()).powi(n as i32);
    Ok(Inversion {
        value: pairwise_sum(&cos_terms) / norm,
        sine_residual: (pairwise_sum(&sin_terms) / norm).abs(),
        boundary_ratio: if h_max > T::zero() {
            h_boundary / h_max
        } else {
            T::zero()
        },
    })
}

/// Multilinear interpolation of `f` at `p`, zero outside the box.
fn interpolate<T: Scalar>(f: &Field<T>, axes: &[Vec<T>], p: &[T]) -> T {
    let g = &f.grid;
    let n = g.dim();
    let mut lower = vec![0usize; n];
    let mut frac = vec![T::zero(); n];
    for a in 0..n {
        let l = g.half_widths[a];
        if p[a] < -l || p[a] > l {
            return T::zero();
        }
        let h = g.spacing(a);
        let pos = ((p[a] + l) / h).to_f64().unwrap_or(0.0);
        let i = (pos.floor() as usize).min(g.counts[a] - 2);
        lower[a] = i;
        frac[a] = ((p[a] - axes[a][i]) / h).max(T::zero()).min(T::one());
    }
    let mut acc = T::zero();
    for corner in 0..(1usize << n) {
        let mut weight = T::one();
        let mut flat = 0usize;
        for a in 0..n {
            let up = (corner >> a) & 1 == 1;
            let j = lower[a] + usize::from(up);
            weight = weight * if up { frac[a] } else { T::one() - frac[a] };
            flat = flat * g.counts[a] + j;
        }
        acc = acc + weight * f.values[flat];
    }
    acc
}

/// `φ(t, z_i) = Σ_j κ(V z_i, V z_j) φ₀(z_j) w_j` on `out_grid`.
///
/// For `τ = 0` the kernel is a delta and the input is returned unchanged when
/// the grids coincide, or interpolated onto `out_grid` otherwise.
pub fn propagate<T: Scalar>(
    phi0: &Field<T>,
    rate: &QuadraticRate<T>,
    window: &TimeWindow<T>,
    out_grid: &Grid<T>,
) -> Result<Field<T>> {
    let n = rate.dim();
    for len in [phi0.grid.dim(), out_grid.dim()] {
        if len != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: len,
            });
        }
    }
    if window.tau() == T::zero() {
        if phi0.grid == *out_grid {
            return Ok(phi0.clone());
        }
        let axes: Vec<Vec<T>> = (0..n).map(|a| phi0.grid.axis_nodes(a)).collect();
        let values = out_grid
            .points()
            .iter()
            .map(|p| interpolate(phi0, &axes, p))
            .collect();
        return Field::new(out_grid.clone(), values);
    }
    for (side, len) in [("input", phi0.grid.len()), ("output", out_grid.len())] {
        if len > MAX_DENSE_POINTS {
            return Err(Error::CostGuard(format!(
                "{side} grid has {len} points, dense propagation limited to {MAX_DENSE_POINTS}"
            )));
        }
    }
    let dec = decompose(rate)?;
    let ev = KernelEvaluator::new(dec.clone(), *window)?;
    let src: Vec<Vec<T>> = phi0
        .grid
        .points()
        .iter()
        .map(|z| to_modal(&dec, z))
        .collect::<Result<_>>()?;
    let dst: Vec<Vec<T>> = out_grid
        .points()
        .iter()
        .map(|z| to_modal(&dec, z))
        .collect::<Result<_>>()?;
    let weighted: Vec<T> = phi0
        .grid
        .weights()
        .iter()
        .zip(&phi0.values)
        .map(|(&w, &v)| w * v)
        .collect();

    let values = dst
        .par_iter()
        .map(|x| {
            let terms = src
                .iter()
                .zip(&weighted)
                .map(|(y, &wv)| ev.log_kernel(x, y).map(|l| l.exp() * wv))
                .collect::<Result<Vec<T>>>()?;
            Ok(pairwise_sum(&terms))
        })
        .collect::<Result<Vec<T>>>()?;
    Field::new(out_grid.clone(), values)
}
