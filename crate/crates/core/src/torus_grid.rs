//! Uniform periodic grids on the flat tori T¹, T², T³ and real fields sampled
//! on them.
//!
//! Grid points sit at `x = j·h` for `j = 0..N`, `h = L/N`, per axis. Field
//! values are stored row-major with the last axis varying fastest. All
//! differential operators are second-order central stencils with periodic
//! wraparound, so their truncation error is a clean `O(h²)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported dimension.
pub const MAX_DIM: usize = 3;
/// Minimum number of points along each axis.
pub const MIN_POINTS_PER_AXIS: usize = 8;
/// Cap on the total number of grid points.
pub const MAX_TOTAL_POINTS: usize = 1 << 27;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusGrid {
    dim: usize,
    lengths: [f64; MAX_DIM],
    points: [usize; MAX_DIM],
}

impl TorusGrid {
    pub fn new(lengths: &[f64], points: &[usize]) -> Result<Self> {
        let dim = lengths.len();
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidGrid(format!(
                "dimension must be 1, 2 or 3, got {dim}"
            )));
        }
        if points.len() != dim {
            return Err(Error::InvalidGrid(format!(
                "{} lengths but {} point counts",
                dim,
                points.len()
            )));
        }
        let mut g = TorusGrid {
            dim,
            lengths: [1.0; MAX_DIM],
            points: [1; MAX_DIM],
        };
        let mut total: usize = 1;
        for axis in 0..dim {
            let (l, n) = (lengths[axis], points[axis]);
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidGrid(format!(
                    "axis {axis}: period must be positive and finite, got {l}"
                )));
            }
            if n < MIN_POINTS_PER_AXIS {
                return Err(Error::InvalidGrid(format!(
                    "axis {axis}: need at least {MIN_POINTS_PER_AXIS} points, got {n}"
                )));
            }
            total = total
                .checked_mul(n)
                .filter(|&t| t <= MAX_TOTAL_POINTS)
                .ok_or_else(|| {
                    Error::InvalidGrid(format!("more than {MAX_TOTAL_POINTS} points"))
                })?;
            g.lengths[axis] = l;
            g.points[axis] = n;
        }
        Ok(g)
    }

    /// Cubic torus with the same period and resolution on every axis.
    pub fn uniform(dim: usize, length: f64, points: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidGrid(format!(
                "dimension must be 1, 2 or 3, got {dim}"
            )));
        }
        Self::new(&vec![length; dim], &vec![points; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths[..self.dim]
    }

    pub fn points(&self) -> &[usize] {
        &self.points[..self.dim]
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.lengths[axis] / self.points[axis] as f64
    }

    pub fn spacings(&self) -> Vec<f64> {
        (0..self.dim).map(|a| self.spacing(a)).collect()
    }

    /// Total number of grid points.
    pub fn len(&self) -> usize {
        self.points().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Volume element `Π h_i` used for discrete integrals.
    pub fn cell_volume(&self) -> f64 {
        (0..self.dim).map(|a| self.spacing(a)).product()
    }

    /// `Σ_i 2/h_i²`, the spectral radius bound of the discrete Laplacian
    /// divided by two.
    pub fn stencil_stiffness(&self) -> f64 {
        (0..self.dim).map(|a| 2.0 / self.spacing(a).powi(2)).sum()
    }

    /// Splits the row-major index space around `axis` into
    /// `(outer, n_axis, inner)`.
    pub(crate) fn axis_layout(&self, axis: usize) -> (usize, usize, usize) {
        let outer = self.points[..axis].iter().product();
        let inner = self.points[axis + 1..self.dim].iter().product();
        (outer, self.points[axis], inner)
    }

    pub fn multi_index(&self, mut index: usize) -> [usize; MAX_DIM] {
        let mut out = [0; MAX_DIM];
        for axis in (0..self.dim).rev() {
            out[axis] = index % self.points[axis];
            index /= self.points[axis];
        }
        out
    }

    pub fn flat_index(&self, multi: &[usize]) -> Result<usize> {
        if multi.len() != self.dim {
            return Err(Error::Index {
                index: multi.len(),
                valid: format!("{} coordinates", self.dim),
            });
        }
        let mut idx = 0;
        for (axis, &j) in multi.iter().enumerate() {
            if j >= self.points[axis] {
                return Err(Error::Index {
                    index: j,
                    valid: format!("0..{} on axis {axis}", self.points[axis]),
                });
            }
            idx = idx * self.points[axis] + j;
        }
        Ok(idx)
    }

    /// Physical coordinates of a grid point.
    pub fn coords(&self, index: usize) -> Vec<f64> {
        let m = self.multi_index(index);
        (0..self.dim)
            .map(|a| m[a] as f64 * self.spacing(a))
            .collect()
    }

    pub fn check_index(&self, index: usize) -> Result<()> {
        if index < self.len() {
            Ok(())
        } else {
            Err(Error::Index {
                index,
                valid: format!("0..{}", self.len()),
            })
        }
    }

    /// Length of the shortest closed-torus path between two grid points.
    pub fn geodesic_distance(&self, a: usize, b: usize) -> Result<f64> {
        self.check_index(a)?;
        self.check_index(b)?;
        let (ma, mb) = (self.multi_index(a), self.multi_index(b));
        let mut sum = 0.0;
        for axis in 0..self.dim {
            let delta = (ma[axis] as f64 - mb[axis] as f64).abs() * self.spacing(axis);
            let wrapped = delta.min(self.lengths[axis] - delta);
            sum += wrapped * wrapped;
        }
        Ok(sum.sqrt())
    }
}

/// Free-function form of [`TorusGrid::geodesic_distance`].
pub fn geodesic_distance(grid: &TorusGrid, x1: usize, x2: usize) -> Result<f64> {
    grid.geodesic_distance(x1, x2)
}

/// Real samples of a function on a [`TorusGrid`]. Values are always finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: TorusGrid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: TorusGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "field has {} values but grid has {} points",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite value {} at point {i}",
                values[i]
            )));
        }
        Ok(ScalarField { grid, values })
    }

    /// Caller guarantees finiteness and length.
    pub(crate) fn from_raw(grid: TorusGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        ScalarField { grid, values }
    }

    pub fn constant(grid: TorusGrid, value: f64) -> Result<Self> {
        Self::new(grid, vec![value; grid.len()])
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        ScalarField::from_raw(grid, vec![0.0; grid.len()])
    }

    /// Samples `f(coords)` at every grid point.
    pub fn from_fn(grid: TorusGrid, mut f: impl FnMut(&[f64]) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(&grid.coords(i))).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Index and value of the smallest sample (first one on ties).
    pub fn argmin(&self) -> (usize, f64) {
        let mut best = (0, self.values[0]);
        for (i, &v) in self.values.iter().enumerate().skip(1) {
            if v < best.1 {
                best = (i, v);
            }
        }
        best
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Cyclic shift: the output at multi-index `j` is the input at `j - shift`.
    pub fn shifted(&self, shift: &[usize]) -> Self {
        let g = self.grid;
        let mut out = vec![0.0; g.len()];
        for (i, &v) in self.values.iter().enumerate() {
            let m = g.multi_index(i);
            let mut target = 0;
            for axis in 0..g.dim() {
                let n = g.points()[axis];
                let s = shift.get(axis).copied().unwrap_or(0) % n;
                target = target * n + (m[axis] + s) % n;
            }
            out[target] = v;
        }
        ScalarField::from_raw(g, out)
    }

    /// Discrete integral `Σ f · Π h_i`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }
}

/// `Δ_h f`: the `(f_{j+1} - 2 f_j + f_{j-1}) / h²` stencil summed over axes.
pub fn laplacian(f: &ScalarField) -> ScalarField {
    let mut out = vec![0.0; f.len()];
    laplacian_into(&f.grid, &f.values, &mut out);
    ScalarField::from_raw(f.grid, out)
}

/// `|∇_h f|²` with central first differences `(f_{j+1} - f_{j-1}) / (2h)`.
pub fn gradient_sq(f: &ScalarField) -> ScalarField {
    let mut out = vec![0.0; f.len()];
    gradient_sq_into(&f.grid, &f.values, &mut out);
    ScalarField::from_raw(f.grid, out)
}

pub(crate) fn laplacian_into(grid: &TorusGrid, src: &[f64], dst: &mut [f64]) {
    dst.fill(0.0);
    for axis in 0..grid.dim() {
        let w = 1.0 / grid.spacing(axis).powi(2);
        let (outer, n, inner) = grid.axis_layout(axis);
        if inner == 1 {
            for (row, out) in src.chunks_exact(n).zip(dst.chunks_exact_mut(n)) {
                add_second_diff_row(row, out, w);
            }
        } else {
            for o in 0..outer {
                let base = o * n * inner;
                for j in 0..n {
                    let jm = if j == 0 { n - 1 } else { j - 1 };
                    let jp = if j + 1 == n { 0 } else { j + 1 };
                    let c = &src[base + j * inner..base + (j + 1) * inner];
                    let m = &src[base + jm * inner..base + (jm + 1) * inner];
                    let p = &src[base + jp * inner..base + (jp + 1) * inner];
                    let out = &mut dst[base + j * inner..base + (j + 1) * inner];
                    for k in 0..inner {
                        out[k] += w * (m[k] - 2.0 * c[k] + p[k]);
                    }
                }
            }
        }
    }
}

#[inline]
fn add_second_diff_row(row: &[f64], out: &mut [f64], w: f64) {
    let n = row.len();
    out[0] += w * (row[n - 1] - 2.0 * row[0] + row[1]);
    for (o, win) in out[1..n - 1].iter_mut().zip(row.windows(3)) {
        *o += w * (win[0] - 2.0 * win[1] + win[2]);
    }
    out[n - 1] += w * (row[n - 2] - 2.0 * row[n - 1] + row[0]);
}

pub(crate) fn gradient_sq_into(grid: &TorusGrid, src: &[f64], dst: &mut [f64]) {
    dst.fill(0.0);
    for axis in 0..grid.dim() {
        let w = 0.5 / grid.spacing(axis);
        let (outer, n, inner) = grid.axis_layout(axis);
        for o in 0..outer {
            let base = o * n * inner;
            for j in 0..n {
                let jm = if j == 0 { n - 1 } else { j - 1 };
                let jp = if j + 1 == n { 0 } else { j + 1 };
                for k in 0..inner {
                    let d = w * (src[base + jp * inner + k] - src[base + jm * inner + k]);
                    dst[base + j * inner + k] += d * d;
                }
            }
        }
    }
}

/// `Σ_axes ((f_{j+1} - f_j)/h)²`, the quadratic form for which `-Δ_h`
/// is the gradient.
pub(crate) fn forward_gradient_sq_into(grid: &TorusGrid, src: &[f64], dst: &mut [f64]) {
    dst.fill(0.0);
    for axis in 0..grid.dim() {
        let w = 1.0 / grid.spacing(axis);
        let (outer, n, inner) = grid.axis_layout(axis);
        for o in 0..outer {
            let base = o * n * inner;
            for j in 0..n {
                let jp = if j + 1 == n { 0 } else { j + 1 };
                for k in 0..inner {
                    let d = w * (src[base + jp * inner + k] - src[base + j * inner + k]);
                    dst[base + j * inner + k] += d * d;
                }
            }
        }
    }
}
