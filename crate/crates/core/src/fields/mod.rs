//! Real-space field containers and the pointwise machinery built on them:
//! composition with a displacement, off-grid interpolation, Hölder-norm
//! estimators and marker-loop circulation.

mod holder;
mod interp;
mod loops;

pub use holder::{
    holder_c0mu_components, holder_norm_c0mu, holder_norm_c0mu_matrix, holder_norm_c0mu_vector,
    holder_norm_c1mu, holder_norm_c1mu_vector, HolderNorm,
};
pub use interp::{
    compose, compose_many, fourier_eval, interpolate_at, Interpolation, Interpolator,
};
pub use loops::{circulation, circulation_from_values, MarkerLoop};

use crate::error::{Error, Result};
use crate::grid::Grid;

/// One real value per grid node.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            data: vec![0.0; grid.len()],
        }
    }

    pub fn from_vec(grid: Grid, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} samples, got {}",
                grid.len(),
                data.len()
            )));
        }
        Ok(Self { grid, data })
    }

    /// Samples `f(x, y, z)` at every node.
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        let data = (0..grid.len())
            .map(|idx| {
                let [x, y, z] = grid.node(idx);
                f(x, y, z)
            })
            .collect();
        Self { grid, data }
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Root-mean-square over the nodes.
    pub fn rms(&self) -> f64 {
        (self.data.iter().map(|v| v * v).sum::<f64>() / self.data.len() as f64).sqrt()
    }

    /// ∫ f dx over the box by the (spectrally exact) trapezoid rule.
    pub fn integral(&self) -> f64 {
        self.mean() * self.grid.period().powi(3)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scale(&mut self, a: f64) {
        self.data.iter_mut().for_each(|v| *v *= a);
    }

    /// `self += a * other`
    pub fn axpy(&mut self, a: f64, other: &ScalarField) {
        debug_assert_eq!(self.grid, other.grid);
        for (s, o) in self.data.iter_mut().zip(&other.data) {
            *s += a * o;
        }
    }

    pub fn sub_mean(&mut self) {
        let m = self.mean();
        self.data.iter_mut().for_each(|v| *v -= m);
    }
}

/// Three real components per node.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    grid: Grid,
    comps: [Vec<f64>; 3],
}

impl VectorField {
    pub fn zeros(grid: Grid) -> Self {
        let z = vec![0.0; grid.len()];
        Self {
            grid,
            comps: [z.clone(), z.clone(), z],
        }
    }

    pub fn from_components(grid: Grid, comps: [Vec<f64>; 3]) -> Result<Self> {
        if comps.iter().any(|c| c.len() != grid.len()) {
            return Err(Error::GridMismatch(
                "component length differs from grid".into(),
            ));
        }
        Ok(Self { grid, comps })
    }

    pub fn from_scalars(x: ScalarField, y: ScalarField, z: ScalarField) -> Self {
        let grid = x.grid;
        debug_assert!(y.grid == grid && z.grid == grid);
        Self {
            grid,
            comps: [x.data, y.data, z.data],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64, f64) -> [f64; 3]) -> Self {
        let mut out = Self::zeros(grid);
        for idx in 0..grid.len() {
            let [x, y, z] = grid.node(idx);
            let v = f(x, y, z);
            for c in 0..3 {
                out.comps[c][idx] = v[c];
            }
        }
        out
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    #[inline]
    pub fn comp(&self, c: usize) -> &[f64] {
        &self.comps[c]
    }

    #[inline]
    pub fn comp_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.comps[c]
    }

    pub fn comps(&self) -> &[Vec<f64>; 3] {
        &self.comps
    }

    pub fn into_components(self) -> [Vec<f64>; 3] {
        self.comps
    }

    pub fn scalar(&self, c: usize) -> ScalarField {
        ScalarField {
            grid: self.grid,
            data: self.comps[c].clone(),
        }
    }

    #[inline]
    pub fn at(&self, idx: usize) -> [f64; 3] {
        [self.comps[0][idx], self.comps[1][idx], self.comps[2][idx]]
    }

    pub fn magnitude(&self) -> ScalarField {
        let data = (0..self.grid.len())
            .map(|i| {
                let [a, b, c] = self.at(i);
                (a * a + b * b + c * c).sqrt()
            })
            .collect();
        ScalarField {
            grid: self.grid,
            data,
        }
    }

    /// Max over nodes of the Euclidean norm.
    pub fn max_norm(&self) -> f64 {
        (0..self.grid.len()).fold(0.0, |m, i| {
            let [a, b, c] = self.at(i);
            m.max((a * a + b * b + c * c).sqrt())
        })
    }

    /// Root-mean-square of the Euclidean norm.
    pub fn rms(&self) -> f64 {
        (self.sum_sq() / self.grid.len() as f64).sqrt()
    }

    fn sum_sq(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .map(|v| v * v)
            .sum()
    }

    pub fn dot(&self, other: &VectorField) -> ScalarField {
        let data = (0..self.grid.len())
            .map(|i| {
                let a = self.at(i);
                let b = other.at(i);
                a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
            })
            .collect();
        ScalarField {
            grid: self.grid,
            data,
        }
    }

    pub fn mean(&self) -> [f64; 3] {
        let n = self.grid.len() as f64;
        [0, 1, 2].map(|c| self.comps[c].iter().sum::<f64>() / n)
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().all(|c| c.iter().all(|v| v.is_finite()))
    }

    pub fn scale(&mut self, a: f64) {
        for c in &mut self.comps {
            c.iter_mut().for_each(|v| *v *= a);
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    /// `self += a * other`
    pub fn axpy(&mut self, a: f64, other: &VectorField) {
        debug_assert_eq!(self.grid, other.grid);
        for c in 0..3 {
            for (s, o) in self.comps[c].iter_mut().zip(&other.comps[c]) {
                *s += a * o;
            }
        }
    }

    /// `a * self + b * other`
    pub fn lincomb(&self, a: f64, other: &VectorField, b: f64) -> Self {
        let mut out = self.scaled(a);
        out.axpy(b, other);
        out
    }

    pub fn sub(&self, other: &VectorField) -> Self {
        self.lincomb(1.0, other, -1.0)
    }

    /// Max over nodes of |self - other|.
    pub fn max_dist(&self, other: &VectorField) -> f64 {
        (0..self.grid.len()).fold(0.0, |m, i| {
            let a = self.at(i);
            let b = other.at(i);
            let d = (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2);
            m.max(d.sqrt())
        })
    }

    /// ‖self − other‖₂ / ‖other‖₂ over the grid; absolute when `other` is zero.
    pub fn rel_l2_dist(&self, other: &VectorField) -> f64 {
        let num = self.sub(other).sum_sq().sqrt();
        let den = other.sum_sq().sqrt();
        if den > 0.0 {
            num / den
        } else {
            num
        }
    }
}

/// Nine real components per node; entry `(r, c)` is stored at `3 * r + c`.
///
/// Producers document their orientation: the map Jacobian uses
/// `(m, i) = ∂A_m/∂x_i`, velocity gradients use `(i, j) = ∂u_j/∂x_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixField {
    grid: Grid,
    comps: Vec<Vec<f64>>,
}

impl MatrixField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            comps: vec![vec![0.0; grid.len()]; 9],
        }
    }

    pub fn identity(grid: Grid) -> Self {
        let mut m = Self::zeros(grid);
        for d in 0..3 {
            m.comps[4 * d].iter_mut().for_each(|v| *v = 1.0);
        }
        m
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    #[inline]
    pub fn entry(&self, r: usize, c: usize) -> &[f64] {
        &self.comps[3 * r + c]
    }

    #[inline]
    pub fn entry_mut(&mut self, r: usize, c: usize) -> &mut [f64] {
        &mut self.comps[3 * r + c]
    }

    #[inline]
    pub fn at(&self, idx: usize) -> [[f64; 3]; 3] {
        let mut m = [[0.0; 3]; 3];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = self.comps[3 * r + c][idx];
            }
        }
        m
    }

    #[inline]
    pub fn set(&mut self, idx: usize, m: &[[f64; 3]; 3]) {
        for (r, row) in m.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                self.comps[3 * r + c][idx] = *v;
            }
        }
    }

    pub fn transpose(&self) -> Self {
        let mut comps = vec![Vec::new(); 9];
        for r in 0..3 {
            for c in 0..3 {
                comps[3 * c + r] = self.comps[3 * r + c].clone();
            }
        }
        Self {
            grid: self.grid,
            comps,
        }
    }

    /// Max over nodes of the Frobenius norm.
    pub fn max_norm(&self) -> f64 {
        (0..self.grid.len()).fold(0.0, |m, i| {
            let s: f64 = self.comps.iter().map(|c| c[i] * c[i]).sum();
            m.max(s.sqrt())
        })
    }

    /// Max over nodes and entries of |self − other|.
    pub fn max_entry_dist(&self, other: &MatrixField) -> f64 {
        self.comps
            .iter()
            .zip(&other.comps)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }

    /// Frobenius ‖self − other‖₂ / ‖other‖₂ summed over the grid.
    pub fn rel_l2_dist(&self, other: &MatrixField) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for (a, b) in self.comps.iter().zip(&other.comps) {
            for (x, y) in a.iter().zip(b) {
                num += (x - y) * (x - y);
                den += y * y;
            }
        }
        if den > 0.0 {
            (num / den).sqrt()
        } else {
            num.sqrt()
        }
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().all(|c| c.iter().all(|v| v.is_finite()))
    }

    pub(crate) fn comps(&self) -> &[Vec<f64>] {
        &self.comps
    }
}
