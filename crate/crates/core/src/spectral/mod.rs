//! Fourier-space kernels on the periodic box.
//!
//! A [`SpectralField`] stores the coefficients `c_k` of
//! `f(x) = Σ_k c_k exp(i k·x)`, i.e. the forward DFT divided by n³. Fields
//! coming from real data are conjugate symmetric; every kernel here is a
//! Fourier multiplier that preserves that symmetry.

mod fft;

pub(crate) use fft::{plan, Direction};

use crate::error::{Error, Result};
use crate::fields::{ScalarField, VectorField};
use crate::grid::Grid;
use num_complex::Complex64;

/// Relative size of the zero mode tolerated by [`inverse_laplacian`].
pub const POISSON_MEAN_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

pub type SpectralVector = [SpectralField; 3];

impl SpectralField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::default(); grid.len()],
        }
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    #[inline]
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    #[inline]
    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient at signed integer wavevector `(a, b, c)`.
    pub fn mode(&self, a: i64, b: i64, c: i64) -> Complex64 {
        let n = self.grid.n() as i64;
        let w = |m: i64| m.rem_euclid(n) as usize;
        self.coeffs[self.grid.idx(w(a), w(b), w(c))]
    }

    pub fn set_mode(&mut self, a: i64, b: i64, c: i64, v: Complex64) {
        let n = self.grid.n() as i64;
        let w = |m: i64| m.rem_euclid(n) as usize;
        let idx = self.grid.idx(w(a), w(b), w(c));
        self.coeffs[idx] = v;
    }

    /// Largest |c(k) − conj(c(−k))| over all modes.
    pub fn conjugate_asymmetry(&self) -> f64 {
        let n = self.grid.n();
        let neg = |m: usize| (n - m) % n;
        let mut worst: f64 = 0.0;
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    let a = self.coeffs[self.grid.idx(i, j, k)];
                    let b = self.coeffs[self.grid.idx(neg(i), neg(j), neg(k))];
                    worst = worst.max((a - b.conj()).norm());
                }
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    /// Σ |c_k|², equal to the grid mean of f² by Parseval.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn scale(&mut self, a: f64) {
        self.coeffs.iter_mut().for_each(|c| *c *= a);
    }

    pub fn axpy(&mut self, a: f64, other: &SpectralField) {
        for (s, o) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *s += o * a;
        }
    }

    /// Multiplies every coefficient by `f(kx, ky, kz, idx)` where the `k`s
    /// are signed integer modes.
    fn apply(&mut self, f: impl Fn(i64, i64, i64) -> Complex64) {
        let g = self.grid;
        let n = g.n();
        let modes: Vec<i64> = (0..n).map(|m| g.signed_mode(m)).collect();
        for k in 0..n {
            for j in 0..n {
                let base = g.idx(0, j, k);
                for i in 0..n {
                    self.coeffs[base + i] *= f(modes[i], modes[j], modes[k]);
                }
            }
        }
    }
}

/// Forward transform of a real field.
pub fn forward(f: &ScalarField) -> SpectralField {
    let grid = f.grid();
    let mut coeffs: Vec<Complex64> = f.data().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    plan(grid.n()).transform3(&mut coeffs, Direction::Forward);
    let norm = 1.0 / grid.len() as f64;
    coeffs.iter_mut().for_each(|c| *c *= norm);
    SpectralField { grid, coeffs }
}

/// Inverse transform; the imaginary part (round-off for symmetric input) is dropped.
pub fn inverse(f: &SpectralField) -> ScalarField {
    let mut buf = f.coeffs.clone();
    plan(f.grid.n()).transform3(&mut buf, Direction::Inverse);
    ScalarField::from_vec(f.grid, buf.into_iter().map(|c| c.re).collect())
        .expect("grid sized buffer")
}

pub fn forward_vector(v: &VectorField) -> SpectralVector {
    forward_many(v.grid(), &[v.comp(0), v.comp(1), v.comp(2)])
        .try_into()
        .expect("three components")
}

pub fn inverse_vector(v: &SpectralVector) -> VectorField {
    let [x, y, z]: [Vec<f64>; 3] = inverse_many(&[&v[0], &v[1], &v[2]])
        .try_into()
        .expect("three components");
    VectorField::from_components(v[0].grid, [x, y, z]).expect("grid sized buffers")
}

/// Forward transforms of several real fields, two per complex transform.
pub fn forward_many(grid: Grid, fields: &[&[f64]]) -> Vec<SpectralField> {
    fields
        .iter()
        .for_each(|f| assert_eq!(f.len(), grid.len(), "field does not match grid"));
    let n = grid.n();
    let norm = 1.0 / grid.len() as f64;
    let mut out = Vec::with_capacity(fields.len());
    for pair in fields.chunks(2) {
        let mut z: Vec<Complex64> = match pair {
            [a, b] => a
                .iter()
                .zip(b.iter())
                .map(|(&x, &y)| Complex64::new(x, y))
                .collect(),
            [a] => a.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            _ => unreachable!(),
        };
        plan(n).transform3(&mut z, Direction::Forward);
        if pair.len() == 1 {
            z.iter_mut().for_each(|c| *c *= norm);
            out.push(z);
            continue;
        }
        // split Z = A + iB using the conjugate symmetry of A and B
        let mut a = vec![Complex64::default(); z.len()];
        let mut b = vec![Complex64::default(); z.len()];
        let neg = |m: usize| if m == 0 { 0 } else { n - m };
        let mut idx = 0;
        for k in 0..n {
            for j in 0..n {
                let row = (neg(k) * n + neg(j)) * n;
                for i in 0..n {
                    let zk = z[idx];
                    let zm = z[row + neg(i)].conj();
                    a[idx] = (zk + zm) * (0.5 * norm);
                    let d = (zk - zm) * (0.5 * norm);
                    b[idx] = Complex64::new(d.im, -d.re);
                    idx += 1;
                }
            }
        }
        out.push(a);
        out.push(b);
    }
    out.into_iter()
        .map(|coeffs| SpectralField { grid, coeffs })
        .collect()
}

/// Inverse transforms of several conjugate-symmetric spectra, two per
/// complex transform. Grids are taken from the inputs.
pub fn inverse_many(fields: &[&SpectralField]) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(fields.len());
    for pair in fields.chunks(2) {
        let n = pair[0].grid.n();
        let mut z = match pair {
            [a, b] => {
                assert_eq!(a.grid.n(), b.grid.n(), "grid mismatch");
                a.coeffs
                    .iter()
                    .zip(&b.coeffs)
                    .map(|(x, y)| Complex64::new(x.re - y.im, x.im + y.re))
                    .collect()
            }
            _ => pair[0].coeffs.clone(),
        };
        plan(n).transform3(&mut z, Direction::Inverse);
        out.push(z.iter().map(|c| c.re).collect());
        if pair.len() == 2 {
            out.push(z.iter().map(|c| c.im).collect());
        }
    }
    out
}

/// Spectral gradient: component `i` is `i k_i f̂`.
pub fn gradient(f: &SpectralField) -> SpectralVector {
    let g = f.grid;
    [0, 1, 2].map(|axis| {
        let mut out = f.clone();
        derivative_in_place(&mut out, axis);
        debug_assert_eq!(out.grid, g);
        out
    })
}

/// ∂/∂x_axis in place.
pub fn derivative_in_place(f: &mut SpectralField, axis: usize) {
    let g = f.grid;
    let n = g.n();
    let kd: Vec<f64> = (0..n).map(|m| g.deriv_wavenumber(m)).collect();
    for (k, slab) in f.coeffs.chunks_exact_mut(n * n).enumerate() {
        for (j, line) in slab.chunks_exact_mut(n).enumerate() {
            match axis {
                0 => line
                    .iter_mut()
                    .zip(&kd)
                    .for_each(|(c, &kk)| *c = Complex64::new(-c.im * kk, c.re * kk)),
                _ => {
                    let kk = if axis == 1 { kd[j] } else { kd[k] };
                    line.iter_mut()
                        .for_each(|c| *c = Complex64::new(-c.im * kk, c.re * kk));
                }
            }
        }
    }
}

pub fn derivative(f: &SpectralField, axis: usize) -> SpectralField {
    let mut out = f.clone();
    derivative_in_place(&mut out, axis);
    out
}

pub fn divergence(v: &SpectralVector) -> SpectralField {
    let mut out = derivative(&v[0], 0);
    out.axpy(1.0, &derivative(&v[1], 1));
    out.axpy(1.0, &derivative(&v[2], 2));
    out
}

pub fn curl(v: &SpectralVector) -> SpectralVector {
    let d = |c: usize, axis: usize| derivative(&v[c], axis);
    let mut x = d(2, 1);
    x.axpy(-1.0, &d(1, 2));
    let mut y = d(0, 2);
    y.axpy(-1.0, &d(2, 0));
    let mut z = d(1, 0);
    z.axpy(-1.0, &d(0, 1));
    [x, y, z]
}

/// Spectral Laplacian, `−|k|² f̂`.
pub fn laplacian(f: &SpectralField) -> SpectralField {
    let k0 = f.grid.k0();
    let mut out = f.clone();
    out.apply(|a, b, c| Complex64::new(-((a * a + b * b + c * c) as f64) * k0 * k0, 0.0));
    out
}

/// Solves Δg = f on the torus with ĝ(0) = 0.
///
/// Fails with [`Error::NonZeroMean`] when the zero mode of `f` exceeds
/// [`POISSON_MEAN_TOL`] relative to the largest coefficient (absolute when `f`
/// is tiny).
pub fn inverse_laplacian(f: &SpectralField) -> Result<SpectralField> {
    let mean = f.coeffs[0].norm();
    let scale = f.max_abs().max(1.0);
    if mean > POISSON_MEAN_TOL * scale {
        return Err(Error::NonZeroMean { mean });
    }
    let k0 = f.grid.k0();
    let mut out = f.clone();
    out.apply(|a, b, c| {
        let k2 = (a * a + b * b + c * c) as f64 * k0 * k0;
        if k2 == 0.0 {
            Complex64::default()
        } else {
            Complex64::new(-1.0 / k2, 0.0)
        }
    });
    Ok(out)
}

/// Leray–Hodge projection `v − ∇Δ⁻¹∇·v`, in place.
///
/// Uses the derivative wavevector (Nyquist components zeroed) so the result
/// is divergence free to round-off under [`divergence`]. The k = 0 mode is
/// left untouched.
pub fn leray_project_in_place(v: &mut SpectralVector) {
    let g = v[0].grid;
    let n = g.n();
    let kd: Vec<f64> = (0..n).map(|m| g.deriv_wavenumber(m)).collect();
    let [vx, vy, vz] = v;
    let mut idx = 0;
    for k in 0..n {
        for j in 0..n {
            for &ki in &kd {
                let kv = [ki, kd[j], kd[k]];
                let k2 = kv[0] * kv[0] + kv[1] * kv[1] + kv[2] * kv[2];
                if k2 != 0.0 {
                    let kdotv =
                        (vx.coeffs[idx] * kv[0] + vy.coeffs[idx] * kv[1] + vz.coeffs[idx] * kv[2])
                            / k2;
                    vx.coeffs[idx] -= kdotv * kv[0];
                    vy.coeffs[idx] -= kdotv * kv[1];
                    vz.coeffs[idx] -= kdotv * kv[2];
                }
                idx += 1;
            }
        }
    }
}

pub fn leray_project(v: &SpectralVector) -> SpectralVector {
    let mut out = v.clone();
    leray_project_in_place(&mut out);
    out
}

/// Two-thirds rule: zero every coefficient with some |k_j| > n/3.
pub fn dealias_in_place(f: &mut SpectralField) {
    let cut = f.grid.dealias_cutoff();
    f.apply(|a, b, c| {
        if a.abs() > cut || b.abs() > cut || c.abs() > cut {
            Complex64::default()
        } else {
            Complex64::new(1.0, 0.0)
        }
    });
}

pub fn dealias(f: &SpectralField) -> SpectralField {
    let mut out = f.clone();
    dealias_in_place(&mut out);
    out
}

// Real-space conveniences used throughout the solver.

/// ∇f as a vector field.
pub fn grad_real(f: &ScalarField) -> VectorField {
    inverse_vector(&gradient(&forward(f)))
}

pub fn curl_real(v: &VectorField) -> VectorField {
    inverse_vector(&curl(&forward_vector(v)))
}

pub fn div_real(v: &VectorField) -> ScalarField {
    inverse(&divergence(&forward_vector(v)))
}

pub fn project_real(v: &VectorField) -> VectorField {
    let mut s = forward_vector(v);
    leray_project_in_place(&mut s);
    inverse_vector(&s)
}

pub fn dealias_real(f: &ScalarField) -> ScalarField {
    inverse(&dealias(&forward(f)))
}

pub fn dealias_vector(v: &VectorField) -> VectorField {
    let mut s = forward_vector(v);
    s.iter_mut().for_each(dealias_in_place);
    inverse_vector(&s)
}

/// Dealias then project in one round trip.
pub fn dealias_project(v: &VectorField) -> VectorField {
    let mut s = forward_vector(v);
    s.iter_mut().for_each(dealias_in_place);
    leray_project_in_place(&mut s);
    inverse_vector(&s)
}

/// Gradient of every component: entry `(c, i)` is ∂v_c/∂x_i.
pub fn jacobian_real(v: &VectorField) -> crate::fields::MatrixField {
    let spec = forward_vector(v);
    let derivs: Vec<SpectralField> = (0..9).map(|e| derivative(&spec[e / 3], e % 3)).collect();
    let refs: Vec<&SpectralField> = derivs.iter().collect();
    let mut out = crate::fields::MatrixField::zeros(v.grid());
    for (e, d) in inverse_many(&refs).into_iter().enumerate() {
        out.entry_mut(e / 3, e % 3).copy_from_slice(&d);
    }
    out
}

/// Max over modes of |k·v̂(k)|, the spectral divergence norm.
pub fn spectral_divergence_norm(v: &SpectralVector) -> f64 {
    divergence(v).max_abs()
}
