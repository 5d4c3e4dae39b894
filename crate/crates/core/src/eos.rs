//! Equation of state: velocity from the displacement δ and the chart's
//! initial velocity φ,
//!
//! ```text
//! u = P{ (I + ∇δ)ᵀ φ(x + δ) }
//! ```
//!
//! together with the determinant form of ∇u, the Weber potential `n_A` and
//! the pressure diagnostic.

use crate::error::{Error, Result};
use crate::fields::{Interpolation, Interpolator, MatrixField, ScalarField, VectorField};
use crate::spectral::{self, SpectralVector};
use std::sync::OnceLock;

/// Largest ‖∇·φ‖ / ‖φ‖ (spectral max norms) accepted for a chart velocity.
pub const PHI_DIVERGENCE_TOL: f64 = 1e-10;

/// Jacobian of the back-to-labels map `A = x + δ`: entry `(m, i)` is ∂A_m/∂x_i.
pub fn grad_a(delta: &VectorField) -> MatrixField {
    let mut j = spectral::jacobian_real(delta);
    for d in 0..3 {
        j.entry_mut(d, d).iter_mut().for_each(|v| *v += 1.0);
    }
    j
}

/// `Jᵀ w` pointwise, i.e. `(∇A)* w` with `J = ∇A`.
pub fn apply_transpose(jac: &MatrixField, w: &[Vec<f64>]) -> VectorField {
    let grid = jac.grid();
    let mut out = VectorField::zeros(grid);
    for j in 0..3 {
        let dst = out.comp_mut(j);
        for m in 0..3 {
            let a = jac.entry(m, j);
            for (idx, d) in dst.iter_mut().enumerate() {
                *d += a[idx] * w[m][idx];
            }
        }
    }
    out
}

#[inline]
pub(crate) fn det3(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
        + a[2] * (b[0] * c[1] - b[1] * c[0])
}

#[inline]
pub(crate) fn column(jac: &[[f64; 3]; 3], i: usize) -> [f64; 3] {
    [jac[0][i], jac[1][i], jac[2][i]]
}

/// The pair (φ, ζ = ∇×φ) of one chart with cached interpolants.
#[derive(Debug)]
pub struct EquationOfState {
    phi: VectorField,
    zeta: VectorField,
    scheme: Interpolation,
    phi_interp: OnceLock<Interpolator>,
    zeta_interp: OnceLock<Interpolator>,
}

impl EquationOfState {
    /// Fails with `BadParameters` if φ is not spectrally divergence free.
    pub fn new(phi: VectorField, scheme: Interpolation) -> Result<Self> {
        if !phi.is_finite() {
            return Err(Error::NonFinite {
                what: "initial velocity".into(),
            });
        }
        let s = spectral::forward_vector(&phi);
        let div = spectral::spectral_divergence_norm(&s);
        let size = s.iter().map(|c| c.max_abs()).fold(0.0, f64::max);
        if div > PHI_DIVERGENCE_TOL * size.max(f64::MIN_POSITIVE) && div > 0.0 {
            return Err(Error::BadParameters(format!(
                "initial velocity is not divergence free: |div| = {div:e}, |phi| = {size:e}"
            )));
        }
        let zeta = spectral::inverse_vector(&spectral::curl(&s));
        Ok(Self {
            phi,
            zeta,
            scheme,
            phi_interp: OnceLock::new(),
            zeta_interp: OnceLock::new(),
        })
    }

    pub fn phi(&self) -> &VectorField {
        &self.phi
    }

    /// ζ = ∇×φ, the chart's initial vorticity.
    pub fn zeta(&self) -> &VectorField {
        &self.zeta
    }

    pub fn scheme(&self) -> Interpolation {
        self.scheme
    }

    fn phi_interp(&self) -> &Interpolator {
        self.phi_interp
            .get_or_init(|| Interpolator::for_vector(&self.phi, self.scheme))
    }

    fn zeta_interp(&self) -> &Interpolator {
        self.zeta_interp
            .get_or_init(|| Interpolator::for_vector(&self.zeta, self.scheme))
    }

    /// φ(x + δ(x)).
    pub fn phi_at_map(&self, delta: &VectorField) -> Vec<Vec<f64>> {
        self.phi_interp().compose(delta)
    }

    /// ζ(x + δ(x)).
    pub fn zeta_at_map(&self, delta: &VectorField) -> Vec<Vec<f64>> {
        self.zeta_interp().compose(delta)
    }

    /// `(∇A)* φ(A)` before projection, dealiased.
    pub fn weber_field(&self, delta: &VectorField) -> VectorField {
        let jac = grad_a(delta);
        spectral::dealias_vector(&apply_transpose(&jac, &self.phi_at_map(delta)))
    }

    /// Velocity `W[δ, φ]` together with the map Jacobian it was built from.
    pub fn velocity_with_jacobian(&self, delta: &VectorField) -> (VectorField, MatrixField) {
        let jac = grad_a(delta);
        let v = apply_transpose(&jac, &self.phi_at_map(delta));
        (spectral::dealias_project(&v), jac)
    }

    /// `W[δ, φ] = P{(I + ∇δ)* φ(x + δ)}`, dealiased and divergence free.
    pub fn velocity_w(&self, delta: &VectorField) -> VectorField {
        self.velocity_with_jacobian(delta).0
    }

    /// ∇u from the determinant identity
    /// `∂u_j/∂x_i = P_jl Det[ζ(A); ∂A/∂x_i; ∂A/∂x_l]`,
    /// with no derivative of u and no second derivative of A.
    ///
    /// Entry `(i, j)` of the result is ∂u_j/∂x_i. `Det[a; b; c]` is the
    /// determinant with columns a, b, c, i.e. `a·(b × c)`.
    pub fn velocity_gradient_det(&self, delta: &VectorField) -> MatrixField {
        let grid = delta.grid();
        let jac = grad_a(delta);
        let zeta_a = self.zeta_at_map(delta);
        let mut out = MatrixField::zeros(grid);
        // rows[i][l] holds Det[ζ(A); c_i; c_l] for every node
        let mut rows: Vec<[Vec<f64>; 3]> = (0..3)
            .map(|_| {
                [
                    vec![0.0; grid.len()],
                    vec![0.0; grid.len()],
                    vec![0.0; grid.len()],
                ]
            })
            .collect();
        for idx in 0..grid.len() {
            let j = jac.at(idx);
            let z = [zeta_a[0][idx], zeta_a[1][idx], zeta_a[2][idx]];
            for i in 0..3 {
                for l in 0..3 {
                    if i != l {
                        rows[i][l][idx] = det3(z, column(&j, i), column(&j, l));
                    }
                }
            }
        }
        for (i, row) in rows.into_iter().enumerate() {
            let mut s: SpectralVector =
                row.map(|c| spectral::forward(&ScalarField::from_vec(grid, c).expect("sized")));
            for c in s.iter_mut() {
                spectral::dealias_in_place(c);
                // derivatives of periodic fields have zero mean
                c.coeffs_mut()[0] = Default::default();
            }
            spectral::leray_project_in_place(&mut s);
            for (jj, c) in s.iter().enumerate() {
                out.entry_mut(i, jj)
                    .copy_from_slice(spectral::inverse(c).data());
            }
        }
        out
    }

    /// Zero-mean solution of `Δn = ∂_i{φ^m(A) ∂A^m/∂x_i}`, so that
    /// `u = (∇A)*φ(A) − ∇n`.
    pub fn solve_n_a(&self, delta: &VectorField) -> Result<ScalarField> {
        let v = spectral::forward_vector(&self.weber_field(delta));
        let mut rhs = spectral::divergence(&v);
        // the divergence of a periodic field has zero mean; clear round-off
        rhs.coeffs_mut()[0] = Default::default();
        Ok(spectral::inverse(&spectral::inverse_laplacian(&rhs)?))
    }
}

/// One-shot `W[δ, φ]` with the default interpolation.
pub fn velocity_w(delta: &VectorField, phi: &VectorField) -> Result<VectorField> {
    Ok(EquationOfState::new(phi.clone(), Interpolation::default())?.velocity_w(delta))
}

/// Pressure `p = ∂n/∂t + u·∇n + ½|u|²` at the middle of the last three
/// samples of `n_path` (uniform spacing `dt`); `u` must be the velocity at
/// that middle time. Normalized to zero mean.
pub fn pressure(n_path: &[ScalarField], dt: f64, u: &VectorField) -> Result<ScalarField> {
    if n_path.len() < 3 {
        return Err(Error::InsufficientHistory { got: n_path.len() });
    }
    if !(dt > 0.0) {
        return Err(Error::BadParameters(format!(
            "time step must be positive, got {dt}"
        )));
    }
    let k = n_path.len();
    let (prev, mid, next) = (&n_path[k - 3], &n_path[k - 2], &n_path[k - 1]);
    let grad_n = spectral::grad_real(mid);
    let grid = u.grid();
    let data = (0..grid.len())
        .map(|i| {
            let dndt = (next.data()[i] - prev.data()[i]) / (2.0 * dt);
            let uu = u.at(i);
            let gn = grad_n.at(i);
            dndt + uu[0] * gn[0]
                + uu[1] * gn[1]
                + uu[2] * gn[2]
                + 0.5 * (uu[0] * uu[0] + uu[1] * uu[1] + uu[2] * uu[2])
        })
        .collect();
    let mut p = ScalarField::from_vec(grid, data)?;
    p.sub_mean();
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    fn abc(g: Grid) -> VectorField {
        VectorField::from_fn(g, |x, y, z| {
            [z.sin() + y.cos(), x.sin() + z.cos(), y.sin() + x.cos()]
        })
    }

    #[test]
    fn identity_chart_returns_phi() {
        let g = Grid::periodic_2pi(16).unwrap();
        let phi = abc(g);
        let eos = EquationOfState::new(phi.clone(), Interpolation::default()).unwrap();
        let u = eos.velocity_w(&VectorField::zeros(g));
        assert!(u.max_dist(&phi) < 1e-13);
    }

    #[test]
    fn rejects_compressible_phi() {
        let g = Grid::periodic_2pi(8).unwrap();
        let phi = VectorField::from_fn(g, |x, _, _| [x.sin(), 0.0, 0.0]);
        assert!(matches!(
            EquationOfState::new(phi, Interpolation::default()),
            Err(Error::BadParameters(_))
        ));
    }

    #[test]
    fn zero_vorticity_gives_zero_gradient() {
        // a constant φ is divergence and curl free
        let g = Grid::periodic_2pi(16).unwrap();
        let phi = VectorField::from_fn(g, |_, _, _| [0.3, -0.2, 0.1]);
        let eos = EquationOfState::new(phi, Interpolation::default()).unwrap();
        let delta =
            VectorField::from_fn(g, |x, y, z| [0.1 * y.sin(), 0.05 * z.cos(), 0.1 * x.cos()]);
        assert!(eos.velocity_gradient_det(&delta).max_norm() < 1e-14);
    }

    #[test]
    fn pressure_needs_three_samples() {
        let g = Grid::periodic_2pi(8).unwrap();
        let n = vec![ScalarField::zeros(g); 2];
        assert!(matches!(
            pressure(&n, 0.1, &VectorField::zeros(g)),
            Err(Error::InsufficientHistory { got: 2 })
        ));
        let n = vec![ScalarField::zeros(g); 3];
        assert_eq!(
            pressure(&n, 0.1, &VectorField::zeros(g)).unwrap().max_abs(),
            0.0
        );
    }

    #[test]
    fn det3_is_triple_product() {
        let a = [1.0, 2.0, 3.0];
        let b = [0.0, 1.0, 4.0];
        let c = [5.0, 6.0, 0.0];
        assert_eq!(det3(a, b, c), 1.0);
        assert_eq!(det3([1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]), 1.0);
    }
}
