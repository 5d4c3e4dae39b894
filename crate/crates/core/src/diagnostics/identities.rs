//! Pointwise identities of the back-to-labels map `A = x + δ`.
//!
//! Columns `c_m = ∂A/∂x_m` of `J = ∇A` are the building blocks: row `i` of
//! the cofactor inverse is `c_{i+1} × c_{i+2}`, which is the true inverse
//! whenever `det J = 1`.

use crate::eos::{det3, grad_a, EquationOfState};
use crate::fields::{Interpolation, MatrixField, ScalarField, VectorField};
use crate::spectral;

/// Levi-Civita symbol on indices 0..3.
#[inline]
fn levi(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

#[inline]
fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
fn col(j: &[[f64; 3]; 3], m: usize) -> [f64; 3] {
    [j[0][m], j[1][m], j[2][m]]
}

/// `((∇A)⁻¹)_ij = ½ ε_imn Det[e_j; ∂A/∂x_m; ∂A/∂x_n]`, without any matrix
/// inversion.
pub fn inverse_grad_a(delta: &VectorField) -> MatrixField {
    cofactor_inverse(&grad_a(delta))
}

/// Cofactor form of the inverse for a given `J = ∇A`.
pub fn cofactor_inverse(jac: &MatrixField) -> MatrixField {
    let grid = jac.grid();
    let mut out = MatrixField::zeros(grid);
    for idx in 0..grid.len() {
        let j = jac.at(idx);
        let mut inv = [[0.0; 3]; 3];
        for (i, row) in inv.iter_mut().enumerate() {
            *row = cross(col(&j, (i + 1) % 3), col(&j, (i + 2) % 3));
        }
        out.set(idx, &inv);
    }
    out
}

/// Pointwise `det(I + ∇δ)`.
pub fn det_grad_a(delta: &VectorField) -> ScalarField {
    det_of(&grad_a(delta))
}

pub fn det_of(jac: &MatrixField) -> ScalarField {
    let grid = jac.grid();
    let data = (0..grid.len())
        .map(|idx| {
            let j = jac.at(idx);
            det3(col(&j, 0), col(&j, 1), col(&j, 2))
        })
        .collect();
    ScalarField::from_vec(grid, data).expect("grid sized")
}

/// Applies a matrix field to a vector field pointwise.
pub fn apply(m: &MatrixField, v: &[Vec<f64>]) -> VectorField {
    let grid = m.grid();
    let mut out = VectorField::zeros(grid);
    for r in 0..3 {
        let dst = out.comp_mut(r);
        for (c, vc) in v.iter().enumerate() {
            for ((d, a), x) in dst.iter_mut().zip(m.entry(r, c)).zip(vc) {
                *d += a * x;
            }
        }
    }
    out
}

/// Cauchy vorticity `(∇A)⁻¹ ζ(A)`.
pub fn cauchy_vorticity(delta: &VectorField, eos: &EquationOfState) -> VectorField {
    apply(&inverse_grad_a(delta), &eos.zeta_at_map(delta))
}

/// `L_j f = ½ ε_imn ε_jkl (∂A_k/∂x_m)(∂A_l/∂x_n) ∂f/∂x_i`, with spectral
/// derivatives; the product is dealiased. `j` is 0-based.
pub fn label_derivative(delta: &VectorField, f: &ScalarField, j: usize) -> ScalarField {
    assert!(j < 3, "label index must be 0, 1 or 2");
    let jac = grad_a(delta);
    let grad_f = spectral::grad_real(f);
    let mut out = label_sum(&jac, grad_f.comps(), j);
    out = spectral::dealias_real(&out);
    out
}

/// `Σ_i ½ ε_imn ε_jkl J_km J_ln g_i`, the explicit double Levi-Civita sum.
fn label_sum(jac: &MatrixField, g: &[Vec<f64>; 3], j: usize) -> ScalarField {
    let grid = jac.grid();
    let mut out = vec![0.0; grid.len()];
    for i in 0..3 {
        for m in 0..3 {
            for n in 0..3 {
                let e1 = levi(i, m, n);
                if e1 == 0.0 {
                    continue;
                }
                for k in 0..3 {
                    for l in 0..3 {
                        let e = 0.5 * e1 * levi(j, k, l);
                        if e == 0.0 {
                            continue;
                        }
                        let (a, b, gi) = (jac.entry(k, m), jac.entry(l, n), &g[i]);
                        for (idx, o) in out.iter_mut().enumerate() {
                            *o += e * a[idx] * b[idx] * gi[idx];
                        }
                    }
                }
            }
        }
    }
    ScalarField::from_vec(grid, out).expect("grid sized")
}

/// `L_j[x_i]` for the (non-periodic) coordinate function `x_i`, through the
/// displacement: `x_i = A_i − δ_i` and `L_j[A_i] = det(∇A) δ_ij`. The product
/// is evaluated pointwise, as coordinates have no Fourier representation.
pub fn label_derivative_of_coordinate(delta: &VectorField, i: usize, j: usize) -> ScalarField {
    assert!(i < 3 && j < 3, "indices must be 0, 1 or 2");
    let jac = grad_a(delta);
    let grad_delta_i = spectral::grad_real(&delta.scalar(i));
    let mut out = label_sum(&jac, grad_delta_i.comps(), j);
    out.scale(-1.0);
    if i == j {
        out.axpy(1.0, &det_of(&jac));
    }
    out
}

/// `ω_p = ½ ε_pil Det[ζ(A); ∂A/∂x_i; ∂A/∂x_l]`.
pub fn vorticity_from_determinants(delta: &VectorField, eos: &EquationOfState) -> VectorField {
    let jac = grad_a(delta);
    let zeta_a = eos.zeta_at_map(delta);
    let grid = delta.grid();
    let mut out = VectorField::zeros(grid);
    for idx in 0..grid.len() {
        let j = jac.at(idx);
        let z = [zeta_a[0][idx], zeta_a[1][idx], zeta_a[2][idx]];
        for p in 0..3 {
            let mut s = 0.0;
            for i in 0..3 {
                for l in 0..3 {
                    let e = levi(p, i, l);
                    if e != 0.0 {
                        s += 0.5 * e * det3(z, col(&j, i), col(&j, l));
                    }
                }
            }
            out.comp_mut(p)[idx] = s;
        }
    }
    out
}

/// `w_ψ = (∇A)* ψ(A)`, unprojected.
pub fn w_field(delta: &VectorField, psi: &VectorField, scheme: Interpolation) -> VectorField {
    let psi_a = crate::fields::compose(psi, delta, scheme);
    crate::eos::apply_transpose(&grad_a(delta), psi_a.comps())
}

/// Relative threshold on |ω| below which ξ = ω/|ω| is treated as undefined.
pub const XI_MASK: f64 = 1e-8;

/// Stretching rate `α = ξᵀ(∇u)ξ` with `ξ = ω/|ω|`; zero where |ω| is below
/// `XI_MASK` times its maximum.
pub fn stretching_alpha(u: &VectorField, omega: &VectorField) -> ScalarField {
    let grid = u.grid();
    let grad_u = spectral::jacobian_real(u);
    let mag = omega.magnitude();
    let cut = XI_MASK * mag.max_abs();
    let data = (0..grid.len())
        .map(|idx| {
            let w = mag.data()[idx];
            if w <= cut || w == 0.0 {
                return 0.0;
            }
            let xi = omega.at(idx).map(|c| c / w);
            let g = grad_u.at(idx);
            // g[c][i] = ∂u_c/∂x_i, so ξ·(ξ·∇)u = Σ ξ_c g[c][i] ξ_i
            let mut a = 0.0;
            for c in 0..3 {
                for i in 0..3 {
                    a += xi[c] * g[c][i] * xi[i];
                }
            }
            a
        })
        .collect();
    ScalarField::from_vec(grid, data).expect("grid sized")
}

/// Euler–Lagrange calibrator `C(x; z) = ∇A(x + z) (∇A(x))⁻¹` on a
/// subsampled grid.
#[derive(Clone, Debug)]
pub struct Calibrator {
    /// Grid shifts z, in nodes.
    pub offsets: Vec<[i64; 3]>,
    /// Sampled node indices.
    pub samples: Vec<usize>,
    /// `values[o][s]` is C at sample `s` for offset `o`.
    pub values: Vec<Vec<[[f64; 3]; 3]>>,
    /// Max over samples and offsets of the Frobenius norm of `C − I`.
    pub summary: f64,
}

/// Default subsampling stride of the calibrator, per axis.
pub const CALIBRATOR_STRIDE: usize = 4;

pub fn calibrator(delta: &VectorField, offsets: &[[i64; 3]], stride: usize) -> Calibrator {
    assert!(stride >= 1, "stride must be positive");
    let grid = delta.grid();
    let n = grid.n();
    let jac = grad_a(delta);
    let samples: Vec<usize> = (0..n)
        .step_by(stride)
        .flat_map(|k| {
            (0..n)
                .step_by(stride)
                .flat_map(move |j| (0..n).step_by(stride).map(move |i| (i, j, k)))
        })
        .map(|(i, j, k)| grid.idx(i, j, k))
        .collect();
    let mut summary: f64 = 0.0;
    let values = offsets
        .iter()
        .map(|z| {
            samples
                .iter()
                .map(|&s| {
                    let (i, j, k) = grid.ijk(s);
                    let ijk = [i, j, k];
                    let [a, b, c] =
                        [0, 1, 2].map(|d| (ijk[d] as i64 + z[d]).rem_euclid(n as i64) as usize);
                    let jz = jac.at(grid.idx(a, b, c));
                    let inv = true_inverse(&jac.at(s));
                    let mut m = [[0.0; 3]; 3];
                    for r in 0..3 {
                        for cc in 0..3 {
                            m[r][cc] = (0..3).map(|q| jz[r][q] * inv[q][cc]).sum();
                        }
                    }
                    let dev: f64 = (0..9)
                        .map(|e| (m[e / 3][e % 3] - if e / 3 == e % 3 { 1.0 } else { 0.0 }).powi(2))
                        .sum();
                    summary = summary.max(dev.sqrt());
                    m
                })
                .collect()
        })
        .collect();
    Calibrator {
        offsets: offsets.to_vec(),
        samples,
        values,
        summary,
    }
}

/// Cofactor inverse divided by the determinant.
fn true_inverse(j: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let det = det3(col(j, 0), col(j, 1), col(j, 2));
    let mut inv = [[0.0; 3]; 3];
    for (i, row) in inv.iter_mut().enumerate() {
        *row = cross(col(j, (i + 1) % 3), col(j, (i + 2) % 3)).map(|v| v / det);
    }
    inv
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    fn sample_delta(g: Grid, amp: f64) -> VectorField {
        VectorField::from_fn(g, |x, y, z| {
            [
                amp * (y + 0.3).sin(),
                amp * (z - 2.0 * x).cos(),
                amp * (x + y).sin() * 0.5,
            ]
        })
    }

    #[test]
    fn inverse_multiplies_back_to_identity_with_det() {
        let g = Grid::periodic_2pi(16).unwrap();
        let d = sample_delta(g, 0.08);
        let jac = grad_a(&d);
        let inv = cofactor_inverse(&jac);
        let det = det_of(&jac);
        for idx in 0..g.len() {
            let (a, b) = (inv.at(idx), jac.at(idx));
            for r in 0..3 {
                for c in 0..3 {
                    let p: f64 = (0..3).map(|q| a[r][q] * b[q][c]).sum();
                    let expect = if r == c { det.data()[idx] } else { 0.0 };
                    assert!((p - expect).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn identity_map_cases() {
        let g = Grid::periodic_2pi(8).unwrap();
        let zero = VectorField::zeros(g);
        assert_eq!(inverse_grad_a(&zero), MatrixField::identity(g));
        assert!(det_grad_a(&zero).data().iter().all(|&v| v == 1.0));
        let cal = calibrator(&zero, &[[0, 0, 0], [1, 2, 3]], 2);
        assert_eq!(cal.summary, 0.0);
        let f = ScalarField::from_fn(g, |x, y, _| x.sin() * y.cos());
        let lf = label_derivative(&zero, &f, 1);
        let df = spectral::grad_real(&f);
        assert!(lf
            .data()
            .iter()
            .zip(df.comp(1))
            .all(|(a, b)| (a - b).abs() < 1e-14));
    }

    #[test]
    fn shear_is_unimodular() {
        let g = Grid::periodic_2pi(16).unwrap();
        let d = VectorField::from_fn(g, |_, y, _| [0.4 * y.sin(), 0.0, 0.0]);
        assert!(det_grad_a(&d)
            .data()
            .iter()
            .all(|&v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn calibrator_at_zero_offset_is_identity() {
        let g = Grid::periodic_2pi(16).unwrap();
        let cal = calibrator(&sample_delta(g, 0.1), &[[0, 0, 0]], CALIBRATOR_STRIDE);
        assert_eq!(cal.samples.len(), 64);
        assert!(cal.summary < 1e-15, "{}", cal.summary);
    }

    #[test]
    fn antisymmetric_gradient_has_no_stretching() {
        let g = Grid::periodic_2pi(8).unwrap();
        // u = (−y', x', 0)-like shear pair with ω along e3 only
        let u = VectorField::from_fn(g, |x, y, _| [-y.sin(), x.sin(), 0.0]);
        let w = spectral::curl_real(&u);
        let a = stretching_alpha(&u, &w);
        assert!(a.max_abs() < 1e-14);
    }
}
