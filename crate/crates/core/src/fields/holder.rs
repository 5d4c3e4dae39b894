use super::{MatrixField, ScalarField, VectorField};
use crate::grid::Grid;
use crate::spectral;

/// Estimate of a Hölder norm.
///
/// For C^{0,μ}: `total = sup_part + seminorm_part`. For C^{1,μ} the scaled
/// gradient term `L‖∇f‖_{0,μ}` is carried in `gradient_part` and added to the
/// total as well.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct HolderNorm {
    pub mu: f64,
    pub sup_part: f64,
    pub seminorm_part: f64,
    pub gradient_part: f64,
    pub total: f64,
}

impl HolderNorm {
    fn new(mu: f64, sup_part: f64, seminorm_part: f64, gradient_part: f64) -> Self {
        Self {
            mu,
            sup_part,
            seminorm_part,
            gradient_part,
            total: sup_part + seminorm_part + gradient_part,
        }
    }

    pub fn zero(mu: f64) -> Self {
        Self::new(mu, 0.0, 0.0, 0.0)
    }
}

/// C^{0,μ} estimate of a field given as a list of component arrays, with the
/// pointwise Euclidean (Frobenius for matrices) norm.
///
/// The seminorm is sampled on axis-aligned node pairs at periodic separations
/// of 1, 2, 4, …, n/2 grid steps.
pub fn holder_c0mu_components(grid: Grid, comps: &[&[f64]], mu: f64) -> HolderNorm {
    assert!(mu > 0.0 && mu < 1.0, "Hölder exponent must lie in (0, 1)");
    let n = grid.n();
    let norm_at = |i: usize| comps.iter().map(|c| c[i] * c[i]).sum::<f64>().sqrt();
    let sup = (0..grid.len()).fold(0.0_f64, |m, i| m.max(norm_at(i)));

    let mut semi: f64 = 0.0;
    let mut d2 = vec![0.0; grid.len()];
    let mut sep = 1;
    while sep <= n / 2 {
        let factor = (grid.period() / (sep as f64 * grid.spacing())).powf(mu);
        let mut worst: f64 = 0.0;
        for stride in [1, n, n * n] {
            d2.iter_mut().for_each(|v| *v = 0.0);
            for c in comps {
                shifted_sq_diff(c, &mut d2, n, stride, sep);
            }
            worst = d2.iter().fold(worst, |m, &v| m.max(v));
        }
        semi = semi.max(worst.sqrt() * factor);
        sep *= 2;
    }
    HolderNorm::new(mu, sup, semi, 0.0)
}

/// Adds `(c[x] - c[x + sep e])²` to `acc`, where `e` is the axis with the
/// given index stride.
fn shifted_sq_diff(c: &[f64], acc: &mut [f64], n: usize, stride: usize, sep: usize) {
    let block = n * stride;
    for (cb, ab) in c.chunks_exact(block).zip(acc.chunks_exact_mut(block)) {
        for a in 0..n {
            let src = a * stride;
            let dst = ((a + sep) % n) * stride;
            for ((x, y), s) in cb[src..src + stride]
                .iter()
                .zip(&cb[dst..dst + stride])
                .zip(&mut ab[src..src + stride])
            {
                *s += (x - y) * (x - y);
            }
        }
    }
}

pub fn holder_norm_c0mu(f: &ScalarField, mu: f64) -> HolderNorm {
    holder_c0mu_components(f.grid(), &[f.data()], mu)
}

pub fn holder_norm_c0mu_vector(f: &VectorField, mu: f64) -> HolderNorm {
    holder_c0mu_components(f.grid(), &[f.comp(0), f.comp(1), f.comp(2)], mu)
}

pub fn holder_norm_c0mu_matrix(f: &MatrixField, mu: f64) -> HolderNorm {
    let comps: Vec<&[f64]> = f.comps().iter().map(|c| c.as_slice()).collect();
    holder_c0mu_components(f.grid(), &comps, mu)
}

/// C^{1,μ} estimate: `‖f‖_{0,μ} + L‖∇f‖_{0,μ}` with a spectral gradient.
pub fn holder_norm_c1mu(f: &ScalarField, mu: f64) -> HolderNorm {
    let base = holder_norm_c0mu(f, mu);
    let g = spectral::grad_real(f);
    let grad = holder_norm_c0mu_vector(&g, mu);
    HolderNorm::new(
        mu,
        base.sup_part,
        base.seminorm_part,
        f.grid().period() * grad.total,
    )
}

pub fn holder_norm_c1mu_vector(f: &VectorField, mu: f64) -> HolderNorm {
    let base = holder_norm_c0mu_vector(f, mu);
    let grad = holder_norm_c0mu_matrix(&spectral::jacobian_real(f), mu);
    HolderNorm::new(
        mu,
        base.sup_part,
        base.seminorm_part,
        f.grid().period() * grad.total,
    )
}
