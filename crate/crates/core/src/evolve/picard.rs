//! Successive approximations for the self-consistent displacement on a
//! fixed interval `[0, T]`.
//!
//! Iterate `n + 1` solves the *linear* problem
//! `∂θ/∂t + u_n·∇θ + u_n = 0`, `θ(·, 0) = 0`, where
//! `u_n(t) = W[δ_n(t), φ]` comes from the stored path of iterate `n`. Paths
//! live on the uniform time grid; half-step values needed by RK4 use linear
//! interpolation of δ in time.

use super::{rhs_theta, RunConfig};
use crate::eos::EquationOfState;
use crate::error::{Error, Result};
use crate::fields::{holder_norm_c0mu_vector, VectorField};
use crate::spectral;

#[derive(Clone, Debug)]
pub struct PicardRun {
    pub times: Vec<f64>,
    /// Path of the last iterate on `times`; the zero path before any
    /// iteration.
    pub last_path: Vec<VectorField>,
    /// `sup_t sup_x |δ_{n+1} − δ_n|` for n = 0, 1, ….
    pub residuals: Vec<f64>,
    /// `sup_t ‖δ_{n+1} − δ_n‖_{0,μ}`.
    pub holder_residuals: Vec<f64>,
    pub converged: bool,
}

impl PicardRun {
    pub fn fixed_point(&self) -> &[VectorField] {
        &self.last_path
    }

    /// δ at `T` from the last iterate.
    pub fn final_delta(&self) -> &VectorField {
        self.fixed_point().last().expect("non-empty path")
    }

    pub fn iterations(&self) -> usize {
        self.residuals.len()
    }

    /// Successive ratios `r_{n+1} / r_n` of the Hölder residuals.
    pub fn contraction_ratios(&self) -> Vec<f64> {
        self.holder_residuals
            .windows(2)
            .map(|w| w[1] / w[0])
            .collect()
    }
}

/// Interval length `c ε / ‖∇×φ‖_{0,μ}` within which the fixed-point argument applies.
pub fn picard_interval(phi: &VectorField, cfg: &RunConfig) -> f64 {
    let zeta = spectral::curl_real(phi);
    let norm = holder_norm_c0mu_vector(&zeta, cfg.mu).total;
    if norm > 0.0 {
        cfg.interval_constant * cfg.epsilon_reset / norm
    } else {
        f64::INFINITY
    }
}

/// Number of times the residual may fail to decrease in a row.
const STALL_LIMIT: usize = 3;

/// Runs successive approximations over `[0, cfg.t_end]` with `steps`
/// uniform RK4 steps.
pub fn picard_solve(phi: &VectorField, cfg: &RunConfig, steps: usize) -> Result<PicardRun> {
    if steps == 0 {
        return Err(Error::BadParameters(
            "picard needs at least one time step".into(),
        ));
    }
    let grid = phi.grid();
    let eos = EquationOfState::new(phi.clone(), cfg.interpolation)?;
    let dt = cfg.t_end / steps as f64;
    let times: Vec<f64> = (0..=steps).map(|k| k as f64 * dt).collect();
    let zero_path = vec![VectorField::zeros(grid); steps + 1];

    let mut run = PicardRun {
        times,
        last_path: zero_path,
        residuals: Vec::new(),
        holder_residuals: Vec::new(),
        converged: false,
    };
    let mut stalls = 0;
    for _ in 0..cfg.picard_max_iter {
        let prev = &run.last_path;
        let next = advect_linear(&eos, prev, dt)?;
        let mut sup: f64 = 0.0;
        let mut hold: f64 = 0.0;
        for (a, b) in next.iter().zip(prev) {
            let d = a.sub(b);
            sup = sup.max(d.max_norm());
            hold = hold.max(holder_c0_of_vector(&d, cfg.mu));
        }
        if let Some(&last) = run.residuals.last() {
            if sup >= last {
                stalls += 1;
            } else {
                stalls = 0;
            }
        }
        run.residuals.push(sup);
        run.holder_residuals.push(hold);
        run.last_path = next;
        if sup < cfg.picard_tol {
            run.converged = true;
            return Ok(run);
        }
        if stalls >= STALL_LIMIT {
            return Err(Error::NoContraction {
                iterations: run.residuals.len(),
                residuals: run.residuals,
            });
        }
    }
    Ok(run)
}

fn holder_c0_of_vector(v: &VectorField, mu: f64) -> f64 {
    holder_norm_c0mu_vector(v, mu).total
}

/// Solves the linear transport problem driven by the velocity of `path`.
fn advect_linear(eos: &EquationOfState, path: &[VectorField], dt: f64) -> Result<Vec<VectorField>> {
    let grid = path[0].grid();
    let node_u: Vec<VectorField> = path.iter().map(|d| eos.velocity_w(d)).collect();
    let mut theta = VectorField::zeros(grid);
    let mut out = Vec::with_capacity(path.len());
    out.push(theta.clone());
    for k in 0..path.len() - 1 {
        let mid = path[k].lincomb(0.5, &path[k + 1], 0.5);
        let u_mid = eos.velocity_w(&mid);
        let k1 = rhs_theta(&theta, &node_u[k]);
        let k2 = rhs_theta(&theta.lincomb(1.0, &k1, 0.5 * dt), &u_mid);
        let k3 = rhs_theta(&theta.lincomb(1.0, &k2, 0.5 * dt), &u_mid);
        let k4 = rhs_theta(&theta.lincomb(1.0, &k3, dt), &node_u[k + 1]);
        theta.axpy(dt / 6.0, &k1);
        theta.axpy(dt / 3.0, &k2);
        theta.axpy(dt / 3.0, &k3);
        theta.axpy(dt / 6.0, &k4);
        if !theta.is_finite() {
            return Err(Error::NonFinite {
                what: format!("picard iterate at step {}", k + 1),
            });
        }
        out.push(theta.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    #[test]
    fn zero_phi_converges_immediately() {
        let g = Grid::periodic_2pi(8).unwrap();
        let cfg = RunConfig {
            t_end: 0.1,
            ..Default::default()
        };
        let run = picard_solve(&VectorField::zeros(g), &cfg, 4).unwrap();
        assert!(run.converged);
        assert_eq!(run.iterations(), 1);
        assert_eq!(run.final_delta().max_norm(), 0.0);
    }

    #[test]
    fn interval_infinite_for_irrotational_phi() {
        let g = Grid::periodic_2pi(8).unwrap();
        let phi = VectorField::from_fn(g, |_, _, _| [1.0, 0.0, 0.0]);
        assert!(picard_interval(&phi, &RunConfig::default()).is_infinite());
    }
}
