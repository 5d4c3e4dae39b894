//! Classical pseudo-spectral Euler solver in rotational form,
//! `∂u/∂t = P(u × ω)`, used to cross-check the active-vector solver.

use crate::error::{Error, Result};
use crate::evolve::ChartState;
use crate::fields::VectorField;
use crate::spectral;

#[derive(Clone, Debug, PartialEq)]
pub struct OracleState {
    pub u: VectorField,
    pub t: f64,
}

impl OracleState {
    /// Dealiases and projects `u`, so the state is spectrally divergence free.
    pub fn new(u: &VectorField, t: f64) -> Result<Self> {
        if !u.is_finite() {
            return Err(Error::NonFinite {
                what: "oracle initial velocity".into(),
            });
        }
        Ok(Self {
            u: spectral::dealias_project(u),
            t,
        })
    }

    pub fn dt_limit(&self, cfl: f64, dt_max: f64) -> f64 {
        let umax = self.u.max_norm();
        if umax > 0.0 {
            dt_max.min(cfl * self.u.grid().spacing() / umax)
        } else {
            dt_max
        }
    }
}

/// `P(u × ω)` with the product dealiased.
pub fn rhs(u: &VectorField) -> VectorField {
    let w = spectral::curl_real(u);
    let grid = u.grid();
    let mut cross = VectorField::zeros(grid);
    for c in 0..3 {
        let (a, b) = ((c + 1) % 3, (c + 2) % 3);
        let dst = cross.comp_mut(c);
        for idx in 0..grid.len() {
            dst[idx] = u.comp(a)[idx] * w.comp(b)[idx] - u.comp(b)[idx] * w.comp(a)[idx];
        }
    }
    spectral::dealias_project(&cross)
}

/// One RK4 step. `cfl` bounds `dt · max|u| / h`.
pub fn oracle_step(state: &OracleState, dt: f64, cfl: f64) -> Result<OracleState> {
    let limit = state.dt_limit(cfl, f64::INFINITY);
    if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
        return Err(Error::CflViolation { dt, limit });
    }
    let u0 = &state.u;
    let k1 = rhs(u0);
    let k2 = rhs(&u0.lincomb(1.0, &k1, 0.5 * dt));
    let k3 = rhs(&u0.lincomb(1.0, &k2, 0.5 * dt));
    let k4 = rhs(&u0.lincomb(1.0, &k3, dt));
    let mut u = u0.clone();
    u.axpy(dt / 6.0, &k1);
    u.axpy(dt / 3.0, &k2);
    u.axpy(dt / 3.0, &k3);
    u.axpy(dt / 6.0, &k4);
    if !u.is_finite() {
        return Err(Error::NonFinite {
            what: format!("oracle velocity at t = {}", state.t + dt),
        });
    }
    Ok(OracleState { u, t: state.t + dt })
}

/// Relative L² distance between the active-vector velocity and the oracle's.
pub fn compare(active: &ChartState, oracle: &OracleState) -> Result<f64> {
    let (ga, go) = (active.u.grid(), oracle.u.grid());
    if ga != go {
        return Err(Error::GridMismatch(format!(
            "active n = {}, L = {}; oracle n = {}, L = {}",
            ga.n(),
            ga.period(),
            go.n(),
            go.period()
        )));
    }
    let tol = 1e-9 * active.t_now.abs().max(1.0);
    if (active.t_now - oracle.t).abs() > tol {
        return Err(Error::TimeMismatch {
            a: active.t_now,
            b: oracle.t,
        });
    }
    Ok(active.u.rel_l2_dist(&oracle.u))
}
