//! Time evolution of the displacement δ in charts.
//!
//! Inside a chart the map is `A = x + δ` with `δ(·, t_start) = 0` and
//!
//! ```text
//! ∂δ/∂t + u·∇δ + u = 0,    u = W[δ, φ]
//! ```
//!
//! A chart ends when the Hölder norm of ∇δ reaches `epsilon_reset`; the next
//! chart starts from the identity map with φ set to the current velocity.

mod picard;

pub use picard::{picard_interval, picard_solve, PicardRun};

use crate::eos::EquationOfState;
use crate::error::{Error, Result};
use crate::fields::{holder_norm_c0mu_matrix, HolderNorm, Interpolation, MatrixField, VectorField};
use crate::spectral;
use std::sync::Arc;

/// Which quantity ends a chart.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ResetTrigger {
    /// C^{0,μ} estimate of ∇δ.
    #[default]
    Holder,
    /// Plain sup |∇δ|; cheaper.
    SupGradient,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub epsilon_reset: f64,
    pub mu: f64,
    pub cfl: f64,
    pub dt_max: f64,
    pub t_end: f64,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    /// Constant `c` in the admissible interval `T ‖∇×φ‖_{0,μ} ≤ c ε`.
    pub interval_constant: f64,
    pub trigger: ResetTrigger,
    pub interpolation: Interpolation,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            epsilon_reset: 0.25,
            mu: 0.5,
            cfl: 0.5,
            dt_max: 1e-2,
            t_end: 1.0,
            picard_tol: 1e-10,
            picard_max_iter: 30,
            interval_constant: 0.1,
            trigger: ResetTrigger::Holder,
            interpolation: Interpolation::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::BadParameters(m.to_string()));
        if !(self.epsilon_reset > 0.0 && self.epsilon_reset <= 0.5) {
            return bad("epsilon_reset must lie in (0, 0.5]");
        }
        if !(self.mu > 0.0 && self.mu < 1.0) {
            return bad("mu must lie in (0, 1)");
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return bad("cfl must lie in (0, 1]");
        }
        if !(self.dt_max > 0.0 && self.dt_max.is_finite()) {
            return bad("dt_max must be positive");
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad("t_end must be positive");
        }
        if !(self.picard_tol > 0.0) || self.picard_max_iter == 0 {
            return bad("picard_tol and picard_max_iter must be positive");
        }
        if !(self.interval_constant > 0.0) {
            return bad("interval_constant must be positive");
        }
        self.interpolation.validate()
    }
}

/// One chart of the continuation scheme.
#[derive(Clone, Debug)]
pub struct ChartState {
    pub chart_index: usize,
    pub t_start: f64,
    pub t_now: f64,
    pub delta: VectorField,
    /// `W[δ, φ]` for the current δ.
    pub u: VectorField,
    pub holder_grad_delta: HolderNorm,
    /// sup |∇δ|, Frobenius.
    pub sup_grad_delta: f64,
    /// ∇δ for the current δ; entry `(m, i)` is ∂δ_m/∂x_i.
    pub grad_delta: MatrixField,
    eos: Arc<EquationOfState>,
}

impl ChartState {
    /// Chart starting at time `t` from the identity map with initial velocity φ.
    pub fn new(
        phi: VectorField,
        t: f64,
        chart_index: usize,
        scheme: Interpolation,
        mu: f64,
    ) -> Result<Self> {
        let grid = phi.grid();
        let eos = Arc::new(EquationOfState::new(phi, scheme)?);
        let delta = VectorField::zeros(grid);
        let u = eos.velocity_w(&delta);
        Ok(Self {
            chart_index,
            t_start: t,
            t_now: t,
            delta,
            u,
            holder_grad_delta: HolderNorm::zero(mu),
            sup_grad_delta: 0.0,
            grad_delta: MatrixField::zeros(grid),
            eos,
        })
    }

    pub fn phi(&self) -> &VectorField {
        self.eos.phi()
    }

    pub fn zeta(&self) -> &VectorField {
        self.eos.zeta()
    }

    pub fn eos(&self) -> &EquationOfState {
        &self.eos
    }

    /// Largest step allowed by the CFL condition and `dt_max`.
    pub fn dt_limit(&self, cfl: f64, dt_max: f64) -> f64 {
        let umax = self.u.max_norm();
        if umax > 0.0 {
            dt_max.min(cfl * self.delta.grid().spacing() / umax)
        } else {
            dt_max
        }
    }
}

/// `−(u·∇)δ − u`, with the product formed pointwise and dealiased.
pub fn rhs_theta(delta: &VectorField, u: &VectorField) -> VectorField {
    rhs_theta_with_gradient(&spectral::jacobian_real(delta), u)
}

/// As [`rhs_theta`] with ∇δ given: entry `(m, i)` is ∂δ_m/∂x_i.
pub(crate) fn rhs_theta_with_gradient(grad_delta: &MatrixField, u: &VectorField) -> VectorField {
    let grid = u.grid();
    let mut adv = VectorField::zeros(grid);
    for m in 0..3 {
        let dst = adv.comp_mut(m);
        for i in 0..3 {
            let g = grad_delta.entry(m, i);
            let ui = u.comp(i);
            for idx in 0..grid.len() {
                dst[idx] += ui[idx] * g[idx];
            }
        }
    }
    let mut out = spectral::dealias_vector(&adv);
    out.axpy(1.0, u);
    out.scale(-1.0);
    out
}

/// Velocities at the four RK4 stages of a step, in stage order
/// (times t, t + dt/2, t + dt/2, t + dt).
pub type StageVelocities = [VectorField; 4];

/// Tolerance on the CFL test, relative to the limit.
const CFL_SLACK: f64 = 1e-12;

/// Classical RK4 step of the self-consistent system, recomputing u at every
/// stage.
pub fn step_self_consistent(state: &ChartState, dt: f64, cfg: &RunConfig) -> Result<ChartState> {
    step_with_stages(state, dt, cfg).map(|(s, _)| s)
}

/// [`step_self_consistent`] that also returns the stage velocities.
pub fn step_with_stages(
    state: &ChartState,
    dt: f64,
    cfg: &RunConfig,
) -> Result<(ChartState, StageVelocities)> {
    let limit = state.dt_limit(cfg.cfl, cfg.dt_max);
    if !(dt > 0.0) || dt > limit * (1.0 + CFL_SLACK) {
        return Err(Error::CflViolation { dt, limit });
    }
    let eos = &state.eos;
    let delta0 = &state.delta;

    let u1 = state.u.clone();
    let k1 = rhs_theta_with_gradient(&state.grad_delta, &u1);
    let d2 = delta0.lincomb(1.0, &k1, 0.5 * dt);
    let (u2, j2) = eos.velocity_with_jacobian(&d2);
    let k2 = rhs_theta_with_gradient(&minus_identity(j2), &u2);
    let d3 = delta0.lincomb(1.0, &k2, 0.5 * dt);
    let (u3, j3) = eos.velocity_with_jacobian(&d3);
    let k3 = rhs_theta_with_gradient(&minus_identity(j3), &u3);
    let d4 = delta0.lincomb(1.0, &k3, dt);
    let (u4, j4) = eos.velocity_with_jacobian(&d4);
    let k4 = rhs_theta_with_gradient(&minus_identity(j4), &u4);

    let mut delta = delta0.clone();
    delta.axpy(dt / 6.0, &k1);
    delta.axpy(dt / 3.0, &k2);
    delta.axpy(dt / 3.0, &k3);
    delta.axpy(dt / 6.0, &k4);
    if !delta.is_finite() {
        return Err(Error::NonFinite {
            what: format!("displacement at t = {}", state.t_now + dt),
        });
    }
    let (u, jac) = eos.velocity_with_jacobian(&delta);
    if !u.is_finite() {
        return Err(Error::NonFinite {
            what: format!("velocity at t = {}", state.t_now + dt),
        });
    }
    let grad_delta = minus_identity(jac);
    let holder = match cfg.trigger {
        ResetTrigger::Holder => holder_norm_c0mu_matrix(&grad_delta, cfg.mu),
        ResetTrigger::SupGradient => HolderNorm::zero(cfg.mu),
    };
    let next = ChartState {
        chart_index: state.chart_index,
        t_start: state.t_start,
        t_now: state.t_now + dt,
        delta,
        u,
        holder_grad_delta: holder,
        sup_grad_delta: grad_delta.max_norm(),
        grad_delta,
        eos: state.eos.clone(),
    };
    Ok((next, [u1, u2, u3, u4]))
}

fn minus_identity(mut jac: MatrixField) -> MatrixField {
    for d in 0..3 {
        jac.entry_mut(d, d).iter_mut().for_each(|v| *v -= 1.0);
    }
    jac
}

/// Value compared against `epsilon_reset`.
pub fn reset_measure(state: &ChartState, trigger: ResetTrigger) -> f64 {
    match trigger {
        ResetTrigger::Holder => state.holder_grad_delta.total,
        ResetTrigger::SupGradient => state.sup_grad_delta,
    }
}

/// Advances until `t_end` or until the reset measure reaches
/// `epsilon_reset`. The step that crosses the threshold is kept and is the
/// last step of the chart; the flag reports whether a reset is due.
///
/// `observer` sees every accepted state with its stage velocities.
pub fn run_chart_with(
    mut state: ChartState,
    cfg: &RunConfig,
    mut observer: impl FnMut(&ChartState, &StageVelocities) -> Result<()>,
) -> Result<(ChartState, bool)> {
    let t_tol = 1e-12 * cfg.t_end.abs().max(1.0);
    while state.t_now < cfg.t_end - t_tol {
        let dt = state
            .dt_limit(cfg.cfl, cfg.dt_max)
            .min(cfg.t_end - state.t_now);
        let (next, stages) = step_with_stages(&state, dt, cfg)?;
        state = next;
        observer(&state, &stages)?;
        if reset_measure(&state, cfg.trigger) >= cfg.epsilon_reset {
            return Ok((state, true));
        }
    }
    Ok((state, false))
}

pub fn run_chart(state: ChartState, cfg: &RunConfig) -> Result<(ChartState, bool)> {
    run_chart_with(state, cfg, |_, _| Ok(()))
}

/// New chart at `t_now` with φ = P u and δ = 0.
pub fn reset_chart(state: &ChartState) -> Result<ChartState> {
    let phi = spectral::project_real(&state.u);
    let mu = state.holder_grad_delta.mu;
    ChartState::new(
        phi,
        state.t_now,
        state.chart_index + 1,
        state.eos.scheme(),
        mu,
    )
}
