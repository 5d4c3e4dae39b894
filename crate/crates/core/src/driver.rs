//! Run orchestration: chart-resetting evolution with diagnostics, the
//! oracle cross-check and the successive-approximation mode.

use crate::diagnostics::{Diagnostics, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::evolve::{
    picard_solve, reset_chart, reset_measure, step_with_stages, ChartState, PicardRun, RunConfig,
};
use crate::fields::{MarkerLoop, VectorField};
use crate::oracle::{self, OracleState};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Direct,
    Picard,
    OracleCompare,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Direct => "direct",
            Mode::Picard => "picard",
            Mode::OracleCompare => "oracle_compare",
        }
    }
}

/// CFL number used for the oracle's own step check. The oracle takes the
/// active solver's steps, whose speed differs only at the comparison level.
pub const ORACLE_CFL: f64 = 1.0;

/// A runtime failure with the chart and time at which it happened.
#[derive(Clone, Debug, PartialEq)]
pub struct RunError {
    pub chart_index: usize,
    pub t: f64,
    pub error: Error,
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "chart {} at t = {}: {}",
            self.chart_index, self.t, self.error
        )
    }
}

impl std::error::Error for RunError {}

/// Diagnostics row of a direct or oracle-compare run.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub step: usize,
    pub dt: f64,
    pub chart_index: usize,
    /// sup |δ| in the current chart.
    pub sup_delta: f64,
    /// sup |u(t) − u(0)|.
    pub velocity_drift: f64,
    pub record: DiagnosticsRecord,
    /// Oracle distance, oracle-compare mode only.
    pub compare: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub rows: Vec<Row>,
    pub final_state: ChartState,
    pub oracle: Option<OracleState>,
    pub steps: usize,
    pub charts: usize,
    /// Largest sup |δ| reached in any chart, over every step.
    pub max_sup_delta: f64,
}

/// Steps from φ at t = 0 to `run.t_end`, resetting charts at
/// `run.epsilon_reset`. A row is recorded at step 0, every `cadence` steps
/// and at the last step; `sink` sees each row with the state it describes.
pub fn run_direct(
    phi: &VectorField,
    run: &RunConfig,
    cadence: usize,
    loops: Vec<MarkerLoop>,
    with_oracle: bool,
    mut sink: impl FnMut(&Row, &ChartState, Option<&OracleState>) -> Result<()>,
) -> std::result::Result<RunOutput, RunError> {
    let at = |c: usize, t: f64| {
        move |error: Error| RunError {
            chart_index: c,
            t,
            error,
        }
    };
    run.validate().map_err(at(0, 0.0))?;
    if cadence == 0 {
        return Err(at(0, 0.0)(Error::BadParameters(
            "cadence must be at least 1".into(),
        )));
    }
    let grid = phi.grid();
    let mut state =
        ChartState::new(phi.clone(), 0.0, 0, run.interpolation, run.mu).map_err(at(0, 0.0))?;
    let u0 = state.u.clone();
    let mut oracle = if with_oracle {
        Some(OracleState::new(phi, 0.0).map_err(at(0, 0.0))?)
    } else {
        None
    };
    let mut diag = Diagnostics::new(grid, run.interpolation, loops);
    let mut rows = Vec::new();
    let mut max_sup_delta: f64 = 0.0;
    let mut step = 0;

    let mut emit = |step: usize,
                    dt: f64,
                    state: &ChartState,
                    oracle: Option<&OracleState>,
                    diag: &mut Diagnostics,
                    rows: &mut Vec<Row>|
     -> Result<()> {
        let record = diag.record(state)?;
        let compare = oracle.map(|o| oracle::compare(state, o)).transpose()?;
        let row = Row {
            step,
            dt,
            chart_index: state.chart_index,
            sup_delta: state.delta.max_norm(),
            velocity_drift: state.u.max_dist(&u0),
            record,
            compare,
        };
        sink(&row, state, oracle)?;
        rows.push(row);
        Ok(())
    };

    emit(0, 0.0, &state, oracle.as_ref(), &mut diag, &mut rows).map_err(at(0, 0.0))?;
    let t_tol = 1e-12 * run.t_end.max(1.0);
    while state.t_now < run.t_end - t_tol {
        let (c, t) = (state.chart_index, state.t_now);
        let dt = state
            .dt_limit(run.cfl, run.dt_max)
            .min(run.t_end - state.t_now);
        let (next, stages) = step_with_stages(&state, dt, run).map_err(at(c, t))?;
        diag.advect_loops(&stages, dt);
        if let Some(o) = oracle.as_mut() {
            *o = oracle::oracle_step(o, dt, ORACLE_CFL).map_err(at(c, t))?;
            // keep both clocks on the same floating-point sum
            o.t = next.t_now;
        }
        state = next;
        step += 1;
        max_sup_delta = max_sup_delta.max(state.delta.max_norm());
        let last = state.t_now >= run.t_end - t_tol;
        if step % cadence == 0 || last {
            emit(step, dt, &state, oracle.as_ref(), &mut diag, &mut rows)
                .map_err(at(c, state.t_now))?;
        }
        if !last && reset_measure(&state, run.trigger) >= run.epsilon_reset {
            state = reset_chart(&state).map_err(at(c, state.t_now))?;
        }
    }
    Ok(RunOutput {
        rows,
        charts: state.chart_index + 1,
        final_state: state,
        oracle,
        steps: step,
        max_sup_delta,
    })
}

/// Residual row of a successive-approximation run.
#[derive(Clone, Debug, PartialEq)]
pub struct PicardRow {
    pub iteration: usize,
    pub residual: f64,
    pub holder_residual: f64,
    /// `residual_n / residual_{n−1}`; absent on the first iteration.
    pub ratio: Option<f64>,
}

pub fn picard_rows(residuals: &[f64], holder_residuals: &[f64]) -> Vec<PicardRow> {
    residuals
        .iter()
        .enumerate()
        .map(|(i, &r)| PicardRow {
            iteration: i + 1,
            residual: r,
            holder_residual: holder_residuals.get(i).copied().unwrap_or(f64::NAN),
            ratio: (i > 0).then(|| r / residuals[i - 1]),
        })
        .collect()
}

/// Number of uniform steps over `[0, t_end]` respecting `dt_max` and the
/// CFL bound for the initial speed.
pub fn picard_steps(phi: &VectorField, run: &RunConfig) -> usize {
    let umax = phi.max_norm();
    let by_dt = (run.t_end / run.dt_max).ceil();
    let by_cfl = if umax > 0.0 {
        (run.t_end * umax / (run.cfl * phi.grid().spacing())).ceil()
    } else {
        0.0
    };
    by_dt.max(by_cfl).max(1.0) as usize
}

/// Successive approximations over `[0, run.t_end]`.
pub fn run_picard(phi: &VectorField, run: &RunConfig) -> std::result::Result<PicardRun, RunError> {
    let fail = |error: Error| RunError {
        chart_index: 0,
        t: 0.0,
        error,
    };
    run.validate().map_err(fail)?;
    picard_solve(phi, run, picard_steps(phi, run)).map_err(fail)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::default_loops;
    use crate::grid::Grid;
    use crate::scenario::{generate_ic, Scenario};

    #[test]
    fn rows_follow_cadence_and_end_at_t_end() {
        let g = Grid::periodic_2pi(8).unwrap();
        let phi = generate_ic(&Scenario::TaylorGreen2d { amplitude: 1.0 }, g).unwrap();
        let run = RunConfig {
            dt_max: 0.05,
            t_end: 0.23,
            ..Default::default()
        };
        let mut seen = 0;
        let out = run_direct(&phi, &run, 2, default_loops(g), true, |_, _, _| {
            seen += 1;
            Ok(())
        })
        .unwrap();
        let steps: Vec<usize> = out.rows.iter().map(|r| r.step).collect();
        assert_eq!(steps, vec![0, 2, 4, 5]);
        assert_eq!(seen, 4);
        assert!((out.final_state.t_now - 0.23).abs() < 1e-12);
        assert!(out.rows.iter().all(|r| r.compare.is_some()));
        assert!(out.rows.windows(2).all(|w| w[0].record.t < w[1].record.t));
    }

    #[test]
    fn zero_cadence_rejected() {
        let g = Grid::periodic_2pi(8).unwrap();
        let phi = VectorField::zeros(g);
        let e = run_direct(&phi, &RunConfig::default(), 0, vec![], false, |_, _, _| {
            Ok(())
        })
        .unwrap_err();
        assert!(matches!(e.error, Error::BadParameters(_)));
    }

    #[test]
    fn picard_row_ratios() {
        let rows = picard_rows(&[1.0, 0.5, 0.125], &[2.0, 1.0, 0.5]);
        assert_eq!(rows[0].ratio, None);
        assert_eq!(rows[2].ratio, Some(0.25));
        assert_eq!(rows[2].iteration, 3);
    }
}
