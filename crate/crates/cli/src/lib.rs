//! Command-line driver: configuration, run orchestration and output.

pub mod config;
pub mod output;

use av_euler::diagnostics::default_loops;
use av_euler::driver::{picard_rows, run_direct, run_picard, Mode, RunError};
use av_euler::fields::holder_norm_c0mu_vector;
use av_euler::scenario::generate_ic;
use av_euler::{spectral, Error, VectorField};
use config::{Config, ConfigError};
use output::CsvSink;
use std::path::Path;

/// Failure of a command, carrying its exit status.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Run(RunError),
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Run(e) => match e.error {
                Error::NonFinite { .. } | Error::CflViolation { .. } => 3,
                Error::NoContraction { .. } => 4,
                Error::BadParameters(_) | Error::InvalidGrid(_) => 2,
                _ => 1,
            },
            Failure::Io(_) => 1,
        }
    }

    /// Machine-readable error category.
    pub fn category(&self) -> &'static str {
        match self {
            Failure::Config(_) => "config",
            Failure::Io(_) => "io",
            Failure::Run(e) => match e.error {
                Error::NonFinite { .. } => "non_finite",
                Error::CflViolation { .. } => "cfl_violation",
                Error::NoContraction { .. } => "no_contraction",
                Error::BadParameters(_) | Error::InvalidGrid(_) => "config",
                _ => "runtime",
            },
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(m) | Failure::Io(m) => f.write_str(m),
            Failure::Run(e) => write!(f, "{e}"),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

/// What a finished run reports on stdout.
#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub mode: Mode,
    pub rows: usize,
    pub lines: Vec<String>,
}

/// φ for the configured scenario, rescaled if `ic.curl_holder_norm` is set.
pub fn initial_velocity(cfg: &Config) -> Result<VectorField, Failure> {
    let grid = cfg.grid()?;
    let run = |error| {
        Failure::Run(RunError {
            chart_index: 0,
            t: 0.0,
            error,
        })
    };
    let mut phi = generate_ic(&cfg.scenario()?, grid).map_err(run)?;
    if let Some(target) = cfg.ic.curl_holder_norm {
        let norm = holder_norm_c0mu_vector(&spectral::curl_real(&phi), cfg.holder.mu).total;
        if norm == 0.0 {
            return Err(Failure::Config(
                "ic.curl_holder_norm set for a field with zero vorticity".into(),
            ));
        }
        phi.scale(target / norm);
    }
    Ok(phi)
}

/// Runs `cfg` in `mode`, writing the diagnostics CSV and snapshots.
/// `progress` receives one human-readable line per row.
pub fn execute(
    cfg: &Config,
    mode: Mode,
    mut progress: impl FnMut(&str),
) -> Result<Summary, Failure> {
    let run = cfg.run_config()?;
    let phi = initial_velocity(cfg)?;
    let mut csv = CsvSink::create(&cfg.output.diagnostics, mode)?;

    if mode == Mode::Picard {
        let result = run_picard(&phi, &run);
        let (residuals, holder) = match &result {
            Ok(r) => (r.residuals.clone(), r.holder_residuals.clone()),
            Err(RunError {
                error: Error::NoContraction { residuals, .. },
                ..
            }) => (residuals.clone(), Vec::new()),
            Err(_) => (Vec::new(), Vec::new()),
        };
        let rows = picard_rows(&residuals, &holder);
        for row in &rows {
            csv.write(&output::picard_fields(row))?;
            progress(&format!(
                "iteration {:>3}  residual {:.3e}",
                row.iteration, row.residual
            ));
        }
        let r = result.map_err(Failure::Run)?;
        let lines = vec![
            format!("mode: picard"),
            format!("iterations: {}", r.iterations()),
            format!("converged: {}", r.converged),
            format!(
                "final residual: {:e}",
                r.residuals.last().copied().unwrap_or(f64::NAN)
            ),
        ];
        return Ok(Summary {
            mode,
            rows: rows.len(),
            lines,
        });
    }

    let grid = phi.grid();
    let snap_every = cfg.output.snapshot_every;
    let snap_dir = cfg.output.snapshot_dir.clone();
    let t_end = run.t_end;
    let mut io_error: Option<std::io::Error> = None;
    let out = run_direct(
        &phi,
        &run,
        cfg.output.diagnostics_every,
        default_loops(grid),
        mode == Mode::OracleCompare,
        |row, state, _| {
            let written = (|| -> std::io::Result<()> {
                csv.write(&output::row_fields(row, mode))?;
                let last = state.t_now >= t_end - 1e-12 * t_end.max(1.0);
                if let (Some(every), Some(dir)) = (snap_every, snap_dir.as_deref()) {
                    if row.step % every == 0 || last {
                        snapshot(dir, &cfg.output.fields, row.step, state)?;
                    }
                }
                Ok(())
            })();
            progress(&format!(
                "step {:>6}  t {:.6}  chart {:>3}  energy {:.12e}  det {:.2e}",
                row.step, row.record.t, row.chart_index, row.record.energy, row.record.det_error
            ));
            written.map_err(|e| {
                let msg = e.to_string();
                io_error = Some(e);
                Error::Io(msg)
            })
        },
    );
    if let Some(e) = io_error {
        return Err(e.into());
    }
    let out = out.map_err(Failure::Run)?;
    let last = out.rows.last().expect("at least the initial row");
    let mut lines = vec![
        format!("mode: {}", mode.name()),
        format!("steps: {}", out.steps),
        format!("charts: {}", out.charts),
        format!("t: {}", last.record.t),
        format!("energy: {:e}", last.record.energy),
        format!("max sup|delta| in a chart: {:e}", out.max_sup_delta),
    ];
    if let Some(c) = last.compare {
        lines.push(format!("compare: {c:e}"));
    }
    Ok(Summary {
        mode,
        rows: out.rows.len(),
        lines,
    })
}

fn snapshot(
    dir: &Path,
    fields: &[String],
    step: usize,
    state: &av_euler::evolve::ChartState,
) -> std::io::Result<()> {
    for name in fields {
        let owned;
        let f: &VectorField = match name.as_str() {
            "u" => &state.u,
            "delta" => &state.delta,
            "phi" => state.phi(),
            "omega" => {
                owned = spectral::curl_real(&state.u);
                &owned
            }
            other => unreachable!("validated field name {other}"),
        };
        output::write_snapshot(dir, name, f, step, state.t_now, state.chart_index)?;
    }
    Ok(())
}

/// Human-readable description of a snapshot.
pub fn info(json: &Path) -> Result<Vec<String>, Failure> {
    let (side, data) = output::read_snapshot(json).map_err(Failure::Io)?;
    let npts = side.n.pow(3);
    let mut lines = vec![
        format!("field: {}", side.field),
        format!("n: {}", side.n),
        format!("L: {}", side.l),
        format!("t: {}", side.t),
        format!("chart_index: {}", side.chart_index),
        format!("step: {}", side.step),
        format!("dtype: {}", side.dtype),
        format!("order: {}", side.order),
    ];
    for (c, comp) in data.chunks_exact(npts).enumerate() {
        let min = comp.iter().copied().fold(f64::INFINITY, f64::min);
        let max = comp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let rms = (comp.iter().map(|v| v * v).sum::<f64>() / npts as f64).sqrt();
        lines.push(format!(
            "component {c}: min {min:e} max {max:e} rms {rms:e}"
        ));
    }
    Ok(lines)
}
