//! Diagnostics CSV and field snapshots.

use av_euler::diagnostics::TEST_FUNCTIONS;
use av_euler::driver::{Mode, PicardRow, Row};
use av_euler::VectorField;
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

/// Number of marker loops, and so of circulation columns.
pub const LOOPS: usize = 3;

/// Column names for `mode`, in file order.
pub fn header(mode: Mode) -> Vec<String> {
    if mode == Mode::Picard {
        return ["iteration", "residual", "holder_residual", "ratio"]
            .map(String::from)
            .to_vec();
    }
    let mut h: Vec<String> = [
        "step",
        "t",
        "dt",
        "chart_index",
        "energy",
        "helicity",
        "sup_vorticity",
        "bkm_integral",
        "det_error",
        "holder_grad_delta",
        "sup_delta",
        "velocity_drift",
    ]
    .map(String::from)
    .to_vec();
    h.extend((0..LOOPS).map(|i| format!("circulation_{i}")));
    h.extend((0..TEST_FUNCTIONS).map(|i| format!("distribution_{i}")));
    h.push("cauchy_residual".into());
    h.push("omega_dot_w_drift".into());
    if mode == Mode::OracleCompare {
        h.push("compare".into());
    }
    h
}

/// Shortest representation that reads back to the same f64.
fn num(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v:e}")
    }
}

pub fn row_fields(row: &Row, mode: Mode) -> Vec<String> {
    let r = &row.record;
    let mut f = vec![
        row.step.to_string(),
        num(r.t),
        num(row.dt),
        row.chart_index.to_string(),
        num(r.energy),
        num(r.helicity),
        num(r.sup_vorticity),
        num(r.bkm_integral),
        num(r.det_error),
        num(r.holder_grad_delta),
        num(row.sup_delta),
        num(row.velocity_drift),
    ];
    f.extend(r.circulations.iter().map(|&c| num(c)));
    f.extend(r.distribution_check.iter().map(|&c| num(c)));
    f.push(num(r.cauchy_residual));
    f.push(num(r.omega_dot_w_drift));
    if mode == Mode::OracleCompare {
        f.push(row.compare.map(num).unwrap_or_default());
    }
    f
}

pub fn picard_fields(row: &PicardRow) -> Vec<String> {
    vec![
        row.iteration.to_string(),
        num(row.residual),
        num(row.holder_residual),
        row.ratio.map(num).unwrap_or_default(),
    ]
}

/// RFC-4180 writer that flushes after every row.
pub struct CsvSink {
    w: csv::Writer<File>,
}

impl CsvSink {
    pub fn create(path: &Path, mode: Mode) -> std::io::Result<Self> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_path(path)?;
        w.write_record(header(mode))?;
        w.flush()?;
        Ok(Self { w })
    }

    pub fn write(&mut self, fields: &[String]) -> std::io::Result<()> {
        self.w.write_record(fields)?;
        self.w.flush()
    }
}

/// JSON sidecar describing one binary snapshot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub struct Sidecar {
    pub field: String,
    pub n: usize,
    #[serde(rename = "L")]
    pub l: f64,
    pub t: f64,
    pub chart_index: usize,
    pub dtype: String,
    pub order: String,
    pub components: usize,
    pub step: usize,
    /// Binary file name, relative to the sidecar.
    pub data: String,
}

pub const DTYPE: &str = "float64-le";
pub const ORDER: &str = "x-fastest, then y, then z; components stored one after another";

/// Writes `<dir>/<name>_<step>.bin` and its `.json` sidecar.
pub fn write_snapshot(
    dir: &Path,
    name: &str,
    field: &VectorField,
    step: usize,
    t: f64,
    chart_index: usize,
) -> std::io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let stem = format!("{name}_{step:06}");
    let bin = dir.join(format!("{stem}.bin"));
    let mut w = BufWriter::new(File::create(&bin)?);
    for c in 0..3 {
        for v in field.comp(c) {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    let grid = field.grid();
    let side = Sidecar {
        field: name.to_string(),
        n: grid.n(),
        l: grid.period(),
        t,
        chart_index,
        dtype: DTYPE.into(),
        order: ORDER.into(),
        components: 3,
        step,
        data: format!("{stem}.bin"),
    };
    let json = dir.join(format!("{stem}.json"));
    std::fs::write(
        &json,
        serde_json::to_string_pretty(&side).map_err(std::io::Error::other)? + "\n",
    )?;
    Ok(json)
}

/// Sidecar and raw values of a snapshot.
pub fn read_snapshot(json: &Path) -> Result<(Sidecar, Vec<f64>), String> {
    let text = std::fs::read_to_string(json).map_err(|e| format!("{}: {e}", json.display()))?;
    let side: Sidecar =
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", json.display()))?;
    if side.dtype != DTYPE {
        return Err(format!("unsupported dtype {:?}", side.dtype));
    }
    let bin = json.parent().unwrap_or(Path::new(".")).join(&side.data);
    let bytes = std::fs::read(&bin).map_err(|e| format!("{}: {e}", bin.display()))?;
    let expect = side.n.pow(3) * side.components * 8;
    if bytes.len() != expect {
        return Err(format!(
            "{}: {} bytes, expected {expect}",
            bin.display(),
            bytes.len()
        ));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok((side, data))
}
