//! TOML run configuration.

use av_euler::evolve::{ResetTrigger, RunConfig};
use av_euler::fields::Interpolation;
use av_euler::scenario::Scenario;
use av_euler::{driver::Mode, Grid};
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub grid: GridSection,
    pub time: TimeSection,
    #[serde(default)]
    pub holder: HolderSection,
    #[serde(default)]
    pub chart: ChartSection,
    pub ic: IcSection,
    pub output: OutputSection,
    #[serde(default)]
    pub mode: ModeSection,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: usize,
    /// Box length; 2π when absent.
    #[serde(default = "two_pi")]
    pub length: f64,
}

fn two_pi() -> f64 {
    2.0 * std::f64::consts::PI
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub t_end: f64,
    pub dt_max: f64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
}

fn default_cfl() -> f64 {
    0.5
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HolderSection {
    pub mu: f64,
    /// "holder" or "sup_gradient".
    pub trigger: String,
}

impl Default for HolderSection {
    fn default() -> Self {
        Self {
            mu: 0.5,
            trigger: "holder".into(),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChartSection {
    pub epsilon_reset: f64,
    /// "spectral" (ES kernel), "lagrange" or "tricubic".
    pub interpolation: String,
    pub width: usize,
    pub interval_constant: f64,
}

impl Default for ChartSection {
    fn default() -> Self {
        Self {
            epsilon_reset: 0.25,
            interpolation: "spectral".into(),
            width: Interpolation::DEFAULT_WIDTH,
            interval_constant: 0.1,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IcSection {
    pub scenario: String,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub c: Option<f64>,
    pub amplitude: Option<f64>,
    pub seed: Option<u64>,
    pub exponent: Option<f64>,
    pub k_cut: Option<f64>,
    pub two_d: Option<bool>,
    pub rho: Option<f64>,
    pub perturbation: Option<f64>,
    /// Rescale φ so that ‖∇×φ‖_{0,μ} takes this value.
    pub curl_holder_norm: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub diagnostics: PathBuf,
    #[serde(default = "one")]
    pub diagnostics_every: usize,
    pub snapshot_dir: Option<PathBuf>,
    /// Steps between snapshots; a multiple of `diagnostics_every`.
    pub snapshot_every: Option<usize>,
    #[serde(default = "default_fields")]
    pub fields: Vec<String>,
}

fn one() -> usize {
    1
}

fn default_fields() -> Vec<String> {
    vec!["u".into(), "delta".into()]
}

/// Names accepted in `output.fields`.
pub const SNAPSHOT_FIELDS: [&str; 4] = ["u", "delta", "phi", "omega"];

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModeSection {
    /// "direct", "picard" or "oracle_compare".
    pub kind: String,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
}

impl Default for ModeSection {
    fn default() -> Self {
        Self {
            kind: "direct".into(),
            picard_tol: 1e-10,
            picard_max_iter: 30,
        }
    }
}

impl Config {
    /// Reads `path`, applies `key=value` overrides (dotted keys, TOML
    /// values; bare words are taken as strings) and validates.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| err(format!("{}: {e}", path.display())))?;
        Self::parse(&text, overrides)
    }

    pub fn parse(text: &str, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut value: toml::Table = toml::from_str(text).map_err(|e| err(e.to_string()))?;
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        let cfg: Config = toml::Value::Table(value)
            .try_into()
            .map_err(|e: toml::de::Error| err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        self.grid()?;
        self.scenario()?;
        self.mode()?;
        self.run_config()?
            .validate()
            .map_err(|e| err(e.to_string()))?;
        let out = &self.output;
        if out.diagnostics_every == 0 {
            return Err(err("output.diagnostics_every must be at least 1"));
        }
        if let Some(every) = out.snapshot_every {
            if every == 0 || every % out.diagnostics_every != 0 {
                return Err(err(
                    "output.snapshot_every must be a positive multiple of output.diagnostics_every",
                ));
            }
            if out.snapshot_dir.is_none() {
                return Err(err("output.snapshot_every needs output.snapshot_dir"));
            }
        }
        if let Some(f) = out
            .fields
            .iter()
            .find(|f| !SNAPSHOT_FIELDS.contains(&f.as_str()))
        {
            return Err(err(format!(
                "unknown snapshot field {f:?}; expected one of {SNAPSHOT_FIELDS:?}"
            )));
        }
        if let Some(v) = self.ic.curl_holder_norm {
            if !(v > 0.0 && v.is_finite()) {
                return Err(err("ic.curl_holder_norm must be positive"));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid, ConfigError> {
        Grid::new(self.grid.n, self.grid.length).map_err(|e| err(e.to_string()))
    }

    pub fn mode(&self) -> Result<Mode, ConfigError> {
        match self.mode.kind.as_str() {
            "direct" => Ok(Mode::Direct),
            "picard" => Ok(Mode::Picard),
            "oracle_compare" => Ok(Mode::OracleCompare),
            k => Err(err(format!("unknown mode.kind {k:?}"))),
        }
    }

    pub fn interpolation(&self) -> Result<Interpolation, ConfigError> {
        let w = self.chart.width;
        match self.chart.interpolation.as_str() {
            "spectral" => Ok(Interpolation::Spectral { width: w }),
            "lagrange" => Ok(Interpolation::Lagrange { points: w }),
            "tricubic" => Ok(Interpolation::TRICUBIC),
            s => Err(err(format!("unknown chart.interpolation {s:?}"))),
        }
        .and_then(|i| i.validate().map(|_| i).map_err(|e| err(e.to_string())))
    }

    pub fn run_config(&self) -> Result<RunConfig, ConfigError> {
        let trigger = match self.holder.trigger.as_str() {
            "holder" => ResetTrigger::Holder,
            "sup_gradient" => ResetTrigger::SupGradient,
            t => return Err(err(format!("unknown holder.trigger {t:?}"))),
        };
        Ok(RunConfig {
            epsilon_reset: self.chart.epsilon_reset,
            mu: self.holder.mu,
            cfl: self.time.cfl,
            dt_max: self.time.dt_max,
            t_end: self.time.t_end,
            picard_tol: self.mode.picard_tol,
            picard_max_iter: self.mode.picard_max_iter,
            interval_constant: self.chart.interval_constant,
            trigger,
            interpolation: self.interpolation()?,
        })
    }

    pub fn scenario(&self) -> Result<Scenario, ConfigError> {
        let ic = &self.ic;
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| err(format!("ic.{name} is required for {}", ic.scenario)))
        };
        let sc = match ic.scenario.as_str() {
            "abc" => Scenario::Abc {
                a: ic.a.unwrap_or(1.0),
                b: ic.b.unwrap_or(1.0),
                c: ic.c.unwrap_or(1.0),
            },
            "taylor_green_2d" => Scenario::TaylorGreen2d {
                amplitude: ic.amplitude.unwrap_or(1.0),
            },
            "random_bandlimited" => Scenario::RandomBandlimited {
                seed: ic
                    .seed
                    .ok_or_else(|| err("ic.seed is required for random_bandlimited"))?,
                exponent: ic.exponent.unwrap_or(1.0),
                k_cut: need(ic.k_cut, "k_cut")?,
                amplitude: ic.amplitude.unwrap_or(1.0),
                two_d: ic.two_d.unwrap_or(false),
            },
            "shear_layer_2d" => Scenario::ShearLayer2d {
                rho: need(ic.rho, "rho")?,
                perturbation: ic.perturbation.unwrap_or(0.05),
            },
            s => return Err(err(format!("unknown ic.scenario {s:?}"))),
        };
        Ok(sc)
    }
}

fn apply_override(table: &mut toml::Table, spec: &str) -> Result<(), ConfigError> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| err(format!("override {spec:?} is not key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(err(format!("bad override key {key:?}")));
    }
    let mut cur = table;
    for p in &parts[..parts.len() - 1] {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| err(format!("override {key:?}: {p} is not a section")))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}
