//! Run configuration: JSON in, validated [`RunConfig`] out. Unknown keys are
//! rejected; precondition violations carry path-qualified messages.

use std::path::PathBuf;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::integrator::StepperConfig;
use crate::model::ModelParams;
use crate::operators::Depth;
use crate::spectral::field::ComplexField;
use crate::spectral::grid::Grid;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub model: ModelConfig,
    #[serde(default)]
    pub init: InitConfig,
    #[serde(default)]
    pub time: TimeConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    pub half_width: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub depth: DepthValue,
    pub beta: f64,
    pub gamma: f64,
}

/// Depth is a positive number or the token `"inf"`.
#[derive(Clone, Copy, Debug)]
pub struct DepthValue(pub f64);

impl<'de> Deserialize<'de> for DepthValue {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let v = serde_json::Value::deserialize(d)?;
        match &v {
            serde_json::Value::Number(x) => {
                let h = x.as_f64().ok_or_else(|| DeError::custom("model.depth: not a float"))?;
                Ok(DepthValue(h))
            }
            serde_json::Value::String(s) if s == "inf" => Ok(DepthValue(f64::INFINITY)),
            _ => Err(DeError::custom("model.depth: expected a positive number or \"inf\"")),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case", tag = "kind")]
pub enum InitConfig {
    Gaussian {
        #[serde(default = "default_amplitude")]
        amplitude: f64,
        #[serde(default = "default_width")]
        width: f64,
        #[serde(default)]
        velocity: f64,
    },
    StaticSoliton,
    Singular {
        #[serde(default = "default_t0")]
        t0: f64,
    },
    File {
        path: PathBuf,
    },
}

fn default_amplitude() -> f64 {
    0.5
}
fn default_width() -> f64 {
    5.0
}
fn default_t0() -> f64 {
    1.0
}

impl Default for InitConfig {
    fn default() -> Self {
        InitConfig::Gaussian {
            amplitude: default_amplitude(),
            width: default_width(),
            velocity: 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
}

fn default_t_end() -> f64 {
    1.0
}
fn default_dt() -> f64 {
    1e-3
}
fn default_record_every() -> usize {
    100
}

impl Default for TimeConfig {
    fn default() -> Self {
        TimeConfig { t_end: default_t_end(), dt: default_dt(), record_every: default_record_every() }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { directory: PathBuf::from("out") }
    }
}

/// Parse and validate a JSON configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig =
        serde_json::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))?;
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid.n < 16 || !self.grid.n.is_power_of_two() {
            return Err(Error::Config(format!(
                "grid.n must be a power of two >= 16, got {}",
                self.grid.n
            )));
        }
        if !(self.grid.half_width > 0.0) || !self.grid.half_width.is_finite() {
            return Err(Error::Config(format!(
                "grid.half_width must be positive, got {}",
                self.grid.half_width
            )));
        }
        if !(self.model.depth.0 > 0.0) {
            return Err(Error::Config(format!(
                "model.depth must be positive or \"inf\", got {}",
                self.model.depth.0
            )));
        }
        if !self.model.beta.is_finite() || !self.model.gamma.is_finite() {
            return Err(Error::Config("model.beta and model.gamma must be finite".into()));
        }
        match &self.init {
            InitConfig::Gaussian { width, .. } if !(*width > 0.0) => {
                return Err(Error::Config(format!("init.width must be positive, got {width}")));
            }
            InitConfig::Singular { t0 } if !(*t0 > 0.0) => {
                return Err(Error::Config(format!("init.t0 must be positive, got {t0}")));
            }
            _ => {}
        }
        self.stepper()?;
        Ok(())
    }

    pub fn grid_spec(&self) -> Result<Grid> {
        Grid::new(self.grid.n, self.grid.half_width)
    }

    pub fn params(&self) -> Result<ModelParams> {
        ModelParams::new(Depth::new(self.model.depth.0)?, self.model.beta, self.model.gamma)
    }

    pub fn stepper(&self) -> Result<StepperConfig> {
        StepperConfig::new(self.time.dt, self.time.t_end, self.time.record_every)
            .map_err(|e| Error::Config(format!("time: {e}")))
    }

    pub fn initial_state(&self, grid: &Grid) -> Result<ComplexField> {
        match &self.init {
            InitConfig::Gaussian { amplitude, width, velocity } => {
                crate::experiments::gaussian_data(grid, *amplitude, *width, *velocity)
            }
            InitConfig::StaticSoliton => Ok(crate::experiments::static_soliton(grid)),
            InitConfig::Singular { t0 } => crate::experiments::singular_solution(grid, *t0),
            InitConfig::File { path } => {
                let (field, _) = crate::io::read_snapshot(path)?;
                if field.grid() != grid {
                    return Err(Error::Config(format!(
                        "init.file: snapshot grid ({} points, L = {}) does not match grid config",
                        field.grid().n(),
                        field.grid().half_width()
                    )));
                }
                Ok(field)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse_config(
            r#"{"grid": {"n": 256, "half_width": 20.0},
                "model": {"depth": 1.0, "beta": 1.0, "gamma": 0.0}}"#,
        )
        .unwrap();
        assert_eq!(cfg.time.dt, 1e-3);
        assert_eq!(cfg.seed, 0);
        assert!(matches!(cfg.init, InitConfig::Gaussian { .. }));
        assert!(!cfg.params().unwrap().depth.is_infinite());
    }

    #[test]
    fn inf_token_selects_infinite_depth() {
        let cfg = parse_config(
            r#"{"grid": {"n": 256, "half_width": 20.0},
                "model": {"depth": "inf", "beta": -1.0, "gamma": 0.0}}"#,
        )
        .unwrap();
        assert!(cfg.params().unwrap().depth.is_infinite());
        assert!(cfg.params().unwrap().is_ccm());
    }

    #[test]
    fn bad_n_names_the_path() {
        let err = parse_config(
            r#"{"grid": {"n": 1000, "half_width": 20.0},
                "model": {"depth": 1.0, "beta": 1.0, "gamma": 0.0}}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("grid.n"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = parse_config(
            r#"{"grid": {"n": 256, "half_width": 20.0, "bogus": 1},
                "model": {"depth": 1.0, "beta": 1.0, "gamma": 0.0}}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
    }

    #[test]
    fn depth_rejects_garbage() {
        assert!(parse_config(
            r#"{"grid": {"n": 256, "half_width": 20.0},
                "model": {"depth": "deep", "beta": 1.0, "gamma": 0.0}}"#,
        )
        .is_err());
        assert!(parse_config(
            r#"{"grid": {"n": 256, "half_width": 20.0},
                "model": {"depth": -3, "beta": 1.0, "gamma": 0.0}}"#,
        )
        .is_err());
    }

    #[test]
    fn init_kinds_parse() {
        let cfg = parse_config(
            r#"{"grid": {"n": 256, "half_width": 20.0},
                "model": {"depth": "inf", "beta": -1.0, "gamma": 0.0},
                "init": {"kind": "static_soliton"}}"#,
        )
        .unwrap();
        let grid = cfg.grid_spec().unwrap();
        let u = cfg.initial_state(&grid).unwrap();
        assert!(crate::spectral::norms::mass(&u) > 1.0);
    }
}
