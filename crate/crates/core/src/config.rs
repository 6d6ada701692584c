//! Run configuration: a TOML file, environment overrides, and `--set` flags,
//! resolved and validated into the domain types before anything runs.
//!
//! Precedence, lowest first: built-in defaults, the file, `TILTSURF__*`
//! environment variables, the `--full` grid preset, `--set key=value` flags.
//! Environment variables map `TILTSURF__FABRIC__K_STRUCT=900` to
//! `fabric.k_struct = 900`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::controller::{ControllerConfig, Variant};
use crate::error::{Error, Result};
use crate::evaluation::{GridSpec, StartPolicy};
use crate::geometry::ModuleGeometry;
use crate::output::read_to_string;
use crate::pid::PidGains;
use crate::plant::{FabricConfig, ObjectSpec, SensorConfig, Shape};
use crate::trial::TrialConfig;

pub const ENV_PREFIX: &str = "TILTSURF__";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometrySection {
    pub width_m: f64,
    pub depth_m: f64,
    pub z0: f64,
    pub actuator_travel: f64,
    pub max_tilt_deg: f64,
}

impl Default for GeometrySection {
    fn default() -> Self {
        let g = ModuleGeometry::default();
        Self {
            width_m: g.width_m,
            depth_m: g.depth_m,
            z0: g.z0,
            actuator_travel: g.actuator_travel,
            max_tilt_deg: 26.0,
        }
    }
}

/// A catalog preset, optionally with individual fields replaced, or an
/// explicit object when `preset` is absent and `shape` is given. With
/// neither, the sphere preset is used.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObjectSection {
    pub preset: Option<String>,
    pub label: Option<String>,
    pub shape: Option<Shape>,
    pub mass: Option<f64>,
    pub friction_mu: Option<f64>,
    pub rolling_resistance: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainsSection {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    /// Bound on the integral contribution (rad); defaults to the tilt bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integral_limit: Option<f64>,
}

impl GainsSection {
    fn from_gains(g: PidGains) -> Self {
        Self {
            kp: g.kp,
            ki: g.ki,
            kd: g.kd,
            integral_limit: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControllerSection {
    /// Policy used by `trial` and `heatmap`.
    pub variant: Variant,
    pub alpha: f64,
    pub control_frequency: f64,
    pub tolerance_eps: f64,
    pub manhattan: GainsSection,
    pub euclidean: GainsSection,
}

impl Default for ControllerSection {
    fn default() -> Self {
        let c = ControllerConfig::manhattan(&ModuleGeometry::default());
        Self {
            variant: Variant::Manhattan,
            alpha: c.alpha,
            control_frequency: c.control_frequency,
            tolerance_eps: c.tolerance_eps,
            manhattan: GainsSection::from_gains(PidGains::manhattan(0.0)),
            euclidean: GainsSection::from_gains(PidGains::euclidean(0.0)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrialSection {
    pub start: [f64; 2],
    pub target: [f64; 2],
    pub runtime: f64,
    pub dwell_samples: usize,
}

impl Default for TrialSection {
    fn default() -> Self {
        Self {
            start: [0.0, 0.0],
            target: [0.1, 0.1],
            runtime: 10.0,
            dwell_samples: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub cells_x: usize,
    pub cells_y: usize,
    pub trials_per_cell: usize,
    pub runtime: f64,
    pub start: StartPolicy,
}

impl Default for GridSection {
    fn default() -> Self {
        Self::from_spec(&GridSpec::desk())
    }
}

impl GridSection {
    fn from_spec(g: &GridSpec) -> Self {
        Self {
            cells_x: g.cells_x,
            cells_y: g.cells_y,
            trials_per_cell: g.trials_per_cell,
            runtime: g.runtime,
            start: g.start,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    /// Subdirectory for this run; defaults to the subcommand name.
    pub run_id: Option<String>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            run_id: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Noise seed of a single trial and master seed of a grid.
    pub seed: u64,
    pub geometry: GeometrySection,
    pub fabric: FabricConfig,
    pub object: ObjectSection,
    pub controller: ControllerSection,
    pub trial: TrialSection,
    pub grid: GridSection,
    pub sensor: SensorConfig,
    pub output: OutputSection,
}

/// Everything a command needs, validated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolved {
    pub seed: u64,
    pub geometry: ModuleGeometry,
    pub fabric: FabricConfig,
    pub object: ObjectSpec,
    pub controller: ControllerConfig,
    pub manhattan: ControllerConfig,
    pub euclidean: ControllerConfig,
    pub trial: TrialConfig,
    pub grid: GridSpec,
    pub sensor: SensorConfig,
    #[serde(skip)]
    pub output_dir: PathBuf,
    #[serde(skip)]
    pub run_id: Option<String>,
    /// Fidelity notes, e.g. an irregular object mapped onto a simple shape.
    #[serde(skip)]
    pub warnings: Vec<String>,
}

impl Resolved {
    pub fn controller_for(&self, variant: Variant) -> &ControllerConfig {
        match variant {
            Variant::Manhattan => &self.manhattan,
            Variant::Euclidean => &self.euclidean,
        }
    }
}

/// Where overrides come from, in the order they are applied.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub env: Vec<(String, String)>,
    pub full_grid: bool,
    pub set: Vec<String>,
}

pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<RunConfig> {
    let mut root = match path {
        Some(p) => {
            let text = read_to_string(p)?;
            toml::from_str::<toml::Table>(&text).map_err(|e| Error::Format {
                path: p.to_path_buf(),
                message: e.to_string(),
            })?
        }
        None => toml::Table::new(),
    };

    let mut env: Vec<_> = overrides
        .env
        .iter()
        .filter_map(|(k, v)| {
            k.strip_prefix(ENV_PREFIX).map(|rest| {
                (
                    rest.split("__")
                        .map(str::to_lowercase)
                        .collect::<Vec<_>>()
                        .join("."),
                    v.clone(),
                )
            })
        })
        .collect();
    env.sort();
    for (key, value) in env {
        set_dotted(&mut root, &key, parse_value(&value))?;
    }
    if overrides.full_grid {
        let full = toml::Table::try_from(GridSection::from_spec(&GridSpec::full()))
            .map_err(|e| Error::invalid(e.to_string()))?;
        for (k, v) in full {
            set_dotted(&mut root, &format!("grid.{k}"), v)?;
        }
    }
    for item in &overrides.set {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| Error::config(item.clone(), "expected key=value"))?;
        set_dotted(&mut root, key.trim(), parse_value(value.trim()))?;
    }

    serde_path_to_error::deserialize(toml::Value::Table(root)).map_err(|e| {
        let path = e.path().to_string();
        let key = if path == "." {
            String::from("<root>")
        } else {
            path
        };
        Error::config(key, e.into_inner().to_string())
    })
}

/// Parses a TOML literal; anything that is not one is taken as a bare string.
fn parse_value(text: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {text}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(text.to_string()))
}

fn set_dotted(root: &mut toml::Table, key: &str, value: toml::Value) -> Result<()> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::config(key, "malformed key"));
    }
    let mut table = root;
    for part in &parts[..parts.len() - 1] {
        let entry = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| Error::config(key, format!("`{part}` is not a section")))?;
    }
    table.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

impl RunConfig {
    pub fn resolve(&self) -> Result<Resolved> {
        let g = &self.geometry;
        let geometry = ModuleGeometry {
            width_m: g.width_m,
            depth_m: g.depth_m,
            z0: g.z0,
            actuator_travel: g.actuator_travel,
            max_tilt: g.max_tilt_deg.to_radians(),
        };
        geometry.validate().map_err(|e| prefix("geometry", e))?;
        self.fabric.validate()?;
        self.fabric.check_against(&geometry)?;

        let mut warnings = Vec::new();
        let object = self.resolve_object(&mut warnings)?;

        let c = &self.controller;
        let gains = |s: &GainsSection| PidGains {
            kp: s.kp,
            ki: s.ki,
            kd: s.kd,
            integral_limit: s.integral_limit.unwrap_or(geometry.max_tilt),
        };
        let make = |variant: Variant, s: &GainsSection| ControllerConfig {
            variant,
            gains: gains(s),
            gains_y: gains(s),
            alpha: c.alpha,
            control_frequency: c.control_frequency,
            tolerance_eps: c.tolerance_eps,
            rng_seed: self.seed,
        };
        let manhattan = make(Variant::Manhattan, &c.manhattan);
        let euclidean = make(Variant::Euclidean, &c.euclidean);
        manhattan
            .validate()
            .map_err(|e| rename(e, "controller.gains", "controller.manhattan"))?;
        euclidean
            .validate()
            .map_err(|e| rename(e, "controller.gains", "controller.euclidean"))?;
        let controller = match c.variant {
            Variant::Manhattan => manhattan.clone(),
            Variant::Euclidean => euclidean.clone(),
        };

        let t = &self.trial;
        let trial = TrialConfig {
            controller: controller.clone(),
            object: object.clone(),
            start_xy: t.start,
            target_xy: t.target,
            runtime: t.runtime,
            seed: self.seed,
            dwell_samples: t.dwell_samples,
            sensor: self.sensor,
        };
        trial.validate(&geometry, &self.fabric)?;

        let gs = &self.grid;
        let grid = GridSpec {
            cells_x: gs.cells_x,
            cells_y: gs.cells_y,
            trials_per_cell: gs.trials_per_cell,
            master_seed: self.seed,
            runtime: gs.runtime,
            start: gs.start,
            dwell_samples: t.dwell_samples,
        };
        grid.validate()?;

        if let Some(id) = &self.output.run_id {
            if id.is_empty() || id.contains(['/', '\\']) || id == "." || id == ".." {
                return Err(Error::config(
                    "output.run_id",
                    format!("`{id}` is not a plain directory name"),
                ));
            }
        }

        Ok(Resolved {
            seed: self.seed,
            geometry,
            fabric: self.fabric.clone(),
            object,
            controller,
            manhattan,
            euclidean,
            trial,
            grid,
            sensor: self.sensor,
            output_dir: self.output.dir.clone(),
            run_id: self.output.run_id.clone(),
            warnings,
        })
    }

    fn resolve_object(&self, warnings: &mut Vec<String>) -> Result<ObjectSpec> {
        let o = &self.object;
        let preset = match (&o.preset, o.shape) {
            (Some(name), _) => Some(name.as_str()),
            (None, None) => Some("sphere"),
            (None, Some(_)) => None,
        };
        let mut spec = match preset {
            Some(name) => {
                let (spec, warning) = ObjectSpec::preset(name).ok_or_else(|| {
                    Error::config(
                        "object.preset",
                        format!(
                            "unknown preset `{name}`; expected one of {}",
                            crate::plant::PRESET_NAMES.join(", ")
                        ),
                    )
                })?;
                warnings.extend(warning.map(String::from));
                spec
            }
            None => {
                let (Some(shape), Some(mass), Some(friction_mu)) = (o.shape, o.mass, o.friction_mu)
                else {
                    return Err(Error::config(
                        "object",
                        "give either `preset` or all of `shape`, `mass`, and `friction_mu`",
                    ));
                };
                ObjectSpec {
                    label: String::from("custom"),
                    shape,
                    mass,
                    friction_mu,
                    rolling_resistance: 0.0,
                }
            }
        };
        if let Some(label) = &o.label {
            spec.label = label.clone();
        }
        if let Some(shape) = o.shape {
            spec.shape = shape;
        }
        if let Some(mass) = o.mass {
            spec.mass = mass;
        }
        if let Some(mu) = o.friction_mu {
            spec.friction_mu = mu;
        }
        if let Some(rr) = o.rolling_resistance {
            spec.rolling_resistance = rr;
        }
        spec.validate()?;
        Ok(spec)
    }
}

fn prefix(section: &str, e: Error) -> Error {
    match e {
        Error::Config { key, message } => Error::config(format!("{section}.{key}"), message),
        Error::InvalidArgument(message) => Error::config(section, message),
        other => other,
    }
}

fn rename(e: Error, from: &str, to: &str) -> Error {
    match e {
        Error::Config { key, message } => Error::config(key.replacen(from, to, 1), message),
        other => other,
    }
}
