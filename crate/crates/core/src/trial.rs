//! One closed-loop episode: the controller runs at its own rate over the
//! 1 kHz plant until the object settles on the target, leaves the sheet, the
//! simulation breaks down, or time runs out.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::controller::{compute_error, ControllerConfig, ControllerState};
use crate::error::{Error, Result};
use crate::geometry::{ActuatorCommand, ModuleGeometry, TiltCommand};
use crate::output::{read_to_string, write_atomic};
use crate::plant::{FabricConfig, ObjectSpec, Plant, Sensor, SensorConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub controller: ControllerConfig,
    pub object: ObjectSpec,
    pub start_xy: [f64; 2],
    pub target_xy: [f64; 2],
    /// Episode length in seconds.
    pub runtime: f64,
    /// Seeds the actuator noise stream.
    pub seed: u64,
    /// Consecutive in-tolerance samples needed to declare success.
    pub dwell_samples: usize,
    pub sensor: SensorConfig,
}

impl TrialConfig {
    pub fn new(
        controller: ControllerConfig,
        object: ObjectSpec,
        start_xy: [f64; 2],
        target_xy: [f64; 2],
    ) -> Self {
        Self {
            seed: controller.rng_seed,
            controller,
            object,
            start_xy,
            target_xy,
            runtime: 10.0,
            dwell_samples: 3,
            sensor: SensorConfig::default(),
        }
    }

    pub fn validate(&self, geo: &ModuleGeometry, fabric: &FabricConfig) -> Result<()> {
        geo.validate()?;
        fabric.validate()?;
        fabric.check_against(geo)?;
        self.controller.validate()?;
        self.object.validate()?;
        self.sensor.validate()?;
        if !(self.runtime.is_finite() && self.runtime > 0.0) {
            return Err(Error::config(
                "trial.runtime",
                format!("must be > 0, got {}", self.runtime),
            ));
        }
        if self.dwell_samples == 0 {
            return Err(Error::config("trial.dwell_samples", "must be at least 1"));
        }
        for (key, xy) in [
            ("trial.start", self.start_xy),
            ("trial.target", self.target_xy),
        ] {
            if !geo.contains(xy) {
                return Err(Error::config(
                    key,
                    format!("{xy:?} is outside the workspace"),
                ));
            }
        }
        physics_steps_per_period(&self.controller, fabric)?;
        Ok(())
    }
}

/// Physics steps per control period; the ratio must be an integer.
pub fn physics_steps_per_period(
    controller: &ControllerConfig,
    fabric: &FabricConfig,
) -> Result<usize> {
    let ratio = controller.control_period() / fabric.physics_dt;
    let steps = ratio.round();
    if steps < 1.0 || (ratio - steps).abs() > 1e-9 * ratio.max(1.0) {
        return Err(Error::config(
            "controller.control_frequency",
            format!(
                "control period {} s is not an integer multiple of physics_dt {} s",
                controller.control_period(),
                fabric.physics_dt
            ),
        ));
    }
    Ok(steps as usize)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Success,
    Timeout,
    FellOff,
    /// The simulation diverged or the object state became implausible.
    Toppled,
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Outcome::Success => "success",
            Outcome::Timeout => "timeout",
            Outcome::FellOff => "felloff",
            Outcome::Toppled => "toppled",
        })
    }
}

/// One control-period snapshot. Tilt and commands are the values applied
/// from this instant; the final sample of an episode repeats the last ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub theta_zx: f64,
    pub theta_zy: f64,
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub err: f64,
}

impl Sample {
    pub fn commands(&self) -> [f64; 4] {
        [self.a0, self.a1, self.a2, self.a3]
    }
}

pub const CSV_HEADER: &str = "t,x,y,theta_zx,theta_zy,a0,a1,a2,a3,err";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub outcome: Outcome,
    pub samples: Vec<Sample>,
    /// Distance to the target at the last sample (m).
    pub final_error: f64,
}

pub fn run_trial(
    config: &TrialConfig,
    geo: &ModuleGeometry,
    fabric: &FabricConfig,
) -> Result<TrialRecord> {
    config.validate(geo, fabric)?;
    let steps = physics_steps_per_period(&config.controller, fabric)?;
    let period = config.controller.control_period();
    let last = (config.runtime * config.controller.control_frequency + 1e-9).floor() as usize;
    let eps = config.controller.tolerance_eps;

    let mut plant = Plant::new(fabric, geo, &config.object, config.start_xy)?;
    let mut controller = ControllerState::new(config.seed);
    let mut sensor = Sensor::new(config.sensor);
    let mut samples = Vec::with_capacity(last + 1);
    let mut tilt = TiltCommand::default();
    let mut command = ActuatorCommand::FLAT;
    let mut in_tolerance = 0;

    let sample = |t: f64, p: [f64; 2], err: f64, tilt: TiltCommand, cmd: ActuatorCommand| Sample {
        t,
        x: p[0],
        y: p[1],
        theta_zx: tilt.theta_zx,
        theta_zy: tilt.theta_zy,
        a0: cmd.0[0],
        a1: cmd.0[1],
        a2: cmd.0[2],
        a3: cmd.0[3],
        err,
    };

    for k in 0..=last {
        let t = k as f64 * period;
        let truth = plant.observe().expect("plant has an object");
        let err = compute_error(truth, config.target_xy).d;
        let finish = |outcome, mut samples: Vec<Sample>, s: Sample| {
            samples.push(s);
            TrialRecord {
                outcome,
                samples,
                final_error: err,
            }
        };

        if !geo.contains(truth) {
            return Ok(finish(
                Outcome::FellOff,
                samples,
                sample(t, truth, err, tilt, command),
            ));
        }
        if plant.object_anomaly() {
            return Ok(finish(
                Outcome::Toppled,
                samples,
                sample(t, truth, err, tilt, command),
            ));
        }
        in_tolerance = if err < eps { in_tolerance + 1 } else { 0 };
        // Already on target at t = 0 counts immediately; later arrivals must dwell.
        if in_tolerance >= config.dwell_samples || (k == 0 && in_tolerance > 0) {
            return Ok(finish(
                Outcome::Success,
                samples,
                sample(t, truth, err, tilt, command),
            ));
        }
        if k == last {
            let outcome = if err <= eps {
                Outcome::Success
            } else {
                Outcome::Timeout
            };
            return Ok(finish(
                outcome,
                samples,
                sample(t, truth, err, tilt, command),
            ));
        }

        let seen = sensor.observe(truth);
        let out = controller.step(&config.controller, geo, seen, config.target_xy)?;
        tilt = out.tilt;
        command = out.command;
        plant.apply_actuators(&command);
        samples.push(sample(t, truth, err, tilt, command));

        for _ in 0..steps {
            match plant.step() {
                Ok(()) => {}
                Err(Error::Diverged { .. }) => {
                    return Ok(TrialRecord {
                        outcome: Outcome::Toppled,
                        final_error: err,
                        samples,
                    });
                }
                Err(e) => return Err(e),
            }
        }
    }
    unreachable!("the final control period always returns")
}

/// CSV text of the samples, header first. Floats use the shortest
/// representation that parses back to the same value.
pub fn samples_to_csv(samples: &[Sample]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for s in samples {
        w.serialize(s).map_err(|e| Error::invalid(e.to_string()))?;
    }
    let body = w.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
    out.push_str(std::str::from_utf8(&body).expect("csv output is utf-8"));
    Ok(out)
}

pub fn samples_from_csv(text: &str, path: &Path) -> Result<Vec<Sample>> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(CSV_HEADER) {
        return Err(Error::Format {
            path: path.to_path_buf(),
            message: format!("expected header `{CSV_HEADER}`"),
        });
    }
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize()
        .map(|row| {
            row.map_err(|e| Error::Format {
                path: path.to_path_buf(),
                message: e.to_string(),
            })
        })
        .collect()
}

/// Phase history: controller tilts over time.
pub fn phase_to_csv(samples: &[Sample]) -> String {
    let mut out = String::from("t,theta_zx,theta_zy\n");
    for s in samples {
        out.push_str(&format!("{},{},{}\n", s.t, s.theta_zx, s.theta_zy));
    }
    out
}

/// Writes `{dir}/{index}.csv`, `{dir}/{index}.json`, and `{dir}/{index}_phase.csv`.
pub fn write_record(record: &TrialRecord, dir: &Path, index: usize) -> Result<()> {
    write_atomic(
        &dir.join(format!("{index}.csv")),
        samples_to_csv(&record.samples)?.as_bytes(),
    )?;
    let json = serde_json::to_string_pretty(record).map_err(|e| Error::invalid(e.to_string()))?;
    write_atomic(&dir.join(format!("{index}.json")), json.as_bytes())?;
    write_atomic(
        &dir.join(format!("{index}_phase.csv")),
        phase_to_csv(&record.samples).as_bytes(),
    )
}

/// Reads the full record back from its JSON file.
pub fn read_record(dir: &Path, index: usize) -> Result<TrialRecord> {
    let path = dir.join(format!("{index}.json"));
    let text = read_to_string(&path)?;
    serde_json::from_str(&text).map_err(|e| Error::Format {
        path,
        message: e.to_string(),
    })
}

pub fn read_samples_csv(path: &Path) -> Result<Vec<Sample>> {
    samples_from_csv(&read_to_string(path)?, path)
}
