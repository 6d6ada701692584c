use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Optional camera emulation. Both effects are off by default.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorConfig {
    /// Observation delay in control periods.
    #[serde(default)]
    pub latency_samples: usize,
    /// Rounding step in meters; 0 disables quantization.
    #[serde(default)]
    pub quantization: f64,
}

impl SensorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.quantization.is_finite() && self.quantization >= 0.0) {
            return Err(Error::config(
                "sensor.quantization",
                format!("must be >= 0, got {}", self.quantization),
            ));
        }
        Ok(())
    }
}

/// Delay line plus quantizer, sampled once per control period.
#[derive(Debug, Clone)]
pub struct Sensor {
    config: SensorConfig,
    history: VecDeque<[f64; 2]>,
}

impl Sensor {
    pub fn new(config: SensorConfig) -> Self {
        Self {
            config,
            history: VecDeque::with_capacity(config.latency_samples + 1),
        }
    }

    /// Pushes the true position and returns what the camera reports.
    ///
    /// Until the delay line fills, the oldest available sample is reported.
    pub fn observe(&mut self, truth: [f64; 2]) -> [f64; 2] {
        self.history.push_back(truth);
        while self.history.len() > self.config.latency_samples + 1 {
            self.history.pop_front();
        }
        let seen = self.history[0];
        let q = self.config.quantization;
        if q > 0.0 {
            seen.map(|v| (v / q).round() * q)
        } else {
            seen
        }
    }
}
