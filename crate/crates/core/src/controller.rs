//! Closed-loop tilt policies.
//!
//! The per-axis ("Manhattan") policy runs one PID on each of `e_x` and `e_y`
//! and turns the two outputs into independent axis tilts. The radial
//! ("Euclidean") policy runs a single PID on `|e|` and tilts along the
//! error direction. Both end in the same plane-to-actuator transform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    actuator_commands, euclidean_normal, manhattan_normal, ActuatorCommand, ModuleGeometry,
    SurfaceNormal, TiltCommand, RADIAL_EPSILON,
};
use crate::pid::{PidGains, PidState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Manhattan,
    Euclidean,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Manhattan => "manhattan",
            Variant::Euclidean => "euclidean",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorVector {
    pub ex: f64,
    pub ey: f64,
    pub d: f64,
}

/// Error from the object position `p` to the target `pd`.
pub fn compute_error(p: [f64; 2], pd: [f64; 2]) -> ErrorVector {
    let ex = pd[0] - p[0];
    let ey = pd[1] - p[1];
    ErrorVector {
        ex,
        ey,
        d: ex.hypot(ey),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllerConfig {
    pub variant: Variant,
    /// Gains for the x axis (per-axis policy) or the radial PID.
    pub gains: PidGains,
    /// Gains for the y axis; identical to `gains` unless set.
    pub gains_y: PidGains,
    /// Noise amplitude added to every actuator command (m).
    pub alpha: f64,
    pub control_frequency: f64,
    pub tolerance_eps: f64,
    pub rng_seed: u64,
}

impl ControllerConfig {
    pub fn manhattan(geo: &ModuleGeometry) -> Self {
        let gains = PidGains::manhattan(geo.max_tilt);
        Self {
            variant: Variant::Manhattan,
            gains,
            gains_y: gains,
            alpha: 0.0,
            control_frequency: 10.0,
            tolerance_eps: 0.02,
            rng_seed: 0,
        }
    }

    pub fn euclidean(geo: &ModuleGeometry) -> Self {
        let gains = PidGains::euclidean(geo.max_tilt);
        Self {
            variant: Variant::Euclidean,
            gains,
            gains_y: gains,
            ..Self::manhattan(geo)
        }
    }

    pub fn for_variant(variant: Variant, geo: &ModuleGeometry) -> Self {
        match variant {
            Variant::Manhattan => Self::manhattan(geo),
            Variant::Euclidean => Self::euclidean(geo),
        }
    }

    pub fn control_period(&self) -> f64 {
        1.0 / self.control_frequency
    }

    pub fn validate(&self) -> Result<()> {
        self.gains
            .validate()
            .map_err(|e| Error::config("controller.gains", e.to_string()))?;
        self.gains_y
            .validate()
            .map_err(|e| Error::config("controller.gains_y", e.to_string()))?;
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::config(
                "controller.alpha",
                format!("must be >= 0, got {}", self.alpha),
            ));
        }
        if !(self.control_frequency.is_finite() && self.control_frequency > 0.0) {
            return Err(Error::config(
                "controller.control_frequency",
                format!("must be > 0, got {}", self.control_frequency),
            ));
        }
        if !(self.tolerance_eps.is_finite() && self.tolerance_eps > 0.0) {
            return Err(Error::config(
                "controller.tolerance_eps",
                format!("must be > 0, got {}", self.tolerance_eps),
            ));
        }
        Ok(())
    }
}

/// Result of one control update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlOutput {
    pub command: ActuatorCommand,
    /// Unclamped controller tilt. For the radial policy this is `theta`
    /// projected on the error direction.
    pub tilt: TiltCommand,
    pub normal: SurfaceNormal,
    pub error: ErrorVector,
}

#[derive(Debug, Clone)]
pub struct ControllerState {
    pid_x: PidState,
    pid_y: PidState,
    pid_r: PidState,
    rng: ChaCha8Rng,
    last_tilt: TiltCommand,
}

impl ControllerState {
    pub fn new(seed: u64) -> Self {
        Self {
            pid_x: PidState::default(),
            pid_y: PidState::default(),
            pid_r: PidState::default(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            last_tilt: TiltCommand::default(),
        }
    }

    pub fn last_tilt(&self) -> TiltCommand {
        self.last_tilt
    }

    /// Integral accumulators `(x, y, radial)`.
    pub fn integrals(&self) -> (f64, f64, f64) {
        (
            self.pid_x.integral,
            self.pid_y.integral,
            self.pid_r.integral,
        )
    }

    /// Four i.i.d. samples from `U(-1, 1)` scaled by `alpha`.
    ///
    /// The generator always advances by four draws, even when `alpha` is zero,
    /// so runs that differ only in `alpha` see the same noise stream.
    pub fn sample_noise(&mut self, alpha: f64) -> [f64; 4] {
        let mut out = [0.0; 4];
        for v in &mut out {
            let delta: f64 = self.rng.gen_range(-1.0..=1.0);
            *v = alpha * delta;
        }
        out
    }

    fn draw_unit_noise(&mut self) -> [f64; 4] {
        let mut out = [0.0; 4];
        for v in &mut out {
            *v = self.rng.gen_range(-1.0..=1.0);
        }
        out
    }

    pub fn step(
        &mut self,
        config: &ControllerConfig,
        geo: &ModuleGeometry,
        p: [f64; 2],
        pd: [f64; 2],
    ) -> Result<ControlOutput> {
        match config.variant {
            Variant::Manhattan => self.manhattan_step(config, geo, p, pd),
            Variant::Euclidean => self.euclidean_step(config, geo, p, pd),
        }
    }

    pub fn manhattan_step(
        &mut self,
        config: &ControllerConfig,
        geo: &ModuleGeometry,
        p: [f64; 2],
        pd: [f64; 2],
    ) -> Result<ControlOutput> {
        if config.variant != Variant::Manhattan {
            return Err(Error::invalid(
                "manhattan_step called with a euclidean config",
            ));
        }
        let dt = config.control_period();
        let error = compute_error(p, pd);
        let (theta_zx, pid_x) = self.pid_x.step(&config.gains, error.ex, dt)?;
        let (theta_zy, pid_y) = self.pid_y.step(&config.gains_y, error.ey, dt)?;
        let tilt = TiltCommand { theta_zx, theta_zy };
        let normal = manhattan_normal(tilt, geo.max_tilt)?;
        let noise = self.draw_unit_noise();
        let command = actuator_commands(normal, geo, config.alpha, noise)?;

        self.pid_x = pid_x;
        self.pid_y = pid_y;
        self.last_tilt = tilt;
        Ok(ControlOutput {
            command,
            tilt,
            normal,
            error,
        })
    }

    pub fn euclidean_step(
        &mut self,
        config: &ControllerConfig,
        geo: &ModuleGeometry,
        p: [f64; 2],
        pd: [f64; 2],
    ) -> Result<ControlOutput> {
        if config.variant != Variant::Euclidean {
            return Err(Error::invalid(
                "euclidean_step called with a manhattan config",
            ));
        }
        let dt = config.control_period();
        let error = compute_error(p, pd);
        let (theta, pid_r) = self.pid_r.step(&config.gains, error.d, dt)?;
        let normal = euclidean_normal(error.ex, error.ey, theta, geo.max_tilt)?;
        let tilt = if error.d < RADIAL_EPSILON {
            TiltCommand::default()
        } else {
            TiltCommand {
                theta_zx: theta * error.ex / error.d,
                theta_zy: theta * error.ey / error.d,
            }
        };
        let noise = self.draw_unit_noise();
        let command = actuator_commands(normal, geo, config.alpha, noise)?;

        self.pid_r = pid_r;
        self.last_tilt = tilt;
        Ok(ControlOutput {
            command,
            tilt,
            normal,
            error,
        })
    }
}
