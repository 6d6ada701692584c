//! Discrete PID with a clamped integral accumulator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    /// Bound on the integral contribution `ki * integral`, in output units (rad).
    pub integral_limit: f64,
}

impl PidGains {
    /// Gains shared by both axis controllers of the per-axis policy.
    pub fn manhattan(integral_limit: f64) -> Self {
        Self {
            kp: 30.9,
            ki: 26.78,
            kd: 15.45,
            integral_limit,
        }
    }

    /// Gains of the single radial controller.
    pub fn euclidean(integral_limit: f64) -> Self {
        Self {
            kp: 86.72,
            ki: 27.91,
            kd: 10.19,
            integral_limit,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [("kp", self.kp), ("ki", self.ki), ("kd", self.kd)] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::invalid(format!(
                    "PID gain {name} must be >= 0, got {value}"
                )));
            }
        }
        if !(self.integral_limit.is_finite() && self.integral_limit > 0.0) {
            return Err(Error::invalid(format!(
                "integral_limit must be > 0, got {}",
                self.integral_limit
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PidState {
    pub integral: f64,
    pub prev_error: f64,
    pub initialized: bool,
}

impl PidState {
    /// One controller update. Returns the unclamped output and the next state.
    ///
    /// The derivative acts on the error and is zero on the first step.
    pub fn step(&self, gains: &PidGains, error: f64, dt: f64) -> Result<(f64, PidState)> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid(format!("PID period must be > 0, got {dt}")));
        }
        let prev = if self.initialized {
            self.prev_error
        } else {
            error
        };

        let mut integral = self.integral + error * dt;
        if gains.ki > 0.0 {
            let bound = gains.integral_limit / gains.ki;
            integral = integral.clamp(-bound, bound);
        }

        let output = gains.kp * error + gains.ki * integral + gains.kd * (error - prev) / dt;
        let next = PidState {
            integral,
            prev_error: error,
            initialized: true,
        };
        Ok((output, next))
    }

    pub fn reset(&self) -> PidState {
        PidState::default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gains(kp: f64, ki: f64, kd: f64, limit: f64) -> PidGains {
        PidGains {
            kp,
            ki,
            kd,
            integral_limit: limit,
        }
    }

    #[test]
    fn zero_error_gives_zero_output() {
        let g = PidGains::manhattan(0.45);
        let mut s = PidState::default();
        for _ in 0..50 {
            let (out, next) = s.step(&g, 0.0, 0.1).unwrap();
            assert_eq!(out, 0.0);
            s = next;
        }
    }

    #[test]
    fn proportional_only() {
        let (out, _) = PidState::default()
            .step(&gains(2.0, 0.0, 0.0, 1.0), 0.1, 0.1)
            .unwrap();
        assert_eq!(out, 0.2);
    }

    #[test]
    fn integral_clamps_at_limit() {
        let g = gains(0.0, 10.0, 0.0, 0.5);
        let mut s = PidState::default();
        for _ in 0..3 {
            let (out, next) = s.step(&g, 1.0, 0.1).unwrap();
            assert_eq!(out, 0.5);
            s = next;
        }
        assert_eq!(s.integral, 0.05);
    }

    #[test]
    fn integral_unwinds_from_the_bound() {
        let g = gains(0.0, 10.0, 0.0, 0.5);
        let mut s = PidState::default();
        for _ in 0..20 {
            s = s.step(&g, 1.0, 0.1).unwrap().1;
        }
        // One negative step moves the output off the bound immediately.
        let (out, _) = s.step(&g, -0.1, 0.1).unwrap();
        assert!((out - 0.4).abs() < 1e-12);
    }

    #[test]
    fn first_step_has_no_derivative_kick() {
        let (out, _) = PidState::default()
            .step(&gains(0.0, 0.0, 100.0, 1.0), 0.7, 0.1)
            .unwrap();
        assert_eq!(out, 0.0);
    }

    #[test]
    fn derivative_acts_on_error_change() {
        let g = gains(0.0, 0.0, 2.0, 1.0);
        let s = PidState::default().step(&g, 0.1, 0.1).unwrap().1;
        let (out, _) = s.step(&g, 0.3, 0.1).unwrap();
        assert!((out - 4.0).abs() < 1e-12);
    }

    #[test]
    fn non_positive_period_is_rejected() {
        let g = gains(1.0, 0.0, 0.0, 1.0);
        assert!(PidState::default().step(&g, 0.1, 0.0).is_err());
        assert!(PidState::default().step(&g, 0.1, -0.1).is_err());
    }

    #[test]
    fn reset_matches_fresh_controller() {
        let g = PidGains::manhattan(0.45);
        let mut s = PidState::default();
        for e in [0.1, -0.3, 0.2] {
            s = s.step(&g, e, 0.1).unwrap().1;
        }
        let s = s.reset();
        assert_eq!(s, PidState::default());
        let p = gains(3.0, 0.0, 0.0, 1.0);
        assert_eq!(
            s.step(&p, 0.1, 0.1).unwrap().0,
            PidState::default().step(&p, 0.1, 0.1).unwrap().0
        );
    }

    #[test]
    fn replay_after_reset_is_identical() {
        let g = PidGains::euclidean(0.45);
        let errors = [0.2, 0.15, 0.11, 0.02, -0.01, 0.0, 0.03];
        let run = |start: PidState| {
            let mut s = start;
            errors
                .iter()
                .map(|&e| {
                    let (out, next) = s.step(&g, e, 0.1).unwrap();
                    s = next;
                    out.to_bits()
                })
                .collect::<Vec<_>>()
        };
        let mut dirty = PidState::default();
        for _ in 0..5 {
            dirty = dirty.step(&g, 1.0, 0.1).unwrap().1;
        }
        assert_eq!(run(PidState::default()), run(dirty.reset()));
    }

    proptest! {
        #[test]
        fn windup_bound_holds(
            ki in 0.0f64..100.0,
            limit in 0.01f64..2.0,
            errors in prop::collection::vec(-1.0f64..1.0, 1..200),
        ) {
            let g = gains(1.0, ki, 0.5, limit);
            let mut s = PidState::default();
            for e in errors {
                s = s.step(&g, e, 0.1).unwrap().1;
                prop_assert!((ki * s.integral).abs() <= limit * (1.0 + 1e-12));
            }
        }

        #[test]
        fn proportional_path_is_linear(kp in 0.0f64..100.0, e in -1.0f64..1.0) {
            let (out, _) = PidState::default().step(&gains(kp, 0.0, 0.0, 1.0), e, 0.1).unwrap();
            prop_assert_eq!(out, kp * e);
        }
    }
}
