//! Tilt angle to actuator command transform.
//!
//! A tilt command is turned into a surface normal, the normal defines a plane
//! through the module center `(0, 0, z0)`, and each corner actuator is driven
//! to the plane height above its base position.
//!
//! Sign convention: `a_i = z0 - z_i`, so a positive command lowers corner `i`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this radial error the Euclidean normal is taken as straight up.
pub const RADIAL_EPSILON: f64 = 1e-9;

/// Corner positions are ordered counter-clockwise starting from `(-w/2, -d/2)`.
pub const CORNER_SIGNS: [(f64, f64); 4] = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModuleGeometry {
    pub width_m: f64,
    pub depth_m: f64,
    pub z0: f64,
    pub actuator_travel: f64,
    pub max_tilt: f64,
}

impl Default for ModuleGeometry {
    fn default() -> Self {
        Self {
            width_m: 0.5,
            depth_m: 0.5,
            z0: 1.5,
            actuator_travel: 0.25,
            max_tilt: 26f64.to_radians(),
        }
    }
}

impl ModuleGeometry {
    pub fn new(
        width_m: f64,
        depth_m: f64,
        z0: f64,
        actuator_travel: f64,
        max_tilt: f64,
    ) -> Result<Self> {
        let geo = Self {
            width_m,
            depth_m,
            z0,
            actuator_travel,
            max_tilt,
        };
        geo.validate()?;
        Ok(geo)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("width_m", self.width_m),
            ("depth_m", self.depth_m),
            ("z0", self.z0),
            ("actuator_travel", self.actuator_travel),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::config(
                    format!("geometry.{name}"),
                    format!("must be > 0, got {value}"),
                ));
            }
        }
        if !(self.max_tilt > 0.0 && self.max_tilt < std::f64::consts::FRAC_PI_2) {
            return Err(Error::config(
                "geometry.max_tilt",
                format!("must lie in (0, pi/2), got {}", self.max_tilt),
            ));
        }
        // The steepest single-axis tilt must be realizable by the actuator travel.
        let half_span = self.width_m.min(self.depth_m) / 2.0;
        let reachable = self.actuator_travel / half_span;
        if self.max_tilt.tan() > reachable * 1.02 {
            return Err(Error::config(
                "geometry.max_tilt",
                format!(
                    "tan(max_tilt) = {:.4} exceeds actuator_travel / half-span = {:.4}",
                    self.max_tilt.tan(),
                    reachable
                ),
            ));
        }
        Ok(())
    }

    /// Planar base positions of the four actuators, in corner order.
    pub fn actuator_xy(&self) -> [[f64; 2]; 4] {
        CORNER_SIGNS.map(|(sx, sy)| [sx * self.width_m / 2.0, sy * self.depth_m / 2.0])
    }

    pub fn contains(&self, xy: [f64; 2]) -> bool {
        xy[0].abs() <= self.width_m / 2.0 && xy[1].abs() <= self.depth_m / 2.0
    }
}

/// Raw controller output; may lie far outside the tilt bound.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TiltCommand {
    pub theta_zx: f64,
    pub theta_zy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceNormal {
    pub nx: f64,
    pub ny: f64,
    pub nz: f64,
}

impl SurfaceNormal {
    pub const UP: SurfaceNormal = SurfaceNormal {
        nx: 0.0,
        ny: 0.0,
        nz: 1.0,
    };

    pub fn scaled(self, c: f64) -> Self {
        Self {
            nx: self.nx * c,
            ny: self.ny * c,
            nz: self.nz * c,
        }
    }
}

/// Per-corner displacement below `z0`, in corner order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ActuatorCommand(pub [f64; 4]);

impl ActuatorCommand {
    pub const FLAT: ActuatorCommand = ActuatorCommand([0.0; 4]);
}

fn clamp_angle(theta: f64, max_tilt: f64) -> f64 {
    theta.clamp(-max_tilt, max_tilt)
}

fn ensure_finite(values: &[f64], what: &str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "{what} must be finite, got {values:?}"
        )))
    }
}

/// Normal for independent per-axis tilts.
///
/// `nz` is `cos(theta_zx)` alone, not the product of both cosines. The plane
/// depends only on the normal's direction, so this slightly couples the axes
/// when both tilts are nonzero.
pub fn manhattan_normal(tilt: TiltCommand, max_tilt: f64) -> Result<SurfaceNormal> {
    ensure_finite(&[tilt.theta_zx, tilt.theta_zy], "tilt angles")?;
    let zx = clamp_angle(tilt.theta_zx, max_tilt);
    let zy = clamp_angle(tilt.theta_zy, max_tilt);
    Ok(SurfaceNormal {
        nx: zx.sin(),
        ny: zy.sin(),
        nz: zx.cos(),
    })
}

/// Normal tilted by `theta` from vertical along the error direction `(ex, ey)`.
pub fn euclidean_normal(ex: f64, ey: f64, theta: f64, max_tilt: f64) -> Result<SurfaceNormal> {
    ensure_finite(&[ex, ey, theta], "euclidean normal inputs")?;
    let d = ex.hypot(ey);
    if d < RADIAL_EPSILON {
        return Ok(SurfaceNormal::UP);
    }
    let theta = clamp_angle(theta, max_tilt);
    let s = theta.sin();
    Ok(SurfaceNormal {
        nx: ex / d * s,
        ny: ey / d * s,
        nz: theta.cos(),
    })
}

/// Height at `(x, y)` of the plane with the given normal through `(0, 0, z0)`.
pub fn plane_height_at(normal: SurfaceNormal, z0: f64, x: f64, y: f64) -> Result<f64> {
    if !(normal.nz > 0.0) {
        return Err(Error::DegeneratePlane { nz: normal.nz });
    }
    Ok(z0 - (normal.nx * x + normal.ny * y) / normal.nz)
}

/// Corner commands for a plane, plus `alpha`-scaled noise, clamped to the travel.
///
/// `noise` holds one sample in `[-1, 1]` per actuator and is consumed in
/// corner order.
pub fn actuator_commands(
    normal: SurfaceNormal,
    geo: &ModuleGeometry,
    alpha: f64,
    noise: [f64; 4],
) -> Result<ActuatorCommand> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::invalid(format!(
            "noise amplitude must be >= 0, got {alpha}"
        )));
    }
    if noise.iter().any(|d| !(d.abs() <= 1.0)) {
        return Err(Error::invalid(format!(
            "noise samples must lie in [-1, 1], got {noise:?}"
        )));
    }
    let travel = geo.actuator_travel;
    let mut a = [0.0; 4];
    for (i, [x, y]) in geo.actuator_xy().into_iter().enumerate() {
        let z = plane_height_at(normal, geo.z0, x, y)?;
        a[i] = ((geo.z0 - z) + alpha * noise[i]).clamp(-travel, travel);
    }
    Ok(ActuatorCommand(a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn deg(d: f64) -> f64 {
        d.to_radians()
    }

    #[test]
    fn corner_order_is_counter_clockwise() {
        let geo = ModuleGeometry::default();
        assert_eq!(
            geo.actuator_xy(),
            [[-0.25, -0.25], [0.25, -0.25], [0.25, 0.25], [-0.25, 0.25]]
        );
    }

    #[test]
    fn default_geometry_is_valid() {
        ModuleGeometry::default().validate().unwrap();
    }

    #[test]
    fn geometry_rejects_bad_values() {
        assert!(ModuleGeometry::new(0.0, 0.5, 1.5, 0.25, deg(26.0)).is_err());
        assert!(ModuleGeometry::new(0.5, 0.5, 1.5, 0.25, deg(90.0)).is_err());
        // 60 degrees cannot be reached with 0.25 m of travel over a 0.25 m half-span.
        assert!(ModuleGeometry::new(0.5, 0.5, 1.5, 0.25, deg(60.0)).is_err());
    }

    #[test]
    fn manhattan_normal_examples() {
        let n = manhattan_normal(TiltCommand::default(), deg(26.0)).unwrap();
        assert_eq!(n, SurfaceNormal::UP);

        let n = manhattan_normal(
            TiltCommand {
                theta_zx: PI / 6.0,
                theta_zy: 0.0,
            },
            PI / 3.0,
        )
        .unwrap();
        assert_abs_diff_eq!(n.nx, 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(n.ny, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(n.nz, 0.866_025_403_784, epsilon = 1e-9);

        let n = manhattan_normal(
            TiltCommand {
                theta_zx: 2.0,
                theta_zy: 0.0,
            },
            deg(26.0),
        )
        .unwrap();
        assert_abs_diff_eq!(n.nx, 0.438_371_146_789, epsilon = 1e-9);
        assert_abs_diff_eq!(n.nz, 0.898_794_046_299, epsilon = 1e-9);
    }

    #[test]
    fn manhattan_normal_uses_only_theta_zx_for_nz() {
        let n = manhattan_normal(
            TiltCommand {
                theta_zx: 0.1,
                theta_zy: 0.3,
            },
            deg(26.0),
        )
        .unwrap();
        assert_eq!(n.nz, 0.1f64.cos());
        assert_eq!(n.ny, 0.3f64.sin());
    }

    #[test]
    fn non_finite_inputs_are_rejected() {
        assert!(manhattan_normal(
            TiltCommand {
                theta_zx: f64::NAN,
                theta_zy: 0.0
            },
            0.4
        )
        .is_err());
        assert!(euclidean_normal(f64::INFINITY, 0.0, 0.1, 0.4).is_err());
        assert!(euclidean_normal(0.1, 0.0, f64::NAN, 0.4).is_err());
    }

    #[test]
    fn euclidean_normal_examples() {
        for theta in [-1.0, 0.0, 0.3, 17.0] {
            assert_eq!(
                euclidean_normal(0.0, 0.0, theta, deg(26.0)).unwrap(),
                SurfaceNormal::UP
            );
        }
        let n = euclidean_normal(3.0, 4.0, PI / 6.0, PI / 3.0).unwrap();
        assert_abs_diff_eq!(n.nx, 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(n.ny, 0.4, epsilon = 1e-12);
        assert_abs_diff_eq!(n.nz, 0.866_025_403_784, epsilon = 1e-9);

        let n = euclidean_normal(1.0, 0.0, -PI / 6.0, PI / 3.0).unwrap();
        assert_abs_diff_eq!(n.nx, -0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(n.ny, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn euclidean_radial_epsilon_branch() {
        assert_eq!(
            euclidean_normal(5e-10, 0.0, 0.4, 0.45).unwrap(),
            SurfaceNormal::UP
        );
        assert_ne!(
            euclidean_normal(2e-9, 0.0, 0.4, 0.45).unwrap(),
            SurfaceNormal::UP
        );
    }

    #[test]
    fn plane_height_examples() {
        assert_eq!(
            plane_height_at(SurfaceNormal::UP, 1.5, 0.2, -0.1).unwrap(),
            1.5
        );

        let th = deg(20.0);
        let n = SurfaceNormal {
            nx: th.sin(),
            ny: 0.0,
            nz: th.cos(),
        };
        for y in [-0.25, 0.0, 0.13] {
            let z = plane_height_at(n, 1.5, 0.25, y).unwrap();
            assert_abs_diff_eq!(z, 1.5 - 0.25 * th.tan(), epsilon = 1e-12);
        }

        let n = SurfaceNormal {
            nx: 0.3,
            ny: 0.4,
            nz: 0.86603,
        };
        let z = plane_height_at(n, 1.5, 0.25, 0.25).unwrap();
        assert_abs_diff_eq!(
            z,
            1.5 - (0.3 * 0.25 + 0.4 * 0.25) / 0.86603,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(z, 1.29793, epsilon = 1e-5);
    }

    #[test]
    fn degenerate_plane_is_an_error() {
        let n = SurfaceNormal {
            nx: 1.0,
            ny: 0.0,
            nz: 0.0,
        };
        assert!(matches!(
            plane_height_at(n, 1.5, 0.0, 0.0),
            Err(Error::DegeneratePlane { .. })
        ));
        let geo = ModuleGeometry::default();
        assert!(actuator_commands(n, &geo, 0.0, [0.0; 4]).is_err());
    }

    #[test]
    fn actuator_command_examples() {
        let geo = ModuleGeometry::default();
        let a = actuator_commands(SurfaceNormal::UP, &geo, 0.0, [0.3, -0.2, 1.0, -1.0]).unwrap();
        assert_eq!(a, ActuatorCommand::FLAT);

        let n = manhattan_normal(
            TiltCommand {
                theta_zx: deg(26.0),
                theta_zy: 0.0,
            },
            deg(26.0),
        )
        .unwrap();
        let a = actuator_commands(n, &geo, 0.0, [0.0; 4]).unwrap();
        let t = 0.25 * deg(26.0).tan();
        let expected = [-t, t, t, -t];
        for i in 0..4 {
            assert_abs_diff_eq!(a.0[i], expected[i], epsilon = 1e-12);
        }
        assert_abs_diff_eq!(t, 0.121933, epsilon = 1e-6);

        let a = actuator_commands(SurfaceNormal::UP, &geo, 0.1, [1.0, -1.0, 1.0, -1.0]).unwrap();
        assert_eq!(a.0, [0.1, -0.1, 0.1, -0.1]);
    }

    #[test]
    fn noise_never_exceeds_travel() {
        let geo = ModuleGeometry::default();
        let n = manhattan_normal(
            TiltCommand {
                theta_zx: 1.0,
                theta_zy: 1.0,
            },
            deg(26.0),
        )
        .unwrap();
        let a = actuator_commands(n, &geo, 0.2, [1.0, 1.0, 1.0, 1.0]).unwrap();
        assert!(a.0.iter().all(|v| v.abs() <= 0.25));
        assert_eq!(a.0[2], 0.25);
    }

    #[test]
    fn bad_noise_or_alpha_is_rejected() {
        let geo = ModuleGeometry::default();
        assert!(actuator_commands(SurfaceNormal::UP, &geo, -0.1, [0.0; 4]).is_err());
        assert!(actuator_commands(SurfaceNormal::UP, &geo, 0.1, [1.5, 0.0, 0.0, 0.0]).is_err());
    }

    proptest! {
        #[test]
        fn plane_passes_through_center(zx in -0.45f64..0.45, zy in -0.45f64..0.45, z0 in 0.1f64..3.0) {
            let n = manhattan_normal(TiltCommand { theta_zx: zx, theta_zy: zy }, deg(26.0)).unwrap();
            prop_assert_eq!(plane_height_at(n, z0, 0.0, 0.0).unwrap(), z0);
        }

        #[test]
        fn plane_is_scale_invariant(
            nx in -0.6f64..0.6, ny in -0.6f64..0.6, nz in 0.3f64..1.0,
            c in 0.01f64..100.0, x in -0.25f64..0.25, y in -0.25f64..0.25,
        ) {
            let n = SurfaceNormal { nx, ny, nz };
            let z1 = plane_height_at(n, 1.5, x, y).unwrap();
            let z2 = plane_height_at(n.scaled(c), 1.5, x, y).unwrap();
            prop_assert!((z1 - z2).abs() < 1e-12);
        }

        #[test]
        fn single_axis_commands_are_antisymmetric_and_zero_sum(theta in -1.0f64..1.0) {
            let geo = ModuleGeometry::default();
            let cmd = |t: f64| {
                let n = manhattan_normal(TiltCommand { theta_zx: t, theta_zy: 0.0 }, geo.max_tilt).unwrap();
                actuator_commands(n, &geo, 0.0, [0.0; 4]).unwrap().0
            };
            let plus = cmd(theta);
            let minus = cmd(-theta);
            for i in 0..4 {
                prop_assert!((plus[i] + minus[i]).abs() < 1e-12);
            }
            prop_assert!(plus.iter().sum::<f64>().abs() < 1e-12);
        }

        #[test]
        fn euclidean_matches_manhattan_on_the_x_axis(ex in 1e-6f64..0.5, theta in -1.0f64..1.0) {
            let e = euclidean_normal(ex, 0.0, theta, deg(26.0)).unwrap();
            let m = manhattan_normal(TiltCommand { theta_zx: theta, theta_zy: 0.0 }, deg(26.0)).unwrap();
            prop_assert_eq!(e, m);
        }

        #[test]
        fn commands_stay_within_travel(
            zx in -10.0f64..10.0, zy in -10.0f64..10.0, alpha in 0.0f64..0.5,
            d0 in -1.0f64..=1.0, d1 in -1.0f64..=1.0, d2 in -1.0f64..=1.0, d3 in -1.0f64..=1.0,
        ) {
            let geo = ModuleGeometry::default();
            let n = manhattan_normal(TiltCommand { theta_zx: zx, theta_zy: zy }, geo.max_tilt).unwrap();
            let a = actuator_commands(n, &geo, alpha, [d0, d1, d2, d3]).unwrap();
            prop_assert!(a.0.iter().all(|v| v.abs() <= geo.actuator_travel));
        }
    }
}
