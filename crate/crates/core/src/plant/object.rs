use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Shape {
    /// Rolls; friction at the contact point drives its spin.
    Sphere { radius: f64 },
    /// Flat-bottomed slider (disks, upright cylinders).
    Disk { radius: f64, thickness: f64 },
    /// Flat-bottomed slider with the footprint of a cube.
    Cube { side: f64 },
}

impl Shape {
    /// Distance from the object center to its lowest contact point.
    pub fn contact_offset(&self) -> f64 {
        match *self {
            Shape::Sphere { radius } => radius,
            Shape::Disk { thickness, .. } => thickness / 2.0,
            Shape::Cube { side } => side / 2.0,
        }
    }

    pub fn rolls(&self) -> bool {
        matches!(self, Shape::Sphere { .. })
    }

    fn dimensions(&self) -> Vec<f64> {
        match *self {
            Shape::Sphere { radius } => vec![radius],
            Shape::Disk { radius, thickness } => vec![radius, thickness],
            Shape::Cube { side } => vec![side],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectSpec {
    pub label: String,
    pub shape: Shape,
    /// kg
    pub mass: f64,
    pub friction_mu: f64,
    /// Rolling resistance coefficient; only used by rolling shapes.
    #[serde(default)]
    pub rolling_resistance: f64,
}

/// Catalog names accepted by [`ObjectSpec::preset`].
pub const PRESET_NAMES: [&str; 7] = [
    "sphere", "cube", "disk", "cylinder", "apple", "egg", "bunny",
];

impl ObjectSpec {
    /// Object catalog. Masses and sizes follow the measured objects; friction and
    /// rolling resistance are plant calibration values.
    ///
    /// Irregular objects (apple, egg, bunny) are approximated by a sphere or a
    /// slider, which is reported through the second tuple element.
    pub fn preset(name: &str) -> Option<(ObjectSpec, Option<&'static str>)> {
        let spec = |label: &str, shape, mass, friction_mu, rolling_resistance| ObjectSpec {
            label: label.to_string(),
            shape,
            mass,
            friction_mu,
            rolling_resistance,
        };
        Some(match name {
            "sphere" => (
                spec(
                    "sphere",
                    Shape::Sphere { radius: 0.0255 },
                    0.0125,
                    0.6,
                    0.01,
                ),
                None,
            ),
            "cube" => (
                spec("cube", Shape::Cube { side: 0.05 }, 0.066, 0.35, 0.0),
                None,
            ),
            "disk" => (
                spec(
                    "disk",
                    Shape::Disk {
                        radius: 0.02,
                        thickness: 0.004,
                    },
                    0.0038,
                    0.3,
                    0.0,
                ),
                None,
            ),
            "cylinder" => (
                spec(
                    "cylinder",
                    Shape::Disk {
                        radius: 0.0165,
                        thickness: 0.045,
                    },
                    0.0257,
                    0.3,
                    0.0,
                ),
                None,
            ),
            "apple" => (
                spec("apple", Shape::Sphere { radius: 0.0305 }, 0.1314, 0.8, 0.05),
                Some("apple is approximated by a sphere of diameter 6.1 cm"),
            ),
            "egg" => (
                spec("egg", Shape::Sphere { radius: 0.02575 }, 0.0667, 0.7, 0.05),
                Some("egg is approximated by a sphere of diameter 5.15 cm"),
            ),
            "bunny" => (
                spec(
                    "bunny",
                    Shape::Disk {
                        radius: 0.045,
                        thickness: 0.09,
                    },
                    0.0503,
                    0.4,
                    0.0,
                ),
                Some("bunny is approximated by a flat-bottomed slider of diameter 9 cm"),
            ),
            _ => return None,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass.is_finite() && self.mass > 0.0) {
            return Err(Error::config(
                "object.mass",
                format!("must be > 0, got {}", self.mass),
            ));
        }
        if self
            .shape
            .dimensions()
            .iter()
            .any(|d| !(d.is_finite() && *d > 0.0))
        {
            return Err(Error::config("object.shape", "all dimensions must be > 0"));
        }
        if !(self.friction_mu.is_finite() && self.friction_mu >= 0.0) {
            return Err(Error::config(
                "object.friction_mu",
                format!("must be >= 0, got {}", self.friction_mu),
            ));
        }
        if !(self.rolling_resistance.is_finite() && self.rolling_resistance >= 0.0) {
            return Err(Error::config(
                "object.rolling_resistance",
                format!("must be >= 0, got {}", self.rolling_resistance),
            ));
        }
        Ok(())
    }

    /// Moment of inertia about any axis through the center (solid sphere).
    pub(crate) fn inertia(&self) -> f64 {
        match self.shape {
            Shape::Sphere { radius } => 0.4 * self.mass * radius * radius,
            _ => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectState {
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
    /// Zero for non-rolling shapes.
    pub angular_velocity: Vector3<f64>,
    /// Elastic tangential displacement of the stick-slip friction model.
    pub(crate) slip: Vector3<f64>,
}

impl ObjectState {
    pub fn at_rest(position: Vector3<f64>) -> Self {
        Self {
            position,
            velocity: Vector3::zeros(),
            angular_velocity: Vector3::zeros(),
            slip: Vector3::zeros(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.position
            .iter()
            .chain(self.velocity.iter())
            .chain(self.angular_velocity.iter())
            .all(|v| v.is_finite())
    }
}

/// Planar position the controller sees.
pub fn observe(object: &ObjectState) -> [f64; 2] {
    [object.position.x, object.position.y]
}
