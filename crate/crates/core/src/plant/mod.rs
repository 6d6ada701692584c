//! Simulated plant: a mass-spring fabric sheet driven at its four corners,
//! with one rigid object resting on it.
//!
//! Nodes sit on a regular grid over the frame. Corner nodes follow the
//! rate-limited actuators. The border is hemmed: each border node keeps its xy
//! on the frame line and its height is interpolated linearly between the two
//! adjacent corners, so the edges stay straight. Interior nodes are free.
//! Structural and shear springs carry a uniform prestrain so the sheet is taut.
//!
//! Object contact is a penalty force against the bilinear fabric patch under
//! the object center, with a stick-slip Coulomb friction spring at the
//! contact point. Reactions are spread onto the patch nodes with the
//! interpolation weights.

mod object;
mod sensor;

pub use object::{observe, ObjectSpec, ObjectState, Shape, PRESET_NAMES};
pub use sensor::{Sensor, SensorConfig};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ActuatorCommand, ModuleGeometry, CORNER_SIGNS};

type V3 = Vector3<f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FabricConfig {
    pub grid_nx: usize,
    pub grid_ny: usize,
    pub width: f64,
    pub depth: f64,
    /// Lumped mass of an interior node.
    pub node_mass: f64,
    pub k_struct: f64,
    pub k_shear: f64,
    pub k_bend: f64,
    /// Fractional shortening of every spring's rest length.
    pub prestrain: f64,
    /// Relative-velocity dashpot between structurally connected nodes (N s/m).
    pub damping: f64,
    /// Absolute viscous drag on every free node (N s/m).
    pub drag: f64,
    pub gravity: f64,
    pub physics_dt: f64,
    /// Maximum corner speed (m/s).
    pub actuator_rate_limit: f64,
    pub contact_stiffness: f64,
    pub contact_damping: f64,
    pub friction_stiffness: f64,
    pub friction_damping: f64,
    /// Viscous loss of an object moving over the cloth, per unit object mass
    /// (1/s). Stands in for the energy spent pushing the fabric indentation
    /// along.
    pub contact_drag: f64,
    /// Relaxation time used by [`Plant::new`], once for the bare sheet and
    /// once with the object placed.
    pub settle_time: f64,
}

impl Default for FabricConfig {
    fn default() -> Self {
        Self {
            grid_nx: 17,
            grid_ny: 17,
            width: 0.5,
            depth: 0.5,
            node_mass: 0.002,
            k_struct: 800.0,
            k_shear: 200.0,
            k_bend: 50.0,
            prestrain: 0.5,
            damping: 0.15,
            drag: 0.1,
            gravity: 9.81,
            physics_dt: 0.001,
            actuator_rate_limit: 0.5,
            contact_stiffness: 400.0,
            contact_damping: 1.0,
            friction_stiffness: 400.0,
            friction_damping: 0.5,
            contact_drag: 20.0,
            settle_time: 0.5,
        }
    }
}

impl FabricConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_nx < 5 || self.grid_ny < 5 {
            return Err(Error::config(
                "fabric.grid_nx",
                format!(
                    "grid must be at least 5x5, got {}x{}",
                    self.grid_nx, self.grid_ny
                ),
            ));
        }
        let positive = [
            ("width", self.width),
            ("depth", self.depth),
            ("node_mass", self.node_mass),
            ("k_struct", self.k_struct),
            ("physics_dt", self.physics_dt),
            ("actuator_rate_limit", self.actuator_rate_limit),
            ("contact_stiffness", self.contact_stiffness),
            ("friction_stiffness", self.friction_stiffness),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::config(
                    format!("fabric.{name}"),
                    format!("must be > 0, got {value}"),
                ));
            }
        }
        let non_negative = [
            ("k_shear", self.k_shear),
            ("k_bend", self.k_bend),
            ("damping", self.damping),
            ("drag", self.drag),
            ("gravity", self.gravity),
            ("contact_damping", self.contact_damping),
            ("friction_damping", self.friction_damping),
            ("contact_drag", self.contact_drag),
            ("settle_time", self.settle_time),
        ];
        for (name, value) in non_negative {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::config(
                    format!("fabric.{name}"),
                    format!("must be >= 0, got {value}"),
                ));
            }
        }
        if !(0.0..1.0).contains(&self.prestrain) {
            return Err(Error::config(
                "fabric.prestrain",
                format!("must lie in [0, 1), got {}", self.prestrain),
            ));
        }
        let bound = self.stable_dt_bound();
        if self.physics_dt >= bound {
            return Err(Error::config(
                "fabric.physics_dt",
                format!(
                    "{} s is not below the stability bound {:.6} s for node_mass {}",
                    self.physics_dt, bound, self.node_mass
                ),
            ));
        }
        Ok(())
    }

    /// `2 / omega_max` for the stiffest lattice mode of a free node, where
    /// `omega_max^2 = (4 k_struct + 2 k_shear + 4 k_bend) / m`.
    pub fn stable_dt_bound(&self) -> f64 {
        let k = 4.0 * self.k_struct + 2.0 * self.k_shear + 4.0 * self.k_bend;
        2.0 * (self.node_mass / k).sqrt()
    }

    pub fn spacing(&self) -> (f64, f64) {
        (
            self.width / (self.grid_nx - 1) as f64,
            self.depth / (self.grid_ny - 1) as f64,
        )
    }

    pub fn check_against(&self, geo: &ModuleGeometry) -> Result<()> {
        if (self.width - geo.width_m).abs() > 1e-12 || (self.depth - geo.depth_m).abs() > 1e-12 {
            return Err(Error::config(
                "fabric.width",
                format!(
                    "fabric {}x{} m must match the module {}x{} m",
                    self.width, self.depth, geo.width_m, geo.depth_m
                ),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum NodeKind {
    /// Kinematic; height is a fixed blend of the four corner heights.
    Border([f64; 4]),
    Interior,
}

#[derive(Debug, Clone, Copy)]
struct Spring {
    a: usize,
    b: usize,
    k: f64,
    rest: f64,
    damped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FabricState {
    pub positions: Vec<V3>,
    pub velocities: Vec<V3>,
    /// Commanded corner heights.
    pub corner_targets: [f64; 4],
    /// Realized corner heights after rate limiting.
    pub corner_heights: [f64; 4],
}

/// Bilinear sample of the fabric under a planar point.
#[derive(Debug, Clone, Copy)]
struct Patch {
    nodes: [usize; 4],
    weights: [f64; 4],
    point: V3,
    normal: V3,
    velocity: V3,
}

#[derive(Debug, Clone)]
pub struct Plant {
    config: FabricConfig,
    geo: ModuleGeometry,
    object_spec: Option<ObjectSpec>,
    kinds: Vec<NodeKind>,
    inv_mass: Vec<f64>,
    masses: Vec<f64>,
    springs: Vec<Spring>,
    forces: Vec<V3>,
    fabric: FabricState,
    object: Option<ObjectState>,
    hold_object_xy: Option<[f64; 2]>,
    time: f64,
}

impl Plant {
    /// Flat sheet at `z0`, settled, with the object resting at `start_xy`.
    pub fn new(
        config: &FabricConfig,
        geo: &ModuleGeometry,
        object: &ObjectSpec,
        start_xy: [f64; 2],
    ) -> Result<Self> {
        object.validate()?;
        if !geo.contains(start_xy) {
            return Err(Error::invalid(format!(
                "start position {start_xy:?} is outside the workspace"
            )));
        }
        let mut plant = Self::fabric_only(config, geo)?;
        plant.object_spec = Some(object.clone());
        plant.settle()?;
        plant.place_object(start_xy);
        plant.hold_object_xy = Some(start_xy);
        plant.settle()?;
        plant.hold_object_xy = None;
        plant.time = 0.0;
        Ok(plant)
    }

    /// The sheet alone, flat at `z0` and not yet settled.
    pub fn fabric_only(config: &FabricConfig, geo: &ModuleGeometry) -> Result<Self> {
        config.validate()?;
        geo.validate()?;
        config.check_against(geo)?;
        let (nx, ny) = (config.grid_nx, config.grid_ny);
        let (hx, hy) = config.spacing();
        let n = nx * ny;

        let mut kinds = Vec::with_capacity(n);
        let mut masses = Vec::with_capacity(n);
        let mut positions = Vec::with_capacity(n);
        for j in 0..ny {
            for i in 0..nx {
                let on_x = i == 0 || i == nx - 1;
                let on_y = j == 0 || j == ny - 1;
                let kind = if on_x || on_y {
                    // Bilinear corner weights; on the border they reduce to a
                    // linear blend of the two adjacent corners.
                    let u = i as f64 / (nx - 1) as f64;
                    let v = j as f64 / (ny - 1) as f64;
                    let mut w = [0.0; 4];
                    for (c, &(sx, sy)) in CORNER_SIGNS.iter().enumerate() {
                        let wu = if sx < 0.0 { 1.0 - u } else { u };
                        let wv = if sy < 0.0 { 1.0 - v } else { v };
                        w[c] = wu * wv;
                    }
                    NodeKind::Border(w)
                } else {
                    NodeKind::Interior
                };
                kinds.push(kind);
                masses.push(config.node_mass);
                positions.push(V3::new(
                    -config.width / 2.0 + i as f64 * hx,
                    -config.depth / 2.0 + j as f64 * hy,
                    geo.z0,
                ));
            }
        }
        // Grid ends are pinned exactly on the frame.
        for (i, j) in [(0, 0), (nx - 1, 0), (0, ny - 1), (nx - 1, ny - 1)] {
            let p = &mut positions[j * nx + i];
            p.x = if i == 0 {
                -config.width / 2.0
            } else {
                config.width / 2.0
            };
            p.y = if j == 0 {
                -config.depth / 2.0
            } else {
                config.depth / 2.0
            };
        }
        let inv_mass = kinds
            .iter()
            .zip(&masses)
            .map(|(k, m)| {
                if matches!(k, NodeKind::Border(_)) {
                    0.0
                } else {
                    1.0 / m
                }
            })
            .collect();

        let idx = |i: usize, j: usize| j * nx + i;
        let mut springs = Vec::new();
        // Bend springs skip the prestrain: near the border they have no
        // opposing partner, and a prestressed one would pull the sheet inward.
        let mut add = |a: usize, b: usize, k: f64, damped: bool, prestrained: bool| {
            if k > 0.0 || damped {
                let shrink = if prestrained {
                    1.0 - config.prestrain
                } else {
                    1.0
                };
                let rest = (positions[b] - positions[a]).norm() * shrink;
                springs.push(Spring {
                    a,
                    b,
                    k,
                    rest,
                    damped,
                });
            }
        };
        for j in 0..ny {
            for i in 0..nx {
                if i + 1 < nx {
                    add(idx(i, j), idx(i + 1, j), config.k_struct, true, true);
                }
                if j + 1 < ny {
                    add(idx(i, j), idx(i, j + 1), config.k_struct, true, true);
                }
                if i + 1 < nx && j + 1 < ny {
                    add(idx(i, j), idx(i + 1, j + 1), config.k_shear, false, true);
                    add(idx(i + 1, j), idx(i, j + 1), config.k_shear, false, true);
                }
                if i + 2 < nx {
                    add(idx(i, j), idx(i + 2, j), config.k_bend, false, false);
                }
                if j + 2 < ny {
                    add(idx(i, j), idx(i, j + 2), config.k_bend, false, false);
                }
            }
        }

        Ok(Self {
            config: config.clone(),
            geo: *geo,
            object_spec: None,
            kinds,
            inv_mass,
            masses,
            springs,
            forces: vec![V3::zeros(); n],
            fabric: FabricState {
                velocities: vec![V3::zeros(); n],
                positions,
                corner_targets: [geo.z0; 4],
                corner_heights: [geo.z0; 4],
            },
            object: None,
            hold_object_xy: None,
            time: 0.0,
        })
    }

    pub fn config(&self) -> &FabricConfig {
        &self.config
    }

    pub fn geometry(&self) -> &ModuleGeometry {
        &self.geo
    }

    pub fn fabric(&self) -> &FabricState {
        &self.fabric
    }

    pub fn object(&self) -> Option<&ObjectState> {
        self.object.as_ref()
    }

    pub fn object_spec(&self) -> Option<&ObjectSpec> {
        self.object_spec.as_ref()
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn node_index(&self, i: usize, j: usize) -> usize {
        j * self.config.grid_nx + i
    }

    pub fn corner_node(&self, corner: usize) -> usize {
        let (sx, sy) = CORNER_SIGNS[corner];
        let i = if sx < 0.0 { 0 } else { self.config.grid_nx - 1 };
        let j = if sy < 0.0 { 0 } else { self.config.grid_ny - 1 };
        self.node_index(i, j)
    }

    /// Planar object position, if an object is present.
    pub fn observe(&self) -> Option<[f64; 2]> {
        self.object.as_ref().map(observe)
    }

    /// Sets corner targets to `z0 - a_i`; corners then slew toward them.
    pub fn apply_actuators(&mut self, command: &ActuatorCommand) {
        for (target, a) in self.fabric.corner_targets.iter_mut().zip(command.0) {
            *target = self.geo.z0 - a;
        }
    }

    fn settle(&mut self) -> Result<()> {
        let steps = (self.config.settle_time / self.config.physics_dt).round() as usize;
        for _ in 0..steps {
            self.step()?;
        }
        Ok(())
    }

    fn place_object(&mut self, xy: [f64; 2]) {
        let offset = self
            .object_spec
            .as_ref()
            .map_or(0.0, |s| s.shape.contact_offset());
        let z = self
            .patch(xy[0], xy[1])
            .map_or(self.geo.z0, |p| p.point.z + offset / p.normal.z.max(1e-6));
        self.object = Some(ObjectState::at_rest(V3::new(xy[0], xy[1], z)));
    }

    /// Puts an object at an explicit state; used by tests and replay tools.
    pub fn set_object(&mut self, spec: ObjectSpec, state: ObjectState) -> Result<()> {
        spec.validate()?;
        self.object_spec = Some(spec);
        self.object = Some(state);
        Ok(())
    }

    pub fn fabric_mut(&mut self) -> &mut FabricState {
        &mut self.fabric
    }

    fn patch(&self, x: f64, y: f64) -> Option<Patch> {
        let (nx, ny) = (self.config.grid_nx, self.config.grid_ny);
        let (hx, hy) = self.config.spacing();
        let u = (x + self.config.width / 2.0) / hx;
        let v = (y + self.config.depth / 2.0) / hy;
        let (umax, vmax) = ((nx - 1) as f64, (ny - 1) as f64);
        if !(0.0..=umax).contains(&u) || !(0.0..=vmax).contains(&v) {
            return None;
        }
        let i = (u.floor() as usize).min(nx - 2);
        let j = (v.floor() as usize).min(ny - 2);
        let fu = u - i as f64;
        let fv = v - j as f64;
        let nodes = [
            self.node_index(i, j),
            self.node_index(i + 1, j),
            self.node_index(i, j + 1),
            self.node_index(i + 1, j + 1),
        ];
        let weights = [
            (1.0 - fu) * (1.0 - fv),
            fu * (1.0 - fv),
            (1.0 - fu) * fv,
            fu * fv,
        ];
        let ij = [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)];
        let mut point = V3::zeros();
        let mut velocity = V3::zeros();
        let mut normal = V3::zeros();
        for k in 0..4 {
            point += self.fabric.positions[nodes[k]] * weights[k];
            velocity += self.fabric.velocities[nodes[k]] * weights[k];
            normal += self.node_normal(ij[k].0, ij[k].1) * weights[k];
        }
        Some(Patch {
            nodes,
            weights,
            point,
            normal: normal.normalize(),
            velocity,
        })
    }

    /// Central-difference normal at node `(i, j)`; one-sided on the border.
    fn node_normal(&self, i: usize, j: usize) -> V3 {
        let (nx, ny) = (self.config.grid_nx, self.config.grid_ny);
        let p = &self.fabric.positions;
        let tx =
            p[self.node_index((i + 1).min(nx - 1), j)] - p[self.node_index(i.saturating_sub(1), j)];
        let ty =
            p[self.node_index(i, (j + 1).min(ny - 1))] - p[self.node_index(i, j.saturating_sub(1))];
        tx.cross(&ty).normalize()
    }

    /// Fabric surface point and unit normal under `(x, y)`.
    pub fn surface_at(&self, x: f64, y: f64) -> Option<(V3, V3)> {
        self.patch(x, y).map(|p| (p.point, p.normal))
    }

    fn accumulate_internal_forces(&self, forces: &mut [V3]) {
        let p = &self.fabric.positions;
        let v = &self.fabric.velocities;
        let c = self.config.damping;
        for s in &self.springs {
            let d = p[s.b] - p[s.a];
            let len = d.norm();
            let mut f = if len > 0.0 {
                d * (s.k * (len - s.rest) / len)
            } else {
                V3::zeros()
            };
            if s.damped {
                f += (v[s.b] - v[s.a]) * c;
            }
            forces[s.a] += f;
            forces[s.b] -= f;
        }
    }

    /// Penalty contact between the object and the patch under it.
    /// Returns the force and torque on the object and writes reactions into `forces`.
    fn contact(&mut self, forces: &mut [V3]) -> (V3, V3) {
        let (Some(spec), Some(obj)) = (self.object_spec.as_ref(), self.object.as_ref()) else {
            return (V3::zeros(), V3::zeros());
        };
        let Some(patch) = self.patch(obj.position.x, obj.position.y) else {
            if let Some(o) = self.object.as_mut() {
                o.slip = V3::zeros();
            }
            return (V3::zeros(), V3::zeros());
        };
        let n = patch.normal;
        let offset = spec.shape.contact_offset();
        let gap = (obj.position - patch.point).dot(&n) - offset;
        if gap >= 0.0 {
            if let Some(o) = self.object.as_mut() {
                o.slip = V3::zeros();
            }
            return (V3::zeros(), V3::zeros());
        }
        let lever = -n * offset;
        let contact_vel = if spec.shape.rolls() {
            obj.velocity + obj.angular_velocity.cross(&lever)
        } else {
            obj.velocity
        };
        let rel = contact_vel - patch.velocity;
        let vn = rel.dot(&n);
        let fn_mag =
            (self.config.contact_stiffness * (-gap) - self.config.contact_damping * vn).max(0.0);

        let dt = self.config.physics_dt;
        let vt = rel - n * vn;
        let mut slip = obj.slip + vt * dt;
        slip -= n * slip.dot(&n);
        let mut ft = -slip * self.config.friction_stiffness - vt * self.config.friction_damping;
        let cap = spec.friction_mu * fn_mag;
        let ft_norm = ft.norm();
        if ft_norm > cap {
            ft *= if ft_norm > 0.0 { cap / ft_norm } else { 0.0 };
            slip = -ft / self.config.friction_stiffness;
        }

        let slide = obj.velocity - patch.velocity;
        let drag = -(slide - n * slide.dot(&n)) * (self.config.contact_drag * spec.mass);
        let force = n * fn_mag + ft + drag;
        let mut torque = V3::zeros();
        if spec.shape.rolls() {
            torque = lever.cross(&ft);
            if spec.rolling_resistance > 0.0 {
                let w = obj.angular_velocity;
                let wt = w - n * w.dot(&n);
                // Regularized near zero spin to avoid chatter.
                let scale = wt.norm().max(0.5);
                torque -= wt * (spec.rolling_resistance * offset * fn_mag / scale);
            }
        }
        for k in 0..4 {
            forces[patch.nodes[k]] -= force * patch.weights[k];
        }
        if let Some(o) = self.object.as_mut() {
            o.slip = slip;
        }
        (force, torque)
    }

    fn advance_corners(&mut self) -> [f64; 4] {
        let max_step = self.config.actuator_rate_limit * self.config.physics_dt;
        let mut speed = [0.0; 4];
        for c in 0..4 {
            let h = self.fabric.corner_heights[c];
            let target = self.fabric.corner_targets[c];
            let diff = target - h;
            let next = if diff.abs() <= max_step * (1.0 + 1e-9) {
                target
            } else {
                h + max_step * diff.signum()
            };
            speed[c] = (next - h) / self.config.physics_dt;
            self.fabric.corner_heights[c] = next;
        }
        speed
    }

    /// One semi-implicit Euler step of the sheet and the object.
    pub fn step(&mut self) -> Result<()> {
        let dt = self.config.physics_dt;
        let g = self.config.gravity;
        let mut forces = std::mem::take(&mut self.forces);
        let drag = self.config.drag;
        for (idx, f) in forces.iter_mut().enumerate() {
            *f = match self.kinds[idx] {
                NodeKind::Border(_) => V3::zeros(),
                NodeKind::Interior => {
                    V3::new(0.0, 0.0, -self.masses[idx] * g) - self.fabric.velocities[idx] * drag
                }
            };
        }
        self.accumulate_internal_forces(&mut forces);
        let (obj_force, obj_torque) = self.contact(&mut forces);

        let speed = self.advance_corners();
        for (idx, kind) in self.kinds.iter().enumerate() {
            let inv_m = self.inv_mass[idx];
            let v = &mut self.fabric.velocities[idx];
            let p = &mut self.fabric.positions[idx];
            match kind {
                NodeKind::Interior => {
                    *v += forces[idx] * (inv_m * dt);
                    *p += *v * dt;
                }
                NodeKind::Border(w) => {
                    let blend = |h: &[f64; 4]| w.iter().zip(h).map(|(w, h)| w * h).sum::<f64>();
                    *v = V3::new(0.0, 0.0, blend(&speed));
                    p.z = blend(&self.fabric.corner_heights);
                }
            }
        }
        self.forces = forces;

        if let (Some(spec), Some(obj)) = (self.object_spec.as_ref(), self.object.as_mut()) {
            let accel = obj_force / spec.mass + V3::new(0.0, 0.0, -g);
            obj.velocity += accel * dt;
            if spec.shape.rolls() {
                obj.angular_velocity += obj_torque * (dt / spec.inertia());
            }
            if let Some([x, y]) = self.hold_object_xy {
                obj.velocity.x = 0.0;
                obj.velocity.y = 0.0;
                obj.angular_velocity = V3::zeros();
                obj.position.x = x;
                obj.position.y = y;
            }
            obj.position += obj.velocity * dt;
        }
        self.time += dt;

        let finite = self.object.as_ref().is_none_or(|o| o.is_finite())
            && self
                .fabric
                .positions
                .iter()
                .all(|p| p.iter().all(|c| c.is_finite()));
        if !finite {
            return Err(Error::Diverged { time: self.time });
        }
        Ok(())
    }

    /// Runs enough physics steps to cover `duration`.
    pub fn advance(&mut self, duration: f64) -> Result<()> {
        let steps = (duration / self.config.physics_dt).round() as usize;
        for _ in 0..steps {
            self.step()?;
        }
        Ok(())
    }

    /// Mechanical energy of the sheet: kinetic and gravitational energy of the
    /// interior nodes plus all spring energy.
    pub fn fabric_energy(&self) -> f64 {
        let p = &self.fabric.positions;
        let v = &self.fabric.velocities;
        let g = self.config.gravity;
        let mut e = 0.0;
        for idx in 0..p.len() {
            if self.kinds[idx] == NodeKind::Interior {
                e += 0.5 * self.masses[idx] * v[idx].norm_squared()
                    + self.masses[idx] * g * p[idx].z;
            }
        }
        for s in &self.springs {
            let stretch = (p[s.b] - p[s.a]).norm() - s.rest;
            e += 0.5 * s.k * stretch * stretch;
        }
        e
    }

    /// Penetration depth of the object into the fabric; zero when separated
    /// or off the sheet.
    pub fn penetration(&self) -> f64 {
        let (Some(spec), Some(obj)) = (self.object_spec.as_ref(), self.object.as_ref()) else {
            return 0.0;
        };
        self.patch(obj.position.x, obj.position.y).map_or(0.0, |p| {
            (spec.shape.contact_offset() - (obj.position - p.point).dot(&p.normal)).max(0.0)
        })
    }

    /// Bound on penetration for a resting or rolling object: three times the
    /// static penalty depth under the object's weight, plus one millimeter.
    pub fn penetration_tolerance(&self) -> f64 {
        let weight = self
            .object_spec
            .as_ref()
            .map_or(0.0, |s| s.mass * self.config.gravity);
        3.0 * weight / self.config.contact_stiffness + 1e-3
    }

    /// True when the object state is outside the plausible band: below the
    /// floor, far above the frame, or sunk through the sheet.
    pub fn object_anomaly(&self) -> bool {
        let Some(obj) = self.object.as_ref() else {
            return false;
        };
        let z = obj.position.z;
        if !(0.0..=3.0 * self.geo.z0).contains(&z) {
            return true;
        }
        let offset = self
            .object_spec
            .as_ref()
            .map_or(0.0, |s| s.shape.contact_offset());
        self.penetration() > offset
    }
}
