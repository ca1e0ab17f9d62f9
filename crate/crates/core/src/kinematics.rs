/*
Copyright 2026 The liftsim Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

//! Six-DOF crawler crane model: spec, state, forward/inverse kinematics and limits.
//!
//! The crane is a single fixed-length boom on a slewing superstructure that sits
//! on a travelling carrier. The load hangs plumb from the boom tip.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::document::{degrees_to_radians, MeshDoc, MeshLoadError, MeshSource};
use crate::geometry::{wrap_angle, Pose, Vec3};
use crate::scene::mesh::TriMesh;

/// One of the six crane degrees of freedom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dof {
    Tx,
    Ty,
    Heading,
    Swing,
    Luff,
    Hoist,
}

impl Dof {
    pub const ALL: [Dof; 6] = [Dof::Tx, Dof::Ty, Dof::Heading, Dof::Swing, Dof::Luff, Dof::Hoist];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Dof::Tx => "tx",
            Dof::Ty => "ty",
            Dof::Heading => "heading",
            Dof::Swing => "swing",
            Dof::Luff => "luff",
            Dof::Hoist => "hoist",
        }
    }

    /// Heading and swing are unbounded angles, wrapped into `(-π, π]`.
    pub fn is_angular(self) -> bool {
        matches!(self, Dof::Heading | Dof::Swing)
    }
}

impl fmt::Display for Dof {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Values of the six DOFs.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CraneState {
    /// Carrier travel along world X, relative to the crane position (m).
    pub tx: f64,
    /// Carrier travel along world Y (m).
    pub ty: f64,
    /// Carrier heading (rad).
    pub heading: f64,
    /// Superstructure swing relative to the carrier (rad).
    pub swing: f64,
    /// Boom angle above horizontal (rad).
    pub luff: f64,
    /// Hoist line length from boom tip to hook (m).
    pub hoist: f64,
}

impl CraneState {
    pub fn new(tx: f64, ty: f64, heading: f64, swing: f64, luff: f64, hoist: f64) -> Self {
        CraneState {
            tx,
            ty,
            heading,
            swing,
            luff,
            hoist,
        }
    }

    pub fn get(&self, dof: Dof) -> f64 {
        match dof {
            Dof::Tx => self.tx,
            Dof::Ty => self.ty,
            Dof::Heading => self.heading,
            Dof::Swing => self.swing,
            Dof::Luff => self.luff,
            Dof::Hoist => self.hoist,
        }
    }

    pub fn set(&mut self, dof: Dof, value: f64) {
        match dof {
            Dof::Tx => self.tx = value,
            Dof::Ty => self.ty = value,
            Dof::Heading => self.heading = value,
            Dof::Swing => self.swing = value,
            Dof::Luff => self.luff = value,
            Dof::Hoist => self.hoist = value,
        }
    }

    pub fn with(mut self, dof: Dof, value: f64) -> Self {
        self.set(dof, value);
        self
    }

    pub fn is_finite(&self) -> bool {
        Dof::ALL.iter().all(|&d| self.get(d).is_finite())
    }

    /// Carrier heading plus swing: the direction the boom points.
    pub fn facing(&self) -> f64 {
        self.heading + self.swing
    }

    /// Parses a state document; `<dof>_deg` keys are accepted for angles.
    pub fn from_json_value(mut v: serde_json::Value) -> Result<Self, String> {
        degrees_to_radians(&mut v)?;
        serde_json::from_value(v).map_err(|e| e.to_string())
    }
}

/// Closed interval, serialized as `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    pub min: f64,
    pub max: f64,
}

impl From<[f64; 2]> for Interval {
    fn from(v: [f64; 2]) -> Self {
        Interval { min: v[0], max: v[1] }
    }
}

impl From<Interval> for [f64; 2] {
    fn from(i: Interval) -> Self {
        [i.min, i.max]
    }
}

impl Interval {
    pub fn new(min: f64, max: f64) -> Self {
        Interval { min, max }
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.min && v <= self.max
    }

    pub fn clamp(&self, v: f64) -> f64 {
        v.max(self.min).min(self.max)
    }
}

/// Joint limits. Heading and swing are unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Limits {
    pub tx: Interval,
    pub ty: Interval,
    pub luff: Interval,
    pub hoist: Interval,
}

impl Limits {
    pub fn interval(&self, dof: Dof) -> Option<Interval> {
        match dof {
            Dof::Tx => Some(self.tx),
            Dof::Ty => Some(self.ty),
            Dof::Luff => Some(self.luff),
            Dof::Hoist => Some(self.hoist),
            Dof::Heading | Dof::Swing => None,
        }
    }
}

/// Maximum speed per DOF (m/s or rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub tx: f64,
    pub ty: f64,
    pub heading: f64,
    pub swing: f64,
    pub luff: f64,
    pub hoist: f64,
}

impl Rates {
    pub fn get(&self, dof: Dof) -> f64 {
        match dof {
            Dof::Tx => self.tx,
            Dof::Ty => self.ty,
            Dof::Heading => self.heading,
            Dof::Swing => self.swing,
            Dof::Luff => self.luff,
            Dof::Hoist => self.hoist,
        }
    }
}

/// Geometry and limits of one crane configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CraneSpec {
    #[serde(default)]
    pub name: String,
    pub boom_length: f64,
    /// Horizontal offset of the boom foot from the slew axis, along the facing direction.
    pub boom_pivot_forward: f64,
    /// Height of the boom foot pin above ground.
    pub boom_pivot_height: f64,
    /// Radius of the capsule used for boom clearance.
    pub boom_radius: f64,
    pub tailswing_radius: f64,
    pub hook_block_weight: f64,
    /// Carrier collision mesh, in the carrier frame (origin on the slew axis at ground).
    pub carrier_mesh: TriMesh,
    /// Superstructure collision mesh (cab, counterweight), rotating with the facing.
    pub superstructure_mesh: TriMesh,
    pub limits: Limits,
    pub rates: Rates,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CraneSpecError {
    #[error("crane document does not parse: {0}")]
    Parse(String),
    #[error("mesh file {0:?} not found")]
    MissingMesh(String),
    #[error("invalid crane spec: {0}")]
    Invalid(String),
}

#[derive(Deserialize)]
struct CraneSpecDoc {
    #[serde(default)]
    name: String,
    boom_length: f64,
    boom_pivot_forward: f64,
    boom_pivot_height: f64,
    boom_radius: f64,
    tailswing_radius: f64,
    hook_block_weight: f64,
    carrier_mesh: MeshDoc,
    superstructure_mesh: MeshDoc,
    limits: Limits,
    rates: Rates,
}

impl CraneSpec {
    /// Loads a crane document. Keys suffixed `_deg` are read as degrees.
    pub fn from_json(bytes: &[u8], files: &dyn MeshSource) -> Result<Self, CraneSpecError> {
        let mut value: serde_json::Value =
            serde_json::from_slice(bytes).map_err(|e| CraneSpecError::Parse(e.to_string()))?;
        degrees_to_radians(&mut value).map_err(CraneSpecError::Parse)?;
        let doc: CraneSpecDoc =
            serde_json::from_value(value).map_err(|e| CraneSpecError::Parse(e.to_string()))?;
        let mesh = |m: MeshDoc| {
            m.resolve(files).map_err(|e| match e {
                MeshLoadError::Missing(p) => CraneSpecError::MissingMesh(p),
                MeshLoadError::Invalid { path, reason } => {
                    CraneSpecError::Parse(format!("{path}: {reason}"))
                }
            })
        };
        let spec = CraneSpec {
            name: doc.name,
            boom_length: doc.boom_length,
            boom_pivot_forward: doc.boom_pivot_forward,
            boom_pivot_height: doc.boom_pivot_height,
            boom_radius: doc.boom_radius,
            tailswing_radius: doc.tailswing_radius,
            hook_block_weight: doc.hook_block_weight,
            carrier_mesh: mesh(doc.carrier_mesh)?,
            superstructure_mesh: mesh(doc.superstructure_mesh)?,
            limits: doc.limits,
            rates: doc.rates,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), CraneSpecError> {
        let bad = |m: String| Err(CraneSpecError::Invalid(m));
        let scalars = [
            self.boom_length,
            self.boom_pivot_forward,
            self.boom_pivot_height,
            self.boom_radius,
            self.tailswing_radius,
            self.hook_block_weight,
        ];
        if scalars.iter().any(|v| !v.is_finite()) {
            return bad("non-finite dimension".into());
        }
        if self.boom_length <= 0.0 {
            return bad(format!("boom_length must be > 0, got {}", self.boom_length));
        }
        if self.boom_radius < 0.0 || self.hook_block_weight < 0.0 || self.tailswing_radius < 0.0 {
            return bad("boom_radius, tailswing_radius and hook_block_weight must be >= 0".into());
        }
        for dof in Dof::ALL {
            if let Some(i) = self.limits.interval(dof) {
                if !(i.min.is_finite() && i.max.is_finite() && i.min <= i.max) {
                    return bad(format!("{dof} limits must be finite with min <= max"));
                }
            }
            let r = self.rates.get(dof);
            if !(r > 0.0 && r.is_finite()) {
                return bad(format!("{dof} rate must be > 0"));
            }
        }
        if self.limits.luff.min < 0.0 || self.limits.luff.max > std::f64::consts::FRAC_PI_2 {
            return bad("luff limits must lie within [0°, 90°]".into());
        }
        if self.limits.hoist.min < 0.0 {
            return bad("hoist minimum must be >= 0".into());
        }
        Ok(())
    }

    /// Smallest and largest operating radius the luff limits allow.
    pub fn reach(&self) -> Interval {
        Interval::new(
            self.boom_pivot_forward + self.boom_length * self.limits.luff.max.cos(),
            self.boom_pivot_forward + self.boom_length * self.limits.luff.min.cos(),
        )
    }

    /// DOFs of `state` outside their limit interval (non-finite values count as outside).
    pub fn limit_violations(&self, state: &CraneState) -> Vec<Dof> {
        Dof::ALL
            .into_iter()
            .filter(|&d| {
                let v = state.get(d);
                !v.is_finite() || self.limits.interval(d).is_some_and(|i| !i.contains(v))
            })
            .collect()
    }

    pub fn within_limits(&self, state: &CraneState) -> bool {
        self.limit_violations(state).is_empty()
    }
}

/// Where the crane stands and how the module hangs below the hook.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Mount {
    /// Carrier reference point on the ground; travel is measured from here.
    pub base: Vec3,
    pub rigging_length: f64,
    pub module_yaw_offset: f64,
}

/// World poses of every crane component for one state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentPoses {
    pub carrier: Pose,
    pub superstructure: Pose,
    pub boom_foot: Vec3,
    pub boom_tip: Vec3,
    pub hook: Vec3,
    /// Pose of the module frame; its origin is the rigging attach point.
    pub module: Pose,
    /// Horizontal distance from slew axis to hook.
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KinematicsError {
    #[error("crane state has a non-finite DOF")]
    NonFiniteState,
    #[error("no crane state reaches the target: {0}")]
    NoSolution(String),
}

/// `a + L·cos β`.
pub fn operating_radius(spec: &CraneSpec, state: &CraneState) -> f64 {
    spec.boom_pivot_forward + spec.boom_length * state.luff.cos()
}

/// Forward kinematics with the crane base at the origin and no rigging.
pub fn forward_kinematics(spec: &CraneSpec, state: &CraneState) -> Result<ComponentPoses, KinematicsError> {
    forward_kinematics_mounted(spec, state, &Mount::default())
}

pub fn forward_kinematics_mounted(
    spec: &CraneSpec,
    state: &CraneState,
    mount: &Mount,
) -> Result<ComponentPoses, KinematicsError> {
    if !state.is_finite() {
        return Err(KinematicsError::NonFiniteState);
    }
    let facing = state.facing();
    let (sf, cf) = facing.sin_cos();
    let (sb, cb) = state.luff.sin_cos();
    let slew = Vec3::new(mount.base.x + state.tx, mount.base.y + state.ty, mount.base.z);
    let a = spec.boom_pivot_forward;
    let l = spec.boom_length;
    let boom_foot = Vec3::new(slew.x + a * cf, slew.y + a * sf, slew.z + spec.boom_pivot_height);
    let boom_tip = Vec3::new(
        boom_foot.x + l * cb * cf,
        boom_foot.y + l * cb * sf,
        boom_foot.z + l * sb,
    );
    let hook = Vec3::new(boom_tip.x, boom_tip.y, boom_tip.z - state.hoist);
    let attach = Vec3::new(hook.x, hook.y, hook.z - mount.rigging_length);
    Ok(ComponentPoses {
        carrier: Pose::new(slew, state.heading),
        superstructure: Pose::new(slew, facing),
        boom_foot,
        boom_tip,
        hook,
        module: Pose::new(attach, facing + mount.module_yaw_offset),
        radius: operating_radius(spec, state),
    })
}

/// Each DOF clamped into its interval; heading and swing wrapped into `(-π, π]`.
pub fn clamp_state(spec: &CraneSpec, state: &CraneState) -> CraneState {
    clamp_state_reporting(spec, state).0
}

/// Like [`clamp_state`], also returning the DOFs that hit a limit.
pub fn clamp_state_reporting(spec: &CraneSpec, state: &CraneState) -> (CraneState, Vec<Dof>) {
    let mut out = *state;
    let mut clamped = Vec::new();
    for dof in Dof::ALL {
        let v = state.get(dof);
        match spec.limits.interval(dof) {
            Some(i) => {
                let c = i.clamp(v);
                if c != v {
                    clamped.push(dof);
                }
                out.set(dof, c);
            }
            None => out.set(dof, wrap_angle(v)),
        }
    }
    (out, clamped)
}

/// Carrier placement held fixed while solving for the upper DOFs.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CarrierPlacement {
    pub tx: f64,
    pub ty: f64,
    pub heading: f64,
}

/// Finds swing, luff and hoist that put the hook on `target`.
pub fn solve_hook_ik(
    spec: &CraneSpec,
    carrier: CarrierPlacement,
    target: Vec3,
    mount: &Mount,
) -> Result<CraneState, KinematicsError> {
    if !target.is_finite() {
        return Err(KinematicsError::NoSolution("target is not finite".into()));
    }
    if !spec.limits.tx.contains(carrier.tx) || !spec.limits.ty.contains(carrier.ty) {
        return Err(KinematicsError::NoSolution("carrier outside travel limits".into()));
    }
    let dx = target.x - (mount.base.x + carrier.tx);
    let dy = target.y - (mount.base.y + carrier.ty);
    let radius = dx.hypot(dy);
    let reach = spec.reach();
    const EPS: f64 = 1e-12;
    if radius < reach.min - EPS || radius > reach.max + EPS {
        return Err(KinematicsError::NoSolution(format!(
            "radius {radius:.3} m outside reach [{:.3}, {:.3}] m",
            reach.min, reach.max
        )));
    }
    let facing = dy.atan2(dx);
    let cos_luff = ((radius - spec.boom_pivot_forward) / spec.boom_length).clamp(-1.0, 1.0);
    let luff = spec.limits.luff.clamp(cos_luff.acos());
    let tip_z = mount.base.z + spec.boom_pivot_height + spec.boom_length * luff.sin();
    let hoist = tip_z - target.z;
    if !spec.limits.hoist.contains(hoist) {
        return Err(KinematicsError::NoSolution(format!(
            "hoist {hoist:.3} m outside [{:.3}, {:.3}] m",
            spec.limits.hoist.min, spec.limits.hoist.max
        )));
    }
    Ok(CraneState {
        tx: carrier.tx,
        ty: carrier.ty,
        heading: carrier.heading,
        swing: wrap_angle(facing - carrier.heading),
        luff,
        hoist,
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use std::f64::consts::PI;

    pub(crate) fn example_spec() -> CraneSpec {
        CraneSpec {
            name: "example".into(),
            boom_length: 30.0,
            boom_pivot_forward: 2.0,
            boom_pivot_height: 1.5,
            boom_radius: 0.5,
            tailswing_radius: 6.0,
            hook_block_weight: 2.0,
            carrier_mesh: TriMesh::cuboid(Vec3::new(-4.0, -2.0, 0.0), Vec3::new(4.0, 2.0, 1.0)),
            superstructure_mesh: TriMesh::cuboid(Vec3::new(-6.0, -1.5, 1.0), Vec3::new(1.0, 1.5, 3.0)),
            limits: Limits {
                tx: Interval::new(-10.0, 10.0),
                ty: Interval::new(-10.0, 10.0),
                luff: Interval::new(10f64.to_radians(), 88f64.to_radians()),
                hoist: Interval::new(1.0, 40.0),
            },
            rates: Rates {
                tx: 0.5,
                ty: 0.5,
                heading: 0.05,
                swing: 0.1,
                luff: 0.05,
                hoist: 0.3,
            },
        }
    }

    fn close(a: Vec3, b: Vec3, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn fk_reference_pose() {
        let spec = example_spec();
        let s = CraneState::new(0.0, 0.0, 0.0, 0.0, 60f64.to_radians(), 10.0);
        let p = forward_kinematics(&spec, &s).unwrap();
        let tip_z = 1.5 + 15.0 * 3f64.sqrt();
        assert!(close(p.boom_tip, Vec3::new(17.0, 0.0, tip_z), 1e-9));
        assert!(close(p.hook, Vec3::new(17.0, 0.0, tip_z - 10.0), 1e-9));
        assert!((p.radius - 17.0).abs() < 1e-9);
        assert!((tip_z - 27.481).abs() < 1e-3);
    }

    #[test]
    fn fk_quarter_turn_and_vertical_boom() {
        let spec = example_spec();
        let s = CraneState::new(0.0, 0.0, 0.0, PI / 2.0, 60f64.to_radians(), 10.0);
        let p = forward_kinematics(&spec, &s).unwrap();
        assert!(close(p.boom_tip, Vec3::new(0.0, 17.0, 1.5 + 15.0 * 3f64.sqrt()), 1e-9));
        let v = CraneState::new(0.0, 0.0, 0.0, 0.0, PI / 2.0, 10.0);
        assert!((operating_radius(&spec, &v) - 2.0).abs() < 1e-9);
        let flat = v.with(Dof::Luff, 0.0);
        assert_eq!(operating_radius(&spec, &flat), 32.0);
    }

    #[test]
    fn fk_rejects_non_finite() {
        let s = CraneState::new(f64::NAN, 0.0, 0.0, 0.0, 0.5, 1.0);
        assert_eq!(forward_kinematics(&example_spec(), &s), Err(KinematicsError::NonFiniteState));
    }

    #[test]
    fn clamp_examples() {
        let spec = example_spec();
        let s = CraneState::new(0.0, 0.0, 0.0, 0.0, 95f64.to_radians(), 10.0);
        let (c, hit) = clamp_state_reporting(&spec, &s);
        assert_eq!(c.luff, 88f64.to_radians());
        assert_eq!(hit, vec![Dof::Luff]);
        let ok = CraneState::new(1.0, -2.0, 0.4, -3.0, 0.7, 12.0);
        assert_eq!(clamp_state(&spec, &ok), ok);
        let w = clamp_state(&spec, &ok.with(Dof::Swing, 1.5 * PI));
        assert!((w.swing + PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn ik_inverts_reference_pose() {
        let spec = example_spec();
        let target = Vec3::new(17.0, 0.0, 1.5 + 15.0 * 3f64.sqrt() - 10.0);
        let s = solve_hook_ik(&spec, CarrierPlacement::default(), target, &Mount::default()).unwrap();
        assert!(s.swing.abs() < 1e-12);
        assert!((s.luff - 60f64.to_radians()).abs() < 1e-9);
        assert!((s.hoist - 10.0).abs() < 1e-9);
    }

    #[test]
    fn ik_out_of_reach() {
        let spec = example_spec();
        let r = solve_hook_ik(&spec, CarrierPlacement::default(), Vec3::new(40.0, 0.0, 5.0), &Mount::default());
        assert!(matches!(r, Err(KinematicsError::NoSolution(_))));
        let too_low = solve_hook_ik(&spec, CarrierPlacement::default(), Vec3::new(17.0, 0.0, -30.0), &Mount::default());
        assert!(matches!(too_low, Err(KinematicsError::NoSolution(_))));
    }

    #[test]
    fn mounted_module_hangs_below_hook() {
        let spec = example_spec();
        let mount = Mount {
            base: Vec3::new(5.0, -3.0, 0.0),
            rigging_length: 4.0,
            module_yaw_offset: 0.25,
        };
        let s = CraneState::new(1.0, 1.0, 0.3, 0.2, 0.9, 8.0);
        let p = forward_kinematics_mounted(&spec, &s, &mount).unwrap();
        assert_eq!(p.module.translation, p.hook - Vec3::new(0.0, 0.0, 4.0));
        assert_eq!(p.module.yaw, 0.5 + 0.25);
        assert_eq!(p.carrier.translation, Vec3::new(6.0, -2.0, 0.0));
    }
}
