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

//! Lift paths through crane configuration space: interpolation and checking.

pub mod planner;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::wrap_angle;
use crate::kinematics::{CraneState, Dof};
use crate::site::Site;

pub use planner::{plan_path, LatticeNode, LatticeSpec, PlanError, PlanResult, Planner};

/// Default checker resolution: no DOF moves any crane point more than this between samples.
pub const DEFAULT_RESOLUTION: f64 = 0.25;

/// Sample counts per leg are capped at this power of two.
const MAX_LEG_SAMPLES: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PathError {
    #[error("a lift path needs at least two waypoints, got {0}")]
    TooShort(usize),
    #[error("path document does not parse: {0}")]
    Parse(String),
}

/// Ordered waypoints; each leg is traversed joint-linearly, angles along the shorter arc.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct LiftPath {
    waypoints: Vec<CraneState>,
}

impl LiftPath {
    pub fn new(waypoints: Vec<CraneState>) -> Result<Self, PathError> {
        if waypoints.len() < 2 {
            return Err(PathError::TooShort(waypoints.len()));
        }
        Ok(LiftPath { waypoints })
    }

    pub fn waypoints(&self) -> &[CraneState] {
        &self.waypoints
    }

    pub fn legs(&self) -> usize {
        self.waypoints.len() - 1
    }

    pub fn reversed(&self) -> LiftPath {
        let mut w = self.waypoints.clone();
        w.reverse();
        LiftPath { waypoints: w }
    }

    /// Parses a JSON list of waypoint states; `<dof>_deg` keys are accepted.
    pub fn from_json(bytes: &[u8]) -> Result<Self, PathError> {
        let value: serde_json::Value =
            serde_json::from_slice(bytes).map_err(|e| PathError::Parse(e.to_string()))?;
        let items = match value {
            serde_json::Value::Array(items) => items,
            serde_json::Value::Object(mut o) => match o.remove("waypoints") {
                Some(serde_json::Value::Array(items)) => items,
                _ => return Err(PathError::Parse("expected a list of waypoints".into())),
            },
            _ => return Err(PathError::Parse("expected a list of waypoints".into())),
        };
        let waypoints = items
            .into_iter()
            .map(CraneState::from_json_value)
            .collect::<Result<Vec<_>, _>>()
            .map_err(PathError::Parse)?;
        LiftPath::new(waypoints)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.waypoints).expect("states serialize")
    }

    /// State at parameter `u ∈ [0, 1]` along `leg`.
    pub fn interpolate(&self, leg: usize, u: f64) -> CraneState {
        interpolate_states(&self.waypoints[leg], &self.waypoints[leg + 1], u)
    }
}

impl<'de> Deserialize<'de> for LiftPath {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let waypoints = Vec::<CraneState>::deserialize(d)?;
        LiftPath::new(waypoints).map_err(serde::de::Error::custom)
    }
}

/// Joint-linear blend of two states; heading and swing follow the shorter arc.
/// Returns `a` exactly at `u = 0` and `b` exactly at `u = 1`.
pub fn interpolate_states(a: &CraneState, b: &CraneState, u: f64) -> CraneState {
    if u <= 0.0 {
        return *a;
    }
    if u >= 1.0 {
        return *b;
    }
    let mut out = *a;
    for dof in Dof::ALL {
        let (x, y) = (a.get(dof), b.get(dof));
        let v = if dof.is_angular() {
            wrap_angle(x + u * wrap_angle(y - x))
        } else {
            (1.0 - u) * x + u * y
        };
        out.set(dof, v);
    }
    out
}

/// Largest per-DOF change between two states (angles by shorter arc), scaled by lever arms.
pub fn leg_motion(a: &CraneState, b: &CraneState, levers: &[f64; 6]) -> f64 {
    Dof::ALL
        .iter()
        .map(|&d| {
            let delta = if d.is_angular() {
                wrap_angle(b.get(d) - a.get(d))
            } else {
                b.get(d) - a.get(d)
            };
            delta.abs() * levers[d.index()]
        })
        .fold(0.0, f64::max)
}

/// Number of sample intervals for a leg: the smallest power of two that keeps
/// every step's motion at or below `resolution`. Halving the resolution therefore
/// only ever adds samples between existing ones.
pub fn leg_intervals(motion: f64, resolution: f64) -> usize {
    let ratio = motion / resolution;
    if !(ratio > 1.0) {
        return 1;
    }
    if !ratio.is_finite() || ratio >= MAX_LEG_SAMPLES as f64 {
        return MAX_LEG_SAMPLES;
    }
    (ratio.ceil() as usize).next_power_of_two()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ViolationKind {
    Limit,
    Collision,
    Capacity,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ViolationKind::Limit => "LIMIT",
            ViolationKind::Collision => "COLLISION",
            ViolationKind::Capacity => "CAPACITY",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub leg: usize,
    pub u: f64,
    pub kind: ViolationKind,
    pub detail: String,
}

/// Non-contact RED clearance seen while checking; informational only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClearanceWarning {
    pub leg: usize,
    pub u: f64,
    pub component: crate::clearance::Component,
    pub obstacle: String,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathCheckResult {
    pub valid: bool,
    pub resolution: f64,
    pub samples: usize,
    pub violations: Vec<Violation>,
    pub warnings: Vec<ClearanceWarning>,
}

impl PathCheckResult {
    pub fn first(&self, kind: ViolationKind) -> Option<&Violation> {
        self.violations.iter().find(|v| v.kind == kind)
    }
}

/// Sample parameters `k / n` for one leg at `resolution`.
pub fn leg_samples(site: &Site, a: &CraneState, b: &CraneState, resolution: f64) -> Vec<f64> {
    let n = leg_intervals(leg_motion(a, b, &site.lever_arms()), resolution);
    (0..=n).map(|k| k as f64 / n as f64).collect()
}

/// Samples every leg so no DOF moves any point more than `resolution` between
/// samples, and reports limit, contact and capacity violations in (leg, u) order.
pub fn check_path(site: &Site, path: &LiftPath, resolution: f64) -> PathCheckResult {
    let mut violations = Vec::new();
    let mut warnings = Vec::new();
    let mut samples = 0;
    for leg in 0..path.legs() {
        let (a, b) = (&path.waypoints[leg], &path.waypoints[leg + 1]);
        for u in leg_samples(site, a, b, resolution) {
            samples += 1;
            let state = interpolate_states(a, b, u);
            let eval = site.evaluate(&state);
            if !eval.limit_violations.is_empty() {
                let detail = eval
                    .limit_violations
                    .iter()
                    .map(|&d| format!("{d} = {:.6} outside limits", state.get(d)))
                    .collect::<Vec<_>>()
                    .join("; ");
                violations.push(Violation {
                    leg,
                    u,
                    kind: ViolationKind::Limit,
                    detail,
                });
            }
            let contacts: Vec<String> = eval
                .contacts()
                .map(|r| format!("{} touches {}", r.component, r.obstacle))
                .collect();
            if !contacts.is_empty() {
                violations.push(Violation {
                    leg,
                    u,
                    kind: ViolationKind::Collision,
                    detail: contacts.join("; "),
                });
            }
            if eval.overloaded() {
                let detail = if eval.capacity.in_chart() {
                    format!(
                        "usage {:.1}% ({:.2} t gross on {:.2} t rated at radius {:.3} m)",
                        eval.capacity.usage, eval.capacity.gross_load, eval.capacity.rated, eval.poses.radius
                    )
                } else {
                    format!("radius {:.3} m is outside the load chart", eval.poses.radius)
                };
                violations.push(Violation {
                    leg,
                    u,
                    kind: ViolationKind::Capacity,
                    detail,
                });
            }
            warnings.extend(eval.red_warnings().map(|r| ClearanceWarning {
                leg,
                u,
                component: r.component,
                obstacle: r.obstacle.clone(),
                distance: r.distance,
            }));
        }
    }
    PathCheckResult {
        valid: violations.is_empty(),
        resolution,
        samples,
        violations,
        warnings,
    }
}
