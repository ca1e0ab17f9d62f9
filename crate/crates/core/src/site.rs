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

//! A scene bundled with its crane, load chart and prebuilt obstacle trees:
//! everything needed to evaluate one crane state.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::capacity::{capacity_or_overload, CapacityResult, LoadChart};
use crate::clearance::{ClearanceCode, ClearanceEngine, ClearanceRecord, Component, CraneGeometry};
use crate::kinematics::{forward_kinematics_mounted, ComponentPoses, CraneSpec, CraneState, Dof};
use crate::scene::index::IndexError;
use crate::scene::{validate_scene, Issue, Scene};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SiteError {
    #[error("scene is invalid: {}", issues.iter().map(|i| i.message.as_str()).collect::<Vec<_>>().join("; "))]
    InvalidScene { issues: Vec<Issue> },
    #[error(transparent)]
    Index(#[from] IndexError),
}

#[derive(Debug, Clone)]
pub struct Site {
    pub scene: Scene,
    pub spec: CraneSpec,
    pub chart: LoadChart,
    engine: ClearanceEngine,
    levers: [f64; 6],
}

/// Everything observed at one sampled state.
#[derive(Debug, Clone)]
pub struct StateEvaluation {
    pub poses: ComponentPoses,
    pub capacity: CapacityResult,
    pub limit_violations: Vec<Dof>,
    /// All clearance records, ascending by distance.
    pub clearances: Vec<ClearanceRecord>,
}

impl StateEvaluation {
    pub fn contacts(&self) -> impl Iterator<Item = &ClearanceRecord> {
        self.clearances.iter().filter(|r| r.distance == 0.0)
    }

    pub fn overloaded(&self) -> bool {
        !(self.capacity.usage <= 100.0)
    }

    /// No limit, contact or capacity problem.
    pub fn is_feasible(&self) -> bool {
        self.limit_violations.is_empty() && self.contacts().next().is_none() && !self.overloaded()
    }

    pub fn min_clearance(&self) -> Option<&ClearanceRecord> {
        self.clearances.first()
    }

    pub fn red_warnings(&self) -> impl Iterator<Item = &ClearanceRecord> {
        self.clearances
            .iter()
            .filter(|r| r.distance > 0.0 && r.code == ClearanceCode::Red)
    }
}

/// Content digests of the three inputs, as lowercase hex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputHashes {
    pub scene: String,
    pub spec: String,
    pub chart: String,
}

impl Site {
    /// Validates the scene against the crane and builds obstacle trees.
    pub fn new(scene: Scene, spec: CraneSpec, chart: LoadChart) -> Result<Site, SiteError> {
        let issues = validate_scene(&scene, &spec);
        if !issues.is_empty() {
            return Err(SiteError::InvalidScene { issues });
        }
        let engine = ClearanceEngine::new(&scene)?;
        let levers = lever_arms(&scene, &spec);
        Ok(Site {
            scene,
            spec,
            chart,
            engine,
            levers,
        })
    }

    pub fn engine(&self) -> &ClearanceEngine {
        &self.engine
    }

    pub fn hashes(&self) -> InputHashes {
        InputHashes {
            scene: crate::digest::content_hash(&self.scene),
            spec: crate::digest::content_hash(&self.spec),
            chart: crate::digest::content_hash(&self.chart),
        }
    }

    /// Upper bound on how far any crane or load point moves per unit change of
    /// each DOF (m/m or m/rad), indexed by [`Dof::index`].
    pub fn lever_arms(&self) -> [f64; 6] {
        self.levers
    }

    pub fn poses(&self, state: &CraneState) -> ComponentPoses {
        forward_kinematics_mounted(&self.spec, state, &self.scene.mount())
            .expect("states reaching the site are finite")
    }

    pub fn geometry(&self, poses: &ComponentPoses) -> CraneGeometry {
        CraneGeometry::posed(&self.spec, &self.scene.module.mesh, poses)
    }

    pub fn capacity(&self, state: &CraneState) -> CapacityResult {
        capacity_or_overload(&self.chart, &self.spec, state, &self.scene.module)
    }

    /// Full evaluation: limits, capacity and the complete clearance report.
    pub fn evaluate(&self, state: &CraneState) -> StateEvaluation {
        self.evaluate_with(state, None)
    }

    /// Like [`evaluate`](Self::evaluate) but keeps only the `k` nearest
    /// clearance records, which is much cheaper on large sites.
    pub fn evaluate_nearest(&self, state: &CraneState, k: usize) -> StateEvaluation {
        self.evaluate_with(state, Some(k))
    }

    fn evaluate_with(&self, state: &CraneState, nearest: Option<usize>) -> StateEvaluation {
        let limit_violations = self.spec.limit_violations(state);
        if !state.is_finite() {
            let poses = self.poses(&CraneState::default());
            return StateEvaluation {
                poses,
                capacity: CapacityResult::out_of_chart(crate::capacity::gross_load(&self.scene.module, &self.spec)),
                limit_violations,
                clearances: Vec::new(),
            };
        }
        let poses = self.poses(state);
        let geometry = self.geometry(&poses);
        let clearances = match nearest {
            Some(k) => self.engine.nearest(&geometry, k),
            None => self.engine.report(&geometry),
        };
        StateEvaluation {
            poses,
            capacity: self.capacity(state),
            limit_violations,
            clearances,
        }
    }

    /// Same verdict as `evaluate(state).is_feasible()` without computing
    /// exact clearances.
    pub fn is_feasible(&self, state: &CraneState) -> bool {
        if !self.spec.within_limits(state) {
            return false;
        }
        if !(self.capacity(state).usage <= 100.0) {
            return false;
        }
        let poses = self.poses(state);
        !self.engine.any_contact(&self.geometry(&poses))
    }

    /// Components in contact at `state`.
    pub fn contacts(&self, state: &CraneState) -> Vec<(Component, String)> {
        let poses = self.poses(state);
        self.engine.contacts(&self.geometry(&poses))
    }
}

fn lever_arms(scene: &Scene, spec: &CraneSpec) -> [f64; 6] {
    let horizontal = |m: &crate::scene::TriMesh| {
        m.vertices
            .iter()
            .map(|v| v.horizontal_norm())
            .fold(0.0, f64::max)
    };
    let module_reach = horizontal(&scene.module.mesh);
    let slew_reach = (spec.boom_pivot_forward.abs() + spec.boom_length + spec.boom_radius + module_reach)
        .max(spec.tailswing_radius)
        .max(horizontal(&spec.carrier_mesh))
        .max(horizontal(&spec.superstructure_mesh));
    let mut levers = [1.0; 6];
    levers[Dof::Heading.index()] = slew_reach;
    levers[Dof::Swing.index()] = slew_reach;
    // luffing swings the tip through L·Δβ; the module yaws with facing, not luff
    levers[Dof::Luff.index()] = spec.boom_length + spec.boom_radius;
    levers
}
