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

//! Lift-planning simulation engine for mobile crawler cranes.
//!
//! Loads a site scene, a crane configuration and its load chart, then answers
//! per-state questions (poses, capacity usage, clearances), checks and plans
//! lift paths, and runs deterministic interactive sessions.

pub mod capacity;
pub mod clearance;
pub mod digest;
pub mod distance;
pub mod document;
pub mod geometry;
pub mod kinematics;
pub mod path;
pub mod scene;
pub mod sim;
pub mod site;

pub use capacity::{capacity_usage, CapacityResult, ChartError, LoadChart};
pub use clearance::{ClearanceCode, ClearanceEngine, ClearanceRecord, ClearanceThresholds, Component};
pub use document::{DirSource, MemorySource, MeshSource, NoFiles};
pub use geometry::{wrap_angle, Aabb, Pose, Vec3};
pub use kinematics::{
    clamp_state, forward_kinematics, forward_kinematics_mounted, solve_hook_ik, CarrierPlacement, ComponentPoses,
    CraneSpec, CraneState, Dof, KinematicsError, Mount,
};
pub use path::{
    check_path, interpolate_states, plan_path, LatticeSpec, LiftPath, PathCheckResult, PlanError, PlanResult,
    Violation, ViolationKind,
};
pub use scene::{load_scene, load_scene_file, validate_scene, Issue, IssueCode, Scene, SceneError, TriMesh};
pub use sim::{
    replay, ControlInput, ReplayError, RiskFlag, RiskFlags, Session, SessionError, SessionRecord, TelemetryFrame,
};
pub use site::{InputHashes, Site, SiteError, StateEvaluation};
