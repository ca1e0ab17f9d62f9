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

//! Site description: obstacles, lifted module, crane placement, pick/set states.

pub mod generate;
pub mod index;
pub mod mesh;
pub mod obj;

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clearance::ClearanceThresholds;
use crate::document::{degrees_to_radians, DirSource, MeshDoc, MeshLoadError, MeshSource};
use crate::geometry::{Pose, Vec3};
use crate::kinematics::{CraneSpec, CraneState, Dof, Mount};

pub use index::{build_index, SpatialIndex};
pub use mesh::{MeshError, TriMesh};

/// The only accepted value of the document's `units` field.
pub const UNITS: &str = "m,t,rad";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    pub id: String,
    #[serde(default)]
    pub tag: String,
    #[serde(default)]
    pub pose: Pose,
    pub mesh: TriMesh,
}

/// The prefabricated module being lifted. Mesh origin is the rigging attach point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftedModule {
    pub id: String,
    pub mesh: TriMesh,
    /// Tonnes.
    pub weight: f64,
    #[serde(default)]
    pub rigging_weight: f64,
    /// Meters from hook to attach point.
    #[serde(default)]
    pub rigging_length: f64,
    /// Yaw of the module relative to the boom facing, held constant by taglines.
    #[serde(default)]
    pub yaw_offset: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub ground_z: f64,
    pub crane_position: Vec3,
    pub obstacles: Vec<Obstacle>,
    pub module: LiftedModule,
    pub pick_state: CraneState,
    pub set_state: CraneState,
    pub clearance: ClearanceThresholds,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SceneError {
    #[error("scene document does not parse: {0}")]
    Parse(String),
    #[error("mesh file {0:?} cannot be resolved")]
    MissingMesh(String),
    #[error("scene units must be \"{UNITS}\", found {0}")]
    Units(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneDoc {
    #[allow(dead_code)]
    units: String,
    ground_z: f64,
    crane_position: Vec3,
    #[serde(default)]
    obstacles: Vec<ObstacleDoc>,
    module: ModuleDoc,
    pick_state: CraneState,
    set_state: CraneState,
    #[serde(default)]
    clearance: ClearanceThresholds,
}

#[derive(Deserialize)]
struct ObstacleDoc {
    id: String,
    #[serde(default)]
    tag: String,
    #[serde(default)]
    pose: Pose,
    mesh: MeshDoc,
}

#[derive(Deserialize)]
struct ModuleDoc {
    id: String,
    mesh: MeshDoc,
    weight: f64,
    #[serde(default)]
    rigging_weight: f64,
    #[serde(default)]
    rigging_length: f64,
    #[serde(default)]
    yaw_offset: f64,
}

#[derive(Serialize)]
struct SceneOut<'a> {
    units: &'static str,
    ground_z: f64,
    crane_position: Vec3,
    obstacles: &'a [Obstacle],
    module: &'a LiftedModule,
    pick_state: CraneState,
    set_state: CraneState,
    clearance: ClearanceThresholds,
}

impl Serialize for Scene {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        SceneOut {
            units: UNITS,
            ground_z: self.ground_z,
            crane_position: self.crane_position,
            obstacles: &self.obstacles,
            module: &self.module,
            pick_state: self.pick_state,
            set_state: self.set_state,
            clearance: self.clearance,
        }
        .serialize(s)
    }
}

fn mesh_err(e: MeshLoadError) -> SceneError {
    match e {
        MeshLoadError::Missing(p) => SceneError::MissingMesh(p),
        MeshLoadError::Invalid { path, reason } => SceneError::Parse(format!("{path}: {reason}")),
    }
}

/// Parses a scene document, resolving OBJ mesh references through `files`.
pub fn load_scene(document: &[u8], files: &dyn MeshSource) -> Result<Scene, SceneError> {
    let mut value: serde_json::Value =
        serde_json::from_slice(document).map_err(|e| SceneError::Parse(e.to_string()))?;
    match value.get("units") {
        Some(serde_json::Value::String(u)) if u == UNITS => {}
        Some(other) => return Err(SceneError::Units(other.to_string())),
        None => return Err(SceneError::Units("no `units` field".into())),
    }
    degrees_to_radians(&mut value).map_err(SceneError::Parse)?;
    let doc: SceneDoc = serde_json::from_value(value).map_err(|e| SceneError::Parse(e.to_string()))?;

    let mut seen = HashSet::new();
    let mut obstacles = Vec::with_capacity(doc.obstacles.len());
    for o in doc.obstacles {
        if !seen.insert(o.id.clone()) {
            return Err(SceneError::Parse(format!("duplicate obstacle id {:?}", o.id)));
        }
        obstacles.push(Obstacle {
            id: o.id,
            tag: o.tag,
            pose: o.pose,
            mesh: o.mesh.resolve(files).map_err(mesh_err)?,
        });
    }
    let m = doc.module;
    Ok(Scene {
        ground_z: doc.ground_z,
        crane_position: doc.crane_position,
        obstacles,
        module: LiftedModule {
            id: m.id,
            mesh: m.mesh.resolve(files).map_err(mesh_err)?,
            weight: m.weight,
            rigging_weight: m.rigging_weight,
            rigging_length: m.rigging_length,
            yaw_offset: m.yaw_offset,
        },
        pick_state: doc.pick_state,
        set_state: doc.set_state,
        clearance: doc.clearance,
    })
}

/// Reads a scene file; mesh references resolve relative to its directory.
pub fn load_scene_file(path: &Path) -> Result<Scene, SceneError> {
    let bytes = std::fs::read(path).map_err(|e| SceneError::Parse(format!("{}: {e}", path.display())))?;
    load_scene(&bytes, &DirSource::beside(path))
}

impl Scene {
    /// Canonical JSON form with all meshes inline.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("scene serializes")
    }

    pub fn mount(&self) -> Mount {
        Mount {
            base: self.crane_position,
            rigging_length: self.module.rigging_length,
            module_yaw_offset: self.module.yaw_offset,
        }
    }

    pub fn obstacle(&self, id: &str) -> Option<&Obstacle> {
        self.obstacles.iter().find(|o| o.id == id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "detail")]
pub enum IssueCode {
    LimitViolation(Dof),
    NonPositiveWeight,
    NegativeRigging,
    CraneOffGround,
    NonFinite,
    DuplicateObstacleId,
    InvalidMesh,
    InvalidThresholds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Issue {
    pub code: IssueCode,
    pub message: String,
}

/// Every broken invariant of `scene` when paired with `spec`; empty when valid.
pub fn validate_scene(scene: &Scene, spec: &CraneSpec) -> Vec<Issue> {
    let mut issues = Vec::new();
    let mut push = |code: IssueCode, message: String| issues.push(Issue { code, message });

    if !scene.ground_z.is_finite() || !scene.crane_position.is_finite() {
        push(IssueCode::NonFinite, "ground or crane position is not finite".into());
    } else if scene.crane_position.z != scene.ground_z {
        push(
            IssueCode::CraneOffGround,
            format!(
                "crane position z = {} but ground_z = {}",
                scene.crane_position.z, scene.ground_z
            ),
        );
    }

    let mut seen = HashSet::new();
    for o in &scene.obstacles {
        if !seen.insert(o.id.as_str()) {
            push(IssueCode::DuplicateObstacleId, format!("obstacle id {:?} repeated", o.id));
        }
        if let Err(e) = o.mesh.validate() {
            push(IssueCode::InvalidMesh, format!("obstacle {:?}: {e}", o.id));
        }
        if !o.pose.is_finite() {
            push(IssueCode::NonFinite, format!("obstacle {:?} pose is not finite", o.id));
        }
    }

    let m = &scene.module;
    if let Err(e) = m.mesh.validate() {
        push(IssueCode::InvalidMesh, format!("module {:?}: {e}", m.id));
    }
    if !(m.weight > 0.0) {
        push(IssueCode::NonPositiveWeight, format!("module weight {} t must be > 0", m.weight));
    }
    if !(m.rigging_weight >= 0.0) || !(m.rigging_length >= 0.0) {
        push(
            IssueCode::NegativeRigging,
            format!(
                "rigging weight {} t and length {} m must be >= 0",
                m.rigging_weight, m.rigging_length
            ),
        );
    }
    if !m.yaw_offset.is_finite() {
        push(IssueCode::NonFinite, "module yaw offset is not finite".into());
    }

    for (label, state) in [("pick", &scene.pick_state), ("set", &scene.set_state)] {
        for dof in spec.limit_violations(state) {
            push(
                IssueCode::LimitViolation(dof),
                format!("{label} state {dof} = {} outside limits", state.get(dof)),
            );
        }
    }

    let t = &scene.clearance;
    if !(t.red_below > 0.0 && t.red_below < t.yellow_below) {
        push(
            IssueCode::InvalidThresholds,
            format!("need 0 < red ({}) < yellow ({})", t.red_below, t.yellow_below),
        );
    }
    issues
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::document::{MemorySource, NoFiles};
    use crate::kinematics::tests::example_spec;
    use serde_json::json;

    fn minimal_doc() -> serde_json::Value {
        json!({
            "units": "m,t,rad",
            "ground_z": 0.0,
            "crane_position": [0, 0, 0],
            "obstacles": [{
                "id": "A",
                "tag": "piperack",
                "pose": {"translation": [20, 0, 0], "yaw": 0.0},
                "mesh": {"vertices": [[0,0,0],[1,0,0],[0,1,0]], "triangles": [[0,1,2]]}
            }],
            "module": {
                "id": "M1",
                "mesh": {"obj": "module.obj"},
                "weight": 50.0,
                "rigging_weight": 3.0,
                "rigging_length": 4.0
            },
            "pick_state": {"tx": 0, "ty": 0, "heading": 0, "swing": 0, "luff_deg": 60, "hoist": 10},
            "set_state": {"tx": 0, "ty": 0, "heading": 0, "swing_deg": 90, "luff_deg": 60, "hoist": 10}
        })
    }

    fn files() -> MemorySource {
        let mut m = MemorySource::default();
        m.0.insert(
            "module.obj".into(),
            obj::write_obj(&TriMesh::cuboid(Vec3::new(-3.0, -1.5, -3.0), Vec3::new(3.0, 1.5, 0.0))),
        );
        m
    }

    fn load(v: &serde_json::Value) -> Result<Scene, SceneError> {
        load_scene(v.to_string().as_bytes(), &files())
    }

    #[test]
    fn loads_minimal_document() {
        let scene = load(&minimal_doc()).unwrap();
        assert_eq!(scene.obstacles.len(), 1);
        assert_eq!(scene.module.weight, 50.0);
        assert_eq!(scene.module.mesh.len(), 12);
        assert_eq!(scene.pick_state.luff, 60f64.to_radians());
        assert_eq!(scene.clearance, ClearanceThresholds::default());
    }

    #[test]
    fn missing_units_is_unit_error() {
        let mut d = minimal_doc();
        d.as_object_mut().unwrap().remove("units");
        assert!(matches!(load(&d), Err(SceneError::Units(_))));
        d["units"] = json!("ft,lb,deg");
        assert!(matches!(load(&d), Err(SceneError::Units(_))));
    }

    #[test]
    fn duplicate_ids_name_the_id() {
        let mut d = minimal_doc();
        let o = d["obstacles"][0].clone();
        d["obstacles"].as_array_mut().unwrap().push(o);
        match load(&d) {
            Err(SceneError::Parse(msg)) => assert!(msg.contains("\"A\""), "{msg}"),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn unresolvable_mesh_is_missing_mesh() {
        let d = minimal_doc();
        let r = load_scene(d.to_string().as_bytes(), &NoFiles);
        assert_eq!(r, Err(SceneError::MissingMesh("module.obj".into())));
    }

    #[test]
    fn malformed_document_is_parse_error() {
        assert!(matches!(load_scene(b"{not json", &NoFiles), Err(SceneError::Parse(_))));
        let mut d = minimal_doc();
        d["module"]["mesh"] = json!({"vertices": [[0,0,0]], "triangles": [[0,0,0]]});
        assert!(matches!(load(&d), Err(SceneError::Parse(_))));
    }

    #[test]
    fn serialize_round_trip_and_purity() {
        let bytes = minimal_doc().to_string();
        let a = load_scene(bytes.as_bytes(), &files()).unwrap();
        let b = load_scene(bytes.as_bytes(), &files()).unwrap();
        assert_eq!(a, b);
        let again = load_scene(a.to_json().as_bytes(), &NoFiles).unwrap();
        assert_eq!(again, a);
    }

    #[test]
    fn validation_reports_each_problem() {
        let spec = example_spec();
        let scene = load(&minimal_doc()).unwrap();
        assert_eq!(validate_scene(&scene, &spec), vec![]);

        let mut s = scene.clone();
        s.pick_state.luff = 95f64.to_radians();
        let codes: Vec<_> = validate_scene(&s, &spec).into_iter().map(|i| i.code).collect();
        assert_eq!(codes, vec![IssueCode::LimitViolation(Dof::Luff)]);

        let mut s = scene.clone();
        s.module.weight = 0.0;
        let codes: Vec<_> = validate_scene(&s, &spec).into_iter().map(|i| i.code).collect();
        assert_eq!(codes, vec![IssueCode::NonPositiveWeight]);

        let mut s = scene;
        s.crane_position.z = 1.0;
        s.clearance.red_below = 5.0;
        let codes: Vec<_> = validate_scene(&s, &spec).into_iter().map(|i| i.code).collect();
        assert_eq!(codes, vec![IssueCode::CraneOffGround, IssueCode::InvalidThresholds]);
    }
}
