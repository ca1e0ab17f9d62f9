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

//! Clearance between crane/load geometry and site obstacles, with color codes.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::distance::{intersects, min_distance_below, segment_distance_below, segment_within, Proximity};
use crate::geometry::{Aabb, Vec3};
use crate::kinematics::{ComponentPoses, CraneSpec};
use crate::scene::index::{build_index, IndexError, SpatialIndex};
use crate::scene::{Scene, TriMesh};

/// Distance thresholds for the color codes, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClearanceThresholds {
    #[serde(rename = "red_m")]
    pub red_below: f64,
    #[serde(rename = "yellow_m")]
    pub yellow_below: f64,
}

impl Default for ClearanceThresholds {
    /// Roughly 3 ft and 10 ft.
    fn default() -> Self {
        ClearanceThresholds {
            red_below: 0.9,
            yellow_below: 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ClearanceCode {
    Green,
    Yellow,
    Red,
}

pub fn classify(distance: f64, t: &ClearanceThresholds) -> ClearanceCode {
    if distance < t.red_below {
        ClearanceCode::Red
    } else if distance < t.yellow_below {
        ClearanceCode::Yellow
    } else {
        ClearanceCode::Green
    }
}

/// Crane parts checked against obstacles, in report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    Carrier,
    Superstructure,
    Boom,
    HookLine,
    Module,
}

impl Component {
    pub const ALL: [Component; 5] = [
        Component::Carrier,
        Component::Superstructure,
        Component::Boom,
        Component::HookLine,
        Component::Module,
    ];
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Component::Carrier => "carrier",
            Component::Superstructure => "superstructure",
            Component::Boom => "boom",
            Component::HookLine => "hook_line",
            Component::Module => "module",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClearanceRecord {
    pub component: Component,
    pub obstacle: String,
    /// Zero when intersecting.
    pub distance: f64,
    /// `[on_component, on_obstacle]`.
    pub witness: [Vec3; 2],
    pub code: ClearanceCode,
}

/// World-frame collision geometry of the crane at one state.
#[derive(Debug, Clone)]
pub struct CraneGeometry {
    pub carrier: SpatialIndex,
    pub superstructure: SpatialIndex,
    pub module: SpatialIndex,
    /// Boom axis `[foot, tip]`, tested as a capsule.
    pub boom: [Vec3; 2],
    pub boom_radius: f64,
    /// Load line from boom tip down to the rigging attach point.
    pub hook_line: [Vec3; 2],
}

impl CraneGeometry {
    pub fn posed(spec: &CraneSpec, module_mesh: &TriMesh, poses: &ComponentPoses) -> CraneGeometry {
        CraneGeometry {
            carrier: SpatialIndex::from_triangles(spec.carrier_mesh.posed_triangles(&poses.carrier)),
            superstructure: SpatialIndex::from_triangles(
                spec.superstructure_mesh.posed_triangles(&poses.superstructure),
            ),
            module: SpatialIndex::from_triangles(module_mesh.posed_triangles(&poses.module)),
            boom: [poses.boom_foot, poses.boom_tip],
            boom_radius: spec.boom_radius,
            hook_line: [poses.boom_tip, poses.module.translation],
        }
    }

    /// Distance from one component to an obstacle tree.
    pub fn distance_to(&self, component: Component, obstacle: &SpatialIndex) -> Proximity {
        self.distance_below(component, obstacle, f64::INFINITY)
            .unwrap_or(Proximity::FAR)
    }

    /// [`distance_to`](Self::distance_to) if it is below `cutoff`.
    pub fn distance_below(&self, component: Component, obstacle: &SpatialIndex, cutoff: f64) -> Option<Proximity> {
        match component {
            Component::Carrier => min_distance_below(&self.carrier, obstacle, cutoff),
            Component::Superstructure => min_distance_below(&self.superstructure, obstacle, cutoff),
            Component::Module => min_distance_below(&self.module, obstacle, cutoff),
            Component::HookLine => segment_distance_below(self.hook_line[0], self.hook_line[1], obstacle, cutoff),
            Component::Boom => {
                let mut p =
                    segment_distance_below(self.boom[0], self.boom[1], obstacle, cutoff + self.boom_radius)?;
                p.distance = (p.distance - self.boom_radius).max(0.0);
                Some(p)
            }
        }
    }

    /// Box around the component. Its distance to an obstacle's box bounds the
    /// clearance from below.
    pub fn bounds(&self, component: Component) -> Aabb {
        match component {
            Component::Carrier => self.carrier.aabb(),
            Component::Superstructure => self.superstructure.aabb(),
            Component::Module => self.module.aabb(),
            Component::HookLine => Aabb::from_points(self.hook_line),
            Component::Boom => Aabb::from_points(self.boom).inflate(self.boom_radius),
        }
    }

    /// Whether the component touches the obstacle (its distance is zero).
    pub fn touches(&self, component: Component, obstacle: &SpatialIndex) -> bool {
        match component {
            Component::Carrier => intersects(&self.carrier, obstacle),
            Component::Superstructure => intersects(&self.superstructure, obstacle),
            Component::Module => intersects(&self.module, obstacle),
            Component::HookLine => segment_within(self.hook_line[0], self.hook_line[1], 0.0, obstacle),
            Component::Boom => segment_within(self.boom[0], self.boom[1], self.boom_radius, obstacle),
        }
    }
}

#[derive(Debug, Clone)]
pub struct IndexedObstacle {
    pub id: String,
    pub index: SpatialIndex,
}

/// Obstacle trees for one scene, built once and shared read-only.
#[derive(Debug, Clone)]
pub struct ClearanceEngine {
    obstacles: Vec<IndexedObstacle>,
    thresholds: ClearanceThresholds,
}

/// Allowance for rounding when a box bound is compared with an exact distance.
const BOUND_SLACK: f64 = 1e-6;

fn record_order(a: &ClearanceRecord, b: &ClearanceRecord) -> Ordering {
    a.distance
        .total_cmp(&b.distance)
        .then(a.component.cmp(&b.component))
        .then_with(|| a.obstacle.cmp(&b.obstacle))
}

impl ClearanceEngine {
    pub fn new(scene: &Scene) -> Result<ClearanceEngine, IndexError> {
        let obstacles = scene
            .obstacles
            .iter()
            .map(|o| {
                Ok(IndexedObstacle {
                    id: o.id.clone(),
                    index: build_index(&o.mesh, &o.pose)?,
                })
            })
            .collect::<Result<_, IndexError>>()?;
        Ok(ClearanceEngine {
            obstacles,
            thresholds: scene.clearance,
        })
    }

    pub fn thresholds(&self) -> &ClearanceThresholds {
        &self.thresholds
    }

    pub fn obstacles(&self) -> &[IndexedObstacle] {
        &self.obstacles
    }

    /// One record per (component, obstacle) pair, ascending by distance,
    /// ties broken by component then obstacle id.
    pub fn report(&self, crane: &CraneGeometry) -> Vec<ClearanceRecord> {
        let mut records = Vec::with_capacity(self.obstacles.len() * Component::ALL.len());
        for component in Component::ALL {
            for o in &self.obstacles {
                records.push(self.record(crane, component, o));
            }
        }
        records.sort_by(record_order);
        records
    }

    /// The first `k` records of [`report`](Self::report). Pairs are visited in
    /// order of their box bounds and the search stops once no remaining pair
    /// can displace the k-th record.
    pub fn nearest(&self, crane: &CraneGeometry, k: usize) -> Vec<ClearanceRecord> {
        if k == 0 {
            return Vec::new();
        }
        let mut candidates: Vec<(f64, Component, &IndexedObstacle)> = Component::ALL
            .iter()
            .flat_map(|&c| {
                let b = crane.bounds(c);
                self.obstacles.iter().map(move |o| (b.distance(&o.index.aabb()), c, o))
            })
            .collect();
        candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut records: Vec<ClearanceRecord> = Vec::with_capacity(k + 1);
        for (bound, component, o) in candidates {
            if records.len() == k && bound > records[k - 1].distance + BOUND_SLACK {
                break;
            }
            let cutoff = if records.len() == k {
                records[k - 1].distance + BOUND_SLACK
            } else {
                f64::INFINITY
            };
            let Some(r) = self.record_below(crane, component, o, cutoff) else {
                continue;
            };
            let at = records.partition_point(|x| record_order(x, &r) == Ordering::Less);
            records.insert(at, r);
            records.truncate(k);
        }
        records
    }

    fn record(&self, crane: &CraneGeometry, component: Component, o: &IndexedObstacle) -> ClearanceRecord {
        self.record_from(component, o, crane.distance_to(component, &o.index))
    }

    fn record_below(
        &self,
        crane: &CraneGeometry,
        component: Component,
        o: &IndexedObstacle,
        cutoff: f64,
    ) -> Option<ClearanceRecord> {
        let p = crane.distance_below(component, &o.index, cutoff)?;
        Some(self.record_from(component, o, p))
    }

    fn record_from(&self, component: Component, o: &IndexedObstacle, p: Proximity) -> ClearanceRecord {
        ClearanceRecord {
            component,
            obstacle: o.id.clone(),
            distance: p.distance,
            witness: p.witness,
            code: classify(p.distance, &self.thresholds),
        }
    }

    /// (component, obstacle id) pairs in contact.
    pub fn contacts(&self, crane: &CraneGeometry) -> Vec<(Component, String)> {
        let mut out = Vec::new();
        for component in Component::ALL {
            for o in &self.obstacles {
                if crane.touches(component, &o.index) {
                    out.push((component, o.id.clone()));
                }
            }
        }
        out
    }

    pub fn any_contact(&self, crane: &CraneGeometry) -> bool {
        Component::ALL
            .iter()
            .any(|&c| self.obstacles.iter().any(|o| crane.touches(c, &o.index)))
    }
}

/// Builds obstacle trees for `scene` and reports clearance at `poses`.
pub fn clearance_report(
    scene: &Scene,
    spec: &CraneSpec,
    poses: &ComponentPoses,
    thresholds: &ClearanceThresholds,
) -> Result<Vec<ClearanceRecord>, IndexError> {
    let mut engine = ClearanceEngine::new(scene)?;
    engine.thresholds = *thresholds;
    Ok(engine.report(&CraneGeometry::posed(spec, &scene.module.mesh, poses)))
}
