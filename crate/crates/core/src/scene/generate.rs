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

//! Deterministic synthetic sites for load testing and benchmarks.

use std::f64::consts::PI;

use crate::clearance::ClearanceThresholds;
use crate::geometry::{Pose, Vec3};
use crate::kinematics::CraneState;

use super::mesh::TriMesh;
use super::{LiftedModule, Obstacle, Scene};

const OBSTACLE_COUNT: usize = 20;

/// A site with roughly `triangles` obstacle triangles spread over twenty
/// spheres placed around the crane on a golden-angle spiral.
pub fn synthetic_site(triangles: usize) -> Scene {
    let per = triangles.div_ceil(OBSTACLE_COUNT).max(24);
    let segments = 48;
    let rings = per.div_ceil(2 * segments).max(2) + 1;
    let golden = PI * (3.0 - 5f64.sqrt());
    let obstacles = (0..OBSTACLE_COUNT)
        .map(|k| {
            let angle = golden * k as f64;
            let dist = 12.0 + 18.0 * (k as f64 + 0.5) / OBSTACLE_COUNT as f64;
            let radius = 1.5 + (k % 3) as f64 * 0.5;
            let center = Vec3::new(dist * angle.cos(), dist * angle.sin(), radius + (k % 4) as f64 * 2.0);
            Obstacle {
                id: format!("sphere-{k:02}"),
                tag: "synthetic".into(),
                pose: Pose::new(center, 0.0),
                mesh: TriMesh::uv_sphere(Vec3::ZERO, radius, rings, segments),
            }
        })
        .collect();
    Scene {
        ground_z: 0.0,
        crane_position: Vec3::ZERO,
        obstacles,
        module: LiftedModule {
            id: "module".into(),
            mesh: TriMesh::cuboid(Vec3::new(-3.0, -1.5, -3.0), Vec3::new(3.0, 1.5, 0.0)),
            weight: 40.0,
            rigging_weight: 2.0,
            rigging_length: 4.0,
            yaw_offset: 0.0,
        },
        pick_state: CraneState::new(0.0, 0.0, 0.0, 0.0, 60f64.to_radians(), 12.0),
        set_state: CraneState::new(0.0, 0.0, 0.0, 90f64.to_radians(), 60f64.to_radians(), 12.0),
        clearance: ClearanceThresholds::default(),
    }
}
