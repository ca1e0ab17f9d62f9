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

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Aabb, Pose, Vec3};

/// Triangles with area at or below this are rejected.
pub const MIN_TRIANGLE_AREA: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeshError {
    #[error("mesh has no triangles")]
    Empty,
    #[error("triangle {triangle} references vertex {index} but mesh has {count} vertices")]
    IndexOutOfRange {
        triangle: usize,
        index: u32,
        count: usize,
    },
    #[error("triangle {triangle} is degenerate (area {area:e} m²)")]
    Degenerate { triangle: usize, area: f64 },
    #[error("vertex {vertex} is not finite")]
    NonFinite { vertex: usize },
}

/// Indexed triangle mesh in some local frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMesh")]
pub struct TriMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[u32; 3]>,
}

#[derive(Deserialize)]
struct RawMesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[u32; 3]>,
}

impl TryFrom<RawMesh> for TriMesh {
    type Error = MeshError;
    fn try_from(raw: RawMesh) -> Result<Self, MeshError> {
        TriMesh::new(raw.vertices, raw.triangles)
    }
}

impl TriMesh {
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[u32; 3]>) -> Result<Self, MeshError> {
        let mesh = TriMesh {
            vertices,
            triangles,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn validate(&self) -> Result<(), MeshError> {
        if self.triangles.is_empty() {
            return Err(MeshError::Empty);
        }
        if let Some(vertex) = self.vertices.iter().position(|v| !v.is_finite()) {
            return Err(MeshError::NonFinite { vertex });
        }
        let count = self.vertices.len();
        for (triangle, tri) in self.triangles.iter().enumerate() {
            if let Some(&index) = tri.iter().find(|&&i| i as usize >= count) {
                return Err(MeshError::IndexOutOfRange {
                    triangle,
                    index,
                    count,
                });
            }
            let [a, b, c] = self.corners(triangle);
            let area = 0.5 * (b - a).cross(c - a).norm();
            if area <= MIN_TRIANGLE_AREA {
                return Err(MeshError::Degenerate { triangle, area });
            }
        }
        Ok(())
    }

    pub fn corners(&self, triangle: usize) -> [Vec3; 3] {
        let [i, j, k] = self.triangles[triangle];
        [
            self.vertices[i as usize],
            self.vertices[j as usize],
            self.vertices[k as usize],
        ]
    }

    pub fn posed_triangles(&self, pose: &Pose) -> Vec<[Vec3; 3]> {
        let world: Vec<Vec3> = self
            .vertices
            .iter()
            .map(|&v| pose.transform_point(v))
            .collect();
        self.triangles
            .iter()
            .map(|t| [world[t[0] as usize], world[t[1] as usize], world[t[2] as usize]])
            .collect()
    }

    pub fn aabb(&self) -> Aabb {
        Aabb::from_points(self.vertices.iter().copied())
    }

    pub fn transformed(&self, pose: &Pose) -> TriMesh {
        TriMesh {
            vertices: self
                .vertices
                .iter()
                .map(|&v| pose.transform_point(v))
                .collect(),
            triangles: self.triangles.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    /// Appends `other` (already in this mesh's frame).
    pub fn merge(&mut self, other: &TriMesh) {
        let offset = self.vertices.len() as u32;
        self.vertices.extend_from_slice(&other.vertices);
        self.triangles.extend(
            other
                .triangles
                .iter()
                .map(|t| [t[0] + offset, t[1] + offset, t[2] + offset]),
        );
    }

    /// Axis-aligned box spanning `min..max`, 12 outward-facing triangles.
    pub fn cuboid(min: Vec3, max: Vec3) -> TriMesh {
        let v = |x: bool, y: bool, z: bool| {
            Vec3::new(
                if x { max.x } else { min.x },
                if y { max.y } else { min.y },
                if z { max.z } else { min.z },
            )
        };
        let vertices = vec![
            v(false, false, false),
            v(true, false, false),
            v(true, true, false),
            v(false, true, false),
            v(false, false, true),
            v(true, false, true),
            v(true, true, true),
            v(false, true, true),
        ];
        let triangles = vec![
            [0, 2, 1],
            [0, 3, 2],
            [4, 5, 6],
            [4, 6, 7],
            [0, 1, 5],
            [0, 5, 4],
            [1, 2, 6],
            [1, 6, 5],
            [2, 3, 7],
            [2, 7, 6],
            [3, 0, 4],
            [3, 4, 7],
        ];
        TriMesh {
            vertices,
            triangles,
        }
    }

    /// Box centered at `center` with half extents `half`.
    pub fn centered_box(center: Vec3, half: Vec3) -> TriMesh {
        TriMesh::cuboid(center - half, center + half)
    }

    /// Closed vertical cylinder, `segments` facets around, base at `base`.
    pub fn cylinder(base: Vec3, radius: f64, height: f64, segments: usize) -> TriMesh {
        let n = segments.max(3);
        let mut vertices = Vec::with_capacity(2 * n + 2);
        for k in 0..n {
            let a = TAU * k as f64 / n as f64;
            let (s, c) = a.sin_cos();
            vertices.push(base + Vec3::new(radius * c, radius * s, 0.0));
            vertices.push(base + Vec3::new(radius * c, radius * s, height));
        }
        let bottom = vertices.len() as u32;
        vertices.push(base);
        let top = bottom + 1;
        vertices.push(base + Vec3::new(0.0, 0.0, height));
        let mut triangles = Vec::with_capacity(4 * n);
        for k in 0..n as u32 {
            let k1 = (k + 1) % n as u32;
            let (b0, t0, b1, t1) = (2 * k, 2 * k + 1, 2 * k1, 2 * k1 + 1);
            triangles.push([b0, b1, t1]);
            triangles.push([b0, t1, t0]);
            triangles.push([bottom, b1, b0]);
            triangles.push([top, t0, t1]);
        }
        TriMesh {
            vertices,
            triangles,
        }
    }

    /// UV sphere with `rings` latitude bands and `segments` longitude slices.
    /// Produces `2 * segments * (rings - 1)` triangles.
    pub fn uv_sphere(center: Vec3, radius: f64, rings: usize, segments: usize) -> TriMesh {
        let rings = rings.max(2);
        let segments = segments.max(3);
        let mut vertices = vec![center + Vec3::new(0.0, 0.0, radius)];
        for r in 1..rings {
            let phi = std::f64::consts::PI * r as f64 / rings as f64;
            let (sp, cp) = phi.sin_cos();
            for s in 0..segments {
                let th = TAU * s as f64 / segments as f64;
                let (st, ct) = th.sin_cos();
                vertices.push(center + Vec3::new(radius * sp * ct, radius * sp * st, radius * cp));
            }
        }
        let south = vertices.len() as u32;
        vertices.push(center - Vec3::new(0.0, 0.0, radius));
        let ring = |r: usize, s: usize| (1 + (r - 1) * segments + s % segments) as u32;
        let mut triangles = Vec::new();
        for s in 0..segments {
            triangles.push([0, ring(1, s), ring(1, s + 1)]);
        }
        for r in 1..rings - 1 {
            for s in 0..segments {
                let (a, b) = (ring(r, s), ring(r, s + 1));
                let (c, d) = (ring(r + 1, s), ring(r + 1, s + 1));
                triangles.push([a, c, d]);
                triangles.push([a, d, b]);
            }
        }
        for s in 0..segments {
            triangles.push([south, ring(rings - 1, s + 1), ring(rings - 1, s)]);
        }
        TriMesh {
            vertices,
            triangles,
        }
    }
}
