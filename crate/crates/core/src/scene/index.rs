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

//! Axis-aligned bounding-box tree over the world-frame triangles of one posed mesh.

use thiserror::Error;

use crate::geometry::{Aabb, Pose, Vec3};

use super::mesh::{MeshError, TriMesh};

/// Leaves hold at most this many triangles.
pub const MAX_LEAF_TRIANGLES: usize = 4;

pub type Triangle = [Vec3; 3];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NodeKind {
    Leaf { start: u32, count: u32 },
    Inner { left: u32, right: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub aabb: Aabb,
    pub kind: NodeKind,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IndexError {
    #[error("degenerate mesh: {0}")]
    DegenerateMesh(#[from] MeshError),
}

#[derive(Debug, Clone)]
pub struct SpatialIndex {
    triangles: Vec<Triangle>,
    source: Vec<u32>,
    nodes: Vec<Node>,
}

/// Poses `mesh` into the world frame and builds its tree.
pub fn build_index(mesh: &TriMesh, pose: &Pose) -> Result<SpatialIndex, IndexError> {
    mesh.validate()?;
    Ok(SpatialIndex::from_triangles(mesh.posed_triangles(pose)))
}

fn triangle_aabb(t: &Triangle) -> Aabb {
    Aabb::from_points(t.iter().copied())
}

fn centroid(t: &Triangle) -> Vec3 {
    (t[0] + t[1] + t[2]) * (1.0 / 3.0)
}

impl SpatialIndex {
    /// Builds a tree over triangles that are already in the world frame.
    ///
    /// Panics if `triangles` is empty.
    pub fn from_triangles(triangles: Vec<Triangle>) -> SpatialIndex {
        assert!(!triangles.is_empty(), "spatial index needs at least one triangle");
        let mut items: Vec<(u32, Triangle, Vec3)> = triangles
            .into_iter()
            .enumerate()
            .map(|(i, t)| (i as u32, t, centroid(&t)))
            .collect();
        let mut nodes = Vec::with_capacity(2 * items.len() / MAX_LEAF_TRIANGLES + 1);
        build_node(&mut items, 0, &mut nodes);
        let (source, triangles) = items.into_iter().map(|(i, t, _)| (i, t)).unzip();
        SpatialIndex {
            triangles,
            source,
            nodes,
        }
    }

    pub fn root(&self) -> &Node {
        &self.nodes[0]
    }

    pub fn aabb(&self) -> Aabb {
        self.nodes[0].aabb
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, i: u32) -> &Node {
        &self.nodes[i as usize]
    }

    /// Triangles of a leaf slice, in tree order.
    pub fn leaf_triangles(&self, start: u32, count: u32) -> &[Triangle] {
        &self.triangles[start as usize..(start + count) as usize]
    }

    /// Original mesh triangle index of the triangle stored at `slot`.
    pub fn source_triangle(&self, slot: usize) -> u32 {
        self.source[slot]
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }
}

fn build_node(items: &mut [(u32, Triangle, Vec3)], offset: u32, nodes: &mut Vec<Node>) -> u32 {
    let aabb = items
        .iter()
        .fold(Aabb::EMPTY, |b, (_, t, _)| b.union(triangle_aabb(t)));
    let me = nodes.len() as u32;
    if items.len() <= MAX_LEAF_TRIANGLES {
        nodes.push(Node {
            aabb,
            kind: NodeKind::Leaf {
                start: offset,
                count: items.len() as u32,
            },
        });
        return me;
    }
    let cbox = Aabb::from_points(items.iter().map(|(_, _, c)| *c));
    let ext = cbox.extent();
    let axis = if ext.x >= ext.y && ext.x >= ext.z {
        0
    } else if ext.y >= ext.z {
        1
    } else {
        2
    };
    let mid = items.len() / 2;
    items.select_nth_unstable_by(mid, |a, b| {
        a.2.axis(axis)
            .total_cmp(&b.2.axis(axis))
            .then(a.0.cmp(&b.0))
    });
    nodes.push(Node {
        aabb,
        kind: NodeKind::Inner { left: 0, right: 0 },
    });
    let (lo, hi) = items.split_at_mut(mid);
    let left = build_node(lo, offset, nodes);
    let right = build_node(hi, offset + mid as u32, nodes);
    nodes[me as usize].kind = NodeKind::Inner { left, right };
    me
}
