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

//! Exact closest-point queries between points, segments and triangles, and
//! branch-and-bound minimum distance between two [`SpatialIndex`] trees.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::geometry::{Aabb, Vec3};
use crate::scene::index::{NodeKind, SpatialIndex, Triangle};

/// Minimum distance with one witness point on each operand (`[on_a, on_b]`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Proximity {
    pub distance: f64,
    pub witness: [Vec3; 2],
}

impl Proximity {
    pub const FAR: Proximity = Proximity {
        distance: f64::INFINITY,
        witness: [Vec3::ZERO, Vec3::ZERO],
    };

    fn swapped(self) -> Proximity {
        Proximity {
            distance: self.distance,
            witness: [self.witness[1], self.witness[0]],
        }
    }
}

/// Closest point on triangle `abc` to `p`.
pub fn closest_point_on_triangle(p: Vec3, [a, b, c]: &Triangle) -> Vec3 {
    let (a, b, c) = (*a, *b, *c);
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(ap);
    let d2 = ac.dot(ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return a;
    }
    let bp = p - b;
    let d3 = ab.dot(bp);
    let d4 = ac.dot(bp);
    if d3 >= 0.0 && d4 <= d3 {
        return b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return a + ab * (d1 / (d1 - d3));
    }
    let cp = p - c;
    let d5 = ab.dot(cp);
    let d6 = ac.dot(cp);
    if d6 >= 0.0 && d5 <= d6 {
        return c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return a + ac * (d2 / (d2 - d6));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }
    let denom = 1.0 / (va + vb + vc);
    a + ab * (vb * denom) + ac * (vc * denom)
}

/// Closest points between segments `p1q1` and `p2q2`.
pub fn closest_points_segments(p1: Vec3, q1: Vec3, p2: Vec3, q2: Vec3) -> (Vec3, Vec3) {
    const EPS: f64 = 1e-300;
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.norm_squared();
    let e = d2.norm_squared();
    let f = d2.dot(r);
    let (s, t);
    if a <= EPS && e <= EPS {
        return (p1, p2);
    }
    if a <= EPS {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(r);
        if e <= EPS {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(d2);
            let denom = a * e - b * b;
            let mut s0 = if denom > 0.0 {
                ((b * f - c * e) / denom).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let mut t0 = (b * s0 + f) / e;
            if t0 < 0.0 {
                t0 = 0.0;
                s0 = (-c / a).clamp(0.0, 1.0);
            } else if t0 > 1.0 {
                t0 = 1.0;
                s0 = ((b - c) / a).clamp(0.0, 1.0);
            }
            s = s0;
            t = t0;
        }
    }
    (p1 + d1 * s, p2 + d2 * t)
}

fn candidate(best: &mut Proximity, on_a: Vec3, on_b: Vec3) {
    let d = on_a.distance(on_b);
    if d < best.distance {
        *best = Proximity {
            distance: d,
            witness: [on_a, on_b],
        };
    }
}

/// Segment `pq` against triangle; witness is `[on_segment, on_triangle]`.
pub fn segment_triangle(p: Vec3, q: Vec3, tri: &Triangle) -> Proximity {
    let [a, b, c] = *tri;
    let n = (b - a).cross(c - a);
    let dp = n.dot(p - a);
    let dq = n.dot(q - a);
    if dp * dq <= 0.0 && dp != dq {
        let t = dp / (dp - dq);
        let x = p + (q - p) * t;
        let inside = (b - a).cross(x - a).dot(n) >= 0.0
            && (c - b).cross(x - b).dot(n) >= 0.0
            && (a - c).cross(x - c).dot(n) >= 0.0;
        if inside {
            return Proximity {
                distance: 0.0,
                witness: [x, x],
            };
        }
    }
    let mut best = Proximity::FAR;
    candidate(&mut best, p, closest_point_on_triangle(p, tri));
    candidate(&mut best, q, closest_point_on_triangle(q, tri));
    for (e0, e1) in [(a, b), (b, c), (c, a)] {
        let (on_seg, on_edge) = closest_points_segments(p, q, e0, e1);
        candidate(&mut best, on_seg, on_edge);
    }
    best
}

/// Exact distance between two triangles; witness is `[on_a, on_b]`.
pub fn triangle_triangle(ta: &Triangle, tb: &Triangle) -> Proximity {
    let mut best = Proximity::FAR;
    for (tri_edges, other, flip) in [(ta, tb, false), (tb, ta, true)] {
        for k in 0..3 {
            let r = segment_triangle(tri_edges[k], tri_edges[(k + 1) % 3], other);
            if r.distance < best.distance {
                best = if flip { r.swapped() } else { r };
                if best.distance == 0.0 {
                    return best;
                }
            }
        }
    }
    best
}

fn triangle_aabb(t: &Triangle) -> Aabb {
    Aabb::from_points(t.iter().copied())
}

/// A triangle prepared for descending a tree: its box and supporting plane.
struct Probe<'t> {
    tri: &'t Triangle,
    aabb: Aabb,
    normal: Vec3,
    offset: f64,
}

impl<'t> Probe<'t> {
    fn new(tri: &'t Triangle) -> Probe<'t> {
        let n = (tri[1] - tri[0]).cross(tri[2] - tri[0]);
        let len = n.norm();
        let normal = if len > 0.0 { n * (1.0 / len) } else { Vec3::ZERO };
        Probe {
            tri,
            aabb: triangle_aabb(tri),
            normal,
            offset: normal.dot(tri[0]),
        }
    }

    /// Lower bound on the distance from the triangle to anything inside `b`:
    /// the larger of the box gap and the gap along the triangle normal.
    fn bound(&self, b: &Aabb) -> f64 {
        let c = b.center();
        let e = b.extent() * 0.5;
        let n = self.normal;
        let reach = e.x * n.x.abs() + e.y * n.y.abs() + e.z * n.z.abs();
        let plane = (n.dot(c) - self.offset).abs() - reach - BOX_SLACK;
        let ball = c.distance(closest_point_on_triangle(c, self.tri)) - e.norm() - BOX_SLACK;
        self.aabb.distance(b).max(plane).max(ball)
    }
}

/// Lower bound on the distance between two triangles: how far `other` lies
/// wholly on one side of the plane of `t`, zero if it straddles it.
fn plane_gap(t: &Triangle, other: &Triangle) -> f64 {
    let n = (t[1] - t[0]).cross(t[2] - t[0]);
    let len = n.norm();
    if !(len > 0.0) {
        return 0.0;
    }
    let n = n * (1.0 / len);
    let d = other.map(|v| n.dot(v - t[0]));
    let lo = d[0].min(d[1]).min(d[2]);
    let hi = d[0].max(d[1]).max(d[2]);
    lo.max(-hi).max(0.0) - BOX_SLACK
}

/// Segment counterpart of [`Probe`]: box gap or bounding-ball gap, whichever
/// is larger.
struct SegmentProbe {
    p: Vec3,
    q: Vec3,
    aabb: Aabb,
}

impl SegmentProbe {
    fn new(p: Vec3, q: Vec3) -> SegmentProbe {
        SegmentProbe {
            p,
            q,
            aabb: Aabb::from_points([p, q]),
        }
    }

    fn bound(&self, b: &Aabb) -> f64 {
        let c = b.center();
        let (on_seg, _) = closest_points_segments(self.p, self.q, c, c);
        let ball = c.distance(on_seg) - (b.extent() * 0.5).norm() - BOX_SLACK;
        self.aabb.distance(b).max(ball)
    }
}

#[derive(Debug, Clone, Copy)]
enum Task {
    Pair(u32, u32),
    /// Probe number, node of the other tree.
    Probe(u32, u32),
}

/// Heap entry ordered so the smallest bound pops first; ties go to the
/// earliest push, which keeps the traversal deterministic.
struct Queued {
    bound: f64,
    seq: u64,
    task: Task,
}

impl PartialEq for Queued {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}

impl Eq for Queued {}

impl PartialOrd for Queued {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Queued {
    fn cmp(&self, o: &Self) -> Ordering {
        o.bound.total_cmp(&self.bound).then(o.seq.cmp(&self.seq))
    }
}

/// Minimum distance between the triangle sets of two trees; zero on contact.
///
/// Best-first branch and bound. Once one side is down to a leaf, each of its
/// triangles probes the other tree on its own with tighter bounds.
pub fn min_distance(a: &SpatialIndex, b: &SpatialIndex) -> Proximity {
    min_distance_below(a, b, f64::INFINITY).unwrap_or(Proximity::FAR)
}

/// [`min_distance`] if it is below `cutoff`, otherwise `None`. Pairs that
/// cannot beat the cutoff are never examined.
pub fn min_distance_below(a: &SpatialIndex, b: &SpatialIndex, cutoff: f64) -> Option<Proximity> {
    let mut best = Proximity {
        distance: cutoff,
        ..Proximity::FAR
    };
    let mut probes: Vec<(Probe, bool)> = Vec::new();
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    let mut push = |heap: &mut BinaryHeap<Queued>, bound: f64, task: Task| {
        heap.push(Queued { bound, seq, task });
        seq += 1;
    };
    push(&mut heap, a.aabb().distance(&b.aabb()), Task::Pair(0, 0));
    while let Some(Queued { bound, task, .. }) = heap.pop() {
        if bound >= best.distance {
            break;
        }
        match task {
            Task::Pair(na, nb) => {
                let (node_a, node_b) = (a.node(na), b.node(nb));
                match (node_a.kind, node_b.kind) {
                    (NodeKind::Leaf { start, count }, _) => {
                        for t in a.leaf_triangles(start, count) {
                            let p = Probe::new(t);
                            push(&mut heap, p.bound(&node_b.aabb), Task::Probe(probes.len() as u32, nb));
                            probes.push((p, false));
                        }
                    }
                    (_, NodeKind::Leaf { start, count }) => {
                        for t in b.leaf_triangles(start, count) {
                            let p = Probe::new(t);
                            push(&mut heap, p.bound(&node_a.aabb), Task::Probe(probes.len() as u32, na));
                            probes.push((p, true));
                        }
                    }
                    (NodeKind::Inner { left: la, right: ra }, NodeKind::Inner { left: lb, right: rb }) => {
                        let split_a = node_a.aabb.extent().norm_squared() >= node_b.aabb.extent().norm_squared();
                        let pairs = if split_a { [(la, nb), (ra, nb)] } else { [(na, lb), (na, rb)] };
                        for (x, y) in pairs {
                            let d = a.node(x).aabb.distance(&b.node(y).aabb);
                            if d < best.distance {
                                push(&mut heap, d, Task::Pair(x, y));
                            }
                        }
                    }
                }
            }
            Task::Probe(k, n) => {
                let (probe, probe_is_b) = &probes[k as usize];
                let tree = if *probe_is_b { a } else { b };
                match tree.node(n).kind {
                    NodeKind::Leaf { start, count } => {
                        for t in tree.leaf_triangles(start, count) {
                            if probe.bound(&triangle_aabb(t)) >= best.distance
                                || plane_gap(t, probe.tri) >= best.distance
                            {
                                continue;
                            }
                            let r = if *probe_is_b {
                                triangle_triangle(t, probe.tri)
                            } else {
                                triangle_triangle(probe.tri, t)
                            };
                            if r.distance < best.distance {
                                best = r;
                                if best.distance == 0.0 {
                                    return Some(best);
                                }
                            }
                        }
                    }
                    NodeKind::Inner { left, right } => {
                        for c in [left, right] {
                            let d = probe.bound(&tree.node(c).aabb);
                            if d < best.distance {
                                push(&mut heap, d, Task::Probe(k, c));
                            }
                        }
                    }
                }
            }
        }
    }
    (best.distance < cutoff).then_some(best)
}

/// Minimum distance from segment `pq` to the triangles of a tree;
/// witness is `[on_segment, on_mesh]`.
pub fn segment_distance(p: Vec3, q: Vec3, index: &SpatialIndex) -> Proximity {
    segment_distance_below(p, q, index, f64::INFINITY).unwrap_or(Proximity::FAR)
}

/// [`segment_distance`] if it is below `cutoff`, otherwise `None`.
pub fn segment_distance_below(p: Vec3, q: Vec3, index: &SpatialIndex, cutoff: f64) -> Option<Proximity> {
    let probe = SegmentProbe::new(p, q);
    let mut best = Proximity {
        distance: cutoff,
        ..Proximity::FAR
    };
    let mut stack = vec![0u32];
    while let Some(n) = stack.pop() {
        let node = index.node(n);
        if probe.bound(&node.aabb) >= best.distance {
            continue;
        }
        match node.kind {
            NodeKind::Leaf { start, count } => {
                for t in index.leaf_triangles(start, count) {
                    let r = segment_triangle(p, q, t);
                    if r.distance < best.distance {
                        best = r;
                        if best.distance == 0.0 {
                            return Some(best);
                        }
                    }
                }
            }
            NodeKind::Inner { left, right } => {
                let dl = probe.bound(&index.node(left).aabb);
                let dr = probe.bound(&index.node(right).aabb);
                if dl <= dr {
                    stack.push(right);
                    stack.push(left);
                } else {
                    stack.push(left);
                    stack.push(right);
                }
            }
        }
    }
    (best.distance < cutoff).then_some(best)
}

/// Box gaps below this are still descended by the boolean queries, so they
/// agree with [`min_distance`] even when rounding puts a contact point a hair
/// outside its triangle's box.
const BOX_SLACK: f64 = 1e-9;

/// Whether any triangle pair of the two trees touches (distance exactly zero).
/// Agrees with `min_distance(a, b).distance == 0.0`.
pub fn intersects(a: &SpatialIndex, b: &SpatialIndex) -> bool {
    let mut stack = vec![(0u32, 0u32)];
    while let Some((na, nb)) = stack.pop() {
        let (node_a, node_b) = (a.node(na), b.node(nb));
        if node_a.aabb.distance(&node_b.aabb) > BOX_SLACK {
            continue;
        }
        match (node_a.kind, node_b.kind) {
            (NodeKind::Leaf { start: sa, count: ca }, NodeKind::Leaf { start: sb, count: cb }) => {
                for ta in a.leaf_triangles(sa, ca) {
                    for tb in b.leaf_triangles(sb, cb) {
                        if triangle_triangle(ta, tb).distance == 0.0 {
                            return true;
                        }
                    }
                }
            }
            (NodeKind::Inner { left, right }, NodeKind::Leaf { .. }) => {
                stack.push((left, nb));
                stack.push((right, nb));
            }
            (NodeKind::Leaf { .. }, NodeKind::Inner { left, right }) => {
                stack.push((na, left));
                stack.push((na, right));
            }
            (NodeKind::Inner { left: la, right: ra }, NodeKind::Inner { left: lb, right: rb }) => {
                stack.extend([(la, lb), (la, rb), (ra, lb), (ra, rb)]);
            }
        }
    }
    false
}

/// Whether segment `pq` comes within `radius` of any triangle of the tree.
pub fn segment_within(p: Vec3, q: Vec3, radius: f64, index: &SpatialIndex) -> bool {
    let probe = SegmentProbe::new(p, q);
    let mut stack = vec![0u32];
    while let Some(n) = stack.pop() {
        let node = index.node(n);
        if probe.bound(&node.aabb) > radius + BOX_SLACK {
            continue;
        }
        match node.kind {
            NodeKind::Leaf { start, count } => {
                if index
                    .leaf_triangles(start, count)
                    .iter()
                    .any(|t| segment_triangle(p, q, t).distance <= radius)
                {
                    return true;
                }
            }
            NodeKind::Inner { left, right } => stack.extend([left, right]),
        }
    }
    false
}
