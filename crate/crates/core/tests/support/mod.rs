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

//! Fixtures and brute-force oracles shared by the integration tests and the
//! acceptance suite. Nothing here calls the library's distance or search code.

#![allow(dead_code)]

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::f64::consts::{PI, TAU};

use liftsim_core::clearance::ClearanceThresholds;
use liftsim_core::kinematics::{Interval, Limits, Rates};
use liftsim_core::path::{LatticeNode, Planner};
use liftsim_core::scene::{LiftedModule, Obstacle};
use liftsim_core::{CraneSpec, CraneState, Dof, LatticeSpec, LoadChart, Pose, Scene, Site, TriMesh, Vec3};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Tri = [Vec3; 3];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn deg(d: f64) -> f64 {
    d.to_radians()
}

/// L = 30, a = 2, h = 1.5 crawler with a 0.5 m boom capsule.
pub fn example_spec() -> CraneSpec {
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
            luff: Interval::new(deg(10.0), deg(88.0)),
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

/// Lengths {30, 40}, radii {10, 12}, rated {{100, 80}, {90, 70}}.
pub fn example_chart() -> LoadChart {
    LoadChart::new(
        vec![30.0, 40.0],
        vec![10.0, 12.0],
        vec![vec![Some(100.0), Some(80.0)], vec![Some(90.0), Some(70.0)]],
    )
    .unwrap()
}

/// Flat 500 t everywhere the crane can reach.
pub fn generous_chart() -> LoadChart {
    LoadChart::new(
        vec![10.0, 60.0],
        vec![0.0, 80.0],
        vec![vec![Some(500.0), Some(500.0)], vec![Some(500.0), Some(500.0)]],
    )
    .unwrap()
}

pub fn demo_dir() -> std::path::PathBuf {
    std::path::PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../demo")
}

pub fn small_module() -> LiftedModule {
    LiftedModule {
        id: "module".into(),
        mesh: TriMesh::cuboid(Vec3::new(-2.0, -1.0, -2.0), Vec3::new(2.0, 1.0, 0.0)),
        weight: 10.0,
        rigging_weight: 1.0,
        rigging_length: 3.0,
        yaw_offset: 0.0,
    }
}

pub fn scene_with(obstacles: Vec<Obstacle>, module: LiftedModule, pick: CraneState, set: CraneState) -> Scene {
    Scene {
        ground_z: 0.0,
        crane_position: Vec3::ZERO,
        obstacles,
        module,
        pick_state: pick,
        set_state: set,
        clearance: ClearanceThresholds::default(),
    }
}

pub fn block(id: &str, center: Vec3, half: Vec3, yaw: f64) -> Obstacle {
    Obstacle {
        id: id.into(),
        tag: "block".into(),
        pose: Pose::new(center, yaw),
        mesh: TriMesh::centered_box(Vec3::ZERO, half),
    }
}

pub fn random_state(rng: &mut impl Rng, spec: &CraneSpec) -> CraneState {
    let l = &spec.limits;
    CraneState::new(
        rng.gen_range(l.tx.min..=l.tx.max),
        rng.gen_range(l.ty.min..=l.ty.max),
        rng.gen_range(-PI..PI),
        rng.gen_range(-PI..PI),
        rng.gen_range(l.luff.min..=l.luff.max),
        rng.gen_range(l.hoist.min..=l.hoist.max),
    )
}

// ---------------------------------------------------------------------------
// Exact distances by exhaustive case analysis.

fn clamp01(t: f64) -> f64 {
    t.clamp(0.0, 1.0)
}

pub fn point_segment(p: Vec3, a: Vec3, b: Vec3) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    let t = if len2 > 0.0 { clamp01((p - a).dot(ab) / len2) } else { 0.0 };
    p.distance(a + ab * t)
}

/// Minimum of the convex quadratic over the unit square: the interior
/// stationary point if it lies inside, else the best of the four edges.
pub fn segment_segment(p1: Vec3, q1: Vec3, p2: Vec3, q2: Vec3) -> f64 {
    let mut best = point_segment(p1, p2, q2)
        .min(point_segment(q1, p2, q2))
        .min(point_segment(p2, p1, q1))
        .min(point_segment(q2, p1, q1));
    let (d1, d2, r) = (q1 - p1, q2 - p2, p1 - p2);
    let (a, b, c) = (d1.dot(d1), d1.dot(d2), d2.dot(d2));
    let (d, e) = (d1.dot(r), d2.dot(r));
    let den = a * c - b * b;
    if den > 1e-12 * a * c {
        let s = (b * e - c * d) / den;
        let t = (a * e - b * d) / den;
        if (0.0..=1.0).contains(&s) && (0.0..=1.0).contains(&t) {
            best = best.min((p1 + d1 * s).distance(p2 + d2 * t));
        }
    }
    best
}

fn inside_triangle(p: Vec3, &[a, b, c]: &Tri, n: Vec3) -> bool {
    let s1 = (b - a).cross(p - a).dot(n);
    let s2 = (c - b).cross(p - b).dot(n);
    let s3 = (a - c).cross(p - c).dot(n);
    (s1 >= 0.0 && s2 >= 0.0 && s3 >= 0.0) || (s1 <= 0.0 && s2 <= 0.0 && s3 <= 0.0)
}

pub fn point_triangle(p: Vec3, t: &Tri) -> f64 {
    let n = (t[1] - t[0]).cross(t[2] - t[0]);
    let nn = n.norm();
    let h = (p - t[0]).dot(n) / nn;
    let foot = p - n * (h / nn);
    if inside_triangle(foot, t, n) {
        h.abs()
    } else {
        point_segment(p, t[0], t[1])
            .min(point_segment(p, t[1], t[2]))
            .min(point_segment(p, t[2], t[0]))
    }
}

/// Whether the closed segment meets the triangle (non-coplanar case).
pub fn segment_pierces(p: Vec3, q: Vec3, t: &Tri) -> bool {
    let n = (t[1] - t[0]).cross(t[2] - t[0]);
    let (dp, dq) = ((p - t[0]).dot(n), (q - t[0]).dot(n));
    if dp * dq > 0.0 || (dp == 0.0 && dq == 0.0) {
        return false;
    }
    let x = p + (q - p) * (dp / (dp - dq));
    inside_triangle(x, t, n)
}

pub fn segment_triangle(p: Vec3, q: Vec3, t: &Tri) -> f64 {
    if segment_pierces(p, q, t) {
        return 0.0;
    }
    point_triangle(p, t)
        .min(point_triangle(q, t))
        .min(segment_segment(p, q, t[0], t[1]))
        .min(segment_segment(p, q, t[1], t[2]))
        .min(segment_segment(p, q, t[2], t[0]))
}

pub fn triangle_triangle(a: &Tri, b: &Tri) -> f64 {
    for i in 0..3 {
        let j = (i + 1) % 3;
        if segment_pierces(a[i], a[j], b) || segment_pierces(b[i], b[j], a) {
            return 0.0;
        }
    }
    let mut best = f64::INFINITY;
    for v in a {
        best = best.min(point_triangle(*v, b));
    }
    for v in b {
        best = best.min(point_triangle(*v, a));
    }
    for i in 0..3 {
        for k in 0..3 {
            best = best.min(segment_segment(a[i], a[(i + 1) % 3], b[k], b[(k + 1) % 3]));
        }
    }
    best
}

pub fn brute_min_distance(a: &[Tri], b: &[Tri]) -> f64 {
    let mut best = f64::INFINITY;
    for x in a {
        for y in b {
            best = best.min(triangle_triangle(x, y));
        }
    }
    best
}

pub fn brute_segment_distance(p: Vec3, q: Vec3, tris: &[Tri]) -> f64 {
    tris.iter().map(|t| segment_triangle(p, q, t)).fold(f64::INFINITY, f64::min)
}

/// A cloud of `n` random triangles of edge up to `size` around `center`.
pub fn random_soup(rng: &mut impl Rng, n: usize, center: Vec3, spread: f64, size: f64) -> Vec<Tri> {
    (0..n)
        .map(|_| {
            let c = center
                + Vec3::new(
                    rng.gen_range(-spread..spread),
                    rng.gen_range(-spread..spread),
                    rng.gen_range(-spread..spread),
                );
            let mut v = || c + Vec3::new(rng.gen_range(-size..size), rng.gen_range(-size..size), rng.gen_range(-size..size));
            [v(), v(), v()]
        })
        .collect()
}

pub fn soup_mesh(tris: &[Tri]) -> TriMesh {
    let vertices = tris.iter().flatten().copied().collect();
    let triangles = (0..tris.len() as u32).map(|i| [3 * i, 3 * i + 1, 3 * i + 2]).collect();
    TriMesh::new(vertices, triangles).unwrap()
}

/// Contact between any crane part and any obstacle, by exhaustive search.
pub fn brute_contact(site: &Site, state: &CraneState) -> bool {
    let poses = site.poses(state);
    let spec = &site.spec;
    let parts = [
        spec.carrier_mesh.posed_triangles(&poses.carrier),
        spec.superstructure_mesh.posed_triangles(&poses.superstructure),
        site.scene.module.mesh.posed_triangles(&poses.module),
    ];
    site.scene.obstacles.iter().any(|o| {
        let tris = o.mesh.posed_triangles(&o.pose);
        parts.iter().any(|p| brute_min_distance(p, &tris) == 0.0)
            || brute_segment_distance(poses.boom_foot, poses.boom_tip, &tris) <= spec.boom_radius
            || brute_segment_distance(poses.boom_tip, poses.module.translation, &tris) == 0.0
    })
}

// ---------------------------------------------------------------------------
// Lattice search oracle.

/// Cost of a shortest start-to-goal path by plain Dijkstra over every lattice
/// node, or `None` when the goal is unreachable. Costs accumulate per-DOF step
/// counts so they are comparable bit for bit with the planner's.
pub fn dijkstra_cost(p: &Planner) -> Option<f64> {
    let start = p.start_node();
    if !p.node_feasible(&start) || !p.node_feasible(&p.goal_node()) {
        return None;
    }
    let mut best: HashMap<LatticeNode, (f64, [u32; 6])> = HashMap::new();
    let mut heap = BinaryHeap::new();
    best.insert(start, (0.0, [0; 6]));
    heap.push(Reverse((Key(0.0), start)));
    while let Some(Reverse((Key(d), node))) = heap.pop() {
        let (bd, counts) = best[&node];
        if d > bd {
            continue;
        }
        if node == p.goal_node() {
            return Some(d);
        }
        for (next, dof) in p.neighbors(&node) {
            if !p.edge_feasible(&node, &next) {
                continue;
            }
            let mut c = counts;
            c[dof.index()] += 1;
            let nd = p.cost_of_counts(&c);
            if best.get(&next).is_none_or(|(old, _)| nd < *old) {
                best.insert(next, (nd, c));
                heap.push(Reverse((Key(nd), next)));
            }
        }
    }
    None
}

/// True remaining cost to the goal from every node that can reach it.
pub fn cost_to_goal(p: &Planner) -> HashMap<LatticeNode, f64> {
    let goal = p.goal_node();
    let mut best: HashMap<LatticeNode, f64> = HashMap::new();
    if !p.node_feasible(&goal) {
        return best;
    }
    let mut heap = BinaryHeap::new();
    best.insert(goal, 0.0);
    heap.push(Reverse((Key(0.0), goal)));
    while let Some(Reverse((Key(d), node))) = heap.pop() {
        if d > best[&node] {
            continue;
        }
        for (prev, dof) in p.neighbors(&node) {
            if !p.edge_feasible(&prev, &node) {
                continue;
            }
            let nd = d + p.edge_cost(dof);
            if best.get(&prev).is_none_or(|old| nd < *old) {
                best.insert(prev, nd);
                heap.push(Reverse((Key(nd), prev)));
            }
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Key(f64);
impl Eq for Key {}
impl PartialOrd for Key {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Key {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&o.0)
    }
}

/// A random planning problem on a lattice of at most 7 x 7 x 7 nodes (swing,
/// luff, hoist) with a few box obstacles around the crane.
pub struct LatticeInstance {
    pub site: Site,
    pub start: CraneState,
    pub goal: CraneState,
    pub lattice: LatticeSpec,
}

pub fn random_lattice_instance(rng: &mut impl Rng) -> LatticeInstance {
    loop {
        let d_luff = deg(rng.gen_range(2.0..5.0));
        let d_hoist = rng.gen_range(0.8..2.0);
        let d_swing = if rng.gen_bool(0.5) {
            TAU / rng.gen_range(6..=7) as f64
        } else {
            rng.gen_range(0.9..1.0)
        };
        let start = CraneState::new(0.0, 0.0, 0.0, rng.gen_range(-PI..PI), deg(60.0), 12.0);
        let mut spec = example_spec();
        spec.limits.luff = Interval::new(start.luff - 3.0 * d_luff, start.luff + 3.0 * d_luff);
        spec.limits.hoist = Interval::new(start.hoist - 3.0 * d_hoist, start.hoist + 3.0 * d_hoist);

        let obstacles = (0..rng.gen_range(2..=4))
            .map(|k| {
                let a = rng.gen_range(-PI..PI);
                let r = rng.gen_range(10.0..24.0);
                let h = rng.gen_range(2.0..16.0);
                block(
                    &format!("box-{k}"),
                    Vec3::new(r * a.cos(), r * a.sin(), h),
                    Vec3::new(rng.gen_range(1.0..3.0), rng.gen_range(1.0..3.0), h),
                    rng.gen_range(-PI..PI),
                )
            })
            .collect();
        let scene = scene_with(obstacles, small_module(), start, start);
        let site = Site::new(scene, spec, generous_chart()).unwrap();
        if !site.is_feasible(&start) {
            continue;
        }
        let lattice = LatticeSpec::new([(Dof::Swing, d_swing), (Dof::Luff, d_luff), (Dof::Hoist, d_hoist)])
            .with_weight(Dof::Swing, rng.gen_range(0.3..3.0))
            .with_weight(Dof::Luff, rng.gen_range(0.3..3.0))
            .with_weight(Dof::Hoist, rng.gen_range(0.3..3.0));
        for _ in 0..50 {
            let goal = start
                .with(Dof::Swing, liftsim_core::wrap_angle(start.swing + rng.gen_range(-3..=3) as f64 * d_swing))
                .with(Dof::Luff, start.luff + rng.gen_range(-3..=3) as f64 * d_luff)
                .with(Dof::Hoist, start.hoist + rng.gen_range(-3..=3) as f64 * d_hoist);
            if goal != start && site.is_feasible(&goal) {
                return LatticeInstance {
                    site,
                    start,
                    goal,
                    lattice,
                };
            }
        }
    }
}

/// Swing-only problem whose goal (90°) is walled in by pillars at 60° and 120°.
pub fn enclosed_goal_instance() -> LatticeInstance {
    let start = CraneState::new(0.0, 0.0, 0.0, 0.0, deg(60.0), 12.0);
    let goal = start.with(Dof::Swing, deg(90.0));
    let pillar = |id: &str, a: f64| block(id, Vec3::new(17.0 * a.cos(), 17.0 * a.sin(), 10.0), Vec3::new(1.0, 1.0, 10.0), 0.0);
    let scene = scene_with(
        vec![pillar("west", deg(60.0)), pillar("east", deg(120.0))],
        small_module(),
        start,
        goal,
    );
    let site = Site::new(scene, example_spec(), generous_chart()).unwrap();
    LatticeInstance {
        site,
        start,
        goal,
        lattice: LatticeSpec::new([(Dof::Swing, deg(30.0))]),
    }
}

/// Module swinging 0 to 90° at R = 17 m through a wall standing across the arc at 45°.
pub fn swing_arc_fixture() -> (Site, liftsim_core::LiftPath) {
    let start = CraneState::new(0.0, 0.0, 0.0, 0.0, deg(60.0), 12.0);
    let end = start.with(Dof::Swing, deg(90.0));
    let a = deg(45.0);
    let wall = block("wall", Vec3::new(17.0 * a.cos(), 17.0 * a.sin(), 8.0), Vec3::new(4.0, 0.3, 8.0), a);
    let scene = scene_with(vec![wall], small_module(), start, end);
    let site = Site::new(scene, example_spec(), generous_chart()).unwrap();
    (site, liftsim_core::LiftPath::new(vec![start, end]).unwrap())
}
