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

//! A* over a regular lattice in crane configuration space.
//!
//! Nodes are integer offsets from the start state along the active DOFs; edges
//! move one DOF by one step. An edge is usable when its two endpoints and its
//! midpoint are feasible. Heading and swing wrap around when the step divides a
//! full turn, otherwise they are bounded to half a turn either side of the start.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, HashMap};
use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::document::degrees_to_radians;
use crate::geometry::wrap_angle;
use crate::kinematics::{CraneState, Dof};
use crate::site::Site;

use super::{check_path, interpolate_states, LiftPath};

/// Default search budget in node expansions.
pub const DEFAULT_MAX_EXPANSIONS: usize = 2_000_000;

/// Lattice resolution, active DOFs and per-DOF cost weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub steps: BTreeMap<Dof, f64>,
    #[serde(default = "default_active")]
    pub active: Vec<Dof>,
    /// Missing weights default to 1.
    #[serde(default)]
    pub weights: BTreeMap<Dof, f64>,
    #[serde(default = "default_budget")]
    pub max_expansions: usize,
}

fn default_active() -> Vec<Dof> {
    vec![Dof::Swing, Dof::Luff, Dof::Hoist]
}

fn default_budget() -> usize {
    DEFAULT_MAX_EXPANSIONS
}

impl Default for LatticeSpec {
    /// Swing 2°, luff 1°, hoist 0.5 m, travel frozen.
    fn default() -> Self {
        LatticeSpec {
            steps: BTreeMap::from([
                (Dof::Swing, 2f64.to_radians()),
                (Dof::Luff, 1f64.to_radians()),
                (Dof::Hoist, 0.5),
            ]),
            active: default_active(),
            weights: BTreeMap::new(),
            max_expansions: DEFAULT_MAX_EXPANSIONS,
        }
    }
}

impl LatticeSpec {
    pub fn new(steps: impl IntoIterator<Item = (Dof, f64)>) -> Self {
        let steps: BTreeMap<Dof, f64> = steps.into_iter().collect();
        LatticeSpec {
            active: steps.keys().copied().collect(),
            steps,
            weights: BTreeMap::new(),
            max_expansions: DEFAULT_MAX_EXPANSIONS,
        }
    }

    pub fn with_weight(mut self, dof: Dof, w: f64) -> Self {
        self.weights.insert(dof, w);
        self
    }

    /// Parses a lattice document; `<dof>_deg` keys inside `steps` are degrees.
    pub fn from_json(bytes: &[u8]) -> Result<Self, PlanError> {
        let mut v: serde_json::Value =
            serde_json::from_slice(bytes).map_err(|e| PlanError::BadLattice(e.to_string()))?;
        degrees_to_radians(&mut v).map_err(PlanError::BadLattice)?;
        let spec: LatticeSpec = serde_json::from_value(v).map_err(|e| PlanError::BadLattice(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn step(&self, dof: Dof) -> f64 {
        self.steps.get(&dof).copied().unwrap_or(0.0)
    }

    pub fn weight(&self, dof: Dof) -> f64 {
        self.weights.get(&dof).copied().unwrap_or(1.0)
    }

    pub fn validate(&self) -> Result<(), PlanError> {
        if self.active.is_empty() {
            return Err(PlanError::BadLattice("no active DOF".into()));
        }
        for &d in &self.active {
            let s = self.step(d);
            if !(s > 0.0 && s.is_finite()) {
                return Err(PlanError::BadLattice(format!("{d} step must be > 0")));
            }
            let w = self.weight(d);
            if !(w >= 0.0 && w.is_finite()) {
                return Err(PlanError::BadLattice(format!("{d} weight must be >= 0")));
            }
        }
        Ok(())
    }

    /// Σ over legs and DOFs of `weight · |Δ|` (angles by shorter arc).
    pub fn path_cost(&self, path: &LiftPath) -> f64 {
        path.waypoints()
            .windows(2)
            .map(|w| {
                Dof::ALL
                    .iter()
                    .map(|&d| {
                        let delta = if d.is_angular() {
                            wrap_angle(w[1].get(d) - w[0].get(d))
                        } else {
                            w[1].get(d) - w[0].get(d)
                        };
                        self.weight(d) * delta.abs()
                    })
                    .sum::<f64>()
            })
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("invalid lattice: {0}")]
    BadLattice(String),
    #[error("cannot snap {which} onto the lattice: {reason}")]
    Snap { which: &'static str, reason: String },
    #[error("{which} state is not feasible")]
    InfeasibleEndpoint { which: &'static str },
    #[error("no path to the goal: {0}")]
    NoPath(String),
}

/// Integer lattice coordinates, indexed by [`Dof::index`]; inactive DOFs stay 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticeNode(pub [i32; 6]);

#[derive(Debug, Clone, Copy)]
enum Axis {
    /// `k` in `lo..=hi`.
    Bounded { lo: i32, hi: i32 },
    /// `k` modulo `n`.
    Cyclic { n: i32 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanResult {
    pub path: LiftPath,
    pub cost: f64,
    /// Goal state actually reached (the requested goal snapped onto the lattice).
    pub snapped_goal: CraneState,
    /// Requested goal minus snapped goal, per DOF.
    pub snap_offset: CraneState,
    pub expanded: usize,
    /// Resolution at which the returned path passes [`check_path`].
    pub resolution: f64,
}

/// Lattice graph for one planning query, with feasibility caches.
pub struct Planner<'a> {
    site: &'a Site,
    lattice: LatticeSpec,
    start: CraneState,
    axes: [Option<Axis>; 6],
    goal: LatticeNode,
    snapped_goal: CraneState,
    edge_costs: [f64; 6],
    node_cache: RefCell<HashMap<LatticeNode, bool>>,
    edge_cache: RefCell<HashMap<(LatticeNode, LatticeNode), bool>>,
}

#[derive(Debug, Clone, Copy)]
struct Open {
    f: f64,
    h: f64,
    node: LatticeNode,
}

impl PartialEq for Open {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Open {}
impl PartialOrd for Open {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Open {
    // reversed: BinaryHeap pops the smallest (f, h, coords)
    fn cmp(&self, o: &Self) -> Ordering {
        o.f.total_cmp(&self.f)
            .then(o.h.total_cmp(&self.h))
            .then(o.node.cmp(&self.node))
    }
}

fn offset(dof: Dof, from: f64, to: f64) -> f64 {
    if dof.is_angular() {
        wrap_angle(to - from)
    } else {
        to - from
    }
}

impl<'a> Planner<'a> {
    pub fn new(site: &'a Site, start: CraneState, goal: CraneState, lattice: LatticeSpec) -> Result<Self, PlanError> {
        lattice.validate()?;
        if !start.is_finite() || !goal.is_finite() {
            return Err(PlanError::Snap {
                which: "start",
                reason: "non-finite state".into(),
            });
        }
        let mut axes = [None; 6];
        let mut goal_node = [0i32; 6];
        let mut snapped_goal = start;
        let mut edge_costs = [0.0; 6];
        for dof in Dof::ALL {
            let i = dof.index();
            if !lattice.active.contains(&dof) {
                let off = offset(dof, start.get(dof), goal.get(dof));
                if off.abs() > 1e-9 {
                    return Err(PlanError::Snap {
                        which: "goal",
                        reason: format!("{dof} is not active but differs by {off:.6} from the start"),
                    });
                }
                continue;
            }
            let step = lattice.step(dof);
            edge_costs[i] = lattice.weight(dof) * step;
            let axis = match site.spec.limits.interval(dof) {
                Some(lim) => {
                    let s = start.get(dof);
                    if !lim.contains(s) {
                        return Err(PlanError::Snap {
                            which: "start",
                            reason: format!("{dof} outside limits"),
                        });
                    }
                    Axis::Bounded {
                        lo: -(((s - lim.min) / step + 1e-9).floor() as i32),
                        hi: ((lim.max - s) / step + 1e-9).floor() as i32,
                    }
                }
                None => {
                    let n = (TAU / step).round();
                    if (n * step - TAU).abs() < 1e-9 && n >= 3.0 {
                        Axis::Cyclic { n: n as i32 }
                    } else {
                        let h = ((PI / step) + 1e-9).floor() as i32;
                        Axis::Bounded { lo: -h, hi: h }
                    }
                }
            };
            let delta = offset(dof, start.get(dof), goal.get(dof));
            let mut k = (delta / step).round() as i32;
            match axis {
                Axis::Bounded { lo, hi } => {
                    if k < lo || k > hi {
                        return Err(PlanError::Snap {
                            which: "goal",
                            reason: format!("{dof} lies beyond the lattice bounds"),
                        });
                    }
                }
                Axis::Cyclic { n } => k = k.rem_euclid(n),
            }
            axes[i] = Some(axis);
            goal_node[i] = k;
        }
        let goal_node = LatticeNode(goal_node);
        let mut planner = Planner {
            site,
            lattice,
            start,
            axes,
            goal: goal_node,
            snapped_goal,
            edge_costs,
            node_cache: RefCell::new(HashMap::new()),
            edge_cache: RefCell::new(HashMap::new()),
        };
        snapped_goal = planner.state(&goal_node);
        planner.snapped_goal = snapped_goal;
        Ok(planner)
    }

    pub fn start_node(&self) -> LatticeNode {
        LatticeNode([0; 6])
    }

    pub fn goal_node(&self) -> LatticeNode {
        self.goal
    }

    pub fn snapped_goal(&self) -> CraneState {
        self.snapped_goal
    }

    /// Cost of one step along `dof` (`weight · step`).
    pub fn edge_cost(&self, dof: Dof) -> f64 {
        self.edge_costs[dof.index()]
    }

    /// Check resolution at which every single-step edge is sampled at most at
    /// its endpoints and midpoint. The slack absorbs rounding in state
    /// differences, which would otherwise double the sample count.
    pub fn resolution(&self) -> f64 {
        let levers = self.site.lever_arms();
        self.lattice
            .active
            .iter()
            .map(|&d| self.lattice.step(d) * levers[d.index()])
            .fold(0.0, f64::max)
            / 2.0
            * (1.0 + 1e-9)
    }

    pub fn state(&self, node: &LatticeNode) -> CraneState {
        let mut s = self.start;
        for dof in Dof::ALL {
            let i = dof.index();
            if self.axes[i].is_none() {
                continue;
            }
            let v = self.start.get(dof) + node.0[i] as f64 * self.lattice.step(dof);
            s.set(dof, if dof.is_angular() { wrap_angle(v) } else { v });
        }
        s
    }

    /// Lattice neighbours one step away, with the DOF moved.
    pub fn neighbors(&self, node: &LatticeNode) -> Vec<(LatticeNode, Dof)> {
        let mut out = Vec::with_capacity(12);
        for dof in Dof::ALL {
            let i = dof.index();
            let Some(axis) = self.axes[i] else { continue };
            for dir in [-1, 1] {
                let k = node.0[i] + dir;
                let k = match axis {
                    Axis::Bounded { lo, hi } => {
                        if k < lo || k > hi {
                            continue;
                        }
                        k
                    }
                    Axis::Cyclic { n } => {
                        if n == 2 && dir == 1 {
                            continue;
                        }
                        k.rem_euclid(n)
                    }
                };
                let mut next = *node;
                next.0[i] = k;
                out.push((next, dof));
            }
        }
        out
    }

    /// Remaining-cost lower bound: weighted per-DOF step distance to the goal.
    pub fn heuristic(&self, node: &LatticeNode) -> f64 {
        let mut h = 0.0;
        for dof in Dof::ALL {
            let i = dof.index();
            let Some(axis) = self.axes[i] else { continue };
            let diff = (node.0[i] - self.goal.0[i]).abs();
            let steps = match axis {
                Axis::Bounded { .. } => diff,
                Axis::Cyclic { n } => diff.min(n - diff),
            };
            h += self.edge_costs[i] * steps as f64;
        }
        h
    }

    /// Canonical cost of a path that made `counts[d]` steps along each DOF.
    pub fn cost_of_counts(&self, counts: &[u32; 6]) -> f64 {
        let mut c = 0.0;
        for i in 0..6 {
            c += self.edge_costs[i] * counts[i] as f64;
        }
        c
    }

    pub fn node_feasible(&self, node: &LatticeNode) -> bool {
        if let Some(&v) = self.node_cache.borrow().get(node) {
            return v;
        }
        let v = self.site.is_feasible(&self.state(node));
        self.node_cache.borrow_mut().insert(*node, v);
        v
    }

    /// Both endpoints and the midpoint feasible, traversing from `a` to `b`
    /// exactly as the path checker would.
    pub fn edge_feasible(&self, a: &LatticeNode, b: &LatticeNode) -> bool {
        let key = (*a, *b);
        if let Some(&v) = self.edge_cache.borrow().get(&key) {
            return v;
        }
        let v = self.node_feasible(a) && self.node_feasible(b) && {
            let mid = interpolate_states(&self.state(a), &self.state(b), 0.5);
            self.site.is_feasible(&mid)
        };
        self.edge_cache.borrow_mut().insert(key, v);
        v
    }

    /// Runs A*; `trace` receives every expanded node in order.
    pub fn search(&self, mut trace: Option<&mut Vec<LatticeNode>>) -> Result<PlanResult, PlanError> {
        let start = self.start_node();
        if !self.node_feasible(&start) {
            return Err(PlanError::InfeasibleEndpoint { which: "start" });
        }
        if !self.node_feasible(&self.goal) {
            return Err(PlanError::InfeasibleEndpoint { which: "goal" });
        }
        struct Entry {
            counts: [u32; 6],
            parent: Option<LatticeNode>,
            closed: bool,
        }
        let mut table: HashMap<LatticeNode, Entry> = HashMap::new();
        table.insert(
            start,
            Entry {
                counts: [0; 6],
                parent: None,
                closed: false,
            },
        );
        let mut open = BinaryHeap::new();
        let h0 = self.heuristic(&start);
        open.push(Open { f: h0, h: h0, node: start });
        let mut expanded = 0usize;
        while let Some(Open { node, .. }) = open.pop() {
            let entry = table.get_mut(&node).expect("queued nodes are in the table");
            if entry.closed {
                continue;
            }
            entry.closed = true;
            let counts = entry.counts;
            expanded += 1;
            if let Some(t) = trace.as_deref_mut() {
                t.push(node);
            }
            if node == self.goal {
                return Ok(self.finish(&table.iter().map(|(k, e)| (*k, e.parent)).collect(), counts, expanded));
            }
            if expanded >= self.lattice.max_expansions {
                return Err(PlanError::NoPath(format!(
                    "search budget of {} expansions exhausted",
                    self.lattice.max_expansions
                )));
            }
            let g = self.cost_of_counts(&counts);
            for (next, dof) in self.neighbors(&node) {
                if table.get(&next).is_some_and(|e| e.closed) {
                    continue;
                }
                if !self.edge_feasible(&node, &next) {
                    continue;
                }
                let mut c = counts;
                c[dof.index()] += 1;
                let g_next = self.cost_of_counts(&c);
                debug_assert!(g_next >= g);
                let better = table
                    .get(&next)
                    .is_none_or(|e| g_next < self.cost_of_counts(&e.counts));
                if better {
                    table.insert(
                        next,
                        Entry {
                            counts: c,
                            parent: Some(node),
                            closed: false,
                        },
                    );
                    let h = self.heuristic(&next);
                    open.push(Open {
                        f: g_next + h,
                        h,
                        node: next,
                    });
                }
            }
        }
        Err(PlanError::NoPath(format!(
            "goal unreachable; explored {expanded} lattice nodes"
        )))
    }

    fn finish(
        &self,
        parents: &HashMap<LatticeNode, Option<LatticeNode>>,
        counts: [u32; 6],
        expanded: usize,
    ) -> PlanResult {
        let mut nodes = vec![self.goal];
        while let Some(Some(p)) = parents.get(nodes.last().unwrap()) {
            nodes.push(*p);
        }
        nodes.reverse();
        let resolution = self.resolution();
        let states: Vec<CraneState> = nodes.iter().map(|n| self.state(n)).collect();
        let path = if states.len() == 1 {
            LiftPath::new(vec![states[0], states[0]]).expect("two waypoints")
        } else {
            self.compress(&nodes, &states, resolution)
        };
        PlanResult {
            path,
            cost: self.cost_of_counts(&counts),
            snapped_goal: self.snapped_goal,
            // filled in by `plan_path`, which knows the requested goal
            snap_offset: CraneState::default(),
            expanded,
            resolution,
        }
    }

    /// Merges runs of steps along the same DOF in the same direction, keeping
    /// a run merged only if the merged leg still passes the checker.
    fn compress(&self, nodes: &[LatticeNode], states: &[CraneState], resolution: f64) -> LiftPath {
        let direction = |a: &LatticeNode, b: &LatticeNode| {
            (0..6)
                .find(|&i| a.0[i] != b.0[i])
                .map(|i| (i, self.step_sign(i, a.0[i], b.0[i])))
        };
        let mut runs: Vec<(usize, usize)> = Vec::new();
        let mut start = 0;
        for k in 1..nodes.len() - 1 {
            if direction(&nodes[k - 1], &nodes[k]) != direction(&nodes[k], &nodes[k + 1]) {
                runs.push((start, k));
                start = k;
            }
        }
        runs.push((start, nodes.len() - 1));

        let mut waypoints = vec![states[0]];
        for (s, e) in runs {
            let merged = LiftPath::new(vec![states[s], states[e]]).expect("two waypoints");
            if e - s == 1 || check_path(self.site, &merged, resolution).valid {
                waypoints.push(states[e]);
            } else {
                waypoints.extend_from_slice(&states[s + 1..=e]);
            }
        }
        LiftPath::new(waypoints).expect("at least two waypoints")
    }

    fn step_sign(&self, i: usize, from: i32, to: i32) -> i32 {
        match self.axes[i] {
            Some(Axis::Cyclic { n }) if (to - from).abs() > 1 => {
                if to.rem_euclid(n) == (from + 1).rem_euclid(n) {
                    1
                } else {
                    -1
                }
            }
            _ => (to - from).signum(),
        }
    }
}

/// Plans a cost-minimal lattice path from `start` to `goal` (snapped onto the lattice).
pub fn plan_path(site: &Site, start: CraneState, goal: CraneState, lattice: &LatticeSpec) -> Result<PlanResult, PlanError> {
    let planner = Planner::new(site, start, goal, lattice.clone())?;
    let mut result = planner.search(None)?;
    let snapped = result.snapped_goal;
    let mut off = CraneState::default();
    for dof in Dof::ALL {
        off.set(dof, offset(dof, snapped.get(dof), goal.get(dof)));
    }
    result.snap_offset = off;
    Ok(result)
}
