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

mod support;

use std::f64::consts::FRAC_PI_2;

use liftsim_core::path::{leg_intervals, leg_motion, PlanError, Planner};
use liftsim_core::{check_path, plan_path, CraneState, Dof, LatticeSpec, LiftPath, Site, ViolationKind};
use rand::Rng;
use support::*;

fn empty_site(start: CraneState) -> Site {
    Site::new(scene_with(vec![], small_module(), start, start), example_spec(), generous_chart()).unwrap()
}

#[test]
fn straight_swing_on_an_empty_site() {
    let start = CraneState::new(0.0, 0.0, 0.0, 0.0, deg(60.0), 12.0);
    let site = empty_site(start);
    let lattice = LatticeSpec::new([(Dof::Swing, deg(5.0))]);
    let plan = plan_path(&site, start, start.with(Dof::Swing, deg(90.0)), &lattice).unwrap();
    assert!((plan.cost - FRAC_PI_2).abs() < 1e-12);
    assert_eq!(plan.path.waypoints().len(), 2, "collinear steps merge into one leg");
    let planner = Planner::new(&site, start, start.with(Dof::Swing, deg(90.0)), lattice).unwrap();
    let mut trace = Vec::new();
    planner.search(Some(&mut trace)).unwrap();
    // monotone: each expansion is one step further along
    assert_eq!(trace.len(), 19);
    for (k, n) in trace.iter().enumerate() {
        assert_eq!(n.0[Dof::Swing.index()], k as i32);
    }
}

#[test]
fn random_lattices_match_dijkstra() {
    let mut rng = rng(41);
    let (mut solved, mut blocked) = (0, 0);
    for _ in 0..40 {
        let inst = random_lattice_instance(&mut rng);
        let planner = Planner::new(&inst.site, inst.start, inst.goal, inst.lattice.clone()).unwrap();
        let oracle = dijkstra_cost(&planner);
        let mut trace = Vec::new();
        match (planner.search(Some(&mut trace)), oracle) {
            (Ok(plan), Some(cost)) => {
                assert_eq!(plan.cost, cost);
                assert!(check_path(&inst.site, &plan.path, plan.resolution).valid);
                let remaining = cost_to_goal(&planner);
                for n in &trace {
                    assert!(planner.heuristic(n) <= remaining[n] + 1e-12);
                }
                solved += 1;
            }
            (Err(PlanError::NoPath(_)), None) => blocked += 1,
            (got, want) => panic!("planner {got:?}, oracle {want:?}"),
        }
    }
    assert!(solved >= 25, "{solved} solved, {blocked} blocked");
}

#[test]
fn enclosed_goal_is_no_path() {
    let inst = enclosed_goal_instance();
    assert!(inst.site.is_feasible(&inst.goal));
    let r = plan_path(&inst.site, inst.start, inst.goal, &inst.lattice);
    assert!(matches!(r, Err(PlanError::NoPath(_))), "{r:?}");
}

#[test]
fn snapping() {
    let start = CraneState::new(0.0, 0.0, 0.0, 0.0, deg(60.0), 12.0);
    let site = empty_site(start);
    let lattice = LatticeSpec::new([(Dof::Swing, deg(5.0)), (Dof::Hoist, 0.5)]);
    let goal = start.with(Dof::Swing, deg(31.0)).with(Dof::Hoist, 13.2);
    let plan = plan_path(&site, start, goal, &lattice).unwrap();
    assert!((plan.snapped_goal.swing - deg(30.0)).abs() < 1e-12);
    assert!((plan.snap_offset.swing - deg(1.0)).abs() < 1e-12);
    assert!((plan.snap_offset.hoist - 0.2).abs() < 1e-12);
    // luff is frozen, so a goal that needs it cannot be snapped
    let r = plan_path(&site, start, goal.with(Dof::Luff, deg(50.0)), &lattice);
    assert!(matches!(r, Err(PlanError::Snap { .. })));
}

#[test]
fn infeasible_endpoints_are_reported() {
    let (site, path) = swing_arc_fixture();
    let start = path.waypoints()[0];
    let lattice = LatticeSpec::new([(Dof::Swing, deg(5.0))]);
    let blocked = start.with(Dof::Swing, deg(45.0));
    assert!(matches!(
        plan_path(&site, start, blocked, &lattice),
        Err(PlanError::InfeasibleEndpoint { which: "goal" })
    ));
    assert!(matches!(
        plan_path(&site, blocked, start, &lattice),
        Err(PlanError::InfeasibleEndpoint { which: "start" })
    ));
}

#[test]
fn plans_pass_the_checker() {
    let mut rng = rng(42);
    let mut checked = 0;
    while checked < 50 {
        let inst = random_lattice_instance(&mut rng);
        if let Ok(plan) = plan_path(&inst.site, inst.start, inst.goal, &inst.lattice) {
            let r = check_path(&inst.site, &plan.path, plan.resolution);
            assert!(r.valid, "{:?}", r.violations);
            checked += 1;
        }
    }
}

#[test]
fn unit_edges_sample_at_most_their_midpoint() {
    let mut rng = rng(31);
    for _ in 0..20 {
        let inst = random_lattice_instance(&mut rng);
        let planner = Planner::new(&inst.site, inst.start, inst.goal, inst.lattice).unwrap();
        let levers = inst.site.lever_arms();
        let mut frontier = vec![planner.start_node()];
        for _ in 0..200 {
            let Some(a) = frontier.pop() else { break };
            for (b, _) in planner.neighbors(&a) {
                let motion = leg_motion(&planner.state(&a), &planner.state(&b), &levers);
                assert!(leg_intervals(motion, planner.resolution()) <= 2, "{a:?} -> {b:?}");
                frontier.insert(0, b);
            }
        }
    }
}

#[test]
fn reversal() {
    let (site, path) = swing_arc_fixture();
    let detour = LiftPath::new(vec![
        path.waypoints()[0],
        path.waypoints()[0].with(Dof::Luff, deg(30.0)),
        path.waypoints()[1].with(Dof::Luff, deg(30.0)),
        path.waypoints()[1],
    ])
    .unwrap();
    let lattice = LatticeSpec::new([(Dof::Swing, deg(5.0)), (Dof::Luff, deg(1.0))]).with_weight(Dof::Luff, 2.5);
    for p in [&path, &detour] {
        let fwd = check_path(&site, p, 0.25);
        let back = check_path(&site, &p.reversed(), 0.25);
        let legs = |r: &liftsim_core::PathCheckResult| {
            let mut v: Vec<usize> = r.violations.iter().map(|v| v.leg).collect();
            v.dedup();
            v
        };
        let mut mirrored: Vec<usize> = legs(&back).iter().map(|l| p.legs() - 1 - l).collect();
        mirrored.reverse();
        assert_eq!(legs(&fwd), mirrored);
        let (a, b) = (lattice.path_cost(p), lattice.path_cost(&p.reversed()));
        assert!((a - b).abs() <= 1e-12 * a.max(1.0));
    }
    let start = path.waypoints()[0];
    let goal = path.waypoints()[1];
    let there = plan_path(&site, start, goal, &lattice).unwrap();
    let back = plan_path(&site, goal, start, &lattice).unwrap();
    assert_eq!(there.cost, back.cost);
}

#[test]
fn collisions_persist_at_finer_resolution() {
    let (site, path) = swing_arc_fixture();
    let mut rng = rng(43);
    let base = path.waypoints()[0];
    for _ in 0..30 {
        let mut pts = vec![base];
        for _ in 0..rng.gen_range(1..4) {
            pts.push(
                base.with(Dof::Swing, rng.gen_range(-3.0..3.0))
                    .with(Dof::Luff, deg(rng.gen_range(20.0..80.0)))
                    .with(Dof::Hoist, rng.gen_range(2.0..30.0)),
            );
        }
        let p = LiftPath::new(pts).unwrap();
        let r = rng.gen_range(0.1..2.0);
        let coarse = check_path(&site, &p, r);
        let fine = check_path(&site, &p, r / 2.0);
        for v in coarse.violations.iter().filter(|v| v.kind == ViolationKind::Collision) {
            assert!(fine
                .violations
                .iter()
                .any(|w| w.kind == ViolationKind::Collision && w.leg == v.leg));
        }
    }
}
