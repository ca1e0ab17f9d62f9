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

use liftsim_core::capacity::{capacity_or_overload, gross_load, ChartError};
use liftsim_core::{CraneState, Dof, LoadChart};
use rand::Rng;
use support::*;

fn demo_chart() -> LoadChart {
    LoadChart::from_csv_file(&demo_dir().join("chart.csv")).unwrap()
}

#[test]
fn midpoint_and_grid_examples() {
    let c = example_chart();
    assert_eq!(c.rated_capacity(35.0, 11.0).unwrap(), 85.0);
    assert_eq!(c.rated_capacity(30.0, 10.0).unwrap(), 100.0);
    assert!(matches!(c.rated_capacity(30.0, 15.0), Err(ChartError::OutOfChart { .. })));
}

#[test]
fn exact_on_every_demo_grid_point() {
    let c = demo_chart();
    for (i, &l) in c.boom_lengths.iter().enumerate() {
        for (j, &r) in c.radii.iter().enumerate() {
            match c.rated[i][j] {
                Some(v) => assert_eq!(c.rated_capacity(l, r).unwrap(), v, "({l}, {r})"),
                None => assert!(c.rated_capacity(l, r).is_err()),
            }
        }
    }
}

/// Independent bilinear form on one cell, for comparison.
fn cell_oracle(c: &LoadChart, l: f64, r: f64) -> Option<(f64, f64, f64)> {
    let i = c.boom_lengths.windows(2).position(|w| w[0] <= l && l <= w[1])?;
    let j = c.radii.windows(2).position(|w| w[0] <= r && r <= w[1])?;
    let corners = [
        c.rated[i][j]?,
        c.rated[i][j + 1]?,
        c.rated[i + 1][j]?,
        c.rated[i + 1][j + 1]?,
    ];
    let s = (l - c.boom_lengths[i]) / (c.boom_lengths[i + 1] - c.boom_lengths[i]);
    let t = (r - c.radii[j]) / (c.radii[j + 1] - c.radii[j]);
    let v = (1.0 - s) * ((1.0 - t) * corners[0] + t * corners[1]) + s * ((1.0 - t) * corners[2] + t * corners[3]);
    let lo = corners.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = corners.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Some((v, lo, hi))
}

#[test]
fn random_queries_stay_within_corners() {
    let c = demo_chart();
    let mut rng = rng(21);
    let mut checked = 0;
    for _ in 0..10_000 {
        let l = rng.gen_range(24.0..=42.0);
        let r = rng.gen_range(3.0..=32.0);
        let Some((v, lo, hi)) = cell_oracle(&c, l, r) else { continue };
        let got = c.rated_capacity(l, r).unwrap();
        assert!(got >= lo && got <= hi, "({l}, {r}) -> {got} outside [{lo}, {hi}]");
        assert!((got - v).abs() <= 1e-9 * v, "({l}, {r}): {got} vs {v}");
        checked += 1;
    }
    assert!(checked > 7000);
}

#[test]
fn rated_is_non_increasing_in_radius() {
    let c = demo_chart();
    for &l in &[30.0, 33.3, 36.0, 40.5] {
        let mut prev = f64::INFINITY;
        let mut r = 5.0;
        while r <= 32.0 {
            if let Ok(v) = c.rated_capacity(l, r) {
                assert!(v <= prev, "L {l} R {r}");
                prev = v;
            }
            r += 0.01;
        }
    }
}

#[test]
fn gross_load_adds_rigging_and_block() {
    let mut m = small_module();
    m.weight = 50.0;
    m.rigging_weight = 3.0;
    assert_eq!(gross_load(&m, &example_spec()), 55.0);
    let mut bare = example_spec();
    bare.hook_block_weight = 0.0;
    m.rigging_weight = 0.0;
    assert_eq!(gross_load(&m, &bare), 50.0);
}

#[test]
fn usage_rises_as_the_boom_comes_down() {
    let spec = example_spec();
    let chart = demo_chart();
    let scene = liftsim_core::load_scene_file(&demo_dir().join("scene.json")).unwrap();
    let base = CraneState::new(0.0, 0.0, 0.0, 0.0, 0.0, 10.0);
    let mut prev = 0.0;
    let mut b = 88.0;
    while b >= 30.0 {
        let u = capacity_or_overload(&chart, &spec, &base.with(Dof::Luff, deg(b)), &scene.module).usage;
        assert!(u >= prev, "luff {b}: {u} < {prev}");
        prev = u;
        b -= 0.05;
    }
}
