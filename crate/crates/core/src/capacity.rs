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

//! Load charts and capacity usage.
//!
//! Rated capacity is bilinearly interpolated between chart points. Real
//! manufacturer charts are read stepwise-conservatively; interpolated values
//! here are for live display and are not certified.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kinematics::{operating_radius, CraneSpec, CraneState};
use crate::scene::LiftedModule;

/// Top-left cell of a chart CSV.
pub const CHART_HEADER: &str = "radius_m";

/// Rated capacity grid over (boom length, radius). `None` cells are not rated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadChart {
    pub boom_lengths: Vec<f64>,
    pub radii: Vec<f64>,
    pub rated: Vec<Vec<Option<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChartError {
    #[error("load chart does not parse: {0}")]
    Parse(String),
    #[error("invalid load chart: {0}")]
    Invalid(String),
    #[error("boom length {boom_length} m, radius {radius} m is outside the rated chart")]
    OutOfChart { boom_length: f64, radius: f64 },
}

fn strictly_ascending(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite()) && v.windows(2).all(|w| w[0] < w[1])
}

/// Finds the cell `[i, i+1]` holding `x` and the fraction along it.
/// Single-point axes match only that exact value.
fn locate(axis: &[f64], x: f64) -> Option<(usize, f64)> {
    let first = *axis.first()?;
    let last = *axis.last()?;
    if !(x >= first && x <= last) {
        return None;
    }
    if axis.len() == 1 {
        return Some((0, 0.0));
    }
    let i = match axis.partition_point(|&a| a <= x) {
        0 => 0,
        p if p >= axis.len() => axis.len() - 2,
        p => p - 1,
    };
    Some((i, (x - axis[i]) / (axis[i + 1] - axis[i])))
}

impl LoadChart {
    pub fn new(boom_lengths: Vec<f64>, radii: Vec<f64>, rated: Vec<Vec<Option<f64>>>) -> Result<Self, ChartError> {
        let chart = LoadChart {
            boom_lengths,
            radii,
            rated,
        };
        chart.validate()?;
        Ok(chart)
    }

    pub fn validate(&self) -> Result<(), ChartError> {
        let bad = |m: String| Err(ChartError::Invalid(m));
        if self.boom_lengths.is_empty() || self.radii.is_empty() {
            return bad("chart needs at least one boom length and one radius".into());
        }
        if !strictly_ascending(&self.boom_lengths) || !strictly_ascending(&self.radii) {
            return bad("axes must be finite and strictly ascending".into());
        }
        if self.rated.len() != self.boom_lengths.len() {
            return bad(format!(
                "{} rows for {} boom lengths",
                self.rated.len(),
                self.boom_lengths.len()
            ));
        }
        for (i, row) in self.rated.iter().enumerate() {
            if row.len() != self.radii.len() {
                return bad(format!("row {i} has {} cells for {} radii", row.len(), self.radii.len()));
            }
            let mut prev: Option<f64> = None;
            for (j, cell) in row.iter().enumerate() {
                if let Some(v) = *cell {
                    if !(v > 0.0 && v.is_finite()) {
                        return bad(format!("rated[{i}][{j}] = {v} must be > 0"));
                    }
                    if prev.is_some_and(|p| v > p) {
                        return bad(format!(
                            "boom {} m: capacity rises from {} t to {v} t at radius {} m",
                            self.boom_lengths[i],
                            prev.unwrap(),
                            self.radii[j]
                        ));
                    }
                    prev = Some(v);
                }
            }
        }
        Ok(())
    }

    /// Parses CSV: first row radii (top-left cell `radius_m`), first column
    /// boom lengths, blank cell = not rated.
    pub fn from_csv(text: &str) -> Result<Self, ChartError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let mut rows = reader.records();
        let header = rows
            .next()
            .ok_or_else(|| ChartError::Parse("empty chart".into()))?
            .map_err(|e| ChartError::Parse(e.to_string()))?;
        if header.get(0) != Some(CHART_HEADER) {
            return Err(ChartError::Parse(format!(
                "first cell must be `{CHART_HEADER}`, found {:?}",
                header.get(0).unwrap_or("")
            )));
        }
        let num = |s: &str, what: &str| {
            s.parse::<f64>()
                .map_err(|_| ChartError::Parse(format!("bad {what} {s:?}")))
        };
        let radii = header
            .iter()
            .skip(1)
            .map(|s| num(s, "radius"))
            .collect::<Result<Vec<_>, _>>()?;
        let mut boom_lengths = Vec::new();
        let mut rated = Vec::new();
        for record in rows {
            let record = record.map_err(|e| ChartError::Parse(e.to_string()))?;
            let mut cells = record.iter();
            boom_lengths.push(num(cells.next().unwrap_or(""), "boom length")?);
            let row = cells
                .map(|c| if c.is_empty() { Ok(None) } else { num(c, "capacity").map(Some) })
                .collect::<Result<Vec<_>, _>>()?;
            rated.push(row);
        }
        LoadChart::new(boom_lengths, radii, rated)
    }

    pub fn from_csv_file(path: &Path) -> Result<Self, ChartError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ChartError::Parse(format!("{}: {e}", path.display())))?;
        LoadChart::from_csv(&text)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CHART_HEADER);
        for r in &self.radii {
            out.push_str(&format!(",{r:?}"));
        }
        out.push('\n');
        for (l, row) in self.boom_lengths.iter().zip(&self.rated) {
            out.push_str(&format!("{l:?}"));
            for c in row {
                match c {
                    Some(v) => out.push_str(&format!(",{v:?}")),
                    None => out.push(','),
                }
            }
            out.push('\n');
        }
        out
    }

    /// Bilinear rated capacity in tonnes; exact on grid points.
    ///
    /// Corners that carry zero interpolation weight are ignored, so a query on a
    /// grid line only needs the cells along that line to be rated.
    pub fn rated_capacity(&self, boom_length: f64, radius: f64) -> Result<f64, ChartError> {
        let out = || ChartError::OutOfChart { boom_length, radius };
        let (i, t) = locate(&self.boom_lengths, boom_length).ok_or_else(out)?;
        let (j, s) = locate(&self.radii, radius).ok_or_else(out)?;
        let mut total = 0.0;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for (di, wi) in [(0, 1.0 - t), (1, t)] {
            for (dj, wj) in [(0, 1.0 - s), (1, s)] {
                let w = wi * wj;
                if w == 0.0 {
                    continue;
                }
                let v = self.rated[i + di][j + dj].ok_or_else(out)?;
                total += w * v;
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        // rounding in the weighted sum must not leave the corner range
        Ok(total.clamp(lo, hi))
    }
}

/// Rated capacity, gross load and usage percentage at one crane state.
///
/// Out-of-chart states carry `rated = 0` and `usage = +∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityResult {
    pub rated: f64,
    pub gross_load: f64,
    #[serde(with = "infinite_as_null")]
    pub usage: f64,
}

impl CapacityResult {
    pub fn out_of_chart(gross_load: f64) -> Self {
        CapacityResult {
            rated: 0.0,
            gross_load,
            usage: f64::INFINITY,
        }
    }

    pub fn in_chart(&self) -> bool {
        self.usage.is_finite()
    }
}

mod infinite_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

/// Module + rigging + hook block, in tonnes.
pub fn gross_load(module: &LiftedModule, spec: &CraneSpec) -> f64 {
    module.weight + module.rigging_weight + spec.hook_block_weight
}

pub fn capacity_usage(
    chart: &LoadChart,
    spec: &CraneSpec,
    state: &CraneState,
    module: &LiftedModule,
) -> Result<CapacityResult, ChartError> {
    let gross = gross_load(module, spec);
    let rated = chart.rated_capacity(spec.boom_length, operating_radius(spec, state))?;
    Ok(CapacityResult {
        rated,
        gross_load: gross,
        usage: 100.0 * gross / rated,
    })
}

/// Like [`capacity_usage`] but maps out-of-chart states to the `+∞` sentinel.
pub fn capacity_or_overload(
    chart: &LoadChart,
    spec: &CraneSpec,
    state: &CraneState,
    module: &LiftedModule,
) -> CapacityResult {
    capacity_usage(chart, spec, state, module)
        .unwrap_or_else(|_| CapacityResult::out_of_chart(gross_load(module, spec)))
}
