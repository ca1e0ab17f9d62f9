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

//! The `check`, `plan` and `replay` subcommands. Each writes JSON to `out`
//! and returns the process exit code.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use anyhow::{Context, Result};
use liftsim_core::path::DEFAULT_RESOLUTION;
use liftsim_core::{check_path, plan_path, replay, LatticeSpec, LiftPath, PlanError, SessionRecord};
use serde_json::json;

use crate::exit;
use crate::inputs::{resolve_state, InputFiles};

pub fn check(files: &InputFiles, path: &Path, resolution: Option<f64>, out: &mut dyn Write) -> Result<u8> {
    let site = files.load()?;
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let lift = LiftPath::from_json(&bytes).with_context(|| format!("loading {}", path.display()))?;
    let resolution = resolution.unwrap_or(DEFAULT_RESOLUTION);
    anyhow::ensure!(resolution > 0.0 && resolution.is_finite(), "resolution must be > 0");
    let report = check_path(&site, &lift, resolution);
    serde_json::to_writer_pretty(&mut *out, &report)?;
    writeln!(out)?;
    Ok(if report.valid { exit::OK } else { exit::VIOLATIONS })
}

pub fn plan(files: &InputFiles, from: &str, to: &str, lattice: Option<&Path>, out: &mut dyn Write) -> Result<u8> {
    let site = files.load()?;
    let start = resolve_state(from, &site.scene)?;
    let goal = resolve_state(to, &site.scene)?;
    let lattice = match lattice {
        Some(p) => {
            let bytes = std::fs::read(p).with_context(|| format!("reading {}", p.display()))?;
            LatticeSpec::from_json(&bytes)?
        }
        None => LatticeSpec::default(),
    };
    match plan_path(&site, start, goal, &lattice) {
        Ok(plan) => {
            serde_json::to_writer_pretty(&mut *out, &plan)?;
            writeln!(out)?;
            Ok(exit::OK)
        }
        Err(e @ (PlanError::NoPath(_) | PlanError::InfeasibleEndpoint { .. })) => {
            serde_json::to_writer_pretty(&mut *out, &json!({ "error": e.to_string() }))?;
            writeln!(out)?;
            Ok(exit::VIOLATIONS)
        }
        Err(e) => Err(e.into()),
    }
}

/// Writes one telemetry frame per line.
pub fn replay_record(files: &InputFiles, record: &Path, out: &mut dyn Write) -> Result<u8> {
    let site = Arc::new(files.load()?);
    let bytes = std::fs::read(record).with_context(|| format!("reading {}", record.display()))?;
    let record = SessionRecord::from_json(&bytes)?;
    for frame in replay(&record, site)? {
        serde_json::to_writer(&mut *out, &frame)?;
        writeln!(out)?;
    }
    Ok(exit::OK)
}
