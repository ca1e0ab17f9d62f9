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

//! Loading the scene, crane and chart files named on the command line.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use liftsim_core::{load_scene_file, CraneSpec, CraneState, DirSource, LoadChart, Scene, Site};

#[derive(Debug, Clone)]
pub struct InputFiles {
    pub scene: PathBuf,
    pub crane: PathBuf,
    pub chart: PathBuf,
}

impl InputFiles {
    pub fn load(&self) -> Result<Site> {
        let scene = load_scene_file(&self.scene).with_context(|| format!("loading {}", self.scene.display()))?;
        let spec = load_crane(&self.crane)?;
        let chart = LoadChart::from_csv_file(&self.chart).with_context(|| format!("loading {}", self.chart.display()))?;
        Site::new(scene, spec, chart).map_err(|e| anyhow!(e))
    }
}

pub fn load_crane(path: &Path) -> Result<CraneSpec> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    CraneSpec::from_json(&bytes, &DirSource::beside(path)).with_context(|| format!("loading {}", path.display()))
}

/// `pick`, `set`, a JSON state inline, or a path to a JSON state file.
pub fn resolve_state(spec: &str, scene: &Scene) -> Result<CraneState> {
    match spec {
        "pick" => return Ok(scene.pick_state),
        "set" => return Ok(scene.set_state),
        _ => {}
    }
    let text = if spec.trim_start().starts_with('{') {
        spec.to_owned()
    } else {
        std::fs::read_to_string(spec).with_context(|| format!("reading state file {spec}"))?
    };
    let value: serde_json::Value = serde_json::from_str(&text).context("state is not JSON")?;
    state_from_value(value)
}

pub fn state_from_value(value: serde_json::Value) -> Result<CraneState> {
    match CraneState::from_json_value(value) {
        Ok(s) if s.is_finite() => Ok(s),
        Ok(_) => bail!("state has a non-finite DOF"),
        Err(e) => bail!("bad state: {e}"),
    }
}
