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

//! Session records and bit-exact replay.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{advance, check_dt, telemetry, ControlInput, SessionError, TelemetryFrame};
use crate::kinematics::CraneState;
use crate::site::{InputHashes, Site};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordHeader {
    pub scene_hash: String,
    pub spec_hash: String,
    pub chart_hash: String,
    pub dt: f64,
    pub start: CraneState,
    /// Ticks stepped; the last recorded input is held until here.
    pub ticks: u64,
}

impl RecordHeader {
    pub fn new(site: &Site, dt: f64, start: CraneState) -> Self {
        let InputHashes { scene, spec, chart } = site.hashes();
        RecordHeader {
            scene_hash: scene,
            spec_hash: spec,
            chart_hash: chart,
            dt,
            start,
            ticks: 0,
        }
    }
}

/// The input in effect from `tick` on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecordedInput {
    pub tick: u64,
    pub input: ControlInput,
}

/// Header plus the inputs, stored only on ticks where the input changed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub header: RecordHeader,
    pub inputs: Vec<RecordedInput>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReplayError {
    #[error("{which} hash mismatch: record has {recorded}, inputs give {supplied}")]
    HashMismatch {
        which: &'static str,
        recorded: String,
        supplied: String,
    },
    #[error("record is malformed: {0}")]
    Malformed(String),
    #[error(transparent)]
    Session(#[from] SessionError),
}

impl SessionRecord {
    pub fn new(header: RecordHeader) -> Self {
        SessionRecord {
            header,
            inputs: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("records serialize")
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self, ReplayError> {
        let r: SessionRecord = serde_json::from_slice(bytes).map_err(|e| ReplayError::Malformed(e.to_string()))?;
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<(), ReplayError> {
        let mut last = 0;
        for r in &self.inputs {
            if r.tick <= last {
                return Err(ReplayError::Malformed(format!(
                    "input ticks must be strictly increasing from 1, found {} after {last}",
                    r.tick
                )));
            }
            last = r.tick;
        }
        if last > self.header.ticks {
            return Err(ReplayError::Malformed(format!(
                "input at tick {last} beyond recorded length {}",
                self.header.ticks
            )));
        }
        Ok(())
    }

    /// Input applied on each tick `1..=ticks`.
    pub fn input_at(&self, tick: u64) -> ControlInput {
        match self.inputs.partition_point(|r| r.tick <= tick) {
            0 => ControlInput::default(),
            i => self.inputs[i - 1].input,
        }
    }
}

/// Re-runs a record against `site`, yielding every frame from tick 0.
pub fn replay(record: &SessionRecord, site: Arc<Site>) -> Result<Replay, ReplayError> {
    record.validate()?;
    let h = site.hashes();
    let header = &record.header;
    for (which, recorded, supplied) in [
        ("scene", &header.scene_hash, h.scene),
        ("spec", &header.spec_hash, h.spec),
        ("chart", &header.chart_hash, h.chart),
    ] {
        if *recorded != supplied {
            return Err(ReplayError::HashMismatch {
                which,
                recorded: recorded.clone(),
                supplied,
            });
        }
    }
    check_dt(header.dt)?;
    Ok(Replay {
        site,
        record: record.clone(),
        tick: 0,
        state: header.start,
        started: false,
    })
}

/// Iterator over replayed frames.
pub struct Replay {
    site: Arc<Site>,
    record: SessionRecord,
    tick: u64,
    state: CraneState,
    started: bool,
}

impl Iterator for Replay {
    type Item = TelemetryFrame;

    fn next(&mut self) -> Option<TelemetryFrame> {
        let dt = self.record.header.dt;
        if !self.started {
            self.started = true;
            let (state, clamped) = crate::kinematics::clamp_state_reporting(&self.site.spec, &self.state);
            self.state = state;
            return Some(telemetry(&self.site, 0, dt, &self.state, &clamped));
        }
        if self.tick >= self.record.header.ticks {
            return None;
        }
        self.tick += 1;
        let input = self.record.input_at(self.tick);
        let (state, clamped) = advance(&self.site.spec, &self.state, &input, dt);
        self.state = state;
        Some(telemetry(&self.site, self.tick, dt, &self.state, &clamped))
    }
}
