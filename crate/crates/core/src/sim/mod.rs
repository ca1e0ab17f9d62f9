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

//! Fixed-timestep crane simulation: rate commands in, telemetry frames out.
//!
//! The engine never reads a clock. A session advances only when stepped, so the
//! same inputs always give the same frames.

pub mod protocol;
pub mod record;

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::capacity::{CapacityResult, LoadChart};
use crate::clearance::{ClearanceCode, ClearanceRecord};
use crate::kinematics::{clamp_state_reporting, ComponentPoses, CraneSpec, CraneState, Dof};
use crate::scene::{Issue, Scene};
use crate::site::{Site, SiteError};

pub use record::{replay, RecordHeader, RecordedInput, ReplayError, SessionRecord};

/// Smallest accepted timestep (120 Hz).
pub const MIN_DT: f64 = 1.0 / 120.0;
/// Largest accepted timestep (20 Hz).
pub const MAX_DT: f64 = 1.0 / 20.0;
/// Clearance records carried per frame.
pub const FRAME_CLEARANCES: usize = 8;
/// Hook within this distance of the minimum hoist length raises TWO_BLOCK.
pub const TWO_BLOCK_MARGIN: f64 = 0.5;

/// Commanded rate per DOF as a fraction of the crane's maximum rate.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ControlInput {
    pub tx: f64,
    pub ty: f64,
    pub heading: f64,
    pub swing: f64,
    pub luff: f64,
    pub hoist: f64,
}

impl ControlInput {
    pub fn get(&self, dof: Dof) -> f64 {
        match dof {
            Dof::Tx => self.tx,
            Dof::Ty => self.ty,
            Dof::Heading => self.heading,
            Dof::Swing => self.swing,
            Dof::Luff => self.luff,
            Dof::Hoist => self.hoist,
        }
    }

    pub fn set(&mut self, dof: Dof, v: f64) {
        match dof {
            Dof::Tx => self.tx = v,
            Dof::Ty => self.ty = v,
            Dof::Heading => self.heading = v,
            Dof::Swing => self.swing = v,
            Dof::Luff => self.luff = v,
            Dof::Hoist => self.hoist = v,
        }
    }

    pub fn only(dof: Dof, fraction: f64) -> Self {
        let mut c = ControlInput::default();
        c.set(dof, fraction);
        c
    }

    /// Every fraction clamped to `[-1, 1]`; NaN becomes 0.
    pub fn clamped(&self) -> Self {
        let mut c = *self;
        for dof in Dof::ALL {
            let v = self.get(dof);
            c.set(dof, if v.is_nan() { 0.0 } else { v.clamp(-1.0, 1.0) });
        }
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RiskFlag {
    Overload,
    NearCapacity,
    ClearanceRed,
    ClearanceYellow,
    DofLimit,
    TwoBlock,
}

pub type RiskFlags = BTreeSet<RiskFlag>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TelemetryFrame {
    pub tick: u64,
    pub sim_time: f64,
    pub state: CraneState,
    pub poses: ComponentPoses,
    pub capacity: CapacityResult,
    /// Closest pairs, ascending by distance, at most [`FRAME_CLEARANCES`].
    pub clearances: Vec<ClearanceRecord>,
    pub min_clearance: Option<ClearanceRecord>,
    pub flags: RiskFlags,
}

impl TelemetryFrame {
    pub fn has(&self, flag: RiskFlag) -> bool {
        self.flags.contains(&flag)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SessionError {
    #[error("scene is invalid: {}", .0.iter().map(|i| i.message.as_str()).collect::<Vec<_>>().join("; "))]
    InvalidScene(Vec<Issue>),
    #[error("timestep {0} s is outside [1/120, 1/20] s")]
    BadTimestep(f64),
    #[error("session is closed")]
    SessionClosed,
    #[error("{0}")]
    Site(String),
}

impl From<SiteError> for SessionError {
    fn from(e: SiteError) -> Self {
        match e {
            SiteError::InvalidScene { issues } => SessionError::InvalidScene(issues),
            other => SessionError::Site(other.to_string()),
        }
    }
}

/// Telemetry for `state` at `tick`; `clamped` lists DOFs stopped by a limit this tick.
pub fn telemetry(site: &Site, tick: u64, dt: f64, state: &CraneState, clamped: &[Dof]) -> TelemetryFrame {
    let eval = site.evaluate_nearest(state, FRAME_CLEARANCES);
    let mut flags = RiskFlags::new();
    let usage = eval.capacity.usage;
    if !(usage < 100.0) {
        flags.insert(RiskFlag::Overload);
    }
    if !(usage < 90.0) {
        flags.insert(RiskFlag::NearCapacity);
    }
    let min_clearance = eval.min_clearance().cloned();
    match min_clearance.as_ref().map(|r| r.code) {
        Some(ClearanceCode::Red) => {
            flags.insert(RiskFlag::ClearanceRed);
        }
        Some(ClearanceCode::Yellow) => {
            flags.insert(RiskFlag::ClearanceYellow);
        }
        _ => {}
    }
    if !clamped.is_empty() {
        flags.insert(RiskFlag::DofLimit);
    }
    if state.hoist <= site.spec.limits.hoist.min + TWO_BLOCK_MARGIN {
        flags.insert(RiskFlag::TwoBlock);
    }
    TelemetryFrame {
        tick,
        sim_time: tick as f64 * dt,
        state: *state,
        poses: eval.poses,
        capacity: eval.capacity,
        clearances: eval.clearances,
        min_clearance,
        flags,
    }
}

/// One live simulation. Owns its state; share the [`Site`] between sessions.
#[derive(Debug)]
pub struct Session {
    site: Arc<Site>,
    dt: f64,
    tick: u64,
    state: CraneState,
    last_input: ControlInput,
    record: SessionRecord,
    closed: bool,
}

impl Session {
    /// Builds a site from the inputs and starts at the scene's pick state.
    pub fn create(scene: Scene, spec: CraneSpec, chart: LoadChart, dt: f64) -> Result<(Session, TelemetryFrame), SessionError> {
        check_dt(dt)?;
        let site = Site::new(scene, spec, chart)?;
        Session::start(Arc::new(site), dt)
    }

    /// Starts a session on an already validated site.
    pub fn start(site: Arc<Site>, dt: f64) -> Result<(Session, TelemetryFrame), SessionError> {
        let start = site.scene.pick_state;
        Session::start_at(site, dt, start)
    }

    pub fn start_at(site: Arc<Site>, dt: f64, start: CraneState) -> Result<(Session, TelemetryFrame), SessionError> {
        check_dt(dt)?;
        let (state, clamped) = clamp_state_reporting(&site.spec, &start);
        let record = SessionRecord::new(RecordHeader::new(&site, dt, state));
        let frame = telemetry(&site, 0, dt, &state, &clamped);
        let session = Session {
            site,
            dt,
            tick: 0,
            state,
            last_input: ControlInput::default(),
            record,
            closed: false,
        };
        Ok((session, frame))
    }

    pub fn site(&self) -> &Arc<Site> {
        &self.site
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn state(&self) -> &CraneState {
        &self.state
    }

    pub fn record(&self) -> &SessionRecord {
        &self.record
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Integrates one tick of `input` and returns the new frame.
    pub fn step(&mut self, input: &ControlInput) -> Result<TelemetryFrame, SessionError> {
        if self.closed {
            return Err(SessionError::SessionClosed);
        }
        let input = input.clamped();
        self.tick += 1;
        if input != self.last_input {
            self.record.inputs.push(RecordedInput { tick: self.tick, input });
            self.last_input = input;
        }
        self.record.header.ticks = self.tick;
        let (state, clamped) = advance(&self.site.spec, &self.state, &input, self.dt);
        self.state = state;
        Ok(telemetry(&self.site, self.tick, self.dt, &self.state, &clamped))
    }

    /// Current frame without advancing.
    pub fn frame(&self) -> TelemetryFrame {
        telemetry(&self.site, self.tick, self.dt, &self.state, &[])
    }

    /// Ends the session and hands back its record.
    pub fn close(&mut self) -> SessionRecord {
        self.closed = true;
        self.record.clone()
    }
}

pub fn check_dt(dt: f64) -> Result<(), SessionError> {
    // 1/120 and 1/20 are accepted however the caller spelled them
    if dt >= MIN_DT * (1.0 - 1e-12) && dt <= MAX_DT * (1.0 + 1e-12) {
        Ok(())
    } else {
        Err(SessionError::BadTimestep(dt))
    }
}

/// `clamp(state + fraction · max_rate · dt)` per DOF.
pub fn advance(spec: &CraneSpec, state: &CraneState, input: &ControlInput, dt: f64) -> (CraneState, Vec<Dof>) {
    let mut next = *state;
    for dof in Dof::ALL {
        next.set(dof, state.get(dof) + input.get(dof) * spec.rates.get(dof) * dt);
    }
    clamp_state_reporting(spec, &next)
}
