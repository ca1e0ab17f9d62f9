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

//! Wire messages exchanged with simulation clients over WebSocket.
//!
//! Every message is a JSON envelope `{type, session, seq, payload}`. Replies
//! reuse the request's type and echo its `seq`. Frames carry the tick as `seq`.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::ControlInput;
use crate::kinematics::CraneState;

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageType {
    Hello,
    CreateSession,
    Join,
    Control,
    Frame,
    FullClearanceRequest,
    FullClearanceResponse,
    CheckPath,
    PlanPath,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    #[serde(rename = "type")]
    pub kind: MessageType,
    #[serde(default)]
    pub session: Option<String>,
    #[serde(default)]
    pub seq: u64,
    #[serde(default)]
    pub payload: Value,
}

impl Envelope {
    pub fn new(kind: MessageType, session: Option<String>, seq: u64, payload: impl Serialize) -> Self {
        Envelope {
            kind,
            session,
            seq,
            payload: serde_json::to_value(payload).expect("payloads serialize"),
        }
    }

    pub fn error(session: Option<String>, seq: u64, code: ErrorCode, message: impl Into<String>) -> Self {
        Envelope::new(
            MessageType::Error,
            session,
            seq,
            ErrorPayload {
                code,
                message: message.into(),
            },
        )
    }

    pub fn to_text(&self) -> String {
        serde_json::to_string(self).expect("envelopes serialize")
    }

    pub fn payload_as<T: for<'de> Deserialize<'de>>(&self) -> Result<T, String> {
        serde_json::from_value(self.payload.clone()).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ErrorCode {
    BadRequest,
    UnknownSession,
    DriverTaken,
    NotDriver,
    NotJoined,
    InvalidScene,
    BadTimestep,
    SessionClosed,
    NoPath,
    PlanFailed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorPayload {
    pub code: ErrorCode,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HelloPayload {
    pub protocol: u32,
    pub server: String,
}

/// How a session advances: on a wall-clock timer, or one tick per control message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pacing {
    #[default]
    Realtime,
    Lockstep,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CreateSessionRequest {
    /// Seconds; the server default applies when absent.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub pacing: Pacing,
    /// Inline scene document replacing the server's scene for this session.
    #[serde(default)]
    pub scene: Option<Value>,
    /// Start state; the scene's pick state when absent.
    #[serde(default)]
    pub start: Option<CraneState>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreateSessionReply {
    pub session: String,
    pub dt: f64,
    pub pacing: Pacing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Driver,
    Watcher,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct JoinRequest {
    pub role: Role,
}

/// Driver input. In lockstep pacing each message advances `steps` ticks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlPayload {
    #[serde(default)]
    pub input: ControlInput,
    #[serde(default = "one")]
    pub steps: u32,
}

fn one() -> u32 {
    1
}

/// Path check request. The resolution defaults to the checker's.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckPathRequest {
    pub path: Value,
    #[serde(default)]
    pub resolution: Option<f64>,
}

/// Plan request. Endpoints are states or the names `"pick"`/`"set"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanPathRequest {
    pub from: Value,
    pub to: Value,
    #[serde(default)]
    pub lattice: Option<Value>,
}
