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

//! Command-line front end and WebSocket session server for liftsim.

pub mod commands;
pub mod inputs;
pub mod server;

/// Process exit codes shared by every subcommand.
pub mod exit {
    /// Path valid, plan found, replay done.
    pub const OK: u8 = 0;
    pub const ERROR: u8 = 1;
    /// Path has violations, or no plan exists.
    pub const VIOLATIONS: u8 = 2;
}
