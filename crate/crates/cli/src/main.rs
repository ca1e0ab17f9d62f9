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

use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use liftsim::inputs::InputFiles;
use liftsim::server::{self, ServerConfig};
use liftsim::{commands, exit};

#[derive(Parser)]
#[command(name = "liftsim", version, about = "Mobile crane lift planning simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Inputs {
    /// Scene document (JSON).
    #[arg(long)]
    scene: PathBuf,
    /// Crane specification (JSON).
    #[arg(long)]
    crane: PathBuf,
    /// Load chart (CSV).
    #[arg(long)]
    chart: PathBuf,
}

impl Inputs {
    fn files(&self) -> InputFiles {
        InputFiles {
            scene: self.scene.clone(),
            crane: self.crane.clone(),
            chart: self.chart.clone(),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check a lift path for limit, collision and capacity violations.
    Check {
        #[command(flatten)]
        inputs: Inputs,
        /// Path document: a JSON list of waypoint states.
        #[arg(long)]
        path: PathBuf,
        /// Largest motion of any crane point between samples, in meters.
        #[arg(long)]
        resolution: Option<f64>,
    },
    /// Plan a collision-free lift between two states.
    Plan {
        #[command(flatten)]
        inputs: Inputs,
        /// `pick`, `set`, a state JSON file or inline JSON.
        #[arg(long, default_value = "pick")]
        from: String,
        #[arg(long, default_value = "set")]
        to: String,
        /// Lattice document (steps, active DOFs, weights).
        #[arg(long)]
        lattice: Option<PathBuf>,
    },
    /// Serve interactive sessions over WebSocket.
    Serve {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        /// Default timestep in seconds.
        #[arg(long, default_value_t = 1.0 / 30.0)]
        dt: f64,
        /// Write session records here.
        #[arg(long)]
        record_dir: Option<PathBuf>,
        /// Serve a static client bundle from this directory.
        #[arg(long = "static")]
        static_dir: Option<PathBuf>,
    },
    /// Re-run a session record and print its frames as JSON lines.
    Replay {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        record: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let result = match cli.command {
        Command::Check { inputs, path, resolution } => commands::check(&inputs.files(), &path, resolution, &mut out),
        Command::Plan {
            inputs,
            from,
            to,
            lattice,
        } => commands::plan(&inputs.files(), &from, &to, lattice.as_deref(), &mut out),
        Command::Replay { inputs, record } => commands::replay_record(&inputs.files(), &record, &mut out),
        Command::Serve {
            inputs,
            port,
            host,
            dt,
            record_dir,
            static_dir,
        } => serve(inputs.files(), SocketAddr::new(host, port), dt, record_dir, static_dir),
    };
    let _ = out.flush();
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit::ERROR)
        }
    }
}

fn serve(
    files: InputFiles,
    addr: SocketAddr,
    dt: f64,
    record_dir: Option<PathBuf>,
    static_dir: Option<PathBuf>,
) -> anyhow::Result<u8> {
    tracing_subscriber::fmt().with_writer(std::io::stderr).init();
    liftsim_core::sim::check_dt(dt)?;
    let site = Arc::new(files.load()?);
    let config = ServerConfig {
        site,
        dt,
        record_dir,
        static_dir,
    };
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| anyhow::anyhow!("cannot bind {addr}: {e}"))?;
        server::run(listener, config).await?;
        Ok(exit::OK)
    })
}
