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

//! WebSocket session server.
//!
//! Each session runs in its own task that owns the [`Session`] and reads an
//! ordered mailbox. Frames are serialized once and fanned out to every joined
//! client through a broadcast channel. One driver per session; any number of
//! watchers.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::IntoResponse;
use axum::routing::get;
use axum::{Json, Router};
use futures::{SinkExt, StreamExt};
use liftsim_core::path::DEFAULT_RESOLUTION;
use liftsim_core::sim::protocol::{
    CheckPathRequest, ControlPayload, CreateSessionReply, CreateSessionRequest, Envelope, ErrorCode, HelloPayload,
    JoinRequest, MessageType, Pacing, PlanPathRequest, Role, PROTOCOL_VERSION,
};
use liftsim_core::{
    check_path, load_scene, plan_path, ControlInput, LatticeSpec, LiftPath, NoFiles, PlanError, Session,
    SessionError, Site,
};
use serde_json::{json, Value};
use tokio::net::TcpListener;
use tokio::sync::{broadcast, mpsc, oneshot};
use tokio::task::JoinHandle;
use tracing::{info, warn};

/// Longest lockstep burst one control message may request.
pub const MAX_STEPS_PER_MESSAGE: u32 = 10_000;

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub site: Arc<Site>,
    /// Timestep for sessions that do not ask for one.
    pub dt: f64,
    /// Session records are written here when a driver leaves.
    pub record_dir: Option<PathBuf>,
    /// Static client bundle served at `/`.
    pub static_dir: Option<PathBuf>,
}

type FrameText = (u64, Arc<str>);

enum Command {
    Control { input: ControlInput, steps: u32 },
    FullClearance(oneshot::Sender<Value>),
    DriverLeft,
}

struct SessionHandle {
    id: String,
    site: Arc<Site>,
    mailbox: mpsc::UnboundedSender<Command>,
    frames: broadcast::Sender<FrameText>,
    latest: Mutex<FrameText>,
    driver: Mutex<Option<u64>>,
}

struct Shared {
    config: ServerConfig,
    sessions: Mutex<HashMap<String, Arc<SessionHandle>>>,
    next_session: AtomicU64,
    next_conn: AtomicU64,
}

#[derive(Clone)]
struct AppState(Arc<Shared>);

pub fn router(config: ServerConfig) -> Router {
    let static_dir = config.static_dir.clone();
    let state = AppState(Arc::new(Shared {
        config,
        sessions: Mutex::new(HashMap::new()),
        next_session: AtomicU64::new(1),
        next_conn: AtomicU64::new(1),
    }));
    let app = Router::new()
        .route("/ws", get(ws_upgrade))
        .route("/api/scene", get(scene_document))
        .with_state(state);
    match static_dir {
        Some(dir) => app.fallback_service(tower_http::services::ServeDir::new(dir)),
        None => app,
    }
}

/// Serves until the listener fails.
pub async fn run(listener: TcpListener, config: ServerConfig) -> std::io::Result<()> {
    let addr = listener.local_addr()?;
    info!(%addr, "liftsim server listening");
    axum::serve(listener, router(config)).await
}

/// Binds `addr` and serves in the background; returns the bound address.
pub async fn spawn(addr: SocketAddr, config: ServerConfig) -> std::io::Result<(SocketAddr, JoinHandle<()>)> {
    let listener = TcpListener::bind(addr).await?;
    let local = listener.local_addr()?;
    let task = tokio::spawn(async move {
        if let Err(e) = run(listener, config).await {
            warn!("server stopped: {e}");
        }
    });
    Ok((local, task))
}

async fn scene_document(State(state): State<AppState>) -> impl IntoResponse {
    let site = &state.0.config.site;
    Json(json!({
        "scene": site.scene,
        "crane": site.spec,
        "chart": site.chart,
        "hashes": site.hashes(),
    }))
}

async fn ws_upgrade(ws: WebSocketUpgrade, State(state): State<AppState>) -> impl IntoResponse {
    ws.on_upgrade(move |socket| connection(socket, state))
}

fn frame_text(session: &str, frame: &liftsim_core::TelemetryFrame) -> FrameText {
    let text = Envelope::new(MessageType::Frame, Some(session.to_owned()), frame.tick, frame).to_text();
    (frame.tick, text.into())
}

fn write_record(dir: &Option<PathBuf>, id: &str, session: &Session) {
    let Some(dir) = dir else { return };
    let path = dir.join(format!("{id}.json"));
    if let Err(e) = std::fs::create_dir_all(dir).and_then(|_| std::fs::write(&path, session.record().to_json())) {
        warn!("cannot write {}: {e}", path.display());
    }
}

async fn run_session(
    handle: Arc<SessionHandle>,
    mut session: Session,
    pacing: Pacing,
    mut mailbox: mpsc::UnboundedReceiver<Command>,
    record_dir: Option<PathBuf>,
) {
    let publish = |session: &mut Session, input: &ControlInput| match session.step(input) {
        Ok(frame) => {
            let text = frame_text(&handle.id, &frame);
            *handle.latest.lock().unwrap() = text.clone();
            let _ = handle.frames.send(text);
        }
        Err(e) => warn!(session = %handle.id, "step failed: {e}"),
    };
    let full_report = |session: &Session| {
        let eval = session.site().evaluate(session.state());
        json!({ "tick": session.tick(), "clearances": eval.clearances })
    };
    match pacing {
        Pacing::Lockstep => {
            while let Some(cmd) = mailbox.recv().await {
                match cmd {
                    Command::Control { input, steps } => {
                        for _ in 0..steps {
                            publish(&mut session, &input);
                        }
                    }
                    Command::FullClearance(reply) => {
                        let _ = reply.send(full_report(&session));
                    }
                    Command::DriverLeft => write_record(&record_dir, &handle.id, &session),
                }
            }
        }
        Pacing::Realtime => {
            let mut clock = tokio::time::interval(Duration::from_secs_f64(session.dt()));
            clock.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Delay);
            let mut held = ControlInput::default();
            loop {
                tokio::select! {
                    _ = clock.tick() => publish(&mut session, &held),
                    cmd = mailbox.recv() => match cmd {
                        None => break,
                        // last writer wins within a tick
                        Some(Command::Control { input, .. }) => held = input,
                        Some(Command::FullClearance(reply)) => {
                            let _ = reply.send(full_report(&session));
                        }
                        Some(Command::DriverLeft) => {
                            held = ControlInput::default();
                            write_record(&record_dir, &handle.id, &session);
                        }
                    },
                }
            }
        }
    }
    write_record(&record_dir, &handle.id, &session);
}

struct Connection {
    id: u64,
    state: AppState,
    out: mpsc::UnboundedSender<Arc<str>>,
    joined: HashMap<String, (Role, JoinHandle<()>)>,
}

async fn connection(socket: WebSocket, state: AppState) {
    let (mut sink, mut stream) = socket.split();
    let (out, mut out_rx) = mpsc::unbounded_channel::<Arc<str>>();
    let writer = tokio::spawn(async move {
        while let Some(text) = out_rx.recv().await {
            if sink.send(Message::Text(text.as_ref().into())).await.is_err() {
                break;
            }
        }
    });
    let mut conn = Connection {
        id: state.0.next_conn.fetch_add(1, Ordering::Relaxed),
        state,
        out,
        joined: HashMap::new(),
    };
    conn.send(Envelope::new(
        MessageType::Hello,
        None,
        0,
        HelloPayload {
            protocol: PROTOCOL_VERSION,
            server: format!("liftsim {}", env!("CARGO_PKG_VERSION")),
        },
    ));
    while let Some(Ok(msg)) = stream.next().await {
        match msg {
            Message::Text(text) => conn.handle(text.as_str()).await,
            Message::Close(_) => break,
            _ => {}
        }
    }
    conn.leave_all();
    drop(conn);
    let _ = writer.await;
}

impl Connection {
    fn send(&self, e: Envelope) {
        let _ = self.out.send(e.to_text().into());
    }

    fn error(&self, session: Option<String>, seq: u64, code: ErrorCode, message: impl Into<String>) {
        self.send(Envelope::error(session, seq, code, message));
    }

    fn session(&self, id: &Option<String>) -> Option<Arc<SessionHandle>> {
        let id = id.as_ref()?;
        self.state.0.sessions.lock().unwrap().get(id).cloned()
    }

    async fn handle(&mut self, text: &str) {
        let env: Envelope = match serde_json::from_str(text) {
            Ok(e) => e,
            Err(e) => return self.error(None, 0, ErrorCode::BadRequest, format!("bad envelope: {e}")),
        };
        let (sid, seq) = (env.session.clone(), env.seq);
        match env.kind {
            MessageType::Hello => self.send(Envelope::new(
                MessageType::Hello,
                None,
                seq,
                HelloPayload {
                    protocol: PROTOCOL_VERSION,
                    server: format!("liftsim {}", env!("CARGO_PKG_VERSION")),
                },
            )),
            MessageType::CreateSession => match env.payload_as::<Option<CreateSessionRequest>>() {
                Ok(req) => self.create(seq, req.unwrap_or_default()),
                Err(e) => self.error(sid, seq, ErrorCode::BadRequest, e),
            },
            MessageType::Join => match env.payload_as::<JoinRequest>() {
                Ok(req) => self.join(sid, seq, req.role),
                Err(e) => self.error(sid, seq, ErrorCode::BadRequest, e),
            },
            MessageType::Control => match env.payload_as::<ControlPayload>() {
                Ok(c) => self.control(sid, seq, c),
                Err(e) => self.error(sid, seq, ErrorCode::BadRequest, e),
            },
            MessageType::FullClearanceRequest => {
                let Some(handle) = self.joined_session(&sid, seq) else { return };
                let (tx, rx) = oneshot::channel();
                let _ = handle.mailbox.send(Command::FullClearance(tx));
                match rx.await {
                    Ok(report) => self.send(Envelope::new(MessageType::FullClearanceResponse, sid, seq, report)),
                    Err(_) => self.error(sid, seq, ErrorCode::SessionClosed, "session ended"),
                }
            }
            MessageType::CheckPath => match env.payload_as::<CheckPathRequest>() {
                Ok(req) => self.check(sid, seq, req).await,
                Err(e) => self.error(sid, seq, ErrorCode::BadRequest, e),
            },
            MessageType::PlanPath => match env.payload_as::<PlanPathRequest>() {
                Ok(req) => self.plan(sid, seq, req).await,
                Err(e) => self.error(sid, seq, ErrorCode::BadRequest, e),
            },
            MessageType::Frame | MessageType::FullClearanceResponse | MessageType::Error => {
                self.error(sid, seq, ErrorCode::BadRequest, "message type is server-to-client only")
            }
        }
    }

    fn joined_session(&self, sid: &Option<String>, seq: u64) -> Option<Arc<SessionHandle>> {
        match self.session(sid) {
            Some(h) if self.joined.contains_key(&h.id) => Some(h),
            Some(_) => {
                self.error(sid.clone(), seq, ErrorCode::NotJoined, "join the session first");
                None
            }
            None => {
                self.error(sid.clone(), seq, ErrorCode::UnknownSession, "no such session");
                None
            }
        }
    }

    fn create(&mut self, seq: u64, req: CreateSessionRequest) {
        let shared = &self.state.0;
        let base = &shared.config.site;
        let site = match req.scene {
            None => Ok(base.clone()),
            Some(doc) => load_scene(&serde_json::to_vec(&doc).unwrap_or_default(), &NoFiles)
                .map_err(|e| (ErrorCode::InvalidScene, e.to_string()))
                .and_then(|scene| {
                    Site::new(scene, base.spec.clone(), base.chart.clone())
                        .map(Arc::new)
                        .map_err(|e| (ErrorCode::InvalidScene, e.to_string()))
                }),
        };
        let site = match site {
            Ok(s) => s,
            Err((code, msg)) => return self.error(None, seq, code, msg),
        };
        let dt = req.dt.unwrap_or(shared.config.dt);
        let start = req.start.unwrap_or(site.scene.pick_state);
        let (session, first) = match Session::start_at(site.clone(), dt, start) {
            Ok(s) => s,
            Err(SessionError::BadTimestep(dt)) => {
                return self.error(None, seq, ErrorCode::BadTimestep, format!("timestep {dt} s outside [1/120, 1/20]"))
            }
            Err(e) => return self.error(None, seq, ErrorCode::InvalidScene, e.to_string()),
        };
        let id = format!("s{}", shared.next_session.fetch_add(1, Ordering::Relaxed));
        let (mailbox, rx) = mpsc::unbounded_channel();
        let (frames, _) = broadcast::channel(4096);
        let handle = Arc::new(SessionHandle {
            id: id.clone(),
            site,
            mailbox,
            frames,
            latest: Mutex::new(frame_text(&id, &first)),
            driver: Mutex::new(None),
        });
        shared.sessions.lock().unwrap().insert(id.clone(), handle.clone());
        tokio::spawn(run_session(handle, session, req.pacing, rx, shared.config.record_dir.clone()));
        info!(session = %id, dt, ?req.pacing, "session created");
        self.send(Envelope::new(
            MessageType::CreateSession,
            Some(id.clone()),
            seq,
            CreateSessionReply {
                session: id,
                dt,
                pacing: req.pacing,
            },
        ));
    }

    fn join(&mut self, sid: Option<String>, seq: u64, role: Role) {
        let Some(handle) = self.session(&sid) else {
            return self.error(sid, seq, ErrorCode::UnknownSession, "no such session");
        };
        if self.joined.contains_key(&handle.id) {
            return self.error(sid, seq, ErrorCode::BadRequest, "already joined");
        }
        if role == Role::Driver {
            let mut driver = handle.driver.lock().unwrap();
            if driver.is_some() {
                return self.error(sid, seq, ErrorCode::DriverTaken, "session already has a driver");
            }
            *driver = Some(self.id);
        }
        self.send(Envelope::new(MessageType::Join, sid, seq, json!({ "role": role })));

        // subscribe before reading the latest frame so nothing falls in between
        let mut rx = handle.frames.subscribe();
        let (mut last, latest) = handle.latest.lock().unwrap().clone();
        let _ = self.out.send(latest);
        let out = self.out.clone();
        let forward = tokio::spawn(async move {
            loop {
                match rx.recv().await {
                    Ok((tick, text)) if tick > last => {
                        last = tick;
                        if out.send(text).is_err() {
                            break;
                        }
                    }
                    Ok(_) => {}
                    Err(broadcast::error::RecvError::Lagged(n)) => warn!("watcher skipped {n} frames"),
                    Err(broadcast::error::RecvError::Closed) => break,
                }
            }
        });
        self.joined.insert(handle.id.clone(), (role, forward));
    }

    fn control(&self, sid: Option<String>, seq: u64, c: ControlPayload) {
        let Some(handle) = self.joined_session(&sid, seq) else { return };
        if *handle.driver.lock().unwrap() != Some(self.id) {
            return self.error(sid, seq, ErrorCode::NotDriver, "only the driver may send controls");
        }
        if c.steps > MAX_STEPS_PER_MESSAGE {
            return self.error(sid, seq, ErrorCode::BadRequest, format!("at most {MAX_STEPS_PER_MESSAGE} steps"));
        }
        let _ = handle.mailbox.send(Command::Control {
            input: c.input.clamped(),
            steps: c.steps,
        });
    }

    fn target_site(&self, sid: &Option<String>) -> Arc<Site> {
        self.session(sid)
            .map(|h| h.site.clone())
            .unwrap_or_else(|| self.state.0.config.site.clone())
    }

    async fn check(&self, sid: Option<String>, seq: u64, req: CheckPathRequest) {
        let site = self.target_site(&sid);
        let path = match LiftPath::from_json(&serde_json::to_vec(&req.path).unwrap_or_default()) {
            Ok(p) => p,
            Err(e) => return self.error(sid, seq, ErrorCode::BadRequest, e.to_string()),
        };
        let resolution = req.resolution.unwrap_or(DEFAULT_RESOLUTION);
        if !(resolution > 0.0 && resolution.is_finite()) {
            return self.error(sid, seq, ErrorCode::BadRequest, "resolution must be > 0");
        }
        match tokio::task::spawn_blocking(move || check_path(&site, &path, resolution)).await {
            Ok(report) => self.send(Envelope::new(MessageType::CheckPath, sid, seq, report)),
            Err(e) => self.error(sid, seq, ErrorCode::BadRequest, e.to_string()),
        }
    }

    async fn plan(&self, sid: Option<String>, seq: u64, req: PlanPathRequest) {
        let site = self.target_site(&sid);
        let endpoint = |v: &Value| match v.as_str() {
            Some("pick") => Ok(site.scene.pick_state),
            Some("set") => Ok(site.scene.set_state),
            _ => crate::inputs::state_from_value(v.clone()).map_err(|e| e.to_string()),
        };
        let (start, goal) = match (endpoint(&req.from), endpoint(&req.to)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => return self.error(sid, seq, ErrorCode::BadRequest, e),
        };
        let lattice = match req.lattice {
            None => LatticeSpec::default(),
            Some(v) => match LatticeSpec::from_json(&serde_json::to_vec(&v).unwrap_or_default()) {
                Ok(l) => l,
                Err(e) => return self.error(sid, seq, ErrorCode::BadRequest, e.to_string()),
            },
        };
        let result = tokio::task::spawn_blocking(move || plan_path(&site, start, goal, &lattice)).await;
        match result {
            Ok(Ok(plan)) => self.send(Envelope::new(MessageType::PlanPath, sid, seq, plan)),
            Ok(Err(e @ (PlanError::NoPath(_) | PlanError::InfeasibleEndpoint { .. }))) => {
                self.error(sid, seq, ErrorCode::NoPath, e.to_string())
            }
            Ok(Err(e)) => self.error(sid, seq, ErrorCode::PlanFailed, e.to_string()),
            Err(e) => self.error(sid, seq, ErrorCode::PlanFailed, e.to_string()),
        }
    }

    fn leave_all(&mut self) {
        for (id, (role, forward)) in self.joined.drain() {
            forward.abort();
            if role != Role::Driver {
                continue;
            }
            if let Some(handle) = self.state.0.sessions.lock().unwrap().get(&id) {
                let mut driver = handle.driver.lock().unwrap();
                if *driver == Some(self.id) {
                    *driver = None;
                    let _ = handle.mailbox.send(Command::DriverLeft);
                }
            }
        }
    }
}
