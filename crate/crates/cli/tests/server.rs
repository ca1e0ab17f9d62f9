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

//! Protocol round trips against a live server on an ephemeral port.

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use futures::{SinkExt, StreamExt};
use liftsim::inputs::InputFiles;
use liftsim::server::{spawn, ServerConfig};
use liftsim_core::sim::protocol::{Envelope, MessageType};
use liftsim_core::{ControlInput, Dof, Session, Site};
use serde_json::{json, Value};
use tokio::net::TcpStream;
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::{connect_async, MaybeTlsStream, WebSocketStream};

type Ws = WebSocketStream<MaybeTlsStream<TcpStream>>;

fn demo_site() -> Arc<Site> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../demo");
    let files = InputFiles {
        scene: dir.join("scene.json"),
        crane: dir.join("crane.json"),
        chart: dir.join("chart.csv"),
    };
    Arc::new(files.load().unwrap())
}

async fn start(site: Arc<Site>) -> String {
    let config = ServerConfig {
        site,
        dt: 0.02,
        record_dir: None,
        static_dir: None,
    };
    let (addr, _) = spawn("127.0.0.1:0".parse().unwrap(), config).await.unwrap();
    format!("ws://{addr}/ws")
}

async fn connect(url: &str) -> Ws {
    let (mut ws, _) = connect_async(url).await.unwrap();
    let hello = recv(&mut ws).await;
    assert_eq!(hello.kind, MessageType::Hello);
    ws
}

async fn send(ws: &mut Ws, kind: &str, session: Option<&str>, seq: u64, payload: Value) {
    let text = json!({"type": kind, "session": session, "seq": seq, "payload": payload}).to_string();
    ws.send(Message::Text(text.into())).await.unwrap();
}

async fn recv(ws: &mut Ws) -> Envelope {
    loop {
        let msg = tokio::time::timeout(Duration::from_secs(20), ws.next())
            .await
            .expect("server answered in time")
            .unwrap()
            .unwrap();
        if let Message::Text(t) = msg {
            return serde_json::from_str(t.as_str()).unwrap();
        }
    }
}

async fn create_lockstep(ws: &mut Ws) -> String {
    send(ws, "create_session", None, 1, json!({"dt": 0.02, "pacing": "lockstep"})).await;
    let reply = recv(ws).await;
    assert_eq!(reply.kind, MessageType::CreateSession, "{reply:?}");
    reply.payload["session"].as_str().unwrap().to_owned()
}

async fn join(ws: &mut Ws, id: &str, role: &str) -> Envelope {
    send(ws, "join", Some(id), 2, json!({"role": role})).await;
    let reply = recv(ws).await;
    if reply.kind == MessageType::Join {
        let first = recv(ws).await;
        assert_eq!(first.kind, MessageType::Frame);
        assert_eq!(first.seq, 0);
    }
    reply
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn frame_round_trip_matches_direct_call() {
    let site = demo_site();
    let url = start(site.clone()).await;
    let mut ws = connect(&url).await;
    let id = create_lockstep(&mut ws).await;
    assert_eq!(join(&mut ws, &id, "driver").await.kind, MessageType::Join);
    send(&mut ws, "control", Some(&id), 3, json!({"input": {"swing": 0.5, "hoist": -0.25}})).await;
    let frame = recv(&mut ws).await;
    assert_eq!(frame.kind, MessageType::Frame);
    assert_eq!(frame.seq, 1);

    let (mut direct, _) = Session::start(site, 0.02).unwrap();
    let mut input = ControlInput::only(Dof::Swing, 0.5);
    input.hoist = -0.25;
    let expected = serde_json::to_value(direct.step(&input).unwrap()).unwrap();
    assert_eq!(frame.payload, expected);

    send(&mut ws, "full_clearance_request", Some(&id), 4, Value::Null).await;
    let full = recv(&mut ws).await;
    assert_eq!(full.kind, MessageType::FullClearanceResponse);
    assert_eq!(full.seq, 4);
    assert_eq!(full.payload["tick"], 1);
    assert_eq!(full.payload["clearances"].as_array().unwrap().len(), 3 * 5);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn second_driver_is_rejected() {
    let url = start(demo_site()).await;
    let mut a = connect(&url).await;
    let mut b = connect(&url).await;
    let id = create_lockstep(&mut a).await;
    assert_eq!(join(&mut a, &id, "driver").await.kind, MessageType::Join);
    let refused = join(&mut b, &id, "driver").await;
    assert_eq!(refused.kind, MessageType::Error);
    assert_eq!(refused.payload["code"], "DRIVER_TAKEN");
    // a watcher may not steer
    assert_eq!(join(&mut b, &id, "watcher").await.kind, MessageType::Join);
    send(&mut b, "control", Some(&id), 9, json!({"input": {"swing": 1.0}})).await;
    let e = recv(&mut b).await;
    assert_eq!(e.payload["code"], "NOT_DRIVER");
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn watchers_see_identical_streams() {
    let url = start(demo_site()).await;
    let mut driver = connect(&url).await;
    let id = create_lockstep(&mut driver).await;
    join(&mut driver, &id, "driver").await;
    let mut watchers = Vec::new();
    for _ in 0..3 {
        let mut w = connect(&url).await;
        assert_eq!(join(&mut w, &id, "watcher").await.kind, MessageType::Join);
        watchers.push(w);
    }
    let steps = 40;
    for k in 0..steps {
        let f = (k as f64 / 7.0).sin();
        send(&mut driver, "control", Some(&id), 10 + k, json!({"input": {"swing": f, "luff": -f / 2.0}})).await;
    }
    let mut streams = Vec::new();
    for w in &mut watchers {
        let mut s = Vec::new();
        for _ in 0..steps {
            let e = recv(w).await;
            assert_eq!(e.kind, MessageType::Frame);
            s.push((e.seq, e.payload));
        }
        assert!(s.windows(2).all(|p| p[1].0 == p[0].0 + 1));
        streams.push(s);
    }
    assert_eq!(streams[0], streams[1]);
    assert_eq!(streams[1], streams[2]);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn path_requests_and_errors() {
    let url = start(demo_site()).await;
    let mut ws = connect(&url).await;
    let path: Value = serde_json::from_str(
        &std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../demo/path_collision.json"))
            .unwrap(),
    )
    .unwrap();
    send(&mut ws, "check_path", None, 5, json!({"path": path})).await;
    let r = recv(&mut ws).await;
    assert_eq!(r.kind, MessageType::CheckPath);
    assert_eq!(r.payload["valid"], false);
    assert_eq!(r.payload["violations"][0]["kind"], "COLLISION");

    send(&mut ws, "plan_path", None, 6, json!({"from": "pick", "to": "set"})).await;
    let p = recv(&mut ws).await;
    assert_eq!(p.kind, MessageType::PlanPath, "{p:?}");
    assert!(p.payload["path"].as_array().unwrap().len() >= 2);

    send(&mut ws, "create_session", None, 7, json!({"dt": 1.0})).await;
    assert_eq!(recv(&mut ws).await.payload["code"], "BAD_TIMESTEP");
    send(&mut ws, "join", Some("nope"), 8, json!({"role": "watcher"})).await;
    assert_eq!(recv(&mut ws).await.payload["code"], "UNKNOWN_SESSION");
    ws.send(Message::Text("not json".into())).await.unwrap();
    assert_eq!(recv(&mut ws).await.payload["code"], "BAD_REQUEST");
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn realtime_sessions_advance_on_their_own() {
    let url = start(demo_site()).await;
    let mut ws = connect(&url).await;
    send(&mut ws, "create_session", None, 1, json!({"dt": 0.02})).await;
    let id = recv(&mut ws).await.payload["session"].as_str().unwrap().to_owned();
    send(&mut ws, "join", Some(&id), 2, json!({"role": "watcher"})).await;
    assert_eq!(recv(&mut ws).await.kind, MessageType::Join);
    let mut last = None;
    for _ in 0..5 {
        let f = recv(&mut ws).await;
        assert_eq!(f.kind, MessageType::Frame);
        if let Some(prev) = last {
            assert!(f.seq > prev);
        }
        last = Some(f.seq);
    }
}
