//! Control protocol: newline-delimited JSON over a local TCP socket.
//!
//! Client to engine:
//!
//! ```text
//! {"type":"get","id":1}                                 full config
//! {"type":"get","id":2,"path":"head.ear_on"}            one value
//! {"type":"set","id":3,"path":"head.ear_on","value":0.22}
//! {"type":"profile","id":4,"name":"gaming"}
//! {"type":"record","id":5,"action":"start","name":"row","mode":"hold"}
//! {"type":"record","id":6,"action":"stop"}
//! ```
//!
//! Engine to client:
//!
//! ```text
//! {"type":"ack","id":3,"ok":true,"request":"set","path":"head.ear_on","value":0.22,"frame":812,"epoch":4}
//! {"type":"error","id":3,"ok":false,"field":"head.ear_on","message":"..."}
//! {"type":"telemetry","frame":812,"t":27066.6,"epoch":4,...}
//! ```
//!
//! `get` is answered at once from the latest published config. `set`,
//! `profile` and `record` are checked against that config, queued, and
//! acknowledged once the engine has applied them at a frame boundary; the
//! ack's `frame` is the first frame processed under the change. Telemetry is
//! pushed to every client at most once per frame. Malformed messages get an
//! error reply and the session stays open.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::mpsc::{self, Receiver, Sender};
use std::sync::{Arc, Mutex, MutexGuard};
use std::thread;

use serde_json::{json, Value};

use super::config::EngineConfig;
use super::{Change, Engine, FrameHook};
use crate::exercise::TemplateMode;

pub type ClientId = u64;

struct Ticket {
    client: ClientId,
    id: Value,
    request: &'static str,
    path: Option<String>,
}

struct HubState {
    next_client: ClientId,
    next_ticket: u64,
    clients: BTreeMap<ClientId, Sender<String>>,
    pending: Vec<(u64, Change)>,
    tickets: BTreeMap<u64, Ticket>,
    config: EngineConfig,
    epoch: u64,
}

/// Shared state between the engine loop and the control sessions. Cheap to
/// clone; all clones refer to the same hub.
#[derive(Clone)]
pub struct ControlHub {
    inner: Arc<Mutex<HubState>>,
}

fn error_reply(id: &Value, field: Option<&str>, message: &str) -> String {
    json!({"type": "error", "id": id, "ok": false, "field": field, "message": message}).to_string()
}

impl ControlHub {
    pub fn new(config: EngineConfig) -> Self {
        ControlHub {
            inner: Arc::new(Mutex::new(HubState {
                next_client: 1,
                next_ticket: 1,
                clients: BTreeMap::new(),
                pending: Vec::new(),
                tickets: BTreeMap::new(),
                config,
                epoch: 0,
            })),
        }
    }

    fn lock(&self) -> MutexGuard<'_, HubState> {
        self.inner.lock().unwrap_or_else(|p| p.into_inner())
    }

    /// Registers a session; replies and telemetry arrive on the receiver.
    pub fn connect(&self) -> (ClientId, Receiver<String>) {
        let (tx, rx) = mpsc::channel();
        let mut s = self.lock();
        let id = s.next_client;
        s.next_client += 1;
        s.clients.insert(id, tx);
        (id, rx)
    }

    pub fn disconnect(&self, client: ClientId) {
        self.lock().clients.remove(&client);
    }

    pub fn client_count(&self) -> usize {
        self.lock().clients.len()
    }

    fn send(s: &HubState, client: ClientId, msg: String) {
        if let Some(tx) = s.clients.get(&client) {
            let _ = tx.send(msg);
        }
    }

    /// Handles one message from `client`.
    pub fn handle_line(&self, client: ClientId, line: &str) {
        let mut s = self.lock();
        let msg: Value = match serde_json::from_str(line) {
            Ok(v @ Value::Object(_)) => v,
            Ok(_) => {
                return Self::send(
                    &s,
                    client,
                    error_reply(&Value::Null, None, "expected a JSON object"),
                )
            }
            Err(e) => {
                return Self::send(
                    &s,
                    client,
                    error_reply(&Value::Null, None, &format!("malformed message: {e}")),
                )
            }
        };
        let id = msg.get("id").cloned().unwrap_or(Value::Null);
        let str_of = |k: &str| msg.get(k).and_then(Value::as_str).map(str::to_string);
        let (request, change, path): (&'static str, Change, Option<String>) = match msg
            .get("type")
            .and_then(Value::as_str)
        {
            Some("get") => {
                let path = str_of("path").unwrap_or_default();
                let reply = match s.config.get_path(&path) {
                    Some(value) => json!({
                        "type": "ack", "id": id, "ok": true, "request": "get",
                        "path": path, "value": value, "epoch": s.epoch,
                    })
                    .to_string(),
                    None => error_reply(&id, Some(&path), "no such field"),
                };
                return Self::send(&s, client, reply);
            }
            Some("set") => {
                let Some(path) = str_of("path") else {
                    return Self::send(
                        &s,
                        client,
                        error_reply(&id, Some("path"), "set needs a path"),
                    );
                };
                let Some(value) = msg.get("value").cloned() else {
                    return Self::send(
                        &s,
                        client,
                        error_reply(&id, Some(&path), "set needs a value"),
                    );
                };
                if let Err(e) = s.config.with_path(&path, value.clone()) {
                    return Self::send(&s, client, error_reply(&id, Some(&e.field), &e.message));
                }
                (
                    "set",
                    Change::Set {
                        path: path.clone(),
                        value,
                    },
                    Some(path),
                )
            }
            Some("profile") => {
                let Some(name) = str_of("name") else {
                    return Self::send(
                        &s,
                        client,
                        error_reply(&id, Some("name"), "profile needs a name"),
                    );
                };
                if let Err(e) = s.config.resolve_profile(&name) {
                    return Self::send(&s, client, error_reply(&id, Some(&e.field), &e.message));
                }
                ("profile", Change::Profile(name), None)
            }
            Some("record") => match str_of("action").as_deref() {
                Some("start") => {
                    let Some(name) = str_of("name").filter(|n| !n.is_empty()) else {
                        return Self::send(
                            &s,
                            client,
                            error_reply(&id, Some("name"), "record start needs a name"),
                        );
                    };
                    let mode = match str_of("mode").as_deref() {
                        None | Some("hold") => TemplateMode::Hold,
                        Some("rep") => TemplateMode::Rep,
                        Some(other) => {
                            return Self::send(
                                &s,
                                client,
                                error_reply(&id, Some("mode"), &format!("unknown mode {other:?}")),
                            )
                        }
                    };
                    ("record", Change::RecordStart { name, mode }, None)
                }
                Some("stop") => ("record", Change::RecordStop, None),
                _ => {
                    return Self::send(
                        &s,
                        client,
                        error_reply(&id, Some("action"), "expected start or stop"),
                    )
                }
            },
            Some(other) => {
                return Self::send(
                    &s,
                    client,
                    error_reply(
                        &id,
                        Some("type"),
                        &format!("unknown message type {other:?}"),
                    ),
                )
            }
            None => {
                return Self::send(
                    &s,
                    client,
                    error_reply(&id, Some("type"), "missing message type"),
                )
            }
        };
        let ticket = s.next_ticket;
        s.next_ticket += 1;
        s.tickets.insert(
            ticket,
            Ticket {
                client,
                id,
                request,
                path,
            },
        );
        s.pending.push((ticket, change));
    }

    /// Hands queued changes to the engine; call before each frame.
    pub fn drain_into(&self, engine: &mut Engine) {
        for (ticket, change) in std::mem::take(&mut self.lock().pending) {
            engine.queue(ticket, change);
        }
    }

    /// Acknowledges applied changes, refreshes the config snapshot and
    /// publishes telemetry; call after each frame.
    pub fn publish(&self, engine: &mut Engine) {
        let outcomes = engine.take_outcomes();
        let mut s = self.lock();
        for o in outcomes {
            let Some(t) = s.tickets.remove(&o.ticket) else {
                continue;
            };
            let reply = match o.result {
                Ok(value) => json!({
                    "type": "ack", "id": t.id, "ok": true, "request": t.request,
                    "path": t.path, "value": value, "frame": o.frame, "epoch": o.epoch,
                })
                .to_string(),
                Err((field, message)) => error_reply(&t.id, Some(&field), &message),
            };
            Self::send(&s, t.client, reply);
        }
        if s.epoch != engine.epoch() {
            s.config = engine.config().clone();
            s.epoch = engine.epoch();
        }
        if !s.clients.is_empty() {
            let telemetry = engine.telemetry().to_string();
            s.clients.retain(|_, tx| tx.send(telemetry.clone()).is_ok());
        }
    }
}

impl FrameHook for ControlHub {
    fn before_frame(&mut self, engine: &mut Engine) {
        self.drain_into(engine);
    }

    fn after_frame(&mut self, engine: &mut Engine) {
        self.publish(engine);
    }
}

fn serve_client(hub: ControlHub, stream: TcpStream) {
    let (client, rx) = hub.connect();
    let Ok(mut writer) = stream.try_clone() else {
        hub.disconnect(client);
        return;
    };
    let writer_thread = thread::spawn(move || {
        for msg in rx {
            if writeln!(writer, "{msg}").is_err() {
                break;
            }
        }
    });
    for line in BufReader::new(stream).lines() {
        let Ok(line) = line else { break };
        if !line.trim().is_empty() {
            hub.handle_line(client, &line);
        }
    }
    hub.disconnect(client);
    let _ = writer_thread.join();
}

/// Listens on `127.0.0.1:port` (0 picks a free port) and serves sessions on
/// background threads. Returns the bound address.
pub fn serve_control(hub: ControlHub, port: u16) -> std::io::Result<SocketAddr> {
    let listener = TcpListener::bind(("127.0.0.1", port))?;
    let addr = listener.local_addr()?;
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(stream) = stream else { continue };
            let hub = hub.clone();
            thread::spawn(move || serve_client(hub, stream));
        }
    });
    Ok(addr)
}
