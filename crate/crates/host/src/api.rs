//! HTTP and WebSocket front end for one device session.
//!
//! | route          | behaviour                                                     |
//! |----------------|---------------------------------------------------------------|
//! | `GET /state`   | `{"selected":n,"ports":N,"topology":name,"source":s}`         |
//! | `POST /select` | body `{"port":n}`; 204, 400 on a bad port, 409 once link lost |
//! | `WS /events`   | `{"type":"state","selected":n}` on connect and every change   |
//!
//! The session lives on one worker thread. Requests queue FIFO into it, so
//! the wire only ever carries whole commands, and the thread polls for pushed
//! `E<n>` lines between requests.

use std::net::SocketAddr;
use std::sync::mpsc as std_mpsc;
use std::thread;
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tokio::net::TcpListener;
use tokio::sync::{broadcast, oneshot, watch};

use crate::session::{DeviceState, HostError, Session, Source};

/// How long the worker waits for a request before checking the wire for
/// pushed events.
pub const POLL_INTERVAL: Duration = Duration::from_millis(20);

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StateBody {
    pub selected: u8,
    pub ports: u8,
    pub topology: String,
    pub source: Source,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
struct EventBody {
    #[serde(rename = "type")]
    kind: &'static str,
    selected: u8,
}

#[derive(Deserialize)]
struct SelectBody {
    port: i64,
}

#[derive(Debug, Clone)]
struct Snapshot {
    state: DeviceState,
    lost: bool,
}

enum Request {
    Select(u8, oneshot::Sender<Result<(), HostError>>),
}

#[derive(Clone)]
struct AppState {
    requests: std_mpsc::Sender<Request>,
    snapshot: watch::Receiver<Snapshot>,
    events: broadcast::Sender<u8>,
    ports: u8,
}

pub struct ApiServer {
    addr: SocketAddr,
    shutdown: Option<oneshot::Sender<()>>,
    task: tokio::task::JoinHandle<()>,
}

impl ApiServer {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    pub async fn shutdown(mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        let _ = (&mut self.task).await;
    }

    /// Runs until the server task ends.
    pub async fn wait(self) {
        let _ = self.task.await;
    }
}

#[derive(Debug, thiserror::Error)]
#[error("could not bind HTTP address: {0}")]
pub struct BindFailed(#[from] std::io::Error);

/// Serves the API for `session` on `http_addr`. Must be called from within a
/// Tokio runtime.
pub async fn serve_api(session: Session, http_addr: &str) -> Result<ApiServer, BindFailed> {
    let listener = TcpListener::bind(http_addr).await?;
    let addr = listener.local_addr()?;

    let ports = session.n_ports();
    let (snap_tx, snap_rx) = watch::channel(Snapshot { state: session.state().clone(), lost: false });
    let (events_tx, _) = broadcast::channel(64);
    let (req_tx, req_rx) = std_mpsc::channel();

    {
        let events_tx = events_tx.clone();
        thread::Builder::new()
            .name("switchctl-session".into())
            .spawn(move || worker(session, req_rx, snap_tx, events_tx))?;
    }

    let app = Router::new()
        .route("/state", get(get_state))
        .route("/select", post(post_select))
        .route("/events", get(ws_events))
        .with_state(AppState { requests: req_tx, snapshot: snap_rx, events: events_tx, ports });

    let (stop_tx, stop_rx) = oneshot::channel::<()>();
    let task = tokio::spawn(async move {
        let _ = axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = stop_rx.await;
            })
            .await;
    });
    Ok(ApiServer { addr, shutdown: Some(stop_tx), task })
}

fn worker(
    mut session: Session,
    requests: std_mpsc::Receiver<Request>,
    snapshot: watch::Sender<Snapshot>,
    events: broadcast::Sender<u8>,
) {
    let mut published = session.state().selected;
    let mut lost = false;
    let mut publish = |session: &Session, lost: bool| {
        let state = session.state().clone();
        let changed = state.selected != published;
        published = state.selected;
        snapshot.send_replace(Snapshot { state, lost });
        if changed {
            let _ = events.send(published);
        }
    };

    loop {
        match requests.recv_timeout(POLL_INTERVAL) {
            Ok(Request::Select(port, reply)) => {
                let result = if lost {
                    Err(HostError::Disconnected)
                } else {
                    session.select_port(port).map(|_| ())
                };
                if let Err(e) = &result {
                    lost |= e.is_link_loss();
                }
                publish(&session, lost);
                let _ = reply.send(result);
            }
            Err(std_mpsc::RecvTimeoutError::Timeout) => {
                if lost {
                    continue;
                }
                match session.poll_events(Duration::from_millis(1)) {
                    Ok(Some(_)) => publish(&session, lost),
                    Ok(None) => {}
                    Err(e) => {
                        log::warn!("device link lost: {e}");
                        lost = e.is_link_loss();
                        publish(&session, lost);
                    }
                }
            }
            Err(std_mpsc::RecvTimeoutError::Disconnected) => return,
        }
    }
}

async fn get_state(State(app): State<AppState>) -> Json<StateBody> {
    let snap = app.snapshot.borrow().clone();
    Json(StateBody {
        selected: snap.state.selected,
        ports: app.ports,
        topology: snap.state.topology_name,
        source: snap.state.source,
    })
}

async fn post_select(State(app): State<AppState>, body: Bytes) -> Response {
    let port = match serde_json::from_slice::<SelectBody>(&body) {
        Ok(b) if b.port >= 1 && b.port <= app.ports as i64 => b.port as u8,
        Ok(b) => {
            return (StatusCode::BAD_REQUEST, format!("port {} out of range 1..={}", b.port, app.ports))
                .into_response()
        }
        Err(e) => return (StatusCode::BAD_REQUEST, format!("bad request body: {e}")).into_response(),
    };
    if app.snapshot.borrow().lost {
        return (StatusCode::CONFLICT, "device session lost").into_response();
    }
    let (tx, rx) = oneshot::channel();
    if app.requests.send(Request::Select(port, tx)).is_err() {
        return (StatusCode::CONFLICT, "device session closed").into_response();
    }
    match rx.await {
        Ok(Ok(())) => StatusCode::NO_CONTENT.into_response(),
        Ok(Err(HostError::PortOutOfRange { .. })) => StatusCode::BAD_REQUEST.into_response(),
        Ok(Err(e)) => (StatusCode::CONFLICT, e.to_string()).into_response(),
        Err(_) => (StatusCode::CONFLICT, "device session closed").into_response(),
    }
}

async fn ws_events(State(app): State<AppState>, ws: WebSocketUpgrade) -> Response {
    ws.on_upgrade(move |socket| push_events(socket, app))
}

fn event_message(selected: u8) -> Message {
    let body = EventBody { kind: "state", selected };
    Message::Text(serde_json::to_string(&body).expect("event serializes").into())
}

async fn push_events(mut socket: WebSocket, app: AppState) {
    let mut rx = app.events.subscribe();
    let current = app.snapshot.borrow().state.selected;
    if socket.send(event_message(current)).await.is_err() {
        return;
    }
    loop {
        tokio::select! {
            ev = rx.recv() => match ev {
                Ok(selected) => {
                    if socket.send(event_message(selected)).await.is_err() {
                        return;
                    }
                }
                Err(broadcast::error::RecvError::Lagged(_)) => {
                    let selected = app.snapshot.borrow().state.selected;
                    if socket.send(event_message(selected)).await.is_err() {
                        return;
                    }
                }
                Err(broadcast::error::RecvError::Closed) => return,
            },
            msg = socket.recv() => match msg {
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => return,
                Some(Ok(_)) => {}
            },
        }
    }
}
