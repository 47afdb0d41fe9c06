//! A session service over documents: parse a document once, then explore,
//! step and run strategies on its trace through JSON endpoints.
//!
//! Every document carries a revision that goes up by one on each request
//! that changes it. Mutating requests may send `If-Match: <revision>`; a
//! stale value is refused with 409. Requests to one document are
//! serialized by a per-document lock, and reads take it shared.

use std::collections::HashMap;
use std::fs;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use inetc_core::strategy::{EvalConfig, EvalError, Status, DEFAULT_STAR_CAP};
use inetc_core::textio::{
    net_json, parse_document, print_document, strategy_for, trace_json, Diagnostic, EndpointJson,
};
use inetc_core::trace::{NodeId, TraceError};
use inetc_core::{AgentId, Document, EdgeId, Violation};
use serde::Deserialize;
use serde_json::{json, Value};

pub const DEFAULT_MAX_BODY: usize = 1 << 20;

#[derive(Clone, Debug)]
pub struct ServiceConfig {
    /// Request bodies above this many bytes are refused with 413.
    pub max_body: usize,
    /// Iteration cap for strategy runs.
    pub max_steps: u64,
    /// When set, each document's text is rewritten to `<dir>/<docId>.inet`
    /// on creation and after every mutation.
    pub persist_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            max_body: DEFAULT_MAX_BODY,
            max_steps: DEFAULT_STAR_CAP,
            persist_dir: None,
        }
    }
}

struct Session {
    doc: Document,
    revision: u64,
}

type Shared = Arc<RwLock<Session>>;

struct Inner {
    config: ServiceConfig,
    docs: RwLock<HashMap<String, Shared>>,
}

#[derive(Clone)]
pub struct AppState(Arc<Inner>);

impl AppState {
    pub fn new(config: ServiceConfig) -> Self {
        AppState(Arc::new(Inner {
            config,
            docs: RwLock::new(HashMap::new()),
        }))
    }

    fn session(&self, id: &str) -> Result<Shared, ApiError> {
        self.0
            .docs
            .read()
            .expect("document map lock")
            .get(id)
            .cloned()
            .ok_or_else(|| {
                ApiError::new(
                    StatusCode::NOT_FOUND,
                    "UnknownDocument",
                    format!("no document `{id}`"),
                )
            })
    }

    fn persist(&self, id: &str, doc: &Document) -> Result<(), ApiError> {
        let Some(dir) = &self.0.config.persist_dir else {
            return Ok(());
        };
        fs::write(dir.join(format!("{id}.inet")), print_document(doc)).map_err(|e| {
            ApiError::new(
                StatusCode::INTERNAL_SERVER_ERROR,
                "PersistFailed",
                e.to_string(),
            )
        })
    }
}

pub fn router(config: ServiceConfig) -> Router {
    let limit = config.max_body;
    Router::new()
        .route("/documents", post(create_document))
        .route("/documents/{d}/nodes/{n}", get(get_state))
        .route("/documents/{d}/nodes/{n}/apply", post(apply_step))
        .route("/documents/{d}/nodes/{n}/strategy", post(run_strategy))
        .route("/documents/{d}/nodes/{n}/explore", post(explore))
        .route("/documents/{d}/trace", get(get_trace))
        .route("/documents/{d}/edit", post(edit_net))
        .layer(DefaultBodyLimit::max(limit))
        .with_state(AppState::new(config))
}

/// Serves the router on `addr` until the process is stopped.
pub async fn serve(addr: SocketAddr, config: ServiceConfig) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(config)).await
}

#[derive(Debug)]
struct ApiError {
    status: StatusCode,
    body: Value,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            body: json!({ "error": code, "message": message.into() }),
        }
    }

    fn with(mut self, key: &str, value: Value) -> Self {
        self.body[key] = value;
        self
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

impl From<TraceError> for ApiError {
    fn from(e: TraceError) -> Self {
        let message = e.to_string();
        let (status, code) = match &e {
            TraceError::UnknownNode(_) => (StatusCode::NOT_FOUND, "UnknownNode"),
            TraceError::StaleRedex(_) => (StatusCode::CONFLICT, "StaleRedex"),
            TraceError::NoRuleForPair(_) => (StatusCode::UNPROCESSABLE_ENTITY, "NoRuleForPair"),
            TraceError::UnknownStrategy(_) => (StatusCode::UNPROCESSABLE_ENTITY, "UnknownStrategy"),
            TraceError::TraceNotPristine => (StatusCode::CONFLICT, "TraceNotPristine"),
            TraceError::InvalidNet(_) => (StatusCode::UNPROCESSABLE_ENTITY, "InvalidNet"),
            TraceError::Eval(EvalError::StepLimitExceeded(_)) => {
                (StatusCode::CONFLICT, "StepLimitExceeded")
            }
            TraceError::Eval(EvalError::UnknownRule(_)) => {
                (StatusCode::UNPROCESSABLE_ENTITY, "UnknownRule")
            }
            TraceError::Eval(EvalError::UnknownSelection(_)) => {
                (StatusCode::UNPROCESSABLE_ENTITY, "UnknownSelection")
            }
            TraceError::Eval(EvalError::UnlocatedRule(_)) => {
                (StatusCode::UNPROCESSABLE_ENTITY, "UnlocatedRule")
            }
        };
        let err = ApiError::new(status, code, message);
        match e {
            TraceError::InvalidNet(vs) => err.with("diagnostics", violations_json(&vs, None)),
            _ => err,
        }
    }
}

fn diagnostic_json(d: &Diagnostic) -> Value {
    json!({
        "line": d.line,
        "col": d.col,
        "code": d.code,
        "message": d.message,
        "expected": d.expected,
    })
}

fn violations_json(vs: &[Violation], op: Option<usize>) -> Value {
    vs.iter()
        .map(|v| json!({ "op": op, "code": v.code.as_str(), "message": v.to_string() }))
        .collect()
}

fn bad_request(message: impl Into<String>) -> ApiError {
    ApiError::new(StatusCode::BAD_REQUEST, "MalformedRequest", message)
}

fn body_json<T: for<'de> Deserialize<'de>>(body: &[u8]) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| bad_request(e.to_string()))
}

fn node_id(text: &str) -> Result<NodeId, ApiError> {
    text.parse().map(NodeId).map_err(|_| {
        ApiError::new(
            StatusCode::NOT_FOUND,
            "UnknownNode",
            format!("no trace node `{text}`"),
        )
    })
}

/// Refuses the request when `If-Match` names another revision.
fn check_revision(headers: &HeaderMap, current: u64) -> Result<(), ApiError> {
    let Some(value) = headers.get("if-match") else {
        return Ok(());
    };
    let text = value.to_str().unwrap_or("").trim().trim_matches('"');
    if text == current.to_string() {
        Ok(())
    } else {
        Err(ApiError::new(
            StatusCode::CONFLICT,
            "RevisionMismatch",
            format!("document is at revision {current}, request expected `{text}`"),
        )
        .with("revision", json!(current)))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateBody {
    text: String,
}

async fn create_document(State(state): State<AppState>, body: Bytes) -> Response {
    let refuse = |diagnostics: Value| {
        (
            StatusCode::BAD_REQUEST,
            Json(json!({ "docId": null, "diagnostics": diagnostics })),
        )
            .into_response()
    };
    let text = match serde_json::from_slice::<CreateBody>(&body) {
        Ok(b) => b.text,
        Err(e) => {
            return refuse(json!([{
                "line": 1, "col": 1, "code": "MalformedRequest",
                "message": e.to_string(), "expected": ["{\"text\": ...}"],
            }]))
        }
    };
    let doc = match parse_document(&text) {
        Ok(doc) => doc,
        Err(ds) => return refuse(ds.iter().map(diagnostic_json).collect()),
    };
    let id = uuid::Uuid::new_v4().to_string();
    if let Err(e) = state.persist(&id, &doc) {
        return e.into_response();
    }
    let session = Arc::new(RwLock::new(Session { doc, revision: 0 }));
    state
        .0
        .docs
        .write()
        .expect("document map lock")
        .insert(id.clone(), session);
    Json(json!({ "docId": id, "diagnostics": [] })).into_response()
}

async fn get_state(
    State(state): State<AppState>,
    Path((d, n)): Path<(String, String)>,
) -> Result<Json<Value>, ApiError> {
    let shared = state.session(&d)?;
    let session = shared.read().expect("session lock");
    let view = session.doc.get_node(node_id(&n)?)?;
    let rules = session.doc.rules();
    let redexes: Vec<Value> = view
        .net
        .find_active_pairs()
        .iter()
        .map(|r| {
            let (a, b) = r.agents();
            json!({
                "edgeId": r.edge.0,
                "agents": [a.0, b.0],
                "rule": rules.for_pair(r.symbols.0, r.symbols.1).map(|x| x.name()),
            })
        })
        .collect();
    Ok(Json(json!({
        "net": net_json(view.net),
        "redexes": redexes,
        "parent": view.parent.map(|p| p.0),
        "children": view.children.iter().map(|c| c.0).collect::<Vec<_>>(),
        "revision": session.revision,
    })))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct ApplyBody {
    edge_id: u64,
}

async fn apply_step(
    State(state): State<AppState>,
    Path((d, n)): Path<(String, String)>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Json<Value>, ApiError> {
    let shared = state.session(&d)?;
    let node = node_id(&n)?;
    let req: ApplyBody = body_json(&body)?;
    let mut session = shared.write().expect("session lock");
    check_revision(&headers, session.revision)?;
    let (child, fresh) = session.doc.step(node, EdgeId(req.edge_id))?;
    if fresh {
        session.revision += 1;
        state.persist(&d, &session.doc)?;
    }
    Ok(Json(
        json!({ "childId": child.0, "revision": session.revision }),
    ))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StrategyBody {
    expr: String,
}

async fn run_strategy(
    State(state): State<AppState>,
    Path((d, n)): Path<(String, String)>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Json<Value>, ApiError> {
    let shared = state.session(&d)?;
    let node = node_id(&n)?;
    let req: StrategyBody = body_json(&body)?;
    let config = EvalConfig {
        star_cap: state.0.config.max_steps,
    };
    // A run may take a while; keep it off the async workers.
    tokio::task::spawn_blocking(move || {
        let mut session = shared.write().expect("session lock");
        check_revision(&headers, session.revision)?;
        let (expr, name) = strategy_for(&session.doc, &req.expr).map_err(|diag| {
            ApiError::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                &diag.code,
                diag.to_string(),
            )
            .with("diagnostics", json!([diagnostic_json(&diag)]))
        })?;
        let (status, path) = session
            .doc
            .run_strategy(node, &expr, name.as_deref(), &config)?;
        if !path.is_empty() {
            session.revision += 1;
            state.persist(&d, &session.doc)?;
        }
        Ok(Json(json!({
            "status": match status {
                Status::Success => "success",
                Status::Failure => "failure",
            },
            "path": path.iter().map(|p| p.0).collect::<Vec<_>>(),
            "revision": session.revision,
        })))
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", e.to_string()))?
}

async fn explore(
    State(state): State<AppState>,
    Path((d, n)): Path<(String, String)>,
    headers: HeaderMap,
) -> Result<Json<Value>, ApiError> {
    let shared = state.session(&d)?;
    let node = node_id(&n)?;
    let mut session = shared.write().expect("session lock");
    check_revision(&headers, session.revision)?;
    let before = session.doc.trace().len();
    let children = session.doc.explore(node)?;
    if session.doc.trace().len() != before {
        session.revision += 1;
        state.persist(&d, &session.doc)?;
    }
    Ok(Json(json!({
        "children": children.iter().map(|c| c.0).collect::<Vec<_>>(),
        "revision": session.revision,
    })))
}

async fn get_trace(
    State(state): State<AppState>,
    Path(d): Path<String>,
) -> Result<Json<Value>, ApiError> {
    let shared = state.session(&d)?;
    let session = shared.read().expect("session lock");
    Ok(Json(
        serde_json::to_value(trace_json(session.doc.trace())).expect("trace serializes"),
    ))
}

/// One edit of the base model. New agents get the next free id of the net,
/// in op order, so a batch can wire agents it creates.
#[derive(Deserialize)]
#[serde(tag = "op", rename_all = "camelCase", deny_unknown_fields)]
enum EditOp {
    AddAgent {
        symbol: String,
    },
    DeleteAgent {
        agent: u64,
    },
    Connect {
        a: EndpointJson,
        b: EndpointJson,
    },
    /// Removes the edge at this endpoint.
    Disconnect {
        at: EndpointJson,
    },
    AddFree {
        name: String,
    },
    NameSelection {
        name: String,
        agents: Vec<u64>,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EditBody {
    ops: Vec<Value>,
}

async fn edit_net(
    State(state): State<AppState>,
    Path(d): Path<String>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Json<Value>, ApiError> {
    let shared = state.session(&d)?;
    let req: EditBody = body_json(&body)?;
    let mut session = shared.write().expect("session lock");
    check_revision(&headers, session.revision)?;
    if session.doc.trace().len() != 1 {
        return Err(TraceError::TraceNotPristine.into());
    }
    if req.ops.is_empty() {
        return Ok(Json(
            json!({ "revision": session.revision, "diagnostics": [] }),
        ));
    }
    let invalid = |i: usize, code: &str, message: String| {
        ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            code,
            format!("op {i}: {message}"),
        )
        .with(
            "diagnostics",
            json!([{ "op": i, "code": code, "message": message }]),
        )
    };
    let mut net = session.doc.m0().clone();
    for (i, raw) in req.ops.into_iter().enumerate() {
        let op: EditOp =
            serde_json::from_value(raw).map_err(|e| invalid(i, "InvalidOp", e.to_string()))?;
        let result = match op {
            EditOp::AddAgent { symbol } => net.add_agent(&symbol).map(drop),
            EditOp::DeleteAgent { agent } => net.delete_agent(AgentId(agent)),
            EditOp::Connect { a, b } => net.connect(a.to_port_ref(), b.to_port_ref()).map(drop),
            EditOp::Disconnect { at } => {
                let end = at.to_port_ref();
                match net.edge_at(&end) {
                    Some(edge) => net.disconnect(edge).map(drop),
                    None => {
                        return Err(invalid(
                            i,
                            "NotConnected",
                            format!("{end} is not connected"),
                        ));
                    }
                }
            }
            EditOp::AddFree { name } => match net.declare_free(&name) {
                Ok(true) => Ok(()),
                Ok(false) => {
                    return Err(invalid(
                        i,
                        "FreePortRedeclared",
                        format!("free port `{name}` exists"),
                    ));
                }
                Err(e) => Err(e),
            },
            EditOp::NameSelection { name, agents } => {
                net.set_selection(&name, agents.into_iter().map(AgentId))
            }
        };
        result.map_err(|e| invalid(i, e.code(), e.to_string()))?;
    }
    session.doc.replace_base(net)?;
    session.revision += 1;
    state.persist(&d, &session.doc)?;
    Ok(Json(
        json!({ "revision": session.revision, "diagnostics": [] }),
    ))
}
