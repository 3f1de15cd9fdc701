//! HTTP annotation service. Hands out the assignments of an
//! [`AnnotationPlan`] to roster annotators, validates and durably logs their
//! submissions, and exports the log as JSONL.
//!
//! | route | auth | |
//! |---|---|---|
//! | `GET /api/task?annotator=TOKEN` | annotator | oldest pending assignment, or `{"task":null}` |
//! | `POST /api/submit` | annotator (`annotator` field) | [`SubmitRequest`] → [`Ack`] |
//! | `GET /api/progress?annotator=TOKEN` | annotator | [`Progress`] |
//! | `GET /api/export?kind=style` | `Authorization: Bearer ADMIN` | JSONL |

mod store;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::Path;
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::{SystemTime, UNIX_EPOCH};

use axum::extract::{Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use ghosteval::annotation::{AnnotationPlan, Assignment, LineLabel, ServedTask, SubmissionBody, SubmissionError, TaskKind};
use ghosteval::pipeline::RosterEntry;
use serde::{Deserialize, Serialize};
use serde_json::json;

pub use store::{Ack, Store, StoreError};

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("unknown annotator token")]
    Unauthorized,
    #[error("assignment belongs to another annotator")]
    Forbidden,
    #[error("unknown assignment {0}")]
    UnknownAssignment(String),
    #[error(transparent)]
    Invalid(#[from] SubmissionError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("invalid service setup: {0}")]
    Setup(String),
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let (status, code) = match &self {
            ServiceError::Unauthorized => (StatusCode::UNAUTHORIZED, "unauthorized"),
            ServiceError::Forbidden => (StatusCode::FORBIDDEN, "forbidden"),
            ServiceError::UnknownAssignment(_) => (StatusCode::NOT_FOUND, "not_found"),
            ServiceError::Invalid(_) => (StatusCode::UNPROCESSABLE_ENTITY, "validation"),
            ServiceError::Store(_) | ServiceError::Setup(_) => (StatusCode::INTERNAL_SERVER_ERROR, "internal"),
        };
        let mut body = json!({ "error": code, "message": self.to_string() });
        match &self {
            ServiceError::Invalid(SubmissionError::MissingLines(l)) => body["missing_lines"] = json!(l),
            ServiceError::Invalid(SubmissionError::UnexpectedLines(l)) => body["unexpected_lines"] = json!(l),
            _ => {}
        }
        (status, Json(body)).into_response()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskResponse {
    pub task: Option<ServedTask>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubmitRequest {
    /// Annotator bearer token.
    pub annotator: String,
    pub assignment_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chosen_index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<LineLabel>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Progress {
    pub done: usize,
    pub total: usize,
    pub all_done: usize,
    pub all_total: usize,
}

pub struct Service {
    plan: AnnotationPlan,
    /// token → annotator id
    roster: HashMap<String, String>,
    admin_token: Option<String>,
    by_id: HashMap<String, usize>,
    store: Mutex<Store>,
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

impl Service {
    pub fn open(
        plan: AnnotationPlan,
        roster: &[RosterEntry],
        admin_token: Option<String>,
        store_path: &Path,
    ) -> Result<Self, ServiceError> {
        let mut tokens = HashMap::new();
        for e in roster {
            if tokens.insert(e.token.clone(), e.annotator.clone()).is_some() {
                return Err(ServiceError::Setup(format!("token of {} is not unique", e.annotator)));
            }
        }
        if admin_token.as_ref().is_some_and(|t| tokens.contains_key(t)) {
            return Err(ServiceError::Setup("admin token doubles as an annotator token".into()));
        }
        let known: std::collections::HashSet<&String> = tokens.values().collect();
        if let Some(a) = plan.assignments.iter().find(|a| !known.contains(&a.annotator_id)) {
            return Err(ServiceError::Setup(format!("{} is assigned work but not on the roster", a.annotator_id)));
        }
        let by_id: HashMap<String, usize> = plan
            .assignments
            .iter()
            .enumerate()
            .map(|(i, a)| (a.assignment_id.clone(), i))
            .collect();
        let expected = |id: &str| -> Option<usize> {
            let a = &plan.assignments[*by_id.get(id)?];
            Some(match a.kind {
                TaskKind::Style => 1,
                k => {
                    let n = plan.texts.get(&a.item_id).map_or(0, Vec::len);
                    n.saturating_sub(k.line_task().map_or(0, |t| t.first_line()))
                }
            })
        };
        let store = Store::open(store_path, expected)?;
        log::info!(
            "{} of {} assignments already submitted in {}",
            store.submitted(),
            plan.assignments.len(),
            store_path.display()
        );
        Ok(Service {
            plan,
            roster: tokens,
            admin_token,
            by_id,
            store: Mutex::new(store),
        })
    }

    fn store(&self) -> MutexGuard<'_, Store> {
        self.store.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn annotator(&self, token: &str) -> Result<&str, ServiceError> {
        self.roster.get(token).map(String::as_str).ok_or(ServiceError::Unauthorized)
    }

    pub fn next_task(&self, token: &str) -> Result<Option<ServedTask>, ServiceError> {
        let who = self.annotator(token)?;
        let store = self.store();
        Ok(self
            .plan
            .assignments
            .iter()
            .find(|a| a.annotator_id == who && !store.is_submitted(&a.assignment_id))
            .map(|a| self.plan.serve(a)))
    }

    fn assignment(&self, id: &str) -> Result<&Assignment, ServiceError> {
        self.by_id
            .get(id)
            .map(|&i| &self.plan.assignments[i])
            .ok_or_else(|| ServiceError::UnknownAssignment(id.to_string()))
    }

    /// Validates, appends and syncs before returning the ack. A repeated
    /// submission of a finished assignment returns the original ack.
    pub fn submit(&self, req: &SubmitRequest) -> Result<Ack, ServiceError> {
        let who = self.annotator(&req.annotator)?;
        let a = self.assignment(&req.assignment_id)?;
        if a.annotator_id != who {
            return Err(ServiceError::Forbidden);
        }
        let mut store = self.store();
        if let Some(ack) = store.ack(&a.assignment_id) {
            return Ok(ack.clone());
        }
        let body = SubmissionBody {
            chosen_index: req.chosen_index,
            labels: req.labels.clone(),
        };
        let records = self.plan.records_for(a, &body, store.next_timestamp(now_ms()))?;
        Ok(store.append(records)?)
    }

    pub fn progress(&self, token: &str) -> Result<Progress, ServiceError> {
        let who = self.annotator(token)?;
        let store = self.store();
        let mine: Vec<&Assignment> = self.plan.assignments.iter().filter(|a| a.annotator_id == who).collect();
        Ok(Progress {
            done: mine.iter().filter(|a| store.is_submitted(&a.assignment_id)).count(),
            total: mine.len(),
            all_done: store.submitted(),
            all_total: self.plan.assignments.len(),
        })
    }

    pub fn export(&self, kind: Option<TaskKind>) -> Vec<u8> {
        self.store().export(kind)
    }

    fn is_admin(&self, headers: &HeaderMap) -> bool {
        let Some(admin) = &self.admin_token else {
            return false;
        };
        headers
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "))
            .is_some_and(|t| t == admin)
    }
}

#[derive(Deserialize)]
struct AnnotatorQuery {
    annotator: String,
}

#[derive(Deserialize)]
struct ExportQuery {
    kind: Option<TaskKind>,
}

type Shared = Arc<Service>;

async fn task(State(s): State<Shared>, Query(q): Query<AnnotatorQuery>) -> Result<Json<TaskResponse>, ServiceError> {
    Ok(Json(TaskResponse {
        task: s.next_task(&q.annotator)?,
    }))
}

async fn submit(State(s): State<Shared>, Json(req): Json<SubmitRequest>) -> Result<Json<Ack>, ServiceError> {
    // the sync call blocks, keep it off the async workers
    tokio::task::spawn_blocking(move || s.submit(&req))
        .await
        .map_err(|e| ServiceError::Setup(e.to_string()))?
        .map(Json)
}

async fn progress(State(s): State<Shared>, Query(q): Query<AnnotatorQuery>) -> Result<Json<Progress>, ServiceError> {
    Ok(Json(s.progress(&q.annotator)?))
}

async fn export(State(s): State<Shared>, headers: HeaderMap, Query(q): Query<ExportQuery>) -> Response {
    if !s.is_admin(&headers) {
        return ServiceError::Unauthorized.into_response();
    }
    ([(header::CONTENT_TYPE, "application/x-ndjson")], s.export(q.kind)).into_response()
}

pub fn router(service: Arc<Service>) -> Router {
    Router::new()
        .route("/api/task", get(task))
        .route("/api/submit", post(submit))
        .route("/api/progress", get(progress))
        .route("/api/export", get(export))
        .with_state(service)
}

/// Serves until the process is stopped.
pub async fn serve(service: Arc<Service>, port: u16) -> std::io::Result<()> {
    let addr = SocketAddr::from(([0, 0, 0, 0], port));
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("annotation service listening on {addr}");
    axum::serve(listener, router(service)).await
}
