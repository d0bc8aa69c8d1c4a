//! HTTP/JSON API over the store.
//!
//! | Method | Path                                   | Body / result                              |
//! |--------|----------------------------------------|--------------------------------------------|
//! | GET    | `/users/{id}/sessions`                 | session summaries, newest first            |
//! | GET    | `/sessions/{id}/graph[?focus=eid]`     | canonical graph document (or subgraph)     |
//! | GET    | `/sessions/{id}/entities/{eid}/snippets` | snippets of one node                     |
//! | GET    | `/groups/{id}/sessions`                | `{user_id, session}` entries, newest first |
//! | POST   | `/groups/{id}/tags`                    | `{"snippet_id": ..}`, caller in `X-User-Id`|
//! | POST   | `/logs`                                | ingestion lines, returns counts            |
//!
//! List endpoints accept `?limit=&offset=` (default limit 50). Errors are
//! `{"status", "code", "message"}` objects.
//!
//! `X-User-Id` is trusted as-is; there is no authentication.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use crate::graph::GraphDocument;
use crate::log::{parse_log, Timestamp};
use crate::session::SegmentationConfig;
use crate::store::{SessionSummary, Store, StoreError};

pub const DEFAULT_PAGE_LIMIT: usize = 50;
pub const USER_HEADER: &str = "x-user-id";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiError {
    pub status: u16,
    pub code: String,
    pub message: String,
}

/// The closed set of error codes.
pub mod codes {
    pub const BAD_REQUEST: &str = "bad_request";
    pub const INVALID_LOG: &str = "invalid_log";
    pub const FORBIDDEN: &str = "forbidden";
    pub const NOT_FOUND: &str = "not_found";
    pub const GRAPH_PENDING: &str = "graph_pending";
    pub const CONFLICT: &str = "conflict";
    pub const BUSY: &str = "busy";
    pub const INTERNAL: &str = "internal";

    pub const ALL: [&str; 8] = [BAD_REQUEST, INVALID_LOG, FORBIDDEN, NOT_FOUND, GRAPH_PENDING, CONFLICT, BUSY, INTERNAL];
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError {
            status: status.as_u16(),
            code: code.to_string(),
            message: message.into(),
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, codes::BAD_REQUEST, message)
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let msg = e.to_string();
        match e {
            StoreError::NotFound { .. } => ApiError::new(StatusCode::NOT_FOUND, codes::NOT_FOUND, msg),
            StoreError::Permission { .. } => ApiError::new(StatusCode::FORBIDDEN, codes::FORBIDDEN, msg),
            StoreError::Busy => ApiError::new(StatusCode::CONFLICT, codes::BUSY, msg),
            StoreError::Conflict(_) => ApiError::new(StatusCode::CONFLICT, codes::CONFLICT, msg),
            StoreError::Input(_) | StoreError::Log(_) => ApiError::new(StatusCode::BAD_REQUEST, codes::INVALID_LOG, msg),
            _ => {
                tracing::error!(error = %msg, "store failure");
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, codes::INTERNAL, msg)
            }
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self)).into_response()
    }
}

#[derive(Clone)]
pub struct ApiState {
    store: Arc<Mutex<Store>>,
    segmentation: SegmentationConfig,
}

impl ApiState {
    pub fn new(store: Store, segmentation: SegmentationConfig) -> Self {
        ApiState {
            store: Arc::new(Mutex::new(store)),
            segmentation,
        }
    }

    /// Runs a store operation off the async executor.
    async fn with_store<T, F>(&self, f: F) -> Result<T, ApiError>
    where
        T: Send + 'static,
        F: FnOnce(&mut Store) -> Result<T, ApiError> + Send + 'static,
    {
        let store = Arc::clone(&self.store);
        tokio::task::spawn_blocking(move || {
            let mut guard = store.lock().unwrap_or_else(|p| p.into_inner());
            f(&mut guard)
        })
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, codes::INTERNAL, e.to_string()))?
    }
}

pub fn router(state: ApiState) -> Router {
    Router::new()
        .route("/users/{id}/sessions", get(user_sessions))
        .route("/sessions/{id}/graph", get(session_graph))
        .route("/sessions/{id}/entities/{eid}/snippets", get(node_snippets))
        .route("/groups/{id}/sessions", get(group_sessions))
        .route("/groups/{id}/tags", post(tag_result))
        .route("/logs", post(post_logs))
        .with_state(state)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Page {
    limit: usize,
    offset: usize,
}

impl Page {
    fn parse(q: &HashMap<String, String>) -> Result<Self, ApiError> {
        let num = |key: &str, default: usize| -> Result<usize, ApiError> {
            match q.get(key) {
                None => Ok(default),
                Some(v) => v
                    .parse()
                    .map_err(|_| ApiError::bad_request(format!("`{key}` must be a non-negative integer"))),
            }
        };
        Ok(Page {
            limit: num("limit", DEFAULT_PAGE_LIMIT)?,
            offset: num("offset", 0)?,
        })
    }

    fn apply<T>(self, items: Vec<T>) -> Vec<T> {
        items.into_iter().skip(self.offset).take(self.limit).collect()
    }
}

async fn user_sessions(
    State(state): State<ApiState>,
    Path(user_id): Path<String>,
    Query(q): Query<HashMap<String, String>>,
) -> Result<Json<Vec<SessionSummary>>, ApiError> {
    let page = Page::parse(&q)?;
    let all = state
        .with_store(move |s| Ok(s.user_session_summaries(&user_id)?))
        .await?;
    Ok(Json(page.apply(all)))
}

async fn session_graph(
    State(state): State<ApiState>,
    Path(session_id): Path<String>,
    Query(q): Query<HashMap<String, String>>,
) -> Result<Response, ApiError> {
    let sid = session_id.clone();
    let doc = state
        .with_store(move |s| Ok(s.graph_document(&sid)?))
        .await?
        .ok_or_else(|| {
            ApiError::new(
                StatusCode::CONFLICT,
                codes::GRAPH_PENDING,
                format!("graph for session `{session_id}` has not been computed yet"),
            )
        })?;
    let body = match q.get("focus") {
        None => doc,
        Some(eid) => {
            let parsed = GraphDocument::from_json(&doc)
                .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, codes::INTERNAL, e.to_string()))?;
            parsed
                .subgraph_of(eid)
                .map_err(|e| ApiError::new(StatusCode::NOT_FOUND, codes::NOT_FOUND, e.to_string()))?
                .to_canonical_json()
        }
    };
    Ok(([(header::CONTENT_TYPE, "application/json")], body).into_response())
}

async fn node_snippets(
    State(state): State<ApiState>,
    Path((session_id, entity_id)): Path<(String, String)>,
    Query(q): Query<HashMap<String, String>>,
) -> Result<Response, ApiError> {
    let page = Page::parse(&q)?;
    let items = state
        .with_store(move |s| Ok(s.node_snippets(&session_id, &entity_id)?))
        .await?;
    Ok(Json(page.apply(items)).into_response())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupSessionEntry {
    pub user_id: String,
    pub session: SessionSummary,
}

async fn group_sessions(
    State(state): State<ApiState>,
    Path(group_id): Path<String>,
    Query(q): Query<HashMap<String, String>>,
) -> Result<Json<Vec<GroupSessionEntry>>, ApiError> {
    let page = Page::parse(&q)?;
    let entries = state
        .with_store(move |s| {
            s.group_sessions(&group_id)?
                .into_iter()
                .map(|(user_id, session)| {
                    Ok(GroupSessionEntry {
                        user_id,
                        session: s.session_summary(&session)?,
                    })
                })
                .collect::<Result<Vec<_>, StoreError>>()
                .map_err(ApiError::from)
        })
        .await?;
    Ok(Json(page.apply(entries)))
}

#[derive(Debug, Deserialize)]
struct TagRequest {
    snippet_id: String,
}

async fn tag_result(
    State(state): State<ApiState>,
    Path(group_id): Path<String>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Response, ApiError> {
    let user = headers
        .get(USER_HEADER)
        .and_then(|v| v.to_str().ok())
        .filter(|v| !v.is_empty())
        .ok_or_else(|| ApiError::bad_request("missing X-User-Id header"))?
        .to_string();
    let req: TagRequest =
        serde_json::from_slice(&body).map_err(|e| ApiError::bad_request(format!("invalid tag request: {e}")))?;
    let now = Timestamp::from(chrono::Utc::now());
    let tag = state
        .with_store(move |s| Ok(s.tag_result(&req.snippet_id, &group_id, &user, now)?))
        .await?;
    Ok((StatusCode::CREATED, Json(tag)).into_response())
}

async fn post_logs(State(state): State<ApiState>, body: Bytes) -> Result<Response, ApiError> {
    let text = std::str::from_utf8(&body).map_err(|_| ApiError::new(StatusCode::BAD_REQUEST, codes::INVALID_LOG, "body is not UTF-8"))?;
    let entries = parse_log(text).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, codes::INVALID_LOG, e.to_string()))?;
    let seg = state.segmentation;
    let report = state.with_store(move |s| Ok(s.ingest(&entries, &seg)?)).await?;
    Ok(Json(report).into_response())
}

/// Serves the API until the listener fails or the process ends.
pub async fn serve(listener: tokio::net::TcpListener, app: Router) -> std::io::Result<()> {
    axum::serve(listener, app).await
}
