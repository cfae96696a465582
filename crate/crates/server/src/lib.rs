//! JSON-over-HTTP facade for the debate engine.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::{Path, RawQuery, Request, State};
use axum::http::{header, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::cors::CorsLayer;
use tracing::{error, info, warn};

use debate_arena_core::config::AppConfig;
use debate_arena_core::debate::Position;
use debate_arena_core::engine::{Engine, NewDebate};
use debate_arena_core::gateway::Gateway;
use debate_arena_core::store::{FileStore, DATA_DIR_ENV};
use debate_arena_core::Error;

/// Subject recorded when authentication is off.
pub const ANONYMOUS: &str = "anonymous";

/// Most topics one request may ask for.
pub const MAX_TOPIC_COUNT: usize = 50;

#[derive(Clone)]
pub struct AppState {
    pub engine: Arc<Engine>,
    pub auth: bool,
}

/// Authenticated caller, available to handlers behind the auth layer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subject(pub String);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: u16,
    pub code: String,
    pub message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError {
            status: status.as_u16(),
            code: code.to_string(),
            message: message.into(),
        }
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "invalid_argument", message)
    }

    pub fn unauthorized() -> Self {
        ApiError::new(StatusCode::UNAUTHORIZED, "unauthorized", "a bearer token is required")
    }

    pub fn internal() -> Self {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", "internal error")
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::InvalidArgument(_) => ApiError::invalid(msg),
            Error::NotFound(_) => ApiError::new(StatusCode::NOT_FOUND, "not_found", msg),
            Error::RoundInProgress(_) | Error::Conflict { .. } | Error::InvalidState(_) => {
                ApiError::new(StatusCode::CONFLICT, "round_in_progress", msg)
            }
            Error::DebateFinished(_) => ApiError::new(StatusCode::CONFLICT, "debate_finished", msg),
            Error::TurnExpired(_) => ApiError::new(StatusCode::CONFLICT, "turn_expired", msg),
            other => {
                error!(error = %other, "request failed");
                ApiError::internal()
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

type ApiResult<T> = Result<T, ApiError>;

/// Resolves the caller from an `Authorization` header value.
pub fn authenticate(enabled: bool, header: Option<&str>) -> ApiResult<String> {
    if !enabled {
        return Ok(ANONYMOUS.to_string());
    }
    let value = header.map(str::trim).unwrap_or("");
    let token = match value.split_once(' ') {
        Some((scheme, token)) if scheme.eq_ignore_ascii_case("bearer") => token.trim(),
        _ => "",
    };
    if token.is_empty() {
        Err(ApiError::unauthorized())
    } else {
        Ok(token.to_string())
    }
}

async fn auth_layer(State(state): State<AppState>, mut req: Request, next: Next) -> Response {
    let header = req
        .headers()
        .get(header::AUTHORIZATION)
        .and_then(|v| v.to_str().ok());
    match authenticate(state.auth, header) {
        Ok(subject) => {
            req.extensions_mut().insert(Subject(subject));
            next.run(req).await
        }
        Err(e) => e.into_response(),
    }
}

async fn blocking<T, F>(f: F) -> ApiResult<T>
where
    T: Send + 'static,
    F: FnOnce() -> debate_arena_core::Result<T> + Send + 'static,
{
    match tokio::task::spawn_blocking(f).await {
        Ok(r) => r.map_err(ApiError::from),
        Err(e) => {
            error!(error = %e, "worker task failed");
            Err(ApiError::internal())
        }
    }
}

fn parse_body<T: for<'de> Deserialize<'de>>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::invalid(format!("malformed body: {e}")))
}

#[derive(Deserialize)]
struct CreateBody {
    topic: Option<String>,
    user_position: String,
    rounds: Option<i64>,
}

#[derive(Deserialize)]
struct ArgumentBody {
    text: String,
}

async fn create_debate(
    State(state): State<AppState>,
    axum::Extension(Subject(subject)): axum::Extension<Subject>,
    body: Bytes,
) -> ApiResult<Response> {
    let body: CreateBody = parse_body(&body)?;
    let user_position: Position = body.user_position.parse().map_err(ApiError::from)?;
    let rounds = match body.rounds {
        None => None,
        Some(r) => Some(u32::try_from(r).map_err(|_| ApiError::invalid(format!("rounds {r} out of range")))?),
    };
    let request = NewDebate {
        topic: body.topic,
        user_position,
        rounds,
        subject,
    };
    let engine = state.engine.clone();
    let created = blocking(move || engine.create_debate(request)).await?;
    info!(debate = %created.debate_id, "debate created");
    let payload = json!({
        "debate_id": created.debate_id,
        "topic": created.topic,
        "user_position": created.user_position,
        "ai_position": created.ai_position,
        "rounds_total": created.rounds_total,
        "current_round": created.current_round,
        "turn_deadline": created.turn_deadline,
    });
    Ok((StatusCode::CREATED, Json(payload)).into_response())
}

async fn submit_argument(State(state): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<Response> {
    let body: ArgumentBody = parse_body(&body)?;
    let engine = state.engine.clone();
    let debate_id = id.clone();
    match blocking(move || engine.submit_argument(&debate_id, &body.text)).await {
        Ok(result) => Ok(Json(result).into_response()),
        Err(e) if e.code == "turn_expired" => {
            let engine = state.engine.clone();
            let now = engine.now_ms();
            let debate_id = id.clone();
            if let Err(forfeit) = blocking(move || engine.check_turn_timeout(&debate_id, now)).await {
                warn!(debate = %id, error = %forfeit.message, "forfeit failed");
            }
            Err(e)
        }
        Err(e) => Err(e),
    }
}

async fn get_debate(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let engine = state.engine.clone();
    let st = blocking(move || engine.get_state(&id)).await?;
    Ok(Json(st).into_response())
}

async fn get_result(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let engine = state.engine.clone();
    let result = blocking(move || engine.finalize(&id)).await?;
    Ok(Json(result).into_response())
}

fn query_map(raw: Option<String>) -> HashMap<String, String> {
    raw.unwrap_or_default()
        .split('&')
        .filter(|p| !p.is_empty())
        .map(|p| match p.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => (p.to_string(), String::new()),
        })
        .collect()
}

async fn get_topics(State(state): State<AppState>, RawQuery(raw): RawQuery) -> ApiResult<Response> {
    let q = query_map(raw);
    let number = |name: &str, default: u64| -> ApiResult<u64> {
        match q.get(name) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| ApiError::invalid(format!("{name} must be a non-negative integer"))),
        }
    };
    let count = number("count", 3)? as usize;
    let salt = number("salt", 0)?;
    if count > MAX_TOPIC_COUNT {
        return Err(ApiError::invalid(format!("count must be at most {MAX_TOPIC_COUNT}")));
    }
    let engine = state.engine.clone();
    let topics = blocking(move || engine.gateway().generate_topics(count, salt)).await?;
    Ok(Json(json!({ "topics": topics })).into_response())
}

async fn health() -> Json<serde_json::Value> {
    Json(json!({ "status": "ok" }))
}

async fn no_route() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such route")
}

async fn wrong_method() -> ApiError {
    ApiError::new(StatusCode::METHOD_NOT_ALLOWED, "invalid_argument", "method not allowed")
}

pub fn router(state: AppState) -> Router {
    let api = Router::new()
        .route("/debates", post(create_debate))
        .route("/debates/{id}", get(get_debate))
        .route("/debates/{id}/arguments", post(submit_argument))
        .route("/debates/{id}/result", get(get_result))
        .route("/topics", get(get_topics))
        .route_layer(middleware::from_fn_with_state(state.clone(), auth_layer));
    Router::new()
        .nest("/api", api)
        .route("/health", get(health))
        .fallback(no_route)
        .method_not_allowed_fallback(wrong_method)
        .layer(CorsLayer::permissive())
        .with_state(state)
}

#[derive(Debug, Clone)]
pub struct ServeOptions {
    pub host: String,
    pub port: u16,
    pub config: Option<PathBuf>,
    pub data_dir: Option<PathBuf>,
    pub auth: bool,
}

impl Default for ServeOptions {
    fn default() -> Self {
        ServeOptions {
            host: "127.0.0.1".into(),
            port: 8080,
            config: None,
            data_dir: None,
            auth: false,
        }
    }
}

/// Data directory: the flag, then the environment, then the config file,
/// then `./data`.
pub fn data_dir(options: &ServeOptions, config: &AppConfig) -> PathBuf {
    options
        .data_dir
        .clone()
        .or_else(|| std::env::var_os(DATA_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
        .or_else(|| config.data_dir.clone())
        .unwrap_or_else(|| PathBuf::from("data"))
}

/// Builds the engine over the file store and reloads stored debates.
pub fn build_state(options: &ServeOptions) -> debate_arena_core::Result<AppState> {
    let config = AppConfig::resolve(options.config.as_deref())?;
    let store = FileStore::open(data_dir(options, &config))?;
    let gateway = Gateway::new(&config.providers)?;
    let engine = Engine::new(config.engine.clone(), Arc::new(gateway), Arc::new(store))?.with_lexicon(config.lexicon()?);
    let loaded = engine.recover()?;
    info!(debates = loaded, "store loaded");
    Ok(AppState {
        engine: Arc::new(engine),
        auth: options.auth,
    })
}

/// Forfeits overdue turns once a second.
pub fn spawn_timeout_sweeper(engine: Arc<Engine>) -> tokio::task::JoinHandle<()> {
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(Duration::from_secs(1));
        loop {
            tick.tick().await;
            let engine = engine.clone();
            match tokio::task::spawn_blocking(move || engine.sweep_timeouts()).await {
                Ok(done) => {
                    for (id, outcome) in done {
                        match outcome {
                            Ok(_) => info!(debate = %id, "turn forfeited"),
                            Err(e) => warn!(debate = %id, error = %e, "timeout handling failed"),
                        }
                    }
                }
                Err(e) => error!(error = %e, "sweeper task failed"),
            }
        }
    })
}

pub async fn serve(state: AppState, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    info!(%addr, "listening");
    let sweeper = spawn_timeout_sweeper(state.engine.clone());
    let result = axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await;
    sweeper.abort();
    result
}
