//! HTTP API for live sessions between a human and a machine agent.
//!
//! Responses only ever carry the human's own view of a session: the
//! machine's private value and every Thought stay on the server.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use bargain_core::agents::{observe, Agent, AgentSpec, Observation, DEFAULT_RETRY_BUDGET};
use bargain_core::catalog::{configure_session, DEFAULT_BUDGET_FACTOR, DEFAULT_MAX_TURNS, DEFAULT_SIGMA};
use bargain_core::harness::LogWriter;
use bargain_core::metrics::SessionScore;
use bargain_core::protocol::{
    parse_action, play_half_move, RejectedReply, Role, SessionRecord, SessionState, SessionStatus, Turn,
    ViolationKind,
};
use bargain_core::{Catalog, Money};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone)]
pub struct ServeConfig {
    pub budget_factor: f64,
    pub max_turns: u32,
    pub sigma: Money,
    /// Machine agent when the human sells.
    pub buyer_agent: AgentSpec,
    /// Machine agent when the human buys.
    pub seller_agent: AgentSpec,
    pub retry_budget: u32,
    pub idle_timeout: Duration,
    /// Finished sessions are appended here when set.
    pub log: Option<PathBuf>,
}

impl Default for ServeConfig {
    fn default() -> Self {
        ServeConfig {
            budget_factor: DEFAULT_BUDGET_FACTOR,
            max_turns: DEFAULT_MAX_TURNS,
            sigma: DEFAULT_SIGMA,
            buyer_agent: AgentSpec::Og {
                narrator: bargain_core::agents::NarratorSpec::Template,
                floor: 0.5,
                ceiling: 1.0,
            },
            seller_agent: AgentSpec::ScriptedSeller { m: 0.0, s0: 1.0 },
            retry_budget: DEFAULT_RETRY_BUDGET,
            idle_timeout: Duration::from_secs(30 * 60),
            log: None,
        }
    }
}

struct LiveSession {
    id: String,
    state: SessionState,
    human_role: Role,
    machine: Box<dyn Agent>,
    raws: Vec<String>,
    rejected: Vec<RejectedReply>,
    last_active: Instant,
}

impl LiveSession {
    fn machine_moves(&mut self, retry_budget: u32) {
        while self.state.status().is_open() && self.state.next_mover() != self.human_role {
            if let Some(raw) = play_half_move(&mut self.state, self.machine.as_mut(), retry_budget, &mut self.rejected) {
                self.raws.push(raw);
            }
        }
    }

    fn record(&self) -> SessionRecord {
        SessionRecord::from_state(self.id.clone(), &self.state, self.raws.clone(), self.rejected.clone())
    }
}

struct Shared {
    catalog: Catalog,
    config: ServeConfig,
    sessions: Mutex<HashMap<String, Arc<Mutex<LiveSession>>>>,
    counter: AtomicU64,
    log: Option<Mutex<LogWriter>>,
}

#[derive(Clone)]
pub struct AppState(Arc<Shared>);

impl AppState {
    pub fn new(catalog: Catalog, config: ServeConfig) -> bargain_core::Result<Self> {
        let log = match &config.log {
            Some(path) => Some(Mutex::new(LogWriter::create(path, true)?)),
            None => None,
        };
        Ok(AppState(Arc::new(Shared {
            catalog,
            config,
            sessions: Mutex::new(HashMap::new()),
            counter: AtomicU64::new(1),
            log,
        })))
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<LiveSession>>, ApiError> {
        self.0
            .sessions
            .lock()
            .expect("session map poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "unknown_session", format!("no session `{id}`")))
    }

    /// Drops sessions idle for longer than the configured timeout and
    /// returns how many were removed.
    pub fn sweep_expired(&self) -> usize {
        let timeout = self.0.config.idle_timeout;
        let mut map = self.0.sessions.lock().expect("session map poisoned");
        let before = map.len();
        // A session busy with a machine move is locked and therefore active.
        map.retain(|_, s| s.try_lock().map_or(true, |s| s.last_active.elapsed() < timeout));
        before - map.len()
    }

    pub fn live_sessions(&self) -> usize {
        self.0.sessions.lock().expect("session map poisoned").len()
    }

    fn finish(&self, session: &LiveSession) {
        if let Some(log) = &self.0.log {
            if let Err(e) = log.lock().expect("log poisoned").append(&session.record()) {
                tracing::warn!(error = %e, "could not log finished session");
            }
        }
    }
}

#[derive(Debug, Serialize)]
struct ErrorBody {
    error: String,
    message: String,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: ErrorBody,
}

impl ApiError {
    fn new(status: StatusCode, error: &str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            body: ErrorBody {
                error: error.to_string(),
                message: message.into(),
            },
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

/// A session's outcome restricted to the human's side.
#[derive(Debug, Serialize)]
pub struct RoleScore {
    pub session_id: String,
    pub role: Role,
    pub valid: bool,
    pub dealt: bool,
    pub deal_price: Option<Money>,
    #[serde(rename = "P_b", skip_serializing_if = "Option::is_none")]
    pub p_b: Option<Money>,
    #[serde(rename = "NP_b", skip_serializing_if = "Option::is_none")]
    pub np_b: Option<f64>,
    #[serde(rename = "P_s", skip_serializing_if = "Option::is_none")]
    pub p_s: Option<Money>,
    #[serde(rename = "NP_s", skip_serializing_if = "Option::is_none")]
    pub np_s: Option<f64>,
    #[serde(rename = "FBR", skip_serializing_if = "Option::is_none")]
    pub fbr: Option<f64>,
}

impl RoleScore {
    fn new(score: SessionScore, role: Role) -> Self {
        let buyer = role == Role::Buyer;
        RoleScore {
            session_id: score.session_id,
            role,
            valid: score.valid,
            dealt: score.dealt,
            deal_price: score.deal_price,
            p_b: if buyer { score.p_b } else { None },
            np_b: buyer.then_some(score.np_b),
            p_s: if buyer { None } else { score.p_s },
            np_s: (!buyer).then_some(score.np_s),
            fbr: if buyer { score.fbr } else { None },
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SessionView {
    pub session_id: String,
    pub human_role: Role,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quit_by: Option<Role>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub invalid_reason: Option<String>,
    pub deal_price: Option<Money>,
    pub observation: Observation,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub score: Option<RoleScore>,
}

fn status_name(status: &SessionStatus) -> &'static str {
    match status {
        SessionStatus::Open => "open",
        SessionStatus::Deal { .. } => "deal",
        SessionStatus::NoDealQuit { .. } => "quit",
        SessionStatus::NoDealExhausted => "exhausted",
        SessionStatus::Invalid { .. } => "invalid",
    }
}

fn view(s: &LiveSession) -> SessionView {
    let status = s.state.status();
    let score = (!status.is_open()).then(|| RoleScore::new(SessionScore::from_record(&s.record()), s.human_role));
    SessionView {
        session_id: s.id.clone(),
        human_role: s.human_role,
        status: status_name(status),
        quit_by: match status {
            SessionStatus::NoDealQuit { by } => Some(*by),
            _ => None,
        },
        invalid_reason: match status {
            SessionStatus::Invalid { reason } => Some(reason.clone()),
            _ => None,
        },
        deal_price: status.deal_price(),
        observation: observe(&s.state, s.human_role),
        score,
    }
}

#[derive(Debug, Deserialize)]
pub struct CreateSession {
    /// A codename from the catalog, or `random`.
    #[serde(default)]
    pub codename: Option<String>,
    pub human_role: Role,
    /// Machine agent spec; defaults to the server's choice for the role.
    #[serde(default)]
    pub agent: Option<String>,
}

#[derive(Debug, Deserialize)]
pub struct PostTurn {
    #[serde(default)]
    pub talk: String,
    pub action: String,
}

async fn create_session(
    State(app): State<AppState>,
    Json(req): Json<CreateSession>,
) -> Result<(StatusCode, Json<SessionView>), ApiError> {
    let shared = &app.0;
    let product = match req.codename.as_deref() {
        None | Some("random") => {
            if shared.catalog.is_empty() {
                return Err(ApiError::new(StatusCode::NOT_FOUND, "unknown_codename", "the catalog is empty"));
            }
            &shared.catalog.products()[rand::random_range(0..shared.catalog.len())]
        }
        Some(code) => shared.catalog.get(code).ok_or_else(|| {
            ApiError::new(StatusCode::NOT_FOUND, "unknown_codename", format!("no product `{code}`"))
        })?,
    };
    let machine_role = req.human_role.counterpart();
    let spec = match &req.agent {
        Some(text) => text
            .parse::<AgentSpec>()
            .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "agent_spec", e.to_string()))?,
        None => match machine_role {
            Role::Buyer => shared.config.buyer_agent.clone(),
            Role::Seller => shared.config.seller_agent.clone(),
        },
    };
    if spec == AgentSpec::Human || !spec.supports(machine_role) {
        return Err(ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "agent_spec",
            format!("`{spec}` cannot play the {machine_role} role"),
        ));
    }
    let config = configure_session(product, shared.config.budget_factor, shared.config.max_turns, shared.config.sigma)
        .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "session_config", e.to_string()))?;
    let n = shared.counter.fetch_add(1, Ordering::Relaxed);
    let id = format!("live-{n}-{}", config.codename());
    let machine = spec
        .build(machine_role, &config, n)
        .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "agent_config", e.to_string()))?;
    let mut session = LiveSession {
        id: id.clone(),
        state: SessionState::new(config),
        human_role: req.human_role,
        machine,
        raws: Vec::new(),
        rejected: Vec::new(),
        last_active: Instant::now(),
    };
    let retry_budget = shared.config.retry_budget;
    let app2 = app.clone();
    let session = tokio::task::spawn_blocking(move || {
        // The machine opens when the human sells.
        session.machine_moves(retry_budget);
        if !session.state.status().is_open() {
            app2.finish(&session);
        }
        session
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?;
    let body = view(&session);
    tracing::info!(session_id = %id, human = %req.human_role, "session created");
    shared
        .sessions
        .lock()
        .expect("session map poisoned")
        .insert(id, Arc::new(Mutex::new(session)));
    Ok((StatusCode::CREATED, Json(body)))
}

async fn get_session(State(app): State<AppState>, Path(id): Path<String>) -> Result<Json<SessionView>, ApiError> {
    let session = app.session(&id)?;
    let mut s = session.lock().expect("session poisoned");
    s.last_active = Instant::now();
    Ok(Json(view(&s)))
}

fn violation_status(kind: ViolationKind) -> StatusCode {
    match kind {
        ViolationKind::NotYourTurn | ViolationKind::SessionClosed => StatusCode::CONFLICT,
        _ => StatusCode::UNPROCESSABLE_ENTITY,
    }
}

async fn post_turn(
    State(app): State<AppState>,
    Path(id): Path<String>,
    Json(req): Json<PostTurn>,
) -> Result<Json<SessionView>, ApiError> {
    let action = parse_action(&req.action)
        .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.kind.as_str(), e.message))?;
    let session = app.session(&id)?;
    let retry_budget = app.0.config.retry_budget;
    tokio::task::spawn_blocking(move || {
        let mut s = session.lock().expect("session poisoned");
        s.last_active = Instant::now();
        let turn = Turn::new(s.human_role, "", req.talk, action);
        if let Err(v) = s.state.check_legality(&turn) {
            return Err(ApiError::new(violation_status(v.kind), v.kind.as_str(), v.message));
        }
        let raw = turn.to_message();
        s.state.advance(turn).expect("legality already checked");
        s.raws.push(raw);
        s.machine_moves(retry_budget);
        s.last_active = Instant::now();
        if !s.state.status().is_open() {
            app.finish(&s);
        }
        Ok(Json(view(&s)))
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?
}

async fn get_score(State(app): State<AppState>, Path(id): Path<String>) -> Result<Json<RoleScore>, ApiError> {
    let session = app.session(&id)?;
    let s = session.lock().expect("session poisoned");
    if s.state.status().is_open() {
        return Err(ApiError::new(StatusCode::CONFLICT, "session_open", "the session has not ended"));
    }
    Ok(Json(RoleScore::new(SessionScore::from_record(&s.record()), s.human_role)))
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/turn", post(post_turn))
        .route("/sessions/{id}/score", get(get_score))
        .with_state(state)
}

/// Serves until interrupted, sweeping idle sessions once a minute.
pub async fn serve(bind: &str, state: AppState) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(bind).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    let sweeper = state.clone();
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(Duration::from_secs(60));
        loop {
            tick.tick().await;
            let dropped = sweeper.sweep_expired();
            if dropped > 0 {
                tracing::info!(dropped, "expired idle sessions");
            }
        }
    });
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
