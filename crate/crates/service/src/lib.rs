//! HTTP/JSON front end for scenario analysis and live supervision sessions.
//!
//! Everything lives in memory: a restart drops all scenarios and sessions.
//! Clients that need a durable record download the session export.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::{Arc, Mutex, RwLock};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use trustwatch_core::analysis::{analyze_game, AnalysisBundle, AnalysisError, AnalysisOptions};
use trustwatch_core::game::{MatrixSource, TrustGame};
use trustwatch_core::region::OptimalMonitoringResult;
use trustwatch_core::scenario::{LoadedScenario, ScenarioDocument, ScenarioError};
use trustwatch_core::simulator::{session_summary, Session, SessionConfig, SessionSummary, SimulationError};

/// Server-chosen seeds stay below 2^53 so JavaScript clients read them exactly.
const MAX_SERVER_SEED: u64 = (1 << 53) - 1;

#[derive(Debug, Clone, Copy, Default)]
pub struct ServiceConfig {
    /// Default for sessions that don't say: hide the robot's plan in trial responses.
    pub blind: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    pub details: Value,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: ErrorBody,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>, details: Value) -> Self {
        ApiError { status, body: ErrorBody { code: code.into(), message: message.into(), details } }
    }

    fn not_found(kind: &str, id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", format!("unknown {kind} `{id}`"), json!({ "id": id }))
    }

    fn unprocessable(code: &str, message: impl Into<String>, details: Value) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, code, message, details)
    }

    fn bad_body(err: serde_json::Error) -> Self {
        Self::unprocessable("invalid_body", err.to_string(), Value::Null)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

impl From<ScenarioError> for ApiError {
    fn from(err: ScenarioError) -> Self {
        let details = match &err {
            ScenarioError::Schema { path, message } => json!({ "path": path, "message": message }),
            ScenarioError::Invalid(inv) => json!({ "violations": inv.0 }),
        };
        ApiError::unprocessable("invalid_scenario", err.to_string(), details)
    }
}

impl From<AnalysisError> for ApiError {
    fn from(err: AnalysisError) -> Self {
        match err {
            AnalysisError::Scenario(e) => e.into(),
            AnalysisError::Margin(_) => ApiError::unprocessable("invalid_query", err.to_string(), Value::Null),
        }
    }
}

impl From<SimulationError> for ApiError {
    fn from(err: SimulationError) -> Self {
        let message = err.to_string();
        match err {
            SimulationError::TrialLimit { limit } => {
                ApiError::new(StatusCode::CONFLICT, "trial_limit_reached", message, json!({ "trial_limit": limit }))
            }
            SimulationError::InvalidStrategy(_) => ApiError::unprocessable("invalid_strategy", message, Value::Null),
            _ => ApiError::unprocessable("invalid_session", message, Value::Null),
        }
    }
}

struct StoredScenario {
    id: String,
    game: TrustGame,
    /// Default analysis optimum, overlaid on session summaries.
    optimum: Option<OptimalMonitoringResult>,
}

struct LiveSession {
    session: Session,
    blind: bool,
    scenario: Arc<StoredScenario>,
}

#[derive(Default)]
struct Store {
    scenarios: RwLock<HashMap<String, Arc<StoredScenario>>>,
    sessions: RwLock<HashMap<String, Arc<Mutex<LiveSession>>>>,
}

#[derive(Clone)]
pub struct AppState {
    store: Arc<Store>,
    config: ServiceConfig,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Self {
        AppState { store: Arc::default(), config }
    }

    fn scenario(&self, id: &str) -> Result<Arc<StoredScenario>, ApiError> {
        let map = self.store.scenarios.read().expect("scenario store poisoned");
        map.get(id).cloned().ok_or_else(|| ApiError::not_found("scenario", id))
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<LiveSession>>, ApiError> {
        let map = self.store.sessions.read().expect("session store poisoned");
        map.get(id).cloned().ok_or_else(|| ApiError::not_found("session", id))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioCreated {
    pub scenario_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionHandle {
    pub session_id: String,
    pub created_at: DateTime<Utc>,
    pub scenario_ref: String,
    pub trial_limit: u32,
    pub seed: u64,
    pub config: SessionConfig,
    pub blind: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewSession {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(alias = "trialLimit")]
    pub trial_limit: u32,
    #[serde(default, alias = "mergedMonitoring")]
    pub merged_monitoring: bool,
    #[serde(default, alias = "monitorSplit")]
    pub monitor_split: Option<f64>,
    #[serde(default, alias = "responseSource")]
    pub response_source: Option<MatrixSource>,
    #[serde(default)]
    pub blind: Option<bool>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialRequest {
    pub strategy: Vec<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct AnalysisQuery {
    pub boundary_source: Option<MatrixSource>,
    pub epsilon: Option<f64>,
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/scenarios", post(create_scenario))
        .route("/scenarios/{id}/analysis", get(scenario_analysis))
        .route("/scenarios/{id}/sessions", post(create_session))
        .route("/sessions/{id}/trials", post(post_trial))
        .route("/sessions/{id}/summary", get(get_summary))
        .route("/sessions/{id}/export", get(get_export))
        .with_state(state)
}

pub async fn serve(addr: SocketAddr, config: ServiceConfig) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(AppState::new(config))).await
}

fn parse_json<T: serde::de::DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(ApiError::bad_body)
}

async fn create_scenario(
    State(state): State<AppState>,
    body: Bytes,
) -> Result<(StatusCode, Json<ScenarioCreated>), ApiError> {
    let text = std::str::from_utf8(&body)
        .map_err(|e| ApiError::unprocessable("invalid_body", e.to_string(), Value::Null))?;
    let LoadedScenario { cost_model, .. } = ScenarioDocument::parse(text)?.resolve()?;
    let game = TrustGame::build(cost_model).map_err(ScenarioError::from)?;
    let optimum = analyze_game(&game, AnalysisOptions::default())?.optimum;
    let id = uuid::Uuid::new_v4().to_string();
    let stored = Arc::new(StoredScenario { id: id.clone(), game, optimum });
    state.store.scenarios.write().expect("scenario store poisoned").insert(id.clone(), stored);
    Ok((StatusCode::CREATED, Json(ScenarioCreated { scenario_id: id })))
}

async fn scenario_analysis(
    State(state): State<AppState>,
    Path(id): Path<String>,
    query: Result<Query<AnalysisQuery>, axum::extract::rejection::QueryRejection>,
) -> Result<Json<AnalysisBundle>, ApiError> {
    let scenario = state.scenario(&id)?;
    let Query(query) =
        query.map_err(|e| ApiError::unprocessable("invalid_query", e.body_text(), Value::Null))?;
    let options = AnalysisOptions {
        boundary_source: query.boundary_source.unwrap_or_default(),
        epsilon: query.epsilon.unwrap_or(0.0),
    };
    Ok(Json(analyze_game(&scenario.game, options)?))
}

async fn create_session(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<(StatusCode, Json<SessionHandle>), ApiError> {
    let scenario = state.scenario(&id)?;
    let req: NewSession = parse_json(&body)?;
    let mut config = SessionConfig::new(req.trial_limit);
    config.merged_monitoring = req.merged_monitoring;
    if let Some(split) = req.monitor_split {
        config.monitor_split = split;
    }
    if let Some(source) = req.response_source {
        config.response_source = source;
    }
    let seed = req.seed.unwrap_or_else(|| rand::thread_rng().gen_range(0..=MAX_SERVER_SEED));
    let session_id = uuid::Uuid::new_v4().to_string();
    let session = Session::new(session_id.clone(), scenario.game.clone(), seed, config)?;
    let blind = req.blind.unwrap_or(state.config.blind);
    let handle = SessionHandle {
        session_id: session_id.clone(),
        created_at: Utc::now(),
        scenario_ref: scenario.id.clone(),
        trial_limit: config.trial_limit,
        seed,
        config,
        blind,
    };
    let live = LiveSession { session, blind, scenario };
    state
        .store
        .sessions
        .write()
        .expect("session store poisoned")
        .insert(session_id, Arc::new(Mutex::new(live)));
    Ok((StatusCode::CREATED, Json(handle)))
}

async fn post_trial(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<Value>, ApiError> {
    let live = state.session(&id)?;
    let req: TrialRequest = parse_json(&body)?;
    let mut live = live.lock().expect("session poisoned");
    let blind = live.blind;
    let record = live.session.run_trial(&req.strategy)?;
    let mut doc = serde_json::to_value(record).expect("trial record serializes");
    if blind {
        doc["robot_choice"] = Value::Null;
    }
    Ok(Json(doc))
}

async fn get_summary(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<SessionSummary>, ApiError> {
    let live = state.session(&id)?;
    let live = live.lock().expect("session poisoned");
    let optimum = live.scenario.optimum;
    let summary = match live.session.trials() {
        [] => SessionSummary::empty(optimum),
        trials => session_summary(trials, optimum)?,
    };
    Ok(Json(summary))
}

async fn get_export(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let live = state.session(&id)?;
    let live = live.lock().expect("session poisoned");
    Ok(Json(serde_json::to_value(live.session.export()).expect("export serializes")))
}
