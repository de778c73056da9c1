//! HTTP service. All routes live under `/api/v1`; see `docs/api.md` for the schemas.

use std::collections::{BTreeSet, HashMap};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex, OnceLock};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use limbscope_core::significance::{CompareConfig, SidePair, VisibilityReport};
use limbscope_core::{Interval, Side};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::engine::{self, CompareInputs, CompareResult, ComparisonPayload, Computed, EngineError, MAX_SERIES_POINTS};
use crate::error::StoreError;
use crate::session::{ExportFormat, PresentationDoc, Session};
use crate::store::{digest_id, AssessmentQuery, DocumentStore, COMPARISONS, PRESENTATIONS, SESSIONS};

#[derive(Debug, Clone)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError { status, code, message: message.into() }
    }

    fn bad_request(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, code, message)
    }
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: ErrorDetail<'a>,
}

#[derive(Serialize)]
struct ErrorDetail<'a> {
    code: &'a str,
    message: &'a str,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody { error: ErrorDetail { code: self.code, message: &self.message } };
        (self.status, Json(body)).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let (status, code) = match &e {
            StoreError::NotFound { .. } => (StatusCode::NOT_FOUND, "not_found"),
            StoreError::InvalidId(_) => (StatusCode::BAD_REQUEST, "invalid_id"),
            StoreError::Invalid { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_document"),
            StoreError::DanglingBrush(_) => (StatusCode::CONFLICT, "dangling_brush"),
            StoreError::Ingest(_) => (StatusCode::UNPROCESSABLE_ENTITY, "ingest_failed"),
            StoreError::Io { .. } | StoreError::Corrupt { .. } => (StatusCode::INTERNAL_SERVER_ERROR, "storage"),
        };
        ApiError::new(status, code, e.to_string())
    }
}

impl From<limbscope_core::Error> for ApiError {
    fn from(e: limbscope_core::Error) -> Self {
        use limbscope_core::Error as E;
        let (status, code) = match &e {
            E::CannotMuteAll => (StatusCode::CONFLICT, "cannot_mute_all"),
            E::UnknownMuscle(_) => (StatusCode::NOT_FOUND, "unknown_muscle"),
            E::IntervalOutOfBounds { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "out_of_bounds"),
            E::InvalidParameter(_) => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_parameter"),
            E::MismatchedAssessments(_) => (StatusCode::CONFLICT, "mismatched_assessments"),
            _ => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_input"),
        };
        ApiError::new(status, code, e.to_string())
    }
}

impl From<EngineError> for ApiError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::MissingSide { .. } => ApiError::new(StatusCode::CONFLICT, "missing_side", e.to_string()),
            EngineError::Store(s) => s.into(),
            EngineError::Core(c) => c.into(),
        }
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request("invalid_json", e.to_string()))
}

type Slot = Arc<OnceLock<Result<Arc<Computed>, ApiError>>>;

#[derive(Clone)]
pub struct AppState {
    pub store: Arc<DocumentStore>,
    pub defaults: CompareConfig,
    cache: Arc<Mutex<HashMap<String, Slot>>>,
    computations: Arc<AtomicUsize>,
}

impl AppState {
    pub fn new(store: Arc<DocumentStore>, defaults: CompareConfig) -> Self {
        AppState { store, defaults, cache: Arc::default(), computations: Arc::default() }
    }

    /// Number of comparisons computed so far; cache hits do not count.
    pub fn computations(&self) -> usize {
        self.computations.load(Ordering::Relaxed)
    }

    /// Scored comparison for `inputs`, memoized by content fingerprint. Concurrent
    /// requests for the same key wait for a single computation.
    fn computed(&self, inputs: &CompareInputs) -> ApiResult<(String, Arc<Computed>)> {
        let entries = engine::pair_entries(&self.store, &inputs.patient_id, &inputs.motion_type)?;
        let key = inputs.cache_key(&entries);
        let slot = {
            let mut cache = self.cache.lock().unwrap_or_else(|e| e.into_inner());
            cache.entry(key.clone()).or_default().clone()
        };
        let result = slot.get_or_init(|| {
            self.computations.fetch_add(1, Ordering::Relaxed);
            let a = self.store.load_assessment(&entries.affected)?;
            let u = self.store.load_assessment(&entries.unaffected)?;
            Ok(Arc::new(engine::compute_assessments(&a, &u, inputs)?))
        });
        match result {
            Ok(c) => Ok((key, c.clone())),
            Err(e) => {
                let mut cache = self.cache.lock().unwrap_or_else(|e| e.into_inner());
                if cache.get(&key).is_some_and(|s| Arc::ptr_eq(s, &slot)) {
                    cache.remove(&key);
                }
                Err(e.clone())
            }
        }
    }
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> ApiResult<T> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/v1/health", get(health))
        .route("/api/v1/assessments", get(list_assessments).post(ingest_assessment))
        .route("/api/v1/comparisons", post(create_comparison))
        .route("/api/v1/comparisons/{id}", get(get_comparison))
        .route("/api/v1/comparisons/{id}/threshold", post(set_threshold))
        .route("/api/v1/comparisons/{id}/mute", post(mute))
        .route("/api/v1/comparisons/{id}/truncate", post(truncate))
        .route("/api/v1/comparisons/{id}/brush", post(brush))
        .route("/api/v1/sessions", get(list_sessions).post(create_session))
        .route("/api/v1/sessions/{id}", get(get_session).put(put_session))
        .route("/api/v1/presentations", get(list_presentations).post(create_presentation))
        .route("/api/v1/presentations/{id}", get(get_presentation).put(put_presentation))
        .route("/api/v1/presentations/{id}/export", get(export_presentation))
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "no_route", "no such endpoint") })
        .with_state(state)
}

async fn health() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok" }))
}

fn parse_query(params: &HashMap<String, String>) -> ApiResult<AssessmentQuery> {
    let mut q = AssessmentQuery::default();
    for (key, value) in params {
        match key.as_str() {
            "patient" => q.patient = Some(value.clone()),
            "motion" => q.motion = Some(value.clone()),
            "side" => {
                q.side = Some(Side::parse(value).ok_or_else(|| {
                    ApiError::bad_request(
                        "invalid_filter",
                        format!("side must be 'affected' or 'unaffected', got '{value}'"),
                    )
                })?)
            }
            "page" => {
                let page: usize = value.parse().ok().filter(|p| *p >= 1).ok_or_else(|| {
                    ApiError::bad_request("invalid_filter", format!("page must be a positive integer, got '{value}'"))
                })?;
                q.page = Some(page);
            }
            other => {
                return Err(ApiError::bad_request(
                    "unknown_filter",
                    format!("unknown filter '{other}'; expected patient, motion, side or page"),
                ))
            }
        }
    }
    Ok(q)
}

async fn list_assessments(
    State(state): State<AppState>,
    Query(params): Query<HashMap<String, String>>,
) -> ApiResult<Response> {
    let q = parse_query(&params)?;
    let result = blocking(move || Ok(state.store.query_assessments(&q)?)).await?;
    Ok(Json(result).into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct IngestRequest {
    manifest_path: String,
}

async fn ingest_assessment(State(state): State<AppState>, body: Bytes) -> ApiResult<Response> {
    let req: IngestRequest = parse_body(&body)?;
    let entry = blocking(move || Ok(state.store.ingest_manifest(std::path::Path::new(&req.manifest_path))?)).await?;
    Ok((StatusCode::CREATED, Json(entry)).into_response())
}

/// Persisted state of a comparison handle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HandleState {
    pub id: String,
    pub inputs: CompareInputs,
    pub muted: BTreeSet<String>,
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HandleInfo {
    pub id: String,
    pub patient_id: String,
    pub motion_type: String,
    pub config: CompareConfig,
    /// Fingerprint of the inputs, config and truncations the cached scores came from.
    pub fingerprint: String,
    pub truncations: SidePair<Option<Interval>>,
    pub muted: BTreeSet<String>,
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonResponse {
    pub handle: HandleInfo,
    pub result: CompareResult,
    pub payload: ComparisonPayload,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResponse {
    pub handle: HandleInfo,
    pub visibility: VisibilityReport,
}

fn info(h: &HandleState, fingerprint: String) -> HandleInfo {
    HandleInfo {
        id: h.id.clone(),
        patient_id: h.inputs.patient_id.clone(),
        motion_type: h.inputs.motion_type.clone(),
        config: h.inputs.config.clone(),
        fingerprint,
        truncations: h.inputs.truncations.clone(),
        muted: h.muted.clone(),
        tau: h.tau,
    }
}

fn full_response(state: &AppState, h: &HandleState) -> ApiResult<ComparisonResponse> {
    let (key, computed) = state.computed(&h.inputs)?;
    let refined = engine::refine(&computed, &h.muted, h.tau)?;
    Ok(ComparisonResponse {
        handle: info(h, key),
        result: engine::compare_result(&refined, None)?,
        payload: engine::payload(&computed.video, &refined, MAX_SERIES_POINTS),
    })
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ConfigPatch {
    window_s: Option<f64>,
    hop_s: Option<f64>,
    k_min: Option<usize>,
    k_max: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateRequest {
    patient_id: String,
    motion_type: String,
    #[serde(default)]
    config: Option<ConfigPatch>,
    #[serde(default)]
    tau: Option<f64>,
    #[serde(default)]
    muted: BTreeSet<String>,
}

async fn create_comparison(State(state): State<AppState>, body: Bytes) -> ApiResult<Response> {
    let req: CreateRequest = parse_body(&body)?;
    let patch = req.config.unwrap_or_default();
    let d = &state.defaults;
    let config = CompareConfig {
        window_s: patch.window_s.unwrap_or(d.window_s),
        hop_s: patch.hop_s.unwrap_or(d.hop_s),
        k_min: patch.k_min.unwrap_or(d.k_min),
        k_max: patch.k_max.unwrap_or(d.k_max),
    };
    config.validate()?;
    let tau = req.tau.unwrap_or(0.0);
    check_tau(tau)?;
    let config_json = serde_json::to_string(&config).expect("config serializes");
    let id = digest_id(&[&req.patient_id, &req.motion_type, &config_json]);
    let h =
        HandleState { id, inputs: CompareInputs::new(req.patient_id, req.motion_type, config), muted: req.muted, tau };
    let response = blocking(move || {
        let response = full_response(&state, &h)?;
        state.store.put(COMPARISONS, &h.id, &h)?;
        Ok(response)
    })
    .await?;
    Ok((StatusCode::CREATED, Json(response)).into_response())
}

fn load_handle(state: &AppState, id: &str) -> ApiResult<HandleState> {
    Ok(state.store.get(COMPARISONS, id)?)
}

async fn get_comparison(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<ComparisonResponse>> {
    blocking(move || {
        let h = load_handle(&state, &id)?;
        full_response(&state, &h)
    })
    .await
    .map(Json)
}

fn check_tau(tau: f64) -> ApiResult<()> {
    if (0.0..=1.0).contains(&tau) {
        Ok(())
    } else {
        Err(ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "invalid_parameter",
            format!("tau must be in [0, 1], got {tau}"),
        ))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ThresholdRequest {
    tau: f64,
}

async fn set_threshold(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Json<ThresholdResponse>> {
    let req: ThresholdRequest = parse_body(&body)?;
    check_tau(req.tau)?;
    blocking(move || {
        let mut h = load_handle(&state, &id)?;
        h.tau = req.tau;
        let (key, computed) = state.computed(&h.inputs)?;
        let refined = engine::refine(&computed, &h.muted, h.tau)?;
        state.store.put(COMPARISONS, &h.id, &h)?;
        Ok(ThresholdResponse { handle: info(&h, key), visibility: refined.visibility() })
    })
    .await
    .map(Json)
}

fn yes() -> bool {
    true
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MuteRequest {
    muscle: String,
    #[serde(default = "yes")]
    muted: bool,
}

async fn mute(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Json<ComparisonResponse>> {
    let req: MuteRequest = parse_body(&body)?;
    blocking(move || {
        let mut h = load_handle(&state, &id)?;
        let (_, computed) = state.computed(&h.inputs)?;
        if computed.comparison.muscle(&req.muscle).is_none() {
            return Err(limbscope_core::Error::UnknownMuscle(req.muscle).into());
        }
        if req.muted {
            h.muted.insert(req.muscle);
        } else {
            h.muted.remove(&req.muscle);
        }
        let response = full_response(&state, &h)?;
        state.store.put(COMPARISONS, &h.id, &h)?;
        Ok(response)
    })
    .await
    .map(Json)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct IntervalRequest {
    side: Side,
    t0: f64,
    t1: f64,
}

async fn truncate(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Json<ComparisonResponse>> {
    let req: IntervalRequest = parse_body(&body)?;
    blocking(move || {
        let mut h = load_handle(&state, &id)?;
        let entry = state.store.entry(&h.inputs.patient_id, &h.inputs.motion_type, req.side)?;
        let interval = Interval::new(req.t0, req.t1);
        interval.check_within(&entry.bounds)?;
        *h.inputs.truncations.get_mut(req.side) = Some(interval);
        let response = full_response(&state, &h)?;
        state.store.put(COMPARISONS, &h.id, &h)?;
        Ok(response)
    })
    .await
    .map(Json)
}

async fn brush(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Json<engine::BrushResult>> {
    let req: IntervalRequest = parse_body(&body)?;
    blocking(move || {
        let h = load_handle(&state, &id)?;
        let (_, computed) = state.computed(&h.inputs)?;
        let refined = engine::refine(&computed, &h.muted, h.tau)?;
        Ok(engine::brush(&refined, &computed.video, req.side, Interval::new(req.t0, req.t1))?)
    })
    .await
    .map(Json)
}

#[derive(Serialize)]
struct IdList {
    ids: Vec<String>,
}

#[derive(Serialize)]
struct Saved {
    id: String,
}

async fn list_sessions(State(state): State<AppState>) -> ApiResult<Response> {
    let ids = blocking(move || Ok(state.store.ids(SESSIONS)?)).await?;
    Ok(Json(IdList { ids }).into_response())
}

async fn create_session(State(state): State<AppState>, body: Bytes) -> ApiResult<Response> {
    let session: Session = parse_body(&body)?;
    let id = blocking(move || Ok(state.store.save_session(&session)?)).await?;
    Ok((StatusCode::CREATED, Json(Saved { id })).into_response())
}

async fn get_session(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Session>> {
    blocking(move || Ok(state.store.load_session(&id)?)).await.map(Json)
}

fn check_path_id(path_id: &str, body_id: &str) -> ApiResult<()> {
    if path_id == body_id {
        Ok(())
    } else {
        Err(ApiError::bad_request("id_mismatch", format!("path id '{path_id}' does not match body id '{body_id}'")))
    }
}

async fn put_session(State(state): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<Saved>> {
    let session: Session = parse_body(&body)?;
    check_path_id(&id, &session.id)?;
    blocking(move || Ok(Saved { id: state.store.save_session(&session)? })).await.map(Json)
}

async fn list_presentations(State(state): State<AppState>) -> ApiResult<Response> {
    let ids = blocking(move || Ok(state.store.ids(PRESENTATIONS)?)).await?;
    Ok(Json(IdList { ids }).into_response())
}

async fn create_presentation(State(state): State<AppState>, body: Bytes) -> ApiResult<Response> {
    let doc = blocking(move || Ok(state.store.import_presentation(&body)?)).await?;
    Ok((StatusCode::CREATED, Json(Saved { id: doc.id })).into_response())
}

async fn get_presentation(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<PresentationDoc>> {
    blocking(move || Ok(state.store.load_presentation(&id)?)).await.map(Json)
}

async fn put_presentation(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Json<Saved>> {
    let doc: PresentationDoc = parse_body(&body)?;
    check_path_id(&id, &doc.id)?;
    blocking(move || Ok(Saved { id: state.store.save_presentation(&doc)? })).await.map(Json)
}

async fn export_presentation(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(params): Query<HashMap<String, String>>,
) -> ApiResult<Response> {
    let raw = params.get("format").map(String::as_str).unwrap_or("document");
    let format = ExportFormat::parse(raw).ok_or_else(|| {
        ApiError::bad_request("invalid_format", format!("format must be 'document' or 'static-render', got '{raw}'"))
    })?;
    let bytes = blocking(move || {
        let doc = state.store.load_presentation(&id)?;
        Ok(state.store.export_presentation(&doc, format)?)
    })
    .await?;
    Ok(([(header::CONTENT_TYPE, format.content_type())], bytes).into_response())
}

/// Binds `addr` and serves until ctrl-c.
pub async fn serve(state: AppState, addr: &str) -> anyhow::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(address = %listener.local_addr()?, "listening");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
