//! HTTP interface for staged assessment sessions.
//!
//! Stage gating is enforced by [`Session`]; this crate maps its errors onto
//! status codes (400 malformed, 404 unknown session or product, 409 protocol
//! order, 422 range) and persists every accepted mutation before replying.

mod error;
pub mod store;

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::IntoResponse;
use axum::routing::{get, post, put};
use axum::{Json, Router};
use formsense_core::api::{
    AnalyzeRequest, AppealBody, Comparison, ComparisonRecorded, Coverage, CreateSession, RulesBody,
};
use formsense_core::geometry::{self, ProfileTemplate};
use formsense_core::model::{
    AppealScores, DesignParams, Product, ProductId, Rule, RuleAssessmentSet, Session, SessionError, StageState,
    MAX_DISSIMILARITY,
};
use formsense_core::pipeline::{self, PipelineInputs, PipelineOptions, PipelineReport};
use formsense_core::fixtures;
use serde::Deserialize;
use tokio::net::TcpListener;

pub use error::ApiError;
pub use store::{SessionStore, StoreError};

pub const OPENAPI_YAML: &str = include_str!("../openapi.yaml");

#[derive(Debug, Clone)]
pub struct Config {
    pub data_dir: PathBuf,
    /// Served under `/` when set (the built assessment UI).
    pub static_dir: Option<PathBuf>,
}

type AppState = Arc<SessionStore>;
type ApiResult<T> = Result<T, ApiError>;

pub fn router(config: &Config) -> Router {
    let store: AppState = Arc::new(SessionStore::new(&config.data_dir));
    let api = Router::new()
        .route("/health", get(|| async { "ok" }))
        .route("/openapi.yaml", get(openapi))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/comparisons", post(post_comparison))
        .route("/sessions/{id}/coverage", get(get_coverage))
        .route("/sessions/{id}/stage1/complete", post(complete_stage1))
        .route("/sessions/{id}/appeal", put(put_appeal))
        .route("/sessions/{id}/rules", put(put_rules))
        .route("/sessions/{id}/analyze", post(analyze))
        .route("/products/{id}/profile.svg", get(profile_svg))
        .with_state(store);
    match &config.static_dir {
        Some(dir) => api.fallback_service(tower_http::services::ServeDir::new(dir)),
        None => api,
    }
}

/// Serves until the listener fails.
pub async fn serve(listener: TcpListener, config: &Config) -> std::io::Result<()> {
    tracing::info!(addr = ?listener.local_addr().ok(), data_dir = %config.data_dir.display(), "serving");
    axum::serve(listener, router(config)).await
}

/// Binds `addr` and serves in a background task; returns the bound address.
pub async fn spawn(addr: SocketAddr, config: Config) -> std::io::Result<SocketAddr> {
    let listener = TcpListener::bind(addr).await?;
    let bound = listener.local_addr()?;
    tokio::spawn(async move {
        if let Err(e) = serve(listener, &config).await {
            tracing::error!("server stopped: {e}");
        }
    });
    Ok(bound)
}

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> ApiResult<T> {
    payload.map(|Json(v)| v).map_err(|e| ApiError::malformed(e.body_text()))
}

async fn openapi() -> impl IntoResponse {
    ([(header::CONTENT_TYPE, "application/yaml")], OPENAPI_YAML)
}

async fn create_session(
    State(store): State<AppState>,
    payload: Result<Json<CreateSession>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<Session>)> {
    let req = body(payload)?;
    let id = req.id.unwrap_or_else(|| uuid::Uuid::new_v4().simple().to_string());
    if !store::is_valid_id(&id) {
        return Err(StoreError::InvalidId(id).into());
    }
    if let Some(labels) = &req.labels {
        if labels.len() != req.dims.len() {
            return Err(ApiError::invalid(format!("{} labels for {} products", labels.len(), req.dims.len())));
        }
    }
    let products = req
        .dims
        .iter()
        .enumerate()
        .map(|(k, &dims)| Product {
            id: k + 1,
            label: req.labels.as_ref().map_or_else(|| format!("G{}", k + 1), |l| l[k].clone()),
            dims,
        })
        .collect();
    let session = Session::new(id, products)?;
    Ok((StatusCode::CREATED, Json(store.create(session).await?)))
}

async fn get_session(State(store): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Session>> {
    Ok(Json(store.get(&id).await?))
}

async fn get_coverage(State(store): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Coverage>> {
    Ok(Json(Coverage::of(&store.get(&id).await?)))
}

fn product_id(raw: i64, n: usize) -> ApiResult<ProductId> {
    usize::try_from(raw)
        .ok()
        .filter(|&id| (1..=n).contains(&id))
        .ok_or_else(|| ApiError::invalid(format!("unknown product {raw}: ids run from 1 to {n}")))
}

async fn post_comparison(
    State(store): State<AppState>,
    Path(id): Path<String>,
    payload: Result<Json<Comparison>, JsonRejection>,
) -> ApiResult<Json<ComparisonRecorded>> {
    let c = body(payload)?;
    let value = u8::try_from(c.value)
        .ok()
        .filter(|&v| v <= MAX_DISSIMILARITY)
        .ok_or_else(|| ApiError::invalid(format!("dissimilarity {} outside 0..{MAX_DISSIMILARITY}", c.value)))?;
    let (previous, _) = store
        .update(&id, |s| {
            let n = s.n();
            let (i, j) = (product_id(c.i, n)?, product_id(c.j, n)?);
            Ok::<_, ApiError>(s.record_comparison(i, j, value)?)
        })
        .await??;
    let (i, j) = (c.i.min(c.j) as ProductId, c.i.max(c.j) as ProductId);
    Ok(Json(ComparisonRecorded { i, j, value, previous }))
}

async fn complete_stage1(State(store): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Session>> {
    let ((), session) = store.update(&id, Session::complete_stage1).await??;
    Ok(Json(session))
}

fn keyed<V>(map: BTreeMap<String, V>) -> ApiResult<BTreeMap<ProductId, V>> {
    map.into_iter()
        .map(|(k, v)| {
            k.trim()
                .parse::<ProductId>()
                .map(|id| (id, v))
                .map_err(|_| ApiError::malformed(format!("`{k}` is not a product id")))
        })
        .collect()
}

async fn put_appeal(
    State(store): State<AppState>,
    Path(id): Path<String>,
    payload: Result<Json<AppealBody>, JsonRejection>,
) -> ApiResult<Json<Session>> {
    let scores = keyed(body(payload)?)?;
    let ((), session) = store
        .update(&id, |s| {
            // Stage order is checked before the payload so a premature stage-2
            // request is always a protocol error.
            if s.stages.stage1 != StageState::Complete {
                return Err(ApiError::from(SessionError::StageOrder { stage: 2, requires: 1 }));
            }
            Ok(s.set_appeal(AppealScores::new(scores)?)?)
        })
        .await??;
    Ok(Json(session))
}

async fn put_rules(
    State(store): State<AppState>,
    Path(id): Path<String>,
    payload: Result<Json<RulesBody>, JsonRejection>,
) -> ApiResult<Json<Session>> {
    let raw = keyed(body(payload)?)?;
    let ((), session) = store
        .update(&id, |s| {
            if s.stages.stage2 != StageState::Complete {
                return Err(ApiError::from(SessionError::StageOrder { stage: 3, requires: 2 }));
            }
            let mut codes = BTreeMap::new();
            for (pid, row) in raw {
                let mut out = [0i8; 3];
                for (slot, &code) in out.iter_mut().zip(&row) {
                    *slot = match code {
                        -1..=1 => code as i8,
                        _ => {
                            return Err(ApiError::invalid(format!(
                                "rule code {code} for product {pid} outside {{-1, 0, 1}}"
                            )))
                        }
                    };
                }
                codes.insert(pid, out);
            }
            Ok(s.set_rules(RuleAssessmentSet::new(codes)?)?)
        })
        .await??;
    Ok(Json(session))
}

#[derive(Debug, Deserialize)]
struct ProfileQuery {
    rule: Option<String>,
    delta: Option<f64>,
    session: Option<String>,
}

async fn profile_svg(
    State(store): State<AppState>,
    Path(raw_id): Path<String>,
    query: Result<Query<ProfileQuery>, QueryRejection>,
) -> ApiResult<impl IntoResponse> {
    let Query(q) = query.map_err(|e| ApiError::malformed(e.body_text()))?;
    let dims: BTreeMap<ProductId, DesignParams> = match &q.session {
        Some(sid) => store.get(sid).await?.dims(),
        None => fixtures::dims(),
    };
    let params = raw_id
        .parse::<ProductId>()
        .ok()
        .and_then(|id| dims.get(&id).copied())
        .ok_or_else(|| ApiError::not_found(format!("product `{raw_id}` not found")))?;
    let params = match (q.rule.as_deref(), q.delta) {
        (None, None) => params,
        (None, Some(_)) => return Err(ApiError::malformed("delta requires rule")),
        (Some(rule), delta) => {
            let rule: Rule = rule.parse().map_err(ApiError::malformed)?;
            geometry::apply_rule(&params, rule, delta.unwrap_or_else(|| geometry::default_rule_delta(&params, rule)))?
        }
    };
    let shape = geometry::generate_profile(&ProfileTemplate::canonical(), &params, geometry::DEFAULT_SAMPLES_PER_SEGMENT)?;
    Ok(([(header::CONTENT_TYPE, "image/svg+xml")], geometry::profile_svg(&shape)))
}

async fn analyze(
    State(store): State<AppState>,
    Path(id): Path<String>,
    raw: Bytes,
) -> ApiResult<Json<PipelineReport>> {
    let req: AnalyzeRequest = if raw.iter().all(u8::is_ascii_whitespace) {
        AnalyzeRequest::default()
    } else {
        serde_json::from_slice(&raw).map_err(|e| ApiError::malformed(e.to_string()))?
    };
    if req.k != 2 {
        return Err(ApiError::invalid(format!("k = {}: the vector model needs a 2-dimensional perceptual space", req.k)));
    }
    let session = store.get(&id).await?;
    if !session.is_complete() {
        return Err(ApiError::new(StatusCode::CONFLICT, "protocol_order", "analysis needs all three stages complete"));
    }
    let inputs = PipelineInputs::from_session(&session)?;
    let options = PipelineOptions { seed: req.seed, ..Default::default() };
    tracing::info!(session = %id, seed = req.seed, "analysis started");
    let (report, _) = tokio::task::spawn_blocking(move || pipeline::run_pipeline(&inputs, &options))
        .await
        .map_err(|e| ApiError::internal(format!("analysis task failed: {e}")))??;
    Ok(Json(report))
}
