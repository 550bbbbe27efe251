//! JSON-over-HTTP read API, the admin ingest endpoint and the scheduler task.
//!
//! Routes:
//!
//! | method | path                     | query                  |
//! |--------|--------------------------|------------------------|
//! | GET    | `/api/nation`            | `from`, `to`           |
//! | GET    | `/api/state/{code}`      | `from`, `to`           |
//! | GET    | `/api/city/{name}`       | `from`, `to`           |
//! | GET    | `/api/snapshot/{date}`   |                        |
//! | GET    | `/api/events`            |                        |
//! | GET    | `/api/report`            | `region`, `from`, `to` |
//! | GET    | `/api/meta`              |                        |
//! | POST   | `/api/admin/ingest`      | bearer token required  |
//!
//! Dates are `YYYY-MM-DD`. A missing `from`/`to` defaults to the first/last
//! day with data in the store.

use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{NaiveDate, Utc};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::services::ServeDir;

use crate::aggregate::TriggerEvent;
use crate::ingest::{ingest_covid_stats, ingest_posts, CovidRecord, PostRecord};
use crate::job::{run_daily_job, Schedule};
use crate::pipeline::Pipeline;
use crate::region::RegionId;
use crate::store::{Store, StoreError, UpsertReceipt};

#[derive(Clone)]
pub struct AppState {
    pub store: Arc<Store>,
    pub pipeline: Arc<Pipeline>,
    pub events: Arc<Vec<TriggerEvent>>,
    pub admin_token: Option<String>,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self { status, message: message.into() }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }

    fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, message)
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let status = match e {
            StoreError::NotFound(_) => StatusCode::NOT_FOUND,
            StoreError::Range(_) | StoreError::Invariant(_) => StatusCode::BAD_REQUEST,
            StoreError::Io(_) | StoreError::Corrupt(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        Self::new(status, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message }))).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

#[derive(Debug, Default, Deserialize)]
pub struct RangeParams {
    from: Option<String>,
    to: Option<String>,
    region: Option<String>,
}

fn parse_date(s: &str) -> Result<NaiveDate, ApiError> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").map_err(|_| ApiError::bad_request(format!("invalid date {s:?}, expected YYYY-MM-DD")))
}

fn resolve_range(store: &Store, params: &RangeParams) -> Result<(NaiveDate, NaiveDate), ApiError> {
    let from = params.from.as_deref().map(parse_date).transpose()?;
    let to = params.to.as_deref().map(parse_date).transpose()?;
    match (from, to) {
        (Some(f), Some(t)) => Ok((f, t)),
        (f, t) => {
            let (lo, hi) = store
                .data_range()
                .ok_or_else(|| ApiError::bad_request("store has no data; pass explicit from and to"))?;
            Ok((f.unwrap_or(lo), t.unwrap_or(hi)))
        }
    }
}

async fn nation(State(app): State<AppState>, Query(p): Query<RangeParams>) -> ApiResult<crate::store::QueryResponse> {
    let (from, to) = resolve_range(&app.store, &p)?;
    Ok(Json(app.store.query_region(&RegionId::nation(), from, to)?))
}

async fn state(
    State(app): State<AppState>,
    Path(code): Path<String>,
    Query(p): Query<RangeParams>,
) -> ApiResult<crate::store::QueryResponse> {
    let region = RegionId::state(&code).map_err(|e| ApiError::not_found(e.to_string()))?;
    let (from, to) = resolve_range(&app.store, &p)?;
    Ok(Json(app.store.query_region(&region, from, to)?))
}

async fn city(
    State(app): State<AppState>,
    Path(name): Path<String>,
    Query(p): Query<RangeParams>,
) -> ApiResult<crate::store::QueryResponse> {
    let region = RegionId::city(&name).map_err(|e| ApiError::not_found(e.to_string()))?;
    let (from, to) = resolve_range(&app.store, &p)?;
    Ok(Json(app.store.query_region(&region, from, to)?))
}

async fn snapshot(State(app): State<AppState>, Path(date): Path<String>) -> ApiResult<crate::store::Snapshot> {
    Ok(Json(app.store.snapshot(parse_date(&date)?)))
}

#[derive(Serialize)]
struct DateRange {
    from: NaiveDate,
    to: NaiveDate,
}

#[derive(Serialize)]
struct EventsResponse<'a> {
    /// Served data range, `null` when the store is empty.
    range: Option<DateRange>,
    events: Vec<&'a TriggerEvent>,
}

async fn events(State(app): State<AppState>) -> Response {
    let range = app.store.data_range();
    let events = app
        .events
        .iter()
        .filter(|e| range.map_or(true, |(lo, hi)| e.date >= lo && e.date <= hi))
        .collect();
    let body = EventsResponse { range: range.map(|(from, to)| DateRange { from, to }), events };
    Json(body).into_response()
}

async fn report(State(app): State<AppState>, Query(p): Query<RangeParams>) -> ApiResult<crate::aggregate::Report> {
    let region = match p.region.as_deref() {
        Some(code) => RegionId::parse(code).map_err(|e| ApiError::not_found(e.to_string()))?,
        None => RegionId::nation(),
    };
    let (from, to) = resolve_range(&app.store, &p)?;
    Ok(Json(app.store.report(&region, from, to)?))
}

async fn meta(State(app): State<AppState>) -> Response {
    let range = app.store.data_range();
    Json(json!({
        "range": range.map(|(from, to)| DateRange { from, to }),
        "last_job_day": app.store.last_job_day(),
        "states": RegionId::all_states().map(|r| json!({"code": r.code(), "name": r.display_name()})).collect::<Vec<_>>(),
        "cities": RegionId::all_cities().map(|r| r.code()).collect::<Vec<_>>(),
    }))
    .into_response()
}

#[derive(Debug, Default, Serialize, Deserialize)]
pub struct AdminIngest {
    #[serde(default)]
    pub posts: Vec<PostRecord>,
    #[serde(default)]
    pub covid: Vec<CovidRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AdminIngestResponse {
    pub accepted_posts: usize,
    pub rejected_posts: usize,
    pub rejected_covid: usize,
    pub receipt: UpsertReceipt,
}

fn authorized(app: &AppState, headers: &HeaderMap) -> Result<(), ApiError> {
    let Some(expected) = app.admin_token.as_deref() else {
        return Err(ApiError::new(StatusCode::FORBIDDEN, "admin ingest is disabled"));
    };
    let given = headers
        .get(header::AUTHORIZATION)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "));
    if given == Some(expected) {
        Ok(())
    } else {
        Err(ApiError::new(StatusCode::UNAUTHORIZED, "invalid admin token"))
    }
}

async fn admin_ingest(
    State(app): State<AppState>,
    headers: HeaderMap,
    Json(body): Json<AdminIngest>,
) -> ApiResult<AdminIngestResponse> {
    authorized(&app, &headers)?;
    let result = tokio::task::spawn_blocking(move || -> Result<AdminIngestResponse, ApiError> {
        let total = body.posts.len();
        let mut jsonl = Vec::new();
        for rec in &body.posts {
            serde_json::to_writer(&mut jsonl, rec).map_err(|e| ApiError::bad_request(e.to_string()))?;
            jsonl.push(b'\n');
        }
        let posts = ingest_posts(jsonl.as_slice(), app.pipeline.config().clone())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| ApiError::bad_request(e.to_string()))?;
        let accepted = posts.len();
        let covid_json = serde_json::to_vec(&json!({ "records": body.covid })).map_err(|e| ApiError::bad_request(e.to_string()))?;
        let covid = ingest_covid_stats(covid_json.as_slice()).map_err(|e| ApiError::bad_request(e.to_string()))?;
        let out = app.pipeline.run(posts);
        let receipt = app.store.upsert_day(&out.aggregates, &covid.records)?;
        Ok(AdminIngestResponse {
            accepted_posts: accepted,
            rejected_posts: total - accepted,
            rejected_covid: covid.rejected.len(),
            receipt,
        })
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    Ok(Json(result))
}

pub fn router(app: AppState, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/nation", get(nation))
        .route("/api/state/:code", get(state))
        .route("/api/city/:name", get(city))
        .route("/api/snapshot/:date", get(snapshot))
        .route("/api/events", get(events))
        .route("/api/report", get(report))
        .route("/api/meta", get(meta))
        .route("/api/admin/ingest", post(admin_ingest))
        .with_state(app);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

/// Runs the daily job at every firing of `schedule` until the task is dropped.
pub fn spawn_scheduler(
    schedule: Schedule,
    data_dir: PathBuf,
    pipeline: Arc<Pipeline>,
    store: Arc<Store>,
) -> tokio::task::JoinHandle<()> {
    tokio::spawn(async move {
        loop {
            let now = Utc::now();
            let next = schedule.next_after(now);
            log::info!("next daily job at {next}");
            let wait = (next - now).to_std().unwrap_or_default();
            tokio::time::sleep(wait).await;
            let (dir, p, s) = (data_dir.clone(), pipeline.clone(), store.clone());
            match tokio::task::spawn_blocking(move || run_daily_job(Utc::now(), &dir, &p, &s)).await {
                Ok(report) => log::info!("daily job {report}"),
                Err(e) => log::error!("daily job panicked: {e}"),
            }
        }
    })
}
