use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::QueryRejection;
use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use pivotmodel::io::DataLayout;
use pivotmodel::pivot::{CellEdit, PivotModel};
use pivotmodel::trace::export_docs_csv;
use pivotmodel::view::ViewSpec;
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::ApiError;
use crate::registry::{model_from_json, Registry, SharedModel};
use crate::wire::*;

type AppState = Arc<Registry>;
type ApiResult<T> = Result<T, ApiError>;

pub fn router(registry: Arc<Registry>, max_body_bytes: usize) -> Router {
    Router::new()
        .route("/health", get(|| async { "ok" }))
        .route("/models", post(create_model).get(list_models))
        .route("/models/{id}", axum::routing::delete(delete_model))
        .route("/models/{id}/structure", get(structure))
        .route("/models/{id}/stats", get(stats))
        .route("/models/{id}/data", post(load_data))
        .route("/models/{id}/calc", post(calculate))
        .route("/models/{id}/view", post(view))
        .route("/models/{id}/cells", axum::routing::put(write_cells))
        .route("/models/{id}/rules", get(rules).patch(patch_rules))
        .route("/models/{id}/trace", post(trace))
        .route("/models/{id}/docs", get(docs))
        .route("/models/{id}/audit", get(audit))
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint") })
        .layer(DefaultBodyLimit::max(max_body_bytes))
        .with_state(registry)
}

fn parse_json<T: DeserializeOwned>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("invalid JSON body: {e}")))
}

fn query<T>(q: Result<Query<T>, QueryRejection>) -> ApiResult<T> {
    q.map(|Query(t)| t).map_err(|e| ApiError::bad_request(e.body_text()))
}

fn lookup(registry: &Registry, id: &str) -> ApiResult<SharedModel> {
    registry.get(id).ok_or_else(|| ApiError::unknown_model(id))
}

fn check_version(model: &PivotModel, expected: Option<u64>) -> ApiResult<()> {
    match expected {
        Some(v) if v != model.version() => Err(ApiError::version_conflict(v, model.version())),
        _ => Ok(()),
    }
}

#[derive(Debug, Default, Deserialize)]
struct CreateQuery {
    id: Option<String>,
}

async fn create_model(
    State(registry): State<AppState>,
    q: Result<Query<CreateQuery>, QueryRejection>,
    body: Bytes,
) -> ApiResult<(StatusCode, Json<CreatedModel>)> {
    let q = query(q)?;
    let text = std::str::from_utf8(&body).map_err(|_| ApiError::bad_request("body is not UTF-8"))?;
    let mut model = model_from_json(text)?;
    model.calculate();
    let created = CreatedModel { id: String::new(), model_version: model.version(), stats: model.stats() };
    let id = registry.insert(q.id.as_deref(), model)?;
    tracing::info!(%id, "model created");
    Ok((StatusCode::CREATED, Json(CreatedModel { id, ..created })))
}

async fn list_models(State(registry): State<AppState>) -> Json<ModelList> {
    let models = registry
        .list()
        .into_iter()
        .map(|(id, m)| {
            let m = m.read();
            ModelSummary { id, name: m.structure().name().to_string(), model_version: m.version() }
        })
        .collect();
    Json(ModelList { models })
}

async fn delete_model(State(registry): State<AppState>, Path(id): Path<String>) -> ApiResult<StatusCode> {
    if registry.remove(&id)? {
        Ok(StatusCode::NO_CONTENT)
    } else {
        Err(ApiError::unknown_model(&id))
    }
}

async fn structure(State(registry): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<StructureResponse>> {
    let shared = lookup(&registry, &id)?;
    let m = shared.read();
    Ok(Json(StructureResponse::new(m.structure(), m.rules(), m.version())))
}

async fn stats(State(registry): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<StatsResponse>> {
    let shared = lookup(&registry, &id)?;
    let m = shared.read();
    Ok(Json(StatsResponse { stats: m.stats(), model_version: m.version() }))
}

#[derive(Debug, Default, Deserialize)]
struct DataQuery {
    format: Option<DataLayout>,
    spread: Option<String>,
    source: Option<String>,
    model_version: Option<u64>,
}

/// Loads CSV into the data layer. Does not recalculate.
async fn load_data(
    State(registry): State<AppState>,
    Path(id): Path<String>,
    q: Result<Query<DataQuery>, QueryRejection>,
    body: Bytes,
) -> ApiResult<Json<LoadResponse>> {
    let q = query(q)?;
    let text = std::str::from_utf8(&body).map_err(|_| ApiError::bad_request("body is not UTF-8"))?;
    let shared = lookup(&registry, &id)?;
    let mut m = shared.write();
    check_version(&m, q.model_version)?;
    let source = q.source.as_deref().unwrap_or("upload");
    let (layout, report) = m.load_csv(text, source, q.format, q.spread.as_deref())?;
    registry.persist(&id, &m)?;
    Ok(Json(LoadResponse { layout, report, model_version: m.version() }))
}

#[derive(Debug, Default, Deserialize)]
struct VersionQuery {
    model_version: Option<u64>,
}

async fn calculate(
    State(registry): State<AppState>,
    Path(id): Path<String>,
    q: Result<Query<VersionQuery>, QueryRejection>,
) -> ApiResult<Json<CalcResponse>> {
    let q = query(q)?;
    let shared = lookup(&registry, &id)?;
    let mut m = shared.write();
    check_version(&m, q.model_version)?;
    let report = m.calculate();
    Ok(Json(CalcResponse { report, model_version: m.version() }))
}

async fn view(State(registry): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<Response> {
    let spec: ViewSpec = parse_json(&body)?;
    let shared = lookup(&registry, &id)?;
    let m = shared.read();
    Ok(Json(m.view(&spec)?).into_response())
}

/// Writes data or override values, all or nothing, then recalculates.
async fn write_cells(State(registry): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<CalcResponse>> {
    let request: CellsRequest = parse_json(&body)?;
    if request.cells.is_empty() {
        return Err(ApiError::invalid("empty_edit", "no cells given"));
    }
    let shared = lookup(&registry, &id)?;
    let mut m = shared.write();
    check_version(&m, request.model_version)?;
    let edits = request
        .cells
        .iter()
        .map(|c| {
            let address = resolve_address(m.structure(), &c.address).map_err(pivotmodel::pivot::PivotError::from)?;
            Ok(CellEdit { address, value: c.value, mode: c.mode })
        })
        .collect::<ApiResult<Vec<_>>>()?;
    let report = m.apply_edits(&edits, request.source.as_deref().unwrap_or("api"))?;
    registry.persist(&id, &m)?;
    Ok(Json(CalcResponse { report, model_version: m.version() }))
}

async fn rules(State(registry): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<RulesResponse>> {
    let shared = lookup(&registry, &id)?;
    let m = shared.read();
    Ok(Json(RulesResponse { rules: rule_infos(m.structure(), m.rules()), model_version: m.version(), report: None }))
}

async fn patch_rules(State(registry): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<RulesResponse>> {
    let patch: RulesPatch = parse_json(&body)?;
    if patch.order.is_none() && patch.enable.is_empty() && patch.disable.is_empty() {
        return Err(ApiError::invalid("empty_patch", "nothing to change: give order, enable or disable"));
    }
    let shared = lookup(&registry, &id)?;
    let mut m = shared.write();
    check_version(&m, patch.model_version)?;

    let mut next = match &patch.order {
        Some(names) => m.rules().reorder_by_names(names).map_err(pivotmodel::pivot::PivotError::from)?,
        None => m.rules().clone(),
    };
    for (names, flag) in [(&patch.enable, true), (&patch.disable, false)] {
        for name in names {
            let seq = next
                .find(name)
                .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "unknown_rule", format!("no rule named '{name}'")))?;
            next = next.set_enabled(seq, flag).map_err(pivotmodel::pivot::PivotError::from)?;
        }
    }
    let report = m.set_rules(next);
    registry.persist(&id, &m)?;
    Ok(Json(RulesResponse {
        rules: rule_infos(m.structure(), m.rules()),
        model_version: m.version(),
        report: Some(report),
    }))
}

async fn trace(State(registry): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<Response> {
    let request: TraceRequest = parse_json(&body)?;
    let shared = lookup(&registry, &id)?;
    let m = shared.read();
    let address = resolve_address(m.structure(), &request.address).map_err(pivotmodel::pivot::PivotError::from)?;
    Ok(Json(m.trace(&address, request.rule.as_deref())?).into_response())
}

#[derive(Debug, Default, Deserialize)]
struct DocsQuery {
    format: Option<String>,
}

async fn docs(
    State(registry): State<AppState>,
    Path(id): Path<String>,
    q: Result<Query<DocsQuery>, QueryRejection>,
) -> ApiResult<Response> {
    let q = query(q)?;
    let shared = lookup(&registry, &id)?;
    let m = shared.read();
    match q.format.as_deref() {
        None | Some("text") => Ok(([(header::CONTENT_TYPE, "text/plain; charset=utf-8")], m.docs()).into_response()),
        Some("csv") => {
            let mut out = Vec::new();
            export_docs_csv(m.structure(), m.rules(), &mut out)
                .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?;
            Ok(([(header::CONTENT_TYPE, "text/csv; charset=utf-8")], out).into_response())
        }
        Some(other) => Err(ApiError::bad_request(format!("unknown docs format '{other}' (text or csv)"))),
    }
}

async fn audit(State(registry): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<AuditResponse>> {
    let shared = lookup(&registry, &id)?;
    let m = shared.read();
    Ok(Json(AuditResponse { model_version: m.version(), flagged: m.audit() }))
}
