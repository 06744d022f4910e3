use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::body::Body;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use mapperscope_core::analysis::route_point;
use mapperscope_core::dataset::{load_spatial_activation, Prediction};
use mapperscope_core::heatmap::{overlay_png, AggregationMode};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use tower_http::services::ServeDir;

use crate::bundle::ModelBundle;
use crate::error::CliError;

/// An HTTP error carrying the same `{"error": {...}}` body as the CLI.
pub struct ApiError {
    status: StatusCode,
    err: CliError,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            err: CliError::new(code, message),
        }
    }

    fn not_found(code: &'static str, message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, code, message)
    }

    fn bad_request(code: &'static str, message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, code, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.err.to_json())).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;
type Shared = Arc<ModelBundle>;

pub fn router(bundle: Shared, static_dir: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/api/graph", get(graph))
        .route("/api/nodes/:id", get(node))
        .route("/api/clusters", get(clusters))
        .route("/api/images/:id", get(image))
        .route("/api/images/:id/heatmap", get(heatmap))
        .route("/api/route", post(route))
        .with_state(bundle);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

fn json_bytes(bytes: Vec<u8>) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], bytes).into_response()
}

async fn graph(State(b): State<Shared>) -> Response {
    json_bytes(b.graph_bytes.clone())
}

#[derive(Debug, Serialize, Deserialize)]
pub struct MemberView {
    pub image_id: String,
    pub image_path: String,
    pub true_label: String,
    pub predictions: Vec<Prediction>,
    pub correct_top1: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct NodeView {
    pub id: usize,
    pub members: Vec<MemberView>,
}

async fn node(State(b): State<Shared>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<NodeView>> {
    let node = id
        .parse::<usize>()
        .ok()
        .and_then(|i| b.graph.nodes.get(i))
        .ok_or_else(|| ApiError::not_found("NodeNotFound", format!("no node {id}")))?;
    let members = node
        .members
        .iter()
        .map(|&p| {
            let r = &b.records[p];
            MemberView {
                image_id: r.image_id.clone(),
                image_path: r.image_path.clone(),
                true_label: r.true_label.clone(),
                predictions: r.predictions.clone(),
                correct_top1: r.correct_at(1),
            }
        })
        .collect();
    Ok(Json(NodeView {
        id: node.id,
        members,
    }))
}

async fn clusters(State(b): State<Shared>) -> ApiResult<Response> {
    b.clusters_bytes
        .clone()
        .map(json_bytes)
        .ok_or_else(|| ApiError::not_found("ClustersMissing", "server started without --clusters"))
}

fn content_type(path: &Path) -> &'static str {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    match ext.as_deref() {
        Some("png") => "image/png",
        Some("jpg" | "jpeg") => "image/jpeg",
        Some("gif") => "image/gif",
        Some("webp") => "image/webp",
        Some("bmp") => "image/bmp",
        Some("svg") => "image/svg+xml",
        _ => "application/octet-stream",
    }
}

async fn read_or_404(path: PathBuf, code: &'static str) -> ApiResult<Vec<u8>> {
    tokio::fs::read(&path)
        .await
        .map_err(|_| ApiError::not_found(code, format!("{} not readable", path.display())))
}

async fn image(State(b): State<Shared>, UrlPath(id): UrlPath<String>) -> ApiResult<Response> {
    let path = b
        .image_file(&id)
        .ok_or_else(|| ApiError::not_found("ImageNotFound", format!("no image {id}")))?;
    let bytes = read_or_404(path.clone(), "ImageNotFound").await?;
    Ok(([(header::CONTENT_TYPE, content_type(&path))], Body::from(bytes)).into_response())
}

#[derive(Debug, Deserialize)]
struct HeatmapQuery {
    mode: Option<String>,
    alpha: Option<f64>,
}

async fn heatmap(
    State(b): State<Shared>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<HeatmapQuery>,
) -> ApiResult<Response> {
    let mode: AggregationMode = q
        .mode
        .as_deref()
        .unwrap_or("l2")
        .parse()
        .map_err(|e: mapperscope_core::heatmap::HeatmapError| ApiError::bad_request("BadMode", e.to_string()))?;
    let alpha = q.alpha.unwrap_or(0.6);
    if !(0.0..=1.0).contains(&alpha) {
        return Err(ApiError::bad_request("BadAlpha", format!("alpha must be in [0, 1] (got {alpha})")));
    }
    let tensor_path = b
        .tensor_file(&id)
        .filter(|p| p.is_file())
        .ok_or_else(|| ApiError::not_found("TensorNotFound", format!("no activation tensor for {id}")))?;
    let image_path = b
        .image_file(&id)
        .ok_or_else(|| ApiError::not_found("ImageNotFound", format!("no image {id}")))?;
    let base = read_or_404(image_path, "ImageNotFound").await?;
    // decoding and resampling are CPU work; keep them off the async workers
    let png = tokio::task::spawn_blocking(move || -> Result<Vec<u8>, CliError> {
        let tensor = load_spatial_activation(&tensor_path)?;
        Ok(overlay_png(&tensor, &base, mode, alpha)?)
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", e.to_string()))?
    .map_err(|err| ApiError {
        status: StatusCode::UNPROCESSABLE_ENTITY,
        err,
    })?;
    Ok(([(header::CONTENT_TYPE, "image/png")], Body::from(png)).into_response())
}

/// Body of POST /api/route: a bare array or `{"features": [...], "slack": s}`.
fn parse_route_body(body: &Value) -> Result<(Vec<f64>, Option<f64>), String> {
    let (features, slack) = match body {
        Value::Array(_) => (body, None),
        Value::Object(map) => {
            let f = map.get("features").ok_or("missing \"features\"")?;
            let slack = match map.get("slack") {
                None | Some(Value::Null) => None,
                Some(v) => Some(v.as_f64().ok_or("\"slack\" must be a number")?),
            };
            (f, slack)
        }
        _ => return Err("expected an array or an object with \"features\"".into()),
    };
    let values = features
        .as_array()
        .ok_or("\"features\" must be an array")?
        .iter()
        .map(|v| v.as_f64().ok_or("features must be numbers"))
        .collect::<Result<Vec<f64>, _>>()?;
    Ok((values, slack))
}

async fn route(State(b): State<Shared>, body: axum::body::Bytes) -> ApiResult<Response> {
    let model = b
        .routing
        .as_ref()
        .ok_or_else(|| ApiError::not_found("RoutingDisabled", "server started without --routing"))?;
    let value: Value = serde_json::from_slice(&body)
        .map_err(|e| ApiError::bad_request("BadRequest", e.to_string()))?;
    let (x, slack) = parse_route_body(&value).map_err(|m| ApiError::bad_request("BadRequest", m))?;
    let decision = route_point(&x, model, slack.unwrap_or(b.slack)).map_err(|e| {
        let err = CliError::from(e);
        ApiError {
            status: StatusCode::BAD_REQUEST,
            err,
        }
    })?;
    Ok(Json(decision).into_response())
}

/// Binds and serves until Ctrl-C.
pub async fn serve(bundle: Shared, addr: &str, static_dir: Option<&Path>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(bundle, static_dir))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
