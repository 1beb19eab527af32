//! JSON prediction API over HTTP.
//!
//! `POST /predict` with `{"name": "..."}` and `GET /health`. Errors come back
//! as `{"error": <code>, "message": <text>}`.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use vngender_core::names::NameError;

use crate::bundle::{ModelBundle, PredictError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictRequest {
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Components {
    pub family: Option<String>,
    pub middle: Vec<String>,
    pub given: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictResponse {
    pub label: u8,
    pub gender: String,
    pub score: f64,
    pub components: Components,
    pub model_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub message: String,
}

fn error(status: StatusCode, code: &str, message: impl Into<String>) -> Response {
    (status, Json(ErrorBody { error: code.into(), message: message.into() })).into_response()
}

/// The response for one request; shared by the HTTP handler and the CLI.
pub fn respond(bundle: &ModelBundle, req: &PredictRequest) -> Result<PredictResponse, (StatusCode, &'static str, String)> {
    match bundle.predict_name(&req.name) {
        Ok(p) => Ok(PredictResponse {
            label: p.prediction.label.as_u8(),
            gender: p.prediction.label.name().to_string(),
            score: p.prediction.score,
            components: Components {
                family: p.components.family,
                middle: p.components.middle,
                given: p.components.given,
            },
            model_id: bundle.meta.model_id.clone(),
        }),
        Err(PredictError::Name(NameError::EmptyName)) => {
            Err((StatusCode::BAD_REQUEST, "empty_name", "name is empty after trimming".into()))
        }
        Err(PredictError::Name(e @ NameError::EmptySelection(_))) => {
            Err((StatusCode::BAD_REQUEST, "no_features", e.to_string()))
        }
        Err(e) => Err((StatusCode::INTERNAL_SERVER_ERROR, "prediction_failed", e.to_string())),
    }
}

async fn predict(State(bundle): State<Arc<ModelBundle>>, body: Bytes) -> Response {
    let req: PredictRequest = match serde_json::from_slice(&body) {
        Ok(r) => r,
        Err(e) => return error(StatusCode::BAD_REQUEST, "malformed_json", e.to_string()),
    };
    match respond(&bundle, &req) {
        Ok(r) => Json(r).into_response(),
        Err((status, code, msg)) => error(status, code, msg),
    }
}

async fn health(State(bundle): State<Arc<ModelBundle>>) -> Response {
    Json(serde_json::json!({ "status": "ok", "model_id": bundle.meta.model_id })).into_response()
}

async fn not_found() -> Response {
    error(StatusCode::NOT_FOUND, "not_found", "unknown route")
}

async fn method_not_allowed() -> Response {
    error(StatusCode::METHOD_NOT_ALLOWED, "method_not_allowed", "method not allowed for this route")
}

pub fn router(bundle: Arc<ModelBundle>) -> Router {
    Router::new()
        .route("/predict", post(predict).fallback(method_not_allowed))
        .route("/health", get(health).fallback(method_not_allowed))
        .fallback(not_found)
        .with_state(bundle)
}

/// Serves until the listener fails or the process is interrupted.
pub async fn serve(bundle: Arc<ModelBundle>, listener: tokio::net::TcpListener) -> std::io::Result<()> {
    axum::serve(listener, router(bundle))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

pub async fn bind(addr: SocketAddr) -> std::io::Result<tokio::net::TcpListener> {
    tokio::net::TcpListener::bind(addr).await
}
