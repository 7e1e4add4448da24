//! HTTP binding of [`AuthService`].
//!
//! | method | path | success |
//! |---|---|---|
//! | POST | `/v1/devices` | 201 new, 200 already enrolled |
//! | POST | `/v1/auth-requests` | 201 |
//! | GET | `/v1/devices/{id}/pending?max_wait_ms=` | 200 |
//! | POST | `/v1/auth-requests/{id}/response` | 200, 409 when rejected |
//! | GET | `/v1/auth-requests/{id}/result?max_wait_ms=` | 200 |
//!
//! Unknown entities are 404 and malformed input is 422.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, RawQuery, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use pcauth_core::{DeviceId, RequestId, Verdict};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use super::AuthService;
use crate::error::ApiError;
use crate::wire::{self, EnrollDevice, ErrorBody, OpenAuthRequest, PendingList, ResponseBody, VerdictBody};

const DEFAULT_WAIT_MS: u64 = 0;

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match self {
            ApiError::NotFound(_) => StatusCode::NOT_FOUND,
            ApiError::Invalid(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ApiError::Transport(_) | ApiError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        let body = ErrorBody {
            error: self.to_string(),
            reason: None,
        };
        (status, Json(body)).into_response()
    }
}

fn parse<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::Invalid(e.to_string()))
}

fn id<T: TryFrom<String, Error = pcauth_core::Error>>(raw: String) -> Result<T, ApiError> {
    T::try_from(raw).map_err(|e| ApiError::Invalid(e.to_string()))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct WaitQuery {
    max_wait_ms: Option<u64>,
}

fn wait_ms(query: Option<String>) -> Result<u64, ApiError> {
    let q: WaitQuery = match query.as_deref() {
        None | Some("") => WaitQuery::default(),
        Some(text) => serde_urlencoded::from_str(text).map_err(|e| ApiError::Invalid(e.to_string()))?,
    };
    Ok(q.max_wait_ms.unwrap_or(DEFAULT_WAIT_MS))
}

async fn enroll(State(service): State<Arc<AuthService>>, body: Bytes) -> Result<Response, ApiError> {
    let req: EnrollDevice = parse(&body)?;
    let key = wire::decode(&req.public_key).map_err(ApiError::Invalid)?;
    let (info, created) = service.enroll_device(req.user_id, &req.label, req.device_class, &key)?;
    let status = if created { StatusCode::CREATED } else { StatusCode::OK };
    Ok((status, Json(info)).into_response())
}

async fn open(State(service): State<Arc<AuthService>>, body: Bytes) -> Result<Response, ApiError> {
    let req: OpenAuthRequest = parse(&body)?;
    let opened = service.open_auth_request(req.user_id, req.ttl_ms)?;
    Ok((StatusCode::CREATED, Json(opened)).into_response())
}

async fn pending(
    State(service): State<Arc<AuthService>>,
    Path(device): Path<String>,
    RawQuery(query): RawQuery,
) -> Result<Response, ApiError> {
    let device: DeviceId = id(device)?;
    let requests = service.poll_pending(&device, wait_ms(query)?).await?;
    Ok(Json(PendingList { requests }).into_response())
}

async fn respond(
    State(service): State<Arc<AuthService>>,
    Path(request): Path<String>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let request: RequestId = id(request)?;
    let body: ResponseBody = parse(&body)?;
    let response = body.into_response(request).map_err(ApiError::Invalid)?;
    let verdict = service.submit_response(&response)?;
    let status = match verdict {
        Verdict::Confirmed | Verdict::Denied => StatusCode::OK,
        Verdict::Rejected(_) => StatusCode::CONFLICT,
    };
    Ok((status, Json(VerdictBody::from(verdict))).into_response())
}

async fn result(
    State(service): State<Arc<AuthService>>,
    Path(request): Path<String>,
    RawQuery(query): RawQuery,
) -> Result<Response, ApiError> {
    let request: RequestId = id(request)?;
    let result = service.await_result(&request, wait_ms(query)?).await?;
    Ok(Json(result).into_response())
}

pub fn router(service: Arc<AuthService>) -> Router {
    Router::new()
        .route("/v1/devices", post(enroll))
        .route("/v1/devices/{id}/pending", get(pending))
        .route("/v1/auth-requests", post(open))
        .route("/v1/auth-requests/{id}/response", post(respond))
        .route("/v1/auth-requests/{id}/result", get(result))
        .with_state(service)
}

/// A service listening on a bound socket.
pub struct RunningService {
    pub addr: SocketAddr,
    pub service: Arc<AuthService>,
    server: tokio::task::JoinHandle<()>,
    sweeper: tokio::task::JoinHandle<()>,
}

impl RunningService {
    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn shutdown(self) {
        self.server.abort();
        self.sweeper.abort();
    }

    /// Resolves when the server task ends.
    pub async fn join(self) {
        let _ = self.server.await;
        self.sweeper.abort();
    }
}

/// Binds `addr` (port 0 picks a free port) and serves in the background.
pub async fn serve(service: Arc<AuthService>, addr: SocketAddr) -> std::io::Result<RunningService> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    let addr = listener.local_addr()?;
    let app = router(service.clone());
    let sweeper = service.spawn_sweeper();
    let server = tokio::spawn(async move {
        if let Err(e) = axum::serve(listener, app).await {
            tracing::error!("server stopped: {e}");
        }
    });
    Ok(RunningService {
        addr,
        service,
        server,
        sweeper,
    })
}
