//! One client-facing surface over the service, reachable in-process or over
//! HTTP. The PC adapter, the agent and the bench harness are written against
//! [`ServiceApi`] only.

use std::time::Duration;

use async_trait::async_trait;
use pcauth_core::{DeviceClass, DeviceId, PublicKey, RequestId, SignedResponse, UserId, Verdict};
use reqwest::StatusCode;
use serde::de::DeserializeOwned;

use crate::error::ApiError;
use crate::service::AuthService;
use crate::wire::{
    self, DeviceInfo, EnrollDevice, ErrorBody, OpenAuthRequest, OpenedRequest, PendingList, PendingRequest,
    RequestResult, ResponseBody, VerdictBody,
};

#[async_trait]
pub trait ServiceApi: Send + Sync {
    async fn enroll_device(
        &self,
        user_id: &UserId,
        label: &str,
        device_class: DeviceClass,
        public_key: &PublicKey,
    ) -> Result<DeviceInfo, ApiError>;

    async fn open_auth_request(&self, user_id: &UserId, ttl_ms: Option<u64>) -> Result<OpenedRequest, ApiError>;

    async fn poll_pending(&self, device_id: &DeviceId, max_wait_ms: u64) -> Result<Vec<PendingRequest>, ApiError>;

    /// Rejections are `Ok(Verdict::Rejected(_))`.
    async fn submit_response(&self, response: &SignedResponse) -> Result<Verdict, ApiError>;

    async fn await_result(&self, request_id: &RequestId, max_wait_ms: u64) -> Result<RequestResult, ApiError>;
}

#[async_trait]
impl ServiceApi for AuthService {
    async fn enroll_device(
        &self,
        user_id: &UserId,
        label: &str,
        device_class: DeviceClass,
        public_key: &PublicKey,
    ) -> Result<DeviceInfo, ApiError> {
        AuthService::enroll_device(self, user_id.clone(), label, device_class, public_key.as_bytes()).map(|(d, _)| d)
    }

    async fn open_auth_request(&self, user_id: &UserId, ttl_ms: Option<u64>) -> Result<OpenedRequest, ApiError> {
        AuthService::open_auth_request(self, user_id.clone(), ttl_ms)
    }

    async fn poll_pending(&self, device_id: &DeviceId, max_wait_ms: u64) -> Result<Vec<PendingRequest>, ApiError> {
        AuthService::poll_pending(self, device_id, max_wait_ms).await
    }

    async fn submit_response(&self, response: &SignedResponse) -> Result<Verdict, ApiError> {
        AuthService::submit_response(self, response)
    }

    async fn await_result(&self, request_id: &RequestId, max_wait_ms: u64) -> Result<RequestResult, ApiError> {
        AuthService::await_result(self, request_id, max_wait_ms).await
    }
}

/// Slack on top of a long-poll's own wait before the transport gives up.
const TRANSPORT_SLACK: Duration = Duration::from_secs(5);

#[derive(Debug, Clone)]
pub struct HttpClient {
    base: String,
    client: reqwest::Client,
}

impl HttpClient {
    pub fn new(base_url: &str) -> Result<Self, ApiError> {
        let client = reqwest::Client::builder()
            .connect_timeout(Duration::from_secs(5))
            .build()
            .map_err(|e| ApiError::Transport(e.to_string()))?;
        Ok(Self {
            base: base_url.trim_end_matches('/').to_owned(),
            client,
        })
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }

    fn url(&self, path: &str) -> String {
        format!("{}{}", self.base, path)
    }

    async fn send(&self, req: reqwest::RequestBuilder) -> Result<(StatusCode, Vec<u8>), ApiError> {
        let resp = req.send().await.map_err(|e| ApiError::Transport(e.to_string()))?;
        let status = resp.status();
        let body = resp.bytes().await.map_err(|e| ApiError::Transport(e.to_string()))?;
        Ok((status, body.to_vec()))
    }

    fn decode<T: DeserializeOwned>(status: StatusCode, body: &[u8]) -> Result<T, ApiError> {
        if status.is_success() {
            return serde_json::from_slice(body).map_err(|e| ApiError::Transport(format!("bad body: {e}")));
        }
        let detail = serde_json::from_slice::<ErrorBody>(body)
            .map(|e| e.error)
            .unwrap_or_else(|_| String::from_utf8_lossy(body).into_owned());
        Err(match status {
            StatusCode::NOT_FOUND => ApiError::NotFound(detail),
            StatusCode::UNPROCESSABLE_ENTITY | StatusCode::BAD_REQUEST => ApiError::Invalid(detail),
            _ => ApiError::Internal(format!("{status}: {detail}")),
        })
    }
}

#[async_trait]
impl ServiceApi for HttpClient {
    async fn enroll_device(
        &self,
        user_id: &UserId,
        label: &str,
        device_class: DeviceClass,
        public_key: &PublicKey,
    ) -> Result<DeviceInfo, ApiError> {
        let body = EnrollDevice {
            user_id: user_id.clone(),
            label: label.to_owned(),
            device_class,
            public_key: wire::encode(public_key.as_bytes()),
        };
        let (status, body) = self.send(self.client.post(self.url("/v1/devices")).json(&body)).await?;
        Self::decode(status, &body)
    }

    async fn open_auth_request(&self, user_id: &UserId, ttl_ms: Option<u64>) -> Result<OpenedRequest, ApiError> {
        let body = OpenAuthRequest {
            user_id: user_id.clone(),
            ttl_ms,
        };
        let (status, body) = self
            .send(self.client.post(self.url("/v1/auth-requests")).json(&body))
            .await?;
        Self::decode(status, &body)
    }

    async fn poll_pending(&self, device_id: &DeviceId, max_wait_ms: u64) -> Result<Vec<PendingRequest>, ApiError> {
        let req = self
            .client
            .get(self.url(&format!("/v1/devices/{device_id}/pending")))
            .query(&[("max_wait_ms", max_wait_ms)])
            .timeout(Duration::from_millis(max_wait_ms) + TRANSPORT_SLACK);
        let (status, body) = self.send(req).await?;
        Self::decode::<PendingList>(status, &body).map(|l| l.requests)
    }

    async fn submit_response(&self, response: &SignedResponse) -> Result<Verdict, ApiError> {
        let req = self
            .client
            .post(self.url(&format!("/v1/auth-requests/{}/response", response.request_id)))
            .json(&ResponseBody::from_response(response));
        let (status, body) = self.send(req).await?;
        let verdict: VerdictBody = if status == StatusCode::CONFLICT {
            serde_json::from_slice(&body).map_err(|e| ApiError::Transport(format!("bad body: {e}")))?
        } else {
            Self::decode(status, &body)?
        };
        Verdict::try_from(verdict).map_err(ApiError::Transport)
    }

    async fn await_result(&self, request_id: &RequestId, max_wait_ms: u64) -> Result<RequestResult, ApiError> {
        let req = self
            .client
            .get(self.url(&format!("/v1/auth-requests/{request_id}/result")))
            .query(&[("max_wait_ms", max_wait_ms)])
            .timeout(Duration::from_millis(max_wait_ms) + TRANSPORT_SLACK);
        let (status, body) = self.send(req).await?;
        Self::decode(status, &body)
    }
}
