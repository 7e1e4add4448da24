//! PC side of the login: announce the code, open a request, wait for the
//! verdict, and hand a PAM-style stack an exit status.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::time::Duration;

use pcauth_core::{ComparisonCode, RequestId, RequestState, UserId};
use serde::{Deserialize, Serialize};
use tokio::time::Instant;

use crate::api::ServiceApi;
use crate::error::{ApiError, LoadError};

pub const CODE_PLACEHOLDER: &str = "{code}";
pub const DEFAULT_PROMPT: &str = "Confirm this login on your phone or watch. Comparison code: {code}";

/// Extra wait past the request deadline before the adapter gives up on
/// hearing back: one expiry sweep plus transport.
pub const VERDICT_GRACE: Duration = Duration::from_millis(1_000);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdapterConfig {
    pub service_url: String,
    /// OS username -> service user id.
    #[serde(default)]
    pub user_mapping: BTreeMap<String, UserId>,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
    #[serde(default = "default_prompt")]
    pub prompt_template: String,
}

fn default_timeout_ms() -> u64 {
    60_000
}

fn default_prompt() -> String {
    DEFAULT_PROMPT.into()
}

impl AdapterConfig {
    pub fn new(service_url: impl Into<String>) -> Self {
        Self {
            service_url: service_url.into(),
            user_mapping: BTreeMap::new(),
            timeout_ms: default_timeout_ms(),
            prompt_template: default_prompt(),
        }
    }

    pub fn with_user(mut self, os_username: &str, user_id: UserId) -> Self {
        self.user_mapping.insert(os_username.into(), user_id);
        self
    }

    pub fn load(path: &Path) -> Result<Self, LoadError> {
        let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let config: Self = toml::from_str(&text).map_err(|e| LoadError::Parse {
            path: path.display().to_string(),
            detail: e.to_string(),
        })?;
        config.validate().map_err(|detail| LoadError::Invalid {
            path: path.display().to_string(),
            detail,
        })?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.timeout_ms == 0 {
            return Err("timeout_ms must be positive".into());
        }
        if self.prompt_template.matches(CODE_PLACEHOLDER).count() != 1 {
            return Err("prompt_template must contain {code} exactly once".into());
        }
        Ok(())
    }

    pub fn render_prompt(&self, code: ComparisonCode) -> String {
        self.prompt_template.replacen(CODE_PLACEHOLDER, &code.to_string(), 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AuthOutcome {
    Success,
    Denied,
    Timeout,
    Error(AdapterError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AdapterError {
    UnmappedUser(String),
    Transport(String),
    Service(String),
}

impl fmt::Display for AdapterError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdapterError::UnmappedUser(u) => write!(f, "unmapped_user: {u}"),
            AdapterError::Transport(d) => write!(f, "transport: {d}"),
            AdapterError::Service(d) => write!(f, "service: {d}"),
        }
    }
}

impl From<ApiError> for AdapterError {
    fn from(e: ApiError) -> Self {
        match e {
            ApiError::Transport(d) => AdapterError::Transport(d),
            other => AdapterError::Service(other.to_string()),
        }
    }
}

impl AuthOutcome {
    /// 0 success, 1 denied, 2 timeout, 3 error.
    pub fn exit_code(&self) -> i32 {
        match self {
            AuthOutcome::Success => 0,
            AuthOutcome::Denied => 1,
            AuthOutcome::Timeout => 2,
            AuthOutcome::Error(_) => 3,
        }
    }

    pub fn state(&self) -> &'static str {
        match self {
            AuthOutcome::Success => "success",
            AuthOutcome::Denied => "denied",
            AuthOutcome::Timeout => "timeout",
            AuthOutcome::Error(_) => "error",
        }
    }
}

/// What one call to [`authenticate`] did.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuthReport {
    pub outcome: AuthOutcome,
    pub request_id: Option<RequestId>,
    pub comparison_code: Option<ComparisonCode>,
    /// Trigger to verdict, monotonic.
    pub duration: Duration,
}

impl AuthReport {
    /// `state=<s> duration_ms=<ms> request_id=<id|->`
    pub fn report_line(&self) -> String {
        format!(
            "state={} duration_ms={:.3} request_id={}",
            self.outcome.state(),
            self.duration.as_secs_f64() * 1_000.0,
            self.request_id.as_ref().map_or("-", RequestId::as_str)
        )
    }
}

/// Fields of a report line.
pub fn parse_report_line(line: &str) -> Option<BTreeMap<String, String>> {
    let fields: BTreeMap<String, String> = line
        .split_whitespace()
        .map(|kv| kv.split_once('=').map(|(k, v)| (k.to_owned(), v.to_owned())))
        .collect::<Option<_>>()?;
    ["state", "duration_ms", "request_id"]
        .iter()
        .all(|k| fields.contains_key(*k))
        .then_some(fields)
}

/// Runs one login. The prompt (and a terse final state line) go to
/// `conversation`; the timing window starts on entry and stops when the
/// verdict is known.
pub async fn authenticate(
    api: &dyn ServiceApi,
    config: &AdapterConfig,
    os_username: &str,
    conversation: &mut (dyn Write + Send),
) -> AuthReport {
    let started = Instant::now();
    let mut report = AuthReport {
        outcome: AuthOutcome::Timeout,
        request_id: None,
        comparison_code: None,
        duration: Duration::ZERO,
    };
    report.outcome = run(api, config, os_username, conversation, &mut report, started).await;
    report.duration = started.elapsed();
    let _ = writeln!(conversation, "authentication {}", report.outcome.state());
    report
}

async fn run(
    api: &dyn ServiceApi,
    config: &AdapterConfig,
    os_username: &str,
    conversation: &mut (dyn Write + Send),
    report: &mut AuthReport,
    started: Instant,
) -> AuthOutcome {
    let Some(user_id) = config.user_mapping.get(os_username) else {
        return AuthOutcome::Error(AdapterError::UnmappedUser(os_username.into()));
    };
    let opened = match api.open_auth_request(user_id, Some(config.timeout_ms)).await {
        Ok(o) => o,
        Err(e) => return AuthOutcome::Error(e.into()),
    };
    report.request_id = Some(opened.request_id.clone());
    report.comparison_code = Some(opened.comparison_code);
    let _ = writeln!(conversation, "{}", config.render_prompt(opened.comparison_code));
    let _ = conversation.flush();

    let give_up = started + Duration::from_millis(config.timeout_ms) + VERDICT_GRACE;
    loop {
        let remaining = give_up.saturating_duration_since(Instant::now());
        if remaining.is_zero() {
            return AuthOutcome::Timeout;
        }
        let result = match api
            .await_result(&opened.request_id, remaining.as_millis().max(1) as u64)
            .await
        {
            Ok(r) => r,
            Err(e) => return AuthOutcome::Error(e.into()),
        };
        match result.state {
            RequestState::Pending => continue,
            RequestState::Confirmed => return AuthOutcome::Success,
            RequestState::Denied => return AuthOutcome::Denied,
            RequestState::Expired => return AuthOutcome::Timeout,
        }
    }
}
