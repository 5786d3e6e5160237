//! Crate-wide error and failure-classification types.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A chain or session violates a node's transmit/receive capabilities.
    #[error("capability violation: {0}")]
    Capability(String),

    /// Structurally inconsistent input (mismatched lengths, ragged records).
    #[error("malformed input: {0}")]
    MalformedInput(String),

    /// An estimation sample that would contain zero positions.
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    /// A zero-length key where at least one bit is required.
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// An authentication key pool has too few unconsumed bits left.
    #[error("key pool exhausted: {0}")]
    KeyExhaustion(String),

    /// No shared authentication key pool exists for the required pair.
    #[error("no shared authentication key: {0}")]
    NoKey(String),

    /// Duplicate registration of an endpoint.
    #[error("conflict: {0}")]
    Conflict(String),

    /// Lookup of an unknown endpoint or resource.
    #[error("not found: {0}")]
    NotFound(String),

    /// A route disappeared while a session depended on it.
    #[error("route lost: {0}")]
    RouteLost(String),

    /// The responder declined the session.
    #[error("session refused: {0}")]
    Refused(String),

    /// A classical message failed authentication in flight.
    #[error("tamper alarm: {0}")]
    TamperAlarm(String),

    /// Scenario validation problems, all of them.
    #[error("invalid scenario:\n{}", violations_text(.0))]
    Validation(Vec<Violation>),

    /// A transcript record failed a replay check.
    #[error("corrupt transcript at record {index}: {message}")]
    Corruption { index: usize, message: String },

    /// A transcript that is not even structurally readable.
    #[error("malformed transcript: {0}")]
    MalformedTranscript(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One scenario validation problem with its location in the config.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    /// Dotted path of the offending field, e.g. `network.endpoint.alice.attachment`.
    pub location: String,
    pub message: String,
}

impl Violation {
    pub fn new(location: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            location: location.into(),
            message: message.into(),
        }
    }
}

fn violations_text(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| format!("  {}: {}", v.location, v.message))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Classification of a session that did not complete cleanly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureClass {
    /// Estimated error rate above the configured abort threshold.
    QberAbort,
    /// Reconciliation verification tags disagreed.
    ReconcileAbort,
    /// A message was rejected by tag verification along the route.
    TamperAlarm,
    /// A key pool ran dry mid-session.
    KeyExhaustion,
    /// The route used by the session was withdrawn.
    RouteLost,
    /// Basis announcements came from relays outside the agreed route.
    RouteMismatch,
    /// The responder declined.
    Refused,
    /// The chain violated hardware capabilities.
    Capability,
    /// A required key pool does not exist.
    NoKey,
}

impl FailureClass {
    pub fn from_error(err: &Error) -> Option<Self> {
        match err {
            Error::Capability(_) => Some(Self::Capability),
            Error::KeyExhaustion(_) => Some(Self::KeyExhaustion),
            Error::NoKey(_) => Some(Self::NoKey),
            Error::RouteLost(_) => Some(Self::RouteLost),
            Error::Refused(_) => Some(Self::Refused),
            Error::TamperAlarm(_) => Some(Self::TamperAlarm),
            _ => None,
        }
    }
}

impl std::fmt::Display for FailureClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Self::QberAbort => "qber_abort",
            Self::ReconcileAbort => "reconcile_abort",
            Self::TamperAlarm => "tamper_alarm",
            Self::KeyExhaustion => "key_exhaustion",
            Self::RouteLost => "route_lost",
            Self::RouteMismatch => "route_mismatch",
            Self::Refused => "refused",
            Self::Capability => "capability",
            Self::NoKey => "no_key",
        };
        f.write_str(s)
    }
}
