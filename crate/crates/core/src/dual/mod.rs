//! Altitude dual certificates built backward in time, their checks, and the
//! forward-time adversary.

mod cert;
mod eval;
mod feasibility;
mod forward;
mod lambda_b;
mod weak;

pub use cert::{build_certificate_hst, build_certificate_weighted, AltitudeCertificate, CertEvent, CertMode};
pub use eval::{check_guarantees, evaluate_dual, DualEvaluation, GuaranteeReport, GuaranteeViolation};
pub use feasibility::{verify_feasibility, FeasibilityIssue, FeasibilityReport};
pub use forward::{
    forward_adversary, AdversaryTranscript, ConstantStrategy, DualStrategy, GadgetRecord, RaiseRequested,
    RandomStrategy, StrategyFault,
};
pub use lambda_b::{transform_to_lambda_b, LambdaB};
pub use weak::{weak_duality_check, WeakDualityReport};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::potentials::{bands, TableError};
use crate::tree::VertexId;

pub const CERT_FORMAT: &str = "dualcert/v1";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DualError {
    #[error("trace is not small-step consistent: {0}")]
    InvalidTrace(String),
    #[error("tree depth {tree} exceeds d = {d}")]
    DepthExceeded { tree: u32, d: u32 },
    #[error(transparent)]
    Table(#[from] TableError),
    #[error("certificate covers {cert} ticks, trace has {trace}")]
    LengthMismatch { cert: usize, trace: usize },
    #[error("event {0} is malformed")]
    MalformedEvent(usize),
    #[error("constraint for vertex {vertex} at time {time} fails")]
    Constraint { vertex: VertexId, time: usize },
    #[error("original objective {original} differs from D = {d}")]
    ObjectiveMismatch { original: i64, d: i64 },
    #[error("unknown certificate format {0:?}")]
    Format(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventRecord {
    pub event: usize,
    pub top: VertexId,
    /// Edge ids (child endpoints) of the cut edges.
    pub frontier: Vec<VertexId>,
    pub delta: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateFile {
    pub format: String,
    pub mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<u32>,
    pub base: i64,
    pub ticks: usize,
    pub events: Vec<EventRecord>,
}

impl From<&AltitudeCertificate> for CertificateFile {
    fn from(c: &AltitudeCertificate) -> Self {
        let (k, d) = match &c.mode {
            CertMode::Monotone => (None, None),
            CertMode::Banded(b) => (Some(b.k), Some(b.d)),
        };
        CertificateFile {
            format: CERT_FORMAT.into(),
            mode: c.mode.name().into(),
            k,
            d,
            base: c.base,
            ticks: c.ticks,
            events: c
                .events
                .iter()
                .map(|e| EventRecord { event: e.tick, top: e.top, frontier: e.cut.clone(), delta: e.delta })
                .collect(),
        }
    }
}

impl CertificateFile {
    pub fn build(&self) -> Result<AltitudeCertificate, DualError> {
        if self.format != CERT_FORMAT {
            return Err(DualError::Format(self.format.clone()));
        }
        let mode = match (self.mode.as_str(), self.k, self.d) {
            ("monotone", _, _) => CertMode::Monotone,
            ("banded", Some(k), Some(d)) => CertMode::Banded(bands(k, d)?),
            _ => return Err(DualError::Format(self.mode.clone())),
        };
        let events = self
            .events
            .iter()
            .map(|e| CertEvent { tick: e.event, top: e.top, cut: e.frontier.clone(), delta: e.delta })
            .collect();
        Ok(AltitudeCertificate { mode, base: self.base, ticks: self.ticks, events })
    }
}
