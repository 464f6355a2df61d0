use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use p4lab_core::analysis::AnalysisError;
use p4lab_core::io::IoError;
use p4lab_core::ode::OdeError;
use p4lab_core::search::SearchError;
use p4lab_core::EquationError;
use serde::{Deserialize, Serialize};

/// Body of every non-2xx response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    /// Machine-readable reason, e.g. `near-zero-denominator`.
    pub reason: String,
    pub message: String,
    /// Always `false`: failed requests never return partial results.
    pub partial: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: StatusCode,
    pub reason: &'static str,
    pub message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, reason: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            reason,
            message: message.into(),
        }
    }

    pub fn bad_request(reason: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, reason, message)
    }

    pub fn unprocessable(reason: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, reason, message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }

    pub fn budget() -> Self {
        Self::unprocessable("budget-exceeded", "compute budget exceeded")
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            reason: self.reason.to_string(),
            message: self.message,
            partial: false,
        };
        (self.status, Json(body)).into_response()
    }
}

impl From<OdeError> for ApiError {
    fn from(e: OdeError) -> Self {
        let msg = e.to_string();
        match e {
            OdeError::BudgetExceeded => Self::budget(),
            OdeError::InvalidInput(_) => Self::bad_request("invalid-input", msg),
            OdeError::NonFiniteField { .. } => Self::unprocessable("non-finite-field", msg),
            OdeError::OutOfRange { .. } | OdeError::InvalidTrajectory(_) => Self::internal(msg),
        }
    }
}

impl From<EquationError> for ApiError {
    fn from(e: EquationError) -> Self {
        let msg = e.to_string();
        match e {
            EquationError::NearZeroDenominator { .. } => {
                Self::unprocessable("near-zero-denominator", msg)
            }
            EquationError::UnknownEquation(_) => Self::bad_request("invalid-input", msg),
            EquationError::Ode(e) => e.into(),
        }
    }
}

impl From<AnalysisError> for ApiError {
    fn from(e: AnalysisError) -> Self {
        let msg = e.to_string();
        match e {
            AnalysisError::Coverage { .. } => Self::unprocessable("coverage", msg),
            AnalysisError::InsufficientOscillation { .. } => {
                Self::unprocessable("insufficient-oscillation", msg)
            }
            AnalysisError::Ode(e) => e.into(),
        }
    }
}

impl From<SearchError> for ApiError {
    fn from(e: SearchError) -> Self {
        let msg = e.to_string();
        match e {
            SearchError::NoSignChange { .. } => Self::unprocessable("no-sign-change", msg),
            SearchError::InconclusiveEndpoint { .. } => {
                Self::unprocessable("inconclusive-endpoint", msg)
            }
            SearchError::InvalidInput(_) => Self::bad_request("invalid-input", msg),
            SearchError::Equation(e) => e.into(),
            SearchError::Analysis(e) => e.into(),
        }
    }
}

impl From<IoError> for ApiError {
    fn from(e: IoError) -> Self {
        let msg = e.to_string();
        match e {
            IoError::TooManyExtrema { .. } => Self::unprocessable("too-many-extrema", msg),
            IoError::MaxSamples(_) => Self::bad_request("invalid-input", msg),
            IoError::Ode(e) => e.into(),
            _ => Self::internal(msg),
        }
    }
}
