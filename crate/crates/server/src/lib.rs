//! Stateless HTTP/JSON facade over `p4lab-core` for the explorer UI.
//!
//! | route | body / query | result |
//! |---|---|---|
//! | `POST /api/integrate` | [`IntegrateRequest`] | downsampled trajectory, classification, zeros |
//! | `POST /api/classify` | [`ClassifyRequest`] | behaviour class and run statistics |
//! | `POST /api/bisect` | [`BisectRequest`] | critical-slope bracket |
//! | `GET /api/regions` | `tmin`, `tmax`, `n` | the five guide-curve polylines |
//! | `GET /healthz` | | `ok` |
//!
//! Every 200 response echoes the request with defaults filled in and reports
//! `compute_ms`. Failures carry an [`ErrorBody`] with a machine-readable
//! `reason`: 400 for malformed or invalid input, 422 for well-formed requests
//! that cannot be answered (`near-zero-denominator`, `budget-exceeded`,
//! `no-sign-change`, ...), 500 otherwise.

mod error;

use std::net::SocketAddr;
use std::time::{Duration, Instant};

use axum::body::Bytes;
use axum::extract::rejection::QueryRejection;
use axum::extract::{Query, State as AxState};
use axum::http::HeaderValue;
use axum::routing::{get, post};
use axum::{Json, Router};
use p4lab_core::analysis::{guide_polylines, Polyline};
use p4lab_core::io::{downsample, TrajectoryDocument};
use p4lab_core::search::{bisect_threshold_with_deadline, RunStats, DEFAULT_TOL};
use p4lab_core::{
    classify, detect_zeros, BehaviorClass, ClassifierParams, CriticalThreshold, EquationId, Family,
    Span, State, StepControl, Trajectory, ZeroRecord,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tower_http::cors::{AllowOrigin, CorsLayer};

pub use error::{ApiError, ErrorBody};

pub const DEFAULT_LISTEN: &str = "127.0.0.1:8472";
pub const DEFAULT_BUDGET: Duration = Duration::from_secs(2);
pub const DEFAULT_MAX_SAMPLES: usize = 2000;
pub const MAX_REGION_POINTS: usize = 100_000;

#[derive(Debug, Clone)]
pub struct ServerConfig {
    /// Wall-time limit per request.
    pub budget: Duration,
    /// Origins allowed by CORS; empty allows any.
    pub cors_origins: Vec<String>,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            budget: DEFAULT_BUDGET,
            cors_origins: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let c = StepControl::default();
        Self {
            rtol: c.rtol,
            atol: c.atol,
        }
    }
}

impl Tolerances {
    fn control(&self) -> StepControl {
        StepControl::with_tolerances(self.rtol, self.atol)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrateRequest {
    pub equation: EquationId,
    pub ic: State,
    /// Must start at `ic.t`.
    pub span: Span,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_max_samples")]
    pub max_samples: usize,
}

fn default_max_samples() -> usize {
    DEFAULT_MAX_SAMPLES
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegrateResponse {
    pub request: IntegrateRequest,
    pub compute_ms: f64,
    pub trajectory: TrajectoryDocument,
    /// Classification over the whole span.
    pub classification: BehaviorClass,
    pub zeros: Vec<ZeroRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyRequest {
    pub equation: EquationId,
    pub ic: State,
    pub span: Span,
    /// Defaults to `span`.
    #[serde(default)]
    pub window: Option<Span>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub params: ClassifierParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyResponse {
    pub request: ClassifyRequest,
    pub compute_ms: f64,
    pub class: BehaviorClass,
    pub stats: RunStats,
}

/// Bisection over `v0` for the family `y(t0) = y0`, judged on `[t0, to]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BisectRequest {
    pub equation: EquationId,
    pub t0: f64,
    pub y0: f64,
    pub to: f64,
    pub lo: f64,
    pub hi: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub params: ClassifierParams,
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BisectResponse {
    pub request: BisectRequest,
    pub compute_ms: f64,
    pub threshold: CriticalThreshold,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionsQuery {
    pub tmin: f64,
    pub tmax: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionsResponse {
    pub request: RegionsQuery,
    pub compute_ms: f64,
    pub polylines: Vec<Polyline>,
}

fn parse<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request("malformed-body", e.to_string()))
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn integrate_run(
    equation: EquationId,
    ic: State,
    span: Span,
    tolerances: &Tolerances,
    deadline: Instant,
) -> Result<Trajectory, ApiError> {
    if span.t0 != ic.t {
        return Err(ApiError::bad_request(
            "invalid-input",
            format!("span starts at {} but ic.t = {}", span.t0, ic.t),
        ));
    }
    Ok(p4lab_core::equations::integrate_equation_with_deadline(
        equation,
        ic,
        span,
        &tolerances.control(),
        Some(deadline),
    )?)
}

pub fn integrate(req: IntegrateRequest, deadline: Instant) -> Result<IntegrateResponse, ApiError> {
    let start = Instant::now();
    let traj = integrate_run(req.equation, req.ic, req.span, &req.tolerances, deadline)?;
    let samples = downsample(&traj, req.max_samples)?;
    let classification = classify(&traj, req.span, &ClassifierParams::default())?;
    let zeros = detect_zeros(&traj);
    Ok(IntegrateResponse {
        trajectory: TrajectoryDocument::with_samples(req.equation, &traj, samples),
        request: req,
        compute_ms: elapsed_ms(start),
        classification,
        zeros,
    })
}

pub fn classify_request(
    req: ClassifyRequest,
    deadline: Instant,
) -> Result<ClassifyResponse, ApiError> {
    let start = Instant::now();
    let traj = integrate_run(req.equation, req.ic, req.span, &req.tolerances, deadline)?;
    let window = req.window.unwrap_or(req.span);
    let class = classify(&traj, window, &req.params)?;
    Ok(ClassifyResponse {
        stats: RunStats::of(&traj),
        request: req,
        compute_ms: elapsed_ms(start),
        class,
    })
}

pub fn bisect(req: BisectRequest, deadline: Instant) -> Result<BisectResponse, ApiError> {
    let start = Instant::now();
    let mut family =
        Family::new(req.equation, req.t0, req.y0, req.to)?.with_control(req.tolerances.control());
    family.params = req.params;
    let threshold =
        bisect_threshold_with_deadline(&family, req.lo, req.hi, req.tol, Some(deadline))?;
    Ok(BisectResponse {
        request: req,
        compute_ms: elapsed_ms(start),
        threshold,
    })
}

pub fn regions(q: RegionsQuery) -> Result<RegionsResponse, ApiError> {
    let start = Instant::now();
    if !(q.tmin.is_finite() && q.tmax.is_finite() && q.tmin < q.tmax) {
        return Err(ApiError::bad_request(
            "invalid-input",
            format!("need finite tmin < tmax, got [{}, {}]", q.tmin, q.tmax),
        ));
    }
    if !(2..=MAX_REGION_POINTS).contains(&q.n) {
        return Err(ApiError::bad_request(
            "invalid-input",
            format!("n must be in 2..={MAX_REGION_POINTS}, got {}", q.n),
        ));
    }
    Ok(RegionsResponse {
        request: q,
        compute_ms: elapsed_ms(start),
        polylines: guide_polylines(q.tmin, q.tmax, q.n),
    })
}

/// Runs `f` on the blocking pool with a deadline `budget` from now.
async fn compute<T, F>(config: &ServerConfig, f: F) -> Result<Json<T>, ApiError>
where
    T: Send + 'static,
    F: FnOnce(Instant) -> Result<T, ApiError> + Send + 'static,
{
    let deadline = Instant::now() + config.budget;
    tokio::task::spawn_blocking(move || f(deadline))
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
        .map(Json)
}

async fn integrate_handler(
    AxState(config): AxState<ServerConfig>,
    body: Bytes,
) -> Result<Json<IntegrateResponse>, ApiError> {
    let req: IntegrateRequest = parse(&body)?;
    compute(&config, move |d| integrate(req, d)).await
}

async fn classify_handler(
    AxState(config): AxState<ServerConfig>,
    body: Bytes,
) -> Result<Json<ClassifyResponse>, ApiError> {
    let req: ClassifyRequest = parse(&body)?;
    compute(&config, move |d| classify_request(req, d)).await
}

async fn bisect_handler(
    AxState(config): AxState<ServerConfig>,
    body: Bytes,
) -> Result<Json<BisectResponse>, ApiError> {
    let req: BisectRequest = parse(&body)?;
    compute(&config, move |d| bisect(req, d)).await
}

async fn regions_handler(
    query: Result<Query<RegionsQuery>, QueryRejection>,
) -> Result<Json<RegionsResponse>, ApiError> {
    let Query(q) = query.map_err(|e| ApiError::bad_request("malformed-query", e.body_text()))?;
    regions(q).map(Json)
}

async fn healthz() -> &'static str {
    "ok"
}

fn cors(config: &ServerConfig) -> CorsLayer {
    let origins: Vec<HeaderValue> = config
        .cors_origins
        .iter()
        .filter_map(|o| HeaderValue::from_str(o).ok())
        .collect();
    let allow = if origins.is_empty() {
        AllowOrigin::any()
    } else {
        AllowOrigin::list(origins)
    };
    CorsLayer::new()
        .allow_origin(allow)
        .allow_methods(tower_http::cors::Any)
        .allow_headers(tower_http::cors::Any)
}

pub fn app(config: ServerConfig) -> Router {
    Router::new()
        .route("/api/integrate", post(integrate_handler))
        .route("/api/classify", post(classify_handler))
        .route("/api/bisect", post(bisect_handler))
        .route("/api/regions", get(regions_handler))
        .route("/healthz", get(healthz))
        .layer(cors(&config))
        .with_state(config)
}

/// Binds `listen` and serves until Ctrl-C.
pub async fn serve(listen: SocketAddr, config: ServerConfig) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(listen).await?;
    eprintln!(
        "p4lab server listening on http://{}",
        listener.local_addr()?
    );
    axum::serve(listener, app(config))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

/// [`serve`] on a fresh multi-threaded runtime.
pub fn serve_blocking(listen: SocketAddr, config: ServerConfig) -> std::io::Result<()> {
    tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()?
        .block_on(serve(listen, config))
}
