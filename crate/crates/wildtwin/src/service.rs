//! HTTP API over a single playback session.
//!
//! JSON bodies throughout; rasters come back as image bytes and the frame
//! stream is server-sent events carrying `SceneFrame` JSON.

use std::convert::Infallible;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};
use std::time::Duration;

use axum::body::Body;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, StatusCode};
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::Stream;
use serde::{Deserialize, Serialize};
use tokio::net::TcpListener;
use wildtwin_core::geo::GeodeticPoint;
use wildtwin_core::lod::CameraPose;
use wildtwin_core::playback::{PlaybackCommand, PlaybackState, SceneFrame};
use wildtwin_core::stations::{
    nearest_stations, search_assets, AnchorError, AnchorRegistry, AssetHit, AssetQuery, FireStation, RankedStation,
    TeleportAnchor, FIRE_ORIGIN_ANCHOR,
};

use crate::render::{encode, render, ImageFormat, RenderKind, RenderOptions};
use crate::scenario::{FluxExtrema, Scenario};
use crate::session::{FrameFeed, Session, SessionConfig, TimeSource};
use crate::Error;

pub struct AppState {
    session: RwLock<Option<Arc<Session>>>,
    stations: Vec<FireStation>,
    anchors: RwLock<AnchorRegistry>,
    feed: FrameFeed,
    time: Arc<dyn TimeSource>,
    config: SessionConfig,
}

impl AppState {
    pub fn new(stations: Vec<FireStation>, time: Arc<dyn TimeSource>, config: SessionConfig) -> Self {
        Self {
            session: RwLock::new(None),
            stations,
            anchors: RwLock::new(AnchorRegistry::new()),
            feed: FrameFeed::new(),
            time,
            config,
        }
    }

    pub fn session(&self) -> Option<Arc<Session>> {
        self.session.read().unwrap_or_else(|p| p.into_inner()).clone()
    }

    fn require_session(&self) -> Result<Arc<Session>, ApiError> {
        self.session()
            .ok_or_else(|| ApiError::new(StatusCode::CONFLICT, "no scenario loaded"))
    }

    /// Replaces the active session. Blocking: loads and validates files.
    pub fn load(&self, path: &std::path::Path) -> Result<ScenarioInfo, Error> {
        let scenario = Scenario::open(path)?;
        let session = Arc::new(Session::new(scenario, Arc::clone(&self.time), self.config)?);
        let info = ScenarioInfo::of(&session);
        *self.session.write().unwrap_or_else(|p| p.into_inner()) = Some(session);
        Ok(info)
    }

    pub fn feed(&self) -> &FrameFeed {
        &self.feed
    }

    /// Advances playback and publishes a scene when the frame moved.
    pub fn tick(&self) -> Result<Option<usize>, Error> {
        let Some(session) = self.session() else {
            return Ok(None);
        };
        let Some(frame) = session.tick() else {
            return Ok(None);
        };
        let scene = session.scene_at(frame, session.stream_camera())?;
        self.feed.publish(scene);
        Ok(Some(frame))
    }

    pub fn anchors(&self) -> Vec<TeleportAnchor> {
        let mut out = Vec::new();
        if let Some(pose) = self.session().and_then(|s| s.fire_origin()) {
            out.push(TeleportAnchor {
                name: FIRE_ORIGIN_ANCHOR.into(),
                pose,
            });
        }
        out.extend(self.anchors.read().unwrap_or_else(|p| p.into_inner()).list());
        out
    }

    pub fn resolve_anchor(&self, name: &str) -> Result<CameraPose, AnchorError> {
        if name == FIRE_ORIGIN_ANCHOR {
            return self
                .session()
                .and_then(|s| s.fire_origin())
                .ok_or_else(|| AnchorError::Unknown(name.into()));
        }
        self.anchors.read().unwrap_or_else(|p| p.into_inner()).resolve(name)
    }

    pub fn register_anchor(&self, name: &str, pose: CameraPose) -> Result<(), AnchorError> {
        if name == FIRE_ORIGIN_ANCHOR {
            return Err(AnchorError::Duplicate(name.into()));
        }
        self.anchors.write().unwrap_or_else(|p| p.into_inner()).register(name, pose)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioInfo {
    pub name: String,
    pub frame_count: usize,
    pub frame_interval_s: f64,
    pub grid_flux: (usize, usize),
    pub grid_fuel: (usize, usize),
    pub origin: GeodeticPoint,
    pub extrema: FluxExtrema,
}

impl ScenarioInfo {
    fn of(session: &Session) -> Self {
        let s = session.scenario();
        Self {
            name: s.name().to_string(),
            frame_count: s.frame_count(),
            frame_interval_s: s.manifest.frame_interval_s,
            grid_flux: s.manifest.flux_dims(),
            grid_fuel: s.manifest.fuel_dims(),
            origin: s.manifest.origin(),
            extrema: s.extrema,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadRequest {
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NearestQuery {
    pub lat: f64,
    pub lon: f64,
    #[serde(default)]
    pub h: f64,
    #[serde(default = "default_k")]
    pub k: usize,
}

fn default_k() -> usize {
    3
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
pub struct RasterQuery {
    #[serde(default)]
    pub format: Option<ImageFormat>,
    pub width: Option<usize>,
    pub height: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        use crate::manifest::ScenarioError as S;
        let status = match &e {
            Error::Scenario(S::FrameOutOfRange { .. }) => StatusCode::NOT_FOUND,
            Error::Scenario(S::MissingFile { .. }) => StatusCode::NOT_FOUND,
            Error::Scenario(S::Io { .. }) => StatusCode::INTERNAL_SERVER_ERROR,
            Error::Image(_) => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::BAD_REQUEST,
        };
        ApiError::new(status, e.to_string())
    }
}

impl From<AnchorError> for ApiError {
    fn from(e: AnchorError) -> Self {
        let status = match e {
            AnchorError::Unknown(_) => StatusCode::NOT_FOUND,
            AnchorError::Duplicate(_) => StatusCode::CONFLICT,
            AnchorError::InvalidPose(_) => StatusCode::BAD_REQUEST,
        };
        ApiError::new(status, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(ErrorBody { error: self.message })).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;
type Shared = State<Arc<AppState>>;

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, Error> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
        .map_err(ApiError::from)
}

async fn health() -> &'static str {
    "ok"
}

async fn load_scenario(State(app): Shared, Json(req): Json<LoadRequest>) -> ApiResult<Json<ScenarioInfo>> {
    let app2 = Arc::clone(&app);
    Ok(Json(blocking(move || app2.load(&req.path)).await?))
}

async fn scenario_info(State(app): Shared) -> ApiResult<Json<ScenarioInfo>> {
    Ok(Json(ScenarioInfo::of(&*app.require_session()?)))
}

async fn state(State(app): Shared) -> ApiResult<Json<PlaybackState>> {
    Ok(Json(app.require_session()?.state()))
}

async fn control(State(app): Shared, Json(cmd): Json<PlaybackCommand>) -> ApiResult<Json<PlaybackState>> {
    Ok(Json(app.require_session()?.control(cmd)?))
}

async fn scene(State(app): Shared, Json(camera): Json<CameraPose>) -> ApiResult<Json<SceneFrame>> {
    let session = app.require_session()?;
    let scene = blocking(move || session.scene(camera)).await?;
    Ok(Json(SceneFrame::clone(&scene)))
}

async fn emitters(State(app): Shared, UrlPath(frame): UrlPath<usize>) -> ApiResult<Response> {
    let session = app.require_session()?;
    let set = blocking(move || session.emitters(frame)).await?;
    Ok(Json(&*set).into_response())
}

async fn raster(
    State(app): Shared,
    UrlPath((kind, frame)): UrlPath<(String, usize)>,
    Query(q): Query<RasterQuery>,
) -> ApiResult<Response> {
    let kind: RenderKind = kind
        .parse()
        .map_err(|e: String| ApiError::new(StatusCode::NOT_FOUND, e))?;
    let format = q.format.unwrap_or(if kind == RenderKind::Depth {
        ImageFormat::Pfm
    } else {
        ImageFormat::Png
    });
    let size = match (q.width, q.height) {
        (Some(w), Some(h)) => Some((w, h)),
        (None, None) => None,
        _ => return Err(ApiError::new(StatusCode::BAD_REQUEST, "width and height go together")),
    };
    let session = app.require_session()?;
    let camera = session.state().camera;
    let bytes = blocking(move || {
        let opts = RenderOptions {
            size,
            camera,
            ..RenderOptions::default()
        };
        encode(&render(session.scenario(), kind, frame, &opts)?, format)
    })
    .await?;
    Ok(([(header::CONTENT_TYPE, format.content_type())], Body::from(bytes)).into_response())
}

async fn stations(State(app): Shared) -> Json<Vec<FireStation>> {
    Json(app.stations.clone())
}

async fn stations_search(State(app): Shared, Json(q): Json<AssetQuery>) -> Json<Vec<AssetHit>> {
    Json(search_assets(&app.stations, &q))
}

async fn stations_nearest(State(app): Shared, Query(q): Query<NearestQuery>) -> ApiResult<Json<Vec<RankedStation>>> {
    let point = GeodeticPoint::new(q.lat, q.lon, q.h);
    point
        .validate()
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.to_string()))?;
    if q.k == 0 {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "k must be at least 1"));
    }
    Ok(Json(nearest_stations(&point, &app.stations, q.k)))
}

async fn anchors(State(app): Shared) -> Json<Vec<TeleportAnchor>> {
    Json(app.anchors())
}

async fn anchor(State(app): Shared, UrlPath(name): UrlPath<String>) -> ApiResult<Json<TeleportAnchor>> {
    let pose = app.resolve_anchor(&name)?;
    Ok(Json(TeleportAnchor { name, pose }))
}

async fn add_anchor(State(app): Shared, Json(a): Json<TeleportAnchor>) -> ApiResult<(StatusCode, Json<TeleportAnchor>)> {
    app.register_anchor(&a.name, a.pose)?;
    Ok((StatusCode::CREATED, Json(a)))
}

fn sse_stream(app: &AppState) -> impl Stream<Item = Result<Event, Infallible>> {
    futures::stream::unfold(app.feed.subscribe(), |mut sub| async move {
        let scene = sub.next().await?;
        let event = Event::default()
            .event("frame")
            .id(scene.frame.to_string())
            .json_data(&*scene)
            .unwrap_or_else(|_| Event::default().event("error"));
        Some((Ok(event), sub))
    })
}

async fn stream(State(app): Shared) -> Sse<impl Stream<Item = Result<Event, Infallible>>> {
    Sse::new(sse_stream(&app)).keep_alive(KeepAlive::default())
}

pub fn router(app: Arc<AppState>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/scenario", get(scenario_info).post(load_scenario))
        .route("/state", get(state))
        .route("/control", post(control))
        .route("/scene", post(scene))
        .route("/emitters/{frame}", get(emitters))
        .route("/raster/{kind}/{frame}", get(raster))
        .route("/stations", get(stations))
        .route("/stations/search", post(stations_search))
        .route("/stations/nearest", get(stations_nearest))
        .route("/anchors", get(anchors).post(add_anchor))
        .route("/anchors/{name}", get(anchor))
        .route("/stream", get(stream))
        .with_state(app)
}

/// Drives playback: every `period`, advance the clock and publish.
pub fn spawn_ticker(app: Arc<AppState>, period: Duration) -> tokio::task::JoinHandle<()> {
    tokio::spawn(async move {
        let mut interval = tokio::time::interval(period);
        interval.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Skip);
        loop {
            interval.tick().await;
            let app = Arc::clone(&app);
            match tokio::task::spawn_blocking(move || app.tick()).await {
                Ok(Err(e)) => eprintln!("playback tick failed: {e}"),
                Err(e) => eprintln!("playback tick panicked: {e}"),
                Ok(Ok(_)) => {}
            }
        }
    })
}

/// Serves until the listener fails or the future is dropped.
pub async fn serve(listener: TcpListener, app: Arc<AppState>) -> std::io::Result<()> {
    axum::serve(listener, router(app)).await
}
