//! HTTP JSON API over loaded representation-weight datasets.
//!
//! All routes live under `/api/v1`. Datasets are installed once and are
//! read-only afterwards; until then every data route answers 503.

mod error;
mod handlers;
mod params;

use std::collections::BTreeMap;
use std::future::Future;
use std::sync::{Arc, OnceLock};

use axum::http::{HeaderValue, Method};
use axum::routing::{get, post};
use axum::Router;
use repweight_core::model::Dataset;
use tower_http::cors::{AllowOrigin, Any, CorsLayer};

pub use error::{ApiError, ErrorBody};
pub use handlers::{AllocationSummary, DatasetSummary, Health, ScenarioRequest, ScenarioResponse};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug)]
pub struct Loaded {
    pub datasets: BTreeMap<u16, Dataset>,
}

/// Shared service state: empty while loading, then a fixed set of datasets.
#[derive(Debug, Clone, Default)]
pub struct AppState {
    inner: Arc<OnceLock<Arc<Loaded>>>,
}

impl AppState {
    pub fn loading() -> Self {
        Self::default()
    }

    pub fn loaded(datasets: BTreeMap<u16, Dataset>) -> Self {
        let s = Self::default();
        s.install(datasets);
        s
    }

    /// Installs the datasets. Returns false if data was already installed,
    /// in which case the existing data is kept.
    pub fn install(&self, datasets: BTreeMap<u16, Dataset>) -> bool {
        self.inner.set(Arc::new(Loaded { datasets })).is_ok()
    }

    pub fn get(&self) -> Option<Arc<Loaded>> {
        self.inner.get().cloned()
    }
}

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// Allowed CORS origins. `*` allows any origin; an empty list disables
    /// cross-origin access.
    pub cors_origins: Vec<String>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            cors_origins: vec!["*".into()],
        }
    }
}

fn cors(config: &ServiceConfig) -> Option<CorsLayer> {
    if config.cors_origins.is_empty() {
        return None;
    }
    let layer = CorsLayer::new()
        .allow_methods([Method::GET, Method::POST])
        .allow_headers(Any);
    if config.cors_origins.iter().any(|o| o == "*") {
        return Some(layer.allow_origin(Any));
    }
    let origins: Vec<HeaderValue> = config
        .cors_origins
        .iter()
        .filter_map(|o| HeaderValue::from_str(o).ok())
        .collect();
    Some(layer.allow_origin(AllowOrigin::list(origins)))
}

pub fn router(state: AppState, config: &ServiceConfig) -> Router {
    let api = Router::new()
        .route("/health", get(handlers::health))
        .route("/datasets", get(handlers::datasets))
        .route("/metrics", get(handlers::metrics))
        .route("/scenario", post(handlers::scenario))
        .route("/trends", get(handlers::trends))
        .route("/units", get(handlers::units))
        .route("/figures/{kind}", get(handlers::figure))
        .fallback(handlers::not_found)
        .with_state(state);
    let app = Router::new().nest("/api/v1", api).fallback(handlers::not_found);
    match cors(config) {
        Some(layer) => app.layer(layer),
        None => app,
    }
}

/// Serves `router` on `listener` until `shutdown` resolves, then drains
/// in-flight requests.
pub async fn serve(
    listener: tokio::net::TcpListener,
    router: Router,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router)
        .with_graceful_shutdown(shutdown)
        .await
}
