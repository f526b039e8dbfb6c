//! HTTP/JSON API over a registry of in-memory models.
//!
//! Addresses travel as `{"DIM": "Member", ...}` objects. Every mutation
//! bumps the model version; a mutation that carries a stale
//! `model_version` is refused with 409.

mod config;
mod error;
mod registry;
mod routes;
mod wire;

pub use config::ServiceConfig;
pub use error::ApiError;
pub use registry::{Registry, RegistryError};
pub use routes::router;
pub use wire::*;

use std::sync::Arc;

/// Binds the listener and serves until the process is stopped.
pub async fn serve(config: ServiceConfig) -> Result<(), Box<dyn std::error::Error + Send + Sync>> {
    let registry = match &config.model_dir {
        Some(dir) => Registry::open(dir)?,
        None => Registry::in_memory(),
    };
    tracing::info!(models = registry.len(), "registry ready");
    let app = router(Arc::new(registry), config.max_body_bytes);
    let listener = tokio::net::TcpListener::bind(config.listen).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, app).await?;
    Ok(())
}
