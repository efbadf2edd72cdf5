//! HTTP front end for the gemtrail ledger.
//!
//! Events are posted per app, appended to a JSONL log on disk and applied to
//! an in-memory ledger that is rebuilt from the log at startup. Reports,
//! traces and the shop catalog are served as JSON under `/v1`.

pub mod app;
pub mod config;
pub mod error;
pub mod store;

use std::future::Future;
use std::net::SocketAddr;

use thiserror::Error;
use tokio::net::TcpListener;

pub use app::{router, ServiceState};
pub use config::{AppConfig, ServiceConfig};
pub use error::ApiError;
pub use store::{Store, StoreError};

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error(transparent)]
    Config(#[from] config::ConfigError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("catalog for app {0}: {1}")]
    Catalog(String, String),
    #[error("cannot listen on {addr}: {source}")]
    Bind {
        addr: String,
        source: std::io::Error,
    },
    #[error("server failed: {0}")]
    Serve(std::io::Error),
}

/// Opens state, binds the listener and serves until `shutdown` resolves.
///
/// `on_bound` is told the actual address once the socket is listening.
pub async fn serve(
    config: ServiceConfig,
    on_bound: impl FnOnce(SocketAddr),
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> Result<(), ServiceError> {
    let state = ServiceState::open(&config)?;
    let bind_err = |source| ServiceError::Bind {
        addr: config.listen.clone(),
        source,
    };
    let listener = TcpListener::bind(&config.listen).await.map_err(bind_err)?;
    on_bound(listener.local_addr().map_err(bind_err)?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(shutdown)
        .await
        .map_err(ServiceError::Serve)
}

/// Resolves on Ctrl-C or, on Unix, SIGTERM.
pub async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {}
        _ = term => {}
    }
}
