use std::net::SocketAddr;
use std::path::PathBuf;

use clap::Args;

#[derive(Debug, Clone, Args)]
pub struct ServiceConfig {
    /// Address to listen on.
    #[arg(long, env = "PIVOTMODEL_LISTEN", default_value = "127.0.0.1:8080")]
    pub listen: SocketAddr,

    /// Directory models are loaded from at startup and saved to after
    /// every change. Without it, models live in memory only.
    #[arg(long, env = "PIVOTMODEL_MODEL_DIR")]
    pub model_dir: Option<PathBuf>,

    /// Largest accepted request body, in bytes.
    #[arg(long, env = "PIVOTMODEL_MAX_BODY", default_value_t = 16 * 1024 * 1024)]
    pub max_body_bytes: usize,
}
