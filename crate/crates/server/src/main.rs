use clap::Parser;
use ideaweave_server::{api, AppState, Config};
use std::sync::Arc;
use tracing_subscriber::EnvFilter;

// The core's HTTP clients are blocking and own their own runtimes, so the
// studio is built, and finally dropped, outside the server's runtime.
fn main() {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .init();
    let config = Config::parse();
    let studio = match config.studio() {
        Ok(s) => Arc::new(s),
        Err(e) => {
            eprintln!("ideaweave: {e}");
            std::process::exit(2);
        }
    };
    let runtime = tokio::runtime::Runtime::new().expect("tokio runtime");
    let result = runtime.block_on(serve(&config, studio.clone()));
    drop(runtime);
    drop(studio);
    if let Err(e) = result {
        eprintln!("ideaweave: {e}");
        std::process::exit(1);
    }
}

async fn serve(config: &Config, studio: Arc<ideaweave_core::Studio>) -> std::io::Result<()> {
    let app = api::router(AppState::new(studio, config.timeout())).layer(api::cors(&config.cors_origins));
    let addr = format!("{}:{}", config.bind, config.port);
    let listener = tokio::net::TcpListener::bind(&addr).await?;
    tracing::info!(%addr, mode = %config.llm_mode, "listening");
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
