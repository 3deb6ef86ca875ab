use clap::Parser;
use ideaweave_core::gateway::{FixtureStore, Gateway, GatewayMode, OpenAiConfig, OpenAiProvider};
use ideaweave_core::graph::ProjectStore;
use ideaweave_core::library::{HttpPdfFetcher, LibraryConfig, PaperLibrary, SemanticScholarClient, TeiExtractor};
use ideaweave_core::runtime::Runtime;
use ideaweave_core::transport::{HttpTransport, ReqwestTransport};
use ideaweave_core::{Result, Studio};
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

/// Model credentials and endpoints are read from LLM_API_KEY, LLM_BASE_URL,
/// LLM_MAIN_MODEL and LLM_SUMMARIZER_MODEL; the paper index key from
/// SCHOLAR_API_KEY.
#[derive(Debug, Clone, Parser)]
#[command(name = "ideaweave", version, about = "Research-idea graph service")]
pub struct Config {
    #[arg(long, env = "PORT", default_value_t = 8080)]
    pub port: u16,

    #[arg(long, env = "BIND_ADDR", default_value = "127.0.0.1")]
    pub bind: String,

    /// Directory for project documents. Projects live in memory when unset.
    #[arg(long, env = "DATA_DIR")]
    pub data_dir: Option<PathBuf>,

    /// live, record or replay.
    #[arg(long, env = "LLM_MODE", default_value = "live")]
    pub llm_mode: GatewayMode,

    /// Fixture directory for record and replay modes.
    #[arg(long, env = "FIXTURE_DIR")]
    pub fixture_dir: Option<PathBuf>,

    /// Base URL of the PDF-to-TEI extraction service.
    #[arg(long, env = "EXTRACTOR_URL", default_value = "http://localhost:8070")]
    pub extractor_url: String,

    /// Allowed browser origins. Any origin when none is given.
    #[arg(long = "cors-origin", env = "CORS_ORIGINS", value_delimiter = ',')]
    pub cors_origins: Vec<String>,

    /// Upper bound on one request, model calls included.
    #[arg(long, env = "REQUEST_TIMEOUT_SECS", default_value_t = 120)]
    pub timeout_secs: u64,

    /// Seeds ids and freezes the clock so replayed sessions are byte-stable.
    #[arg(long, env = "IDEAWEAVE_SEED")]
    pub seed: Option<u64>,
}

impl Config {
    pub fn timeout(&self) -> Duration {
        Duration::from_secs(self.timeout_secs)
    }

    fn fixtures(&self) -> Result<Arc<FixtureStore>> {
        match &self.fixture_dir {
            Some(dir) => Ok(Arc::new(FixtureStore::open(dir)?)),
            None => Err(ideaweave_core::Error::InvalidRequest(format!(
                "LLM_MODE={} needs FIXTURE_DIR",
                self.llm_mode
            ))),
        }
    }

    pub fn gateway(&self, transport: Arc<dyn HttpTransport>) -> Result<Gateway> {
        let provider = || Arc::new(OpenAiProvider::new(OpenAiConfig::from_env(), transport.clone()));
        Ok(match self.llm_mode {
            GatewayMode::Live => Gateway::live(provider()),
            GatewayMode::Record => Gateway::record(provider(), self.fixtures()?),
            GatewayMode::Replay => Gateway::replay(self.fixtures()?),
        })
    }

    pub fn studio(&self) -> Result<Studio> {
        let transport: Arc<dyn HttpTransport> = Arc::new(ReqwestTransport::new(self.timeout())?);
        let library = PaperLibrary::new(
            Arc::new(SemanticScholarClient::from_env(transport.clone())),
            Arc::new(HttpPdfFetcher::new(transport.clone())),
            Arc::new(TeiExtractor::new(&self.extractor_url, transport.clone())),
            LibraryConfig::default(),
        );
        let mut builder = Studio::builder(Arc::new(self.gateway(transport)?), Arc::new(library));
        if let Some(dir) = &self.data_dir {
            builder = builder.store(ProjectStore::open(dir)?);
        }
        if let Some(seed) = self.seed {
            builder = builder.runtime(Runtime::deterministic(seed));
        }
        Ok(builder.build())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = Config::try_parse_from(["ideaweave"]).unwrap();
        assert_eq!(c.port, 8080);
        assert_eq!(c.llm_mode, GatewayMode::Live);
        assert_eq!(c.timeout(), Duration::from_secs(120));
        assert!(c.cors_origins.is_empty());
    }

    #[test]
    fn flags_parse() {
        let c = Config::try_parse_from([
            "ideaweave",
            "--port",
            "9000",
            "--data-dir",
            "/tmp/x",
            "--llm-mode",
            "replay",
            "--cors-origin",
            "http://a,http://b",
        ])
        .unwrap();
        assert_eq!(c.port, 9000);
        assert_eq!(c.data_dir, Some(PathBuf::from("/tmp/x")));
        assert_eq!(c.llm_mode, GatewayMode::Replay);
        assert_eq!(c.cors_origins, ["http://a", "http://b"]);
    }

    #[test]
    fn replay_without_fixtures_is_refused() {
        let c = Config::try_parse_from(["ideaweave", "--llm-mode", "replay"]).unwrap();
        let transport: Arc<dyn HttpTransport> = Arc::new(ReqwestTransport::new(c.timeout()).unwrap());
        assert_eq!(c.gateway(transport).unwrap_err().code(), "InvalidRequest");
    }
}
