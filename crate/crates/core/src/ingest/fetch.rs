use std::path::{Path, PathBuf};
use std::sync::OnceLock;
use std::time::Duration;

use url::Url;

/// Body and declared content type of a retrieved document.
#[derive(Debug, Clone)]
pub struct FetchedDocument {
    pub bytes: Vec<u8>,
    pub content_type: String,
}

/// Resolves `http(s)://`, `file://` and `fixture:` URLs.
///
/// `fixture:feeds/a.xml` is read relative to the fixture root, which lets a
/// checked-in registry point at local files without absolute paths.
#[derive(Debug)]
pub struct Fetcher {
    fixture_root: PathBuf,
    timeout: Duration,
    client: OnceLock<reqwest::blocking::Client>,
}

impl Fetcher {
    pub fn new(fixture_root: impl Into<PathBuf>) -> Self {
        Self {
            fixture_root: fixture_root.into(),
            timeout: Duration::from_secs(20),
            client: OnceLock::new(),
        }
    }

    pub fn fixture_root(&self) -> &Path {
        &self.fixture_root
    }

    pub fn fetch(&self, url: &str) -> Result<FetchedDocument, String> {
        let parsed = Url::parse(url).map_err(|e| format!("bad url `{url}`: {e}"))?;
        match parsed.scheme() {
            "fixture" => self.read_local(&self.fixture_root.join(parsed.path())),
            "file" => {
                let path = parsed.to_file_path().map_err(|_| format!("bad file url `{url}`"))?;
                self.read_local(&path)
            }
            "http" | "https" => self.fetch_http(url),
            other => Err(format!("unsupported scheme `{other}`")),
        }
    }

    fn read_local(&self, path: &Path) -> Result<FetchedDocument, String> {
        let bytes = std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let content_type = match path.extension().and_then(|e| e.to_str()) {
            Some("html" | "htm") => "text/html",
            Some("xml" | "rss" | "atom") => "application/xml",
            _ => "text/plain",
        };
        Ok(FetchedDocument {
            bytes,
            content_type: content_type.to_owned(),
        })
    }

    fn fetch_http(&self, url: &str) -> Result<FetchedDocument, String> {
        let client = self.client.get_or_init(|| {
            reqwest::blocking::Client::builder()
                .timeout(self.timeout)
                .user_agent("newsdesk/0.1")
                .build()
                .expect("http client")
        });
        let resp = client.get(url).send().map_err(|e| e.to_string())?;
        if !resp.status().is_success() {
            return Err(format!("HTTP {}", resp.status()));
        }
        let content_type = resp
            .headers()
            .get(reqwest::header::CONTENT_TYPE)
            .and_then(|v| v.to_str().ok())
            .unwrap_or("text/html")
            .to_owned();
        let bytes = resp.bytes().map_err(|e| e.to_string())?.to_vec();
        Ok(FetchedDocument { bytes, content_type })
    }
}
