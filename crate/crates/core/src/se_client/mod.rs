//! Stack Exchange API client: pages through tagged questions and their
//! answers, honoring `has_more`, `backoff` and HTTP 429, with an on-disk
//! response cache so an interrupted crawl resumes without spending quota.
//!
//! Bodies are only included by the API when the `withbody` filter is
//! requested; every request carries it.

mod api;

use std::collections::VecDeque;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ingest::Post;

pub use api::{answer_from_item, decode_page, question_from_item, ApiPage};

pub const API_ROOT: &str = "https://api.stackexchange.com/2.3";
pub const MAX_PAGE_SIZE: usize = 100;
pub const MAX_IDS_PER_REQUEST: usize = 100;
pub const MAX_RETRIES: usize = 5;
pub const API_KEY_ENV: &str = "SE_API_KEY";

#[derive(Debug, thiserror::Error)]
pub enum FetchError {
    #[error("invalid fetch spec: {0}")]
    InvalidSpec(String),
    #[error("request to {url} failed: {message}")]
    Transport { url: String, message: String },
    #[error("HTTP {status} from {url}: {message}")]
    Http {
        url: String,
        status: u16,
        message: String,
    },
    #[error("quota exhausted: still throttled after {retries} retries")]
    Quota { retries: usize },
    #[error("malformed API payload on page {page}: {message}")]
    Malformed { page: usize, message: String },
    #[error("response cache {path}: {source}")]
    Cache {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FetchSpec {
    pub site: String,
    pub tag: String,
    pub from_date: DateTime<Utc>,
    pub to_date: DateTime<Utc>,
    #[serde(default = "default_page_size")]
    pub page_size: usize,
    #[serde(default)]
    pub api_key: Option<String>,
    #[serde(default)]
    pub max_pages: Option<usize>,
}

fn default_page_size() -> usize {
    MAX_PAGE_SIZE
}

impl FetchSpec {
    pub fn validate(&self) -> Result<(), FetchError> {
        if self.from_date >= self.to_date {
            return Err(FetchError::InvalidSpec(format!(
                "from_date {} must be before to_date {}",
                self.from_date, self.to_date
            )));
        }
        if !(1..=MAX_PAGE_SIZE).contains(&self.page_size) {
            return Err(FetchError::InvalidSpec(format!(
                "page_size {} outside 1..=100",
                self.page_size
            )));
        }
        if self.site.trim().is_empty() || self.tag.trim().is_empty() {
            return Err(FetchError::InvalidSpec(
                "site and tag must be non-empty".into(),
            ));
        }
        if self.max_pages == Some(0) {
            return Err(FetchError::InvalidSpec(
                "max_pages must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Fills `api_key` from the environment when the spec has none.
    pub fn with_env_key(mut self) -> Self {
        if self.api_key.is_none() {
            self.api_key = std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty());
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub body: Vec<u8>,
}

/// One blocking GET at a time.
pub trait Transport {
    fn get(&mut self, url: &str) -> Result<HttpResponse, String>;
}

/// Monotonic time as seen by the client.
pub trait Clock {
    fn now(&self) -> Duration;
    fn sleep(&mut self, d: Duration);
}

pub struct HttpTransport {
    client: reqwest::blocking::Client,
}

impl HttpTransport {
    pub fn new() -> Result<Self, String> {
        let client = reqwest::blocking::Client::builder()
            .gzip(true)
            .timeout(Duration::from_secs(60))
            .user_agent(concat!("so-insight/", env!("CARGO_PKG_VERSION")))
            .build()
            .map_err(|e| e.to_string())?;
        Ok(HttpTransport { client })
    }
}

impl Transport for HttpTransport {
    fn get(&mut self, url: &str) -> Result<HttpResponse, String> {
        let resp = self.client.get(url).send().map_err(|e| e.to_string())?;
        let status = resp.status().as_u16();
        let body = resp.bytes().map_err(|e| e.to_string())?.to_vec();
        Ok(HttpResponse { status, body })
    }
}

pub struct SystemClock {
    start: Instant,
}

impl Default for SystemClock {
    fn default() -> Self {
        SystemClock {
            start: Instant::now(),
        }
    }
}

impl Clock for SystemClock {
    fn now(&self) -> Duration {
        self.start.elapsed()
    }

    fn sleep(&mut self, d: Duration) {
        std::thread::sleep(d);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Progress {
    pub page: usize,
    pub items: usize,
    pub quota_remaining: Option<u64>,
}

pub struct Client<T, C> {
    transport: T,
    clock: C,
    cache_dir: Option<PathBuf>,
    not_before: Duration,
    retries: usize,
    progress: Progress,
    requests: Vec<(Duration, String)>,
}

impl Client<HttpTransport, SystemClock> {
    pub fn live(cache_dir: Option<PathBuf>) -> Result<Self, FetchError> {
        let transport = HttpTransport::new().map_err(|message| FetchError::Transport {
            url: API_ROOT.to_string(),
            message,
        })?;
        Ok(Client::new(transport, SystemClock::default(), cache_dir))
    }
}

impl<T: Transport, C: Clock> Client<T, C> {
    pub fn new(transport: T, clock: C, cache_dir: Option<PathBuf>) -> Self {
        Client {
            transport,
            clock,
            cache_dir,
            not_before: Duration::ZERO,
            retries: 0,
            progress: Progress::default(),
            requests: Vec::new(),
        }
    }

    pub fn clock(&self) -> &C {
        &self.clock
    }

    pub fn transport(&self) -> &T {
        &self.transport
    }

    /// Throttle events so far: 429 responses plus pages carrying `backoff`.
    pub fn retries(&self) -> usize {
        self.retries
    }

    pub fn progress(&self) -> Progress {
        self.progress
    }

    /// Network requests issued, with the clock reading at issue time.
    pub fn request_log(&self) -> &[(Duration, String)] {
        &self.requests
    }

    /// Earliest clock reading at which the next request may go out.
    pub fn not_before(&self) -> Duration {
        self.not_before
    }

    pub fn fetch_questions<'c>(
        &'c mut self,
        spec: &FetchSpec,
    ) -> Result<PostStream<'c, T, C>, FetchError> {
        spec.validate()?;
        let url = build_url(
            "/questions",
            spec,
            &[
                ("tagged", spec.tag.clone()),
                ("fromdate", spec.from_date.timestamp().to_string()),
                ("todate", spec.to_date.timestamp().to_string()),
            ],
        );
        Ok(PostStream::new(
            self,
            vec![url],
            spec.max_pages,
            Kind::Questions,
        ))
    }

    /// Answers for the given question ids, requested in batches of at most
    /// 100 ids.
    pub fn fetch_answers<'c>(
        &'c mut self,
        question_ids: &[u64],
        spec: &FetchSpec,
    ) -> Result<PostStream<'c, T, C>, FetchError> {
        spec.validate()?;
        if question_ids.is_empty() {
            return Err(FetchError::InvalidSpec(
                "no question ids to fetch answers for".into(),
            ));
        }
        let urls = question_ids
            .chunks(MAX_IDS_PER_REQUEST)
            .map(|batch| {
                let ids: Vec<String> = batch.iter().map(u64::to_string).collect();
                build_url(&format!("/questions/{}/answers", ids.join(";")), spec, &[])
            })
            .collect();
        Ok(PostStream::new(self, urls, spec.max_pages, Kind::Answers))
    }

    fn cache_path(&self, url: &str) -> Option<PathBuf> {
        let dir = self.cache_dir.as_ref()?;
        let digest = Sha256::digest(strip_key(url).as_bytes());
        Some(dir.join(format!("{}.json", hex::encode(digest))))
    }

    fn wait_for_window(&mut self) {
        let now = self.clock.now();
        if now < self.not_before {
            self.clock.sleep(self.not_before - now);
        }
    }

    /// Fetches and decodes one page, retrying while throttled.
    fn get_page(&mut self, url: &str, page: usize) -> Result<ApiPage, FetchError> {
        let cache = self.cache_path(url);
        if let Some(path) = cache.as_deref().filter(|p| p.exists()) {
            let body = std::fs::read(path).map_err(|source| FetchError::Cache {
                path: path.to_path_buf(),
                source,
            })?;
            return decode_page(&body, page);
        }
        let mut attempts = 0;
        loop {
            self.wait_for_window();
            self.requests.push((self.clock.now(), url.to_string()));
            let resp = self
                .transport
                .get(url)
                .map_err(|message| FetchError::Transport {
                    url: strip_key(url),
                    message,
                })?;
            if resp.status == 429 {
                attempts += 1;
                self.retries += 1;
                if attempts > MAX_RETRIES {
                    return Err(FetchError::Quota {
                        retries: MAX_RETRIES,
                    });
                }
                let wait = decode_page(&resp.body, page)
                    .ok()
                    .and_then(|p| p.backoff)
                    .unwrap_or(1u64 << attempts);
                log::warn!(
                    "throttled on page {page}; waiting {wait} s (retry {attempts}/{MAX_RETRIES})"
                );
                self.not_before = self.clock.now() + Duration::from_secs(wait);
                continue;
            }
            if resp.status != 200 {
                let message = decode_page(&resp.body, page)
                    .ok()
                    .and_then(|p| p.error_message)
                    .unwrap_or_else(|| {
                        String::from_utf8_lossy(&resp.body)
                            .chars()
                            .take(200)
                            .collect()
                    });
                return Err(FetchError::Http {
                    url: strip_key(url),
                    status: resp.status,
                    message,
                });
            }
            let decoded = decode_page(&resp.body, page)?;
            if let Some(wait) = decoded.backoff {
                self.retries += 1;
                log::info!("API requested a {wait} s backoff after page {page}");
                self.not_before = self.clock.now() + Duration::from_secs(wait);
            }
            if let Some(path) = cache {
                write_cache(&path, &resp.body)?;
            }
            return Ok(decoded);
        }
    }
}

fn write_cache(path: &Path, body: &[u8]) -> Result<(), FetchError> {
    let err = |source| FetchError::Cache {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(err)?;
    }
    let tmp = path.with_extension("part");
    std::fs::write(&tmp, body).map_err(err)?;
    std::fs::rename(&tmp, path).map_err(err)
}

fn build_url(path: &str, spec: &FetchSpec, extra: &[(&str, String)]) -> String {
    let mut params: Vec<(&str, String)> = vec![
        ("site", spec.site.clone()),
        ("order", "asc".into()),
        ("sort", "creation".into()),
        ("pagesize", spec.page_size.to_string()),
        ("filter", "withbody".into()),
    ];
    params.extend(extra.iter().cloned());
    if let Some(key) = &spec.api_key {
        params.push(("key", key.clone()));
    }
    reqwest::Url::parse_with_params(&format!("{API_ROOT}{path}"), &params)
        .expect("API root and path form a valid URL")
        .to_string()
}

fn with_page(url: &str, page: usize) -> String {
    format!("{url}&page={page}")
}

/// The URL without its `key` parameter, used for cache keys and messages.
fn strip_key(url: &str) -> String {
    match reqwest::Url::parse(url) {
        Ok(mut u) => {
            let kept: Vec<(String, String)> = u
                .query_pairs()
                .into_owned()
                .filter(|(k, _)| k != "key")
                .collect();
            u.query_pairs_mut().clear().extend_pairs(kept);
            u.to_string()
        }
        Err(_) => url.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Questions,
    Answers,
}

/// Lazily pages through one or more endpoints, yielding posts in API order.
pub struct PostStream<'c, T, C> {
    client: &'c mut Client<T, C>,
    urls: VecDeque<String>,
    page: usize,
    pages_fetched: usize,
    max_pages: Option<usize>,
    kind: Kind,
    buffer: VecDeque<Post>,
    finished: bool,
}

impl<'c, T: Transport, C: Clock> PostStream<'c, T, C> {
    fn new(
        client: &'c mut Client<T, C>,
        urls: Vec<String>,
        max_pages: Option<usize>,
        kind: Kind,
    ) -> Self {
        PostStream {
            client,
            urls: urls.into(),
            page: 1,
            pages_fetched: 0,
            max_pages,
            kind,
            buffer: VecDeque::new(),
            finished: false,
        }
    }

    fn next_page(&mut self) -> Result<(), FetchError> {
        let Some(base) = self.urls.front().cloned() else {
            self.finished = true;
            return Ok(());
        };
        if self.max_pages.is_some_and(|m| self.pages_fetched >= m) {
            self.finished = true;
            return Ok(());
        }
        let page_no = self.page;
        let page = self.client.get_page(&with_page(&base, page_no), page_no)?;
        self.pages_fetched += 1;
        for item in &page.items {
            let post = match self.kind {
                Kind::Questions => question_from_item(item),
                Kind::Answers => answer_from_item(item),
            }
            .map_err(|message| FetchError::Malformed {
                page: page_no,
                message,
            })?;
            self.buffer.push_back(post);
        }
        self.client.progress = Progress {
            page: page_no,
            items: self.client.progress.items + page.items.len(),
            quota_remaining: page.quota_remaining,
        };
        log::info!(
            "page {page_no}: {} items, quota remaining {}",
            page.items.len(),
            page.quota_remaining
                .map_or("unknown".to_string(), |q| q.to_string())
        );
        if page.has_more {
            self.page += 1;
        } else {
            self.urls.pop_front();
            self.page = 1;
        }
        Ok(())
    }
}

impl<T: Transport, C: Clock> Iterator for PostStream<'_, T, C> {
    type Item = Result<Post, FetchError>;

    fn next(&mut self) -> Option<Self::Item> {
        while self.buffer.is_empty() && !self.finished {
            if let Err(e) = self.next_page() {
                self.finished = true;
                return Some(Err(e));
            }
        }
        self.buffer.pop_front().map(Ok)
    }
}
