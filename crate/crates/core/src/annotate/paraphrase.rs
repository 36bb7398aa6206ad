//! Backtranslation paraphrases: English → pivot language → English.
//!
//! Three providers: an online machine-translation service with an on-disk
//! cache, an offline table of precomputed paraphrases, and `Unavailable`.

use std::collections::HashMap;
use std::fmt;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::util::sha256_hex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pivot {
    Fr,
    De,
    Zh,
    Es,
    Ru,
}

impl Pivot {
    pub const ALL: [Pivot; 5] = [Pivot::Fr, Pivot::De, Pivot::Zh, Pivot::Es, Pivot::Ru];

    pub fn code(self) -> &'static str {
        match self {
            Pivot::Fr => "fr",
            Pivot::De => "de",
            Pivot::Zh => "zh",
            Pivot::Es => "es",
            Pivot::Ru => "ru",
        }
    }
}

impl fmt::Display for Pivot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Pivot {
    type Err = ParaphraseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "fr" | "french" => Ok(Pivot::Fr),
            "de" | "german" => Ok(Pivot::De),
            "zh" | "chinese" => Ok(Pivot::Zh),
            "es" | "spanish" => Ok(Pivot::Es),
            "ru" | "russian" => Ok(Pivot::Ru),
            other => Err(ParaphraseError::UnknownPivot(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParaphraseRequest {
    pub text: String,
    pub pivot: Pivot,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParaphraseResult {
    pub text: String,
    pub cached: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum ParaphraseError {
    #[error("no paraphrase provider configured")]
    ProviderUnavailable,
    #[error("translation failed after {attempts} attempts: {message}")]
    Transport { attempts: u32, message: String },
    #[error("corrupt cache entry {path}: {reason}")]
    CacheCorrupt { path: PathBuf, reason: String },
    #[error("no table entry for pivot {pivot}")]
    NotFound { pivot: Pivot },
    #[error("unknown pivot language {0:?}")]
    UnknownPivot(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid provider configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One machine-translation hop.
pub trait Translator: Send + Sync {
    fn translate(&self, text: &str, source_lang: &str, target_lang: &str) -> Result<String, String>;
}

#[derive(Serialize)]
struct TranslateRequest<'a> {
    text: &'a str,
    source_lang: &'a str,
    target_lang: &'a str,
}

#[derive(Deserialize)]
struct TranslateResponse {
    text: String,
}

/// JSON-over-HTTP translator: POSTs `{"text","source_lang","target_lang"}`
/// and reads `{"text"}` back.
pub struct HttpTranslator {
    endpoint: String,
    api_key: Option<String>,
    agent: ureq::Agent,
}

impl HttpTranslator {
    pub fn new(endpoint: impl Into<String>, api_key: Option<String>, timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .build()
            .into();
        HttpTranslator {
            endpoint: endpoint.into(),
            api_key,
            agent,
        }
    }
}

impl Translator for HttpTranslator {
    fn translate(&self, text: &str, source_lang: &str, target_lang: &str) -> Result<String, String> {
        let mut request = self.agent.post(&self.endpoint);
        if let Some(key) = &self.api_key {
            request = request.header("Authorization", &format!("Bearer {key}"));
        }
        let mut response = request
            .send_json(TranslateRequest {
                text,
                source_lang,
                target_lang,
            })
            .map_err(|e| e.to_string())?;
        let body: TranslateResponse = response.body_mut().read_json().map_err(|e| e.to_string())?;
        Ok(body.text)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableEntry {
    pub text: String,
    pub pivot: Pivot,
    pub paraphrase: String,
}

/// Precomputed paraphrases keyed by `(text, pivot)`.
#[derive(Debug, Clone, Default)]
pub struct ParaphraseTable {
    entries: HashMap<(String, Pivot), String>,
}

impl ParaphraseTable {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ParaphraseError> {
        let reader = BufReader::new(File::open(path)?);
        let mut table = ParaphraseTable::default();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: TableEntry = serde_json::from_str(&line).map_err(|e| ParaphraseError::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
            table.insert(entry);
        }
        Ok(table)
    }

    pub fn insert(&mut self, entry: TableEntry) {
        self.entries.insert((entry.text, entry.pivot), entry.paraphrase);
    }

    pub fn get(&self, text: &str, pivot: Pivot) -> Option<&str> {
        self.entries.get(&(text.to_string(), pivot)).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// On-disk cache, one JSON file per `(text, pivot)` key. Writes go through a
/// temp file and rename, so readers never see partial entries.
pub struct DiskCache {
    dir: PathBuf,
    key_locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
}

impl DiskCache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self, ParaphraseError> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(DiskCache {
            dir,
            key_locks: Mutex::new(HashMap::new()),
        })
    }

    fn key(text: &str, pivot: Pivot) -> String {
        sha256_hex(format!("{}\0{}", pivot.code(), text).as_bytes())
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    fn lock_for(&self, key: &str) -> Arc<Mutex<()>> {
        let mut locks = self.key_locks.lock().unwrap_or_else(|e| e.into_inner());
        locks.entry(key.to_string()).or_default().clone()
    }

    fn read(&self, key: &str, text: &str, pivot: Pivot) -> Result<Option<String>, ParaphraseError> {
        let path = self.path(key);
        let raw = match fs::read_to_string(&path) {
            Ok(raw) => raw,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let corrupt = |reason: String| ParaphraseError::CacheCorrupt {
            path: path.clone(),
            reason,
        };
        let entry: TableEntry = serde_json::from_str(&raw).map_err(|e| corrupt(e.to_string()))?;
        if entry.text != text || entry.pivot != pivot {
            return Err(corrupt("entry does not match its key".into()));
        }
        if entry.paraphrase.is_empty() {
            return Err(corrupt("empty paraphrase".into()));
        }
        Ok(Some(entry.paraphrase))
    }

    fn write(&self, key: &str, entry: &TableEntry) -> Result<(), ParaphraseError> {
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        serde_json::to_writer(&mut tmp, entry).map_err(std::io::Error::from)?;
        tmp.flush()?;
        tmp.persist(self.path(key)).map_err(|e| e.error)?;
        Ok(())
    }
}

pub struct OnlineProvider {
    translator: Box<dyn Translator>,
    cache: DiskCache,
    max_attempts: u32,
    backoff: Duration,
}

impl OnlineProvider {
    pub fn new(translator: Box<dyn Translator>, cache: DiskCache) -> Self {
        OnlineProvider {
            translator,
            cache,
            max_attempts: 3,
            backoff: Duration::from_millis(500),
        }
    }

    pub fn with_retries(mut self, max_attempts: u32, backoff: Duration) -> Self {
        self.max_attempts = max_attempts.max(1);
        self.backoff = backoff;
        self
    }

    fn hop(&self, text: &str, source: &str, target: &str) -> Result<String, ParaphraseError> {
        let mut last = String::new();
        for attempt in 1..=self.max_attempts {
            match self.translator.translate(text, source, target) {
                Ok(out) if !out.trim().is_empty() => return Ok(out),
                Ok(_) => last = "empty translation".into(),
                Err(e) => last = e,
            }
            if attempt < self.max_attempts && !self.backoff.is_zero() {
                std::thread::sleep(self.backoff * attempt);
            }
        }
        Err(ParaphraseError::Transport {
            attempts: self.max_attempts,
            message: last,
        })
    }

    fn paraphrase(&self, req: &ParaphraseRequest) -> Result<ParaphraseResult, ParaphraseError> {
        let key = DiskCache::key(&req.text, req.pivot);
        if let Some(text) = self.cache.read(&key, &req.text, req.pivot)? {
            return Ok(ParaphraseResult { text, cached: true });
        }
        let lock = self.cache.lock_for(&key);
        let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());
        // another thread may have filled the entry while we waited
        if let Some(text) = self.cache.read(&key, &req.text, req.pivot)? {
            return Ok(ParaphraseResult { text, cached: true });
        }
        let pivot_text = self.hop(&req.text, "en", req.pivot.code())?;
        let back = self.hop(&pivot_text, req.pivot.code(), "en")?;
        self.cache.write(
            &key,
            &TableEntry {
                text: req.text.clone(),
                pivot: req.pivot,
                paraphrase: back.clone(),
            },
        )?;
        Ok(ParaphraseResult {
            text: back,
            cached: false,
        })
    }
}

#[derive(Default)]
pub enum ParaphraseProvider {
    Online(OnlineProvider),
    OfflineTable(ParaphraseTable),
    #[default]
    Unavailable,
}

impl ParaphraseProvider {
    pub fn paraphrase(&self, req: &ParaphraseRequest) -> Result<ParaphraseResult, ParaphraseError> {
        match self {
            ParaphraseProvider::Online(p) => p.paraphrase(req),
            ParaphraseProvider::OfflineTable(table) => table
                .get(&req.text, req.pivot)
                .map(|text| ParaphraseResult {
                    text: text.to_string(),
                    cached: false,
                })
                .ok_or(ParaphraseError::NotFound { pivot: req.pivot }),
            ParaphraseProvider::Unavailable => Err(ParaphraseError::ProviderUnavailable),
        }
    }

    pub fn is_available(&self) -> bool {
        !matches!(self, ParaphraseProvider::Unavailable)
    }
}

impl fmt::Debug for ParaphraseProvider {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParaphraseProvider::Online(_) => f.write_str("Online"),
            ParaphraseProvider::OfflineTable(t) => write!(f, "OfflineTable({} entries)", t.len()),
            ParaphraseProvider::Unavailable => f.write_str("Unavailable"),
        }
    }
}

/// `[paraphrase]` section of the provider configuration file.
#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
pub struct ProviderConfig {
    pub endpoint: Option<String>,
    pub api_key: Option<String>,
    pub cache_dir: Option<PathBuf>,
    pub table: Option<PathBuf>,
    pub max_attempts: Option<u32>,
    pub timeout_secs: Option<u64>,
}

#[derive(Deserialize)]
struct ConfigFile {
    #[serde(default)]
    paraphrase: ProviderConfig,
}

pub const ENV_ENDPOINT: &str = "CLAIMFORGE_MT_ENDPOINT";
pub const ENV_API_KEY: &str = "CLAIMFORGE_MT_KEY";
pub const ENV_CACHE_DIR: &str = "CLAIMFORGE_MT_CACHE";

impl ProviderConfig {
    pub fn from_toml(src: &str) -> Result<Self, ParaphraseError> {
        let file: ConfigFile = toml::from_str(src).map_err(|e| ParaphraseError::Config(e.to_string()))?;
        Ok(file.paraphrase)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ParaphraseError> {
        Self::from_toml(&fs::read_to_string(path)?)
    }

    /// Fill unset fields from environment variables.
    pub fn with_env(mut self) -> Self {
        let var = |name| std::env::var(name).ok().filter(|v: &String| !v.is_empty());
        self.endpoint = self.endpoint.or_else(|| var(ENV_ENDPOINT));
        self.api_key = self.api_key.or_else(|| var(ENV_API_KEY));
        self.cache_dir = self.cache_dir.or_else(|| var(ENV_CACHE_DIR).map(PathBuf::from));
        self
    }

    /// Table wins over endpoint; neither means `Unavailable`.
    pub fn build(&self) -> Result<ParaphraseProvider, ParaphraseError> {
        if let Some(table) = &self.table {
            return Ok(ParaphraseProvider::OfflineTable(ParaphraseTable::load(table)?));
        }
        let Some(endpoint) = &self.endpoint else {
            return Ok(ParaphraseProvider::Unavailable);
        };
        let cache_dir = self
            .cache_dir
            .clone()
            .unwrap_or_else(|| PathBuf::from(".claimforge-cache/paraphrase"));
        let translator = HttpTranslator::new(
            endpoint.clone(),
            self.api_key.clone(),
            Duration::from_secs(self.timeout_secs.unwrap_or(30)),
        );
        let provider = OnlineProvider::new(Box::new(translator), DiskCache::new(cache_dir)?)
            .with_retries(self.max_attempts.unwrap_or(3), Duration::from_millis(500));
        Ok(ParaphraseProvider::Online(provider))
    }
}
