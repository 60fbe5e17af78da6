//! Append-only JSON-lines store with in-memory secondary indexes.
//!
//! Layout under the store directory:
//! `articles.jsonl`, `labels.jsonl`, `jobs.jsonl`, `runs.jsonl`, `models/`
//! and the advisory `store.lock`. Every record is one line written in a
//! single call; a trailing line without its newline is an interrupted write
//! and is ignored on read and truncated by the next writer.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{PipelineRun, ServiceError};
use crate::ingest::Article;
use crate::text::tokenize;
use crate::translator::TranslationJob;

const ARTICLES: &str = "articles.jsonl";
const LABELS: &str = "labels.jsonl";
const JOBS: &str = "jobs.jsonl";
const RUNS: &str = "runs.jsonl";
const LOCK: &str = "store.lock";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelOrigin {
    Predicted,
    Operator,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelRecord {
    pub article_id: String,
    pub class_label: String,
    pub origin: LabelOrigin,
    pub at: DateTime<Utc>,
}

/// Conjunctive article query with paging.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ArticleFilter {
    pub class_label: Option<String>,
    pub topic_min_score: Option<(String, f64)>,
    pub source_id: Option<String>,
    pub text_query: Option<String>,
    pub limit: usize,
    pub offset: usize,
}

pub const MAX_PAGE: usize = 1000;

impl ArticleFilter {
    pub fn page(limit: usize, offset: usize) -> Self {
        Self {
            limit,
            offset,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<Vec<String>, ServiceError> {
        if self.limit == 0 || self.limit > MAX_PAGE {
            return Err(ServiceError::MalformedFilter(format!("limit must be in 1..={MAX_PAGE}")));
        }
        if let Some((topic, score)) = &self.topic_min_score {
            if topic.is_empty() || !(0.0..=1.0).contains(score) {
                return Err(ServiceError::MalformedFilter("topic score threshold must be in [0, 1]".into()));
            }
        }
        match &self.text_query {
            Some(q) => {
                let tokens = tokenize(q);
                if tokens.is_empty() {
                    return Err(ServiceError::MalformedFilter(format!("query `{q}` has no searchable tokens")));
                }
                Ok(tokens)
            }
            None => Ok(Vec::new()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Page<T> {
    pub items: Vec<T>,
    pub total: usize,
}

#[derive(Debug)]
pub struct ArticleStore {
    dir: PathBuf,
    articles: BTreeMap<String, Article>,
    tokens: HashMap<String, HashSet<String>>,
    predicted: HashMap<String, String>,
    operator: HashMap<String, String>,
    by_class: BTreeMap<String, BTreeSet<String>>,
    by_source: BTreeMap<String, BTreeSet<String>>,
    by_time: BTreeSet<(Reverse<DateTime<Utc>>, String)>,
    hashes: HashSet<u64>,
    jobs: BTreeMap<String, TranslationJob>,
    runs: Vec<PipelineRun>,
    offsets: HashMap<&'static str, u64>,
}

impl ArticleStore {
    pub fn open(dir: impl AsRef<Path>) -> Result<Self, ServiceError> {
        let dir = dir.as_ref().to_path_buf();
        std::fs::create_dir_all(dir.join("models"))?;
        let mut store = Self {
            dir,
            articles: BTreeMap::new(),
            tokens: HashMap::new(),
            predicted: HashMap::new(),
            operator: HashMap::new(),
            by_class: BTreeMap::new(),
            by_source: BTreeMap::new(),
            by_time: BTreeSet::new(),
            hashes: HashSet::new(),
            jobs: BTreeMap::new(),
            runs: Vec::new(),
            offsets: HashMap::new(),
        };
        store.refresh()?;
        Ok(store)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Reads records appended since the last refresh (possibly by another process).
    pub fn refresh(&mut self) -> Result<(), ServiceError> {
        for a in self.read_new::<Article>(ARTICLES)? {
            self.index_article(a);
        }
        for l in self.read_new::<LabelRecord>(LABELS)? {
            self.apply_label(l);
        }
        for j in self.read_new::<TranslationJob>(JOBS)? {
            self.jobs.insert(j.id.clone(), j);
        }
        let runs = self.read_new::<PipelineRun>(RUNS)?;
        self.runs.extend(runs);
        Ok(())
    }

    fn read_new<T: DeserializeOwned>(&mut self, name: &'static str) -> Result<Vec<T>, ServiceError> {
        let path = self.dir.join(name);
        let mut file = match File::open(&path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(e.into()),
        };
        let start = self.offsets.get(name).copied().unwrap_or(0);
        file.seek(SeekFrom::Start(start))?;
        let mut buf = Vec::new();
        file.read_to_end(&mut buf)?;
        let complete = buf.iter().rposition(|b| *b == b'\n').map_or(0, |p| p + 1);
        let mut out = Vec::new();
        for line in buf[..complete].split(|b| *b == b'\n').filter(|l| !l.is_empty()) {
            match serde_json::from_slice(line) {
                Ok(rec) => out.push(rec),
                Err(e) => tracing::warn!(file = name, error = %e, "skipping corrupt record"),
            }
        }
        self.offsets.insert(name, start + complete as u64);
        Ok(out)
    }

    fn index_article(&mut self, a: Article) {
        self.hashes.insert(a.dedup_hash);
        self.by_source.entry(a.source_id.clone()).or_default().insert(a.id.clone());
        self.by_time.insert((Reverse(a.fetched_at), a.id.clone()));
        let tokens = tokenize(&format!("{}\n{}", a.title, a.body)).into_iter().collect();
        self.tokens.insert(a.id.clone(), tokens);
        let id = a.id.clone();
        self.articles.insert(id.clone(), a);
        self.relabel(&id);
    }

    fn apply_label(&mut self, l: LabelRecord) {
        let map = match l.origin {
            LabelOrigin::Predicted => &mut self.predicted,
            LabelOrigin::Operator => &mut self.operator,
        };
        map.insert(l.article_id.clone(), l.class_label);
        self.relabel(&l.article_id);
    }

    /// Operator annotations take precedence over predictions.
    fn relabel(&mut self, id: &str) {
        let Some(article) = self.articles.get_mut(id) else {
            return;
        };
        if let Some(old) = article.class_label.take() {
            if let Some(set) = self.by_class.get_mut(&old) {
                set.remove(id);
            }
        }
        let label = self.operator.get(id).or_else(|| self.predicted.get(id)).cloned();
        if let Some(l) = &label {
            self.by_class.entry(l.clone()).or_default().insert(id.to_owned());
        }
        article.class_label = label;
    }

    /// Runs `f` while holding the advisory writer lock, after catching up
    /// with other writers and truncating any interrupted trailing record.
    fn with_writer<R>(&mut self, f: impl FnOnce(&mut Self) -> Result<R, ServiceError>) -> Result<R, ServiceError> {
        let lock = OpenOptions::new().create(true).truncate(false).write(true).open(self.dir.join(LOCK))?;
        lock.lock()?;
        let result = self.refresh().and_then(|_| {
            for name in [ARTICLES, LABELS, JOBS, RUNS] {
                let path = self.dir.join(name);
                if let Ok(meta) = std::fs::metadata(&path) {
                    let good = self.offsets.get(name).copied().unwrap_or(0);
                    if meta.len() > good {
                        tracing::warn!(file = name, "truncating interrupted record");
                        OpenOptions::new().write(true).open(&path)?.set_len(good)?;
                    }
                }
            }
            f(self)
        });
        lock.unlock()?;
        result
    }

    fn append<T: Serialize>(&mut self, name: &'static str, records: &[T]) -> Result<(), ServiceError> {
        if records.is_empty() {
            return Ok(());
        }
        let mut file = OpenOptions::new().create(true).append(true).open(self.dir.join(name))?;
        for rec in records {
            let mut line = serde_json::to_vec(rec).map_err(|e| ServiceError::Store(e.to_string()))?;
            line.push(b'\n');
            file.write_all(&line)?;
            *self.offsets.entry(name).or_insert(0) += line.len() as u64;
        }
        file.sync_data()?;
        Ok(())
    }

    /// Appends articles whose fingerprint is not yet stored. Returns the
    /// inserted articles and the number of duplicates dropped.
    pub fn insert_articles(&mut self, candidates: Vec<Article>) -> Result<(Vec<Article>, usize), ServiceError> {
        self.with_writer(|store| {
            let mut fresh = Vec::new();
            let mut seen = HashSet::new();
            let mut dupes = 0;
            for a in candidates {
                if store.hashes.contains(&a.dedup_hash) || store.articles.contains_key(&a.id) || !seen.insert(a.dedup_hash) {
                    dupes += 1;
                } else {
                    fresh.push(a);
                }
            }
            store.append(ARTICLES, &fresh)?;
            for a in &fresh {
                store.index_article(a.clone());
            }
            Ok((fresh, dupes))
        })
    }

    pub fn add_labels(&mut self, records: Vec<LabelRecord>) -> Result<(), ServiceError> {
        self.with_writer(|store| {
            for r in &records {
                if !store.articles.contains_key(&r.article_id) {
                    return Err(ServiceError::UnknownArticle(r.article_id.clone()));
                }
            }
            store.append(LABELS, &records)?;
            for r in records {
                store.apply_label(r);
            }
            Ok(())
        })
    }

    pub fn put_job(&mut self, job: TranslationJob) -> Result<(), ServiceError> {
        self.with_writer(|store| {
            store.append(JOBS, std::slice::from_ref(&job))?;
            store.jobs.insert(job.id.clone(), job);
            Ok(())
        })
    }

    pub fn add_run(&mut self, run: PipelineRun) -> Result<(), ServiceError> {
        self.with_writer(|store| {
            store.append(RUNS, std::slice::from_ref(&run))?;
            store.runs.push(run);
            Ok(())
        })
    }

    pub fn contains_hash(&self, hash: u64) -> bool {
        self.hashes.contains(&hash)
    }

    pub fn get(&self, id: &str) -> Option<&Article> {
        self.articles.get(id)
    }

    pub fn len(&self) -> usize {
        self.articles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.articles.is_empty()
    }

    /// All articles ordered by id.
    pub fn articles(&self) -> impl Iterator<Item = &Article> {
        self.articles.values()
    }

    pub fn predicted_label(&self, id: &str) -> Option<&str> {
        self.predicted.get(id).map(String::as_str)
    }

    pub fn operator_labels(&self) -> &HashMap<String, String> {
        &self.operator
    }

    pub fn job(&self, id: &str) -> Option<&TranslationJob> {
        self.jobs.get(id)
    }

    pub fn jobs_for(&self, article_id: &str) -> impl Iterator<Item = &TranslationJob> {
        let article_id = article_id.to_owned();
        self.jobs.values().filter(move |j| j.article_id.as_deref() == Some(article_id.as_str()))
    }

    pub fn runs(&self) -> &[PipelineRun] {
        &self.runs
    }

    pub fn latest_run(&self) -> Option<&PipelineRun> {
        self.runs.last()
    }

    fn matches(&self, a: &Article, f: &ArticleFilter, query: &[String]) -> bool {
        if f.class_label.as_ref().is_some_and(|c| a.class_label.as_ref() != Some(c)) {
            return false;
        }
        if f.source_id.as_ref().is_some_and(|s| &a.source_id != s) {
            return false;
        }
        if let Some((topic, min)) = &f.topic_min_score {
            if a.topic_scores.get(topic).copied().unwrap_or(0.0) < *min {
                return false;
            }
        }
        if !query.is_empty() {
            let toks = &self.tokens[&a.id];
            if !query.iter().all(|q| toks.contains(q)) {
                return false;
            }
        }
        true
    }

    /// Index-assisted query, newest first (ties by id).
    pub fn query(&self, filter: &ArticleFilter) -> Result<Page<Article>, ServiceError> {
        let query = filter.validate()?;
        let mut candidate_sets: Vec<&BTreeSet<String>> = Vec::new();
        let empty = BTreeSet::new();
        if let Some(c) = &filter.class_label {
            candidate_sets.push(self.by_class.get(c).unwrap_or(&empty));
        }
        if let Some(s) = &filter.source_id {
            candidate_sets.push(self.by_source.get(s).unwrap_or(&empty));
        }
        candidate_sets.sort_by_key(|s| s.len());
        let matched: Vec<&Article> = match candidate_sets.first() {
            Some(smallest) => {
                let mut hits: Vec<&Article> = smallest
                    .iter()
                    .filter_map(|id| self.articles.get(id))
                    .filter(|a| self.matches(a, filter, &query))
                    .collect();
                hits.sort_by(|a, b| b.fetched_at.cmp(&a.fetched_at).then_with(|| a.id.cmp(&b.id)));
                hits
            }
            None => self
                .by_time
                .iter()
                .map(|(_, id)| &self.articles[id])
                .filter(|a| self.matches(a, filter, &query))
                .collect(),
        };
        Ok(Page {
            total: matched.len(),
            items: matched.into_iter().skip(filter.offset).take(filter.limit).cloned().collect(),
        })
    }

    /// The same query answered by a full scan without indexes.
    pub fn query_scan(&self, filter: &ArticleFilter) -> Result<Page<Article>, ServiceError> {
        let query = filter.validate()?;
        let mut hits: Vec<&Article> = self.articles.values().filter(|a| self.matches(a, filter, &query)).collect();
        hits.sort_by(|a, b| b.fetched_at.cmp(&a.fetched_at).then_with(|| a.id.cmp(&b.id)));
        Ok(Page {
            total: hits.len(),
            items: hits.into_iter().skip(filter.offset).take(filter.limit).cloned().collect(),
        })
    }
}
