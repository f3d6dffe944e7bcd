use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::endpoint::{ChatEndpoint, ChatMessage, ChatRequest, RequestTag, TransportError};
use super::templates::{parse_judge_reply, render_judge_prompt, render_prompt, split_response, PromptTemplate};
use super::{HarnessError, Result};
use crate::datamodel::{
    Catalog, ConditionKind, DatasetSplit, QuestionItem, QuestionScope, ResponseRecord, RoleSet, SteeringCondition,
};
use crate::scoring::{classify_answer, Classification, TernaryLabel};

/// Everything a questionnaire run asks about.
pub struct Questionnaire<'a> {
    pub catalog: &'a Catalog,
    pub roles: &'a RoleSet,
    /// Restricts the questions of each value when present.
    pub split: Option<&'a DatasetSplit>,
    pub scope: QuestionScope,
    pub template: &'a PromptTemplate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub max_retries: u32,
    pub max_concurrency: usize,
    /// First retry delay; doubles on every further attempt.
    pub backoff_ms: u64,
    pub temperature: f64,
    /// Also judge every thought, for thought/answer consistency.
    pub judge_thoughts: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { max_retries: 5, max_concurrency: 4, backoff_ms: 500, temperature: 0.0, judge_thoughts: false }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub catalog_sha256: String,
    pub split_seed: Option<u64>,
    pub template_ids: Vec<String>,
    pub conditions: Vec<String>,
    pub endpoint: String,
    pub judge_endpoint: String,
    pub started_at: String,
    pub finished_at: String,
    pub records: usize,
    /// Every HTTP attempt, judge calls and retries included.
    pub requests: u64,
    pub retries: u64,
    pub judge_escalations: u64,
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub records: Vec<ResponseRecord>,
    pub manifest: RunManifest,
}

/// SHA-256 of the catalog's canonical JSON, hex encoded.
pub fn catalog_hash(catalog: &Catalog) -> String {
    hex::encode(Sha256::digest(catalog.to_json().as_bytes()))
}

struct Job<'a> {
    condition: &'a SteeringCondition,
    question: &'a QuestionItem,
}

#[derive(Default)]
struct Counters {
    requests: AtomicU64,
    retries: AtomicU64,
    escalations: AtomicU64,
}

struct Runner<'a> {
    endpoint: &'a dyn ChatEndpoint,
    judge: &'a dyn ChatEndpoint,
    config: &'a RunConfig,
    counters: Counters,
    abort: AtomicBool,
}

impl Runner<'_> {
    fn call(&self, endpoint: &dyn ChatEndpoint, request: &ChatRequest) -> Result<String> {
        let mut attempt = 0u32;
        loop {
            if self.abort.load(Ordering::Relaxed) {
                return Err(HarnessError::Aborted);
            }
            self.counters.requests.fetch_add(1, Ordering::Relaxed);
            match endpoint.complete(request) {
                Ok(text) => return Ok(text),
                Err(TransportError::Retryable(msg)) => {
                    if attempt >= self.config.max_retries {
                        return Err(HarnessError::Endpoint(format!("gave up after {} attempts: {msg}", attempt + 1)));
                    }
                    self.counters.retries.fetch_add(1, Ordering::Relaxed);
                    let delay = self.config.backoff_ms.saturating_mul(1u64 << attempt.min(16));
                    std::thread::sleep(Duration::from_millis(delay));
                    attempt += 1;
                }
                Err(TransportError::Auth(msg)) => return Err(HarnessError::Auth(msg)),
                Err(TransportError::Fatal(msg)) => return Err(HarnessError::Endpoint(msg)),
            }
        }
    }

    fn judge(&self, text: &str) -> Result<TernaryLabel> {
        self.counters.escalations.fetch_add(1, Ordering::Relaxed);
        let request = ChatRequest {
            messages: vec![ChatMessage::user(render_judge_prompt(text))],
            temperature: self.config.temperature,
            tag: RequestTag::Judge { text: text.to_string() },
        };
        parse_judge_reply(&self.call(self.judge, &request)?)
    }

    fn run_job(&self, job: &Job<'_>, q: &Questionnaire<'_>) -> Result<ResponseRecord> {
        let prompt = render_prompt(q.template, job.condition, job.question, q.roles, q.catalog)?;
        let request = ChatRequest {
            messages: vec![ChatMessage::user(prompt)],
            temperature: self.config.temperature,
            tag: RequestTag::Question {
                condition: job.condition.clone(),
                question_id: job.question.id.clone(),
                value_id: job.question.value_id.clone(),
            },
        };
        let (thought, answer) = split_response(&self.call(self.endpoint, &request)?);
        let label = match classify_answer(&answer) {
            Classification::Label(l) => l,
            Classification::NeedsJudge => self.judge(&answer)?,
        };
        let thought_label =
            if self.config.judge_thoughts && !thought.is_empty() { Some(self.judge(&thought)?) } else { None };
        Ok(ResponseRecord {
            condition: job.condition.clone(),
            question_id: job.question.id.clone(),
            thought,
            answer,
            label: Some(label),
            thought_label,
        })
    }
}

fn questions_for<'a>(q: &Questionnaire<'a>, condition_key: &str) -> Result<Vec<&'a QuestionItem>> {
    let mut out = Vec::new();
    for value in q.catalog.values() {
        let ids = match q.split {
            Some(split) => split
                .question_filter(condition_key, &value.id, q.scope)
                .ok_or_else(|| HarnessError::InvalidConfig(format!("split has no questions for value {}", value.id)))?,
            None => value.question_ids.clone(),
        };
        for id in ids {
            out.push(
                q.catalog.question(&id).ok_or_else(|| HarnessError::InvalidConfig(format!("unknown question {id}")))?,
            );
        }
    }
    out.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(out)
}

/// Asks every question of every condition, labels the answers and returns the
/// records sorted by (condition key, question id).
///
/// Requests run on at most `max_concurrency` threads. Retryable failures are
/// retried with exponential backoff; answers outside the prefix rules go to
/// `judge` (the main endpoint when `None`). The first hard error stops the run.
pub fn run_questionnaire(
    endpoint: &dyn ChatEndpoint,
    judge: Option<&dyn ChatEndpoint>,
    questionnaire: &Questionnaire<'_>,
    conditions: &[SteeringCondition],
    config: &RunConfig,
) -> Result<RunOutput> {
    if config.max_concurrency == 0 {
        return Err(HarnessError::InvalidConfig("max_concurrency must be at least 1".into()));
    }
    if let Some(c) = conditions.iter().find(|c| matches!(c.kind, ConditionKind::Sae { .. })) {
        return Err(HarnessError::SaeCondition(c.key()));
    }
    let started_at = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
    let mut sorted: Vec<(String, &SteeringCondition)> = conditions.iter().map(|c| (c.key(), c)).collect();
    sorted.sort_by(|a, b| a.0.cmp(&b.0));
    sorted.dedup_by(|a, b| a.0 == b.0);

    let mut jobs = Vec::new();
    for (key, condition) in &sorted {
        if questionnaire.roles.get(condition.role_id()).is_none() {
            return Err(HarnessError::InvalidConfig(format!("condition {key} names an unknown role")));
        }
        for question in questions_for(questionnaire, key)? {
            jobs.push(Job { condition, question });
        }
    }

    let runner = Runner {
        endpoint,
        judge: judge.unwrap_or(endpoint),
        config,
        counters: Counters::default(),
        abort: AtomicBool::new(false),
    };
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<ResponseRecord>>> = Mutex::new(vec![None; jobs.len()]);
    let first_error: Mutex<Option<HarnessError>> = Mutex::new(None);
    let workers = config.max_concurrency.min(jobs.len()).max(1);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= jobs.len() || runner.abort.load(Ordering::Relaxed) {
                    break;
                }
                match runner.run_job(&jobs[i], questionnaire) {
                    Ok(record) => results.lock().expect("results lock")[i] = Some(record),
                    Err(e) => {
                        runner.abort.store(true, Ordering::Relaxed);
                        let mut slot = first_error.lock().expect("error lock");
                        if slot.is_none() || matches!(*slot, Some(HarnessError::Aborted)) {
                            *slot = Some(e);
                        }
                        break;
                    }
                }
            });
        }
    });
    if let Some(e) = first_error.into_inner().expect("error lock") {
        return Err(e);
    }
    let records: Vec<ResponseRecord> =
        results.into_inner().expect("results lock").into_iter().map(|r| r.expect("every job finished")).collect();

    let mut template_ids: Vec<String> = sorted.iter().map(|(_, c)| c.template_id.clone()).collect();
    template_ids.sort();
    template_ids.dedup();
    let manifest = RunManifest {
        catalog_sha256: catalog_hash(questionnaire.catalog),
        split_seed: questionnaire.split.map(|s| s.seed),
        template_ids,
        conditions: sorted.iter().map(|(k, _)| k.clone()).collect(),
        endpoint: endpoint.identity(),
        judge_endpoint: runner.judge.identity(),
        started_at,
        finished_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        records: records.len(),
        requests: runner.counters.requests.load(Ordering::Relaxed),
        retries: runner.counters.retries.load(Ordering::Relaxed),
        judge_escalations: runner.counters.escalations.load(Ordering::Relaxed),
    };
    Ok(RunOutput { records, manifest })
}
