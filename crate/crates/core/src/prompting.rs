//! Few-shot prompting against a generic chat-completion endpoint.
//!
//! The prompt is four stacked sections — Role, Definition, Examples, Task —
//! with the classified text embedded in the Task section and the answer
//! requested as YES/NO inside a `<label>...</label>` tag. Exemplars are
//! sampled class-balanced from a training split (k/2 per class). Batches run
//! either against a live HTTP endpoint or against a [`ReplayStore`] of
//! recorded responses, which makes the whole pathway deterministic and
//! testable offline.
//!
//! Responses are text, not probabilities, so parsed labels become one-hot
//! confidence vectors; a response that cannot be parsed is excluded from the
//! predictions and reported as a failure record instead of being defaulted
//! to a class.

use std::collections::BTreeMap;
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::time::Duration;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::{LabelSchema, LabeledExample};
use crate::ensemble::{EnsembleError, PredictionSet};

/// Role section text used when none is configured.
pub const DEFAULT_ROLE_TEXT: &str = "You are a helpful AI assistant. You are given the task of \
                                     detecting homophobia and transphobia in a given text.";

/// Definition section text used when none is configured.
pub const DEFAULT_DEFINITION_TEXT: &str = "Homophobia and transphobia detection is the process \
                                           of identifying expressions of hatred or discrimination \
                                           against LGBTQ+ individuals in communication.";

const POSITIVE_EXAMPLE_LEAD: &str = "An example of Homophobic/Transphobic comment: ";
const NEGATIVE_EXAMPLE_LEAD: &str = "An example of Non-Homophobic/Transphobic comment: ";

#[derive(Debug, Error)]
pub enum PromptError {
    #[error("shot count k must be even and >= 2, got {k}")]
    InvalidShotCount { k: usize },
    #[error("positive and negative labels are both {label:?}")]
    LabelsNotDistinct { label: String },
    #[error("label {label:?} is not in the schema")]
    LabelNotInSchema { label: String },
    #[error("prompting supports binary schemas only, schema has {num_labels} labels")]
    NotBinarySchema { num_labels: usize },
    #[error("output tag {tag:?} must be non-empty and free of angle brackets and backslashes")]
    InvalidTag { tag: String },
    #[error("query text is empty")]
    EmptyQuery,
    #[error("item {id:?} has empty text")]
    EmptyItemText { id: String },
    #[error("shot list is empty")]
    EmptyShots,
    #[error("shots are unbalanced: {positives} positive vs {negatives} negative")]
    UnbalancedShots { positives: usize, negatives: usize },
    #[error("shot label {label:?} is neither the positive nor the negative class")]
    InvalidShotLabel { label: String },
    #[error("class {label:?} has {available} training examples, {needed} needed")]
    InsufficientExamples {
        label: String,
        available: usize,
        needed: usize,
    },
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: malformed replay record: {message}")]
    MalformedStore {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("replay store has no response for prompt {prompt_sha256}")]
    ReplayMiss { prompt_sha256: String },
    #[error("credential environment variable {var} is not set")]
    CredentialMissing { var: String },
    #[error("endpoint request for item {id:?} failed after retries: {message}")]
    EndpointFailure { id: String, message: String },
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
}

/// Configuration of the few-shot prompting pathway (binary schemas only).
#[derive(Debug, Clone, PartialEq)]
pub struct PromptConfig {
    role_text: String,
    definition_text: String,
    k: usize,
    positive_label: String,
    negative_label: String,
    output_tag: String,
    seed: u64,
    model_id: String,
}

impl PromptConfig {
    /// Builds a config with the default Role/Definition texts and output tag
    /// `label`. `k` must be even and at least 2 so shots can be balanced.
    pub fn new(
        schema: &LabelSchema,
        positive_label: &str,
        negative_label: &str,
        k: usize,
        seed: u64,
    ) -> Result<Self, PromptError> {
        if schema.num_labels() != 2 {
            return Err(PromptError::NotBinarySchema {
                num_labels: schema.num_labels(),
            });
        }
        if k < 2 || k % 2 != 0 {
            return Err(PromptError::InvalidShotCount { k });
        }
        let canon = |raw: &str| {
            schema
                .canonicalize(raw)
                .map(str::to_string)
                .ok_or_else(|| PromptError::LabelNotInSchema {
                    label: raw.to_string(),
                })
        };
        let positive_label = canon(positive_label)?;
        let negative_label = canon(negative_label)?;
        if positive_label == negative_label {
            return Err(PromptError::LabelsNotDistinct {
                label: positive_label,
            });
        }
        Ok(Self {
            role_text: DEFAULT_ROLE_TEXT.to_string(),
            definition_text: DEFAULT_DEFINITION_TEXT.to_string(),
            k,
            positive_label,
            negative_label,
            output_tag: "label".to_string(),
            seed,
            model_id: "prompted".to_string(),
        })
    }

    pub fn with_role_text<S: Into<String>>(mut self, text: S) -> Self {
        self.role_text = text.into();
        self
    }

    pub fn with_definition_text<S: Into<String>>(mut self, text: S) -> Self {
        self.definition_text = text.into();
        self
    }

    pub fn with_output_tag<S: Into<String>>(mut self, tag: S) -> Result<Self, PromptError> {
        let tag = tag.into();
        validate_tag(&tag)?;
        self.output_tag = tag;
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_model_id<S: Into<String>>(mut self, model_id: S) -> Self {
        self.model_id = model_id.into();
        self
    }

    pub fn role_text(&self) -> &str {
        &self.role_text
    }

    pub fn definition_text(&self) -> &str {
        &self.definition_text
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn positive_label(&self) -> &str {
        &self.positive_label
    }

    pub fn negative_label(&self) -> &str {
        &self.negative_label
    }

    pub fn output_tag(&self) -> &str {
        &self.output_tag
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn model_id(&self) -> &str {
        &self.model_id
    }
}

fn validate_tag(tag: &str) -> Result<(), PromptError> {
    if tag.is_empty() || tag.contains(['<', '>', '\\']) || tag.chars().any(char::is_whitespace) {
        return Err(PromptError::InvalidTag {
            tag: tag.to_string(),
        });
    }
    Ok(())
}

/// One few-shot exemplar: a training text plus its canonical class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shot {
    pub text: String,
    pub label: String,
}

/// Selects `k` exemplars, `k/2` per class, by seeded uniform sampling
/// without replacement. Output is deterministic for a fixed seed and
/// dataset order and alternates positive/negative.
pub fn select_shots(
    train: &[LabeledExample],
    config: &PromptConfig,
) -> Result<Vec<Shot>, PromptError> {
    let per_class = config.k / 2;
    let positives: Vec<&LabeledExample> = train
        .iter()
        .filter(|ex| ex.label == config.positive_label)
        .collect();
    let negatives: Vec<&LabeledExample> = train
        .iter()
        .filter(|ex| ex.label == config.negative_label)
        .collect();
    for (pool, label) in [
        (&positives, &config.positive_label),
        (&negatives, &config.negative_label),
    ] {
        if pool.len() < per_class {
            return Err(PromptError::InsufficientExamples {
                label: label.clone(),
                available: pool.len(),
                needed: per_class,
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut pick = |pool: &[&LabeledExample]| -> Vec<Shot> {
        let mut indices = rand::seq::index::sample(&mut rng, pool.len(), per_class).into_vec();
        indices.sort_unstable();
        indices
            .into_iter()
            .map(|i| Shot {
                text: pool[i].text.clone(),
                label: pool[i].label.clone(),
            })
            .collect()
    };
    let picked_pos = pick(&positives);
    let picked_neg = pick(&negatives);

    Ok(picked_pos
        .into_iter()
        .zip(picked_neg)
        .flat_map(|(p, n)| [p, n])
        .collect())
}

/// Which of the four prompt blocks a byte range covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SectionKind {
    Role,
    Definition,
    Examples,
    Task,
}

/// A rendered prompt with byte offsets for its four sections.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptText {
    rendered: String,
    sections: Vec<(SectionKind, Range<usize>)>,
}

impl PromptText {
    pub fn rendered(&self) -> &str {
        &self.rendered
    }

    pub fn sections(&self) -> &[(SectionKind, Range<usize>)] {
        &self.sections
    }

    pub fn section(&self, kind: SectionKind) -> &str {
        let (_, range) = self
            .sections
            .iter()
            .find(|(k, _)| *k == kind)
            .expect("all four sections are always present");
        &self.rendered[range.clone()]
    }

    /// Role + Definition, the system message of the chat request.
    pub fn system_message(&self) -> String {
        format!(
            "{}\n\n{}",
            self.section(SectionKind::Role),
            self.section(SectionKind::Definition)
        )
    }

    /// Examples + Task, the user message of the chat request.
    pub fn user_message(&self) -> String {
        format!(
            "{}\n\n{}",
            self.section(SectionKind::Examples),
            self.section(SectionKind::Task)
        )
    }
}

/// Renders the four-section prompt for one query text. Byte-stable for
/// fixed inputs.
pub fn build_prompt(
    config: &PromptConfig,
    shots: &[Shot],
    query_text: &str,
) -> Result<PromptText, PromptError> {
    if query_text.trim().is_empty() {
        return Err(PromptError::EmptyQuery);
    }
    validate_tag(&config.output_tag)?;
    if shots.is_empty() {
        return Err(PromptError::EmptyShots);
    }
    let positives = shots
        .iter()
        .filter(|s| s.label == config.positive_label)
        .count();
    let negatives = shots
        .iter()
        .filter(|s| s.label == config.negative_label)
        .count();
    if positives + negatives != shots.len() {
        let bad = shots
            .iter()
            .find(|s| s.label != config.positive_label && s.label != config.negative_label)
            .expect("count mismatch implies an out-of-class shot");
        return Err(PromptError::InvalidShotLabel {
            label: bad.label.clone(),
        });
    }
    if positives != negatives {
        return Err(PromptError::UnbalancedShots {
            positives,
            negatives,
        });
    }

    // Pair positives with negatives in order, repeating the two-sentence
    // pattern once per pair.
    let pos_texts = shots.iter().filter(|s| s.label == config.positive_label);
    let neg_texts = shots.iter().filter(|s| s.label == config.negative_label);
    let pairs: Vec<String> = pos_texts
        .zip(neg_texts)
        .map(|(p, n)| {
            format!(
                "{POSITIVE_EXAMPLE_LEAD}{}. {NEGATIVE_EXAMPLE_LEAD}{}.",
                p.text, n.text
            )
        })
        .collect();

    let blocks = [
        (SectionKind::Role, format!("Role: {}", config.role_text)),
        (
            SectionKind::Definition,
            format!("Definition: {}", config.definition_text),
        ),
        (
            SectionKind::Examples,
            format!("Examples: {}", pairs.join(" ")),
        ),
        (
            SectionKind::Task,
            format!(
                "Task: Generate the label [YES/NO] for this \"{}\" in the following format: \
                 <{tag}> Your_Predicted_Label </{tag}>. Thanks.",
                query_text,
                tag = config.output_tag
            ),
        ),
    ];

    let mut rendered = String::new();
    let mut sections = Vec::with_capacity(4);
    for (i, (kind, block)) in blocks.iter().enumerate() {
        if i > 0 {
            rendered.push_str("\n\n");
        }
        let start = rendered.len();
        rendered.push_str(block);
        sections.push((*kind, start..rendered.len()));
    }
    Ok(PromptText { rendered, sections })
}

/// Why a response could not be turned into a label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseFailureReason {
    /// No `<tag>...</tag>` span found.
    MissingTag,
    /// A tag was found but its content is neither yes nor no.
    UnrecognizedContent { content: String },
}

impl ParseFailureReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            ParseFailureReason::MissingTag => "missing-tag",
            ParseFailureReason::UnrecognizedContent { .. } => "unrecognized-content",
        }
    }
}

/// A response that did not parse; kept as data, never thrown.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseFailure {
    pub reason: ParseFailureReason,
    pub raw: String,
}

fn tag_regex(tag: &str) -> regex::Regex {
    let escaped = regex::escape(tag);
    // the figure-style closer `<\label>` is accepted alongside `</label>`
    regex::RegexBuilder::new(&format!(r"<{escaped}>(.*?)<[/\\]{escaped}>"))
        .case_insensitive(true)
        .dot_matches_new_line(true)
        .build()
        .expect("tag is validated, regex is well-formed")
}

/// Extracts the first tagged span, trims and case-folds it, and maps
/// yes/no onto the configured positive/negative label.
pub fn parse_response(raw: &str, config: &PromptConfig) -> Result<String, ParseFailure> {
    let regex = tag_regex(&config.output_tag);
    let Some(captures) = regex.captures(raw) else {
        return Err(ParseFailure {
            reason: ParseFailureReason::MissingTag,
            raw: raw.to_string(),
        });
    };
    let content = captures[1].trim().to_lowercase();
    match content.as_str() {
        "yes" => Ok(config.positive_label.clone()),
        "no" => Ok(config.negative_label.clone()),
        _ => Err(ParseFailure {
            reason: ParseFailureReason::UnrecognizedContent { content },
            raw: raw.to_string(),
        }),
    }
}

/// Hex SHA-256 of a rendered prompt; the replay store key.
pub fn prompt_sha256(prompt: &str) -> String {
    hex::encode(Sha256::digest(prompt.as_bytes()))
}

/// Recorded prompt-hash -> raw-response mapping for deterministic offline
/// runs. A lookup miss is an explicit error, never a live call.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReplayStore {
    entries: BTreeMap<String, String>,
}

#[derive(Serialize, Deserialize)]
struct ReplayRecord {
    prompt_sha256: String,
    response: String,
}

impl ReplayStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Loads a store from JSON Lines of `{prompt_sha256, response}`.
    pub fn from_path(path: &Path) -> Result<Self, PromptError> {
        let text = std::fs::read_to_string(path).map_err(|source| PromptError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut entries = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let record: ReplayRecord =
                serde_json::from_str(line).map_err(|e| PromptError::MalformedStore {
                    path: path.to_path_buf(),
                    line: idx + 1,
                    message: e.to_string(),
                })?;
            entries.insert(record.prompt_sha256, record.response);
        }
        Ok(Self { entries })
    }

    pub fn save(&self, path: &Path) -> Result<(), PromptError> {
        let mut out = String::new();
        for (prompt_sha256, response) in &self.entries {
            let record = ReplayRecord {
                prompt_sha256: prompt_sha256.clone(),
                response: response.clone(),
            };
            out.push_str(&serde_json::to_string(&record).expect("string record"));
            out.push('\n');
        }
        std::fs::write(path, out).map_err(|source| PromptError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Records a response under the hash of `prompt`.
    pub fn record(&mut self, prompt: &str, response: String) {
        self.entries.insert(prompt_sha256(prompt), response);
    }

    pub fn lookup(&self, prompt: &str) -> Option<&str> {
        self.lookup_hash(&prompt_sha256(prompt))
    }

    pub fn lookup_hash(&self, hash: &str) -> Option<&str> {
        self.entries.get(hash).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Connection settings for a generic chat-completion endpoint. The request
/// is a POST with a chat-style message list; the response body is the plain
/// completion text. Decoding parameters are pass-through fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointDescriptor {
    pub base_url: String,
    /// Name of the environment variable holding the bearer credential.
    pub credential_env: String,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
    #[serde(default = "default_retries")]
    pub retries: u32,
    #[serde(default = "default_backoff_base_secs")]
    pub backoff_base_secs: f64,
    #[serde(default)]
    pub model: Option<String>,
    #[serde(default)]
    pub temperature: Option<f64>,
    #[serde(default)]
    pub top_p: Option<f64>,
    #[serde(default)]
    pub max_tokens: Option<u64>,
}

fn default_timeout_secs() -> u64 {
    30
}

fn default_retries() -> u32 {
    3
}

fn default_backoff_base_secs() -> f64 {
    2.0
}

impl EndpointDescriptor {
    pub fn new<S: Into<String>, E: Into<String>>(base_url: S, credential_env: E) -> Self {
        Self {
            base_url: base_url.into(),
            credential_env: credential_env.into(),
            timeout_secs: default_timeout_secs(),
            retries: default_retries(),
            backoff_base_secs: default_backoff_base_secs(),
            model: None,
            temperature: None,
            top_p: None,
            max_tokens: None,
        }
    }
}

/// Where [`run_batch`] sends prompts: a live endpoint or a replay store.
#[derive(Debug, Clone)]
pub enum Backend {
    Replay(ReplayStore),
    Http(EndpointDescriptor),
}

/// Batch execution knobs.
#[derive(Debug, Clone)]
pub struct BatchOptions {
    /// Turn replay misses and exhausted-retry endpoint errors into failure
    /// records instead of aborting the whole batch.
    pub allow_partial: bool,
    /// In-flight request cap for the live backend.
    pub max_in_flight: usize,
}

impl Default for BatchOptions {
    fn default() -> Self {
        Self {
            allow_partial: false,
            max_in_flight: 4,
        }
    }
}

/// One item that produced no usable prediction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchFailure {
    pub id: String,
    pub reason: String,
    pub raw_excerpt: String,
}

/// Result of a prompting batch: one-hot predictions for every parsed item
/// plus failure records for the rest.
#[derive(Debug)]
pub struct BatchOutcome {
    pub predictions: PredictionSet,
    pub failures: Vec<BatchFailure>,
}

/// Failure-list CSV: `id,reason,raw_response_excerpt`.
pub fn failures_csv(failures: &[BatchFailure]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["id", "reason", "raw_response_excerpt"])
        .expect("in-memory write");
    for failure in failures {
        writer
            .write_record([&failure.id, &failure.reason, &failure.raw_excerpt])
            .expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory write")).expect("utf8")
}

fn excerpt(raw: &str) -> String {
    raw.chars()
        .take(80)
        .map(|c| if c == '\n' || c == '\r' { ' ' } else { c })
        .collect()
}

/// Runs the prompt over all items and assembles a one-hot [`PredictionSet`]
/// over the binary schema, with unparsable responses reported separately.
///
/// Responses are joined and keyed by example id, so output is deterministic
/// regardless of request scheduling.
pub fn run_batch(
    backend: &Backend,
    config: &PromptConfig,
    shots: &[Shot],
    items: &[(String, String)],
    schema: &LabelSchema,
    options: &BatchOptions,
) -> Result<BatchOutcome, PromptError> {
    let mut prompts = Vec::with_capacity(items.len());
    for (id, text) in items {
        if text.trim().is_empty() {
            return Err(PromptError::EmptyItemText { id: id.clone() });
        }
        prompts.push(build_prompt(config, shots, text)?);
    }

    let responses: Vec<Result<String, PromptError>> = match backend {
        Backend::Replay(store) => prompts
            .iter()
            .map(|prompt| {
                let hash = prompt_sha256(prompt.rendered());
                store
                    .lookup_hash(&hash)
                    .map(str::to_string)
                    .ok_or(PromptError::ReplayMiss {
                        prompt_sha256: hash,
                    })
            })
            .collect(),
        Backend::Http(endpoint) => fetch_live(endpoint, &prompts, items, options)?,
    };

    let positive_idx = schema
        .index_of(&config.positive_label)
        .ok_or_else(|| PromptError::LabelNotInSchema {
            label: config.positive_label.clone(),
        })?;
    let negative_idx = schema
        .index_of(&config.negative_label)
        .ok_or_else(|| PromptError::LabelNotInSchema {
            label: config.negative_label.clone(),
        })?;

    let mut predictions = PredictionSet::new(config.model_id(), schema.clone(), true);
    let mut failures = Vec::new();
    for ((id, _), response) in items.iter().zip(responses) {
        let raw = match response {
            Ok(raw) => raw,
            Err(error) => {
                if options.allow_partial {
                    failures.push(BatchFailure {
                        id: id.clone(),
                        reason: match &error {
                            PromptError::ReplayMiss { prompt_sha256 } => {
                                format!("replay-miss:{prompt_sha256}")
                            }
                            other => other.to_string(),
                        },
                        raw_excerpt: String::new(),
                    });
                    continue;
                }
                return Err(error);
            }
        };
        match parse_response(&raw, config) {
            Ok(label) => {
                let mut vector = vec![0.0; 2];
                let idx = if label == config.positive_label {
                    positive_idx
                } else {
                    negative_idx
                };
                vector[idx] = 1.0;
                predictions.insert(id.clone(), vector)?;
            }
            Err(failure) => failures.push(BatchFailure {
                id: id.clone(),
                reason: failure.reason.as_str().to_string(),
                raw_excerpt: excerpt(&failure.raw),
            }),
        }
    }
    Ok(BatchOutcome {
        predictions,
        failures,
    })
}

fn fetch_live(
    endpoint: &EndpointDescriptor,
    prompts: &[PromptText],
    items: &[(String, String)],
    options: &BatchOptions,
) -> Result<Vec<Result<String, PromptError>>, PromptError> {
    let credential =
        std::env::var(&endpoint.credential_env).map_err(|_| PromptError::CredentialMissing {
            var: endpoint.credential_env.clone(),
        })?;
    let client = reqwest::blocking::Client::builder()
        .timeout(Duration::from_secs(endpoint.timeout_secs))
        .build()
        .map_err(|e| PromptError::EndpointFailure {
            id: String::new(),
            message: e.to_string(),
        })?;

    let workers = options.max_in_flight.max(1).min(prompts.len().max(1));
    let next = AtomicUsize::new(0);
    let (sender, receiver) = mpsc::channel::<(usize, Result<String, String>)>();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            let sender = sender.clone();
            let client = &client;
            let credential = credential.as_str();
            let next = &next;
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= prompts.len() {
                    break;
                }
                let result = send_with_retry(client, endpoint, credential, &prompts[i]);
                if sender.send((i, result)).is_err() {
                    break;
                }
            });
        }
        drop(sender);
    });

    let mut slots: Vec<Option<Result<String, String>>> = vec![None; prompts.len()];
    for (i, result) in receiver {
        slots[i] = Some(result);
    }
    Ok(slots
        .into_iter()
        .zip(items)
        .map(|(slot, (id, _))| {
            slot.expect("every index is dispatched exactly once")
                .map_err(|message| PromptError::EndpointFailure {
                    id: id.clone(),
                    message,
                })
        })
        .collect())
}

fn send_with_retry(
    client: &reqwest::blocking::Client,
    endpoint: &EndpointDescriptor,
    credential: &str,
    prompt: &PromptText,
) -> Result<String, String> {
    let mut body = serde_json::Map::new();
    if let Some(model) = &endpoint.model {
        body.insert("model".to_string(), serde_json::json!(model));
    }
    body.insert(
        "messages".to_string(),
        serde_json::json!([
            {"role": "system", "content": prompt.system_message()},
            {"role": "user", "content": prompt.user_message()},
        ]),
    );
    if let Some(temperature) = endpoint.temperature {
        body.insert("temperature".to_string(), serde_json::json!(temperature));
    }
    if let Some(top_p) = endpoint.top_p {
        body.insert("top_p".to_string(), serde_json::json!(top_p));
    }
    if let Some(max_tokens) = endpoint.max_tokens {
        body.insert("max_tokens".to_string(), serde_json::json!(max_tokens));
    }
    let payload = serde_json::Value::Object(body).to_string();

    let mut last_error = String::new();
    for attempt in 0..=endpoint.retries {
        if attempt > 0 {
            let backoff = endpoint.backoff_base_secs * 2f64.powi(attempt as i32 - 1);
            std::thread::sleep(Duration::from_secs_f64(backoff));
        }
        let response = client
            .post(&endpoint.base_url)
            .header("Authorization", format!("Bearer {credential}"))
            .header("Content-Type", "application/json")
            .body(payload.clone())
            .send();
        match response {
            Ok(response) if response.status().is_success() => {
                return response.text().map_err(|e| e.to_string());
            }
            Ok(response) => {
                last_error = format!("HTTP {}", response.status());
            }
            Err(error) => {
                last_error = error.to_string();
            }
        }
    }
    Err(last_error)
}
