//! Labeled datasets and per-language label schemas.
//!
//! A [`LabelSchema`] fixes the ordered label inventory for one language plus
//! the alias surface forms that map onto it ("Homophobic" vs "Homophobia",
//! "None of the categories" vs "None", ...). A [`Dataset`] is an immutable
//! set of labeled examples partitioned into train/dev/test splits, all
//! canonicalized under one schema.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised while loading or validating corpora.
#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} is not valid UTF-8 (line {line})")]
    InvalidUtf8 { path: PathBuf, line: usize },
    #[error("{path}:{line}: malformed record: {message}")]
    MalformedRecord {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("unknown label {label:?} for example {id:?} (not in schema for {language:?})")]
    UnknownLabel {
        id: String,
        label: String,
        language: String,
    },
    #[error("duplicate example id {id:?} in {split} split")]
    DuplicateId { id: String, split: Split },
    #[error("schema declares no labels")]
    EmptyLabels,
    #[error("schema label {label:?} duplicates another label after case-folding")]
    DuplicateLabel { label: String },
    #[error("alias {alias:?} maps to {target:?}, which is not a schema label")]
    BadAliasTarget { alias: String, target: String },
    #[error("alias {alias:?} collides with canonical label {label:?}")]
    AliasShadowsLabel { alias: String, label: String },
    #[error("dataset has no splits")]
    NoSplits,
    #[error("dataset has no {0} split")]
    MissingSplit(Split),
    #[error("{0} split is empty")]
    EmptySplit(Split),
}

/// Case-folds and trims a label surface form for comparison.
fn fold(raw: &str) -> String {
    raw.trim().to_lowercase()
}

/// Ordered, language-specific label inventory with canonical aliases.
///
/// Label order is the declaration order; it is stable and defines tie-breaking
/// for downstream argmax decisions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSchema {
    language: String,
    labels: Vec<String>,
    // folded surface form -> index into `labels`; covers canonicals and aliases
    lookup: HashMap<String, usize>,
    // alias surface forms as declared, for serialization
    aliases: BTreeMap<String, String>,
}

#[derive(Serialize, Deserialize)]
struct SchemaFile {
    language: String,
    labels: Vec<String>,
    #[serde(default)]
    aliases: BTreeMap<String, String>,
}

impl LabelSchema {
    /// Builds a schema, validating label uniqueness and alias targets.
    pub fn new<S: Into<String>>(
        language: S,
        labels: Vec<String>,
        aliases: BTreeMap<String, String>,
    ) -> Result<Self, CorpusError> {
        if labels.is_empty() {
            return Err(CorpusError::EmptyLabels);
        }
        let mut lookup = HashMap::new();
        for (idx, label) in labels.iter().enumerate() {
            let key = fold(label);
            if key.is_empty() {
                return Err(CorpusError::EmptyLabels);
            }
            if lookup.insert(key, idx).is_some() {
                return Err(CorpusError::DuplicateLabel {
                    label: label.clone(),
                });
            }
        }
        for (alias, target) in &aliases {
            let target_idx =
                *lookup
                    .get(&fold(target))
                    .ok_or_else(|| CorpusError::BadAliasTarget {
                        alias: alias.clone(),
                        target: target.clone(),
                    })?;
            let key = fold(alias);
            match lookup.get(&key) {
                Some(&existing) if existing != target_idx => {
                    return Err(CorpusError::AliasShadowsLabel {
                        alias: alias.clone(),
                        label: labels[existing].clone(),
                    });
                }
                _ => {
                    lookup.insert(key, target_idx);
                }
            }
        }
        Ok(Self {
            language: language.into(),
            labels,
            lookup,
            aliases,
        })
    }

    /// Loads a schema document (JSON: `language`, ordered `labels`, `aliases`).
    pub fn from_path(path: &Path) -> Result<Self, CorpusError> {
        let bytes = std::fs::read(path).map_err(|source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let text = decode_utf8(&bytes, path)?;
        let file: SchemaFile =
            serde_json::from_str(&text).map_err(|e| CorpusError::MalformedRecord {
                path: path.to_path_buf(),
                line: e.line(),
                message: e.to_string(),
            })?;
        Self::new(file.language, file.labels, file.aliases)
    }

    /// Serializes the schema back to its JSON document form.
    pub fn to_json(&self) -> String {
        let file = SchemaFile {
            language: self.language.clone(),
            labels: self.labels.clone(),
            aliases: self.aliases.clone(),
        };
        serde_json::to_string_pretty(&file).expect("schema serialization cannot fail")
    }

    pub fn language(&self) -> &str {
        &self.language
    }

    /// Canonical labels in declaration order.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Number of classes.
    pub fn num_labels(&self) -> usize {
        self.labels.len()
    }

    /// Resolves a surface form (canonical, alias, any casing/padding) to the
    /// canonical label, or `None` if it is outside the schema.
    pub fn canonicalize(&self, raw: &str) -> Option<&str> {
        self.lookup.get(&fold(raw)).map(|&i| self.labels[i].as_str())
    }

    /// Index of a label (canonical or alias) in declaration order.
    pub fn index_of(&self, raw: &str) -> Option<usize> {
        self.lookup.get(&fold(raw)).copied()
    }
}

/// One labeled text example.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub id: String,
    pub text: String,
    pub label: String,
}

impl LabeledExample {
    pub fn new<I: Into<String>, T: Into<String>, L: Into<String>>(id: I, text: T, label: L) -> Self {
        Self {
            id: id.into(),
            text: text.into(),
            label: label.into(),
        }
    }
}

/// Dataset split names. The set is closed: train, dev, test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Dev, Split::Test];

    pub fn as_str(&self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match fold(s).as_str() {
            "train" => Ok(Split::Train),
            "dev" => Ok(Split::Dev),
            "test" => Ok(Split::Test),
            other => Err(format!("unknown split {other:?} (expected train, dev or test)")),
        }
    }
}

/// On-disk dataset file formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileFormat {
    Csv,
    Tsv,
    Jsonl,
}

impl FileFormat {
    /// Infers the format from a file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_lowercase().as_str() {
            "csv" => Some(FileFormat::Csv),
            "tsv" => Some(FileFormat::Tsv),
            "jsonl" | "ndjson" => Some(FileFormat::Jsonl),
            _ => None,
        }
    }
}

impl FromStr for FileFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match fold(s).as_str() {
            "csv" => Ok(FileFormat::Csv),
            "tsv" => Ok(FileFormat::Tsv),
            "jsonl" | "ndjson" => Ok(FileFormat::Jsonl),
            other => Err(format!("unknown format {other:?} (expected csv, tsv or jsonl)")),
        }
    }
}

/// Immutable collection of labeled examples partitioned into named splits,
/// all valid under one schema.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    schema: LabelSchema,
    splits: BTreeMap<Split, Vec<LabeledExample>>,
}

impl Dataset {
    /// Builds a dataset, canonicalizing every label and enforcing per-split
    /// id uniqueness. At least one split must be present.
    pub fn new(
        schema: LabelSchema,
        splits: BTreeMap<Split, Vec<LabeledExample>>,
    ) -> Result<Self, CorpusError> {
        if splits.is_empty() {
            return Err(CorpusError::NoSplits);
        }
        let mut canonical = BTreeMap::new();
        for (split, examples) in splits {
            let mut seen = HashSet::new();
            let mut out = Vec::with_capacity(examples.len());
            for mut example in examples {
                if !seen.insert(example.id.clone()) {
                    return Err(CorpusError::DuplicateId {
                        id: example.id,
                        split,
                    });
                }
                match schema.canonicalize(&example.label) {
                    Some(label) => example.label = label.to_string(),
                    None => {
                        return Err(CorpusError::UnknownLabel {
                            id: example.id,
                            label: example.label,
                            language: schema.language().to_string(),
                        })
                    }
                }
                out.push(example);
            }
            canonical.insert(split, out);
        }
        Ok(Self {
            schema,
            splits: canonical,
        })
    }

    /// Builds a dataset without canonicalization or invariant checks.
    ///
    /// Intended for constructing deliberately broken inputs to [`validate`];
    /// everything else should go through [`Dataset::new`].
    pub fn from_parts_unchecked(
        schema: LabelSchema,
        splits: BTreeMap<Split, Vec<LabeledExample>>,
    ) -> Self {
        Self { schema, splits }
    }

    /// Loads one dataset from per-split files.
    pub fn load<P: AsRef<Path>>(
        schema: LabelSchema,
        parts: &[(Split, P, FileFormat)],
    ) -> Result<Self, CorpusError> {
        let mut splits = BTreeMap::new();
        for (split, path, format) in parts {
            let examples = load_split(path.as_ref(), *format, &schema)?;
            splits.insert(*split, examples);
        }
        Self::new(schema, splits)
    }

    pub fn schema(&self) -> &LabelSchema {
        &self.schema
    }

    /// Splits present in this dataset, in fixed order.
    pub fn splits(&self) -> impl Iterator<Item = (Split, &[LabeledExample])> {
        self.splits.iter().map(|(s, v)| (*s, v.as_slice()))
    }

    pub fn get_split(&self, split: Split) -> Option<&[LabeledExample]> {
        self.splits.get(&split).map(|v| v.as_slice())
    }

    /// Returns the split's examples, failing explicitly when absent.
    pub fn split(&self, split: Split) -> Result<&[LabeledExample], CorpusError> {
        self.get_split(split)
            .ok_or(CorpusError::MissingSplit(split))
    }
}

fn decode_utf8(bytes: &[u8], path: &Path) -> Result<String, CorpusError> {
    String::from_utf8(bytes.to_vec()).map_err(|e| {
        let valid = e.utf8_error().valid_up_to();
        let line = bytes[..valid].iter().filter(|&&b| b == b'\n').count() + 1;
        CorpusError::InvalidUtf8 {
            path: path.to_path_buf(),
            line,
        }
    })
}

/// Loads one split file. Labels are canonicalized through the schema; input
/// order is preserved.
pub fn load_split(
    path: &Path,
    format: FileFormat,
    schema: &LabelSchema,
) -> Result<Vec<LabeledExample>, CorpusError> {
    let bytes = std::fs::read(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let text = decode_utf8(&bytes, path)?;
    let records = match format {
        FileFormat::Csv => parse_delimited(&text, b',', path)?,
        FileFormat::Tsv => parse_delimited(&text, b'\t', path)?,
        FileFormat::Jsonl => parse_jsonl(&text, path)?,
    };

    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(records.len());
    for (line, id, text, label) in records {
        if id.is_empty() || label.is_empty() || text.is_empty() {
            let field = if id.is_empty() {
                "id"
            } else if text.is_empty() {
                "text"
            } else {
                "label"
            };
            return Err(CorpusError::MalformedRecord {
                path: path.to_path_buf(),
                line,
                message: format!("empty {field} field"),
            });
        }
        if !seen.insert(id.clone()) {
            return Err(CorpusError::DuplicateId {
                id,
                // the caller assigns the split; report against the file instead
                split: Split::Train,
            }
            .relabel_duplicate(path, line));
        }
        let canonical = schema
            .canonicalize(&label)
            .ok_or_else(|| CorpusError::UnknownLabel {
                id: id.clone(),
                label: label.clone(),
                language: schema.language().to_string(),
            })?;
        out.push(LabeledExample::new(id, text, canonical));
    }
    Ok(out)
}

impl CorpusError {
    // A duplicate found during file loading is better reported with the file
    // position than with a split name the loader does not know yet.
    fn relabel_duplicate(self, path: &Path, line: usize) -> CorpusError {
        match self {
            CorpusError::DuplicateId { id, .. } => CorpusError::MalformedRecord {
                path: path.to_path_buf(),
                line,
                message: format!("duplicate id {id:?}"),
            },
            other => other,
        }
    }
}

type RawRecord = (usize, String, String, String);

fn parse_delimited(text: &str, delimiter: u8, path: &Path) -> Result<Vec<RawRecord>, CorpusError> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .flexible(false)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| csv_error(e, path))?
        .clone();
    let col = |name: &str| -> Result<usize, CorpusError> {
        headers
            .iter()
            .position(|h| fold(h) == name)
            .ok_or_else(|| CorpusError::MalformedRecord {
                path: path.to_path_buf(),
                line: 1,
                message: format!("missing {name:?} column in header"),
            })
    };
    let (id_col, text_col, label_col) = (col("id")?, col("text")?, col("label")?);

    let mut out = Vec::new();
    for result in reader.records() {
        let record = result.map_err(|e| csv_error(e, path))?;
        let line = record
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or_default();
        out.push((
            line,
            record[id_col].trim().to_string(),
            record[text_col].to_string(),
            record[label_col].trim().to_string(),
        ));
    }
    Ok(out)
}

fn csv_error(error: csv::Error, path: &Path) -> CorpusError {
    let line = match error.position() {
        Some(p) => p.line() as usize,
        None => 0,
    };
    CorpusError::MalformedRecord {
        path: path.to_path_buf(),
        line,
        message: error.to_string(),
    }
}

fn parse_jsonl(text: &str, path: &Path) -> Result<Vec<RawRecord>, CorpusError> {
    #[derive(Deserialize)]
    struct JsonRecord {
        id: String,
        text: String,
        label: String,
    }

    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: JsonRecord =
            serde_json::from_str(line).map_err(|e| CorpusError::MalformedRecord {
                path: path.to_path_buf(),
                line: idx + 1,
                message: e.to_string(),
            })?;
        out.push((
            idx + 1,
            record.id.trim().to_string(),
            record.text,
            record.label.trim().to_string(),
        ));
    }
    Ok(out)
}

/// Writes one split back to disk in the given format.
pub fn save_split(
    examples: &[LabeledExample],
    path: &Path,
    format: FileFormat,
) -> Result<(), CorpusError> {
    let io_err = |source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    };
    match format {
        FileFormat::Csv | FileFormat::Tsv => {
            let delimiter = if format == FileFormat::Csv { b',' } else { b'\t' };
            let mut writer = csv::WriterBuilder::new()
                .delimiter(delimiter)
                .from_writer(Vec::new());
            writer
                .write_record(["id", "text", "label"])
                .map_err(|e| csv_error(e, path))?;
            for ex in examples {
                writer
                    .write_record([&ex.id, &ex.text, &ex.label])
                    .map_err(|e| csv_error(e, path))?;
            }
            let bytes = writer
                .into_inner()
                .map_err(|e| io_err(e.into_error()))?;
            std::fs::write(path, bytes).map_err(io_err)
        }
        FileFormat::Jsonl => {
            let mut file = File::create(path).map_err(io_err)?;
            for ex in examples {
                let line = serde_json::to_string(ex).expect("example serialization cannot fail");
                writeln!(file, "{line}").map_err(io_err)?;
            }
            Ok(())
        }
    }
}

/// Per-split, per-label counts and percentages.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionStats {
    per_split: BTreeMap<Split, SplitDistribution>,
}

/// Label distribution of one split, rows in schema order.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitDistribution {
    pub total: usize,
    pub rows: Vec<LabelCount>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelCount {
    pub label: String,
    pub count: usize,
    /// `100 * count / total`, kept at full precision; rounding is a display
    /// concern.
    pub percentage: f64,
}

impl DistributionStats {
    pub fn splits(&self) -> impl Iterator<Item = (Split, &SplitDistribution)> {
        self.per_split.iter().map(|(s, d)| (*s, d))
    }

    pub fn get(&self, split: Split) -> Option<&SplitDistribution> {
        self.per_split.get(&split)
    }
}

/// Computes per-label counts and percentages for every present split.
///
/// Every present split must be non-empty; an empty split is an explicit error
/// rather than a silent division by zero.
pub fn split_stats(dataset: &Dataset) -> Result<DistributionStats, CorpusError> {
    let schema = dataset.schema();
    let mut per_split = BTreeMap::new();
    for (split, examples) in dataset.splits() {
        if examples.is_empty() {
            return Err(CorpusError::EmptySplit(split));
        }
        let mut counts = vec![0usize; schema.num_labels()];
        for example in examples {
            // labels are canonical by Dataset construction
            let idx = schema
                .index_of(&example.label)
                .expect("dataset invariant: label in schema");
            counts[idx] += 1;
        }
        let total = examples.len();
        let rows = schema
            .labels()
            .iter()
            .zip(&counts)
            .map(|(label, &count)| LabelCount {
                label: label.clone(),
                count,
                percentage: 100.0 * count as f64 / total as f64,
            })
            .collect();
        per_split.insert(split, SplitDistribution { total, rows });
    }
    Ok(DistributionStats { per_split })
}

/// A dataset problem reported by [`validate`]. Diagnostics, not failures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Issue {
    /// The same example id appears in more than one split.
    CrossSplitDuplicateId { id: String, splits: Vec<Split> },
    /// An example whose text is empty or whitespace-only.
    EmptyText { split: Split, id: String },
    /// A label that does not canonicalize under the schema.
    UnknownLabel {
        split: Split,
        id: String,
        label: String,
    },
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Issue::CrossSplitDuplicateId { id, splits } => {
                let names: Vec<_> = splits.iter().map(Split::as_str).collect();
                write!(f, "id {id:?} appears in multiple splits: {}", names.join(", "))
            }
            Issue::EmptyText { split, id } => {
                write!(f, "example {id:?} in {split} split has empty text")
            }
            Issue::UnknownLabel { split, id, label } => {
                write!(f, "example {id:?} in {split} split has unknown label {label:?}")
            }
        }
    }
}

/// Scans a dataset for cross-split duplicate ids, empty texts and labels
/// outside the schema. Returns an empty list for a clean dataset.
pub fn validate(dataset: &Dataset) -> Vec<Issue> {
    let mut issues = Vec::new();

    let mut id_splits: BTreeMap<&str, Vec<Split>> = BTreeMap::new();
    for (split, examples) in dataset.splits() {
        for example in examples {
            id_splits.entry(&example.id).or_default().push(split);
        }
    }
    for (id, splits) in id_splits {
        let mut distinct = splits.clone();
        distinct.dedup();
        if distinct.len() > 1 {
            issues.push(Issue::CrossSplitDuplicateId {
                id: id.to_string(),
                splits: distinct,
            });
        }
    }

    for (split, examples) in dataset.splits() {
        for example in examples {
            if example.text.trim().is_empty() {
                issues.push(Issue::EmptyText {
                    split,
                    id: example.id.clone(),
                });
            }
            if dataset.schema().canonicalize(&example.label).is_none() {
                issues.push(Issue::UnknownLabel {
                    split,
                    id: example.id.clone(),
                    label: example.label.clone(),
                });
            }
        }
    }
    issues
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_class_schema() -> LabelSchema {
        LabelSchema::new(
            "english",
            vec![
                "Non-anti-LGBT+ content".to_string(),
                "Homophobia".to_string(),
                "Transphobia".to_string(),
            ],
            BTreeMap::from([
                ("Homophobic".to_string(), "Homophobia".to_string()),
                ("Transphobic".to_string(), "Transphobia".to_string()),
            ]),
        )
        .unwrap()
    }

    #[test]
    fn alias_resolves_to_canonical() {
        let schema = three_class_schema();
        assert_eq!(schema.canonicalize("Homophobic"), Some("Homophobia"));
        assert_eq!(schema.canonicalize("  homophobia "), Some("Homophobia"));
        assert_eq!(schema.canonicalize("Sarcasm"), None);
    }

    #[test]
    fn canonicalization_is_idempotent() {
        let schema = three_class_schema();
        for surface in ["Homophobic", "TRANSPHOBIC", "Non-anti-LGBT+ content"] {
            let once = schema.canonicalize(surface).unwrap();
            assert_eq!(schema.canonicalize(once), Some(once));
        }
    }

    #[test]
    fn schema_rejects_duplicate_labels() {
        let err = LabelSchema::new(
            "x",
            vec!["A".to_string(), " a ".to_string()],
            BTreeMap::new(),
        )
        .unwrap_err();
        assert!(matches!(err, CorpusError::DuplicateLabel { .. }));
    }

    #[test]
    fn schema_rejects_dangling_alias() {
        let err = LabelSchema::new(
            "x",
            vec!["A".to_string()],
            BTreeMap::from([("B".to_string(), "C".to_string())]),
        )
        .unwrap_err();
        assert!(matches!(err, CorpusError::BadAliasTarget { .. }));
    }

    #[test]
    fn load_canonicalizes_aliases() {
        let schema = three_class_schema();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("train.csv");
        std::fs::write(&path, "id,text,label\n1,text a,Homophobic\n").unwrap();
        let examples = load_split(&path, FileFormat::Csv, &schema).unwrap();
        assert_eq!(examples.len(), 1);
        assert_eq!(examples[0].label, "Homophobia");
        assert_eq!(examples[0].text, "text a");
    }

    #[test]
    fn load_rejects_unknown_label() {
        let schema = three_class_schema();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("train.csv");
        std::fs::write(&path, "id,text,label\n7,text,Sarcasm\n").unwrap();
        let err = load_split(&path, FileFormat::Csv, &schema).unwrap_err();
        match err {
            CorpusError::UnknownLabel { id, label, .. } => {
                assert_eq!(id, "7");
                assert_eq!(label, "Sarcasm");
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn load_rejects_duplicate_id_with_line() {
        let schema = three_class_schema();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("train.csv");
        std::fs::write(
            &path,
            "id,text,label\n1,a,Homophobia\n1,b,Transphobia\n",
        )
        .unwrap();
        let err = load_split(&path, FileFormat::Csv, &schema).unwrap_err();
        assert!(err.to_string().contains("duplicate id"));
        assert!(err.to_string().contains(":3:"));
    }

    #[test]
    fn load_rejects_invalid_utf8() {
        let schema = three_class_schema();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("train.csv");
        std::fs::write(&path, b"id,text,label\n1,\xff\xfe,Homophobia\n").unwrap();
        let err = load_split(&path, FileFormat::Csv, &schema).unwrap_err();
        assert!(matches!(err, CorpusError::InvalidUtf8 { line: 2, .. }));
    }

    #[test]
    fn jsonl_roundtrip_preserves_everything() {
        let schema = three_class_schema();
        let examples = vec![
            LabeledExample::new("1", "line with, comma", "Homophobia"),
            LabeledExample::new("2", "multi\nline \"quoted\"", "Transphobia"),
            LabeledExample::new("3", "ಕನ್ನಡ ಪಠ್ಯ", "Non-anti-LGBT+ content"),
        ];
        let dir = tempfile::tempdir().unwrap();
        for format in [FileFormat::Csv, FileFormat::Tsv, FileFormat::Jsonl] {
            let path = dir.path().join("split.dat");
            save_split(&examples, &path, format).unwrap();
            let loaded = load_split(&path, format, &schema).unwrap();
            assert_eq!(loaded, examples, "round trip failed for {format:?}");
        }
    }

    #[test]
    fn stats_percentages_match_counts() {
        let schema = three_class_schema();
        let examples: Vec<_> = (0..8)
            .map(|i| {
                let label = if i < 6 { "Non-anti-LGBT+ content" } else { "Homophobia" };
                LabeledExample::new(format!("{i}"), "t", label)
            })
            .collect();
        let dataset =
            Dataset::new(schema, BTreeMap::from([(Split::Train, examples)])).unwrap();
        let stats = split_stats(&dataset).unwrap();
        let dist = stats.get(Split::Train).unwrap();
        assert_eq!(dist.total, 8);
        assert_eq!(dist.rows[0].count, 6);
        assert!((dist.rows[0].percentage - 75.0).abs() < 1e-12);
        assert_eq!(dist.rows[2].count, 0);
        let sum: f64 = dist.rows.iter().map(|r| r.percentage).sum();
        assert!((sum - 100.0).abs() < 1e-3);
    }

    #[test]
    fn stats_single_label_split_is_degenerate() {
        let schema = three_class_schema();
        let examples = vec![
            LabeledExample::new("1", "t", "Homophobia"),
            LabeledExample::new("2", "t", "Homophobia"),
        ];
        let dataset =
            Dataset::new(schema, BTreeMap::from([(Split::Dev, examples)])).unwrap();
        let stats = split_stats(&dataset).unwrap();
        let dist = stats.get(Split::Dev).unwrap();
        assert_eq!(dist.rows[1].percentage, 100.0);
        assert_eq!(dist.rows[0].percentage, 0.0);
        assert_eq!(dist.rows[2].percentage, 0.0);
    }

    #[test]
    fn empty_split_is_an_error() {
        let schema = three_class_schema();
        let dataset = Dataset::from_parts_unchecked(
            schema,
            BTreeMap::from([(Split::Test, Vec::new())]),
        );
        assert!(matches!(
            split_stats(&dataset),
            Err(CorpusError::EmptySplit(Split::Test))
        ));
    }

    #[test]
    fn missing_split_is_an_error() {
        // mirrors the corpus with no dev data: the split may be absent, and
        // asking for it fails explicitly
        let schema = three_class_schema();
        let dataset = Dataset::new(
            schema,
            BTreeMap::from([(
                Split::Train,
                vec![LabeledExample::new("1", "t", "Homophobia")],
            )]),
        )
        .unwrap();
        assert!(dataset.get_split(Split::Dev).is_none());
        assert!(matches!(
            dataset.split(Split::Dev),
            Err(CorpusError::MissingSplit(Split::Dev))
        ));
    }

    #[test]
    fn validate_clean_dataset_is_empty() {
        let schema = three_class_schema();
        let dataset = Dataset::new(
            schema,
            BTreeMap::from([(
                Split::Train,
                vec![LabeledExample::new("1", "t", "Homophobia")],
            )]),
        )
        .unwrap();
        assert!(validate(&dataset).is_empty());
    }

    #[test]
    fn validate_reports_cross_split_duplicate() {
        let schema = three_class_schema();
        let dataset = Dataset::new(
            schema,
            BTreeMap::from([
                (Split::Train, vec![LabeledExample::new("1", "t", "Homophobia")]),
                (Split::Dev, vec![LabeledExample::new("1", "t", "Transphobia")]),
            ]),
        )
        .unwrap();
        let issues = validate(&dataset);
        assert_eq!(issues.len(), 1);
        assert!(matches!(
            &issues[0],
            Issue::CrossSplitDuplicateId { id, .. } if id == "1"
        ));
    }

    #[test]
    fn validate_reports_empty_text_and_unknown_label() {
        let schema = three_class_schema();
        let dataset = Dataset::from_parts_unchecked(
            schema,
            BTreeMap::from([(
                Split::Train,
                vec![
                    LabeledExample::new("1", "  ", "Homophobia"),
                    LabeledExample::new("2", "t", "Sarcasm"),
                ],
            )]),
        );
        let issues = validate(&dataset);
        assert_eq!(issues.len(), 2);
        assert!(matches!(&issues[0], Issue::EmptyText { id, .. } if id == "1"));
        assert!(matches!(&issues[1], Issue::UnknownLabel { id, .. } if id == "2"));
    }
}
