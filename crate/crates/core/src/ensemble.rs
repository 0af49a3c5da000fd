//! Weighted soft-vote ensembling over per-model confidence distributions.
//!
//! Each member model contributes one confidence vector per example. Member
//! weights come from macro F1 on a reference split (normally dev; optionally
//! test, post hoc) or are set manually. The ensemble score is the weighted
//! average of the member vectors: `s = sum(w_m * c_m) / sum(w_m)`, computed
//! with the weights normalized up front so that a single member passes
//! through bit-exactly and rescaled weights cannot change the output.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::corpus::{LabelSchema, LabeledExample, Split};
use crate::metrics::{self, MetricsError};

/// Tolerance for the "components sum to 1" check on normalized vectors.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum EnsembleError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: malformed prediction record: {message}")]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("prediction file {path} has no entries")]
    EmptyFile { path: PathBuf },
    #[error("example {id:?} is missing a confidence for label {label:?}")]
    MissingLabel { id: String, label: String },
    #[error("example {id:?} has confidence key {key:?} outside the schema")]
    UnknownLabelKey { id: String, key: String },
    #[error("example {id:?} has conflicting confidence keys for label {label:?}")]
    ConflictingLabelKey { id: String, label: String },
    #[error("example {id:?} has negative confidence {value} for label {label:?}")]
    NegativeConfidence { id: String, label: String, value: f64 },
    #[error("example {id:?} has non-finite confidence for label {label:?}")]
    NonFiniteConfidence { id: String, label: String },
    #[error("example {id:?} has an all-zero confidence vector")]
    ZeroVector { id: String },
    #[error("example {id:?} is flagged normalized but its confidences sum to {sum}")]
    NotNormalized { id: String, sum: f64 },
    #[error("duplicate example id {id:?} in prediction set")]
    DuplicateId { id: String },
    #[error("confidence vector for {id:?} has length {got}, schema has {want} labels")]
    WrongVectorLength { id: String, got: usize, want: usize },
    #[error("duplicate model id {model:?} among ensemble members")]
    DuplicateModelId { model: String },
    #[error("members {a:?} and {b:?} use different schemas")]
    SchemaMismatch { a: String, b: String },
    #[error("member {model:?} id set differs: missing [{}], extra [{}]", missing.join(", "), extra.join(", "))]
    IdSetMismatch {
        model: String,
        missing: Vec<String>,
        extra: Vec<String>,
    },
    #[error("member {model:?} does not cover gold ids: [{}]", missing.join(", "))]
    CoverageGap { model: String, missing: Vec<String> },
    #[error("no weight configured for member {model:?}")]
    MissingWeight { model: String },
    #[error("no prediction set provided for configured member {model:?}")]
    MemberNotProvided { model: String },
    #[error("prediction set {model:?} is not listed in the ensemble members")]
    UnexpectedMember { model: String },
    #[error("member {model:?} has weight 0; a zero-weight member is meaningless, drop it instead")]
    ZeroWeight { model: String },
    #[error("member {model:?} has non-positive or non-finite weight {weight}")]
    InvalidWeight { model: String, weight: f64 },
    #[error("ensemble has no members")]
    EmptyMembers,
    #[error("gold split is empty")]
    EmptyGold,
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// Per-example confidence distribution over schema labels for one model
/// (or one ensemble).
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionSet {
    model_id: String,
    schema: LabelSchema,
    normalized: bool,
    entries: BTreeMap<String, Vec<f64>>,
}

impl PredictionSet {
    pub fn new<S: Into<String>>(model_id: S, schema: LabelSchema, normalized: bool) -> Self {
        Self {
            model_id: model_id.into(),
            schema,
            normalized,
            entries: BTreeMap::new(),
        }
    }

    /// Builds a set from (id, vector) pairs, validating every vector.
    pub fn from_entries<S, I>(
        model_id: S,
        schema: LabelSchema,
        normalized: bool,
        entries: I,
    ) -> Result<Self, EnsembleError>
    where
        S: Into<String>,
        I: IntoIterator<Item = (String, Vec<f64>)>,
    {
        let mut set = Self::new(model_id, schema, normalized);
        for (id, vector) in entries {
            set.insert(id, vector)?;
        }
        Ok(set)
    }

    /// Validates and inserts one confidence vector.
    pub fn insert(&mut self, id: String, vector: Vec<f64>) -> Result<(), EnsembleError> {
        let k = self.schema.num_labels();
        if vector.len() != k {
            return Err(EnsembleError::WrongVectorLength {
                id,
                got: vector.len(),
                want: k,
            });
        }
        for (j, &value) in vector.iter().enumerate() {
            if !value.is_finite() {
                return Err(EnsembleError::NonFiniteConfidence {
                    id,
                    label: self.schema.labels()[j].clone(),
                });
            }
            if value < 0.0 {
                return Err(EnsembleError::NegativeConfidence {
                    id,
                    label: self.schema.labels()[j].clone(),
                    value,
                });
            }
        }
        if vector.iter().all(|&v| v == 0.0) {
            return Err(EnsembleError::ZeroVector { id });
        }
        if self.normalized {
            let sum: f64 = vector.iter().sum();
            if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
                return Err(EnsembleError::NotNormalized { id, sum });
            }
        }
        if self.entries.contains_key(&id) {
            return Err(EnsembleError::DuplicateId { id });
        }
        self.entries.insert(id, vector);
        Ok(())
    }

    // combine() writes vectors it has just computed from validated members;
    // re-checking the normalization tolerance there could reject legitimate
    // boundary cases by a rounding hair.
    fn insert_unchecked(&mut self, id: String, vector: Vec<f64>) {
        self.entries.insert(id, vector);
    }

    pub fn model_id(&self) -> &str {
        &self.model_id
    }

    pub fn schema(&self) -> &LabelSchema {
        &self.schema
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&[f64]> {
        self.entries.get(id).map(|v| v.as_slice())
    }

    /// Entries ordered by example id.
    pub fn entries(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.entries.iter().map(|(id, v)| (id.as_str(), v.as_slice()))
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Deterministic JSON Lines serialization: a header line declaring
    /// `model_id` and `normalized`, then one object per example in id order
    /// with one numeric field per canonical label.
    pub fn to_jsonl(&self) -> String {
        let mut out = format!(
            "{{\"model_id\":{},\"normalized\":{}}}\n",
            serde_json::to_string(&self.model_id).expect("string"),
            self.normalized
        );
        for (id, vector) in &self.entries {
            let mut line = format!("{{\"id\":{}", serde_json::to_string(id).expect("string"));
            for (label, value) in self.schema.labels().iter().zip(vector) {
                line.push_str(&format!(
                    ",{}:{}",
                    serde_json::to_string(label).expect("string"),
                    serde_json::Number::from_f64(*value).expect("finite confidence")
                ));
            }
            line.push_str("}\n");
            out.push_str(&line);
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<(), EnsembleError> {
        std::fs::write(path, self.to_jsonl()).map_err(|source| EnsembleError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Loads a prediction file (JSON Lines; see [`PredictionSet::to_jsonl`]).
///
/// Label keys may be canonical names or schema aliases. Without a header
/// line the model id defaults to the file stem and vectors are treated as
/// unnormalized scores.
pub fn load_predictions(path: &Path, schema: &LabelSchema) -> Result<PredictionSet, EnsembleError> {
    let text = std::fs::read_to_string(path).map_err(|source| EnsembleError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let malformed = |line: usize, message: String| EnsembleError::Malformed {
        path: path.to_path_buf(),
        line,
        message,
    };

    let default_model_id = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("model")
        .to_string();

    let mut set: Option<PredictionSet> = None;
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if raw_line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(raw_line)
            .map_err(|e| malformed(line_no, e.to_string()))?;
        let object = value
            .as_object()
            .ok_or_else(|| malformed(line_no, "expected a JSON object".to_string()))?;

        if set.is_none() && !object.contains_key("id") {
            // optional header line
            let model_id = match object.get("model_id") {
                Some(v) => v
                    .as_str()
                    .ok_or_else(|| malformed(line_no, "model_id must be a string".to_string()))?
                    .to_string(),
                None => default_model_id.clone(),
            };
            let normalized = match object.get("normalized") {
                Some(v) => v
                    .as_bool()
                    .ok_or_else(|| malformed(line_no, "normalized must be a boolean".to_string()))?,
                None => false,
            };
            set = Some(PredictionSet::new(model_id, schema.clone(), normalized));
            continue;
        }
        let set = set.get_or_insert_with(|| {
            PredictionSet::new(default_model_id.clone(), schema.clone(), false)
        });

        let id = object
            .get("id")
            .and_then(|v| v.as_str())
            .ok_or_else(|| malformed(line_no, "record has no string id field".to_string()))?
            .to_string();
        let mut vector = vec![None; schema.num_labels()];
        for (key, value) in object {
            if key == "id" {
                continue;
            }
            let slot = schema
                .index_of(key)
                .ok_or_else(|| EnsembleError::UnknownLabelKey {
                    id: id.clone(),
                    key: key.clone(),
                })?;
            let number = value
                .as_f64()
                .ok_or_else(|| malformed(line_no, format!("{key:?} is not a number")))?;
            if vector[slot]
                .replace(number)
                .is_some()
            {
                return Err(EnsembleError::ConflictingLabelKey {
                    id,
                    label: schema.labels()[slot].clone(),
                });
            }
        }
        let vector = vector
            .into_iter()
            .enumerate()
            .map(|(j, v)| {
                v.ok_or_else(|| EnsembleError::MissingLabel {
                    id: id.clone(),
                    label: schema.labels()[j].clone(),
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        set.insert(id, vector)?;
    }

    let set = set.ok_or_else(|| EnsembleError::EmptyFile {
        path: path.to_path_buf(),
    })?;
    if set.is_empty() {
        return Err(EnsembleError::EmptyFile {
            path: path.to_path_buf(),
        });
    }
    Ok(set)
}

/// Where a weight vector came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightProvenance {
    /// Macro F1 of each member on the named split.
    SplitMacroF1(Split),
    /// Weights supplied directly by the user.
    Manual,
}

impl WeightProvenance {
    /// Short identifier used in serialized weight files.
    pub fn as_str(&self) -> &'static str {
        match self {
            WeightProvenance::SplitMacroF1(Split::Dev) => "dev-F1",
            WeightProvenance::SplitMacroF1(Split::Test) => "test-F1",
            WeightProvenance::SplitMacroF1(Split::Train) => "train-F1",
            WeightProvenance::Manual => "manual",
        }
    }

    /// Row label used in results tables, e.g. "Dev F1".
    pub fn table_label(&self) -> &'static str {
        match self {
            WeightProvenance::SplitMacroF1(Split::Dev) => "Dev F1",
            WeightProvenance::SplitMacroF1(Split::Test) => "Test F1",
            WeightProvenance::SplitMacroF1(Split::Train) => "Train F1",
            WeightProvenance::Manual => "Manual",
        }
    }

    /// Post-hoc test-F1 weighting scores the ensemble with weights taken
    /// from the very split being evaluated.
    pub fn is_circular_for(&self, evaluated: Split) -> bool {
        matches!(self, WeightProvenance::SplitMacroF1(s) if *s == evaluated)
    }
}

impl fmt::Display for WeightProvenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Strictly positive per-model weights plus their provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    weights: BTreeMap<String, f64>,
    provenance: WeightProvenance,
}

impl WeightVector {
    pub fn new(
        weights: BTreeMap<String, f64>,
        provenance: WeightProvenance,
    ) -> Result<Self, EnsembleError> {
        for (model, &weight) in &weights {
            if weight == 0.0 {
                return Err(EnsembleError::ZeroWeight {
                    model: model.clone(),
                });
            }
            if !(weight.is_finite() && weight > 0.0) {
                return Err(EnsembleError::InvalidWeight {
                    model: model.clone(),
                    weight,
                });
            }
        }
        Ok(Self {
            weights,
            provenance,
        })
    }

    pub fn get(&self, model_id: &str) -> Option<f64> {
        self.weights.get(model_id).copied()
    }

    pub fn provenance(&self) -> WeightProvenance {
        self.provenance
    }

    /// (model, weight) pairs ordered by model id.
    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.weights.iter().map(|(m, &w)| (m.as_str(), w))
    }

    /// Deterministic JSON document with provenance and per-model weights.
    pub fn to_json(&self) -> String {
        let mut out = format!("{{\n  \"provenance\": \"{}\",\n  \"weights\": {{\n", self.provenance);
        let rows: Vec<String> = self
            .weights
            .iter()
            .map(|(model, weight)| {
                format!(
                    "    {}: {}",
                    serde_json::to_string(model).expect("string"),
                    serde_json::Number::from_f64(*weight).expect("finite weight")
                )
            })
            .collect();
        out.push_str(&rows.join(",\n"));
        out.push_str("\n  }\n}\n");
        out
    }
}

/// Tie-break rule for argmax decisions. The only supported rule picks the
/// label that appears earliest in schema order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum TieBreak {
    #[default]
    SchemaOrderFirst,
}

/// Member list, weights and combination options of one ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    pub members: Vec<String>,
    pub weights: WeightVector,
    pub tie_break: TieBreak,
    pub normalize_output: bool,
}

impl EnsembleConfig {
    pub fn new(members: Vec<String>, weights: WeightVector) -> Result<Self, EnsembleError> {
        let config = Self {
            members,
            weights,
            tie_break: TieBreak::SchemaOrderFirst,
            normalize_output: true,
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), EnsembleError> {
        if self.members.is_empty() {
            return Err(EnsembleError::EmptyMembers);
        }
        for member in &self.members {
            if self.weights.get(member).is_none() {
                return Err(EnsembleError::MissingWeight {
                    model: member.clone(),
                });
            }
        }
        Ok(())
    }
}

/// Sets each member's weight to its macro F1 on the gold split.
///
/// Every member must cover every gold example id. A member scoring exactly 0
/// is rejected: a zero-weight member contributes nothing and should be
/// dropped from the ensemble instead.
pub fn derive_weights(
    members: &[PredictionSet],
    gold: &[LabeledExample],
    split: Split,
) -> Result<WeightVector, EnsembleError> {
    if members.is_empty() {
        return Err(EnsembleError::EmptyMembers);
    }
    if gold.is_empty() {
        return Err(EnsembleError::EmptyGold);
    }
    check_shared_schema(members)?;

    let mut weights = BTreeMap::new();
    for member in members {
        let missing: Vec<String> = gold
            .iter()
            .filter(|ex| member.get(&ex.id).is_none())
            .map(|ex| ex.id.clone())
            .collect();
        if !missing.is_empty() {
            return Err(EnsembleError::CoverageGap {
                model: member.model_id().to_string(),
                missing,
            });
        }
        let gold_labels: Vec<&str> = gold.iter().map(|ex| ex.label.as_str()).collect();
        let pred_labels: Vec<&str> = gold
            .iter()
            .map(|ex| {
                let vector = member.get(&ex.id).expect("coverage checked above");
                member.schema().labels()[argmax(vector)].as_str()
            })
            .collect();
        let cm = metrics::confusion_matrix(&gold_labels, &pred_labels, member.schema())?;
        let weight = metrics::macro_f1(&cm);
        if weight == 0.0 {
            return Err(EnsembleError::ZeroWeight {
                model: member.model_id().to_string(),
            });
        }
        if weights
            .insert(member.model_id().to_string(), weight)
            .is_some()
        {
            return Err(EnsembleError::DuplicateModelId {
                model: member.model_id().to_string(),
            });
        }
    }
    WeightVector::new(weights, WeightProvenance::SplitMacroF1(split))
}

fn check_shared_schema<'a, I>(members: I) -> Result<(), EnsembleError>
where
    I: IntoIterator<Item = &'a PredictionSet>,
{
    let mut iter = members.into_iter();
    let Some(first) = iter.next() else {
        return Ok(());
    };
    for member in iter {
        if member.schema() != first.schema() {
            return Err(EnsembleError::SchemaMismatch {
                a: first.model_id().to_string(),
                b: member.model_id().to_string(),
            });
        }
    }
    Ok(())
}

/// Weighted soft-vote combination of the member prediction sets.
///
/// All members must share the schema and cover identical example-id sets.
/// The output carries the provenance-derived ensemble name (for example
/// "Wt. (Dev F1) Ensemble") and is flagged normalized when requested and
/// every input is normalized — a weighted average of distributions is again
/// a distribution.
pub fn combine(
    members: &[PredictionSet],
    config: &EnsembleConfig,
) -> Result<PredictionSet, EnsembleError> {
    config.validate()?;
    for member in members {
        if !config.members.iter().any(|m| m == member.model_id()) {
            return Err(EnsembleError::UnexpectedMember {
                model: member.model_id().to_string(),
            });
        }
    }
    let ordered: Vec<&PredictionSet> = config
        .members
        .iter()
        .map(|name| {
            members
                .iter()
                .find(|m| m.model_id() == name)
                .ok_or_else(|| EnsembleError::MemberNotProvided {
                    model: name.clone(),
                })
        })
        .collect::<Result<_, _>>()?;

    check_shared_schema(ordered.iter().copied())?;

    let first = ordered[0];
    for member in &ordered[1..] {
        let missing: Vec<String> = first
            .ids()
            .filter(|id| member.get(id).is_none())
            .map(str::to_string)
            .collect();
        let extra: Vec<String> = member
            .ids()
            .filter(|id| first.get(id).is_none())
            .map(str::to_string)
            .collect();
        if !missing.is_empty() || !extra.is_empty() {
            return Err(EnsembleError::IdSetMismatch {
                model: member.model_id().to_string(),
                missing,
                extra,
            });
        }
    }

    let raw_weights: Vec<f64> = ordered
        .iter()
        .map(|m| config.weights.get(m.model_id()).expect("validated above"))
        .collect();
    let total: f64 = raw_weights.iter().sum();
    // Normalizing once keeps the combination a true weighted average: a lone
    // member passes through unchanged and scaling every weight by a common
    // factor leaves the normalized weights, hence the output, identical.
    let norm_weights: Vec<f64> = raw_weights.iter().map(|w| w / total).collect();

    let normalized = config.normalize_output && ordered.iter().all(|m| m.is_normalized());
    let name = format!("Wt. ({}) Ensemble", config.weights.provenance().table_label());
    let mut out = PredictionSet::new(name, first.schema().clone(), normalized);
    let k = first.schema().num_labels();
    for (id, _) in first.entries() {
        let mut score = vec![0.0f64; k];
        for (member, &weight) in ordered.iter().zip(&norm_weights) {
            let vector = member.get(id).expect("id sets checked above");
            for (slot, &component) in score.iter_mut().zip(vector) {
                *slot += weight * component;
            }
        }
        out.insert_unchecked(id.to_string(), score);
    }
    Ok(out)
}

fn argmax(vector: &[f64]) -> usize {
    let mut best = 0;
    for (j, &value) in vector.iter().enumerate().skip(1) {
        if value > vector[best] {
            best = j;
        }
    }
    best
}

/// Argmax decision per example; ties go to the label earliest in schema
/// order.
pub fn decide(pred: &PredictionSet) -> BTreeMap<String, String> {
    pred.entries()
        .map(|(id, vector)| {
            (
                id.to_string(),
                pred.schema().labels()[argmax(vector)].clone(),
            )
        })
        .collect()
}

/// Renders decisions plus per-label scores as CSV:
/// `id,label,score_<label1>,...,score_<labelK>`.
pub fn decisions_csv(pred: &PredictionSet) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["id".to_string(), "label".to_string()];
    header.extend(
        pred.schema()
            .labels()
            .iter()
            .map(|label| format!("score_{label}")),
    );
    writer.write_record(&header).expect("in-memory write");
    for (id, vector) in pred.entries() {
        let mut row = vec![
            id.to_string(),
            pred.schema().labels()[argmax(vector)].clone(),
        ];
        row.extend(vector.iter().map(|v| v.to_string()));
        writer.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory write")).expect("utf8")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema() -> LabelSchema {
        LabelSchema::new(
            "test",
            vec!["A".to_string(), "B".to_string(), "C".to_string()],
            BTreeMap::new(),
        )
        .unwrap()
    }

    fn set(model_id: &str, entries: &[(&str, [f64; 3])]) -> PredictionSet {
        PredictionSet::from_entries(
            model_id,
            schema(),
            false,
            entries
                .iter()
                .map(|(id, v)| (id.to_string(), v.to_vec())),
        )
        .unwrap()
    }

    fn manual_config(members: &[(&str, f64)]) -> EnsembleConfig {
        let weights = WeightVector::new(
            members
                .iter()
                .map(|(m, w)| (m.to_string(), *w))
                .collect(),
            WeightProvenance::Manual,
        )
        .unwrap();
        EnsembleConfig::new(members.iter().map(|(m, _)| m.to_string()).collect(), weights).unwrap()
    }

    #[test]
    fn insert_rejects_bad_vectors() {
        let mut set = PredictionSet::new("m", schema(), false);
        assert!(matches!(
            set.insert("1".into(), vec![0.5, 0.5]),
            Err(EnsembleError::WrongVectorLength { .. })
        ));
        assert!(matches!(
            set.insert("1".into(), vec![0.5, -0.1, 0.6]),
            Err(EnsembleError::NegativeConfidence { .. })
        ));
        assert!(matches!(
            set.insert("1".into(), vec![0.0, 0.0, 0.0]),
            Err(EnsembleError::ZeroVector { .. })
        ));
        set.insert("1".into(), vec![0.5, 0.3, 0.2]).unwrap();
        assert!(matches!(
            set.insert("1".into(), vec![0.5, 0.3, 0.2]),
            Err(EnsembleError::DuplicateId { .. })
        ));
    }

    #[test]
    fn normalized_flag_enforces_unit_sum() {
        let mut set = PredictionSet::new("m", schema(), true);
        assert!(matches!(
            set.insert("7".into(), vec![0.2, 0.2, 0.2]),
            Err(EnsembleError::NotNormalized { sum, .. }) if (sum - 0.6).abs() < 1e-12
        ));
        set.insert("7".into(), vec![0.5, 0.3, 0.2]).unwrap();
    }

    #[test]
    fn load_maps_alias_keys_into_schema_order() {
        let schema = LabelSchema::new(
            "english",
            vec![
                "Non-anti-LGBT+ content".to_string(),
                "Homophobia".to_string(),
                "Transphobia".to_string(),
            ],
            BTreeMap::from([("Homophobic".to_string(), "Homophobia".to_string())]),
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.jsonl");
        std::fs::write(
            &path,
            concat!(
                "{\"model_id\":\"m\",\"normalized\":true}\n",
                "{\"id\":\"7\",\"Homophobic\":0.5,\"Transphobia\":0.3,\"Non-anti-LGBT+ content\":0.2}\n",
            ),
        )
        .unwrap();
        let set = load_predictions(&path, &schema).unwrap();
        assert_eq!(set.model_id(), "m");
        assert!(set.is_normalized());
        assert_eq!(set.get("7").unwrap(), &[0.2, 0.5, 0.3]);
    }

    #[test]
    fn load_reports_negative_confidence_with_id() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.jsonl");
        std::fs::write(&path, "{\"id\":\"7\",\"A\":-0.1,\"B\":0.6,\"C\":0.5}\n").unwrap();
        let err = load_predictions(&path, &schema()).unwrap_err();
        assert!(matches!(
            err,
            EnsembleError::NegativeConfidence { ref id, .. } if id == "7"
        ));
    }

    #[test]
    fn load_rejects_missing_label_and_empty_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.jsonl");
        std::fs::write(&path, "{\"id\":\"7\",\"A\":0.5,\"B\":0.5}\n").unwrap();
        assert!(matches!(
            load_predictions(&path, &schema()),
            Err(EnsembleError::MissingLabel { .. })
        ));
        std::fs::write(&path, "").unwrap();
        assert!(matches!(
            load_predictions(&path, &schema()),
            Err(EnsembleError::EmptyFile { .. })
        ));
    }

    #[test]
    fn jsonl_roundtrip_is_exact() {
        let original = set("m", &[("1", [0.5, 0.3, 0.2]), ("2", [0.1, 0.1, 0.8])]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.jsonl");
        original.save(&path).unwrap();
        let loaded = load_predictions(&path, &schema()).unwrap();
        assert_eq!(loaded, original);
        // serialization itself is byte-stable
        assert_eq!(original.to_jsonl(), loaded.to_jsonl());
    }

    #[test]
    fn combine_hand_example() {
        let members = [
            set("m1", &[("1", [0.5, 0.3, 0.2])]),
            set("m2", &[("1", [0.2, 0.7, 0.1])]),
        ];
        let config = manual_config(&[("m1", 0.6), ("m2", 0.4)]);
        let out = combine(&members, &config).unwrap();
        let v = out.get("1").unwrap();
        assert!((v[0] - 0.38).abs() < 1e-12);
        assert!((v[1] - 0.46).abs() < 1e-12);
        assert!((v[2] - 0.16).abs() < 1e-12);
        assert_eq!(decide(&out).get("1").unwrap(), "B");
    }

    #[test]
    fn combine_weight_scale_cancels_exactly() {
        let members = [
            set("m1", &[("1", [0.5, 0.3, 0.2])]),
            set("m2", &[("1", [0.2, 0.7, 0.1])]),
        ];
        let small = combine(&members, &manual_config(&[("m1", 0.6), ("m2", 0.4)])).unwrap();
        let large = combine(&members, &manual_config(&[("m1", 6.0), ("m2", 4.0)])).unwrap();
        assert_eq!(small.get("1").unwrap(), large.get("1").unwrap());
        assert_eq!(decide(&small), decide(&large));
    }

    #[test]
    fn combine_single_member_is_identity() {
        let member = set("m1", &[("1", [0.4, 0.35, 0.25]), ("2", [0.1, 0.2, 0.7])]);
        let out = combine(
            std::slice::from_ref(&member),
            &manual_config(&[("m1", 0.37)]),
        )
        .unwrap();
        for (id, vector) in member.entries() {
            assert_eq!(out.get(id).unwrap(), vector);
        }
    }

    #[test]
    fn combine_rejects_id_set_mismatch() {
        let members = [
            set("m1", &[("1", [0.5, 0.3, 0.2]), ("2", [0.5, 0.3, 0.2])]),
            set("m2", &[("1", [0.2, 0.7, 0.1]), ("3", [0.2, 0.7, 0.1])]),
        ];
        let config = manual_config(&[("m1", 0.6), ("m2", 0.4)]);
        match combine(&members, &config).unwrap_err() {
            EnsembleError::IdSetMismatch { missing, extra, .. } => {
                assert_eq!(missing, vec!["2".to_string()]);
                assert_eq!(extra, vec!["3".to_string()]);
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn decide_breaks_ties_by_schema_order() {
        let pred = set("m", &[("1", [0.5, 0.5, 0.0]), ("2", [0.0, 0.0, 1.0])]);
        let decisions = decide(&pred);
        assert_eq!(decisions.get("1").unwrap(), "A");
        assert_eq!(decisions.get("2").unwrap(), "C");
    }

    #[test]
    fn derive_weights_perfect_member_gets_one() {
        let gold = vec![
            LabeledExample::new("1", "t", "A"),
            LabeledExample::new("2", "t", "B"),
            LabeledExample::new("3", "t", "C"),
        ];
        let member = set(
            "m",
            &[
                ("1", [0.9, 0.05, 0.05]),
                ("2", [0.1, 0.8, 0.1]),
                ("3", [0.0, 0.1, 0.9]),
            ],
        );
        let weights = derive_weights(&[member], &gold, Split::Dev).unwrap();
        assert_eq!(weights.get("m"), Some(1.0));
        assert_eq!(weights.provenance(), WeightProvenance::SplitMacroF1(Split::Dev));
        assert_eq!(weights.provenance().as_str(), "dev-F1");
    }

    #[test]
    fn derive_weights_majority_collapse_scores_low() {
        // 95/4/1 supports, every prediction the majority class
        let mut gold = Vec::new();
        let mut entries = Vec::new();
        for i in 0..100 {
            let label = if i < 95 {
                "A"
            } else if i < 99 {
                "B"
            } else {
                "C"
            };
            let id = format!("{i:03}");
            gold.push(LabeledExample::new(id.clone(), "t", label));
            entries.push((id, vec![1.0, 0.0, 0.0]));
        }
        let member = PredictionSet::from_entries("maj", schema(), false, entries).unwrap();
        let weights = derive_weights(&[member], &gold, Split::Dev).unwrap();
        let w = weights.get("maj").unwrap();
        assert!((w - 0.3248).abs() < 1e-4, "got {w}");
    }

    #[test]
    fn derive_weights_reports_coverage_gap() {
        let gold = vec![
            LabeledExample::new("1", "t", "A"),
            LabeledExample::new("2", "t", "B"),
        ];
        let member = set("m", &[("1", [1.0, 0.0, 0.0])]);
        match derive_weights(&[member], &gold, Split::Dev).unwrap_err() {
            EnsembleError::CoverageGap { model, missing } => {
                assert_eq!(model, "m");
                assert_eq!(missing, vec!["2".to_string()]);
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn derive_weights_matches_member_macro_f1() {
        // three members of different quality: each weight must equal the
        // member's own macro F1 on the gold split, computed independently
        let gold: Vec<LabeledExample> = (0..30)
            .map(|i| {
                let label = ["A", "B", "C"][i % 3];
                LabeledExample::new(format!("{i:02}"), "t", label)
            })
            .collect();
        let one_hot = |label: usize| {
            let mut v = vec![0.0; 3];
            v[label] = 1.0;
            v
        };
        let member = |name: &str, wrong_every: usize| {
            let entries = gold.iter().enumerate().map(|(i, ex)| {
                let true_idx = i % 3;
                let idx = if wrong_every > 0 && i % wrong_every == 0 {
                    (true_idx + 1) % 3
                } else {
                    true_idx
                };
                (ex.id.clone(), one_hot(idx))
            });
            PredictionSet::from_entries(name, schema(), false, entries).unwrap()
        };
        let members = vec![member("good", 0), member("mid", 5), member("rough", 2)];
        let weights = derive_weights(&members, &gold, Split::Dev).unwrap();
        for m in &members {
            let gold_labels: Vec<&str> = gold.iter().map(|ex| ex.label.as_str()).collect();
            let pred_labels: Vec<String> = gold
                .iter()
                .map(|ex| decide(m).get(&ex.id).unwrap().clone())
                .collect();
            let cm = metrics::confusion_matrix(&gold_labels, &pred_labels, m.schema()).unwrap();
            assert_eq!(weights.get(m.model_id()), Some(metrics::macro_f1(&cm)));
        }
        assert_eq!(weights.get("good"), Some(1.0));
    }

    #[test]
    fn zero_weight_is_rejected() {
        let err = WeightVector::new(
            BTreeMap::from([("m".to_string(), 0.0)]),
            WeightProvenance::Manual,
        )
        .unwrap_err();
        assert!(matches!(err, EnsembleError::ZeroWeight { .. }));
    }

    #[test]
    fn ensemble_name_carries_provenance() {
        let member = set("m1", &[("1", [0.5, 0.3, 0.2])]);
        let weights = WeightVector::new(
            BTreeMap::from([("m1".to_string(), 0.9)]),
            WeightProvenance::SplitMacroF1(Split::Dev),
        )
        .unwrap();
        let config = EnsembleConfig::new(vec!["m1".to_string()], weights).unwrap();
        let out = combine(std::slice::from_ref(&member), &config).unwrap();
        assert_eq!(out.model_id(), "Wt. (Dev F1) Ensemble");
    }

    #[test]
    fn decisions_csv_layout() {
        let pred = set("m", &[("1", [0.38, 0.46, 0.16])]);
        let csv = decisions_csv(&pred);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "id,label,score_A,score_B,score_C");
        assert_eq!(lines.next().unwrap(), "1,B,0.38,0.46,0.16");
    }
}
