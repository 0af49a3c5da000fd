//! Exact multi-class evaluation: confusion matrices, per-class
//! precision/recall/F1, macro F1 and accuracy.
//!
//! Counts are integers; metric arithmetic is plain `f64` over those integers,
//! which keeps the composition error of every derived quantity below 1e-12
//! for realistic class counts. A precision, recall or F1 whose denominator is
//! zero is defined as 0 and the class still participates in the macro mean;
//! this is what makes a degenerate all-majority predictor on a heavily
//! imbalanced 3-class set score around 0.33 instead of ~0.97.

use thiserror::Error;

use crate::corpus::LabelSchema;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("gold and prediction sequences differ in length ({gold} vs {pred})")]
    LengthMismatch { gold: usize, pred: usize },
    #[error("label sequences are empty")]
    EmptyInput,
    #[error("label {label:?} is not in the schema")]
    OutOfSchema { label: String },
    #[error("confusion matrix dimensions do not match the schema")]
    DimensionMismatch,
}

/// Gold-by-predicted count grid over a schema. Rows are gold labels, columns
/// are predicted labels, both in schema order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    schema: LabelSchema,
    counts: Vec<Vec<u64>>,
    n: u64,
}

impl ConfusionMatrix {
    /// Builds a matrix from raw counts. The grid must be `K x K` for the
    /// schema's `K` labels and contain at least one observation.
    pub fn from_counts(schema: LabelSchema, counts: Vec<Vec<u64>>) -> Result<Self, MetricsError> {
        let k = schema.num_labels();
        if counts.len() != k || counts.iter().any(|row| row.len() != k) {
            return Err(MetricsError::DimensionMismatch);
        }
        let n: u64 = counts.iter().flatten().sum();
        if n == 0 {
            return Err(MetricsError::EmptyInput);
        }
        Ok(Self { schema, counts, n })
    }

    pub fn schema(&self) -> &LabelSchema {
        &self.schema
    }

    pub fn labels(&self) -> &[String] {
        self.schema.labels()
    }

    pub fn num_labels(&self) -> usize {
        self.schema.num_labels()
    }

    /// Total number of scored examples.
    pub fn n(&self) -> u64 {
        self.n
    }

    /// Count of examples with gold class `gold` predicted as `pred`.
    pub fn cell(&self, gold: usize, pred: usize) -> u64 {
        self.counts[gold][pred]
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    /// Gold count of a class (row sum).
    pub fn support(&self, class: usize) -> u64 {
        self.counts[class].iter().sum()
    }

    /// Predicted count of a class (column sum).
    pub fn predicted(&self, class: usize) -> u64 {
        self.counts.iter().map(|row| row[class]).sum()
    }

    fn trace(&self) -> u64 {
        (0..self.num_labels()).map(|i| self.counts[i][i]).sum()
    }
}

/// Tallies gold/predicted label pairs into a confusion matrix.
///
/// Both sequences may use aliases; they are canonicalized through the schema.
pub fn confusion_matrix<G: AsRef<str>, P: AsRef<str>>(
    gold: &[G],
    pred: &[P],
    schema: &LabelSchema,
) -> Result<ConfusionMatrix, MetricsError> {
    if gold.len() != pred.len() {
        return Err(MetricsError::LengthMismatch {
            gold: gold.len(),
            pred: pred.len(),
        });
    }
    if gold.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let k = schema.num_labels();
    let index = |raw: &str| {
        schema.index_of(raw).ok_or_else(|| MetricsError::OutOfSchema {
            label: raw.to_string(),
        })
    };
    let mut counts = vec![vec![0u64; k]; k];
    for (g, p) in gold.iter().zip(pred) {
        counts[index(g.as_ref())?][index(p.as_ref())?] += 1;
    }
    ConfusionMatrix::from_counts(schema.clone(), counts)
}

/// Precision, recall, F1 and support of one class.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassMetrics {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

/// Per-class precision/recall/F1 with the 0/0 -> 0 convention.
pub fn per_class_prf(cm: &ConfusionMatrix) -> Vec<ClassMetrics> {
    (0..cm.num_labels())
        .map(|c| {
            let tp = cm.cell(c, c);
            let support = cm.support(c);
            let predicted = cm.predicted(c);
            let precision = ratio(tp, predicted);
            let recall = ratio(tp, support);
            let f1 = if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                0.0
            };
            ClassMetrics {
                label: cm.labels()[c].clone(),
                precision,
                recall,
                f1,
                support,
            }
        })
        .collect()
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Unweighted mean of per-class F1 over all schema labels.
pub fn macro_f1(cm: &ConfusionMatrix) -> f64 {
    let per_class = per_class_prf(cm);
    per_class.iter().map(|m| m.f1).sum::<f64>() / per_class.len() as f64
}

/// Fraction of examples predicted correctly: `trace / n`.
pub fn accuracy(cm: &ConfusionMatrix) -> f64 {
    cm.trace() as f64 / cm.n() as f64
}

/// Micro-averaged F1. For single-label multi-class classification this
/// coincides with accuracy; it is reported but never used as an ensemble
/// weight.
pub fn micro_f1(cm: &ConfusionMatrix) -> f64 {
    accuracy(cm)
}

/// Support-weighted mean of per-class F1.
pub fn weighted_f1(cm: &ConfusionMatrix) -> f64 {
    let per_class = per_class_prf(cm);
    per_class
        .iter()
        .map(|m| m.f1 * m.support as f64)
        .sum::<f64>()
        / cm.n() as f64
}

/// Complete evaluation summary of one prediction set against gold labels.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub per_class: Vec<ClassMetrics>,
    pub macro_f1: f64,
    pub micro_f1: f64,
    pub weighted_f1: f64,
    pub accuracy: f64,
    pub n: u64,
}

impl MetricsReport {
    pub fn from_matrix(cm: &ConfusionMatrix) -> Self {
        Self {
            per_class: per_class_prf(cm),
            macro_f1: macro_f1(cm),
            micro_f1: micro_f1(cm),
            weighted_f1: weighted_f1(cm),
            accuracy: accuracy(cm),
            n: cm.n(),
        }
    }

    /// Flat CSV: one row per class, then summary rows. Metric values keep the
    /// full `f64` precision so the file can be parsed back exactly.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("class,precision,recall,f1,support\n");
        for m in &self.per_class {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                csv_quote(&m.label),
                m.precision,
                m.recall,
                m.f1,
                m.support
            ));
        }
        out.push_str(&format!("macro_f1,,,{},\n", self.macro_f1));
        out.push_str(&format!("micro_f1,,,{},\n", self.micro_f1));
        out.push_str(&format!("weighted_f1,,,{},\n", self.weighted_f1));
        out.push_str(&format!("accuracy,,,{},\n", self.accuracy));
        out.push_str(&format!("n,,,,{}\n", self.n));
        out
    }

    /// Human-readable block with the 2-decimal display used in results
    /// tables.
    pub fn to_text(&self) -> String {
        let label_width = self
            .per_class
            .iter()
            .map(|m| m.label.chars().count())
            .chain(["class".len()])
            .max()
            .unwrap_or(5);
        let mut out = format!(
            "{:<label_width$}  {:>9}  {:>6}  {:>6}  {:>7}\n",
            "class", "precision", "recall", "f1", "support"
        );
        for m in &self.per_class {
            out.push_str(&format!(
                "{:<label_width$}  {:>9}  {:>6}  {:>6}  {:>7}\n",
                m.label,
                format_2dp(m.precision),
                format_2dp(m.recall),
                format_2dp(m.f1),
                m.support
            ));
        }
        out.push_str(&format!("macro_f1 {}\n", format_2dp(self.macro_f1)));
        out.push_str(&format!("micro_f1 {}\n", format_2dp(self.micro_f1)));
        out.push_str(&format!("weighted_f1 {}\n", format_2dp(self.weighted_f1)));
        out.push_str(&format!("accuracy {}\n", format_2dp(self.accuracy)));
        out.push_str(&format!("n {}\n", self.n));
        out
    }
}

fn csv_quote(field: &str) -> String {
    if field.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// Rounds a non-negative value half-up at `decimals` places.
pub fn round_half_up(value: f64, decimals: u32) -> f64 {
    let factor = 10f64.powi(decimals as i32);
    (value * factor + 0.5).floor() / factor
}

/// 2-decimal half-up display form, e.g. `0.3248 -> "0.32"`, `94.115 -> "94.12"`.
pub fn format_2dp(value: f64) -> String {
    format!("{:.2}", round_half_up(value, 2))
}
