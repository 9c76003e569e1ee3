//! Benchmark scoring: cosine similarity against mean human ratings via
//! Spearman rank correlation, plus relation-set ablation runs.
//!
//! Benchmark pairs whose concepts have no vector are skipped and counted,
//! never imputed. Ties in either ranking receive average (fractional) ranks.

use std::collections::BTreeMap;
use std::io::Read;

use serde::Serialize;
use thiserror::Error;

use crate::embedding::EmbeddingMatrix;
use crate::lexicon::{build_graph, RelationEdge, RelationSet};
use crate::retrofit::{retrofit, RetrofitConfig, RetrofitError};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("vectors have different dimensions: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("cosine is undefined for a zero vector")]
    ZeroVector,
    #[error("benchmark is missing column {name:?}")]
    MissingColumn { name: String },
    #[error("line {line}: cannot parse rating {value:?}")]
    BadRating { line: u64, value: String },
    #[error("need at least 2 values, found {found}")]
    TooFewValues { found: usize },
    #[error("input lists have different lengths: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("non-finite value at index {index}")]
    NonFiniteValue { index: usize },
    #[error("zero variance in {which} ranks")]
    ZeroVariance { which: &'static str },
    #[error("fewer than 2 scorable pairs ({found})")]
    TooFewScorable { found: usize },
    #[error("unknown relation {label:?} in relation set")]
    UnknownRelation { label: String },
    #[error("empty relation set in ablation")]
    EmptyRelationSet,
    #[error(transparent)]
    Retrofit(#[from] RetrofitError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl EvalError {
    /// True when the underlying failure is an I/O problem rather than bad data.
    pub fn is_io(&self) -> bool {
        match self {
            EvalError::Io(_) => true,
            EvalError::Csv(e) => matches!(e.kind(), csv::ErrorKind::Io(_)),
            _ => false,
        }
    }
}

/// Cosine similarity (Σ aᵢbᵢ)/(‖a‖‖b‖), clamped to [−1, 1] to absorb
/// rounding. Zero vectors are an error, never silently 0.
pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64, EvalError> {
    if a.len() != b.len() {
        return Err(EvalError::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let mut dot = 0.0f64;
    let mut norm_a = 0.0f64;
    let mut norm_b = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        norm_a += x * x;
        norm_b += y * y;
    }
    if norm_a == 0.0 || norm_b == 0.0 {
        return Err(EvalError::ZeroVector);
    }
    Ok((dot / (norm_a.sqrt() * norm_b.sqrt())).clamp(-1.0, 1.0))
}

/// One rated concept pair from a benchmark file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkPair {
    pub term1: String,
    pub term2: String,
    pub cui1: String,
    pub cui2: String,
    pub mean_rating: f64,
    pub category: Option<String>,
}

/// Names of the benchmark CSV columns to read.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnMap {
    pub mean: String,
    pub term1: String,
    pub term2: String,
    pub cui1: String,
    pub cui2: String,
    pub category: Option<String>,
}

impl Default for ColumnMap {
    fn default() -> Self {
        ColumnMap {
            mean: "Mean".to_string(),
            term1: "Term1".to_string(),
            term2: "Term2".to_string(),
            cui1: "CUI1".to_string(),
            cui2: "CUI2".to_string(),
            category: None,
        }
    }
}

/// Reads a benchmark CSV (with header) into pairs, preserving file order.
pub fn load_benchmark<R: Read>(
    reader: R,
    columns: &ColumnMap,
) -> Result<Vec<BenchmarkPair>, EvalError> {
    let mut csv_reader = csv::Reader::from_reader(reader);
    let headers = csv_reader.headers()?.clone();
    let find = |name: &str| -> Result<usize, EvalError> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| EvalError::MissingColumn {
                name: name.to_string(),
            })
    };
    let mean_idx = find(&columns.mean)?;
    let term1_idx = find(&columns.term1)?;
    let term2_idx = find(&columns.term2)?;
    let cui1_idx = find(&columns.cui1)?;
    let cui2_idx = find(&columns.cui2)?;
    let category_idx = match &columns.category {
        Some(name) => Some(find(name)?),
        None => None,
    };

    let mut pairs = Vec::new();
    for record in csv_reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let field = |idx: usize| record.get(idx).unwrap_or("").to_string();
        let mean_text = field(mean_idx);
        let mean_rating: f64 = mean_text.parse().map_err(|_| EvalError::BadRating {
            line,
            value: mean_text.clone(),
        })?;
        if !mean_rating.is_finite() {
            return Err(EvalError::BadRating {
                line,
                value: mean_text,
            });
        }
        let category = category_idx.map(field).filter(|c| !c.is_empty());
        pairs.push(BenchmarkPair {
            term1: field(term1_idx),
            term2: field(term2_idx),
            cui1: field(cui1_idx),
            cui2: field(cui2_idx),
            mean_rating,
            category,
        });
    }
    Ok(pairs)
}

/// Why a pair could not be scored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SkipReason {
    MissingVector { token: String },
    ZeroVector { token: String },
}

impl std::fmt::Display for SkipReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SkipReason::MissingVector { token } => write!(f, "no vector for {token:?}"),
            SkipReason::ZeroVector { token } => write!(f, "zero vector for {token:?}"),
        }
    }
}

impl Serialize for SkipReason {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Scores each pair by the cosine of its two concept vectors. Pairs with a
/// missing (or zero) vector land in the skipped list; identity pairs score
/// exactly 1.0.
pub fn score_pairs(
    matrix: &EmbeddingMatrix,
    pairs: &[BenchmarkPair],
) -> (Vec<(BenchmarkPair, f64)>, Vec<(BenchmarkPair, SkipReason)>) {
    let mut scored = Vec::new();
    let mut skipped = Vec::new();
    for pair in pairs {
        let v1 = match matrix.get(&pair.cui1) {
            Some(v) => v,
            None => {
                skipped.push((
                    pair.clone(),
                    SkipReason::MissingVector {
                        token: pair.cui1.clone(),
                    },
                ));
                continue;
            }
        };
        let v2 = match matrix.get(&pair.cui2) {
            Some(v) => v,
            None => {
                skipped.push((
                    pair.clone(),
                    SkipReason::MissingVector {
                        token: pair.cui2.clone(),
                    },
                ));
                continue;
            }
        };
        let zero_token = if v1.iter().all(|v| *v == 0.0) {
            Some(pair.cui1.clone())
        } else if v2.iter().all(|v| *v == 0.0) {
            Some(pair.cui2.clone())
        } else {
            None
        };
        if let Some(token) = zero_token {
            skipped.push((pair.clone(), SkipReason::ZeroVector { token }));
            continue;
        }
        let score = if pair.cui1 == pair.cui2 {
            1.0
        } else {
            cosine(v1, v2).expect("dimensions equal within one matrix, zero vectors filtered")
        };
        scored.push((pair.clone(), score));
    }
    (scored, skipped)
}

/// Average (fractional) ranks, 1-based; tied values share the mean of the
/// positions they occupy.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end, averaged
        let rank = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = rank;
        }
        start = end;
    }
    ranks
}

fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, EvalError> {
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut cov = 0.0f64;
    let mut var_x = 0.0f64;
    let mut var_y = 0.0f64;
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if var_x == 0.0 {
        return Err(EvalError::ZeroVariance { which: "first" });
    }
    if var_y == 0.0 {
        return Err(EvalError::ZeroVariance { which: "second" });
    }
    Ok(cov / (var_x * var_y).sqrt())
}

/// Spearman rank correlation with average ranks for ties: the Pearson
/// correlation of the two rank vectors.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64, EvalError> {
    if xs.len() != ys.len() {
        return Err(EvalError::LengthMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(EvalError::TooFewValues { found: xs.len() });
    }
    for (index, v) in xs.iter().chain(ys).enumerate() {
        if !v.is_finite() {
            return Err(EvalError::NonFiniteValue {
                index: index % xs.len(),
            });
        }
    }
    pearson(&average_ranks(xs), &average_ranks(ys))
}

/// Per-category slice of an evaluation; `rho` is absent when the subset is
/// too small or has constant ranks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoryStat {
    pub n: usize,
    pub rho: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Skipped {
    pub pair: BenchmarkPair,
    pub reason: SkipReason,
}

/// Result of evaluating one benchmark against one vector store.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub n_total: usize,
    pub n_scored: usize,
    /// Spearman correlation between cosine scores and mean ratings over the
    /// scored pairs.
    pub rho: f64,
    pub skipped: Vec<Skipped>,
    pub per_category: Option<BTreeMap<String, CategoryStat>>,
}

/// Scores all pairs and correlates with the human ratings; fills the
/// per-category breakdown when any pair carries a category tag.
pub fn evaluate(matrix: &EmbeddingMatrix, pairs: &[BenchmarkPair]) -> Result<EvalReport, EvalError> {
    let (scored, skipped) = score_pairs(matrix, pairs);
    if scored.len() < 2 {
        return Err(EvalError::TooFewScorable {
            found: scored.len(),
        });
    }
    let xs: Vec<f64> = scored.iter().map(|(_, s)| *s).collect();
    let ys: Vec<f64> = scored.iter().map(|(p, _)| p.mean_rating).collect();
    let rho = spearman(&xs, &ys)?;

    let per_category = if pairs.iter().any(|p| p.category.is_some()) {
        let mut groups: BTreeMap<String, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
        for (pair, score) in &scored {
            if let Some(category) = &pair.category {
                let entry = groups.entry(category.clone()).or_default();
                entry.0.push(*score);
                entry.1.push(pair.mean_rating);
            }
        }
        let mut stats = BTreeMap::new();
        for (category, (xs, ys)) in groups {
            let rho = spearman(&xs, &ys).ok();
            stats.insert(category, CategoryStat { n: xs.len(), rho });
        }
        Some(stats)
    } else {
        None
    };

    Ok(EvalReport {
        n_total: pairs.len(),
        n_scored: scored.len(),
        rho,
        skipped: skipped
            .into_iter()
            .map(|(pair, reason)| Skipped { pair, reason })
            .collect(),
        per_category,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationRow {
    /// Relation labels joined with `+`, or "No Lexicons" for the baseline.
    pub label: String,
    /// One report per benchmark, in the order the benchmarks were supplied.
    pub reports: Vec<EvalReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationTable {
    pub benchmarks: Vec<String>,
    pub rows: Vec<AblationRow>,
}

impl AblationTable {
    /// Tab-separated table: one row per relation set, `n_scored` and `rho`
    /// columns per benchmark.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("lexicons");
        for name in &self.benchmarks {
            out.push_str(&format!("\t{name}_n_scored\t{name}_rho"));
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.label);
            for report in &row.reports {
                out.push_str(&format!("\t{}\t{}", report.n_scored, report.rho));
            }
            out.push('\n');
        }
        out
    }
}

/// Runs the relation-set ablation: a "No Lexicons" baseline row, then one
/// row per relation set, each retrofitting a fresh copy of the original
/// vectors against the union graph of the named relations.
pub fn ablate(
    original: &EmbeddingMatrix,
    edges_by_relation: &BTreeMap<String, Vec<RelationEdge>>,
    relation_sets: &[RelationSet],
    benchmarks: &[(String, Vec<BenchmarkPair>)],
    config: &RetrofitConfig,
) -> Result<AblationTable, EvalError> {
    for set in relation_sets {
        if set.is_empty() {
            return Err(EvalError::EmptyRelationSet);
        }
        for label in set.iter() {
            if !edges_by_relation.contains_key(label) {
                return Err(EvalError::UnknownRelation {
                    label: label.to_string(),
                });
            }
        }
    }

    let mut rows = Vec::with_capacity(relation_sets.len() + 1);
    let mut baseline = Vec::with_capacity(benchmarks.len());
    for (_, pairs) in benchmarks {
        baseline.push(evaluate(original, pairs)?);
    }
    rows.push(AblationRow {
        label: "No Lexicons".to_string(),
        reports: baseline,
    });

    for set in relation_sets {
        let mut edges: Vec<RelationEdge> = Vec::new();
        for label in set.iter() {
            edges.extend_from_slice(&edges_by_relation[label]);
        }
        let graph = build_graph(&edges, original.tokens());
        let result = retrofit(original, &graph, config)?;
        let mut reports = Vec::with_capacity(benchmarks.len());
        for (_, pairs) in benchmarks {
            reports.push(evaluate(&result.vectors, pairs)?);
        }
        rows.push(AblationRow {
            label: set.to_string(),
            reports,
        });
    }

    Ok(AblationTable {
        benchmarks: benchmarks.iter().map(|(name, _)| name.clone()).collect(),
        rows,
    })
}
