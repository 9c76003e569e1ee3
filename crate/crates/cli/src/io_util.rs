//! Shared loading, parsing, and error classification for the subcommands.

use std::fmt;
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use lexfit::{
    load_word2vec_text, parse_edges, ColumnMap, EdgeFormat, EmbeddingError, EmbeddingMatrix,
    EvalError, LexiconError, RelationEdge, RelationSet, RetrofitError,
};

/// Command error carrying the exit-code class: data/validation errors exit
/// with 1, I/O errors with 2.
#[derive(Debug)]
pub enum CliError {
    Data(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Data(_) => 1,
            CliError::Io(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Data(msg) | CliError::Io(msg) => f.write_str(msg),
        }
    }
}

impl From<RetrofitError> for CliError {
    fn from(e: RetrofitError) -> Self {
        CliError::Data(e.to_string())
    }
}

fn embedding_error(path: &Path, e: EmbeddingError) -> CliError {
    let msg = format!("{}: {e}", path.display());
    match e {
        EmbeddingError::Io(_) => CliError::Io(msg),
        _ => CliError::Data(msg),
    }
}

fn lexicon_error(path: &Path, e: LexiconError) -> CliError {
    let msg = format!("{}: {e}", path.display());
    match e {
        LexiconError::Io(_) => CliError::Io(msg),
        _ => CliError::Data(msg),
    }
}

fn eval_error(path: &Path, e: EvalError) -> CliError {
    let msg = format!("{}: {e}", path.display());
    if e.is_io() {
        CliError::Io(msg)
    } else {
        CliError::Data(msg)
    }
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Io(format!("cannot open {}: {e}", path.display())))
}

pub fn load_vectors(path: &Path, normalize: bool) -> Result<EmbeddingMatrix, CliError> {
    let matrix = load_word2vec_text(open(path)?).map_err(|e| embedding_error(path, e))?;
    if !normalize {
        return Ok(matrix);
    }
    let (normalized, zero_tokens) = matrix.l2_normalized();
    if !zero_tokens.is_empty() {
        eprintln!(
            "warning: {} zero vector(s) left unnormalized",
            zero_tokens.len()
        );
    }
    Ok(normalized)
}

pub fn read_edges(
    path: &Path,
    format: EdgeFormat,
    filter: Option<&RelationSet>,
) -> Result<Vec<RelationEdge>, CliError> {
    parse_edges(open(path)?, format, filter).map_err(|e| lexicon_error(path, e))
}

pub fn read_benchmark(
    path: &Path,
    columns: &ColumnMap,
) -> Result<Vec<lexfit::BenchmarkPair>, CliError> {
    let file =
        File::open(path).map_err(|e| CliError::Io(format!("cannot open {}: {e}", path.display())))?;
    lexfit::load_benchmark(BufReader::new(file), columns).map_err(|e| eval_error(path, e))
}

pub fn eval_data_error(path: &Path, e: EvalError) -> CliError {
    eval_error(path, e)
}

/// Parses a comma-separated relation list; empty input is a data error.
pub fn parse_relation_list(text: &str) -> Result<RelationSet, CliError> {
    let set: RelationSet = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    if set.is_empty() {
        return Err(CliError::Data("empty relation set".to_string()));
    }
    Ok(set)
}

/// Parses the ablation set syntax: semicolon-separated sets of `+`-joined
/// relation labels.
pub fn parse_sets(text: &str) -> Result<Vec<RelationSet>, CliError> {
    let mut sets = Vec::new();
    for chunk in text.split(';') {
        let chunk = chunk.trim();
        if chunk.is_empty() {
            continue;
        }
        let set: RelationSet = chunk
            .split('+')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .collect();
        if set.is_empty() {
            return Err(CliError::Data(format!("empty relation set in {chunk:?}")));
        }
        sets.push(set);
    }
    if sets.is_empty() {
        return Err(CliError::Data("empty relation set".to_string()));
    }
    Ok(sets)
}

/// Parses `--columns Mean,Term1,Term2,CUI1,CUI2[,Category]`.
pub fn parse_columns(text: Option<&str>) -> Result<ColumnMap, CliError> {
    let Some(text) = text else {
        return Ok(ColumnMap::default());
    };
    let fields: Vec<&str> = text.split(',').map(str::trim).collect();
    if fields.len() != 5 && fields.len() != 6 {
        return Err(CliError::Data(format!(
            "--columns expects 5 or 6 comma-separated names, got {}",
            fields.len()
        )));
    }
    if fields.iter().any(|f| f.is_empty()) {
        return Err(CliError::Data("--columns contains an empty name".to_string()));
    }
    Ok(ColumnMap {
        mean: fields[0].to_string(),
        term1: fields[1].to_string(),
        term2: fields[2].to_string(),
        cui1: fields[3].to_string(),
        cui2: fields[4].to_string(),
        category: fields.get(5).map(|s| s.to_string()),
    })
}
