//! Dense vector store keyed by token, with word2vec text I/O.
//!
//! Tokens are opaque strings: concept identifiers ("C0011849") and plain
//! words go through the same code. A loaded matrix is immutable and can be
//! shared freely across threads; mutation happens through `&mut` only.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("line {line}: malformed header, expected `<count> <dim>`")]
    MalformedHeader { line: usize },
    #[error("dimension must be positive")]
    ZeroDim,
    #[error("embedding matrix must contain at least one entry")]
    Empty,
    #[error("line {line}: empty token")]
    EmptyToken { line: usize },
    #[error("line {line}: token {token:?} contains whitespace")]
    TokenWhitespace { line: usize, token: String },
    #[error("line {line}: duplicate token {token:?}")]
    DuplicateToken { line: usize, token: String },
    #[error("line {line}: component count {found} != dim {expected}")]
    ComponentCount {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: cannot parse component {text:?}")]
    BadComponent { line: usize, text: String },
    #[error("line {line}: non-finite component for token {token:?}")]
    NonFinite { line: usize, token: String },
    #[error("line {line}: more entries than the {declared} declared in the header")]
    TooManyEntries { line: usize, declared: usize },
    #[error("header declares {declared} entries but file has {found}")]
    TooFewEntries { declared: usize, found: usize },
    #[error("vector for token {token:?} has {found} components, expected {expected}")]
    VectorLength {
        token: String,
        expected: usize,
        found: usize,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Token-keyed matrix of dense `f64` vectors, kept in insertion order.
///
/// Invariants, enforced at construction: at least one entry, a fixed
/// positive dimension shared by every vector, unique non-empty tokens
/// without whitespace, and all components finite.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    dim: usize,
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<f64>,
}

impl EmbeddingMatrix {
    /// Builds a matrix from `(token, vector)` pairs, validating every invariant.
    pub fn from_entries<S, I>(dim: usize, entries: I) -> Result<Self, EmbeddingError>
    where
        S: Into<String>,
        I: IntoIterator<Item = (S, Vec<f64>)>,
    {
        if dim == 0 {
            return Err(EmbeddingError::ZeroDim);
        }
        let mut matrix = EmbeddingMatrix {
            dim,
            tokens: Vec::new(),
            index: HashMap::new(),
            data: Vec::new(),
        };
        for (line, (token, vector)) in entries.into_iter().enumerate() {
            // Line numbers here mirror the file layout: header + one entry per line.
            matrix.push_entry(token.into(), &vector, line + 2)?;
        }
        if matrix.tokens.is_empty() {
            return Err(EmbeddingError::Empty);
        }
        Ok(matrix)
    }

    fn push_entry(
        &mut self,
        token: String,
        vector: &[f64],
        line: usize,
    ) -> Result<(), EmbeddingError> {
        if token.is_empty() {
            return Err(EmbeddingError::EmptyToken { line });
        }
        if token.chars().any(char::is_whitespace) {
            return Err(EmbeddingError::TokenWhitespace { line, token });
        }
        if vector.len() != self.dim {
            return Err(EmbeddingError::VectorLength {
                token,
                expected: self.dim,
                found: vector.len(),
            });
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(EmbeddingError::NonFinite { line, token });
        }
        if self.index.contains_key(&token) {
            return Err(EmbeddingError::DuplicateToken { line, token });
        }
        self.index.insert(token.clone(), self.tokens.len());
        self.tokens.push(token);
        self.data.extend_from_slice(vector);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Tokens in stored (insertion) order.
    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(String::as_str)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    /// Returns the stored vector, or `None` for an unknown token.
    /// Absence is a value here, never a default vector.
    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.index.get(token).map(|&i| self.row(i))
    }

    pub fn token_index(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token_at(&self, row: usize) -> &str {
        &self.tokens[row]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.dim..(row + 1) * self.dim]
    }

    /// `(token, vector)` pairs in stored order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.as_str(), self.row(i)))
    }

    pub(crate) fn data(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Scales every vector to unit Euclidean norm. Vectors whose norm is
    /// exactly zero are left unchanged; their tokens are returned so the
    /// caller can report them.
    pub fn l2_normalized(&self) -> (EmbeddingMatrix, Vec<String>) {
        let mut out = self.clone();
        let mut zero_tokens = Vec::new();
        for i in 0..self.tokens.len() {
            let start = i * self.dim;
            let row = &mut out.data[start..start + self.dim];
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                zero_tokens.push(self.tokens[i].clone());
            } else {
                for v in row {
                    *v /= norm;
                }
            }
        }
        (out, zero_tokens)
    }
}

/// Reads the word2vec text format: a `<count> <dim>` header line, then one
/// `<token> <c1> ... <c_dim>` line per entry, single-space separated.
/// Both `\n` and `\r\n` are accepted. Every violation is reported with its
/// 1-based line number.
pub fn load_word2vec_text<R: BufRead>(reader: R) -> Result<EmbeddingMatrix, EmbeddingError> {
    let mut lines = reader.lines();
    let header = match lines.next() {
        Some(line) => line?,
        None => return Err(EmbeddingError::MalformedHeader { line: 1 }),
    };
    let header = header.trim_end_matches('\r');
    let mut fields = header.split(' ');
    let (count, dim) = match (fields.next(), fields.next(), fields.next()) {
        (Some(c), Some(d), None) => {
            let count: usize = c
                .parse()
                .map_err(|_| EmbeddingError::MalformedHeader { line: 1 })?;
            let dim: usize = d
                .parse()
                .map_err(|_| EmbeddingError::MalformedHeader { line: 1 })?;
            (count, dim)
        }
        _ => return Err(EmbeddingError::MalformedHeader { line: 1 }),
    };
    if dim == 0 {
        return Err(EmbeddingError::ZeroDim);
    }
    if count == 0 {
        return Err(EmbeddingError::Empty);
    }

    let mut matrix = EmbeddingMatrix {
        dim,
        tokens: Vec::with_capacity(count),
        index: HashMap::with_capacity(count),
        data: Vec::with_capacity(count * dim),
    };
    let mut vector = vec![0.0; dim];
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        if matrix.tokens.len() == count {
            return Err(EmbeddingError::TooManyEntries {
                line: line_no,
                declared: count,
            });
        }
        let line = line?;
        let line = line.trim_end_matches('\r');
        let mut fields = line.split(' ');
        let token = fields.next().unwrap_or("");
        if token.is_empty() {
            return Err(EmbeddingError::EmptyToken { line: line_no });
        }
        if token.chars().any(char::is_whitespace) {
            return Err(EmbeddingError::TokenWhitespace {
                line: line_no,
                token: token.to_string(),
            });
        }
        let mut found = 0usize;
        for field in fields {
            if found < dim {
                let value: f64 = field.parse().map_err(|_| EmbeddingError::BadComponent {
                    line: line_no,
                    text: field.to_string(),
                })?;
                vector[found] = value;
            }
            found += 1;
        }
        if found != dim {
            return Err(EmbeddingError::ComponentCount {
                line: line_no,
                expected: dim,
                found,
            });
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(EmbeddingError::NonFinite {
                line: line_no,
                token: token.to_string(),
            });
        }
        if matrix.index.contains_key(token) {
            return Err(EmbeddingError::DuplicateToken {
                line: line_no,
                token: token.to_string(),
            });
        }
        matrix.index.insert(token.to_string(), matrix.tokens.len());
        matrix.tokens.push(token.to_string());
        matrix.data.extend_from_slice(&vector);
    }
    if matrix.tokens.len() != count {
        return Err(EmbeddingError::TooFewEntries {
            declared: count,
            found: matrix.tokens.len(),
        });
    }
    Ok(matrix)
}

/// Writes the word2vec text format with Unix newlines. Components use the
/// shortest decimal rendering that parses back to the identical value, so
/// `load(save(m))` reproduces `m` exactly.
pub fn save_word2vec_text<W: Write>(
    matrix: &EmbeddingMatrix,
    mut writer: W,
) -> Result<(), EmbeddingError> {
    writeln!(writer, "{} {}", matrix.len(), matrix.dim())?;
    let mut buf = String::new();
    for (token, row) in matrix.iter() {
        buf.clear();
        buf.push_str(token);
        for v in row {
            buf.push(' ');
            buf.push_str(&v.to_string());
        }
        buf.push('\n');
        writer.write_all(buf.as_bytes())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn load(text: &str) -> Result<EmbeddingMatrix, EmbeddingError> {
        load_word2vec_text(Cursor::new(text.as_bytes()))
    }

    #[test]
    fn loads_minimal_file() {
        let m = load("2 2\na 1.0 0.0\nb 0.0 1.0").unwrap();
        assert_eq!(m.dim(), 2);
        assert_eq!(m.len(), 2);
        assert_eq!(m.get("a"), Some(&[1.0, 0.0][..]));
        assert_eq!(m.get("b"), Some(&[0.0, 1.0][..]));
        assert_eq!(m.tokens().collect::<Vec<_>>(), ["a", "b"]);
    }

    #[test]
    fn component_count_mismatch_reports_line() {
        match load("1 3\na 1 2") {
            Err(EmbeddingError::ComponentCount {
                line,
                expected,
                found,
            }) => {
                assert_eq!((line, expected, found), (2, 3, 2));
            }
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn header_must_be_two_fields() {
        assert!(matches!(
            load("2\na 1 0"),
            Err(EmbeddingError::MalformedHeader { line: 1 })
        ));
        assert!(matches!(
            load("x 2\na 1 0"),
            Err(EmbeddingError::MalformedHeader { line: 1 })
        ));
        assert!(matches!(load(""), Err(EmbeddingError::MalformedHeader { line: 1 })));
    }

    #[test]
    fn duplicate_token_rejected() {
        match load("2 1\na 1\na 2") {
            Err(EmbeddingError::DuplicateToken { line, token }) => {
                assert_eq!(line, 3);
                assert_eq!(token, "a");
            }
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn non_finite_component_rejected() {
        assert!(matches!(
            load("1 2\na 1 NaN"),
            Err(EmbeddingError::NonFinite { line: 2, .. })
        ));
        assert!(matches!(
            load("1 2\na inf 0"),
            Err(EmbeddingError::NonFinite { line: 2, .. })
        ));
    }

    #[test]
    fn entry_count_must_match_header() {
        assert!(matches!(
            load("3 1\na 1\nb 2"),
            Err(EmbeddingError::TooFewEntries {
                declared: 3,
                found: 2
            })
        ));
        assert!(matches!(
            load("1 1\na 1\nb 2"),
            Err(EmbeddingError::TooManyEntries {
                line: 3,
                declared: 1
            })
        ));
    }

    #[test]
    fn crlf_accepted_on_read() {
        let m = load("1 2\r\na 1 0\r\n").unwrap();
        assert_eq!(m.get("a"), Some(&[1.0, 0.0][..]));
    }

    #[test]
    fn bad_component_text_rejected() {
        assert!(matches!(
            load("1 2\na 1 x"),
            Err(EmbeddingError::BadComponent { line: 2, .. })
        ));
        // Double spaces produce an empty field, which is not a valid float.
        assert!(matches!(
            load("1 2\na 1  2"),
            Err(EmbeddingError::BadComponent { line: 2, .. })
        ));
    }

    #[test]
    fn tab_inside_token_rejected() {
        assert!(matches!(
            load("1 1\na\tb 1"),
            Err(EmbeddingError::TokenWhitespace { line: 2, .. })
        ));
    }

    #[test]
    fn save_single_entry() {
        let m = EmbeddingMatrix::from_entries(2, [("a", vec![1.0, 0.0])]).unwrap();
        let mut out = Vec::new();
        save_word2vec_text(&m, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "1 2\na 1 0\n");
    }

    #[test]
    fn empty_matrix_cannot_be_built() {
        let entries: Vec<(String, Vec<f64>)> = Vec::new();
        assert!(matches!(
            EmbeddingMatrix::from_entries(2, entries),
            Err(EmbeddingError::Empty)
        ));
    }

    #[test]
    fn get_absent_token() {
        let m = EmbeddingMatrix::from_entries(2, [("a", vec![1.0, 0.0])]).unwrap();
        assert_eq!(m.get("z"), None);
    }

    #[test]
    fn normalize_three_four_five() {
        let m = EmbeddingMatrix::from_entries(2, [("a", vec![3.0, 4.0])]).unwrap();
        let (n, zeros) = m.l2_normalized();
        assert!(zeros.is_empty());
        let row = n.get("a").unwrap();
        assert!((row[0] - 0.6).abs() < 1e-15);
        assert!((row[1] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn normalize_reports_zero_vectors() {
        let m =
            EmbeddingMatrix::from_entries(2, [("a", vec![0.0, 0.0]), ("b", vec![1.0, 1.0])])
                .unwrap();
        let (n, zeros) = m.l2_normalized();
        assert_eq!(zeros, ["a"]);
        assert_eq!(n.get("a"), Some(&[0.0, 0.0][..]));
    }

    #[test]
    fn normalize_is_idempotent() {
        let m = EmbeddingMatrix::from_entries(
            3,
            [
                ("a", vec![3.0, -4.0, 12.0]),
                ("b", vec![0.1, 0.2, 0.3]),
                ("z", vec![0.0, 0.0, 0.0]),
            ],
        )
        .unwrap();
        let (once, _) = m.l2_normalized();
        let (twice, _) = once.l2_normalized();
        for (a, b) in once.data().iter().zip(twice.data()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn roundtrip_preserves_values_and_order() {
        let text = "3 2\nb 0.5 -1\na 1 0\nc 0.1 2500000\n";
        let m = load(text).unwrap();
        let mut out = Vec::new();
        save_word2vec_text(&m, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), text);
    }
}
