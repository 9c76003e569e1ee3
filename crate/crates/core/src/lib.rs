//! Retrofit pre-trained concept vectors to a relation-typed lexicon graph and
//! score the result against human similarity/relatedness benchmarks.
//!
//! The pipeline has four stages, one module each:
//!
//! 1. [`embedding`] — load/save dense vectors in the word2vec text format.
//! 2. [`lexicon`] — parse typed concept relations (TSV or MRREL-style RRF
//!    rows), filter them by relation label, and build an undirected one-step
//!    neighborhood graph restricted to the embedding vocabulary.
//! 3. [`retrofit`] — pull each vector toward its graph neighbors while
//!    anchoring it to its original value, by iterative per-node updates.
//!    A dense direct solver is included as an independent cross-check.
//! 4. [`eval`] — cosine-score benchmark concept pairs, rank-correlate with
//!    mean human ratings (Spearman, average ranks for ties), and run
//!    relation-set ablations.

pub mod embedding;
pub mod eval;
pub mod lexicon;
pub mod retrofit;

pub use embedding::{load_word2vec_text, save_word2vec_text, EmbeddingError, EmbeddingMatrix};
pub use eval::{
    ablate, cosine, evaluate, load_benchmark, score_pairs, spearman, AblationRow, AblationTable,
    BenchmarkPair, CategoryStat, ColumnMap, EvalError, EvalReport, SkipReason, Skipped,
};
pub use lexicon::{
    build_graph, parse_edges, parse_rrf_edges, parse_tsv_edges, EdgeFormat, LexiconError,
    LexiconGraph, RelationEdge, RelationSet,
};
pub use retrofit::{
    beta, exact_solve, objective, retrofit, retrofit_sweep, BetaPolicy, RetrofitConfig,
    RetrofitError, RetrofitResult, StationarityMode, UpdateMode,
};
