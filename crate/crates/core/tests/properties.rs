//! Property tests over the public API: format round-trips, graph set
//! semantics, rank and scale invariances.

use std::collections::BTreeMap;
use std::io::Cursor;

use proptest::collection::vec;
use proptest::prelude::*;

use lexfit::{
    ablate, build_graph, cosine, load_word2vec_text, parse_tsv_edges, save_word2vec_text,
    spearman, BenchmarkPair, EmbeddingMatrix, RelationEdge, RelationSet, RetrofitConfig,
};

fn arb_matrix() -> impl Strategy<Value = EmbeddingMatrix> {
    (1usize..6).prop_flat_map(|dim| {
        (
            proptest::collection::btree_set("[a-z]{1,6}", 1..12),
            Just(dim),
        )
            .prop_flat_map(move |(tokens, dim)| {
                let n = tokens.len();
                (
                    Just(tokens),
                    vec(
                        prop_oneof![
                            -1.0e6..1.0e6f64,
                            Just(0.0f64),
                            Just(-0.0f64),
                            Just(0.5f64),
                            Just(-3.25f64),
                        ],
                        n * dim,
                    ),
                )
                    .prop_map(move |(tokens, values)| {
                        let entries: Vec<(String, Vec<f64>)> = tokens
                            .into_iter()
                            .zip(values.chunks(dim))
                            .map(|(t, chunk)| (t, chunk.to_vec()))
                            .collect();
                        EmbeddingMatrix::from_entries(dim, entries).unwrap()
                    })
            })
    })
}

proptest! {
    /// save∘load is the identity on entries, order, and exact bits.
    #[test]
    fn word2vec_roundtrip_exact(matrix in arb_matrix()) {
        let mut bytes = Vec::new();
        save_word2vec_text(&matrix, &mut bytes).unwrap();
        let reloaded = load_word2vec_text(Cursor::new(&bytes)).unwrap();
        prop_assert_eq!(reloaded.dim(), matrix.dim());
        prop_assert_eq!(
            reloaded.tokens().collect::<Vec<_>>(),
            matrix.tokens().collect::<Vec<_>>()
        );
        for (token, row) in matrix.iter() {
            let other = reloaded.get(token).unwrap();
            for (a, b) in row.iter().zip(other) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }

        // And saving again reproduces the file byte for byte.
        let mut again = Vec::new();
        save_word2vec_text(&reloaded, &mut again).unwrap();
        prop_assert_eq!(&bytes, &again);
    }

    /// Normalizing twice equals normalizing once, componentwise within 1e-12.
    #[test]
    fn l2_normalize_idempotent(matrix in arb_matrix()) {
        let (once, _) = matrix.l2_normalized();
        let (twice, _) = once.l2_normalized();
        for (token, row) in once.iter() {
            let other = twice.get(token).unwrap();
            for (a, b) in row.iter().zip(other) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }

    /// Cosine is unchanged by normalization for nonzero pairs.
    #[test]
    fn cosine_survives_normalization(matrix in arb_matrix()) {
        let (normalized, zeros) = matrix.l2_normalized();
        let tokens: Vec<&str> = matrix.tokens().collect();
        for (i, a) in tokens.iter().enumerate() {
            for b in &tokens[i + 1..] {
                if zeros.iter().any(|z| z == a || z == b) {
                    continue;
                }
                let before = cosine(matrix.get(a).unwrap(), matrix.get(b).unwrap()).unwrap();
                let after =
                    cosine(normalized.get(a).unwrap(), normalized.get(b).unwrap()).unwrap();
                prop_assert!((before - after).abs() < 1e-12);
            }
        }
    }
}

fn arb_edges() -> impl Strategy<Value = Vec<RelationEdge>> {
    vec(
        ("[a-e]", prop_oneof![Just("RN"), Just("RO"), Just("SY")], "[a-e]"),
        0..30,
    )
    .prop_map(|triples| {
        triples
            .into_iter()
            .map(|(a, rel, b)| RelationEdge::new(a, rel, b).unwrap())
            .collect()
    })
}

const VOCAB: [&str; 5] = ["a", "b", "c", "d", "e"];

proptest! {
    /// b ∈ adj(a) ⇔ a ∈ adj(b), and never a ∈ adj(a).
    #[test]
    fn graph_symmetric_irreflexive(edges in arb_edges()) {
        let graph = build_graph(&edges, VOCAB);
        for node in graph.nodes() {
            let neighbors = graph.neighborhood(node);
            prop_assert!(!neighbors.contains(&node));
            for neighbor in neighbors {
                prop_assert!(graph.neighborhood(neighbor).contains(&node));
            }
        }
    }

    /// The graph does not depend on edge list order, and the undirected edge
    /// count never exceeds the input edge count.
    #[test]
    fn graph_permutation_invariant(edges in arb_edges(), seed in any::<u64>()) {
        let graph = build_graph(&edges, VOCAB);
        prop_assert!(graph.edge_count() <= edges.len());
        let mut shuffled = edges.clone();
        // Cheap deterministic shuffle.
        let n = shuffled.len();
        if n > 1 {
            let mut state = seed;
            for i in (1..n).rev() {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                shuffled.swap(i, (state % (i as u64 + 1)) as usize);
            }
        }
        prop_assert_eq!(build_graph(&shuffled, VOCAB), graph);
    }

    /// Filtering with the union of two relation sets yields the union of the
    /// individually filtered graphs' edge sets.
    #[test]
    fn union_filter_is_edge_union(edges in arb_edges()) {
        let mut text = String::new();
        for e in &edges {
            text.push_str(&format!("{}\t{}\t{}\n", e.cui1, e.rel, e.cui2));
        }
        let parse = |labels: &[&str]| {
            parse_tsv_edges(Cursor::new(text.as_bytes()), &RelationSet::new(labels.to_vec()))
                .unwrap()
        };
        let rn = build_graph(&parse(&["RN"]), VOCAB);
        let ro = build_graph(&parse(&["RO"]), VOCAB);
        let both = build_graph(&parse(&["RN", "RO"]), VOCAB);

        let mut expected: Vec<(String, String)> = rn
            .edges()
            .chain(ro.edges())
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        expected.sort();
        expected.dedup();
        let got: Vec<(String, String)> = both
            .edges()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        prop_assert_eq!(got, expected);
    }
}

proptest! {
    /// Spearman only sees ranks: strictly increasing transforms do not
    /// change it, and swapping the arguments does not either. Values are
    /// distinct small integers so the affine transform is exact.
    #[test]
    fn spearman_rank_and_symmetry_invariance(
        n in 3usize..20,
        scale in 1i64..500,
        shift in -1000i64..1000,
        seed in any::<u64>(),
    ) {
        let shuffled = |salt: u64| -> Vec<f64> {
            let mut values: Vec<f64> = (0..n as i64).map(|v| v as f64).collect();
            let mut state = seed ^ salt;
            for i in (1..n).rev() {
                state = state
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                values.swap(i, (state % (i as u64 + 1)) as usize);
            }
            values
        };
        let xs = shuffled(0x9e3779b97f4a7c15);
        let ys = shuffled(0x517cc1b727220a95);
        let rho = spearman(&xs, &ys).unwrap();
        let transformed: Vec<f64> = xs.iter().map(|v| v * scale as f64 + shift as f64).collect();
        prop_assert_eq!(spearman(&transformed, &ys).unwrap(), rho);
        prop_assert_eq!(spearman(&ys, &xs).unwrap(), rho);
        let negated: Vec<f64> = ys.iter().map(|v| -v).collect();
        prop_assert_eq!(spearman(&xs, &negated).unwrap(), -rho);
    }
}

#[test]
fn ablation_baseline_matches_direct_evaluate() {
    let matrix = EmbeddingMatrix::from_entries(
        2,
        [
            ("A", vec![1.0, 0.0]),
            ("B", vec![0.8, 0.6]),
            ("C", vec![0.0, 1.0]),
            ("D", vec![-0.6, 0.8]),
        ],
    )
    .unwrap();
    let pair = |a: &str, b: &str, r: f64| BenchmarkPair {
        term1: a.to_string(),
        term2: b.to_string(),
        cui1: a.to_string(),
        cui2: b.to_string(),
        mean_rating: r,
        category: None,
    };
    let pairs = vec![
        pair("A", "B", 8.0),
        pair("A", "C", 4.0),
        pair("A", "D", 1.0),
        pair("B", "C", 6.0),
    ];
    let mut edges = BTreeMap::new();
    edges.insert(
        "RN".to_string(),
        vec![RelationEdge::new("A", "RN", "B").unwrap()],
    );
    let table = ablate(
        &matrix,
        &edges,
        &[RelationSet::new(["RN"])],
        &[("bench".to_string(), pairs.clone())],
        &RetrofitConfig::default(),
    )
    .unwrap();
    let direct = lexfit::evaluate(&matrix, &pairs).unwrap();
    assert_eq!(table.rows[0].reports[0], direct);
}
