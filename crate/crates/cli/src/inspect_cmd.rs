use std::collections::BTreeMap;

use lexfit::{build_graph, cosine};

use crate::cli::InspectArgs;
use crate::io_util::{load_vectors, parse_relation_list, read_edges, CliError};

pub fn run(args: &InspectArgs) -> Result<(), CliError> {
    let matrix = load_vectors(&args.vectors, args.normalize)?;
    let mut summary = serde_json::json!({
        "vocab": matrix.len(),
        "dim": matrix.dim(),
    });

    if !args.json {
        println!("vocab: {} tokens, dim {}", matrix.len(), matrix.dim());
    }

    if let Some(lexicon) = &args.lexicon {
        let filter = match &args.relations {
            Some(text) => Some(parse_relation_list(text)?),
            None => None,
        };
        let edges = read_edges(lexicon, args.lexicon_format, filter.as_ref())?;

        let mut relation_counts: BTreeMap<&str, usize> = BTreeMap::new();
        for edge in &edges {
            *relation_counts.entry(edge.rel.as_str()).or_default() += 1;
        }
        let graph = build_graph(&edges, matrix.tokens());
        let mut degree_histogram: BTreeMap<usize, usize> = BTreeMap::new();
        for node in graph.nodes() {
            *degree_histogram.entry(graph.degree(node)).or_default() += 1;
        }

        if args.json {
            summary["graph"] = serde_json::json!({
                "nodes": graph.node_count(),
                "edges": graph.edge_count(),
            });
            summary["relation_counts"] = serde_json::json!(relation_counts);
            summary["degree_histogram"] = serde_json::json!(degree_histogram
                .iter()
                .map(|(degree, count)| (degree.to_string(), *count))
                .collect::<BTreeMap<String, usize>>());
        } else {
            println!("graph: nodes={} edges={}", graph.node_count(), graph.edge_count());
            println!("relation counts:");
            for (relation, count) in &relation_counts {
                println!("  {relation}: {count}");
            }
            println!("degree histogram:");
            for (degree, count) in &degree_histogram {
                println!("  {degree}: {count}");
            }
        }
    }

    if let Some(pair) = &args.pair {
        let (first, second) = (&pair[0], &pair[1]);
        let v1 = matrix
            .get(first)
            .ok_or_else(|| CliError::Data(format!("no vector for {first:?}")))?;
        let v2 = matrix
            .get(second)
            .ok_or_else(|| CliError::Data(format!("no vector for {second:?}")))?;
        // Mirrors the evaluator: identity pairs score exactly 1.
        let score = if first == second {
            1.0
        } else {
            cosine(v1, v2).map_err(|e| CliError::Data(e.to_string()))?
        };
        if args.json {
            summary["pair"] = serde_json::json!({
                "cui1": first,
                "cui2": second,
                "cosine": score,
            });
        } else {
            println!("pair {first} {second}: cosine={score}");
        }
    }

    if args.json {
        println!("{summary}");
    }
    Ok(())
}
