use std::collections::BTreeMap;
use std::fs;

use lexfit::{ablate, BenchmarkPair, RelationEdge, RelationSet};

use crate::cli::AblateArgs;
use crate::io_util::{
    eval_data_error, load_vectors, parse_columns, parse_sets, read_benchmark, read_edges, CliError,
};

pub fn run(args: &AblateArgs) -> Result<(), CliError> {
    let config = args.solver.config();
    config.validate()?;
    let columns = parse_columns(args.columns.as_deref())?;
    let sets = parse_sets(&args.sets)?;
    let union: RelationSet = sets
        .iter()
        .fold(RelationSet::default(), |acc, set| acc.union(set));

    let matrix = load_vectors(&args.vectors, args.normalize)?;
    let edges = read_edges(&args.lexicon, args.lexicon_format, Some(&union))?;
    // Relations named in a set but absent from the file stay out of the map,
    // which makes ablate reject them as unknown.
    let mut edges_by_relation: BTreeMap<String, Vec<RelationEdge>> = BTreeMap::new();
    for edge in edges {
        edges_by_relation
            .entry(edge.rel.clone())
            .or_default()
            .push(edge);
    }

    let mut benchmarks: Vec<(String, Vec<BenchmarkPair>)> = Vec::new();
    for path in &args.benchmark {
        benchmarks.push((path.display().to_string(), read_benchmark(path, &columns)?));
    }

    let table = ablate(&matrix, &edges_by_relation, &sets, &benchmarks, &config)
        .map_err(|e| eval_data_error(&args.lexicon, e))?;

    if args.verbose {
        for row in &table.rows {
            for ((name, _), report) in benchmarks.iter().zip(&row.reports) {
                eprintln!(
                    "{}: {} scored {}/{} rho={}",
                    row.label, name, report.n_scored, report.n_total, report.rho
                );
            }
        }
    }

    let tsv = table.to_tsv();
    match &args.out {
        Some(path) => fs::write(path, &tsv)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?,
        None => {
            if !args.json {
                print!("{tsv}");
            }
        }
    }
    if args.json {
        println!(
            "{}",
            serde_json::to_string(&table).expect("table serializes")
        );
    }
    Ok(())
}
