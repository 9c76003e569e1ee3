use std::fs::File;
use std::io::BufWriter;

use lexfit::{build_graph, retrofit, save_word2vec_text};

use crate::cli::RetrofitArgs;
use crate::io_util::{load_vectors, parse_relation_list, read_edges, CliError};

pub fn run(args: &RetrofitArgs) -> Result<(), CliError> {
    let config = args.solver.config();
    config.validate()?;
    let relations = parse_relation_list(&args.relations)?;

    let matrix = load_vectors(&args.vectors, args.normalize)?;
    let edges = read_edges(&args.lexicon, args.lexicon_format, Some(&relations))?;
    let graph = build_graph(&edges, matrix.tokens());
    if args.verbose {
        eprintln!(
            "loaded {} vectors (dim {}), {} edges, graph nodes={} edges={}",
            matrix.len(),
            matrix.dim(),
            edges.len(),
            graph.node_count(),
            graph.edge_count()
        );
    }

    let result = retrofit(&matrix, &graph, &config)?;

    let out = File::create(&args.out)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", args.out.display())))?;
    save_word2vec_text(&result.vectors, BufWriter::new(out))
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", args.out.display())))?;

    eprintln!("sweeps_run: {}", result.sweeps_run);
    eprintln!("converged: {}", result.converged);
    eprintln!("final_displacement: {}", result.final_displacement);
    let trace: Vec<String> = result
        .objective_trace
        .iter()
        .map(f64::to_string)
        .collect();
    eprintln!("objective_trace: {}", trace.join(" "));

    if args.json {
        let summary = serde_json::json!({
            "sweeps_run": result.sweeps_run,
            "converged": result.converged,
            "final_displacement": result.final_displacement,
            "objective_trace": result.objective_trace,
            "out": args.out.display().to_string(),
        });
        println!("{summary}");
    }
    Ok(())
}
