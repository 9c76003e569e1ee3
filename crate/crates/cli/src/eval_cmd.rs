use lexfit::{evaluate, EvalReport};

use crate::cli::EvalArgs;
use crate::io_util::{eval_data_error, load_vectors, parse_columns, read_benchmark, CliError};

pub fn run(args: &EvalArgs) -> Result<(), CliError> {
    let columns = parse_columns(args.columns.as_deref())?;
    let matrix = load_vectors(&args.vectors, args.normalize)?;

    let mut reports: Vec<(String, EvalReport)> = Vec::new();
    for path in &args.benchmark {
        let pairs = read_benchmark(path, &columns)?;
        let report = evaluate(&matrix, &pairs).map_err(|e| eval_data_error(path, e))?;
        if args.verbose {
            for skipped in &report.skipped {
                eprintln!(
                    "skipped {} {}: {}",
                    skipped.pair.cui1, skipped.pair.cui2, skipped.reason
                );
            }
        }
        reports.push((path.display().to_string(), report));
    }

    if args.json {
        let values: Vec<serde_json::Value> = reports
            .iter()
            .map(|(name, report)| {
                let mut value = serde_json::to_value(report).expect("report serializes");
                value["benchmark"] = serde_json::Value::String(name.clone());
                value
            })
            .collect();
        println!("{}", serde_json::Value::Array(values));
    } else {
        for (name, report) in &reports {
            print_report(name, report);
        }
    }
    Ok(())
}

fn print_report(name: &str, report: &EvalReport) {
    println!("benchmark: {name}");
    println!("  n_total: {}", report.n_total);
    println!("  n_scored: {}", report.n_scored);
    println!("  rho: {}", report.rho);
    if let Some(per_category) = &report.per_category {
        for (category, stat) in per_category {
            match stat.rho {
                Some(rho) => println!("  category {category}: n={} rho={rho}", stat.n),
                None => println!("  category {category}: n={} rho=NA", stat.n),
            }
        }
    }
}
