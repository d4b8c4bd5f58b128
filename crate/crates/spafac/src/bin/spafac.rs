use std::process::ExitCode;

use spafac::cli::{parse_args, run, USAGE};

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.is_empty() || args.iter().any(|a| a == "--help" || a == "-h") {
        print!("{USAGE}");
        return ExitCode::SUCCESS;
    }
    let config = match parse_args(args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("spafac: {e}");
            eprintln!("run `spafac --help` for usage");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(&config) {
        Ok(outcome) => {
            let b = &outcome.bundle;
            println!(
                "{}: {} x {}, rank {}, inertia {:.6}",
                b.method, b.rows, b.cols, b.rank, b.inertia
            );
            for (l, (d, p)) in b
                .singular_values
                .iter()
                .zip(b.percent_inertia.iter())
                .enumerate()
            {
                println!("  dim {}: delta {:.6} ({:.2}% of inertia)", l + 1, d, p);
            }
            if let Some(c) = &b.classification {
                println!(
                    "  classification accuracy {:.3} (chance {:.3})",
                    c.overall_accuracy, c.chance_level
                );
            }
            for w in &b.warnings {
                eprintln!("warning: {w}");
            }
            for path in &outcome.written {
                println!("wrote {}", path.display());
            }
            if !b.converged {
                // Outputs are on disk; the exit code still flags the issue.
                return ExitCode::from(4);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("spafac: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
