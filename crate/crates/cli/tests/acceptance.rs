//! Acceptance criteria, one PASS/FAIL line each. Criteria run one at a time
//! so each time budget measures a single criterion.
//!
//! Positional arguments filter by id (`3`, `c03`) or by a word of the title;
//! flags passed through by `cargo test` are ignored.

use std::process::ExitCode;

use chernloc_cli::acceptance::{run_criterion, CRITERIA};

const SEED: u64 = 0;

fn selected(id: u32, title: &str, filters: &[String]) -> bool {
    filters.is_empty()
        || filters.iter().any(|f| {
            match f.trim_start_matches(['c', 'C']).parse::<u32>() {
                Ok(n) => n == id,
                Err(_) => title.contains(f.as_str()),
            }
        })
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let filters: Vec<String> = args.iter().filter(|a| !a.starts_with('-')).cloned().collect();
    if args.iter().any(|a| a == "--list") {
        for (id, title, _) in CRITERIA {
            if selected(id, title, &filters) {
                println!("c{id:02} {title}: test");
            }
        }
        return ExitCode::SUCCESS;
    }

    let mut failed = 0;
    let mut ran = 0;
    for (id, title, _) in CRITERIA {
        if !selected(id, title, &filters) {
            continue;
        }
        let outcome = run_criterion(id, SEED);
        println!("{}", outcome.line());
        ran += 1;
        if !outcome.passed {
            failed += 1;
        }
    }
    println!("\nacceptance: {} passed, {failed} failed", ran - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
