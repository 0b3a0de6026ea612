//! Runs the ten acceptance criteria and prints one line per criterion.
//! Plain `main` so the lines show up without `--nocapture`.

use std::process::ExitCode;

use bergman_core::acceptance::{run_criterion, CRITERIA};

fn main() -> ExitCode {
    let mut failed = Vec::new();
    for (id, _) in CRITERIA {
        let result = run_criterion(id);
        println!("{}", result.line());
        if !result.pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", CRITERIA.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
