//! Runs every acceptance criterion at desk scale and prints one line per criterion.
//! Set `INTERCHANGE_SUITE_SCALE=smoke` for a quick pass at reduced sizes and
//! `INTERCHANGE_SUITE_REPORT=<file>` to keep the JSON report.

use std::process::ExitCode;

use interchange_cli::suite::{criterion_ids, run_suite, SuiteScale};

fn main() -> ExitCode {
    let scale = match std::env::var("INTERCHANGE_SUITE_SCALE").as_deref() {
        Ok("smoke") => SuiteScale::smoke(),
        _ => SuiteScale::desk(),
    };
    println!("acceptance suite, {} scale", scale.name);
    let report = run_suite(&scale, &criterion_ids(), |outcome| println!("{}", outcome.line()));
    if let Ok(path) = std::env::var("INTERCHANGE_SUITE_REPORT") {
        let text = serde_json::to_string_pretty(&report).expect("report serializes");
        std::fs::write(path, text).expect("report file is writable");
    }
    let passed = report.criteria.iter().filter(|c| c.passed).count();
    println!("{passed}/{} criteria passed", report.criteria.len());
    if report.all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
