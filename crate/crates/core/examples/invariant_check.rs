//! Runs the invariant suite on a diagnostics table written by `snpp macro` or `snpp micro`.
//!
//! cargo run --example invariant_check -- out/diagnostics.csv

use snpp::diagnostics::RunDiagnostics;
use snpp::io::parse_diagnostics_csv;
use snpp::verify::run_invariant_suite;

fn main() -> snpp::Result<()> {
    let Some(path) = std::env::args().nth(1) else {
        eprintln!("usage: invariant_check <diagnostics.csv>");
        std::process::exit(1);
    };
    let rows = parse_diagnostics_csv(&std::fs::read_to_string(&path)?)?;
    let diag = RunDiagnostics { rows, lambda: 1.0, volume_additive_start: false, zero_mean_potential: true };
    let report = run_invariant_suite(&diag)?;
    print!("{report}");
    std::process::exit(if report.passed() { 0 } else { 3 });
}
