//! Micro versus homogenized errors over a list of ε values.
//!
//! cargo run --release --example convergence_study            (short)
//! cargo run --release --example convergence_study -- full    (headline, minutes)

use snpp::io::study_csv;
use snpp::verify::{run_convergence_study, StudyConfig};

fn main() -> snpp::Result<()> {
    let full = std::env::args().nth(1).is_some_and(|a| a == "full");
    let config = if full {
        StudyConfig::neumann_headline()
    } else {
        StudyConfig { eps: vec![0.5, 0.25], t_end: 0.02, macro_h: 1.0 / 32.0, ..StudyConfig::neumann_headline() }
    };
    let study = run_convergence_study(&config)?;
    print!("{}", study_csv(&study));
    if study.non_monotone.is_empty() {
        println!("all errors decrease with eps");
    } else {
        println!("not monotone: {}", study.non_monotone.join(", "));
    }
    Ok(())
}
