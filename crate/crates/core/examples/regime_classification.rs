//! Prints the limit model selected for a sweep of scaling exponents.
//!
//! cargo run --example regime_classification

use snpp::macroscale::{classify_regime, ScalingRegime};

fn main() {
    for (alpha, beta, gamma) in [(0.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0), (1.0, 2.0, 1.0), (0.0, -1.0, 0.0)] {
        let regime = ScalingRegime::neumann(0.0, alpha, beta, gamma);
        match classify_regime(&regime) {
            Ok(class) => println!("neumann   ({alpha}, {beta}, {gamma}): {class:?}"),
            Err(e) => println!("neumann   ({alpha}, {beta}, {gamma}): {e}"),
        }
    }
    for (alpha, beta, gamma) in [(2.0, 1.0, 1.0), (1.0, 0.0, 0.0), (2.0, 0.0, 1.0)] {
        let regime = ScalingRegime::dirichlet(1.0, alpha, beta, gamma);
        match classify_regime(&regime) {
            Ok(class) => println!("dirichlet ({alpha}, {beta}, {gamma}): {class:?}"),
            Err(e) => println!("dirichlet ({alpha}, {beta}, {gamma}): {e}"),
        }
    }
}
