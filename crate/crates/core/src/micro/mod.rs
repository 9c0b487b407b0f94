//! Direct simulation of the ε-scaled pore-scale problem on the perforated domain.

mod average;
mod run;

pub use average::{average_micro_field, coarse_average, Averaging, CoarseField, CoarseGrid, MicroField, NEGLIGIBLE_NORM};
pub use run::{run_micro, step_micro, MicroProblem, MicroRun, MicroState};
