//! Sweep orchestration behind the `hfce` binary: dataset synthesis, NMSE
//! scoring and plot-data export.

pub mod eval;
pub mod report;
pub mod stats;
pub mod sweep;
pub mod synth;

pub use eval::{evaluate, EvalReport, SampleError, SplitFilter};
pub use report::{read_summary_csv, write_series};
pub use stats::{summarize, NmseRecord, SummaryRow};
pub use sweep::{Cell, SweepSpec};
pub use synth::{collect_nmse, run_synth, simulate_trial, SynthContext, TrialOutcome};
