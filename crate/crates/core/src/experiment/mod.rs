//! Declarative experiment runs, CSV/JSON output, the self-test suite and state files.

mod config;
mod rows;
mod run;
mod selftest;
mod statefile;

pub use config::{ChannelFamily, ExperimentConfig, ExperimentKind};
pub use rows::{Provenance, ResultRow, RowStatus, RunMetadata, RunOutput};
pub use run::{run, write_outputs, RunOptions};
pub use selftest::{selftest, SelftestReport, SuiteResult};
pub use statefile::{load_state, measure, save_state, state_from_json, state_to_json, MeasureReport};
