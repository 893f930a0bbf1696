//! Operator commands: DLP scanning, policy linting, audit replay and
//! seeded session simulation. Each returns a report carrying its exit code;
//! rendering is left to the caller.

mod corpus;
mod policy_check;
mod replay;
mod scan;
mod simulate;

pub use corpus::{email, luhn_card, ssn, synthetic_corpus};
pub use policy_check::{cmd_policy_check, PolicyCheck};
pub use replay::{cmd_replay, summarize, ReplaySummary};
pub use scan::{
    cmd_scan, is_binary, FileFinding, ScanFailure, ScanReport, Skipped, BINARY_SNIFF_BYTES,
};
pub use simulate::{cmd_simulate, SimulationError, SimulationMetrics, SimulationSpec, TierMetrics};

/// Version of every JSON report emitted by these commands.
pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_FINDINGS: i32 = 2;
