//! Scenario files, run reports and the acceptance suite behind the
//! `chernloc` command.

pub mod acceptance;
pub mod config;
pub mod report;
pub mod scenario;

/// Exit code for unreadable or invalid scenario files.
pub const EXIT_CONFIG: i32 = 64;
