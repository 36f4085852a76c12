//! Configuration, figure presets, sweep runner and validation suite behind
//! the `uwoc` binary.

pub mod checks;
pub mod config;
pub mod presets;
pub mod run;

pub use checks::{validate_all, validate_all_with, Hooks, SuiteReport};
pub use config::{parse_config, parse_config_str, to_toml, ConfigError, Metric, RunConfig, Scenario, Violation};
pub use presets::{all_presets, preset, PRESET_NAMES};
pub use run::{evaluate, render_csv, run, Overrides, RunError, RunSummary, ToleranceProfile};

/// Exit status for a successful command.
pub const EXIT_OK: i32 = 0;
/// Exit status for unreadable or invalid configuration.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status for a numerical failure.
pub const EXIT_NUMERICAL: i32 = 3;
/// Exit status when a registered check fails.
pub const EXIT_ACCEPTANCE: i32 = 4;
