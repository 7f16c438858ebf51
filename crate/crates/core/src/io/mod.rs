//! Configuration files and CSV output.

mod config;
mod output;

pub use config::{
    bundled, bundled_names, external_key, external_param, load_config, parse_config, AxisEntry, ConfigError,
    ConfigFile, FreeEntry, IntegrationSection, ModelSection, PulseSection, RamanName, RamanSetting, ReadoutName,
    RunConfig, ShapeName, TaskSection,
};
pub use output::{comparison_csv, fmt_num, optimum_csv, sweep_csv, trajectory_csv, write_atomic, NA};
