//! Run configuration and CSV output.

mod config;
mod csv;

pub use self::config::{
    parse_config, ArgandConfig, Command, ConfigError, Eq10Config, LpdosMapConfig, NetworkSpec, MAX_SEED, PresetName, RunConfig,
    ScanEnergyConfig, SmatrixConfig, SweepParameter, VerifyConfig,
};
pub use self::csv::{fmt_f64, read_csv, write_csv, Cell, CsvError, CsvHeader, CsvTable};
