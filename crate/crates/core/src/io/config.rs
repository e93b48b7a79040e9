use serde::{Deserialize, Serialize};

use crate::argand::{Eq10Options, LoopOptions, SweepOptions};
use crate::lpdos::ProbeSettings;
use crate::network::{
    three_prong_preset, Network, NetworkError, ThreeProngParams, FIG3_ENERGY, FIG3_U1_RANGE, KSCAN_K_RANGE, KSCAN_U1,
};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("PARSE_ERROR at {line}:{column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("UNKNOWN_KEY `{key}` at {line}:{column}: {message}")]
    UnknownKey { key: String, line: usize, column: usize, message: String },
    #[error("MISSING_REQUIRED `{key}`: {message}")]
    MissingRequired { key: String, message: String },
}

impl ConfigError {
    pub fn code(&self) -> &'static str {
        match self {
            ConfigError::Parse { .. } => "PARSE_ERROR",
            ConfigError::UnknownKey { .. } => "UNKNOWN_KEY",
            ConfigError::MissingRequired { .. } => "MISSING_REQUIRED",
        }
    }
}

pub const MAX_SEED: u64 = i64::MAX as u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Smatrix,
    ScanEnergy,
    ArgandSweep,
    LpdosMap,
    Eq10Scan,
    Verify,
}

impl Command {
    pub const ALL: [Command; 6] =
        [Command::Smatrix, Command::ScanEnergy, Command::ArgandSweep, Command::LpdosMap, Command::Eq10Scan, Command::Verify];

    pub fn name(self) -> &'static str {
        match self {
            Command::Smatrix => "smatrix",
            Command::ScanEnergy => "scan-energy",
            Command::ArgandSweep => "argand-sweep",
            Command::LpdosMap => "lpdos-map",
            Command::Eq10Scan => "eq10-scan",
            Command::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PresetName {
    ThreeProng,
}

/// Either a named preset with parameters, or an explicit network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<PresetName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ThreeProngParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub custom: Option<Network>,
}

impl NetworkSpec {
    pub fn three_prong(params: ThreeProngParams) -> Self {
        NetworkSpec { preset: Some(PresetName::ThreeProng), params: Some(params), custom: None }
    }

    pub fn is_preset(&self) -> bool {
        self.preset.is_some()
    }

    /// Preset parameters with defaults applied, if this is a preset.
    pub fn preset_params(&self) -> Option<ThreeProngParams> {
        self.preset.map(|_| self.params.clone().unwrap_or_default())
    }

    pub fn build(&self) -> Result<Network, NetworkError> {
        match (&self.preset, &self.custom) {
            (Some(PresetName::ThreeProng), _) => three_prong_preset(&self.params.clone().unwrap_or_default()),
            (None, Some(net)) => {
                net.ensure_valid()?;
                Ok(net.clone())
            }
            (None, None) => unreachable!("checked at parse time"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmatrixConfig {
    pub energies: Vec<f64>,
}

impl Default for SmatrixConfig {
    fn default() -> Self {
        SmatrixConfig { energies: vec![FIG3_ENERGY] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanEnergyConfig {
    pub range: [f64; 2],
    pub points: usize,
}

impl Default for ScanEnergyConfig {
    fn default() -> Self {
        ScanEnergyConfig { range: [0.25, 100.0], points: 400 }
    }
}

/// Swept quantity of an Argand sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepParameter {
    /// Region VI potential of the preset, at fixed energy.
    U1,
    /// Lead wavenumber, network fixed.
    K,
    /// Potential of edge `target`, at fixed energy.
    EdgePotential,
    /// Delta strength of vertex `target`, at fixed energy.
    VertexDelta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArgandConfig {
    pub alpha: String,
    pub gamma: String,
    pub parameter: SweepParameter,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    /// Start and end; the sweep runs from the first to the second.
    pub range: [f64; 2],
    /// Ignored for `parameter = "k"`.
    pub energy: f64,
    pub sweep: SweepOptions,
    pub loops: LoopOptions,
}

impl Default for ArgandConfig {
    fn default() -> Self {
        ArgandConfig {
            alpha: "3".into(),
            gamma: "1".into(),
            parameter: SweepParameter::U1,
            target: None,
            range: [FIG3_U1_RANGE.0, FIG3_U1_RANGE.1],
            energy: FIG3_ENERGY,
            sweep: SweepOptions::default(),
            loops: LoopOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LpdosMapConfig {
    pub energies: Vec<f64>,
    /// Empty means every edge.
    pub edges: Vec<String>,
    /// Probe centres at the midpoints of this many equal cells per edge.
    pub points_per_edge: usize,
    /// Empty means every lead.
    pub gammas: Vec<String>,
    pub probe: ProbeSettings,
}

impl Default for LpdosMapConfig {
    fn default() -> Self {
        LpdosMapConfig {
            energies: vec![FIG3_ENERGY],
            edges: Vec::new(),
            points_per_edge: 8,
            gammas: vec!["1".into()],
            probe: ProbeSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Eq10Config {
    pub alpha: String,
    pub gamma: String,
    pub k_range: [f64; 2],
    /// Unprimed parameter value; the network comes from the preset with
    /// `u1` replaced.
    pub u1: f64,
    pub delta_u1: f64,
    pub options: Eq10Options,
}

impl Default for Eq10Config {
    fn default() -> Self {
        Eq10Config {
            alpha: "3".into(),
            gamma: "1".into(),
            k_range: [KSCAN_K_RANGE.0, KSCAN_K_RANGE.1],
            u1: KSCAN_U1,
            delta_u1: 1e-2,
            options: Eq10Options::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub random_networks: usize,
    pub sum_rule_points: usize,
    pub property_cases: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { random_networks: 100, sum_rule_points: 50, property_cases: 64 }
    }
}

/// One run: a network, a command, and the parameters of every command.
/// Sections for commands other than the one run are accepted and echoed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    /// CSV file name inside the output directory. Defaults to
    /// `<command>.csv`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// At most [`MAX_SEED`], the largest TOML integer.
    #[serde(default)]
    pub seed: u64,
    pub network: NetworkSpec,
    #[serde(default)]
    pub smatrix: SmatrixConfig,
    #[serde(default)]
    pub scan_energy: ScanEnergyConfig,
    #[serde(default)]
    pub argand_sweep: ArgandConfig,
    #[serde(default)]
    pub lpdos_map: LpdosMapConfig,
    #[serde(default)]
    pub eq10_scan: Eq10Config,
    #[serde(default)]
    pub verify: VerifyConfig,
}

impl RunConfig {
    /// The three-prong preset with every default.
    pub fn preset() -> Self {
        RunConfig {
            command: None,
            output: None,
            workers: None,
            seed: 0,
            network: NetworkSpec::three_prong(ThreeProngParams::default()),
            smatrix: Default::default(),
            scan_energy: Default::default(),
            argand_sweep: Default::default(),
            lpdos_map: Default::default(),
            eq10_scan: Default::default(),
            verify: Default::default(),
        }
    }

    /// Canonical TOML with every default written out.
    pub fn to_toml(&self) -> String {
        let mut full = self.clone();
        if let Some(p) = full.network.preset_params() {
            full.network.params = Some(p);
        }
        toml::to_string(&full).unwrap_or_else(|e| panic!("config not serializable: {e}"))
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| classify(text, &e))?;
    match (&cfg.network.preset, &cfg.network.custom) {
        (None, None) => Err(ConfigError::MissingRequired {
            key: "network.preset".into(),
            message: "set `network.preset` or give `[network.custom]`".into(),
        }),
        (Some(_), Some(_)) => {
            let (line, column) = locate(text, "custom");
            Err(ConfigError::Parse { line, column, message: "`network.preset` and `network.custom` are exclusive".into() })
        }
        (None, Some(_)) if cfg.network.params.is_some() => {
            let (line, column) = locate(text, "params");
            Err(ConfigError::Parse { line, column, message: "`network.params` only applies to a preset".into() })
        }
        _ => {
            let mut cfg = cfg;
            cfg.network.params = cfg.network.preset_params();
            Ok(cfg)
        }
    }
}

fn classify(text: &str, e: &toml::de::Error) -> ConfigError {
    let message = e.message().to_string();
    let (line, column) = e.span().map(|s| line_col(text, s.start)).unwrap_or((0, 0));
    if let Some(key) = backticked(&message, "unknown field `") {
        return ConfigError::UnknownKey { key, line, column, message };
    }
    if let Some(key) = backticked(&message, "missing field `") {
        return ConfigError::MissingRequired { key, message };
    }
    ConfigError::Parse { line, column, message }
}

fn backticked(message: &str, prefix: &str) -> Option<String> {
    let rest = &message[message.find(prefix)? + prefix.len()..];
    Some(rest[..rest.find('`')?].to_string())
}

/// 1-based line and column of byte offset `pos`.
fn line_col(text: &str, pos: usize) -> (usize, usize) {
    let before = &text[..pos.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

fn locate(text: &str, needle: &str) -> (usize, usize) {
    text.find(needle).map_or((0, 0), |p| line_col(text, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::BarrierModel;
    use proptest::prelude::*;

    #[test]
    fn minimal_preset_gets_defaults() {
        let cfg = parse_config("[network]\npreset = \"three-prong\"\n").unwrap();
        assert_eq!(cfg, RunConfig::preset());
        let echo = cfg.to_toml();
        assert!(echo.contains("delta_step = 0.02"));
        assert!(echo.contains("l5 = 2.0"));
        assert_eq!(parse_config(&echo).unwrap().network.preset_params(), cfg.network.preset_params());
    }

    #[test]
    fn misspelled_key_named() {
        let err = parse_config("[network]\npreset = \"three-prong\"\n[argand_sweep]\ndelta_stpe = 0.1\n").unwrap_err();
        assert_eq!(err.code(), "UNKNOWN_KEY");
        match err {
            ConfigError::UnknownKey { key, line, .. } => {
                assert_eq!(key, "delta_stpe");
                assert_eq!(line, 4);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn missing_network() {
        assert_eq!(parse_config("seed = 3\n").unwrap_err().code(), "MISSING_REQUIRED");
        assert_eq!(parse_config("[network]\n").unwrap_err().code(), "MISSING_REQUIRED");
    }

    #[test]
    fn syntax_error_has_position() {
        match parse_config("seed = 3\n[network\n").unwrap_err() {
            ConfigError::Parse { line, column, .. } => assert_eq!((line, column), (2, 9)),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn wrong_type_is_parse_error() {
        let err = parse_config("seed = \"x\"\n[network]\npreset = \"three-prong\"\n").unwrap_err();
        assert_eq!(err.code(), "PARSE_ERROR");
    }

    #[test]
    fn custom_network() {
        let text = r#"
command = "smatrix"
[network.custom]
vertices = [{ id = "a", delta_strength = 0.0 }, { id = "b", delta_strength = 1.5 }]
edges = [{ id = "w", from = "a", to = "b", length = 2.0, potential = 0.0 }]
leads = [{ id = "1", vertex = "a" }, { id = "2", vertex = "b" }]
"#;
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.command, Some(Command::Smatrix));
        assert_eq!(cfg.network.build().unwrap().edges.len(), 1);
        assert_eq!(parse_config(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn preset_and_custom_exclusive() {
        let text = "[network]\npreset = \"three-prong\"\n[network.custom]\nvertices = []\nedges = []\nleads = []\n";
        assert_eq!(parse_config(text).unwrap_err().code(), "PARSE_ERROR");
    }

    fn arb_config() -> impl Strategy<Value = RunConfig> {
        (
            (prop::option::of(prop::sample::select(Command::ALL.to_vec())), prop::option::of(1usize..16), 0..=MAX_SEED),
            (-1e3f64..1e3, 0.1f64..5.0, prop::bool::ANY),
            (prop::collection::vec(0.01f64..100.0, 0..5), 1usize..1000, -1e6f64..1e6),
            (1e-6f64..1.0, 2usize..200, prop::option::of(1e-6f64..1e3), 1e-9f64..1e-2),
            (any::<f64>().prop_filter("finite", |x| x.is_finite()), prop::sample::select(vec!["1", "2", "3", "x y"])),
        )
            .prop_map(|(a, b, c, d, e)| {
                let mut cfg = RunConfig::preset();
                cfg.command = a.0;
                cfg.workers = a.1;
                cfg.seed = a.2;
                let mut p = ThreeProngParams { u1: b.0, l5: b.1, ..Default::default() };
                if b.2 {
                    p.barrier = BarrierModel::Delta;
                }
                cfg.network.params = Some(p);
                cfg.smatrix.energies = c.0;
                cfg.scan_energy.points = c.1;
                cfg.eq10_scan.u1 = c.2;
                cfg.argand_sweep.sweep.delta_step = d.0;
                cfg.lpdos_map.points_per_edge = d.1;
                cfg.lpdos_map.probe.delta_u = d.2;
                cfg.eq10_scan.delta_u1 = d.3;
                cfg.argand_sweep.energy = e.0;
                cfg.argand_sweep.alpha = e.1.to_string();
                cfg
            })
    }

    proptest! {
        #[test]
        fn serialize_parse_round_trip(cfg in arb_config()) {
            let text = cfg.to_toml();
            let back = parse_config(&text).unwrap();
            prop_assert_eq!(&back, &cfg);
            prop_assert_eq!(back.to_toml(), text);
        }
    }
}
