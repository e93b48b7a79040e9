//! Command orchestration: effective config, computation, CSV output.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::argand::{
    detect_subloops_with, eq10_scan, sweep_parameter, sweep_wavenumber, ArgandError, ArgandTrajectory,
};
use crate::exec::{par_map, with_workers};
use crate::io::{fmt_f64, write_csv, Cell, Command, ConfigError, CsvError, CsvHeader, RunConfig, SweepParameter};
use crate::lpdos::{injectivity, lpdos_all_channels, LpdosError, EPS_MAG};
use crate::network::{EdgePotentialSweep, Network, NetworkError, ThreeProngU1, VertexDeltaSweep};
use crate::scattering::{solve_scattering, ScatteringError, SMatrix};
use crate::verify::{verify, Status};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("INVALID_CONFIG: {0}")]
    Invalid(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Scattering(#[from] ScatteringError),
    #[error(transparent)]
    Lpdos(#[from] LpdosError),
    #[error(transparent)]
    Argand(#[from] ArgandError),
    #[error(transparent)]
    Csv(#[from] CsvError),
    #[error("IO_ERROR: {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl RunError {
    pub fn code(&self) -> &'static str {
        match self {
            RunError::Config(e) => e.code(),
            RunError::Invalid(_) => "INVALID_CONFIG",
            RunError::Network(e) => e.code(),
            RunError::Scattering(e) => e.code(),
            RunError::Lpdos(e) => e.code(),
            RunError::Argand(e) => e.code(),
            RunError::Csv(e) => e.code(),
            RunError::Io { .. } => "IO_ERROR",
        }
    }
}

/// Command-line overrides applied on top of a config file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub command: Option<Command>,
    pub out_dir: PathBuf,
    pub workers: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub command: Command,
    pub output: PathBuf,
    /// Human-readable lines for the terminal.
    pub summary: Vec<String>,
    /// False only when `verify` found a failing check.
    pub passed: bool,
}

/// The config actually run: file contents with command-line overrides.
pub fn effective_config(cfg: &RunConfig, opts: &RunOptions) -> Result<RunConfig, RunError> {
    let mut eff = cfg.clone();
    if opts.command.is_some() {
        eff.command = opts.command;
    }
    if opts.workers.is_some() {
        eff.workers = opts.workers;
    }
    if let Some(s) = opts.seed {
        eff.seed = s;
    }
    if eff.command.is_none() {
        return Err(ConfigError::MissingRequired {
            key: "command".into(),
            message: "give a subcommand or set `command` in the config".into(),
        }
        .into());
    }
    if eff.workers == Some(0) {
        return Err(RunError::Invalid("workers must be at least 1".into()));
    }
    Ok(eff)
}

pub fn run(cfg: &RunConfig, opts: &RunOptions) -> Result<RunReport, RunError> {
    let cfg = effective_config(cfg, opts)?;
    let command = cfg.command.expect("checked");
    let output = opts.out_dir.join(cfg.output.clone().unwrap_or_else(|| format!("{}.csv", command.name())));
    let table = with_workers(cfg.workers, || compute(&cfg, command))?;
    let header = CsvHeader {
        command: command.name().to_string(),
        config_echo: cfg.to_toml(),
        channel_order: table.channels,
        notes: table.notes,
    };
    let columns: Vec<&str> = table.columns.to_vec();
    fs::create_dir_all(&opts.out_dir).map_err(|source| RunError::Io { path: opts.out_dir.clone(), source })?;
    let file = fs::File::create(&output).map_err(|source| RunError::Io { path: output.clone(), source })?;
    write_csv(std::io::BufWriter::new(file), &header, &columns, &table.rows)?;
    Ok(RunReport { command, output, summary: table.summary, passed: table.passed })
}

struct Table {
    channels: Vec<String>,
    columns: &'static [&'static str],
    rows: Vec<Vec<Cell>>,
    notes: Vec<String>,
    summary: Vec<String>,
    passed: bool,
}

impl Table {
    fn new(channels: Vec<String>, columns: &'static [&'static str], rows: Vec<Vec<Cell>>) -> Self {
        Table { channels, columns, rows, notes: Vec::new(), summary: Vec::new(), passed: true }
    }
}

pub const SMATRIX_COLUMNS: &[&str] = &["E", "alpha", "gamma", "re_s", "im_s", "abs2_s", "theta"];
pub const ARGAND_COLUMNS: &[&str] = &["param", "re_s", "im_s", "theta_unwrapped", "abs2_s", "loop_id"];
pub const LPDOS_COLUMNS: &[&str] =
    &["E", "edge", "r", "alpha", "gamma", "rho_lpd", "richardson_error", "nu", "sum_rule_residual"];
pub const EQ10_COLUMNS: &[&str] = &["k", "lhs", "rhs", "flag"];
pub const VERIFY_COLUMNS: &[&str] = &["check", "status", "value", "limit", "detail"];

fn compute(cfg: &RunConfig, command: Command) -> Result<Table, RunError> {
    match command {
        Command::Smatrix => smatrix(cfg),
        Command::ScanEnergy => scan_energy(cfg),
        Command::ArgandSweep => argand(cfg),
        Command::LpdosMap => lpdos_map(cfg),
        Command::Eq10Scan => eq10(cfg),
        Command::Verify => Ok(verify_table(cfg)),
    }
}

fn solve_all(net: &Network, energies: &[f64]) -> Result<Vec<SMatrix>, RunError> {
    Ok(par_map(energies, |&e| solve_scattering(net, e).map(|s| s.smatrix)).into_iter().collect::<Result<_, _>>()?)
}

fn smatrix_rows(mats: &[SMatrix], theta: impl Fn(usize, usize, usize) -> f64) -> Vec<Vec<Cell>> {
    let mut rows = Vec::new();
    for (n, m) in mats.iter().enumerate() {
        for a in 0..m.dim() {
            for g in 0..m.dim() {
                let z = m.elements[(a, g)];
                rows.push(vec![
                    m.energy.into(),
                    m.channels[a].as_str().into(),
                    m.channels[g].as_str().into(),
                    z.re.into(),
                    z.im.into(),
                    z.norm_sqr().into(),
                    theta(n, a, g).into(),
                ]);
            }
        }
    }
    rows
}

fn smatrix(cfg: &RunConfig) -> Result<Table, RunError> {
    let net = cfg.network.build()?;
    let mats = solve_all(&net, &cfg.smatrix.energies)?;
    let rows = smatrix_rows(&mats, |n, a, g| {
        let z = mats[n].elements[(a, g)];
        if z.norm() > EPS_MAG {
            z.arg()
        } else {
            f64::NAN
        }
    });
    let mut t = Table::new(net.channel_order(), SMATRIX_COLUMNS, rows);
    t.summary.push(format!("{} energies, {} channels", mats.len(), net.leads.len()));
    Ok(t)
}

fn scan_energy(cfg: &RunConfig) -> Result<Table, RunError> {
    let net = cfg.network.build()?;
    let [a, b] = cfg.scan_energy.range;
    let n = cfg.scan_energy.points;
    if n < 2 || !(a > 0.0 && b > a) {
        return Err(RunError::Invalid(format!("scan_energy needs 0 < range[0] < range[1] and points >= 2, got [{a}, {b}], {n}")));
    }
    let energies: Vec<f64> =
        (0..n).map(|i| if i == n - 1 { b } else { a + (b - a) * i as f64 / (n - 1) as f64 }).collect();
    let mats = solve_all(&net, &energies)?;
    let dim = net.leads.len();
    // unwrapped phase per (alpha, gamma) along the scan
    let mut theta = vec![vec![f64::NAN; dim * dim]; mats.len()];
    for a in 0..dim {
        for g in 0..dim {
            let values: Vec<_> = mats.iter().map(|m| m.elements[(a, g)]).collect();
            let tr = ArgandTrajectory::from_samples(&energies, &values, EPS_MAG);
            for (n, s) in tr.samples.iter().enumerate() {
                theta[n][a * dim + g] = s.theta.unwrap_or(f64::NAN);
            }
        }
    }
    let rows = smatrix_rows(&mats, |n, a, g| theta[n][a * dim + g]);
    let mut t = Table::new(net.channel_order(), SMATRIX_COLUMNS, rows);
    t.notes.push("theta: unwrapped along E for each (alpha, gamma); NaN where |s| <= eps_mag".into());
    t.summary.push(format!("{} energies in [{a}, {b}]", n));
    Ok(t)
}

fn argand(cfg: &RunConfig) -> Result<Table, RunError> {
    let c = &cfg.argand_sweep;
    let range = (c.range[0], c.range[1]);
    let target = || c.target.clone().ok_or_else(|| RunError::Invalid("argand_sweep.target is required".into()));
    let (traj, channels) = match c.parameter {
        SweepParameter::U1 => {
            let p = cfg
                .network
                .preset_params()
                .ok_or_else(|| RunError::Invalid("parameter = \"u1\" needs a preset network".into()))?;
            let b = ThreeProngU1(p);
            (sweep_parameter(&b, &c.alpha, &c.gamma, range, c.energy, &c.sweep)?, b.build_channels()?)
        }
        SweepParameter::K => {
            let net = cfg.network.build()?;
            (sweep_wavenumber(&net, &c.alpha, &c.gamma, range, &c.sweep)?, net.channel_order())
        }
        SweepParameter::EdgePotential => {
            let net = cfg.network.build()?;
            let ch = net.channel_order();
            let b = EdgePotentialSweep::new(net, target()?)?;
            (sweep_parameter(&b, &c.alpha, &c.gamma, range, c.energy, &c.sweep)?, ch)
        }
        SweepParameter::VertexDelta => {
            let net = cfg.network.build()?;
            let ch = net.channel_order();
            let b = VertexDeltaSweep::new(net, target()?)?;
            (sweep_parameter(&b, &c.alpha, &c.gamma, range, c.energy, &c.sweep)?, ch)
        }
    };
    let loops = detect_subloops_with(&traj, &c.loops);
    let mut loop_id = vec![-1i64; traj.len()];
    // loops come in sweep order, so a shared closure sample ends up with
    // the loop that starts there
    for (m, l) in loops.iter().enumerate() {
        loop_id[l.start_index..=l.end_index].fill(m as i64);
    }
    let rows = traj
        .samples
        .iter()
        .zip(&loop_id)
        .map(|(s, &id)| {
            vec![s.param.into(), s.s.re.into(), s.s.im.into(), s.theta.unwrap_or(f64::NAN).into(), s.mag2.into(), id.into()]
        })
        .collect();
    let mut t = Table::new(channels, ARGAND_COLUMNS, rows);
    t.notes.push(format!("element: s_{{{}{}}}", c.alpha, c.gamma));
    t.notes.push(format!("parameter: {}", traj.parameter_name));
    t.notes.push(format!("samples: {}", traj.len()));
    t.notes.push(format!("max step: {}", fmt_f64(traj.max_step())));
    t.notes.push(format!("loops: {}", loops.len()));
    for (m, l) in loops.iter().enumerate() {
        let opt = |x: Option<f64>| x.map_or("undefined".to_string(), fmt_f64);
        t.notes.push(format!(
            "loop {m}: start={} end={} param_start={} param_end={} closure_gap={} diameter={} winding={} phase_integral={} magnitude_integral={}",
            l.start_index,
            l.end_index,
            fmt_f64(traj.samples[l.start_index].param),
            fmt_f64(traj.samples[l.end_index].param),
            fmt_f64(l.closure_gap),
            fmt_f64(l.diameter),
            l.winding.map_or("undefined".to_string(), |w| w.to_string()),
            opt(l.phase_integral),
            fmt_f64(l.magnitude_integral),
        ));
        t.summary.push(format!(
            "loop {m}: {} .. {}  gap/diameter {:.2e}  winding {}  phase sum {:.2e}",
            traj.samples[l.start_index].param,
            traj.samples[l.end_index].param,
            l.closure_gap / l.diameter,
            l.winding.map_or("?".to_string(), |w| w.to_string()),
            l.phase_integral.unwrap_or(f64::NAN)
        ));
    }
    t.summary.insert(0, format!("{} samples, {} loops", traj.len(), loops.len()));
    Ok(t)
}

trait Channels {
    fn build_channels(&self) -> Result<Vec<String>, NetworkError>;
}

impl Channels for ThreeProngU1 {
    fn build_channels(&self) -> Result<Vec<String>, NetworkError> {
        use crate::network::NetworkBuilder;
        Ok(self.build(self.0.u1)?.channel_order())
    }
}

fn lpdos_map(cfg: &RunConfig) -> Result<Table, RunError> {
    let c = &cfg.lpdos_map;
    let net = cfg.network.build()?;
    let edges: Vec<String> =
        if c.edges.is_empty() { net.edges.iter().map(|e| e.id.clone()).collect() } else { c.edges.clone() };
    let gammas: Vec<String> = if c.gammas.is_empty() { net.channel_order() } else { c.gammas.clone() };
    if c.points_per_edge == 0 {
        return Err(RunError::Invalid("lpdos_map.points_per_edge must be positive".into()));
    }
    let mut items = Vec::new();
    for &e in &c.energies {
        for id in &edges {
            let len = net.edge(id).ok_or_else(|| NetworkError::UnknownEdge(id.clone()))?.length;
            for i in 0..c.points_per_edge {
                let x = len * (i as f64 + 0.5) / c.points_per_edge as f64;
                for g in &gammas {
                    items.push((e, id.clone(), x, g.clone()));
                }
            }
        }
    }
    let results = par_map(&items, |(e, edge, x, g)| -> Result<_, LpdosError> {
        let pos = crate::network::Position::new(edge.clone(), *x);
        let samples = lpdos_all_channels(&net, *e, &pos, g, &c.probe)?;
        let nu = injectivity(&net, *e, &pos, g)?.value;
        Ok((samples, nu))
    });
    let mut rows = Vec::new();
    let mut skipped: BTreeMap<&'static str, usize> = BTreeMap::new();
    for ((e, edge, x, g), res) in items.iter().zip(results) {
        let (samples, nu) = res?;
        let total: Option<f64> = samples.iter().map(|s| s.as_ref().ok().map(|s| s.value)).sum();
        let residual = total.map_or(f64::NAN, |t| (t - nu).abs() / nu.max(c.probe.eps_mag));
        for (lead, s) in net.leads.iter().zip(&samples) {
            let (rho, err) = match s {
                Ok(s) => (s.value, s.richardson_error),
                Err(e) => {
                    *skipped.entry(e.code()).or_default() += 1;
                    (f64::NAN, f64::NAN)
                }
            };
            rows.push(vec![
                (*e).into(),
                edge.as_str().into(),
                (*x).into(),
                lead.id.as_str().into(),
                g.as_str().into(),
                rho.into(),
                err.into(),
                nu.into(),
                residual.into(),
            ]);
        }
    }
    let mut t = Table::new(net.channel_order(), LPDOS_COLUMNS, rows);
    t.notes.push("rho_lpd: NaN where the phase derivative is unavailable (see skipped)".into());
    let skipped_text: Vec<String> = skipped.iter().map(|(k, v)| format!("{k}={v}")).collect();
    t.notes.push(format!("skipped: {}", if skipped_text.is_empty() { "none".into() } else { skipped_text.join(" ") }));
    let worst = t.rows.iter().filter_map(|r| if let Cell::Num(x) = r[8] { Some(x) } else { None }).filter(|x| x.is_finite()).fold(0.0, f64::max);
    t.summary.push(format!("{} samples, worst sum-rule residual {:.3e}", items.len(), worst));
    Ok(t)
}

fn eq10(cfg: &RunConfig) -> Result<Table, RunError> {
    let c = &cfg.eq10_scan;
    let p = cfg
        .network
        .preset_params()
        .ok_or_else(|| RunError::Invalid("eq10-scan varies u1 and needs a preset network".into()))?;
    let b = ThreeProngU1(p);
    let scan = eq10_scan(&b, (c.k_range[0], c.k_range[1]), c.u1, c.delta_u1, &c.alpha, &c.gamma, &c.options)?;
    let rows = scan
        .records
        .iter()
        .map(|r| vec![r.k.into(), r.lhs.into(), r.rhs.into(), (r.flag as i64).into()])
        .collect();
    let mut t = Table::new(b.build_channels()?, EQ10_COLUMNS, rows);
    let s = &scan.summary;
    t.notes.push(format!("element: s_{{{}{}}}, u1 = {}, delta_u1 = {}", c.alpha, c.gamma, c.u1, c.delta_u1));
    t.notes.push("lhs: |s(u1 + delta_u1)|^2 - |s(u1)|^2; rhs: |s(u1)|^2 (theta(u1 + delta_u1) - theta(u1))".into());
    for (k, v) in [
        ("records", s.records as f64),
        ("flagged", s.flagged as f64),
        ("sign_changes_lhs", s.sign_changes_lhs as f64),
        ("sign_changes_rhs", s.sign_changes_rhs as f64),
    ] {
        t.notes.push(format!("summary.{k}: {v}"));
    }
    for (k, v) in [
        ("rms_difference", s.rms_difference),
        ("pearson_full", s.pearson_full),
        ("pearson_lower", s.pearson_lower),
        ("pearson_upper", s.pearson_upper),
        ("relative_discrepancy_lower", s.relative_discrepancy_lower),
        ("relative_discrepancy_upper", s.relative_discrepancy_upper),
        ("min_abs2_s", s.min_mag2),
        ("k_at_min_abs2_s", s.k_at_min_mag2),
    ] {
        t.notes.push(format!("summary.{k}: {}", fmt_f64(v)));
    }
    t.summary.push(format!(
        "{} records ({} flagged); sign changes lhs {} rhs {}; pearson upper {:.3}; min |s|^2 {:.3e} at k = {:.6}",
        s.records, s.flagged, s.sign_changes_lhs, s.sign_changes_rhs, s.pearson_upper, s.min_mag2, s.k_at_min_mag2
    ));
    Ok(t)
}

fn verify_table(cfg: &RunConfig) -> Table {
    let checks = verify(cfg);
    let passed = checks.iter().all(|c| c.status != Status::Fail);
    let rows = checks
        .iter()
        .map(|c| vec![c.name.into(), c.status.as_str().into(), c.value.into(), c.limit.into(), c.detail.clone().into()])
        .collect();
    let summary = checks
        .iter()
        .map(|c| format!("{:<4}  {:<34} {:>12.4e}  (limit {:.1e})  {}", c.status.as_str(), c.name, c.value, c.limit, c.detail))
        .collect();
    let channels = cfg.network.build().map(|n| n.channel_order()).unwrap_or_default();
    Table { channels, columns: VERIFY_COLUMNS, rows, notes: Vec::new(), summary, passed }
}

/// Reads and parses a config file.
pub fn load_config(path: &Path) -> Result<RunConfig, RunError> {
    let text = fs::read_to_string(path).map_err(|source| RunError::Io { path: path.to_path_buf(), source })?;
    Ok(crate::io::parse_config(&text)?)
}
