//! Command implementations for the `proxconvoy` binary.

pub mod compare;

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use proxconvoy_core::group::{discover_group, GroupQueryParams, DEFAULT_MIN_STEPS};
use proxconvoy_core::proximity::jsonl::{read_into, write_log};
use proxconvoy_core::rules::{
    eval_rules, parse_rules, EngineConfig, EvalContext, DEFAULT_DELTA, DEFAULT_OMEGA, DEFAULT_SESSION_GAP,
};
use proxconvoy_core::simulator::{corridor_scenario, fig4_scenario, simulate, write_ground_truth, MobilityScenario};
use proxconvoy_core::trajectory::jsonl::{read_trajectories, write_convoys, write_trajectories};
use proxconvoy_core::trajectory::{discover_convoys, ConvoyParams};
use proxconvoy_core::{DeviceId, Fingerprint, MacAddr, ProximityLog};

pub const TRAJECTORY_FILE: &str = "trajectory.jsonl";
pub const PROXIMITY_FILE: &str = "proximity.jsonl";
pub const GROUND_TRUTH_FILE: &str = "ground_truth.jsonl";

#[derive(Debug, Parser)]
#[command(name = "proxconvoy", version, about = "Co-traveling group discovery from Wi-Fi proximity logs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario and write trajectory, proximity and ground-truth JSONL files.
    Simulate {
        /// Scenario TOML file, or `builtin:corridor` / `builtin:fig4`.
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the scenario's radio seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Validate and merge proximity JSONL files into one time-ordered log.
    Ingest {
        #[arg(long = "log", required = true)]
        logs: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Discover the devices traveling with DEVICE and evaluate IN_GROUP_OF.
    QueryGroup {
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        device: MacAddr,
        /// Query time in seconds, or `latest` for the device's newest sample.
        #[arg(long, default_value = "latest")]
        t0: String,
        #[command(flatten)]
        group: GroupArgs,
        /// Lookback horizon in seconds.
        #[arg(long, default_value_t = 600.0)]
        t_max: f64,
        /// Minimum group size, the querying device included.
        #[arg(long, default_value_t = 2)]
        n: usize,
    },
    /// Evaluate a rule file for DEVICE at T0 and print the rules that fire.
    EvalRules {
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        rules: PathBuf,
        #[arg(long)]
        device: MacAddr,
        #[arg(long, default_value = "latest")]
        t0: String,
        #[command(flatten)]
        group: GroupArgs,
        /// Pause in seconds that separates two visits.
        #[arg(long, default_value_t = DEFAULT_SESSION_GAP)]
        session_gap: f64,
        /// Seconds added to timestamps to obtain local time of day.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        utc_offset: f64,
    },
    /// Density-connected convoys over a trajectory JSONL file.
    ConvoyBaseline {
        #[arg(long)]
        trajectory: PathBuf,
        #[command(flatten)]
        convoy: ConvoyArgs,
    },
    /// Simulate a scenario and compare proximity discovery with the ground
    /// truth and the trajectory baseline.
    Compare {
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        seed: Option<u64>,
        /// Time threshold in seconds [default: sample_interval / 4].
        #[arg(long)]
        delta: Option<f64>,
        /// RSSI threshold in dB.
        #[arg(long, default_value_t = DEFAULT_OMEGA)]
        omega: f64,
        /// Lookback horizon in seconds [default: scenario duration].
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_MIN_STEPS)]
        min_steps: usize,
        #[command(flatten)]
        convoy: ConvoyArgs,
    },
}

#[derive(Debug, Clone, Args)]
pub struct GroupArgs {
    /// Time threshold in seconds.
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    pub delta: f64,
    /// RSSI threshold in dB.
    #[arg(long, default_value_t = DEFAULT_OMEGA)]
    pub omega: f64,
    /// Minimum number of the device's own samples a group query must consume.
    #[arg(long, default_value_t = DEFAULT_MIN_STEPS)]
    pub min_steps: usize,
}

#[derive(Debug, Clone, Args)]
pub struct ConvoyArgs {
    /// Neighborhood distance in meters.
    #[arg(long, default_value_t = 5.0)]
    pub e: f64,
    /// Minimum objects per cluster.
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    /// Minimum lifetime in consecutive ticks.
    #[arg(long, default_value_t = 3)]
    pub k: usize,
}

impl ConvoyArgs {
    fn params(&self) -> Result<ConvoyParams> {
        Ok(ConvoyParams::new(self.e, self.m, self.k)?)
    }
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Simulate { scenario, out: dir, seed } => cmd_simulate(&scenario, &dir, seed, out),
        Command::Ingest { logs, out: path } => cmd_ingest(&logs, path.as_deref(), out),
        Command::QueryGroup { log, device, t0, group, t_max, n } => {
            let params = GroupQueryParams::new(group.delta, group.omega, t_max, n)?.with_min_steps(group.min_steps)?;
            cmd_query_group(&log, &device, &t0, &params, out)
        }
        Command::EvalRules { log, rules, device, t0, group, session_gap, utc_offset } => {
            let config = EngineConfig {
                delta: group.delta,
                omega: group.omega,
                min_steps: group.min_steps,
                session_gap,
                utc_offset,
            };
            cmd_eval_rules(&log, &rules, &device, &t0, &config, out)
        }
        Command::ConvoyBaseline { trajectory, convoy } => cmd_convoy_baseline(&trajectory, &convoy.params()?, out),
        Command::Compare { scenario, seed, delta, omega, t_max, min_steps, convoy } => {
            let mut sc = load_scenario(&scenario)?;
            if let Some(seed) = seed {
                sc = sc.with_seed(seed);
            }
            let delta = delta.unwrap_or(sc.sample_interval / 4.0);
            let t_max = t_max.unwrap_or(sc.duration.max(sc.sample_interval));
            let params = GroupQueryParams::new(delta, omega, t_max, 1)?.with_min_steps(min_steps)?;
            cmd_compare(&sc, &params, &convoy.params()?, out)
        }
    }
}

pub fn load_scenario(spec: &str) -> Result<MobilityScenario> {
    match spec {
        "builtin:corridor" => Ok(corridor_scenario(1, 0.0)),
        "builtin:fig4" => Ok(fig4_scenario()),
        path => {
            let text = fs::read_to_string(path).with_context(|| format!("cannot read scenario {path}"))?;
            Ok(MobilityScenario::from_toml(&text).with_context(|| format!("scenario {path}"))?)
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("cannot create {}", path.display()))?))
}

pub fn read_log_file(path: &Path) -> Result<ProximityLog> {
    let mut log = ProximityLog::new();
    read_log_into(path, &mut log)?;
    Ok(log)
}

fn read_log_into(path: &Path, log: &mut ProximityLog) -> Result<usize> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    read_into(BufReader::new(file), log).with_context(|| format!("{}", path.display()))
}

pub fn cmd_simulate(scenario: &str, dir: &Path, seed: Option<u64>, out: &mut dyn Write) -> Result<()> {
    let mut sc = load_scenario(scenario)?;
    if let Some(seed) = seed {
        sc = sc.with_seed(seed);
    }
    let sim = simulate(&sc)?;
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut w = create(&dir.join(TRAJECTORY_FILE))?;
    write_trajectories(&sim.trajectories, &mut w)?;
    w.flush()?;
    let mut w = create(&dir.join(PROXIMITY_FILE))?;
    write_log(&sim.log, &mut w)?;
    w.flush()?;
    let mut w = create(&dir.join(GROUND_TRUTH_FILE))?;
    write_ground_truth(&sim.truth, &mut w)?;
    w.flush()?;
    writeln!(out, "devices: {}", sim.log.device_count())?;
    writeln!(out, "fingerprints: {}", sim.log.sample_count())?;
    writeln!(out, "seed: {}", sc.radio.seed)?;
    Ok(())
}

pub fn cmd_ingest(logs: &[PathBuf], dest: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    let mut log = ProximityLog::new();
    for path in logs {
        read_log_into(path, &mut log)?;
    }
    match dest {
        Some(path) => {
            let mut w = create(path)?;
            write_log(&log, &mut w)?;
            w.flush()?;
            writeln!(out, "devices: {}", log.device_count())?;
            writeln!(out, "fingerprints: {}", log.sample_count())?;
        }
        None => write_log(&log, out)?,
    }
    Ok(())
}

/// Resolve `t0` (seconds or `latest`) to the device's fingerprint nearest
/// it within `delta`.
pub fn resolve_current<'a>(log: &'a ProximityLog, device: &DeviceId, t0: &str, delta: f64) -> Result<&'a Fingerprint> {
    let track = log.track(device).ok_or_else(|| anyhow!("unknown device {device}"))?;
    if t0 == "latest" {
        return track.latest().ok_or_else(|| anyhow!("device {device} has no samples"));
    }
    let t: f64 = t0.parse().map_err(|_| anyhow!("t0 must be a number of seconds or `latest`, got {t0:?}"))?;
    if !t.is_finite() {
        bail!("t0 must be finite");
    }
    track
        .nearest_in_window(t, delta)
        .ok_or_else(|| anyhow!("device {device} has no fingerprint within {delta} s of {t}"))
}

pub fn cmd_query_group(
    log_path: &Path,
    device: &DeviceId,
    t0: &str,
    params: &GroupQueryParams,
    out: &mut dyn Write,
) -> Result<()> {
    let log = read_log_file(log_path)?;
    let current = resolve_current(&log, device, t0, params.delta())?;
    let result = discover_group(&log, device, current.t, &current.env, params)?;
    let members: Vec<String> = result.members.iter().map(ToString::to_string).collect();
    writeln!(out, "device: {device}")?;
    writeln!(out, "t0: {}", current.t)?;
    writeln!(out, "delta: {}", params.delta())?;
    writeln!(out, "omega: {}", params.omega())?;
    writeln!(out, "t_max: {}", params.t_max())?;
    writeln!(out, "n: {}", params.n())?;
    writeln!(out, "min_steps: {}", params.min_steps())?;
    writeln!(out, "steps_processed: {}", result.steps_processed)?;
    writeln!(out, "oldest_step_time: {}", result.oldest_step_time)?;
    writeln!(out, "members: {{{}}}", members.join(","))?;
    writeln!(out, "group_size: {}", result.group_size())?;
    writeln!(out, "in_group_of: {}", result.group_size() >= params.n())?;
    Ok(())
}

pub fn cmd_eval_rules(
    log_path: &Path,
    rules_path: &Path,
    device: &DeviceId,
    t0: &str,
    config: &EngineConfig,
    out: &mut dyn Write,
) -> Result<()> {
    let text = fs::read_to_string(rules_path).with_context(|| format!("cannot read {}", rules_path.display()))?;
    let rules = parse_rules(&text).with_context(|| format!("{}", rules_path.display()))?;
    let log = read_log_file(log_path)?;
    let current = resolve_current(&log, device, t0, config.delta)?;
    let ctx = EvalContext { device: *device, now: current.t, current: &current.env, log: &log, config };
    for firing in eval_rules(&rules, &ctx) {
        let rule = serde_json::to_string(firing.rule_id)?;
        let content = serde_json::to_string(firing.content)?;
        writeln!(out, "{{\"rule\":{rule},\"content\":{content}}}")?;
    }
    Ok(())
}

pub fn cmd_convoy_baseline(path: &Path, params: &ConvoyParams, out: &mut dyn Write) -> Result<()> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let db = read_trajectories(BufReader::new(file)).with_context(|| format!("{}", path.display()))?;
    write_convoys(&discover_convoys(&db, params), out)?;
    Ok(())
}

pub fn cmd_compare(
    scenario: &MobilityScenario,
    group_params: &GroupQueryParams,
    convoy_params: &ConvoyParams,
    out: &mut dyn Write,
) -> Result<()> {
    let sim = simulate(scenario)?;
    let report = compare::compare(&sim, &scenario.name, group_params, convoy_params);
    out.write_all(report.render(group_params, convoy_params).as_bytes())?;
    Ok(())
}
