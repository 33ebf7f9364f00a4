//! The `sg` command line.

use std::io::Write;
use std::path::PathBuf;
use std::sync::atomic::Ordering;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use sg_core::analytics::StanceRule;
use sg_core::mind::{Mind, ScriptedMind};
use sg_core::sim::{run_flight, Environment, SimConfig};
use sg_core::{CategoryScheme, FlightRecord};

use crate::analyze::{self, StanceMethod};
use crate::config::{self, PersonaFile, PERSONA_PRESETS};
use crate::emulator::{Emulator, EmulatorConfig, EmulatorError};
use crate::error::{CliError, ErrorClass};
use crate::link::{LinkError, LinkHandle};
use crate::live::{run_live, LiveError, LiveOptions};
use crate::log::{manifest_path, obs_path, write_observations, write_records, LogWriter};
use crate::manifest::{now_rfc3339, Backend, LinkSummary, Mode, RunManifest, GIT_DESCRIBE};
use crate::remote::RemoteMind;
use crate::render::render_top_down;

#[derive(Debug, Parser)]
#[command(name = "sg", version = GIT_DESCRIBE, about = "Ground station for a prompt-piloted indoor blimp")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fly a persona in the simulator or on a robot, writing a JSONL log and manifest.
    Fly(FlyArgs),
    /// Serve the robot link protocol from a simulated blimp.
    Emulate(EmulateArgs),
    /// Analyze saved logs.
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
    /// Inspect bundled personas or check a persona file.
    #[command(subcommand)]
    Persona(ConfigCommand),
    /// Inspect bundled environments or check an environment file.
    #[command(subcommand)]
    Env(ConfigCommand),
}

#[derive(Debug, Args)]
pub struct FlyArgs {
    /// Simulated flight or a flight over the robot link.
    #[arg(long, value_enum, default_value = "sim")]
    pub mode: Mode,
    /// Persona TOML file or preset name (see `sg persona list`).
    #[arg(long)]
    pub persona: Option<String>,
    /// Environment TOML file or preset name (sim only).
    #[arg(long, default_value = "atrium")]
    pub env: String,
    /// Which mind pilots: the scripted policy or the persona's remote model.
    #[arg(long, value_enum, default_value = "scripted")]
    pub backend: Backend,
    /// Flight length in seconds.
    #[arg(long, default_value_t = 780.0)]
    pub duration: f64,
    /// Stop after this many decisions.
    #[arg(long)]
    pub decisions: Option<usize>,
    /// Seed for the simulator, the latency model and the scripted policy.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output log path; the manifest and observation sidecar go next to it.
    #[arg(short = 'o', long = "out")]
    pub out: Option<PathBuf>,
    /// Robot link URL for live mode.
    #[arg(long, default_value = "ws://127.0.0.1:8181")]
    pub robot: String,
    /// Repeat the run described by a manifest. Other flags except -o are ignored.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Write a top-down PNG per decision into this directory (sim only).
    #[arg(long)]
    pub snapshots: Option<PathBuf>,
    /// Link connect timeout in milliseconds.
    #[arg(long, default_value_t = 5000)]
    pub connect_timeout_ms: u64,
    /// How long to wait for each robot frame, in milliseconds.
    #[arg(long, default_value_t = 5000)]
    pub frame_timeout_ms: u64,
    /// Do not print the per-decision lines.
    #[arg(short, long)]
    pub quiet: bool,
}

#[derive(Debug, Args)]
pub struct EmulateArgs {
    /// Environment TOML file or preset name.
    #[arg(long, default_value = "atrium")]
    pub env: String,
    /// Address to listen on.
    #[arg(long, default_value = "127.0.0.1:8181")]
    pub listen: String,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Frames per second sent to the pilot.
    #[arg(long, default_value_t = 5.0)]
    pub fps: f64,
    #[arg(long, default_value_t = 640)]
    pub width: u32,
    #[arg(long, default_value_t = 480)]
    pub height: u32,
    /// JPEG quality, 1 to 100.
    #[arg(long, default_value_t = 80)]
    pub quality: u8,
    /// Ping interval in milliseconds; two missed pongs lose the pilot.
    #[arg(long, default_value_t = 5000)]
    pub heartbeat_ms: u64,
    /// Send only JPEG frames, without `#OBS` records.
    #[arg(long)]
    pub no_obs: bool,
    /// Exit after the first pilot leaves.
    #[arg(long)]
    pub once: bool,
    /// Where the ground-truth log is written on exit.
    #[arg(long, default_value = "emulator-truth.jsonl")]
    pub truth_log: PathBuf,
    /// Write final counters as JSON here.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum AnalyzeCommand {
    /// Persona x action-category table and its chi-square test.
    Fingerprint(FingerprintArgs),
    /// Approach/avoid counts around humans and their chi-square test.
    Stance(StanceArgs),
    /// Mean and standard deviation of decision latency.
    Latency(CommonAnalyzeArgs),
}

#[derive(Debug, Args)]
pub struct CommonAnalyzeArgs {
    /// JSONL flight logs.
    #[arg(required = true)]
    pub logs: Vec<PathBuf>,
    /// Print the report as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct FingerprintArgs {
    #[command(flatten)]
    pub common: CommonAnalyzeArgs,
    /// Action grouping: default (advance/maneuver/halt), letters or plane.
    #[arg(long, default_value = "default")]
    pub scheme: String,
    /// Apply the Yates continuity correction (2x2 tables only).
    #[arg(long)]
    pub yates: bool,
    /// Also write the table as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StanceArgs {
    #[command(flatten)]
    pub common: CommonAnalyzeArgs,
    /// Classify from reason text instead of observation sidecars (heuristic).
    #[arg(long)]
    pub keywords: bool,
    /// Half-width of the forward approach cone in degrees.
    #[arg(long, default_value_t = 45.0)]
    pub cone: f64,
    #[arg(long)]
    pub yates: bool,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum ConfigCommand {
    /// List bundled presets.
    List,
    /// Print a preset as TOML.
    Show { name: String },
    /// Validate a file or preset.
    Check { path: String },
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Fly(a) => fly(a),
        Command::Emulate(a) => emulate(a),
        Command::Analyze(a) => analyze_cmd(a),
        Command::Persona(c) => persona_cmd(c),
        Command::Env(c) => env_cmd(c),
    }
}

/// Entry point shared by the binary: parses, runs, prints errors, returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

struct FlyPlan {
    mode: Mode,
    persona_path: String,
    env_path: String,
    backend: Backend,
    duration_s: f64,
    max_decisions: Option<usize>,
    seed: u64,
    out: PathBuf,
    robot: String,
}

fn plan(a: &FlyArgs) -> Result<FlyPlan, CliError> {
    if let Some(m) = &a.manifest {
        let m = RunManifest::read(m)?;
        return Ok(FlyPlan {
            mode: m.mode,
            persona_path: m.persona_path,
            env_path: m.env_path.unwrap_or_else(|| "atrium".into()),
            backend: m.backend,
            duration_s: m.duration_s,
            max_decisions: m.max_decisions,
            seed: m.seed,
            out: a
                .out
                .clone()
                .unwrap_or_else(|| PathBuf::from(m.out_log_path)),
            robot: m
                .link
                .map(|l| l.robot_url)
                .unwrap_or_else(|| a.robot.clone()),
        });
    }
    let persona_path = a.persona.clone().ok_or_else(|| {
        CliError::new(
            ErrorClass::ConfigInvalid,
            "--persona is required without --manifest",
        )
    })?;
    if !(a.duration > 0.0 && a.duration.is_finite()) {
        return Err(CliError::new(
            ErrorClass::ConfigInvalid,
            format!("--duration must be positive, got {}", a.duration),
        ));
    }
    Ok(FlyPlan {
        mode: a.mode,
        persona_path,
        env_path: a.env.clone(),
        backend: a.backend,
        duration_s: a.duration,
        max_decisions: a.decisions,
        seed: a.seed,
        out: a
            .out
            .clone()
            .unwrap_or_else(|| PathBuf::from("flight.jsonl")),
        robot: a.robot.clone(),
    })
}

fn remote_mind(persona: &PersonaFile) -> Result<RemoteMind, CliError> {
    let cfg = persona.remote.as_ref().ok_or_else(|| {
        CliError::new(
            ErrorClass::ConfigInvalid,
            format!(
                "persona {:?} has no [remote] section for the remote backend",
                persona.id
            ),
        )
    })?;
    Ok(RemoteMind::new(cfg))
}

fn print_decision(quiet: bool, r: &FlightRecord) {
    if !quiet {
        let mut out = std::io::stdout().lock();
        let _ = writeln!(out, "{}, {}", r.action, r.reason);
    }
}

fn fly(a: FlyArgs) -> Result<(), CliError> {
    let p = plan(&a)?;
    let persona = config::load_persona(&p.persona_path)?;
    let started_at = now_rfc3339();
    let mut manifest = RunManifest {
        mode: p.mode,
        persona_path: p.persona_path.clone(),
        env_path: None,
        backend: p.backend,
        duration_s: p.duration_s,
        max_decisions: p.max_decisions,
        seed: p.seed,
        out_log_path: p.out.display().to_string(),
        started_at,
        finished_at: String::new(),
        git_describe: GIT_DESCRIBE.to_string(),
        records: 0,
        link: None,
    };
    match p.mode {
        Mode::Sim => {
            let env = config::load_environment(&p.env_path)?;
            manifest.env_path = Some(p.env_path.clone());
            manifest.records = fly_sim(&a, &p, &persona, &env)?;
        }
        Mode::Live => {
            let (n, link) = fly_live(&a, &p, &persona)?;
            manifest.records = n;
            manifest.link = Some(link);
        }
    }
    manifest.finished_at = now_rfc3339();
    manifest.write(&manifest_path(&p.out))
}

fn fly_sim(
    a: &FlyArgs,
    p: &FlyPlan,
    persona: &PersonaFile,
    env: &Environment,
) -> Result<usize, CliError> {
    let spec = persona.spec();
    let cfg = SimConfig {
        rng_seed: p.seed,
        ..SimConfig::default()
    };
    let mut mind: Box<dyn Mind> = match p.backend {
        Backend::Scripted => Box::new(ScriptedMind::for_run(&spec, p.seed)),
        Backend::Remote => Box::new(remote_mind(persona)?),
    };
    if let Some(dir) = &a.snapshots {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::new(ErrorClass::Io, format!("{}: {e}", dir.display())))?;
    }
    let mut shown = 0usize;
    let mut snap_err = None;
    let limit = p.max_decisions.unwrap_or(usize::MAX);
    let mut log = run_flight(&spec, &mut mind, env, &cfg, p.duration_s, |world, r| {
        if shown >= limit {
            return;
        }
        shown += 1;
        print_decision(a.quiet, r);
        if let Some(dir) = &a.snapshots {
            let path = dir.join(format!("{:05}.png", shown - 1));
            if let Err(e) = std::fs::write(&path, render_top_down(world, 20.0)) {
                snap_err.get_or_insert(CliError::new(
                    ErrorClass::Io,
                    format!("{}: {e}", path.display()),
                ));
            }
        }
    })
    .map_err(|e| CliError::new(ErrorClass::ConfigInvalid, e.to_string()))?;
    if let Some(e) = snap_err {
        return Err(e);
    }
    if let Some(e) = log.aborted.take() {
        return Err(CliError::new(
            ErrorClass::Backend,
            format!("session did not start: {e}"),
        ));
    }
    log.records.truncate(limit);
    log.observations.truncate(limit);
    write_records(&p.out, &log.records)?;
    write_observations(&obs_path(&p.out), &log.observations)?;
    Ok(log.records.len())
}

fn link_error(e: LinkError) -> CliError {
    CliError::new(ErrorClass::LinkError, e.to_string())
}

fn fly_live(
    a: &FlyArgs,
    p: &FlyPlan,
    persona: &PersonaFile,
) -> Result<(usize, LinkSummary), CliError> {
    let spec = persona.spec();
    let (mut mind, prefer_observation): (Box<dyn Mind>, bool) = match p.backend {
        Backend::Scripted => (Box::new(ScriptedMind::for_run(&spec, p.seed)), true),
        Backend::Remote => (Box::new(remote_mind(persona)?), false),
    };
    let link = LinkHandle::connect(&p.robot, a.connect_timeout_ms).map_err(link_error)?;
    let mut writer = LogWriter::create(&p.out)?;
    let mut write_err = None;
    let opts = LiveOptions {
        duration_s: p.duration_s,
        max_decisions: p.max_decisions,
        frame_timeout_ms: a.frame_timeout_ms,
        prefer_observation,
    };
    let result = run_live(&spec, &mut mind, &link, opts, |r| {
        print_decision(a.quiet, r);
        if let Err(e) = writer.write(r) {
            write_err.get_or_insert(e);
        }
    });
    let stats = link.stats();
    link.close();
    let log = result.map_err(|e| match e {
        LiveError::NoFirstFrame(l) => link_error(l),
        LiveError::Session(m) => {
            CliError::new(ErrorClass::Backend, format!("session did not start: {m}"))
        }
    })?;
    if let Some(e) = write_err {
        return Err(e);
    }
    if let Some(why) = &log.ended_by {
        log::warn!("live flight ended early: {why}");
    }
    let obs: Option<Vec<_>> = log.observations.iter().cloned().collect();
    if let Some(obs) = obs {
        write_observations(&obs_path(&p.out), &obs)?;
    }
    let summary = LinkSummary {
        robot_url: p.robot.clone(),
        frames_received: stats.frames_received,
        commands_sent: stats.commands_sent,
        protocol_violations: stats.protocol_violations,
        frame_seqs: log.frame_seqs.clone(),
    };
    if let Some(why) = log.ended_by {
        if log.records.is_empty() {
            return Err(CliError::new(ErrorClass::LinkError, why));
        }
    }
    Ok((log.records.len(), summary))
}

fn emulate(a: EmulateArgs) -> Result<(), CliError> {
    let env = config::load_environment(&a.env)?;
    let mut cfg = EmulatorConfig::new(
        a.listen.clone(),
        env,
        SimConfig {
            rng_seed: a.seed,
            ..SimConfig::default()
        },
    );
    cfg.fps = a.fps;
    cfg.width = a.width;
    cfg.height = a.height;
    cfg.jpeg_quality = a.quality;
    cfg.heartbeat = Duration::from_millis(a.heartbeat_ms);
    cfg.observations = !a.no_obs;
    cfg.once = a.once;
    let mut emu = Emulator::bind(cfg).map_err(|e| match e {
        EmulatorError::Bind { .. } => CliError::new(ErrorClass::BindFailure, e.to_string()),
        other => CliError::new(ErrorClass::ConfigInvalid, other.to_string()),
    })?;
    let flag = emu.shutdown_flag();
    ctrlc::set_handler(move || flag.store(true, Ordering::SeqCst)).map_err(|e| {
        CliError::new(
            ErrorClass::Io,
            format!("installing the interrupt handler: {e}"),
        )
    })?;
    let stats = emu.run(|ev| {
        let mut out = std::io::stdout().lock();
        let _ = writeln!(
            out,
            "{}",
            serde_json::to_string(ev).expect("events serialize")
        );
        let _ = out.flush();
    });
    write_records(&a.truth_log, emu.truth())?;
    let text = serde_json::to_string_pretty(&stats).expect("stats serialize");
    match &a.summary {
        Some(p) => std::fs::write(p, text + "\n")
            .map_err(|e| CliError::new(ErrorClass::Io, format!("{}: {e}", p.display())))?,
        None => eprintln!("{text}"),
    }
    Ok(())
}

fn load_all(paths: &[PathBuf]) -> Result<Vec<analyze::LoadedLog>, CliError> {
    paths.iter().map(|p| analyze::load_log(p)).collect()
}

fn emit(json: bool, value: &impl serde::Serialize, text: String) {
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(value).expect("reports serialize")
        );
    } else {
        println!("{text}");
    }
}

fn analyze_cmd(c: AnalyzeCommand) -> Result<(), CliError> {
    match c {
        AnalyzeCommand::Fingerprint(a) => {
            let scheme = CategoryScheme::by_name(&a.scheme)
                .map_err(|e| CliError::new(ErrorClass::ConfigInvalid, e.to_string()))?;
            let logs = load_all(&a.common.logs)?;
            let r = analyze::fingerprint(&logs, &scheme, a.yates)?;
            if let Some(p) = &a.csv {
                analyze::write_csv(p, &r.table)?;
            }
            let text = format!(
                "{}{}",
                analyze::format_table(&r.table),
                analyze::format_result(&r.result)
            );
            emit(a.common.json, &r, text);
        }
        AnalyzeCommand::Stance(a) => {
            let logs = load_all(&a.common.logs)?;
            let method = if a.keywords {
                StanceMethod::Keywords
            } else {
                StanceMethod::Geometric
            };
            let r = analyze::stance(&logs, method, &StanceRule { cone_deg: a.cone }, a.yates)?;
            if let Some(p) = &a.csv {
                analyze::write_csv(p, &r.table)?;
            }
            let text = analyze::format_stance(&r);
            emit(a.common.json, &r, text);
        }
        AnalyzeCommand::Latency(a) => {
            let logs = load_all(&a.logs)?;
            let s = analyze::latency(&logs)?;
            let text = format!(
                "latency: mean {:.3} s, sd {:.3} s, n = {}",
                s.mean_s, s.sd_s, s.n
            );
            emit(a.json, &s, text);
        }
    }
    Ok(())
}

fn persona_cmd(c: ConfigCommand) -> Result<(), CliError> {
    match c {
        ConfigCommand::List => {
            for (name, _) in PERSONA_PRESETS {
                println!("{name}");
            }
        }
        ConfigCommand::Show { name } => {
            let src = config::persona_preset(name.strip_prefix("preset:").unwrap_or(&name))
                .ok_or_else(|| {
                    CliError::new(
                        ErrorClass::ConfigNotFound,
                        format!("{name}: no such persona preset"),
                    )
                })?;
            print!("{src}");
        }
        ConfigCommand::Check { path } => {
            let p = config::load_persona(&path)?;
            println!("{}: ok (id {:?}, voice {:?})", path, p.id, p.voice);
        }
    }
    Ok(())
}

fn env_cmd(c: ConfigCommand) -> Result<(), CliError> {
    match c {
        ConfigCommand::List => {
            for name in Environment::PRESETS {
                println!("{name}");
            }
        }
        ConfigCommand::Show { name } => {
            let env = Environment::preset(name.strip_prefix("preset:").unwrap_or(&name))
                .ok_or_else(|| {
                    CliError::new(
                        ErrorClass::ConfigNotFound,
                        format!("{name}: no such environment preset"),
                    )
                })?;
            print!("{}", config::environment_toml(&env));
        }
        ConfigCommand::Check { path } => {
            let env = config::load_environment(&path)?;
            let b = env.bounds;
            println!(
                "{}: ok ({}, {:.1} x {:.1} m, {} obstacles, {} humans)",
                path,
                env.name,
                b.width(),
                b.height(),
                env.obstacles.len(),
                env.humans.len()
            );
        }
    }
    Ok(())
}
