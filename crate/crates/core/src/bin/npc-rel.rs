//! `npc-rel`: command-line front end.
//!
//! Exit codes: 0 success, 1 I/O error, 2 configuration error, 3 numeric error.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use npc_reliability::config::{RunConfig, DEFAULT_CONFIG_TOML};
use npc_reliability::dclink::{simulate_np_voltages, write_trace, AppliedVoltage};
use npc_reliability::losses::loss_distribution;
use npc_reliability::pipeline::{self, Mode};
use npc_reliability::report::{self, Format};
use npc_reliability::{Error, ErrorClass, StrategyId};

fn parse<T: FromStr<Err = Error>>(s: &str) -> Result<T, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Parser)]
#[command(name = "npc-rel", version, about = "Reliability evaluation of three-level NPC inverters")]
struct Cli {
    /// Run configuration (TOML). Defaults to the built-in configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Output {
    /// json, csv or plotdata.
    #[arg(long, default_value = "json", value_parser = parse::<Format>)]
    format: Format,

    /// Directory for the output files; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Full chain for one or more strategies.
    Evaluate {
        /// spwm, thipwm or svpwm; repeatable. All three when omitted.
        #[arg(long, value_parser = parse::<StrategyId>)]
        strategy: Vec<StrategyId>,
        /// paper-factors or model.
        #[arg(long, default_value = "model", value_parser = parse::<Mode>)]
        mode: Mode,
        #[command(flatten)]
        output: Output,
    },
    /// All three strategies with the MTTF comparison.
    Compare {
        /// paper-factors or model.
        #[arg(long, default_value = "model", value_parser = parse::<Mode>)]
        mode: Mode,
        #[command(flatten)]
        output: Output,
    },
    /// Per-device loss distribution at the configured operating point.
    Losses {
        #[arg(long, value_parser = parse::<StrategyId>)]
        strategy: Vec<StrategyId>,
        /// Overrides the modulation index.
        #[arg(long)]
        m: Option<f64>,
        /// Overrides the power factor.
        #[arg(long)]
        pf: Option<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// Neutral-point voltage simulation.
    SimulateDclink {
        #[arg(long, value_parser = parse::<StrategyId>)]
        strategy: StrategyId,
        /// Whitespace-separated time/voltage trace file.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Overrides the number of simulated fundamental cycles.
        #[arg(long)]
        cycles: Option<usize>,
    },
    /// Prints the built-in configuration.
    DumpDefaultConfig,
}

fn load_config(path: Option<&PathBuf>) -> npc_reliability::Result<RunConfig> {
    let cfg = match path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn strategies_or_all(s: Vec<StrategyId>) -> Vec<StrategyId> {
    if s.is_empty() {
        StrategyId::ALL.to_vec()
    } else {
        s
    }
}

fn emit(report: &pipeline::ReliabilityReport, cfg: &RunConfig, output: &Output) -> npc_reliability::Result<()> {
    match &output.out {
        Some(dir) => {
            for path in report::emit_report(report, cfg, output.format, dir)? {
                log::info!("wrote {}", path.display());
            }
            Ok(())
        }
        None => {
            io::stdout().write_all(report::render(report, output.format)?.as_bytes())?;
            Ok(())
        }
    }
}

fn write_json<T: Serialize>(value: &T) -> npc_reliability::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Numeric(e.to_string()))?;
    text.push('\n');
    io::stdout().write_all(text.as_bytes())?;
    Ok(())
}

#[derive(Serialize)]
struct DcLinkSummary {
    strategy: StrategyId,
    c1: AppliedVoltage,
    c2: AppliedVoltage,
    mean_np_current_a: f64,
    max_sum_error_v: f64,
}

fn run(cli: Cli) -> npc_reliability::Result<()> {
    if let Command::DumpDefaultConfig = cli.command {
        io::stdout().write_all(DEFAULT_CONFIG_TOML.as_bytes())?;
        return Ok(());
    }
    let mut cfg = load_config(cli.config.as_ref())?;
    match cli.command {
        Command::Evaluate { strategy, mode, output } => {
            let report = pipeline::evaluate(&cfg, &strategies_or_all(strategy), mode)?;
            emit(&report, &cfg, &output)
        }
        Command::Compare { mode, output } => {
            let report = pipeline::compare_strategies(&cfg, mode)?;
            emit(&report, &cfg, &output)
        }
        Command::Losses { strategy, m, pf, output } => {
            if let Some(m) = m {
                cfg.operating_point.modulation_index = m;
            }
            if let Some(pf) = pf {
                cfg.operating_point.power_factor = pf;
            }
            cfg.validate()?;
            let strategies = strategies_or_all(strategy);
            if output.format == Format::Plotdata {
                let dir = output.out.clone().unwrap_or_else(|| PathBuf::from("."));
                std::fs::create_dir_all(&dir)?;
                for s in strategies {
                    let points = pipeline::loss_surface(&cfg, s)?;
                    let path = dir.join(format!("loss_surface_{}.csv", s.key()));
                    report::write_surface_csv(BufWriter::new(File::create(&path)?), &points)?;
                    log::info!("wrote {}", path.display());
                }
                return Ok(());
            }
            let devices = cfg.device_set()?;
            let quad = cfg.quadrature()?;
            let op = cfg.operating_point();
            let dists = strategies
                .iter()
                .map(|&s| loss_distribution(&op, s, &devices, quad))
                .collect::<npc_reliability::Result<Vec<_>>>()?;
            match output.format {
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(io::stdout());
                    w.write_record(["strategy", "role", "p_cond_W", "p_sw_W", "total_W"])
                        .map_err(|e| Error::Numeric(e.to_string()))?;
                    for d in &dists {
                        for (role, l) in &d.roles {
                            w.write_record([
                                d.strategy.name().to_string(),
                                role.to_string(),
                                l.p_cond.to_string(),
                                l.p_sw.to_string(),
                                l.total.to_string(),
                            ])
                            .map_err(|e| Error::Numeric(e.to_string()))?;
                        }
                    }
                    w.flush()?;
                    Ok(())
                }
                _ => write_json(&dists),
            }
        }
        Command::SimulateDclink { strategy, trace, cycles } => {
            if let Some(c) = cycles {
                cfg.simulation.cycles = c;
            }
            let sc = cfg.strategy(strategy);
            let r = simulate_np_voltages(
                strategy,
                &cfg.operating_point(),
                (&cfg.capacitors.c1, &cfg.capacitors.c2),
                sc.policy,
                &cfg.dclink_settings(),
            )?;
            if let Some(path) = trace {
                write_trace(BufWriter::new(File::create(&path)?), &r.trace)?;
                log::info!("wrote {}", path.display());
            }
            write_json(&DcLinkSummary {
                strategy,
                c1: r.c1,
                c2: r.c2,
                mean_np_current_a: r.mean_np_current,
                max_sum_error_v: r.max_sum_error,
            })
        }
        Command::DumpDefaultConfig => unreachable!("handled above"),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.class() {
                ErrorClass::Io => 1,
                ErrorClass::Config => 2,
                ErrorClass::Numeric => 3,
            })
        }
    }
}
