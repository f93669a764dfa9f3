//! Command-line front end: reads an instance, recovers it, writes reports.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use log::info;

use recovery_core::bcg::run_bcg;
use recovery_core::error::RecoveryError;
use recovery_core::fixtures::{desk_instance, hub_conflict, t1, t1_closure};
use recovery_core::instance::{emit_instance, parse_instance, validate_instance, CutFamily, Instance};
use recovery_core::network::Network;
use recovery_core::oracle::solve_exact_oracle;
use recovery_core::report::{compute_metrics, RecoveryPlan, Report, RunStatus};
use recovery_core::seq::{run_seq, with_estimated_capacity, SeqMode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Bcg,
    SeqOe,
    SeqUe,
    /// Exact enumeration; desk-sized instances only.
    Oracle,
}

#[derive(Parser, Debug)]
#[command(name = "recover", version, about = "Integrated schedule, aircraft and gate recovery")]
struct Cli {
    /// Instance JSON file, or a built-in one: `t1`, `t1-closure`, `hub:V`
    /// (V in 0..=4), `random:N[:SEED]`.
    #[arg(long)]
    instance: String,
    #[arg(long, value_enum, default_value = "bcg")]
    method: Method,
    /// Arrival-slot reduction for the sequential methods.
    #[arg(long)]
    alpha: Option<f64>,
    /// Relative optimality gap.
    #[arg(long)]
    gap: Option<f64>,
    #[arg(long, value_name = "MIN")]
    delay_interval: Option<i64>,
    #[arg(long, value_name = "MIN")]
    max_delay: Option<i64>,
    #[arg(long, value_name = "MIN")]
    buffer: Option<i64>,
    #[arg(long, value_name = "SEC")]
    time_limit: Option<f64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Comma-separated subset of bendersopt, llc, global.
    #[arg(long, value_delimiter = ',')]
    cuts: Option<Vec<CutFamily>>,
    #[arg(long)]
    no_separation: bool,
    #[arg(long)]
    no_certificate: bool,
    /// Skip the a-priori gate-occupancy rows in the master.
    #[arg(long)]
    no_occupancy: bool,
    #[arg(long, value_name = "M")]
    addini: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Replace gate counts by the estimate from the planned schedule.
    #[arg(long)]
    estimate_capacity: bool,
    /// Write the JSON report here.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Write a one-row CSV summary here.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Print the gate connection list and exit.
    #[arg(long)]
    dump_connections: bool,
    /// Write the (possibly generated) instance here and exit.
    #[arg(long)]
    emit_instance: Option<PathBuf>,
}

const EXIT_TIME_LIMIT: u8 = 2;
const EXIT_GATE_INFEASIBLE: u8 = 3;
const EXIT_INPUT: u8 = 4;
const EXIT_STALLED: u8 = 5;

fn load(spec: &str) -> Result<Instance, RecoveryError> {
    match spec {
        "t1" => return Ok(t1()),
        "t1-closure" => return Ok(t1_closure()),
        _ => {}
    }
    if let Some(v) = spec.strip_prefix("hub:") {
        let v: u64 = v.parse().map_err(|_| RecoveryError::Invalid(vec![format!("bad fixture spec '{spec}'")]))?;
        return Ok(hub_conflict(v).instance);
    }
    if let Some(rest) = spec.strip_prefix("random:") {
        let mut parts = rest.split(':');
        let bad = || RecoveryError::Invalid(vec![format!("bad generator spec '{spec}'")]);
        let n: usize = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        let seed: u64 = match parts.next() {
            Some(s) => s.parse().map_err(|_| bad())?,
            None => 0,
        };
        return Ok(desk_instance(seed, n));
    }
    let bytes = fs::read(spec).map_err(|e| std::io::Error::new(e.kind(), format!("{spec}: {e}")))?;
    parse_instance(&bytes)
}

fn apply_flags(inst: &mut Instance, cli: &Cli) {
    let c = &mut inst.config;
    if let Some(v) = cli.gap {
        c.epsilon = v;
    }
    if let Some(v) = cli.delay_interval {
        c.delay_interval = v;
    }
    if let Some(v) = cli.max_delay {
        c.max_delay = v;
    }
    if let Some(v) = cli.buffer {
        c.buffer_time = v;
    }
    if let Some(v) = cli.time_limit {
        c.time_limit = v;
    }
    if let Some(v) = cli.workers {
        c.workers = v;
    }
    if let Some(v) = &cli.cuts {
        c.cut_families = v.clone();
    }
    if cli.no_separation {
        c.separation = false;
    }
    if cli.no_certificate {
        c.certificate = false;
    }
    if cli.no_occupancy {
        c.occupancy_cuts = false;
    }
    if let Some(v) = cli.addini {
        c.addini = v;
    }
    if let Some(v) = cli.seed {
        c.seed = v;
    }
    if let Some(v) = cli.alpha {
        c.alpha = v;
    }
}

fn is_input_error(e: &RecoveryError) -> bool {
    matches!(
        e,
        RecoveryError::Parse { .. }
            | RecoveryError::Reference(_)
            | RecoveryError::Invalid(_)
            | RecoveryError::Range(_)
            | RecoveryError::Coverage(_)
            | RecoveryError::Io(_)
    )
}

fn solve(inst: &Instance, cli: &Cli) -> Result<Report, RecoveryError> {
    match cli.method {
        Method::Bcg => run_bcg(inst)?.report(),
        Method::SeqOe => run_seq(inst, SeqMode::Oe, cli.alpha)?.report(),
        Method::SeqUe => run_seq(inst, SeqMode::Ue, cli.alpha)?.report(),
        Method::Oracle => {
            let start = Instant::now();
            let net = Network::build(inst)?;
            let res = solve_exact_oracle(&net, inst.config.enumeration_budget)?;
            let plan = RecoveryPlan::from_solution(&net, &res.solution, res.objective)?;
            let metrics = compute_metrics(&net.inst, &plan, start.elapsed().as_secs_f64())?;
            Ok(Report {
                method: "oracle".into(),
                status: RunStatus::Solved,
                gate_shortfall: None,
                plan: Some(plan),
                metrics: Some(metrics),
                log: Vec::new(),
            })
        }
    }
}

fn run(cli: &Cli) -> Result<u8, RecoveryError> {
    let mut inst = load(&cli.instance)?;
    apply_flags(&mut inst, cli);
    let problems = validate_instance(&inst);
    if !problems.is_empty() {
        return Err(RecoveryError::Invalid(problems));
    }
    if cli.estimate_capacity {
        inst = with_estimated_capacity(&inst)?;
    }
    if let Some(path) = &cli.emit_instance {
        fs::write(path, emit_instance(&inst))?;
        return Ok(0);
    }
    if cli.dump_connections {
        print!("{}", Network::build(&inst)?.dump_connections());
        return Ok(0);
    }
    let report = solve(&inst, cli)?;
    info!("{:?} after {} iterations", report.status, report.log.len());
    if let Some(path) = &cli.report {
        fs::write(path, report.to_json())?;
    }
    if let Some(path) = &cli.csv {
        report.write_csv(fs::File::create(path)?)?;
    }
    match (&report.metrics, report.gate_shortfall) {
        (Some(m), _) => println!(
            "{} {:?}: total {:.2} (schedule {:.2}, gates {:.2}), cancelled {}, delay {} min, swaps {}, gates used {}, gap {}, {:.2}s",
            report.method,
            report.status,
            m.total_cost,
            m.schedule_aircraft_cost,
            m.gate_cost,
            m.canceled_flights,
            m.total_delay_minutes,
            m.swapped_tail_assignments,
            m.used_gates,
            m.optimality_gap.map_or("n/a".to_string(), |g| format!("{:.2}%", 100.0 * g)),
            m.cpu_seconds
        ),
        (None, Some(s)) => println!("{} {:?}: {s} gate(s) short", report.method, report.status),
        (None, None) => println!("{} {:?}", report.method, report.status),
    }
    Ok(match report.status {
        RunStatus::Solved => 0,
        RunStatus::TimeLimit => EXIT_TIME_LIMIT,
        RunStatus::GateInfeasible => EXIT_GATE_INFEASIBLE,
        RunStatus::Stalled => EXIT_STALLED,
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if is_input_error(&e) { EXIT_INPUT } else { 1 })
        }
    }
}
