//! Sequential baseline (schedule first, gates second) and gate-capacity
//! estimation from the planned schedule.

use std::collections::BTreeMap;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::bcg::with_workers;
use crate::error::{RecoveryError, Result};
use crate::instance::Instance;
use crate::master::Master;
use crate::network::Network;
use crate::plan::Solution;
use crate::report::{compute_metrics, IterationRecord, RecoveryPlan, Report, RunStatus};
use crate::route::{seed_routes, AircraftRoute};
use crate::subproblem::{separate_bsp, solve_bsp, BspOutcome, PatternStore, SubOptions, SubStats};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeqMode {
    /// Slot capacity taken nearly at face value.
    Oe,
    /// Slot capacity cut harder to leave gate headroom.
    Ue,
}

impl SeqMode {
    pub fn default_alpha(self) -> f64 {
        match self {
            SeqMode::Oe => 0.10,
            SeqMode::Ue => 0.20,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SeqMode::Oe => "seq-oe",
            SeqMode::Ue => "seq-ue",
        }
    }
}

impl FromStr for SeqMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "oe" | "seq-oe" => Ok(SeqMode::Oe),
            "ue" | "seq-ue" => Ok(SeqMode::Ue),
            _ => Err(format!("unknown sequential mode '{s}'")),
        }
    }
}

/// `floor((1 - alpha) * cap)`.
pub fn reduced_cap(cap: u32, alpha: f64) -> u32 {
    ((1.0 - alpha) * cap as f64 + 1e-9).floor().max(0.0) as u32
}

/// Outcome of a sequential run.
pub struct SeqRun {
    pub net: Network,
    pub mode: SeqMode,
    pub alpha: f64,
    pub status: RunStatus,
    /// Stage-one schedule; gate patterns only when stage two succeeded.
    pub solution: Option<Solution>,
    /// Gates missing over all groups when stage two fails.
    pub shortfall: Option<u32>,
    pub elapsed: Duration,
}

impl SeqRun {
    pub fn total_cost(&self) -> Option<f64> {
        match (&self.status, &self.solution) {
            (RunStatus::Solved, Some(s)) => Some(s.total_cost(&self.net)),
            _ => None,
        }
    }

    pub fn report(&self) -> Result<Report> {
        let (plan, metrics) = match (&self.status, &self.solution) {
            (RunStatus::Solved, Some(s)) => {
                let plan = RecoveryPlan::from_solution(&self.net, s, s.total_cost(&self.net))?;
                let m = compute_metrics(&self.net.inst, &plan, self.elapsed.as_secs_f64())?;
                (Some(plan), Some(m))
            }
            _ => (None, None),
        };
        Ok(Report {
            method: self.mode.name().into(),
            status: self.status.clone(),
            gate_shortfall: self.shortfall,
            plan,
            metrics,
            log: Vec::<IterationRecord>::new(),
        })
    }
}

/// Sequential recovery: the schedule model alone with arrival capacities
/// scaled by `1 - alpha`, then gates at that schedule.
pub fn run_seq(inst: &Instance, mode: SeqMode, alpha: Option<f64>) -> Result<SeqRun> {
    let alpha = alpha.unwrap_or(mode.default_alpha());
    if !(0.0..1.0).contains(&alpha) {
        return Err(RecoveryError::Invalid(vec![format!("alpha {alpha} outside [0, 1)")]));
    }
    with_workers(inst.config.workers, || seq_inner(inst, mode, alpha))
}

fn seq_inner(inst: &Instance, mode: SeqMode, alpha: f64) -> Result<SeqRun> {
    let start = Instant::now();
    let net = Network::build(inst)?;
    let deadline = start + Duration::from_secs_f64(net.inst.config.time_limit.max(0.0));
    let timed_out = |net: Network| SeqRun {
        net,
        mode,
        alpha,
        status: RunStatus::TimeLimit,
        solution: None,
        shortfall: None,
        elapsed: start.elapsed(),
    };

    let stage_one = {
        let mut master = Master::new(&net, seed_routes(&net));
        master.with_gate_cost = false;
        for c in master.arr_caps.iter_mut() {
            *c = reduced_cap(*c, alpha);
        }
        match master.solve(Some(deadline)) {
            Ok(ms) => ms.map(|ms| {
                let routes: Vec<AircraftRoute> = ms.selected.iter().map(|&id| master.route(id).clone()).collect();
                (ms.cancelled, routes)
            }),
            Err(RecoveryError::TimeLimit) => return Ok(timed_out(net)),
            Err(e) => return Err(e),
        }
    };
    // Cancelling everything is always feasible, so the schedule model
    // cannot be empty.
    let (cancelled, routes) = stage_one
        .ok_or_else(|| RecoveryError::Lp(crate::lp::LpError::Numerical("schedule model infeasible".into())))?;

    let refs: Vec<&AircraftRoute> = routes.iter().collect();
    let sps = separate_bsp(&net, &refs);
    let mut store = PatternStore::new(&net);
    let opts = SubOptions::from_config(&net, Some(deadline));
    let stats = SubStats::default();
    let outcome = match solve_bsp(&net, &sps, &mut store, &opts, &stats) {
        Ok(o) => o,
        Err(RecoveryError::TimeLimit) => return Ok(timed_out(net)),
        Err(e) => return Err(e),
    };
    let (status, shortfall, patterns) = match outcome {
        BspOutcome::Feasible { patterns, .. } => (RunStatus::Solved, None, patterns),
        BspOutcome::Infeasible { .. } => {
            let need = gate_need(&net, &refs)?;
            let short: u32 = need.iter().map(|(&g, &n)| n.saturating_sub(net.groups[g].capacity)).sum();
            (RunStatus::GateInfeasible, Some(short), Vec::new())
        }
    };
    let solution = Solution { cancelled, routes, patterns };
    Ok(SeqRun { net, mode, alpha, status, solution: Some(solution), shortfall, elapsed: start.elapsed() })
}

/// Fewest gates each group needs to serve `routes` with unlimited gates.
pub fn gate_need(net: &Network, routes: &[&AircraftRoute]) -> Result<BTreeMap<usize, u32>> {
    let mut relaxed = net.clone();
    for g in relaxed.groups.iter_mut() {
        g.capacity = g.activities.len() as u32;
        g.cost = 1.0;
    }
    let sps = separate_bsp(&relaxed, routes);
    let mut store = PatternStore::new(&relaxed);
    let mut opts = SubOptions::from_config(&relaxed, None);
    opts.certificate = false;
    let stats = SubStats::default();
    match solve_bsp(&relaxed, &sps, &mut store, &opts, &stats)? {
        BspOutcome::Feasible { patterns, .. } => {
            let mut need: BTreeMap<usize, u32> = BTreeMap::new();
            for p in patterns {
                *need.entry(p.group).or_insert(0) += 1;
            }
            Ok(need)
        }
        BspOutcome::Infeasible { .. } => {
            Err(RecoveryError::Lp(crate::lp::LpError::Numerical("uncapacitated gate model infeasible".into())))
        }
    }
}

/// `ceil(1.1 * need)` in integer arithmetic.
pub fn padded_capacity(need: u32) -> u32 {
    (11 * need).div_ceil(10)
}

/// Gate counts per airport and gate type: the fewest gates serving the
/// undisrupted planned schedule, padded by ten percent.
pub fn estimate_gate_capacity(inst: &Instance) -> Result<BTreeMap<String, BTreeMap<String, u32>>> {
    let mut base = inst.clone();
    base.disruption.clear();
    let net = Network::build(&base)?;
    let fidx = net.inst.flight_index();
    let mut routes = Vec::new();
    for (r, ac) in net.inst.aircraft.iter().enumerate() {
        let copies: Option<Vec<usize>> = ac
            .planned_flight_ids
            .iter()
            .map(|id| net.copies_of_flight[fidx[id.as_str()]].iter().copied().find(|&c| net.copies[c].delay == 0))
            .collect();
        let Some(copies) = copies else { continue };
        if copies.is_empty() {
            continue;
        }
        let route = AircraftRoute::new(&net, r, copies);
        if route.check(&net).is_ok() {
            routes.push(route);
        }
    }
    let refs: Vec<&AircraftRoute> = routes.iter().collect();
    let need = gate_need(&net, &refs)?;
    let mut out: BTreeMap<String, BTreeMap<String, u32>> = BTreeMap::new();
    for a in &net.inst.airports {
        let entry = out.entry(a.code.clone()).or_default();
        for t in &net.inst.gate_types {
            entry.insert(t.id.clone(), 0);
        }
    }
    for (g, n) in need {
        let grp = &net.groups[g];
        let airport = net.inst.airports[grp.airport].code.clone();
        let gt = net.inst.gate_types[grp.gate_type].id.clone();
        out.entry(airport).or_default().insert(gt, padded_capacity(n));
    }
    Ok(out)
}

/// Copy of `inst` with every gate count replaced by the estimate.
pub fn with_estimated_capacity(inst: &Instance) -> Result<Instance> {
    let est = estimate_gate_capacity(inst)?;
    let mut out = inst.clone();
    for a in out.airports.iter_mut() {
        if let Some(m) = est.get(&a.code) {
            a.gate_counts = m.clone();
        }
    }
    Ok(out)
}
