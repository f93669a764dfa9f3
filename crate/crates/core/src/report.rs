//! Named recovery plans, metrics recomputed from them, and the run report.

use std::collections::{HashMap, HashSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{RecoveryError, Result};
use crate::instance::Instance;
use crate::network::Network;
use crate::plan::Solution;
use crate::subproblem::{assemble_gate_assignment, GateSchedule};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Leg {
    pub flight: String,
    pub delay: i64,
    pub dep_time: i64,
    pub arr_time: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlannedRoute {
    pub aircraft: String,
    pub legs: Vec<Leg>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryPlan {
    pub cancelled: Vec<String>,
    pub routes: Vec<PlannedRoute>,
    pub gates: Vec<GateSchedule>,
    pub schedule_aircraft_cost: f64,
    pub gate_cost: f64,
    pub total_cost: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
}

impl RecoveryPlan {
    pub fn from_solution(net: &Network, sol: &Solution, lower_bound: f64) -> Result<Self> {
        let mut cancelled: Vec<String> = sol.cancelled.iter().map(|&j| net.inst.flights[j].id.clone()).collect();
        cancelled.sort();
        let mut routes: Vec<PlannedRoute> = sol
            .routes
            .iter()
            .map(|r| PlannedRoute {
                aircraft: net.inst.aircraft[r.aircraft].id.clone(),
                legs: r
                    .copies
                    .iter()
                    .map(|&c| {
                        let cp = &net.copies[c];
                        Leg {
                            flight: net.inst.flights[cp.flight].id.clone(),
                            delay: cp.delay,
                            dep_time: cp.dep_time,
                            arr_time: cp.arr_time,
                        }
                    })
                    .collect(),
            })
            .collect();
        routes.sort_by(|a, b| a.aircraft.cmp(&b.aircraft));
        let total = sol.total_cost(net);
        Ok(RecoveryPlan {
            cancelled,
            routes,
            gates: assemble_gate_assignment(net, &sol.patterns)?,
            schedule_aircraft_cost: sol.schedule_cost(net),
            gate_cost: sol.gate_cost(net),
            total_cost: total,
            lower_bound,
            upper_bound: total,
        })
    }
}

/// Result counts of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub canceled_flights: usize,
    pub total_delay_minutes: i64,
    pub swapped_tail_assignments: usize,
    pub used_gates: usize,
    pub schedule_aircraft_cost: f64,
    pub gate_cost: f64,
    pub total_cost: f64,
    /// `None` when the lower bound is not positive.
    pub optimality_gap: Option<f64>,
    pub cpu_seconds: f64,
}

/// `(UB - LB) / LB`; zero when the bounds meet, `None` when undefined.
pub fn optimality_gap(upper: f64, lower: f64) -> Option<f64> {
    if upper - lower <= 1e-9 * upper.abs().max(1.0) {
        Some(0.0)
    } else if lower <= 0.0 {
        None
    } else {
        Some((upper - lower) / lower)
    }
}

/// Recomputes every count and cost from the plan and the instance data.
pub fn compute_metrics(inst: &Instance, plan: &RecoveryPlan, cpu_seconds: f64) -> Result<Metrics> {
    let cfg = &inst.config;
    let fidx = inst.flight_index();
    let lookup = |id: &str| {
        fidx.get(id).copied().ok_or_else(|| RecoveryError::Reference(format!("plan references unknown flight '{id}'")))
    };
    let mut schedule = 0.0;
    let mut canceled = 0;
    for id in &plan.cancelled {
        let j = lookup(id)?;
        schedule += inst.cancel_cost(j);
        if !inst.flights[j].is_pseudo() {
            canceled += 1;
        }
    }
    let planned: HashMap<&str, HashSet<&str>> = inst
        .aircraft
        .iter()
        .map(|a| (a.id.as_str(), a.planned_flight_ids.iter().map(String::as_str).collect()))
        .collect();
    let mut delay = 0;
    let mut swaps = 0;
    for r in &plan.routes {
        let own = planned
            .get(r.aircraft.as_str())
            .ok_or_else(|| RecoveryError::Reference(format!("plan references unknown aircraft '{}'", r.aircraft)))?;
        for leg in &r.legs {
            lookup(&leg.flight)?;
            delay += leg.delay;
            if !own.contains(leg.flight.as_str()) {
                swaps += 1;
            }
        }
    }
    schedule += delay as f64 * cfg.delay_cost_per_min + swaps as f64 * cfg.swap_cost;
    let gate_cost = plan.gates.iter().fold(0.0, |acc, g| acc + cfg.gate_cost(&g.airport, &g.gate_type));
    Ok(Metrics {
        canceled_flights: canceled,
        total_delay_minutes: delay,
        swapped_tail_assignments: swaps,
        used_gates: plan.gates.len(),
        schedule_aircraft_cost: schedule,
        gate_cost,
        total_cost: schedule + gate_cost,
        optimality_gap: optimality_gap(plan.upper_bound, plan.lower_bound),
        cpu_seconds,
    })
}

/// One outer iteration of the decomposition.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub gap: Option<f64>,
    /// What the subproblem said about the master's selection.
    pub outcome: String,
    pub columns_added: usize,
    pub cuts_added: Vec<String>,
    pub patterns: usize,
    pub master_seconds: f64,
    pub subproblem_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    /// Gap within tolerance.
    Solved,
    TimeLimit,
    /// Every cut family exhausted with the gap still open.
    Stalled,
    /// The sequential method's gate stage has no assignment.
    GateInfeasible,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub method: String,
    pub status: RunStatus,
    /// Gates missing at the sequential method's selection.
    pub gate_shortfall: Option<u32>,
    pub plan: Option<RecoveryPlan>,
    pub metrics: Option<Metrics>,
    pub log: Vec<IterationRecord>,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| RecoveryError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    /// One CSV header plus one row with the table columns.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| RecoveryError::Io(std::io::Error::other(e));
        w.write_record([
            "method",
            "status",
            "canceled_flights",
            "total_delay_minutes",
            "swapped_tail_assignments",
            "used_gates",
            "schedule_aircraft_cost",
            "gate_cost",
            "total_cost",
            "optimality_gap",
            "cpu_seconds",
        ])
        .map_err(io)?;
        let status = serde_json::to_value(&self.status).expect("status serializes");
        let mut row = vec![self.method.clone(), status.as_str().unwrap_or_default().to_string()];
        match &self.metrics {
            Some(m) => row.extend([
                m.canceled_flights.to_string(),
                m.total_delay_minutes.to_string(),
                m.swapped_tail_assignments.to_string(),
                m.used_gates.to_string(),
                m.schedule_aircraft_cost.to_string(),
                m.gate_cost.to_string(),
                m.total_cost.to_string(),
                m.optimality_gap.map_or(String::new(), |g| format!("{:.4}", g)),
                format!("{:.3}", m.cpu_seconds),
            ]),
            None => row.extend(std::iter::repeat_n(String::new(), 9)),
        }
        w.write_record(&row).map_err(io)?;
        w.flush()?;
        Ok(())
    }
}
