//! The decomposition loop: master by column generation, gate feasibility
//! with cuts on failure, gate optimality with bounds and cuts on success.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use log::{debug, info};

use crate::cut::{occupancy_cuts, ColumnId, CutKind};
use crate::error::{RecoveryError, Result};
use crate::instance::{CutFamily, Instance};
use crate::master::{Master, MasterOutcome};
use crate::network::Network;
use crate::plan::Solution;
use crate::report::{compute_metrics, optimality_gap, IterationRecord, RecoveryPlan, Report, RunStatus};
use crate::route::{seed_routes, AircraftRoute};
use crate::subproblem::{monolithic_bsp, separate_bsp, solve_bsp, BspOutcome, PatternStore, SubOptions, SubStats};

/// Runs `f` on a rayon pool of `workers` threads (0 picks the default).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

/// Full state of a finished decomposition run.
pub struct BcgRun {
    pub net: Network,
    pub status: RunStatus,
    pub best: Solution,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub log: Vec<IterationRecord>,
    pub elapsed: Duration,
    /// Route pools and cuts at termination.
    pub pools: Vec<Vec<AircraftRoute>>,
    pub cuts: Vec<CutKind>,
    pub certificates: usize,
}

impl BcgRun {
    pub fn gap(&self) -> Option<f64> {
        optimality_gap(self.upper_bound, self.lower_bound)
    }

    pub fn report(&self) -> Result<Report> {
        let plan = RecoveryPlan::from_solution(&self.net, &self.best, self.lower_bound)?;
        let metrics = compute_metrics(&self.net.inst, &plan, self.elapsed.as_secs_f64())?;
        Ok(Report {
            method: "bcg".into(),
            status: self.status.clone(),
            gate_shortfall: None,
            plan: Some(plan),
            metrics: Some(metrics),
            log: self.log.clone(),
        })
    }
}

fn within(gap: Option<f64>, eps: f64) -> bool {
    gap.is_some_and(|g| g <= eps)
}

/// Benders-and-column-generation recovery of `inst` under its config.
pub fn run_bcg(inst: &Instance) -> Result<BcgRun> {
    let workers = inst.config.workers;
    with_workers(workers, || bcg_loop(inst))
}

fn bcg_loop(inst: &Instance) -> Result<BcgRun> {
    let start = Instant::now();
    let net = Network::build(inst)?;
    let cfg = net.inst.config.clone();
    let deadline = start + Duration::from_secs_f64(cfg.time_limit.max(0.0));
    let eps = cfg.epsilon;

    let mut master = Master::new(&net, seed_routes(&net));
    if cfg.occupancy_cuts {
        for f in occupancy_cuts(&net) {
            master.add_cut(CutKind::Feasibility(f))?;
        }
    }
    let mut store = PatternStore::new(&net);
    let stats = SubStats::default();
    let opts = SubOptions::from_config(&net, Some(deadline));

    let mut best = Solution::all_cancelled(&net);
    let mut ub = best.total_cost(&net);
    let mut lb: f64 = 0.0;
    let mut log = Vec::new();
    let mut evaluated: HashMap<Vec<ColumnId>, bool> = HashMap::new();
    let mut status = RunStatus::Solved;

    for iteration in 1.. {
        if within(optimality_gap(ub, lb), eps) {
            break;
        }
        if Instant::now() >= deadline {
            status = RunStatus::TimeLimit;
            break;
        }
        let mut rec = IterationRecord { iteration, ..Default::default() };
        let t_master = Instant::now();
        let cols_before = master.columns_added;
        // Aim the bound at the value that would close the gap.
        let target = ub / (1.0 + eps) * (1.0 + 1e-9);
        let ms = match master.solve_toward(Some(deadline), Some(target), cfg.enumeration_budget) {
            Ok(MasterOutcome::Solved(ms)) => ms,
            Ok(MasterOutcome::Exhausted { lower_bound }) => {
                lb = lb.max(lower_bound.min(ub));
                rec.outcome = "exhausted".into();
                finish_record(&mut rec, lb, ub, &store);
                log.push(rec);
                if !within(optimality_gap(ub, lb), eps) {
                    status = RunStatus::Stalled;
                }
                break;
            }
            Ok(MasterOutcome::Stuck { lower_bound }) => {
                lb = lb.max(lower_bound.min(ub));
                rec.outcome = "stuck".into();
                finish_record(&mut rec, lb, ub, &store);
                log.push(rec);
                status = RunStatus::Stalled;
                break;
            }
            Err(RecoveryError::TimeLimit) => {
                status = RunStatus::TimeLimit;
                break;
            }
            Err(e) => return Err(e),
        };
        rec.master_seconds = t_master.elapsed().as_secs_f64();
        rec.columns_added = master.columns_added - cols_before;
        lb = lb.max(ms.lower_bound.min(ub));
        let support = ms.selected.clone();

        if let Some(&feasible) = evaluated.get(&support) {
            // The master keeps proposing a selection already evaluated
            // exactly; remove that single point.
            let cut = if feasible {
                CutKind::Exclude { support: support.clone() }
            } else {
                CutKind::NoGood { support: support.clone() }
            };
            if master.add_cut(cut.clone())? {
                rec.cuts_added.push(cut.name().into());
            }
            rec.outcome = "repeat".into();
            finish_record(&mut rec, lb, ub, &store);
            log.push(rec);
            continue;
        }

        let routes: Vec<&AircraftRoute> = support.iter().map(|&id| master.route(id)).collect();
        let sps = if cfg.separation { separate_bsp(&net, &routes) } else { monolithic_bsp(&net, &routes) };
        let t_sub = Instant::now();
        let outcome = match solve_bsp(&net, &sps, &mut store, &opts, &stats) {
            Ok(o) => o,
            Err(RecoveryError::TimeLimit) => {
                status = RunStatus::TimeLimit;
                break;
            }
            Err(e) => return Err(e),
        };
        rec.subproblem_seconds = t_sub.elapsed().as_secs_f64();

        match outcome {
            BspOutcome::Infeasible { cuts, nogood, certified } => {
                evaluated.insert(support.clone(), false);
                rec.outcome = if certified { "certified-infeasible" } else { "infeasible" }.into();
                let mut added = false;
                for c in cuts {
                    if master.add_cut(CutKind::Feasibility(c))? {
                        rec.cuts_added.push("feasibility".into());
                        added = true;
                    }
                }
                if (nogood || !added) && master.add_cut(CutKind::NoGood { support: support.clone() })? {
                    rec.cuts_added.push("nogood".into());
                }
            }
            BspOutcome::Feasible { value, cut, patterns, .. } => {
                evaluated.insert(support.clone(), true);
                rec.outcome = "feasible".into();
                let total = ms.schedule_cost() + value;
                if total < ub - 1e-9 {
                    ub = total;
                    best = Solution {
                        cancelled: ms.cancelled.clone(),
                        routes: routes.iter().map(|r| (*r).clone()).collect(),
                        patterns,
                    };
                    debug!("new incumbent {ub}");
                }
                if !within(optimality_gap(ub, lb), eps) {
                    let lower = cfg.subproblem_lower_bound;
                    let mut cand = Vec::new();
                    if cfg.has_cut(CutFamily::Bendersopt) {
                        cand.push(CutKind::Optimality(cut));
                    }
                    if cfg.has_cut(CutFamily::Llc) {
                        cand.push(CutKind::Llc { support: support.clone(), value, lower });
                    }
                    if cfg.has_cut(CutFamily::Global) {
                        cand.push(CutKind::Global { support: support.clone(), value, lower });
                    }
                    if cand.is_empty() {
                        cand.push(CutKind::Exclude { support: support.clone() });
                    }
                    for c in cand {
                        let name = c.name();
                        if master.add_cut(c)? {
                            rec.cuts_added.push(name.into());
                        }
                    }
                }
            }
        }
        finish_record(&mut rec, lb, ub, &store);
        info!("iter {iteration}: lb {lb:.3} ub {ub:.3} {} cuts {:?}", rec.outcome, rec.cuts_added);
        log.push(rec);
    }

    let elapsed = start.elapsed();
    let pools = master.pools.clone();
    let cuts = master.cuts.clone();
    drop(master);
    Ok(BcgRun {
        net,
        status,
        best,
        lower_bound: lb,
        upper_bound: ub,
        log,
        elapsed,
        pools,
        cuts,
        certificates: stats.certificates.load(std::sync::atomic::Ordering::Relaxed),
    })
}

fn finish_record(rec: &mut IterationRecord, lb: f64, ub: f64, store: &PatternStore) {
    rec.lower_bound = lb;
    rec.upper_bound = ub;
    rec.gap = optimality_gap(ub, lb);
    rec.patterns = store.len();
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn t1_undisrupted() {
        let run = run_bcg(&fixtures::t1()).unwrap();
        assert_eq!(run.status, RunStatus::Solved);
        assert_eq!(run.upper_bound, 8.0);
        assert!(run.best.violations(&run.net).is_empty());
        let rep = run.report().unwrap();
        let m = rep.metrics.unwrap();
        assert_eq!((m.canceled_flights, m.total_delay_minutes, m.used_gates), (0, 0, 2));
        assert_eq!(m.optimality_gap, Some(0.0));
    }

    #[test]
    fn t1_closure_delays_first_leg() {
        let run = run_bcg(&fixtures::t1_closure()).unwrap();
        assert_eq!(run.upper_bound, 38.0);
        assert!(run.best.violations(&run.net).is_empty());
    }
}
