//! Route selections, capacity-perturbed gate fixtures, and the exhaustive
//! checks built on them.

use std::collections::HashSet;
use std::sync::atomic::AtomicBool;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use recovery_core::cut::{occupancy_cuts, CutKind};
use recovery_core::fixtures::desk_instance;
use recovery_core::instance::Instance;
use recovery_core::master::{Master, MasterOutcome};
use recovery_core::network::{ActKey, Network};
use recovery_core::oracle::enumerate_routes;
use recovery_core::pattern::{enumerate_patterns, pattern_reduced_cost};
use recovery_core::route::{route_reduced_cost, seed_routes, AircraftRoute};
use recovery_core::seq::gate_need;
use recovery_core::subproblem::{
    check_one, monolithic_bsp, separate_bsp, solve_bsp, solve_full_bsp, BspOutcome, FeasibilityOutcome, PatternStore,
    SubOptions, SubStats,
};

pub const TOL_RC: f64 = 1e-6;
const BUDGET: usize = 50_000;

/// Random flight-disjoint selection with at most one route per aircraft.
pub fn random_selection(net: &Network, rng: &mut impl Rng) -> Option<Vec<AircraftRoute>> {
    let mut order: Vec<usize> = (0..net.inst.aircraft.len()).collect();
    order.shuffle(rng);
    let mut used = HashSet::new();
    let mut out = Vec::new();
    for r in order {
        let routes = enumerate_routes(net, r, 20_000).ok()?;
        if routes.is_empty() || rng.gen_bool(0.15) {
            continue;
        }
        for _ in 0..8 {
            let cand = routes.choose(rng).unwrap();
            if cand.copies.iter().all(|&c| !used.contains(&net.copies[c].flight)) {
                used.extend(cand.copies.iter().map(|&c| net.copies[c].flight));
                out.push(cand.clone());
                break;
            }
        }
    }
    Some(out)
}

/// A selection with gate counts set around its true need; when
/// `starved` one demanded group gets one gate fewer than it needs.
pub struct GateFixture {
    pub net: Network,
    pub routes: Vec<AircraftRoute>,
    pub starved: bool,
}

impl GateFixture {
    pub fn refs(&self) -> Vec<&AircraftRoute> {
        self.routes.iter().collect()
    }
}

pub fn gate_fixture(seed: u64) -> Option<GateFixture> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    let mut net = Network::build(&desk_instance(seed, 4 + seed as usize % 7)).ok()?;
    let routes = random_selection(&net, &mut rng)?;
    if routes.is_empty() {
        return None;
    }
    let refs: Vec<&AircraftRoute> = routes.iter().collect();
    let need = gate_need(&net, &refs).ok()?;
    for (g, grp) in net.groups.iter_mut().enumerate() {
        grp.capacity = need.get(&g).copied().unwrap_or(0) + rng.gen_range(0..=1);
    }
    let demanded: Vec<(usize, u32)> = need.iter().filter(|(_, &n)| n > 0).map(|(&g, &n)| (g, n)).collect();
    let starved = rng.gen_bool(0.5) && !demanded.is_empty();
    if starved {
        // One gate short: the tightest infeasible count.
        let &(g, n) = demanded.choose(&mut rng).unwrap();
        net.groups[g].capacity = n - 1;
    }
    Some(GateFixture { net, routes, starved })
}

/// Whether the early certificate fires on any separated subproblem.
pub fn certificate_fires(net: &Network, routes: &[&AircraftRoute]) -> Result<bool, String> {
    let store = PatternStore::new(net);
    let mut opts = SubOptions::from_config(net, None);
    opts.certificate = true;
    let stats = SubStats::default();
    for sp in separate_bsp(net, routes) {
        let cancel = AtomicBool::new(false);
        let (out, _) = check_one(net, &sp, &store, &opts, &cancel, &stats).map_err(|e| e.to_string())?;
        if matches!(out, FeasibilityOutcome::Certified { .. }) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Full-enumeration verdict; `None` when the universe is too large.
pub fn full_feasible(net: &Network, routes: &[&AircraftRoute]) -> Option<bool> {
    solve_full_bsp(net, routes, BUDGET).ok().map(|v| v.is_some())
}

/// Optimum of the decomposed subproblem (separated or not), `None` if
/// infeasible.
pub fn bsp_value(net: &Network, routes: &[&AircraftRoute], separated: bool) -> Result<Option<f64>, String> {
    let sps = if separated { separate_bsp(net, routes) } else { monolithic_bsp(net, routes) };
    let mut store = PatternStore::new(net);
    let opts = SubOptions::from_config(net, None);
    let stats = SubStats::default();
    match solve_bsp(net, &sps, &mut store, &opts, &stats).map_err(|e| e.to_string())? {
        BspOutcome::Feasible { value, exact, .. } => {
            if exact {
                Ok(Some(value))
            } else {
                Err("inexact subproblem optimum".into())
            }
        }
        BspOutcome::Infeasible { .. } => Ok(None),
    }
}

/// Monolithic and separated optima agree with each other and with full
/// enumeration, as integers. Returns the common value and the seconds
/// spent on the two decomposed solves.
pub fn separation_agrees(net: &Network, routes: &[&AircraftRoute]) -> Result<(Option<i64>, f64), String> {
    let round = |v: Option<f64>| v.map(|x| x.round() as i64);
    let t = std::time::Instant::now();
    let sep = bsp_value(net, routes, true)?;
    let mono = bsp_value(net, routes, false)?;
    let secs = t.elapsed().as_secs_f64();
    if let Some(x) = sep {
        if (x - x.round()).abs() > 1e-6 {
            return Err(format!("non-integral separated optimum {x}"));
        }
    }
    if round(sep) != round(mono) {
        return Err(format!("separated {sep:?} vs monolithic {mono:?}"));
    }
    if let Ok(full) = solve_full_bsp(net, routes, BUDGET) {
        if round(full) != round(sep) {
            return Err(format!("separated {sep:?} vs full enumeration {full:?}"));
        }
    }
    Ok((round(sep), secs))
}

/// Runs a few decomposition rounds on `inst` and, at every converged
/// relaxation, prices every enumerated route and, at every feasible
/// selection, every enumerated pattern. Returns the number of
/// convergences checked.
pub fn pricing_is_exact(inst: &Instance, rounds: usize) -> Result<usize, String> {
    let net = Network::build(inst).map_err(|e| e.to_string())?;
    let universe: Vec<Vec<AircraftRoute>> = (0..net.inst.aircraft.len())
        .map(|r| enumerate_routes(&net, r, 20_000).map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    let mut master = Master::new(&net, seed_routes(&net));
    for f in occupancy_cuts(&net) {
        master.add_cut(CutKind::Feasibility(f)).map_err(|e| e.to_string())?;
    }
    let mut checked = 0;
    for _ in 0..rounds {
        let ms = match master.solve_toward(None, None, 0).map_err(|e| e.to_string())? {
            MasterOutcome::Solved(ms) => ms,
            _ => break,
        };
        let duals = master.last_duals.clone().ok_or("no duals after convergence")?;
        // Support-specific cut coefficients only touch pooled columns, whose
        // reduced costs the relaxation itself keeps nonnegative.
        for route in
            universe.iter().flatten().filter(|r| !master.pools[r.aircraft].iter().any(|p| p.copies == r.copies))
        {
            let rc = route_reduced_cost(&net, route, &duals);
            if rc < -TOL_RC {
                return Err(format!(
                    "after {checked} checks: route {:?} of aircraft {} prices at {rc}",
                    route.copies, route.aircraft
                ));
            }
        }
        checked += 1;

        let support = ms.selected.clone();
        let routes: Vec<&AircraftRoute> = support.iter().map(|&id| master.route(id)).collect();
        let sps = separate_bsp(&net, &routes);
        let mut store = PatternStore::new(&net);
        let opts = SubOptions::from_config(&net, None);
        let stats = SubStats::default();
        let cut = match solve_bsp(&net, &sps, &mut store, &opts, &stats).map_err(|e| e.to_string())? {
            BspOutcome::Feasible { optima, cut, .. } => {
                for (sp, opt) in sps.iter().zip(&optima) {
                    for (&g, d) in &opt.duals {
                        let allowed: HashSet<ActKey> = sp.demands[&g].iter().copied().collect();
                        let pats = enumerate_patterns(&net, g, &allowed, BUDGET).ok_or("pattern universe too large")?;
                        for p in &pats {
                            let rc = pattern_reduced_cost(&net, p, d, net.groups[g].cost);
                            if rc < -TOL_RC {
                                return Err(format!("pattern {:?} prices at {rc}", p.acts));
                            }
                        }
                    }
                    checked += 1;
                }
                Some(CutKind::Optimality(cut))
            }
            BspOutcome::Infeasible { cuts, .. } => cuts.into_iter().next().map(CutKind::Feasibility),
        };
        let cut = cut.unwrap_or(CutKind::NoGood { support: support.clone() });
        let fresh = master.add_cut(cut).map_err(|e| e.to_string())?;
        if !fresh && !master.add_cut(CutKind::Exclude { support }).map_err(|e| e.to_string())? {
            break;
        }
    }
    Ok(checked)
}
