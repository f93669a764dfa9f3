//! Gate subproblem at a fixed route selection: separation by (airport, gate
//! type), the feasibility check with its early infeasibility certificate,
//! the optimality solve, and the physical gate assignment.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cut::CutFunctional;
use crate::error::{RecoveryError, Result};
use crate::lp::{solve_lp, solve_mip, LinearProgram, LpStatus, MipOptions, MipStatus, Relation};
use crate::network::{ActKey, Network};
use crate::pattern::{customized_init, enumerate_patterns, max_dual_weight, price_patterns, GatePattern, PatternDuals};
use crate::route::AircraftRoute;

const TOL_CERT: f64 = 1e-6;
const TOL_PHASE1: f64 = 1e-7;

/// One restricted subproblem: demanded activities and forced connections
/// over one or more gate groups.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subproblem {
    pub groups: Vec<usize>,
    /// Demanded activities per group, in service order.
    pub demands: BTreeMap<usize, Vec<ActKey>>,
    /// Connections flown by the selection, per group.
    pub forced: BTreeMap<usize, Vec<usize>>,
}

impl Subproblem {
    pub fn is_empty(&self) -> bool {
        self.demands.values().all(Vec::is_empty)
    }

    fn allowed(&self, g: usize) -> HashSet<ActKey> {
        self.demands.get(&g).map(|d| d.iter().copied().collect()).unwrap_or_default()
    }

    fn all_forced(&self) -> Vec<usize> {
        self.forced.values().flatten().copied().collect()
    }
}

/// Demanded activities and flown connections of a route selection.
pub fn demand_of(net: &Network, routes: &[&AircraftRoute]) -> (BTreeSet<ActKey>, BTreeSet<usize>) {
    let mut acts = BTreeSet::new();
    let mut pairs = BTreeSet::new();
    for r in routes {
        for &c in &r.copies {
            acts.extend(net.copy_activities(c));
        }
        pairs.extend(r.pairs(net));
    }
    (acts, pairs)
}

fn build_subproblems(net: &Network, routes: &[&AircraftRoute], separate: bool) -> Vec<Subproblem> {
    let (acts, pairs) = demand_of(net, routes);
    let mut demands: BTreeMap<usize, Vec<ActKey>> = BTreeMap::new();
    for (g, group) in net.groups.iter().enumerate() {
        let d: Vec<ActKey> = group.activities.iter().map(|a| a.key).filter(|k| acts.contains(k)).collect();
        if !d.is_empty() {
            demands.insert(g, d);
        }
    }
    let mut forced: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &k in &pairs {
        let conn = &net.connections[k];
        let g = net.group_of[&(conn.airport, conn.gate_type)];
        forced.entry(g).or_default().push(k);
    }
    if separate {
        demands
            .into_iter()
            .map(|(g, d)| Subproblem {
                groups: vec![g],
                demands: BTreeMap::from([(g, d)]),
                forced: forced.remove(&g).map(|f| BTreeMap::from([(g, f)])).unwrap_or_default(),
            })
            .collect()
    } else if demands.is_empty() {
        Vec::new()
    } else {
        vec![Subproblem { groups: demands.keys().copied().collect(), demands, forced }]
    }
}

/// One subproblem per (airport, gate type) with nonempty demand, in group order.
pub fn separate_bsp(net: &Network, routes: &[&AircraftRoute]) -> Vec<Subproblem> {
    build_subproblems(net, routes, true)
}

/// The whole subproblem as a single problem over every demanded group.
pub fn monolithic_bsp(net: &Network, routes: &[&AircraftRoute]) -> Vec<Subproblem> {
    build_subproblems(net, routes, false)
}

/// Patterns generated so far, per group; reused across outer iterations.
#[derive(Clone, Debug, Default)]
pub struct PatternStore {
    per_group: Vec<Vec<GatePattern>>,
    keys: HashSet<GatePattern>,
}

impl PatternStore {
    pub fn new(net: &Network) -> Self {
        PatternStore { per_group: vec![Vec::new(); net.groups.len()], keys: HashSet::new() }
    }

    pub fn insert(&mut self, p: GatePattern) -> bool {
        if self.keys.insert(p.clone()) {
            self.per_group[p.group].push(p);
            true
        } else {
            false
        }
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    /// Stored patterns usable by `sp` (every activity demanded).
    fn usable(&self, sp: &Subproblem) -> Vec<GatePattern> {
        let mut out = Vec::new();
        for &g in &sp.groups {
            let allowed = sp.allowed(g);
            out.extend(self.per_group[g].iter().filter(|p| p.acts.iter().all(|a| allowed.contains(a))).cloned());
        }
        out
    }
}

/// Knobs shared by the feasibility and optimality solves.
#[derive(Clone, Copy, Debug)]
pub struct SubOptions {
    pub certificate: bool,
    pub addini: usize,
    pub columns_per_round: usize,
    pub enumeration_budget: usize,
    pub deadline: Option<Instant>,
}

impl SubOptions {
    pub fn from_config(net: &Network, deadline: Option<Instant>) -> Self {
        let c = &net.inst.config;
        SubOptions {
            certificate: c.certificate,
            addini: c.addini,
            columns_per_round: c.columns_per_round,
            enumeration_budget: c.enumeration_budget,
            deadline,
        }
    }

    fn expired(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FeasibilityOutcome {
    Feasible,
    /// The certificate proved the full relaxation infeasible; the cut uses
    /// the certificate's multipliers.
    Certified {
        cut: CutFunctional,
    },
    /// Pricing converged with the relaxation infeasible.
    Farkas {
        cut: CutFunctional,
    },
    /// The relaxation is feasible but no integer assignment exists;
    /// `exact` is false when the pattern universe was too large to confirm.
    Rejected {
        exact: bool,
    },
    /// Stopped because a sibling proved infeasibility.
    Cancelled,
}

/// Restricted model over a pattern pool.
struct Rows {
    act: HashMap<ActKey, usize>,
    pair: HashMap<usize, usize>,
    cap: HashMap<usize, usize>,
}

fn restricted_lp(net: &Network, sp: &Subproblem, pool: &[GatePattern], phase_one: bool) -> (LinearProgram, Rows) {
    let mut lp = LinearProgram::new();
    for (i, p) in pool.iter().enumerate() {
        let cost = if phase_one { 0.0 } else { p.cost(net) };
        lp.add_var(format!("w_{i}"), cost, 0.0, f64::INFINITY);
    }
    let mut act_coefs: BTreeMap<ActKey, Vec<(usize, f64)>> = BTreeMap::new();
    let mut pair_coefs: BTreeMap<usize, Vec<(usize, f64)>> = BTreeMap::new();
    let mut cap_coefs: BTreeMap<usize, Vec<(usize, f64)>> = BTreeMap::new();
    for d in sp.demands.values().flatten() {
        act_coefs.insert(*d, Vec::new());
    }
    for k in sp.all_forced() {
        pair_coefs.insert(k, Vec::new());
    }
    for &g in &sp.groups {
        cap_coefs.insert(g, Vec::new());
    }
    for (i, p) in pool.iter().enumerate() {
        for a in &p.acts {
            act_coefs.get_mut(a).expect("pattern activity not demanded").push((i, 1.0));
        }
        for k in p.pairs(net) {
            if let Some(c) = pair_coefs.get_mut(&k) {
                c.push((i, 1.0));
            }
        }
        cap_coefs.get_mut(&p.group).expect("pattern outside subproblem").push((i, 1.0));
    }
    let mut rows = Rows { act: HashMap::new(), pair: HashMap::new(), cap: HashMap::new() };
    for (a, c) in act_coefs {
        let r = lp.add_row(net.act_label(a), c, Relation::Eq, 1.0);
        rows.act.insert(a, r);
    }
    for (k, c) in pair_coefs {
        let r = lp.add_row(format!("pair_{k}"), c, Relation::Eq, 1.0);
        rows.pair.insert(k, r);
    }
    for (g, c) in cap_coefs {
        let r = lp.add_row(format!("cap_{}", net.group_label(g)), c, Relation::Le, net.groups[g].capacity as f64);
        rows.cap.insert(g, r);
    }
    if phase_one {
        let n_rows = lp.num_rows();
        for row in 0..n_rows {
            let sign = if rows.cap.values().any(|&r| r == row) { -1.0 } else { 1.0 };
            let v = lp.add_var(format!("art_{row}"), 1.0, 0.0, f64::INFINITY);
            lp.add_coef(row, v, sign);
        }
    }
    (lp, rows)
}

/// Row duals as pattern duals, with negative connection duals moved onto
/// the arrival row of the connection's first copy.
fn pattern_duals(net: &Network, sp: &Subproblem, rows: &Rows, y: &[f64]) -> BTreeMap<usize, PatternDuals> {
    let mut out: BTreeMap<usize, PatternDuals> = sp.groups.iter().map(|&g| (g, PatternDuals::default())).collect();
    for (a, &r) in &rows.act {
        out.get_mut(&net.act_group[a]).unwrap().act.insert(*a, y[r]);
    }
    for (&k, &r) in &rows.pair {
        let conn = &net.connections[k];
        let g = net.group_of[&(conn.airport, conn.gate_type)];
        let d = out.get_mut(&g).unwrap();
        if y[r] < 0.0 {
            *d.act.entry(net.arr_key(conn.pred)).or_insert(0.0) += y[r];
            d.pair.insert(k, 0.0);
        } else {
            d.pair.insert(k, y[r]);
        }
    }
    for (g, &r) in &rows.cap {
        out.get_mut(g).unwrap().cap = y[r];
    }
    out
}

/// Cut functional from per-group duals; `caps` gives the multiplier
/// placed on each group's capacity (a nonnegative `delta`).
fn functional(net: &Network, duals: &BTreeMap<usize, PatternDuals>, delta: &BTreeMap<usize, f64>) -> CutFunctional {
    let mut f = CutFunctional::default();
    for (g, d) in duals {
        for (a, v) in &d.act {
            if *v != 0.0 {
                f.act.insert(*a, *v);
            }
        }
        for (k, v) in &d.pair {
            if *v != 0.0 {
                f.pair.insert(*k, *v);
            }
        }
        f.constant += delta[g] * net.groups[*g].capacity as f64;
    }
    f
}

fn integer_solve(
    net: &Network,
    sp: &Subproblem,
    pool: &[GatePattern],
    opts: &SubOptions,
) -> Result<Option<(f64, Vec<GatePattern>)>> {
    if pool.is_empty() {
        return Ok(if sp.is_empty() { Some((0.0, Vec::new())) } else { None });
    }
    let (lp, _) = restricted_lp(net, sp, pool, false);
    let ints: Vec<usize> = (0..pool.len()).collect();
    let sol = solve_mip(&lp, &ints, &MipOptions { deadline: opts.deadline, node_limit: 0 })?;
    match sol.status {
        MipStatus::Infeasible => Ok(None),
        MipStatus::TimeLimit if !sol.has_incumbent() => Err(RecoveryError::TimeLimit),
        _ => {
            let chosen = pool.iter().zip(&sol.x).filter(|(_, &x)| x > 0.5).map(|(p, _)| p.clone()).collect();
            Ok(Some((sol.objective, chosen)))
        }
    }
}

/// Every pattern over the demanded activities, or `None` past the budget.
fn full_universe(net: &Network, sp: &Subproblem, budget: usize) -> Option<Vec<GatePattern>> {
    let mut out = Vec::new();
    for &g in &sp.groups {
        let left = budget.checked_sub(out.len())?;
        out.extend(enumerate_patterns(net, g, &sp.allowed(g), left)?);
    }
    Some(out)
}

/// First-fit packing of demanded activities, keeping every flown
/// connection's arrival and departure adjacent.
pub fn greedy_cover(net: &Network, sp: &Subproblem) -> Vec<GatePattern> {
    let cap = net.inst.config.max_legs;
    let mut out = Vec::new();
    for &g in &sp.groups {
        let acts: HashMap<ActKey, &crate::network::Activity> =
            net.groups[g].activities.iter().map(|a| (a.key, a)).collect();
        let order: HashMap<ActKey, usize> =
            net.groups[g].activities.iter().enumerate().map(|(i, a)| (a.key, i)).collect();
        let mut next: HashMap<ActKey, ActKey> = HashMap::new();
        let mut has_pred: HashSet<ActKey> = HashSet::new();
        for &k in sp.forced.get(&g).into_iter().flatten() {
            let c = &net.connections[k];
            next.insert(net.arr_key(c.pred), net.dep_key(c.succ));
            has_pred.insert(net.dep_key(c.succ));
        }
        let mut blocks: Vec<Vec<ActKey>> = Vec::new();
        for &a in &sp.demands[&g] {
            if has_pred.contains(&a) {
                continue;
            }
            let mut b = vec![a];
            while let Some(&n) = next.get(b.last().unwrap()) {
                b.push(n);
            }
            blocks.push(b);
        }
        blocks.sort_by_key(|b| order[&b[0]]);
        let mut gates: Vec<Vec<ActKey>> = Vec::new();
        for b in blocks {
            let fits = |gate: &Vec<ActKey>| {
                gate.len() + b.len() <= cap
                    && net.gate_follows(acts[gate.last().unwrap()], acts[&b[0]])
                    && b.iter().all(|x| gate.iter().all(|y| acts[x].flight != acts[y].flight))
            };
            match gates.iter_mut().find(|gate| fits(gate)) {
                Some(gate) => gate.extend(b),
                None => gates.push(b),
            }
        }
        for acts in gates {
            let p = GatePattern { group: g, acts };
            if p.check(net).is_ok() {
                out.push(p);
            }
        }
    }
    out
}

fn initial_pool(net: &Network, sp: &Subproblem, store: &PatternStore, opts: &SubOptions) -> Vec<GatePattern> {
    let mut pool = store.usable(sp);
    let mut seen: HashSet<GatePattern> = pool.iter().cloned().collect();
    let mut push = |p: GatePattern, pool: &mut Vec<GatePattern>| {
        if seen.insert(p.clone()) {
            pool.push(p);
        }
    };
    for &g in &sp.groups {
        let allowed = sp.allowed(g);
        let forced = sp.forced.get(&g).cloned().unwrap_or_default();
        for p in customized_init(net, g, &allowed, &forced, &pool.clone(), opts.addini) {
            push(p, &mut pool);
        }
        for &a in &sp.demands[&g] {
            push(GatePattern { group: g, acts: vec![a] }, &mut pool);
        }
    }
    for p in greedy_cover(net, sp) {
        push(p, &mut pool);
    }
    pool
}

/// Counters gathered across subproblem solves.
#[derive(Debug, Default)]
pub struct SubStats {
    pub certificates: AtomicUsize,
    pub farkas: AtomicUsize,
    pub rejected: AtomicUsize,
    pub lp_solves: AtomicUsize,
    pub completions: AtomicUsize,
}

/// Feasibility check of one subproblem. Returns the outcome and the pool
/// it ended with.
pub fn check_one(
    net: &Network,
    sp: &Subproblem,
    store: &PatternStore,
    opts: &SubOptions,
    cancel: &AtomicBool,
    stats: &SubStats,
) -> Result<(FeasibilityOutcome, Vec<GatePattern>)> {
    let mut pool = initial_pool(net, sp, store, opts);
    if integer_solve(net, sp, &pool, opts)?.is_some() {
        return Ok((FeasibilityOutcome::Feasible, pool));
    }
    let mut seen: HashSet<GatePattern> = pool.iter().cloned().collect();
    loop {
        if cancel.load(Ordering::Relaxed) {
            return Ok((FeasibilityOutcome::Cancelled, pool));
        }
        if opts.expired() {
            return Err(RecoveryError::TimeLimit);
        }
        let (lp, rows) = restricted_lp(net, sp, &pool, true);
        let sol = solve_lp(&lp)?;
        stats.lp_solves.fetch_add(1, Ordering::Relaxed);
        if sol.status != LpStatus::Optimal {
            return Err(RecoveryError::Lp(crate::lp::LpError::Numerical("phase-one LP not optimal".into())));
        }
        if sol.objective <= TOL_PHASE1 {
            break;
        }
        let duals = pattern_duals(net, sp, &rows, &sol.duals);
        let lambda_b: f64 = rows.act.values().chain(rows.pair.values()).map(|&r| sol.duals[r]).sum();
        let delta_bar: BTreeMap<usize, f64> = duals.iter().map(|(g, d)| (*g, -d.cap)).collect();

        let mut new_cols = Vec::new();
        let mut delta_hat = BTreeMap::new();
        let mut bound = 0.0;
        for (&g, d) in &duals {
            let allowed = sp.allowed(g);
            if opts.certificate {
                let (pmax, _) = max_dual_weight(net, g, &allowed, d);
                let dh = delta_bar[&g].max(pmax);
                bound += dh * net.groups[g].capacity as f64;
                delta_hat.insert(g, dh);
            }
            new_cols.extend(price_patterns(net, g, &allowed, d, 0.0, opts.columns_per_round));
        }
        if opts.certificate && lambda_b - bound > TOL_CERT {
            stats.certificates.fetch_add(1, Ordering::Relaxed);
            cancel.store(true, Ordering::Relaxed);
            let cut = functional(net, &duals, &delta_hat);
            return Ok((FeasibilityOutcome::Certified { cut }, pool));
        }
        let mut added = false;
        for (p, _) in new_cols {
            if seen.insert(p.clone()) {
                pool.push(p);
                added = true;
            }
        }
        if !added {
            stats.farkas.fetch_add(1, Ordering::Relaxed);
            let cut = functional(net, &duals, &delta_bar);
            return Ok((FeasibilityOutcome::Farkas { cut }, pool));
        }
    }
    if integer_solve(net, sp, &pool, opts)?.is_some() {
        return Ok((FeasibilityOutcome::Feasible, pool));
    }
    stats.completions.fetch_add(1, Ordering::Relaxed);
    match full_universe(net, sp, opts.enumeration_budget) {
        Some(all) => {
            if integer_solve(net, sp, &all, opts)?.is_some() {
                Ok((FeasibilityOutcome::Feasible, all))
            } else {
                stats.rejected.fetch_add(1, Ordering::Relaxed);
                Ok((FeasibilityOutcome::Rejected { exact: true }, pool))
            }
        }
        None => {
            stats.rejected.fetch_add(1, Ordering::Relaxed);
            Ok((FeasibilityOutcome::Rejected { exact: false }, pool))
        }
    }
}

/// Optimum of one subproblem.
#[derive(Clone, Debug, PartialEq)]
pub struct SubOptimum {
    /// Integer optimum over the final pool (exact unless `exact` is false).
    pub value: f64,
    pub lr_value: f64,
    pub exact: bool,
    /// Normalized duals of the converged relaxation, per group.
    pub duals: BTreeMap<usize, PatternDuals>,
    pub cut: CutFunctional,
    pub patterns: Vec<GatePattern>,
}

/// Column generation on the relaxation, then the integer restriction,
/// falling back to the full pattern universe if they disagree.
pub fn optimize_one(
    net: &Network,
    sp: &Subproblem,
    mut pool: Vec<GatePattern>,
    opts: &SubOptions,
    stats: &SubStats,
) -> Result<(SubOptimum, Vec<GatePattern>)> {
    let mut seen: HashSet<GatePattern> = pool.iter().cloned().collect();
    let (lr_value, duals) = loop {
        if opts.expired() {
            return Err(RecoveryError::TimeLimit);
        }
        let (lp, rows) = restricted_lp(net, sp, &pool, false);
        let sol = solve_lp(&lp)?;
        stats.lp_solves.fetch_add(1, Ordering::Relaxed);
        if sol.status != LpStatus::Optimal {
            return Err(RecoveryError::Lp(crate::lp::LpError::Numerical("subproblem relaxation not optimal".into())));
        }
        let duals = pattern_duals(net, sp, &rows, &sol.duals);
        let mut added = false;
        for (&g, d) in &duals {
            let c = net.groups[g].cost;
            for (p, _) in price_patterns(net, g, &sp.allowed(g), d, c, opts.columns_per_round) {
                if seen.insert(p.clone()) {
                    pool.push(p);
                    added = true;
                }
            }
        }
        if !added {
            break (sol.objective, duals);
        }
    };
    let delta: BTreeMap<usize, f64> = duals.iter().map(|(g, d)| (*g, -d.cap)).collect();
    let cut = functional(net, &duals, &delta);
    let (mut value, mut patterns) = integer_solve(net, sp, &pool, opts)?
        .ok_or_else(|| RecoveryError::Lp(crate::lp::LpError::Numerical("feasible subproblem lost".into())))?;
    let mut exact = true;
    if value > lr_value + 1e-6 {
        stats.completions.fetch_add(1, Ordering::Relaxed);
        match full_universe(net, sp, opts.enumeration_budget) {
            Some(all) => {
                if let Some((v, p)) = integer_solve(net, sp, &all, opts)? {
                    if v < value {
                        value = v;
                        patterns = p;
                    }
                }
            }
            None => exact = false,
        }
    }
    Ok((SubOptimum { value, lr_value, exact, duals, cut, patterns }, pool))
}

/// Aggregated outcome of the subproblem at one route selection.
#[derive(Clone, Debug, PartialEq)]
pub enum BspOutcome {
    Feasible {
        value: f64,
        lr_value: f64,
        exact: bool,
        /// Aggregated optimality-cut functional.
        cut: CutFunctional,
        patterns: Vec<GatePattern>,
        optima: Vec<SubOptimum>,
    },
    Infeasible {
        /// Feasibility cuts, one per infeasible subproblem.
        cuts: Vec<CutFunctional>,
        /// Whether a no-good on the selection is justified.
        nogood: bool,
        certified: bool,
    },
}

/// Feasibility check then optimality solve of every subproblem, in
/// parallel on the current rayon pool.
pub fn solve_bsp(
    net: &Network,
    sps: &[Subproblem],
    store: &mut PatternStore,
    opts: &SubOptions,
    stats: &SubStats,
) -> Result<BspOutcome> {
    let cancel = AtomicBool::new(false);
    let checked: Vec<Result<(FeasibilityOutcome, Vec<GatePattern>)>> =
        sps.par_iter().map(|sp| check_one(net, sp, store, opts, &cancel, stats)).collect();
    let mut pools = Vec::with_capacity(sps.len());
    let mut cuts = Vec::new();
    let mut nogood = false;
    let mut certified = false;
    for res in checked {
        let (outcome, pool) = res?;
        for p in &pool {
            store.insert(p.clone());
        }
        match outcome {
            FeasibilityOutcome::Feasible | FeasibilityOutcome::Cancelled => {}
            FeasibilityOutcome::Certified { cut } => {
                certified = true;
                nogood = true;
                cuts.push(cut);
            }
            FeasibilityOutcome::Farkas { cut } => cuts.push(cut),
            FeasibilityOutcome::Rejected { .. } => nogood = true,
        }
        pools.push(pool);
    }
    if nogood || !cuts.is_empty() {
        return Ok(BspOutcome::Infeasible { cuts, nogood, certified });
    }
    let solved: Vec<Result<(SubOptimum, Vec<GatePattern>)>> =
        sps.par_iter().zip(pools).map(|(sp, pool)| optimize_one(net, sp, pool, opts, stats)).collect();
    let mut value = 0.0;
    let mut lr_value = 0.0;
    let mut exact = true;
    let mut cut = CutFunctional::default();
    let mut patterns = Vec::new();
    let mut optima = Vec::new();
    for res in solved {
        let (opt, pool) = res?;
        for p in pool {
            store.insert(p);
        }
        value += opt.value;
        lr_value += opt.lr_value;
        exact &= opt.exact;
        cut.absorb(&opt.cut);
        patterns.extend(opt.patterns.iter().cloned());
        optima.push(opt);
    }
    Ok(BspOutcome::Feasible { value, lr_value, exact, cut, patterns, optima })
}

/// Subproblem optimum by explicit enumeration of every pattern over every
/// activity of the demanded groups (redundant rows kept). `None` when
/// infeasible.
pub fn solve_full_bsp(net: &Network, routes: &[&AircraftRoute], budget: usize) -> Result<Option<f64>> {
    let (acts, pairs) = demand_of(net, routes);
    let mut lp = LinearProgram::new();
    let mut pats = Vec::new();
    for g in 0..net.groups.len() {
        if !net.groups[g].activities.iter().any(|a| acts.contains(&a.key)) {
            continue;
        }
        let all: HashSet<ActKey> = net.groups[g].activities.iter().map(|a| a.key).collect();
        let left = budget.saturating_sub(pats.len());
        let found = enumerate_patterns(net, g, &all, left)
            .ok_or_else(|| RecoveryError::Size(format!("patterns of {}", net.group_label(g))))?;
        pats.extend(found);
    }
    let groups: BTreeSet<usize> = pats.iter().map(|p| p.group).collect();
    let mut act_rows: BTreeMap<ActKey, Vec<(usize, f64)>> = BTreeMap::new();
    let mut pair_rows: BTreeMap<usize, Vec<(usize, f64)>> = BTreeMap::new();
    let mut cap_rows: BTreeMap<usize, Vec<(usize, f64)>> = BTreeMap::new();
    for &g in &groups {
        for a in &net.groups[g].activities {
            act_rows.insert(a.key, Vec::new());
        }
        for &k in &net.groups[g].connections {
            pair_rows.insert(k, Vec::new());
        }
        cap_rows.insert(g, Vec::new());
    }
    for (i, p) in pats.iter().enumerate() {
        lp.add_var(format!("w_{i}"), p.cost(net), 0.0, 1.0);
        for a in &p.acts {
            act_rows.get_mut(a).unwrap().push((i, 1.0));
        }
        for k in p.pairs(net) {
            pair_rows.get_mut(&k).unwrap().push((i, 1.0));
        }
        cap_rows.get_mut(&p.group).unwrap().push((i, 1.0));
    }
    for (a, c) in act_rows {
        let rhs = if acts.contains(&a) { 1.0 } else { 0.0 };
        lp.add_row(net.act_label(a), c, Relation::Eq, rhs);
    }
    for (k, c) in pair_rows {
        let rhs = if pairs.contains(&k) { 1.0 } else { 0.0 };
        lp.add_row(format!("pair_{k}"), c, Relation::Ge, rhs);
    }
    for (g, c) in cap_rows {
        lp.add_row(format!("cap_{g}"), c, Relation::Le, net.groups[g].capacity as f64);
    }
    let ints: Vec<usize> = (0..pats.len()).collect();
    let sol = solve_mip(&lp, &ints, &MipOptions::default())?;
    Ok(match sol.status {
        MipStatus::Optimal => Some(sol.objective),
        _ => None,
    })
}

/// A physical gate and the activities it serves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateSchedule {
    pub airport: String,
    pub gate_type: String,
    /// 1-based gate number within its (airport, gate type).
    pub gate: u32,
    pub activities: Vec<String>,
}

/// Maps selected patterns onto numbered gates: per group, patterns in
/// order of their first activity take gates 1, 2, ...
pub fn assemble_gate_assignment(net: &Network, patterns: &[GatePattern]) -> Result<Vec<GateSchedule>> {
    let times: HashMap<ActKey, i64> =
        net.groups.iter().flat_map(|g| g.activities.iter().map(|a| (a.key, a.t_in))).collect();
    let mut by_group: BTreeMap<usize, Vec<&GatePattern>> = BTreeMap::new();
    for p in patterns {
        by_group.entry(p.group).or_default().push(p);
    }
    let mut out = Vec::new();
    for (g, mut ps) in by_group {
        let group = &net.groups[g];
        if ps.len() > group.capacity as usize {
            return Err(RecoveryError::Capacity(format!(
                "{} patterns at {} with {} gates",
                ps.len(),
                net.group_label(g),
                group.capacity
            )));
        }
        ps.sort_by_key(|p| (times[&p.acts[0]], p.acts.clone()));
        for (i, p) in ps.into_iter().enumerate() {
            out.push(GateSchedule {
                airport: net.inst.airports[group.airport].code.clone(),
                gate_type: net.inst.gate_types[group.gate_type].id.clone(),
                gate: i as u32 + 1,
                activities: p.acts.iter().map(|&a| net.act_label(a)).collect(),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::route::seed_routes;

    fn opts() -> SubOptions {
        SubOptions { certificate: true, addini: 3, columns_per_round: 10, enumeration_budget: 100_000, deadline: None }
    }

    #[test]
    fn t1_separation_trace() {
        let net = Network::build(&fixtures::t1()).unwrap();
        let route = seed_routes(&net)[0][0].clone();
        let sps = separate_bsp(&net, &[&route]);
        assert_eq!(sps.len(), 2);
        let (f1, f2) = (net.copies_of_flight[0][0], net.copies_of_flight[1][0]);
        let a = &sps[0];
        let b = &sps[1];
        assert_eq!(net.group_label(a.groups[0]), "A/narrow");
        assert_eq!(a.demands[&a.groups[0]], vec![ActKey::Dep(f1), ActKey::Arr(f2)]);
        assert!(a.forced.is_empty());
        assert_eq!(b.demands[&b.groups[0]], vec![ActKey::Arr(f1), ActKey::Dep(f2)]);
        assert_eq!(b.forced[&b.groups[0]], vec![net.conn_index[&(f1, f2)]]);
        assert!(separate_bsp(&net, &[]).is_empty());
    }

    #[test]
    fn t1_bsp_value_and_gates() {
        let net = Network::build(&fixtures::t1()).unwrap();
        let route = seed_routes(&net)[0][0].clone();
        let sps = separate_bsp(&net, &[&route]);
        let mut store = PatternStore::new(&net);
        let stats = SubStats::default();
        let BspOutcome::Feasible { value, patterns, cut, .. } =
            solve_bsp(&net, &sps, &mut store, &opts(), &stats).unwrap()
        else {
            panic!("T1 must be gate feasible")
        };
        assert_eq!(value, 8.0);
        // the optimality cut is tight at its generating selection
        assert!((cut.route_coef(&net, &route) - cut.constant - 8.0).abs() < 1e-9);
        let gates = assemble_gate_assignment(&net, &patterns).unwrap();
        assert_eq!(gates.len(), 2);
        assert_eq!(gates[0].airport, "A");
        assert_eq!(gates[0].gate, 1);
        assert_eq!(gates[0].activities, vec!["dep F1+0", "arr F2+0"]);
        assert_eq!(gates[1].activities, vec!["arr F1+0", "dep F2+0"]);
        assert_eq!(solve_full_bsp(&net, &[&route], 10_000).unwrap(), Some(8.0));
    }

    #[test]
    fn assignment_capacity() {
        let net = Network::build(&fixtures::t1()).unwrap();
        let f1 = net.copies_of_flight[0][0];
        let g = net.act_group[&ActKey::Dep(f1)];
        let p = GatePattern { group: g, acts: vec![ActKey::Dep(f1)] };
        assert!(assemble_gate_assignment(&net, &[]).unwrap().is_empty());
        assert!(matches!(assemble_gate_assignment(&net, &[p.clone(), p]), Err(RecoveryError::Capacity(_))));
    }

    #[test]
    fn separated_matches_monolithic_on_desk_fixtures() {
        let mut compared = 0;
        for seed in 0..15 {
            let net = Network::build(&fixtures::desk_instance(seed, 5)).unwrap();
            let seeds = seed_routes(&net);
            let routes: Vec<&AircraftRoute> = seeds.iter().filter_map(|p| p.first()).collect();
            let Ok(full) = solve_full_bsp(&net, &routes, 20_000) else { continue };
            compared += 1;
            for sps in [separate_bsp(&net, &routes), monolithic_bsp(&net, &routes)] {
                let mut store = PatternStore::new(&net);
                let got = solve_bsp(&net, &sps, &mut store, &opts(), &SubStats::default()).unwrap();
                match (full, got) {
                    (Some(v), BspOutcome::Feasible { value, .. }) => assert!((v - value).abs() < 1e-9, "seed {seed}"),
                    (None, BspOutcome::Infeasible { .. }) => {}
                    (f, g) => panic!("seed {seed}: full {f:?} vs {g:?}"),
                }
            }
        }
        assert!(compared >= 10);
    }
}
