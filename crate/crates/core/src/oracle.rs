//! Exact reference solver: enumerates every feasible route and every gate
//! pattern by plain depth-first search (no pricing, no decomposition) and
//! solves the integrated model as one MILP.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use crate::error::{RecoveryError, Result};
use crate::lp::{solve_mip, LinearProgram, MipOptions, MipStatus, Relation};
use crate::network::{ActKey, Activity, Network};
use crate::pattern::GatePattern;
use crate::plan::Solution;
use crate::route::AircraftRoute;

/// Every feasible route of aircraft `r`, or a size error past `budget`.
pub fn enumerate_routes(net: &Network, r: usize, budget: usize) -> Result<Vec<AircraftRoute>> {
    let ac = &net.inst.aircraft[r];
    let cap = net.inst.config.max_legs;
    let slot_ok = |c: usize| {
        let cp = &net.copies[c];
        let dep = cp.dep_slot.is_none_or(|s| net.inst.slots[s].dep_cap > 0);
        let arr = cp.arr_slot.is_none_or(|s| net.inst.slots[s].arr_cap > 0);
        cp.maintenance || (dep && arr)
    };
    let nodes: Vec<usize> = (0..net.copies.len())
        .filter(|&c| {
            let f = net.copies[c].flight;
            net.inst.flights[f].fleet_type == ac.fleet_type && slot_ok(c) && net.maint_owner[f].is_none_or(|o| o == r)
        })
        .collect();
    let mut out = Vec::new();
    let mut stack: Vec<Vec<usize>> = nodes
        .iter()
        .rev()
        .filter(|&&c| net.flight_dep[net.copies[c].flight] == net.aircraft_start[r])
        .map(|&c| vec![c])
        .collect();
    while let Some(seq) = stack.pop() {
        let last = &net.copies[*seq.last().unwrap()];
        let ends_right = net.flight_arr[last.flight] == net.aircraft_end[r];
        let has_mt = net.aircraft_maint[r].is_none_or(|m| seq.iter().any(|&c| net.copies[c].flight == m));
        if ends_right && has_mt {
            if out.len() >= budget {
                return Err(RecoveryError::Size(format!("routes of aircraft {}", ac.id)));
            }
            out.push(AircraftRoute::new(net, r, seq.clone()));
        }
        if seq.len() >= cap {
            continue;
        }
        for &c in nodes.iter().rev() {
            let cp = &net.copies[c];
            if net.flight_dep[cp.flight] == net.flight_arr[last.flight]
                && last.arr_time + ac.turn_time <= cp.dep_time
                && seq.iter().all(|&s| net.copies[s].flight != cp.flight)
            {
                let mut next = seq.clone();
                next.push(c);
                stack.push(next);
            }
        }
    }
    Ok(out)
}

fn follows(net: &Network, u: &Activity, v: &Activity) -> bool {
    if u.flight == v.flight {
        return false;
    }
    let leaves = matches!(u.key, ActKey::Arr(_) | ActKey::Maint(_));
    let takes = matches!(v.key, ActKey::Dep(_) | ActKey::Maint(_));
    if leaves && takes && net.conn_index.contains_key(&(u.key.copy(), v.key.copy())) && u.t_out <= v.t_in {
        return true;
    }
    u.t_out + net.inst.config.buffer_time <= v.t_in
}

/// Every gate pattern of group `g` over the activities in `live`.
pub fn enumerate_group_patterns(
    net: &Network,
    g: usize,
    live: &HashSet<ActKey>,
    budget: usize,
) -> Result<Vec<GatePattern>> {
    let mut acts: Vec<&Activity> = net.groups[g].activities.iter().filter(|a| live.contains(&a.key)).collect();
    acts.sort_by_key(|a| (a.t_in, a.t_out, a.key));
    let cap = net.inst.config.max_legs;
    let mut out = Vec::new();
    let mut seq = Vec::new();
    fn dfs(
        net: &Network,
        acts: &[&Activity],
        cap: usize,
        budget: usize,
        g: usize,
        seq: &mut Vec<usize>,
        out: &mut Vec<GatePattern>,
    ) -> bool {
        if out.len() >= budget {
            return false;
        }
        out.push(GatePattern { group: g, acts: seq.iter().map(|&i| acts[i].key).collect() });
        if seq.len() >= cap {
            return true;
        }
        let last = *seq.last().unwrap();
        for v in 0..acts.len() {
            if v != last
                && follows(net, acts[last], acts[v])
                && seq.iter().all(|&u| acts[u].flight != acts[v].flight)
                && (acts[last].t_in, acts[last].t_out, acts[last].key) < (acts[v].t_in, acts[v].t_out, acts[v].key)
            {
                seq.push(v);
                let ok = dfs(net, acts, cap, budget, g, seq, out);
                seq.pop();
                if !ok {
                    return false;
                }
            }
        }
        true
    }
    for i in 0..acts.len() {
        seq.push(i);
        let ok = dfs(net, &acts, cap, budget, g, &mut seq, &mut out);
        seq.pop();
        if !ok {
            return Err(RecoveryError::Size(format!("patterns of {}", net.group_label(g))));
        }
    }
    Ok(out)
}

/// Size of the column universe the oracle would build.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleSize {
    pub routes: usize,
    pub patterns: usize,
}

pub struct OracleResult {
    pub solution: Solution,
    pub objective: f64,
    pub size: OracleSize,
}

/// Optimal recovery over the full column universe.
pub fn solve_exact_oracle(net: &Network, budget: usize) -> Result<OracleResult> {
    let mut routes = Vec::new();
    for r in 0..net.inst.aircraft.len() {
        let left = budget.saturating_sub(routes.len());
        routes.extend(enumerate_routes(net, r, left)?);
    }
    let mut live: HashSet<ActKey> = HashSet::new();
    for r in &routes {
        for &c in &r.copies {
            live.extend(net.copy_activities(c));
        }
    }
    let mut patterns = Vec::new();
    for g in 0..net.groups.len() {
        let left = budget.saturating_sub(routes.len() + patterns.len());
        patterns.extend(enumerate_group_patterns(net, g, &live, left)?);
    }
    let size = OracleSize { routes: routes.len(), patterns: patterns.len() };

    let mut lp = LinearProgram::new();
    let nf = net.inst.flights.len();
    for j in 0..nf {
        lp.add_var(format!("z_{j}"), net.inst.cancel_cost(j), 0.0, 1.0);
    }
    for (i, r) in routes.iter().enumerate() {
        lp.add_var(format!("y_{i}"), r.cost, 0.0, 1.0);
    }
    for (i, p) in patterns.iter().enumerate() {
        lp.add_var(format!("w_{i}"), p.cost(net), 0.0, 1.0);
    }
    let yv = |i: usize| nf + i;
    let wv = |i: usize| nf + routes.len() + i;

    let mut cover: Vec<Vec<(usize, f64)>> = (0..nf).map(|j| vec![(j, 1.0)]).collect();
    let mut sdep: BTreeMap<usize, Vec<(usize, f64)>> = BTreeMap::new();
    let mut sarr: BTreeMap<usize, Vec<(usize, f64)>> = BTreeMap::new();
    let mut per_ac: Vec<Vec<(usize, f64)>> = vec![Vec::new(); net.inst.aircraft.len()];
    let mut act: BTreeMap<ActKey, Vec<(usize, f64)>> = BTreeMap::new();
    let mut pair: BTreeMap<usize, Vec<(usize, f64)>> = BTreeMap::new();
    for (i, r) in routes.iter().enumerate() {
        per_ac[r.aircraft].push((yv(i), 1.0));
        for &c in &r.copies {
            let cp = &net.copies[c];
            cover[cp.flight].push((yv(i), 1.0));
            if let Some(s) = cp.dep_slot {
                sdep.entry(s).or_default().push((yv(i), 1.0));
            }
            if let Some(s) = cp.arr_slot {
                sarr.entry(s).or_default().push((yv(i), 1.0));
            }
            for k in net.copy_activities(c) {
                act.entry(k).or_default().push((yv(i), -1.0));
            }
        }
        for w in r.copies.windows(2) {
            pair.entry(net.conn_index[&(w[0], w[1])]).or_default().push((yv(i), -1.0));
        }
    }
    let mut per_group: BTreeMap<usize, Vec<(usize, f64)>> = BTreeMap::new();
    for (i, p) in patterns.iter().enumerate() {
        per_group.entry(p.group).or_default().push((wv(i), 1.0));
        for a in &p.acts {
            act.entry(*a).or_default().push((wv(i), 1.0));
        }
        for w in p.acts.windows(2) {
            if let Some(k) = net.gate_pair(w[0], w[1]) {
                if let Some(row) = pair.get_mut(&k) {
                    row.push((wv(i), 1.0));
                }
            }
        }
    }
    for (j, c) in cover.into_iter().enumerate() {
        lp.add_row(format!("cover_{j}"), c, Relation::Eq, 1.0);
    }
    for (s, c) in sdep {
        lp.add_row(format!("sdep_{s}"), c, Relation::Le, net.inst.slots[s].dep_cap as f64);
    }
    for (s, c) in sarr {
        lp.add_row(format!("sarr_{s}"), c, Relation::Le, net.inst.slots[s].arr_cap as f64);
    }
    for (r, c) in per_ac.into_iter().enumerate() {
        lp.add_row(format!("ac_{r}"), c, Relation::Le, 1.0);
    }
    for (a, c) in act {
        lp.add_row(net.act_label(a), c, Relation::Eq, 0.0);
    }
    for (k, c) in pair {
        lp.add_row(format!("pair_{k}"), c, Relation::Ge, 0.0);
    }
    for (g, c) in per_group {
        lp.add_row(format!("cap_{g}"), c, Relation::Le, net.groups[g].capacity as f64);
    }
    let ints: Vec<usize> = (0..lp.num_vars()).collect();
    let sol = solve_mip(&lp, &ints, &MipOptions::default())?;
    if sol.status != MipStatus::Optimal {
        return Err(RecoveryError::Lp(crate::lp::LpError::Numerical("oracle model not solved".into())));
    }
    let x = &sol.x;
    let solution = Solution {
        cancelled: (0..nf).filter(|&j| x[j] > 0.5).collect(),
        routes: routes.iter().enumerate().filter(|(i, _)| x[yv(*i)] > 0.5).map(|(_, r)| r.clone()).collect(),
        patterns: patterns.iter().enumerate().filter(|(i, _)| x[wv(*i)] > 0.5).map(|(_, p)| p.clone()).collect(),
    };
    Ok(OracleResult { solution, objective: sol.objective, size })
}

/// Copies flown by any feasible route; the rest can never carry demand.
pub fn live_copies(routes: &[AircraftRoute]) -> BTreeSet<usize> {
    routes.iter().flat_map(|r| r.copies.iter().copied()).collect()
}
