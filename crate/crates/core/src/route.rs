//! Aircraft routes: seeding from the planned tail assignment and exact
//! pricing by labeling over the flight-copy DAG.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::cut::CutFunctional;
use crate::labeling::PathGraph;
use crate::network::Network;

pub const TOL_RC: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AircraftRoute {
    pub aircraft: usize,
    /// Flight copies in flying order.
    pub copies: Vec<usize>,
    pub cost: f64,
}

impl AircraftRoute {
    pub fn new(net: &Network, aircraft: usize, copies: Vec<usize>) -> Self {
        let cost = copies.iter().map(|&c| net.copy_cost(aircraft, c)).sum();
        AircraftRoute { aircraft, copies, cost }
    }

    /// Connections flown between consecutive copies.
    pub fn pairs<'a>(&'a self, net: &'a Network) -> impl Iterator<Item = usize> + 'a {
        self.copies.windows(2).map(move |w| net.conn_index[&(w[0], w[1])])
    }

    pub fn contains_maintenance(&self, net: &Network) -> bool {
        self.copies.iter().any(|&c| net.copies[c].maintenance)
    }

    pub fn total_delay(&self, net: &Network) -> i64 {
        self.copies.iter().map(|&c| net.copies[c].delay).sum()
    }

    pub fn swaps(&self, net: &Network) -> usize {
        self.copies.iter().filter(|&&c| net.is_swap(self.aircraft, c)).count()
    }

    /// Checks every route invariant; returns the first violation.
    pub fn check(&self, net: &Network) -> Result<(), String> {
        let r = self.aircraft;
        let ac = &net.inst.aircraft[r];
        let cfg = &net.inst.config;
        if self.copies.is_empty() {
            return Err("empty route".into());
        }
        if self.copies.len() > cfg.max_legs {
            return Err(format!("{} legs exceed the cap {}", self.copies.len(), cfg.max_legs));
        }
        let first = &net.copies[self.copies[0]];
        let last = &net.copies[*self.copies.last().unwrap()];
        if net.flight_dep[first.flight] != net.aircraft_start[r] {
            return Err("route does not start at the aircraft's start airport".into());
        }
        if net.flight_arr[last.flight] != net.aircraft_end[r] {
            return Err("route does not end at the aircraft's end airport".into());
        }
        let mut flights = BTreeSet::new();
        for &c in &self.copies {
            let cp = &net.copies[c];
            if !net.usable[c] {
                return Err(format!("copy {} has no slot capacity", net.copy_label(c)));
            }
            if net.inst.flights[cp.flight].fleet_type != ac.fleet_type {
                return Err(format!("copy {} has another fleet type", net.copy_label(c)));
            }
            if !flights.insert(cp.flight) {
                return Err(format!("flight of {} flown twice", net.copy_label(c)));
            }
            if let Some(owner) = net.maint_owner[cp.flight] {
                if owner != r {
                    return Err("route contains another aircraft's maintenance".into());
                }
            }
        }
        for w in self.copies.windows(2) {
            let (a, b) = (&net.copies[w[0]], &net.copies[w[1]]);
            if net.flight_arr[a.flight] != net.flight_dep[b.flight] {
                return Err("consecutive copies do not meet in space".into());
            }
            if a.arr_time + ac.turn_time > b.dep_time {
                return Err("turn time violated".into());
            }
        }
        if let Some(m) = net.aircraft_maint[r] {
            if !flights.contains(&m) {
                return Err("route misses the aircraft's maintenance".into());
            }
        }
        let expect: f64 = self.copies.iter().map(|&c| net.copy_cost(r, c)).sum();
        if (expect - self.cost).abs() > 1e-9 {
            return Err("route cost mismatch".into());
        }
        Ok(())
    }
}

/// Master duals folded onto route elements, in the LP convention
/// `rc = c - y'A`. `copy_term[c]` collects every dual whose row has a
/// coefficient on copy `c` (cover, slots, cut activity weights),
/// `pair_term` the cut duals on connections, and `aircraft_term[r]` the
/// convexity dual plus any constant per-column row coefficients.
#[derive(Clone, Debug, Default)]
pub struct RouteDuals {
    pub copy_term: Vec<f64>,
    pub pair_term: HashMap<usize, f64>,
    pub aircraft_term: Vec<f64>,
}

impl RouteDuals {
    pub fn zero(net: &Network) -> Self {
        RouteDuals {
            copy_term: vec![0.0; net.copies.len()],
            pair_term: HashMap::new(),
            aircraft_term: vec![0.0; net.inst.aircraft.len()],
        }
    }

    /// Assembles the folded duals from per-row master duals.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        net: &Network,
        cover: &[f64],
        slot_dep: &HashMap<usize, f64>,
        slot_arr: &HashMap<usize, f64>,
        aircraft: &[f64],
        cuts: &[(f64, &CutFunctional)],
        constant_rows: &[(f64, f64)],
    ) -> Self {
        let mut d = RouteDuals::zero(net);
        for (c, cp) in net.copies.iter().enumerate() {
            let mut t = cover[cp.flight];
            if let Some(s) = cp.dep_slot {
                t += slot_dep.get(&s).copied().unwrap_or(0.0);
            }
            if let Some(s) = cp.arr_slot {
                t += slot_arr.get(&s).copied().unwrap_or(0.0);
            }
            d.copy_term[c] = t;
        }
        for &(y, f) in cuts {
            if y == 0.0 {
                continue;
            }
            for (key, v) in &f.act {
                d.copy_term[key.copy()] += y * v;
            }
            for (k, v) in &f.pair {
                *d.pair_term.entry(*k).or_insert(0.0) += y * v;
            }
        }
        let constant: f64 = constant_rows.iter().map(|(y, a)| y * a).sum();
        for (r, t) in d.aircraft_term.iter_mut().enumerate() {
            *t = aircraft[r] + constant;
        }
        d
    }
}

pub fn route_reduced_cost(net: &Network, route: &AircraftRoute, duals: &RouteDuals) -> f64 {
    let mut rc = route.cost - duals.aircraft_term[route.aircraft];
    for &c in &route.copies {
        rc -= duals.copy_term[c];
    }
    for k in route.pairs(net) {
        rc -= duals.pair_term.get(&k).copied().unwrap_or(0.0);
    }
    rc
}

/// Copies aircraft `r` may fly, in departure order.
pub fn eligible_copies(net: &Network, r: usize) -> Vec<usize> {
    let fleet = &net.inst.aircraft[r].fleet_type;
    let mut nodes: Vec<usize> = (0..net.copies.len())
        .filter(|&c| {
            let cp = &net.copies[c];
            net.usable[c]
                && net.inst.flights[cp.flight].fleet_type == *fleet
                && net.maint_owner[cp.flight].is_none_or(|o| o == r)
        })
        .collect();
    nodes.sort_by_key(|&c| (net.copies[c].dep_time, c));
    nodes
}

/// Labeling graph of aircraft `r` under `duals`; node `k` is copy `nodes[k]`.
pub fn route_graph(net: &Network, r: usize, duals: &RouteDuals) -> (PathGraph, Vec<usize>) {
    let nodes = eligible_copies(net, r);
    let pos: HashMap<usize, usize> = nodes.iter().enumerate().map(|(k, &c)| (c, k)).collect();
    let ac = &net.inst.aircraft[r];
    let mut g = PathGraph::with_nodes(nodes.len(), net.inst.config.max_legs);
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); net.copies.len()];
    for (k, conn) in net.connections.iter().enumerate() {
        succ[conn.pred].push(k);
    }
    for (k, &c) in nodes.iter().enumerate() {
        let cp = &net.copies[c];
        g.node_cost[k] = net.copy_cost(r, c) - duals.copy_term[c];
        g.group[k] = cp.flight;
        if net.flight_dep[cp.flight] == net.aircraft_start[r] {
            g.source[k] = Some(-duals.aircraft_term[r]);
        }
        g.sink[k] = net.flight_arr[cp.flight] == net.aircraft_end[r];
        for &ck in &succ[c] {
            let conn = &net.connections[ck];
            let Some(&to) = pos.get(&conn.succ) else { continue };
            if cp.arr_time + ac.turn_time <= net.copies[conn.succ].dep_time {
                g.arcs[k].push((to, -duals.pair_term.get(&ck).copied().unwrap_or(0.0)));
            }
        }
    }
    if let Some(m) = net.aircraft_maint[r] {
        // A maintenance copy outside the window leaves the aircraft no route.
        match net.copies_of_flight[m].iter().find_map(|c| pos.get(c)) {
            Some(&k) => g.required = Some(k),
            None => g.max_len = 0,
        }
    }
    (g, nodes)
}

/// Up to `k` routes of aircraft `r` with reduced cost below `-TOL_RC`,
/// cheapest first (ties by copy sequence).
pub fn price_routes(net: &Network, r: usize, duals: &RouteDuals, k: usize) -> Vec<(AircraftRoute, f64)> {
    let (g, nodes) = route_graph(net, r, duals);
    g.best_paths(k, -TOL_RC)
        .into_iter()
        .map(|p| {
            let copies: Vec<usize> = p.nodes.iter().map(|&n| nodes[n]).collect();
            (AircraftRoute::new(net, r, copies), p.cost)
        })
        .collect()
}

/// Every route of aircraft `r` with reduced cost below `below`; `None`
/// when there are more than `limit`.
pub fn routes_below(
    net: &Network,
    r: usize,
    duals: &RouteDuals,
    below: f64,
    limit: usize,
) -> Option<Vec<(AircraftRoute, f64)>> {
    let (g, nodes) = route_graph(net, r, duals);
    let paths = g.all_paths_below(below, limit)?;
    Some(
        paths
            .into_iter()
            .map(|p| {
                let copies: Vec<usize> = p.nodes.iter().map(|&n| nodes[n]).collect();
                (AircraftRoute::new(net, r, copies), p.cost)
            })
            .collect(),
    )
}

/// Initial columns: per aircraft, its planned chain at the smallest
/// feasible delays for every choice of first-leg delay.
pub fn seed_routes(net: &Network) -> Vec<Vec<AircraftRoute>> {
    let fidx = net.inst.flight_index();
    let mut out = Vec::with_capacity(net.inst.aircraft.len());
    for (r, ac) in net.inst.aircraft.iter().enumerate() {
        let mut routes: Vec<AircraftRoute> = Vec::new();
        let plan: Vec<usize> = ac.planned_flight_ids.iter().map(|p| fidx[p.as_str()]).collect();
        if let Some(&first) = plan.first() {
            for &c0 in &net.copies_of_flight[first] {
                if !net.usable[c0] {
                    continue;
                }
                let mut chain = vec![c0];
                let mut ok = true;
                for &f in &plan[1..] {
                    let prev = &net.copies[*chain.last().unwrap()];
                    let next = net.copies_of_flight[f]
                        .iter()
                        .copied()
                        .find(|&c| net.usable[c] && prev.arr_time + ac.turn_time <= net.copies[c].dep_time);
                    match next {
                        Some(c) => chain.push(c),
                        None => {
                            ok = false;
                            break;
                        }
                    }
                }
                if !ok {
                    continue;
                }
                let route = AircraftRoute::new(net, r, chain);
                if route.check(net).is_ok() && !routes.iter().any(|x| x.copies == route.copies) {
                    routes.push(route);
                }
            }
        }
        out.push(routes);
    }
    out
}
