//! Gate patterns: sequences of activities one gate can serve, their exact
//! pricing, and seeding from the connections a master solution flies.

use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::labeling::PathGraph;
use crate::network::{ActKey, Activity, Network};
use crate::route::TOL_RC;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GatePattern {
    pub group: usize,
    /// Activities in service order.
    pub acts: Vec<ActKey>,
}

impl GatePattern {
    /// Connections realized by consecutive arrival/departure activities.
    pub fn pairs(&self, net: &Network) -> Vec<usize> {
        self.acts.windows(2).filter_map(|w| net.gate_pair(w[0], w[1])).collect()
    }

    pub fn cost(&self, net: &Network) -> f64 {
        net.groups[self.group].cost
    }

    pub fn check(&self, net: &Network) -> Result<(), String> {
        if self.acts.is_empty() {
            return Err("empty pattern".into());
        }
        if self.acts.len() > net.inst.config.max_legs {
            return Err("pattern exceeds the activity cap".into());
        }
        let acts = activities(net, self.group);
        let mut flights = BTreeSet::new();
        let mut prev: Option<&Activity> = None;
        for key in &self.acts {
            if net.act_group.get(key) != Some(&self.group) {
                return Err(format!("{} belongs to another gate group", net.act_label(*key)));
            }
            let a = acts[key];
            if !flights.insert(a.flight) {
                return Err("two copies of one flight in a pattern".into());
            }
            if let Some(p) = prev {
                if !net.gate_follows(p, a) {
                    return Err(format!("{} cannot follow {}", net.act_label(a.key), net.act_label(p.key)));
                }
            }
            prev = Some(a);
        }
        Ok(())
    }
}

fn activities(net: &Network, group: usize) -> HashMap<ActKey, &Activity> {
    net.groups[group].activities.iter().map(|a| (a.key, a)).collect()
}

/// Subproblem duals in the LP convention `rc = c - y'A`: activity rows,
/// connection rows, and the (nonpositive) capacity-row dual.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PatternDuals {
    pub act: HashMap<ActKey, f64>,
    pub pair: HashMap<usize, f64>,
    pub cap: f64,
}

pub fn pattern_reduced_cost(net: &Network, p: &GatePattern, duals: &PatternDuals, fixed_cost: f64) -> f64 {
    let mut rc = fixed_cost - duals.cap;
    for k in &p.acts {
        rc -= duals.act.get(k).copied().unwrap_or(0.0);
    }
    for k in p.pairs(net) {
        rc -= duals.pair.get(&k).copied().unwrap_or(0.0);
    }
    rc
}

/// Activities of `group` restricted to `allowed`, in service order.
fn allowed_activities<'a>(net: &'a Network, group: usize, allowed: &HashSet<ActKey>) -> Vec<&'a Activity> {
    net.groups[group].activities.iter().filter(|a| allowed.contains(&a.key)).collect()
}

/// Labeling graph over the allowed activities of one group.
pub fn pattern_graph(
    net: &Network,
    group: usize,
    allowed: &HashSet<ActKey>,
    duals: &PatternDuals,
    fixed_cost: f64,
) -> (PathGraph, Vec<ActKey>) {
    let acts = allowed_activities(net, group, allowed);
    let mut g = PathGraph::with_nodes(acts.len(), net.inst.config.max_legs);
    for (i, u) in acts.iter().enumerate() {
        g.node_cost[i] = -duals.act.get(&u.key).copied().unwrap_or(0.0);
        g.group[i] = u.flight;
        g.source[i] = Some(fixed_cost - duals.cap);
        g.sink[i] = true;
        for (j, v) in acts.iter().enumerate().skip(i + 1) {
            if net.gate_follows(u, v) {
                let pc = net.gate_pair(u.key, v.key).and_then(|k| duals.pair.get(&k)).copied().unwrap_or(0.0);
                g.arcs[i].push((j, -pc));
            }
        }
    }
    (g, acts.iter().map(|a| a.key).collect())
}

/// Up to `k` patterns with reduced cost below `-TOL_RC`, cheapest first.
pub fn price_patterns(
    net: &Network,
    group: usize,
    allowed: &HashSet<ActKey>,
    duals: &PatternDuals,
    fixed_cost: f64,
    k: usize,
) -> Vec<(GatePattern, f64)> {
    let (g, keys) = pattern_graph(net, group, allowed, duals, fixed_cost);
    g.best_paths(k, -TOL_RC)
        .into_iter()
        .map(|p| (GatePattern { group, acts: p.nodes.iter().map(|&n| keys[n]).collect() }, p.cost))
        .collect()
}

/// Maximum of `duals'a` over every pattern of the group (capacity dual and
/// fixed cost excluded), with a maximizing pattern.
pub fn max_dual_weight(
    net: &Network,
    group: usize,
    allowed: &HashSet<ActKey>,
    duals: &PatternDuals,
) -> (f64, Option<GatePattern>) {
    let plain = PatternDuals { cap: 0.0, ..duals.clone() };
    let (g, keys) = pattern_graph(net, group, allowed, &plain, 0.0);
    match g.best_paths(1, f64::INFINITY).into_iter().next() {
        Some(p) => (-p.cost, Some(GatePattern { group, acts: p.nodes.iter().map(|&n| keys[n]).collect() })),
        None => (0.0, None),
    }
}

/// For each forced connection not yet realized by a pool pattern, up to `m`
/// patterns holding its arrival immediately followed by its departure,
/// padded greedily with other compatible allowed activities.
pub fn customized_init(
    net: &Network,
    group: usize,
    allowed: &HashSet<ActKey>,
    forced: &[usize],
    pool: &[GatePattern],
    m: usize,
) -> Vec<GatePattern> {
    if m == 0 {
        return Vec::new();
    }
    let acts = allowed_activities(net, group, allowed);
    let pos: HashMap<ActKey, usize> = acts.iter().enumerate().map(|(i, a)| (a.key, i)).collect();
    let covered: HashSet<usize> = pool.iter().flat_map(|p| p.pairs(net)).collect();
    let cap = net.inst.config.max_legs;
    let mut out: Vec<GatePattern> = Vec::new();
    for &k in forced {
        if covered.contains(&k) {
            continue;
        }
        let conn = &net.connections[k];
        let (Some(&a), Some(&b)) = (pos.get(&net.arr_key(conn.pred)), pos.get(&net.dep_key(conn.succ))) else {
            continue;
        };
        if !net.gate_follows(acts[a], acts[b]) {
            continue;
        }
        let core = vec![a, b];
        let forward = |mut seq: Vec<usize>, skip: usize| {
            let mut skipped = 0;
            loop {
                if seq.len() >= cap {
                    break;
                }
                let last = *seq.last().unwrap();
                let next = (last + 1..acts.len()).find(|&v| {
                    net.gate_follows(acts[last], acts[v]) && seq.iter().all(|&u| acts[u].flight != acts[v].flight) && {
                        if skipped < skip {
                            skipped += 1;
                            false
                        } else {
                            true
                        }
                    }
                });
                match next {
                    Some(v) => seq.push(v),
                    None => break,
                }
            }
            seq
        };
        let backward = |mut seq: Vec<usize>| {
            loop {
                if seq.len() >= cap {
                    break;
                }
                let first = seq[0];
                let prev = (0..first).rev().find(|&u| {
                    net.gate_follows(acts[u], acts[first]) && seq.iter().all(|&w| acts[w].flight != acts[u].flight)
                });
                match prev {
                    Some(u) => seq.insert(0, u),
                    None => break,
                }
            }
            seq
        };
        let mut variants = vec![core.clone(), forward(core.clone(), 0), forward(backward(core.clone()), 0)];
        for skip in 1..m {
            variants.push(forward(backward(core.clone()), skip));
        }
        let mut emitted = 0;
        for v in variants {
            if emitted >= m {
                break;
            }
            let p = GatePattern { group, acts: v.iter().map(|&i| acts[i].key).collect() };
            if !out.contains(&p) && !pool.contains(&p) {
                out.push(p);
                emitted += 1;
            }
        }
    }
    out
}

/// Every pattern over the allowed activities, or `None` past `budget`.
pub fn enumerate_patterns(
    net: &Network,
    group: usize,
    allowed: &HashSet<ActKey>,
    budget: usize,
) -> Option<Vec<GatePattern>> {
    let acts = allowed_activities(net, group, allowed);
    let cap = net.inst.config.max_legs;
    let mut out = Vec::new();
    let mut stack: Vec<Vec<usize>> = (0..acts.len()).rev().map(|i| vec![i]).collect();
    while let Some(seq) = stack.pop() {
        if out.len() >= budget {
            return None;
        }
        out.push(GatePattern { group, acts: seq.iter().map(|&i| acts[i].key).collect() });
        if seq.len() >= cap {
            continue;
        }
        let last = *seq.last().unwrap();
        for v in (last + 1..acts.len()).rev() {
            if net.gate_follows(acts[last], acts[v]) && seq.iter().all(|&u| acts[u].flight != acts[v].flight) {
                let mut next = seq.clone();
                next.push(v);
                stack.push(next);
            }
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn t1_group(net: &Network, code: &str) -> usize {
        let a = net.inst.airports.iter().position(|x| x.code == code).unwrap();
        net.group_of[&(a, 0)]
    }

    fn undelayed(net: &Network, g: usize) -> HashSet<ActKey> {
        net.groups[g].activities.iter().filter(|a| net.copies[a.key.copy()].delay == 0).map(|a| a.key).collect()
    }

    #[test]
    fn zero_duals_price_nothing() {
        let net = Network::build(&fixtures::t1()).unwrap();
        let g = t1_group(&net, "B");
        let all: HashSet<ActKey> = net.groups[g].activities.iter().map(|a| a.key).collect();
        assert!(price_patterns(&net, g, &all, &PatternDuals::default(), 4.0, 10).is_empty());
    }

    #[test]
    fn arrival_dual_prices_single_activity() {
        let net = Network::build(&fixtures::t1()).unwrap();
        let g = t1_group(&net, "B");
        let f1 = net.copies_of_flight[0][0];
        let mut d = PatternDuals::default();
        d.act.insert(ActKey::Arr(f1), 10.0);
        let all: HashSet<ActKey> = net.groups[g].activities.iter().map(|a| a.key).collect();
        let got = price_patterns(&net, g, &all, &d, 4.0, 10);
        assert_eq!(got[0].0.acts, vec![ActKey::Arr(f1)]);
        assert!((got[0].1 + 6.0).abs() < 1e-12);
    }

    #[test]
    fn capacity_dual_shifts_uniformly() {
        let net = Network::build(&fixtures::t1()).unwrap();
        let g = t1_group(&net, "A");
        let allowed = undelayed(&net, g);
        let pats = enumerate_patterns(&net, g, &allowed, 1000).unwrap();
        let base = PatternDuals::default();
        let shifted = PatternDuals { cap: -1.0, ..Default::default() };
        for p in &pats {
            let a = pattern_reduced_cost(&net, p, &base, 4.0);
            let b = pattern_reduced_cost(&net, p, &shifted, 4.0);
            assert!((b - a - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn init_builds_connection_pattern() {
        let net = Network::build(&fixtures::t1()).unwrap();
        let g = t1_group(&net, "B");
        let f1 = net.copies_of_flight[0][0];
        let f2 = net.copies_of_flight[1][0];
        let k = net.conn_index[&(f1, f2)];
        let allowed = undelayed(&net, g);
        let made = customized_init(&net, g, &allowed, &[k], &[], 3);
        assert!(!made.is_empty());
        for p in &made {
            assert!(p.check(&net).is_ok());
            assert!(p.pairs(&net).contains(&k));
        }
        assert!(customized_init(&net, g, &allowed, &[k], &made, 3).is_empty());
        assert!(customized_init(&net, g, &allowed, &[k], &[], 0).is_empty());
    }

    #[test]
    fn enumerated_patterns_are_valid_and_pricing_exact() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for seed in 0..25 {
            let net = Network::build(&fixtures::desk_instance(seed, 6)).unwrap();
            for g in 0..net.groups.len() {
                let allowed: HashSet<ActKey> = net.groups[g].activities.iter().map(|a| a.key).collect();
                let Some(pats) = enumerate_patterns(&net, g, &allowed, 50_000) else { continue };
                for p in &pats {
                    assert!(p.check(&net).is_ok(), "{:?}", p.check(&net));
                }
                for _ in 0..5 {
                    let mut d = PatternDuals { cap: -rng.gen_range(0.0..2.0), ..Default::default() };
                    for a in &net.groups[g].activities {
                        d.act.insert(a.key, rng.gen_range(-3.0..4.0));
                    }
                    for &k in &net.groups[g].connections {
                        d.pair.insert(k, rng.gen_range(-1.0..2.0));
                    }
                    let best =
                        pats.iter().map(|p| pattern_reduced_cost(&net, p, &d, 4.0)).fold(f64::INFINITY, f64::min);
                    let priced = price_patterns(&net, g, &allowed, &d, 4.0, 3);
                    assert_eq!(priced.is_empty(), best >= -TOL_RC);
                    if let Some((p, rc)) = priced.first() {
                        assert!((rc - best).abs() < 1e-9);
                        assert!((pattern_reduced_cost(&net, p, &d, 4.0) - rc).abs() < 1e-9);
                    }
                }
            }
        }
    }
}
