//! Solutions in index space and their full feasibility check against the
//! integrated model.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::network::{ActKey, Network};
use crate::pattern::GatePattern;
use crate::route::AircraftRoute;

/// Cancellations, routes and gate patterns of one recovery.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Solution {
    pub cancelled: Vec<usize>,
    pub routes: Vec<AircraftRoute>,
    pub patterns: Vec<GatePattern>,
}

impl Solution {
    /// Everything cancelled, no aircraft flies.
    pub fn all_cancelled(net: &Network) -> Self {
        Solution { cancelled: (0..net.inst.flights.len()).collect(), ..Default::default() }
    }

    pub fn schedule_cost(&self, net: &Network) -> f64 {
        let cancel: f64 = self.cancelled.iter().map(|&j| net.inst.cancel_cost(j)).sum();
        cancel + self.routes.iter().map(|r| r.cost).sum::<f64>()
    }

    pub fn gate_cost(&self, net: &Network) -> f64 {
        self.patterns.iter().fold(0.0, |acc, p| acc + p.cost(net))
    }

    pub fn total_cost(&self, net: &Network) -> f64 {
        self.schedule_cost(net) + self.gate_cost(net)
    }

    /// Every constraint of the integrated model; returns all violations.
    pub fn violations(&self, net: &Network) -> Vec<String> {
        let mut out = Vec::new();
        let mut covered = vec![0usize; net.inst.flights.len()];
        for &j in &self.cancelled {
            covered[j] += 1;
        }
        let mut per_aircraft = vec![0usize; net.inst.aircraft.len()];
        let mut dep_use: HashMap<usize, u32> = HashMap::new();
        let mut arr_use: HashMap<usize, u32> = HashMap::new();
        let mut demanded: BTreeSet<ActKey> = BTreeSet::new();
        let mut flown_pairs: BTreeSet<usize> = BTreeSet::new();
        for r in &self.routes {
            if let Err(e) = r.check(net) {
                out.push(format!("route of {}: {e}", net.inst.aircraft[r.aircraft].id));
            }
            per_aircraft[r.aircraft] += 1;
            for &c in &r.copies {
                let cp = &net.copies[c];
                covered[cp.flight] += 1;
                if let Some(s) = cp.dep_slot {
                    *dep_use.entry(s).or_insert(0) += 1;
                }
                if let Some(s) = cp.arr_slot {
                    *arr_use.entry(s).or_insert(0) += 1;
                }
                demanded.extend(net.copy_activities(c));
            }
            if r.copies.windows(2).all(|w| net.conn_index.contains_key(&(w[0], w[1]))) {
                flown_pairs.extend(r.pairs(net));
            } else {
                out.push("route uses a missing connection".into());
            }
        }
        for (j, &n) in covered.iter().enumerate() {
            if n != 1 {
                out.push(format!("flight {} covered {n} times", net.inst.flights[j].id));
            }
        }
        for (r, &n) in per_aircraft.iter().enumerate() {
            if n > 1 {
                out.push(format!("aircraft {} flies {n} routes", net.inst.aircraft[r].id));
            }
        }
        for (s, &n) in &dep_use {
            if n > net.inst.slots[*s].dep_cap {
                out.push(format!("departure slot {s} over capacity"));
            }
        }
        for (s, &n) in &arr_use {
            if n > net.inst.slots[*s].arr_cap {
                out.push(format!("arrival slot {s} over capacity"));
            }
        }
        let mut served: BTreeMap<ActKey, usize> = BTreeMap::new();
        let mut realized: BTreeSet<usize> = BTreeSet::new();
        let mut per_group: BTreeMap<usize, u32> = BTreeMap::new();
        for p in &self.patterns {
            if let Err(e) = p.check(net) {
                out.push(format!("pattern at {}: {e}", net.group_label(p.group)));
            }
            *per_group.entry(p.group).or_insert(0) += 1;
            for a in &p.acts {
                *served.entry(*a).or_insert(0) += 1;
            }
            realized.extend(p.pairs(net));
        }
        for a in &demanded {
            if served.get(a) != Some(&1) {
                out.push(format!("{} served {} times", net.act_label(*a), served.get(a).unwrap_or(&0)));
            }
        }
        for a in served.keys() {
            if !demanded.contains(a) {
                out.push(format!("{} served but not flown", net.act_label(*a)));
            }
        }
        for k in &flown_pairs {
            if !realized.contains(k) {
                let c = &net.connections[*k];
                out.push(format!(
                    "connection {} -> {} not kept on one gate",
                    net.copy_label(c.pred),
                    net.copy_label(c.succ)
                ));
            }
        }
        for (g, n) in per_group {
            if n > net.groups[g].capacity {
                out.push(format!("{} uses {n} of {} gates", net.group_label(g), net.groups[g].capacity));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::route::seed_routes;

    #[test]
    fn all_cancelled_is_feasible() {
        let net = Network::build(&fixtures::t1()).unwrap();
        let s = Solution::all_cancelled(&net);
        assert!(s.violations(&net).is_empty());
        assert_eq!(s.total_cost(&net), 400.0);
    }

    #[test]
    fn routes_without_gates_are_flagged() {
        let net = Network::build(&fixtures::t1()).unwrap();
        let s = Solution { routes: vec![seed_routes(&net)[0][0].clone()], ..Default::default() };
        let v = s.violations(&net);
        assert!(v.iter().any(|m| m.contains("served 0 times")));
        assert!(v.iter().any(|m| m.contains("not kept on one gate")));
    }
}
