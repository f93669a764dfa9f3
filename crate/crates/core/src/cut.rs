//! Benders cut functionals and the valid inequalities on route variables.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::network::{ActKey, Network};
use crate::route::AircraftRoute;

/// Subproblem duals `(pi, pi_at)` in a form evaluable on any route: a
/// route's coefficient is the sum of its copies' activity duals plus the
/// duals of the connections it flies. Absent entries are zero.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CutFunctional {
    pub act: BTreeMap<ActKey, f64>,
    pub pair: BTreeMap<usize, f64>,
    /// `sum pi_at * n_at`.
    pub constant: f64,
}

impl CutFunctional {
    pub fn copy_weight(&self, net: &Network, copy: usize) -> f64 {
        net.copy_activities(copy).iter().map(|k| self.act.get(k).copied().unwrap_or(0.0)).sum()
    }

    pub fn pair_weight(&self, conn: usize) -> f64 {
        self.pair.get(&conn).copied().unwrap_or(0.0)
    }

    /// `H(pi)` of a route.
    pub fn route_coef(&self, net: &Network, route: &AircraftRoute) -> f64 {
        let mut h: f64 = route.copies.iter().map(|&c| self.copy_weight(net, c)).sum();
        for k in route.pairs(net) {
            h += self.pair_weight(k);
        }
        h
    }

    pub fn is_trivial(&self) -> bool {
        self.act.values().chain(self.pair.values()).all(|v| v.abs() < 1e-12) && self.constant.abs() < 1e-12
    }

    /// Merges another (disjointly supported) functional into this one.
    pub fn absorb(&mut self, other: &CutFunctional) {
        for (k, v) in &other.act {
            *self.act.entry(*k).or_insert(0.0) += v;
        }
        for (k, v) in &other.pair {
            *self.pair.entry(*k).or_insert(0.0) += v;
        }
        self.constant += other.constant;
    }

    /// Key for duplicate detection: entries rounded to 1e-9.
    pub fn key(&self) -> String {
        let r = |v: f64| (v * 1e9).round() as i64;
        let mut s = String::new();
        for (k, v) in &self.act {
            if r(*v) != 0 {
                s.push_str(&format!("{k:?}={};", r(*v)));
            }
        }
        for (k, v) in &self.pair {
            if r(*v) != 0 {
                s.push_str(&format!("p{k}={};", r(*v)));
            }
        }
        s.push_str(&format!("c={}", r(self.constant)));
        s
    }
}

/// Gate-occupancy inequalities valid before any subproblem is solved.
/// Each activity holds its gate over `[t_in, t_out + buffer)`, and a flown
/// connection `u -> v` holds it over the gap `[t_out(u) + buffer, t_in(v))`.
/// Consecutive connected activities may overlap; their connection then
/// carries `-1` there, so each gate counts at most once at any instant.
/// Rows are taken at every left endpoint and kept when they can bind and
/// are not dominated.
/// Half-open occupancy `[start, end)`.
type Span = (i64, i64);

pub fn occupancy_cuts(net: &Network) -> Vec<CutFunctional> {
    let buffer = net.inst.config.buffer_time;
    let mut out = Vec::new();
    for grp in &net.groups {
        let span: BTreeMap<ActKey, Span> = grp.activities.iter().map(|a| (a.key, (a.t_in, a.t_out + buffer))).collect();
        let mut conns: Vec<(usize, Span, Span)> = Vec::new();
        for &k in &grp.connections {
            let c = &net.connections[k];
            let (Some(&u), Some(&v)) = (span.get(&net.arr_key(c.pred)), span.get(&net.dep_key(c.succ))) else {
                continue;
            };
            conns.push((k, u, v));
        }
        let inside = |(lo, hi): Span, t: i64| lo <= t && t < hi;
        let mut starts: Vec<i64> = span.values().map(|s| s.0).collect();
        starts.extend(conns.iter().map(|&(_, u, _)| u.1));
        starts.sort_unstable();
        starts.dedup();
        // (activities, gap connections, overlap connections) per instant.
        type Row = (Vec<ActKey>, Vec<usize>, Vec<usize>);
        let mut rows: Vec<Row> = Vec::new();
        for t in starts {
            let acts: Vec<ActKey> = span.iter().filter(|(_, &s)| inside(s, t)).map(|(k, _)| *k).collect();
            let gaps: Vec<usize> = conns.iter().filter(|&&(_, u, v)| inside((u.1, v.0), t)).map(|c| c.0).collect();
            let overlaps: Vec<usize> =
                conns.iter().filter(|&&(_, u, v)| inside(u, t) && inside(v, t)).map(|c| c.0).collect();
            if (acts.len() + gaps.len()) as u32 > grp.capacity {
                rows.push((acts, gaps, overlaps));
            }
        }
        let covers = |b: &Row, a: &Row| {
            a.0.iter().all(|k| b.0.binary_search(k).is_ok())
                && a.1.iter().all(|k| b.1.binary_search(k).is_ok())
                && b.2.iter().all(|k| a.2.binary_search(k).is_ok())
        };
        for (i, a) in rows.iter().enumerate() {
            let dominated = rows.iter().enumerate().any(|(j, b)| j != i && covers(b, a) && (!covers(a, b) || j < i));
            if dominated {
                continue;
            }
            let mut pair: BTreeMap<usize, f64> = a.1.iter().map(|&k| (k, 1.0)).collect();
            pair.extend(a.2.iter().map(|&k| (k, -1.0)));
            out.push(CutFunctional {
                act: a.0.iter().map(|&k| (k, 1.0)).collect(),
                pair,
                constant: grp.capacity as f64,
            });
        }
    }
    out
}

/// Route identifier inside the master pools: `(aircraft, column index)`.
pub type ColumnId = (usize, usize);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum CutKind {
    /// `sum H y <= constant`.
    Feasibility(CutFunctional),
    /// `sum H y - q <= constant`.
    Optimality(CutFunctional),
    /// `sum_{S} y <= |S| - 1`.
    NoGood { support: Vec<ColumnId> },
    /// `q - (v - L) sum_S y >= L - (v - L)(|S| - 1)`.
    Llc { support: Vec<ColumnId>, value: f64, lower: f64 },
    /// `q - (v - L) sum_S y + (v - L) sum_{not S} y >= v - (v - L)|S|`.
    Global { support: Vec<ColumnId>, value: f64, lower: f64 },
    /// `sum_S y - sum_{not S} y <= |S| - 1`: removes exactly one evaluated
    /// integer point.
    Exclude { support: Vec<ColumnId> },
}

impl CutKind {
    pub fn name(&self) -> &'static str {
        match self {
            CutKind::Feasibility(_) => "feasibility",
            CutKind::Optimality(_) => "optimality",
            CutKind::NoGood { .. } => "nogood",
            CutKind::Llc { .. } => "llc",
            CutKind::Global { .. } => "global",
            CutKind::Exclude { .. } => "exclude",
        }
    }

    /// Left-hand side minus right-hand side in `<= 0` orientation at the
    /// point `(y, q)`; positive means violated. `y` lists selected columns.
    pub fn violation(&self, net: &Network, pools: &[Vec<AircraftRoute>], y: &[(ColumnId, f64)], q: f64) -> f64 {
        let in_s = |s: &[ColumnId], id: &ColumnId| s.binary_search(id).is_ok();
        match self {
            CutKind::Feasibility(f) | CutKind::Optimality(f) => {
                let h: f64 = y.iter().map(|((r, p), v)| v * f.route_coef(net, &pools[*r][*p])).sum();
                let qterm = if matches!(self, CutKind::Optimality(_)) { q } else { 0.0 };
                h - qterm - f.constant
            }
            CutKind::NoGood { support } => {
                let s: f64 = y.iter().filter(|(id, _)| in_s(support, id)).map(|(_, v)| v).sum();
                s - (support.len() as f64 - 1.0)
            }
            CutKind::Llc { support, value, lower } => {
                let s: f64 = y.iter().filter(|(id, _)| in_s(support, id)).map(|(_, v)| v).sum();
                let d = value - lower;
                (lower - d * (support.len() as f64 - 1.0)) - (q - d * s)
            }
            CutKind::Global { support, value, lower } => {
                let d = value - lower;
                let mut lhs = q;
                for (id, v) in y {
                    lhs += if in_s(support, id) { -d * v } else { d * v };
                }
                (value - d * support.len() as f64) - lhs
            }
            CutKind::Exclude { support } => {
                let lhs: f64 = y.iter().map(|(id, v)| if in_s(support, id) { *v } else { -v }).sum();
                lhs - (support.len() as f64 - 1.0)
            }
        }
    }
}
