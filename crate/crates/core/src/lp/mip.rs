use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use super::{solve_lp, LinearProgram, LpError, LpStatus, TOL_INT};

#[derive(Clone, Debug, Default)]
pub struct MipOptions {
    /// Stop branching at this instant and report the incumbent.
    pub deadline: Option<Instant>,
    /// Hard cap on explored nodes; `0` means unlimited.
    pub node_limit: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MipStatus {
    Optimal,
    Infeasible,
    /// Deadline or node limit hit. `x` holds the incumbent if one was found.
    TimeLimit,
}

#[derive(Clone, Debug)]
pub struct MipSolution {
    pub status: MipStatus,
    /// Incumbent, empty when none was found.
    pub x: Vec<f64>,
    /// Incumbent objective, `+inf` when none was found.
    pub objective: f64,
    /// Proven lower bound on the optimum.
    pub bound: f64,
    pub nodes: usize,
}

impl MipSolution {
    pub fn has_incumbent(&self) -> bool {
        !self.x.is_empty()
    }
}

struct Node {
    bound: f64,
    id: usize,
    fixes: Vec<(usize, f64)>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // BinaryHeap is a max-heap: smallest bound first, then oldest node.
    fn cmp(&self, other: &Self) -> Ordering {
        other.bound.total_cmp(&self.bound).then_with(|| other.id.cmp(&self.id))
    }
}

/// Best-bound branch-and-bound over binary variables `integer_vars`.
///
/// Branches on the fractional variable closest to 0.5 (lowest index on
/// ties); the `0` child is explored before the `1` child at equal bound.
pub fn solve_mip(lp: &LinearProgram, integer_vars: &[usize], opts: &MipOptions) -> Result<MipSolution, LpError> {
    let mut work = lp.clone();
    let base: Vec<(f64, f64)> = lp.vars().iter().map(|v| (v.lower, v.upper)).collect();
    let mut is_int = vec![false; lp.num_vars()];
    for &j in integer_vars {
        if j >= lp.num_vars() {
            return Err(LpError::Malformed(format!("integer index {j} out of range")));
        }
        is_int[j] = true;
    }

    let mut heap = BinaryHeap::new();
    heap.push(Node { bound: f64::NEG_INFINITY, id: 0, fixes: Vec::new() });
    let mut next_id = 1;
    let mut best_x: Vec<f64> = Vec::new();
    let mut best_obj = f64::INFINITY;
    let mut nodes = 0;

    while let Some(node) = heap.pop() {
        if node.bound >= best_obj - prune_tol(best_obj) {
            continue;
        }
        let out_of_time = opts.deadline.is_some_and(|d| Instant::now() >= d);
        let out_of_nodes = opts.node_limit > 0 && nodes >= opts.node_limit;
        if out_of_time || out_of_nodes {
            let open = heap.iter().map(|n| n.bound).fold(node.bound, f64::min);
            return Ok(MipSolution {
                status: MipStatus::TimeLimit,
                x: best_x,
                objective: best_obj,
                bound: open.min(best_obj),
                nodes,
            });
        }
        nodes += 1;

        for (j, &(lo, hi)) in base.iter().enumerate() {
            work.set_bounds(j, lo, hi);
        }
        for &(j, v) in &node.fixes {
            work.set_bounds(j, v, v);
        }
        let sol = solve_lp(&work)?;
        match sol.status {
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => return Err(LpError::Malformed("unbounded relaxation in branch-and-bound".into())),
            LpStatus::Optimal => {}
        }
        if sol.objective >= best_obj - prune_tol(best_obj) {
            continue;
        }
        let mut branch: Option<(usize, f64)> = None;
        for (j, &int) in is_int.iter().enumerate() {
            if !int {
                continue;
            }
            let v = sol.x[j];
            let frac = v - v.floor();
            if frac <= TOL_INT || frac >= 1.0 - TOL_INT {
                continue;
            }
            let score = (frac - 0.5).abs();
            if branch.is_none_or(|(_, s)| score < s - 1e-12) {
                branch = Some((j, score));
            }
        }
        match branch {
            None => {
                let mut x = sol.x.clone();
                for (j, &int) in is_int.iter().enumerate() {
                    if int {
                        x[j] = x[j].round();
                    }
                }
                best_obj = sol.objective;
                best_x = x;
            }
            Some((j, _)) => {
                for val in [0.0, 1.0] {
                    let mut fixes = node.fixes.clone();
                    fixes.push((j, val));
                    heap.push(Node { bound: sol.objective, id: next_id, fixes });
                    next_id += 1;
                }
            }
        }
    }

    let status = if best_x.is_empty() { MipStatus::Infeasible } else { MipStatus::Optimal };
    Ok(MipSolution { status, x: best_x, objective: best_obj, bound: best_obj, nodes })
}

fn prune_tol(best: f64) -> f64 {
    if best.is_finite() {
        1e-9 * (1.0 + best.abs())
    } else {
        0.0
    }
}
