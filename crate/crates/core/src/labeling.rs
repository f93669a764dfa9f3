//! Label-setting elementary shortest paths on a DAG with a length cap and
//! an optional mandatory node.
//!
//! Nodes must be numbered in topological order (every arc goes from a lower
//! to a higher index). A path visits at most one node per `group`; only
//! groups whose nodes can reach each other are tracked in the label, since
//! the others cannot repeat on any path.

#[derive(Clone, Debug, Default)]
pub struct PathGraph {
    pub node_cost: Vec<f64>,
    pub group: Vec<usize>,
    /// Forward arcs `(to, cost)`.
    pub arcs: Vec<Vec<(usize, f64)>>,
    /// Cost of starting a path at a node; `None` if it cannot start one.
    pub source: Vec<Option<f64>>,
    pub sink: Vec<bool>,
    pub required: Option<usize>,
    pub max_len: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Path {
    pub nodes: Vec<usize>,
    pub cost: f64,
}

impl PathGraph {
    pub fn with_nodes(n: usize, max_len: usize) -> Self {
        PathGraph {
            node_cost: vec![0.0; n],
            group: (0..n).collect(),
            arcs: vec![Vec::new(); n],
            source: vec![None; n],
            sink: vec![false; n],
            required: None,
            max_len,
        }
    }

    pub fn len(&self) -> usize {
        self.node_cost.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_cost.is_empty()
    }

    /// Cost of `nodes` as a path (no feasibility check).
    pub fn path_cost(&self, nodes: &[usize]) -> f64 {
        let mut c = self.source[nodes[0]].unwrap_or(f64::NAN);
        for (k, &v) in nodes.iter().enumerate() {
            c += self.node_cost[v];
            if k > 0 {
                let u = nodes[k - 1];
                c += self.arcs[u].iter().find(|a| a.0 == v).map_or(f64::NAN, |a| a.1);
            }
        }
        c
    }

    /// Maps each group to a bit index if two of its nodes lie on a common
    /// path, `None` otherwise.
    fn critical_bits(&self) -> (Vec<Option<usize>>, usize) {
        let n = self.len();
        let words = n.div_ceil(64).max(1);
        let mut reach = vec![0u64; n * words];
        for u in (0..n).rev() {
            for &(v, _) in &self.arcs[u] {
                assert!(v > u, "arc {u}->{v} is not forward");
                reach[u * words + v / 64] |= 1 << (v % 64);
                for w in 0..words {
                    let bits = reach[v * words + w];
                    reach[u * words + w] |= bits;
                }
            }
        }
        let n_groups = self.group.iter().copied().max().map_or(0, |g| g + 1);
        let mut members = vec![Vec::new(); n_groups];
        for (v, &g) in self.group.iter().enumerate() {
            members[g].push(v);
        }
        let mut bit = vec![None; n_groups];
        let mut next = 0;
        for (g, nodes) in members.iter().enumerate() {
            let critical = nodes
                .iter()
                .any(|&u| nodes.iter().any(|&v| v != u && reach[u * words + v / 64] & (1 << (v % 64)) != 0));
            if critical {
                bit[g] = Some(next);
                next += 1;
            }
        }
        (bit, next.div_ceil(64).max(1))
    }

    /// Up to `k` cheapest complete paths with cost strictly below `below`,
    /// sorted by cost and then lexicographically by node sequence. The
    /// cheapest such path is always found when one exists.
    pub fn best_paths(&self, k: usize, below: f64) -> Vec<Path> {
        let n = self.len();
        if n == 0 || k == 0 || self.max_len == 0 {
            return Vec::new();
        }
        let (bits, words) = self.critical_bits();
        let node_bit: Vec<Option<usize>> = self.group.iter().map(|&g| bits[g]).collect();

        let mut arena: Vec<Label> = Vec::new();
        let mut bucket: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut done: Vec<usize> = Vec::new();

        for v in 0..n {
            if let Some(sc) = self.source[v] {
                let mut visited = vec![0u64; words];
                if let Some(b) = node_bit[v] {
                    visited[b / 64] |= 1 << (b % 64);
                }
                let label = Label {
                    cost: sc + self.node_cost[v],
                    len: 1,
                    visited,
                    req: self.required == Some(v),
                    node: v,
                    parent: None,
                };
                insert(&mut arena, &mut bucket[v], label);
            }
        }

        for v in 0..n {
            let here = std::mem::take(&mut bucket[v]);
            for &li in &here {
                let (cost, len, req) = (arena[li].cost, arena[li].len, arena[li].req);
                if self.sink[v] && (self.required.is_none() || req) && cost < below {
                    done.push(li);
                }
                if len >= self.max_len {
                    continue;
                }
                for &(w, ac) in &self.arcs[v] {
                    if let Some(b) = node_bit[w] {
                        if arena[li].visited[b / 64] & (1 << (b % 64)) != 0 {
                            continue;
                        }
                    }
                    let mut visited = arena[li].visited.clone();
                    if let Some(b) = node_bit[w] {
                        visited[b / 64] |= 1 << (b % 64);
                    }
                    let label = Label {
                        cost: cost + ac + self.node_cost[w],
                        len: len + 1,
                        visited,
                        req: req || self.required == Some(w),
                        node: w,
                        parent: Some(li),
                    };
                    insert(&mut arena, &mut bucket[w], label);
                }
            }
        }

        let mut paths: Vec<Path> = done
            .into_iter()
            .map(|li| {
                let mut nodes = Vec::new();
                let mut cur = Some(li);
                while let Some(c) = cur {
                    nodes.push(arena[c].node);
                    cur = arena[c].parent;
                }
                nodes.reverse();
                Path { nodes, cost: arena[li].cost }
            })
            .collect();
        paths.sort_by(|a, b| a.cost.total_cmp(&b.cost).then_with(|| a.nodes.cmp(&b.nodes)));
        paths.dedup_by(|a, b| a.nodes == b.nodes);
        paths.truncate(k);
        paths
    }
}

impl PathGraph {
    /// Every complete path with cost strictly below `below`, in the order of
    /// `best_paths`; `None` once more than `limit` are found.
    pub fn all_paths_below(&self, below: f64, limit: usize) -> Option<Vec<Path>> {
        let n = self.len();
        if n == 0 || self.max_len == 0 {
            return Some(Vec::new());
        }
        // Cheapest completion from each node, ignoring length, groups and
        // the required node.
        let mut tail = vec![f64::INFINITY; n];
        for v in (0..n).rev() {
            let mut best = if self.sink[v] { 0.0 } else { f64::INFINITY };
            for &(w, ac) in &self.arcs[v] {
                best = best.min(ac + tail[w]);
            }
            tail[v] = self.node_cost[v] + best;
        }
        let n_groups = self.group.iter().copied().max().map_or(0, |g| g + 1);
        let mut used = vec![false; n_groups];
        let mut stack = Vec::new();
        let mut out = Vec::new();
        for v in 0..n {
            if let Some(sc) = self.source[v] {
                if sc + tail[v] < below && !self.extend(v, sc, &tail, below, limit, &mut used, &mut stack, &mut out) {
                    return None;
                }
            }
        }
        out.sort_by(|a, b| a.cost.total_cmp(&b.cost).then_with(|| a.nodes.cmp(&b.nodes)));
        Some(out)
    }

    /// Depth-first step; `before` is the path cost excluding node `v`.
    #[allow(clippy::too_many_arguments)]
    fn extend(
        &self,
        v: usize,
        before: f64,
        tail: &[f64],
        below: f64,
        limit: usize,
        used: &mut [bool],
        stack: &mut Vec<usize>,
        out: &mut Vec<Path>,
    ) -> bool {
        let g = self.group[v];
        if used[g] {
            return true;
        }
        used[g] = true;
        stack.push(v);
        let cost = before + self.node_cost[v];
        let mut ok = true;
        let has_req = self.required.is_none_or(|r| stack.contains(&r));
        if self.sink[v] && has_req && cost < below {
            out.push(Path { nodes: stack.clone(), cost });
            ok = out.len() <= limit;
        }
        if ok && stack.len() < self.max_len {
            for &(w, ac) in &self.arcs[v] {
                if cost + ac + tail[w] < below && !self.extend(w, cost + ac, tail, below, limit, used, stack, out) {
                    ok = false;
                    break;
                }
            }
        }
        stack.pop();
        used[g] = false;
        ok
    }
}

struct Label {
    cost: f64,
    len: usize,
    visited: Vec<u64>,
    req: bool,
    node: usize,
    parent: Option<usize>,
}

fn subset(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x & !y == 0)
}

fn dominates(a: &Label, b: &Label) -> bool {
    a.req == b.req && a.cost <= b.cost + 1e-12 && a.len <= b.len && subset(&a.visited, &b.visited)
}

fn insert(arena: &mut Vec<Label>, bucket: &mut Vec<usize>, label: Label) {
    if bucket.iter().any(|&i| dominates(&arena[i], &label)) {
        return;
    }
    bucket.retain(|&i| !dominates(&label, &arena[i]));
    arena.push(label);
    bucket.push(arena.len() - 1);
}
