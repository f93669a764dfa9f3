#![allow(clippy::needless_range_loop)]

use super::*;

const INF: f64 = f64::INFINITY;

#[test]
fn single_ge_row() {
    let mut lp = LinearProgram::new();
    let x = lp.add_var("x", 1.0, 0.0, INF);
    lp.add_row("c", [(x, 1.0)], Relation::Ge, 3.0);
    let sol = solve_lp(&lp).unwrap();
    assert_eq!(sol.status, LpStatus::Optimal);
    assert!((sol.x[0] - 3.0).abs() < 1e-9);
    assert!((sol.duals[0] - 1.0).abs() < 1e-9);
    assert!((sol.objective - 3.0).abs() < 1e-9);
}

#[test]
fn contradictory_bounds_give_ray() {
    let mut lp = LinearProgram::new();
    let x = lp.add_var("x", 0.0, -INF, INF);
    lp.add_row("le", [(x, 1.0)], Relation::Le, 1.0);
    lp.add_row("ge", [(x, 1.0)], Relation::Ge, 2.0);
    let sol = solve_lp(&lp).unwrap();
    assert_eq!(sol.status, LpStatus::Infeasible);
    let ray = sol.farkas_ray.unwrap();
    assert!(verify_farkas(&lp, &ray, 1e-9));
    // Normalized: y = (-1, 1).
    assert!((ray[0] + 1.0).abs() < 1e-9 && (ray[1] - 1.0).abs() < 1e-9);
}

#[test]
fn unbounded_detected() {
    let mut lp = LinearProgram::new();
    let x = lp.add_var("x", -1.0, 0.0, INF);
    let y = lp.add_var("y", 0.0, 0.0, INF);
    lp.add_row("r", [(x, 1.0), (y, -1.0)], Relation::Le, 1.0);
    assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Unbounded);
}

#[test]
fn bounded_and_free_variables() {
    // min -x - 2y + z, x in [1,4], y <= 2 (no lower), z free, x + y + z = 3, z >= -1 via row
    let mut lp = LinearProgram::new();
    let x = lp.add_var("x", -1.0, 1.0, 4.0);
    let y = lp.add_var("y", -2.0, -INF, 2.0);
    let z = lp.add_var("z", 1.0, -INF, INF);
    lp.add_row("sum", [(x, 1.0), (y, 1.0), (z, 1.0)], Relation::Eq, 3.0);
    lp.add_row("zlo", [(z, 1.0)], Relation::Ge, -1.0);
    let sol = solve_lp(&lp).unwrap();
    assert_eq!(sol.status, LpStatus::Optimal);
    // z = 3 - x - y; objective -x -2y + 3 - x - y = 3 - 2x - 3y. y=2, x=2 gives z=-1.
    assert!((sol.objective - (3.0 - 4.0 - 6.0)).abs() < 1e-8, "{}", sol.objective);
    assert!(lp.max_violation(&sol.x) < 1e-8);
}

#[test]
fn mip_small_knapsack() {
    let mut lp = LinearProgram::new();
    let x = lp.add_var("x", -1.0, 0.0, 1.0);
    let y = lp.add_var("y", -1.0, 0.0, 1.0);
    lp.add_row("k", [(x, 1.0), (y, 1.0)], Relation::Le, 1.0);
    let sol = solve_mip(&lp, &[x, y], &MipOptions::default()).unwrap();
    assert_eq!(sol.status, MipStatus::Optimal);
    assert!((sol.objective + 1.0).abs() < 1e-9);
}

#[test]
fn mip_integral_relaxation_needs_one_node() {
    let mut lp = LinearProgram::new();
    let x = lp.add_var("x", 2.0, 0.0, 1.0);
    let y = lp.add_var("y", 3.0, 0.0, 1.0);
    lp.add_row("cover", [(x, 1.0), (y, 1.0)], Relation::Eq, 1.0);
    let sol = solve_mip(&lp, &[x, y], &MipOptions::default()).unwrap();
    assert_eq!(sol.nodes, 1);
    assert!((sol.objective - 2.0).abs() < 1e-9);
}

#[test]
fn mip_odd_cycle_branches() {
    // Vertex cover style: x_i + x_{i+1} >= 1 on a triangle, LP optimum 1.5, IP 2.
    let mut lp = LinearProgram::new();
    let v: Vec<usize> = (0..3).map(|i| lp.add_var(format!("x{i}"), 1.0, 0.0, 1.0)).collect();
    for i in 0..3 {
        lp.add_row("e", [(v[i], 1.0), (v[(i + 1) % 3], 1.0)], Relation::Ge, 1.0);
    }
    let relax = solve_lp(&lp).unwrap();
    assert!((relax.objective - 1.5).abs() < 1e-9);
    let sol = solve_mip(&lp, &v, &MipOptions::default()).unwrap();
    assert!((sol.objective - 2.0).abs() < 1e-9);
    assert!(sol.bound <= sol.objective + 1e-9);
}

#[test]
fn mip_infeasible() {
    let mut lp = LinearProgram::new();
    let x = lp.add_var("x", 1.0, 0.0, 1.0);
    let y = lp.add_var("y", 1.0, 0.0, 1.0);
    lp.add_row("a", [(x, 2.0), (y, 2.0)], Relation::Eq, 1.0);
    let sol = solve_mip(&lp, &[x, y], &MipOptions::default()).unwrap();
    assert_eq!(sol.status, MipStatus::Infeasible);
}

#[test]
fn mip_node_limit_reports_time_limit() {
    let mut lp = LinearProgram::new();
    let v: Vec<usize> = (0..3).map(|i| lp.add_var(format!("x{i}"), 1.0, 0.0, 1.0)).collect();
    for i in 0..3 {
        lp.add_row("e", [(v[i], 1.0), (v[(i + 1) % 3], 1.0)], Relation::Ge, 1.0);
    }
    let opts = MipOptions { node_limit: 1, ..Default::default() };
    let sol = solve_mip(&lp, &v, &opts).unwrap();
    assert_eq!(sol.status, MipStatus::TimeLimit);
    assert!(sol.bound <= 1.5 + 1e-9);
}

#[test]
fn malformed_rejected() {
    let mut lp = LinearProgram::new();
    lp.add_var("x", f64::NAN, 0.0, 1.0);
    assert!(matches!(solve_lp(&lp), Err(LpError::Malformed(_))));
}

#[test]
fn lp_format_mentions_everything() {
    let mut lp = LinearProgram::new();
    let x = lp.add_var("x", 1.0, 0.0, 1.0);
    let q = lp.add_var("q", 1.0, 0.0, INF);
    lp.add_row("cut", [(x, 2.0), (q, -1.0)], Relation::Le, 0.5);
    let text = write_lp_format(&lp, &[x]);
    assert!(text.starts_with("Minimize"));
    assert!(text.contains("cut_0: + 2 x_0 - 1 q_1 <= 0.5"));
    assert!(text.contains("Binaries\n x_0\n"));
    assert!(text.ends_with("End\n"));
}

#[test]
fn degenerate_assignment_lp() {
    // 4x4 assignment: highly degenerate, optimum is the identity permutation.
    let n = 4;
    let mut lp = LinearProgram::new();
    let mut var = vec![vec![0; n]; n];
    for (i, row) in var.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            let c = if i == j { 0.0 } else { 1.0 + (i * n + j) as f64 * 0.01 };
            *v = lp.add_var(format!("x{i}{j}"), c, 0.0, INF);
        }
    }
    for i in 0..n {
        lp.add_row("r", (0..n).map(|j| (var[i][j], 1.0)), Relation::Eq, 1.0);
        lp.add_row("c", (0..n).map(|j| (var[j][i], 1.0)), Relation::Eq, 1.0);
    }
    let sol = solve_lp(&lp).unwrap();
    assert_eq!(sol.status, LpStatus::Optimal);
    assert!(sol.objective.abs() < 1e-9);
}
