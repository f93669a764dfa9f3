mod common;

use common::{check_lp, random_lp, tableau_solve, LpCase, OracleStatus};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use recovery_core::lp::{LinearProgram, Relation};

#[test]
fn tableau_oracle_on_textbook_lp() {
    // max 3x + 5y st x <= 4, 2y <= 12, 3x + 2y <= 18 -> 36 at (2, 6)
    let mut lp = LinearProgram::new();
    let x = lp.add_var("x", -3.0, 0.0, f64::INFINITY);
    let y = lp.add_var("y", -5.0, 0.0, f64::INFINITY);
    lp.add_row("a", [(x, 1.0)], Relation::Le, 4.0);
    lp.add_row("b", [(y, 2.0)], Relation::Le, 12.0);
    lp.add_row("c", [(x, 3.0), (y, 2.0)], Relation::Le, 18.0);
    let o = tableau_solve(&lp);
    assert_eq!(o.status, OracleStatus::Optimal);
    assert!((o.objective + 36.0).abs() < 1e-9);
    assert_eq!(check_lp(&lp), Ok(LpCase::Optimal));
}

#[test]
fn random_lps_agree_with_tableau_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut counts = [0usize; 3];
    for k in 0..400 {
        let lp = random_lp(&mut rng, 6, 6);
        match check_lp(&lp) {
            Ok(c) => counts[c as usize] += 1,
            Err(e) => panic!("lp {k}: {e}\n{lp:?}"),
        }
    }
    assert!(counts.iter().all(|&c| c > 0), "cases {counts:?}");
}

#[test]
fn feasibility_systems_satisfy_the_alternative() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut infeasible = 0;
    for k in 0..600 {
        let mut lp = random_lp(&mut rng, 7, 5);
        for j in 0..lp.num_vars() {
            lp.set_cost(j, 0.0);
        }
        match check_lp(&lp) {
            Ok(LpCase::Infeasible) => infeasible += 1,
            Ok(LpCase::Optimal) => {}
            Ok(LpCase::Unbounded) => panic!("system {k}: zero objective reported unbounded"),
            Err(e) => panic!("system {k}: {e}"),
        }
    }
    assert!(infeasible > 50, "only {infeasible} infeasible systems");
}
