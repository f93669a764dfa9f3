mod common;

use common::gates::{gate_fixture, separation_agrees};
use recovery_core::fixtures::{hub_conflict, t1, t1_closure};
use recovery_core::network::Network;
use recovery_core::oracle::solve_exact_oracle;

#[test]
fn optimal_selections_agree_on_named_fixtures() {
    for inst in [t1(), t1_closure(), hub_conflict(0).instance, hub_conflict(2).instance] {
        let net = Network::build(&inst).unwrap();
        let best = solve_exact_oracle(&net, 50_000).unwrap();
        let refs: Vec<_> = best.solution.routes.iter().collect();
        let (v, _) = separation_agrees(&net, &refs).unwrap();
        assert_eq!(v.map(|x| x as f64), Some(best.solution.gate_cost(&net)));
    }
}

#[test]
fn random_selections_agree() {
    let mut compared = 0;
    for seed in 0..150 {
        let Some(fx) = gate_fixture(seed) else { continue };
        separation_agrees(&fx.net, &fx.refs()).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        compared += 1;
    }
    assert!(compared > 100);
}
