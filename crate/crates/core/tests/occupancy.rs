mod common;

use common::gates::{full_feasible, gate_fixture};
use recovery_core::cut::occupancy_cuts;

#[test]
fn gate_feasible_selections_satisfy_every_occupancy_row() {
    let mut checked = 0;
    for seed in 0..300 {
        let Some(fx) = gate_fixture(seed) else { continue };
        let refs = fx.refs();
        if full_feasible(&fx.net, &refs) != Some(true) {
            continue;
        }
        for f in occupancy_cuts(&fx.net) {
            let lhs: f64 = refs.iter().map(|r| f.route_coef(&fx.net, r)).sum();
            assert!(lhs <= f.constant + 1e-9, "seed {seed}: {lhs} > {}", f.constant);
        }
        checked += 1;
    }
    assert!(checked > 80, "{checked}");
}
