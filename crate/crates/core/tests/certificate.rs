mod common;

use common::gates::{certificate_fires, full_feasible, gate_fixture};

#[test]
fn certificate_never_fires_on_feasible_selections() {
    let (mut feasible, mut starved, mut fired_starved) = (0, 0, 0);
    for seed in 0..400 {
        let Some(fx) = gate_fixture(seed) else { continue };
        let refs = fx.refs();
        let Some(ok) = full_feasible(&fx.net, &refs) else { continue };
        let fired = certificate_fires(&fx.net, &refs).unwrap();
        if ok {
            feasible += 1;
            assert!(!fired, "seed {seed}: certificate on a feasible selection");
        }
        if fx.starved {
            assert!(!ok, "seed {seed}: starved fixture feasible");
            starved += 1;
            fired_starved += fired as usize;
        }
    }
    assert!(feasible > 50 && starved > 50, "{feasible} feasible, {starved} starved");
    assert!(fired_starved * 10 >= starved * 3, "fired on {fired_starved} of {starved}");
}
