//! Hand-built and seeded random instances for tests, examples and demos.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::instance::{Aircraft, Airport, Disruption, Flight, GateType, Instance, RecoveryConfig, Slot, TimeWindow};

fn slots_for(airport: &str, start: i64, end: i64, length: i64, dep_cap: u32, arr_cap: u32) -> Vec<Slot> {
    (start..end)
        .step_by(length as usize)
        .map(|s| Slot { airport: airport.into(), start: s, length, dep_cap, arr_cap })
        .collect()
}

fn flight(id: &str, from: &str, to: &str, dep: i64, arr: i64, fleet: &str) -> Flight {
    Flight {
        id: id.into(),
        dep_airport: from.into(),
        arr_airport: to.into(),
        sched_dep: dep,
        sched_arr: arr,
        fleet_type: fleet.into(),
        cancel_cost: None,
    }
}

fn gates(pairs: &[(&str, u32)]) -> BTreeMap<String, u32> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// Two airports, one narrow-body aircraft flying A-B-A, one gate of the
/// single type at each airport, 30-minute slots with unit capacity, delay
/// copies at 0/30/60 minutes. Undisrupted, the optimum costs 8 (two gate
/// patterns); with A closed over [30, 90) it costs 38.
pub fn t1() -> Instance {
    let config = RecoveryConfig { delay_interval: 30, max_delay: 60, ..Default::default() };
    let mut slots = slots_for("A", 0, 360, 30, 1, 1);
    slots.extend(slots_for("B", 0, 360, 30, 1, 1));
    Instance {
        version: crate::instance::SCHEMA_VERSION,
        airports: vec![
            Airport { code: "A".into(), gate_counts: gates(&[("narrow", 1)]) },
            Airport { code: "B".into(), gate_counts: gates(&[("narrow", 1)]) },
        ],
        gate_types: vec![GateType { id: "narrow".into(), fleet_types: vec!["A320".into()] }],
        slots,
        flights: vec![flight("F1", "A", "B", 60, 120, "A320"), flight("F2", "B", "A", 180, 240, "A320")],
        aircraft: vec![Aircraft {
            id: "R1".into(),
            fleet_type: "A320".into(),
            start_airport: "A".into(),
            end_airport: "A".into(),
            turn_time: 30,
            maintenance: None,
            planned_flight_ids: vec!["F1".into(), "F2".into()],
        }],
        recovery_window: TimeWindow { start: 0, end: 360 },
        disruption: Vec::new(),
        config,
    }
}

/// T1 with airport A closed for one hour over [30, 90).
pub fn t1_closure() -> Instance {
    let mut inst = t1();
    inst.disruption = vec![Disruption::closure("A", 30, 90)];
    inst
}

/// A hub instance with its per-instance slot reduction rates for the
/// sequential baseline.
#[derive(Clone, Debug, PartialEq)]
pub struct HubFixture {
    pub instance: Instance,
    pub alpha_oe: f64,
    pub alpha_ue: f64,
}

/// Hub H with one narrow and one wide gate; two narrow-body aircraft reach
/// H too close together for one gate, so one must be delayed a quarter
/// hour. Hourly hub slots are generous, so a mild reduction leaves the
/// conflict in place, while a harsh one also pushes a wide-body arrival
/// into a later hour. `variant` (0..=4) shifts the timetable by whole
/// hours and raises the cancellation cost.
pub fn hub_conflict(variant: u64) -> HubFixture {
    let v = variant.min(4) as i64;
    let shift = 60 * v;
    let config = RecoveryConfig {
        delay_interval: 15,
        max_delay: 60,
        buffer_time: 15,
        cancel_cost_default: 200.0 + 50.0 * v as f64,
        ..Default::default()
    };
    let end = 540 + shift;
    let mut slots = Vec::new();
    for code in ["H", "S1", "S2", "S3"] {
        slots.extend(slots_for(code, 0, end, 60, 10, 10));
    }
    let at = |t: i64| t + shift;
    let flights = vec![
        flight("F0", "S1", "H", at(20), at(70), "A320"),
        flight("F1", "H", "S1", at(100), at(150), "A320"),
        flight("F2", "S2", "H", at(50), at(110), "A320"),
        flight("F3", "H", "S2", at(150), at(210), "A320"),
        flight("F4", "S3", "H", at(90), at(140), "B767"),
        flight("F5", "H", "S3", at(200), at(260), "B767"),
    ];
    let ac = |id: &str, fleet: &str, home: &str, legs: [&str; 2]| Aircraft {
        id: id.into(),
        fleet_type: fleet.into(),
        start_airport: home.into(),
        end_airport: home.into(),
        turn_time: 30,
        maintenance: None,
        planned_flight_ids: legs.iter().map(|s| s.to_string()).collect(),
    };
    let instance = Instance {
        version: crate::instance::SCHEMA_VERSION,
        airports: vec![
            Airport { code: "H".into(), gate_counts: gates(&[("narrow", 1), ("wide", 1)]) },
            Airport { code: "S1".into(), gate_counts: gates(&[("narrow", 2), ("wide", 2)]) },
            Airport { code: "S2".into(), gate_counts: gates(&[("narrow", 2), ("wide", 2)]) },
            Airport { code: "S3".into(), gate_counts: gates(&[("narrow", 2), ("wide", 2)]) },
        ],
        gate_types: vec![
            GateType { id: "narrow".into(), fleet_types: vec!["A320".into()] },
            GateType { id: "wide".into(), fleet_types: vec!["B767".into()] },
        ],
        slots,
        flights,
        aircraft: vec![
            ac("N1", "A320", "S1", ["F0", "F1"]),
            ac("N2", "A320", "S2", ["F2", "F3"]),
            ac("W1", "B767", "S3", ["F4", "F5"]),
        ],
        recovery_window: TimeWindow { start: 0, end },
        disruption: Vec::new(),
        config,
    };
    HubFixture { instance, alpha_oe: 0.1, alpha_ue: 0.9 }
}

/// `inst` with every fleet mapped to one pooled gate type `any` whose
/// count at each airport is the sum of the original counts.
pub fn merge_gate_types(inst: &Instance) -> Instance {
    let mut out = inst.clone();
    let fleets: Vec<String> = inst.gate_types.iter().flat_map(|g| g.fleet_types.iter().cloned()).collect();
    out.gate_types = vec![GateType { id: "any".into(), fleet_types: fleets }];
    for a in out.airports.iter_mut() {
        let total: u32 = a.gate_counts.values().sum();
        a.gate_counts = gates(&[("any", total)]);
    }
    out.config.gate_cost_overrides.clear();
    out
}

/// Seeded random desk-scale instance: `n_flights` in 4..=12 regular flights
/// over 2-4 aircraft, 2-5 airports and 1-2 gate types, unit-to-double slot
/// capacities, and (usually) a one-hour closure.
pub fn desk_instance(seed: u64, n_flights: usize) -> Instance {
    let n_flights = n_flights.clamp(4, 12);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k_lo = 2.max(n_flights.div_ceil(3));
    let k_hi = 4.min(n_flights / 2);
    let n_aircraft = rng.gen_range(k_lo..=k_hi);
    let mut legs = vec![2usize; n_aircraft];
    let mut extra = n_flights - 2 * n_aircraft;
    while extra > 0 {
        let r = rng.gen_range(0..n_aircraft);
        if legs[r] < 3 {
            legs[r] += 1;
            extra -= 1;
        }
    }
    let n_airports = rng.gen_range(2..=5);
    let codes: Vec<String> = (0..n_airports).map(|i| format!("P{i}")).collect();
    let two_types = rng.gen_bool(0.4);
    let fleets: Vec<(&str, &str)> =
        if two_types { vec![("A320", "narrow"), ("B767", "wide")] } else { vec![("A320", "narrow")] };

    let mut flights = Vec::new();
    let mut aircraft = Vec::new();
    let mut latest = 0;
    for (r, &n_legs) in legs.iter().enumerate() {
        let fleet = fleets[rng.gen_range(0..fleets.len())].0;
        let tt = 30;
        let start = rng.gen_range(0..n_airports);
        let mut at = start;
        let mut t = 60 + 15 * rng.gen_range(0..=4);
        let mut planned = Vec::new();
        let with_mt = rng.gen_bool(0.2);
        let mut maintenance = None;
        for leg in 0..n_legs {
            let mut to = rng.gen_range(0..n_airports - 1);
            if to >= at {
                to += 1;
            }
            let dur = 45 + 15 * rng.gen_range(0..=3);
            let id = format!("R{r}F{leg}");
            flights.push(flight(&id, &codes[at], &codes[to], t, t + dur, fleet));
            planned.push(id);
            t += dur + tt + 15 * rng.gen_range(0..=2);
            at = to;
            if with_mt && leg == 0 {
                // Maintenance is never delayed, so leave room for a late
                // first leg.
                let id = format!("R{r}MT");
                t += 60;
                flights.push(flight(&id, &codes[at], &codes[at], t, t + 45, fleet));
                planned.push(id.clone());
                maintenance = Some(id);
                t += 45 + tt;
            }
        }
        latest = latest.max(t);
        aircraft.push(Aircraft {
            id: format!("R{r}"),
            fleet_type: fleet.into(),
            start_airport: codes[start].clone(),
            end_airport: codes[at].clone(),
            turn_time: tt,
            maintenance,
            planned_flight_ids: planned,
        });
    }

    let config = RecoveryConfig { delay_interval: 30, max_delay: 60, ..Default::default() };
    let end = (latest + config.max_delay + 60 + 29) / 30 * 30;
    let mut slots = Vec::new();
    let mut airports = Vec::new();
    for code in &codes {
        let mut s = slots_for(code, 0, end, 30, 1, 1);
        for slot in &mut s {
            slot.dep_cap = rng.gen_range(1..=2);
            slot.arr_cap = rng.gen_range(1..=2);
        }
        slots.extend(s);
        let counts = fleets.iter().map(|(_, g)| (g.to_string(), rng.gen_range(1..=2))).collect();
        airports.push(Airport { code: code.clone(), gate_counts: counts });
    }
    let mut disruption = Vec::new();
    if rng.gen_bool(0.75) {
        let f = &flights[rng.gen_range(0..flights.len())];
        let airport = if rng.gen_bool(0.5) { f.dep_airport.clone() } else { f.arr_airport.clone() };
        let anchor = if airport == f.dep_airport { f.sched_dep } else { f.sched_arr };
        let s = (anchor / 30) * 30 - 30 * rng.gen_range(0..=1);
        let s = s.max(0);
        disruption.push(Disruption::closure(&airport, s, (s + 60).min(end)));
    }
    Instance {
        version: crate::instance::SCHEMA_VERSION,
        airports,
        gate_types: fleets
            .iter()
            .map(|(f, g)| GateType { id: g.to_string(), fleet_types: vec![f.to_string()] })
            .collect(),
        slots,
        flights,
        aircraft,
        recovery_window: TimeWindow { start: 0, end },
        disruption,
        config,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::validate_instance;

    #[test]
    fn desk_instances_are_valid_and_in_range() {
        for seed in 0..200 {
            let n = 4 + (seed as usize % 9);
            let inst = desk_instance(seed, n);
            assert_eq!(validate_instance(&inst), Vec::<String>::new(), "seed {seed}");
            let regular = inst.flights.iter().filter(|f| !f.is_pseudo()).count();
            assert_eq!(regular, n);
            assert!((2..=4).contains(&inst.aircraft.len()));
            assert!((2..=5).contains(&inst.airports.len()));
            assert!((1..=2).contains(&inst.gate_types.len()));
        }
    }

    #[test]
    fn hub_fixtures_are_valid() {
        for v in 0..5 {
            assert_eq!(validate_instance(&hub_conflict(v).instance), Vec::<String>::new());
        }
    }

    #[test]
    fn generator_is_deterministic() {
        assert_eq!(desk_instance(42, 9), desk_instance(42, 9));
    }
}
