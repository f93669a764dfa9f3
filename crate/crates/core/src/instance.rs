//! Problem data, the JSON instance format, and validation.
//!
//! Times are integer minutes from a horizon origin. Slot intervals are
//! half-open, so a movement at a slot boundary belongs to the later slot.
//! The format is described in `schema/instance.schema.json`.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{RecoveryError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Airport {
    pub code: String,
    /// Gate count per gate-type id.
    #[serde(default)]
    pub gate_counts: BTreeMap<String, u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateType {
    pub id: String,
    /// Fleet types this gate type serves. Each fleet type must appear in
    /// exactly one gate type.
    pub fleet_types: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Slot {
    pub airport: String,
    pub start: i64,
    pub length: i64,
    pub dep_cap: u32,
    pub arr_cap: u32,
}

impl Slot {
    pub fn end(&self) -> i64 {
        self.start + self.length
    }

    pub fn contains(&self, t: i64) -> bool {
        self.start <= t && t < self.end()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Flight {
    pub id: String,
    pub dep_airport: String,
    pub arr_airport: String,
    pub sched_dep: i64,
    pub sched_arr: i64,
    pub fleet_type: String,
    /// Falls back to `config.cancel_cost_default`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cancel_cost: Option<f64>,
}

impl Flight {
    pub fn is_pseudo(&self) -> bool {
        self.dep_airport == self.arr_airport
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Aircraft {
    pub id: String,
    pub fleet_type: String,
    pub start_airport: String,
    pub end_airport: String,
    pub turn_time: i64,
    /// Id of a maintenance pseudo-flight (departure airport equals arrival
    /// airport) that every route of this aircraft must contain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub maintenance: Option<String>,
    /// Original tail assignment in flying order, maintenance included.
    #[serde(default)]
    pub planned_flight_ids: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeWindow {
    pub start: i64,
    pub end: i64,
}

/// Capacity override for every slot of `airport` intersecting
/// `[start, end)`. A missing cap leaves that direction unchanged; when both
/// are missing the override is a full closure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Disruption {
    pub airport: String,
    pub start: i64,
    pub end: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dep_cap: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arr_cap: Option<u32>,
}

impl Disruption {
    pub fn closure(airport: &str, start: i64, end: i64) -> Self {
        Disruption { airport: airport.into(), start, end, dep_cap: Some(0), arr_cap: Some(0) }
    }

    fn caps(&self) -> (Option<u32>, Option<u32>) {
        match (self.dep_cap, self.arr_cap) {
            (None, None) => (Some(0), Some(0)),
            caps => caps,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CutFamily {
    #[serde(alias = "benders_opt", alias = "BendersOpt")]
    Bendersopt,
    #[serde(alias = "LLC")]
    Llc,
    #[serde(alias = "Global")]
    Global,
}

impl std::str::FromStr for CutFamily {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bendersopt" | "benders_opt" | "opt" => Ok(CutFamily::Bendersopt),
            "llc" => Ok(CutFamily::Llc),
            "global" | "gc" => Ok(CutFamily::Global),
            other => Err(format!("unknown cut family '{other}'")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateCostOverride {
    pub airport: String,
    pub gate_type: String,
    pub cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecoveryConfig {
    pub delay_interval: i64,
    pub max_delay: i64,
    pub cancel_cost_default: f64,
    pub delay_cost_per_min: f64,
    pub swap_cost: f64,
    pub gate_pattern_cost: f64,
    pub gate_cost_overrides: Vec<GateCostOverride>,
    pub buffer_time: i64,
    pub epsilon: f64,
    /// Seconds.
    pub time_limit: f64,
    pub max_legs: usize,
    pub columns_per_round: usize,
    pub cut_families: Vec<CutFamily>,
    /// Arrival-slot reduction rate used by the sequential baseline.
    pub alpha: f64,
    pub separation: bool,
    pub certificate: bool,
    /// Patterns seeded per uncovered connection before gate pricing.
    pub addini: usize,
    /// Seed the master with gate-occupancy inequalities.
    pub occupancy_cuts: bool,
    /// Worker threads for pricing and subproblems; 0 picks the default.
    pub workers: usize,
    pub seed: u64,
    /// Lower bound on the gate cost used by the L-shaped cuts.
    pub subproblem_lower_bound: f64,
    /// Largest pattern or route universe enumerated explicitly.
    pub enumeration_budget: usize,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        RecoveryConfig {
            delay_interval: 5,
            max_delay: 120,
            cancel_cost_default: 200.0,
            delay_cost_per_min: 1.0,
            swap_cost: 0.0,
            gate_pattern_cost: 4.0,
            gate_cost_overrides: Vec::new(),
            buffer_time: 15,
            epsilon: 0.05,
            time_limit: 600.0,
            max_legs: 12,
            columns_per_round: 10,
            cut_families: vec![CutFamily::Bendersopt, CutFamily::Llc, CutFamily::Global],
            alpha: 0.1,
            separation: true,
            certificate: true,
            addini: 3,
            occupancy_cuts: true,
            workers: 0,
            seed: 0,
            subproblem_lower_bound: 0.0,
            enumeration_budget: 200_000,
        }
    }
}

impl RecoveryConfig {
    pub fn gate_cost(&self, airport: &str, gate_type: &str) -> f64 {
        self.gate_cost_overrides
            .iter()
            .find(|o| o.airport == airport && o.gate_type == gate_type)
            .map_or(self.gate_pattern_cost, |o| o.cost)
    }

    pub fn has_cut(&self, family: CutFamily) -> bool {
        self.cut_families.contains(&family)
    }

    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.delay_interval <= 0 {
            v.push("config: delay_interval must be positive".to_string());
        } else if self.max_delay < 0 || self.max_delay % self.delay_interval != 0 {
            v.push("config: delay_interval must divide max_delay".to_string());
        }
        if !(0.0..1.0).contains(&self.alpha) {
            v.push("config: alpha must lie in [0, 1)".to_string());
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            v.push("config: epsilon must be positive".to_string());
        }
        if self.max_legs == 0 || self.columns_per_round == 0 {
            v.push("config: max_legs and columns_per_round must be positive".to_string());
        }
        if self.buffer_time < 0 {
            v.push("config: buffer_time must be nonnegative".to_string());
        }
        for (name, c) in [
            ("cancel_cost_default", self.cancel_cost_default),
            ("delay_cost_per_min", self.delay_cost_per_min),
            ("swap_cost", self.swap_cost),
            ("gate_pattern_cost", self.gate_pattern_cost),
            ("subproblem_lower_bound", self.subproblem_lower_bound),
        ] {
            if !(c.is_finite() && c >= 0.0) {
                v.push(format!("config: {name} must be finite and nonnegative"));
            }
        }
        if self.gate_cost_overrides.iter().any(|o| !(o.cost.is_finite() && o.cost >= 0.0)) {
            v.push("config: gate cost overrides must be finite and nonnegative".to_string());
        }
        v
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    #[serde(default = "default_version")]
    pub version: u32,
    pub airports: Vec<Airport>,
    pub gate_types: Vec<GateType>,
    #[serde(default)]
    pub slots: Vec<Slot>,
    pub flights: Vec<Flight>,
    pub aircraft: Vec<Aircraft>,
    pub recovery_window: TimeWindow,
    #[serde(default)]
    pub disruption: Vec<Disruption>,
    #[serde(default)]
    pub config: RecoveryConfig,
}

fn default_version() -> u32 {
    SCHEMA_VERSION
}

/// Reads an instance document and checks every cross-reference.
pub fn parse_instance(bytes: &[u8]) -> Result<Instance> {
    let inst: Instance = serde_json::from_slice(bytes).map_err(|e| RecoveryError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let dangling = inst.dangling_references();
    if !dangling.is_empty() {
        return Err(RecoveryError::Reference(dangling.join("; ")));
    }
    Ok(inst)
}

pub fn emit_instance(inst: &Instance) -> String {
    serde_json::to_string_pretty(inst).expect("instance serializes")
}

/// Returns every violated invariant; empty iff the instance is valid.
pub fn validate_instance(inst: &Instance) -> Vec<String> {
    inst.violations()
}

/// Replaces slot capacities by the disruption overrides.
pub fn apply_disruption(inst: &Instance) -> Result<Instance> {
    let mut out = inst.clone();
    let w = inst.recovery_window;
    for d in &inst.disruption {
        if !inst.airports.iter().any(|a| a.code == d.airport) {
            return Err(RecoveryError::Reference(format!("disruption airport '{}'", d.airport)));
        }
        if d.start >= d.end || d.start < w.start || d.end > w.end {
            return Err(RecoveryError::Range(format!(
                "[{}, {}) at {} is not inside the window [{}, {})",
                d.start, d.end, d.airport, w.start, w.end
            )));
        }
        let (dep, arr) = d.caps();
        for s in out.slots.iter_mut() {
            if s.airport == d.airport && s.start < d.end && d.start < s.end() {
                if let Some(c) = dep {
                    s.dep_cap = c;
                }
                if let Some(c) = arr {
                    s.arr_cap = c;
                }
            }
        }
    }
    Ok(out)
}

impl Instance {
    pub fn flight_index(&self) -> HashMap<&str, usize> {
        self.flights.iter().enumerate().map(|(i, f)| (f.id.as_str(), i)).collect()
    }

    pub fn airport_index(&self) -> HashMap<&str, usize> {
        self.airports.iter().enumerate().map(|(i, a)| (a.code.as_str(), i)).collect()
    }

    /// Gate-type index serving `fleet`, if any.
    pub fn gate_type_of_fleet(&self, fleet: &str) -> Option<usize> {
        self.gate_types.iter().position(|g| g.fleet_types.iter().any(|f| f == fleet))
    }

    pub fn cancel_cost(&self, flight: usize) -> f64 {
        self.flights[flight].cancel_cost.unwrap_or(self.config.cancel_cost_default)
    }

    pub fn gate_count(&self, airport: usize, gate_type: usize) -> u32 {
        let id = &self.gate_types[gate_type].id;
        self.airports[airport].gate_counts.get(id).copied().unwrap_or(0)
    }

    /// Ids of pseudo-flights referenced as maintenance by some aircraft.
    pub fn maintenance_ids(&self) -> HashSet<&str> {
        self.aircraft.iter().filter_map(|r| r.maintenance.as_deref()).collect()
    }

    fn dangling_references(&self) -> Vec<String> {
        let airports: HashSet<&str> = self.airports.iter().map(|a| a.code.as_str()).collect();
        let gate_types: HashSet<&str> = self.gate_types.iter().map(|g| g.id.as_str()).collect();
        let flights: HashSet<&str> = self.flights.iter().map(|f| f.id.as_str()).collect();
        let fleets: HashSet<&str> =
            self.gate_types.iter().flat_map(|g| g.fleet_types.iter().map(String::as_str)).collect();
        let mut bad_airports = Vec::new();
        let mut airport = |ctx: String, code: &str| {
            if !airports.contains(code) {
                bad_airports.push(format!("{ctx} references unknown airport '{code}'"));
            }
        };
        for s in &self.slots {
            airport("slot".into(), &s.airport);
        }
        for f in &self.flights {
            airport(format!("flight {}", f.id), &f.dep_airport);
            airport(format!("flight {}", f.id), &f.arr_airport);
        }
        for r in &self.aircraft {
            airport(format!("aircraft {}", r.id), &r.start_airport);
            airport(format!("aircraft {}", r.id), &r.end_airport);
        }
        for d in &self.disruption {
            airport("disruption".into(), &d.airport);
        }
        for o in &self.config.gate_cost_overrides {
            airport("gate cost override".into(), &o.airport);
        }
        let mut out = bad_airports;
        for o in &self.config.gate_cost_overrides {
            if !gate_types.contains(o.gate_type.as_str()) {
                out.push(format!("gate cost override references unknown gate type '{}'", o.gate_type));
            }
        }
        for a in &self.airports {
            for t in a.gate_counts.keys() {
                if !gate_types.contains(t.as_str()) {
                    out.push(format!("airport {} references unknown gate type '{t}'", a.code));
                }
            }
        }
        for f in &self.flights {
            if !fleets.contains(f.fleet_type.as_str()) {
                out.push(format!("flight {} has fleet type '{}' served by no gate type", f.id, f.fleet_type));
            }
        }
        for r in &self.aircraft {
            if !fleets.contains(r.fleet_type.as_str()) {
                out.push(format!("aircraft {} has fleet type '{}' served by no gate type", r.id, r.fleet_type));
            }
            if let Some(m) = &r.maintenance {
                if !flights.contains(m.as_str()) {
                    out.push(format!("aircraft {} references unknown maintenance '{m}'", r.id));
                }
            }
            for p in &r.planned_flight_ids {
                if !flights.contains(p.as_str()) {
                    out.push(format!("aircraft {} plans unknown flight '{p}'", r.id));
                }
            }
        }
        out
    }

    fn violations(&self) -> Vec<String> {
        let mut v = self.dangling_references();
        if !v.is_empty() {
            return v;
        }
        v.extend(self.config.violations());
        let w = self.recovery_window;
        if w.start >= w.end {
            v.push("recovery window is empty".into());
        }

        let mut seen = BTreeSet::new();
        for a in &self.airports {
            if !seen.insert(a.code.as_str()) {
                v.push(format!("duplicate airport '{}'", a.code));
            }
        }
        seen.clear();
        for g in &self.gate_types {
            if !seen.insert(g.id.as_str()) {
                v.push(format!("duplicate gate type '{}'", g.id));
            }
        }
        let mut fleet_owner: HashMap<&str, &str> = HashMap::new();
        for g in &self.gate_types {
            for f in &g.fleet_types {
                if let Some(prev) = fleet_owner.insert(f.as_str(), g.id.as_str()) {
                    if prev != g.id {
                        v.push(format!("fleet type '{f}' maps to gate types '{prev}' and '{}'", g.id));
                    }
                }
            }
        }
        seen.clear();
        for f in &self.flights {
            if !seen.insert(f.id.as_str()) {
                v.push(format!("duplicate flight '{}'", f.id));
            }
        }
        seen.clear();
        for r in &self.aircraft {
            if !seen.insert(r.id.as_str()) {
                v.push(format!("duplicate aircraft '{}'", r.id));
            }
        }

        // Slots: positive length, disjoint, tiling the window per airport.
        let mut by_airport: BTreeMap<&str, Vec<&Slot>> = BTreeMap::new();
        for s in &self.slots {
            if s.length <= 0 {
                v.push(format!("slot at {} starting {} has nonpositive length", s.airport, s.start));
            }
            by_airport.entry(s.airport.as_str()).or_default().push(s);
        }
        for (code, mut slots) in by_airport {
            slots.sort_by_key(|s| s.start);
            for pair in slots.windows(2) {
                if pair[1].start < pair[0].end() {
                    v.push(format!("slot overlap at {code} around minute {}", pair[1].start));
                } else if pair[1].start > pair[0].end() {
                    v.push(format!("slot gap at {code} between {} and {}", pair[0].end(), pair[1].start));
                }
            }
            let first = slots.first().map_or(w.start, |s| s.start);
            let last = slots.last().map_or(w.end, |s| s.end());
            if first > w.start || last < w.end {
                v.push(format!("slots at {code} do not cover the recovery window"));
            }
        }

        let maint = self.maintenance_ids();
        for f in &self.flights {
            if f.sched_dep >= f.sched_arr {
                v.push(format!("flight {} has nonpositive duration", f.id));
            }
            if f.is_pseudo() && !maint.contains(f.id.as_str()) {
                v.push(format!("flight {} departs and arrives at {} but is no maintenance task", f.id, f.dep_airport));
            }
            if !f.is_pseudo() && maint.contains(f.id.as_str()) {
                v.push(format!("maintenance {} must start and end at one airport", f.id));
            }
            if f.sched_dep < w.start || f.sched_arr >= w.end {
                v.push(format!("flight {} lies outside the recovery window", f.id));
            }
            if let Some(c) = f.cancel_cost {
                if !(c.is_finite() && c >= 0.0) {
                    v.push(format!("flight {} has an invalid cancel cost", f.id));
                }
            }
        }

        let flight_idx = self.flight_index();
        let mut maint_owner: HashMap<&str, &str> = HashMap::new();
        let mut planned_owner: HashMap<&str, &str> = HashMap::new();
        for r in &self.aircraft {
            if r.turn_time < 1 {
                v.push(format!("aircraft {} needs a positive turn time", r.id));
            }
            if let Some(m) = &r.maintenance {
                let f = &self.flights[flight_idx[m.as_str()]];
                if f.fleet_type != r.fleet_type {
                    v.push(format!("maintenance {m} fleet type differs from aircraft {}", r.id));
                }
                if let Some(other) = maint_owner.insert(m.as_str(), r.id.as_str()) {
                    v.push(format!("maintenance {m} shared by aircraft {other} and {}", r.id));
                }
                if !r.planned_flight_ids.contains(m) {
                    v.push(format!("aircraft {} does not plan its maintenance {m}", r.id));
                }
            }
            let mut at = r.start_airport.as_str();
            let mut ready = i64::MIN;
            for pid in &r.planned_flight_ids {
                if let Some(other) = planned_owner.insert(pid.as_str(), r.id.as_str()) {
                    v.push(format!("flight {pid} planned for aircraft {other} and {}", r.id));
                }
                let f = &self.flights[flight_idx[pid.as_str()]];
                if f.fleet_type != r.fleet_type {
                    v.push(format!("aircraft {} plans flight {pid} of another fleet type", r.id));
                }
                if f.dep_airport != at || f.sched_dep < ready {
                    v.push(format!("planned chain of aircraft {} breaks at flight {pid}", r.id));
                }
                if f.is_pseudo() && r.maintenance.as_deref() != Some(pid.as_str()) {
                    v.push(format!("aircraft {} plans another aircraft's maintenance {pid}", r.id));
                }
                at = f.arr_airport.as_str();
                ready = f.sched_arr + r.turn_time;
            }
            if !r.planned_flight_ids.is_empty() && at != r.end_airport {
                v.push(format!("planned chain of aircraft {} does not end at {}", r.id, r.end_airport));
            }
        }

        for d in &self.disruption {
            if d.start >= d.end || d.start < w.start || d.end > w.end {
                v.push(format!("disruption at {} leaves the recovery window", d.airport));
            }
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn t1_is_valid() {
        let t1 = fixtures::t1();
        assert_eq!(validate_instance(&t1), Vec::<String>::new());
        assert_eq!(t1.flights.len(), 2);
        assert_eq!(t1.airports.len(), 2);
        assert_eq!(t1.aircraft.len(), 1);
    }

    #[test]
    fn minimal_document_parses() {
        let doc = r#"{
            "airports": [{"code": "A", "gate_counts": {"n": 1}}, {"code": "B", "gate_counts": {"n": 1}}],
            "gate_types": [{"id": "n", "fleet_types": ["320"]}],
            "flights": [{"id": "F1", "dep_airport": "A", "arr_airport": "B",
                         "sched_dep": 10, "sched_arr": 70, "fleet_type": "320"}],
            "aircraft": [{"id": "R1", "fleet_type": "320", "start_airport": "A", "end_airport": "B",
                          "turn_time": 30, "planned_flight_ids": ["F1"]}],
            "recovery_window": {"start": 0, "end": 200}
        }"#;
        let inst = parse_instance(doc.as_bytes()).unwrap();
        assert_eq!(inst.flights.len(), 1);
        assert_eq!(inst.aircraft.len(), 1);
        assert!(validate_instance(&inst).is_empty());
        assert_eq!(inst.config, RecoveryConfig::default());
    }

    #[test]
    fn unknown_airport_is_reference_error() {
        let mut t1 = fixtures::t1();
        t1.flights[0].arr_airport = "ZZZ".into();
        let doc = emit_instance(&t1);
        assert!(matches!(parse_instance(doc.as_bytes()), Err(RecoveryError::Reference(_))));
    }

    #[test]
    fn syntax_error_has_location() {
        match parse_instance(b"{\n  \"airports\": [,]\n}") {
            Err(RecoveryError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_duration_flagged() {
        let mut t1 = fixtures::t1();
        t1.flights[0].sched_arr = t1.flights[0].sched_dep;
        let v = validate_instance(&t1);
        assert!(v.iter().any(|m| m.contains("nonpositive duration")), "{v:?}");
    }

    #[test]
    fn overlapping_slots_flagged() {
        let mut t1 = fixtures::t1();
        t1.slots[1].start -= 5;
        let v = validate_instance(&t1);
        assert!(v.iter().any(|m| m.contains("slot overlap")), "{v:?}");
    }

    #[test]
    fn closure_zeroes_intersecting_slots() {
        let mut t1 = fixtures::t1();
        t1.disruption = vec![Disruption::closure("A", 60, 120)];
        let d = apply_disruption(&t1).unwrap();
        for (before, after) in t1.slots.iter().zip(&d.slots) {
            let hit = before.airport == "A" && before.start < 120 && 60 < before.end();
            if hit {
                assert_eq!((after.dep_cap, after.arr_cap), (0, 0));
            } else {
                assert_eq!(before, after);
            }
        }
    }

    #[test]
    fn flow_control_touches_one_slot() {
        let mut t1 = fixtures::t1();
        t1.slots[2].arr_cap = 4;
        let (s, l) = (t1.slots[2].start, t1.slots[2].length);
        t1.disruption = vec![Disruption {
            airport: t1.slots[2].airport.clone(),
            start: s,
            end: s + l,
            dep_cap: None,
            arr_cap: Some(2),
        }];
        let d = apply_disruption(&t1).unwrap();
        let changed: Vec<usize> = (0..t1.slots.len()).filter(|&i| t1.slots[i] != d.slots[i]).collect();
        assert_eq!(changed, vec![2]);
        assert_eq!(d.slots[2].arr_cap, 2);
        assert_eq!(d.slots[2].dep_cap, t1.slots[2].dep_cap);
    }

    #[test]
    fn disruption_idempotent_and_empty_identity() {
        let mut t1 = fixtures::t1();
        assert_eq!(apply_disruption(&t1).unwrap(), t1);
        t1.disruption = vec![Disruption::closure("A", 30, 90)];
        let once = apply_disruption(&t1).unwrap();
        assert_eq!(apply_disruption(&once).unwrap(), once);
    }

    #[test]
    fn disruption_outside_window_is_range_error() {
        let mut t1 = fixtures::t1();
        t1.disruption = vec![Disruption::closure("A", -30, 30)];
        assert!(matches!(apply_disruption(&t1), Err(RecoveryError::Range(_))));
    }

    #[test]
    fn config_interval_must_divide() {
        let cfg = RecoveryConfig { delay_interval: 7, max_delay: 60, ..Default::default() };
        assert!(!cfg.violations().is_empty());
    }
}
