//! Flight copies, connections, and the per-(airport, gate type) activity
//! groups every formulation indexes over.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::error::{RecoveryError, Result};
use crate::instance::{apply_disruption, validate_instance, Instance};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlightCopy {
    pub id: usize,
    pub flight: usize,
    pub delay: i64,
    pub dep_time: i64,
    pub arr_time: i64,
    /// `None` at airports without slots (unconstrained).
    pub dep_slot: Option<usize>,
    pub arr_slot: Option<usize>,
    pub delay_cost: f64,
    pub maintenance: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Connection {
    pub pred: usize,
    pub succ: usize,
    pub airport: usize,
    pub gate_type: usize,
}

/// A gate occupancy event. Maintenance occupies one gate from its start to
/// its end and is a single activity covering both of its movements.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ActKey {
    Dep(usize),
    Arr(usize),
    Maint(usize),
}

impl ActKey {
    pub fn copy(self) -> usize {
        match self {
            ActKey::Dep(c) | ActKey::Arr(c) | ActKey::Maint(c) => c,
        }
    }

    /// True when an aircraft may be sitting on the gate after this event.
    pub fn leaves_aircraft(self) -> bool {
        matches!(self, ActKey::Arr(_) | ActKey::Maint(_))
    }

    /// True when the event needs an aircraft already on the gate.
    pub fn takes_aircraft(self) -> bool {
        matches!(self, ActKey::Dep(_) | ActKey::Maint(_))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Activity {
    pub key: ActKey,
    pub flight: usize,
    /// Gate occupancy starts (a departure or arrival is instantaneous).
    pub t_in: i64,
    pub t_out: i64,
}

#[derive(Clone, Debug)]
pub struct GateGroup {
    pub airport: usize,
    pub gate_type: usize,
    pub capacity: u32,
    pub cost: f64,
    /// Sorted by `(t_in, t_out, key)`.
    pub activities: Vec<Activity>,
    pub connections: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct Network {
    /// The instance with disruptions applied.
    pub inst: Instance,
    pub copies: Vec<FlightCopy>,
    pub copies_of_flight: Vec<Vec<usize>>,
    /// Copy can be flown: its slots have positive capacity.
    pub usable: Vec<bool>,
    pub connections: Vec<Connection>,
    pub conn_index: HashMap<(usize, usize), usize>,
    pub groups: Vec<GateGroup>,
    pub group_of: HashMap<(usize, usize), usize>,
    pub act_group: HashMap<ActKey, usize>,
    pub flight_dep: Vec<usize>,
    pub flight_arr: Vec<usize>,
    pub flight_gate_type: Vec<usize>,
    /// Aircraft owning each maintenance pseudo-flight.
    pub maint_owner: Vec<Option<usize>>,
    pub aircraft_maint: Vec<Option<usize>>,
    pub aircraft_start: Vec<usize>,
    pub aircraft_end: Vec<usize>,
    pub planned: Vec<HashSet<usize>>,
}

impl Network {
    /// Applies the disruption, then builds copies, connections and groups.
    pub fn build(inst: &Instance) -> Result<Network> {
        let violations = validate_instance(inst);
        if !violations.is_empty() {
            return Err(RecoveryError::Invalid(violations));
        }
        let inst = apply_disruption(inst)?;
        let airport = inst.airport_index();
        let fidx = inst.flight_index();
        let flight_dep: Vec<usize> = inst.flights.iter().map(|f| airport[f.dep_airport.as_str()]).collect();
        let flight_arr: Vec<usize> = inst.flights.iter().map(|f| airport[f.arr_airport.as_str()]).collect();
        let flight_gate_type: Vec<usize> =
            inst.flights.iter().map(|f| inst.gate_type_of_fleet(&f.fleet_type).expect("validated fleet")).collect();
        let mut maint_owner = vec![None; inst.flights.len()];
        let mut aircraft_maint = Vec::with_capacity(inst.aircraft.len());
        for (r, ac) in inst.aircraft.iter().enumerate() {
            let m = ac.maintenance.as_deref().map(|m| fidx[m]);
            if let Some(m) = m {
                maint_owner[m] = Some(r);
            }
            aircraft_maint.push(m);
        }
        let planned =
            inst.aircraft.iter().map(|r| r.planned_flight_ids.iter().map(|p| fidx[p.as_str()]).collect()).collect();
        let aircraft_start = inst.aircraft.iter().map(|r| airport[r.start_airport.as_str()]).collect();
        let aircraft_end = inst.aircraft.iter().map(|r| airport[r.end_airport.as_str()]).collect();

        let copies = generate_flight_copies(&inst, &flight_dep, &flight_arr, &maint_owner)?;
        let mut copies_of_flight = vec![Vec::new(); inst.flights.len()];
        for c in &copies {
            copies_of_flight[c.flight].push(c.id);
        }
        let usable = copies
            .iter()
            .map(|c| {
                c.maintenance
                    || (c.dep_slot.is_none_or(|s| inst.slots[s].dep_cap > 0)
                        && c.arr_slot.is_none_or(|s| inst.slots[s].arr_cap > 0))
            })
            .collect();

        let mut net = Network {
            inst,
            copies,
            copies_of_flight,
            usable,
            connections: Vec::new(),
            conn_index: HashMap::new(),
            groups: Vec::new(),
            group_of: HashMap::new(),
            act_group: HashMap::new(),
            flight_dep,
            flight_arr,
            flight_gate_type,
            maint_owner,
            aircraft_maint,
            aircraft_start,
            aircraft_end,
            planned,
        };
        net.build_connections();
        net.build_groups();
        Ok(net)
    }

    fn build_connections(&mut self) {
        let mut min_tt: HashMap<&str, i64> = HashMap::new();
        for r in &self.inst.aircraft {
            let e = min_tt.entry(r.fleet_type.as_str()).or_insert(i64::MAX);
            *e = (*e).min(r.turn_time);
        }
        let mut by_dep: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for c in &self.copies {
            by_dep.entry(self.flight_dep[c.flight]).or_default().push(c.id);
        }
        let mut conns = Vec::new();
        for ci in &self.copies {
            let fi = &self.inst.flights[ci.flight];
            let Some(&tt) = min_tt.get(fi.fleet_type.as_str()) else { continue };
            let a = self.flight_arr[ci.flight];
            let Some(cands) = by_dep.get(&a) else { continue };
            for &j in cands {
                let cj = &self.copies[j];
                if cj.flight == ci.flight || self.inst.flights[cj.flight].fleet_type != fi.fleet_type {
                    continue;
                }
                if ci.arr_time + tt <= cj.dep_time {
                    conns.push(Connection {
                        pred: ci.id,
                        succ: j,
                        airport: a,
                        gate_type: self.flight_gate_type[ci.flight],
                    });
                }
            }
        }
        conns.sort_by_key(|c| (c.pred, c.succ));
        self.conn_index = conns.iter().enumerate().map(|(k, c)| ((c.pred, c.succ), k)).collect();
        self.connections = conns;
    }

    fn build_groups(&mut self) {
        let mut acts: BTreeMap<(usize, usize), Vec<Activity>> = BTreeMap::new();
        for c in &self.copies {
            let gt = self.flight_gate_type[c.flight];
            let (da, aa) = (self.flight_dep[c.flight], self.flight_arr[c.flight]);
            if c.maintenance {
                acts.entry((da, gt)).or_default().push(Activity {
                    key: ActKey::Maint(c.id),
                    flight: c.flight,
                    t_in: c.dep_time,
                    t_out: c.arr_time,
                });
            } else {
                acts.entry((da, gt)).or_default().push(Activity {
                    key: ActKey::Dep(c.id),
                    flight: c.flight,
                    t_in: c.dep_time,
                    t_out: c.dep_time,
                });
                acts.entry((aa, gt)).or_default().push(Activity {
                    key: ActKey::Arr(c.id),
                    flight: c.flight,
                    t_in: c.arr_time,
                    t_out: c.arr_time,
                });
            }
        }
        for (a, ap) in self.inst.airports.iter().enumerate() {
            for (t, gt) in self.inst.gate_types.iter().enumerate() {
                if ap.gate_counts.get(&gt.id).copied().unwrap_or(0) > 0 {
                    acts.entry((a, t)).or_default();
                }
            }
        }
        for ((a, t), mut list) in acts {
            list.sort_by_key(|x| (x.t_in, x.t_out, x.key));
            let g = self.groups.len();
            for x in &list {
                self.act_group.insert(x.key, g);
            }
            self.group_of.insert((a, t), g);
            self.groups.push(GateGroup {
                airport: a,
                gate_type: t,
                capacity: self.inst.gate_count(a, t),
                cost: self.inst.config.gate_cost(&self.inst.airports[a].code, &self.inst.gate_types[t].id),
                activities: list,
                connections: Vec::new(),
            });
        }
        for (k, c) in self.connections.iter().enumerate() {
            let g = self.group_of[&(c.airport, c.gate_type)];
            self.groups[g].connections.push(k);
        }
    }

    /// Departure-side activity of a copy (the maintenance activity for a
    /// pseudo-flight).
    pub fn dep_key(&self, copy: usize) -> ActKey {
        if self.copies[copy].maintenance {
            ActKey::Maint(copy)
        } else {
            ActKey::Dep(copy)
        }
    }

    pub fn arr_key(&self, copy: usize) -> ActKey {
        if self.copies[copy].maintenance {
            ActKey::Maint(copy)
        } else {
            ActKey::Arr(copy)
        }
    }

    /// Gate activities generated by flying `copy`.
    pub fn copy_activities(&self, copy: usize) -> Vec<ActKey> {
        if self.copies[copy].maintenance {
            vec![ActKey::Maint(copy)]
        } else {
            vec![ActKey::Dep(copy), ActKey::Arr(copy)]
        }
    }

    /// Route and pattern cost of flying `copy` on aircraft `r`.
    pub fn copy_cost(&self, r: usize, copy: usize) -> f64 {
        let c = &self.copies[copy];
        let swap = if self.planned[r].contains(&c.flight) { 0.0 } else { self.inst.config.swap_cost };
        c.delay_cost + swap
    }

    pub fn is_swap(&self, r: usize, copy: usize) -> bool {
        !self.planned[r].contains(&self.copies[copy].flight)
    }

    /// Whether a gate can serve `u` and then `v` (both at one group).
    /// An arrival (or maintenance end) followed by a departure it connects
    /// to needs no buffer; every other consecutive pair does.
    pub fn gate_follows(&self, u: &Activity, v: &Activity) -> bool {
        if u.flight == v.flight {
            return false;
        }
        if u.key.leaves_aircraft()
            && v.key.takes_aircraft()
            && self.conn_index.contains_key(&(u.key.copy(), v.key.copy()))
        {
            return u.t_out <= v.t_in;
        }
        u.t_out + self.inst.config.buffer_time <= v.t_in
    }

    /// Connection realized when `u` is immediately followed by `v` on a gate.
    pub fn gate_pair(&self, u: ActKey, v: ActKey) -> Option<usize> {
        if u.leaves_aircraft() && v.takes_aircraft() {
            self.conn_index.get(&(u.copy(), v.copy())).copied()
        } else {
            None
        }
    }

    pub fn copy_label(&self, copy: usize) -> String {
        let c = &self.copies[copy];
        format!("{}+{}", self.inst.flights[c.flight].id, c.delay)
    }

    pub fn act_label(&self, key: ActKey) -> String {
        match key {
            ActKey::Dep(c) => format!("dep {}", self.copy_label(c)),
            ActKey::Arr(c) => format!("arr {}", self.copy_label(c)),
            ActKey::Maint(c) => format!("mt {}", self.copy_label(c)),
        }
    }

    pub fn group_label(&self, g: usize) -> String {
        let gr = &self.groups[g];
        format!("{}/{}", self.inst.airports[gr.airport].code, self.inst.gate_types[gr.gate_type].id)
    }

    /// Connection graph as a whitespace-separated edge list.
    pub fn dump_connections(&self) -> String {
        let mut out = String::from("# pred succ airport gate_type\n");
        for c in &self.connections {
            let _ = writeln!(
                out,
                "{} {} {} {}",
                self.copy_label(c.pred),
                self.copy_label(c.succ),
                self.inst.airports[c.airport].code,
                self.inst.gate_types[c.gate_type].id
            );
        }
        out
    }
}

fn slot_of(inst: &Instance, airport: &str, t: i64) -> Result<Option<usize>> {
    let mut any = false;
    for (k, s) in inst.slots.iter().enumerate() {
        if s.airport == airport {
            any = true;
            if s.contains(t) {
                return Ok(Some(k));
            }
        }
    }
    if any {
        Err(RecoveryError::Coverage(format!("minute {t} at {airport} falls in no slot")))
    } else {
        Ok(None)
    }
}

/// Delayed copies of every flight, at multiples of the delay interval up
/// to the maximum delay. Maintenance keeps its scheduled time only; copies
/// arriving at or after the window end are dropped.
fn generate_flight_copies(
    inst: &Instance,
    flight_dep: &[usize],
    flight_arr: &[usize],
    maint_owner: &[Option<usize>],
) -> Result<Vec<FlightCopy>> {
    let cfg = &inst.config;
    let steps = cfg.max_delay / cfg.delay_interval;
    let mut out = Vec::new();
    for (j, f) in inst.flights.iter().enumerate() {
        let maintenance = maint_owner[j].is_some();
        let last = if maintenance { 0 } else { steps };
        for k in 0..=last {
            let delay = k * cfg.delay_interval;
            let dep_time = f.sched_dep + delay;
            let arr_time = f.sched_arr + delay;
            if dep_time < inst.recovery_window.start || arr_time >= inst.recovery_window.end {
                continue;
            }
            let (dep_slot, arr_slot) = if maintenance {
                (None, None)
            } else {
                (
                    slot_of(inst, &inst.airports[flight_dep[j]].code, dep_time)?,
                    slot_of(inst, &inst.airports[flight_arr[j]].code, arr_time)?,
                )
            };
            out.push(FlightCopy {
                id: out.len(),
                flight: j,
                delay,
                dep_time,
                arr_time,
                dep_slot,
                arr_slot,
                delay_cost: delay as f64 * cfg.delay_cost_per_min,
                maintenance,
            });
        }
    }
    Ok(out)
}
