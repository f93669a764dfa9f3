use std::collections::BTreeSet;
use std::path::Path;

use recovery_core::fixtures::{desk_instance, hub_conflict, t1, t1_closure};
use recovery_core::instance::{parse_instance, validate_instance, Instance};

fn load(name: &str) -> Instance {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name);
    parse_instance(&std::fs::read(path).unwrap()).unwrap()
}

fn schema() -> serde_json::Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/instance.schema.json");
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

fn keys(v: &serde_json::Value) -> BTreeSet<String> {
    v.as_object().unwrap().keys().cloned().collect()
}

#[test]
fn shipped_instances_match_their_generators() {
    assert_eq!(load("t1.json"), t1());
    assert_eq!(load("t1_closure.json"), t1_closure());
    assert_eq!(load("hub_conflict.json"), hub_conflict(0).instance);
    assert_eq!(load("desk_10_7.json"), desk_instance(7, 10));
    for name in ["t1.json", "t1_closure.json", "hub_conflict.json", "desk_10_7.json"] {
        assert!(validate_instance(&load(name)).is_empty(), "{name}");
    }
}

#[test]
fn schema_lists_every_serialized_field() {
    let s = schema();
    let doc = serde_json::to_value(hub_conflict(0).instance).unwrap();
    assert_eq!(keys(&s["properties"]), keys(&doc));
    let defs = &s["$defs"];
    assert_eq!(keys(&defs["config"]["properties"]), keys(&doc["config"]));
    for (def, sample) in [
        ("airport", &doc["airports"][0]),
        ("gate_type", &doc["gate_types"][0]),
        ("slot", &doc["slots"][0]),
        ("flight", &doc["flights"][0]),
        ("window", &doc["recovery_window"]),
    ] {
        assert!(keys(sample).is_subset(&keys(&defs[def]["properties"])), "{def}");
    }
    assert_eq!(s["properties"]["version"]["const"], doc["version"]);
}
