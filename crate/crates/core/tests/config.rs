use serde_json::{json, Value};

use gensync_core::config::{load_scenario, parse_high_order, parse_scenario};
use gensync_core::sim::ModelKind;
use gensync_core::Error;

fn configs() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn reference() -> Value {
    serde_json::from_str(&std::fs::read_to_string(configs().join("reference_d0125.json")).unwrap()).unwrap()
}

fn error_path(v: &Value) -> String {
    match parse_scenario(&v.to_string()) {
        Err(Error::Config { path, .. }) => path,
        other => panic!("expected a config error, got {other:?}"),
    }
}

#[test]
fn shipped_configs_load() {
    for f in ["reference_d0125.json", "reference_d025.json", "reference_d05.json", "reference_sinusoid.json"] {
        assert_eq!(load_scenario(configs().join(f)).unwrap().sim.model_kind, ModelKind::Damped);
    }
    assert!(load_scenario(configs().join("phase_damping.json")).unwrap().damping.is_some());
    assert!(load_scenario(configs().join("high_order_run.json")).unwrap().high_order.is_some());
    let text = std::fs::read_to_string(configs().join("high_order_default.json")).unwrap();
    parse_high_order(&text).unwrap();
}

#[test]
fn missing_field_is_named() {
    let mut v = reference();
    v["params"].as_object_mut().unwrap().remove("k1");
    assert_eq!(error_path(&v), "params");
    let mut v = reference();
    v["load"].as_object_mut().unwrap().remove("onset_time");
    assert_eq!(error_path(&v), "load");
}

#[test]
fn unknown_field_is_rejected() {
    let mut v = reference();
    v["sim"]["horizn"] = json!(10.0);
    assert!(error_path(&v).starts_with("sim"));
}

#[test]
fn wrong_type_points_at_the_field() {
    let mut v = reference();
    v["params"]["k"] = json!("fast");
    assert_eq!(error_path(&v), "params.k");
}

#[test]
fn zero_horizon_is_rejected() {
    let mut v = reference();
    v["sim"]["horizon"] = json!(0.0);
    assert_eq!(error_path(&v), "sim.horizon");
}

#[test]
fn weak_gain_is_a_config_error() {
    let mut v = reference();
    v["params"]["k"] = json!(-0.01);
    assert!(error_path(&v).starts_with("params"));
}

#[test]
fn bad_reactance_ordering_is_located() {
    let text = std::fs::read_to_string(configs().join("high_order_run.json")).unwrap();
    let mut v: Value = serde_json::from_str(&text).unwrap();
    v["high_order"]["xd_pp"] = json!(0.5);
    match parse_scenario(&v.to_string()) {
        Err(Error::Config { path, reason }) => {
            assert_eq!(path, "high_order.xd_pp");
            assert!(reason.contains("ordering"), "{reason}");
        }
        other => panic!("{other:?}"),
    }
    let mut bare: Value = serde_json::from_str(&std::fs::read_to_string(configs().join("high_order_default.json")).unwrap()).unwrap();
    bare["tau_f"] = json!(-1.0);
    assert!(matches!(parse_high_order(&bare.to_string()), Err(Error::Config { path, .. }) if path == "high_order.tau_f"));
}

#[test]
fn spoof_cap_breach_is_allowed_but_visible() {
    let mut v = reference();
    v["disturbance"]["amplitude"] = json!(1.0);
    let sc = parse_scenario(&v.to_string()).unwrap();
    assert!(sc.disturbance.exceeds_spoof_cap());
}
