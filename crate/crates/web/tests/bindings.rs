use srgeo_web::{classify, pendulum, trace};

#[test]
fn flat_libration_trace() {
    let json = trace("flat", &[0.0, 0.0, 0.0, 0.0, 1.0, 0.5], 20.0, 1e-10).map_err(|_| ()).unwrap();
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["pair"], "(IV,III)");
    let events = v["events"].as_array().unwrap();
    assert!(events.len() > 2);
    assert!(events.iter().any(|e| e["tick"].is_array()));
    assert!(v["domain_exit"].is_null());
}

#[test]
fn classify_and_pendulum() {
    assert_eq!(classify("flat", &[0.0, 0.0, 0.0, 0.0, 0.0, 1.0]).map_err(|_| ()).unwrap(), "(II,III)");
    assert_eq!(classify("sphere", &[0.1, 0.0, 0.0, 0.0, 0.0, 0.0]).map_err(|_| ()).unwrap(), "(I,I)");
    let p: serde_json::Value = serde_json::from_str(&pendulum("flat", &[0.0, 0.0, 0.0, 0.0, 1.0, 0.5]).map_err(|_| ()).unwrap()).unwrap();
    assert_eq!(p["regime"], "libration");
    assert!(p["period"].as_f64().unwrap() > 0.0);
}
