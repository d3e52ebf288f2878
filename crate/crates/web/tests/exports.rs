use halfline_web::{density_profile_json, one_shock_law_json, snapshot_json};
use serde_json::Value;

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn low_density_profile_is_flat() {
    let p = parse(density_profile_json("0.3", 6).unwrap());
    assert_eq!(p["regime"], "bernoulli");
    for d in p["density"].as_array().unwrap() {
        assert!((d.as_f64().unwrap() - 0.3).abs() < 1e-12);
    }
}

#[test]
fn first_site_carries_the_maximal_current() {
    // Injection at rate alpha into an empty first site carries current 1/4.
    for (a, x) in [("3/4", 0.75), ("0.9", 0.9)] {
        let p = parse(density_profile_json(a, 5).unwrap());
        assert_eq!(p["assumes_conjecture"], true);
        let d1 = p["density"][0].as_f64().unwrap();
        assert!((x * (1.0 - d1) - 0.25).abs() < 1e-12, "{a}: {d1}");
    }
}

#[test]
fn profile_rejects_bad_input() {
    assert!(density_profile_json("1.2", 4).is_err());
    assert!(density_profile_json("0.7", 0).is_err());
    assert!(density_profile_json("0.7", 11).is_err());
}

#[test]
fn one_shock_law_is_a_distribution() {
    let law = parse(one_shock_law_json("0.4", 1, 1).unwrap());
    assert!((law["exist"].as_f64().unwrap() - 0.648).abs() < 1e-12);
    let h: Vec<f64> = law["height"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert_eq!(h.len(), 3);
    assert!((h.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    let law = parse(one_shock_law_json("3/4", 2, 3).unwrap());
    let total: f64 = law["height"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn snapshot_is_reproducible() {
    let a = snapshot_json(0.5, 5, 5, 10.0, 3).unwrap();
    assert_eq!(a, snapshot_json(0.5, 5, 5, 10.0, 3).unwrap());
    let s = parse(a);
    let seconds = s["sites"].as_array().unwrap().iter().filter(|c| c.as_u64() == Some(2)).count();
    let left = s["second_class_left"].as_u64().unwrap() as usize;
    assert_eq!(seconds + left, 1);
    assert_eq!(s["second_class_site"].is_null(), left == 1);
}

#[test]
fn snapshot_rejects_bad_rate() {
    assert!(snapshot_json(0.0, 1, 1, 1.0, 0).is_err());
}
