use serde_json::Value;

use qpt_web::{cdf_json, compare_json, error_matrix_json, MAX_GATES};

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn error_matrix_is_near_identity_and_trace_one() {
    let v = parse(error_matrix_json(0.05, 10_000, 1).unwrap());
    let re = v["re"].as_array().unwrap();
    assert_eq!(re.len(), 4);
    let trace: f64 = (0..4).map(|k| re[k][k].as_f64().unwrap()).sum();
    assert!((trace - 1.0).abs() < 1e-9);
    let w = v["identity_weight"].as_f64().unwrap();
    assert!(w > 0.85 && w < 1.0, "{w}");
    // noiseless and exact: the identity itself
    let exact = parse(error_matrix_json(0.0, 0, 1).unwrap());
    assert!((exact["identity_weight"].as_f64().unwrap() - 1.0).abs() < 1e-8);
}

#[test]
fn mitigation_shows_in_comparison() {
    let v = parse(compare_json(0.05, 10, 10_000, 2).unwrap());
    assert_eq!(v["labels"].as_array().unwrap().len(), 10);
    let (s, e) = (v["mean_std"].as_f64().unwrap(), v["mean_em"].as_f64().unwrap());
    assert!(e * 5.0 < s, "std {s} em {e}");
}

#[test]
fn cdf_is_sorted_and_w1_matches_delta() {
    let v = parse(cdf_json("[0.9999, 0.99, 0.999]", 1.0, 5.0, 4.0).unwrap());
    let q: Vec<f64> = v["q"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!(q.windows(2).all(|w| w[0] <= w[1]));
    // samples at q = -4, -3, -2 against a delta at -4
    assert!((v["w1"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!((v["w1_normalized"].as_f64().unwrap() - 0.25).abs() < 1e-9);
}

#[test]
fn bad_inputs_are_errors() {
    assert!(compare_json(0.05, 0, 100, 1).is_err());
    assert!(compare_json(0.05, MAX_GATES + 1, 100, 1).is_err());
    assert!(compare_json(1.5, 2, 100, 1).is_err());
    assert!(cdf_json("not json", 1.0, 5.0, 4.0).is_err());
    assert!(cdf_json("[0.9]", 5.0, 1.0, 4.0).is_err());
}
