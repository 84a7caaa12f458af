use apienergy_web::{distributions_json, simulate_json, uapi_json, DEFAULT_SPEC, SAMPLE_TRACE};

#[test]
fn sample_trace_values() {
    let v = uapi_json(SAMPLE_TRACE).unwrap();
    assert_eq!(v["root_uapi"], 4);
    assert_eq!(v["api_interactions"], 2);
    let values: Vec<u64> = v["nodes"].as_array().unwrap().iter().map(|n| n["uapi"].as_u64().unwrap()).collect();
    assert_eq!(values, [4, 2, 1, 0, 1, 0]);
    assert_eq!(v["nodes"][5]["role"], "Pruned");
}

#[test]
fn bad_trace_is_an_error() {
    assert!(uapi_json("#trace v1;a.B::c;0\nE;1;0;a;B;c\n").is_err());
    assert!(uapi_json("hello").is_err());
}

#[test]
fn curves_are_cdfs() {
    let v = distributions_json(3, 20.0, 6.0, 31).unwrap();
    let cdf: Vec<f64> = v["ptukey"].as_array().unwrap().iter().map(|p| p[1].as_f64().unwrap()).collect();
    assert_eq!(cdf.len(), 31);
    assert_eq!(cdf[0], 0.0);
    assert!(cdf.windows(2).all(|w| w[1] >= w[0]));
    assert!(cdf[30] > 0.99);
    let tail = &v["f_upper_tail"];
    assert_eq!(tail[0][1], 1.0);
    assert!(distributions_json(3, 20.0, 6.0, 1).is_err());
    assert!(distributions_json(1, 20.0, 6.0, 10).is_err());
    assert!(distributions_json(3, f64::INFINITY, 6.0, 10).is_ok());
}

#[test]
fn default_spec_simulation_finds_the_shifted_revision() {
    let v = simulate_json(DEFAULT_SPEC, 0.05).unwrap();
    assert_eq!(v["executions"], 250);
    assert_eq!(v["proxy_vs_energy"]["accuracy"], 1.0);
    let truth = v["truth"].as_array().unwrap();
    let pairs = v["metrics"]["ruapi"]["pairs"].as_array().unwrap();
    assert_eq!(pairs.len(), truth.len());
    for (p, t) in pairs.iter().zip(truth) {
        assert_eq!(p["significant"], t["api_change"]);
    }
}

#[test]
fn oversized_or_invalid_specs_are_rejected() {
    let big = DEFAULT_SPEC.replace("count = 10", "count = 1000");
    assert!(simulate_json(&big, 0.05).unwrap_err().contains("at most"));
    assert!(simulate_json("seed = 1", 0.05).is_err());
}
