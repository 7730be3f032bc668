use portfolio_admm_wasm::{
    frontier_json, race_json, sample_market_csv, solve_json, summary_json, DEMO_MAX_ITER,
};
use serde_json::Value;

fn market() -> String {
    sample_market_csv(6, 120, 4, None).unwrap()
}

fn parsed(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

fn midpoint(csv: &str) -> f64 {
    let s = parsed(&summary_json(csv).unwrap());
    0.5 * (s["mean_min"].as_f64().unwrap() + s["mean_max"].as_f64().unwrap())
}

#[test]
fn sample_market_is_deterministic() {
    assert_eq!(market(), market());
    let ill = sample_market_csv(5, 80, 1, Some(1e4)).unwrap();
    assert_eq!(ill.lines().count(), 81);
    assert!(sample_market_csv(1, 80, 1, None).is_err());
}

#[test]
fn summary_reports_shape() {
    let s = parsed(&summary_json(&market()).unwrap());
    assert_eq!(s["assets"], 6);
    assert_eq!(s["periods"], 120);
    assert_eq!(s["names"].as_array().unwrap().len(), 6);
}

#[test]
fn solve_meets_the_budget() {
    let csv = market();
    let v = parsed(&solve_json(&csv, midpoint(&csv), "rbb", None, true).unwrap());
    assert_eq!(v["termination"], "converged");
    let w: Vec<f64> = v["weights"].as_array().unwrap().iter().map(|w| w.as_f64().unwrap()).collect();
    assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-6);
    assert!(w.iter().all(|&x| x >= -1e-6));
}

#[test]
fn bad_inputs_are_messages() {
    let csv = market();
    assert!(solve_json(&csv, 0.01, "newton", None, false).unwrap_err().contains("newton"));
    assert!(solve_json("A,B\n0.1\n", 0.01, "rbb", None, false).is_err());
    assert!(solve_json(&csv, 1.0, "rbb", None, false).is_err());
    assert!(frontier_json(&csv, 1, "rbb", false).is_err());
}

#[test]
fn frontier_spans_the_mean_range() {
    let csv = market();
    let pts = parsed(&frontier_json(&csv, 5, "bb", false).unwrap());
    let pts = pts.as_array().unwrap();
    assert_eq!(pts.len(), 5);
    let e: Vec<f64> = pts.iter().map(|p| p["target_return"].as_f64().unwrap()).collect();
    assert!(e.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn race_covers_every_strategy() {
    let csv = market();
    let lanes = parsed(&race_json(&csv, midpoint(&csv)).unwrap());
    let lanes = lanes.as_array().unwrap();
    let names: Vec<&str> = lanes.iter().map(|l| l["strategy"].as_str().unwrap()).collect();
    assert_eq!(names, ["fixed", "rb", "bb", "rbb"]);
    for lane in lanes {
        let its = lane["iterations"].as_u64().unwrap() as usize;
        assert!(its <= DEMO_MAX_ITER);
        assert_eq!(lane["r_norm"].as_array().unwrap().len(), its);
        assert_eq!(lane["rho"].as_array().unwrap().len(), its);
    }
}
