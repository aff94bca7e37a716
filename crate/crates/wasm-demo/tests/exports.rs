use freegeo_wasm::{gallery_space, modulus_curve, norm_report, pair_heatmap};
use serde_json::Value;

fn parse(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn norm_of_two_leaves() {
    let space = gallery_space("branching_tree", r#"{"n": 3}"#).unwrap();
    let r = parse(&norm_report(&space, r#"{"masses": [0, 1, -1, 0]}"#).unwrap());
    assert!((r["value"].as_f64().unwrap() - 2.0).abs() < 1e-9);
    assert!(r["gap"].as_f64().unwrap() < 1e-9);
}

#[test]
#[allow(clippy::needless_range_loop)]
fn heatmap_is_symmetric_with_null_diagonal() {
    let space = gallery_space("three_point_aligned", "").unwrap();
    let r = parse(&pair_heatmap(&space).unwrap());
    let eta = r["eta"].as_array().unwrap();
    assert_eq!(eta.len(), 3);
    for i in 0..3 {
        assert!(eta[i][i].is_null());
        for j in 0..3 {
            assert_eq!(eta[i][j], eta[j][i]);
        }
    }
    // the outer points -1 and 1 are aligned through the base
    assert_eq!(eta[1][2].as_f64().unwrap(), 0.0);
}

#[test]
fn curve_is_reproducible() {
    let space = gallery_space("line", r#"{"n": 4}"#).unwrap();
    let e = r#"{"molecules": [[0.5, 1, 0], [0.5, 3, 2]]}"#;
    let a = modulus_curve(&space, e, &[0.01, 0.1], 8, 3).unwrap();
    assert_eq!(a, modulus_curve(&space, e, &[0.01, 0.1], 8, 3).unwrap());
}

#[test]
fn bad_input_is_an_error() {
    assert!(gallery_space("petr", "").is_err());
    assert!(norm_report("{", "{}").is_err());
}
