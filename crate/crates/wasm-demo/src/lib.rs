//! wasm-bindgen exports for the static page in `www/`.
//!
//! Every export takes and returns JSON strings so the page needs no glue
//! beyond `JSON.parse`.

use std::sync::Arc;

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use freegeo::free_space::{free_norm, is_gateaux};
use freegeo::gallery::{gallery, GalleryItem, Params};
use freegeo::io::{parse_element, parse_space, space_to_json};
use freegeo::pair_geometry::analyze_pair;
use freegeo::ssd::exposedness_probe;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Space JSON for a gallery item, e.g. `("branching_tree", "{\"n\": 5}")`.
pub fn gallery_space(name: &str, params_json: &str) -> Result<String, String> {
    let params: Params = if params_json.trim().is_empty() {
        Params::new()
    } else {
        serde_json::from_str(params_json).map_err(err)?
    };
    match gallery(name, &params).map_err(err)? {
        GalleryItem::Space(s) => Ok(space_to_json(&s)),
        GalleryItem::Family(_) => Err(format!("`{name}` is a family; add an `index` parameter")),
    }
}

/// Norm, optimal flow and a norming function of an element.
pub fn norm_report(space_json: &str, element_json: &str) -> Result<String, String> {
    let space = Arc::new(parse_space(space_json).map_err(err)?);
    let mu = parse_element(element_json, &space).map_err(err)?.element();
    let r = free_norm(&mu).map_err(err)?;
    let gateaux = if mu.is_zero() {
        None
    } else {
        Some(is_gateaux(&mu, 1e-7).map_err(err)?)
    };
    let flow: Vec<Value> = r.flow.iter().map(|&(p, q, w)| json!([p, q, w])).collect();
    Ok(json!({
        "value": r.value,
        "gap": (r.flow_value - r.lip_value).abs(),
        "flow": flow,
        "functional": r.functional.values(),
        "gateaux": gateaux,
    })
    .to_string())
}

/// `eta` for every pair as a symmetric matrix (`null` on the diagonal and
/// for pairs with no third point), plus the labels.
#[allow(clippy::needless_range_loop)]
pub fn pair_heatmap(space_json: &str) -> Result<String, String> {
    let space = parse_space(space_json).map_err(err)?;
    let n = space.len();
    let mut eta = vec![vec![Value::Null; n]; n];
    for x in 0..n {
        for y in x + 1..n {
            let r = analyze_pair(&space, x, y).map_err(err)?;
            let v = json!(r.eta);
            eta[x][y] = v.clone();
            eta[y][x] = v;
        }
    }
    let labels: Vec<String> = (0..n).map(|i| space.label(i)).collect();
    Ok(json!({ "labels": labels, "eta": eta }).to_string())
}

/// Sampled exposedness curve of `D(mu)` over the given slab depths.
pub fn modulus_curve(
    space_json: &str,
    element_json: &str,
    eta_grid: &[f64],
    samples: usize,
    seed: u64,
) -> Result<String, String> {
    let space = Arc::new(parse_space(space_json).map_err(err)?);
    let mu = parse_element(element_json, &space).map_err(err)?.element();
    let curve = exposedness_probe(&mu, eta_grid, samples, seed).map_err(err)?;
    serde_json::to_string(&curve).map_err(err)
}

#[wasm_bindgen(js_name = gallerySpace)]
pub fn gallery_space_js(name: &str, params_json: &str) -> Result<String, JsError> {
    gallery_space(name, params_json).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = normReport)]
pub fn norm_report_js(space_json: &str, element_json: &str) -> Result<String, JsError> {
    norm_report(space_json, element_json).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = pairHeatmap)]
#[allow(clippy::needless_range_loop)]
pub fn pair_heatmap_js(space_json: &str) -> Result<String, JsError> {
    pair_heatmap(space_json).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = modulusCurve)]
pub fn modulus_curve_js(
    space_json: &str,
    element_json: &str,
    eta_grid: Vec<f64>,
    samples: usize,
    seed: u64,
) -> Result<String, JsError> {
    modulus_curve(space_json, element_json, &eta_grid, samples, seed).map_err(|e| JsError::new(&e))
}
