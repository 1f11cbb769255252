//! Browser bindings for the static page in `www/`.
//!
//! Every export returns a JSON string. The `*_json` functions hold the logic
//! and run natively too; the `#[wasm_bindgen]` wrappers only convert errors.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use realquad::arith::{fundamental_discriminant, Radicand, SetTag};
use realquad::classnum::{analyze, AnalyticParams};
use realquad::heuristic::constants::p0_zeta_form;
use realquad::heuristic::{
    euler_product_eval, format_rational, lambda, nested_identity_eval, ProductForm, DEFAULT_ZETA_TERMS,
};

/// Largest radicand a browser scan accepts; everything runs on the UI thread.
pub const SCAN_LIMIT: u64 = 50_000;
const SHOWN_RECORDS: usize = 200;

/// `lambda_q` with its prime-power factors.
pub fn lambda_json(q: u64) -> Result<String, String> {
    let v = lambda(q).map_err(|e| e.to_string())?;
    let factors: Vec<Value> = v
        .factor_trace
        .iter()
        .map(|f| json!({ "p": f.prime, "e": f.exponent, "value": format_rational(&f.value) }))
        .collect();
    Ok(json!({
        "q": q,
        "value": format_rational(&v.value),
        "approx": v.to_f64(),
        "inverse": v.value.recip().to_integer().to_string(),
        "integral_inverse": v.value.recip().is_integer(),
        "factors": factors,
    })
    .to_string())
}

/// Nested side at depths `1..=max_depth` against the product to `kmax` factors.
pub fn identity_json(p: u64, max_depth: u32, kmax: u32) -> Result<String, String> {
    if max_depth == 0 || max_depth > 200 {
        return Err("depth must be between 1 and 200".into());
    }
    let product = euler_product_eval(p, 1, kmax, ProductForm::Inverted).map_err(|e| e.to_string())?;
    let mut points = Vec::new();
    for depth in 1..=max_depth {
        let nested = nested_identity_eval(p, depth).map_err(|e| e.to_string())?;
        let diff = (nested.clone() - product.clone()).abs().to_f64();
        points.push(json!({ "depth": depth, "nested": nested.to_decimal(30), "difference": diff }));
    }
    Ok(json!({ "p": p, "kmax": kmax, "product": product.to_decimal(30), "points": points }).to_string())
}

/// Class numbers for the radicands of `set` ("P" or "A") up to `limit`,
/// with the running estimate of `P(h = 1)`.
pub fn scan_json(set: &str, limit: u64, step: u64) -> Result<String, String> {
    let set_tag = SetTag::from_code(set).ok_or_else(|| format!("unknown set {set:?}, use P or A"))?;
    if !(2..=SCAN_LIMIT).contains(&limit) {
        return Err(format!("limit must be between 2 and {SCAN_LIMIT}"));
    }
    let step = step.max(1);
    let params = AnalyticParams::default();
    let mut records = Vec::new();
    let mut counts = std::collections::BTreeMap::<u64, u64>::new();
    let mut series = Vec::new();
    let mut max_distance: f64 = 0.0;
    for (i, d) in set_tag.members(2, limit).into_iter().enumerate() {
        let radicand = Radicand::new(d, set_tag).map_err(|e| e.to_string())?;
        let r = analyze(fundamental_discriminant(radicand), &params).map_err(|e| e.to_string())?;
        max_distance = max_distance.max(r.distance);
        *counts.entry(r.record.h).or_default() += 1;
        let x = i as u64 + 1;
        if x.is_multiple_of(step) {
            series.push(json!([x, counts.get(&1).copied().unwrap_or(0) as f64 / x as f64]));
        }
        if records.len() < SHOWN_RECORDS {
            let f = r.record;
            records.push(json!({
                "d": f.d, "D": f.disc, "h": f.h, "regulator": f.regulator,
                "period": f.period_length, "norm": f.unit_norm,
            }));
        }
    }
    let total: u64 = counts.values().sum();
    let counts: Vec<Value> = counts.iter().map(|(h, c)| json!([h, c])).collect();
    Ok(json!({
        "set": set_tag.code(),
        "limit": limit,
        "total": total,
        "counts": counts,
        "series": series,
        "records": records,
        "max_distance": max_distance,
        "p0": p0_zeta_form(DEFAULT_ZETA_TERMS).to_f64(),
    })
    .to_string())
}

#[wasm_bindgen(js_name = lambdaInfo)]
pub fn lambda_info(q: u32) -> Result<String, JsError> {
    lambda_json(q.into()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = identitySeries)]
pub fn identity_series(p: u32, max_depth: u32, kmax: u32) -> Result<String, JsError> {
    identity_json(p.into(), max_depth, kmax).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = classNumberScan)]
pub fn class_number_scan(set: &str, limit: u32, step: u32) -> Result<String, JsError> {
    scan_json(set, limit.into(), step.into()).map_err(|e| JsError::new(&e))
}
