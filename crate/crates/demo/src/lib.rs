//! Browser bindings. Each entry point takes strings from the page and
//! returns a JSON document, or an error message.

use normrel::coset::{canonicalize as canon, PGCosetFunction};
use normrel::padic::{is_prime, parse_q, GElement, Mat2};
use normrel::report::{hecke_json, parse_coset, parse_hecke, parse_satake, volume_table};
use normrel::whittaker::{lambda_closed_form, lambda_value};
use serde_json::json;
use wasm_bindgen::prelude::*;

type Out = Result<String, String>;

fn prime(p: u32) -> Result<u64, String> {
    let p = u64::from(p);
    if is_prime(p) {
        Ok(p)
    } else {
        Err(format!("{p} is not prime"))
    }
}

/// Eight whitespace- or comma-separated rationals `a1 b1 c1 d1 a2 b2 c2 d2`.
pub fn canonicalize_text(p: u32, entries: &str) -> Out {
    let p = prime(p)?;
    let v = entries
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(parse_q)
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    if v.len() != 8 {
        return Err(format!("expected 8 entries, got {}", v.len()));
    }
    let m1 = Mat2::new(v[0].clone(), v[1].clone(), v[2].clone(), v[3].clone());
    let m2 = Mat2::new(v[4].clone(), v[5].clone(), v[6].clone(), v[7].clone());
    if !m1.is_invertible() || !m2.is_invertible() {
        return Err("singular matrix".into());
    }
    let x = canon(p, &GElement::new(m1, m2));
    Ok(json!({ "coset": x.to_string(), "r0": x.r0, "r1": x.r1, "m": x.m, "n": x.n }).to_string())
}

/// `Λ(ch x)` at the Satake data, its closed form in `X = p^{-s}`, and `Θ`
/// of an optional Hecke expression.
pub fn lambda_text(p: u32, coset: &str, satake: &str, hecke: &str) -> Out {
    let p = prime(p)?;
    let x = parse_coset(coset).map_err(|e| e.to_string())?;
    let sat = parse_satake(p, satake).map_err(|e| e.to_string())?;
    let value = lambda_value(&PGCosetFunction::indicator(p, x), &sat).map_err(|e| e.to_string())?;
    let closed = lambda_closed_form(&x, &sat);
    let mut out = json!({
        "coset": x.to_string(),
        "lambda": value.to_string(),
        "numer": closed.numer.coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        "numer_low": closed.numer.low,
        "denom": closed.denom.coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
    });
    if !hecke.trim().is_empty() {
        let h = parse_hecke(p, hecke).map_err(|e| e.to_string())?;
        out["hecke"] = hecke_json(&h);
        out["theta"] = json!(h.theta_eval(&sat).to_string());
    }
    Ok(out.to_string())
}

/// Cap volumes, closed form beside enumeration, for `|m|, n <= range`.
pub fn volumes_text(p: u32, range: u32) -> Out {
    let p = prime(p)?;
    if range > 4 {
        return Err("range is capped at 4".into());
    }
    let (checks, table) = volume_table(p, i64::from(range));
    Ok(json!({ "all_match": checks.iter().all(|c| c.ok), "rows": table }).to_string())
}

#[wasm_bindgen]
pub fn canonicalize(p: u32, entries: &str) -> Result<String, JsError> {
    canonicalize_text(p, entries).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn lambda(p: u32, coset: &str, satake: &str, hecke: &str) -> Result<String, JsError> {
    lambda_text(p, coset, satake, hecke).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn volumes(p: u32, range: u32) -> Result<String, JsError> {
    volumes_text(p, range).map_err(|e| JsError::new(&e))
}
