//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Each export takes the algebra parameters explicitly and returns plain text;
//! errors surface as JavaScript exceptions carrying the message.

use qdist::algebra::{Algebra, AlgebraParams};
use qdist::expr::{eval, parse_for};
use qdist::format::element_text;
use qdist::rep::{character, simple, steinberg_intertwiner};
use wasm_bindgen::prelude::*;

/// Largest tensor module the Steinberg check may build in the browser.
const STEINBERG_CAP: usize = 5_000;

fn params(ell: u32, level: u32) -> Result<AlgebraParams, String> {
    AlgebraParams::new(ell, level, 1).map_err(|e| e.to_string())
}

pub fn normal_form_text(ell: u32, level: u32, expr: &str) -> Result<String, String> {
    let params = params(ell, level)?;
    let alg = Algebra::new(params).map_err(|e| e.to_string())?;
    let e = parse_for(expr, &params).map_err(|e| e.to_string())?;
    let x = eval(&e, &alg).map_err(|e| e.to_string())?;
    Ok(element_text(&x))
}

pub fn simple_module_text(ell: u32, level: u32, p: u64) -> Result<String, String> {
    let rep = simple(params(ell, level)?, p).map_err(|e| e.to_string())?;
    let mut out = format!("dim L({p}) = {}\n\nweight  multiplicity\n", rep.dim());
    for (w, m) in character(&rep).map_err(|e| e.to_string())? {
        out.push_str(&format!("{:<8}{m}\n", w.to_string()));
    }
    Ok(out)
}

pub fn steinberg_text(ell: u32, level: u32, p: u64) -> Result<String, String> {
    let r = steinberg_intertwiner(params(ell, level)?, p, STEINBERG_CAP).map_err(|e| e.to_string())?;
    let mut out = format!(
        "L({p}) → L({}) ⊗ L({})\n{} ({} = {}×{})\n",
        r.top_digit,
        r.low_part,
        if r.passed() { "PASS" } else { "FAIL" },
        r.dim_simple,
        r.dim_first,
        r.dim_second
    );
    for f in &r.failures {
        out.push_str(f);
        out.push('\n');
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn normal_form(ell: u32, level: u32, expr: &str) -> Result<String, JsError> {
    normal_form_text(ell, level, expr).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn simple_module(ell: u32, level: u32, p: u32) -> Result<String, JsError> {
    simple_module_text(ell, level, p as u64).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn steinberg(ell: u32, level: u32, p: u32) -> Result<String, JsError> {
    steinberg_text(ell, level, p as u64).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exports_render() {
        assert_eq!(normal_form_text(3, 0, "E(2)*E(1)").unwrap(), "0");
        assert!(simple_module_text(3, 1, 5).unwrap().starts_with("dim L(5) = 6"));
        assert!(steinberg_text(3, 1, 5).unwrap().contains("PASS (6 = 2×3)"));
        assert_eq!(normal_form_text(3, 1, "E[2]").unwrap_err(), "index 2 exceeds level 1");
    }
}
