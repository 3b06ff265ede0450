//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Each exported function returns a flat `Float64Array`; the layouts are
//! documented per function. The pure-Rust counterparts in [`demo`] carry the
//! logic and are what the native tests exercise.

use wasm_bindgen::prelude::*;

pub mod demo;

fn js(e: String) -> JsError {
    JsError::new(&e)
}

/// `[ω₀ (MeV), ν₀ (MHz), δ (MeV), b, γ (MeV), W (1/s), 1/W (s), shift (MeV)]`.
#[wasm_bindgen]
pub fn rates(hz_oe: f64, h1_oe: f64, delta_per_m: f64) -> Result<Vec<f64>, JsError> {
    demo::Inputs::new(hz_oe, h1_oe, delta_per_m).and_then(|i| i.rates()).map_err(js)
}

/// `points` times (s), then the Markovian column, then the non-Markovian column.
#[wasm_bindgen]
pub fn evolution(hz_oe: f64, h1_oe: f64, delta_per_m: f64, relaxation_times: f64, points: usize) -> Result<Vec<f64>, JsError> {
    demo::Inputs::new(hz_oe, h1_oe, delta_per_m)
        .and_then(|i| i.evolution(relaxation_times, points))
        .map(demo::Columns::flatten)
        .map_err(js)
}

/// Non-Markovian term over the first `periods` Larmor periods: times (s) then values.
#[wasm_bindgen]
pub fn larmor_window(hz_oe: f64, h1_oe: f64, delta_per_m: f64, periods: f64, points: usize) -> Result<Vec<f64>, JsError> {
    demo::Inputs::new(hz_oe, h1_oe, delta_per_m)
        .and_then(|i| i.larmor_window(periods, points))
        .map(demo::Columns::flatten)
        .map_err(js)
}
