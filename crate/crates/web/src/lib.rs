//! wasm-bindgen bindings for the browser demo. Every export returns a JSON string.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;
use z3tc::analysis::{energy_density, logical_values};
use z3tc::encoder::{compile, CompileOptions, MeasureBasis};
use z3tc::toric::{default_ground_state, preset, Experiment, TorusLattice, PRESETS};

fn to_js(r: z3tc::Result<Value>) -> Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e.to_string()))
}

/// Noiseless ground state on an lx×ly torus: plaquette projectors, energy density and logical strings.
pub fn ground_state(lx: usize, ly: usize) -> z3tc::Result<Value> {
    let lattice = TorusLattice::new(lx, ly)?;
    let mut e = Experiment::new(lattice.clone())?;
    e.prepare()?;
    e.snapshot("ground")?;
    let frames = e.run_noiseless(0)?;
    let energy = energy_density(&frames[0].snapshots, &lattice)?;
    let logical = logical_values(&lattice, e.state()?)?;
    Ok(json!({
        "lx": lx,
        "ly": ly,
        "energy_density": energy,
        "logical": serde_json::to_value(logical)?,
        "snapshots": serde_json::to_value(&frames[0].snapshots)?,
    }))
}

/// Steps of a named defect braid with the anyons present after each.
pub fn braid_frames(name: &str) -> z3tc::Result<Value> {
    let script = preset(name)?;
    let frames = Experiment::from_script(&script)?.run_noiseless(0)?;
    let steps: Vec<Value> = frames
        .iter()
        .map(|f| {
            let anyons: Vec<Value> =
                f.anyons(3).into_iter().map(|(label, s)| json!({ "label": label, "species": s })).collect();
            json!({ "step": f.step, "anyons": anyons, "snapshots": f.snapshots })
        })
        .collect();
    Ok(json!({ "name": name, "lx": script.lx, "ly": script.ly, "steps": steps }))
}

/// Native gate counts for the ground-state preparation, measured in `basis` ("z", "x" or "none").
pub fn compile_counts(lx: usize, ly: usize, basis: &str) -> z3tc::Result<Value> {
    let final_measure = match basis {
        "z" => Some(MeasureBasis::Z),
        "x" => Some(MeasureBasis::X),
        "none" => None,
        _ => return Err(z3tc::Error::InvalidArgument(format!("basis {basis}; expected z, x or none"))),
    };
    let circuit = default_ground_state(&TorusLattice::new(lx, ly)?)?;
    let out = compile(&circuit, &CompileOptions { final_measure, ..CompileOptions::default() })?;
    Ok(serde_json::to_value(&out.report)?)
}

#[wasm_bindgen(js_name = groundState)]
pub fn ground_state_js(lx: usize, ly: usize) -> Result<String, JsError> {
    to_js(ground_state(lx, ly))
}

#[wasm_bindgen(js_name = braidFrames)]
pub fn braid_frames_js(name: &str) -> Result<String, JsError> {
    to_js(braid_frames(name))
}

#[wasm_bindgen(js_name = compileCounts)]
pub fn compile_counts_js(lx: usize, ly: usize, basis: &str) -> Result<String, JsError> {
    to_js(compile_counts(lx, ly, basis))
}

#[wasm_bindgen(js_name = braidPresets)]
pub fn braid_presets() -> String {
    json!(PRESETS).to_string()
}
