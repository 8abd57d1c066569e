//! Browser bindings for three small demonstrations: the excitation table of a
//! square pulse, the number-generating function of a driven oscillator, and
//! a one-dimensional transmission sweep. Every export returns a JSON string.

use actionlab_core::amplitudes::transition_probabilities_with;
use actionlab_core::keldysh::{number_generator, InitialState};
use actionlab_core::signal::{ComplexSignal, Quadrature, TimeGrid};
use actionlab_core::source::scattering::{Incidence, PotentialSpec};
use actionlab_core::source::transfer::transfer_coefficients;
use actionlab_core::Complex64;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

const PULSE_INTERVALS: usize = 2000;
const MAX_POINTS: usize = 5000;

fn check_points(n: usize) -> Result<(), String> {
    if !(2..=MAX_POINTS).contains(&n) {
        Err(format!("point count must lie in [2, {MAX_POINTS}], got {n}"))
    } else {
        Ok(())
    }
}

/// Square pulse of height `amplitude` on `[0, duration]` driving an oscillator of frequency `omega`.
pub fn square_pulse_table(amplitude: f64, duration: f64, omega: f64, n_max: usize) -> Result<Value, String> {
    if n_max > 200 {
        return Err("n_max must not exceed 200".into());
    }
    let grid = TimeGrid::spanning(0.0, duration, PULSE_INTERVALS).map_err(|e| e.to_string())?;
    let k = ComplexSignal::square(grid, Complex64::new(amplitude, 0.0), 0.0, duration).map_err(|e| e.to_string())?;
    let t = transition_probabilities_with(&k, omega, n_max, Quadrature::Simpson).map_err(|e| e.to_string())?;
    Ok(json!({
        "gamma_sq": t.gamma_sq,
        "persistence": [t.persistence.re, t.persistence.im],
        "probabilities": t.probabilities,
        "mean": t.mean(),
        "tail_mass": t.tail_mass,
    }))
}

/// `⟨e^{-iθ(N_final - N_initial)}⟩` on `points` angles in `[0, 2π]`; `beta <= 0` means a vacuum start.
pub fn generator_curve(gamma_sq: f64, omega: f64, beta: f64, points: usize) -> Result<Value, String> {
    check_points(points)?;
    let initial = if beta > 0.0 {
        InitialState::Thermal { beta }
    } else {
        InitialState::Vacuum
    };
    let mut theta = Vec::with_capacity(points);
    let mut re = Vec::with_capacity(points);
    let mut im = Vec::with_capacity(points);
    for j in 0..points {
        let th = 2.0 * std::f64::consts::PI * j as f64 / (points - 1) as f64;
        let z = number_generator(gamma_sq, omega, &initial, th).map_err(|e| e.to_string())?;
        theta.push(th);
        re.push(z.re);
        im.push(z.im);
    }
    Ok(json!({ "theta": theta, "re": re, "im": im }))
}

/// `|t|²` and `|r|²` against energy for a delta barrier (`strength`) or a
/// square well of the given depth and width.
pub fn transmission_sweep(
    kind: &str,
    strength: f64,
    width: f64,
    mass: f64,
    e_min: f64,
    e_max: f64,
    points: usize,
) -> Result<Value, String> {
    check_points(points)?;
    if !(e_min > 0.0 && e_max > e_min) {
        return Err("energies must satisfy 0 < e_min < e_max".into());
    }
    let v = match kind {
        "delta" => PotentialSpec::Delta {
            strength,
            position: 0.0,
        },
        "square_well" => PotentialSpec::SquareWell {
            depth: strength,
            width,
            center: 0.0,
        },
        other => return Err(format!("unknown potential '{other}'")),
    };
    let mut energy = Vec::with_capacity(points);
    let mut trans = Vec::with_capacity(points);
    let mut refl = Vec::with_capacity(points);
    for j in 0..points {
        let e = e_min + (e_max - e_min) * j as f64 / (points - 1) as f64;
        let (r, t) = transfer_coefficients(&v, e, mass, Incidence::Left).map_err(|e| e.to_string())?;
        energy.push(e);
        trans.push(t.norm_sqr());
        refl.push(r.norm_sqr());
    }
    Ok(json!({ "energy": energy, "transmission": trans, "reflection": refl }))
}

fn export(v: Result<Value, String>) -> Result<String, JsValue> {
    v.map(|x| x.to_string()).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = squarePulseTable)]
pub fn square_pulse_table_js(amplitude: f64, duration: f64, omega: f64, n_max: usize) -> Result<String, JsValue> {
    export(square_pulse_table(amplitude, duration, omega, n_max))
}

#[wasm_bindgen(js_name = generatorCurve)]
pub fn generator_curve_js(gamma_sq: f64, omega: f64, beta: f64, points: usize) -> Result<String, JsValue> {
    export(generator_curve(gamma_sq, omega, beta, points))
}

#[wasm_bindgen(js_name = transmissionSweep)]
pub fn transmission_sweep_js(
    kind: &str,
    strength: f64,
    width: f64,
    mass: f64,
    e_min: f64,
    e_max: f64,
    points: usize,
) -> Result<String, JsValue> {
    export(transmission_sweep(kind, strength, width, mass, e_min, e_max, points))
}
