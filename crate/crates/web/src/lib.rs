//! WebAssembly bindings for the browser demo. Results are returned as JSON
//! strings so the page needs no generated type glue beyond `wasm-bindgen`.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use srgeo::extremal::{integrate, ExtremalState};
use srgeo::legendre::{leaf_chart_flat, leaf_chart_numeric, project_pi, project_pi_prime};
use srgeo::metric::{frame_from_metric, MetricChart, OrthonormalFrame};
use srgeo::pendulum::{pendulum_energy, reduce, FlatPendulum, Regime};
use srgeo::singularity::{classify_pair, detect_events, NormalFormClass, Projection};

fn frame(metric: &str) -> Result<OrthonormalFrame, JsError> {
    Ok(frame_from_metric(&MetricChart::builtin(metric)?))
}

fn state(s: &[f64]) -> Result<ExtremalState, JsError> {
    let a: [f64; 6] = s.try_into().map_err(|_| JsError::new("state needs six numbers"))?;
    Ok(ExtremalState::from_array(a))
}

#[derive(Serialize)]
struct Event {
    t: f64,
    projection: String,
    class: String,
    pair: String,
    pi: [f64; 2],
    /// Unit left normal of the contact element, for the cusp tick.
    tick: Option<[f64; 2]>,
    leaf: Option<[f64; 2]>,
}

#[derive(Serialize)]
struct Front {
    pair: String,
    pi: Vec<[f64; 2]>,
    leaf: Vec<[f64; 2]>,
    events: Vec<Event>,
    domain_exit: Option<f64>,
    drift: f64,
}

/// Integrates on `[0, t1]` and returns the `pi` front, the leaf-space curve
/// and the classified events as JSON.
#[wasm_bindgen]
pub fn trace(metric: &str, s0: &[f64], t1: f64, tol: f64) -> Result<String, JsError> {
    let frame = frame(metric)?;
    let s0 = state(s0)?;
    let traj = integrate(&frame, &s0, (0.0, t1), tol)?;
    let pair = classify_pair(&frame, &s0)?;
    let events = detect_events(&traj)?;
    let leaf = if frame.chart().is_flat() { Ok(leaf_chart_flat()) } else { leaf_chart_numeric(&frame, &s0) };
    let pi = traj.sample_times(6).into_iter().filter_map(|t| traj.eval(t).ok()).map(|s| project_pi(&s)).collect();
    let leaf_curve = leaf.as_ref().map(|l| project_pi_prime(&traj, l, 6).samples.into_iter().map(|(_, p)| p).collect()).unwrap_or_default();
    let events = events
        .iter()
        .map(|e| {
            let cusp = e.projection == Projection::Pi && e.clazz == NormalFormClass::IV;
            let tick = cusp.then(|| frame.at_unchecked(e.state.x1, e.state.x2).unit(e.state.theta + std::f64::consts::FRAC_PI_2));
            Event {
                t: e.t,
                projection: e.projection.to_string(),
                class: e.clazz.to_string(),
                pair: e.pair.to_string(),
                pi: project_pi(&e.state),
                tick,
                leaf: leaf.as_ref().ok().and_then(|l| l.eval_state(&e.state).ok()),
            }
        })
        .collect();
    let front =
        Front { pair: pair.to_string(), pi, leaf: leaf_curve, events, domain_exit: traj.exited_domain(), drift: traj.hamiltonian_drift() };
    Ok(serde_json::to_string(&front)?)
}

/// Normal-form pair of the germ at a state, e.g. `(IV,III)`.
#[wasm_bindgen]
pub fn classify(metric: &str, s: &[f64]) -> Result<String, JsError> {
    Ok(classify_pair(&frame(metric)?, &state(s)?)?.to_string())
}

#[derive(Serialize)]
struct Pendulum {
    r: f64,
    rho: f64,
    energy: f64,
    regime: &'static str,
    period: Option<f64>,
}

/// Pendulum reduction of a state. The regime and period are reported for the
/// flat chart, where the reduction is exact along the whole extremal.
#[wasm_bindgen]
pub fn pendulum(metric: &str, s: &[f64]) -> Result<String, JsError> {
    let frame = frame(metric)?;
    let s = state(s)?;
    let params = reduce(&frame, &s)?;
    let energy = pendulum_energy(&s, &params);
    let (regime, period) = if frame.chart().is_flat() {
        let fp = FlatPendulum::new(&s)?;
        let name = match fp.regime {
            Regime::Degenerate => "degenerate",
            Regime::Libration => "libration",
            Regime::Rotation => "rotation",
            Regime::Separatrix => "separatrix",
        };
        (name, fp.period())
    } else {
        ("local", None)
    };
    Ok(serde_json::to_string(&Pendulum { r: params.r, rho: params.rho, energy, regime, period })?)
}
