//! wasm-bindgen exports for the single-page demo in `www/`.
//!
//! Every export takes primitives and returns a flat `Vec<f64>` (a
//! `Float64Array` in JavaScript). The plain functions below the exports do
//! the work and are what the native tests call.

use qcollide::engine::{named_initial, run_trajectory, CollisionPolicy};
use qcollide::markov::{build_m, decay_rate, predict_purity, weights_from_state};
use qcollide::observables::Observable;
use qcollide::stats::{
    histogram, random_state_oracle, run_ensemble, run_final_records, time_average,
    EnsembleConfig,
};
use qcollide::{Sampler, Seed};
use wasm_bindgen::prelude::*;

/// Browser-side limits so that a click never locks the tab for long.
pub const MAX_STEPS: u32 = 100_000;
pub const MAX_TRAJECTORIES: u32 = 20_000;

fn sampler(name: &str) -> Result<Sampler, String> {
    name.parse().map_err(|e: qcollide::Error| e.to_string())
}

fn check(steps: u32, trajectories: u32) -> Result<(), String> {
    if steps > MAX_STEPS {
        return Err(format!("at most {MAX_STEPS} steps in the browser"));
    }
    if trajectories > MAX_TRAJECTORIES {
        return Err(format!("at most {MAX_TRAJECTORIES} trajectories in the browser"));
    }
    Ok(())
}

/// `[P(0..=steps), P_TA(0..=steps)]` for one trajectory.
pub fn purity_curve(seed: u32, steps: u32, initial: &str, sampler_name: &str) -> Result<Vec<f64>, String> {
    check(steps, 0)?;
    let init = named_initial(initial).map_err(|e| e.to_string())?;
    let tr = run_trajectory(
        &init,
        initial,
        &CollisionPolicy::Random,
        steps as usize,
        sampler(sampler_name)?,
        Seed(seed as u64),
        0,
    )
    .map_err(|e| e.to_string())?;
    let p: Vec<f64> = tr.records.iter().map(|r| r.purity).collect();
    let ta = time_average(&p).map_err(|e| e.to_string())?;
    Ok(p.iter().chain(ta.iter()).copied().collect())
}

/// `[mean(0..=steps), std_error(0..=steps), markov(0..=steps)]` for the
/// ensemble purity and the exact chain prediction.
pub fn ensemble_vs_markov(
    seed: u32,
    trajectories: u32,
    steps: u32,
    initial: &str,
    sampler_name: &str,
) -> Result<Vec<f64>, String> {
    check(steps, trajectories)?;
    let init = named_initial(initial).map_err(|e| e.to_string())?;
    let cfg = EnsembleConfig::new(Seed(seed as u64), trajectories as usize, steps as usize, init)
        .with_sampler(sampler(sampler_name)?);
    let s = run_ensemble(&cfg)
        .and_then(|e| e.summary(Observable::Purity))
        .map_err(|e| e.to_string())?;
    let pred = predict_purity(&build_m(), &weights_from_state(&init), steps as usize).map_err(|e| e.to_string())?;
    Ok(s.mean.iter().chain(s.std_error.iter()).chain(pred.iter()).copied().collect())
}

/// `[counts(bins), oracle_counts_rescaled(bins), mean, std]` of the
/// three-tangle after `steps` collisions, with the random-state reference
/// rescaled to the same total.
pub fn three_tangle_hist(
    seed: u32,
    trajectories: u32,
    steps: u32,
    initial: &str,
    bins: u32,
    oracle_samples: u32,
) -> Result<Vec<f64>, String> {
    check(steps, trajectories)?;
    let init = named_initial(initial).map_err(|e| e.to_string())?;
    let cfg = EnsembleConfig::new(Seed(seed as u64), trajectories as usize, steps as usize, init);
    let xs: Vec<f64> = run_final_records(&cfg)
        .map_err(|e| e.to_string())?
        .iter()
        .map(|r| r.three_tangle)
        .collect();
    let oracle = random_state_oracle(oracle_samples as usize, Seed(seed as u64), 1).map_err(|e| e.to_string())?;
    let h = histogram(&xs, bins as usize, (0.0, 1.0)).map_err(|e| e.to_string())?;
    let ho = histogram(&oracle.samples(Observable::ThreeTangle), bins as usize, (0.0, 1.0))
        .map_err(|e| e.to_string())?;
    let scale = h.total() as f64 / ho.total() as f64;
    let mut out: Vec<f64> = h.counts.iter().map(|&c| c as f64).collect();
    out.extend(ho.counts.iter().map(|&c| c as f64 * scale));
    out.push(h.mean);
    out.push(h.std);
    Ok(out)
}

#[wasm_bindgen(js_name = purityCurve)]
pub fn purity_curve_js(seed: u32, steps: u32, initial: &str, sampler: &str) -> Result<Vec<f64>, JsError> {
    purity_curve(seed, steps, initial, sampler).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = ensembleVsMarkov)]
pub fn ensemble_vs_markov_js(
    seed: u32,
    trajectories: u32,
    steps: u32,
    initial: &str,
    sampler: &str,
) -> Result<Vec<f64>, JsError> {
    ensemble_vs_markov(seed, trajectories, steps, initial, sampler).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = threeTangleHist)]
pub fn three_tangle_hist_js(
    seed: u32,
    trajectories: u32,
    steps: u32,
    initial: &str,
    bins: u32,
    oracle_samples: u32,
) -> Result<Vec<f64>, JsError> {
    three_tangle_hist(seed, trajectories, steps, initial, bins, oracle_samples).map_err(|e| JsError::new(&e))
}

/// `−ln(1−Δ)` of the Pauli-weight chain.
#[wasm_bindgen(js_name = markovRate)]
pub fn markov_rate() -> f64 {
    decay_rate(&build_m()).unwrap_or(f64::NAN)
}
