//! Browser bindings for the finite-state predictor library.
//!
//! Three operations are exported to JavaScript, each returning a
//! pretty-printed JSON string (or a plain error message): a side-by-side
//! comparison of the full-space aggregate against the reduced network, an
//! error-complexity profile of a periodic pattern, and a step-by-step
//! network trace. All arithmetic is exact; masses and weights arrive as
//! `p/q` strings.
//!
//! The same functions are ordinary Rust functions on native targets,
//! which is how the unit tests below exercise them.

use num_rational::BigRational;
use serde_json::json;
use wasm_bindgen::prelude::*;

use fsp_core::{
    compare, parse_sequence_text, profile, Alphabet, MeanFieldNetwork, RatioSpec, Scalar, Symbol,
};

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn parse_common(
    alphabet: usize,
    lambda: &str,
    sequence: &str,
) -> Result<(Alphabet, RatioSpec, Vec<Symbol>), String> {
    let alphabet = Alphabet::new(alphabet).map_err(err)?;
    let lambda = RatioSpec::parse(lambda).map_err(err)?;
    let symbols = parse_sequence_text(sequence).map_err(err)?;
    alphabet.check_all(&symbols).map_err(err)?;
    Ok((alphabet, lambda, symbols))
}

fn finish(value: serde_json::Value) -> Result<String, String> {
    let mut text = serde_json::to_string_pretty(&value).map_err(err)?;
    text.push('\n');
    Ok(text)
}

/// Runs the full-space aggregate and the K-node network side by side on
/// one sequence and reports both mass vectors at every step, the verdict,
/// and the first point of divergence. `lambda` is a ratio like "2" or
/// "3/2"; `sequence` is symbol text like "a1a2a1".
#[wasm_bindgen]
pub fn compare_report(
    k: usize,
    alphabet: usize,
    lambda: &str,
    sequence: &str,
) -> Result<String, String> {
    let (alphabet, lambda, symbols) = parse_common(alphabet, lambda, sequence)?;
    let report = compare::<BigRational>(k, alphabet, lambda, &symbols).map_err(err)?;
    finish(report.to_json())
}

/// Profiles the best achievable asymptotic error rate of K-state machines
/// on the infinite repetition of `pattern`, for K = 1..=k_max. The
/// alphabet is the largest symbol mentioned in the pattern.
#[wasm_bindgen]
pub fn complexity_profile(pattern: &str, k_max: usize) -> Result<String, String> {
    let symbols = parse_sequence_text(pattern).map_err(err)?;
    let implied = symbols.iter().map(|&s| s + 1).max().unwrap_or(0);
    let alphabet = Alphabet::new(implied).map_err(err)?;
    let curve = profile(&symbols, alphabet, k_max).map_err(err)?;
    let points: Vec<_> = curve
        .points
        .iter()
        .map(|p| {
            json!({
                "k": p.k,
                "rate": format!("{}/{}", p.rate.numer(), p.rate.denom()),
                "rate_float": *p.rate.numer() as f64 / *p.rate.denom() as f64,
                "transient_loss": p.transient_loss,
                "witness_index": p.witness.0.to_string(),
            })
        })
        .collect();
    finish(json!({
        "pattern": alphabet.display_sequence(&symbols),
        "alphabet": alphabet.size(),
        "period": symbols.len(),
        "points": points,
    }))
}

/// Steps the reduced network over a sequence and records the complete
/// weight state (active-state vector and transition rows) plus the
/// normalized prediction scores after every observation.
#[wasm_bindgen]
pub fn network_trace(
    k: usize,
    alphabet: usize,
    lambda: &str,
    sequence: &str,
) -> Result<String, String> {
    let (alphabet, lambda, symbols) = parse_common(alphabet, lambda, sequence)?;
    let mut network =
        MeanFieldNetwork::<BigRational>::init_uniform(k, alphabet, lambda).map_err(err)?;

    let state_json = |network: &MeanFieldNetwork<BigRational>| {
        let state = network.dump();
        json!({ "w_active": state.w_active, "w_trans": state.w_trans })
    };
    let scores_json = |network: &MeanFieldNetwork<BigRational>| -> Result<_, String> {
        let scores = network.predict_scores();
        let normalized = fsp_core::normalize(&scores).map_err(err)?;
        Ok(json!(normalized.iter().map(Scalar::display).collect::<Vec<_>>()))
    };

    let initial = json!({
        "state": state_json(&network),
        "scores": scores_json(&network)?,
    });
    let mut steps = Vec::new();
    let mut mistakes = 0u64;
    for (i, &observed) in symbols.iter().enumerate() {
        let predicted = network.predict();
        mistakes += u64::from(predicted != observed);
        network.observe(observed).map_err(err)?;
        steps.push(json!({
            "t": i + 1,
            "observed": observed + 1,
            "predicted": predicted + 1,
            "mistake": predicted != observed,
            "state": state_json(&network),
            "scores": scores_json(&network)?,
        }));
    }

    finish(json!({
        "config": {
            "k": k,
            "alphabet": alphabet.size(),
            "lambda": lambda.to_string(),
            "sequence": symbols.iter().map(|&s| s + 1).collect::<Vec<_>>(),
        },
        "initial": initial,
        "steps": steps,
        "mistakes": mistakes,
    }))
}
