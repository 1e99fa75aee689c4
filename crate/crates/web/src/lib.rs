//! Browser bindings. The page in `www/` passes the text of a market file and
//! shows the returned report. The plain functions do the work so they can be
//! tested off the browser; the `#[wasm_bindgen]` wrappers only convert
//! errors.

use std::fmt::Write as _;

use concave_match::concavity::{check_pi_concavity, stable_matching_via_scarf, Bounds};
use concave_match::fixtures;
use concave_match::format::parse_market;
use concave_match::frac;
use concave_match::scarf::{scarf_solve, ScarfConfig};
use concave_match::schedule::{is_stable_matching, PiScheduleMatching, PiScheme};
use concave_match::Market;
use wasm_bindgen::prelude::*;

fn shares(market: &Market, t: &PiScheduleMatching) -> String {
    let mut out = String::new();
    for k in t.support() {
        let y = &market.acceptable_assignments()[k];
        let _ = writeln!(out, "  t({}) = {}", market.assignment_label(y), frac::format(t.share(k)));
    }
    out
}

pub fn solve_text(text: &str) -> Result<String, String> {
    let file = parse_market(text).map_err(|e| e.to_string())?;
    let m = &file.market;
    let found = stable_matching_via_scarf(m, &file.scheme, &ScarfConfig::default(), &Bounds::default())
        .map_err(|e| e.to_string())?;
    let mut out = String::new();
    if let Some(outcome) = &found.outcome {
        out.push_str("schedule:\n");
        out.push_str(&shares(m, &outcome.schedule));
    }
    match &found.matching {
        Some(x) if is_stable_matching(m, x).map_err(|e| e.to_string())? => {
            let _ = writeln!(out, "matching: {}\nstable: yes", x.label(m));
        }
        Some(x) => return Err(format!("matching {} failed re-verification", x.label(m))),
        None => out.push_str("matching: none dominates the schedule\n"),
    }
    Ok(out)
}

pub fn trace_text(text: &str) -> Result<String, String> {
    let file = parse_market(text).map_err(|e| e.to_string())?;
    let outcome = scarf_solve(&file.market, &file.scheme).map_err(|e| e.to_string())?;
    Ok(outcome.trace.render(&file.market))
}

pub fn check_concave_text(text: &str, use_file_scheme: bool) -> Result<String, String> {
    let file = parse_market(text).map_err(|e| e.to_string())?;
    let m = &file.market;
    let scheme = if use_file_scheme { file.scheme.clone() } else { PiScheme::unit(m) };
    let verdict = check_pi_concavity(m, &scheme, &Bounds::default()).map_err(|e| e.to_string())?;
    let mut out = format!(
        "concave: {} ({} patterns)\n",
        if verdict.concave { "yes" } else { "no" },
        verdict.patterns
    );
    if let Some(cx) = verdict.counterexample {
        let _ = writeln!(out, "counterexample: {}", cx.pattern.render(m));
        out.push_str(&shares(m, &cx.witness));
    }
    Ok(out)
}

/// Preset market files offered by the page.
pub fn preset_text(name: &str) -> Option<&'static str> {
    fixtures::ALL.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

#[wasm_bindgen]
pub fn solve(text: &str) -> Result<String, JsError> {
    solve_text(text).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn trace(text: &str) -> Result<String, JsError> {
    trace_text(text).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn check_concave(text: &str, use_file_scheme: bool) -> Result<String, JsError> {
    check_concave_text(text, use_file_scheme).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn preset(name: &str) -> Option<String> {
    preset_text(name).map(str::to_owned)
}
