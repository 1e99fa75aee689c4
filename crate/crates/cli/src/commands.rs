//! Command implementations. Each returns the text for standard output plus
//! an exit code; errors bubble up to `main`, which maps them to codes.
//!
//! Every matching or schedule is re-verified before it is printed.

use std::fmt::Write as _;

use concave_match::concavity::{
    brute_force_stable_set, check_pi_concavity, find_dominating_matching, stable_matching_via_scarf, Bounds, Pattern,
};
use concave_match::format::MarketFile;
use concave_match::frac;
use concave_match::scarf::{scarf_solve_with, ScarfConfig};
use concave_match::schedule::{
    dominates, find_block_matching, find_block_pi_schedule, is_feasible, is_stable_matching,
    worst_situation_profile, Matching, PiScheduleMatching, PiScheme,
};
use concave_match::team::{validate_team_market, variant_da};
use concave_match::{Error, Market, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NO_DOMINATING: i32 = 2;
pub const EXIT_BOUND: i32 = 3;

pub struct Report {
    pub text: String,
    pub code: i32,
}

impl Report {
    fn ok(text: String) -> Self {
        Report { text, code: EXIT_OK }
    }
}

pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::BoundExceeded { .. } => EXIT_BOUND,
        _ => EXIT_INPUT,
    }
}

fn certify(what: &str, ok: bool) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Internal(format!("{what} failed re-verification")))
    }
}

fn write_schedule(out: &mut String, market: &Market, t: &PiScheduleMatching) {
    if t.support().is_empty() {
        out.push_str("  all shares zero\n");
    }
    for k in t.support() {
        let y = &market.acceptable_assignments()[k];
        let _ = writeln!(out, "  t({}) = {}", market.assignment_label(y), frac::format(t.share(k)));
    }
}

pub fn solve(file: &MarketFile, config: &ScarfConfig, bounds: &Bounds) -> Result<Report> {
    let (m, scheme) = (&file.market, &file.scheme);
    let found = stable_matching_via_scarf(m, scheme, config, bounds)?;
    let mut out = String::new();
    let _ = writeln!(out, "scheme: {}", if file.scheme_declared { "declared" } else { "unit" });
    match &found.outcome {
        Some(outcome) => {
            let t = &outcome.schedule;
            certify(
                "schedule",
                is_feasible(scheme, t)? && find_block_pi_schedule(m, scheme, t)?.is_none(),
            )?;
            let _ = writeln!(out, "schedule ({} pivot steps):", outcome.trace.steps.len());
            write_schedule(&mut out, m, t);
            out.push_str("schedule stable: yes\n");
        }
        None => out.push_str("schedule: not computed, no Scarf starting row; brute-force search used\n"),
    }
    let Some(matching) = &found.matching else {
        out.push_str("matching: none dominates the schedule\n");
        return Ok(Report { text: out, code: EXIT_NO_DOMINATING });
    };
    if let Some(profile) = &found.profile {
        certify("dominance", dominates(m, profile, matching))?;
    }
    certify("matching", is_stable_matching(m, matching)?)?;
    let _ = writeln!(out, "matching: {}", matching.label(m));
    out.push_str("stable: yes\n");
    Ok(Report::ok(out))
}

/// Accepts `{a,b}`, `a,b`, `a b` or `{}`.
pub fn parse_matching(market: &Market, text: &str) -> Result<Matching> {
    let inner = text.trim().trim_start_matches('{').trim_end_matches('}');
    let ids = inner
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|label| {
            market
                .find_contract(label)
                .ok_or_else(|| Error::InvalidMatching(format!("unknown contract {label}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Matching::new(market, ids)
}

pub fn check_stable(file: &MarketFile, matching: &str) -> Result<Report> {
    let m = &file.market;
    let matching = parse_matching(m, matching)?;
    let mut out = format!("matching: {}\n", matching.label(m));
    match find_block_matching(m, &matching)? {
        None => out.push_str("stable: yes\n"),
        Some(block) => {
            let _ = writeln!(
                out,
                "stable: no\nblock: {} with {}",
                m.firm_label(block.firm),
                m.assignment_label(&block.assignment)
            );
        }
    }
    Ok(Report::ok(out))
}

pub fn check_concave(file: &MarketFile, use_file_scheme: bool, bounds: &Bounds) -> Result<Report> {
    let m = &file.market;
    let unit;
    let scheme = if use_file_scheme {
        &file.scheme
    } else {
        unit = PiScheme::unit(m);
        &unit
    };
    let verdict = check_pi_concavity(m, scheme, bounds)?;
    let mut out = String::new();
    let _ = writeln!(out, "scheme: {}", if use_file_scheme { "file" } else { "unit" });
    let _ = writeln!(out, "concave: {}", if verdict.concave { "yes" } else { "no" });
    let _ = writeln!(out, "patterns: {}", verdict.patterns);
    let _ = writeln!(out, "realizability checks: {}", verdict.realizable_checks);
    if let Some(cx) = &verdict.counterexample {
        let w = &cx.witness;
        let profile = worst_situation_profile(m, scheme, w)?;
        certify(
            "counterexample",
            is_feasible(scheme, w)?
                && Pattern::of_schedule(scheme, w) == cx.pattern
                && find_dominating_matching(m, &profile, bounds)?.is_none(),
        )?;
        let _ = writeln!(out, "counterexample: {}", cx.pattern.render(m));
        out.push_str("witness:\n");
        write_schedule(&mut out, m, w);
    }
    Ok(Report::ok(out))
}

pub fn da(file: &MarketFile) -> Result<Report> {
    let m = &file.market;
    let lf = file
        .teams
        .as_ref()
        .ok_or_else(|| Error::NotTeamMarket(vec!["the file has no leaders section".into()]))?;
    let problems = validate_team_market(m, lf);
    if !problems.is_empty() {
        return Err(Error::NotTeamMarket(problems));
    }
    let matching = variant_da(m, lf)?;
    certify("matching", is_stable_matching(m, &matching)?)?;
    let mut out = String::new();
    for f in m.firm_ids() {
        let _ = writeln!(out, "{}: {}", m.firm_label(f), m.assignment_label(&matching.firm_assignment(m, f)));
    }
    let _ = writeln!(out, "matching: {}\nstable: yes", matching.label(m));
    Ok(Report::ok(out))
}

pub fn trace(file: &MarketFile, config: &ScarfConfig) -> Result<Report> {
    let outcome = scarf_solve_with(&file.market, &file.scheme, config)?;
    Ok(Report::ok(outcome.trace.render(&file.market)))
}

pub fn stable_set(file: &MarketFile, bounds: &Bounds) -> Result<Report> {
    let m = &file.market;
    let set = brute_force_stable_set(m, bounds)?;
    let mut out = String::new();
    for matching in &set {
        certify("matching", is_stable_matching(m, matching)?)?;
        let _ = writeln!(out, "{}", matching.label(m));
    }
    let _ = writeln!(out, "count: {}", set.len());
    Ok(Report::ok(out))
}
