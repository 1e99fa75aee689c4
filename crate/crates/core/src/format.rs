//! Text format for markets, schemes and leader–follower structures.
//!
//! ```text
//! # comment
//! firms: f1 f2
//! workers: w1 w2
//! contract x f1 w1
//! contract y f2 w2
//! pref firm f1: {x} > empty
//! pref firm f2: {y} > empty
//! pref worker w1: x > empty
//! pref worker w2: y > empty
//! capacity: f1=1 f2=1 w1=1 w2=1
//! intensity {x}: f1=1 w1=1
//! intensity {y}: f2=1 w2=1
//! leaders: w1
//! follows: w2=w1
//! ```
//!
//! The scheme lines are optional; without them the unit scheme is used.
//! Capacities must name every agent. An intensity line must name every
//! agent of its assignment; other agents are zero.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::frac::{self, Rational};
use crate::market::{AgentId, Assignment, Contract, ContractId, FirmId, Market, WorkerId};
use crate::schedule::PiScheme;
use crate::team::LeaderFollower;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarketFile {
    pub market: Market,
    pub scheme: PiScheme,
    /// Whether the scheme came from the file rather than the unit default.
    pub scheme_declared: bool,
    pub teams: Option<LeaderFollower>,
}

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn is_label(s: &str) -> bool {
    !s.is_empty()
        && s != "empty"
        && s.chars().all(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | '\''))
}

fn label(line: usize, s: &str) -> Result<String> {
    if is_label(s) {
        Ok(s.to_string())
    } else {
        Err(err(line, format!("invalid label '{s}'")))
    }
}

/// Splits `a=v` pairs.
fn pairs(line: usize, text: &str) -> Result<Vec<(String, Rational)>> {
    text.split_whitespace()
        .map(|item| {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| err(line, format!("expected agent=value, found '{item}'")))?;
            let v = frac::parse(v).ok_or_else(|| err(line, format!("invalid number '{v}'")))?;
            Ok((k.to_string(), v))
        })
        .collect()
}

/// Parses `{a,b}` into contract labels.
fn braced(line: usize, text: &str) -> Result<Vec<String>> {
    let inner = text
        .trim()
        .strip_prefix('{')
        .and_then(|t| t.strip_suffix('}'))
        .ok_or_else(|| err(line, format!("expected {{...}}, found '{}'", text.trim())))?;
    let labels: Vec<String> = inner.split(',').map(|s| s.trim().to_string()).collect();
    if labels.iter().any(|l| l.is_empty()) {
        return Err(err(line, "empty contract label in assignment (write 'empty' for the empty assignment)"));
    }
    Ok(labels)
}

/// Items of a `>`-separated list; a trailing `empty` is dropped and `empty`
/// anywhere else is an error.
fn ranked(line: usize, text: &str) -> Result<Vec<String>> {
    let items: Vec<&str> = text.split('>').map(str::trim).collect();
    let mut out = Vec::new();
    for (i, item) in items.iter().enumerate() {
        if *item == "empty" {
            if i + 1 != items.len() {
                return Err(err(line, "'empty' must be the last item"));
            }
        } else if item.is_empty() {
            if items.len() > 1 || i > 0 {
                return Err(err(line, "missing item between '>'"));
            }
        } else {
            out.push(item.to_string());
        }
    }
    Ok(out)
}

#[derive(Default)]
struct Raw {
    firms: Option<(usize, Vec<String>)>,
    workers: Option<(usize, Vec<String>)>,
    contracts: Vec<(usize, String, String, String)>,
    firm_prefs: Vec<(usize, String, Vec<Vec<String>>)>,
    worker_prefs: Vec<(usize, String, Vec<String>)>,
    capacity: Option<(usize, Vec<(String, Rational)>)>,
    intensities: Vec<IntensityLine>,
    leaders: Option<(usize, Vec<String>)>,
    follows: Option<(usize, Vec<(String, String)>)>,
}

fn set_once<T>(slot: &mut Option<(usize, T)>, line: usize, value: T, what: &str) -> Result<()> {
    if let Some((first, _)) = slot {
        return Err(err(line, format!("second '{what}' line (first on line {first})")));
    }
    *slot = Some((line, value));
    Ok(())
}

fn tokenize(text: &str) -> Result<Raw> {
    let mut raw = Raw::default();
    for (idx, full) in text.lines().enumerate() {
        let line = idx + 1;
        let body = full.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(rest) = body.strip_prefix("contract ") {
            let parts: Vec<&str> = rest.split_whitespace().collect();
            let [c, f, w] = parts.as_slice() else {
                return Err(err(line, "expected 'contract <label> <firm> <worker>'"));
            };
            raw.contracts
                .push((line, label(line, c)?, f.to_string(), w.to_string()));
            continue;
        }
        if let Some(rest) = body.strip_prefix("pref ") {
            let (head, list) = rest
                .split_once(':')
                .ok_or_else(|| err(line, "expected ':' after the agent"))?;
            let head: Vec<&str> = head.split_whitespace().collect();
            match head.as_slice() {
                ["firm", f] => {
                    let items = ranked(line, list)?
                        .iter()
                        .map(|item| braced(line, item))
                        .collect::<Result<_>>()?;
                    raw.firm_prefs.push((line, f.to_string(), items));
                }
                ["worker", w] => {
                    let items = ranked(line, list)?;
                    if let Some(bad) = items.iter().find(|i| !is_label(i)) {
                        return Err(err(line, format!("invalid contract label '{bad}'")));
                    }
                    raw.worker_prefs.push((line, w.to_string(), items));
                }
                _ => return Err(err(line, "expected 'pref firm <f>:' or 'pref worker <w>:'")),
            }
            continue;
        }
        if let Some(rest) = body.strip_prefix("intensity ") {
            let (set, values) = rest
                .split_once(':')
                .ok_or_else(|| err(line, "expected ':' after the assignment"))?;
            raw.intensities.push((line, braced(line, set)?, pairs(line, values)?));
            continue;
        }
        let (key, value) = body
            .split_once(':')
            .ok_or_else(|| err(line, format!("unrecognised line '{body}'")))?;
        let words = || -> Result<Vec<String>> { value.split_whitespace().map(|w| label(line, w)).collect() };
        match key.trim() {
            "firms" => set_once(&mut raw.firms, line, words()?, "firms")?,
            "workers" => set_once(&mut raw.workers, line, words()?, "workers")?,
            "capacity" => set_once(&mut raw.capacity, line, pairs(line, value)?, "capacity")?,
            "leaders" => set_once(&mut raw.leaders, line, words()?, "leaders")?,
            "follows" => {
                let items = value
                    .split_whitespace()
                    .map(|item| {
                        let (o, l) = item
                            .split_once('=')
                            .ok_or_else(|| err(line, format!("expected follower=leader, found '{item}'")))?;
                        Ok((o.to_string(), l.to_string()))
                    })
                    .collect::<Result<_>>()?;
                set_once(&mut raw.follows, line, items, "follows")?
            }
            other => return Err(err(line, format!("unknown section '{other}'"))),
        }
    }
    Ok(raw)
}

pub fn parse_market(text: &str) -> Result<MarketFile> {
    let raw = tokenize(text)?;
    let (_, firms) = raw.firms.ok_or_else(|| err(0, "missing 'firms:' line"))?;
    let (_, workers) = raw.workers.ok_or_else(|| err(0, "missing 'workers:' line"))?;
    let firm_index: HashMap<&str, FirmId> = firms.iter().enumerate().map(|(i, f)| (f.as_str(), FirmId(i))).collect();
    let worker_index: HashMap<&str, WorkerId> =
        workers.iter().enumerate().map(|(i, w)| (w.as_str(), WorkerId(i))).collect();

    let mut contracts = Vec::new();
    let mut contract_index: HashMap<String, ContractId> = HashMap::new();
    for (line, c, f, w) in &raw.contracts {
        let firm = *firm_index
            .get(f.as_str())
            .ok_or_else(|| err(*line, format!("contract {c} names unknown firm {f}")))?;
        let worker = *worker_index
            .get(w.as_str())
            .ok_or_else(|| err(*line, format!("contract {c} names unknown worker {w}")))?;
        if contract_index.insert(c.clone(), ContractId(contracts.len())).is_some() {
            return Err(err(*line, format!("contract {c} declared twice")));
        }
        contracts.push(Contract {
            label: c.clone(),
            firm,
            worker,
        });
    }
    let lookup = |line: usize, c: &str| -> Result<ContractId> {
        contract_index
            .get(c)
            .copied()
            .ok_or_else(|| err(line, format!("unknown contract {c}")))
    };

    let mut firm_prefs: Vec<Option<Vec<Assignment>>> = vec![None; firms.len()];
    for (line, f, items) in &raw.firm_prefs {
        let firm = *firm_index
            .get(f.as_str())
            .ok_or_else(|| err(*line, format!("unknown firm {f}")))?;
        if firm_prefs[firm.0].is_some() {
            return Err(err(*line, format!("second preference line for firm {f}")));
        }
        let list = items
            .iter()
            .map(|set| {
                let ids = set.iter().map(|c| lookup(*line, c)).collect::<Result<Vec<_>>>()?;
                Ok(Assignment::new(firm, ids))
            })
            .collect::<Result<_>>()?;
        firm_prefs[firm.0] = Some(list);
    }
    let mut worker_prefs: Vec<Option<Vec<ContractId>>> = vec![None; workers.len()];
    for (line, w, items) in &raw.worker_prefs {
        let worker = *worker_index
            .get(w.as_str())
            .ok_or_else(|| err(*line, format!("unknown worker {w}")))?;
        if worker_prefs[worker.0].is_some() {
            return Err(err(*line, format!("second preference line for worker {w}")));
        }
        let list = items.iter().map(|c| lookup(*line, c)).collect::<Result<_>>()?;
        worker_prefs[worker.0] = Some(list);
    }
    let firm_prefs = firm_prefs
        .into_iter()
        .enumerate()
        .map(|(i, p)| p.ok_or_else(|| err(0, format!("no preference line for firm {}", firms[i]))))
        .collect::<Result<_>>()?;
    let worker_prefs = worker_prefs
        .into_iter()
        .enumerate()
        .map(|(i, p)| p.ok_or_else(|| err(0, format!("no preference line for worker {}", workers[i]))))
        .collect::<Result<_>>()?;

    let market = Market::new(firms, workers, contracts, firm_prefs, worker_prefs)?;
    let scheme_declared = raw.capacity.is_some() || !raw.intensities.is_empty();
    let scheme = if scheme_declared {
        parse_scheme(&market, raw.capacity, &raw.intensities, &lookup)?
    } else {
        PiScheme::unit(&market)
    };

    let teams = match (raw.leaders, raw.follows) {
        (None, None) => None,
        (leaders, follows) => {
            let line = leaders.as_ref().map(|l| l.0).or(follows.as_ref().map(|f| f.0)).unwrap_or(0);
            let worker = |name: &str| {
                market
                    .find_worker(name)
                    .ok_or_else(|| err(line, format!("unknown worker {name}")))
            };
            let leaders = leaders
                .map(|(_, ls)| ls.iter().map(|l| worker(l)).collect::<Result<Vec<_>>>())
                .transpose()?
                .unwrap_or_default();
            let follows = follows
                .map(|(_, fs)| {
                    fs.iter()
                        .map(|(o, l)| Ok((worker(o)?, worker(l)?)))
                        .collect::<Result<Vec<_>>>()
                })
                .transpose()?
                .unwrap_or_default();
            Some(LeaderFollower::new(&market, &leaders, &follows).map_err(|e| err(line, e.to_string()))?)
        }
    };

    Ok(MarketFile {
        market,
        scheme,
        scheme_declared,
        teams,
    })
}

type IntensityLine = (usize, Vec<String>, Vec<(String, Rational)>);

fn parse_scheme(
    market: &Market,
    capacity: Option<(usize, Vec<(String, Rational)>)>,
    intensities: &[IntensityLine],
    lookup: &dyn Fn(usize, &str) -> Result<ContractId>,
) -> Result<PiScheme> {
    let n = market.agent_count();
    let (cap_line, cap_pairs) = capacity.ok_or_else(|| err(0, "intensities given without a 'capacity:' line"))?;
    let agent = |line: usize, name: &str| {
        market
            .find_agent(name)
            .map(|a| market.agent_index(a))
            .ok_or_else(|| err(line, format!("unknown agent {name}")))
    };
    let mut cap: Vec<Option<Rational>> = vec![None; n];
    for (name, v) in cap_pairs {
        let i = agent(cap_line, &name)?;
        if cap[i].replace(v).is_some() {
            return Err(err(cap_line, format!("capacity of {name} given twice")));
        }
    }
    let capacity = cap
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| err(cap_line, format!("no capacity for {}", market.agent_label(market.agent_at(i))))))
        .collect::<Result<Vec<_>>>()?;

    let acceptable = market.acceptable_assignments();
    let mut columns: Vec<Option<Vec<Rational>>> = vec![None; acceptable.len()];
    for (line, set, values) in intensities {
        let ids = set.iter().map(|c| lookup(*line, c)).collect::<Result<Vec<_>>>()?;
        let firm = market.contract(ids[0]).firm;
        let a = Assignment::new(firm, ids);
        let k = market
            .acceptable_index(&a)
            .ok_or_else(|| err(*line, format!("intensity for {}, which is not an acceptable assignment", market.assignment_label(&a))))?;
        if columns[k].is_some() {
            return Err(err(*line, format!("second intensity line for {}", market.assignment_label(&a))));
        }
        let mut column = vec![frac::zero(); n];
        let mut named = vec![false; n];
        for (name, v) in values {
            let i = agent(*line, name)?;
            if std::mem::replace(&mut named[i], true) {
                return Err(err(*line, format!("intensity of {name} given twice")));
            }
            column[i] = v.clone();
        }
        for member in market.agents_of(&a) {
            if !named[market.agent_index(member)] {
                return Err(err(
                    *line,
                    format!("intensity for {} misses agent {}", market.assignment_label(&a), market.agent_label(member)),
                ));
            }
        }
        columns[k] = Some(column);
    }
    let intensity = columns
        .into_iter()
        .enumerate()
        .map(|(k, c)| c.ok_or_else(|| err(0, format!("no intensity line for {}", market.assignment_label(&acceptable[k])))))
        .collect::<Result<Vec<_>>>()?;
    PiScheme::new(market, capacity, intensity)
}

/// Writes the file back in the grammar accepted by [`parse_market`].
pub fn serialize(file: &MarketFile) -> String {
    let m = &file.market;
    let mut out = String::new();
    let names = |ids: &mut dyn Iterator<Item = AgentId>| ids.map(|a| m.agent_label(a)).collect::<Vec<_>>().join(" ");
    let _ = writeln!(out, "firms: {}", names(&mut m.firm_ids().map(AgentId::Firm)));
    let _ = writeln!(out, "workers: {}", names(&mut m.worker_ids().map(AgentId::Worker)));
    out.push('\n');
    for c in m.contracts() {
        let _ = writeln!(out, "contract {} {} {}", c.label, m.firm_label(c.firm), m.worker_label(c.worker));
    }
    out.push('\n');
    for f in m.firm_ids() {
        let items: Vec<String> = m
            .firm_prefs(f)
            .iter()
            .map(|a| m.assignment_label(a))
            .chain(std::iter::once("empty".to_string()))
            .collect();
        let _ = writeln!(out, "pref firm {}: {}", m.firm_label(f), items.join(" > "));
    }
    for w in m.worker_ids() {
        let items: Vec<&str> = m
            .worker_prefs(w)
            .iter()
            .map(|c| m.contract_label(*c))
            .chain(std::iter::once("empty"))
            .collect();
        let _ = writeln!(out, "pref worker {}: {}", m.worker_label(w), items.join(" > "));
    }
    if file.scheme_declared {
        out.push('\n');
        let caps: Vec<String> = m
            .agent_ids()
            .zip(file.scheme.capacity())
            .map(|(a, v)| format!("{}={}", m.agent_label(a), frac::format(v)))
            .collect();
        let _ = writeln!(out, "capacity: {}", caps.join(" "));
        for (k, a) in m.acceptable_assignments().iter().enumerate() {
            let values: Vec<String> = m
                .agents_of(a)
                .into_iter()
                .map(|agent| format!("{}={}", m.agent_label(agent), frac::format(&file.scheme.intensity(k)[m.agent_index(agent)])))
                .collect();
            let _ = writeln!(out, "intensity {}: {}", m.assignment_label(a), values.join(" "));
        }
    }
    if let Some(teams) = &file.teams {
        out.push('\n');
        let leaders: Vec<&str> = teams.leaders().into_iter().map(|l| m.worker_label(l)).collect();
        let _ = writeln!(out, "leaders: {}", leaders.join(" "));
        let follows: Vec<String> = teams
            .followers()
            .into_iter()
            .map(|(o, l)| format!("{}={}", m.worker_label(o), m.worker_label(l)))
            .collect();
        let _ = writeln!(out, "follows: {}", follows.join(" "));
    }
    out
}
