//! Concavity checks, dominating matchings and brute-force stability oracles.
//!
//! A market is π-concave when every π-schedule matching is dominated by a
//! full-time matching. The worst-situation profile of a schedule only reads
//! which shares are positive and which agents are full matched, so the check
//! runs over finitely many (support, tight set) patterns. A pattern counts
//! only if some schedule realises it, which an exact LP decides.

use std::collections::HashMap;

use num_traits::{Signed, Zero};

use crate::frac::{self, Rational};
use crate::market::{AgentId, Assignment, Market, Situation};
use crate::scarf::{scarf_solve_with, ScarfConfig, ScarfOutcome};
use crate::schedule::{
    dominates, find_block_matching_bounded, worst_situation_profile, Matching, PiScheduleMatching, PiScheme,
    WorstSituationProfile, DEFAULT_FIRM_CONTRACT_BOUND,
};
use crate::tableau::{maximize, LpOutcome};
use crate::{Error, Result};

/// Enumeration limits. Exceeding one is an error, never a silent cut.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    pub max_assignments: usize,
    pub max_agents: usize,
    pub max_firm_contracts: usize,
    pub max_matchings: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            max_assignments: 12,
            max_agents: 10,
            max_firm_contracts: DEFAULT_FIRM_CONTRACT_BOUND,
            max_matchings: 1 << 20,
        }
    }
}

/// Positive-share assignments (acceptable-order indices) and full-matched
/// agents (market indices), both ascending.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pattern {
    pub support: Vec<usize>,
    pub tight: Vec<usize>,
}

impl Pattern {
    /// The pattern of a concrete schedule.
    pub fn of_schedule(scheme: &PiScheme, t: &PiScheduleMatching) -> Pattern {
        Pattern {
            support: t.support(),
            tight: (0..scheme.capacity().len())
                .filter(|&i| scheme.load(t, i) == scheme.capacity()[i])
                .collect(),
        }
    }

    pub fn render(&self, market: &Market) -> String {
        let support: Vec<String> = self
            .support
            .iter()
            .map(|&k| {
                let a = &market.acceptable_assignments()[k];
                format!("{}@{}", market.assignment_label(a), market.firm_label(a.firm()))
            })
            .collect();
        let tight: Vec<&str> = self.tight.iter().map(|&i| market.agent_label(market.agent_at(i))).collect();
        format!("support=[{}] tight=[{}]", support.join(" "), tight.join(" "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub pattern: Pattern,
    /// A schedule realising the pattern that no full-time matching
    /// dominates.
    pub witness: PiScheduleMatching,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcavityVerdict {
    pub concave: bool,
    pub counterexample: Option<Counterexample>,
    pub patterns: usize,
    pub realizable_checks: usize,
}

fn check_size(market: &Market, bounds: &Bounds) -> Result<()> {
    let k = market.acceptable_assignments().len();
    if k > bounds.max_assignments {
        return Err(Error::BoundExceeded {
            what: "number of acceptable assignments",
            got: k,
            bound: bounds.max_assignments,
        });
    }
    if market.agent_count() > bounds.max_agents {
        return Err(Error::BoundExceeded {
            what: "number of agents",
            got: market.agent_count(),
            bound: bounds.max_agents,
        });
    }
    Ok(())
}

/// Every full-time matching: each worker takes one of her contracts (in
/// declaration order) or none, with the first worker varying slowest.
pub fn enumerate_matchings(market: &Market, bounds: &Bounds) -> Result<Vec<Matching>> {
    let options: Vec<Vec<Option<crate::ContractId>>> = market
        .worker_ids()
        .map(|w| std::iter::once(None).chain(market.contracts_of_worker(w).into_iter().map(Some)).collect())
        .collect();
    let total = options
        .iter()
        .try_fold(1usize, |acc, o| acc.checked_mul(o.len()))
        .filter(|&t| t <= bounds.max_matchings);
    let Some(total) = total else {
        return Err(Error::BoundExceeded {
            what: "number of matchings",
            got: options.iter().fold(1usize, |acc, o| acc.saturating_mul(o.len())),
            bound: bounds.max_matchings,
        });
    };
    let mut out = Vec::with_capacity(total);
    let mut digits = vec![0usize; options.len()];
    for _ in 0..total {
        let chosen = digits.iter().zip(&options).filter_map(|(&d, o)| o[d]);
        out.push(Matching::new(market, chosen)?);
        for pos in (0..digits.len()).rev() {
            digits[pos] += 1;
            if digits[pos] < options[pos].len() {
                break;
            }
            digits[pos] = 0;
        }
    }
    Ok(out)
}

/// Maximises a common margin δ with `t(Y) ≥ δ` on the support and slack at
/// least δ for agents outside the tight set, all other shares zero and
/// tight agents exactly at capacity. Returns the optimal schedule when
/// δ > 0.
pub fn pattern_realizable(market: &Market, scheme: &PiScheme, pattern: &Pattern) -> Result<Option<PiScheduleMatching>> {
    let n = market.agent_count();
    let k_all = market.acceptable_assignments().len();
    let s = &pattern.support;
    let loose: Vec<usize> = (0..n).filter(|i| pattern.tight.binary_search(i).is_err()).collect();
    // Variables: t over the support, slack and its excess over δ for loose
    // agents, excess of each share over δ, and δ last.
    let nt = s.len();
    let nl = loose.len();
    let vars = nt + nl + nl + nt + 1;
    let delta = vars - 1;
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    let mut rhs = Vec::new();
    for i in 0..n {
        let mut row = vec![frac::zero(); vars];
        for (j, &k) in s.iter().enumerate() {
            row[j] = scheme.intensity(k)[i].clone();
        }
        if let Some(p) = loose.iter().position(|&l| l == i) {
            row[nt + p] = frac::one();
        }
        rows.push(row);
        rhs.push(scheme.capacity()[i].clone());
    }
    for p in 0..nl {
        let mut row = vec![frac::zero(); vars];
        row[nt + p] = frac::one();
        row[nt + nl + p] = -frac::one();
        row[delta] = -frac::one();
        rows.push(row);
        rhs.push(frac::zero());
    }
    for j in 0..nt {
        let mut row = vec![frac::zero(); vars];
        row[j] = frac::one();
        row[nt + 2 * nl + j] = -frac::one();
        row[delta] = -frac::one();
        rows.push(row);
        rhs.push(frac::zero());
    }
    let mut objective = vec![frac::zero(); vars];
    objective[delta] = frac::one();
    match maximize(&objective, &rows, &rhs) {
        LpOutcome::Infeasible => Ok(None),
        LpOutcome::Unbounded => Err(Error::Internal("pattern program is unbounded".into())),
        LpOutcome::Optimal { x, value } => {
            if !value.is_positive() {
                return Ok(None);
            }
            let mut shares = vec![Rational::zero(); k_all];
            for (j, &k) in s.iter().enumerate() {
                shares[k] = x[j].clone();
            }
            Ok(Some(PiScheduleMatching::new(shares)))
        }
    }
}

/// The worst-situation profile every schedule with this pattern has.
pub fn profile_of_pattern(market: &Market, pattern: &Pattern) -> WorstSituationProfile {
    let acceptable = market.acceptable_assignments();
    let mut full = vec![false; market.agent_count()];
    for &i in &pattern.tight {
        full[i] = true;
    }
    let positive: Vec<&Assignment> = pattern.support.iter().map(|&k| &acceptable[k]).collect();
    let firms = market
        .firm_ids()
        .map(|f| {
            let empty = Assignment::empty(f);
            if !full[market.agent_index(AgentId::Firm(f))] {
                return empty;
            }
            positive
                .iter()
                .filter(|a| a.firm() == f)
                .min_by(|a, b| market.firm_compare(f, a, b).expect("own assignments"))
                .map_or(empty, |a| (*a).clone())
        })
        .collect();
    let workers = market
        .worker_ids()
        .map(|w| {
            if !full[market.agent_index(AgentId::Worker(w))] {
                return Situation::Empty;
            }
            positive
                .iter()
                .filter(|a| market.contract_for(a, w).is_some())
                .map(|a| Situation::employed(w, (*a).clone()))
                .min_by(|a, b| market.worker_compare_ext(w, a, b).expect("own situations"))
                .unwrap_or(Situation::Empty)
        })
        .collect();
    WorstSituationProfile::from_parts(firms, workers, full)
}

fn first_dominating<'a>(market: &Market, profile: &WorstSituationProfile, all: &'a [Matching]) -> Option<&'a Matching> {
    all.iter().find(|m| dominates(market, profile, m))
}

/// The first matching in enumeration order that dominates the profile.
pub fn find_dominating_matching(
    market: &Market,
    profile: &WorstSituationProfile,
    bounds: &Bounds,
) -> Result<Option<Matching>> {
    let all = enumerate_matchings(market, bounds)?;
    Ok(first_dominating(market, profile, &all).cloned())
}

fn mask_members(mask: u64, universe: &[usize]) -> Vec<usize> {
    universe
        .iter()
        .enumerate()
        .filter(|(b, _)| mask >> b & 1 == 1)
        .map(|(_, &x)| x)
        .collect()
}

/// Every pattern a full check visits, with supports and tight sets both in
/// ascending bitmask order. Agents outside the support's coalitions carry
/// no load and so are never tight.
fn patterns(market: &Market) -> impl Iterator<Item = Pattern> + '_ {
    let k = market.acceptable_assignments().len();
    let all_k: Vec<usize> = (0..k).collect();
    (0..1u64 << k).flat_map(move |smask| {
        let support = mask_members(smask, &all_k);
        let mut involved = vec![false; market.agent_count()];
        for &s in &support {
            for a in market.agents_of(&market.acceptable_assignments()[s]) {
                involved[market.agent_index(a)] = true;
            }
        }
        let universe: Vec<usize> = (0..involved.len()).filter(|&i| involved[i]).collect();
        (0..1u64 << universe.len()).map(move |tmask| Pattern {
            support: support.clone(),
            tight: mask_members(tmask, &universe),
        })
    })
}

struct Checker<'a> {
    market: &'a Market,
    scheme: &'a PiScheme,
    matchings: Vec<Matching>,
    dominated: HashMap<WorstSituationProfile, bool>,
    lp_calls: usize,
}

impl Checker<'_> {
    /// `Some(witness)` when the pattern is realisable and undominated.
    fn failure(&mut self, pattern: &Pattern) -> Result<Option<PiScheduleMatching>> {
        let profile = profile_of_pattern(self.market, pattern);
        let (market, matchings) = (self.market, &self.matchings);
        let dominated = *self
            .dominated
            .entry(profile)
            .or_insert_with_key(|p| first_dominating(market, p, matchings).is_some());
        if dominated {
            return Ok(None);
        }
        self.lp_calls += 1;
        pattern_realizable(self.market, self.scheme, pattern)
    }
}

fn checker<'a>(market: &'a Market, scheme: &'a PiScheme, bounds: &Bounds) -> Result<Checker<'a>> {
    check_size(market, bounds)?;
    Ok(Checker {
        market,
        scheme,
        matchings: enumerate_matchings(market, bounds)?,
        dominated: HashMap::new(),
        lp_calls: 0,
    })
}

/// Decides π-concavity, reporting the first failing pattern in
/// enumeration order.
pub fn check_pi_concavity(market: &Market, scheme: &PiScheme, bounds: &Bounds) -> Result<ConcavityVerdict> {
    let mut checker = checker(market, scheme, bounds)?;
    let mut visited = 0;
    for pattern in patterns(market) {
        visited += 1;
        if let Some(witness) = checker.failure(&pattern)? {
            return Ok(ConcavityVerdict {
                concave: false,
                counterexample: Some(Counterexample { pattern, witness }),
                patterns: visited,
                realizable_checks: checker.lp_calls,
            });
        }
    }
    Ok(ConcavityVerdict {
        concave: true,
        counterexample: None,
        patterns: visited,
        realizable_checks: checker.lp_calls,
    })
}

/// Every realisable pattern without a dominating matching.
pub fn failing_patterns(market: &Market, scheme: &PiScheme, bounds: &Bounds) -> Result<Vec<Counterexample>> {
    let mut checker = checker(market, scheme, bounds)?;
    let mut out = Vec::new();
    for pattern in patterns(market) {
        if let Some(witness) = checker.failure(&pattern)? {
            out.push(Counterexample { pattern, witness });
        }
    }
    Ok(out)
}

/// All stable full-time matchings, in enumeration order.
pub fn brute_force_stable_set(market: &Market, bounds: &Bounds) -> Result<Vec<Matching>> {
    let mut out = Vec::new();
    for m in enumerate_matchings(market, bounds)? {
        if find_block_matching_bounded(market, &m, bounds.max_firm_contracts)?.is_none() {
            out.push(m);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScarfMatching {
    /// `None` when Scarf's algorithm was bypassed.
    pub outcome: Option<ScarfOutcome>,
    pub profile: Option<WorstSituationProfile>,
    /// A stable matching dominating the Scarf output, if any.
    pub matching: Option<Matching>,
}

/// Runs Scarf's algorithm and looks for a full-time matching dominating its
/// output. Any matching found is checked to be stable.
///
/// If no agent row admits an assignment column without that agent, Scarf's
/// starting basis does not exist and the brute-force oracle answers
/// instead.
pub fn stable_matching_via_scarf(
    market: &Market,
    scheme: &PiScheme,
    config: &ScarfConfig,
    bounds: &Bounds,
) -> Result<ScarfMatching> {
    let outcome = match scarf_solve_with(market, scheme, config) {
        Ok(o) => o,
        Err(Error::NoOffColumnRow) => {
            let matching = brute_force_stable_set(market, bounds)?.into_iter().next();
            return Ok(ScarfMatching {
                outcome: None,
                profile: None,
                matching,
            });
        }
        Err(e) => return Err(e),
    };
    let profile = worst_situation_profile(market, scheme, &outcome.schedule)?;
    let matching = find_dominating_matching(market, &profile, bounds)?;
    if let Some(m) = &matching {
        if let Some(block) = find_block_matching_bounded(market, m, bounds.max_firm_contracts)? {
            return Err(Error::Internal(format!(
                "matching {} dominates a stable schedule but is blocked by {}",
                m.label(market),
                market.assignment_label(&block.assignment)
            )));
        }
    }
    Ok(ScarfMatching {
        outcome: Some(outcome),
        profile: Some(profile),
        matching,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::frac::ratio;
    use crate::schedule::is_stable_matching;

    fn labels(m: &Market, ms: &[Matching]) -> Vec<String> {
        ms.iter().map(|x| x.label(m)).collect()
    }

    #[test]
    fn matching_counts() {
        let b = Bounds::default();
        assert_eq!(enumerate_matchings(&fixtures::m2().market, &b).unwrap().len(), 9);
        // Each EB worker holds three contracts.
        assert_eq!(enumerate_matchings(&fixtures::eb().market, &b).unwrap().len(), 16);
        let first = enumerate_matchings(&fixtures::m2().market, &b).unwrap();
        assert!(first[0].is_empty());
        assert_eq!(first[1].label(&fixtures::m2().market), "{f1w2}");
    }

    #[test]
    fn matching_bound_is_enforced() {
        let b = Bounds {
            max_matchings: 8,
            ..Bounds::default()
        };
        assert!(matches!(
            enumerate_matchings(&fixtures::m2().market, &b),
            Err(Error::BoundExceeded { got: 9, .. })
        ));
    }

    #[test]
    fn split_schedule_pattern_is_realizable() {
        let m2 = fixtures::m2().market;
        let unit = PiScheme::unit(&m2);
        let p = Pattern {
            support: vec![0, 2, 3],
            tight: vec![1, 2, 3],
        };
        let t = pattern_realizable(&m2, &unit, &p).unwrap().unwrap();
        assert_eq!(t.shares(), &[ratio(1, 2), frac::zero(), ratio(1, 2), ratio(1, 2)]);
        assert_eq!(Pattern::of_schedule(&unit, &t), p);
    }

    #[test]
    fn capacity_three_firm_never_tight() {
        let m4 = fixtures::m4_pi();
        for support in [vec![1], vec![1, 2], vec![0, 1, 2]] {
            let p = Pattern {
                support,
                tight: vec![1],
            };
            assert!(pattern_realizable(&m4.market, &m4.scheme, &p).unwrap().is_none());
        }
    }

    #[test]
    fn empty_pattern_gives_zero_witness() {
        let eb = fixtures::eb();
        let p = Pattern {
            support: vec![],
            tight: vec![],
        };
        let t = pattern_realizable(&eb.market, &eb.scheme, &p).unwrap().unwrap();
        assert!(t.shares().iter().all(Zero::is_zero));
    }

    #[test]
    fn dominating_matchings() {
        let b = Bounds::default();
        let eb = fixtures::eb();
        let t = PiScheduleMatching::new(vec![frac::zero(), frac::zero(), ratio(1, 2), frac::one(), frac::zero()]);
        let profile = worst_situation_profile(&eb.market, &eb.scheme, &t).unwrap();
        let m = find_dominating_matching(&eb.market, &profile, &b).unwrap().unwrap();
        assert_eq!(m.label(&eb.market), "{z1,z2}");

        let m2 = fixtures::m2().market;
        let unit = PiScheme::unit(&m2);
        let half = ratio(1, 2);
        let t = PiScheduleMatching::new(vec![half.clone(), frac::zero(), half.clone(), half]);
        let profile = worst_situation_profile(&m2, &unit, &t).unwrap();
        assert_eq!(find_dominating_matching(&m2, &profile, &b).unwrap(), None);

        let all_empty = WorstSituationProfile::all_empty(&m2);
        assert_eq!(find_dominating_matching(&m2, &all_empty, &b).unwrap(), Some(Matching::empty()));
    }

    #[test]
    fn pattern_profile_agrees_with_concrete_schedule() {
        let eb = fixtures::eb();
        let t = PiScheduleMatching::new(vec![frac::zero(), frac::zero(), ratio(1, 2), frac::one(), frac::zero()]);
        let p = Pattern::of_schedule(&eb.scheme, &t);
        assert_eq!(
            profile_of_pattern(&eb.market, &p),
            worst_situation_profile(&eb.market, &eb.scheme, &t).unwrap()
        );
    }

    #[test]
    fn concavity_verdicts() {
        let b = Bounds::default();
        let m4 = fixtures::m4();
        assert!(!check_pi_concavity(&m4.market, &m4.scheme, &b).unwrap().concave);
        let m4_pi = fixtures::m4_pi();
        assert!(check_pi_concavity(&m4_pi.market, &m4_pi.scheme, &b).unwrap().concave);
        let eb = fixtures::eb();
        assert!(check_pi_concavity(&eb.market, &PiScheme::unit(&eb.market), &b).unwrap().concave);
    }

    #[test]
    fn m4_counterexample_is_half_schedule() {
        let m4 = fixtures::m4();
        let b = Bounds::default();
        let failing = failing_patterns(&m4.market, &m4.scheme, &b).unwrap();
        let half = Pattern {
            support: vec![0, 1, 2],
            tight: vec![1, 2, 3],
        };
        assert!(failing.iter().any(|c| c.pattern == half));
        for c in &failing {
            assert_eq!(Pattern::of_schedule(&m4.scheme, &c.witness), c.pattern);
        }
    }

    #[test]
    fn size_bounds() {
        let b = Bounds {
            max_assignments: 4,
            ..Bounds::default()
        };
        let eb = fixtures::eb();
        assert!(matches!(
            check_pi_concavity(&eb.market, &eb.scheme, &b),
            Err(Error::BoundExceeded { got: 5, bound: 4, .. })
        ));
    }

    #[test]
    fn stable_sets() {
        let b = Bounds::default();
        let eb = fixtures::eb().market;
        assert_eq!(labels(&eb, &brute_force_stable_set(&eb, &b).unwrap()), ["{z1,z2}"]);
        // w2 ranks z2 first and f2 accepts {z2} alone, so {z2} blocks both
        // matchings in which f1 hires the two workers.
        let z2 = eb.firm_prefs(crate::FirmId(1))[1].clone();
        for pair in [["x5d", "y4d"], ["x5d", "y5d"]] {
            let m = Matching::new(&eb, pair.iter().map(|c| eb.find_contract(c).unwrap())).unwrap();
            assert!(crate::schedule::blocks_matching(&eb, &m, &z2).unwrap());
        }
        assert!(brute_force_stable_set(&fixtures::m2().market, &b).unwrap().is_empty());
        let m4 = fixtures::m4().market;
        assert!(labels(&m4, &brute_force_stable_set(&m4, &b).unwrap()).contains(&"{f1w1,f1w2}".to_string()));
    }

    #[test]
    fn via_scarf() {
        let b = Bounds::default();
        let c = ScarfConfig::default();
        let eb = fixtures::eb();
        let out = stable_matching_via_scarf(&eb.market, &eb.scheme, &c, &b).unwrap();
        assert_eq!(out.matching.unwrap().label(&eb.market), "{z1,z2}");

        let m4 = fixtures::m4_pi();
        let out = stable_matching_via_scarf(&m4.market, &m4.scheme, &c, &b).unwrap();
        let m = out.matching.unwrap();
        assert_eq!(m.label(&m4.market), "{f1w1,f1w2}");
        assert!(is_stable_matching(&m4.market, &m).unwrap());

        let m2 = fixtures::m2();
        let out = stable_matching_via_scarf(&m2.market, &m2.scheme, &c, &b).unwrap();
        assert!(out.matching.is_none());
        assert!(out.outcome.is_some());
    }

    #[test]
    fn no_acceptable_assignments_gives_empty_matching() {
        let file = fixtures::no_acceptable();
        let out = stable_matching_via_scarf(&file.market, &file.scheme, &ScarfConfig::default(), &Bounds::default())
            .unwrap();
        assert_eq!(out.matching, Some(Matching::empty()));
    }
}
