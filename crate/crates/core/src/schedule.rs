//! π-schemes, π-schedule matchings, worst-situation profiles, dominance and
//! the two stability notions (for full-time matchings and for π-schedule
//! matchings).

use std::cmp::Ordering;
use std::collections::BTreeSet;

use num_traits::{Signed, Zero};

use crate::frac::{self, Rational};
use crate::market::{AgentId, Assignment, ContractId, FirmId, Market, Situation, WorkerId};
use crate::{Error, Result};

/// Per-firm contract count above which [`find_block_matching`] refuses.
pub const DEFAULT_FIRM_CONTRACT_BOUND: usize = 15;

/// Capacities per agent and intensity vectors per acceptable assignment.
/// Both are dense over agents in market index order; intensities follow the
/// market's acceptable-assignment order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiScheme {
    capacity: Vec<Rational>,
    intensity: Vec<Vec<Rational>>,
}

impl PiScheme {
    pub fn new(market: &Market, capacity: Vec<Rational>, intensity: Vec<Vec<Rational>>) -> Result<Self> {
        let n = market.agent_count();
        if capacity.len() != n {
            return Err(Error::InvalidScheme(format!(
                "{} capacities for {n} agents",
                capacity.len()
            )));
        }
        for (i, c) in capacity.iter().enumerate() {
            if !c.is_positive() {
                return Err(Error::InvalidScheme(format!(
                    "capacity of {} must be positive",
                    market.agent_label(market.agent_at(i))
                )));
            }
        }
        let acceptable = market.acceptable_assignments();
        if intensity.len() != acceptable.len() {
            return Err(Error::InvalidScheme(format!(
                "{} intensity vectors for {} acceptable assignments",
                intensity.len(),
                acceptable.len()
            )));
        }
        for (a, column) in acceptable.iter().zip(&intensity) {
            if column.len() != n {
                return Err(Error::InvalidScheme(format!(
                    "intensity of {} has {} entries for {n} agents",
                    market.assignment_label(a),
                    column.len()
                )));
            }
            for (i, v) in column.iter().enumerate() {
                let agent = market.agent_at(i);
                let inside = market.involves(a, agent);
                if inside && !v.is_positive() {
                    return Err(Error::InvalidScheme(format!(
                        "intensity of {} for {} must be positive",
                        market.assignment_label(a),
                        market.agent_label(agent)
                    )));
                }
                if !inside && !v.is_zero() {
                    return Err(Error::InvalidScheme(format!(
                        "intensity of {} for {} must be zero: the agent is not part of it",
                        market.assignment_label(a),
                        market.agent_label(agent)
                    )));
                }
            }
        }
        Ok(PiScheme {
            capacity,
            intensity,
        })
    }

    /// Unit capacities and indicator intensities: the π-schedule matchings
    /// of this scheme are exactly the schedule matchings.
    pub fn unit(market: &Market) -> Self {
        let capacity = vec![frac::one(); market.agent_count()];
        let intensity = market
            .acceptable_assignments()
            .iter()
            .map(|a| {
                market
                    .agent_ids()
                    .map(|i| {
                        if market.involves(a, i) {
                            frac::one()
                        } else {
                            frac::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        PiScheme {
            capacity,
            intensity,
        }
    }

    pub fn capacity(&self) -> &[Rational] {
        &self.capacity
    }

    pub fn intensity(&self, assignment: usize) -> &[Rational] {
        &self.intensity[assignment]
    }

    pub fn intensities(&self) -> &[Vec<Rational>] {
        &self.intensity
    }

    /// Total load of agent `agent` (market index) under shares `t`.
    pub fn load(&self, t: &PiScheduleMatching, agent: usize) -> Rational {
        t.shares
            .iter()
            .zip(&self.intensity)
            .filter(|(s, _)| !s.is_zero())
            .map(|(s, col)| s * &col[agent])
            .sum()
    }
}

/// Time shares over the market's acceptable assignments, in their fixed
/// order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PiScheduleMatching {
    shares: Vec<Rational>,
}

impl PiScheduleMatching {
    pub fn new(shares: Vec<Rational>) -> Self {
        PiScheduleMatching { shares }
    }

    pub fn zero(len: usize) -> Self {
        PiScheduleMatching {
            shares: vec![frac::zero(); len],
        }
    }

    pub fn shares(&self) -> &[Rational] {
        &self.shares
    }

    pub fn share(&self, assignment: usize) -> &Rational {
        &self.shares[assignment]
    }

    /// Indices with a positive share.
    pub fn support(&self) -> Vec<usize> {
        (0..self.shares.len())
            .filter(|k| self.shares[*k].is_positive())
            .collect()
    }
}

fn check_shape(scheme: &PiScheme, t: &PiScheduleMatching) -> Result<()> {
    if t.shares.len() != scheme.intensity.len() {
        return Err(Error::ShareCount {
            expected: scheme.intensity.len(),
            found: t.shares.len(),
        });
    }
    if let Some(k) = t.shares.iter().position(|s| s.is_negative()) {
        return Err(Error::NegativeShare(k));
    }
    Ok(())
}

/// Whether every agent's load stays within its capacity.
pub fn is_feasible(scheme: &PiScheme, t: &PiScheduleMatching) -> Result<bool> {
    check_shape(scheme, t)?;
    Ok((0..scheme.capacity.len()).all(|i| scheme.load(t, i) <= scheme.capacity[i]))
}

/// Each agent's worst situation in a π-schedule matching. Agents that are not
/// full matched get the empty situation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WorstSituationProfile {
    firms: Vec<Assignment>,
    workers: Vec<Situation>,
    full_matched: Vec<bool>,
}

impl WorstSituationProfile {
    pub fn from_parts(firms: Vec<Assignment>, workers: Vec<Situation>, full_matched: Vec<bool>) -> Self {
        WorstSituationProfile {
            firms,
            workers,
            full_matched,
        }
    }

    /// The profile of a schedule in which nobody is full matched.
    pub fn all_empty(market: &Market) -> Self {
        WorstSituationProfile {
            firms: market.firm_ids().map(Assignment::empty).collect(),
            workers: vec![Situation::Empty; market.worker_count()],
            full_matched: vec![false; market.agent_count()],
        }
    }

    pub fn firm(&self, f: FirmId) -> &Assignment {
        &self.firms[f.0]
    }

    pub fn worker(&self, w: WorkerId) -> &Situation {
        &self.workers[w.0]
    }

    /// Full-matched flag by market agent index.
    pub fn is_full_matched(&self, agent: usize) -> bool {
        self.full_matched[agent]
    }

    pub fn full_matched(&self) -> &[bool] {
        &self.full_matched
    }
}

pub fn worst_situation_profile(
    market: &Market,
    scheme: &PiScheme,
    t: &PiScheduleMatching,
) -> Result<WorstSituationProfile> {
    check_shape(scheme, t)?;
    let acceptable = market.acceptable_assignments();
    let full_matched: Vec<bool> = (0..market.agent_count())
        .map(|i| scheme.load(t, i) == scheme.capacity[i])
        .collect();
    if let Some(i) = (0..market.agent_count()).find(|&i| scheme.load(t, i) > scheme.capacity[i]) {
        return Err(Error::Infeasible(i));
    }
    let positive: Vec<&Assignment> = t.support().into_iter().map(|k| &acceptable[k]).collect();

    let firms = market
        .firm_ids()
        .map(|f| {
            if !full_matched[market.agent_index(AgentId::Firm(f))] {
                return Assignment::empty(f);
            }
            positive
                .iter()
                .filter(|a| a.firm() == f)
                .min_by(|a, b| market.firm_compare(f, a, b).expect("own assignments"))
                .map(|a| (*a).clone())
                .unwrap_or_else(|| Assignment::empty(f))
        })
        .collect();
    let workers = market
        .worker_ids()
        .map(|w| {
            if !full_matched[market.agent_index(AgentId::Worker(w))] {
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
    Ok(WorstSituationProfile {
        firms,
        workers,
        full_matched,
    })
}

/// A full-time matching: a set of contracts with at most one per worker.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Matching {
    contracts: BTreeSet<ContractId>,
}

impl Matching {
    pub fn new(market: &Market, contracts: impl IntoIterator<Item = ContractId>) -> Result<Self> {
        let contracts: BTreeSet<ContractId> = contracts.into_iter().collect();
        let mut workers = BTreeSet::new();
        for c in &contracts {
            if c.0 >= market.contracts().len() {
                return Err(Error::InvalidMatching(format!("unknown contract #{}", c.0)));
            }
            let w = market.contract(*c).worker;
            if !workers.insert(w) {
                return Err(Error::InvalidMatching(format!(
                    "worker {} holds two contracts",
                    market.worker_label(w)
                )));
            }
        }
        Ok(Matching { contracts })
    }

    pub fn empty() -> Self {
        Matching::default()
    }

    pub fn contracts(&self) -> impl Iterator<Item = ContractId> + '_ {
        self.contracts.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.contracts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contracts.is_empty()
    }

    pub fn contains(&self, c: ContractId) -> bool {
        self.contracts.contains(&c)
    }

    pub fn firm_assignment(&self, market: &Market, f: FirmId) -> Assignment {
        Assignment::new(
            f,
            self.contracts
                .iter()
                .copied()
                .filter(|c| market.contract(*c).firm == f),
        )
    }

    pub fn worker_contract(&self, market: &Market, w: WorkerId) -> Option<ContractId> {
        self.contracts
            .iter()
            .copied()
            .find(|c| market.contract(*c).worker == w)
    }

    /// The worker's situation: her employer's whole assignment, or empty.
    pub fn situation(&self, market: &Market, w: WorkerId) -> Situation {
        match self.worker_contract(market, w) {
            None => Situation::Empty,
            Some(c) => Situation::employed(w, self.firm_assignment(market, market.contract(c).firm)),
        }
    }

    pub fn label(&self, market: &Market) -> String {
        let labels: Vec<&str> = self.contracts.iter().map(|c| market.contract_label(*c)).collect();
        format!("{{{}}}", labels.join(","))
    }
}

/// A firm assignment that blocks a matching or a schedule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub firm: FirmId,
    pub assignment: Assignment,
}

pub fn find_block_matching(market: &Market, matching: &Matching) -> Result<Option<Block>> {
    find_block_matching_bounded(market, matching, DEFAULT_FIRM_CONTRACT_BOUND)
}

/// Searches blocking assignments firm by firm in decreasing preference
/// order and returns the first one found.
///
/// Listed assignments come first, then the empty assignment. Unlisted
/// assignments rank below the empty one, so if the empty assignment does not
/// block, none of them can.
pub fn find_block_matching_bounded(
    market: &Market,
    matching: &Matching,
    max_firm_contracts: usize,
) -> Result<Option<Block>> {
    for f in market.firm_ids() {
        let own = market.contracts_of_firm(f).len();
        if own > max_firm_contracts {
            return Err(Error::BoundExceeded {
                what: "contracts of one firm",
                got: own,
                bound: max_firm_contracts,
            });
        }
        let current = matching.firm_assignment(market, f);
        let candidates = market
            .firm_prefs(f)
            .iter()
            .cloned()
            .chain(std::iter::once(Assignment::empty(f)));
        for y in candidates {
            if market.firm_compare(f, &y, &current)? != Ordering::Greater {
                break;
            }
            if workers_agree(market, matching, &y) {
                return Ok(Some(Block {
                    firm: f,
                    assignment: y,
                }));
            }
        }
    }
    Ok(None)
}

fn workers_agree(market: &Market, matching: &Matching, y: &Assignment) -> bool {
    y.contracts().iter().all(|c| {
        let w = market.contract(*c).worker;
        market.worker_contract_compare(Some(*c), matching.worker_contract(market, w)) != Ordering::Less
    })
}

/// Whether assignment `y` blocks the matching: its firm strictly prefers it
/// and none of its workers is worse off.
pub fn blocks_matching(market: &Market, matching: &Matching, y: &Assignment) -> Result<bool> {
    let f = y.firm();
    let current = matching.firm_assignment(market, f);
    Ok(market.firm_compare(f, y, &current)? == Ordering::Greater && workers_agree(market, matching, y))
}

pub fn is_stable_matching(market: &Market, matching: &Matching) -> Result<bool> {
    Ok(find_block_matching(market, matching)?.is_none())
}

fn blocks_schedule(market: &Market, profile: &WorstSituationProfile, z: &Assignment) -> bool {
    let f = z.firm();
    let firm_gains = market.firm_compare(f, z, profile.firm(f)).expect("own assignment") == Ordering::Greater;
    firm_gains
        && market.workers_of(z).into_iter().all(|w| {
            market
                .worker_compare_ext(w, &Situation::employed(w, z.clone()), profile.worker(w))
                .expect("own situation")
                == Ordering::Greater
        })
}

/// Every acceptable assignment that blocks `t`, in column order.
pub fn pi_schedule_blocks(market: &Market, scheme: &PiScheme, t: &PiScheduleMatching) -> Result<Vec<Block>> {
    let profile = worst_situation_profile(market, scheme, t)?;
    Ok(market
        .acceptable_assignments()
        .iter()
        .filter(|z| blocks_schedule(market, &profile, z))
        .map(|z| Block {
            firm: z.firm(),
            assignment: z.clone(),
        })
        .collect())
}

pub fn find_block_pi_schedule(
    market: &Market,
    scheme: &PiScheme,
    t: &PiScheduleMatching,
) -> Result<Option<Block>> {
    let profile = worst_situation_profile(market, scheme, t)?;
    Ok(market
        .acceptable_assignments()
        .iter()
        .find(|z| blocks_schedule(market, &profile, z))
        .map(|z| Block {
            firm: z.firm(),
            assignment: z.clone(),
        }))
}

pub fn is_stable_pi_schedule(market: &Market, scheme: &PiScheme, t: &PiScheduleMatching) -> Result<bool> {
    Ok(find_block_pi_schedule(market, scheme, t)?.is_none())
}

/// Whether every firm weakly prefers its assignment in `matching` to its
/// worst one in the profile, and every worker weakly prefers her situation
/// under the externality order.
pub fn dominates(market: &Market, profile: &WorstSituationProfile, matching: &Matching) -> bool {
    let firms_ok = market.firm_ids().all(|f| {
        market
            .firm_compare(f, &matching.firm_assignment(market, f), profile.firm(f))
            .expect("own assignment")
            != Ordering::Less
    });
    firms_ok
        && market.worker_ids().all(|w| {
            market
                .worker_compare_ext(w, &matching.situation(market, w), profile.worker(w))
                .expect("own situation")
                != Ordering::Less
        })
}

pub fn dominates_schedule(
    market: &Market,
    scheme: &PiScheme,
    matching: &Matching,
    t: &PiScheduleMatching,
) -> Result<bool> {
    let profile = worst_situation_profile(market, scheme, t)?;
    Ok(dominates(market, &profile, matching))
}
