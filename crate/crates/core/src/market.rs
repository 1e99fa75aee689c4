//! Market model: agents, contracts, firm assignments, situations and the two
//! preference orders used throughout the crate.
//!
//! Firm preferences are given as explicit lists of acceptable assignments,
//! best first. The empty assignment sits just below the last listed one and
//! every unlisted non-empty assignment sits below the empty one, ordered
//! among themselves by their sorted contract labels.
//!
//! Worker preferences are lists of the worker's own contracts, best first.
//! [`Market::worker_compare_ext`] refines them with artificial externalities:
//! between two situations holding the same own contract the worker sides
//! with her employer's ranking of the two assignments.

use std::cmp::{Ordering, Reverse};
use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FirmId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WorkerId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ContractId(pub usize);

/// An agent of either side. Agents are indexed firms first, then workers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AgentId {
    Firm(FirmId),
    Worker(WorkerId),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Contract {
    pub label: String,
    pub firm: FirmId,
    pub worker: WorkerId,
}

/// A set of contracts of one firm. The empty assignment of a firm is
/// represented with an empty contract list.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    firm: FirmId,
    contracts: Vec<ContractId>,
}

impl Assignment {
    pub fn new(firm: FirmId, contracts: impl IntoIterator<Item = ContractId>) -> Self {
        let mut contracts: Vec<ContractId> = contracts.into_iter().collect();
        contracts.sort_unstable();
        contracts.dedup();
        Assignment { firm, contracts }
    }

    pub fn empty(firm: FirmId) -> Self {
        Assignment {
            firm,
            contracts: Vec::new(),
        }
    }

    pub fn firm(&self) -> FirmId {
        self.firm
    }

    pub fn contracts(&self) -> &[ContractId] {
        &self.contracts
    }

    pub fn is_empty(&self) -> bool {
        self.contracts.is_empty()
    }

    pub fn contains(&self, contract: ContractId) -> bool {
        self.contracts.binary_search(&contract).is_ok()
    }
}

/// A worker's situation: unemployed, or employed inside a firm assignment
/// that holds one of her contracts.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Situation {
    Empty,
    Employed { worker: WorkerId, assignment: Assignment },
}

impl Situation {
    pub fn employed(worker: WorkerId, assignment: Assignment) -> Self {
        Situation::Employed { worker, assignment }
    }

    pub fn assignment(&self) -> Option<&Assignment> {
        match self {
            Situation::Empty => None,
            Situation::Employed { assignment, .. } => Some(assignment),
        }
    }
}

/// A broken market invariant, named by the offending object.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    TooFewFirms(usize),
    TooFewWorkers(usize),
    DuplicateLabel(String),
    UnknownAgent { contract: String },
    PreferenceCount { role: &'static str, expected: usize, found: usize },
    UnknownContract { owner: String },
    ForeignContract { firm: String, assignment: String },
    DoubleContract { firm: String, assignment: String, worker: String },
    EmptyListed { firm: String },
    DuplicateAssignment { firm: String, assignment: String },
    WorkerPrefMissing { worker: String, contract: String },
    WorkerPrefDuplicate { worker: String, contract: String },
    WorkerPrefForeign { worker: String, contract: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::TooFewFirms(1) => write!(f, "single-firm market"),
            Violation::TooFewFirms(n) => write!(f, "market has {n} firms, at least 2 required"),
            Violation::TooFewWorkers(1) => write!(f, "single-worker market"),
            Violation::TooFewWorkers(n) => {
                write!(f, "market has {n} workers, at least 2 required")
            }
            Violation::DuplicateLabel(label) => write!(f, "label {label} used twice"),
            Violation::UnknownAgent { contract } => {
                write!(f, "contract {contract} names an unknown agent")
            }
            Violation::PreferenceCount {
                role,
                expected,
                found,
            } => write!(f, "{found} {role} preference lists for {expected} {role}s"),
            Violation::UnknownContract { owner } => {
                write!(f, "preference list of {owner} names an unknown contract")
            }
            Violation::ForeignContract { firm, assignment } => {
                write!(f, "assignment {assignment} of {firm} holds another firm's contract")
            }
            Violation::DoubleContract {
                firm,
                assignment,
                worker,
            } => write!(
                f,
                "assignment {assignment} of {firm} holds two contracts of worker {worker}"
            ),
            Violation::EmptyListed { firm } => {
                write!(f, "{firm} lists the empty assignment as acceptable")
            }
            Violation::DuplicateAssignment { firm, assignment } => {
                write!(f, "{firm} lists assignment {assignment} twice")
            }
            Violation::WorkerPrefMissing { worker, contract } => {
                write!(f, "worker {worker} does not rank her contract {contract}")
            }
            Violation::WorkerPrefDuplicate { worker, contract } => {
                write!(f, "worker {worker} ranks contract {contract} twice")
            }
            Violation::WorkerPrefForeign { worker, contract } => {
                write!(f, "worker {worker} ranks contract {contract} of another worker")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Market {
    firms: Vec<String>,
    workers: Vec<String>,
    contracts: Vec<Contract>,
    firm_prefs: Vec<Vec<Assignment>>,
    worker_prefs: Vec<Vec<ContractId>>,
    firm_rank: Vec<HashMap<Vec<ContractId>, usize>>,
    contract_rank: Vec<Option<usize>>,
    acceptable: Vec<Assignment>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum FirmRank<'a> {
    Unlisted(Vec<&'a str>),
    Empty,
    Listed(Reverse<usize>),
}

impl Market {
    /// Builds a market and rejects it unless [`Market::validate`] is clean.
    pub fn new(
        firms: Vec<String>,
        workers: Vec<String>,
        contracts: Vec<Contract>,
        firm_prefs: Vec<Vec<Assignment>>,
        worker_prefs: Vec<Vec<ContractId>>,
    ) -> Result<Self> {
        let market = Self::from_parts(firms, workers, contracts, firm_prefs, worker_prefs);
        let violations = market.validate();
        if violations.is_empty() {
            Ok(market)
        } else {
            Err(Error::InvalidMarket(violations))
        }
    }

    /// Builds a market without checking its invariants. Out-of-range ids are
    /// tolerated so that [`Market::validate`] can report them.
    pub fn from_parts(
        firms: Vec<String>,
        workers: Vec<String>,
        contracts: Vec<Contract>,
        firm_prefs: Vec<Vec<Assignment>>,
        worker_prefs: Vec<Vec<ContractId>>,
    ) -> Self {
        let firm_rank = (0..firms.len())
            .map(|f| {
                let mut ranks = HashMap::new();
                for (pos, a) in firm_prefs.get(f).into_iter().flatten().enumerate() {
                    ranks.entry(a.contracts.clone()).or_insert(pos);
                }
                ranks
            })
            .collect();
        let mut contract_rank = vec![None; contracts.len()];
        for (w, list) in worker_prefs.iter().enumerate() {
            for (pos, c) in list.iter().enumerate() {
                if let Some(slot) = contract_rank.get_mut(c.0) {
                    if contracts[c.0].worker.0 == w && slot.is_none() {
                        *slot = Some(pos);
                    }
                }
            }
        }
        let acceptable = firm_prefs.iter().flatten().cloned().collect();
        Market {
            firms,
            workers,
            contracts,
            firm_prefs,
            worker_prefs,
            firm_rank,
            contract_rank,
            acceptable,
        }
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.firms.len() < 2 {
            out.push(Violation::TooFewFirms(self.firms.len()));
        }
        if self.workers.len() < 2 {
            out.push(Violation::TooFewWorkers(self.workers.len()));
        }
        let mut seen = HashSet::new();
        for label in self
            .firms
            .iter()
            .chain(&self.workers)
            .chain(self.contracts.iter().map(|c| &c.label))
        {
            if !seen.insert(label.as_str()) {
                out.push(Violation::DuplicateLabel(label.clone()));
            }
        }
        for c in &self.contracts {
            if c.firm.0 >= self.firms.len() || c.worker.0 >= self.workers.len() {
                out.push(Violation::UnknownAgent {
                    contract: c.label.clone(),
                });
            }
        }
        if self.firm_prefs.len() != self.firms.len() {
            out.push(Violation::PreferenceCount {
                role: "firm",
                expected: self.firms.len(),
                found: self.firm_prefs.len(),
            });
        }
        if self.worker_prefs.len() != self.workers.len() {
            out.push(Violation::PreferenceCount {
                role: "worker",
                expected: self.workers.len(),
                found: self.worker_prefs.len(),
            });
        }
        for (f, list) in self.firm_prefs.iter().enumerate() {
            let firm = self.firms.get(f).cloned().unwrap_or_else(|| format!("#{f}"));
            let mut listed = HashSet::new();
            for a in list {
                let label = self.assignment_label(a);
                if a.contracts.iter().any(|c| c.0 >= self.contracts.len()) {
                    out.push(Violation::UnknownContract {
                        owner: firm.clone(),
                    });
                    continue;
                }
                if a.is_empty() {
                    out.push(Violation::EmptyListed { firm: firm.clone() });
                }
                if a.firm.0 != f || a.contracts.iter().any(|c| self.contracts[c.0].firm.0 != f) {
                    out.push(Violation::ForeignContract {
                        firm: firm.clone(),
                        assignment: label.clone(),
                    });
                }
                let mut workers = HashSet::new();
                for c in &a.contracts {
                    let w = self.contracts[c.0].worker;
                    if !workers.insert(w) {
                        out.push(Violation::DoubleContract {
                            firm: firm.clone(),
                            assignment: label.clone(),
                            worker: self.worker_name(w),
                        });
                    }
                }
                if !listed.insert(a.contracts.clone()) {
                    out.push(Violation::DuplicateAssignment {
                        firm: firm.clone(),
                        assignment: label,
                    });
                }
            }
        }
        for (w, list) in self.worker_prefs.iter().enumerate() {
            let worker = self.worker_name(WorkerId(w));
            let mut ranked = HashSet::new();
            for c in list {
                let Some(contract) = self.contracts.get(c.0) else {
                    out.push(Violation::UnknownContract {
                        owner: worker.clone(),
                    });
                    continue;
                };
                if contract.worker.0 != w {
                    out.push(Violation::WorkerPrefForeign {
                        worker: worker.clone(),
                        contract: contract.label.clone(),
                    });
                } else if !ranked.insert(*c) {
                    out.push(Violation::WorkerPrefDuplicate {
                        worker: worker.clone(),
                        contract: contract.label.clone(),
                    });
                }
            }
        }
        for (i, c) in self.contracts.iter().enumerate() {
            let ranked = self
                .worker_prefs
                .get(c.worker.0)
                .is_some_and(|list| list.contains(&ContractId(i)));
            if c.worker.0 < self.workers.len() && !ranked {
                out.push(Violation::WorkerPrefMissing {
                    worker: self.worker_name(c.worker),
                    contract: c.label.clone(),
                });
            }
        }
        out
    }

    pub fn firm_count(&self) -> usize {
        self.firms.len()
    }

    pub fn worker_count(&self) -> usize {
        self.workers.len()
    }

    pub fn agent_count(&self) -> usize {
        self.firms.len() + self.workers.len()
    }

    pub fn firm_ids(&self) -> impl Iterator<Item = FirmId> {
        (0..self.firms.len()).map(FirmId)
    }

    pub fn worker_ids(&self) -> impl Iterator<Item = WorkerId> {
        (0..self.workers.len()).map(WorkerId)
    }

    /// All agents in index order: firms first, then workers.
    pub fn agent_ids(&self) -> impl Iterator<Item = AgentId> + '_ {
        (0..self.agent_count()).map(|i| self.agent_at(i))
    }

    pub fn agent_index(&self, agent: AgentId) -> usize {
        match agent {
            AgentId::Firm(f) => f.0,
            AgentId::Worker(w) => self.firms.len() + w.0,
        }
    }

    pub fn agent_at(&self, index: usize) -> AgentId {
        if index < self.firms.len() {
            AgentId::Firm(FirmId(index))
        } else {
            AgentId::Worker(WorkerId(index - self.firms.len()))
        }
    }

    pub fn firm_label(&self, f: FirmId) -> &str {
        &self.firms[f.0]
    }

    pub fn worker_label(&self, w: WorkerId) -> &str {
        &self.workers[w.0]
    }

    pub fn agent_label(&self, agent: AgentId) -> &str {
        match agent {
            AgentId::Firm(f) => self.firm_label(f),
            AgentId::Worker(w) => self.worker_label(w),
        }
    }

    fn worker_name(&self, w: WorkerId) -> String {
        self.workers
            .get(w.0)
            .cloned()
            .unwrap_or_else(|| format!("#{}", w.0))
    }

    pub fn find_firm(&self, label: &str) -> Option<FirmId> {
        self.firms.iter().position(|l| l == label).map(FirmId)
    }

    pub fn find_worker(&self, label: &str) -> Option<WorkerId> {
        self.workers.iter().position(|l| l == label).map(WorkerId)
    }

    pub fn find_agent(&self, label: &str) -> Option<AgentId> {
        self.find_firm(label)
            .map(AgentId::Firm)
            .or_else(|| self.find_worker(label).map(AgentId::Worker))
    }

    pub fn find_contract(&self, label: &str) -> Option<ContractId> {
        self.contracts
            .iter()
            .position(|c| c.label == label)
            .map(ContractId)
    }

    pub fn contracts(&self) -> &[Contract] {
        &self.contracts
    }

    pub fn contract(&self, id: ContractId) -> &Contract {
        &self.contracts[id.0]
    }

    pub fn contracts_of_firm(&self, f: FirmId) -> Vec<ContractId> {
        self.contract_ids().filter(|c| self.contract(*c).firm == f).collect()
    }

    pub fn contracts_of_worker(&self, w: WorkerId) -> Vec<ContractId> {
        self.contract_ids().filter(|c| self.contract(*c).worker == w).collect()
    }

    fn contract_ids(&self) -> impl Iterator<Item = ContractId> {
        (0..self.contracts.len()).map(ContractId)
    }

    pub fn firm_prefs(&self, f: FirmId) -> &[Assignment] {
        &self.firm_prefs[f.0]
    }

    pub fn worker_prefs(&self, w: WorkerId) -> &[ContractId] {
        &self.worker_prefs[w.0]
    }

    /// Every firm's acceptable assignments: firms in declaration order, each
    /// firm's list in preference order. This is the fixed column order used
    /// by schedules and by the Scarf matrices.
    pub fn acceptable_assignments(&self) -> &[Assignment] {
        &self.acceptable
    }

    pub fn acceptable_index(&self, assignment: &Assignment) -> Option<usize> {
        self.acceptable.iter().position(|a| a == assignment)
    }

    /// True iff at most one contract exists between each firm-worker pair.
    pub fn is_basic(&self) -> bool {
        let mut pairs = HashSet::new();
        self.contracts.iter().all(|c| pairs.insert((c.firm, c.worker)))
    }

    pub fn workers_of(&self, assignment: &Assignment) -> Vec<WorkerId> {
        assignment
            .contracts
            .iter()
            .map(|c| self.contract(*c).worker)
            .collect()
    }

    /// The agents with a contract in the assignment; empty for the empty
    /// assignment.
    pub fn agents_of(&self, assignment: &Assignment) -> Vec<AgentId> {
        if assignment.is_empty() {
            return Vec::new();
        }
        std::iter::once(AgentId::Firm(assignment.firm))
            .chain(self.workers_of(assignment).into_iter().map(AgentId::Worker))
            .collect()
    }

    pub fn involves(&self, assignment: &Assignment, agent: AgentId) -> bool {
        match agent {
            AgentId::Firm(f) => !assignment.is_empty() && assignment.firm == f,
            AgentId::Worker(w) => self.contract_for(assignment, w).is_some(),
        }
    }

    /// The contract of worker `w` inside the assignment, if any.
    pub fn contract_for(&self, assignment: &Assignment, w: WorkerId) -> Option<ContractId> {
        assignment
            .contracts
            .iter()
            .copied()
            .find(|c| self.contract(*c).worker == w)
    }

    pub fn contract_label(&self, c: ContractId) -> &str {
        self.contracts
            .get(c.0)
            .map(|c| c.label.as_str())
            .unwrap_or("?")
    }

    /// `{a,b}` with contract labels in declaration order.
    pub fn assignment_label(&self, assignment: &Assignment) -> String {
        let labels: Vec<&str> = assignment
            .contracts
            .iter()
            .map(|c| self.contract_label(*c))
            .collect();
        format!("{{{}}}", labels.join(","))
    }

    pub fn situation_label(&self, situation: &Situation) -> String {
        match situation.assignment() {
            None => "empty".to_string(),
            Some(a) => format!("{}@{}", self.assignment_label(a), self.firm_label(a.firm)),
        }
    }

    fn firm_rank(&self, assignment: &Assignment) -> FirmRank<'_> {
        if assignment.is_empty() {
            return FirmRank::Empty;
        }
        match self.firm_rank[assignment.firm.0].get(&assignment.contracts) {
            Some(pos) => FirmRank::Listed(Reverse(*pos)),
            None => {
                let mut labels: Vec<&str> = assignment
                    .contracts
                    .iter()
                    .map(|c| self.contract_label(*c))
                    .collect();
                labels.sort_unstable();
                FirmRank::Unlisted(labels)
            }
        }
    }

    /// Compares two assignments of firm `f` under its strict order.
    /// `Greater` means `y` is preferred to `z`.
    pub fn firm_compare(&self, f: FirmId, y: &Assignment, z: &Assignment) -> Result<Ordering> {
        for a in [y, z] {
            if a.firm != f {
                return Err(Error::ForeignAssignment {
                    expected: f.0,
                    found: a.firm.0,
                });
            }
        }
        Ok(self.firm_rank(y).cmp(&self.firm_rank(z)))
    }

    /// Listed position (0 = best) of the assignment in its firm's list.
    pub fn firm_position(&self, assignment: &Assignment) -> Option<usize> {
        self.firm_rank[assignment.firm.0]
            .get(&assignment.contracts)
            .copied()
    }

    /// Compares two own contracts (or unemployment) of a worker.
    pub fn worker_contract_compare(&self, y: Option<ContractId>, z: Option<ContractId>) -> Ordering {
        let key = |c: Option<ContractId>| {
            c.map(|c| Reverse(self.contract_rank[c.0].unwrap_or(usize::MAX)))
        };
        key(y).cmp(&key(z))
    }

    fn own_contract(&self, w: WorkerId, situation: &Situation) -> Result<Option<ContractId>> {
        match situation {
            Situation::Empty => Ok(None),
            Situation::Employed { worker, assignment } => {
                if *worker != w {
                    return Err(Error::ForeignSituation(w.0));
                }
                self.contract_for(assignment, w)
                    .map(Some)
                    .ok_or(Error::ForeignSituation(w.0))
            }
        }
    }

    /// The worker order with artificial externalities: first by the worker's
    /// own contract, then, for the same contract, by the employer's order.
    pub fn worker_compare_ext(&self, w: WorkerId, y: &Situation, z: &Situation) -> Result<Ordering> {
        let (cy, cz) = (self.own_contract(w, y)?, self.own_contract(w, z)?);
        match self.worker_contract_compare(cy, cz) {
            Ordering::Equal => match (y.assignment(), z.assignment()) {
                (Some(a), Some(b)) => self.firm_compare(a.firm, a, b),
                _ => Ok(Ordering::Equal),
            },
            other => Ok(other),
        }
    }

    /// Situation of worker `w` inside `assignment` (empty if she has no
    /// contract there).
    pub fn situation_in(&self, w: WorkerId, assignment: &Assignment) -> Situation {
        if self.contract_for(assignment, w).is_some() {
            Situation::employed(w, assignment.clone())
        } else {
            Situation::Empty
        }
    }

    /// Every situation of `w` drawn from the acceptable assignments, plus the
    /// empty one, sorted ascending by the externality order.
    pub fn worker_situations(&self, w: WorkerId) -> Vec<Situation> {
        let mut out = vec![Situation::Empty];
        out.extend(
            self.acceptable
                .iter()
                .filter(|a| self.contract_for(a, w).is_some())
                .map(|a| Situation::employed(w, a.clone())),
        );
        out.sort_by(|a, b| {
            self.worker_compare_ext(w, a, b)
                .expect("situations are built for this worker")
        });
        out
    }
}
