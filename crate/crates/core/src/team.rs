//! Leader–follower team markets.
//!
//! Workers split into leaders and followers, each follower attached to one
//! leader. A team is one leader with some of her followers, and every firm
//! only finds teams acceptable. Such markets are concave under the unit
//! scheme; this module provides the leader-proposing deferred-acceptance
//! algorithm and the rounding that turns a schedule matching into a
//! dominating full-time matching.

use std::cmp::Ordering;
use std::collections::HashMap;

use num_traits::{One, Signed, Zero};

use crate::frac::{self, Rational};
use crate::market::{AgentId, Assignment, FirmId, Market, WorkerId};
use crate::schedule::{dominates_schedule, Matching, PiScheduleMatching, PiScheme};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeaderFollower {
    /// Per worker: `None` for a leader, `Some(l)` for a follower of `l`.
    leader_of: Vec<Option<WorkerId>>,
}

impl LeaderFollower {
    /// `leaders` and the followers named in `follows` must partition the
    /// workers, and every follower must follow a leader.
    pub fn new(market: &Market, leaders: &[WorkerId], follows: &[(WorkerId, WorkerId)]) -> Result<Self> {
        let label = |w: WorkerId| market.worker_label(w).to_string();
        let mut problems = Vec::new();
        let mut role: Vec<Option<Option<WorkerId>>> = vec![None; market.worker_count()];
        for &l in leaders {
            if role[l.0].is_some() {
                problems.push(format!("worker {} declared twice", label(l)));
            }
            role[l.0] = Some(None);
        }
        for &(o, l) in follows {
            if role[o.0].is_some() {
                problems.push(format!("worker {} is both leader and follower, or follows twice", label(o)));
            }
            if !leaders.contains(&l) {
                problems.push(format!("follower {} follows {}, who is not a leader", label(o), label(l)));
            }
            role[o.0] = Some(Some(l));
        }
        for w in market.worker_ids() {
            if role[w.0].is_none() {
                problems.push(format!("worker {} is neither leader nor follower", label(w)));
            }
        }
        if !problems.is_empty() {
            return Err(Error::NotTeamMarket(problems));
        }
        Ok(LeaderFollower {
            leader_of: role.into_iter().map(|r| r.flatten()).collect(),
        })
    }

    pub fn is_leader(&self, w: WorkerId) -> bool {
        self.leader_of[w.0].is_none()
    }

    /// The leader a follower is attached to; `None` for leaders.
    pub fn leader_of(&self, w: WorkerId) -> Option<WorkerId> {
        self.leader_of[w.0]
    }

    pub fn leaders(&self) -> Vec<WorkerId> {
        (0..self.leader_of.len())
            .map(WorkerId)
            .filter(|&w| self.is_leader(w))
            .collect()
    }

    /// `(follower, leader)` pairs in worker order.
    pub fn followers(&self) -> Vec<(WorkerId, WorkerId)> {
        self.leader_of
            .iter()
            .enumerate()
            .filter_map(|(o, l)| l.map(|l| (WorkerId(o), l)))
            .collect()
    }

    /// The leader of a worker set that forms a team.
    pub fn team_leader(&self, workers: &[WorkerId]) -> Option<WorkerId> {
        let leaders: Vec<WorkerId> = workers.iter().copied().filter(|&w| self.is_leader(w)).collect();
        match leaders.as_slice() {
            [l] if workers.iter().all(|&w| w == *l || self.leader_of(w) == Some(*l)) => Some(*l),
            _ => None,
        }
    }
}

/// Empty exactly when the market is basic and every acceptable assignment
/// hires a team.
pub fn validate_team_market(market: &Market, lf: &LeaderFollower) -> Vec<String> {
    let mut out = Vec::new();
    if !market.is_basic() {
        out.push("not basic: some firm and worker share two contracts".to_string());
    }
    for a in market.acceptable_assignments() {
        let workers = market.workers_of(a);
        if lf.team_leader(&workers).is_some() {
            continue;
        }
        let leaders = workers.iter().filter(|&&w| lf.is_leader(w)).count();
        let name = format!("{}'s {}", market.firm_label(a.firm()), market.assignment_label(a));
        out.push(match leaders {
            0 => format!("{name} has no leader"),
            1 => format!("{name} holds a follower of another leader"),
            k => format!("{name} has {k} leaders"),
        });
    }
    out
}

/// Firm `f`'s favourite team containing leader `l`, or `None` when every
/// such team is unacceptable to `f`.
pub fn favorite_team(market: &Market, lf: &LeaderFollower, f: FirmId, l: WorkerId) -> Option<Assignment> {
    // Every contract is acceptable to its worker, so the favourite is simply
    // the first listed team of `f` that contains `l`.
    market
        .firm_prefs(f)
        .iter()
        .find(|a| lf.team_leader(&market.workers_of(a)) == Some(l))
        .cloned()
}

fn leader_firm_order(market: &Market, l: WorkerId) -> Vec<FirmId> {
    let mut firms = Vec::new();
    for &c in market.worker_prefs(l) {
        let f = market.contract(c).firm;
        if !firms.contains(&f) {
            firms.push(f);
        }
    }
    firms
}

/// Leader-proposing deferred acceptance. Each round every free leader
/// proposes to her next firm; a firm keeps the applicant whose favourite
/// team it likes best among the new applicants and the leader it holds.
/// Finally every firm hires the favourite team of the leader it holds.
pub fn variant_da(market: &Market, lf: &LeaderFollower) -> Result<Matching> {
    let leaders = lf.leaders();
    let order: HashMap<WorkerId, Vec<FirmId>> = leaders.iter().map(|&l| (l, leader_firm_order(market, l))).collect();
    let mut next: HashMap<WorkerId, usize> = leaders.iter().map(|&l| (l, 0)).collect();
    let mut held: Vec<Option<(WorkerId, Assignment)>> = vec![None; market.firm_count()];
    let mut free: Vec<WorkerId> = leaders.clone();

    while !free.is_empty() {
        let mut proposals: Vec<Vec<WorkerId>> = vec![Vec::new(); market.firm_count()];
        let mut still_free = Vec::new();
        for l in free {
            let i = next[&l];
            if let Some(&f) = order[&l].get(i) {
                next.insert(l, i + 1);
                proposals[f.0].push(l);
            }
        }
        for f in market.firm_ids() {
            if proposals[f.0].is_empty() {
                continue;
            }
            let mut candidates: Vec<(WorkerId, Assignment)> = held[f.0].take().into_iter().collect();
            for &l in &proposals[f.0] {
                match favorite_team(market, lf, f, l) {
                    Some(team) => candidates.push((l, team)),
                    None => still_free.push(l),
                }
            }
            let mut best: Option<(WorkerId, Assignment)> = None;
            for (l, team) in candidates {
                match &best {
                    Some((_, current)) if market.firm_compare(f, &team, current)? != Ordering::Greater => {
                        if market.firm_compare(f, &team, current)? == Ordering::Equal {
                            return Err(Error::Internal("two leaders share a favourite team".into()));
                        }
                        still_free.push(l);
                    }
                    _ => {
                        if let Some((loser, _)) = best.take() {
                            still_free.push(loser);
                        }
                        best = Some((l, team));
                    }
                }
            }
            held[f.0] = best;
        }
        still_free.retain(|l| next[l] < order[l].len());
        free = still_free;
    }

    let contracts = held
        .into_iter()
        .flatten()
        .flat_map(|(_, team)| team.contracts().to_vec());
    Matching::new(market, contracts)
}

/// Edge of the support graph: a coalition between a firm and a leader, or
/// the vacancy of a single firm or leader.
#[derive(Debug, Clone, Copy)]
enum Edge {
    Coalition { column: usize, firm: usize, leader: usize },
    Vacant { vertex: usize },
}

impl Edge {
    /// Endpoints, with `ground` standing in for the free end of a vacancy.
    fn ends(&self, ground: usize) -> (usize, usize) {
        match *self {
            Edge::Coalition { firm, leader, .. } => (firm, leader),
            Edge::Vacant { vertex } => (vertex, ground),
        }
    }
}

fn is_fractional(v: &Rational) -> bool {
    v.is_positive() && v < &Rational::one()
}

/// A cycle of fractional edges, as a list of edge indices in traversal
/// order starting from `ground` when the cycle passes through it.
fn fractional_cycle(edges: &[Edge], value: &[Rational], vertices: usize) -> Option<Vec<usize>> {
    let ground = vertices;
    let mut adjacency: Vec<Vec<(usize, usize)>> = vec![Vec::new(); vertices + 1];
    for (e, edge) in edges.iter().enumerate() {
        if is_fractional(&value[e]) {
            let (a, b) = edge.ends(ground);
            adjacency[a].push((b, e));
            adjacency[b].push((a, e));
        }
    }
    let mut depth: Vec<Option<usize>> = vec![None; vertices + 1];
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; vertices + 1];
    let roots = std::iter::once(ground).chain(0..vertices);
    for root in roots {
        if depth[root].is_some() || adjacency[root].is_empty() {
            continue;
        }
        depth[root] = Some(0);
        let mut stack = vec![(root, 0usize)];
        while let Some(&mut (v, ref mut cursor)) = stack.last_mut() {
            let Some(&(u, e)) = adjacency[v].get(*cursor) else {
                stack.pop();
                continue;
            };
            *cursor += 1;
            if parent[v].is_some_and(|(_, pe)| pe == e) {
                continue;
            }
            match depth[u] {
                None => {
                    depth[u] = Some(depth[v].unwrap() + 1);
                    parent[u] = Some((v, e));
                    stack.push((u, 0));
                }
                Some(du) if du < depth[v].unwrap() => {
                    // Back edge v–u closes the tree path u … v.
                    let mut cycle = vec![e];
                    let mut x = v;
                    while x != u {
                        let (p, pe) = parent[x].unwrap();
                        cycle.push(pe);
                        x = p;
                    }
                    // The cycle now runs u → v (reversed) → u; start it at
                    // the ground vertex if it is on it.
                    let mut nodes = vec![u];
                    let mut cur = u;
                    for &edge in &cycle {
                        let (a, b) = edges[edge].ends(ground);
                        cur = if a == cur { b } else { a };
                        nodes.push(cur);
                    }
                    if let Some(g) = nodes.iter().position(|&n| n == ground) {
                        cycle.rotate_left(g);
                    }
                    return Some(cycle);
                }
                Some(_) => {}
            }
        }
    }
    None
}

/// Rounds a unit-scheme schedule matching of a team market to a full-time
/// matching that dominates it.
///
/// Every positive coalition is an edge between its firm and its leader, and
/// every firm or leader with vacant time gets a pendant edge. The values
/// satisfy one equality per firm and leader, and that constraint matrix is
/// the incidence matrix of a bipartite graph. Shifting value alternately
/// around cycles of fractional edges keeps all constraints and reaches an
/// integral point supported on the original support.
pub fn round_schedule_to_matching(market: &Market, lf: &LeaderFollower, t: &PiScheduleMatching) -> Result<Matching> {
    let unit = PiScheme::unit(market);
    if !crate::schedule::is_feasible(&unit, t)? {
        return Err(Error::InvalidMatching("schedule exceeds some agent's unit time".into()));
    }
    let acceptable = market.acceptable_assignments();
    let leaders = lf.leaders();
    let firm_count = market.firm_count();
    let vertex_of_leader: HashMap<WorkerId, usize> =
        leaders.iter().enumerate().map(|(i, &l)| (l, firm_count + i)).collect();
    let vertices = firm_count + leaders.len();

    let mut edges = Vec::new();
    let mut value = Vec::new();
    for k in t.support() {
        let a = &acceptable[k];
        let leader = lf
            .team_leader(&market.workers_of(a))
            .ok_or_else(|| Error::NotTeamMarket(vec![format!("{} is not a team", market.assignment_label(a))]))?;
        edges.push(Edge::Coalition {
            column: k,
            firm: a.firm().0,
            leader: vertex_of_leader[&leader],
        });
        value.push(t.share(k).clone());
    }
    let vacancy = |agent: AgentId| frac::one() - unit.load(t, market.agent_index(agent));
    let with_vertex = market
        .firm_ids()
        .map(|f| (AgentId::Firm(f), f.0))
        .chain(leaders.iter().map(|&l| (AgentId::Worker(l), vertex_of_leader[&l])));
    for (agent, vertex) in with_vertex {
        let slack = vacancy(agent);
        if slack.is_positive() {
            edges.push(Edge::Vacant { vertex });
            value.push(slack);
        }
    }

    while let Some(cycle) = fractional_cycle(&edges, &value, vertices) {
        let theta = cycle
            .iter()
            .enumerate()
            .map(|(i, &e)| if i % 2 == 0 { frac::one() - &value[e] } else { value[e].clone() })
            .min()
            .expect("cycles are nonempty");
        for (i, &e) in cycle.iter().enumerate() {
            if i % 2 == 0 {
                value[e] += &theta;
            } else {
                value[e] -= &theta;
            }
        }
    }
    if value.iter().any(is_fractional) {
        return Err(Error::Internal("fractional edges left without a cycle".into()));
    }

    let contracts = edges
        .iter()
        .zip(&value)
        .filter(|(_, v)| v.is_one())
        .filter_map(|(e, _)| match *e {
            Edge::Coalition { column, .. } => Some(acceptable[column].contracts().to_vec()),
            Edge::Vacant { .. } => None,
        })
        .flatten();
    let matching = Matching::new(market, contracts)?;
    if !dominates_schedule(market, &unit, &matching, t)? {
        return Err(Error::Internal("rounded matching does not dominate the schedule".into()));
    }
    Ok(matching)
}

/// Zero shares with the positive ones replaced, for tests and callers that
/// build schedules by label.
pub fn schedule_from_shares(market: &Market, shares: &[(&Assignment, Rational)]) -> Result<PiScheduleMatching> {
    let mut t = vec![Rational::zero(); market.acceptable_assignments().len()];
    for (a, v) in shares {
        let k = market
            .acceptable_index(a)
            .ok_or_else(|| Error::InvalidMatching(format!("{} is not acceptable", market.assignment_label(a))))?;
        t[k] = v.clone();
    }
    Ok(PiScheduleMatching::new(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::frac::ratio;
    use crate::schedule::is_stable_matching;

    fn worker(m: &Market, label: &str) -> WorkerId {
        m.find_worker(label).unwrap()
    }

    fn team(m: &Market, contracts: &[&str]) -> Assignment {
        let ids: Vec<_> = contracts.iter().map(|c| m.find_contract(c).unwrap()).collect();
        Assignment::new(m.contract(ids[0]).firm, ids)
    }

    #[test]
    fn example_market_is_a_team_market() {
        let file = fixtures::teams();
        let lf = file.teams.as_ref().unwrap();
        assert!(validate_team_market(&file.market, lf).is_empty());
        assert_eq!(lf.leaders().len(), 2);
        assert_eq!(lf.leader_of(worker(&file.market, "o3")), Some(worker(&file.market, "l2")));
    }

    #[test]
    fn two_leaders_in_one_assignment() {
        let m2 = fixtures::m2().market;
        let lf = LeaderFollower::new(&m2, &[WorkerId(0), WorkerId(1)], &[]).unwrap();
        let problems = validate_team_market(&m2, &lf);
        assert_eq!(problems, vec!["f1's {f1w1,f1w2} has 2 leaders".to_string()]);
    }

    #[test]
    fn structure_must_partition_workers() {
        let m2 = fixtures::m2().market;
        assert!(LeaderFollower::new(&m2, &[WorkerId(0)], &[]).is_err());
        assert!(LeaderFollower::new(&m2, &[WorkerId(0)], &[(WorkerId(1), WorkerId(1))]).is_err());
        assert!(LeaderFollower::new(&m2, &[WorkerId(0)], &[(WorkerId(1), WorkerId(0))]).is_ok());
    }

    #[test]
    fn favourite_teams() {
        let file = fixtures::teams();
        let (m, lf) = (&file.market, file.teams.as_ref().unwrap());
        let f1 = m.find_firm("f1").unwrap();
        let f2 = m.find_firm("f2").unwrap();
        assert_eq!(
            favorite_team(m, lf, f1, worker(m, "l2")),
            Some(team(m, &["f1l2", "f1o2", "f1o3"]))
        );
        assert_eq!(favorite_team(m, lf, f2, worker(m, "l1")), Some(team(m, &["f2l1", "f2o1"])));
    }

    #[test]
    fn favourite_team_absent_when_no_listed_team_has_the_leader() {
        let m2 = fixtures::m2().market;
        let lf = LeaderFollower::new(&m2, &[WorkerId(0), WorkerId(1)], &[]).unwrap();
        // f1 lists {f1w1,f1w2}, which is no team, and {f1w2}.
        assert_eq!(favorite_team(&m2, &lf, FirmId(0), WorkerId(0)), None);
        assert_eq!(favorite_team(&m2, &lf, FirmId(0), WorkerId(1)), Some(team(&m2, &["f1w2"])));
    }

    #[test]
    fn da_on_example() {
        let file = fixtures::teams();
        let (m, lf) = (&file.market, file.teams.as_ref().unwrap());
        let out = variant_da(m, lf).unwrap();
        let expected = Matching::new(
            m,
            ["f1l2", "f1o2", "f1o3", "f2l1", "f2o1"].iter().map(|c| m.find_contract(c).unwrap()),
        )
        .unwrap();
        assert_eq!(out, expected);
        assert!(is_stable_matching(m, &out).unwrap());
    }

    #[test]
    fn rounding_keeps_integral_schedules() {
        let file = fixtures::teams();
        let (m, lf) = (&file.market, file.teams.as_ref().unwrap());
        let y = team(m, &["f1l1", "f1o1"]);
        let z = team(m, &["f2l2", "f2o2"]);
        let t = schedule_from_shares(m, &[(&y, frac::one()), (&z, frac::one())]).unwrap();
        let out = round_schedule_to_matching(m, lf, &t).unwrap();
        let expected: Vec<_> = y.contracts().iter().chain(z.contracts()).copied().collect();
        assert_eq!(out, Matching::new(m, expected).unwrap());
    }

    #[test]
    fn rounding_resolves_split_leader() {
        let file = fixtures::teams();
        let (m, lf) = (&file.market, file.teams.as_ref().unwrap());
        let y = team(m, &["f1l1", "f1o1"]);
        let z = team(m, &["f2l1", "f2o1"]);
        let t = schedule_from_shares(m, &[(&y, ratio(1, 2)), (&z, ratio(1, 2))]).unwrap();
        let out = round_schedule_to_matching(m, lf, &t).unwrap();
        let as_y = Matching::new(m, y.contracts().to_vec()).unwrap();
        let as_z = Matching::new(m, z.contracts().to_vec()).unwrap();
        assert!(out == as_y || out == as_z);
        assert!(dominates_schedule(m, &PiScheme::unit(m), &out, &t).unwrap());
    }

    #[test]
    fn rounding_all_vacant_is_empty() {
        let file = fixtures::teams();
        let (m, lf) = (&file.market, file.teams.as_ref().unwrap());
        let t = PiScheduleMatching::zero(m.acceptable_assignments().len());
        assert!(round_schedule_to_matching(m, lf, &t).unwrap().is_empty());
    }

    #[test]
    fn rounding_rejects_overloaded_schedule() {
        let file = fixtures::teams();
        let (m, lf) = (&file.market, file.teams.as_ref().unwrap());
        let y = team(m, &["f1l1", "f1o1"]);
        let t = schedule_from_shares(m, &[(&y, ratio(3, 2))]).unwrap();
        assert!(round_schedule_to_matching(m, lf, &t).is_err());
    }
}
