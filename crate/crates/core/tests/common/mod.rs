//! Random market generators and oracles written directly from the
//! definitions, independent of the library's comparison code.
#![allow(dead_code)]

use concave_match::frac::{self, Rational};
use concave_match::market::{Assignment, Contract, ContractId, FirmId, Market, WorkerId};
use concave_match::schedule::{Matching, PiScheduleMatching, PiScheme};
use concave_match::tableau::{maximize, LpOutcome};
use concave_match::team::LeaderFollower;
use num_traits::Signed;
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Subsets of `contracts` holding at most one contract per worker.
fn valid_assignments(contracts: &[Contract], own: &[ContractId]) -> Vec<Vec<ContractId>> {
    let mut out = Vec::new();
    for mask in 1u32..1 << own.len() {
        let chosen: Vec<ContractId> = (0..own.len()).filter(|b| mask >> b & 1 == 1).map(|b| own[b]).collect();
        let mut workers: Vec<WorkerId> = chosen.iter().map(|c| contracts[c.0].worker).collect();
        workers.sort();
        workers.dedup();
        if workers.len() == chosen.len() {
            out.push(chosen);
        }
    }
    out
}

/// 2–3 firms, 2–3 workers, up to `max_contracts` contracts on random
/// firm–worker pairs, random strict preferences.
pub fn random_market(rng: &mut ChaCha8Rng, max_contracts: usize) -> Market {
    let nf = rng.gen_range(2..=3);
    let nw = rng.gen_range(2..=3);
    let nc = rng.gen_range(1..=max_contracts);
    let contracts: Vec<Contract> = (0..nc)
        .map(|i| Contract {
            label: format!("c{}", i + 1),
            firm: FirmId(rng.gen_range(0..nf)),
            worker: WorkerId(rng.gen_range(0..nw)),
        })
        .collect();
    let firm_prefs = (0..nf)
        .map(|f| {
            let own: Vec<ContractId> = (0..nc).filter(|&c| contracts[c].firm.0 == f).map(ContractId).collect();
            let mut options = valid_assignments(&contracts, &own);
            options.shuffle(rng);
            let keep = rng.gen_range(0..=options.len().min(4));
            options.truncate(keep);
            options.into_iter().map(|cs| Assignment::new(FirmId(f), cs)).collect()
        })
        .collect();
    let worker_prefs = (0..nw)
        .map(|w| {
            let mut own: Vec<ContractId> = (0..nc).filter(|&c| contracts[c].worker.0 == w).map(ContractId).collect();
            own.shuffle(rng);
            own
        })
        .collect();
    Market::new(
        (1..=nf).map(|i| format!("f{i}")).collect(),
        (1..=nw).map(|i| format!("w{i}")).collect(),
        contracts,
        firm_prefs,
        worker_prefs,
    )
    .expect("generated market is valid")
}

/// Capacities in 1..=4 and intensities in 1..=3 on each assignment's agents.
pub fn random_scheme(rng: &mut ChaCha8Rng, market: &Market) -> PiScheme {
    let n = market.agent_count();
    let capacity = (0..n).map(|_| frac::int(rng.gen_range(1..=4))).collect();
    let intensity = market
        .acceptable_assignments()
        .iter()
        .map(|a| {
            market
                .agent_ids()
                .map(|i| {
                    if market.involves(a, i) {
                        frac::int(rng.gen_range(1..=3))
                    } else {
                        frac::zero()
                    }
                })
                .collect()
        })
        .collect();
    PiScheme::new(market, capacity, intensity).expect("generated scheme is valid")
}

/// Two firms, two leaders and up to three followers. Every firm has one
/// contract with every worker and lists up to three distinct teams.
pub fn random_team_market(rng: &mut ChaCha8Rng) -> (Market, LeaderFollower) {
    let followers = rng.gen_range(0..=3);
    let nw = 2 + followers;
    let leader_of: Vec<usize> = (0..followers).map(|_| rng.gen_range(0..2)).collect();
    let mut workers = vec!["l1".to_string(), "l2".to_string()];
    workers.extend((1..=followers).map(|i| format!("o{i}")));
    let mut contracts = Vec::new();
    for f in 0..2 {
        for (w, name) in workers.iter().enumerate() {
            contracts.push(Contract {
                label: format!("f{}{name}", f + 1),
                firm: FirmId(f),
                worker: WorkerId(w),
            });
        }
    }
    let contract = |f: usize, w: usize| ContractId(f * nw + w);
    let firm_prefs = (0..2)
        .map(|f| {
            let mut teams = Vec::new();
            for l in 0..2 {
                let mine: Vec<usize> = (0..followers).filter(|&o| leader_of[o] == l).map(|o| o + 2).collect();
                for mask in 0u32..1 << mine.len() {
                    let mut members = vec![l];
                    members.extend((0..mine.len()).filter(|b| mask >> b & 1 == 1).map(|b| mine[b]));
                    teams.push(Assignment::new(FirmId(f), members.into_iter().map(|w| contract(f, w))));
                }
            }
            teams.shuffle(rng);
            teams.truncate(rng.gen_range(0..=3));
            teams
        })
        .collect();
    let worker_prefs = (0..nw)
        .map(|w| {
            let mut own = vec![contract(0, w), contract(1, w)];
            own.shuffle(rng);
            own
        })
        .collect();
    let market = Market::new(vec!["f1".into(), "f2".into()], workers, contracts, firm_prefs, worker_prefs)
        .expect("generated team market is valid");
    let follows: Vec<(WorkerId, WorkerId)> =
        (0..followers).map(|o| (WorkerId(o + 2), WorkerId(leader_of[o]))).collect();
    let lf = LeaderFollower::new(&market, &[WorkerId(0), WorkerId(1)], &follows).expect("partition");
    (market, lf)
}

/// A vertex of the schedule polytope maximising a random positive
/// objective.
pub fn random_vertex(rng: &mut ChaCha8Rng, market: &Market, scheme: &PiScheme) -> PiScheduleMatching {
    let k = market.acceptable_assignments().len();
    let n = market.agent_count();
    let mut rows = Vec::new();
    for i in 0..n {
        let mut row: Vec<Rational> = (0..k).map(|y| scheme.intensity(y)[i].clone()).collect();
        row.extend((0..n).map(|j| if i == j { frac::one() } else { frac::zero() }));
        rows.push(row);
    }
    let mut objective: Vec<Rational> = (0..k).map(|_| frac::int(rng.gen_range(1..=9))).collect();
    objective.extend((0..n).map(|_| frac::zero()));
    match maximize(&objective, &rows, scheme.capacity()) {
        LpOutcome::Optimal { x, .. } => PiScheduleMatching::new(x[..k].to_vec()),
        other => panic!("schedule polytope LP failed: {other:?}"),
    }
}

/// A random feasible schedule: a convex combination of two random vertices
/// and the zero schedule.
pub fn random_schedule(rng: &mut ChaCha8Rng, market: &Market, scheme: &PiScheme) -> PiScheduleMatching {
    let a = random_vertex(rng, market, scheme);
    let b = random_vertex(rng, market, scheme);
    let wa = frac::ratio(rng.gen_range(0..=4), 4);
    let wb = frac::ratio(rng.gen_range(0..=4), 4);
    let (wa, wb) = if &wa + &wb > frac::one() { (wa / frac::int(2), wb / frac::int(2)) } else { (wa, wb) };
    PiScheduleMatching::new(
        a.shares()
            .iter()
            .zip(b.shares())
            .map(|(x, y)| x * &wa + y * &wb)
            .collect(),
    )
}

// ---------------------------------------------------------------------------
// Oracles

/// Firm ranking key: higher is better; listed by position, empty at 0,
/// unlisted below.
fn firm_key(market: &Market, f: FirmId, contracts: &[ContractId]) -> i64 {
    if contracts.is_empty() {
        return 0;
    }
    let list = market.firm_prefs(f);
    match list.iter().position(|a| a.contracts() == contracts) {
        Some(p) => (list.len() - p) as i64,
        None => -1,
    }
}

/// Worker ranking key for an own contract: higher is better, none at 0.
fn worker_key(market: &Market, w: WorkerId, c: Option<ContractId>) -> i64 {
    match c {
        None => 0,
        Some(c) => {
            let list = market.worker_prefs(w);
            (list.len() - list.iter().position(|&x| x == c).expect("ranked")) as i64
        }
    }
}

/// Stability of a full-time matching, checked directly over every
/// subset of every firm's contracts.
pub fn oracle_is_stable(market: &Market, matching: &Matching) -> bool {
    let contracts = market.contracts();
    for f in market.firm_ids() {
        let own: Vec<ContractId> = (0..contracts.len()).filter(|&c| contracts[c].firm == f).map(ContractId).collect();
        let mut current: Vec<ContractId> = matching.contracts().filter(|c| contracts[c.0].firm == f).collect();
        current.sort();
        let current_key = firm_key(market, f, &current);
        let mut candidates = valid_assignments(contracts, &own);
        candidates.push(Vec::new());
        for y in candidates {
            if firm_key(market, f, &y) <= current_key {
                continue;
            }
            let agree = y.iter().all(|&c| {
                let w = contracts[c.0].worker;
                let held = matching.contracts().find(|x| contracts[x.0].worker == w);
                worker_key(market, w, Some(c)) >= worker_key(market, w, held)
            });
            if agree {
                return false;
            }
        }
    }
    true
}

/// Every stable matching, by enumerating all contract sets.
pub fn oracle_stable_set(market: &Market) -> Vec<Matching> {
    let nc = market.contracts().len();
    let mut out = Vec::new();
    for mask in 0u64..1 << nc {
        let chosen: Vec<ContractId> = (0..nc).filter(|b| mask >> b & 1 == 1).map(ContractId).collect();
        if let Ok(m) = Matching::new(market, chosen) {
            if oracle_is_stable(market, &m) {
                out.push(m);
            }
        }
    }
    out.sort();
    out
}

/// Rank of a worker's situation at assignment `k` (acceptable index), with
/// the employer's rank as tie-break.
fn situation_key(market: &Market, w: WorkerId, k: Option<usize>) -> (i64, i64) {
    match k {
        None => (0, 0),
        Some(k) => {
            let a = &market.acceptable_assignments()[k];
            let c = a.contracts().iter().copied().find(|c| market.contract(*c).worker == w).expect("member");
            (worker_key(market, w, Some(c)), firm_key(market, a.firm(), a.contracts()))
        }
    }
}

/// Stability of a π-schedule matching: no acceptable assignment makes its
/// firm strictly better than its worst situation and every worker strictly
/// better under the externality order.
pub fn oracle_schedule_is_stable(market: &Market, scheme: &PiScheme, t: &PiScheduleMatching) -> bool {
    let acceptable = market.acceptable_assignments();
    let n = market.agent_count();
    let load = |i: usize| -> Rational {
        (0..acceptable.len()).map(|k| t.share(k) * &scheme.intensity(k)[i]).sum()
    };
    let tight: Vec<bool> = (0..n).map(|i| load(i) == scheme.capacity()[i]).collect();
    let positive: Vec<usize> = (0..acceptable.len()).filter(|&k| t.share(k).is_positive()).collect();
    let firm_worst = |f: FirmId| -> i64 {
        if !tight[f.0] {
            return 0;
        }
        positive
            .iter()
            .filter(|&&k| acceptable[k].firm() == f)
            .map(|&k| firm_key(market, f, acceptable[k].contracts()))
            .min()
            .unwrap_or(0)
    };
    let worker_worst = |w: WorkerId| -> (i64, i64) {
        if !tight[market.firm_count() + w.0] {
            return (0, 0);
        }
        positive
            .iter()
            .filter(|&&k| acceptable[k].contracts().iter().any(|c| market.contract(*c).worker == w))
            .map(|&k| situation_key(market, w, Some(k)))
            .min()
            .unwrap_or((0, 0))
    };
    !acceptable.iter().enumerate().any(|(k, z)| {
        let f = z.firm();
        firm_key(market, f, z.contracts()) > firm_worst(f)
            && z.contracts().iter().all(|c| {
                let w = market.contract(*c).worker;
                situation_key(market, w, Some(k)) > worker_worst(w)
            })
    })
}
