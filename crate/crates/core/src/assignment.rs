//! Student-proposing deferred acceptance over submitted top-k lists.

use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::order::PartialOrder;

/// Students' lists over programs `1..=m`, program capacities, and each
/// program's strict priority order over students.
#[derive(Debug, Clone, PartialEq)]
pub struct Market {
    preferences: Vec<PartialOrder>,
    capacities: Vec<usize>,
    /// `rank[p][s]`: position of student s in program p's priority order
    /// (0 is highest priority).
    rank: Vec<Vec<usize>>,
}

impl Market {
    /// `priorities[p]` lists all students (0-based) from highest to lowest
    /// priority at program p+1.
    pub fn new(
        preferences: Vec<PartialOrder>,
        capacities: Vec<usize>,
        priorities: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let m = capacities.len();
        let n = preferences.len();
        if m == 0 {
            return Err(Error::EmptyUniverse);
        }
        for q in &preferences {
            q.check(m)?;
        }
        if priorities.len() != m {
            return Err(Error::Shape(format!(
                "{} priority orders for {m} programs",
                priorities.len()
            )));
        }
        let mut rank = Vec::with_capacity(m);
        for (p, order) in priorities.iter().enumerate() {
            let mut r = vec![usize::MAX; n];
            for (pos, &s) in order.iter().enumerate() {
                if s >= n || r[s] != usize::MAX {
                    return Err(Error::Shape(format!(
                        "priority order of program {} is not a permutation of the {n} students",
                        p + 1
                    )));
                }
                r[s] = pos;
            }
            if order.len() != n {
                return Err(Error::Shape(format!(
                    "priority order of program {} covers {} of {n} students",
                    p + 1,
                    order.len()
                )));
            }
            rank.push(r);
        }
        Ok(Self {
            preferences,
            capacities,
            rank,
        })
    }

    /// Each program ranks students by an independent uniform permutation
    /// drawn from `seed`.
    pub fn with_random_priorities(
        preferences: Vec<PartialOrder>,
        capacities: Vec<usize>,
        seed: u64,
    ) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = preferences.len();
        let priorities = (0..capacities.len())
            .map(|_| {
                let mut order: Vec<usize> = (0..n).collect();
                order.shuffle(&mut rng);
                order
            })
            .collect();
        Self::new(preferences, capacities, priorities)
    }

    pub fn n_students(&self) -> usize {
        self.preferences.len()
    }

    pub fn n_programs(&self) -> usize {
        self.capacities.len()
    }

    pub fn preferences(&self) -> &[PartialOrder] {
        &self.preferences
    }

    pub fn capacities(&self) -> &[usize] {
        &self.capacities
    }

    /// Priority position of student `s` at program `p` (1-based program).
    pub fn priority(&self, p: usize, s: usize) -> usize {
        self.rank[p - 1][s]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matching {
    /// Program (1-based) per student, `None` when unassigned.
    pub assignment: Vec<Option<usize>>,
}

pub fn deferred_acceptance(market: &Market) -> Matching {
    let n = market.n_students();
    let mut next = vec![0usize; n];
    let mut held: Vec<Vec<usize>> = vec![Vec::new(); market.n_programs()];
    let mut assignment = vec![None; n];
    let mut free: Vec<usize> = (0..n).rev().collect();

    while let Some(s) = free.pop() {
        let list = market.preferences[s].items();
        let Some(&p) = list.get(next[s]) else {
            continue;
        };
        next[s] += 1;
        let cap = market.capacities[p - 1];
        let slot = &mut held[p - 1];
        if slot.len() < cap {
            slot.push(s);
            assignment[s] = Some(p);
            continue;
        }
        let worst = slot
            .iter()
            .enumerate()
            .max_by_key(|(_, &t)| market.rank[p - 1][t])
            .map(|(i, &t)| (i, t));
        match worst {
            Some((i, t)) if market.rank[p - 1][s] < market.rank[p - 1][t] => {
                slot[i] = s;
                assignment[s] = Some(p);
                assignment[t] = None;
                free.push(t);
            }
            _ => free.push(s),
        }
    }
    Matching { assignment }
}

/// Matches independent markets on up to `workers` threads; output order
/// follows input order.
pub fn match_all(markets: &[Market], workers: usize) -> Vec<Matching> {
    let workers = workers.max(1);
    if workers == 1 || markets.len() < 2 {
        return markets.iter().map(deferred_acceptance).collect();
    }
    let per = markets.len().div_ceil(workers);
    std::thread::scope(|s| {
        let handles: Vec<_> = markets
            .chunks(per)
            .map(|c| s.spawn(move || c.iter().map(deferred_acceptance).collect::<Vec<_>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("matching worker panicked"))
            .collect()
    })
}

/// Checks capacities and that every student holds a program from their
/// own list.
pub fn check_feasible(market: &Market, matching: &Matching) -> Result<()> {
    if matching.assignment.len() != market.n_students() {
        return Err(Error::Shape("matching size differs from the market".into()));
    }
    let mut load = vec![0usize; market.n_programs()];
    for (s, a) in matching.assignment.iter().enumerate() {
        if let Some(p) = *a {
            if !market.preferences[s].items().contains(&p) {
                return Err(Error::Config(format!(
                    "student {s} holds unlisted program {p}"
                )));
            }
            load[p - 1] += 1;
        }
    }
    for (p, (&l, &c)) in load.iter().zip(&market.capacities).enumerate() {
        if l > c {
            return Err(Error::Config(format!(
                "program {} holds {l} > capacity {c}",
                p + 1
            )));
        }
    }
    Ok(())
}

/// Exhaustive scan for (student, program) pairs where the student lists
/// the program above their assignment and the program has a free seat or
/// holds someone of lower priority.
pub fn blocking_pairs(market: &Market, matching: &Matching) -> Vec<(usize, usize)> {
    let mut holders: Vec<Vec<usize>> = vec![Vec::new(); market.n_programs()];
    for (s, a) in matching.assignment.iter().enumerate() {
        if let Some(p) = *a {
            holders[p - 1].push(s);
        }
    }
    let mut out = Vec::new();
    for (s, q) in market.preferences.iter().enumerate() {
        for &p in q.items() {
            if matching.assignment[s] == Some(p) {
                break;
            }
            let h = &holders[p - 1];
            let envies = h.len() < market.capacities[p - 1]
                || h.iter()
                    .any(|&t| market.rank[p - 1][t] > market.rank[p - 1][s]);
            if envies {
                out.push((s, p));
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcomeStats {
    pub top1: f64,
    pub top3: f64,
    pub any: f64,
}

/// Shares of students placed at their first choice, within their first
/// three, and anywhere on their list.
pub fn outcome_stats(matching: &Matching, preferences: &[PartialOrder]) -> OutcomeStats {
    let n = preferences.len().max(1) as f64;
    let (mut top1, mut top3, mut any) = (0.0, 0.0, 0.0);
    for (a, q) in matching.assignment.iter().zip(preferences) {
        let Some(p) = *a else { continue };
        if let Some(pos) = q.items().iter().position(|&x| x == p) {
            any += 1.0;
            if pos < 3 {
                top3 += 1.0;
            }
            if pos == 0 {
                top1 += 1.0;
            }
        }
    }
    OutcomeStats {
        top1: top1 / n,
        top3: top3 / n,
        any: any / n,
    }
}

/// Parses `program_id,capacity` lines (an optional header row is
/// skipped). Every program 1..=m must appear exactly once.
pub fn parse_capacities(text: &str, m: usize) -> Result<Vec<usize>> {
    let err = |line: usize, msg: String| Error::Parse {
        path: PathBuf::from("<capacities>"),
        line,
        msg,
    };
    let mut caps = vec![None; m];
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.starts_with("program_id")) {
            continue;
        }
        let (id, cap) = line
            .split_once(',')
            .ok_or_else(|| err(i + 1, "expected program_id,capacity".into()))?;
        let id: usize = id
            .trim()
            .parse()
            .map_err(|_| err(i + 1, format!("bad program id {id:?}")))?;
        let cap: usize = cap
            .trim()
            .parse()
            .map_err(|_| err(i + 1, format!("bad capacity {cap:?}")))?;
        if id == 0 || id > m {
            return Err(err(i + 1, format!("program {id} outside 1..={m}")));
        }
        if caps[id - 1].replace(cap).is_some() {
            return Err(err(i + 1, format!("program {id} listed twice")));
        }
    }
    caps.iter()
        .enumerate()
        .map(|(p, c)| c.ok_or_else(|| err(0, format!("no capacity for program {}", p + 1))))
        .collect()
}
