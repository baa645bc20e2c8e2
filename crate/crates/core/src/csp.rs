//! Per-tick person count estimation as a set-valued constraint problem.
//!
//! Every FoI is a variable whose value is the set of persons it observes,
//! drawn from `{1..Ω}`. A valid assignment satisfies:
//!
//! 1. an idle FoI observes nobody;
//! 2. an active FoI observes between `min` and `max` persons;
//! 3. two FoIs observe a common person only if they are adjacent in the
//!    co-activation graph.
//!
//! [`estimate_count`] returns the smallest number of distinct persons for
//! which such an assignment exists. [`brute_force_estimate`] computes the
//! same quantity by exhaustive enumeration and exists for testing.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::env::{ActivationLine, EnvironmentModel};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CspError {
    #[error("instance too large for exhaustive enumeration ({active} active FoIs, omega {omega})")]
    TooLarge { active: usize, omega: u32 },
}

/// Set of person indices in `1..=Ω`, stored as a bit mask.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PersonSet(u64);

impl PersonSet {
    pub const EMPTY: PersonSet = PersonSet(0);

    pub fn from_bits(bits: u64) -> Self {
        Self(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn insert(&mut self, person: u32) {
        self.0 |= 1 << person;
    }

    pub fn contains(self, person: u32) -> bool {
        self.0 >> person & 1 == 1
    }

    pub fn len(self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: Self) -> Self {
        Self(self.0 | other.0)
    }

    pub fn intersects(self, other: Self) -> bool {
        self.0 & other.0 != 0
    }

    pub fn iter(self) -> impl Iterator<Item = u32> {
        (0..64).filter(move |&p| self.contains(p))
    }
}

impl FromIterator<u32> for PersonSet {
    fn from_iter<T: IntoIterator<Item = u32>>(iter: T) -> Self {
        let mut s = PersonSet::EMPTY;
        for p in iter {
            s.insert(p);
        }
        s
    }
}

impl fmt::Debug for PersonSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// The constraint problem for one activation line, restricted to the
/// active FoIs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CspInstance {
    /// Environment indices of the active FoIs, in declaration order.
    pub active: Vec<usize>,
    /// Clamped `[min, max]` per active FoI.
    pub arities: Vec<(u32, u32)>,
    /// Co-activation adjacency between active FoIs (local indices).
    pub adjacency: Vec<Vec<bool>>,
    pub omega: u32,
    /// Number of FoIs in the environment.
    pub num_fois: usize,
}

impl CspInstance {
    /// Builds an instance directly from local data. Arities are clamped to Ω.
    pub fn from_parts(arities: Vec<(u32, u32)>, edges: &[(usize, usize)], omega: u32) -> Self {
        let n = arities.len();
        let mut adjacency = vec![vec![false; n]; n];
        for &(a, b) in edges {
            if a != b {
                adjacency[a][b] = true;
                adjacency[b][a] = true;
            }
        }
        Self {
            active: (0..n).collect(),
            arities: arities
                .into_iter()
                .map(|(lo, hi)| (lo, hi.min(omega)))
                .collect(),
            adjacency,
            omega,
            num_fois: n,
        }
    }

    pub fn num_active(&self) -> usize {
        self.active.len()
    }

    /// Size of a greedily built set of pairwise non-adjacent FoIs, weighted
    /// by their minimum arity. Such FoIs need disjoint persons, so this is
    /// a valid lower bound on the count.
    /// Same instance with FoIs sorted by descending minimum, then
    /// ascending maximum.
    fn most_constrained_first(&self) -> CspInstance {
        let mut order: Vec<usize> = (0..self.num_active()).collect();
        order.sort_by_key(|&x| (std::cmp::Reverse(self.arities[x].0), self.arities[x].1));
        CspInstance {
            active: order.iter().map(|&x| self.active[x]).collect(),
            arities: order.iter().map(|&x| self.arities[x]).collect(),
            adjacency: order
                .iter()
                .map(|&a| order.iter().map(|&b| self.adjacency[a][b]).collect())
                .collect(),
            omega: self.omega,
            num_fois: self.num_fois,
        }
    }

    pub fn lower_bound(&self) -> u32 {
        let widest = self.arities.iter().map(|a| a.0).max().unwrap_or(0);
        widest.max(self.independent_minimum())
    }

    /// Largest sum of minima over pairwise non-adjacent FoIs. Exact up to
    /// 64 active FoIs, greedy beyond.
    fn independent_minimum(&self) -> u32 {
        let n = self.num_active();
        if n > 64 {
            let mut chosen: Vec<usize> = Vec::new();
            for x in 0..n {
                if chosen.iter().all(|&y| !self.adjacency[x][y]) {
                    chosen.push(x);
                }
            }
            return chosen.iter().map(|&x| self.arities[x].0).sum();
        }
        let closed: Vec<u64> = (0..n)
            .map(|x| {
                (0..n)
                    .filter(|&y| y == x || self.adjacency[x][y])
                    .fold(0, |m, y| m | 1 << y)
            })
            .collect();
        let weights: Vec<u32> = self.arities.iter().map(|a| a.0).collect();
        let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        let mut best = 0;
        mwis(&closed, &weights, all, 0, &mut best);
        best
    }
}

fn mwis(closed: &[u64], w: &[u32], cand: u64, acc: u32, best: &mut u32) {
    if cand == 0 {
        *best = (*best).max(acc);
        return;
    }
    let rest: u32 = (0..w.len())
        .filter(|&x| cand >> x & 1 == 1)
        .map(|x| w[x])
        .sum();
    if acc + rest <= *best {
        return;
    }
    let x = cand.trailing_zeros() as usize;
    mwis(closed, w, cand & !closed[x], acc + w[x], best);
    mwis(closed, w, cand & !(1 << x), acc, best);
}

/// Builds the constraint instance for one tick.
pub fn build_instance(env: &EnvironmentModel, line: &ActivationLine) -> CspInstance {
    let active: Vec<usize> = line.active_indices().collect();
    let arities = active.iter().map(|&i| env.effective_arity(i)).collect();
    let adjacency = active
        .iter()
        .map(|&a| active.iter().map(|&b| env.cg().adjacent(a, b)).collect())
        .collect();
    CspInstance {
        active,
        arities,
        adjacency,
        omega: env.omega(),
        num_fois: env.len(),
    }
}

/// Person sets for every FoI of the environment (idle FoIs map to ∅).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub sets: Vec<PersonSet>,
}

impl Assignment {
    pub fn persons(&self) -> PersonSet {
        self.sets
            .iter()
            .fold(PersonSet::EMPTY, |acc, &s| acc.union(s))
    }

    /// Applies a relabeling of person indices; `perm[p]` is the new index of `p`.
    pub fn relabel(&self, perm: &[u32]) -> Assignment {
        Assignment {
            sets: self
                .sets
                .iter()
                .map(|s| s.iter().map(|p| perm[p as usize]).collect())
                .collect(),
        }
    }

    fn from_local(inst: &CspInstance, local: &[PersonSet]) -> Self {
        let mut sets = vec![PersonSet::EMPTY; inst.num_fois];
        for (x, &set) in local.iter().enumerate() {
            sets[inst.active[x]] = set;
        }
        Assignment { sets }
    }
}

/// Outcome of estimation for one tick.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CspEstimate {
    /// Minimum person count; saturates at Ω when infeasible.
    pub delta: u32,
    pub feasible: bool,
    pub witness: Option<Assignment>,
}

impl CspEstimate {
    fn infeasible(omega: u32) -> Self {
        Self {
            delta: omega,
            feasible: false,
            witness: None,
        }
    }
}

/// Checks the three constraints directly.
pub fn check_assignment(inst: &CspInstance, a: &Assignment) -> bool {
    if a.sets.len() != inst.num_fois {
        return false;
    }
    let in_range: u64 = ((1u64 << inst.omega) - 1) << 1;
    let mut local = vec![None; inst.num_fois];
    for (x, &i) in inst.active.iter().enumerate() {
        local[i] = Some(x);
    }
    for (i, set) in a.sets.iter().enumerate() {
        if set.bits() & !in_range != 0 {
            return false;
        }
        match local[i] {
            None if !set.is_empty() => return false,
            Some(x) => {
                let (lo, hi) = inst.arities[x];
                if set.len() < lo || set.len() > hi {
                    return false;
                }
            }
            None => {}
        }
    }
    for x in 0..inst.num_active() {
        for y in x + 1..inst.num_active() {
            let sx = a.sets[inst.active[x]];
            let sy = a.sets[inst.active[y]];
            if sx.intersects(sy) && !inst.adjacency[x][y] {
                return false;
            }
        }
    }
    true
}

/// Exact minimum person count by iterative deepening on the count.
///
/// For each candidate `k` from the lower bound up to Ω a backtracking
/// search assigns person sets FoI by FoI, largest minimum first. Fresh
/// persons are always the lowest unused index, which removes relabeling
/// symmetry.
pub fn estimate_count(inst: &CspInstance) -> CspEstimate {
    if inst.active.is_empty() {
        return CspEstimate {
            delta: 0,
            feasible: true,
            witness: Some(Assignment {
                sets: vec![PersonSet::EMPTY; inst.num_fois],
            }),
        };
    }
    let lb = inst.lower_bound().max(1);
    if lb > inst.omega {
        return CspEstimate::infeasible(inst.omega);
    }
    let ordered = inst.most_constrained_first();
    for k in lb..=inst.omega {
        let mut search = Search::new(&ordered, k);
        if search.run(0, 0) {
            let witness = Assignment::from_local(&ordered, &search.sets);
            let delta = witness.persons().len();
            debug_assert_eq!(delta, k);
            return CspEstimate {
                delta,
                feasible: true,
                witness: Some(witness),
            };
        }
    }
    CspEstimate::infeasible(inst.omega)
}

/// Convenience: instance construction plus estimation.
pub fn estimate_line(env: &EnvironmentModel, line: &ActivationLine) -> CspEstimate {
    estimate_count(&build_instance(env, line))
}

struct Search<'a> {
    inst: &'a CspInstance,
    k: u32,
    sets: Vec<PersonSet>,
    /// Per person (1-based, index 0 unused): local FoIs it may still join.
    compat: Vec<Vec<bool>>,
}

impl<'a> Search<'a> {
    fn new(inst: &'a CspInstance, k: u32) -> Self {
        let n = inst.num_active();
        Self {
            inst,
            k,
            sets: vec![PersonSet::EMPTY; n],
            compat: vec![vec![true; n]; k as usize + 1],
        }
    }

    fn run(&mut self, x: usize, used: u32) -> bool {
        let n = self.inst.num_active();
        if x == n {
            return true;
        }
        let (lo, hi) = self.inst.arities[x];
        // Persons that joined the same earlier FoIs are interchangeable, so
        // only how many are taken from each class matters.
        let mut classes: BTreeMap<Vec<bool>, Vec<u32>> = BTreeMap::new();
        for p in (1..=used).filter(|&p| self.compat[p as usize][x]) {
            let sig = self.sets[..x].iter().map(|s| s.contains(p)).collect();
            classes.entry(sig).or_default().push(p);
        }
        let classes: Vec<Vec<u32>> = classes.into_values().collect();
        let reusable: u32 = classes.iter().map(|c| c.len() as u32).sum();
        let fresh_max = (self.k - used).min(hi);
        for fresh in 0..=fresh_max {
            let reuse_lo = lo.saturating_sub(fresh);
            let reuse_hi = (hi - fresh).min(reusable);
            if reuse_lo > reuse_hi {
                continue;
            }
            let mut take = vec![0u32; classes.len()];
            loop {
                let total: u32 = take.iter().sum();
                if (reuse_lo..=reuse_hi).contains(&total)
                    && self.try_set(x, used, fresh, &classes, &take)
                {
                    return true;
                }
                // Odometer over per-class counts.
                let mut i = 0;
                while i < take.len() {
                    if (take[i] as usize) < classes[i].len() {
                        take[i] += 1;
                        break;
                    }
                    take[i] = 0;
                    i += 1;
                }
                if i == take.len() {
                    break;
                }
            }
        }
        false
    }

    fn try_set(
        &mut self,
        x: usize,
        used: u32,
        fresh: u32,
        classes: &[Vec<u32>],
        take: &[u32],
    ) -> bool {
        let mut set = PersonSet::EMPTY;
        for (class, &t) in classes.iter().zip(take) {
            for &p in &class[..t as usize] {
                set.insert(p);
            }
        }
        for p in used + 1..=used + fresh {
            set.insert(p);
        }
        let saved: Vec<Vec<bool>> = set
            .iter()
            .map(|p| self.compat[p as usize].clone())
            .collect();
        for p in set.iter() {
            let row = &mut self.compat[p as usize];
            for (y, ok) in row.iter_mut().enumerate() {
                *ok &= y == x || self.inst.adjacency[x][y];
            }
        }
        self.sets[x] = set;
        let next_used = used + fresh;
        if self.forward_ok(x + 1, next_used) && self.run(x + 1, next_used) {
            return true;
        }
        for (p, row) in set.iter().zip(saved) {
            self.compat[p as usize] = row;
        }
        self.sets[x] = PersonSet::EMPTY;
        false
    }

    /// Every remaining FoI must still be able to reach its minimum, and so
    /// must a greedy set of mutually non-adjacent remaining FoIs, which
    /// cannot share anyone.
    fn forward_ok(&self, from: usize, used: u32) -> bool {
        let n = self.inst.num_active();
        let fresh = self.k - used;
        let reach = |y: usize| {
            (1..=used)
                .filter(|&p| self.compat[p as usize][y])
                .fold(PersonSet::EMPTY, |s, p| {
                    let mut s = s;
                    s.insert(p);
                    s
                })
        };
        let mut chosen: Vec<usize> = Vec::new();
        let mut need = 0;
        let mut pool = PersonSet::EMPTY;
        for y in from..n {
            let r = reach(y);
            let lo = self.inst.arities[y].0;
            if r.len() + fresh < lo {
                return false;
            }
            if chosen.iter().all(|&z| !self.inst.adjacency[y][z]) {
                chosen.push(y);
                need += lo;
                pool = pool.union(r);
                if need > pool.len() + fresh {
                    return false;
                }
            }
        }
        true
    }
}

/// Exhaustive oracle: enumerates every assignment of subsets of `{1..Ω}` to
/// the active FoIs and returns the smallest union size among valid ones.
///
/// Guarded to at most 8 active FoIs and Ω ≤ 5.
pub fn brute_force_estimate(inst: &CspInstance) -> Result<CspEstimate, CspError> {
    if inst.num_active() > 8 || inst.omega > 5 {
        return Err(CspError::TooLarge {
            active: inst.num_active(),
            omega: inst.omega,
        });
    }
    let universe: Vec<PersonSet> = (0u64..1 << inst.omega)
        .map(|m| PersonSet::from_bits(m << 1))
        .collect();
    let mut best: Option<(u32, Vec<PersonSet>)> = None;
    let mut current = vec![PersonSet::EMPTY; inst.num_active()];
    enumerate(inst, &universe, 0, &mut current, &mut best);
    Ok(match best {
        Some((delta, local)) => CspEstimate {
            delta,
            feasible: true,
            witness: Some(Assignment::from_local(inst, &local)),
        },
        None => CspEstimate::infeasible(inst.omega),
    })
}

fn enumerate(
    inst: &CspInstance,
    universe: &[PersonSet],
    x: usize,
    current: &mut Vec<PersonSet>,
    best: &mut Option<(u32, Vec<PersonSet>)>,
) {
    if x == current.len() {
        let size = current
            .iter()
            .fold(PersonSet::EMPTY, |a, &s| a.union(s))
            .len();
        if best.as_ref().is_none_or(|(b, _)| size < *b) {
            *best = Some((size, current.clone()));
        }
        return;
    }
    let (lo, hi) = inst.arities[x];
    for &s in universe {
        if s.len() < lo || s.len() > hi {
            continue;
        }
        if (0..x).any(|y| current[y].intersects(s) && !inst.adjacency[x][y]) {
            continue;
        }
        current[x] = s;
        enumerate(inst, universe, x + 1, current, best);
    }
    current[x] = PersonSet::EMPTY;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::parse_environment;

    fn est(arities: &[(u32, u32)], edges: &[(usize, usize)], omega: u32) -> CspEstimate {
        let inst = CspInstance::from_parts(arities.to_vec(), edges, omega);
        let e = estimate_count(&inst);
        if let Some(w) = &e.witness {
            assert!(check_assignment(&inst, w));
            assert_eq!(w.persons().len(), e.delta);
        }
        e
    }

    #[test]
    fn empty_is_zero() {
        let e = est(&[], &[], 3);
        assert_eq!((e.delta, e.feasible), (0, true));
    }

    #[test]
    fn single_motion_is_one() {
        assert_eq!(est(&[(1, 4)], &[], 4).delta, 1);
    }

    #[test]
    fn disjoint_without_edge() {
        assert_eq!(est(&[(1, 4), (1, 4)], &[], 4).delta, 2);
    }

    #[test]
    fn shared_with_edge() {
        assert_eq!(est(&[(1, 3), (1, 3)], &[(0, 1)], 4).delta, 1);
    }

    #[test]
    fn infeasible_saturates() {
        let e = est(&[(1, 1), (1, 1), (1, 1)], &[], 2);
        assert!(!e.feasible);
        assert_eq!(e.delta, 2);
        assert!(e.witness.is_none());
    }

    #[test]
    fn triangle_of_pairs() {
        let inst = CspInstance::from_parts(vec![(2, 2); 3], &[(0, 1), (1, 2), (0, 2)], 3);
        let oracle = brute_force_estimate(&inst).unwrap();
        assert_eq!(oracle.delta, 2);
        assert_eq!(estimate_count(&inst).delta, 2);
    }

    #[test]
    fn star_needs_one_per_leaf() {
        let inst = CspInstance::from_parts(
            vec![(1, 3), (1, 1), (1, 1), (1, 1)],
            &[(0, 1), (0, 2), (0, 3)],
            4,
        );
        let oracle = brute_force_estimate(&inst).unwrap();
        assert_eq!(oracle.delta, 3);
        assert_eq!(estimate_count(&inst).delta, 3);
    }

    #[test]
    fn oracle_guard() {
        let inst = CspInstance::from_parts(vec![(1, 1); 9], &[], 5);
        assert!(brute_force_estimate(&inst).is_err());
        let inst = CspInstance::from_parts(vec![(1, 1)], &[], 6);
        assert!(brute_force_estimate(&inst).is_err());
    }

    #[test]
    fn build_instance_restricts_to_active() {
        let env = parse_environment(
            "omega 4\nfoi door 1 1 entry\nfoi couch 1 3\nfoi motion 1 inf\nedge couch motion\n",
        )
        .unwrap();
        let idle = build_instance(&env, &ActivationLine::idle(3));
        assert!(idle.active.is_empty());
        let two = build_instance(&env, &ActivationLine::new(vec![false, true, true], None));
        assert_eq!(two.active, vec![1, 2]);
        assert_eq!(two.arities, vec![(1, 3), (1, 4)]);
        assert!(two.adjacency[0][1] && two.adjacency[1][0]);
        let entry = build_instance(&env, &ActivationLine::new(vec![true, false, false], None));
        assert_eq!(entry.active, vec![0]);
    }

    #[test]
    fn check_rejects_violations() {
        let inst = CspInstance::from_parts(vec![(1, 2), (1, 2)], &[], 3);
        let empty_active = Assignment {
            sets: vec![PersonSet::EMPTY, [1].into_iter().collect()],
        };
        assert!(!check_assignment(&inst, &empty_active));
        let shared = Assignment {
            sets: vec![[1].into_iter().collect(), [1].into_iter().collect()],
        };
        assert!(!check_assignment(&inst, &shared));
        let ok = Assignment {
            sets: vec![[1].into_iter().collect(), [2].into_iter().collect()],
        };
        assert!(check_assignment(&inst, &ok));
        let out_of_range = Assignment {
            sets: vec![[1].into_iter().collect(), [4].into_iter().collect()],
        };
        assert!(!check_assignment(&inst, &out_of_range));
    }

    #[test]
    fn idle_foi_must_be_empty() {
        let env = parse_environment("omega 2\nfoi a 1 1 entry\nfoi b 1 1\n").unwrap();
        let inst = build_instance(&env, &ActivationLine::new(vec![true, false], None));
        let a = Assignment {
            sets: vec![[1].into_iter().collect(), [2].into_iter().collect()],
        };
        assert!(!check_assignment(&inst, &a));
    }
}
