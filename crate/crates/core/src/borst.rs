//! Finite set systems over positive integer labels and their Borst rank.
//!
//! `SetSystem` is a finite subset of `Fin L`, the nonempty finite subsets of
//! a label set. `derive` computes `M^σ` and `ord_system` the rank `Ord M`,
//! which is always a finite integer for an explicit finite system.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest label universe accepted by [`ord_system_naive`].
pub const NAIVE_LABEL_BOUND: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Label(u32);

impl Label {
    pub fn new(value: u32) -> Result<Self> {
        if value == 0 {
            return Err(Error::InvalidSystem("labels must be positive".into()));
        }
        Ok(Label(value))
    }

    pub fn value(self) -> u32 {
        self.0
    }
}

impl TryFrom<u32> for Label {
    type Error = Error;
    fn try_from(value: u32) -> Result<Self> {
        Label::new(value)
    }
}

impl From<Label> for u32 {
    fn from(l: Label) -> u32 {
        l.0
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A nonempty finite label set in sorted order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct FinSet(Vec<Label>);

impl FinSet {
    pub fn new<I: IntoIterator<Item = u32>>(values: I) -> Result<Self> {
        let set: BTreeSet<Label> = values
            .into_iter()
            .map(Label::new)
            .collect::<Result<_>>()?;
        if set.is_empty() {
            return Err(Error::InvalidSystem("members of Fin L must be nonempty".into()));
        }
        Ok(FinSet(set.into_iter().collect()))
    }

    pub fn labels(&self) -> &[Label] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, label: Label) -> bool {
        self.0.binary_search(&label).is_ok()
    }

    pub fn is_subset_of(&self, other: &FinSet) -> bool {
        is_sorted_subset(&self.0, &other.0)
    }
}

impl TryFrom<Vec<u32>> for FinSet {
    type Error = Error;
    fn try_from(v: Vec<u32>) -> Result<Self> {
        FinSet::new(v)
    }
}

impl From<FinSet> for Vec<u32> {
    fn from(s: FinSet) -> Vec<u32> {
        s.0.into_iter().map(u32::from).collect()
    }
}

impl fmt::Display for FinSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|l| l.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

fn is_sorted_subset(a: &[Label], b: &[Label]) -> bool {
    let mut it = b.iter();
    'outer: for x in a {
        for y in it.by_ref() {
            if y == x {
                continue 'outer;
            }
            if y > x {
                return false;
            }
        }
        return false;
    }
    true
}

/// A finite collection of `FinSet`s, deduplicated and sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(from = "RawSystem")]
pub struct SetSystem {
    members: Vec<FinSet>,
}

#[derive(Deserialize)]
struct RawSystem {
    members: Vec<FinSet>,
}

impl From<RawSystem> for SetSystem {
    fn from(raw: RawSystem) -> Self {
        SetSystem::from_sets(raw.members)
    }
}

impl SetSystem {
    pub fn empty() -> Self {
        SetSystem::default()
    }

    pub fn from_sets<I: IntoIterator<Item = FinSet>>(sets: I) -> Self {
        let set: BTreeSet<FinSet> = sets.into_iter().collect();
        SetSystem {
            members: set.into_iter().collect(),
        }
    }

    /// Builds a system from raw label lists; empty lists and zero labels are rejected.
    pub fn from_lists<I, J>(lists: I) -> Result<Self>
    where
        I: IntoIterator<Item = J>,
        J: IntoIterator<Item = u32>,
    {
        let sets = lists
            .into_iter()
            .map(FinSet::new)
            .collect::<Result<Vec<_>>>()?;
        Ok(SetSystem::from_sets(sets))
    }

    /// Every σ ⊆ {1..=universe} with `1 ≤ |σ| ≤ max_size`.
    pub fn all_subsets(universe: u32, max_size: usize) -> Self {
        let mut out = Vec::new();
        let mut current = Vec::new();
        fn rec(next: u32, universe: u32, max: usize, cur: &mut Vec<u32>, out: &mut Vec<FinSet>) {
            if !cur.is_empty() {
                out.push(FinSet::new(cur.iter().copied()).expect("nonempty positive"));
            }
            if cur.len() == max {
                return;
            }
            for v in next..=universe {
                cur.push(v);
                rec(v + 1, universe, max, cur, out);
                cur.pop();
            }
        }
        rec(1, universe, max_size, &mut current, &mut out);
        SetSystem::from_sets(out)
    }

    pub fn members(&self) -> &[FinSet] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, set: &FinSet) -> bool {
        self.members.binary_search(set).is_ok()
    }

    /// Labels occurring in at least one member, ascending.
    pub fn labels(&self) -> Vec<Label> {
        let set: BTreeSet<Label> = self
            .members
            .iter()
            .flat_map(|m| m.0.iter().copied())
            .collect();
        set.into_iter().collect()
    }

    pub fn max_member_size(&self) -> usize {
        self.members.iter().map(FinSet::len).max().unwrap_or(0)
    }

    pub fn is_subsystem_of(&self, other: &SetSystem) -> bool {
        self.members.iter().all(|m| other.contains(m))
    }

    pub fn union(&self, other: &SetSystem) -> SetSystem {
        SetSystem::from_sets(self.members.iter().chain(&other.members).cloned())
    }
}

impl fmt::Display for SetSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.members.iter().map(|m| m.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// The derivative `M^σ = { τ ∈ Fin L : σ ∪ τ ∈ M, σ ∩ τ = ∅ }`.
///
/// `sigma` may be empty, in which case `M` itself is returned.
pub fn derive(system: &SetSystem, sigma: &[Label]) -> SetSystem {
    let sigma: BTreeSet<Label> = sigma.iter().copied().collect();
    let sigma: Vec<Label> = sigma.into_iter().collect();
    let derived = system.members.iter().filter_map(|m| {
        if m.len() <= sigma.len() || !is_sorted_subset(&sigma, &m.0) {
            return None;
        }
        let rest: Vec<Label> = m
            .0
            .iter()
            .copied()
            .filter(|l| sigma.binary_search(l).is_err())
            .collect();
        Some(FinSet(rest))
    });
    SetSystem::from_sets(derived)
}

/// `Ord M` together with a deepest label chain `a_1, …, a_n` such that
/// `M^{a_1…a_j}` has rank `n − j` at every step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrdWitness {
    pub ord: u32,
    pub chain: Vec<Label>,
}

/// Multi-word bitset over the label universe of one system.
type Bits = Vec<u64>;

struct RankSolver {
    labels: Vec<Label>,
    members: Vec<Bits>,
    memo: HashMap<Bits, u32>,
}

impl RankSolver {
    fn new(system: &SetSystem) -> Self {
        let labels = system.labels();
        let words = labels.len().div_ceil(64).max(1);
        let members = system
            .members
            .iter()
            .map(|m| {
                let mut bits = vec![0u64; words];
                for l in &m.0 {
                    let i = labels.binary_search(l).expect("label from system");
                    bits[i / 64] |= 1 << (i % 64);
                }
                bits
            })
            .collect();
        RankSolver {
            labels,
            members,
            memo: HashMap::new(),
        }
    }

    /// Rank of `M^σ`, memoized on σ.
    fn rank(&mut self, sigma: &Bits) -> u32 {
        if let Some(&r) = self.memo.get(sigma) {
            return r;
        }
        let mut candidates = vec![0u64; sigma.len()];
        let mut ceiling = 0u32;
        for m in &self.members {
            let contains = m.iter().zip(sigma).all(|(mw, sw)| sw & !mw == 0);
            if !contains || m == sigma {
                continue;
            }
            let mut extra = 0;
            for (c, (mw, sw)) in candidates.iter_mut().zip(m.iter().zip(sigma)) {
                *c |= mw & !sw;
                extra += (mw & !sw).count_ones();
            }
            ceiling = ceiling.max(extra);
        }
        if ceiling == 0 {
            self.memo.insert(sigma.clone(), 0);
            return 0;
        }
        let mut best = 0;
        'scan: for (w, &word) in candidates.iter().enumerate() {
            let mut rest = word;
            while rest != 0 {
                let bit = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                let mut next = sigma.clone();
                next[w] |= 1 << bit;
                best = best.max(1 + self.rank(&next));
                // Ord M^σ never exceeds the largest |m \ σ|.
                if best == ceiling {
                    break 'scan;
                }
            }
        }
        self.memo.insert(sigma.clone(), best);
        best
    }

    fn witness(&mut self) -> OrdWitness {
        let words = self.labels.len().div_ceil(64).max(1);
        let mut sigma = vec![0u64; words];
        let ord = self.rank(&sigma);
        let mut chain = Vec::new();
        let mut remaining = ord;
        while remaining > 0 {
            let extendable = |i: usize| {
                self.members.iter().any(|m| {
                    m[i / 64] & (1 << (i % 64)) != 0
                        && m.iter().zip(&sigma).all(|(mw, sw)| sw & !mw == 0)
                })
            };
            let labels: Vec<usize> = (0..self.labels.len())
                .filter(|&i| sigma[i / 64] & (1 << (i % 64)) == 0 && extendable(i))
                .collect();
            let next = labels
                .into_iter()
                .find_map(|i| {
                    let mut cand = sigma.clone();
                    cand[i / 64] |= 1 << (i % 64);
                    (self.rank(&cand) == remaining - 1).then_some((i, cand))
                })
                .expect("some label realizes the rank");
            chain.push(self.labels[next.0]);
            sigma = next.1;
            remaining -= 1;
        }
        OrdWitness { ord, chain }
    }
}

/// `Ord M` for an explicit finite system, memoized on the accumulated σ.
pub fn ord_system(system: &SetSystem) -> u32 {
    ord_with_chain(system).ord
}

pub fn ord_with_chain(system: &SetSystem) -> OrdWitness {
    RankSolver::new(system).witness()
}

/// Reference rank by direct structural recursion on explicit derivatives.
pub fn ord_system_naive(system: &SetSystem) -> Result<u32> {
    let labels = system.labels().len();
    if labels > NAIVE_LABEL_BOUND {
        return Err(Error::NaiveTooLarge {
            labels,
            bound: NAIVE_LABEL_BOUND,
        });
    }
    fn rec(m: &SetSystem) -> u32 {
        if m.is_empty() {
            return 0;
        }
        m.labels()
            .into_iter()
            .map(|a| 1 + rec(&derive(m, &[a])))
            .max()
            .unwrap_or(0)
    }
    Ok(rec(system))
}

/// Rank bounds for a system known only between `definite_in` and `possible_in`.
pub fn ord_interval(definite_in: &SetSystem, possible_in: &SetSystem) -> Result<(u32, u32)> {
    if let Some(m) = definite_in
        .members
        .iter()
        .find(|m| !possible_in.contains(m))
    {
        return Err(Error::IntervalNotNested(m.to_string()));
    }
    Ok((ord_system(definite_in), ord_system(possible_in)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(lists: &[&[u32]]) -> SetSystem {
        SetSystem::from_lists(lists.iter().map(|l| l.iter().copied())).unwrap()
    }

    fn labels(v: &[u32]) -> Vec<Label> {
        v.iter().map(|&x| Label::new(x).unwrap()).collect()
    }

    #[test]
    fn derive_examples() {
        let m = sys(&[&[1, 2], &[1, 3]]);
        assert_eq!(derive(&m, &labels(&[1])), sys(&[&[2], &[3]]));
        assert_eq!(derive(&m, &[]), m);
        assert!(derive(&sys(&[&[1, 2]]), &labels(&[3])).is_empty());
        // a member equal to σ leaves the empty set, which is not in Fin L
        assert!(derive(&sys(&[&[4]]), &labels(&[4])).is_empty());
    }

    #[test]
    fn ord_examples() {
        assert_eq!(ord_system(&SetSystem::empty()), 0);
        assert_eq!(ord_system(&sys(&[&[7]])), 1);
        assert_eq!(ord_system(&SetSystem::all_subsets(3, 2)), 2);
        assert_eq!(ord_system_naive(&SetSystem::empty()).unwrap(), 0);
        assert_eq!(ord_system_naive(&sys(&[&[1], &[2]])).unwrap(), 1);
        assert_eq!(ord_system_naive(&sys(&[&[1, 2]])).unwrap(), 2);
    }

    #[test]
    fn chain_realizes_rank() {
        let w = ord_with_chain(&sys(&[&[1, 2]]));
        assert_eq!(w.ord, 2);
        assert_eq!(w.chain, labels(&[1, 2]));
        let m = sys(&[&[1], &[2, 3, 5], &[2, 4]]);
        let w = ord_with_chain(&m);
        assert_eq!(w.ord, 3);
        let mut cur = m.clone();
        for (step, a) in w.chain.iter().enumerate() {
            cur = derive(&cur, &[*a]);
            assert_eq!(ord_system(&cur), w.ord - 1 - step as u32);
        }
    }

    #[test]
    fn naive_rejects_large_universe() {
        let m = SetSystem::from_lists((1..=13).map(|i| vec![i])).unwrap();
        assert_eq!(
            ord_system_naive(&m),
            Err(Error::NaiveTooLarge {
                labels: 13,
                bound: 12
            })
        );
        assert_eq!(ord_system(&m), 1);
    }

    #[test]
    fn interval_examples() {
        assert_eq!(ord_interval(&SetSystem::empty(), &SetSystem::empty()), Ok((0, 0)));
        assert_eq!(
            ord_interval(&sys(&[&[2]]), &sys(&[&[2], &[2, 3]])),
            Ok((1, 2))
        );
        let m = sys(&[&[1, 2], &[3]]);
        assert_eq!(ord_interval(&m, &m), Ok((2, 2)));
        assert!(matches!(
            ord_interval(&sys(&[&[9]]), &sys(&[&[2]])),
            Err(Error::IntervalNotNested(_))
        ));
    }

    #[test]
    fn validation() {
        assert!(FinSet::new([]).is_err());
        assert!(FinSet::new([0, 1]).is_err());
        let m: SetSystem = serde_json::from_str(r#"{"members": [[1,3],[1,2],[2,1]]}"#).unwrap();
        assert_eq!(m, sys(&[&[1, 2], &[1, 3]]));
        assert!(serde_json::from_str::<SetSystem>(r#"{"members": [[]]}"#).is_err());
        assert!(serde_json::from_str::<SetSystem>(r#"{"members": [[0]]}"#).is_err());
    }

    #[test]
    fn wide_universe_uses_multiple_words() {
        let m = SetSystem::from_lists([vec![1, 70, 130], vec![2]]).unwrap();
        assert_eq!(ord_system(&m), 3);
    }
}
