//! Window- and bound-restricted fragments `A_B(W)` of the non-cover system.
//!
//! For each σ ⊆ {1..n_max} with `1 ≤ |σ| ≤ s_max` the fragment records
//! whether no σ-cover of `W` with member diameters `≤ B` exists (definitely
//! in), one exists (definitely out), or the budget ran out (unknown).
//!
//! Two facts let one decision settle others. A cover for σ is also a cover
//! for any σ' that can host each family of σ at an equal or smaller
//! parameter, since an `r`-disjoint family is `r'`-disjoint for `r' ≤ r` and
//! surplus families can stay empty. Non-existence propagates the other way.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{decide_cover, Outcome, SearchOptions};
use crate::borst::{ord_interval, FinSet, SetSystem};
use crate::error::{Error, Result};
use crate::metrics::DistanceTable;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AFragment {
    /// Always `"A_B(W)"`: the fragment is relative to one window and bound.
    pub notation: String,
    pub window: String,
    pub bound: u64,
    pub n_max: u32,
    pub s_max: u32,
    pub definite_in: SetSystem,
    pub definite_out: SetSystem,
    pub unknown: SetSystem,
    /// Number of σ settled by running the search.
    pub searched: u64,
    /// Number of σ settled by propagation from another σ.
    pub inferred: u64,
    pub nodes_explored: u64,
}

/// Whether families at parameters `strong` can host every family of `weak`:
/// some injection `weak → strong` never increases the parameter.
pub fn at_least_as_strong(strong: &[u64], weak: &[u64]) -> bool {
    let mut strong = strong.to_vec();
    let mut weak = weak.to_vec();
    strong.sort_unstable();
    weak.sort_unstable();
    // nested prefixes make the greedy count condition sufficient
    weak.iter().enumerate().all(|(t, &w)| {
        strong.iter().take_while(|&&s| s <= w).count() > t
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Pending,
    In,
    Out,
    Unknown,
}

fn sigma_of(set: &FinSet) -> Vec<u64> {
    set.labels().iter().map(|l| l.value() as u64).collect()
}

fn system_of(states: &BTreeMap<Vec<u64>, (FinSet, State)>, want: State) -> SetSystem {
    SetSystem::from_sets(
        states
            .values()
            .filter(|(_, s)| *s == want)
            .map(|(set, _)| set.clone()),
    )
}

/// Builds `A_B(W)` over σ ⊆ {1..n_max}, `|σ| ≤ s_max`, deciding σ in order of
/// size and then lexicographically, and skipping any σ already settled.
///
/// Decisions run in a fixed order so the fragment is reproducible whatever
/// `parallel` is.
pub fn build_afragment(
    table: &DistanceTable,
    window_digest: &str,
    bound: u64,
    n_max: u32,
    s_max: u32,
    budget_per_sigma: u64,
    parallel: bool,
) -> Result<AFragment> {
    if n_max == 0 || s_max == 0 {
        return Err(Error::InvalidSigma("n_max and s_max must be at least 1".into()));
    }
    let universe = SetSystem::all_subsets(n_max, s_max as usize);
    let mut order: Vec<FinSet> = universe.members().to_vec();
    order.sort_by_key(|s| (s.len(), s.clone()));
    let mut states: BTreeMap<Vec<u64>, (FinSet, State)> = order
        .iter()
        .map(|s| (sigma_of(s), (s.clone(), State::Pending)))
        .collect();

    let mut searched = 0;
    let mut nodes = 0;
    for set in &order {
        let sigma = sigma_of(set);
        if states[&sigma].1 != State::Pending {
            continue;
        }
        let d = decide_cover(
            table,
            &sigma,
            bound,
            SearchOptions {
                budget: budget_per_sigma,
                parallel,
            },
        )?;
        searched += 1;
        nodes += d.nodes_explored;
        let state = match d.outcome {
            Outcome::Exists => State::Out,
            Outcome::None => State::In,
            Outcome::Unknown => State::Unknown,
        };
        states.get_mut(&sigma).expect("present").1 = state;
        if state == State::Unknown {
            continue;
        }
        for (other, (_, other_state)) in states.iter_mut() {
            let implied = match state {
                State::Out => at_least_as_strong(other, &sigma),
                State::In => at_least_as_strong(&sigma, other),
                _ => false,
            };
            if !implied {
                continue;
            }
            match *other_state {
                State::Pending | State::Unknown => *other_state = state,
                s if s == state => {}
                _ => {
                    return Err(Error::ClosureContradiction(format!(
                        "deciding {sigma:?} contradicts the settled value of {other:?}"
                    )))
                }
            }
        }
    }

    let fragment = AFragment {
        notation: "A_B(W)".into(),
        window: window_digest.into(),
        bound,
        n_max,
        s_max,
        definite_in: system_of(&states, State::In),
        definite_out: system_of(&states, State::Out),
        unknown: system_of(&states, State::Unknown),
        searched,
        inferred: states.len() as u64 - searched,
        nodes_explored: nodes,
    };
    check_fragment_closure(&fragment)?;
    Ok(fragment)
}

/// Verifies the partition of the σ range and every closure law of a fragment.
pub fn check_fragment_closure(frag: &AFragment) -> Result<()> {
    let universe = SetSystem::all_subsets(frag.n_max, frag.s_max as usize);
    let parts = [&frag.definite_in, &frag.definite_out, &frag.unknown];
    let total: usize = parts.iter().map(|p| p.len()).sum();
    let union = frag.definite_in.union(&frag.definite_out).union(&frag.unknown);
    if total != universe.len() || union != universe {
        return Err(Error::ClosureContradiction(
            "fragment systems do not partition the sigma range".into(),
        ));
    }
    let ins: Vec<Vec<u64>> = frag.definite_in.members().iter().map(sigma_of).collect();
    let outs: Vec<Vec<u64>> = frag.definite_out.members().iter().map(sigma_of).collect();
    for a in &ins {
        for b in &outs {
            if at_least_as_strong(a, b) {
                return Err(Error::ClosureContradiction(format!(
                    "{a:?} has no cover although weaker {b:?} has one"
                )));
            }
        }
    }
    for set in universe.members() {
        let s = sigma_of(set);
        let in_implied = ins.iter().any(|a| at_least_as_strong(a, &s));
        let out_implied = outs.iter().any(|b| at_least_as_strong(&s, b));
        let actual_in = frag.definite_in.contains(set);
        let actual_out = frag.definite_out.contains(set);
        if in_implied != actual_in || out_implied != actual_out {
            return Err(Error::ClosureContradiction(format!(
                "{s:?} is not closed under the dominance laws"
            )));
        }
    }
    Ok(())
}

/// `(Ord definite_in, Ord (definite_in ∪ unknown))`.
pub fn afragment_ord_bounds(frag: &AFragment) -> Result<(u32, u32)> {
    ord_interval(&frag.definite_in, &frag.definite_in.union(&frag.unknown))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::Window;

    fn table(n: i64) -> (DistanceTable, String) {
        let w = Window::interval(n).unwrap();
        (
            DistanceTable::for_window(&w, w.default_metric()).unwrap(),
            w.digest(),
        )
    }

    fn sys(lists: &[&[u32]]) -> SetSystem {
        SetSystem::from_lists(lists.iter().map(|l| l.iter().copied())).unwrap()
    }

    #[test]
    fn dominance() {
        assert!(at_least_as_strong(&[1], &[2]));
        assert!(!at_least_as_strong(&[2], &[1]));
        assert!(at_least_as_strong(&[1, 2], &[2]));
        assert!(at_least_as_strong(&[1, 4], &[2, 4]));
        assert!(!at_least_as_strong(&[1, 5], &[2, 4]));
        assert!(!at_least_as_strong(&[1], &[1, 2]));
        assert!(at_least_as_strong(&[3], &[3]));
    }

    #[test]
    fn fragment_examples() {
        let (t, id) = table(10);
        let f = build_afragment(&t, &id, 9, 3, 1, 1_000_000, false).unwrap();
        assert_eq!(f.definite_in, sys(&[&[2], &[3]]));
        assert_eq!(f.definite_out, sys(&[&[1]]));
        assert!(f.unknown.is_empty());
        // {1} settled first; {2} then refutes {3} by propagation
        assert_eq!((f.searched, f.inferred), (2, 1));
        assert_eq!(afragment_ord_bounds(&f).unwrap(), (1, 1));

        let f = build_afragment(&t, &id, 10, 3, 1, 1_000_000, false).unwrap();
        assert_eq!(f.definite_out, SetSystem::all_subsets(3, 1));
        assert!(f.definite_in.is_empty());

        let f = build_afragment(&t, &id, 10, 4, 3, 1_000_000, false).unwrap();
        assert!(f.definite_in.is_empty());
        assert_eq!(afragment_ord_bounds(&f).unwrap(), (0, 0));
    }

    #[test]
    fn ord_bounds_examples() {
        let frag = |din: SetSystem, unk: SetSystem| AFragment {
            notation: "A_B(W)".into(),
            window: String::new(),
            bound: 0,
            n_max: 3,
            s_max: 2,
            definite_in: din,
            definite_out: SetSystem::empty(),
            unknown: unk,
            searched: 0,
            inferred: 0,
            nodes_explored: 0,
        };
        assert_eq!(
            afragment_ord_bounds(&frag(SetSystem::empty(), SetSystem::empty())).unwrap(),
            (0, 0)
        );
        assert_eq!(
            afragment_ord_bounds(&frag(sys(&[&[2], &[3]]), SetSystem::empty())).unwrap(),
            (1, 1)
        );
        assert_eq!(
            afragment_ord_bounds(&frag(sys(&[&[2]]), sys(&[&[2, 3]]))).unwrap(),
            (1, 2)
        );
    }

    #[test]
    fn unknowns_stay_closed() {
        let (t, id) = table(14);
        let f = build_afragment(&t, &id, 3, 5, 3, 3, false).unwrap();
        assert!(!f.unknown.is_empty());
        check_fragment_closure(&f).unwrap();
        let (lo, hi) = afragment_ord_bounds(&f).unwrap();
        assert!(lo <= hi);
    }

    #[test]
    fn closure_checker_catches_tampering() {
        let (t, id) = table(10);
        let mut f = build_afragment(&t, &id, 9, 3, 2, 1_000_000, false).unwrap();
        // claim {1,2} has no cover while the weaker {1,3} has one
        assert!(f.definite_out.contains(&FinSet::new([1, 3]).unwrap()));
        f.definite_out = SetSystem::from_sets(
            f.definite_out
                .members()
                .iter()
                .filter(|s| sigma_of(s) != vec![1, 2])
                .cloned(),
        );
        f.definite_in = f.definite_in.union(&sys(&[&[1, 2]]));
        assert!(matches!(
            check_fragment_closure(&f),
            Err(Error::ClosureContradiction(_))
        ));
    }
}
