//! Exact decision of bounded σ-cover existence on a finite window.
//!
//! A σ-cover assigns every point to one of `|σ|` families, family `i` being
//! `σ_i`-disjoint. Inside one family the coarsest admissible members are the
//! chain components at that family's `r`, so a cover with diameter bound `B`
//! exists iff some point→family assignment keeps every chain component's
//! diameter at most `B`. The depth-first search assigns points in window order
//! and prunes as soon as a component grows past `B`.

mod fragment;
mod unionfind;

pub use fragment::{
    afragment_ord_bounds, at_least_as_strong, build_afragment, check_fragment_closure, AFragment,
};

use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covers::{chain_components, Cover, Family};
use crate::error::{Error, Result};
use crate::metrics::{DistanceTable, PointMetric};
use unionfind::RollbackComponents;

/// Instances with more assignments than this are refused by the naive oracle.
pub const NAIVE_ASSIGNMENT_LIMIT: u128 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Outcome {
    Exists,
    None,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    pub outcome: Outcome,
    pub sigma: Vec<u64>,
    pub bound: u64,
    pub witness: Option<Cover>,
    pub nodes_explored: u64,
    pub budget: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    /// Maximum number of assignment attempts.
    pub budget: u64,
    /// Explore the first point's branches concurrently on the current rayon pool.
    pub parallel: bool,
}

impl SearchOptions {
    pub fn sequential(budget: u64) -> Self {
        SearchOptions {
            budget,
            parallel: false,
        }
    }
}

/// Checks that σ is a nonempty, strictly increasing list of positive integers.
pub fn validate_sigma(sigma: &[u64]) -> Result<()> {
    if sigma.is_empty() {
        return Err(Error::InvalidSigma("sigma must be nonempty".into()));
    }
    if sigma[0] == 0 {
        return Err(Error::InvalidSigma("sigma entries start at 1".into()));
    }
    if sigma.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidSigma(format!(
            "sigma {sigma:?} must be strictly increasing"
        )));
    }
    Ok(())
}

enum Branch {
    Found { nodes: u64, cover: Cover },
    Exhausted { nodes: u64 },
    OutOfBudget,
    Cancelled,
}

struct Dfs<'a> {
    table: &'a DistanceTable,
    radii: &'a [u64],
    /// Families with equal class are interchangeable while empty.
    class: Vec<usize>,
    bound: u64,
    comps: RollbackComponents,
    assigned: Vec<Vec<usize>>,
    nodes: u64,
    budget: u64,
    cancel: Option<(&'a AtomicUsize, usize)>,
}

enum Stop {
    Budget,
    Cancelled,
}

impl<'a> Dfs<'a> {
    fn new(table: &'a DistanceTable, radii: &'a [u64], bound: u64, budget: u64) -> Self {
        // r beyond the diameter allows exactly one member, whatever its value
        let cap = table.diameter() + 1;
        let eff: Vec<u64> = radii.iter().map(|&r| r.min(cap)).collect();
        let class = (0..radii.len())
            .map(|f| eff.iter().position(|&e| e == eff[f]).expect("self"))
            .collect();
        Dfs {
            table,
            radii,
            class,
            bound,
            comps: RollbackComponents::new(table.len()),
            assigned: vec![Vec::new(); radii.len()],
            nodes: 0,
            budget,
            cancel: None,
        }
    }

    /// Families worth trying for the next point, skipping empty families that
    /// an earlier empty family of the same class already represents.
    fn candidates(&self) -> Vec<usize> {
        (0..self.radii.len())
            .filter(|&f| {
                !self.assigned[f].is_empty()
                    || !(0..f).any(|g| self.class[g] == self.class[f] && self.assigned[g].is_empty())
            })
            .collect()
    }

    fn count_node(&mut self) -> std::result::Result<(), Stop> {
        if self.nodes >= self.budget {
            return Err(Stop::Budget);
        }
        self.nodes += 1;
        if self.nodes % 1024 == 0 {
            if let Some((flag, me)) = self.cancel {
                if flag.load(Ordering::Relaxed) < me {
                    return Err(Stop::Cancelled);
                }
            }
        }
        Ok(())
    }

    /// Tries to put `p` into family `f`; on success returns the rollback mark.
    fn assign(&mut self, p: usize, f: usize) -> Option<usize> {
        let r = self.radii[f];
        let t = self.table;
        let mut roots: Vec<usize> = self.assigned[f]
            .iter()
            .filter(|&&q| t.dist(p, q) < r)
            .map(|&q| self.comps.find(q))
            .collect();
        roots.sort_unstable();
        roots.dedup();

        let mut diam = roots.iter().map(|&c| self.comps.diameter(c)).max().unwrap_or(0);
        if diam > self.bound {
            return None;
        }
        let parts: Vec<Vec<usize>> = roots.iter().map(|&c| self.comps.members(c)).collect();
        for (i, part) in parts.iter().enumerate() {
            for &a in part {
                diam = diam.max(t.dist(p, a));
                for other in &parts[i + 1..] {
                    for &b in other {
                        diam = diam.max(t.dist(a, b));
                    }
                }
            }
            if diam > self.bound {
                return None;
            }
        }

        let mark = self.comps.mark();
        for &c in &roots {
            self.comps.union(p, c);
        }
        self.comps.set_diameter(p, diam);
        self.assigned[f].push(p);
        Some(mark)
    }

    fn unassign(&mut self, f: usize, mark: usize) {
        self.assigned[f].pop();
        self.comps.rollback(mark);
    }

    fn run(&mut self, p: usize) -> std::result::Result<bool, Stop> {
        if p == self.table.len() {
            return Ok(true);
        }
        for f in self.candidates() {
            self.count_node()?;
            if let Some(mark) = self.assign(p, f) {
                if self.run(p + 1)? {
                    return Ok(true);
                }
                self.unassign(f, mark);
            }
        }
        Ok(false)
    }

    fn witness(&self) -> Cover {
        let families = self
            .radii
            .iter()
            .zip(&self.assigned)
            .map(|(&r, pts)| Family::new(r, chain_components(pts, r, self.table)))
            .collect::<Result<Vec<_>>>()
            .expect("chain components are disjoint and nonempty");
        Cover::new(families).expect("sigma validated")
    }

    fn finish(mut self, start: usize) -> Branch {
        match self.run(start) {
            Ok(true) => Branch::Found {
                nodes: self.nodes,
                cover: self.witness(),
            },
            Ok(false) => Branch::Exhausted { nodes: self.nodes },
            Err(Stop::Budget) => Branch::OutOfBudget,
            Err(Stop::Cancelled) => Branch::Cancelled,
        }
    }
}

/// Decides whether the window behind `table` has a σ-cover with all member
/// diameters at most `bound`, exploring at most `opts.budget` assignments.
///
/// The outcome, node count and witness are those of the sequential
/// depth-first search; parallel mode reproduces them exactly.
pub fn decide_cover(
    table: &DistanceTable,
    sigma: &[u64],
    bound: u64,
    opts: SearchOptions,
) -> Result<Decision> {
    validate_sigma(sigma)?;
    if opts.budget == 0 {
        return Err(Error::ZeroBudget);
    }
    if table.is_empty() {
        return Err(Error::EmptySet("decide_cover"));
    }
    let decision = |outcome, witness, nodes_explored| Decision {
        outcome,
        sigma: sigma.to_vec(),
        bound,
        witness,
        nodes_explored,
        budget: opts.budget,
    };

    if !opts.parallel || rayon::current_num_threads() == 1 {
        return Ok(match Dfs::new(table, sigma, bound, opts.budget).finish(0) {
            Branch::Found { nodes, cover } => decision(Outcome::Exists, Some(cover), nodes),
            Branch::Exhausted { nodes } => decision(Outcome::None, None, nodes),
            Branch::OutOfBudget => decision(Outcome::Unknown, None, opts.budget),
            Branch::Cancelled => unreachable!("no cancellation in sequential mode"),
        });
    }

    // One branch per family the first point may join. Each runs with the full
    // budget; replaying them in order reproduces the sequential accounting.
    let first = Dfs::new(table, sigma, bound, opts.budget).candidates();
    let settled = AtomicUsize::new(usize::MAX);
    let branches: Vec<Branch> = first
        .par_iter()
        .enumerate()
        .map(|(i, &f)| {
            let mut dfs = Dfs::new(table, sigma, bound, opts.budget);
            dfs.cancel = Some((&settled, i));
            if dfs.count_node().is_err() {
                return Branch::OutOfBudget;
            }
            dfs.assign(0, f).expect("a lone point fits any bound");
            let out = dfs.finish(1);
            if matches!(out, Branch::Found { .. } | Branch::OutOfBudget) {
                settled.fetch_min(i, Ordering::Relaxed);
            }
            out
        })
        .collect();

    let mut spent = 0u64;
    for branch in branches {
        match branch {
            Branch::Found { nodes, cover } if spent + nodes <= opts.budget => {
                return Ok(decision(Outcome::Exists, Some(cover), spent + nodes));
            }
            Branch::Exhausted { nodes } if spent + nodes <= opts.budget => spent += nodes,
            Branch::Cancelled => unreachable!("cancelled only after an earlier branch settled"),
            _ => return Ok(decision(Outcome::Unknown, None, opts.budget)),
        }
    }
    Ok(decision(Outcome::None, None, spent))
}

/// Reference decision by enumerating all `|σ|^n` assignments.
pub fn decide_cover_naive(table: &DistanceTable, sigma: &[u64], bound: u64) -> Result<Decision> {
    validate_sigma(sigma)?;
    let n = table.len();
    if n == 0 {
        return Err(Error::EmptySet("decide_cover_naive"));
    }
    let s = sigma.len();
    let total = (s as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if total > NAIVE_ASSIGNMENT_LIMIT {
        return Err(Error::NaiveInstanceTooLarge {
            assignments: total,
            limit: NAIVE_ASSIGNMENT_LIMIT,
        });
    }
    let mut digits = vec![0usize; n];
    let mut tried = 0u64;
    loop {
        tried += 1;
        let families: Vec<Vec<Vec<usize>>> = (0..s)
            .map(|f| {
                let pts: Vec<usize> = (0..n).filter(|&p| digits[p] == f).collect();
                chain_components(&pts, sigma[f], table)
            })
            .collect();
        let fits = families.iter().flatten().all(|member| {
            member
                .iter()
                .all(|&a| member.iter().all(|&b| table.dist(a, b) <= bound))
        });
        if fits {
            let cover = Cover::new(
                sigma
                    .iter()
                    .zip(families)
                    .map(|(&r, members)| Family::new(r, members))
                    .collect::<Result<Vec<_>>>()?,
            )?;
            return Ok(Decision {
                outcome: Outcome::Exists,
                sigma: sigma.to_vec(),
                bound,
                witness: Some(cover),
                nodes_explored: tried,
                budget: total as u64,
            });
        }
        // odometer with the first point most significant
        let mut pos = n;
        loop {
            if pos == 0 {
                return Ok(Decision {
                    outcome: Outcome::None,
                    sigma: sigma.to_vec(),
                    bound,
                    witness: None,
                    nodes_explored: tried,
                    budget: total as u64,
                });
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < s {
                break;
            }
            digits[pos] = 0;
        }
    }
}
