//! Covers by `r`-disjoint, uniformly bounded families, and their checkers.
//!
//! Point sets are lists of indices into a window; distances come from any
//! [`PointMetric`] over the same window.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::PointMetric;

/// One family of a cover: members must be pairwise at distance `≥ r`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Family {
    pub r: u64,
    pub members: Vec<Vec<usize>>,
}

impl Family {
    pub fn new(r: u64, members: Vec<Vec<usize>>) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidSigma("disjointness parameters start at 1".into()));
        }
        if members.iter().any(Vec::is_empty) {
            return Err(Error::EmptySet("family member"));
        }
        let mut seen: Vec<usize> = members.iter().flatten().copied().collect();
        seen.sort_unstable();
        let total = seen.len();
        seen.dedup();
        if seen.len() != total {
            return Err(Error::InvalidWitness(
                "members of one family must be disjoint point sets".into(),
            ));
        }
        Ok(Family { r, members })
    }
}

/// Families listed in non-decreasing order of `r`; `sigma` mirrors their parameters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Cover {
    pub sigma: Vec<u64>,
    pub families: Vec<Family>,
}

impl Cover {
    pub fn new(families: Vec<Family>) -> Result<Self> {
        if families.windows(2).any(|w| w[0].r > w[1].r) {
            return Err(Error::InvalidSigma("families must be ordered by r".into()));
        }
        Ok(Cover {
            sigma: families.iter().map(|f| f.r).collect(),
            families,
        })
    }

    /// True when no two families share a parameter, i.e. `sigma` is an element of `Fin ℕ`.
    pub fn has_distinct_sigma(&self) -> bool {
        self.sigma.windows(2).all(|w| w[0] < w[1])
    }
}

#[derive(Deserialize)]
struct RawCover {
    sigma: Vec<u64>,
    families: Vec<RawFamily>,
}

#[derive(Deserialize)]
struct RawFamily {
    r: u64,
    members: Vec<Vec<usize>>,
}

impl<'de> Deserialize<'de> for Cover {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawCover::deserialize(d)?;
        let families = raw
            .families
            .into_iter()
            .map(|f| Family::new(f.r, f.members))
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        let cover = Cover::new(families).map_err(serde::de::Error::custom)?;
        if cover.sigma != raw.sigma {
            return Err(serde::de::Error::custom(
                "sigma does not match the families' r values",
            ));
        }
        Ok(cover)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverVerdict {
    pub covers: bool,
    /// Largest member diameter, `None` when the cover has no members.
    pub bounded_by: Option<u64>,
    pub bound: u64,
    pub disjoint_ok: bool,
    pub first_violation: Option<String>,
}

impl CoverVerdict {
    pub fn bounded_ok(&self) -> bool {
        self.bounded_by.is_none_or(|d| d <= self.bound)
    }

    pub fn passed(&self) -> bool {
        self.covers && self.bounded_ok() && self.disjoint_ok
    }
}

pub fn diameter<M: PointMetric + ?Sized>(set: &[usize], metric: &M) -> Result<u64> {
    if set.is_empty() {
        return Err(Error::EmptySet("diameter"));
    }
    let mut best = 0;
    for (i, &a) in set.iter().enumerate() {
        for &b in &set[i + 1..] {
            best = best.max(metric.dist(a, b));
        }
    }
    Ok(best)
}

pub fn set_distance<M: PointMetric + ?Sized>(a: &[usize], b: &[usize], metric: &M) -> Result<u64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet("set_distance"));
    }
    Ok(a.iter()
        .flat_map(|&x| b.iter().map(move |&y| metric.dist(x, y)))
        .min()
        .expect("both sets nonempty"))
}

/// First pair of members closer than `family.r`, with their distance.
fn first_close_pair<M: PointMetric + ?Sized>(
    family: &Family,
    metric: &M,
) -> Option<(usize, usize, u64)> {
    let members = &family.members;
    for i in 0..members.len() {
        for j in i + 1..members.len() {
            let d = set_distance(&members[i], &members[j], metric).expect("members nonempty");
            if d < family.r {
                return Some((i, j, d));
            }
        }
    }
    None
}

/// Whether every two distinct members are at distance `≥ family.r`.
pub fn check_family<M: PointMetric + ?Sized>(family: &Family, metric: &M) -> bool {
    first_close_pair(family, metric).is_none()
}

/// Checks that `cover` covers all `metric.len()` points, that every member has
/// diameter at most `bound`, and that every family is disjoint at its `r`.
pub fn check_cover<M: PointMetric + ?Sized>(
    cover: &Cover,
    metric: &M,
    bound: u64,
) -> Result<CoverVerdict> {
    let n = metric.len();
    let mut seen = vec![false; n];
    for &p in cover.families.iter().flat_map(|f| f.members.iter().flatten()) {
        if p >= n {
            return Err(Error::StrayPoint { index: p, len: n });
        }
        seen[p] = true;
    }
    let mut first_violation = None;
    let missing = seen.iter().position(|s| !s);
    if let Some(p) = missing {
        first_violation = Some(format!("point {p} is not covered"));
    }

    let mut bounded_by = None;
    for (fi, family) in cover.families.iter().enumerate() {
        for (mi, member) in family.members.iter().enumerate() {
            let d = diameter(member, metric)?;
            bounded_by = Some(bounded_by.map_or(d, |b: u64| b.max(d)));
            if d > bound && first_violation.is_none() {
                first_violation = Some(format!(
                    "family {fi} (r = {}) member {mi} has diameter {d} > {bound}",
                    family.r
                ));
            }
        }
    }

    let mut disjoint_ok = true;
    for (fi, family) in cover.families.iter().enumerate() {
        if let Some((i, j, d)) = first_close_pair(family, metric) {
            disjoint_ok = false;
            if first_violation.is_none() {
                first_violation = Some(format!(
                    "family {fi} members {i} and {j} are at distance {d} < {}",
                    family.r
                ));
            }
        }
    }

    Ok(CoverVerdict {
        covers: missing.is_none(),
        bounded_by,
        bound,
        disjoint_ok,
        first_violation,
    })
}

/// Classes of the transitive closure of `d(a, b) < r` on `set`.
///
/// Each class is sorted and classes are ordered by their smallest element.
pub fn chain_components<M: PointMetric + ?Sized>(
    set: &[usize],
    r: u64,
    metric: &M,
) -> Vec<Vec<usize>> {
    let mut pts = set.to_vec();
    pts.sort_unstable();
    pts.dedup();
    let mut visited = vec![false; pts.len()];
    let mut out = Vec::new();
    for start in 0..pts.len() {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        let mut class = vec![start];
        let mut head = 0;
        while head < class.len() {
            let cur = class[head];
            head += 1;
            for next in 0..pts.len() {
                if !visited[next] && metric.dist(pts[cur], pts[next]) < r {
                    visited[next] = true;
                    class.push(next);
                }
            }
        }
        let mut members: Vec<usize> = class.into_iter().map(|i| pts[i]).collect();
        members.sort_unstable();
        out.push(members);
    }
    out
}
