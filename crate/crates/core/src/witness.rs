//! Constructive upper-bound witnesses.
//!
//! [`theorem1_witness`] cuts an `X_{2ω}` window at a level `k ≥ r`: the
//! points at levels `≥ k` form one family of singletons, and the remaining
//! low levels should sit inside the `k(k−1)/2`-neighbourhood of level `k−1`.
//! [`check_coasdim_step`] verifies one such step exactly. [`grid_cover`]
//! builds the product brick cover of an `ℝ^b` box.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covers::{Cover, Family};
use crate::error::{Error, Result};
use crate::metrics::{MetricHandle, PointMetric, WindowMetric};
use crate::spaces::{
    member_tower, IndexRange, Point, TowerPoint, Window, WindowSpec, DEFAULT_POINT_CEILING,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessDecomposition {
    pub r: u64,
    /// Level cut: least `k` with `k ≥ r` and `2^k ≥ r`.
    pub k: u32,
    /// `1 + 2 + … + (k−1)`.
    pub c: u64,
    pub window: String,
    pub tail_family: Family,
    pub residual: Vec<usize>,
}

fn tower_levels(window: &Window) -> Result<IndexRange> {
    match window.spec() {
        WindowSpec::X2Omega { levels, .. } => Ok(*levels),
        other => Err(Error::InvalidWitness(format!(
            "level-cut witnesses need an x2omega window, got {}",
            other.kind_name()
        ))),
    }
}

pub fn level_cut(r: u64) -> u32 {
    let mut k = 1u32;
    while (k as u64) < r || (k < 64 && (1u64 << k) < r) {
        k += 1;
    }
    k
}

/// The tail-singleton decomposition of `window` at scale `r`.
///
/// Performs no verification; pair with [`check_coasdim_step`].
pub fn theorem1_witness(window: &Window, r: u64) -> Result<WitnessDecomposition> {
    if r == 0 {
        return Err(Error::InvalidWitness("r must be positive".into()));
    }
    tower_levels(window)?;
    let k = level_cut(r);
    let level = |i: usize| window.points()[i].level().expect("tower window");
    let (tail, residual): (Vec<usize>, Vec<usize>) =
        (0..window.len()).partition(|&i| level(i) >= k);
    Ok(WitnessDecomposition {
        r,
        k,
        c: k as u64 * (k as u64 - 1) / 2,
        window: window.digest(),
        tail_family: Family::new(r, tail.into_iter().map(|i| vec![i]).collect())?,
        residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualStatus {
    /// Every residual point is within `c` of a point of `Y_{ω+k−1}`.
    Contained,
    /// Some residual point is farther than `c` from level `k−1`.
    Escapes,
    /// Nothing to check: the residual is empty.
    Empty,
    /// There is no level `k−1` to measure against.
    NoAnchors,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepVerdict {
    pub passed: bool,
    pub cut_ok: bool,
    pub partition_ok: bool,
    pub disjoint_ok: bool,
    pub bounded_ok: bool,
    pub residual: ResidualStatus,
    /// The tail family is empty because the window stops below level `k`.
    pub tail_empty: bool,
    /// Tail pairs closer than `r`: `(i, j, distance)`.
    pub close_pairs: Vec<(usize, usize, u64)>,
    /// Residual points farther than `c` from `Y_{ω+k−1}`.
    pub uncovered: Vec<usize>,
    /// Number of residual points farther than `c − 1`; reported only.
    pub uncovered_at_c_minus_1: Option<usize>,
    /// Largest distance from a residual point to `Y_{ω+k−1}`.
    pub max_residual_distance: Option<u64>,
}

/// Every point of `Y_{ω+level}` in blocks up to the window's largest block,
/// with coordinates in the window's box padded on both sides far enough that
/// the nearest such point to any window point is included.
fn level_anchors(window: &Window, level: u32) -> Result<Vec<Point>> {
    let (blocks, radius) = (window.spec().blocks(), window.spec().radius());
    let exp = level.max(blocks.hi);
    if exp >= 40 {
        return Err(Error::InvalidWitness(format!(
            "anchor grid 2^{level} is too coarse to enumerate"
        )));
    }
    let (step, pad) = (1i64 << level, 1i64 << exp);
    let axis: Vec<i64> = ((-pad).div_euclid(step)..=(radius + pad).div_euclid(step))
        .map(|j| j * step)
        .collect();
    let mut out = Vec::new();
    for block in 1..=blocks.hi {
        let estimate = (axis.len() as u128).checked_pow(block).unwrap_or(u128::MAX);
        if estimate > DEFAULT_POINT_CEILING as u128 {
            return Err(Error::WindowTooLarge {
                estimate,
                ceiling: DEFAULT_POINT_CEILING,
            });
        }
        let mut coords = vec![0usize; block as usize];
        'grid: loop {
            let c: Vec<i64> = coords.iter().map(|&i| axis[i]).collect();
            if member_tower(level, block, &c)? {
                out.push(Point::Tower(TowerPoint::new(level, c)?));
            }
            for slot in coords.iter_mut().rev() {
                *slot += 1;
                if *slot < axis.len() {
                    continue 'grid;
                }
                *slot = 0;
            }
            break;
        }
    }
    Ok(out)
}

/// Verifies one coasdim step for `dec` on `window` under `metric`.
///
/// The residual is measured against the whole summand `Y_{ω+k−1}`, not only
/// the level-`(k−1)` points that happen to lie in the window.
pub fn check_coasdim_step(
    window: &Window,
    dec: &WitnessDecomposition,
    metric: MetricHandle,
) -> Result<StepVerdict> {
    if dec.window != window.digest() {
        return Err(Error::InvalidWitness(
            "decomposition was built for a different window".into(),
        ));
    }
    tower_levels(window)?;
    let m = WindowMetric::new(window.points(), metric)?;
    let n = window.len();
    let k = dec.k;

    let cut_ok = k as u64 >= dec.r
        && (k >= 64 || (1u64 << k) >= dec.r)
        && dec.c == k as u64 * (k as u64 - 1) / 2
        && dec.tail_family.r == dec.r;

    let mut owner = vec![0u8; n];
    let mut partition_ok = true;
    for &i in dec.tail_family.members.iter().flatten().chain(&dec.residual) {
        if i >= n {
            return Err(Error::StrayPoint { index: i, len: n });
        }
        owner[i] += 1;
    }
    if owner.iter().any(|&c| c != 1) {
        partition_ok = false;
    }

    let bounded_ok = dec.tail_family.members.iter().all(|mem| mem.len() == 1);

    let tail: Vec<usize> = dec.tail_family.members.iter().flatten().copied().collect();
    let mut close_pairs = Vec::new();
    for (a, &x) in tail.iter().enumerate() {
        for &y in &tail[a + 1..] {
            let d = m.dist(x, y);
            if d < dec.r {
                close_pairs.push((x, y, d));
            }
        }
    }

    let anchors = if k >= 2 && !dec.residual.is_empty() {
        level_anchors(window, k - 1)?
    } else {
        Vec::new()
    };
    let nearest: Vec<(usize, u64)> = dec
        .residual
        .par_iter()
        .filter_map(|&x| {
            let p = &window.points()[x];
            anchors
                .iter()
                .map(|a| metric.distance(p, a).expect("tower points"))
                .min()
                .map(|d| (x, d))
        })
        .collect();
    let (residual, uncovered, uncovered_at_c_minus_1, max_residual_distance) =
        if dec.residual.is_empty() {
            (ResidualStatus::Empty, Vec::new(), None, None)
        } else if anchors.is_empty() {
            (ResidualStatus::NoAnchors, Vec::new(), None, None)
        } else {
            let uncovered: Vec<usize> = nearest
                .iter()
                .filter(|&&(_, d)| d > dec.c)
                .map(|&(x, _)| x)
                .collect();
            let tighter = dec
                .c
                .checked_sub(1)
                .map(|c1| nearest.iter().filter(|&&(_, d)| d > c1).count());
            let status = if uncovered.is_empty() {
                ResidualStatus::Contained
            } else {
                ResidualStatus::Escapes
            };
            let max = nearest.iter().map(|&(_, d)| d).max();
            (status, uncovered, tighter, max)
        };

    let disjoint_ok = close_pairs.is_empty();
    Ok(StepVerdict {
        passed: cut_ok
            && partition_ok
            && disjoint_ok
            && bounded_ok
            && residual != ResidualStatus::Escapes,
        cut_ok,
        partition_ok,
        disjoint_ok,
        bounded_ok,
        residual,
        tail_empty: tail.is_empty(),
        close_pairs,
        uncovered,
        uncovered_at_c_minus_1,
        max_residual_distance,
    })
}

/// Product brick cover of an `ℝ^b` window at scale `d`.
///
/// Bricks have side `d`; the brick containing `x` has index `⌊x_j / d⌋` on
/// axis `j`, and its family is the parity vector of that index (axis 0 most
/// significant). Same-family bricks differ by at least two on some axis, so
/// each of the `2^b` families is `d`-disjoint and every member has diameter
/// at most `d − 1`.
pub fn grid_cover(window: &Window, d: u64) -> Result<Cover> {
    let WindowSpec::R { block, .. } = *window.spec() else {
        return Err(Error::InvalidWitness(format!(
            "grid covers need an r window, got {}",
            window.spec().kind_name()
        )));
    };
    if d == 0 {
        return Err(Error::InvalidWitness("brick side must be positive".into()));
    }
    if block >= 16 {
        return Err(Error::InvalidWitness(format!("2^{block} families is too many")));
    }
    let side = d as i64;
    let mut families: Vec<BTreeMap<Vec<i64>, Vec<usize>>> = vec![BTreeMap::new(); 1 << block];
    for (i, p) in window.points().iter().enumerate() {
        let brick: Vec<i64> = p.coords().iter().map(|c| c.div_euclid(side)).collect();
        let parity = brick
            .iter()
            .fold(0usize, |acc, b| (acc << 1) | b.rem_euclid(2) as usize);
        families[parity].entry(brick).or_default().push(i);
    }
    let families = families
        .into_iter()
        .map(|bricks| {
            let mut members: Vec<Vec<usize>> = bricks.into_values().collect();
            members.sort_by_key(|m| m[0]);
            Family::new(d, members)
        })
        .collect::<Result<Vec<_>>>()?;
    Cover::new(families)
}
