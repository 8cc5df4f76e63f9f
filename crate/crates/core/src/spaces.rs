//! Integer point models of the lattice spaces and finite box windows over them.
//!
//! * `RPoint` — a point of `ℝ^b` with integer coordinates.
//! * `LevelPoint` — a point of the summand `X_k^{(b)}` of `X_{ω+k}`: at most
//!   `k` coordinates fail to be multiples of `2^b`.
//! * `TowerPoint` — a point of the summand `Y_level^{(b)}` of `X_{2ω}`: every
//!   coordinate is a multiple of `2^level`, and it is also in `X_level^{(b)}`.
//!
//! A [`Window`] is the finite set of such points with coordinates in
//! `[0, R]`, listed in canonical order `(level, block, coords)`.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::metrics::{MetricHandle, PointMetric, WindowMetric};

/// Default ceiling on the number of points a generator may enumerate.
pub const DEFAULT_POINT_CEILING: u64 = 5_000_000;

/// `c` is a multiple of `2^exp`.
pub fn divisible_by_pow2(c: i64, exp: u32) -> bool {
    c == 0 || c.trailing_zeros() >= exp
}

/// Number of coordinates that are not multiples of `2^exp`.
pub fn bad_coordinates(coords: &[i64], exp: u32) -> usize {
    coords.iter().filter(|&&c| !divisible_by_pow2(c, exp)).count()
}

fn block_of(coords: &[i64]) -> Result<u32> {
    if coords.is_empty() {
        return Err(Error::InvalidPoint("points need at least one coordinate".into()));
    }
    u32::try_from(coords.len()).map_err(|_| Error::InvalidPoint("too many coordinates".into()))
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RPoint {
    block: u32,
    coords: Vec<i64>,
}

impl RPoint {
    pub fn new(coords: Vec<i64>) -> Result<Self> {
        Ok(RPoint {
            block: block_of(&coords)?,
            coords,
        })
    }

    pub fn block(&self) -> u32 {
        self.block
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords
    }

    /// The natural embedding `ℝ^m → ℝ^n`, padding with zeros.
    pub fn embed_block(&self, target_block: u32) -> Result<RPoint> {
        if target_block < self.block {
            return Err(Error::EmbedTarget {
                what: "block",
                from: self.block,
                to: target_block,
            });
        }
        let mut coords = self.coords.clone();
        coords.resize(target_block as usize, 0);
        Ok(RPoint {
            block: target_block,
            coords,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LevelPoint {
    k: u32,
    block: u32,
    coords: Vec<i64>,
}

impl LevelPoint {
    pub fn new(k: u32, coords: Vec<i64>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidPoint("X_{ω+k} needs k ≥ 1".into()));
        }
        let block = block_of(&coords)?;
        if bad_coordinates(&coords, block) > k as usize {
            return Err(Error::InvalidPoint(format!(
                "{coords:?} has more than {k} coordinates outside 2^{block}Z"
            )));
        }
        Ok(LevelPoint { k, block, coords })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn block(&self) -> u32 {
        self.block
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords
    }

    /// The same coordinates viewed in `ℝ^block`.
    pub fn ambient(&self) -> RPoint {
        RPoint {
            block: self.block,
            coords: self.coords.clone(),
        }
    }

    /// The inclusion `X_{ω+k} → X_{ω+target_k}`.
    pub fn embed_level(&self, target_k: u32) -> Result<LevelPoint> {
        if target_k < self.k {
            return Err(Error::EmbedTarget {
                what: "level",
                from: self.k,
                to: target_k,
            });
        }
        Ok(LevelPoint {
            k: target_k,
            ..self.clone()
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TowerPoint {
    level: u32,
    block: u32,
    coords: Vec<i64>,
}

impl TowerPoint {
    pub fn new(level: u32, coords: Vec<i64>) -> Result<Self> {
        if level == 0 {
            return Err(Error::InvalidPoint("tower levels start at 1".into()));
        }
        let block = block_of(&coords)?;
        if !member_tower(level, block, &coords)? {
            return Err(Error::InvalidPoint(format!(
                "{coords:?} is not in Y_{level}^({block})"
            )));
        }
        Ok(TowerPoint {
            level,
            block,
            coords,
        })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn block(&self) -> u32 {
        self.block
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords
    }

    /// The point as a member of `X_{ω+level}`.
    pub fn as_level_point(&self) -> LevelPoint {
        LevelPoint {
            k: self.level,
            block: self.block,
            coords: self.coords.clone(),
        }
    }
}

/// A point of any of the modelled spaces.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Point {
    R(RPoint),
    Level(LevelPoint),
    Tower(TowerPoint),
}

impl Point {
    pub fn block(&self) -> u32 {
        match self {
            Point::R(p) => p.block,
            Point::Level(p) => p.block,
            Point::Tower(p) => p.block,
        }
    }

    pub fn coords(&self) -> &[i64] {
        match self {
            Point::R(p) => &p.coords,
            Point::Level(p) => &p.coords,
            Point::Tower(p) => &p.coords,
        }
    }

    /// Tower level, if this is a point of `X_{2ω}`.
    pub fn level(&self) -> Option<u32> {
        match self {
            Point::Tower(p) => Some(p.level),
            _ => None,
        }
    }

    /// Coordinates zero-padded into `ℝ^target_block`.
    ///
    /// The image of a level or tower point generally leaves its summand, so the
    /// result is always an ambient point.
    pub fn embed_block(&self, target_block: u32) -> Result<RPoint> {
        RPoint {
            block: self.block(),
            coords: self.coords().to_vec(),
        }
        .embed_block(target_block)
    }

    fn kind_name(&self) -> &'static str {
        match self {
            Point::R(_) => "R point",
            Point::Level(_) => "X_{ω+k} point",
            Point::Tower(_) => "X_{2ω} point",
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let coords: Vec<String> = self.coords().iter().map(|c| c.to_string()).collect();
        match self {
            Point::R(_) => write!(f, "({})", coords.join(",")),
            Point::Level(p) => write!(f, "k{}:({})", p.k, coords.join(",")),
            Point::Tower(p) => write!(f, "L{}:({})", p.level, coords.join(",")),
        }
    }
}

/// Membership of `x` in `X_k^{(i)}`.
pub fn member_xki(k: u32, i: u32, x: &RPoint) -> Result<bool> {
    if x.block != i {
        return Err(Error::DimensionMismatch {
            expected: i as usize,
            actual: x.block as usize,
        });
    }
    Ok(bad_coordinates(&x.coords, i) <= k as usize)
}

/// Membership of `coords` in `Y_level^{(block)} = X_level^{(block)} ∩ (2^level Z)^block`.
pub fn member_tower(level: u32, block: u32, coords: &[i64]) -> Result<bool> {
    if coords.len() != block as usize {
        return Err(Error::DimensionMismatch {
            expected: block as usize,
            actual: coords.len(),
        });
    }
    Ok(coords.iter().all(|&c| divisible_by_pow2(c, level))
        && bad_coordinates(coords, block) <= level as usize)
}

/// Inclusive range of positive indices, serialized as `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "[u32; 2]", into = "[u32; 2]")]
pub struct IndexRange {
    pub lo: u32,
    pub hi: u32,
}

impl IndexRange {
    pub fn new(lo: u32, hi: u32) -> Self {
        IndexRange { lo, hi }
    }

    pub fn single(i: u32) -> Self {
        IndexRange { lo: i, hi: i }
    }

    pub fn iter(&self) -> std::ops::RangeInclusive<u32> {
        self.lo..=self.hi
    }

    pub fn contains(&self, i: u32) -> bool {
        self.lo <= i && i <= self.hi
    }

    fn validate(&self, what: &str) -> Result<()> {
        if self.lo == 0 || self.lo > self.hi {
            return Err(Error::InvalidWindow(format!(
                "{what} range {}..{} must be nonempty and start at 1 or above",
                self.lo, self.hi
            )));
        }
        Ok(())
    }
}

impl From<[u32; 2]> for IndexRange {
    fn from([lo, hi]: [u32; 2]) -> Self {
        IndexRange { lo, hi }
    }
}

impl From<IndexRange> for [u32; 2] {
    fn from(r: IndexRange) -> Self {
        [r.lo, r.hi]
    }
}

impl std::str::FromStr for IndexRange {
    type Err = Error;

    /// Accepts `"a..b"`, `"a..=b"` or a single `"a"`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidWindow(format!("bad range {s:?}, expected a..b"));
        let parse = |t: &str| t.trim().parse::<u32>().map_err(|_| bad());
        match s.split_once("..") {
            Some((a, b)) => Ok(IndexRange::new(parse(a)?, parse(b.trim_start_matches('='))?)),
            None => Ok(IndexRange::single(parse(s)?)),
        }
    }
}

/// The space a window samples and its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "lowercase")]
pub enum WindowSpec {
    /// `{0..R}^block ⊂ ℝ^block`.
    R { block: u32, radius: i64 },
    /// `X_k^{(i)}` as one summand of `X_{ω+k}`.
    Xki { k: u32, i: u32, radius: i64 },
    XOmegaK {
        k: u32,
        blocks: IndexRange,
        radius: i64,
    },
    YOmegaK {
        k: u32,
        blocks: IndexRange,
        radius: i64,
    },
    X2Omega {
        levels: IndexRange,
        blocks: IndexRange,
        radius: i64,
    },
}

impl WindowSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            WindowSpec::R { .. } => "r",
            WindowSpec::Xki { .. } => "xki",
            WindowSpec::XOmegaK { .. } => "xomegak",
            WindowSpec::YOmegaK { .. } => "yomegak",
            WindowSpec::X2Omega { .. } => "x2omega",
        }
    }

    pub fn radius(&self) -> i64 {
        match *self {
            WindowSpec::R { radius, .. }
            | WindowSpec::Xki { radius, .. }
            | WindowSpec::XOmegaK { radius, .. }
            | WindowSpec::YOmegaK { radius, .. }
            | WindowSpec::X2Omega { radius, .. } => radius,
        }
    }

    pub fn blocks(&self) -> IndexRange {
        match *self {
            WindowSpec::R { block, .. } => IndexRange::single(block),
            WindowSpec::Xki { i, .. } => IndexRange::single(i),
            WindowSpec::XOmegaK { blocks, .. }
            | WindowSpec::YOmegaK { blocks, .. }
            | WindowSpec::X2Omega { blocks, .. } => blocks,
        }
    }

    /// Metric the window's points carry by default.
    pub fn default_metric(&self) -> MetricHandle {
        match *self {
            WindowSpec::R { .. } => MetricHandle::Sup,
            WindowSpec::Xki { k, .. }
            | WindowSpec::XOmegaK { k, .. }
            | WindowSpec::YOmegaK { k, .. } => MetricHandle::Level(k),
            WindowSpec::X2Omega { .. } => MetricHandle::Tower,
        }
    }

    /// Checks index ranges and the box-radius divisibility rule.
    ///
    /// For the lattice spaces `R` must be a multiple of `2^m`, with `m` the
    /// largest block or level index in range. The `k` of `X_{ω+k}` only
    /// bounds the bad coordinates and does not count; for `Y_{ω+k}` it is the
    /// grid level and does. Plain `ℝ^b` boxes carry no
    /// dyadic structure and accept any radius.
    pub fn validate(&self) -> Result<()> {
        if self.radius() < 0 {
            return Err(Error::InvalidWindow("box radius must be nonnegative".into()));
        }
        let positive = |v: u32, what: &str| {
            if v == 0 {
                Err(Error::InvalidWindow(format!("{what} must be positive")))
            } else {
                Ok(())
            }
        };
        let max_index = match *self {
            WindowSpec::R { block, .. } => {
                positive(block, "block")?;
                return Ok(());
            }
            WindowSpec::Xki { k, i, .. } => {
                positive(k, "k")?;
                positive(i, "i")?;
                i
            }
            WindowSpec::XOmegaK { k, blocks, .. } => {
                positive(k, "k")?;
                blocks.validate("block")?;
                blocks.hi
            }
            WindowSpec::YOmegaK { k, blocks, .. } => {
                positive(k, "k")?;
                blocks.validate("block")?;
                blocks.hi.max(k)
            }
            WindowSpec::X2Omega { levels, blocks, .. } => {
                levels.validate("level")?;
                blocks.validate("block")?;
                blocks.hi.max(levels.hi)
            }
        };
        let multiple = max_index < 63 && divisible_by_pow2(self.radius(), max_index);
        if !multiple {
            return Err(Error::InvalidWindow(format!(
                "box radius {} is not a multiple of 2^{max_index}",
                self.radius()
            )));
        }
        Ok(())
    }

    /// Summands enumerated by the generator: `(level, block, coordinate step)`.
    fn summands(&self) -> Vec<(u32, u32, i64)> {
        match *self {
            WindowSpec::R { block, .. } => vec![(0, block, 1)],
            WindowSpec::Xki { k, i, .. } => vec![(k, i, 1)],
            WindowSpec::XOmegaK { k, blocks, .. } => blocks.iter().map(|b| (k, b, 1)).collect(),
            WindowSpec::YOmegaK { k, blocks, .. } => {
                blocks.iter().map(|b| (k, b, 1i64 << k)).collect()
            }
            WindowSpec::X2Omega { levels, blocks, .. } => levels
                .iter()
                .flat_map(|l| blocks.iter().map(move |b| (l, b, 1i64 << l)))
                .collect(),
        }
    }

    /// Upper estimate of the number of generated points (size of the scanned boxes).
    pub fn estimate_points(&self) -> u128 {
        let radius = self.radius().max(0) as u128;
        self.summands()
            .into_iter()
            .map(|(_, block, step)| {
                let per_axis = radius / step as u128 + 1;
                per_axis.checked_pow(block).unwrap_or(u128::MAX)
            })
            .fold(0u128, u128::saturating_add)
    }

    /// Builds and validates a point of this window's space.
    pub fn make_point(&self, level: Option<u32>, coords: Vec<i64>) -> Result<Point> {
        let radius = self.radius();
        if coords.iter().any(|&c| c < 0 || c > radius) {
            return Err(Error::InvalidPoint(format!(
                "{coords:?} lies outside the box [0, {radius}]"
            )));
        }
        if !self.blocks().contains(block_of(&coords)?) {
            return Err(Error::InvalidPoint(format!(
                "{coords:?} is not in block range {:?}",
                self.blocks()
            )));
        }
        match *self {
            WindowSpec::R { .. } => Ok(Point::R(RPoint::new(coords)?)),
            WindowSpec::Xki { k, .. } | WindowSpec::XOmegaK { k, .. } => {
                Ok(Point::Level(LevelPoint::new(k, coords)?))
            }
            WindowSpec::YOmegaK { k, .. } => {
                if !coords.iter().all(|&c| divisible_by_pow2(c, k)) {
                    return Err(Error::InvalidPoint(format!(
                        "{coords:?} is not on the 2^{k} grid of Y_{{ω+{k}}}"
                    )));
                }
                Ok(Point::Level(LevelPoint::new(k, coords)?))
            }
            WindowSpec::X2Omega { levels, .. } => {
                let level = level.ok_or_else(|| {
                    Error::InvalidPoint("X_{2ω} points need a level".into())
                })?;
                if !levels.contains(level) {
                    return Err(Error::InvalidPoint(format!(
                        "level {level} outside range {levels:?}"
                    )));
                }
                Ok(Point::Tower(TowerPoint::new(level, coords)?))
            }
        }
    }
}

/// A finite, canonically ordered set of points of one space.
///
/// A generated window holds every point of its space inside the box. Windows
/// obtained by [`Window::restrict`] are marked `subset` and hold a sub-list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Window {
    spec: WindowSpec,
    subset: bool,
    points: Vec<Point>,
}

/// Enumerates every point of `spec` in canonical order.
pub fn gen_window(spec: WindowSpec) -> Result<Window> {
    gen_window_with_ceiling(spec, DEFAULT_POINT_CEILING)
}

pub fn gen_window_with_ceiling(spec: WindowSpec, ceiling: u64) -> Result<Window> {
    spec.validate()?;
    let estimate = spec.estimate_points();
    if estimate > ceiling as u128 {
        return Err(Error::WindowTooLarge { estimate, ceiling });
    }
    let radius = spec.radius();
    let mut points = Vec::new();
    for (level, block, step) in spec.summands() {
        let mut coords = vec![0i64; block as usize];
        'enumerate: loop {
            if let Ok(p) = spec.make_point(Some(level), coords.clone()) {
                points.push(p);
            }
            // odometer, last axis fastest
            let mut axis = block as usize;
            while axis > 0 {
                axis -= 1;
                if coords[axis] + step <= radius {
                    coords[axis] += step;
                    coords[axis + 1..].iter_mut().for_each(|c| *c = 0);
                    continue 'enumerate;
                }
            }
            break;
        }
    }
    points.sort();
    Ok(Window {
        spec,
        subset: false,
        points,
    })
}

impl Window {
    /// `{0, 1, …, n} ⊂ ℤ` with the sup metric.
    pub fn interval(n: i64) -> Result<Window> {
        gen_window(WindowSpec::R {
            block: 1,
            radius: n,
        })
    }

    /// Builds a window from an explicit point list, validating every point.
    ///
    /// With `subset == false` the list must equal the generated window.
    pub fn from_parts(spec: WindowSpec, subset: bool, mut points: Vec<Point>) -> Result<Window> {
        spec.validate()?;
        points.sort();
        if points.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidWindow("duplicate points".into()));
        }
        for p in &points {
            let rebuilt = spec.make_point(p.level(), p.coords().to_vec())?;
            if &rebuilt != p {
                return Err(Error::InvalidWindow(format!(
                    "{} point {p} does not belong to a {} window",
                    p.kind_name(),
                    spec.kind_name()
                )));
            }
        }
        let window = Window {
            spec,
            subset,
            points,
        };
        if !subset && gen_window(spec)?.points != window.points {
            return Err(Error::InvalidWindow(
                "point list is not the complete window; mark it as a subset".into(),
            ));
        }
        Ok(window)
    }

    /// Sub-window on the given point indices.
    pub fn restrict(&self, indices: &[usize]) -> Result<Window> {
        let mut idx = indices.to_vec();
        idx.sort_unstable();
        idx.dedup();
        if let Some(&bad) = idx.iter().find(|&&i| i >= self.points.len()) {
            return Err(Error::StrayPoint {
                index: bad,
                len: self.points.len(),
            });
        }
        Ok(Window {
            spec: self.spec,
            subset: true,
            points: idx.into_iter().map(|i| self.points[i].clone()).collect(),
        })
    }

    pub fn spec(&self) -> &WindowSpec {
        &self.spec
    }

    pub fn is_subset(&self) -> bool {
        self.subset
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn default_metric(&self) -> MetricHandle {
        self.spec.default_metric()
    }

    pub fn index_of(&self, p: &Point) -> Option<usize> {
        self.points.binary_search(p).ok()
    }

    /// Indices of the points satisfying `pred`, ascending.
    pub fn select<F: Fn(&Point) -> bool>(&self, pred: F) -> Vec<usize> {
        (0..self.points.len())
            .filter(|&i| pred(&self.points[i]))
            .collect()
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn digest(&self) -> String {
        crate::content_digest(&serde_json::to_vec(self).expect("window serializes"))
    }

    /// Encodes one point as a JSON array: coordinates, prefixed by the level for tower points.
    pub fn encode_point(p: &Point) -> Vec<i64> {
        match p {
            Point::Tower(t) => std::iter::once(t.level as i64)
                .chain(t.coords.iter().copied())
                .collect(),
            other => other.coords().to_vec(),
        }
    }

    pub fn decode_point(spec: &WindowSpec, raw: Vec<i64>) -> Result<Point> {
        match spec {
            WindowSpec::X2Omega { .. } => {
                let (&level, coords) = raw
                    .split_first()
                    .ok_or_else(|| Error::InvalidPoint("empty point".into()))?;
                let level = u32::try_from(level)
                    .map_err(|_| Error::InvalidPoint(format!("bad level {level}")))?;
                spec.make_point(Some(level), coords.to_vec())
            }
            _ => spec.make_point(None, raw),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RawWindow {
    #[serde(flatten)]
    spec: WindowSpec,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    subset: bool,
    points: Vec<Vec<i64>>,
}

impl Serialize for Window {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        RawWindow {
            spec: self.spec,
            subset: self.subset,
            points: self.points.iter().map(Window::encode_point).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Window {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = RawWindow::deserialize(deserializer)?;
        let points = raw
            .points
            .into_iter()
            .map(|p| Window::decode_point(&raw.spec, p))
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        Window::from_parts(raw.spec, raw.subset, points).map_err(serde::de::Error::custom)
    }
}

/// `N_R(A) = { x ∈ W : d(x, A) ≤ R }` as ascending point indices.
pub fn neighborhood(
    window: &Window,
    anchors: &[usize],
    radius: u64,
    metric: MetricHandle,
) -> Result<Vec<usize>> {
    if anchors.is_empty() {
        return Err(Error::EmptySet("neighborhood"));
    }
    if let Some(&bad) = anchors.iter().find(|&&a| a >= window.len()) {
        return Err(Error::StrayPoint {
            index: bad,
            len: window.len(),
        });
    }
    let m = WindowMetric::new(window.points(), metric)?;
    Ok((0..window.len())
        .filter(|&x| anchors.iter().any(|&a| m.dist(x, a) <= radius))
        .collect())
}
