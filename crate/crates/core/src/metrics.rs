//! Exact integer metrics on the point models, and a seeded axiom auditor.
//!
//! * `Sup` — `d_∞` on `ℝ^b`.
//! * `Level(k)` — `d_k` on `X_{ω+k}`: sup distance after zero-padding to the
//!   larger block, floored by `k·(m + … + (n−1))` for blocks `m < n`.
//! * `Tower` — `d` on `X_{2ω}`: for levels `m ≤ n`, the `d_n` distance of the
//!   two points floored by `m + … + (n−1)`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::spaces::{LevelPoint, Point, RPoint, TowerPoint, Window};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MetricHandle {
    Sup,
    Level(u32),
    Tower,
}

impl fmt::Display for MetricHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricHandle::Sup => write!(f, "sup"),
            MetricHandle::Level(k) => write!(f, "level:{k}"),
            MetricHandle::Tower => write!(f, "tower"),
        }
    }
}

impl FromStr for MetricHandle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sup" => Ok(MetricHandle::Sup),
            "tower" => Ok(MetricHandle::Tower),
            _ => s
                .strip_prefix("level:")
                .and_then(|k| k.parse().ok())
                .filter(|&k| k > 0)
                .map(MetricHandle::Level)
                .ok_or_else(|| Error::MetricMismatch {
                    metric: s.into(),
                    points: "any (expected sup, level:K or tower)".into(),
                }),
        }
    }
}

impl Serialize for MetricHandle {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for MetricHandle {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(deserializer)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// Sup distance treating missing trailing coordinates as zero.
fn sup_padded(a: &[i64], b: &[i64]) -> u64 {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            x.abs_diff(y)
        })
        .max()
        .unwrap_or(0)
}

/// `m + (m+1) + … + (n−1)` for `m ≤ n`, zero when `m == n`.
pub fn consecutive_sum(m: u32, n: u32) -> u64 {
    let (m, n) = (m.min(n) as u64, m.max(n) as u64);
    (n - m) * (m + n - 1) / 2
}

/// Offset between blocks `m` and `n` of `X_{ω+k}`: `k·(m + … + (n−1))`.
pub fn block_offset(k: u32, m: u32, n: u32) -> u64 {
    k as u64 * consecutive_sum(m, n)
}

/// Offset between levels `m` and `n` of `X_{2ω}`: `m + … + (n−1)`.
pub fn level_offset(m: u32, n: u32) -> u64 {
    consecutive_sum(m, n)
}

pub fn dist_sup(x: &RPoint, y: &RPoint) -> Result<u64> {
    if x.block() != y.block() {
        return Err(Error::DimensionMismatch {
            expected: x.block() as usize,
            actual: y.block() as usize,
        });
    }
    Ok(sup_padded(x.coords(), y.coords()))
}

fn level_unchecked(k: u32, xb: u32, xc: &[i64], yb: u32, yc: &[i64]) -> u64 {
    sup_padded(xc, yc).max(block_offset(k, xb, yb))
}

pub fn dist_level(k: u32, x: &LevelPoint, y: &LevelPoint) -> Result<u64> {
    if x.k() != k || y.k() != k {
        return Err(Error::MetricMismatch {
            metric: MetricHandle::Level(k).to_string(),
            points: format!("X_{{ω+{}}} and X_{{ω+{}}} points", x.k(), y.k()),
        });
    }
    Ok(level_unchecked(k, x.block(), x.coords(), y.block(), y.coords()))
}

pub fn dist_tower(x: &TowerPoint, y: &TowerPoint) -> u64 {
    let upper = x.level().max(y.level());
    let inner = level_unchecked(upper, x.block(), x.coords(), y.block(), y.coords());
    inner.max(level_offset(x.level(), y.level()))
}

impl MetricHandle {
    pub fn distance(&self, x: &Point, y: &Point) -> Result<u64> {
        match (self, x, y) {
            (MetricHandle::Sup, Point::R(a), Point::R(b)) => dist_sup(a, b),
            (MetricHandle::Level(k), Point::Level(a), Point::Level(b)) => dist_level(*k, a, b),
            (MetricHandle::Tower, Point::Tower(a), Point::Tower(b)) => Ok(dist_tower(a, b)),
            _ => Err(self.mismatch(x)),
        }
    }

    fn mismatch(&self, p: &Point) -> Error {
        Error::MetricMismatch {
            metric: self.to_string(),
            points: format!("point {p}"),
        }
    }

    /// Checks that every point can be measured with this metric.
    pub fn check_points(&self, points: &[Point]) -> Result<()> {
        let first_block = points.first().map(Point::block);
        for p in points {
            let ok = match (self, p) {
                (MetricHandle::Sup, Point::R(r)) => Some(r.block()) == first_block,
                (MetricHandle::Level(k), Point::Level(l)) => l.k() == *k,
                (MetricHandle::Tower, Point::Tower(_)) => true,
                _ => false,
            };
            if !ok {
                return Err(self.mismatch(p));
            }
        }
        Ok(())
    }
}

/// Distances between the points of a finite set, addressed by index.
pub trait PointMetric: Sync {
    fn len(&self) -> usize;
    fn dist(&self, i: usize, j: usize) -> u64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Distances computed on demand from a validated point list.
#[derive(Debug, Clone, Copy)]
pub struct WindowMetric<'a> {
    points: &'a [Point],
    handle: MetricHandle,
}

impl<'a> WindowMetric<'a> {
    pub fn new(points: &'a [Point], handle: MetricHandle) -> Result<Self> {
        handle.check_points(points)?;
        Ok(WindowMetric { points, handle })
    }

    pub fn for_window(window: &'a Window) -> Self {
        WindowMetric {
            points: window.points(),
            handle: window.default_metric(),
        }
    }

    pub fn handle(&self) -> MetricHandle {
        self.handle
    }
}

impl PointMetric for WindowMetric<'_> {
    fn len(&self) -> usize {
        self.points.len()
    }

    fn dist(&self, i: usize, j: usize) -> u64 {
        let (x, y) = (&self.points[i], &self.points[j]);
        match (self.handle, x, y) {
            (MetricHandle::Sup, _, _) => sup_padded(x.coords(), y.coords()),
            (MetricHandle::Level(k), _, _) => {
                level_unchecked(k, x.block(), x.coords(), y.block(), y.coords())
            }
            (MetricHandle::Tower, Point::Tower(a), Point::Tower(b)) => dist_tower(a, b),
            _ => unreachable!("points validated against the metric"),
        }
    }
}

/// Dense distance matrix, used by the search where every pair is read repeatedly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceTable {
    n: usize,
    d: Vec<u64>,
}

impl DistanceTable {
    pub fn from_metric<M: PointMetric + ?Sized>(m: &M) -> Self {
        let n = m.len();
        let d = (0..n)
            .into_par_iter()
            .flat_map_iter(|i| (0..n).map(move |j| m.dist(i, j)))
            .collect();
        DistanceTable { n, d }
    }

    pub fn for_window(window: &Window, handle: MetricHandle) -> Result<Self> {
        Ok(Self::from_metric(&WindowMetric::new(window.points(), handle)?))
    }

    /// Largest pairwise distance, 0 for fewer than two points.
    pub fn diameter(&self) -> u64 {
        self.d.iter().copied().max().unwrap_or(0)
    }
}

impl PointMetric for DistanceTable {
    fn len(&self) -> usize {
        self.n
    }

    #[inline]
    fn dist(&self, i: usize, j: usize) -> u64 {
        self.d[i * self.n + j]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axiom {
    Identity,
    Symmetry,
    Triangle,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub sample: u64,
    pub axiom: Axiom,
    /// Window indices of the witnessing triple `(x, y, z)`.
    pub triple: [usize; 3],
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    pub metric: MetricHandle,
    pub seed: u64,
    pub checked: u64,
    /// Sampled triples with at least two distinct points.
    pub distinct_triples: u64,
    pub violation_count: u64,
    pub violations: Vec<Violation>,
}

const AUDIT_CHUNK: u64 = 4096;

/// Samples `samples` seeded triples and checks identity, symmetry and every
/// triangle inequality among them.
///
/// Sample `s` is drawn from the ChaCha stream `s / 4096`, so the report does
/// not depend on how the chunks are spread across threads.
pub fn metric_audit(
    window: &Window,
    handle: MetricHandle,
    samples: u64,
    seed: u64,
) -> Result<AuditReport> {
    let m = WindowMetric::new(window.points(), handle)?;
    let n = window.len();
    if n == 0 {
        return Err(Error::EmptySet("metric_audit"));
    }
    let chunks = samples.div_ceil(AUDIT_CHUNK);
    let results: Vec<(u64, Vec<Violation>)> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk);
            let start = chunk * AUDIT_CHUNK;
            let end = (start + AUDIT_CHUNK).min(samples);
            let mut distinct = 0;
            let mut found = Vec::new();
            for sample in start..end {
                let t = [rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n)];
                if !(t[0] == t[1] && t[1] == t[2]) {
                    distinct += 1;
                }
                audit_triple(&m, window, sample, t, &mut found);
            }
            (distinct, found)
        })
        .collect();
    let mut report = AuditReport {
        metric: handle,
        seed,
        checked: samples,
        distinct_triples: 0,
        violation_count: 0,
        violations: Vec::new(),
    };
    for (distinct, found) in results {
        report.distinct_triples += distinct;
        report.violation_count += found.len() as u64;
        report.violations.extend(found);
    }
    Ok(report)
}

fn audit_triple(
    m: &WindowMetric<'_>,
    window: &Window,
    sample: u64,
    t: [usize; 3],
    out: &mut Vec<Violation>,
) {
    let p = |i: usize| &window.points()[t[i]];
    let d = |a: usize, b: usize| m.dist(t[a], t[b]);
    for (a, b) in [(0, 1), (1, 2), (0, 2)] {
        let dab = d(a, b);
        if (dab == 0) != (t[a] == t[b]) {
            out.push(Violation {
                sample,
                axiom: Axiom::Identity,
                triple: t,
                detail: format!("d({}, {}) = {dab}", p(a), p(b)),
            });
        }
        let dba = d(b, a);
        if dab != dba {
            out.push(Violation {
                sample,
                axiom: Axiom::Symmetry,
                triple: t,
                detail: format!("d({0}, {1}) = {dab} but d({1}, {0}) = {dba}", p(a), p(b)),
            });
        }
    }
    // each point in turn as the intermediate one
    for (a, mid, c) in [(0, 1, 2), (1, 0, 2), (0, 2, 1)] {
        let (dac, dam, dmc) = (d(a, c), d(a, mid), d(mid, c));
        if dac > dam + dmc {
            out.push(Violation {
                sample,
                axiom: Axiom::Triangle,
                triple: [t[a], t[mid], t[c]],
                detail: format!(
                    "d({}, {}) = {dac} > {dam} + {dmc} via {}",
                    p(a),
                    p(c),
                    p(mid)
                ),
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{gen_window, IndexRange, WindowSpec};

    fn r(v: &[i64]) -> RPoint {
        RPoint::new(v.to_vec()).unwrap()
    }
    fn lp(k: u32, v: &[i64]) -> LevelPoint {
        LevelPoint::new(k, v.to_vec()).unwrap()
    }
    fn tp(level: u32, v: &[i64]) -> TowerPoint {
        TowerPoint::new(level, v.to_vec()).unwrap()
    }

    #[test]
    fn sup_examples() {
        assert_eq!(dist_sup(&r(&[0, 0]), &r(&[3, -4])).unwrap(), 4);
        assert_eq!(dist_sup(&r(&[7, 1]), &r(&[7, 1])).unwrap(), 0);
        assert_eq!(dist_sup(&r(&[5, 0, 0]), &r(&[5, 0, 2])).unwrap(), 2);
        assert!(dist_sup(&r(&[5]), &r(&[5, 0])).is_err());
    }

    #[test]
    fn level_examples() {
        assert_eq!(dist_level(2, &lp(2, &[5]), &lp(2, &[5, 0, 2])).unwrap(), 6);
        assert_eq!(dist_level(2, &lp(2, &[5, 0, 2]), &lp(2, &[5])).unwrap(), 6);
        assert_eq!(dist_level(1, &lp(1, &[0, 8]), &lp(1, &[5, 8])).unwrap(), 5);
        assert_eq!(dist_level(1, &lp(1, &[3, 8]), &lp(1, &[3, 8])).unwrap(), 0);
        assert!(dist_level(1, &lp(1, &[0]), &lp(2, &[0])).is_err());
    }

    #[test]
    fn tower_examples() {
        assert_eq!(dist_tower(&tp(1, &[0]), &tp(3, &[0])), 3);
        assert_eq!(dist_tower(&tp(1, &[2, 0]), &tp(2, &[4, 8])), 8);
        assert_eq!(dist_tower(&tp(1, &[2]), &tp(1, &[2, 0])), 1);
        assert_eq!(dist_tower(&tp(3, &[0]), &tp(1, &[0])), 3);
    }

    #[test]
    fn offsets() {
        assert_eq!(consecutive_sum(1, 3), 3);
        assert_eq!(consecutive_sum(3, 1), 3);
        assert_eq!(consecutive_sum(4, 4), 0);
        assert_eq!(consecutive_sum(2, 5), 2 + 3 + 4);
        assert_eq!(block_offset(2, 1, 3), 6);
        assert_eq!(level_offset(1, 4), 6);
    }

    #[test]
    fn handle_dispatch_and_parse() {
        let a = Point::Level(lp(1, &[0]));
        let b = Point::Tower(tp(1, &[0]));
        assert!(MetricHandle::Tower.distance(&a, &b).is_err());
        assert!(MetricHandle::Sup.distance(&a, &a).is_err());
        assert_eq!(MetricHandle::Level(1).distance(&a, &a).unwrap(), 0);
        for h in [MetricHandle::Sup, MetricHandle::Level(3), MetricHandle::Tower] {
            assert_eq!(h.to_string().parse::<MetricHandle>().unwrap(), h);
        }
        assert!("level:0".parse::<MetricHandle>().is_err());
        assert!("euclid".parse::<MetricHandle>().is_err());
    }

    #[test]
    fn window_metric_matches_typed_functions() {
        let w = gen_window(WindowSpec::X2Omega {
            levels: IndexRange::new(1, 2),
            blocks: IndexRange::new(1, 2),
            radius: 8,
        })
        .unwrap();
        let m = WindowMetric::for_window(&w);
        let t = DistanceTable::from_metric(&m);
        for i in 0..w.len() {
            for j in 0..w.len() {
                let expected = MetricHandle::Tower
                    .distance(&w.points()[i], &w.points()[j])
                    .unwrap();
                assert_eq!(m.dist(i, j), expected);
                assert_eq!(t.dist(i, j), expected);
            }
        }
    }

    #[test]
    fn audit_sup_is_clean_and_deterministic() {
        let w = gen_window(WindowSpec::R {
            block: 2,
            radius: 9,
        })
        .unwrap();
        let a = metric_audit(&w, MetricHandle::Sup, 10_000, 7).unwrap();
        assert_eq!(a.violation_count, 0);
        assert_eq!(a.checked, 10_000);
        assert_eq!(a, metric_audit(&w, MetricHandle::Sup, 10_000, 7).unwrap());
    }

    #[test]
    fn audit_single_point_window() {
        let w = Window::interval(0).unwrap();
        let a = metric_audit(&w, MetricHandle::Sup, 100, 0).unwrap();
        assert_eq!((a.violation_count, a.distinct_triples), (0, 0));
    }

    #[test]
    fn audit_rejects_wrong_metric() {
        let w = Window::interval(3).unwrap();
        assert!(metric_audit(&w, MetricHandle::Tower, 10, 0).is_err());
    }
}
