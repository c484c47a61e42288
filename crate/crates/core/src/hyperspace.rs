//! Compact sets and the Hausdorff partial metric.
//!
//! Two backends: finite point sets (deduplicated on a snap grid) and exact
//! 1-D intervals. Interval distances use closed forms so that values on
//! intervals with integer endpoints come out exact.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::pmetric::{Carrier, Point, RealSpace, Rule};

/// Snap resolution used when none is given: `2^-10` of the carrier extent.
pub fn default_snap(carrier: &Carrier) -> f64 {
    carrier.extent().max(f64::MIN_POSITIVE) / 1024.0
}

/// A non-empty finite point set, sorted lexicographically.
#[derive(Clone, Debug, PartialEq)]
pub struct FinitePointSet {
    points: Vec<Point>,
    snap: Option<f64>,
}

impl FinitePointSet {
    /// Exact deduplication only.
    pub fn new(mut points: Vec<Point>) -> Result<Self> {
        check_points(&points)?;
        points.sort_by(|a, b| a.lex_cmp(b));
        points.dedup();
        Ok(FinitePointSet { points, snap: None })
    }

    /// Replaces every point by the nearest point of the grid
    /// `carrier.lo() + k * snap` (clamped to the carrier) and deduplicates.
    /// Quantization is idempotent, and iterating a map followed by
    /// quantization runs on a finite state space.
    pub fn quantized(points: Vec<Point>, snap: f64, carrier: &Carrier) -> Result<Self> {
        check_points(&points)?;
        if !(snap.is_finite() && snap > 0.0) {
            return Err(Error::InvalidSet(format!("snap must be positive, got {snap}")));
        }
        let dim = points[0].dim();
        if dim != carrier.dim() {
            return Err(Error::DimensionMismatch {
                expected: carrier.dim(),
                got: dim,
            });
        }
        let (lo, hi) = (carrier.lo(), carrier.hi());
        let (o, h) = (lo.coords(), hi.coords());
        let top: Vec<i64> = (0..dim).map(|k| ((h[k] - o[k]) / snap).floor() as i64).collect();
        let mut keys: Vec<[i64; 2]> = points
            .iter()
            .map(|p| {
                let mut key = [0i64; 2];
                for (k, c) in p.coords().iter().enumerate() {
                    key[k] = (((c - o[k]) / snap).round() as i64).clamp(0, top[k]);
                }
                key
            })
            .collect();
        keys.sort_unstable();
        keys.dedup();
        let points = keys
            .into_iter()
            .map(|key| {
                let mut c = [0.0; 2];
                for k in 0..dim {
                    c[k] = o[k] + key[k] as f64 * snap;
                }
                Point::from_raw(c, dim)
            })
            .collect();
        Ok(FinitePointSet {
            points,
            snap: Some(snap),
        })
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

    pub fn snap(&self) -> Option<f64> {
        self.snap
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }
}

fn check_points(points: &[Point]) -> Result<()> {
    let first = points
        .first()
        .ok_or_else(|| Error::InvalidSet("compact sets are non-empty".into()))?;
    if let Some(p) = points.iter().find(|p| p.dim() != first.dim()) {
        return Err(Error::DimensionMismatch {
            expected: first.dim(),
            got: p.dim(),
        });
    }
    Ok(())
}

/// A non-empty compact subset of a carrier.
#[derive(Clone, Debug, PartialEq)]
pub enum CompactSet {
    Finite(FinitePointSet),
    /// Closed interval `[a, b]` on a 1-D carrier.
    Interval { a: f64, b: f64 },
}

impl CompactSet {
    pub fn points(points: Vec<Point>) -> Result<Self> {
        FinitePointSet::new(points).map(CompactSet::Finite)
    }

    pub fn values(xs: &[f64]) -> Result<Self> {
        CompactSet::points(xs.iter().map(|&x| Point::x(x)).collect())
    }

    pub fn singleton(p: Point) -> Self {
        CompactSet::Finite(FinitePointSet {
            points: vec![p],
            snap: None,
        })
    }

    pub fn interval(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::NonFinite);
        }
        if a > b {
            return Err(Error::InvalidSet(format!("interval [{a}, {b}] has a > b")));
        }
        Ok(CompactSet::Interval { a, b })
    }

    pub fn dim(&self) -> usize {
        match self {
            CompactSet::Finite(s) => s.dim(),
            CompactSet::Interval { .. } => 1,
        }
    }

    /// Checks the set against a space: dimension, carrier membership, and
    /// nonnegative interval endpoints under the max rule.
    pub fn validate(&self, space: &RealSpace) -> Result<()> {
        match self {
            CompactSet::Finite(s) => s.points().iter().try_for_each(|p| space.check_point(p)),
            CompactSet::Interval { a, b } => {
                if space.dim() != 1 {
                    return Err(Error::Unsupported(
                        "intervals are only valid on 1-D carriers".into(),
                    ));
                }
                if space.rule() == Rule::Max && *a < 0.0 {
                    return Err(Error::InvalidSet(format!(
                        "interval [{a}, {b}] has a negative endpoint under the max rule"
                    )));
                }
                space.check_point(&Point::x(*a))?;
                space.check_point(&Point::x(*b))
            }
        }
    }

    /// Grid points `a, a + snap, ...` plus `b` for intervals; finite sets
    /// are returned as they are.
    pub fn rasterize(&self, snap: f64) -> Result<FinitePointSet> {
        match self {
            CompactSet::Finite(s) => Ok(s.clone()),
            CompactSet::Interval { a, b } => {
                if !(snap > 0.0) {
                    return Err(Error::InvalidSet(format!("snap must be positive, got {snap}")));
                }
                let n = ((b - a) / snap).floor() as usize;
                let mut pts: Vec<Point> = (0..=n).map(|i| Point::x(a + i as f64 * snap)).collect();
                if pts.last().map(|p| p.value()) != Some(*b) {
                    pts.push(Point::x(*b));
                }
                FinitePointSet::new(pts)
            }
        }
    }

    /// Finite members, rasterizing intervals at `snap`.
    pub fn members(&self, snap: f64) -> Result<Vec<Point>> {
        Ok(self.rasterize(snap)?.points)
    }

    pub fn len(&self) -> Option<usize> {
        match self {
            CompactSet::Finite(s) => Some(s.len()),
            CompactSet::Interval { .. } => None,
        }
    }
}

impl fmt::Display for CompactSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CompactSet::Interval { a, b } => write!(f, "[{a}, {b}]"),
            CompactSet::Finite(s) if s.len() <= 8 => {
                let items: Vec<String> = s.points().iter().map(|p| p.to_string()).collect();
                write!(f, "{{{}}}", items.join(", "))
            }
            CompactSet::Finite(s) => write!(f, "{{{} points}}", s.len()),
        }
    }
}

/// `|x - [a, b]|`, the Euclidean distance to an interval.
fn gap_to_interval(x: f64, a: f64, b: f64) -> f64 {
    (a - x).max(x - b).max(0.0)
}

fn interval_only(space: &RealSpace) -> Result<()> {
    if space.dim() != 1 {
        return Err(Error::Unsupported("intervals need a 1-D carrier".into()));
    }
    Ok(())
}

/// `min_{y in B} p(x, y)`.
pub fn point_to_set(space: &RealSpace, x: &Point, set: &CompactSet) -> Result<f64> {
    space.check_point(x)?;
    set.validate(space)?;
    Ok(point_to_set_unchecked(space, x, set))
}

pub(crate) fn point_to_set_unchecked(space: &RealSpace, x: &Point, set: &CompactSet) -> f64 {
    match set {
        CompactSet::Finite(s) => nearest_in_sorted(space, x, s.points()),
        CompactSet::Interval { a, b } => {
            let x = x.value();
            match space.rule() {
                // max(x, .) is nondecreasing, so the minimum sits at y = a.
                Rule::Max => x.max(*a),
                Rule::Euclid => gap_to_interval(x, *a, *b),
                Rule::Shifted(c) => gap_to_interval(x, *a, *b) + c,
            }
        }
    }
}

/// Minimum of `p(x, y)` over `ys`, which is sorted lexicographically.
fn nearest_in_sorted(space: &RealSpace, x: &Point, ys: &[Point]) -> f64 {
    let offset = match space.rule() {
        Rule::Max if x.dim() == 1 => return x.value().max(ys[0].value()),
        Rule::Max => {
            return ys
                .iter()
                .map(|y| space.rule_distance(x, y))
                .fold(f64::INFINITY, f64::min)
        }
        Rule::Euclid => 0.0,
        Rule::Shifted(c) => c,
    };
    // p(x, y) >= |x_1 - y_1| + offset, so scan outward from x_1 and stop
    // once that lower bound reaches the best value.
    let x1 = x.coords()[0];
    let start = ys.partition_point(|y| y.coords()[0] < x1);
    let mut best = f64::INFINITY;
    for y in &ys[start..] {
        if (y.coords()[0] - x1) + offset >= best {
            break;
        }
        best = best.min(space.rule_distance(x, y));
    }
    for y in ys[..start].iter().rev() {
        if (x1 - y.coords()[0]) + offset >= best {
            break;
        }
        best = best.min(space.rule_distance(x, y));
    }
    best
}

/// `rho_p(A, B) = sup_{x in A} p(x, B)`.
pub fn directed_distance(space: &RealSpace, a: &CompactSet, b: &CompactSet) -> Result<f64> {
    a.validate(space)?;
    b.validate(space)?;
    directed_unchecked(space, a, b)
}

pub(crate) fn directed_unchecked(space: &RealSpace, a: &CompactSet, b: &CompactSet) -> Result<f64> {
    match (a, b) {
        (CompactSet::Finite(sa), _) => Ok(sa
            .points()
            .par_iter()
            .map(|x| point_to_set_unchecked(space, x, b))
            .reduce(|| f64::NEG_INFINITY, f64::max)),
        (CompactSet::Interval { a: a1, b: b1 }, CompactSet::Interval { a: a2, b: b2 }) => {
            interval_only(space)?;
            Ok(match space.rule() {
                Rule::Max => b1.max(*a2),
                // Convex in x: the supremum is at an endpoint.
                Rule::Euclid => gap_to_interval(*a1, *a2, *b2).max(gap_to_interval(*b1, *a2, *b2)),
                Rule::Shifted(c) => {
                    gap_to_interval(*a1, *a2, *b2).max(gap_to_interval(*b1, *a2, *b2)) + c
                }
            })
        }
        (CompactSet::Interval { a: a1, b: b1 }, CompactSet::Finite(sb)) => {
            interval_only(space)?;
            let ys: Vec<f64> = sb.points().iter().map(|p| p.value()).collect();
            match space.rule() {
                Rule::Max => {
                    let ymin = ys.iter().copied().fold(f64::INFINITY, f64::min);
                    Ok(b1.max(ymin))
                }
                Rule::Euclid | Rule::Shifted(_) => {
                    // x -> min_j |x - y_j| is piecewise linear; its maximum on
                    // [a1, b1] is at an endpoint or a midpoint between
                    // consecutive members.
                    let mut cands = vec![*a1, *b1];
                    cands.extend(
                        ys.windows(2)
                            .map(|w| 0.5 * (w[0] + w[1]))
                            .filter(|m| *m >= *a1 && *m <= *b1),
                    );
                    Ok(cands
                        .into_iter()
                        .map(|x| point_to_set_unchecked(space, &Point::x(x), b))
                        .fold(f64::NEG_INFINITY, f64::max))
                }
            }
        }
    }
}

/// `h_p(A, B) = max{rho_p(A,B), rho_p(B,A)}`.
pub fn hausdorff_partial(space: &RealSpace, a: &CompactSet, b: &CompactSet) -> Result<f64> {
    a.validate(space)?;
    b.validate(space)?;
    hausdorff_unchecked(space, a, b)
}

pub(crate) fn hausdorff_unchecked(space: &RealSpace, a: &CompactSet, b: &CompactSet) -> Result<f64> {
    if let (CompactSet::Finite(sa), CompactSet::Finite(sb)) = (a, b) {
        if sa.points() == sb.points() {
            // p(x, A) = p(x, x) for x in A
            return Ok(sa
                .points()
                .par_iter()
                .map(|x| space.rule_distance(x, x))
                .reduce(|| f64::NEG_INFINITY, f64::max));
        }
    }
    Ok(directed_unchecked(space, a, b)?.max(directed_unchecked(space, b, a)?))
}

/// `sup_{x,y in A} p(x,y)`, pairs with `x = y` included.
pub fn diameter(space: &RealSpace, a: &CompactSet) -> Result<f64> {
    a.validate(space)?;
    Ok(diameter_unchecked(space, a))
}

pub(crate) fn diameter_unchecked(space: &RealSpace, a: &CompactSet) -> f64 {
    match a {
        CompactSet::Finite(s) => finite_diameter(space, s.points()),
        CompactSet::Interval { a, b } => match space.rule() {
            Rule::Max => *b,
            Rule::Euclid => b - a,
            Rule::Shifted(c) => b - a + c,
        },
    }
}

fn finite_diameter(space: &RealSpace, pts: &[Point]) -> f64 {
    let offset = match space.rule() {
        // max(x, y) summed over coordinates peaks at the coordinatewise maxima
        Rule::Max => {
            return (0..pts[0].dim())
                .map(|k| pts.iter().map(|p| p.coords()[k]).fold(f64::NEG_INFINITY, f64::max))
                .sum()
        }
        Rule::Euclid => 0.0,
        Rule::Shifted(c) => c,
    };
    // The farthest pair of a finite set lies on its convex hull.
    let hull = convex_hull(pts);
    hull.par_iter()
        .map(|x| hull.iter().map(|y| space.rule_distance(x, y)).fold(offset, f64::max))
        .reduce(|| offset, f64::max)
}

/// Hull vertices of lexicographically sorted points (monotone chain). In
/// 1-D the extreme points.
fn convex_hull(pts: &[Point]) -> Vec<Point> {
    if pts.len() <= 2 || pts[0].dim() == 1 {
        let mut ends = vec![pts[0]];
        if pts.len() > 1 {
            ends.push(pts[pts.len() - 1]);
        }
        return ends;
    }
    let cross = |o: &Point, a: &Point, b: &Point| {
        let (o, a, b) = (o.coords(), a.coords(), b.coords());
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    let mut hull: Vec<Point> = Vec::with_capacity(2 * pts.len());
    for pass in [pts.iter().collect::<Vec<_>>(), pts.iter().rev().collect()] {
        let start = hull.len();
        for p in pass {
            while hull.len() >= start + 2 && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(*p);
        }
        hull.pop();
    }
    hull
}

/// Union of two compact sets as a finite set. Intervals are rasterized at
/// `snap`.
pub fn union(a: &CompactSet, b: &CompactSet, snap: f64) -> Result<CompactSet> {
    let mut pts = a.members(snap)?;
    pts.extend(b.members(snap)?);
    CompactSet::points(pts)
}

/// Whether every point of `inner` lies within `resolution` of `outer`,
/// measured as `p(x, outer) - p(x, x)`.
pub fn nested_within(
    space: &RealSpace,
    inner: &CompactSet,
    outer: &CompactSet,
    resolution: f64,
) -> Result<bool> {
    inner.validate(space)?;
    outer.validate(space)?;
    match inner {
        CompactSet::Interval { a, b } => Ok(match outer {
            CompactSet::Interval { a: oa, b: ob } => *a >= oa - resolution && *b <= ob + resolution,
            CompactSet::Finite(_) => {
                let euclid = RealSpace::euclid(*space.carrier())?;
                directed_unchecked(&euclid, inner, outer)? <= resolution
            }
        }),
        CompactSet::Finite(s) => Ok(s.points().iter().all(|x| {
            point_to_set_unchecked(space, x, outer) - space.rule_distance(x, x) <= resolution
        })),
    }
}
