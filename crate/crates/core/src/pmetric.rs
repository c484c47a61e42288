//! Partial metric instances on real carriers and axiom verification.
//!
//! A partial metric `p` satisfies, for all `x, y, z`:
//!
//! * P1: `0 <= p(x,x) <= p(x,y)`
//! * P2: `p(x,x) = p(x,y) = p(y,y)` implies `x = y`
//! * P3: `p(x,y) = p(y,x)`
//! * P4: `p(x,z) <= p(x,y) + p(y,z) - p(y,y)`
//!
//! Self-distances may be nonzero. [`verify_axioms`] checks all four on a
//! sample, for any type implementing [`PartialMetric`], so the same checker
//! covers real carriers, the shift space and the space of contractions.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Absolute slack used by every axiom comparison; absorbs rounding only.
pub const AXIOM_TOL: f64 = 1e-12;

/// A point of a real carrier of dimension 1 or 2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    coords: [f64; 2],
    dim: u8,
}

impl Point {
    pub fn new(coords: &[f64]) -> Result<Self> {
        if coords.is_empty() || coords.len() > 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: coords.len(),
            });
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        let mut c = [0.0; 2];
        c[..coords.len()].copy_from_slice(coords);
        Ok(Point {
            coords: c,
            dim: coords.len() as u8,
        })
    }

    /// One-dimensional point. Panics on a non-finite coordinate.
    pub fn x(x: f64) -> Self {
        assert!(x.is_finite(), "non-finite coordinate");
        Point {
            coords: [x, 0.0],
            dim: 1,
        }
    }

    /// Two-dimensional point. Panics on a non-finite coordinate.
    pub fn xy(x: f64, y: f64) -> Self {
        assert!(x.is_finite() && y.is_finite(), "non-finite coordinate");
        Point {
            coords: [x, y],
            dim: 2,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords[..self.dim as usize]
    }

    /// First coordinate; the value of a 1-D point.
    pub fn value(&self) -> f64 {
        self.coords[0]
    }

    pub fn lex_cmp(&self, other: &Point) -> Ordering {
        self.coords()
            .iter()
            .zip(other.coords())
            .map(|(a, b)| a.total_cmp(b))
            .find(|o| o.is_ne())
            .unwrap_or_else(|| self.dim.cmp(&other.dim))
    }

    pub(crate) fn from_raw(coords: [f64; 2], dim: usize) -> Self {
        Point {
            coords,
            dim: dim as u8,
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.dim {
            1 => write!(f, "{}", self.coords[0]),
            _ => write!(f, "({}, {})", self.coords[0], self.coords[1]),
        }
    }
}

/// Axis-aligned bounding box that every instance declares as its carrier.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Carrier {
    lo: Point,
    hi: Point,
}

impl Carrier {
    pub fn new(lo: Point, hi: Point) -> Result<Self> {
        if lo.dim() != hi.dim() {
            return Err(Error::DimensionMismatch {
                expected: lo.dim(),
                got: hi.dim(),
            });
        }
        if lo.coords().iter().zip(hi.coords()).any(|(a, b)| a > b) {
            return Err(Error::InvalidSet(format!("carrier lo {lo} exceeds hi {hi}")));
        }
        Ok(Carrier { lo, hi })
    }

    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Carrier::new(Point::new(&[a])?, Point::new(&[b])?)
    }

    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        Carrier::new(Point::new(&[x0, y0])?, Point::new(&[x1, y1])?)
    }

    pub fn dim(&self) -> usize {
        self.lo.dim()
    }

    pub fn lo(&self) -> Point {
        self.lo
    }

    pub fn hi(&self) -> Point {
        self.hi
    }

    /// Longest side of the box.
    pub fn extent(&self) -> f64 {
        self.lo
            .coords()
            .iter()
            .zip(self.hi.coords())
            .map(|(a, b)| b - a)
            .fold(0.0, f64::max)
    }

    fn slack(&self) -> f64 {
        AXIOM_TOL * self.extent().max(1.0)
    }

    pub fn contains(&self, p: &Point) -> bool {
        let s = self.slack();
        p.dim() == self.dim()
            && p.coords()
                .iter()
                .zip(self.lo.coords().iter().zip(self.hi.coords()))
                .all(|(x, (a, b))| *x >= a - s && *x <= b + s)
    }

    pub fn check(&self, p: &Point) -> Result<()> {
        if p.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: p.dim(),
            });
        }
        if !self.contains(p) {
            return Err(Error::OutsideCarrier {
                point: p.to_string(),
                carrier: self.to_string(),
            });
        }
        Ok(())
    }

    pub fn corners(&self) -> Vec<Point> {
        let (lo, hi) = (self.lo.coords, self.hi.coords);
        match self.dim() {
            1 => vec![self.lo, self.hi],
            _ => vec![
                Point::from_raw([lo[0], lo[1]], 2),
                Point::from_raw([hi[0], lo[1]], 2),
                Point::from_raw([lo[0], hi[1]], 2),
                Point::from_raw([hi[0], hi[1]], 2),
            ],
        }
    }

    /// Uniform grid with `n` points per axis, endpoints included, in
    /// lexicographic order.
    pub fn grid(&self, n: usize) -> Vec<Point> {
        let n = n.max(2);
        let axis = |k: usize| -> Vec<f64> {
            let (a, b) = (self.lo.coords[k], self.hi.coords[k]);
            (0..n)
                .map(|i| {
                    if i == n - 1 {
                        b
                    } else {
                        a + (b - a) * (i as f64) / ((n - 1) as f64)
                    }
                })
                .collect()
        };
        match self.dim() {
            1 => axis(0).into_iter().map(Point::x).collect(),
            _ => {
                let (xs, ys) = (axis(0), axis(1));
                xs.iter()
                    .flat_map(|&x| ys.iter().map(move |&y| Point::xy(x, y)))
                    .collect()
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let mut c = [0.0; 2];
        for (k, slot) in c.iter_mut().enumerate().take(self.dim()) {
            let (a, b) = (self.lo.coords[k], self.hi.coords[k]);
            *slot = if a == b { a } else { rng.gen_range(a..=b) };
        }
        Point::from_raw(c, self.dim())
    }
}

impl fmt::Display for Carrier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Distance rule of a real partial metric instance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Rule {
    /// `p(x,y) = max(x,y)` on nonnegative reals. In two dimensions the
    /// coordinatewise values are summed, which is again a partial metric.
    Max,
    /// The Euclidean metric viewed as a partial metric (zero self-distance).
    Euclid,
    /// `p(x,y) = |x - y| + c` with a fixed offset `c >= 0`.
    Shifted(f64),
}

/// String key naming an instance in configs and on the command line:
/// `max`, `euclid`, `shifted:<c>` or `shift_space:<N>:<K>`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MetricKey {
    Max,
    Euclid,
    Shifted(f64),
    ShiftSpace { alphabet: usize, truncation: usize },
}

impl FromStr for MetricKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::BadMetricKey(s.to_string());
        let parts: Vec<&str> = s.trim().split(':').collect();
        match parts.as_slice() {
            ["max"] => Ok(MetricKey::Max),
            ["euclid"] => Ok(MetricKey::Euclid),
            ["shifted", c] => {
                let c: f64 = c.parse().map_err(|_| bad())?;
                if !(c.is_finite() && c >= 0.0) {
                    return Err(bad());
                }
                Ok(MetricKey::Shifted(c))
            }
            ["shift_space", n, k] => {
                let alphabet: usize = n.parse().map_err(|_| bad())?;
                let truncation: usize = k.parse().map_err(|_| bad())?;
                if alphabet < 1 || truncation < 1 {
                    return Err(bad());
                }
                Ok(MetricKey::ShiftSpace {
                    alphabet,
                    truncation,
                })
            }
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for MetricKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricKey::Max => write!(f, "max"),
            MetricKey::Euclid => write!(f, "euclid"),
            MetricKey::Shifted(c) => write!(f, "shifted:{c}"),
            MetricKey::ShiftSpace {
                alphabet,
                truncation,
            } => write!(f, "shift_space:{alphabet}:{truncation}"),
        }
    }
}

impl MetricKey {
    pub fn rule(&self) -> Option<Rule> {
        match *self {
            MetricKey::Max => Some(Rule::Max),
            MetricKey::Euclid => Some(Rule::Euclid),
            MetricKey::Shifted(c) => Some(Rule::Shifted(c)),
            MetricKey::ShiftSpace { .. } => None,
        }
    }
}

/// A partial metric instance on a real carrier.
#[derive(Clone, Debug, PartialEq)]
pub struct RealSpace {
    rule: Rule,
    carrier: Carrier,
}

impl RealSpace {
    pub fn new(rule: Rule, carrier: Carrier) -> Result<Self> {
        match rule {
            Rule::Max if carrier.lo().coords().iter().any(|&c| c < 0.0) => {
                return Err(Error::InvalidSet(format!(
                    "max metric needs a nonnegative carrier, got {carrier}"
                )))
            }
            Rule::Shifted(c) if !(c.is_finite() && c >= 0.0) => {
                return Err(Error::BadMetricKey(format!("shifted:{c}")))
            }
            _ => {}
        }
        Ok(RealSpace { rule, carrier })
    }

    pub fn from_key(key: MetricKey, carrier: Carrier) -> Result<Self> {
        let rule = key
            .rule()
            .ok_or_else(|| Error::Unsupported(format!("{key} is not a real carrier")))?;
        RealSpace::new(rule, carrier)
    }

    pub fn max(carrier: Carrier) -> Result<Self> {
        RealSpace::new(Rule::Max, carrier)
    }

    pub fn euclid(carrier: Carrier) -> Result<Self> {
        RealSpace::new(Rule::Euclid, carrier)
    }

    pub fn shifted(c: f64, carrier: Carrier) -> Result<Self> {
        RealSpace::new(Rule::Shifted(c), carrier)
    }

    pub fn rule(&self) -> Rule {
        self.rule
    }

    pub fn carrier(&self) -> &Carrier {
        &self.carrier
    }

    pub fn dim(&self) -> usize {
        self.carrier.dim()
    }

    pub fn key(&self) -> MetricKey {
        match self.rule {
            Rule::Max => MetricKey::Max,
            Rule::Euclid => MetricKey::Euclid,
            Rule::Shifted(c) => MetricKey::Shifted(c),
        }
    }

    pub fn name(&self) -> String {
        self.key().to_string()
    }

    /// Raw rule evaluation without carrier checks. Used on hot paths whose
    /// inputs are already validated, and on map images that may leave the
    /// carrier box while staying in the rule's domain.
    #[inline]
    pub fn rule_distance(&self, x: &Point, y: &Point) -> f64 {
        let (a, b) = (x.coords(), y.coords());
        match self.rule {
            Rule::Max => a.iter().zip(b).map(|(u, v)| u.max(*v)).sum(),
            Rule::Euclid => euclid(a, b),
            Rule::Shifted(c) => euclid(a, b) + c,
        }
    }

    pub fn check_point(&self, x: &Point) -> Result<()> {
        self.carrier.check(x)
    }

    /// `p(x, y)`; both points must lie in the carrier.
    pub fn pm_distance(&self, x: &Point, y: &Point) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(y)?;
        Ok(self.rule_distance(x, y))
    }

    pub fn self_distance(&self, x: &Point) -> Result<f64> {
        self.pm_distance(x, x)
    }

    /// Whether `|p(a,x1) - p(a,x2)| <= p(x1,x2) - min{p(x1,x1), p(x2,x2)}`
    /// holds within [`AXIOM_TOL`].
    pub fn metric_continuity_probe(&self, a: &Point, x1: &Point, x2: &Point) -> Result<bool> {
        for p in [a, x1, x2] {
            self.check_point(p)?;
        }
        Ok(continuity_holds(self, a, x1, x2, AXIOM_TOL))
    }
}

#[inline]
fn euclid(a: &[f64], b: &[f64]) -> f64 {
    match a.len() {
        1 => (a[0] - b[0]).abs(),
        _ => a
            .iter()
            .zip(b)
            .map(|(u, v)| (u - v) * (u - v))
            .sum::<f64>()
            .sqrt(),
    }
}

/// Anything with a partial distance. The axiom checker is written against
/// this trait.
pub trait PartialMetric: Sync {
    type Elem: Clone + fmt::Debug + Send + Sync;

    fn distance(&self, x: &Self::Elem, y: &Self::Elem) -> f64;

    /// Whether two representations denote the same element.
    fn same_point(&self, x: &Self::Elem, y: &Self::Elem) -> bool;
}

impl PartialMetric for RealSpace {
    type Elem = Point;

    fn distance(&self, x: &Point, y: &Point) -> f64 {
        self.rule_distance(x, y)
    }

    fn same_point(&self, x: &Point, y: &Point) -> bool {
        x == y
    }
}

/// Quantitative continuity of `p(a, .)` on one triple.
pub fn continuity_holds<M: PartialMetric>(
    m: &M,
    a: &M::Elem,
    x1: &M::Elem,
    x2: &M::Elem,
    tol: f64,
) -> bool {
    let lhs = (m.distance(a, x1) - m.distance(a, x2)).abs();
    let rhs = m.distance(x1, x2) - m.distance(x1, x1).min(m.distance(x2, x2));
    lhs <= rhs + tol
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axiom {
    P1,
    P2,
    P3,
    P4,
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Axiom::P1 => "P1 (0 <= p(x,x) <= p(x,y))",
            Axiom::P2 => "P2 (p(x,x) = p(x,y) = p(y,y) implies x = y)",
            Axiom::P3 => "P3 (p(x,y) = p(y,x))",
            Axiom::P4 => "P4 (p(x,z) <= p(x,y) + p(y,z) - p(y,y))",
        };
        f.write_str(s)
    }
}

/// A failed axiom with the elements that witness it. For P1 the witness is
/// `(x, y)` and `lhs = p(x,x)`, `rhs = p(x,y)`; for P4 it is `(x, y, z)`
/// with `lhs = p(x,z)` and `rhs = p(x,y) + p(y,z) - p(y,y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Violation<E> {
    pub axiom: Axiom,
    pub witness: Vec<E>,
    pub lhs: f64,
    pub rhs: f64,
}

impl<E: fmt::Debug> fmt::Display for Violation<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} violated by {:?}: {} vs {}",
            self.axiom, self.witness, self.lhs, self.rhs
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AxiomReport<E> {
    pub p1: Option<Violation<E>>,
    pub p2: Option<Violation<E>>,
    pub p3: Option<Violation<E>>,
    pub p4: Option<Violation<E>>,
    /// Number of ordered triples (or sample pairs for P1-P3) examined.
    pub checked: usize,
}

impl<E> AxiomReport<E> {
    fn empty() -> Self {
        AxiomReport {
            p1: None,
            p2: None,
            p3: None,
            p4: None,
            checked: 0,
        }
    }

    pub fn passed(&self, axiom: Axiom) -> bool {
        self.violation(axiom).is_none()
    }

    pub fn all_passed(&self) -> bool {
        [Axiom::P1, Axiom::P2, Axiom::P3, Axiom::P4]
            .iter()
            .all(|a| self.passed(*a))
    }

    pub fn violation(&self, axiom: Axiom) -> Option<&Violation<E>> {
        match axiom {
            Axiom::P1 => self.p1.as_ref(),
            Axiom::P2 => self.p2.as_ref(),
            Axiom::P3 => self.p3.as_ref(),
            Axiom::P4 => self.p4.as_ref(),
        }
    }

    pub fn violations(&self) -> impl Iterator<Item = &Violation<E>> {
        [&self.p1, &self.p2, &self.p3, &self.p4]
            .into_iter()
            .filter_map(|v| v.as_ref())
    }

    fn record(&mut self, v: Violation<E>) {
        let slot = match v.axiom {
            Axiom::P1 => &mut self.p1,
            Axiom::P2 => &mut self.p2,
            Axiom::P3 => &mut self.p3,
            Axiom::P4 => &mut self.p4,
        };
        if slot.is_none() {
            *slot = Some(v);
        }
    }
}

fn pair_violations<M: PartialMetric>(
    m: &M,
    x: &M::Elem,
    y: &M::Elem,
    dxx: f64,
    dxy: f64,
    dyx: f64,
    dyy: f64,
    tol: f64,
) -> Vec<Violation<M::Elem>> {
    let mut out = Vec::new();
    let w = || vec![x.clone(), y.clone()];
    if dxx < -tol || dxx > dxy + tol {
        out.push(Violation {
            axiom: Axiom::P1,
            witness: w(),
            lhs: dxx,
            rhs: dxy,
        });
    }
    if (dxy - dyx).abs() > tol {
        out.push(Violation {
            axiom: Axiom::P3,
            witness: w(),
            lhs: dxy,
            rhs: dyx,
        });
    }
    if (dxx - dxy).abs() <= tol && (dyy - dxy).abs() <= tol && !m.same_point(x, y) {
        out.push(Violation {
            axiom: Axiom::P2,
            witness: w(),
            lhs: dxy,
            rhs: dxx.max(dyy),
        });
    }
    out
}

/// Exhaustive check: P1-P3 over all ordered pairs of `samples`, P4 over all
/// triples. Costs `O(n^3)` distance lookups after an `O(n^2)` table.
pub fn verify_axioms<M: PartialMetric>(
    m: &M,
    samples: &[M::Elem],
    tol: f64,
) -> Result<AxiomReport<M::Elem>> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let n = samples.len();
    let table: Vec<f64> = (0..n * n)
        .into_par_iter()
        .map(|k| m.distance(&samples[k / n], &samples[k % n]))
        .collect();
    let d = |i: usize, j: usize| table[i * n + j];

    let mut report = AxiomReport::empty();
    for i in 0..n {
        for j in 0..n {
            let found = pair_violations(
                m,
                &samples[i],
                &samples[j],
                d(i, i),
                d(i, j),
                d(j, i),
                d(j, j),
                tol,
            );
            for v in found {
                report.record(v);
            }
        }
    }

    // Deterministic regardless of scheduling: first witness in (y, x, z) order.
    let p4 = (0..n).into_par_iter().find_map_first(|j| {
        let dyy = d(j, j);
        for i in 0..n {
            for k in i..n {
                let lhs = d(i, k);
                let rhs = d(i, j) + d(j, k) - dyy;
                if lhs > rhs + tol {
                    return Some(Violation {
                        axiom: Axiom::P4,
                        witness: vec![samples[i].clone(), samples[j].clone(), samples[k].clone()],
                        lhs,
                        rhs,
                    });
                }
            }
        }
        None
    });
    if let Some(v) = p4 {
        report.record(v);
    }
    report.checked = n * n * (n + 1) / 2;
    Ok(report)
}

/// Checks all four axioms on each given triple, every pair and every
/// permutation included. Suited to large random sweeps.
pub fn verify_axioms_on_triples<M: PartialMetric>(
    m: &M,
    triples: &[(M::Elem, M::Elem, M::Elem)],
    tol: f64,
) -> Result<AxiomReport<M::Elem>> {
    if triples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let found: Vec<Vec<Violation<M::Elem>>> = triples
        .par_iter()
        .map(|(a, b, c)| {
            let pts = [a, b, c];
            let mut d = [[0.0; 3]; 3];
            for (i, row) in d.iter_mut().enumerate() {
                for (j, slot) in row.iter_mut().enumerate() {
                    *slot = m.distance(pts[i], pts[j]);
                }
            }
            let mut out = Vec::new();
            for i in 0..3 {
                for j in 0..3 {
                    out.extend(pair_violations(
                        m, pts[i], pts[j], d[i][i], d[i][j], d[j][i], d[j][j], tol,
                    ));
                }
            }
            for (i, j, k) in [
                (0, 1, 2),
                (0, 2, 1),
                (1, 0, 2),
                (1, 2, 0),
                (2, 0, 1),
                (2, 1, 0),
            ] {
                let lhs = d[i][k];
                let rhs = d[i][j] + d[j][k] - d[j][j];
                if lhs > rhs + tol {
                    out.push(Violation {
                        axiom: Axiom::P4,
                        witness: vec![pts[i].clone(), pts[j].clone(), pts[k].clone()],
                        lhs,
                        rhs,
                    });
                }
            }
            out
        })
        .collect();
    let mut report = AxiomReport::empty();
    for v in found.into_iter().flatten() {
        report.record(v);
    }
    report.checked = triples.len();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit(a: f64, b: f64) -> Carrier {
        Carrier::interval(a, b).unwrap()
    }

    /// `p(x,y) = min(x,y)` violates P1.
    struct MinRule;

    impl PartialMetric for MinRule {
        type Elem = Point;
        fn distance(&self, x: &Point, y: &Point) -> f64 {
            x.value().min(y.value())
        }
        fn same_point(&self, x: &Point, y: &Point) -> bool {
            x == y
        }
    }

    #[test]
    fn distance_examples() {
        let max = RealSpace::max(unit(0.0, 10.0)).unwrap();
        let eu = RealSpace::euclid(unit(0.0, 10.0)).unwrap();
        let sh = RealSpace::shifted(0.5, unit(0.0, 10.0)).unwrap();
        assert_eq!(max.pm_distance(&Point::x(2.0), &Point::x(3.0)).unwrap(), 3.0);
        assert_eq!(max.pm_distance(&Point::x(0.0), &Point::x(0.0)).unwrap(), 0.0);
        assert_eq!(eu.pm_distance(&Point::x(1.0), &Point::x(4.0)).unwrap(), 3.0);
        assert_eq!(sh.pm_distance(&Point::x(1.0), &Point::x(1.0)).unwrap(), 0.5);
    }

    #[test]
    fn self_distance_examples() {
        let max = RealSpace::max(unit(0.0, 10.0)).unwrap();
        assert_eq!(max.self_distance(&Point::x(4.0)).unwrap(), 4.0);
        let eu = RealSpace::euclid(unit(0.0, 10.0)).unwrap();
        assert_eq!(eu.self_distance(&Point::x(7.3)).unwrap(), 0.0);
        let sh = RealSpace::shifted(0.2, unit(0.0, 10.0)).unwrap();
        assert_eq!(sh.self_distance(&Point::x(3.0)).unwrap(), 0.2);
    }

    #[test]
    fn carrier_and_dimension_errors() {
        let max = RealSpace::max(unit(0.0, 10.0)).unwrap();
        assert!(matches!(
            max.pm_distance(&Point::x(-1.0), &Point::x(1.0)),
            Err(Error::OutsideCarrier { .. })
        ));
        assert!(matches!(
            max.pm_distance(&Point::xy(1.0, 1.0), &Point::x(1.0)),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(RealSpace::max(unit(-1.0, 1.0)).is_err());
        assert!(Point::new(&[f64::NAN]).is_err());
    }

    #[test]
    fn metric_keys_round_trip() {
        for s in ["max", "euclid", "shifted:0.5", "shift_space:2:40"] {
            let k: MetricKey = s.parse().unwrap();
            assert_eq!(k.to_string(), s);
        }
        assert!("shifted:-1".parse::<MetricKey>().is_err());
        assert!("manhattan".parse::<MetricKey>().is_err());
        assert!("shift_space:0:4".parse::<MetricKey>().is_err());
    }

    #[test]
    fn max_metric_passes_exhaustive_check_on_1000_samples() {
        let space = RealSpace::max(unit(0.0, 10.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let samples: Vec<Point> = (0..1000).map(|_| space.carrier().sample(&mut rng)).collect();
        let report = verify_axioms(&space, &samples, 1e-12).unwrap();
        assert!(report.all_passed(), "{:?}", report.violations().next());
    }

    #[test]
    fn min_rule_fails_p1_with_witness() {
        let samples = vec![Point::x(1.0), Point::x(2.0)];
        let report = verify_axioms(&MinRule, &samples, 1e-12).unwrap();
        let v = report.violation(Axiom::P1).expect("P1 must fail");
        assert_eq!(v.witness, vec![Point::x(2.0), Point::x(1.0)]);
        assert_eq!((v.lhs, v.rhs), (2.0, 1.0));
    }

    #[test]
    fn empty_samples_rejected() {
        let space = RealSpace::euclid(unit(0.0, 1.0)).unwrap();
        assert_eq!(verify_axioms(&space, &[], 1e-12), Err(Error::EmptySamples));
    }

    #[test]
    fn continuity_probe_examples() {
        let max = RealSpace::max(unit(0.0, 10.0)).unwrap();
        assert!(max
            .metric_continuity_probe(&Point::x(5.0), &Point::x(1.0), &Point::x(2.0))
            .unwrap());
        let eu = RealSpace::euclid(unit(0.0, 10.0)).unwrap();
        assert!(eu
            .metric_continuity_probe(&Point::x(0.0), &Point::x(1.0), &Point::x(3.0))
            .unwrap());
        let sh = RealSpace::shifted(0.5, unit(0.0, 10.0)).unwrap();
        assert!(sh
            .metric_continuity_probe(&Point::x(0.0), &Point::x(7.0), &Point::x(7.0))
            .unwrap());
    }

    #[test]
    fn grid_includes_endpoints() {
        let g = unit(0.0, 2.0).grid(5);
        assert_eq!(g.first().unwrap().value(), 0.0);
        assert_eq!(g.last().unwrap().value(), 2.0);
        assert_eq!(Carrier::rect(0.0, 0.0, 1.0, 1.0).unwrap().grid(3).len(), 9);
    }
}
