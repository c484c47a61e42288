//! The space `Con_t(X, p)` of contractions with factor `t`, its partial
//! metric `p̄(f, g) = min{1, sup_x p(f(x), g(x))}`, the fixed-point map
//! `r(f) = x_f`, and numerical probes of completeness and continuity.
//!
//! Suprema are taken over a deterministic carrier grid, except for pairs of
//! `affine1d` maps under the Euclidean rule, where the supremum sits at a
//! carrier endpoint and is computed in closed form.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::ifs::{fixed_point, DEFAULT_POINT_MAX_ITER};
use crate::maps::{LipMap, MapForm};
use crate::pmetric::{PartialMetric, Point, RealSpace, Rule, AXIOM_TOL};

/// Grid points per axis used by default: `2^10 + 1`.
pub const DEFAULT_GRID: usize = 1025;

/// Tolerance for the fixed points computed by `r`.
pub const FIXED_POINT_TOL: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq)]
pub struct ConElement {
    map: LipMap,
    t: f64,
    space: RealSpace,
}

impl ConElement {
    /// Requires `t in [0, 1)` and a declared constant `<= t`. Images may
    /// leave the carrier box; distances are evaluated by the rule.
    pub fn new(map: LipMap, t: f64, space: RealSpace) -> Result<Self> {
        if !(0.0..1.0).contains(&t) {
            return Err(Error::Precondition(format!("factor t = {t} is not in [0, 1)")));
        }
        match map.declared_lip() {
            Some(s) if s <= t => {}
            other => {
                return Err(Error::NotAContraction(format!(
                    "{} (needs <= {t})",
                    other.map_or("unknown".to_string(), |s| s.to_string())
                )))
            }
        }
        map.check_metric(&space)?;
        Ok(ConElement { map, t, space })
    }

    /// `affine1d a b` with declared constant `|a|`.
    pub fn affine(a: f64, b: f64, t: f64, space: RealSpace) -> Result<Self> {
        let map = MapForm::affine1d(a, b).under(space.key()).with_lip(a.abs());
        ConElement::new(map, t, space)
    }

    pub fn map(&self) -> &LipMap {
        &self.map
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn space(&self) -> &RealSpace {
        &self.space
    }

    fn compatible(&self, other: &ConElement) -> Result<()> {
        if self.t != other.t || self.space != other.space {
            return Err(Error::MalformedProbe(format!(
                "elements live in different spaces: t = {} on {} vs t = {} on {}",
                self.t,
                self.space.carrier(),
                other.t,
                other.space.carrier()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConDistance {
    /// `min{1, sup}`
    pub value: f64,
    /// The uncapped supremum estimate.
    pub raw_sup: f64,
    /// Whether `raw_sup` is the exact supremum rather than a grid maximum.
    pub exact: bool,
}

/// `p̄(f, g)` on a grid of `grid` points per axis.
pub fn con_distance(f: &ConElement, g: &ConElement, grid: usize) -> Result<ConDistance> {
    f.compatible(g)?;
    if grid < 2 {
        return Err(Error::Precondition("grid needs at least 2 points".into()));
    }
    let (raw_sup, exact) = match (f.map.form(), g.map.form(), f.space.rule()) {
        (MapForm::Affine1d { a: a1, b: b1 }, MapForm::Affine1d { a: a2, b: b2 }, Rule::Euclid) => {
            let (da, db) = (a1 - a2, b1 - b2);
            let c = f.space.carrier();
            let (lo, hi) = (c.lo().value(), c.hi().value());
            ((da * lo + db).abs().max((da * hi + db).abs()), true)
        }
        _ => (
            f.space
                .carrier()
                .grid(grid)
                .iter()
                .map(|x| f.space.rule_distance(&f.map.eval(x), &g.map.eval(x)))
                .fold(f64::NEG_INFINITY, f64::max),
            false,
        ),
    };
    Ok(ConDistance {
        value: raw_sup.min(1.0),
        raw_sup,
        exact,
    })
}

/// `r(f) = x_f`, by Picard iteration from the carrier's lower corner.
pub fn fixed_point_map(f: &ConElement) -> Result<Point> {
    let x0 = f.space.carrier().lo();
    fixed_point(&f.map, &f.space, &x0, FIXED_POINT_TOL, DEFAULT_POINT_MAX_ITER).map(|(x, _)| x)
}

/// `(Con_t, p̄)` as a [`PartialMetric`], for the shared axiom checker.
#[derive(Clone, Debug)]
pub struct ConSpace {
    pub grid: usize,
}

impl PartialMetric for ConSpace {
    type Elem = ConElement;

    fn distance(&self, f: &ConElement, g: &ConElement) -> f64 {
        con_distance(f, g, self.grid).map_or(f64::NAN, |d| d.value)
    }

    /// Pointwise equality on the grid.
    fn same_point(&self, f: &ConElement, g: &ConElement) -> bool {
        f.space == g.space
            && f
                .space
                .carrier()
                .grid(self.grid)
                .iter()
                .all(|x| f.map.eval(x) == g.map.eval(x))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContinuityRow {
    pub n: usize,
    pub pbar: f64,
    /// `p(r(f_n), r(f))`
    pub distance: f64,
    /// `p(r(f_n), r(f)) - p(r(f), r(f))`
    pub excess: f64,
    /// `sup_x p(f_n(x), f(x)) / (1 - t) + tol`
    pub bound: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContinuityReport {
    pub rows: Vec<ContinuityRow>,
    /// `p(r(f), r(f))`
    pub limit_self_distance: f64,
    /// Every row within its bound.
    pub all_hold: bool,
    /// The last excess is within the last bound, which shrinks with `p̄`.
    pub converges: bool,
}

impl ContinuityReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,pbar,distance,bound,holds\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{},{}", r.n, r.pbar, r.distance, r.bound, r.holds);
        }
        out
    }
}

/// Follows `p(r(f_n), r(f))` along a sequence `f_n -> f` and checks the
/// perturbation bound `p(r(f_n), r(f)) - p(r(f), r(f)) <= sup/(1-t) + tol`.
/// The uncapped supremum is used in the bound. Fixed points must lie in
/// the carrier, where the supremum is taken.
pub fn continuity_probe(
    sequence: &[ConElement],
    limit: &ConElement,
    grid: usize,
    tol: f64,
) -> Result<ContinuityReport> {
    if sequence.is_empty() {
        return Err(Error::MalformedProbe("empty sequence".into()));
    }
    let x = fixed_point_map(limit)?;
    let carrier = limit.space.carrier();
    carrier
        .check(&x)
        .map_err(|_| Error::Precondition(format!("fixed point {x} of the limit lies outside {carrier}")))?;
    let p = |a: &Point, b: &Point| limit.space.rule_distance(a, b);
    let limit_self_distance = p(&x, &x);
    let mut rows = Vec::with_capacity(sequence.len());
    let mut previous = f64::INFINITY;
    for (i, f) in sequence.iter().enumerate() {
        f.compatible(limit)?;
        let d = con_distance(f, limit, grid)?;
        if d.raw_sup > previous + AXIOM_TOL {
            return Err(Error::MalformedProbe(format!(
                "p̄ increases at n = {}: {} after {}",
                i + 1,
                d.raw_sup,
                previous
            )));
        }
        previous = d.raw_sup;
        let xn = fixed_point_map(f)?;
        carrier.check(&xn).map_err(|_| {
            Error::Precondition(format!("fixed point {xn} of element {} lies outside {carrier}", i + 1))
        })?;
        let distance = p(&xn, &x);
        let excess = distance - limit_self_distance;
        let bound = d.raw_sup / (1.0 - limit.t) + tol;
        rows.push(ContinuityRow {
            n: i + 1,
            pbar: d.value,
            distance,
            excess,
            bound,
            holds: excess <= bound,
        });
    }
    let all_hold = rows.iter().all(|r| r.holds);
    let last = rows.last().expect("non-empty");
    let converges = last.excess <= last.bound;
    Ok(ContinuityReport {
        rows,
        limit_self_distance,
        all_hold,
        converges,
    })
}

/// A function known only by its values on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    pub xs: Vec<Point>,
    pub values: Vec<Point>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CauchyReport {
    /// `max p̄(f_m, f_n)` over the second half of the sequence (uncapped).
    pub tail_diameter: f64,
    pub limit: GridFunction,
    /// Largest `p(g(x), g(y)) / p(x, y)` over grid pairs.
    pub limit_ratio: f64,
    /// `p(g(x), g(y)) <= t p(x, y) + tol` on every grid pair.
    pub in_con_t: bool,
    /// Capped `p̄(f_n, g)` for every `n`.
    pub distances_to_limit: Vec<f64>,
}

/// Builds the pointwise limit `g(x) = lim f_n(x)` on the grid, estimated
/// by the last element, after checking the tail of the sequence is Cauchy
/// within `cauchy_tol`. Then checks `g` satisfies the `Con_t` condition on
/// all grid pairs.
pub fn cauchy_completeness_probe(sequence: &[ConElement], grid: usize, cauchy_tol: f64) -> Result<CauchyReport> {
    let first = sequence
        .first()
        .ok_or_else(|| Error::MalformedProbe("empty sequence".into()))?;
    if sequence.len() < 2 {
        return Err(Error::MalformedProbe("need at least two elements".into()));
    }
    for f in sequence {
        f.compatible(first)?;
    }
    let tail = &sequence[sequence.len() / 2..];
    let mut tail_diameter: f64 = 0.0;
    for (i, f) in tail.iter().enumerate() {
        for g in &tail[i + 1..] {
            tail_diameter = tail_diameter.max(con_distance(f, g, grid)?.raw_sup);
        }
    }
    if tail_diameter > cauchy_tol {
        return Err(Error::NotCauchy(tail_diameter));
    }

    let space = &first.space;
    let xs = space.carrier().grid(grid);
    let last = sequence.last().expect("non-empty");
    let values: Vec<Point> = xs.iter().map(|x| last.map.eval(x)).collect();

    let t = first.t;
    let mut limit_ratio: f64 = 0.0;
    let mut in_con_t = true;
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            let d = space.rule_distance(&xs[i], &xs[j]);
            let dg = space.rule_distance(&values[i], &values[j]);
            if d > 0.0 {
                limit_ratio = limit_ratio.max(dg / d);
            }
            if dg > t * d + AXIOM_TOL {
                in_con_t = false;
            }
        }
    }

    let distances_to_limit = sequence
        .iter()
        .map(|f| {
            xs.iter()
                .zip(&values)
                .map(|(x, gx)| space.rule_distance(&f.map.eval(x), gx))
                .fold(f64::NEG_INFINITY, f64::max)
                .min(1.0)
        })
        .collect();

    Ok(CauchyReport {
        tail_diameter,
        limit: GridFunction { xs, values },
        limit_ratio,
        in_con_t,
        distances_to_limit,
    })
}
