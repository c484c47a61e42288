//! Partial iterated function systems: single-map fixed points, the
//! Hutchinson operator on compact sets, attractors and condensation.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hyperspace::{
    default_snap, diameter_unchecked, hausdorff_unchecked, point_to_set_unchecked, CompactSet,
    FinitePointSet,
};
use crate::maps::LipMap;
use crate::pmetric::{Point, RealSpace, AXIOM_TOL};

/// Default cap on the size of a Hutchinson image.
pub const DEFAULT_SIZE_CAP: usize = 1 << 20;

/// Default stopping tolerances and iteration limits.
pub const DEFAULT_TOL_1D: f64 = 1e-9;
pub const DEFAULT_TOL_2D: f64 = 1e-6;
pub const DEFAULT_POINT_MAX_ITER: usize = 10_000;
pub const DEFAULT_SET_MAX_ITER: usize = 200;

/// Samples per axis used to check that a map keeps the carrier.
const CARRIER_PROBE: usize = 65;

#[derive(Clone, Debug)]
pub struct Ifs {
    space: RealSpace,
    maps: Vec<LipMap>,
    condensation: Option<CompactSet>,
    factor: f64,
    snap: f64,
    size_cap: usize,
}

impl Ifs {
    /// Every map needs a declared factor in `[0, 1)`, the space's metric and
    /// dimension, and must send the carrier into itself.
    pub fn new(space: RealSpace, maps: Vec<LipMap>) -> Result<Self> {
        if maps.is_empty() {
            return Err(Error::Precondition("an IFS needs at least one map".into()));
        }
        let mut factor: f64 = 0.0;
        for f in &maps {
            let s = contraction_factor(f)?;
            f.check_metric(&space)?;
            check_keeps_carrier(f, &space)?;
            factor = factor.max(s);
        }
        let snap = default_snap(space.carrier());
        Ok(Ifs {
            space,
            maps,
            condensation: None,
            factor,
            snap,
            size_cap: DEFAULT_SIZE_CAP,
        })
    }

    /// Adds a condensation set; it must satisfy `h_p(C,C) = 0`.
    pub fn with_condensation(mut self, c: CompactSet) -> Result<Self> {
        c.validate(&self.space)?;
        let self_h = hausdorff_unchecked(&self.space, &c, &c)?;
        if self_h > AXIOM_TOL {
            return Err(Error::CondensationNotInClass(self_h));
        }
        self.condensation = Some(c);
        Ok(self)
    }

    pub fn with_snap(mut self, snap: f64) -> Result<Self> {
        if !(snap.is_finite() && snap > 0.0) {
            return Err(Error::Precondition(format!("snap must be positive, got {snap}")));
        }
        self.snap = snap;
        Ok(self)
    }

    pub fn with_size_cap(mut self, cap: usize) -> Self {
        self.size_cap = cap;
        self
    }

    pub fn space(&self) -> &RealSpace {
        &self.space
    }

    pub fn maps(&self) -> &[LipMap] {
        &self.maps
    }

    pub fn condensation(&self) -> Option<&CompactSet> {
        self.condensation.as_ref()
    }

    /// `s = max_j s_j`.
    pub fn factor(&self) -> f64 {
        self.factor
    }

    pub fn snap(&self) -> f64 {
        self.snap
    }

    pub fn default_tol(&self) -> f64 {
        if self.space.dim() == 1 {
            DEFAULT_TOL_1D
        } else {
            DEFAULT_TOL_2D
        }
    }

    fn images(&self, b: &CompactSet) -> Result<Vec<Point>> {
        b.validate(&self.space)?;
        let members = b.members(self.snap)?;
        let mut pts: Vec<Point> = members
            .par_iter()
            .flat_map_iter(|x| self.maps.iter().map(move |f| f.eval(x)))
            .collect();
        if let Some(c) = &self.condensation {
            pts.extend(c.members(self.snap)?);
        }
        Ok(pts)
    }

    /// `W(B) = f_1(B) u ... u f_N(B)` (u `C` with condensation), quantized to
    /// the snap grid.
    pub fn hutchinson(&self, b: &CompactSet) -> Result<CompactSet> {
        let pts = self.images(b)?;
        let set = FinitePointSet::quantized(pts, self.snap, self.space.carrier())?;
        if set.len() > self.size_cap {
            return Err(Error::SizeCap {
                cap: self.size_cap,
                size: set.len(),
            });
        }
        Ok(CompactSet::Finite(set))
    }

    /// `W(B)` with exact deduplication only; no snapping.
    pub fn hutchinson_exact(&self, b: &CompactSet) -> Result<CompactSet> {
        let pts = self.images(b)?;
        if pts.len() > self.size_cap {
            return Err(Error::SizeCap {
                cap: self.size_cap,
                size: pts.len(),
            });
        }
        CompactSet::points(pts)
    }

    /// Iterates `W` from `seed` until
    /// `h_p(W^n B, W^{n+1} B) - min{self-distances} <= tol`.
    pub fn attractor(
        &self,
        seed: &CompactSet,
        tol: f64,
        max_iter: usize,
    ) -> Result<(CompactSet, AttractorDiagnostics)> {
        let mut current = CompactSet::Finite(seed.rasterize(self.snap)?);
        current.validate(&self.space)?;
        let mut gaps = Vec::new();
        let mut plain_gaps = Vec::new();
        let mut seen: HashMap<u64, usize> = HashMap::new();
        seen.insert(set_hash(&current), 0);
        for iteration in 1..=max_iter {
            let next = self.hutchinson(&current)?;
            let plain = hausdorff_unchecked(&self.space, &current, &next)?;
            let self_min = hausdorff_unchecked(&self.space, &current, &current)?
                .min(hausdorff_unchecked(&self.space, &next, &next)?);
            let gap = plain - self_min;
            gaps.push(gap);
            plain_gaps.push(plain);
            let revisit = seen.insert(set_hash(&next), iteration).is_some();
            current = next;
            let mut cycle_length = 0;
            if gap > tol && revisit {
                let (union, len) = self.cycle_union(&current, max_iter)?;
                if len > 0 {
                    current = union;
                    cycle_length = len;
                }
            }
            if gap <= tol || cycle_length > 0 {
                let image = self.hutchinson(&current)?;
                let invariance_gap = hausdorff_unchecked(&self.space, &current, &image)?;
                return Ok((
                    current,
                    AttractorDiagnostics {
                        iterations: iteration,
                        gap,
                        plain_gap: plain,
                        invariance_gap,
                        snap: self.snap,
                        cycle_length,
                        gaps,
                        plain_gaps,
                    },
                ));
            }
        }
        Err(Error::MaxIterExhausted {
            max_iter,
            last_gap: gaps.last().copied().unwrap_or(f64::NAN),
        })
    }
}

impl Ifs {
    /// If iterating `W` from `start` returns to `start`, the union of the
    /// orbit (a `W`-invariant set) and the period; otherwise period 0.
    fn cycle_union(&self, start: &CompactSet, max_iter: usize) -> Result<(CompactSet, usize)> {
        let mut members: Vec<Point> = start.members(self.snap)?;
        let mut state = self.hutchinson(start)?;
        for len in 1..=max_iter {
            if &state == start {
                let union = FinitePointSet::new(members)?;
                return Ok((CompactSet::Finite(union), len));
            }
            members.extend(state.members(self.snap)?);
            state = self.hutchinson(&state)?;
        }
        Ok((start.clone(), 0))
    }
}

fn set_hash(set: &CompactSet) -> u64 {
    let mut h = DefaultHasher::new();
    match set {
        CompactSet::Finite(s) => {
            for p in s.points() {
                for c in p.coords() {
                    c.to_bits().hash(&mut h);
                }
            }
        }
        CompactSet::Interval { a, b } => {
            a.to_bits().hash(&mut h);
            b.to_bits().hash(&mut h);
        }
    }
    h.finish()
}

fn contraction_factor(f: &LipMap) -> Result<f64> {
    match f.declared_lip() {
        Some(s) if (0.0..1.0).contains(&s) => Ok(s),
        Some(s) => Err(Error::NotAContraction(s.to_string())),
        None => Err(Error::NotAContraction("unknown".into())),
    }
}

fn check_keeps_carrier(f: &LipMap, space: &RealSpace) -> Result<()> {
    if f.dim() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            got: f.dim(),
        });
    }
    let carrier = space.carrier();
    let mut probes = carrier.corners();
    probes.extend(carrier.grid(CARRIER_PROBE));
    for x in probes {
        let y = f.eval(&x);
        if !carrier.contains(&y) {
            return Err(Error::EscapesCarrier(format!(
                "{} maps {x} to {y} outside {carrier}",
                f.form()
            )));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct AttractorDiagnostics {
    pub iterations: usize,
    /// Final `h_p` gap minus the smaller self-distance.
    pub gap: f64,
    pub plain_gap: f64,
    /// `h_p(A, W(A))` for the returned set.
    pub invariance_gap: f64,
    /// Grid resolution; the accuracy floor of the approximation.
    pub snap: f64,
    /// Period of the quantized orbit when iteration ended on a cycle; the
    /// returned set is then the union of the cycle. 0 otherwise.
    pub cycle_length: usize,
    pub gaps: Vec<f64>,
    pub plain_gaps: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FixedPointDiagnostics {
    pub iterations: usize,
    /// `p(x_n, x_{n+1}) - min{p(x_n,x_n), p(x_{n+1},x_{n+1})}` at exit.
    pub gap: f64,
    /// `p(x*, x*)`.
    pub self_distance: f64,
    /// `p(x*, f(x*))`.
    pub residual: f64,
}

/// Picard iteration `x_{n+1} = f(x_n)` for a declared contraction. Stops
/// once the gap and `p(x, x)` are both within `tol`; a self-distance that
/// stops decreasing above `tol` is an error.
pub fn fixed_point(
    f: &LipMap,
    space: &RealSpace,
    x0: &Point,
    tol: f64,
    max_iter: usize,
) -> Result<(Point, FixedPointDiagnostics)> {
    contraction_factor(f)?;
    space.check_point(x0)?;
    if x0.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: x0.dim(),
        });
    }
    let p = |a: &Point, b: &Point| space.rule_distance(a, b);
    let mut x = *x0;
    let mut last_gap = f64::INFINITY;
    let mut last_self = f64::INFINITY;
    for iteration in 1..=max_iter {
        let next = f.eval(&x);
        let gap = p(&x, &next) - p(&x, &x).min(p(&next, &next));
        last_gap = gap;
        x = next;
        if gap <= tol {
            let self_distance = p(&x, &x);
            if self_distance > tol {
                if self_distance < last_self {
                    last_self = self_distance;
                    continue;
                }
                return Err(Error::SelfDistanceNotVanishing(self_distance));
            }
            let residual = p(&x, &f.eval(&x));
            return Ok((
                x,
                FixedPointDiagnostics {
                    iterations: iteration,
                    gap,
                    self_distance,
                    residual,
                },
            ));
        }
    }
    Err(Error::MaxIterExhausted { max_iter, last_gap })
}

#[derive(Clone, Debug, PartialEq)]
pub struct AprioriCheck {
    pub fixed_point: Point,
    /// `p(x, x_f)`
    pub lhs: f64,
    /// `p(x, f(x)) / (1 - s)`
    pub rhs: f64,
    pub holds: bool,
}

/// Checks `p(x, x_f) <= p(x, f(x)) / (1 - s) + tol`.
pub fn apriori_bound_check(f: &LipMap, space: &RealSpace, x: &Point, tol: f64) -> Result<AprioriCheck> {
    let s = contraction_factor(f)?;
    space.check_point(x)?;
    let (xf, _) = fixed_point(f, space, x, tol * (1.0 - s), DEFAULT_POINT_MAX_ITER)?;
    let lhs = space.rule_distance(x, &xf);
    let rhs = space.rule_distance(x, &f.eval(x)) / (1.0 - s);
    Ok(AprioriCheck {
        fixed_point: xf,
        lhs,
        rhs,
        holds: lhs <= rhs + tol,
    })
}

/// For `f(H) ⊆ H`, checks that the fixed point of `f` lies in `H`, i.e.
/// `p(x_f, H) - p(x_f, x_f) <= tol`. Returns [`Error::Precondition`] when
/// `f(H) ⊄ H`. Finite sets are tested at their snap resolution, or exactly
/// when unsnapped.
pub fn invariant_set_check(f: &LipMap, space: &RealSpace, h: &CompactSet, tol: f64) -> Result<bool> {
    contraction_factor(f)?;
    h.validate(space)?;
    match h {
        CompactSet::Interval { a, b } => {
            let (lo, hi) = f.image_interval(*a, *b).ok_or_else(|| {
                Error::Unsupported("interval images need a 1-D map".into())
            })?;
            if lo < a - AXIOM_TOL || hi > b + AXIOM_TOL {
                return Err(Error::Precondition(format!(
                    "f([{a}, {b}]) = [{lo}, {hi}] is not inside H"
                )));
            }
        }
        CompactSet::Finite(s) => {
            let res = s.snap().unwrap_or(0.0).max(AXIOM_TOL);
            for x in s.points() {
                let y = f.eval(x);
                if point_to_set_unchecked(space, &y, h) - space.rule_distance(&y, &y) > res {
                    return Err(Error::Precondition(format!("f({x}) = {y} is not in H")));
                }
            }
        }
    }
    let x0 = match h {
        CompactSet::Interval { a, .. } => Point::x(*a),
        CompactSet::Finite(s) => s.points()[0],
    };
    let (xf, _) = fixed_point(f, space, &x0, tol, DEFAULT_POINT_MAX_ITER)?;
    Ok(point_to_set_unchecked(space, &xf, h) - space.rule_distance(&xf, &xf) <= tol)
}

/// The constant hyperspace map `B -> C`.
#[derive(Clone, Debug, PartialEq)]
pub struct Condensation {
    set: CompactSet,
}

impl Condensation {
    pub fn new(set: CompactSet) -> Self {
        Condensation { set }
    }

    pub fn set(&self) -> &CompactSet {
        &self.set
    }

    pub fn apply(&self, _b: &CompactSet) -> CompactSet {
        self.set.clone()
    }
}

pub fn condensation_map(c: CompactSet) -> Condensation {
    Condensation::new(c)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeRow {
    pub b1: CompactSet,
    pub b2: CompactSet,
    /// `h_p(w0(B1), w0(B2)) = h_p(C, C)`
    pub image_distance: f64,
    /// `h_p(B1, B2)`
    pub distance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CondensationVerdict {
    pub contraction: bool,
    /// `h_p(C, C)`
    pub self_distance: f64,
    pub rows: Vec<ProbeRow>,
    /// `(C, C)` when the map is not a contraction.
    pub witness: Option<ProbeRow>,
}

/// The condensation map of `C` is a contraction iff `h_p(C,C) = 0`. The
/// pair `(C, C)` is always appended to the probes.
pub fn condensation_contraction_check(
    c: &CompactSet,
    space: &RealSpace,
    probes: &[(CompactSet, CompactSet)],
) -> Result<CondensationVerdict> {
    c.validate(space)?;
    let w0 = Condensation::new(c.clone());
    let mut all: Vec<(CompactSet, CompactSet)> = probes.to_vec();
    all.push((c.clone(), c.clone()));
    let rows = all
        .into_iter()
        .map(|(b1, b2)| {
            b1.validate(space)?;
            b2.validate(space)?;
            Ok(ProbeRow {
                image_distance: hausdorff_unchecked(space, &w0.apply(&b1), &w0.apply(&b2))?,
                distance: hausdorff_unchecked(space, &b1, &b2)?,
                b1,
                b2,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let self_distance = hausdorff_unchecked(space, c, c)?;
    let contraction = self_distance <= AXIOM_TOL;
    let witness = if contraction { None } else { rows.last().cloned() };
    Ok(CondensationVerdict {
        contraction,
        self_distance,
        rows,
        witness,
    })
}

/// `diam` of a validated set; re-exported for callers holding an [`Ifs`].
pub fn set_diameter(ifs: &Ifs, a: &CompactSet) -> Result<f64> {
    a.validate(ifs.space())?;
    Ok(diameter_unchecked(ifs.space(), a))
}
