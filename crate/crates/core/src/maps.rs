//! Lipschitz self-maps of a real carrier, composition with Lipschitz
//! bookkeeping, sampled Lipschitz estimates and semigroup closure checks.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ifs::Ifs;
use crate::pmetric::{MetricKey, Point, RealSpace};
use crate::shiftspace::Word;

/// Slack for comparing a sampled estimate with a declared constant.
pub const LIP_TOL: f64 = 1e-9;

/// Default cap on the number of semigroup elements enumerated.
pub const DEFAULT_WORD_CAP: usize = 100_000;

#[derive(Clone, Debug, PartialEq)]
pub enum MapForm {
    /// `x -> a x + b`
    Affine1d { a: f64, b: f64 },
    /// `x -> a x^2`
    Quad1d { a: f64 },
    /// `x -> M x + v`
    Affine2d { m: [[f64; 2]; 2], v: [f64; 2] },
    /// `f_1 o f_2 o ... o f_k`; the last entry is applied first.
    Composition(Vec<LipMap>),
}

impl MapForm {
    pub fn affine1d(a: f64, b: f64) -> Self {
        MapForm::Affine1d { a, b }
    }

    pub fn quad1d(a: f64) -> Self {
        MapForm::Quad1d { a }
    }

    pub fn affine2d(m: [[f64; 2]; 2], v: [f64; 2]) -> Self {
        MapForm::Affine2d { m, v }
    }

    /// Binds the form to a metric, with an unknown Lipschitz constant.
    pub fn under(self, metric: MetricKey) -> LipMap {
        LipMap {
            form: self,
            declared_lip: None,
            metric,
        }
    }

    /// Parses `affine1d a b`, `quad1d a` or `affine2d m11 m12 m21 m22 v1 v2`.
    pub fn parse(literal: &str) -> Result<Self> {
        let bad = || Error::BadMapLiteral(literal.to_string());
        let mut tokens = literal.split_whitespace();
        let kind = tokens.next().ok_or_else(bad)?;
        let nums: Vec<f64> = tokens
            .map(|t| t.parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        if nums.iter().any(|x| !x.is_finite()) {
            return Err(bad());
        }
        match (kind, nums.as_slice()) {
            ("affine1d", [a, b]) => Ok(MapForm::affine1d(*a, *b)),
            ("quad1d", [a]) => Ok(MapForm::quad1d(*a)),
            ("affine2d", [m11, m12, m21, m22, v1, v2]) => {
                Ok(MapForm::affine2d([[*m11, *m12], [*m21, *m22]], [*v1, *v2]))
            }
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for MapForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapForm::Affine1d { a, b } => write!(f, "affine1d {a} {b}"),
            MapForm::Quad1d { a } => write!(f, "quad1d {a}"),
            MapForm::Affine2d { m, v } => write!(
                f,
                "affine2d {} {} {} {} {} {}",
                m[0][0], m[0][1], m[1][0], m[1][1], v[0], v[1]
            ),
            MapForm::Composition(parts) => {
                let names: Vec<String> = parts.iter().map(|p| format!("({})", p.form)).collect();
                write!(f, "{}", names.join(" o "))
            }
        }
    }
}

/// A self-map of a carrier together with the Lipschitz constant it is
/// declared to have under a named partial metric.
#[derive(Clone, Debug, PartialEq)]
pub struct LipMap {
    form: MapForm,
    declared_lip: Option<f64>,
    metric: MetricKey,
}

impl LipMap {
    pub fn with_lip(mut self, lip: f64) -> Self {
        self.declared_lip = Some(lip);
        self
    }

    pub fn parse(literal: &str, metric: MetricKey) -> Result<Self> {
        Ok(MapForm::parse(literal)?.under(metric))
    }

    pub fn identity(metric: MetricKey, dim: usize) -> Self {
        let form = match dim {
            1 => MapForm::affine1d(1.0, 0.0),
            _ => MapForm::affine2d([[1.0, 0.0], [0.0, 1.0]], [0.0, 0.0]),
        };
        form.under(metric).with_lip(1.0)
    }

    pub fn form(&self) -> &MapForm {
        &self.form
    }

    pub fn declared_lip(&self) -> Option<f64> {
        self.declared_lip
    }

    pub fn metric(&self) -> MetricKey {
        self.metric
    }

    /// Input dimension, or `None` for an empty composition.
    pub fn dim(&self) -> usize {
        match &self.form {
            MapForm::Affine1d { .. } | MapForm::Quad1d { .. } => 1,
            MapForm::Affine2d { .. } => 2,
            MapForm::Composition(parts) => parts.last().map_or(1, LipMap::dim),
        }
    }

    /// Evaluates the form without carrier checks. The point must have the
    /// map's dimension.
    pub fn eval(&self, x: &Point) -> Point {
        match &self.form {
            MapForm::Affine1d { a, b } => Point::x(a * x.value() + b),
            MapForm::Quad1d { a } => {
                let v = x.value();
                Point::x(a * v * v)
            }
            MapForm::Affine2d { m, v } => {
                let c = x.coords();
                Point::xy(
                    m[0][0] * c[0] + m[0][1] * c[1] + v[0],
                    m[1][0] * c[0] + m[1][1] * c[1] + v[1],
                )
            }
            MapForm::Composition(parts) => parts.iter().rev().fold(*x, |p, f| f.eval(&p)),
        }
    }

    /// Evaluates the map at a carrier point, failing if the image leaves
    /// the carrier.
    pub fn apply(&self, space: &RealSpace, x: &Point) -> Result<Point> {
        self.check_metric(space)?;
        space.check_point(x)?;
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.dim(),
            });
        }
        let y = self.eval(x);
        space
            .check_point(&y)
            .map_err(|_| Error::EscapesCarrier(format!("{} maps {x} to {y}", self.form)))?;
        Ok(y)
    }

    pub(crate) fn check_metric(&self, space: &RealSpace) -> Result<()> {
        if self.metric != space.key() {
            return Err(Error::MetricMismatch(
                self.metric.to_string(),
                space.key().to_string(),
            ));
        }
        Ok(())
    }

    /// Exact image of `[lo, hi]` for 1-D forms.
    pub fn image_interval(&self, lo: f64, hi: f64) -> Option<(f64, f64)> {
        match &self.form {
            MapForm::Affine1d { a, b } => {
                let (u, v) = (a * lo + b, a * hi + b);
                Some((u.min(v), u.max(v)))
            }
            MapForm::Quad1d { a } => {
                let sq_max = (lo * lo).max(hi * hi);
                let sq_min = if lo <= 0.0 && hi >= 0.0 {
                    0.0
                } else {
                    (lo * lo).min(hi * hi)
                };
                let (u, v) = (a * sq_min, a * sq_max);
                Some((u.min(v), u.max(v)))
            }
            MapForm::Affine2d { .. } => None,
            MapForm::Composition(parts) => parts
                .iter()
                .rev()
                .try_fold((lo, hi), |(l, h), f| f.image_interval(l, h)),
        }
    }

    fn parts(&self) -> Vec<LipMap> {
        match &self.form {
            MapForm::Composition(parts) => parts.clone(),
            _ => vec![self.clone()],
        }
    }
}

/// `f o g`, with declared constant `Lip(f) * Lip(g)` when both are known.
pub fn compose(f: &LipMap, g: &LipMap) -> Result<LipMap> {
    if f.metric != g.metric {
        return Err(Error::MetricMismatch(f.metric.to_string(), g.metric.to_string()));
    }
    let mut parts = f.parts();
    parts.extend(g.parts());
    Ok(LipMap {
        form: MapForm::Composition(parts),
        declared_lip: f.declared_lip.zip(g.declared_lip).map(|(a, b)| a * b),
        metric: f.metric,
    })
}

/// `f_{w_1} o ... o f_{w_m}` over `maps`, letters 1-based.
pub fn compose_word(maps: &[LipMap], word: &Word) -> Result<LipMap> {
    let mut letters = word.letters().iter();
    let first = letters.next().ok_or_else(|| Error::BadWord("empty word".into()))?;
    let pick = |l: usize| {
        maps.get(l - 1).ok_or(Error::LetterOutOfRange {
            letter: l,
            n: maps.len(),
        })
    };
    let mut acc = pick(*first)?.clone();
    for &l in letters {
        acc = compose(&acc, pick(l)?)?;
    }
    Ok(acc)
}

/// Lower bound of `Lip_p(f)`: the largest ratio `p(f(x),f(y)) / p(x,y)` over
/// all pairs of a deterministic carrier grid with `p(x,y) > 0`. The grid
/// contains the carrier corners, where the ratio of the monotone forms used
/// here is extremal. Images are evaluated without carrier checks.
pub fn lipschitz_estimate(f: &LipMap, space: &RealSpace, n_samples: usize) -> Result<f64> {
    if n_samples < 2 {
        return Err(Error::Precondition("lipschitz_estimate needs n_samples >= 2".into()));
    }
    if f.dim() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            got: f.dim(),
        });
    }
    let per_axis = match space.dim() {
        1 => n_samples,
        _ => (n_samples as f64).sqrt().ceil() as usize,
    };
    let mut xs = space.carrier().grid(per_axis);
    xs.extend(space.carrier().corners());
    let images: Vec<Point> = xs.iter().map(|x| f.eval(x)).collect();
    let best = (0..xs.len())
        .into_par_iter()
        .map(|i| {
            let mut best = f64::NEG_INFINITY;
            for j in i + 1..xs.len() {
                let d = space.rule_distance(&xs[i], &xs[j]);
                if d > 0.0 {
                    best = best.max(space.rule_distance(&images[i], &images[j]) / d);
                }
            }
            best
        })
        .reduce(|| f64::NEG_INFINITY, f64::max);
    if best == f64::NEG_INFINITY {
        return Err(Error::DegenerateCarrier);
    }
    Ok(best)
}

/// Membership test for semigroup closure checks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Predicate {
    /// Finite Lipschitz constant.
    Lipschitz,
    /// Lipschitz constant below one.
    Contraction,
    /// Lipschitz constant exactly `L`.
    FixedLip(f64),
}

impl std::str::FromStr for Predicate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "lipschitz" => Ok(Predicate::Lipschitz),
            "contraction" => Ok(Predicate::Contraction),
            _ => s
                .strip_prefix("fixed_lip:")
                .and_then(|l| l.parse::<f64>().ok())
                .filter(|l| l.is_finite())
                .map(Predicate::FixedLip)
                .ok_or_else(|| Error::Parse(format!("unknown predicate `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WordVerdict {
    pub word: Word,
    pub declared: Option<f64>,
    pub estimate: f64,
    pub satisfies: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClosureReport {
    pub closed: bool,
    pub verdicts: Vec<WordVerdict>,
}

impl ClosureReport {
    pub fn violations(&self) -> impl Iterator<Item = &WordVerdict> {
        self.verdicts.iter().filter(|v| !v.satisfies)
    }

    /// First violating word in length-then-lexicographic order.
    pub fn first_violation(&self) -> Option<&WordVerdict> {
        self.violations().next()
    }
}

fn satisfies(predicate: Predicate, declared: Option<f64>, estimate: f64) -> bool {
    let bookkeeping_ok = declared.map_or(true, |d| estimate <= d + LIP_TOL);
    match predicate {
        Predicate::Lipschitz => {
            bookkeeping_ok && estimate.is_finite() && declared.map_or(true, f64::is_finite)
        }
        Predicate::Contraction => bookkeeping_ok && declared.is_some_and(|d| d < 1.0),
        // The estimate is a lower bound and the declared constant an upper
        // bound; either one lying strictly off L is a certain violation.
        Predicate::FixedLip(l) => estimate <= l + LIP_TOL && declared.map_or(true, |d| d >= l - LIP_TOL),
    }
}

/// Enumerates all compositions of `family` up to word length `depth` and
/// tests each against `predicate`.
pub fn semigroup_closure_check(
    family: &[LipMap],
    space: &RealSpace,
    predicate: Predicate,
    depth: usize,
    n_samples: usize,
) -> Result<ClosureReport> {
    if family.is_empty() {
        return Err(Error::Precondition("empty map family".into()));
    }
    if depth < 2 {
        return Err(Error::Precondition("closure depth must be at least 2".into()));
    }
    let words = words_up_to(family.len(), depth, DEFAULT_WORD_CAP)?;
    let verdicts = words
        .into_par_iter()
        .map(|word| {
            let map = compose_word(family, &word)?;
            let estimate = lipschitz_estimate(&map, space, n_samples)?;
            let declared = map.declared_lip();
            Ok(WordVerdict {
                satisfies: satisfies(predicate, declared, estimate),
                word,
                declared,
                estimate,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ClosureReport {
        closed: verdicts.iter().all(|v| v.satisfies),
        verdicts,
    })
}

fn words_up_to(alphabet: usize, max_len: usize, cap: usize) -> Result<Vec<Word>> {
    let mut total = 0usize;
    let mut layer = 1usize;
    for _ in 0..max_len {
        layer = layer.saturating_mul(alphabet);
        total = total.saturating_add(layer);
    }
    if total > cap {
        return Err(Error::SizeCap { cap, size: total });
    }
    Ok((1..=max_len)
        .flat_map(|m| Word::all_of_length(m, alphabet))
        .collect())
}

/// Every element `f_{w_1} o ... o f_{w_m}` of the semigroup generated by an
/// IFS, for `1 <= m <= max_len`, in length-then-lexicographic order.
pub fn ifsp_semigroup_words(ifs: &Ifs, max_len: usize, cap: usize) -> Result<Vec<(Word, LipMap)>> {
    if max_len < 1 {
        return Err(Error::Precondition("max_len must be at least 1".into()));
    }
    words_up_to(ifs.maps().len(), max_len, cap)?
        .into_par_iter()
        .map(|w| {
            let f = compose_word(ifs.maps(), &w)?;
            Ok((w, f))
        })
        .collect()
}
