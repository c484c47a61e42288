//! The shift space of infinite words over the map indices, its partial
//! metric, cylinder sets and the addressing map `w -> a_w`.
//!
//! Infinite words are stored as finite prefixes. For metric evaluation past
//! the prefix a word repeats its last letter; addressing only ever uses the
//! explicit prefix.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};
use crate::hyperspace::{diameter_unchecked, CompactSet};
use crate::ifs::{fixed_point, Ifs, DEFAULT_POINT_MAX_ITER};
use crate::maps::compose_word;
use crate::pmetric::{PartialMetric, Point};

/// Sum of `1/k^2` over all `k >= 1`, the constant part of the shift metric
/// and every word's self-distance.
pub const BASEL: f64 = PI * PI / 6.0;

/// Default truncation; the dropped tail is below `3^-40 / 2`.
pub const DEFAULT_TRUNCATION: usize = 40;

/// A finite word over `{1, ..., alphabet}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Word {
    letters: Vec<usize>,
    alphabet: usize,
}

impl Word {
    pub fn new(letters: Vec<usize>, alphabet: usize) -> Result<Self> {
        if alphabet == 0 {
            return Err(Error::BadWord("alphabet must be non-empty".into()));
        }
        if let Some(&l) = letters.iter().find(|&&l| l == 0 || l > alphabet) {
            return Err(Error::LetterOutOfRange { letter: l, n: alphabet });
        }
        Ok(Word { letters, alphabet })
    }

    /// The empty word, addressing the root cylinder.
    pub fn root(alphabet: usize) -> Self {
        Word {
            letters: Vec::new(),
            alphabet,
        }
    }

    /// Parses a digit string such as `"121121"`.
    pub fn parse(digits: &str, alphabet: usize) -> Result<Self> {
        let letters = digits
            .trim()
            .chars()
            .map(|c| {
                c.to_digit(10)
                    .map(|d| d as usize)
                    .ok_or_else(|| Error::BadWord(digits.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        Word::new(letters, alphabet)
    }

    /// `prefix` repeated `times` times.
    pub fn repeat(prefix: &[usize], times: usize, alphabet: usize) -> Result<Self> {
        Word::new(prefix.repeat(times), alphabet)
    }

    pub fn letters(&self) -> &[usize] {
        &self.letters
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// `w j`
    pub fn extended(&self, letter: usize) -> Result<Self> {
        let mut letters = self.letters.clone();
        letters.push(letter);
        Word::new(letters, self.alphabet)
    }

    /// Letter `k` (1-based), repeating the last letter past the prefix.
    pub fn letter_at(&self, k: usize) -> Option<usize> {
        self.letters
            .get(k - 1)
            .or_else(|| self.letters.last())
            .copied()
    }

    /// All words of length `m` in lexicographic order.
    pub fn all_of_length(m: usize, alphabet: usize) -> impl Iterator<Item = Word> {
        let total = alphabet.pow(m as u32);
        (0..total).map(move |mut idx| {
            let mut letters = vec![0; m];
            for slot in letters.iter_mut().rev() {
                *slot = idx % alphabet + 1;
                idx /= alphabet;
            }
            Word { letters, alphabet }
        })
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.alphabet <= 9 {
            for l in &self.letters {
                write!(f, "{l}")?;
            }
            Ok(())
        } else {
            let s: Vec<String> = self.letters.iter().map(|l| l.to_string()).collect();
            write!(f, "{}", s.join("."))
        }
    }
}

/// `p(a, b) = sum_k (1 - delta(a_k, b_k)) / 3^k + 1/k^2`, truncated at `K`
/// in the letter-mismatch part. Returns the value and the bound `3^-K / 2`
/// on the dropped tail; the `1/k^2` part is summed exactly as [`BASEL`].
pub fn shift_metric(alpha: &Word, beta: &Word, truncation: usize) -> Result<(f64, f64)> {
    if truncation < 1 {
        return Err(Error::Precondition("truncation K must be at least 1".into()));
    }
    if alpha.is_empty() || beta.is_empty() {
        return Err(Error::BadWord("metric needs non-empty words".into()));
    }
    Ok((
        BASEL + mismatch_sum(alpha, beta, truncation),
        0.5 * 3f64.powi(-(truncation as i32)),
    ))
}

fn mismatch_sum(alpha: &Word, beta: &Word, truncation: usize) -> f64 {
    // smallest terms first
    (1..=truncation)
        .rev()
        .filter(|&k| alpha.letter_at(k) != beta.letter_at(k))
        .map(|k| 3f64.powi(-(k as i32)))
        .sum()
}

/// The shift space `Λ(I)` with truncation `K`, as a [`PartialMetric`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShiftSpace {
    pub alphabet: usize,
    pub truncation: usize,
}

impl ShiftSpace {
    pub fn new(alphabet: usize, truncation: usize) -> Result<Self> {
        if alphabet < 1 || truncation < 1 {
            return Err(Error::Precondition("shift space needs N >= 1 and K >= 1".into()));
        }
        Ok(ShiftSpace {
            alphabet,
            truncation,
        })
    }

    pub fn random_word<R: rand::Rng + ?Sized>(&self, rng: &mut R, len: usize) -> Word {
        Word {
            letters: (0..len).map(|_| rng.gen_range(1..=self.alphabet)).collect(),
            alphabet: self.alphabet,
        }
    }
}

impl PartialMetric for ShiftSpace {
    type Elem = Word;

    fn distance(&self, x: &Word, y: &Word) -> f64 {
        BASEL + mismatch_sum(x, y, self.truncation)
    }

    /// Equal up to the truncation under the padding convention.
    fn same_point(&self, x: &Word, y: &Word) -> bool {
        (1..=self.truncation).all(|k| x.letter_at(k) == y.letter_at(k))
    }
}

fn check_word(ifs: &Ifs, w: &Word) -> Result<()> {
    let n = ifs.maps().len();
    match w.letters().iter().find(|&&l| l > n) {
        Some(&letter) => Err(Error::LetterOutOfRange { letter, n }),
        None => Ok(()),
    }
}

/// `A_[w]_m = f_{w_1} o ... o f_{w_m}(A)`. Interval inputs stay exact
/// intervals under 1-D maps; finite sets are mapped pointwise.
pub fn cylinder_set(ifs: &Ifs, w: &Word, a: &CompactSet) -> Result<CompactSet> {
    check_word(ifs, w)?;
    a.validate(ifs.space())?;
    if w.is_empty() {
        return Ok(a.clone());
    }
    let f = compose_word(ifs.maps(), w)?;
    match a {
        CompactSet::Interval { a: lo, b: hi } => {
            let (l, h) = f
                .image_interval(*lo, *hi)
                .ok_or_else(|| Error::Unsupported("interval image needs 1-D maps".into()))?;
            CompactSet::interval(l, h)
        }
        CompactSet::Finite(s) => CompactSet::points(s.points().iter().map(|x| f.eval(x)).collect()),
    }
}

/// `f_[w]_m(seed)` and the bound `c^m diam(A)` on its distance to `a_w`.
pub fn address_to_point(ifs: &Ifs, w: &Word, seed: &Point, attractor: &CompactSet) -> Result<(Point, f64)> {
    check_word(ifs, w)?;
    if w.is_empty() {
        return Err(Error::BadWord("addressing needs a word of length >= 1".into()));
    }
    ifs.space().check_point(seed)?;
    attractor.validate(ifs.space())?;
    let f = compose_word(ifs.maps(), w)?;
    let diam = diameter_unchecked(ifs.space(), attractor);
    Ok((f.eval(seed), ifs.factor().powi(w.len() as i32) * diam))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComposedCheck {
    /// `x_[w]_m`, the fixed point of the composed map.
    pub fixed_point: Point,
    /// `f_[w]_m(seed)`, the estimate of `a_w`.
    pub address: Point,
    pub distance: f64,
    /// `c^m diam(A) + tol`
    pub bound: f64,
    pub holds: bool,
}

/// Checks `p(x_[w]_m, a_w) <= c^m diam(A) + tol`, with `a_w` estimated
/// from the first member of `attractor`.
pub fn composed_fixed_point_check(ifs: &Ifs, w: &Word, attractor: &CompactSet, tol: f64) -> Result<ComposedCheck> {
    check_word(ifs, w)?;
    let seed = match attractor {
        CompactSet::Interval { a, .. } => Point::x(*a),
        CompactSet::Finite(s) => s.points()[0],
    };
    let (address, err) = address_to_point(ifs, w, &seed, attractor)?;
    let f = compose_word(ifs.maps(), w)?;
    let (fixed, _) = fixed_point(&f, ifs.space(), &seed, tol, DEFAULT_POINT_MAX_ITER)?;
    let distance = ifs.space().rule_distance(&fixed, &address);
    let bound = err + tol;
    Ok(ComposedCheck {
        fixed_point: fixed,
        address,
        distance,
        bound,
        holds: distance <= bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::MapForm;
    use crate::pmetric::{Carrier, MetricKey, RealSpace};

    fn halves() -> Ifs {
        let e = MetricKey::Euclid;
        let sp = RealSpace::euclid(Carrier::interval(0.0, 1.0).unwrap()).unwrap();
        Ifs::new(
            sp,
            vec![
                MapForm::affine1d(0.5, 0.0).under(e).with_lip(0.5),
                MapForm::affine1d(0.5, 0.5).under(e).with_lip(0.5),
            ],
        )
        .unwrap()
    }

    fn w(s: &str) -> Word {
        Word::parse(s, 2).unwrap()
    }

    #[test]
    fn basel_series_oracle() {
        // partial sums of 1/k^2 with the integral tail bound 1/n
        let n = 1_000_000usize;
        let partial: f64 = (1..=n).rev().map(|k| 1.0 / (k as f64 * k as f64)).sum();
        assert!((BASEL - partial - 1.0 / n as f64).abs() < 1e-11);
    }

    #[test]
    fn shift_metric_examples() {
        let a = w("1212121");
        for k in [1, 5, 40] {
            let (v, err) = shift_metric(&a, &a, k).unwrap();
            assert_eq!(v, BASEL);
            assert_eq!(err, 0.5 * 3f64.powi(-(k as i32)));
        }
        let (v, _) = shift_metric(&w("111"), &w("211"), 20).unwrap();
        assert!((v - (BASEL + 1.0 / 3.0)).abs() <= 1e-15);
        assert!(shift_metric(&a, &a, 0).is_err());
    }

    #[test]
    fn padding_repeats_last_letter() {
        let s = ShiftSpace::new(2, 10).unwrap();
        assert!(s.same_point(&w("12"), &w("1222222")));
        assert_eq!(s.distance(&w("12"), &w("1222222")), BASEL);
        assert!(!s.same_point(&w("12"), &w("121")));
    }

    #[test]
    fn word_parsing_and_enumeration() {
        assert!(Word::parse("103", 2).is_err());
        assert!(Word::parse("13", 2).is_err());
        assert!(Word::parse("1a", 2).is_err());
        let all: Vec<String> = Word::all_of_length(2, 2).map(|w| w.to_string()).collect();
        assert_eq!(all, ["11", "12", "21", "22"]);
        assert_eq!(Word::repeat(&[1, 2], 3, 2).unwrap().to_string(), "121212");
    }

    #[test]
    fn cylinder_examples() {
        let ifs = halves();
        let unit = CompactSet::interval(0.0, 1.0).unwrap();
        let grid = CompactSet::Finite(unit.rasterize(1.0 / 256.0).unwrap());
        let c1 = cylinder_set(&ifs, &w("1"), &grid).unwrap();
        let expect = CompactSet::Finite(CompactSet::interval(0.0, 0.5).unwrap().rasterize(1.0 / 512.0).unwrap());
        assert_eq!(c1, expect);
        assert_eq!(cylinder_set(&ifs, &Word::root(2), &grid).unwrap(), grid);
        assert_eq!(
            cylinder_set(&ifs, &w("12"), &unit).unwrap(),
            CompactSet::interval(0.25, 0.5).unwrap()
        );
        assert!(matches!(
            cylinder_set(&ifs, &Word::parse("13", 3).unwrap(), &unit),
            Err(Error::LetterOutOfRange { letter: 3, n: 2 })
        ));
    }

    #[test]
    fn addressing_examples() {
        let ifs = halves();
        let unit = CompactSet::interval(0.0, 1.0).unwrap();
        let ones = Word::repeat(&[1], 20, 2).unwrap();
        let (p, err) = address_to_point(&ifs, &ones, &Point::x(0.7), &unit).unwrap();
        assert_eq!(err, 2f64.powi(-20));
        assert!(p.value() <= err);

        let alt = Word::repeat(&[1, 2], 10, 2).unwrap();
        let (p, err) = address_to_point(&ifs, &alt, &Point::x(0.9), &unit).unwrap();
        assert!((p.value() - 1.0 / 3.0).abs() <= err);

        let (p1, _) = address_to_point(&ifs, &ones, &Point::x(0.0), &unit).unwrap();
        let (p2, _) = address_to_point(&ifs, &ones, &Point::x(1.0), &unit).unwrap();
        assert!((p1.value() - p2.value()).abs() <= 2.0 * 2f64.powi(-20));
    }

    #[test]
    fn composed_fixed_point_examples() {
        let ifs = halves();
        let unit = CompactSet::interval(0.0, 1.0).unwrap();
        let c = composed_fixed_point_check(&ifs, &w("1"), &unit, 1e-12).unwrap();
        assert!(c.holds && c.fixed_point.value().abs() <= 1e-12);
        let c = composed_fixed_point_check(&ifs, &w("12"), &unit, 1e-12).unwrap();
        assert!(c.holds && (c.fixed_point.value() - 1.0 / 3.0).abs() <= 1e-11);
        let mut prev = f64::INFINITY;
        for m in 1..=12 {
            let c = composed_fixed_point_check(&ifs, &Word::repeat(&[2], m, 2).unwrap(), &unit, 1e-12).unwrap();
            assert!(c.holds);
            assert!(c.distance <= 2f64.powi(-(m as i32)) + 1e-12);
            assert!(c.distance <= prev);
            prev = c.distance;
        }
    }
}
