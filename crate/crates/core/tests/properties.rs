use proptest::prelude::*;

use pifs::collage::collage_bound_check;
use pifs::conspace::{con_distance, fixed_point_map, ConElement, ConSpace};
use pifs::hyperspace::{diameter, directed_distance, hausdorff_partial, point_to_set, union, CompactSet};
use pifs::ifs::{fixed_point, Ifs};
use pifs::maps::{compose, compose_word, lipschitz_estimate, LipMap, MapForm};
use pifs::pmetric::{
    continuity_holds, verify_axioms_on_triples, Carrier, MetricKey, PartialMetric, Point, RealSpace, Rule,
};
use pifs::shiftspace::{address_to_point, cylinder_set, ShiftSpace, Word};

const TOL: f64 = 1e-12;

fn unit() -> Carrier {
    Carrier::interval(0.0, 1.0).unwrap()
}

fn square() -> Carrier {
    Carrier::rect(0.0, 0.0, 1.0, 1.0).unwrap()
}

fn rule() -> impl Strategy<Value = Rule> {
    prop_oneof![Just(Rule::Max), Just(Rule::Euclid), (0.0..2.0f64).prop_map(Rule::Shifted)]
}

/// A bundled instance on the unit interval or the unit square.
fn space() -> impl Strategy<Value = RealSpace> {
    (rule(), any::<bool>()).prop_map(|(r, two)| RealSpace::new(r, if two { square() } else { unit() }).unwrap())
}

fn point(dim: usize) -> BoxedStrategy<Point> {
    if dim == 1 {
        (0.0..=1.0f64).prop_map(Point::x).boxed()
    } else {
        (0.0..=1.0f64, 0.0..=1.0f64).prop_map(|(x, y)| Point::xy(x, y)).boxed()
    }
}

fn set(dim: usize, max_len: usize) -> impl Strategy<Value = CompactSet> {
    prop::collection::vec(point(dim), 1..=max_len).prop_map(|v| CompactSet::points(v).unwrap())
}

fn space_and_points(n: usize) -> impl Strategy<Value = (RealSpace, Vec<Point>)> {
    space().prop_flat_map(move |s| {
        let d = s.dim();
        (Just(s), prop::collection::vec(point(d), n))
    })
}

fn space_and_sets(n: usize, max_len: usize) -> impl Strategy<Value = (RealSpace, Vec<CompactSet>)> {
    space().prop_flat_map(move |s| {
        let d = s.dim();
        (Just(s), prop::collection::vec(set(d, max_len), n))
    })
}

fn brute_directed(space: &RealSpace, a: &CompactSet, b: &CompactSet) -> f64 {
    let (a, b) = (a.members(1.0).unwrap(), b.members(1.0).unwrap());
    a.iter()
        .map(|x| b.iter().map(|y| space.rule_distance(x, y)).fold(f64::INFINITY, f64::min))
        .fold(f64::NEG_INFINITY, f64::max)
}

fn brute_diameter(space: &RealSpace, a: &CompactSet) -> f64 {
    let a = a.members(1.0).unwrap();
    a.iter()
        .flat_map(|x| a.iter().map(move |y| (x, y)))
        .map(|(x, y)| space.rule_distance(x, y))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `affine1d a b` with `a in [-0.9, 0.9]`, shifted so that `[0, 1]` maps
/// into itself; declared constant `|a|`.
fn unit_contraction(key: MetricKey) -> impl Strategy<Value = LipMap> {
    (-0.9..0.9f64, 0.0..=1.0f64).prop_map(move |(a, t)| {
        let (lo, hi) = if a < 0.0 { (-a, 1.0) } else { (0.0, 1.0 - a) };
        let b = lo + t * (hi - lo);
        MapForm::affine1d(a, b).under(key).with_lip(a.abs())
    })
}

/// `a x` with `a in [0, 0.9]`: the contractions under the max rule fix 0.
fn max_contraction() -> impl Strategy<Value = LipMap> {
    (0.0..0.9f64).prop_map(|a| MapForm::affine1d(a, 0.0).under(MetricKey::Max).with_lip(a))
}

fn square_contraction() -> impl Strategy<Value = LipMap> {
    (0.05..0.5f64, 0.0..=1.0f64, 0.0..=1.0f64).prop_map(|(s, u, v)| {
        MapForm::affine2d([[s, 0.0], [0.0, s]], [u * (1.0 - s), v * (1.0 - s)])
            .under(MetricKey::Euclid)
            .with_lip(s)
    })
}

/// A contraction family and the space it acts on.
fn family() -> impl Strategy<Value = (RealSpace, Vec<LipMap>)> {
    prop_oneof![
        prop::collection::vec(unit_contraction(MetricKey::Euclid), 1..=3)
            .prop_map(|m| (RealSpace::euclid(unit()).unwrap(), m)),
        prop::collection::vec(max_contraction(), 1..=3).prop_map(|m| (RealSpace::max(unit()).unwrap(), m)),
        prop::collection::vec(square_contraction(), 1..=3)
            .prop_map(|m| (RealSpace::euclid(square()).unwrap(), m)),
    ]
}

fn ifs_and_sets(n: usize, max_len: usize) -> impl Strategy<Value = (Ifs, Vec<CompactSet>)> {
    family().prop_flat_map(move |(space, maps)| {
        let d = space.dim();
        let ifs = Ifs::new(space, maps).unwrap();
        (Just(ifs), prop::collection::vec(set(d, max_len), n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn pair_axioms((s, v) in space_and_points(2)) {
        let (x, y) = (&v[0], &v[1]);
        let dxx = s.rule_distance(x, x);
        prop_assert!(dxx >= 0.0);
        prop_assert!(dxx <= s.rule_distance(x, y) + TOL);
        prop_assert_eq!(s.rule_distance(x, y), s.rule_distance(y, x));
    }

    #[test]
    fn triangle_axiom((s, v) in space_and_points(3)) {
        let (x, y, z) = (&v[0], &v[1], &v[2]);
        let p = |a: &Point, b: &Point| s.rule_distance(a, b);
        prop_assert!(p(x, z) <= p(x, y) + p(y, z) - p(y, y) + TOL);
        let report = verify_axioms_on_triples(&s, &[(*x, *y, *z)], TOL).unwrap();
        prop_assert!(report.all_passed());
    }

    #[test]
    fn metric_continuity((s, v) in space_and_points(3)) {
        prop_assert!(continuity_holds(&s, &v[0], &v[1], &v[2], TOL));
    }

    #[test]
    fn euclid_has_zero_self_distance(x in point(2)) {
        let s = RealSpace::euclid(square()).unwrap();
        prop_assert_eq!(s.self_distance(&x).unwrap(), 0.0);
    }

    #[test]
    fn hausdorff_symmetry((s, v) in space_and_sets(2, 12)) {
        prop_assert_eq!(
            hausdorff_partial(&s, &v[0], &v[1]).unwrap(),
            hausdorff_partial(&s, &v[1], &v[0]).unwrap()
        );
    }

    #[test]
    fn hausdorff_union_bound((s, v) in space_and_sets(4, 10)) {
        let ab = union(&v[0], &v[1], 1.0).unwrap();
        let cd = union(&v[2], &v[3], 1.0).unwrap();
        let lhs = hausdorff_partial(&s, &ab, &cd).unwrap();
        let rhs = hausdorff_partial(&s, &v[0], &v[2]).unwrap().max(hausdorff_partial(&s, &v[1], &v[3]).unwrap());
        prop_assert!(lhs <= rhs + TOL, "{} > {}", lhs, rhs);
    }

    #[test]
    fn hausdorff_self_distance_is_smallest((s, v) in space_and_sets(2, 12)) {
        prop_assert!(hausdorff_partial(&s, &v[0], &v[0]).unwrap() <= hausdorff_partial(&s, &v[0], &v[1]).unwrap() + TOL);
    }

    #[test]
    fn distances_match_brute_force((s, v) in space_and_sets(2, 40)) {
        prop_assert_eq!(directed_distance(&s, &v[0], &v[1]).unwrap(), brute_directed(&s, &v[0], &v[1]));
        prop_assert_eq!(diameter(&s, &v[0]).unwrap(), brute_diameter(&s, &v[0]));
    }

    #[test]
    fn interval_backend_matches_grid(
        r in rule(),
        (a1, l1, a2, l2) in (0.0..0.5f64, 0.0..0.5f64, 0.0..0.5f64, 0.0..0.5f64),
        x in 0.0..=1.0f64,
    ) {
        let s = RealSpace::new(r, unit()).unwrap();
        let snap = 1.0 / 1024.0;
        let i1 = CompactSet::interval(a1, a1 + l1).unwrap();
        let i2 = CompactSet::interval(a2, a2 + l2).unwrap();
        let g1 = CompactSet::Finite(i1.rasterize(snap).unwrap());
        let g2 = CompactSet::Finite(i2.rasterize(snap).unwrap());
        let exact = hausdorff_partial(&s, &i1, &i2).unwrap();
        prop_assert!((exact - hausdorff_partial(&s, &g1, &g2).unwrap()).abs() <= snap);
        prop_assert!((directed_distance(&s, &i1, &g2).unwrap() - directed_distance(&s, &g1, &g2).unwrap()).abs() <= snap);
        prop_assert!((point_to_set(&s, &Point::x(x), &i1).unwrap() - point_to_set(&s, &Point::x(x), &g1).unwrap()).abs() <= snap);
        prop_assert!((diameter(&s, &i1).unwrap() - diameter(&s, &g1).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn composition_is_submultiplicative(
        (f, g) in (unit_contraction(MetricKey::Euclid), unit_contraction(MetricKey::Euclid)),
        (fm, gm) in (max_contraction(), max_contraction()),
    ) {
        let s = RealSpace::euclid(unit()).unwrap();
        let fg = compose(&f, &g).unwrap();
        let bound = f.declared_lip().unwrap() * g.declared_lip().unwrap();
        prop_assert!(lipschitz_estimate(&fg, &s, 257).unwrap() <= bound + 1e-9);
        let m = RealSpace::max(unit()).unwrap();
        let fg = compose(&fm, &gm).unwrap();
        let bound = fm.declared_lip().unwrap() * gm.declared_lip().unwrap();
        prop_assert!(lipschitz_estimate(&fg, &m, 257).unwrap() <= bound + 1e-9);
    }

    #[test]
    fn contractions_closed_under_composition(
        maps in prop::collection::vec(unit_contraction(MetricKey::Euclid), 1..=4),
        letters in prop::collection::vec(0usize..4, 1..=8),
    ) {
        let n = maps.len();
        let w = Word::new(letters.iter().map(|l| l % n + 1).collect(), n).unwrap();
        let f = compose_word(&maps, &w).unwrap();
        let product: f64 = w.letters().iter().map(|&l| maps[l - 1].declared_lip().unwrap()).product();
        prop_assert!(f.declared_lip().unwrap() < 1.0);
        prop_assert!((f.declared_lip().unwrap() - product).abs() <= 1e-15);
    }

    #[test]
    fn composition_is_associative(
        (f, g, h) in (square_contraction(), square_contraction(), square_contraction()),
        x in point(2),
    ) {
        let left = compose(&compose(&f, &g).unwrap(), &h).unwrap();
        let right = compose(&f, &compose(&g, &h).unwrap()).unwrap();
        prop_assert_eq!(left.eval(&x), right.eval(&x));
        prop_assert_eq!(left.eval(&x), f.eval(&g.eval(&h.eval(&x))));
    }

    #[test]
    fn image_diameter_shrinks((ifs, v) in ifs_and_sets(1, 20)) {
        let s = ifs.space();
        for f in ifs.maps() {
            let image = CompactSet::points(v[0].members(1.0).unwrap().iter().map(|x| f.eval(x)).collect()).unwrap();
            prop_assert!(diameter(s, &image).unwrap() <= f.declared_lip().unwrap() * diameter(s, &v[0]).unwrap() + 1e-9);
        }
    }

    #[test]
    fn hutchinson_contracts((ifs, v) in ifs_and_sets(2, 16)) {
        let s = ifs.space();
        let w1 = ifs.hutchinson_exact(&v[0]).unwrap();
        let w2 = ifs.hutchinson_exact(&v[1]).unwrap();
        let lhs = hausdorff_partial(s, &w1, &w2).unwrap();
        prop_assert!(lhs <= ifs.factor() * hausdorff_partial(s, &v[0], &v[1]).unwrap() + 1e-9);
    }

    #[test]
    fn hutchinson_gaps_decay((ifs, v) in ifs_and_sets(1, 4)) {
        let s = ifs.space();
        let mut b = v[0].clone();
        let mut next = ifs.hutchinson_exact(&b).unwrap();
        let first = hausdorff_partial(s, &b, &next).unwrap();
        for n in 1..6 {
            b = next;
            next = ifs.hutchinson_exact(&b).unwrap();
            let gap = hausdorff_partial(s, &b, &next).unwrap();
            prop_assert!(gap <= ifs.factor().powi(n) * first + 1e-9, "n = {}: {} > {}", n, gap, first);
        }
    }

    #[test]
    fn fixed_points_have_vanishing_self_distance((space, maps) in family(), x0 in point(2)) {
        let x0 = if space.dim() == 1 { Point::x(x0.coords()[0]) } else { x0 };
        for f in &maps {
            let (x, d) = fixed_point(f, &space, &x0, 1e-12, 10_000).unwrap();
            prop_assert!(space.self_distance(&x).unwrap() <= 1e-12);
            prop_assert!(d.residual <= 1e-9);
        }
    }

    #[test]
    fn cylinders_nest_and_shrink(
        letters in prop::collection::vec(1usize..=3, 0..=7),
        last in 1usize..=3,
        scales in prop::array::uniform3(0.1..0.45f64),
    ) {
        let e = MetricKey::Euclid;
        let maps = vec![
            MapForm::affine1d(scales[0], 0.0).under(e).with_lip(scales[0]),
            MapForm::affine1d(scales[1], 0.5 - scales[1] / 2.0).under(e).with_lip(scales[1]),
            MapForm::affine1d(scales[2], 1.0 - scales[2]).under(e).with_lip(scales[2]),
        ];
        let ifs = Ifs::new(RealSpace::euclid(unit()).unwrap(), maps).unwrap();
        let a = ifs.attractor(&CompactSet::values(&[0.0]).unwrap(), 1e-9, 200).unwrap().0;
        let w = Word::new(letters, 3).unwrap();
        let outer = cylinder_set(&ifs, &w, &a).unwrap();
        let inner = cylinder_set(&ifs, &w.extended(last).unwrap(), &a).unwrap();
        prop_assert!(pifs::hyperspace::nested_within(ifs.space(), &inner, &outer, ifs.snap()).unwrap());
        let c = ifs.factor().powi(w.len() as i32);
        prop_assert!(diameter(ifs.space(), &outer).unwrap() <= c * diameter(ifs.space(), &a).unwrap() + 1e-9);
    }

    #[test]
    fn addresses_do_not_depend_on_the_seed(
        letters in prop::collection::vec(1usize..=2, 1..=12),
        (s1, s2) in (0.0..=1.0f64, 0.0..=1.0f64),
    ) {
        let e = MetricKey::Euclid;
        let ifs = Ifs::new(
            RealSpace::euclid(unit()).unwrap(),
            vec![
                MapForm::affine1d(0.5, 0.0).under(e).with_lip(0.5),
                MapForm::affine1d(0.5, 0.5).under(e).with_lip(0.5),
            ],
        )
        .unwrap();
        let a = CompactSet::interval(0.0, 1.0).unwrap();
        let w = Word::new(letters, 2).unwrap();
        let (p1, bound) = address_to_point(&ifs, &w, &Point::x(s1), &a).unwrap();
        let (p2, _) = address_to_point(&ifs, &w, &Point::x(s2), &a).unwrap();
        prop_assert!(ifs.space().rule_distance(&p1, &p2) <= 2.0 * bound + 1e-15);
    }

    #[test]
    fn shift_metric_axioms(
        words in prop::collection::vec(prop::collection::vec(1usize..=3, 1..=12), 3),
    ) {
        let s = ShiftSpace::new(3, 40).unwrap();
        let w: Vec<Word> = words.into_iter().map(|l| Word::new(l, 3).unwrap()).collect();
        let report = verify_axioms_on_triples(&s, &[(w[0].clone(), w[1].clone(), w[2].clone())], TOL).unwrap();
        prop_assert!(report.all_passed(), "{:?}", report.violations().next());
    }

    #[test]
    fn con_metric_axioms(
        max_rule in any::<bool>(),
        coeffs in prop::collection::vec((0.0..0.5f64, 0.0..1.0f64), 3),
    ) {
        let (s, key) = if max_rule {
            (RealSpace::max(unit()).unwrap(), MetricKey::Max)
        } else {
            (RealSpace::euclid(unit()).unwrap(), MetricKey::Euclid)
        };
        let el: Vec<ConElement> = coeffs
            .iter()
            .map(|&(a, b)| {
                let b = if max_rule { 0.0 } else { b };
                ConElement::new(MapForm::affine1d(a, b).under(key).with_lip(a), 0.5, s.clone()).unwrap()
            })
            .collect();
        let space = ConSpace { grid: 65 };
        let report = verify_axioms_on_triples(&space, &[(el[0].clone(), el[1].clone(), el[2].clone())], TOL).unwrap();
        prop_assert!(report.all_passed(), "{:?}", report.violations().next().map(|v| (v.axiom, v.lhs, v.rhs)));
        let d = space.distance(&el[0], &el[1]);
        prop_assert!((0.0..=1.0).contains(&d));
    }

    #[test]
    fn fixed_points_move_continuously(coeffs in prop::collection::vec((-0.5..0.5f64, 0.0..1.0f64), 2)) {
        let s = RealSpace::euclid(unit()).unwrap();
        let el: Vec<ConElement> = coeffs
            .iter()
            .map(|&(a, t)| {
                let (lo, hi) = if a < 0.0 { (-a, 1.0) } else { (0.0, 1.0 - a) };
                ConElement::affine(a, lo + t * (hi - lo), 0.5, s.clone()).unwrap()
            })
            .collect();
        let (x, y) = (fixed_point_map(&el[0]).unwrap(), fixed_point_map(&el[1]).unwrap());
        for (f, p) in [(&el[0], &x), (&el[1], &y)] {
            prop_assert!(s.rule_distance(p, &f.map().eval(p)) <= 1e-12);
        }
        let d = con_distance(&el[0], &el[1], 65).unwrap();
        let lhs = s.rule_distance(&x, &y) - s.rule_distance(&x, &x).min(s.rule_distance(&y, &y));
        prop_assert!(lhs <= d.raw_sup / 0.5 + 1e-9);
        if d.raw_sup < 1.0 {
            prop_assert!(lhs <= d.value / 0.5 + 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn attractors_are_self_consistent_and_seed_independent((ifs, v) in ifs_and_sets(2, 8)) {
        let s = ifs.space();
        let tol = ifs.default_tol();
        let (a1, d1) = ifs.attractor(&v[0], tol, 200).unwrap();
        let (a2, _) = ifs.attractor(&v[1], tol, 200).unwrap();
        let self_a1 = hausdorff_partial(s, &a1, &a1).unwrap();
        prop_assert!(d1.invariance_gap - self_a1 <= 2.0 * tol);
        // quantized attractors sit within snap * sqrt(d) / (2 (1 - s)) of the true one
        let resolution = ifs.snap() * (s.dim() as f64).sqrt() / (1.0 - ifs.factor());
        let gap = hausdorff_partial(s, &a1, &a2).unwrap() - self_a1.min(hausdorff_partial(s, &a2, &a2).unwrap());
        prop_assert!(gap <= 3.0 * tol + resolution, "{} > {}", gap, 3.0 * tol + resolution);
    }

    #[test]
    fn collage_bound_holds((ifs, v) in ifs_and_sets(1, 16)) {
        let r = collage_bound_check(&ifs, &v[0], ifs.default_tol(), 200).unwrap();
        prop_assert!(r.holds, "{}", r.verdict());
    }
}
