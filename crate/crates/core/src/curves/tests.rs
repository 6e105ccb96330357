use super::*;
use crate::finitefield::GaloisField;
use crate::numberfield::make_field;
use num_bigint::BigInt;
use proptest::prelude::*;

fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn curve(a: [i64; 5]) -> Curve {
    Curve::from_ints(a).unwrap()
}

fn rat_value(x: &NFElement) -> BigRational {
    x.as_rational().unwrap().clone()
}

/// Oracle: count affine solutions pair by pair, plus the point at infinity.
fn brute_count(e: &FFCurve) -> u64 {
    let g = e.field();
    let mut n = 1;
    for x in g.elements() {
        for y in g.elements() {
            if e.contains(&Point::Affine(x, y)) {
                n += 1;
            }
        }
    }
    n
}

#[test]
fn invariants_of_examples() {
    let e = curve([1, -1, 0, -2, -1]);
    let inv = e.invariants();
    assert_eq!(rat_value(&inv.b2), q(-3));
    assert_eq!(rat_value(&inv.b4), q(-4));
    assert_eq!(rat_value(&inv.b6), q(-4));
    assert_eq!(rat_value(&inv.b8), q(-1));
    assert_eq!(rat_value(&inv.disc), q(-343));
    assert_eq!(rat_value(&inv.c4), q(105));
    assert_eq!(rat_value(&inv.j), q(-3375));
    assert_eq!(rat_value(&curve([0, 0, 0, 0, 1]).discriminant()), q(-432));
    assert_eq!(curve([0, 0, 0, -1, 0]).special_j(), Some(1728));
    assert_eq!(curve([0, 0, 1, 0, -7]).special_j(), Some(0));
    assert_eq!(Curve::from_ints([0, 0, 0, 0, 0]), Err(Error::SingularModel));
    let e11 = curve([0, -1, 1, -10, -20]);
    assert_eq!(rat_value(&e11.discriminant()), q(-161051));
    assert_eq!(rat_value(&e11.j_invariant()), BigRational::new(BigInt::from(-122023936), BigInt::from(161051)));
}

#[test]
fn group_law_small_examples() {
    let g = GaloisField::new(2, 1).unwrap();
    let e = FFCurve::from_ints(g, [0, 0, 1, 0, 0]).unwrap();
    let p = Point::Affine(g.int(0), g.int(0));
    assert_eq!(e.double(&p), Point::Affine(g.int(0), g.int(1)));
    assert_eq!(e.mul_u64(3, &p), Point::Infinity);
    assert_eq!(e.add(&p, &Point::Infinity), p);
    assert_eq!(e.add(&p, &e.neg(&p)), Point::Infinity);
    assert_eq!(brute_count(&e), 3);
}

fn random_points(e: &FFCurve, seed: u64, n: usize) -> Vec<Point> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let g = e.field();
    let mut out = Vec::new();
    let mut tries = 0;
    while out.len() < n && tries < 10_000 {
        tries += 1;
        let x = g.from_index(rng.gen_range(0..g.order()));
        if let Some(p) = e.lift_x(x) {
            out.push(p);
        }
    }
    out
}

#[test]
fn group_law_is_associative_and_counts_annihilate() {
    for (p, f) in [(2u64, 1u32), (2, 2), (3, 1), (3, 2), (5, 1), (1009, 1), (7, 2)] {
        let g = GaloisField::new(p, f).unwrap();
        let mut made = 0;
        for seed in 0..40u64 {
            let a = [seed as i64 % 3, (seed as i64 * 7) % 5, 1, seed as i64 + 2, (seed as i64 * 13) % 11 + 1];
            let Ok(e) = FFCurve::from_ints(g, a) else { continue };
            made += 1;
            let pts = random_points(&e, seed, 6);
            for w in pts.windows(3) {
                let (x, y, z) = (&w[0], &w[1], &w[2]);
                assert!(e.contains(x));
                let l = e.add(&e.add(x, y), z);
                let r = e.add(x, &e.add(y, z));
                assert_eq!(l, r, "{e}");
            }
            if g.order() < 5000 {
                let n = brute_count(&e);
                for pt in &pts {
                    assert_eq!(e.mul_u64(n, pt), Point::Infinity);
                }
            }
        }
        assert!(made > 10);
    }
}

#[test]
fn finite_twists_sum_to_2q_plus_2() {
    for (p, f) in [(2u64, 1u32), (2, 2), (3, 1), (3, 2), (5, 1), (13, 1), (5, 2)] {
        let g = GaloisField::new(p, f).unwrap();
        for seed in 0..15i64 {
            let Ok(e) = FFCurve::from_ints(g, [seed % 2, seed % 3, 1, seed, 3 * seed + 1]) else { continue };
            let t = e.quadratic_twist();
            assert_eq!(brute_count(&e) + brute_count(&t), 2 * g.order() + 2, "{e}");
        }
    }
}

#[test]
fn reductions() {
    let e = curve([0, -1, 1, -10, -20]);
    let p3 = &NumberField::rationals().decompose_prime(3)[0];
    assert_eq!(brute_count(&e.reduce_at(p3).unwrap()), 5);
    let p2 = &NumberField::rationals().decompose_prime(2)[0];
    assert_eq!(brute_count(&e.reduce_at(p2).unwrap()), 5);
    let f = curve([1, -1, 0, -2, -1]);
    let p7 = &NumberField::rationals().decompose_prime(7)[0];
    assert_eq!(f.reduce_at(p7), Err(Error::BadReduction(7)));
    assert!(f.good_reduction_at(p3).unwrap());
    assert!(!f.good_reduction_at(p7).unwrap());
    // over Q(sqrt -7), 11 splits and the rational coefficients reduce mod 11
    let k = make_field(&[-7]).unwrap();
    let fk = f.base_change(&k).unwrap();
    for pr in k.decompose_prime(11) {
        let red = fk.reduce_at(&pr).unwrap();
        assert_eq!(red.ainvs(), FFCurve::from_ints(pr.residue_field(), [1, -1, 0, -2, -1]).unwrap().ainvs());
    }
}

#[test]
fn reduction_commutes_with_j() {
    let k = make_field(&[28, -4]).unwrap();
    let e = curve([0, -1, 1, -10, -20]).base_change(&k).unwrap();
    let d = &k.int(3) + &k.basis(1);
    let t = e.quadratic_twist(&d).unwrap();
    for p in [3u64, 5, 13, 17, 29, 37] {
        for pr in k.decompose_prime(p) {
            let Ok(red) = t.reduce_at(&pr) else { continue };
            let j = crate::numberfield::local::reduce_element(&k, &pr, &t.j_invariant());
            if let Ok(j) = j {
                assert_eq!(red.j_invariant(), j, "at {pr}");
            }
        }
    }
}

#[test]
fn twist_scales_invariants() {
    let k = make_field(&[28]).unwrap();
    let e = curve([1, -1, 0, -2, -1]).base_change(&k).unwrap();
    let d = k.basis(1);
    let t = e.quadratic_twist(&d).unwrap();
    let (i, j) = (e.invariants(), t.invariants());
    assert_eq!(j.c4, &i.c4 * &d.pow(2));
    assert_eq!(j.c6, &i.c6 * &d.pow(3));
    assert_eq!(j.disc, &i.disc * &d.pow(6));
    assert_eq!(j.j, i.j);
    assert_eq!(e.quadratic_twist(&k.one()).unwrap().j_invariant(), e.j_invariant());
}

#[test]
fn twist_by_sqrt7_repairs_the_prime_above_7() {
    let k = make_field(&[28]).unwrap();
    let e = curve([1, -1, 0, -2, -1]).base_change(&k).unwrap();
    let p7 = &k.decompose_prime(7)[0];
    assert!(!e.good_reduction_at(p7).unwrap());
    let t = e.quadratic_twist(&k.basis(1)).unwrap();
    let v = |x: &NFElement| crate::numberfield::local::valuation_at(&k, p7, x).unwrap().unwrap();
    let inv = t.invariants();
    assert_eq!((v(&inv.disc), v(&inv.c4), v(&inv.c6)), (12, 4, 7));
    assert!(t.good_reduction_at(p7).unwrap());
}

#[test]
fn minimal_models_over_q() {
    let e = curve([0, 0, 0, 0, 64]).minimal_model_q().unwrap();
    assert_eq!(e, curve([0, 0, 0, 0, 1]));
    assert_eq!(rat_value(&e.discriminant()), q(-432));
    for a in [[0, -1, 1, -10, -20], [1, -1, 0, -2, -1], [1, 1, 1, -10, -10], [0, 0, 1, -1, 0], [1, 0, 1, 4, -6]] {
        let e = curve(a);
        assert_eq!(e.minimal_model_q().unwrap(), e);
        // a scaled, shifted model recovers the same reduced minimal model
        let qf = NumberField::rationals();
        let moved = e
            .change_coords(&qf.rational(BigRational::new(1.into(), 6.into())), &qf.int(5), &qf.int(-1), &qf.int(7))
            .unwrap();
        assert_ne!(moved, e);
        assert_eq!(moved.minimal_model_q().unwrap(), e, "{e}");
    }
    let r = curve([0, 0, 0, 0, 1])
        .change_coords(&NumberField::rationals().rational(BigRational::new(1.into(), 2.into())), &q0(), &q0(), &q0())
        .unwrap();
    assert_eq!(r.minimal_model_q().unwrap(), curve([0, 0, 0, 0, 1]));
}

fn q0() -> NFElement {
    NumberField::rationals().zero()
}

#[test]
fn bad_prime_sets() {
    let ps = |e: &Curve| e.bad_primes().unwrap().iter().map(|p| p.p).collect::<Vec<_>>();
    assert_eq!(ps(&curve([0, -1, 1, -10, -20])), vec![11]);
    assert_eq!(ps(&curve([1, 1, 1, -10, -10])), vec![3, 5]);
    assert_eq!(ps(&curve([0, 0, 0, 0, 64])), vec![2, 3]);
    let k = make_field(&[-7]).unwrap();
    let e = curve([1, -1, 0, -2, -1]).base_change(&k).unwrap();
    assert_eq!(ps(&e), vec![7]);
}

#[test]
fn j_integrality() {
    assert_eq!(curve([0, -1, 1, -10, -20]).j_nonintegral_prime().unwrap().map(|p| p.p), Some(11));
    assert_eq!(curve([0, 0, 0, 1, 1]).j_nonintegral_prime().unwrap().map(|p| p.p), Some(31));
    assert!(curve([1, -1, 0, -2, -1]).j_is_integral().unwrap());
    assert!(curve([0, 0, 1, 0, -7]).j_is_integral().unwrap());
}

#[test]
fn good_reduction_is_model_independent() {
    let k = make_field(&[28, -4]).unwrap();
    let base = curve([0, -1, 1, -10, -20]).base_change(&k).unwrap();
    let twisted =
        curve([1, -1, 0, -2, -1]).base_change(&k).unwrap().quadratic_twist(&k.sqrt_of_int(-7).unwrap()).unwrap();
    let u = &k.int(1) + &k.basis(2);
    for e in [base, twisted] {
        let moved =
            e.change_coords(&u, &k.basis(1), &k.rational(BigRational::new(1.into(), 2.into())), &k.int(3)).unwrap();
        for p in [2u64, 3, 5, 7, 11] {
            for pr in k.decompose_prime(p) {
                assert_eq!(e.good_reduction_at(&pr).unwrap(), moved.good_reduction_at(&pr).unwrap(), "{e} at {pr}");
            }
        }
    }
}

#[test]
fn twist_by_sqrt_minus7_has_good_reduction_everywhere() {
    let k = make_field(&[28, -4]).unwrap();
    let e = curve([1, -1, 0, -2, -1]).base_change(&k).unwrap();
    let t = e.quadratic_twist(&k.sqrt_of_int(-7).unwrap()).unwrap();
    assert!(t.bad_primes().unwrap().is_empty());
    let at2: Vec<bool> = k
        .decompose_prime(2)
        .iter()
        .map(|p| e.quadratic_twist(&k.basis(1)).unwrap().good_reduction_at(p).unwrap())
        .collect();
    assert_eq!(at2, vec![false, false]);
}

#[test]
fn curve_json() {
    let e = Curve::from_json(r#"{"field":{"generators":[-7]},"ainvs":[1,-1,0,"-2",[[-1,1],[0,1]]]}"#).unwrap();
    assert_eq!(e, curve([1, -1, 0, -2, -1]).base_change(&make_field(&[-7]).unwrap()).unwrap());
    let round = Curve::from_json(&serde_json::to_string(&e.to_spec()).unwrap()).unwrap();
    assert_eq!(round, e);
    assert!(matches!(Curve::from_json(r#"{"ainvs":[1,2]}"#), Err(Error::Malformed(_))));
    assert!(matches!(Curve::from_json("not json"), Err(Error::Malformed(_))));
    assert_eq!(Curve::from_json(r#"{"ainvs":[0,0,0,0,0]}"#), Err(Error::SingularModel));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]
    #[test]
    fn discriminant_identity(a in prop::array::uniform5(-1000i64..1000)) {
        let qf = NumberField::rationals();
        let coeffs = a.map(|x| qf.int(x));
        let (c4, c6, d) = c_invariants(&qf, &coeffs);
        let [b2, b4, b6, b8] = b_invariants(&qf, &coeffs);
        prop_assert_eq!(d.scale_int(1728), &(&(&c4 * &c4) * &c4) - &(&c6 * &c6));
        prop_assert_eq!(b8.scale_int(4), &(&b2 * &b6) - &(&b4 * &b4));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]
    #[test]
    fn minimal_models_are_minimal(a in prop::array::uniform5(-60i64..60), u in 1i64..5, r in -3i64..3) {
        let Ok(e) = Curve::from_ints(a) else { return Ok(()) };
        let qf = NumberField::rationals();
        let moved = e.change_coords(&qf.rational(BigRational::new(1.into(), u.into())), &qf.int(r), &qf.int(1), &qf.int(-r)).unwrap();
        let m = moved.minimal_model_q().unwrap();
        prop_assert_eq!(&m, &e.minimal_model_q().unwrap());
        let inv = m.invariants();
        let d = inv.disc.as_rational().unwrap().to_integer();
        let c4 = inv.c4.as_rational().unwrap().to_integer();
        for (p, _) in factor_big(&d).unwrap() {
            let vc4 = if c4.is_zero() { u32::MAX } else { valuation_big(&c4, p) };
            prop_assert!(valuation_big(&d, p) < 12 || vc4 < 4);
        }
        prop_assert!(inv.disc.as_rational().unwrap().abs() <= e.discriminant().as_rational().unwrap().abs());
    }
}
