use dyadic_core::chains::rng_from_seed;
use dyadic_core::combinatorics::CountTable;
use dyadic_core::coupling::*;
use dyadic_core::enumeration::enumerate_ladder;
use dyadic_core::tiling::fixtures;
use dyadic_core::{Side, Tiling};
use num_bigint::BigInt;
use num_rational::BigRational;

#[test]
fn distance_is_zero_exactly_on_the_diagonal_and_symmetric() {
    let ladder = enumerate_ladder(3).unwrap();
    let params = DistanceParams::default();
    for k in 2..=3usize {
        let ts = ladder[k].tilings();
        for x in ts {
            for y in ts {
                let p = CoupledPair::new(x.clone(), y.clone()).unwrap();
                assert_eq!(p.distance(&params) == 0, x == y);
                assert_eq!(p.distance(&params), p.swapped().distance(&params));
            }
        }
    }
}

#[test]
fn figure_pair() {
    let pair = CoupledPair::new(fixtures::vertical_no_left(), fixtures::both_bisectors()).unwrap();
    assert_eq!((pair.l1(), pair.l2()), (1, 3));
    assert_eq!(pair.distance(&DistanceParams::new(10).unwrap()), 13);
}

#[test]
fn classification_examples() {
    let t = |s: &str| Tiling::decode(s).unwrap();
    let v_only = Tiling::vertical_strips(3);
    let h_only = Tiling::horizontal_strips(3);
    let pair = CoupledPair::new(v_only.clone(), h_only).unwrap();
    assert_eq!(classify_case(&pair).unwrap(), CaseLabel::OneA);
    assert_eq!(pair.distance(&DistanceParams::default()), 4 * 64 + 4);

    let other_v = t("V(V(.,.),H(.,.))");
    let both_v = CoupledPair::new(Tiling::vertical_strips(2), other_v).unwrap();
    assert!(matches!(classify_case(&both_v).unwrap(), CaseLabel::Two { .. }));

    let x = Tiling::vertical_strips(2);
    let y = t("V(H(.,.),H(.,.))");
    assert_eq!(classify_case(&CoupledPair::new(x, y).unwrap()).unwrap(), CaseLabel::ThreeA);
}

#[test]
fn coupled_moves_share_rho() {
    let ladder = enumerate_ladder(3).unwrap();
    let x = Tiling::vertical_strips(3);
    let left = Tiling::horizontal_strips(2);
    let y = Tiling::join(&left, &Tiling::vertical_strips(2), dyadic_core::Axis::Vertical).unwrap();
    let pair = CoupledPair::new(x.clone(), y).unwrap();
    for rho in ladder[2].tilings() {
        let next = pair.apply(Side::Left, rho);
        assert!(next.quadrant_equal(dyadic_core::Quadrant::TopLeft));
        assert!(next.quadrant_equal(dyadic_core::Quadrant::BottomLeft));
    }
    let same = CoupledPair::new(x.clone(), x).unwrap();
    let mut rng = rng_from_seed(9);
    for _ in 0..50 {
        let n = same.coupled_step(&ladder[2], &mut rng);
        assert_eq!(n.x(), n.y());
    }
}

#[test]
fn survey_k3_is_exhaustive_and_bounds_hold() {
    let ladder = enumerate_ladder(3).unwrap();
    let params = DistanceParams::default();
    let r = contraction_survey(&ladder[3], &ladder[2], &params, 0, None, &mut rng_from_seed(0)).unwrap();
    assert!(r.exhaustive);
    assert_eq!(r.pairs, 82 * 81 / 2);
    assert!(r.bounds_hold);
    let f = CountTable::up_to(3).unwrap().half_bisector_fraction(3);
    let b = BigRational::from_integer(BigInt::from(64));
    let one_a = r.cases.iter().find(|c| c.label == CaseLabel::OneA).unwrap();
    let want = BigRational::from_integer(1.into()) - &f * &b / (BigRational::from_integer(4.into()) * &b + BigRational::from_integer(4.into()));
    assert_eq!(one_a.max_ratio, want);
    for c in &r.cases {
        if c.label == CaseLabel::ThreeC {
            assert!(c.max_ratio <= BigRational::new(1.into(), 2.into()));
        }
        if matches!(c.label, CaseLabel::Two { .. }) {
            assert!(c.max_ratio <= BigRational::new(3.into(), 4.into()));
        }
    }
    let labels: Vec<String> = r.cases.iter().map(|c| c.label.to_string()).collect();
    assert!(labels.iter().any(|l| l.starts_with("2[neither]")), "{labels:?}");
}

#[test]
fn equal_pairs_stay_at_distance_zero() {
    let ladder = enumerate_ladder(2).unwrap();
    let x = ladder[2].tiling(3).clone();
    let pair = CoupledPair::new(x.clone(), x).unwrap();
    let e = expected_distance_after_step(&pair, &ladder[1], &DistanceParams::default()).unwrap();
    assert_eq!(e, BigRational::from_integer(0.into()));
}
