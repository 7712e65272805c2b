use ergolab::rat::{self, Q};
use ergolab::space::*;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn sp(s: &str) -> ShiftPoint {
    ShiftPoint::parse(s, 2).unwrap()
}

fn shift(s: &str) -> Point {
    Point::Shift(sp(s))
}

fn circ(s: &str) -> Point {
    Point::Circle(CirclePoint::parse(s).unwrap())
}

#[test]
fn shift_apply_examples() {
    assert_eq!(shift_apply(0, &sp("|01")), sp("|01"));
    assert_eq!(shift_apply(1, &sp("|01")), sp("|10"));
    assert_eq!(shift_apply(3, &sp("0|1")), sp("|1"));
}

#[test]
fn canonical_form_is_unique() {
    assert_eq!(sp("0101|01"), sp("|01"));
    assert_eq!(sp("1|0101"), sp("|10"));
    assert_eq!(sp("0|00"), ShiftPoint::fixed(0));
    assert_eq!(sp("0|1").to_string(), "0|1");
}

#[test]
fn rho_examples() {
    assert_eq!(rho(&shift("|0"), &shift("|0")).unwrap(), Q::zero());
    assert_eq!(rho(&shift("|0"), &shift("1|0")).unwrap(), rat::q(1, 2));
    assert_eq!(rho(&circ("1/8"), &circ("7/8")).unwrap(), rat::q(1, 4));
    assert!(rho(&shift("|0"), &circ("0")).is_err());
}

#[test]
fn ball_as_cylinder_examples() {
    assert_eq!(ball_as_cylinder(&sp("0|1"), &rat::q(1, 8)).unwrap(), vec![0, 1, 1]);
    assert_eq!(ball_as_cylinder(&sp("0|1"), &rat::q(3, 4)).unwrap(), Vec::<u8>::new());
    assert_eq!(ball_as_cylinder(&sp("0|1"), &Q::one()).unwrap(), Vec::<u8>::new());
    assert!(ball_as_cylinder(&sp("0|1"), &Q::zero()).is_err());
}

// membership by the metric, over every eventually-constant point with a depth-6 prefix
#[test]
fn cylinder_matches_metric_ball() {
    let x = sp("0|1");
    for r in [rat::q(3, 4), rat::q(1, 2), rat::q(1, 3), rat::q(1, 8), rat::q(1, 9)] {
        let w = ball_as_cylinder(&x, &r).unwrap();
        for bits in 0u32..64 {
            let pre: Vec<u8> = (0..6).map(|i| ((bits >> i) & 1) as u8).collect();
            for tail in [0u8, 1] {
                let y = ShiftPoint::new(pre.clone(), vec![tail]).unwrap();
                let inside = rho(&Point::Shift(x.clone()), &Point::Shift(y.clone())).unwrap() < r;
                assert_eq!(inside, y.prefix(w.len()) == w, "r={r} y={y}");
            }
        }
    }
}

#[test]
fn circle_apply_examples() {
    let t = CirclePoint::parse("1/3").unwrap();
    assert_eq!(circle_apply(0, 2, &t).value(), &rat::q(1, 3));
    assert_eq!(circle_apply(1, 2, &t).value(), &rat::q(2, 3));
    assert_eq!(circle_apply(2, 2, &CirclePoint::parse("5/8").unwrap()).value(), &rat::q(1, 2));
}

#[test]
fn dedupe_examples() {
    let (x, y) = (shift("|01"), shift("|1"));
    let mb = MultiBall::new(vec![(x.clone(), rat::q(1, 4)), (x.clone(), rat::q(1, 8))]).unwrap();
    assert_eq!(multiball_dedupe(&mb).entries(), &[(x.clone(), rat::q(1, 4))]);
    let mb = MultiBall::new(vec![(x.clone(), rat::q(1, 8)), (y.clone(), rat::q(1, 8)), (x.clone(), rat::q(1, 2))]).unwrap();
    let d = multiball_dedupe(&mb);
    assert_eq!(d.entries(), &[(x.clone(), rat::q(1, 2)), (y.clone(), rat::q(1, 8))]);
    for bits in 0u32..32 {
        let pre: Vec<u8> = (0..5).map(|i| ((bits >> i) & 1) as u8).collect();
        let z = Point::Shift(ShiftPoint::new(pre, vec![0]).unwrap());
        assert_eq!(mb.contains(&z).unwrap(), d.contains(&z).unwrap());
    }
}

#[test]
fn disjointness_examples() {
    let mb = MultiBall::new(vec![(shift("|0"), rat::q(1, 2)), (shift("|1"), rat::q(1, 2))]).unwrap();
    assert!(multiball_pairwise_disjoint(&mb));
    assert!(multiball_pairwise_disjoint(&MultiBall::single(shift("|01"), Q::one()).unwrap()));
    let mb = MultiBall::new(vec![(circ("0"), rat::q(1, 4)), (circ("1/8"), rat::q(1, 4))]).unwrap();
    assert!(!multiball_pairwise_disjoint(&mb));
    assert!(MultiBall::new(vec![(shift("|0"), rat::q(1, 2)), (circ("0"), rat::q(1, 2))]).is_err());
}

#[test]
fn sft_primitivity() {
    let golden = Sft::new(vec![vec![false, true], vec![true, true]]).unwrap();
    assert_eq!(golden.primitivity_index(), Some(2));
    assert_eq!(Sft::full(3).primitivity_index(), Some(1));
    let swap = Sft::new(vec![vec![false, true], vec![true, false]]).unwrap();
    assert!(swap.is_irreducible());
    assert_eq!(swap.primitivity_index(), None);
    assert!(golden.admits_point(&sp("|01")));
    assert!(!golden.admits_point(&sp("1|0")));
}

fn arb_point() -> impl Strategy<Value = ShiftPoint> {
    (prop::collection::vec(0u8..2, 0..6), prop::collection::vec(0u8..2, 1..5))
        .prop_map(|(pre, per)| ShiftPoint::new(pre, per).unwrap())
}

proptest! {
    #[test]
    fn shift_is_an_action(x in arb_point(), i in 0usize..12, j in 0usize..12) {
        prop_assert_eq!(shift_apply(i, &shift_apply(j, &x)), shift_apply(i + j, &x));
        for n in 0..20 {
            prop_assert_eq!(shift_apply(j, &x).symbol(n), x.symbol(n + j));
        }
    }

    #[test]
    fn rho_is_an_ultrametric(x in arb_point(), y in arb_point(), z in arb_point()) {
        let (px, py, pz) = (Point::Shift(x.clone()), Point::Shift(y.clone()), Point::Shift(z));
        let (xy, yz, xz) = (rho(&px, &py).unwrap(), rho(&py, &pz).unwrap(), rho(&px, &pz).unwrap());
        prop_assert_eq!(xy.clone(), rho(&py, &px).unwrap());
        prop_assert!(xz <= xy.clone().max(yz));
        prop_assert_eq!(xy.is_zero(), x == y);
        // brute force first difference on a window longer than both periods combined
        let i = (0..64).find(|&i| x.symbol(i) != y.symbol(i));
        prop_assert_eq!(xy, i.map_or(Q::zero(), |i| rat::pow2_neg(i as u64 + 1)));
    }

    #[test]
    fn circle_metric_symmetric(a in 0i64..64, b in 0i64..64) {
        let (s, t) = (circ(&format!("{a}/64")), circ(&format!("{b}/64")));
        let d = rho(&s, &t).unwrap();
        let diff = (a - b).rem_euclid(64);
        prop_assert_eq!(d, rat::q(diff.min(64 - diff), 64));
    }
}
