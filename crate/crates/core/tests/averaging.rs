use ergolab::averaging::*;
use ergolab::construct::give_and_take_depths;
use ergolab::measure::AmbientMeasure;
use ergolab::rat::{self, Q};
use ergolab::space::{CirclePoint, Mohoc, MultiBall, Point, ShiftPoint, Space};
use num_traits::{One, Zero};
use proptest::prelude::*;

fn sp(s: &str) -> Point {
    Point::Shift(ShiftPoint::parse(s, 2).unwrap())
}

fn cp(s: &str) -> Point {
    Point::Circle(CirclePoint::parse(s).unwrap())
}

fn chi(w: &[u8]) -> Observable {
    Observable::Shift(LocallyConstantFn::indicator(2, w))
}

fn sum(v: impl IntoIterator<Item = Q>) -> Q {
    v.into_iter().fold(Q::zero(), |a, b| a + b)
}

#[test]
fn birkhoff_examples() {
    let s = Space::full_shift(2);
    assert_eq!(birkhoff_avg(&s, &chi(&[0]), &sp("|01"), 4).unwrap(), rat::q(1, 2));
    assert_eq!(birkhoff_avg(&s, &chi(&[0]), &sp("|011"), 6).unwrap(), rat::q(1, 3));
    let c = Observable::Shift(LocallyConstantFn::constant(2, rat::q(2, 7)));
    for k in 1..10 {
        assert_eq!(birkhoff_avg(&s, &c, &sp("10|011"), k).unwrap(), rat::q(2, 7));
    }
    assert!(birkhoff_avg(&s, &chi(&[0]), &sp("|0"), 0).is_err());
    assert!(birkhoff_avg(&s, &chi(&[0]), &cp("1/3"), 3).is_err());
}

#[test]
fn birkhoff_limit_examples() {
    let s = Space::full_shift(2);
    assert_eq!(birkhoff_limit_periodic(&s, &chi(&[0]), &sp("|01")).unwrap(), rat::q(1, 2));
    assert_eq!(birkhoff_limit_periodic(&s, &chi(&[0]), &sp("|0")).unwrap(), Q::one());
    assert_eq!(birkhoff_limit_periodic(&s, &chi(&[1]), &sp("0|1")).unwrap(), Q::one());
    let c = Space::circle(2);
    let f = Observable::Circle(PiecewiseLinearFn::hat(&rat::q(1, 2), &rat::q(1, 2)).unwrap());
    // 1/3 ↔ 2/3 under doubling, hat value 2/3 at both
    assert_eq!(birkhoff_limit_periodic(&c, &f, &cp("1/3")).unwrap(), rat::q(2, 3));
    assert_eq!(birkhoff_limit_periodic(&c, &f, &cp("1/6")).unwrap(), rat::q(2, 3));
}

// α_{[w]}(Avg_k f) by enumerating every word long enough to fix all sampled windows
fn cylinder_oracle(mu: &AmbientMeasure, w: &[u8], f: &LocallyConstantFn, k: usize) -> Q {
    let len = (k + f.depth() - 1).max(w.len());
    let free = len - w.len();
    let mut num = Q::zero();
    for bits in 0u32..(1 << free) {
        let mut v = w.to_vec();
        v.extend((0..free).map(|i| ((bits >> i) & 1) as u8));
        let m = mu.cylinder_measure(&v).unwrap();
        let avg = sum((0..k).map(|j| f.eval_word(&v[j..j + f.depth()]).clone())) / rat::int(k as i64);
        num += m * avg;
    }
    num / mu.cylinder_measure(w).unwrap()
}

// exact arc mean of f(b^j t) by the trapezoid rule on the breakpoints of f∘T_j
fn arc_oracle(base: u32, s: &Q, len: &Q, f: &PiecewiseLinearFn, j: u32) -> Q {
    let scale = rat::int(base.pow(j) as i64);
    let e = s + len;
    let mut ts = vec![s.clone(), e.clone()];
    let lo = rat::floor(&(s * &scale)) - num_bigint::BigInt::from(1);
    let hi = rat::floor(&(&e * &scale)) + num_bigint::BigInt::from(1);
    let mut n = lo;
    while n <= hi {
        for p in f.breakpoints() {
            let t = (Q::from_integer(n.clone()) + p) / &scale;
            if t > *s && t < e {
                ts.push(t);
            }
        }
        n += num_bigint::BigInt::from(1);
    }
    ts.sort();
    ts.dedup();
    let g = |t: &Q| f.eval(&(t * &scale));
    sum(ts.windows(2).map(|w| (&w[1] - &w[0]) * (g(&w[0]) + g(&w[1])) / rat::int(2))) / len
}

#[test]
fn spatial_temporal_examples() {
    let s = Space::full_shift(2);
    let u = AmbientMeasure::uniform(2);
    // complementary pair: x has 0 where y has 1
    let (x, y) = (sp("001|10"), sp("110|01"));
    for k in 1..=20u64 {
        let r = rat::pow2_neg(k);
        let mb = MultiBall::new(vec![(x.clone(), r.clone()), (y.clone(), r)]).unwrap();
        assert_eq!(spatial_temporal_avg(&s, &u, &mb, &chi(&[0]), k as usize).unwrap().value, rat::q(1, 2));
        let whole = MultiBall::single(x.clone(), Q::one()).unwrap();
        assert_eq!(spatial_temporal_avg(&s, &u, &whole, &chi(&[0]), k as usize).unwrap().value, rat::q(1, 2));
    }
    let c = Observable::Shift(LocallyConstantFn::constant(2, rat::q(3, 4)));
    let mb = MultiBall::single(x, rat::q(1, 8)).unwrap();
    assert_eq!(spatial_temporal_avg(&s, &u, &mb, &c, 5).unwrap().value, rat::q(3, 4));
    assert!(spatial_temporal_avg(&s, &u, &mb, &c, 0).is_err());
}

#[test]
fn multiball_decompose_examples() {
    let s = Space::full_shift(2);
    let u = AmbientMeasure::uniform(2);
    let f = chi(&[0]);
    let mb = MultiBall::new(vec![(sp("|0"), rat::q(1, 4)), (sp("|1"), rat::q(1, 4))]).unwrap();
    let parts = multiball_decompose(&s, &u, &mb, &f, 3).unwrap();
    assert_eq!((parts[0].0.clone(), parts[1].0.clone()), (rat::q(1, 2), rat::q(1, 2)));
    for k in 2..12 {
        let (p, q) = give_and_take_depths(k);
        let (a, b) = (rat::pow2_neg(p as u64), rat::pow2_neg(q as u64));
        let mb = MultiBall::new(vec![(sp("|10"), a.clone()), (sp("|110"), b.clone())]).unwrap();
        let parts = multiball_decompose(&s, &u, &mb, &f, k).unwrap();
        assert_eq!(parts[0].0, &a / (&a + &b));
        assert_eq!(parts[1].0, &b / (&a + &b));
        let value = spatial_temporal_avg(&s, &u, &mb, &f, k).unwrap().value;
        assert_eq!(value, sum(parts.iter().map(|(w, v)| w * v)));
    }
    let single = MultiBall::single(sp("|01"), rat::q(1, 16)).unwrap();
    assert_eq!(multiball_decompose(&s, &u, &single, &f, 4).unwrap()[0].0, Q::one());
    let overlap = MultiBall::new(vec![(sp("|0"), rat::q(1, 2)), (sp("0|1"), rat::q(1, 4))]).unwrap();
    assert!(multiball_decompose(&s, &u, &overlap, &f, 4).is_err());
}

#[test]
fn decay_examples() {
    let m = Mohoc::new(rat::int(2)).unwrap();
    let d = rat::q(1, 8);
    let r = decay_fast_check(&m, &|k| vec![rat::pow2_neg(k as u64)], std::slice::from_ref(&d), 40);
    for k in 1..=40 {
        assert!(*r.fraction(k, &d, 0).unwrap() <= rat::q(3, k as i64));
    }
    assert!(r.consistent_with_decay);
    let r = decay_fast_check(&m, &|k| vec![rat::pow_u(&rat::q(1, 4), k as u64)], std::slice::from_ref(&d), 20);
    for k in 4..=20 {
        assert!(r.fraction(k, &d, 0).unwrap().is_zero());
    }
    let small = rat::q(1, 1000);
    let r = decay_fast_check(&m, &|_| vec![rat::q(1, 2)], std::slice::from_ref(&small), 30);
    assert!(!r.consistent_with_decay);
    // L(j)·1/2 ≥ 1/2 > δ for every j
    assert_eq!(r.fraction(30, &small, 0).unwrap(), &Q::one());
}

#[test]
fn holder_examples() {
    let one = Mohoc::new(Q::one()).unwrap();
    assert_eq!(holder_gap_bound(&Q::one(), 1, &one, 1, &rat::q(1, 4)), rat::q(1, 4));
    let two = Mohoc::new(rat::int(2)).unwrap();
    assert_eq!(holder_gap_bound(&Q::one(), 1, &two, 3, &rat::pow2_neg(5)), rat::q(7, 96));
    assert!(holder_gap_bound(&Q::one(), 1, &two, 3, &rat::pow2_neg(60)) < rat::pow2_neg(55));
}

#[test]
fn pointwise_gap_examples() {
    let c = Space::circle(2);
    let leb = AmbientMeasure::LebesgueCircle;
    let k = Observable::Circle(PiecewiseLinearFn::constant(rat::q(1, 3)));
    assert_eq!(pointwise_reduction_gap(&c, &leb, &cp("1/5"), &rat::q(1, 8), &k, 4).unwrap(), Q::zero());
    let hat = Observable::Circle(PiecewiseLinearFn::hat(&rat::q(1, 2), &rat::q(1, 2)).unwrap());
    let r = rat::pow2_neg(8);
    let gap = pointwise_reduction_gap(&c, &leb, &cp("0"), &r, &hat, 3).unwrap();
    let bound = holder_gap_bound(&rat::int(2), 1, &c.mohoc(), 3, &r);
    assert_eq!(bound, rat::q(2, 3) * rat::int(7) * &r);
    assert!(gap <= bound);
    let s = Space::full_shift(2);
    let u = AmbientMeasure::uniform(2);
    for k in 1..8usize {
        let r = rat::pow2_neg(k as u64 + 1);
        assert_eq!(pointwise_reduction_gap(&s, &u, &sp("1|01"), &r, &chi(&[1]), k).unwrap(), Q::zero());
    }
}

#[test]
fn blended_examples() {
    let c = [rat::q(1, 3), rat::q(1, 2)];
    assert_eq!(blended_limit_predict(&c, &[Q::one(), Q::zero()]).unwrap(), rat::q(1, 3));
    assert_eq!(blended_limit_predict(&c, &[rat::q(1, 2), rat::q(1, 2)]).unwrap(), rat::q(5, 12));
    assert_eq!(blended_limit_predict(&c[..1], &[Q::one()]).unwrap(), rat::q(1, 3));
    assert!(blended_limit_predict(&c, &[rat::q(1, 2), rat::q(1, 3)]).is_err());
}

#[test]
fn arc_sum_matches_terms_on_wrapping_arcs() {
    let f = PiecewiseLinearFn::new(
        vec![Q::zero(), rat::q(1, 5), rat::q(1, 2), rat::q(7, 9), Q::one()],
        vec![rat::q(1, 3), Q::one(), rat::q(-1, 2), rat::q(2, 3), rat::q(1, 3)],
    )
    .unwrap();
    for base in [2u32, 3] {
        for (s, l) in [(rat::q(9, 10), rat::q(1, 5)), (rat::q(1, 7), rat::q(1, 1000)), (rat::q(0, 1), rat::q(2, 3))] {
            let terms = arc_conditional_terms(base, &s, &l, &f, 7);
            for (j, t) in terms.iter().enumerate() {
                assert_eq!(*t, arc_oracle(base, &s, &l, &f, j as u32), "base {base} s {s} j {j}");
            }
            assert_eq!(arc_conditional_sum(base, &s, &l, &f, 7), sum(terms));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shift_average_matches_enumeration(
        w in prop::collection::vec(0u8..2, 0..4),
        table in prop::collection::vec(0i64..5, 4),
        p in 1i64..5,
        k in 1usize..6,
    ) {
        let f = LocallyConstantFn::new(2, 2, table.iter().map(|&v| rat::q(v, 4)).collect()).unwrap();
        let mu = AmbientMeasure::bernoulli(vec![rat::q(p, 5), rat::q(5 - p, 5)]).unwrap();
        let terms = cylinder_conditional_terms(&mu, &w, &f, k).unwrap();
        prop_assert_eq!(sum(terms) / rat::int(k as i64), cylinder_oracle(&mu, &w, &f, k));
    }

    #[test]
    fn markov_average_matches_enumeration(w in prop::collection::vec(0u8..2, 1..4), a in 1i64..4, k in 1usize..6) {
        let p = vec![vec![rat::q(a, 4), rat::q(4 - a, 4)], vec![rat::q(1, 3), rat::q(2, 3)]];
        let mu = AmbientMeasure::markov(p, None).unwrap();
        let f = LocallyConstantFn::indicator(2, &[0, 1]);
        let terms = cylinder_conditional_terms(&mu, &w, &f, k).unwrap();
        prop_assert_eq!(sum(terms) / rat::int(k as i64), cylinder_oracle(&mu, &w, &f, k));
    }

    #[test]
    fn circle_average_matches_trapezoid(sn in 0i64..64, ln in 1i64..20, c in 0i64..8, k in 1usize..7, base in 2u32..4) {
        let f = PiecewiseLinearFn::hat(&rat::q(c, 8), &rat::q(1, 4)).unwrap();
        let (s, l) = (rat::q(sn, 64), rat::q(ln, 128));
        let oracle = sum((0..k as u32).map(|j| arc_oracle(base, &s, &l, &f, j)));
        prop_assert_eq!(arc_conditional_sum(base, &s, &l, &f, k), oracle.clone());
        let space = Space::circle(base);
        let x = Point::Circle(CirclePoint::new(&s + &l / rat::int(2)));
        let v = ball_avg(&space, &AmbientMeasure::LebesgueCircle, &x, &(&l / rat::int(2)), &Observable::Circle(f), k).unwrap();
        prop_assert_eq!(v, oracle / rat::int(k as i64));
    }

    #[test]
    fn average_lies_between_extremes(w in prop::collection::vec(0u8..2, 0..5), k in 1usize..10) {
        let s = Space::full_shift(2);
        let f = Observable::Shift(LocallyConstantFn::new(2, 2, vec![rat::q(-1, 2), Q::one(), rat::q(1, 3), Q::zero()]).unwrap());
        let x = Point::Shift(ShiftPoint::new(w.clone(), vec![0]).unwrap());
        let v = ball_avg(&s, &AmbientMeasure::uniform(2), &x, &rat::pow2_neg(w.len() as u64), &f, k).unwrap();
        prop_assert!(v >= f.min() && v <= f.max());
    }
}
