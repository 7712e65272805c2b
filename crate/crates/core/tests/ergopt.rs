use ergolab::averaging::LocallyConstantFn;
use ergolab::ergopt::*;
use ergolab::measure::InvariantMeasure;
use ergolab::rat::{self, Q};
use ergolab::space::{ShiftPoint, Sft, Space};
use ergolab::averaging::Observable;
use num_traits::Zero;
use proptest::prelude::*;

fn words(len: usize, a: u8) -> Vec<Vec<u8>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out.into_iter().flat_map(|w| (0..a).map(move |s| [w.clone(), vec![s]].concat())).collect();
    }
    out
}

fn cyclic_mean(f: &LocallyConstantFn, w: &[u8]) -> Q {
    let m = f.depth();
    let n = w.len();
    let mut s = Q::zero();
    for i in 0..n {
        let win: Vec<u8> = (0..m).map(|t| w[(i + t) % n]).collect();
        s += f.eval_word(&win);
    }
    s / rat::int(n as i64)
}

// every simple cycle of the de Bruijn graph is a periodic word no longer than the node count
fn oracle_extremes(f: &LocallyConstantFn, sft: &Sft) -> (Q, Q) {
    let nodes = (sft.alphabet() as usize).pow(f.depth().saturating_sub(1) as u32).max(1);
    let mut best: Option<(Q, Q)> = None;
    for len in 1..=nodes {
        for w in words(len, sft.alphabet()) {
            let mut cyc = w.clone();
            cyc.push(w[0]);
            if !sft.admits_word(&cyc) {
                continue;
            }
            let v = cyclic_mean(f, &w);
            best = Some(match best {
                None => (v.clone(), v),
                Some((hi, lo)) => (hi.max(v.clone()), lo.min(v)),
            });
        }
    }
    best.unwrap()
}

fn oracle_window(f: &LocallyConstantFn, sft: &Sft, k: usize) -> (Q, Q) {
    let m = f.depth();
    let mut best: Option<(Q, Q)> = None;
    for w in words(k + m - 1, sft.alphabet()) {
        if !sft.admits_word(&w) {
            continue;
        }
        let v = (0..k).fold(Q::zero(), |a, j| a + f.eval_word(&w[j..j + m])) / rat::int(k as i64);
        best = Some(match best {
            None => (v.clone(), v),
            Some((hi, lo)) => (hi.max(v.clone()), lo.min(v)),
        });
    }
    best.unwrap()
}

#[test]
fn max_mean_cycle_examples() {
    let full = Sft::full(2);
    let (a, w) = max_mean_cycle(&LocallyConstantFn::indicator(2, &[0]), &full).unwrap();
    assert_eq!((a, w), (rat::int(1), vec![0]));
    let (a, w) = max_mean_cycle(&LocallyConstantFn::indicator(2, &[0, 1]), &full).unwrap();
    assert_eq!((a, w), (rat::q(1, 2), vec![0, 1]));
    let c = LocallyConstantFn::constant(2, rat::q(3, 5));
    assert_eq!(max_mean_cycle(&c, &full).unwrap().0, rat::q(3, 5));
}

#[test]
fn min_mean_cycle_examples() {
    let full = Sft::full(2);
    assert_eq!(min_mean_cycle(&LocallyConstantFn::indicator(2, &[0]), &full).unwrap(), (Q::zero(), vec![1]));
    assert_eq!(min_mean_cycle(&LocallyConstantFn::indicator(2, &[0, 1]), &full).unwrap(), (Q::zero(), vec![0]));
    let c = LocallyConstantFn::constant(2, rat::q(3, 5));
    assert_eq!(min_mean_cycle(&c, &full).unwrap().0, rat::q(3, 5));
}

#[test]
fn finite_sup_examples() {
    let full = Sft::full(2);
    let f = LocallyConstantFn::indicator(2, &[0, 1]);
    assert_eq!(finite_sup_avg(&f, 2, &full).unwrap(), rat::q(1, 2));
    assert_eq!(finite_sup_avg(&f, 2, &full).unwrap(), oracle_window(&f, &full, 2).0);
    assert_eq!(finite_sup_avg(&f, 1, &full).unwrap(), f.max());
    let c = LocallyConstantFn::constant(2, rat::q(-2, 3));
    assert_eq!(finite_sup_avg(&c, 9, &full).unwrap(), rat::q(-2, 3));
    assert!(finite_sup_avg(&f, 0, &full).is_err());
}

#[test]
fn jenkinson_examples() {
    let full = Sft::full(2);
    let f = LocallyConstantFn::indicator(2, &[0, 1]);
    let pts: Vec<ShiftPoint> = ["|0", "|01", "|1"].iter().map(|s| ShiftPoint::parse(s, 2).unwrap()).collect();
    let r = jenkinson_check(&f, &full, 64, &pts).unwrap();
    assert_eq!(r.abar, rat::q(1, 2));
    assert_eq!(r.bbar_observed, Some(rat::q(1, 2)));
    assert!(r.dbar[63].clone() - rat::q(1, 2) <= rat::q(2, 64));
    assert!(r.all_pass() && r.bbar_attains_abar);

    let c = LocallyConstantFn::constant(2, rat::q(1, 7));
    let r = jenkinson_check(&c, &full, 16, &pts).unwrap();
    let all = [&r.abar, &r.aunder, &r.cbar, &r.cunder, r.dbar.last().unwrap(), r.dunder.last().unwrap()];
    assert!(all.iter().all(|v| **v == rat::q(1, 7)));
    assert_eq!(r.bbar_observed, Some(rat::q(1, 7)));
    assert_eq!(r.bunder_observed, Some(rat::q(1, 7)));

    let g = LocallyConstantFn::indicator(2, &[0]);
    let r = jenkinson_check(&g, &full, 16, &[ShiftPoint::parse("|01", 2).unwrap()]).unwrap();
    assert_eq!(r.bbar_observed, Some(rat::q(1, 2)));
    assert_eq!(r.abar, rat::int(1));
    assert!(!r.bbar_attains_abar && r.all_pass());
}

#[test]
fn disconnected_graph_is_rejected() {
    let split = Sft::new(vec![vec![true, false], vec![false, true]]);
    assert_eq!(split.unwrap_err(), ergolab::Error::NotStronglyConnected);
}

#[test]
fn golden_mean_shift() {
    let g = Sft::new(vec![vec![false, true], vec![true, true]]).unwrap();
    let f = LocallyConstantFn::indicator(2, &[0]);
    // zeros are isolated, so the best frequency is 1/2
    assert_eq!(max_mean_cycle(&f, &g).unwrap().0, rat::q(1, 2));
    for k in 1..10 {
        let (hi, lo) = oracle_window(&f, &g, k);
        assert_eq!(finite_sup_avg(&f, k, &g).unwrap(), hi);
        assert_eq!(finite_inf_avg(&f, k, &g).unwrap(), lo);
    }
}

fn arb_fn() -> impl Strategy<Value = LocallyConstantFn> {
    (1usize..4).prop_flat_map(|m| {
        prop::collection::vec(-6i64..7, 1 << m)
            .prop_map(move |t| LocallyConstantFn::new(2, m, t.into_iter().map(|v| rat::q(v, 3)).collect()).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mean_cycles_match_enumeration(f in arb_fn()) {
        let full = Sft::full(2);
        let (hi, lo) = oracle_extremes(&f, &full);
        let (a, w) = max_mean_cycle(&f, &full).unwrap();
        let (b, v) = min_mean_cycle(&f, &full).unwrap();
        prop_assert_eq!(&a, &hi);
        prop_assert_eq!(&b, &lo);
        let space = Space::full_shift(2);
        let obs = Observable::Shift(f.clone());
        prop_assert_eq!(InvariantMeasure::orbit(&w).unwrap().integrate(&space, &obs).unwrap(), a);
        prop_assert_eq!(InvariantMeasure::orbit(&v).unwrap().integrate(&space, &obs).unwrap(), b);
    }

    #[test]
    fn window_extremes_match_enumeration(f in arb_fn(), k in 1usize..8) {
        let full = Sft::full(2);
        let (hi, lo) = oracle_window(&f, &full, k);
        prop_assert_eq!(finite_sup_avg(&f, k, &full).unwrap(), hi);
        prop_assert_eq!(finite_inf_avg(&f, k, &full).unwrap(), lo);
    }

    #[test]
    fn window_extremes_sandwich_the_mean_cycles(f in arb_fn(), k in 1usize..30) {
        let full = Sft::full(2);
        let c = Q::from_integer(sandwich_factor(&f, &full).unwrap().into());
        let slack = c * (f.max() - f.min()) / rat::int(k as i64);
        let a = max_mean_cycle(&f, &full).unwrap().0;
        let d = finite_sup_avg(&f, k, &full).unwrap();
        prop_assert!(d >= a && d <= &a + &slack);
    }
}
