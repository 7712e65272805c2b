//! Observables, Birkhoff averages and exact spatial-temporal averages.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::measure::AmbientMeasure;
use crate::rat::{self, Q};
use crate::space::{ball_as_cylinder, CirclePoint, Mohoc, MultiBall, Point, ShiftPoint, Space, Word};
use crate::{Error, Result};

/// Function of the first `depth` coordinates, tabulated over `A^depth`
/// with the first symbol most significant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocallyConstantFn {
    alphabet: u8,
    depth: usize,
    table: Vec<Q>,
}

impl LocallyConstantFn {
    pub fn new(alphabet: u8, depth: usize, table: Vec<Q>) -> Result<Self> {
        if depth == 0 {
            return Err(Error::Invalid("depth must be at least 1".into()));
        }
        let size = (alphabet as usize).checked_pow(depth as u32).filter(|&s| s <= 1 << 22);
        if size != Some(table.len()) {
            return Err(Error::Invalid(format!(
                "table for depth {depth} over {alphabet} symbols needs {} entries, got {}",
                size.map_or("too many".to_string(), |s| s.to_string()),
                table.len()
            )));
        }
        Ok(LocallyConstantFn { alphabet, depth, table })
    }

    pub fn constant(alphabet: u8, c: Q) -> Self {
        LocallyConstantFn { alphabet, depth: 1, table: vec![c; alphabet as usize] }
    }

    /// Indicator of the cylinder `[w]`.
    pub fn indicator(alphabet: u8, w: &[u8]) -> Self {
        assert!(!w.is_empty());
        let depth = w.len();
        let size = (alphabet as usize).pow(depth as u32);
        let mut table = vec![Q::zero(); size];
        table[word_index(w, alphabet)] = Q::one();
        LocallyConstantFn { alphabet, depth, table }
    }

    pub fn alphabet(&self) -> u8 {
        self.alphabet
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn table(&self) -> &[Q] {
        &self.table
    }

    pub fn eval_word(&self, w: &[u8]) -> &Q {
        &self.table[word_index(&w[..self.depth], self.alphabet)]
    }

    pub fn eval_index(&self, idx: usize) -> &Q {
        &self.table[idx]
    }

    pub fn eval(&self, x: &ShiftPoint) -> Q {
        self.eval_word(&x.prefix(self.depth)).clone()
    }

    pub fn max(&self) -> Q {
        self.table.iter().max().cloned().unwrap()
    }

    pub fn min(&self) -> Q {
        self.table.iter().min().cloned().unwrap()
    }

    /// Lipschitz constant for the `2^{-ℓ}` metric.
    pub fn lipschitz(&self) -> Q {
        (self.max() - self.min()) * Q::from_integer(num_bigint::BigInt::one() << self.depth)
    }

    /// Same function viewed at a larger depth.
    pub fn lift(&self, depth: usize) -> Self {
        if depth <= self.depth {
            return self.clone();
        }
        let a = self.alphabet as usize;
        let extra = a.pow((depth - self.depth) as u32);
        let table = (0..a.pow(depth as u32)).map(|i| self.table[i / extra].clone()).collect();
        LocallyConstantFn { alphabet: self.alphabet, depth, table }
    }
}

pub fn word_index(w: &[u8], alphabet: u8) -> usize {
    w.iter().fold(0usize, |acc, &s| acc * alphabet as usize + s as usize)
}

/// Continuous piecewise-linear function on ℝ/ℤ given by its values at breakpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiecewiseLinearFn {
    bps: Vec<Q>,
    vals: Vec<Q>,
    cum: Vec<Q>,
}

impl PiecewiseLinearFn {
    pub fn new(bps: Vec<Q>, vals: Vec<Q>) -> Result<Self> {
        if bps.len() < 2 || bps.len() != vals.len() {
            return Err(Error::Invalid("need matching breakpoints and values, at least two".into()));
        }
        if !bps[0].is_zero() || !bps.last().unwrap().is_one() {
            return Err(Error::Invalid("breakpoints must start at 0 and end at 1".into()));
        }
        if bps.windows(2).any(|p| p[0] >= p[1]) {
            return Err(Error::Invalid("breakpoints must be strictly increasing".into()));
        }
        if vals[0] != *vals.last().unwrap() {
            return Err(Error::Invalid("values at 0 and 1 must agree".into()));
        }
        let mut cum = vec![Q::zero()];
        for i in 1..bps.len() {
            let piece = (&bps[i] - &bps[i - 1]) * (&vals[i] + &vals[i - 1]) / rat::int(2);
            cum.push(&cum[i - 1] + piece);
        }
        Ok(PiecewiseLinearFn { bps, vals, cum })
    }

    pub fn constant(c: Q) -> Self {
        Self::new(vec![Q::zero(), Q::one()], vec![c.clone(), c]).unwrap()
    }

    /// Tent of height 1 at `center`, vanishing outside the arc of half-width `hw ≤ 1/2`.
    pub fn hat(center: &Q, hw: &Q) -> Result<Self> {
        if !hw.is_positive() || *hw > rat::q(1, 2) {
            return Err(Error::Invalid("hat half-width must lie in (0, 1/2]".into()));
        }
        let c = rat::frac(center);
        let mut bps = vec![Q::zero(), Q::one(), c.clone(), rat::frac(&(&c - hw)), rat::frac(&(&c + hw))];
        bps.sort();
        bps.dedup();
        let value = |t: &Q| {
            let d = crate::space::circle_dist(t, &c);
            let v = Q::one() - d / hw;
            if v.is_negative() {
                Q::zero()
            } else {
                v
            }
        };
        let vals = bps.iter().map(value).collect();
        Self::new(bps, vals)
    }

    pub fn breakpoints(&self) -> &[Q] {
        &self.bps
    }

    pub fn values(&self) -> &[Q] {
        &self.vals
    }

    /// Index `i` with `bps[i] ≤ t < bps[i+1]`, for `t ∈ [0,1)`.
    fn piece(&self, t: &Q) -> usize {
        match self.bps.binary_search(t) {
            Ok(i) => i.min(self.bps.len() - 2),
            Err(i) => i - 1,
        }
    }

    fn eval_in(&self, i: usize, t: &Q) -> Q {
        let (t0, t1) = (&self.bps[i], &self.bps[i + 1]);
        let (v0, v1) = (&self.vals[i], &self.vals[i + 1]);
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }

    pub fn eval(&self, t: &Q) -> Q {
        let t = rat::frac(t);
        self.eval_in(self.piece(&t), &t)
    }

    pub fn integral(&self) -> Q {
        self.cum.last().unwrap().clone()
    }

    /// `∫_0^x f` for real `x`, using periodicity.
    pub fn antiderivative(&self, x: &Q) -> Q {
        let n = rat::floor(x);
        let t = x - Q::from_integer(n.clone());
        let i = self.piece(&t);
        let partial = (&t - &self.bps[i]) * (&self.vals[i] + self.eval_in(i, &t)) / rat::int(2);
        Q::from_integer(n) * self.integral() + &self.cum[i] + partial
    }

    /// Mean of `f` over `[s, s + len]`.
    pub fn arc_mean(&self, s: &Q, len: &Q) -> Q {
        let s0 = rat::frac(s);
        let e = &s0 + len;
        if e <= Q::one() {
            let i = self.piece(&s0);
            if e <= self.bps[i + 1] {
                let mid = (&s0 + &e) / rat::int(2);
                return self.eval_in(i, &mid);
            }
        }
        (self.antiderivative(&e) - self.antiderivative(&s0)) / len
    }

    pub fn max(&self) -> Q {
        self.vals.iter().max().cloned().unwrap()
    }

    pub fn min(&self) -> Q {
        self.vals.iter().min().cloned().unwrap()
    }

    pub fn lipschitz(&self) -> Q {
        (1..self.bps.len())
            .map(|i| ((&self.vals[i] - &self.vals[i - 1]) / (&self.bps[i] - &self.bps[i - 1])).abs())
            .max()
            .unwrap()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Observable {
    Shift(LocallyConstantFn),
    Circle(PiecewiseLinearFn),
}

impl Observable {
    pub fn eval(&self, x: &Point) -> Result<Q> {
        match (self, x) {
            (Observable::Shift(f), Point::Shift(p)) => Ok(f.eval(p)),
            (Observable::Circle(f), Point::Circle(t)) => Ok(f.eval(t.value())),
            _ => Err(Error::Backend("function and point live on different backends".into())),
        }
    }

    pub fn max(&self) -> Q {
        match self {
            Observable::Shift(f) => f.max(),
            Observable::Circle(f) => f.max(),
        }
    }

    pub fn min(&self) -> Q {
        match self {
            Observable::Shift(f) => f.min(),
            Observable::Circle(f) => f.min(),
        }
    }

    pub fn sup_abs(&self) -> Q {
        self.max().abs().max(self.min().abs())
    }

    pub fn lipschitz(&self) -> Q {
        match self {
            Observable::Shift(f) => f.lipschitz(),
            Observable::Circle(f) => f.lipschitz(),
        }
    }

    pub fn as_shift(&self) -> Result<&LocallyConstantFn> {
        match self {
            Observable::Shift(f) => Ok(f),
            _ => Err(Error::Backend("expected a locally constant function".into())),
        }
    }

    pub fn as_circle(&self) -> Result<&PiecewiseLinearFn> {
        match self {
            Observable::Circle(f) => Ok(f),
            _ => Err(Error::Backend("expected a piecewise-linear function".into())),
        }
    }

    pub fn check_space(&self, space: &Space) -> Result<()> {
        match (self, space) {
            (Observable::Shift(f), Space::Shift(s)) if f.alphabet() == s.alphabet() => Ok(()),
            (Observable::Circle(_), Space::Circle { .. }) => Ok(()),
            _ => Err(Error::Backend("function does not match the space".into())),
        }
    }
}

impl From<LocallyConstantFn> for Observable {
    fn from(f: LocallyConstantFn) -> Self {
        Observable::Shift(f)
    }
}

impl From<PiecewiseLinearFn> for Observable {
    fn from(f: PiecewiseLinearFn) -> Self {
        Observable::Circle(f)
    }
}

/// Sum of `f` over the sliding windows starting at positions `0..k` of `x`.
fn shift_window_sum(f: &LocallyConstantFn, x: &ShiftPoint, k: usize) -> Q {
    let m = f.depth();
    let a = f.alphabet() as usize;
    let modulus = a.pow(m as u32 - 1);
    let mut counts: HashMap<usize, u64> = HashMap::new();
    let mut idx = 0usize;
    for i in 0..k + m - 1 {
        let s = x.symbol(i) as usize;
        if i >= m {
            idx %= modulus;
        }
        idx = idx * a + s;
        if i + 1 >= m {
            *counts.entry(idx).or_default() += 1;
        }
    }
    let mut keys: Vec<_> = counts.into_iter().collect();
    keys.sort();
    keys.into_iter()
        .map(|(i, c)| f.eval_index(i) * Q::from_integer(c.into()))
        .fold(Q::zero(), |acc, v| acc + v)
}

/// `(1/k) Σ_{j<k} f(T_j x)`.
pub fn birkhoff_avg(space: &Space, f: &Observable, x: &Point, k: usize) -> Result<Q> {
    if k == 0 {
        return Err(Error::Invalid("horizon must be at least 1".into()));
    }
    f.check_space(space)?;
    match (f, x, space) {
        (Observable::Shift(g), Point::Shift(p), _) => {
            if p.max_symbol() >= g.alphabet() {
                return Err(Error::Backend("point uses symbols outside the alphabet".into()));
            }
            Ok(shift_window_sum(g, p, k) / rat::int(k as i64))
        }
        (Observable::Circle(g), Point::Circle(t), Space::Circle { base }) => {
            let mut s = Q::zero();
            let mut cur = t.clone();
            for _ in 0..k {
                s += g.eval(cur.value());
                cur = cur.apply(1, *base);
            }
            Ok(s / rat::int(k as i64))
        }
        _ => Err(Error::Backend("point does not match the function".into())),
    }
}

/// Exact `lim_k Avg_k f(x)` along the periodic tail of the orbit of `x`.
pub fn birkhoff_limit_periodic(space: &Space, f: &Observable, x: &Point) -> Result<Q> {
    f.check_space(space)?;
    match (f, x, space) {
        (Observable::Shift(_), Point::Shift(p), _) => {
            let tail = Point::Shift(p.shift(p.preperiod().len()));
            birkhoff_avg(space, f, &tail, p.period().len())
        }
        (Observable::Circle(g), Point::Circle(t), Space::Circle { base }) => {
            let mut seen: HashMap<CirclePoint, usize> = HashMap::new();
            let mut orbit = Vec::new();
            let mut cur = t.clone();
            while !seen.contains_key(&cur) {
                seen.insert(cur.clone(), orbit.len());
                orbit.push(cur.clone());
                cur = cur.apply(1, *base);
            }
            let start = seen[&cur];
            let cycle = &orbit[start..];
            let s = cycle.iter().fold(Q::zero(), |acc, c| acc + g.eval(c.value()));
            Ok(s / rat::int(cycle.len() as i64))
        }
        _ => Err(Error::Backend("point does not match the function".into())),
    }
}

/// One sample `α_{C_k}(Avg_{F_k} f)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TsAvgSample {
    pub k: usize,
    pub balls: MultiBall,
    pub value: Q,
}

/// Disjoint pieces of a multi-ball with their measures and conditional averages.
#[derive(Clone, Debug)]
enum Piece {
    Cylinder(Word),
    Arc { start: Q, len: Q },
}

fn shift_pieces(mb: &MultiBall) -> Result<Vec<Word>> {
    let mut words = Vec::new();
    for (c, r) in mb.entries() {
        words.push(ball_as_cylinder(c.as_shift()?, r)?);
    }
    let mut out: Vec<Word> = Vec::new();
    for (i, w) in words.iter().enumerate() {
        let covered = words.iter().enumerate().any(|(j, v)| {
            (v.len() < w.len() && w.starts_with(v)) || (v == w && j < i)
        });
        if !covered {
            out.push(w.clone());
        }
    }
    Ok(out)
}

fn circle_pieces(mb: &MultiBall) -> Result<Vec<(Q, Q)>> {
    let half = rat::q(1, 2);
    let mut arcs: Vec<(Q, Q)> = Vec::new();
    for (c, r) in mb.entries() {
        let t = c.as_circle()?;
        if *r >= half {
            return Ok(vec![(Q::zero(), Q::one())]);
        }
        arcs.push((rat::frac(&(t.value() - r)), r * rat::int(2)));
    }
    arcs.sort();
    let mut merged: Vec<(Q, Q)> = Vec::new();
    for (s, l) in arcs {
        if let Some((ms, ml)) = merged.last_mut() {
            let end = &*ms + &*ml;
            if s <= end {
                let new_end = (&s + &l).max(end);
                *ml = new_end - &*ms;
                continue;
            }
        }
        merged.push((s, l));
    }
    // wrap-around: last arc may run past 1 into the first
    while merged.len() > 1 {
        let (fs, fl) = merged[0].clone();
        let (ls, ll) = merged.last().unwrap().clone();
        let end = &ls + &ll;
        if end < &fs + Q::one() {
            break;
        }
        let new_end = (&fs + &fl + Q::one()).max(end);
        merged.remove(0);
        let last = merged.last_mut().unwrap();
        last.1 = new_end - &ls;
    }
    if merged.iter().any(|(_, l)| *l >= Q::one()) {
        return Ok(vec![(Q::zero(), Q::one())]);
    }
    Ok(merged)
}

fn pieces(mb: &MultiBall) -> Result<Vec<Piece>> {
    match mb.entries()[0].0 {
        Point::Shift(_) => Ok(shift_pieces(mb)?.into_iter().map(Piece::Cylinder).collect()),
        Point::Circle(_) => {
            Ok(circle_pieces(mb)?.into_iter().map(|(start, len)| Piece::Arc { start, len }).collect())
        }
    }
}

/// `E_μ[f ∘ T_j | [w]]` for `j < k`, marginalizing the free coordinates.
pub fn cylinder_conditional_terms(mu: &AmbientMeasure, w: &[u8], f: &LocallyConstantFn, k: usize) -> Result<Vec<Q>> {
    let m = f.depth();
    let a = f.alphabet();
    let l = w.len();
    let mut out = Vec::with_capacity(k);
    let mut stationary: Option<Q> = None;
    let mut markov_power: Option<Vec<Vec<Q>>> = None;
    let mut power_steps = 0usize;
    for j in 0..k {
        if j + m <= l {
            out.push(f.eval_word(&w[j..j + m]).clone());
            continue;
        }
        let fixed: &[u8] = if j < l { &w[j..] } else { &[] };
        let free = m - fixed.len();
        match mu {
            AmbientMeasure::Bernoulli(p) => {
                if j >= l {
                    if stationary.is_none() {
                        stationary = Some(bernoulli_expectation(p, f, &[], m, a));
                    }
                    out.push(stationary.clone().unwrap());
                } else {
                    out.push(bernoulli_expectation(p, f, fixed, free, a));
                }
            }
            AmbientMeasure::Markov { p, pi } => {
                let v = if j < l {
                    markov_expectation(p, f, fixed, free, a, None)
                } else if l == 0 {
                    markov_expectation(p, f, &[], m, a, Some(pi.clone()))
                } else {
                    let gap = j - l + 1;
                    let pw = markov_power.get_or_insert_with(|| p.clone());
                    if power_steps == 0 {
                        power_steps = 1;
                    }
                    while power_steps < gap {
                        *pw = mat_mul(pw, p);
                        power_steps += 1;
                    }
                    let init = pw[w[l - 1] as usize].clone();
                    markov_expectation(p, f, &[], m, a, Some(init))
                };
                out.push(v);
            }
            AmbientMeasure::LebesgueCircle => {
                return Err(Error::Backend("cylinders need a shift measure".into()));
            }
        }
    }
    Ok(out)
}

fn for_each_word(a: u8, len: usize, mut visit: impl FnMut(&[u8])) {
    let mut v = vec![0u8; len];
    loop {
        visit(&v);
        let mut i = len;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            v[i] += 1;
            if v[i] < a {
                break;
            }
            v[i] = 0;
        }
    }
}

fn bernoulli_expectation(p: &[Q], f: &LocallyConstantFn, fixed: &[u8], free: usize, a: u8) -> Q {
    let mut s = Q::zero();
    let mut word = fixed.to_vec();
    for_each_word(a, free, |v| {
        word.truncate(fixed.len());
        word.extend_from_slice(v);
        let pr = v.iter().fold(Q::one(), |acc, &c| acc * &p[c as usize]);
        s += f.eval_word(&word) * pr;
    });
    s
}

/// With `init = None` the walk continues from the last fixed symbol;
/// otherwise `init[c]` is the law of the first free symbol.
fn markov_expectation(p: &[Vec<Q>], f: &LocallyConstantFn, fixed: &[u8], free: usize, a: u8, init: Option<Vec<Q>>) -> Q {
    let mut s = Q::zero();
    let mut word = fixed.to_vec();
    for_each_word(a, free, |v| {
        word.truncate(fixed.len());
        word.extend_from_slice(v);
        let mut pr = match &init {
            Some(d) => d[v[0] as usize].clone(),
            None => p[*fixed.last().unwrap() as usize][v[0] as usize].clone(),
        };
        for t in 1..v.len() {
            if pr.is_zero() {
                break;
            }
            pr *= &p[v[t - 1] as usize][v[t] as usize];
        }
        if !pr.is_zero() {
            s += f.eval_word(&word) * pr;
        }
    });
    s
}

pub(crate) fn mat_mul(x: &[Vec<Q>], y: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let n = x.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).fold(Q::zero(), |acc, l| acc + &x[i][l] * &y[l][j])).collect())
        .collect()
}

/// `(1/ℓ) ∫_{[s,s+ℓ]} f(b^j t) dt` for `j < k`.
pub fn arc_conditional_terms(base: u32, start: &Q, len: &Q, f: &PiecewiseLinearFn, k: usize) -> Vec<Q> {
    let b = rat::int(base as i64);
    let mut s = rat::frac(start);
    let mut l = len.clone();
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        out.push(f.arc_mean(&s, &l));
        s = rat::frac(&(&s * &b));
        l = &l * &b;
    }
    out
}

/// `Σ_{j<k} (1/ℓ) ∫_{[s,s+ℓ]} f(b^j t) dt`.
///
/// Works over a common denominator `D` of the start, the length and the
/// breakpoints: each arc is split at breakpoints into sub-arcs `[A,B]` on
/// which `f` is affine, and the sums `Σ (B−A)` and `Σ (B−A)(A+B)` are kept
/// per piece as integers weighted by `b^{k−1−j}`.
pub fn arc_conditional_sum(base: u32, start: &Q, len: &Q, f: &PiecewiseLinearFn, k: usize) -> Q {
    let s0 = rat::frac(start);
    let d = f.bps.iter().fold(s0.denom().lcm(len.denom()), |acc, p| acc.lcm(p.denom()));
    let dq = Q::from_integer(d.clone());
    let mut sn = (&s0 * &dq).to_integer();
    let mut ln = (len * &dq).to_integer();
    let b = BigInt::from(base);
    let n = f.bps.len() - 1;
    let cuts: Vec<BigInt> = f.bps.iter().map(|p| (p * &dq).to_integer()).collect();
    let mut width = vec![BigInt::zero(); n];
    let mut moment = vec![BigInt::zero(); n];
    let mut slow = Q::zero();
    let mut scale = num_traits::pow::pow(b.clone(), k.saturating_sub(1));
    for _ in 0..k {
        if ln >= d {
            slow += f.arc_mean(&(Q::from_integer(sn.clone()) / &dq), &(Q::from_integer(ln.clone()) / &dq));
        } else {
            let mut pos = sn.clone();
            let mut end = &sn + &ln;
            let mut i = cuts.partition_point(|c| *c <= pos) - 1;
            loop {
                let stop = if end < cuts[i + 1] { end.clone() } else { cuts[i + 1].clone() };
                let w = &stop - &pos;
                moment[i] += &w * (&pos + &stop) * &scale;
                width[i] += w * &scale;
                if stop == end {
                    break;
                }
                pos = stop;
                i += 1;
                if i == n {
                    i = 0;
                    pos -= &d;
                    end -= &d;
                }
            }
        }
        sn = (&sn * &b).mod_floor(&d);
        ln *= &b;
        scale /= &b;
    }
    // ℓ_j = b^j ℓ, so weighting by b^{k−1−j} leaves the common factor b^{k−1} ℓ D
    let den = Q::from_integer(num_traits::pow::pow(b, k.saturating_sub(1))) * len * &dq;
    let two_d = rat::int(2) * &dq;
    (0..n).fold(slow, |acc, i| {
        if width[i].is_zero() {
            return acc;
        }
        let (t0, t1) = (&f.bps[i], &f.bps[i + 1]);
        let (v0, v1) = (&f.vals[i], &f.vals[i + 1]);
        let slope = (v1 - v0) / (t1 - t0);
        let part = (v0 - &slope * t0) * Q::from_integer(width[i].clone())
            + slope * Q::from_integer(moment[i].clone()) / &two_d;
        acc + part / &den
    })
}

fn piece_stats(space: &Space, mu: &AmbientMeasure, piece: &Piece, f: &Observable, k: usize) -> Result<(Q, Q)> {
    let terms = match (piece, f, space) {
        (Piece::Cylinder(w), Observable::Shift(g), Space::Shift(_)) => {
            (mu.cylinder_measure(w)?, cylinder_conditional_terms(mu, w, g, k)?)
        }
        (Piece::Arc { start, len }, Observable::Circle(g), Space::Circle { base }) => {
            if !matches!(mu, AmbientMeasure::LebesgueCircle) {
                return Err(Error::Backend("arcs need Lebesgue measure".into()));
            }
            return Ok((len.clone(), arc_conditional_sum(*base, start, len, g, k) / rat::int(k as i64)));
        }
        _ => return Err(Error::Backend("function, measure and balls disagree on the backend".into())),
    };
    let (m, t) = terms;
    let avg = t.into_iter().fold(Q::zero(), |acc, v| acc + v) / rat::int(k as i64);
    Ok((m, avg))
}

/// `α_C(Avg_{F_k} f)`, exact.
pub fn spatial_temporal_avg(space: &Space, mu: &AmbientMeasure, c: &MultiBall, f: &Observable, k: usize) -> Result<TsAvgSample> {
    if k == 0 {
        return Err(Error::Invalid("horizon must be at least 1".into()));
    }
    let c = c.dedupe();
    let mut num = Q::zero();
    let mut den = Q::zero();
    for p in pieces(&c)? {
        let (m, a) = piece_stats(space, mu, &p, f, k)?;
        num += &m * a;
        den += m;
    }
    if den.is_zero() {
        return Err(Error::ZeroMeasure);
    }
    Ok(TsAvgSample { k, balls: c, value: num / den })
}

/// `α_{B(x;r)}(Avg_{F_k} f)` for a single ball.
pub fn ball_avg(space: &Space, mu: &AmbientMeasure, x: &Point, r: &Q, f: &Observable, k: usize) -> Result<Q> {
    Ok(spatial_temporal_avg(space, mu, &MultiBall::single(x.clone(), r.clone())?, f, k)?.value)
}

/// Weights `μ(B_h)/Σμ(B_u)` and per-ball averages of a disjoint multi-ball.
pub fn multiball_decompose(space: &Space, mu: &AmbientMeasure, c: &MultiBall, f: &Observable, k: usize) -> Result<Vec<(Q, Q)>> {
    if !c.pairwise_disjoint() {
        return Err(Error::NotDisjoint);
    }
    let mut parts = Vec::new();
    for (x, r) in c.entries() {
        let m = mu.ball_measure(x, r)?;
        if m.is_zero() {
            return Err(Error::ZeroMeasure);
        }
        parts.push((m, ball_avg(space, mu, x, r, f, k)?));
    }
    let total = parts.iter().fold(Q::zero(), |acc, (m, _)| acc + m);
    Ok(parts.into_iter().map(|(m, a)| (m / &total, a)).collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecayRow {
    pub k: usize,
    pub delta: Q,
    pub ball: usize,
    pub fraction: Q,
}

#[derive(Clone, Debug)]
pub struct DecayReport {
    pub rows: Vec<DecayRow>,
    pub max_radius: Vec<(usize, Q)>,
    pub consistent_with_decay: bool,
}

impl DecayReport {
    pub fn fraction(&self, k: usize, delta: &Q, ball: usize) -> Option<&Q> {
        self.rows.iter().find(|r| r.k == k && r.delta == *delta && r.ball == ball).map(|r| &r.fraction)
    }
}

/// `|{j < k : L(j) r > δ}|`.
fn count_exceeding(mohoc: &Mohoc, r: &Q, delta: &Q, k: usize) -> usize {
    if mohoc.lambda.is_one() {
        return if r > delta { k } else { 0 };
    }
    let mut v = r.clone();
    for j in 0..k {
        if v > *delta {
            return k - j;
        }
        v *= &mohoc.lambda;
    }
    0
}

/// Fractions from the rapid-decay definition over `1 ≤ k ≤ horizon`.
///
/// The verdict asks, for every `(δ, h)`, that the fraction at `K` be at most
/// the fraction at `⌈K/2⌉` and below `1/2`, and that the largest radius at
/// `K` be below every `δ`.
pub fn decay_fast_check(mohoc: &Mohoc, radii: &dyn Fn(usize) -> Vec<Q>, deltas: &[Q], horizon: usize) -> DecayReport {
    let mut rows = Vec::new();
    let mut max_radius = Vec::new();
    for k in 1..=horizon {
        let rs = radii(k);
        max_radius.push((k, rs.iter().max().cloned().unwrap_or_else(Q::zero)));
        for d in deltas {
            for (h, r) in rs.iter().enumerate() {
                let c = count_exceeding(mohoc, r, d, k);
                rows.push(DecayRow { k, delta: d.clone(), ball: h, fraction: rat::q(c as i64, k as i64) });
            }
        }
    }
    let mut ok = horizon >= 1 && !deltas.is_empty();
    if ok {
        let half = horizon.div_ceil(2);
        let n = radii(horizon).len();
        let report = DecayReport { rows: rows.clone(), max_radius: max_radius.clone(), consistent_with_decay: false };
        for d in deltas {
            for h in 0..n {
                let last = report.fraction(horizon, d, h).cloned().unwrap_or_else(Q::zero);
                let mid = report.fraction(half, d, h).cloned().unwrap_or_else(Q::one);
                if last > mid || last >= rat::q(1, 2) {
                    ok = false;
                }
            }
        }
        let min_delta = deltas.iter().min().unwrap();
        if max_radius.last().map(|(_, r)| r >= min_delta).unwrap_or(true) {
            ok = false;
        }
    }
    DecayReport { rows, max_radius, consistent_with_decay: ok }
}

/// `(c/k) Σ_{j<k} L(j)^β r^β`.
pub fn holder_gap_bound(c: &Q, beta: u32, mohoc: &Mohoc, k: usize, r: &Q) -> Q {
    let rb = rat::pow_u(r, beta as u64);
    let mut s = Q::zero();
    let mut l = Q::one();
    for _ in 0..k {
        s += rat::pow_u(&l, beta as u64);
        l *= &mohoc.lambda;
    }
    c * s * rb / rat::int(k as i64)
}

/// `|α_{B(x;r)}(Avg_k f) − Avg_k f(x)|`.
pub fn pointwise_reduction_gap(space: &Space, mu: &AmbientMeasure, x: &Point, r: &Q, f: &Observable, k: usize) -> Result<Q> {
    if mu.ball_measure(x, r)?.is_zero() {
        return Err(Error::ZeroMeasure);
    }
    let a = ball_avg(space, mu, x, r, f, k)?;
    let b = birkhoff_avg(space, f, x, k)?;
    Ok((a - b).abs())
}

/// `Σ D_h C_h`.
pub fn blended_limit_predict(c_values: &[Q], d_weights: &[Q]) -> Result<Q> {
    if c_values.len() != d_weights.len() || c_values.is_empty() {
        return Err(Error::Invalid("need one weight per limit".into()));
    }
    if d_weights.iter().any(|d| d.is_negative()) || d_weights.iter().fold(Q::zero(), |a, d| a + d) != Q::one() {
        return Err(Error::Invalid("weights must be nonnegative and sum to 1".into()));
    }
    Ok(c_values.iter().zip(d_weights).fold(Q::zero(), |acc, (c, d)| acc + c * d))
}

/// CSV of a sweep: `k,value,decimal` plus optional per-ball weights.
pub fn sweep_csv(samples: &[(usize, Q, Option<Vec<Q>>)]) -> String {
    let n = samples.iter().filter_map(|s| s.2.as_ref().map(|w| w.len())).max().unwrap_or(0);
    let mut out = String::from("k,value,decimal");
    for h in 0..n {
        out.push_str(&format!(",weight_{h}"));
    }
    out.push('\n');
    for (k, v, w) in samples {
        out.push_str(&format!("{k},{},{}", rat::fmt_frac(v), rat::fmt_dec12(v)));
        for h in 0..n {
            let cell = w.as_ref().and_then(|w| w.get(h)).map(rat::fmt_frac).unwrap_or_default();
            out.push_str(&format!(",{cell}"));
        }
        out.push('\n');
    }
    out
}
