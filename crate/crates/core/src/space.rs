//! Points, metrics, maps and multi-balls for the shift and circle backends.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::rat::{self, Q};
use crate::{Error, Result};

pub type Word = Vec<u8>;

pub const MAX_ALPHABET: u8 = 16;

/// Primitive root of a nonempty word: the shortest `u` with `w = u^n`.
pub fn primitive_root(w: &[u8]) -> &[u8] {
    let n = w.len();
    for p in 1..=n {
        if n % p == 0 && (p..n).all(|i| w[i] == w[i - p]) {
            return &w[..p];
        }
    }
    w
}

/// Lexicographically least rotation.
pub fn minimal_rotation(w: &[u8]) -> Word {
    let n = w.len();
    (0..n)
        .map(|s| w[s..].iter().chain(&w[..s]).copied().collect::<Word>())
        .min()
        .unwrap_or_default()
}

pub fn symbol_char(s: u8) -> char {
    std::char::from_digit(s as u32, 16).unwrap_or('?')
}

pub fn word_string(w: &[u8]) -> String {
    w.iter().map(|&s| symbol_char(s)).collect()
}

pub fn parse_word(s: &str, alphabet: u8) -> Result<Word> {
    s.chars()
        .map(|c| match c.to_digit(16) {
            Some(d) if (d as u8) < alphabet => Ok(d as u8),
            _ => Err(Error::Parse(format!("symbol {c:?} outside alphabet of size {alphabet}"))),
        })
        .collect()
}

/// Length-then-lexicographic enumeration of nonempty words: index 1 is `0`.
pub fn shortlex_word(mut idx: u64, alphabet: u8) -> Word {
    assert!(idx >= 1);
    let a = alphabet as u64;
    let mut len = 1u32;
    let mut count = a;
    while idx > count {
        idx -= count;
        len += 1;
        count = a.pow(len);
    }
    let mut rank = idx - 1;
    let mut w = vec![0u8; len as usize];
    for i in (0..len as usize).rev() {
        w[i] = (rank % a) as u8;
        rank /= a;
    }
    w
}

/// Eventually periodic point `pre · per · per · …` in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ShiftPoint {
    pre: Word,
    per: Word,
}

impl ShiftPoint {
    pub fn new(pre: Word, per: Word) -> Result<Self> {
        if per.is_empty() {
            return Err(Error::Invalid("period must be nonempty".into()));
        }
        let mut per = primitive_root(&per).to_vec();
        let mut pre = pre;
        while let Some(&last) = pre.last() {
            if last != *per.last().unwrap() {
                break;
            }
            pre.pop();
            per.rotate_right(1);
        }
        Ok(ShiftPoint { pre, per })
    }

    pub fn periodic(per: Word) -> Result<Self> {
        Self::new(Vec::new(), per)
    }

    pub fn fixed(s: u8) -> Self {
        ShiftPoint { pre: Vec::new(), per: vec![s] }
    }

    pub fn preperiod(&self) -> &[u8] {
        &self.pre
    }

    pub fn period(&self) -> &[u8] {
        &self.per
    }

    pub fn symbol(&self, i: usize) -> u8 {
        if i < self.pre.len() {
            self.pre[i]
        } else {
            self.per[(i - self.pre.len()) % self.per.len()]
        }
    }

    pub fn prefix(&self, n: usize) -> Word {
        (0..n).map(|i| self.symbol(i)).collect()
    }

    pub fn max_symbol(&self) -> u8 {
        self.pre.iter().chain(&self.per).copied().max().unwrap_or(0)
    }

    /// `T_j x`.
    pub fn shift(&self, j: usize) -> Self {
        if j <= self.pre.len() {
            return ShiftPoint { pre: self.pre[j..].to_vec(), per: self.per.clone() };
        }
        let mut per = self.per.clone();
        let r = (j - self.pre.len()) % per.len();
        per.rotate_left(r);
        ShiftPoint { pre: Vec::new(), per }
    }

    /// First index where the two points differ, if any.
    pub fn first_difference(&self, other: &Self) -> Option<usize> {
        if self == other {
            return None;
        }
        let bound = self.pre.len().max(other.pre.len()) + self.per.len().lcm(&other.per.len());
        (0..bound).find(|&i| self.symbol(i) != other.symbol(i))
    }

    pub fn parse(s: &str, alphabet: u8) -> Result<Self> {
        let (pre, per) = s
            .split_once('|')
            .ok_or_else(|| Error::Parse(format!("shift point {s:?} needs the form pre|per")))?;
        let pre = parse_word(pre.trim(), alphabet)?;
        let per = parse_word(per.trim(), alphabet)?;
        if per.is_empty() {
            return Err(Error::Parse(format!("shift point {s:?} has an empty period")));
        }
        Self::new(pre, per)
    }
}

impl fmt::Display for ShiftPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}|{}", word_string(&self.pre), word_string(&self.per))
    }
}

/// Rational point of ℝ/ℤ, stored reduced in [0,1).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CirclePoint(Q);

impl CirclePoint {
    pub fn new(v: Q) -> Self {
        CirclePoint(rat::frac(&v))
    }

    pub fn value(&self) -> &Q {
        &self.0
    }

    /// `b^j t mod 1`.
    pub fn apply(&self, j: u64, b: u32) -> Self {
        let d = self.0.denom();
        let m = BigInt::from(b).modpow(&BigInt::from(j), d);
        let n = (self.0.numer() * m).mod_floor(d);
        CirclePoint(Q::new(n, d.clone()))
    }

    pub fn parse(s: &str) -> Result<Self> {
        let v = rat::parse(s)?;
        if v.is_negative() || v >= Q::one() {
            return Err(Error::Parse(format!("circle point {s:?} outside [0,1)")));
        }
        Ok(CirclePoint(v))
    }

    /// Circle point of the periodic word `w` under `×b`: `val_b(w) / (b^|w| - 1)`.
    pub fn from_periodic_word(w: &[u8], b: u32) -> Self {
        let bb = BigInt::from(b);
        let mut v = BigInt::zero();
        for &s in w {
            v = v * &bb + BigInt::from(s);
        }
        let den = num_traits::pow::pow(bb, w.len()) - 1;
        CirclePoint::new(Q::new(v, den))
    }
}

impl fmt::Display for CirclePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", rat::fmt_frac(&self.0))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Point {
    Shift(ShiftPoint),
    Circle(CirclePoint),
}

impl Point {
    pub fn as_shift(&self) -> Result<&ShiftPoint> {
        match self {
            Point::Shift(x) => Ok(x),
            Point::Circle(_) => Err(Error::Backend("expected a shift point".into())),
        }
    }

    pub fn as_circle(&self) -> Result<&CirclePoint> {
        match self {
            Point::Circle(t) => Ok(t),
            Point::Shift(_) => Err(Error::Backend("expected a circle point".into())),
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Shift(x) => x.fmt(f),
            Point::Circle(t) => t.fmt(f),
        }
    }
}

impl From<ShiftPoint> for Point {
    fn from(x: ShiftPoint) -> Self {
        Point::Shift(x)
    }
}

impl From<CirclePoint> for Point {
    fn from(t: CirclePoint) -> Self {
        Point::Circle(t)
    }
}

/// One-step shift of finite type; the full shift allows every transition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sft {
    alphabet: u8,
    allowed: Vec<Vec<bool>>,
}

impl Sft {
    pub fn full(alphabet: u8) -> Self {
        assert!((2..=MAX_ALPHABET).contains(&alphabet));
        Sft { alphabet, allowed: vec![vec![true; alphabet as usize]; alphabet as usize] }
    }

    pub fn new(allowed: Vec<Vec<bool>>) -> Result<Self> {
        let a = allowed.len();
        if !(2..=MAX_ALPHABET as usize).contains(&a) || allowed.iter().any(|r| r.len() != a) {
            return Err(Error::Invalid("transition matrix must be square with 2..=16 symbols".into()));
        }
        let s = Sft { alphabet: a as u8, allowed };
        if !s.is_irreducible() {
            return Err(Error::NotStronglyConnected);
        }
        Ok(s)
    }

    pub fn alphabet(&self) -> u8 {
        self.alphabet
    }

    pub fn is_full(&self) -> bool {
        self.allowed.iter().all(|r| r.iter().all(|&b| b))
    }

    pub fn allows(&self, a: u8, b: u8) -> bool {
        self.allowed[a as usize][b as usize]
    }

    pub fn successors(&self, a: u8) -> impl Iterator<Item = u8> + '_ {
        (0..self.alphabet).filter(move |&b| self.allows(a, b))
    }

    pub fn admits_word(&self, w: &[u8]) -> bool {
        w.iter().all(|&s| s < self.alphabet) && w.windows(2).all(|p| self.allows(p[0], p[1]))
    }

    pub fn admits_point(&self, x: &ShiftPoint) -> bool {
        let n = x.preperiod().len() + 2 * x.period().len();
        self.admits_word(&x.prefix(n))
    }

    fn reach_all(&self, from: u8, forward: bool) -> bool {
        let a = self.alphabet;
        let mut seen = vec![false; a as usize];
        let mut stack = vec![from];
        seen[from as usize] = true;
        while let Some(u) = stack.pop() {
            for v in 0..a {
                let e = if forward { self.allows(u, v) } else { self.allows(v, u) };
                if e && !seen[v as usize] {
                    seen[v as usize] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|b| b)
    }

    pub fn is_irreducible(&self) -> bool {
        self.reach_all(0, true) && self.reach_all(0, false)
    }

    /// Least `p` with every entry of `A^p` positive, if the matrix is primitive.
    pub fn primitivity_index(&self) -> Option<usize> {
        let a = self.alphabet as usize;
        let bound = (a - 1) * (a - 1) + 1;
        let mut reach = self.allowed.clone();
        for p in 1..=bound {
            if reach.iter().all(|r| r.iter().all(|&b| b)) {
                return Some(p);
            }
            let mut next = vec![vec![false; a]; a];
            for i in 0..a {
                for k in 0..a {
                    if reach[i][k] {
                        for j in 0..a {
                            next[i][j] |= self.allowed[k][j];
                        }
                    }
                }
            }
            reach = next;
        }
        None
    }
}

/// Modulus of Hölder continuity with `H ≡ 1` and `L(j) = Λ^j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mohoc {
    pub lambda: Q,
}

impl Mohoc {
    pub fn new(lambda: Q) -> Result<Self> {
        if lambda < Q::one() {
            return Err(Error::Invalid("Λ must be at least 1".into()));
        }
        Ok(Mohoc { lambda })
    }

    pub fn l(&self, j: u64) -> Q {
        rat::pow_u(&self.lambda, j)
    }

    pub fn h(&self, _j: u64) -> u32 {
        1
    }
}

/// Interval Følner sets `F_k = {0, …, k-1}`.
#[derive(Clone, Copy, Debug, Default)]
pub struct FolnerIntervals;

impl FolnerIntervals {
    pub fn set(&self, k: usize) -> std::ops::Range<usize> {
        0..k
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Space {
    Shift(Sft),
    Circle { base: u32 },
}

impl Space {
    pub fn full_shift(alphabet: u8) -> Self {
        Space::Shift(Sft::full(alphabet))
    }

    pub fn circle(base: u32) -> Self {
        assert!(base >= 2);
        Space::Circle { base }
    }

    pub fn mohoc(&self) -> Mohoc {
        match self {
            Space::Shift(_) => Mohoc { lambda: rat::int(2) },
            Space::Circle { base } => Mohoc { lambda: rat::int(*base as i64) },
        }
    }

    pub fn apply(&self, j: u64, x: &Point) -> Result<Point> {
        match (self, x) {
            (Space::Shift(_), Point::Shift(p)) => Ok(Point::Shift(p.shift(j as usize))),
            (Space::Circle { base }, Point::Circle(t)) => Ok(Point::Circle(t.apply(j, *base))),
            _ => Err(Error::Backend("point does not live on this space".into())),
        }
    }

    pub fn check_point(&self, x: &Point) -> Result<()> {
        match (self, x) {
            (Space::Shift(s), Point::Shift(p)) => {
                if s.admits_point(p) {
                    Ok(())
                } else {
                    Err(Error::Invalid(format!("point {p} is not in the subshift")))
                }
            }
            (Space::Circle { .. }, Point::Circle(_)) => Ok(()),
            _ => Err(Error::Backend("point does not live on this space".into())),
        }
    }
}

pub fn shift_apply(j: usize, x: &ShiftPoint) -> ShiftPoint {
    x.shift(j)
}

pub fn circle_apply(j: u64, b: u32, t: &CirclePoint) -> CirclePoint {
    t.apply(j, b)
}

pub fn circle_dist(s: &Q, t: &Q) -> Q {
    let d = rat::frac(&(s - t));
    let e = Q::one() - &d;
    d.min(e)
}

pub fn rho(x: &Point, y: &Point) -> Result<Q> {
    match (x, y) {
        (Point::Shift(a), Point::Shift(b)) => Ok(match a.first_difference(b) {
            None => Q::zero(),
            Some(i) => rat::pow2_neg(i as u64 + 1),
        }),
        (Point::Circle(s), Point::Circle(t)) => Ok(circle_dist(s.value(), t.value())),
        _ => Err(Error::Backend("rho needs points on the same backend".into())),
    }
}

/// Depth of the cylinder equal to `B(x; r)`.
pub fn ball_depth(r: &Q) -> Result<usize> {
    if !r.is_positive() {
        return Err(Error::Invalid("radius must be positive".into()));
    }
    let mut d = 0usize;
    while rat::pow2_neg(d as u64 + 1) >= *r {
        d += 1;
    }
    Ok(d)
}

pub fn ball_as_cylinder(x: &ShiftPoint, r: &Q) -> Result<Word> {
    Ok(x.prefix(ball_depth(r)?))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiBall {
    entries: Vec<(Point, Q)>,
}

impl MultiBall {
    pub fn new(entries: Vec<(Point, Q)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Invalid("multi-ball needs at least one ball".into()));
        }
        if entries.iter().any(|(_, r)| !r.is_positive()) {
            return Err(Error::Invalid("radii must be positive".into()));
        }
        let shift = matches!(entries[0].0, Point::Shift(_));
        if entries.iter().any(|(p, _)| matches!(p, Point::Shift(_)) != shift) {
            return Err(Error::Backend("mixed backends in multi-ball".into()));
        }
        Ok(MultiBall { entries })
    }

    pub fn single(x: Point, r: Q) -> Result<Self> {
        Self::new(vec![(x, r)])
    }

    pub fn entries(&self) -> &[(Point, Q)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Merge repeated centers, keeping the largest radius, in first-seen order.
    pub fn dedupe(&self) -> MultiBall {
        let mut out: Vec<(Point, Q)> = Vec::new();
        for (p, r) in &self.entries {
            match out.iter_mut().find(|(q, _)| q == p) {
                Some(e) => {
                    if *r > e.1 {
                        e.1 = r.clone()
                    }
                }
                None => out.push((p.clone(), r.clone())),
            }
        }
        MultiBall { entries: out }
    }

    pub fn contains(&self, y: &Point) -> Result<bool> {
        for (c, r) in &self.entries {
            if rho(c, y)? < *r {
                return Ok(true);
            }
        }
        Ok(false)
    }

    pub fn pairwise_disjoint(&self) -> bool {
        let n = self.entries.len();
        for i in 0..n {
            for j in i + 1..n {
                if !balls_disjoint(&self.entries[i], &self.entries[j]) {
                    return false;
                }
            }
        }
        true
    }
}

fn balls_disjoint(a: &(Point, Q), b: &(Point, Q)) -> bool {
    match (&a.0, &b.0) {
        (Point::Shift(x), Point::Shift(y)) => {
            let (Ok(u), Ok(v)) = (ball_as_cylinder(x, &a.1), ball_as_cylinder(y, &b.1)) else {
                return false;
            };
            !(u.starts_with(&v) || v.starts_with(&u))
        }
        (Point::Circle(s), Point::Circle(t)) => circle_dist(s.value(), t.value()) >= &a.1 + &b.1,
        _ => false,
    }
}

pub fn multiball_dedupe(mb: &MultiBall) -> MultiBall {
    mb.dedupe()
}

pub fn multiball_pairwise_disjoint(mb: &MultiBall) -> bool {
    mb.pairwise_disjoint()
}
