//! Specification machinery: moduli, δ-tracing, sampling polynomials, block
//! plans and oscillation points.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::averaging::{LocallyConstantFn, Observable};
use crate::ergopt::{max_mean_cycle, min_mean_cycle};
use crate::measure::{weakstar_dist, EmpiricalMeasure, InvariantMeasure, WeakStarInterval};
use crate::rat::{self, Q};
use crate::space::{rho, shortlex_word, word_string, Point, ShiftPoint, Sft, Space, Word};
use crate::{Error, Result};

/// `d(δ) = min{d ≥ 0 : 2^{-(d+1)} < δ}`.
pub fn tracing_depth(delta: &Q) -> Result<usize> {
    if !delta.is_positive() || *delta >= Q::one() {
        return Err(Error::Invalid("δ must lie in (0,1)".into()));
    }
    let mut d = 0;
    while rat::pow2_neg(d as u64 + 1) >= *delta {
        d += 1;
    }
    Ok(d)
}

/// Gap requirement `M_δ(j)` between consecutive windows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpecModulus {
    Constant(usize),
    /// `gaps[j-1]` for the gap before window `j`; the last entry repeats.
    PerIndex(Vec<usize>),
}

impl SpecModulus {
    pub fn gap(&self, j: usize) -> usize {
        match self {
            SpecModulus::Constant(m) => *m,
            SpecModulus::PerIndex(v) => v[(j.max(1) - 1).min(v.len() - 1)],
        }
    }
}

pub fn modulus_full_shift(delta: &Q) -> Result<SpecModulus> {
    Ok(SpecModulus::Constant(tracing_depth(delta)? + 1))
}

/// Constant modulus for a mixing SFT: `d(δ) + 1 + primitivity index`.
pub fn modulus_sft(sft: &Sft, delta: &Q) -> Result<SpecModulus> {
    let d = tracing_depth(delta)?;
    if sft.is_full() {
        return Ok(SpecModulus::Constant(d + 1));
    }
    let p = sft
        .primitivity_index()
        .ok_or_else(|| Error::Invalid("subshift is not mixing; no constant modulus".into()))?;
    Ok(SpecModulus::Constant(d + 1 + p))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    pub a: usize,
    pub b: usize,
    pub x: ShiftPoint,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpecificationPlan {
    segments: Vec<Segment>,
}

impl SpecificationPlan {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::Invalid("specification needs a segment".into()));
        }
        for (j, s) in segments.iter().enumerate() {
            if s.b < s.a {
                return Err(Error::Invalid(format!("segment {j} has b < a")));
            }
            if j > 0 && s.a <= segments[j - 1].b {
                return Err(Error::Invalid(format!("segment {j} overlaps its predecessor")));
            }
        }
        Ok(SpecificationPlan { segments })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn is_spaced(&self, modulus: &SpecModulus) -> bool {
        (1..self.segments.len()).all(|j| self.segments[j].a - self.segments[j - 1].b >= modulus.gap(j))
    }
}

/// Lexicographically least word of length `len` that can follow `from`
/// and be followed by `to`.
fn connector(sft: &Sft, from: Option<u8>, to: Option<u8>, len: usize) -> Result<Word> {
    let a = sft.alphabet();
    // ok[i][s]: placing s at position i can be completed
    let mut ok = vec![vec![false; a as usize]; len];
    for i in (0..len).rev() {
        for s in 0..a {
            ok[i][s as usize] = if i + 1 == len {
                to.is_none_or(|t| sft.allows(s, t))
            } else {
                sft.successors(s).any(|t| ok[i + 1][t as usize])
            };
        }
    }
    let fail = || Error::Connector { from: from.unwrap_or(0), to: to.unwrap_or(0), len };
    if len == 0 {
        return match (from, to) {
            (Some(f), Some(t)) if !sft.allows(f, t) => Err(fail()),
            _ => Ok(Vec::new()),
        };
    }
    let mut w = Vec::with_capacity(len);
    let mut prev = from;
    for row in ok.iter() {
        let s = (0..a)
            .find(|&s| row[s as usize] && prev.is_none_or(|p| sft.allows(p, s)))
            .ok_or_else(fail)?;
        w.push(s);
        prev = Some(s);
    }
    Ok(w)
}

/// Periodic continuation after symbol `last`: a connector to the least
/// self-looping symbol (or to a shortest cycle through the least symbol).
fn tail_after(sft: &Sft, last: Option<u8>) -> Result<(Word, Word)> {
    let a = sft.alphabet();
    if let Some(z) = (0..a).find(|&z| sft.allows(z, z)) {
        for len in 0..=a as usize {
            if let Ok(w) = connector(sft, last, Some(z), len) {
                return Ok((w, vec![z]));
            }
        }
    }
    for cyc in 1..=a as usize {
        if let Ok(mut c) = connector(sft, Some(0), Some(0), cyc - 1) {
            c.push(0);
            for len in 0..=a as usize {
                if let Ok(w) = connector(sft, last, Some(c[0]), len) {
                    return Ok((w, c));
                }
            }
        }
    }
    Err(Error::Infeasible("no periodic continuation".into()))
}

/// δ-tracing `y` of `ξ`: each `x_j` is copied onto `a_j ..= b_j + d(δ)` and
/// gaps are filled with connecting words.
pub fn trace_point(sft: &Sft, xi: &SpecificationPlan, delta: &Q, modulus: &SpecModulus) -> Result<ShiftPoint> {
    let d = tracing_depth(delta)?;
    let need = d + sft.primitivity_index().unwrap_or(usize::MAX - d);
    let segs = xi.segments();
    for (j, s) in segs.iter().enumerate() {
        if !sft.admits_point(&s.x) {
            return Err(Error::Invalid(format!("segment {j} point {} is not in the subshift", s.x)));
        }
        if j > 0 {
            let gap = s.a - segs[j - 1].b;
            if gap < modulus.gap(j) || gap < need {
                return Err(Error::Spacing(j));
            }
        }
    }
    let mut y: Word = connector(sft, None, Some(segs[0].x.symbol(0)), segs[0].a)?;
    for (j, s) in segs.iter().enumerate() {
        if j > 0 {
            let len = s.a - (segs[j - 1].b + d) - 1;
            let w = connector(sft, y.last().copied(), Some(s.x.symbol(0)), len)?;
            y.extend(w);
        }
        y.extend(s.x.prefix(s.b - s.a + d + 1));
    }
    let (bridge, period) = tail_after(sft, y.last().copied())?;
    y.extend(bridge);
    ShiftPoint::new(y, period)
}

/// Exhaustive check of `ρ(T_i x_j, T_{a_j+i} y) < δ`.
pub fn is_delta_tracing(y: &ShiftPoint, xi: &SpecificationPlan, delta: &Q) -> bool {
    xi.segments().iter().all(|s| {
        (0..=s.b - s.a).all(|i| {
            let u = Point::Shift(s.x.shift(i));
            let v = Point::Shift(y.shift(s.a + i));
            rho(&u, &v).map(|r| r < *delta).unwrap_or(false)
        })
    })
}

/// Integer-valued polynomial in the binomial basis: `π(t) = Σ c_i C(t, i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SamplingPoly {
    binomial: Vec<BigInt>,
    k_min: u64,
}

fn binom(t: &BigInt, i: usize) -> BigInt {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for j in 0..i {
        num *= t - BigInt::from(j);
        den *= BigInt::from(j + 1);
    }
    num / den
}

fn eval_monomial(c: &[Q], t: &Q) -> Q {
    c.iter().rev().fold(Q::zero(), |acc, ci| acc * t + ci)
}

/// `1 + max |c_i / c_n|`: every real root has absolute value below this.
fn cauchy_bound(c: &[Q]) -> u64 {
    let lead = c.last().unwrap();
    let m = c[..c.len() - 1].iter().map(|ci| (ci / lead).abs()).max().unwrap_or_else(Q::zero);
    (rat::floor(&m) + BigInt::from(2)).to_u64().unwrap_or(u64::MAX)
}

impl SamplingPoly {
    /// Validate monomial coefficients `c_0, c_1, …`.
    pub fn from_monomial(coeffs: &[Q]) -> Result<Self> {
        let mut c = coeffs.to_vec();
        while c.len() > 1 && c.last().unwrap().is_zero() {
            c.pop();
        }
        let deg = c.len().saturating_sub(1);
        if deg == 0 {
            return Err(Error::Invalid("sampling polynomial must be nonconstant".into()));
        }
        let vals: Vec<Q> = (0..=deg).map(|t| eval_monomial(&c, &rat::int(t as i64))).collect();
        let mut diffs = vals;
        let mut binomial = Vec::new();
        for _ in 0..=deg {
            if !diffs[0].is_integer() {
                return Err(Error::Invalid("polynomial is not integer-valued".into()));
            }
            binomial.push(diffs[0].to_integer());
            diffs = diffs.windows(2).map(|w| &w[1] - &w[0]).collect();
        }
        if !c.last().unwrap().is_positive() {
            return Err(Error::Invalid("polynomial takes negative values on ℕ".into()));
        }
        let mut p = SamplingPoly { binomial, k_min: 1 };
        let bound = cauchy_bound(&c).min(1 << 20);
        for k in 1..=bound {
            if p.eval(k) < BigInt::one() {
                return Err(Error::Invalid(format!("polynomial takes value {} < 1 at {k}", p.eval(k))));
            }
        }
        // Δπ(t) = π(t+1) − π(t) has its real roots below its own Cauchy bound.
        let mut dc = vec![Q::zero(); deg];
        for (i, ci) in c.iter().enumerate().skip(1) {
            // (t+1)^i − t^i = Σ_{j<i} C(i,j) t^j
            for (j, slot) in dc.iter_mut().enumerate().take(i) {
                *slot += ci * Q::from_integer(binom(&BigInt::from(i), j));
            }
        }
        let dbound = if deg == 1 { 1 } else { cauchy_bound(&dc).min(1 << 20) };
        let mut k_min = 1;
        for k in 1..=dbound {
            if p.eval(k + 1) <= p.eval(k) {
                k_min = k + 1;
            }
        }
        p.k_min = k_min;
        Ok(p)
    }

    pub fn identity() -> Self {
        Self::from_monomial(&[Q::zero(), Q::one()]).unwrap()
    }

    pub fn binomial_coefficients(&self) -> &[BigInt] {
        &self.binomial
    }

    pub fn k_min(&self) -> u64 {
        self.k_min
    }

    pub fn eval(&self, k: u64) -> BigInt {
        let t = BigInt::from(k);
        self.binomial.iter().enumerate().fold(BigInt::zero(), |acc, (i, c)| acc + c * binom(&t, i))
    }

    pub fn eval_usize(&self, k: u64) -> Option<usize> {
        self.eval(k).to_usize()
    }

    /// Parse `"t^2/2 + t/2"`, `"3t - 1"`, `"t"`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad polynomial {s:?}"));
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(bad());
        }
        let mut terms = Vec::new();
        let mut cur = String::new();
        for (i, ch) in compact.chars().enumerate() {
            if (ch == '+' || ch == '-') && i > 0 {
                terms.push(std::mem::take(&mut cur));
            }
            cur.push(ch);
        }
        terms.push(cur);
        let mut coeffs: Vec<Q> = Vec::new();
        for term in terms {
            let (sign, body) = match term.strip_prefix('-') {
                Some(b) => (-Q::one(), b.to_string()),
                None => (Q::one(), term.trim_start_matches('+').to_string()),
            };
            let (coef, power) = match body.find('t') {
                None => (rat::parse(&body).map_err(|_| bad())?, 0usize),
                Some(pos) => {
                    let before = &body[..pos];
                    let mut after = &body[pos + 1..];
                    let mut power = 1usize;
                    if let Some(rest) = after.strip_prefix('^') {
                        let digits: String = rest.chars().take_while(|c| c.is_ascii_digit()).collect();
                        power = digits.parse().map_err(|_| bad())?;
                        after = &rest[digits.len()..];
                    }
                    let mut c = match before.trim_end_matches('*') {
                        "" => Q::one(),
                        b => rat::parse(b).map_err(|_| bad())?,
                    };
                    if let Some(den) = after.strip_prefix('/') {
                        c /= rat::parse(den).map_err(|_| bad())?;
                    } else if !after.is_empty() {
                        return Err(bad());
                    }
                    (c, power)
                }
            };
            if coeffs.len() <= power {
                coeffs.resize(power + 1, Q::zero());
            }
            coeffs[power] += sign * coef;
        }
        Self::from_monomial(&coeffs)
    }
}

pub fn sampling_poly_validate(coeffs: &[Q]) -> Result<SamplingPoly> {
    SamplingPoly::from_monomial(coeffs)
}

/// First `h` members of the shift family share depth at most this.
fn family_depth(alphabet: u8, h: usize) -> usize {
    shortlex_word(h as u64, alphabet).len()
}

/// Block plan for `ν = Σ (p_i/q) θ_i`.
#[derive(Clone, Debug)]
pub struct OscillationPlan {
    pub sft: Sft,
    pub target: InvariantMeasure,
    pub words: Vec<Word>,
    pub p: Vec<u64>,
    pub q: u64,
    pub gap: usize,
    pub delta: Q,
    pub depth: usize,
    pub eps: Q,
    pub functions: usize,
    pub pi: SamplingPoly,
    /// `b_{-1}`; zero for a standalone block plan.
    pub offset: usize,
    /// `x_{-1}`.
    pub base: ShiftPoint,
    pub threshold: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockCheck {
    pub k: u64,
    pub n: usize,
    pub block: usize,
    /// Worst `|Avg_{π(k)} f_h(y) − ∫ f_h dν|` over `h ≤ H`.
    pub error: Q,
    pub claim_i: Q,
    pub claim_i_bound: Q,
    pub claim_ii: Q,
    pub claim_iii: Q,
    pub within_eps: bool,
}

impl BlockCheck {
    pub fn claims_hold(&self, eps: &Q) -> bool {
        let third = eps / rat::int(3);
        self.claim_i <= self.claim_i_bound && self.claim_ii < third && self.claim_iii < third
    }
}

fn split_weights(nu: &InvariantMeasure) -> Result<(Vec<Word>, Vec<u64>, u64)> {
    let comps = nu.components();
    let q = comps.iter().fold(BigInt::one(), |acc, (w, _)| acc.lcm(w.denom()));
    let q64 = q.to_u64().ok_or_else(|| Error::Invalid("weights have huge denominators".into()))?;
    let p = comps
        .iter()
        .map(|(w, _)| (w * Q::from_integer(q.clone())).to_integer().to_u64().unwrap())
        .collect();
    Ok((comps.into_iter().map(|(_, w)| w).collect(), p, q64))
}

impl OscillationPlan {
    #[allow(clippy::too_many_arguments)]
    fn build(
        sft: &Sft,
        nu: &InvariantMeasure,
        eps: &Q,
        h: usize,
        pi: &SamplingPoly,
        delta: Option<&Q>,
        offset: usize,
        base: ShiftPoint,
    ) -> Result<Self> {
        if h == 0 || !eps.is_positive() {
            return Err(Error::Invalid("need ε > 0 and at least one function".into()));
        }
        let (words, p, q) = split_weights(nu)?;
        for w in &words {
            let mut cyc = w.clone();
            cyc.push(w[0]);
            if !sft.admits_word(&cyc) {
                return Err(Error::Invalid(format!("orbit {} is not in the subshift", word_string(w))));
            }
        }
        let m = family_depth(sft.alphabet(), h);
        let needed = rat::pow2_neg(m as u64);
        let delta = match delta {
            Some(d) if *d < needed => d.clone(),
            _ => needed,
        };
        let depth = tracing_depth(&delta)?;
        let SpecModulus::Constant(gap) = modulus_sft(sft, &delta)? else { unreachable!() };
        Ok(OscillationPlan {
            sft: sft.clone(),
            target: nu.clone(),
            words,
            p,
            q,
            gap,
            delta,
            depth,
            eps: eps.clone(),
            functions: h,
            pi: pi.clone(),
            offset,
            base,
            threshold: None,
        })
    }

    pub fn blocks(&self) -> usize {
        self.words.len()
    }

    /// `K_k = ⌊(π(k) − b_{-1} − I·N − 1)/q⌋`, or `None` when negative.
    pub fn block_length(&self, k: u64) -> Option<usize> {
        let n = self.pi.eval(k);
        let used = BigInt::from(self.offset + self.blocks() * self.gap + 1);
        if n < used {
            return None;
        }
        ((n - used) / BigInt::from(self.q)).to_usize()
    }

    /// `(a_i, b_i)` for `i = 0..I`.
    pub fn segment_table(&self, big_k: usize) -> Vec<(usize, usize)> {
        let mut acc = 0usize;
        let mut out = Vec::new();
        for i in 0..self.blocks() {
            let a = self.offset + (i + 1) * self.gap + big_k * acc;
            acc += self.p[i] as usize;
            let b = self.offset + (i + 1) * self.gap + big_k * acc - 1;
            out.push((a, b));
        }
        out
    }

    pub fn specification(&self, big_k: usize) -> Result<SpecificationPlan> {
        if big_k == 0 {
            return Err(Error::Invalid("block length must be positive".into()));
        }
        let mut segs = vec![Segment { a: 0, b: self.offset, x: self.base.clone() }];
        for ((a, b), w) in self.segment_table(big_k).into_iter().zip(&self.words) {
            segs.push(Segment { a, b, x: ShiftPoint::periodic(w.clone())? });
        }
        SpecificationPlan::new(segs)
    }

    pub fn trace(&self, big_k: usize) -> Result<ShiftPoint> {
        let xi = self.specification(big_k)?;
        trace_point(&self.sft, &xi, &self.delta, &SpecModulus::Constant(self.gap))
    }

    fn family(&self) -> Vec<LocallyConstantFn> {
        (1..=self.functions as u64)
            .map(|h| LocallyConstantFn::indicator(self.sft.alphabet(), &shortlex_word(h, self.sft.alphabet())))
            .collect()
    }

    /// `[(IN+1) + (N+1) + (I−1)N + q] · max|f| / π(k)`.
    pub fn claim_i_bound(&self, n: usize) -> Q {
        let i = self.blocks() as i64;
        let nn = self.gap as i64;
        let total = (i * nn + 1) + (nn + 1) + (i - 1) * nn + self.q as i64;
        rat::q(total, n as i64)
    }

    /// Largest partial-period deviation `max_{r<|w|} |S_r f − r ∫ f dθ|` per block, per function.
    fn period_deviation(&self) -> Vec<Vec<Q>> {
        let fam = self.family();
        self.words
            .iter()
            .map(|w| {
                let x = ShiftPoint::periodic(w.clone()).unwrap();
                fam.iter()
                    .map(|f| {
                        let vals: Vec<Q> = (0..w.len()).map(|j| f.eval(&x.shift(j))).collect();
                        let mean = vals.iter().fold(Q::zero(), |a, v| a + v) / rat::int(w.len() as i64);
                        let mut s = Q::zero();
                        let mut worst = Q::zero();
                        for (r, v) in vals.iter().enumerate() {
                            let dev = (&s - &mean * rat::int(r as i64)).abs();
                            worst = worst.max(dev);
                            s += v;
                        }
                        worst
                    })
                    .collect()
            })
            .collect()
    }

    /// Least `k ≥ max(k0, k_min)` after which the three claim bounds stay below `ε/3`.
    pub fn compute_threshold(&mut self, k0: u64) -> Result<u64> {
        let start = k0.max(self.pi.k_min()).max(1);
        let fam = self.family();
        let osc = fam.iter().map(|f| f.max() - f.min()).max().unwrap();
        if self.eps > osc {
            self.threshold = Some(start);
            return Ok(start);
        }
        let third = &self.eps / rat::int(3);
        let dev = self.period_deviation();
        let worst_dev = (0..fam.len())
            .map(|h| dev.iter().fold(Q::zero(), |a, row| a + &row[h]))
            .max()
            .unwrap();
        let sup = fam.iter().map(|f| f.max().abs().max(f.min().abs())).max().unwrap();
        for k in start..start + (1 << 24) {
            let Some(big_k) = self.block_length(k).filter(|&b| b >= 1) else { continue };
            let Some(n) = self.pi.eval_usize(k) else { break };
            let c1 = self.claim_i_bound(n) * &sup;
            let c3 = &worst_dev / rat::int((big_k as u64 * self.q) as i64);
            if c1 < third && c3 < third {
                self.threshold = Some(k);
                return Ok(k);
            }
        }
        Err(Error::Infeasible("no threshold found".into()))
    }

    /// Evaluate the traced point at `n = π(k)` and the three claim terms.
    pub fn check(&self, k: u64) -> Result<BlockCheck> {
        let big_k = self.block_length(k).filter(|&b| b >= 1).ok_or_else(|| {
            Error::Invalid(format!("π({k}) is too small for a block"))
        })?;
        let n = self.pi.eval_usize(k).ok_or_else(|| Error::Invalid("π(k) overflows".into()))?;
        let y = self.trace(big_k)?;
        let table = self.segment_table(big_k);
        let fam = self.family();
        let space = Space::Shift(self.sft.clone());
        let mut error = Q::zero();
        let mut claim_i = Q::zero();
        let mut claim_ii = Q::zero();
        let mut claim_iii = Q::zero();
        let sup = fam.iter().map(|f| f.max().abs().max(f.min().abs())).max().unwrap();
        for f in &fam {
            let vals: Vec<Q> = (0..n).map(|j| f.eval(&y.shift(j))).collect();
            let total = vals.iter().fold(Q::zero(), |a, v| a + v);
            let avg = &total / rat::int(n as i64);
            let integral = self.target.integrate(&space, &Observable::Shift(f.clone()))?;
            error = error.max((&avg - &integral).abs());
            let mut block_sum = Q::zero();
            let mut traced = Q::zero();
            let mut copied = Q::zero();
            for ((a, b), (w, p)) in table.iter().zip(self.words.iter().zip(&self.p)) {
                let len = b - a + 1;
                let ys: Q = vals[*a..=*b].iter().fold(Q::zero(), |acc, v| acc + v);
                let x = ShiftPoint::periodic(w.clone())?;
                let xs: Q = (0..len).fold(Q::zero(), |acc, j| acc + f.eval(&x.shift(j)));
                block_sum += &ys;
                let wq = rat::q(*p as i64, self.q as i64);
                let lenq = rat::int(len as i64);
                traced += &wq * (&ys - &xs) / &lenq;
                let theta = InvariantMeasure::PeriodicOrbit(w.clone()).integrate(&space, &Observable::Shift(f.clone()))?;
                copied += &wq * (&xs / &lenq - theta);
            }
            let block_avg = block_sum / rat::int((big_k as u64 * self.q) as i64);
            claim_i = claim_i.max((&avg - block_avg).abs());
            claim_ii = claim_ii.max(traced.abs());
            claim_iii = claim_iii.max(copied.abs());
        }
        Ok(BlockCheck {
            k,
            n,
            block: big_k,
            within_eps: error < self.eps,
            error,
            claim_i,
            claim_i_bound: self.claim_i_bound(n) * sup,
            claim_ii,
            claim_iii,
        })
    }
}

/// Block plan along `π` with `x_{-1} = base` on `[0,0]`.
pub fn block_plan(
    sft: &Sft,
    nu: &InvariantMeasure,
    eps: &Q,
    functions: usize,
    k0: u64,
    pi: &SamplingPoly,
    delta: Option<&Q>,
    base: &ShiftPoint,
) -> Result<OscillationPlan> {
    let mut plan = OscillationPlan::build(sft, nu, eps, functions, pi, delta, 0, base.clone())?;
    plan.compute_threshold(k0)?;
    Ok(plan)
}

#[derive(Clone, Debug)]
pub struct Checkpoint {
    pub l: usize,
    pub poly: usize,
    pub k: u64,
    pub n: usize,
    pub target: InvariantMeasure,
    pub dist: WeakStarInterval,
    pub bound: Q,
}

impl Checkpoint {
    pub fn certified(&self) -> bool {
        self.dist.hi < self.bound
    }
}

#[derive(Clone, Debug)]
pub struct OscillationRun {
    pub prefix: Word,
    pub checkpoints: Vec<Checkpoint>,
    pub planned_ends: Vec<usize>,
    /// Length of the committed prefix after each checkpoint.
    pub history: Vec<usize>,
}

impl OscillationRun {
    pub fn all_certified(&self) -> bool {
        self.checkpoints.iter().all(Checkpoint::certified)
    }

    pub fn levels_reached(&self, polys: usize) -> usize {
        let mut l = 0;
        while (0..polys).all(|p| self.checkpoints.iter().any(|c| c.l == l + 1 && c.poly == p && c.certified())) {
            l += 1;
        }
        l
    }
}

#[derive(Clone, Debug)]
pub struct OscillationOptions {
    /// Number of checkpoint levels `ℓ = 1..=L`.
    pub levels: usize,
    /// Fraction of the horizon reached by the last planned end.
    pub top_fraction: Q,
}

impl Default for OscillationOptions {
    fn default() -> Self {
        OscillationOptions { levels: 4, top_fraction: rat::q(9, 10) }
    }
}

/// `⌊c · H^{(ℓ−1)/(L−1)}⌋` for `ℓ = 1..=L`: planned least sample sizes.
pub fn planned_ends(horizon: usize, levels: usize, top: &Q) -> Vec<usize> {
    if levels == 1 {
        return vec![0];
    }
    let h = BigInt::from(horizon);
    (1..=levels)
        .map(|l| {
            let e = (l - 1) as u32;
            let r = (levels - 1) as u32;
            // largest m with (m / c)^r ≤ H^e
            let hp = num_traits::pow::pow(h.clone(), e as usize);
            let (mut lo, mut hi) = (0usize, horizon + 1);
            while lo < hi {
                let mid = (lo + hi).div_ceil(2);
                let v = Q::from_integer(BigInt::from(mid)) / top;
                if rat::pow_u(&v, r as u64) <= Q::from_integer(hp.clone()) {
                    lo = mid;
                } else {
                    hi = mid - 1;
                }
            }
            lo
        })
        .collect()
}

/// `M_ℓ = ⌈log₂(4ℓ)⌉`.
pub fn checkpoint_depth(l: usize) -> usize {
    rat::ceil_log2(4 * l as u64) as usize
}

fn certify(space: &Space, prefix: &[u8], n: usize, nu: &InvariantMeasure, l: usize) -> Result<WeakStarInterval> {
    let x = Point::Shift(ShiftPoint::new(prefix.to_vec(), vec![0])?);
    let emp = EmpiricalMeasure::new(x, n)?;
    weakstar_dist(space, &emp, nu, checkpoint_depth(l))
}

/// Grow a prefix whose empirical measures visit `ν_1, ν_2, …` along every `π ∈ Π`.
///
/// Level `ℓ` targets `targets[(ℓ−1) mod len]` and needs, for each `π`, a
/// sample size `n = π(k) ≥ e_ℓ` with a certified enclosure below `1/ℓ`. The
/// planned ends `e_ℓ` grow geometrically up to a fixed fraction of the
/// horizon. Committed symbols are never changed.
pub fn oscillation_compile(
    sft: &Sft,
    targets: &[InvariantMeasure],
    polys: &[SamplingPoly],
    horizon: usize,
    opts: &OscillationOptions,
) -> Result<OscillationRun> {
    if targets.is_empty() || polys.is_empty() || opts.levels == 0 {
        return Err(Error::Invalid("need targets, polynomials and at least one level".into()));
    }
    let space = Space::Shift(sft.clone());
    let ends = planned_ends(horizon, opts.levels, &opts.top_fraction);
    let mut committed: Word = Vec::new();
    let mut last_k: Vec<u64> = polys.iter().map(|p| p.k_min().saturating_sub(1)).collect();
    let mut checkpoints = Vec::new();
    let mut history = Vec::new();
    'levels: for l in 1..=opts.levels {
        let nu = &targets[(l - 1) % targets.len()];
        let m = checkpoint_depth(l);
        let sym_depth = family_depth(sft.alphabet(), m);
        let bound = rat::q(1, l as i64);
        for (pi_idx, pi) in polys.iter().enumerate() {
            let mut k = last_k[pi_idx] + 1;
            let found = loop {
                let Some(n) = pi.eval_usize(k) else { break None };
                if n + sym_depth - 1 > horizon {
                    break None;
                }
                if n < ends[l - 1].max(1) {
                    k += 1;
                    continue;
                }
                if n + sym_depth - 1 <= committed.len() {
                    let dist = certify(&space, &committed, n, nu, l)?;
                    if dist.hi < bound {
                        break Some((n, dist, None));
                    }
                    k += 1;
                    continue;
                }
                let base = ShiftPoint::new(committed.clone(), vec![0])?;
                let mut plan = OscillationPlan::build(sft, nu, &bound, m, pi, None, 0, base)?;
                plan.offset = (committed.len() as i64 - 1 - plan.depth as i64).max(0) as usize;
                let Some(big_k) = plan.block_length(k).filter(|&b| b >= 1) else {
                    k += 1;
                    continue;
                };
                let y = plan.trace(big_k)?;
                let candidate = y.prefix(n + sym_depth - 1);
                debug_assert!(candidate.starts_with(&committed));
                let dist = certify(&space, &candidate, n, nu, l)?;
                if dist.hi < bound {
                    break Some((n, dist, Some(candidate)));
                }
                k += 1;
            };
            let Some((n, dist, candidate)) = found else {
                if l == 1 && checkpoints.is_empty() {
                    return Err(Error::Infeasible("horizon too small for the first checkpoint".into()));
                }
                break 'levels;
            };
            if let Some(c) = candidate {
                if !c.starts_with(&committed) {
                    return Err(Error::Infeasible("extension would edit committed symbols".into()));
                }
                committed = c;
            }
            last_k[pi_idx] = k;
            checkpoints.push(Checkpoint { l, poly: pi_idx, k, n, target: nu.clone(), dist, bound: bound.clone() });
            history.push(committed.len());
        }
    }
    Ok(OscillationRun { prefix: committed, checkpoints, planned_ends: ends, history })
}

/// Witness orbits of the extreme cycle means of `f`, maximum first.
pub fn extreme_targets(f: &LocallyConstantFn, sft: &Sft) -> Result<Vec<InvariantMeasure>> {
    let (_, wmax) = max_mean_cycle(f, sft)?;
    let (_, wmin) = min_mean_cycle(f, sft)?;
    Ok(vec![InvariantMeasure::orbit(&wmax)?, InvariantMeasure::orbit(&wmin)?])
}

#[derive(Clone, Debug)]
pub struct LiWuReport {
    pub abar: Q,
    pub aunder: Q,
    pub burn_in: usize,
    pub last_k: usize,
    pub running_max: Q,
    pub running_min: Q,
    pub gap_max: Q,
    pub gap_min: Q,
    /// `(k, running max gap, running min gap)` over `[burn_in, k]` at doubling `k`.
    pub gap_series: Vec<(usize, Q, Q)>,
}

/// Running extremes of `Avg_k f` over `k ∈ [burn_in, horizon]` against `a̅`, `a̲`.
pub fn li_wu_check(prefix: &[u8], f: &LocallyConstantFn, sft: &Sft, horizon: usize, burn_in: Option<usize>) -> Result<LiWuReport> {
    let (abar, _) = max_mean_cycle(f, sft)?;
    let (aunder, _) = min_mean_cycle(f, sft)?;
    let m = f.depth();
    if prefix.len() < m {
        return Err(Error::Invalid("prefix shorter than the function depth".into()));
    }
    let last_k = horizon.min(prefix.len() + 1 - m);
    let burn_in = burn_in.unwrap_or_else(|| (horizon as f64).sqrt().ceil() as usize).clamp(1, last_k);
    let mut s = Q::zero();
    let mut run_max: Option<Q> = None;
    let mut run_min: Option<Q> = None;
    let mut series = Vec::new();
    let mut next_mark = burn_in;
    for k in 1..=last_k {
        s += f.eval_word(&prefix[k - 1..k - 1 + m]);
        if k >= burn_in {
            let avg = &s / rat::int(k as i64);
            if run_max.as_ref().is_none_or(|v| avg > *v) {
                run_max = Some(avg.clone());
            }
            if run_min.as_ref().is_none_or(|v| avg < *v) {
                run_min = Some(avg);
            }
            if k == next_mark || k == last_k {
                let gm = (run_max.as_ref().unwrap() - &abar).abs();
                let gn = (run_min.as_ref().unwrap() - &aunder).abs();
                series.push((k, gm, gn));
                next_mark *= 2;
            }
        }
    }
    let running_max = run_max.unwrap();
    let running_min = run_min.unwrap();
    Ok(LiWuReport {
        gap_max: (&running_max - &abar).abs(),
        gap_min: (&running_min - &aunder).abs(),
        abar,
        aunder,
        burn_in,
        last_k,
        running_max,
        running_min,
        gap_series: series,
    })
}
