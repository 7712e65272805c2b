//! Ambient measures, ratio targeting, invariant and empirical measures, and
//! the weak* distance.

use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};

use crate::averaging::{birkhoff_avg, LocallyConstantFn, Observable, PiecewiseLinearFn};
use crate::rat::{self, Q};
use crate::space::{
    ball_as_cylinder, minimal_rotation, primitive_root, rho, shortlex_word, word_string, CirclePoint, Point,
    ShiftPoint, Space, Word,
};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AmbientMeasure {
    Bernoulli(Vec<Q>),
    Markov { p: Vec<Vec<Q>>, pi: Vec<Q> },
    LebesgueCircle,
}

impl AmbientMeasure {
    pub fn bernoulli(p: Vec<Q>) -> Result<Self> {
        if p.len() < 2 || p.iter().any(|x| !x.is_positive()) || p.iter().fold(Q::zero(), |a, x| a + x) != Q::one() {
            return Err(Error::Invalid("Bernoulli weights must be positive and sum to 1".into()));
        }
        Ok(AmbientMeasure::Bernoulli(p))
    }

    pub fn uniform(alphabet: u8) -> Self {
        AmbientMeasure::Bernoulli(vec![rat::q(1, alphabet as i64); alphabet as usize])
    }

    /// Markov measure; the stationary vector is solved for when not supplied.
    pub fn markov(p: Vec<Vec<Q>>, pi: Option<Vec<Q>>) -> Result<Self> {
        let n = p.len();
        if n < 2 || p.iter().any(|r| r.len() != n) {
            return Err(Error::Invalid("transition matrix must be square".into()));
        }
        for r in &p {
            if r.iter().any(|x| x.is_negative()) || r.iter().fold(Q::zero(), |a, x| a + x) != Q::one() {
                return Err(Error::Invalid("transition rows must be stochastic".into()));
            }
        }
        let pi = match pi {
            Some(v) => v,
            None => stationary(&p)?,
        };
        if pi.len() != n || pi.iter().any(|x| x.is_negative()) || pi.iter().fold(Q::zero(), |a, x| a + x) != Q::one() {
            return Err(Error::Invalid("stationary vector must be a probability vector".into()));
        }
        for j in 0..n {
            let v = (0..n).fold(Q::zero(), |a, i| a + &pi[i] * &p[i][j]);
            if v != pi[j] {
                return Err(Error::Invalid("supplied vector is not stationary".into()));
            }
        }
        Ok(AmbientMeasure::Markov { p, pi })
    }

    pub fn is_shift(&self) -> bool {
        !matches!(self, AmbientMeasure::LebesgueCircle)
    }

    pub fn alphabet(&self) -> Option<u8> {
        match self {
            AmbientMeasure::Bernoulli(p) => Some(p.len() as u8),
            AmbientMeasure::Markov { p, .. } => Some(p.len() as u8),
            AmbientMeasure::LebesgueCircle => None,
        }
    }

    pub fn check_space(&self, space: &Space) -> Result<()> {
        match (self, space) {
            (AmbientMeasure::LebesgueCircle, Space::Circle { .. }) => Ok(()),
            (m, Space::Shift(s)) if m.alphabet() == Some(s.alphabet()) => Ok(()),
            _ => Err(Error::Backend("measure does not match the space".into())),
        }
    }

    pub fn cylinder_measure(&self, w: &[u8]) -> Result<Q> {
        match self {
            AmbientMeasure::Bernoulli(p) => {
                if w.iter().any(|&s| s as usize >= p.len()) {
                    return Err(Error::Invalid("symbol outside alphabet".into()));
                }
                Ok(w.iter().fold(Q::one(), |acc, &s| acc * &p[s as usize]))
            }
            AmbientMeasure::Markov { p, pi } => {
                if w.iter().any(|&s| s as usize >= p.len()) {
                    return Err(Error::Invalid("symbol outside alphabet".into()));
                }
                let Some(&first) = w.first() else { return Ok(Q::one()) };
                Ok(w.windows(2).fold(pi[first as usize].clone(), |acc, t| acc * &p[t[0] as usize][t[1] as usize]))
            }
            AmbientMeasure::LebesgueCircle => Err(Error::Backend("cylinders need a shift measure".into())),
        }
    }

    pub fn ball_measure(&self, x: &Point, r: &Q) -> Result<Q> {
        if !r.is_positive() {
            return Err(Error::Invalid("radius must be positive".into()));
        }
        match (self, x) {
            (AmbientMeasure::LebesgueCircle, Point::Circle(_)) => Ok((r * rat::int(2)).min(Q::one())),
            (m, Point::Shift(p)) if m.is_shift() => m.cylinder_measure(&ball_as_cylinder(p, r)?),
            _ => Err(Error::Backend("measure and point live on different backends".into())),
        }
    }

    /// `μ{y : ρ(x,y) = r}`.
    pub fn shell_measure(&self, x: &Point, r: &Q) -> Result<Q> {
        match (self, x) {
            (AmbientMeasure::LebesgueCircle, Point::Circle(_)) => Ok(Q::zero()),
            (m, Point::Shift(p)) if m.is_shift() => match rat::neg_log2_exact(r) {
                Some(l) if l >= 1 => {
                    let l = l as usize;
                    Ok(m.cylinder_measure(&p.prefix(l - 1))? - m.cylinder_measure(&p.prefix(l))?)
                }
                _ => Ok(Q::zero()),
            },
            _ => Err(Error::Backend("measure and point live on different backends".into())),
        }
    }

    /// Every sphere null: true for Lebesgue on the circle, false for the
    /// built-in non-atomic shift measures.
    pub fn neglects_shells(&self) -> bool {
        matches!(self, AmbientMeasure::LebesgueCircle)
    }
}

fn stationary(p: &[Vec<Q>]) -> Result<Vec<Q>> {
    // Solve π(P − I) = 0 with Σπ = 1 by Gaussian elimination.
    let n = p.len();
    let mut a: Vec<Vec<Q>> = (0..n)
        .map(|j| {
            let mut row: Vec<Q> = (0..n).map(|i| p[i][j].clone() - if i == j { Q::one() } else { Q::zero() }).collect();
            row.push(Q::zero());
            row
        })
        .collect();
    a[n - 1] = vec![Q::one(); n + 1];
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero()).ok_or_else(|| {
            Error::Invalid("transition matrix has no unique stationary vector".into())
        })?;
        a.swap(col, piv);
        let inv = Q::one() / &a[col][col];
        for c in col..=n {
            a[col][c] = &a[col][c] * &inv;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let factor = a[r][col].clone();
                for c in col..=n {
                    let v = &a[col][c] * &factor;
                    a[r][c] -= v;
                }
            }
        }
    }
    Ok((0..n).map(|i| a[i][n].clone()).collect())
}

/// Radii with `μ(B(x_h;r_h)) / Σ_u μ(B(x_u;r_u)) = λ_h` exactly and `r_h < cap_h`.
pub fn target_ratios_circle(centers: &[CirclePoint], lambda: &[Q], caps: &[Q]) -> Result<Vec<Q>> {
    let n = centers.len();
    if n == 0 || lambda.len() != n || caps.len() != n {
        return Err(Error::Invalid("need one weight and one cap per center".into()));
    }
    if caps.iter().any(|c| !c.is_positive()) {
        return Err(Error::Infeasible("caps must be positive".into()));
    }
    if lambda.iter().any(|l| !l.is_positive()) || lambda.iter().fold(Q::zero(), |a, l| a + l) != Q::one() {
        return Err(Error::Invalid("weights must be positive and sum to 1".into()));
    }
    for i in 0..n {
        for j in i + 1..n {
            if centers[i] == centers[j] {
                return Err(Error::Invalid("duplicate centers".into()));
            }
        }
    }
    let t = lambda.iter().zip(caps).map(|(l, c)| c / l).min().unwrap() / rat::int(2);
    Ok(lambda.iter().map(|l| l * &t).collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftRatios {
    pub depths: Vec<usize>,
    pub ratios: Vec<Q>,
    pub error: Q,
}

/// Cylinder depths whose relative measures approximate `λ`.
pub fn target_ratios_shift(
    mu: &AmbientMeasure,
    centers: &[ShiftPoint],
    lambda: &[Q],
    tolerance: &Q,
    depth_cap: usize,
) -> Result<ShiftRatios> {
    target_ratios_shift_from(mu, centers, lambda, tolerance, 0, depth_cap)
}

/// As [`target_ratios_shift`] with every depth at least `min_depth`.
pub fn target_ratios_shift_from(
    mu: &AmbientMeasure,
    centers: &[ShiftPoint],
    lambda: &[Q],
    tolerance: &Q,
    min_depth: usize,
    depth_cap: usize,
) -> Result<ShiftRatios> {
    let n = centers.len();
    if !matches!(mu, AmbientMeasure::Bernoulli(_)) {
        return Err(Error::Invalid("ratio targeting on the shift needs a Bernoulli measure".into()));
    }
    if n == 0 || lambda.len() != n {
        return Err(Error::Invalid("need one weight per center".into()));
    }
    if lambda.iter().any(|l| !l.is_positive()) || lambda.iter().fold(Q::zero(), |a, l| a + l) != Q::one() {
        return Err(Error::Invalid("weights must be positive and sum to 1".into()));
    }
    let mut lo = min_depth;
    for i in 0..n {
        for j in i + 1..n {
            match centers[i].first_difference(&centers[j]) {
                None => return Err(Error::Invalid("duplicate centers".into())),
                Some(d) => lo = lo.max(d + 1),
            }
        }
    }
    if lo > depth_cap {
        return Err(Error::Infeasible(format!("centers need depth {lo} > cap {depth_cap}")));
    }
    let masses: Vec<Vec<Q>> = centers
        .iter()
        .map(|c| (0..=depth_cap).map(|d| mu.cylinder_measure(&c.prefix(d))).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let evaluate = |ds: &[usize]| -> (Q, Vec<Q>) {
        let total = ds.iter().enumerate().fold(Q::zero(), |a, (h, &d)| a + &masses[h][d]);
        let ratios: Vec<Q> = ds.iter().enumerate().map(|(h, &d)| &masses[h][d] / &total).collect();
        let err = ratios.iter().zip(lambda).map(|(r, l)| (r - l).abs()).max().unwrap();
        (err, ratios)
    };
    let span = depth_cap - lo + 1;
    let mut best: Option<(Q, usize, Vec<usize>, Vec<Q>)> = None;
    let mut consider = |ds: Vec<usize>| {
        let (err, ratios) = evaluate(&ds);
        let sum: usize = ds.iter().sum();
        let better = match &best {
            None => true,
            Some((be, bs, bd, _)) => (&err, sum, &ds) < (be, *bs, bd),
        };
        if better {
            best = Some((err, sum, ds, ratios));
        }
    };
    if (span as f64).powi(n as i32) <= 2.0e5 {
        let mut ds = vec![lo; n];
        loop {
            consider(ds.clone());
            let mut i = n;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                ds[i] += 1;
                if ds[i] <= depth_cap {
                    break;
                }
                ds[i] = lo;
            }
            if ds.iter().all(|&d| d == lo) {
                break;
            }
        }
    } else {
        for d0 in lo..=depth_cap {
            let mut ds = vec![d0];
            for h in 1..n {
                let want = &lambda[h] / &lambda[0];
                let pick = (lo..=depth_cap)
                    .min_by_key(|&d| ((&masses[h][d] / &masses[0][d0]) - &want).abs())
                    .unwrap();
                ds.push(pick);
            }
            consider(ds);
        }
    }
    let (err, _, depths, ratios) = best.unwrap();
    if err > *tolerance {
        let shown: Vec<String> = ratios.iter().map(rat::fmt_frac).collect();
        return Err(Error::Infeasible(format!(
            "best achievable ratios ({}) at depths {:?} miss the target by {}",
            shown.join(", "),
            depths,
            rat::fmt_frac(&err)
        )));
    }
    Ok(ShiftRatios { depths, ratios, error: err })
}

/// Periodic-orbit measure or a rational convex combination of such.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InvariantMeasure {
    PeriodicOrbit(Word),
    Convex(Vec<(Q, Word)>),
}

/// Canonical representative of the orbit of `w^∞`: minimal rotation of its primitive root.
pub fn canonical_orbit_word(w: &[u8]) -> Word {
    minimal_rotation(primitive_root(w))
}

impl InvariantMeasure {
    pub fn orbit(w: &[u8]) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::Invalid("orbit word must be nonempty".into()));
        }
        Ok(InvariantMeasure::PeriodicOrbit(canonical_orbit_word(w)))
    }

    pub fn convex(parts: Vec<(Q, Word)>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::Invalid("empty convex combination".into()));
        }
        if parts.iter().any(|(w, x)| !w.is_positive() || x.is_empty()) {
            return Err(Error::Invalid("weights must be positive and words nonempty".into()));
        }
        if parts.iter().fold(Q::zero(), |a, (w, _)| a + w) != Q::one() {
            return Err(Error::Invalid("weights must sum to 1".into()));
        }
        Ok(InvariantMeasure::Convex(parts.into_iter().map(|(q, w)| (q, canonical_orbit_word(&w))).collect()))
    }

    /// `(weight, orbit word)` pairs.
    pub fn components(&self) -> Vec<(Q, Word)> {
        match self {
            InvariantMeasure::PeriodicOrbit(w) => vec![(Q::one(), w.clone())],
            InvariantMeasure::Convex(parts) => parts.clone(),
        }
    }

    pub fn integrate(&self, space: &Space, f: &Observable) -> Result<Q> {
        let mut s = Q::zero();
        for (wt, w) in self.components() {
            let x = orbit_point(space, &w)?;
            s += wt * birkhoff_avg(space, f, &x, w.len())?;
        }
        Ok(s)
    }

    pub fn describe(&self) -> String {
        self.components()
            .iter()
            .map(|(q, w)| format!("{}*orbit({})", rat::fmt_frac(q), word_string(w)))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

/// Periodic point carrying the orbit measure of `w`.
pub fn orbit_point(space: &Space, w: &[u8]) -> Result<Point> {
    match space {
        Space::Shift(s) => {
            let x = ShiftPoint::periodic(w.to_vec())?;
            if !s.admits_point(&x) {
                return Err(Error::Invalid(format!("orbit {} is not in the subshift", word_string(w))));
            }
            Ok(Point::Shift(x))
        }
        Space::Circle { base } => {
            if w.iter().any(|&s| s as u32 >= *base) {
                return Err(Error::Invalid(format!("word {} uses digits ≥ {base}", word_string(w))));
            }
            Ok(Point::Circle(CirclePoint::from_periodic_word(w, *base)))
        }
    }
}

pub fn integrate_invariant(space: &Space, nu: &InvariantMeasure, f: &Observable) -> Result<Q> {
    nu.integrate(space, f)
}

/// `μ_{x,k} = (1/k) Σ_{j<k} δ_{T_j x}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmpiricalMeasure {
    pub x: Point,
    pub k: usize,
}

impl EmpiricalMeasure {
    pub fn new(x: Point, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Invalid("horizon must be at least 1".into()));
        }
        Ok(EmpiricalMeasure { x, k })
    }
}

pub fn integrate_empirical(space: &Space, m: &EmpiricalMeasure, f: &Observable) -> Result<Q> {
    birkhoff_avg(space, f, &m.x, m.k)
}

/// Anything that integrates observables exactly.
pub trait Integrator {
    fn integrate(&self, space: &Space, f: &Observable) -> Result<Q>;
}

impl Integrator for InvariantMeasure {
    fn integrate(&self, space: &Space, f: &Observable) -> Result<Q> {
        InvariantMeasure::integrate(self, space, f)
    }
}

impl Integrator for EmpiricalMeasure {
    fn integrate(&self, space: &Space, f: &Observable) -> Result<Q> {
        integrate_empirical(space, self, f)
    }
}

/// Fixed dense family: cylinder indicators in shortlex order on the shift,
/// dyadic hats level by level on the circle. Members are 1-based.
pub fn family_member(space: &Space, h: u64) -> Observable {
    assert!(h >= 1);
    match space {
        Space::Shift(s) => Observable::Shift(LocallyConstantFn::indicator(s.alphabet(), &shortlex_word(h, s.alphabet()))),
        Space::Circle { .. } => {
            let mut level = 1u32;
            let mut idx = h - 1;
            while idx >= 1u64 << level {
                idx -= 1u64 << level;
                level += 1;
            }
            let hw = rat::pow2_neg(level as u64);
            let center = Q::from_integer(idx.into()) * &hw;
            Observable::Circle(PiecewiseLinearFn::hat(&center, &hw).unwrap())
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeakStarInterval {
    pub lo: Q,
    pub hi: Q,
}

impl WeakStarInterval {
    pub fn width(&self) -> Q {
        &self.hi - &self.lo
    }
}

/// Enclosure `[S_M, S_M + 2^{-M}]` of `Σ_h 2^{-h} min(|∫f_h dβ₁ − ∫f_h dβ₂|, 1)`.
pub fn weakstar_dist(space: &Space, a: &dyn Integrator, b: &dyn Integrator, m: usize) -> Result<WeakStarInterval> {
    let mut s = Q::zero();
    for h in 1..=m as u64 {
        let f = family_member(space, h);
        let d = (a.integrate(space, &f)? - b.integrate(space, &f)?).abs().min(Q::one());
        s += d * rat::pow2_neg(h);
    }
    let hi = &s + rat::pow2_neg(m as u64);
    Ok(WeakStarInterval { lo: s, hi })
}

/// Distinct periodic orbits in shortlex order of their canonical words.
pub struct OrbitCatalogue {
    space: Space,
    next_index: u64,
    seen_circle: BTreeSet<Vec<CirclePoint>>,
    found: Vec<Word>,
}

impl OrbitCatalogue {
    pub fn new(space: Space) -> Self {
        OrbitCatalogue { space, next_index: 1, seen_circle: BTreeSet::new(), found: Vec::new() }
    }

    fn alphabet(&self) -> u8 {
        match &self.space {
            Space::Shift(s) => s.alphabet(),
            Space::Circle { base } => *base as u8,
        }
    }

    /// The `i`-th distinct orbit, 1-based.
    pub fn get(&mut self, i: usize) -> Word {
        while self.found.len() < i {
            let w = shortlex_word(self.next_index, self.alphabet());
            self.next_index += 1;
            if canonical_orbit_word(&w) != w {
                continue;
            }
            let keep = match &self.space {
                Space::Shift(s) => {
                    let mut cyc = w.clone();
                    cyc.push(w[0]);
                    s.admits_word(&cyc)
                }
                Space::Circle { base } => {
                    let t = CirclePoint::from_periodic_word(&w, *base);
                    let mut orbit: Vec<CirclePoint> = (0..w.len() as u64).map(|j| t.apply(j, *base)).collect();
                    orbit.sort();
                    orbit.dedup();
                    self.seen_circle.insert(orbit)
                }
            };
            if keep {
                self.found.push(w);
            }
        }
        self.found[i - 1].clone()
    }
}

/// `ρ`-separation of a list of points: smallest pairwise distance.
pub fn min_pairwise_distance(points: &[Point]) -> Result<Option<Q>> {
    let mut best: Option<Q> = None;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d = rho(&points[i], &points[j])?;
            best = Some(match best {
                Some(b) if b <= d => b,
                _ => d,
            });
        }
    }
    Ok(best)
}
