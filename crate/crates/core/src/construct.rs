//! Compilers for prescribed limit sets: scalar sandwiching and measure chasing.

use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::averaging::{birkhoff_avg, birkhoff_limit_periodic, multiball_decompose, spatial_temporal_avg, Observable};
use crate::measure::{
    canonical_orbit_word, min_pairwise_distance, orbit_point, target_ratios_circle, target_ratios_shift_from,
    weakstar_dist, AmbientMeasure, Integrator, InvariantMeasure, OrbitCatalogue, WeakStarInterval,
};
use crate::rat::{self, Q};
use crate::space::{rho, MultiBall, Point, ShiftPoint, Space, Word};
use crate::{Error, Result};

/// 2-adic valuation.
pub fn nu2(k: u64) -> u32 {
    k.trailing_zeros()
}

/// Class of step `k`: `1 + ν₂(k)` for infinitely many classes, `1 + (ν₂(k) mod n)` for `n`.
pub fn schedule_partition(class_count: Option<usize>, k: u64) -> usize {
    assert!(k >= 1);
    let v = nu2(k) as usize;
    match class_count {
        None => 1 + v,
        Some(n) => 1 + v % n.max(1),
    }
}

/// The `ℓ`-th step (1-based) assigned to class `i`.
pub fn fiber_element(class_count: Option<usize>, i: usize, l: u64) -> u64 {
    match class_count {
        None => (1u64 << (i - 1)) * (2 * l - 1),
        Some(_) => {
            let mut seen = 0;
            let mut k = 0;
            while seen < l {
                k += 1;
                if schedule_partition(class_count, k) == i {
                    seen += 1;
                }
            }
            k
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Component {
    Interval(Q, Q),
    Point(Q),
}

/// Nonempty finite union of closed intervals and points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TargetSetK {
    components: Vec<Component>,
}

impl TargetSetK {
    pub fn new(components: Vec<Component>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Invalid("target set must be nonempty".into()));
        }
        let mut out: Vec<Component> = Vec::new();
        for c in components {
            let c = match c {
                Component::Interval(a, b) if a == b => Component::Point(a),
                Component::Interval(a, b) if a > b => {
                    return Err(Error::Invalid("interval endpoints out of order".into()));
                }
                other => other,
            };
            if !out.contains(&c) {
                out.push(c);
            }
        }
        Ok(TargetSetK { components: out })
    }

    pub fn points(ps: &[Q]) -> Result<Self> {
        Self::new(ps.iter().cloned().map(Component::Point).collect())
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn class_count(&self) -> Option<usize> {
        if self.components.iter().any(|c| matches!(c, Component::Interval(..))) {
            None
        } else {
            Some(self.components.len())
        }
    }

    pub fn within(&self, u: &Q, v: &Q) -> bool {
        self.components.iter().all(|c| match c {
            Component::Interval(a, b) => a >= u && b <= v,
            Component::Point(p) => p >= u && p <= v,
        })
    }
}

/// Dyadic points of `[0,1]` breadth-first: `0, 1, 1/2, 1/4, 3/4, 1/8, …`.
pub fn dyadic_bfs(idx: u64) -> Q {
    match idx {
        0 => Q::zero(),
        1 => Q::one(),
        _ => {
            let j = idx - 2;
            let mut level = 1u32;
            let mut start = 0u64;
            while j >= start + (1u64 << (level - 1)) {
                start += 1u64 << (level - 1);
                level += 1;
            }
            let odd = 2 * (j - start) + 1;
            Q::new(odd.into(), (1u64 << level).into())
        }
    }
}

/// `p_i`, 1-based, round-robin over the components.
pub fn dense_enumerate(k: &TargetSetK, i: u64) -> Q {
    assert!(i >= 1);
    let n = k.components.len() as u64;
    let c = &k.components[((i - 1) % n) as usize];
    let idx = (i - 1) / n;
    match c {
        Component::Point(p) => p.clone(),
        Component::Interval(a, b) => a + (b - a) * dyadic_bfs(idx),
    }
}

/// One compiled step of the sandwich construction.
#[derive(Clone, Debug)]
pub struct BlendRow {
    pub k: usize,
    pub class: usize,
    pub target: Q,
    pub lambda: Q,
    pub t: Q,
    pub delta_cap: Q,
    pub radii: (Q, Q),
    pub value: Q,
    pub bound: Q,
    pub weight_ok: bool,
    pub cap_ok: bool,
    pub ratio_ok: bool,
    pub bound_ok: bool,
}

impl BlendRow {
    pub fn certified(&self) -> bool {
        self.weight_ok && self.cap_ok && self.ratio_ok && self.bound_ok
    }
}

#[derive(Clone, Debug)]
pub struct SandwichRun {
    pub u: Q,
    pub v: Q,
    pub rows: Vec<BlendRow>,
}

impl SandwichRun {
    pub fn values(&self) -> Vec<Q> {
        self.rows.iter().map(|r| r.value.clone()).collect()
    }

    pub fn all_certified(&self) -> bool {
        self.rows.iter().all(BlendRow::certified)
    }
}

/// `t_k`: exactly `λ` inside `(0,1)`, pushed inside by `1/(k+1)` at the endpoints.
pub fn blend_weight(lambda: &Q, k: usize) -> Q {
    let step = rat::q(1, k as i64 + 1);
    if lambda.is_zero() {
        step
    } else if lambda.is_one() {
        Q::one() - step
    } else {
        lambda.clone()
    }
}

/// `1/(k Λ^k)`: strictly below the cap `max_{j<k} Λ^j δ < 1/k`.
pub fn delta_cap(space: &Space, k: usize) -> Q {
    Q::one() / (space.mohoc().l(k as u64) * rat::int(k as i64))
}

fn shift_depth_floor(k: usize, m: usize) -> usize {
    (k + m - 1).max(k + rat::ceil_log2(k as u64 + 1) as usize)
}

pub fn sandwich_compile(
    space: &Space,
    mu: &AmbientMeasure,
    x: &Point,
    y: &Point,
    f: &Observable,
    target: &TargetSetK,
    horizon: usize,
) -> Result<SandwichRun> {
    mu.check_space(space)?;
    f.check_space(space)?;
    space.check_point(x)?;
    space.check_point(y)?;
    if x == y {
        return Err(Error::Invalid("endpoint points must differ".into()));
    }
    let u = birkhoff_limit_periodic(space, f, x)?;
    let v = birkhoff_limit_periodic(space, f, y)?;
    if u > v {
        return Err(Error::Invalid(format!(
            "limits out of order: u = {} > v = {}",
            rat::fmt_frac(&u),
            rat::fmt_frac(&v)
        )));
    }
    if !target.within(&u, &v) {
        return Err(Error::Invalid("target set is not inside [u, v]".into()));
    }
    let classes = target.class_count();
    let dist = rho(x, y)?;
    let step = |k: usize| -> Result<BlendRow> {
        let class = schedule_partition(classes, k as u64);
        let p = dense_enumerate(target, class as u64);
        let lambda = if u == v { rat::q(1, 2) } else { (&v - &p) / (&v - &u) };
        let kq = rat::int(k as i64);
        let dcap = delta_cap(space, k);
        let (t, r, s) = match space {
            Space::Circle { base } => {
                let t = blend_weight(&lambda, k);
                let lip = f.lipschitz().max(Q::one());
                let b = rat::int(*base as i64);
                let cont = (&b - Q::one()) / (lip * (rat::pow_u(&b, k as u64) - Q::one()));
                let cap = dcap.clone().min(cont).min(&dist / rat::int(4));
                let r = &t * &cap;
                let s = (Q::one() - &t) * &cap;
                (t, r, s)
            }
            Space::Shift(_) => {
                let m = f.as_shift()?.depth();
                let lo = shift_depth_floor(k, m);
                let xs = [x.as_shift()?.clone(), y.as_shift()?.clone()];
                // endpoint weights are aimed at 1/(2k) inside (0,1)
                let half = Q::one() / (rat::int(2) * &kq);
                let (aim, tol) = if lambda.is_zero() {
                    (half.clone(), half)
                } else if lambda.is_one() {
                    (Q::one() - &half, half)
                } else {
                    (lambda.clone(), Q::one() / &kq)
                };
                let cap = lo + rat::ceil_log2(k as u64 + 1) as usize + 4;
                let fit = target_ratios_shift_from(mu, &xs, &[aim.clone(), Q::one() - &aim], &tol, lo, cap)?;
                (fit.ratios[0].clone(), rat::pow2_neg(fit.depths[0] as u64), rat::pow2_neg(fit.depths[1] as u64))
            }
        };
        let weight_ok = (&t - &lambda).abs() <= Q::one() / &kq;
        let cap_ok = r < dcap && s < dcap && r.is_positive() && s.is_positive();
        let mb = MultiBall::new(vec![(x.clone(), r.clone()), (y.clone(), s.clone())])?;
        let mx = mu.ball_measure(x, &r)?;
        let my = mu.ball_measure(y, &s)?;
        let ratio_ok = mb.pairwise_disjoint() && &mx / (&mx + &my) == t;
        let value = spatial_temporal_avg(space, mu, &mb, f, k)?.value;
        let ax = birkhoff_avg(space, f, x, k)?;
        let ay = birkhoff_avg(space, f, y, k)?;
        let bound = (u.abs() + v.abs() + rat::int(2)) / &kq + (&u - ax).abs() + (&v - ay).abs();
        let bound_ok = (&value - &p).abs() <= bound;
        Ok(BlendRow {
            k,
            class,
            target: p,
            lambda,
            t,
            delta_cap: dcap,
            radii: (r, s),
            value,
            bound,
            weight_ok,
            cap_ok,
            ratio_ok,
            bound_ok,
        })
    };
    let rows = (1..=horizon).into_par_iter().map(step).collect::<Result<Vec<_>>>()?;
    Ok(SandwichRun { u, v, rows })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LimitSetEstimate {
    /// `(center, number of tail values in the cluster)`.
    pub clusters: Vec<(Q, usize)>,
}

/// Greedy `ε`-clusters of the last `tail_fraction` of the series.
pub fn limit_set_estimate(series: &[Q], eps: &Q, tail_fraction: &Q) -> Result<LimitSetEstimate> {
    if series.is_empty() {
        return Err(Error::Invalid("empty series".into()));
    }
    if !eps.is_positive() || !tail_fraction.is_positive() || *tail_fraction > Q::one() {
        return Err(Error::Invalid("ε must be positive and the tail fraction in (0,1]".into()));
    }
    let n = series.len();
    let want = -rat::floor(&(-(tail_fraction * rat::int(n as i64))));
    let tail_len = want.to_usize().unwrap_or(n).clamp(1, n);
    let mut tail: Vec<Q> = series[n - tail_len..].to_vec();
    tail.sort();
    let mut clusters = Vec::new();
    let mut i = 0;
    while i < tail.len() {
        let lo = tail[i].clone();
        let limit = &lo + eps;
        let mut j = i;
        while j < tail.len() && tail[j] <= limit {
            j += 1;
        }
        let center = (&lo + &tail[j - 1]) / rat::int(2);
        clusters.push((center, j - i));
        i = j;
    }
    Ok(LimitSetEstimate { clusters })
}

/// Measure-valued target of a chase.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ChaseTarget {
    /// Orbit words with finitely many weight vectors over them.
    FiniteHull { orbits: Vec<Word>, weights: Vec<Vec<Q>> },
    /// Every rational convex combination of periodic orbits, enumerated.
    WholeSimplex,
}

/// Stern–Brocot fractions of `(0,1)` breadth-first, 1-based: `1/2, 1/3, 2/3, 1/4, …`.
pub fn stern_brocot(j: u64) -> Q {
    assert!(j >= 1);
    let bits = 64 - j.leading_zeros();
    let (mut ln, mut ld, mut hn, mut hd) = (0u64, 1u64, 1u64, 1u64);
    let (mut n, mut d) = (1u64, 2u64);
    for b in (0..bits - 1).rev() {
        if (j >> b) & 1 == 0 {
            hn = n;
            hd = d;
        } else {
            ln = n;
            ld = d;
        }
        n = ln + hn;
        d = ld + hd;
    }
    Q::new(n.into(), d.into())
}

/// Enumeration of rational convex combinations of periodic orbits.
///
/// An element is a support `h_1 < … < h_n` of orbit indices and Stern–Brocot
/// indices `j_1, …, j_{n-1}` giving stick-breaking weights. Elements are
/// ordered by height `h_n + Σ j`, then `n`, then support, then indices.
pub struct SimplexEnumeration {
    catalogue: OrbitCatalogue,
    queue: Vec<(Vec<usize>, Vec<u64>)>,
    height: usize,
    produced: Vec<InvariantMeasure>,
}

impl SimplexEnumeration {
    pub fn new(space: Space) -> Self {
        SimplexEnumeration { catalogue: OrbitCatalogue::new(space), queue: Vec::new(), height: 0, produced: Vec::new() }
    }

    fn fill_height(&mut self) {
        self.height += 1;
        let h = self.height;
        let mut items = Vec::new();
        for n in 1..=h {
            for top in n..=h.saturating_sub(n - 1) {
                let rest = h - top;
                if rest < n - 1 || (n == 1 && rest != 0) {
                    continue;
                }
                let mut supports = Vec::new();
                subsets_with_max(top, n, &mut Vec::new(), 1, &mut supports);
                let mut idx = Vec::new();
                compositions(rest as u64, n - 1, &mut Vec::new(), &mut idx);
                for s in &supports {
                    for j in &idx {
                        items.push((s.clone(), j.clone()));
                    }
                }
            }
        }
        items.reverse();
        self.queue = items;
    }

    /// `ν_i`, 1-based.
    pub fn get(&mut self, i: usize) -> InvariantMeasure {
        while self.produced.len() < i {
            while self.queue.is_empty() {
                self.fill_height();
            }
            let (support, idx) = self.queue.pop().unwrap();
            let mut weights = Vec::new();
            let mut rest = Q::one();
            for &j in &idx {
                let s = stern_brocot(j);
                weights.push(&rest * &s);
                rest = &rest * (Q::one() - s);
            }
            weights.push(rest);
            let parts: Vec<(Q, Word)> =
                weights.into_iter().zip(support.iter().map(|&h| self.catalogue.get(h))).collect();
            let nu = if parts.len() == 1 {
                InvariantMeasure::PeriodicOrbit(parts[0].1.clone())
            } else {
                InvariantMeasure::Convex(parts)
            };
            self.produced.push(nu);
        }
        self.produced[i - 1].clone()
    }
}

fn subsets_with_max(top: usize, n: usize, cur: &mut Vec<usize>, from: usize, out: &mut Vec<Vec<usize>>) {
    if cur.len() == n - 1 {
        let mut s = cur.clone();
        s.push(top);
        out.push(s);
        return;
    }
    for h in from..top {
        cur.push(h);
        subsets_with_max(top, n, cur, h + 1, out);
        cur.pop();
    }
}

fn compositions(total: u64, parts: usize, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
    if parts == 0 {
        if total == 0 {
            out.push(cur.clone());
        }
        return;
    }
    for first in 1..=total.saturating_sub(parts as u64 - 1) {
        cur.push(first);
        compositions(total - first, parts - 1, cur, out);
        cur.pop();
    }
}

/// `β ↦ α_C(Avg_k β)` as an integrator of observables.
pub struct BallFunctional<'a> {
    pub mu: &'a AmbientMeasure,
    pub balls: &'a MultiBall,
    pub k: usize,
}

impl Integrator for BallFunctional<'_> {
    fn integrate(&self, space: &Space, f: &Observable) -> Result<Q> {
        Ok(spatial_temporal_avg(space, self.mu, self.balls, f, self.k)?.value)
    }
}

#[derive(Clone, Debug)]
pub struct ChaseStep {
    pub k: usize,
    pub class: usize,
    pub lambda: Vec<Q>,
    pub t: Vec<Q>,
    pub balls: MultiBall,
    pub weight_ok: bool,
    pub cap_ok: bool,
    pub disjoint: bool,
}

impl ChaseStep {
    pub fn certified(&self) -> bool {
        self.weight_ok && self.cap_ok && self.disjoint
    }
}

#[derive(Clone, Debug)]
pub struct DistRow {
    pub class: usize,
    pub l: u64,
    pub k: usize,
    pub target: InvariantMeasure,
    pub dist: WeakStarInterval,
    pub weights_match: bool,
}

#[derive(Clone, Debug)]
pub struct ChaseRun {
    pub steps: Vec<ChaseStep>,
    pub dist_table: Vec<DistRow>,
}

impl ChaseRun {
    pub fn all_certified(&self) -> bool {
        self.steps.iter().all(ChaseStep::certified) && self.dist_table.iter().all(|r| r.weights_match)
    }

    /// Whether the upper ends of the enclosures are nonincreasing along each class.
    pub fn monotone(&self, class: usize) -> bool {
        let his: Vec<&Q> = self.dist_table.iter().filter(|r| r.class == class).map(|r| &r.dist.hi).collect();
        his.windows(2).all(|w| w[1] <= w[0])
    }

    pub fn rows_for(&self, class: usize) -> impl Iterator<Item = &DistRow> {
        self.dist_table.iter().filter(move |r| r.class == class)
    }
}

#[derive(Clone, Debug)]
pub struct ChaseOptions {
    /// Truncation depth of the weak* enclosures.
    pub family_depth: usize,
    /// Classes whose distances are tabulated (all classes when finitely many).
    pub tracked_classes: usize,
    /// Fiber positions `ℓ` at which distances are evaluated.
    pub checkpoints: Vec<u64>,
}

impl Default for ChaseOptions {
    fn default() -> Self {
        ChaseOptions { family_depth: 8, tracked_classes: 4, checkpoints: (0..32).map(|e| 1u64 << e).collect() }
    }
}

fn class_measures(target: &ChaseTarget, space: &Space, upto: usize) -> Result<(Option<usize>, Vec<InvariantMeasure>)> {
    match target {
        ChaseTarget::FiniteHull { orbits, weights } => {
            if orbits.is_empty() || weights.is_empty() {
                return Err(Error::Invalid("hull needs orbits and weight vectors".into()));
            }
            let canon: Vec<Word> = orbits.iter().map(|w| canonical_orbit_word(w)).collect();
            for i in 0..canon.len() {
                if canon[i].is_empty() {
                    return Err(Error::Invalid("orbit words must be nonempty".into()));
                }
                for j in i + 1..canon.len() {
                    if canon[i] == canon[j] || orbit_point(space, &canon[i])? == orbit_point(space, &canon[j])? {
                        return Err(Error::Invalid("duplicate orbit measures".into()));
                    }
                }
            }
            let mut out = Vec::new();
            for wv in weights {
                if wv.len() != canon.len() || wv.iter().any(|w| w.is_negative()) {
                    return Err(Error::Invalid("weight vectors must be nonnegative, one entry per orbit".into()));
                }
                let parts: Vec<(Q, Word)> =
                    wv.iter().cloned().zip(canon.iter().cloned()).filter(|(w, _)| !w.is_zero()).collect();
                out.push(if parts.len() == 1 {
                    if !parts[0].0.is_one() {
                        return Err(Error::Invalid("weights must sum to 1".into()));
                    }
                    InvariantMeasure::PeriodicOrbit(parts[0].1.clone())
                } else {
                    InvariantMeasure::convex(parts)?
                });
            }
            Ok((Some(out.len()), out))
        }
        ChaseTarget::WholeSimplex => {
            let mut en = SimplexEnumeration::new(space.clone());
            Ok((None, (1..=upto).map(|i| en.get(i)).collect()))
        }
    }
}

fn chase_step(space: &Space, mu: &AmbientMeasure, nu: &InvariantMeasure, class: usize, k: usize) -> Result<ChaseStep> {
    let comps = nu.components();
    let lambda: Vec<Q> = comps.iter().map(|(w, _)| w.clone()).collect();
    let centers: Vec<Point> = comps.iter().map(|(_, w)| orbit_point(space, w)).collect::<Result<_>>()?;
    let kq = rat::int(k as i64);
    let dcap = delta_cap(space, k);
    let sep = min_pairwise_distance(&centers)?;
    let (t, radii) = match space {
        Space::Circle { .. } => {
            let cap = match &sep {
                Some(d) => dcap.clone().min(d / rat::int(3)),
                None => dcap.clone(),
            };
            let cs: Vec<_> = centers.iter().map(|c| c.as_circle().cloned()).collect::<Result<_>>()?;
            let radii = target_ratios_circle(&cs, &lambda, &vec![cap; cs.len()])?;
            (lambda.clone(), radii)
        }
        Space::Shift(_) => {
            let xs: Vec<_> = centers.iter().map(|c| c.as_shift().cloned()).collect::<Result<_>>()?;
            let lo = shift_depth_floor(k, 1);
            let cap = lo + rat::ceil_log2(k as u64 + 1) as usize + 4;
            let fit = target_ratios_shift_from(mu, &xs, &lambda, &(Q::one() / &kq), lo, cap)?;
            (fit.ratios, fit.depths.iter().map(|&d| rat::pow2_neg(d as u64)).collect())
        }
    };
    let weight_ok = t.iter().zip(&lambda).all(|(a, b)| (a - b).abs() <= Q::one() / &kq);
    let cap_ok = radii.iter().all(|r| *r < dcap);
    let balls = MultiBall::new(centers.into_iter().zip(radii).collect())?;
    let disjoint = balls.pairwise_disjoint();
    Ok(ChaseStep { k, class, lambda, t, balls, weight_ok, cap_ok, disjoint })
}

pub fn chase_compile(
    space: &Space,
    mu: &AmbientMeasure,
    target: &ChaseTarget,
    horizon: usize,
    opts: &ChaseOptions,
) -> Result<ChaseRun> {
    mu.check_space(space)?;
    let max_class = 1 + (usize::BITS - 1 - horizon.max(1).leading_zeros()) as usize;
    let (classes, measures) = class_measures(target, space, max_class.max(opts.tracked_classes))?;
    let steps = (1..=horizon)
        .into_par_iter()
        .map(|k| {
            let class = schedule_partition(classes, k as u64);
            chase_step(space, mu, &measures[class - 1], class, k)
        })
        .collect::<Result<Vec<_>>>()?;
    let tracked = match classes {
        Some(n) => n,
        None => opts.tracked_classes,
    };
    let mut jobs = Vec::new();
    for class in 1..=tracked {
        // the ℓ-th element of a fiber is at least ℓ
        for &l in opts.checkpoints.iter().filter(|&&l| l as usize <= horizon) {
            let k = fiber_element(classes, class, l) as usize;
            if k <= horizon {
                jobs.push((class, l, k));
            }
        }
    }
    let dist_table = jobs
        .into_par_iter()
        .map(|(class, l, k)| {
            let step = &steps[k - 1];
            let nu = &measures[class - 1];
            let functional = BallFunctional { mu, balls: &step.balls, k };
            let dist = weakstar_dist(space, &functional, nu, opts.family_depth)?;
            let weights_match = match space {
                Space::Circle { .. } => {
                    let probe = Observable::Circle(crate::averaging::PiecewiseLinearFn::constant(Q::zero()));
                    let parts = multiball_decompose(space, mu, &step.balls, &probe, 1)?;
                    parts.iter().map(|(w, _)| w).eq(step.t.iter())
                }
                Space::Shift(_) => {
                    let masses: Vec<Q> =
                        step.balls.entries().iter().map(|(c, r)| mu.ball_measure(c, r)).collect::<Result<_>>()?;
                    let total = masses.iter().fold(Q::zero(), |a, m| a + m);
                    masses.iter().map(|m| m / &total).eq(step.t.iter().cloned())
                }
            };
            Ok(DistRow { class, l, k, target: nu.clone(), dist, weights_match })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ChaseRun { steps, dist_table })
}

/// Single-ball chase through the given orbits, one class per distinct orbit.
pub fn extreme_points_chase(
    space: &Space,
    mu: &AmbientMeasure,
    targets: &[Word],
    horizon: usize,
    opts: &ChaseOptions,
) -> Result<ChaseRun> {
    let mut orbits: Vec<Word> = Vec::new();
    let mut points: Vec<Point> = Vec::new();
    for w in targets {
        let c = canonical_orbit_word(w);
        let p = orbit_point(space, &c)?;
        if !points.contains(&p) {
            points.push(p);
            orbits.push(c);
        }
    }
    let n = orbits.len();
    let weights = (0..n).map(|i| (0..n).map(|j| if i == j { Q::one() } else { Q::zero() }).collect()).collect();
    chase_compile(space, mu, &ChaseTarget::FiniteHull { orbits, weights }, horizon, opts)
}

/// Block lengths `c_1 = 1`, `c_n = (n−1) s_{n−1}`, so that `s_n = n!`.
pub fn factorial_blocks(n: usize) -> Vec<usize> {
    let mut c = Vec::with_capacity(n);
    let mut s = 0usize;
    for i in 1..=n {
        let ci = if i == 1 { 1 } else { (i - 1) * s };
        c.push(ci);
        s += ci;
    }
    c
}

/// Alternating `0`/`1` runs of the given lengths and their complement.
///
/// The tail after the last run repeats the next symbol, so the points are
/// exact on the first `Σc` coordinates only.
pub fn alternating_runs(c: &[usize]) -> Result<(ShiftPoint, ShiftPoint)> {
    let mut x = Vec::with_capacity(c.iter().sum());
    for (i, &n) in c.iter().enumerate() {
        x.extend(std::iter::repeat_n((i % 2) as u8, n));
    }
    let tail = (c.len() % 2) as u8;
    let y: Word = x.iter().map(|s| 1 - s).collect();
    Ok((ShiftPoint::new(x, vec![tail])?, ShiftPoint::new(y, vec![1 - tail])?))
}

/// Cylinder depths `(p_k, q_k)`: the deeper ball loses all but `1/(k+1)` of the weight,
/// the point `x` winning at odd `k`.
pub fn give_and_take_depths(k: usize) -> (usize, usize) {
    let d = rat::ceil_log2(k as u64) as usize;
    let b = k * (d + 2);
    if k % 2 == 1 {
        (b, b + d)
    } else {
        (b + d, b)
    }
}
