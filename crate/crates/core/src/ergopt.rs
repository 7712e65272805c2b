//! Ergodic optimization for locally constant functions on full shifts and SFTs.
//!
//! Averages of a depth-`m` function along periodic orbits are cycle means in
//! the graph whose nodes are allowed `(m-1)`-words. Karp's recurrence gives the
//! extreme means exactly; witnesses come from the tight subgraph.

use std::collections::HashMap;

use num_traits::Zero;

use crate::averaging::{birkhoff_limit_periodic, LocallyConstantFn, Observable};
use crate::measure::InvariantMeasure;
use crate::rat::{self, Q};
use crate::space::{Point, ShiftPoint, Sft, Space, Word};
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub word: Word,
    pub weight: Q,
}

#[derive(Clone, Debug)]
pub struct DeBruijnGraph {
    pub nodes: Vec<Word>,
    pub edges: Vec<Edge>,
    incoming: Vec<Vec<usize>>,
    outgoing: Vec<Vec<usize>>,
}

impl DeBruijnGraph {
    /// Graph for `f`; depth-1 functions are lifted to depth 2 so that edges
    /// still respect the transition rule.
    pub fn new(f: &LocallyConstantFn, sft: &Sft) -> Result<Self> {
        if f.alphabet() != sft.alphabet() {
            return Err(Error::Backend("function and subshift use different alphabets".into()));
        }
        let d = f.depth().max(2);
        let g = f.lift(d);
        let a = sft.alphabet();
        let mut nodes = Vec::new();
        let mut index = HashMap::new();
        all_words(a, d - 1, &mut |w| {
            if sft.admits_word(w) {
                index.insert(w.to_vec(), nodes.len());
                nodes.push(w.to_vec());
            }
        });
        let mut edges = Vec::new();
        all_words(a, d, &mut |w| {
            if sft.admits_word(w) {
                edges.push(Edge {
                    from: index[&w[..d - 1]],
                    to: index[&w[1..]],
                    word: w.to_vec(),
                    weight: g.eval_word(w).clone(),
                });
            }
        });
        let mut incoming = vec![Vec::new(); nodes.len()];
        let mut outgoing = vec![Vec::new(); nodes.len()];
        for (i, e) in edges.iter().enumerate() {
            incoming[e.to].push(i);
            outgoing[e.from].push(i);
        }
        Ok(DeBruijnGraph { nodes, edges, incoming, outgoing })
    }

    pub fn outgoing(&self, v: usize) -> &[usize] {
        &self.outgoing[v]
    }

    fn reaches_all(&self, forward: bool) -> bool {
        let n = self.nodes.len();
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            let list = if forward { &self.outgoing[u] } else { &self.incoming[u] };
            for &e in list {
                let v = if forward { self.edges[e].to } else { self.edges[e].from };
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|b| b)
    }

    pub fn is_strongly_connected(&self) -> bool {
        !self.nodes.is_empty() && self.reaches_all(true) && self.reaches_all(false)
    }

    /// Maximum cycle mean with weights multiplied by `sign`.
    fn karp(&self, sign: &Q) -> Q {
        let n = self.nodes.len();
        let mut d: Vec<Vec<Option<Q>>> = vec![vec![None; n]; n + 1];
        d[0][0] = Some(Q::zero());
        for k in 1..=n {
            for v in 0..n {
                let mut best: Option<Q> = None;
                for &e in &self.incoming[v] {
                    let edge = &self.edges[e];
                    if let Some(prev) = &d[k - 1][edge.from] {
                        let cand = prev + &edge.weight * sign;
                        if best.as_ref().is_none_or(|b| cand > *b) {
                            best = Some(cand);
                        }
                    }
                }
                d[k][v] = best;
            }
        }
        let mut answer: Option<Q> = None;
        for v in 0..n {
            let Some(dn) = &d[n][v] else { continue };
            let worst = (0..n)
                .filter_map(|k| d[k][v].as_ref().map(|dk| (dn - dk) / rat::int((n - k) as i64)))
                .min();
            if let Some(w) = worst {
                if answer.as_ref().is_none_or(|a| w > *a) {
                    answer = Some(w);
                }
            }
        }
        answer.expect("strongly connected graph has a cycle")
    }

    /// Shortlex-least cycle word among cycles of mean `lambda` (weights times `sign`).
    fn witness(&self, sign: &Q, lambda: &Q) -> Word {
        let n = self.nodes.len();
        let w: Vec<Q> = self.edges.iter().map(|e| &e.weight * sign - lambda).collect();
        let mut pot = vec![Q::zero(); n];
        for _ in 0..=n {
            let mut changed = false;
            for (i, e) in self.edges.iter().enumerate() {
                let cand = &pot[e.from] + &w[i];
                if cand > pot[e.to] {
                    pot[e.to] = cand;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let tight: Vec<Vec<usize>> = (0..n)
            .map(|u| {
                self.outgoing[u]
                    .iter()
                    .filter(|&&e| &pot[u] + &w[e] == pot[self.edges[e].to])
                    .map(|&e| self.edges[e].to)
                    .collect()
            })
            .collect();
        for len in 1..=n {
            let mut best: Option<Word> = None;
            for s in 0..n {
                if let Some(word) = self.least_closed_walk(&tight, s, len) {
                    if best.as_ref().is_none_or(|b| word < *b) {
                        best = Some(word);
                    }
                }
            }
            if let Some(b) = best {
                return b;
            }
        }
        unreachable!("tight subgraph always contains an optimal cycle")
    }

    /// Lexicographically least symbol word of a closed walk of length `len` at `s`.
    fn least_closed_walk(&self, tight: &[Vec<usize>], s: usize, len: usize) -> Option<Word> {
        let n = self.nodes.len();
        // back[t][v]: v reaches s in exactly t tight steps
        let mut back = vec![vec![false; n]; len + 1];
        back[0][s] = true;
        for t in 1..=len {
            for u in 0..n {
                back[t][u] = tight[u].iter().any(|&v| back[t - 1][v]);
            }
        }
        if !back[len][s] {
            return None;
        }
        let mut word = vec![self.nodes[s][0]];
        let mut current = vec![s];
        for t in 1..len {
            let mut cands: Vec<usize> = current
                .iter()
                .flat_map(|&u| tight[u].iter().copied())
                .filter(|&v| back[len - t][v])
                .collect();
            cands.sort();
            cands.dedup();
            let sym = cands.iter().map(|&v| self.nodes[v][0]).min()?;
            word.push(sym);
            current = cands.into_iter().filter(|&v| self.nodes[v][0] == sym).collect();
        }
        Some(word)
    }

    /// `max` (sign 1) or `-min` (sign -1) of walk weights over exactly `t` edges, `t = 1..=k`.
    fn walk_extremes(&self, sign: &Q, k: usize) -> Vec<Q> {
        let n = self.nodes.len();
        let mut best = vec![Q::zero(); n];
        let mut out = Vec::with_capacity(k);
        for _ in 0..k {
            let mut next: Vec<Option<Q>> = vec![None; n];
            for e in &self.edges {
                let cand = &best[e.from] + &e.weight * sign;
                if next[e.to].as_ref().is_none_or(|b| cand > *b) {
                    next[e.to] = Some(cand);
                }
            }
            best = next.into_iter().map(|x| x.expect("every node has a predecessor")).collect();
            out.push(best.iter().max().unwrap().clone());
        }
        out
    }
}

fn all_words(a: u8, len: usize, visit: &mut dyn FnMut(&[u8])) {
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

fn connected_graph(f: &LocallyConstantFn, sft: &Sft) -> Result<DeBruijnGraph> {
    let g = DeBruijnGraph::new(f, sft)?;
    if !g.is_strongly_connected() {
        return Err(Error::NotStronglyConnected);
    }
    Ok(g)
}

/// `(a̅(f), witness cycle word)`.
pub fn max_mean_cycle(f: &LocallyConstantFn, sft: &Sft) -> Result<(Q, Word)> {
    let g = connected_graph(f, sft)?;
    let one = rat::int(1);
    let lambda = g.karp(&one);
    let w = g.witness(&one, &lambda);
    Ok((lambda, w))
}

/// `(a̲(f), witness cycle word)`.
pub fn min_mean_cycle(f: &LocallyConstantFn, sft: &Sft) -> Result<(Q, Word)> {
    let g = connected_graph(f, sft)?;
    let neg = rat::int(-1);
    let lambda = g.karp(&neg);
    let w = g.witness(&neg, &lambda);
    Ok((-lambda, w))
}

/// `d̅_k`: largest `k`-window average over allowed words.
pub fn finite_sup_avg(f: &LocallyConstantFn, k: usize, sft: &Sft) -> Result<Q> {
    Ok(finite_sup_series(f, k, sft)?.pop().unwrap())
}

pub fn finite_inf_avg(f: &LocallyConstantFn, k: usize, sft: &Sft) -> Result<Q> {
    Ok(finite_inf_series(f, k, sft)?.pop().unwrap())
}

/// `d̅_1, …, d̅_K`.
pub fn finite_sup_series(f: &LocallyConstantFn, k: usize, sft: &Sft) -> Result<Vec<Q>> {
    if k == 0 {
        return Err(Error::Invalid("horizon must be at least 1".into()));
    }
    let g = DeBruijnGraph::new(f, sft)?;
    let s = g.walk_extremes(&rat::int(1), k);
    Ok(s.into_iter().enumerate().map(|(i, v)| v / rat::int(i as i64 + 1)).collect())
}

pub fn finite_inf_series(f: &LocallyConstantFn, k: usize, sft: &Sft) -> Result<Vec<Q>> {
    if k == 0 {
        return Err(Error::Invalid("horizon must be at least 1".into()));
    }
    let g = DeBruijnGraph::new(f, sft)?;
    let s = g.walk_extremes(&rat::int(-1), k);
    Ok(s.into_iter().enumerate().map(|(i, v)| -v / rat::int(i as i64 + 1)).collect())
}

/// Constant `C` in `a̅ ≤ d̅_k ≤ a̅ + C·(max f − min f)/k`.
pub fn sandwich_factor(f: &LocallyConstantFn, sft: &Sft) -> Result<u64> {
    if sft.is_full() {
        Ok((sft.alphabet() as u64).pow(f.depth() as u32 - 1))
    } else {
        Ok(DeBruijnGraph::new(f, sft)?.nodes.len() as u64)
    }
}

#[derive(Clone, Debug)]
pub struct ErgOptReport {
    pub abar: Q,
    pub aunder: Q,
    pub cbar: Q,
    pub cunder: Q,
    pub witness_max: Word,
    pub witness_min: Word,
    pub dbar: Vec<Q>,
    pub dunder: Vec<Q>,
    pub bbar_observed: Option<Q>,
    pub bunder_observed: Option<Q>,
    pub sandwich_holds: bool,
    pub converged: bool,
    pub witnesses_consistent: bool,
    pub observed_within_extremes: bool,
    pub bbar_attains_abar: bool,
    pub bunder_attains_aunder: bool,
}

impl ErgOptReport {
    pub fn all_pass(&self) -> bool {
        self.sandwich_holds && self.converged && self.witnesses_consistent && self.observed_within_extremes
    }
}

pub fn jenkinson_check(f: &LocallyConstantFn, sft: &Sft, horizon: usize, typical: &[ShiftPoint]) -> Result<ErgOptReport> {
    let (abar, witness_max) = max_mean_cycle(f, sft)?;
    let (aunder, witness_min) = min_mean_cycle(f, sft)?;
    let dbar = finite_sup_series(f, horizon, sft)?;
    let dunder = finite_inf_series(f, horizon, sft)?;
    let space = Space::Shift(sft.clone());
    let obs = Observable::Shift(f.clone());
    let osc = f.max() - f.min();
    let factor = Q::from_integer(sandwich_factor(f, sft)?.into());
    let mut sandwich_holds = true;
    for (i, (hi, lo)) in dbar.iter().zip(&dunder).enumerate() {
        let slack = &factor * &osc / rat::int(i as i64 + 1);
        if !(*hi >= abar && *hi <= &abar + &slack && *lo <= aunder && *lo >= &aunder - &slack) {
            sandwich_holds = false;
        }
    }
    let slack_k = &factor * &osc / rat::int(horizon as i64);
    let converged = dbar.last().unwrap() - &abar <= slack_k && &aunder - dunder.last().unwrap() <= slack_k;
    let witnesses_consistent = InvariantMeasure::orbit(&witness_max)?.integrate(&space, &obs)? == abar
        && InvariantMeasure::orbit(&witness_min)?.integrate(&space, &obs)? == aunder;
    let mut limits = Vec::new();
    for x in typical {
        if !sft.admits_point(x) {
            return Err(Error::Invalid(format!("typical point {x} is not in the subshift")));
        }
        limits.push(birkhoff_limit_periodic(&space, &obs, &Point::Shift(x.clone()))?);
    }
    let bbar_observed = limits.iter().max().cloned();
    let bunder_observed = limits.iter().min().cloned();
    let observed_within_extremes = bbar_observed.as_ref().is_none_or(|b| *b <= abar)
        && bunder_observed.as_ref().is_none_or(|b| *b >= aunder);
    Ok(ErgOptReport {
        cbar: abar.clone(),
        cunder: aunder.clone(),
        bbar_attains_abar: bbar_observed.as_ref() == Some(&abar),
        bunder_attains_aunder: bunder_observed.as_ref() == Some(&aunder),
        abar,
        aunder,
        witness_max,
        witness_min,
        dbar,
        dunder,
        bbar_observed,
        bunder_observed,
        sandwich_holds,
        converged,
        witnesses_consistent,
        observed_within_extremes,
    })
}
