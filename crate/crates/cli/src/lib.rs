//! Scenario runner for the `ergolab` binary.

pub mod literal;

use std::fs;
use std::path::{Path, PathBuf};

use ergolab::averaging::{spatial_temporal_avg, LocallyConstantFn, Observable};
use ergolab::construct::{
    alternating_runs, chase_compile, factorial_blocks, give_and_take_depths, limit_set_estimate, sandwich_compile,
    ChaseOptions, ChaseTarget, Component, LimitSetEstimate, TargetSetK,
};
use ergolab::ergopt::jenkinson_check;
use ergolab::measure::{AmbientMeasure, InvariantMeasure};
use ergolab::rat::{self, Q};
use ergolab::space::{parse_word, word_string, Mohoc, MultiBall, Point, ShiftPoint, Sft, Space};
use ergolab::spec::{
    extreme_targets, is_delta_tracing, li_wu_check, modulus_sft, oscillation_compile, trace_point,
    OscillationOptions, SamplingPoly, Segment, SpecModulus, SpecificationPlan,
};
use ergolab::{averaging, Error};
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("construction failed: {0}")]
    Failure(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failure(_) => 1,
            CliError::Input(_) | CliError::Io(_) => 2,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Infeasible(_) | Error::ZeroMeasure => CliError::Failure(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

/// One output file body, in the order `--out` paths are matched.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Artifact {
    pub role: &'static str,
    pub content: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub artifacts: Vec<Artifact>,
    pub summary: Value,
    pub pass: bool,
}

impl Report {
    /// Artifacts followed by the summary JSON.
    pub fn files(&self) -> Vec<Artifact> {
        let mut v = self.artifacts.clone();
        v.push(Artifact { role: "summary", content: emit_json(&self.summary) });
        v
    }
}

pub fn emit_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values always serialize");
    s.push('\n');
    s
}

pub fn emit_csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s
}

/// Write files to the given paths in order; print the summary when no path receives it.
pub fn emit(report: &Report, out: &[PathBuf]) -> Result<(), CliError> {
    let files = report.files();
    for (path, file) in out.iter().zip(&files) {
        fs::write(path, &file.content)?;
    }
    if out.len() < files.len() {
        print!("{}", files.last().unwrap().content);
    }
    Ok(())
}

fn frac(x: &Q) -> String {
    rat::fmt_frac(x)
}

fn dec(x: &Q) -> String {
    rat::fmt_dec12(x)
}

fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

fn clusters_json(est: &LimitSetEstimate) -> Value {
    Value::Array(
        est.clusters
            .iter()
            .map(|(c, n)| json!({"center": frac(c), "center_decimal": dec(c), "size": n}))
            .collect(),
    )
}

fn series_csv(values: &[Q]) -> String {
    let rows: Vec<Vec<String>> =
        values.iter().enumerate().map(|(i, v)| vec![(i + 1).to_string(), frac(v), dec(v)]).collect();
    emit_csv(&["k", "value", "value_decimal"], &rows)
}

pub const EXAMPLES: [&str; 2] = ["cant-take-limsups", "give-and-take"];

pub fn run_example(name: &str, horizon: usize) -> Result<Report, CliError> {
    if !EXAMPLES.contains(&name) {
        return Err(input(format!("unknown example {name:?}; expected one of {EXAMPLES:?}")));
    }
    if horizon < 4 {
        return Err(input("examples need horizon at least 4"));
    }
    let space = Space::full_shift(2);
    let mu = AmbientMeasure::uniform(2);
    let f = Observable::Shift(LocallyConstantFn::indicator(2, &[0]));
    if name == "cant-take-limsups" {
        let mut blocks = 9;
        while factorial_blocks(blocks).iter().sum::<usize>() < horizon {
            blocks += 1;
        }
        let c = factorial_blocks(blocks);
        let (x, y) = alternating_runs(&c)?;
        let (px, py) = (Point::Shift(x.clone()), Point::Shift(y));
        let values = (1..=horizon)
            .into_par_iter()
            .map(|k| {
                let r = rat::pow2_neg(k as u64);
                let mb = MultiBall::new(vec![(px.clone(), r.clone()), (py.clone(), r)])?;
                Ok(spatial_temporal_avg(&space, &mu, &mb, &f, k)?.value)
            })
            .collect::<Result<Vec<Q>, Error>>()?;
        let half = rat::q(1, 2);
        let all_half = values.iter().all(|v| *v == half);
        let mut running = Q::zero();
        let mut rows = Vec::new();
        let mut s = 0usize;
        let mut bounds_ok = true;
        for (i, ci) in c.iter().enumerate().take(9) {
            s += ci;
            if i % 2 == 0 {
                let n = i / 2 + 1;
                let avg = averaging::birkhoff_avg(&space, &f, &px, s)?;
                running = running.max(avg.clone());
                let bound = rat::q(2 * n as i64 - 2, 2 * n as i64 - 1);
                let ok = running >= bound;
                bounds_ok &= ok;
                rows.push(json!({"n": n, "s": s, "avg": frac(&avg), "running_max": frac(&running), "bound": frac(&bound), "ok": ok}));
            }
        }
        let pass = all_half && bounds_ok;
        let summary = json!({
            "example": name,
            "horizon": horizon,
            "all_values_one_half": all_half,
            "running_max": rows,
            "pass": pass,
        });
        return Ok(Report { artifacts: vec![Artifact { role: "csv", content: series_csv(&values) }], summary, pass });
    }
    let x = Point::Shift(ShiftPoint::parse("|10", 2)?);
    let y = Point::Shift(ShiftPoint::parse("|110", 2)?);
    let values = (1..=horizon)
        .into_par_iter()
        .map(|k| {
            let (p, q) = give_and_take_depths(k);
            let mb = MultiBall::new(vec![(x.clone(), rat::pow2_neg(p as u64)), (y.clone(), rat::pow2_neg(q as u64))])?;
            Ok(spatial_temporal_avg(&space, &mu, &mb, &f, k)?.value)
        })
        .collect::<Result<Vec<Q>, Error>>()?;
    let mut misses = Vec::new();
    for (i, v) in values.iter().enumerate().skip(9) {
        let k = i + 1;
        let target = if k % 2 == 0 { rat::q(1, 3) } else { rat::q(1, 2) };
        if (v - target).abs() > rat::q(1, k as i64) {
            misses.push(k);
        }
    }
    let est = limit_set_estimate(&values, &rat::q(1, 20), &rat::q(1, 2))?;
    let expected = [rat::q(1, 3), rat::q(1, 2)];
    let clusters_ok = est.clusters.len() == 2
        && expected.iter().all(|t| est.clusters.iter().any(|(c, _)| (c - t).abs() <= rat::q(1, 20)));
    let pass = misses.is_empty() && clusters_ok;
    let summary = json!({
        "example": name,
        "horizon": horizon,
        "clusters": clusters_json(&est),
        "parity_misses": misses,
        "pass": pass,
    });
    Ok(Report { artifacts: vec![Artifact { role: "csv", content: series_csv(&values) }], summary, pass })
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentLiteral {
    pub a: usize,
    pub b: usize,
    pub x: String,
}

/// Parsed scenario file; literals stay as JSON until the space is known.
#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub construct: Option<String>,
    pub space: Option<Value>,
    pub measure: Option<Value>,
    pub f: Option<Value>,
    pub x: Option<String>,
    pub y: Option<String>,
    #[serde(rename = "K")]
    pub k_set: Option<Vec<Value>>,
    pub target: Option<Value>,
    pub targets: Option<Vec<Value>>,
    pub polys: Option<Vec<String>>,
    pub levels: Option<usize>,
    pub horizon: Option<usize>,
    pub eps: Option<Value>,
    pub tail: Option<Value>,
    pub tolerance: Option<Value>,
    pub family_depth: Option<usize>,
    pub tracked_classes: Option<usize>,
    pub delta: Option<Value>,
    pub segments: Option<Vec<SegmentLiteral>>,
    pub modulus: Option<Vec<usize>>,
    pub radii: Option<Vec<Value>>,
    pub deltas: Option<Vec<Value>>,
    pub lambda: Option<Value>,
    pub typical: Option<Vec<String>>,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| input(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| input(format!("bad scenario: {e}")))
    }

    fn require<'a, T>(&self, v: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
        v.as_ref().ok_or_else(|| input(format!("scenario is missing {name:?}")))
    }

    fn q_or(&self, v: &Option<Value>, default: Q) -> Result<Q, CliError> {
        v.as_ref().map(literal::rational).transpose().map(|o| o.unwrap_or(default))
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Overrides {
    pub horizon: Option<usize>,
    pub seed: u64,
}

pub const CONSTRUCTS: [&str; 6] = ["sandwich", "chase", "oscillate", "trace", "ergopt", "decay-check"];

/// Dispatch on the scenario's `construct` field.
pub fn run_scenario(path: &Path, ov: &Overrides) -> Result<Report, CliError> {
    let sc = Scenario::load(path)?;
    let kind = sc.construct.clone().ok_or_else(|| input("scenario is missing \"construct\""))?;
    run_construct(&kind, &sc, ov)
}

pub fn run_construct(kind: &str, sc: &Scenario, ov: &Overrides) -> Result<Report, CliError> {
    if let Some(c) = &sc.construct {
        if c != kind {
            return Err(input(format!("scenario describes {c:?}, not {kind:?}")));
        }
    }
    let horizon = |default: usize| ov.horizon.or(sc.horizon).unwrap_or(default);
    let mut report = match kind {
        "sandwich" => run_sandwich(sc, horizon(1024)),
        "chase" => run_chase(sc, horizon(256)),
        "oscillate" => run_oscillate(sc, horizon(10_000)),
        "trace" => run_trace(sc),
        "ergopt" => run_ergopt(sc, horizon(64)),
        "decay-check" => run_decay(sc, horizon(64)),
        other => Err(input(format!("unknown construct {other:?}; expected one of {CONSTRUCTS:?}"))),
    }?;
    let mut echo = serde_json::to_value(sc).expect("scenario serializes");
    if let Value::Object(m) = &mut echo {
        m.retain(|_, v| !v.is_null());
    }
    report.summary["scenario"] = echo;
    Ok(report)
}

fn target_set(items: &[Value]) -> Result<TargetSetK, CliError> {
    let comps = items
        .iter()
        .map(|v| match v {
            Value::Array(ab) if ab.len() == 2 => {
                Ok(Component::Interval(literal::rational(&ab[0])?, literal::rational(&ab[1])?))
            }
            other => Ok(Component::Point(literal::rational(other)?)),
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(TargetSetK::new(comps)?)
}

fn run_sandwich(sc: &Scenario, horizon: usize) -> Result<Report, CliError> {
    let space = literal::space(sc.space.as_ref())?;
    let mu = literal::measure(&space, sc.measure.as_ref())?;
    let f = literal::function(&space, sc.require(&sc.f, "f")?)?;
    let x = literal::point(&space, sc.require(&sc.x, "x")?)?;
    let y = literal::point(&space, sc.require(&sc.y, "y")?)?;
    let k = target_set(sc.require(&sc.k_set, "K")?)?;
    let eps = sc.q_or(&sc.eps, rat::q(1, 20))?;
    let tail = sc.q_or(&sc.tail, rat::q(1, 2))?;
    let run = sandwich_compile(&space, &mu, &x, &y, &f, &k, horizon)?;
    let est = limit_set_estimate(&run.values(), &eps, &tail)?;
    let rows: Vec<Vec<String>> = run
        .rows
        .iter()
        .map(|r| {
            vec![
                r.k.to_string(),
                r.class.to_string(),
                frac(&r.target),
                frac(&r.t),
                frac(&r.radii.0),
                frac(&r.radii.1),
                frac(&r.value),
                dec(&r.value),
                frac(&r.bound),
                r.certified().to_string(),
            ]
        })
        .collect();
    let csv = emit_csv(&["k", "i_k", "target", "t_k", "r_k", "s_k", "value", "value_decimal", "bound", "certified"], &rows);
    let pass = run.all_certified();
    let summary = json!({
        "construct": "sandwich",
        "horizon": horizon,
        "u": frac(&run.u),
        "v": frac(&run.v),
        "clusters": clusters_json(&est),
        "certificates_hold": pass,
        "pass": pass,
    });
    Ok(Report { artifacts: vec![Artifact { role: "csv", content: csv }], summary, pass })
}

fn chase_target(space: &Space, v: &Value) -> Result<ChaseTarget, CliError> {
    if v.as_str() == Some("whole_simplex") {
        return Ok(ChaseTarget::WholeSimplex);
    }
    let hull = v.get("hull").ok_or_else(|| input("chase target is \"whole_simplex\" or {\"hull\":…}"))?;
    let a = literal::alphabet(space);
    let orbits = hull
        .get("orbits")
        .and_then(Value::as_array)
        .ok_or_else(|| input("hull needs orbits"))?
        .iter()
        .map(|w| Ok(parse_word(w.as_str().unwrap_or(""), a)?))
        .collect::<Result<Vec<_>, CliError>>()?;
    let weights = hull
        .get("weights")
        .and_then(Value::as_array)
        .ok_or_else(|| input("hull needs weights"))?
        .iter()
        .map(literal::rationals)
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ChaseTarget::FiniteHull { orbits, weights })
}

fn run_chase(sc: &Scenario, horizon: usize) -> Result<Report, CliError> {
    let space = literal::space(sc.space.as_ref())?;
    let mu = literal::measure(&space, sc.measure.as_ref())?;
    let target = chase_target(&space, sc.require(&sc.target, "target")?)?;
    let mut opts = ChaseOptions::default();
    if let Some(d) = sc.family_depth {
        opts.family_depth = d;
    }
    if let Some(t) = sc.tracked_classes {
        opts.tracked_classes = t;
    }
    let run = chase_compile(&space, &mu, &target, horizon, &opts)?;
    let rows: Vec<Vec<String>> = run
        .dist_table
        .iter()
        .map(|r| {
            vec![
                r.class.to_string(),
                r.l.to_string(),
                r.k.to_string(),
                r.target.describe(),
                frac(&r.dist.lo),
                frac(&r.dist.hi),
                dec(&r.dist.hi),
            ]
        })
        .collect();
    let csv = emit_csv(&["class", "l", "k", "target", "dist_lo", "dist_hi", "dist_hi_decimal"], &rows);
    let mut classes: Vec<usize> = run.dist_table.iter().map(|r| r.class).collect();
    classes.dedup();
    let per_class: Vec<Value> = classes
        .iter()
        .map(|&c| {
            let last = run.rows_for(c).last().unwrap();
            json!({
                "class": c,
                "target": last.target.describe(),
                "last_k": last.k,
                "last_dist_hi": frac(&last.dist.hi),
                "last_dist_hi_decimal": dec(&last.dist.hi),
                "monotone": run.monotone(c),
            })
        })
        .collect();
    let pass = run.all_certified();
    let summary = json!({
        "construct": "chase",
        "horizon": horizon,
        "steps": run.steps.len(),
        "classes": per_class,
        "certificates_hold": pass,
        "pass": pass,
    });
    Ok(Report { artifacts: vec![Artifact { role: "csv", content: csv }], summary, pass })
}

fn shift_of(space: &Space) -> Result<Sft, CliError> {
    match space {
        Space::Shift(s) => Ok(s.clone()),
        Space::Circle { .. } => Err(input("this construction needs a shift space")),
    }
}

/// Oscillation run from already parsed pieces.
pub fn oscillate(
    sft: &Sft,
    targets: &[InvariantMeasure],
    polys: &[SamplingPoly],
    levels: usize,
    horizon: usize,
    f: Option<&LocallyConstantFn>,
    tolerance: Option<&Q>,
) -> Result<Report, CliError> {
    let opts = OscillationOptions { levels, ..OscillationOptions::default() };
    let run = oscillation_compile(sft, targets, polys, horizon, &opts)?;
    let rows: Vec<Vec<String>> = run
        .checkpoints
        .iter()
        .map(|c| {
            vec![
                c.l.to_string(),
                (c.poly + 1).to_string(),
                c.k.to_string(),
                c.n.to_string(),
                c.target.describe(),
                frac(&c.dist.lo),
                frac(&c.dist.hi),
                dec(&c.dist.hi),
                frac(&c.bound),
                c.certified().to_string(),
            ]
        })
        .collect();
    let csv = emit_csv(&["l", "pi", "k", "n", "target", "dist_lo", "dist_hi", "dist_hi_decimal", "bound", "certified"], &rows);
    let reached = run.levels_reached(polys.len());
    let mut pass = run.all_certified() && reached == levels;
    let mut summary = json!({
        "construct": "oscillate",
        "horizon": horizon,
        "levels": levels,
        "levels_certified": reached,
        "prefix_length": run.prefix.len(),
        "planned_ends": run.planned_ends,
        "targets": targets.iter().map(InvariantMeasure::describe).collect::<Vec<_>>(),
    });
    if let Some(f) = f {
        let r = li_wu_check(&run.prefix, f, sft, horizon, None)?;
        let within = tolerance.map(|t| r.gap_max < *t && r.gap_min < *t);
        if let Some(w) = within {
            pass &= w;
        }
        summary["li_wu"] = json!({
            "abar": frac(&r.abar),
            "aunder": frac(&r.aunder),
            "burn_in": r.burn_in,
            "last_k": r.last_k,
            "running_max": frac(&r.running_max),
            "running_min": frac(&r.running_min),
            "gap_max": dec(&r.gap_max),
            "gap_min": dec(&r.gap_min),
            "within_tolerance": within,
        });
    }
    summary["pass"] = json!(pass);
    let mut prefix = word_string(&run.prefix);
    prefix.push('\n');
    Ok(Report {
        artifacts: vec![Artifact { role: "prefix", content: prefix }, Artifact { role: "csv", content: csv }],
        summary,
        pass,
    })
}

pub fn parse_polys(list: &str) -> Result<Vec<SamplingPoly>, CliError> {
    list.split(',').map(|p| Ok(SamplingPoly::parse(p)?)).collect()
}

fn run_oscillate(sc: &Scenario, horizon: usize) -> Result<Report, CliError> {
    let space = literal::space(sc.space.as_ref())?;
    let sft = shift_of(&space)?;
    let f = sc.f.as_ref().map(|v| literal::function(&space, v)).transpose()?;
    let f = f.map(|o| o.as_shift().cloned()).transpose()?;
    let targets = match (&sc.targets, &f) {
        (Some(t), _) => t.iter().map(|v| literal::invariant(&space, v)).collect::<Result<Vec<_>, _>>()?,
        (None, Some(f)) => extreme_targets(f, &sft)?,
        (None, None) => return Err(input("oscillate needs \"targets\" or \"f\"")),
    };
    let polys = match &sc.polys {
        Some(p) => p.iter().map(|s| Ok(SamplingPoly::parse(s)?)).collect::<Result<Vec<_>, CliError>>()?,
        None => vec![SamplingPoly::identity()],
    };
    let tol = sc.tolerance.as_ref().map(literal::rational).transpose()?;
    oscillate(&sft, &targets, &polys, sc.levels.unwrap_or(4), horizon, f.as_ref(), tol.as_ref())
}

fn run_trace(sc: &Scenario) -> Result<Report, CliError> {
    let space = literal::space(sc.space.as_ref())?;
    let sft = shift_of(&space)?;
    let delta = literal::rational(sc.require(&sc.delta, "delta")?)?;
    let segs = sc
        .require(&sc.segments, "segments")?
        .iter()
        .map(|s| Ok(Segment { a: s.a, b: s.b, x: ShiftPoint::parse(&s.x, sft.alphabet())? }))
        .collect::<Result<Vec<_>, CliError>>()?;
    let xi = SpecificationPlan::new(segs)?;
    let modulus = match &sc.modulus {
        Some(g) if !g.is_empty() => SpecModulus::PerIndex(g.clone()),
        Some(_) => return Err(input("modulus needs at least one gap")),
        None => modulus_sft(&sft, &delta)?,
    };
    let y = trace_point(&sft, &xi, &delta, &modulus)?;
    let ok = is_delta_tracing(&y, &xi, &delta);
    let summary = json!({
        "construct": "trace",
        "delta": frac(&delta),
        "y": y.to_string(),
        "delta_tracing": ok,
        "pass": ok,
    });
    Ok(Report { artifacts: vec![], summary, pass: ok })
}

/// Random spaced specifications checked against the tracing contract.
pub fn trace_fuzz(space: &Space, cases: usize, seed: u64) -> Result<Report, CliError> {
    let sft = shift_of(space)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let deltas = [rat::q(1, 2), rat::q(1, 4), rat::q(1, 16)];
    let a = sft.alphabet();
    let mut failures = Vec::new();
    let walk = |rng: &mut ChaCha8Rng, len: usize, start: Option<u8>| {
        let mut w = Vec::new();
        let mut prev = start;
        for _ in 0..len {
            let s = match prev {
                None => rng.gen_range(0..a),
                Some(p) => {
                    let succ: Vec<u8> = sft.successors(p).collect();
                    succ[rng.gen_range(0..succ.len())]
                }
            };
            w.push(s);
            prev = Some(s);
        }
        w
    };
    for case in 0..cases {
        let delta = &deltas[case % deltas.len()];
        let SpecModulus::Constant(gap) = modulus_sft(&sft, delta)? else { unreachable!() };
        let mut segs = Vec::new();
        let mut start = rng.gen_range(0..4usize);
        for _ in 0..rng.gen_range(1..=5) {
            let x = loop {
                let (lp, lq) = (rng.gen_range(0..5), rng.gen_range(1..5));
                let pre = walk(&mut rng, lp, None);
                let per = walk(&mut rng, lq, pre.last().copied());
                let mut cyc = per.clone();
                cyc.push(per[0]);
                if sft.admits_word(&cyc) {
                    break ShiftPoint::new(pre, per)?;
                }
            };
            let b = start + rng.gen_range(0..8);
            segs.push(Segment { a: start, b, x });
            start = b + gap + rng.gen_range(0..4);
        }
        let xi = SpecificationPlan::new(segs)?;
        let ok = trace_point(&sft, &xi, delta, &SpecModulus::Constant(gap))
            .map(|y| sft.admits_point(&y) && is_delta_tracing(&y, &xi, delta))
            .unwrap_or(false);
        if !ok {
            failures.push(case);
        }
    }
    let pass = failures.is_empty();
    let summary = json!({"construct": "trace", "fuzz_cases": cases, "seed": seed, "failures": failures, "pass": pass});
    Ok(Report { artifacts: vec![], summary, pass })
}

fn run_ergopt(sc: &Scenario, horizon: usize) -> Result<Report, CliError> {
    let space = literal::space(sc.space.as_ref())?;
    let sft = shift_of(&space)?;
    let f = literal::function(&space, sc.require(&sc.f, "f")?)?;
    let f = f.as_shift()?.clone();
    let typical = sc
        .typical
        .as_ref()
        .map(|v| v.iter().map(|s| Ok(ShiftPoint::parse(s, sft.alphabet())?)).collect::<Result<Vec<_>, CliError>>())
        .transpose()?
        .unwrap_or_default();
    let r = jenkinson_check(&f, &sft, horizon, &typical)?;
    let pairs = |v: &[Q]| -> Vec<[String; 2]> { v.iter().enumerate().map(|(i, x)| [(i + 1).to_string(), frac(x)]).collect() };
    let rows: Vec<Vec<String>> = r
        .dbar
        .iter()
        .zip(&r.dunder)
        .enumerate()
        .map(|(i, (a, b))| vec![(i + 1).to_string(), frac(a), dec(a), frac(b), dec(b)])
        .collect();
    let csv = emit_csv(&["k", "dbar", "dbar_decimal", "dunder", "dunder_decimal"], &rows);
    let pass = r.all_pass();
    let opt = |x: &Option<Q>| x.as_ref().map(frac);
    let summary = json!({
        "construct": "ergopt",
        "horizon": horizon,
        "abar": frac(&r.abar),
        "aunder": frac(&r.aunder),
        "cbar": frac(&r.cbar),
        "cunder": frac(&r.cunder),
        "witness": word_string(&r.witness_max),
        "witness_min": word_string(&r.witness_min),
        "dbar": pairs(&r.dbar),
        "dunder": pairs(&r.dunder),
        "bbar_observed": opt(&r.bbar_observed),
        "bunder_observed": opt(&r.bunder_observed),
        "checks": {
            "sandwich_holds": r.sandwich_holds,
            "converged": r.converged,
            "witnesses_consistent": r.witnesses_consistent,
            "observed_within_extremes": r.observed_within_extremes,
            "bbar_attains_abar": r.bbar_attains_abar,
            "bunder_attains_aunder": r.bunder_attains_aunder,
        },
        "pass": pass,
    });
    Ok(Report { artifacts: vec![Artifact { role: "csv", content: csv }], summary, pass })
}

fn run_decay(sc: &Scenario, horizon: usize) -> Result<Report, CliError> {
    let space = literal::space(sc.space.as_ref())?;
    let mohoc = match &sc.lambda {
        Some(l) => Mohoc::new(literal::rational(l)?)?,
        None => space.mohoc(),
    };
    let bases = sc
        .require(&sc.radii, "radii")?
        .iter()
        .map(literal::rational)
        .collect::<Result<Vec<_>, _>>()?;
    if bases.is_empty() || bases.iter().any(|b| !b.is_positive() || *b >= Q::from_integer(1.into())) {
        return Err(input("radii are geometric bases in (0,1): r_k = c^k"));
    }
    let deltas = sc
        .require(&sc.deltas, "deltas")?
        .iter()
        .map(literal::rational)
        .collect::<Result<Vec<_>, _>>()?;
    if deltas.iter().any(|d| !d.is_positive()) {
        return Err(input("deltas must be positive"));
    }
    let radii = |k: usize| bases.iter().map(|c| rat::pow_u(c, k as u64)).collect::<Vec<_>>();
    let report = averaging::decay_fast_check(&mohoc, &radii, &deltas, horizon);
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| vec![r.k.to_string(), frac(&r.delta), r.ball.to_string(), frac(&r.fraction), dec(&r.fraction)])
        .collect();
    let csv = emit_csv(&["k", "delta", "ball", "fraction", "fraction_decimal"], &rows);
    let pass = report.consistent_with_decay;
    let last = report.max_radius.last().map(|(_, r)| frac(r));
    let summary = json!({
        "construct": "decay-check",
        "horizon": horizon,
        "lambda": frac(&mohoc.l(1)),
        "max_radius_at_horizon": last,
        "consistent_with_decay": pass,
        "pass": pass,
    });
    Ok(Report { artifacts: vec![Artifact { role: "csv", content: csv }], summary, pass })
}
