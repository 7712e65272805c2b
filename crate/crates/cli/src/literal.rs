//! Point, measure, function and space literals in scenario files.

use ergolab::averaging::{LocallyConstantFn, Observable, PiecewiseLinearFn};
use ergolab::measure::{AmbientMeasure, InvariantMeasure};
use ergolab::rat::{self, Q};
use ergolab::space::{parse_word, CirclePoint, Point, ShiftPoint, Sft, Space};
use serde_json::Value;

use crate::CliError;

fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

pub fn rational(v: &Value) -> Result<Q, CliError> {
    match v {
        Value::String(s) => Ok(rat::parse(s)?),
        Value::Number(n) if n.is_i64() => Ok(rat::int(n.as_i64().unwrap())),
        other => Err(input(format!("expected a rational string, got {other}"))),
    }
}

pub fn rationals(v: &Value) -> Result<Vec<Q>, CliError> {
    v.as_array().ok_or_else(|| input(format!("expected a list of rationals, got {v}")))?.iter().map(rational).collect()
}

fn single_key(v: &Value, what: &str) -> Result<(String, Value), CliError> {
    match v.as_object() {
        Some(m) if m.len() == 1 => {
            let (k, x) = m.iter().next().unwrap();
            Ok((k.clone(), x.clone()))
        }
        _ => Err(input(format!("{what} literal must be an object with one key, got {v}"))),
    }
}

/// `{"shift":{"alphabet":2,"forbidden":["00"]}}` or `{"circle":{"base":2}}`.
pub fn space(v: Option<&Value>) -> Result<Space, CliError> {
    let Some(v) = v else { return Ok(Space::full_shift(2)) };
    let (kind, body) = single_key(v, "space")?;
    match kind.as_str() {
        "shift" => {
            let a = body.get("alphabet").and_then(Value::as_u64).unwrap_or(2);
            if !(1..=16).contains(&a) {
                return Err(input("alphabet size must lie in 1..=16"));
            }
            let a = a as u8;
            let mut allowed = vec![vec![true; a as usize]; a as usize];
            if let Some(list) = body.get("forbidden") {
                for w in list.as_array().ok_or_else(|| input("forbidden must be a list of two-letter words"))? {
                    let w = parse_word(w.as_str().unwrap_or(""), a)?;
                    if w.len() != 2 {
                        return Err(input("forbidden words must have length 2"));
                    }
                    allowed[w[0] as usize][w[1] as usize] = false;
                }
            }
            let sft = if allowed.iter().flatten().all(|&b| b) { Sft::full(a) } else { Sft::new(allowed)? };
            Ok(Space::Shift(sft))
        }
        "circle" => {
            let b = body.get("base").and_then(Value::as_u64).unwrap_or(2);
            if !(2..=16).contains(&b) {
                return Err(input("circle base must lie in 2..=16"));
            }
            Ok(Space::circle(b as u32))
        }
        other => Err(input(format!("unknown space {other:?}"))),
    }
}

pub fn alphabet(space: &Space) -> u8 {
    match space {
        Space::Shift(s) => s.alphabet(),
        Space::Circle { base } => *base as u8,
    }
}

/// `"pre|per"` on the shift, `"p/q"` on the circle.
pub fn point(space: &Space, s: &str) -> Result<Point, CliError> {
    let p = match space {
        Space::Shift(sft) => Point::Shift(ShiftPoint::parse(s, sft.alphabet())?),
        Space::Circle { .. } => Point::Circle(CirclePoint::parse(s)?),
    };
    space.check_point(&p)?;
    Ok(p)
}

/// Defaults to the uniform measure of the space.
pub fn measure(space: &Space, v: Option<&Value>) -> Result<AmbientMeasure, CliError> {
    let mu = match v {
        None => match space {
            Space::Shift(s) => AmbientMeasure::uniform(s.alphabet()),
            Space::Circle { .. } => AmbientMeasure::LebesgueCircle,
        },
        Some(v) => {
            let (kind, body) = single_key(v, "measure")?;
            match kind.as_str() {
                "bernoulli" => AmbientMeasure::bernoulli(rationals(&body)?)?,
                "markov" => {
                    let p = body.get("P").ok_or_else(|| input("markov measure needs P"))?;
                    let rows = p.as_array().ok_or_else(|| input("P must be a matrix"))?;
                    let p = rows.iter().map(rationals).collect::<Result<Vec<_>, _>>()?;
                    let pi = body.get("pi").map(rationals).transpose()?;
                    AmbientMeasure::markov(p, pi)?
                }
                "lebesgue_circle" => AmbientMeasure::LebesgueCircle,
                other => return Err(input(format!("unknown measure {other:?}"))),
            }
        }
    };
    mu.check_space(space)?;
    Ok(mu)
}

/// `{"orbit":"01"}` or `{"convex":[["1/3","0"],["2/3","1"]]}`.
pub fn invariant(space: &Space, v: &Value) -> Result<InvariantMeasure, CliError> {
    let a = alphabet(space);
    let (kind, body) = single_key(v, "invariant measure")?;
    match kind.as_str() {
        "orbit" => Ok(InvariantMeasure::orbit(&parse_word(body.as_str().unwrap_or(""), a)?)?),
        "convex" => {
            let parts = body.as_array().ok_or_else(|| input("convex needs a list of [weight, word] pairs"))?;
            let mut out = Vec::new();
            for p in parts {
                let pair = p.as_array().filter(|x| x.len() == 2).ok_or_else(|| input("convex entries are [weight, word]"))?;
                out.push((rational(&pair[0])?, parse_word(pair[1].as_str().unwrap_or(""), a)?));
            }
            Ok(InvariantMeasure::convex(out)?)
        }
        other => Err(input(format!("unknown invariant measure {other:?}"))),
    }
}

/// Shift: `{"indicator":"01"}`, `{"table":{"depth":1,"values":["1","0"]}}`, `{"constant":"1/2"}`.
/// Circle: `{"hat":{"center":"1/2","half_width":"1/2"}}`, `{"piecewise":{"breakpoints":[…],"values":[…]}}`, `{"constant":"c"}`.
pub fn function(space: &Space, v: &Value) -> Result<Observable, CliError> {
    let (kind, body) = single_key(v, "function")?;
    let f = match (kind.as_str(), space) {
        ("indicator", Space::Shift(s)) => {
            let w = parse_word(body.as_str().unwrap_or(""), s.alphabet())?;
            if w.is_empty() {
                return Err(input("indicator needs a nonempty word"));
            }
            Observable::Shift(LocallyConstantFn::indicator(s.alphabet(), &w))
        }
        ("table", Space::Shift(s)) => {
            let depth = body.get("depth").and_then(Value::as_u64).ok_or_else(|| input("table needs depth"))?;
            let values = rationals(body.get("values").ok_or_else(|| input("table needs values"))?)?;
            Observable::Shift(LocallyConstantFn::new(s.alphabet(), depth as usize, values)?)
        }
        ("constant", Space::Shift(s)) => Observable::Shift(LocallyConstantFn::constant(s.alphabet(), rational(&body)?)),
        ("constant", Space::Circle { .. }) => Observable::Circle(PiecewiseLinearFn::constant(rational(&body)?)),
        ("hat", Space::Circle { .. }) => {
            let c = rational(body.get("center").ok_or_else(|| input("hat needs center"))?)?;
            let hw = rational(body.get("half_width").ok_or_else(|| input("hat needs half_width"))?)?;
            Observable::Circle(PiecewiseLinearFn::hat(&c, &hw)?)
        }
        ("piecewise", Space::Circle { .. }) => {
            let bps = rationals(body.get("breakpoints").ok_or_else(|| input("piecewise needs breakpoints"))?)?;
            let vals = rationals(body.get("values").ok_or_else(|| input("piecewise needs values"))?)?;
            Observable::Circle(PiecewiseLinearFn::new(bps, vals)?)
        }
        (k, _) => return Err(input(format!("function kind {k:?} does not fit this space"))),
    };
    f.check_space(space)?;
    Ok(f)
}
