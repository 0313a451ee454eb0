//! `--axis field=start:stop:step` and `--axis field=a,b,c` parameter axes.

use serde_json::{Number, Value};

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    /// Dotted path into the scenario document, e.g. `chain.n` or `dimers.0.center`.
    pub field: String,
    pub values: Vec<f64>,
}

/// Inclusive grid from `start` to `stop`; values are rounded to 12 decimals
/// so that 0.8 + 3·0.01 prints as 0.83.
pub fn range(start: f64, stop: f64, step: f64) -> Result<Vec<f64>, String> {
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) || step <= 0.0 {
        return Err(format!("bad range {start}:{stop}:{step}"));
    }
    if stop < start {
        return Err(format!("empty range {start}:{stop}:{step}"));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12).collect())
}

pub fn parse(spec: &str) -> Result<Axis, String> {
    let (field, body) = spec
        .split_once('=')
        .ok_or_else(|| format!("axis `{spec}` needs the form field=start:stop:step or field=a,b,c"))?;
    let field = field.trim();
    if field.is_empty() || field.split('.').any(str::is_empty) {
        return Err(format!("axis `{spec}` has an empty field path"));
    }
    let num = |s: &str| s.trim().parse::<f64>().map_err(|e| format!("axis `{spec}`: `{s}`: {e}"));
    let values = if body.contains(':') {
        let parts: Vec<&str> = body.split(':').collect();
        let [a, b, c] = parts.as_slice() else {
            return Err(format!("axis `{spec}`: a range needs start:stop:step"));
        };
        range(num(a)?, num(b)?, num(c)?)?
    } else {
        body.split(',').filter(|s| !s.trim().is_empty()).map(num).collect::<Result<Vec<_>, _>>()?
    };
    if values.is_empty() {
        return Err(format!("axis `{field}` has no values"));
    }
    Ok(Axis { field: field.to_string(), values })
}

/// Integral values become JSON integers so that count fields still parse.
pub fn to_json(x: f64) -> Value {
    if x.fract() == 0.0 && x.abs() < 9e15 {
        Value::Number(Number::from(x as i64))
    } else {
        Number::from_f64(x).map_or(Value::Null, Value::Number)
    }
}

/// Write `x` at the dotted `path`, creating intermediate objects.
pub fn assign(doc: &mut Value, path: &str, x: f64) -> Result<(), String> {
    let mut cur = doc;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let last = i + 1 == parts.len();
        cur = match cur {
            Value::Object(map) => {
                if last {
                    map.insert(part.to_string(), to_json(x));
                    return Ok(());
                }
                map.entry(part.to_string()).or_insert_with(|| Value::Object(Default::default()))
            }
            Value::Array(items) => {
                let idx: usize = part.parse().map_err(|_| format!("`{part}` in `{path}` is not an index"))?;
                let len = items.len();
                let slot = items
                    .get_mut(idx)
                    .ok_or_else(|| format!("index {idx} in `{path}` is out of range (length {len})"))?;
                if last {
                    *slot = to_json(x);
                    return Ok(());
                }
                slot
            }
            _ => return Err(format!("`{path}` does not name a field")),
        };
    }
    Ok(())
}

/// Cartesian product in axis order; the last axis varies fastest.
pub fn product(axes: &[Axis]) -> Vec<Vec<f64>> {
    let mut out = vec![vec![]];
    for a in axes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                a.values.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    out
}
