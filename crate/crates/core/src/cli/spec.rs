//! Problem spec files (JSON, schema version 1).
//!
//! Two forms are accepted. A preset reference names a catalog entry:
//!
//! ```json
//! {"schema_version": 1, "preset": "contest", "params": {"xmin": 1.0, "xmax": 2.0}, "grid_n": 101}
//! ```
//!
//! An inline problem gives the grids, the prior and both payoff tables, each
//! table indexed `[action][state]`:
//!
//! ```json
//! {"schema_version": 1, "name": "tiny",
//!  "states": [0, 0.5, 1], "actions": [0, 0.5, 1], "prior": [0.25, 0.5, 0.25],
//!  "V": [[0, 0, 0], [0.5, 0.5, 0.5], [1, 1, 1]],
//!  "u": [[0, 0.5, 1], [-0.5, 0, 0.5], [-1, -0.5, 0]]}
//! ```

use std::path::Path;

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::model::{Grid, GridKind, Kernel, OrderingMode, Problem, TieBreak};
use crate::presets::{preset, GridSpec, Params, Preset};

pub const SCHEMA_VERSION: u64 = 1;

/// A loaded problem, with its catalog entry when it came from a preset.
pub struct Loaded {
    pub problem: Problem,
    pub preset: Option<Preset>,
}

/// Where a problem comes from before grid overrides are applied.
#[derive(Clone, Debug, PartialEq)]
pub enum Source {
    Preset { id: String, params: Params, grid: Option<GridSpec> },
    Inline(Value),
}

pub fn load_problem(path: &Path) -> Result<Loaded> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    load_source(parse_spec(&text)?, None)
}

/// Parses spec text into a source, checking the schema version and the preset form's fields.
pub fn parse_spec(text: &str) -> Result<Source> {
    let root: Value = serde_json::from_str(text)
        .map_err(|e| Error::Parse { field: "<document>".into(), line: Some(e.line()), msg: e.to_string() })?;
    let obj = root.as_object().ok_or_else(|| Error::parse("<document>", "expected a JSON object"))?;
    match obj.get("schema_version") {
        None => {}
        Some(v) => {
            let found = v.as_u64().ok_or_else(|| Error::parse("schema_version", "expected a non-negative integer"))?;
            if found != SCHEMA_VERSION {
                return Err(Error::SchemaVersionMismatch { found, expected: SCHEMA_VERSION });
            }
        }
    }
    match obj.get("preset") {
        Some(id) => {
            let id = id.as_str().ok_or_else(|| Error::parse("preset", "expected a string"))?.to_string();
            let params = match obj.get("params") {
                None | Some(Value::Null) => Params::new(),
                Some(v) => params_from_json(v)?,
            };
            let grid = obj.get("grid_n").map(grid_from_json).transpose()?;
            Ok(Source::Preset { id, params, grid })
        }
        None => Ok(Source::Inline(root)),
    }
}

fn params_from_json(v: &Value) -> Result<Params> {
    match v {
        Value::String(s) => Params::parse(s),
        Value::Object(m) => {
            let mut p = Params::new();
            for (k, v) in m {
                let text = match v {
                    Value::String(s) => s.clone(),
                    Value::Number(n) => n.to_string(),
                    Value::Bool(b) => b.to_string(),
                    _ => return Err(Error::parse(&format!("params.{k}"), "expected a string, number or boolean")),
                };
                p.set(k, &text);
            }
            Ok(p)
        }
        _ => Err(Error::parse("params", "expected an object or a \"k=v,k=v\" string")),
    }
}

fn grid_from_json(v: &Value) -> Result<GridSpec> {
    let int = |v: &Value| v.as_u64().map(|n| n as usize).ok_or_else(|| Error::parse("grid_n", "expected a positive integer"));
    let spec = match v {
        Value::Array(a) if a.len() == 2 => GridSpec::with_actions(int(&a[0])?, int(&a[1])?),
        Value::Array(a) if a.len() == 1 => GridSpec::new(int(&a[0])?),
        Value::Array(_) => return Err(Error::parse("grid_n", "expected N or [N, M]")),
        other => GridSpec::new(int(other)?),
    };
    check_grid(&spec)?;
    Ok(spec)
}

pub fn check_grid(g: &GridSpec) -> Result<()> {
    for (name, n) in [("grid_n", Some(g.states)), ("grid_n (actions)", g.actions)] {
        if let Some(n) = n {
            if n < 3 {
                return Err(Error::ParamOutOfRange { param: name.into(), value: n.to_string(), range: "≥ 3".into() });
            }
        }
    }
    Ok(())
}

/// Builds the problem. `grid` overrides any grid size in the source.
pub fn load_source(source: Source, grid: Option<GridSpec>) -> Result<Loaded> {
    match source {
        Source::Preset { id, params, grid: own } => {
            let g = grid.or(own).unwrap_or_default();
            check_grid(&g)?;
            let (problem, p) = preset(&id, &params, g)?;
            Ok(Loaded { problem, preset: Some(p) })
        }
        Source::Inline(v) => {
            if grid.is_some() {
                return Err(Error::parse("grid_n", "inline problems fix their own grids"));
            }
            Ok(Loaded { problem: inline_problem(v.as_object().expect("checked in parse_spec"))?, preset: None })
        }
    }
}

fn field<'a>(obj: &'a Map<String, Value>, name: &str) -> Result<&'a Value> {
    obj.get(name).ok_or_else(|| Error::parse(name, "missing required field"))
}

fn numbers(v: &Value, name: &str) -> Result<Vec<f64>> {
    let arr = v.as_array().ok_or_else(|| Error::parse(name, "expected an array of numbers"))?;
    arr.iter()
        .enumerate()
        .map(|(k, x)| x.as_f64().ok_or_else(|| Error::parse(&format!("{name}[{k}]"), "expected a number")))
        .collect()
}

fn table(obj: &Map<String, Value>, name: &str, rows: usize, cols: usize) -> Result<Vec<Vec<f64>>> {
    let v = field(obj, name)?;
    let arr = v.as_array().ok_or_else(|| Error::parse(name, "expected an array of rows"))?;
    if arr.len() != rows {
        return Err(Error::ShapeMismatch {
            field: name.into(),
            expected: format!("{rows} rows (one per action)"),
            found: format!("{} rows", arr.len()),
        });
    }
    arr.iter()
        .enumerate()
        .map(|(j, r)| {
            let row = numbers(r, &format!("{name}[{j}]"))?;
            if row.len() != cols {
                return Err(Error::ShapeMismatch {
                    field: format!("{name}[{j}]"),
                    expected: format!("{cols} columns (one per state)"),
                    found: format!("{} columns", row.len()),
                });
            }
            Ok(row)
        })
        .collect()
}

fn enum_field<T: serde::de::DeserializeOwned>(obj: &Map<String, Value>, name: &str) -> Result<Option<T>> {
    obj.get(name)
        .map(|v| serde_json::from_value(v.clone()).map_err(|e| Error::parse(name, e.to_string())))
        .transpose()
}

fn inline_problem(obj: &Map<String, Value>) -> Result<Problem> {
    let name = match obj.get("name") {
        Some(v) => v.as_str().ok_or_else(|| Error::parse("name", "expected a string"))?.to_string(),
        None => "inline".to_string(),
    };
    let xs = numbers(field(obj, "states")?, "states")?;
    let ys = numbers(field(obj, "actions")?, "actions")?;
    let prior = numbers(field(obj, "prior")?, "prior")?;
    if prior.len() != xs.len() {
        return Err(Error::ShapeMismatch {
            field: "prior".into(),
            expected: format!("{} entries (one per state)", xs.len()),
            found: format!("{} entries", prior.len()),
        });
    }
    let states = Grid::new(xs, GridKind::State)?;
    let actions = Grid::new(ys, GridKind::Action)?;
    let v = table(obj, "V", actions.len(), states.len())?;
    let u = table(obj, "u", actions.len(), states.len())?;
    let v = Kernel::tabulated(&actions, &states, v);
    let u = Kernel::tabulated(&actions, &states, u);
    let mut b = Problem::builder(&name, states, actions, prior, v, u);
    if let Some(t) = enum_field::<TieBreak>(obj, "tie_break")? {
        b = b.tie_break(t);
    }
    if let Some(o) = enum_field::<OrderingMode>(obj, "ordering")? {
        b = b.ordering(o);
    }
    if let Some(s) = obj.get("smooth") {
        b = b.smooth(s.as_bool().ok_or_else(|| Error::parse("smooth", "expected a boolean"))?);
    }
    if let Some(r) = obj.get("action_range") {
        let r = numbers(r, "action_range")?;
        let [lo, hi] = r[..] else {
            return Err(Error::parse("action_range", "expected [lo, hi]"));
        };
        b = b.action_range(lo, hi);
    }
    b.build()
}
