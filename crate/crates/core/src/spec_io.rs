//! JSON system specs:
//!
//! ```json
//! {"kind": "HA4", "n": 4,
//!  "params": {"J1": 1, "J3": 3, "J13": 0.7, "J24": 0.2, "chi12": 1, "chi34": 2},
//!  "state": {"M": [...], "Gamma": [...]}}
//! ```
//!
//! `Custom` kinds give dense `J` and `chi` (n×n, row-major nested arrays)
//! instead of params. The optional `state` holds either `M`/`Gamma` as
//! upper-triangle lists (vectors for n = 3), dense n×n skew matrices, or a
//! flat `chart` list; `"impose_relations": true` projects it onto the
//! invariant manifold.

use serde::Deserialize;
use serde_json::Value;

use crate::dynamics::PhaseState;
use crate::error::{Error, Result};
use crate::models::{make_spec, Kind, Params, SystemSpec};
use crate::skewalg::{hat, so_dim, SkewMatrix, SymMatrix};

const MAX_N: usize = 8;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub kind: Kind,
    pub n: usize,
    #[serde(default)]
    pub params: Params,
    #[serde(default, rename = "J")]
    pub j: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub chi: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub state: Option<Value>,
    #[serde(default)]
    pub impose_relations: bool,
}

pub fn parse_spec_json(src: &str) -> Result<SpecFile> {
    let f: SpecFile = serde_json::from_str(src).map_err(|e| Error::Spec(e.to_string()))?;
    if !(3..=MAX_N).contains(&f.n) {
        return Err(Error::Spec(format!("n = {} outside 3..={MAX_N}", f.n)));
    }
    if let Some((k, v)) = f.params.iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::Spec(format!("parameter {k} = {v} is not finite")));
    }
    Ok(f)
}

fn dense(rows: &[Vec<f64>], n: usize, what: &str) -> Result<Vec<f64>> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Spec(format!("{what} must be {n}×{n}")));
    }
    let flat: Vec<f64> = rows.concat();
    if flat.iter().any(|v| !v.is_finite()) {
        return Err(Error::Spec(format!("{what} has non-finite entries")));
    }
    Ok(flat)
}

impl SpecFile {
    pub fn build(&self) -> Result<SystemSpec> {
        match (self.kind, &self.j, &self.chi) {
            (Kind::Custom, Some(j), Some(chi)) => SystemSpec::new(
                Kind::Custom,
                SymMatrix::from_dense(self.n, &dense(j, self.n, "J")?)?,
                SkewMatrix::from_dense(self.n, &dense(chi, self.n, "chi")?)?,
                self.params.clone(),
            ),
            (Kind::Custom, _, _) => Err(Error::Spec("Custom kind needs both J and chi".into())),
            (_, None, None) => make_spec(self.kind, self.n, &self.params),
            _ => Err(Error::Spec("explicit J/chi only for Custom kind".into())),
        }
    }

    /// Initial state, if any (relations imposed when requested).
    pub fn initial_state(&self, spec: &SystemSpec) -> Result<Option<PhaseState>> {
        let Some(v) = &self.state else { return Ok(None) };
        let mut s = decode_state(self.n, v)?;
        if self.impose_relations {
            spec.impose_relations(&mut s);
        }
        Ok(Some(s))
    }
}

fn numbers(v: &Value, what: &str) -> Result<Vec<f64>> {
    let arr = v.as_array().ok_or_else(|| Error::Spec(format!("{what} must be an array")))?;
    arr.iter()
        .map(|x| x.as_f64().filter(|f| f.is_finite()).ok_or_else(|| Error::Spec(format!("{what}: non-numeric entry"))))
        .collect()
}

fn skew(n: usize, v: &Value, what: &str) -> Result<SkewMatrix> {
    let arr = v.as_array().ok_or_else(|| Error::Spec(format!("{what} must be an array")))?;
    if arr.first().is_some_and(|x| x.is_array()) {
        let rows = arr.iter().map(|r| numbers(r, what)).collect::<Result<Vec<_>>>()?;
        return SkewMatrix::from_dense(n, &dense(&rows, n, what)?);
    }
    let flat = numbers(v, what)?;
    if n == 3 && flat.len() == 3 {
        return Ok(hat(&[flat[0], flat[1], flat[2]]));
    }
    if flat.len() != so_dim(n) {
        return Err(Error::DimensionMismatch { expected: so_dim(n), found: flat.len() });
    }
    SkewMatrix::from_upper(n, &flat)
}

/// Decode a state object: {"M": .., "Gamma": ..} or {"chart": [..]}.
pub fn decode_state(n: usize, v: &Value) -> Result<PhaseState> {
    if !(3..=MAX_N).contains(&n) {
        return Err(Error::Spec(format!("n = {n} outside 3..={MAX_N}")));
    }
    let obj = v.as_object().ok_or_else(|| Error::Spec("state must be an object".into()))?;
    if let Some(extra) = obj.keys().find(|k| !matches!(k.as_str(), "M" | "Gamma" | "chart" | "t")) {
        return Err(Error::Spec(format!("unknown state field `{extra}`")));
    }
    let t = match obj.get("t") {
        None => 0.0,
        Some(t) => t.as_f64().filter(|t| t.is_finite()).ok_or_else(|| Error::Spec("t must be a number".into()))?,
    };
    let mut s = match (obj.get("chart"), obj.get("M"), obj.get("Gamma")) {
        (Some(c), None, None) => {
            let x = numbers(c, "chart")?;
            let want = 2 * so_dim(n);
            if x.len() != want {
                return Err(Error::DimensionMismatch { expected: want, found: x.len() });
            }
            PhaseState::from_chart(n, &x)?
        }
        (None, Some(m), Some(g)) => PhaseState::new(skew(n, m, "M")?, skew(n, g, "Gamma")?)?,
        _ => return Err(Error::Spec("state needs either `chart` or both `M` and `Gamma`".into())),
    };
    s.t = t;
    Ok(s)
}

pub fn load_spec(path: &std::path::Path) -> Result<(SystemSpec, Option<PhaseState>)> {
    let src = std::fs::read_to_string(path).map_err(|e| Error::Spec(format!("{}: {e}", path.display())))?;
    let f = parse_spec_json(&src)?;
    let spec = f.build()?;
    let s = f.initial_state(&spec)?;
    Ok((spec, s))
}
