//! Model specifications: the raw channel-table JSON format, builder
//! objects (`{"model": "sbm", ...}`), the resample/censor wrappers, and
//! the `name:key=value,...` shorthand accepted on the command line.

use std::collections::BTreeMap;

use serde_json::{Map, Value};

use crate::channel::{
    build_hsbm, build_sbm, build_truth_or_haar, build_xor_full_reveal, build_xor_sat, symmetric_interaction_matrix,
    symmetric_interaction_tensor, ChannelFamily, GroupMode,
};
use crate::error::{GsbmError, Result};
use crate::group::FiniteGroup;
use crate::tensor::SymTensor;

/// Values the caller can supply when the spec leaves them out.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SpecDefaults {
    /// Population size used as the SBM/HSBM scale.
    pub n: Option<u64>,
    /// Noise level for models that take one.
    pub eta: Option<f64>,
}

/// A parsed model plus what it was built from.
#[derive(Debug, Clone)]
pub struct ResolvedModel {
    pub family: ChannelFamily,
    /// Builder name, or `"raw"` for explicit channel tables.
    pub kind: String,
    /// Interaction matrix/tensor when the model is an (H)SBM.
    pub interaction: Option<SymTensor>,
    /// The spec after defaults were filled in.
    pub spec: Value,
}

fn err(msg: impl Into<String>) -> GsbmError {
    GsbmError::Spec(msg.into())
}

fn get_f64(obj: &Map<String, Value>, key: &str) -> Result<Option<f64>> {
    match obj.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => v
            .as_f64()
            .map(Some)
            .ok_or_else(|| err(format!("field {key:?} must be a number"))),
    }
}

fn get_usize(obj: &Map<String, Value>, key: &str) -> Result<Option<usize>> {
    match obj.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => v
            .as_u64()
            .map(|x| Some(x as usize))
            .ok_or_else(|| err(format!("field {key:?} must be a nonnegative integer"))),
    }
}

fn require<T>(v: Option<T>, key: &str, model: &str) -> Result<T> {
    v.ok_or_else(|| err(format!("model {model:?} needs field {key:?}")))
}

fn matrix_from(v: &Value) -> Result<Vec<Vec<f64>>> {
    let rows = v.as_array().ok_or_else(|| err("\"Q\" must be an array of rows"))?;
    rows.iter()
        .map(|r| {
            r.as_array()
                .ok_or_else(|| err("\"Q\" rows must be arrays"))?
                .iter()
                .map(|x| x.as_f64().ok_or_else(|| err("\"Q\" entries must be numbers")))
                .collect()
        })
        .collect()
}

fn group_from(v: &Value) -> Result<FiniteGroup> {
    match v {
        Value::String(name) => FiniteGroup::by_name(name),
        Value::Object(o) => {
            let table = o.get("cayley").ok_or_else(|| err("group object needs \"cayley\""))?;
            let rows = matrix_from(table)?;
            let cayley = rows
                .into_iter()
                .map(|r| r.into_iter().map(|x| x as usize).collect())
                .collect();
            let name = o.get("name").and_then(Value::as_str).unwrap_or("custom");
            FiniteGroup::from_cayley(name, cayley)
        }
        _ => Err(err("\"group\" must be a name like \"Z4\" or {\"cayley\": [[...]]}")),
    }
}

fn raw_family(obj: &Map<String, Value>) -> Result<ChannelFamily> {
    let p = require(get_usize(obj, "p")?, "p", "raw")?;
    let k = require(get_usize(obj, "k")?, "k", "raw")?;
    let ell = require(get_usize(obj, "ell")?, "ell", "raw")?;
    let table = obj
        .get("mu")
        .and_then(Value::as_object)
        .ok_or_else(|| err("raw model needs \"mu\" mapping \"a1,...,ap\" to probability vectors"))?;
    let mut entries: BTreeMap<Vec<usize>, Vec<f64>> = BTreeMap::new();
    for (key, v) in table {
        let tuple: Vec<usize> = key
            .split(',')
            .map(|s| s.trim().parse::<usize>().map_err(|_| err(format!("bad tuple key {key:?}"))))
            .collect::<Result<_>>()?;
        if tuple.len() != p {
            return Err(err(format!("tuple key {key:?} has length {}, expected p = {p}", tuple.len())));
        }
        let probs = v
            .as_array()
            .ok_or_else(|| err(format!("mu[{key:?}] must be an array")))?
            .iter()
            .map(|x| x.as_f64().ok_or_else(|| err(format!("mu[{key:?}] entries must be numbers"))))
            .collect::<Result<Vec<f64>>>()?;
        if entries.insert(tuple, probs).is_some() {
            return Err(err(format!("duplicate tuple key {key:?}")));
        }
    }
    let total = k.checked_pow(p as u32).ok_or_else(|| err("k^p overflows"))?;
    if entries.len() != total {
        return Err(err(format!("mu lists {} tuples, expected k^p = {total}", entries.len())));
    }
    let mut mu = vec![Vec::new(); total];
    for (tuple, probs) in entries {
        if tuple.iter().any(|&a| a >= k) {
            return Err(GsbmError::LabelOutOfRange(tuple));
        }
        let idx = tuple.iter().fold(0, |acc, &a| acc * k + a);
        mu[idx] = probs;
    }
    ChannelFamily::new(p, k, ell, mu)
}

/// Builds a model from a JSON value.
pub fn parse_model(spec: &Value, defaults: SpecDefaults) -> Result<ResolvedModel> {
    let obj = spec.as_object().ok_or_else(|| err("model spec must be a JSON object"))?;
    let mut resolved = obj.clone();

    // wrapper around a nested model: {"censor": 0.3, "model": {...}}
    let mut model = match obj.get("model") {
        Some(inner @ Value::Object(_)) => parse_model(inner, defaults)?,
        Some(Value::String(name)) => build_named(name, obj, defaults, &mut resolved)?,
        Some(_) => return Err(err("\"model\" must be a builder name or a nested spec")),
        None if obj.contains_key("mu") => ResolvedModel {
            family: raw_family(obj)?,
            kind: "raw".into(),
            interaction: None,
            spec: Value::Null,
        },
        None => return Err(err("model spec needs \"model\" or a raw \"mu\" table")),
    };
    if let Some(eta) = get_f64(obj, "resample")? {
        model.family = model.family.resample(eta)?;
        model.interaction = None;
    }
    if let Some(eta) = get_f64(obj, "censor")? {
        model.family = model.family.censor(eta)?;
        model.interaction = None;
    }
    if obj.get("model").is_some_and(Value::is_object) {
        resolved.insert("model".into(), model.spec.clone());
    }
    model.spec = Value::Object(resolved);
    Ok(model)
}

fn build_named(
    name: &str,
    obj: &Map<String, Value>,
    defaults: SpecDefaults,
    resolved: &mut Map<String, Value>,
) -> Result<ResolvedModel> {
    let scale = |resolved: &mut Map<String, Value>| -> Result<u64> {
        let n = match obj.get("n") {
            Some(v) => v.as_u64().ok_or_else(|| err("\"n\" must be a positive integer"))?,
            None => defaults.n.ok_or_else(|| err(format!("model {name:?} needs \"n\" (or --n)")))?,
        };
        resolved.insert("n".into(), n.into());
        Ok(n)
    };
    let eta = |resolved: &mut Map<String, Value>| -> Result<f64> {
        let e = match get_f64(obj, "eta")? {
            Some(e) => e,
            None => defaults.eta.ok_or_else(|| err(format!("model {name:?} needs \"eta\" (or --eta/--gamma)")))?,
        };
        resolved.insert("eta".into(), e.into());
        Ok(e)
    };
    let (family, interaction) = match name {
        "sbm" => {
            let q = match obj.get("Q") {
                Some(v) => matrix_from(v)?,
                None => {
                    let k = require(get_usize(obj, "k")?, "k", name)?;
                    let a = require(get_f64(obj, "alpha")?, "alpha", name)?;
                    let b = require(get_f64(obj, "beta")?, "beta", name)?;
                    symmetric_interaction_matrix(k, a, b)
                }
            };
            let n = scale(resolved)?;
            let k = q.len();
            let t = SymTensor::new(2, k, q.iter().flatten().copied().collect())?;
            (build_sbm(&q, n)?, Some(t))
        }
        "hsbm" => {
            let q = match obj.get("Q") {
                Some(v) => SymTensor::from_json(&v.to_string())?,
                None => {
                    let p = require(get_usize(obj, "p")?, "p", name)?;
                    let k = require(get_usize(obj, "k")?, "k", name)?;
                    let a = require(get_f64(obj, "alpha")?, "alpha", name)?;
                    let b = require(get_f64(obj, "beta")?, "beta", name)?;
                    symmetric_interaction_tensor(p, k, a, b)
                }
            };
            let n = scale(resolved)?;
            (build_hsbm(&q, n)?, Some(q))
        }
        "toh_sync" | "toh_sumset" | "sync" | "sumset" => {
            let g = group_from(obj.get("group").ok_or_else(|| err(format!("model {name:?} needs \"group\"")))?)?;
            let mode = if name.ends_with("sync") { GroupMode::Sync } else { GroupMode::Sumset };
            (build_truth_or_haar(&g, eta(resolved)?, mode)?, None)
        }
        "xor" => {
            let p = require(get_usize(obj, "p")?, "p", name)?;
            (build_xor_sat(p, eta(resolved)?)?, None)
        }
        "xor_full" => {
            let p = require(get_usize(obj, "p")?, "p", name)?;
            (build_xor_full_reveal(p)?, None)
        }
        other => return Err(err(format!("unknown model {other:?}"))),
    };
    Ok(ResolvedModel {
        family,
        kind: name.into(),
        interaction,
        spec: Value::Null,
    })
}

fn shorthand_value(s: &str) -> Value {
    if let Ok(i) = s.parse::<u64>() {
        return i.into();
    }
    if let Ok(x) = s.parse::<f64>() {
        return x.into();
    }
    Value::String(s.to_string())
}

/// Parses `name:key=value,key=value`, e.g. `sbm:k=2,alpha=3,beta=1` or
/// `toh_sync:group=Z3,eta=0.1,censor=0.2`, into a builder object.
pub fn shorthand_to_json(s: &str) -> Result<Value> {
    let (name, rest) = s.split_once(':').unwrap_or((s, ""));
    let name = name.trim();
    if name.is_empty() {
        return Err(err("empty model shorthand"));
    }
    let mut obj = Map::new();
    obj.insert("model".into(), Value::String(name.to_string()));
    for part in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| err(format!("shorthand field {part:?} is not key=value")))?;
        obj.insert(k.trim().to_string(), shorthand_value(v.trim()));
    }
    Ok(Value::Object(obj))
}

/// Parses either inline JSON, a shorthand string, or (when `text` names an
/// existing file) the file's JSON contents.
pub fn parse_model_arg(text: &str, defaults: SpecDefaults) -> Result<ResolvedModel> {
    let trimmed = text.trim();
    let value = if trimmed.starts_with('{') {
        serde_json::from_str(trimmed).map_err(|e| err(format!("invalid model JSON: {e}")))?
    } else if std::path::Path::new(trimmed).is_file() {
        let body = std::fs::read_to_string(trimmed).map_err(|e| err(format!("cannot read {trimmed}: {e}")))?;
        serde_json::from_str(&body).map_err(|e| err(format!("invalid model JSON in {trimmed}: {e}")))?
    } else {
        shorthand_to_json(trimmed)?
    };
    parse_model(&value, defaults)
}
