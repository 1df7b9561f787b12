//! JSON model documents.
//!
//! Complex scalars are `[re, im]` pairs, matrices are row-major nested arrays.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::CliError;
use crate::linalg::{self, CMat};
use crate::model::{BosonicModel, LindbladChannel};

pub type Pair = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub l: Vec<Pair>,
    pub k: Vec<Pair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<Pair>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub n: usize,
    #[serde(rename = "H")]
    pub h: Vec<Vec<Pair>>,
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub k: Option<Vec<Vec<Pair>>>,
    pub channels: Vec<ChannelFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forces: Option<Vec<Pair>>,
}

fn c(p: &Pair) -> C64 {
    C64::new(p[0], p[1])
}

fn pair(z: C64) -> Pair {
    [z.re, z.im]
}

fn check_len(what: &str, expected: usize, found: usize) -> Result<(), CliError> {
    if expected != found {
        return Err(CliError::Input(format!(
            "model field {what}: expected length {expected}, found {found}"
        )));
    }
    Ok(())
}

fn matrix(what: &str, n: usize, rows: &[Vec<Pair>]) -> Result<CMat, CliError> {
    check_len(what, n, rows.len())?;
    for (i, row) in rows.iter().enumerate() {
        check_len(&format!("{what}[{i}]"), n, row.len())?;
    }
    Ok(faer::Mat::from_fn(n, n, |i, j| c(&rows[i][j])))
}

fn vector(what: &str, n: usize, v: &[Pair]) -> Result<Vec<C64>, CliError> {
    check_len(what, n, v.len())?;
    Ok(v.iter().map(c).collect())
}

impl ModelFile {
    pub fn to_model(&self) -> Result<BosonicModel, CliError> {
        let n = self.n;
        if n == 0 {
            return Err(CliError::Input("model field n must be at least 1".into()));
        }
        let h = matrix("H", n, &self.h)?;
        let mut channels = Vec::with_capacity(self.channels.len());
        for (mu, ch) in self.channels.iter().enumerate() {
            channels.push(LindbladChannel::new(
                vector(&format!("channels[{mu}].l"), n, &ch.l)?,
                vector(&format!("channels[{mu}].k"), n, &ch.k)?,
            ));
        }
        let mut model = BosonicModel::new(h, channels);
        if let Some(k) = &self.k {
            model = model.with_k(matrix("K", n, k)?);
        }
        if let Some(f) = &self.forces {
            model = model.with_forces(vector("forces", n, f)?);
        }
        if self.channels.iter().any(|ch| ch.offset.is_some()) {
            let offsets = self
                .channels
                .iter()
                .map(|ch| ch.offset.as_ref().map_or(linalg::ZERO, c))
                .collect();
            model = model.with_offsets(offsets);
        }
        Ok(model)
    }

    pub fn from_model(model: &BosonicModel) -> Self {
        let n = model.n;
        let rows = |m: &CMat| -> Vec<Vec<Pair>> { (0..n).map(|i| (0..n).map(|j| pair(m[(i, j)])).collect()).collect() };
        let k = if linalg::frob(&model.k) == 0.0 { None } else { Some(rows(&model.k)) };
        let channels = model
            .channels
            .iter()
            .enumerate()
            .map(|(mu, ch)| ChannelFile {
                l: ch.l.iter().copied().map(pair).collect(),
                k: ch.k.iter().copied().map(pair).collect(),
                offset: model.channel_offsets.as_ref().map(|o| pair(o[mu])),
            })
            .collect();
        ModelFile {
            n,
            h: rows(&model.h),
            k,
            channels,
            forces: model.forces.as_ref().map(|f| f.iter().copied().map(pair).collect()),
        }
    }
}

/// Parse a model document, reporting line and column on syntax errors.
pub fn parse_value(text: &str, origin: &str) -> Result<Value, CliError> {
    serde_json::from_str(text).map_err(|e| {
        CliError::Input(format!(
            "{origin}: invalid JSON at line {} column {}: {e}",
            e.line(),
            e.column()
        ))
    })
}

pub fn model_from_value(value: Value, origin: &str) -> Result<ModelFile, CliError> {
    serde_json::from_value(value).map_err(|e| CliError::Input(format!("{origin}: schema error: {e}")))
}

pub fn parse_model(text: &str, origin: &str) -> Result<ModelFile, CliError> {
    model_from_value(parse_value(text, origin)?, origin)
}

/// Split a dotted path such as `channels.1.k.0.0`.
fn path_segments(path: &str) -> Vec<&str> {
    path.split('.').filter(|s| !s.is_empty()).collect()
}

/// Replace the real number addressed by `path`.
pub fn set_path(doc: &mut Value, path: &str, value: f64) -> Result<(), CliError> {
    let bad = |why: &str| CliError::Input(format!("bad parameter path '{path}': {why}"));
    let segments = path_segments(path);
    if segments.is_empty() {
        return Err(bad("empty path"));
    }
    let mut cur = doc;
    for seg in &segments {
        cur = match cur {
            Value::Object(map) => map.get_mut(*seg).ok_or_else(|| bad(&format!("no field '{seg}'")))?,
            Value::Array(items) => {
                let idx: usize = seg.parse().map_err(|_| bad(&format!("'{seg}' is not an index")))?;
                let len = items.len();
                items
                    .get_mut(idx)
                    .ok_or_else(|| bad(&format!("index {idx} out of range for length {len}")))?
            }
            _ => return Err(bad(&format!("cannot descend into '{seg}'"))),
        };
    }
    if !cur.is_number() {
        return Err(bad("target is not a real scalar"));
    }
    *cur = serde_json::Number::from_f64(value)
        .map(Value::Number)
        .ok_or_else(|| bad("non-finite value"))?;
    Ok(())
}
