//! JSON encodings of states and channels.
//!
//! Complex numbers are `[re, im]` pairs and matrices are lists of rows.
//!
//! States: `{"dim": d, "matrix": [[[re, im], ...], ...]}` or `{"bloch": [x, y, z]}`.
//!
//! Channels, one key per document: `{"dim": d, "kraus": [matrix, ...]}`,
//! `{"affine": {"m": [[..3..], ..3..], "n": [x, y, z]}}`, `{"gad": {"p": p, "t": t}}`
//! or `{"povm": [matrix, ...]}`.

use serde_json::{json, Map, Value};

use crate::channels::{cbc_from_povm, gad_channel, KrausChannel, QubitAffine};
use crate::error::{Error, Result};
use crate::linalg::{c64, CMatrix};
use crate::states::{from_bloch, DensityMatrix};

/// A channel as it was specified on disk.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelSpec {
    Kraus(KrausChannel),
    Affine(QubitAffine),
    Gad { p: f64, t: f64, channel: KrausChannel },
    Povm { effects: Vec<CMatrix>, channel: KrausChannel },
}

impl ChannelSpec {
    pub fn dim(&self) -> usize {
        match self {
            ChannelSpec::Affine(_) => 2,
            ChannelSpec::Kraus(ch) | ChannelSpec::Gad { channel: ch, .. } | ChannelSpec::Povm { channel: ch, .. } => {
                ch.dim()
            }
        }
    }

    /// Kraus form; affine maps are converted through their Choi matrix.
    pub fn kraus(&self) -> Result<KrausChannel> {
        match self {
            ChannelSpec::Affine(rep) => rep.to_kraus(),
            ChannelSpec::Kraus(ch) | ChannelSpec::Gad { channel: ch, .. } | ChannelSpec::Povm { channel: ch, .. } => {
                Ok(ch.clone())
            }
        }
    }

    /// Affine representation for qubit channels.
    pub fn affine(&self) -> Option<QubitAffine> {
        match self {
            ChannelSpec::Affine(rep) => Some(rep.clone()),
            other if other.dim() == 2 => other.kraus().ok().and_then(|k| QubitAffine::from_kraus(&k).ok()),
            _ => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ChannelSpec::Kraus(_) => "kraus",
            ChannelSpec::Affine(_) => "affine",
            ChannelSpec::Gad { .. } => "gad",
            ChannelSpec::Povm { .. } => "povm",
        }
    }
}

fn parse_document(text: &str) -> Result<Map<String, Value>> {
    match serde_json::from_str::<Value>(text)? {
        Value::Object(map) => Ok(map),
        _ => Err(Error::format("<root>", "expected a JSON object")),
    }
}

fn as_f64(value: &Value, key: &str) -> Result<f64> {
    value
        .as_f64()
        .ok_or_else(|| Error::format(key, format!("expected a number, found {value}")))
}

fn as_array<'a>(value: &'a Value, key: &str) -> Result<&'a Vec<Value>> {
    value
        .as_array()
        .ok_or_else(|| Error::format(key, "expected an array"))
}

fn real_vector<const N: usize>(value: &Value, key: &str) -> Result<[f64; N]> {
    let items = as_array(value, key)?;
    if items.len() != N {
        return Err(Error::format(key, format!("expected {N} numbers, found {}", items.len())));
    }
    let mut out = [0.0; N];
    for (i, v) in items.iter().enumerate() {
        out[i] = as_f64(v, &format!("{key}[{i}]"))?;
    }
    Ok(out)
}

fn complex_entry(value: &Value, key: &str) -> Result<num_complex::Complex64> {
    let [re, im] = real_vector::<2>(value, key)
        .map_err(|_| Error::format(key, "expected a [re, im] pair of numbers"))?;
    Ok(c64(re, im))
}

/// Square complex matrix encoded as rows of `[re, im]` pairs.
pub fn parse_matrix(value: &Value, key: &str) -> Result<CMatrix> {
    let rows = as_array(value, key)?;
    let n = rows.len();
    if n == 0 {
        return Err(Error::format(key, "empty matrix"));
    }
    let mut m = CMatrix::zeros(n, n);
    for (r, row) in rows.iter().enumerate() {
        let row_key = format!("{key}[{r}]");
        let entries = as_array(row, &row_key)?;
        if entries.len() != n {
            return Err(Error::format(
                &row_key,
                format!("expected {n} entries for a square matrix, found {}", entries.len()),
            ));
        }
        for (c, entry) in entries.iter().enumerate() {
            m[(r, c)] = complex_entry(entry, &format!("{row_key}[{c}]"))?;
        }
    }
    Ok(m)
}

fn parse_dim(map: &Map<String, Value>) -> Result<Option<usize>> {
    match map.get("dim") {
        None => Ok(None),
        Some(v) => match v.as_u64() {
            Some(d) if d >= 1 => Ok(Some(d as usize)),
            _ => Err(Error::format("dim", format!("expected a positive integer, found {v}"))),
        },
    }
}

fn reject_unknown(map: &Map<String, Value>, allowed: &[&str]) -> Result<()> {
    for key in map.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(Error::format(key, format!("unexpected key; expected one of {allowed:?}")));
        }
    }
    Ok(())
}

fn check_dim(declared: Option<usize>, actual: usize, key: &str) -> Result<()> {
    match declared {
        Some(d) if d != actual => Err(Error::format(
            key,
            format!("declared dim {d} but matrix is {actual}x{actual}"),
        )),
        _ => Ok(()),
    }
}

pub fn parse_state(text: &str) -> Result<DensityMatrix> {
    let map = parse_document(text)?;
    if let Some(bloch) = map.get("bloch") {
        reject_unknown(&map, &["bloch", "dim"])?;
        if let Some(d) = parse_dim(&map)? {
            if d != 2 {
                return Err(Error::format("dim", "a Bloch vector describes a qubit (dim 2)"));
            }
        }
        return from_bloch(real_vector::<3>(bloch, "bloch")?);
    }
    let matrix = map
        .get("matrix")
        .ok_or_else(|| Error::format("<root>", "expected a \"matrix\" or \"bloch\" key"))?;
    reject_unknown(&map, &["dim", "matrix"])?;
    let declared = parse_dim(&map)?;
    let m = parse_matrix(matrix, "matrix")?;
    check_dim(declared, m.nrows(), "dim")?;
    DensityMatrix::new(m)
}

fn parse_matrix_list(value: &Value, key: &str) -> Result<Vec<CMatrix>> {
    let items = as_array(value, key)?;
    if items.is_empty() {
        return Err(Error::format(key, "expected at least one matrix"));
    }
    let mats = items
        .iter()
        .enumerate()
        .map(|(i, v)| parse_matrix(v, &format!("{key}[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    let d = mats[0].nrows();
    for (i, m) in mats.iter().enumerate() {
        if m.nrows() != d {
            return Err(Error::format(
                &format!("{key}[{i}]"),
                format!("matrix is {0}x{0} but {key}[0] is {d}x{d}", m.nrows()),
            ));
        }
    }
    Ok(mats)
}

pub fn parse_channel(text: &str) -> Result<ChannelSpec> {
    let map = parse_document(text)?;
    let kinds: Vec<&str> = ["kraus", "affine", "gad", "povm"]
        .into_iter()
        .filter(|k| map.contains_key(*k))
        .collect();
    match kinds.as_slice() {
        ["kraus"] => {
            reject_unknown(&map, &["dim", "kraus"])?;
            let declared = parse_dim(&map)?;
            let ops = parse_matrix_list(&map["kraus"], "kraus")?;
            check_dim(declared, ops[0].nrows(), "dim")?;
            Ok(ChannelSpec::Kraus(KrausChannel::new(ops)?))
        }
        ["affine"] => {
            reject_unknown(&map, &["affine"])?;
            let body = map["affine"]
                .as_object()
                .ok_or_else(|| Error::format("affine", "expected an object with \"m\" and \"n\""))?;
            reject_unknown(body, &["m", "n"])?;
            let m_value = body.get("m").ok_or_else(|| Error::format("affine.m", "missing"))?;
            let rows = as_array(m_value, "affine.m")?;
            if rows.len() != 3 {
                return Err(Error::format("affine.m", "expected 3 rows"));
            }
            let mut m = [[0.0; 3]; 3];
            for (r, row) in rows.iter().enumerate() {
                m[r] = real_vector::<3>(row, &format!("affine.m[{r}]"))?;
            }
            let n = match body.get("n") {
                Some(v) => real_vector::<3>(v, "affine.n")?,
                None => return Err(Error::format("affine.n", "missing")),
            };
            Ok(ChannelSpec::Affine(QubitAffine::new(m, n)?))
        }
        ["gad"] => {
            reject_unknown(&map, &["gad"])?;
            let body = map["gad"]
                .as_object()
                .ok_or_else(|| Error::format("gad", "expected an object with \"p\" and \"t\""))?;
            reject_unknown(body, &["p", "t"])?;
            let p = as_f64(body.get("p").ok_or_else(|| Error::format("gad.p", "missing"))?, "gad.p")?;
            let t = as_f64(body.get("t").ok_or_else(|| Error::format("gad.t", "missing"))?, "gad.t")?;
            Ok(ChannelSpec::Gad {
                p,
                t,
                channel: gad_channel(p, t)?,
            })
        }
        ["povm"] => {
            reject_unknown(&map, &["povm", "dim"])?;
            let declared = parse_dim(&map)?;
            let effects = parse_matrix_list(&map["povm"], "povm")?;
            check_dim(declared, effects[0].nrows(), "dim")?;
            let channel = cbc_from_povm(&effects)?;
            Ok(ChannelSpec::Povm { effects, channel })
        }
        [] => Err(Error::format(
            "<root>",
            "expected one of the keys \"kraus\", \"affine\", \"gad\", \"povm\"",
        )),
        many => Err(Error::format(
            many[1],
            format!("conflicting channel keys {many:?}; exactly one is allowed"),
        )),
    }
}

pub fn matrix_to_json(m: &CMatrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|r| {
                Value::Array(
                    (0..m.ncols())
                        .map(|c| json!([m[(r, c)].re, m[(r, c)].im]))
                        .collect(),
                )
            })
            .collect(),
    )
}

pub fn state_to_json(rho: &DensityMatrix) -> Value {
    json!({"dim": rho.dim(), "matrix": matrix_to_json(rho.matrix())})
}

pub fn kraus_to_json(channel: &KrausChannel) -> Value {
    json!({
        "dim": channel.dim(),
        "kraus": channel.ops().iter().map(matrix_to_json).collect::<Vec<_>>(),
    })
}

pub fn affine_to_json(rep: &QubitAffine) -> Value {
    json!({"affine": {"m": rep.m(), "n": rep.shift()}})
}

pub fn channel_to_json(spec: &ChannelSpec) -> Value {
    match spec {
        ChannelSpec::Kraus(ch) => kraus_to_json(ch),
        ChannelSpec::Affine(rep) => affine_to_json(rep),
        ChannelSpec::Gad { p, t, .. } => json!({"gad": {"p": p, "t": t}}),
        ChannelSpec::Povm { effects, .. } => json!({
            "dim": effects[0].nrows(),
            "povm": effects.iter().map(matrix_to_json).collect::<Vec<_>>(),
        }),
    }
}
