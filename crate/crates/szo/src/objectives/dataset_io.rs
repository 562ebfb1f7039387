//! Plain-text dataset export/import so experiments are replayable across
//! implementations.
//!
//! Format (`szo-dataset v1`): a header of `key value` lines, a blank line,
//! then one whitespace-separated row per sample. Logistic rows are the `d`
//! features followed by the +-1 label; ridge rows are the `d` design entries
//! followed by the target. Floats are written in shortest round-trip form,
//! so export -> import is bit-exact.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use super::logistic::LogisticDataset;
use super::ridge::RidgeDataset;
use crate::error::{Error, Result};

const MAGIC: &str = "szo-dataset v1";

fn write_header(
    w: &mut impl Write,
    kind: &str,
    d: usize,
    n: usize,
    seed: u64,
    params: &BTreeMap<String, String>,
) -> Result<()> {
    writeln!(w, "{MAGIC}")?;
    writeln!(w, "kind {kind}")?;
    writeln!(w, "d {d}")?;
    writeln!(w, "n {n}")?;
    writeln!(w, "seed {seed}")?;
    for (k, v) in params {
        writeln!(w, "param.{k} {v}")?;
    }
    writeln!(w)?;
    Ok(())
}

pub fn export_logistic(
    w: &mut impl Write,
    ds: &LogisticDataset,
    seed: u64,
    params: &BTreeMap<String, String>,
) -> Result<()> {
    write_header(w, "logistic", ds.dim(), ds.n_samples(), seed, params)?;
    for i in 0..ds.n_samples() {
        for a in ds.row(i) {
            write!(w, "{a} ")?;
        }
        writeln!(w, "{}", ds.label(i) as i64)?;
    }
    Ok(())
}

pub fn export_ridge(
    w: &mut impl Write,
    ds: &RidgeDataset,
    seed: u64,
    params: &BTreeMap<String, String>,
) -> Result<()> {
    let mut params = params.clone();
    params.insert("c".to_string(), format!("{}", ds.regularization()));
    write_header(w, "ridge", ds.dim(), ds.n_samples(), seed, &params)?;
    for i in 0..ds.n_samples() {
        for h in ds.row(i) {
            write!(w, "{h} ")?;
        }
        writeln!(w, "{}", ds.target(i))?;
    }
    Ok(())
}

#[derive(Debug)]
pub struct ImportedDataset {
    pub kind: String,
    pub seed: u64,
    pub params: BTreeMap<String, String>,
    pub logistic: Option<LogisticDataset>,
    pub ridge: Option<RidgeDataset>,
}

pub fn import_dataset(r: impl BufRead) -> Result<ImportedDataset> {
    let mut lines = r.lines();
    let magic = lines
        .next()
        .ok_or_else(|| Error::DatasetFormat("empty file".to_string()))??;
    if magic.trim() != MAGIC {
        return Err(Error::DatasetFormat(format!("bad magic line: {magic:?}")));
    }
    let mut kind = String::new();
    let mut d = 0usize;
    let mut n = 0usize;
    let mut seed = 0u64;
    let mut params = BTreeMap::new();
    for line in lines.by_ref() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            break;
        }
        let (key, value) = line
            .split_once(' ')
            .ok_or_else(|| Error::DatasetFormat(format!("bad header line: {line:?}")))?;
        match key {
            "kind" => kind = value.to_string(),
            "d" => d = value.parse().map_err(|_| Error::DatasetFormat("bad d".to_string()))?,
            "n" => n = value.parse().map_err(|_| Error::DatasetFormat("bad n".to_string()))?,
            "seed" => {
                seed = value.parse().map_err(|_| Error::DatasetFormat("bad seed".to_string()))?
            }
            _ => {
                if let Some(name) = key.strip_prefix("param.") {
                    params.insert(name.to_string(), value.to_string());
                } else {
                    return Err(Error::DatasetFormat(format!("unknown header key {key:?}")));
                }
            }
        }
    }
    if d == 0 || n == 0 || kind.is_empty() {
        return Err(Error::DatasetFormat("incomplete header".to_string()));
    }

    let mut rows = Vec::with_capacity(n * d);
    let mut tail = Vec::with_capacity(n);
    let mut count = 0usize;
    for line in lines {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::DatasetFormat(format!("bad row: {line:?}")))?;
        if fields.len() != d + 1 {
            return Err(Error::DatasetFormat(format!(
                "row has {} fields, expected {}",
                fields.len(),
                d + 1
            )));
        }
        rows.extend_from_slice(&fields[..d]);
        tail.push(fields[d]);
        count += 1;
    }
    if count != n {
        return Err(Error::DatasetFormat(format!("expected {n} rows, found {count}")));
    }

    let mut out = ImportedDataset { kind: kind.clone(), seed, params, logistic: None, ridge: None };
    match kind.as_str() {
        "logistic" => out.logistic = Some(LogisticDataset::new(d, rows, tail)?),
        "ridge" => {
            let c: f64 = out
                .params
                .get("c")
                .ok_or_else(|| Error::DatasetFormat("ridge header missing param.c".to_string()))?
                .parse()
                .map_err(|_| Error::DatasetFormat("bad param.c".to_string()))?;
            out.ridge = Some(RidgeDataset::new(d, rows, tail, c)?);
        }
        other => return Err(Error::DatasetFormat(format!("unknown dataset kind {other:?}"))),
    }
    Ok(out)
}
