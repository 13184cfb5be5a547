//! Text checkpoint format.
//!
//! ```text
//! arl-checkpoint 1
//! config {"input_dims":[4,6],"hidden":[16],"rep_dims":[8,8],"fusion":"concat","num_classes":3}
//! tensor encoder.0.layer.0.weight 4 16
//! 0.1234 -0.5 …            (rows × cols values, row-major, one line)
//! tensor encoder.0.layer.0.bias 1 16
//! …
//! ```
//!
//! Values are written with Rust's shortest round-trip `f64` formatting, so
//! save → load is bit-exact.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use super::{ModelConfig, ModelError, ModelParams};

const MAGIC: &str = "arl-checkpoint 1";

pub fn write_checkpoint(params: &ModelParams, out: &mut impl Write) -> Result<(), ModelError> {
    writeln!(out, "{MAGIC}")?;
    let cfg = serde_json::to_string(&params.config).map_err(|e| ModelError::Checkpoint(e.to_string()))?;
    writeln!(out, "config {cfg}")?;
    for (name, t) in params.names().iter().zip(params.tensors()) {
        writeln!(out, "tensor {name} {} {}", t.rows(), t.cols())?;
        let line: Vec<String> = t.as_slice().iter().map(|v| format!("{v:?}")).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    Ok(())
}

pub fn read_checkpoint(input: impl Read) -> Result<ModelParams, ModelError> {
    let bad = |msg: String| ModelError::Checkpoint(msg);
    let mut lines = BufReader::new(input).lines().enumerate();
    let mut next = |what: &str| -> Result<(usize, String), ModelError> {
        match lines.next() {
            Some((i, Ok(l))) => Ok((i + 1, l)),
            Some((_, Err(e))) => Err(e.into()),
            None => Err(ModelError::Checkpoint(format!("unexpected end of file, expected {what}"))),
        }
    };

    let (_, magic) = next("header")?;
    if magic.trim() != MAGIC {
        return Err(bad(format!("line 1: expected `{MAGIC}`, found `{magic}`")));
    }
    let (n, cfg_line) = next("config")?;
    let cfg_json = cfg_line
        .strip_prefix("config ")
        .ok_or_else(|| bad(format!("line {n}: expected `config {{…}}`")))?;
    let cfg: ModelConfig =
        serde_json::from_str(cfg_json).map_err(|e| bad(format!("line {n}: {e}")))?;
    let mut params = ModelParams::zeros(&cfg)?;
    let names = params.names();
    let mut tensors = params.tensors_mut();

    for (name, slot) in names.iter().zip(tensors.iter_mut()) {
        let (n, head) = next(name)?;
        let fields: Vec<&str> = head.split_whitespace().collect();
        if fields.len() != 4 || fields[0] != "tensor" || fields[1] != name {
            return Err(bad(format!("line {n}: expected `tensor {name} <rows> <cols>`, found `{head}`")));
        }
        let rows: usize = fields[2].parse().map_err(|_| bad(format!("line {n}: bad row count")))?;
        let cols: usize = fields[3].parse().map_err(|_| bad(format!("line {n}: bad column count")))?;
        if (rows, cols) != slot.shape() {
            return Err(bad(format!(
                "line {n}: {name} has shape {rows}x{cols}, config implies {:?}",
                slot.shape()
            )));
        }
        let (n, body) = next("tensor values")?;
        let values: Vec<f64> = body
            .split_whitespace()
            .map(|s| s.parse::<f64>().map_err(|_| bad(format!("line {n}: bad value `{s}`"))))
            .collect::<Result<_, _>>()?;
        if values.len() != rows * cols {
            return Err(bad(format!(
                "line {n}: {name} needs {} values, found {}",
                rows * cols,
                values.len()
            )));
        }
        slot.as_mut_slice().copy_from_slice(&values);
    }
    drop(tensors);
    if !params.is_finite() {
        return Err(bad("non-finite parameter values".into()));
    }
    Ok(params)
}

pub fn save_checkpoint(params: &ModelParams, path: impl AsRef<Path>) -> Result<(), ModelError> {
    let mut buf = Vec::new();
    write_checkpoint(params, &mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<ModelParams, ModelError> {
    read_checkpoint(fs::File::open(path)?)
}
