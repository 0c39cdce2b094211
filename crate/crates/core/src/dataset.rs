//! Labeled text instances and the `id,text,label` CSV format.

use std::collections::HashSet;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::{detokenize, tokenize};

/// One labeled example. `tokens` is always `tokenize(text)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Instance {
    pub id: String,
    pub text: String,
    pub tokens: Vec<String>,
    /// 1 = positive class (toxic / hate), 0 = negative.
    pub label: u8,
}

impl Instance {
    pub fn new(id: impl Into<String>, text: impl Into<String>, label: u8) -> Self {
        let text = text.into();
        let tokens = tokenize(&text);
        Instance {
            id: id.into(),
            text,
            tokens,
            label,
        }
    }

    /// Derived instance; text is the detokenized sequence.
    pub fn from_tokens(id: impl Into<String>, tokens: Vec<String>, label: u8) -> Self {
        Instance {
            id: id.into(),
            text: detokenize(&tokens),
            tokens,
            label,
        }
    }

    pub fn contains(&self, token: &str) -> bool {
        self.tokens.iter().any(|t| t == token)
    }
}

#[derive(Debug, Deserialize)]
struct Row {
    id: String,
    text: String,
    label: String,
}

/// Read a dataset CSV with header `id,text,label`. Lines starting with `#`
/// are comments.
pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<Instance>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_csv(file, path)
}

pub fn parse_csv<R: Read>(reader: R, origin: &Path) -> Result<Vec<Instance>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::parse(origin, 1, e.to_string()))?
        .clone();
    for col in ["id", "text", "label"] {
        if !headers.iter().any(|h| h == col) {
            return Err(Error::parse(origin, 1, format!("missing `{col}` column")));
        }
    }
    let mut out = Vec::new();
    let mut ids = HashSet::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(origin, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let row: Row = record
            .deserialize(Some(&headers))
            .map_err(|e| Error::parse(origin, line, e.to_string()))?;
        let label = match row.label.trim() {
            "0" => 0,
            "1" => 1,
            other => {
                return Err(Error::parse(
                    origin,
                    line,
                    format!("label must be 0 or 1, got `{other}`"),
                ))
            }
        };
        if !ids.insert(row.id.clone()) {
            return Err(Error::parse(
                origin,
                line,
                format!("duplicate id `{}`", row.id),
            ));
        }
        out.push(Instance::new(row.id, row.text, label));
    }
    Ok(out)
}

/// Serialize instances as `id,text,label` CSV.
pub fn to_csv(instances: &[Instance]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["id", "text", "label"]).map_err(csv_err)?;
    for x in instances {
        w.write_record([x.id.as_str(), x.text.as_str(), &x.label.to_string()])
            .map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::Data(e.to_string()))
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::Data(format!("csv: {e}"))
}

/// Binary label for a row of the six-column Jigsaw toxic-comment release:
/// positive when any of toxic, severe_toxic, obscene, threat, insult or
/// identity_hate is set.
pub fn jigsaw_label(flags: &[u8; 6]) -> u8 {
    u8::from(flags.iter().any(|&f| f > 0))
}

/// Read a Jigsaw `train.csv`-style file (`id,comment_text,toxic,...`) into
/// binary instances.
pub fn read_jigsaw_csv(path: impl AsRef<Path>) -> Result<Vec<Instance>> {
    const FLAGS: [&str; 6] = [
        "toxic",
        "severe_toxic",
        "obscene",
        "threat",
        "insult",
        "identity_hate",
    ];
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(file);
    let headers = rdr
        .headers()
        .map_err(|e| Error::parse(path, 1, e.to_string()))?
        .clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::parse(path, 1, format!("missing `{name}` column")))
    };
    let id_col = col("id")?;
    let text_col = col("comment_text")?;
    let flag_cols = FLAGS.map(col);
    let flag_cols: Vec<usize> = flag_cols.into_iter().collect::<Result<_>>()?;
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::parse(path, 0, e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let mut flags = [0u8; 6];
        for (slot, &c) in flags.iter_mut().zip(&flag_cols) {
            *slot = record
                .get(c)
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| Error::parse(path, line, "bad label flag"))?;
        }
        out.push(Instance::new(
            &record[id_col],
            &record[text_col],
            jigsaw_label(&flags),
        ));
    }
    Ok(out)
}
