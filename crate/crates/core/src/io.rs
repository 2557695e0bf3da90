//! Sequence-set files.
//!
//! Text layout (version 1):
//!
//! ```text
//! # seqforge sequence set
//! version=1
//! L=4
//! N=2
//! N_C=1024
//! N_S=1024
//! c=1,2,3,4
//! re_1,im_1,re_2,im_2,...,re_L,im_L
//! ...
//! ```
//!
//! One data line per sequence, `2L` floats with 17 significant digits so that
//! export followed by import is bit-exact. Lines starting with `#` are
//! comments. The JSON form carries the same fields plus a `sequences` array of
//! interleaved `[re, im, ...]` rows.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{SequenceSet, SubcarrierAssignment};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

impl Format {
    /// `.json` selects JSON, everything else text.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Text,
        }
    }
}

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn to_text(set: &SequenceSet) -> String {
    let a = set.assignment();
    let mut out = String::new();
    out.push_str("# seqforge sequence set\n");
    out.push_str(&format!("version={FORMAT_VERSION}\n"));
    out.push_str(&format!("L={}\n", set.len()));
    out.push_str(&format!("N={}\n", set.count()));
    out.push_str(&format!("N_C={}\n", a.n_subcarriers()));
    out.push_str(&format!("N_S={}\n", a.n_samples()));
    let c: Vec<String> = a.indices().iter().map(|i| i.to_string()).collect();
    out.push_str(&format!("c={}\n", c.join(",")));
    for seq in set.iter() {
        let row: Vec<String> = seq
            .iter()
            .flat_map(|z| [fmt_f64(z.re), fmt_f64(z.im)])
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[derive(Default)]
struct Header {
    version: Option<u32>,
    len: Option<usize>,
    count: Option<usize>,
    n_subcarriers: Option<usize>,
    n_samples: Option<usize>,
    indices: Option<Vec<usize>>,
}

fn parse_num<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::parse(line, format!("field `{key}`: cannot parse `{}`", value.trim())))
}

pub fn from_text(text: &str) -> Result<SequenceSet> {
    let mut header = Header::default();
    let mut rows: Vec<(usize, &str)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some((key, value)) = line.split_once('=') {
            if !rows.is_empty() {
                return Err(Error::parse(line_no, "header field after sequence data"));
            }
            match key.trim() {
                "version" => header.version = Some(parse_num(line_no, "version", value)?),
                "L" => header.len = Some(parse_num(line_no, "L", value)?),
                "N" => header.count = Some(parse_num(line_no, "N", value)?),
                "N_C" => header.n_subcarriers = Some(parse_num(line_no, "N_C", value)?),
                "N_S" => header.n_samples = Some(parse_num(line_no, "N_S", value)?),
                "c" => {
                    header.indices = Some(
                        value
                            .split(',')
                            .map(|v| parse_num(line_no, "c", v))
                            .collect::<Result<_>>()?,
                    )
                }
                other => return Err(Error::parse(line_no, format!("unknown header field `{other}`"))),
            }
        } else {
            rows.push((line_no, line));
        }
    }

    let end = text.lines().count().max(1);
    let missing = |name: &str| Error::parse(end, format!("missing header field `{name}`"));
    let version = header.version.ok_or_else(|| missing("version"))?;
    if version != FORMAT_VERSION {
        return Err(Error::parse(1, format!("unsupported version {version}")));
    }
    let len = header.len.ok_or_else(|| missing("L"))?;
    let count = header.count.ok_or_else(|| missing("N"))?;
    let assignment = SubcarrierAssignment::new(
        header.indices.ok_or_else(|| missing("c"))?,
        header.n_subcarriers.ok_or_else(|| missing("N_C"))?,
        header.n_samples.ok_or_else(|| missing("N_S"))?,
    )?;
    if assignment.len() != len {
        return Err(Error::parse(end, format!("`c` has {} entries but L = {len}", assignment.len())));
    }
    if rows.len() != count {
        return Err(Error::parse(end, format!("expected {count} sequence lines, found {}", rows.len())));
    }

    let mut data = Vec::with_capacity(len * count);
    for (line_no, row) in rows {
        let values: Vec<f64> = row
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::parse(line_no, format!("cannot parse float `{}`", v.trim())))
            })
            .collect::<Result<_>>()?;
        if values.len() != 2 * len {
            return Err(Error::parse(
                line_no,
                format!("expected {} values, found {}", 2 * len, values.len()),
            ));
        }
        data.extend(values.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])));
    }
    SequenceSet::from_flat(assignment, data)
}

#[derive(Serialize, Deserialize)]
struct JsonSet {
    format: String,
    version: u32,
    #[serde(rename = "L")]
    len: usize,
    #[serde(rename = "N")]
    count: usize,
    #[serde(rename = "N_C")]
    n_subcarriers: usize,
    #[serde(rename = "N_S")]
    n_samples: usize,
    c: Vec<usize>,
    sequences: Vec<Vec<f64>>,
}

const JSON_TAG: &str = "seqforge-sequences";

pub fn to_json(set: &SequenceSet) -> String {
    let a = set.assignment();
    let doc = JsonSet {
        format: JSON_TAG.into(),
        version: FORMAT_VERSION,
        len: set.len(),
        count: set.count(),
        n_subcarriers: a.n_subcarriers(),
        n_samples: a.n_samples(),
        c: a.indices().to_vec(),
        sequences: set
            .iter()
            .map(|s| s.iter().flat_map(|z| [z.re, z.im]).collect())
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("sequence set serializes");
    s.push('\n');
    s
}

pub fn from_json(text: &str) -> Result<SequenceSet> {
    let doc: JsonSet = serde_json::from_str(text)
        .map_err(|e| Error::parse(e.line(), e.to_string()))?;
    if doc.format != JSON_TAG {
        return Err(Error::parse(1, format!("unexpected format tag `{}`", doc.format)));
    }
    if doc.version != FORMAT_VERSION {
        return Err(Error::parse(1, format!("unsupported version {}", doc.version)));
    }
    let assignment = SubcarrierAssignment::new(doc.c, doc.n_subcarriers, doc.n_samples)?;
    if assignment.len() != doc.len {
        return Err(Error::Dimension { expected: doc.len, actual: assignment.len() });
    }
    if doc.sequences.len() != doc.count {
        return Err(Error::Dimension { expected: doc.count, actual: doc.sequences.len() });
    }
    let mut data = Vec::with_capacity(doc.len * doc.count);
    for row in &doc.sequences {
        if row.len() != 2 * doc.len {
            return Err(Error::Dimension { expected: 2 * doc.len, actual: row.len() });
        }
        data.extend(row.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])));
    }
    SequenceSet::from_flat(assignment, data)
}

/// Parses either format, sniffing JSON by its leading `{`.
pub fn parse(text: &str) -> Result<SequenceSet> {
    if text.trim_start().starts_with('{') {
        from_json(text)
    } else {
        from_text(text)
    }
}

pub fn read(path: &Path) -> Result<SequenceSet> {
    parse(&fs::read_to_string(path)?)
}

pub fn write(path: &Path, set: &SequenceSet, format: Format) -> Result<()> {
    let body = match format {
        Format::Text => to_text(set),
        Format::Json => to_json(set),
    };
    fs::write(path, body)?;
    Ok(())
}
