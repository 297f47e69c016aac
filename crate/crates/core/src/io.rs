//! Dataset files.
//!
//! Rows hold N numeric features followed by one label, comma separated. An
//! optional first line of column names is skipped. Labels that are all
//! integers keep their value as class id; otherwise each distinct token gets
//! an id in order of first appearance, starting at 0.

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::data::{BinarySet, ClassId, Dataset};
use crate::error::{Error, Result};

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(input)
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io.to_string()),
        other => Error::Parse {
            line,
            message: format!("{other:?}"),
        },
    }
}

/// Non-empty records with their 1-based line numbers.
fn records<R: Read>(input: R) -> Result<Vec<(usize, Vec<String>)>> {
    let mut out = Vec::new();
    for rec in reader(input).into_records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        out.push((line, rec.iter().map(str::to_owned).collect()));
    }
    Ok(out)
}

fn parse_number(field: &str, line: usize) -> Result<f64> {
    field
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Parse {
            line,
            message: format!("not a finite number: {field:?}"),
        })
}

/// The first record is a header when one of its feature fields is not a
/// number.
fn split_header(mut rows: Vec<(usize, Vec<String>)>) -> Vec<(usize, Vec<String>)> {
    if let Some((_, first)) = rows.first() {
        let n = first.len().saturating_sub(1);
        if first[..n].iter().any(|f| f.parse::<f64>().is_err()) {
            rows.remove(0);
        }
    }
    rows
}

pub fn parse_dataset<R: Read>(input: R) -> Result<Dataset> {
    let rows = split_header(records(input)?);
    let Some((_, first)) = rows.first() else {
        return Err(Error::EmptyDataset { needed: 1, found: 0 });
    };
    let width = first.len();
    if width < 2 {
        return Err(Error::Parse {
            line: rows[0].0,
            message: "need at least one feature and a label".into(),
        });
    }
    let mut features = Vec::with_capacity(rows.len());
    let mut labels = Vec::with_capacity(rows.len());
    for (line, fields) in &rows {
        if fields.len() != width {
            return Err(Error::Parse {
                line: *line,
                message: format!("expected {width} fields, found {}", fields.len()),
            });
        }
        let x = fields[..width - 1]
            .iter()
            .map(|f| parse_number(f, *line))
            .collect::<Result<Vec<f64>>>()?;
        features.push(x);
        labels.push(fields[width - 1].clone());
    }

    let numeric: Option<Vec<ClassId>> = labels.iter().map(|l| l.parse().ok()).collect();
    let (ids, names) = match numeric {
        Some(ids) => {
            let mut names: Vec<(ClassId, String)> =
                ids.iter().map(|&c| (c, c.to_string())).collect();
            names.sort();
            names.dedup();
            (ids, names)
        }
        None => {
            let mut map: HashMap<&str, ClassId> = HashMap::new();
            let mut names = Vec::new();
            let ids = labels
                .iter()
                .map(|l| {
                    let next = map.len() as ClassId;
                    *map.entry(l.as_str()).or_insert_with(|| {
                        names.push((next, l.clone()));
                        next
                    })
                })
                .collect();
            (ids, names)
        }
    };
    Ok(Dataset::from_parts(features, ids)?.with_class_names(names))
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    parse_dataset(File::open(path)?)
}

/// Feature rows for prediction. A row of `n + 1` fields carries a label,
/// which is ignored; a header line is skipped.
pub fn parse_features<R: Read>(input: R, n: usize) -> Result<Vec<Vec<f64>>> {
    let mut rows = records(input)?;
    if let Some((_, first)) = rows.first() {
        if first.iter().take(n).any(|f| f.parse::<f64>().is_err()) {
            rows.remove(0);
        }
    }
    rows.iter()
        .map(|(line, fields)| {
            if fields.len() != n && fields.len() != n + 1 {
                return Err(Error::Parse {
                    line: *line,
                    message: format!("expected {n} features, found {} fields", fields.len()),
                });
            }
            fields[..n].iter().map(|f| parse_number(f, *line)).collect()
        })
        .collect()
}

pub fn read_features(path: impl AsRef<Path>, n: usize) -> Result<Vec<Vec<f64>>> {
    parse_features(File::open(path)?, n)
}

/// Writes a header `x1,...,xN,label` and one row per pattern. Labels are
/// written as their class names.
pub fn write_dataset<W: Write>(ds: &Dataset, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (1..=ds.dim()).map(|i| format!("x{i}")).collect();
    header.push("label".into());
    w.write_record(&header).map_err(csv_error)?;
    for p in ds.patterns() {
        let mut row: Vec<String> = p.features.iter().map(|v| v.to_string()).collect();
        row.push(
            ds.class_name(p.label)
                .map_or_else(|| p.label.to_string(), str::to_owned),
        );
        w.write_record(&row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_dataset(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    write_dataset(ds, File::create(path)?)
}

/// Attribute arities of the Monk's problems.
pub const MONKS_ARITIES: [usize; 6] = [3, 3, 2, 3, 4, 2];

/// One-hot ±1 code of the six attribute values (each counted from 1).
pub fn monks_encode(values: &[usize; 6]) -> Option<Vec<f64>> {
    let mut x = Vec::with_capacity(MONKS_ARITIES.iter().sum());
    for (&v, &arity) in values.iter().zip(&MONKS_ARITIES) {
        if v == 0 || v > arity {
            return None;
        }
        x.extend((1..=arity).map(|k| if k == v { 1.0 } else { -1.0 }));
    }
    Some(x)
}

/// Whitespace separated rows: class (0 or 1), six attribute values, an id.
pub fn parse_monks<R: Read>(mut input: R) -> Result<BinarySet> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;
    let mut rows = Vec::new();
    let mut targets = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        let bad = |message: String| Error::Parse { line, message };
        if fields.len() < 7 {
            return Err(bad(format!("expected class, 6 attributes and an id, found {} fields", fields.len())));
        }
        let target = match fields[0] {
            "1" => 1,
            "0" => -1,
            other => return Err(bad(format!("class must be 0 or 1, found {other:?}"))),
        };
        let mut values = [0usize; 6];
        for (v, f) in values.iter_mut().zip(&fields[1..7]) {
            *v = f.parse().map_err(|_| bad(format!("bad attribute value {f:?}")))?;
        }
        let x = monks_encode(&values).ok_or_else(|| bad(format!("attribute out of range in {values:?}")))?;
        rows.push(x);
        targets.push(target);
    }
    if rows.is_empty() {
        return Err(Error::EmptyDataset { needed: 1, found: 0 });
    }
    BinarySet::from_features(MONKS_ARITIES.iter().sum(), &rows, targets)
}

pub fn load_monks(path: impl AsRef<Path>) -> Result<BinarySet> {
    parse_monks(File::open(path)?)
}
