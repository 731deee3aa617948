//! CSV ingestion for long-format data and contrast matrices.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;
use std::path::Path;

use crate::data::{Dataset, Layout, Sample};
use crate::error::{Error, Result};
use crate::numerics::linalg::Matrix;

/// Loads a long-format CSV (header row, one observation per row).
///
/// Cells are the combinations of the factor levels, ordered row-major with
/// the first factor varying slowest. Levels are sorted lexicographically
/// unless `levels` supplies an explicit order for a factor.
pub fn load_csv(
    path: impl AsRef<Path>,
    response: &str,
    factors: &[&str],
    levels: &BTreeMap<String, Vec<String>>,
) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::from(e).context(path.display().to_string()))?;
    read_csv(file, response, factors, levels).map_err(|e| e.context(path.display().to_string()))
}

pub fn read_csv<R: Read>(
    reader: R,
    response: &str,
    factors: &[&str],
    levels: &BTreeMap<String, Vec<String>>,
) -> Result<Dataset> {
    if factors.is_empty() || factors.len() > 2 {
        return Err(Error::Layout(format!(
            "expected 1 or 2 factor columns, got {}",
            factors.len()
        )));
    }
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers()?.clone();
    let find = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::InvalidData(format!("missing column '{name}'")))
    };
    let y_col = find(response)?;
    let f_cols = factors.iter().map(|f| find(f)).collect::<Result<Vec<_>>>()?;

    let mut rows: Vec<(Vec<String>, f64)> = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        // header is line 1
        let line = rec.position().map(|p| p.line()).unwrap_or(k as u64 + 2);
        let raw = rec.get(y_col).unwrap_or("");
        let y: f64 = raw.parse().map_err(|_| {
            Error::InvalidData(format!("row {line}: response '{raw}' is not numeric"))
        })?;
        if !y.is_finite() {
            return Err(Error::InvalidData(format!("row {line}: response '{raw}' is not finite")));
        }
        let mut key = Vec::with_capacity(f_cols.len());
        for (&c, name) in f_cols.iter().zip(factors) {
            let v = rec.get(c).unwrap_or("");
            if v.is_empty() {
                return Err(Error::InvalidData(format!("row {line}: empty value in factor '{name}'")));
            }
            key.push(v.to_string());
        }
        rows.push((key, y));
    }
    if rows.is_empty() {
        return Err(Error::InvalidData("no data rows".into()));
    }

    let mut level_lists = Vec::with_capacity(factors.len());
    for (f, name) in factors.iter().enumerate() {
        let seen: BTreeSet<&str> = rows.iter().map(|r| r.0[f].as_str()).collect();
        let order = match levels.get(*name) {
            Some(given) => {
                let given_set: BTreeSet<&str> = given.iter().map(String::as_str).collect();
                if given_set.len() != given.len() {
                    return Err(Error::Layout(format!("duplicate level in order for '{name}'")));
                }
                if given_set != seen {
                    return Err(Error::Layout(format!(
                        "level order for '{name}' is {given:?} but the data contain {seen:?}"
                    )));
                }
                given.clone()
            }
            None => seen.iter().map(|s| s.to_string()).collect(),
        };
        level_lists.push(order);
    }
    for key in levels.keys() {
        if !factors.contains(&key.as_str()) {
            return Err(Error::Layout(format!("level order given for unknown factor '{key}'")));
        }
    }

    let index = |f: usize, v: &str| level_lists[f].iter().position(|l| l == v).unwrap();
    let b = if factors.len() == 2 { level_lists[1].len() } else { 1 };
    let cells = level_lists[0].len() * b;
    let mut groups: Vec<Vec<f64>> = vec![Vec::new(); cells];
    for (key, y) in &rows {
        let mut g = index(0, &key[0]);
        if factors.len() == 2 {
            g = g * b + index(1, &key[1]);
        }
        groups[g].push(*y);
    }

    let cell_name = |g: usize| {
        if factors.len() == 2 {
            format!("({}, {})", level_lists[0][g / b], level_lists[1][g % b])
        } else {
            level_lists[0][g].clone()
        }
    };
    if let Some(g) = groups.iter().position(Vec::is_empty) {
        return Err(Error::InvalidData(format!("cell {} has no observations", cell_name(g))));
    }
    let small: Vec<usize> = (0..cells).filter(|&g| groups[g].len() < 2).collect();
    if !small.is_empty() {
        let names: Vec<String> = small.iter().map(|&g| cell_name(g)).collect();
        return Err(Error::InsufficientReplication {
            groups: small.iter().map(|g| g + 1).collect(),
        }
        .context(format!("cells {} need at least 2 observations", names.join(", "))));
    }

    let layout = if factors.len() == 2 {
        let mut it = level_lists.into_iter();
        Layout::TwoWay {
            factors: [factors[0].to_string(), factors[1].to_string()],
            levels_a: it.next().unwrap(),
            levels_b: it.next().unwrap(),
        }
    } else {
        Layout::OneWay {
            factor: factors[0].to_string(),
            levels: level_lists.pop().unwrap(),
        }
    };
    let samples = groups.into_iter().map(Sample::new).collect::<Result<Vec<_>>>()?;
    Dataset::new(samples)?.with_layout(layout)
}

/// Reads a headerless numeric matrix.
pub fn load_contrast_csv(path: impl AsRef<Path>) -> Result<Matrix> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::from(e).context(path.display().to_string()))?;
    read_contrast_csv(file).map_err(|e| e.context(path.display().to_string()))
}

pub fn read_contrast_csv<R: Read>(reader: R) -> Result<Matrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| {
                s.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                    Error::InvalidContrast(format!("row {}: '{s}' is not a finite number", k + 1))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::InvalidContrast("contrast matrix is empty".into()));
    }
    if rows.iter().any(|r| r.len() != rows[0].len()) {
        return Err(Error::InvalidContrast("rows have different lengths".into()));
    }
    Ok(Matrix::from_rows(&rows))
}
