use std::collections::BTreeMap;

use anyhow::{bail, Result};
use rankfx::data::datasets;
use rankfx::Dataset;

use crate::DataArgs;

const BUILTIN_LEUCOCYTE: &str = "builtin:leucocyte";

/// Parses repeated `factor=level1,level2` flags.
pub fn parse_levels(items: &[String]) -> Result<BTreeMap<String, Vec<String>>> {
    let mut out = BTreeMap::new();
    for item in items {
        for part in item.split(';').filter(|p| !p.trim().is_empty()) {
            let Some((factor, levels)) = part.split_once('=') else {
                bail!("--levels expects factor=level1,level2, got '{part}'");
            };
            let levels: Vec<String> = levels.split(',').map(|s| s.trim().to_string()).collect();
            out.insert(factor.trim().to_string(), levels);
        }
    }
    Ok(out)
}

pub fn load_dataset(args: &DataArgs) -> Result<Dataset> {
    let mut levels = parse_levels(&args.levels)?;
    if args.data == BUILTIN_LEUCOCYTE {
        let response = args.response.as_deref().unwrap_or("leucocytes");
        let factors: Vec<&str> = if args.factors.is_empty() {
            vec!["food", "treatment"]
        } else {
            args.factors.iter().map(String::as_str).collect()
        };
        for (k, v) in datasets::leucocyte_levels() {
            if factors.contains(&k.as_str()) {
                levels.entry(k).or_insert(v);
            }
        }
        return Ok(rankfx::io::read_csv(
            datasets::leucocyte_csv().as_bytes(),
            response,
            &factors,
            &levels,
        )?);
    }
    if let Some(name) = args.data.strip_prefix("builtin:") {
        bail!("unknown builtin dataset '{name}'");
    }
    let Some(response) = args.response.as_deref() else {
        bail!("--response is required for CSV input");
    };
    if args.factors.is_empty() {
        bail!("--factors is required for CSV input");
    }
    let factors: Vec<&str> = args.factors.iter().map(String::as_str).collect();
    Ok(rankfx::io::load_csv(&args.data, response, &factors, &levels)?)
}
