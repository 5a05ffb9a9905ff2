use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{Diagnostics, EnsembleConfig, Record, WeightedEnsemble};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
struct Header {
    config: EnsembleConfig,
    diagnostics: Diagnostics,
}

/// Writes the ensemble as one JSON header line followed by tab-separated
/// records `j  chi  r  weight [path]`.
pub fn write_ensemble<W: Write>(ens: &WeightedEnsemble, out: &mut W, with_paths: bool) -> Result<()> {
    let header = Header { config: ens.config.clone(), diagnostics: ens.diagnostics.clone() };
    serde_json::to_writer(&mut *out, &header)?;
    writeln!(out)?;
    for r in &ens.records {
        write!(out, "{}\t{}\t{}\t{}", r.j, r.chi, r.r, r.weight)?;
        if let (true, Some(p)) = (with_paths, &r.path) {
            write!(out, "\t{p}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn read_ensemble<R: BufRead>(input: R) -> Result<WeightedEnsemble> {
    let mut lines = input.lines();
    let first = lines.next().ok_or_else(|| Error::Parse("empty ensemble file".into()))??;
    let header: Header = serde_json::from_str(&first)?;
    let mut records = Vec::new();
    for (k, line) in lines.enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let bad = || Error::Parse(format!("ensemble record {}", k + 1));
        let mut f = line.split('\t');
        let mut next = || f.next().ok_or_else(bad);
        let j = next()?.parse().map_err(|_| bad())?;
        let chi = next()?.parse().map_err(|_| bad())?;
        let r = next()?.parse().map_err(|_| bad())?;
        let weight = next()?.parse().map_err(|_| bad())?;
        let path = match f.next() {
            Some(p) => Some(p.parse()?),
            None => None,
        };
        records.push(Record { j, chi, r, weight, path });
    }
    Ok(WeightedEnsemble::assemble(header.config, records, header.diagnostics))
}
