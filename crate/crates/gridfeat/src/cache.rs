//! On-disk cache of hourly frames.
//!
//! Each household is stored as `<id>.csv` (one row per hour, empty cells for
//! missing values) next to `<id>.json` holding zone, location, units, tags,
//! metadata and the missing-hour ranges of every column. A `manifest.json`
//! lists the households of the cached dataset. Values are written in the
//! shortest form that parses back to the same bits, so a frame reloads
//! identical.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use gridfeat_core::frame::{Channel, HourlyFrame, MetaValue};
use gridfeat_core::schema::DatasetDescriptor;
use serde::{Deserialize, Serialize};

use crate::error::{read_json, write_json};
use crate::loaders::LoadOptions;
use crate::{Error, Result};

pub const FRAME_FORMAT: &str = "gridfeat-frame/1";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ColumnMeta {
    name: String,
    unit: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tag: Option<String>,
    /// Half-open hour-index ranges `[start, end)` of missing values.
    missing: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Sidecar {
    format: String,
    household_id: String,
    start_hour: i64,
    hours: usize,
    timezone: String,
    latitude: f64,
    longitude: f64,
    region: String,
    country: String,
    metadata: BTreeMap<String, MetaValue>,
    target: ColumnMeta,
    channels: Vec<ColumnMeta>,
}

/// Where a cache came from, to decide whether it can be reused.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub dataset: DatasetDescriptor,
    pub source: Option<PathBuf>,
    pub load: LoadOptions,
    pub households: Vec<String>,
}

fn ranges(missing: &[bool]) -> Vec<[usize; 2]> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < missing.len() {
        if missing[i] {
            let start = i;
            while i < missing.len() && missing[i] {
                i += 1;
            }
            out.push([start, i]);
        } else {
            i += 1;
        }
    }
    out
}

fn column_meta(c: &Channel) -> ColumnMeta {
    ColumnMeta {
        name: c.name.clone(),
        unit: c.unit.clone(),
        tag: c.tag.clone(),
        missing: ranges(&c.missing),
    }
}

/// File stem of a household; ids are restricted to a portable alphabet.
pub fn file_stem(household_id: &str) -> Result<String> {
    if household_id.is_empty()
        || !household_id
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-' || b == b'.')
        || household_id.starts_with('.')
    {
        return Err(Error::Config(format!(
            "household id `{household_id}` is not usable as a file name"
        )));
    }
    Ok(household_id.to_string())
}

/// Write one frame as `<dir>/<id>.csv` plus `<dir>/<id>.json`.
pub fn write_frame(dir: &Path, frame: &HourlyFrame) -> Result<()> {
    frame.validate()?;
    let stem = file_stem(&frame.household_id)?;
    let csv_path = dir.join(format!("{stem}.csv"));
    let columns: Vec<&Channel> = std::iter::once(&frame.target)
        .chain(&frame.channels)
        .collect();
    let mut out = String::with_capacity(frame.len() * 16 * columns.len());
    out.push_str("hour");
    for c in &columns {
        out.push(',');
        out.push_str(&csv_field(&c.name));
    }
    out.push('\n');
    for i in 0..frame.len() {
        out.push_str(&frame.hour(i).to_string());
        for c in &columns {
            out.push(',');
            if let Some(v) = c.get(i) {
                out.push_str(&v.to_string());
            }
        }
        out.push('\n');
    }
    crate::error::write(&csv_path, out)?;
    let sidecar = Sidecar {
        format: FRAME_FORMAT.into(),
        household_id: frame.household_id.clone(),
        start_hour: frame.start_hour,
        hours: frame.len(),
        timezone: frame.timezone.clone(),
        latitude: frame.latitude,
        longitude: frame.longitude,
        region: frame.region.clone(),
        country: frame.country.clone(),
        metadata: frame.metadata.clone(),
        target: column_meta(&frame.target),
        channels: frame.channels.iter().map(column_meta).collect(),
    };
    write_json(&dir.join(format!("{stem}.json")), &sidecar)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Read the frame of `household_id` from `dir`.
pub fn read_frame(dir: &Path, household_id: &str) -> Result<HourlyFrame> {
    let stem = file_stem(household_id)?;
    let json_path = dir.join(format!("{stem}.json"));
    let csv_path = dir.join(format!("{stem}.csv"));
    let side: Sidecar = read_json(&json_path)?;
    if side.format != FRAME_FORMAT {
        return Err(Error::format(
            &json_path,
            format!("unsupported format `{}`", side.format),
        ));
    }
    let metas: Vec<&ColumnMeta> = std::iter::once(&side.target)
        .chain(&side.channels)
        .collect();
    let mut rdr = csv::ReaderBuilder::new().from_reader(crate::error::open(&csv_path)?);
    let headers = rdr.headers().map_err(|e| Error::csv(&csv_path, e))?.clone();
    let expected: Vec<&str> = std::iter::once("hour")
        .chain(metas.iter().map(|m| m.name.as_str()))
        .collect();
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(Error::format(
            &csv_path,
            format!("header {:?} does not match sidecar {:?}", headers, expected),
        ));
    }
    let mut values = vec![Vec::with_capacity(side.hours); metas.len()];
    let mut missing = vec![Vec::with_capacity(side.hours); metas.len()];
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::csv(&csv_path, e))?;
        let bad = |m: String| Error::format(&csv_path, format!("row {}: {m}", i + 2));
        let hour: i64 = rec[0]
            .parse()
            .map_err(|_| bad(format!("bad hour `{}`", &rec[0])))?;
        if hour != side.start_hour + i as i64 {
            return Err(bad(format!("hour {hour} breaks the contiguous grid")));
        }
        for k in 0..metas.len() {
            let cell = &rec[k + 1];
            if cell.is_empty() {
                values[k].push(0.0);
                missing[k].push(true);
            } else {
                values[k].push(
                    cell.parse::<f64>()
                        .map_err(|_| bad(format!("bad number `{cell}`")))?,
                );
                missing[k].push(false);
            }
        }
    }
    let mut channels = Vec::with_capacity(metas.len());
    for ((m, v), miss) in metas.iter().zip(values).zip(missing) {
        if v.len() != side.hours {
            return Err(Error::format(
                &csv_path,
                format!("{} rows, sidecar says {}", v.len(), side.hours),
            ));
        }
        if ranges(&miss) != m.missing {
            return Err(Error::format(
                &csv_path,
                format!(
                    "missing cells of `{}` disagree with the sidecar mask",
                    m.name
                ),
            ));
        }
        let mut c = Channel::new(&m.name, &m.unit, v, miss);
        c.tag = m.tag.clone();
        channels.push(c);
    }
    let target = channels.remove(0);
    let mut frame = HourlyFrame::new(&side.household_id, side.start_hour, &side.timezone, target);
    frame.latitude = side.latitude;
    frame.longitude = side.longitude;
    frame.region = side.region;
    frame.country = side.country;
    frame.metadata = side.metadata;
    frame.channels = channels;
    frame.validate()?;
    Ok(frame)
}

/// Write all frames plus the manifest into `dir`.
pub fn write_cache(dir: &Path, manifest: &Manifest, frames: &[HourlyFrame]) -> Result<()> {
    for f in frames {
        write_frame(dir, f)?;
    }
    write_json(&dir.join(MANIFEST_FILE), manifest)
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    read_json(&dir.join(MANIFEST_FILE))
}

pub fn read_cache(dir: &Path) -> Result<(Manifest, Vec<HourlyFrame>)> {
    let manifest = read_manifest(dir)?;
    let frames = manifest
        .households
        .iter()
        .map(|h| read_frame(dir, h))
        .collect::<Result<_>>()?;
    Ok((manifest, frames))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_ranges_are_half_open_runs() {
        assert_eq!(
            ranges(&[false, true, true, false, true]),
            vec![[1, 3], [4, 5]]
        );
        assert!(ranges(&[]).is_empty());
    }

    #[test]
    fn ids_must_be_portable_file_names() {
        assert!(file_stem("house_1").is_ok());
        assert!(file_stem("../x").is_err());
        assert!(file_stem("").is_err());
    }
}
