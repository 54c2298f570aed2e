//! Dataset adapters: raw files in each dataset's published layout to
//! per-household [`HourlyFrame`]s.
//!
//! Timestamps are converted from the dataset's local clock to UTC; frames
//! keep the IANA zone for calendar features. Rows that cannot be parsed are
//! counted and skipped, and loading fails once their share of a file exceeds
//! [`LoadOptions::malformed_tolerance`].

mod hue;
mod refit;
mod uci;

use std::path::{Path, PathBuf};

use chrono::{NaiveDateTime, TimeZone};
use chrono_tz::Tz;
use gridfeat_core::frame::{Channel, HourlyFrame};
use gridfeat_core::resample::{HourlySeries, DEFAULT_GAP_LIMIT_SECONDS};
use gridfeat_core::schema::{dataset_descriptor, DatasetDescriptor, DatasetId};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use hue::{hue_station, HUE_HOUSEHOLDS_FILE};
pub use refit::{refit_tag, REFIT_HOUSES_FILE};
pub use uci::{UCI_FILE, UCI_SUBMETER_TAGS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LoadOptions {
    pub gap_limit_seconds: u32,
    /// Largest share of malformed rows per file that is skipped silently.
    pub malformed_tolerance: f64,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            gap_limit_seconds: DEFAULT_GAP_LIMIT_SECONDS,
            malformed_tolerance: 0.01,
        }
    }
}

/// Row accounting of one source file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FileTally {
    pub path: PathBuf,
    pub rows: usize,
    pub malformed: usize,
    /// Local times skipped by a daylight-saving jump.
    pub nonexistent_local: usize,
    #[serde(skip)]
    first_error: Option<String>,
}

impl FileTally {
    pub fn new(path: &Path) -> Self {
        FileTally {
            path: path.to_path_buf(),
            ..Default::default()
        }
    }

    pub(crate) fn bad(&mut self, line: u64, why: impl std::fmt::Display) {
        self.malformed += 1;
        if self.first_error.is_none() {
            self.first_error = Some(format!("line {line}: {why}"));
        }
    }

    pub(crate) fn check(&self, tolerance: f64) -> Result<()> {
        if self.malformed > 0 && self.malformed as f64 > tolerance * self.rows.max(1) as f64 {
            return Err(Error::Malformed {
                path: self.path.clone(),
                bad: self.malformed,
                total: self.rows,
                tolerance,
                first: self.first_error.clone().unwrap_or_default(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub descriptor: DatasetDescriptor,
    pub frames: Vec<HourlyFrame>,
    pub tallies: Vec<FileTally>,
}

/// Maps wall-clock readings of one zone to UTC seconds. In the repeated hour
/// after a backward shift the earlier instant is taken until the clock has
/// passed it, then the later one.
#[derive(Debug, Clone)]
pub(crate) struct LocalClock {
    tz: Tz,
    last: i64,
}

impl LocalClock {
    pub fn new(zone: &str) -> Result<Self> {
        let tz: Tz = zone
            .parse()
            .map_err(|_| gridfeat_core::Error::InvalidZone(zone.to_string()))?;
        Ok(LocalClock { tz, last: i64::MIN })
    }

    pub fn utc_seconds(&mut self, local: NaiveDateTime) -> Option<i64> {
        let t = match self.tz.from_local_datetime(&local) {
            chrono::LocalResult::Single(t) => t.timestamp(),
            chrono::LocalResult::Ambiguous(a, b) => {
                if a.timestamp() > self.last {
                    a.timestamp()
                } else {
                    b.timestamp()
                }
            }
            chrono::LocalResult::None => return None,
        };
        self.last = self.last.max(t);
        Some(t)
    }
}

/// Parse a numeric cell; `?` and empty cells are missing readings.
pub(crate) fn parse_reading(cell: &[u8]) -> std::result::Result<Option<f64>, String> {
    let s = std::str::from_utf8(cell)
        .map_err(|_| "invalid utf-8".to_string())?
        .trim();
    if s.is_empty() || s == "?" || s.eq_ignore_ascii_case("nan") {
        return Ok(None);
    }
    s.parse::<f64>()
        .map(Some)
        .map_err(|_| format!("bad number `{s}`"))
}

pub(crate) fn channel_from(series: &HourlySeries, start: i64, len: usize, name: &str) -> Channel {
    let s = series.reindex(start, len);
    Channel::new(name, &s.unit, s.values, s.missing)
}

/// Frame skeleton carrying the dataset's location and calendar region.
pub(crate) fn base_frame(
    desc: &DatasetDescriptor,
    id: &str,
    target: &HourlySeries,
    country: &str,
) -> HourlyFrame {
    let mut f = HourlyFrame::new(
        id,
        target.start_hour,
        &desc.timezone,
        Channel::new(
            "target_kwh",
            "kWh",
            target.values.clone(),
            target.missing.clone(),
        ),
    );
    f.latitude = desc.latitude;
    f.longitude = desc.longitude;
    f.region = desc.region.clone();
    f.country = country.to_string();
    f
}

pub(crate) fn header_index(headers: &csv::StringRecord, names: &[&str]) -> Option<usize> {
    headers
        .iter()
        .position(|h| names.iter().any(|n| h.trim().eq_ignore_ascii_case(n)))
}

pub(crate) fn require_dir(root: &Path) -> Result<()> {
    if root.is_dir() {
        Ok(())
    } else {
        Err(Error::MissingFile {
            path: root.to_path_buf(),
        })
    }
}

/// Load every household of dataset `id` found under `root`.
pub fn load_dataset(id: DatasetId, root: &Path, options: &LoadOptions) -> Result<Dataset> {
    if !(0.0..=1.0).contains(&options.malformed_tolerance) {
        return Err(Error::Config(format!(
            "malformed_tolerance {} outside [0, 1]",
            options.malformed_tolerance
        )));
    }
    require_dir(root)?;
    let desc = dataset_descriptor(id);
    let (frames, tallies) = match id {
        DatasetId::Hue => hue::load(&desc, root, options)?,
        DatasetId::Uci => uci::load(&desc, root, options)?,
        DatasetId::Refit => refit::load(&desc, root, options)?,
        DatasetId::Synthetic => {
            return Err(Error::Config(
                "the synthetic dataset is generated, not loaded from files".into(),
            ))
        }
    };
    for f in &frames {
        f.validate()?;
    }
    let mut descriptor = desc;
    descriptor.household_ids = frames.iter().map(|f| f.household_id.clone()).collect();
    descriptor.validate()?;
    Ok(Dataset {
        descriptor,
        frames,
        tallies,
    })
}

/// Files in `dir` named `<prefix><number><suffix>`, sorted by number.
pub(crate) fn numbered_files(
    dir: &Path,
    prefixes: &[&str],
    suffix: &str,
) -> Result<Vec<(u32, PathBuf)>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        for p in prefixes {
            if let Some(n) = name
                .strip_prefix(p)
                .and_then(|r| r.strip_suffix(suffix))
                .and_then(|n| n.parse().ok())
            {
                out.push((n, entry.path()));
                break;
            }
        }
    }
    out.sort();
    out.dedup_by_key(|e| e.0);
    Ok(out)
}
