//! REFIT: 8-second household and appliance power in watts.
//!
//! Layout under the root:
//! - `CLEAN_House<N>.csv` or `House_<N>.csv` with a `Unix` epoch column,
//!   `Aggregate` and `Appliance1` .. `Appliance9` in W (other columns ignored),
//! - `REFIT_houses.csv` with house metadata (see [`REFIT_HOUSES_FILE`]).

use std::collections::BTreeMap;
use std::path::Path;

use gridfeat_core::frame::{HourlyFrame, MetaValue};
use gridfeat_core::schema::{DatasetDescriptor, REFIT_ACTIVITY_TAGS};
use rayon::prelude::*;

use super::{
    base_frame, channel_from, header_index, numbered_files, parse_reading, FileTally, LoadOptions,
};
use crate::stream::StreamResampler;
use crate::{Error, Result};

/// House metadata. Columns: `house`, `residents`, `building_type`,
/// `household_size`, `construction_year` and `appliance1` .. `appliance9`
/// holding the appliance names of each channel (empty when unused).
pub const REFIT_HOUSES_FILE: &str = "REFIT_houses.csv";

/// Keywords per activity tag, checked in order against appliance names.
/// Cold appliances run around the clock and carry no tag.
const TAG_KEYWORDS: [(&str, &[&str]); 7] = [
    (
        "grooming",
        &["hair", "straightener", "shower", "toothbrush", "shaver"],
    ),
    (
        "kitchen",
        &[
            "kettle",
            "toaster",
            "microwave",
            "oven",
            "cooker",
            "hob",
            "dishwasher",
            "dish washer",
            "food mixer",
            "bread maker",
            "breadmaker",
            "coffee",
            "blender",
            "kitchen",
        ],
    ),
    (
        "cleaning",
        &[
            "washing machine",
            "washer",
            "tumble dryer",
            "dryer",
            "vacuum",
            "iron",
        ],
    ),
    (
        "entertainment",
        &[
            "tv",
            "television",
            "games",
            "console",
            "hi fi",
            "hifi",
            "audio",
            "dvd",
            "set top box",
            "sky",
            "speaker",
        ],
    ),
    (
        "work_at_home",
        &[
            "computer", "desktop", "laptop", "pc", "printer", "monitor", "office",
        ],
    ),
    (
        "heating",
        &["heater", "dehumidifier", "immersion", "heating", "fan"],
    ),
    ("bedroom", &["bedroom", "lamp", "electric blanket"]),
];

/// Activity tag of an appliance name, if any.
pub fn refit_tag(appliance: &str) -> Option<&'static str> {
    let words: String = appliance
        .to_ascii_lowercase()
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { ' ' })
        .collect();
    let padded = format!(
        " {} ",
        words.split_whitespace().collect::<Vec<_>>().join(" ")
    );
    if padded.contains(" fridge") || padded.contains(" freezer") {
        return None;
    }
    TAG_KEYWORDS
        .iter()
        .find(|(_, kws)| kws.iter().any(|k| padded.contains(&format!(" {k} "))))
        .map(|(tag, _)| *tag)
}

struct House {
    number: u32,
    appliances: [String; 9],
    metadata: BTreeMap<String, MetaValue>,
}

fn load_houses(path: &Path) -> Result<Vec<House>> {
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(crate::error::open(path)?);
    let headers = rdr.headers().map_err(|e| Error::csv(path, e))?.clone();
    let col = |n: &str| header_index(&headers, &[n]);
    let house_col = col("house").ok_or_else(|| Error::format(path, "no `house` column"))?;
    let mut out = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::csv(path, e))?;
        let get = |n: &str| col(n).and_then(|i| rec.get(i)).unwrap_or("").to_string();
        let bad = |what: &str| Error::format(path, format!("row {}: bad {what}", k + 2));
        let number: u32 = rec
            .get(house_col)
            .unwrap_or("")
            .trim_start_matches(|c: char| !c.is_ascii_digit())
            .parse()
            .map_err(|_| bad("house"))?;
        let appliances: [String; 9] = std::array::from_fn(|i| get(&format!("appliance{}", i + 1)));
        let mut metadata = BTreeMap::new();
        for key in ["residents", "household_size"] {
            let v: f64 = get(key).parse().map_err(|_| bad(key))?;
            metadata.insert(key.to_string(), MetaValue::Number(v));
        }
        // Free-form years such as "1965-1974" take their first four digits.
        let year_text = get("construction_year");
        let digits: String = year_text
            .chars()
            .skip_while(|c| !c.is_ascii_digit())
            .take(4)
            .collect();
        let year: f64 = digits.parse().map_err(|_| bad("construction_year"))?;
        metadata.insert("construction_year".into(), MetaValue::Number(year));
        let building = get("building_type");
        metadata.insert(
            "building_type".into(),
            MetaValue::Text(if building.is_empty() {
                "unknown".into()
            } else {
                building.to_ascii_lowercase()
            }),
        );
        let owned = appliances.iter().filter(|a| !a.trim().is_empty()).count();
        metadata.insert("appliances_owned".into(), MetaValue::Number(owned as f64));
        out.push(House {
            number,
            appliances,
            metadata,
        });
    }
    Ok(out)
}

fn load_house(
    desc: &DatasetDescriptor,
    path: &Path,
    house: &House,
    options: &LoadOptions,
) -> Result<(HourlyFrame, FileTally)> {
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .from_reader(crate::error::open(path)?);
    let headers = rdr.headers().map_err(|e| Error::csv(path, e))?.clone();
    let need = |names: &[&str]| {
        header_index(&headers, names)
            .ok_or_else(|| Error::format(path, format!("no `{}` column", names[0])))
    };
    let unix = need(&["Unix", "unix_time", "timestamp"])?;
    let mut cols = vec![need(&["Aggregate"])?];
    for i in 1..=9 {
        cols.push(need(&[&format!("Appliance{i}")])?);
    }
    let mut streams: Vec<StreamResampler> = (0..cols.len())
        .map(|_| StreamResampler::new("W", desc.native_interval_seconds, options.gap_limit_seconds))
        .collect::<Result<_>>()?;
    let mut tally = FileTally::new(path);
    let mut last = i64::MIN;
    let mut rec = csv::ByteRecord::new();
    let mut values = vec![None; cols.len()];
    loop {
        match rdr.read_byte_record(&mut rec) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => {
                tally.rows += 1;
                tally.bad(e.position().map_or(0, |p| p.line()), e);
                continue;
            }
        }
        tally.rows += 1;
        let line = rec.position().map_or(0, |p| p.line());
        let t = match parse_reading(rec.get(unix).unwrap_or_default()) {
            Ok(Some(t)) if t.fract() == 0.0 => t as i64,
            _ => {
                tally.bad(line, "bad unix time");
                continue;
            }
        };
        let mut ok = true;
        for (v, &c) in values.iter_mut().zip(&cols) {
            match rec.get(c).map(parse_reading) {
                Some(Ok(x)) => *v = x,
                Some(Err(e)) => {
                    tally.bad(line, e);
                    ok = false;
                    break;
                }
                None => {
                    tally.bad(line, "short row");
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        if t <= last {
            tally.bad(line, "timestamp does not advance");
            continue;
        }
        last = t;
        for (s, v) in streams.iter_mut().zip(&values) {
            s.push(t, *v)?;
        }
    }
    tally.check(options.malformed_tolerance)?;
    if tally.rows == tally.malformed {
        return Err(Error::format(path, "no readable rows"));
    }
    let mut hourly = Vec::with_capacity(streams.len());
    for s in streams {
        hourly.push(s.finish()?);
    }
    let target = &hourly[0];
    let mut frame = base_frame(desc, &format!("house_{}", house.number), target, "GB");
    for (i, s) in hourly.iter().enumerate().skip(1) {
        let mut ch = channel_from(
            s,
            target.start_hour,
            target.len(),
            &format!("appliance_{i}"),
        );
        if let Some(tag) = refit_tag(&house.appliances[i - 1]) {
            ch = ch.with_tag(tag);
        }
        frame.channels.push(ch);
    }
    frame.metadata = house.metadata.clone();
    Ok((frame, tally))
}

pub(super) fn load(
    desc: &DatasetDescriptor,
    root: &Path,
    options: &LoadOptions,
) -> Result<(Vec<HourlyFrame>, Vec<FileTally>)> {
    debug_assert!(TAG_KEYWORDS
        .iter()
        .all(|(t, _)| REFIT_ACTIVITY_TAGS.iter().any(|(a, _)| a == t)));
    let meta_path = root.join(REFIT_HOUSES_FILE);
    let houses = load_houses(&meta_path)?;
    let files = numbered_files(root, &["CLEAN_House", "House_", "House"], ".csv")?;
    if files.is_empty() {
        return Err(Error::MissingFile {
            path: root.join("CLEAN_House<N>.csv"),
        });
    }
    let jobs: Vec<_> = files
        .into_iter()
        .map(|(n, path)| {
            let house = houses
                .iter()
                .find(|h| h.number == n)
                .ok_or_else(|| Error::format(&meta_path, format!("no row for house {n}")))?;
            Ok((path, house))
        })
        .collect::<Result<_>>()?;
    let loaded: Vec<(HourlyFrame, FileTally)> = jobs
        .into_par_iter()
        .map(|(path, house)| load_house(desc, &path, house, options))
        .collect::<Result<_>>()?;
    Ok(loaded.into_iter().unzip())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn appliance_names_map_to_tags() {
        assert_eq!(refit_tag("Kettle"), Some("kitchen"));
        assert_eq!(refit_tag("Washer Dryer"), Some("cleaning"));
        assert_eq!(refit_tag("Hair Dryer"), Some("grooming"));
        assert_eq!(refit_tag("Fridge-Freezer"), None);
        assert_eq!(refit_tag("Television Site"), Some("entertainment"));
        assert_eq!(refit_tag("Desktop Computer"), Some("work_at_home"));
        assert_eq!(refit_tag("Electric Heater"), Some("heating"));
        assert_eq!(refit_tag(""), None);
        // Substrings inside other words do not count.
        assert_eq!(refit_tag("Spcial"), None);
    }
}
