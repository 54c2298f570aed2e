//! HUE: hourly residential energy with station weather and house metadata,
//! all on the Vancouver clock.
//!
//! Layout under the root:
//! - `Residential_<id>.csv` with `date,hour,energy_kWh`,
//! - `Households.csv` with one row per house (see [`HUE_HOUSEHOLDS_FILE`]),
//! - `Weather_<station>.csv` with `date,hour,temperature,humidity,pressure,weather`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::{NaiveDate, NaiveDateTime, NaiveTime};
use gridfeat_core::frame::{HourlyFrame, MetaValue};
use gridfeat_core::resample::HourlySeries;
use gridfeat_core::schema::DatasetDescriptor;
use rayon::prelude::*;

use super::{
    base_frame, channel_from, header_index, numbered_files, parse_reading, FileTally, LoadOptions,
    LocalClock,
};
use crate::stream::{hourly_points, StreamResampler};
use crate::{Error, Result};

/// House metadata. Columns: `house_id`, `weather` (station code), `house_type`,
/// `facing`, `RUs`, optional `EV_kWh`, and 0/1 flags `FAC`, `FAGF`, `HP`,
/// `FPG`, `FPE`, `IFRHG`, `IFRHE`, `PAC`, `WRHIR`, `GEOTH`.
pub const HUE_HOUSEHOLDS_FILE: &str = "Households.csv";

/// Metadata key and the source flags any of which sets it.
const FLAGS: [(&str, &[&str]); 9] = [
    ("air_conditioning", &["FAC"]),
    ("gas_furnace", &["FAGF"]),
    ("heat_pump", &["HP"]),
    ("gas_fireplace", &["FPG"]),
    ("electric_fireplace", &["FPE"]),
    ("in_floor_heating", &["IFRHG", "IFRHE"]),
    ("portable_ac", &["PAC"]),
    ("cast_iron_radiators", &["WRHIR"]),
    ("geothermal_heating", &["GEOTH"]),
];

/// Coordinates of the weather stations HUE houses report against.
pub fn hue_station(code: &str) -> Option<(f64, f64)> {
    match code.to_ascii_uppercase().as_str() {
        "YVR" => Some((49.19, -123.18)),
        "WYJ" => Some((48.65, -123.43)),
        _ => None,
    }
}

/// Cloud cover in percent from the station's condition text.
fn cloud_cover(text: &str) -> Option<f64> {
    let t = text.to_ascii_lowercase();
    if t.trim().is_empty() {
        return None;
    }
    Some(if t.contains("mainly clear") {
        25.0
    } else if t.contains("clear") {
        0.0
    } else if t.contains("mostly cloudy") {
        75.0
    } else if t.contains("partly cloudy") {
        50.0
    } else {
        // Cloudy, overcast and every kind of precipitation or fog.
        100.0
    })
}

fn local_hour(date: &str, hour: &str) -> std::result::Result<NaiveDateTime, String> {
    let d = NaiveDate::parse_from_str(date.trim(), "%Y-%m-%d")
        .map_err(|_| format!("bad date `{date}`"))?;
    let h: u32 = hour
        .trim()
        .parse()
        .map_err(|_| format!("bad hour `{hour}`"))?;
    let t = NaiveTime::from_hms_opt(h, 0, 0).ok_or_else(|| format!("hour {h} out of range"))?;
    Ok(d.and_time(t))
}

fn reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    Ok(csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(crate::error::open(path)?))
}

fn column(path: &Path, headers: &csv::StringRecord, names: &[&str]) -> Result<usize> {
    header_index(headers, names)
        .ok_or_else(|| Error::format(path, format!("no `{}` column", names[0])))
}

struct Weather {
    channels: Vec<(&'static str, HourlySeries)>,
    tally: FileTally,
}

fn load_weather(path: &Path, zone: &str, options: &LoadOptions) -> Result<Weather> {
    let mut rdr = reader(path)?;
    let headers = rdr.headers().map_err(|e| Error::csv(path, e))?.clone();
    let (dc, hc) = (
        column(path, &headers, &["date"])?,
        column(path, &headers, &["hour"])?,
    );
    let numeric = [
        (
            "temperature",
            "°C",
            header_index(&headers, &["temperature"]),
        ),
        ("humidity", "%", header_index(&headers, &["humidity"])),
        ("pressure", "hPa", header_index(&headers, &["pressure"])),
        ("cloud_cover", "%", header_index(&headers, &["cloud_cover"])),
    ];
    let condition = header_index(&headers, &["weather"]);
    let mut points: [Vec<(i64, f64)>; 4] = Default::default();
    let mut clock = LocalClock::new(zone)?;
    let mut tally = FileTally::new(path);
    for rec in rdr.byte_records() {
        tally.rows += 1;
        let rec = match rec {
            Ok(r) => r,
            Err(e) => {
                tally.bad(e.position().map_or(0, |p| p.line()), e);
                continue;
            }
        };
        let line = rec.position().map_or(0, |p| p.line());
        let text = |i: usize| String::from_utf8_lossy(rec.get(i).unwrap_or_default()).into_owned();
        let stamp = match local_hour(&text(dc), &text(hc)) {
            Ok(s) => s,
            Err(e) => {
                tally.bad(line, e);
                continue;
            }
        };
        let Some(t) = clock.utc_seconds(stamp) else {
            tally.nonexistent_local += 1;
            continue;
        };
        let hour = t.div_euclid(3600);
        let mut row_error = None;
        for (k, (name, _, col)) in numeric.iter().enumerate() {
            let value = match col {
                Some(c) => match parse_reading(rec.get(*c).unwrap_or_default()) {
                    Ok(v) => v,
                    Err(e) => {
                        row_error.get_or_insert(e);
                        None
                    }
                },
                None if *name == "cloud_cover" => condition.and_then(|c| cloud_cover(&text(c))),
                None => None,
            };
            // Stations report pressure in kPa.
            let value = value.map(|v| {
                if *name == "pressure" && v < 200.0 {
                    v * 10.0
                } else {
                    v
                }
            });
            if let Some(v) = value {
                points[k].push((hour, v));
            }
        }
        if let Some(e) = row_error {
            tally.bad(line, e);
        }
    }
    tally.check(options.malformed_tolerance)?;
    let mut channels = Vec::new();
    for ((name, unit, _), pts) in numeric.iter().zip(&points) {
        if let Some(s) = hourly_points(pts, unit) {
            channels.push((*name, s));
        }
    }
    Ok(Weather { channels, tally })
}

fn load_energy(
    path: &Path,
    desc: &DatasetDescriptor,
    options: &LoadOptions,
) -> Result<(HourlySeries, FileTally)> {
    let mut rdr = reader(path)?;
    let headers = rdr.headers().map_err(|e| Error::csv(path, e))?.clone();
    let dc = column(path, &headers, &["date"])?;
    let hc = column(path, &headers, &["hour"])?;
    let ec = column(path, &headers, &["energy_kWh"])?;
    let mut stream = StreamResampler::new(
        "kWh",
        desc.native_interval_seconds,
        options.gap_limit_seconds,
    )?;
    let mut clock = LocalClock::new(&desc.timezone)?;
    let mut tally = FileTally::new(path);
    let mut last = i64::MIN;
    for rec in rdr.byte_records() {
        tally.rows += 1;
        let rec = match rec {
            Ok(r) => r,
            Err(e) => {
                tally.bad(e.position().map_or(0, |p| p.line()), e);
                continue;
            }
        };
        let line = rec.position().map_or(0, |p| p.line());
        let text = |i: usize| String::from_utf8_lossy(rec.get(i).unwrap_or_default()).into_owned();
        let parsed = local_hour(&text(dc), &text(hc))
            .and_then(|s| parse_reading(rec.get(ec).unwrap_or_default()).map(|v| (s, v)));
        let (stamp, value) = match parsed {
            Ok(p) => p,
            Err(e) => {
                tally.bad(line, e);
                continue;
            }
        };
        let Some(t) = clock.utc_seconds(stamp) else {
            tally.nonexistent_local += 1;
            continue;
        };
        if t <= last {
            tally.bad(line, "timestamp does not advance");
            continue;
        }
        last = t;
        stream.push(t, value)?;
    }
    tally.check(options.malformed_tolerance)?;
    if tally.rows == tally.malformed {
        return Err(Error::format(path, "no readable rows"));
    }
    Ok((stream.finish()?, tally))
}

fn flag(value: &str) -> Option<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "1" | "y" | "yes" | "true" => Some(true),
        "0" | "n" | "no" | "false" | "" => Some(false),
        _ => None,
    }
}

struct House {
    id: String,
    station: String,
    metadata: BTreeMap<String, MetaValue>,
}

fn load_households(path: &Path) -> Result<Vec<House>> {
    let mut rdr = reader(path)?;
    let headers = rdr.headers().map_err(|e| Error::csv(path, e))?.clone();
    let id_col = column(path, &headers, &["house_id"])?;
    let station_col = column(path, &headers, &["weather"])?;
    let mut out = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::csv(path, e))?;
        let get = |names: &[&str]| {
            header_index(&headers, names)
                .and_then(|i| rec.get(i))
                .unwrap_or("")
                .trim()
                .to_string()
        };
        let bad = |what: &str| Error::format(path, format!("row {}: bad {what}", k + 2));
        let mut metadata = BTreeMap::new();
        let text = |v: String| {
            MetaValue::Text(if v.is_empty() {
                "unknown".into()
            } else {
                v.to_ascii_lowercase()
            })
        };
        metadata.insert("building_type".into(), text(get(&["house_type"])));
        metadata.insert("building_orientation".into(), text(get(&["facing"])));
        let number = |v: String| {
            if v.is_empty() {
                Some(0.0)
            } else {
                v.parse::<f64>().ok()
            }
        };
        metadata.insert(
            "rental_units".into(),
            MetaValue::Number(number(get(&["RUs"])).ok_or_else(|| bad("RUs"))?),
        );
        let ev = number(get(&["EV_kWh", "ev_battery_kwh"])).ok_or_else(|| bad("EV_kWh"))?;
        metadata.insert("ev_battery_kwh".into(), MetaValue::Number(ev));
        for (key, sources) in FLAGS {
            let mut set = false;
            for s in sources {
                set |= flag(&get(&[s])).ok_or_else(|| bad(s))?;
            }
            metadata.insert(key.into(), MetaValue::Bool(set));
        }
        out.push(House {
            id: rec.get(id_col).unwrap_or("").trim().to_string(),
            station: rec.get(station_col).unwrap_or("").trim().to_string(),
            metadata,
        });
    }
    Ok(out)
}

pub(super) fn load(
    desc: &DatasetDescriptor,
    root: &Path,
    options: &LoadOptions,
) -> Result<(Vec<HourlyFrame>, Vec<FileTally>)> {
    let houses = load_households(&root.join(HUE_HOUSEHOLDS_FILE))?;
    let files = numbered_files(root, &["Residential_"], ".csv")?;
    if files.is_empty() {
        return Err(Error::MissingFile {
            path: root.join("Residential_<id>.csv"),
        });
    }
    let mut stations: BTreeMap<String, PathBuf> = BTreeMap::new();
    let mut jobs = Vec::new();
    for (n, path) in files {
        let house = houses
            .iter()
            .find(|h| h.id.parse::<u32>().ok() == Some(n) || h.id == n.to_string())
            .ok_or_else(|| {
                Error::format(
                    &root.join(HUE_HOUSEHOLDS_FILE),
                    format!("no row for house {n}"),
                )
            })?;
        stations
            .entry(house.station.to_ascii_uppercase())
            .or_insert_with(|| root.join(format!("Weather_{}.csv", house.station)));
        jobs.push((n, path, house));
    }
    let weather: BTreeMap<String, Weather> = stations
        .into_par_iter()
        .map(|(code, path)| load_weather(&path, &desc.timezone, options).map(|w| (code, w)))
        .collect::<Result<_>>()?;

    let loaded: Vec<(HourlyFrame, FileTally)> = jobs
        .into_par_iter()
        .map(|(n, path, house)| {
            let (energy, tally) = load_energy(&path, desc, options)?;
            let mut frame = base_frame(desc, &format!("residential_{n}"), &energy, "CA");
            let code = house.station.to_ascii_uppercase();
            if let Some((lat, lon)) = hue_station(&code) {
                frame.latitude = lat;
                frame.longitude = lon;
            }
            for (name, series) in &weather[&code].channels {
                frame
                    .channels
                    .push(channel_from(series, energy.start_hour, energy.len(), name));
            }
            frame.metadata = house.metadata.clone();
            Ok((frame, tally))
        })
        .collect::<Result<_>>()?;
    let mut tallies: Vec<FileTally> = weather.into_values().map(|w| w.tally).collect();
    let mut frames = Vec::with_capacity(loaded.len());
    for (f, t) in loaded {
        frames.push(f);
        tallies.push(t);
    }
    Ok((frames, tallies))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn condition_text_maps_to_cover() {
        assert_eq!(cloud_cover("Mainly Clear"), Some(25.0));
        assert_eq!(cloud_cover("Clear"), Some(0.0));
        assert_eq!(cloud_cover("Rain Showers"), Some(100.0));
        assert_eq!(cloud_cover(""), None);
    }
}
