//! UCI individual household electric power consumption: one
//! semicolon-separated file of one-minute readings on the Paris clock.

use std::path::Path;

use chrono::{NaiveDate, NaiveTime};
use gridfeat_core::frame::HourlyFrame;
use gridfeat_core::schema::DatasetDescriptor;

use super::{
    base_frame, channel_from, header_index, parse_reading, FileTally, LoadOptions, LocalClock,
};
use crate::stream::StreamResampler;
use crate::{Error, Result};

pub const UCI_FILE: &str = "household_power_consumption.txt";

/// Appliance category of each submeter: kitchen, laundry room, water
/// heater and air conditioning.
pub const UCI_SUBMETER_TAGS: [&str; 3] = ["kitchen", "laundry", "climate"];

/// `(header, channel, unit)`; the first entry is the target.
const COLUMNS: [(&str, &str, &str); 7] = [
    ("Global_active_power", "target_kwh", "kW"),
    ("Global_reactive_power", "reactive_power", "kVAr"),
    ("Voltage", "voltage", "V"),
    ("Global_intensity", "intensity", "A"),
    ("Sub_metering_1", "submeter_1", "Wh"),
    ("Sub_metering_2", "submeter_2", "Wh"),
    ("Sub_metering_3", "submeter_3", "Wh"),
];

fn parse_stamp(date: &[u8], time: &[u8]) -> std::result::Result<chrono::NaiveDateTime, String> {
    let d = std::str::from_utf8(date).map_err(|e| e.to_string())?.trim();
    let t = std::str::from_utf8(time).map_err(|e| e.to_string())?.trim();
    let date = NaiveDate::parse_from_str(d, "%d/%m/%Y").map_err(|_| format!("bad date `{d}`"))?;
    let time = NaiveTime::parse_from_str(t, "%H:%M:%S").map_err(|_| format!("bad time `{t}`"))?;
    Ok(date.and_time(time))
}

pub(super) fn load(
    desc: &DatasetDescriptor,
    root: &Path,
    options: &LoadOptions,
) -> Result<(Vec<HourlyFrame>, Vec<FileTally>)> {
    let path = root.join(UCI_FILE);
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(b';')
        .flexible(true)
        .from_reader(crate::error::open(&path)?);
    let headers = reader.headers().map_err(|e| Error::csv(&path, e))?.clone();
    let col = |name: &str| {
        header_index(&headers, &[name])
            .ok_or_else(|| Error::format(&path, format!("no `{name}` column")))
    };
    let (date_col, time_col) = (col("Date")?, col("Time")?);
    let value_cols: Vec<usize> = COLUMNS.iter().map(|c| col(c.0)).collect::<Result<_>>()?;

    let mut streams: Vec<StreamResampler> = COLUMNS
        .iter()
        .map(|c| StreamResampler::new(c.2, desc.native_interval_seconds, options.gap_limit_seconds))
        .collect::<Result<_>>()?;
    let mut clock = LocalClock::new(&desc.timezone)?;
    let mut tally = FileTally::new(&path);
    let mut last = i64::MIN;
    let mut record = csv::ByteRecord::new();
    let mut values = [None; 7];
    loop {
        match reader.read_byte_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => {
                tally.rows += 1;
                tally.bad(e.position().map_or(0, |p| p.line()), e);
                continue;
            }
        }
        tally.rows += 1;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != headers.len() {
            tally.bad(
                line,
                format!("{} fields, expected {}", record.len(), headers.len()),
            );
            continue;
        }
        let stamp = match parse_stamp(&record[date_col], &record[time_col]) {
            Ok(s) => s,
            Err(e) => {
                tally.bad(line, e);
                continue;
            }
        };
        let mut ok = true;
        for (v, &c) in values.iter_mut().zip(&value_cols) {
            match parse_reading(&record[c]) {
                Ok(x) => *v = x,
                Err(e) => {
                    tally.bad(line, e);
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let Some(t) = clock.utc_seconds(stamp) else {
            tally.nonexistent_local += 1;
            continue;
        };
        if t <= last {
            tally.bad(line, "timestamp does not advance");
            continue;
        }
        last = t;
        for (s, v) in streams.iter_mut().zip(values) {
            s.push(t, v)?;
        }
    }
    tally.check(options.malformed_tolerance)?;
    if tally.rows == tally.malformed {
        return Err(Error::format(&path, "no readable rows"));
    }

    let mut hourly = Vec::with_capacity(streams.len());
    for s in streams {
        hourly.push(s.finish()?);
    }
    let target = &hourly[0];
    let (start, len) = (target.start_hour, target.len());
    let mut frame = base_frame(desc, "uci_sceaux", target, "FR");
    for (i, (s, c)) in hourly.iter().zip(COLUMNS).enumerate().skip(1) {
        let mut ch = channel_from(s, start, len, c.1);
        if i >= 4 {
            ch = ch.with_tag(UCI_SUBMETER_TAGS[i - 4]);
        }
        frame.channels.push(ch);
    }
    Ok((vec![frame], vec![tally]))
}
