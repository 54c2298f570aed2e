//! Resampling of irregular or sub-hourly readings onto the hourly grid.
//!
//! Sample `i` holds its value over `[s_i, s_{i+1})` when the next reading is
//! at most `gap_limit` seconds away. Otherwise it holds for one nominal
//! interval and the rest up to `s_{i+1}` is a data gap. Any hour touching an
//! internal gap is reported missing; leading and trailing partial coverage
//! is tolerated up to `gap_limit` seconds.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::str::FromStr;

use crate::{Error, Result};

pub const DEFAULT_GAP_LIMIT_SECONDS: u32 = 900;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    Watt,
    Kilowatt,
    KiloVar,
    WattHour,
    KilowattHour,
    Volt,
    Ampere,
    Celsius,
    Percent,
    Hectopascal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregation {
    /// Rate quantity, integrated over time.
    Integrate,
    /// Quantity per reading, summed into the hour of its timestamp.
    Sum,
    /// Intensive quantity, time-weighted mean.
    Mean,
}

impl Unit {
    pub fn aggregation(self) -> Aggregation {
        match self {
            Unit::Watt | Unit::Kilowatt | Unit::KiloVar => Aggregation::Integrate,
            Unit::WattHour | Unit::KilowattHour => Aggregation::Sum,
            _ => Aggregation::Mean,
        }
    }

    /// Factor bringing one reading to the hourly output unit.
    fn scale(self) -> f64 {
        match self {
            Unit::Watt | Unit::WattHour => 1e-3,
            _ => 1.0,
        }
    }

    pub fn hourly_unit(self) -> &'static str {
        match self {
            Unit::Watt | Unit::Kilowatt | Unit::WattHour | Unit::KilowattHour => "kWh",
            Unit::KiloVar => "kVArh",
            Unit::Volt => "V",
            Unit::Ampere => "A",
            Unit::Celsius => "°C",
            Unit::Percent => "%",
            Unit::Hectopascal => "hPa",
        }
    }
}

impl FromStr for Unit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "W" => Unit::Watt,
            "kW" => Unit::Kilowatt,
            "kVAr" | "kVAR" | "kvar" => Unit::KiloVar,
            "Wh" => Unit::WattHour,
            "kWh" => Unit::KilowattHour,
            "V" => Unit::Volt,
            "A" => Unit::Ampere,
            "°C" | "C" | "degC" => Unit::Celsius,
            "%" => Unit::Percent,
            "hPa" => Unit::Hectopascal,
            _ => return Err(Error::UnknownUnit(s.to_string())),
        })
    }
}

/// Raw readings of one quantity. `None` marks an explicitly missing reading.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSeries {
    pub timestamps: Vec<i64>,
    pub values: Vec<Option<f64>>,
    pub unit: String,
    pub nominal_interval_seconds: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HourlySeries {
    /// UTC epoch hour of the first value.
    pub start_hour: i64,
    pub values: Vec<f64>,
    pub missing: Vec<bool>,
    pub unit: String,
}

impl HourlySeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn end_hour(&self) -> i64 {
        self.start_hour + self.values.len() as i64
    }

    /// Re-express on `[start, start + len)`; hours outside the source are missing.
    pub fn reindex(&self, start: i64, len: usize) -> HourlySeries {
        let mut values = vec![0.0; len];
        let mut missing = vec![true; len];
        for (i, (v, m)) in values.iter_mut().zip(missing.iter_mut()).enumerate() {
            let src = start + i as i64 - self.start_hour;
            if src >= 0 && (src as usize) < self.values.len() {
                *v = self.values[src as usize];
                *m = self.missing[src as usize];
            }
        }
        HourlySeries {
            start_hour: start,
            values,
            missing,
            unit: self.unit.clone(),
        }
    }
}

fn hour_floor(t: i64) -> i64 {
    t.div_euclid(3600)
}

pub fn resample_to_hourly(series: &RawSeries, gap_limit_seconds: u32) -> Result<HourlySeries> {
    if series.timestamps.len() != series.values.len() {
        return Err(Error::LengthMismatch {
            left: series.timestamps.len(),
            right: series.values.len(),
        });
    }
    if gap_limit_seconds >= 3600 {
        return Err(Error::InvalidInput(
            "gap limit must be below one hour".to_string(),
        ));
    }
    if series.nominal_interval_seconds == 0 {
        return Err(Error::InvalidInput(
            "nominal interval must be positive".to_string(),
        ));
    }
    let unit: Unit = series.unit.parse()?;
    if series.timestamps.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput(
            "timestamps must be strictly increasing".to_string(),
        ));
    }
    let samples: Vec<(i64, f64)> = series
        .timestamps
        .iter()
        .zip(&series.values)
        .filter_map(|(&t, v)| v.filter(|x| x.is_finite()).map(|x| (t, x)))
        .collect();
    let (Some(first), Some(last)) = (series.timestamps.first(), series.timestamps.last()) else {
        return Err(Error::Empty);
    };
    let nominal = series.nominal_interval_seconds as i64;
    let limit = gap_limit_seconds as i64;
    let start_hour = hour_floor(*first);
    let end_hour = hour_floor(*last + nominal - 1) + 1;
    let n = (end_hour - start_hour) as usize;

    let mut acc = vec![0.0; n];
    let mut weight = vec![0.0; n];
    let mut covered = vec![0i64; n];
    let mut broken = vec![false; n];

    let hour_index = |t: i64| (hour_floor(t) - start_hour) as usize;
    let range_end = end_hour * 3600;
    // Mark every hour overlapping [a, b) as missing.
    let mark_gap = |broken: &mut Vec<bool>, a: i64, b: i64| {
        if b > a {
            for h in hour_index(a)..=hour_index(b - 1).min(n - 1) {
                broken[h] = true;
            }
        }
    };

    for (i, &(t, v)) in samples.iter().enumerate() {
        let next = samples.get(i + 1).map(|s| s.0);
        let hold_end = match next {
            Some(nx) if nx - t <= limit => nx,
            Some(nx) => (t + nominal).min(nx),
            None => (t + nominal).min(range_end),
        };
        if let Some(nx) = next {
            if nx - t > limit {
                mark_gap(&mut broken, hold_end, nx);
            }
        }
        let v = v * unit.scale();
        if unit.aggregation() == Aggregation::Sum {
            acc[hour_index(t)] += v;
        }
        // Walk the hold interval hour by hour.
        let mut a = t;
        while a < hold_end {
            let h = hour_index(a);
            let b = ((hour_floor(a) + 1) * 3600).min(hold_end);
            let dt = (b - a) as f64;
            covered[h] += b - a;
            match unit.aggregation() {
                Aggregation::Integrate => acc[h] += v * dt / 3600.0,
                Aggregation::Mean => {
                    acc[h] += v * dt;
                    weight[h] += dt;
                }
                Aggregation::Sum => {}
            }
            a = b;
        }
    }
    // Internal gaps were marked above; leading and trailing uncovered spans
    // (and hours with no samples at all) fall out of the coverage count.
    let mut missing = vec![false; n];
    for h in 0..n {
        missing[h] = broken[h] || 3600 - covered[h] > limit;
        if !missing[h] && unit.aggregation() == Aggregation::Mean {
            acc[h] /= weight[h];
        }
        if missing[h] {
            acc[h] = 0.0;
        }
    }
    if samples.is_empty() {
        missing.iter_mut().for_each(|m| *m = true);
    }
    Ok(HourlySeries {
        start_hour,
        values: acc,
        missing,
        unit: unit.hourly_unit().to_string(),
    })
}
