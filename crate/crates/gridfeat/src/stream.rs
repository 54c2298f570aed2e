//! Bounded-memory resampling of long raw streams.
//!
//! Readings are cut into fixed blocks of hours. Each block is resampled with
//! the core routine together with the last reading before it and the first
//! reading after it, so holds and gaps that cross a block edge come out the
//! same as in a single pass over the whole series.

use gridfeat_core::resample::{resample_to_hourly, HourlySeries, RawSeries, Unit};
use gridfeat_core::Error as CoreError;

use crate::Result;

/// One week per block.
pub const DEFAULT_BLOCK_HOURS: i64 = 168;

#[derive(Debug, Clone)]
pub struct StreamResampler {
    unit: String,
    nominal: u32,
    gap_limit: u32,
    block_hours: i64,
    first: Option<i64>,
    last: i64,
    last_finite: Option<i64>,
    prev: Option<(i64, f64)>,
    buf: Vec<(i64, f64)>,
    block_start: i64,
    out_start: i64,
    values: Vec<f64>,
    missing: Vec<bool>,
}

impl StreamResampler {
    pub fn new(unit: &str, nominal_interval_seconds: u32, gap_limit_seconds: u32) -> Result<Self> {
        Self::with_block(
            unit,
            nominal_interval_seconds,
            gap_limit_seconds,
            DEFAULT_BLOCK_HOURS,
        )
    }

    pub fn with_block(unit: &str, nominal: u32, gap_limit: u32, block_hours: i64) -> Result<Self> {
        unit.parse::<Unit>()?;
        if gap_limit >= 3600 {
            return Err(CoreError::InvalidInput("gap limit must be below one hour".into()).into());
        }
        if nominal == 0 || block_hours < 1 {
            return Err(CoreError::InvalidInput(
                "nominal interval and block length must be positive".into(),
            )
            .into());
        }
        Ok(StreamResampler {
            unit: unit.to_string(),
            nominal,
            gap_limit,
            block_hours,
            first: None,
            last: 0,
            last_finite: None,
            prev: None,
            buf: Vec::new(),
            block_start: 0,
            out_start: 0,
            values: Vec::new(),
            missing: Vec::new(),
        })
    }

    /// Feed one reading; `None` or non-finite values are explicit gaps.
    pub fn push(&mut self, t: i64, value: Option<f64>) -> Result<()> {
        match self.first {
            Some(_) if t <= self.last => {
                return Err(CoreError::InvalidInput(format!(
                    "timestamp {t} does not advance past {}",
                    self.last
                ))
                .into())
            }
            Some(_) => {}
            None => {
                self.first = Some(t);
                self.out_start = t.div_euclid(3600);
                self.block_start = self.out_start.div_euclid(self.block_hours) * self.block_hours;
            }
        }
        self.last = t;
        let Some(v) = value.filter(|v| v.is_finite()) else {
            return Ok(());
        };
        while t >= (self.block_start + self.block_hours) * 3600 {
            self.flush(Some((t, v)), None)?;
        }
        self.buf.push((t, v));
        self.last_finite = Some(t);
        Ok(())
    }

    fn flush(&mut self, next: Option<(i64, f64)>, tail: Option<i64>) -> Result<()> {
        let (lo, hi) = (self.block_start, self.block_start + self.block_hours);
        let len = (hi - self.out_start).max(0) as usize;
        if self.values.len() < len {
            self.values.resize(len, 0.0);
            self.missing.resize(len, true);
        }
        if !self.buf.is_empty() || self.prev.is_some() {
            let mut timestamps = Vec::with_capacity(self.buf.len() + 3);
            let mut values = Vec::with_capacity(self.buf.len() + 3);
            for (t, v) in self.prev.iter().chain(&self.buf).chain(next.iter()) {
                timestamps.push(*t);
                values.push(Some(*v));
            }
            if let Some(t) = tail {
                timestamps.push(t);
                values.push(None);
            }
            let raw = RawSeries {
                timestamps,
                values,
                unit: self.unit.clone(),
                nominal_interval_seconds: self.nominal,
            };
            let hourly =
                resample_to_hourly(&raw, self.gap_limit)?.reindex(lo, self.block_hours as usize);
            for (k, h) in (lo..hi).enumerate() {
                if h >= self.out_start {
                    let i = (h - self.out_start) as usize;
                    self.values[i] = hourly.values[k];
                    self.missing[i] = hourly.missing[k];
                }
            }
        }
        if let Some(last) = self.buf.last() {
            self.prev = Some(*last);
        }
        self.buf.clear();
        self.block_start = hi;
        Ok(())
    }

    /// Hourly series over the same span a single-pass resample would cover.
    pub fn finish(mut self) -> Result<HourlySeries> {
        let Some(_) = self.first else {
            return Err(CoreError::Empty.into());
        };
        let end_hour = (self.last + self.nominal as i64 - 1).div_euclid(3600) + 1;
        // A trailing run of explicit gaps still bounds the last hold.
        let tail = (self.last_finite != Some(self.last)).then_some(self.last);
        while self.block_start < end_hour {
            self.flush(None, tail)?;
        }
        let n = (end_hour - self.out_start) as usize;
        self.values.truncate(n);
        self.missing.truncate(n);
        let unit: Unit = self.unit.parse()?;
        Ok(HourlySeries {
            start_hour: self.out_start,
            values: self.values,
            missing: self.missing,
            unit: unit.hourly_unit().to_string(),
        })
    }
}

/// Place hourly readings `(epoch hour, value)` on a contiguous grid; hours
/// without a reading are missing.
pub fn hourly_points(points: &[(i64, f64)], unit: &str) -> Option<HourlySeries> {
    let start = points.iter().map(|p| p.0).min()?;
    let end = points.iter().map(|p| p.0).max()? + 1;
    let n = (end - start) as usize;
    let mut values = vec![0.0; n];
    let mut missing = vec![true; n];
    for &(h, v) in points {
        if v.is_finite() {
            values[(h - start) as usize] = v;
            missing[(h - start) as usize] = false;
        }
    }
    Some(HourlySeries {
        start_hour: start,
        values,
        missing,
        unit: unit.to_string(),
    })
}
