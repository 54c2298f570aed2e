//! Look-back statistics over hourly series.
//!
//! Every function here answers for a row hour `t` using only hours before
//! `t`, so columns built from them never see the value being forecast.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use chrono::{Days, NaiveDate};

use crate::calendar::Zone;
use crate::frame::{Channel, HourlyFrame};
use crate::schema::{Series, YesterdayStat};
use crate::{Error, Result};

/// Values with a missingness mask; masked entries hold `0.0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Masked {
    pub values: Vec<f64>,
    pub missing: Vec<bool>,
}

impl Masked {
    pub fn from_channel(c: &Channel) -> Self {
        Masked {
            values: c.values.clone(),
            missing: c.missing.clone(),
        }
    }

    pub fn from_options(v: &[Option<f64>]) -> Self {
        Masked {
            values: v.iter().map(|x| x.unwrap_or(0.0)).collect(),
            missing: v.iter().map(Option::is_none).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<f64> {
        (!*self.missing.get(i)?).then(|| self.values[i])
    }

    fn zip_with(a: &Masked, b: &Masked, f: impl Fn(f64, f64) -> Option<f64>) -> Masked {
        let (values, missing) = (0..a.len())
            .map(|i| match (a.get(i), b.get(i)) {
                (Some(x), Some(y)) => f(x, y)
                    .filter(|v| v.is_finite())
                    .map_or((0.0, true), |v| (v, false)),
                _ => (0.0, true),
            })
            .unzip();
        Masked { values, missing }
    }
}

/// Materialize a series of `frame`.
pub fn resolve_series(frame: &HourlyFrame, series: &Series) -> Result<Masked> {
    Ok(match series {
        Series::Target => Masked::from_channel(&frame.target),
        Series::Channel { name } => Masked::from_channel(
            frame
                .channel(name)
                .ok_or_else(|| Error::MissingChannel(name.clone()))?,
        ),
        Series::Tagged { tag } => {
            let mut channels = frame.tagged(tag).peekable();
            if channels.peek().is_none() {
                return Err(Error::MissingChannel(alloc::format!("tag:{tag}")));
            }
            let mut out = Masked {
                values: vec![0.0; frame.len()],
                missing: vec![false; frame.len()],
            };
            for c in channels {
                for i in 0..frame.len() {
                    out.values[i] += c.values[i];
                    out.missing[i] |= c.missing[i];
                }
            }
            for i in 0..frame.len() {
                if out.missing[i] {
                    out.values[i] = 0.0;
                }
            }
            out
        }
        Series::Ratio { num, den } => {
            let (n, d) = (resolve_series(frame, num)?, resolve_series(frame, den)?);
            Masked::zip_with(&n, &d, |x, y| (y > 0.0).then(|| x / y))
        }
        Series::Hypot { a, b } => {
            let (a, b) = (resolve_series(frame, a)?, resolve_series(frame, b)?);
            Masked::zip_with(&a, &b, |x, y| Some(libm::sqrt(x * x + y * y)))
        }
    })
}

/// `s[t - k]`.
pub fn lag_at(s: &Masked, t: usize, k: usize) -> Option<f64> {
    t.checked_sub(k).and_then(|i| s.get(i))
}

fn window(s: &Masked, t: usize, w: usize) -> Option<&[f64]> {
    let lo = t.checked_sub(w)?;
    if w == 0 || t > s.len() || s.missing[lo..t].iter().any(|m| *m) {
        return None;
    }
    Some(&s.values[lo..t])
}

/// Mean of `s` over `[t - w, t - 1]`, requiring every hour observed.
pub fn rolling_mean_at(s: &Masked, t: usize, w: usize) -> Option<f64> {
    window(s, t, w).map(|xs| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Population standard deviation over `[t - w, t - 1]`.
pub fn rolling_std_at(s: &Masked, t: usize, w: usize) -> Option<f64> {
    window(s, t, w).map(|xs| {
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        libm::sqrt(xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64)
    })
}

/// Column `s[t - k]`; a zero lag would expose the current hour.
pub fn lag(s: &Masked, k: usize) -> Result<Vec<Option<f64>>> {
    if k == 0 {
        return Err(Error::ZeroLag);
    }
    Ok((0..s.len()).map(|t| lag_at(s, t, k)).collect())
}

/// Trailing mean and population standard deviation columns over `w >= 2` hours.
pub fn rolling_stats(s: &Masked, w: usize) -> Result<(Vec<Option<f64>>, Vec<Option<f64>>)> {
    if w < 2 {
        return Err(Error::InvalidInput(alloc::format!(
            "rolling window must span at least 2 hours, got {w}"
        )));
    }
    Ok((
        (0..s.len()).map(|t| rolling_mean_at(s, t, w)).collect(),
        (0..s.len()).map(|t| rolling_std_at(s, t, w)).collect(),
    ))
}

/// Whether `s[t - 1]` exceeds `threshold`.
pub fn active_at(s: &Masked, t: usize, threshold: f64) -> Option<bool> {
    lag_at(s, t, 1).map(|v| v > threshold)
}

#[derive(Debug, Clone, PartialEq)]
struct Day {
    complete: bool,
    total: f64,
    median: f64,
    peak_hour: f64,
}

/// Per local-day summaries of one series, for previous-day features.
#[derive(Debug, Clone)]
pub struct DailyStats {
    days: BTreeMap<NaiveDate, Day>,
    /// Local date of each hour index.
    dates: Vec<NaiveDate>,
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

impl DailyStats {
    /// A local day is complete when the frame covers it from local hour 0
    /// through 23 with every hour observed.
    pub fn new(s: &Masked, start_hour: i64, zone: &Zone) -> Self {
        let locals: Vec<_> = (0..s.len())
            .map(|i| zone.local(start_hour + i as i64))
            .collect();
        let dates: Vec<NaiveDate> = locals.iter().map(|l| l.date).collect();
        let mut days = BTreeMap::new();
        let mut i = 0;
        while i < s.len() {
            let mut j = i;
            while j + 1 < s.len() && dates[j + 1] == dates[i] {
                j += 1;
            }
            let complete =
                locals[i].hour == 0 && locals[j].hour == 23 && s.missing[i..=j].iter().all(|m| !m);
            let day = if complete {
                let vals = &s.values[i..=j];
                let mut peak = i;
                for k in i..=j {
                    if s.values[k] > s.values[peak] {
                        peak = k;
                    }
                }
                Day {
                    complete,
                    total: vals.iter().sum(),
                    median: median(&mut vals.to_vec()),
                    peak_hour: locals[peak].hour as f64,
                }
            } else {
                Day {
                    complete,
                    total: 0.0,
                    median: 0.0,
                    peak_hour: 0.0,
                }
            };
            days.insert(dates[i], day);
            i = j + 1;
        }
        DailyStats { days, dates }
    }

    fn complete_day(&self, date: NaiveDate) -> Option<&Day> {
        self.days.get(&date).filter(|d| d.complete)
    }

    /// Statistic of the local day before the one containing hour `t`.
    pub fn yesterday(&self, t: usize, stat: YesterdayStat) -> Option<f64> {
        let today = *self.dates.get(t)?;
        let yesterday = today.checked_sub_days(Days::new(1))?;
        let day = self.complete_day(yesterday)?;
        match stat {
            YesterdayStat::Median => Some(day.median),
            YesterdayStat::PeakHour => Some(day.peak_hour),
            YesterdayStat::Ratio => {
                let mut sum = 0.0;
                for k in 1..=7 {
                    sum += self
                        .complete_day(yesterday.checked_sub_days(Days::new(k))?)?
                        .total;
                }
                let mean = sum / 7.0;
                (mean > 0.0).then(|| day.total / mean)
            }
        }
    }
}
