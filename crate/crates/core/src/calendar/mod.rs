//! Local civil time, calendar fields, daily schedules and holidays.

mod holidays;

use alloc::string::{String, ToString};

use chrono::{DateTime, Datelike, NaiveDate, Offset, TimeZone, Timelike};
use chrono_tz::{OffsetComponents, Tz};
use serde::{Deserialize, Serialize};

use crate::schema::{ActivityFlag, CalendarField, PART_OF_DAY_LEVELS, SEASON_LEVELS};
use crate::{Error, Result};

pub use holidays::{HolidayCalendar, REGIONS};

/// An IANA timezone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Zone(Tz);

impl Zone {
    pub fn parse(name: &str) -> Result<Self> {
        name.parse::<Tz>()
            .map(Zone)
            .map_err(|_| Error::InvalidZone(name.to_string()))
    }

    pub fn utc() -> Self {
        Zone(Tz::UTC)
    }

    pub fn name(&self) -> &'static str {
        self.0.name()
    }

    /// Local view of the UTC epoch hour `hour`.
    pub fn local(&self, hour: i64) -> LocalTime {
        let utc = DateTime::from_timestamp(hour * 3600, 0).expect("hour within chrono range");
        let t = utc.with_timezone(&self.0);
        let offset = t.offset();
        LocalTime {
            date: t.date_naive(),
            hour: t.hour(),
            offset_seconds: offset.fix().local_minus_utc(),
            dst: offset.dst_offset().num_seconds() != 0,
        }
    }

    /// UTC epoch hour of local midnight starting `date`, if it exists.
    pub fn midnight(&self, date: NaiveDate) -> Option<i64> {
        let naive = date.and_hms_opt(0, 0, 0)?;
        let t = self.0.from_local_datetime(&naive).earliest()?;
        Some(t.timestamp().div_euclid(3600))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalTime {
    pub date: NaiveDate,
    pub hour: u32,
    pub offset_seconds: i32,
    pub dst: bool,
}

impl LocalTime {
    /// 0 = Monday.
    pub fn weekday(&self) -> u32 {
        self.date.weekday().num_days_from_monday()
    }

    pub fn is_weekend(&self) -> bool {
        self.weekday() >= 5
    }
}

/// Value of a calendar field: numeric or one level of a categorical.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldValue {
    Number(f64),
    Level(&'static str),
}

pub fn part_of_day(hour: u32) -> &'static str {
    PART_OF_DAY_LEVELS[(hour / 6) as usize % 4]
}

/// Meteorological season, mirrored south of the equator.
pub fn season(month: u32, latitude: f64) -> &'static str {
    let north = (month % 12) / 3;
    let idx = if latitude < 0.0 {
        (north + 2) % 4
    } else {
        north
    };
    SEASON_LEVELS[idx as usize]
}

pub fn calendar_field(
    field: CalendarField,
    hour: i64,
    local: &LocalTime,
    latitude: f64,
) -> FieldValue {
    use FieldValue::Number;
    let b = |x: bool| Number(if x { 1.0 } else { 0.0 });
    match field {
        CalendarField::Timestamp => Number(hour as f64),
        CalendarField::TimezoneOffset => Number(local.offset_seconds as f64 / 3600.0),
        CalendarField::Dst => b(local.dst),
        CalendarField::HourOfDay => Number(local.hour as f64),
        CalendarField::PartOfDay => FieldValue::Level(part_of_day(local.hour)),
        CalendarField::DayOfWeek => Number(local.weekday() as f64),
        CalendarField::DayOfMonth => Number(local.date.day() as f64),
        CalendarField::WeekOfYear => Number(local.date.iso_week().week() as f64),
        CalendarField::Month => Number(local.date.month() as f64),
        CalendarField::DayOfYear => Number(local.date.ordinal() as f64),
        CalendarField::Season => FieldValue::Level(season(local.date.month(), latitude)),
    }
}

/// Half-open local-hour window `[start, end)`; wraps past midnight when
/// `start > end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Window {
    pub start: u32,
    pub end: u32,
}

impl Window {
    pub const fn new(start: u32, end: u32) -> Self {
        Window { start, end }
    }

    pub fn contains(&self, hour: u32) -> bool {
        if self.start <= self.end {
            self.start <= hour && hour < self.end
        } else {
            hour >= self.start || hour < self.end
        }
    }
}

/// Local-hour windows of routine activities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScheduleTable {
    pub breakfast: Window,
    pub lunch: Window,
    pub dinner: Window,
    pub work: Window,
    pub free_time: Window,
    pub sleep: Window,
}

impl Default for ScheduleTable {
    fn default() -> Self {
        ScheduleTable {
            breakfast: Window::new(6, 9),
            lunch: Window::new(11, 15),
            dinner: Window::new(18, 21),
            work: Window::new(9, 17),
            free_time: Window::new(17, 22),
            sleep: Window::new(22, 7),
        }
    }
}

impl ScheduleTable {
    pub fn validate(&self) -> Result<()> {
        for w in [
            self.breakfast,
            self.lunch,
            self.dinner,
            self.work,
            self.free_time,
            self.sleep,
        ] {
            if w.start > 23 || w.end > 24 || w.start == w.end {
                return Err(Error::InvalidInput(alloc::format!(
                    "bad schedule window {}..{}",
                    w.start,
                    w.end
                )));
            }
        }
        Ok(())
    }
}

/// Calendar context shared by every row of a household.
#[derive(Debug, Clone)]
pub struct CalendarContext {
    pub zone: Zone,
    pub holidays: HolidayCalendar,
    pub schedule: ScheduleTable,
    pub latitude: f64,
    pub longitude: f64,
}

impl CalendarContext {
    pub fn new(timezone: &str, region: &str, latitude: f64, longitude: f64) -> Result<Self> {
        Ok(CalendarContext {
            zone: Zone::parse(timezone)?,
            holidays: HolidayCalendar::for_region(region)?,
            schedule: ScheduleTable::default(),
            latitude,
            longitude,
        })
    }

    pub fn region(&self) -> String {
        self.holidays.region().to_string()
    }

    pub fn activity(&self, flag: ActivityFlag, local: &LocalTime) -> Result<bool> {
        let s = &self.schedule;
        let weekend = local.is_weekend();
        Ok(match flag {
            ActivityFlag::Breakfast => s.breakfast.contains(local.hour),
            ActivityFlag::Lunch => s.lunch.contains(local.hour),
            ActivityFlag::Dinner => s.dinner.contains(local.hour),
            ActivityFlag::Work => s.work.contains(local.hour),
            ActivityFlag::FreeTime => s.free_time.contains(local.hour),
            ActivityFlag::Sleep => s.sleep.contains(local.hour),
            ActivityFlag::Weekday => !weekend,
            ActivityFlag::Weekend => weekend,
            ActivityFlag::Holiday => self.holidays.is_holiday(local.date)?,
            ActivityFlag::NearHoliday => self.holidays.is_near_holiday(local.date)?,
            ActivityFlag::Workday => !weekend && !self.holidays.is_holiday(local.date)?,
            ActivityFlag::DayOff => weekend || self.holidays.is_holiday(local.date)?,
        })
    }
}
