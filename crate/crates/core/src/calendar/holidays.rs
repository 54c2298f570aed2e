use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};

use chrono::{Datelike, Days, NaiveDate};

use crate::{Error, Result};

const CANADA_BC: &str = include_str!("holidays/canada-bc.txt");
const FRANCE: &str = include_str!("holidays/france.txt");
const ENGLAND: &str = include_str!("holidays/england.txt");

pub const REGIONS: [&str; 4] = ["canada-bc", "france", "england", "none"];

/// Public holidays of one region over the years its table covers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HolidayCalendar {
    region: String,
    dates: BTreeSet<NaiveDate>,
    /// Inclusive year range, `None` for the empty calendar.
    coverage: Option<(i32, i32)>,
}

impl HolidayCalendar {
    pub fn for_region(region: &str) -> Result<Self> {
        let text = match region {
            "canada-bc" => CANADA_BC,
            "france" => FRANCE,
            "england" => ENGLAND,
            "none" | "" => return Ok(Self::none()),
            other => return Err(Error::UnknownRegion(other.to_string())),
        };
        let mut dates = BTreeSet::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let day = line.split_whitespace().next().unwrap_or_default();
            let date = NaiveDate::parse_from_str(day, "%Y-%m-%d")
                .map_err(|_| Error::Parse(alloc::format!("holiday table {region}: `{line}`")))?;
            dates.insert(date);
        }
        let first = dates.first().map(|d| d.year()).unwrap_or(0);
        let last = dates.last().map(|d| d.year()).unwrap_or(0);
        Ok(HolidayCalendar {
            region: region.to_string(),
            dates,
            coverage: Some((first, last)),
        })
    }

    /// Calendar without holidays, valid for any year.
    pub fn none() -> Self {
        HolidayCalendar {
            region: "none".to_string(),
            dates: BTreeSet::new(),
            coverage: None,
        }
    }

    pub fn region(&self) -> &str {
        &self.region
    }

    pub fn coverage(&self) -> Option<(i32, i32)> {
        self.coverage
    }

    pub fn is_holiday(&self, date: NaiveDate) -> Result<bool> {
        if let Some((first, last)) = self.coverage {
            let year = date.year();
            if year < first || year > last {
                return Err(Error::CalendarCoverage {
                    region: self.region.clone(),
                    first,
                    last,
                    year,
                });
            }
        }
        Ok(self.dates.contains(&date))
    }

    /// Adjacent to a holiday without being one. Neighbours outside the
    /// covered years count as ordinary days.
    pub fn is_near_holiday(&self, date: NaiveDate) -> Result<bool> {
        if self.is_holiday(date)? {
            return Ok(false);
        }
        let before = date.checked_sub_days(Days::new(1));
        let after = date.checked_add_days(Days::new(1));
        Ok([before, after]
            .into_iter()
            .flatten()
            .any(|d| self.dates.contains(&d)))
    }
}
