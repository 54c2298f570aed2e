//! Feature vocabulary: groups, descriptors and the taxonomy they hang off.
//!
//! Every column the pipeline produces is described by a [`FeatureDescriptor`]
//! carrying its taxonomy group, unit, provenance, leakage horizon and the
//! [`FeatureSource`] recipe that computes it. Descriptors are plain data and
//! serialize to JSON unchanged.

mod inventory;
mod taxonomy;

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

pub use inventory::{
    dataset_descriptor, group_counts, inventory, unproduced_descriptors, DatasetDescriptor,
    DatasetId, ACTIVE_THRESHOLD_KWH, PART_OF_DAY_LEVELS, REFIT_ACTIVITY_TAGS, SEASON_LEVELS,
};
pub use taxonomy::{group_of_path, Taxonomy, TaxonomyNode};

/// First-level split of the taxonomy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureGroup {
    Domain,
    Contextual,
    Behavioral,
}

impl FeatureGroup {
    pub const ALL: [FeatureGroup; 3] = [Self::Domain, Self::Contextual, Self::Behavioral];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Domain => "domain",
            Self::Contextual => "contextual",
            Self::Behavioral => "behavioral",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for FeatureGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for FeatureGroup {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "domain" | "d" => Ok(Self::Domain),
            "contextual" | "c" => Ok(Self::Contextual),
            "behavioral" | "behavioural" | "b" => Ok(Self::Behavioral),
            other => Err(crate::Error::Parse(alloc::format!(
                "unknown feature group `{other}`"
            ))),
        }
    }
}

/// A set of feature groups, e.g. one row of the ablation grid.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupSet(u8);

impl GroupSet {
    pub const EMPTY: GroupSet = GroupSet(0);
    pub const ALL: GroupSet = GroupSet(0b111);

    pub fn of(groups: &[FeatureGroup]) -> Self {
        groups.iter().fold(Self::EMPTY, |s, g| s.with(*g))
    }

    pub fn with(self, group: FeatureGroup) -> Self {
        GroupSet(self.0 | (1 << group.index()))
    }

    pub fn contains(self, group: FeatureGroup) -> bool {
        self.0 & (1 << group.index()) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: GroupSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = FeatureGroup> {
        FeatureGroup::ALL
            .into_iter()
            .filter(move |g| self.contains(*g))
    }

    /// Parse a comma-separated list such as `domain,contextual`.
    pub fn parse(list: &str) -> crate::Result<Self> {
        let mut set = Self::EMPTY;
        for part in list.split(',').filter(|p| !p.trim().is_empty()) {
            set = set.with(part.parse()?);
        }
        Ok(set)
    }
}

impl fmt::Display for GroupSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for g in self.iter() {
            if !first {
                f.write_str(",")?;
            }
            first = false;
            f.write_str(g.as_str())?;
        }
        Ok(())
    }
}

impl Serialize for GroupSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for GroupSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let groups = Vec::<FeatureGroup>::deserialize(d)?;
        Ok(GroupSet::of(&groups))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dtype {
    Numeric,
    Boolean,
    Categorical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// A raw channel of the dataset, used as-is (one hour old).
    Measured,
    /// Derived from measured channels or timestamps.
    Engineered,
    /// Static per-household metadata.
    Metadata,
}

/// An hourly series a feature reads from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Series {
    /// Household consumption in kWh.
    Target,
    /// Auxiliary channel by name.
    Channel { name: String },
    /// Sum of every channel carrying the tag (e.g. `kitchen`).
    Tagged { tag: String },
    /// Pointwise `num / den`; missing when `den <= 0`.
    Ratio { num: Box<Series>, den: Box<Series> },
    /// Pointwise `sqrt(a^2 + b^2)`.
    Hypot { a: Box<Series>, b: Box<Series> },
}

impl Series {
    pub fn channel(name: &str) -> Self {
        Series::Channel {
            name: name.to_string(),
        }
    }

    pub fn tagged(tag: &str) -> Self {
        Series::Tagged {
            tag: tag.to_string(),
        }
    }

    pub fn ratio(num: Series, den: Series) -> Self {
        Series::Ratio {
            num: Box::new(num),
            den: Box::new(den),
        }
    }

    pub fn hypot(a: Series, b: Series) -> Self {
        Series::Hypot {
            a: Box::new(a),
            b: Box::new(b),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalendarField {
    /// Hours since the Unix epoch.
    Timestamp,
    /// Local UTC offset in hours.
    TimezoneOffset,
    Dst,
    HourOfDay,
    /// Categorical: night, morning, afternoon, evening.
    PartOfDay,
    /// 0 = Monday.
    DayOfWeek,
    DayOfMonth,
    /// ISO week number.
    WeekOfYear,
    Month,
    DayOfYear,
    /// Categorical meteorological season.
    Season,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolarField {
    Altitude,
    Azimuth,
    ClearSkyRadiation,
    DaylightHours,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActivityFlag {
    Breakfast,
    Lunch,
    Dinner,
    Work,
    FreeTime,
    Sleep,
    Weekday,
    Weekend,
    Holiday,
    /// Day before or after a holiday that is not itself a holiday.
    NearHoliday,
    /// Weekday that is not a holiday.
    Workday,
    /// Weekend or holiday.
    DayOff,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum YesterdayStat {
    Median,
    /// Yesterday's total over the mean daily total of the seven days before.
    Ratio,
    /// Local hour of yesterday's largest value.
    PeakHour,
}

/// Recipe computing a descriptor's column for a matrix row at hour `t`.
///
/// Sources that read series only look at hours `<= t - 1`. Deterministic
/// sources (calendar, solar, schedule, static metadata) describe the
/// forecast hour `t + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeatureSource {
    /// `series[t - hours]`.
    Lag {
        series: Series,
        hours: u32,
    },
    /// Mean over `[t - window, t - 1]`.
    RollingMean {
        series: Series,
        window: u32,
    },
    /// Population standard deviation over `[t - window, t - 1]`.
    RollingStd {
        series: Series,
        window: u32,
    },
    /// Statistic of the previous local calendar day.
    Yesterday {
        series: Series,
        stat: YesterdayStat,
    },
    /// `series[t - 1] > threshold_kwh`.
    Active {
        series: Series,
        threshold_kwh: f64,
    },
    Calendar {
        field: CalendarField,
    },
    Solar {
        field: SolarField,
    },
    Activity {
        flag: ActivityFlag,
    },
    /// Per-household metadata value.
    Static {
        key: String,
    },
    /// Catalogued but not produced by any adapter.
    Unavailable,
}

impl FeatureSource {
    /// Minimum age in hours of the series data this source reads, or `None`
    /// when it reads no time-varying measurements.
    pub fn min_data_age(&self) -> Option<u32> {
        match self {
            Self::Lag { hours, .. } => Some(*hours),
            Self::RollingMean { .. }
            | Self::RollingStd { .. }
            | Self::Yesterday { .. }
            | Self::Active { .. } => Some(1),
            _ => None,
        }
    }

    /// Longest look-back in hours, used for the warm-up prefix.
    pub fn lookback(&self) -> u32 {
        match self {
            Self::Lag { hours, .. } => *hours,
            Self::RollingMean { window, .. } | Self::RollingStd { window, .. } => *window,
            Self::Yesterday { .. } => 8 * 24,
            Self::Active { .. } => 1,
            _ => 0,
        }
    }

    pub fn reads_series(&self) -> bool {
        self.min_data_age().is_some()
    }
}

/// A named, group-tagged column definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureDescriptor {
    pub name: String,
    pub group: FeatureGroup,
    pub taxonomy_path: String,
    pub dtype: Dtype,
    /// Levels of a categorical descriptor, one one-hot column each. Static
    /// categoricals may leave this empty until levels are resolved from data.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub levels: Vec<String>,
    pub unit: String,
    pub provenance: Provenance,
    pub leakage_horizon_hours: u32,
    /// Derived from submeter or appliance channels.
    #[serde(default)]
    pub submeter: bool,
    pub source: FeatureSource,
}

pub const UNITS: &[&str] = &[
    "kWh",
    "kVArh",
    "kVAh",
    "V",
    "A",
    "°",
    "°C",
    "%",
    "hPa",
    "W/m²",
    "h",
    "year",
    "dimensionless",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    EmptyName,
    UnknownPath(String),
    GroupPathMismatch {
        group: FeatureGroup,
        path: String,
    },
    BadUnit(String),
    /// Reads consumption data but declares a zero leakage horizon.
    LeakageRule,
    /// Declares a horizon longer than the data the source actually reads.
    HorizonExceedsSource {
        declared: u32,
        available: u32,
    },
    MissingLevels,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::EmptyName => f.write_str("empty name"),
            Self::UnknownPath(p) => write!(f, "unknown taxonomy path `{p}`"),
            Self::GroupPathMismatch { group, path } => {
                write!(f, "group/path mismatch: group {group}, path `{path}`")
            }
            Self::BadUnit(u) => write!(f, "bad unit `{u}`"),
            Self::LeakageRule => {
                f.write_str("leakage rule: consumption-derived feature with horizon 0")
            }
            Self::HorizonExceedsSource {
                declared,
                available,
            } => {
                write!(
                    f,
                    "declared horizon {declared} h exceeds source age {available} h"
                )
            }
            Self::MissingLevels => f.write_str("categorical calendar feature without levels"),
        }
    }
}

/// Check a descriptor against the embedded taxonomy.
pub fn validate_descriptor(d: &FeatureDescriptor) -> Vec<Violation> {
    validate_descriptor_with(&Taxonomy::embedded(), d)
}

/// Every violated invariant; empty when the descriptor is consistent.
pub fn validate_descriptor_with(tax: &Taxonomy, d: &FeatureDescriptor) -> Vec<Violation> {
    let mut out = Vec::new();
    if d.name.trim().is_empty() {
        out.push(Violation::EmptyName);
    }
    if tax.lookup(&d.taxonomy_path).is_none() || d.taxonomy_path.is_empty() {
        out.push(Violation::UnknownPath(d.taxonomy_path.clone()));
    }
    if group_of_path(&d.taxonomy_path) != Some(d.group) {
        out.push(Violation::GroupPathMismatch {
            group: d.group,
            path: d.taxonomy_path.clone(),
        });
    }
    if !UNITS.contains(&d.unit.as_str()) {
        out.push(Violation::BadUnit(d.unit.clone()));
    }
    let consumption_derived = d.source.reads_series()
        || (d.taxonomy_path.starts_with("domain/household")
            && d.provenance != Provenance::Metadata);
    if consumption_derived && d.provenance != Provenance::Metadata && d.leakage_horizon_hours == 0 {
        out.push(Violation::LeakageRule);
    }
    if let Some(available) = d.source.min_data_age() {
        if d.leakage_horizon_hours > available {
            out.push(Violation::HorizonExceedsSource {
                declared: d.leakage_horizon_hours,
                available,
            });
        }
    }
    if d.dtype == Dtype::Categorical
        && d.levels.is_empty()
        && matches!(d.source, FeatureSource::Calendar { .. })
    {
        out.push(Violation::MissingLevels);
    }
    out
}

/// Descriptors whose group is in `combo`, optionally without submeter-derived
/// ones. Input order is preserved.
pub fn select_features(
    all: &[FeatureDescriptor],
    combo: GroupSet,
    include_submeter: bool,
) -> crate::Result<Vec<FeatureDescriptor>> {
    if combo.is_empty() {
        return Err(crate::Error::InvalidInput(
            "empty feature-group combination".to_string(),
        ));
    }
    let out: Vec<_> = all
        .iter()
        .filter(|d| combo.contains(d.group) && (include_submeter || !d.submeter))
        .cloned()
        .collect();
    if out.is_empty() {
        return Err(crate::Error::EmptySelection);
    }
    Ok(out)
}

/// The raw-data selection: measured domain channels only, one hour old.
pub fn select_raw_only(all: &[FeatureDescriptor]) -> crate::Result<Vec<FeatureDescriptor>> {
    let out: Vec<_> = all
        .iter()
        .filter(|d| d.group == FeatureGroup::Domain && d.provenance == Provenance::Measured)
        .cloned()
        .collect();
    if out.is_empty() {
        return Err(crate::Error::EmptySelection);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lag24() -> FeatureDescriptor {
        FeatureDescriptor {
            name: "lag24".into(),
            group: FeatureGroup::Domain,
            taxonomy_path: "domain/household/energy".into(),
            dtype: Dtype::Numeric,
            levels: Vec::new(),
            unit: "kWh".into(),
            provenance: Provenance::Engineered,
            leakage_horizon_hours: 24,
            submeter: false,
            source: FeatureSource::Lag {
                series: Series::Target,
                hours: 24,
            },
        }
    }

    #[test]
    fn consistent_descriptor_is_ok() {
        assert!(validate_descriptor(&lag24()).is_empty());
    }

    #[test]
    fn group_path_mismatch() {
        let d = FeatureDescriptor {
            taxonomy_path: "contextual/weather/temperature".into(),
            ..lag24()
        };
        let v = validate_descriptor(&d);
        assert!(
            v.iter()
                .any(|v| matches!(v, Violation::GroupPathMismatch { .. })),
            "{v:?}"
        );
    }

    #[test]
    fn rolling_mean_with_zero_horizon_breaks_leakage_rule() {
        let d = FeatureDescriptor {
            name: "rolling_mean".into(),
            leakage_horizon_hours: 0,
            source: FeatureSource::RollingMean {
                series: Series::Target,
                window: 24,
            },
            ..lag24()
        };
        assert_eq!(validate_descriptor(&d), [Violation::LeakageRule]);
    }

    #[test]
    fn bad_unit_and_unknown_path() {
        let d = FeatureDescriptor {
            unit: "furlongs".into(),
            taxonomy_path: "domain/teleportation".into(),
            ..lag24()
        };
        let v = validate_descriptor(&d);
        assert!(v.contains(&Violation::BadUnit("furlongs".into())));
        assert!(v.contains(&Violation::UnknownPath("domain/teleportation".into())));
    }

    #[test]
    fn horizon_cannot_exceed_source_age() {
        let d = FeatureDescriptor {
            leakage_horizon_hours: 30,
            ..lag24()
        };
        assert_eq!(
            validate_descriptor(&d),
            [Violation::HorizonExceedsSource {
                declared: 30,
                available: 24
            }]
        );
    }

    #[test]
    fn group_set_parse_and_display() {
        let s = GroupSet::parse("domain, contextual").unwrap();
        assert_eq!(s.to_string(), "domain,contextual");
        assert!(GroupSet::of(&[FeatureGroup::Domain]).is_subset(s));
        assert!(!GroupSet::ALL.is_subset(s));
        assert!(GroupSet::parse("domain,teleport").is_err());
    }

    #[test]
    fn empty_combo_is_rejected() {
        assert!(select_features(&[lag24()], GroupSet::EMPTY, true).is_err());
        assert_eq!(
            select_features(&[lag24()], GroupSet::of(&[FeatureGroup::Behavioral]), true),
            Err(crate::Error::EmptySelection)
        );
    }
}
