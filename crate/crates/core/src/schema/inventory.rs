//! Dataset descriptors and the feature inventory engineered for each dataset.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use super::{
    group_of_path, ActivityFlag, CalendarField, Dtype, FeatureDescriptor, FeatureSource,
    Provenance, Series, SolarField, YesterdayStat,
};

/// Threshold above which an appliance channel counts as active in an hour.
pub const ACTIVE_THRESHOLD_KWH: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetId {
    Hue,
    Uci,
    Refit,
    Synthetic,
}

impl DatasetId {
    pub const ALL: [DatasetId; 4] = [Self::Hue, Self::Uci, Self::Refit, Self::Synthetic];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Hue => "hue",
            Self::Uci => "uci",
            Self::Refit => "refit",
            Self::Synthetic => "synthetic",
        }
    }
}

impl fmt::Display for DatasetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for DatasetId {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hue" => Ok(Self::Hue),
            "uci" => Ok(Self::Uci),
            "refit" => Ok(Self::Refit),
            "synthetic" | "synth" => Ok(Self::Synthetic),
            other => Err(crate::Error::Parse(alloc::format!(
                "unknown dataset `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetDescriptor {
    pub id: DatasetId,
    pub household_ids: Vec<String>,
    pub native_interval_seconds: u32,
    pub timezone: String,
    pub latitude: f64,
    pub longitude: f64,
    /// Holiday calendar region.
    pub region: String,
    pub has_submeters: bool,
}

impl DatasetDescriptor {
    pub fn validate(&self) -> crate::Result<()> {
        let expected = match self.id {
            DatasetId::Refit => Some(8),
            DatasetId::Uci => Some(60),
            DatasetId::Hue => Some(3600),
            DatasetId::Synthetic => None,
        };
        if let Some(e) = expected {
            if self.native_interval_seconds != e {
                return Err(crate::Error::InvalidInput(alloc::format!(
                    "{} native interval must be {e} s, got {}",
                    self.id,
                    self.native_interval_seconds
                )));
            }
        }
        if self.native_interval_seconds == 0 {
            return Err(crate::Error::InvalidInput(
                "native interval must be positive".into(),
            ));
        }
        if !(-90.0..=90.0).contains(&self.latitude) || !(-180.0..=180.0).contains(&self.longitude) {
            return Err(crate::Error::InvalidInput(
                "coordinates out of range".into(),
            ));
        }
        Ok(())
    }
}

/// Default descriptor for a dataset; household ids are filled by the loader.
pub fn dataset_descriptor(id: DatasetId) -> DatasetDescriptor {
    let (interval, zone, lat, lon, region, submeters) = match id {
        DatasetId::Hue => (
            3600,
            "America/Vancouver",
            49.25,
            -123.10,
            "canada-bc",
            false,
        ),
        DatasetId::Uci => (60, "Europe/Paris", 48.78, 2.29, "france", true),
        DatasetId::Refit => (8, "Europe/London", 52.77, -1.20, "england", true),
        DatasetId::Synthetic => (3600, "UTC", 48.85, 2.35, "none", true),
    };
    DatasetDescriptor {
        id,
        household_ids: Vec::new(),
        native_interval_seconds: interval,
        timezone: zone.to_string(),
        latitude: lat,
        longitude: lon,
        region: region.to_string(),
        has_submeters: submeters,
    }
}

fn desc(
    name: &str,
    path: &str,
    dtype: Dtype,
    unit: &str,
    provenance: Provenance,
    horizon: u32,
    source: FeatureSource,
) -> FeatureDescriptor {
    FeatureDescriptor {
        name: name.to_string(),
        group: group_of_path(path).expect("inventory paths start with a group"),
        taxonomy_path: path.to_string(),
        dtype,
        levels: Vec::new(),
        unit: unit.to_string(),
        provenance,
        leakage_horizon_hours: horizon,
        submeter: false,
        source,
    }
}

fn submeter(mut d: FeatureDescriptor) -> FeatureDescriptor {
    d.submeter = true;
    d
}

fn levels(mut d: FeatureDescriptor, levels: &[&str]) -> FeatureDescriptor {
    d.levels = levels.iter().map(|l| l.to_string()).collect();
    d
}

fn lag(
    name: &str,
    path: &str,
    unit: &str,
    series: &Series,
    hours: u32,
    raw: bool,
) -> FeatureDescriptor {
    let prov = if raw && hours == 1 {
        Provenance::Measured
    } else {
        Provenance::Engineered
    };
    desc(
        name,
        path,
        Dtype::Numeric,
        unit,
        prov,
        hours,
        FeatureSource::Lag {
            series: series.clone(),
            hours,
        },
    )
}

fn rolling_mean(
    name: &str,
    path: &str,
    unit: &str,
    series: &Series,
    window: u32,
) -> FeatureDescriptor {
    desc(
        name,
        path,
        Dtype::Numeric,
        unit,
        Provenance::Engineered,
        1,
        FeatureSource::RollingMean {
            series: series.clone(),
            window,
        },
    )
}

fn rolling_std(
    name: &str,
    path: &str,
    unit: &str,
    series: &Series,
    window: u32,
) -> FeatureDescriptor {
    desc(
        name,
        path,
        Dtype::Numeric,
        unit,
        Provenance::Engineered,
        1,
        FeatureSource::RollingStd {
            series: series.clone(),
            window,
        },
    )
}

/// Lags 1/23/24/168 h plus 24 h rolling mean and std and a weekly rolling mean.
fn consumption_family(
    prefix: &str,
    path: &str,
    unit: &str,
    series: Series,
    raw: bool,
) -> Vec<FeatureDescriptor> {
    let n = |s: &str| alloc::format!("{prefix}_{s}");
    alloc::vec![
        lag(&n("lag_1"), path, unit, &series, 1, raw),
        lag(&n("lag_23"), path, unit, &series, 23, raw),
        lag(&n("lag_24"), path, unit, &series, 24, raw),
        lag(&n("lag_168"), path, unit, &series, 168, raw),
        rolling_mean(&n("rolling_mean_24"), path, unit, &series, 24),
        rolling_std(&n("rolling_std_24"), path, unit, &series, 24),
        rolling_mean(&n("rolling_mean_168"), path, unit, &series, 168),
    ]
}

/// Auxiliary electrical channel: last hour, same hour yesterday, 24 h mean and std.
fn aux_family(prefix: &str, path: &str, unit: &str, series: Series) -> Vec<FeatureDescriptor> {
    let n = |s: &str| alloc::format!("{prefix}_{s}");
    alloc::vec![
        lag(&n("lag_1"), path, unit, &series, 1, true),
        lag(&n("lag_24"), path, unit, &series, 24, true),
        rolling_mean(&n("rolling_mean_24"), path, unit, &series, 24),
        rolling_std(&n("rolling_std_24"), path, unit, &series, 24),
    ]
}

fn calendar(
    name: &str,
    path: &str,
    dtype: Dtype,
    unit: &str,
    field: CalendarField,
) -> FeatureDescriptor {
    desc(
        name,
        path,
        dtype,
        unit,
        Provenance::Engineered,
        0,
        FeatureSource::Calendar { field },
    )
}

fn solar(name: &str, path: &str, unit: &str, field: SolarField) -> FeatureDescriptor {
    desc(
        name,
        path,
        Dtype::Numeric,
        unit,
        Provenance::Engineered,
        0,
        FeatureSource::Solar { field },
    )
}

fn flag(name: &str, path: &str, flag: ActivityFlag) -> FeatureDescriptor {
    desc(
        name,
        path,
        Dtype::Boolean,
        "dimensionless",
        Provenance::Engineered,
        0,
        FeatureSource::Activity { flag },
    )
}

fn meta(name: &str, path: &str, dtype: Dtype, unit: &str) -> FeatureDescriptor {
    desc(
        name,
        path,
        dtype,
        unit,
        Provenance::Metadata,
        0,
        FeatureSource::Static {
            key: name.to_string(),
        },
    )
}

fn active(name: &str, path: &str, tag: &str) -> FeatureDescriptor {
    submeter(desc(
        name,
        path,
        Dtype::Boolean,
        "dimensionless",
        Provenance::Engineered,
        1,
        FeatureSource::Active {
            series: Series::tagged(tag),
            threshold_kwh: ACTIVE_THRESHOLD_KWH,
        },
    ))
}

pub const PART_OF_DAY_LEVELS: [&str; 4] = ["night", "morning", "afternoon", "evening"];
pub const SEASON_LEVELS: [&str; 4] = ["winter", "spring", "summer", "autumn"];

fn calendar_core() -> Vec<FeatureDescriptor> {
    alloc::vec![
        calendar(
            "timestamp",
            "contextual/time",
            Dtype::Numeric,
            "h",
            CalendarField::Timestamp
        ),
        calendar(
            "dst",
            "contextual/time",
            Dtype::Boolean,
            "dimensionless",
            CalendarField::Dst
        ),
        calendar(
            "hour_of_day",
            "contextual/time/time_of_day",
            Dtype::Numeric,
            "h",
            CalendarField::HourOfDay
        ),
        levels(
            calendar(
                "part_of_day",
                "contextual/time/time_of_day",
                Dtype::Categorical,
                "dimensionless",
                CalendarField::PartOfDay
            ),
            &PART_OF_DAY_LEVELS,
        ),
        calendar(
            "day_of_week",
            "contextual/time",
            Dtype::Numeric,
            "dimensionless",
            CalendarField::DayOfWeek
        ),
        calendar(
            "week_of_year",
            "contextual/time/seasons",
            Dtype::Numeric,
            "dimensionless",
            CalendarField::WeekOfYear
        ),
    ]
}

fn calendar_extended() -> Vec<FeatureDescriptor> {
    alloc::vec![
        calendar(
            "timezone_offset",
            "contextual/time",
            Dtype::Numeric,
            "h",
            CalendarField::TimezoneOffset
        ),
        calendar(
            "day_of_month",
            "contextual/time/seasons",
            Dtype::Numeric,
            "dimensionless",
            CalendarField::DayOfMonth
        ),
        calendar(
            "month",
            "contextual/time/seasons",
            Dtype::Numeric,
            "dimensionless",
            CalendarField::Month
        ),
        calendar(
            "day_of_year",
            "contextual/time/seasons",
            Dtype::Numeric,
            "dimensionless",
            CalendarField::DayOfYear
        ),
        levels(
            calendar(
                "season",
                "contextual/time/seasons",
                Dtype::Categorical,
                "dimensionless",
                CalendarField::Season
            ),
            &SEASON_LEVELS,
        ),
    ]
}

fn solar_block() -> Vec<FeatureDescriptor> {
    alloc::vec![
        solar(
            "solar_altitude",
            "contextual/weather",
            "°",
            SolarField::Altitude
        ),
        solar(
            "solar_azimuth",
            "contextual/weather",
            "°",
            SolarField::Azimuth
        ),
        solar(
            "solar_radiation",
            "contextual/weather",
            "W/m²",
            SolarField::ClearSkyRadiation
        ),
    ]
}

fn behavioral_core() -> Vec<FeatureDescriptor> {
    let yesterday = |name: &str, unit: &str, stat| {
        desc(
            name,
            "behavioral/work_schedule",
            Dtype::Numeric,
            unit,
            Provenance::Engineered,
            1,
            FeatureSource::Yesterday {
                series: Series::Target,
                stat,
            },
        )
    };
    alloc::vec![
        flag(
            "weekday",
            "behavioral/social_activities/weekday",
            ActivityFlag::Weekday
        ),
        flag(
            "weekend",
            "behavioral/social_activities/weekend",
            ActivityFlag::Weekend
        ),
        flag(
            "holiday",
            "behavioral/social_activities/holidays",
            ActivityFlag::Holiday
        ),
        flag(
            "near_holiday",
            "behavioral/social_activities/near_holidays",
            ActivityFlag::NearHoliday
        ),
        flag(
            "workday",
            "behavioral/social_activities",
            ActivityFlag::Workday
        ),
        flag(
            "day_off",
            "behavioral/social_activities",
            ActivityFlag::DayOff
        ),
        flag("breakfast", "behavioral/cooking", ActivityFlag::Breakfast),
        flag("lunch", "behavioral/cooking", ActivityFlag::Lunch),
        flag("dinner", "behavioral/cooking", ActivityFlag::Dinner),
        flag("work", "behavioral/work_schedule", ActivityFlag::Work),
        flag(
            "free_time",
            "behavioral/work_schedule",
            ActivityFlag::FreeTime
        ),
        flag("sleep", "behavioral/work_schedule", ActivityFlag::Sleep),
        yesterday("yesterday_median", "kWh", YesterdayStat::Median),
        yesterday("yesterday_ratio", "dimensionless", YesterdayStat::Ratio),
    ]
}

fn geolocation(with_country: bool) -> Vec<FeatureDescriptor> {
    let mut out = alloc::vec![
        meta(
            "latitude",
            "contextual/geolocation/latitude",
            Dtype::Numeric,
            "°"
        ),
        meta(
            "longitude",
            "contextual/geolocation/longitude",
            Dtype::Numeric,
            "°"
        ),
        meta(
            "region",
            "contextual/geolocation/region",
            Dtype::Categorical,
            "dimensionless"
        ),
    ];
    if with_country {
        out.push(meta(
            "country",
            "contextual/geolocation/region",
            Dtype::Categorical,
            "dimensionless",
        ));
    }
    out.push(meta(
        "household_id",
        "contextual/geolocation",
        Dtype::Categorical,
        "dimensionless",
    ));
    out
}

fn hue() -> Vec<FeatureDescriptor> {
    let mut out = consumption_family(
        "energy",
        "domain/household/energy",
        "kWh",
        Series::Target,
        true,
    );
    out.push(meta(
        "ev_battery_kwh",
        "domain/ev/capacity",
        Dtype::Numeric,
        "kWh",
    ));

    out.extend(calendar_core());
    out.extend(calendar_extended());
    out.extend(solar_block());
    out.push(solar(
        "daylight_hours",
        "contextual/time/daytime_duration",
        "h",
        SolarField::DaylightHours,
    ));
    out.extend(geolocation(true));
    for (channel, path, unit) in [
        ("temperature", "contextual/weather/temperature", "°C"),
        ("humidity", "contextual/weather/relative_humidity", "%"),
        ("pressure", "contextual/weather/pressure", "hPa"),
        ("cloud_cover", "contextual/weather/cloud_coverage", "%"),
    ] {
        let s = Series::channel(channel);
        out.push(lag(channel, path, unit, &s, 1, true));
        out.push(lag(
            &alloc::format!("{channel}_lag_24"),
            path,
            unit,
            &s,
            24,
            true,
        ));
        out.push(rolling_mean(
            &alloc::format!("{channel}_rolling_mean_24"),
            path,
            unit,
            &s,
            24,
        ));
    }
    out.extend([
        meta(
            "building_type",
            "contextual/building/type",
            Dtype::Categorical,
            "dimensionless",
        ),
        meta(
            "building_orientation",
            "contextual/building/orientation",
            Dtype::Categorical,
            "dimensionless",
        ),
        meta(
            "rental_units",
            "contextual/building",
            Dtype::Numeric,
            "dimensionless",
        ),
    ]);
    for name in [
        "air_conditioning",
        "gas_furnace",
        "heat_pump",
        "gas_fireplace",
        "electric_fireplace",
        "in_floor_heating",
        "portable_ac",
        "cast_iron_radiators",
        "geothermal_heating",
    ] {
        out.push(meta(
            name,
            "contextual/building",
            Dtype::Boolean,
            "dimensionless",
        ));
    }

    out.extend(behavioral_core());
    out.push(desc(
        "yesterday_peak_hour",
        "behavioral/work_schedule",
        Dtype::Numeric,
        "h",
        Provenance::Engineered,
        1,
        FeatureSource::Yesterday {
            series: Series::Target,
            stat: YesterdayStat::PeakHour,
        },
    ));
    out
}

fn uci() -> Vec<FeatureDescriptor> {
    let mut out = consumption_family(
        "energy",
        "domain/household/active_power",
        "kWh",
        Series::Target,
        true,
    );
    out.extend(aux_family(
        "reactive_power",
        "domain/household/reactive_power",
        "kVArh",
        Series::channel("reactive_power"),
    ));
    out.extend(aux_family(
        "voltage",
        "domain/household/voltage",
        "V",
        Series::channel("voltage"),
    ));
    out.extend(aux_family(
        "intensity",
        "domain/household/current",
        "A",
        Series::channel("intensity"),
    ));
    let apparent = Series::hypot(Series::Target, Series::channel("reactive_power"));
    out.push(lag(
        "apparent_power_lag_1",
        "domain/household/apparent_power",
        "kVAh",
        &apparent,
        1,
        false,
    ));
    out.push(lag(
        "power_factor_lag_1",
        "domain/household/phase",
        "dimensionless",
        &Series::ratio(Series::Target, apparent.clone()),
        1,
        false,
    ));
    for i in 1..=3 {
        let name = alloc::format!("submeter_{i}");
        let channel = Series::channel(&name);
        out.extend(
            consumption_family(
                &name,
                "domain/household/appliances",
                "kWh",
                channel.clone(),
                true,
            )
            .into_iter()
            .map(submeter),
        );
        out.extend(
            consumption_family(
                &alloc::format!("{name}_share"),
                "domain/household/appliances",
                "dimensionless",
                Series::ratio(channel, Series::Target),
                false,
            )
            .into_iter()
            .map(submeter),
        );
    }

    out.extend(calendar_core());
    out.extend(solar_block());

    out.extend(behavioral_core());
    out.push(active("kitchen_activity", "behavioral/cooking", "kitchen"));
    out.push(active(
        "laundry_activity",
        "behavioral/social_activities",
        "laundry",
    ));
    out
}

pub const REFIT_ACTIVITY_TAGS: [(&str, &str); 7] = [
    ("kitchen", "behavioral/cooking"),
    ("grooming", "behavioral/personal_hygiene/electrical_devices"),
    ("cleaning", "behavioral/social_activities"),
    ("entertainment", "behavioral/social_activities"),
    ("work_at_home", "behavioral/work_schedule"),
    ("heating", "behavioral/heating"),
    ("bedroom", "behavioral/social_activities"),
];

fn refit() -> Vec<FeatureDescriptor> {
    let mut out = consumption_family(
        "energy",
        "domain/household/active_power",
        "kWh",
        Series::Target,
        true,
    );
    for i in 1..=9 {
        let name = alloc::format!("appliance_{i}");
        let s = Series::channel(&name);
        let path = "domain/household/appliances";
        out.push(submeter(lag(
            &alloc::format!("{name}_lag_1"),
            path,
            "kWh",
            &s,
            1,
            true,
        )));
        out.push(submeter(lag(
            &alloc::format!("{name}_lag_24"),
            path,
            "kWh",
            &s,
            24,
            true,
        )));
        out.push(submeter(rolling_mean(
            &alloc::format!("{name}_rolling_mean_24"),
            path,
            "kWh",
            &s,
            24,
        )));
    }
    out.push(submeter(lag(
        "kitchen_energy_lag_1",
        "domain/household/appliances",
        "kWh",
        &Series::tagged("kitchen"),
        1,
        false,
    )));

    out.extend(calendar_core());
    out.extend(solar_block());
    out.extend(geolocation(false));
    out.extend([
        meta(
            "residents",
            "contextual/building",
            Dtype::Numeric,
            "dimensionless",
        ),
        meta(
            "building_type",
            "contextual/building/type",
            Dtype::Categorical,
            "dimensionless",
        ),
        meta(
            "household_size",
            "contextual/building/area_density",
            Dtype::Numeric,
            "dimensionless",
        ),
        submeter(meta(
            "appliances_owned",
            "contextual/building/plug_load",
            Dtype::Numeric,
            "dimensionless",
        )),
        meta(
            "construction_year",
            "contextual/building/age",
            Dtype::Numeric,
            "year",
        ),
    ]);

    out.extend(behavioral_core());
    for (tag, path) in REFIT_ACTIVITY_TAGS {
        out.push(active(&alloc::format!("{tag}_activity"), path, tag));
    }
    out
}

fn synthetic() -> Vec<FeatureDescriptor> {
    let mut out = consumption_family(
        "energy",
        "domain/household/energy",
        "kWh",
        Series::Target,
        true,
    );
    let kitchen = Series::channel("kitchen");
    let path = "domain/household/appliances";
    out.push(submeter(lag(
        "kitchen_lag_1",
        path,
        "kWh",
        &kitchen,
        1,
        true,
    )));
    out.push(submeter(lag(
        "kitchen_lag_24",
        path,
        "kWh",
        &kitchen,
        24,
        true,
    )));
    out.push(submeter(rolling_mean(
        "kitchen_rolling_mean_24",
        path,
        "kWh",
        &kitchen,
        24,
    )));

    out.extend(calendar_core());
    out.extend(solar_block());

    out.extend(behavioral_core());
    out.push(active("kitchen_activity", "behavioral/cooking", "kitchen"));
    out
}

/// Every feature engineered for a dataset, in canonical column order.
pub fn inventory(id: DatasetId) -> Vec<FeatureDescriptor> {
    match id {
        DatasetId::Hue => hue(),
        DatasetId::Uci => uci(),
        DatasetId::Refit => refit(),
        DatasetId::Synthetic => synthetic(),
    }
}

/// Catalogued descriptors that no adapter produces.
pub fn unproduced_descriptors() -> Vec<FeatureDescriptor> {
    alloc::vec![desc(
        "house_activity_metadata",
        "behavioral/work_schedule",
        Dtype::Numeric,
        "dimensionless",
        Provenance::Metadata,
        0,
        FeatureSource::Unavailable,
    )]
}

/// Feature counts per group, in [`FeatureGroup::ALL`] order.
pub fn group_counts(descriptors: &[FeatureDescriptor]) -> [usize; 3] {
    let mut counts = [0; 3];
    for d in descriptors {
        counts[d.group.index()] += 1;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::super::{select_features, validate_descriptor, GroupSet, Taxonomy};
    use super::*;

    fn counts(id: DatasetId, include_submeter: bool) -> [usize; 3] {
        let sel = select_features(&inventory(id), GroupSet::ALL, include_submeter).unwrap();
        group_counts(&sel)
    }

    #[test]
    fn hue_counts() {
        assert_eq!(inventory(DatasetId::Hue).len(), 67);
        assert_eq!(counts(DatasetId::Hue, true), [8, 44, 15]);
    }

    #[test]
    fn refit_counts() {
        assert_eq!(counts(DatasetId::Refit, true), [35, 18, 21]);
        assert_eq!(counts(DatasetId::Refit, false), [7, 17, 14]);
    }

    #[test]
    fn uci_counts() {
        assert_eq!(counts(DatasetId::Uci, true), [63, 9, 16]);
        assert_eq!(counts(DatasetId::Uci, false), [21, 9, 14]);
    }

    #[test]
    fn every_inventory_descriptor_validates() {
        for id in [
            DatasetId::Hue,
            DatasetId::Uci,
            DatasetId::Refit,
            DatasetId::Synthetic,
        ] {
            let all = inventory(id);
            for d in &all {
                assert!(
                    validate_descriptor(d).is_empty(),
                    "{id}/{}: {:?}",
                    d.name,
                    validate_descriptor(d)
                );
            }
            let mut names: Vec<_> = all.iter().map(|d| d.name.as_str()).collect();
            names.sort_unstable();
            let n = names.len();
            names.dedup();
            assert_eq!(n, names.len(), "{id} has duplicate names");
        }
    }

    #[test]
    fn no_adapter_flags_match_inventories() {
        let tax = Taxonomy::embedded();
        let all: Vec<_> = [
            DatasetId::Hue,
            DatasetId::Uci,
            DatasetId::Refit,
            DatasetId::Synthetic,
        ]
        .into_iter()
        .flat_map(inventory)
        .collect();
        for node in tax.root().walk() {
            if node.path.is_empty() {
                continue;
            }
            let prefix = alloc::format!("{}/", node.path);
            let produced = all
                .iter()
                .any(|d| d.taxonomy_path == node.path || d.taxonomy_path.starts_with(&prefix));
            assert_eq!(node.adapter, produced, "adapter flag of `{}`", node.path);
        }
    }

    #[test]
    fn descriptors_validate_and_datasets_are_consistent() {
        for id in [
            DatasetId::Hue,
            DatasetId::Uci,
            DatasetId::Refit,
            DatasetId::Synthetic,
        ] {
            dataset_descriptor(id).validate().unwrap();
        }
        let mut bad = dataset_descriptor(DatasetId::Uci);
        bad.native_interval_seconds = 8;
        assert!(bad.validate().is_err());
    }
}
