use chrono::{NaiveDate, TimeZone, Timelike};
use chrono_tz::Tz;
use gridfeat_core::calendar::{calendar_field, CalendarContext, FieldValue, Zone};
use gridfeat_core::frame::{Channel, HourlyFrame, MetaValue};
use gridfeat_core::matrix::{assemble_matrix, resolve_levels, WARM_UP_HOURS};
use gridfeat_core::schema::{
    inventory, select_features, ActivityFlag, CalendarField, DatasetId, FeatureGroup,
    FeatureSource, GroupSet, YesterdayStat,
};
use gridfeat_core::solar::{clear_sky_ghi, solar_position};
use gridfeat_core::synth::{synth_household, SynthSpec};
use gridfeat_core::window::{active_at, lag, rolling_stats, DailyStats, Masked};
use gridfeat_core::Error;
use proptest::prelude::*;

fn utc_hour(y: i32, m: u32, d: u32, h: u32) -> i64 {
    NaiveDate::from_ymd_opt(y, m, d)
        .unwrap()
        .and_hms_opt(h, 0, 0)
        .unwrap()
        .and_utc()
        .timestamp()
        / 3600
}

fn observed(v: &[f64]) -> Masked {
    Masked {
        values: v.to_vec(),
        missing: vec![false; v.len()],
    }
}

/// A synthetic household dressed up with the weather channels and metadata
/// of the HUE inventory.
fn hue_like(days: usize, seed: u64) -> HourlyFrame {
    let (mut f, _) = synth_household(&SynthSpec {
        days,
        seed,
        ..SynthSpec::default()
    })
    .unwrap();
    f.timezone = "America/Vancouver".into();
    f.region = "canada-bc".into();
    f.country = "CA".into();
    f.latitude = 49.25;
    f.longitude = -123.1;
    f.channels.clear();
    let n = f.len();
    for (name, unit, base) in [
        ("temperature", "°C", 10.0),
        ("humidity", "%", 70.0),
        ("pressure", "hPa", 1010.0),
        ("cloud_cover", "%", 50.0),
    ] {
        let v: Vec<f64> = (0..n)
            .map(|i| base + (i as f64 * 0.37 + seed as f64).sin() * 5.0)
            .collect();
        f.channels.push(Channel::new(name, unit, v, vec![false; n]));
    }
    f.metadata
        .insert("ev_battery_kwh".into(), MetaValue::Number(60.0));
    f.metadata
        .insert("building_type".into(), MetaValue::Text("house".into()));
    f.metadata
        .insert("building_orientation".into(), MetaValue::Text("S".into()));
    f.metadata
        .insert("rental_units".into(), MetaValue::Number(0.0));
    for key in [
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
        f.metadata
            .insert(key.into(), MetaValue::Bool(key.len() % 2 == 0));
    }
    f
}

#[test]
fn lag_examples() {
    let s = observed(&(0..200).map(f64::from).collect::<Vec<_>>());
    assert_eq!(lag(&s, 24).unwrap()[24], Some(0.0));
    assert_eq!(lag(&s, 168).unwrap()[100], None);
    assert_eq!(lag(&s, 23).unwrap()[100], Some(77.0));
    assert!(matches!(lag(&s, 0), Err(Error::ZeroLag)));
}

#[test]
fn rolling_examples() {
    let c = observed(&[2.5; 50]);
    let (m, s) = rolling_stats(&c, 24).unwrap();
    assert_eq!((m[30], s[30]), (Some(2.5), Some(0.0)));
    let ramp = observed(&(1..=30).map(f64::from).collect::<Vec<_>>());
    let (m, s) = rolling_stats(&ramp, 24).unwrap();
    assert_eq!(m[24], Some(12.5));
    assert!((s[24].unwrap() - 6.922186).abs() < 1e-6);
    assert_eq!((m[0], s[0]), (None, None));
    assert!(rolling_stats(&ramp, 1).is_err());
}

#[test]
fn kitchen_activity_examples() {
    let s = observed(&[0.0, 0.5, 0.0]);
    assert_eq!(active_at(&s, 1, 0.01), Some(false));
    assert_eq!(active_at(&s, 2, 0.01), Some(true));
    assert_eq!(active_at(&s, 0, 0.01), None);
}

#[test]
fn yesterday_examples() {
    let flat = observed(&[1.0; 24 * 10]);
    let d = DailyStats::new(&flat, 0, &Zone::utc());
    assert_eq!(d.yesterday(24 * 9, YesterdayStat::Ratio), Some(1.0));
    assert_eq!(d.yesterday(24 * 9, YesterdayStat::Median), Some(1.0));
    let ramp: Vec<f64> = (0..48).map(|i| (i % 24) as f64).collect();
    let d = DailyStats::new(&observed(&ramp), 0, &Zone::utc());
    assert_eq!(d.yesterday(30, YesterdayStat::Median), Some(11.5));
}

#[test]
fn calendar_examples() {
    let paris = Zone::parse("Europe/Paris").unwrap();
    // 2013-07-01 13:00 in Paris, a Monday.
    let h = utc_hour(2013, 7, 1, 11);
    let lt = paris.local(h);
    assert_eq!(lt.hour, 13);
    assert!(!lt.is_weekend());
    assert_eq!(
        calendar_field(CalendarField::PartOfDay, h, &lt, 48.85),
        FieldValue::Level("afternoon")
    );
    assert!(lt.dst);
    assert!(!paris.local(utc_hour(2013, 1, 7, 12)).dst);
    // Every hour of a Saturday.
    for k in 0..24 {
        assert!(paris.local(utc_hour(2013, 7, 6, 0) - 2 + k).is_weekend());
    }
    assert!(Zone::parse("Mars/Olympus").is_err());
}

#[test]
fn schedule_examples() {
    let cal = CalendarContext::new("Europe/Paris", "france", 48.85, 2.35).unwrap();
    let at = |local_hour: u32| {
        cal.zone
            .local(utc_hour(2010, 7, 6, 0) + local_hour as i64 - 2)
    };
    let flag = |f, h| cal.activity(f, &at(h)).unwrap();
    assert!(flag(ActivityFlag::Breakfast, 8) && !flag(ActivityFlag::Work, 8));
    assert!(!flag(ActivityFlag::Work, 17) && flag(ActivityFlag::FreeTime, 17));
    assert!(flag(ActivityFlag::Sleep, 23));
    assert!(!flag(ActivityFlag::Holiday, 0));
    let bastille = cal.zone.local(utc_hour(2010, 7, 14, 10));
    assert!(cal.activity(ActivityFlag::Holiday, &bastille).unwrap());
    // Per local day: breakfast 3 hours, sleep 9.
    let day: Vec<_> = (0..24).map(at).collect();
    let count = |f| day.iter().filter(|l| cal.activity(f, l).unwrap()).count();
    assert_eq!(count(ActivityFlag::Breakfast), 3);
    assert_eq!(count(ActivityFlag::Sleep), 9);
    let outside = cal.zone.local(utc_hour(1999, 7, 2, 0));
    assert!(cal.activity(ActivityFlag::Holiday, &outside).is_err());
}

#[test]
fn solar_examples() {
    let sp = solar_position(utc_hour(2014, 6, 21, 12) as f64 * 3600.0, 48.85, 2.35);
    assert!((sp.altitude - 64.4).abs() < 0.5, "{}", sp.altitude);
    assert_eq!(clear_sky_ghi(-3.0), 0.0);
}

proptest! {
    #[test]
    fn solar_ranges(t in 0i64..2_000_000_000, lat in -90.0f64..=90.0, lon in -180.0f64..180.0) {
        let sp = solar_position(t as f64, lat, lon);
        prop_assert!((-90.0..=90.0).contains(&sp.altitude));
        prop_assert!((0.0..360.0).contains(&sp.azimuth));
        let g = clear_sky_ghi(sp.altitude);
        prop_assert!(g >= 0.0);
        if sp.altitude <= 0.0 {
            prop_assert_eq!(g, 0.0);
        }
    }
}

fn masked_series() -> impl Strategy<Value = Masked> {
    prop::collection::vec(prop::option::weighted(0.95, 0.0f64..5.0), 24 * 12..24 * 14)
        .prop_map(|v| Masked::from_options(&v))
}

proptest! {
    #[test]
    fn window_stats_match_naive_recomputation(s in masked_series(), w in 2usize..50, k in 1usize..200) {
        let (mean, std) = rolling_stats(&s, w).unwrap();
        let lagged = lag(&s, k).unwrap();
        for t in 0..s.len() {
            let expected_lag = if t >= k && !s.missing[t - k] { Some(s.values[t - k]) } else { None };
            prop_assert_eq!(lagged[t], expected_lag);
            let ok = t >= w && (t - w..t).all(|i| !s.missing[i]);
            if !ok {
                prop_assert_eq!(mean[t], None);
                prop_assert_eq!(std[t], None);
                continue;
            }
            let xs = &s.values[t - w..t];
            let m = xs.iter().sum::<f64>() / w as f64;
            let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / w as f64;
            prop_assert_eq!(mean[t], Some(m));
            prop_assert!((std[t].unwrap() - var.sqrt()).abs() <= 1e-12);
        }
    }

    #[test]
    fn yesterday_stats_match_naive_recomputation(s in masked_series(), offset in 0i64..24) {
        // Frames straddling the spring DST change in Paris.
        let start = utc_hour(2014, 3, 22, 0) + offset;
        let tz: Tz = "Europe/Paris".parse().unwrap();
        let local = |i: usize| tz.timestamp_opt((start + i as i64) * 3600, 0).unwrap();
        let stats = DailyStats::new(&s, start, &Zone::parse("Europe/Paris").unwrap());
        let day_hours = |date: NaiveDate| -> Option<Vec<usize>> {
            let idx: Vec<usize> = (0..s.len()).filter(|&i| local(i).date_naive() == date).collect();
            let first = *idx.first()?;
            let last = *idx.last()?;
            (local(first).hour() == 0 && local(last).hour() == 23 && idx.iter().all(|&i| !s.missing[i])).then_some(idx)
        };
        for t in (0..s.len()).step_by(5) {
            let y = local(t).date_naive().pred_opt().unwrap();
            let hours = day_hours(y);
            let median = hours.as_ref().map(|h| {
                let mut v: Vec<f64> = h.iter().map(|&i| s.values[i]).collect();
                v.sort_by(f64::total_cmp);
                let n = v.len();
                if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 }
            });
            prop_assert_eq!(stats.yesterday(t, YesterdayStat::Median), median);
            let ratio = hours.as_ref().and_then(|h| {
                let total: f64 = h.iter().map(|&i| s.values[i]).sum();
                let mut prior = 0.0;
                for back in 1..=7 {
                    let d = y - chrono::Days::new(back);
                    prior += day_hours(d)?.iter().map(|&i| s.values[i]).sum::<f64>();
                }
                let mean = prior / 7.0;
                (mean > 0.0).then(|| total / mean)
            });
            match (stats.yesterday(t, YesterdayStat::Ratio), ratio) {
                (Some(a), Some(b)) => prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0)),
                (a, b) => prop_assert_eq!(a, b),
            }
        }
    }
}

#[test]
fn thirty_synthetic_days_keep_the_expected_rows() {
    let (frame, _) = synth_household(&SynthSpec {
        days: 30,
        ..SynthSpec::default()
    })
    .unwrap();
    let domain = select_features(
        &inventory(DatasetId::Synthetic),
        GroupSet::of(&[FeatureGroup::Domain]),
        true,
    )
    .unwrap();
    let m = assemble_matrix(&frame, &domain).unwrap();
    assert_eq!(m.n_rows(), 30 * 24 - WARM_UP_HOURS - 1);
    assert!(m.columns.iter().all(|c| c.group == FeatureGroup::Domain));
    // Row t predicts hour t + 1.
    for i in 0..m.n_rows() {
        let t = (m.row_hours[i] - frame.start_hour) as usize;
        assert_eq!(m.target[i], frame.target.values[t + 1]);
    }
}

#[test]
fn hue_like_frame_assembles_with_flags_in_range() {
    let frames = [hue_like(30, 1)];
    let mut all = inventory(DatasetId::Hue);
    resolve_levels(&mut all, &frames).unwrap();
    let m = assemble_matrix(&frames[0], &all).unwrap();
    assert!(m.n_rows() > 300);
    assert!(m.column_index("kitchen_activity").is_none());
    let flag_descriptors: Vec<&str> = all
        .iter()
        .filter(|d| {
            matches!(
                d.source,
                FeatureSource::Activity { .. } | FeatureSource::Active { .. }
            ) || d.levels.len() > 0
        })
        .map(|d| d.name.as_str())
        .collect();
    for (j, c) in m.columns.iter().enumerate() {
        if flag_descriptors.contains(&c.descriptor.as_str()) {
            assert!(
                m.column(j).iter().all(|v| *v == 0.0 || *v == 1.0),
                "{}",
                c.name
            );
        }
    }
}

#[test]
fn short_frame_reports_row_loss() {
    let (mut frame, _) = synth_household(&SynthSpec {
        days: 21,
        ..SynthSpec::default()
    })
    .unwrap();
    frame.target.values.truncate(100);
    frame.target.missing.truncate(100);
    frame.channels.clear();
    let err = assemble_matrix(&frame, &inventory(DatasetId::Synthetic)[..4]).unwrap_err();
    match err {
        Error::EmptyMatrix(msg) => assert!(msg.contains("warm-up"), "{msg}"),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn missing_source_channel_is_an_error() {
    let (mut frame, _) = synth_household(&SynthSpec {
        days: 21,
        ..SynthSpec::default()
    })
    .unwrap();
    frame.channels.clear();
    assert!(assemble_matrix(&frame, &inventory(DatasetId::Synthetic)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn future_values_never_reach_past_rows(t in WARM_UP_HOURS..30 * 24 - 2, seed in 0u64..4, noise in 0.0f64..3.0) {
        let frames = [hue_like(30, seed)];
        let mut all = inventory(DatasetId::Hue);
        resolve_levels(&mut all, &frames).unwrap();
        let base = assemble_matrix(&frames[0], &all).unwrap();
        let mut perturbed = frames[0].clone();
        for i in t + 1..perturbed.len() {
            perturbed.target.values[i] = noise * ((i * 7919) % 13) as f64;
            for c in &mut perturbed.channels {
                c.values[i] += noise * 10.0 + 1.0;
            }
        }
        let after = assemble_matrix(&perturbed, &all).unwrap();
        let hour = frames[0].start_hour + t as i64;
        let a = base.row_hours.iter().position(|h| *h == hour);
        let b = after.row_hours.iter().position(|h| *h == hour);
        prop_assert_eq!(a.is_some(), b.is_some());
        if let (Some(a), Some(b)) = (a, b) {
            prop_assert_eq!(base.row(a), after.row(b));
        }
    }
}
