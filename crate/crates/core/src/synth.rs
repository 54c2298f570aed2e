//! Synthetic households with known generative structure.
//!
//! Consumption at local hour `h` is
//! `base * exp(level) * profile[h] * weekend_factor^weekend + meal_spike * meal + noise`,
//! clipped at zero, where `level` is a slow AR(1) process in log space. The
//! level gives lagged consumption its predictive value; the profile and the
//! meal windows tie consumption to the clock. A kitchen submeter draws the
//! meal spikes.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::calendar::{ScheduleTable, Zone};
use crate::frame::{Channel, HourlyFrame};
use crate::{Error, Result};

/// 2014-01-06 00:00 UTC, a Monday.
pub const SYNTH_START_HOUR: i64 = 1_388_966_400 / 3600;

/// Idle draw of the kitchen circuit outside meal windows, below the activity threshold.
pub const KITCHEN_IDLE_KWH: f64 = 0.005;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthSpec {
    pub seed: u64,
    pub days: usize,
    pub base_load_kwh: f64,
    pub daily_profile: [f64; 24],
    pub weekly_weekend_factor: f64,
    pub meal_spike_kwh: f64,
    pub noise_std_kwh: f64,
    /// Hourly autocorrelation of the log-level.
    pub level_persistence: f64,
    /// Stationary standard deviation of the log-level; 0 disables it.
    pub level_std: f64,
    pub household_id: String,
}

const DEFAULT_PROFILE: [f64; 24] = [
    0.55, 0.5, 0.45, 0.45, 0.5, 0.6, 0.9, 1.2, 1.1, 0.9, 0.85, 0.9, //
    1.0, 0.95, 0.9, 0.95, 1.05, 1.3, 1.6, 1.7, 1.55, 1.3, 1.0, 0.75,
];

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            seed: 7,
            days: 90,
            base_load_kwh: 0.5,
            daily_profile: DEFAULT_PROFILE,
            weekly_weekend_factor: 1.25,
            meal_spike_kwh: 1.0,
            noise_std_kwh: 0.03,
            level_persistence: 0.995,
            level_std: 0.35,
            household_id: "synthetic_0".to_string(),
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let mags = [
            self.base_load_kwh,
            self.weekly_weekend_factor,
            self.meal_spike_kwh,
            self.noise_std_kwh,
            self.level_std,
        ];
        if self.days < 21 {
            return Err(Error::InvalidInput(alloc::format!(
                "synthetic days must be at least 21, got {}",
                self.days
            )));
        }
        if mags
            .iter()
            .chain(&self.daily_profile)
            .any(|v| !(*v >= 0.0) || !v.is_finite())
        {
            return Err(Error::InvalidInput(
                "synthetic magnitudes must be finite and non-negative".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.level_persistence) {
            return Err(Error::InvalidInput(
                "level persistence must lie in [0, 1)".into(),
            ));
        }
        Ok(())
    }
}

/// The exact weights a synthetic frame was generated with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub spec: SynthSpec,
    /// Realised log-level per hour.
    pub level: Vec<f64>,
    /// Noise-free consumption per hour.
    pub expected_kwh: Vec<f64>,
    /// Whether each hour falls in a breakfast, lunch or dinner window.
    pub meal: Vec<bool>,
}

pub fn synth_household(spec: &SynthSpec) -> Result<(HourlyFrame, GroundTruth)> {
    spec.validate()?;
    let n = spec.days * 24;
    let zone = Zone::utc();
    let schedule = ScheduleTable::default();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };

    let innovation =
        spec.level_std * libm::sqrt(1.0 - spec.level_persistence * spec.level_persistence);
    let mut level = Vec::with_capacity(n);
    let mut x = spec.level_std * normal();
    let mut target = Vec::with_capacity(n);
    let mut expected = Vec::with_capacity(n);
    let mut kitchen = Vec::with_capacity(n);
    let mut meal = Vec::with_capacity(n);
    for i in 0..n {
        let lt = zone.local(SYNTH_START_HOUR + i as i64);
        let h = lt.hour;
        let in_meal = schedule.breakfast.contains(h)
            || schedule.lunch.contains(h)
            || schedule.dinner.contains(h);
        let weekend = if lt.is_weekend() {
            spec.weekly_weekend_factor
        } else {
            1.0
        };
        let spike = if in_meal { spec.meal_spike_kwh } else { 0.0 };
        let mean =
            spec.base_load_kwh * libm::exp(x) * spec.daily_profile[h as usize] * weekend + spike;
        let noise = spec.noise_std_kwh * normal();
        level.push(x);
        expected.push(mean);
        target.push((mean + noise).max(0.0));
        kitchen.push(if in_meal {
            spike + KITCHEN_IDLE_KWH
        } else {
            KITCHEN_IDLE_KWH
        });
        meal.push(in_meal);
        x = spec.level_persistence * x + innovation * normal();
    }

    let observed = alloc::vec![false; n];
    let mut frame = HourlyFrame::new(
        &spec.household_id,
        SYNTH_START_HOUR,
        zone.name(),
        Channel::new("target_kwh", "kWh", target, observed.clone()),
    );
    frame.latitude = 48.85;
    frame.longitude = 2.35;
    frame.region = "none".to_string();
    frame
        .channels
        .push(Channel::new("kitchen", "kWh", kitchen, observed).with_tag("kitchen"));
    Ok((
        frame,
        GroundTruth {
            spec: spec.clone(),
            level,
            expected_kwh: expected,
            meal,
        },
    ))
}
