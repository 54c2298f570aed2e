//! Per-household hourly grid of consumption plus auxiliary channels.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One hourly column with its missingness mask. Missing entries hold `0.0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    pub name: String,
    pub unit: String,
    /// Appliance category (e.g. `kitchen`) used by tagged series.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tag: Option<String>,
    pub values: Vec<f64>,
    pub missing: Vec<bool>,
}

impl Channel {
    pub fn new(name: &str, unit: &str, values: Vec<f64>, missing: Vec<bool>) -> Self {
        let mut c = Channel {
            name: name.to_string(),
            unit: unit.to_string(),
            tag: None,
            values,
            missing,
        };
        c.canonicalize();
        c
    }

    pub fn from_options(name: &str, unit: &str, values: &[Option<f64>]) -> Self {
        let missing = values.iter().map(|v| v.is_none()).collect();
        let values = values.iter().map(|v| v.unwrap_or(0.0)).collect();
        Self::new(name, unit, values, missing)
    }

    pub fn with_tag(mut self, tag: &str) -> Self {
        self.tag = Some(tag.to_string());
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<f64> {
        match self.missing.get(i) {
            Some(false) => Some(self.values[i]),
            _ => None,
        }
    }

    pub fn observed(&self) -> usize {
        self.missing.iter().filter(|m| !**m).count()
    }

    /// Zero out masked values so equal frames compare equal.
    fn canonicalize(&mut self) {
        for (v, m) in self.values.iter_mut().zip(self.missing.iter_mut()) {
            if !v.is_finite() {
                *m = true;
            }
            if *m {
                *v = 0.0;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MetaValue {
    Bool(bool),
    Number(f64),
    Text(String),
}

impl MetaValue {
    pub fn as_number(&self) -> Option<f64> {
        match self {
            MetaValue::Bool(b) => Some(if *b { 1.0 } else { 0.0 }),
            MetaValue::Number(x) => Some(*x),
            MetaValue::Text(_) => None,
        }
    }

    pub fn as_level(&self) -> String {
        match self {
            MetaValue::Bool(b) => b.to_string(),
            MetaValue::Number(x) => alloc::format!("{x}"),
            MetaValue::Text(s) => s.clone(),
        }
    }
}

/// Hourly frame for one household. Hour `i` is UTC epoch hour `start_hour + i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HourlyFrame {
    pub household_id: String,
    pub start_hour: i64,
    pub timezone: String,
    pub latitude: f64,
    pub longitude: f64,
    pub region: String,
    pub country: String,
    pub target: Channel,
    pub channels: Vec<Channel>,
    pub metadata: BTreeMap<String, MetaValue>,
}

impl HourlyFrame {
    pub fn new(household_id: &str, start_hour: i64, timezone: &str, target: Channel) -> Self {
        HourlyFrame {
            household_id: household_id.to_string(),
            start_hour,
            timezone: timezone.to_string(),
            latitude: 0.0,
            longitude: 0.0,
            region: String::new(),
            country: String::new(),
            target,
            channels: Vec::new(),
            metadata: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.target.len()
    }

    pub fn is_empty(&self) -> bool {
        self.target.is_empty()
    }

    pub fn hour(&self, i: usize) -> i64 {
        self.start_hour + i as i64
    }

    pub fn channel(&self, name: &str) -> Option<&Channel> {
        self.channels.iter().find(|c| c.name == name)
    }

    pub fn tagged<'a>(&'a self, tag: &'a str) -> impl Iterator<Item = &'a Channel> + 'a {
        self.channels
            .iter()
            .filter(move |c| c.tag.as_deref() == Some(tag))
    }

    pub fn has_submeters(&self) -> bool {
        self.channels.iter().any(|c| c.tag.is_some())
    }

    /// Check structural invariants: aligned lengths, finite values and
    /// non-negative consumption where observed.
    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        for c in core::iter::once(&self.target).chain(&self.channels) {
            if c.values.len() != n || c.missing.len() != n {
                return Err(Error::LengthMismatch {
                    left: n,
                    right: c.values.len().max(c.missing.len()),
                });
            }
            if c.values.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("frame channel"));
            }
        }
        if let Some(i) = (0..n).find(|&i| self.target.get(i).is_some_and(|v| v < 0.0)) {
            return Err(Error::InvalidInput(alloc::format!(
                "negative consumption at hour {} of household {}",
                self.hour(i),
                self.household_id
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn masked_values_are_canonical() {
        let c = Channel::from_options("x", "kWh", &[Some(1.0), None, Some(f64::NAN)]);
        assert_eq!(c.values, [1.0, 0.0, 0.0]);
        assert_eq!(c.missing, [false, true, true]);
        assert_eq!(c.get(0), Some(1.0));
        assert_eq!(c.get(1), None);
        assert_eq!(c.observed(), 1);
    }

    #[test]
    fn validate_rejects_negative_consumption_and_ragged_channels() {
        let mut f = HourlyFrame::new(
            "h",
            0,
            "UTC",
            Channel::from_options("target_kwh", "kWh", &[Some(1.0), Some(-0.5)]),
        );
        assert!(f.validate().is_err());
        f.target = Channel::from_options("target_kwh", "kWh", &[Some(1.0), None]);
        f.validate().unwrap();
        f.channels
            .push(Channel::from_options("t", "°C", &[Some(1.0)]));
        assert!(matches!(f.validate(), Err(Error::LengthMismatch { .. })));
    }
}
