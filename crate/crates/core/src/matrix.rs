//! Design-matrix assembly from an hourly frame and a descriptor set.
//!
//! Row `t` holds features available at the end of hour `t - 1` and the
//! target `target_kwh[t + 1]`. The first [`WARM_UP_HOURS`] rows are always
//! dropped, as is any row with an unobserved target or feature value.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::calendar::{calendar_field, CalendarContext, FieldValue, LocalTime, ScheduleTable};
use crate::frame::{HourlyFrame, MetaValue};
use crate::schema::{
    validate_descriptor, Dtype, FeatureDescriptor, FeatureGroup, FeatureSource, Provenance, Series,
};
use crate::solar::solar_field;
use crate::window::{
    active_at, lag_at, resolve_series, rolling_mean_at, rolling_std_at, DailyStats, Masked,
};
use crate::{Error, Result};

pub const WARM_UP_HOURS: usize = 168;

/// Knobs of matrix assembly beyond the descriptor list.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AssembleOptions {
    pub schedule: ScheduleTable,
    /// Holiday calendar to use instead of the frame's region.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub holiday_region: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnInfo {
    pub name: String,
    /// Descriptor the column was produced from.
    pub descriptor: String,
    pub group: FeatureGroup,
    pub provenance: Provenance,
    pub submeter: bool,
}

/// Dense row-major matrix with one target per row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub columns: Vec<ColumnInfo>,
    pub data: Vec<f64>,
    pub target: Vec<f64>,
    /// UTC epoch hour `t` of each row; the target is hour `t + 1`.
    pub row_hours: Vec<i64>,
    /// Household of each row, as an index into `households`.
    pub row_household: Vec<usize>,
    pub households: Vec<String>,
}

impl FeatureMatrix {
    pub fn n_rows(&self) -> usize {
        self.target.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let p = self.n_cols();
        &self.data[i * p..(i + 1) * p]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_cols() + j]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n_rows()).map(|i| self.get(i, j)).collect()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn column_names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }

    /// Keep the columns at `idx`, in that order.
    pub fn select_columns(&self, idx: &[usize]) -> FeatureMatrix {
        let mut data = Vec::with_capacity(self.n_rows() * idx.len());
        for i in 0..self.n_rows() {
            let row = self.row(i);
            data.extend(idx.iter().map(|&j| row[j]));
        }
        FeatureMatrix {
            columns: idx.iter().map(|&j| self.columns[j].clone()).collect(),
            data,
            target: self.target.clone(),
            row_hours: self.row_hours.clone(),
            row_household: self.row_household.clone(),
            households: self.households.clone(),
        }
    }

    /// Keep the columns produced by the named descriptors.
    pub fn select_descriptors(&self, names: &[&str]) -> FeatureMatrix {
        let idx: Vec<usize> = (0..self.n_cols())
            .filter(|&j| names.contains(&self.columns[j].descriptor.as_str()))
            .collect();
        self.select_columns(&idx)
    }

    pub fn select_rows(&self, rows: &[usize]) -> FeatureMatrix {
        let mut data = Vec::with_capacity(rows.len() * self.n_cols());
        for &i in rows {
            data.extend_from_slice(self.row(i));
        }
        FeatureMatrix {
            columns: self.columns.clone(),
            data,
            target: rows.iter().map(|&i| self.target[i]).collect(),
            row_hours: rows.iter().map(|&i| self.row_hours[i]).collect(),
            row_household: rows.iter().map(|&i| self.row_household[i]).collect(),
            households: self.households.clone(),
        }
    }

    /// Stack matrices with identical columns.
    pub fn concat(parts: &[FeatureMatrix]) -> Result<FeatureMatrix> {
        let first = parts.first().ok_or(Error::Empty)?;
        let mut out = FeatureMatrix {
            columns: first.columns.clone(),
            data: Vec::new(),
            target: Vec::new(),
            row_hours: Vec::new(),
            row_household: Vec::new(),
            households: Vec::new(),
        };
        for p in parts {
            if p.columns != out.columns {
                return Err(Error::ColumnMismatch {
                    expected: out.column_names().iter().map(|s| s.to_string()).collect(),
                    found: p.column_names().iter().map(|s| s.to_string()).collect(),
                });
            }
            out.data.extend_from_slice(&p.data);
            out.target.extend_from_slice(&p.target);
            out.row_hours.extend_from_slice(&p.row_hours);
            for &h in &p.row_household {
                let name = &p.households[h];
                let idx = match out.households.iter().position(|x| x == name) {
                    Some(i) => i,
                    None => {
                        out.households.push(name.clone());
                        out.households.len() - 1
                    }
                };
                out.row_household.push(idx);
            }
        }
        Ok(out)
    }
}

/// Column names a descriptor expands to.
pub fn expand_columns(d: &FeatureDescriptor) -> Vec<ColumnInfo> {
    let info = |name: String| ColumnInfo {
        name,
        descriptor: d.name.clone(),
        group: d.group,
        provenance: d.provenance,
        submeter: d.submeter,
    };
    if d.dtype == Dtype::Categorical {
        d.levels
            .iter()
            .map(|l| info(alloc::format!("{}={}", d.name, l)))
            .collect()
    } else {
        alloc::vec![info(d.name.clone())]
    }
}

fn builtin_meta(frame: &HourlyFrame, key: &str) -> Option<MetaValue> {
    Some(match key {
        "latitude" => MetaValue::Number(frame.latitude),
        "longitude" => MetaValue::Number(frame.longitude),
        "region" => MetaValue::Text(frame.region.clone()),
        "country" => MetaValue::Text(frame.country.clone()),
        "household_id" => MetaValue::Text(frame.household_id.clone()),
        _ => return None,
    })
}

fn static_value(frame: &HourlyFrame, key: &str) -> Result<MetaValue> {
    frame
        .metadata
        .get(key)
        .cloned()
        .or_else(|| builtin_meta(frame, key))
        .ok_or_else(|| {
            Error::InvalidInput(alloc::format!(
                "household {} lacks metadata `{key}`",
                frame.household_id
            ))
        })
}

/// Fill empty level lists of static categoricals with the sorted values
/// observed across `frames`.
pub fn resolve_levels(descriptors: &mut [FeatureDescriptor], frames: &[HourlyFrame]) -> Result<()> {
    for d in descriptors.iter_mut() {
        if d.dtype != Dtype::Categorical || !d.levels.is_empty() {
            continue;
        }
        let FeatureSource::Static { key } = &d.source else {
            continue;
        };
        let mut seen = BTreeSet::new();
        for f in frames {
            seen.insert(static_value(f, key)?.as_level());
        }
        d.levels = seen.into_iter().collect();
    }
    Ok(())
}

/// Per-row cell of a descriptor before one-hot expansion.
enum Cell {
    Num(Option<f64>),
    Level(Option<String>),
}

struct Context<'a> {
    frame: &'a HourlyFrame,
    cal: CalendarContext,
    locals: Vec<LocalTime>,
    series: Vec<(Series, Masked)>,
    daily: Vec<(Series, DailyStats)>,
}

impl Context<'_> {
    fn series(&mut self, s: &Series) -> Result<usize> {
        if let Some(i) = self.series.iter().position(|(k, _)| k == s) {
            return Ok(i);
        }
        self.series
            .push((s.clone(), resolve_series(self.frame, s)?));
        Ok(self.series.len() - 1)
    }

    fn daily(&mut self, s: &Series) -> Result<usize> {
        if let Some(i) = self.daily.iter().position(|(k, _)| k == s) {
            return Ok(i);
        }
        let m = self.series(s)?;
        let stats = DailyStats::new(&self.series[m].1, self.frame.start_hour, &self.cal.zone);
        self.daily.push((s.clone(), stats));
        Ok(self.daily.len() - 1)
    }

    /// Column for rows `0..n-1` (the last hour has no next-hour target).
    fn cells(&mut self, d: &FeatureDescriptor) -> Result<Vec<Cell>> {
        let rows = self.frame.len().saturating_sub(1);
        let num = |v: Vec<Option<f64>>| v.into_iter().map(Cell::Num).collect();
        let bool_num = |b: bool| Some(if b { 1.0 } else { 0.0 });
        Ok(match &d.source {
            FeatureSource::Lag { series, hours } => {
                let i = self.series(series)?;
                let s = &self.series[i].1;
                num((0..rows).map(|t| lag_at(s, t, *hours as usize)).collect())
            }
            FeatureSource::RollingMean { series, window } => {
                let i = self.series(series)?;
                let s = &self.series[i].1;
                num((0..rows)
                    .map(|t| rolling_mean_at(s, t, *window as usize))
                    .collect())
            }
            FeatureSource::RollingStd { series, window } => {
                let i = self.series(series)?;
                let s = &self.series[i].1;
                num((0..rows)
                    .map(|t| rolling_std_at(s, t, *window as usize))
                    .collect())
            }
            FeatureSource::Active {
                series,
                threshold_kwh,
            } => {
                let i = self.series(series)?;
                let s = &self.series[i].1;
                num((0..rows)
                    .map(|t| active_at(s, t, *threshold_kwh).and_then(bool_num))
                    .collect())
            }
            FeatureSource::Yesterday { series, stat } => {
                let i = self.daily(series)?;
                let stats = &self.daily[i].1;
                num((0..rows).map(|t| stats.yesterday(t, *stat)).collect())
            }
            FeatureSource::Calendar { field } => (0..rows)
                .map(|t| {
                    match calendar_field(
                        *field,
                        self.frame.hour(t + 1),
                        &self.locals[t + 1],
                        self.cal.latitude,
                    ) {
                        FieldValue::Number(x) => Cell::Num(Some(x)),
                        FieldValue::Level(l) => Cell::Level(Some(l.to_string())),
                    }
                })
                .collect(),
            FeatureSource::Solar { field } => num((0..rows)
                .map(|t| {
                    Some(solar_field(
                        *field,
                        self.frame.hour(t + 1),
                        self.cal.latitude,
                        self.cal.longitude,
                    ))
                })
                .collect()),
            FeatureSource::Activity { flag } => {
                let mut out = Vec::with_capacity(rows);
                for t in 0..rows {
                    out.push(Cell::Num(bool_num(
                        self.cal.activity(*flag, &self.locals[t + 1])?,
                    )));
                }
                out
            }
            FeatureSource::Static { key } => {
                let v = static_value(self.frame, key)?;
                let cell = || match (d.dtype, &v) {
                    (Dtype::Categorical, v) => Ok(Cell::Level(Some(v.as_level()))),
                    (_, v) => v.as_number().map(|x| Cell::Num(Some(x))).ok_or_else(|| {
                        Error::InvalidInput(alloc::format!("metadata `{key}` is not numeric"))
                    }),
                };
                let mut out = Vec::with_capacity(rows);
                for _ in 0..rows {
                    out.push(cell()?);
                }
                out
            }
            FeatureSource::Unavailable => {
                return Err(Error::Unsupported(alloc::format!(
                    "descriptor `{}` has no producer",
                    d.name
                )))
            }
        })
    }
}

/// Build the design matrix of `frame` for `descriptors` with default options.
pub fn assemble_matrix(
    frame: &HourlyFrame,
    descriptors: &[FeatureDescriptor],
) -> Result<FeatureMatrix> {
    assemble_matrix_with(frame, descriptors, &AssembleOptions::default())
}

pub fn assemble_matrix_with(
    frame: &HourlyFrame,
    descriptors: &[FeatureDescriptor],
    options: &AssembleOptions,
) -> Result<FeatureMatrix> {
    frame.validate()?;
    if descriptors.is_empty() {
        return Err(Error::EmptySelection);
    }
    for d in descriptors {
        let violations = validate_descriptor(d);
        if !violations.is_empty() {
            return Err(Error::InvalidDescriptor {
                name: d.name.clone(),
                violations: violations.iter().map(|v| v.to_string()).collect(),
            });
        }
    }
    options.schedule.validate()?;
    let region = match (&options.holiday_region, frame.region.as_str()) {
        (Some(r), _) => r.as_str(),
        (None, "") => "none",
        (None, r) => r,
    };
    let mut cal = CalendarContext::new(&frame.timezone, region, frame.latitude, frame.longitude)?;
    cal.schedule = options.schedule;
    let locals = (0..frame.len())
        .map(|i| cal.zone.local(frame.hour(i)))
        .collect();
    let mut ctx = Context {
        frame,
        cal,
        locals,
        series: Vec::new(),
        daily: Vec::new(),
    };

    let rows = frame.len().saturating_sub(1);
    let mut columns = Vec::new();
    let mut values: Vec<Vec<Option<f64>>> = Vec::new();
    for d in descriptors {
        let cells = ctx.cells(d)?;
        let mut levels = d.levels.clone();
        if d.dtype == Dtype::Categorical && levels.is_empty() {
            let seen: BTreeSet<String> = cells
                .iter()
                .filter_map(|c| {
                    if let Cell::Level(Some(l)) = c {
                        Some(l.clone())
                    } else {
                        None
                    }
                })
                .collect();
            levels = seen.into_iter().collect();
        }
        let mut expanded = d.clone();
        expanded.levels = levels.clone();
        columns.extend(expand_columns(&expanded));
        if d.dtype == Dtype::Categorical {
            for level in &levels {
                values.push(
                    cells
                        .iter()
                        .map(|c| match c {
                            Cell::Level(Some(l)) => Some(if l == level { 1.0 } else { 0.0 }),
                            _ => None,
                        })
                        .collect(),
                );
            }
        } else {
            values.push(
                cells
                    .iter()
                    .map(|c| if let Cell::Num(v) = c { *v } else { None })
                    .collect(),
            );
        }
    }

    let keep: Vec<usize> = (WARM_UP_HOURS.min(rows)..rows)
        .filter(|&t| {
            frame.target.get(t + 1).is_some()
                && values.iter().all(|col| col[t].is_some_and(f64::is_finite))
        })
        .collect();
    if keep.is_empty() {
        return Err(Error::EmptyMatrix(row_loss(frame, &columns, &values, rows)));
    }
    let mut data = Vec::with_capacity(keep.len() * columns.len());
    for &t in &keep {
        data.extend(values.iter().map(|col| col[t].unwrap_or_default()));
    }
    Ok(FeatureMatrix {
        columns,
        data,
        target: keep.iter().map(|&t| frame.target.values[t + 1]).collect(),
        row_hours: keep.iter().map(|&t| frame.hour(t)).collect(),
        row_household: alloc::vec![0; keep.len()],
        households: alloc::vec![frame.household_id.clone()],
    })
}

/// Explain why no row survived: warm-up, unobserved targets and the columns
/// missing most often.
fn row_loss(
    frame: &HourlyFrame,
    columns: &[ColumnInfo],
    values: &[Vec<Option<f64>>],
    rows: usize,
) -> String {
    let warm = WARM_UP_HOURS.min(rows);
    let candidates = rows - warm;
    let no_target = (warm..rows)
        .filter(|&t| frame.target.get(t + 1).is_none())
        .count();
    let mut worst: Vec<(usize, &str)> = columns
        .iter()
        .zip(values)
        .map(|(c, col)| {
            (
                (warm..rows).filter(|&t| col[t].is_none()).count(),
                c.name.as_str(),
            )
        })
        .filter(|(k, _)| *k > 0)
        .collect();
    worst.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(b.1)));
    let mut msg = alloc::format!(
        "household {}: {} hours, {} warm-up rows dropped, {} of {} remaining rows lack an observed target",
        frame.household_id,
        frame.len(),
        warm,
        no_target,
        candidates
    );
    for (k, name) in worst.iter().take(5) {
        msg.push_str(&alloc::format!("; `{name}` missing in {k} rows"));
    }
    msg
}

/// Columns of a matrix grouped by taxonomy group.
pub fn column_groups(columns: &[ColumnInfo]) -> [Vec<usize>; 3] {
    let mut out: [Vec<usize>; 3] = Default::default();
    for (j, c) in columns.iter().enumerate() {
        out[c.group.index()].push(j);
    }
    out
}
