//! Daily meteorological records: ingestion, validation, and synthesis.
//!
//! The input format is a plain CSV with one header row and the columns
//! `date,tmax,tmin,rs,rhmax,rhmin,u2` (ISO-8601 dates, `.` decimal).
//! Records are validated on ingest: ordering and sign violations reject
//! the row, while relative humidity slightly above saturation (up to 110%)
//! is accepted with a quality flag, since real station exports do report
//! such values.

use std::io::{Read, Write};

use chrono::NaiveDate;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Hard upper bound for relative humidity; values in (100, 110] are
/// flagged, values above 110 reject the record.
pub const RH_HARD_MAX: f64 = 110.0;

#[derive(Debug, Error)]
pub enum MeteoError {
    #[error("missing required column `{0}`")]
    MissingColumn(String),
    #[error("row {row}: cannot parse column `{col}`: {value:?}")]
    UnparsableValue { row: usize, col: String, value: String },
    #[error("row {row}: {reason}")]
    HardInvariantViolation { row: usize, reason: String },
    #[error("invalid station profile: {0}")]
    InvalidProfile(String),
    #[error("invalid station metadata: {0}")]
    InvalidStation(String),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("config error: {0}")]
    Config(String),
}

/// One day of station weather.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeteoRecord {
    pub date: NaiveDate,
    /// Maximum air temperature, °C.
    pub t_max: f64,
    /// Minimum air temperature, °C.
    pub t_min: f64,
    /// Measured solar radiation, MJ m⁻² day⁻¹.
    pub r_s: f64,
    /// Maximum relative humidity, %.
    pub rh_max: f64,
    /// Minimum relative humidity, %.
    pub rh_min: f64,
    /// Wind speed at 2 m, m s⁻¹.
    pub u2: f64,
}

impl MeteoRecord {
    /// The six model features in canonical order.
    pub fn features(&self) -> [f64; 6] {
        [self.t_max, self.t_min, self.r_s, self.rh_max, self.rh_min, self.u2]
    }

    /// Checks hard invariants; returns soft-quality flags on success.
    pub fn validate(&self) -> Result<Vec<FlagKind>, String> {
        if !self.t_max.is_finite()
            || !self.t_min.is_finite()
            || !self.r_s.is_finite()
            || !self.rh_max.is_finite()
            || !self.rh_min.is_finite()
            || !self.u2.is_finite()
        {
            return Err("non-finite value".into());
        }
        if self.t_min > self.t_max {
            return Err(format!("t_min {} > t_max {}", self.t_min, self.t_max));
        }
        if self.rh_min > self.rh_max {
            return Err(format!("rh_min {} > rh_max {}", self.rh_min, self.rh_max));
        }
        if self.r_s < 0.0 {
            return Err(format!("negative solar radiation {}", self.r_s));
        }
        if self.u2 < 0.0 {
            return Err(format!("negative wind speed {}", self.u2));
        }
        if self.rh_min < 0.0 {
            return Err(format!("negative relative humidity {}", self.rh_min));
        }
        if self.rh_max > RH_HARD_MAX {
            return Err(format!(
                "rh_max {} above hard bound {}",
                self.rh_max, RH_HARD_MAX
            ));
        }
        let mut flags = Vec::new();
        if self.rh_max > 100.0 {
            flags.push(FlagKind::RhAboveSaturation { field: "rhmax", value: self.rh_max });
        }
        if self.rh_min > 100.0 {
            flags.push(FlagKind::RhAboveSaturation { field: "rhmin", value: self.rh_min });
        }
        Ok(flags)
    }
}

/// Quality flag attached to an input row.
#[derive(Debug, Clone, PartialEq)]
pub struct QualityFlag {
    /// 1-based data row index (header excluded).
    pub row: usize,
    pub kind: FlagKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FlagKind {
    /// RH in (100, 110]: record kept, vapor pressure clamps at saturation.
    RhAboveSaturation { field: &'static str, value: f64 },
    /// Hard invariant violation: record dropped.
    Rejected { reason: String },
}

impl FlagKind {
    pub fn label(&self) -> &'static str {
        match self {
            FlagKind::RhAboveSaturation { .. } => "RHAboveSaturation",
            FlagKind::Rejected { .. } => "Rejected",
        }
    }

    pub fn detail(&self) -> String {
        match self {
            FlagKind::RhAboveSaturation { field, value } => format!("{field}={value}"),
            FlagKind::Rejected { reason } => reason.clone(),
        }
    }
}

/// Station identity and location.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationMeta {
    pub name: String,
    pub code: i64,
    /// Degrees east.
    pub longitude: f64,
    /// Degrees north.
    pub latitude: f64,
    /// Metres above sea level.
    pub altitude: f64,
}

impl StationMeta {
    pub fn validate(&self) -> Result<(), MeteoError> {
        if !(-90.0..=90.0).contains(&self.latitude) {
            return Err(MeteoError::InvalidStation(format!(
                "latitude {} outside [-90, 90]",
                self.latitude
            )));
        }
        if !(-180.0..=180.0).contains(&self.longitude) {
            return Err(MeteoError::InvalidStation(format!(
                "longitude {} outside [-180, 180]",
                self.longitude
            )));
        }
        if !(-430.0..=9000.0).contains(&self.altitude) {
            return Err(MeteoError::InvalidStation(format!(
                "altitude {} outside [-430, 9000]",
                self.altitude
            )));
        }
        Ok(())
    }

    /// Loads station metadata from a TOML file with keys
    /// `name, code, longitude, latitude, altitude`.
    pub fn from_toml(text: &str) -> Result<Self, MeteoError> {
        let meta: StationMeta =
            toml::from_str(text).map_err(|e| MeteoError::Config(e.to_string()))?;
        meta.validate()?;
        Ok(meta)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("station metadata serializes")
    }
}

/// Maps canonical column names to the headers used in a particular file.
#[derive(Debug, Clone)]
pub struct ColumnMap {
    pub date: String,
    pub tmax: String,
    pub tmin: String,
    pub rs: String,
    pub rhmax: String,
    pub rhmin: String,
    pub u2: String,
}

impl Default for ColumnMap {
    fn default() -> Self {
        ColumnMap {
            date: "date".into(),
            tmax: "tmax".into(),
            tmin: "tmin".into(),
            rs: "rs".into(),
            rhmax: "rhmax".into(),
            rhmin: "rhmin".into(),
            u2: "u2".into(),
        }
    }
}

/// Result of a lenient parse: valid records plus per-row quality flags
/// (including rejection flags for rows that failed hard invariants).
#[derive(Debug, Default)]
pub struct ParseOutcome {
    pub records: Vec<MeteoRecord>,
    pub flags: Vec<QualityFlag>,
}

impl ParseOutcome {
    /// Rows dropped because of hard invariant violations.
    pub fn rejected_rows(&self) -> usize {
        self.flags
            .iter()
            .filter(|f| matches!(f.kind, FlagKind::Rejected { .. }))
            .count()
    }
}

struct ColumnIndices {
    date: usize,
    tmax: usize,
    tmin: usize,
    rs: usize,
    rhmax: usize,
    rhmin: usize,
    u2: usize,
}

fn resolve_columns(headers: &csv::StringRecord, map: &ColumnMap) -> Result<ColumnIndices, MeteoError> {
    let find = |name: &str| -> Result<usize, MeteoError> {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| MeteoError::MissingColumn(name.to_string()))
    };
    Ok(ColumnIndices {
        date: find(&map.date)?,
        tmax: find(&map.tmax)?,
        tmin: find(&map.tmin)?,
        rs: find(&map.rs)?,
        rhmax: find(&map.rhmax)?,
        rhmin: find(&map.rhmin)?,
        u2: find(&map.u2)?,
    })
}

fn parse_row(
    record: &csv::StringRecord,
    cols: &ColumnIndices,
    map: &ColumnMap,
    row: usize,
) -> Result<MeteoRecord, MeteoError> {
    let field = |idx: usize, col: &str| -> Result<&str, MeteoError> {
        record.get(idx).map(str::trim).ok_or_else(|| MeteoError::UnparsableValue {
            row,
            col: col.to_string(),
            value: "<missing>".into(),
        })
    };
    let num = |idx: usize, col: &str| -> Result<f64, MeteoError> {
        let raw = field(idx, col)?;
        raw.parse::<f64>().map_err(|_| MeteoError::UnparsableValue {
            row,
            col: col.to_string(),
            value: raw.to_string(),
        })
    };
    let raw_date = field(cols.date, &map.date)?;
    let date = NaiveDate::parse_from_str(raw_date, "%Y-%m-%d").map_err(|_| {
        MeteoError::UnparsableValue {
            row,
            col: map.date.clone(),
            value: raw_date.to_string(),
        }
    })?;
    Ok(MeteoRecord {
        date,
        t_max: num(cols.tmax, &map.tmax)?,
        t_min: num(cols.tmin, &map.tmin)?,
        r_s: num(cols.rs, &map.rs)?,
        rh_max: num(cols.rhmax, &map.rhmax)?,
        rh_min: num(cols.rhmin, &map.rhmin)?,
        u2: num(cols.u2, &map.u2)?,
    })
}

/// Parses a weather CSV leniently: rows that fail hard invariants or do not
/// parse are dropped and recorded as [`FlagKind::Rejected`]; soft violations
/// attach flags but keep the record. Schema-level problems (missing columns)
/// are errors.
pub fn parse_csv<R: Read>(reader: R, map: &ColumnMap) -> Result<ParseOutcome, MeteoError> {
    parse_csv_inner(reader, map, false)
}

/// Strict variant: the first bad row aborts with the underlying error.
pub fn parse_csv_strict<R: Read>(reader: R, map: &ColumnMap) -> Result<ParseOutcome, MeteoError> {
    parse_csv_inner(reader, map, true)
}

fn parse_csv_inner<R: Read>(
    reader: R,
    map: &ColumnMap,
    strict: bool,
) -> Result<ParseOutcome, MeteoError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let cols = resolve_columns(&headers, map)?;

    let mut out = ParseOutcome::default();
    for (i, row) in rdr.records().enumerate() {
        let row_idx = i + 1; // 1-based data row
        let raw = row?;
        match parse_row(&raw, &cols, map, row_idx) {
            Ok(rec) => match rec.validate() {
                Ok(soft) => {
                    for kind in soft {
                        out.flags.push(QualityFlag { row: row_idx, kind });
                    }
                    out.records.push(rec);
                }
                Err(reason) => {
                    if strict {
                        return Err(MeteoError::HardInvariantViolation { row: row_idx, reason });
                    }
                    out.flags.push(QualityFlag {
                        row: row_idx,
                        kind: FlagKind::Rejected { reason },
                    });
                }
            },
            Err(e) => {
                if strict {
                    return Err(e);
                }
                out.flags.push(QualityFlag {
                    row: row_idx,
                    kind: FlagKind::Rejected { reason: e.to_string() },
                });
            }
        }
    }
    Ok(out)
}

/// Writes records in the canonical CSV schema. Floats use the shortest
/// round-trip representation, so `parse_csv(write_csv(x)) == x`.
pub fn write_csv<W: Write>(mut w: W, records: &[MeteoRecord]) -> Result<(), MeteoError> {
    writeln!(w, "date,tmax,tmin,rs,rhmax,rhmin,u2")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.date.format("%Y-%m-%d"),
            r.t_max,
            r.t_min,
            r.r_s,
            r.rh_max,
            r.rh_min,
            r.u2
        )?;
    }
    Ok(())
}

/// Writes quality flags as a CSV sidecar.
pub fn write_flags_csv<W: Write>(mut w: W, flags: &[QualityFlag]) -> Result<(), MeteoError> {
    writeln!(w, "row,flag,detail")?;
    for f in flags {
        writeln!(w, "{},{},{}", f.row, f.kind.label(), f.kind.detail())?;
    }
    Ok(())
}

/// Synthesis targets for one variable: observed range, mean, spread, and
/// the signed share of the spread carried by the annual cycle.
#[derive(Debug, Clone, Copy)]
pub struct VariableProfile {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub std: f64,
    /// In [-1, 1]; negative means the variable peaks in winter.
    pub seasonal_weight: f64,
}

impl VariableProfile {
    pub const fn new(min: f64, max: f64, mean: f64, std: f64, seasonal_weight: f64) -> Self {
        VariableProfile { min, max, mean, std, seasonal_weight }
    }

    fn validate(&self, name: &str) -> Result<(), MeteoError> {
        if !(self.min <= self.mean && self.mean <= self.max) {
            return Err(MeteoError::InvalidProfile(format!(
                "{name}: need min <= mean <= max, got ({}, {}, {})",
                self.min, self.mean, self.max
            )));
        }
        if self.std < 0.0 {
            return Err(MeteoError::InvalidProfile(format!("{name}: negative std")));
        }
        if self.seasonal_weight.abs() > 1.0 {
            return Err(MeteoError::InvalidProfile(format!(
                "{name}: seasonal weight {} outside [-1, 1]",
                self.seasonal_weight
            )));
        }
        Ok(())
    }

    /// Value for one day: annual sinusoid plus Gaussian noise, clamped to
    /// the observed range. The sinusoid carries `w²` of the variance and
    /// the noise the rest, so the marginal std approximates the target.
    fn sample(&self, phase: f64, rng: &mut ChaCha8Rng) -> f64 {
        let w = self.seasonal_weight;
        let amplitude = w * self.std * std::f64::consts::SQRT_2;
        let noise_std = self.std * (1.0 - w * w).max(0.0).sqrt();
        let eps: f64 = rng.sample(StandardNormal);
        (self.mean + amplitude * phase.cos() + noise_std * eps).clamp(self.min, self.max)
    }
}

/// Per-variable synthesis targets for one station.
#[derive(Debug, Clone)]
pub struct StationProfile {
    pub t_max: VariableProfile,
    pub t_min: VariableProfile,
    pub r_s: VariableProfile,
    pub rh_max: VariableProfile,
    pub rh_min: VariableProfile,
    pub u2: VariableProfile,
    /// Day of year at which the annual cycle peaks (shared by all variables).
    pub peak_day: f64,
}

impl StationProfile {
    pub fn validate(&self) -> Result<(), MeteoError> {
        self.t_max.validate("t_max")?;
        self.t_min.validate("t_min")?;
        self.r_s.validate("r_s")?;
        self.rh_max.validate("rh_max")?;
        self.rh_min.validate("rh_min")?;
        self.u2.validate("u2")?;
        if self.r_s.min < 0.0 {
            return Err(MeteoError::InvalidProfile("r_s range must be non-negative".into()));
        }
        if self.u2.min < 0.0 {
            return Err(MeteoError::InvalidProfile("u2 range must be non-negative".into()));
        }
        if self.rh_min.min < 0.0 || self.rh_max.max > RH_HARD_MAX {
            return Err(MeteoError::InvalidProfile(format!(
                "relative humidity range must stay within [0, {RH_HARD_MAX}]"
            )));
        }
        Ok(())
    }
}

/// Generates `n_days` of synthetic daily weather starting 1999-01-01.
///
/// Deterministic in `(profile, seed)`. Every record satisfies the hard
/// record invariants; RH above 100 can occur only if the profile allows it
/// and then surfaces as a soft flag at parse time, mirroring real exports.
pub fn synthesize_dataset(
    profile: &StationProfile,
    n_days: usize,
    seed: u64,
) -> Result<Vec<MeteoRecord>, MeteoError> {
    profile.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = NaiveDate::from_ymd_opt(1999, 1, 1).expect("valid date");
    let mut records = Vec::with_capacity(n_days);
    for i in 0..n_days {
        let date = start + chrono::Duration::days(i as i64);
        let doy = chrono::Datelike::ordinal(&date) as f64;
        let phase = 2.0 * std::f64::consts::PI * (doy - profile.peak_day) / 365.25;

        let t_max = profile.t_max.sample(phase, &mut rng);
        let t_min = profile.t_min.sample(phase, &mut rng).min(t_max);
        let r_s = profile.r_s.sample(phase, &mut rng);
        let rh_max = profile.rh_max.sample(phase, &mut rng);
        let rh_min = profile.rh_min.sample(phase, &mut rng).min(rh_max);
        let u2 = profile.u2.sample(phase, &mut rng);

        records.push(MeteoRecord { date, t_max, t_min, r_s, rh_max, rh_min, u2 });
    }
    Ok(records)
}

/// Built-in profiles for the four benchmark stations, with ranges, means,
/// and spreads taken from twenty years of observed daily summaries.
pub mod stations {
    use super::{StationMeta, StationProfile, VariableProfile};

    /// Day of year of the warm-season peak used by all built-in profiles.
    const PEAK_DAY: f64 = 172.0;

    pub fn adana_meta() -> StationMeta {
        StationMeta {
            name: "Adana".into(),
            code: 1,
            longitude: 35.34,
            latitude: 37.00,
            altitude: 23.0,
        }
    }

    pub fn adana_profile() -> StationProfile {
        StationProfile {
            t_max: VariableProfile::new(5.30, 44.40, 25.74, 7.68, 0.90),
            t_min: VariableProfile::new(-3.20, 29.80, 14.85, 7.28, 0.90),
            r_s: VariableProfile::new(0.00, 33.68, 15.90, 6.98, 0.90),
            rh_max: VariableProfile::new(27.00, 100.00, 86.22, 11.38, -0.30),
            rh_min: VariableProfile::new(0.00, 96.00, 42.57, 17.09, -0.30),
            u2: VariableProfile::new(0.30, 6.00, 1.62, 0.70, 0.10),
            peak_day: PEAK_DAY,
        }
    }

    pub fn aksaray_meta() -> StationMeta {
        StationMeta {
            name: "Aksaray".into(),
            code: 2,
            longitude: 34.00,
            latitude: 38.37,
            altitude: 970.0,
        }
    }

    pub fn aksaray_profile() -> StationProfile {
        StationProfile {
            t_max: VariableProfile::new(-10.00, 40.00, 19.30, 10.06, 0.90),
            t_min: VariableProfile::new(-20.40, 25.60, 7.09, 8.05, 0.90),
            r_s: VariableProfile::new(0.69, 32.43, 16.98, 7.82, 0.90),
            rh_max: VariableProfile::new(20.00, 100.00, 71.40, 16.46, -0.30),
            rh_min: VariableProfile::new(0.00, 98.00, 37.69, 17.01, -0.30),
            u2: VariableProfile::new(0.30, 5.92, 1.58, 0.69, 0.10),
            peak_day: PEAK_DAY,
        }
    }

    pub fn isparta_meta() -> StationMeta {
        StationMeta {
            name: "Isparta".into(),
            code: 3,
            longitude: 30.57,
            latitude: 37.78,
            altitude: 997.0,
        }
    }

    pub fn isparta_profile() -> StationProfile {
        StationProfile {
            t_max: VariableProfile::new(-6.60, 42.30, 19.24, 9.49, 0.90),
            t_min: VariableProfile::new(-16.00, 23.30, 6.53, 7.19, 0.90),
            r_s: VariableProfile::new(0.00, 32.52, 15.30, 7.99, 0.90),
            rh_max: VariableProfile::new(14.00, 100.00, 81.44, 12.94, -0.30),
            rh_min: VariableProfile::new(0.00, 99.00, 40.93, 16.87, -0.30),
            u2: VariableProfile::new(0.00, 5.78, 1.32, 0.70, 0.10),
            peak_day: PEAK_DAY,
        }
    }

    pub fn nigde_meta() -> StationMeta {
        StationMeta {
            name: "Nigde".into(),
            code: 4,
            longitude: 34.68,
            latitude: 37.96,
            altitude: 1211.0,
        }
    }

    pub fn nigde_profile() -> StationProfile {
        StationProfile {
            t_max: VariableProfile::new(-10.30, 38.50, 18.51, 9.90, 0.90),
            t_min: VariableProfile::new(-19.80, 23.00, 6.02, 7.89, 0.90),
            r_s: VariableProfile::new(0.68, 35.10, 18.75, 8.38, 0.90),
            rh_max: VariableProfile::new(24.00, 104.00, 75.55, 15.13, -0.30),
            rh_min: VariableProfile::new(2.00, 96.00, 37.44, 17.49, -0.30),
            u2: VariableProfile::new(0.38, 7.95, 1.83, 0.70, 0.10),
            peak_day: PEAK_DAY,
        }
    }

    /// Looks up a built-in station by (case-insensitive) name.
    pub fn by_name(name: &str) -> Option<(StationMeta, StationProfile)> {
        match name.to_ascii_lowercase().as_str() {
            "adana" => Some((adana_meta(), adana_profile())),
            "aksaray" => Some((aksaray_meta(), aksaray_profile())),
            "isparta" => Some((isparta_meta(), isparta_profile())),
            "nigde" => Some((nigde_meta(), nigde_profile())),
            _ => None,
        }
    }

    /// All four built-in stations.
    pub fn all() -> Vec<(StationMeta, StationProfile)> {
        vec![
            (adana_meta(), adana_profile()),
            (aksaray_meta(), aksaray_profile()),
            (isparta_meta(), isparta_profile()),
            (nigde_meta(), nigde_profile()),
        ]
    }
}
