//! Daily reference evapotranspiration (ET₀) via FAO-56 Penman-Monteith.
//!
//! The chain goes: saturation vapor pressure at the temperature extremes,
//! actual vapor pressure from the relative-humidity extremes, the slope of
//! the saturation curve at mean temperature, the psychrometric constant
//! (fixed or altitude-derived), net radiation from measured shortwave
//! radiation, and finally the combination equation
//!
//! ```text
//! ET₀ = [0.408·Δ·(Rn − G) + γ·(900/(T+273))·u₂·(es − ea)]
//!       / [Δ + γ·(1 + 0.34·u₂)]
//! ```
//!
//! in mm day⁻¹. All functions are pure; identical inputs give bitwise
//! identical outputs.

use chrono::Datelike;
use thiserror::Error;

use crate::meteo::{MeteoRecord, StationMeta};

/// Solar constant, MJ m⁻² min⁻¹.
const SOLAR_CONSTANT: f64 = 0.0820;
/// Stefan-Boltzmann constant, MJ K⁻⁴ m⁻² day⁻¹.
const STEFAN_BOLTZMANN: f64 = 4.903e-9;
/// Pole of the saturation vapor pressure curve, °C.
const SVP_POLE: f64 = -237.3;
/// Latitudes beyond this see polar day/night, which the daily radiation
/// model does not handle.
const POLAR_LATITUDE: f64 = 66.5;

#[derive(Debug, Error)]
pub enum PmError {
    #[error("temperature {0} °C at or below the {SVP_POLE} °C pole")]
    DomainError(f64),
    #[error("t_min {t_min} exceeds t_max {t_max}")]
    OrderingError { t_max: f64, t_min: f64 },
    #[error("latitude {0}° outside the supported range (|lat| < {POLAR_LATITUDE}°)")]
    PolarLatitude(f64),
    #[error("invalid inputs: {0}")]
    InvalidInputs(String),
}

/// How the psychrometric constant γ is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GammaMode {
    /// The 0.066 kPa °C⁻¹ constant quoted for low-altitude stations.
    Fixed,
    /// Derived from station altitude via the standard-atmosphere pressure.
    #[default]
    AltitudeDerived,
}

/// Where net radiation comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RadiationInput {
    /// `r_s` is measured shortwave radiation; derive Rn from it.
    #[default]
    SolarShortwave,
    /// `r_s` already holds net radiation; use it directly.
    NetDirect,
}

/// Configuration for the ET₀ computation.
#[derive(Debug, Clone, Copy)]
pub struct PmOptions {
    pub gamma_mode: GammaMode,
    /// Soil heat flux density G, MJ m⁻² day⁻¹ (0 for daily steps).
    pub soil_heat_flux: f64,
    /// Reference surface albedo.
    pub albedo: f64,
    pub radiation: RadiationInput,
}

impl Default for PmOptions {
    fn default() -> Self {
        PmOptions {
            gamma_mode: GammaMode::AltitudeDerived,
            soil_heat_flux: 0.0,
            albedo: 0.23,
            radiation: RadiationInput::SolarShortwave,
        }
    }
}

/// The assembled terms of the combination equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PmInputs {
    /// Net radiation, MJ m⁻² day⁻¹.
    pub r_n: f64,
    /// Soil heat flux, MJ m⁻² day⁻¹.
    pub g: f64,
    /// Mean daily air temperature, °C.
    pub t_mean: f64,
    /// Wind speed at 2 m, m s⁻¹.
    pub u2: f64,
    /// Mean saturation vapor pressure, kPa.
    pub e_s: f64,
    /// Actual vapor pressure, kPa.
    pub e_a: f64,
    /// Slope of the saturation vapor pressure curve, kPa °C⁻¹.
    pub delta: f64,
    /// Psychrometric constant, kPa °C⁻¹.
    pub gamma: f64,
}

impl PmInputs {
    pub fn validate(&self) -> Result<(), PmError> {
        if self.e_a > self.e_s + 1e-9 {
            return Err(PmError::InvalidInputs(format!(
                "e_a {} exceeds e_s {}",
                self.e_a, self.e_s
            )));
        }
        if self.delta <= 0.0 {
            return Err(PmError::InvalidInputs(format!("delta {} not positive", self.delta)));
        }
        if self.gamma <= 0.0 {
            return Err(PmError::InvalidInputs(format!("gamma {} not positive", self.gamma)));
        }
        if self.u2 < 0.0 {
            return Err(PmError::InvalidInputs(format!("negative wind speed {}", self.u2)));
        }
        Ok(())
    }
}

/// Daily reference evapotranspiration, mm day⁻¹.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Et0Value(pub f64);

/// Saturation vapor pressure e°(T) in kPa: `0.6108·exp(17.27·T/(T+237.3))`.
pub fn sat_vapor_pressure(t: f64) -> Result<f64, PmError> {
    if t <= SVP_POLE {
        return Err(PmError::DomainError(t));
    }
    Ok(0.6108 * (17.27 * t / (t + 237.3)).exp())
}

/// Mean saturation vapor pressure over the day, `(e°(tmax)+e°(tmin))/2`.
pub fn mean_sat_vapor_pressure(t_max: f64, t_min: f64) -> Result<f64, PmError> {
    if t_min > t_max {
        return Err(PmError::OrderingError { t_max, t_min });
    }
    Ok((sat_vapor_pressure(t_max)? + sat_vapor_pressure(t_min)?) / 2.0)
}

/// Actual vapor pressure from the humidity extremes,
/// `[e°(tmin)·RHmax/100 + e°(tmax)·RHmin/100]/2`, clamped at saturation so
/// that RH readings above 100% cannot push e_a past e_s.
pub fn actual_vapor_pressure(
    t_max: f64,
    t_min: f64,
    rh_max: f64,
    rh_min: f64,
) -> Result<f64, PmError> {
    if t_min > t_max {
        return Err(PmError::OrderingError { t_max, t_min });
    }
    if rh_max < 0.0 || rh_min < 0.0 {
        return Err(PmError::InvalidInputs("negative relative humidity".into()));
    }
    let e_tmin = sat_vapor_pressure(t_min)?;
    let e_tmax = sat_vapor_pressure(t_max)?;
    let e_a = (e_tmin * rh_max / 100.0 + e_tmax * rh_min / 100.0) / 2.0;
    let e_s = (e_tmax + e_tmin) / 2.0;
    Ok(e_a.min(e_s))
}

/// Slope Δ of the saturation vapor pressure curve at `t_mean`,
/// `4098·e°(T)/(T+237.3)²` in kPa °C⁻¹.
pub fn svp_slope(t_mean: f64) -> Result<f64, PmError> {
    let e = sat_vapor_pressure(t_mean)?;
    let d = t_mean + 237.3;
    Ok(4098.0 * e / (d * d))
}

/// Psychrometric constant γ in kPa °C⁻¹.
pub fn psychrometric_constant(altitude: f64, mode: GammaMode) -> f64 {
    match mode {
        GammaMode::Fixed => 0.066,
        GammaMode::AltitudeDerived => {
            let pressure = 101.3 * ((293.0 - 0.0065 * altitude) / 293.0).powf(5.26);
            0.000665 * pressure
        }
    }
}

/// Extraterrestrial radiation Ra for a latitude and day of year,
/// MJ m⁻² day⁻¹.
pub fn extraterrestrial_radiation(latitude_deg: f64, day_of_year: u32) -> Result<f64, PmError> {
    if latitude_deg.abs() >= POLAR_LATITUDE {
        return Err(PmError::PolarLatitude(latitude_deg));
    }
    let j = day_of_year as f64;
    let dr = 1.0 + 0.033 * (2.0 * std::f64::consts::PI / 365.0 * j).cos();
    let decl = 0.409 * (2.0 * std::f64::consts::PI / 365.0 * j - 1.39).sin();
    let phi = latitude_deg.to_radians();
    let sunset_angle = (-phi.tan() * decl.tan()).clamp(-1.0, 1.0).acos();
    Ok((24.0 * 60.0 / std::f64::consts::PI)
        * SOLAR_CONSTANT
        * dr
        * (sunset_angle * phi.sin() * decl.sin() + phi.cos() * decl.cos() * sunset_angle.sin()))
}

/// Net radiation Rn = Rns − Rnl from measured shortwave radiation.
///
/// Rns is `(1−albedo)·r_s`. Rnl uses the Stefan-Boltzmann law with the
/// humidity correction `0.34 − 0.14·√e_a` and the cloudiness factor
/// `1.35·r_s/Rso − 0.35` clamped to [0.05, 1.0], so a sunless day yields
/// Rn = −Rnl ≤ 0 rather than a spurious longwave gain.
pub fn net_radiation(
    record: &MeteoRecord,
    station: &StationMeta,
    albedo: f64,
) -> Result<f64, PmError> {
    let ra = extraterrestrial_radiation(station.latitude, record.date.ordinal())?;
    let rso = (0.75 + 2e-5 * station.altitude) * ra;
    let rns = (1.0 - albedo) * record.r_s;
    let e_a = actual_vapor_pressure(record.t_max, record.t_min, record.rh_max, record.rh_min)?;
    let tk4 = ((record.t_max + 273.16).powi(4) + (record.t_min + 273.16).powi(4)) / 2.0;
    let cloudiness = if rso > 0.0 {
        (1.35 * record.r_s / rso - 0.35).clamp(0.05, 1.0)
    } else {
        0.05
    };
    let rnl = STEFAN_BOLTZMANN * tk4 * (0.34 - 0.14 * e_a.sqrt()) * cloudiness;
    Ok(rns - rnl)
}

/// Evaluates the combination equation on pre-assembled terms.
pub fn et0_from_inputs(inputs: &PmInputs) -> Result<Et0Value, PmError> {
    inputs.validate()?;
    let numerator = 0.408 * inputs.delta * (inputs.r_n - inputs.g)
        + inputs.gamma * (900.0 / (inputs.t_mean + 273.0)) * inputs.u2 * (inputs.e_s - inputs.e_a);
    let denominator = inputs.delta + inputs.gamma * (1.0 + 0.34 * inputs.u2);
    let value = numerator / denominator;
    if !value.is_finite() {
        return Err(PmError::InvalidInputs("non-finite ET0".into()));
    }
    Ok(Et0Value(value))
}

/// Assembles the combination-equation terms for one weather record.
pub fn assemble_inputs(
    record: &MeteoRecord,
    station: &StationMeta,
    options: &PmOptions,
) -> Result<PmInputs, PmError> {
    let t_mean = (record.t_max + record.t_min) / 2.0;
    let e_s = mean_sat_vapor_pressure(record.t_max, record.t_min)?;
    let e_a = actual_vapor_pressure(record.t_max, record.t_min, record.rh_max, record.rh_min)?;
    let delta = svp_slope(t_mean)?;
    let gamma = psychrometric_constant(station.altitude, options.gamma_mode);
    let r_n = match options.radiation {
        RadiationInput::SolarShortwave => net_radiation(record, station, options.albedo)?,
        RadiationInput::NetDirect => record.r_s,
    };
    Ok(PmInputs {
        r_n,
        g: options.soil_heat_flux,
        t_mean,
        u2: record.u2,
        e_s,
        e_a,
        delta,
        gamma,
    })
}

/// Daily ET₀ for one weather record at one station.
pub fn et0_penman_monteith(
    record: &MeteoRecord,
    station: &StationMeta,
    options: &PmOptions,
) -> Result<Et0Value, PmError> {
    let inputs = assemble_inputs(record, station, options)?;
    et0_from_inputs(&inputs)
}
