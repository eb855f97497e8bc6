//! Domain types for materials, source structures, pumps and filters.

use serde::{Deserialize, Serialize};

use crate::scales;
use crate::units::{angular_frequency, SPEED_OF_LIGHT};

/// How a tabulated coefficient should be read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    #[default]
    Exact,
    /// The tabulated value is an upper limit ("< x"), so any power derived
    /// from it inversely is a lower limit.
    Upper,
}

/// Optical constants of a nonlinear medium, SI units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub name: String,
    /// Nonlinear index, m²/W.
    pub n2: f64,
    /// Two-photon absorption coefficient, m/W.
    pub beta_tpa: f64,
    #[serde(default)]
    pub beta_tpa_bound: Bound,
    /// Free-carrier absorption cross-section, m².
    pub sigma_fca: f64,
    /// Free-carrier lifetime, s.
    pub tau_c: f64,
}

impl Material {
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.n2 > 0.0) {
            v.push(format!("material {}: n2 > 0", self.name));
        }
        for (label, value) in [
            ("beta_tpa", self.beta_tpa),
            ("sigma_fca", self.sigma_fca),
            ("tau_c", self.tau_c),
        ] {
            if !(value >= 0.0) {
                v.push(format!("material {}: {label} >= 0", self.name));
            }
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelGeometry {
    /// m
    pub length: f64,
    /// m²
    pub a_eff: f64,
    /// Group-velocity dispersion, s²/m.
    pub beta2: f64,
    /// Tabulated nonlinear parameter, W⁻¹m⁻¹. Overrides the value computed
    /// from the material and effective area when present.
    #[serde(default)]
    pub gamma: Option<f64>,
}

/// Cross- and self-coupling coefficients of a ring.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub kappa: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RingGeometry {
    /// Round-trip length 2πR, m.
    pub circumference: f64,
    /// m²
    pub a_eff: f64,
    /// Loaded quality factor.
    pub q_factor: f64,
    pub n_eff: f64,
    /// Group index; replaces `n_eff` in v_g when given.
    #[serde(default)]
    pub group_index: Option<f64>,
    #[serde(default)]
    pub beta2: f64,
    #[serde(default)]
    pub coupling: Option<Coupling>,
    #[serde(default)]
    pub gamma: Option<f64>,
}

impl RingGeometry {
    pub fn group_velocity(&self) -> f64 {
        SPEED_OF_LIGHT / self.group_index.unwrap_or(self.n_eff)
    }

    /// Free spectral range in angular frequency, 2π v_g / L.
    pub fn fsr(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.group_velocity() / self.circumference
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Structure {
    Channel(ChannelGeometry),
    Ring(RingGeometry),
}

impl Structure {
    pub fn length(&self) -> f64 {
        match self {
            Structure::Channel(c) => c.length,
            Structure::Ring(r) => r.circumference,
        }
    }

    pub fn a_eff(&self) -> f64 {
        match self {
            Structure::Channel(c) => c.a_eff,
            Structure::Ring(r) => r.a_eff,
        }
    }

    pub fn beta2(&self) -> f64 {
        match self {
            Structure::Channel(c) => c.beta2,
            Structure::Ring(r) => r.beta2,
        }
    }

    pub fn gamma_override(&self) -> Option<f64> {
        match self {
            Structure::Channel(c) => c.gamma,
            Structure::Ring(r) => r.gamma,
        }
    }

    pub fn ring(&self) -> Option<&RingGeometry> {
        match self {
            Structure::Ring(r) => Some(r),
            Structure::Channel(_) => None,
        }
    }

    pub fn is_ring(&self) -> bool {
        matches!(self, Structure::Ring(_))
    }

    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let positive = |v: &mut Vec<String>, label: &str, x: f64| {
            if !(x > 0.0 && x.is_finite()) {
                v.push(format!("{label} > 0"));
            }
        };
        match self {
            Structure::Channel(c) => {
                positive(&mut v, "length", c.length);
                positive(&mut v, "a_eff", c.a_eff);
                if !c.beta2.is_finite() {
                    v.push("beta2 finite".into());
                }
                if let Some(g) = c.gamma {
                    positive(&mut v, "gamma", g);
                }
            }
            Structure::Ring(r) => {
                positive(&mut v, "circumference", r.circumference);
                positive(&mut v, "a_eff", r.a_eff);
                positive(&mut v, "n_eff", r.n_eff);
                if let Some(ng) = r.group_index {
                    positive(&mut v, "group_index", ng);
                }
                if !(r.q_factor > 1.0) {
                    v.push("q_factor > 1".into());
                }
                if let Some(cp) = r.coupling {
                    if !(cp.sigma > 0.0 && cp.sigma < 1.0) {
                        v.push("0 < sigma < 1".into());
                    }
                    if cp.kappa * cp.kappa + cp.sigma * cp.sigma > 1.0 + 1e-12 {
                        v.push("kappa^2 + sigma^2 <= 1".into());
                    }
                }
                if let Some(g) = r.gamma {
                    positive(&mut v, "gamma", g);
                }
            }
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PumpMode {
    Cw,
    Pulsed,
}

/// Temporal envelope of the pump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PumpShape {
    /// Flat-top pulse of duration T.
    #[default]
    Rect,
    Gaussian,
    Sech,
    /// Spectral amplitude samples |φ_P| on a uniform detuning grid
    /// (rad/s, relative to ω_P). Normalised on use.
    Custom { detuning: Vec<f64>, amplitude: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PumpSpec {
    pub mode: PumpMode,
    /// Vacuum centre wavelength, m.
    pub wavelength: f64,
    /// Peak-referenced power P, W. For pulses P = ħω_P N_pump / T.
    pub power: f64,
    /// Intensity FWHM T, s (pulsed only).
    #[serde(default)]
    pub fwhm: Option<f64>,
    /// Repetition rate f, Hz (pulsed only).
    #[serde(default)]
    pub rep_rate: Option<f64>,
    #[serde(default)]
    pub shape: PumpShape,
}

impl PumpSpec {
    pub fn cw(wavelength: f64, power: f64) -> Self {
        PumpSpec {
            mode: PumpMode::Cw,
            wavelength,
            power,
            fwhm: None,
            rep_rate: None,
            shape: PumpShape::Rect,
        }
    }

    pub fn pulsed(wavelength: f64, power: f64, fwhm: f64, rep_rate: f64) -> Self {
        PumpSpec {
            mode: PumpMode::Pulsed,
            wavelength,
            power,
            fwhm: Some(fwhm),
            rep_rate: Some(rep_rate),
            shape: PumpShape::Rect,
        }
    }

    pub fn with_shape(mut self, shape: PumpShape) -> Self {
        self.shape = shape;
        self
    }

    pub fn with_power(mut self, power: f64) -> Self {
        self.power = power;
        self
    }

    /// A pulsed stand-in for a CW pump: the pulse is long enough that
    /// Δ_P = Δ_target / 100, at 50% duty cycle.
    pub fn cw_equivalent(&self, target_bandwidth: f64) -> Self {
        let t = 100.0 * scales::pump_bandwidth(1.0) / target_bandwidth;
        PumpSpec {
            mode: PumpMode::Pulsed,
            fwhm: Some(t),
            rep_rate: Some(0.5 / t),
            ..self.clone()
        }
    }

    pub fn omega(&self) -> f64 {
        angular_frequency(self.wavelength)
    }

    pub fn is_pulsed(&self) -> bool {
        self.mode == PumpMode::Pulsed
    }

    /// Pulse duration for pulsed pumps.
    pub fn duration(&self) -> Option<f64> {
        match self.mode {
            PumpMode::Pulsed => self.fwhm,
            PumpMode::Cw => None,
        }
    }

    pub fn average_power(&self) -> f64 {
        match (self.mode, self.fwhm, self.rep_rate) {
            (PumpMode::Pulsed, Some(t), Some(f)) => self.power * f * t,
            _ => self.power,
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.wavelength > 0.0 && self.wavelength.is_finite()) {
            v.push("wavelength > 0".into());
        }
        if !(self.power >= 0.0 && self.power.is_finite()) {
            v.push("power >= 0".into());
        }
        if self.mode == PumpMode::Pulsed {
            match self.fwhm {
                Some(t) if t > 0.0 && t.is_finite() => {}
                _ => v.push("fwhm > 0".into()),
            }
            match self.rep_rate {
                Some(f) if f > 0.0 && f.is_finite() => {
                    if let Some(t) = self.fwhm {
                        if f * t > 1.0 {
                            v.push("duty cycle f*T <= 1".into());
                        }
                    }
                }
                _ => v.push("rep_rate > 0".into()),
            }
        }
        if let PumpShape::Custom { detuning, amplitude } = &self.shape {
            if detuning.len() != amplitude.len() || detuning.len() < 3 {
                v.push("custom pump samples: matching lengths >= 3".into());
            } else if detuning.windows(2).any(|w| !(w[1] > w[0])) {
                v.push("custom pump detuning strictly increasing".into());
            }
        }
        v
    }
}

/// Hard-edge spectral filter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    /// B in Hz; the angular passband is 2πB wide.
    pub bandwidth: f64,
    /// Ω, rad/s, offset of the passband centre from ω_P.
    #[serde(default)]
    pub detuning: f64,
}

impl FilterSpec {
    pub fn new(bandwidth: f64, detuning: f64) -> Self {
        FilterSpec { bandwidth, detuning }
    }

    /// Angular passband `[lo, hi]` as absolute frequencies.
    pub fn passband(&self, omega_p: f64) -> (f64, f64) {
        let half = std::f64::consts::PI * self.bandwidth;
        let centre = omega_p + self.detuning;
        (centre - half, centre + half)
    }

    pub fn violations(&self) -> Vec<String> {
        if self.bandwidth > 0.0 && self.bandwidth.is_finite() && self.detuning.is_finite() {
            Vec::new()
        } else {
            vec!["filter bandwidth > 0".into()]
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidDesign {
    pub omega_p: f64,
    /// Group velocity (rings only).
    pub v_g: Option<f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ValidationResult {
    Ok(ValidDesign),
    Invalid(Vec<String>),
}

impl ValidationResult {
    pub fn is_ok(&self) -> bool {
        matches!(self, ValidationResult::Ok(_))
    }

    pub fn into_result(self) -> crate::Result<ValidDesign> {
        match self {
            ValidationResult::Ok(d) => Ok(d),
            ValidationResult::Invalid(v) => Err(crate::Error::Validation(v)),
        }
    }
}

/// Checks every invariant of a design and flags regime warnings.
pub fn validate_design(
    material: &Material,
    structure: &Structure,
    pump: &PumpSpec,
) -> ValidationResult {
    let mut violations = material.violations();
    violations.extend(structure.violations());
    violations.extend(pump.violations());
    if !violations.is_empty() {
        return ValidationResult::Invalid(violations);
    }

    let omega_p = pump.omega();
    let mut warnings = Vec::new();
    if let Some(t) = pump.duration() {
        let delta_p = scales::pump_bandwidth(t);
        match structure {
            Structure::Ring(ring) => {
                let ratio = delta_p / scales::resonance_bandwidth(omega_p, ring.q_factor);
                if ratio > 0.1 && ratio < 10.0 {
                    warnings.push(format!(
                        "intermediate pulse regime: delta_P/delta_R = {ratio:.3}; \
                         neither short- nor long-pulse ring formula applies"
                    ));
                }
            }
            Structure::Channel(chan) => {
                if chan.beta2 != 0.0 {
                    let delta_m = 4.0 * (scales::sinc_half_root() / (chan.beta2.abs() * chan.length)).sqrt();
                    let ratio = delta_p / delta_m;
                    if ratio > 0.1 {
                        warnings.push(format!(
                            "long-pulse assumption weak: delta_P/delta_M = {ratio:.3}"
                        ));
                    }
                }
            }
        }
    }
    ValidationResult::Ok(ValidDesign {
        omega_p,
        v_g: structure.ring().map(RingGeometry::group_velocity),
        warnings,
    })
}
