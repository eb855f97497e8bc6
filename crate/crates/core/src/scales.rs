//! Derived nonlinear and dispersive scales: γ, L_NL, L_D, the pump,
//! phase-matching and resonance bandwidths, and ring field enhancement.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::Serialize;

use crate::model::{validate_design, Coupling, Material, PumpSpec, RingGeometry, Structure};
use crate::units::sinc;
use crate::{Error, Result};

const ROOT_TOL: f64 = 1e-12;

/// Bisection on a sign-changing bracket.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> Option<f64> {
    let mut f_lo = f(lo);
    if f_lo == 0.0 {
        return Some(lo);
    }
    if f_lo.signum() == f(hi).signum() {
        return None;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Some(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Positive root `a` of sinc(x) = 1/2.
pub fn sinc_half_root() -> f64 {
    static ROOT: OnceLock<f64> = OnceLock::new();
    *ROOT.get_or_init(|| bisect(|x| sinc(x) - 0.5, 1.0, 3.0, ROOT_TOL).expect("bracketed"))
}

/// Positive root `s` of sinc²(x) = 1/2.
pub fn sincsq_half_root() -> f64 {
    static ROOT: OnceLock<f64> = OnceLock::new();
    *ROOT.get_or_init(|| {
        bisect(|x| sinc(x).powi(2) - 0.5, 0.5, 2.0, ROOT_TOL).expect("bracketed")
    })
}

/// γ = 2π n₂ / (λ A_eff), W⁻¹m⁻¹.
pub fn compute_gamma(material: &Material, a_eff: f64, wavelength: f64) -> f64 {
    2.0 * PI * material.n2 / (wavelength * a_eff)
}

/// γ for a structure, preferring a tabulated override.
pub fn structure_gamma(material: &Material, structure: &Structure, wavelength: f64) -> f64 {
    structure
        .gamma_override()
        .unwrap_or_else(|| compute_gamma(material, structure.a_eff(), wavelength))
}

/// Δ_M ≈ 4 √(a / (|β₂| L)).
pub fn phase_matching_bandwidth(beta2: f64, length: f64) -> Result<f64> {
    if beta2 == 0.0 {
        return Err(Error::Dispersionless("phase-matching bandwidth"));
    }
    Ok(4.0 * (sinc_half_root() / (beta2.abs() * length)).sqrt())
}

/// Δ_P ≈ 4a / T.
pub fn pump_bandwidth(fwhm: f64) -> f64 {
    4.0 * sinc_half_root() / fwhm
}

/// Δ_R ≈ ω_P / Q.
pub fn resonance_bandwidth(omega_p: f64, q_factor: f64) -> f64 {
    omega_p / q_factor
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Default)]
pub struct Bandwidths {
    pub delta_m: Option<f64>,
    pub delta_p: Option<f64>,
    pub delta_r: Option<f64>,
}

/// The bandwidths applicable to a structure and pump. Channels always
/// report Δ_M, so a dispersionless channel is an error here.
pub fn bandwidths(structure: &Structure, pump: &PumpSpec) -> Result<Bandwidths> {
    let delta_p = pump.duration().map(pump_bandwidth);
    Ok(match structure {
        Structure::Channel(c) => Bandwidths {
            delta_m: Some(phase_matching_bandwidth(c.beta2, c.length)?),
            delta_p,
            delta_r: None,
        },
        Structure::Ring(r) => Bandwidths {
            delta_m: None,
            delta_p,
            delta_r: Some(resonance_bandwidth(pump.omega(), r.q_factor)),
        },
    })
}

/// On-resonance |F(ω_P)|² = 4 v_g Q / (ω_P L).
pub fn resonant_enhancement(ring: &RingGeometry, omega_p: f64) -> f64 {
    4.0 * ring.group_velocity() * ring.q_factor / (omega_p * ring.circumference)
}

/// Coupling coefficients of a ring: the explicit override, or the lossless
/// (κ² + σ² = 1) coupling whose exact linewidth equals ω_P / Q.
pub fn ring_coupling(ring: &RingGeometry, omega_p: f64) -> Result<Coupling> {
    if let Some(c) = ring.coupling {
        if !(c.sigma < 1.0) || c.sigma <= 0.0 {
            return Err(Error::Coupling(format!("sigma = {} must lie in (0, 1)", c.sigma)));
        }
        return Ok(c);
    }
    // Half-width in round-trip phase, then solve |1 - σe^{iδ}|² = 2(1 - σ)².
    let half_phase = resonance_bandwidth(omega_p, ring.q_factor) * ring.circumference
        / (2.0 * ring.group_velocity());
    if half_phase >= PI / 2.0 {
        return Err(Error::Coupling(format!(
            "linewidth exceeds half the free spectral range (Q = {})",
            ring.q_factor
        )));
    }
    let b = 2.0 - half_phase.cos();
    let sigma = b - (b * b - 1.0).sqrt();
    Ok(Coupling { kappa: (1.0 - sigma * sigma).sqrt(), sigma })
}

/// General ring enhancement F(ω) = iκ / (1 − σ e^{ik(ω)L}) with the
/// linear dispersion k(ω)L = 2πm + (ω − ω_P)L / v_g, so ω_P is resonant.
pub fn field_enhancement(omega: f64, ring: &RingGeometry, omega_p: f64) -> Result<Complex64> {
    let c = ring_coupling(ring, omega_p)?;
    Ok(airy_factor(omega, ring.circumference / ring.group_velocity(), c, omega_p))
}

pub(crate) fn airy_factor(omega: f64, transit: f64, c: Coupling, omega_p: f64) -> Complex64 {
    let phase = (omega - omega_p) * transit;
    Complex64::i() * c.kappa / (1.0 - c.sigma * Complex64::from_polar(1.0, phase))
}

/// Single-resonance Lorentzian approximation of F about `centre`.
pub fn lorentzian_enhancement(omega: f64, centre: f64, ring: &RingGeometry, omega_p: f64) -> Complex64 {
    let peak = Complex64::i() * resonant_enhancement(ring, omega_p).sqrt();
    let half_width = 0.5 * resonance_bandwidth(omega_p, ring.q_factor);
    peak / Complex64::new(1.0, -(omega - centre) / half_width)
}

/// Derived scales of a design. Fields that do not apply are `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivedScales {
    pub omega_p: f64,
    pub gamma: f64,
    /// (γP)⁻¹; undefined at zero power.
    pub l_nl: Option<f64>,
    /// T² / |β₂|; pulsed pump with β₂ ≠ 0.
    pub l_d: Option<f64>,
    pub delta_m: Option<f64>,
    pub delta_p: Option<f64>,
    pub delta_r: Option<f64>,
    pub v_g: Option<f64>,
    pub f_res_sq: Option<f64>,
}

impl DerivedScales {
    /// |F(ω_P)|² for rings, 1 for channels.
    pub fn enhancement(&self) -> f64 {
        self.f_res_sq.unwrap_or(1.0)
    }
}

pub fn derive_scales(material: &Material, structure: &Structure, pump: &PumpSpec) -> Result<DerivedScales> {
    let valid = validate_design(material, structure, pump).into_result()?;
    let omega_p = valid.omega_p;
    let gamma = structure_gamma(material, structure, pump.wavelength);
    let beta2 = structure.beta2();
    let t = pump.duration();
    let (delta_m, delta_r, f_res_sq) = match structure {
        Structure::Channel(c) => (phase_matching_bandwidth(c.beta2, c.length).ok(), None, None),
        Structure::Ring(r) => (
            None,
            Some(resonance_bandwidth(omega_p, r.q_factor)),
            Some(resonant_enhancement(r, omega_p)),
        ),
    };
    Ok(DerivedScales {
        omega_p,
        gamma,
        l_nl: (pump.power > 0.0).then(|| 1.0 / (gamma * pump.power)),
        l_d: t.filter(|_| beta2 != 0.0).map(|t| t * t / beta2.abs()),
        delta_m,
        delta_p: t.map(pump_bandwidth),
        delta_r,
        v_g: valid.v_g,
        f_res_sq,
    })
}
