//! Spectral pump amplitudes φ_P(x), x = ω − ω_P.
//!
//! Every shape is scaled so that ∫|(φ_P ∗ φ_P)(S)|² dS = 4π/T. With that
//! normalisation the dispersionless long-pulse limit of the pair integral
//! reduces to (γPL)² T B for a hard-edge filter of width 2πB, which pins
//! the otherwise unstated convention for ∫|φ_P|².

use std::f64::consts::{LN_2, PI, SQRT_2};

use crate::model::{PumpShape, PumpSpec};
use crate::units::sinc;
use crate::{Error, Result};

#[derive(Debug, Clone)]
enum Profile {
    /// T sinc(xT/2)
    Rect { t: f64 },
    /// τ√(2π) exp(−x²τ²/2), τ = T / (2√ln2)
    Gaussian { tau: f64 },
    /// π t₀ sech(π t₀ x / 2), t₀ = T / (2 acosh √2)
    Sech { t0: f64 },
    Samples { start: f64, step: f64, values: Vec<f64> },
}

#[derive(Debug, Clone)]
pub struct PumpWaveform {
    profile: Profile,
    scale: f64,
    fwhm: f64,
    /// Periods of the flat-top spectrum kept on each side of the carrier.
    rect_periods: f64,
}

impl PumpWaveform {
    pub fn new(pump: &PumpSpec, rect_periods: f64) -> Result<Self> {
        let t = pump.duration().ok_or_else(|| {
            Error::Regime("the oracle needs a pulsed pump; model CW as a long pulse (see PumpSpec::cw_equivalent)".into())
        })?;
        // 1 / (2π² T ∫p⁴ dt) = scale⁴ for φ = scale · FT[p]
        let (profile, p4) = match &pump.shape {
            PumpShape::Rect => (Profile::Rect { t }, t),
            PumpShape::Gaussian => {
                let tau = t / (2.0 * LN_2.sqrt());
                (Profile::Gaussian { tau }, tau * (PI / 2.0).sqrt())
            }
            PumpShape::Sech => {
                let t0 = t / (2.0 * SQRT_2.acosh());
                (Profile::Sech { t0 }, 4.0 * t0 / 3.0)
            }
            PumpShape::Custom { detuning, amplitude } => {
                let step = detuning[1] - detuning[0];
                let uniform = detuning.windows(2).all(|w| ((w[1] - w[0]) - step).abs() <= 1e-9 * step.abs());
                if !uniform {
                    return Err(Error::invalid("custom pump samples must be uniformly spaced"));
                }
                let values: Vec<f64> = amplitude.iter().map(|a| a.abs()).collect();
                let j = autoconvolution_energy(&values, step);
                if !(j > 0.0) {
                    return Err(Error::invalid("custom pump samples are all zero"));
                }
                let scale = (4.0 * PI / (t * j)).powf(0.25);
                return Ok(PumpWaveform {
                    profile: Profile::Samples { start: detuning[0], step, values },
                    scale,
                    fwhm: t,
                    rect_periods,
                });
            }
        };
        Ok(PumpWaveform {
            profile,
            scale: (1.0 / (2.0 * PI * PI * t * p4)).powf(0.25),
            fwhm: t,
            rect_periods,
        })
    }

    pub fn fwhm(&self) -> f64 {
        self.fwhm
    }

    pub fn amplitude(&self, x: f64) -> f64 {
        self.scale
            * match &self.profile {
                Profile::Rect { t } => t * sinc(0.5 * x * t),
                Profile::Gaussian { tau } => tau * (2.0 * PI).sqrt() * (-0.5 * (x * tau).powi(2)).exp(),
                Profile::Sech { t0 } => PI * t0 / (0.5 * PI * t0 * x).cosh(),
                Profile::Samples { start, step, values } => {
                    let u = (x - start) / step;
                    if u < 0.0 || u > (values.len() - 1) as f64 {
                        0.0
                    } else {
                        let i = (u.floor() as usize).min(values.len() - 2);
                        let frac = u - i as f64;
                        values[i] * (1.0 - frac) + values[i + 1] * frac
                    }
                }
            }
    }

    /// Half-width of the detuning window outside which φ_P is neglected.
    pub fn extent(&self) -> f64 {
        match &self.profile {
            Profile::Rect { t } => self.rect_periods * 2.0 * PI / t,
            Profile::Gaussian { tau } => 8.5 / tau,
            Profile::Sech { t0 } => 22.0 / t0,
            Profile::Samples { start, step, values } => {
                let end = start + step * (values.len() - 1) as f64;
                start.abs().max(end.abs())
            }
        }
    }

    /// Natural panel width for quadrature over the pump spectrum.
    pub fn panel_width(&self) -> f64 {
        match &self.profile {
            Profile::Rect { t } => 2.0 * PI / t,
            Profile::Gaussian { tau } => 1.0 / tau,
            Profile::Sech { t0 } => 1.0 / t0,
            Profile::Samples { step, values, .. } => step * (values.len() as f64 / 32.0).max(1.0),
        }
    }
}

/// ∫ |(g ∗ g)(S)|² dS for uniformly sampled g (trapezoid on both levels).
fn autoconvolution_energy(values: &[f64], step: f64) -> f64 {
    let n = values.len();
    let mut total = 0.0;
    for k in 0..(2 * n - 1) {
        let lo = k.saturating_sub(n - 1);
        let hi = k.min(n - 1);
        let conv: f64 = (lo..=hi).map(|i| values[i] * values[k - i]).sum::<f64>() * step;
        total += conv * conv;
    }
    total * step
}
