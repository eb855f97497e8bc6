//! Closed-form pair-generation probabilities per pump pulse in the four
//! asymptotic regimes (filtered/unfiltered channel, short/long-pulse ring).

use std::f64::consts::PI;

use serde::Serialize;

use crate::model::{ChannelGeometry, FilterSpec, PumpSpec, RingGeometry};
use crate::scales::{sinc_half_root, DerivedScales};
use crate::units::sinc;
use crate::{Error, Result};

/// Default factor read into "≪" / "≫".
pub const DEFAULT_REGIME_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    ChannelFiltered,
    ChannelUnfiltered,
    RingShortPulse,
    RingLongPulse,
}

/// One "x ≪ y" assumption, stored as the ratio x / y.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidityCheck {
    pub condition: &'static str,
    pub ratio: f64,
    pub passed: bool,
}

impl ValidityCheck {
    fn new(condition: &'static str, ratio: f64) -> Self {
        ValidityCheck { condition, ratio, passed: ratio * DEFAULT_REGIME_FACTOR <= 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairRateResult {
    pub n_pairs: f64,
    pub regime: Regime,
    pub validity: Vec<ValidityCheck>,
}

impl PairRateResult {
    pub fn in_regime(&self) -> bool {
        self.validity.iter().all(|c| c.passed)
    }

    /// Re-evaluates the validity flags with a different "≪" factor.
    pub fn with_regime_factor(mut self, factor: f64) -> Self {
        for c in &mut self.validity {
            c.passed = c.ratio * factor <= 1.0;
        }
        self
    }
}

fn pulse_duration(pump: &PumpSpec, formula: &str) -> Result<f64> {
    pump.duration().ok_or_else(|| {
        Error::Regime(format!(
            "{formula} needs a pulsed pump; use the CW limiting powers for CW designs"
        ))
    })
}

/// (γPL)² T B sinc²(β₂Ω²L/2), per filter.
pub fn n_pairs_channel_filtered(
    scales: &DerivedScales,
    pump: &PumpSpec,
    chan: &ChannelGeometry,
    filter: &FilterSpec,
) -> Result<PairRateResult> {
    let t = pulse_duration(pump, "filtered channel rate")?;
    let gpl = scales.gamma * pump.power * chan.length;
    let phase = chan.beta2 * filter.detuning.powi(2) * chan.length / 2.0;
    let ratio = match (scales.delta_p, scales.delta_m) {
        (Some(dp), Some(dm)) => dp / dm,
        _ => 0.0,
    };
    Ok(PairRateResult {
        n_pairs: gpl * gpl * t * filter.bandwidth * sinc(phase).powi(2),
        regime: Regime::ChannelFiltered,
        validity: vec![ValidityCheck::new("delta_P << delta_M", ratio)],
    })
}

/// (L/L_NL)² (2/3) √(L_D / (2πL)).
pub fn unfiltered_from_lengths(length: f64, l_nl: f64, l_d: f64) -> f64 {
    (length / l_nl).powi(2) * (2.0 / 3.0) * (l_d / (2.0 * PI * length)).sqrt()
}

/// (γPL)² (2/3) √(T² / (2π|β₂|L)), integrated over the generation bandwidth.
pub fn n_pairs_channel_unfiltered(
    scales: &DerivedScales,
    pump: &PumpSpec,
    chan: &ChannelGeometry,
) -> Result<PairRateResult> {
    let t = pulse_duration(pump, "unfiltered channel rate")?;
    if chan.beta2 == 0.0 {
        return Err(Error::Dispersionless("dispersion length"));
    }
    let gpl = scales.gamma * pump.power * chan.length;
    let n = gpl * gpl * (2.0 / 3.0) * (t * t / (2.0 * PI * chan.beta2.abs() * chan.length)).sqrt();
    let l_d = t * t / chan.beta2.abs();
    Ok(PairRateResult {
        n_pairs: n,
        regime: Regime::ChannelUnfiltered,
        validity: vec![ValidityCheck::new("L << L_D/a", chan.length * sinc_half_root() / l_d)],
    })
}

fn ring_velocity(scales: &DerivedScales, ring: &RingGeometry) -> f64 {
    scales.v_g.unwrap_or_else(|| ring.group_velocity())
}

/// (γPL)² (1/2) (T v_g / L)⁴, for Δ_P ≫ Δ_R.
pub fn n_pairs_ring_short(scales: &DerivedScales, pump: &PumpSpec, ring: &RingGeometry) -> Result<PairRateResult> {
    let t = pulse_duration(pump, "short-pulse ring rate")?;
    let l = ring.circumference;
    let gpl = scales.gamma * pump.power * l;
    let x = t * ring_velocity(scales, ring) / l;
    let dr = scales.delta_r.unwrap_or(pump.omega() / ring.q_factor);
    Ok(PairRateResult {
        n_pairs: 0.5 * gpl * gpl * x.powi(4),
        regime: Regime::RingShortPulse,
        validity: vec![ValidityCheck::new("delta_R << delta_P", dr * t / (4.0 * sinc_half_root()))],
    })
}

/// (γPL)² (v_g / 2L) |F(ω_P)|⁶ T, for Δ_P ≪ Δ_R.
pub fn n_pairs_ring_long(scales: &DerivedScales, pump: &PumpSpec, ring: &RingGeometry) -> Result<PairRateResult> {
    let t = pulse_duration(pump, "long-pulse ring rate")?;
    let f2 = scales
        .f_res_sq
        .ok_or_else(|| Error::Regime("long-pulse ring rate needs the resonant enhancement (Q)".into()))?;
    let l = ring.circumference;
    let v_g = ring_velocity(scales, ring);
    let gpl = scales.gamma * pump.power * l;
    Ok(PairRateResult {
        n_pairs: gpl * gpl * v_g / (2.0 * l) * f2.powi(3) * t,
        regime: Regime::RingLongPulse,
        validity: vec![ValidityCheck::new(
            "a L |F|^2 / v_g << T",
            sinc_half_root() * l * f2 / (v_g * t),
        )],
    })
}
