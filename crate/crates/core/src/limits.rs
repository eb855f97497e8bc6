//! Limiting pump powers (multi-pair, XPM, SPM, TPA, FCA) and the
//! classifier that picks the binding constraint for a design.
//!
//! Ring bookkeeping: the XPM/SPM, TPA and FCA limits are channel formulas
//! applied to the intracavity power, so they are divided by |F(ω_P)|².
//! The ring multi-pair limits already contain F and are not divided.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{Bound, FilterSpec, Material, PumpSpec, Structure};
use crate::rates::DEFAULT_REGIME_FACTOR;
use crate::scales::{derive_scales, sincsq_half_root, DerivedScales};
use crate::units::HBAR;
use crate::{Error, Result};

/// A limiting power in watts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "watts", rename_all = "snake_case")]
pub enum LimitPower {
    Finite(f64),
    /// The true limit is at least this large (derived from an upper-bound
    /// material constant).
    LowerBound(f64),
    Unbounded,
}

impl LimitPower {
    /// Value used for ordering; unbounded limits sort as +∞.
    pub fn watts(&self) -> f64 {
        match *self {
            LimitPower::Finite(w) | LimitPower::LowerBound(w) => w,
            LimitPower::Unbounded => f64::INFINITY,
        }
    }

    pub fn is_finite(&self) -> bool {
        !matches!(self, LimitPower::Unbounded)
    }

    fn scale(self, factor: f64) -> Self {
        match self {
            LimitPower::Finite(w) => LimitPower::Finite(w * factor),
            LimitPower::LowerBound(w) => LimitPower::LowerBound(w * factor),
            LimitPower::Unbounded => LimitPower::Unbounded,
        }
    }
}

impl fmt::Display for LimitPower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            LimitPower::Finite(w) => f.write_str(&format_sig3(w)),
            LimitPower::LowerBound(w) => write!(f, ">{}", format_sig3(w)),
            LimitPower::Unbounded => f.write_str("∞"),
        }
    }
}

/// Three significant figures, fixed notation between 1e-3 and 1e4.
pub fn format_sig3(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return "∞".into();
    }
    let step = 10f64.powi(x.abs().log10().floor() as i32 - 2);
    let rounded = (x / step).round() * step;
    let mag = rounded.abs().log10().floor() as i32;
    if (-3..4).contains(&mag) {
        let decimals = (2 - mag).max(0) as usize;
        format!("{rounded:.decimals$}")
    } else {
        format!("{x:.2e}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultiPairVariant {
    /// (1/(TB))^{1/2} (γL)⁻¹
    ChannelFiltered,
    /// (9πL / 2L_D)^{1/4} (γL)⁻¹
    ChannelUnfiltered,
    /// ≈ 0.58 (γL)⁻¹
    ChannelFilteredCw,
    /// ≈ 0.75 (γL)⁻¹
    ChannelUnfilteredCw,
    /// √2 (L / v_g T)² (γL)⁻¹
    RingShortPulse,
    /// √2 √(L / v_g T) |F|⁻³ (γL)⁻¹
    RingLongPulse,
    /// ≈ 0.34 |F|^{-7/2} (γL)⁻¹
    RingCw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitKind {
    Xpm,
    Spm,
    MultiPair,
    Tpa,
    Fca,
    CwFca,
}

impl LimitKind {
    pub fn label(self) -> &'static str {
        match self {
            LimitKind::Xpm => "P_XPM",
            LimitKind::Spm => "P_SPM",
            LimitKind::MultiPair => "P_multi",
            LimitKind::Tpa => "P_TPA",
            LimitKind::Fca => "P_FCA",
            LimitKind::CwFca => "P_CWFCA",
        }
    }
}

impl fmt::Display for LimitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Filtered CW channel prefactor (2 ln2 π² / 64 s²)^{1/4}.
pub fn cw_filtered_prefactor() -> f64 {
    let s = sincsq_half_root();
    (2.0 * std::f64::consts::LN_2 * std::f64::consts::PI.powi(2) / (64.0 * s * s)).powf(0.25)
}

/// Unfiltered CW channel prefactor (9π / 64 s)^{1/4}.
pub fn cw_unfiltered_prefactor() -> f64 {
    (9.0 * std::f64::consts::PI / (64.0 * sincsq_half_root())).powf(0.25)
}

/// CW ring prefactor ((√2 − 1) / 16 s²)^{1/4}.
pub fn cw_ring_prefactor() -> f64 {
    let s = sincsq_half_root();
    ((2f64.sqrt() - 1.0) / (16.0 * s * s)).powf(0.25)
}

fn inverse_gamma_l(scales: &DerivedScales, structure: &Structure) -> f64 {
    1.0 / (scales.gamma * structure.length())
}

/// 0.5 (γL)⁻¹, divided by |F|² for rings. The SPM limit is twice this.
pub fn p_xpm(scales: &DerivedScales, structure: &Structure) -> f64 {
    0.5 * inverse_gamma_l(scales, structure) / scales.enhancement()
}

/// Multi-pair limiting power for the regime selected by structure, pump
/// mode, pulse regime and the presence of a filter.
pub fn p_multi(
    scales: &DerivedScales,
    structure: &Structure,
    pump: &PumpSpec,
    filter: Option<&FilterSpec>,
) -> Result<(f64, MultiPairVariant)> {
    let inv = inverse_gamma_l(scales, structure);
    let l = structure.length();
    match (structure, pump.duration()) {
        (Structure::Channel(_), None) => Ok(match filter {
            Some(_) => (cw_filtered_prefactor() * inv, MultiPairVariant::ChannelFilteredCw),
            None => (cw_unfiltered_prefactor() * inv, MultiPairVariant::ChannelUnfilteredCw),
        }),
        (Structure::Channel(_), Some(t)) => match filter {
            Some(f) => Ok(((1.0 / (t * f.bandwidth)).sqrt() * inv, MultiPairVariant::ChannelFiltered)),
            None => {
                let l_d = scales.l_d.ok_or(Error::Dispersionless("dispersion length"))?;
                Ok((
                    (9.0 * std::f64::consts::PI * l / (2.0 * l_d)).powf(0.25) * inv,
                    MultiPairVariant::ChannelUnfiltered,
                ))
            }
        },
        (Structure::Ring(_), None) => {
            let f = scales.enhancement().sqrt();
            Ok((cw_ring_prefactor() / f.powf(3.5) * inv, MultiPairVariant::RingCw))
        }
        (Structure::Ring(ring), Some(t)) => {
            let v_g = scales.v_g.unwrap_or_else(|| ring.group_velocity());
            let delta_p = scales.delta_p.expect("pulsed pump has a bandwidth");
            let delta_r = scales.delta_r.expect("ring has a linewidth");
            let ratio = delta_p / delta_r;
            let x = l / (v_g * t);
            if ratio >= DEFAULT_REGIME_FACTOR {
                Ok((2f64.sqrt() * x * x * inv, MultiPairVariant::RingShortPulse))
            } else if ratio * DEFAULT_REGIME_FACTOR <= 1.0 {
                let f = scales.enhancement().sqrt();
                Ok((2f64.sqrt() * x.sqrt() / f.powi(3) * inv, MultiPairVariant::RingLongPulse))
            } else {
                Err(Error::Regime(format!(
                    "intermediate pulse regime (delta_P/delta_R = {ratio:.3}); \
                     no closed-form multi-pair limit applies, evaluate with the quadrature oracle"
                )))
            }
        }
    }
}

/// Nonlinear figure of merit r = β_TPA / (2 k₀ n₂).
pub fn figure_of_merit(material: &Material, wavelength: f64) -> f64 {
    let k0 = 2.0 * std::f64::consts::PI / wavelength;
    material.beta_tpa / (2.0 * k0 * material.n2)
}

fn bounded(material: &Material, w: f64) -> LimitPower {
    match material.beta_tpa_bound {
        Bound::Exact => LimitPower::Finite(w),
        Bound::Upper => LimitPower::LowerBound(w),
    }
}

/// (1/2r)(γL)⁻¹, divided by |F|² for rings.
pub fn p_tpa(material: &Material, scales: &DerivedScales, structure: &Structure, wavelength: f64) -> LimitPower {
    if material.beta_tpa == 0.0 {
        return LimitPower::Unbounded;
    }
    let r = figure_of_merit(material, wavelength);
    bounded(material, inverse_gamma_l(scales, structure) / (2.0 * r) / scales.enhancement())
}

/// Pulsed FCA limit 3ħω_P A_eff / (σ_FCA T), divided by |F|² for rings.
pub fn p_fca(material: &Material, pump: &PumpSpec, structure: &Structure, scales: &DerivedScales) -> Result<LimitPower> {
    let t = pump
        .duration()
        .ok_or_else(|| Error::Regime("pulsed FCA limit needs a pulsed pump; use the CW form".into()))?;
    if material.sigma_fca == 0.0 {
        return Ok(LimitPower::Unbounded);
    }
    let w = 3.0 * HBAR * scales.omega_p * structure.a_eff() / (material.sigma_fca * t);
    Ok(LimitPower::Finite(w / scales.enhancement()))
}

/// CW FCA limit (4ħω_P A_eff² / (β_TPA τ_c σ_FCA L))^{1/2}, divided by |F|² for rings.
pub fn p_cwfca(material: &Material, structure: &Structure, scales: &DerivedScales) -> LimitPower {
    let denom = material.beta_tpa * material.tau_c * material.sigma_fca * structure.length();
    if denom == 0.0 {
        return LimitPower::Unbounded;
    }
    let a = structure.a_eff();
    let w = (4.0 * HBAR * scales.omega_p * a * a / denom).sqrt();
    bounded(material, w / scales.enhancement())
}

/// Steady-state free-carrier density β_TPA P² τ_c / (2ħω_P A_eff²), m⁻³.
pub fn steady_state_carriers(material: &Material, power: f64, omega_p: f64, a_eff: f64) -> f64 {
    material.beta_tpa * power * power * material.tau_c / (2.0 * HBAR * omega_p * a_eff * a_eff)
}

/// n_SS σ_FCA L / 2.
pub fn total_carriers(material: &Material, n_ss: f64, length: f64) -> f64 {
    n_ss * material.sigma_fca * length / 2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderEntry {
    pub kind: LimitKind,
    pub power: LimitPower,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitReport {
    pub p_xpm: f64,
    pub p_spm: f64,
    pub p_multi: f64,
    pub multi_variant: MultiPairVariant,
    pub p_tpa: LimitPower,
    /// Pump self-TPA bound, 2 P_TPA.
    pub p_tpa_pump: LimitPower,
    /// Pulsed designs only.
    pub p_fca: Option<LimitPower>,
    /// CW designs only.
    pub p_cwfca: Option<LimitPower>,
    /// CW designs only, at the intracavity design power.
    pub n_ss: Option<f64>,
    pub n_tot: Option<f64>,
    pub binding: LimitKind,
    pub enhancement_applied: f64,
    /// Finite limits in ascending order.
    pub ladder: Vec<LadderEntry>,
    pub margin: f64,
}

impl LimitReport {
    pub fn binding_power(&self) -> f64 {
        self.ladder[0].power.watts()
    }

    /// Largest pump power recommended after applying the safety margin.
    pub fn recommended_power(&self) -> f64 {
        self.binding_power() / self.margin
    }

    /// Limits exceeded at the given pump power.
    pub fn violated_at(&self, power: f64) -> Vec<LimitKind> {
        self.ladder.iter().filter(|e| power > e.power.watts()).map(|e| e.kind).collect()
    }

    pub fn entry(&self, kind: LimitKind) -> Option<&LadderEntry> {
        self.ladder.iter().find(|e| e.kind == kind)
    }
}

/// Evaluates every applicable limit and identifies the binding one.
pub fn classify(
    material: &Material,
    structure: &Structure,
    pump: &PumpSpec,
    filter: Option<&FilterSpec>,
    margin: f64,
) -> Result<LimitReport> {
    if !(margin > 0.0) {
        return Err(Error::invalid("margin > 0"));
    }
    let scales = derive_scales(material, structure, pump)?;
    let xpm = p_xpm(&scales, structure);
    let (multi, variant) = p_multi(&scales, structure, pump, filter)?;
    let tpa = p_tpa(material, &scales, structure, pump.wavelength);
    let enh = scales.enhancement();

    let (fca, cwfca, n_ss, n_tot) = if pump.is_pulsed() {
        (Some(p_fca(material, pump, structure, &scales)?), None, None, None)
    } else {
        let n_ss = steady_state_carriers(material, pump.power * enh, scales.omega_p, structure.a_eff());
        (
            None,
            Some(p_cwfca(material, structure, &scales)),
            Some(n_ss),
            Some(total_carriers(material, n_ss, structure.length())),
        )
    };

    let mut ladder: Vec<LadderEntry> = [
        (LimitKind::Xpm, LimitPower::Finite(xpm)),
        (LimitKind::Spm, LimitPower::Finite(2.0 * xpm)),
        (LimitKind::MultiPair, LimitPower::Finite(multi)),
        (LimitKind::Tpa, tpa),
    ]
    .into_iter()
    .chain(fca.map(|p| (LimitKind::Fca, p)))
    .chain(cwfca.map(|p| (LimitKind::CwFca, p)))
    .filter(|(_, p)| p.is_finite())
    .map(|(kind, power)| LadderEntry { kind, power })
    .collect();
    ladder.sort_by(|a, b| a.power.watts().total_cmp(&b.power.watts()));

    Ok(LimitReport {
        p_xpm: xpm,
        p_spm: 2.0 * xpm,
        p_multi: multi,
        multi_variant: variant,
        p_tpa: tpa,
        p_tpa_pump: tpa.scale(2.0),
        p_fca: fca,
        p_cwfca: cwfca,
        n_ss,
        n_tot,
        binding: ladder[0].kind,
        enhancement_applied: enh,
        ladder,
        margin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ChannelGeometry, RingGeometry};
    use crate::units::*;

    fn plain(n2: f64) -> Material {
        Material { name: "plain".into(), n2, beta_tpa: 0.0, beta_tpa_bound: Bound::Exact, sigma_fca: 0.0, tau_c: 0.0 }
    }

    fn silicon() -> Material {
        Material { name: "Si".into(), n2: 6e-18, beta_tpa: 5e-12, beta_tpa_bound: Bound::Exact, sigma_fca: 1.45e-21, tau_c: 1e-9 }
    }

    fn channel(gamma: f64) -> Structure {
        Structure::Channel(ChannelGeometry { length: 0.05, a_eff: 0.5 * UM2, beta2: -1e-24, gamma: Some(gamma) })
    }

    fn ring(gamma: f64) -> Structure {
        Structure::Ring(RingGeometry {
            circumference: 10.0 * std::f64::consts::PI * UM,
            a_eff: 0.13 * UM2,
            q_factor: 7900.0,
            n_eff: 2.47,
            group_index: None,
            beta2: 0.0,
            coupling: None,
            gamma: Some(gamma),
        })
    }

    #[test]
    fn formatting() {
        assert_eq!(format_sig3(0.7743), "0.774");
        assert_eq!(format_sig3(1195.2), "1200");
        assert_eq!(format_sig3(1211.0), "1210");
        assert_eq!(format_sig3(0.01785), "0.0179");
        assert_eq!(format_sig3(1.1146e7), "1.11e7");
        assert_eq!(format_sig3(9.996), "10.0");
        assert_eq!(LimitPower::Unbounded.to_string(), "∞");
        assert_eq!(LimitPower::LowerBound(1183.4).to_string(), ">1180");
    }

    #[test]
    fn cw_prefactors_from_closed_forms() {
        assert!((cw_filtered_prefactor() - 0.58).abs() < 0.005);
        assert!((cw_unfiltered_prefactor() - 0.75).abs() < 0.005);
        assert!((cw_ring_prefactor() - 0.34).abs() < 0.005);
        assert!((cw_filtered_prefactor() - 0.5766).abs() < 1e-3);
    }

    #[test]
    fn cw_channel_ordering() {
        assert!(0.5 < cw_filtered_prefactor());
        assert!(cw_filtered_prefactor() < cw_unfiltered_prefactor());
    }

    #[test]
    fn cw_ring_multi_pair_below_xpm_for_any_enhancement() {
        for k in 0..200 {
            let f2 = 1.0 + k as f64 * 0.5;
            let f = f64::sqrt(f2);
            assert!(cw_ring_prefactor() / f.powf(3.5) < 0.5 / f2);
        }
    }

    #[test]
    fn pulsed_fca_inverse_in_cross_section() {
        let pump = PumpSpec::pulsed(1550.0 * NM, 1.0, 10.0 * PS, 10.0 * MHZ);
        let s = channel(100.0);
        let m = silicon();
        let sc = derive_scales(&m, &s, &pump).unwrap();
        let p1 = p_fca(&m, &pump, &s, &sc).unwrap().watts();
        let m2 = Material { sigma_fca: 2.0 * m.sigma_fca, ..m };
        let p2 = p_fca(&m2, &pump, &s, &sc).unwrap().watts();
        assert!((p1 / p2 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn absent_mechanisms_leave_three_entries() {
        let pump = PumpSpec::cw(1550.0 * NM, 0.1);
        let r = classify(&plain(1e-18), &channel(10.0), &pump, None, 1.0).unwrap();
        let kinds: Vec<_> = r.ladder.iter().map(|e| e.kind).collect();
        assert_eq!(kinds, vec![LimitKind::Xpm, LimitKind::MultiPair, LimitKind::Spm]);
        assert!(r.ladder.iter().all(|e| e.power.watts().is_finite()));
        assert_eq!(r.binding, LimitKind::Xpm);
        assert_eq!(r.p_tpa, LimitPower::Unbounded);
        assert_eq!(r.p_cwfca, Some(LimitPower::Unbounded));
    }

    #[test]
    fn ring_division_bookkeeping() {
        let pump = PumpSpec::cw(1558.5 * NM, 0.001);
        let m = silicon();
        let r = classify(&m, &ring(190.0), &pump, None, 1.0).unwrap();
        let f2 = r.enhancement_applied;
        assert!((f2 - 101.0).abs() < 0.5);
        let l = 10.0 * std::f64::consts::PI * UM;
        assert!((r.p_xpm * f2 - 0.5 / (190.0 * l)).abs() < 1e-9);
        let rr = figure_of_merit(&m, 1558.5 * NM);
        assert!((r.p_tpa.watts() * f2 - 1.0 / (2.0 * rr) / (190.0 * l)).abs() / r.p_tpa.watts() < 1e-12);
        assert_eq!(r.binding, LimitKind::MultiPair);
    }

    #[test]
    fn violations_grow_with_power() {
        let pump = PumpSpec::cw(1558.5 * NM, 0.001);
        let r = classify(&silicon(), &ring(190.0), &pump, None, 1.0).unwrap();
        let top = 2.0 * r.binding_power();
        let mut last: Vec<LimitKind> = Vec::new();
        for i in 0..100 {
            let v = r.violated_at(top * i as f64 / 99.0);
            assert!(last.iter().all(|k| v.contains(k)));
            last = v;
        }
        assert!(last.contains(&r.binding));
    }

    #[test]
    fn margin_scales_recommendation() {
        let pump = PumpSpec::cw(1558.5 * NM, 0.001);
        let r = classify(&silicon(), &ring(190.0), &pump, None, 10.0).unwrap();
        assert!((r.recommended_power() * 10.0 - r.binding_power()).abs() < 1e-15);
        assert!(classify(&silicon(), &ring(190.0), &pump, None, 0.0).is_err());
    }

    #[test]
    fn intermediate_ring_pulse_is_an_error() {
        let w = angular_frequency(1558.5 * NM);
        let t = 4.0 * crate::scales::sinc_half_root() * 7900.0 / w;
        let pump = PumpSpec::pulsed(1558.5 * NM, 0.01, t, 1.0 * MHZ);
        let s = ring(190.0);
        let sc = derive_scales(&silicon(), &s, &pump).unwrap();
        assert!(matches!(p_multi(&sc, &s, &pump, None), Err(Error::Regime(_))));
    }

    proptest::proptest! {
        #[test]
        fn limits_scale_inversely_with_gamma(g in 0.01f64..1000.0, pulsed in proptest::bool::ANY, is_ring in proptest::bool::ANY) {
            let pump = if pulsed {
                PumpSpec::pulsed(1550.0 * NM, 1.0, if is_ring { 0.05 * PS } else { 20.0 * PS }, 1.0 * MHZ)
            } else {
                PumpSpec::cw(1550.0 * NM, 1.0)
            };
            let (s1, s2) = if is_ring { (ring(g), ring(2.0 * g)) } else { (channel(g), channel(2.0 * g)) };
            let filter = FilterSpec::new(20.0 * GHZ, 0.0);
            let f = (!is_ring).then_some(&filter);
            let m = silicon();
            let r1 = classify(&m, &s1, &pump, f, 1.0).unwrap();
            let r2 = classify(&m, &s2, &pump, f, 1.0).unwrap();
            let half = |a: f64, b: f64| (a / b - 2.0).abs() < 1e-12;
            proptest::prop_assert!(half(r1.p_xpm, r2.p_xpm));
            proptest::prop_assert!(half(r1.p_multi, r2.p_multi));
            proptest::prop_assert!(half(r1.p_tpa.watts(), r2.p_tpa.watts()));
        }

        #[test]
        fn xpm_constrains_tpa_for_useful_materials(r in 0.001f64..0.499) {
            let n2 = 1e-18;
            let lambda = 1550.0 * NM;
            let k0 = 2.0 * std::f64::consts::PI / lambda;
            let m = Material { beta_tpa: r * 2.0 * k0 * n2, ..plain(n2) };
            let s = ring(50.0);
            let pump = PumpSpec::cw(lambda, 0.001);
            let rep = classify(&m, &s, &pump, None, 1.0).unwrap();
            proptest::prop_assert!(rep.p_xpm < rep.p_tpa.watts());
        }
    }
}
