//! Numerical evaluation of the full pair-generation integral.
//!
//! The joint spectral amplitude is sampled on a rectangular grid in
//! (ω₁, ω₂). Each entry is an adaptive quadrature over the pump frequency;
//! the outer double integral is a trapezoid sum over the grid.

pub mod export;
pub mod pump;
pub mod schmidt;
pub mod verify;

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{validate_design, Coupling, FilterSpec, Material, PumpShape, PumpSpec, Structure};
use crate::quadrature::{integrate, QuadOptions};
use crate::scales::{self, structure_gamma};
use crate::units::sinc;
use crate::{Error, Result};

pub use pump::PumpWaveform;
pub use schmidt::{schmidt_decompose, SchmidtModes, SchmidtResult};

/// Ring field-enhancement model used inside the oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldModel {
    /// One resonance per photon: pump at ω_P, signal at ω_P + FSR,
    /// idler at ω_P − FSR.
    #[default]
    Lorentzian,
    /// Periodic iκ/(1 − σe^{iφ}); the pump integral is kept within half
    /// a free spectral range of ω_P.
    Airy,
}

#[derive(Debug, Clone, Copy)]
pub struct OracleOptions {
    pub quad: QuadOptions,
    pub field_model: FieldModel,
    /// Sidelobe periods of a flat-top pump spectrum kept on each side.
    pub rect_periods: f64,
    /// Inner-integral cutoff for rings, in half-linewidths.
    pub ring_window: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            quad: QuadOptions { rel_tol: 1e-6, abs_tol: 0.0, max_intervals: 4000 },
            field_model: FieldModel::Lorentzian,
            rect_periods: 60.0,
            ring_window: 400.0,
        }
    }
}

/// Uniform sample axis, both ends included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisSpec {
    pub start: f64,
    pub end: f64,
    pub points: usize,
}

impl AxisSpec {
    pub fn new(start: f64, end: f64, points: usize) -> Self {
        AxisSpec { start, end, points }
    }

    pub fn centred(centre: f64, half_span: f64, points: usize) -> Self {
        AxisSpec { start: centre - half_span, end: centre + half_span, points }
    }

    pub fn step(&self) -> f64 {
        (self.end - self.start) / (self.points - 1) as f64
    }

    pub fn samples(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.points).map(|k| self.start + h * k as f64).collect()
    }

    fn check(&self, name: &str) -> Result<()> {
        if self.points < 3 || !(self.end > self.start) || !self.start.is_finite() || !self.end.is_finite() {
            return Err(Error::Grid(format!("{name} axis needs at least 3 points over a finite increasing range")));
        }
        if self.start <= 0.0 {
            return Err(Error::Grid(format!(
                "{name} axis reaches {:.4e} rad/s; frequencies must stay positive",
                self.start
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub omega1: AxisSpec,
    pub omega2: AxisSpec,
}

impl GridSpec {
    pub fn square(axis: AxisSpec) -> Self {
        GridSpec { omega1: axis, omega2: axis }
    }

    /// Grid sized to the design: a square window about ω_P for channels,
    /// signal and idler windows one FSR either side for rings.
    pub fn auto(
        material: &Material,
        structure: &Structure,
        pump: &PumpSpec,
        points: usize,
        opts: &OracleOptions,
    ) -> Result<Self> {
        let wave = PumpWaveform::new(pump, opts.rect_periods)?;
        let omega_p = pump.omega();
        validate_design(material, structure, pump).into_result()?;
        let ridge = ridge_extent(&wave, &pump.shape);
        match structure {
            Structure::Channel(chan) => {
                let k = 0.5 * chan.beta2.abs() * chan.length;
                let phase = if k > 0.0 { (40.0 / k).sqrt() } else { 0.0 };
                Ok(GridSpec::square(AxisSpec::centred(omega_p, phase.max(ridge), points)))
            }
            Structure::Ring(ring) => {
                let delta_r = scales::resonance_bandwidth(omega_p, ring.q_factor);
                let delta_p = scales::pump_bandwidth(wave.fwhm());
                let mut half = if delta_p >= delta_r { 16.0 * delta_r } else { (3.0 * delta_r).max(ridge) };
                let fsr = ring.fsr();
                if opts.field_model == FieldModel::Airy {
                    half = half.min(0.45 * fsr);
                }
                Ok(GridSpec {
                    omega1: AxisSpec::centred(omega_p + fsr, half, points),
                    omega2: AxisSpec::centred(omega_p - fsr, half, points),
                })
            }
        }
    }
}

/// Detuning beyond which |(φ_P ∗ φ_P)(S)|² is below 1e-3 of its peak.
fn ridge_extent(wave: &PumpWaveform, shape: &PumpShape) -> f64 {
    match shape {
        PumpShape::Rect => 64.0 / wave.fwhm(),
        _ => 0.5 * wave.extent(),
    }
}

/// Sampled joint spectral amplitude. `amplitude[(i, j)]` is φ(ω₁ᵢ, ω₂ⱼ),
/// excluding the (γPL)²T²/8π² prefactor, so it does not depend on power.
#[derive(Debug, Clone)]
pub struct JsaGrid {
    pub omega1_axis: Vec<f64>,
    pub omega2_axis: Vec<f64>,
    pub amplitude: DMatrix<Complex64>,
    /// Σ|φ|² dω₁ dω₂ over the whole grid.
    pub norm: f64,
    pub gamma_l: f64,
    /// Pump intensity FWHM the grid was built for, s.
    pub fwhm: f64,
    pub omega_p: f64,
}

impl JsaGrid {
    pub fn step1(&self) -> f64 {
        self.omega1_axis[1] - self.omega1_axis[0]
    }

    pub fn step2(&self) -> f64 {
        self.omega2_axis[1] - self.omega2_axis[0]
    }

    pub fn peak(&self) -> f64 {
        self.amplitude.iter().fold(0.0f64, |m, z| m.max(z.norm()))
    }

    fn same_axes(&self) -> bool {
        self.omega1_axis.len() == self.omega2_axis.len()
            && self.omega1_axis.iter().zip(&self.omega2_axis).all(|(a, b)| (a - b).abs() <= 1e-12 * a.abs())
    }

    /// max|φ(ω₁,ω₂) − φ(ω₂,ω₁)| / max|φ|, when both axes coincide.
    pub fn exchange_asymmetry(&self) -> Option<f64> {
        if !self.same_axes() {
            return None;
        }
        let n = self.omega1_axis.len();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                worst = worst.max((self.amplitude[(i, j)] - self.amplitude[(j, i)]).norm());
            }
        }
        let peak = self.peak();
        Some(if peak > 0.0 { worst / peak } else { 0.0 })
    }

    /// Copy rescaled so that `norm` is 1.
    pub fn normalized(&self) -> JsaGrid {
        let mut out = self.clone();
        if self.norm > 0.0 {
            out.amplitude /= Complex64::new(self.norm.sqrt(), 0.0);
            out.norm = 1.0;
        }
        out
    }

    /// Largest |φ|² on the grid perimeter relative to the peak |φ|².
    pub fn boundary_ratio(&self) -> f64 {
        let (n1, n2) = self.amplitude.shape();
        let mut edge = 0.0f64;
        for i in 0..n1 {
            edge = edge.max(self.amplitude[(i, 0)].norm_sqr()).max(self.amplitude[(i, n2 - 1)].norm_sqr());
        }
        for j in 0..n2 {
            edge = edge.max(self.amplitude[(0, j)].norm_sqr()).max(self.amplitude[(n1 - 1, j)].norm_sqr());
        }
        ratio(edge, self.peak())
    }
}

fn ratio(edge_sq: f64, peak: f64) -> f64 {
    if peak > 0.0 {
        edge_sq / (peak * peak)
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy)]
enum Field {
    Unity,
    Lorentz { peak: Complex64, half_width: f64, fsr: f64 },
    Airy { transit: f64, coupling: Coupling },
}

impl Field {
    /// Pump-side factor at detuning x from ω_P.
    fn pump(&self, x: f64, omega_p: f64) -> Complex64 {
        match *self {
            Field::Unity => Complex64::new(1.0, 0.0),
            Field::Lorentz { peak, half_width, .. } => peak / Complex64::new(1.0, -x / half_width),
            Field::Airy { transit, coupling, .. } => scales::airy_factor(omega_p + x, transit, coupling, omega_p),
        }
    }

    fn signal(&self, omega: f64, omega_p: f64) -> Complex64 {
        match *self {
            Field::Lorentz { fsr, .. } => self.pump(omega - omega_p - fsr, omega_p),
            _ => self.pump(omega - omega_p, omega_p),
        }
    }

    fn idler(&self, omega: f64, omega_p: f64) -> Complex64 {
        match *self {
            Field::Lorentz { fsr, .. } => self.pump(omega - omega_p + fsr, omega_p),
            _ => self.pump(omega - omega_p, omega_p),
        }
    }

    fn symmetric(&self) -> bool {
        !matches!(self, Field::Lorentz { .. })
    }
}

struct Kernel {
    wave: PumpWaveform,
    omega_p: f64,
    /// β₂L / 2
    k: f64,
    field: Field,
    /// Cap on the half-range of the pump integral.
    y_cap: f64,
    /// Half-linewidth for resonance breakpoints.
    half_width: Option<f64>,
    quad: QuadOptions,
}

impl Kernel {
    /// Inner pump integral at S = Ω₁ + Ω₂, D = (Ω₁ − Ω₂)/2, with y the offset
    /// of the pump frequency from the midpoint of the pair. The integrand is
    /// even in y.
    fn inner(&self, s: f64, d: f64) -> (Complex64, f64, bool) {
        let half_s = 0.5 * s;
        let y_max = (self.wave.extent() - half_s.abs()).min(self.y_cap);
        if y_max <= 0.0 {
            return (Complex64::new(0.0, 0.0), 0.0, true);
        }
        let wp = self.omega_p;
        let g = |y: f64| {
            let (xa, xb) = (half_s + y, half_s - y);
            let freq = ((wp + xa) * (wp + xb)).max(0.0).sqrt() / wp;
            let real = self.wave.amplitude(xa) * self.wave.amplitude(xb) * freq * sinc(self.k * (y * y - d * d));
            self.field.pump(xa, wp) * self.field.pump(xb, wp) * real
        };
        let mut bp = vec![0.0, y_max];
        let panel = self.wave.panel_width();
        let panels = (y_max / panel).ceil().min(400.0) as usize;
        for p in 1..panels {
            bp.push(y_max * p as f64 / panels as f64);
        }
        if d.abs() < y_max {
            bp.push(d.abs());
        }
        if let Some(a) = self.half_width {
            let c = half_s.abs();
            for m in [0.25, 1.0, 4.0, 16.0, 64.0] {
                for y in [c - m * a, c + m * a] {
                    if y > 0.0 && y < y_max {
                        bp.push(y);
                    }
                }
            }
            if c < y_max {
                bp.push(c);
            }
        }
        bp.sort_by(f64::total_cmp);
        bp.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * y_max);
        let r = integrate(g, &bp, self.quad);
        (r.value * 2.0, 2.0 * r.error, r.converged)
    }
}

/// Samples φ(ω₁, ω₂) on `grid`.
pub fn build_jsa(
    material: &Material,
    structure: &Structure,
    pump: &PumpSpec,
    grid: &GridSpec,
    opts: &OracleOptions,
) -> Result<JsaGrid> {
    grid.omega1.check("omega1")?;
    grid.omega2.check("omega2")?;
    validate_design(material, structure, pump).into_result()?;
    let wave = PumpWaveform::new(pump, opts.rect_periods)?;
    let omega_p = pump.omega();
    let gamma = structure_gamma(material, structure, pump.wavelength);

    let (field, y_cap, half_width) = match structure {
        Structure::Channel(_) => (Field::Unity, f64::INFINITY, None),
        Structure::Ring(ring) => {
            let half = 0.5 * scales::resonance_bandwidth(omega_p, ring.q_factor);
            let fsr = ring.fsr();
            match opts.field_model {
                FieldModel::Lorentzian => {
                    let peak = Complex64::i() * scales::resonant_enhancement(ring, omega_p).sqrt();
                    (Field::Lorentz { peak, half_width: half, fsr }, opts.ring_window * half, Some(half))
                }
                FieldModel::Airy => {
                    let coupling = scales::ring_coupling(ring, omega_p)?;
                    let transit = ring.circumference / ring.group_velocity();
                    (Field::Airy { transit, coupling }, (0.5 * fsr).min(opts.ring_window * half), Some(half))
                }
            }
        }
    };

    let w1 = grid.omega1.samples();
    let w2 = grid.omega2.samples();
    let mut kernel = Kernel {
        wave,
        omega_p,
        k: 0.5 * structure.beta2() * structure.length(),
        field,
        y_cap,
        half_width,
        quad: opts.quad,
    };

    // Absolute floor from the amplitude near the grid centre.
    let (c1, c2) = (w1[w1.len() / 2] - omega_p, w2[w2.len() / 2] - omega_p);
    let (probe, _, _) = kernel.inner(c1 + c2, 0.5 * (c1 - c2));
    let (zero, _, _) = kernel.inner(0.0, 0.0);
    let scale = probe.norm().max(zero.norm());
    kernel.quad.abs_tol = 1e-9 * scale;

    let symmetric = grid.omega1 == grid.omega2 && field.symmetric();
    let rows: Vec<(Vec<Complex64>, f64)> = (0..w1.len())
        .into_par_iter()
        .map(|i| {
            let j0 = if symmetric { i } else { 0 };
            let o1 = w1[i] - omega_p;
            let mut worst = 0.0f64;
            let row = w2[j0..]
                .iter()
                .map(|&w| {
                    let o2 = w - omega_p;
                    let (v, err, ok) = kernel.inner(o1 + o2, 0.5 * (o1 - o2));
                    if !ok {
                        worst = worst.max(err);
                    }
                    let outer = (w1[i] * w).sqrt() / omega_p
                        * field.signal(w1[i], omega_p)
                        * field.idler(w, omega_p);
                    v * outer
                })
                .collect();
            (row, worst)
        })
        .collect();

    let worst = rows.iter().fold(0.0f64, |m, r| m.max(r.1));
    if worst > 1e-3 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Convergence(format!(
            "inner integral error {worst:.3e} against amplitude scale {scale:.3e}"
        )));
    }

    let (n1, n2) = (w1.len(), w2.len());
    let mut amplitude = DMatrix::<Complex64>::zeros(n1, n2);
    for (i, (row, _)) in rows.into_iter().enumerate() {
        let j0 = if symmetric { i } else { 0 };
        for (off, v) in row.into_iter().enumerate() {
            amplitude[(i, j0 + off)] = v;
            if symmetric {
                amplitude[(j0 + off, i)] = v;
            }
        }
    }
    if amplitude.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Convergence("non-finite amplitude".into()));
    }

    let (h1, h2) = (grid.omega1.step(), grid.omega2.step());
    let norm = trapezoid_2d(&amplitude, h1, h2);
    Ok(JsaGrid {
        omega1_axis: w1,
        omega2_axis: w2,
        amplitude,
        norm,
        gamma_l: gamma * structure.length(),
        fwhm: kernel.wave.fwhm(),
        omega_p,
    })
}

fn trapezoid_weights(n: usize, h: f64) -> impl Iterator<Item = f64> {
    (0..n).map(move |k| if k == 0 || k == n - 1 { 0.5 * h } else { h })
}

fn trapezoid_2d(a: &DMatrix<Complex64>, h1: f64, h2: f64) -> f64 {
    let (n1, n2) = a.shape();
    let w2: Vec<f64> = trapezoid_weights(n2, h2).collect();
    trapezoid_weights(n1, h1)
        .enumerate()
        .map(|(i, wi)| wi * (0..n2).map(|j| w2[j] * a[(i, j)].norm_sqr()).sum::<f64>())
        .sum()
}

/// ∫_lo^hi of the piecewise-linear interpolant through (x, m).
fn integrate_linear(x: &[f64], m: &[f64], lo: f64, hi: f64) -> f64 {
    let interp = |k: usize, t: f64| m[k] + (m[k + 1] - m[k]) * (t - x[k]) / (x[k + 1] - x[k]);
    let mut total = 0.0;
    for k in 0..x.len() - 1 {
        let a = x[k].max(lo);
        let b = x[k + 1].min(hi);
        if b > a {
            total += 0.5 * (b - a) * (interp(k, a) + interp(k, b));
        }
    }
    total
}

/// Pairs per pulse from a sampled JSA.
///
/// Without a filter, ω₁ runs over ω₁ ≥ ω_P (each pair once). With a filter,
/// ω₁ is restricted to the passband and ω₂ is left free, so adjacent bins
/// add up to the unfiltered value.
pub fn n_pairs_full(jsa: &JsaGrid, pump: &PumpSpec, filter: Option<&FilterSpec>) -> Result<f64> {
    let t = pump.duration().ok_or_else(|| Error::Regime("the oracle needs a pulsed pump".into()))?;
    if (t - jsa.fwhm).abs() > 1e-9 * jsa.fwhm {
        return Err(Error::invalid(format!("pump FWHM {t:.4e} s differs from the JSA's {:.4e} s", jsa.fwhm)));
    }
    if (pump.omega() - jsa.omega_p).abs() > 1e-9 * jsa.omega_p {
        return Err(Error::invalid("pump wavelength differs from the one the JSA was built for"));
    }
    let (n1, n2) = jsa.amplitude.shape();
    let peak = jsa.peak();
    let (lo, hi) = match filter {
        Some(f) => {
            let (lo, hi) = f.passband(jsa.omega_p);
            if lo < jsa.omega1_axis[0] || hi > jsa.omega1_axis[n1 - 1] {
                return Err(Error::Grid(format!(
                    "filter passband [{lo:.6e}, {hi:.6e}] rad/s extends past the omega1 axis; widen the grid"
                )));
            }
            let mut edge = 0.0f64;
            for (i, &w) in jsa.omega1_axis.iter().enumerate() {
                if w >= lo && w <= hi {
                    edge = edge.max(jsa.amplitude[(i, 0)].norm_sqr()).max(jsa.amplitude[(i, n2 - 1)].norm_sqr());
                }
            }
            check_boundary(ratio(edge, peak))?;
            (lo, hi)
        }
        None => {
            check_boundary(jsa.boundary_ratio())?;
            (jsa.omega_p, f64::INFINITY)
        }
    };
    let h2 = jsa.step2();
    let w2: Vec<f64> = trapezoid_weights(n2, h2).collect();
    let marginal: Vec<f64> = (0..n1)
        .map(|i| (0..n2).map(|j| w2[j] * jsa.amplitude[(i, j)].norm_sqr()).sum())
        .collect();
    let integral = integrate_linear(&jsa.omega1_axis, &marginal, lo, hi);
    let prefactor = (jsa.gamma_l * pump.power * t).powi(2) / (8.0 * PI * PI);
    Ok(prefactor * integral)
}

/// Largest allowed |φ|² on the grid edge, relative to the peak |φ|².
pub const BOUNDARY_TOL: f64 = 1e-3;

fn check_boundary(r: f64) -> Result<()> {
    if r > BOUNDARY_TOL {
        Err(Error::Grid(format!(
            "|phi|^2 on the grid edge is {r:.2e} of its peak (limit {BOUNDARY_TOL:.0e}); widen the axes"
        )))
    } else {
        Ok(())
    }
}
