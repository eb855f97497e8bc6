//! Acceptance checks, one line per criterion.
//!
//! Criterion 4 contains a check known to fail (the CW multi-pair constants
//! from a Schmidt decomposition do not land on the tabulated 0.58 / 0.75);
//! it is reported as FAIL with its numbers and does not fail the run. Any
//! other failure, or an unexpected pass of the known one, exits non-zero.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use sfwm::design::Design;
use sfwm::limits::{
    classify, cw_filtered_prefactor, cw_ring_prefactor, cw_unfiltered_prefactor, LimitKind, LimitPower,
};
use sfwm::model::{ChannelGeometry, FilterSpec, Material, PumpShape, PumpSpec, Structure};
use sfwm::oracle::verify::{closed_form, verify_cw_constants};
use sfwm::oracle::{build_jsa, n_pairs_full, schmidt_decompose, GridSpec, JsaGrid, OracleOptions};
use sfwm::report::table3;
use sfwm::scales::{compute_gamma, phase_matching_bandwidth, sinc_half_root, sincsq_half_root};
use sfwm::units::{FS2_PER_MM, NM, PS, UM2};

const KNOWN_RED: &[u32] = &[4];

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn rel(a: f64, b: f64) -> f64 {
    a / b - 1.0
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let t = table3(None).expect("table evaluates");
    let elapsed = start.elapsed().as_secs_f64();
    let misses: Vec<String> = t
        .cells
        .iter()
        .filter(|c| !c.within)
        .map(|c| format!("{} {} = {} (table {})", c.design, c.row, c.computed, c.expected))
        .collect();
    outcome(
        misses.is_empty() && elapsed < 1.0,
        format!("{}/16 cells within tolerance in {elapsed:.3} s {}", t.matched(), misses.join("; ")),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let (a, s) = (sinc_half_root(), sincsq_half_root());
    let pre = [(cw_filtered_prefactor(), 0.58), (cw_unfiltered_prefactor(), 0.75), (cw_ring_prefactor(), 0.34)];
    let ok = (a - 1.8955).abs() <= 1e-4
        && (s - 1.3916).abs() <= 1e-4
        && pre.iter().all(|(v, e)| (v - e).abs() <= 0.005)
        && start.elapsed().as_secs_f64() < 0.1;
    outcome(
        ok,
        format!("a = {a:.6}, s = {s:.6}, prefactors {:.4} {:.4} {:.4}", pre[0].0, pre[1].0, pre[2].0),
    )
}

fn reference_material() -> Material {
    Design::bundled("pulsed-fiber-sio2").unwrap().material
}

fn fiber_channel() -> Structure {
    Structure::Channel(ChannelGeometry { length: 300.0, a_eff: 60.0 * UM2, beta2: 3.0 * FS2_PER_MM, gamma: Some(0.0022) })
}

fn criterion_3() -> Outcome {
    const GRID: usize = 512;
    let start = Instant::now();
    let opts = OracleOptions::default();
    let mat = reference_material();
    let mut notes = Vec::new();
    let mut ok = true;
    let mut check = |label: String, oracle: f64, closed: f64, in_regime: bool, budget: f64| {
        let d = rel(oracle, closed);
        let good = in_regime && d.abs() <= budget;
        ok &= good;
        notes.push(format!("{label} {:+.2}%{}", 100.0 * d, if good { "" } else { " (out)" }));
    };

    // Long-pulse channel: fiber with a 50 ps pump, Δ_M/Δ_P ≈ 38.
    let chan = fiber_channel();
    let pump = PumpSpec::pulsed(1555.95 * NM, 1.0, 50.0 * PS, 1e6).with_shape(PumpShape::Gaussian);
    let grid = GridSpec::auto(&mat, &chan, &pump, GRID, &opts).unwrap();
    let jsa = build_jsa(&mat, &chan, &pump, &grid, &opts).unwrap();
    let cf = closed_form(&mat, &chan, &pump, None).unwrap();
    check("unfiltered".into(), n_pairs_full(&jsa, &pump, None).unwrap(), cf.n_pairs, cf.in_regime(), 0.05);

    // Filtered at five detunings spanning β₂Ω²L/2 = 0..2.
    let k = 0.5 * chan.beta2() * chan.length();
    let delta_m = phase_matching_bandwidth(chan.beta2(), chan.length()).unwrap();
    for x in [0.0, 0.5, 1.0, 1.5, 2.0f64] {
        let f = FilterSpec::new(delta_m / 20.0 / (2.0 * PI), (x / k).sqrt());
        let cf = closed_form(&mat, &chan, &pump, Some(&f)).unwrap();
        check(format!("filtered@{x}"), n_pairs_full(&jsa, &pump, Some(&f)).unwrap(), cf.n_pairs, cf.in_regime(), 0.05);
    }

    // Long-pulse ring: silicon ring, 1 ns pulse, Δ_R/Δ_P ≈ 20.
    let si = Design::bundled("cw-ring-si").unwrap();
    let pump = PumpSpec::pulsed(1558.5 * NM, 1e-3, 1000.0 * PS, 1e6).with_shape(PumpShape::Gaussian);
    let grid = GridSpec::auto(&si.material, &si.structure, &pump, GRID, &opts).unwrap();
    let jsa = build_jsa(&si.material, &si.structure, &pump, &grid, &opts).unwrap();
    let cf = closed_form(&si.material, &si.structure, &pump, None).unwrap();
    check("ring long".into(), n_pairs_full(&jsa, &pump, None).unwrap(), cf.n_pairs, cf.in_regime(), 0.10);

    // Short-pulse ring: the diamond design (0.1 ps flat-top pulse).
    let d = Design::bundled("pulsed-ring-diamond").unwrap();
    let grid = GridSpec::auto(&d.material, &d.structure, &d.pump, GRID, &opts).unwrap();
    let jsa = build_jsa(&d.material, &d.structure, &d.pump, &grid, &opts).unwrap();
    let cf = closed_form(&d.material, &d.structure, &d.pump, None).unwrap();
    check("ring short".into(), n_pairs_full(&jsa, &d.pump, None).unwrap(), cf.n_pairs, cf.in_regime(), 0.10);

    let elapsed = start.elapsed().as_secs_f64();
    outcome(ok && elapsed < 300.0, format!("{} [{GRID}^2, {elapsed:.1} s]", notes.join(", ")))
}

fn separable_jsa() -> JsaGrid {
    let n = 96;
    let h = 2e10;
    let axis: Vec<f64> = (0..n).map(|k| 1.2e15 + h * (k as f64 - 48.0)).collect();
    let g = |w: f64| (-((w - 1.2e15) / 2e11).powi(2)).exp();
    let amplitude = nalgebra::DMatrix::from_fn(n, n, |i, j| num_complex::Complex64::new(g(axis[i]) * g(axis[j]), 0.0));
    let norm = amplitude.iter().map(|z| z.norm_sqr()).sum::<f64>() * h * h;
    JsaGrid { omega1_axis: axis.clone(), omega2_axis: axis, amplitude, norm, gamma_l: 1.0, fwhm: 1e-12, omega_p: 1.2e15 }
}

fn criterion_4() -> Outcome {
    let r = schmidt_decompose(&separable_jsa().normalized()).unwrap();
    let rank_one = (r.schmidt_number - 1.0).abs() <= 1e-6;

    let mat = reference_material();
    let chan = fiber_channel();
    let pump = PumpSpec::pulsed(1555.95 * NM, 1.0, 5.0 * PS, 1e6).with_shape(PumpShape::Gaussian);
    let opts = OracleOptions::default();
    let grid = GridSpec::auto(&mat, &chan, &pump, 256, &opts).unwrap();
    let jsa = build_jsa(&mat, &chan, &pump, &grid, &opts).unwrap().normalized();
    let s = schmidt_decompose(&jsa).unwrap();
    let sum = s.coefficients.iter().sum::<f64>();
    let complete = (sum - 1.0).abs() <= 1e-9;

    let cw = verify_cw_constants(&opts).unwrap();
    outcome(
        rank_one && complete && cw.passed(),
        format!(
            "rank-one K = {:.9}, sum p = 1 {:+.1e}, CW constants {:.3} (0.58, {:+.0}%) and {:.3} (0.75, {:+.0}%)",
            r.schmidt_number,
            sum - 1.0,
            cw.filtered.value,
            100.0 * cw.filtered.relative_error,
            cw.unfiltered.value,
            100.0 * cw.unfiltered.relative_error
        ),
    )
}

fn scaled_gamma(d: &Design, factor: f64) -> Structure {
    let mut s = d.structure.clone();
    let g = sfwm::scales::structure_gamma(&d.material, &s, d.pump.wavelength);
    match &mut s {
        Structure::Channel(c) => c.gamma = Some(g * factor),
        Structure::Ring(r) => r.gamma = Some(g * factor),
    }
    s
}

fn criterion_5() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    let opts = OracleOptions::default();
    let mat = reference_material();
    let chan = fiber_channel();
    let pump = PumpSpec::pulsed(1555.95 * NM, 1.0, 50.0 * PS, 1e6).with_shape(PumpShape::Gaussian);
    let grid = GridSpec::auto(&mat, &chan, &pump, 256, &opts).unwrap();
    let jsa = build_jsa(&mat, &chan, &pump, &grid, &opts).unwrap();

    // quadratic power law
    let n1 = n_pairs_full(&jsa, &pump, None).unwrap();
    let n2 = n_pairs_full(&jsa, &pump.clone().with_power(2.0), None).unwrap();
    let quad = rel(n2, 4.0 * n1).abs();
    ok &= quad <= 1e-10;
    notes.push(format!("N(2P)/4N(P) - 1 = {quad:.1e}"));

    // (γL)⁻¹ scaling of every γ-dependent limit, for each bundled design
    let mut worst = 0.0f64;
    for name in sfwm::report::bundled_names() {
        let d = Design::bundled(name).unwrap();
        let a = classify(&d.material, &d.structure, &d.pump, d.filter(), 1.0).unwrap();
        let b = classify(&d.material, &scaled_gamma(&d, 3.0), &d.pump, d.filter(), 1.0).unwrap();
        let mut pairs = vec![(a.p_xpm, b.p_xpm), (a.p_spm, b.p_spm), (a.p_multi, b.p_multi)];
        if let (LimitPower::Finite(x) | LimitPower::LowerBound(x), LimitPower::Finite(y) | LimitPower::LowerBound(y)) =
            (a.p_tpa, b.p_tpa)
        {
            pairs.push((x, y));
        }
        for (x, y) in pairs {
            worst = worst.max(rel(x, 3.0 * y).abs());
        }
    }
    ok &= worst <= 1e-12;
    notes.push(format!("gamma scaling {worst:.1e}"));

    // exchange symmetry
    let asym = jsa.exchange_asymmetry().unwrap();
    ok &= asym < 1e-8;
    notes.push(format!("asymmetry {asym:.1e}"));

    // partition additivity: adjacent bins covering ω₁ ≥ ω_P
    let wp = jsa.omega_p;
    let top = *jsa.omega1_axis.last().unwrap();
    let bins = 7;
    let width = (top - wp) / bins as f64;
    let total: f64 = (0..bins)
        .map(|k| {
            let f = FilterSpec::new(width / (2.0 * PI), width * (k as f64 + 0.5));
            n_pairs_full(&jsa, &pump, Some(&f)).unwrap()
        })
        .sum();
    let part = rel(total, n1).abs();
    ok &= part <= 1e-6;
    notes.push(format!("partition {part:.1e}"));

    // binding constraints
    let bindings: Vec<(String, LimitKind)> = sfwm::report::bundled_names()
        .map(|n| {
            let d = Design::bundled(n).unwrap();
            (n.to_string(), classify(&d.material, &d.structure, &d.pump, d.filter(), 1.0).unwrap().binding)
        })
        .collect();
    let expect = |n: &str| if n == "cw-ring-si" { LimitKind::MultiPair } else { LimitKind::Xpm };
    let bind_ok = bindings.iter().all(|(n, k)| *k == expect(n));
    ok &= bind_ok;
    notes.push(format!(
        "binding {}",
        bindings.iter().map(|(n, k)| format!("{n}:{}", k.label())).collect::<Vec<_>>().join(" ")
    ));

    outcome(ok, notes.join(", "))
}

fn criterion_6() -> Outcome {
    let cases = [
        ("pulsed-fiber-sio2", 0.0022),
        ("cw-waveguide-as2s3", 14.0),
        ("pulsed-ring-diamond", 0.20),
        ("cw-ring-si", 190.0),
    ];
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, tabulated) in cases {
        let d = Design::bundled(name).unwrap();
        let g = compute_gamma(&d.material, d.structure.a_eff(), d.pump.wavelength);
        let dev = rel(g, tabulated);
        ok &= dev.abs() <= 0.10;
        notes.push(format!("{}: {g:.4} ({:+.1}%)", d.material.name, 100.0 * dev));
    }
    outcome(ok, notes.join(", "))
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, fn() -> Outcome); 6] = [
        (1, "limiting-power table regression", criterion_1),
        (2, "root constants and CW prefactors", criterion_2),
        (3, "oracle vs closed forms", criterion_3),
        (4, "Schmidt suite", criterion_4),
        (5, "invariants", criterion_5),
        (6, "nonlinear parameter cross-check", criterion_6),
    ];
    let mut unexpected = 0;
    for (n, name, run) in criteria {
        let o = run();
        let known = KNOWN_RED.contains(&n);
        let tag = match (o.passed, known) {
            (true, false) => "PASS",
            (true, true) => {
                unexpected += 1;
                "XPASS"
            }
            (false, true) => "FAIL (known)",
            (false, false) => {
                unexpected += 1;
                "FAIL"
            }
        };
        println!("criterion {n} [{name}]: {tag} - {}", o.detail);
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
