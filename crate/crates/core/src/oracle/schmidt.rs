//! Schmidt decomposition of a sampled JSA.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::JsaGrid;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchmidtResult {
    /// p_λ, descending, summing to 1.
    pub coefficients: Vec<f64>,
    /// √p₁
    pub largest_amp: f64,
    /// K = 1 / Σ p_λ²
    pub schmidt_number: f64,
}

impl SchmidtResult {
    fn from_singular(mut s: Vec<f64>) -> Result<Self> {
        s.sort_by(|a, b| b.total_cmp(a));
        let total: f64 = s.iter().map(|x| x * x).sum();
        if !(total > 0.0) {
            return Err(Error::invalid("JSA is identically zero"));
        }
        let coefficients: Vec<f64> = s.iter().map(|x| x * x / total).collect();
        let schmidt_number = 1.0 / coefficients.iter().map(|p| p * p).sum::<f64>();
        Ok(SchmidtResult { largest_amp: coefficients[0].sqrt(), coefficients, schmidt_number })
    }
}

/// Full decomposition with mode functions, for reconstruction.
#[derive(Debug, Clone)]
pub struct SchmidtModes {
    pub result: SchmidtResult,
    pub singular_values: Vec<f64>,
    u: DMatrix<Complex64>,
    v_t: DMatrix<Complex64>,
    measure: f64,
}

impl SchmidtModes {
    /// φ rebuilt from the `rank` strongest modes, on the original grid.
    pub fn reconstruct(&self, rank: usize) -> DMatrix<Complex64> {
        let rank = rank.min(self.singular_values.len());
        let (n1, n2) = (self.u.nrows(), self.v_t.ncols());
        let mut out = DMatrix::<Complex64>::zeros(n1, n2);
        for k in 0..rank {
            let s = Complex64::new(self.singular_values[k] / self.measure, 0.0);
            out += self.u.column(k) * self.v_t.row(k) * s;
        }
        out
    }
}

fn check_grid(jsa: &JsaGrid) -> Result<(f64, f64)> {
    let (n1, n2) = jsa.amplitude.shape();
    if n1 != n2 {
        return Err(Error::Grid(format!("Schmidt decomposition needs a square grid, got {n1}x{n2}")));
    }
    let uniform = |axis: &[f64]| {
        let h = axis[1] - axis[0];
        h > 0.0 && axis.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h)
    };
    if !uniform(&jsa.omega1_axis) || !uniform(&jsa.omega2_axis) {
        return Err(Error::Grid("Schmidt decomposition needs uniform axes".into()));
    }
    Ok((jsa.step1(), jsa.step2()))
}

fn scaled(jsa: &JsaGrid, measure: f64) -> DMatrix<Complex64> {
    jsa.amplitude.map(|z| z * measure)
}

/// p_λ from the singular values of φ·√(dω₁dω₂).
pub fn schmidt_decompose(jsa: &JsaGrid) -> Result<SchmidtResult> {
    let (h1, h2) = check_grid(jsa)?;
    let measure = (h1 * h2).sqrt();
    let real = jsa.amplitude.iter().all(|z| z.im == 0.0);
    let symmetric = real && jsa.exchange_asymmetry().is_some_and(|a| a == 0.0);
    let s: Vec<f64> = if symmetric {
        let m = jsa.amplitude.map(|z| z.re * measure);
        m.symmetric_eigenvalues().iter().map(|x| x.abs()).collect()
    } else if real {
        let m = jsa.amplitude.map(|z| z.re * measure);
        m.singular_values().iter().copied().collect()
    } else {
        scaled(jsa, measure).singular_values().iter().copied().collect()
    };
    SchmidtResult::from_singular(s)
}

/// Decomposition keeping the mode functions.
pub fn schmidt_modes(jsa: &JsaGrid) -> Result<SchmidtModes> {
    let (h1, h2) = check_grid(jsa)?;
    let measure = (h1 * h2).sqrt();
    let svd = scaled(jsa, measure).svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v)) => (u, v),
        _ => return Err(Error::Convergence("SVD did not return singular vectors".into())),
    };
    // nalgebra does not promise an order; sort modes by strength.
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let singular_values: Vec<f64> = order.iter().map(|&k| svd.singular_values[k]).collect();
    let u = DMatrix::from_fn(u.nrows(), order.len(), |i, k| u[(i, order[k])]);
    let v_t = DMatrix::from_fn(order.len(), v_t.ncols(), |k, j| v_t[(order[k], j)]);
    Ok(SchmidtModes {
        result: SchmidtResult::from_singular(singular_values.clone())?,
        singular_values,
        u,
        v_t,
        measure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_from(f: impl Fn(f64, f64) -> Complex64, n: usize, h: f64) -> JsaGrid {
        let axis: Vec<f64> = (0..n).map(|k| 1e15 + h * (k as f64 - (n / 2) as f64)).collect();
        let amplitude = DMatrix::from_fn(n, n, |i, j| f(axis[i] - 1e15, axis[j] - 1e15));
        let norm = amplitude.iter().map(|z| z.norm_sqr()).sum::<f64>() * h * h;
        JsaGrid { omega1_axis: axis.clone(), omega2_axis: axis, amplitude, norm, gamma_l: 1.0, fwhm: 1e-12, omega_p: 1e15 }
    }

    #[test]
    fn separable_amplitude_is_rank_one() {
        let g = |x: f64| (-(x / 3e11).powi(2)).exp() * (1.0 + x / 1e12);
        let jsa = grid_from(|a, b| Complex64::new(g(a) * g(b), 0.0), 64, 2e10);
        let r = schmidt_decompose(&jsa).unwrap();
        assert!((r.schmidt_number - 1.0).abs() < 1e-6);
        assert!((r.coefficients[0] - 1.0).abs() < 1e-9);
        assert!((r.coefficients.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn complex_and_real_paths_agree() {
        let f = |a: f64, b: f64| (-((a + b) / 2e11).powi(2) - ((a - b) / 8e11).powi(2)).exp();
        let real = grid_from(|a, b| Complex64::new(f(a, b), 0.0), 48, 3e10);
        let phased = grid_from(|a, b| Complex64::from_polar(f(a, b), 0.7), 48, 3e10);
        let r = schmidt_decompose(&real).unwrap();
        let c = schmidt_decompose(&phased).unwrap();
        assert!(r.schmidt_number > 1.5);
        assert!((r.schmidt_number / c.schmidt_number - 1.0).abs() < 1e-9);
        assert!((r.coefficients.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn reconstruction_recovers_amplitude() {
        let f = |a: f64, b: f64| Complex64::new((-((a + b) / 2e11).powi(2) - ((a - b) / 6e11).powi(2)).exp(), 0.1 * a / 1e12);
        let jsa = grid_from(f, 40, 3e10);
        let modes = schmidt_modes(&jsa).unwrap();
        let back = modes.reconstruct(40);
        let err = (&back - &jsa.amplitude).iter().fold(0.0f64, |m, z| m.max(z.norm()));
        assert!(err < 1e-10 * jsa.peak(), "{err}");
        let (p, q) = (modes.result.coefficients[0], schmidt_decompose(&jsa).unwrap().coefficients[0]);
        assert!((p - q).abs() < 1e-9);
    }

    #[test]
    fn non_square_rejected() {
        let mut jsa = grid_from(|_, _| Complex64::new(1.0, 0.0), 8, 1e10);
        jsa.amplitude = DMatrix::from_element(8, 7, Complex64::new(1.0, 0.0));
        jsa.omega2_axis.pop();
        assert!(matches!(schmidt_decompose(&jsa), Err(Error::Grid(_))));
    }
}
