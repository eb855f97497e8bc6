//! Dense text export of a JSA.
//!
//! Layout:
//!
//! ```text
//! # sfwm-jsa 1
//! # omega1 <start> <step> <n1>
//! # omega2 <start> <step> <n2>
//! # omega_p <rad/s> fwhm <s> gamma_l <1/W>
//! <re(0,0)> <im(0,0)> <re(0,1)> <im(0,1)> ...   (n1 rows of 2*n2 numbers)
//! ```
//!
//! Row i holds φ(ω₁ᵢ, ·). Angular frequencies in rad/s.

use std::io::{BufRead, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::JsaGrid;
use crate::{Error, Result};

const MAGIC: &str = "# sfwm-jsa 1";

pub fn write_jsa(jsa: &JsaGrid, mut out: impl Write) -> Result<()> {
    let (n1, n2) = jsa.amplitude.shape();
    writeln!(out, "{MAGIC}")?;
    writeln!(out, "# omega1 {:e} {:e} {n1}", jsa.omega1_axis[0], jsa.step1())?;
    writeln!(out, "# omega2 {:e} {:e} {n2}", jsa.omega2_axis[0], jsa.step2())?;
    writeln!(out, "# omega_p {:e} fwhm {:e} gamma_l {:e}", jsa.omega_p, jsa.fwhm, jsa.gamma_l)?;
    let mut line = String::new();
    for i in 0..n1 {
        line.clear();
        for j in 0..n2 {
            let z = jsa.amplitude[(i, j)];
            if j > 0 {
                line.push(' ');
            }
            line.push_str(&format!("{:e} {:e}", z.re, z.im));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn header_axis(line: &str, name: &str) -> Result<(f64, f64, usize)> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != 5 || fields[0] != "#" || fields[1] != name {
        return Err(parse_err(format!("expected '# {name} <start> <step> <n>', got '{line}'")));
    }
    let num = |s: &str| s.parse::<f64>().map_err(|e| parse_err(format!("{name}: {e}")));
    let n = fields[4].parse::<usize>().map_err(|e| parse_err(format!("{name} count: {e}")))?;
    Ok((num(fields[2])?, num(fields[3])?, n))
}

pub fn read_jsa(input: impl BufRead) -> Result<JsaGrid> {
    let mut lines = input.lines();
    let mut next = || -> Result<String> {
        lines.next().ok_or_else(|| parse_err("unexpected end of JSA file"))?.map_err(Error::from)
    };
    if next()?.trim() != MAGIC {
        return Err(parse_err("not an sfwm-jsa file"));
    }
    let (s1, h1, n1) = header_axis(&next()?, "omega1")?;
    let (s2, h2, n2) = header_axis(&next()?, "omega2")?;
    let meta_line = next()?;
    let meta: Vec<&str> = meta_line.split_whitespace().collect();
    if meta.len() != 7 || meta[1] != "omega_p" || meta[3] != "fwhm" || meta[5] != "gamma_l" {
        return Err(parse_err(format!("bad metadata line '{meta_line}'")));
    }
    let num = |s: &str| s.parse::<f64>().map_err(|e| parse_err(e.to_string()));
    let (omega_p, fwhm, gamma_l) = (num(meta[2])?, num(meta[4])?, num(meta[6])?);

    let mut amplitude = DMatrix::<Complex64>::zeros(n1, n2);
    for i in 0..n1 {
        let row = next()?;
        let vals: Vec<f64> = row.split_whitespace().map(num).collect::<Result<_>>()?;
        if vals.len() != 2 * n2 {
            return Err(parse_err(format!("row {i}: expected {} numbers, got {}", 2 * n2, vals.len())));
        }
        for j in 0..n2 {
            amplitude[(i, j)] = Complex64::new(vals[2 * j], vals[2 * j + 1]);
        }
    }
    let omega1_axis: Vec<f64> = (0..n1).map(|k| s1 + h1 * k as f64).collect();
    let omega2_axis: Vec<f64> = (0..n2).map(|k| s2 + h2 * k as f64).collect();
    let norm = super::trapezoid_2d(&amplitude, h1, h2);
    Ok(JsaGrid { omega1_axis, omega2_axis, amplitude, norm, gamma_l, fwhm, omega_p })
}
