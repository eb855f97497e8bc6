use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sfwm::limits::classify;
use sfwm::oracle::export::write_jsa;
use sfwm::oracle::verify::{compare, verify_cw_constants};
use sfwm::oracle::{build_jsa, FieldModel, GridSpec, OracleOptions};
use sfwm::report::{self, Format, SweepVariable};
use sfwm::{Design, Error, MaterialDb, Result};

#[derive(Parser)]
#[command(name = "sfwm", version, about = "Pair rates and limiting pump powers for SFWM photon-pair sources")]
struct Cli {
    /// Materials table (CSV) to use instead of the bundled one.
    #[arg(long, global = true)]
    db: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct Output {
    #[arg(long, conflicts_with = "csv")]
    json: bool,
    #[arg(long)]
    csv: bool,
}

impl Output {
    fn format(self) -> Format {
        if self.json {
            Format::Json
        } else if self.csv {
            Format::Csv
        } else {
            Format::Text
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Limiting pump powers of a design, binding constraint first.
    Limits {
        /// Design file, or the name of a bundled design.
        design: String,
        /// Safety factor applied to the binding power.
        #[arg(long, default_value_t = 10.0)]
        margin: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Limiting powers of the four bundled designs against published values.
    Table3 {
        /// Relative tolerance for every cell (default: 10% fiber, 5% others).
        #[arg(long)]
        tolerance: Option<f64>,
        #[command(flatten)]
        out: Output,
    },
    /// Pair counts and limits over a range of one parameter.
    Sweep {
        design: String,
        #[arg(long, value_enum)]
        var: Var,
        /// Start of the range, SI units.
        #[arg(long, allow_hyphen_values = true)]
        from: f64,
        #[arg(long, allow_hyphen_values = true)]
        to: f64,
        #[arg(long, default_value_t = 11)]
        points: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Full-integral pair count compared with the closed form.
    Oracle {
        /// Design file or bundled name; omit with --cw-constants.
        design: Option<String>,
        /// Points per grid axis.
        #[arg(long)]
        grid: Option<usize>,
        /// Use the periodic ring response instead of single Lorentzians.
        #[arg(long)]
        airy: bool,
        /// Write the sampled JSA to this file.
        #[arg(long)]
        export: Option<PathBuf>,
        /// Rebuild the CW multi-pair constants from Schmidt decompositions.
        #[arg(long)]
        cw_constants: bool,
        #[command(flatten)]
        out: Output,
    },
    /// List the materials table.
    Materials {
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Var {
    P,
    T,
    Q,
    L,
}

impl From<Var> for SweepVariable {
    fn from(v: Var) -> Self {
        match v {
            Var::P => SweepVariable::Power,
            Var::T => SweepVariable::Fwhm,
            Var::Q => SweepVariable::Q,
            Var::L => SweepVariable::Length,
        }
    }
}

fn materials_db(path: Option<&PathBuf>) -> Result<MaterialDb> {
    match path {
        Some(p) => MaterialDb::from_csv(std::fs::File::open(p)?),
        None => Ok(MaterialDb::bundled()),
    }
}

fn json<T: serde::Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))
}

fn run(cli: Cli) -> Result<(String, bool)> {
    let db = materials_db(cli.db.as_ref())?;
    match cli.command {
        Command::Limits { design, margin, out } => {
            let d = Design::resolve(&design, &db)?;
            let r = classify(&d.material, &d.structure, &d.pump, d.filter(), margin)?;
            Ok((report::render_limits(&d, &r, out.format())?, true))
        }
        Command::Table3 { tolerance, out } => {
            let t = report::table3(tolerance)?;
            Ok((report::render_table3(&t, out.format())?, t.all_within()))
        }
        Command::Sweep { design, var, from, to, points, out } => {
            let d = Design::resolve(&design, &db)?;
            let variable = SweepVariable::from(var);
            let rows = report::sweep(&d, variable, from, to, points)?;
            Ok((report::render_sweep(&rows, variable, out.format())?, true))
        }
        Command::Oracle { design, grid, airy, export, cw_constants, out } => {
            let mut opts = OracleOptions::default();
            if airy {
                opts.field_model = FieldModel::Airy;
            }
            if cw_constants {
                let r = verify_cw_constants(&opts)?;
                let text = match out.format() {
                    Format::Json => json(&r)?,
                    _ => {
                        let mut s = String::from("constant   oracle  closed form  published  dev\n");
                        for c in [&r.filtered, &r.unfiltered] {
                            s += &format!(
                                "{:<8} {:>8.4} {:>12.4} {:>10.2} {:>+6.1}%  K = {:.1}\n",
                                c.label,
                                c.value,
                                c.closed_form,
                                c.expected,
                                100.0 * c.relative_error,
                                c.schmidt_number
                            );
                        }
                        s
                    }
                };
                return Ok((text, r.passed()));
            }
            let name = design.ok_or_else(|| Error::Validation(vec!["oracle needs a design (or --cw-constants)".into()]))?;
            let d = Design::resolve(&name, &db)?;
            if !airy {
                opts.field_model = d.oracle.field_model;
            }
            let points = grid.unwrap_or(d.oracle.points);
            let spec = GridSpec::auto(&d.material, &d.structure, &d.pump, points, &opts)?;
            let cmp = compare(&d.material, &d.structure, &d.pump, d.filter(), &spec, &opts)
                .map_err(|e| match e {
                    Error::Grid(m) => Error::Grid(format!("{m} (try a larger --grid)")),
                    e => e,
                })?;
            if let Some(path) = export {
                let jsa = build_jsa(&d.material, &d.structure, &d.pump, &spec, &opts)?;
                write_jsa(&jsa, std::io::BufWriter::new(std::fs::File::create(path)?))?;
            }
            let text = match out.format() {
                Format::Json => json(&cmp)?,
                _ => {
                    let mut s = format!(
                        "{} ({:?}, {points}x{points} grid)\nclosed form  {:.4e}\noracle       {:.4e}\ndeviation    {:+.2}%\n",
                        d.name,
                        cmp.regime,
                        cmp.closed_form,
                        cmp.oracle,
                        100.0 * cmp.deviation
                    );
                    for v in &cmp.validity {
                        s += &format!("validity     {}: ratio {:.3e} {}\n", v.condition, v.ratio, if v.passed { "ok" } else { "violated" });
                    }
                    s += &match (cmp.budget, cmp.passed) {
                        (Some(b), Some(p)) => format!("budget       {:.0}%: {}\n", 100.0 * b, if p { "pass" } else { "FAIL" }),
                        _ => "budget       none (closed form out of regime)\n".to_string(),
                    };
                    s
                }
            };
            Ok((text, cmp.passed.unwrap_or(true)))
        }
        Command::Materials { out } => {
            let text = match out.format() {
                Format::Json => json(&db.materials)?,
                _ => {
                    let sep = if out.csv { "," } else { "  " };
                    let mut s = ["name", "n2_m2_per_W", "beta_tpa_m_per_W", "beta_tpa_bound", "sigma_fca_m2", "tau_c_s"].join(sep);
                    s.push('\n');
                    for m in &db.materials {
                        let bound = format!("{:?}", m.beta_tpa_bound).to_lowercase();
                        s += &[m.name.clone(), format!("{:e}", m.n2), format!("{:e}", m.beta_tpa), bound, format!("{:e}", m.sigma_fca), format!("{:e}", m.tau_c)]
                            .join(sep);
                        s.push('\n');
                    }
                    s
                }
            };
            Ok((text, true))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok((text, ok)) => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(text.as_bytes());
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
