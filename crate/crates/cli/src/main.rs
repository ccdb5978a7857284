//! Command-line surface for the curve calculus: Hamiltonians of the
//! quantized dispersionless KdV hierarchy, their commutators, branched-cover
//! counts, and the glued series of closed curves and of the stationary
//! descendants of the projective line. All output is exact and byte-stable.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use curvegw_core::hurwitz::{eta_log_series, hurwitz_number, HurwitzKey, Partition};
use curvegw_core::pipelines::{curve_potential, p1_descendant_potential};
use curvegw_core::qdkdv::{commute_residual, hamiltonian_fermionic, HamiltonianFamily};
use curvegw_core::scalar::ScalarSeries;
use curvegw_core::{CalcError, ClassVar, TruncationContext};

#[derive(Parser)]
#[command(name = "curvegw", version, about = "Exact operator calculus for counting covers of curves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Trunc {
    /// Highest power of the degree marker z.
    #[arg(long, default_value_t = 5)]
    max_z: u32,
    /// Energy bound per group of matched orbit variables.
    #[arg(long, default_value_t = 6)]
    max_energy: u32,
    /// Total descendant order bound.
    #[arg(long, default_value_t = 4)]
    max_s_order: u32,
    /// Highest Hamiltonian index used in descendant dressings.
    #[arg(long, default_value_t = 6)]
    max_n: u32,
}

impl Trunc {
    fn ctx(&self) -> TruncationContext {
        TruncationContext::default()
            .with_max_z(self.max_z)
            .with_max_energy(self.max_energy)
            .with_max_s_order(self.max_s_order)
            .with_max_n(self.max_n)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Print one Hamiltonian of the hierarchy in both presentations.
    Hamiltonian {
        /// Index of the Hamiltonian; -1 is admitted.
        #[arg(long, allow_negative_numbers = true)]
        n: i32,
        #[command(flatten)]
        trunc: Trunc,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Check that two Hamiltonians of the hierarchy commute.
    Commute {
        #[arg(long, allow_negative_numbers = true)]
        m: i32,
        #[arg(long, allow_negative_numbers = true)]
        n: i32,
        #[command(flatten)]
        trunc: Trunc,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Weighted count of connected branched covers with three profiles.
    Hurwitz {
        /// Degree of the cover.
        #[arg(long)]
        d: u32,
        /// Profile over the first point, comma-separated parts.
        #[arg(long)]
        mu0: String,
        /// Profile over the second point, comma-separated parts.
        #[arg(long)]
        mu1: String,
        /// Profile over the third point, comma-separated parts.
        #[arg(long)]
        muinf: String,
    },
    /// Degree table of the elliptic-curve series against the divisor-sum oracle.
    Elliptic {
        #[command(flatten)]
        trunc: Trunc,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Stationary descendant series of the projective line in one degree.
    P1 {
        /// Degree of the covers.
        #[arg(long)]
        d: u32,
        #[command(flatten)]
        trunc: Trunc,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Glued series of the closed curve of one genus.
    Curve {
        /// Genus of the target curve.
        #[arg(long)]
        g: u32,
        #[command(flatten)]
        trunc: Trunc,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

enum Failure {
    Usage(String),
    Internal(String),
}

impl From<CalcError> for Failure {
    fn from(e: CalcError) -> Failure {
        Failure::Internal(e.to_string())
    }
}

/// Errors caused by flag values rather than by the computation itself.
fn as_usage(e: CalcError) -> Failure {
    match e {
        CalcError::AlphabetMismatch(_) | CalcError::DegreeOverBound { .. } => {
            Failure::Usage(e.to_string())
        }
        other => Failure::Internal(other.to_string()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<String, Failure> {
    match command {
        Command::Hamiltonian { n, trunc, format } => cmd_hamiltonian(n, &trunc.ctx(), format),
        Command::Commute { m, n, trunc, format } => cmd_commute(m, n, &trunc.ctx(), format),
        Command::Hurwitz { d, mu0, mu1, muinf } => cmd_hurwitz(d, &mu0, &mu1, &muinf),
        Command::Elliptic { trunc, format } => cmd_elliptic(&trunc.ctx(), format),
        Command::P1 { d, trunc, format } => cmd_p1(d, &trunc.ctx(), format),
        Command::Curve { g, trunc, format } => cmd_curve(g, &trunc.ctx(), format),
    }
}

/// Doubled mode indices covered by the energy bound, smallest first.
fn doubled_modes(ctx: &TruncationContext) -> impl Iterator<Item = i32> {
    (1..=2 * ctx.max_energy as i32 - 1).step_by(2)
}

fn cmd_hamiltonian(n: i32, ctx: &TruncationContext, format: Format) -> Result<String, Failure> {
    if n < -1 {
        return Err(Failure::Usage(format!("--n must be at least -1, got {n}")));
    }
    let family = HamiltonianFamily::new(ctx, n.max(0) as u32);
    let bosonic = family.bosonic(n);
    let fermionic = (n >= 0).then(|| hamiltonian_fermionic(n as u32));
    match format {
        Format::Text => {
            let mut out = format!("bosonic: {bosonic}\n");
            if let Some(h) = &fermionic {
                out.push_str(&format!("fermionic constant: {}\n", h.constant));
                for k2 in doubled_modes(ctx) {
                    out.push_str(&format!("fermionic weight {k2}/2: {}\n", h.mode_weight(k2)));
                }
            }
            Ok(out)
        }
        Format::Json => {
            let fermionic = match &fermionic {
                None => Value::Null,
                Some(h) => json!({
                    "constant": h.constant.to_string(),
                    "weights": doubled_modes(ctx)
                        .map(|k2| json!({"k2": k2, "weight": h.mode_weight(k2).to_string()}))
                        .collect::<Vec<_>>(),
                }),
            };
            Ok(format!(
                "{}\n",
                json!({"n": n, "bosonic": bosonic.to_json(), "fermionic": fermionic})
            ))
        }
    }
}

fn cmd_commute(m: i32, n: i32, ctx: &TruncationContext, format: Format) -> Result<String, Failure> {
    if m < -1 || n < -1 {
        return Err(Failure::Usage(format!(
            "--m and --n must be at least -1, got {m} and {n}"
        )));
    }
    let residual = commute_residual(m, n, ctx);
    let pass = residual.is_zero();
    match format {
        Format::Text => {
            if pass {
                Ok(format!("[H_{m}, H_{n}] = 0: PASS\n"))
            } else {
                Ok(format!("[H_{m}, H_{n}] = 0: FAIL\nresidual: {residual}\n"))
            }
        }
        Format::Json => Ok(format!(
            "{}\n",
            json!({"m": m, "n": n, "pass": pass, "residual": residual.to_json()})
        )),
    }
}

fn parse_profile(flag: &str, s: &str) -> Result<Partition, Failure> {
    let mut parts = Vec::new();
    for piece in s.split(',') {
        let part: u32 = piece.trim().parse().map_err(|_| {
            Failure::Usage(format!("--{flag} part {piece:?} is not a positive integer"))
        })?;
        if part == 0 {
            return Err(Failure::Usage(format!("--{flag} parts must be positive")));
        }
        parts.push(part);
    }
    parts.sort_unstable_by(|a, b| b.cmp(a));
    Ok(parts)
}

fn cmd_hurwitz(d: u32, mu0: &str, mu1: &str, muinf: &str) -> Result<String, Failure> {
    let mu0 = parse_profile("mu0", mu0)?;
    let mu1 = parse_profile("mu1", mu1)?;
    let muinf = parse_profile("muinf", muinf)?;
    let key = HurwitzKey::new(d, mu0, mu1, muinf).map_err(as_usage)?;
    let (value, genus) = match hurwitz_number(&key).map_err(as_usage)? {
        Some((v, g)) => (v.to_string(), json!(g)),
        None => ("0".to_string(), Value::Null),
    };
    Ok(format!(
        "{}\n",
        json!({
            "d": d,
            "mu0": key.mu0,
            "mu1": key.mu1,
            "muinf": key.muinf,
            "value": value,
            "genus": genus,
        })
    ))
}

fn cmd_elliptic(ctx: &TruncationContext, format: Format) -> Result<String, Failure> {
    let glued = curve_potential(1, ctx).map_err(as_usage)?;
    let oracle = eta_log_series(ctx.max_z);
    let mut rows = Vec::new();
    for d in 1..=ctx.max_z {
        let coefficient = glued
            .potential
            .z_coefficient(d)
            .set_classical_zero(ClassVar::S2)
            .constant_part();
        let expected = ScalarSeries::from_rational(oracle[d as usize].clone());
        rows.push((d, coefficient.clone(), expected.clone(), coefficient == expected));
    }
    match format {
        Format::Text => {
            let mut out = format!("glued series of the elliptic curve, z-degrees 1..={}\n", ctx.max_z);
            for (d, coefficient, expected, pass) in &rows {
                let verdict = if *pass { "PASS" } else { "FAIL" };
                out.push_str(&format!(
                    "d={d} coefficient={coefficient} oracle={expected} {verdict}\n"
                ));
            }
            out.push_str(&format!("dropped constant: {}\n", glued.dropped_constant));
            Ok(out)
        }
        Format::Json => {
            let rows: Vec<Value> = rows
                .iter()
                .map(|(d, coefficient, expected, pass)| {
                    json!({
                        "d": d,
                        "coefficient": coefficient.to_string(),
                        "oracle": expected.to_string(),
                        "pass": pass,
                    })
                })
                .collect();
            Ok(format!(
                "{}\n",
                json!({
                    "max_z": ctx.max_z,
                    "rows": rows,
                    "dropped_constant": glued.dropped_constant.to_string(),
                })
            ))
        }
    }
}

fn cmd_p1(d: u32, ctx: &TruncationContext, format: Format) -> Result<String, Failure> {
    let result = p1_descendant_potential(d, ctx).map_err(as_usage)?;
    match format {
        Format::Text => {
            let mut out = format!(
                "stationary descendant series of the projective line, degree {}\n",
                result.degree
            );
            out.push_str(&format!("series: {}\n", result.series.poly()));
            match &result.closed_form {
                Some(f) => out.push_str(&format!("closed form: {f}\n")),
                None => out.push_str("closed form: none\n"),
            }
            if let Some(shift) = result.shift {
                out.push_str(&format!("hbar shift: {shift}\n"));
            }
            for note in &result.notes {
                out.push_str(&format!("note: {note}\n"));
            }
            Ok(out)
        }
        Format::Json => Ok(format!(
            "{}\n",
            json!({
                "degree": result.degree,
                "series": result.series.poly().to_json(),
                "closed_form": result.closed_form.as_ref().map(|f| f.to_json()),
                "hbar_shift": result.shift,
                "notes": result.notes,
            })
        )),
    }
}

fn cmd_curve(g: u32, ctx: &TruncationContext, format: Format) -> Result<String, Failure> {
    let glued = curve_potential(g, ctx).map_err(as_usage)?;
    match format {
        Format::Text => {
            let mut out = format!("glued series of the closed genus-{g} curve\n");
            out.push_str(&format!("potential: {}\n", glued.potential));
            out.push_str(&format!("dropped constant: {}\n", glued.dropped_constant));
            for note in &glued.notes {
                out.push_str(&format!("note: {note}\n"));
            }
            Ok(out)
        }
        Format::Json => Ok(format!(
            "{}\n",
            json!({
                "g": g,
                "potential": glued.potential.to_json(),
                "dropped_constant": glued.dropped_constant.to_string(),
                "notes": glued.notes,
            })
        )),
    }
}
