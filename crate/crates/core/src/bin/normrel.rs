use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use normrel::coset::{canonicalize, CanonicalCoset};
use normrel::error::Error;
use normrel::hecke::SatakeData;
use normrel::norm::{certificate, delta0_datum, delta1_datum, delta1_scalar, random_certified_delta};
use normrel::padic::{is_prime, parse_q, GElement, Mat2};
use normrel::report::{
    delta1_lattice_scalar, hecke_json, oracle_check, parse_coset, parse_hecke, parse_satake,
    suite_delta0, suite_delta1, suite_oracle, suite_random, volume_table, Check, RandomCounts, Report,
};
use normrel::schwartz::{Level, Variant, DEFAULT_CEILING};
use rand::SeedableRng;

#[derive(Parser)]
#[command(name = "normrel", version, about = "Hecke operators and local norm-relation certificates for GL2 x GL2")]
struct Cli {
    #[arg(long, global = true, default_value_t = 3)]
    prime: u64,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Truncation order for formal series.
    #[arg(long, global = true, default_value_t = 12)]
    order: i64,
    /// Largest residue count for stabilizer enumeration.
    #[arg(long, global = true, default_value_t = DEFAULT_CEILING)]
    ceiling: u64,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Delta0,
    Delta1,
    Random,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum Datum {
    Delta0,
    Delta1,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scalar {
    /// `1 / ((p-1)^2 (p+1))` as printed in the source statement.
    Literal,
    /// `p (p-1)^2 (p+1)`, which lies in the lattice.
    Lattice,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    S,
    S0,
}

#[derive(Subcommand)]
enum Cmd {
    /// Normal form (r0,r1,m,n) of P g G° from eight entries a1 b1 c1 d1 a2 b2 c2 d2.
    Canonicalize {
        #[arg(num_args = 8, allow_negative_numbers = true)]
        entries: Vec<String>,
    },
    /// Evaluate a Hecke expression such as "T1*T2 - 2*S1^-1 + P'" under Θ.
    HeckeEval {
        expr: String,
        #[arg(long)]
        satake: Option<String>,
    },
    /// Run the norm-relation suites.
    Verify {
        #[arg(value_enum)]
        which: Which,
        #[arg(long, value_enum, default_value_t = Scalar::Lattice)]
        scalar: Scalar,
    },
    /// Compare truncated series and closed forms of Λ.
    Oracle {
        #[arg(long)]
        coset: Option<String>,
        #[arg(long)]
        satake: Option<String>,
        #[arg(long, default_value_t = 20)]
        count: usize,
    },
    /// Cap volumes: closed form against enumeration.
    Volumes {
        #[arg(long, default_value_t = 2)]
        range: i64,
    },
    /// Emit an ideal certificate.
    Certificate {
        #[arg(value_enum)]
        datum: Datum,
        #[arg(long, value_enum, default_value_t = VariantArg::S)]
        variant: VariantArg,
        #[arg(long, value_enum, default_value_t = Scalar::Lattice)]
        scalar: Scalar,
    },
}

fn exit_for(e: &Error) -> u8 {
    match e {
        Error::Falsification(_) => 1,
        Error::Domain(_) | Error::Precondition(_) => 2,
        Error::Resource(_) | Error::Window(_) => 3,
    }
}

fn delta1_n(p: u64, s: Scalar) -> normrel::padic::Q {
    match s {
        Scalar::Literal => delta1_scalar(p),
        Scalar::Lattice => delta1_lattice_scalar(p),
    }
}

fn run(cli: &Cli) -> Result<Report, Error> {
    let p = cli.prime;
    match &cli.cmd {
        Cmd::Canonicalize { entries } => {
            let v = entries.iter().map(|s| parse_q(s)).collect::<Result<Vec<_>, _>>()?;
            let m1 = Mat2::new(v[0].clone(), v[1].clone(), v[2].clone(), v[3].clone());
            let m2 = Mat2::new(v[4].clone(), v[5].clone(), v[6].clone(), v[7].clone());
            if !m1.is_invertible() || !m2.is_invertible() {
                return Err(Error::domain("singular matrix"));
            }
            let x = canonicalize(p, &GElement::new(m1, m2));
            let mut r = Report::new("canonicalize", p, None);
            r.data = json!({ "coset": x.to_string(), "r0": x.r0, "r1": x.r1, "m": x.m, "n": x.n });
            r.summary = Some(x.to_string());
            Ok(r)
        }
        Cmd::HeckeEval { expr, satake } => {
            let h = parse_hecke(p, expr)?;
            let mut r = Report::new("hecke-eval", p, None);
            let mut data = json!({ "element": hecke_json(&h), "integral": h.is_integral() });
            if let Some(s) = satake {
                let sat = parse_satake(p, s)?;
                data["theta"] = json!(h.theta_eval(&sat).to_string());
            }
            r.data = data;
            Ok(r)
        }
        Cmd::Verify { which, scalar } => {
            let mut r = Report::new("verify", p, Some(cli.seed));
            let (d0, d1, rnd) = match which {
                Which::Delta0 => (true, false, false),
                Which::Delta1 => (false, true, false),
                Which::Random => (false, false, true),
                Which::All => (true, true, true),
            };
            if d0 {
                r.checks.extend(suite_delta0(p, cli.ceiling)?);
            }
            if d1 {
                r.checks.extend(suite_delta1(p, &delta1_n(p, *scalar), cli.ceiling)?);
            }
            if rnd {
                let ell = if p > 2 && (p - 1).is_multiple_of(2) { Some(2) } else { None };
                r.checks.extend(suite_random(p, cli.seed, cli.ceiling, RandomCounts::default(), ell)?);
            }
            Ok(r)
        }
        Cmd::Oracle { coset, satake, count } => {
            let mut r = Report::new("oracle", p, Some(cli.seed));
            match coset {
                Some(c) => {
                    let x: CanonicalCoset = parse_coset(c)?;
                    let sat = match satake {
                        Some(s) => parse_satake(p, s)?,
                        None => SatakeData::random(p, &mut rand_chacha::ChaCha8Rng::seed_from_u64(cli.seed)),
                    };
                    r.checks.push(oracle_check(&x, &sat, cli.order));
                }
                None => r.checks.extend(suite_oracle(p, cli.seed, cli.order, *count, 1)),
            }
            Ok(r)
        }
        Cmd::Volumes { range } => {
            let mut r = Report::new("volumes", p, None);
            let (checks, table) = volume_table(p, *range);
            r.checks = checks;
            r.data = table;
            Ok(r)
        }
        Cmd::Certificate { datum, variant, scalar } => {
            let v = match variant {
                VariantArg::S => Variant::S,
                VariantArg::S0 => Variant::S0,
            };
            let delta = match datum {
                Datum::Delta0 => delta0_datum(p),
                Datum::Delta1 => delta1_datum(p, delta1_n(p, *scalar)),
                Datum::Random => {
                    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cli.seed);
                    random_certified_delta(p, &mut rng, Level::DetP, v, cli.ceiling)?
                }
            };
            // δ₁ is asserted to lie in the lattice, so a failed precondition there
            // refutes the claim rather than the input.
            let cert = certificate(p, &delta, v, cli.ceiling).map_err(|e| match (datum, e) {
                (Datum::Delta1, Error::Precondition(m)) => Error::Falsification(m),
                (_, e) => e,
            })?;
            let mut r = Report::new("certificate", p, Some(cli.seed));
            r.checks.push(Check::new("identity and integrality", cert.verify(), json!(null)));
            let mut data = serde_json::to_value(cert.to_json()).unwrap();
            data["level"] = json!("DetP");
            data["variant"] = json!(format!("{v:?}"));
            data["delta"] = json!(delta
                .iter()
                .map(|e| json!({
                    "coeff": normrel::padic::q_str(&e.coeff),
                    "phi": e.phi.to_json(),
                    "g": [e.g.s1.entries().map(normrel::padic::q_str), e.g.s2.entries().map(normrel::padic::q_str)],
                }))
                .collect::<Vec<_>>());
            r.data = data;
            Ok(r)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if !is_prime(cli.prime) {
        eprintln!("error: --prime {} is not prime", cli.prime);
        return ExitCode::from(2);
    }
    let report = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_for(&e));
        }
    };
    let body = match cli.format {
        Format::Json => report.to_json(),
        Format::Text => report.to_text(),
    };
    match &cli.out {
        Some(path) => {
            if let Err(e) = fs::write(path, &body) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{body}"),
    }
    if report.all_ok() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
