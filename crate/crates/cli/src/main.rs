mod output;
mod parse;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use serde_json::{json, Value};

use cwtree::contfrac::{cf_of, construct_hit, path_of, rational_at, Direction, Endpoint};
use cwtree::distribution::{cdf_bounds, cdf_exact, cdf_rational, empirical_cdf, sup_deviation, MAX_SUP_DEPTH};
use cwtree::moments::{ordered_bell_table, MomentTable};
use cwtree::padic::{
    build_orbit, char_poly, empirical_mu, mu, mu_from_orbit, residue_distribution, zeta_p, PadicPrime,
    CHAR_POLY_MAX_P, DEFAULT_MAX_STATES,
};
use cwtree::tree::{generation, generation_sum, SumMode};
use cwtree::walk::{hit_statistics, simulate_walk, Interval, WalkConfig};
use cwtree::{CfReal, GenerationIndex, Rational, TreePath};

use output::{Format, Record, Table};
use parse::render;

/// Largest row the enumeration commands accept without `--unsafe`.
const MAX_DEPTH: u64 = 26;

#[derive(Debug, Parser)]
#[command(name = "cwtree", version, about = "Exact statistics of the Calkin-Wilf tree")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, env = "CWTREE_FORMAT", default_value = "text")]
    format: Format,
    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Lift the depth and orbit size guards.
    #[arg(long = "unsafe", global = true)]
    unsafe_sizes: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exact,
    Closed,
}

#[derive(Debug, Args)]
struct DepthArg {
    /// Row index n >= 1.
    #[arg(long, value_parser = parse::depth)]
    depth: u64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List row n in order.
    Gen(DepthArg),
    /// Sum of row n.
    Sum {
        #[command(flatten)]
        depth: DepthArg,
        #[arg(long, value_enum, default_value = "closed")]
        mode: Mode,
    },
    /// Mean of row n.
    Mean {
        #[command(flatten)]
        depth: DepthArg,
        #[arg(long, value_enum, default_value = "closed")]
        mode: Mode,
    },
    /// Continued fraction expansion of a rational.
    Cf {
        #[arg(value_parser = parse::nonnegative_rational)]
        q: Rational,
    },
    /// Row, position and path of a positive rational.
    Locate {
        #[arg(value_parser = parse::positive_rational)]
        q: Rational,
    },
    /// Node reached by a path from the root.
    At {
        #[arg(value_parser = parse::path)]
        path: TreePath,
    },
    /// A rational inside (alpha, beta) whose path starts with a prefix.
    Hit {
        #[arg(long, value_parser = parse::endpoint)]
        alpha: Endpoint<BigInt>,
        #[arg(long, value_parser = parse::endpoint)]
        beta: Endpoint<BigInt>,
        #[arg(long, value_parser = parse::path, default_value = "")]
        prefix: TreePath,
    },
    /// Limit distribution function at an expansion or rational.
    Cdf {
        #[arg(value_parser = parse::cfreal, allow_hyphen_values = true)]
        x: CfReal,
    },
    /// Share of row n at or below x.
    Ecdf {
        #[command(flatten)]
        depth: DepthArg,
        #[arg(long, value_parser = parse::positive_rational)]
        x: Rational,
    },
    /// Largest distance between the row distribution and the limit.
    Supdev(DepthArg),
    /// Moment estimates from row n.
    Moments {
        /// Largest moment order.
        #[arg(long)]
        max: usize,
        #[command(flatten)]
        depth: DepthArg,
    },
    /// Ordered Bell numbers b_0..b_L.
    Bell {
        #[arg(long)]
        max: usize,
    },
    /// Residues modulo p across row n.
    PadicResidues {
        #[arg(long, value_parser = parse::prime)]
        p: PadicPrime,
        #[command(flatten)]
        depth: DepthArg,
        /// Also print the characteristic polynomial of the residue chain.
        #[arg(long)]
        char_poly: bool,
    },
    /// Orbit chain through G(0,-kappa).
    PadicOrbit {
        #[arg(long, value_parser = parse::prime)]
        p: PadicPrime,
        #[arg(long)]
        kappa: u32,
    },
    /// Limiting share of {x : ord_p(x - z) >= nu}.
    PadicMu {
        #[arg(long, value_parser = parse::prime)]
        p: PadicPrime,
        #[arg(long, value_parser = parse::rational, allow_hyphen_values = true)]
        z: Rational,
        #[arg(long, allow_hyphen_values = true)]
        nu: i64,
        /// Also count the share in this row.
        #[arg(long, value_parser = parse::depth)]
        empirical: Option<u64>,
    },
    /// p-adic zeta function, closed form against the sphere sum.
    Zeta {
        #[arg(long, value_parser = parse::prime)]
        p: PadicPrime,
        #[arg(long, allow_hyphen_values = true)]
        s: f64,
        #[arg(long, default_value_t = 1e-12)]
        tolerance: f64,
    },
    /// Random descent until the walk enters (alpha, beta).
    Walk {
        #[arg(long, value_parser = parse::nonnegative_rational)]
        alpha: Rational,
        /// Upper endpoint, or `inf`.
        #[arg(long, value_parser = parse::upper_endpoint)]
        beta: parse::Upper,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 200)]
        max_steps: u64,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Compute(cwtree::Error),
    Io(io::Error),
}

impl From<cwtree::Error> for Failure {
    fn from(e: cwtree::Error) -> Self {
        Failure::Compute(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

type Outcome<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Outcome<()> {
    let mut out: Box<dyn Write> = match &cli.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    if let Command::Gen(d) = &cli.command {
        if cli.format != Format::Json {
            return stream_generation(cli, d.depth, cli.format, &mut out);
        }
    }
    let record = execute(cli)?;
    record.write(cli.format, &mut out)?;
    out.flush()?;
    Ok(())
}

fn row(cli: &Cli, n: u64) -> Outcome<GenerationIndex> {
    if n > MAX_DEPTH && !cli.unsafe_sizes {
        return Err(Failure::Usage(format!("depth {n} exceeds {MAX_DEPTH}; pass --unsafe to override")));
    }
    Ok(GenerationIndex::new(n)?)
}

fn max_states(cli: &Cli) -> usize {
    if cli.unsafe_sizes {
        usize::MAX
    } else {
        DEFAULT_MAX_STATES
    }
}

fn rat(q: &Rational) -> Value {
    Value::String(render(q))
}

fn float(x: f64) -> Value {
    json!(x)
}

fn stream_generation(cli: &Cli, depth: u64, format: Format, out: &mut dyn Write) -> Outcome<()> {
    let n = row(cli, depth)?;
    if format == Format::Csv {
        writeln!(out, "index,value")?;
    }
    for (i, x) in generation::<BigInt>(n).enumerate() {
        match format {
            Format::Csv => writeln!(out, "{},{}", i + 1, render(&x))?,
            _ => writeln!(out, "{}", render(&x))?,
        }
    }
    out.flush()?;
    Ok(())
}

/// 1-based position of the node reached by `path` within its row.
fn position(path: &TreePath) -> BigUint {
    path.moves().fold(BigUint::zero(), |acc, d| (acc << 1u32) + u32::from(d == Direction::R)) + 1u32
}

fn execute(cli: &Cli) -> Outcome<Record> {
    Ok(match &cli.command {
        Command::Gen(d) => {
            let n = row(cli, d.depth)?;
            let mut rec = Record::new("gen", "enumeration").param("depth", d.depth);
            let values: Vec<Value> = generation::<BigInt>(n).map(|x| rat(&x)).collect();
            rec.result("count", values.len());
            rec.result("elements", values);
            rec
        }
        Command::Sum { depth, mode } => {
            let (sum, provenance) = match mode {
                Mode::Exact => (generation_sum(row(cli, depth.depth)?, SumMode::ExactEnumeration)?, "enumeration"),
                Mode::Closed => (generation_sum(GenerationIndex::new(depth.depth)?, SumMode::ClosedForm)?, "closed_form"),
            };
            let mut rec = Record::new("sum", provenance).param("depth", depth.depth).param("mode", mode_name(*mode));
            rec.result("value", rat(&sum));
            rec
        }
        Command::Mean { depth, mode } => {
            let (mean, provenance) = match mode {
                Mode::Exact => {
                    let n = row(cli, depth.depth)?;
                    let sum = generation_sum(n, SumMode::ExactEnumeration)?;
                    (sum / Rational::from_integer(BigInt::one() << (depth.depth - 1)), "enumeration")
                }
                Mode::Closed => (cwtree::tree::generation_mean(GenerationIndex::new(depth.depth)?), "closed_form"),
            };
            let mut rec = Record::new("mean", provenance).param("depth", depth.depth).param("mode", mode_name(*mode));
            rec.result("value", rat(&mean));
            rec
        }
        Command::Cf { q } => {
            let cf = cf_of(q)?;
            let mut rec = Record::new("cf", "closed_form").param("q", rat(q));
            rec.result("value", cf.to_string());
            rec.result("quotients", cf.quotients().iter().map(|a| Value::String(a.to_string())).collect::<Vec<_>>());
            rec.result("convergents", cf.convergents().iter().map(rat).collect::<Vec<_>>());
            if !q.is_zero() {
                rec.result("row", cf.quotient_sum().to_string());
            }
            rec
        }
        Command::Locate { q } => {
            let path = path_of(q)?;
            let mut rec = Record::new("locate", "closed_form").param("q", rat(q));
            rec.result("value", path.to_run_notation());
            rec.result("path", path.to_string());
            rec.result("row", (path.depth() + 1).to_string());
            rec.result("position", position(&path).to_string());
            rec
        }
        Command::At { path } => {
            let x = rational_at::<BigInt>(path)?;
            let mut rec = Record::new("at", "closed_form").param("path", path.to_run_notation());
            rec.result("value", rat(&x));
            rec.result("row", (path.depth() + 1).to_string());
            rec.result("position", position(path).to_string());
            rec
        }
        Command::Hit { alpha, beta, prefix } => {
            let h = construct_hit(alpha, beta, prefix)?;
            let path = path_of(&h.value)?;
            let mut rec = Record::new("hit", "closed_form")
                .param("alpha", endpoint_str(alpha))
                .param("beta", endpoint_str(beta))
                .param("prefix", prefix.to_run_notation());
            rec.result("value", rat(&h.value));
            rec.result("quotients", h.quotients.iter().map(|a| Value::String(a.to_string())).collect::<Vec<_>>());
            rec.result("split_index", h.split_index);
            rec.result("shrunk", h.shrunk);
            rec.result("path", path.to_run_notation());
            rec.result("row", (path.depth() + 1).to_string());
            rec
        }
        Command::Cdf { x } => {
            let mut rec = Record::new("cdf", "closed_form").param("x", x.to_string());
            match x {
                CfReal::Truncated(_) => {
                    let (a, b) = cdf_bounds(x)?;
                    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                    rec.result("lower", rat(&lo));
                    rec.result("upper", rat(&hi));
                }
                _ => {
                    let v = cdf_exact(x)?;
                    rec.result("value", rat(v.value()));
                    rec.result("decimal", float(v.value().to_f64().unwrap()));
                    rec.result("dyadic", v.is_dyadic());
                }
            }
            rec
        }
        Command::Ecdf { depth, x } => {
            let n = row(cli, depth.depth)?;
            let fe = empirical_cdf(n, x)?;
            let f = cdf_rational(x)?;
            let dev = if fe > f { &fe - &f } else { &f - &fe };
            let mut rec = Record::new("ecdf", "enumeration").param("depth", depth.depth).param("x", rat(x));
            rec.result("value", rat(&fe));
            rec.result("limit", rat(&f));
            rec.result("deviation", rat(&dev));
            rec.result("bound", rat(&Rational::new(BigInt::one(), BigInt::one() << depth.depth)));
            rec
        }
        Command::Supdev(d) => {
            let limit = if cli.unsafe_sizes { MAX_SUP_DEPTH } else { MAX_DEPTH.min(MAX_SUP_DEPTH) };
            if d.depth > limit {
                return Err(Failure::Usage(format!("supdev depth {} exceeds {limit}", d.depth)));
            }
            let v = sup_deviation(GenerationIndex::new(d.depth)?)?;
            let bound = Rational::new(BigInt::one(), BigInt::one() << d.depth);
            let mut rec = Record::new("supdev", "enumeration").param("depth", d.depth);
            rec.result("value", rat(&v));
            rec.result("bound", rat(&bound));
            rec.result("within_bound", v <= bound);
            rec
        }
        Command::Moments { max, depth } => {
            let n = row(cli, depth.depth)?;
            let t = MomentTable::build(*max, n)?;
            let mut rec = Record::new("moments", format!("empirical({})", depth.depth))
                .param("max", *max)
                .param("depth", depth.depth);
            rec.result("m_log2", float(t.m_log2));
            rec.result("precision", "f64");
            let mut table =
                Table::new(&["L", "M_empirical", "m_empirical", "M_from_relation", "asymptotic", "ratio", "bell"]);
            for r in &t.rows {
                table.push(vec![
                    json!(r.l),
                    float(r.big_m_empirical),
                    float(r.m_empirical),
                    float(r.big_m_from_relation),
                    float(r.asymptotic),
                    float(r.ratio),
                    Value::String(r.bell.to_string()),
                ]);
            }
            rec.table = Some(table);
            rec
        }
        Command::Bell { max } => {
            let mut rec = Record::new("bell", "closed_form").param("max", *max);
            let mut table = Table::new(&["L", "b"]);
            for (l, b) in ordered_bell_table(*max).iter().enumerate() {
                table.push(vec![json!(l), Value::String(b.to_string())]);
            }
            rec.table = Some(table);
            rec
        }
        Command::PadicResidues { p, depth, char_poly: with_poly } => {
            let n = row(cli, depth.depth)?;
            let d = residue_distribution(*p, n)?;
            let mut rec = Record::new("padic-residues", "enumeration").param("p", p.get()).param("depth", depth.depth);
            rec.result("agree", d.agree());
            if *with_poly {
                rec.result("char_poly", char_poly(*p, CHAR_POLY_MAX_P)?.to_string());
            }
            let mut table = Table::new(&["residue", "counting", "recurrence"]);
            for ((label, c), r) in d.labels.iter().zip(&d.counting).zip(&d.recurrence) {
                table.push(vec![Value::String(label.clone()), rat(c), rat(r)]);
            }
            rec.table = Some(table);
            rec
        }
        Command::PadicOrbit { p, kappa } => {
            let expected = p.get().checked_pow(*kappa).and_then(|a| a.checked_add(p.get().pow(kappa.saturating_sub(1))));
            if !cli.unsafe_sizes && expected.is_none_or(|s| s > DEFAULT_MAX_STATES as u64) {
                return Err(Failure::Usage(format!(
                    "orbit for p={p}, kappa={kappa} exceeds {DEFAULT_MAX_STATES} states; pass --unsafe to override",
                    p = p.get()
                )));
            }
            let chain = build_orbit(*p, *kappa, max_states(cli))?;
            let pi = chain.stationary()?;
            let uniform = pi.iter().all(|w| *w == pi[0]);
            let mut rec = Record::new("padic-orbit", "closed_form").param("p", p.get()).param("kappa", *kappa);
            rec.result("states", chain.len());
            rec.result("row_stochastic", chain.is_row_stochastic());
            rec.result("doubly_stochastic", chain.is_doubly_stochastic());
            rec.result("period", chain.period());
            rec.result("stationary_uniform", uniform);
            let mut table = Table::new(&["index", "state", "stationary"]);
            for (i, (s, w)) in chain.states().iter().zip(&pi).enumerate() {
                table.push(vec![json!(i), Value::String(s.to_string()), rat(w)]);
            }
            rec.table = Some(table);
            rec
        }
        Command::PadicMu { p, z, nu, empirical } => {
            let value = mu(*p, z, *nu);
            let mut rec = Record::new("padic-mu", "closed_form").param("p", p.get()).param("z", rat(z)).param("nu", *nu);
            rec.result("value", rat(&value));
            let orbit = match mu_from_orbit(*p, z, *nu, max_states(cli).min(DEFAULT_MAX_STATES)) {
                Ok(v) => rat(&v),
                Err(cwtree::Error::TooLarge(_)) => Value::Null,
                Err(e) => return Err(e.into()),
            };
            rec.result("orbit", orbit);
            if let Some(depth) = empirical {
                let n = row(cli, *depth)?;
                let seen = empirical_mu(*p, z, *nu, n)?;
                let dev = (seen.to_f64().unwrap() - value.to_f64().unwrap()).abs();
                rec.parameters.insert("empirical".into(), json!(depth));
                rec.result("empirical", rat(&seen));
                rec.result("deviation", float(dev));
            }
            rec
        }
        Command::Zeta { p, s, tolerance } => {
            let z = zeta_p(*p, *s, *tolerance)?;
            let mirror = zeta_p(*p, -*s, *tolerance)?;
            let mut rec = Record::new("zeta", "closed_form").param("p", p.get()).param("s", *s);
            rec.result("value", float(z.closed_form));
            rec.result("sphere_sum", float(z.sphere_sum));
            rec.result("difference", float((z.closed_form - z.sphere_sum).abs()));
            rec.result("tail_bound", float(z.tail_bound));
            rec.result("terms", z.terms);
            rec.result("mirror", float(mirror.closed_form));
            rec
        }
        Command::Walk { alpha, beta, seed, trials, max_steps } => {
            let interval = Interval::new(alpha.clone(), beta.0.clone())?;
            let config = WalkConfig::new(*seed, *max_steps, interval)?;
            let stats = hit_statistics(&config, *trials)?;
            let first = simulate_walk(&config);
            let (lo, hi) = stats.wilson_interval(1.959_963_984_540_054);
            let mut rec = Record::new("walk", format!("empirical({trials})"))
                .param("alpha", rat(alpha))
                .param("beta", beta.0.as_ref().map_or(Value::String("inf".into()), rat))
                .param("seed", *seed)
                .param("trials", *trials)
                .param("max_steps", *max_steps);
            rec.result("value", float(stats.fraction));
            rec.result("hits", stats.hits);
            rec.result("wilson_95", vec![float(lo), float(hi)]);
            rec.result("first_hit_step", first.hit_step);
            rec.result("first_final_value", rat(&first.final_value));
            let mut table = Table::new(&["step", "count"]);
            for (s, c) in &stats.histogram {
                table.push(vec![json!(s), json!(c)]);
            }
            rec.table = Some(table);
            rec
        }
    })
}

fn endpoint_str(e: &Endpoint<BigInt>) -> String {
    match e {
        Endpoint::Rational(q) => render(q),
        Endpoint::Periodic(x) => x.to_string(),
    }
}

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Exact => "exact",
        Mode::Closed => "closed",
    }
}
