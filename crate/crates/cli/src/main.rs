//! `ncsos`: command-line front end. Every subcommand writes JSON to stdout.
//!
//! Exit codes: 0 ok, 1 usage or parse error, 2 infeasible (or no
//! decomposition found), 3 a rank bound failed.

use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use ncsos::gram::build_gram_space_with_degree;
use ncsos::parse::format_word;
use ncsos::random::{random_poly, rng};
use ncsos::sos::{decompose_in, sdp_problem, SosJson};
use ncsos::theorems::{
    verify_power_bound_with, verify_qqs_bound_with, verify_qsq_bound_with, BoundOptions,
    TheoremError, DEFAULT_BASIS_CAP, DEFAULT_TERM_CAP,
};
use ncsos::{
    build_gram_space, commutes, evaluate, parse, rank_lower_bound, Alphabet, MatrixTuple, NcPoly,
    QqsOutcome, RankCertificate, SosError, SosOptions,
};

const EXIT_USAGE: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_BOUND_FAILED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "ncsos",
    version,
    about = "Sum-of-squares tools for the free *-algebra"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Expr {
    /// Polynomial, e.g. "1 + x1'*x1 + x1*x1'"; `-` reads stdin.
    #[arg(allow_hyphen_values = true)]
    expr: String,
    /// Alphabet size; inferred from the largest variable index if omitted.
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Args)]
struct Output {
    /// Compact JSON (the default).
    #[arg(long, conflicts_with = "pretty")]
    json: bool,
    /// Indented JSON.
    #[arg(long)]
    pretty: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Normalized term list.
    Parse {
        #[command(flatten)]
        expr: Expr,
    },
    /// Gram space: representative, kernel basis, top block, lower bound.
    Gram {
        #[command(flatten)]
        expr: Expr,
        /// Basis degree (default: half the degree, rounded up).
        #[arg(long)]
        degree: Option<usize>,
    },
    /// Sum-of-squares decomposition.
    Sos {
        #[command(flatten)]
        expr: Expr,
        /// Relative eigenvalue cutoff for the numerical rank.
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        #[command(flatten)]
        output: Output,
        /// Also write the SDP that was solved to FILE.
        #[arg(long, value_name = "FILE")]
        dump_sdp: Option<PathBuf>,
    },
    /// Rank bounds only.
    Rank {
        #[command(flatten)]
        expr: Expr,
    },
    /// Evaluates on a matrix tuple.
    Eval {
        #[command(flatten)]
        expr: Expr,
        /// JSON array of n square matrices, each an array of rows.
        #[arg(long, value_name = "FILE")]
        matrices: PathBuf,
    },
    /// Checks the (2n)^d rank bound on q*Sq, q*qS or odd powers of S.
    VerifyBound(VerifyArgs),
    /// Whether two polynomials commute.
    Commutes {
        #[arg(allow_hyphen_values = true)]
        a: String,
        #[arg(allow_hyphen_values = true)]
        b: String,
        #[arg(long)]
        n: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Qsq,
    Qqs,
    Power,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    /// The polynomial q (families qsq, qqs).
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["k", "random"])]
    q: Option<String>,
    /// Odd power (family power).
    #[arg(long, conflicts_with = "random")]
    k: Option<u32>,
    /// Number of random q of degree at most 2 (families qsq, qqs).
    #[arg(long, value_name = "COUNT")]
    random: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_TERM_CAP)]
    term_cap: usize,
    #[arg(long, default_value_t = DEFAULT_BASIS_CAP)]
    basis_cap: usize,
}

/// A failure that maps to an exit code.
struct Failure {
    code: u8,
    message: String,
}

fn usage(message: impl ToString) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.to_string(),
    }
}

fn read_expr(text: &str) -> Result<String, Failure> {
    if text != "-" {
        return Ok(text.to_string());
    }
    let mut buf = String::new();
    std::io::stdin()
        .read_to_string(&mut buf)
        .map_err(|e| usage(format!("reading stdin: {e}")))?;
    Ok(buf)
}

fn parse_expr(expr: &Expr) -> Result<NcPoly, Failure> {
    parse(&read_expr(&expr.expr)?, expr.n).map_err(usage)
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

fn emit<T: Serialize>(value: &T, pretty: bool) {
    let text = if pretty {
        serde_json::to_string_pretty(value)
    } else {
        serde_json::to_string(value)
    };
    println!("{}", text.expect("serializable"));
}

#[derive(Serialize)]
struct TermOut {
    coeff: String,
    word: Vec<u32>,
    text: String,
}

#[derive(Serialize)]
struct ParseOut {
    n: usize,
    degree: Option<usize>,
    symmetric: bool,
    text: String,
    terms: Vec<TermOut>,
}

fn cmd_parse(expr: &Expr) -> Result<(), Failure> {
    let p = parse_expr(expr)?;
    let a = p.alphabet();
    emit(
        &ParseOut {
            n: a.n(),
            degree: p.degree(),
            symmetric: p.is_symmetric(),
            text: p.to_string(),
            terms: p
                .terms()
                .map(|(w, c)| TermOut {
                    coeff: c.to_string(),
                    word: w.letters().to_vec(),
                    text: format_word(a, w),
                })
                .collect(),
        },
        false,
    );
    Ok(())
}

fn cmd_gram(expr: &Expr, degree: Option<usize>) -> Result<(), Failure> {
    let p = parse_expr(expr)?;
    let g = build_gram_space_with_degree(&p, degree).map_err(usage)?;
    emit(&g.to_json(), false);
    Ok(())
}

#[derive(Serialize)]
struct SdpDump<'a> {
    /// Basis rows kept after facial reduction.
    keep: &'a [usize],
    full_dim: usize,
    /// Minimize `<objective, X>` subject to the constraints and `X ⪰ 0`.
    objective: Vec<Vec<f64>>,
    constraints: &'a [ncsos::sdp::Constraint],
}

#[derive(Serialize)]
struct SosFailure {
    status: &'static str,
    message: String,
    rank_lower: Option<usize>,
}

fn cmd_sos(expr: &Expr, tol: f64, pretty: bool, dump: Option<&Path>) -> Result<(), Failure> {
    let p = parse_expr(expr)?;
    let g = build_gram_space(&p).map_err(usage)?;
    if let Some(path) = dump {
        let reduced = sdp_problem(&g);
        let text = match &reduced {
            Some(r) => serde_json::to_string_pretty(&SdpDump {
                keep: &r.keep,
                full_dim: r.full_dim,
                objective: rows(r.problem.objective()),
                constraints: r.problem.constraints(),
            }),
            None => serde_json::to_string_pretty(&serde_json::json!({ "status": "infeasible" })),
        }
        .expect("serializable");
        std::fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    }
    let opts = SosOptions {
        rank_tol: tol,
        ..SosOptions::default()
    };
    match decompose_in(&g, &opts) {
        Ok((d, _)) => {
            emit(&d.to_json(), pretty);
            Ok(())
        }
        Err(SosError::Infeasible { rank_lower }) => {
            emit(&SosJson::infeasible(rank_lower), pretty);
            Err(Failure {
                code: EXIT_INFEASIBLE,
                message: String::new(),
            })
        }
        Err(e @ (SosError::SolverFailed { .. } | SosError::RankBelowBound { .. })) => {
            emit(
                &SosFailure {
                    status: "failed",
                    message: e.to_string(),
                    rank_lower: Some(rank_lower_bound(&g)),
                },
                pretty,
            );
            Err(Failure {
                code: EXIT_INFEASIBLE,
                message: String::new(),
            })
        }
        Err(e) => Err(usage(e)),
    }
}

fn cmd_rank(expr: &Expr) -> Result<(), Failure> {
    let p = parse_expr(expr)?;
    let g = build_gram_space(&p).map_err(usage)?;
    let lower = rank_lower_bound(&g);
    let (cert, code) = match decompose_in(&g, &SosOptions::default()) {
        Ok((d, _)) => (d.certificate, None),
        Err(SosError::NotSymmetric | SosError::Gram(_)) => unreachable!("space already built"),
        Err(_) => (RankCertificate::new(lower, None), Some(EXIT_INFEASIBLE)),
    };
    emit(&cert, false);
    match code {
        None => Ok(()),
        Some(code) => Err(Failure {
            code,
            message: String::new(),
        }),
    }
}

#[derive(Serialize)]
struct EvalOut {
    size: usize,
    matrix: Vec<Vec<f64>>,
    symmetric: bool,
    /// Smallest eigenvalue, for symmetric polynomials.
    min_eigenvalue: Option<f64>,
}

fn read_tuple(path: &Path) -> Result<MatrixTuple, Failure> {
    let text =
        std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let raw: Vec<Vec<Vec<f64>>> =
        serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let mut matrices = Vec::with_capacity(raw.len());
    for (j, rows) in raw.iter().enumerate() {
        let k = rows.len();
        if rows.iter().any(|r| r.len() != k) {
            return Err(usage(format!("matrix {} is not square", j + 1)));
        }
        matrices.push(DMatrix::from_fn(k, k, |r, c| rows[r][c]));
    }
    MatrixTuple::new(matrices).map_err(usage)
}

fn cmd_eval(expr: &Expr, matrices: &Path) -> Result<(), Failure> {
    let tuple = read_tuple(matrices)?;
    let n = expr.n.unwrap_or(tuple.len());
    let p = parse(&read_expr(&expr.expr)?, Some(n)).map_err(usage)?;
    let m = evaluate(&p, &tuple).map_err(usage)?;
    let symmetric = p.is_symmetric();
    emit(
        &EvalOut {
            size: m.nrows(),
            matrix: rows(&m),
            symmetric,
            min_eigenvalue: (symmetric && m.nrows() > 0)
                .then(|| m.clone().symmetric_eigen().eigenvalues.min()),
        },
        false,
    );
    Ok(())
}

fn cmd_commutes(a: &str, b: &str, n: Option<usize>) -> Result<(), Failure> {
    let (a, b) = (read_expr(a)?, read_expr(b)?);
    // Both sides must live over one alphabet.
    let n = match n {
        Some(n) => n,
        None => {
            let pa = parse(&a, None).map_err(usage)?;
            let pb = parse(&b, None).map_err(usage)?;
            pa.alphabet().n().max(pb.alphabet().n())
        }
    };
    let pa = parse(&a, Some(n)).map_err(usage)?;
    let pb = parse(&b, Some(n)).map_err(usage)?;
    emit(
        &serde_json::json!({ "commutes": commutes(&pa, &pb) }),
        false,
    );
    Ok(())
}

/// One line of `verify-bound` output.
#[derive(Serialize)]
#[serde(untagged)]
enum BoundLine {
    Report(ncsos::BoundReport),
    Qqs(QqsOutcome),
}

impl BoundLine {
    /// `None` when the instance does not count (q*q does not commute with S).
    fn satisfied(&self) -> Option<bool> {
        match self {
            BoundLine::Report(r) | BoundLine::Qqs(QqsOutcome::Applicable(r)) => Some(r.satisfied),
            BoundLine::Qqs(QqsOutcome::NotApplicable { .. }) => None,
        }
    }
}

fn check_one(
    family: FamilyArg,
    q: &NcPoly,
    d: usize,
    opts: &BoundOptions,
) -> Result<BoundLine, TheoremError> {
    match family {
        FamilyArg::Qsq => verify_qsq_bound_with(q, d, opts).map(BoundLine::Report),
        FamilyArg::Qqs => verify_qqs_bound_with(q, d, opts).map(BoundLine::Qqs),
        FamilyArg::Power => unreachable!("power takes --k"),
    }
}

fn cmd_verify(args: &VerifyArgs) -> Result<(), Failure> {
    let opts = BoundOptions {
        term_cap: args.term_cap,
        basis_cap: args.basis_cap,
    };
    let alphabet = Alphabet::new(args.n).map_err(usage)?;
    let lines: Vec<Result<BoundLine, TheoremError>> = match args.family {
        FamilyArg::Power => {
            let k = args.k.ok_or_else(|| usage("--family power needs --k"))?;
            if args.q.is_some() {
                return Err(usage("--family power takes --k, not --q"));
            }
            vec![verify_power_bound_with(k, args.n, args.d, &opts).map(BoundLine::Report)]
        }
        family => {
            if args.k.is_some() {
                return Err(usage("--k only applies to --family power"));
            }
            let qs: Vec<NcPoly> = match (&args.q, args.random) {
                (Some(text), None) => vec![parse(&read_expr(text)?, Some(args.n)).map_err(usage)?],
                (None, Some(count)) => {
                    // Drawn sequentially so the set depends only on the seed.
                    let mut r = rng(args.seed);
                    let mut qs = Vec::with_capacity(count);
                    while qs.len() < count {
                        let q = random_poly(&mut r, alphabet, 2, 4);
                        if !q.is_zero() {
                            qs.push(q);
                        }
                    }
                    qs
                }
                _ => return Err(usage("give exactly one of --q or --random")),
            };
            qs.par_iter()
                .map(|q| check_one(family, q, args.d, &opts))
                .collect()
        }
    };

    let mut counted = 0;
    let mut passed = 0;
    for line in lines {
        let line = line.map_err(usage)?;
        emit(&line, false);
        if let Some(ok) = line.satisfied() {
            counted += 1;
            passed += usize::from(ok);
        }
    }
    if passed == counted {
        println!("PASS {passed}/{counted}");
        Ok(())
    } else {
        println!("FAIL {passed}/{counted}");
        Err(Failure {
            code: EXIT_BOUND_FAILED,
            message: String::new(),
        })
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Parse { expr } => cmd_parse(expr),
        Command::Gram { expr, degree } => cmd_gram(expr, *degree),
        Command::Sos {
            expr,
            tol,
            output,
            dump_sdp,
        } => cmd_sos(expr, *tol, output.pretty, dump_sdp.as_deref()),
        Command::Rank { expr } => cmd_rank(expr),
        Command::Eval { expr, matrices } => cmd_eval(expr, matrices),
        Command::VerifyBound(args) => cmd_verify(args),
        Command::Commutes { a, b, n } => cmd_commutes(a, b, *n),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // clap uses 2 for usage errors; 2 means "infeasible" here.
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if !f.message.is_empty() {
                eprintln!("error: {}", f.message);
            }
            ExitCode::from(f.code)
        }
    }
}
