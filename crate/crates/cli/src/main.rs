//! `krein`: JSON front end for the solvers in `krein-core`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use krein_core::contraction::{compute_face, solve_te_eigenvector, verify_face_theorem, MonotoneSpace};
use krein_core::io::{self, CommonJson, EigenpairJson, FixedStateJson};
use krein_core::krein::{solve_with_fallback, Fallback};
use krein_core::l1::{find_certificate_index, tkk_violation, L1Matrix};
use krein_core::matrix_order::{fixed_state, is_positive_map, SuperOp};
use krein_core::oracle::{differential_run, Family};
use krein_core::{
    common_eigenvector, Cone, CommutingFamily, Error, ErrorClass, NormTag, PositiveOperator,
    Tolerances,
};
use nalgebra::DVector;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

const EXIT_ABSENT: u8 = 1;
const EXIT_HYPOTHESIS: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_INPUT: u8 = 64;
const EXIT_DIMENSION: u8 = 65;

/// Sampled rank-one probes used for the positivity verdict of `channel`.
const POSITIVITY_PROBES: usize = 64;

#[derive(Parser, Debug)]
#[command(name = "krein", version, about = "Positive eigenvectors of adjoints of cone-preserving operators")]
struct Cli {
    /// Write the run manifest here instead of stderr.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    /// Bound on eigen-residuals.
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol: f64,
    /// Relative slack in cone membership.
    #[arg(long, global = true, default_value_t = 1e-9)]
    membership_tol: f64,
    /// First step of the directional-derivative descent.
    #[arg(long, global = true, default_value_t = 1e-7)]
    alpha_probe: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Positive eigenvector of T^T over a cone.
    Solve {
        #[arg(long)]
        matrix: String,
        #[arg(long)]
        cone: String,
        #[arg(long)]
        e: String,
        #[arg(long, default_value = "linf")]
        norm: String,
        #[arg(long, default_value_t = 10_000)]
        max_iter: usize,
        #[arg(long, value_enum, default_value_t = FallbackArg::Auto)]
        fallback: FallbackArg,
    },
    /// Column criterion for invariance of an l1 Krein cone.
    Criterion {
        #[arg(long)]
        matrix: String,
        /// Index to test (one-based); the first that works otherwise.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Face of the unit ball at e, and the face theorem report for T.
    Face {
        #[arg(long)]
        norm: String,
        #[arg(long)]
        e: String,
        #[arg(long)]
        matrix: Option<String>,
    },
    /// Eigenvector over the cone generated by the orthant and e - B.
    TeSolve {
        #[arg(long)]
        matrix: String,
        #[arg(long)]
        e: String,
        #[arg(long, default_value = "linf")]
        norm: String,
        #[arg(long, default_value_t = 10_000)]
        max_iter: usize,
    },
    /// Fixed density matrix of the adjoint of a positive map.
    Channel {
        #[command(flatten)]
        source: MapSource,
        #[arg(long, default_value_t = 10_000)]
        max_iter: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Common eigenvector of a commuting family.
    Common {
        #[arg(long, num_args = 1.., required = true)]
        matrices: Vec<String>,
        /// Defaults to the orthant.
        #[arg(long)]
        cone: Option<String>,
        /// Defaults to the all-ones vector.
        #[arg(long)]
        e: Option<String>,
        #[arg(long, default_value = "linf")]
        norm: String,
        #[arg(long, default_value_t = 10_000)]
        max_iter: usize,
    },
    /// Differential run of the solvers against dense oracles.
    Oracle {
        #[arg(long)]
        family: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Include per-trial records.
        #[arg(long)]
        verbose: bool,
    },
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct MapSource {
    #[arg(long)]
    kraus: Option<String>,
    #[arg(long)]
    choi: Option<String>,
    #[arg(long)]
    action: Option<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FallbackArg {
    Auto,
    Off,
    Force,
}

impl From<FallbackArg> for Fallback {
    fn from(f: FallbackArg) -> Self {
        match f {
            FallbackArg::Auto => Fallback::Auto,
            FallbackArg::Off => Fallback::Off,
            FallbackArg::Force => Fallback::Force,
        }
    }
}

#[derive(Serialize)]
struct InputDigest {
    name: String,
    source: String,
    sha256: String,
}

#[derive(Serialize)]
struct RunManifest {
    command_line: Vec<String>,
    inputs: Vec<InputDigest>,
    tolerances: Tolerances,
    seed: Option<u64>,
    versions: Value,
    wall_time_s: f64,
    exit_code: u8,
}

/// Reads inputs, remembering a digest of each.
#[derive(Default)]
struct Loader {
    digests: Vec<InputDigest>,
}

impl Loader {
    /// `arg` is a path to a JSON file, or JSON text itself.
    fn load(&mut self, name: &str, arg: &str) -> Result<Value, Error> {
        let path = Path::new(arg);
        let (source, text) = if path.is_file() {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::InvalidInput(format!("cannot read {arg}: {e}")))?;
            (arg.to_string(), text)
        } else {
            ("inline".to_string(), arg.to_string())
        };
        self.digests.push(InputDigest {
            name: name.to_string(),
            source,
            sha256: hex::encode(Sha256::digest(text.as_bytes())),
        });
        io::parse_json(&text)
    }

    fn vector(&mut self, name: &str, arg: &str) -> Result<DVector<f64>, Error> {
        io::vector_from_json(&self.load(name, arg)?)
    }

    fn matrix(&mut self, name: &str, arg: &str) -> Result<nalgebra::DMatrix<f64>, Error> {
        io::matrix_from_json(&self.load(name, arg)?)
    }
}

/// A JSON document and the exit code that goes with it.
struct Output {
    body: Value,
    code: u8,
}

fn ok(body: Value) -> Output {
    Output { body, code: 0 }
}

fn to_value(x: impl Serialize) -> Value {
    serde_json::to_value(x).expect("output serializes")
}

fn exit_code(e: &Error) -> u8 {
    match e.class() {
        ErrorClass::Dimension => EXIT_DIMENSION,
        ErrorClass::InvalidInput => EXIT_INPUT,
        ErrorClass::Hypothesis => EXIT_HYPOTHESIS,
        ErrorClass::Solver => EXIT_SOLVER,
    }
}

fn norm_arg(s: &str) -> Result<NormTag, Error> {
    io::norm_from_name(s).or_else(|_| io::norm_from_json(&io::parse_json(s)?))
}

fn run(cmd: &Command, tol: &Tolerances, ld: &mut Loader) -> Result<Output, Error> {
    match cmd {
        Command::Solve {
            matrix,
            cone,
            e,
            norm,
            max_iter,
            fallback,
        } => {
            let t = ld.matrix("matrix", matrix)?;
            let cone = io::cone_from_json(&ld.load("cone", cone)?)?;
            let e = ld.vector("e", e)?;
            let op = PositiveOperator::new(t, cone, e, norm_arg(norm)?, tol)?;
            let p = solve_with_fallback(&op, tol, *max_iter, (*fallback).into())?;
            Ok(ok(to_value(EigenpairJson::from(&p))))
        }
        Command::Criterion { matrix, k } => {
            let m = L1Matrix::new(ld.matrix("matrix", matrix)?)?;
            let n = m.n();
            let found = match k {
                Some(0) => return Err(Error::InvalidInput("k is one-based".into())),
                Some(k) if *k > n => {
                    return Err(Error::InvalidInput(format!("k = {k} exceeds dimension {n}")))
                }
                Some(k) => tkk_violation(&m, k - 1, tol.membership_tol).map_or(Ok(k - 1), Err),
                None => find_certificate_index(&m, tol.membership_tol)
                    .ok_or_else(|| tkk_violation(&m, 0, tol.membership_tol).expect("no index works")),
            };
            Ok(match found {
                Ok(k) => ok(json!({"certified": true, "k": k + 1, "l1_norm": m.norm()})),
                Err(v) => Output {
                    body: json!({
                        "certified": false,
                        "witness": {
                            "k": v.k + 1,
                            "j": v.j + 1,
                            "sign": v.sign.to_string(),
                            "lhs": v.lhs,
                            "rhs": v.rhs,
                        },
                    }),
                    code: EXIT_ABSENT,
                },
            })
        }
        Command::Face { norm, e, matrix } => {
            let norm = norm_arg(norm)?;
            let e = ld.vector("e", e)?;
            match matrix {
                None => Ok(ok(io::face_to_json(&compute_face(&norm, &e, tol)?, None))),
                Some(m) => {
                    let t = ld.matrix("matrix", m)?;
                    let space = MonotoneSpace::new(e.len(), norm)?;
                    let rep = verify_face_theorem(&t, &e, &space, tol)?;
                    let code = if rep.checks.all_passed() { 0 } else { EXIT_ABSENT };
                    Ok(Output {
                        body: io::face_to_json(&rep.face, Some(&rep)),
                        code,
                    })
                }
            }
        }
        Command::TeSolve {
            matrix,
            e,
            norm,
            max_iter,
        } => {
            let t = ld.matrix("matrix", matrix)?;
            let e = ld.vector("e", e)?;
            let p = solve_te_eigenvector(&t, &e, &norm_arg(norm)?, tol, *max_iter)?;
            Ok(ok(to_value(EigenpairJson::from(&p))))
        }
        Command::Channel {
            source,
            max_iter,
            seed,
        } => {
            let phi = if let Some(k) = &source.kraus {
                SuperOp::from_kraus(io::kraus_from_json(&ld.load("kraus", k)?)?)?
            } else if let Some(c) = &source.choi {
                let (n, c) = io::choi_from_json(&ld.load("choi", c)?)?;
                SuperOp::from_choi(n, c)?
            } else {
                let a = source.action.as_deref().expect("clap requires one source");
                let (n, a) = io::action_from_json(&ld.load("action", a)?)?;
                SuperOp::from_action(n, a)?
            };
            let verdict = is_positive_map(&phi, POSITIVITY_PROBES, *seed)?;
            if verdict.is_falsified() {
                let mut body = io::error_to_json(&Error::Hypothesis {
                    reason: "the map is not positive".into(),
                    witness: Vec::new(),
                });
                body["positivity"] = io::positivity_to_json(&verdict);
                return Ok(Output {
                    body,
                    code: EXIT_HYPOTHESIS,
                });
            }
            let s = fixed_state(&phi, tol.residual_tol, *max_iter)?;
            Ok(ok(json!({
                "fixed_state": to_value(FixedStateJson::from(&s)),
                "positivity": io::positivity_to_json(&verdict),
            })))
        }
        Command::Common {
            matrices,
            cone,
            e,
            norm,
            max_iter,
        } => {
            let ts = matrices
                .iter()
                .enumerate()
                .map(|(i, m)| ld.matrix(&format!("matrices[{}]", i + 1), m))
                .collect::<Result<Vec<_>, _>>()?;
            let n = ts[0].nrows();
            let cone = match cone {
                Some(c) => io::cone_from_json(&ld.load("cone", c)?)?,
                None => Cone::orthant(n),
            };
            let e = match e {
                Some(e) => ld.vector("e", e)?,
                None => DVector::from_element(n, 1.0),
            };
            let norm = norm_arg(norm)?;
            let ctol = tol.membership_tol * ts.iter().map(|t| t.norm().max(1.0)).product::<f64>();
            let ops = ts
                .into_iter()
                .map(|t| PositiveOperator::new(t, cone.clone(), e.clone(), norm.clone(), tol))
                .collect::<Result<Vec<_>, _>>()?;
            let fam = CommutingFamily::new(ops, ctol)?;
            let c = common_eigenvector(&fam, tol, *max_iter)?;
            Ok(ok(to_value(CommonJson::from(&c))))
        }
        Command::Oracle {
            family,
            n,
            trials,
            seed,
            verbose,
        } => {
            let family: Family = family.parse()?;
            let (lo, hi) = family.dim_range();
            if *n < lo || *n > hi {
                return Err(Error::InvalidInput(format!(
                    "n = {n} outside {lo}..={hi} for {family}"
                )));
            }
            let s = differential_run(family, *n, *trials, *seed);
            let code = if s.all_passed() { 0 } else { EXIT_ABSENT };
            let s = if *verbose { s } else { s.brief() };
            Ok(Output {
                body: to_value(s),
                code,
            })
        }
    }
}

fn seed_of(cmd: &Command) -> Option<u64> {
    match cmd {
        Command::Channel { seed, .. } | Command::Oracle { seed, .. } => Some(*seed),
        _ => None,
    }
}

fn main() -> ExitCode {
    let start = Instant::now();
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let mut loader = Loader::default();
    let tol = Tolerances {
        membership_tol: cli.membership_tol,
        residual_tol: cli.tol,
        alpha_probe: cli.alpha_probe,
    };
    let out = tol
        .validate()
        .and_then(|_| run(&cli.command, &tol, &mut loader))
        .unwrap_or_else(|e| Output {
            body: io::error_to_json(&e),
            code: exit_code(&e),
        });
    println!("{}", serde_json::to_string_pretty(&out.body).expect("json"));

    let manifest = RunManifest {
        command_line: argv,
        inputs: loader.digests,
        tolerances: tol,
        seed: seed_of(&cli.command),
        versions: json!({"krein": env!("CARGO_PKG_VERSION"), "krein-core": krein_core::VERSION}),
        wall_time_s: start.elapsed().as_secs_f64(),
        exit_code: out.code,
    };
    let text = serde_json::to_string_pretty(&manifest).expect("json");
    match &cli.manifest {
        Some(path) => {
            if let Err(e) = fs::write(path, text + "\n") {
                eprintln!("cannot write manifest {}: {e}", path.display());
                return ExitCode::from(EXIT_INPUT);
            }
        }
        None => eprintln!("{text}"),
    }
    ExitCode::from(out.code)
}
