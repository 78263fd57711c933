use std::path::Path;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use natforms_core::chern_weil::{
    chern_form, lemados_connection, lemados_volume, random_connection, LieAlgebraDescriptor,
};
use natforms_core::classifier::{
    basis_records, check_naturality, decompose, enumerate_basis, render_basis, to_records, witness,
    DecomposeOptions, NaturalityOptions,
};
use natforms_core::expr::{bind, parse_expr, BoundExpr};
use natforms_core::graded::render_mono;
use natforms_core::sampler::trial_rng;
use natforms_core::scalar::{factorial, render};
use natforms_core::{Error, InvariantPoly, MatLieAlg, ScalarMatrix, Signature, Verdict};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "natforms",
    version,
    about = "Natural operations on differential forms"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct SigArgs {
    /// Degrees of the input forms, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    degrees: Vec<u32>,
    /// Degree of the output form.
    #[arg(long)]
    target: u32,
}

impl SigArgs {
    fn signature(&self) -> Result<Signature, Failure> {
        Signature::new(self.degrees.clone(), self.target).map_err(Failure::usage)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Demo {
    /// The model connection sum x_i dy_i ⊗ v_i and its top Chern-Weil form.
    Lemados,
    /// Closedness of the symmetrised-trace form of a random connection.
    Closed,
}

#[derive(Subcommand)]
enum Command {
    /// List the monomial basis of the natural operations of a signature.
    Basis {
        #[command(flatten)]
        sig: SigArgs,
        #[arg(long)]
        json: bool,
    },
    /// Show the witness forms isolating one basis monomial.
    Witness {
        #[command(flatten)]
        sig: SigArgs,
        #[arg(long)]
        monomial: String,
    },
    /// Decompose an operation given as an expression in w1, w2, ..., x1, x2, ...
    Decompose {
        #[command(flatten)]
        sig: SigArgs,
        #[arg(long)]
        expr: String,
        #[arg(long)]
        json: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Fuzz an expression for commutation with pullbacks.
    CheckNatural {
        #[command(flatten)]
        sig: SigArgs,
        #[arg(long)]
        expr: String,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Candidate ambient dimensions.
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
        dims: Vec<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Chern-Weil demonstrations over a matrix Lie algebra.
    Chern {
        /// Preset (gl1, gl2, gl3, sl2, so3) or a JSON descriptor file.
        #[arg(long)]
        algebra: String,
        #[arg(long, default_value_t = 1)]
        q: usize,
        #[arg(long, value_enum, default_value_t = Demo::Lemados)]
        demo: Demo,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

enum Failure {
    Usage(String),
    Verdict(String),
}

impl Failure {
    fn usage(e: impl std::fmt::Display) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn bound(sig: &Signature, text: &str) -> Result<BoundExpr, Failure> {
    let expr = parse_expr(text).map_err(Failure::usage)?;
    bind(expr, sig).map_err(Failure::usage)
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("json"));
}

fn basis(sig: &SigArgs, as_json: bool) -> Result<(), Failure> {
    let s = sig.signature()?;
    if as_json {
        print_json(
            &json!({ "signature": s, "basis": basis_records(&s), "rendered": render_basis(&s) }),
        );
    } else if enumerate_basis(&s).is_empty() {
        println!("(empty)");
    } else {
        for m in render_basis(&s) {
            println!("{m}");
        }
    }
    Ok(())
}

fn show_witness(sig: &SigArgs, monomial: &str) -> Result<(), Failure> {
    let s = sig.signature()?;
    let alg = s.algebra();
    let (sign, mono) = alg.parse_monomial(monomial).map_err(Failure::usage)?;
    let mono = mono.ok_or_else(|| Failure::Usage(format!("{monomial} is zero in the algebra")))?;
    if sign < 0 {
        return Err(Failure::Usage(format!(
            "{monomial} is not in normal order; write {}",
            render_mono(&alg, &mono)
        )));
    }
    let w = witness(&s, &mono).map_err(Failure::usage)?;
    println!("monomial {} on R^{}", render_mono(&alg, &mono), s.q());
    for (i, (f, form)) in w.assignment.factors.iter().zip(&w.forms).enumerate() {
        println!(
            "w{} = {form}    [{:?}, s = {}, coordinates {}..{}]",
            i + 1,
            f.case,
            f.repeat,
            f.block.start + 1,
            f.block.end
        );
    }
    println!("expected: {} dx1^...^dx{}", render(&w.expected), s.q());
    Ok(())
}

fn run_decompose(sig: &SigArgs, text: &str, as_json: bool, seed: u64) -> Result<(), Failure> {
    let s = sig.signature()?;
    let op = bound(&s, text)?;
    let dec = match decompose(
        &op,
        &DecomposeOptions {
            seed,
            ..Default::default()
        },
    ) {
        Ok(d) => d,
        Err(e @ (Error::NotNatural(_) | Error::NotClassifiedShape(_))) => {
            return Err(Failure::Verdict(e.to_string()))
        }
        Err(e) => return Err(Failure::usage(e)),
    };
    if as_json {
        let matrix: Vec<Vec<String>> = dec
            .evaluation_matrix
            .iter()
            .map(|r| r.iter().map(render).collect())
            .collect();
        print_json(&json!({
            "signature": s,
            "expr": op.expr().to_string(),
            "polynomial": dec.poly.to_string(),
            "terms": to_records(&dec.poly),
            "evaluation_matrix": matrix,
            "diagonal": dec.diagonal,
        }));
    } else {
        println!("{}", dec.poly);
    }
    Ok(())
}

fn run_check(
    sig: &SigArgs,
    text: &str,
    opts: NaturalityOptions,
    as_json: bool,
) -> Result<(), Failure> {
    let s = sig.signature()?;
    let op = bound(&s, text)?;
    let verdict = check_naturality(&op, &opts).map_err(Failure::usage)?;
    if as_json {
        let body = match &verdict {
            Verdict::Pass { seed, trials } => {
                json!({ "pass": true, "seed": seed, "trials": trials })
            }
            Verdict::Counterexample(c) => json!({
                "pass": false,
                "seed": c.seed,
                "trials": opts.trials,
                "counterexample": {
                    "trial": c.trial,
                    "kind": c.kind.to_string(),
                    "map": c.map.to_string(),
                    "forms": c.forms.iter().map(ToString::to_string).collect::<Vec<_>>(),
                    "pulled_back_output": c.pulled_back_output.to_string(),
                    "output_of_pulled_back": c.output_of_pulled_back.to_string(),
                },
            }),
        };
        print_json(&body);
    } else {
        println!("{} for {}: {verdict}", op.expr(), s);
    }
    if verdict.is_pass() {
        Ok(())
    } else {
        Err(Failure::Verdict(format!(
            "not natural (seed {})",
            opts.seed
        )))
    }
}

fn load_algebra(name: &str) -> Result<MatLieAlg, Failure> {
    if let Some(alg) = MatLieAlg::preset(name) {
        return Ok(alg);
    }
    let path = Path::new(name);
    if !path.exists() {
        return Err(Failure::Usage(format!(
            "unknown algebra {name:?}: not a preset or a file"
        )));
    }
    let text = std::fs::read_to_string(path).map_err(Failure::usage)?;
    let desc: LieAlgebraDescriptor = serde_json::from_str(&text).map_err(Failure::usage)?;
    MatLieAlg::from_descriptor(&desc).map_err(Failure::usage)
}

fn chern(algebra: &str, q: usize, demo: Demo, seed: u64) -> Result<(), Failure> {
    let alg = load_algebra(algebra)?;
    if q == 0 {
        return Err(Failure::Usage("--q must be positive".into()));
    }
    println!(
        "algebra {algebra}: {}x{} matrices, dimension {}",
        alg.size(),
        alg.size(),
        alg.dim()
    );
    for (a, b) in alg.basis().iter().enumerate() {
        println!("  e{} = {b}", a + 1);
    }
    let ok = match demo {
        Demo::Lemados => {
            let picks: Vec<usize> = (0..q).map(|i| i % alg.dim()).collect();
            let vectors: Vec<ScalarMatrix> =
                picks.iter().map(|&a| alg.basis()[a].clone()).collect();
            println!(
                "connection on R^{}: sum_i x_i dy_i ⊗ v_i, x = (x1..x{q}), y = (x{}..x{})",
                2 * q,
                q + 1,
                2 * q
            );
            for (i, a) in picks.iter().enumerate() {
                println!("  v{} = e{}", i + 1, a + 1);
            }
            let theta = lemados_connection(&vectors)
                .and_then(|c| c.curvature())
                .map_err(Failure::usage)?;
            for (a, c) in theta
                .components(&alg)
                .map_err(Failure::usage)?
                .iter()
                .enumerate()
            {
                if !c.is_zero() {
                    println!("  Θ_{} = {c}", a + 1);
                }
            }
            let t = InvariantPoly::dual(&picks);
            let names: Vec<String> = picks.iter().map(|a| format!("e{}", a + 1)).collect();
            let got = chern_form(&t, &theta, &alg).map_err(Failure::usage)?;
            let expected = lemados_volume(q).scale(&factorial(q as u32));
            println!("T = dual of {}", names.join("·"));
            println!("T(Θ^{q}) = {got}");
            println!("q!·dx1^dy1^...^dxq^dyq = {expected}");
            got == expected
        }
        Demo::Closed => {
            let dim = 2 * q + 1;
            let a = random_connection(&mut trial_rng(seed, 0), &alg, dim);
            let theta = a.curvature().map_err(Failure::usage)?;
            let t = InvariantPoly::sym_trace(&alg, q);
            let c = chern_form(&t, &theta, &alg).map_err(Failure::usage)?;
            println!("random connection on R^{dim} (seed {seed})");
            println!(
                "symmetrised trace of degree {q}: {}",
                if c.is_zero() {
                    "zero form"
                } else {
                    "non-zero form"
                }
            );
            let dc = c.ext_d();
            println!("d(T(Θ^{q})) = {dc}");
            dc.is_zero()
        }
    };
    if ok {
        println!("verified");
        Ok(())
    } else {
        Err(Failure::Verdict("identity fails".into()))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Basis { sig, json } => basis(sig, *json),
        Command::Witness { sig, monomial } => show_witness(sig, monomial),
        Command::Decompose {
            sig,
            expr,
            json,
            seed,
        } => run_decompose(sig, expr, *json, *seed),
        Command::CheckNatural {
            sig,
            expr,
            trials,
            seed,
            dims,
            json,
        } => {
            let opts = NaturalityOptions {
                trials: *trials,
                seed: *seed,
                dims: dims.clone(),
            };
            run_check(sig, expr, opts, *json)
        }
        Command::Chern {
            algebra,
            q,
            demo,
            seed,
        } => chern(algebra, *q, *demo, *seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verdict(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
