use std::fmt::Write as _;
use std::sync::Arc;

use qdist::algebra::{Algebra, AlgebraParams};
use qdist::cache;
use qdist::expr::{eval, parse_for};
use qdist::format::{element_json, element_text, JsonParams};
use qdist::hopf::Hopf;
use qdist::hyper::HypParams;
use qdist::rep::{character, simple, steinberg_intertwiner, verma, ModuleRep};
use qdist::verify::{self, SuiteReport};
use serde::Serialize;
use serde_json::json;

use crate::error::CliError;
use crate::{Cli, Command, Format, Globals, ModuleKind, RepCommand, VerifyCommand};

pub struct Outcome {
    pub output: String,
    pub passed: bool,
}

impl Outcome {
    fn ok(output: String) -> Self {
        Outcome { output, passed: true }
    }
}

/// Session state: the algebra for the chosen parameters, seeded from and
/// written back to the cache file when one is given.
struct Session<'a> {
    globals: &'a Globals,
    params: AlgebraParams,
    alg: Arc<Algebra>,
}

impl<'a> Session<'a> {
    fn open(globals: &'a Globals) -> Result<Self, CliError> {
        let params = AlgebraParams::new(globals.ell, globals.level, globals.root_exponent)?;
        let alg = Arc::new(Algebra::new(params)?);
        if let Some(path) = &globals.cache {
            if path.exists() {
                cache::load(path, &alg)?;
            }
        }
        Ok(Session { globals, params, alg })
    }

    fn close(&self) -> Result<(), CliError> {
        if let Some(path) = &self.globals.cache {
            cache::save(path, &self.alg)?;
        }
        Ok(())
    }

    fn json(&self) -> bool {
        self.globals.format == Format::Json
    }

    fn cap_basis(&self, params: AlgebraParams) -> Result<(), CliError> {
        let size = params.basis_size();
        if size > self.globals.cap as u128 {
            return Err(CliError::Cap(format!(
                "basis of {params} has {size} elements, above the cap of {} (raise --cap)",
                self.globals.cap
            )));
        }
        Ok(())
    }
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    if let Some(jobs) = cli.globals.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let session = Session::open(&cli.globals)?;
    let outcome = match &cli.command {
        Command::Nf { expr } => normal_form(&session, std::slice::from_ref(expr))?,
        Command::Mul { exprs } => normal_form(&session, exprs)?,
        Command::Rep(rep) => rep_command(&session, rep)?,
        Command::Verify(v) => verify_command(&session, v)?,
    };
    session.close()?;
    Ok(outcome)
}

fn normal_form(s: &Session, exprs: &[String]) -> Result<Outcome, CliError> {
    let mut factors = Vec::with_capacity(exprs.len());
    for text in exprs {
        factors.push(eval(&parse_for(text, &s.params)?, &s.alg)?);
    }
    let x = s.alg.product(&factors)?;
    let output = if s.json() {
        pretty(&element_json(&x))
    } else {
        format!("{}\n", element_text(&x))
    };
    Ok(Outcome::ok(output))
}

fn pretty<T: Serialize>(value: &T) -> String {
    format!("{}\n", serde_json::to_string_pretty(value).expect("serialisable"))
}

fn character_rows(rep: &ModuleRep) -> Result<Vec<(Vec<u32>, usize)>, CliError> {
    Ok(character(rep)?.into_iter().map(|(w, m)| (w.0, m)).collect())
}

fn character_csv(level: u32, rows: &[(Vec<u32>, usize)]) -> String {
    let mut out = String::new();
    let header: Vec<String> = (0..=level).map(|i| format!("k{i}")).collect();
    let _ = writeln!(out, "{},multiplicity", header.join(","));
    for (w, m) in rows {
        let cells: Vec<String> = w.iter().map(|d| d.to_string()).collect();
        let _ = writeln!(out, "{},{m}", cells.join(","));
    }
    out
}

fn character_json(rows: &[(Vec<u32>, usize)]) -> Vec<serde_json::Value> {
    rows.iter().map(|(w, m)| json!({ "weight": w, "multiplicity": m })).collect()
}

fn rep_command(s: &Session, cmd: &RepCommand) -> Result<Outcome, CliError> {
    let params = s.params;
    let jp = JsonParams::from(&params);
    let output = match cmd {
        RepCommand::Verma { z } => {
            let rep = verma(params, *z)?;
            let weights = rep.weights()?;
            if s.json() {
                let basis: Vec<_> = rep
                    .labels()
                    .iter()
                    .zip(&weights)
                    .map(|(t, w)| json!({ "f": t, "weight": w.0 }))
                    .collect();
                pretty(&json!({ "params": jp, "module": "verma", "z": z, "dim": rep.dim(), "basis": basis }))
            } else {
                let mut out = format!("dim = {}\n", rep.dim());
                for (t, w) in rep.labels().iter().zip(&weights) {
                    let _ = writeln!(out, "F({t})v  weight {w}");
                }
                out
            }
        }
        RepCommand::Simple { p } => {
            let rep = simple(params, *p)?;
            if s.json() {
                pretty(&json!({ "params": jp, "module": "simple", "p": p, "dim": rep.dim() }))
            } else {
                format!("dim = {}\n", rep.dim())
            }
        }
        RepCommand::Character { p, module } => {
            let rep = match module {
                ModuleKind::Verma => verma(params, *p)?,
                ModuleKind::Simple => simple(params, *p)?,
            };
            let rows = character_rows(&rep)?;
            if s.json() {
                let name = match module {
                    ModuleKind::Verma => "verma",
                    ModuleKind::Simple => "simple",
                };
                pretty(&json!({ "params": jp, "module": name, "p": p, "dim": rep.dim(), "character": character_json(&rows) }))
            } else {
                character_csv(params.level(), &rows)
            }
        }
        RepCommand::Steinberg { p, dump_matrix } => {
            let r = steinberg_intertwiner(params, *p, s.globals.cap)?;
            let passed = r.passed();
            let matrix = match (&r.matrix, dump_matrix) {
                (Some(m), true) => Some(
                    (0..m.rows())
                        .map(|i| (0..m.cols()).map(|j| m.get(i, j).to_string()).collect::<Vec<_>>())
                        .collect::<Vec<_>>(),
                ),
                _ => None,
            };
            let output = if s.json() {
                pretty(&json!({
                    "params": jp,
                    "p": p,
                    "top_digit": r.top_digit,
                    "low_part": r.low_part,
                    "dim_simple": r.dim_simple,
                    "dim_first": r.dim_first,
                    "dim_second": r.dim_second,
                    "bijective": r.bijective,
                    "failures": r.failures,
                    "passed": passed,
                    "matrix": matrix,
                }))
            } else {
                let rel = if r.dim_simple == r.dim_first * r.dim_second { "=" } else { "≠" };
                let mut out = format!(
                    "{} ({} {rel} {}×{})\n",
                    if passed { "PASS" } else { "FAIL" },
                    r.dim_simple,
                    r.dim_first,
                    r.dim_second
                );
                for f in &r.failures {
                    let _ = writeln!(out, "  {f}");
                }
                for row in matrix.iter().flatten() {
                    let _ = writeln!(out, "[{}]", row.join(", "));
                }
                out
            };
            return Ok(Outcome { output, passed });
        }
    };
    Ok(Outcome::ok(output))
}

fn verify_command(s: &Session, cmd: &VerifyCommand) -> Result<Outcome, CliError> {
    let params = s.params;
    let report: SuiteReport = match cmd {
        VerifyCommand::Relations => {
            s.cap_basis(params)?;
            verify::relations(&s.alg)?
        }
        VerifyCommand::Qbinom { bound, samples, seed } => {
            let ell = params.ell();
            verify::qbinom(ell, bound.unwrap_or((ell * ell) as u64), *samples, *seed)?
        }
        VerifyCommand::Commutation => {
            let u = Algebra::new(params.with_level(0)?)?;
            verify::commutation(&u)?
        }
        VerifyCommand::Simple => {
            s.cap_basis(params)?;
            verify::simple_dimensions(params)?
        }
        VerifyCommand::Steinberg => {
            s.cap_basis(params)?;
            verify::steinberg_all(params, s.globals.cap)?
        }
        VerifyCommand::Hopf => verify::hopf(&hopf_for(s)?)?,
        VerifyCommand::Cleft => {
            if params.level() == 0 {
                return Err(CliError::Usage("verify cleft needs --N 1 or higher".into()));
            }
            verify::cleft(&hopf_for(s)?, s.globals.cap as u128)?
        }
        VerifyCommand::Associativity { samples, seed } => {
            s.cap_basis(params)?;
            verify::associativity(&s.alg, *samples, *seed)?
        }
        VerifyCommand::Charp { p, k, samples, seed } => {
            let upper = HypParams::new(*p, k + 1)?;
            if upper.dim() > s.globals.cap as u64 {
                return Err(CliError::Cap(format!(
                    "D_{} has dimension {}, above the cap of {} (raise --cap)",
                    k + 1,
                    upper.dim(),
                    s.globals.cap
                )));
            }
            verify::charp(*p, *k, *samples, *seed)?
        }
    };
    let output = if s.json() {
        format!("{}\n", report.to_json())
    } else {
        format!("{report}\n")
    };
    Ok(Outcome {
        output,
        passed: report.passed,
    })
}

fn hopf_for(s: &Session) -> Result<Hopf, CliError> {
    s.cap_basis(s.params)?;
    let u = Arc::new(Algebra::new(s.params.with_level(0)?)?);
    Ok(Hopf::with_algebras(u, s.alg.clone()))
}
