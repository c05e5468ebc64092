//! `qdist`: normal forms, products, modules and verification suites for the
//! quantum distribution algebras `D_{λ,N}(sl2)`.

mod commands;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "qdist", version, about = "Exact computation in quantum distribution algebras of sl2")]
pub struct Cli {
    #[command(flatten)]
    pub globals: Globals,
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every command. A flag beats its environment variable,
/// which beats the default.
#[derive(Debug, Args)]
pub struct Globals {
    /// Order ℓ of the root of unity (odd, at least 3).
    #[arg(long, global = true, env = "QDIST_ELL", default_value_t = 3)]
    pub ell: u32,
    /// Level N of the algebra.
    #[arg(long = "N", global = true, env = "QDIST_N", default_value_t = 0)]
    pub level: u32,
    /// λ = exp(2πi r/ℓ); r must be coprime to ℓ.
    #[arg(long, global = true, env = "QDIST_ROOT_EXPONENT", default_value_t = 1)]
    pub root_exponent: i64,
    #[arg(long, global = true, env = "QDIST_FORMAT", value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Structure-constant cache file, loaded if present and rewritten afterwards.
    #[arg(long, global = true, env = "QDIST_CACHE")]
    pub cache: Option<PathBuf>,
    /// Worker threads for internal parallelism (default: all cores).
    #[arg(long, global = true, env = "QDIST_JOBS")]
    pub jobs: Option<usize>,
    /// Largest basis or module dimension a command may build.
    #[arg(long, global = true, env = "QDIST_CAP", default_value_t = 20_000)]
    pub cap: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Normal form of an expression in the PBW basis.
    Nf { expr: String },
    /// Left-associated product of several expressions.
    Mul {
        #[arg(required = true, num_args = 1..)]
        exprs: Vec<String>,
    },
    /// Module constructions.
    #[command(subcommand)]
    Rep(RepCommand),
    /// Verification suites; exit code 1 if any check fails.
    #[command(subcommand)]
    Verify(VerifyCommand),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModuleKind {
    Verma,
    Simple,
}

#[derive(Debug, Subcommand)]
pub enum RepCommand {
    /// Verma module M(z): dimension and basis weights.
    Verma {
        #[arg(long)]
        z: u64,
    },
    /// Simple module L_N(p): dimension.
    Simple {
        #[arg(long)]
        p: u64,
    },
    /// Weight multiplicities as CSV (text) or JSON.
    Character {
        #[arg(long)]
        p: u64,
        #[arg(long, value_enum, default_value_t = ModuleKind::Simple)]
        module: ModuleKind,
    },
    /// Checks L_N(p) ≅ L(p_N) ⊗ L_N(p̂).
    Steinberg {
        #[arg(long)]
        p: u64,
        /// Print the intertwiner matrix.
        #[arg(long)]
        dump_matrix: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum VerifyCommand {
    /// Defining relations reduce to zero.
    Relations,
    /// q-binomial symmetry and product identities.
    Qbinom {
        /// Exclusive bound on m, n, p (default ℓ²).
        #[arg(long)]
        bound: Option<u64>,
        /// Random triples instead of the exhaustive range.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// E^(m)F^(n) commutation formula in u_λ(sl2).
    Commutation,
    /// Simple-module dimensions for every highest weight.
    Simple,
    /// Steinberg decomposition for every highest weight.
    Steinberg,
    /// Hopf axioms of u_λ(sl2) and coaction axioms of ρ_N.
    Hopf,
    /// Coinvariants and the convolution inverse of γ.
    Cleft,
    /// Associativity and Verma-matrix compatibility.
    Associativity {
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Truncated hyperalgebra of SL2 in characteristic p, with erratum report.
    Charp {
        #[arg(long, default_value_t = 3)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        k: u32,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(outcome) => {
            print!("{}", outcome.output);
            ExitCode::from(if outcome.passed { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
