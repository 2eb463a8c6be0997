use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Exact verification of graded algebras, their identities, and sheaves of
/// them on finite spaces. Prints one JSON report document.
#[derive(Debug, Parser)]
#[command(name = "pigeom", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Input description file.
    #[arg(long = "in", global = true, value_name = "FILE")]
    pub input: Option<PathBuf>,
    /// Algebra by builder name (`M:2`, `UT:3`, `E:4`, `Cl:-1,-1`) or file.
    #[arg(long, global = true)]
    pub algebra: Option<String>,
    /// Truncation degree.
    #[arg(long, global = true)]
    pub degree: Option<usize>,
    /// Bound on elementary operations per identity kernel.
    #[arg(long, global = true)]
    pub budget: Option<u64>,
    /// Seed for every sampled or randomly generated input.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the report here instead of standard output.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Run every data-parallel loop sequentially.
    #[arg(long, global = true)]
    pub sequential: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate or print a finite graded algebra.
    #[command(subcommand)]
    Algebra(AlgebraCmd),
    /// Graded identities, kernels, codimensions and varieties.
    #[command(subcommand)]
    Identities(IdentitiesCmd),
    /// Presheaves of algebras on finite spaces.
    #[command(subcommand)]
    Sheaf(SheafCmd),
    /// Kähler forms, derivations, Hochschild data and filtrations.
    #[command(subcommand)]
    Calculus(CalculusCmd),
    /// Matrix algebras, corners and corner certificates.
    #[command(subcommand)]
    Morita(MoritaCmd),
    /// Run a named check suite: `acceptance` or a module name.
    Suite { name: String },
}

#[derive(Debug, Subcommand)]
pub enum AlgebraCmd {
    /// Check associativity, unit and grading compatibility.
    Validate,
    /// Print the description file of a named algebra.
    Build,
}

#[derive(Debug, Args)]
pub struct PolyArg {
    /// Polynomial, e.g. `[x1@0,x2@1]` or `s4(x1,x2,x3,x4)`.
    #[arg(long)]
    pub poly: String,
}

#[derive(Debug, Args)]
pub struct PatternArgs {
    /// Graded pattern as `;`-separated degree vectors, e.g. `0;1;1`.
    /// Without it the ungraded multilinear space of `--degree` is used.
    #[arg(long)]
    pub pattern: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum IdentitiesCmd {
    /// Is the polynomial a graded identity of the algebra?
    Check(PolyArg),
    /// Identities in one multilinear pattern.
    Kernel(PatternArgs),
    /// Codimensions `c_1..c_d`.
    Codim {
        /// Forget the grading first.
        #[arg(long)]
        ungraded: bool,
    },
    /// Does `--other` lie in the variety of `--algebra` up to `--degree`?
    Variety {
        #[arg(long)]
        other: String,
    },
    /// Truncated relatively free algebra.
    Relfree {
        /// Variable degrees as `;`-separated vectors; `n` plain variables if a number.
        #[arg(long, default_value = "2")]
        vars: String,
    },
}

#[derive(Debug, Args)]
pub struct PresheafArgs {
    /// Presheaf description file.
    #[arg(long)]
    pub presheaf: Option<PathBuf>,
    /// Topology file or name, overriding the one in the presheaf file.
    #[arg(long)]
    pub topology: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum SheafCmd {
    /// Monopresheaf and gluing axioms.
    Check(PresheafArgs),
    /// Stalk at a point, with its cocone check.
    Stalk {
        #[command(flatten)]
        presheaf: PresheafArgs,
        /// Point name or index.
        #[arg(long)]
        point: String,
    },
    /// Sheafification and its comparison map.
    Sheafify(PresheafArgs),
    /// Direct image along a map given as `a=p,b=q`.
    Pushforward {
        #[command(flatten)]
        presheaf: PresheafArgs,
        /// Target topology file or name.
        #[arg(long)]
        target: String,
        #[arg(long)]
        map: String,
    },
    /// Whether every stalk is a local algebra.
    LocallyRinged(PresheafArgs),
    /// Čech cohomology in degrees 0 and 1.
    Cech(PresheafArgs),
    /// Morphism `(X, G) → (X, F)` for `F = --presheaf`, `G = --other`.
    Recover {
        #[command(flatten)]
        presheaf: PresheafArgs,
        #[arg(long)]
        other: PathBuf,
        /// Every section of F must lie in this algebra's variety.
        #[arg(long)]
        reference: Option<String>,
    },
}

#[derive(Debug, Subcommand)]
pub enum CalculusCmd {
    /// Noncommutative Kähler one-forms.
    Omega1,
    /// Derivations, graded by degree shift.
    Der,
    Hochschild,
    /// Derivations against bimodule maps out of one-forms.
    Tangent,
    /// Sampled identities of the Fedosov product.
    Fedosov {
        /// Number of variables.
        #[arg(long, default_value_t = 2)]
        vars: usize,
        /// Polynomial degree cap; `--degree` is accepted as well.
        #[arg(long)]
        cap: Option<u32>,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Evaluate `α ∗ β` for two forms in the text syntax instead.
        #[arg(long, num_args = 2, value_names = ["ALPHA", "BETA"])]
        product: Option<Vec<String>>,
    },
    Filtration {
        #[arg(long, value_parser = ["odd", "commutator"], default_value = "odd")]
        kind: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum MoritaCmd {
    /// `M_n(B)` for `B = --algebra`.
    Matrix {
        #[arg(long)]
        n: usize,
    },
    /// `eAe` for an idempotent given by coordinates.
    Corner {
        /// Comma-separated rationals.
        #[arg(long)]
        idempotent: String,
    },
    /// Truncated variety certificate for the context in `--in`.
    Certify,
    /// Ringed-space morphism for the context in `--in`.
    Morphism {
        /// Presheaf in the variety of A.
        #[arg(long)]
        presheaf: PathBuf,
        /// Presheaf in the variety of `M_n(B)`.
        #[arg(long)]
        other: PathBuf,
    },
}
