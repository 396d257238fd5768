//! `lattice-fm`: command-line front end.
//!
//! Exit codes: 0 success or true, 1 false or a failed check, 2 parse error,
//! 3 validation error, 4 unmet precondition.

mod commands;
mod files;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};
use lattice_fm::Error;

#[derive(Debug)]
pub enum Failure {
    Parse(String),
    Validation(String),
    Precondition(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Parse(_) => 2,
            Failure::Validation(_) => 3,
            Failure::Precondition(_) => 4,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Failure::Parse(_) => "parse",
            Failure::Validation(_) => "validation",
            Failure::Precondition(_) => "precondition",
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Parse(m) | Failure::Validation(m) | Failure::Precondition(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::UnknownName(_) => Failure::Parse(msg),
            Error::NotSymmetric
            | Error::Degenerate
            | Error::NotEven { .. }
            | Error::DimensionMismatch(_)
            | Error::BadParameter(_)
            | Error::NotIsometric(_)
            | Error::RankDeficient
            | Error::InvalidForm(_)
            | Error::InvalidElement(_)
            | Error::ZeroVector => Failure::Validation(msg),
            _ => Failure::Precondition(msg),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

/// Even lattices, discriminant forms, overlattice gluing and K3
/// Fourier-Mukai partner counts in exact arithmetic.
///
/// LATTICE arguments are paths to JSON lattice files or standard names:
/// U, E8, E6, A2, D16plus, K3, L2d(d), <n>, with optional twists such as
/// E8(-1), multiplicities such as 2U and sums such as <8>+<2>.
#[derive(Debug, Parser)]
#[command(name = "lattice-fm", version)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Cap on the size of any enumerated finite group.
    #[arg(long, global = true, env = "LATTICE_FM_LIMIT")]
    limit: Option<usize>,
    /// Coordinate bound for representation searches in indefinite lattices.
    #[arg(long, global = true, default_value_t = 20)]
    bound: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Invariant factors, generator values and length of D_L.
    DiscForm { lattice: String },
    /// Same genus test; exit 1 with the differing invariant otherwise.
    SameGenus { first: String, second: String },
    /// Signature, rank, determinant and definiteness.
    Signature { lattice: String },
    /// Orthogonal complement of the span of the given vectors.
    Complement {
        lattice: String,
        /// Comma-separated coordinates, repeatable.
        #[arg(long = "vector", short = 'v', required = true, allow_hyphen_values = true)]
        vectors: Vec<String>,
        /// Write the complement as a lattice file.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Whether the span of the given vectors is primitive; exit 1 if not.
    PrimitiveCheck {
        lattice: String,
        #[arg(long = "vector", short = 'v', required = true, allow_hyphen_values = true)]
        vectors: Vec<String>,
    },
    /// Divisor div(v), the positive generator of (v, L).
    Divisor {
        lattice: String,
        #[arg(long = "vector", short = 'v', allow_hyphen_values = true)]
        vector: String,
    },
    /// Whether L represents n; exit 1 if no vector is found.
    Represents {
        lattice: String,
        #[arg(allow_hyphen_values = true)]
        n: String,
    },
    /// Overlattice attached to an isotropic subgroup of D_L.
    Glue {
        lattice: String,
        /// Generator in coordinates on the generators of D_L, repeatable.
        #[arg(long, allow_hyphen_values = true)]
        disc: Vec<String>,
        /// Generator as a rational vector of L ⊗ Q, e.g. 1/2,1/2; repeatable.
        #[arg(long, allow_hyphen_values = true)]
        lift: Vec<String>,
        /// JSON file {"disc": [[..]]} or {"lift": [["1/2", ..]]}.
        #[arg(long)]
        subgroup: Option<PathBuf>,
        /// Write the glued lattice as a lattice file.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Subgroup of D_M classifying a finite-index embedding M ⊂ L.
    Classify {
        sublattice: String,
        #[arg(long)]
        ambient: String,
        /// Embedding matrix as JSON rows; column j is the image of the j-th basis vector.
        #[arg(long)]
        matrix: String,
    },
    /// Gluings of T and K with H^perp/H isometric to the target form.
    Gluings {
        t: String,
        k: String,
        /// Lattice whose discriminant form is the target (default: unimodular gluing).
        #[arg(long)]
        target: Option<String>,
    },
    /// Orbits of O(T) x O(K) on gluings.
    OrbitCount {
        t: String,
        k: String,
        #[arg(long)]
        target: Option<String>,
        /// Use only ±id on indefinite sides instead of failing.
        #[arg(long)]
        sign_only: bool,
    },
    /// Fourier-Mukai partner counts.
    #[command(group(ArgGroup::new("mode").required(true).args(["rank_one", "input"])))]
    FmCount {
        /// Picard rank one, degree 2d.
        #[arg(long)]
        rank_one: Option<u64>,
        /// JSON file listing the complements S.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Eichler invariant of a primitive vector, or the v_c family in L2d(p^3).
    Eichler {
        lattice: Option<String>,
        #[arg(long, short = 'v', allow_hyphen_values = true, requires = "lattice")]
        vector: Option<String>,
        #[arg(long, conflicts_with_all = ["lattice", "vector"])]
        vc: Option<u64>,
    },
    /// Re-derive every registered worked example; exit 1 if any fails.
    #[command(name = "claim-suite", alias = "paper-suite")]
    Suite {
        /// Keep only checks whose id or topic contains this string.
        #[arg(long)]
        filter: Option<String>,
        #[arg(long, hide = true)]
        corrupt: bool,
    },
}

fn run(cli: &Cli) -> Result<report::Report, Failure> {
    use commands as c;
    match &cli.command {
        Command::DiscForm { lattice } => c::disc_form(lattice),
        Command::SameGenus { first, second } => c::same_genus(first, second),
        Command::Signature { lattice } => c::signature(lattice),
        Command::Complement { lattice, vectors, output } => c::complement(lattice, vectors, output.as_deref()),
        Command::PrimitiveCheck { lattice, vectors } => c::primitive_check(lattice, vectors),
        Command::Divisor { lattice, vector } => c::divisor(lattice, vector),
        Command::Represents { lattice, n } => c::represents(lattice, n, cli.bound),
        Command::Glue { lattice, disc, lift, subgroup, output } => {
            c::glue_cmd(lattice, disc, lift, subgroup.as_deref(), output.as_deref())
        }
        Command::Classify { sublattice, ambient, matrix } => c::classify(sublattice, ambient, matrix),
        Command::Gluings { t, k, target } => c::gluings(t, k, target.as_deref()),
        Command::OrbitCount { t, k, target, sign_only } => c::orbit_count(t, k, target.as_deref(), *sign_only),
        Command::FmCount { rank_one, input } => c::fm_count(*rank_one, input.as_deref()),
        Command::Eichler { lattice, vector, vc } => c::eichler(lattice.as_deref(), vector.as_deref(), *vc),
        Command::Suite { filter, corrupt } => c::suite(filter.as_deref(), *corrupt),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(limit) = cli.limit {
        lattice_fm::par::set_group_limit(limit);
    }
    let argv: Vec<String> = std::env::args().skip(1).collect();
    match run(&cli) {
        Ok(r) => {
            match cli.format {
                Format::Text => print!("{}", r.render_text()),
                Format::Json => print!("{}", r.render_json(&argv)),
            }
            ExitCode::from(if r.holds { 0 } else { 1 })
        }
        Err(f) => {
            match cli.format {
                Format::Text => eprintln!("error ({}): {}", f.kind(), f.message()),
                Format::Json => print!("{}", report::error_json(&argv, f.kind(), f.message(), f.code())),
            }
            ExitCode::from(f.code())
        }
    }
}
