use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use offdiag_core::Variant;
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(
    name = "offdiag",
    version,
    about = "Geometric and off-diagonal geometric phases of two-qubit mixed states",
    after_help = "Angles are in radians unless --degrees is given. Exit codes: 0 success, \
                  1 self-test failure or numerical breakdown, 2 invalid input, 3 phase undefined."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Geometric phase arg Tr[U∥(t)ρ(0)] at one point.
    Gp,
    /// Two-index off-diagonal phase at one point.
    Op2,
    /// Off-diagonal phase of arbitrary order over a chain of states.
    Opn,
    /// Off-diagonal phase of two orthonormal pure states.
    OpPure,
    /// Grid sweeps for nodal points.
    Scan {
        #[command(subcommand)]
        kind: ScanKind,
    },
    /// Partial-transpose entanglement test of ρ(0).
    Ppt,
    /// Run the invariant suite.
    Selftest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum ScanKind {
    /// (θ, β) grid of the uncoupled model, one slice per purity level.
    Free,
    /// (θ, J) grid with Ising coupling, or the (θ, r) plane when --coupling-J is set.
    Ising,
    /// Largest nodal purity per θ against the separability threshold.
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// `W` or `WxH`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct GridSize {
    pub width: usize,
    pub height: Option<usize>,
}

impl FromStr for GridSize {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parse = |part: &str| {
            part.trim()
                .parse::<usize>()
                .map_err(|_| format!("expected WxH with positive integers, got `{s}`"))
        };
        match s.split_once(['x', 'X']) {
            Some((w, h)) => Ok(Self { width: parse(w)?, height: Some(parse(h)?) }),
            None => Ok(Self { width: parse(s)?, height: None }),
        }
    }
}

impl TryFrom<String> for GridSize {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<GridSize> for String {
    fn from(g: GridSize) -> String {
        g.to_string()
    }
}

impl fmt::Display for GridSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.height {
            Some(h) => write!(f, "{}x{}", self.width, h),
            None => write!(f, "{}", self.width),
        }
    }
}

/// Every flag is global so it may follow the subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Initial-state family: phi (|11⟩,|00⟩ superposition) or psi (|10⟩,|01⟩).
    #[arg(long, global = true, value_name = "phi|psi")]
    pub state: Option<Variant>,
    /// Purity in (0, 1]; scans accept a comma-separated list.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub r: Vec<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    /// ωt with ω₁ = ω₂ = ω = 1 (default π).
    #[arg(long = "omega-t", global = true, allow_hyphen_values = true)]
    pub omega_t: Option<f64>,
    /// Rescaled Ising coupling J = g/ω; selects the coupled Hamiltonian.
    #[arg(long = "coupling-J", global = true, allow_hyphen_values = true)]
    pub coupling_j: Option<f64>,
    /// Grid size WxH (scans).
    #[arg(long, global = true)]
    pub grid: Option<GridSize>,
    /// |trace| below which the phase is reported undefined.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(short = 'o', long = "output", global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Shorthand for --format json.
    #[arg(long, global = true)]
    pub json: bool,
    /// Worker threads for grid evaluation.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Seed for randomized suites.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Read --theta and --beta in degrees.
    #[arg(long, global = true)]
    pub degrees: bool,
    /// Compare the numeric two-index trace with both closed forms.
    #[arg(long = "check-analytic", global = true)]
    pub check_analytic: bool,
    /// Order n of the off-diagonal phase (opn).
    #[arg(long, global = true)]
    pub order: Option<usize>,
    /// JSON file with the chain of density matrices (opn).
    #[arg(long, global = true)]
    pub chain: Option<PathBuf>,
    /// First pure state (op-pure): 11, 10, 01, 00, phi, psi, phi_perp or psi_perp.
    #[arg(long, global = true)]
    pub i: Option<String>,
    /// Second pure state (op-pure).
    #[arg(long, global = true)]
    pub j: Option<String>,
    /// JSON job file; explicit flags override its fields.
    #[arg(long, global = true)]
    pub job: Option<PathBuf>,
    #[arg(long = "inject-fault", global = true, hide = true)]
    pub inject_fault: bool,
}
