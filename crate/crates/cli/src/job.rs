//! Job configuration: an optional JSON file overlaid with command-line flags,
//! then validated into the core parameter types.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use offdiag_core::scanner::{r_levels, Axis, BetaMode, ScanGrid};
use offdiag_core::{HamiltonianKind, ModelParams, StateParams, Variant};
use serde::{Deserialize, Serialize};

use crate::args::{Command, Flags, Format, GridSize, ScanKind};
use crate::CliError;

/// Lower end of the purity axis in the fixed-coupling `(θ, r)` plane.
pub const R_AXIS_START: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JobCommand {
    Gp,
    Op2,
    Opn,
    OpPure,
    ScanFree,
    ScanIsing,
    ScanBoundary,
    Ppt,
    Selftest,
}

impl From<Command> for JobCommand {
    fn from(c: Command) -> Self {
        match c {
            Command::Gp => JobCommand::Gp,
            Command::Op2 => JobCommand::Op2,
            Command::Opn => JobCommand::Opn,
            Command::OpPure => JobCommand::OpPure,
            Command::Scan { kind: ScanKind::Free } => JobCommand::ScanFree,
            Command::Scan { kind: ScanKind::Ising } => JobCommand::ScanIsing,
            Command::Scan { kind: ScanKind::Boundary } => JobCommand::ScanBoundary,
            Command::Ppt => JobCommand::Ppt,
            Command::Selftest => JobCommand::Selftest,
        }
    }
}

impl JobCommand {
    fn is_scan(self) -> bool {
        matches!(self, JobCommand::ScanFree | JobCommand::ScanIsing | JobCommand::ScanBoundary)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StateSpec {
    pub variant: Option<Variant>,
    pub r: Option<f64>,
    pub theta: Option<f64>,
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSpec {
    pub omega_t: Option<f64>,
    pub coupling_j: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub size: Option<GridSize>,
    pub r_values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JobConfig {
    pub command: Option<JobCommand>,
    pub state: StateSpec,
    pub model: ModelSpec,
    pub kind: Option<HamiltonianKind>,
    pub grid: GridSpec,
    pub output_path: Option<PathBuf>,
    pub format: Option<Format>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub degrees: bool,
    pub check_analytic: bool,
    pub order: Option<usize>,
    pub chain: Option<PathBuf>,
    pub i: Option<String>,
    pub j: Option<String>,
    pub inject_fault: bool,
}

fn invalid(field: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::invalid(format!("invalid value for `{field}`: {reason}"))
}

impl JobConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid("job", format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| invalid("job", e))
    }

    /// Explicitly given flags replace the corresponding job fields.
    pub fn overlay(&mut self, command: Option<Command>, flags: &Flags) -> Result<(), CliError> {
        if let Some(c) = command {
            self.command = Some(c.into());
        }
        let scan = self.command.is_some_and(JobCommand::is_scan);
        match flags.r.as_slice() {
            [] => {}
            values if scan => self.grid.r_values = Some(values.to_vec()),
            [r] => self.state.r = Some(*r),
            _ => return Err(invalid("r", "only scans accept a list of purities")),
        }
        macro_rules! take {
            ($dst:expr, $src:expr) => {
                if let Some(v) = $src.clone() {
                    $dst = Some(v);
                }
            };
        }
        take!(self.state.variant, flags.state);
        take!(self.state.theta, flags.theta);
        take!(self.state.beta, flags.beta);
        take!(self.model.omega_t, flags.omega_t);
        take!(self.model.coupling_j, flags.coupling_j);
        take!(self.grid.size, flags.grid);
        take!(self.output_path, flags.output);
        take!(self.format, flags.format);
        take!(self.tol, flags.tol);
        take!(self.seed, flags.seed);
        take!(self.workers, flags.workers);
        take!(self.order, flags.order);
        take!(self.chain, flags.chain);
        take!(self.i, flags.i);
        take!(self.j, flags.j);
        if flags.json {
            self.format = Some(Format::Json);
        }
        self.degrees |= flags.degrees;
        self.check_analytic |= flags.check_analytic;
        self.inject_fault |= flags.inject_fault;
        Ok(())
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or_default()
    }

    fn angle(&self, v: f64) -> f64 {
        if self.degrees {
            v.to_radians()
        } else {
            v
        }
    }

    pub fn variant(&self) -> Variant {
        self.state.variant.unwrap_or(Variant::Phi)
    }

    pub fn theta(&self) -> Result<f64, CliError> {
        let theta = self.state.theta.ok_or_else(|| invalid("theta", "is required"))?;
        Ok(self.angle(theta))
    }

    pub fn beta(&self) -> f64 {
        self.angle(self.state.beta.unwrap_or(0.0))
    }

    pub fn beta_given(&self) -> Option<f64> {
        self.state.beta.map(|b| self.angle(b))
    }

    pub fn state(&self) -> Result<StateParams, CliError> {
        let r = self.state.r.ok_or_else(|| invalid("r", "is required"))?;
        Ok(StateParams::new(self.variant(), r, self.theta()?, self.beta())?)
    }

    pub fn omega_t(&self) -> Result<f64, CliError> {
        let w = self.model.omega_t.unwrap_or(PI);
        if !w.is_finite() || w < 0.0 {
            return Err(invalid("omega_t", "must be finite and non-negative"));
        }
        Ok(w)
    }

    pub fn kind(&self) -> HamiltonianKind {
        match (self.kind, self.model.coupling_j) {
            (Some(k), _) => k,
            (None, Some(_)) => HamiltonianKind::Ising,
            (None, None) => HamiltonianKind::Free,
        }
    }

    /// `ω₁ = ω₂ = 1`, `t = ωt`, `g = J`.
    pub fn model(&self) -> Result<ModelParams, CliError> {
        let coupling = self.model.coupling_j.unwrap_or(0.0);
        if !coupling.is_finite() || coupling < 0.0 {
            return Err(invalid("coupling_J", "must be finite and non-negative"));
        }
        Ok(ModelParams::resonant(1.0, coupling, self.omega_t()?)?)
    }

    pub fn tol(&self) -> Result<f64, CliError> {
        let tol = self.tol.unwrap_or(offdiag_core::phases::NODAL_TOL);
        if !tol.is_finite() || tol < 0.0 {
            return Err(invalid("tol", "must be finite and non-negative"));
        }
        Ok(tol)
    }

    fn size(&self, default: (usize, usize)) -> Result<(usize, usize), CliError> {
        let size = self.grid.size.unwrap_or(GridSize { width: default.0, height: Some(default.1) });
        let (w, h) = (size.width, size.height.unwrap_or(default.1));
        if w < 2 || h < 2 {
            return Err(invalid("grid", format!("each dimension needs at least 2 samples, got {w}x{h}")));
        }
        Ok((w, h))
    }

    fn r_values(&self, default: Vec<f64>) -> Vec<f64> {
        self.grid.r_values.clone().unwrap_or(default)
    }

    pub fn free_grid(&self) -> Result<ScanGrid, CliError> {
        let (w, h) = self.size((512, 512))?;
        let grid = ScanGrid {
            theta: Axis::half_turn(w),
            beta: Axis::half_turn(h),
            r_values: self.r_values(r_levels(64)),
            omega_t: self.omega_t()?,
            ..ScanGrid::default()
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn ising_grid(&self) -> Result<ScanGrid, CliError> {
        let (w, h) = self.size((512, 256))?;
        let grid = ScanGrid {
            theta: Axis::half_turn(w),
            coupling: Axis { start: 0.0, end: 0.5, count: h },
            r_values: self.r_values(ScanGrid::coupled().r_values),
            omega_t: self.omega_t()?,
            ..ScanGrid::default()
        };
        grid.validate()?;
        Ok(grid)
    }

    /// `(θ, r)` axes of the fixed-coupling plane.
    pub fn purity_plane(&self) -> Result<(Axis, Axis), CliError> {
        let (w, h) = self.size((512, 512))?;
        Ok((Axis::half_turn(w), Axis { start: R_AXIS_START, end: 1.0, count: h }))
    }

    /// `θ` samples and the treatment of `β` for the boundary sweep.
    pub fn boundary(&self) -> Result<(usize, BetaMode), CliError> {
        let (w, h) = self.size((256, 512))?;
        let mode = match self.beta_given() {
            Some(b) => BetaMode::Fixed(b),
            None => BetaMode::Swept { n_beta: h },
        };
        Ok((w, mode))
    }
}
