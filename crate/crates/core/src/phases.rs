//! Diagonal and off-diagonal geometric phases.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    inner, norm, orthonormal_completion, psd_sqrt, ComplexMatrix, ComplexScalar,
    SpectralDecomposition,
};
use crate::model::{build_state, state_eigenbasis, HamiltonianKind, ModelParams, StateParams};
use crate::transport::{density_eigenbasis, Dynamics};

/// `|trace|` below this declares a nodal point: the phase is undefined there.
pub const NODAL_TOL: f64 = 1e-9;
/// Smallest overlap modulus for which `Φ(z) = z/|z|` is taken.
pub const OVERLAP_TOL: f64 = 1e-9;

/// A phase together with the complex number it is the argument of.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseResult {
    /// Angle in `(-π, π]`; `None` at a nodal point.
    pub value: Option<f64>,
    pub trace: Complex64,
    pub nodal: bool,
}

impl PhaseResult {
    pub fn from_trace(trace: Complex64, tol: f64) -> Self {
        let norm = trace.norm();
        let nodal = norm.is_nan() || norm < tol;
        Self {
            value: (!nodal).then(|| principal_arg(trace)),
            trace,
            nodal,
        }
    }
}

/// `arg z` mapped into `(-π, π]`.
pub fn principal_arg(z: Complex64) -> f64 {
    let a = z.im.atan2(z.re);
    if a <= -PI {
        PI
    } else {
        a
    }
}

/// `Tr[U∥(t) ρ(0)]`, evaluated through the full matrix pipeline.
pub fn nodal_function(
    state: &StateParams,
    model: &ModelParams,
    kind: HamiltonianKind,
) -> Result<Complex64> {
    state.validate()?;
    let dynamics = Dynamics::new(model, kind)?;
    trace_with(&dynamics, state)
}

/// [`nodal_function`] with a precomputed propagator.
pub fn trace_with(dynamics: &Dynamics, state: &StateParams) -> Result<Complex64> {
    let u_par = dynamics.parallel(&state_eigenbasis(state))?;
    Ok((&u_par * &build_state(state)).trace())
}

/// Geometric phase `arg Tr[U∥(t) ρ(0)]`, undefined at nodal points.
pub fn gp(state: &StateParams, model: &ModelParams, kind: HamiltonianKind) -> Result<PhaseResult> {
    gp_with_tol(state, model, kind, NODAL_TOL)
}

pub fn gp_with_tol(
    state: &StateParams,
    model: &ModelParams,
    kind: HamiltonianKind,
    tol: f64,
) -> Result<PhaseResult> {
    Ok(PhaseResult::from_trace(nodal_function(state, model, kind)?, tol))
}

/// Closed-form `Tr[U∥ρ]` for the free model with `ω₁ = ω₂` and `ωt = π`.
pub fn analytic_trace(state: &StateParams) -> f64 {
    analytic_trace_with_weight(state, 3.0)
}

/// The closed form with the `3` in `(1 + 3r)/4` replaced by `weight`; only the
/// self-test's fault injection uses anything else.
pub(crate) fn analytic_trace_with_weight(state: &StateParams, weight: f64) -> f64 {
    let x = state.variant.sign() * (2.0 * state.beta).cos() * (2.0 * state.theta).sin();
    let r = state.r;
    let radicand = (2.0 + 2.0 * x).max(0.0);
    (1.0 + weight * r) / 4.0 * x
        + (1.0 - r) / 4.0 * (1.0 - (1.0 + x) * (0.5 * PI * radicand.sqrt()).cos())
}

/// `Tr[U∥(t) √ρ(0) Π_l U∥_l(t) √ρ_l]` where `U∥_l` is transported in the
/// frame of `ρ_l`.
pub fn off_diagonal_trace(
    dynamics: &Dynamics,
    state: &StateParams,
    chain: &[ComplexMatrix],
) -> Result<Complex64> {
    if chain.is_empty() {
        return Err(Error::EmptyChain);
    }
    let rho0 = build_state(state);
    let mut product = &dynamics.parallel(&state_eigenbasis(state))? * &psd_sqrt(&rho0)?;
    for rho in chain {
        let basis = density_eigenbasis(rho)?;
        let step = &dynamics.parallel(&basis)? * &psd_sqrt(rho)?;
        product = &product * &step;
    }
    Ok(product.trace())
}

/// Two-index off-diagonal phase, pairing `ρ(0)` with `ρ(t) = U ρ(0) U†`.
pub fn op2(state: &StateParams, model: &ModelParams, kind: HamiltonianKind) -> Result<PhaseResult> {
    op2_with_tol(state, model, kind, NODAL_TOL)
}

pub fn op2_with_tol(
    state: &StateParams,
    model: &ModelParams,
    kind: HamiltonianKind,
    tol: f64,
) -> Result<PhaseResult> {
    state.validate()?;
    let dynamics = Dynamics::new(model, kind)?;
    Ok(PhaseResult::from_trace(op2_trace(&dynamics, state)?, tol))
}

pub fn op2_trace(dynamics: &Dynamics, state: &StateParams) -> Result<Complex64> {
    let rho_t = dynamics.evolve_state(&build_state(state));
    off_diagonal_trace(dynamics, state, &[rho_t])
}

/// Generic-order off-diagonal phase over a chain of mutually "orthogonal"
/// states `ρ(t_1) … ρ(t_{n-1})`.
pub fn op_n(
    state: &StateParams,
    model: &ModelParams,
    kind: HamiltonianKind,
    chain: &[ComplexMatrix],
) -> Result<PhaseResult> {
    state.validate()?;
    let dynamics = Dynamics::new(model, kind)?;
    Ok(PhaseResult::from_trace(
        off_diagonal_trace(&dynamics, state, chain)?,
        NODAL_TOL,
    ))
}

/// The two readings of the square-root argument in the closed-form
/// two-index phase.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadicandVariant {
    /// `2 ± cos2β sin2θ`
    AsPrinted,
    /// `2 ± 2 cos2β sin2θ`, the same pattern as the closed-form trace.
    Doubled,
}

impl RadicandVariant {
    pub const ALL: [RadicandVariant; 2] = [RadicandVariant::AsPrinted, RadicandVariant::Doubled];

    fn factor(self) -> f64 {
        match self {
            RadicandVariant::AsPrinted => 1.0,
            RadicandVariant::Doubled => 2.0,
        }
    }
}

impl fmt::Display for RadicandVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RadicandVariant::AsPrinted => "as_printed",
            RadicandVariant::Doubled => "doubled",
        })
    }
}

impl FromStr for RadicandVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "as_printed" | "as-printed" => Ok(RadicandVariant::AsPrinted),
            "doubled" => Ok(RadicandVariant::Doubled),
            other => Err(Error::invalid("radicand", format!("unknown variant `{other}`"))),
        }
    }
}

/// Closed-form two-index trace `(1+r)/2 + (1-r)/2 · cos(π√(2 ± k·cos2β sin2θ))`
/// for the free model at `ωt = π`.
pub fn op2_analytic_value(state: &StateParams, radicand: RadicandVariant) -> f64 {
    let x = state.variant.sign() * (2.0 * state.beta).cos() * (2.0 * state.theta).sin();
    let arg = (2.0 + radicand.factor() * x).max(0.0);
    (1.0 + state.r) / 2.0 + (1.0 - state.r) / 2.0 * (PI * arg.sqrt()).cos()
}

/// Argument of [`op2_analytic_value`]: `0` for a positive value, `π` for a negative one.
pub fn op2_analytic(state: &StateParams, radicand: RadicandVariant) -> f64 {
    principal_arg(Complex64::new(op2_analytic_value(state, radicand), 0.0))
}

/// Which closed form reproduces the numeric two-index trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadicandReport {
    pub points: usize,
    pub max_error_as_printed: f64,
    pub max_error_doubled: f64,
    pub tolerance: f64,
    /// Set only when exactly one variant agrees everywhere within `tolerance`.
    pub selected: Option<RadicandVariant>,
}

impl RadicandReport {
    pub fn max_error(&self, v: RadicandVariant) -> f64 {
        match v {
            RadicandVariant::AsPrinted => self.max_error_as_printed,
            RadicandVariant::Doubled => self.max_error_doubled,
        }
    }
}

/// Compares the numeric two-index trace (free model, `ω = 1`, `ωt = π`)
/// against both closed forms.
pub fn adjudicate_radicand(states: &[StateParams], tolerance: f64) -> Result<RadicandReport> {
    let dynamics = Dynamics::new(&ModelParams::half_period(), HamiltonianKind::Free)?;
    let mut errs = [0.0_f64; 2];
    for s in states {
        let numeric = op2_trace(&dynamics, s)?;
        for (e, v) in errs.iter_mut().zip(RadicandVariant::ALL) {
            let closed = Complex64::new(op2_analytic_value(s, v), 0.0);
            *e = e.max((numeric - closed).norm());
        }
    }
    let matching: Vec<RadicandVariant> = RadicandVariant::ALL
        .into_iter()
        .zip(errs)
        .filter(|(_, e)| *e < tolerance)
        .map(|(v, _)| v)
        .collect();
    Ok(RadicandReport {
        points: states.len(),
        max_error_as_printed: errs[0],
        max_error_doubled: errs[1],
        tolerance,
        selected: (matching.len() == 1).then(|| matching[0]),
    })
}

/// Off-diagonal phase `arg(σ_ij σ_ji)` of two orthonormal pure states, with
/// `σ_ij = Φ(⟨i|U∥|j⟩)` and `U∥` transporting each of them separately.
pub fn op_pure(
    i: &[ComplexScalar],
    j: &[ComplexScalar],
    model: &ModelParams,
    kind: HamiltonianKind,
) -> Result<f64> {
    const ORTHO_TOL: f64 = 1e-10;
    if i.len() != 4 || j.len() != 4 {
        return Err(Error::NotOrthonormal);
    }
    if (norm(i) - 1.0).abs() > ORTHO_TOL
        || (norm(j) - 1.0).abs() > ORTHO_TOL
        || inner(i, j).norm() > ORTHO_TOL
    {
        return Err(Error::NotOrthonormal);
    }
    let dynamics = Dynamics::new(model, kind)?;

    let mut eigenvectors = ComplexMatrix::zeros(4);
    let columns = orthonormal_completion(&[i.to_vec(), j.to_vec()]);
    for (k, v) in columns.iter().enumerate() {
        eigenvectors.set_column(k, v);
    }
    // Every vector is its own eigenspace; the labels only need to be distinct.
    let frame = SpectralDecomposition {
        eigenvalues: vec![3.0, 2.0, 1.0, 0.0],
        eigenvectors,
        groups: (0..4).map(|k| vec![k]).collect(),
    };
    let u_par = dynamics.parallel(&frame)?;
    let s_ij = u_par.sandwich(i, j);
    let s_ji = u_par.sandwich(j, i);
    let smallest = s_ij.norm().min(s_ji.norm());
    if smallest < OVERLAP_TOL {
        return Err(Error::ZeroOverlap(smallest));
    }
    Ok(principal_arg((s_ij / s_ij.norm()) * (s_ji / s_ji.norm())))
}
