//! Uncoupled sweep over `(r, θ, β)` using the closed-form trace.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::refine::bisect;
use super::ScanGrid;
use crate::error::{Error, Result};
use crate::model::{ModelParams, StateParams, Variant};
use crate::phases::{analytic_trace, trace_with};
use crate::transport::Dynamics;
use crate::HamiltonianKind;

/// A grid node with `|trace|` below this is itself reported as nodal.
pub const NODE_ZERO_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreeNodalPoint {
    pub theta: f64,
    pub beta: f64,
    pub r: f64,
    /// `|trace|` from the closed form at the refined location.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodalScanResult {
    pub variant: Variant,
    pub grid: ScanGrid,
    /// Real trace per node, indexed `[r][θ][β]`.
    pub traces: Vec<f64>,
    /// Grid-node zeros, then bisected edge crossings, in node order.
    pub nodal_points: Vec<FreeNodalPoint>,
    /// `[r][θ]`: some `β` on the row is nodal.
    pub nodal_beta_exists: Vec<bool>,
}

impl NodalScanResult {
    pub fn trace(&self, ir: usize, it: usize, ib: usize) -> f64 {
        let (nt, nb) = (self.grid.theta.count, self.grid.beta.count);
        self.traces[(ir * nt + it) * nb + ib]
    }

    pub fn beta_exists(&self, ir: usize, it: usize) -> bool {
        self.nodal_beta_exists[ir * self.grid.theta.count + it]
    }

    pub fn min_abs_trace(&self) -> f64 {
        self.traces.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()))
    }
}

fn closed_form(variant: Variant, r: f64, theta: f64, beta: f64) -> f64 {
    analytic_trace(&StateParams {
        variant,
        r,
        theta,
        beta,
    })
}

/// Sweeps the grid with the closed form (equal frequencies, `ωt = π`).
///
/// Sign changes along `θ` and `β` edges are bisected to machine precision;
/// nodes whose trace already vanishes are reported as they are.
pub fn scan_free(variant: Variant, grid: &ScanGrid) -> Result<NodalScanResult> {
    grid.validate()?;
    if (grid.omega_t - PI).abs() > 1e-12 {
        return Err(Error::invalid(
            "omega_t",
            "the uncoupled sweep uses the closed form, which holds only at ωt = π",
        ));
    }
    let thetas = grid.theta.values();
    let betas = grid.beta.values();
    let (nr, nt) = (grid.r_values.len(), thetas.len());

    let traces: Vec<f64> = (0..nr * nt)
        .into_par_iter()
        .flat_map_iter(|row| {
            let (r, theta) = (grid.r_values[row / nt], thetas[row % nt]);
            betas.iter().map(move |&b| closed_form(variant, r, theta, b))
        })
        .collect();

    let nb = betas.len();
    let rows: Vec<(Vec<FreeNodalPoint>, bool)> = (0..nr * nt)
        .into_par_iter()
        .map(|row| {
            let (ir, it) = (row / nt, row % nt);
            let here = &traces[row * nb..(row + 1) * nb];
            let next = (it + 1 < nt).then(|| &traces[(row + 1) * nb..(row + 2) * nb]);
            row_nodal_points(variant, grid.r_values[ir], &thetas, &betas, it, here, next)
        })
        .collect();

    let mut nodal_points = Vec::new();
    let mut nodal_beta_exists = Vec::with_capacity(rows.len());
    for (points, exists) in rows {
        nodal_points.extend(points);
        nodal_beta_exists.push(exists);
    }
    Ok(NodalScanResult {
        variant,
        grid: grid.clone(),
        traces,
        nodal_points,
        nodal_beta_exists,
    })
}

fn opposite(a: f64, b: f64) -> bool {
    a.abs() >= NODE_ZERO_TOL && b.abs() >= NODE_ZERO_TOL && (a > 0.0) != (b > 0.0)
}

/// Nodal points contributed by the `θ = thetas[it]` row: its zero nodes, its
/// `β` edges and the `θ` edges to the next row.
fn row_nodal_points(
    variant: Variant,
    r: f64,
    thetas: &[f64],
    betas: &[f64],
    it: usize,
    here: &[f64],
    next: Option<&[f64]>,
) -> (Vec<FreeNodalPoint>, bool) {
    let theta = thetas[it];
    let mut points = Vec::new();
    let mut beta_exists = false;
    for j in 0..betas.len() {
        let v = here[j];
        if v.abs() < NODE_ZERO_TOL {
            points.push(FreeNodalPoint { theta, beta: betas[j], r, residual: v.abs() });
            beta_exists = true;
        }
        if j + 1 < betas.len() && opposite(v, here[j + 1]) {
            let f = |b: f64| closed_form(variant, r, theta, b);
            let (beta, residual) = bisect(f, betas[j], betas[j + 1], v, here[j + 1]);
            points.push(FreeNodalPoint { theta, beta, r, residual });
            beta_exists = true;
        }
        if let Some(next) = next {
            if opposite(v, next[j]) {
                let beta = betas[j];
                let f = |t: f64| closed_form(variant, r, t, beta);
                let (theta, residual) = bisect(f, thetas[it], thetas[it + 1], v, next[j]);
                points.push(FreeNodalPoint { theta, beta, r, residual });
            }
        }
    }
    (points, beta_exists)
}

/// `|Tr[U∥ρ]|` at each point, recomputed through the full matrix pipeline
/// rather than the closed form.
pub fn pipeline_residuals(variant: Variant, omega_t: f64, points: &[FreeNodalPoint]) -> Result<Vec<f64>> {
    let model = ModelParams::resonant(1.0, 0.0, omega_t)?;
    let dynamics = Dynamics::new(&model, HamiltonianKind::Free)?;
    points
        .par_iter()
        .map(|p| {
            let state = StateParams::new(variant, p.r, p.theta, p.beta)?;
            Ok(trace_with(&dynamics, &state)?.norm())
        })
        .collect()
}
