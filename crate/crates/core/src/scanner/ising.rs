//! Coupled sweeps: the trace is complex, so nodal points are the crossings of
//! the `Re = 0` and `Im = 0` level curves.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::contour::{chain, Field, LevelCurve, LevelKind, Segment};
use super::refine::{bisect_along_real_curve, dedupe, newton, Domain, PlanePoint};
use super::{Axis, ScanGrid};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::model::{build_state, hamiltonian_ising, state_eigenbasis, ModelParams, StateParams, Variant};
use crate::phases::trace_with;
use crate::transport::Dynamics;

/// `|Im trace|` below this is set to exactly zero before contouring; the
/// uncoupled trace is real and only carries round-off there.
const IM_SNAP: f64 = 1e-13;

/// Both level-set families of the trace over one parameter plane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaneScan {
    pub x: Axis,
    pub y: Axis,
    /// `Re trace`, indexed `[i][j]` with `i` along `x`.
    pub re: Vec<f64>,
    /// `Im trace`, same layout, after snapping round-off to zero.
    pub im: Vec<f64>,
    /// `Re = 0` curves first, then `Im = 0`; ids are consecutive.
    pub curves: Vec<LevelCurve>,
    pub intersections: Vec<PlanePoint>,
}

impl PlaneScan {
    pub fn value(&self, i: usize, j: usize) -> Complex64 {
        let k = i * self.y.count + j;
        Complex64::new(self.re[k], self.im[k])
    }
}

/// One purity slice of [`scan_ising`]: `x = θ`, `y = J`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsingSlice {
    pub r: f64,
    pub plane: PlaneScan,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsingScanResult {
    pub variant: Variant,
    pub beta: f64,
    pub grid: ScanGrid,
    pub slices: Vec<IsingSlice>,
}

impl IsingScanResult {
    /// Every refined intersection with the purity of its slice.
    pub fn intersections(&self) -> impl Iterator<Item = (f64, &PlanePoint)> {
        self.slices.iter().flat_map(|s| s.plane.intersections.iter().map(move |p| (s.r, p)))
    }
}

/// A `(θ, r)` plane at one fixed coupling: `x = θ`, `y = r`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedCouplingScan {
    pub variant: Variant,
    pub beta: f64,
    pub coupling: f64,
    pub omega_t: f64,
    pub plane: PlaneScan,
}

/// `ω = 1`, coupling `J`, no parameter validation: Newton probes and
/// finite differences may step just outside the physical range.
fn coupled_dynamics(coupling: f64, omega_t: f64) -> Result<Dynamics> {
    let p = ModelParams {
        omega1: 1.0,
        omega2: 1.0,
        g: coupling,
        t: omega_t,
    };
    Dynamics::from_hamiltonian(hamiltonian_ising(&p), omega_t)
}

fn probe(dynamics: &Dynamics, variant: Variant, r: f64, theta: f64, beta: f64) -> Result<Complex64> {
    trace_with(dynamics, &StateParams { variant, r, theta, beta })
}

/// `U∥` depends on the eigenvectors of `ρ(0)` but not on `r`, so one
/// transported propagator per `(θ, J)` serves every purity level.
fn traces_for_all_r(
    u_par: &ComplexMatrix,
    states: &[ComplexMatrix],
    out: &mut [Vec<Complex64>],
) {
    for (k, rho) in states.iter().enumerate() {
        out[k].push((u_par * rho).trace());
    }
}

/// Nodal structure over `(θ, J)` for every purity level of `grid`, at a
/// fixed relative phase `beta`, through the full matrix pipeline.
pub fn scan_ising(variant: Variant, grid: &ScanGrid, beta: f64) -> Result<IsingScanResult> {
    grid.validate()?;
    if !beta.is_finite() {
        return Err(Error::invalid("beta", "must be finite"));
    }
    let thetas = grid.theta.values();
    let dynamics: Vec<Dynamics> = grid
        .coupling
        .values()
        .par_iter()
        .map(|&j| coupled_dynamics(j, grid.omega_t))
        .collect::<Result<_>>()?;

    let nr = grid.r_values.len();
    // rows[θ][r][J]
    let rows: Vec<Vec<Vec<Complex64>>> = thetas
        .par_iter()
        .map(|&theta| {
            let at = |r| StateParams { variant, r, theta, beta };
            let basis = state_eigenbasis(&at(1.0));
            let states: Vec<ComplexMatrix> = grid.r_values.iter().map(|&r| build_state(&at(r))).collect();
            let mut out = vec![Vec::with_capacity(dynamics.len()); nr];
            for d in &dynamics {
                traces_for_all_r(&d.parallel(&basis)?, &states, &mut out);
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let slices = grid
        .r_values
        .iter()
        .enumerate()
        .map(|(k, &r)| {
            let values: Vec<Complex64> = rows.iter().flat_map(|row| row[k].iter().copied()).collect();
            let eval = |theta: f64, coupling: f64| {
                probe(&coupled_dynamics(coupling, grid.omega_t)?, variant, r, theta, beta)
            };
            Ok(IsingSlice {
                r,
                plane: analyse_plane(grid.theta, grid.coupling, &values, eval)?,
            })
        })
        .collect::<Result<_>>()?;

    Ok(IsingScanResult {
        variant,
        beta,
        grid: grid.clone(),
        slices,
    })
}

/// Nodal structure over `(θ, r)` at one coupling `J`.
pub fn scan_ising_fixed_coupling(
    variant: Variant,
    coupling: f64,
    theta: Axis,
    r: Axis,
    beta: f64,
    omega_t: f64,
) -> Result<FixedCouplingScan> {
    if !coupling.is_finite() || coupling < 0.0 {
        return Err(Error::invalid("coupling_j", "must be finite and non-negative"));
    }
    theta.validate("theta")?;
    r.validate("r")?;
    if r.start <= 0.0 || r.end > 1.0 {
        return Err(Error::invalid("r", "range must lie in (0, 1]"));
    }
    if !beta.is_finite() {
        return Err(Error::invalid("beta", "must be finite"));
    }
    if !omega_t.is_finite() || omega_t <= 0.0 {
        return Err(Error::invalid("omega_t", "must be positive and finite"));
    }
    let dynamics = coupled_dynamics(coupling, omega_t)?;
    let r_values = r.values();
    let rows: Vec<Vec<Complex64>> = theta
        .values()
        .par_iter()
        .map(|&th| {
            let at = |r| StateParams { variant, r, theta: th, beta };
            let u_par = dynamics.parallel(&state_eigenbasis(&at(1.0)))?;
            Ok(r_values.iter().map(|&r| (&u_par * &build_state(&at(r))).trace()).collect())
        })
        .collect::<Result<_>>()?;
    let values: Vec<Complex64> = rows.concat();
    let eval = |th: f64, purity: f64| probe(&dynamics, variant, purity, th, beta);
    Ok(FixedCouplingScan {
        variant,
        beta,
        coupling,
        omega_t,
        plane: analyse_plane(theta, r, &values, eval)?,
    })
}

struct Seed {
    start: [f64; 2],
    /// `Re = 0` pieces in the seed cell, for the fallback walk.
    real_pieces: Vec<([f64; 2], [f64; 2])>,
}

fn segment_intersection(p: [f64; 2], p2: [f64; 2], q: [f64; 2], q2: [f64; 2]) -> Option<[f64; 2]> {
    let r = [p2[0] - p[0], p2[1] - p[1]];
    let s = [q2[0] - q[0], q2[1] - q[1]];
    let denom = r[0] * s[1] - r[1] * s[0];
    if denom == 0.0 {
        return None;
    }
    let d = [q[0] - p[0], q[1] - p[1]];
    let t = (d[0] * s[1] - d[1] * s[0]) / denom;
    let u = (d[0] * r[1] - d[1] * r[0]) / denom;
    ((0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u)).then(|| [p[0] + t * r[0], p[1] + t * r[1]])
}

fn brackets(values: &[f64], ny: usize, i: usize, j: usize) -> bool {
    let c = [values[i * ny + j], values[(i + 1) * ny + j], values[(i + 1) * ny + j + 1], values[i * ny + j + 1]];
    let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    lo <= 0.0 && hi >= 0.0
}

fn by_cell(segments: &[Segment]) -> BTreeMap<(usize, usize), Vec<usize>> {
    let mut map: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (k, s) in segments.iter().enumerate() {
        map.entry(s.cell).or_default().push(k);
    }
    map
}

/// Contours both parts of `values`, seeds Newton from every cell in which
/// both parts bracket zero, and keeps the refined roots.
fn analyse_plane<F>(x: Axis, y: Axis, values: &[Complex64], eval: F) -> Result<PlaneScan>
where
    F: Fn(f64, f64) -> Result<Complex64> + Sync,
{
    let xs = x.values();
    let ys = y.values();
    let ny = ys.len();
    let re: Vec<f64> = values.iter().map(|v| v.re).collect();
    let im: Vec<f64> = values.iter().map(|v| if v.im.abs() < IM_SNAP { 0.0 } else { v.im }).collect();

    let re_field = Field { xs: &xs, ys: &ys, values: &re };
    let im_field = Field { xs: &xs, ys: &ys, values: &im };
    let re_segments = re_field.segments();
    let im_segments = im_field.segments();
    let mut curves = chain(&re_field, &re_segments, LevelKind::ReZero, 0);
    let next_id = curves.len();
    curves.extend(chain(&im_field, &im_segments, LevelKind::ImZero, next_id));

    let re_cells = by_cell(&re_segments);
    let im_cells = by_cell(&im_segments);
    let piece = |field: &Field<'_>, s: &Segment| (field.crossing(s.ends[0]), field.crossing(s.ends[1]));

    let mut seeds = Vec::new();
    for i in 0..xs.len() - 1 {
        for j in 0..ny - 1 {
            if !(brackets(&re, ny, i, j) && brackets(&im, ny, i, j)) {
                continue;
            }
            let real_pieces: Vec<_> = re_cells
                .get(&(i, j))
                .map(|ks| ks.iter().map(|&k| piece(&re_field, &re_segments[k])).collect())
                .unwrap_or_default();
            let imag_pieces: Vec<_> = im_cells
                .get(&(i, j))
                .map(|ks| ks.iter().map(|&k| piece(&im_field, &im_segments[k])).collect())
                .unwrap_or_default();
            let crossing = real_pieces.iter().find_map(|&(a, b)| {
                imag_pieces.iter().find_map(|&(c, d)| segment_intersection(a, b, c, d))
            });
            let centre = [0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1])];
            seeds.push(Seed {
                start: crossing.unwrap_or(centre),
                real_pieces,
            });
        }
    }

    let domain = Domain {
        x: (x.start, x.end),
        y: (y.start, y.end),
    };
    let refined: Vec<Option<PlanePoint>> = seeds
        .par_iter()
        .map(|seed| {
            if let Some(p) = newton(&eval, seed.start, domain)? {
                return Ok(Some(p));
            }
            for &(a, b) in &seed.real_pieces {
                if let Some(p) = bisect_along_real_curve(&eval, a, b, domain)? {
                    return Ok(Some(p));
                }
            }
            Ok(None)
        })
        .collect::<Result<_>>()?;

    Ok(PlaneScan {
        x,
        y,
        re,
        im,
        curves,
        intersections: dedupe(refined.into_iter().flatten()),
    })
}
