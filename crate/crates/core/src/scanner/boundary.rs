//! Largest purity at which a nodal point exists, per `θ`, next to the
//! separability threshold.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::free::NODE_ZERO_TOL;
use super::refine::bisect;
use super::Axis;
use crate::entanglement::separability_boundary;
use crate::error::{Error, Result};
use crate::model::{StateParams, Variant};
use crate::phases::analytic_trace;

/// Resolution of the reported `r` in the swept-`β` mode.
pub const BOUNDARY_R_TOL: f64 = 1e-4;
const R_LEVELS: usize = 100;

/// How `β` enters the search for nodal purities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaMode {
    /// `(θ, r)` is nodal when some `β` on an `n_beta` grid over `[0, π]` is.
    Swept { n_beta: usize },
    /// Only the given `β`.
    Fixed(f64),
}

impl Default for BetaMode {
    fn default() -> Self {
        BetaMode::Swept { n_beta: 512 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryRow {
    pub theta: f64,
    /// `None` when no nodal point exists for any sampled `r`.
    pub r_nodal_max: Option<f64>,
    /// `1/(1 + 2|sin 2θ|)`.
    pub r_separable: f64,
}

fn closed_form(variant: Variant, r: f64, theta: f64, beta: f64) -> f64 {
    analytic_trace(&StateParams {
        variant,
        r,
        theta,
        beta,
    })
}

/// For `n_theta` angles over `[0, π]`, the largest `r ∈ (0, 1]` with a nodal
/// point, alongside the separability threshold.
pub fn boundary_scan(variant: Variant, n_theta: usize, mode: BetaMode) -> Result<Vec<BoundaryRow>> {
    let axis = Axis::half_turn(n_theta);
    axis.validate("n_theta")?;
    match mode {
        BetaMode::Swept { n_beta } if n_beta < 2 => {
            return Err(Error::invalid("n_beta", format!("needs at least 2 samples, got {n_beta}")))
        }
        BetaMode::Fixed(b) if !b.is_finite() => return Err(Error::invalid("beta", "must be finite")),
        _ => {}
    }
    Ok(axis
        .values()
        .into_par_iter()
        .map(|theta| BoundaryRow {
            theta,
            r_nodal_max: match mode {
                BetaMode::Swept { n_beta } => swept_max(variant, theta, &Axis::half_turn(n_beta).values()),
                BetaMode::Fixed(beta) => fixed_max(variant, theta, beta),
            },
            r_separable: separability_boundary(theta),
        })
        .collect())
}

fn nodal_beta_exists(variant: Variant, r: f64, theta: f64, betas: &[f64]) -> bool {
    let mut prev: Option<f64> = None;
    for &b in betas {
        let v = closed_form(variant, r, theta, b);
        if v.abs() < NODE_ZERO_TOL {
            return true;
        }
        if let Some(p) = prev {
            if (p > 0.0) != (v > 0.0) {
                return true;
            }
        }
        prev = Some(v);
    }
    false
}

/// Highest of the levels `k/100` with a nodal `β`, then bisected against the
/// level above it.
fn swept_max(variant: Variant, theta: f64, betas: &[f64]) -> Option<f64> {
    let level = |k: usize| k as f64 / R_LEVELS as f64;
    let top = (1..=R_LEVELS).rev().find(|&k| nodal_beta_exists(variant, level(k), theta, betas))?;
    if top == R_LEVELS {
        return Some(1.0);
    }
    let (mut lo, mut hi) = (level(top), level(top + 1));
    while hi - lo > BOUNDARY_R_TOL {
        let mid = 0.5 * (lo + hi);
        if nodal_beta_exists(variant, mid, theta, betas) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo)
}

/// Largest root in `r` of the trace at fixed `(θ, β)`.
fn fixed_max(variant: Variant, theta: f64, beta: f64) -> Option<f64> {
    let level = |k: usize| if k == 0 { f64::EPSILON } else { k as f64 / R_LEVELS as f64 };
    let f = |r: f64| closed_form(variant, r, theta, beta);
    let values: Vec<f64> = (0..=R_LEVELS).map(|k| f(level(k))).collect();
    for k in (0..R_LEVELS).rev() {
        if values[k + 1].abs() < NODE_ZERO_TOL {
            return Some(level(k + 1));
        }
        if (values[k] > 0.0) != (values[k + 1] > 0.0) && values[k].abs() >= NODE_ZERO_TOL {
            return Some(bisect(f, level(k), level(k + 1), values[k], values[k + 1]).0);
        }
    }
    (values[0].abs() < NODE_ZERO_TOL).then_some(level(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, PI};

    #[test]
    fn pure_state_is_always_nodal_when_beta_is_free() {
        // At r = 1 the trace is cos 2β sin 2θ, which vanishes at β = π/4.
        let rows = boundary_scan(Variant::Phi, 17, BetaMode::default()).unwrap();
        assert!(rows.iter().all(|row| row.r_nodal_max == Some(1.0)));
        assert_eq!(rows[0].r_separable, 1.0);
    }

    #[test]
    fn fixed_beta_roots_sit_below_the_threshold() {
        let rows = boundary_scan(Variant::Phi, 257, BetaMode::Fixed(0.0)).unwrap();
        assert_eq!(rows[0].r_nodal_max, Some(1.0));
        let mut found = 0;
        for row in &rows {
            if let Some(r) = row.r_nodal_max {
                found += 1;
                assert!(r <= row.r_separable + 1e-12, "{row:?}");
                let v = closed_form(Variant::Phi, r, row.theta, 0.0);
                assert!(v.abs() < 1e-10);
            }
        }
        assert!(found > 2);
        // The Bell angle of this variant has trace 1 for every r.
        let bell = rows.iter().find(|row| (row.theta - FRAC_PI_4).abs() < 1e-12).unwrap();
        assert_eq!(bell.r_nodal_max, None);
    }

    #[test]
    fn fixed_root_is_linear_in_r() {
        // The trace is affine in r, so the root is (T0)/(T0 - T1).
        let theta = 0.9 * PI;
        let (t0, t1) = (closed_form(Variant::Phi, 0.0, theta, 0.0), closed_form(Variant::Phi, 1.0, theta, 0.0));
        let expected = t0 / (t0 - t1);
        let got = fixed_max(Variant::Phi, theta, 0.0).unwrap();
        assert!((got - expected).abs() < 1e-10, "{got} vs {expected}");
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(boundary_scan(Variant::Phi, 1, BetaMode::default()).is_err());
        assert!(boundary_scan(Variant::Phi, 4, BetaMode::Swept { n_beta: 1 }).is_err());
        assert!(boundary_scan(Variant::Phi, 4, BetaMode::Fixed(f64::NAN)).is_err());
    }
}
