//! Peres partial-transpose test and the separability threshold of the
//! white-noise family.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian_default, partial_transpose_2, ComplexMatrix};
use crate::model::{build_state, StateParams, Variant};
use crate::transport::check_density_matrix;

/// A partial-transpose eigenvalue below `-PPT_TOL` signals entanglement.
pub const PPT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparabilityVerdict {
    pub min_pt_eigenvalue: f64,
    pub entangled: bool,
}

/// Smallest eigenvalue of the partial transpose; negative iff entangled (2⊗2).
pub fn ppt_check(rho: &ComplexMatrix) -> Result<SeparabilityVerdict> {
    check_density_matrix(rho)?;
    if rho.dim() != 4 {
        return Err(Error::InvalidDensityMatrix(format!(
            "expected a two-qubit (4x4) state, got {0}x{0}",
            rho.dim()
        )));
    }
    let pt = partial_transpose_2(rho)?;
    let spec = eig_hermitian_default(&pt)?;
    let min = spec.eigenvalues[spec.eigenvalues.len() - 1];
    Ok(SeparabilityVerdict {
        min_pt_eigenvalue: min,
        entangled: min < -PPT_TOL,
    })
}

/// `r = 1/(1 + 2|sin 2θ|)`: above this purity the state is entangled.
pub fn separability_boundary(theta: f64) -> f64 {
    1.0 / (1.0 + 2.0 * (2.0 * theta).sin().abs())
}

/// Bisection precision on `r` used by [`boundary_by_bisection`].
pub const BISECTION_TOL: f64 = 1e-9;

/// The separability threshold at `β = 0`, found by bisecting `r` on the PPT
/// verdict. Returns `1` when the state stays separable up to full purity.
pub fn boundary_by_bisection(theta: f64, variant: Variant) -> Result<f64> {
    boundary_by_bisection_at(theta, 0.0, variant)
}

/// Same as [`boundary_by_bisection`] for an arbitrary relative phase.
pub fn boundary_by_bisection_at(theta: f64, beta: f64, variant: Variant) -> Result<f64> {
    let entangled = |r: f64| -> Result<bool> {
        let s = StateParams::new(variant, r, theta, beta)?;
        Ok(ppt_check(&build_state(&s))?.entangled)
    };
    if !entangled(1.0)? {
        return Ok(1.0);
    }
    let mut lo = f64::EPSILON;
    if entangled(lo)? {
        return Err(Error::NoSignChange);
    }
    let mut hi = 1.0;
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if entangled(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
