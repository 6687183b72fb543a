//! Grid sweeps that locate nodal points of `Tr[U∥(t)ρ(0)]`.
//!
//! In the uncoupled model the trace is real, so nodal points are sign changes
//! along grid edges refined by bisection. With an Ising coupling the trace is
//! complex and nodal points are intersections of the `Re = 0` and `Im = 0`
//! level curves, refined by a damped Newton iteration in the plane.
//!
//! Every sweep evaluates grid nodes independently and assembles results by
//! index, so the output does not depend on the number of worker threads.

mod boundary;
mod contour;
mod free;
mod ising;
mod refine;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use boundary::{boundary_scan, BetaMode, BoundaryRow, BOUNDARY_R_TOL};
pub use contour::{LevelCurve, LevelKind};
pub use free::{pipeline_residuals, scan_free, FreeNodalPoint, NodalScanResult, NODE_ZERO_TOL};
pub use ising::{
    scan_ising, scan_ising_fixed_coupling, FixedCouplingScan, IsingScanResult, IsingSlice,
    PlaneScan,
};
pub use refine::{PlanePoint, ACCEPT_RESIDUAL, DEDUPE_RADIUS};

/// Uniformly spaced samples `start, …, end`, endpoints included.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(start: f64, end: f64, count: usize) -> Result<Self> {
        let axis = Self { start, end, count };
        axis.validate("axis")?;
        Ok(axis)
    }

    /// `[0, π]` with `count` samples.
    pub fn half_turn(count: usize) -> Self {
        Self {
            start: 0.0,
            end: PI,
            count,
        }
    }

    pub fn validate(&self, field: &'static str) -> Result<()> {
        if self.count < 2 {
            return Err(Error::invalid(field, format!("needs at least 2 samples, got {}", self.count)));
        }
        if !self.start.is_finite() || !self.end.is_finite() || self.end <= self.start {
            return Err(Error::invalid(
                field,
                format!("range [{}, {}] is empty or not finite", self.start, self.end),
            ));
        }
        Ok(())
    }

    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.count {
            self.end
        } else {
            self.start + (self.end - self.start) * i as f64 / (self.count - 1) as f64
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.value(i)).collect()
    }

    pub fn step(&self) -> f64 {
        (self.end - self.start) / (self.count - 1) as f64
    }
}

/// Sampling of the parameter space shared by all sweeps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    pub theta: Axis,
    pub beta: Axis,
    /// Purity levels; each must lie in `(0, 1]`.
    pub r_values: Vec<f64>,
    /// Rescaled coupling `J = g/ω` (coupled sweeps only).
    pub coupling: Axis,
    pub omega_t: f64,
}

impl Default for ScanGrid {
    /// 512×512 over `(θ, β) ∈ [0, π]²`, 64 purity levels, 512×256 over
    /// `(θ, J) ∈ [0, π]×[0, 0.5]`, `ωt = π`.
    fn default() -> Self {
        Self {
            theta: Axis::half_turn(512),
            beta: Axis::half_turn(512),
            r_values: r_levels(64),
            coupling: Axis {
                start: 0.0,
                end: 0.5,
                count: 256,
            },
            omega_t: PI,
        }
    }
}

impl ScanGrid {
    /// The default grid with `r ∈ {0.1, …, 0.9}`, as used for coupled sweeps.
    pub fn coupled() -> Self {
        Self {
            r_values: (1..=9).map(|k| k as f64 / 10.0).collect(),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.theta.validate("theta")?;
        self.beta.validate("beta")?;
        self.coupling.validate("coupling_j")?;
        if self.coupling.start < 0.0 {
            return Err(Error::invalid("coupling_j", "must be non-negative"));
        }
        if self.r_values.is_empty() {
            return Err(Error::invalid("r", "at least one purity level is required"));
        }
        for &r in &self.r_values {
            if !r.is_finite() || r <= 0.0 || r > 1.0 {
                return Err(Error::invalid("r", format!("must lie in (0, 1], got {r}")));
            }
        }
        if !self.omega_t.is_finite() || self.omega_t <= 0.0 {
            return Err(Error::invalid("omega_t", "must be positive and finite"));
        }
        Ok(())
    }
}

/// `{1/n, 2/n, …, 1}`.
pub fn r_levels(n: usize) -> Vec<f64> {
    (1..=n).map(|k| k as f64 / n as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_endpoints_are_exact() {
        let a = Axis::half_turn(512);
        assert_eq!(a.value(0), 0.0);
        assert_eq!(a.value(511), PI);
        assert_eq!(a.values().len(), 512);
        assert!((a.value(1) - PI / 511.0).abs() < 1e-16);
    }

    #[test]
    fn grid_validation_names_fields() {
        let mut g = ScanGrid::default();
        g.theta.count = 1;
        assert!(matches!(g.validate(), Err(Error::InvalidParameter { field: "theta", .. })));
        let mut g = ScanGrid::default();
        g.r_values.push(1.5);
        assert!(matches!(g.validate(), Err(Error::InvalidParameter { field: "r", .. })));
        let mut g = ScanGrid::default();
        g.coupling.end = -1.0;
        assert!(matches!(g.validate(), Err(Error::InvalidParameter { field: "coupling_j", .. })));
        assert!(ScanGrid::default().validate().is_ok());
        assert_eq!(ScanGrid::coupled().r_values.len(), 9);
    }
}
