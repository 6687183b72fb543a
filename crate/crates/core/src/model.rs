//! Hamiltonians and initial states of the two-spin model.
//!
//! Basis ordering is fixed everywhere: `|11⟩, |10⟩, |01⟩, |00⟩` with the first
//! qubit varying slowest. `|1⟩` is the `σ_z = +1` state and
//! `σ_y|0⟩ = i|1⟩`, `σ_y|1⟩ = -i|0⟩`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{kron, ComplexMatrix, ComplexScalar, SpectralDecomposition};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `σ_y` in the single-qubit basis `(|1⟩, |0⟩)`.
pub fn sigma_y() -> ComplexMatrix {
    ComplexMatrix::from_fn(2, |i, j| match (i, j) {
        (0, 1) => c(0.0, 1.0),
        (1, 0) => c(0.0, -1.0),
        _ => c(0.0, 0.0),
    })
}

/// `σ_z` in the single-qubit basis `(|1⟩, |0⟩)`.
pub fn sigma_z() -> ComplexMatrix {
    ComplexMatrix::from_real_diagonal(&[1.0, -1.0])
}

/// Which member of the entangled family sits on top of the white-noise background.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// `cosθ e^{iβ}|11⟩ + sinθ e^{-iβ}|00⟩`
    Phi,
    /// `cosθ e^{iβ}|10⟩ + sinθ e^{-iβ}|01⟩`
    Psi,
}

impl Variant {
    /// `+1` for phi, `-1` for psi: the sign in front of `cos2β sin2θ` in the closed forms.
    pub fn sign(self) -> f64 {
        match self {
            Variant::Phi => 1.0,
            Variant::Psi => -1.0,
        }
    }

    /// Basis indices carrying the entangled amplitudes, then the untouched pair.
    fn support(self) -> ([usize; 2], [usize; 2]) {
        match self {
            Variant::Phi => ([0, 3], [1, 2]),
            Variant::Psi => ([1, 2], [0, 3]),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Phi => "phi",
            Variant::Psi => "psi",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "phi" | "rho1" => Ok(Variant::Phi),
            "psi" | "rho2" => Ok(Variant::Psi),
            other => Err(Error::invalid("state", format!("unknown state `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HamiltonianKind {
    /// Two spins precessing independently about `y`.
    #[default]
    Free,
    /// Free precession plus the `(g/4) σ_z⊗σ_z` coupling.
    Ising,
}

impl fmt::Display for HamiltonianKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HamiltonianKind::Free => "free",
            HamiltonianKind::Ising => "ising",
        })
    }
}

impl FromStr for HamiltonianKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "free" => Ok(HamiltonianKind::Free),
            "ising" => Ok(HamiltonianKind::Ising),
            other => Err(Error::invalid("kind", format!("unknown Hamiltonian `{other}`"))),
        }
    }
}

/// Precession frequencies, Ising coupling and evolution time (`ħ = 1`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub omega1: f64,
    pub omega2: f64,
    pub g: f64,
    pub t: f64,
}

impl ModelParams {
    pub fn new(omega1: f64, omega2: f64, g: f64, t: f64) -> Result<Self> {
        let p = Self {
            omega1,
            omega2,
            g,
            t,
        };
        p.validate()?;
        Ok(p)
    }

    /// Equal frequencies `ω`, coupling `J·ω`, and `t = omega_t / ω`.
    pub fn resonant(omega: f64, coupling_j: f64, omega_t: f64) -> Result<Self> {
        Self::new(omega, omega, coupling_j * omega, omega_t / omega)
    }

    /// `ω = 1`, `ωt = π`, no coupling.
    pub fn half_period() -> Self {
        Self {
            omega1: 1.0,
            omega2: 1.0,
            g: 0.0,
            t: std::f64::consts::PI,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("omega1", self.omega1),
            ("omega2", self.omega2),
            ("g", self.g),
            ("t", self.t),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(field, "must be finite"));
            }
        }
        if self.omega1 <= 0.0 {
            return Err(Error::invalid("omega1", "must be positive"));
        }
        if self.omega2 <= 0.0 {
            return Err(Error::invalid("omega2", "must be positive"));
        }
        if self.g < 0.0 {
            return Err(Error::invalid("g", "must be non-negative"));
        }
        if self.t < 0.0 {
            return Err(Error::invalid("t", "must be non-negative"));
        }
        Ok(())
    }

    /// Rescaled coupling `J = g/ω`, defined only for equal frequencies.
    pub fn coupling_j(&self) -> Option<f64> {
        (self.omega1 == self.omega2).then(|| self.g / self.omega1)
    }

    pub fn hamiltonian(&self, kind: HamiltonianKind) -> ComplexMatrix {
        match kind {
            HamiltonianKind::Free => hamiltonian_free(self),
            HamiltonianKind::Ising => hamiltonian_ising(self),
        }
    }
}

/// `(ω₁/2) σ_y⊗I + (ω₂/2) I⊗σ_y`.
pub fn hamiltonian_free(p: &ModelParams) -> ComplexMatrix {
    let id = ComplexMatrix::identity(2);
    let sy = sigma_y();
    &kron(&sy, &id).scale_real(p.omega1 / 2.0) + &kron(&id, &sy).scale_real(p.omega2 / 2.0)
}

/// Full coupled Hamiltonian: the free part plus `(g/4) σ_z⊗σ_z`.
pub fn hamiltonian_ising(p: &ModelParams) -> ComplexMatrix {
    let zz = kron(&sigma_z(), &sigma_z()).scale_real(p.g / 4.0);
    &hamiltonian_free(p) + &zz
}

/// `(variant, r, θ, β)`: white noise of weight `1 - r` mixed with the
/// entangled pure state of the chosen variant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateParams {
    pub variant: Variant,
    pub r: f64,
    pub theta: f64,
    pub beta: f64,
}

impl StateParams {
    pub fn new(variant: Variant, r: f64, theta: f64, beta: f64) -> Result<Self> {
        let s = Self {
            variant,
            r,
            theta,
            beta,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.r.is_finite() || self.r <= 0.0 || self.r > 1.0 {
            return Err(Error::invalid("r", format!("must lie in (0, 1], got {}", self.r)));
        }
        if !self.theta.is_finite() {
            return Err(Error::invalid("theta", "must be finite"));
        }
        if !self.beta.is_finite() {
            return Err(Error::invalid("beta", "must be finite"));
        }
        Ok(())
    }

    /// Largest eigenvalue, `(1 + 3r)/4`.
    pub fn leading_eigenvalue(&self) -> f64 {
        (1.0 + 3.0 * self.r) / 4.0
    }

    /// Triply degenerate eigenvalue, `(1 - r)/4`.
    pub fn background_eigenvalue(&self) -> f64 {
        (1.0 - self.r) / 4.0
    }
}

/// The pure entangled state `|Φ⟩` of the chosen variant.
pub fn state_vector(variant: Variant, theta: f64, beta: f64) -> [ComplexScalar; 4] {
    let mut v = [c(0.0, 0.0); 4];
    let ([hi, lo], _) = variant.support();
    v[hi] = Complex64::from_polar(theta.cos(), beta);
    v[lo] = Complex64::from_polar(theta.sin(), -beta);
    v
}

/// `ρ(0) = (1 - r)/4 · I + r |Φ⟩⟨Φ|`.
pub fn build_state(s: &StateParams) -> ComplexMatrix {
    let phi = state_vector(s.variant, s.theta, s.beta);
    &ComplexMatrix::identity(4).scale_real(s.background_eigenvalue())
        + &ComplexMatrix::outer(&phi).scale_real(s.r)
}

/// Closed-form eigenbasis of [`build_state`]: `|Φ⟩` first, then a fixed
/// orthonormal basis of its complement (the degenerate triple).
pub fn state_eigenbasis(s: &StateParams) -> SpectralDecomposition {
    let phi = state_vector(s.variant, s.theta, s.beta);
    let ([hi, lo], [a, b]) = s.variant.support();

    let mut partner = [c(0.0, 0.0); 4];
    partner[hi] = Complex64::from_polar(s.theta.sin(), s.beta);
    partner[lo] = -Complex64::from_polar(s.theta.cos(), -s.beta);

    let mut basis_a = [c(0.0, 0.0); 4];
    basis_a[a] = c(1.0, 0.0);
    let mut basis_b = [c(0.0, 0.0); 4];
    basis_b[b] = c(1.0, 0.0);

    let mut eigenvectors = ComplexMatrix::zeros(4);
    for (col, v) in [phi, partner, basis_a, basis_b].iter().enumerate() {
        eigenvectors.set_column(col, v);
    }
    let bg = s.background_eigenvalue();
    SpectralDecomposition {
        eigenvalues: vec![s.leading_eigenvalue(), bg, bg, bg],
        eigenvectors,
        groups: vec![vec![0], vec![1, 2, 3]],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eig_hermitian_default;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn model(w1: f64, w2: f64, g: f64) -> ModelParams {
        ModelParams { omega1: w1, omega2: w2, g, t: PI }
    }

    #[test]
    fn free_hamiltonian_limits() {
        assert_eq!(hamiltonian_free(&model(0., 0., 0.)).max_abs(), 0.0);
        let h = hamiltonian_free(&model(1., 1., 0.));
        for i in 0..4 {
            assert_eq!(h[(i, i)], c(0., 0.));
        }
        assert_eq!(h.hermiticity_error(), 0.0);
        let spec = eig_hermitian_default(&h).unwrap();
        for (l, e) in spec.eigenvalues.iter().zip([1.0, 0.0, 0.0, -1.0]) {
            assert!((l - e).abs() < 1e-14);
        }
    }

    #[test]
    fn ising_hamiltonian() {
        let p = model(1., 1., 0.);
        assert_eq!(hamiltonian_ising(&p), hamiltonian_free(&p));
        let zz = hamiltonian_ising(&model(0., 0., 4.));
        assert_eq!(zz, ComplexMatrix::from_real_diagonal(&[1., -1., -1., 1.]));
        let h = hamiltonian_ising(&model(1., 1., 1.));
        assert_eq!(h.hermiticity_error(), 0.0);
        assert_eq!(h.trace(), c(0., 0.));
    }

    #[test]
    fn coupling_j_only_for_equal_frequencies() {
        assert_eq!(model(2., 2., 0.5).coupling_j(), Some(0.25));
        assert_eq!(model(1., 2., 0.5).coupling_j(), None);
    }

    #[test]
    fn model_validation_names_field() {
        let err = ModelParams::new(1., 1., -0.1, 1.).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { field: "g", .. }));
        let err = ModelParams::new(0., 1., 0., 1.).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { field: "omega1", .. }));
    }

    #[test]
    fn state_validation() {
        for r in [0.0, -0.1, 1.5, f64::NAN] {
            let err = StateParams::new(Variant::Phi, r, 0., 0.).unwrap_err();
            assert!(matches!(err, Error::InvalidParameter { field: "r", .. }));
        }
        assert!(StateParams::new(Variant::Psi, 1.0, 10.0, -3.0).is_ok());
    }

    #[test]
    fn bell_projector_at_full_purity() {
        let s = StateParams::new(Variant::Phi, 1.0, FRAC_PI_4, 0.0).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = ComplexMatrix::outer(&[c(h, 0.), c(0., 0.), c(0., 0.), c(h, 0.)]);
        assert!(build_state(&s).max_abs_diff(&bell) < 1e-15);
    }

    #[test]
    fn maximally_mixed_limit() {
        for variant in [Variant::Phi, Variant::Psi] {
            let s = StateParams::new(variant, 1e-15, 0.7, 0.2).unwrap();
            assert!(build_state(&s).max_abs_diff(&ComplexMatrix::identity(4).scale_real(0.25)) < 1e-14);
        }
    }

    #[test]
    fn werner_assembly() {
        let r = 0.37;
        let s = StateParams::new(Variant::Phi, r, FRAC_PI_4, 0.0).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = ComplexMatrix::outer(&[c(h, 0.), c(0., 0.), c(0., 0.), c(h, 0.)]);
        let werner = &ComplexMatrix::identity(4).scale_real((1. - r) / 4.) + &bell.scale_real(r);
        assert!(build_state(&s).max_abs_diff(&werner) < 1e-16);
    }

    #[test]
    fn spectrum_of_example_state() {
        let s = StateParams::new(Variant::Phi, 0.6, 0.3, 0.1).unwrap();
        let spec = eig_hermitian_default(&build_state(&s)).unwrap();
        for (l, e) in spec.eigenvalues.iter().zip([0.7, 0.1, 0.1, 0.1]) {
            assert!((l - e).abs() < 1e-14);
        }
        assert_eq!(spec.groups, vec![vec![0], vec![1, 2, 3]]);
    }

    #[test]
    fn product_state_eigenbasis() {
        let s = StateParams::new(Variant::Phi, 0.5, 0.0, 0.4).unwrap();
        let spec = state_eigenbasis(&s);
        let phi = spec.vector(0);
        assert!((phi[0].norm() - 1.0).abs() < 1e-15);
        // complement spans |10>, |01>, |00>
        let proj = spec.group_projector(&spec.groups[1]);
        assert!(proj.max_abs_diff(&ComplexMatrix::from_real_diagonal(&[0., 1., 1., 1.])) < 1e-15);
        let pure = state_eigenbasis(&StateParams::new(Variant::Phi, 1.0, FRAC_PI_4, 0.0).unwrap());
        assert_eq!(pure.eigenvalues, vec![1.0, 0.0, 0.0, 0.0]);
    }

    proptest! {
        #[test]
        fn built_states_are_valid_density_matrices(
            psi in any::<bool>(), r in 1e-6..=1.0_f64, theta in -7.0..7.0_f64, beta in -7.0..7.0_f64,
        ) {
            let variant = if psi { Variant::Psi } else { Variant::Phi };
            let s = StateParams::new(variant, r, theta, beta).unwrap();
            let rho = build_state(&s);
            prop_assert!(rho.hermiticity_error() < 1e-14);
            prop_assert!((rho.trace() - c(1., 0.)).norm() < 1e-14);
            let numeric = eig_hermitian_default(&rho).unwrap();
            prop_assert!(numeric.eigenvalues[3] >= -1e-14);

            let analytic = state_eigenbasis(&s);
            prop_assert!(analytic.orthonormality_error() < 1e-14);
            prop_assert!(analytic.reconstruct().max_abs_diff(&rho) < 1e-12);
            for (a, b) in analytic.eigenvalues.iter().zip(&numeric.eigenvalues) {
                prop_assert!((a - b).abs() < 1e-10);
            }
        }
    }
}
