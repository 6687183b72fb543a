//! Time evolution and its parallel-transported counterpart.
//!
//! `U∥(t) = U(t)·V(t)` where `V` is block diagonal in the eigenbasis of a
//! reference state: inside each degenerate eigenspace `G` it is
//! `exp(+i t P_G H P_G)`, on every nondegenerate eigenvector `|k⟩` it is the
//! phase `e^{+i⟨k|H|k⟩t}`, and it never couples different eigenspaces.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{
    eig_hermitian_default, expm_i_hermitian, inner, norm, ComplexMatrix, SpectralDecomposition, HERMITIAN_TOL,
};
use crate::model::{state_eigenbasis, HamiltonianKind, ModelParams, StateParams};

/// Tolerance used when checking that an operator argument is a density matrix.
pub const DENSITY_TOL: f64 = 1e-10;

/// Reference eigenbasis, Hamiltonian and evolution time.
#[derive(Clone, Debug, PartialEq)]
pub struct ParallelFrame {
    pub basis: SpectralDecomposition,
    pub hamiltonian: ComplexMatrix,
    pub t: f64,
}

/// `U(t) = e^{-iHt}`.
pub fn evolution_operator(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    Ok(expm_i_hermitian(h, -t)?)
}

/// The block-diagonal corrector `V(t)`, returned in the computational basis.
pub fn parallel_corrector(frame: &ParallelFrame) -> Result<ComplexMatrix> {
    corrector(&frame.basis, &frame.hamiltonian, frame.t)
}

fn corrector(basis: &SpectralDecomposition, h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    if h.hermiticity_error() > HERMITIAN_TOL {
        return Err(crate::linalg::LinalgError::NotHermitian(h.hermiticity_error()).into());
    }
    let n = basis.dim();
    let vectors: Vec<Vec<Complex64>> = (0..n).map(|k| basis.vector(k)).collect();
    let mut v = ComplexMatrix::zeros(n);

    for group in &basis.groups {
        // H restricted to the group, expressed in the group's own basis.
        let block_h = ComplexMatrix::from_fn(group.len(), |a, b| {
            h.sandwich(&vectors[group[a]], &vectors[group[b]])
        });
        let block = if group.len() == 1 {
            let mut m = ComplexMatrix::zeros(1);
            m[(0, 0)] = Complex64::from_polar(1.0, block_h[(0, 0)].re * t);
            m
        } else {
            expm_i_hermitian(&block_h, t)?
        };
        for (a, &ka) in group.iter().enumerate() {
            for (b, &kb) in group.iter().enumerate() {
                let w = block[(a, b)];
                if w == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for i in 0..n {
                    let left = vectors[ka][i] * w;
                    for j in 0..n {
                        v[(i, j)] += left * vectors[kb][j].conj();
                    }
                }
            }
        }
    }
    Ok(v)
}

/// Hamiltonian, time and propagator for one model configuration.
///
/// Computing `U(t)` once and reusing it across many reference frames is what
/// makes grid scans affordable.
#[derive(Clone, Debug)]
pub struct Dynamics {
    pub hamiltonian: ComplexMatrix,
    pub t: f64,
    pub propagator: ComplexMatrix,
}

impl Dynamics {
    pub fn new(model: &ModelParams, kind: HamiltonianKind) -> Result<Self> {
        model.validate()?;
        Self::from_hamiltonian(model.hamiltonian(kind), model.t)
    }

    /// No parameter validation; the scanner uses this for finite-difference
    /// probes that may step slightly outside the physical domain.
    pub fn from_hamiltonian(hamiltonian: ComplexMatrix, t: f64) -> Result<Self> {
        let propagator = evolution_operator(&hamiltonian, t)?;
        Ok(Self {
            hamiltonian,
            t,
            propagator,
        })
    }

    pub fn frame(&self, basis: SpectralDecomposition) -> ParallelFrame {
        ParallelFrame {
            basis,
            hamiltonian: self.hamiltonian.clone(),
            t: self.t,
        }
    }

    /// `U∥(t)` for the frame given by `basis`.
    pub fn parallel(&self, basis: &SpectralDecomposition) -> Result<ComplexMatrix> {
        let v = corrector(basis, &self.hamiltonian, self.t)?;
        Ok(&self.propagator * &v)
    }

    /// `U(t) ρ U†(t)`.
    pub fn evolve_state(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        &(&self.propagator * rho) * &self.propagator.adjoint()
    }
}

/// `U∥(t)` in the frame of the initial state `ρ(0)` built from `state`.
pub fn parallel_evolution(
    state: &StateParams,
    model: &ModelParams,
    kind: HamiltonianKind,
) -> Result<ComplexMatrix> {
    state.validate()?;
    Dynamics::new(model, kind)?.parallel(&state_eigenbasis(state))
}

/// `U∥(t)` in the frame of an arbitrary reference density matrix.
pub fn parallel_evolution_at(
    reference: &ComplexMatrix,
    model: &ModelParams,
    kind: HamiltonianKind,
) -> Result<ComplexMatrix> {
    let basis = density_eigenbasis(reference)?;
    Dynamics::new(model, kind)?.parallel(&basis)
}

/// Eigenbasis of a validated density matrix.
pub fn density_eigenbasis(rho: &ComplexMatrix) -> Result<SpectralDecomposition> {
    check_density_matrix(rho)?;
    Ok(eig_hermitian_default(rho)?)
}

/// Hermitian, unit trace and positive semidefinite, all within [`DENSITY_TOL`].
pub fn check_density_matrix(rho: &ComplexMatrix) -> Result<()> {
    if !rho.is_finite() {
        return Err(Error::InvalidDensityMatrix("non-finite entries".into()));
    }
    let herm = rho.hermiticity_error();
    if herm > DENSITY_TOL {
        return Err(Error::InvalidDensityMatrix(format!(
            "not Hermitian (asymmetry {herm:e})"
        )));
    }
    let tr = rho.trace();
    if (tr - Complex64::new(1.0, 0.0)).norm() > DENSITY_TOL {
        return Err(Error::InvalidDensityMatrix(format!("trace is {tr}, not 1")));
    }
    let spec = eig_hermitian_default(rho)?;
    let min = spec.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -DENSITY_TOL {
        return Err(Error::InvalidDensityMatrix(format!(
            "negative eigenvalue {min:e}"
        )));
    }
    Ok(())
}

/// The same eigenspaces with a random orthonormal basis inside every
/// degenerate group. `U∥` must not depend on this choice.
pub fn randomize_degenerate_frame(basis: &SpectralDecomposition, rng: &mut impl Rng) -> SpectralDecomposition {
    let mut out = basis.clone();
    for group in basis.groups.iter().filter(|g| g.len() > 1) {
        let m = group.len();
        let mut columns: Vec<Vec<Complex64>> = Vec::with_capacity(m);
        while columns.len() < m {
            let mut w: Vec<Complex64> = (0..m)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            for c in &columns {
                let overlap = inner(c, &w);
                for (wi, ci) in w.iter_mut().zip(c) {
                    *wi -= overlap * ci;
                }
            }
            let n = norm(&w);
            if n > 1e-3 {
                columns.push(w.iter().map(|z| z / n).collect());
            }
        }
        for (a, &ka) in group.iter().enumerate() {
            let mixed: Vec<Complex64> = (0..basis.dim())
                .map(|i| group.iter().enumerate().map(|(b, &kb)| basis.eigenvectors[(i, kb)] * columns[a][b]).sum())
                .collect();
            out.eigenvectors.set_column(ka, &mixed);
        }
    }
    out
}

/// Largest violation of the parallel-transport condition at time `t`,
/// estimated with a central difference of step `1e-6·t`.
///
/// For every eigenspace `G` of `basis` this is `max |P_G U∥† (dU∥/dt) P_G|`
/// (for a nondegenerate `|k⟩` that is `|⟨k|U∥† dU∥/dt|k⟩|`).
pub fn parallel_transport_defect(
    basis: &SpectralDecomposition,
    hamiltonian: &ComplexMatrix,
    t: f64,
) -> Result<f64> {
    let dt = 1e-6 * t.abs().max(1e-300);
    let at = |time: f64| -> Result<ComplexMatrix> {
        Dynamics::from_hamiltonian(hamiltonian.clone(), time)?.parallel(basis)
    };
    let u = at(t)?;
    let plus = at(t + dt)?;
    let minus = at(t - dt)?;
    let derivative = (&plus - &minus).scale_real(0.5 / dt);
    let generator = &u.adjoint() * &derivative;

    let n = basis.dim();
    let vectors: Vec<Vec<Complex64>> = (0..n).map(|k| basis.vector(k)).collect();
    let mut worst: f64 = 0.0;
    for group in &basis.groups {
        for &a in group {
            for &b in group {
                worst = worst.max(generator.sandwich(&vectors[a], &vectors[b]).norm());
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_state, hamiltonian_free, Variant};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_state(rng: &mut impl Rng) -> StateParams {
        let variant = if rng.gen_bool(0.5) { Variant::Phi } else { Variant::Psi };
        StateParams::new(
            variant,
            rng.gen_range(0.01..=1.0),
            rng.gen_range(0.0..PI),
            rng.gen_range(0.0..PI),
        )
        .unwrap()
    }

    #[test]
    fn evolution_at_zero_time_is_identity() {
        let h = hamiltonian_free(&ModelParams::half_period());
        assert_eq!(evolution_operator(&h, 0.0).unwrap(), ComplexMatrix::identity(4));
    }

    #[test]
    fn half_period_free_evolution_is_double_spin_flip() {
        let h = hamiltonian_free(&ModelParams::half_period());
        let u = evolution_operator(&h, PI).unwrap();
        let z = c(0., 0.);
        let expected = ComplexMatrix::from_rows(&[
            vec![z, z, z, c(1., 0.)],
            vec![z, z, c(-1., 0.), z],
            vec![z, c(-1., 0.), z, z],
            vec![c(1., 0.), z, z, z],
        ])
        .unwrap();
        assert!(u.max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn evolution_group_property() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let a = ComplexMatrix::from_fn(4, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let h = (&a + &a.adjoint()).scale_real(0.5);
            let (t1, t2) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let lhs = &evolution_operator(&h, t1).unwrap() * &evolution_operator(&h, t2).unwrap();
            assert!(lhs.max_abs_diff(&evolution_operator(&h, t1 + t2).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn zero_hamiltonian_gives_identity_corrector() {
        let s = StateParams::new(Variant::Phi, 0.4, 0.3, 0.2).unwrap();
        let frame = ParallelFrame {
            basis: state_eigenbasis(&s),
            hamiltonian: ComplexMatrix::zeros(4),
            t: 2.0,
        };
        assert!(parallel_corrector(&frame).unwrap().max_abs_diff(&ComplexMatrix::identity(4)) < 1e-15);
    }

    #[test]
    fn corrector_phase_on_entangled_vector() {
        let s = StateParams::new(Variant::Phi, 0.4, 0.3, 0.2).unwrap();
        let basis = state_eigenbasis(&s);
        let phi = basis.vector(0);
        for (g, expected) in [(0.0, c(1., 0.)), (0.8, Complex64::from_polar(1.0, 0.8 * 1.3 / 4.0))] {
            let model = ModelParams { omega1: 1., omega2: 1., g, t: 1.3 };
            let frame = ParallelFrame {
                basis: basis.clone(),
                hamiltonian: model.hamiltonian(HamiltonianKind::Ising),
                t: model.t,
            };
            let v = parallel_corrector(&frame).unwrap();
            assert!((v.sandwich(&phi, &phi) - expected).norm() < 1e-14);
            // No leakage from |Φ⟩ into the degenerate triple.
            for k in 1..4 {
                assert!(v.sandwich(&basis.vector(k), &phi).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn trivial_limits_of_parallel_evolution() {
        let s = StateParams::new(Variant::Psi, 0.3, 1.0, 0.5).unwrap();
        let at_zero = ModelParams { t: 0.0, ..ModelParams::half_period() };
        let u = parallel_evolution(&s, &at_zero, HamiltonianKind::Free).unwrap();
        assert!(u.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-15);
        let frozen = Dynamics::from_hamiltonian(ComplexMatrix::zeros(4), 2.0).unwrap();
        let u = frozen.parallel(&state_eigenbasis(&s)).unwrap();
        assert!(u.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-15);
    }

    #[test]
    fn reference_frame_reduction() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let model = ModelParams { g: 0.3, ..ModelParams::half_period() };
        for _ in 0..20 {
            let s = random_state(&mut rng);
            for kind in [HamiltonianKind::Free, HamiltonianKind::Ising] {
                let direct = parallel_evolution(&s, &model, kind).unwrap();
                let via_rho = parallel_evolution_at(&build_state(&s), &model, kind).unwrap();
                assert!(direct.max_abs_diff(&via_rho) < 1e-12);
            }
        }
    }

    #[test]
    fn fully_degenerate_reference_cancels_evolution() {
        let rho = ComplexMatrix::identity(4).scale_real(0.25);
        let model = ModelParams { g: 0.7, t: 2.2, ..ModelParams::half_period() };
        let u = parallel_evolution_at(&rho, &model, HamiltonianKind::Ising).unwrap();
        assert!(u.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-13);
    }

    #[test]
    fn rejects_invalid_reference() {
        let model = ModelParams::half_period();
        let bad_trace = ComplexMatrix::identity(4);
        assert!(matches!(
            parallel_evolution_at(&bad_trace, &model, HamiltonianKind::Free),
            Err(Error::InvalidDensityMatrix(_))
        ));
        let negative = ComplexMatrix::from_real_diagonal(&[0.6, 0.6, 0.1, -0.3]);
        assert!(matches!(
            parallel_evolution_at(&negative, &model, HamiltonianKind::Free),
            Err(Error::InvalidDensityMatrix(_))
        ));
    }

    #[test]
    fn unitarity_and_transport_condition() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..25 {
            let s = random_state(&mut rng);
            let model = ModelParams {
                omega1: rng.gen_range(0.5..1.5),
                omega2: rng.gen_range(0.5..1.5),
                g: rng.gen_range(0.0..1.0),
                t: rng.gen_range(0.1..4.0),
            };
            for kind in [HamiltonianKind::Free, HamiltonianKind::Ising] {
                let u = parallel_evolution(&s, &model, kind).unwrap();
                assert!(u.unitarity_error() < 1e-12);
                let defect =
                    parallel_transport_defect(&state_eigenbasis(&s), &model.hamiltonian(kind), model.t)
                        .unwrap();
                assert!(defect < 1e-5, "defect {defect}");
            }
        }
    }

    #[test]
    fn rotated_frame_transport_condition() {
        let s = StateParams::new(Variant::Phi, 0.55, 0.4, 0.9).unwrap();
        let model = ModelParams { g: 0.2, ..ModelParams::half_period() };
        let dynamics = Dynamics::new(&model, HamiltonianKind::Ising).unwrap();
        let rho_t = dynamics.evolve_state(&build_state(&s));
        let u = parallel_evolution_at(&rho_t, &model, HamiltonianKind::Ising).unwrap();
        assert!(u.unitarity_error() < 1e-12);
        let basis = density_eigenbasis(&rho_t).unwrap();
        let defect = parallel_transport_defect(&basis, &dynamics.hamiltonian, model.t).unwrap();
        assert!(defect < 1e-5);
    }

    #[test]
    fn corrector_independent_of_degenerate_basis_choice() {
        let s = StateParams::new(Variant::Phi, 0.3, 1.1, 0.4).unwrap();
        let model = ModelParams { g: 0.5, ..ModelParams::half_period() };
        let dynamics = Dynamics::new(&model, HamiltonianKind::Ising).unwrap();
        let basis = state_eigenbasis(&s);
        let mut rotated = basis.clone();
        // Swap and rephase two members of the degenerate triple.
        let (a, b) = (basis.vector(1), basis.vector(3));
        rotated.eigenvectors.set_column(1, &b);
        rotated
            .eigenvectors
            .set_column(3, &a.iter().map(|z| z * c(0., 1.)).collect::<Vec<_>>());
        let u1 = dynamics.parallel(&basis).unwrap();
        let u2 = dynamics.parallel(&rotated).unwrap();
        assert!(u1.max_abs_diff(&u2) < 1e-13);
    }

    #[test]
    fn randomized_frame_keeps_eigenspaces() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let s = StateParams::new(Variant::Psi, 0.6, 0.7, 1.3).unwrap();
        let basis = state_eigenbasis(&s);
        let rotated = randomize_degenerate_frame(&basis, &mut rng);
        assert!(rotated.orthonormality_error() < 1e-14);
        assert!(rotated.reconstruct().max_abs_diff(&build_state(&s)) < 1e-14);
        assert!(rotated.eigenvectors.max_abs_diff(&basis.eigenvectors) > 0.1);
        assert_eq!(rotated.vector(0), basis.vector(0));
        let dynamics = Dynamics::new(&ModelParams { g: 0.3, ..ModelParams::half_period() }, HamiltonianKind::Ising).unwrap();
        let u1 = dynamics.parallel(&basis).unwrap();
        let u2 = dynamics.parallel(&rotated).unwrap();
        assert!(u1.max_abs_diff(&u2) < 1e-12);
    }
}
