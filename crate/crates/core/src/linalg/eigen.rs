use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ComplexMatrix, ComplexScalar, LinalgError};

/// Maximum tolerated `|M[i,j] - conj(M[j,i])|` for inputs declared Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Relative gap below which two eigenvalues are treated as degenerate.
pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-9;
/// Eigenvalues down to `-PSD_CLAMP` are rounded up to zero by [`psd_sqrt`].
pub const PSD_CLAMP: f64 = 1e-12;
pub const MAX_SWEEPS: usize = 100;

const OFF_DIAGONAL_TOL: f64 = 1e-14;

/// Eigenvalues (descending), orthonormal eigenvector columns, and the
/// partition of eigenvalue indices into degenerate groups.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Column `k` is the eigenvector for `eigenvalues[k]`.
    pub eigenvectors: ComplexMatrix,
    pub groups: Vec<Vec<usize>>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn vector(&self, k: usize) -> Vec<ComplexScalar> {
        self.eigenvectors.column(k)
    }

    /// `Σ_k λ_k |k⟩⟨k|`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.spectral_map(|l| Complex64::new(l, 0.0))
    }

    /// `Σ_k f(λ_k) |k⟩⟨k|`.
    pub fn spectral_map(&self, f: impl Fn(f64) -> ComplexScalar) -> ComplexMatrix {
        let n = self.dim();
        let v = &self.eigenvectors;
        let weights: Vec<ComplexScalar> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        ComplexMatrix::from_fn(n, |i, j| {
            (0..n).map(|k| v[(i, k)] * weights[k] * v[(j, k)].conj()).sum()
        })
    }

    /// `max |V†V - I|` over the eigenvector columns.
    pub fn orthonormality_error(&self) -> f64 {
        self.eigenvectors.unitarity_error()
    }

    /// Projector onto the span of the eigenvectors in `group`.
    pub fn group_projector(&self, group: &[usize]) -> ComplexMatrix {
        let n = self.dim();
        let v = &self.eigenvectors;
        ComplexMatrix::from_fn(n, |i, j| group.iter().map(|&k| v[(i, k)] * v[(j, k)].conj()).sum())
    }
}

/// Partitions descending eigenvalues into runs whose neighbours differ by less
/// than `rel_tol * max(1, |λ_max|)`.
pub fn group_by_degeneracy(eigenvalues: &[f64], rel_tol: f64) -> Vec<Vec<usize>> {
    let scale = eigenvalues.iter().fold(1.0_f64, |m, l| m.max(l.abs()));
    let tol = rel_tol * scale;
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, &l) in eigenvalues.iter().enumerate() {
        match groups.last_mut() {
            Some(g) if (eigenvalues[g[g.len() - 1]] - l).abs() < tol => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    groups
}

fn check_hermitian(m: &ComplexMatrix) -> Result<(), LinalgError> {
    if !m.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let err = m.hermiticity_error();
    if err > HERMITIAN_TOL {
        return Err(LinalgError::NotHermitian(err));
    }
    Ok(())
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.dim();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Cyclic complex Jacobi. Returns unsorted eigenvalues and the accumulated rotation.
fn jacobi(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix), LinalgError> {
    let n = m.dim();
    // Exact Hermitian copy; the input may carry asymmetry up to HERMITIAN_TOL.
    let mut a = ComplexMatrix::from_fn(n, |i, j| {
        if i == j {
            Complex64::new(m[(i, i)].re, 0.0)
        } else {
            (m[(i, j)] + m[(j, i)].conj()) * 0.5
        }
    });
    let mut v = ComplexMatrix::identity(n);
    let threshold = OFF_DIAGONAL_TOL * a.frobenius_norm().max(1.0);

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) < threshold {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged && off_diagonal_norm(&a) >= threshold {
        return Err(LinalgError::NoConvergence(MAX_SWEEPS));
    }
    Ok(((0..n).map(|i| a[(i, i)].re).collect(), v))
}

/// Annihilates `a[p,q]` with the unitary `G = diag(1, e^{-iφ}) · R(c, s)`,
/// updating `a ← G† a G` and `v ← v G`.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let phase_conj = (apq / mag).conj();
    let theta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * mag);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
        sign / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    let g_pp = Complex64::new(c, 0.0);
    let g_pq = Complex64::new(s, 0.0);
    let g_qp = phase_conj * (-s);
    let g_qq = phase_conj * c;

    let n = a.dim();
    for k in 0..n {
        let (akp, akq) = (a[(k, p)], a[(k, q)]);
        a[(k, p)] = akp * g_pp + akq * g_qp;
        a[(k, q)] = akp * g_pq + akq * g_qq;
    }
    for k in 0..n {
        let (apk, aqk) = (a[(p, k)], a[(q, k)]);
        a[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
        a[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)].im = 0.0;
    a[(q, q)].im = 0.0;

    for k in 0..n {
        let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
        v[(k, p)] = vkp * g_pp + vkq * g_qp;
        v[(k, q)] = vkp * g_pq + vkq * g_qq;
    }
}

/// Hermitian eigendecomposition by cyclic Jacobi rotations.
///
/// Eigenvalues come back in descending order; ties keep the order in which
/// the rotations left them (lowest diagonal index first). `degeneracy_tol` is
/// relative to `max(1, |λ_max|)`.
pub fn eig_hermitian(
    m: &ComplexMatrix,
    degeneracy_tol: f64,
) -> Result<SpectralDecomposition, LinalgError> {
    check_hermitian(m)?;
    let (values, rotation) = jacobi(m)?;

    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));

    let eigenvalues: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let mut eigenvectors = ComplexMatrix::zeros(m.dim());
    for (col, &src) in order.iter().enumerate() {
        eigenvectors.set_column(col, &rotation.column(src));
    }
    let groups = group_by_degeneracy(&eigenvalues, degeneracy_tol);
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
        groups,
    })
}

pub fn eig_hermitian_default(m: &ComplexMatrix) -> Result<SpectralDecomposition, LinalgError> {
    eig_hermitian(m, DEFAULT_DEGENERACY_TOL)
}

/// `exp(i·s·h)` for Hermitian `h`, through its eigendecomposition.
pub fn expm_i_hermitian(h: &ComplexMatrix, s: f64) -> Result<ComplexMatrix, LinalgError> {
    if s == 0.0 {
        check_hermitian(h)?;
        return Ok(ComplexMatrix::identity(h.dim()));
    }
    let spec = eig_hermitian_default(h)?;
    Ok(spec.spectral_map(|l| Complex64::from_polar(1.0, s * l)))
}

/// Eigenvalues within this relative distance of zero are indistinguishable
/// from round-off and are taken as exact zeros by [`psd_sqrt`].
const ROUNDOFF_FLOOR: f64 = 1e-14;

/// Principal square root of a positive semidefinite Hermitian matrix.
///
/// Eigenvalues in `[-PSD_CLAMP, 0)` are clamped to zero, and so are positive
/// ones below the round-off floor: otherwise a rank-deficient input would
/// pick up `sqrt(1e-18) ~ 1e-9` spurious entries.
pub fn psd_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    let spec = eig_hermitian_default(m)?;
    let min = spec.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -PSD_CLAMP {
        return Err(LinalgError::NotPsd(min));
    }
    let floor = ROUNDOFF_FLOOR * spec.eigenvalues[0].abs().max(1.0);
    Ok(spec.spectral_map(|l| {
        let l = if l < floor { 0.0 } else { l };
        Complex64::new(l.sqrt(), 0.0)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_hermitian(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
        let a = ComplexMatrix::from_fn(n, |_, _| {
            c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        (&a + &a.adjoint()).scale_real(0.5)
    }

    fn bell_projector() -> ComplexMatrix {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        ComplexMatrix::outer(&[c(h, 0.), c(0., 0.), c(0., 0.), c(h, 0.)])
    }

    #[test]
    fn diagonal_input_sorts_descending_with_permutation_vectors() {
        let spec = eig_hermitian_default(&ComplexMatrix::from_real_diagonal(&[1., 2., 3., 4.]))
            .unwrap();
        assert_eq!(spec.eigenvalues, vec![4., 3., 2., 1.]);
        for (col, src) in [(0, 3), (1, 2), (2, 1), (3, 0)] {
            let v = spec.vector(col);
            for (i, z) in v.iter().enumerate() {
                let expected = if i == src { 1.0 } else { 0.0 };
                assert_eq!(*z, c(expected, 0.));
            }
        }
        assert_eq!(spec.groups, vec![vec![0], vec![1], vec![2], vec![3]]);
    }

    #[test]
    fn triplet_degenerate_werner_like_state() {
        // (1-r)/4 I + r|v><v| with r = 0.6 and a non-trivial |v>.
        let (th, b) = (0.3_f64, 0.1_f64);
        let v = [
            Complex64::from_polar(th.cos(), b),
            c(0., 0.),
            c(0., 0.),
            Complex64::from_polar(th.sin(), -b),
        ];
        let rho = &ComplexMatrix::identity(4).scale_real(0.1) + &ComplexMatrix::outer(&v).scale_real(0.6);
        let spec = eig_hermitian_default(&rho).unwrap();
        let expected = [0.7, 0.1, 0.1, 0.1];
        for (l, e) in spec.eigenvalues.iter().zip(expected) {
            assert!((l - e).abs() < 1e-14, "{l} vs {e}");
        }
        assert_eq!(spec.groups, vec![vec![0], vec![1, 2, 3]]);
        assert!(spec.reconstruct().max_abs_diff(&rho) < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = ComplexMatrix::identity(2);
        m[(0, 1)] = c(1e-6, 0.);
        assert!(matches!(eig_hermitian_default(&m), Err(LinalgError::NotHermitian(_))));
        m[(0, 1)] = c(f64::NAN, 0.);
        assert!(matches!(eig_hermitian_default(&m), Err(LinalgError::NonFinite)));
    }

    #[test]
    fn reconstruction_on_many_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..1000 {
            let h = random_hermitian(&mut rng, 4);
            let spec = eig_hermitian_default(&h).unwrap();
            assert!(spec.reconstruct().max_abs_diff(&h) < 1e-12);
            assert!(spec.orthonormality_error() < 1e-12);
            assert!(spec.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn eigensolver_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = random_hermitian(&mut rng, 4);
        assert_eq!(eig_hermitian_default(&h).unwrap(), eig_hermitian_default(&h).unwrap());
    }

    #[test]
    fn larger_dimensions_work() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for n in 1..=8 {
            let h = random_hermitian(&mut rng, n);
            let spec = eig_hermitian_default(&h).unwrap();
            assert!(spec.reconstruct().max_abs_diff(&h) < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn grouping_uses_relative_tolerance() {
        assert_eq!(
            group_by_degeneracy(&[2.0, 2.0 + 1e-12, 1.0, 0.0, -1e-10], 1e-9),
            vec![vec![0, 1], vec![2], vec![3, 4]]
        );
    }

    #[test]
    fn exp_at_zero_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = random_hermitian(&mut rng, 4);
        assert_eq!(expm_i_hermitian(&h, 0.0).unwrap(), ComplexMatrix::identity(4));
    }

    #[test]
    fn half_turn_about_y() {
        // exp(-iπσ_y/2) = cos(π/2) I - i sin(π/2) σ_y = -iσ_y
        let sy = ComplexMatrix::from_rows(&[vec![c(0., 0.), c(0., -1.)], vec![c(0., 1.), c(0., 0.)]])
            .unwrap();
        let u = expm_i_hermitian(&sy.scale_real(0.5), -PI).unwrap();
        let expected =
            ComplexMatrix::from_rows(&[vec![c(0., 0.), c(-1., 0.)], vec![c(1., 0.), c(0., 0.)]])
                .unwrap();
        assert!(u.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn psd_sqrt_of_scalar_and_projector() {
        let q = ComplexMatrix::identity(4).scale_real(0.25);
        assert!(psd_sqrt(&q).unwrap().max_abs_diff(&ComplexMatrix::identity(4).scale_real(0.5)) < 1e-15);
        let p = bell_projector();
        assert!(psd_sqrt(&p).unwrap().max_abs_diff(&p) < 1e-12);
    }

    #[test]
    fn psd_sqrt_round_trip_on_mixed_state() {
        let rho = &ComplexMatrix::identity(4).scale_real(0.125) + &bell_projector().scale_real(0.5);
        let root = psd_sqrt(&rho).unwrap();
        assert!(root.hermiticity_error() < 1e-14);
        assert!((&root * &root).max_abs_diff(&rho) < 1e-10);
    }

    #[test]
    fn psd_sqrt_rejects_negative_spectrum() {
        let m = ComplexMatrix::from_real_diagonal(&[1.0, -1e-6]);
        assert!(matches!(psd_sqrt(&m), Err(LinalgError::NotPsd(_))));
        // Round-off sized negatives are clamped.
        let m = ComplexMatrix::from_real_diagonal(&[1.0, -1e-13]);
        let root = psd_sqrt(&m).unwrap();
        assert_eq!(root[(1, 1)], c(0., 0.));
    }

    #[test]
    fn partial_transpose_of_bell_projector_has_negative_eigenvalue() {
        let pt = super::super::partial_transpose_2(&bell_projector()).unwrap();
        let spec = eig_hermitian_default(&pt).unwrap();
        let expected = [0.5, 0.5, 0.5, -0.5];
        for (l, e) in spec.eigenvalues.iter().zip(expected) {
            assert!((l - e).abs() < 1e-14);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn exponential_is_unitary_and_invertible(seed in any::<u64>(), s in -10.0..10.0_f64) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let h = random_hermitian(&mut rng, 4);
            let u = expm_i_hermitian(&h, s).unwrap();
            prop_assert!(u.unitarity_error() < 1e-12);
            let back = expm_i_hermitian(&h, -s).unwrap();
            prop_assert!((&u * &back).max_abs_diff(&ComplexMatrix::identity(4)) < 1e-12);
        }

        #[test]
        fn partial_transpose_preserves_trace(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = ComplexMatrix::from_fn(4, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let pt = super::super::partial_transpose_2(&m).unwrap();
            prop_assert_eq!(pt.trace(), m.trace());
        }

        #[test]
        fn sqrt_spectrum_is_root_of_input_spectrum(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = ComplexMatrix::from_fn(4, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let m = &a * &a.adjoint();
            let root = psd_sqrt(&m).unwrap();
            let in_spec = eig_hermitian_default(&m).unwrap().eigenvalues;
            let out_spec = eig_hermitian_default(&root).unwrap().eigenvalues;
            for (l, s) in in_spec.iter().zip(&out_spec) {
                prop_assert!((l.max(0.0).sqrt() - s).abs() < 1e-10);
            }
        }
    }
}
