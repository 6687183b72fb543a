use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::LinalgError;

/// Complex scalar used for every amplitude and matrix entry.
pub type ComplexScalar = Complex64;

/// Dense square complex matrix stored row-major.
///
/// Sized for the handful of 2×2 and 4×4 operators this crate works with;
/// nothing here is blocked or vectorised.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<ComplexScalar>>", into = "Vec<Vec<ComplexScalar>>")]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<ComplexScalar>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "matrix dimension must be positive");
        Self {
            dim,
            data: vec![ComplexScalar::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ComplexScalar::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> ComplexScalar) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Builds a matrix from rows; every row must have as many entries as there are rows.
    pub fn from_rows(rows: &[Vec<ComplexScalar>]) -> Result<Self, LinalgError> {
        let dim = rows.len();
        if dim == 0 {
            return Err(LinalgError::BadDimension {
                expected: 1,
                actual: 0,
            });
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(LinalgError::BadDimension {
                expected: dim,
                actual: bad.len(),
            });
        }
        Ok(Self {
            dim,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = ComplexScalar::new(d, 0.0);
        }
        m
    }

    /// Projector `|v⟩⟨v|` (no normalisation is applied).
    pub fn outer(v: &[ComplexScalar]) -> Self {
        Self::from_fn(v.len(), |i, j| v[i] * v[j].conj())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> Vec<Vec<ComplexScalar>> {
        self.data.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<ComplexScalar> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, v: &[ComplexScalar]) {
        for (i, &x) in v.iter().enumerate() {
            self[(i, j)] = x;
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: ComplexScalar) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(ComplexScalar::new(s, 0.0))
    }

    pub fn trace(&self) -> ComplexScalar {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[ComplexScalar]) -> Vec<ComplexScalar> {
        assert_eq!(v.len(), self.dim, "vector length mismatch");
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// `⟨u|M|v⟩`.
    pub fn sandwich(&self, u: &[ComplexScalar], v: &[ComplexScalar]) -> ComplexScalar {
        let mv = self.apply(v);
        u.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `max |M[i,j] - conj(M[j,i])|`.
    pub fn hermiticity_error(&self) -> f64 {
        let mut err: f64 = 0.0;
        for i in 0..self.dim {
            for j in i..self.dim {
                err = err.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        err
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `max |M†M - I|`.
    pub fn unitarity_error(&self) -> f64 {
        (&(&self.adjoint() * self) - &Self::identity(self.dim)).max_abs()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub(crate) fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in product");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = ComplexScalar;

    fn index(&self, (i, j): (usize, usize)) -> &ComplexScalar {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut ComplexScalar {
        &mut self.data[i * self.dim + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in sum");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in difference");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})[", self.dim, self.dim)?;
        for row in self.data.chunks(self.dim) {
            write!(f, "  ")?;
            for z in row {
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl TryFrom<Vec<Vec<ComplexScalar>>> for ComplexMatrix {
    type Error = LinalgError;

    fn try_from(rows: Vec<Vec<ComplexScalar>>) -> Result<Self, LinalgError> {
        Self::from_rows(&rows)
    }
}

impl From<ComplexMatrix> for Vec<Vec<ComplexScalar>> {
    fn from(m: ComplexMatrix) -> Self {
        m.rows()
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let nb = b.dim();
    ComplexMatrix::from_fn(a.dim() * nb, |r, c| {
        a[(r / nb, c / nb)] * b[(r % nb, c % nb)]
    })
}

/// Kronecker product of two vectors.
pub fn kron_vec(a: &[ComplexScalar], b: &[ComplexScalar]) -> Vec<ComplexScalar> {
    a.iter()
        .flat_map(|&x| b.iter().map(move |&y| x * y))
        .collect()
}

/// Partial transpose on the second qubit of a 2⊗2 operator:
/// entry `((a,b),(c,d))` moves to `((a,d),(c,b))`.
pub fn partial_transpose_2(m: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    if m.dim() != 4 {
        return Err(LinalgError::BadDimension {
            expected: 4,
            actual: m.dim(),
        });
    }
    Ok(ComplexMatrix::from_fn(4, |row, col| {
        let (a, d) = (row / 2, row % 2);
        let (c, b) = (col / 2, col % 2);
        m[(2 * a + b, 2 * c + d)]
    }))
}

pub fn inner(u: &[ComplexScalar], v: &[ComplexScalar]) -> ComplexScalar {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm(v: &[ComplexScalar]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Extends orthonormal `vectors` to a full orthonormal basis by Gram-Schmidt
/// over the computational basis vectors, taken in index order.
pub fn orthonormal_completion(vectors: &[Vec<ComplexScalar>]) -> Vec<Vec<ComplexScalar>> {
    let n = vectors.first().map_or(0, |v| v.len());
    let mut basis: Vec<Vec<ComplexScalar>> = vectors.to_vec();
    for k in 0..n {
        if basis.len() == n {
            break;
        }
        let mut candidate = vec![ComplexScalar::new(0.0, 0.0); n];
        candidate[k] = ComplexScalar::new(1.0, 0.0);
        // Two passes keep the result orthogonal to machine precision.
        for _ in 0..2 {
            for b in &basis {
                let overlap = inner(b, &candidate);
                for (c, x) in candidate.iter_mut().zip(b) {
                    *c -= overlap * x;
                }
            }
        }
        let len = norm(&candidate);
        if len > 1e-6 {
            basis.push(candidate.iter().map(|z| z / len).collect());
        }
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> ComplexScalar {
        ComplexScalar::new(re, im)
    }

    fn sigma_y_standard() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[vec![c(0., 0.), c(0., -1.)], vec![c(0., 1.), c(0., 0.)]])
            .unwrap()
    }

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    #[test]
    fn kron_of_identities_is_identity() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), ComplexMatrix::identity(4));
    }

    #[test]
    fn kron_sigma_y_with_identity() {
        let m = kron(&sigma_y_standard(), &ComplexMatrix::identity(2));
        let z = c(0., 0.);
        let expected = ComplexMatrix::from_rows(&[
            vec![z, z, c(0., -1.), z],
            vec![z, z, z, c(0., -1.)],
            vec![c(0., 1.), z, z, z],
            vec![z, c(0., 1.), z, z],
        ])
        .unwrap();
        assert_eq!(m, expected);
    }

    #[test]
    fn kron_matches_index_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (na, nb) in [(2, 2), (2, 3), (3, 2)] {
            let a = random_matrix(&mut rng, na);
            let b = random_matrix(&mut rng, nb);
            let k = kron(&a, &b);
            for i in 0..na {
                for j in 0..na {
                    for p in 0..nb {
                        for q in 0..nb {
                            assert_eq!(k[(i * nb + p, j * nb + q)], a[(i, j)] * b[(p, q)]);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn partial_transpose_identity_and_involution() {
        let id = ComplexMatrix::identity(4);
        assert_eq!(partial_transpose_2(&id).unwrap(), id);

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = random_matrix(&mut rng, 4);
        let twice = partial_transpose_2(&partial_transpose_2(&m).unwrap()).unwrap();
        assert_eq!(twice, m);
        assert_eq!(partial_transpose_2(&m).unwrap().trace(), m.trace());
    }

    #[test]
    fn partial_transpose_rejects_non_two_qubit() {
        let err = partial_transpose_2(&ComplexMatrix::identity(2)).unwrap_err();
        assert!(matches!(err, LinalgError::BadDimension { expected: 4, actual: 2 }));
    }

    #[test]
    fn completion_is_orthonormal() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let seed = vec![vec![c(h, 0.), c(0., 0.), c(0., 0.), c(0., h)]];
        let full = orthonormal_completion(&seed);
        assert_eq!(full.len(), 4);
        for (i, a) in full.iter().enumerate() {
            for (j, b) in full.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((inner(a, b) - c(expected, 0.)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn from_rows_rejects_ragged_input() {
        assert!(ComplexMatrix::from_rows(&[vec![c(1., 0.)], vec![]]).is_err());
        assert!(ComplexMatrix::from_rows(&[]).is_err());
    }
}
