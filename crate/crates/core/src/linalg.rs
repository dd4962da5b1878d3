//! Dense complex matrix utilities, structured random sampling and the
//! four-unitary decomposition.
//!
//! Everything works on [`CMatrix`], a column-major `nalgebra` matrix of
//! `Complex64`. Defects are reported in the Frobenius norm; the operator norm
//! only appears as the scale of [`four_unitary_split`].

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Absolute and relative thresholds used for pass/fail verdicts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
        }
    }
}

impl Tolerance {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Result<Self> {
        if !(abs_tol >= 0.0 && rel_tol >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "tolerances must be nonnegative (abs {abs_tol}, rel {rel_tol})"
            )));
        }
        Ok(Self { abs_tol, rel_tol })
    }

    /// `abs_tol + rel_tol * scale`.
    pub fn threshold(&self, scale: f64) -> f64 {
        self.abs_tol + self.rel_tol * scale
    }
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn require_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

pub fn check_finite(m: &CMatrix) -> Result<()> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let z = m[(i, j)];
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(())
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest singular value.
pub fn op_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

pub fn conj(m: &CMatrix) -> CMatrix {
    m.map(|z| z.conj())
}

pub fn conj_vec(v: &CVector) -> CVector {
    v.map(|z| z.conj())
}

/// `‖M*M − I‖_F`.
pub fn unitarity_defect(m: &CMatrix) -> Result<f64> {
    let n = require_square(m)?;
    let gram = m.adjoint() * m;
    Ok(frobenius(&(gram - CMatrix::identity(n, n))))
}

/// `‖M − Mᵗ‖_F`.
pub fn transpose_defect(m: &CMatrix) -> Result<f64> {
    require_square(m)?;
    Ok(frobenius(&(m - m.transpose())))
}

/// `‖M − M*‖_F`.
pub fn hermitian_defect(m: &CMatrix) -> Result<f64> {
    require_square(m)?;
    Ok(frobenius(&(m - m.adjoint())))
}

pub fn ensure_unitary(m: &CMatrix, what: &str, bound: f64) -> Result<()> {
    let defect = unitarity_defect(m)?;
    if defect > bound {
        return Err(Error::NotUnitary {
            what: what.to_string(),
            defect,
        });
    }
    Ok(())
}

pub fn ensure_symmetric_unitary(m: &CMatrix, what: &str, bound: f64) -> Result<()> {
    ensure_unitary(m, what, bound)?;
    let defect = transpose_defect(m)?;
    if defect > bound {
        return Err(Error::NotSymmetric {
            what: what.to_string(),
            defect,
        });
    }
    Ok(())
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Matrix with i.i.d. standard complex Gaussian entries (`E|z|² = 1`).
pub fn complex_gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re * scale, im * scale)
    })
}

/// Random Hermitian matrix from the Gaussian unitary ensemble.
pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = complex_gaussian(n, n, rng);
    (&g + g.adjoint()).scale(0.5)
}

/// Haar-distributed unitary, drawn from a caller-held generator.
///
/// QR of a complex Gaussian matrix, with the phases of `diag(R)` moved into
/// `Q` so that the factorization is unique and the law is exactly Haar.
pub fn haar_unitary_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<CMatrix> {
    if n == 0 {
        return Err(Error::EmptyDimension);
    }
    let z = complex_gaussian(n, n, rng);
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    Ok(q)
}

/// Haar-distributed unitary, deterministic per seed.
pub fn haar_unitary(n: usize, seed: u64) -> Result<CMatrix> {
    haar_unitary_with(n, &mut rng_from_seed(seed))
}

/// Symmetric unitary `Q = V·Vᵗ` with `V` Haar.
///
/// Only the upper triangle of the product is computed and mirrored, so
/// `Q == Qᵗ` holds bit for bit.
pub fn symmetric_unitary_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<CMatrix> {
    let v = haar_unitary_with(n, rng)?;
    let mut q = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..n {
                acc += v[(i, k)] * v[(j, k)];
            }
            q[(i, j)] = acc;
            q[(j, i)] = acc;
        }
    }
    Ok(q)
}

pub fn symmetric_unitary(n: usize, seed: u64) -> Result<CMatrix> {
    symmetric_unitary_with(n, &mut rng_from_seed(seed))
}

/// Eigen-decomposition of a Hermitian matrix; eigenvalues ascending.
pub(crate) fn hermitian_eigen(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = h.nrows();
    let herm = (h + h.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(herm);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// Applies a real function to the spectrum of a Hermitian matrix.
pub(crate) fn hermitian_function(h: &CMatrix, f: impl Fn(f64) -> C64) -> CMatrix {
    let (values, vectors) = hermitian_eigen(h);
    let n = values.len();
    let mut scaled = vectors.clone();
    for (j, &lam) in values.iter().enumerate() {
        let fj = f(lam);
        for i in 0..n {
            scaled[(i, j)] *= fj;
        }
    }
    scaled * vectors.adjoint()
}

/// Positive square root of a Hermitian positive semidefinite matrix.
///
/// Eigenvalues in `[-abs_tol, 0)` are clamped to zero; anything more negative
/// is an error.
pub fn hermitian_sqrt_psd(h: &CMatrix, tol: Tolerance) -> Result<CMatrix> {
    let n = require_square(h)?;
    check_finite(h)?;
    let defect = hermitian_defect(h)?;
    if defect > tol.threshold(frobenius(h)) {
        return Err(Error::NotHermitian { defect });
    }
    if n == 0 {
        return Ok(h.clone());
    }
    let (values, _) = hermitian_eigen(h);
    if values[0] < -tol.abs_tol {
        return Err(Error::NegativeEigenvalue {
            eigenvalue: values[0],
        });
    }
    let s = hermitian_function(h, |lam| C64::new(lam.max(0.0).sqrt(), 0.0));
    Ok((&s + s.adjoint()).scale(0.5))
}

/// `A = scale · (U1 + U2 + U3 + U4)` with unitary factors.
#[derive(Debug, Clone)]
pub struct FourUnitarySplit {
    pub scale: f64,
    pub factors: [CMatrix; 4],
}

impl FourUnitarySplit {
    pub fn reconstruct(&self) -> CMatrix {
        let sum = &self.factors[0] + &self.factors[1] + &self.factors[2] + &self.factors[3];
        sum.scale(self.scale)
    }
}

/// Writes `A` as `‖A‖/2` times a sum of four unitaries.
///
/// With `H = (A + A*)/(2‖A‖)` and `K = (A − A*)/(2i‖A‖)`, the factors are
/// `H ± i·sqrt(I − H²)` and `iK ± sqrt(I − K²)`. The zero matrix is returned
/// with scale 0 and the limit of the same formula at `H = K = 0`, i.e.
/// `(iI, −iI, I, −I)`, which sums to zero.
pub fn four_unitary_split(a: &CMatrix) -> Result<FourUnitarySplit> {
    let n = require_square(a)?;
    check_finite(a)?;
    let id = CMatrix::identity(n, n);
    let i = C64::new(0.0, 1.0);
    let norm = op_norm(a);
    if norm == 0.0 {
        return Ok(FourUnitarySplit {
            scale: 0.0,
            factors: [&id * i, &id * (-i), id.clone(), -id],
        });
    }
    let a_star = a.adjoint();
    let h = (a + &a_star).unscale(2.0 * norm);
    let k = (a - &a_star).unscale(2.0 * norm) * (-i);
    // Both have spectrum in [-1, 1]; the square roots are taken spectrally so
    // that roundoff just outside the interval clamps to zero.
    let sqrt_one_minus_sq = |lam: f64| C64::new((1.0 - lam * lam).max(0.0).sqrt(), 0.0);
    let root_h = hermitian_function(&h, sqrt_one_minus_sq);
    let root_k = hermitian_function(&k, sqrt_one_minus_sq);
    let u1 = &h + &root_h * i;
    let u2 = &h - &root_h * i;
    let u3 = &k * i + &root_k;
    let u4 = &k * i - &root_k;
    Ok(FourUnitarySplit {
        scale: norm / 2.0,
        factors: [u1, u2, u3, u4],
    })
}

/// Column-stacked permutation matrix with `P e_j = e_{perm[j]}`.
pub fn permutation_matrix(perm: &[usize]) -> CMatrix {
    let n = perm.len();
    let mut p = CMatrix::zeros(n, n);
    for (j, &i) in perm.iter().enumerate() {
        p[(i, j)] = C64::new(1.0, 0.0);
    }
    p
}

pub fn diagonal(values: &[C64]) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_column_slice(values))
}

/// Orthonormalizes the columns in order (modified Gram–Schmidt, two passes).
pub fn orthonormalize_columns(m: &CMatrix) -> CMatrix {
    let mut q = m.clone();
    for j in 0..q.ncols() {
        for _pass in 0..2 {
            for k in 0..j {
                let proj = q.column(k).dotc(&q.column(j));
                let col_k = q.column(k).clone_owned();
                let mut col_j = q.column_mut(j);
                col_j -= col_k * proj;
            }
        }
        let norm = q.column(j).norm();
        if norm > 0.0 {
            q.column_mut(j).unscale_mut(norm);
        }
    }
    q
}
