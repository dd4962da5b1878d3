//! Antilinear operators on `ℂⁿ` stored as `x ↦ A·conj(x)`.
//!
//! With this representation every operator identity reduces to matrix
//! algebra. In particular `C U C` has matrix `A·conj(U)·conj(A)`, and the
//! transport `W C W*` has matrix `W·A·Wᵗ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    check_finite, conj, conj_vec, frobenius, require_square, transpose_defect, unitarity_defect,
    CMatrix, CVector, Tolerance, C64,
};

#[derive(Debug, Clone, PartialEq)]
pub struct AntilinearOperator {
    matrix: CMatrix,
}

impl AntilinearOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        require_square(&matrix)?;
        check_finite(&matrix)?;
        Ok(Self { matrix })
    }

    /// The standard conjugation `J` (entrywise complex conjugation).
    pub fn standard(n: usize) -> Self {
        Self {
            matrix: CMatrix::identity(n, n),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, x: &CVector) -> Result<CVector> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(&self.matrix * conj_vec(x))
    }
}

/// Either kind of operator, as produced by [`compose`].
#[derive(Debug, Clone, PartialEq)]
pub enum Operator {
    Linear(CMatrix),
    Antilinear(AntilinearOperator),
}

impl Operator {
    fn dim(&self) -> usize {
        match self {
            Operator::Linear(m) => m.nrows(),
            Operator::Antilinear(a) => a.dim(),
        }
    }

    pub fn apply(&self, x: &CVector) -> Result<CVector> {
        match self {
            Operator::Linear(m) => {
                if x.len() != m.ncols() {
                    return Err(Error::DimensionMismatch {
                        expected: m.ncols(),
                        got: x.len(),
                    });
                }
                Ok(m * x)
            }
            Operator::Antilinear(a) => a.apply(x),
        }
    }
}

/// Matrix of `left ∘ right`.
///
/// Two antilinear factors give the linear map `A·conj(B)`; a linear factor
/// `M` on the left gives `(M·A)J`, on the right `(A·conj(M))J`.
pub fn compose(left: &Operator, right: &Operator) -> Result<Operator> {
    if left.dim() != right.dim() {
        return Err(Error::DimensionMismatch {
            expected: left.dim(),
            got: right.dim(),
        });
    }
    let out = match (left, right) {
        (Operator::Linear(m), Operator::Linear(n)) => Operator::Linear(m * n),
        (Operator::Antilinear(a), Operator::Antilinear(b)) => {
            Operator::Linear(a.matrix() * conj(b.matrix()))
        }
        (Operator::Linear(m), Operator::Antilinear(a)) => {
            Operator::Antilinear(AntilinearOperator::new(m * a.matrix())?)
        }
        (Operator::Antilinear(a), Operator::Linear(m)) => {
            Operator::Antilinear(AntilinearOperator::new(a.matrix() * conj(m))?)
        }
    };
    Ok(out)
}

/// Defects of an antilinear operator against the conjugation axioms and,
/// when a unitary is supplied, against `CUC = U` and `CUC = U*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConjugationReport {
    /// `‖A*A − I‖_F`: zero iff `C` is isometric.
    pub isometry_defect: f64,
    /// `‖A·conj(A) − I‖_F`: zero iff `C² = I`.
    pub involution_defect: f64,
    /// `‖A − Aᵗ‖_F`.
    pub transpose_defect: f64,
    pub commutation_defect: Option<f64>,
    pub symmetry_defect: Option<f64>,
}

impl ConjugationReport {
    pub fn max_defect(&self) -> f64 {
        [
            self.isometry_defect,
            self.involution_defect,
            self.transpose_defect,
            self.commutation_defect.unwrap_or(0.0),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub fn conjugation_report(c: &AntilinearOperator) -> ConjugationReport {
    let a = c.matrix();
    let n = c.dim();
    ConjugationReport {
        isometry_defect: unitarity_defect(a).unwrap_or(f64::INFINITY),
        involution_defect: frobenius(&(a * conj(a) - CMatrix::identity(n, n))),
        transpose_defect: transpose_defect(a).unwrap_or(f64::INFINITY),
        commutation_defect: None,
        symmetry_defect: None,
    }
}

/// `C` is a conjugation iff `A` is unitary and `A = Aᵗ`.
pub fn is_conjugation(c: &AntilinearOperator, tol: Tolerance) -> (bool, ConjugationReport) {
    let report = conjugation_report(c);
    let bound = tol.threshold(c.dim() as f64);
    let ok = report.isometry_defect <= bound && report.transpose_defect <= bound;
    (ok, report)
}

/// `W C W*` for unitary `W`; its matrix is `W·A·Wᵗ`.
pub fn transport(
    c: &AntilinearOperator,
    w: &CMatrix,
    tol: Tolerance,
) -> Result<AntilinearOperator> {
    check_unitary_operand(w, c.dim(), tol)?;
    AntilinearOperator::new(w * c.matrix() * w.transpose())
}

fn check_unitary_operand(u: &CMatrix, n: usize, tol: Tolerance) -> Result<()> {
    let m = require_square(u)?;
    if m != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: m,
        });
    }
    let defect = unitarity_defect(u)?;
    if defect > tol.threshold(n as f64) {
        return Err(Error::NotUnitary {
            what: "operand".into(),
            defect,
        });
    }
    Ok(())
}

/// Matrix of `C U C`, i.e. `A·conj(U)·conj(A)`.
pub fn sandwich(c: &AntilinearOperator, u: &CMatrix) -> CMatrix {
    let a = c.matrix();
    a * conj(u) * conj(a)
}

/// `‖CUC − U‖_F`.
pub fn commutation_defect(c: &AntilinearOperator, u: &CMatrix, tol: Tolerance) -> Result<f64> {
    check_unitary_operand(u, c.dim(), tol)?;
    Ok(frobenius(&(sandwich(c, u) - u)))
}

/// `‖CUC − U*‖_F`.
pub fn symmetry_defect(c: &AntilinearOperator, u: &CMatrix, tol: Tolerance) -> Result<f64> {
    check_unitary_operand(u, c.dim(), tol)?;
    Ok(frobenius(&(sandwich(c, u) - u.adjoint())))
}

/// `⟨x, y⟩` linear in the second argument.
pub fn inner(x: &CVector, y: &CVector) -> C64 {
    x.dotc(y)
}
