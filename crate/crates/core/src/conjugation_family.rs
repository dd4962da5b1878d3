//! The family of conjugations commuting with a unitary matrix.
//!
//! In the eigenbasis `W` of [`canonical_form`], every commuting conjugation
//! is `W·(V J)·W*` where `V` is block structured: on each conjugate pair
//! `(ξ_j, conj ξ_j)` it is `[[0, V_j], [V_jᵗ, 0]]` with `V_j` unitary, and
//! on the `+1` and `−1` eigenspaces it is a symmetric unitary `Q₊`, `Q₋`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::antilinear::{
    conjugation_report, is_conjugation, sandwich, transport, AntilinearOperator,
};
use crate::error::{Error, Result};
use crate::linalg::{
    conj, ensure_symmetric_unitary, ensure_unitary, frobenius, haar_unitary_with, require_square,
    rng_from_seed, symmetric_unitary_with, unitarity_defect, CMatrix, Tolerance,
};
use crate::spectral::{canonical_form, BlockLayout, CanonicalForm, SpectralTolerance};

/// Membership threshold for an `n × n` problem: `1e−8·n`.
pub fn default_membership_threshold(n: usize) -> f64 {
    1e-8 * n as f64
}

/// Free parameters of a commuting conjugation relative to a fixed `W`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugationParams {
    pub v_blocks: Vec<CMatrix>,
    pub q_plus: CMatrix,
    pub q_minus: CMatrix,
}

impl ConjugationParams {
    /// The parameters of the canonical conjugation: all blocks identity.
    pub fn identity(layout: &BlockLayout) -> Self {
        Self {
            v_blocks: layout
                .pairs
                .iter()
                .map(|p| CMatrix::identity(p.multiplicity, p.multiplicity))
                .collect(),
            q_plus: CMatrix::identity(layout.ell, layout.ell),
            q_minus: CMatrix::identity(layout.kay, layout.kay),
        }
    }

    /// Haar-distributed `V_j` and random symmetric unitary `Q±`.
    pub fn random<R: Rng + ?Sized>(layout: &BlockLayout, rng: &mut R) -> Result<Self> {
        let haar = |n: usize, rng: &mut R| {
            if n == 0 {
                Ok(CMatrix::zeros(0, 0))
            } else {
                haar_unitary_with(n, rng)
            }
        };
        let sym = |n: usize, rng: &mut R| {
            if n == 0 {
                Ok(CMatrix::zeros(0, 0))
            } else {
                symmetric_unitary_with(n, rng)
            }
        };
        let v_blocks = layout
            .pairs
            .iter()
            .map(|p| haar(p.multiplicity, rng))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            v_blocks,
            q_plus: sym(layout.ell, rng)?,
            q_minus: sym(layout.kay, rng)?,
        })
    }

    /// Checks sizes against `layout` and the unitarity/symmetry invariants.
    pub fn validate(&self, layout: &BlockLayout, tol: Tolerance) -> Result<()> {
        if self.v_blocks.len() != layout.pairs.len() {
            return Err(Error::InvalidParams(format!(
                "expected {} pair blocks, got {}",
                layout.pairs.len(),
                self.v_blocks.len()
            )));
        }
        for (j, (v, p)) in self.v_blocks.iter().zip(&layout.pairs).enumerate() {
            let n = require_square(v)?;
            if n != p.multiplicity {
                return Err(Error::InvalidParams(format!(
                    "pair block {j} has size {n}, expected {}",
                    p.multiplicity
                )));
            }
            ensure_unitary(v, &format!("pair block {j}"), tol.threshold(n as f64))?;
        }
        for (q, size, name) in [
            (&self.q_plus, layout.ell, "Q_plus"),
            (&self.q_minus, layout.kay, "Q_minus"),
        ] {
            let n = require_square(q)?;
            if n != size {
                return Err(Error::InvalidParams(format!(
                    "{name} has size {n}, expected {size}"
                )));
            }
            ensure_symmetric_unitary(q, name, tol.threshold(n as f64))?;
        }
        Ok(())
    }

    /// Largest entrywise difference to `other` (infinity on size mismatch).
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let diff = |a: &CMatrix, b: &CMatrix| {
            if a.shape() != b.shape() {
                f64::INFINITY
            } else {
                (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
            }
        };
        if self.v_blocks.len() != other.v_blocks.len() {
            return f64::INFINITY;
        }
        self.v_blocks
            .iter()
            .zip(&other.v_blocks)
            .map(|(a, b)| diff(a, b))
            .chain([
                diff(&self.q_plus, &other.q_plus),
                diff(&self.q_minus, &other.q_minus),
            ])
            .fold(0.0, f64::max)
    }
}

/// The block matrix `V` assembled from parameters.
pub fn block_matrix(layout: &BlockLayout, p: &ConjugationParams) -> CMatrix {
    let n = layout.dim();
    let mut v = CMatrix::zeros(n, n);
    for (j, (pair, vj)) in layout.pairs.iter().zip(&p.v_blocks).enumerate() {
        let m = pair.multiplicity;
        let off = layout.pair_offset(j);
        v.view_mut((off, off + m), (m, m)).copy_from(vj);
        v.view_mut((off + m, off), (m, m))
            .copy_from(&vj.transpose());
    }
    let po = layout.plus_offset();
    v.view_mut((po, po), (layout.ell, layout.ell))
        .copy_from(&p.q_plus);
    let mo = layout.minus_offset();
    v.view_mut((mo, mo), (layout.kay, layout.kay))
        .copy_from(&p.q_minus);
    v
}

/// `W·(V J)·W*` for validated parameters.
pub fn from_params(
    layout: &BlockLayout,
    w: &CMatrix,
    p: &ConjugationParams,
    tol: Tolerance,
) -> Result<AntilinearOperator> {
    let n = require_square(w)?;
    if n != layout.dim() {
        return Err(Error::DimensionMismatch {
            expected: layout.dim(),
            got: n,
        });
    }
    p.validate(layout, tol)?;
    let v = AntilinearOperator::new(block_matrix(layout, p))?;
    transport(&v, w, tol)
}

/// The canonical commuting conjugation `W·C′·W*`, where `C′` swaps each
/// conjugate pair of eigenspaces and is plain conjugation on the `±1`
/// eigenspaces.
pub fn canonical_conjugation(
    u: &CMatrix,
    tol: impl Into<SpectralTolerance>,
) -> Result<AntilinearOperator> {
    let tol = tol.into();
    let cf = canonical_form(u, tol)?;
    from_params(
        &cf.layout,
        &cf.w,
        &ConjugationParams::identity(&cf.layout),
        tol.input,
    )
}

/// A random member of the family, deterministic per seed.
pub fn sample(
    u: &CMatrix,
    seed: u64,
    tol: impl Into<SpectralTolerance>,
) -> Result<AntilinearOperator> {
    let tol = tol.into();
    let cf = canonical_form(u, tol)?;
    let params = ConjugationParams::random(&cf.layout, &mut rng_from_seed(seed))?;
    from_params(&cf.layout, &cf.w, &params, tol.input)
}

/// Norm of one block of `V` that must vanish for members of the family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockResidual {
    pub row_block: String,
    pub col_block: String,
    pub norm: f64,
}

fn segments(layout: &BlockLayout) -> Vec<(String, usize, usize)> {
    let mut segs = Vec::new();
    for (j, p) in layout.pairs.iter().enumerate() {
        let off = layout.pair_offset(j);
        segs.push((format!("xi[{j}]"), off, p.multiplicity));
        segs.push((
            format!("conj(xi[{j}])"),
            off + p.multiplicity,
            p.multiplicity,
        ));
    }
    if layout.ell > 0 {
        segs.push(("+1".to_string(), layout.plus_offset(), layout.ell));
    }
    if layout.kay > 0 {
        segs.push(("-1".to_string(), layout.minus_offset(), layout.kay));
    }
    segs
}

/// Norms of every block of `v` that is structurally zero, in row-major
/// block order.
pub fn structure_residuals(layout: &BlockLayout, v: &CMatrix) -> Vec<BlockResidual> {
    let segs = segments(layout);
    let allowed = |a: usize, b: usize| {
        let pair_count = 2 * layout.pairs.len();
        if a < pair_count && b < pair_count {
            a / 2 == b / 2 && a != b
        } else {
            a == b
        }
    };
    let mut out = Vec::new();
    for (a, (ra, ro, rn)) in segs.iter().enumerate() {
        for (b, (ca, co, cn)) in segs.iter().enumerate() {
            if !allowed(a, b) {
                out.push(BlockResidual {
                    row_block: ra.clone(),
                    col_block: ca.clone(),
                    norm: frobenius(&v.view((*ro, *co), (*rn, *cn)).clone_owned()),
                });
            }
        }
    }
    out
}

/// Recovers parameters relative to a given `W` and layout.
///
/// Fails if `C` is not a conjugation, or if `V = W*·A·conj(W)` has energy
/// above `threshold` in a structurally zero block (then `C` does not commute
/// with `U`); the first offending block is named.
pub fn decompose_with(
    layout: &BlockLayout,
    w: &CMatrix,
    c: &AntilinearOperator,
    tol: Tolerance,
    threshold: f64,
) -> Result<ConjugationParams> {
    let n = require_square(w)?;
    if n != layout.dim() || c.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: layout.dim(),
            got: c.dim(),
        });
    }
    let (ok, report) = is_conjugation(c, tol);
    if !ok {
        return Err(Error::NotAConjugation(format!(
            "C (isometry defect {:.3e}, transpose defect {:.3e})",
            report.isometry_defect, report.transpose_defect
        )));
    }
    let wd = unitarity_defect(w)?;
    if wd > tol.threshold(n as f64) {
        return Err(Error::NotUnitary {
            what: "W".into(),
            defect: wd,
        });
    }
    let v = w.adjoint() * c.matrix() * conj(w);
    if let Some(bad) = structure_residuals(layout, &v)
        .into_iter()
        .find(|r| r.norm > threshold)
    {
        return Err(Error::NotAMember(format!(
            "block ({}, {}) of W*CW has norm {:.3e} > {:.1e}",
            bad.row_block, bad.col_block, bad.norm, threshold
        )));
    }
    let v_blocks = layout
        .pairs
        .iter()
        .enumerate()
        .map(|(j, p)| {
            let m = p.multiplicity;
            let off = layout.pair_offset(j);
            let upper = v.view((off, off + m), (m, m)).clone_owned();
            let lower = v.view((off + m, off), (m, m)).clone_owned();
            (upper + lower.transpose()).scale(0.5)
        })
        .collect();
    let sym = |q: CMatrix| (&q + q.transpose()).scale(0.5);
    let po = layout.plus_offset();
    let mo = layout.minus_offset();
    Ok(ConjugationParams {
        v_blocks,
        q_plus: sym(v.view((po, po), (layout.ell, layout.ell)).clone_owned()),
        q_minus: sym(v.view((mo, mo), (layout.kay, layout.kay)).clone_owned()),
    })
}

/// Recovers parameters relative to the `W` that [`canonical_form`]
/// computes for `U` (deterministic for a given input).
pub fn decompose(
    u: &CMatrix,
    c: &AntilinearOperator,
    tol: impl Into<SpectralTolerance>,
) -> Result<(CanonicalForm, ConjugationParams)> {
    let tol = tol.into();
    let cf = canonical_form(u, tol)?;
    let threshold = default_membership_threshold(cf.layout.dim());
    let params = decompose_with(&cf.layout, &cf.w, c, tol.input, threshold)?;
    Ok((cf, params))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub isometry_defect: f64,
    pub involution_defect: f64,
    pub transpose_defect: f64,
    pub commutation_defect: f64,
    pub threshold: f64,
    pub member: bool,
}

/// Aggregates the conjugation and commutation defects of `C` against `U`.
pub fn verify_membership(
    u: &CMatrix,
    c: &AntilinearOperator,
    threshold: f64,
) -> Result<MembershipReport> {
    let n = require_square(u)?;
    if n != c.dim() {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: c.dim(),
        });
    }
    let report = conjugation_report(c);
    // Unitarity of U is part of the verdict, not a precondition.
    let commutation = frobenius(&(sandwich(c, u) - u));
    let u_defect = unitarity_defect(u)?;
    let worst = report
        .isometry_defect
        .max(report.involution_defect)
        .max(report.transpose_defect)
        .max(commutation)
        .max(u_defect);
    Ok(MembershipReport {
        isometry_defect: report.isometry_defect,
        involution_defect: report.involution_defect,
        transpose_defect: report.transpose_defect,
        commutation_defect: commutation,
        threshold,
        member: worst <= threshold,
    })
}
