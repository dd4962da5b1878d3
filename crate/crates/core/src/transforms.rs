//! Coordinate models of the Fourier–Plancherel and Hilbert transforms.
//!
//! In Hermite coordinates the Fourier transform is `F e_n = (−i)^n e_n`, so
//! its eigenvalue classes are the residues `n mod 4` with eigenvalues
//! `1, −i, −1, i`. The Hilbert transform has the two eigenvalues `±i`.
//! Commuting conjugations pair the `−i` and `i` classes through a unitary
//! `U_i` and its transpose, and act on each real-eigenvalue class by a
//! symmetric unitary.
//!
//! The sampled Hermite cross-check relates the coordinate model back to
//! functions on the real line on a uniform symmetric grid.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::antilinear::AntilinearOperator;
use crate::conjugation_family::{decompose_with, default_membership_threshold};
use crate::error::{Error, Result};
use crate::linalg::{
    ensure_symmetric_unitary, ensure_unitary, haar_unitary_with, permutation_matrix,
    require_square, symmetric_unitary_with, CMatrix, Tolerance, C64,
};
use crate::spectral::{BlockLayout, ConjugatePair};

/// `(−i)^n`, exact.
pub fn fourier_eigenvalue(n: usize) -> C64 {
    match n % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, -1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, 1.0),
    }
}

/// The Fourier transform truncated to `e_0, …, e_{N−1}`, `4 | N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FourBlockModel {
    size: usize,
}

/// Parameters of a conjugation commuting with the Fourier model: symmetric
/// unitaries on the `1` and `−1` classes and the unitary `U_i` mapping the
/// `−i` class to the `i` class.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierParams {
    pub q1: CMatrix,
    pub q2: CMatrix,
    pub ui: CMatrix,
}

impl FourierParams {
    pub fn identity(class_size: usize) -> Self {
        let id = CMatrix::identity(class_size, class_size);
        Self {
            q1: id.clone(),
            q2: id.clone(),
            ui: id,
        }
    }

    /// Random symmetric unitary `Q₁, Q₂` and Haar `U_i`.
    pub fn random<R: Rng + ?Sized>(class_size: usize, rng: &mut R) -> Result<Self> {
        Ok(Self {
            q1: symmetric_unitary_with(class_size, rng)?,
            q2: symmetric_unitary_with(class_size, rng)?,
            ui: haar_unitary_with(class_size, rng)?,
        })
    }

    /// Like [`random`](Self::random) but with real symmetric orthogonal
    /// `Q₁, Q₂` (the real-entry subfamily).
    pub fn random_real<R: Rng + ?Sized>(class_size: usize, rng: &mut R) -> Result<Self> {
        Ok(Self {
            q1: real_symmetric_orthogonal(class_size, rng)?,
            q2: real_symmetric_orthogonal(class_size, rng)?,
            ui: haar_unitary_with(class_size, rng)?,
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        [
            (&self.q1, &other.q1),
            (&self.q2, &other.q2),
            (&self.ui, &other.ui),
        ]
        .into_iter()
        .map(|(a, b)| {
            if a.shape() != b.shape() {
                f64::INFINITY
            } else {
                (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
            }
        })
        .fold(0.0, f64::max)
    }
}

/// `O·diag(±1)·Oᵗ` for a random real orthogonal `O`.
pub fn real_symmetric_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<CMatrix> {
    if n == 0 {
        return Err(Error::EmptyDimension);
    }
    let g = DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    let o = g.qr().q();
    let signs = DMatrix::<f64>::from_diagonal(&nalgebra::DVector::from_fn(n, |_, _| {
        if rng.random_bool(0.5) {
            1.0
        } else {
            -1.0
        }
    }));
    let q = &o * signs * o.transpose();
    // Exact symmetry.
    let q = (&q + q.transpose()) * 0.5;
    Ok(q.map(|x| C64::new(x, 0.0)))
}

impl FourBlockModel {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 || !size.is_multiple_of(4) {
            return Err(Error::InvalidParams(format!(
                "Fourier truncation {size} is not a positive multiple of 4"
            )));
        }
        Ok(Self { size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn class_size(&self) -> usize {
        self.size / 4
    }

    /// Hermite index of the `a`-th member of residue class `r`.
    pub fn index(&self, r: usize, a: usize) -> usize {
        4 * a + r
    }

    pub fn diagonal(&self) -> CMatrix {
        crate::linalg::diagonal(&(0..self.size).map(fourier_eigenvalue).collect::<Vec<_>>())
    }

    /// Layout `{(i, N/4)}` with `ℓ = k = N/4` and the permutation `W`
    /// ordering the classes as `i`, `−i`, `1`, `−1`.
    pub fn canonical_form(&self) -> (BlockLayout, CMatrix) {
        let m = self.class_size();
        let perm: Vec<usize> = [3, 1, 0, 2]
            .iter()
            .flat_map(|&r| (0..m).map(move |a| 4 * a + r))
            .collect();
        let layout = BlockLayout {
            pairs: vec![ConjugatePair {
                xi: C64::new(0.0, 1.0),
                multiplicity: m,
            }],
            ell: m,
            kay: m,
        };
        (layout, permutation_matrix(&perm))
    }

    /// Assembles `[[Q₁,0,0,0],[0,0,0,U_iᵗ],[0,0,Q₂,0],[0,U_i,0,0]]·J` in
    /// class order.
    pub fn conjugation(&self, p: &FourierParams, tol: Tolerance) -> Result<AntilinearOperator> {
        let m = self.class_size();
        for (mat, name) in [(&p.q1, "Q1"), (&p.q2, "Q2"), (&p.ui, "Ui")] {
            let k = require_square(mat)?;
            if k != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    got: k,
                });
            }
            if name == "Ui" {
                ensure_unitary(mat, name, tol.threshold(m as f64))?;
            } else {
                ensure_symmetric_unitary(mat, name, tol.threshold(m as f64))?;
            }
        }
        let uit = p.ui.transpose();
        let mut a = CMatrix::zeros(self.size, self.size);
        for r in 0..m {
            for s in 0..m {
                a[(4 * r, 4 * s)] = p.q1[(r, s)];
                a[(4 * r + 1, 4 * s + 3)] = uit[(r, s)];
                a[(4 * r + 2, 4 * s + 2)] = p.q2[(r, s)];
                a[(4 * r + 3, 4 * s + 1)] = p.ui[(r, s)];
            }
        }
        AntilinearOperator::new(a)
    }

    /// Recovers `(Q₁, Q₂, U_i)` through the general decomposition relative
    /// to the permutation of [`canonical_form`](Self::canonical_form).
    pub fn decompose(&self, c: &AntilinearOperator, tol: Tolerance) -> Result<FourierParams> {
        let (layout, w) = self.canonical_form();
        let p = decompose_with(&layout, &w, c, tol, default_membership_threshold(self.size))?;
        Ok(FourierParams {
            q1: p.q_plus,
            q2: p.q_minus,
            ui: p.v_blocks.into_iter().next().expect("one pair"),
        })
    }
}

/// Convenience wrapper for [`FourBlockModel::conjugation`].
pub fn fourier_conjugation(
    size: usize,
    q1: &CMatrix,
    q2: &CMatrix,
    ui: &CMatrix,
    tol: Tolerance,
) -> Result<AntilinearOperator> {
    FourBlockModel::new(size)?.conjugation(
        &FourierParams {
            q1: q1.clone(),
            q2: q2.clone(),
            ui: ui.clone(),
        },
        tol,
    )
}

/// The Hilbert transform in its eigenbasis: `i` on the first half of the
/// coordinates and `−i` on the second.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TwoBlockModel {
    size: usize,
}

impl TwoBlockModel {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 || !size.is_multiple_of(2) {
            return Err(Error::InvalidParams(format!(
                "Hilbert truncation {size} is not a positive even number"
            )));
        }
        Ok(Self { size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn half(&self) -> usize {
        self.size / 2
    }

    pub fn diagonal(&self) -> CMatrix {
        let h = self.half();
        crate::linalg::diagonal(
            &(0..self.size)
                .map(|k| {
                    if k < h {
                        C64::new(0.0, 1.0)
                    } else {
                        C64::new(0.0, -1.0)
                    }
                })
                .collect::<Vec<_>>(),
        )
    }

    /// `[[0, U_iᵗ], [U_i, 0]]·J`.
    pub fn conjugation(&self, ui: &CMatrix, tol: Tolerance) -> Result<AntilinearOperator> {
        let h = self.half();
        let k = require_square(ui)?;
        if k != h {
            return Err(Error::DimensionMismatch {
                expected: h,
                got: k,
            });
        }
        ensure_unitary(ui, "Ui", tol.threshold(h as f64))?;
        let mut a = CMatrix::zeros(self.size, self.size);
        a.view_mut((0, h), (h, h)).copy_from(&ui.transpose());
        a.view_mut((h, 0), (h, h)).copy_from(ui);
        AntilinearOperator::new(a)
    }

    /// Recovers `U_i` (the lower-left block).
    pub fn decompose(&self, c: &AntilinearOperator, tol: Tolerance) -> Result<CMatrix> {
        let h = self.half();
        let layout = BlockLayout {
            pairs: vec![ConjugatePair {
                xi: C64::new(0.0, 1.0),
                multiplicity: h,
            }],
            ell: 0,
            kay: 0,
        };
        let w = CMatrix::identity(self.size, self.size);
        let p = decompose_with(&layout, &w, c, tol, default_membership_threshold(self.size))?;
        Ok(p.v_blocks[0].transpose())
    }
}

/// Convenience wrapper for [`TwoBlockModel::conjugation`].
pub fn hilbert_conjugation(
    size: usize,
    ui: &CMatrix,
    tol: Tolerance,
) -> Result<AntilinearOperator> {
    TwoBlockModel::new(size)?.conjugation(ui, tol)
}

/// The operator `U_i^#` on the `i` class defined by
/// `⟨U_i^# e_m, e_n⟩ = conj(⟨U_i* e_m, e_n⟩)`, evaluated entry by entry.
fn pairing_by_definition(ui: &CMatrix) -> CMatrix {
    let n = ui.nrows();
    let adj = ui.adjoint();
    CMatrix::from_fn(n, n, |row, col| {
        let mut e = crate::linalg::CVector::zeros(n);
        e[col] = C64::new(1.0, 0.0);
        let image = &adj * e;
        // ⟨x, e_row⟩ = x[row].
        image[row].conj()
    })
}

/// The pairing `U_i ↦ U_i^#`, which is the matrix transpose. The
/// entrywise definition is evaluated and checked against the transpose.
pub fn derive_pairing_rule(ui: &CMatrix) -> Result<CMatrix> {
    require_square(ui)?;
    let by_definition = pairing_by_definition(ui);
    let t = ui.transpose();
    let gap = (&by_definition - &t)
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    assert!(
        gap <= 1e-15,
        "pairing rule differs from transpose by {gap:e}"
    );
    Ok(t)
}

/// Width factor of the refinement family: half-width `1.65·√N` for `N`
/// points keeps the residuals of `h_0, …, h_8` well above roundoff for
/// `N ≤ 512` while they decrease under refinement.
pub const REFINEMENT_WIDTH_FACTOR: f64 = 1.65;

/// Uniform grid of `points` nodes on `[−half_width, half_width]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HermiteGrid {
    pub half_width: f64,
    pub points: usize,
}

impl HermiteGrid {
    pub fn new(half_width: f64, points: usize) -> Result<Self> {
        if points < 2 {
            return Err(Error::InvalidParams(format!(
                "grid needs at least 2 points, got {points}"
            )));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidParams(format!(
                "half width {half_width} must be positive"
            )));
        }
        Ok(Self { half_width, points })
    }

    /// The grid with half-width `REFINEMENT_WIDTH_FACTOR·√points`.
    pub fn refinement(points: usize) -> Result<Self> {
        Self::new(REFINEMENT_WIDTH_FACTOR * (points as f64).sqrt(), points)
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.points - 1) as f64
    }

    /// Nodes, exactly symmetric about 0.
    pub fn nodes(&self) -> Vec<f64> {
        let d = self.spacing();
        let mid = (self.points - 1) as f64 / 2.0;
        (0..self.points).map(|k| (k as f64 - mid) * d).collect()
    }

    /// Trapezoid weights.
    pub fn weights(&self) -> Vec<f64> {
        let d = self.spacing();
        (0..self.points)
            .map(|k| {
                if k == 0 || k + 1 == self.points {
                    d / 2.0
                } else {
                    d
                }
            })
            .collect()
    }
}

/// `h_0, …, h_{n_max}` at the grid nodes, by the three-term recurrence
/// `h_{n+1} = √(2/(n+1))·x·h_n − √(n/(n+1))·h_{n−1}`,
/// `h_0 = π^{−1/4} e^{−x²/2}`.
pub fn hermite_samples(n_max: usize, grid: &HermiteGrid) -> Vec<Vec<f64>> {
    let x = grid.nodes();
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(n_max + 1);
    out.push(
        x.iter()
            .map(|&t| PI.powf(-0.25) * (-t * t / 2.0).exp())
            .collect(),
    );
    if n_max >= 1 {
        out.push(
            x.iter()
                .zip(&out[0])
                .map(|(&t, &h)| 2f64.sqrt() * t * h)
                .collect(),
        );
    }
    for n in 1..n_max {
        let a = (2.0 / (n + 1) as f64).sqrt();
        let b = (n as f64 / (n + 1) as f64).sqrt();
        let next = (0..x.len())
            .map(|k| a * x[k] * out[n][k] - b * out[n - 1][k])
            .collect();
        out.push(next);
    }
    out
}

/// Gram matrix of sampled functions under trapezoid quadrature.
pub fn gram_matrix(samples: &[Vec<f64>], grid: &HermiteGrid) -> DMatrix<f64> {
    let w = grid.weights();
    DMatrix::from_fn(samples.len(), samples.len(), |i, j| {
        samples[i]
            .iter()
            .zip(&samples[j])
            .zip(&w)
            .map(|((a, b), w)| a * b * w)
            .sum()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DftEigenReport {
    pub n: usize,
    pub points: usize,
    pub half_width: f64,
    /// `‖𝔉 h_n − (−i)^n h_n‖ / ‖h_n‖` in the discrete 2-norm.
    pub residual: f64,
    /// `max(|h_n(±L)|) / max|h_n|`.
    pub edge_ratio: f64,
    /// False when `h_n` is not negligible at the grid edge, so the
    /// residual also measures truncation.
    pub support_ok: bool,
}

/// Relative edge amplitude above which the support is flagged.
pub const SUPPORT_EDGE_RATIO: f64 = 1e-8;

/// Applies the centered quadrature Fourier matrix
/// `(Δ/√(2π))·e^{−i x_k x_j}` to the sampled `h_n` and compares with
/// `(−i)^n h_n`.
pub fn dft_eigen_check(n: usize, grid: &HermiteGrid) -> DftEigenReport {
    let x = grid.nodes();
    let h = hermite_samples(n, grid).pop().expect("at least h_0");
    let scale = grid.spacing() / (2.0 * PI).sqrt();
    let lambda = fourier_eigenvalue(n);
    let mut num = 0.0;
    for (k, &xk) in x.iter().enumerate() {
        let acc: C64 = x
            .iter()
            .zip(&h)
            .map(|(&xj, &hj)| C64::from_polar(hj, -xk * xj))
            .sum::<C64>()
            * scale;
        num += (acc - lambda * h[k]).norm_sqr();
    }
    let den: f64 = h.iter().map(|v| v * v).sum();
    let peak = h.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let edge = h[0].abs().max(h[h.len() - 1].abs());
    let edge_ratio = if peak > 0.0 { edge / peak } else { 0.0 };
    DftEigenReport {
        n,
        points: grid.points,
        half_width: grid.half_width,
        residual: (num / den).sqrt(),
        edge_ratio,
        support_ok: edge_ratio <= SUPPORT_EDGE_RATIO,
    }
}
