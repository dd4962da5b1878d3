//! Function models on the `M`-th roots of unity.
//!
//! A grid function is a vector of values at `ξ_j = e^{2πij/M}` with the
//! normalized norm `(1/M) Σ |f(ξ_j)|²`. Multiplication by `ξ` is exactly
//! unitary here, and every pointwise identity of the circle model holds
//! exactly on the grid.
//!
//! For `ψ(z) = z^d` with `d | M`, each `f` splits uniquely as
//! `f(ξ) = Σ_j ξ^j f_j(ξ^d)` with components on the `M/d` grid. The fiber of
//! `η_i` (index `i < M/d`) is `{ξ_{i + k·M/d} : k < d}`. Conjugations
//! commuting with `M_{ξ^d}` act on components by
//! `(Cf)_k(η) = Σ_j φ_kj(η) · conj(f_j(η̄))` for a matrix field `Φ`.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::antilinear::AntilinearOperator;
use crate::error::{Error, Result};
use crate::linalg::{conj, frobenius, unitarity_defect, CMatrix, C64};
use crate::spectral::unit;

/// Unimodularity and symmetry tolerance for multiplier inputs.
pub const FIELD_TOL: f64 = 1e-12;

/// Angle of `ξ_j` in `(−π, π]`, exactly antisymmetric under `j ↦ M − j`.
pub fn grid_angle(order: usize, j: usize) -> f64 {
    let j = j % order;
    if 2 * j <= order {
        2.0 * PI * j as f64 / order as f64
    } else {
        -2.0 * PI * (order - j) as f64 / order as f64
    }
}

/// `ξ_j = e^{2πij/M}`.
pub fn grid_point(order: usize, j: usize) -> C64 {
    unit(grid_angle(order, j))
}

/// Index of `conj(ξ_j)`.
pub fn conj_index(order: usize, j: usize) -> usize {
    (order - j % order) % order
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridModel {
    order: usize,
    values: Vec<C64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    order: usize,
    values: Vec<[f64; 2]>,
}

impl Serialize for GridModel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RawGrid {
            order: self.order,
            values: self.values.iter().map(|z| [z.re, z.im]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GridModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawGrid::deserialize(d)?;
        GridModel::new(
            raw.order,
            raw.values.iter().map(|p| C64::new(p[0], p[1])).collect(),
        )
        .map_err(serde::de::Error::custom)
    }
}

impl GridModel {
    pub fn new(order: usize, values: Vec<C64>) -> Result<Self> {
        if order == 0 {
            return Err(Error::EmptyDimension);
        }
        if values.len() != order {
            return Err(Error::DimensionMismatch {
                expected: order,
                got: values.len(),
            });
        }
        if let Some(j) = values
            .iter()
            .position(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(Error::NonFinite { row: j, col: 0 });
        }
        Ok(Self { order, values })
    }

    pub fn from_fn(order: usize, f: impl Fn(C64) -> C64) -> Result<Self> {
        Self::new(order, (0..order).map(|j| f(grid_point(order, j))).collect())
    }

    pub fn zeros(order: usize) -> Result<Self> {
        Self::new(order, vec![C64::new(0.0, 0.0); order])
    }

    pub fn random<R: Rng + ?Sized>(order: usize, rng: &mut R) -> Result<Self> {
        let m = crate::linalg::complex_gaussian(order, 1, rng);
        Self::new(order, m.iter().copied().collect())
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    /// `(1/M) Σ |f(ξ_j)|²`.
    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() / self.order as f64
    }

    /// `f^#(ξ) = conj(f(ξ̄))`.
    pub fn sharp(&self) -> Self {
        Self {
            order: self.order,
            values: (0..self.order)
                .map(|j| self.values[conj_index(self.order, j)].conj())
                .collect(),
        }
    }

    /// Pointwise product.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        if other.order != self.order {
            return Err(Error::DimensionMismatch {
                expected: self.order,
                got: other.order,
            });
        }
        Ok(Self {
            order: self.order,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .collect(),
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.order != other.order {
            return f64::INFINITY;
        }
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

fn check_degree(order: usize, degree: usize) -> Result<usize> {
    if degree == 0 || !order.is_multiple_of(degree) {
        return Err(Error::InvalidParams(format!(
            "degree {degree} does not divide grid order {order}"
        )));
    }
    Ok(order / degree)
}

/// Analysis matrix on the fiber of `η_i`: maps the `d` values
/// `f(ξ_{i+kM'})` to the component values `f_j(η_i)`.
fn analysis_matrix(order: usize, degree: usize, i: usize) -> CMatrix {
    let m_eta = order / degree;
    // f_j(η_i) = ω_i^{−j} (1/d) Σ_k e^{−2πi jk/d} f(ξ_{i+kM'}), ω_i = ξ_i.
    CMatrix::from_fn(degree, degree, |j, k| {
        let idx = (order - (i * j + j * k * m_eta) % order) % order;
        grid_point(order, idx) / degree as f64
    })
}

/// Synthesis matrix (inverse of [`analysis_matrix`]).
fn synthesis_matrix(order: usize, degree: usize, i: usize) -> CMatrix {
    let m_eta = order / degree;
    CMatrix::from_fn(degree, degree, |k, j| {
        grid_point(order, (i * j + j * k * m_eta) % order)
    })
}

/// Splits `f` into `(f_0, …, f_{d−1})` with `f(ξ) = Σ_j ξ^j f_j(ξ^d)`.
pub fn analyze(f: &GridModel, degree: usize) -> Result<Vec<GridModel>> {
    let m = f.order;
    let m_eta = check_degree(m, degree)?;
    let mut comps = vec![vec![C64::new(0.0, 0.0); m_eta]; degree];
    for i in 0..m_eta {
        let t = analysis_matrix(m, degree, i);
        for (j, comp) in comps.iter_mut().enumerate() {
            comp[i] = (0..degree)
                .map(|k| t[(j, k)] * f.values[i + k * m_eta])
                .sum();
        }
    }
    comps
        .into_iter()
        .map(|v| GridModel::new(m_eta, v))
        .collect()
}

/// Inverse of [`analyze`].
pub fn synthesize(components: &[GridModel], degree: usize) -> Result<GridModel> {
    if components.len() != degree || degree == 0 {
        return Err(Error::DimensionMismatch {
            expected: degree,
            got: components.len(),
        });
    }
    let m_eta = components[0].order;
    if let Some(bad) = components.iter().find(|c| c.order != m_eta) {
        return Err(Error::DimensionMismatch {
            expected: m_eta,
            got: bad.order,
        });
    }
    let m = m_eta * degree;
    let mut values = vec![C64::new(0.0, 0.0); m];
    for i in 0..m_eta {
        let s = synthesis_matrix(m, degree, i);
        for k in 0..degree {
            values[i + k * m_eta] = (0..degree)
                .map(|j| s[(k, j)] * components[j].values[i])
                .sum();
        }
    }
    GridModel::new(m, values)
}

/// An antilinear grid operator that maps the fiber of `η̄_i` into the fiber
/// of `η_i`: `(Cf)|_i = B_i · conj(f|_{σ(i)})`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberConjugation {
    order: usize,
    degree: usize,
    blocks: Vec<CMatrix>,
}

/// Defects of a grid operator, as Frobenius norms over the whole grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridDefects {
    pub isometry: f64,
    pub involution: f64,
    /// Against `M_{ξ^d}`.
    pub commutation: f64,
}

impl GridDefects {
    pub fn max(&self) -> f64 {
        self.isometry.max(self.involution).max(self.commutation)
    }
}

impl FiberConjugation {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    fn fiber(&self, i: usize) -> impl Iterator<Item = usize> {
        let m_eta = self.order / self.degree;
        (0..self.degree).map(move |k| i + k * m_eta)
    }

    pub fn apply(&self, f: &GridModel) -> Result<GridModel> {
        if f.order != self.order {
            return Err(Error::DimensionMismatch {
                expected: self.order,
                got: f.order,
            });
        }
        let m_eta = self.order / self.degree;
        let mut values = vec![C64::new(0.0, 0.0); self.order];
        for i in 0..m_eta {
            let src: Vec<C64> = self
                .fiber(conj_index(m_eta, i))
                .map(|a| f.values[a].conj())
                .collect();
            for (k, dst) in self.fiber(i).enumerate() {
                values[dst] = (0..self.degree)
                    .map(|l| self.blocks[i][(k, l)] * src[l])
                    .sum();
            }
        }
        GridModel::new(self.order, values)
    }

    /// Dense `M × M` matrix (for small grids and cross-checks).
    pub fn to_dense(&self) -> AntilinearOperator {
        let m_eta = self.order / self.degree;
        let mut a = CMatrix::zeros(self.order, self.order);
        for i in 0..m_eta {
            let s = conj_index(m_eta, i);
            for (k, row) in self.fiber(i).enumerate() {
                for (l, col) in self.fiber(s).enumerate() {
                    a[(row, col)] = self.blocks[i][(k, l)];
                }
            }
        }
        AntilinearOperator::new(a).expect("finite square matrix")
    }

    /// Defect of `C·M_g·C = M_g` for a diagonal multiplier `g` on the grid.
    pub fn multiplier_defect(&self, g: &GridModel) -> Result<f64> {
        if g.order != self.order {
            return Err(Error::DimensionMismatch {
                expected: self.order,
                got: g.order,
            });
        }
        let m_eta = self.order / self.degree;
        let diag = |i: usize| {
            crate::linalg::diagonal(&self.fiber(i).map(|a| g.values[a]).collect::<Vec<_>>())
        };
        let mut total = 0.0;
        for i in 0..m_eta {
            let s = conj_index(m_eta, i);
            let cmc = &self.blocks[i] * conj(&diag(s)) * conj(&self.blocks[s]);
            total += frobenius(&(cmc - diag(i))).powi(2);
        }
        Ok(total.sqrt())
    }

    pub fn defects(&self) -> GridDefects {
        let m_eta = self.order / self.degree;
        let id = CMatrix::identity(self.degree, self.degree);
        let mut iso = 0.0;
        let mut inv = 0.0;
        for i in 0..m_eta {
            let b = &self.blocks[i];
            iso += unitarity_defect(b).unwrap_or(f64::INFINITY).powi(2);
            inv += frobenius(&(b * conj(&self.blocks[conj_index(m_eta, i)]) - &id)).powi(2);
        }
        let psi =
            GridModel::from_fn(self.order, |z| z.powu(self.degree as u32)).expect("valid grid");
        GridDefects {
            isometry: iso.sqrt(),
            involution: inv.sqrt(),
            commutation: self.multiplier_defect(&psi).expect("same order"),
        }
    }
}

/// `(Cf)(ξ) = u(ξ)·conj(f(ξ̄))` for unimodular, conjugation-symmetric `u`.
pub fn shift_conjugation(u: &GridModel) -> Result<FiberConjugation> {
    let m = u.order;
    for j in 0..m {
        let z = u.values[j];
        if (z.norm() - 1.0).abs() > FIELD_TOL {
            return Err(Error::InvalidParams(format!(
                "u is not unimodular at grid index {j} (|u| = {})",
                z.norm()
            )));
        }
        let partner = u.values[conj_index(m, j)];
        if (z - partner).norm() > FIELD_TOL {
            return Err(Error::InvalidParams(format!(
                "u(ξ) ≠ u(ξ̄) at grid index {j} (difference {:.3e})",
                (z - partner).norm()
            )));
        }
    }
    Ok(FiberConjugation {
        order: m,
        degree: 1,
        blocks: u
            .values
            .iter()
            .map(|&z| CMatrix::from_element(1, 1, z))
            .collect(),
    })
}

/// A conjugation commuting with `M_{ξ^d}`, given by its matrix field `Φ` on
/// the `M/d` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerPowerConjugation {
    degree: usize,
    phi: Vec<CMatrix>,
}

impl InnerPowerConjugation {
    /// Validates that `Φ(η)` is unitary and `Φ(η̄) = Φ(η)ᵗ` at every point;
    /// together these are exactly the conditions for `C² = I`.
    pub fn new(degree: usize, phi: Vec<CMatrix>) -> Result<Self> {
        let m_eta = phi.len();
        if m_eta == 0 {
            return Err(Error::EmptyDimension);
        }
        for (i, p) in phi.iter().enumerate() {
            if p.shape() != (degree, degree) {
                return Err(Error::DimensionMismatch {
                    expected: degree,
                    got: p.nrows(),
                });
            }
            let ud = unitarity_defect(p)?;
            if ud > FIELD_TOL * degree as f64 {
                return Err(Error::InvalidParams(format!(
                    "Φ is not unitary at grid index {i} (defect {ud:.3e})"
                )));
            }
            let td = frobenius(&(&phi[conj_index(m_eta, i)] - p.transpose()));
            if td > FIELD_TOL * degree as f64 {
                return Err(Error::InvalidParams(format!(
                    "Φ(η̄) ≠ Φ(η)ᵗ at grid index {i} (defect {td:.3e})"
                )));
            }
        }
        Ok(Self { degree, phi })
    }

    pub fn phi(&self) -> &[CMatrix] {
        &self.phi
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Applies `C` through analysis and synthesis.
    pub fn apply(&self, f: &GridModel) -> Result<GridModel> {
        let comps = analyze(f, self.degree)?;
        let m_eta = comps[0].order;
        if m_eta != self.phi.len() {
            return Err(Error::DimensionMismatch {
                expected: self.phi.len() * self.degree,
                got: f.order,
            });
        }
        let sharp: Vec<GridModel> = comps.iter().map(GridModel::sharp).collect();
        let out: Vec<GridModel> = (0..self.degree)
            .map(|k| {
                let values = (0..m_eta)
                    .map(|i| {
                        (0..self.degree)
                            .map(|j| self.phi[i][(k, j)] * sharp[j].values[i])
                            .sum()
                    })
                    .collect();
                GridModel::new(m_eta, values)
            })
            .collect::<Result<_>>()?;
        synthesize(&out, self.degree)
    }

    /// The fiber form `B_i = S_i · Φ(η_i) · conj(T_{σ(i)})`.
    pub fn to_fibers(&self) -> FiberConjugation {
        let m_eta = self.phi.len();
        let order = m_eta * self.degree;
        let blocks = (0..m_eta)
            .map(|i| {
                let s = conj_index(m_eta, i);
                synthesis_matrix(order, self.degree, i)
                    * &self.phi[i]
                    * conj(&analysis_matrix(order, self.degree, s))
            })
            .collect();
        FiberConjugation {
            order,
            degree: self.degree,
            blocks,
        }
    }
}

/// Parameters of the 2×2 field `Φ` on the `ξ²`-grid (length `M/2`).
///
/// Values are read at `|τ|` for `τ = Arg η`: only indices with angle in
/// `[0, π]` are used, which makes `Φ(η) = Φ(η̄)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiParams {
    pub s: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl PhiParams {
    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    fn from_fn(m_eta: usize, f: impl Fn(f64) -> (f64, f64, f64, f64)) -> Self {
        let mut p = Self {
            s: Vec::with_capacity(m_eta),
            alpha: Vec::with_capacity(m_eta),
            beta: Vec::with_capacity(m_eta),
            gamma: Vec::with_capacity(m_eta),
        };
        for i in 0..m_eta {
            let (s, a, b, g) = f(grid_angle(m_eta, i).abs());
            p.s.push(s);
            p.alpha.push(a);
            p.beta.push(b);
            p.gamma.push(g);
        }
        p
    }

    /// `s(τ) = sin|τ|` with zero phases, except that `β = γ = π` where
    /// `cos τ < 0`, so that the off-diagonal entries are `cos τ` itself:
    /// `Φ = [[sin|τ|, cos τ], [cos τ, −sin|τ|]]`.
    pub fn sincos(m_eta: usize) -> Self {
        Self::from_fn(m_eta, |t| {
            let phase = if t.cos() < 0.0 { PI } else { 0.0 };
            (t.sin(), 0.0, phase, phase)
        })
    }

    /// `s ≡ s₀`, `α(τ) = λτ`, `β = γ = 0`.
    pub fn lambda(m_eta: usize, s0: f64, lambda: f64) -> Self {
        Self::from_fn(m_eta, |t| (s0, lambda * t, 0.0, 0.0))
    }

    /// Random `s ∈ [0, 1]`, `α`, `β` uniform phases and `γ = β`.
    pub fn random<R: Rng + ?Sized>(m_eta: usize, rng: &mut R) -> Self {
        let mut p = Self::from_fn(m_eta, |_| (0.0, 0.0, 0.0, 0.0));
        for i in 0..m_eta {
            p.s[i] = rng.random_range(0.0..=1.0);
            p.alpha[i] = rng.random_range(-PI..PI);
            p.beta[i] = rng.random_range(-PI..PI);
            p.gamma[i] = p.beta[i];
        }
        p
    }

    fn validate(&self) -> Result<()> {
        let n = self.s.len();
        if n == 0 {
            return Err(Error::EmptyDimension);
        }
        for (name, arr) in [
            ("alpha", &self.alpha),
            ("beta", &self.beta),
            ("gamma", &self.gamma),
        ] {
            if arr.len() != n {
                return Err(Error::InvalidParams(format!(
                    "{name} has length {}, expected {n}",
                    arr.len()
                )));
            }
            if let Some(i) = arr.iter().position(|x| !x.is_finite()) {
                return Err(Error::InvalidParams(format!("{name}[{i}] is not finite")));
            }
        }
        if let Some(i) = self.s.iter().position(|&x| !(0.0..=1.0).contains(&x)) {
            return Err(Error::InvalidParams(format!(
                "s[{i}] = {} is outside [0, 1]",
                self.s[i]
            )));
        }
        Ok(())
    }
}

/// The field `Φ(η) = [[e^{iα}s, e^{iβ}√(1−s²)], [e^{iγ}√(1−s²), −e^{i(β+γ−α)}s]]`
/// with every parameter read at `|Arg η|`.
pub fn phi_matrix(p: &PhiParams) -> Result<Vec<CMatrix>> {
    p.validate()?;
    let m_eta = p.len();
    Ok((0..m_eta)
        .map(|i| {
            let k = if grid_angle(m_eta, i) < 0.0 {
                conj_index(m_eta, i)
            } else {
                i
            };
            let (s, a, b, g) = (p.s[k], p.alpha[k], p.beta[k], p.gamma[k]);
            let c = (1.0 - s * s).max(0.0).sqrt();
            CMatrix::from_row_slice(
                2,
                2,
                &[
                    C64::from_polar(s, a),
                    C64::from_polar(c, b),
                    C64::from_polar(c, g),
                    -C64::from_polar(s, b + g - a),
                ],
            )
        })
        .collect())
}

/// The conjugation commuting with `M_{ξ²}` on the order-`M` grid given by
/// `Φ = phi_matrix(p)`.
pub fn psi_conjugation(p: &PhiParams, order: usize) -> Result<InnerPowerConjugation> {
    let m_eta = check_degree(order, 2)?;
    if p.len() != m_eta {
        return Err(Error::DimensionMismatch {
            expected: m_eta,
            got: p.len(),
        });
    }
    InnerPowerConjugation::new(2, phi_matrix(p)?)
}

/// Reads off `Φ` from a dense antilinear operator on the order-`M` grid
/// that commutes with `M_{ξ^d}`: column `j` of `Φ(η_i)` is the component
/// vector at `η_i` of `C` applied to the function whose only nonzero
/// component is `f_j = δ_{η̄_i}`.
pub fn extract_phi(c: &AntilinearOperator, order: usize, degree: usize) -> Result<Vec<CMatrix>> {
    let m_eta = check_degree(order, degree)?;
    if c.dim() != order {
        return Err(Error::DimensionMismatch {
            expected: order,
            got: c.dim(),
        });
    }
    let mut phi = vec![CMatrix::zeros(degree, degree); m_eta];
    for (i, phi_i) in phi.iter_mut().enumerate() {
        let s = conj_index(m_eta, i);
        for j in 0..degree {
            let mut comps = vec![GridModel::zeros(m_eta)?; degree];
            comps[j].values[s] = C64::new(1.0, 0.0);
            let f = synthesize(&comps, degree)?;
            let x = crate::linalg::CVector::from_column_slice(&f.values);
            let image = c.apply(&x)?;
            let g = GridModel::new(order, image.iter().copied().collect())?;
            let out = analyze(&g, degree)?;
            for k in 0..degree {
                phi_i[(k, j)] = out[k].values[i];
            }
        }
    }
    Ok(phi)
}

/// Largest `‖Φ(η̄) − Φ(η)‖_F` over the grid.
pub fn phi_reflection_defect(phi: &[CMatrix]) -> f64 {
    let m = phi.len();
    (0..m)
        .map(|i| frobenius(&(&phi[conj_index(m, i)] - &phi[i])))
        .fold(0.0, f64::max)
}

/// Largest `‖Φ(η̄) − Φ(η)ᵗ‖_F` over the grid.
pub fn phi_transpose_defect(phi: &[CMatrix]) -> f64 {
    let m = phi.len();
    (0..m)
        .map(|i| frobenius(&(&phi[conj_index(m, i)] - phi[i].transpose())))
        .fold(0.0, f64::max)
}

/// Largest `‖Φ*Φ − I‖_F` over the grid.
pub fn phi_unitarity_defect(phi: &[CMatrix]) -> f64 {
    phi.iter()
        .map(|p| unitarity_defect(p).unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max)
}
