//! Atomic measures on the unit circle and the function-space models built
//! on them.
//!
//! For a measure `μ = Σ w_k δ_{ξ_k}` the space `L²(μ, ℂʳ)` is the set of
//! per-atom vectors `f_k ∈ ℂʳ` with inner product `Σ w_k ⟨f_k, g_k⟩`. The
//! reflection `μ^c` places the same weights at the conjugate points. When
//! `μ^c ≪ μ` every atom `ξ_k` has a partner `ξ_{σ(k)} = conj(ξ_k)` and the
//! Radon–Nikodym derivative `h = dμ^c/dμ` is `h_k = w_{σ(k)} / w_k`.
//! The conjugation `J#` acts by `(J# f)_k = h_k^{1/2} · J(f_{σ(k)})`.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::antilinear::{is_conjugation, AntilinearOperator};
use crate::error::{Error, Result};
use crate::linalg::{
    conj, frobenius, haar_unitary_with, symmetric_unitary_with, unitarity_defect, CMatrix, CVector,
    Tolerance, C64,
};
use crate::spectral::{unit, MultiplicityModel, UnitarySpectrum};

/// Two atoms closer than this (in angle) are the same point; also the
/// tolerance for locating conjugate partners.
pub const PARTNER_TOL: f64 = 1e-9;

/// Maps an angle into `(−π, π]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    if t == -PI {
        t = PI;
    }
    t
}

fn angle_distance(a: f64, b: f64) -> f64 {
    wrap_angle(a - b).abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    /// Angle of the point, in `(−π, π]`.
    pub theta: f64,
    pub weight: f64,
}

impl Atom {
    pub fn new(theta: f64, weight: f64) -> Self {
        Self {
            theta: wrap_angle(theta),
            weight,
        }
    }

    /// The point `e^{iθ}`, exact at multiples of `π/2`.
    pub fn point(&self) -> C64 {
        unit(self.theta)
    }

    /// Real atoms (`±1`) are their own conjugate.
    pub fn is_real(&self) -> bool {
        angle_distance(self.theta, -self.theta) <= PARTNER_TOL
    }
}

/// A finite positive combination of point masses on the circle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMeasure")]
pub struct AtomicMeasure {
    atoms: Vec<Atom>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMeasure {
    atoms: Vec<Atom>,
}

impl TryFrom<RawMeasure> for AtomicMeasure {
    type Error = Error;

    fn try_from(raw: RawMeasure) -> Result<Self> {
        AtomicMeasure::new(raw.atoms)
    }
}

impl AtomicMeasure {
    /// Validates weights and angles and rejects coincident atoms.
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        let atoms: Vec<Atom> = atoms
            .into_iter()
            .map(|a| {
                if !a.theta.is_finite() {
                    return Err(Error::InvalidMeasure(format!(
                        "angle {} is not finite",
                        a.theta
                    )));
                }
                if !(a.weight.is_finite() && a.weight > 0.0) {
                    return Err(Error::InvalidMeasure(format!(
                        "weight {} at angle {} must be positive and finite",
                        a.weight, a.theta
                    )));
                }
                Ok(Atom::new(a.theta, a.weight))
            })
            .collect::<Result<_>>()?;
        for (i, a) in atoms.iter().enumerate() {
            for b in &atoms[i + 1..] {
                if angle_distance(a.theta, b.theta) <= PARTNER_TOL {
                    return Err(Error::InvalidMeasure(format!(
                        "atoms at angles {} and {} coincide",
                        a.theta, b.theta
                    )));
                }
            }
        }
        Ok(Self { atoms })
    }

    pub fn zero() -> Self {
        Self { atoms: Vec::new() }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    /// Index of the atom at angle `theta`, if any.
    pub fn index_of(&self, theta: f64) -> Option<usize> {
        self.atoms
            .iter()
            .position(|a| angle_distance(a.theta, theta) <= PARTNER_TOL)
    }

    /// Mass of the atom at `theta` (zero if absent).
    pub fn weight_at(&self, theta: f64) -> f64 {
        self.index_of(theta).map_or(0.0, |k| self.atoms[k].weight)
    }

    /// `μ^c(Ω) = μ(Ω*)`: the same weights at the conjugate points.
    pub fn reflect(&self) -> Self {
        Self {
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom::new(-a.theta, a.weight))
                .collect(),
        }
    }

    /// Every atom of `self` is an atom of `other`.
    pub fn is_absolutely_continuous_wrt(&self, other: &Self) -> bool {
        self.atoms.iter().all(|a| other.index_of(a.theta).is_some())
    }

    /// `dμ^c/dμ`, defined when every atom has a conjugate partner.
    pub fn radon_nikodym(&self) -> Result<RadonNikodym> {
        let mut partner = vec![usize::MAX; self.len()];
        for (k, a) in self.atoms.iter().enumerate() {
            partner[k] = self
                .index_of(-a.theta)
                .ok_or(Error::NotAbsolutelyContinuous { theta: a.theta })?;
        }
        let mut h = vec![1.0; self.len()];
        for k in 0..self.len() {
            let s = partner[k];
            if s > k {
                let (hk, hs) = reciprocal_pair(self.atoms[s].weight / self.atoms[k].weight);
                h[k] = hk;
                h[s] = hs;
            }
        }
        Ok(RadonNikodym { partner, h })
    }

    /// Atomwise minimum over common atoms.
    pub fn meet(&self, other: &Self) -> Self {
        let atoms = self
            .atoms
            .iter()
            .filter_map(|a| {
                other
                    .index_of(a.theta)
                    .map(|j| Atom::new(a.theta, a.weight.min(other.atoms[j].weight)))
            })
            .collect();
        Self { atoms }
    }

    /// Atomwise sum over the union of atoms.
    pub fn join(&self, other: &Self) -> Self {
        let mut atoms = self.atoms.clone();
        for b in &other.atoms {
            match self.index_of(b.theta) {
                Some(k) => atoms[k].weight += b.weight,
                None => atoms.push(*b),
            }
        }
        Self { atoms }
    }
}

/// `(h, g)` with `h` within a few ulps of `ratio` and `h·g == 1` exactly in
/// floating point, so that `h(ξ)·h(ξ̄) = 1` holds without rounding error.
fn reciprocal_pair(ratio: f64) -> (f64, f64) {
    let mut h = ratio;
    for step in 0..64 {
        let mut g = 1.0 / h;
        for _ in 0..4 {
            g = g.next_down();
        }
        for _ in 0..9 {
            if h * g == 1.0 {
                return (h, g);
            }
            g = g.next_up();
        }
        // No exact reciprocal at this h; move h outward by one ulp.
        h = if step % 2 == 0 {
            let mut t = ratio;
            for _ in 0..=step / 2 {
                t = t.next_up();
            }
            t
        } else {
            let mut t = ratio;
            for _ in 0..=step / 2 {
                t = t.next_down();
            }
            t
        };
    }
    (ratio, 1.0 / ratio)
}

/// Conjugate pairing `σ` and derivative values `h_k` of a measure.
#[derive(Debug, Clone, PartialEq)]
pub struct RadonNikodym {
    pub partner: Vec<usize>,
    pub h: Vec<f64>,
}

/// An element of `L²(μ, ℂʳ)`: one vector per atom.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSpaceElement {
    pub values: Vec<CVector>,
}

impl WeightedSpaceElement {
    pub fn new(values: Vec<CVector>) -> Result<Self> {
        if let Some(first) = values.first() {
            let r = first.len();
            if let Some(bad) = values.iter().find(|v| v.len() != r) {
                return Err(Error::DimensionMismatch {
                    expected: r,
                    got: bad.len(),
                });
            }
        }
        Ok(Self { values })
    }

    pub fn random<R: Rng + ?Sized>(atoms: usize, fiber_dim: usize, rng: &mut R) -> Self {
        let m = crate::linalg::complex_gaussian(fiber_dim, atoms, rng);
        Self {
            values: (0..atoms).map(|k| m.column(k).clone_owned()).collect(),
        }
    }

    pub fn fiber_dim(&self) -> usize {
        self.values.first().map_or(0, |v| v.len())
    }

    fn check(&self, mu: &AtomicMeasure) -> Result<()> {
        if self.values.len() != mu.len() {
            return Err(Error::DimensionMismatch {
                expected: mu.len(),
                got: self.values.len(),
            });
        }
        Ok(())
    }

    /// `Σ w_k ⟨f_k, g_k⟩`, linear in the second argument.
    pub fn inner(&self, other: &Self, mu: &AtomicMeasure) -> Result<C64> {
        self.check(mu)?;
        other.check(mu)?;
        if self.fiber_dim() != other.fiber_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.fiber_dim(),
                got: other.fiber_dim(),
            });
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .zip(mu.atoms())
            .map(|((f, g), a)| f.dotc(g) * a.weight)
            .sum())
    }

    pub fn norm_sq(&self, mu: &AtomicMeasure) -> Result<f64> {
        Ok(self.inner(self, mu)?.re)
    }

    /// Flat coordinates `y_k = √w_k · f_k`, stacked atom by atom; the
    /// weighted inner product becomes the standard one.
    pub fn to_flat(&self, mu: &AtomicMeasure) -> Result<CVector> {
        self.check(mu)?;
        let r = self.fiber_dim();
        let mut y = CVector::zeros(mu.len() * r);
        for (k, (f, a)) in self.values.iter().zip(mu.atoms()).enumerate() {
            y.rows_mut(k * r, r)
                .copy_from(&(f * C64::new(a.weight.sqrt(), 0.0)));
        }
        Ok(y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Linear,
    Antilinear,
}

/// A pointwise field: `(T f)_k = M_k f_k` (linear) or `M_k conj(f_k)`
/// (antilinear).
#[derive(Debug, Clone, PartialEq)]
pub struct FieldOperator {
    pub matrices: Vec<CMatrix>,
    pub kind: FieldKind,
}

impl FieldOperator {
    pub fn new(matrices: Vec<CMatrix>, kind: FieldKind) -> Result<Self> {
        if let Some(first) = matrices.first() {
            let r = crate::linalg::require_square(first)?;
            for m in &matrices {
                let got = crate::linalg::require_square(m)?;
                if got != r {
                    return Err(Error::DimensionMismatch { expected: r, got });
                }
                crate::linalg::check_finite(m)?;
            }
        }
        Ok(Self { matrices, kind })
    }

    pub fn linear(matrices: Vec<CMatrix>) -> Result<Self> {
        Self::new(matrices, FieldKind::Linear)
    }

    /// The scalar field `φ(ξ_k)` (identity fiber of size `r` scaled).
    pub fn scalar(values: &[C64], r: usize) -> Self {
        Self {
            matrices: values
                .iter()
                .map(|&v| CMatrix::identity(r, r) * v)
                .collect(),
            kind: FieldKind::Linear,
        }
    }

    /// The coordinate function `ξ`, whose multiplier is `M_ξ`.
    pub fn coordinate(mu: &AtomicMeasure, r: usize) -> Self {
        let pts: Vec<C64> = mu.atoms().iter().map(Atom::point).collect();
        Self::scalar(&pts, r)
    }

    pub fn identity(atoms: usize, r: usize) -> Self {
        Self::scalar(&vec![C64::new(1.0, 0.0); atoms], r)
    }

    pub fn fiber_dim(&self) -> usize {
        self.matrices.first().map_or(0, |m| m.nrows())
    }

    /// The pointwise adjoint field `ξ ↦ M(ξ)*`.
    pub fn adjoint(&self) -> Self {
        match self.kind {
            FieldKind::Linear => Self {
                matrices: self.matrices.iter().map(|m| m.adjoint()).collect(),
                kind: FieldKind::Linear,
            },
            // (A conj(·))* = Aᵗ conj(·)
            FieldKind::Antilinear => Self {
                matrices: self.matrices.iter().map(|m| m.transpose()).collect(),
                kind: FieldKind::Antilinear,
            },
        }
    }

    pub fn apply(&self, f: &WeightedSpaceElement) -> Result<WeightedSpaceElement> {
        if f.values.len() != self.matrices.len() {
            return Err(Error::DimensionMismatch {
                expected: self.matrices.len(),
                got: f.values.len(),
            });
        }
        if f.fiber_dim() != self.fiber_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.fiber_dim(),
                got: f.fiber_dim(),
            });
        }
        let values = self
            .matrices
            .iter()
            .zip(&f.values)
            .map(|(m, v)| match self.kind {
                FieldKind::Linear => m * v,
                FieldKind::Antilinear => m * crate::linalg::conj_vec(v),
            })
            .collect();
        Ok(WeightedSpaceElement { values })
    }

    /// Largest pointwise unitarity defect.
    pub fn unitarity_defect(&self) -> f64 {
        self.matrices
            .iter()
            .map(|m| unitarity_defect(m).unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max)
    }

    /// Matrix of the multiplier in flat coordinates (block diagonal).
    pub fn to_flat_linear(&self) -> Result<CMatrix> {
        if self.kind != FieldKind::Linear {
            return Err(Error::InvalidParams("field is not linear".into()));
        }
        let r = self.fiber_dim();
        let n = self.matrices.len() * r;
        let mut out = CMatrix::zeros(n, n);
        for (k, m) in self.matrices.iter().enumerate() {
            out.view_mut((k * r, k * r), (r, r)).copy_from(m);
        }
        Ok(out)
    }
}

/// The antilinear field `(T f)_k = h_k^{1/2} · B_k · conj(f_{σ(k)})`.
///
/// `J#` is the case `B_k = A_J`; `M_U·J#` has `B_k = U_k·A_J`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectedField {
    pub measure: AtomicMeasure,
    pub rn: RadonNikodym,
    pub matrices: Vec<CMatrix>,
}

impl ReflectedField {
    pub fn fiber_dim(&self) -> usize {
        self.matrices.first().map_or(0, |m| m.nrows())
    }

    pub fn apply(&self, f: &WeightedSpaceElement) -> Result<WeightedSpaceElement> {
        f.check(&self.measure)?;
        if f.fiber_dim() != self.fiber_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.fiber_dim(),
                got: f.fiber_dim(),
            });
        }
        let values = (0..self.measure.len())
            .map(|k| {
                let s = self.rn.partner[k];
                &self.matrices[k]
                    * crate::linalg::conj_vec(&f.values[s])
                    * C64::new(self.rn.h[k].sqrt(), 0.0)
            })
            .collect();
        Ok(WeightedSpaceElement { values })
    }

    /// Left multiplication by a linear field: `M_U ∘ T`.
    pub fn premultiply(&self, field: &FieldOperator) -> Result<Self> {
        if field.kind != FieldKind::Linear {
            return Err(Error::InvalidParams(
                "multiplier field must be linear".into(),
            ));
        }
        if field.matrices.len() != self.matrices.len() || field.fiber_dim() != self.fiber_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.matrices.len() * self.fiber_dim(),
                got: field.matrices.len() * field.fiber_dim(),
            });
        }
        Ok(Self {
            measure: self.measure.clone(),
            rn: self.rn.clone(),
            matrices: field
                .matrices
                .iter()
                .zip(&self.matrices)
                .map(|(u, b)| u * b)
                .collect(),
        })
    }

    /// The operator in flat coordinates `y_k = √w_k f_k`: block `(k, σ(k))`
    /// is `√(w_k h_k / w_{σ(k)}) · B_k`.
    pub fn to_flat(&self) -> AntilinearOperator {
        let r = self.fiber_dim();
        let n = self.measure.len() * r;
        let mut a = CMatrix::zeros(n, n);
        let atoms = self.measure.atoms();
        for k in 0..self.measure.len() {
            let s = self.rn.partner[k];
            let factor = (atoms[k].weight * self.rn.h[k] / atoms[s].weight).sqrt();
            a.view_mut((k * r, s * r), (r, r))
                .copy_from(&(&self.matrices[k] * C64::new(factor, 0.0)));
        }
        AntilinearOperator::new(a).expect("finite square matrix")
    }
}

/// `J#` on `L²(μ, ℂʳ)` for a conjugation `J` on the fiber.
pub fn build_jsharp(
    mu: &AtomicMeasure,
    j: &AntilinearOperator,
    tol: Tolerance,
) -> Result<ReflectedField> {
    let rn = mu.radon_nikodym()?;
    let (ok, report) = is_conjugation(j, tol);
    if !ok {
        return Err(Error::NotAConjugation(format!(
            "fiber operator J (isometry defect {:.3e}, transpose defect {:.3e})",
            report.isometry_defect, report.transpose_defect
        )));
    }
    Ok(ReflectedField {
        measure: mu.clone(),
        rn,
        matrices: vec![j.matrix().clone(); mu.len()],
    })
}

/// Outcome of the `M_U·J#` criterion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldCriterion {
    pub holds: bool,
    /// `max_k ‖J U_k J − U_{σ(k)}*‖_F`.
    pub defect: f64,
}

/// `M_U·J#` is a conjugation iff `J U(ξ) J = U(ξ̄)*` at every atom.
pub fn mu_jsharp_conjugation_test(
    field: &FieldOperator,
    j: &AntilinearOperator,
    mu: &AtomicMeasure,
    tol: Tolerance,
) -> Result<FieldCriterion> {
    if field.kind != FieldKind::Linear {
        return Err(Error::InvalidParams("field must be linear".into()));
    }
    if field.matrices.len() != mu.len() {
        return Err(Error::DimensionMismatch {
            expected: mu.len(),
            got: field.matrices.len(),
        });
    }
    let r = field.fiber_dim();
    if !mu.is_empty() && r != j.dim() {
        return Err(Error::DimensionMismatch {
            expected: j.dim(),
            got: r,
        });
    }
    let unitary = field.unitarity_defect();
    if unitary > tol.threshold(r as f64) {
        return Err(Error::NotUnitary {
            what: "field".into(),
            defect: unitary,
        });
    }
    let rn = mu.radon_nikodym()?;
    let a = j.matrix();
    let defect = (0..mu.len())
        .map(|k| {
            let juj = a * conj(&field.matrices[k]) * conj(a);
            frobenius(&(juj - field.matrices[rn.partner[k]].adjoint()))
        })
        .fold(0.0, f64::max);
    Ok(FieldCriterion {
        holds: defect <= tol.threshold(r as f64),
        defect,
    })
}

/// A random unitary field satisfying `J U(ξ) J = U(ξ̄)*`.
///
/// On a conjugate pair `U_k` is Haar and `U_{σ(k)} = (J U_k J)*`; on a real
/// atom `U_k = Q·conj(A_J)` with `Q` a random symmetric unitary.
pub fn sample_commuting_field<R: Rng + ?Sized>(
    mu: &AtomicMeasure,
    j: &AntilinearOperator,
    rng: &mut R,
) -> Result<FieldOperator> {
    let rn = mu.radon_nikodym()?;
    let r = j.dim();
    let a = j.matrix();
    let mut matrices = vec![CMatrix::zeros(r, r); mu.len()];
    for k in 0..mu.len() {
        let s = rn.partner[k];
        if s == k {
            matrices[k] = symmetric_unitary_with(r, rng)? * conj(a);
        } else if s > k {
            let u = haar_unitary_with(r, rng)?;
            matrices[s] = (a * conj(&u) * conj(a)).adjoint();
            matrices[k] = u;
        }
    }
    FieldOperator::linear(matrices)
}

/// A random field in the class `J F(ξ) J = F(ξ̄)*` (not necessarily
/// unitary).
pub fn sample_constrained_field<R: Rng + ?Sized>(
    mu: &AtomicMeasure,
    j: &AntilinearOperator,
    rng: &mut R,
) -> Result<FieldOperator> {
    let rn = mu.radon_nikodym()?;
    let r = j.dim();
    let a = j.matrix();
    let mut matrices = vec![CMatrix::zeros(r, r); mu.len()];
    for k in 0..mu.len() {
        let s = rn.partner[k];
        if s == k {
            let g = crate::linalg::complex_gaussian(r, r, rng);
            let sym = (&g + g.transpose()).scale(0.5);
            matrices[k] = sym * conj(a);
        } else if s > k {
            let f = crate::linalg::complex_gaussian(r, r, rng);
            matrices[s] = (a * conj(&f) * conj(a)).adjoint();
            matrices[k] = f;
        }
    }
    FieldOperator::linear(matrices)
}

/// Location of one flat coordinate of an assembled model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Coordinate {
    pub component: usize,
    pub atom: usize,
    pub fiber: usize,
}

/// Direct sum of `M_U·J#` conjugations over the components of a
/// multiplicity model, in flat coordinates.
#[derive(Debug, Clone)]
pub struct AssembledModel {
    pub components: Vec<ReflectedField>,
    pub coordinates: Vec<Coordinate>,
    /// The conjugation on the direct sum.
    pub conjugation: AntilinearOperator,
    /// The coordinate multiplier `⊕ M_ξ` (diagonal).
    pub operator: CMatrix,
}

impl AssembledModel {
    pub fn dim(&self) -> usize {
        self.coordinates.len()
    }

    /// Transfers the conjugation to `ℂⁿ` along the eigenbasis of `U`: the
    /// model coordinate `(c, k, t)` is the `t`-th eigenvector of the
    /// cluster at atom `k` of component `c`.
    pub fn pull_back(
        &self,
        spectrum: &UnitarySpectrum,
        cluster_tol: f64,
    ) -> Result<AntilinearOperator> {
        let n = spectrum.dim();
        if n != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: self.dim(),
            });
        }
        let mut w = CMatrix::zeros(n, n);
        for (col, coord) in self.coordinates.iter().enumerate() {
            let atom = self.components[coord.component].measure.atoms()[coord.atom];
            let cl = spectrum.find(atom.point(), cluster_tol).ok_or_else(|| {
                Error::InvalidParams(format!(
                    "model atom at angle {} is not an eigenvalue",
                    atom.theta
                ))
            })?;
            if spectrum.clusters[cl].multiplicity != self.components[coord.component].fiber_dim() {
                return Err(Error::InvalidParams(format!(
                    "fiber dimension at angle {} does not match the eigenvalue multiplicity",
                    atom.theta
                )));
            }
            w.column_mut(col)
                .copy_from(&spectrum.vectors.column(spectrum.offset(cl) + coord.fiber));
        }
        AntilinearOperator::new(&w * self.conjugation.matrix() * w.transpose())
    }
}

/// Assembles `⊕ M_{U_c}·J_c#` over the components of `model`.
///
/// Refuses (no commuting conjugation exists) when a component measure is
/// not absolutely continuous with respect to its reflection; rejects fields
/// that violate the `M_U·J#` criterion.
pub fn assemble_model(
    model: &MultiplicityModel,
    js: &[AntilinearOperator],
    fields: &[FieldOperator],
    tol: Tolerance,
) -> Result<AssembledModel> {
    let m = model.components.len();
    if js.len() != m || fields.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: js.len().min(fields.len()),
        });
    }
    let mut components = Vec::with_capacity(m);
    let mut coordinates = Vec::new();
    let mut diag = Vec::new();
    for (c, comp) in model.components.iter().enumerate() {
        let mu = &comp.measure;
        mu.radon_nikodym()?;
        if js[c].dim() != comp.fiber_dim {
            return Err(Error::DimensionMismatch {
                expected: comp.fiber_dim,
                got: js[c].dim(),
            });
        }
        let criterion = mu_jsharp_conjugation_test(&fields[c], &js[c], mu, tol)?;
        if !criterion.holds {
            return Err(Error::InvalidParams(format!(
                "field of component {c} violates J U(ξ) J = U(ξ̄)* (defect {:.3e})",
                criterion.defect
            )));
        }
        let field = build_jsharp(mu, &js[c], tol)?.premultiply(&fields[c])?;
        for (k, atom) in mu.atoms().iter().enumerate() {
            for t in 0..comp.fiber_dim {
                coordinates.push(Coordinate {
                    component: c,
                    atom: k,
                    fiber: t,
                });
                diag.push(atom.point());
            }
        }
        components.push(field);
    }
    let n = coordinates.len();
    let mut a = CMatrix::zeros(n, n);
    let mut off = 0;
    for field in &components {
        let block = field.to_flat();
        let size = block.dim();
        a.view_mut((off, off), (size, size))
            .copy_from(block.matrix());
        off += size;
    }
    Ok(AssembledModel {
        components,
        coordinates,
        conjugation: AntilinearOperator::new(a)?,
        operator: crate::linalg::diagonal(&diag),
    })
}

/// Largest entry of `A` mapping the coordinate subspace `mask` outside
/// itself; zero iff the antilinear operator leaves the subspace invariant.
pub fn subspace_invariance_defect(a: &CMatrix, mask: &[bool]) -> f64 {
    let mut worst: f64 = 0.0;
    for j in 0..a.ncols() {
        if !mask[j] {
            continue;
        }
        for i in 0..a.nrows() {
            if !mask[i] {
                worst = worst.max(a[(i, j)].norm());
            }
        }
    }
    worst
}

/// Whether the assembled conjugation maps the coordinates supported on the
/// given `(component, atom)` pairs into themselves.
pub fn invariance_probe(model: &AssembledModel, atom_subset: &[(usize, usize)], tol: f64) -> bool {
    let mask: Vec<bool> = model
        .coordinates
        .iter()
        .map(|c| atom_subset.contains(&(c.component, c.atom)))
        .collect();
    subspace_invariance_defect(model.conjugation.matrix(), &mask) <= tol
}

/// A reference reflection density `h(ξ) = (5/3)^s · t^{2s}` with
/// `t = Arg ξ` and `s = sgn t`, used to exercise the reflected-measure
/// identities on an absolutely continuous example.
///
/// The sign is taken as zero at the fixed points `±1`, where the identity
/// `h(ξ)·h(ξ̄) = 1` forces `h = 1`.
pub fn power_law_density(xi: C64) -> f64 {
    let t = xi.im.atan2(xi.re);
    if xi.im == 0.0 {
        return 1.0;
    }
    if t > 0.0 {
        5.0 / 3.0 * t * t
    } else {
        3.0 / 5.0 / (t * t)
    }
}
