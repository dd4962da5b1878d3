//! Spectral analysis of unitary matrices: clustered diagonalization, the
//! self-duality test, the conjugate-pair block layout and the atomic
//! multiplicity model.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{
    ensure_unitary, frobenius, hermitian_eigen, orthonormalize_columns, require_square, CMatrix,
    Tolerance, C64,
};
use crate::measure::{Atom, AtomicMeasure};

/// Eigenvalues closer than this are treated as one cluster.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralTolerance {
    /// Tolerance on the unitarity of the input.
    pub input: Tolerance,
    pub cluster_tol: f64,
}

impl Default for SpectralTolerance {
    fn default() -> Self {
        Self {
            input: Tolerance::default(),
            cluster_tol: DEFAULT_CLUSTER_TOL,
        }
    }
}

impl From<Tolerance> for SpectralTolerance {
    fn from(input: Tolerance) -> Self {
        Self {
            input,
            cluster_tol: DEFAULT_CLUSTER_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cluster {
    pub eigenvalue: C64,
    pub multiplicity: usize,
}

/// Clustered eigenvalues with an orthonormal eigenbasis whose columns are
/// grouped in cluster order.
#[derive(Debug, Clone)]
pub struct UnitarySpectrum {
    pub clusters: Vec<Cluster>,
    pub vectors: CMatrix,
}

impl UnitarySpectrum {
    pub fn dim(&self) -> usize {
        self.vectors.nrows()
    }

    /// Column offset of cluster `c` inside `vectors`.
    pub fn offset(&self, c: usize) -> usize {
        self.clusters[..c].iter().map(|cl| cl.multiplicity).sum()
    }

    /// The eigenvalues repeated by multiplicity, in column order.
    pub fn diagonal(&self) -> Vec<C64> {
        self.clusters
            .iter()
            .flat_map(|cl| std::iter::repeat_n(cl.eigenvalue, cl.multiplicity))
            .collect()
    }

    pub fn reconstruct(&self) -> CMatrix {
        let d = self.diagonal();
        let mut scaled = self.vectors.clone();
        for (j, lam) in d.iter().enumerate() {
            for i in 0..scaled.nrows() {
                scaled[(i, j)] *= lam;
            }
        }
        scaled * self.vectors.adjoint()
    }

    /// Index of the cluster within `cluster_tol` of `z`, if any.
    pub fn find(&self, z: C64, cluster_tol: f64) -> Option<usize> {
        self.clusters
            .iter()
            .enumerate()
            .filter(|(_, cl)| (cl.eigenvalue - z).norm() <= cluster_tol)
            .min_by(|a, b| {
                (a.1.eigenvalue - z)
                    .norm()
                    .total_cmp(&(b.1.eigenvalue - z).norm())
            })
            .map(|(i, _)| i)
    }
}

fn angle(z: C64) -> f64 {
    z.im.atan2(z.re)
}

/// Splits sorted reals into runs whose consecutive gaps are `≤ tol`.
fn chain_groups(values: &[f64], tol: f64) -> Vec<std::ops::Range<usize>> {
    let mut groups = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] > tol {
            groups.push(start..i);
            start = i;
        }
    }
    groups
}

/// Rotates each column so that its first entry of largest modulus is real
/// and positive; makes eigenvectors of diagonal inputs exact basis vectors.
fn normalize_phases(m: &mut CMatrix) {
    for mut col in m.column_iter_mut() {
        let mut best = 0;
        for i in 1..col.len() {
            if col[i].norm() > col[best].norm() * (1.0 + 1e-12) {
                best = i;
            }
        }
        let pivot = col[best];
        if pivot.norm() > 0.0 {
            let phase = pivot.conj() / pivot.norm();
            for z in col.iter_mut() {
                *z *= phase;
            }
            col[best] = C64::new(col[best].re, 0.0);
        }
    }
}

/// Diagonalizes a unitary matrix and clusters its eigenvalues.
///
/// `U` is normal, so `H = (U + U*)/2` and `K = (U − U*)/(2i)` commute. The
/// eigenspaces of `H` are split by `K`, and the eigenvalue of each vector is
/// its Rayleigh quotient. Eigenvalues within `cluster_tol` on the circle are
/// merged (including across the branch cut at `−1`), cluster values are
/// averaged, and clusters within `cluster_tol` of `±1` are snapped there.
pub fn diagonalize_unitary(
    u: &CMatrix,
    tol: impl Into<SpectralTolerance>,
) -> Result<UnitarySpectrum> {
    let tol = tol.into();
    let n = require_square(u)?;
    if n == 0 {
        return Err(Error::EmptyDimension);
    }
    ensure_unitary(u, "U", tol.input.threshold(n as f64))?;
    let ct = tol.cluster_tol;
    let u_star = u.adjoint();
    let h = (u + &u_star).scale(0.5);
    let k = (u - &u_star) * C64::new(0.0, -0.5);

    // Step 1: eigenspaces of H.
    let (cos_values, cos_vectors) = hermitian_eigen(&h);
    let mut vectors = CMatrix::zeros(n, n);
    for group in chain_groups(&cos_values, ct) {
        let basis = cos_vectors.columns(group.start, group.len()).clone_owned();
        // Step 2: split by K inside the group.
        let k_small = basis.adjoint() * &k * &basis;
        let (_, y) = hermitian_eigen(&k_small);
        let z = &basis * y;
        vectors.columns_mut(group.start, group.len()).copy_from(&z);
    }

    // Rayleigh quotients, then clustering on the circle.
    let uz = u * &vectors;
    let mut estimates: Vec<(usize, C64)> = (0..n)
        .map(|j| {
            let q = vectors.column(j).dotc(&uz.column(j));
            (j, q / q.norm())
        })
        .collect();
    estimates.sort_by(|a, b| angle(a.1).total_cmp(&angle(b.1)));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for idx in 0..n {
        let close = idx > 0 && (estimates[idx].1 - estimates[idx - 1].1).norm() <= ct;
        if close {
            groups.last_mut().expect("group exists").push(idx);
        } else {
            groups.push(vec![idx]);
        }
    }
    if groups.len() > 1 && (estimates[n - 1].1 - estimates[0].1).norm() <= ct {
        // Wrap around the branch cut: merge the last run into the first.
        let last = groups.pop().expect("nonempty");
        let first = groups.remove(0);
        groups.insert(0, last.into_iter().chain(first).collect());
    }

    let mut clusters = Vec::with_capacity(groups.len());
    let mut w = CMatrix::zeros(n, n);
    let mut col = 0;
    let mut ordered: Vec<(C64, Vec<usize>)> = groups
        .into_iter()
        .map(|g| {
            let sum: C64 = g.iter().map(|&idx| estimates[idx].1).sum();
            let mut lam = sum / sum.norm();
            if lam.im.abs() <= ct {
                if (lam - 1.0).norm() <= ct {
                    lam = C64::new(1.0, 0.0);
                } else if (lam + 1.0).norm() <= ct {
                    lam = C64::new(-1.0, 0.0);
                }
            }
            (lam, g.into_iter().map(|idx| estimates[idx].0).collect())
        })
        .collect();
    ordered.sort_by(|a, b| angle(a.0).total_cmp(&angle(b.0)));
    for (lam, cols) in ordered {
        let mut block = CMatrix::zeros(n, cols.len());
        for (t, &j) in cols.iter().enumerate() {
            block.column_mut(t).copy_from(&vectors.column(j));
        }
        let mut block = orthonormalize_columns(&block);
        normalize_phases(&mut block);
        w.columns_mut(col, cols.len()).copy_from(&block);
        col += cols.len();
        clusters.push(Cluster {
            eigenvalue: lam,
            multiplicity: cols.len(),
        });
    }

    let spectrum = UnitarySpectrum {
        clusters,
        vectors: w,
    };
    let residual = frobenius(&(spectrum.reconstruct() - u));
    if residual > 1e-8 * n as f64 {
        return Err(Error::Tolerance(format!(
            "diagonalization residual {residual:.3e} exceeds {:.1e}; eigenvalues may be clustered \
             more tightly than the cluster tolerance {ct:.1e}",
            1e-8 * n as f64
        )));
    }
    Ok(spectrum)
}

/// Renders a unit complex number compactly (`i`, `-i`, `1`, `-1` when close).
pub fn format_unit(z: C64) -> String {
    const EPS: f64 = 1e-9;
    for (target, name) in [
        (C64::new(1.0, 0.0), "1"),
        (C64::new(-1.0, 0.0), "-1"),
        (C64::new(0.0, 1.0), "i"),
        (C64::new(0.0, -1.0), "-i"),
    ] {
        if (z - target).norm() <= EPS {
            return name.to_string();
        }
    }
    if z.im < 0.0 {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mismatch {
    pub eigenvalue: C64,
    pub multiplicity: usize,
    pub conjugate_multiplicity: usize,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "eigenvalue {} multiplicity {}, conjugate multiplicity {}",
            format_unit(self.eigenvalue),
            self.multiplicity,
            self.conjugate_multiplicity
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfDualReport {
    pub self_dual: bool,
    pub mismatches: Vec<Mismatch>,
}

impl SelfDualReport {
    pub fn describe(&self) -> String {
        self.mismatches
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join("; ")
    }
}

fn selfdual_report(spec: &UnitarySpectrum, cluster_tol: f64) -> SelfDualReport {
    let mismatches: Vec<Mismatch> = spec
        .clusters
        .iter()
        .filter_map(|cl| {
            let partner = spec
                .find(cl.eigenvalue.conj(), cluster_tol)
                .map_or(0, |p| spec.clusters[p].multiplicity);
            (partner != cl.multiplicity).then_some(Mismatch {
                eigenvalue: cl.eigenvalue,
                multiplicity: cl.multiplicity,
                conjugate_multiplicity: partner,
            })
        })
        .collect();
    SelfDualReport {
        self_dual: mismatches.is_empty(),
        mismatches,
    }
}

/// Tests whether `U` is unitarily equivalent to `U*`, i.e. whether every
/// eigenvalue has the same multiplicity as its conjugate.
pub fn check_selfdual(u: &CMatrix, tol: impl Into<SpectralTolerance>) -> Result<SelfDualReport> {
    let tol = tol.into();
    let spec = diagonalize_unitary(u, tol)?;
    Ok(selfdual_report(&spec, tol.cluster_tol))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConjugatePair {
    /// Eigenvalue with positive imaginary part; its partner is `conj(xi)`.
    pub xi: C64,
    pub multiplicity: usize,
}

/// Block structure of the canonical form: for each pair `ξ_j` a block
/// `ξ_j I` followed by `conj(ξ_j) I` (both of size `n_j`), then `I_ℓ`, then
/// `−I_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockLayout {
    pub pairs: Vec<ConjugatePair>,
    pub ell: usize,
    pub kay: usize,
}

impl BlockLayout {
    pub fn dim(&self) -> usize {
        2 * self.pairs.iter().map(|p| p.multiplicity).sum::<usize>() + self.ell + self.kay
    }

    /// Column offset of the `ξ_j` block; the `conj(ξ_j)` block follows it.
    pub fn pair_offset(&self, j: usize) -> usize {
        2 * self.pairs[..j]
            .iter()
            .map(|p| p.multiplicity)
            .sum::<usize>()
    }

    pub fn plus_offset(&self) -> usize {
        self.pair_offset(self.pairs.len())
    }

    pub fn minus_offset(&self) -> usize {
        self.plus_offset() + self.ell
    }

    /// Diagonal of the canonical form `U′`.
    pub fn diagonal(&self) -> Vec<C64> {
        let mut d = Vec::with_capacity(self.dim());
        for p in &self.pairs {
            d.extend(std::iter::repeat_n(p.xi, p.multiplicity));
            d.extend(std::iter::repeat_n(p.xi.conj(), p.multiplicity));
        }
        d.extend(std::iter::repeat_n(C64::new(1.0, 0.0), self.ell));
        d.extend(std::iter::repeat_n(C64::new(-1.0, 0.0), self.kay));
        d
    }
}

/// A unitary `W` and layout with `W*·U·W = U′`.
#[derive(Debug, Clone)]
pub struct CanonicalForm {
    pub w: CMatrix,
    pub layout: BlockLayout,
}

/// Brings a self-dual unitary to its canonical block form.
///
/// Pairs are sorted by increasing `Arg ξ_j ∈ (0, π)`; within each cluster
/// the eigenvectors are those of [`diagonalize_unitary`].
pub fn canonical_form(u: &CMatrix, tol: impl Into<SpectralTolerance>) -> Result<CanonicalForm> {
    let tol = tol.into();
    let spec = diagonalize_unitary(u, tol)?;
    let report = selfdual_report(&spec, tol.cluster_tol);
    if !report.self_dual {
        return Err(Error::NotSelfDual(report.describe()));
    }
    let n = spec.dim();
    let mut w = CMatrix::zeros(n, n);
    let mut col = 0;
    let place = |w: &mut CMatrix, c: usize, col: &mut usize| {
        let m = spec.clusters[c].multiplicity;
        let off = spec.offset(c);
        w.columns_mut(*col, m)
            .copy_from(&spec.vectors.columns(off, m));
        *col += m;
    };
    let mut pairs = Vec::new();
    let mut upper: Vec<usize> = (0..spec.clusters.len())
        .filter(|&c| {
            let z = spec.clusters[c].eigenvalue;
            z.im > 0.0 && z != C64::new(1.0, 0.0) && z != C64::new(-1.0, 0.0)
        })
        .collect();
    upper.sort_by(|&a, &b| {
        angle(spec.clusters[a].eigenvalue).total_cmp(&angle(spec.clusters[b].eigenvalue))
    });
    for &c in &upper {
        let xi = spec.clusters[c].eigenvalue;
        let partner = spec
            .find(xi.conj(), tol.cluster_tol)
            .expect("self-dual spectrum has conjugate partners");
        if partner == c {
            return Err(Error::Tolerance(format!(
                "eigenvalue {} is within the cluster tolerance of its conjugate but was not snapped to ±1",
                format_unit(xi)
            )));
        }
        place(&mut w, c, &mut col);
        place(&mut w, partner, &mut col);
        pairs.push(ConjugatePair {
            xi,
            multiplicity: spec.clusters[c].multiplicity,
        });
    }
    let mut ell = 0;
    let mut kay = 0;
    for (c, cl) in spec.clusters.iter().enumerate() {
        if cl.eigenvalue == C64::new(1.0, 0.0) {
            place(&mut w, c, &mut col);
            ell = cl.multiplicity;
        }
    }
    for (c, cl) in spec.clusters.iter().enumerate() {
        if cl.eigenvalue == C64::new(-1.0, 0.0) {
            place(&mut w, c, &mut col);
            kay = cl.multiplicity;
        }
    }
    debug_assert_eq!(col, n);
    Ok(CanonicalForm {
        w,
        layout: BlockLayout { pairs, ell, kay },
    })
}

/// `W·U′·W*` for a Haar-random `W`: a self-dual unitary with the spectrum
/// of `layout` planted.
pub fn planted_unitary<R: rand::Rng + ?Sized>(
    layout: &BlockLayout,
    rng: &mut R,
) -> Result<CMatrix> {
    let w = crate::linalg::haar_unitary_with(layout.dim(), rng)?;
    Ok(&w * crate::linalg::diagonal(&layout.diagonal()) * w.adjoint())
}

/// A component `(μ_k, k)` of the multiplicity model.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplicityComponent {
    pub measure: AtomicMeasure,
    pub fiber_dim: usize,
}

/// `U ≅ ⊕_k M_ξ ⊗ I_k` on `L²(μ_k, ℂᵏ)` with mutually singular `μ_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplicityModel {
    pub components: Vec<MultiplicityComponent>,
}

/// Groups the eigenvalues of `U` by multiplicity: `μ_k = Σ δ_λ` over the
/// clusters of multiplicity exactly `k`, with unit weights.
pub fn multiplicity_model(
    u: &CMatrix,
    tol: impl Into<SpectralTolerance>,
) -> Result<MultiplicityModel> {
    let spec = diagonalize_unitary(u, tol)?;
    let mut dims: Vec<usize> = spec.clusters.iter().map(|c| c.multiplicity).collect();
    dims.sort_unstable();
    dims.dedup();
    let components = dims
        .into_iter()
        .map(|k| {
            let atoms = spec
                .clusters
                .iter()
                .filter(|c| c.multiplicity == k)
                .map(|c| Atom::new(angle(c.eigenvalue), 1.0))
                .collect::<Vec<_>>();
            Ok(MultiplicityComponent {
                measure: AtomicMeasure::new(atoms)?,
                fiber_dim: k,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MultiplicityModel { components })
}

/// `e^{iθ}` with `θ` an exact multiple of `π/2` mapped to the exact value.
pub fn unit(theta: f64) -> C64 {
    let quarter = theta / (PI / 2.0);
    if quarter == quarter.round() {
        match (quarter.round() as i64).rem_euclid(4) {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        }
    } else {
        C64::from_polar(1.0, theta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, diagonal, haar_unitary, permutation_matrix};

    fn planted(values: &[C64], seed: u64) -> CMatrix {
        let w = haar_unitary(values.len(), seed).unwrap();
        &w * diagonal(values) * w.adjoint()
    }

    fn tol() -> SpectralTolerance {
        SpectralTolerance::default()
    }

    #[test]
    fn identity_is_one_cluster() {
        let s = diagonalize_unitary(&CMatrix::identity(3, 3), tol()).unwrap();
        assert_eq!(
            s.clusters,
            vec![Cluster {
                eigenvalue: c(1., 0.),
                multiplicity: 3
            }]
        );
        assert!(frobenius(&(s.vectors.adjoint() * &s.vectors - CMatrix::identity(3, 3))) < 1e-14);
    }

    #[test]
    fn diagonal_clusters_read_off() {
        let u = diagonal(&[c(0., 1.), c(0., 1.), c(-1., 0.)]);
        let s = diagonalize_unitary(&u, tol()).unwrap();
        let mut got: Vec<(String, usize)> = s
            .clusters
            .iter()
            .map(|c| (format_unit(c.eigenvalue), c.multiplicity))
            .collect();
        got.sort();
        assert_eq!(got, vec![("-1".into(), 1), ("i".into(), 2)]);
    }

    #[test]
    fn planted_spectrum_recovered() {
        let a = C64::from_polar(1.0, 0.4);
        let b = C64::from_polar(1.0, -2.9);
        let vals = [a, a, b, c(1., 0.), a, c(-1., 0.), c(-1., 0.)];
        for seed in 0..5 {
            let u = planted(&vals, seed);
            let s = diagonalize_unitary(&u, tol()).unwrap();
            assert_eq!(s.clusters.len(), 4);
            let mult = |z: C64| s.clusters[s.find(z, 1e-7).unwrap()].multiplicity;
            assert_eq!(mult(a), 3);
            assert_eq!(mult(b), 1);
            assert_eq!(mult(c(1., 0.)), 1);
            assert_eq!(mult(c(-1., 0.)), 2);
            assert!(frobenius(&(s.reconstruct() - &u)) < 1e-10);
        }
    }

    #[test]
    fn clusters_across_branch_cut() {
        let a = C64::from_polar(1.0, PI - 2e-8);
        let b = C64::from_polar(1.0, -PI + 2e-8);
        let u = planted(&[a, b, c(0., 1.)], 3);
        let s = diagonalize_unitary(&u, tol()).unwrap();
        assert_eq!(s.clusters.len(), 2);
        let minus = s.find(c(-1.0, 0.0), 1e-12).unwrap();
        assert_eq!(s.clusters[minus].multiplicity, 2);
    }

    #[test]
    fn rejects_non_unitary() {
        let m = diagonal(&[c(2., 0.), c(1., 0.)]);
        assert!(matches!(
            diagonalize_unitary(&m, tol()),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn selfdual_examples() {
        assert!(
            check_selfdual(&diagonal(&[c(0., 1.), c(0., -1.)]), tol())
                .unwrap()
                .self_dual
        );
        assert!(
            check_selfdual(&CMatrix::identity(5, 5), tol())
                .unwrap()
                .self_dual
        );
        let r = check_selfdual(&diagonal(&[c(0., 1.), c(0., 1.)]), tol()).unwrap();
        assert!(!r.self_dual);
        assert_eq!(
            r.mismatches,
            vec![Mismatch {
                eigenvalue: c(0., 1.),
                multiplicity: 2,
                conjugate_multiplicity: 0
            }]
        );
        assert_eq!(
            r.describe(),
            "eigenvalue i multiplicity 2, conjugate multiplicity 0"
        );
    }

    #[test]
    fn selfdual_invariant_under_adjoint() {
        let z = C64::from_polar(1.0, 1.1);
        for seed in 0..20u64 {
            let vals: Vec<C64> = match seed % 3 {
                0 => vec![z, z.conj(), c(1., 0.)],
                1 => vec![z, z, z.conj()],
                _ => vec![z, c(-1., 0.), c(-1., 0.)],
            };
            let u = planted(&vals, seed);
            let a = check_selfdual(&u, tol()).unwrap().self_dual;
            let b = check_selfdual(&u.adjoint(), tol()).unwrap().self_dual;
            assert_eq!(a, b);
            assert_eq!(a, seed % 3 == 0);
        }
    }

    #[test]
    fn canonical_form_orders_pairs() {
        let u = diagonal(&[c(0., -1.), c(0., 1.)]);
        let cf = canonical_form(&u, tol()).unwrap();
        assert_eq!(
            cf.layout.pairs,
            vec![ConjugatePair {
                xi: c(0., 1.),
                multiplicity: 1
            }]
        );
        assert_eq!((cf.layout.ell, cf.layout.kay), (0, 0));
        // W reorders to (i, −i): its columns are unit multiples of e₂, e₁.
        let p = permutation_matrix(&[1, 0]);
        for j in 0..2 {
            let overlap = p.column(j).dotc(&cf.w.column(j)).norm();
            assert!((overlap - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn canonical_form_real_blocks() {
        let u = diagonal(&[c(1., 0.), c(-1., 0.)]);
        let cf = canonical_form(&u, tol()).unwrap();
        assert!(cf.layout.pairs.is_empty());
        assert_eq!((cf.layout.ell, cf.layout.kay), (1, 1));
        assert!(
            frobenius(&(cf.w.map(|z| C64::new(z.norm(), 0.0)) - CMatrix::identity(2, 2))) < 1e-14
        );
    }

    #[test]
    fn canonical_form_planted_pairs() {
        let z = C64::from_polar(1.0, PI / 3.0);
        let u = planted(&[z, z.conj(), z, z.conj()], 9);
        let cf = canonical_form(&u, tol()).unwrap();
        assert_eq!(cf.layout.pairs.len(), 1);
        assert_eq!(cf.layout.pairs[0].multiplicity, 2);
        assert!((cf.layout.pairs[0].xi - z).norm() < 1e-10);
        let d = diagonal(&cf.layout.diagonal());
        assert!(frobenius(&(cf.w.adjoint() * &u * &cf.w - d)) < 1e-8);
    }

    #[test]
    fn canonical_form_refuses_non_selfdual() {
        let err = canonical_form(&diagonal(&[c(0., 1.), c(0., 1.)]), tol()).unwrap_err();
        assert_eq!(
            err.to_string(),
            "C_c(U) is empty: eigenvalue i multiplicity 2, conjugate multiplicity 0"
        );
    }

    #[test]
    fn planted_layout_recovered_exactly() {
        // Separations of at least 1e-4 between distinct eigenvalues.
        let angles = [1e-4, 0.5, 0.5 + 1e-4, 2.0, PI - 1e-4];
        for seed in 0..8u64 {
            let mut vals = Vec::new();
            let mut expected = Vec::new();
            for (t, &th) in angles.iter().enumerate() {
                let m = 1 + (seed as usize + t) % 3;
                let z = C64::from_polar(1.0, th);
                for _ in 0..m {
                    vals.push(z);
                    vals.push(z.conj());
                }
                expected.push(m);
            }
            let ell = (seed % 3) as usize;
            let kay = (seed % 2) as usize;
            vals.extend(std::iter::repeat_n(c(1., 0.), ell));
            vals.extend(std::iter::repeat_n(c(-1., 0.), kay));
            let u = planted(&vals, seed);
            let cf = canonical_form(&u, tol()).unwrap();
            assert_eq!(cf.layout.ell, ell);
            assert_eq!(cf.layout.kay, kay);
            let got: Vec<usize> = cf.layout.pairs.iter().map(|p| p.multiplicity).collect();
            assert_eq!(got, expected);
            for (p, &th) in cf.layout.pairs.iter().zip(&angles) {
                assert!((angle(p.xi) - th).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn multiplicity_model_examples() {
        let m = multiplicity_model(
            &diagonal(&[c(0., 1.), c(0., -1.), c(1., 0.), c(1., 0.)]),
            tol(),
        )
        .unwrap();
        assert_eq!(m.components.len(), 2);
        assert_eq!(m.components[0].fiber_dim, 1);
        let mut pts: Vec<String> = m.components[0]
            .measure
            .atoms()
            .iter()
            .map(|a| format_unit(a.point()))
            .collect();
        pts.sort();
        assert_eq!(pts, vec!["-i", "i"]);
        assert_eq!(m.components[1].fiber_dim, 2);
        assert_eq!(m.components[1].measure.atoms().len(), 1);
        assert_eq!(format_unit(m.components[1].measure.atoms()[0].point()), "1");

        let m = multiplicity_model(&CMatrix::identity(3, 3), tol()).unwrap();
        assert_eq!(m.components.len(), 1);
        assert_eq!(m.components[0].fiber_dim, 3);

        let m = multiplicity_model(&diagonal(&[c(0., 1.), c(0., 1.)]), tol()).unwrap();
        assert_eq!(m.components.len(), 1);
        assert_eq!(m.components[0].fiber_dim, 2);
        assert!(m.components[0].measure.radon_nikodym().is_err());
    }

    #[test]
    fn model_components_are_mutually_singular() {
        let z = C64::from_polar(1.0, 0.7);
        let u = planted(
            &[z, z.conj(), z, c(1., 0.), c(-1., 0.), c(-1., 0.), c(0., 1.)],
            4,
        );
        let m = multiplicity_model(&u, tol()).unwrap();
        for (a, ca) in m.components.iter().enumerate() {
            for cb in &m.components[a + 1..] {
                assert_ne!(ca.fiber_dim, cb.fiber_dim);
                let meet = ca.measure.meet(&cb.measure);
                assert!(meet.atoms().is_empty());
            }
        }
    }

    #[test]
    fn existence_dichotomy_via_model() {
        // A commuting conjugation exists for the model iff every component
        // is reflection-absolutely-continuous iff U is self-dual.
        let z = C64::from_polar(1.0, 1.3);
        let y = C64::from_polar(1.0, 2.2);
        for seed in 0..50u64 {
            let mut vals = vec![z, c(1., 0.)];
            if seed % 2 == 0 {
                vals.push(z.conj());
            } else {
                vals.push(y);
            }
            if seed % 5 == 0 {
                vals.extend([y, y, y.conj(), y.conj()]);
            }
            let u = planted(&vals, seed);
            let selfdual = check_selfdual(&u, tol()).unwrap().self_dual;
            let model = multiplicity_model(&u, tol()).unwrap();
            let all_ac = model
                .components
                .iter()
                .all(|comp| comp.measure.radon_nikodym().is_ok());
            assert_eq!(selfdual, all_ac, "seed {seed}");
            assert_eq!(selfdual, seed % 2 == 0, "seed {seed}");
        }
    }

    #[test]
    fn format_unit_examples() {
        assert_eq!(format_unit(c(0., 1.)), "i");
        assert_eq!(format_unit(c(-1., 0.)), "-1");
        assert_eq!(format_unit(c(0.6, -0.8)), "0.6-0.8i");
        assert_eq!(format_unit(c(0.6, 0.8)), "0.6+0.8i");
    }
}
