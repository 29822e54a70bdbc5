//! Biorthogonal spectral decomposition of (generally non-normal)
//! superoperators, eigenvalue grouping, and reduced resolvents.
//!
//! Right eigenelements come from the eigensolver; left eigenelements are
//! rows of the inverse of the right-eigenvector matrix, so biorthonormality
//! Tr{ρ̌' ρ} = δ holds by construction up to the conditioning of the
//! eigenbasis. The stationary eigenelement (λ = 0, when present and
//! nondegenerate) is rescaled to unit trace; its left partner then equals
//! the identity for a trace-preserving generator.

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::Mat;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::operator::{Operator, Space};
use crate::superop::{vec_index, SuperOp};
use crate::tolerances;

/// A cluster of eigenvalues closer than the grouping tolerance.
#[derive(Debug, Clone)]
pub struct EigenGroup {
    /// Representative value (mean of the members).
    pub value: C64,
    /// Indices into the eigenvalue/eigenelement lists.
    pub members: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    space: Space,
    eigenvalues: Vec<C64>,
    right: Vec<Operator>,
    left: Vec<Operator>,
    groups: Vec<EigenGroup>,
    grouping_tol: f64,
}

impl SpectralDecomposition {
    pub fn space(&self) -> Space {
        self.space
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[C64] {
        &self.eigenvalues
    }

    pub fn right(&self, k: usize) -> &Operator {
        &self.right[k]
    }

    pub fn left(&self, k: usize) -> &Operator {
        &self.left[k]
    }

    pub fn groups(&self) -> &[EigenGroup] {
        &self.groups
    }

    pub fn grouping_tol(&self) -> f64 {
        self.grouping_tol
    }

    /// Index of the group whose representative value is within the grouping
    /// tolerance of `value`.
    pub fn group_near(&self, value: C64) -> Option<usize> {
        self.groups
            .iter()
            .position(|g| (g.value - value).norm() <= self.grouping_tol)
    }

    /// Expansion coefficient Tr{ρ̌_k X}.
    pub fn coefficient(&self, k: usize, x: &Operator) -> C64 {
        self.left[k].trace_with(x)
    }

    /// Projector onto the listed groups: X ↦ Σ ρ_k Tr{ρ̌_k X}.
    pub fn project(&self, groups: &[usize], x: &Operator) -> Operator {
        let mut out = Operator::zeros(self.space);
        for &g in groups {
            for &k in &self.groups[g].members {
                let c = self.coefficient(k, x);
                out = out.add(&self.right[k].scale(c));
            }
        }
        out
    }

    /// Apply (z − L)⁻¹ restricted to the complement of the excluded groups.
    ///
    /// Eigencomponents inside excluded groups are annihilated. A non-excluded
    /// eigenvalue within the grouping tolerance of `z` is tolerated only when
    /// the operand has no weight on it (relative to ‖X‖); otherwise the
    /// resolvent is singular.
    pub fn resolvent_apply(
        &self,
        z: C64,
        exclude: &[usize],
        x: &Operator,
    ) -> Result<Operator> {
        let scale = x.norm_fro().max(f64::MIN_POSITIVE);
        let mut out = Operator::zeros(self.space);
        for (g, group) in self.groups.iter().enumerate() {
            if exclude.contains(&g) {
                continue;
            }
            for &k in &group.members {
                let c = self.coefficient(k, x);
                let gap = z - self.eigenvalues[k];
                if gap.norm() <= self.grouping_tol {
                    if c.norm() <= 1e-10 * scale {
                        continue; // no weight on the colliding direction
                    }
                    return Err(Error::Singularity {
                        z,
                        eigenvalue: self.eigenvalues[k],
                        context: format!(
                            "operand has weight {:.3e} on a non-excluded eigenvalue",
                            c.norm()
                        ),
                    });
                }
                out = out.add(&self.right[k].scale(c / gap));
            }
        }
        Ok(out)
    }

    /// Group-inverse application: L⁻¹ restricted to the complement of the
    /// λ = 0 group (errors if there is no zero group).
    pub fn group_inverse_apply(&self, x: &Operator) -> Result<Operator> {
        let zero = self.group_near(C64::new(0.0, 0.0)).ok_or_else(|| {
            Error::NumericalFailure("group inverse requested but no zero eigenvalue".into())
        })?;
        self.resolvent_apply(C64::new(0.0, 0.0), &[zero], x)
            .map(|y| y.scale(C64::new(-1.0, 0.0))) // (0 - L)^{-1} = -L^{-1}
    }
}

fn default_grouping_tol(eigenvalues: &[C64]) -> f64 {
    let radius = eigenvalues.iter().map(|l| l.norm()).fold(0.0f64, f64::max);
    (tolerances::GROUPING_REL * radius).max(1e-13)
}

fn cluster(eigenvalues: &[C64], tol: f64) -> Vec<EigenGroup> {
    let n = eigenvalues.len();
    // union-find over pairs within tol
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut i = i;
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (eigenvalues[i] - eigenvalues[j]).norm() <= tol {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }
    let mut groups: Vec<EigenGroup> = Vec::new();
    let mut root_to_group: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        match root_to_group[r] {
            Some(g) => groups[g].members.push(i),
            None => {
                root_to_group[r] = Some(groups.len());
                groups.push(EigenGroup {
                    value: C64::new(0.0, 0.0),
                    members: vec![i],
                });
            }
        }
    }
    for g in &mut groups {
        let sum: C64 = g.members.iter().map(|&k| eigenvalues[k]).sum();
        g.value = sum / g.members.len() as f64;
    }
    groups.sort_by(|a, b| {
        (a.value.re, a.value.im)
            .partial_cmp(&(b.value.re, b.value.im))
            .unwrap()
    });
    groups
}

/// Full biorthogonal decomposition of a superoperator.
///
/// `grouping_tol = None` uses the default 1e-8 · (spectral radius).
pub fn spectral_decompose(
    l: &SuperOp,
    grouping_tol: Option<f64>,
) -> Result<SpectralDecomposition> {
    let space = l.space();
    let d = space.dim();
    let d2 = d * d;
    let evd = l.mat().eigen().map_err(|e| {
        Error::NumericalFailure(format!("eigensolver failed on {d2}x{d2} superoperator: {e:?}"))
    })?;
    let vals = evd.S();
    let vmat = evd.U();
    let eigenvalues: Vec<C64> = (0..d2).map(|k| vals[k]).collect();
    if eigenvalues.iter().any(|l| !l.re.is_finite() || !l.im.is_finite()) {
        return Err(Error::NumericalFailure(
            "eigensolver returned non-finite eigenvalues".into(),
        ));
    }
    let tol = grouping_tol.unwrap_or_else(|| default_grouping_tol(&eigenvalues));
    if tol <= 0.0 {
        return Err(Error::InvalidArgument("grouping_tol must be > 0".into()));
    }

    // Left eigenelements from the inverse of the right-eigenvector matrix.
    let lu = PartialPivLu::new(vmat);
    let wmat: Mat<C64> = lu.solve(Mat::<C64>::identity(d2, d2));
    // Guard against a defective (non-diagonalizable) eigenbasis: V W must
    // reproduce the identity AND the pair must reconstruct an arbitrary
    // operator; a near-Jordan basis fails the second even when it is
    // formally invertible.
    let inv_resid = (vmat * &wmat - Mat::<C64>::identity(d2, d2)).norm_max();
    let recon_resid = {
        // deterministic probe vector
        let mut state = 0x243F6A8885A308D3u64;
        let mut next = move || {
            state = state.wrapping_add(0x9E3779B97F4A7C15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
            (z ^ (z >> 31)) as f64 / u64::MAX as f64 - 0.5
        };
        let probe = Mat::<C64>::from_fn(d2, 1, |_, _| C64::new(next(), next()));
        let coeffs = &wmat * &probe;
        let recon = vmat * &coeffs;
        (&recon - &probe).norm_max() / probe.norm_max()
    };
    let resid = inv_resid.max(recon_resid);
    if !resid.is_finite() || resid > tolerances::COMPLETENESS {
        let mut worst = (0usize, 1usize, f64::INFINITY);
        for i in 0..d2 {
            for j in (i + 1)..d2 {
                let gap = (eigenvalues[i] - eigenvalues[j]).norm();
                if gap < worst.2 {
                    worst = (i, j, gap);
                }
            }
        }
        return Err(Error::Defective {
            cluster: eigenvalues[worst.0],
            detail: format!(
                "eigenbasis residual {:.3e} (inverse {:.3e}, reconstruction {:.3e}); \
                 closest eigenvalues {} and {} (gap {:.3e})",
                resid, inv_resid, recon_resid, eigenvalues[worst.0], eigenvalues[worst.1], worst.2
            ),
        });
    }

    let mut right: Vec<Operator> = (0..d2)
        .map(|k| Operator::from_fn(space, |r, c| vmat[(vec_index(d, r, c), k)]))
        .collect();
    // Tr{ρ̌ X} = Σ_{r,c} W[k, c·d + r] X[r, c], so ρ̌_k[i, j] = W[k, i·d + j].
    let mut left: Vec<Operator> = (0..d2)
        .map(|k| Operator::from_fn(space, |i, j| wmat[(k, vec_index(d, j, i))]))
        .collect();

    let groups = cluster(&eigenvalues, tol);

    // Normalize the stationary eigenelement to unit trace when it is unique.
    if let Some(g) = groups
        .iter()
        .position(|g| g.value.norm() <= tol && g.members.len() == 1)
    {
        let k = groups[g].members[0];
        let tr = right[k].trace();
        if tr.norm() > 1e-8 {
            right[k] = right[k].scale(C64::new(1.0, 0.0) / tr);
            left[k] = left[k].scale(tr);
        }
    }

    Ok(SpectralDecomposition {
        space,
        eigenvalues,
        right,
        left,
        groups,
        grouping_tol: tol,
    })
}

/// Materialized reduced resolvent (z − L)⁻¹ on the complement of the
/// excluded eigenvalue groups: Σ_{λ∉excluded} (z − λ)⁻¹ ρ^λ Tr{ρ̌^λ ·}.
///
/// Every eigenvalue within the grouping tolerance of `z` must belong to an
/// excluded group.
pub fn reduced_resolvent(
    decomp: &SpectralDecomposition,
    z: C64,
    exclude: &[usize],
) -> Result<SuperOp> {
    let d = decomp.space.dim();
    let d2 = d * d;
    for (g, group) in decomp.groups.iter().enumerate() {
        if exclude.contains(&g) {
            continue;
        }
        for &k in &group.members {
            let gap = z - decomp.eigenvalues[k];
            if gap.norm() <= decomp.grouping_tol {
                return Err(Error::Singularity {
                    z,
                    eigenvalue: decomp.eigenvalues[k],
                    context: "eigenvalue at z is not in the excluded set".into(),
                });
            }
        }
    }
    let mut mat: Mat<C64> = Mat::zeros(d2, d2);
    for (g, group) in decomp.groups.iter().enumerate() {
        if exclude.contains(&g) {
            continue;
        }
        for &k in &group.members {
            let w = C64::new(1.0, 0.0) / (z - decomp.eigenvalues[k]);
            let rk = &decomp.right[k];
            let lk = &decomp.left[k];
            for col in 0..d2 {
                // column index encodes the operand entry X[r, c]
                let (r, c) = (col % d, col / d);
                let lkv = lk.get(c, r); // Tr{ρ̌ X} pairs ρ̌[c, r] with X[r, c]
                if lkv.norm() == 0.0 {
                    continue;
                }
                for row in 0..d2 {
                    let (i, j) = (row % d, row / d);
                    mat[(row, col)] += w * rk.get(i, j) * lkv;
                }
            }
        }
    }
    SuperOp::new(decomp.space, mat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::fock_operators;
    use crate::superop::commutator_superop;

    /// L_E on the truncated Fock space: eigenvalues iℓν with multiplicity
    /// (n_max + 1) − |ℓ|.
    #[test]
    fn harmonic_commutator_spectrum() {
        let n_max = 3;
        let (a, a_dag, _) = fock_operators(n_max).unwrap();
        let h = a_dag.matmul(&a);
        let le = commutator_superop(&h);
        let decomp = spectral_decompose(&le, Some(1e-9)).unwrap();
        let mut mult = std::collections::BTreeMap::new();
        for l in decomp.eigenvalues() {
            assert!(l.re.abs() < 1e-10);
            let ell = l.im.round() as i64;
            assert!((l.im - ell as f64).abs() < 1e-10);
            *mult.entry(ell).or_insert(0usize) += 1;
        }
        for ell in -(n_max as i64)..=(n_max as i64) {
            assert_eq!(
                mult.get(&ell).copied().unwrap_or(0),
                n_max + 1 - ell.unsigned_abs() as usize,
                "multiplicity at l = {ell}"
            );
        }
    }

    #[test]
    fn resolvent_identity_far_from_spectrum() {
        let n_max = 2;
        let (a, a_dag, _) = fock_operators(n_max).unwrap();
        let h = a_dag.matmul(&a);
        let le = commutator_superop(&h);
        let decomp = spectral_decompose(&le, Some(1e-9)).unwrap();
        let z = C64::new(0.7, 0.4);
        let r = reduced_resolvent(&decomp, z, &[]).unwrap();
        let x = crate::testutil::random_operator(le.space(), 7);
        let y = r.apply(&x);
        // (z - L) y = x
        let zy = y.scale(z).sub(&le.apply(&y));
        assert!(zy.sub(&x).norm_max() < tolerances::COMPLETENESS);
    }

    #[test]
    fn resolvent_annihilates_excluded_and_reconstructs_rest() {
        let n_max = 2;
        let (a, a_dag, _) = fock_operators(n_max).unwrap();
        let h = a_dag.matmul(&a);
        let le = commutator_superop(&h);
        let decomp = spectral_decompose(&le, Some(1e-9)).unwrap();
        let zero = decomp.group_near(C64::new(0.0, 0.0)).unwrap();
        let z = C64::new(0.0, 0.0);
        let r = reduced_resolvent(&decomp, z, &[zero]).unwrap();
        let x = crate::testutil::random_operator(le.space(), 19);
        // R (z - L) = 1 - P_excluded on random X
        let zx = x.scale(z).sub(&le.apply(&x));
        let lhs = r.apply(&zx);
        let rhs = x.sub(&decomp.project(&[zero], &x));
        assert!(lhs.sub(&rhs).norm_max() < tolerances::COMPLETENESS);
        // annihilates the excluded eigenspace
        let px = decomp.project(&[zero], &x);
        assert!(r.apply(&px).norm_max() < tolerances::COMPLETENESS);
    }

    #[test]
    fn biorthonormality_and_completeness() {
        let n_max = 2;
        let (a, a_dag, _) = fock_operators(n_max).unwrap();
        let h = a_dag.matmul(&a);
        let le = commutator_superop(&h);
        let decomp = spectral_decompose(&le, Some(1e-9)).unwrap();
        let n = decomp.len();
        for i in 0..n {
            for j in 0..n {
                let t = decomp.left(i).trace_with(decomp.right(j));
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (t - C64::new(expect, 0.0)).norm() < tolerances::BIORTHONORMALITY,
                    "Tr(check_rho_{i} rho_{j}) = {t}"
                );
            }
        }
        let x = crate::testutil::random_operator(le.space(), 33);
        let mut recon = Operator::zeros(le.space());
        for k in 0..n {
            recon = recon.add(&decomp.right(k).scale(decomp.coefficient(k, &x)));
        }
        assert!(recon.sub(&x).norm_max() < tolerances::COMPLETENESS);
    }

    #[test]
    fn defective_cluster_is_reported() {
        // a Jordan block has no complete eigenbasis
        let space = Space::Motional { n_max: 1 };
        let mut mat = Mat::<C64>::zeros(4, 4);
        mat[(0, 1)] = C64::new(1.0, 0.0);
        mat[(2, 3)] = C64::new(1.0, 0.0);
        mat[(2, 2)] = C64::new(2.0, 0.0);
        mat[(3, 3)] = C64::new(2.0, 0.0);
        let l = SuperOp::new(space, mat).unwrap();
        match spectral_decompose(&l, None) {
            Err(Error::Defective { cluster, .. }) => {
                assert!(cluster.norm() < 0.5 || (cluster - C64::new(2.0, 0.0)).norm() < 0.5);
            }
            other => panic!("expected a defective-cluster error, got {other:?}"),
        }
    }

    #[test]
    fn singularity_is_reported() {
        let n_max = 2;
        let (a, a_dag, _) = fock_operators(n_max).unwrap();
        let h = a_dag.matmul(&a);
        let le = commutator_superop(&h);
        let decomp = spectral_decompose(&le, Some(1e-9)).unwrap();
        // z = i nu sits on the spectrum and is not excluded
        let err = reduced_resolvent(&decomp, C64::new(0.0, 1.0), &[]);
        assert!(matches!(err, Err(Error::Singularity { .. })));
    }
}
