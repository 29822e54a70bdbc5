//! Zero-order structure on the composite (internal ⊗ motional) space.
//!
//! At zero order in the Lamb-Dicke expansion the Liouvillian decouples,
//! L₀ = L_E + L_I, so its eigenvalues are λ_I + iℓν and its projectors
//! factorize. The external factor is handled analytically: an operator block
//! connecting Fock states ⟨·,n| … |·,m⟩ is an eigenvector of L_E with
//! eigenvalue i(m−n)ν. Projectors and reduced resolvents of L₀ therefore
//! reduce to 3×3 internal operations per Fock block — no diagonalization on
//! the composite space is ever needed.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::ExpansionOperators;
use crate::operator::{Operator, Space};
use crate::spectral::SpectralDecomposition;

/// Handle for zero-order projections and resolvents on the composite space.
pub struct ZeroOrder<'a> {
    internal: &'a SpectralDecomposition,
    n_max: usize,
}

/// A zero-order eigenvalue group label: (internal group index, external ℓ).
pub type GroupLabel = (usize, i64);

impl<'a> ZeroOrder<'a> {
    pub fn new(exp: &'a ExpansionOperators) -> Self {
        Self {
            internal: &exp.internal_decomp,
            n_max: exp.n_max(),
        }
    }

    pub fn space(&self) -> Space {
        Space::Composite { n_max: self.n_max }
    }

    pub fn internal(&self) -> &SpectralDecomposition {
        self.internal
    }

    fn nm(&self) -> usize {
        self.n_max + 1
    }

    fn block(&self, x: &Operator, n: usize, m: usize) -> [C64; 9] {
        let nm = self.nm();
        let mut b = [C64::new(0.0, 0.0); 9];
        for i in 0..3 {
            for j in 0..3 {
                b[3 * i + j] = x.get(i * nm + n, j * nm + m);
            }
        }
        b
    }

    fn add_block(&self, out: &mut Operator, n: usize, m: usize, b: &[C64; 9]) {
        let nm = self.nm();
        for i in 0..3 {
            for j in 0..3 {
                let v = out.get(i * nm + n, j * nm + m) + b[3 * i + j];
                out.set(i * nm + n, j * nm + m, v);
            }
        }
    }

    fn block_trace_with(left: &Operator, b: &[C64; 9]) -> C64 {
        // Tr{ρ̌ B} with B a 3×3 block in row-major [i·3 + j] layout
        let mut t = C64::new(0.0, 0.0);
        for i in 0..3 {
            for j in 0..3 {
                t += left.get(i, j) * b[3 * j + i];
            }
        }
        t
    }

    /// L_E X: block (n, m) picks up the factor −i(n − m)ν.
    pub fn apply_le(&self, x: &Operator) -> Operator {
        let nm = self.nm();
        Operator::from_fn(self.space(), |r, c| {
            let (n, m) = (r % nm, c % nm);
            let f = C64::new(0.0, -((n as f64) - (m as f64)));
            f * x.get(r, c)
        })
    }

    /// L_I (internal Liouvillian) applied blockwise on the composite space.
    pub fn apply_li(&self, x: &Operator, l_internal: &crate::superop::SuperOp) -> Operator {
        let nm = self.nm();
        let mut out = Operator::zeros(self.space());
        let lm = l_internal.mat();
        for n in 0..nm {
            for m in 0..nm {
                let b = self.block(x, n, m);
                // vec index (col-stacked, d = 3): c·3 + r
                let mut y = [C64::new(0.0, 0.0); 9];
                for row in 0..9 {
                    let mut acc = C64::new(0.0, 0.0);
                    for col in 0..9 {
                        let (rr, cc) = (col % 3, col / 3);
                        acc += lm[(row, col)] * b[3 * rr + cc];
                    }
                    y[row] = acc;
                }
                let mut yb = [C64::new(0.0, 0.0); 9];
                for i in 0..3 {
                    for j in 0..3 {
                        yb[3 * i + j] = y[j * 3 + i];
                    }
                }
                self.add_block(&mut out, n, m, &yb);
            }
        }
        out
    }

    /// All zero-order groups (internal group, ℓ) whose eigenvalue
    /// λ_I + iℓν lies within the grouping tolerance of `lambda0`.
    pub fn groups_at(&self, lambda0: C64) -> Vec<GroupLabel> {
        let tol = self.internal.grouping_tol().max(1e-10);
        let mut out = Vec::new();
        for ell in -(self.n_max as i64)..=(self.n_max as i64) {
            let shift = C64::new(0.0, ell as f64);
            for (g, group) in self.internal.groups().iter().enumerate() {
                if (group.value + shift - lambda0).norm() <= tol {
                    out.push((g, ell));
                }
            }
        }
        out
    }

    /// Zero-order projector onto the listed groups:
    /// X ↦ Σ (P_I^{λ_I} ⊗ P_E^{iℓν}) X.
    pub fn project(&self, pairs: &[GroupLabel], x: &Operator) -> Operator {
        let nm = self.nm();
        let mut out = Operator::zeros(self.space());
        for &(g, ell) in pairs {
            for n in 0..nm {
                let m = n as i64 + ell;
                if m < 0 || m >= nm as i64 {
                    continue;
                }
                let m = m as usize;
                let b = self.block(x, n, m);
                let mut proj = [C64::new(0.0, 0.0); 9];
                for &k in &self.internal.groups()[g].members {
                    let c = Self::block_trace_with(self.internal.left(k), &b);
                    let rk = self.internal.right(k);
                    for i in 0..3 {
                        for j in 0..3 {
                            proj[3 * i + j] += c * rk.get(i, j);
                        }
                    }
                }
                self.add_block(&mut out, n, m, &proj);
            }
        }
        out
    }

    /// Reduced resolvent (z − L₀)⁻¹ on the complement of the excluded
    /// zero-order groups, applied to X.
    ///
    /// Eigencomponents inside excluded groups are annihilated. A collision
    /// of z with a non-excluded eigenvalue is tolerated only when the
    /// operand carries no weight there.
    pub fn resolvent(
        &self,
        z: C64,
        exclude: &[GroupLabel],
        x: &Operator,
    ) -> Result<Operator> {
        let nm = self.nm();
        let tol = self.internal.grouping_tol().max(1e-10);
        let scale = x.norm_fro().max(f64::MIN_POSITIVE);
        let mut out = Operator::zeros(self.space());
        for n in 0..nm {
            for m in 0..nm {
                let ell = m as i64 - n as i64;
                let b = self.block(x, n, m);
                if b.iter().all(|v| v.norm() == 0.0) {
                    continue;
                }
                let zl = z - C64::new(0.0, ell as f64);
                let mut res = [C64::new(0.0, 0.0); 9];
                for (g, group) in self.internal.groups().iter().enumerate() {
                    if exclude.contains(&(g, ell)) {
                        continue;
                    }
                    for &k in &group.members {
                        let c = Self::block_trace_with(self.internal.left(k), &b);
                        let gap = zl - self.internal.eigenvalues()[k];
                        if gap.norm() <= tol {
                            if c.norm() <= 1e-10 * scale {
                                continue;
                            }
                            return Err(Error::Singularity {
                                z,
                                eigenvalue: self.internal.eigenvalues()[k]
                                    + C64::new(0.0, ell as f64),
                                context: format!(
                                    "zero-order eigenvalue collision in the ℓ = {ell} sector \
                                     with operand weight {:.3e}",
                                    c.norm()
                                ),
                            });
                        }
                        let w = c / gap;
                        let rk = self.internal.right(k);
                        for i in 0..3 {
                            for j in 0..3 {
                                res[3 * i + j] += w * rk.get(i, j);
                            }
                        }
                    }
                }
                self.add_block(&mut out, n, m, &res);
            }
        }
        Ok(out)
    }
}
