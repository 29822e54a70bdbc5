//! Labeled dense operators on the internal, motional, and composite spaces.
//!
//! Units: ħ = 1, trap frequency ν = 1, oscillator length x₀ = 1. The
//! internal basis is {|1⟩, |2⟩, |3⟩} (two ground states and the excited
//! state); the motional basis is the truncated Fock ladder {|0⟩ … |n_max⟩}.
//! Composite kets are ordered internal-major: index = i·(n_max+1) + n.

use faer::Mat;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Internal basis index of the ground state |1⟩.
pub const G1: usize = 0;
/// Internal basis index of the ground state |2⟩.
pub const G2: usize = 1;
/// Internal basis index of the excited state |3⟩.
pub const EXC: usize = 2;

/// Hilbert space label carried by every operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    /// Three-level internal space {|1⟩, |2⟩, |3⟩}.
    Internal,
    /// Truncated Fock space {|0⟩ … |n_max⟩}.
    Motional { n_max: usize },
    /// Internal ⊗ motional.
    Composite { n_max: usize },
}

impl Space {
    pub fn dim(&self) -> usize {
        match *self {
            Space::Internal => 3,
            Space::Motional { n_max } => n_max + 1,
            Space::Composite { n_max } => 3 * (n_max + 1),
        }
    }
}

/// Dense complex matrix labeled by the space it acts on.
#[derive(Debug, Clone)]
pub struct Operator {
    space: Space,
    mat: Mat<C64>,
}

impl Operator {
    pub fn new(space: Space, mat: Mat<C64>) -> Result<Self> {
        let d = space.dim();
        if mat.nrows() != d || mat.ncols() != d {
            return Err(Error::InvalidArgument(format!(
                "operator matrix is {}x{}, space dimension is {}",
                mat.nrows(),
                mat.ncols(),
                d
            )));
        }
        Ok(Self { space, mat })
    }

    pub fn zeros(space: Space) -> Self {
        let d = space.dim();
        Self {
            space,
            mat: Mat::zeros(d, d),
        }
    }

    pub fn identity(space: Space) -> Self {
        let d = space.dim();
        Self {
            space,
            mat: Mat::from_fn(d, d, |i, j| {
                if i == j {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            }),
        }
    }

    pub fn from_fn(space: Space, f: impl Fn(usize, usize) -> C64) -> Self {
        let d = space.dim();
        Self {
            space,
            mat: Mat::from_fn(d, d, f),
        }
    }

    /// |i⟩⟨j| on the given space.
    pub fn dyad(space: Space, i: usize, j: usize) -> Self {
        let mut op = Self::zeros(space);
        op.mat[(i, j)] = C64::new(1.0, 0.0);
        op
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn mat(&self) -> &Mat<C64> {
        &self.mat
    }

    pub fn mat_mut(&mut self) -> &mut Mat<C64> {
        &mut self.mat
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.mat[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.mat[(i, j)] = v;
    }

    /// Hermitian adjoint.
    pub fn dag(&self) -> Self {
        let d = self.dim();
        Self {
            space: self.space,
            mat: Mat::from_fn(d, d, |i, j| self.mat[(j, i)].conj()),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        let d = self.dim();
        Self {
            space: self.space,
            mat: Mat::from_fn(d, d, |i, j| s * self.mat[(i, j)]),
        }
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.space, rhs.space, "operator space mismatch");
        Self {
            space: self.space,
            mat: &self.mat * &rhs.mat,
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.space, rhs.space, "operator space mismatch");
        Self {
            space: self.space,
            mat: &self.mat + &rhs.mat,
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!(self.space, rhs.space, "operator space mismatch");
        Self {
            space: self.space,
            mat: &self.mat - &rhs.mat,
        }
    }

    /// (1/i)[H, X] would live on the superoperator side; this is the plain
    /// commutator [self, rhs].
    pub fn commutator(&self, rhs: &Self) -> Self {
        self.matmul(rhs).sub(&rhs.matmul(self))
    }

    pub fn trace(&self) -> C64 {
        let mut t = C64::new(0.0, 0.0);
        for i in 0..self.dim() {
            t += self.mat[(i, i)];
        }
        t
    }

    /// Tr{self · rhs}.
    pub fn trace_with(&self, rhs: &Self) -> C64 {
        assert_eq!(self.space, rhs.space, "operator space mismatch");
        let d = self.dim();
        let mut t = C64::new(0.0, 0.0);
        for i in 0..d {
            for j in 0..d {
                t += self.mat[(i, j)] * rhs.mat[(j, i)];
            }
        }
        t
    }

    /// Largest entry magnitude.
    pub fn norm_max(&self) -> f64 {
        self.mat.norm_max()
    }

    /// Frobenius norm.
    pub fn norm_fro(&self) -> f64 {
        self.mat.norm_l2()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let d = self.dim();
        for i in 0..d {
            for j in i..d {
                if (self.mat[(i, j)] - self.mat[(j, i)].conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Tensor product internal ⊗ motional → composite (internal-major).
    pub fn kron(internal: &Operator, motional: &Operator) -> Self {
        assert_eq!(internal.space, Space::Internal, "left factor must be internal");
        let n_max = match motional.space {
            Space::Motional { n_max } => n_max,
            _ => panic!("right factor must be motional"),
        };
        let nm = n_max + 1;
        let space = Space::Composite { n_max };
        let mat = Mat::from_fn(3 * nm, 3 * nm, |r, c| {
            let (i, n) = (r / nm, r % nm);
            let (j, m) = (c / nm, c % nm);
            internal.mat[(i, j)] * motional.mat[(n, m)]
        });
        Self { space, mat }
    }

    /// Partial trace over the motional factor of a composite operator.
    pub fn trace_out_motional(&self) -> Self {
        let n_max = match self.space {
            Space::Composite { n_max } => n_max,
            _ => panic!("trace_out_motional needs a composite operator"),
        };
        let nm = n_max + 1;
        Operator::from_fn(Space::Internal, |i, j| {
            (0..nm).map(|n| self.mat[(i * nm + n, j * nm + n)]).sum()
        })
    }

    /// Partial trace over the internal factor of a composite operator.
    pub fn trace_out_internal(&self) -> Self {
        let n_max = match self.space {
            Space::Composite { n_max } => n_max,
            _ => panic!("trace_out_internal needs a composite operator"),
        };
        let nm = n_max + 1;
        Operator::from_fn(Space::Motional { n_max }, |n, m| {
            (0..3).map(|i| self.mat[(i * nm + n, i * nm + m)]).sum()
        })
    }
}

/// Ladder and position operators on the truncated Fock space.
///
/// a|n⟩ = √n |n−1⟩ and x = a + a† in units of x₀. The top row of a† is
/// truncated: a†|n_max⟩ = 0, so matrix elements that would leave the
/// truncated space are dropped.
pub fn fock_operators(n_max: usize) -> Result<(Operator, Operator, Operator)> {
    if n_max < 1 {
        return Err(Error::InvalidArgument(format!(
            "n_max must be >= 1, got {n_max}"
        )));
    }
    let space = Space::Motional { n_max };
    let mut a = Operator::zeros(space);
    for n in 1..=n_max {
        a.set(n - 1, n, C64::new((n as f64).sqrt(), 0.0));
    }
    let a_dag = a.dag();
    let x = a.add(&a_dag);
    Ok((a, a_dag, x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tolerances::EXACT_IDENTITY;

    #[test]
    fn ladder_matrix_elements() {
        let (a, a_dag, x) = fock_operators(2).unwrap();
        // <0|a|1> = 1
        assert!((a.get(0, 1) - C64::new(1.0, 0.0)).norm() < EXACT_IDENTITY);
        // <1|a|2> = sqrt(2)
        assert!((a.get(1, 2) - C64::new(2f64.sqrt(), 0.0)).norm() < EXACT_IDENTITY);
        // x = a + a†: <1|x|0> = <0|x|1> = 1
        assert!((x.get(1, 0) - C64::new(1.0, 0.0)).norm() < EXACT_IDENTITY);
        assert!((x.get(0, 1) - C64::new(1.0, 0.0)).norm() < EXACT_IDENTITY);
        // truncated top: a†|2> = 0
        assert_eq!(a_dag.get(2, 2).norm(), 0.0);
    }

    #[test]
    fn fock_rejects_zero_truncation() {
        assert!(fock_operators(0).is_err());
    }

    #[test]
    fn thermal_number_expectation_from_geometric_series() {
        // Independent oracle: geometric distribution summed directly.
        let n_max = 40;
        let n_bar = 1.0f64;
        let r = n_bar / (1.0 + n_bar);
        let weights: Vec<f64> = (0..=n_max).map(|n| r.powi(n as i32)).collect();
        let z: f64 = weights.iter().sum();
        let space = Space::Motional { n_max };
        let mu = Operator::from_fn(space, |i, j| {
            if i == j {
                C64::new(weights[i] / z, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let (a, a_dag, _) = fock_operators(n_max).unwrap();
        let num = a_dag.matmul(&a);
        let tr = num.trace_with(&mu);
        assert!(
            (tr.re - 1.0).abs() < 1e-9,
            "Tr(a†a mu) = {} should be 1 within 1e-9",
            tr.re
        );
        assert!(tr.im.abs() < EXACT_IDENTITY);
    }

    #[test]
    fn kron_and_partial_traces() {
        let ia = Operator::dyad(Space::Internal, G1, EXC);
        let (_, _, x) = fock_operators(3).unwrap();
        let k = Operator::kron(&ia, &x);
        assert_eq!(k.dim(), 12);
        // Tr_E{|1><3| ⊗ x} = |1><3| Tr{x} = 0
        assert!(k.trace_out_motional().norm_max() < EXACT_IDENTITY);
        // Tr_I picks up <1|3> = 0
        assert!(k.trace_out_internal().norm_max() < EXACT_IDENTITY);
        let id_i = Operator::identity(Space::Internal);
        let k2 = Operator::kron(&id_i, &x);
        let xt = k2.trace_out_internal();
        assert!((xt.get(0, 1) - C64::new(3.0, 0.0)).norm() < EXACT_IDENTITY);
    }
}
