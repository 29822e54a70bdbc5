//! Superoperators as dense d² × d² matrices over column-stacked operators.
//!
//! Flattening convention, shared by every module: vec(X) stacks the columns
//! of X, so entry X[r, c] sits at index c·d + r, and
//! vec(A X B) = (Bᵀ ⊗ A) vec(X).

use faer::Mat;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::operator::{Operator, Space};

const I: C64 = C64::new(0.0, 1.0);

pub(crate) fn vec_index(d: usize, r: usize, c: usize) -> usize {
    let _ = d;
    c * d + r
}

/// Linear map on operators, stored on the column-stacked representation.
#[derive(Debug, Clone)]
pub struct SuperOp {
    space: Space,
    mat: Mat<C64>,
}

impl SuperOp {
    pub fn new(space: Space, mat: Mat<C64>) -> Result<Self> {
        let d2 = space.dim() * space.dim();
        if mat.nrows() != d2 || mat.ncols() != d2 {
            return Err(Error::InvalidArgument(format!(
                "superoperator matrix is {}x{}, expected {}x{}",
                mat.nrows(),
                mat.ncols(),
                d2,
                d2
            )));
        }
        Ok(Self { space, mat })
    }

    pub fn zeros(space: Space) -> Self {
        let d2 = space.dim() * space.dim();
        Self {
            space,
            mat: Mat::zeros(d2, d2),
        }
    }

    pub fn identity(space: Space) -> Self {
        let d2 = space.dim() * space.dim();
        Self {
            space,
            mat: Mat::from_fn(d2, d2, |i, j| {
                if i == j {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            }),
        }
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

    /// X ↦ A X, i.e. I ⊗ A on column-stacked operators.
    pub fn left_mul(a: &Operator) -> Self {
        let d = a.dim();
        let mat = Mat::from_fn(d * d, d * d, |row, col| {
            let (r, cr) = (row % d, row / d);
            let (s, cs) = (col % d, col / d);
            if cr == cs {
                a.get(r, s)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Self {
            space: a.space(),
            mat,
        }
    }

    /// X ↦ X B, i.e. Bᵀ ⊗ I.
    pub fn right_mul(b: &Operator) -> Self {
        let d = b.dim();
        let mat = Mat::from_fn(d * d, d * d, |row, col| {
            let (r, cr) = (row % d, row / d);
            let (s, cs) = (col % d, col / d);
            if r == s {
                b.get(cs, cr)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Self {
            space: b.space(),
            mat,
        }
    }

    /// X ↦ A X B.
    pub fn sandwich(a: &Operator, b: &Operator) -> Self {
        let d = a.dim();
        assert_eq!(a.space(), b.space(), "operator space mismatch");
        let mat = Mat::from_fn(d * d, d * d, |row, col| {
            let (r, cr) = (row % d, row / d);
            let (s, cs) = (col % d, col / d);
            a.get(r, s) * b.get(cs, cr)
        });
        Self {
            space: a.space(),
            mat,
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.space, rhs.space, "superoperator space mismatch");
        Self {
            space: self.space,
            mat: &self.mat + &rhs.mat,
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!(self.space, rhs.space, "superoperator space mismatch");
        Self {
            space: self.space,
            mat: &self.mat - &rhs.mat,
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        let d2 = self.mat.nrows();
        Self {
            space: self.space,
            mat: Mat::from_fn(d2, d2, |i, j| s * self.mat[(i, j)]),
        }
    }

    /// Composition self ∘ rhs.
    pub fn compose(&self, rhs: &Self) -> Self {
        assert_eq!(self.space, rhs.space, "superoperator space mismatch");
        Self {
            space: self.space,
            mat: &self.mat * &rhs.mat,
        }
    }

    pub fn apply(&self, x: &Operator) -> Operator {
        assert_eq!(self.space, x.space(), "superoperator/operator space mismatch");
        let d = self.dim();
        let v = Mat::from_fn(d * d, 1, |row, _| {
            let (r, c) = (row % d, row / d);
            x.get(r, c)
        });
        let w = &self.mat * &v;
        Operator::from_fn(self.space, |r, c| w[(vec_index(d, r, c), 0)])
    }

    pub fn norm_max(&self) -> f64 {
        self.mat.norm_max()
    }
}

/// X ↦ (1/i)[H, X] (ħ = 1).
pub fn commutator_superop(h: &Operator) -> SuperOp {
    let id = Operator::identity(h.space());
    let hx = SuperOp::sandwich(h, &id);
    let xh = SuperOp::sandwich(&id, h);
    hx.sub(&xh).scale(-I)
}

/// X ↦ (rate/2)(2 J X J† − J†J X − X J†J).
pub fn lindblad_superop(jump: &Operator, rate: f64) -> Result<SuperOp> {
    if rate < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "Lindblad rate must be >= 0, got {rate}"
        )));
    }
    let jdag = jump.dag();
    let jdj = jdag.matmul(jump);
    let id = Operator::identity(jump.space());
    let sandwich = SuperOp::sandwich(jump, &jdag);
    let left = SuperOp::sandwich(&jdj, &id);
    let right = SuperOp::sandwich(&id, &jdj);
    Ok(sandwich
        .scale(C64::new(2.0, 0.0))
        .sub(&left)
        .sub(&right)
        .scale(C64::new(rate / 2.0, 0.0)))
}
