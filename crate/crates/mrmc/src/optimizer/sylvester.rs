//! Generalized Sylvester equations `A X + Σ_t F_t X B_t = C`.

use crate::error::{MrmcError, Result};
use crate::linalg::{frob, kron, solve, unvec, vec_of, CMat, REGULARIZATION};

/// Largest accepted relative residual of a solve.
pub const RESIDUAL_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct SylvesterSystem {
    pub a: CMat,
    /// `(F_t, B_t)` pairs.
    pub terms: Vec<(CMat, CMat)>,
    pub c: CMat,
}

impl SylvesterSystem {
    pub fn new(a: CMat, terms: Vec<(CMat, CMat)>, c: CMat) -> Self {
        Self { a, terms, c }
    }

    /// `A X + Σ F X B`.
    pub fn apply(&self, x: &CMat) -> CMat {
        let mut y = &self.a * x;
        for (f, b) in &self.terms {
            y += f * x * b;
        }
        y
    }

    /// `I ⊗ A + Σ Bᵀ ⊗ F`, the operator acting on `vec(X)`.
    pub fn kronecker_matrix(&self) -> CMat {
        let q = self.c.ncols();
        let mut m = kron(&CMat::identity(q, q), &self.a);
        for (f, b) in &self.terms {
            m += kron(&b.transpose(), f);
        }
        m
    }

    /// `‖A X + Σ F X B − C‖ / ‖C‖` (absolute when `C = 0`).
    pub fn residual(&self, x: &CMat) -> f64 {
        let r = frob(&(self.apply(x) - &self.c));
        let n = frob(&self.c);
        if n > 0.0 {
            r / n
        } else {
            r
        }
    }

    /// Solve through the vectorized system. A singular system is retried once
    /// with `1e-10 I` added to `A`; the result must meet [`RESIDUAL_TOL`].
    pub fn solve(&self) -> Result<(CMat, f64)> {
        let (p, q) = self.c.shape();
        let k = self.kronecker_matrix();
        let rhs = CMat::from_column_slice(p * q, 1, vec_of(&self.c).as_slice());
        let attempt = |m: &CMat| solve(m, &rhs).map(|v| unvec(&v.column(0).into_owned(), p, q));
        if let Some(x) = attempt(&k) {
            let res = self.residual(&x);
            if res < RESIDUAL_TOL && x.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
                return Ok((x, res));
            }
        }
        let n = p * q;
        let scale = frob(&k).max(1.0);
        let reg = &k + CMat::identity(n, n).scale(REGULARIZATION * scale);
        let x = attempt(&reg).ok_or_else(|| MrmcError::Singular("Sylvester system is singular".into()))?;
        let res = self.residual(&x);
        if res < RESIDUAL_TOL {
            Ok((x, res))
        } else {
            Err(MrmcError::Singular(format!("Sylvester residual {res:.3e} above tolerance")))
        }
    }
}
