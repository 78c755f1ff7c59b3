//! Small complex linear-algebra helpers on top of `nalgebra`.

use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{MrmcError, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Diagonal loading applied when a Hermitian factorization fails.
pub const REGULARIZATION: f64 = 1e-10;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `e^{j phase}`
pub fn cis(phase: f64) -> C64 {
    C64::from_polar(1.0, phase)
}

pub fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn zeros(r: usize, c: usize) -> CMat {
    CMat::zeros(r, c)
}

/// Hermitian part `(M + M†)/2`.
pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

pub fn trace(m: &CMat) -> C64 {
    m.trace()
}

/// `Re tr{A† B}`, the real inner product on complex matrices.
pub fn inner_re(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

pub fn frob(m: &CMat) -> f64 {
    m.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Relative Frobenius distance `‖a − b‖ / max(‖b‖, floor)`.
pub fn rel_err(a: &CMat, b: &CMat) -> f64 {
    frob(&(a - b)) / frob(b).max(1e-300)
}

fn cholesky_with_retry(m: &CMat) -> Option<Cholesky<C64, nalgebra::Dyn>> {
    let h = hermitize(m);
    if let Some(ch) = Cholesky::new(h.clone()) {
        return Some(ch);
    }
    let n = h.nrows();
    Cholesky::new(h + CMat::identity(n, n).scale(REGULARIZATION))
}

/// `log|M|` for Hermitian positive-definite `M`, natural log.
pub fn logdet_hpd(m: &CMat) -> Result<f64> {
    if m.nrows() == 0 {
        return Ok(0.0);
    }
    let ch = cholesky_with_retry(m)
        .ok_or_else(|| MrmcError::DegenerateCovariance("log-det of non-PD matrix".into()))?;
    Ok(2.0 * ch.l_dirty().diagonal().iter().map(|d| d.re.ln()).sum::<f64>())
}

/// Inverse of a Hermitian positive-definite matrix.
pub fn inv_hpd(m: &CMat) -> Result<CMat> {
    if m.nrows() == 0 {
        return Ok(m.clone());
    }
    let ch = cholesky_with_retry(m)
        .ok_or_else(|| MrmcError::DegenerateCovariance("inverse of non-PD matrix".into()))?;
    Ok(hermitize(&ch.inverse()))
}

/// General square solve `A x = B` by LU; `None` when `A` is numerically singular.
pub fn solve(a: &CMat, b: &CMat) -> Option<CMat> {
    a.clone().lu().solve(b)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues sorted descending.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    let eig = hermitize(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &eig.eigenvectors.column(src));
    }
    (vals, vecs)
}

/// `M^{p}` for Hermitian PSD `M` through its eigen-decomposition; eigenvalues
/// below `floor` are clamped to `floor`.
pub fn hermitian_power(m: &CMat, p: f64, floor: f64) -> CMat {
    let (vals, vecs) = hermitian_eigen(m);
    let d = CMat::from_diagonal(&CVec::from_iterator(
        vals.len(),
        vals.iter().map(|&v| c(v.max(floor).powf(p), 0.0)),
    ));
    hermitize(&(&vecs * d * vecs.adjoint()))
}

/// Orthonormal basis of the column space of `m` (singular values above `rtol · s_max`).
pub fn range_basis(m: &CMat, rtol: f64) -> CMat {
    let (r, cdim) = m.shape();
    if r == 0 || cdim == 0 {
        return CMat::zeros(r, 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return CMat::zeros(r, 0);
    }
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > rtol * smax)
        .collect();
    let mut q = CMat::zeros(r, keep.len());
    for (dst, &src) in keep.iter().enumerate() {
        q.set_column(dst, &u.column(src));
    }
    q
}

/// Orthonormal basis of the null space of `m` (right singular vectors).
pub fn null_space(m: &CMat, rtol: f64) -> CMat {
    let (rows, cols) = m.shape();
    if rows == 0 {
        return CMat::identity(cols, cols);
    }
    // pad to square so the thin SVD returns a full right basis
    let mut padded = CMat::zeros(rows.max(cols), cols);
    padded.view_mut((0, 0), (rows, cols)).copy_from(m);
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("right singular vectors requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let idx: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] <= rtol * smax.max(1e-300))
        .collect();
    let mut basis = CMat::zeros(cols, idx.len());
    for (dst, &src) in idx.iter().enumerate() {
        let row = vt.row(src).adjoint();
        basis.set_column(dst, &row);
    }
    basis
}

/// Kronecker product.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Column-major vectorization.
pub fn vec_of(m: &CMat) -> CVec {
    CVec::from_column_slice(m.as_slice())
}

pub fn unvec(v: &CVec, rows: usize, cols: usize) -> CMat {
    CMat::from_column_slice(rows, cols, v.as_slice())
}

/// Draw a matrix with i.i.d. CN(0, 1) entries.
pub fn crandn<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| cn01(rng))
}

/// One CN(0, 1) sample.
pub fn cn01<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(s * re, s * im)
}

/// Minimum eigenvalue of a Hermitian matrix.
pub fn min_eig(m: &CMat) -> f64 {
    let (vals, _) = hermitian_eigen(m);
    vals.last().copied().unwrap_or(0.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}
