//! Dense numerical kernels shared by the rest of the crate.
//!
//! All singular-value cutoffs are absolute: a singular value `s` is kept
//! when `s > tol` and treated as zero otherwise.

use faer::Mat;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Cutoffs used when building gains and testing ranks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceSet {
    /// Absolute singular-value cutoff for rank decisions.
    pub rank_tol: f64,
    /// Cutoff applied to the SVD of the stacked output Hankel matrix.
    pub y_trunc: f64,
    /// Cutoff applied to the reduced least-squares solve.
    pub ls_trunc: f64,
}

impl Default for ToleranceSet {
    fn default() -> Self {
        Self {
            rank_tol: 1e-8,
            y_trunc: 1e-4,
            ls_trunc: 1e-3,
        }
    }
}

impl ToleranceSet {
    pub fn new(rank_tol: f64, y_trunc: f64, ls_trunc: f64) -> Result<Self> {
        let tol = Self {
            rank_tol,
            y_trunc,
            ls_trunc,
        };
        tol.validate()?;
        Ok(tol)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rank_tol", self.rank_tol),
            ("y_trunc", self.y_trunc),
            ("ls_trunc", self.ls_trunc),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidInput(format!(
                    "tolerance {name} must be finite and nonnegative, got {v}"
                )));
            }
        }
        Ok(())
    }
}

pub(crate) fn ensure_finite(m: &DMatrix<f64>, what: &str) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "{what} has non-finite entries"
        )))
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol.is_finite() && tol >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "tolerance must be finite and nonnegative, got {tol}"
        )))
    }
}

/// Thin SVD `m = U diag(s) Vᵀ` with `s` in nonincreasing order.
///
/// Factorizations go through `faer`; `nalgebra` 0.35's SVD returns wrong
/// factors for a small fraction of rank-deficient inputs.
pub(crate) struct ThinSvd {
    pub u: DMatrix<f64>,
    pub s: Vec<f64>,
    pub v: DMatrix<f64>,
}

fn to_faer<T: Copy + nalgebra::Scalar>(m: &DMatrix<T>) -> Mat<T> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Empty matrices are rejected by the caller.
pub(crate) fn thin_svd(m: &DMatrix<f64>) -> Result<ThinSvd> {
    let svd = to_faer(m)
        .thin_svd()
        .map_err(|_| Error::NoConvergence("SVD"))?;
    let s = svd.S().column_vector().iter().copied().collect();
    Ok(ThinSvd {
        u: from_faer(svd.U()),
        s,
        v: from_faer(svd.V()),
    })
}

/// Singular values of a complex matrix, nonincreasing.
pub(crate) fn complex_singular_values(m: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    if m.is_empty() {
        return Ok(Vec::new());
    }
    to_faer(m)
        .singular_values()
        .map_err(|_| Error::NoConvergence("complex SVD"))
}

/// Singular values of `m` in nonincreasing order; `min(rows, cols)` of them.
pub fn singular_values(m: &DMatrix<f64>) -> Result<DVector<f64>> {
    ensure_finite(m, "matrix")?;
    if m.is_empty() {
        return Ok(DVector::zeros(0));
    }
    let s = to_faer(m)
        .singular_values()
        .map_err(|_| Error::NoConvergence("SVD"))?;
    Ok(DVector::from_vec(s))
}

/// Largest singular value; zero for empty matrices.
pub fn spectral_norm(m: &DMatrix<f64>) -> Result<f64> {
    Ok(singular_values(m)?.iter().copied().fold(0.0, f64::max))
}

/// Moore–Penrose pseudoinverse with singular values `<= tol` zeroed.
pub fn truncated_pinv(m: &DMatrix<f64>, tol: f64) -> Result<DMatrix<f64>> {
    ensure_finite(m, "matrix")?;
    check_tol(tol)?;
    let (rows, cols) = m.shape();
    if m.is_empty() {
        return Ok(DMatrix::zeros(cols, rows));
    }
    let svd = thin_svd(m)?;
    let mut pinv = DMatrix::zeros(cols, rows);
    for (i, &s) in svd.s.iter().enumerate() {
        if s > tol {
            // pinv += v_i * (1/s) * u_i^T
            pinv.ger(1.0 / s, &svd.v.column(i), &svd.u.column(i), 1.0);
        }
    }
    Ok(pinv)
}

/// Number of singular values strictly greater than `tol`.
pub fn numerical_rank(m: &DMatrix<f64>, tol: f64) -> Result<usize> {
    check_tol(tol)?;
    Ok(singular_values(m)?.iter().filter(|&&s| s > tol).count())
}

/// Right singular vectors of `m` whose singular value exceeds `tol`, as
/// columns of a `cols x r` matrix.
pub(crate) fn row_space_basis(m: &DMatrix<f64>, tol: f64) -> Result<DMatrix<f64>> {
    let cols = m.ncols();
    if m.is_empty() {
        return Ok(DMatrix::zeros(cols, 0));
    }
    let svd = thin_svd(m)?;
    let keep = svd.s.iter().filter(|&&s| s > tol).count();
    let basis = svd.v.columns(0, keep).clone_owned();
    Ok(basis)
}

/// Orthonormal basis of the orthogonal complement of `span(basis)`, where
/// `basis` has orthonormal columns.
///
/// Householder reflectors `H_1 .. H_r` are built from the columns of
/// `basis`; the trailing `cols - r` columns of `H_1 ... H_r` span the
/// complement.
pub(crate) fn orthonormal_complement(basis: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, r) = basis.shape();
    let mut work = basis.clone();
    let mut reflectors: Vec<(usize, DVector<f64>, f64)> = Vec::with_capacity(r);
    for j in 0..r.min(n) {
        let x = work.view((j, j), (n - j, 1)).column(0).clone_owned();
        let alpha = x.norm();
        if alpha == 0.0 {
            continue;
        }
        let sign = if x[0] >= 0.0 { 1.0 } else { -1.0 };
        let mut v = x;
        v[0] += sign * alpha;
        let vnorm2 = v.norm_squared();
        if vnorm2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm2;
        // Apply H = I - beta v v^T to the remaining columns.
        for c in j..r {
            let mut col = work.view_mut((j, c), (n - j, 1));
            let dot = v.dot(&col.column(0));
            col.column_mut(0).axpy(-beta * dot, &v, 1.0);
        }
        reflectors.push((j, v, beta));
    }
    let k = n - reflectors.len();
    let offset = reflectors.len();
    let mut q = DMatrix::zeros(n, k);
    for i in 0..k {
        q[(offset + i, i)] = 1.0;
    }
    for (j, v, beta) in reflectors.iter().rev() {
        for c in 0..k {
            let mut col = q.view_mut((*j, c), (n - j, 1));
            let dot = v.dot(&col.column(0));
            col.column_mut(0).axpy(-beta * dot, v, 1.0);
        }
    }
    q
}

/// Orthonormal basis (as columns) of the numerical kernel of `m`.
///
/// The column count is `m.ncols() - numerical_rank(m, tol)`.
pub fn nullspace_basis(m: &DMatrix<f64>, tol: f64) -> Result<DMatrix<f64>> {
    ensure_finite(m, "matrix")?;
    check_tol(tol)?;
    let range = row_space_basis(m, tol)?;
    Ok(orthonormal_complement(&range))
}

/// Orthogonal projector `I - M^+ M` onto the numerical kernel of `m`,
/// formed as `B B^T` from the kernel basis `B`.
pub fn kernel_projector(m: &DMatrix<f64>, tol: f64) -> Result<DMatrix<f64>> {
    let basis = nullspace_basis(m, tol)?;
    Ok(&basis * basis.transpose())
}

fn ensure_square(m: &DMatrix<f64>) -> Result<()> {
    if m.is_square() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )))
    }
}

/// Full complex spectrum of a real square matrix.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    ensure_square(m)?;
    ensure_finite(m, "matrix")?;
    if m.is_empty() {
        return Ok(Vec::new());
    }
    to_faer(m)
        .eigenvalues()
        .map_err(|_| Error::NoConvergence("eigenvalues"))
}

/// `max |lambda|` over the spectrum of `m`; zero for the empty matrix.
pub fn spectral_radius(m: &DMatrix<f64>) -> Result<f64> {
    Ok(eigenvalues(m)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// `[top; bottom]`. Column counts must agree.
pub fn vstack(blocks: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let cols = blocks.first().map_or(0, |b| b.ncols());
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut r = 0;
    for b in blocks {
        assert_eq!(b.ncols(), cols, "vstack column mismatch");
        out.view_mut((r, 0), b.shape()).copy_from(b);
        r += b.nrows();
    }
    out
}

/// `[left right]`. Row counts must agree.
pub fn hstack(blocks: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let rows = blocks.first().map_or(0, |b| b.nrows());
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut c = 0;
    for b in blocks {
        assert_eq!(b.nrows(), rows, "hstack row mismatch");
        out.view_mut((0, c), b.shape()).copy_from(b);
        c += b.ncols();
    }
    out
}

/// Stack a sequence of equally sized vectors into one column vector.
pub fn stack_vectors(vs: &[DVector<f64>]) -> DVector<f64> {
    let len = vs.iter().map(|v| v.len()).sum();
    let mut out = DVector::zeros(len);
    let mut i = 0;
    for v in vs {
        out.rows_mut(i, v.len()).copy_from(v);
        i += v.len();
    }
    out
}
