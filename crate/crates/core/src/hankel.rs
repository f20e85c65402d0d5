//! Block Hankel matrices built from recorded trajectories.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{numerical_rank, stack_vectors, truncated_pinv, vstack};

fn signal_dim(signal: &[DVector<f64>], what: &str) -> Result<usize> {
    let q = signal.first().map_or(0, |s| s.len());
    if signal.iter().any(|s| s.len() != q) {
        return Err(Error::InvalidInput(format!(
            "{what} samples have differing lengths"
        )));
    }
    if signal.iter().any(|s| s.iter().any(|v| !v.is_finite())) {
        return Err(Error::InvalidInput(format!(
            "{what} has non-finite samples"
        )));
    }
    Ok(q)
}

/// Depth-`depth` block Hankel matrix: block `(i, j)` is `signal[i + j]`.
pub fn block_hankel(signal: &[DVector<f64>], depth: usize) -> Result<DMatrix<f64>> {
    if depth == 0 {
        return Err(Error::InvalidInput("Hankel depth must be positive".into()));
    }
    if signal.len() < depth {
        return Err(Error::InvalidInput(format!(
            "signal of length {} is shorter than depth {depth}",
            signal.len()
        )));
    }
    let q = signal_dim(signal, "signal")?;
    let cols = signal.len() - depth + 1;
    let mut h = DMatrix::zeros(q * depth, cols);
    for j in 0..cols {
        for i in 0..depth {
            h.view_mut((i * q, j), (q, 1)).copy_from(&signal[i + j]);
        }
    }
    Ok(h)
}

/// Rank of the depth-`order` Hankel matrix and the full row rank it would
/// need, `(achieved, required)`.
pub fn excitation_rank(signal: &[DVector<f64>], order: usize, tol: f64) -> Result<(usize, usize)> {
    let h = block_hankel(signal, order)?;
    Ok((numerical_rank(&h, tol)?, h.nrows()))
}

/// True iff the depth-`order` Hankel matrix of `signal` has full row rank.
/// A signal too short to form the matrix is an error, not `false`.
pub fn is_persistently_exciting(signal: &[DVector<f64>], order: usize, tol: f64) -> Result<bool> {
    let (achieved, required) = excitation_rank(signal, order, tol)?;
    Ok(achieved == required)
}

/// Rank of the depth-`order` Hankel matrix, or
/// [`Error::NotPersistentlyExciting`] if it is short of full row rank.
pub fn require_persistent_excitation(
    signal: &[DVector<f64>],
    order: usize,
    tol: f64,
) -> Result<usize> {
    let (achieved, required) = excitation_rank(signal, order, tol)?;
    if achieved < required {
        return Err(Error::NotPersistentlyExciting {
            order,
            required,
            achieved,
        });
    }
    Ok(achieved)
}

/// Offline data partitioned into past/future blocks of depth `N + L + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct HankelBundle {
    /// First `mN` rows of the input Hankel matrix.
    pub u_p: DMatrix<f64>,
    /// First `m` rows of `u_f_l`.
    pub u_f: DMatrix<f64>,
    /// Last `m(L+1)` rows of the input Hankel matrix.
    pub u_f_l: DMatrix<f64>,
    pub y_p: DMatrix<f64>,
    pub y_f_l: DMatrix<f64>,
    /// `[Y_p; Y_f^L]`, the full output Hankel matrix.
    pub y: DMatrix<f64>,
    pub past: usize,
    pub delay: usize,
    pub m: usize,
    pub p: usize,
}

impl HankelBundle {
    /// Number of data columns, `T + 1`.
    pub fn columns(&self) -> usize {
        self.u_p.ncols()
    }

    /// Hankel depth `N + L + 1`.
    pub fn depth(&self) -> usize {
        self.past + self.delay + 1
    }

    /// `[U_p; Y_p; Y_f^L]`.
    pub fn stacked_known(&self) -> DMatrix<f64> {
        vstack(&[&self.u_p, &self.y_p, &self.y_f_l])
    }

    /// `[U_p; U_f^L]`.
    pub fn input_hankel(&self) -> DMatrix<f64> {
        vstack(&[&self.u_p, &self.u_f_l])
    }
}

/// Build the depth-`(N+L+1)` Hankel matrices of `u_d` and `y_d` and split
/// them into past (`N` blocks) and future (`L+1` blocks) parts.
pub fn partition_data(
    u_d: &[DVector<f64>],
    y_d: &[DVector<f64>],
    past: usize,
    delay: usize,
) -> Result<HankelBundle> {
    if past == 0 {
        return Err(Error::InvalidInput(
            "past horizon N must be at least 1".into(),
        ));
    }
    if u_d.len() != y_d.len() {
        return Err(Error::InvalidInput(format!(
            "input length {} differs from output length {}",
            u_d.len(),
            y_d.len()
        )));
    }
    let depth = past + delay + 1;
    let hu = block_hankel(u_d, depth)?;
    let hy = block_hankel(y_d, depth)?;
    let m = hu.nrows() / depth;
    let p = hy.nrows() / depth;
    let u_p = hu.rows(0, m * past).clone_owned();
    let u_f_l = hu.rows(m * past, m * (delay + 1)).clone_owned();
    let u_f = u_f_l.rows(0, m).clone_owned();
    let y_p = hy.rows(0, p * past).clone_owned();
    let y_f_l = hy.rows(p * past, p * (delay + 1)).clone_owned();
    Ok(HankelBundle {
        u_p,
        u_f,
        u_f_l,
        y_p,
        y_f_l,
        y: hy,
        past,
        delay,
        m,
        p,
    })
}

/// One-shot data-driven inversion with exactly known past inputs: solves
/// `[U_p; Y_p; Y_f^L] g = [u_past; y_past; y_future]` in the least-squares
/// sense and returns `U_f g`.
///
/// The pseudoinverse of the data matrix is formed once in [`Self::new`].
#[derive(Debug, Clone)]
pub struct KnownPastInverter {
    u_f: DMatrix<f64>,
    known: DMatrix<f64>,
    known_pinv: DMatrix<f64>,
}

/// Relative residual above which a right-hand side is declared not to be a
/// trajectory of the data-generating system.
pub const CONSISTENCY_TOL: f64 = 1e-6;

impl KnownPastInverter {
    pub fn new(bundle: &HankelBundle, tol: f64) -> Result<Self> {
        let known = bundle.stacked_known();
        let known_pinv = truncated_pinv(&known, tol)?;
        Ok(Self {
            u_f: bundle.u_f.clone(),
            known,
            known_pinv,
        })
    }

    pub fn reconstruct(
        &self,
        u_past: &DVector<f64>,
        y_past: &DVector<f64>,
        y_future: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        let rhs = stack_vectors(&[u_past.clone(), y_past.clone(), y_future.clone()]);
        if rhs.len() != self.known.nrows() {
            return Err(Error::InvalidInput(format!(
                "stacked right-hand side has length {}, expected {}",
                rhs.len(),
                self.known.nrows()
            )));
        }
        let g = &self.known_pinv * &rhs;
        let residual = (&self.known * &g - &rhs).norm();
        let allowed = CONSISTENCY_TOL * rhs.norm();
        if residual > allowed {
            return Err(Error::InconsistentTrajectory { residual, allowed });
        }
        Ok(&self.u_f * g)
    }
}

/// Convenience wrapper around [`KnownPastInverter`] for a single window.
pub fn reconstruct_with_known_past(
    bundle: &HankelBundle,
    u_past: &DVector<f64>,
    y_past: &DVector<f64>,
    y_future: &DVector<f64>,
    tol: f64,
) -> Result<DVector<f64>> {
    KnownPastInverter::new(bundle, tol)?.reconstruct(u_past, y_past, y_future)
}
