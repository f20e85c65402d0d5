//! Brute-force equality-constrained least squares, independent of the
//! closed-form estimator: the KKT system of
//! `min |U_p g - u|^2 + eps |g|^2  s.t.  Y g = y`
//! is solved with a full-pivoting LU, after dropping redundant rows of `Y`
//! with a column-pivoted QR of `Y^T`.

use nalgebra::{DMatrix, DVector};

pub struct KktSolution {
    pub g: DVector<f64>,
    /// `|U_p^T (U_p g - u) + eps g + C^T lambda|`.
    pub stationarity: f64,
    pub feasibility: f64,
}

/// Independent rows of `y_mat` (relative pivot cutoff `rel_tol`).
fn independent_rows(y_mat: &DMatrix<f64>, rel_tol: f64) -> Vec<usize> {
    let qr = y_mat.transpose().col_piv_qr();
    let r = qr.r();
    let perm = qr.p();
    // Column k of `Y^T P` is column `order[k]` of `Y^T`.
    let mut idx = DMatrix::from_fn(1, y_mat.nrows(), |_, j| j as f64);
    perm.permute_columns(&mut idx);
    let mut order: Vec<usize> = idx.iter().map(|&v| v as usize).collect();
    let diag = r.diagonal();
    let lead = diag.iter().map(|d| d.abs()).fold(0.0, f64::max);
    let rank = diag.iter().take_while(|d| d.abs() > rel_tol * lead).count();
    order.truncate(rank);
    order
}

/// KKT factorization for fixed data; each solve only changes the
/// right-hand side.
pub struct KktOracle {
    u_p: DMatrix<f64>,
    y_mat: DMatrix<f64>,
    rows: Vec<usize>,
    lu: nalgebra::linalg::FullPivLU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

const EPS: f64 = 1e-12;

impl KktOracle {
    pub fn new(u_p: &DMatrix<f64>, y_mat: &DMatrix<f64>) -> Self {
        let rows = independent_rows(y_mat, 1e-9);
        let c = y_mat.select_rows(&rows);
        let (r, cols) = c.shape();
        let mut kkt = DMatrix::zeros(cols + r, cols + r);
        let hess = u_p.transpose() * u_p + DMatrix::identity(cols, cols) * EPS;
        kkt.view_mut((0, 0), (cols, cols)).copy_from(&hess);
        kkt.view_mut((0, cols), (cols, r)).copy_from(&c.transpose());
        kkt.view_mut((cols, 0), (r, cols)).copy_from(&c);
        Self {
            u_p: u_p.clone(),
            y_mat: y_mat.clone(),
            rows,
            lu: kkt.full_piv_lu(),
        }
    }

    pub fn solve(&self, u_past: &DVector<f64>, y_window: &DVector<f64>) -> KktSolution {
        let (u_p, y_mat) = (&self.u_p, &self.y_mat);
        let c = y_mat.select_rows(&self.rows);
        let (r, cols) = c.shape();
        let mut rhs = DVector::zeros(cols + r);
        rhs.rows_mut(0, cols).copy_from(&(u_p.transpose() * u_past));
        rhs.rows_mut(cols, r)
            .copy_from(&y_window.select_rows(&self.rows));
        let sol = self.lu.solve(&rhs).expect("KKT matrix is nonsingular");
        let g = sol.rows(0, cols).clone_owned();
        let lambda = sol.rows(cols, r).clone_owned();
        let stationarity =
            (u_p.transpose() * (u_p * &g - u_past) + &g * EPS + c.transpose() * lambda).norm();
        let feasibility = (y_mat * &g - y_window).norm();
        KktSolution {
            g,
            stationarity,
            feasibility,
        }
    }
}
