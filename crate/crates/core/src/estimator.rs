//! Autoregressive unknown-input estimator built from Hankel data.
//!
//! Each step picks the combination `g` of offline data columns that
//! reproduces the measured output window exactly (`Y g = y`) and matches
//! the previous `N` input estimates as closely as possible in least
//! squares (`min |U_p g - û_past|`); the new estimate is `U_f g`. The
//! minimizer used is
//!
//! ```text
//! g = Y⁺ y + V₀ (U_p V₀)⁺ (û_past - U_p Y⁺ y)
//! ```
//!
//! with `V₀` an orthonormal basis of `ker Y`, which collapses to the
//! linear recursion `û_k = M_u û_{k-N:k-1} + M_y y_{k-N:k+L}`. The
//! estimation error then obeys `ε_{k+1} = R ε_k` with `R` the block
//! companion matrix of `M_u`, so `ρ(R) < 1` certifies convergence from any
//! initial guess using input/output data only.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hankel::HankelBundle;
use crate::linalg::{
    eigenvalues, ensure_finite, orthonormal_complement, stack_vectors, thin_svd, truncated_pinv,
    ToleranceSet,
};

/// Block sizes of an estimator: `N` past steps, delay `L`, `m` inputs,
/// `p` outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EstimatorDims {
    pub past: usize,
    pub delay: usize,
    pub m: usize,
    pub p: usize,
}

impl EstimatorDims {
    /// Length of the stacked past-input vector, `mN`.
    pub fn past_len(&self) -> usize {
        self.m * self.past
    }

    /// Length of the output window `y_{k-N:k+L}`, `p(N+L+1)`.
    pub fn window_len(&self) -> usize {
        self.p * (self.past + self.delay + 1)
    }
}

/// Frozen gains of the recursion plus the factors needed for per-step
/// diagnostics.
#[derive(Debug, Clone)]
pub struct EstimatorGains {
    pub m_u: DMatrix<f64>,
    pub m_y: DMatrix<f64>,
    /// Truncated pseudoinverse of `Y`.
    pub y_pinv: DMatrix<f64>,
    /// Orthonormal basis of the numerical kernel of `Y`.
    pub v_null: DMatrix<f64>,
    /// Truncated pseudoinverse of `U_p V_null`.
    pub u_p0_pinv: DMatrix<f64>,
    pub tolerances: ToleranceSet,
    pub dims: EstimatorDims,
    /// Numerical rank of `Y` at `y_trunc`.
    pub y_rank: usize,
    /// Largest singular value of `Y`.
    pub y_norm: f64,
    /// Largest deviation between these gains and the ones obtained from the
    /// explicit projector `I - Y⁺Y`.
    pub projector_form_discrepancy: f64,
    u_p: DMatrix<f64>,
    u_f: DMatrix<f64>,
    y: DMatrix<f64>,
}

impl EstimatorGains {
    pub fn u_p(&self) -> &DMatrix<f64> {
        &self.u_p
    }
    pub fn u_f(&self) -> &DMatrix<f64> {
        &self.u_f
    }
    pub fn y(&self) -> &DMatrix<f64> {
        &self.y
    }

    fn check_lengths(&self, u_hat_past: &DVector<f64>, y_window: &DVector<f64>) -> Result<()> {
        if u_hat_past.len() != self.dims.past_len() {
            return Err(Error::InvalidInput(format!(
                "past input estimate has length {}, expected {}",
                u_hat_past.len(),
                self.dims.past_len()
            )));
        }
        if y_window.len() != self.dims.window_len() {
            return Err(Error::InvalidInput(format!(
                "output window has length {}, expected {}",
                y_window.len(),
                self.dims.window_len()
            )));
        }
        Ok(())
    }

    /// Solve the output-constrained least-squares problem for one window.
    pub fn solve(
        &self,
        u_hat_past: &DVector<f64>,
        y_window: &DVector<f64>,
    ) -> Result<ConstrainedSolution> {
        self.check_lengths(u_hat_past, y_window)?;
        let particular = &self.y_pinv * y_window;
        let mismatch = u_hat_past - &self.u_p * &particular;
        let alpha = &self.u_p0_pinv * mismatch;
        let g = particular + &self.v_null * alpha;
        let objective_residual = (&self.u_p * &g - u_hat_past).norm();
        let constraint_residual = (&self.y * &g - y_window).norm();
        let estimate = &self.u_f * &g;
        Ok(ConstrainedSolution {
            objective_residual,
            constraint_residual,
            past_norm: u_hat_past.norm(),
            window_norm: y_window.norm(),
            g_norm: g.norm(),
            y_norm: self.y_norm,
            estimate,
            g,
        })
    }
}

/// Minimizer of one constrained least-squares step with diagnostics.
#[derive(Debug, Clone)]
pub struct ConstrainedSolution {
    pub g: DVector<f64>,
    /// `U_f g`.
    pub estimate: DVector<f64>,
    /// `|U_p g - û_past|`.
    pub objective_residual: f64,
    /// `|Y g - y|`.
    pub constraint_residual: f64,
    past_norm: f64,
    window_norm: f64,
    g_norm: f64,
    y_norm: f64,
}

impl ConstrainedSolution {
    /// `|U_p g - û_past| / max(1, |û_past|)`.
    pub fn relative_objective_residual(&self) -> f64 {
        self.objective_residual / self.past_norm.max(1.0)
    }

    /// Normwise backward error of the constraint,
    /// `|Y g - y| / (|Y| |g| + |y|)`; zero when both norms vanish.
    pub fn relative_constraint_residual(&self) -> f64 {
        let scale = self.y_norm * self.g_norm + self.window_norm;
        if scale == 0.0 {
            0.0
        } else {
            self.constraint_residual / scale
        }
    }
}

/// Compute `M_u` and `M_y` from offline data.
///
/// `Y` is truncated at `y_trunc` to obtain `Y⁺` and `V_null`; the reduced
/// problem matrix `U_p V_null` is pseudo-inverted at `ls_trunc`.
pub fn build_gains(bundle: &HankelBundle, tolerances: ToleranceSet) -> Result<EstimatorGains> {
    tolerances.validate()?;
    ensure_finite(&bundle.u_p, "U_p")?;
    ensure_finite(&bundle.u_f, "U_f")?;
    ensure_finite(&bundle.y, "Y")?;
    let dims = EstimatorDims {
        past: bundle.past,
        delay: bundle.delay,
        m: bundle.m,
        p: bundle.p,
    };
    let cols = bundle.columns();
    let y = &bundle.y;

    let svd = thin_svd(y)?;
    let kept = svd.s.iter().filter(|&&s| s > tolerances.y_trunc).count();
    let y_norm = svd.s.first().copied().unwrap_or(0.0);
    let mut y_pinv = DMatrix::zeros(cols, y.nrows());
    for i in 0..kept {
        y_pinv.ger(1.0 / svd.s[i], &svd.v.column(i), &svd.u.column(i), 1.0);
    }
    let v_range = svd.v.columns(0, kept).clone_owned();
    let v_null = orthonormal_complement(&v_range);
    if v_null.ncols() == 0 && dims.m > 0 {
        return Err(Error::DegenerateData(format!(
            "output Hankel matrix has full column rank {}; ker Y is empty",
            kept
        )));
    }

    let u_p0 = &bundle.u_p * &v_null;
    let u_p0_pinv = truncated_pinv(&u_p0, tolerances.ls_trunc)?;
    let m_u = &bundle.u_f * &v_null * &u_p0_pinv;
    let m_y = &bundle.u_f * &y_pinv - &m_u * &bundle.u_p * &y_pinv;

    // Same gains through the explicit projector onto ker Y.
    let projector = &v_null * v_null.transpose();
    let up_pi = &bundle.u_p * &projector;
    let up_pi_pinv = truncated_pinv(&up_pi, tolerances.ls_trunc)?;
    let m_u_proj = &bundle.u_f * &projector * &up_pi_pinv;
    let m_y_proj = &bundle.u_f * (&y_pinv - &projector * &up_pi_pinv * &bundle.u_p * &y_pinv);
    let projector_form_discrepancy = (&m_u - m_u_proj).amax().max((&m_y - m_y_proj).amax());

    Ok(EstimatorGains {
        m_u,
        m_y,
        y_pinv,
        v_null,
        u_p0_pinv,
        tolerances,
        dims,
        y_rank: kept,
        y_norm,
        projector_form_discrepancy,
        u_p: bundle.u_p.clone(),
        u_f: bundle.u_f.clone(),
        y: y.clone(),
    })
}

/// One-off constrained least-squares solve straight from the data. For
/// repeated solves build the gains once and call [`EstimatorGains::solve`].
pub fn solve_constrained_ls(
    bundle: &HankelBundle,
    u_hat_past: &DVector<f64>,
    y_window: &DVector<f64>,
    tolerances: ToleranceSet,
) -> Result<ConstrainedSolution> {
    build_gains(bundle, tolerances)?.solve(u_hat_past, y_window)
}

/// Ring buffer of the last `N` input estimates, oldest first.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorState {
    buffer: VecDeque<DVector<f64>>,
    m: usize,
    step_index: usize,
}

impl EstimatorState {
    /// Seed the buffer from a stacked `mN` vector `[û_{k-N}; ...; û_{k-1}]`.
    pub fn new(initial_guess: &DVector<f64>, dims: EstimatorDims) -> Result<Self> {
        if initial_guess.len() != dims.past_len() {
            return Err(Error::InvalidInput(format!(
                "initial guess has length {}, expected {}",
                initial_guess.len(),
                dims.past_len()
            )));
        }
        let buffer = (0..dims.past)
            .map(|i| initial_guess.rows(i * dims.m, dims.m).clone_owned())
            .collect();
        Ok(Self {
            buffer,
            m: dims.m,
            step_index: 0,
        })
    }

    pub fn zeros(dims: EstimatorDims) -> Self {
        Self {
            buffer: (0..dims.past).map(|_| DVector::zeros(dims.m)).collect(),
            m: dims.m,
            step_index: 0,
        }
    }

    /// Stacked past estimates `û_{k-N:k-1}`.
    pub fn past(&self) -> DVector<f64> {
        let blocks: Vec<_> = self.buffer.iter().cloned().collect();
        stack_vectors(&blocks)
    }

    pub fn push(&mut self, estimate: DVector<f64>) {
        debug_assert_eq!(estimate.len(), self.m);
        self.buffer.pop_front();
        self.buffer.push_back(estimate);
        self.step_index += 1;
    }

    /// Number of estimates produced so far.
    pub fn step_index(&self) -> usize {
        self.step_index
    }
}

/// `û_k = M_u û_{k-N:k-1} + M_y y_{k-N:k+L}`; the estimate is pushed into
/// the buffer. The estimate lags the newest consumed output by `L` steps.
pub fn step(
    gains: &EstimatorGains,
    state: &mut EstimatorState,
    y_window: &DVector<f64>,
) -> Result<DVector<f64>> {
    let past = state.past();
    gains.check_lengths(&past, y_window)?;
    let estimate = &gains.m_u * past + &gains.m_y * y_window;
    state.push(estimate.clone());
    Ok(estimate)
}

/// Output of [`run`]. Entry `j` of every series refers to time step
/// `start_step + j`.
#[derive(Debug, Clone)]
pub struct EstimationRun {
    pub start_step: usize,
    pub estimates: Vec<DVector<f64>>,
    /// `|û_k - u_k|`, present when the true inputs were supplied.
    pub error_norms: Option<Vec<f64>>,
    /// Relative least-squares residual `|U_p g - û_past| / max(1, |û_past|)`.
    pub residual_norms: Vec<f64>,
    /// Normwise backward error of the output constraint.
    pub constraint_residuals: Vec<f64>,
}

impl EstimationRun {
    pub fn len(&self) -> usize {
        self.estimates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.estimates.is_empty()
    }
}

/// Slide the estimator over `outputs` from an initial guess (zero when
/// `None`). The first estimate is for step `N`, the last for
/// `outputs.len() - L - 1`.
pub fn run(
    gains: &EstimatorGains,
    initial_guess: Option<&DVector<f64>>,
    outputs: &[DVector<f64>],
    truth: Option<&[DVector<f64>]>,
) -> Result<EstimationRun> {
    let dims = gains.dims;
    let span = dims.past + dims.delay + 1;
    if outputs.len() < span {
        return Err(Error::InvalidInput(format!(
            "need at least {span} outputs, got {}",
            outputs.len()
        )));
    }
    let mut state = match initial_guess {
        Some(guess) => EstimatorState::new(guess, dims)?,
        None => EstimatorState::zeros(dims),
    };
    let last = outputs.len() - dims.delay - 1;
    if let Some(truth) = truth {
        if truth.len() <= last {
            return Err(Error::InvalidInput(format!(
                "true inputs cover {} steps, need {}",
                truth.len(),
                last + 1
            )));
        }
    }
    let count = last + 1 - dims.past;
    let mut estimates = Vec::with_capacity(count);
    let mut residual_norms = Vec::with_capacity(count);
    let mut constraint_residuals = Vec::with_capacity(count);
    let mut error_norms = truth.map(|_| Vec::with_capacity(count));
    for k in dims.past..=last {
        let window = stack_vectors(&outputs[k - dims.past..=k + dims.delay]);
        let diag = gains.solve(&state.past(), &window)?;
        let estimate = step(gains, &mut state, &window)?;
        residual_norms.push(diag.relative_objective_residual());
        constraint_residuals.push(diag.relative_constraint_residual());
        if let (Some(errs), Some(truth)) = (error_norms.as_mut(), truth) {
            errs.push((&estimate - &truth[k]).norm());
        }
        estimates.push(estimate);
    }
    Ok(EstimationRun {
        start_step: dims.past,
        estimates,
        error_norms,
        residual_norms,
        constraint_residuals,
    })
}

/// Block companion matrix `R` of the error recursion: identity blocks on
/// the first super-diagonal and `M_u` as the last block row.
pub fn error_matrix(gains: &EstimatorGains) -> DMatrix<f64> {
    companion_from_m_u(&gains.m_u, gains.dims.m)
}

pub(crate) fn companion_from_m_u(m_u: &DMatrix<f64>, m: usize) -> DMatrix<f64> {
    let size = m_u.ncols();
    let blocks = size.checked_div(m).unwrap_or(0);
    let mut r = DMatrix::zeros(size, size);
    for i in 0..blocks.saturating_sub(1) {
        r.view_mut((i * m, (i + 1) * m), (m, m))
            .fill_with_identity();
    }
    if blocks > 0 {
        r.view_mut(((blocks - 1) * m, 0), (m, size)).copy_from(m_u);
    }
    r
}

/// Spectrum of `R`. Schur stability (`rho < 1`) holds exactly when every
/// invariant zero of the data-generating system lies inside the unit
/// circle.
#[derive(Debug, Clone)]
pub struct ConvergenceCertificate {
    pub r: DMatrix<f64>,
    pub rho: f64,
    pub schur_stable: bool,
    pub eigvals: Vec<Complex64>,
}

impl ConvergenceCertificate {
    /// Eigenvalues sorted by decreasing modulus.
    pub fn eigvals_by_modulus(&self) -> Vec<Complex64> {
        let mut ev = self.eigvals.clone();
        ev.sort_by(|a, b| {
            b.norm()
                .total_cmp(&a.norm())
                .then(a.re.total_cmp(&b.re))
                .then(a.im.total_cmp(&b.im))
        });
        ev
    }
}

pub fn convergence_certificate(gains: &EstimatorGains) -> Result<ConvergenceCertificate> {
    let r = error_matrix(gains);
    let eigvals = eigenvalues(&r)?;
    let rho = eigvals.iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(ConvergenceCertificate {
        r,
        rho,
        schur_stable: rho < 1.0,
        eigvals,
    })
}
