//! Model-based `L`-delay left inversion.

use nalgebra::{DMatrix, DVector};

use super::model::{simulate, StateSpaceModel};
use crate::error::{Error, Result};
use crate::linalg::{hstack, numerical_rank, stack_vectors, truncated_pinv, vstack};

/// Residual allowed in `P * I_L = [I 0]` before a gain is rejected.
pub const GAIN_RESIDUAL_TOL: f64 = 1e-8;

/// Extended observability matrix `O_L = [C; CA; ...; CA^L]`.
pub fn observability_matrix(model: &StateSpaceModel, delay: usize) -> DMatrix<f64> {
    let (n, p) = (model.n(), model.p());
    let mut out = DMatrix::zeros((delay + 1) * p, n);
    let mut block = model.c().clone();
    for i in 0..=delay {
        out.view_mut((i * p, 0), (p, n)).copy_from(&block);
        block = &block * model.a();
    }
    out
}

/// Block lower-triangular Toeplitz matrix of Markov parameters
/// `D, CB, CAB, ...`, of shape `(L+1)p x (L+1)m`.
pub fn invertibility_matrix(model: &StateSpaceModel, delay: usize) -> DMatrix<f64> {
    let (m, p) = (model.m(), model.p());
    let mut markov = Vec::with_capacity(delay + 1);
    markov.push(model.d().clone());
    let mut ca = model.c().clone();
    for _ in 0..delay {
        markov.push(&ca * model.b());
        ca = &ca * model.a();
    }
    let mut out = DMatrix::zeros((delay + 1) * p, (delay + 1) * m);
    for i in 0..=delay {
        for j in 0..=i {
            out.view_mut((i * p, j * m), (p, m))
                .copy_from(&markov[i - j]);
        }
    }
    out
}

/// Largest deviation `|y_{k:k+L} - (O_L x_k + I_L u_{k:k+L})|` over all
/// windows of a trajectory with recorded states.
pub fn stacked_output_residual(
    obs: &DMatrix<f64>,
    inv: &DMatrix<f64>,
    states: &[DVector<f64>],
    inputs: &[DVector<f64>],
    outputs: &[DVector<f64>],
    delay: usize,
) -> Result<f64> {
    if states.len() != inputs.len() || inputs.len() != outputs.len() {
        return Err(Error::InvalidInput("trajectory lengths differ".into()));
    }
    if inputs.len() < delay + 1 {
        return Err(Error::InvalidInput(format!(
            "trajectory of length {} too short for delay {delay}",
            inputs.len()
        )));
    }
    let mut worst = 0.0f64;
    for k in 0..inputs.len() - delay {
        let y = stack_vectors(&outputs[k..=k + delay]);
        let u = stack_vectors(&inputs[k..=k + delay]);
        if obs.nrows() != y.len() || inv.ncols() != u.len() || obs.ncols() != states[k].len() {
            return Err(Error::InvalidInput(
                "matrix/trajectory dimension mismatch".into(),
            ));
        }
        let predicted = obs * &states[k] + inv * u;
        worst = worst.max((y - predicted).norm());
    }
    Ok(worst)
}

/// Simulates `model` and checks the stacked output identity
/// `y_{k:k+L} = O_L x_k + I_L u_{k:k+L}` to `1e-10` at every window.
pub fn stacked_output_identity_check(
    model: &StateSpaceModel,
    x0: &DVector<f64>,
    inputs: &[DVector<f64>],
    delay: usize,
) -> Result<bool> {
    let traj = simulate(model, x0, inputs)?;
    let states = traj.states.as_deref().unwrap_or_default();
    let residual = stacked_output_residual(
        &observability_matrix(model, delay),
        &invertibility_matrix(model, delay),
        states,
        &traj.inputs,
        &traj.outputs,
        delay,
    )?;
    Ok(residual <= 1e-10)
}

fn first_block_selector(m: usize, delay: usize) -> DMatrix<f64> {
    let mut sel = DMatrix::zeros(m, (delay + 1) * m);
    sel.view_mut((0, 0), (m, m)).fill_with_identity();
    sel
}

/// Smallest `L <= l_max` for which `[I_m 0]` lies in the row space of
/// `I_L`, i.e. an `L`-delay left inverse exists. `None` when no such `L`.
pub fn inherent_delay(model: &StateSpaceModel, l_max: usize, tol: f64) -> Result<Option<usize>> {
    if model.p() < model.m() {
        return Ok(None);
    }
    for delay in 0..=l_max {
        let inv = invertibility_matrix(model, delay);
        let stacked = vstack(&[&inv, &first_block_selector(model.m(), delay)]);
        if numerical_rank(&stacked, tol)? == numerical_rank(&inv, tol)? {
            return Ok(Some(delay));
        }
    }
    Ok(None)
}

/// Minimum-Frobenius-norm `P` with `P I_L = [I_m 0]`, i.e.
/// `[I_m 0] I_L^+`.
pub fn left_inverse_gain(model: &StateSpaceModel, delay: usize, tol: f64) -> Result<DMatrix<f64>> {
    model.require_left_invertible_shape()?;
    let inv = invertibility_matrix(model, delay);
    let target = first_block_selector(model.m(), delay);
    let gain = &target * truncated_pinv(&inv, tol)?;
    let residual = (&gain * &inv - &target).norm();
    if residual > GAIN_RESIDUAL_TOL {
        return Err(Error::NoLeftInverse { delay, residual });
    }
    Ok(gain)
}

/// Minimum-norm `P` with `P I_L = [I_m 0]` and `P O_L = 0`. Such a gain
/// exists exactly when the system is strongly observable at this delay;
/// the resulting inverse reconstructs the input from any initial state.
pub fn output_nulling_gain(
    model: &StateSpaceModel,
    delay: usize,
    tol: f64,
) -> Result<DMatrix<f64>> {
    model.require_left_invertible_shape()?;
    let (n, m) = (model.n(), model.m());
    let data = hstack(&[
        &observability_matrix(model, delay),
        &invertibility_matrix(model, delay),
    ]);
    let mut target: DMatrix<f64> = DMatrix::zeros(m, n + (delay + 1) * m);
    target.view_mut((0, n), (m, m)).fill_with_identity();
    let gain = &target * truncated_pinv(&data, tol)?;
    let residual = (&gain * &data - &target).norm();
    if residual > GAIN_RESIDUAL_TOL {
        return Err(Error::NoLeftInverse { delay, residual });
    }
    Ok(gain)
}

/// Inverse system driven by stacked outputs `y_{k:k+L}`:
/// `x+ = Ã x + B̃ y_{k:k+L}`, `u = C̃ x + D̃ y_{k:k+L}`.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseSystemModel {
    pub a_tilde: DMatrix<f64>,
    pub b_tilde: DMatrix<f64>,
    pub c_tilde: DMatrix<f64>,
    pub d_tilde: DMatrix<f64>,
    pub delay: usize,
}

impl InverseSystemModel {
    /// Width of one stacked output window, `p(L+1)`.
    pub fn window_len(&self) -> usize {
        self.b_tilde.ncols()
    }
}

/// `Ã = A - B P O_L`, `B̃ = B P`, `C̃ = -P O_L`, `D̃ = P`.
pub fn inverse_system(
    model: &StateSpaceModel,
    gain: &DMatrix<f64>,
    delay: usize,
) -> Result<InverseSystemModel> {
    model.require_left_invertible_shape()?;
    let (m, p) = (model.m(), model.p());
    if gain.shape() != (m, (delay + 1) * p) {
        return Err(Error::InvalidInput(format!(
            "gain has shape {:?}, expected {:?}",
            gain.shape(),
            (m, (delay + 1) * p)
        )));
    }
    let inv = invertibility_matrix(model, delay);
    let residual = (gain * &inv - first_block_selector(m, delay)).norm();
    if residual > GAIN_RESIDUAL_TOL {
        return Err(Error::InvalidGain { residual });
    }
    let p_obs = gain * observability_matrix(model, delay);
    Ok(InverseSystemModel {
        a_tilde: model.a() - model.b() * &p_obs,
        b_tilde: model.b() * gain,
        c_tilde: -p_obs,
        d_tilde: gain.clone(),
        delay,
    })
}

/// Runs the inverse system from `x0_hat` over sliding output windows and
/// returns `û_k` for `k = 0 .. outputs.len() - L - 1`.
pub fn model_based_reconstruct(
    inv: &InverseSystemModel,
    x0_hat: &DVector<f64>,
    outputs: &[DVector<f64>],
) -> Result<Vec<DVector<f64>>> {
    let delay = inv.delay;
    if outputs.len() < delay + 1 {
        return Err(Error::InvalidInput(format!(
            "need at least {} outputs, got {}",
            delay + 1,
            outputs.len()
        )));
    }
    if x0_hat.len() != inv.a_tilde.nrows() {
        return Err(Error::InvalidInput(format!(
            "initial state has length {}, expected {}",
            x0_hat.len(),
            inv.a_tilde.nrows()
        )));
    }
    let mut x = x0_hat.clone();
    let mut estimates = Vec::with_capacity(outputs.len() - delay);
    for k in 0..outputs.len() - delay {
        let window = stack_vectors(&outputs[k..=k + delay]);
        if window.len() != inv.window_len() {
            return Err(Error::InvalidInput("output dimension mismatch".into()));
        }
        estimates.push(&inv.c_tilde * &x + &inv.d_tilde * &window);
        x = &inv.a_tilde * &x + &inv.b_tilde * &window;
    }
    Ok(estimates)
}

/// Smallest `L <= 2n` at which `u_k` is fixed by `y_{k:k+L}` alone,
/// i.e. `[0 I_m 0]` lies in the row space of `[O_L I_L]`. Exists exactly
/// when the system has no invariant zeros.
pub fn strong_observability_delay(model: &StateSpaceModel, tol: f64) -> Result<Option<usize>> {
    let (n, m) = (model.n(), model.m());
    if model.p() < m {
        return Ok(None);
    }
    for delay in 0..=n + n.max(1) {
        let joint = hstack(&[
            &observability_matrix(model, delay),
            &invertibility_matrix(model, delay),
        ]);
        let mut target = DMatrix::zeros(m, n + (delay + 1) * m);
        target.view_mut((0, n), (m, m)).fill_with_identity();
        let stacked = vstack(&[&joint, &target]);
        if numerical_rank(&stacked, tol)? == numerical_rank(&joint, tol)? {
            return Ok(Some(delay));
        }
    }
    Ok(None)
}

/// True iff the system is strongly observable (has no invariant zeros).
pub fn strong_observability_check(model: &StateSpaceModel, tol: f64) -> Result<bool> {
    Ok(strong_observability_delay(model, tol)?.is_some())
}
