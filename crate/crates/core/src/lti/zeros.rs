//! Invariant zeros of `(A, B, C, D)`: the `z` at which the Rosenbrock
//! matrix `[A - zI, B; C, D]` loses column rank.
//!
//! Candidates come from the zero dynamics: the largest output-nulling
//! subspace `V` is computed by the usual fixed-point recursion, the unique
//! (for left-invertible systems) output-nulling feedback is solved on `V`,
//! and the spectrum of the restricted closed-loop map is taken. Each
//! candidate is then confirmed by a direct rank test on the Rosenbrock
//! matrix before it is reported.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::inversion::observability_matrix;
use super::model::StateSpaceModel;
use crate::error::{Error, Result};
use crate::linalg::{
    complex_singular_values, eigenvalues, hstack, nullspace_basis, numerical_rank,
    orthonormal_complement, row_space_basis, spectral_norm, truncated_pinv, vstack,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroOptions {
    /// Absolute cutoff for rank decisions and the confirming rank test
    /// (scaled by `max(1, |[A B; C D]|)` in the latter).
    pub rank_tol: f64,
    /// Candidates with modulus above this are treated as zeros at infinity.
    pub infinity_cap: f64,
    /// Zeros need `|z| < 1 - margin` to count as stable.
    pub stability_margin: f64,
}

impl Default for ZeroOptions {
    fn default() -> Self {
        Self {
            rank_tol: 1e-8,
            infinity_cap: 1e8,
            stability_margin: 1e-9,
        }
    }
}

/// Smallest singular value of `[A - zI, B; C, D]`, i.e. its distance to
/// losing full column rank.
pub fn rosenbrock_min_singular_value(model: &StateSpaceModel, z: Complex64) -> f64 {
    let (n, m, p) = (model.n(), model.m(), model.p());
    let mut r = DMatrix::<Complex64>::zeros(n + p, n + m);
    for i in 0..n {
        for j in 0..n {
            r[(i, j)] = Complex64::new(model.a()[(i, j)], 0.0);
        }
        r[(i, i)] -= z;
        for j in 0..m {
            r[(i, n + j)] = Complex64::new(model.b()[(i, j)], 0.0);
        }
    }
    for i in 0..p {
        for j in 0..n {
            r[(n + i, j)] = Complex64::new(model.c()[(i, j)], 0.0);
        }
        for j in 0..m {
            r[(n + i, n + j)] = Complex64::new(model.d()[(i, j)], 0.0);
        }
    }
    if p < m {
        return 0.0;
    }
    complex_singular_values(&r)
        .map(|s| s.last().copied().unwrap_or(0.0))
        .unwrap_or(f64::NAN)
}

/// Orthonormal basis of the largest output-nulling subspace.
fn output_nulling_subspace(model: &StateSpaceModel, tol: f64) -> Result<DMatrix<f64>> {
    let n = model.n();
    let mut basis = DMatrix::<f64>::identity(n, n);
    for _ in 0..=n {
        let perp = orthonormal_complement(&basis);
        let perp_t = perp.transpose();
        let z = vstack(&[
            &hstack(&[&(&perp_t * model.a()), &(&perp_t * model.b())]),
            &hstack(&[model.c(), model.d()]),
        ]);
        let kernel = nullspace_basis(&z, tol)?;
        let states = kernel.rows(0, n).clone_owned();
        let next = if states.ncols() == 0 {
            DMatrix::zeros(n, 0)
        } else {
            // Column space of the state part of the kernel.
            row_space_basis(&states.transpose(), tol)?
        };
        if next.ncols() == basis.ncols() {
            return Ok(next);
        }
        basis = next;
    }
    Ok(basis)
}

/// Restriction of the zero dynamics to an orthonormal basis `x` of the
/// output-nulling subspace: solves `A X + B U = X Az`, `C X + D U = 0`.
fn zero_dynamics(model: &StateSpaceModel, x: &DMatrix<f64>, tol: f64) -> Result<DMatrix<f64>> {
    let (m, p) = (model.m(), model.p());
    let r = x.ncols();
    let coeff = vstack(&[
        &hstack(&[x, &(-model.b())]),
        &hstack(&[&DMatrix::zeros(p, r), model.d()]),
    ]);
    if numerical_rank(&coeff, tol)? < r + m {
        return Err(Error::SingularPencil);
    }
    let rhs = vstack(&[&(model.a() * x), &(-(model.c() * x))]);
    let sol = truncated_pinv(&coeff, tol)? * &rhs;
    let residual = (&coeff * &sol - &rhs).norm();
    let scale = 1.0 + rhs.norm();
    if residual > 1e-6 * scale {
        return Err(Error::NoConvergence("zero dynamics solve"));
    }
    Ok(sol.rows(0, r).clone_owned())
}

fn sort_zeros(zeros: &mut [Complex64]) {
    zeros.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// Finite invariant zeros with multiplicity, sorted by real then
/// imaginary part.
pub fn invariant_zeros_with(model: &StateSpaceModel, opts: &ZeroOptions) -> Result<Vec<Complex64>> {
    model.require_left_invertible_shape()?;
    let tol = opts.rank_tol;
    let m = model.m();
    // Without full column rank of [B; D] the pencil drops rank for every z.
    if numerical_rank(&vstack(&[model.b(), model.d()]), tol)? < m {
        return Err(Error::SingularPencil);
    }
    let x = output_nulling_subspace(model, tol)?;
    if x.ncols() == 0 {
        return Ok(Vec::new());
    }
    let az = zero_dynamics(model, &x, tol)?;
    let pencil_scale = spectral_norm(&vstack(&[
        &hstack(&[model.a(), model.b()]),
        &hstack(&[model.c(), model.d()]),
    ]))?
    .max(1.0);
    let verify_tol = tol * pencil_scale;
    let mut zeros: Vec<Complex64> = eigenvalues(&az)?
        .into_iter()
        .filter(|z| z.re.is_finite() && z.im.is_finite() && z.norm() <= opts.infinity_cap)
        .map(|z| {
            if z.im.abs() <= 1e-10 * z.norm().max(1.0) {
                Complex64::new(z.re, 0.0)
            } else {
                z
            }
        })
        .filter(|&z| rosenbrock_min_singular_value(model, z) <= verify_tol)
        .collect();
    sort_zeros(&mut zeros);
    Ok(zeros)
}

/// [`invariant_zeros_with`] using default options.
pub fn invariant_zeros(model: &StateSpaceModel) -> Result<Vec<Complex64>> {
    invariant_zeros_with(model, &ZeroOptions::default())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroCategory {
    /// Strongly observable.
    NoZeros,
    /// Strongly detectable: every zero strictly inside the unit circle.
    AllStable,
    MarginalOrUnstable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroClassification {
    pub zeros: Vec<Complex64>,
    pub category: ZeroCategory,
    pub max_modulus: f64,
}

pub fn classify_zeros_with(
    model: &StateSpaceModel,
    opts: &ZeroOptions,
) -> Result<ZeroClassification> {
    let zeros = invariant_zeros_with(model, opts)?;
    let max_modulus = zeros.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let category = if zeros.is_empty() {
        ZeroCategory::NoZeros
    } else if max_modulus < 1.0 - opts.stability_margin {
        ZeroCategory::AllStable
    } else {
        ZeroCategory::MarginalOrUnstable
    };
    Ok(ZeroClassification {
        zeros,
        category,
        max_modulus,
    })
}

pub fn classify_zeros(model: &StateSpaceModel) -> Result<ZeroClassification> {
    classify_zeros_with(model, &ZeroOptions::default())
}

/// Controllable and observable, by rank of the Kalman matrices.
pub fn is_minimal(model: &StateSpaceModel, tol: f64) -> Result<bool> {
    let n = model.n();
    let mut ctrb = DMatrix::zeros(n, n * model.m());
    let mut block = model.b().clone();
    for i in 0..n {
        ctrb.view_mut((0, i * model.m()), block.shape())
            .copy_from(&block);
        block = model.a() * block;
    }
    let obs = observability_matrix(model, n - 1);
    Ok(numerical_rank(&ctrb, tol)? == n && numerical_rank(&obs, tol)? == n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lti::ExampleSystem;
    use approx::assert_relative_eq;

    #[test]
    fn first_order_zero() {
        // (z + 0.5) / (z - 0.5)
        let model = StateSpaceModel::from_rows((1, 1, 1), &[0.5], &[1.0], &[1.0], &[1.0]).unwrap();
        let zeros = invariant_zeros(&model).unwrap();
        assert_eq!(zeros.len(), 1);
        assert_relative_eq!(zeros[0].re, -0.5, epsilon = 1e-12);
        assert_relative_eq!(zeros[0].im, 0.0);
    }

    #[test]
    fn example_classes() {
        let stable = invariant_zeros(&ExampleSystem::StableZeros.build().unwrap()).unwrap();
        assert_eq!(stable.len(), 2);
        assert_relative_eq!(stable[0].re, 0.7, epsilon = 1e-10);
        assert_relative_eq!(stable[1].re, 0.8, epsilon = 1e-10);

        assert!(invariant_zeros(&ExampleSystem::NoZeros.build().unwrap())
            .unwrap()
            .is_empty());

        let unstable = invariant_zeros(&ExampleSystem::UnstableZero.build().unwrap()).unwrap();
        assert!(unstable
            .iter()
            .any(|z| (z - Complex64::new(1.25, 0.0)).norm() < 1e-10));
    }

    #[test]
    fn classification() {
        let c = classify_zeros(&ExampleSystem::StableZeros.build().unwrap()).unwrap();
        assert_eq!(c.category, ZeroCategory::AllStable);
        assert_relative_eq!(c.max_modulus, 0.8, epsilon = 1e-10);

        let c = classify_zeros(&ExampleSystem::UnstableZero.build().unwrap()).unwrap();
        assert_eq!(c.category, ZeroCategory::MarginalOrUnstable);
        assert_relative_eq!(c.max_modulus, 1.25, epsilon = 1e-10);

        let c = classify_zeros(&ExampleSystem::NoZeros.build().unwrap()).unwrap();
        assert_eq!(c.category, ZeroCategory::NoZeros);
        assert_eq!(c.max_modulus, 0.0);
    }

    #[test]
    fn marginal_zero_is_not_stable() {
        // Zero at z = 1: (z - 1) / (z - 0.5).
        let model = StateSpaceModel::from_rows((1, 1, 1), &[0.5], &[1.0], &[-0.5], &[1.0]).unwrap();
        let c = classify_zeros(&model).unwrap();
        assert_relative_eq!(c.zeros[0].re, 1.0, epsilon = 1e-12);
        assert_eq!(c.category, ZeroCategory::MarginalOrUnstable);
    }

    #[test]
    fn complex_zero_pair() {
        // y = u_{k+2} + u_k style numerator z^2 + 1 with poles at 0:
        // x1+ = x2, x2+ = u, y = x1 + u  ->  G(z) = z^-2 + 1 = (z^2 + 1)/z^2.
        let model = StateSpaceModel::from_rows(
            (2, 1, 1),
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 1.0],
            &[1.0, 0.0],
            &[1.0],
        )
        .unwrap();
        let zeros = invariant_zeros(&model).unwrap();
        assert_eq!(zeros.len(), 2);
        assert_relative_eq!(zeros[0].im, -1.0, epsilon = 1e-10);
        assert_relative_eq!(zeros[1].im, 1.0, epsilon = 1e-10);
        for z in &zeros {
            assert_relative_eq!(z.re, 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn tall_system_zero() {
        // Two outputs sharing the zero at 0.3; a third would remove it.
        let model = StateSpaceModel::from_rows((1, 1, 2), &[0.5], &[1.0], &[0.2, 0.4], &[1.0, 2.0])
            .unwrap();
        // Both channels are (z - 0.5 + 0.2)/(z - 0.5) scaled: common zero at 0.3.
        let zeros = invariant_zeros(&model).unwrap();
        assert_eq!(zeros.len(), 1);
        assert_relative_eq!(zeros[0].re, 0.3, epsilon = 1e-10);

        let no_common =
            StateSpaceModel::from_rows((1, 1, 2), &[0.5], &[1.0], &[0.2, 0.1], &[1.0, 1.0])
                .unwrap();
        assert!(invariant_zeros(&no_common).unwrap().is_empty());
    }

    #[test]
    fn wide_system_rejected() {
        let model = StateSpaceModel::from_rows((1, 2, 1), &[0.5], &[1.0, 1.0], &[1.0], &[0.0, 0.0])
            .unwrap();
        assert!(matches!(
            invariant_zeros(&model),
            Err(Error::UnsupportedShape(_))
        ));
    }

    #[test]
    fn rosenbrock_rank_drops_at_zeros() {
        let model = ExampleSystem::StableZeros.build().unwrap();
        for z in invariant_zeros(&model).unwrap() {
            assert!(rosenbrock_min_singular_value(&model, z) <= 1e-8);
        }
        assert!(rosenbrock_min_singular_value(&model, Complex64::new(0.75, 0.0)) > 1e-3);
    }

    #[test]
    fn minimality() {
        for sys in ExampleSystem::ALL {
            assert!(is_minimal(&sys.build().unwrap(), 1e-8).unwrap());
        }
        let unobservable = StateSpaceModel::from_rows(
            (2, 1, 1),
            &[0.5, 0.0, 0.0, 0.3],
            &[1.0, 1.0],
            &[1.0, 0.0],
            &[0.0],
        )
        .unwrap();
        assert!(!is_minimal(&unobservable, 1e-8).unwrap());
    }
}
