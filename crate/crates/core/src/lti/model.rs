use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::ensure_finite;

/// Discrete-time LTI system `x+ = A x + B u`, `y = C x + D u`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceModel {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    c: DMatrix<f64>,
    d: DMatrix<f64>,
}

impl StateSpaceModel {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>, d: DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        let m = b.ncols();
        let p = c.nrows();
        if n == 0 || m == 0 || p == 0 {
            return Err(Error::InvalidInput(
                "state, input and output dimensions must be positive".into(),
            ));
        }
        if a.ncols() != n || b.nrows() != n || c.ncols() != n || d.shape() != (p, m) {
            return Err(Error::InvalidInput(format!(
                "inconsistent dimensions: A {:?}, B {:?}, C {:?}, D {:?}",
                a.shape(),
                b.shape(),
                c.shape(),
                d.shape()
            )));
        }
        for (name, mat) in [("A", &a), ("B", &b), ("C", &c), ("D", &d)] {
            ensure_finite(mat, name)?;
        }
        Ok(Self { a, b, c, d })
    }

    /// Build from row-major slices.
    pub fn from_rows(
        (n, m, p): (usize, usize, usize),
        a: &[f64],
        b: &[f64],
        c: &[f64],
        d: &[f64],
    ) -> Result<Self> {
        let check = |name: &str, data: &[f64], len: usize| {
            if data.len() == len {
                Ok(())
            } else {
                Err(Error::InvalidInput(format!(
                    "{name} has {} entries, expected {len}",
                    data.len()
                )))
            }
        };
        check("A", a, n * n)?;
        check("B", b, n * m)?;
        check("C", c, p * n)?;
        check("D", d, p * m)?;
        Self::new(
            DMatrix::from_row_slice(n, n, a),
            DMatrix::from_row_slice(n, m, b),
            DMatrix::from_row_slice(p, n, c),
            DMatrix::from_row_slice(p, m, d),
        )
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }
    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }
    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }
    pub fn d(&self) -> &DMatrix<f64> {
        &self.d
    }

    /// State dimension.
    pub fn n(&self) -> usize {
        self.a.nrows()
    }
    /// Input dimension.
    pub fn m(&self) -> usize {
        self.b.ncols()
    }
    /// Output dimension.
    pub fn p(&self) -> usize {
        self.c.nrows()
    }

    pub(crate) fn require_left_invertible_shape(&self) -> Result<()> {
        if self.p() < self.m() {
            Err(Error::UnsupportedShape(format!(
                "left inversion needs p >= m, got p = {}, m = {}",
                self.p(),
                self.m()
            )))
        } else {
            Ok(())
        }
    }
}

/// Paired input/output samples, optionally with the state sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub inputs: Vec<DVector<f64>>,
    pub outputs: Vec<DVector<f64>>,
    pub states: Option<Vec<DVector<f64>>>,
}

impl Trajectory {
    pub fn new(inputs: Vec<DVector<f64>>, outputs: Vec<DVector<f64>>) -> Result<Self> {
        let traj = Self {
            inputs,
            outputs,
            states: None,
        };
        traj.validate()?;
        Ok(traj)
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn input_dim(&self) -> Option<usize> {
        self.inputs.first().map(|u| u.len())
    }

    pub fn output_dim(&self) -> Option<usize> {
        self.outputs.first().map(|y| y.len())
    }

    pub fn validate(&self) -> Result<()> {
        if self.inputs.len() != self.outputs.len() {
            return Err(Error::InvalidInput(format!(
                "{} inputs but {} outputs",
                self.inputs.len(),
                self.outputs.len()
            )));
        }
        if let Some(states) = &self.states {
            if states.len() != self.inputs.len() {
                return Err(Error::InvalidInput(format!(
                    "{} states but {} inputs",
                    states.len(),
                    self.inputs.len()
                )));
            }
        }
        let same_len = |vs: &[DVector<f64>], what: &str| match vs.first() {
            Some(first) if vs.iter().any(|v| v.len() != first.len()) => Err(Error::InvalidInput(
                format!("{what} samples have differing lengths"),
            )),
            _ => Ok(()),
        };
        same_len(&self.inputs, "input")?;
        same_len(&self.outputs, "output")
    }
}

/// Simulate `model` from `x0` under `inputs`, recording states.
pub fn simulate(
    model: &StateSpaceModel,
    x0: &DVector<f64>,
    inputs: &[DVector<f64>],
) -> Result<Trajectory> {
    if x0.len() != model.n() {
        return Err(Error::InvalidInput(format!(
            "initial state has length {}, expected {}",
            x0.len(),
            model.n()
        )));
    }
    if let Some((k, u)) = inputs
        .iter()
        .enumerate()
        .find(|(_, u)| u.len() != model.m())
    {
        return Err(Error::InvalidInput(format!(
            "input {k} has length {}, expected {}",
            u.len(),
            model.m()
        )));
    }
    let mut x = x0.clone();
    let mut states = Vec::with_capacity(inputs.len());
    let mut outputs = Vec::with_capacity(inputs.len());
    for u in inputs {
        outputs.push(model.c() * &x + model.d() * u);
        let next = model.a() * &x + model.b() * u;
        states.push(std::mem::replace(&mut x, next));
    }
    Ok(Trajectory {
        inputs: inputs.to_vec(),
        outputs,
        states: Some(states),
    })
}
