//! Fixed two-input, two-output, four-state benchmark systems that differ
//! only in their invariant-zero configuration.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use super::model::StateSpaceModel;
use super::zeros::{invariant_zeros, is_minimal};
use crate::error::{Error, Result};

const ZERO_MATCH_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExampleSystem {
    /// Invariant zeros at 0.7 and 0.8.
    StableZeros,
    /// Strongly observable: no invariant zeros.
    NoZeros,
    /// An invariant zero at 1.25.
    UnstableZero,
}

impl ExampleSystem {
    pub const ALL: [ExampleSystem; 3] = [
        ExampleSystem::StableZeros,
        ExampleSystem::NoZeros,
        ExampleSystem::UnstableZero,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExampleSystem::StableZeros => "stable-zeros",
            ExampleSystem::NoZeros => "no-zeros",
            ExampleSystem::UnstableZero => "unstable-zero",
        }
    }

    /// The zeros the model is built to have. For `UnstableZero` the listed
    /// zero must be contained in the zero set.
    pub fn expected_zeros(self) -> &'static [f64] {
        match self {
            ExampleSystem::StableZeros => &[0.7, 0.8],
            ExampleSystem::NoZeros => &[],
            ExampleSystem::UnstableZero => &[1.25],
        }
    }

    fn raw(self) -> StateSpaceModel {
        const D: [f64; 4] = [0.0; 4];
        let shared_a = [
            0.25, 0.25, 0.0, 0.5, //
            0.5, 0.0, 0.0, 0.25, //
            -0.25, -0.25, 0.0, 0.0, //
            0.25, 0.25, 0.0, 0.0,
        ];
        let built = match self {
            ExampleSystem::StableZeros => StateSpaceModel::from_rows(
                (4, 2, 2),
                &[
                    0.5, 1.0, 0.0, 0.0, //
                    0.0, 0.6, 0.0, 0.0, //
                    0.0, 0.0, 0.3, 1.0, //
                    0.0, 0.0, 0.0, 0.4,
                ],
                &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0],
                &[-1.0, 5.0, 0.0, 0.0, 0.0, 0.0, -1.0, 2.0],
                &D,
            ),
            ExampleSystem::NoZeros => StateSpaceModel::from_rows(
                (4, 2, 2),
                &shared_a,
                &[0.0, -1.0, 0.0, 0.0, 0.0, 1.0, -1.0, 0.0],
                &[1.0, -1.0, 0.0, 0.0, 1.0, 0.0, -1.0, 0.0],
                &D,
            ),
            ExampleSystem::UnstableZero => StateSpaceModel::from_rows(
                (4, 2, 2),
                &shared_a,
                &[2.0, -2.0, -1.0, 2.0, 2.0, 0.0, 0.0, -1.0],
                &[2.0, 1.0, 1.0, -2.0, 0.0, -1.0, -2.0, -2.0],
                &D,
            ),
        };
        built.expect("benchmark matrices are well formed")
    }

    /// The model, after confirming minimality and the zero configuration.
    pub fn build(self) -> Result<StateSpaceModel> {
        let model = self.raw();
        if !is_minimal(&model, 1e-8)? {
            return Err(Error::InvalidInput(format!("{self} is not minimal")));
        }
        let zeros = invariant_zeros(&model)?;
        let near =
            |target: f64, z: &Complex64| (z - Complex64::new(target, 0.0)).norm() <= ZERO_MATCH_TOL;
        let expected = self.expected_zeros();
        let ok = match self {
            ExampleSystem::UnstableZero => {
                expected.iter().all(|&t| zeros.iter().any(|z| near(t, z)))
            }
            _ => {
                zeros.len() == expected.len()
                    && expected.iter().all(|&t| zeros.iter().any(|z| near(t, z)))
            }
        };
        if !ok {
            return Err(Error::InvalidInput(format!(
                "{self} has zeros {zeros:?}, expected {expected:?}"
            )));
        }
        Ok(model)
    }
}

impl fmt::Display for ExampleSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExampleSystem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        match key.as_str() {
            "stablezeros" => Ok(ExampleSystem::StableZeros),
            "nozeros" => Ok(ExampleSystem::NoZeros),
            "unstablezero" | "unstablezeros" => Ok(ExampleSystem::UnstableZero),
            _ => Err(Error::InvalidInput(format!("unknown system '{s}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_systems_validate() {
        for sys in ExampleSystem::ALL {
            let model = sys.build().unwrap();
            assert_eq!((model.n(), model.m(), model.p()), (4, 2, 2));
        }
    }

    #[test]
    fn names_round_trip() {
        for sys in ExampleSystem::ALL {
            assert_eq!(sys.name().parse::<ExampleSystem>().unwrap(), sys);
        }
        assert_eq!(
            "StableZeros".parse::<ExampleSystem>().unwrap(),
            ExampleSystem::StableZeros
        );
        assert!("bogus".parse::<ExampleSystem>().is_err());
    }
}
