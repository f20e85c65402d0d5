#![allow(dead_code)]

pub mod kkt;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use uirecon_core::lti::inherent_delay;
use uirecon_core::{
    build_gains, partition_data, simulate, EstimatorGains, ExampleSystem, HankelBundle,
    StateSpaceModel, ToleranceSet,
};

pub const PAST: usize = 10;
pub const COLUMNS: usize = 500;

pub fn gaussian(rng: &mut ChaCha8Rng, len: usize, dim: usize) -> Vec<DVector<f64>> {
    (0..len).map(|_| gaussian_vec(rng, dim)).collect()
}

pub fn gaussian_vec(rng: &mut ChaCha8Rng, dim: usize) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| StandardNormal.sample(rng))
}

pub struct Fixture {
    pub model: StateSpaceModel,
    pub bundle: HankelBundle,
    pub gains: EstimatorGains,
    pub rng: ChaCha8Rng,
}

pub fn fixture(system: ExampleSystem, seed: u64) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let model = system.build().unwrap();
    let delay = inherent_delay(&model, model.n(), 1e-8).unwrap().unwrap();
    let u = gaussian(&mut rng, COLUMNS + PAST + delay, model.m());
    let traj = simulate(&model, &DVector::zeros(model.n()), &u).unwrap();
    let bundle = partition_data(&u, &traj.outputs, PAST, delay).unwrap();
    let gains = build_gains(&bundle, ToleranceSet::default()).unwrap();
    Fixture {
        model,
        bundle,
        gains,
        rng,
    }
}
