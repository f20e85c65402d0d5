//! Fixtures shared by the benchmarks.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use uirecon_core::lti::inherent_delay;
use uirecon_core::{partition_data, simulate, ExampleSystem, HankelBundle, StateSpaceModel};

pub fn gaussian_signal(seed: u64, len: usize, dim: usize) -> Vec<DVector<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len)
        .map(|_| DVector::from_fn(dim, |_, _| StandardNormal.sample(&mut rng)))
        .collect()
}

/// Offline Hankel data for one of the example systems with `columns`
/// data columns and `past` past blocks.
pub fn example_bundle(
    system: ExampleSystem,
    past: usize,
    columns: usize,
    seed: u64,
) -> (StateSpaceModel, HankelBundle) {
    let model = system.build().expect("example system");
    let delay = inherent_delay(&model, model.n(), 1e-8)
        .expect("delay search")
        .expect("left invertible");
    let u = gaussian_signal(seed, columns + past + delay, model.m());
    let traj = simulate(&model, &DVector::zeros(model.n()), &u).expect("simulation");
    let bundle = partition_data(&u, &traj.outputs, past, delay).expect("partition");
    (model, bundle)
}
