//! End-to-end experiments: data generation or loading, excitation check,
//! gain construction, online estimation.
//!
//! Randomness comes from one ChaCha8 generator per purpose, all keyed by
//! the config seed: stream 0 for offline data, stream 1 for the online
//! trajectory, stream 2 for the initial guess. Changing the horizon
//! therefore never changes the offline data.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use uirecon_core::linalg::{spectral_norm, stack_vectors};
use uirecon_core::lti::{
    inherent_delay, inverse_system, left_inverse_gain, model_based_reconstruct, output_nulling_gain,
};
use uirecon_core::{
    build_gains, convergence_certificate, partition_data, require_persistent_excitation, run,
    simulate, EstimatorGains, HankelBundle, StateSpaceModel, Trajectory,
};

use crate::config::{DelayChoice, InitGuess, ScenarioConfig, SystemChoice};
use crate::io::load_trajectory;
use crate::report::{CertificateSummary, ReportMetadata, RunReport};
use crate::CliError;

const OFFLINE_STREAM: u64 = 0;
const ONLINE_STREAM: u64 = 1;
const GUESS_STREAM: u64 = 2;

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn gaussian(rng: &mut ChaCha8Rng, len: usize, dim: usize, scale: f64) -> Vec<DVector<f64>> {
    (0..len)
        .map(|_| {
            DVector::from_fn(dim, |_, _| {
                let z: f64 = StandardNormal.sample(&mut *rng);
                scale * z
            })
        })
        .collect()
}

/// System, offline data and online trajectory of a scenario.
#[derive(Debug, Clone)]
pub struct PreparedScenario {
    pub name: String,
    pub model: Option<StateSpaceModel>,
    pub n: usize,
    pub m: usize,
    pub p: usize,
    pub delay: usize,
    pub offline: Trajectory,
    /// Online trajectory; its inputs are the ground truth.
    pub online: Trajectory,
    /// Initial state of the online trajectory when simulated.
    pub online_x0: Option<DVector<f64>>,
}

fn resolve_delay(
    config: &ScenarioConfig,
    model: Option<&StateSpaceModel>,
) -> Result<usize, CliError> {
    match (config.delay, model) {
        (DelayChoice::Fixed(l), _) => Ok(l),
        (DelayChoice::Auto, Some(model)) => {
            let l_max = model.n() * model.m().max(1);
            inherent_delay(model, l_max, config.tolerances.rank_tol)?.ok_or_else(|| {
                CliError::Config(format!("system has no left inverse with delay <= {l_max}"))
            })
        }
        (DelayChoice::Auto, None) => Err(CliError::Config("L = 'auto' needs a model".into())),
    }
}

fn check_past(config: &ScenarioConfig, n: usize) -> Result<(), CliError> {
    if config.past < n {
        return Err(CliError::Config(format!(
            "N = {} is smaller than the state dimension {n}",
            config.past
        )));
    }
    Ok(())
}

/// Build or load everything the estimator consumes.
pub fn prepare(config: &ScenarioConfig) -> Result<PreparedScenario, CliError> {
    config.validate()?;
    match config.system {
        SystemChoice::Example(sys) => {
            let model = sys.build()?;
            let (n, m, p) = (model.n(), model.m(), model.p());
            check_past(config, n)?;
            let delay = resolve_delay(config, Some(&model))?;
            let mut rng = rng_for(config.seed, OFFLINE_STREAM);
            let x0 =
                DVector::from_vec(gaussian(&mut rng, n, 1, 1.0).iter().map(|v| v[0]).collect());
            let u = gaussian(&mut rng, config.data_length, m, 1.0);
            let offline = simulate(&model, &x0, &u)?;

            let mut rng = rng_for(config.seed, ONLINE_STREAM);
            let x0 =
                DVector::from_vec(gaussian(&mut rng, n, 1, 1.0).iter().map(|v| v[0]).collect());
            let u = gaussian(&mut rng, config.horizon + config.past + delay, m, 1.0);
            let online = simulate(&model, &x0, &u)?;
            Ok(PreparedScenario {
                name: sys.name().to_string(),
                model: Some(model),
                n,
                m,
                p,
                delay,
                offline,
                online,
                online_x0: Some(x0),
            })
        }
        SystemChoice::FromFile => {
            let n = config.state_dim.expect("validated");
            check_past(config, n)?;
            let delay = resolve_delay(config, None)?;
            let offline = load_trajectory(config.data_file.as_deref().expect("validated"))?;
            let mut online = load_trajectory(config.online_file.as_deref().expect("validated"))?;
            let dims = |t: &Trajectory| (t.input_dim().unwrap_or(0), t.output_dim().unwrap_or(0));
            let (m, p) = dims(&offline);
            if dims(&online) != (m, p) {
                return Err(CliError::Config(format!(
                    "online file has (m, p) = {:?}, offline file has {:?}",
                    dims(&online),
                    (m, p)
                )));
            }
            let wanted = config.horizon + config.past + delay;
            online.inputs.truncate(wanted);
            online.outputs.truncate(wanted);
            online.states = None;
            Ok(PreparedScenario {
                name: "from-file".into(),
                model: None,
                n,
                m,
                p,
                delay,
                offline,
                online,
                online_x0: None,
            })
        }
    }
}

/// Gains plus the data they came from.
#[derive(Debug, Clone)]
pub struct BuiltEstimator {
    pub bundle: HankelBundle,
    pub gains: EstimatorGains,
    pub pe_order: usize,
    pub pe_rank: usize,
}

/// Check excitation of order `n + N + L + 1`, partition and build gains.
pub fn build_estimator(
    config: &ScenarioConfig,
    prepared: &PreparedScenario,
) -> Result<BuiltEstimator, CliError> {
    let pe_order = prepared.n + config.past + prepared.delay + 1;
    let pe_rank = require_persistent_excitation(&prepared.offline.inputs, pe_order, config.pe_tol)?;
    let bundle = partition_data(
        &prepared.offline.inputs,
        &prepared.offline.outputs,
        config.past,
        prepared.delay,
    )?;
    let gains = build_gains(&bundle, config.tolerances.to_core())?;
    Ok(BuiltEstimator {
        bundle,
        gains,
        pe_order,
        pe_rank,
    })
}

fn summarize(built: &BuiltEstimator) -> Result<CertificateSummary, CliError> {
    let cert = convergence_certificate(&built.gains)?;
    let m_u_norm = spectral_norm(&built.gains.m_u)?;
    Ok(CertificateSummary::new(&cert, &built.gains, m_u_norm))
}

pub fn certify(config: &ScenarioConfig) -> Result<CertificateSummary, CliError> {
    let prepared = prepare(config)?;
    let built = build_estimator(config, &prepared)?;
    summarize(&built)
}

/// Stacked initial guess `û_{0:N-1}` of length `len = mN`.
pub fn initial_guess(config: &ScenarioConfig, len: usize) -> DVector<f64> {
    match config.init_guess {
        InitGuess::Zero => DVector::zeros(len),
        InitGuess::SeededRandom { scale } => {
            let mut rng = rng_for(config.seed, GUESS_STREAM);
            stack_vectors(&gaussian(&mut rng, len, 1, scale))
        }
    }
}

pub fn run_scenario(config: &ScenarioConfig) -> Result<RunReport, CliError> {
    let prepared = prepare(config)?;
    let built = build_estimator(config, &prepared)?;
    let certificate = summarize(&built)?;
    let guess = initial_guess(config, built.gains.dims.past_len());
    let truth = &prepared.online.inputs;
    let out = run(
        &built.gains,
        Some(&guess),
        &prepared.online.outputs,
        Some(truth),
    )?;
    let start = out.start_step;
    let to_rows = |vs: &[DVector<f64>]| vs.iter().map(|v| v.iter().copied().collect()).collect();
    let true_inputs: Vec<Vec<f64>> = to_rows(&truth[start..start + out.len()]);
    Ok(RunReport {
        metadata: ReportMetadata {
            config: config.clone(),
            system: prepared.name.clone(),
            n: prepared.n,
            m: prepared.m,
            p: prepared.p,
            delay: prepared.delay,
            data_columns: built.bundle.columns(),
            pe_order: built.pe_order,
            pe_rank: built.pe_rank,
            estimation_start_step: start,
            crate_version: env!("CARGO_PKG_VERSION"),
        },
        certificate,
        estimates: to_rows(&out.estimates),
        true_inputs: Some(true_inputs),
        error_norms: out.error_norms,
        residual_norms: out.residual_norms,
        constraint_residuals: out.constraint_residuals,
    })
}

/// `count` independent scenarios with seeds `seed, seed + 1, ...`, run
/// concurrently. Results are in seed order.
pub fn run_batch(config: &ScenarioConfig, count: usize) -> Vec<Result<RunReport, CliError>> {
    (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let mut cfg = config.clone();
            cfg.seed = config.seed.wrapping_add(i);
            run_scenario(&cfg)
        })
        .collect()
}

/// Which model-based left inverse the oracle uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OracleGain {
    /// `P = [I 0] I_L⁺`.
    MinNorm,
    /// `P` with `P O_L = 0`; needs a system without invariant zeros.
    OutputNulling,
}

/// Model-based reconstruction of the online inputs, starting from step 0.
#[derive(Debug, Clone)]
pub struct OracleRun {
    pub estimates: Vec<DVector<f64>>,
    pub truth: Vec<DVector<f64>>,
    pub error_norms: Vec<f64>,
}

pub fn invert_oracle(
    config: &ScenarioConfig,
    gain: OracleGain,
    zero_state: bool,
) -> Result<OracleRun, CliError> {
    let prepared = prepare(config)?;
    let model = prepared
        .model
        .as_ref()
        .ok_or_else(|| CliError::Config("the model-based oracle needs a built-in system".into()))?;
    let tol = config.tolerances.rank_tol;
    let p = match gain {
        OracleGain::MinNorm => left_inverse_gain(model, prepared.delay, tol)?,
        OracleGain::OutputNulling => output_nulling_gain(model, prepared.delay, tol)?,
    };
    let inv = inverse_system(model, &p, prepared.delay)?;
    let x0 = if zero_state {
        DVector::zeros(prepared.n)
    } else {
        prepared.online_x0.clone().expect("simulated scenario")
    };
    let estimates = model_based_reconstruct(&inv, &x0, &prepared.online.outputs)?;
    let truth = prepared.online.inputs[..estimates.len()].to_vec();
    let error_norms = estimates
        .iter()
        .zip(&truth)
        .map(|(e, u)| (e - u).norm())
        .collect();
    Ok(OracleRun {
        estimates,
        truth,
        error_norms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use uirecon_core::ExampleSystem;

    fn cfg(sys: ExampleSystem) -> ScenarioConfig {
        ScenarioConfig {
            system: SystemChoice::Example(sys),
            horizon: 40,
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn report_lengths_agree() {
        let report = run_scenario(&cfg(ExampleSystem::StableZeros)).unwrap();
        assert_eq!(report.len(), 40);
        assert_eq!(report.residual_norms.len(), 40);
        assert_eq!(report.error_norms.as_ref().unwrap().len(), 40);
        assert_eq!(report.metadata.estimation_start_step, 10);
        assert_eq!(report.metadata.delay, 1);
    }

    #[test]
    fn short_past_window_is_rejected() {
        let config = ScenarioConfig {
            past: 3,
            ..cfg(ExampleSystem::NoZeros)
        };
        assert!(matches!(run_scenario(&config), Err(CliError::Config(_))));
    }

    #[test]
    fn too_little_data_fails_excitation_check() {
        let config = ScenarioConfig {
            data_length: 40,
            ..cfg(ExampleSystem::StableZeros)
        };
        match run_scenario(&config) {
            Err(CliError::Core(uirecon_core::Error::NotPersistentlyExciting {
                order,
                required,
                achieved,
            })) => {
                assert_eq!(order, 16);
                assert_eq!(required, 32);
                assert!(achieved < required);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn horizon_does_not_change_offline_data() {
        let a = prepare(&cfg(ExampleSystem::StableZeros)).unwrap();
        let b = prepare(&ScenarioConfig {
            horizon: 90,
            ..cfg(ExampleSystem::StableZeros)
        })
        .unwrap();
        assert_eq!(a.offline, b.offline);
        assert_eq!(a.online.inputs[..], b.online.inputs[..a.online.len()]);
    }

    #[test]
    fn batch_uses_consecutive_seeds() {
        let config = cfg(ExampleSystem::NoZeros);
        let batch = run_batch(&config, 3);
        for (i, report) in batch.into_iter().enumerate() {
            let report = report.unwrap();
            assert_eq!(report.metadata.config.seed, config.seed + i as u64);
            let single = run_scenario(&ScenarioConfig {
                seed: config.seed + i as u64,
                ..config.clone()
            })
            .unwrap();
            assert_eq!(report, single);
        }
    }

    #[test]
    fn oracle_with_true_state_is_exact() {
        let run =
            invert_oracle(&cfg(ExampleSystem::StableZeros), OracleGain::MinNorm, false).unwrap();
        assert!(run.error_norms.iter().all(|e| *e <= 1e-8));
        assert!(invert_oracle(
            &cfg(ExampleSystem::StableZeros),
            OracleGain::OutputNulling,
            false
        )
        .is_err());
    }
}
