//! End-to-end studies: compile, simulate, measure, score.

use crate::ansatz::{build_circuit, AngleVector, AnsatzSpec};
use crate::error::{Error, Result};
use crate::ising::SkInstance;
use crate::metrics::{approx_ratio, sample_mean, EnergySamples};
use crate::rng::{self, derive_seed, tags};
use crate::sim::{run_noisy, NoiseModel};

use super::tpe::{Observation, Tpe, TpeConfig};
use super::{evaluate_batch, random_search, Evaluation, SearchSpace, Study, TrialRequest};

/// Angle value of the fixed first TPE trial.
pub const TPE_INITIAL_ANGLE: f64 = 0.1;

#[derive(Clone, Debug, PartialEq)]
pub enum Strategy {
    /// `angle_sets × orderings_used` Cartesian trials.
    Random { angle_sets: usize, orderings_used: usize },
    /// `trials` sequential suggestions, `batch` evaluated at a time.
    Tpe { trials: usize, batch: usize, config: TpeConfig },
}

#[derive(Clone, Debug)]
pub struct StudyConfig {
    pub instance: SkInstance,
    /// Ground energy; without it trials carry no AR.
    pub c_min: Option<i64>,
    pub spec: AnsatzSpec,
    pub space: SearchSpace,
    pub strategy: Strategy,
    pub shots: usize,
    pub noise: NoiseModel,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct TrialOutcome {
    pub samples: EnergySamples,
    pub mean_energy: f64,
    pub ar: Option<f64>,
}

/// Runs one circuit evaluation: build, simulate `shots` shots, unpermute and
/// score. Deterministic in `seed`.
pub fn evaluate_trial(
    config: &StudyConfig,
    angles: &AngleVector,
    ordering_index: usize,
    seed: u64,
) -> Result<TrialOutcome> {
    let ordering = config
        .space
        .orderings
        .get(ordering_index)
        .ok_or_else(|| Error::invalid(format!("ordering index {ordering_index} out of range")))?;
    let (circuit, _) = build_circuit(&config.instance, &config.spec, ordering, angles)?;
    let shots = run_noisy(&circuit, &config.noise, config.shots, seed)?;
    let samples = shots.energies(&config.instance, circuit.qubit_map())?;
    let mean_energy = sample_mean(&samples);
    let ar = config.c_min.map(|c| approx_ratio(mean_energy, c)).transpose()?;
    Ok(TrialOutcome { samples, mean_energy, ar })
}

fn validate(config: &StudyConfig) -> Result<()> {
    config.spec.validate()?;
    config.noise.validate()?;
    if config.shots == 0 {
        return Err(Error::invalid("shots must be >= 1"));
    }
    if config.space.dims() != 2 * config.spec.p {
        return Err(Error::LengthMismatch { expected: 2 * config.spec.p, got: config.space.dims() });
    }
    if let Some(o) = config.space.orderings.iter().find(|o| o.n() != config.spec.n) {
        return Err(Error::LengthMismatch { expected: config.spec.n, got: o.n() });
    }
    Ok(())
}

pub fn run_study(config: &StudyConfig) -> Result<Study> {
    validate(config)?;
    let eval = |req: &TrialRequest| -> Result<Evaluation> {
        let angles = AngleVector::from_flat(&req.params)?;
        let outcome = evaluate_trial(config, &angles, req.ordering_index, req.seed)?;
        Ok(Evaluation { objective: outcome.mean_energy, ar: outcome.ar })
    };
    match &config.strategy {
        Strategy::Random { angle_sets, orderings_used } => {
            random_search(&config.space, *angle_sets, *orderings_used, eval, config.seed)
        }
        Strategy::Tpe { trials, batch, config: tpe } => {
            tpe_search(&config.space, *trials, *batch, Tpe::new(*tpe), eval, config.seed)
        }
    }
}

/// Sequential TPE with batches of concurrent evaluations. Inside a batch,
/// suggestions already made are imputed at the median observed objective.
pub fn tpe_search<F>(space: &SearchSpace, trials: usize, batch: usize, tpe: Tpe, eval_fn: F, seed: u64) -> Result<Study>
where
    F: Fn(&TrialRequest) -> Result<Evaluation> + Sync,
{
    if trials == 0 || batch == 0 {
        return Err(Error::invalid("TPE budgets must be >= 1"));
    }
    let mut done = Vec::with_capacity(trials);
    let mut history: Vec<Observation> = Vec::with_capacity(trials);
    while done.len() < trials {
        let size = batch.min(trials - done.len());
        let liar = median(history.iter().map(|o| o.objective));
        let mut pending: Vec<Observation> = Vec::new();
        let mut requests = Vec::with_capacity(size);
        for _ in 0..size {
            let trial_index = done.len() + requests.len();
            let (params, ordering_index) = if trial_index == 0 {
                (vec![TPE_INITIAL_ANGLE; space.dims()], 0)
            } else {
                let mut rng = rng::stream(seed, &[tags::TPE, trial_index as u64]);
                let mut view = history.clone();
                view.extend(pending.iter().cloned());
                let s = tpe.suggest(&view, space, &mut rng);
                (s.params, s.category)
            };
            if let Some(l) = liar {
                pending.push(Observation { params: params.clone(), category: ordering_index, objective: l });
            }
            requests.push(TrialRequest {
                trial_index,
                params,
                ordering_index,
                seed: derive_seed(seed, &[tags::TRIALS, trial_index as u64]),
            });
        }
        for trial in evaluate_batch(&requests, &eval_fn)? {
            history.push(Observation {
                params: trial.angles().flatten(),
                category: trial.ordering_index,
                objective: trial.objective,
            });
            done.push(trial);
        }
    }
    Study::new(done)
}

fn median(values: impl Iterator<Item = f64>) -> Option<f64> {
    let mut v: Vec<f64> = values.collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) })
}
