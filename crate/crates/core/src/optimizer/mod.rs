//! Parameter-setting strategies over `(angles, gate ordering)`.
//!
//! Trials are evaluated by a caller-supplied function; the optimizer only
//! sees the scalar objective (mean energy, minimised). Every trial gets a
//! seed derived from the study seed and its index, so evaluation order and
//! thread count never change the results.

mod study;
mod tpe;

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::{AngleVector, GateOrdering};
use crate::error::{Error, Result};
use crate::rng::{self, derive_seed, tags};

pub use study::{evaluate_trial, run_study, tpe_search, Strategy, StudyConfig, TrialOutcome, TPE_INITIAL_ANGLE};
pub use tpe::{tpe_suggest, Observation, Suggestion, Tpe, TpeConfig};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamRange {
    pub low: f64,
    pub high: f64,
}

impl ParamRange {
    pub fn new(low: f64, high: f64) -> Result<Self> {
        if !(low.is_finite() && high.is_finite() && low < high) {
            return Err(Error::invalid(format!("empty parameter range [{low}, {high})")));
        }
        Ok(ParamRange { low, high })
    }

    pub fn width(&self) -> f64 {
        self.high - self.low
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.low && x < self.high
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let x = self.low + rng.random::<f64>() * self.width();
        // Guard the half-open upper end against rounding.
        if x < self.high {
            x
        } else {
            self.low
        }
    }
}

/// Continuous dimensions plus one categorical gate-ordering variable.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchSpace {
    pub ranges: Vec<ParamRange>,
    pub orderings: Vec<GateOrdering>,
}

/// `γ ∈ [0, π/2)`: the period of `CPHASE(4γ)`.
pub const GAMMA_RANGE: ParamRange = ParamRange { low: 0.0, high: FRAC_PI_2 };
/// `β ∈ [0, π)`: the period of `XY(β)` and of `RX(2β)`.
pub const BETA_RANGE: ParamRange = ParamRange { low: 0.0, high: PI };

impl SearchSpace {
    pub fn new(ranges: Vec<ParamRange>, orderings: Vec<GateOrdering>) -> Result<Self> {
        if orderings.is_empty() {
            return Err(Error::invalid("search space needs at least one gate ordering"));
        }
        Ok(SearchSpace { ranges, orderings })
    }

    /// `p` gammas followed by `p` betas.
    pub fn for_ansatz(p: usize, orderings: Vec<GateOrdering>) -> Result<Self> {
        let ranges = std::iter::repeat_n(GAMMA_RANGE, p).chain(std::iter::repeat_n(BETA_RANGE, p)).collect();
        Self::new(ranges, orderings)
    }

    pub fn num_orderings(&self) -> usize {
        self.orderings.len()
    }

    pub fn dims(&self) -> usize {
        self.ranges.len()
    }

    pub fn contains(&self, params: &[f64], ordering_index: usize) -> bool {
        params.len() == self.ranges.len()
            && params.iter().zip(&self.ranges).all(|(&x, r)| r.contains(x))
            && ordering_index < self.orderings.len()
    }

    pub fn sample_params<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.ranges.iter().map(|r| r.sample(rng)).collect()
    }
}

/// `count` orderings: the identity first, then uniformly random permutations.
pub fn generate_orderings(n: usize, count: usize, seed: u64) -> Vec<GateOrdering> {
    let mut rng = rng::stream(seed, &[tags::ORDERINGS, n as u64]);
    (0..count)
        .map(|i| if i == 0 { GateOrdering::identity(n) } else { GateOrdering::random(n, &mut rng) })
        .collect()
}

/// What the optimizer asks the evaluator to run.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialRequest {
    pub trial_index: usize,
    pub params: Vec<f64>,
    pub ordering_index: usize,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    /// Minimised.
    pub objective: f64,
    pub ar: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub trial_index: usize,
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
    pub ordering_index: usize,
    pub objective: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ar: Option<f64>,
    pub seed: u64,
}

impl Trial {
    pub fn angles(&self) -> AngleVector {
        AngleVector { gammas: self.gammas.clone(), betas: self.betas.clone() }
    }

    fn from_request(request: &TrialRequest, eval: Evaluation) -> Result<Self> {
        if !eval.objective.is_finite() {
            return Err(Error::TrialFailed {
                trial_index: request.trial_index,
                message: format!("objective {} is not finite", eval.objective),
            });
        }
        let angles = AngleVector::from_flat(&request.params)?;
        Ok(Trial {
            trial_index: request.trial_index,
            gammas: angles.gammas,
            betas: angles.betas,
            ordering_index: request.ordering_index,
            objective: eval.objective,
            ar: eval.ar,
            seed: request.seed,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Study {
    trials: Vec<Trial>,
    best_index: usize,
}

impl Study {
    /// Orders trials by index and picks the best: lowest objective, ties to the
    /// smallest trial index.
    pub fn new(mut trials: Vec<Trial>) -> Result<Self> {
        if trials.is_empty() {
            return Err(Error::invalid("a study needs at least one trial"));
        }
        trials.sort_by_key(|t| t.trial_index);
        let best_index = best_position(&trials);
        Ok(Study { trials, best_index })
    }

    pub fn trials(&self) -> &[Trial] {
        &self.trials
    }

    pub fn best_index(&self) -> usize {
        self.best_index
    }

    pub fn best(&self) -> &Trial {
        &self.trials[self.best_index]
    }

    /// For each ordering used, the best AR over its trials, averaged over orderings.
    pub fn mean_ordering_best_ar(&self) -> Option<f64> {
        let mut best: std::collections::BTreeMap<usize, f64> = Default::default();
        for t in &self.trials {
            let ar = t.ar?;
            let slot = best.entry(t.ordering_index).or_insert(f64::NEG_INFINITY);
            *slot = slot.max(ar);
        }
        Some(best.values().sum::<f64>() / best.len() as f64)
    }

    /// One JSON object per line with keys in a fixed order.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for t in &self.trials {
            let _ = writeln!(out, "{}", serde_json::to_string(t).expect("trial serialises"));
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let trials = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str::<Trial>(l).map_err(Error::from))
            .collect::<Result<Vec<_>>>()?;
        Study::new(trials)
    }
}

fn best_position(trials: &[Trial]) -> usize {
    let mut best = 0;
    for (i, t) in trials.iter().enumerate().skip(1) {
        let b = &trials[best];
        if t.objective < b.objective || (t.objective == b.objective && t.trial_index < b.trial_index) {
            best = i;
        }
    }
    best
}

pub(crate) fn evaluate_batch<F>(requests: &[TrialRequest], eval_fn: &F) -> Result<Vec<Trial>>
where
    F: Fn(&TrialRequest) -> Result<Evaluation> + Sync,
{
    let results: Vec<Result<Trial>> = requests
        .par_iter()
        .map(|req| {
            let eval = eval_fn(req).map_err(|e| match e {
                failed @ Error::TrialFailed { .. } => failed,
                other => Error::TrialFailed { trial_index: req.trial_index, message: other.to_string() },
            })?;
            Trial::from_request(req, eval)
        })
        .collect();
    // Report the lowest failing index so failures are deterministic.
    results.into_iter().collect()
}

/// Cartesian random search: `num_angle_sets` uniform angle draws, each run
/// with the first `num_orderings_used` orderings of `space`.
///
/// Trial `a * num_orderings_used + o` uses angle set `a` and ordering `o`.
pub fn random_search<F>(
    space: &SearchSpace,
    num_angle_sets: usize,
    num_orderings_used: usize,
    eval_fn: F,
    seed: u64,
) -> Result<Study>
where
    F: Fn(&TrialRequest) -> Result<Evaluation> + Sync,
{
    if num_angle_sets == 0 || num_orderings_used == 0 {
        return Err(Error::invalid("random search budgets must be >= 1"));
    }
    if num_orderings_used > space.num_orderings() {
        return Err(Error::invalid(format!(
            "asked for {num_orderings_used} orderings but the space has {}",
            space.num_orderings()
        )));
    }
    let mut rng = rng::stream(seed, &[tags::ANGLES]);
    let angle_sets: Vec<Vec<f64>> = (0..num_angle_sets).map(|_| space.sample_params(&mut rng)).collect();
    let requests: Vec<TrialRequest> = angle_sets
        .iter()
        .enumerate()
        .flat_map(|(a, params)| {
            (0..num_orderings_used).map(move |o| {
                let trial_index = a * num_orderings_used + o;
                TrialRequest {
                    trial_index,
                    params: params.clone(),
                    ordering_index: o,
                    seed: derive_seed(seed, &[tags::TRIALS, trial_index as u64]),
                }
            })
        })
        .collect();
    Study::new(evaluate_batch(&requests, &eval_fn)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic(req: &TrialRequest) -> Result<Evaluation> {
        let objective = req.params.iter().map(|x| (x - 0.5).powi(2)).sum::<f64>() + req.ordering_index as f64;
        Ok(Evaluation { objective, ar: Some(-objective) })
    }

    #[test]
    fn cartesian_trial_count() {
        let space = SearchSpace::for_ansatz(2, generate_orderings(5, 10, 1)).unwrap();
        let study = random_search(&space, 100, 10, quadratic, 7).unwrap();
        assert_eq!(study.trials().len(), 1000);
        let best = study.best();
        assert!(study.trials().iter().all(|t| best.objective <= t.objective));
        assert!(study.trials().iter().all(|t| space.contains(&t.angles().flatten(), t.ordering_index)));
        // angle-set-major layout
        assert_eq!(study.trials()[13].ordering_index, 3);
        assert_eq!(study.trials()[13].gammas, study.trials()[10].gammas);
    }

    #[test]
    fn single_trial_study() {
        let space = SearchSpace::for_ansatz(1, generate_orderings(4, 1, 1)).unwrap();
        let study = random_search(&space, 1, 1, quadratic, 7).unwrap();
        assert_eq!(study.trials().len(), 1);
        assert_eq!(study.best_index(), 0);
        assert!(random_search(&space, 0, 1, quadratic, 7).is_err());
        assert!(random_search(&space, 1, 2, quadratic, 7).is_err());
    }

    #[test]
    fn failures_name_the_trial() {
        let space = SearchSpace::for_ansatz(1, generate_orderings(4, 2, 1)).unwrap();
        let err = random_search(
            &space,
            3,
            2,
            |req: &TrialRequest| {
                if req.trial_index == 3 {
                    Err(Error::invalid("boom"))
                } else {
                    quadratic(req)
                }
            },
            1,
        )
        .unwrap_err();
        assert!(matches!(err, Error::TrialFailed { trial_index: 3, .. }), "{err}");
    }

    #[test]
    fn ties_go_to_the_smallest_index() {
        let t = |i, obj| Trial {
            trial_index: i,
            gammas: vec![0.0],
            betas: vec![0.0],
            ordering_index: 0,
            objective: obj,
            ar: None,
            seed: 0,
        };
        let study = Study::new(vec![t(3, -1.0), t(1, -1.0), t(2, 0.0)]).unwrap();
        assert_eq!(study.best().trial_index, 1);
        assert!(Study::new(vec![]).is_err());
    }

    #[test]
    fn jsonl_round_trip_and_key_order() {
        let space = SearchSpace::for_ansatz(2, generate_orderings(4, 3, 1)).unwrap();
        let study = random_search(&space, 4, 3, quadratic, 2).unwrap();
        let text = study.to_jsonl();
        let first = text.lines().next().unwrap();
        let keys = ["trial_index", "gammas", "betas", "ordering_index", "objective", "ar", "seed"];
        let positions: Vec<usize> = keys.iter().map(|k| first.find(&format!("\"{k}\"")).unwrap()).collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(Study::from_jsonl(&text).unwrap(), study);
        assert_eq!(random_search(&space, 4, 3, quadratic, 2).unwrap().to_jsonl(), text);
    }

    #[test]
    fn mean_ordering_best() {
        let space = SearchSpace::for_ansatz(1, generate_orderings(4, 2, 1)).unwrap();
        let study = random_search(&space, 5, 2, quadratic, 2).unwrap();
        let per: Vec<f64> = (0..2)
            .map(|o| {
                study.trials().iter().filter(|t| t.ordering_index == o).map(|t| t.ar.unwrap()).fold(f64::MIN, f64::max)
            })
            .collect();
        assert!((study.mean_ordering_best_ar().unwrap() - (per[0] + per[1]) / 2.0).abs() < 1e-15);
    }
}
