//! Tree of Parzen Estimators over independent continuous dimensions and one
//! categorical variable.
//!
//! After `startup_trials` uniform draws, the history is split at the
//! `gamma` quantile of the objective into a good and a bad set. Each
//! continuous dimension gets a truncated-Gaussian mixture per set (one kernel
//! per observation plus a uniform prior component), the categorical variable
//! gets Laplace-smoothed frequencies. Candidates are drawn from the good model
//! and the one maximising `l(x) / g(x)` is returned.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::{SearchSpace, Trial};
use crate::ansatz::AngleVector;
use crate::rng::StreamRng;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TpeConfig {
    pub startup_trials: usize,
    /// Fraction of the history treated as good.
    pub gamma: f64,
    pub candidates: usize,
    /// Lower bound on kernel bandwidth as a fraction of the range width.
    pub min_bandwidth: f64,
    /// Pseudo-count for categorical frequencies.
    pub prior_count: f64,
}

impl Default for TpeConfig {
    fn default() -> Self {
        TpeConfig { startup_trials: 10, gamma: 0.25, candidates: 24, min_bandwidth: 0.01, prior_count: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Observation {
    pub params: Vec<f64>,
    pub category: usize,
    pub objective: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Suggestion {
    pub params: Vec<f64>,
    pub category: usize,
}

#[derive(Clone, Debug, Default)]
pub struct Tpe {
    pub config: TpeConfig,
}

/// Truncated Gaussian mixture on `[low, high)` with a uniform prior component.
struct Parzen {
    low: f64,
    high: f64,
    mus: Vec<f64>,
    sigmas: Vec<f64>,
    /// log of the truncation mass of each kernel.
    log_mass: Vec<f64>,
}

impl Parzen {
    fn fit(points: &[f64], low: f64, high: f64, min_fraction: f64) -> Self {
        let width = high - low;
        let mut mus = points.to_vec();
        mus.sort_by(f64::total_cmp);
        let floor = min_fraction * width;
        let sigmas: Vec<f64> = (0..mus.len())
            .map(|i| {
                let left = if i == 0 { mus[i] - low } else { mus[i] - mus[i - 1] };
                let right = if i + 1 == mus.len() { high - mus[i] } else { mus[i + 1] - mus[i] };
                left.max(right).clamp(floor, width)
            })
            .collect();
        let log_mass = mus
            .iter()
            .zip(&sigmas)
            .map(|(&mu, &sigma)| {
                let mass = normal_cdf((high - mu) / sigma) - normal_cdf((low - mu) / sigma);
                mass.max(1e-300).ln()
            })
            .collect();
        Parzen { low, high, mus, sigmas, log_mass }
    }

    fn components(&self) -> usize {
        self.mus.len() + 1
    }

    fn sample(&self, rng: &mut StreamRng) -> f64 {
        let pick = rng.random_range(0..self.components());
        if pick == self.mus.len() {
            return uniform_in(self.low, self.high, rng);
        }
        let normal = Normal::new(self.mus[pick], self.sigmas[pick]).expect("positive bandwidth");
        for _ in 0..1000 {
            let x = normal.sample(rng);
            if x >= self.low && x < self.high {
                return x;
            }
        }
        self.mus[pick].clamp(self.low, next_below(self.high))
    }

    fn log_pdf(&self, x: f64) -> f64 {
        let log_weight = -(self.components() as f64).ln();
        let prior = log_weight - (self.high - self.low).ln();
        let kernels = self.mus.iter().zip(&self.sigmas).zip(&self.log_mass).map(|((&mu, &sigma), &lm)| {
            let z = (x - mu) / sigma;
            log_weight - 0.5 * z * z - sigma.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln() - lm
        });
        log_sum_exp(std::iter::once(prior).chain(kernels))
    }
}

fn uniform_in(low: f64, high: f64, rng: &mut StreamRng) -> f64 {
    let x = low + rng.random::<f64>() * (high - low);
    if x < high {
        x
    } else {
        low
    }
}

fn next_below(x: f64) -> f64 {
    f64::from_bits(x.to_bits() - 1)
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

fn log_sum_exp(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + v.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

fn category_log_probs(categories: impl Iterator<Item = usize>, count: usize, prior: f64) -> Vec<f64> {
    let mut weights = vec![prior; count];
    for c in categories {
        weights[c] += 1.0;
    }
    let total: f64 = weights.iter().sum();
    weights.iter().map(|w| (w / total).ln()).collect()
}

impl Tpe {
    pub fn new(config: TpeConfig) -> Self {
        Tpe { config }
    }

    pub fn suggest(&self, history: &[Observation], space: &SearchSpace, rng: &mut StreamRng) -> Suggestion {
        let num_categories = space.num_orderings();
        if history.len() < self.config.startup_trials.max(1) {
            return Suggestion {
                params: space.sample_params(rng),
                category: rng.random_range(0..num_categories),
            };
        }

        let mut order: Vec<usize> = (0..history.len()).collect();
        order.sort_by(|&a, &b| history[a].objective.total_cmp(&history[b].objective).then(a.cmp(&b)));
        let n_good = ((self.config.gamma * history.len() as f64).ceil() as usize).clamp(1, history.len() - 1);
        let (good, bad) = order.split_at(n_good);

        let models: Vec<(Parzen, Parzen)> = space
            .ranges
            .iter()
            .enumerate()
            .map(|(d, r)| {
                let pts = |set: &[usize]| set.iter().map(|&i| history[i].params[d]).collect::<Vec<_>>();
                (
                    Parzen::fit(&pts(good), r.low, r.high, self.config.min_bandwidth),
                    Parzen::fit(&pts(bad), r.low, r.high, self.config.min_bandwidth),
                )
            })
            .collect();
        let prior = self.config.prior_count;
        let cat_good = category_log_probs(good.iter().map(|&i| history[i].category), num_categories, prior);
        let cat_bad = category_log_probs(bad.iter().map(|&i| history[i].category), num_categories, prior);
        let cat_weights: Vec<f64> = cat_good.iter().map(|l| l.exp()).collect();

        let mut best: Option<(f64, Suggestion)> = None;
        for _ in 0..self.config.candidates.max(1) {
            let params: Vec<f64> = models.iter().map(|(l, _)| l.sample(rng)).collect();
            let category = sample_weighted(&cat_weights, rng);
            let score = models
                .iter()
                .zip(&params)
                .map(|((l, g), &x)| l.log_pdf(x) - g.log_pdf(x))
                .sum::<f64>()
                + cat_good[category]
                - cat_bad[category];
            if best.as_ref().is_none_or(|(s, _)| score > *s) {
                best = Some((score, Suggestion { params, category }));
            }
        }
        best.expect("at least one candidate").1
    }
}

fn sample_weighted(weights: &[f64], rng: &mut StreamRng) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if u < w {
            return i;
        }
        u -= w;
    }
    weights.len() - 1
}

/// TPE suggestion in ansatz terms, with the default configuration.
pub fn tpe_suggest(history: &[Trial], space: &SearchSpace, rng: &mut StreamRng) -> (AngleVector, usize) {
    let observations: Vec<Observation> = history
        .iter()
        .map(|t| Observation { params: t.angles().flatten(), category: t.ordering_index, objective: t.objective })
        .collect();
    let s = Tpe::default().suggest(&observations, space, rng);
    let angles = AngleVector::from_flat(&s.params).expect("space has 2p dimensions");
    (angles, s.category)
}
