//! Approximation ratios, low-energy tail estimators, random baselines and
//! gate-ordering / angle spread analysis.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ising::SkInstance;
use crate::rng::{self, tags};

/// Tail sizes reported by default; log-spaced up to 1000.
pub const TAIL_GRID: [usize; 10] = [1, 2, 5, 10, 20, 50, 100, 200, 500, 1000];

/// Measured energies sorted ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnergySamples {
    energies: Vec<i64>,
}

impl EnergySamples {
    pub fn new(mut energies: Vec<i64>) -> Result<Self> {
        if energies.is_empty() {
            return Err(Error::invalid("energy sample set is empty"));
        }
        energies.sort_unstable();
        Ok(EnergySamples { energies })
    }

    pub fn energies(&self) -> &[i64] {
        &self.energies
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArEstimate {
    pub value: f64,
    pub s_used: usize,
}

pub fn approx_ratio(mean_energy: f64, c_min: i64) -> Result<f64> {
    if c_min >= 0 {
        return Err(Error::NonNegativeMinimum(c_min));
    }
    Ok(mean_energy / c_min as f64)
}

pub fn sample_mean(samples: &EnergySamples) -> f64 {
    samples.energies.iter().sum::<i64>() as f64 / samples.len() as f64
}

/// Mean of the `s_tilde` lowest energies.
pub fn tail_mean(samples: &EnergySamples, s_tilde: usize) -> Result<f64> {
    if s_tilde == 0 || s_tilde > samples.len() {
        return Err(Error::invalid(format!("s_tilde = {s_tilde} outside 1..={}", samples.len())));
    }
    Ok(samples.energies[..s_tilde].iter().sum::<i64>() as f64 / s_tilde as f64)
}

pub fn tail_ar(samples: &EnergySamples, s_tilde: usize, c_min: i64) -> Result<ArEstimate> {
    let value = approx_ratio(tail_mean(samples, s_tilde)?, c_min)?;
    Ok(ArEstimate { value, s_used: s_tilde })
}

/// `(r_exp - r_random) / (1 - r_random)`.
pub fn renormalized_ratio(r_exp: f64, r_random: f64) -> Result<f64> {
    if r_random == 1.0 {
        return Err(Error::invalid("random-baseline ratio of exactly 1 cannot be renormalised"));
    }
    Ok((r_exp - r_random) / (1.0 - r_random))
}

/// Tail sizes from [`TAIL_GRID`] not exceeding `s`, with `s` itself appended.
pub fn tail_grid(s: usize) -> Vec<usize> {
    let mut grid: Vec<usize> = TAIL_GRID.iter().copied().filter(|&t| t <= s).collect();
    if grid.last() != Some(&s) && s > 0 {
        grid.push(s);
    }
    grid
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailPoint {
    pub s_tilde: usize,
    pub ar: f64,
}

/// AR of every tail size in `grid`.
pub fn tail_curve(samples: &EnergySamples, grid: &[usize], c_min: i64) -> Result<Vec<TailPoint>> {
    let mut prefix = Vec::with_capacity(samples.len() + 1);
    prefix.push(0i64);
    for &e in &samples.energies {
        prefix.push(prefix.last().unwrap() + e);
    }
    grid.iter()
        .map(|&t| {
            if t == 0 || t > samples.len() {
                return Err(Error::invalid(format!("s_tilde = {t} outside 1..={}", samples.len())));
            }
            Ok(TailPoint { s_tilde: t, ar: approx_ratio(prefix[t] as f64 / t as f64, c_min)? })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct RandomBaseline {
    /// AR of the grand mean over all `reps * s` draws.
    pub mean_ar: f64,
    /// Largest per-repetition AR (lowest per-repetition mean energy).
    pub best_ar: f64,
    /// Standard deviation of the single-draw AR over all draws.
    pub sample_sd_ar: f64,
    /// Tail AR averaged over repetitions, on [`tail_grid`]`(s)`.
    pub tail_curve: Vec<TailPoint>,
    pub shots: usize,
    pub reps: usize,
}

/// Uniform-random bitstring sampling, `reps` independent repetitions of `s` shots.
pub fn random_baseline(instance: &SkInstance, c_min: i64, s: usize, reps: usize, seed: u64) -> Result<RandomBaseline> {
    if c_min >= 0 {
        return Err(Error::NonNegativeMinimum(c_min));
    }
    if s == 0 || reps == 0 {
        return Err(Error::invalid("random baseline needs s >= 1 and reps >= 1"));
    }
    let n = instance.n();
    if n > 64 {
        return Err(Error::invalid("random baseline supports n <= 64"));
    }
    let table = instance.energy_table().ok();
    let width = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let grid = tail_grid(s);

    let mut total = 0i128;
    let mut total_sq = 0i128;
    let mut best_mean = f64::INFINITY;
    let mut tail_sums = vec![0.0; grid.len()];
    let mut energies = Vec::with_capacity(s);
    for rep in 0..reps {
        let mut rng = rng::stream(seed, &[tags::BASELINE, rep as u64]);
        energies.clear();
        for _ in 0..s {
            let x = rng.random::<u64>() & width;
            let e = match &table {
                Some(t) => t[x as usize],
                None => instance.cost_index(x),
            };
            total += e as i128;
            total_sq += (e as i128) * (e as i128);
            energies.push(e);
        }
        let samples = EnergySamples::new(std::mem::take(&mut energies))?;
        best_mean = best_mean.min(sample_mean(&samples));
        for (acc, point) in tail_sums.iter_mut().zip(tail_curve(&samples, &grid, c_min)?) {
            *acc += point.ar;
        }
        energies = samples.energies;
    }
    let count = (s * reps) as f64;
    let grand_mean = total as f64 / count;
    let variance = (total_sq as f64 / count - grand_mean * grand_mean).max(0.0) * count / (count - 1.0).max(1.0);
    Ok(RandomBaseline {
        mean_ar: approx_ratio(grand_mean, c_min)?,
        best_ar: approx_ratio(best_mean, c_min)?,
        sample_sd_ar: variance.sqrt() / c_min.unsigned_abs() as f64,
        tail_curve: grid
            .iter()
            .zip(tail_sums)
            .map(|(&s_tilde, sum)| TailPoint { s_tilde, ar: sum / reps as f64 })
            .collect(),
        shots: s,
        reps,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Spread {
    /// Max-minus-min over gate orderings at fixed angles, averaged over angle sets.
    pub delta_max_over_orderings: f64,
    /// Max-minus-min over angle sets at fixed ordering, averaged over orderings.
    pub delta_max_over_angles: f64,
}

/// Spread analysis of an AR grid with rows = gate orderings, columns = angle sets.
///
/// Non-finite cells count as missing and make the grid invalid.
pub fn spread_analysis(grid: &[Vec<f64>]) -> Result<Spread> {
    let rows = grid.len();
    let cols = grid.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return Err(Error::invalid("spread grid is empty"));
    }
    for (r, row) in grid.iter().enumerate() {
        if row.len() != cols {
            return Err(Error::invalid(format!("spread grid row {r} has {} cells, expected {cols}", row.len())));
        }
        if let Some(c) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("spread grid cell ({r}, {c}) is missing")));
        }
    }
    let range = |values: &mut dyn Iterator<Item = f64>| {
        let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        hi - lo
    };
    let over_orderings =
        (0..cols).map(|c| range(&mut grid.iter().map(|row| row[c]))).sum::<f64>() / cols as f64;
    let over_angles = grid.iter().map(|row| range(&mut row.iter().copied())).sum::<f64>() / rows as f64;
    Ok(Spread { delta_max_over_orderings: over_orderings, delta_max_over_angles: over_angles })
}

/// Ranks with ties averaged, starting at 1.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation; `None` when either side is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len());
    pearson(&average_ranks(x), &average_ranks(y))
}

pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    if x.len() < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

/// Mean and standard error of the mean.
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
