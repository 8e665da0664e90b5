//! Bitflip-mask preprocessing under noise: how close the all-zeros string is
//! to the ground state versus the best AR reached.

use std::fmt::Write as _;

use timeblock_core::ansatz::{AnsatzSpec, Base};
use timeblock_core::ising::{apply_bitflip, exact_spectrum, search_bitflips, BitflipMask, RankedMask, SkInstance};
use timeblock_core::metrics::spearman;
use timeblock_core::optimizer::{generate_orderings, run_study, SearchSpace, Strategy, StudyConfig};
use timeblock_core::rng::{derive_seed, tags};
use timeblock_core::sim::NoiseModel;

use crate::failure::Failure;

#[derive(Clone, Debug)]
pub struct AttractorOptions {
    pub base: Base,
    pub k: usize,
    pub p: usize,
    pub masks: usize,
    pub angle_sets: usize,
    pub orderings: usize,
    pub shots: usize,
    pub noise: NoiseModel,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AttractorRow {
    pub mask: BitflipMask,
    pub r0: f64,
    pub best_ar: f64,
}

/// `count` masks at evenly spaced ranks of the full ranking, identity included.
pub fn select_masks(ranked: &[RankedMask], count: usize) -> Vec<RankedMask> {
    if count == 0 || ranked.is_empty() {
        return Vec::new();
    }
    let last = ranked.len() - 1;
    let mut picks: Vec<usize> = if count == 1 {
        vec![0]
    } else {
        (0..count).map(|i| (i * last + (count - 1) / 2) / (count - 1)).collect()
    };
    picks.dedup();
    if let Some(id) = ranked.iter().position(|m| m.mask.is_identity()) {
        if !picks.contains(&id) {
            let nearest = picks.iter().enumerate().min_by_key(|(_, &p)| p.abs_diff(id)).map(|(i, _)| i).unwrap();
            picks[nearest] = id;
            picks.sort_unstable();
            picks.dedup();
        }
    }
    picks.into_iter().map(|i| ranked[i].clone()).collect()
}

/// Runs the same random search (matched seeds) on each mask-transformed instance.
pub fn attractor(instance: &SkInstance, options: &AttractorOptions) -> Result<Vec<AttractorRow>, Failure> {
    let n = instance.n();
    let c_min = exact_spectrum(instance)?.c_min;
    let candidates = if n < 63 { (1usize << n).min(4096) } else { 4096 };
    let ranked = search_bitflips(instance, candidates, derive_seed(options.seed, &[tags::MASKS]))?;
    let spec = AnsatzSpec::new(options.base, n, options.k, options.p)?;
    let orderings = generate_orderings(n, options.orderings, derive_seed(options.seed, &[tags::ORDERINGS]));
    let space = SearchSpace::for_ansatz(options.p, orderings)?;
    select_masks(&ranked, options.masks)
        .into_iter()
        .map(|m| {
            let transformed = apply_bitflip(instance, &m.mask)?;
            let cfg = StudyConfig {
                instance: transformed,
                c_min: Some(c_min),
                spec,
                space: space.clone(),
                strategy: Strategy::Random { angle_sets: options.angle_sets, orderings_used: options.orderings },
                shots: options.shots,
                noise: options.noise,
                seed: options.seed,
            };
            let study = run_study(&cfg)?;
            let best_ar = study.best().ar.expect("ground energy supplied");
            Ok(AttractorRow { mask: m.mask, r0: m.r0, best_ar })
        })
        .collect()
}

pub fn rank_correlation(rows: &[AttractorRow]) -> Option<f64> {
    let r0: Vec<f64> = rows.iter().map(|r| r.r0).collect();
    let ar: Vec<f64> = rows.iter().map(|r| r.best_ar).collect();
    spearman(&r0, &ar)
}

pub fn attractor_csv(rows: &[AttractorRow]) -> String {
    let mut out = String::from("mask,r0,best_ar\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{}", r.mask, r.r0, r.best_ar);
    }
    out
}
