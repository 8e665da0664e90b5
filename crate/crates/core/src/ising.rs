//! Sherrington-Kirkpatrick instances with ±1 couplings on the complete graph.
//!
//! Spin convention: bit `x_i = 0` is spin `z_i = +1`, bit `1` is spin `-1`.
//! Bit `i` of a basis index is variable `i`; rendered strings put variable 0
//! leftmost. Energies are exact 64-bit integers.

use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, tags};

/// Largest `n` for which [`exact_spectrum`] will enumerate.
pub const DEFAULT_ENUMERATION_LIMIT: usize = 26;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkInstance {
    n: usize,
    seed: u64,
    /// Dense symmetric `n * n` matrix with zero diagonal.
    couplings: Vec<i8>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectrumSummary {
    pub c_min: i64,
    pub c_max: i64,
    /// One minimising assignment, as a basis index (bit i = variable i).
    pub argmin: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitflipMask {
    bits: Vec<bool>,
}

/// Generates an instance with every coupling an independent fair ±1 draw.
pub fn generate_sk(n: usize, seed: u64) -> Result<SkInstance> {
    if n < 2 {
        return Err(Error::TooFewVariables(n));
    }
    let mut rng = rng::stream(seed, &[tags::INSTANCES, n as u64]);
    let mut couplings = vec![0i8; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let value = if rng.random::<bool>() { 1 } else { -1 };
            couplings[i * n + j] = value;
            couplings[j * n + i] = value;
        }
    }
    Ok(SkInstance { n, seed, couplings })
}

impl SkInstance {
    /// Builds an instance from explicit `(i, j, J)` triples covering every pair once.
    pub fn from_couplings(
        n: usize,
        seed: u64,
        entries: impl IntoIterator<Item = (usize, usize, i8)>,
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewVariables(n));
        }
        let mut couplings = vec![0i8; n * n];
        let mut seen = 0usize;
        for (i, j, value) in entries {
            if i >= j || j >= n {
                return Err(Error::invalid(format!("coupling key ({i}, {j}) must satisfy i < j < n = {n}")));
            }
            if value != 1 && value != -1 {
                return Err(Error::invalid(format!("coupling ({i}, {j}) = {value} is not ±1")));
            }
            if couplings[i * n + j] != 0 {
                return Err(Error::invalid(format!("duplicate coupling ({i}, {j})")));
            }
            couplings[i * n + j] = value;
            couplings[j * n + i] = value;
            seen += 1;
        }
        let expected = n * (n - 1) / 2;
        if seen != expected {
            return Err(Error::invalid(format!("expected {expected} couplings, got {seen}")));
        }
        Ok(SkInstance { n, seed, couplings })
    }

    /// Instance with every coupling equal to `value`.
    pub fn uniform(n: usize, value: i8) -> Result<Self> {
        let pairs = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j, value)));
        Self::from_couplings(n, 0, pairs.collect::<Vec<_>>())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn num_couplings(&self) -> usize {
        self.n * (self.n - 1) / 2
    }

    /// `J_ij`; symmetric in its arguments. Panics on `i == j` or out-of-range indices.
    #[inline]
    pub fn coupling(&self, i: usize, j: usize) -> i8 {
        assert!(i != j && i < self.n && j < self.n, "invalid coupling index ({i}, {j})");
        self.couplings[i * self.n + j]
    }

    /// Couplings in canonical lexicographic `(i, j)` order with `i < j`.
    pub fn couplings(&self) -> impl Iterator<Item = (usize, usize, i8)> + '_ {
        let n = self.n;
        (0..n).flat_map(move |i| ((i + 1)..n).map(move |j| (i, j, self.couplings[i * n + j])))
    }

    /// `sum_{i<j} J_ij z_i z_j` for a bit vector.
    pub fn cost(&self, x: &[bool]) -> Result<i64> {
        if x.len() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, got: x.len() });
        }
        let mut energy = 0i64;
        for (i, j, value) in self.couplings() {
            let aligned = x[i] == x[j];
            energy += if aligned { value as i64 } else { -(value as i64) };
        }
        Ok(energy)
    }

    /// Same as [`cost`](Self::cost) for a basis index; requires `n <= 64`.
    #[inline]
    pub fn cost_index(&self, x: u64) -> i64 {
        debug_assert!(self.n <= 64);
        let n = self.n;
        let mut energy = 0i64;
        for i in 0..n {
            let xi = (x >> i) & 1;
            let row = &self.couplings[i * n..(i + 1) * n];
            for (j, &value) in row.iter().enumerate().skip(i + 1) {
                let differ = xi ^ ((x >> j) & 1);
                energy += if differ == 0 { value as i64 } else { -(value as i64) };
            }
        }
        energy
    }

    /// Diagonal of the cost Hamiltonian over all `2^n` basis states.
    pub fn energy_table(&self) -> Result<Vec<i64>> {
        self.check_enumerable(DEFAULT_ENUMERATION_LIMIT)?;
        let mut table = vec![0i64; 1usize << self.n];
        let mut walker = GrayWalker::new(self, 0);
        table[0] = walker.energy;
        while let Some((x, e)) = walker.step() {
            table[x as usize] = e;
        }
        Ok(table)
    }

    fn check_enumerable(&self, limit: usize) -> Result<()> {
        if self.n > limit {
            return Err(Error::OracleUnavailable { n: self.n, limit });
        }
        Ok(())
    }

    pub fn to_json(&self, spectrum: Option<&SpectrumSummary>) -> String {
        let mut out = String::new();
        out.push_str("{\n");
        let _ = writeln!(out, "  \"n\": {},", self.n);
        let _ = writeln!(out, "  \"seed\": {},", self.seed);
        out.push_str("  \"couplings\": [\n");
        let total = self.num_couplings();
        for (idx, (i, j, value)) in self.couplings().enumerate() {
            let sep = if idx + 1 == total { "" } else { "," };
            let _ = writeln!(out, "    [{i}, {j}, {value}]{sep}");
        }
        match spectrum {
            Some(s) => {
                out.push_str("  ],\n");
                let _ = writeln!(
                    out,
                    "  \"spectrum\": {{\"c_min\": {}, \"c_max\": {}, \"argmin\": \"{}\"}}",
                    s.c_min,
                    s.c_max,
                    format_bits(s.argmin, self.n)
                );
            }
            None => out.push_str("  ]\n"),
        }
        out.push_str("}\n");
        out
    }

    pub fn from_json(text: &str) -> Result<(Self, Option<SpectrumSummary>)> {
        #[derive(Deserialize)]
        struct SpectrumFile {
            c_min: i64,
            c_max: i64,
            argmin: String,
        }
        #[derive(Deserialize)]
        struct InstanceFile {
            n: usize,
            seed: u64,
            couplings: Vec<(usize, usize, i8)>,
            spectrum: Option<SpectrumFile>,
        }
        let file: InstanceFile = serde_json::from_str(text)?;
        let instance = SkInstance::from_couplings(file.n, file.seed, file.couplings)?;
        let spectrum = match file.spectrum {
            Some(s) => {
                let argmin = parse_bits(&s.argmin)?;
                if s.argmin.len() != file.n {
                    return Err(Error::LengthMismatch { expected: file.n, got: s.argmin.len() });
                }
                Some(SpectrumSummary { c_min: s.c_min, c_max: s.c_max, argmin })
            }
            None => None,
        };
        Ok((instance, spectrum))
    }
}

/// Gray-code walk over assignments of variables `offset..n`, the rest held at 0.
///
/// Each step flips one bit and updates the energy from cached local fields in O(n).
struct GrayWalker<'a> {
    instance: &'a SkInstance,
    offset: usize,
    free: usize,
    counter: u64,
    x: u64,
    spins: Vec<i32>,
    fields: Vec<i32>,
    energy: i64,
}

impl<'a> GrayWalker<'a> {
    fn new(instance: &'a SkInstance, offset: usize) -> Self {
        let free = instance.n - offset;
        let n = instance.n;
        let fields: Vec<i32> = (0..n)
            .map(|k| instance.couplings[k * n..(k + 1) * n].iter().map(|&v| v as i32).sum())
            .collect();
        let energy = instance.couplings().map(|(_, _, v)| v as i64).sum();
        GrayWalker { instance, offset, free, counter: 0, x: 0, spins: vec![1; n], fields, energy }
    }

    fn step(&mut self) -> Option<(u64, i64)> {
        self.counter += 1;
        if self.counter >= 1u64 << self.free {
            return None;
        }
        let k = self.counter.trailing_zeros() as usize + self.offset;
        let n = self.instance.n;
        let old = self.spins[k];
        self.energy -= 2 * (old as i64) * (self.fields[k] as i64);
        let row = &self.instance.couplings[k * n..(k + 1) * n];
        for (field, &value) in self.fields.iter_mut().zip(row) {
            *field -= 2 * (value as i32) * old;
        }
        self.spins[k] = -old;
        self.x ^= 1 << k;
        Some((self.x, self.energy))
    }
}

/// Exact minimum and maximum energy by exhaustive enumeration.
///
/// Global spin-flip symmetry lets the walk fix variable 0 to 0 and cover half
/// of the hypercube, so the reported argmin always has `x_0 = 0`.
pub fn exact_spectrum(instance: &SkInstance) -> Result<SpectrumSummary> {
    exact_spectrum_with_limit(instance, DEFAULT_ENUMERATION_LIMIT)
}

pub fn exact_spectrum_with_limit(instance: &SkInstance, limit: usize) -> Result<SpectrumSummary> {
    instance.check_enumerable(limit.min(63))?;
    let mut walker = GrayWalker::new(instance, 1);
    let mut best = (walker.energy, 0u64);
    let mut c_max = walker.energy;
    while let Some((x, e)) = walker.step() {
        if e < best.0 {
            best = (e, x);
        }
        c_max = c_max.max(e);
    }
    Ok(SpectrumSummary { c_min: best.0, c_max, argmin: best.1 })
}

impl BitflipMask {
    pub fn new(bits: Vec<bool>) -> Self {
        BitflipMask { bits }
    }

    pub fn zeros(n: usize) -> Self {
        BitflipMask { bits: vec![false; n] }
    }

    pub fn from_index(index: u64, n: usize) -> Self {
        BitflipMask { bits: index_to_bits(index, n) }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.bits.iter().all(|&b| !b)
    }

    pub fn to_index(&self) -> u64 {
        bits_to_index(&self.bits)
    }
}

impl std::fmt::Display for BitflipMask {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Re-signs couplings `J'_ij = J_ij (-1)^(b_i + b_j)`.
pub fn apply_bitflip(instance: &SkInstance, mask: &BitflipMask) -> Result<SkInstance> {
    if mask.len() != instance.n {
        return Err(Error::LengthMismatch { expected: instance.n, got: mask.len() });
    }
    let n = instance.n;
    let mut couplings = instance.couplings.clone();
    for i in 0..n {
        for j in 0..n {
            if mask.bits[i] != mask.bits[j] {
                couplings[i * n + j] = -couplings[i * n + j];
            }
        }
    }
    Ok(SkInstance { n, seed: instance.seed, couplings })
}

/// Approximation ratio of the all-zeros assignment, `cost(0...0) / c_min`.
pub fn zero_state_ratio(instance: &SkInstance, c_min: i64) -> Result<f64> {
    if c_min >= 0 {
        return Err(Error::NonNegativeMinimum(c_min));
    }
    let zero_energy: i64 = instance.couplings().map(|(_, _, v)| v as i64).sum();
    Ok(zero_energy as f64 / c_min as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RankedMask {
    pub mask: BitflipMask,
    pub r0: f64,
}

/// Draws `num_masks` random masks (plus the identity) and ranks them by the
/// zero-state ratio of the transformed instance, highest first.
///
/// When `num_masks >= 2^n` every mask is enumerated instead of sampled.
pub fn search_bitflips(instance: &SkInstance, num_masks: usize, seed: u64) -> Result<Vec<RankedMask>> {
    let spectrum = exact_spectrum(instance)?;
    let n = instance.n;
    // A transformed instance evaluated at 0...0 equals the original at the mask.
    let score = |index: u64| instance.cost_index(index) as f64 / spectrum.c_min as f64;

    let exhaustive = n < 64 && (num_masks as u128) >= (1u128 << n);
    let indices: Vec<u64> = if exhaustive {
        (0..(1u64 << n)).collect()
    } else {
        let mut rng = rng::stream(seed, &[tags::MASKS]);
        let width_mask = if n >= 64 { u64::MAX } else { (1u64 << n) - 1 };
        std::iter::once(0)
            .chain((0..num_masks).map(|_| rng.random::<u64>() & width_mask))
            .collect()
    };
    if spectrum.c_min >= 0 {
        return Err(Error::NonNegativeMinimum(spectrum.c_min));
    }
    let mut ranked: Vec<RankedMask> = indices
        .into_iter()
        .map(|idx| RankedMask { mask: BitflipMask::from_index(idx, n), r0: score(idx) })
        .collect();
    ranked.sort_by(|a, b| b.r0.total_cmp(&a.r0));
    Ok(ranked)
}

pub fn index_to_bits(index: u64, n: usize) -> Vec<bool> {
    (0..n).map(|i| (index >> i) & 1 == 1).collect()
}

pub fn bits_to_index(bits: &[bool]) -> u64 {
    bits.iter()
        .enumerate()
        .fold(0u64, |acc, (i, &b)| if b { acc | (1 << i) } else { acc })
}

/// Renders a basis index with variable 0 leftmost.
pub fn format_bits(index: u64, n: usize) -> String {
    (0..n).map(|i| if (index >> i) & 1 == 1 { '1' } else { '0' }).collect()
}

pub fn parse_bits(text: &str) -> Result<u64> {
    if text.len() > 64 {
        return Err(Error::Parse(format!("bitstring longer than 64: {text}")));
    }
    text.chars().enumerate().try_fold(0u64, |acc, (i, c)| match c {
        '0' => Ok(acc),
        '1' => Ok(acc | (1 << i)),
        other => Err(Error::Parse(format!("invalid bit {other:?} in {text:?}"))),
    })
}
