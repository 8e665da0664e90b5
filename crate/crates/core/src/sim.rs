//! Statevector execution, shot sampling and Monte Carlo trajectory noise.
//!
//! Qubit 0 is the least significant bit of an amplitude index.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, NativeGate};
use crate::error::{Error, Result};
use crate::ising::{format_bits, SkInstance};
use crate::linalg::{I, ONE, ZERO};
use crate::metrics::EnergySamples;
use crate::rng::{self, tags, StreamRng};

/// Largest register the simulator accepts.
pub const MAX_QUBITS: usize = 26;

const NORM_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn zero(n: usize) -> Result<Self> {
        Self::basis(n, 0)
    }

    pub fn basis(n: usize, index: u64) -> Result<Self> {
        check_size(n)?;
        if index >= 1u64 << n {
            return Err(Error::invalid(format!("basis index {index} out of range for {n} qubits")));
        }
        let mut amps = vec![ZERO; 1 << n];
        amps[index as usize] = ONE;
        Ok(StateVector { n, amps })
    }

    /// `|+>^n`.
    pub fn plus(n: usize) -> Result<Self> {
        check_size(n)?;
        let a = Complex64::new((1.0 / (1u64 << n) as f64).sqrt(), 0.0);
        Ok(StateVector { n, amps: vec![a; 1 << n] })
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let n = amps.len().trailing_zeros() as usize;
        if amps.len() != 1 << n {
            return Err(Error::invalid("amplitude count is not a power of two"));
        }
        check_size(n)?;
        let state = StateVector { n, amps };
        if (state.norm_sqr() - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::invalid(format!("state is not normalised (norm² = {})", state.norm_sqr())));
        }
        Ok(state)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    /// Raw access for exact reference kernels; callers keep the state normalised.
    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Re-indexes physical amplitudes by logical variable, given
    /// `qubit_map[logical] = physical`.
    pub fn to_logical(&self, qubit_map: &[usize]) -> Result<StateVector> {
        if qubit_map.len() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, got: qubit_map.len() });
        }
        let mut amps = vec![ZERO; self.amps.len()];
        for (physical, &a) in self.amps.iter().enumerate() {
            amps[unpermute(physical as u64, qubit_map) as usize] = a;
        }
        Ok(StateVector { n: self.n, amps })
    }

    pub fn apply_gate(&mut self, gate: &NativeGate) {
        match *gate {
            NativeGate::Rz { qubit, theta } => {
                let lo = Complex64::from_polar(1.0, -theta / 2.0);
                let hi = lo.conj();
                self.for_pairs(qubit, |a0, a1| {
                    *a0 *= lo;
                    *a1 *= hi;
                });
            }
            NativeGate::Rx90 { qubit } => {
                let r = std::f64::consts::FRAC_1_SQRT_2;
                self.for_pairs(qubit, |a0, a1| {
                    let (x, y) = (*a0, *a1);
                    *a0 = (x - I * y) * r;
                    *a1 = (y - I * x) * r;
                });
            }
            NativeGate::Cphase { a, b, theta } => {
                let phase = Complex64::from_polar(1.0, -theta);
                let both = (1usize << a) | (1usize << b);
                for base in pair_bases(self.amps.len(), a, b) {
                    self.amps[base | both] *= phase;
                }
            }
            NativeGate::Xy { a, b, beta } => {
                let (c, s) = ((2.0 * beta).cos(), (2.0 * beta).sin());
                let (ba, bb) = (1usize << a, 1usize << b);
                for base in pair_bases(self.amps.len(), a, b) {
                    let (i, j) = (base | ba, base | bb);
                    let (x, y) = (self.amps[i], self.amps[j]);
                    self.amps[i] = x * c - I * y * s;
                    self.amps[j] = y * c - I * x * s;
                }
            }
        }
    }

    fn for_pairs(&mut self, qubit: usize, mut f: impl FnMut(&mut Complex64, &mut Complex64)) {
        let bit = 1usize << qubit;
        for block in self.amps.chunks_mut(bit << 1) {
            let (lo, hi) = block.split_at_mut(bit);
            for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                f(a0, a1);
            }
        }
    }

    fn probability_one(&self, qubit: usize) -> f64 {
        let bit = 1usize << qubit;
        self.amps.chunks(bit << 1).flat_map(|block| &block[bit..]).map(|a| a.norm_sqr()).sum()
    }

    fn scale(&mut self, factor: f64) {
        for a in &mut self.amps {
            *a *= factor;
        }
    }

    /// One amplitude-damping trajectory step on `qubit` of a state whose
    /// squared norm is `norm_sqr`. The no-jump branch is left unnormalised;
    /// returns the new squared norm.
    fn damp(&mut self, qubit: usize, gamma: f64, norm_sqr: f64, rng: &mut StreamRng) -> f64 {
        let p1 = self.probability_one(qubit);
        let u: f64 = rng.random();
        if u * norm_sqr < gamma * p1 {
            // K1 = sqrt(γ)|0><1|: move the |1> branch onto |0>, then renormalise.
            let scale = 1.0 / p1.sqrt();
            self.for_pairs(qubit, |a0, a1| {
                *a0 = *a1 * scale;
                *a1 = ZERO;
            });
            1.0
        } else {
            // K0 = diag(1, sqrt(1-γ)).
            let keep = (1.0 - gamma).sqrt();
            self.for_pairs(qubit, |_, a1| *a1 *= keep);
            norm_sqr - gamma * p1
        }
    }

    fn apply_pauli(&mut self, qubit: usize, which: u8) {
        match which {
            0 => self.for_pairs(qubit, std::mem::swap),
            1 => self.for_pairs(qubit, |a0, a1| {
                let (x, y) = (*a0, *a1);
                *a0 = -I * y;
                *a1 = I * x;
            }),
            _ => self.for_pairs(qubit, |_, a1| *a1 = -*a1),
        }
    }
}

/// Indices of a `len`-amplitude register with bits `a` and `b` clear.
fn pair_bases(len: usize, a: usize, b: usize) -> impl Iterator<Item = usize> {
    let (lo, hi) = (a.min(b), a.max(b));
    (0..len >> 2).map(move |k| {
        let k = ((k >> lo) << (lo + 1)) | (k & ((1 << lo) - 1));
        ((k >> hi) << (hi + 1)) | (k & ((1 << hi) - 1))
    })
}

fn check_size(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::invalid(format!("qubit count {n} outside 1..={MAX_QUBITS}")));
    }
    Ok(())
}

/// Maps a physical measurement index to the logical assignment.
#[inline]
pub fn unpermute(physical: u64, qubit_map: &[usize]) -> u64 {
    qubit_map
        .iter()
        .enumerate()
        .fold(0u64, |acc, (logical, &wire)| acc | (((physical >> wire) & 1) << logical))
}

/// Applies the prologue and every body gate of `circuit`.
pub fn apply_circuit(mut state: StateVector, circuit: &Circuit) -> Result<StateVector> {
    if state.n != circuit.n() {
        return Err(Error::LengthMismatch { expected: circuit.n(), got: state.n });
    }
    for gate in circuit.all_gates() {
        state.apply_gate(&gate);
    }
    Ok(state)
}

/// Measurement outcomes in physical wire order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShotResult {
    n: usize,
    bitstrings: Vec<u64>,
}

impl ShotResult {
    pub fn new(n: usize, bitstrings: Vec<u64>) -> Self {
        ShotResult { n, bitstrings }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn shots(&self) -> usize {
        self.bitstrings.len()
    }

    pub fn bitstrings(&self) -> &[u64] {
        &self.bitstrings
    }

    pub fn to_logical(&self, qubit_map: &[usize]) -> Vec<u64> {
        self.bitstrings.iter().map(|&b| unpermute(b, qubit_map)).collect()
    }

    /// Sorted energies of the un-permuted samples.
    pub fn energies(&self, instance: &SkInstance, qubit_map: &[usize]) -> Result<EnergySamples> {
        if instance.n() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, got: instance.n() });
        }
        let energies = self.bitstrings.iter().map(|&b| instance.cost_index(unpermute(b, qubit_map))).collect();
        EnergySamples::new(energies)
    }

    /// One bitstring per line, qubit 0 leftmost.
    pub fn dump(&self) -> String {
        self.bitstrings.iter().map(|&b| format_bits(b, self.n) + "\n").collect()
    }
}

/// Inverse-CDF sampler over a fixed distribution.
struct Sampler {
    cumulative: Vec<f64>,
}

impl Sampler {
    fn new(state: &StateVector) -> Self {
        let mut acc = 0.0;
        let cumulative = state
            .amps
            .iter()
            .map(|a| {
                acc += a.norm_sqr();
                acc
            })
            .collect();
        Sampler { cumulative }
    }

    fn draw(&self, rng: &mut StreamRng) -> u64 {
        let total = *self.cumulative.last().expect("non-empty state");
        let u = rng.random::<f64>() * total;
        let idx = self.cumulative.partition_point(|&c| c <= u);
        idx.min(self.cumulative.len() - 1) as u64
    }
}

/// Draws `shots` i.i.d. samples from `|amplitude|^2`.
pub fn sample(state: &StateVector, shots: usize, seed: u64) -> Result<ShotResult> {
    if shots == 0 {
        return Err(Error::invalid("shot count must be at least 1"));
    }
    let sampler = Sampler::new(state);
    let mut rng = rng::stream(seed, &[]);
    let bitstrings = (0..shots).map(|_| sampler.draw(&mut rng)).collect();
    Ok(ShotResult { n: state.n, bitstrings })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseModel {
    /// Amplitude-damping probability per touched qubit per two-qubit gate.
    pub amp_damping_per_2q: f64,
    /// Probability of a uniformly random Pauli per touched qubit per two-qubit gate.
    pub depolarizing_per_2q: f64,
    /// Readout flip probability for a true 0.
    pub readout_flip_01: f64,
    /// Readout flip probability for a true 1.
    pub readout_flip_10: f64,
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("amp_damping_per_2q", self.amp_damping_per_2q),
            ("depolarizing_per_2q", self.depolarizing_per_2q),
            ("readout_flip_01", self.readout_flip_01),
            ("readout_flip_10", self.readout_flip_10),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!("{name} = {p} is not a probability")));
            }
        }
        Ok(())
    }

    pub fn has_gate_noise(&self) -> bool {
        self.amp_damping_per_2q > 0.0 || self.depolarizing_per_2q > 0.0
    }

    pub fn has_readout_noise(&self) -> bool {
        self.readout_flip_01 > 0.0 || self.readout_flip_10 > 0.0
    }

    fn flip_readout(&self, bits: u64, n: usize, rng: &mut StreamRng) -> u64 {
        (0..n).fold(bits, |acc, q| {
            let p = if (acc >> q) & 1 == 0 { self.readout_flip_01 } else { self.readout_flip_10 };
            if p > 0.0 && rng.random::<f64>() < p {
                acc ^ (1 << q)
            } else {
                acc
            }
        })
    }
}

/// Samples `circuit` from `|0...0>` under `noise`.
///
/// Without gate noise this is exactly `sample(apply_circuit(|0>), shots, seed)`
/// followed by readout flips. With gate noise every shot is an independent
/// trajectory seeded from `(seed, shot)`.
pub fn run_noisy(circuit: &Circuit, noise: &NoiseModel, shots: usize, seed: u64) -> Result<ShotResult> {
    noise.validate()?;
    if shots == 0 {
        return Err(Error::invalid("shot count must be at least 1"));
    }
    let n = circuit.n();
    if !noise.has_gate_noise() {
        let state = apply_circuit(StateVector::zero(n)?, circuit)?;
        let mut result = sample(&state, shots, seed)?;
        if noise.has_readout_noise() {
            let mut rng = rng::stream(seed, &[tags::READOUT]);
            for b in &mut result.bitstrings {
                *b = noise.flip_readout(*b, n, &mut rng);
            }
        }
        return Ok(result);
    }

    let gates: Vec<NativeGate> = circuit.all_gates().collect();
    let bitstrings = (0..shots)
        .into_par_iter()
        .map(|shot| {
            let mut rng = rng::stream(seed, &[shot as u64]);
            let state = trajectory(n, &gates, noise, &mut rng)?;
            let outcome = Sampler::new(&state).draw(&mut rng);
            Ok(noise.flip_readout(outcome, n, &mut rng))
        })
        .collect::<Result<Vec<u64>>>()?;
    Ok(ShotResult { n, bitstrings })
}

fn trajectory(n: usize, gates: &[NativeGate], noise: &NoiseModel, rng: &mut StreamRng) -> Result<StateVector> {
    let mut state = StateVector::zero(n)?;
    let mut norm_sqr = 1.0;
    for gate in gates {
        state.apply_gate(gate);
        if let (a, Some(b)) = gate.qubits() {
            for q in [a, b] {
                if noise.amp_damping_per_2q > 0.0 {
                    norm_sqr = state.damp(q, noise.amp_damping_per_2q, norm_sqr, rng);
                }
                if noise.depolarizing_per_2q > 0.0 && rng.random::<f64>() < noise.depolarizing_per_2q {
                    state.apply_pauli(q, rng.random_range(0..3));
                }
            }
        }
    }
    if norm_sqr != 1.0 {
        state.scale(1.0 / norm_sqr.sqrt());
    }
    Ok(state)
}

/// Exact `<C>` of `state`, evaluating each physical index at its logical assignment.
pub fn expectation(state: &StateVector, instance: &SkInstance, qubit_map: &[usize]) -> Result<f64> {
    if instance.n() != state.n || qubit_map.len() != state.n {
        return Err(Error::LengthMismatch { expected: state.n, got: instance.n() });
    }
    let table = instance.energy_table()?;
    Ok(state
        .amps
        .iter()
        .enumerate()
        .map(|(i, a)| a.norm_sqr() * table[unpermute(i as u64, qubit_map) as usize] as f64)
        .sum())
}
