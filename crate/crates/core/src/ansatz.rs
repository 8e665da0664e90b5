//! Time-block k-QAOA / k-QAMPA circuits on a linear chain.
//!
//! Every two-qubit block acts on chain neighbours `(pos, pos + 1)` and
//! realises `ZZ^(J)(γ) · XY(β) · SWAP` with the SWAP absorbed into shifted
//! angles, `ZZ^(J)(γ + π/(4J)) · XY(β + π/4)`. The builder tracks which logical
//! variable sits on each wire, so each block picks up the right `J_ij` and the
//! final wire permutation is recorded on the circuit.

use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{compose_rx, is_permutation, zz_block, Circuit, NativeGate, Prologue};
use crate::error::{Error, Result};
use crate::ising::SkInstance;
use crate::linalg::{Matrix, ZERO};
use crate::sim::StateVector;

/// Largest `n` accepted by [`standard_layer_unitary`].
pub const DENSE_LAYER_LIMIT: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Base {
    Qaoa,
    Qampa,
}

impl std::fmt::Display for Base {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Base::Qaoa => "qaoa",
            Base::Qampa => "qampa",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub base: Base,
    pub n: usize,
    /// Sublayers per time block.
    pub k: usize,
    /// Number of time blocks.
    pub p: usize,
}

impl AnsatzSpec {
    pub fn new(base: Base, n: usize, k: usize, p: usize) -> Result<Self> {
        let spec = AnsatzSpec { base, n, k, p };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::TooFewVariables(self.n));
        }
        if self.k == 0 || self.p == 0 {
            return Err(Error::invalid(format!("k and p must be >= 1 (k = {}, p = {})", self.k, self.p)));
        }
        Ok(())
    }

    pub fn total_sublayers(&self) -> usize {
        self.k * self.p
    }
}

/// Fraction of one standard layer realised by the ansatz, `p k / n`.
pub fn equivalent_standard_depth(spec: &AnsatzSpec) -> f64 {
    (spec.p * spec.k) as f64 / spec.n as f64
}

/// Initial placement: `assignment[wire]` is the logical variable on that wire.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GateOrdering {
    assignment: Vec<usize>,
}

impl GateOrdering {
    pub fn new(assignment: Vec<usize>) -> Result<Self> {
        if !is_permutation(&assignment, assignment.len()) {
            return Err(Error::invalid(format!("ordering {assignment:?} is not a permutation")));
        }
        Ok(GateOrdering { assignment })
    }

    pub fn identity(n: usize) -> Self {
        GateOrdering { assignment: (0..n).collect() }
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut assignment: Vec<usize> = (0..n).collect();
        assignment.shuffle(rng);
        GateOrdering { assignment }
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn n(&self) -> usize {
        self.assignment.len()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleVector {
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
}

impl AngleVector {
    pub fn new(gammas: Vec<f64>, betas: Vec<f64>) -> Result<Self> {
        if gammas.len() != betas.len() {
            return Err(Error::LengthMismatch { expected: gammas.len(), got: betas.len() });
        }
        if gammas.iter().chain(&betas).any(|a| !a.is_finite()) {
            return Err(Error::invalid("angles must be finite"));
        }
        Ok(AngleVector { gammas, betas })
    }

    pub fn constant(p: usize, gamma: f64, beta: f64) -> Self {
        AngleVector { gammas: vec![gamma; p], betas: vec![beta; p] }
    }

    pub fn p(&self) -> usize {
        self.gammas.len()
    }

    /// Gammas followed by betas.
    pub fn flatten(&self) -> Vec<f64> {
        self.gammas.iter().chain(&self.betas).copied().collect()
    }

    pub fn from_flat(flat: &[f64]) -> Result<Self> {
        if flat.len() % 2 != 0 {
            return Err(Error::invalid("flat angle vector must have even length"));
        }
        let p = flat.len() / 2;
        Self::new(flat[..p].to_vec(), flat[p..].to_vec())
    }
}

/// Checkerboard SWAP network: sublayer `s` (0-indexed) pairs positions
/// `(0,1), (2,3), ...` when `s` is even and `(1,2), (3,4), ...` when odd.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SwapSchedule {
    pub n: usize,
    pub sublayers: Vec<Vec<(usize, usize)>>,
    /// `permutations[s][pos]`: which starting position's content sits at `pos`
    /// after sublayer `s`.
    pub permutations: Vec<Vec<usize>>,
}

pub fn sublayer_pairs(n: usize, sublayer: usize) -> impl Iterator<Item = (usize, usize)> {
    let start = sublayer % 2;
    (start..n.saturating_sub(1)).step_by(2).map(|pos| (pos, pos + 1))
}

pub fn build_swap_schedule(n: usize, total_sublayers: usize) -> Result<SwapSchedule> {
    if n < 2 {
        return Err(Error::TooFewVariables(n));
    }
    if total_sublayers == 0 {
        return Err(Error::invalid("schedule needs at least one sublayer"));
    }
    let mut chain: Vec<usize> = (0..n).collect();
    let mut sublayers = Vec::with_capacity(total_sublayers);
    let mut permutations = Vec::with_capacity(total_sublayers);
    for s in 0..total_sublayers {
        let pairs: Vec<(usize, usize)> = sublayer_pairs(n, s).collect();
        for &(a, b) in &pairs {
            chain.swap(a, b);
        }
        sublayers.push(pairs);
        permutations.push(chain.clone());
    }
    Ok(SwapSchedule { n, sublayers, permutations })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Interaction {
    /// Smaller logical index of the pair.
    pub logical_i: usize,
    pub logical_j: usize,
    pub coupling: i8,
    /// Time block index `t`.
    pub layer: usize,
    /// Global sublayer index.
    pub sublayer: usize,
    /// Left wire of the block.
    pub position: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InteractionTrace {
    pub entries: Vec<Interaction>,
}

impl InteractionTrace {
    pub fn blocks(&self) -> usize {
        self.entries.len()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.entries.iter().map(|e| (e.logical_i, e.logical_j))
    }
}

/// Compiles the TB ansatz for `instance` into native gates.
///
/// Layout: Hadamard prologue, then for each time block `t` the `k` sublayers
/// of SWAP-absorbed blocks (`CPHASE`, two `RZ`, `XY`), then for QAOA an
/// `RX(2β_t)` on every wire.
pub fn build_circuit(
    instance: &SkInstance,
    spec: &AnsatzSpec,
    ordering: &GateOrdering,
    angles: &AngleVector,
) -> Result<(Circuit, InteractionTrace)> {
    spec.validate()?;
    let n = spec.n;
    if instance.n() != n {
        return Err(Error::LengthMismatch { expected: n, got: instance.n() });
    }
    if ordering.n() != n {
        return Err(Error::LengthMismatch { expected: n, got: ordering.n() });
    }
    if angles.p() != spec.p || angles.betas.len() != spec.p {
        return Err(Error::LengthMismatch { expected: spec.p, got: angles.p() });
    }

    let mut circuit = Circuit::new(n, Prologue::HadamardAll);
    let mut trace = InteractionTrace::default();
    let mut chain = ordering.assignment().to_vec();
    let mut sublayer = 0;
    for t in 0..spec.p {
        let (gamma, beta) = (angles.gammas[t], angles.betas[t]);
        let xy_angle = match spec.base {
            Base::Qampa => beta + FRAC_PI_4,
            Base::Qaoa => FRAC_PI_4,
        };
        for _ in 0..spec.k {
            for (a, b) in sublayer_pairs(n, sublayer) {
                let (li, lj) = (chain[a], chain[b]);
                let coupling = instance.coupling(li, lj);
                // ZZ^(J)(γ + π/(4J)) = exp(-i (Jγ + π/4) Z⊗Z)
                let zz_angle = coupling as f64 * gamma + FRAC_PI_4;
                circuit.extend(zz_block(a, b, zz_angle)?)?;
                circuit.push(NativeGate::Xy { a, b, beta: xy_angle })?;
                chain.swap(a, b);
                trace.entries.push(Interaction {
                    logical_i: li.min(lj),
                    logical_j: li.max(lj),
                    coupling,
                    layer: t,
                    sublayer,
                    position: a,
                });
            }
            sublayer += 1;
        }
        if spec.base == Base::Qaoa {
            for wire in 0..n {
                circuit.extend(compose_rx(wire, 2.0 * beta))?;
            }
        }
    }
    let mut qubit_map = vec![0; n];
    for (wire, &logical) in chain.iter().enumerate() {
        qubit_map[logical] = wire;
    }
    circuit.set_qubit_map(qubit_map)?;
    Ok((circuit, trace))
}

/// Logical pair order of one full SWAP-network round starting from `ordering`.
pub fn full_round_pairs(ordering: &GateOrdering) -> Vec<(usize, usize)> {
    let n = ordering.n();
    let mut chain = ordering.assignment().to_vec();
    let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
    for s in 0..n {
        for (a, b) in sublayer_pairs(n, s) {
            pairs.push((chain[a], chain[b]));
            chain.swap(a, b);
        }
    }
    pairs
}

/// Dense unitary of one standard layer, with the QAMPA pair order of the
/// identity-ordered SWAP network.
pub fn standard_layer_unitary(instance: &SkInstance, gamma: f64, beta: f64, base: Base) -> Result<Matrix> {
    let order = full_round_pairs(&GateOrdering::identity(instance.n()));
    standard_layer_unitary_with_order(instance, &order, gamma, beta, base)
}

/// Dense unitary of one standard layer acting on logical qubits.
///
/// QAOA: `U_B(β) · exp(-iγ H_C)` with `U_B(β) = ⊗ exp(-iβX)`.
/// QAMPA: ordered product of `ZZ^(J)_ij(γ) · XY_ij(β)` over `pairs`, first pair applied first.
pub fn standard_layer_unitary_with_order(
    instance: &SkInstance,
    pairs: &[(usize, usize)],
    gamma: f64,
    beta: f64,
    base: Base,
) -> Result<Matrix> {
    let n = instance.n();
    if n > DENSE_LAYER_LIMIT {
        return Err(Error::invalid(format!("dense layer unitary limited to n <= {DENSE_LAYER_LIMIT}, got {n}")));
    }
    let dim = 1usize << n;
    let table = instance.energy_table()?;
    let columns: Vec<Vec<Complex64>> = (0..dim)
        .map(|col| {
            let mut amps = vec![ZERO; dim];
            amps[col] = Complex64::new(1.0, 0.0);
            match base {
                Base::Qaoa => {
                    amps[col] *= Complex64::from_polar(1.0, -gamma * table[col] as f64);
                    let mut state = StateVector::from_amplitudes(amps).expect("unit column");
                    for q in 0..n {
                        apply_rx_exact(&mut state, q, 2.0 * beta);
                    }
                    state.into_amplitudes()
                }
                Base::Qampa => {
                    let mut state = StateVector::from_amplitudes(amps).expect("unit column");
                    for &(i, j) in pairs {
                        let theta = instance.coupling(i, j) as f64 * gamma;
                        apply_zz_exact(&mut state, i, j, theta);
                        state.apply_gate(&NativeGate::Xy { a: i, b: j, beta });
                    }
                    state.into_amplitudes()
                }
            }
        })
        .collect();
    Ok(Matrix::from_columns(&columns))
}

/// `exp(-i θ Z_i Z_j)` applied directly (no native decomposition).
fn apply_zz_exact(state: &mut StateVector, i: usize, j: usize, theta: f64) {
    let same = Complex64::from_polar(1.0, -theta);
    let differ = same.conj();
    for (idx, a) in state.amplitudes_mut().iter_mut().enumerate() {
        let parity = ((idx >> i) ^ (idx >> j)) & 1;
        *a *= if parity == 0 { same } else { differ };
    }
}

/// `RX(θ) = exp(-i θ/2 X)` applied directly.
fn apply_rx_exact(state: &mut StateVector, q: usize, theta: f64) {
    let c = Complex64::new((theta / 2.0).cos(), 0.0);
    let s = Complex64::new(0.0, -(theta / 2.0).sin());
    let amps = state.amplitudes_mut();
    let bit = 1usize << q;
    for idx in 0..amps.len() {
        if idx & bit == 0 {
            let (x, y) = (amps[idx], amps[idx | bit]);
            amps[idx] = c * x + s * y;
            amps[idx | bit] = s * x + c * y;
        }
    }
}
