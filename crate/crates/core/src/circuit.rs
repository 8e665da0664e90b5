//! Circuits over the native gate set `{RZ, RX(π/2), CPHASE, XY}`.
//!
//! Conventions:
//! - `RZ(θ) = exp(-i θ/2 Z)`
//! - `RX90 = RX(π/2) = exp(-i π/4 X)`
//! - `CPHASE(θ) = diag(1, 1, 1, e^{-iθ})`
//! - `XY(β) = exp(-i β (XX + YY))`
//!
//! Two-qubit matrices are written in the basis `|q_a q_b>` with `q_a` the more
//! significant local bit.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, I, ONE, ZERO};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NativeGate {
    Rz { qubit: usize, theta: f64 },
    Rx90 { qubit: usize },
    Cphase { a: usize, b: usize, theta: f64 },
    Xy { a: usize, b: usize, beta: f64 },
}

impl NativeGate {
    pub fn is_two_qubit(&self) -> bool {
        matches!(self, NativeGate::Cphase { .. } | NativeGate::Xy { .. })
    }

    pub fn qubits(&self) -> (usize, Option<usize>) {
        match *self {
            NativeGate::Rz { qubit, .. } | NativeGate::Rx90 { qubit } => (qubit, None),
            NativeGate::Cphase { a, b, .. } | NativeGate::Xy { a, b, .. } => (a, Some(b)),
        }
    }

    fn max_qubit(&self) -> usize {
        let (a, b) = self.qubits();
        b.map_or(a, |b| a.max(b))
    }
}

/// Dense unitary of a single gate: 2x2 or 4x4.
pub fn gate_unitary(gate: &NativeGate) -> Matrix {
    match *gate {
        NativeGate::Rz { theta, .. } => {
            let half = theta / 2.0;
            Matrix::diagonal(&[Complex64::from_polar(1.0, -half), Complex64::from_polar(1.0, half)])
        }
        NativeGate::Rx90 { .. } => {
            let c = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            let s = Complex64::new(0.0, -std::f64::consts::FRAC_1_SQRT_2);
            Matrix::from_rows(&[&[c, s], &[s, c]])
        }
        NativeGate::Cphase { theta, .. } => {
            Matrix::diagonal(&[ONE, ONE, ONE, Complex64::from_polar(1.0, -theta)])
        }
        NativeGate::Xy { beta, .. } => {
            // XX + YY = 2 (|01><10| + |10><01|), so the gate is a rotation by 2β
            // inside the single-excitation subspace.
            let c = Complex64::new((2.0 * beta).cos(), 0.0);
            let s = -I * (2.0 * beta).sin();
            Matrix::from_rows(&[
                &[ONE, ZERO, ZERO, ZERO],
                &[ZERO, c, s, ZERO],
                &[ZERO, s, c, ZERO],
                &[ZERO, ZERO, ZERO, ONE],
            ])
        }
    }
}

/// `RX(θ) = exp(-i θ/2 X)` up to global phase, as
/// `RZ(π/2) · RX90 · RZ(θ + π) · RX90 · RZ(π/2)`.
///
/// Gates are returned in application order (rightmost operator first).
pub fn compose_rx(qubit: usize, theta: f64) -> Vec<NativeGate> {
    vec![
        NativeGate::Rz { qubit, theta: FRAC_PI_2 },
        NativeGate::Rx90 { qubit },
        NativeGate::Rz { qubit, theta: theta + PI },
        NativeGate::Rx90 { qubit },
        NativeGate::Rz { qubit, theta: FRAC_PI_2 },
    ]
}

/// `exp(-i θ Z⊗Z)` up to global phase, as `(RZ(2θ) ⊗ RZ(2θ)) · CPHASE(4θ)`.
///
/// The qubits must be chain neighbours.
pub fn zz_block(a: usize, b: usize, theta: f64) -> Result<Vec<NativeGate>> {
    if a.abs_diff(b) != 1 {
        return Err(Error::NotAdjacent { a, b });
    }
    Ok(vec![
        NativeGate::Cphase { a, b, theta: 4.0 * theta },
        NativeGate::Rz { qubit: a, theta: 2.0 * theta },
        NativeGate::Rz { qubit: b, theta: 2.0 * theta },
    ])
}

/// Hadamard up to global phase: `RZ(π/2) · RX90 · RZ(π/2)`.
pub fn hadamard(qubit: usize) -> [NativeGate; 3] {
    [
        NativeGate::Rz { qubit, theta: FRAC_PI_2 },
        NativeGate::Rx90 { qubit },
        NativeGate::Rz { qubit, theta: FRAC_PI_2 },
    ]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Prologue {
    None,
    /// Hadamard on every wire, preparing `|+>^n` from `|0...0>`.
    HadamardAll,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    n: usize,
    prologue: Prologue,
    gates: Vec<NativeGate>,
    qubit_map: Vec<usize>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct GateCounts {
    pub two_qubit: usize,
    pub rx90: usize,
    pub rz: usize,
}

impl Circuit {
    pub fn new(n: usize, prologue: Prologue) -> Self {
        Circuit { n, prologue, gates: Vec::new(), qubit_map: (0..n).collect() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn prologue(&self) -> Prologue {
        self.prologue
    }

    /// Body gates, excluding the prologue.
    pub fn gates(&self) -> &[NativeGate] {
        &self.gates
    }

    /// `qubit_map[logical] = physical wire` at the end of the circuit.
    pub fn qubit_map(&self) -> &[usize] {
        &self.qubit_map
    }

    pub fn push(&mut self, gate: NativeGate) -> Result<()> {
        if gate.max_qubit() >= self.n {
            return Err(Error::QubitOutOfRange { qubit: gate.max_qubit(), n: self.n });
        }
        if let (a, Some(b)) = gate.qubits() {
            if a == b {
                return Err(Error::invalid(format!("two-qubit gate on repeated qubit {a}")));
            }
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = NativeGate>) -> Result<()> {
        gates.into_iter().try_for_each(|g| self.push(g))
    }

    pub fn set_qubit_map(&mut self, map: Vec<usize>) -> Result<()> {
        if !is_permutation(&map, self.n) {
            return Err(Error::invalid(format!("qubit map {map:?} is not a permutation of 0..{}", self.n)));
        }
        self.qubit_map = map;
        Ok(())
    }

    pub fn without_prologue(&self) -> Self {
        Circuit { prologue: Prologue::None, ..self.clone() }
    }

    pub fn prologue_gates(&self) -> Vec<NativeGate> {
        match self.prologue {
            Prologue::None => Vec::new(),
            Prologue::HadamardAll => (0..self.n).flat_map(hadamard).collect(),
        }
    }

    /// Prologue followed by the body, in application order.
    pub fn all_gates(&self) -> impl Iterator<Item = NativeGate> + '_ {
        self.prologue_gates().into_iter().chain(self.gates.iter().copied())
    }

    /// Line-oriented text dump: `n=`, `map=` headers, then one gate per line.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "n={}", self.n);
        let map: Vec<String> = self.qubit_map.iter().map(|q| q.to_string()).collect();
        let _ = writeln!(out, "map={}", map.join(" "));
        for gate in self.all_gates() {
            let _ = match gate {
                NativeGate::Rz { qubit, theta } => writeln!(out, "RZ q{qubit} {theta:.10}"),
                NativeGate::Rx90 { qubit } => writeln!(out, "RX90 q{qubit}"),
                NativeGate::Cphase { a, b, theta } => writeln!(out, "CPHASE q{a} q{b} {theta:.10}"),
                NativeGate::Xy { a, b, beta } => writeln!(out, "XY q{a} q{b} {beta:.10}"),
            };
        }
        out
    }
}

pub fn count_gates(circuit: &Circuit) -> GateCounts {
    circuit.all_gates().fold(GateCounts::default(), |mut acc, gate| {
        match gate {
            NativeGate::Rz { .. } => acc.rz += 1,
            NativeGate::Rx90 { .. } => acc.rx90 += 1,
            NativeGate::Cphase { .. } | NativeGate::Xy { .. } => acc.two_qubit += 1,
        }
        acc
    })
}

pub(crate) fn is_permutation(map: &[usize], n: usize) -> bool {
    if map.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    map.iter().all(|&q| q < n && !std::mem::replace(&mut seen[q], true))
}

/// Product of a sequence of gates acting on a 1- or 2-qubit register, in
/// application order. Single-qubit gates on `a` (or `b`) are lifted to the pair.
pub fn local_product(gates: &[NativeGate], a: usize, b: Option<usize>) -> Matrix {
    let dim = if b.is_some() { 4 } else { 2 };
    let id2 = Matrix::identity(2);
    gates.iter().fold(Matrix::identity(dim), |acc, gate| {
        let u = gate_unitary(gate);
        let lifted = match (gate, b) {
            (NativeGate::Rz { qubit, .. } | NativeGate::Rx90 { qubit }, Some(b)) => {
                if *qubit == a {
                    u.kron(&id2)
                } else {
                    assert_eq!(*qubit, b, "gate outside the local register");
                    id2.kron(&u)
                }
            }
            _ => u,
        };
        &lifted * &acc
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_identity_up_to_phase(m: &Matrix) {
        let id = Matrix::identity(m.dim());
        assert!(id.phase_blind_distance(m) < 1e-12, "not identity: {m:?}");
    }

    #[test]
    fn gates_are_unitary() {
        for theta in [-3.0, -0.2, 0.0, 0.5, 1.7, 6.0] {
            for gate in [
                NativeGate::Rz { qubit: 0, theta },
                NativeGate::Rx90 { qubit: 0 },
                NativeGate::Cphase { a: 0, b: 1, theta },
                NativeGate::Xy { a: 0, b: 1, beta: theta },
            ] {
                assert!(gate_unitary(&gate).unitarity_error() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_angle_two_qubit_gates_are_identity() {
        assert_eq!(gate_unitary(&NativeGate::Cphase { a: 0, b: 1, theta: 0.0 }), Matrix::identity(4));
        assert_eq!(gate_unitary(&NativeGate::Xy { a: 0, b: 1, beta: 0.0 }), Matrix::identity(4));
    }

    #[test]
    fn decomposition_shapes() {
        let rx = compose_rx(3, 0.4);
        assert_eq!(rx.len(), 5);
        assert_eq!(rx.iter().filter(|g| matches!(g, NativeGate::Rx90 { .. })).count(), 2);
        assert_eq!(rx.iter().filter(|g| matches!(g, NativeGate::Rz { .. })).count(), 3);

        let zz = zz_block(2, 3, 0.37).unwrap();
        assert_eq!(zz.iter().filter(|g| matches!(g, NativeGate::Cphase { .. })).count(), 1);
        assert_eq!(zz.iter().filter(|g| matches!(g, NativeGate::Rz { .. })).count(), 2);
        assert!(matches!(zz_block(1, 3, 0.1), Err(Error::NotAdjacent { a: 1, b: 3 })));
        assert!(zz_block(1, 1, 0.1).is_err());
    }

    #[test]
    fn zero_angle_decompositions_are_identity() {
        assert_identity_up_to_phase(&local_product(&compose_rx(0, 0.0), 0, None));
        assert_identity_up_to_phase(&local_product(&zz_block(0, 1, 0.0).unwrap(), 0, Some(1)));
    }

    #[test]
    fn hadamard_prologue_matches_hadamard() {
        let h = Matrix::from_rows(&[&[ONE, ONE], &[ONE, -ONE]]).scale(Complex64::new(0.5f64.sqrt(), 0.0));
        assert!(local_product(&hadamard(0), 0, None).phase_blind_distance(&h) < 1e-12);
    }

    #[test]
    fn counting() {
        let mut c = Circuit::new(4, Prologue::None);
        assert_eq!(count_gates(&c), GateCounts::default());
        c.extend(zz_block(1, 2, 0.3).unwrap()).unwrap();
        assert_eq!(count_gates(&c), GateCounts { two_qubit: 1, rx90: 0, rz: 2 });
        let h = Circuit::new(3, Prologue::HadamardAll);
        assert_eq!(count_gates(&h), GateCounts { two_qubit: 0, rx90: 3, rz: 6 });
    }

    #[test]
    fn push_validates_qubits() {
        let mut c = Circuit::new(3, Prologue::None);
        assert!(c.push(NativeGate::Rz { qubit: 3, theta: 0.0 }).is_err());
        assert!(c.push(NativeGate::Xy { a: 1, b: 1, beta: 0.0 }).is_err());
        assert!(c.set_qubit_map(vec![0, 0, 1]).is_err());
        assert!(c.set_qubit_map(vec![2, 0, 1]).is_ok());
    }

    #[test]
    fn dump_format() {
        let mut c = Circuit::new(4, Prologue::None);
        c.push(NativeGate::Cphase { a: 2, b: 3, theta: 1.48 }).unwrap();
        c.push(NativeGate::Rx90 { qubit: 1 }).unwrap();
        c.push(NativeGate::Rz { qubit: 0, theta: -0.5 }).unwrap();
        c.push(NativeGate::Xy { a: 0, b: 1, beta: std::f64::consts::FRAC_PI_4 }).unwrap();
        c.set_qubit_map(vec![1, 0, 3, 2]).unwrap();
        assert_eq!(
            c.dump(),
            "n=4\nmap=1 0 3 2\nCPHASE q2 q3 1.4800000000\nRX90 q1\nRZ q0 -0.5000000000\nXY q0 q1 0.7853981634\n"
        );
        let with_prologue = Circuit::new(2, Prologue::HadamardAll).dump();
        assert!(with_prologue.starts_with("n=2\nmap=0 1\nRZ q0 1.5707963268\nRX90 q0\n"));
    }
}
