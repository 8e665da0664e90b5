//! Statistical checks on sampling, expectation values and the noise model.

use rand::Rng;
use timeblock_core::ansatz::{build_circuit, AngleVector, AnsatzSpec, Base, GateOrdering};
use timeblock_core::ising::generate_sk;
use timeblock_core::metrics::sample_mean;
use timeblock_core::rng;
use timeblock_core::sim::{apply_circuit, expectation, run_noisy, sample, NoiseModel, StateVector};

#[test]
fn uniform_frequencies_within_binomial_bounds() {
    let shots = 1_000_000;
    let result = sample(&StateVector::plus(4).unwrap(), shots, 17).unwrap();
    let mut counts = [0usize; 16];
    for &b in result.bitstrings() {
        counts[b as usize] += 1;
    }
    let p = 1.0 / 16.0;
    let sigma = (shots as f64 * p * (1.0 - p)).sqrt();
    for (x, &c) in counts.iter().enumerate() {
        let z = (c as f64 - shots as f64 * p).abs() / sigma;
        assert!(z < 5.0, "bitstring {x}: z = {z}");
    }
}

#[test]
fn expectation_matches_sample_mean() {
    let n = 8;
    let instance = generate_sk(n, 21).unwrap();
    let spec = AnsatzSpec::new(Base::Qaoa, n, n, 1).unwrap();
    let mut rng = rng::stream(22, &[]);
    let ordering = GateOrdering::random(n, &mut rng);
    let (circuit, _) = build_circuit(&instance, &spec, &ordering, &AngleVector::constant(1, 0.35, 1.9)).unwrap();
    let state = apply_circuit(StateVector::zero(n).unwrap(), &circuit).unwrap();
    let exact = expectation(&state, &instance, circuit.qubit_map()).unwrap();

    let shots = sample(&state, 1_000_000, 23).unwrap();
    let samples = shots.energies(&instance, circuit.qubit_map()).unwrap();
    let mean = sample_mean(&samples);
    let var = samples.energies().iter().map(|&e| (e as f64 - mean).powi(2)).sum::<f64>() / (samples.len() - 1) as f64;
    let stderr = (var / samples.len() as f64).sqrt();
    assert!((mean - exact).abs() < 5.0 * stderr, "mean {mean} exact {exact} stderr {stderr}");
}

#[test]
fn qampa_conserves_hamming_weight_without_prologue() {
    let n = 6;
    let instance = generate_sk(n, 30).unwrap();
    let spec = AnsatzSpec::new(Base::Qampa, n, 3, 2).unwrap();
    let mut rng = rng::stream(31, &[]);
    let angles = AngleVector::new(vec![0.4, 1.2], vec![0.9, 2.2]).unwrap();
    let (circuit, _) = build_circuit(&instance, &spec, &GateOrdering::random(n, &mut rng), &angles).unwrap();
    let body = circuit.without_prologue();
    for input in [0b000000u64, 0b000101, 0b110101] {
        let state = apply_circuit(StateVector::basis(n, input).unwrap(), &body).unwrap();
        let shots = sample(&state, 5_000, input).unwrap();
        assert!(shots.bitstrings().iter().all(|b| b.count_ones() == input.count_ones()));
    }
}

fn depolarizing_setup() -> (timeblock_core::ising::SkInstance, timeblock_core::circuit::Circuit, f64) {
    let n = 6;
    let instance = generate_sk(n, 40).unwrap();
    let spec = AnsatzSpec::new(Base::Qampa, n, n, 1).unwrap();
    let ordering = GateOrdering::identity(n);
    // Most negative exact mean over a coarse angle grid.
    let mut best: Option<(f64, timeblock_core::circuit::Circuit)> = None;
    for gi in 0..8 {
        for bi in 0..8 {
            let angles = AngleVector::constant(1, gi as f64 * 0.19, bi as f64 * 0.39);
            let (c, _) = build_circuit(&instance, &spec, &ordering, &angles).unwrap();
            let state = apply_circuit(StateVector::zero(n).unwrap(), &c).unwrap();
            let e = expectation(&state, &instance, c.qubit_map()).unwrap();
            if best.as_ref().is_none_or(|(b, _)| e < *b) {
                best = Some((e, c));
            }
        }
    }
    let (e, c) = best.unwrap();
    (instance, c, e)
}

#[test]
fn depolarizing_noise_contracts_the_mean_energy() {
    let (instance, circuit, noiseless) = depolarizing_setup();
    assert!(noiseless < -1.0, "setup should find a clearly negative mean, got {noiseless}");
    let noise = NoiseModel { depolarizing_per_2q: 0.2, ..NoiseModel::noiseless() };
    let mut contracted = 0;
    for seed in 0..20 {
        let shots = run_noisy(&circuit, &noise, 500, seed).unwrap();
        let mean = sample_mean(&shots.energies(&instance, circuit.qubit_map()).unwrap());
        if mean.abs() < noiseless.abs() {
            contracted += 1;
        }
    }
    assert!(contracted >= 19, "contracted in {contracted}/20 seeds");
}

#[test]
fn damping_biases_towards_zero_bits() {
    let n = 5;
    let instance = generate_sk(n, 50).unwrap();
    let spec = AnsatzSpec::new(Base::Qampa, n, 2, 2).unwrap();
    let angles = AngleVector::new(vec![0.3, 0.8], vec![0.5, 1.4]).unwrap();
    let (circuit, _) = build_circuit(&instance, &spec, &GateOrdering::identity(n), &angles).unwrap();
    let ones = |noise: &NoiseModel| {
        let shots = run_noisy(&circuit, noise, 2000, 5).unwrap();
        shots.bitstrings().iter().map(|b| b.count_ones() as f64).sum::<f64>() / 2000.0
    };
    let clean = ones(&NoiseModel::noiseless());
    let damped = ones(&NoiseModel { amp_damping_per_2q: 0.1, ..NoiseModel::noiseless() });
    assert!(damped < clean - 0.3, "clean {clean} damped {damped}");
}

#[test]
fn noisy_runs_are_reproducible() {
    let (_, circuit, _) = depolarizing_setup();
    let noise = NoiseModel { depolarizing_per_2q: 0.05, amp_damping_per_2q: 0.02, ..NoiseModel::noiseless() };
    let seed = rng::stream(1, &[]).random::<u64>();
    assert_eq!(run_noisy(&circuit, &noise, 300, seed).unwrap(), run_noisy(&circuit, &noise, 300, seed).unwrap());
}
