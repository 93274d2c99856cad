//! Workloads shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tangram_core::{Circuit, Gate};

/// Reproducible random Clifford circuit on `n` qubits.
pub fn random_circuit(seed: u64, n: usize, len: usize) -> Circuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gates = (0..len)
        .map(|_| {
            let a = rng.random_range(0..n);
            let b = (a + rng.random_range(1..n.max(2))) % n;
            match rng.random_range(0..if n > 1 { 5 } else { 2 }) {
                0 => Gate::H(a),
                1 => Gate::S(a),
                2 => Gate::Cnot { control: a, target: b },
                3 => Gate::Cz(a, b),
                _ => Gate::Swap(a, b),
            }
        })
        .collect();
    Circuit::new(n, gates).expect("gates stay in range")
}

#[cfg(test)]
mod tests {
    #[test]
    fn circuits_are_reproducible() {
        let a = super::random_circuit(3, 6, 40);
        assert_eq!(a.gates(), super::random_circuit(3, 6, 40).gates());
        assert_eq!(a.gates().len(), 40);
        let _ = super::random_circuit(1, 1, 10);
    }
}
