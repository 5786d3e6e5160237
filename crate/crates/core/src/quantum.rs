//! Discrete qubit model: preparation and measurement in two conjugate bases,
//! per-hop bit-flip noise, and the intercept/resend operation.
//!
//! A qubit here is just `(basis, bit)` — the four states `+x, -x, +y, -y`.
//! Measuring in the preparation basis returns the bit deterministically;
//! measuring in the conjugate basis returns a fair coin. Because every party
//! in the chain measures immediately in one of the two bases, nothing beyond
//! this classical model is needed, and it keeps runs exactly reproducible.

use crate::error::{Error, Result};
use crate::rng::RngStream;
use serde::{Deserialize, Serialize};

/// One of the two conjugate measurement bases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Basis {
    X,
    Y,
}

impl Basis {
    pub fn conjugate(self) -> Basis {
        match self {
            Basis::X => Basis::Y,
            Basis::Y => Basis::X,
        }
    }

    /// Uniform basis choice, one rng draw.
    pub fn random(rng: &mut RngStream) -> Basis {
        if rng.draw_bit() == 0 {
            Basis::X
        } else {
            Basis::Y
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Basis::X => 'X',
            Basis::Y => 'Y',
        }
    }
}

/// A qubit in one of the four states: `(X,0)=+x`, `(X,1)=-x`, `(Y,0)=+y`,
/// `(Y,1)=-y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QubitState {
    pub basis: Basis,
    pub bit: u8,
}

/// Independent per-hop bit-flip channel. A flip maps `bit -> 1-bit` within
/// the same basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub flip_probability: f64,
}

impl NoiseModel {
    pub fn new(flip_probability: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&flip_probability) {
            return Err(Error::MalformedInput(format!(
                "flip_probability {flip_probability} outside [0, 1]"
            )));
        }
        Ok(Self { flip_probability })
    }

    pub const NOISELESS: NoiseModel = NoiseModel {
        flip_probability: 0.0,
    };
}

/// Encode a bit in a basis.
pub fn prepare_qubit(basis: Basis, bit: u8) -> QubitState {
    debug_assert!(bit <= 1);
    QubitState { basis, bit }
}

/// Measure a qubit. Matching basis returns the encoded bit and consumes no
/// randomness; the conjugate basis returns a fair coin, consuming one draw.
pub fn measure_qubit(state: QubitState, basis: Basis, rng: &mut RngStream) -> u8 {
    if basis == state.basis {
        state.bit
    } else {
        rng.draw_bit()
    }
}

/// Apply the bit-flip channel. Always consumes exactly one rng draw so that
/// stream positions do not depend on the flip probability.
pub fn apply_noise(state: QubitState, noise: NoiseModel, rng: &mut RngStream) -> QubitState {
    let flip = rng.draw_bool(noise.flip_probability);
    QubitState {
        basis: state.basis,
        bit: if flip { 1 - state.bit } else { state.bit },
    }
}

/// Measure in `basis` and re-prepare the observed state. This is both what a
/// cooperating relay does on every qubit and the classic eavesdropping attack.
pub fn intercept_resend(
    state: QubitState,
    basis: Basis,
    rng: &mut RngStream,
) -> (u8, QubitState) {
    let bit = measure_qubit(state, basis, rng);
    (bit, prepare_qubit(basis, bit))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rng(label: &str) -> RngStream {
        RngStream::derive(0xBA5E, label)
    }

    #[test]
    fn prepare_maps_to_four_states() {
        assert_eq!(prepare_qubit(Basis::X, 0), QubitState { basis: Basis::X, bit: 0 });
        assert_eq!(prepare_qubit(Basis::Y, 1), QubitState { basis: Basis::Y, bit: 1 });
        assert_eq!(prepare_qubit(Basis::X, 1), QubitState { basis: Basis::X, bit: 1 });
    }

    #[test]
    fn same_basis_measurement_is_deterministic() {
        let mut r = rng("same-basis");
        for basis in [Basis::X, Basis::Y] {
            for bit in [0, 1] {
                for _ in 0..32 {
                    assert_eq!(measure_qubit(prepare_qubit(basis, bit), basis, &mut r), bit);
                }
            }
        }
    }

    #[test]
    fn cross_basis_measurement_is_uniform() {
        let mut r = rng("cross-basis");
        let n = 100_000;
        let state = prepare_qubit(Basis::X, 0);
        let ones: u32 = (0..n)
            .map(|_| measure_qubit(state, Basis::Y, &mut r) as u32)
            .sum();
        let mean = ones as f64 / n as f64;
        assert!((0.49..=0.51).contains(&mean), "mean {mean}");
    }

    #[test]
    fn noise_extremes() {
        let mut r = rng("noise-extremes");
        let state = prepare_qubit(Basis::X, 0);
        let zero = NoiseModel::new(0.0).unwrap();
        let one = NoiseModel::new(1.0).unwrap();
        assert_eq!(apply_noise(state, zero, &mut r), state);
        assert_eq!(apply_noise(state, one, &mut r), prepare_qubit(Basis::X, 1));
    }

    #[test]
    fn noise_rate_matches_flip_probability() {
        let mut r = rng("noise-rate");
        let noise = NoiseModel::new(0.05).unwrap();
        let n = 100_000;
        let flipped = (0..n)
            .filter(|_| apply_noise(prepare_qubit(Basis::X, 0), noise, &mut r).bit == 1)
            .count();
        let frac = flipped as f64 / n as f64;
        assert!((0.045..=0.055).contains(&frac), "flip fraction {frac}");
    }

    #[test]
    fn noise_model_rejects_out_of_range() {
        assert!(NoiseModel::new(-0.1).is_err());
        assert!(NoiseModel::new(1.1).is_err());
    }

    #[test]
    fn intercept_resend_matching_basis_is_transparent() {
        let mut r = rng("ir-transparent");
        let (bit, out) = intercept_resend(prepare_qubit(Basis::X, 0), Basis::X, &mut r);
        assert_eq!((bit, out), (0, prepare_qubit(Basis::X, 0)));
        let (bit, out) = intercept_resend(prepare_qubit(Basis::Y, 1), Basis::Y, &mut r);
        assert_eq!((bit, out), (1, prepare_qubit(Basis::Y, 1)));
    }

    #[test]
    fn intercept_resend_cross_basis_randomizes_downstream() {
        // Interceptor in the conjugate basis, downstream measurement back in
        // the original basis: half the outcomes disagree with the original.
        let mut r = rng("ir-disturbance");
        let n = 100_000;
        let mut errors = 0u32;
        for _ in 0..n {
            let (_, resent) = intercept_resend(prepare_qubit(Basis::X, 0), Basis::Y, &mut r);
            if measure_qubit(resent, Basis::X, &mut r) != 0 {
                errors += 1;
            }
        }
        let frac = errors as f64 / n as f64;
        assert!((0.49..=0.51).contains(&frac), "error fraction {frac}");
    }

    proptest! {
        #[test]
        fn same_basis_round_trip(seed in any::<u64>(), basis_bit in 0u8..4) {
            let basis = if basis_bit & 1 == 0 { Basis::X } else { Basis::Y };
            let bit = basis_bit >> 1;
            let mut r = RngStream::derive(seed, "prop-roundtrip");
            prop_assert_eq!(measure_qubit(prepare_qubit(basis, bit), basis, &mut r), bit);
        }

        #[test]
        fn noise_preserves_basis(seed in any::<u64>(), p in 0.0f64..=1.0) {
            let mut r = RngStream::derive(seed, "prop-noise");
            let noise = NoiseModel::new(p).unwrap();
            for basis in [Basis::X, Basis::Y] {
                for bit in [0, 1] {
                    let out = apply_noise(prepare_qubit(basis, bit), noise, &mut r);
                    prop_assert_eq!(out.basis, basis);
                }
            }
        }

        #[test]
        fn replay_is_bit_identical(seed in any::<u64>()) {
            let run = |seed: u64| -> Vec<u8> {
                let mut r = RngStream::derive(seed, "prop-replay");
                (0..256)
                    .map(|i| {
                        let basis = if i & 1 == 0 { Basis::X } else { Basis::Y };
                        let (bit, resent) =
                            intercept_resend(prepare_qubit(Basis::X, 0), basis, &mut r);
                        bit ^ measure_qubit(resent, Basis::Y, &mut r)
                    })
                    .collect()
            };
            prop_assert_eq!(run(seed), run(seed));
        }
    }
}
