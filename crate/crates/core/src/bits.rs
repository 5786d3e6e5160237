//! Bit-string helpers. Keys and pools are `Vec<u8>` holding one 0/1 value per
//! element; packing into `u64` words happens only inside hot loops.

/// XOR-parity of a 0/1 slice.
pub fn parity(bits: &[u8]) -> u8 {
    bits.iter().fold(0u8, |acc, &b| acc ^ b)
}

/// Hamming distance between two equal-length 0/1 slices.
pub fn hamming(a: &[u8], b: &[u8]) -> usize {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// Pack a 0/1 slice into little-endian 64-bit words (bit `i` of the string is
/// bit `i % 64` of word `i / 64`).
pub fn pack_words(bits: &[u8]) -> Vec<u64> {
    let mut words = vec![0u64; bits.len().div_ceil(64)];
    for (i, &b) in bits.iter().enumerate() {
        if b != 0 {
            words[i / 64] |= 1u64 << (i % 64);
        }
    }
    words
}

/// Hex encoding of a 0/1 slice, MSB-first within each byte; the bit length is
/// carried separately by callers.
pub fn to_hex(bits: &[u8]) -> String {
    let mut bytes = vec![0u8; bits.len().div_ceil(8)];
    for (i, &b) in bits.iter().enumerate() {
        if b != 0 {
            bytes[i / 8] |= 0x80 >> (i % 8);
        }
    }
    hex::encode(bytes)
}

/// Inverse of [`to_hex`] given the original bit length.
pub fn from_hex(s: &str, bit_len: usize) -> Option<Vec<u8>> {
    let bytes = hex::decode(s).ok()?;
    if bytes.len() != bit_len.div_ceil(8) {
        return None;
    }
    Some((0..bit_len).map(|i| (bytes[i / 8] >> (7 - i % 8)) & 1).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parity_basics() {
        assert_eq!(parity(&[]), 0);
        assert_eq!(parity(&[1, 0, 1]), 0);
        assert_eq!(parity(&[1, 1, 1]), 1);
    }

    #[test]
    fn packing_matches_bit_positions() {
        let bits = [1, 0, 0, 0, 0, 0, 0, 0, 1];
        let words = pack_words(&bits);
        assert_eq!(words.len(), 1);
        assert_eq!(words[0], 1 | (1 << 8));
    }

    proptest! {
        #[test]
        fn hex_round_trip(bits in proptest::collection::vec(0u8..=1, 0..200)) {
            let enc = to_hex(&bits);
            let dec = from_hex(&enc, bits.len()).unwrap();
            prop_assert_eq!(dec, bits);
        }

        #[test]
        fn hamming_agrees_with_parity_of_xor(
            pair in proptest::collection::vec((0u8..=1, 0u8..=1), 0..200)
        ) {
            let a: Vec<u8> = pair.iter().map(|p| p.0).collect();
            let b: Vec<u8> = pair.iter().map(|p| p.1).collect();
            let xodd: usize = a.iter().zip(&b).map(|(x, y)| (x ^ y) as usize).sum();
            prop_assert_eq!(hamming(&a, &b), xodd);
        }
    }
}
