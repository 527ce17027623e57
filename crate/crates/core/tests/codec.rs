use proptest::prelude::*;
use stt_ecc::secded::{self, CheckBits, Codeword, DecodeOutcome, CODEWORD_BITS};

/// Parity-check columns rebuilt from their definition: every 8-bit value of
/// weight 3 ascending, then the eight smallest of weight 5.
fn reference_columns() -> Vec<u8> {
    let mut cols: Vec<u8> = (0u8..=255).filter(|v| v.count_ones() == 3).collect();
    cols.extend((0u8..=255).filter(|v| v.count_ones() == 5).take(8));
    cols
}

/// Bit-by-bit GF(2) product of the data part of H with the dataword.
fn reference_encode(data: u64) -> u8 {
    let cols = reference_columns();
    let mut check = 0u8;
    for row in 0..8 {
        let mut parity = 0u8;
        for (slot, col) in cols.iter().enumerate() {
            parity ^= ((data >> slot) & 1) as u8 & ((col >> row) & 1);
        }
        check |= parity << row;
    }
    check
}

#[test]
fn frozen_check_bits() {
    // computed with a standalone matrix-vector product before the codec existed
    for (data, check) in [
        (0x0123_4567_89ab_cdefu64, 0x42u8),
        (0xdead_beef_cafe_f00d, 0xd2),
        (u64::MAX, 0xd8),
        (0x8000_0000_0000_0001, 0x50),
    ] {
        assert_eq!(secded::encode(data), CheckBits(check), "{data:#x}");
        assert_eq!(reference_encode(data), check);
    }
}

#[test]
fn single_flip_syndromes_are_columns() {
    let cols = reference_columns();
    let cw = Codeword::new(0x0f0f_1234_8888_0001);
    let expected = cols.iter().copied().chain((0..8).map(|c| 1u8 << c));
    for (bit, expect) in expected.enumerate() {
        let s = secded::syndrome(&cw.flipped(bit));
        assert_eq!(s, expect);
        assert_eq!(s.count_ones() % 2, 1);
        assert_eq!(secded::decode(&cw.flipped(bit)), DecodeOutcome::Corrected(bit as u8));
    }
}

#[test]
fn every_pair_has_even_nonzero_syndrome() {
    let cw = Codeword::new(0x7777_0000_ffff_2222);
    let mut pairs = 0;
    for a in 0..CODEWORD_BITS {
        for b in a + 1..CODEWORD_BITS {
            let s = secded::syndrome(&cw.flipped(a).flipped(b));
            assert!(s != 0 && s.count_ones().is_multiple_of(2), "({a},{b})");
            assert_eq!(
                secded::decode(&cw.flipped(a).flipped(b)),
                DecodeOutcome::DetectedUncorrectable
            );
            pairs += 1;
        }
    }
    assert_eq!(pairs, 2556);
}

proptest! {
    #[test]
    fn encode_matches_reference(data in any::<u64>()) {
        prop_assert_eq!(secded::encode(data).0, reference_encode(data));
    }

    #[test]
    fn encode_is_linear(a in any::<u64>(), b in any::<u64>()) {
        prop_assert_eq!(secded::encode(a ^ b).0, secded::encode(a).0 ^ secded::encode(b).0);
    }

    #[test]
    fn syndrome_depends_only_on_error(data in any::<u64>(), err_data in any::<u64>(), err_check in any::<u8>()) {
        let valid = Codeword::new(data);
        let corrupted = Codeword { data: data ^ err_data, check: CheckBits(valid.check.0 ^ err_check) };
        let err = Codeword { data: err_data, check: CheckBits(err_check) };
        prop_assert_eq!(secded::syndrome(&valid), 0);
        prop_assert_eq!(secded::syndrome(&corrupted), secded::syndrome(&err));
    }

    #[test]
    fn single_errors_restore_the_original(data in any::<u64>(), bit in 0..CODEWORD_BITS) {
        let valid = Codeword::new(data);
        prop_assert_eq!(secded::correct(&valid.flipped(bit)), Some(valid));
    }
}
