//! Hsiao-style SEC-DED(72,64) code.
//!
//! The parity-check matrix has 72 odd-weight columns of 8 bits. Check bit `c`
//! owns the identity column `1 << c`. Data slot `s` owns the `s`-th column of
//! the sequence formed by all 56 weight-3 bytes in ascending order followed by
//! the 8 smallest weight-5 bytes.
//!
//! Codeword bit indices used by [`DecodeOutcome::Corrected`] put the data
//! slots first: index `s < 64` is data slot `s`, index `64 + c` is check bit
//! `c`.

pub const DATA_BITS: usize = 64;
pub const CHECK_BITS: usize = 8;
pub const CODEWORD_BITS: usize = DATA_BITS + CHECK_BITS;

/// Eight parity bits; bit `c` of the byte is check bit `c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct CheckBits(pub u8);

/// A 64-bit dataword plus its stored check bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Codeword {
    pub data: u64,
    pub check: CheckBits,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DecodeOutcome {
    NoError,
    /// Single-bit error at the given codeword bit index.
    Corrected(u8),
    DetectedUncorrectable,
}

const fn build_data_columns() -> [u8; DATA_BITS] {
    let mut cols = [0u8; DATA_BITS];
    let mut n = 0;
    let mut v: u32 = 0;
    while v < 256 {
        if (v as u8).count_ones() == 3 {
            cols[n] = v as u8;
            n += 1;
        }
        v += 1;
    }
    v = 0;
    while v < 256 && n < DATA_BITS {
        if (v as u8).count_ones() == 5 {
            cols[n] = v as u8;
            n += 1;
        }
        v += 1;
    }
    cols
}

const fn build_check_masks(cols: &[u8; DATA_BITS]) -> [u64; CHECK_BITS] {
    let mut masks = [0u64; CHECK_BITS];
    let mut s = 0;
    while s < DATA_BITS {
        let mut c = 0;
        while c < CHECK_BITS {
            if cols[s] >> c & 1 == 1 {
                masks[c] |= 1u64 << s;
            }
            c += 1;
        }
        s += 1;
    }
    masks
}

const fn build_syndrome_table(cols: &[u8; DATA_BITS]) -> [u8; 256] {
    // 0xff marks "not a column"
    let mut table = [0xffu8; 256];
    let mut s = 0;
    while s < DATA_BITS {
        table[cols[s] as usize] = s as u8;
        s += 1;
    }
    let mut c = 0;
    while c < CHECK_BITS {
        table[1usize << c] = (DATA_BITS + c) as u8;
        c += 1;
    }
    table
}

/// Data columns of H, indexed by dataword slot.
pub const DATA_COLUMNS: [u8; DATA_BITS] = build_data_columns();
const CHECK_MASKS: [u64; CHECK_BITS] = build_check_masks(&DATA_COLUMNS);
const SYNDROME_TO_BIT: [u8; 256] = build_syndrome_table(&DATA_COLUMNS);

/// Column of H for a codeword bit index in `[0, 72)`.
pub fn column(bit: usize) -> u8 {
    assert!(bit < CODEWORD_BITS, "codeword bit {bit} out of range");
    if bit < DATA_BITS {
        DATA_COLUMNS[bit]
    } else {
        1 << (bit - DATA_BITS)
    }
}

pub fn encode(data: u64) -> CheckBits {
    let mut check = 0u8;
    for (c, mask) in CHECK_MASKS.iter().enumerate() {
        check |= (((data & mask).count_ones() & 1) as u8) << c;
    }
    CheckBits(check)
}

impl Codeword {
    pub fn new(data: u64) -> Self {
        Codeword {
            data,
            check: encode(data),
        }
    }

    pub fn bit(&self, bit: usize) -> bool {
        if bit < DATA_BITS {
            self.data >> bit & 1 == 1
        } else {
            self.check.0 >> (bit - DATA_BITS) & 1 == 1
        }
    }

    pub fn flip(&mut self, bit: usize) {
        assert!(bit < CODEWORD_BITS, "codeword bit {bit} out of range");
        if bit < DATA_BITS {
            self.data ^= 1 << bit;
        } else {
            self.check.0 ^= 1 << (bit - DATA_BITS);
        }
    }

    pub fn flipped(mut self, bit: usize) -> Self {
        self.flip(bit);
        self
    }
}

pub fn syndrome(cw: &Codeword) -> u8 {
    encode(cw.data).0 ^ cw.check.0
}

pub fn decode(cw: &Codeword) -> DecodeOutcome {
    match syndrome(cw) {
        0 => DecodeOutcome::NoError,
        s => match SYNDROME_TO_BIT[s as usize] {
            0xff => DecodeOutcome::DetectedUncorrectable,
            bit => DecodeOutcome::Corrected(bit),
        },
    }
}

/// Decodes and applies a correction. Returns `None` when the error is
/// detected but uncorrectable.
pub fn correct(cw: &Codeword) -> Option<Codeword> {
    match decode(cw) {
        DecodeOutcome::NoError => Some(*cw),
        DecodeOutcome::Corrected(bit) => Some(cw.flipped(bit as usize)),
        DecodeOutcome::DetectedUncorrectable => None,
    }
}

/// Result of the exhaustive single/double error sweeps.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SweepReport {
    pub datawords: usize,
    pub single_total: usize,
    pub single_corrected: usize,
    pub double_total: usize,
    pub double_detected: usize,
    pub double_miscorrected: usize,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.single_corrected == self.single_total
            && self.double_detected == self.double_total
            && self.double_miscorrected == 0
    }
}

/// Flips every single bit and every pair of bits of each dataword's codeword.
pub fn exhaustive_sweep(datawords: &[u64]) -> SweepReport {
    let mut r = SweepReport {
        datawords: datawords.len(),
        ..Default::default()
    };
    for &d in datawords {
        let valid = Codeword::new(d);
        for a in 0..CODEWORD_BITS {
            r.single_total += 1;
            let bad = valid.flipped(a);
            if decode(&bad) == DecodeOutcome::Corrected(a as u8) && correct(&bad) == Some(valid) {
                r.single_corrected += 1;
            }
            for b in a + 1..CODEWORD_BITS {
                r.double_total += 1;
                match decode(&bad.flipped(b)) {
                    DecodeOutcome::DetectedUncorrectable => r.double_detected += 1,
                    DecodeOutcome::Corrected(_) => r.double_miscorrected += 1,
                    DecodeOutcome::NoError => {}
                }
            }
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn column_set_is_odd_weight_and_distinct() {
        let mut seen = std::collections::HashSet::new();
        for bit in 0..CODEWORD_BITS {
            let c = column(bit);
            assert_eq!(c.count_ones() % 2, 1);
            assert!(seen.insert(c));
        }
        assert_eq!(DATA_COLUMNS[0], 0b0000_0111);
        assert_eq!(DATA_COLUMNS[55], 0b1110_0000);
        assert_eq!(&DATA_COLUMNS[56..], &[31, 47, 55, 59, 61, 62, 79, 87]);
    }

    #[test]
    fn zero_and_unit_datawords() {
        assert_eq!(encode(0), CheckBits(0));
        for (s, &col) in DATA_COLUMNS.iter().enumerate() {
            assert_eq!(encode(1 << s).0, col);
        }
    }

    #[test]
    fn decode_examples() {
        let cw = Codeword::new(0x0123_4567_89ab_cdef);
        assert_eq!(decode(&cw), DecodeOutcome::NoError);
        assert_eq!(decode(&cw.flipped(5)), DecodeOutcome::Corrected(5));
        assert_eq!(decode(&cw.flipped(70)), DecodeOutcome::Corrected(70));
        assert_eq!(decode(&cw.flipped(3).flipped(7)), DecodeOutcome::DetectedUncorrectable);
    }

    #[test]
    fn syndrome_of_single_flip_is_its_column() {
        let cw = Codeword::new(0xdead_beef_f00d_cafe);
        for bit in 0..CODEWORD_BITS {
            assert_eq!(syndrome(&cw.flipped(bit)), column(bit));
        }
    }

    #[test]
    fn small_sweep_passes() {
        let r = exhaustive_sweep(&[0, u64::MAX, 0x5555_5555_5555_5555]);
        assert_eq!(r.single_total, 3 * 72);
        assert_eq!(r.double_total, 3 * 2556);
        assert!(r.passed(), "{r:?}");
    }
}
