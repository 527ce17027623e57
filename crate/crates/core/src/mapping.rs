//! Static assignments of the 512 data bits of a block to eight codewords.
//!
//! * Per-word: codeword `n` is word `n`.
//! * Interleaved: codeword `n` takes bit position `n` of every byte.
//! * ROBIN: codeword `n` takes bit position `(i + j + n) mod 8` of byte `j`
//!   of word `i`, so every codeword draws one bit from every byte and the
//!   selected position rotates with both the byte and the word index.
//!
//! Inside a codeword, data bits are ordered by ascending flat index; the rank
//! in that order is the dataword slot fed to the SEC-DED encoder.

use std::fmt;
use std::str::FromStr;

use crate::block::{CacheBlock, BLOCK_BITS};
use crate::error::{Error, Result};
use crate::secded;

pub const CODEWORDS: usize = 8;
pub const BITS_PER_BYTE: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeKind {
    PerWord,
    Interleaved,
    Robin,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 3] = [SchemeKind::PerWord, SchemeKind::Interleaved, SchemeKind::Robin];

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::PerWord => "per-word",
            SchemeKind::Interleaved => "interleaved",
            SchemeKind::Robin => "robin",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "per-word" | "perword" => Ok(SchemeKind::PerWord),
            "interleaved" => Ok(SchemeKind::Interleaved),
            "robin" => Ok(SchemeKind::Robin),
            other => Err(Error::InvalidScheme(format!("unknown scheme `{other}`"))),
        }
    }
}

/// A partitioning scheme together with its block geometry.
///
/// Only the 8 x 8 byte geometry is accepted: the block is 512 bits, each
/// codeword carries 64 data bits, and the ROBIN rotation needs one codeword
/// per bit position of a byte.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MappingScheme {
    kind: SchemeKind,
    words_per_block: usize,
    bytes_per_word: usize,
}

impl MappingScheme {
    pub fn new(kind: SchemeKind) -> Self {
        MappingScheme {
            kind,
            words_per_block: 8,
            bytes_per_word: 8,
        }
    }

    pub fn with_geometry(kind: SchemeKind, words_per_block: usize, bytes_per_word: usize) -> Result<Self> {
        if words_per_block * bytes_per_word * BITS_PER_BYTE != BLOCK_BITS {
            return Err(Error::InvalidScheme(format!(
                "{words_per_block} words x {bytes_per_word} bytes does not cover a {BLOCK_BITS}-bit block"
            )));
        }
        if words_per_block != CODEWORDS || bytes_per_word != BITS_PER_BYTE {
            return Err(Error::InvalidScheme(format!(
                "{kind} requires 8 words of 8 bytes, got {words_per_block} x {bytes_per_word}"
            )));
        }
        Ok(Self::new(kind))
    }

    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    pub fn words_per_block(&self) -> usize {
        self.words_per_block
    }

    pub fn bytes_per_word(&self) -> usize {
        self.bytes_per_word
    }

    /// Codeword that owns the bit at `coord`.
    pub fn map_bit(&self, coord: BitCoordinate) -> usize {
        match self.kind {
            SchemeKind::PerWord => coord.word,
            SchemeKind::Interleaved => coord.pos,
            SchemeKind::Robin => (coord.pos + 2 * BITS_PER_BYTE - coord.word - coord.byte) % BITS_PER_BYTE,
        }
    }

    pub fn map_flat(&self, flat: usize) -> usize {
        self.map_bit(BitCoordinate::from_flat(flat))
    }

    /// Flat indices owned by codeword `n`, ascending; position = dataword slot.
    pub fn codeword_data_bits(&self, n: usize) -> Result<Vec<usize>> {
        if n >= CODEWORDS {
            return Err(Error::InvalidScheme(format!("codeword {n} out of range")));
        }
        Ok((0..BLOCK_BITS).filter(|&f| self.map_flat(f) == n).collect())
    }

    /// Extracts the 64-bit dataword of codeword `n` from `block`.
    pub fn gather(&self, block: &CacheBlock, n: usize) -> u64 {
        match self.kind {
            SchemeKind::PerWord => block.word(n),
            SchemeKind::Interleaved => {
                let mut out = 0u64;
                for i in 0..CODEWORDS {
                    let w = block.word(i);
                    for j in 0..8 {
                        let slot = 8 * i + j;
                        out |= ((w >> (8 * j + n)) & 1) << slot;
                    }
                }
                out
            }
            SchemeKind::Robin => {
                let mut out = 0u64;
                for i in 0..CODEWORDS {
                    let w = block.word(i);
                    for j in 0..8 {
                        let pos = (i + j + n) % BITS_PER_BYTE;
                        out |= ((w >> (8 * j + pos)) & 1) << (8 * i + j);
                    }
                }
                out
            }
        }
    }

    /// Per-codeword population count of `diff`.
    pub fn split_counts(&self, diff: &CacheBlock) -> [u32; CODEWORDS] {
        let mut k = [0u32; CODEWORDS];
        match self.kind {
            SchemeKind::PerWord => {
                for (n, kn) in k.iter_mut().enumerate() {
                    *kn = diff.word(n).count_ones();
                }
            }
            _ => {
                for (n, kn) in k.iter_mut().enumerate() {
                    *kn = self.gather(diff, n).count_ones();
                }
            }
        }
        k
    }

    pub fn verify_partition(&self) -> PartitionReport {
        let mut owner_count = vec![0u32; BLOCK_BITS];
        let mut data_bits = [0usize; CODEWORDS];
        let mut bits_per_word = [[0usize; 8]; CODEWORDS];
        let mut bits_per_byte = [[0usize; 64]; CODEWORDS];
        let mut bits_per_pos = [[0usize; 8]; CODEWORDS];

        for n in 0..CODEWORDS {
            let bits = self.codeword_data_bits(n).expect("n < CODEWORDS");
            data_bits[n] = bits.len();
            for f in bits {
                owner_count[f] += 1;
                let c = BitCoordinate::from_flat(f);
                bits_per_word[n][c.word] += 1;
                bits_per_byte[n][8 * c.word + c.byte] += 1;
                bits_per_pos[n][c.pos] += 1;
            }
        }

        let nonzero = |row: &[usize]| row.iter().filter(|&&c| c > 0).count();
        let uniform = |row: &[usize]| {
            let nz: Vec<usize> = row.iter().copied().filter(|&c| c > 0).collect();
            nz.windows(2)
                .all(|w| w[0] == w[1])
                .then(|| nz.first().copied().unwrap_or(0))
        };

        let codewords = (0..CODEWORDS)
            .map(|n| CodewordSummary {
                data_bits: data_bits[n],
                words: nonzero(&bits_per_word[n]),
                bytes: nonzero(&bits_per_byte[n]),
                positions: nonzero(&bits_per_pos[n]),
                bits_per_word: uniform(&bits_per_word[n]),
                bits_per_byte: uniform(&bits_per_byte[n]),
                bits_per_position: uniform(&bits_per_pos[n]),
            })
            .collect();

        PartitionReport {
            scheme: self.kind,
            bijective: owner_count.iter().all(|&c| c == 1),
            codewords,
        }
    }

    /// Transition counts for a write of `new` over `old`.
    pub fn transition_vector(&self, old: &CacheBlock, new: &CacheBlock, include_ecc: bool) -> TransitionVector {
        let diff = old.xor(new);
        let mut k = self.split_counts(&diff);
        if include_ecc {
            for (n, kn) in k.iter_mut().enumerate() {
                let co = secded::encode(self.gather(old, n));
                let cn = secded::encode(self.gather(new, n));
                *kn += (co.0 ^ cn.0).count_ones();
            }
        }
        TransitionVector { k, include_ecc }
    }
}

impl fmt::Display for MappingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.kind.fmt(f)
    }
}

impl From<SchemeKind> for MappingScheme {
    fn from(kind: SchemeKind) -> Self {
        MappingScheme::new(kind)
    }
}

/// A data bit addressed as (word, byte within word, bit within byte).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BitCoordinate {
    pub word: usize,
    pub byte: usize,
    pub pos: usize,
}

impl BitCoordinate {
    pub fn new(word: usize, byte: usize, pos: usize) -> Result<Self> {
        if word >= 8 || byte >= 8 || pos >= BITS_PER_BYTE {
            return Err(Error::InvalidCoordinate(format!("({word}, {byte}, {pos})")));
        }
        Ok(BitCoordinate { word, byte, pos })
    }

    pub fn from_flat(flat: usize) -> Self {
        assert!(flat < BLOCK_BITS, "flat index {flat} out of range");
        BitCoordinate {
            word: flat / 64,
            byte: flat / 8 % 8,
            pos: flat % 8,
        }
    }

    pub fn flat(&self) -> usize {
        64 * self.word + 8 * self.byte + self.pos
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CodewordSummary {
    pub data_bits: usize,
    /// Number of distinct words contributing at least one bit.
    pub words: usize,
    pub bytes: usize,
    pub positions: usize,
    /// Bits drawn from each contributing word, if the same for all of them.
    pub bits_per_word: Option<usize>,
    pub bits_per_byte: Option<usize>,
    pub bits_per_position: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionReport {
    pub scheme: SchemeKind,
    pub bijective: bool,
    pub codewords: Vec<CodewordSummary>,
}

impl PartitionReport {
    /// Every bit owned exactly once and every codeword holds 64 bits.
    pub fn is_valid(&self) -> bool {
        self.bijective && self.codewords.len() == CODEWORDS && self.codewords.iter().all(|c| c.data_bits == 64)
    }

    /// The ROBIN balance: each codeword takes 8 bits of every word, 1 bit of
    /// every byte and each bit position 8 times.
    pub fn is_fully_balanced(&self) -> bool {
        self.is_valid()
            && self.codewords.iter().all(|c| {
                c.words == 8
                    && c.bytes == 64
                    && c.positions == 8
                    && c.bits_per_word == Some(8)
                    && c.bits_per_byte == Some(1)
                    && c.bits_per_position == Some(8)
            })
    }
}

impl fmt::Display for PartitionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |v: Option<usize>| v.map_or_else(|| "mixed".to_string(), |v| v.to_string());
        writeln!(f, "scheme: {}", self.scheme)?;
        writeln!(f, "bijective: {}", self.bijective)?;
        writeln!(f, "valid: {}", self.is_valid())?;
        writeln!(f, "fully balanced: {}", self.is_fully_balanced())?;
        writeln!(
            f,
            "codeword  data_bits  words  bytes  positions  bits/word  bits/byte  bits/position"
        )?;
        for (n, c) in self.codewords.iter().enumerate() {
            writeln!(
                f,
                "{n:>8}  {:>9}  {:>5}  {:>5}  {:>9}  {:>9}  {:>9}  {:>13}",
                c.data_bits,
                c.words,
                c.bytes,
                c.positions,
                opt(c.bits_per_word),
                opt(c.bits_per_byte),
                opt(c.bits_per_position)
            )?;
        }
        Ok(())
    }
}

/// Per-codeword flip counts for one block write.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct TransitionVector {
    pub k: [u32; CODEWORDS],
    pub include_ecc: bool,
}

impl TransitionVector {
    pub fn new(k: [u32; CODEWORDS], include_ecc: bool) -> Result<Self> {
        let cap = if include_ecc {
            secded::CODEWORD_BITS
        } else {
            secded::DATA_BITS
        } as u32;
        if let Some(bad) = k.iter().find(|&&x| x > cap) {
            return Err(Error::Domain(format!("codeword transition count {bad} exceeds {cap}")));
        }
        Ok(TransitionVector { k, include_ecc })
    }

    pub fn total(&self) -> u32 {
        self.k.iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coord(i: usize, j: usize, p: usize) -> BitCoordinate {
        BitCoordinate::new(i, j, p).unwrap()
    }

    #[test]
    fn map_bit_examples() {
        let robin = MappingScheme::new(SchemeKind::Robin);
        assert_eq!(robin.map_bit(coord(0, 0, 0)), 0);
        assert_eq!(robin.map_bit(coord(1, 2, 3)), 0);
        let c = BitCoordinate::from_flat(100);
        assert_eq!((c.word, c.byte, c.pos), (1, 4, 4));
        assert_eq!(MappingScheme::new(SchemeKind::PerWord).map_bit(c), 1);
        assert_eq!(MappingScheme::new(SchemeKind::Interleaved).map_bit(c), 4);
    }

    #[test]
    fn robin_inverse_matches_forward_rule() {
        // forward: codeword n owns position (i + j + n) mod 8 of byte (i, j)
        let robin = MappingScheme::new(SchemeKind::Robin);
        for n in 0..8 {
            for i in 0..8 {
                for j in 0..8 {
                    let c = coord(i, j, (i + j + n) % 8);
                    assert_eq!(robin.map_bit(c), n);
                }
            }
        }
    }

    #[test]
    fn codeword_bits_examples() {
        let pw = MappingScheme::new(SchemeKind::PerWord).codeword_data_bits(0).unwrap();
        assert_eq!(pw, (0..64).collect::<Vec<_>>());
        let il = MappingScheme::new(SchemeKind::Interleaved)
            .codeword_data_bits(0)
            .unwrap();
        assert_eq!(il, (0..64).map(|b| 8 * b).collect::<Vec<_>>());
        let rb = MappingScheme::new(SchemeKind::Robin).codeword_data_bits(0).unwrap();
        let mut bytes: Vec<usize> = rb.iter().map(|f| f / 8).collect();
        bytes.dedup();
        assert_eq!(bytes, (0..64).collect::<Vec<_>>());
        assert!(MappingScheme::new(SchemeKind::Robin).codeword_data_bits(8).is_err());
    }

    #[test]
    fn gather_follows_slot_order() {
        for kind in SchemeKind::ALL {
            let s = MappingScheme::new(kind);
            for n in 0..8 {
                for (slot, flat) in s.codeword_data_bits(n).unwrap().into_iter().enumerate() {
                    let mut b = CacheBlock::ZERO;
                    b.set_bit(flat, true);
                    assert_eq!(s.gather(&b, n), 1u64 << slot, "{kind} n={n} flat={flat}");
                }
            }
        }
    }

    #[test]
    fn geometry_is_checked() {
        assert!(MappingScheme::with_geometry(SchemeKind::Robin, 8, 8).is_ok());
        assert!(MappingScheme::with_geometry(SchemeKind::Robin, 4, 16).is_err());
        assert!(MappingScheme::with_geometry(SchemeKind::PerWord, 16, 8).is_err());
        assert!(BitCoordinate::new(8, 0, 0).is_err());
    }

    #[test]
    fn verify_partition_examples() {
        let robin = MappingScheme::new(SchemeKind::Robin).verify_partition();
        assert!(robin.is_fully_balanced());
        let pw = MappingScheme::new(SchemeKind::PerWord).verify_partition();
        assert!(pw.is_valid() && !pw.is_fully_balanced());
        assert!(pw.codewords.iter().all(|c| c.words == 1));
        let il = MappingScheme::new(SchemeKind::Interleaved).verify_partition();
        assert!(il.is_valid());
        assert!(il
            .codewords
            .iter()
            .all(|c| c.bits_per_byte == Some(1) && c.positions == 1));
    }

    #[test]
    fn transition_examples() {
        let mut word0 = CacheBlock::ZERO;
        word0.set_word(0, u64::MAX);
        let expect = [
            (SchemeKind::PerWord, [64, 0, 0, 0, 0, 0, 0, 0]),
            (SchemeKind::Interleaved, [8; 8]),
            (SchemeKind::Robin, [8; 8]),
        ];
        for (kind, k) in expect {
            let s = MappingScheme::new(kind);
            assert_eq!(s.transition_vector(&CacheBlock::ZERO, &word0, false).k, k);
            assert_eq!(
                s.transition_vector(&CacheBlock::ZERO, &CacheBlock::ONES, false).k,
                [64; 8]
            );
            assert_eq!(s.transition_vector(&word0, &word0, true).k, [0; 8]);
        }
    }

    #[test]
    fn ecc_flips_are_added() {
        let s = MappingScheme::new(SchemeKind::PerWord);
        let mut new = CacheBlock::ZERO;
        new.set_bit(0, true);
        let tv = s.transition_vector(&CacheBlock::ZERO, &new, true);
        // slot 0 column 0b111 -> three check flips on top of one data flip
        assert_eq!(tv.k, [4, 0, 0, 0, 0, 0, 0, 0]);
        assert!(TransitionVector::new([65; 8], false).is_err());
        assert!(TransitionVector::new([72; 8], true).is_ok());
    }
}
