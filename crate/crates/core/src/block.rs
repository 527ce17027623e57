//! The 512-bit payload of one cache line.
//!
//! Bits are addressed by a flat index `64 * word + 8 * byte + pos`, where byte
//! `j` of word `i` is payload byte `8 * i + j` and `pos` counts from the least
//! significant bit of that byte. Words are stored little-endian, so the flat
//! index of a bit inside word `i` is simply `64 * i` plus its bit index in the
//! `u64`.

use std::fmt;

pub const BLOCK_BITS: usize = 512;
pub const BLOCK_BYTES: usize = 64;
pub const WORDS_PER_BLOCK: usize = 8;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct CacheBlock {
    words: [u64; WORDS_PER_BLOCK],
}

impl CacheBlock {
    pub const ZERO: CacheBlock = CacheBlock {
        words: [0; WORDS_PER_BLOCK],
    };
    pub const ONES: CacheBlock = CacheBlock {
        words: [u64::MAX; WORDS_PER_BLOCK],
    };

    pub fn from_words(words: [u64; WORDS_PER_BLOCK]) -> Self {
        CacheBlock { words }
    }

    pub fn from_bytes(bytes: &[u8; BLOCK_BYTES]) -> Self {
        let mut words = [0u64; WORDS_PER_BLOCK];
        for (w, chunk) in words.iter_mut().zip(bytes.chunks_exact(8)) {
            *w = u64::from_le_bytes(chunk.try_into().unwrap());
        }
        CacheBlock { words }
    }

    pub fn to_bytes(&self) -> [u8; BLOCK_BYTES] {
        let mut out = [0u8; BLOCK_BYTES];
        for (chunk, w) in out.chunks_exact_mut(8).zip(self.words.iter()) {
            chunk.copy_from_slice(&w.to_le_bytes());
        }
        out
    }

    pub fn words(&self) -> &[u64; WORDS_PER_BLOCK] {
        &self.words
    }

    pub fn word(&self, i: usize) -> u64 {
        self.words[i]
    }

    pub fn set_word(&mut self, i: usize, value: u64) {
        self.words[i] = value;
    }

    pub fn bit(&self, flat: usize) -> bool {
        debug_assert!(flat < BLOCK_BITS);
        (self.words[flat / 64] >> (flat % 64)) & 1 == 1
    }

    pub fn set_bit(&mut self, flat: usize, value: bool) {
        let mask = 1u64 << (flat % 64);
        if value {
            self.words[flat / 64] |= mask;
        } else {
            self.words[flat / 64] &= !mask;
        }
    }

    pub fn flip_bit(&mut self, flat: usize) {
        self.words[flat / 64] ^= 1u64 << (flat % 64);
    }

    pub fn xor(&self, other: &CacheBlock) -> CacheBlock {
        let mut words = self.words;
        for (w, o) in words.iter_mut().zip(other.words.iter()) {
            *w ^= o;
        }
        CacheBlock { words }
    }

    pub fn count_ones(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    pub fn hamming_distance(&self, other: &CacheBlock) -> u32 {
        self.xor(other).count_ones()
    }

    /// Flat indices of all set bits, ascending.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let b = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(64 * i + b)
            })
        })
    }
}

impl fmt::Debug for CacheBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CacheBlock(")?;
        for (i, w) in self.words.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{w:016x}")?;
        }
        write!(f, ")")
    }
}
