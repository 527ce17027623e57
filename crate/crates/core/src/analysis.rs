//! Per-bit transition histograms and codeword transition-balance statistics.

use crate::block::{CacheBlock, BLOCK_BITS};
use crate::mapping::{TransitionVector, CODEWORDS};

/// Transition count of every data bit position over a write stream.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitHistogram {
    counts: Vec<u64>,
}

impl Default for BitHistogram {
    fn default() -> Self {
        BitHistogram {
            counts: vec![0; BLOCK_BITS],
        }
    }
}

impl BitHistogram {
    pub fn push(&mut self, old: &CacheBlock, new: &CacheBlock) {
        for flat in old.xor(new).ones() {
            self.counts[flat] += 1;
        }
    }

    pub fn merge(&mut self, other: &BitHistogram) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Mean count over the flat positions in `range`, folded over all eight
    /// words (so `range` is a bit range inside a 64-bit word).
    pub fn word_profile_mean(&self, range: std::ops::RangeInclusive<usize>) -> f64 {
        let mut sum = 0u64;
        let mut n = 0u64;
        for w in 0..8 {
            for b in range.clone() {
                sum += self.counts[64 * w + b];
                n += 1;
            }
        }
        sum as f64 / n as f64
    }
}

pub fn per_bit_histogram<'a, I>(pairs: I) -> BitHistogram
where
    I: IntoIterator<Item = (&'a CacheBlock, &'a CacheBlock)>,
{
    let mut h = BitHistogram::default();
    for (old, new) in pairs {
        h.push(old, new);
    }
    h
}

/// Running balance statistics; each write's sorted codeword counts are
/// normalized by their own mean `K / 8`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CodewordStatsAccumulator {
    pub counted: u64,
    pub skipped: u64,
    pub sorted_sum: [f64; CODEWORDS],
    pub gap_sum: f64,
    pub worst_min: f64,
    pub worst_max: f64,
}

impl Default for CodewordStatsAccumulator {
    fn default() -> Self {
        CodewordStatsAccumulator {
            counted: 0,
            skipped: 0,
            sorted_sum: [0.0; CODEWORDS],
            gap_sum: 0.0,
            worst_min: f64::INFINITY,
            worst_max: f64::NEG_INFINITY,
        }
    }
}

impl CodewordStatsAccumulator {
    pub fn push(&mut self, tv: &TransitionVector) {
        let total = tv.total();
        if total == 0 {
            self.skipped += 1;
            return;
        }
        let mean = total as f64 / CODEWORDS as f64;
        let mut k = tv.k;
        k.sort_unstable();
        for (s, &x) in self.sorted_sum.iter_mut().zip(&k) {
            *s += x as f64 / mean;
        }
        let lo = k[0] as f64 / mean;
        let hi = k[CODEWORDS - 1] as f64 / mean;
        self.gap_sum += hi - lo;
        self.worst_min = self.worst_min.min(lo);
        self.worst_max = self.worst_max.max(hi);
        self.counted += 1;
    }

    pub fn merge(&mut self, other: &CodewordStatsAccumulator) {
        self.counted += other.counted;
        self.skipped += other.skipped;
        for (a, b) in self.sorted_sum.iter_mut().zip(&other.sorted_sum) {
            *a += b;
        }
        self.gap_sum += other.gap_sum;
        self.worst_min = self.worst_min.min(other.worst_min);
        self.worst_max = self.worst_max.max(other.worst_max);
    }

    /// `None` when every write had zero transitions.
    pub fn finish(&self) -> Option<CodewordStats> {
        if self.counted == 0 {
            return None;
        }
        let n = self.counted as f64;
        let ranks = self.sorted_sum.map(|s| 100.0 * s / n);
        Some(CodewordStats {
            writes: self.counted,
            skipped: self.skipped,
            rank_avg_pct: ranks,
            min_avg_pct: ranks[0],
            max_avg_pct: ranks[CODEWORDS - 1],
            mean_pct: ranks.iter().sum::<f64>() / CODEWORDS as f64,
            gap_avg_pct: 100.0 * self.gap_sum / n,
            min_worst_pct: 100.0 * self.worst_min,
            max_worst_pct: 100.0 * self.worst_max,
        })
    }
}

/// Codeword transition balance of a write stream, in percent of the uniform
/// share `K / 8`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CodewordStats {
    pub writes: u64,
    /// Writes with no transitions, left out of the averages.
    pub skipped: u64,
    /// Average of the i-th smallest codeword count.
    pub rank_avg_pct: [f64; CODEWORDS],
    pub min_avg_pct: f64,
    pub max_avg_pct: f64,
    /// Always 100 up to rounding.
    pub mean_pct: f64,
    /// Average per-write (max - min).
    pub gap_avg_pct: f64,
    pub min_worst_pct: f64,
    pub max_worst_pct: f64,
}

pub fn codeword_stats<'a, I>(tvs: I) -> Option<CodewordStats>
where
    I: IntoIterator<Item = &'a TransitionVector>,
{
    let mut acc = CodewordStatsAccumulator::default();
    for tv in tvs {
        acc.push(tv);
    }
    acc.finish()
}
