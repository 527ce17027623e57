//! Synthetic write workloads with characteristic transition patterns.
//!
//! Every generator first writes each block of its address range once (the
//! cold fill), then issues writes to uniformly chosen blocks. A write updates
//! each field of the block independently with probability `update_prob`
//! (at least one field always changes), so blocks are usually only partly
//! modified.
//!
//! * `Float64Walk`: eight doubles per block, each following a multiplicative
//!   log-normal walk and rounded to `mantissa_bits` of mantissa. Activity
//!   sits in the upper mantissa and low exponent bits of every word.
//! * `NarrowInt32`: sixteen 32-bit integers below `2^narrow_width`; only the
//!   low bits of each field toggle.
//! * `PartialValid`: `Float64Walk` data in the first `V` words of a block
//!   (`V` drawn per block), the remaining words never change.
//! * `Irregular`: sixteen 32-bit fields holding random values of random bit
//!   width, so activity thins out toward the top of each 32-bit field.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::block::{CacheBlock, BLOCK_BYTES};
use crate::error::{Error, Result};
use crate::trace::WriteRecord;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WorkloadKind {
    Float64Walk,
    NarrowInt32,
    PartialValid,
    Irregular,
}

impl WorkloadKind {
    pub const ALL: [WorkloadKind; 4] = [
        WorkloadKind::Float64Walk,
        WorkloadKind::NarrowInt32,
        WorkloadKind::PartialValid,
        WorkloadKind::Irregular,
    ];

    pub fn name(self) -> &'static str {
        match self {
            WorkloadKind::Float64Walk => "float64-walk",
            WorkloadKind::NarrowInt32 => "narrow-int32",
            WorkloadKind::PartialValid => "partial-valid",
            WorkloadKind::Irregular => "irregular",
        }
    }
}

impl fmt::Display for WorkloadKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WorkloadKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace('_', "-");
        WorkloadKind::ALL
            .into_iter()
            .find(|k| k.name() == norm || k.name().replace('-', "") == norm)
            .ok_or_else(|| Error::Config(format!("unknown workload kind `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorkloadSpec {
    pub kind: WorkloadKind,
    pub records: u64,
    /// Number of distinct blocks written.
    pub blocks: u64,
    pub base_addr: u64,
    pub update_prob: f64,
    /// Standard deviation of the log step of the float walk.
    pub step_scale: f64,
    pub mantissa_bits: u32,
    pub narrow_width: u32,
    pub valid_words_min: u32,
    pub valid_words_max: u32,
}

impl WorkloadSpec {
    pub fn new(kind: WorkloadKind, records: u64) -> Self {
        WorkloadSpec {
            kind,
            records,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.records == 0 {
            return bad("workload needs at least one record".into());
        }
        if self.blocks == 0 {
            return bad("workload needs at least one block".into());
        }
        if !self.base_addr.is_multiple_of(BLOCK_BYTES as u64) {
            return bad(format!("base address {:#x} is not 64-byte aligned", self.base_addr));
        }
        if self
            .blocks
            .checked_mul(BLOCK_BYTES as u64)
            .and_then(|span| self.base_addr.checked_add(span))
            .is_none()
        {
            return bad("address range overflows".into());
        }
        if !(self.update_prob > 0.0 && self.update_prob <= 1.0) {
            return bad(format!("update_prob {} outside (0, 1]", self.update_prob));
        }
        if !(self.step_scale.is_finite() && self.step_scale > 0.0) {
            return bad(format!("step_scale {} must be positive", self.step_scale));
        }
        if !(1..=52).contains(&self.mantissa_bits) {
            return bad(format!("mantissa_bits {} outside 1..=52", self.mantissa_bits));
        }
        if !(1..=32).contains(&self.narrow_width) {
            return bad(format!("narrow_width {} outside 1..=32", self.narrow_width));
        }
        if !(1 <= self.valid_words_min && self.valid_words_min <= self.valid_words_max && self.valid_words_max <= 8) {
            return bad(format!(
                "valid words range {}..={} must lie within 1..=8",
                self.valid_words_min, self.valid_words_max
            ));
        }
        Ok(())
    }
}

impl Default for WorkloadSpec {
    fn default() -> Self {
        WorkloadSpec {
            kind: WorkloadKind::Float64Walk,
            records: 10_000,
            blocks: 256,
            base_addr: 0x1000_0000,
            update_prob: 0.5,
            step_scale: 0.25,
            mantissa_bits: 20,
            narrow_width: 12,
            valid_words_min: 1,
            valid_words_max: 8,
        }
    }
}

/// Rounds `v` to `bits` bits of mantissa by clearing the rest.
fn quantize(v: f64, bits: u32) -> u64 {
    let raw = v.to_bits();
    raw & !((1u64 << (52 - bits)) - 1)
}

struct BlockState {
    /// log2 magnitudes of the float fields
    log_mag: [f64; 8],
    words: [u64; 8],
    valid_words: usize,
}

/// Deterministic record generator for a [`WorkloadSpec`].
pub struct WorkloadGenerator {
    spec: WorkloadSpec,
    rng: ChaCha8Rng,
    blocks: Vec<Option<BlockState>>,
    emitted: u64,
}

impl WorkloadGenerator {
    pub fn new(spec: WorkloadSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        Ok(WorkloadGenerator {
            spec,
            rng: ChaCha8Rng::seed_from_u64(seed),
            blocks: (0..spec.blocks).map(|_| None).collect(),
            emitted: 0,
        })
    }

    fn fresh_float(&mut self) -> (f64, u64) {
        let log_mag = self.rng.gen_range(-8.0..8.0);
        (log_mag, quantize(log_mag.exp2(), self.spec.mantissa_bits))
    }

    fn walk_float(&mut self, log_mag: &mut f64) -> u64 {
        let step: f64 = self.rng.sample(StandardNormal);
        // log step in base 2 from the natural-log scale
        *log_mag = (*log_mag + step * self.spec.step_scale / std::f64::consts::LN_2).clamp(-900.0, 900.0);
        quantize(log_mag.exp2(), self.spec.mantissa_bits)
    }

    fn narrow(&mut self) -> u64 {
        self.rng.gen_range(0..1u64 << self.spec.narrow_width)
    }

    fn irregular(&mut self) -> u64 {
        let width = self.rng.gen_range(1..=32u32);
        self.rng.gen::<u32>() as u64 >> (32 - width)
    }

    fn initial_block(&mut self) -> BlockState {
        let mut st = BlockState {
            log_mag: [0.0; 8],
            words: [0; 8],
            valid_words: 8,
        };
        match self.spec.kind {
            WorkloadKind::Float64Walk | WorkloadKind::PartialValid => {
                if self.spec.kind == WorkloadKind::PartialValid {
                    st.valid_words = self
                        .rng
                        .gen_range(self.spec.valid_words_min..=self.spec.valid_words_max)
                        as usize;
                }
                for i in 0..8 {
                    let (l, w) = self.fresh_float();
                    st.log_mag[i] = l;
                    st.words[i] = w;
                }
            }
            WorkloadKind::NarrowInt32 => {
                for i in 0..8 {
                    st.words[i] = self.narrow() | self.narrow() << 32;
                }
            }
            WorkloadKind::Irregular => {
                for i in 0..8 {
                    st.words[i] = self.irregular() | self.irregular() << 32;
                }
            }
        }
        st
    }

    fn update_block(&mut self, st: &mut BlockState) {
        let fields = match self.spec.kind {
            WorkloadKind::Float64Walk | WorkloadKind::PartialValid => st.valid_words,
            WorkloadKind::NarrowInt32 | WorkloadKind::Irregular => 16,
        };
        let mut chosen: Vec<usize> = (0..fields)
            .filter(|_| self.rng.gen_bool(self.spec.update_prob))
            .collect();
        if chosen.is_empty() {
            chosen.push(self.rng.gen_range(0..fields));
        }
        for f in chosen {
            match self.spec.kind {
                WorkloadKind::Float64Walk | WorkloadKind::PartialValid => {
                    let mut l = st.log_mag[f];
                    st.words[f] = self.walk_float(&mut l);
                    st.log_mag[f] = l;
                }
                WorkloadKind::NarrowInt32 | WorkloadKind::Irregular => {
                    let v = if self.spec.kind == WorkloadKind::NarrowInt32 {
                        self.narrow()
                    } else {
                        self.irregular()
                    };
                    let shift = 32 * (f % 2);
                    let w = &mut st.words[f / 2];
                    *w = (*w & !(0xffff_ffffu64 << shift)) | v << shift;
                }
            }
        }
    }
}

impl Iterator for WorkloadGenerator {
    type Item = WriteRecord;

    fn next(&mut self) -> Option<WriteRecord> {
        if self.emitted >= self.spec.records {
            return None;
        }
        let index = if self.emitted < self.spec.blocks {
            self.emitted as usize
        } else {
            self.rng.gen_range(0..self.spec.blocks) as usize
        };
        let mut st = match self.blocks[index].take() {
            Some(mut st) => {
                self.update_block(&mut st);
                st
            }
            None => self.initial_block(),
        };
        let data = CacheBlock::from_words(st.words);
        st.words = *data.words();
        self.blocks[index] = Some(st);
        self.emitted += 1;
        Some(WriteRecord {
            addr: self.spec.base_addr + BLOCK_BYTES as u64 * index as u64,
            data,
        })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.spec.records - self.emitted) as usize;
        (left, Some(left))
    }
}

pub fn gen_workload(spec: WorkloadSpec, seed: u64) -> Result<WorkloadGenerator> {
    WorkloadGenerator::new(spec, seed)
}
