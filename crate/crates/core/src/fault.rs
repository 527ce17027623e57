//! Monte Carlo injection of stochastic write failures.
//!
//! Only cells whose value must change can fail, each independently with
//! probability `1 - pw`; a failed cell keeps its old value. A block write
//! succeeds when no codeword collects more than one failure.
//!
//! Every trial draws from its own ChaCha8 stream seeded by
//! `mix(mix(seed, record), trial)`, so estimates do not depend on how records
//! or trials are scheduled across threads.

use rand::distributions::{Bernoulli, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::block::CacheBlock;
use crate::error::{Error, Result};
use crate::mapping::{MappingScheme, CODEWORDS};
use crate::reliability::{DeviceParams, SuccessProbability};
use crate::secded::{self, CheckBits, Codeword, DecodeOutcome};

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the seed of substream `index` from `seed`.
pub fn mix(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index))
}

pub fn trial_rng(seed: u64, record: u64, trial: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(mix(seed, record), trial))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InjectionConfig {
    pub pw: SuccessProbability,
    pub scheme: MappingScheme,
    pub trials: u64,
    pub seed: u64,
    pub include_ecc: bool,
}

impl InjectionConfig {
    pub fn new(
        pw: SuccessProbability,
        scheme: MappingScheme,
        trials: u64,
        seed: u64,
        include_ecc: bool,
    ) -> Result<Self> {
        if trials == 0 {
            return Err(Error::Config("Monte Carlo needs at least one trial".into()));
        }
        Ok(InjectionConfig {
            pw,
            scheme,
            trials,
            seed,
            include_ecc,
        })
    }

    pub fn from_device(
        device: &DeviceParams,
        scheme: MappingScheme,
        trials: u64,
        seed: u64,
        include_ecc: bool,
    ) -> Result<Self> {
        let pw = crate::reliability::p_write_from_device(device)?;
        Self::new(pw, scheme, trials, seed, include_ecc)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WriteOutcome {
    /// Data as stored; failed cells hold their old value.
    pub written: CacheBlock,
    /// Check bits as stored, when check-bit cells were simulated.
    pub written_check: Option<[CheckBits; CODEWORDS]>,
    pub failures_per_codeword: [u32; CODEWORDS],
    pub block_ok: bool,
}

/// A cell that must flip during a write.
#[derive(Clone, Copy, Debug)]
enum Cell {
    Data { flat: u16, codeword: u8 },
    Check { bit: u8, codeword: u8 },
}

impl Cell {
    fn codeword(self) -> usize {
        match self {
            Cell::Data { codeword, .. } | Cell::Check { codeword, .. } => codeword as usize,
        }
    }
}

/// The transitioning cells of one (old, new) write, computed once and reused
/// across trials.
#[derive(Clone, Debug)]
pub struct WritePlan {
    new: CacheBlock,
    old_check: [CheckBits; CODEWORDS],
    new_check: [CheckBits; CODEWORDS],
    include_ecc: bool,
    cells: Vec<Cell>,
}

impl WritePlan {
    pub fn new(old: &CacheBlock, new: &CacheBlock, scheme: &MappingScheme, include_ecc: bool) -> Self {
        let mut cells: Vec<Cell> = old
            .xor(new)
            .ones()
            .map(|flat| Cell::Data {
                flat: flat as u16,
                codeword: scheme.map_flat(flat) as u8,
            })
            .collect();
        let mut old_check = [CheckBits::default(); CODEWORDS];
        let mut new_check = [CheckBits::default(); CODEWORDS];
        if include_ecc {
            for n in 0..CODEWORDS {
                old_check[n] = secded::encode(scheme.gather(old, n));
                new_check[n] = secded::encode(scheme.gather(new, n));
                let d = old_check[n].0 ^ new_check[n].0;
                for bit in 0..secded::CHECK_BITS as u8 {
                    if d >> bit & 1 == 1 {
                        cells.push(Cell::Check { bit, codeword: n as u8 });
                    }
                }
            }
        }
        WritePlan {
            new: *new,
            old_check,
            new_check,
            include_ecc,
            cells,
        }
    }

    pub fn transitions(&self) -> usize {
        self.cells.len()
    }

    fn apply<R: Rng>(&self, fail: &Bernoulli, rng: &mut R) -> WriteOutcome {
        let mut written = self.new;
        let mut check = self.new_check;
        let mut failures = [0u32; CODEWORDS];
        for &cell in &self.cells {
            if fail.sample(rng) {
                failures[cell.codeword()] += 1;
                match cell {
                    Cell::Data { flat, .. } => written.flip_bit(flat as usize),
                    Cell::Check { bit, codeword } => check[codeword as usize].0 ^= 1 << bit,
                }
            }
        }
        WriteOutcome {
            written,
            written_check: self.include_ecc.then_some(check),
            failures_per_codeword: failures,
            block_ok: failures.iter().all(|&f| f <= 1),
        }
    }

    /// Same draws as [`WritePlan::apply`] but stops at the first codeword that
    /// collects a second failure.
    fn trial_ok<R: Rng>(&self, fail: &Bernoulli, rng: &mut R) -> bool {
        let mut failures = [0u8; CODEWORDS];
        for &cell in &self.cells {
            if fail.sample(rng) {
                let f = &mut failures[cell.codeword()];
                *f += 1;
                if *f > 1 {
                    return false;
                }
            }
        }
        true
    }

    /// Number of successful trials among `trials` for substream `record`.
    pub fn count_successes(&self, pw: SuccessProbability, seed: u64, record: u64, trials: u64) -> u64 {
        if self.cells.is_empty() {
            return trials;
        }
        let fail = failure_distribution(pw);
        (0..trials)
            .into_par_iter()
            .filter(|&t| self.trial_ok(&fail, &mut trial_rng(seed, record, t)))
            .count() as u64
    }

    pub fn old_check(&self) -> &[CheckBits; CODEWORDS] {
        &self.old_check
    }
}

fn failure_distribution(pw: SuccessProbability) -> Bernoulli {
    Bernoulli::new(pw.failure().clamp(0.0, 1.0)).expect("probability in [0, 1]")
}

pub fn inject_write<R: Rng>(old: &CacheBlock, new: &CacheBlock, cfg: &InjectionConfig, rng: &mut R) -> WriteOutcome {
    WritePlan::new(old, new, &cfg.scheme, cfg.include_ecc).apply(&failure_distribution(cfg.pw), rng)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub trials: u64,
}

/// Success probability of one block write, estimated over `cfg.trials` trials.
pub fn monte_carlo_block(old: &CacheBlock, new: &CacheBlock, cfg: &InjectionConfig) -> Estimate {
    monte_carlo_record(old, new, cfg, 0)
}

/// As [`monte_carlo_block`], drawing from the substream of `record`.
pub fn monte_carlo_record(old: &CacheBlock, new: &CacheBlock, cfg: &InjectionConfig, record: u64) -> Estimate {
    let plan = WritePlan::new(old, new, &cfg.scheme, cfg.include_ecc);
    let ok = plan.count_successes(cfg.pw, cfg.seed, record, cfg.trials);
    let q = ok as f64 / cfg.trials as f64;
    Estimate {
        value: q,
        std_error: (q * (1.0 - q) / cfg.trials as f64).sqrt(),
        trials: cfg.trials,
    }
}

/// Mergeable per-record Monte Carlo tallies; the error rate is the mean of
/// per-record failure fractions.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FailureTally {
    pub records: u64,
    pub trials_per_record: u64,
    pub failures: u64,
    /// Sum over records of `f (1 - f)` for failure fraction `f`.
    pub variance_sum: f64,
}

impl FailureTally {
    pub fn push(&mut self, failures: u64, trials: u64) {
        debug_assert!(self.records == 0 || self.trials_per_record == trials);
        self.trials_per_record = trials;
        self.records += 1;
        self.failures += failures;
        let f = failures as f64 / trials as f64;
        self.variance_sum += f * (1.0 - f);
    }

    pub fn merge(&mut self, other: &FailureTally) {
        if self.records == 0 {
            self.trials_per_record = other.trials_per_record;
        }
        self.records += other.records;
        self.failures += other.failures;
        self.variance_sum += other.variance_sum;
    }

    pub fn finish(&self) -> Result<Estimate> {
        if self.records == 0 {
            return Err(Error::Domain("empty write stream".into()));
        }
        let n = self.records as f64;
        let t = self.trials_per_record as f64;
        Ok(Estimate {
            value: self.failures as f64 / (n * t),
            std_error: (self.variance_sum / t).sqrt() / n,
            trials: self.records * self.trials_per_record,
        })
    }
}

/// Block error rate of a write stream: mean failure fraction over records,
/// `cfg.trials` trials each.
pub fn monte_carlo_trace<'a, I>(pairs: I, cfg: &InjectionConfig) -> Result<Estimate>
where
    I: IntoIterator<Item = (&'a CacheBlock, &'a CacheBlock)>,
{
    let mut tally = FailureTally::default();
    for (record, (old, new)) in pairs.into_iter().enumerate() {
        let plan = WritePlan::new(old, new, &cfg.scheme, cfg.include_ecc);
        let ok = plan.count_successes(cfg.pw, cfg.seed, record as u64, cfg.trials);
        tally.push(cfg.trials - ok, cfg.trials);
    }
    tally.finish()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EndToEndReport {
    /// Decoder and failure-count rule agree on every codeword with at most
    /// two failures.
    pub agreement: bool,
    pub checked_codewords: usize,
    /// Codewords with three or more failures where the decoder disagreed with
    /// the count rule.
    pub aliased: usize,
}

/// Decodes every stored codeword of `outcome` and compares recoverability with
/// the failure-count rule. Requires simulated check bits.
pub fn end_to_end_check(outcome: &WriteOutcome, new: &CacheBlock, scheme: &MappingScheme) -> Result<EndToEndReport> {
    let check = outcome
        .written_check
        .ok_or_else(|| Error::Config("end-to-end check needs check-bit simulation".into()))?;
    let mut report = EndToEndReport {
        agreement: true,
        ..Default::default()
    };
    for (n, &stored_check) in check.iter().enumerate() {
        let stored = Codeword {
            data: scheme.gather(&outcome.written, n),
            check: stored_check,
        };
        let intended = Codeword::new(scheme.gather(new, n));
        let failures = outcome.failures_per_codeword[n];
        let decoded = secded::decode(&stored);
        let recoverable = secded::correct(&stored) == Some(intended);
        let count_ok = failures <= 1;
        let consistent = match failures {
            0 => decoded == DecodeOutcome::NoError && recoverable,
            1 => matches!(decoded, DecodeOutcome::Corrected(_)) && recoverable,
            2 => decoded == DecodeOutcome::DetectedUncorrectable,
            _ => recoverable == count_ok,
        };
        if failures <= 2 {
            report.checked_codewords += 1;
            report.agreement &= consistent;
        } else if !consistent {
            report.aliased += 1;
        }
    }
    Ok(report)
}
