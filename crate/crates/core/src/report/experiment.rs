use rayon::prelude::*;

use super::config::{ExperimentConfig, InputSource};
use crate::analysis::{BitHistogram, CodewordStats, CodewordStatsAccumulator};
use crate::error::{Error, Result};
use crate::fault::{Estimate, FailureTally, WritePlan};
use crate::mapping::{MappingScheme, SchemeKind, TransitionVector};
use crate::reliability::{ErrorRateAccumulator, SuccessProbability, TraceErrorRate};
use crate::trace::{old_new_pairs, BlockWrite, ShadowStore, TraceReader, WriteRecord};
use crate::workload::gen_workload;

const CHUNK: usize = 4096;

#[derive(Clone, Debug, PartialEq)]
pub struct SchemeReport {
    pub scheme: SchemeKind,
    pub rates: TraceErrorRate,
    /// Analytic rate over the `K/8` bound, in percent.
    pub increase_pct: f64,
    /// `None` when no write had any transition.
    pub stats: Option<CodewordStats>,
    /// Estimated block error rate.
    pub monte_carlo: Option<Estimate>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportBundle {
    pub writes: u64,
    pub pw: SuccessProbability,
    pub include_ecc: bool,
    pub schemes: Vec<SchemeReport>,
    pub histogram: BitHistogram,
}

impl ReportBundle {
    pub fn scheme(&self, kind: SchemeKind) -> Option<&SchemeReport> {
        self.schemes.iter().find(|s| s.scheme == kind)
    }
}

struct SchemeState {
    scheme: MappingScheme,
    rates: ErrorRateAccumulator,
    stats: CodewordStatsAccumulator,
    mc: FailureTally,
}

/// Replays the configured input once, evaluating every scheme on each write.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ReportBundle> {
    let pw = cfg.pw.resolve()?;
    let records: Box<dyn Iterator<Item = Result<WriteRecord>>> = match &cfg.input {
        InputSource::Trace { path, format } => Box::new(TraceReader::open(path, *format)?),
        InputSource::Workload { spec, seed } => Box::new(gen_workload(*spec, *seed)?.map(Ok)),
    };
    let mut pairs = old_new_pairs(records, ShadowStore::new(), cfg.warmup);

    let mut states: Vec<SchemeState> = cfg
        .schemes
        .iter()
        .map(|&k| SchemeState {
            scheme: MappingScheme::new(k),
            rates: ErrorRateAccumulator::default(),
            stats: CodewordStatsAccumulator::default(),
            mc: FailureTally::default(),
        })
        .collect();
    let mut histogram = BitHistogram::default();
    let mut writes = 0u64;
    let mut chunk: Vec<BlockWrite> = Vec::with_capacity(CHUNK);

    loop {
        chunk.clear();
        for p in pairs.by_ref().take(CHUNK) {
            chunk.push(p?);
        }
        if chunk.is_empty() {
            break;
        }
        for p in &chunk {
            histogram.push(&p.old, &p.new);
        }
        for st in states.iter_mut() {
            let scheme = st.scheme;
            let tvs: Vec<TransitionVector> = chunk
                .par_iter()
                .map(|p| scheme.transition_vector(&p.old, &p.new, cfg.include_ecc))
                .collect();
            for tv in &tvs {
                st.rates.push(tv, pw);
                st.stats.push(tv);
            }
            if cfg.monte_carlo.enabled {
                let trials = cfg.monte_carlo.trials;
                let seed = cfg.monte_carlo.seed;
                let ok: Vec<u64> = chunk
                    .par_iter()
                    .enumerate()
                    .map(|(i, p)| {
                        WritePlan::new(&p.old, &p.new, &scheme, cfg.include_ecc).count_successes(
                            pw,
                            seed,
                            writes + i as u64,
                            trials,
                        )
                    })
                    .collect();
                for ok in ok {
                    st.mc.push(trials - ok, trials);
                }
            }
        }
        writes += chunk.len() as u64;
    }

    if writes == 0 {
        return Err(Error::Domain("input produced no writes after warm-up".into()));
    }

    let schemes = states
        .into_iter()
        .map(|st| {
            let rates = st.rates.finish()?;
            Ok(SchemeReport {
                scheme: st.scheme.kind(),
                increase_pct: rates.increase_pct(),
                rates,
                stats: st.stats.finish(),
                monte_carlo: if cfg.monte_carlo.enabled {
                    Some(st.mc.finish()?)
                } else {
                    None
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ReportBundle {
        writes,
        pw,
        include_ecc: cfg.include_ecc,
        schemes,
        histogram,
    })
}
