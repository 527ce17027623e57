use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stt_ecc::mapping::{MappingScheme, SchemeKind};
use stt_ecc::report::{self, ExperimentConfig};
use stt_ecc::secded;
use stt_ecc::trace::{self, TraceFormat};
use stt_ecc::workload::{gen_workload, WorkloadKind, WorkloadSpec};
use stt_ecc::Error;

const EXIT_CONFIG: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_SELFTEST: u8 = 3;

/// Write-failure reliability of ECC codeword layouts in STT-MRAM caches
#[derive(Parser)]
#[command(name = "stt-ecc", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write CSV and SVG reports
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the output directory of the config file
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic write trace
    Gen {
        #[arg(long)]
        kind: WorkloadKind,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Trace format; inferred from the file extension by default
        #[arg(long)]
        format: Option<TraceFormat>,
        /// Number of distinct blocks written
        #[arg(long)]
        blocks: Option<u64>,
    },
    /// Check that a scheme partitions the block into eight 64-bit codewords
    VerifyPartition {
        #[arg(long)]
        scheme: SchemeKind,
    },
    /// Exhaustive single- and double-error sweeps of the SEC-DED codec
    CodecSelftest {
        #[arg(long, default_value_t = 100)]
        words: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn exit_for(e: &Error) -> u8 {
    if matches!(e, Error::Io { .. } | Error::Parse { .. } | Error::Format(_)) {
        EXIT_IO
    } else {
        EXIT_CONFIG
    }
}

fn run(config: PathBuf, out: Option<PathBuf>) -> Result<(), Error> {
    let mut cfg = ExperimentConfig::load(&config)?;
    if let Some(out) = out {
        cfg.out_dir = out;
    }
    let bundle = report::run_experiment(&cfg)?;
    let mut files = report::emit_csv(&bundle, &cfg.out_dir)?;
    files.extend(report::emit_svg(&bundle, &cfg.out_dir)?);

    println!(
        "writes: {}  pw: {}  include_ecc: {}",
        bundle.writes,
        bundle.pw.get(),
        bundle.include_ecc
    );
    println!(
        "{:<12} {:>14} {:>14} {:>12} {:>14}",
        "scheme", "error rate", "uniform bound", "increase %", "monte carlo"
    );
    for s in &bundle.schemes {
        let mc = s
            .monte_carlo
            .map(|e| {
                format!(
                    "{} ± {}",
                    report::format_sig6(e.value),
                    report::format_sig6(e.std_error)
                )
            })
            .unwrap_or_else(|| "-".into());
        println!(
            "{:<12} {:>14} {:>14} {:>12} {:>14}",
            s.scheme.name(),
            report::format_sig6(s.rates.rate),
            report::format_sig6(s.rates.optimal_rate),
            report::format_sig6(s.increase_pct),
            mc
        );
    }
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn gen(
    kind: WorkloadKind,
    n: u64,
    seed: u64,
    out: PathBuf,
    format: Option<TraceFormat>,
    blocks: Option<u64>,
) -> Result<(), Error> {
    let mut spec = WorkloadSpec::new(kind, n);
    if let Some(b) = blocks {
        spec.blocks = b;
    }
    let records: Vec<_> = gen_workload(spec, seed)?.collect();
    let format = format.unwrap_or_else(|| TraceFormat::from_path(&out));
    trace::write_trace(&out, format, &records)?;
    println!("wrote {} {format} records to {}", records.len(), out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Run { config, out } => run(config, out),
        Command::Gen {
            kind,
            n,
            seed,
            out,
            format,
            blocks,
        } => gen(kind, n, seed, out, format, blocks),
        Command::VerifyPartition { scheme } => {
            let report = MappingScheme::new(scheme).verify_partition();
            print!("{report}");
            let ok = report.is_valid() && (scheme != SchemeKind::Robin || report.is_fully_balanced());
            return if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_SELFTEST)
            };
        }
        Command::CodecSelftest { words, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let data: Vec<u64> = (0..words).map(|_| rng.gen()).collect();
            let r = secded::exhaustive_sweep(&data);
            println!("datawords: {}", r.datawords);
            println!("single flips corrected: {}/{}", r.single_corrected, r.single_total);
            println!(
                "double flips detected: {}/{} (miscorrected: {})",
                r.double_detected, r.double_total, r.double_miscorrected
            );
            println!("{}", if r.passed() { "PASS" } else { "FAIL" });
            return if r.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_SELFTEST)
            };
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}
