//! C ABI over `stt_ecc`.
//!
//! Every fallible function returns an [`SttStatus`]; on failure a message is
//! available from [`stt_last_error`] on the same thread. Blocks cross the
//! boundary as 64-byte buffers holding eight little-endian 64-bit words.
//! Schemes are passed as `uint32_t` values of [`SttScheme`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fs::File;
use std::io::BufReader;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use stt_ecc::fault::{monte_carlo_block, InjectionConfig};
use stt_ecc::mapping::{BitCoordinate, MappingScheme, SchemeKind, TransitionVector};
use stt_ecc::reliability::{self, DeviceParams, ErrorRateAccumulator, Grouping, SuccessProbability};
use stt_ecc::secded::{self, CheckBits, Codeword, DecodeOutcome};
use stt_ecc::trace::{TraceFormat, TraceReader};
use stt_ecc::{CacheBlock, Error};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SttStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    Io = 4,
    Parse = 5,
    Format = 6,
    Config = 7,
    Panic = 8,
}

#[repr(u32)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SttScheme {
    PerWord = 0,
    Interleaved = 1,
    Robin = 2,
}

#[repr(u32)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SttDecodeOutcome {
    NoError = 0,
    Corrected = 1,
    DetectedUncorrectable = 2,
}

#[repr(u32)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SttGrouping {
    AsPrinted = 0,
    Conventional = 1,
}

#[repr(u32)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SttTraceFormat {
    Jsonl = 0,
    Binary = 1,
}

/// Device parameters in SI units; `grouping` is an [`SttGrouping`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SttDeviceParams {
    pub t_write: f64,
    pub i_write: f64,
    pub i_c0: f64,
    pub polarization: f64,
    pub moment: f64,
    pub bohr_magneton: f64,
    pub delta: f64,
    pub euler_gamma: f64,
    pub electron_charge: f64,
    pub grouping: u32,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SttRates {
    pub writes: u64,
    pub rate: f64,
    pub optimal_rate: f64,
    pub integer_split_rate: f64,
    pub increase_pct: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SttEstimate {
    pub value: f64,
    pub std_error: f64,
    pub trials: u64,
}

/// Running error rates of all three schemes over a stream of block writes.
pub struct SttAnalyzer {
    pw: SuccessProbability,
    include_ecc: bool,
    schemes: [(MappingScheme, ErrorRateAccumulator); 3],
}

/// Streaming reader over a trace file.
pub struct SttTraceReader {
    inner: TraceReader<BufReader<File>>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(SttStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::InvalidScheme(_) | Error::InvalidCoordinate(_) | Error::InvalidParameters(_) => {
                SttStatus::InvalidArgument
            }
            Error::Domain(_) => SttStatus::Domain,
            Error::Config(_) => SttStatus::Config,
            Error::Format(_) => SttStatus::Format,
            Error::Parse { .. } => SttStatus::Parse,
            Error::Io { .. } => SttStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SttStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SttStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            SttStatus::Panic
        }
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(SttStatus::InvalidArgument, msg.into())
}

unsafe fn out<'a, T>(ptr: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    ptr.as_mut()
        .ok_or_else(|| Failure(SttStatus::NullPointer, format!("{name} is null")))
}

unsafe fn block(ptr: *const u8, name: &str) -> Result<CacheBlock, Failure> {
    if ptr.is_null() {
        return Err(Failure(SttStatus::NullPointer, format!("{name} is null")));
    }
    let bytes = &*(ptr as *const [u8; 64]);
    Ok(CacheBlock::from_bytes(bytes))
}

fn scheme(v: u32) -> Result<MappingScheme, Failure> {
    let kind = match v {
        0 => SchemeKind::PerWord,
        1 => SchemeKind::Interleaved,
        2 => SchemeKind::Robin,
        _ => return Err(invalid(format!("unknown scheme {v}"))),
    };
    Ok(MappingScheme::new(kind))
}

fn success(pw: f64) -> Result<SuccessProbability, Failure> {
    Ok(SuccessProbability::new(pw)?)
}

/// Message for the last failed call on this thread; empty if none. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn stt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Codeword index owning data bit (word, byte, pos).
/// # Safety
/// Pointer arguments must be null or point to memory valid for the
/// described reads and writes.
#[no_mangle]
pub unsafe extern "C" fn stt_map_bit(
    scheme_id: u32,
    word: u32,
    byte: u32,
    pos: u32,
    out_codeword: *mut u32,
) -> SttStatus {
    guard(|| {
        let s = scheme(scheme_id)?;
        let coord = BitCoordinate::new(word as usize, byte as usize, pos as usize)?;
        *out(out_codeword, "out_codeword")? = s.map_bit(coord) as u32;
        Ok(())
    })
}

/// Checks that the scheme is a bijective 8x64 partition; `out_balanced` is set
/// when every codeword holds one bit per byte and eight per word and position.
/// # Safety
/// Pointer arguments must be null or point to memory valid for the
/// described reads and writes.
#[no_mangle]
pub unsafe extern "C" fn stt_verify_partition(
    scheme_id: u32,
    out_valid: *mut bool,
    out_balanced: *mut bool,
) -> SttStatus {
    guard(|| {
        let report = scheme(scheme_id)?.verify_partition();
        *out(out_valid, "out_valid")? = report.is_valid();
        *out(out_balanced, "out_balanced")? = report.is_fully_balanced();
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn stt_secded_encode(data: u64) -> u8 {
    secded::encode(data).0
}

/// Decodes a stored codeword. On `STT_DECODE_OUTCOME_CORRECTED`,
/// `out_bit` is the flipped codeword bit (0..63 data, 64..71 check) and the
/// corrected codeword is written back; otherwise the input is copied through.
/// # Safety
/// Pointer arguments must be null or point to memory valid for the
/// described reads and writes.
#[no_mangle]
pub unsafe extern "C" fn stt_secded_decode(
    data: u64,
    check: u8,
    out_outcome: *mut SttDecodeOutcome,
    out_bit: *mut u32,
    out_data: *mut u64,
    out_check: *mut u8,
) -> SttStatus {
    guard(|| {
        let cw = Codeword {
            data,
            check: CheckBits(check),
        };
        let (outcome, bit, fixed) = match secded::decode(&cw) {
            DecodeOutcome::NoError => (SttDecodeOutcome::NoError, 0, cw),
            DecodeOutcome::Corrected(b) => (SttDecodeOutcome::Corrected, b as u32, cw.flipped(b as usize)),
            DecodeOutcome::DetectedUncorrectable => (SttDecodeOutcome::DetectedUncorrectable, 0, cw),
        };
        *out(out_outcome, "out_outcome")? = outcome;
        *out(out_bit, "out_bit")? = bit;
        *out(out_data, "out_data")? = fixed.data;
        *out(out_check, "out_check")? = fixed.check.0;
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn stt_device_params_default() -> SttDeviceParams {
    let d = DeviceParams::default();
    SttDeviceParams {
        t_write: d.t_write,
        i_write: d.i_write,
        i_c0: d.i_c0,
        polarization: d.polarization,
        moment: d.moment,
        bohr_magneton: d.bohr_magneton,
        delta: d.delta,
        euler_gamma: d.euler_gamma,
        electron_charge: d.electron_charge,
        grouping: SttGrouping::AsPrinted as u32,
    }
}

/// Per-cell write success probability of a device.
/// # Safety
/// Pointer arguments must be null or point to memory valid for the
/// described reads and writes.
#[no_mangle]
pub unsafe extern "C" fn stt_p_write(params: *const SttDeviceParams, out_pw: *mut f64) -> SttStatus {
    guard(|| {
        let p = params
            .as_ref()
            .ok_or_else(|| Failure(SttStatus::NullPointer, "params is null".into()))?;
        let grouping = match p.grouping {
            0 => Grouping::AsPrinted,
            1 => Grouping::Conventional,
            g => return Err(invalid(format!("unknown grouping {g}"))),
        };
        let d = DeviceParams {
            t_write: p.t_write,
            i_write: p.i_write,
            i_c0: p.i_c0,
            polarization: p.polarization,
            moment: p.moment,
            bohr_magneton: p.bohr_magneton,
            delta: p.delta,
            euler_gamma: p.euler_gamma,
            electron_charge: p.electron_charge,
            grouping,
        };
        *out(out_pw, "out_pw")? = reliability::p_write_from_device(&d)?.get();
        Ok(())
    })
}

/// Success probability of one codeword with `k` flips (`k` may be fractional).
/// # Safety
/// Pointer arguments must be null or point to memory valid for the
/// described reads and writes.
#[no_mangle]
pub unsafe extern "C" fn stt_p_codeword_success(k: f64, pw: f64, out_p: *mut f64) -> SttStatus {
    guard(|| {
        *out(out_p, "out_p")? = reliability::p_codeword_success(k, success(pw)?)?;
        Ok(())
    })
}

/// Block success probability for per-codeword flip counts `k[8]`.
/// # Safety
/// Pointer arguments must be null or point to memory valid for the
/// described reads and writes.
#[no_mangle]
pub unsafe extern "C" fn stt_p_block_success(k: *const u32, include_ecc: bool, pw: f64, out_p: *mut f64) -> SttStatus {
    guard(|| {
        if k.is_null() {
            return Err(Failure(SttStatus::NullPointer, "k is null".into()));
        }
        let counts = *(k as *const [u32; 8]);
        let tv = TransitionVector::new(counts, include_ecc)?;
        *out(out_p, "out_p")? = reliability::p_block_success(&tv, success(pw)?);
        Ok(())
    })
}

/// Block success with `total` flips spread as `total / 8` per codeword.
/// # Safety
/// Pointer arguments must be null or point to memory valid for the
/// described reads and writes.
#[no_mangle]
pub unsafe extern "C" fn stt_p_block_success_optimal(total: u32, pw: f64, out_p: *mut f64) -> SttStatus {
    guard(|| {
        *out(out_p, "out_p")? = reliability::p_block_success_optimal(total, success(pw)?);
        Ok(())
    })
}

/// Per-codeword flip counts of writing `new_block` over `old_block`.
/// # Safety
/// Pointer arguments must be null or point to memory valid for the
/// described reads and writes.
#[no_mangle]
pub unsafe extern "C" fn stt_transition_vector(
    scheme_id: u32,
    old_block: *const u8,
    new_block: *const u8,
    include_ecc: bool,
    out_k: *mut u32,
) -> SttStatus {
    guard(|| {
        let s = scheme(scheme_id)?;
        let tv = s.transition_vector(
            &block(old_block, "old_block")?,
            &block(new_block, "new_block")?,
            include_ecc,
        );
        let dst = out(out_k as *mut [u32; 8], "out_k")?;
        *dst = tv.k;
        Ok(())
    })
}

/// Monte Carlo estimate of the block write success probability.
/// # Safety
/// Pointer arguments must be null or point to memory valid for the
/// described reads and writes.
#[no_mangle]
pub unsafe extern "C" fn stt_monte_carlo_block(
    scheme_id: u32,
    old_block: *const u8,
    new_block: *const u8,
    pw: f64,
    trials: u64,
    seed: u64,
    include_ecc: bool,
    out_estimate: *mut SttEstimate,
) -> SttStatus {
    guard(|| {
        let cfg = InjectionConfig::new(success(pw)?, scheme(scheme_id)?, trials, seed, include_ecc)?;
        let e = monte_carlo_block(&block(old_block, "old_block")?, &block(new_block, "new_block")?, &cfg);
        *out(out_estimate, "out_estimate")? = SttEstimate {
            value: e.value,
            std_error: e.std_error,
            trials: e.trials,
        };
        Ok(())
    })
}

/// Creates an analyzer; free it with [`stt_analyzer_free`].
/// # Safety
/// Pointer arguments must be null or point to memory valid for the
/// described reads and writes.
#[no_mangle]
pub unsafe extern "C" fn stt_analyzer_new(
    pw: f64,
    include_ecc: bool,
    out_analyzer: *mut *mut SttAnalyzer,
) -> SttStatus {
    guard(|| {
        let slot = out(out_analyzer, "out_analyzer")?;
        let a = SttAnalyzer {
            pw: success(pw)?,
            include_ecc,
            schemes: SchemeKind::ALL.map(|k| (MappingScheme::new(k), ErrorRateAccumulator::default())),
        };
        *slot = Box::into_raw(Box::new(a));
        Ok(())
    })
}

/// Adds one block write to the analyzer.
/// # Safety
/// Pointer arguments must be null or point to memory valid for the
/// described reads and writes.
#[no_mangle]
pub unsafe extern "C" fn stt_analyzer_push(
    analyzer: *mut SttAnalyzer,
    old_block: *const u8,
    new_block: *const u8,
) -> SttStatus {
    guard(|| {
        let a = out(analyzer, "analyzer")?;
        let (old, new) = (block(old_block, "old_block")?, block(new_block, "new_block")?);
        for (s, acc) in &mut a.schemes {
            acc.push(&s.transition_vector(&old, &new, a.include_ecc), a.pw);
        }
        Ok(())
    })
}

/// Error rates for one scheme over the writes pushed so far.
/// # Safety
/// Pointer arguments must be null or point to memory valid for the
/// described reads and writes.
#[no_mangle]
pub unsafe extern "C" fn stt_analyzer_rates(
    analyzer: *const SttAnalyzer,
    scheme_id: u32,
    out_rates: *mut SttRates,
) -> SttStatus {
    guard(|| {
        let a = analyzer
            .as_ref()
            .ok_or_else(|| Failure(SttStatus::NullPointer, "analyzer is null".into()))?;
        let kind = scheme(scheme_id)?.kind();
        let (_, acc) = a
            .schemes
            .iter()
            .find(|(s, _)| s.kind() == kind)
            .expect("all schemes tracked");
        let r = acc.finish()?;
        *out(out_rates, "out_rates")? = SttRates {
            writes: r.writes,
            rate: r.rate,
            optimal_rate: r.optimal_rate,
            integer_split_rate: r.integer_split_rate,
            increase_pct: r.increase_pct(),
        };
        Ok(())
    })
}

/// Releases an analyzer. Null is ignored.
///
/// # Safety
/// `analyzer` must be null or a handle from [`stt_analyzer_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn stt_analyzer_free(analyzer: *mut SttAnalyzer) {
    if !analyzer.is_null() {
        drop(Box::from_raw(analyzer));
    }
}

/// Opens a trace file; `format` is an [`SttTraceFormat`]. Free the reader
/// with [`stt_trace_free`].
///
/// # Safety
/// `path` must be null or a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn stt_trace_open(
    path: *const c_char,
    format: u32,
    out_reader: *mut *mut SttTraceReader,
) -> SttStatus {
    guard(|| {
        let slot = out(out_reader, "out_reader")?;
        if path.is_null() {
            return Err(Failure(SttStatus::NullPointer, "path is null".into()));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| invalid("path is not UTF-8"))?;
        let format = match format {
            0 => TraceFormat::Jsonl,
            1 => TraceFormat::Binary,
            f => return Err(invalid(format!("unknown trace format {f}"))),
        };
        let inner = TraceReader::open(Path::new(path), format)?;
        *slot = Box::into_raw(Box::new(SttTraceReader { inner }));
        Ok(())
    })
}

/// Reads the next record into `out_addr` and the 64-byte `out_data`.
/// `out_has_record` is false at end of trace.
/// # Safety
/// Pointer arguments must be null or point to memory valid for the
/// described reads and writes.
#[no_mangle]
pub unsafe extern "C" fn stt_trace_next(
    reader: *mut SttTraceReader,
    out_addr: *mut u64,
    out_data: *mut u8,
    out_has_record: *mut bool,
) -> SttStatus {
    guard(|| {
        let r = out(reader, "reader")?;
        let has = out(out_has_record, "out_has_record")?;
        let addr = out(out_addr, "out_addr")?;
        let data = out(out_data as *mut [u8; 64], "out_data")?;
        match r.inner.next().transpose()? {
            Some(rec) => {
                *addr = rec.addr;
                *data = rec.data.to_bytes();
                *has = true;
            }
            None => *has = false,
        }
        Ok(())
    })
}

/// Releases a trace reader. Null is ignored.
///
/// # Safety
/// `reader` must be null or a handle from [`stt_trace_open`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn stt_trace_free(reader: *mut SttTraceReader) {
    if !reader.is_null() {
        drop(Box::from_raw(reader));
    }
}
