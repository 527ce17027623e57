//! Closed-form write-failure probabilities for SEC-DED protected blocks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mapping::{TransitionVector, CODEWORDS};

pub const BOHR_MAGNETON: f64 = 9.274_010_078_3e-24;
pub const ELECTRON_CHARGE: f64 = 1.602_176_634e-19;
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Per-bit failure probability of the default operating point.
pub const DEFAULT_BIT_FAILURE: f64 = 1e-3;

/// How the denominator of the switching-rate expression is grouped.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Grouping {
    /// `c + ln(pi^2 Delta / 4) * (e m (1 + p^2))`, literally.
    #[default]
    AsPrinted,
    /// `(c + ln(pi^2 Delta / 4)) * (e m (1 + p^2))`, the dimensionally
    /// consistent reading.
    Conventional,
}

/// Device constants and operating point of an STT-MRAM cell.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviceParams {
    /// Write pulse width (s).
    pub t_write: f64,
    /// Write current (A).
    pub i_write: f64,
    /// Critical switching current (A).
    pub i_c0: f64,
    /// Tunneling spin polarization.
    pub polarization: f64,
    /// Magnetic moment of the free layer (J/T).
    pub moment: f64,
    pub bohr_magneton: f64,
    /// Thermal stability factor.
    pub delta: f64,
    pub euler_gamma: f64,
    pub electron_charge: f64,
    #[serde(default)]
    pub grouping: Grouping,
}

impl Default for DeviceParams {
    fn default() -> Self {
        DeviceParams {
            t_write: 10e-9,
            i_write: 150e-6,
            i_c0: 100e-6,
            polarization: 0.6,
            moment: 1.0e-18,
            bohr_magneton: BOHR_MAGNETON,
            delta: 60.0,
            euler_gamma: EULER_GAMMA,
            electron_charge: ELECTRON_CHARGE,
            grouping: Grouping::AsPrinted,
        }
    }
}

impl DeviceParams {
    fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameters(what.to_string()));
        let all = [
            self.t_write,
            self.i_write,
            self.i_c0,
            self.polarization,
            self.moment,
            self.bohr_magneton,
            self.delta,
            self.euler_gamma,
            self.electron_charge,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return bad("non-finite parameter");
        }
        if self.t_write <= 0.0 {
            return bad("t_write must be positive");
        }
        if self.delta <= 0.0 {
            return bad("delta must be positive");
        }
        if !(self.polarization > 0.0 && self.polarization < 1.0) {
            return bad("polarization must lie in (0, 1)");
        }
        if self.i_write < self.i_c0 {
            return bad("i_write below the critical current");
        }
        Ok(())
    }

    /// Exponent `x` of `P_fail = exp(-x)`.
    pub fn failure_exponent(&self) -> Result<f64> {
        self.validate()?;
        let p = self.polarization;
        let thermal = (std::f64::consts::PI.powi(2) * self.delta / 4.0).ln();
        let em = self.electron_charge * self.moment * (1.0 + p * p);
        let denominator = match self.grouping {
            Grouping::AsPrinted => self.euler_gamma + thermal * em,
            Grouping::Conventional => (self.euler_gamma + thermal) * em,
        };
        if !(denominator.is_finite() && denominator > 0.0) {
            return Err(Error::InvalidParameters(format!(
                "denominator {denominator} is not positive"
            )));
        }
        let x = self.t_write * 2.0 * self.bohr_magneton * p * (self.i_write - self.i_c0) / denominator;
        if !x.is_finite() {
            return Err(Error::InvalidParameters("exponent overflow".into()));
        }
        Ok(x)
    }
}

/// Probability that a single cell completes a required transition.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct SuccessProbability(f64);

impl SuccessProbability {
    pub fn new(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("probability {p} outside [0, 1]")));
        }
        Ok(SuccessProbability(p))
    }

    pub fn from_failure(q: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::Domain(format!("probability {q} outside [0, 1]")));
        }
        Ok(SuccessProbability(1.0 - q))
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn failure(self) -> f64 {
        1.0 - self.0
    }
}

impl Default for SuccessProbability {
    fn default() -> Self {
        SuccessProbability(1.0 - DEFAULT_BIT_FAILURE)
    }
}

pub fn p_write_from_device(params: &DeviceParams) -> Result<SuccessProbability> {
    let x = params.failure_exponent()?;
    // 1 - exp(-x) without cancellation for tiny x
    Ok(SuccessProbability((-(-x).exp_m1()).clamp(0.0, 1.0)))
}

/// Probability that a codeword with `k` required flips is written correctly
/// by a single-error-correcting code. `k` may be fractional (used by the
/// uniform bound); results are clamped to `[0, 1]`.
pub fn p_codeword_success(k: f64, pw: SuccessProbability) -> Result<f64> {
    if k.is_nan() || k < 0.0 {
        return Err(Error::Domain(format!("flip count {k} is negative")));
    }
    Ok(codeword_success(k, pw.0))
}

fn codeword_success(k: f64, p: f64) -> f64 {
    if k == 0.0 || p == 1.0 {
        return 1.0;
    }
    if p == 0.0 {
        return if k <= 1.0 { 1.0 } else { 0.0 };
    }
    let v = p.powf(k - 1.0) * (p + k * (1.0 - p));
    v.clamp(0.0, 1.0)
}

pub fn p_block_success(tv: &TransitionVector, pw: SuccessProbability) -> f64 {
    tv.k.iter().map(|&k| codeword_success(k as f64, pw.0)).product()
}

/// Upper bound on block success for `total` flips spread evenly as `total/8`
/// per codeword.
pub fn p_block_success_optimal(total: u32, pw: SuccessProbability) -> f64 {
    codeword_success(total as f64 / CODEWORDS as f64, pw.0).powi(CODEWORDS as i32)
}

/// Block success for the most even integer split of `total` flips.
pub fn p_block_success_integer_split(total: u32, pw: SuccessProbability) -> f64 {
    let q = total / CODEWORDS as u32;
    let r = (total % CODEWORDS as u32) as i32;
    codeword_success(q as f64 + 1.0, pw.0).powi(r) * codeword_success(q as f64, pw.0).powi(CODEWORDS as i32 - r)
}

/// Mergeable running sums of per-write failure probabilities.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ErrorRateAccumulator {
    pub writes: u64,
    pub failure_sum: f64,
    pub optimal_sum: f64,
    pub integer_split_sum: f64,
}

impl ErrorRateAccumulator {
    pub fn push(&mut self, tv: &TransitionVector, pw: SuccessProbability) {
        let total = tv.total();
        self.writes += 1;
        if total == 0 {
            return;
        }
        self.failure_sum += 1.0 - p_block_success(tv, pw);
        self.optimal_sum += 1.0 - p_block_success_optimal(total, pw);
        self.integer_split_sum += 1.0 - p_block_success_integer_split(total, pw);
    }

    pub fn merge(&mut self, other: &ErrorRateAccumulator) {
        self.writes += other.writes;
        self.failure_sum += other.failure_sum;
        self.optimal_sum += other.optimal_sum;
        self.integer_split_sum += other.integer_split_sum;
    }

    pub fn finish(&self) -> Result<TraceErrorRate> {
        if self.writes == 0 {
            return Err(Error::Domain("empty write stream".into()));
        }
        let n = self.writes as f64;
        Ok(TraceErrorRate {
            writes: self.writes,
            rate: self.failure_sum / n,
            optimal_rate: self.optimal_sum / n,
            integer_split_rate: self.integer_split_sum / n,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceErrorRate {
    pub writes: u64,
    /// Mean per-write block failure probability.
    pub rate: f64,
    /// Same mean with every write's flips spread as `K/8` per codeword.
    pub optimal_rate: f64,
    /// Same mean with the most even integer split.
    pub integer_split_rate: f64,
}

impl TraceErrorRate {
    pub fn increase_pct(&self) -> f64 {
        normalized_increase(self.rate, self.optimal_rate)
    }
}

pub fn trace_error_rate<'a, I>(tvs: I, pw: SuccessProbability) -> Result<TraceErrorRate>
where
    I: IntoIterator<Item = &'a TransitionVector>,
{
    let mut acc = ErrorRateAccumulator::default();
    for tv in tvs {
        acc.push(tv, pw);
    }
    acc.finish()
}

/// Percent by which `rate` exceeds `optimal_rate`. Zero over zero is 0 %,
/// anything positive over zero is infinite.
pub fn normalized_increase(rate: f64, optimal_rate: f64) -> f64 {
    if optimal_rate > 0.0 {
        (rate / optimal_rate - 1.0) * 100.0
    } else if rate > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pw(p: f64) -> SuccessProbability {
        SuccessProbability::new(p).unwrap()
    }

    fn tv(k: [u32; 8]) -> TransitionVector {
        TransitionVector::new(k, false).unwrap()
    }

    #[test]
    fn codeword_examples() {
        for p in [0.0, 0.3, 0.9, 1.0] {
            assert_eq!(p_codeword_success(0.0, pw(p)).unwrap(), 1.0);
            assert!((p_codeword_success(1.0, pw(p)).unwrap() - 1.0).abs() < 1e-15);
        }
        assert!((p_codeword_success(2.0, pw(0.9)).unwrap() - 0.99).abs() < 1e-12);
        assert!(p_codeword_success(-1.0, pw(0.9)).is_err());
    }

    #[test]
    fn block_examples() {
        assert_eq!(p_block_success(&tv([0; 8]), pw(0.9)), 1.0);
        assert!((p_block_success(&tv([2, 0, 0, 0, 0, 0, 0, 0]), pw(0.9)) - 0.99).abs() < 1e-12);
        let uniform = p_block_success(&tv([2; 8]), pw(0.9));
        assert!((uniform - 0.922_744_694_427_920_1).abs() < 1e-12);
        assert!((p_block_success_optimal(16, pw(0.9)) - uniform).abs() < 1e-12);
        assert_eq!(p_block_success_optimal(0, pw(0.9)), 1.0);
        for p in [0.1, 0.5, 0.9] {
            assert!((p_block_success_optimal(8, pw(p)) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn integer_split_matches_real_bound_on_multiples_of_eight() {
        for k in [0, 8, 16, 64, 512] {
            let a = p_block_success_optimal(k, pw(0.99));
            let b = p_block_success_integer_split(k, pw(0.99));
            assert!((a - b).abs() < 1e-12);
        }
        // 17 = 3 + 2 * 7
        let b = p_block_success_integer_split(17, pw(0.9));
        let expect = 0.9f64.powi(2) * (0.9 + 3.0 * 0.1) * 0.99f64.powi(7);
        assert!((b - expect).abs() < 1e-12);
    }

    #[test]
    fn trace_rate_examples() {
        assert!(trace_error_rate(&[], pw(0.9)).is_err());
        let r = trace_error_rate(&[tv([0; 8]), tv([0; 8])], pw(0.9)).unwrap();
        assert_eq!(r.rate, 0.0);
        assert_eq!(r.increase_pct(), 0.0);
        let r = trace_error_rate(&[tv([2, 0, 0, 0, 0, 0, 0, 0])], pw(0.9)).unwrap();
        assert!((r.rate - 0.01).abs() < 1e-12);
        let r = trace_error_rate(&[tv([3; 8]), tv([5; 8])], pw(0.99)).unwrap();
        assert!(r.increase_pct().abs() < 1e-9);
    }

    #[test]
    fn normalized_increase_cases() {
        assert_eq!(normalized_increase(0.5, 0.5), 0.0);
        assert!((normalized_increase(0.2, 0.1) - 100.0).abs() < 1e-12);
        assert_eq!(normalized_increase(0.0, 0.0), 0.0);
        assert_eq!(normalized_increase(0.1, 0.0), f64::INFINITY);
    }

    #[test]
    fn device_formula_edges() {
        let mut d = DeviceParams {
            i_write: 100e-6,
            ..Default::default()
        };
        assert_eq!(p_write_from_device(&d).unwrap().get(), 0.0);
        d.i_write = 99e-6;
        assert!(p_write_from_device(&d).is_err());
        d.i_write = 150e-6;
        d.polarization = 1.5;
        assert!(p_write_from_device(&d).is_err());
        let d = DeviceParams {
            grouping: Grouping::Conventional,
            t_write: 1e3,
            ..Default::default()
        };
        assert_eq!(p_write_from_device(&d).unwrap().get(), 1.0);
    }

    #[test]
    fn device_formula_matches_transcription() {
        // Frozen from a standalone evaluation of the expression (mpmath, 30 digits).
        let d = DeviceParams::default();
        let x = d.failure_exponent().unwrap();
        assert!((x / 9.640_081_490_042_774e-36 - 1.0).abs() < 1e-9, "{x:e}");
        let d = DeviceParams {
            grouping: Grouping::Conventional,
            ..Default::default()
        };
        let p = p_write_from_device(&d).unwrap().get();
        assert!((p - 0.989_753_810_446_938_9).abs() < 1e-9, "{p}");
    }
}
