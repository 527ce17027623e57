use proptest::prelude::*;
use stt_ecc::mapping::TransitionVector;
use stt_ecc::reliability::{
    normalized_increase, p_block_success, p_block_success_integer_split, p_block_success_optimal, p_codeword_success,
    p_write_from_device, trace_error_rate, DeviceParams, Grouping, SuccessProbability,
};

fn pw(p: f64) -> SuccessProbability {
    SuccessProbability::new(p).unwrap()
}

/// Binomial success of a codeword: no failures or exactly one.
fn reference_codeword(k: u32, p: f64) -> f64 {
    let q = 1.0 - p;
    p.powi(k as i32) + k as f64 * p.powi(k as i32 - 1) * q
}

fn compositions(total: u32, parts: usize, cap: u32, prefix: &mut Vec<u32>, out: &mut dyn FnMut(&[u32])) {
    if parts == 1 {
        if total <= cap {
            prefix.push(total);
            out(prefix);
            prefix.pop();
        }
        return;
    }
    for first in 0..=total.min(cap) {
        prefix.push(first);
        compositions(total - first, parts - 1, cap, prefix, out);
        prefix.pop();
    }
}

#[test]
fn codeword_success_matches_binomial() {
    for p in [0.5, 0.9, 0.99, 0.999, 1.0] {
        for k in 0..=72 {
            let got = p_codeword_success(k as f64, pw(p)).unwrap();
            assert!((got - reference_codeword(k, p)).abs() < 1e-12, "k={k} p={p}");
        }
    }
    assert_eq!(p_codeword_success(0.0, pw(0.3)).unwrap(), 1.0);
    assert_eq!(p_codeword_success(1.0, pw(0.3)).unwrap(), 1.0);
}

#[test]
fn uniform_split_is_optimal_for_small_totals() {
    for p in [0.9, 0.99, 0.999] {
        for total in 0..=16 {
            let bound = p_block_success_optimal(total, pw(p));
            let split = p_block_success_integer_split(total, pw(p));
            let mut best = 0.0f64;
            compositions(total, 8, 64, &mut Vec::new(), &mut |k| {
                let tv = TransitionVector::new(k.try_into().unwrap(), false).unwrap();
                let s = p_block_success(&tv, pw(p));
                assert!(s <= bound + 1e-15, "{k:?} beats the bound at p={p}");
                best = best.max(s);
            });
            assert!((best - split).abs() < 1e-15, "total={total} p={p}");
        }
    }
}

#[test]
fn device_model_threshold_and_monotonicity() {
    let base = DeviceParams::default();
    let at_threshold = DeviceParams {
        i_write: base.i_c0,
        ..base
    };
    assert_eq!(p_write_from_device(&at_threshold).unwrap().get(), 0.0);

    for grouping in [Grouping::AsPrinted, Grouping::Conventional] {
        let grid: Vec<Vec<f64>> = (0..10)
            .map(|a| {
                (0..10)
                    .map(|b| {
                        let d = DeviceParams {
                            t_write: 2e-9 + a as f64 * 2e-9,
                            i_write: base.i_c0 * (1.2 + 0.2 * b as f64),
                            grouping,
                            ..base
                        };
                        p_write_from_device(&d).unwrap().get()
                    })
                    .collect()
            })
            .collect();
        for a in 0..10 {
            for b in 0..10 {
                if a + 1 < 10 {
                    assert!(grid[a + 1][b] > grid[a][b], "{grouping:?} t step at ({a},{b})");
                }
                if b + 1 < 10 {
                    assert!(grid[a][b + 1] > grid[a][b], "{grouping:?} I step at ({a},{b})");
                }
            }
        }
    }
}

#[test]
fn increase_edge_cases() {
    assert_eq!(normalized_increase(0.0, 0.0), 0.0);
    assert!(normalized_increase(1e-9, 0.0).is_infinite());
    assert!((normalized_increase(2e-3, 1e-3) - 100.0).abs() < 1e-9);
}

#[test]
fn trace_rate_is_mean_failure() {
    let p = pw(0.99);
    let tvs = [
        TransitionVector::new([1, 0, 0, 0, 0, 0, 0, 0], false).unwrap(),
        TransitionVector::new([4, 4, 0, 0, 0, 0, 0, 0], false).unwrap(),
        TransitionVector::new([0; 8], false).unwrap(),
    ];
    let r = trace_error_rate(&tvs, p).unwrap();
    let expect = (0.0 + (1.0 - reference_codeword(4, 0.99).powi(2)) + 0.0) / 3.0;
    assert_eq!(r.writes, 3);
    assert!((r.rate - expect).abs() < 1e-15);
    assert!(r.optimal_rate <= r.rate);
}

fn k_vector(cap: u32) -> impl Strategy<Value = [u32; 8]> {
    prop::array::uniform8(0..=cap)
}

proptest! {
    #[test]
    fn optimal_bound_dominates(k in k_vector(72), p in 0.5f64..1.0) {
        let tv = TransitionVector::new(k, true).unwrap();
        let s = p_block_success(&tv, pw(p));
        prop_assert!(s <= p_block_success_integer_split(tv.total(), pw(p)) + 1e-12);
        prop_assert!(p_block_success_integer_split(tv.total(), pw(p)) <= p_block_success_optimal(tv.total(), pw(p)) + 1e-12);
    }

    #[test]
    fn success_falls_with_more_flips(k in 0u32..72, p in 0.5f64..1.0) {
        let a = p_codeword_success(k as f64, pw(p)).unwrap();
        let b = p_codeword_success(k as f64 + 1.0, pw(p)).unwrap();
        prop_assert!(b <= a + 1e-15);
        prop_assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn success_rises_with_pw(k in 0u32..72, p in 0.5f64..0.999) {
        let a = p_codeword_success(k as f64, pw(p)).unwrap();
        let b = p_codeword_success(k as f64, pw(p + 0.001)).unwrap();
        prop_assert!(b >= a - 1e-15);
    }
}
