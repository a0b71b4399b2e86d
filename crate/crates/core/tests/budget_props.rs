use itrisk::budget::{
    acquisition_memory_bits, buffer_bits, cfar_op_count, correlation_op_count, fft_time_scaled,
    required_processors, ProcessorBenchmark, BITS_PER_KIB,
};
use proptest::prelude::*;

proptest! {
    #[test]
    fn op_counts_are_linear_in_channels(points in 1u64..5000, refs in 1u64..64, ch in 1u64..512, k in 1u64..8) {
        prop_assert_eq!(correlation_op_count(points, ch * k, refs).unwrap(), k * correlation_op_count(points, ch, refs).unwrap());
        prop_assert_eq!(cfar_op_count(points, ch * k, refs).unwrap(), k * cfar_op_count(points, ch, refs).unwrap());
        prop_assert_eq!(acquisition_memory_bits(points, ch * k, 16).unwrap(), k * acquisition_memory_bits(points, ch, 16).unwrap());
    }

    #[test]
    fn buffer_is_linear_in_channels(rate in 1000u32..100_000, ms in 1u32..50, ch in 1u64..256) {
        let one = buffer_bits(rate as f64, ms as f64 * 1e-3, 16, 1).unwrap();
        let many = buffer_bits(rate as f64, ms as f64 * 1e-3, 16, ch).unwrap();
        prop_assert_eq!(many.bits, ch * one.bits);
        prop_assert_eq!(one.samples_per_interval, (rate as u64 * ms as u64) / 1000);
    }

    #[test]
    fn processors_cover_the_work(time in 1e-7f64..1e-2, deadline in 1e-7f64..1e-2) {
        let n = required_processors(time, deadline).unwrap();
        prop_assert!(n >= 1);
        prop_assert!(n as f64 * deadline >= time * (1.0 - 1e-12));
        prop_assert!(((n - 1) as f64) * deadline < time);
        let more = required_processors(time * 2.0, deadline).unwrap();
        prop_assert!(more >= n);
    }

    #[test]
    fn fft_time_grows_with_size(a in 1u32..16, b in 1u32..16) {
        let bench = ProcessorBenchmark::<f64>::tiger_sharc();
        let (lo, hi) = (a.min(b), a.max(b));
        prop_assert!(fft_time_scaled(&bench, 1 << lo).unwrap() <= fft_time_scaled(&bench, 1 << hi).unwrap());
    }
}

#[test]
fn kib_constant() {
    assert_eq!(BITS_PER_KIB, 8192);
}
