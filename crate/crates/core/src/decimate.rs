//! Peak-preserving decimation for shipping long series to a chart.

use alloc::vec::Vec;

/// Indices of at most `max_points` samples of `values`, in ascending order.
///
/// The series is split into `max_points / 2` equal buckets and each bucket keeps its
/// minimum and maximum sample, so every local extremum that spans a bucket survives and
/// the global minimum and maximum are always kept.
pub fn peak_preserving_indices(values: &[f64], max_points: usize) -> Vec<usize> {
    let n = values.len();
    if n <= max_points {
        return (0..n).collect();
    }
    let buckets = (max_points / 2).max(1);
    let mut out = Vec::with_capacity(2 * buckets);
    for b in 0..buckets {
        let lo = b * n / buckets;
        let hi = ((b + 1) * n / buckets).max(lo + 1);
        let (mut i_min, mut i_max) = (lo, lo);
        for i in lo..hi {
            if values[i] < values[i_min] {
                i_min = i;
            }
            if values[i] > values[i_max] {
                i_max = i;
            }
        }
        let (first, second) = if i_min <= i_max { (i_min, i_max) } else { (i_max, i_min) };
        out.push(first);
        if second != first {
            out.push(second);
        }
    }
    out
}

/// Gathers `values[i]` for each index.
pub fn gather<T: Copy>(values: &[T], indices: &[usize]) -> Vec<T> {
    indices.iter().map(|&i| values[i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn short_series_untouched() {
        assert_eq!(peak_preserving_indices(&[1.0, 2.0, 3.0], 2000), alloc::vec![0, 1, 2]);
    }

    #[test]
    fn single_spike_survives() {
        let mut values = alloc::vec![1.0; 15_000];
        values[7_777] = 50.0;
        values[123] = -3.0;
        let idx = peak_preserving_indices(&values, 2000);
        assert!(idx.len() <= 2000);
        assert!(idx.contains(&7_777));
        assert!(idx.contains(&123));
    }

    proptest! {
        #[test]
        fn keeps_min_and_max_and_bound(
            values in proptest::collection::vec(-100.0f64..100.0, 1..5000),
            max_points in 2usize..300,
        ) {
            let idx = peak_preserving_indices(&values, max_points);
            prop_assert!(idx.len() <= max_points);
            prop_assert!(idx.windows(2).all(|w| w[0] < w[1]));
            let kept = gather(&values, &idx);
            let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let min = values.iter().copied().fold(f64::INFINITY, f64::min);
            prop_assert_eq!(kept.iter().copied().fold(f64::NEG_INFINITY, f64::max), max);
            prop_assert_eq!(kept.iter().copied().fold(f64::INFINITY, f64::min), min);
        }
    }
}
