//! Optimal one-dimensional k-means and elbow selection of the cluster count.
//!
//! In one dimension every optimal clustering partitions the sorted values into
//! contiguous runs, so the optimum for each `k` is found exactly by dynamic programming
//! over split points. The split index of the last cluster is monotone in the prefix
//! length, which lets each layer be filled by divide and conquer in `O(n log n)`.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Result of clustering one set of values into `k` groups.
#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    /// Cluster means, ascending.
    pub centers: Vec<f64>,
    pub sizes: Vec<usize>,
    /// Within-cluster sum of squares.
    pub wcss: f64,
}

/// Prefix sums over sorted values shifted by their median to limit cancellation.
struct Prefix {
    s1: Vec<f64>,
    s2: Vec<f64>,
}

impl Prefix {
    fn new(sorted: &[f64]) -> Self {
        let shift = sorted[sorted.len() / 2];
        let mut s1 = Vec::with_capacity(sorted.len() + 1);
        let mut s2 = Vec::with_capacity(sorted.len() + 1);
        let (mut a, mut b) = (0.0, 0.0);
        s1.push(0.0);
        s2.push(0.0);
        for &v in sorted {
            let d = v - shift;
            a += d;
            b += d * d;
            s1.push(a);
            s2.push(b);
        }
        Self { s1, s2 }
    }

    /// Sum of squared deviations of `sorted[j..=i]` from its mean.
    fn cost(&self, j: usize, i: usize) -> f64 {
        let m = (i - j + 1) as f64;
        let s = self.s1[i + 1] - self.s1[j];
        let q = self.s2[i + 1] - self.s2[j];
        (q - s * s / m).max(0.0)
    }
}

/// Dynamic-programming tables for cluster counts `1..=k_max` over sorted values.
struct Solver<'a> {
    sorted: &'a [f64],
    /// `split[k - 1][i]`: start index of the last cluster in the best `k`-partition of
    /// `sorted[..=i]`.
    split: Vec<Vec<usize>>,
}

impl<'a> Solver<'a> {
    fn new(sorted: &'a [f64], k_max: usize) -> Self {
        let n = sorted.len();
        let prefix = Prefix::new(sorted);
        let mut prev: Vec<f64> = (0..n).map(|i| prefix.cost(0, i)).collect();
        let mut split = vec![vec![0usize; n]];
        for k in 2..=k_max.min(n) {
            let mut cur = vec![f64::INFINITY; n];
            let mut opt = vec![0usize; n];
            fill_layer(&prefix, &prev, k, k - 1, n - 1, k - 1, n - 1, &mut cur, &mut opt);
            prev = cur;
            split.push(opt);
        }
        Self { sorted, split }
    }

    fn clustering(&self, k: usize) -> Clustering {
        let mut runs = Vec::with_capacity(k);
        let mut end = self.sorted.len();
        for layer in (0..k).rev() {
            let start = self.split[layer][end - 1];
            runs.push(&self.sorted[start..end]);
            end = start;
        }
        runs.reverse();
        let mut centers = Vec::with_capacity(k);
        let mut sizes = Vec::with_capacity(k);
        let mut wcss = 0.0;
        for run in runs {
            let mean = run.iter().sum::<f64>() / run.len() as f64;
            wcss += run.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
            centers.push(mean);
            sizes.push(run.len());
        }
        Clustering { centers, sizes, wcss }
    }
}

/// Fills `cur[lo..=hi]` for one layer, searching split points in `[opt_lo, opt_hi]`.
#[allow(clippy::too_many_arguments)]
fn fill_layer(
    prefix: &Prefix,
    prev: &[f64],
    k: usize,
    lo: usize,
    hi: usize,
    opt_lo: usize,
    opt_hi: usize,
    cur: &mut [f64],
    opt: &mut [usize],
) {
    if lo > hi {
        return;
    }
    let mid = lo + (hi - lo) / 2;
    let mut best = f64::INFINITY;
    let mut best_j = opt_lo.max(k - 1);
    for j in opt_lo.max(k - 1)..=opt_hi.min(mid) {
        let value = prev[j - 1] + prefix.cost(j, mid);
        if value < best {
            best = value;
            best_j = j;
        }
    }
    cur[mid] = best;
    opt[mid] = best_j;
    if mid > lo {
        fill_layer(prefix, prev, k, lo, mid - 1, opt_lo, best_j, cur, opt);
    }
    fill_layer(prefix, prev, k, mid + 1, hi, best_j, opt_hi, cur, opt);
}

fn sorted_copy(values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::EmptyInput("no values to cluster"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("values must be finite".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted)
}

/// Globally optimal partition of `values` into `k` clusters, `1 <= k <= values.len()`.
pub fn kmeans_1d(values: &[f64], k: usize) -> Result<Clustering> {
    let sorted = sorted_copy(values)?;
    if k == 0 || k > sorted.len() {
        return Err(Error::InvalidParameter(alloc::format!("k must be in 1..={}, got {k}", sorted.len())));
    }
    Ok(Solver::new(&sorted, k).clustering(k))
}

/// Optimal WCSS for every `k` in `k_min..=k_max`. Counts above the number of values
/// have WCSS 0.
pub fn wcss_profile(values: &[f64], k_min: usize, k_max: usize) -> Result<Vec<(usize, f64)>> {
    let sorted = sorted_copy(values)?;
    let solver = Solver::new(&sorted, k_max);
    Ok((k_min.max(1)..=k_max)
        .map(|k| {
            let w = if k > sorted.len() { 0.0 } else { solver.clustering(k).wcss };
            (k, w)
        })
        .collect())
}

/// Elbow rule over a WCSS table with consecutive `k`: the interior `k` maximizing the
/// second difference `W(k-1) - 2 W(k) + W(k+1)`, ties to the smaller `k`. With no
/// interior point the smallest `k` reaching the minimum WCSS wins.
pub fn elbow(profile: &[(usize, f64)]) -> Option<usize> {
    if profile.len() >= 3 {
        let mut best: Option<(usize, f64)> = None;
        for w in profile.windows(3) {
            let d2 = w[0].1 - 2.0 * w[1].1 + w[2].1;
            if best.map_or(true, |(_, b)| d2 > b) {
                best = Some((w[1].0, d2));
            }
        }
        best.map(|(k, _)| k)
    } else {
        let min = profile.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        profile.iter().find(|p| p.1 == min).map(|p| p.0)
    }
}

/// Bucket layout shared by both limbs of one muscle.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SharedBuckets {
    /// Ascending cluster means.
    pub centers: Vec<f64>,
    /// `centers.len() + 1` cut points: midpoints between adjacent centers, with
    /// `-inf` and `+inf` at the ends.
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_ext"))]
    pub boundaries: Vec<f64>,
    /// WCSS of each candidate `k`, kept so the elbow choice can be inspected.
    pub wcss_by_k: Vec<(usize, f64)>,
}

impl SharedBuckets {
    pub fn k(&self) -> usize {
        self.centers.len()
    }

    /// Index of the bucket holding `v`; buckets are left-closed.
    pub fn bucket_of(&self, v: f64) -> usize {
        let interior = &self.boundaries[1..self.boundaries.len() - 1];
        interior.partition_point(|&b| b <= v)
    }

    fn from_centers(mut centers: Vec<f64>, wcss_by_k: Vec<(usize, f64)>) -> Self {
        centers.dedup();
        let mut boundaries = Vec::with_capacity(centers.len() + 1);
        boundaries.push(f64::NEG_INFINITY);
        boundaries.extend(centers.windows(2).map(|w| 0.5 * (w[0] + w[1])));
        boundaries.push(f64::INFINITY);
        Self { centers, boundaries, wcss_by_k }
    }
}

/// Clusters the pooled values of both limbs for every `k` in `k_range`, picks `k` by the
/// elbow rule, and turns the chosen clusters into buckets. Pooled values that are all
/// identical fall back to a single bucket.
pub fn shared_buckets(
    values_affected: &[f64],
    values_unaffected: &[f64],
    k_range: (usize, usize),
) -> Result<SharedBuckets> {
    let (k_min, k_max) = k_range;
    if k_min < 2 || k_max < k_min {
        return Err(Error::InvalidParameter(alloc::format!(
            "k range must satisfy 2 <= k_min <= k_max, got ({k_min}, {k_max})"
        )));
    }
    let mut pooled = Vec::with_capacity(values_affected.len() + values_unaffected.len());
    pooled.extend_from_slice(values_affected);
    pooled.extend_from_slice(values_unaffected);
    let sorted = sorted_copy(&pooled)?;

    let distinct = 1 + sorted.windows(2).filter(|w| w[1] != w[0]).count();
    if distinct == 1 {
        return Ok(SharedBuckets::from_centers(alloc::vec![sorted[0]], Vec::new()));
    }

    let solver = Solver::new(&sorted, k_max);
    let profile: Vec<(usize, f64)> = (k_min..=k_max)
        .map(|k| {
            let w = if k >= distinct { 0.0 } else { solver.clustering(k).wcss };
            (k, w)
        })
        .collect();
    let k = elbow(&profile).unwrap_or(k_min).min(distinct);
    Ok(SharedBuckets::from_centers(solver.clustering(k).centers, profile))
}
