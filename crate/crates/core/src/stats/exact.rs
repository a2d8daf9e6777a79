//! Exact null distributions of rank-sum statistics, computed on doubled
//! mid-ranks so tied data stay on an integer lattice.

/// Two-sided p-value `min(1, 2 min(P(S <= s), P(S >= s)))` from a pmf over integer sums.
fn two_sided(pmf: &[f64], s: usize) -> f64 {
    let lower: f64 = pmf[..=s.min(pmf.len() - 1)].iter().sum();
    let upper: f64 = pmf[s.min(pmf.len())..].iter().sum();
    (2.0 * lower.min(upper)).min(1.0)
}

/// Signed-rank test: each doubled rank joins the positive sum with probability 1/2.
pub(crate) fn signed_rank_p(doubled_ranks: &[usize], positive_sum: usize) -> f64 {
    let total: usize = doubled_ranks.iter().sum();
    let mut pmf = vec![0.0; total + 1];
    pmf[0] = 1.0;
    let mut reach = 0;
    for &r in doubled_ranks {
        reach += r;
        for s in (r..=reach).rev() {
            pmf[s] = 0.5 * pmf[s] + 0.5 * pmf[s - r];
        }
        for v in pmf.iter_mut().take(r.min(reach + 1)) {
            *v *= 0.5;
        }
    }
    two_sided(&pmf, positive_sum)
}

/// Rank-sum test: the first sample is a uniformly random `n1`-subset of the pooled ranks.
pub(crate) fn rank_sum_p(doubled_ranks: &[usize], n1: usize, first_sum: usize) -> f64 {
    let total: usize = doubled_ranks.iter().sum();
    // counts[k][s]: number of k-subsets with doubled rank sum s (as f64 to avoid overflow)
    let mut counts = vec![vec![0.0f64; total + 1]; n1 + 1];
    counts[0][0] = 1.0;
    for (seen, &r) in doubled_ranks.iter().enumerate() {
        for k in (1..=n1.min(seen + 1)).rev() {
            let (head, tail) = counts.split_at_mut(k);
            let prev = &head[k - 1];
            let cur = &mut tail[0];
            for s in (r..=total).rev() {
                cur[s] += prev[s - r];
            }
        }
    }
    let all: f64 = counts[n1].iter().sum();
    let pmf: Vec<f64> = counts[n1].iter().map(|c| c / all).collect();
    two_sided(&pmf, first_sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signed_rank_small_table() {
        // ranks 1..3 doubled: sums of subsets of {2,4,6}; P(S = 0) = 1/8
        assert!((signed_rank_p(&[2, 4, 6], 0) - 0.25).abs() < 1e-15);
        assert_eq!(signed_rank_p(&[2, 4, 6], 6), 1.0);
    }

    #[test]
    fn rank_sum_small_table() {
        // 2 of 4 ranks: 6 subsets, the smallest sum 1+2 has probability 1/6
        assert!((rank_sum_p(&[2, 4, 6, 8], 2, 6) - 1.0 / 3.0).abs() < 1e-15);
    }
}
