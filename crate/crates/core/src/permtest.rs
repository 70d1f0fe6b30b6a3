//! The permutation test with randomized tie-breaking.
//!
//! The critical value is the `ceil(M (1 - alpha))`-th smallest permuted
//! statistic, duplicates included, where `M` is the number of permutations
//! evaluated. When the observed statistic equals the critical value the
//! randomized test rejects with probability
//! `(M alpha - M_plus) / M_zero`, which makes its rejection probability
//! exactly `alpha` under exchangeability.
//!
//! Random-subset mode evaluates the identity plus `m` uniform permutations
//! (`M = m + 1`), each a Fisher–Yates shuffle of the pooled index vector,
//! the shuffle continuing from the previous permutation. The tie-breaking
//! uniform, when needed, is drawn from the same stream after all
//! permutation draws.

use crate::error::{Error, Result};
use crate::randgen::{sample_uniform, SeededStream};
use crate::stats_core::{Group, PooledRanks, SplitSample};

/// Default limit on `(k1 + k2)!` for full enumeration (8!).
pub const DEFAULT_ENUMERATION_CAP: u128 = 40_320;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PermutationScheme {
    /// Every permutation of the pooled sample; `M = (k1 + k2)!`.
    Full { cap: u128 },
    /// The identity plus `m` i.i.d. uniform permutations; `M = m + 1`.
    RandomSubset { m: usize },
}

impl PermutationScheme {
    pub fn full() -> Self {
        PermutationScheme::Full {
            cap: DEFAULT_ENUMERATION_CAP,
        }
    }

    pub fn random_subset(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidInput(
                "random permutation subset needs m >= 1".into(),
            ));
        }
        Ok(PermutationScheme::RandomSubset { m })
    }

    /// Number of permuted statistics `M` for a pooled sample of size `n`,
    /// after checking the scheme is usable at that size.
    pub fn total(&self, n: usize) -> Result<u128> {
        match *self {
            PermutationScheme::Full { cap } => {
                let needed = factorial_saturating(n);
                if needed > cap {
                    return Err(Error::Capacity { needed, cap });
                }
                Ok(needed)
            }
            PermutationScheme::RandomSubset { m } => {
                if m == 0 {
                    return Err(Error::InvalidInput(
                        "random permutation subset needs m >= 1".into(),
                    ));
                }
                Ok(m as u128 + 1)
            }
        }
    }
}

fn factorial_saturating(n: usize) -> u128 {
    (1..=n as u128).fold(1u128, |acc, i| acc.saturating_mul(i))
}

/// Result of one run of the test.
#[derive(Debug, Clone, PartialEq)]
pub struct TestOutcome {
    /// Observed statistic.
    pub statistic: f64,
    /// Order statistic of the permutation distribution used as cutoff.
    pub critical_value: f64,
    /// Number of permuted statistics, `M`.
    pub m_total: u128,
    /// Permuted statistics strictly above the critical value.
    pub m_plus: u128,
    /// Permuted statistics equal to the critical value.
    pub m_zero: u128,
    /// Rejection probability on a tie, `(M alpha - m_plus) / m_zero`.
    pub phat: f64,
    /// Test function value: 1 above the cutoff, 0 below, `phat` on a tie
    /// (0 on a tie for the non-randomized test).
    pub phi: f64,
    /// Realized decision, including the Bernoulli draw on a tie.
    pub rejected: bool,
    /// `statistic > critical_value`.
    pub rejected_nonrandomized: bool,
    /// Fraction of permuted statistics at or above the observed one.
    pub p_value: f64,
    pub randomized: bool,
}

impl TestOutcome {
    pub fn is_tie(&self) -> bool {
        self.statistic == self.critical_value
    }
}

/// `M alpha`, snapped to the nearest integer when within rounding error of it
/// so that e.g. `1000 * 0.05` counts as exactly 50.
fn scaled_alpha(m_total: u128, alpha: f64) -> f64 {
    let x = m_total as f64 * alpha;
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.max(1.0) {
        r
    } else {
        x
    }
}

/// 1-based index `ceil(M (1 - alpha))` of the critical order statistic.
pub fn critical_index(m_total: u128, alpha: f64) -> u128 {
    let tail = scaled_alpha(m_total, alpha).floor() as u128;
    m_total.saturating_sub(tail).max(1)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidInput(format!(
            "significance level must lie in (0, 1), got {alpha}"
        )));
    }
    Ok(())
}

/// Exact integer scores of every permutation in the scheme; for a random
/// subset the identity comes first.
fn permutation_scores(
    pr: &PooledRanks,
    scheme: &PermutationScheme,
    rng: &mut SeededStream,
) -> Result<Vec<u128>> {
    let n = pr.len();
    let total = scheme.total(n)?;
    let k1 = pr.k1();
    let mut labels = vec![Group::Post; n];
    match *scheme {
        PermutationScheme::Full { .. } => {
            // each k1-subset of positions is the pre group for k1! k2! permutations
            let multiplicity = (factorial_saturating(k1) * factorial_saturating(n - k1)) as usize;
            let mut scores = Vec::with_capacity(total as usize);
            let mut idx: Vec<usize> = (0..k1).collect();
            loop {
                labels.fill(Group::Post);
                for &i in &idx {
                    labels[i] = Group::Pre;
                }
                let s = pr.score(&labels);
                scores.extend(std::iter::repeat(s).take(multiplicity));
                if !next_combination(&mut idx, n) {
                    break;
                }
            }
            debug_assert_eq!(scores.len() as u128, total);
            Ok(scores)
        }
        PermutationScheme::RandomSubset { m } => {
            let mut scores = Vec::with_capacity(m + 1);
            scores.push(pr.score(pr.membership()));
            let mut order: Vec<usize> = (0..n).collect();
            for _ in 0..m {
                rng.shuffle(&mut order);
                labels.fill(Group::Post);
                for &i in &order[..k1] {
                    labels[i] = Group::Pre;
                }
                scores.push(pr.score(&labels));
            }
            Ok(scores)
        }
    }
}

/// Advances `idx` to the next k-subset of `0..n` in lexicographic order.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// The permuted statistics `{T(pi)}` for every permutation of the scheme.
pub fn permutation_distribution(
    s: &SplitSample,
    scheme: &PermutationScheme,
    rng: &mut SeededStream,
) -> Result<Vec<f64>> {
    let pr = PooledRanks::new(s);
    let scores = permutation_scores(&pr, scheme, rng)?;
    Ok(scores.into_iter().map(|v| pr.score_to_statistic(v)).collect())
}

/// Runs the permutation test at level `alpha`.
pub fn run_test(
    s: &SplitSample,
    alpha: f64,
    scheme: &PermutationScheme,
    rng: &mut SeededStream,
    randomized: bool,
) -> Result<TestOutcome> {
    check_alpha(alpha)?;
    let pr = PooledRanks::new(s);
    let mut scores = permutation_scores(&pr, scheme, rng)?;
    let observed = pr.score(pr.membership());
    let m_total = scores.len() as u128;

    let p_count = scores.iter().filter(|&&v| v >= observed).count();
    scores.sort_unstable();
    let k = critical_index(m_total, alpha) as usize;
    let critical = scores[k - 1];
    // sorted, so counts come from the boundaries of the block equal to `critical`
    let first_eq = scores.partition_point(|&v| v < critical);
    let first_gt = scores.partition_point(|&v| v <= critical);
    let m_zero = (first_gt - first_eq) as u128;
    let m_plus = (scores.len() - first_gt) as u128;
    let phat = (scaled_alpha(m_total, alpha) - m_plus as f64) / m_zero as f64;

    let (phi, rejected) = if observed > critical {
        (1.0, true)
    } else if observed < critical {
        (0.0, false)
    } else if randomized {
        (phat, sample_uniform(rng) < phat)
    } else {
        (0.0, false)
    };

    Ok(TestOutcome {
        statistic: pr.score_to_statistic(observed),
        critical_value: pr.score_to_statistic(critical),
        m_total,
        m_plus,
        m_zero,
        phat,
        phi,
        rejected,
        rejected_nonrandomized: observed > critical,
        p_value: p_count as f64 / m_total as f64,
        randomized,
    })
}

/// Conservative variant: rejects only when the statistic exceeds the
/// critical value.
pub fn run_test_nonrandomized(
    s: &SplitSample,
    alpha: f64,
    scheme: &PermutationScheme,
    rng: &mut SeededStream,
) -> Result<TestOutcome> {
    run_test(s, alpha, scheme, rng, false)
}
