//! Empirical CDFs and the two-sample Cramér–von Mises statistic.
//!
//! The statistic is
//!
//! ```text
//! T = 1/(k1 + k2) * sum over pooled y of (F1(y) - F2(y))^2
//! ```
//!
//! with `F1`, `F2` the right-continuous empirical CDFs of the two
//! subsamples. Internally it is evaluated exactly as the integer
//!
//! ```text
//! S = sum over pooled y of (k2 * #{pre <= y} - k1 * #{post <= y})^2
//! ```
//!
//! so `T = S / (k1^2 k2^2 (k1 + k2))`. Two relabelings produce the same `T`
//! exactly when they produce the same `S`, which keeps permutation ties
//! exact.

use std::cmp::Ordering;

use crate::error::{Error, Result};

/// Which side of the cutoff an observation belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Group {
    Pre,
    Post,
}

/// Two ordered subsamples around an event: observations before the cutoff
/// and observations after it.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitSample {
    pre: Vec<f64>,
    post: Vec<f64>,
}

impl SplitSample {
    pub fn new(pre: Vec<f64>, post: Vec<f64>) -> Result<Self> {
        if pre.is_empty() || post.is_empty() {
            return Err(Error::InvalidInput(format!(
                "both subsamples must be non-empty (got {} pre, {} post)",
                pre.len(),
                post.len()
            )));
        }
        if let Some(x) = pre.iter().chain(&post).find(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite observation {x}")));
        }
        Ok(SplitSample { pre, post })
    }

    pub fn pre(&self) -> &[f64] {
        &self.pre
    }

    pub fn post(&self) -> &[f64] {
        &self.post
    }

    pub fn k1(&self) -> usize {
        self.pre.len()
    }

    pub fn k2(&self) -> usize {
        self.post.len()
    }

    pub fn len(&self) -> usize {
        self.pre.len() + self.post.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_balanced(&self) -> bool {
        self.pre.len() == self.post.len()
    }

    /// Same sample with the roles of the two groups exchanged.
    pub fn swapped(&self) -> SplitSample {
        SplitSample {
            pre: self.post.clone(),
            post: self.pre.clone(),
        }
    }

    /// Applies `f` to every observation.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<SplitSample> {
        SplitSample::new(
            self.pre.iter().map(|&x| f(x)).collect(),
            self.post.iter().map(|&x| f(x)).collect(),
        )
    }
}

/// `(1/n) #{y in sample : y <= x}`.
pub fn ecdf_eval(sample: &[f64], x: f64) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::InvalidInput("empirical CDF of an empty sample".into()));
    }
    let count = sample.iter().filter(|&&y| y <= x).count();
    Ok(count as f64 / sample.len() as f64)
}

/// Pooled observations sorted once, so each relabeling costs O(k1 + k2).
#[derive(Debug, Clone)]
pub struct PooledRanks {
    pooled: Vec<f64>,
    membership: Vec<Group>,
    sortperm: Vec<usize>,
    /// Exclusive end (in sorted order) of each block of tied values.
    block_ends: Vec<usize>,
    k1: usize,
    k2: usize,
}

impl PooledRanks {
    pub fn new(s: &SplitSample) -> Self {
        let pooled: Vec<f64> = s.pre.iter().chain(&s.post).copied().collect();
        let membership: Vec<Group> = std::iter::repeat(Group::Pre)
            .take(s.k1())
            .chain(std::iter::repeat(Group::Post).take(s.k2()))
            .collect();
        let mut sortperm: Vec<usize> = (0..pooled.len()).collect();
        // values are finite, so partial_cmp never fails
        sortperm.sort_by(|&a, &b| pooled[a].partial_cmp(&pooled[b]).unwrap_or(Ordering::Equal));
        let mut block_ends = Vec::new();
        for i in 1..sortperm.len() {
            if pooled[sortperm[i]] != pooled[sortperm[i - 1]] {
                block_ends.push(i);
            }
        }
        block_ends.push(sortperm.len());
        PooledRanks {
            pooled,
            membership,
            sortperm,
            block_ends,
            k1: s.k1(),
            k2: s.k2(),
        }
    }

    pub fn pooled(&self) -> &[f64] {
        &self.pooled
    }

    pub fn membership(&self) -> &[Group] {
        &self.membership
    }

    pub fn sortperm(&self) -> &[usize] {
        &self.sortperm
    }

    pub fn k1(&self) -> usize {
        self.k1
    }

    pub fn k2(&self) -> usize {
        self.k2
    }

    pub fn len(&self) -> usize {
        self.pooled.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pooled.is_empty()
    }

    /// Number of distinct values in the pooled sample.
    pub fn distinct_values(&self) -> usize {
        self.block_ends.len()
    }

    pub(crate) fn check_assignment(&self, assignment: &[Group]) -> Result<()> {
        if assignment.len() != self.pooled.len() {
            return Err(Error::InvalidInput(format!(
                "assignment has {} labels for {} pooled observations",
                assignment.len(),
                self.pooled.len()
            )));
        }
        let pre = assignment.iter().filter(|&&g| g == Group::Pre).count();
        if pre != self.k1 {
            return Err(Error::InvalidInput(format!(
                "assignment labels {pre} observations pre and {} post, expected {} and {}",
                assignment.len() - pre,
                self.k1,
                self.k2
            )));
        }
        Ok(())
    }

    /// Exact integer form of the statistic for a relabeling. The caller
    /// guarantees the label counts.
    pub(crate) fn score(&self, assignment: &[Group]) -> u128 {
        let k1 = self.k1 as i128;
        let k2 = self.k2 as i128;
        let mut c1: i128 = 0;
        let mut c2: i128 = 0;
        let mut total: u128 = 0;
        let mut start = 0;
        for &end in &self.block_ends {
            for &idx in &self.sortperm[start..end] {
                match assignment[idx] {
                    Group::Pre => c1 += 1,
                    Group::Post => c2 += 1,
                }
            }
            let d = c1 * k2 - c2 * k1;
            total += (end - start) as u128 * (d * d) as u128;
            start = end;
        }
        total
    }

    pub(crate) fn score_to_statistic(&self, score: u128) -> f64 {
        let k1 = self.k1 as f64;
        let k2 = self.k2 as f64;
        score as f64 / (k1 * k1 * k2 * k2 * (k1 + k2))
    }
}

/// Cramér–von Mises distance between the pre and post subsamples.
pub fn cvm_statistic(s: &SplitSample) -> f64 {
    let pr = PooledRanks::new(s);
    pr.score_to_statistic(pr.score(&pr.membership))
}

/// The statistic recomputed with the pooled observations relabeled by
/// `assignment` (one label per pooled position, pre values first).
pub fn cvm_statistic_permuted(pr: &PooledRanks, assignment: &[Group]) -> Result<f64> {
    pr.check_assignment(assignment)?;
    Ok(pr.score_to_statistic(pr.score(assignment)))
}
