//! Transition-matrix estimation, stationary distributions and chain
//! simulation.
//!
//! Estimation pools the transitions of all individuals (their dynamics are
//! independent and identically distributed), so the transition counts are the
//! sufficient statistic and the maximum-likelihood estimate is the
//! row-normalized count matrix.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::model::{CommunityLabel, CommunityTrajectories, SegmentedChain, TransitionMatrix};
use thiserror::Error;

/// Errors from estimation and the stationary solve.
#[derive(Debug, Error)]
pub enum MarkovError {
    /// The requested time range is empty or out of bounds.
    #[error("invalid time range [{t_start}, {t_end}) for {n_times} time columns")]
    InvalidRange {
        /// Requested start (inclusive).
        t_start: usize,
        /// Requested end (exclusive).
        t_end: usize,
        /// Columns available.
        n_times: usize,
    },
    /// The least-squares stationary solve failed.
    #[error("stationary solve failed: {reason}")]
    SolveFailed {
        /// Backend diagnostic.
        reason: String,
    },
}

/// Transition counts `n_ij` on a time window, pooled over individuals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionCounts {
    n: Vec<u64>,
    row_totals: Vec<u64>,
    d: usize,
}

impl TransitionCounts {
    /// Wraps a row-major `d×d` count matrix, computing row totals.
    pub fn from_counts(n: Vec<u64>, d: usize) -> Self {
        assert_eq!(n.len(), d * d, "count matrix must be d×d");
        let row_totals = (0..d).map(|i| n[i * d..(i + 1) * d].iter().sum()).collect();
        TransitionCounts { n, row_totals, d }
    }

    /// Matrix dimension `D`.
    pub fn dim(&self) -> usize {
        self.d
    }

    /// Count `n_ij`.
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.n[i * self.d + j]
    }

    /// Row total `n_i = Σ_j n_ij`.
    pub fn row_total(&self, i: usize) -> u64 {
        self.row_totals[i]
    }

    /// Total number of observed transitions.
    pub fn total(&self) -> u64 {
        self.row_totals.iter().sum()
    }

    /// Element-wise sum with another count matrix of the same dimension.
    pub fn merged(&self, other: &TransitionCounts) -> TransitionCounts {
        assert_eq!(self.d, other.d);
        let n = self
            .n
            .iter()
            .zip(other.n.iter())
            .map(|(a, b)| a + b)
            .collect();
        TransitionCounts::from_counts(n, self.d)
    }
}

/// Counts the transitions fired at times `t_start ≤ t < t_end`, pooled over
/// all individuals: `n_ij = #{(c, t) : X(t,c) = i, X(t+1,c) = j}`.
///
/// The window must satisfy `0 ≤ t_start < t_end ≤ T−1`, so the pair
/// `(t, t+1)` always lies inside the observed columns. Counting is additive
/// over adjacent windows.
pub fn count_transitions(
    traj: &CommunityTrajectories,
    t_start: usize,
    t_end: usize,
) -> Result<TransitionCounts, MarkovError> {
    if t_start >= t_end || t_end > traj.n_times() - 1 {
        return Err(MarkovError::InvalidRange {
            t_start,
            t_end,
            n_times: traj.n_times(),
        });
    }
    let d = traj.n_communities();
    let mut n = vec![0u64; d * d];
    for c in 0..traj.n_individuals() {
        for t in t_start..t_end {
            let i = traj.label(c, t).index();
            let j = traj.label(c, t + 1).index();
            n[i * d + j] += 1;
        }
    }
    Ok(TransitionCounts::from_counts(n, d))
}

/// Maximum-likelihood transition matrix: `p_ij = n_ij / n_i`.
///
/// A community that was never left (row total 0) gets a self-loop row, which
/// keeps simulation well defined without inventing mobility for it.
pub fn estimate_transition_matrix(counts: &TransitionCounts) -> TransitionMatrix {
    let d = counts.dim();
    let mut p = vec![0.0; d * d];
    for i in 0..d {
        let total = counts.row_total(i);
        if total == 0 {
            p[i * d + i] = 1.0;
        } else {
            for j in 0..d {
                p[i * d + j] = counts.get(i, j) as f64 / total as f64;
            }
        }
    }
    TransitionMatrix::from_normalized(p, d)
}

/// A stationary distribution of a transition matrix, with solve diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDistribution {
    /// The distribution π, non-negative and summing to 1.
    pub pi: Vec<f64>,
    /// Max-norm residual `‖πP − π‖∞` at the solution.
    pub residual: f64,
    /// Whether π is the unique stationary distribution (the eigenvalue 1 of
    /// `Pᵀ` is simple). Reducible chains return a valid π with `unique =
    /// false`.
    pub unique: bool,
}

/// Solves for a stationary distribution by least squares.
///
/// Stacks `Pᵀ − I` with an all-ones row, right-hand side `(0, …, 0, 1)`, and
/// takes the minimum-norm least-squares solution, so `‖πP − π‖²` is minimized
/// subject to `Σπ = 1`. Entries within `1e-14` below zero are clamped to 0
/// and the vector renormalized.
pub fn stationary_distribution(
    p: &TransitionMatrix,
) -> Result<StationaryDistribution, MarkovError> {
    let d = p.dim();
    // (d+1)×d system: rows 0..d are Pᵀ − I, the last row is all ones.
    let mut a = DMatrix::zeros(d + 1, d);
    for i in 0..d {
        for j in 0..d {
            a[(i, j)] = p.get(j, i) - if i == j { 1.0 } else { 0.0 };
        }
    }
    for j in 0..d {
        a[(d, j)] = 1.0;
    }
    let mut b = DVector::zeros(d + 1);
    b[d] = 1.0;

    let svd = a.clone().svd(true, true);
    let singular_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let solve_eps = 1e-12 * singular_max.max(1.0);
    let x = svd
        .solve(&b, solve_eps)
        .map_err(|e| MarkovError::SolveFailed {
            reason: e.to_string(),
        })?;

    let mut pi: Vec<f64> = x.iter().cloned().collect();
    for v in &mut pi {
        if !v.is_finite() {
            return Err(MarkovError::SolveFailed {
                reason: "non-finite solution component".to_string(),
            });
        }
        if *v < 0.0 && *v >= -1e-14 {
            *v = 0.0;
        }
    }
    if pi.iter().any(|&v| v < 0.0) {
        return Err(MarkovError::SolveFailed {
            reason: format!("solution has a negative component: {pi:?}"),
        });
    }
    let sum: f64 = pi.iter().sum();
    if sum <= 0.0 {
        return Err(MarkovError::SolveFailed {
            reason: "solution sums to zero".to_string(),
        });
    }
    for v in &mut pi {
        *v /= sum;
    }

    let residual = (0..d)
        .map(|j| {
            let pj: f64 = (0..d).map(|i| pi[i] * p.get(i, j)).sum();
            (pj - pi[j]).abs()
        })
        .fold(0.0, f64::max);

    // Uniqueness: the eigenvalue 1 of Pᵀ is simple iff Pᵀ − I has a
    // one-dimensional null space.
    let mut pt_minus_i = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            pt_minus_i[(i, j)] = p.get(j, i) - if i == j { 1.0 } else { 0.0 };
        }
    }
    let sv = pt_minus_i.svd(false, false).singular_values;
    let sv_max = sv.iter().cloned().fold(0.0, f64::max).max(1.0);
    let null_dim = sv.iter().filter(|&&s| s < 1e-9 * sv_max).count();
    let unique = null_dim == 1;

    Ok(StationaryDistribution {
        pi,
        residual,
        unique,
    })
}

/// One inverse-CDF categorical step: the smallest `j` with
/// `Σ_{m≤j} p_{current,m} > u`.
///
/// If rounding makes the row sum fall short of `u`, the largest community
/// with positive probability is returned.
pub fn simulate_step(p: &TransitionMatrix, current: CommunityLabel, u: f64) -> CommunityLabel {
    let row = p.row(current.index());
    let mut cum = 0.0;
    for (j, &prob) in row.iter().enumerate() {
        cum += prob;
        if cum > u {
            return CommunityLabel::from_index(j);
        }
    }
    let fallback = row
        .iter()
        .rposition(|&prob| prob > 0.0)
        .unwrap_or(row.len() - 1);
    CommunityLabel::from_index(fallback)
}

/// Draws one label from a probability vector by inverse-CDF sampling.
pub(crate) fn sample_from_distribution(pi: &[f64], u: f64) -> CommunityLabel {
    let mut cum = 0.0;
    for (j, &prob) in pi.iter().enumerate() {
        cum += prob;
        if cum > u {
            return CommunityLabel::from_index(j);
        }
    }
    let fallback = pi
        .iter()
        .rposition(|&prob| prob > 0.0)
        .unwrap_or(pi.len() - 1);
    CommunityLabel::from_index(fallback)
}

/// Simulates a piecewise homogeneous chain for all individuals.
///
/// Column 0 of the result equals `initial`; the transition from column `t` to
/// `t+1` uses the matrix of the segment containing `t`. Individuals are
/// advanced in index order, one uniform draw each, so the output is a pure
/// function of `(chain, initial, horizon, rng)`.
pub fn simulate_phmc<R: Rng + ?Sized>(
    chain: &SegmentedChain,
    initial: &[CommunityLabel],
    horizon: usize,
    rng: &mut R,
) -> CommunityTrajectories {
    let n = initial.len();
    let n_times = horizon + 1;
    let mut data = vec![CommunityLabel::from_index(0); n * n_times];
    for (c, &label) in initial.iter().enumerate() {
        data[c * n_times] = label;
    }
    for t in 0..horizon {
        let matrix = chain.matrix_at(t);
        for c in 0..n {
            let current = data[c * n_times + t];
            let u: f64 = rng.random();
            data[c * n_times + t + 1] = simulate_step(matrix, current, u);
        }
    }
    CommunityTrajectories::from_labels(data, n, n_times, chain.dim())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_trajectories;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn traj(rows: &[Vec<i64>], d: usize) -> CommunityTrajectories {
        validate_trajectories(rows, d).unwrap()
    }

    #[test]
    fn counts_consecutive_pairs() {
        let t = traj(&[vec![1, 1, 2, 2, 1]], 2);
        let c = count_transitions(&t, 0, 4).unwrap();
        assert_eq!(c.get(0, 0), 1);
        assert_eq!(c.get(0, 1), 1);
        assert_eq!(c.get(1, 0), 1);
        assert_eq!(c.get(1, 1), 1);
    }

    #[test]
    fn counts_constant_trajectory() {
        let t = traj(&[vec![1, 1, 1]], 2);
        let c = count_transitions(&t, 0, 2).unwrap();
        assert_eq!(c.get(0, 0), 2);
        assert_eq!(c.total(), 2);
    }

    #[test]
    fn single_step_counts_n_transitions() {
        let t = traj(&[vec![1, 2, 1], vec![2, 2, 1], vec![1, 1, 2]], 2);
        let c = count_transitions(&t, 1, 2).unwrap();
        assert_eq!(c.total(), 3);
    }

    #[test]
    fn rejects_invalid_ranges() {
        let t = traj(&[vec![1, 2, 1]], 2);
        assert!(matches!(
            count_transitions(&t, 1, 1),
            Err(MarkovError::InvalidRange { .. })
        ));
        assert!(matches!(
            count_transitions(&t, 0, 3),
            Err(MarkovError::InvalidRange { .. })
        ));
    }

    #[test]
    fn mle_is_row_normalized() {
        let c = TransitionCounts::from_counts(vec![1, 1, 1, 1], 2);
        let p = estimate_transition_matrix(&c);
        assert_eq!(p.to_rows(), vec![vec![0.5, 0.5], vec![0.5, 0.5]]);
    }

    #[test]
    fn unobserved_row_becomes_self_loop() {
        let c = TransitionCounts::from_counts(vec![2, 0, 0, 0], 2);
        let p = estimate_transition_matrix(&c);
        assert_eq!(p.to_rows(), vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
    }

    #[test]
    fn deterministic_alternation_counts() {
        let c = TransitionCounts::from_counts(vec![0, 5, 5, 0], 2);
        let p = estimate_transition_matrix(&c);
        assert_eq!(p.to_rows(), vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
    }

    #[test]
    fn stationary_symmetric_two_state() {
        let p = TransitionMatrix::new(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let s = stationary_distribution(&p).unwrap();
        assert_abs_diff_eq!(s.pi[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(s.pi[1], 0.5, epsilon = 1e-12);
        assert!(s.unique);
        assert!(s.residual < 1e-12);
    }

    #[test]
    fn stationary_hand_solved_two_state() {
        // πP = π with P = [[0.9, 0.1], [0.5, 0.5]] gives π = (5/6, 1/6).
        let p = TransitionMatrix::new(vec![vec![0.9, 0.1], vec![0.5, 0.5]]).unwrap();
        let s = stationary_distribution(&p).unwrap();
        assert_abs_diff_eq!(s.pi[0], 5.0 / 6.0, epsilon = 1e-10);
        assert_abs_diff_eq!(s.pi[1], 1.0 / 6.0, epsilon = 1e-10);
        assert!(s.unique);
    }

    #[test]
    fn stationary_identity_reports_non_unique() {
        let p = TransitionMatrix::identity(3);
        let s = stationary_distribution(&p).unwrap();
        assert!(!s.unique);
        assert!(s.residual < 1e-12);
        let sum: f64 = s.pi.iter().sum();
        assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-12);
        assert!(s.pi.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn step_boundary_is_strict() {
        let p = TransitionMatrix::new(vec![vec![0.3, 0.7], vec![0.5, 0.5]]).unwrap();
        let from = CommunityLabel::from_index(0);
        assert_eq!(simulate_step(&p, from, 0.29).one_based(), 1);
        assert_eq!(simulate_step(&p, from, 0.30).one_based(), 2);
    }

    #[test]
    fn step_degenerate_row() {
        let p = TransitionMatrix::new(vec![vec![0.0, 1.0], vec![0.5, 0.5]]).unwrap();
        let from = CommunityLabel::from_index(0);
        for &u in &[0.0, 0.3, 0.999999] {
            assert_eq!(simulate_step(&p, from, u).one_based(), 2);
        }
    }

    #[test]
    fn phmc_identity_is_absorbing() {
        let chain = SegmentedChain::homogeneous(TransitionMatrix::identity(2));
        let initial = vec![CommunityLabel::from_index(0), CommunityLabel::from_index(1)];
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let t = simulate_phmc(&chain, &initial, 5, &mut rng);
        for time in 0..6 {
            assert_eq!(t.label(0, time).one_based(), 1);
            assert_eq!(t.label(1, time).one_based(), 2);
        }
    }

    #[test]
    fn phmc_deterministic_alternation() {
        let p = TransitionMatrix::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let chain = SegmentedChain::homogeneous(p);
        let initial = vec![CommunityLabel::from_index(0)];
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let t = simulate_phmc(&chain, &initial, 3, &mut rng);
        let row: Vec<usize> = (0..4).map(|h| t.label(0, h).one_based()).collect();
        assert_eq!(row, vec![1, 2, 1, 2]);
    }

    #[test]
    fn phmc_switches_segment_at_change_point() {
        let p1 = TransitionMatrix::identity(2);
        let p2 = TransitionMatrix::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let chain = SegmentedChain::new(vec![2], vec![p1, p2]).unwrap();
        let initial = vec![CommunityLabel::from_index(0)];
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let t = simulate_phmc(&chain, &initial, 4, &mut rng);
        let row: Vec<usize> = (0..5).map(|h| t.label(0, h).one_based()).collect();
        assert_eq!(row, vec![1, 1, 1, 2, 1]);
    }
}
