//! Core data types shared by every stage of the pipeline.
//!
//! Community labels run over `{1, …, D}` in files and user-facing output and
//! are stored 0-based internally; the conversion happens only at the I/O
//! boundary. All containers validate their invariants on construction and are
//! immutable afterwards, so they can be shared freely across threads.

use thiserror::Error;

/// Errors raised while constructing or validating model containers.
#[derive(Debug, Error)]
pub enum ModelError {
    /// A community label fell outside the declared range `{1, …, D}`.
    #[error("label {value} at individual {individual}, time {time} is outside {{1, …, {d}}}")]
    LabelOutOfRange {
        /// 0-based row of the offending entry.
        individual: usize,
        /// 0-based column of the offending entry.
        time: usize,
        /// The raw value as read (1-based convention).
        value: i64,
        /// Declared number of communities.
        d: usize,
    },
    /// Fewer than two time columns; no transition can be observed.
    #[error("trajectory matrix has {n_times} time column(s); at least 2 are required")]
    TooFewTimeSteps {
        /// Number of time columns found.
        n_times: usize,
    },
    /// The input matrix has no rows or no columns.
    #[error("input matrix is empty")]
    EmptyMatrix,
    /// Rows of the input matrix have differing lengths.
    #[error("input matrix is ragged: row {row} has {found} entries, expected {expected}")]
    NotRectangular {
        /// 0-based offending row.
        row: usize,
        /// Entries in that row.
        found: usize,
        /// Entries in the first row.
        expected: usize,
    },
    /// An attribute entry was negative or non-finite.
    #[error("attribute at individual {individual}, time {time} is {value}; attributes must be finite and ≥ 0")]
    InvalidAttribute {
        /// 0-based row.
        individual: usize,
        /// 0-based column.
        time: usize,
        /// The offending value.
        value: f64,
    },
    /// Attribute matrix shape does not match the companion trajectories.
    #[error("attribute matrix is {found_rows}×{found_cols} but trajectories are {expected_rows}×{expected_cols}")]
    ShapeMismatch {
        /// Attribute rows.
        found_rows: usize,
        ///Attribute columns.
        found_cols: usize,
        /// Trajectory rows.
        expected_rows: usize,
        /// Trajectory columns.
        expected_cols: usize,
    },
    /// A row of a transition matrix does not sum to one.
    #[error("transition matrix row {row} sums to {sum}, expected 1 within 1e-12")]
    NotStochastic {
        /// 0-based row.
        row: usize,
        /// Observed row sum.
        sum: f64,
    },
    /// A transition matrix entry lies outside `[0, 1]`.
    #[error("transition matrix entry ({row}, {col}) is {value}, outside [0, 1]")]
    ProbabilityOutOfRange {
        /// 0-based row.
        row: usize,
        /// 0-based column.
        col: usize,
        /// The offending value.
        value: f64,
    },
    /// Change points are not strictly increasing interior times.
    #[error("change points must be strictly increasing and ≥ 1; got {positions:?}")]
    InvalidChangePoints {
        /// The offending positions.
        positions: Vec<usize>,
    },
    /// Segment matrices do not line up with the change points.
    #[error("{matrices} segment matrices for {change_points} change points; expected {}", change_points + 1)]
    SegmentCountMismatch {
        /// Number of matrices supplied.
        matrices: usize,
        /// Number of change points supplied.
        change_points: usize,
    },
    /// Segment matrices have differing dimensions.
    #[error("segment matrix {index} is {found}×{found}, expected {expected}×{expected}")]
    SegmentDimensionMismatch {
        /// Index of the offending matrix.
        index: usize,
        /// Its dimension.
        found: usize,
        /// Dimension of the first matrix.
        expected: usize,
    },
}

/// Tolerance on row sums of stochastic matrices.
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;

// ---------------------------------------------------------------------------
// Labels and trajectories
// ---------------------------------------------------------------------------

/// Community occupied by an individual at one time, stored as a 0-based index.
///
/// Files and printed output use the 1-based convention `{1, …, D}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CommunityLabel(usize);

impl CommunityLabel {
    /// Wraps an already 0-based index. The caller guarantees `index < D`.
    pub fn from_index(index: usize) -> Self {
        CommunityLabel(index)
    }

    /// Parses a 1-based label, checking it lies in `{1, …, d}`.
    pub fn from_one_based(value: i64, d: usize) -> Option<Self> {
        if value >= 1 && (value as u64) <= d as u64 {
            Some(CommunityLabel(value as usize - 1))
        } else {
            None
        }
    }

    /// 0-based index for matrix lookups.
    pub fn index(self) -> usize {
        self.0
    }

    /// 1-based value for files and display.
    pub fn one_based(self) -> usize {
        self.0 + 1
    }
}

/// Observed or simulated community labels: rows are individuals, columns are
/// time steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommunityTrajectories {
    data: Vec<CommunityLabel>,
    n_individuals: usize,
    n_times: usize,
    n_communities: usize,
}

impl CommunityTrajectories {
    /// Validates a raw 1-based integer matrix against a declared community
    /// count `D` and wraps it.
    ///
    /// Every entry must lie in `{1, …, D}`, the matrix must be rectangular and
    /// non-empty, and at least two time columns are required (a single column
    /// carries no transition).
    pub fn validate(raw: &[Vec<i64>], declared_d: usize) -> Result<Self, ModelError> {
        if raw.is_empty() || raw[0].is_empty() {
            return Err(ModelError::EmptyMatrix);
        }
        let n_times = raw[0].len();
        for (row, r) in raw.iter().enumerate() {
            if r.len() != n_times {
                return Err(ModelError::NotRectangular {
                    row,
                    found: r.len(),
                    expected: n_times,
                });
            }
        }
        if n_times < 2 {
            return Err(ModelError::TooFewTimeSteps { n_times });
        }
        let mut data = Vec::with_capacity(raw.len() * n_times);
        for (individual, r) in raw.iter().enumerate() {
            for (time, &value) in r.iter().enumerate() {
                match CommunityLabel::from_one_based(value, declared_d) {
                    Some(label) => data.push(label),
                    None => {
                        return Err(ModelError::LabelOutOfRange {
                            individual,
                            time,
                            value,
                            d: declared_d,
                        })
                    }
                }
            }
        }
        Ok(CommunityTrajectories {
            data,
            n_individuals: raw.len(),
            n_times,
            n_communities: declared_d,
        })
    }

    /// Builds trajectories from already validated labels (row-major,
    /// individuals × times). Used by the simulator.
    pub(crate) fn from_labels(
        data: Vec<CommunityLabel>,
        n_individuals: usize,
        n_times: usize,
        n_communities: usize,
    ) -> Self {
        debug_assert_eq!(data.len(), n_individuals * n_times);
        debug_assert!(data.iter().all(|l| l.index() < n_communities));
        CommunityTrajectories {
            data,
            n_individuals,
            n_times,
            n_communities,
        }
    }

    /// Number of individuals `N`.
    pub fn n_individuals(&self) -> usize {
        self.n_individuals
    }

    /// Number of time columns `T`.
    pub fn n_times(&self) -> usize {
        self.n_times
    }

    /// Number of communities `D`.
    pub fn n_communities(&self) -> usize {
        self.n_communities
    }

    /// Label of `individual` at `time` (both 0-based).
    pub fn label(&self, individual: usize, time: usize) -> CommunityLabel {
        self.data[individual * self.n_times + time]
    }

    /// The final observed column, the default initial configuration when
    /// forecasting beyond the sample.
    pub fn last_column(&self) -> Vec<CommunityLabel> {
        (0..self.n_individuals)
            .map(|c| self.label(c, self.n_times - 1))
            .collect()
    }

    /// Rows as 1-based integers, for serialization.
    pub fn to_one_based_rows(&self) -> Vec<Vec<i64>> {
        (0..self.n_individuals)
            .map(|c| {
                (0..self.n_times)
                    .map(|t| self.label(c, t).one_based() as i64)
                    .collect()
            })
            .collect()
    }
}

/// Validates a raw 1-based integer matrix as community trajectories.
///
/// Convenience alias for [`CommunityTrajectories::validate`].
pub fn validate_trajectories(
    raw: &[Vec<i64>],
    declared_d: usize,
) -> Result<CommunityTrajectories, ModelError> {
    CommunityTrajectories::validate(raw, declared_d)
}

/// Non-negative attribute observations aligned with a trajectory matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeObservations {
    data: Vec<f64>,
    n_individuals: usize,
    n_times: usize,
}

impl AttributeObservations {
    /// Validates a raw matrix of attribute values: rectangular, finite,
    /// non-negative.
    pub fn validate(raw: &[Vec<f64>]) -> Result<Self, ModelError> {
        if raw.is_empty() || raw[0].is_empty() {
            return Err(ModelError::EmptyMatrix);
        }
        let n_times = raw[0].len();
        for (row, r) in raw.iter().enumerate() {
            if r.len() != n_times {
                return Err(ModelError::NotRectangular {
                    row,
                    found: r.len(),
                    expected: n_times,
                });
            }
        }
        let mut data = Vec::with_capacity(raw.len() * n_times);
        for (individual, r) in raw.iter().enumerate() {
            for (time, &value) in r.iter().enumerate() {
                if !value.is_finite() || value < 0.0 {
                    return Err(ModelError::InvalidAttribute {
                        individual,
                        time,
                        value,
                    });
                }
                data.push(value);
            }
        }
        Ok(AttributeObservations {
            data,
            n_individuals: raw.len(),
            n_times,
        })
    }

    /// Checks shape equality against the companion trajectory matrix.
    pub fn check_alignment(&self, traj: &CommunityTrajectories) -> Result<(), ModelError> {
        if self.n_individuals != traj.n_individuals() || self.n_times != traj.n_times() {
            return Err(ModelError::ShapeMismatch {
                found_rows: self.n_individuals,
                found_cols: self.n_times,
                expected_rows: traj.n_individuals(),
                expected_cols: traj.n_times(),
            });
        }
        Ok(())
    }

    /// Number of individuals.
    pub fn n_individuals(&self) -> usize {
        self.n_individuals
    }

    /// Number of time columns.
    pub fn n_times(&self) -> usize {
        self.n_times
    }

    /// Value for `individual` at `time`.
    pub fn value(&self, individual: usize, time: usize) -> f64 {
        self.data[individual * self.n_times + time]
    }
}

// ---------------------------------------------------------------------------
// Transition matrices and segmented chains
// ---------------------------------------------------------------------------

/// Row-stochastic `D×D` transition matrix for one homogeneity segment.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    p: Vec<f64>,
    d: usize,
}

impl TransitionMatrix {
    /// Validates entries in `[0, 1]` and row sums equal to 1 within
    /// [`ROW_SUM_TOLERANCE`].
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self, ModelError> {
        if rows.is_empty() {
            return Err(ModelError::EmptyMatrix);
        }
        let d = rows.len();
        let mut p = Vec::with_capacity(d * d);
        for (row, r) in rows.iter().enumerate() {
            if r.len() != d {
                return Err(ModelError::NotRectangular {
                    row,
                    found: r.len(),
                    expected: d,
                });
            }
            let mut sum = 0.0;
            for (col, &value) in r.iter().enumerate() {
                if !(0.0..=1.0).contains(&value) || !value.is_finite() {
                    return Err(ModelError::ProbabilityOutOfRange { row, col, value });
                }
                sum += value;
            }
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(ModelError::NotStochastic { row, sum });
            }
            p.extend_from_slice(r);
        }
        Ok(TransitionMatrix { p, d })
    }

    /// The `D×D` identity matrix (every community absorbing).
    pub fn identity(d: usize) -> Self {
        let mut p = vec![0.0; d * d];
        for i in 0..d {
            p[i * d + i] = 1.0;
        }
        TransitionMatrix { p, d }
    }

    /// Internal constructor for rows that are normalized by construction.
    pub(crate) fn from_normalized(p: Vec<f64>, d: usize) -> Self {
        debug_assert_eq!(p.len(), d * d);
        TransitionMatrix { p, d }
    }

    /// Matrix dimension `D`.
    pub fn dim(&self) -> usize {
        self.d
    }

    /// Row `i` as a probability slice.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.p[i * self.d..(i + 1) * self.d]
    }

    /// Entry `p_ij`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.p[i * self.d + j]
    }

    /// Rows as owned vectors, for serialization and display.
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.d).map(|i| self.row(i).to_vec()).collect()
    }
}

/// A piecewise homogeneous chain: change points `τ_1 < … < τ_k` and `k+1`
/// transition matrices.
///
/// Segment `l` governs the transitions fired at times `τ_l ≤ t < τ_{l+1}`
/// (with `τ_0 = 0` and `τ_{k+1} = ∞`), i.e. the step from `t` to `t+1` uses
/// the matrix of the segment containing `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentedChain {
    change_points: Vec<usize>,
    matrices: Vec<TransitionMatrix>,
}

impl SegmentedChain {
    /// Builds a chain from interior change points and per-segment matrices.
    pub fn new(
        change_points: Vec<usize>,
        matrices: Vec<TransitionMatrix>,
    ) -> Result<Self, ModelError> {
        if matrices.len() != change_points.len() + 1 {
            return Err(ModelError::SegmentCountMismatch {
                matrices: matrices.len(),
                change_points: change_points.len(),
            });
        }
        let increasing = change_points.windows(2).all(|w| w[0] < w[1]);
        if !increasing || change_points.first().is_some_and(|&t| t == 0) {
            return Err(ModelError::InvalidChangePoints {
                positions: change_points,
            });
        }
        let d = matrices[0].dim();
        for (index, m) in matrices.iter().enumerate() {
            if m.dim() != d {
                return Err(ModelError::SegmentDimensionMismatch {
                    index,
                    found: m.dim(),
                    expected: d,
                });
            }
        }
        Ok(SegmentedChain {
            change_points,
            matrices,
        })
    }

    /// A chain with a single matrix and no change points.
    pub fn homogeneous(matrix: TransitionMatrix) -> Self {
        SegmentedChain {
            change_points: Vec::new(),
            matrices: vec![matrix],
        }
    }

    /// Number of communities.
    pub fn dim(&self) -> usize {
        self.matrices[0].dim()
    }

    /// The change points `τ_1 < … < τ_k`.
    pub fn change_points(&self) -> &[usize] {
        &self.change_points
    }

    /// The `k+1` segment matrices.
    pub fn matrices(&self) -> &[TransitionMatrix] {
        &self.matrices
    }

    /// Index of the segment governing the transition fired at time `t`.
    pub fn segment_index(&self, t: usize) -> usize {
        self.change_points.partition_point(|&tau| tau <= t)
    }

    /// Matrix governing the transition fired at time `t`.
    pub fn matrix_at(&self, t: usize) -> &TransitionMatrix {
        &self.matrices[self.segment_index(t)]
    }

    /// The matrix of the final segment (governs all times beyond `τ_k`).
    pub fn last_matrix(&self) -> &TransitionMatrix {
        self.matrices.last().expect("at least one segment")
    }
}

// ---------------------------------------------------------------------------
// Entropy trajectories
// ---------------------------------------------------------------------------

/// Estimated expected random-entropy trajectory over a simulation horizon.
///
/// `mean[h]` and `sigma[h]` are the cross-replication average and sample
/// standard deviation of the Theil entropy `h+1` steps past the initial
/// configuration, for `h+1 = 1, …, M`.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyTrajectory {
    /// Mean entropy per forecast step.
    pub mean: Vec<f64>,
    /// Cross-replication sample standard deviation per forecast step.
    pub sigma: Vec<f64>,
    /// Number of Monte Carlo replications `L`.
    pub n_replications: usize,
    /// Simulation horizon `M`.
    pub horizon: usize,
}

impl EntropyTrajectory {
    /// Entries as `(h, mean, sigma)` rows with `h` running from 1 to `M`.
    pub fn rows(&self) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        self.mean
            .iter()
            .zip(self.sigma.iter())
            .enumerate()
            .map(|(i, (&m, &s))| (i + 1, m, s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_minimal_matrix() {
        let traj = validate_trajectories(&[vec![1, 2], vec![2, 1]], 2).unwrap();
        assert_eq!(traj.n_individuals(), 2);
        assert_eq!(traj.n_times(), 2);
        assert_eq!(traj.n_communities(), 2);
        assert_eq!(traj.label(0, 1).one_based(), 2);
    }

    #[test]
    fn rejects_label_out_of_range() {
        let err = validate_trajectories(&[vec![1, 3]], 2).unwrap_err();
        assert!(matches!(err, ModelError::LabelOutOfRange { value: 3, .. }));
        let err = validate_trajectories(&[vec![0, 1]], 2).unwrap_err();
        assert!(matches!(err, ModelError::LabelOutOfRange { value: 0, .. }));
    }

    #[test]
    fn rejects_single_column() {
        let err = validate_trajectories(&[vec![1], vec![1]], 2).unwrap_err();
        assert!(matches!(err, ModelError::TooFewTimeSteps { n_times: 1 }));
    }

    #[test]
    fn rejects_empty_and_ragged() {
        assert!(matches!(
            validate_trajectories(&[], 2),
            Err(ModelError::EmptyMatrix)
        ));
        assert!(matches!(
            validate_trajectories(&[vec![1, 2], vec![1]], 2),
            Err(ModelError::NotRectangular { row: 1, .. })
        ));
    }

    #[test]
    fn attribute_validation_rejects_negative_and_nan() {
        assert!(AttributeObservations::validate(&[vec![0.0, 1.5]]).is_ok());
        assert!(matches!(
            AttributeObservations::validate(&[vec![-0.1, 1.0]]),
            Err(ModelError::InvalidAttribute { .. })
        ));
        assert!(matches!(
            AttributeObservations::validate(&[vec![f64::NAN, 1.0]]),
            Err(ModelError::InvalidAttribute { .. })
        ));
    }

    #[test]
    fn transition_matrix_checks_rows() {
        assert!(TransitionMatrix::new(vec![vec![0.5, 0.5], vec![0.3, 0.7]]).is_ok());
        assert!(matches!(
            TransitionMatrix::new(vec![vec![0.5, 0.6], vec![0.3, 0.7]]),
            Err(ModelError::NotStochastic { row: 0, .. })
        ));
        assert!(matches!(
            TransitionMatrix::new(vec![vec![1.5, -0.5], vec![0.3, 0.7]]),
            Err(ModelError::ProbabilityOutOfRange { .. })
        ));
    }

    #[test]
    fn segmented_chain_indexing() {
        let p1 = TransitionMatrix::identity(2);
        let p2 = TransitionMatrix::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let chain = SegmentedChain::new(vec![2, 5], vec![p1.clone(), p2.clone(), p1]).unwrap();
        assert_eq!(chain.segment_index(0), 0);
        assert_eq!(chain.segment_index(1), 0);
        assert_eq!(chain.segment_index(2), 1);
        assert_eq!(chain.segment_index(4), 1);
        assert_eq!(chain.segment_index(5), 2);
        assert_eq!(chain.segment_index(100), 2);
    }

    #[test]
    fn segmented_chain_rejects_bad_positions() {
        let p = TransitionMatrix::identity(2);
        assert!(SegmentedChain::new(vec![0], vec![p.clone(), p.clone()]).is_err());
        assert!(SegmentedChain::new(vec![3, 3], vec![p.clone(), p.clone(), p.clone()]).is_err());
        assert!(SegmentedChain::new(vec![3], vec![p.clone()]).is_err());
    }
}
