//! Compatibility matrices, the permutation-existence criterion, the greedy
//! constrained-permutation algorithm, and the sequential multivariate chain
//! with retry.
//!
//! The driving idea: a chain of pairwise inequality constraints can be
//! honored by permuting columns of an ordinary Latin hypercube sample, and
//! permutation preserves each column's stratification. Whether a satisfying
//! permutation exists is decidable from the score vector alone.

use rand::Rng;
use thiserror::Error;

use crate::design::DesignSpec;
use crate::distributions::Distribution;
use crate::sampling::{lhs_column, RngState, SampleError, SampleMatrix};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConstraintError {
    #[error("columns have different lengths ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("columns must hold at least one element")]
    EmptyColumns,
    #[error("constraint requires bounded marginals: {dist} has unbounded support")]
    UnboundedSupport { dist: String },
    #[error("bound precondition violated: {detail}")]
    BoundsPrecondition { detail: String },
    #[error("no satisfying permutation exists (criterion slack {slack})")]
    NoSatisfyingPermutation { slack: i64 },
    #[error(
        "column {column} ({variable}): existence criterion still failing after {attempts} fresh \
         draws; last criterion slack {last_slack}, link intensity gamma = {gamma:.4}"
    )]
    RetriesExhausted { column: usize, variable: String, attempts: u32, last_slack: i64, gamma: f64 },
    #[error("internal error: permutation search dead-ended although the criterion held")]
    GreedyDeadEnd,
    #[error("internal error: permuted column failed the final row-wise check")]
    FinalCheckFailed,
    #[error(transparent)]
    Sample(#[from] SampleError),
}

/// Direction of a pairwise inequality between a left and a right variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    /// left < right in every row.
    StrictlyLess,
    /// left > right in every row.
    StrictlyGreater,
}

impl Relation {
    /// Whether a (left, right) value pair honors the relation. Ties violate.
    #[inline]
    pub fn row_ok(self, left: f64, right: f64) -> bool {
        match self {
            Relation::StrictlyLess => right > left,
            Relation::StrictlyGreater => right < left,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::StrictlyLess => "<",
            Relation::StrictlyGreater => ">",
        }
    }
}

/// An inequality between two consecutive variables of a design.
/// Indices are 0-based columns; `right_index == left_index + 1` always.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConstraintLink {
    left_index: usize,
    relation: Relation,
}

impl ConstraintLink {
    /// Link between column `left_index` and the one directly after it.
    pub fn new(left_index: usize, relation: Relation) -> Self {
        Self { left_index, relation }
    }

    pub fn left_index(&self) -> usize {
        self.left_index
    }

    pub fn right_index(&self) -> usize {
        self.left_index + 1
    }

    pub fn relation(&self) -> Relation {
        self.relation
    }
}

/// Binary n-by-n matrix: entry (i, j) records whether element i of the
/// right column and element j of the left column satisfy the relation.
/// The constraint is honored row-wise iff the diagonal is all ones.
#[derive(Debug, Clone, PartialEq)]
pub struct CompatibilityMatrix {
    n: usize,
    entries: Vec<bool>, // row-major
}

impl CompatibilityMatrix {
    pub fn new(left: &[f64], right: &[f64], rel: Relation) -> Result<Self, ConstraintError> {
        if left.len() != right.len() {
            return Err(ConstraintError::LengthMismatch { left: left.len(), right: right.len() });
        }
        if left.is_empty() {
            return Err(ConstraintError::EmptyColumns);
        }
        let n = left.len();
        let mut entries = Vec::with_capacity(n * n);
        for &r in right {
            for &l in left {
                entries.push(rel.row_ok(l, r));
            }
        }
        Ok(Self { n, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// c_ij: row i compares right element i against left element j.
    pub fn entry(&self, i: usize, j: usize) -> bool {
        self.entries[i * self.n + j]
    }

    pub fn diagonal_all_ones(&self) -> bool {
        (0..self.n).all(|i| self.entry(i, i))
    }

    /// Row i as 0/1 values, mostly for display and golden tests.
    pub fn row(&self, i: usize) -> Vec<u8> {
        (0..self.n).map(|j| self.entry(i, j) as u8).collect()
    }
}

/// Row sums of a compatibility matrix and their ascending sort.
/// `scores()[i]` counts the left elements compatible with right element i.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoreVector {
    scores: Vec<usize>,
    sorted: Vec<usize>,
}

impl ScoreVector {
    pub fn from_matrix(c: &CompatibilityMatrix) -> Self {
        let scores: Vec<usize> =
            (0..c.n()).map(|i| (0..c.n()).filter(|&j| c.entry(i, j)).count()).collect();
        Self::from_scores(scores)
    }

    /// Same scores computed by rank counting on the sorted left column;
    /// avoids materializing the n-by-n matrix for large samples.
    pub fn from_columns(left: &[f64], right: &[f64], rel: Relation) -> Result<Self, ConstraintError> {
        if left.len() != right.len() {
            return Err(ConstraintError::LengthMismatch { left: left.len(), right: right.len() });
        }
        if left.is_empty() {
            return Err(ConstraintError::EmptyColumns);
        }
        let mut sorted_left = left.to_vec();
        sorted_left.sort_by(f64::total_cmp);
        let scores = right
            .iter()
            .map(|&r| match rel {
                Relation::StrictlyLess => sorted_left.partition_point(|&l| l < r),
                Relation::StrictlyGreater => {
                    sorted_left.len() - sorted_left.partition_point(|&l| l <= r)
                }
            })
            .collect();
        Ok(Self::from_scores(scores))
    }

    fn from_scores(scores: Vec<usize>) -> Self {
        let mut sorted = scores.clone();
        sorted.sort_unstable();
        Self { scores, sorted }
    }

    /// S, in right-column row order.
    pub fn scores(&self) -> &[usize] {
        &self.scores
    }

    /// S sorted ascending.
    pub fn sorted(&self) -> &[usize] {
        &self.sorted
    }

    /// min over i of (sorted score i - i), with i counted from 1.
    /// Nonnegative slack means a satisfying permutation exists.
    pub fn slack(&self) -> i64 {
        self.sorted
            .iter()
            .enumerate()
            .map(|(i, &s)| s as i64 - (i as i64 + 1))
            .min()
            .unwrap_or(0)
    }
}

/// The permutation-existence criterion: true iff some permutation of the
/// right column honors the relation row-wise against the left column.
pub fn existence_criterion(s: &ScoreVector) -> bool {
    s.slack() >= 0
}

/// Checks the bound ordering a constrained pair must satisfy: for an
/// increasing constraint the left bounds may not exceed the right bounds
/// (mirrored for a decreasing constraint). Returns the failed inequality,
/// or `None` when the precondition holds.
pub fn bounds_violation(
    left: &Distribution,
    right: &Distribution,
    rel: Relation,
) -> Result<Option<String>, ConstraintError> {
    for d in [left, right] {
        if !d.support().is_bounded() {
            return Err(ConstraintError::UnboundedSupport { dist: d.describe() });
        }
    }
    let (ls, rs) = (left.support(), right.support());
    let failure = match rel {
        Relation::StrictlyLess => {
            if ls.lower > rs.lower {
                Some(format!(
                    "need lower(left) <= lower(right), got {} > {}",
                    ls.lower, rs.lower
                ))
            } else if ls.upper > rs.upper {
                Some(format!(
                    "need upper(left) <= upper(right), got {} > {}",
                    ls.upper, rs.upper
                ))
            } else {
                None
            }
        }
        Relation::StrictlyGreater => {
            if ls.lower < rs.lower {
                Some(format!(
                    "need lower(left) >= lower(right), got {} < {}",
                    ls.lower, rs.lower
                ))
            } else if ls.upper < rs.upper {
                Some(format!(
                    "need upper(left) >= upper(right), got {} < {}",
                    ls.upper, rs.upper
                ))
            } else {
                None
            }
        }
    };
    Ok(failure)
}

/// True iff the bound-ordering precondition holds. Errors when either
/// marginal has unbounded support.
pub fn bounds_precondition(
    left: &Distribution,
    right: &Distribution,
    rel: Relation,
) -> Result<bool, ConstraintError> {
    Ok(bounds_violation(left, right, rel)?.is_none())
}

/// Fenwick tree over 0..n with unit weights; supports prefix counts,
/// removal, and rank selection in O(log n).
struct Fenwick {
    tree: Vec<usize>,
}

impl Fenwick {
    fn with_ones(n: usize) -> Self {
        let mut tree = vec![0usize; n + 1];
        for i in 1..=n {
            tree[i] += 1;
            let j = i + (i & i.wrapping_neg());
            if j <= n {
                tree[j] += tree[i];
            }
        }
        Self { tree }
    }

    /// Count of live positions in [0, i).
    fn prefix(&self, mut i: usize) -> usize {
        let mut acc = 0;
        while i > 0 {
            acc += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        acc
    }

    fn remove(&mut self, pos: usize) {
        let n = self.tree.len() - 1;
        let mut i = pos + 1;
        while i <= n {
            self.tree[i] -= 1;
            i += i & i.wrapping_neg();
        }
    }

    /// Smallest position whose 1-based live rank equals `rank`.
    fn select(&self, mut rank: usize) -> usize {
        let n = self.tree.len() - 1;
        let mut pos = 0;
        let mut step = n.next_power_of_two();
        while step > 0 {
            let next = pos + step;
            if next <= n && self.tree[next] < rank {
                rank -= self.tree[next];
                pos = next;
            }
            step >>= 1;
        }
        pos // 0-based index of the selected element
    }
}

/// Permutes the right column so that every row honors the relation against
/// the left column, which stays untouched.
///
/// Left elements are treated hardest-first (the reverse-ordered left column
/// for an increasing constraint, ascending for a decreasing one; ties keep
/// original order). Each gets a uniformly random choice among the still
/// available compatible right elements. With a nonnegative criterion slack
/// this never dead-ends.
pub fn permute_to_satisfy<R: Rng>(
    left: &[f64],
    right: &[f64],
    rel: Relation,
    rng: &mut R,
) -> Result<Vec<f64>, ConstraintError> {
    let scores = ScoreVector::from_columns(left, right, rel)?;
    if !existence_criterion(&scores) {
        return Err(ConstraintError::NoSatisfyingPermutation { slack: scores.slack() });
    }

    let n = left.len();
    // Right elements sorted ascending by value; compatible candidates for a
    // given left value always form a contiguous window of this order.
    let mut by_value: Vec<usize> = (0..n).collect();
    by_value.sort_by(|&a, &b| right[a].total_cmp(&right[b]));
    let sorted_vals: Vec<f64> = by_value.iter().map(|&i| right[i]).collect();

    let mut order: Vec<usize> = (0..n).collect();
    match rel {
        Relation::StrictlyLess => order.sort_by(|&a, &b| left[b].total_cmp(&left[a])),
        Relation::StrictlyGreater => order.sort_by(|&a, &b| left[a].total_cmp(&left[b])),
    }

    let mut live = Fenwick::with_ones(n);
    let mut out = vec![0.0f64; n];
    for &row in &order {
        let lv = left[row];
        let (win_lo, win_hi) = match rel {
            Relation::StrictlyLess => (sorted_vals.partition_point(|&v| v <= lv), n),
            Relation::StrictlyGreater => (0, sorted_vals.partition_point(|&v| v < lv)),
        };
        let below = live.prefix(win_lo);
        let available = live.prefix(win_hi) - below;
        if available == 0 {
            return Err(ConstraintError::GreedyDeadEnd);
        }
        let pick = rng.random_range(0..available);
        let pos = live.select(below + pick + 1);
        live.remove(pos);
        out[row] = right[by_value[pos]];
    }

    // closing check: the new pairing must honor the relation in every row
    if !(0..n).all(|i| rel.row_ok(left[i], out[i])) {
        return Err(ConstraintError::FinalCheckFailed);
    }
    Ok(out)
}

/// Constrained Latin hypercube sampling over a whole design.
///
/// Column 1 is a fresh LHS column left unchanged. Each later column is
/// drawn as a fresh LHS column, redrawn up to `max_retries` times until the
/// existence criterion against the (already constrained) previous column
/// holds, then permuted into place. Columns without an incoming link are
/// plain LHS columns.
pub fn clhs(
    spec: &DesignSpec,
    n: usize,
    rng: &RngState,
    max_retries: u32,
) -> Result<SampleMatrix, ConstraintError> {
    if n == 0 {
        return Err(ConstraintError::Sample(SampleError::EmptySample));
    }
    // Bound preconditions re-checked before any sampling.
    for link in spec.links() {
        let left = spec.variables()[link.left_index()].dist();
        let right = spec.variables()[link.right_index()].dist();
        if let Some(detail) = bounds_violation(left, right, link.relation())? {
            return Err(ConstraintError::BoundsPrecondition { detail });
        }
    }

    let p = spec.variables().len();
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(p);
    for j in 0..p {
        let dist = spec.variables()[j].dist();
        let link = spec.link_into(j);
        match link {
            None => columns.push(lhs_column(dist, n, &mut rng.column_stream(j, 0))),
            Some(link) => {
                let prev = &columns[j - 1];
                let rel = link.relation();
                let mut accepted = None;
                let mut last_slack = 0i64;
                for attempt in 0..max_retries {
                    let candidate = lhs_column(dist, n, &mut rng.column_stream(j, attempt));
                    let scores = ScoreVector::from_columns(prev, &candidate, rel)?;
                    last_slack = scores.slack();
                    if last_slack >= 0 {
                        accepted = Some(candidate);
                        break;
                    }
                }
                let candidate = accepted.ok_or_else(|| {
                    let left_dist = spec.variables()[j - 1].dist();
                    let gamma = crate::diagnostics::gamma(left_dist, dist, rel)
                        .unwrap_or(f64::NAN);
                    ConstraintError::RetriesExhausted {
                        column: j + 1,
                        variable: spec.variables()[j].name().to_string(),
                        attempts: max_retries,
                        last_slack,
                        gamma,
                    }
                })?;
                let permuted =
                    permute_to_satisfy(prev, &candidate, rel, &mut rng.permute_stream(j))?;
                columns.push(permuted);
            }
        }
    }

    for link in spec.links() {
        let l = &columns[link.left_index()];
        let r = &columns[link.right_index()];
        if !(0..n).all(|i| link.relation().row_ok(l[i], r[i])) {
            return Err(ConstraintError::FinalCheckFailed);
        }
    }
    Ok(SampleMatrix::from_columns(spec.variable_names(), columns))
}
