//! Brute-force ground truth for small instances: enumerates permutations of
//! the right column outright. Deliberately naive so it stays independent of
//! the score-vector criterion it is used to validate; capped at n = 8.

use thiserror::Error;

use crate::constraint::Relation;

/// Largest column length the enumerator accepts (8! = 40320 permutations).
pub const MAX_ORACLE_N: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("oracle enumerates n! permutations and refuses n = {n} > {MAX_ORACLE_N}")]
    TooLarge { n: usize },
    #[error("columns have different lengths ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
}

fn check(left: &[f64], right: &[f64]) -> Result<(), OracleError> {
    if left.len() != right.len() {
        return Err(OracleError::LengthMismatch { left: left.len(), right: right.len() });
    }
    if left.len() > MAX_ORACLE_N {
        return Err(OracleError::TooLarge { n: left.len() });
    }
    Ok(())
}

/// Visits every permutation of 0..n (Heap's algorithm). Stops early when
/// the visitor returns true.
fn for_each_permutation(n: usize, mut visit: impl FnMut(&[usize]) -> bool) {
    let mut idx: Vec<usize> = (0..n).collect();
    if visit(&idx) {
        return;
    }
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                idx.swap(0, i);
            } else {
                idx.swap(c[i], i);
            }
            if visit(&idx) {
                return;
            }
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

fn satisfies(left: &[f64], right: &[f64], perm: &[usize], rel: Relation) -> bool {
    perm.iter().enumerate().all(|(i, &k)| rel.row_ok(left[i], right[k]))
}

/// True iff some permutation of `right` honors the relation row-wise
/// against `left`. Exits on the first witness.
pub fn brute_force_exists(left: &[f64], right: &[f64], rel: Relation) -> Result<bool, OracleError> {
    check(left, right)?;
    let mut found = false;
    for_each_permutation(left.len(), |perm| {
        found = satisfies(left, right, perm, rel);
        found
    });
    Ok(found)
}

/// Exact number of satisfying permutations.
pub fn count_satisfying_permutations(
    left: &[f64],
    right: &[f64],
    rel: Relation,
) -> Result<usize, OracleError> {
    check(left, right)?;
    let mut count = 0;
    for_each_permutation(left.len(), |perm| {
        if satisfies(left, right, perm, rel) {
            count += 1;
        }
        false
    });
    Ok(count)
}
