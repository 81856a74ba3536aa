//! Unconstrained sample generation: simple random sampling and Latin
//! hypercube sampling, plus stratification verification.
//!
//! All randomness flows through [`RngState`], which derives one independent
//! ChaCha substream per (column, attempt) pair. Output is therefore
//! bit-identical across runs and platforms for a given seed, regardless of
//! evaluation order.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::design::DesignSpec;
use crate::distributions::Distribution;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SampleError {
    #[error("sample count must be at least 1")]
    EmptySample,
    #[error("matrix has {found} columns but the design describes {expected}")]
    ColumnMismatch { expected: usize, found: usize },
}

/// Deterministic RNG factory seeded once per run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngState {
    seed: u64,
}

/// Substream label spaces; columns and retry attempts never collide.
const STREAM_DRAW: u64 = 0;
const STREAM_PERMUTE: u64 = 1 << 62;
const STREAM_ROW: u64 = 1 << 63;

impl RngState {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn stream(&self, label: u64) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(label);
        rng
    }

    /// Substream that draws column `column` (0-based), `attempt` counting
    /// redraws of the same column.
    pub(crate) fn column_stream(&self, column: usize, attempt: u32) -> ChaCha12Rng {
        self.stream(STREAM_DRAW | ((attempt as u64) << 32) | column as u64)
    }

    /// Substream consumed by the permutation choices for column `column`.
    pub(crate) fn permute_stream(&self, column: usize) -> ChaCha12Rng {
        self.stream(STREAM_PERMUTE | column as u64)
    }

    /// Substream for conditional row draws of column `column`.
    pub(crate) fn conditional_stream(&self, column: usize) -> ChaCha12Rng {
        self.stream(STREAM_ROW | column as u64)
    }
}

/// An n-by-p matrix of realizations; row i is experiment i, column j
/// belongs to variable j. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl SampleMatrix {
    /// Assembles a matrix from per-variable columns of equal length.
    pub fn from_columns(names: Vec<String>, columns: Vec<Vec<f64>>) -> Self {
        assert_eq!(names.len(), columns.len(), "one name per column");
        if let Some(first) = columns.first() {
            assert!(columns.iter().all(|c| c.len() == first.len()), "ragged columns");
        }
        Self { names, columns }
    }

    /// Number of experiments (rows).
    pub fn n(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    /// Number of variables (columns).
    pub fn p(&self) -> usize {
        self.columns.len()
    }

    pub fn variable_names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.columns[col][row]
    }

    /// Values of row `i` in column order.
    pub fn row(&self, i: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[i]).collect()
    }
}

/// Uniform random permutation of `{1, 2, ..., n}` (Fisher-Yates).
pub fn random_permutation(n: usize, rng: &mut ChaCha12Rng) -> Result<Vec<usize>, SampleError> {
    if n == 0 {
        return Err(SampleError::EmptySample);
    }
    let mut perm: Vec<usize> = (1..=n).collect();
    perm.shuffle(rng);
    Ok(perm)
}

/// Uniform draw from the open interval (0,1).
fn open_unit(rng: &mut ChaCha12Rng) -> f64 {
    loop {
        let x: f64 = rng.random();
        if x > 0.0 {
            return x;
        }
    }
}

/// One column of a Latin hypercube sample: stratum `perm[i]` jittered by an
/// independent uniform, mapped through the inverse CDF. The probability
/// argument is kept strictly inside (0,1) so unbounded marginals never
/// yield infinite values.
pub(crate) fn lhs_column(dist: &Distribution, n: usize, rng: &mut ChaCha12Rng) -> Vec<f64> {
    let perm = random_permutation(n, rng).expect("n >= 1 checked by callers");
    let mut out = Vec::with_capacity(n);
    for &stratum in &perm {
        let u = loop {
            let xi = open_unit(rng);
            let u = (stratum as f64 - xi) / n as f64;
            if u > 0.0 && u < 1.0 {
                break u;
            }
        };
        out.push(dist.quantile(u).expect("u inside (0,1)"));
    }
    out
}

fn column_iid(dist: &Distribution, n: usize, rng: &mut ChaCha12Rng) -> Vec<f64> {
    (0..n)
        .map(|_| dist.quantile(open_unit(rng)).expect("u inside (0,1)"))
        .collect()
}

/// Simple random sampling: every entry drawn i.i.d. from its marginal,
/// columns mutually independent.
pub fn srs(spec: &DesignSpec, n: usize, rng: &RngState) -> Result<SampleMatrix, SampleError> {
    if n == 0 {
        return Err(SampleError::EmptySample);
    }
    let columns = spec
        .variables()
        .iter()
        .enumerate()
        .map(|(j, v)| column_iid(v.dist(), n, &mut rng.column_stream(j, 0)))
        .collect();
    Ok(SampleMatrix::from_columns(spec.variable_names(), columns))
}

/// Latin hypercube sampling: each column holds exactly one point per
/// equiprobable stratum of its marginal.
pub fn lhs(spec: &DesignSpec, n: usize, rng: &RngState) -> Result<SampleMatrix, SampleError> {
    if n == 0 {
        return Err(SampleError::EmptySample);
    }
    let columns = spec
        .variables()
        .iter()
        .enumerate()
        .map(|(j, v)| lhs_column(v.dist(), n, &mut rng.column_stream(j, 0)))
        .collect();
    Ok(SampleMatrix::from_columns(spec.variable_names(), columns))
}

/// Stratum index of `x` under `dist` with `n` strata, in `1..=n` when `x`
/// lands inside a stratum of positive CDF mass.
fn stratum_of(dist: &Distribution, n: usize, x: f64) -> i64 {
    (n as f64 * dist.cdf(x)).ceil() as i64
}

/// Per-column stratification check: column j passes iff its CDF-mapped
/// values occupy every one of the n equiprobable strata exactly once.
pub fn verify_lhs(m: &SampleMatrix, spec: &DesignSpec) -> Result<Vec<bool>, SampleError> {
    if m.p() != spec.variables().len() {
        return Err(SampleError::ColumnMismatch { expected: spec.variables().len(), found: m.p() });
    }
    let n = m.n();
    let verdicts = spec
        .variables()
        .iter()
        .enumerate()
        .map(|(j, v)| {
            let mut seen = vec![false; n];
            for &x in m.column(j) {
                let s = stratum_of(v.dist(), n, x);
                if s < 1 || s > n as i64 || seen[(s - 1) as usize] {
                    return false;
                }
                seen[(s - 1) as usize] = true;
            }
            seen.iter().all(|&b| b)
        })
        .collect();
    Ok(verdicts)
}
