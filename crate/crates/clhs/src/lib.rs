//! Latin hypercube designs under chains of pairwise inequality constraints.
//!
//! The library generates experiment designs where consecutive variables are
//! ordered (`x1 < x2 < ...`, or decreasing) in every row while each
//! variable keeps its exact one-dimensional stratification. It also ships
//! the two baselines the constrained construction is measured against
//! (plain Latin hypercube and sequential truncated sampling), an intensity
//! measure for how severe a constraint is, and a brute-force oracle for
//! desk-scale verification.
//!
//! ```
//! use clhs::{clhs, parse_design_spec, RngState};
//!
//! let spec = parse_design_spec(r#"{
//!     "variables": [
//!         {"name": "x1", "dist": "uniform", "min": 0, "max": 1},
//!         {"name": "x2", "dist": "uniform", "min": 0, "max": 2}
//!     ],
//!     "links": [{"left": 1, "right": 2, "relation": "<"}]
//! }"#).unwrap();
//! let design = clhs(&spec, 100, &RngState::new(42), 1000).unwrap();
//! assert!((0..100).all(|i| design.value(i, 0) < design.value(i, 1)));
//! ```

pub mod constraint;
pub mod csrs;
pub mod design;
pub mod diagnostics;
pub mod distributions;
pub mod io;
pub mod oracle;
pub mod sampling;

pub use constraint::{
    bounds_precondition, clhs, existence_criterion, permute_to_satisfy, CompatibilityMatrix,
    ConstraintError, ConstraintLink, Relation, ScoreVector,
};
pub use csrs::{csrs, CsrsError};
pub use design::{DesignSpec, SpecError, Variable};
pub use diagnostics::{
    gamma, pearson, predicted_correlation, report, DiagnosticsReport, GAMMA_RHO_SLOPE,
};
pub use distributions::{DistError, Distribution, Support};
pub use io::{
    interpolate_curve, parse_design_spec, read_samples_auto, read_samples_csv, read_samples_json,
    serialize_design_spec, write_samples, CurveTable, FormatError, SampleFormat,
};
pub use oracle::{brute_force_exists, count_satisfying_permutations, OracleError};
pub use sampling::{lhs, random_permutation, srs, verify_lhs, RngState, SampleError, SampleMatrix};
