//! Constraint-intensity measurement, the intensity-to-correlation
//! heuristic, empirical correlation, and whole-design quality reports.

use serde::Serialize;
use thiserror::Error;

use crate::constraint::{bounds_violation, ConstraintError, Relation};
use crate::design::DesignSpec;
use crate::distributions::Distribution;
use crate::sampling::{verify_lhs, SampleError, SampleMatrix};

/// Slope of the near-linear link between constraint intensity and induced
/// correlation. Taken as a fixed constant, not re-fitted.
pub const GAMMA_RHO_SLOPE: f64 = 2.778;

/// The heuristic is calibrated for intensities up to this value; beyond it
/// predictions are flagged as extrapolated.
pub const GAMMA_HEURISTIC_RANGE: f64 = 0.3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiagnosticsError {
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
    #[error("intensity formula invalid: bound precondition fails ({detail})")]
    PreconditionFailed { detail: String },
    #[error("correlation needs columns of equal length >= 2, got {left} and {right}")]
    BadColumnLengths { left: usize, right: usize },
    #[error("correlation undefined: column {which} has zero variance")]
    ZeroVariance { which: usize },
    #[error(transparent)]
    Sample(#[from] SampleError),
}

/// Constraint intensity of a linked pair: the share of the bound rectangle
/// forbidden by the inequality. Zero when the supports do not overlap (the
/// constraint never binds); at most 0.5 whenever the bound precondition
/// holds.
pub fn gamma(
    left: &Distribution,
    right: &Distribution,
    rel: Relation,
) -> Result<f64, DiagnosticsError> {
    if let Some(detail) = bounds_violation(left, right, rel)? {
        return Err(DiagnosticsError::PreconditionFailed { detail });
    }
    let (ls, rs) = (left.support(), right.support());
    let leg = match rel {
        Relation::StrictlyLess => ls.upper - rs.lower,
        Relation::StrictlyGreater => rs.upper - ls.lower,
    };
    if leg <= 0.0 {
        return Ok(0.0);
    }
    let rectangle = (ls.upper - ls.lower) * (rs.upper - rs.lower);
    Ok(leg * leg / (2.0 * rectangle))
}

/// Correlation predicted from an intensity value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PredictedCorrelation {
    pub rho: f64,
    /// Set when the intensity exceeds the calibrated range of the heuristic.
    pub extrapolated: bool,
}

pub fn predicted_correlation(gamma: f64) -> PredictedCorrelation {
    debug_assert!(gamma >= 0.0);
    PredictedCorrelation { rho: GAMMA_RHO_SLOPE * gamma, extrapolated: gamma > GAMMA_HEURISTIC_RANGE }
}

/// Sample Pearson correlation coefficient.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, DiagnosticsError> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(DiagnosticsError::BadColumnLengths { left: xs.len(), right: ys.len() });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        return Err(DiagnosticsError::ZeroVariance { which: 1 });
    }
    if syy == 0.0 {
        return Err(DiagnosticsError::ZeroVariance { which: 2 });
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Kolmogorov-Smirnov statistic of a sample against a target marginal.
pub fn ks_statistic(column: &[f64], dist: &Distribution) -> f64 {
    let mut sorted = column.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = dist.cdf(x);
        d = d.max(((i + 1) as f64 / n - f).abs());
        d = d.max((f - i as f64 / n).abs());
    }
    d
}

/// Asymptotic Kolmogorov critical value at significance `alpha` for sample
/// size `n`: c(alpha)/sqrt(n) with c(alpha) = sqrt(-ln(alpha/2)/2).
pub fn ks_critical(alpha: f64, n: usize) -> f64 {
    (-0.5 * (alpha / 2.0).ln()).sqrt() / (n as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkReport {
    pub left: String,
    pub right: String,
    pub relation: String,
    /// Constraint intensity; absent (with a note) when not computable.
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_note: Option<String>,
    pub predicted_rho: Option<PredictedCorrelation>,
    /// Sample Pearson correlation of the two linked columns.
    pub empirical_rho: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColumnReport {
    pub name: String,
    /// True when the column occupies each equiprobable stratum exactly once.
    pub stratified: bool,
    /// KS statistic of the column against its target marginal.
    pub ks_statistic: f64,
}

/// Design-quality report: per-link intensity and correlation, per-column
/// stratification verdicts and marginal fit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsReport {
    pub n: usize,
    pub links: Vec<LinkReport>,
    pub columns: Vec<ColumnReport>,
}

pub fn report(m: &SampleMatrix, spec: &DesignSpec) -> Result<DiagnosticsReport, DiagnosticsError> {
    if m.p() != spec.variables().len() {
        return Err(DiagnosticsError::Sample(SampleError::ColumnMismatch {
            expected: spec.variables().len(),
            found: m.p(),
        }));
    }
    let stratified = verify_lhs(m, spec)?;
    let columns = spec
        .variables()
        .iter()
        .enumerate()
        .map(|(j, v)| ColumnReport {
            name: v.name().to_string(),
            stratified: stratified[j],
            ks_statistic: ks_statistic(m.column(j), v.dist()),
        })
        .collect();

    let links = spec
        .links()
        .iter()
        .map(|link| {
            let lv = &spec.variables()[link.left_index()];
            let rv = &spec.variables()[link.right_index()];
            let (g, note) = match gamma(lv.dist(), rv.dist(), link.relation()) {
                Ok(g) => (Some(g), None),
                Err(e) => (None, Some(e.to_string())),
            };
            LinkReport {
                left: lv.name().to_string(),
                right: rv.name().to_string(),
                relation: link.relation().symbol().to_string(),
                gamma: g,
                gamma_note: note,
                predicted_rho: g.map(predicted_correlation),
                empirical_rho: pearson(m.column(link.left_index()), m.column(link.right_index()))
                    .ok(),
            }
        })
        .collect();

    Ok(DiagnosticsReport { n: m.n(), links, columns })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(lo: f64, hi: f64) -> Distribution {
        Distribution::uniform(lo, hi).unwrap()
    }

    #[test]
    fn gamma_reported_values() {
        // exact rationals behind the reported percentages
        let cases = [
            (u(0.0, 1.0), u(0.0, 2.0), 0.25),
            (u(0.0, 1.0), u(0.0, 1.1), 5.0 / 11.0),
            (u(0.0, 1.0), u(0.0, 1.5), 1.0 / 3.0),
            (u(0.0, 5.0), u(0.0, 5.5), 5.0 / 11.0),
        ];
        for (l, r, want) in cases {
            let got = gamma(&l, &r, Relation::StrictlyLess).unwrap();
            assert!((got - want).abs() < 1e-12, "gamma({},{}) = {got}", l.describe(), r.describe());
        }
    }

    #[test]
    fn gamma_identical_bounds_is_half() {
        let g = gamma(&u(0.0, 1.0), &u(0.0, 1.0), Relation::StrictlyLess).unwrap();
        assert!((g - 0.5).abs() < 1e-15);
    }

    #[test]
    fn gamma_disjoint_supports_is_zero() {
        let g = gamma(&u(0.0, 1.0), &u(5.0, 6.0), Relation::StrictlyLess).unwrap();
        assert_eq!(g, 0.0);
    }

    #[test]
    fn gamma_needs_bounded_supports() {
        let n = Distribution::normal(0.0, 1.0).unwrap();
        assert!(matches!(
            gamma(&n, &u(0.0, 1.0), Relation::StrictlyLess),
            Err(DiagnosticsError::Constraint(ConstraintError::UnboundedSupport { .. }))
        ));
    }

    #[test]
    fn gamma_rejects_precondition_violation() {
        assert!(matches!(
            gamma(&u(0.0, 2.0), &u(0.0, 1.0), Relation::StrictlyLess),
            Err(DiagnosticsError::PreconditionFailed { .. })
        ));
    }

    #[test]
    fn predicted_correlation_values() {
        let p = predicted_correlation(0.15);
        assert!((p.rho - 0.4167).abs() < 1e-4);
        assert!(!p.extrapolated);

        assert_eq!(predicted_correlation(0.0).rho, 0.0);

        let p = predicted_correlation(0.1875);
        assert!((p.rho - 0.520875).abs() < 1e-12);

        assert!(predicted_correlation(0.31).extrapolated);
    }

    #[test]
    fn pearson_exact_cases() {
        let xs: Vec<f64> = (0..50).map(|i| i as f64).collect();
        let neg: Vec<f64> = xs.iter().map(|x| -x).collect();
        assert!((pearson(&xs, &xs).unwrap() - 1.0).abs() < 1e-12);
        assert!((pearson(&xs, &neg).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn pearson_error_cases() {
        assert!(pearson(&[1.0], &[1.0]).is_err());
        assert!(pearson(&[1.0, 2.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(matches!(
            pearson(&[1.0, 1.0], &[1.0, 2.0]),
            Err(DiagnosticsError::ZeroVariance { which: 1 })
        ));
    }

    #[test]
    fn ks_statistic_detects_shift() {
        let dist = u(0.0, 1.0);
        let good: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        assert!(ks_statistic(&good, &dist) < 0.001);
        let shifted: Vec<f64> = good.iter().map(|x| (x * 0.5).min(0.999)).collect();
        assert!(ks_statistic(&shifted, &dist) > 0.4);
    }

    #[test]
    fn ks_critical_reference_points() {
        // c(0.05) = 1.3581, c(0.01) = 1.6276
        assert!((ks_critical(0.05, 1) - 1.3581).abs() < 1e-4);
        assert!((ks_critical(0.01, 1) - 1.6276).abs() < 1e-4);
    }

    mod proptests {
        use super::*;
        use proptest::prelude::*;

        // random bound quadruples honoring the precondition for "<"
        fn eq5_bounds() -> impl Strategy<Value = (f64, f64, f64, f64)> {
            (-5.0..5.0f64, 0.1..10.0f64, 0.0..8.0f64, 0.0..8.0f64).prop_filter_map(
                "right interval must be non-empty",
                |(bl, wl, db, dh)| {
                    let hl = bl + wl;
                    let br = bl + db;
                    let hr = hl + dh;
                    (hr > br).then_some((bl, hl, br, hr))
                },
            )
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(256))]

            #[test]
            fn gamma_in_unit_half_interval((bl, hl, br, hr) in eq5_bounds()) {
                let l = Distribution::uniform(bl, hl).unwrap();
                let r = Distribution::uniform(br, hr).unwrap();
                let g = gamma(&l, &r, Relation::StrictlyLess).unwrap();
                prop_assert!((0.0..=0.5).contains(&g), "gamma = {g}");
            }

            #[test]
            fn gamma_mirror_symmetry((bl, hl, br, hr) in eq5_bounds()) {
                let l = Distribution::uniform(bl, hl).unwrap();
                let r = Distribution::uniform(br, hr).unwrap();
                let inc = gamma(&l, &r, Relation::StrictlyLess).unwrap();
                let dec = gamma(&r, &l, Relation::StrictlyGreater).unwrap();
                prop_assert_eq!(inc.to_bits(), dec.to_bits());
            }
        }
    }

    mod report_tests {
        use super::*;
        use crate::constraint::{clhs, ConstraintLink};
        use crate::design::{DesignSpec, Variable};
        use crate::sampling::{lhs, RngState};

        #[test]
        fn clhs_report_fig3a_setting() {
            let spec = DesignSpec::new(
                vec![Variable::new("x1", u(0.0, 1.0)), Variable::new("x2", u(0.0, 2.0))],
                vec![ConstraintLink::new(0, Relation::StrictlyLess)],
            )
            .unwrap();
            let m = clhs(&spec, 1000, &RngState::new(404), 1000).unwrap();
            let rep = report(&m, &spec).unwrap();
            assert_eq!(rep.links.len(), 1);
            let link = &rep.links[0];
            assert!((link.gamma.unwrap() - 0.25).abs() < 1e-12);
            let pred = link.predicted_rho.unwrap();
            assert!((pred.rho - 0.6945).abs() < 1e-10);
            assert!(!pred.extrapolated);
            assert!(link.empirical_rho.is_some());
            assert!(rep.columns.iter().all(|c| c.stratified));
        }

        #[test]
        fn unconstrained_report_has_no_link_section() {
            let spec =
                DesignSpec::new(vec![Variable::new("x1", u(0.0, 1.0))], vec![]).unwrap();
            let m = lhs(&spec, 100, &RngState::new(405)).unwrap();
            let rep = report(&m, &spec).unwrap();
            assert!(rep.links.is_empty());
            assert_eq!(rep.columns.len(), 1);
            assert!(rep.columns[0].stratified);
        }

        #[test]
        fn csrs_report_shows_distortion() {
            let spec = DesignSpec::new(
                vec![Variable::new("x1", u(0.0, 1.0)), Variable::new("x2", u(0.0, 2.0))],
                vec![ConstraintLink::new(0, Relation::StrictlyLess)],
            )
            .unwrap();
            let m = crate::csrs::csrs(&spec, 100_000, &RngState::new(406)).unwrap();
            let rep = report(&m, &spec).unwrap();
            let rho = rep.links[0].empirical_rho.unwrap();
            assert!((rho - 0.311).abs() < 0.01, "rho={rho}");
            assert!(!rep.columns[1].stratified);
        }
    }
}
