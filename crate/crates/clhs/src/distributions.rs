//! One-dimensional marginal distributions with invertible continuous CDFs.
//!
//! Every marginal exposes three operations: `quantile` (inverse CDF),
//! `cdf`, and `support`. Samplers draw values exclusively through
//! `quantile`, so the quantile is never evaluated at 0 or 1 and unbounded
//! marginals never produce infinite values.

use thiserror::Error;

/// Error raised for invalid parameters or out-of-domain arguments.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistError {
    #[error("invalid distribution parameters: {0}")]
    InvalidParameters(String),
    #[error("quantile argument must lie strictly inside (0,1), got {0}")]
    QuantileOutOfDomain(f64),
}

/// Support interval of a marginal. Unbounded ends are `-inf` / `+inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Support {
    pub lower: f64,
    pub upper: f64,
}

impl Support {
    pub fn is_bounded(&self) -> bool {
        self.lower.is_finite() && self.upper.is_finite()
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Uniform { lower: f64, upper: f64 },
    Normal { mean: f64, sd: f64 },
    /// Cached standard-normal CDF values at the truncation bounds.
    TruncNormal { mean: f64, sd: f64, lower: f64, upper: f64, cdf_lo: f64, cdf_hi: f64 },
}

/// A one-dimensional marginal distribution.
///
/// Instances are immutable after construction and all operations are pure,
/// so values can be shared freely across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    kind: Kind,
}

impl Distribution {
    /// Continuous uniform on `[lower, upper]`, `lower < upper` strictly.
    pub fn uniform(lower: f64, upper: f64) -> Result<Self, DistError> {
        if !lower.is_finite() || !upper.is_finite() || lower >= upper {
            return Err(DistError::InvalidParameters(format!(
                "uniform requires finite min < max, got min={lower}, max={upper}"
            )));
        }
        Ok(Self { kind: Kind::Uniform { lower, upper } })
    }

    /// Normal with mean `mean` and standard deviation `sd > 0`.
    pub fn normal(mean: f64, sd: f64) -> Result<Self, DistError> {
        if !mean.is_finite() || !sd.is_finite() || sd <= 0.0 {
            return Err(DistError::InvalidParameters(format!(
                "normal requires finite mean and sd > 0, got mean={mean}, sd={sd}"
            )));
        }
        Ok(Self { kind: Kind::Normal { mean, sd } })
    }

    /// Normal restricted to `[lower, upper]` and renormalized.
    ///
    /// The truncation interval must carry non-negligible probability mass
    /// under the parent normal; otherwise the renormalized CDF is not
    /// computable at double precision and construction fails.
    pub fn truncated_normal(mean: f64, sd: f64, lower: f64, upper: f64) -> Result<Self, DistError> {
        if !mean.is_finite() || !sd.is_finite() || sd <= 0.0 {
            return Err(DistError::InvalidParameters(format!(
                "truncnorm requires finite mean and sd > 0, got mean={mean}, sd={sd}"
            )));
        }
        if !lower.is_finite() || !upper.is_finite() || lower >= upper {
            return Err(DistError::InvalidParameters(format!(
                "truncnorm requires finite min < max, got min={lower}, max={upper}"
            )));
        }
        let cdf_lo = standard_normal_cdf((lower - mean) / sd);
        let cdf_hi = standard_normal_cdf((upper - mean) / sd);
        if cdf_hi - cdf_lo < 1e-10 {
            return Err(DistError::InvalidParameters(format!(
                "truncnorm interval [{lower}, {upper}] carries negligible probability mass"
            )));
        }
        Ok(Self { kind: Kind::TruncNormal { mean, sd, lower, upper, cdf_lo, cdf_hi } })
    }

    /// Inverse CDF. Strictly increasing on `(0,1)`; `u` outside is an error.
    pub fn quantile(&self, u: f64) -> Result<f64, DistError> {
        if !(u > 0.0 && u < 1.0) {
            return Err(DistError::QuantileOutOfDomain(u));
        }
        Ok(match self.kind {
            Kind::Uniform { lower, upper } => lower + u * (upper - lower),
            Kind::Normal { mean, sd } => mean + sd * standard_normal_quantile(u),
            Kind::TruncNormal { mean, sd, lower, upper, cdf_lo, cdf_hi } => {
                let p = cdf_lo + u * (cdf_hi - cdf_lo);
                let x = mean + sd * standard_normal_quantile(p);
                x.clamp(lower, upper)
            }
        })
    }

    /// CDF. Monotone nondecreasing; 0 at or below the lower support bound,
    /// 1 at or above the upper.
    pub fn cdf(&self, x: f64) -> f64 {
        match self.kind {
            Kind::Uniform { lower, upper } => ((x - lower) / (upper - lower)).clamp(0.0, 1.0),
            Kind::Normal { mean, sd } => standard_normal_cdf((x - mean) / sd),
            Kind::TruncNormal { mean, sd, lower, upper, cdf_lo, cdf_hi } => {
                if x <= lower {
                    0.0
                } else if x >= upper {
                    1.0
                } else {
                    ((standard_normal_cdf((x - mean) / sd) - cdf_lo) / (cdf_hi - cdf_lo))
                        .clamp(0.0, 1.0)
                }
            }
        }
    }

    pub fn support(&self) -> Support {
        match self.kind {
            Kind::Uniform { lower, upper } => Support { lower, upper },
            Kind::Normal { .. } => Support { lower: f64::NEG_INFINITY, upper: f64::INFINITY },
            Kind::TruncNormal { lower, upper, .. } => Support { lower, upper },
        }
    }

    /// Short human-readable description, used in error messages and reports.
    pub fn describe(&self) -> String {
        match self.kind {
            Kind::Uniform { lower, upper } => format!("uniform[{lower}, {upper}]"),
            Kind::Normal { mean, sd } => format!("normal(mean={mean}, sd={sd})"),
            Kind::TruncNormal { mean, sd, lower, upper, .. } => {
                format!("truncnorm(mean={mean}, sd={sd}, [{lower}, {upper}])")
            }
        }
    }

    /// Parameters in wire order, used by the design-spec serializer.
    pub(crate) fn wire_parts(&self) -> WireParts {
        match self.kind {
            Kind::Uniform { lower, upper } => WireParts::Uniform { min: lower, max: upper },
            Kind::Normal { mean, sd } => WireParts::Normal { mean, sd },
            Kind::TruncNormal { mean, sd, lower, upper, .. } => {
                WireParts::TruncNorm { mean, sd, min: lower, max: upper }
            }
        }
    }
}

pub(crate) enum WireParts {
    Uniform { min: f64, max: f64 },
    Normal { mean: f64, sd: f64 },
    TruncNorm { mean: f64, sd: f64, min: f64, max: f64 },
}

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const INV_SQRT_PI: f64 = 0.564189583547756286948079451560772586_f64; // 1/sqrt(pi)
const INV_SQRT_2PI: f64 = 0.398942280401432677939946059934381868_f64; // 1/sqrt(2*pi)

/// Standard normal CDF via erfc: Phi(z) = erfc(-z / sqrt(2)) / 2.
pub fn standard_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

fn standard_normal_pdf(z: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Complementary error function, accurate to ~1e-15 absolute.
///
/// Maclaurin series of erf for |x| <= 3 (no cancellation trouble there),
/// Lentz continued fraction for the tail.
fn erfc(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x <= 3.0 {
        1.0 - erf_series(x)
    } else {
        erfc_continued_fraction(x)
    }
}

/// erf via its Maclaurin series; intended for |x| <= 3.
fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    for k in 1..200 {
        let k = k as f64;
        term *= -x2 / k;
        let contrib = term / (2.0 * k + 1.0);
        sum += contrib;
        if contrib.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    2.0 * INV_SQRT_PI * sum
}

/// erfc(x) = exp(-x^2)/sqrt(pi) * K where K is the Legendre continued
/// fraction 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))), evaluated with the
/// modified Lentz algorithm. Converges quickly for x >= 3.
fn erfc_continued_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = TINY;
    let mut c = f;
    let mut d = 0.0;
    for n in 0..300 {
        let (a, b) = if n == 0 { (1.0, x) } else { (n as f64 / 2.0, x) };
        d = b + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-17 {
            break;
        }
    }
    INV_SQRT_PI * (-x * x).exp() * f
}

/// Standard normal quantile: Acklam's rational approximation (relative
/// error < 1.15e-9) polished with one Newton step against the CDF above.
pub fn standard_normal_quantile(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);

    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    let x = if p < P_LOW {
        // the rational form itself goes negative in the lower tail
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p > 1.0 - P_LOW {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };

    // One Newton step: with a 1.15e-9 starting error this lands at
    // essentially machine precision.
    let pdf = standard_normal_pdf(x);
    if pdf > 0.0 {
        x - (standard_normal_cdf(x) - p) / pdf
    } else {
        x
    }
}
