//! Validated sampling designs: an ordered list of named marginals plus a
//! chain of pairwise inequality links between consecutive variables.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::constraint::{bounds_violation, ConstraintError, ConstraintLink};
use crate::distributions::Distribution;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecError {
    #[error("a design needs at least one variable")]
    NoVariables,
    #[error("variable name {name:?} is not usable (must be non-empty, without commas, quotes or line breaks)")]
    InvalidName { name: String },
    #[error("duplicate variable name {name:?}")]
    DuplicateName { name: String },
    #[error("links must join consecutive variables, got ({left}, {right})")]
    NonConsecutiveLink { left: usize, right: usize },
    #[error("link ({left}, {right}) is out of range for {p} variables")]
    LinkOutOfRange { left: usize, right: usize, p: usize },
    #[error("multiple links between variables {left} and {right}")]
    DuplicateLink { left: usize, right: usize },
    #[error("link {left} {rel} {right}: {source}")]
    LinkUnbounded { left: String, right: String, rel: &'static str, source: ConstraintError },
    #[error("link {left} {rel} {right}: {detail}")]
    LinkBounds { left: String, right: String, rel: &'static str, detail: String },
}

/// A named marginal, optionally tagged with a physical level (for example a
/// temperature) used when sample rows are read as piecewise-linear curves.
#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    name: String,
    dist: Distribution,
    level: Option<f64>,
}

impl Variable {
    pub fn new(name: impl Into<String>, dist: Distribution) -> Self {
        Self { name: name.into(), dist, level: None }
    }

    pub fn with_level(name: impl Into<String>, dist: Distribution, level: f64) -> Self {
        Self { name: name.into(), dist, level: Some(level) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dist(&self) -> &Distribution {
        &self.dist
    }

    pub fn level(&self) -> Option<f64> {
        self.level
    }
}

/// A validated design: construction fails unless variable names are unique,
/// links join consecutive in-range variables, and every linked pair
/// satisfies the bound-ordering precondition.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignSpec {
    variables: Vec<Variable>,
    links: Vec<ConstraintLink>,
    metadata: BTreeMap<String, String>,
}

impl DesignSpec {
    pub fn new(variables: Vec<Variable>, links: Vec<ConstraintLink>) -> Result<Self, SpecError> {
        Self::with_metadata(variables, links, BTreeMap::new())
    }

    pub fn with_metadata(
        variables: Vec<Variable>,
        links: Vec<ConstraintLink>,
        metadata: BTreeMap<String, String>,
    ) -> Result<Self, SpecError> {
        if variables.is_empty() {
            return Err(SpecError::NoVariables);
        }
        let mut seen = std::collections::BTreeSet::new();
        for v in &variables {
            if v.name.is_empty() || v.name.contains([',', '"', '\n', '\r']) {
                return Err(SpecError::InvalidName { name: v.name.clone() });
            }
            if !seen.insert(v.name.as_str()) {
                return Err(SpecError::DuplicateName { name: v.name.clone() });
            }
        }
        let p = variables.len();
        let mut left_seen = std::collections::BTreeSet::new();
        for link in &links {
            // 1-based indices in messages, matching the spec file format.
            let (l1, r1) = (link.left_index() + 1, link.right_index() + 1);
            if link.right_index() >= p {
                return Err(SpecError::LinkOutOfRange { left: l1, right: r1, p });
            }
            if !left_seen.insert(link.left_index()) {
                return Err(SpecError::DuplicateLink { left: l1, right: r1 });
            }
            let left = &variables[link.left_index()];
            let right = &variables[link.right_index()];
            let rel = link.relation();
            match bounds_violation(left.dist(), right.dist(), rel) {
                Ok(None) => {}
                Ok(Some(detail)) => {
                    return Err(SpecError::LinkBounds {
                        left: left.name.clone(),
                        right: right.name.clone(),
                        rel: rel.symbol(),
                        detail,
                    })
                }
                Err(source) => {
                    return Err(SpecError::LinkUnbounded {
                        left: left.name.clone(),
                        right: right.name.clone(),
                        rel: rel.symbol(),
                        source,
                    })
                }
            }
        }
        Ok(Self { variables, links, metadata })
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn links(&self) -> &[ConstraintLink] {
        &self.links
    }

    pub fn metadata(&self) -> &BTreeMap<String, String> {
        &self.metadata
    }

    pub fn variable_names(&self) -> Vec<String> {
        self.variables.iter().map(|v| v.name.clone()).collect()
    }

    /// The link whose right side is column `j`, if any.
    pub fn link_into(&self, j: usize) -> Option<&ConstraintLink> {
        self.links.iter().find(|l| l.right_index() == j)
    }
}
