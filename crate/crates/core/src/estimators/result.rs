use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// How far the known convergence guarantees cover a given `(q, k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Validity {
    /// Asymptotically unbiased and L2-consistent.
    FullyConsistent,
    /// Asymptotically unbiased only.
    UnbiasedOnly,
    /// No guarantee applies.
    OutsideGuarantee,
}

impl Validity {
    pub fn as_str(self) -> &'static str {
        match self {
            Validity::FullyConsistent => "fully_consistent",
            Validity::UnbiasedOnly => "unbiased_only",
            Validity::OutsideGuarantee => "outside_guarantee",
        }
    }

    /// The weaker of two guarantees.
    pub fn weakest(self, other: Validity) -> Validity {
        self.max(other)
    }
}

impl std::fmt::Display for Validity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorResult {
    pub value: f64,
    /// Order `q`; absent for Shannon-type quantities.
    pub q: Option<f64>,
    pub k: usize,
    /// Size of the (first) sample.
    pub n: usize,
    pub m: usize,
    pub validity: Validity,
    pub warnings: Vec<String>,
    /// Points left out of the averages because they had fewer than `k`
    /// neighbors at nonzero distance.
    pub dropped_points: usize,
    /// Intermediate quantities (component entropies, mixture weight, ...).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub components: BTreeMap<String, f64>,
}

impl EstimatorResult {
    pub(crate) fn new(value: f64, q: Option<f64>, k: usize, n: usize, m: usize) -> Self {
        Self {
            value,
            q,
            k,
            n,
            m,
            validity: Validity::FullyConsistent,
            warnings: Vec::new(),
            dropped_points: 0,
            components: BTreeMap::new(),
        }
    }

    pub(crate) fn with_validity(mut self, validity: Validity, note: Option<String>) -> Self {
        self.validity = self.validity.weakest(validity);
        if let Some(note) = note {
            self.warn(note);
        }
        self
    }

    pub(crate) fn warn(&mut self, msg: impl Into<String>) {
        let msg = msg.into();
        if !self.warnings.contains(&msg) {
            self.warnings.push(msg);
        }
    }

    /// Folds validity, warnings and drop counts of a component estimate into `self`.
    pub(crate) fn absorb(&mut self, label: &str, other: &EstimatorResult) {
        self.validity = self.validity.weakest(other.validity);
        for w in &other.warnings {
            self.warn(format!("{label}: {w}"));
        }
        self.dropped_points += other.dropped_points;
        self.components.insert(label.to_string(), other.value);
    }
}
