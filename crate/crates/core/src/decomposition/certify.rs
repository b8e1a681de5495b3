use super::model::LhvLhsModel;
use super::search::{search_lhs_bounded, InfeasibilityTrace, SearchOutcome};
use crate::boxes::{steering_functional, CorrelationBox, MeasurementSet};
use crate::error::{Error, Result};
use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

/// Violation of the steering inequality beyond this margin counts as witnessed.
pub const WITNESS_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    /// The steering functional exceeds its LHS bound.
    WitnessedSteerable,
    /// An LHV-LHS model with at most `d_A` hidden values exists.
    ClassicalAtDimension,
    /// No model with `d_A` values, but one with more.
    Superunsteerable,
    Undecided,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::WitnessedSteerable => "WITNESSED_STEERABLE",
            Verdict::ClassicalAtDimension => "CLASSICAL_AT_DIMENSION",
            Verdict::Superunsteerable => "SUPERUNSTEERABLE",
            Verdict::Undecided => "UNDECIDED",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub verdict: Verdict,
    pub d_a: usize,
    pub functional: f64,
    /// For `CLASSICAL_AT_DIMENSION` a model with `d_A` values; for
    /// `SUPERUNSTEERABLE` one with more.
    pub model: Option<LhvLhsModel>,
    /// Cases ruled out at dimension `d_A`.
    pub trace: InfeasibilityTrace,
}

impl Serialize for Certificate {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(7))?;
        map.serialize_entry("verdict", &self.verdict)?;
        map.serialize_entry("d_A", &self.d_a)?;
        map.serialize_entry("functional", &self.functional)?;
        map.serialize_entry("model", &self.model)?;
        map.serialize_entry("trace", &self.trace.cases)?;
        map.serialize_entry("exhaustive", &self.trace.exhaustive)?;
        map.serialize_entry("uniform_alice_marginals", &self.trace.uniform_alice_marginals)?;
        map.end()
    }
}

/// Classifies an `n`-setting box against a hidden-variable dimension `d_a`,
/// with Bob measuring the Pauli observables.
pub fn certify_quantumness(target: &CorrelationBox, n: usize, d_a: usize) -> Result<Certificate> {
    certify_quantumness_with_margin(target, n, d_a, WITNESS_MARGIN)
}

/// [`certify_quantumness`] with a custom margin on the steering functional.
pub fn certify_quantumness_with_margin(
    target: &CorrelationBox,
    n: usize,
    d_a: usize,
    margin: f64,
) -> Result<Certificate> {
    if target.n() != n {
        return Err(Error::DimensionMismatch(format!("box has n = {}, expected {n}", target.n())));
    }
    let bob = MeasurementSet::pauli(target.n())?;
    let functional = steering_functional(target);
    if functional > 1.0 + margin {
        return Ok(Certificate {
            verdict: Verdict::WitnessedSteerable,
            d_a,
            functional,
            model: None,
            trace: InfeasibilityTrace {
                uniform_alice_marginals: target.has_uniform_alice_marginals(1e-12),
                ..Default::default()
            },
        });
    }
    let full = 1usize << target.n();
    let (verdict, model, trace) = match search_lhs_bounded(target, &bob, d_a)? {
        SearchOutcome::Feasible { model, trace, .. } => (Verdict::ClassicalAtDimension, Some(model), trace),
        SearchOutcome::Infeasible(trace) if d_a < full => match search_lhs_bounded(target, &bob, full)? {
            SearchOutcome::Feasible { model, .. } => (Verdict::Superunsteerable, Some(model), trace),
            _ => (Verdict::Undecided, None, trace),
        },
        SearchOutcome::Infeasible(trace) | SearchOutcome::Undecided(trace) => (Verdict::Undecided, None, trace),
    };
    Ok(Certificate {
        verdict,
        d_a,
        functional,
        model,
        trace,
    })
}
