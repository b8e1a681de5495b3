//! Local-hidden-variable / local-hidden-state models and their two explicit
//! constructions for the separable remainders.

use super::splits::{canonical_split_2set, canonical_split_3set};
use crate::boxes::{box_from_state, dot, CorrelationBox, MeasurementSet};
use crate::error::{Error, Result};
use crate::quantum::matrix::{bloch_vector, StateVector};
use crate::quantum::BellDiagonalParams;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Slack allowed on weights, table entries and Bloch norms.
pub const MODEL_SLACK: f64 = 1e-10;

/// `p(ab|xy) = Σ_λ p(λ) P(a|x,λ) P(b|y;ρ_λ)` with qubit states `ρ_λ` given
/// by Bloch vectors and Bob measuring `bob_directions`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "ModelJson", try_from = "ModelJson")]
pub struct LhvLhsModel {
    pub weights: Vec<f64>,
    /// `alice_tables[λ][x] = [P(0|x,λ), P(1|x,λ)]`.
    pub alice_tables: Vec<Vec<[f64; 2]>>,
    pub bob_states: Vec<[f64; 3]>,
    pub bob_directions: MeasurementSet,
}

#[derive(Serialize, Deserialize)]
struct ModelJson {
    dimension: usize,
    weights: Vec<f64>,
    alice_tables: Vec<Vec<[f64; 2]>>,
    bob_states: Vec<[f64; 3]>,
    bob_directions: MeasurementSet,
}

impl From<LhvLhsModel> for ModelJson {
    fn from(m: LhvLhsModel) -> Self {
        ModelJson {
            dimension: m.dimension(),
            weights: m.weights,
            alice_tables: m.alice_tables,
            bob_states: m.bob_states,
            bob_directions: m.bob_directions,
        }
    }
}

impl TryFrom<ModelJson> for LhvLhsModel {
    type Error = Error;

    fn try_from(raw: ModelJson) -> Result<Self> {
        if raw.dimension != raw.weights.len() {
            return Err(Error::DimensionMismatch(format!(
                "dimension {} but {} weights",
                raw.dimension,
                raw.weights.len()
            )));
        }
        Ok(LhvLhsModel {
            weights: raw.weights,
            alice_tables: raw.alice_tables,
            bob_states: raw.bob_states,
            bob_directions: raw.bob_directions,
        })
    }
}

impl LhvLhsModel {
    /// Hidden-variable dimension `d_λ`.
    pub fn dimension(&self) -> usize {
        self.weights.len()
    }

    pub fn n(&self) -> usize {
        self.bob_directions.n()
    }

    fn check_shape(&self) -> Result<()> {
        let d = self.dimension();
        let n = self.n();
        if self.alice_tables.len() != d || self.bob_states.len() != d {
            return Err(Error::DimensionMismatch(format!(
                "{d} weights, {} Alice tables, {} Bob states",
                self.alice_tables.len(),
                self.bob_states.len()
            )));
        }
        if let Some(t) = self.alice_tables.iter().find(|t| t.len() != n) {
            return Err(Error::DimensionMismatch(format!(
                "Alice table has {} rows, expected {n}",
                t.len()
            )));
        }
        Ok(())
    }

    fn check_valid(&self) -> Result<()> {
        self.check_shape()?;
        for (l, &w) in self.weights.iter().enumerate() {
            if !w.is_finite() || w < -MODEL_SLACK {
                return Err(Error::InvalidModel(format!("weight p({l}) = {w} is negative")));
            }
        }
        for (l, table) in self.alice_tables.iter().enumerate() {
            for (x, row) in table.iter().enumerate() {
                let bad_entry = row.iter().any(|&v| !v.is_finite() || !(-MODEL_SLACK..=1.0 + MODEL_SLACK).contains(&v));
                if bad_entry || (row[0] + row[1] - 1.0).abs() > MODEL_SLACK {
                    return Err(Error::InvalidModel(format!(
                        "Alice table for λ = {l}, x = {x} is not stochastic: {row:?}"
                    )));
                }
            }
        }
        for (l, r) in self.bob_states.iter().enumerate() {
            let norm = dot(*r, *r).sqrt();
            if !norm.is_finite() || norm > 1.0 + MODEL_SLACK {
                return Err(Error::InvalidModel(format!("Bloch vector for λ = {l} has norm {norm}")));
            }
        }
        Ok(())
    }

    /// Entries of the reproduced box in `[x][y][a][b]` order.
    pub fn reconstruct_entries(&self) -> Result<Vec<f64>> {
        self.check_shape()?;
        let n = self.n();
        let mut p = vec![0.0; 4 * n * n];
        for (l, &w) in self.weights.iter().enumerate() {
            let expect: Vec<f64> = (0..n)
                .map(|y| dot(self.bob_directions.signed_direction(y), self.bob_states[l]))
                .collect();
            for x in 0..n {
                for y in 0..n {
                    for a in 0..2 {
                        for b in 0..2 {
                            let bob = if b == 0 { 1.0 + expect[y] } else { 1.0 - expect[y] } / 2.0;
                            p[((x * n + y) * 2 + a) * 2 + b] += w * self.alice_tables[l][x][a] * bob;
                        }
                    }
                }
            }
        }
        Ok(p)
    }

    pub fn reconstruct(&self) -> Result<CorrelationBox> {
        CorrelationBox::new(self.n(), self.reconstruct_entries()?)
    }
}

/// Checks a model against a target box. Returns whether every entry matches
/// within `tol` and the largest deviation. Structurally invalid models
/// (negative weight, Bloch norm above 1, non-stochastic table) are errors.
pub fn verify_lhv_lhs(model: &LhvLhsModel, target: &CorrelationBox, tol: f64) -> Result<(bool, f64)> {
    if model.n() != target.n() {
        return Err(Error::DimensionMismatch(format!(
            "model has n = {}, box has n = {}",
            model.n(),
            target.n()
        )));
    }
    model.check_valid()?;
    let dev = model
        .reconstruct_entries()?
        .iter()
        .zip(target.entries())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok((dev <= tol, dev))
}

/// Eigenstates of `σx` in the convention used by the explicit models. The
/// minus state carries the phase that makes the printed kets reproduce the
/// printed outcome tables.
fn plus_minus() -> (StateVector, StateVector) {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let plus = StateVector::from_vec(vec![Complex64::new(h, 0.0), Complex64::new(h, 0.0)]);
    let minus = StateVector::from_vec(vec![Complex64::new(-h, 0.0), Complex64::new(h, 0.0)]);
    (plus, minus)
}

/// Bloch vector of `√p0 |+⟩ + e^{iφ} √p1 |−⟩`.
fn ket_bloch(p0: f64, p1: f64, phi: f64) -> [f64; 3] {
    let (plus, minus) = plus_minus();
    let psi = plus * Complex64::new(p0.max(0.0).sqrt(), 0.0) + minus * Complex64::from_polar(p1.max(0.0).sqrt(), phi);
    bloch_vector(&(&psi * psi.adjoint()))
}

fn require_model_domain(params: &BellDiagonalParams) -> Result<()> {
    params.ensure_physical()?;
    if !params.is_canonical(1e-12) || params.c1() > 1.0 {
        return Err(Error::PreconditionViolated(format!(
            "{params} is outside 1 ≥ c1 ≥ c2 ≥ |c3|, c1, c2 ≥ 0"
        )));
    }
    Ok(())
}

/// Target of the two-setting construction: the separable remainder of the
/// canonical split, measured with `σx, σy`.
pub fn lhs_target_2set(params: &BellDiagonalParams) -> Result<CorrelationBox> {
    let split = canonical_split_2set(params)?;
    let m = MeasurementSet::pauli(2)?;
    box_from_state(&split.separable_part, &m, &m)
}

/// Target of the three-setting construction.
pub fn lhs_target_3set(params: &BellDiagonalParams) -> Result<CorrelationBox> {
    let split = canonical_split_3set(params)?;
    let m = MeasurementSet::pauli(3)?;
    box_from_state(&split.separable_part, &m, &m)
}

/// Two-valued hidden variable reproducing the two-setting separable remainder.
pub fn build_lhs_model_2set(params: &BellDiagonalParams) -> Result<LhvLhsModel> {
    require_model_domain(params)?;
    let (c1, c2) = (params.c1(), params.c2());
    if c2 >= 1.0 {
        return Err(Error::PreconditionViolated(
            "c2 = 1 leaves no separable remainder to model".into(),
        ));
    }
    let p_plus = (1.0 + c1 - 2.0 * c2) / (2.0 * (1.0 - c2));
    let p_minus = (1.0 - c1) / (2.0 * (1.0 - c2));
    Ok(LhvLhsModel {
        weights: vec![0.5, 0.5],
        alice_tables: vec![vec![[1.0, 0.0], [0.5, 0.5]], vec![[0.0, 1.0], [0.5, 0.5]]],
        bob_states: vec![ket_bloch(p_plus, p_minus, 0.0), ket_bloch(p_minus, p_plus, 0.0)],
        bob_directions: MeasurementSet::pauli(2)?,
    })
}

/// Phases `φ_0..φ_3` of the four hidden states of the three-setting model.
pub fn hidden_state_phases(params: &BellDiagonalParams) -> Result<[f64; 4]> {
    let [c1, c2, c3] = params.c();
    let denom = ((1.0 - c1) * (1.0 + c1 + 2.0 * c3)).max(0.0).sqrt();
    let num = c2 + c3;
    let arg = if denom == 0.0 {
        // both amplitudes but one vanish; the phase is irrelevant
        if num.abs() > 1e-12 {
            return Err(Error::PhaseDomainError(f64::INFINITY));
        }
        0.0
    } else {
        num / denom
    };
    if arg.abs() > 1.0 + 1e-12 {
        return Err(Error::PhaseDomainError(arg));
    }
    let s = arg.clamp(-1.0, 1.0).asin();
    let pi = std::f64::consts::PI;
    Ok([s, pi + s, pi - s, -s])
}

/// `f(c1,c2,c3) = √((1-c1)(1+c1+2c3) - (c2+c3)²)/(1+c3)`.
pub fn bloch_z_factor(params: &BellDiagonalParams) -> f64 {
    let [c1, c2, c3] = params.c();
    ((1.0 - c1) * (1.0 + c1 + 2.0 * c3) - (c2 + c3).powi(2)).max(0.0).sqrt() / (1.0 + c3)
}

/// Four-valued hidden variable reproducing the three-setting separable
/// remainder; needs `c3 ≤ 0`.
pub fn build_lhs_model_3set(params: &BellDiagonalParams) -> Result<LhvLhsModel> {
    require_model_domain(params)?;
    let [c1, _, c3] = params.c();
    if c3 > 0.0 {
        return Err(Error::PreconditionViolated(format!("{params} has c3 > 0")));
    }
    if c3 <= -1.0 {
        return Err(Error::PreconditionViolated(
            "c3 = -1 leaves no separable remainder to model".into(),
        ));
    }
    let phi = hidden_state_phases(params)?;
    let big = (1.0 + c1 + 2.0 * c3) / (2.0 * (1.0 + c3));
    let small = (1.0 - c1) / (2.0 * (1.0 + c3));
    let u = [0.5, 0.5];
    Ok(LhvLhsModel {
        weights: vec![0.25; 4],
        alice_tables: vec![
            vec![[1.0, 0.0], [1.0, 0.0], u],
            vec![[1.0, 0.0], [0.0, 1.0], u],
            vec![[0.0, 1.0], [1.0, 0.0], u],
            vec![[0.0, 1.0], [0.0, 1.0], u],
        ],
        bob_states: vec![
            ket_bloch(big, small, phi[0]),
            ket_bloch(big, small, phi[1]),
            ket_bloch(small, big, phi[2]),
            ket_bloch(small, big, phi[3]),
        ],
        bob_directions: MeasurementSet::pauli(3)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c1: f64, c2: f64, c3: f64) -> BellDiagonalParams {
        BellDiagonalParams::new(c1, c2, c3).unwrap()
    }

    #[test]
    fn two_setting_model_example() {
        let params = p(0.5, 0.5, 0.0);
        let model = build_lhs_model_2set(&params).unwrap();
        assert_eq!(model.weights, vec![0.5, 0.5]);
        // equal weight on |+⟩ and |−⟩, so no σx component
        assert!(model.bob_states[0][0].abs() < 1e-15);
        let (ok, dev) = verify_lhv_lhs(&model, &lhs_target_2set(&params).unwrap(), 1e-12).unwrap();
        assert!(ok, "{dev}");
    }

    #[test]
    fn bob_tables_match_printed_values() {
        let params = p(0.7, 0.4, -0.2);
        let (c1, c2, c3) = (0.7, 0.4, -0.2);
        let m2 = build_lhs_model_2set(&params).unwrap();
        let p00 = (1.0 + dot(m2.bob_states[0], [1.0, 0.0, 0.0])) / 2.0;
        assert!((p00 - (1.0 + c1 - 2.0 * c2) / (2.0 * (1.0 - c2))).abs() < 1e-15);

        let m3 = build_lhs_model_3set(&params).unwrap();
        let f = bloch_z_factor(&params);
        let big = (1.0 + c1 + 2.0 * c3) / (2.0 * (1.0 + c3));
        let mid = (1.0 + c2 + 2.0 * c3) / (2.0 * (1.0 + c3));
        // P(b = 0|y; ρ_λ) per λ and y
        let expected = [
            [big, mid, (1.0 - f) / 2.0],
            [big, 1.0 - mid, (1.0 + f) / 2.0],
            [1.0 - big, mid, (1.0 + f) / 2.0],
            [1.0 - big, 1.0 - mid, (1.0 - f) / 2.0],
        ];
        for (l, row) in expected.iter().enumerate() {
            for y in 0..3 {
                let axis = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]][y];
                let got = (1.0 + dot(m3.bob_states[l], axis)) / 2.0;
                assert!((got - row[y]).abs() < 1e-14, "λ = {l}, y = {y}: {got} vs {}", row[y]);
            }
        }
    }

    #[test]
    fn three_setting_model_example() {
        let t = 1.0 / 3.0;
        let params = p(t, t, -t);
        assert!((bloch_z_factor(&params) - 1.0).abs() < 1e-15);
        assert_eq!(hidden_state_phases(&params).unwrap()[0], 0.0);
        let model = build_lhs_model_3set(&params).unwrap();
        assert_eq!(model.weights, vec![0.25; 4]);
        let (ok, dev) = verify_lhv_lhs(&model, &lhs_target_3set(&params).unwrap(), 1e-10).unwrap();
        assert!(ok, "{dev}");
    }

    #[test]
    fn models_on_a_grid() {
        let m = 20;
        let mut count = 0;
        for i in 0..=m {
            for j in 0..=i {
                for k in -(j as i64)..=(j as i64) {
                    let c = [i as f64 / m as f64, j as f64 / m as f64, k as f64 / m as f64];
                    let Ok(params) = BellDiagonalParams::new(c[0], c[1], c[2]) else { continue };
                    if c[1] < 1.0 {
                        let model = build_lhs_model_2set(&params).unwrap();
                        let (ok, dev) = verify_lhv_lhs(&model, &lhs_target_2set(&params).unwrap(), 1e-10).unwrap();
                        assert!(ok, "2-set {params}: {dev}");
                    }
                    if c[2] <= 0.0 && c[2] > -1.0 {
                        let model = build_lhs_model_3set(&params).unwrap();
                        let (ok, dev) = verify_lhv_lhs(&model, &lhs_target_3set(&params).unwrap(), 1e-10).unwrap();
                        assert!(ok, "3-set {params}: {dev}");
                        count += 1;
                    }
                }
            }
        }
        assert!(count > 500);
    }

    #[test]
    fn verification_detects_mismatch_and_invalid_models() {
        let params = p(0.5, 0.5, 0.0);
        let target = lhs_target_2set(&params).unwrap();
        let mut model = build_lhs_model_2set(&params).unwrap();
        model.weights[0] += 0.01;
        let (ok, dev) = verify_lhv_lhs(&model, &target, 1e-10).unwrap();
        assert!(!ok);
        assert!(dev > 1e-3 && dev <= 0.01);

        let mut model = build_lhs_model_2set(&params).unwrap();
        model.bob_states[0] = [1.2, 0.0, 0.0];
        assert!(matches!(verify_lhv_lhs(&model, &target, 1e-10), Err(Error::InvalidModel(_))));

        let mut model = build_lhs_model_2set(&params).unwrap();
        model.weights[1] = -0.5;
        assert!(matches!(verify_lhv_lhs(&model, &target, 1e-10), Err(Error::InvalidModel(_))));

        let mut model = build_lhs_model_2set(&params).unwrap();
        model.alice_tables[0][1] = [0.7, 0.7];
        assert!(matches!(verify_lhv_lhs(&model, &target, 1e-10), Err(Error::InvalidModel(_))));
    }

    #[test]
    fn degenerate_and_non_canonical_inputs() {
        assert!(build_lhs_model_2set(&p(1.0, 1.0, -1.0)).is_err());
        assert!(build_lhs_model_3set(&p(1.0, 1.0, -1.0)).is_err());
        assert!(build_lhs_model_2set(&p(0.2, 0.5, 0.0)).is_err());
        assert!(build_lhs_model_3set(&p(0.3, 0.3, 0.2)).is_err());
    }

    #[test]
    fn model_json_round_trip() {
        let model = build_lhs_model_2set(&p(0.6, 0.3, 0.0)).unwrap();
        let s = serde_json::to_string(&model).unwrap();
        assert!(s.contains("\"dimension\":2"));
        let back: LhvLhsModel = serde_json::from_str(&s).unwrap();
        assert_eq!(back, model);
    }
}
