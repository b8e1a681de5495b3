//! Bell states and the three-parameter Bell-diagonal family
//! `τ = (𝟙⊗𝟙 + Σ c_i σ_i⊗σ_i)/4`.

use super::matrix::{kron, pauli, StateVector};
use super::DensityMatrix;
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Eigenvalues below `-PHYSICAL_TOL` make a triple unphysical.
pub const PHYSICAL_TOL: f64 = 1e-10;

/// Labels of the Bell-basis eigenvalues in the order returned by [`bd_eigenvalues`].
pub const EIGENVALUE_LABELS: [&str; 4] = ["λ00", "λ01", "λ10", "λ11"];

/// `(|0,b⟩ + (-1)^a |1,1⊕b⟩)/√2`.
pub fn bell_state(a: u8, b: u8) -> StateVector {
    assert!(a < 2 && b < 2, "Bell state labels must be bits");
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let sign = if a == 0 { 1.0 } else { -1.0 };
    let mut v = StateVector::zeros(4);
    v[b as usize] = Complex64::new(h, 0.0);
    v[2 + (1 - b) as usize] = Complex64::new(sign * h, 0.0);
    v
}

/// The correlation triple `(c1, c2, c3)` of a Bell-diagonal state.
///
/// Triples built with [`BellDiagonalParams::new`] are guaranteed physical.
/// [`BellDiagonalParams::unchecked`] admits arbitrary triples for the
/// operations that are defined on them (eigenvalues, canonical form).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamsJson", into = "ParamsJson")]
pub struct BellDiagonalParams {
    c: [f64; 3],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsJson {
    c: [f64; 3],
}

impl TryFrom<ParamsJson> for BellDiagonalParams {
    type Error = Error;

    fn try_from(raw: ParamsJson) -> Result<Self> {
        Self::new(raw.c[0], raw.c[1], raw.c[2])
    }
}

impl From<BellDiagonalParams> for ParamsJson {
    fn from(p: BellDiagonalParams) -> Self {
        ParamsJson { c: p.c }
    }
}

impl BellDiagonalParams {
    pub fn new(c1: f64, c2: f64, c3: f64) -> Result<Self> {
        let p = Self::unchecked([c1, c2, c3]);
        p.ensure_physical()?;
        Ok(p)
    }

    pub fn unchecked(c: [f64; 3]) -> Self {
        Self { c }
    }

    pub fn c(&self) -> [f64; 3] {
        self.c
    }

    pub fn c1(&self) -> f64 {
        self.c[0]
    }

    pub fn c2(&self) -> f64 {
        self.c[1]
    }

    pub fn c3(&self) -> f64 {
        self.c[2]
    }

    pub fn eigenvalues(&self) -> [f64; 4] {
        bd_eigenvalues(self)
    }

    pub fn product(&self) -> f64 {
        self.c[0] * self.c[1] * self.c[2]
    }

    pub fn is_physical(&self) -> bool {
        self.c.iter().all(|x| x.is_finite()) && self.eigenvalues().iter().all(|&l| l >= -PHYSICAL_TOL)
    }

    /// Fails with the most negative eigenvalue when the triple is not a state.
    pub fn ensure_physical(&self) -> Result<()> {
        let lambdas = self.eigenvalues();
        let (idx, &value) = lambdas
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("four eigenvalues");
        if value < -PHYSICAL_TOL || !value.is_finite() {
            return Err(Error::UnphysicalParams {
                c1: self.c[0],
                c2: self.c[1],
                c3: self.c[2],
                label: EIGENVALUE_LABELS[idx],
                value,
            });
        }
        Ok(())
    }

    /// True when the triple already satisfies `c1 ≥ c2 ≥ |c3|`, `c1, c2 ≥ 0`.
    pub fn is_canonical(&self, tol: f64) -> bool {
        let [c1, c2, c3] = self.c;
        c1 >= -tol && c2 >= -tol && c1 + tol >= c2 && c2 + tol >= c3.abs()
    }
}

impl fmt::Display for BellDiagonalParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.c[0], self.c[1], self.c[2])
    }
}

/// `[λ00, λ01, λ10, λ11]` with `λ_ab = [1 + (-1)^a c1 - (-1)^(a+b) c2 + (-1)^b c3]/4`.
pub fn bd_eigenvalues(params: &BellDiagonalParams) -> [f64; 4] {
    let [c1, c2, c3] = params.c;
    [
        (1.0 + c1 - c2 + c3) / 4.0,
        (1.0 + c1 + c2 - c3) / 4.0,
        (1.0 - c1 + c2 + c3) / 4.0,
        (1.0 - c1 - c2 - c3) / 4.0,
    ]
}

/// `τ = (𝟙⊗𝟙 + Σ c_i σ_i⊗σ_i)/4`.
pub fn bell_diagonal(params: &BellDiagonalParams) -> Result<DensityMatrix> {
    params.ensure_physical()?;
    let mut m = kron(&pauli(0), &pauli(0));
    for (i, &ci) in params.c.iter().enumerate() {
        m += kron(&pauli(i + 1), &pauli(i + 1)) * Complex64::new(ci, 0.0);
    }
    DensityMatrix::new(m * Complex64::new(0.25, 0.0))
}

/// Geometric discord `(c2'² + c3'²)/2` of the canonical triple.
pub fn geometric_discord(params: &BellDiagonalParams) -> f64 {
    let [_, c2, c3] = canonical_form(params).canonical.c;
    (c2 * c2 + c3 * c3) / 2.0
}

/// Separable iff the largest Bell-basis eigenvalue is at most 1/2.
pub fn is_separable_bd(params: &BellDiagonalParams) -> Result<bool> {
    params.ensure_physical()?;
    let max = params.eigenvalues().into_iter().fold(f64::NEG_INFINITY, f64::max);
    Ok(max <= 0.5 + 1e-12)
}

/// One local-unitary step acting on a correlation triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CanonicalStep {
    /// `c'_k = c[order[k]]`, realized by the same rotation on both qubits.
    Permute { order: [usize; 3] },
    /// Negates two components, realized by a Pauli on one qubit.
    FlipPair { axes: [usize; 2] },
}

impl CanonicalStep {
    pub fn apply(&self, c: [f64; 3]) -> [f64; 3] {
        match *self {
            CanonicalStep::Permute { order } => [c[order[0]], c[order[1]], c[order[2]]],
            CanonicalStep::FlipPair { axes } => {
                let mut out = c;
                for &a in &axes {
                    // `+ 0.0` keeps zeros unsigned
                    out[a] = -out[a] + 0.0;
                }
                out
            }
        }
    }
}

/// Which sign of `c3'` the canonical form ended on. Product-preserving
/// transformations cannot change the sign of `c1c2c3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignBranch {
    /// `c3' ≤ 0`
    NonPositive,
    /// `c3' > 0`, reachable only from a positive sign product.
    Positive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalFormRecord {
    pub original: BellDiagonalParams,
    pub canonical: BellDiagonalParams,
    pub transform: Vec<CanonicalStep>,
}

impl CanonicalFormRecord {
    pub fn sign_branch(&self) -> SignBranch {
        if self.canonical.c3() > 0.0 {
            SignBranch::Positive
        } else {
            SignBranch::NonPositive
        }
    }

    /// Replays the recorded steps on the original triple.
    pub fn replay(&self) -> [f64; 3] {
        self.transform.iter().fold(self.original.c, |c, s| s.apply(c))
    }
}

/// Sorts `|c_i|` in descending order and makes `c1, c2 ≥ 0` using only
/// permutations and paired sign flips, so `c1c2c3` is preserved.
pub fn canonical_form(params: &BellDiagonalParams) -> CanonicalFormRecord {
    let mut transform = Vec::new();
    let mut c = params.c;

    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| c[j].abs().total_cmp(&c[i].abs()));
    if order != [0, 1, 2] {
        let step = CanonicalStep::Permute { order };
        c = step.apply(c);
        transform.push(step);
    }
    for k in 0..2 {
        if c[k] < 0.0 {
            let step = CanonicalStep::FlipPair { axes: [k, 2] };
            c = step.apply(c);
            transform.push(step);
        }
    }
    CanonicalFormRecord {
        original: *params,
        canonical: BellDiagonalParams::unchecked(c),
        transform,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::matrix::max_abs_diff;
    use proptest::prelude::*;

    fn p(c1: f64, c2: f64, c3: f64) -> BellDiagonalParams {
        BellDiagonalParams::unchecked([c1, c2, c3])
    }

    #[test]
    fn bell_state_components() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let b00 = bell_state(0, 0);
        let b01 = bell_state(0, 1);
        let expected00 = [h, 0.0, 0.0, h];
        let expected01 = [0.0, h, h, 0.0];
        for i in 0..4 {
            assert!((b00[i].re - expected00[i]).abs() < 1e-15 && b00[i].im == 0.0);
            assert!((b01[i].re - expected01[i]).abs() < 1e-15 && b01[i].im == 0.0);
        }
        for a in 0..2 {
            for b in 0..2 {
                assert!((bell_state(a, b).norm() - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn eigenvalues_examples() {
        assert_eq!(bd_eigenvalues(&p(0.0, 0.0, 0.0)), [0.25; 4]);
        assert_eq!(bd_eigenvalues(&p(1.0, 1.0, -1.0)), [0.0, 1.0, 0.0, 0.0]);
        assert_eq!(bd_eigenvalues(&p(0.5, 0.5, 0.0)), [0.25, 0.5, 0.25, 0.0]);
    }

    #[test]
    fn bell_diagonal_identity_case() {
        let tau = bell_diagonal(&p(0.0, 0.0, 0.0)).unwrap();
        assert!(tau.max_abs_diff(&DensityMatrix::maximally_mixed(4)) < 1e-15);
    }

    #[test]
    fn bell_diagonal_rank_one_case_is_beta01() {
        let tau = bell_diagonal(&p(1.0, 1.0, -1.0)).unwrap();
        let proj = DensityMatrix::from_pure(&bell_state(0, 1)).unwrap();
        assert!(tau.max_abs_diff(&proj) < 1e-15);
        let eig = tau.eigenvalues();
        assert!((eig[3] - 1.0).abs() < 1e-12);
        assert!(eig[..3].iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn bell_diagonal_matches_spectral_sum() {
        let params = p(0.5, 0.5, 0.0);
        let tau = bell_diagonal(&params).unwrap();
        let lambdas = bd_eigenvalues(&params);
        let mut sum = crate::quantum::ComplexMatrix::zeros(4, 4);
        for (k, &(a, b)) in [(0, 0), (0, 1), (1, 0), (1, 1)].iter().enumerate() {
            let v = bell_state(a, b);
            sum += &v * v.adjoint() * Complex64::new(lambdas[k], 0.0);
        }
        assert!(max_abs_diff(tau.matrix(), &sum) < 1e-15);
        let eig = tau.eigenvalues();
        let expected = [0.0, 0.25, 0.25, 0.5];
        for k in 0..4 {
            assert!((eig[k] - expected[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn unphysical_triple_names_eigenvalue() {
        let err = BellDiagonalParams::new(0.9, 0.9, 0.9).unwrap_err();
        match err {
            Error::UnphysicalParams { label, value, .. } => {
                assert_eq!(label, "λ11");
                assert!((value - (1.0 - 2.7) / 4.0).abs() < 1e-15);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(bell_diagonal(&p(0.9, 0.9, 0.9)).is_err());
    }

    #[test]
    fn discord_examples() {
        assert_eq!(geometric_discord(&p(0.0, 0.0, 0.0)), 0.0);
        assert!((geometric_discord(&p(0.5, 0.5, 0.0)) - 0.125).abs() < 1e-15);
        assert!((geometric_discord(&p(1.0 / 3.0, 1.0 / 3.0, -1.0 / 3.0)) - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn separability_examples() {
        assert!(!is_separable_bd(&p(1.0, 1.0, -1.0)).unwrap());
        assert!(is_separable_bd(&p(0.5, 0.5, 0.0)).unwrap());
        assert!(!is_separable_bd(&p(0.6, 0.5, -0.1)).unwrap());
        assert!(is_separable_bd(&p(1.0, 1.0, 1.0)).is_err());
    }

    #[test]
    fn canonical_form_examples() {
        let r = canonical_form(&p(-0.5, 0.3, 0.1));
        assert_eq!(r.canonical.c(), [0.5, 0.3, -0.1]);
        let r = canonical_form(&p(0.0, 0.0, 0.4));
        assert_eq!(r.canonical.c(), [0.4, 0.0, 0.0]);
        let r = canonical_form(&p(0.2, 0.2, 0.2));
        assert_eq!(r.canonical.c(), [0.2, 0.2, 0.2]);
        assert_eq!(r.sign_branch(), SignBranch::Positive);
        assert!(r.transform.is_empty());
    }

    #[test]
    fn canonical_form_negative_zero_is_normalized() {
        let r = canonical_form(&p(-0.5, 0.0, 0.0));
        assert_eq!(r.canonical.c(), [0.5, 0.0, 0.0]);
        assert!(r.canonical.c3().is_sign_positive());
    }

    fn physical_triple() -> impl Strategy<Value = BellDiagonalParams> {
        (0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0).prop_map(|(a, b, c, d)| {
            let s = a + b + c + d;
            let l = [a / s, b / s, c / s, d / s];
            // invert λ_ab -> c
            let c1 = l[0] + l[1] - l[2] - l[3];
            let c2 = -l[0] + l[1] + l[2] - l[3];
            let c3 = l[0] - l[1] + l[2] - l[3];
            BellDiagonalParams::unchecked([c1, c2, c3])
        })
    }

    proptest! {
        #[test]
        fn eigenvalues_sum_to_one(c1 in -1.0f64..1.0, c2 in -1.0f64..1.0, c3 in -1.0f64..1.0) {
            let s: f64 = bd_eigenvalues(&p(c1, c2, c3)).iter().sum();
            prop_assert!((s - 1.0).abs() < 1e-15);
        }

        #[test]
        fn bell_diagonal_is_a_state_with_matching_spectrum(params in physical_triple()) {
            let tau = bell_diagonal(&params).unwrap();
            let mut expected = bd_eigenvalues(&params).to_vec();
            expected.sort_by(f64::total_cmp);
            let eig = tau.eigenvalues();
            for k in 0..4 {
                prop_assert!((eig[k] - expected[k]).abs() < 1e-10);
            }
        }

        #[test]
        fn canonical_form_invariants(c1 in -1.0f64..1.0, c2 in -1.0f64..1.0, c3 in -1.0f64..1.0) {
            let params = p(c1, c2, c3);
            let rec = canonical_form(&params);
            let [d1, d2, d3] = rec.canonical.c();
            prop_assert!(d1.abs() >= d2.abs() && d2.abs() >= d3.abs());
            prop_assert!(d1 >= 0.0 && d2 >= 0.0);
            prop_assert!((rec.canonical.product() - params.product()).abs() <= 1e-14);
            prop_assert_eq!(rec.replay(), rec.canonical.c());
            let again = canonical_form(&rec.canonical);
            prop_assert_eq!(again.canonical, rec.canonical);
        }

        #[test]
        fn discord_is_nonnegative_and_vanishes_only_without_minor_axes(params in physical_triple()) {
            let d = geometric_discord(&params);
            let canon = canonical_form(&params).canonical;
            prop_assert!(d >= 0.0);
            prop_assert_eq!(d == 0.0, canon.c2() == 0.0 && canon.c3() == 0.0);
        }
    }

    #[test]
    fn separability_agrees_with_ppt_on_grid() {
        let m = 10;
        let mut checked = 0;
        for i in 0..=m {
            for j in 0..=m {
                for k in 0..=m {
                    let c = [i, j, k].map(|v| -1.0 + 2.0 * v as f64 / m as f64);
                    let params = p(c[0], c[1], c[2]);
                    if !params.is_physical() {
                        continue;
                    }
                    let tau = bell_diagonal(&params).unwrap();
                    assert_eq!(
                        is_separable_bd(&params).unwrap(),
                        tau.is_ppt(1e-12),
                        "disagreement at {params}"
                    );
                    checked += 1;
                }
            }
        }
        assert!(checked > 100);
    }
}
