//! Search for LHV-LHS models with a bounded number of hidden-variable values.
//!
//! Phase 1 assigns deterministic Alice strategies to the hidden-variable
//! values. Repeated strategies merge into one slot, so each distinct support
//! is solved once: the box constraints are linear in the slot weights `q_j`
//! and subnormalized Bob vectors `s_j = q_j r_j`, and the remaining freedom
//! is searched for a point with `‖s_j‖ ≤ q_j`.
//!
//! Phase 2 allows non-deterministic Alice responses. With two hidden values
//! the connected correlation matrix `C - m_A m_Bᵀ` must have rank at most
//! one, and along that rank-one direction the problem separates into two
//! interval conditions per grouping of strategies. The groupings are every
//! split of the `2^n` strategies into two classes, followed by the case where
//! each response may be any point of the cube, which makes the two-value
//! decision exact.

use super::conic::{feasible_radius, ConeOutcome, ConeProblem};
use super::lp::{maximize, solve_with_null_space};
use super::model::{verify_lhv_lhs, LhvLhsModel};
use crate::boxes::{correlator, CorrelationBox, MeasurementSet, Strategy};
use crate::error::{Error, Result};
use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Largest accepted entrywise deviation of a returned model.
pub const RECONSTRUCTION_TOL: f64 = 1e-9;
/// Singular values of the connected correlations below this count as zero.
const RANK_TOL: f64 = 1e-9;
/// Slack on Bob's marginal lying inside the Bloch ball.
const BALL_TOL: f64 = 1e-10;
/// Largest best-found excess accepted after clipping and re-verification.
const ACCEPT_EXCESS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub case: String,
    pub violated: String,
}

/// The cases examined by a search, in a fixed order, with the constraint
/// each infeasible case violates.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct InfeasibilityTrace {
    pub cases: Vec<TraceEntry>,
    /// False when the verdict could not be decided, or when Alice's marginals
    /// are not uniform (completeness is only claimed for uniform marginals).
    pub exhaustive: bool,
    pub uniform_alice_marginals: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SearchOutcome {
    Feasible {
        model: LhvLhsModel,
        case: String,
        trace: InfeasibilityTrace,
    },
    Infeasible(InfeasibilityTrace),
    Undecided(InfeasibilityTrace),
}

impl SearchOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, SearchOutcome::Feasible { .. })
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(self, SearchOutcome::Infeasible(_))
    }

    pub fn model(&self) -> Option<&LhvLhsModel> {
        match self {
            SearchOutcome::Feasible { model, .. } => Some(model),
            _ => None,
        }
    }

    pub fn trace(&self) -> &InfeasibilityTrace {
        match self {
            SearchOutcome::Feasible { trace, .. } => trace,
            SearchOutcome::Infeasible(t) | SearchOutcome::Undecided(t) => t,
        }
    }
}

/// Everything the search needs from the box and Bob's settings.
struct Problem<'a> {
    target: &'a CorrelationBox,
    bob: &'a MeasurementSet,
    n: usize,
    /// Rows are Bob's signed directions.
    b: DMatrix<f64>,
    gram: DMatrix<f64>,
    gram_inv: DMatrix<f64>,
    /// `⟨A_x⟩`, `⟨B_y⟩` and the connected correlations.
    m_a: DVector<f64>,
    m_b: DVector<f64>,
    connected: DMatrix<f64>,
}

/// `(σ, g, h)` with connected correlations `σ g hᵀ`.
type RankOne = (f64, DVector<f64>, DVector<f64>);

enum CaseResult {
    Feasible(LhvLhsModel),
    Violated(String),
}

impl<'a> Problem<'a> {
    fn new(target: &'a CorrelationBox, bob: &'a MeasurementSet) -> Result<Self> {
        let n = target.n();
        if bob.n() != n {
            return Err(Error::DimensionMismatch(format!(
                "box has n = {n}, Bob has {} settings",
                bob.n()
            )));
        }
        let b = DMatrix::from_fn(n, 3, |y, k| bob.signed_direction(y)[k]);
        let gram = &b * b.transpose();
        let lmin = gram.clone().symmetric_eigen().eigenvalues.min();
        if lmin < 1e-12 {
            return Err(Error::PreconditionViolated(
                "Bob's measurement directions are linearly dependent".into(),
            ));
        }
        let gram_inv = gram.clone().try_inverse().expect("positive definite");
        let m_a = DVector::from_fn(n, |x, _| target.alice_marginal(x, 0) - target.alice_marginal(x, 1));
        let m_b = DVector::from_fn(n, |y, _| target.bob_marginal(y, 0) - target.bob_marginal(y, 1));
        let corr = DMatrix::from_fn(n, n, |x, y| correlator(target, x, y).expect("in range"));
        let connected = corr - &m_a * m_b.transpose();
        Ok(Self {
            target,
            bob,
            n,
            b,
            gram,
            gram_inv,
            m_a,
            m_b,
            connected,
        })
    }

    /// `p(a0|xy) - p(a1|xy)`.
    fn bob_difference(&self, x: usize, a: usize, y: usize) -> f64 {
        self.target.p(x, y, a, 0) - self.target.p(x, y, a, 1)
    }

    /// Minimum-norm Bloch vector with Bob expectations `u`.
    fn bloch_from_expectations(&self, u: &DVector<f64>) -> [f64; 3] {
        let r = self.b.transpose() * (&self.gram_inv * u);
        clip_to_ball([r[0], r[1], r[2]])
    }

    fn ball_measure(&self, u: &DVector<f64>) -> f64 {
        u.dot(&(&self.gram_inv * u))
    }

    /// Largest `t ≥ 0` with `m_B + t h` inside the set of reachable Bob
    /// expectation vectors.
    fn max_step(&self, h: &DVector<f64>) -> f64 {
        let gh = &self.gram_inv * h;
        let a = h.dot(&gh);
        let b = self.m_b.dot(&gh);
        let c = self.ball_measure(&self.m_b) - 1.0;
        let disc = (b * b - a * c).max(0.0);
        ((-b + disc.sqrt()) / a).max(0.0)
    }

    fn verified(&self, model: LhvLhsModel) -> CaseResult {
        match verify_lhv_lhs(&model, self.target, RECONSTRUCTION_TOL) {
            Ok((true, _)) => CaseResult::Feasible(model),
            Ok((false, dev)) => CaseResult::Violated(format!("reconstruction error {dev:.3e} after rounding")),
            Err(e) => CaseResult::Violated(format!("rounded model is invalid: {e}")),
        }
    }

    /// Deterministic strategies on the given support.
    fn phase1(&self, support: &[Strategy]) -> CaseResult {
        let n = self.n;
        let k = support.len();
        let cols = k + k * n;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut rhs = Vec::new();
        for x in 0..n {
            for a in 0..2 {
                let mut row = vec![0.0; cols];
                for (j, f) in support.iter().enumerate() {
                    if f.output(x) == a {
                        row[j] = 1.0;
                    }
                }
                rows.push(row);
                rhs.push(self.target.alice_marginal(x, a));
                for y in 0..n {
                    let mut row = vec![0.0; cols];
                    for (j, f) in support.iter().enumerate() {
                        if f.output(x) == a {
                            for yp in 0..n {
                                row[k + j * n + yp] = self.gram[(y, yp)];
                            }
                        }
                    }
                    rows.push(row);
                    rhs.push(self.bob_difference(x, a, y));
                }
            }
        }
        let m = DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]);
        let r = DVector::from_vec(rhs);
        let sol = solve_with_null_space(&m, &r);
        if sol.residual > RECONSTRUCTION_TOL {
            return CaseResult::Violated(format!(
                "linear box constraints are inconsistent (residual {:.3e})",
                sol.residual
            ));
        }
        let dim = sol.null_basis.ncols();
        let problem = ConeProblem {
            z0: &sol.particular,
            null: &sol.null_basis,
            slots: k,
            n,
            gram: &self.gram,
        };
        let max_iter = 300 * (dim + 1) * (dim + 1) + 1000;
        let z = match problem.solve(feasible_radius(k, &self.gram), max_iter) {
            ConeOutcome::Feasible { z, .. } => z,
            ConeOutcome::Unresolved { z, excess } if excess <= ACCEPT_EXCESS => z,
            ConeOutcome::Unresolved { excess, .. } => {
                return CaseResult::Violated(format!(
                    "Bloch-ball constraint ‖s‖ ≤ q: no feasible point found (smallest excess {excess:.3e})"
                ))
            }
            ConeOutcome::Infeasible { lower_bound } => {
                return CaseResult::Violated(format!(
                    "Bloch-ball constraint ‖s‖ ≤ q: certified infeasible (excess ≥ {lower_bound:.3e})"
                ))
            }
        };
        let mut weights = Vec::with_capacity(k);
        let mut bob_states = Vec::with_capacity(k);
        for j in 0..k {
            let q = z[j].max(0.0);
            let c = z.rows(k + j * n, n).into_owned();
            let s = self.b.transpose() * c;
            let r = if q > 1e-14 { [s[0] / q, s[1] / q, s[2] / q] } else { [0.0; 3] };
            weights.push(q);
            bob_states.push(clip_to_ball(r));
        }
        self.verified(LhvLhsModel {
            weights,
            alice_tables: support.iter().map(|f| f.table(n)).collect(),
            bob_states,
            bob_directions: self.bob.clone(),
        })
    }

    /// Single hidden value with a non-deterministic response.
    fn product_case(&self) -> CaseResult {
        let dev = self.connected.amax();
        if dev > RANK_TOL {
            return CaseResult::Violated(format!("box is not a product (max connected correlation {dev:.3e})"));
        }
        if self.ball_measure(&self.m_b) > 1.0 + BALL_TOL {
            return CaseResult::Violated("Bob's marginal lies outside the Bloch ball".into());
        }
        self.verified(LhvLhsModel {
            weights: vec![1.0],
            alice_tables: vec![response_table(&self.m_a)],
            bob_states: vec![self.bloch_from_expectations(&self.m_b)],
            bob_directions: self.bob.clone(),
        })
    }

    /// Rank-one factorization `σ g hᵀ` of the connected correlations, `None`
    /// for rank zero, or the second singular value when the rank exceeds one.
    fn rank_one(&self) -> std::result::Result<Option<RankOne>, f64> {
        let svd = self.connected.clone().svd(true, true);
        let order: Vec<usize> = (0..self.n)
            .sorted_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]))
            .collect();
        let s1 = svd.singular_values[order[0]];
        let s2 = svd.singular_values[order[1]];
        if s2 > RANK_TOL {
            return Err(s2);
        }
        if s1 <= RANK_TOL {
            return Ok(None);
        }
        let mut g = svd.u.as_ref().expect("U").column(order[0]).into_owned();
        let mut h = svd.v_t.as_ref().expect("V^T").row(order[0]).transpose();
        // fix the sign so that case labels do not depend on the SVD routine
        let lead = g.iamax();
        if g[lead] < 0.0 {
            g = -g;
            h = -h;
        }
        Ok(Some((s1, g, h)))
    }

    /// Interval of `t ≥ 0` with `m_A + t·dir` inside the hull of `class`
    /// (the whole cube when `class` is `None`).
    fn hull_interval(&self, class: Option<&[Strategy]>, dir: &DVector<f64>) -> Option<(f64, f64)> {
        let n = self.n;
        let Some(class) = class else {
            let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
            for x in 0..n {
                let (m, g) = (self.m_a[x], dir[x]);
                if g.abs() < 1e-15 {
                    if m.abs() > 1.0 + 1e-12 {
                        return None;
                    }
                    continue;
                }
                let (t1, t2) = ((-1.0 - m) / g, (1.0 - m) / g);
                lo = lo.max(t1.min(t2));
                hi = hi.min(t1.max(t2));
            }
            return (lo <= hi + 1e-12).then_some((lo, hi.max(lo)));
        };
        let k = class.len();
        let mut m = DMatrix::zeros(n + 1, k + 1);
        let mut r = DVector::zeros(n + 1);
        for x in 0..n {
            for (j, f) in class.iter().enumerate() {
                m[(x, j)] = f.bias(n)[x];
            }
            m[(x, k)] = -dir[x];
            r[x] = self.m_a[x];
        }
        for j in 0..k {
            m[(n, j)] = 1.0;
        }
        r[n] = 1.0;
        let mut up = vec![0.0; k + 1];
        up[k] = 1.0;
        let (hi, _) = maximize(&up, &m, &r)?;
        up[k] = -1.0;
        let (neg_lo, _) = maximize(&up, &m, &r)?;
        Some((-neg_lo, hi))
    }

    /// Two hidden values; Alice's response for the first value lies in the
    /// hull of `plus`, for the second in the hull of `minus` (cube if `None`).
    fn two_slot_case(&self, plus: Option<&[Strategy]>, minus: Option<&[Strategy]>) -> CaseResult {
        if self.ball_measure(&self.m_b) > 1.0 + BALL_TOL {
            return CaseResult::Violated("Bob's marginal lies outside the Bloch ball".into());
        }
        let factor = match self.rank_one() {
            Err(s2) => {
                return CaseResult::Violated(format!(
                    "connected correlations have rank 2 or more (second singular value {s2:.3e})"
                ))
            }
            Ok(f) => f,
        };
        let Some((sigma, g, h)) = factor else {
            return self.two_slot_uncorrelated(plus, minus);
        };
        let r_plus = self.max_step(&h);
        let r_minus = self.max_step(&(-&h));
        if r_plus <= 0.0 || r_minus <= 0.0 {
            return CaseResult::Violated("Bob's marginal sits on the Bloch sphere; no room to split".into());
        }
        let need_a = sigma / r_minus;
        let need_b = sigma / r_plus;
        let Some((a_lo, a_hi)) = self.hull_interval(plus, &g) else {
            return CaseResult::Violated("first response cannot lie on the correlation line".into());
        };
        if a_hi < need_a - 1e-12 {
            return CaseResult::Violated(format!(
                "first response: Bloch ball needs offset ≥ {need_a:.6} but the class allows ≤ {a_hi:.6}"
            ));
        }
        let Some((b_lo, b_hi)) = self.hull_interval(minus, &(-&g)) else {
            return CaseResult::Violated("second response cannot lie on the correlation line".into());
        };
        if b_hi < need_b - 1e-12 {
            return CaseResult::Violated(format!(
                "second response: Bloch ball needs offset ≥ {need_b:.6} but the class allows ≤ {b_hi:.6}"
            ));
        }
        let a = a_lo.max(need_a).min(a_hi.max(need_a));
        let b = b_lo.max(need_b).min(b_hi.max(need_b));
        let alpha_plus = &self.m_a + &g * a;
        let alpha_minus = &self.m_a - &g * b;
        let u_plus = &self.m_b + &h * (sigma / b);
        let u_minus = &self.m_b - &h * (sigma / a);
        self.verified(LhvLhsModel {
            weights: vec![b / (a + b), a / (a + b)],
            alice_tables: vec![response_table(&alice_clip(alpha_plus)), response_table(&alice_clip(alpha_minus))],
            bob_states: vec![self.bloch_from_expectations(&u_plus), self.bloch_from_expectations(&u_minus)],
            bob_directions: self.bob.clone(),
        })
    }

    /// Rank-zero connected correlations: both values share Bob's marginal
    /// state and Alice's marginal is split between the two hulls.
    fn two_slot_uncorrelated(&self, plus: Option<&[Strategy]>, minus: Option<&[Strategy]>) -> CaseResult {
        let n = self.n;
        let all: Vec<Strategy> = Strategy::all(n).collect();
        let (plus, minus) = (plus.unwrap_or(&all), minus.unwrap_or(&all));
        let cols: Vec<Strategy> = plus.iter().chain(minus).copied().collect();
        let m = DMatrix::from_fn(n + 1, cols.len(), |x, j| if x < n { cols[j].bias(n)[x] } else { 1.0 });
        let mut r = DVector::zeros(n + 1);
        r.rows_mut(0, n).copy_from(&self.m_a);
        r[n] = 1.0;
        let Some((_, nu)) = maximize(&vec![0.0; cols.len()], &m, &r) else {
            return CaseResult::Violated("Alice's marginal lies outside the response hulls".into());
        };
        let mix = |range: std::ops::Range<usize>| {
            let w: f64 = range.clone().map(|j| nu[j]).sum();
            let alpha = if w > 0.0 {
                range.fold(DVector::zeros(n), |acc, j| acc + DVector::from_vec(cols[j].bias(n)) * (nu[j] / w))
            } else {
                DVector::from_vec(cols[range.start].bias(n))
            };
            (w, alpha)
        };
        let (w_plus, alpha_plus) = mix(0..plus.len());
        let (w_minus, alpha_minus) = mix(plus.len()..cols.len());
        let bob = self.bloch_from_expectations(&self.m_b);
        self.verified(LhvLhsModel {
            weights: vec![w_plus, w_minus],
            alice_tables: vec![response_table(&alpha_plus), response_table(&alpha_minus)],
            bob_states: vec![bob, bob],
            bob_directions: self.bob.clone(),
        })
    }

    /// Connected correlations of a mixture of `d` values have rank below `d`.
    fn rank_bound(&self, d: usize) -> Option<String> {
        let svd = self.connected.clone().svd(false, false);
        let rank = svd.singular_values.iter().filter(|&&s| s > RANK_TOL).count();
        (rank > d - 1).then(|| format!("connected correlations have rank {rank} > {}", d - 1))
    }
}

fn clip_to_ball(r: [f64; 3]) -> [f64; 3] {
    let norm = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
    if norm > 1.0 {
        r.map(|v| v / norm)
    } else {
        r
    }
}

fn alice_clip(alpha: DVector<f64>) -> DVector<f64> {
    alpha.map(|v| v.clamp(-1.0, 1.0))
}

/// `P(a|x) = (1 ± α_x)/2`.
fn response_table(alpha: &DVector<f64>) -> Vec<[f64; 2]> {
    alpha.iter().map(|&v| [(1.0 + v) / 2.0, (1.0 - v) / 2.0]).collect()
}

fn support_label(support: &[Strategy], n: usize) -> String {
    format!("deterministic [{}]", support.iter().map(|f| f.label(n)).join(","))
}

fn class_label(class: &[Strategy], n: usize) -> String {
    format!("{{{}}}", class.iter().map(|f| f.label(n)).join(","))
}

/// All strategies, ordered by their output strings so traces read
/// lexicographically.
fn strategies_by_label(n: usize) -> Vec<Strategy> {
    Strategy::all(n).sorted_by_key(|f| f.label(n)).collect()
}

/// Splits of the `2^n` strategies into two non-empty classes, each listed
/// in both orders.
fn two_class_groupings(n: usize) -> Vec<(Vec<Strategy>, Vec<Strategy>)> {
    let all = strategies_by_label(n);
    let k = all.len();
    let mut out = Vec::new();
    // restricted-growth strings with the first strategy in class 0
    let mut strings: Vec<Vec<u8>> = (1..(1u64 << (k - 1)))
        .map(|mask| {
            (0..k)
                .map(|j| if j == 0 { 0 } else { ((mask >> (k - 1 - j)) & 1) as u8 })
                .collect()
        })
        .collect();
    strings.sort();
    for s in strings {
        let first: Vec<Strategy> = (0..k).filter(|&j| s[j] == 0).map(|j| all[j]).collect();
        let second: Vec<Strategy> = (0..k).filter(|&j| s[j] == 1).map(|j| all[j]).collect();
        out.push((first.clone(), second.clone()));
        out.push((second, first));
    }
    out
}

/// Searches for an LHV-LHS model of `target` with at most `d` hidden values
/// and Bob measuring `bob`.
///
/// One and two values are decided exactly, as is any `d ≥ 2^n` (which is the
/// unbounded question). For intermediate `d` only deterministic assignments
/// and necessary conditions are checked, and the outcome may be
/// [`SearchOutcome::Undecided`].
pub fn search_lhs_bounded(target: &CorrelationBox, bob: &MeasurementSet, d: usize) -> Result<SearchOutcome> {
    if d == 0 {
        return Err(Error::OutOfRange {
            name: "d",
            value: 0.0,
            range: "d ≥ 1",
        });
    }
    let problem = Problem::new(target, bob)?;
    let n = problem.n;
    let full = 1usize << n;
    let uniform = target.has_uniform_alice_marginals(1e-12);
    let mut trace = InfeasibilityTrace {
        cases: Vec::new(),
        exhaustive: false,
        uniform_alice_marginals: uniform,
    };

    let strategies = strategies_by_label(n);
    let supports: Vec<Vec<Strategy>> = if d >= full {
        vec![strategies.clone()]
    } else {
        (1..=d)
            .flat_map(|size| strategies.iter().copied().combinations(size))
            .sorted_by_key(|s| s.iter().map(|f| f.label(n)).collect::<Vec<_>>())
            .collect()
    };

    let phase1: Vec<(String, CaseResult)> = supports
        .par_iter()
        .map(|s| (support_label(s, n), problem.phase1(s)))
        .collect();
    if let Some(found) = record(&mut trace, phase1) {
        trace.exhaustive = uniform;
        return Ok(SearchOutcome::Feasible {
            model: found.1,
            case: found.0,
            trace,
        });
    }
    if d >= full {
        trace.exhaustive = uniform;
        return Ok(SearchOutcome::Infeasible(trace));
    }

    let phase2: Vec<(String, CaseResult)> = match d {
        1 => vec![("non-deterministic response, one value".to_string(), problem.product_case())],
        2 => {
            let groupings = two_class_groupings(n);
            let mut cases: Vec<(String, CaseResult)> = groupings
                .par_iter()
                .map(|(p, m)| {
                    let label = format!("classes {} | {}", class_label(p, n), class_label(m, n));
                    (label, problem.two_slot_case(Some(p), Some(m)))
                })
                .collect();
            cases.push(("unrestricted responses, two values".to_string(), problem.two_slot_case(None, None)));
            cases
        }
        _ => {
            let label = format!("non-deterministic responses, {d} values");
            if let Some(reason) = problem.rank_bound(d) {
                vec![(label, CaseResult::Violated(reason))]
            } else {
                match problem.phase1(&strategies) {
                    CaseResult::Violated(why) => vec![(
                        label,
                        CaseResult::Violated(format!("no model with any number of values: {why}")),
                    )],
                    CaseResult::Feasible(_) => {
                        trace.cases.push(TraceEntry {
                            case: label,
                            violated: "undecided: necessary conditions hold, no model constructed".into(),
                        });
                        return Ok(SearchOutcome::Undecided(trace));
                    }
                }
            }
        }
    };
    if let Some(found) = record(&mut trace, phase2) {
        trace.exhaustive = uniform;
        return Ok(SearchOutcome::Feasible {
            model: found.1,
            case: found.0,
            trace,
        });
    }
    trace.exhaustive = uniform;
    Ok(SearchOutcome::Infeasible(trace))
}

/// Appends violated cases to the trace up to the first feasible one.
fn record(trace: &mut InfeasibilityTrace, results: Vec<(String, CaseResult)>) -> Option<(String, LhvLhsModel)> {
    for (case, result) in results {
        match result {
            CaseResult::Feasible(model) => return Some((case, model)),
            CaseResult::Violated(violated) => trace.cases.push(TraceEntry { case, violated }),
        }
    }
    None
}
