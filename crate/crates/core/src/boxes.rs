//! Binary-outcome correlation boxes `p(ab|xy)`, measurement settings,
//! assemblages and deterministic response tables.

use crate::error::{Error, Result};
use crate::quantum::matrix::{kron, partial_trace_first, pauli, ComplexMatrix};
use crate::quantum::{BellDiagonalParams, DensityMatrix, Projector};
use serde::{Deserialize, Serialize};

/// Entry, normalization and no-signaling tolerance.
pub const BOX_TOL: f64 = 1e-12;

fn check_n(n: usize) -> Result<()> {
    if n == 2 || n == 3 {
        Ok(())
    } else {
        Err(Error::UnsupportedN(n))
    }
}

/// A joint table `p(ab|xy)` with `n` settings per side and binary outcomes.
///
/// Named to avoid clashing with `std::boxed::Box`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationBox {
    n: usize,
    p: Vec<f64>,
}

impl CorrelationBox {
    /// Validates entries, normalization and no-signaling.
    pub fn new(n: usize, p: Vec<f64>) -> Result<Self> {
        check_n(n)?;
        if p.len() != 4 * n * n {
            return Err(Error::InvalidBox(format!(
                "expected {} entries for n = {n}, got {}",
                4 * n * n,
                p.len()
            )));
        }
        let b = Self { n, p };
        b.validate()?;
        Ok(b)
    }

    /// Builds a box from `f(x, y, a, b)` and validates it.
    pub fn from_fn(n: usize, f: impl Fn(usize, usize, usize, usize) -> f64) -> Result<Self> {
        check_n(n)?;
        let mut p = Vec::with_capacity(4 * n * n);
        for x in 0..n {
            for y in 0..n {
                for a in 0..2 {
                    for b in 0..2 {
                        p.push(f(x, y, a, b));
                    }
                }
            }
        }
        Self::new(n, p)
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::from_fn(n, |_, _, _, _| 0.25)
    }

    fn index(&self, x: usize, y: usize, a: usize, b: usize) -> usize {
        ((x * self.n + y) * 2 + a) * 2 + b
    }

    fn validate(&self) -> Result<()> {
        for (k, &v) in self.p.iter().enumerate() {
            if !v.is_finite() || !(-BOX_TOL..=1.0 + BOX_TOL).contains(&v) {
                return Err(Error::InvalidBox(format!("entry {k} = {v} is not a probability")));
            }
        }
        let n = self.n;
        for x in 0..n {
            for y in 0..n {
                let s: f64 = (0..4).map(|ab| self.p(x, y, ab / 2, ab % 2)).sum();
                if (s - 1.0).abs() > BOX_TOL {
                    return Err(Error::InvalidBox(format!(
                        "normalization fails at (x, y) = ({x}, {y}): sum = {s}"
                    )));
                }
            }
        }
        for x in 0..n {
            for a in 0..2 {
                let m0 = self.p(x, 0, a, 0) + self.p(x, 0, a, 1);
                for y in 1..n {
                    let m = self.p(x, y, a, 0) + self.p(x, y, a, 1);
                    if (m - m0).abs() > BOX_TOL {
                        return Err(Error::InvalidBox(format!(
                            "no-signaling from Bob fails: p(a={a}|x={x}) differs between y = 0 and y = {y} by {:.3e}",
                            (m - m0).abs()
                        )));
                    }
                }
            }
        }
        for y in 0..n {
            for b in 0..2 {
                let m0 = self.p(0, y, 0, b) + self.p(0, y, 1, b);
                for x in 1..n {
                    let m = self.p(x, y, 0, b) + self.p(x, y, 1, b);
                    if (m - m0).abs() > BOX_TOL {
                        return Err(Error::InvalidBox(format!(
                            "no-signaling from Alice fails: p(b={b}|y={y}) differs between x = 0 and x = {x} by {:.3e}",
                            (m - m0).abs()
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `p(ab|xy)`; panics on out-of-range indices.
    pub fn p(&self, x: usize, y: usize, a: usize, b: usize) -> f64 {
        assert!(x < self.n && y < self.n && a < 2 && b < 2, "box index out of range");
        self.p[self.index(x, y, a, b)]
    }

    /// Flat entries in `[x][y][a][b]` row-major order.
    pub fn entries(&self) -> &[f64] {
        &self.p
    }

    pub fn alice_marginal(&self, x: usize, a: usize) -> f64 {
        self.p(x, 0, a, 0) + self.p(x, 0, a, 1)
    }

    pub fn bob_marginal(&self, y: usize, b: usize) -> f64 {
        self.p(0, y, 0, b) + self.p(0, y, 1, b)
    }

    /// True when every `p(a|x)` equals 1/2 within `tol`.
    pub fn has_uniform_alice_marginals(&self, tol: f64) -> bool {
        (0..self.n).all(|x| (self.alice_marginal(x, 0) - 0.5).abs() <= tol)
    }

    /// `weight·self + (1 - weight)·other`.
    pub fn mix(&self, weight: f64, other: &CorrelationBox) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(format!(
                "cannot mix boxes with n = {} and n = {}",
                self.n, other.n
            )));
        }
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::OutOfRange {
                name: "weight",
                value: weight,
                range: "[0, 1]",
            });
        }
        let p = self
            .p
            .iter()
            .zip(&other.p)
            .map(|(s, o)| weight * s + (1.0 - weight) * o)
            .collect();
        Self::new(self.n, p)
    }

    pub fn max_abs_diff(&self, other: &CorrelationBox) -> f64 {
        if self.n != other.n {
            return f64::INFINITY;
        }
        self.p
            .iter()
            .zip(&other.p)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Nested `[x][y][a][b]` table.
    pub fn to_nested(&self) -> Vec<Vec<[[f64; 2]; 2]>> {
        (0..self.n)
            .map(|x| {
                (0..self.n)
                    .map(|y| {
                        [
                            [self.p(x, y, 0, 0), self.p(x, y, 0, 1)],
                            [self.p(x, y, 1, 0), self.p(x, y, 1, 1)],
                        ]
                    })
                    .collect()
            })
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoxJson {
    n: usize,
    p: Vec<Vec<Vec<Vec<f64>>>>,
}

impl Serialize for CorrelationBox {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let p = self
            .to_nested()
            .into_iter()
            .map(|row| row.into_iter().map(|t| t.iter().map(|r| r.to_vec()).collect()).collect())
            .collect();
        BoxJson { n: self.n, p }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CorrelationBox {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = BoxJson::deserialize(deserializer)?;
        let shape_err = |what: String| serde::de::Error::custom(Error::InvalidBox(what));
        check_n(raw.n).map_err(serde::de::Error::custom)?;
        if raw.p.len() != raw.n {
            return Err(shape_err(format!("p has {} rows for x, expected {}", raw.p.len(), raw.n)));
        }
        let mut flat = Vec::with_capacity(4 * raw.n * raw.n);
        for (x, row) in raw.p.iter().enumerate() {
            if row.len() != raw.n {
                return Err(shape_err(format!("p[{x}] has {} entries for y, expected {}", row.len(), raw.n)));
            }
            for (y, table) in row.iter().enumerate() {
                if table.len() != 2 || table.iter().any(|r| r.len() != 2) {
                    return Err(shape_err(format!("p[{x}][{y}] is not a 2x2 outcome table")));
                }
                flat.extend(table.iter().flatten());
            }
        }
        CorrelationBox::new(raw.n, flat).map_err(serde::de::Error::custom)
    }
}

/// One observable per setting, given by its Bloch direction.
///
/// Outcome `b` corresponds to eigenvalue `(-1)^b` of `n̂·σ`, unless the
/// setting is flipped, in which case the outcome labels are exchanged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSet {
    pub directions: Vec<[f64; 3]>,
    pub flips: Vec<bool>,
}

impl MeasurementSet {
    pub fn new(directions: Vec<[f64; 3]>) -> Result<Self> {
        let flips = vec![false; directions.len()];
        Self::with_flips(directions, flips)
    }

    pub fn with_flips(directions: Vec<[f64; 3]>, flips: Vec<bool>) -> Result<Self> {
        if directions.len() != flips.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} directions but {} flip flags",
                directions.len(),
                flips.len()
            )));
        }
        check_n(directions.len())?;
        for d in &directions {
            let norm = d.iter().map(|x| x * x).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > Projector::UNIT_TOL {
                return Err(Error::NonUnitDirection(norm));
            }
        }
        Ok(Self { directions, flips })
    }

    /// `σx, σy` for n = 2 and `σx, σy, σz` for n = 3.
    pub fn pauli(n: usize) -> Result<Self> {
        check_n(n)?;
        let axes = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        Self::new(axes[..n].to_vec())
    }

    pub fn n(&self) -> usize {
        self.directions.len()
    }

    /// Direction with the outcome relabeling folded in as a sign.
    pub fn signed_direction(&self, k: usize) -> [f64; 3] {
        let s = if self.flips[k] { -1.0 } else { 1.0 };
        self.directions[k].map(|v| s * v)
    }

    pub fn projector(&self, k: usize, outcome: usize) -> Result<Projector> {
        if k >= self.n() || outcome > 1 {
            return Err(Error::IndexOutOfRange(format!("setting {k}, outcome {outcome}")));
        }
        Projector::new(self.directions[k], outcome as u8 ^ self.flips[k] as u8)
    }

    /// Pairwise orthogonal directions within `tol`.
    pub fn is_mub(&self, tol: f64) -> bool {
        let d = &self.directions;
        (0..d.len()).all(|i| ((i + 1)..d.len()).all(|j| dot(d[i], d[j]).abs() <= tol))
    }
}

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// `p(ab|xy) = Tr[(Π_{a|x} ⊗ Π_{b|y}) ρ]`.
pub fn box_from_state(rho: &DensityMatrix, alice: &MeasurementSet, bob: &MeasurementSet) -> Result<CorrelationBox> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch(format!("expected a 4x4 state, got {}x{}", rho.dim(), rho.dim())));
    }
    if alice.n() != bob.n() {
        return Err(Error::DimensionMismatch(format!(
            "Alice has {} settings, Bob has {}",
            alice.n(),
            bob.n()
        )));
    }
    let n = alice.n();
    let mut pa = Vec::with_capacity(n);
    let mut pb = Vec::with_capacity(n);
    for k in 0..n {
        pa.push([alice.projector(k, 0)?.matrix()?, alice.projector(k, 1)?.matrix()?]);
        pb.push([bob.projector(k, 0)?.matrix()?, bob.projector(k, 1)?.matrix()?]);
    }
    let mut p = Vec::with_capacity(4 * n * n);
    for x in 0..n {
        for y in 0..n {
            for a in 0..2 {
                for b in 0..2 {
                    let op = kron(&pa[x][a], &pb[y][b]);
                    p.push((&op * rho.matrix()).trace().re);
                }
            }
        }
    }
    CorrelationBox::new(n, p)
}

/// `p(ab|xy) = (1 + (-1)^{a+b+xy} δ_{xy} V)/4` with two settings.
pub fn white_noise_bb84(v: f64) -> Result<CorrelationBox> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::OutOfRange {
            name: "V",
            value: v,
            range: "[0, 1]",
        });
    }
    CorrelationBox::from_fn(2, |x, y, a, b| {
        if x != y {
            return 0.25;
        }
        let sign = if (a + b + x * y) % 2 == 0 { 1.0 } else { -1.0 };
        (1.0 + sign * v) / 4.0
    })
}

/// `Σ_ab (-1)^{a+b} p(ab|xy)`.
pub fn correlator(b: &CorrelationBox, x: usize, y: usize) -> Result<f64> {
    if x >= b.n() || y >= b.n() {
        return Err(Error::IndexOutOfRange(format!("(x, y) = ({x}, {y}) with n = {}", b.n())));
    }
    Ok(b.p(x, y, 0, 0) - b.p(x, y, 0, 1) - b.p(x, y, 1, 0) + b.p(x, y, 1, 1))
}

/// `(1/√n) Σ_k |⟨A_k B_k⟩|`, the linear steering functional maximized over
/// Bob's outcome relabelings. Values above 1 witness steering.
pub fn steering_functional(b: &CorrelationBox) -> f64 {
    let n = b.n();
    let s: f64 = (0..n).map(|k| correlator(b, k, k).expect("diagonal index").abs()).sum();
    s / (n as f64).sqrt()
}

/// Reads `c_i = ⟨σ_i ⊗ σ_i⟩` off a box measured with aligned Pauli settings.
///
/// A two-setting box carries no information on `c3`, which is reported as 0;
/// the result is not checked for physicality.
pub fn estimate_params_from_box(b: &CorrelationBox) -> BellDiagonalParams {
    let mut c = [0.0; 3];
    for (k, ck) in c.iter_mut().enumerate().take(b.n()) {
        *ck = correlator(b, k, k).expect("diagonal index");
    }
    BellDiagonalParams::unchecked(c)
}

/// Unnormalized conditional states `σ_{a|x}` on Bob's side.
#[derive(Debug, Clone, PartialEq)]
pub struct Assemblage {
    pub sigma: Vec<[ComplexMatrix; 2]>,
}

impl Assemblage {
    /// Bob's reduced state `Σ_a σ_{a|x}` for setting `x`.
    pub fn reduced(&self, x: usize) -> ComplexMatrix {
        &self.sigma[x][0] + &self.sigma[x][1]
    }
}

/// `σ_{a|x} = Tr_A[(Π_{a|x} ⊗ 𝟙) ρ]`.
pub fn assemblage_from_state(rho: &DensityMatrix, alice: &MeasurementSet) -> Result<Assemblage> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch(format!("expected a 4x4 state, got {}x{}", rho.dim(), rho.dim())));
    }
    let mut sigma = Vec::with_capacity(alice.n());
    for x in 0..alice.n() {
        let mut pair = [ComplexMatrix::zeros(2, 2), ComplexMatrix::zeros(2, 2)];
        for (a, s) in pair.iter_mut().enumerate() {
            let op = kron(&alice.projector(x, a)?.matrix()?, &pauli(0));
            *s = partial_trace_first(&(op * rho.matrix()));
        }
        sigma.push(pair);
    }
    Ok(Assemblage { sigma })
}

/// `P_D^{αβ}(a|x) = 1` iff `a = αx ⊕ β`, for two settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DeterministicBox {
    pub alpha: u8,
    pub beta: u8,
}

impl DeterministicBox {
    pub fn output(&self, x: usize) -> usize {
        ((self.alpha as usize * x) ^ self.beta as usize) & 1
    }

    pub fn strategy(&self) -> Strategy {
        Strategy((self.output(0) | self.output(1) << 1) as u32)
    }
}

/// Response table `P(a|x)` of `P_D^{αβ}`, rows indexed by `x`.
pub fn deterministic_box(alpha: u8, beta: u8, n: usize) -> Result<Vec<[f64; 2]>> {
    if alpha > 1 || beta > 1 {
        return Err(Error::IndexOutOfRange(format!("(α, β) = ({alpha}, {beta}) are not bits")));
    }
    if n != 2 {
        return Err(Error::UnsupportedN(n));
    }
    let d = DeterministicBox { alpha, beta };
    Ok(d.strategy().table(n))
}

/// A deterministic single-party strategy; bit `x` of the mask is the
/// output for setting `x`. There are `2^n` of them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Strategy(pub u32);

impl Strategy {
    pub fn all(n: usize) -> impl Iterator<Item = Strategy> {
        (0..1u32 << n).map(Strategy)
    }

    pub fn output(&self, x: usize) -> usize {
        (self.0 >> x) as usize & 1
    }

    /// `(-1)^{f(x)}` per setting.
    pub fn bias(&self, n: usize) -> Vec<f64> {
        (0..n).map(|x| if self.output(x) == 0 { 1.0 } else { -1.0 }).collect()
    }

    pub fn table(&self, n: usize) -> Vec<[f64; 2]> {
        (0..n)
            .map(|x| if self.output(x) == 0 { [1.0, 0.0] } else { [0.0, 1.0] })
            .collect()
    }

    /// Outputs written in setting order, e.g. `"01"` for `a = 0` at `x = 0`
    /// and `a = 1` at `x = 1`.
    pub fn label(&self, n: usize) -> String {
        (0..n).map(|x| if self.output(x) == 0 { '0' } else { '1' }).collect()
    }
}
