//! Random access codes assisted by a shared Bell-diagonal state.
//!
//! Alice measures `m̂(x)·σ` on her qubit for input string `x` and sends the
//! outcome `a`. To recover bit `i`, Bob measures `σ_k` along the decoding
//! axis `k` of that bit and guesses `a ⊕ b ⊕ flip_i`, where the flip is set
//! for anticorrelated axes.
//!
//! Input strings are indexed so that bit `i` of the index is `x_i`.

use crate::error::{Error, Result};
use crate::quantum::matrix::{bloch_operator, kron, pauli, ComplexMatrix};
use crate::quantum::{bell_diagonal, canonical_form, geometric_discord, is_separable_bd, BellDiagonalParams};
use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;

/// Worst-case success of the best classical code with two shared bits.
pub fn rac_classical_bound(n: usize) -> Result<f64> {
    match n {
        2 => Ok(2.0 / 3.0),
        3 => Ok(0.5),
        _ => Err(Error::UnsupportedN(n)),
    }
}

fn check_n(n: usize) -> Result<()> {
    match n {
        2 | 3 => Ok(()),
        _ => Err(Error::UnsupportedN(n)),
    }
}

/// `(1 + 1/√(Σ c_i'⁻²))/2` over the first `n` canonical correlations, or
/// `1/2` when one of them vanishes.
pub fn rac_efficiency_bd(params: &BellDiagonalParams, n: usize) -> Result<f64> {
    check_n(n)?;
    params.ensure_physical()?;
    let c = canonical_form(params).canonical.c();
    if c[..n].contains(&0.0) {
        return Ok(0.5);
    }
    let s: f64 = c[..n].iter().map(|v| v.powi(-2)).sum();
    Ok(0.5 * (1.0 + 1.0 / s.sqrt()))
}

/// Lab-frame axes carrying the `n` largest `|c_k|`, largest first (ties keep
/// axis order).
fn decoding_axes(params: &BellDiagonalParams, n: usize) -> Vec<usize> {
    let c = params.c();
    let mut axes = [0, 1, 2];
    axes.sort_by(|&i, &j| c[j].abs().total_cmp(&c[i].abs()));
    axes[..n].to_vec()
}

/// Encoding directions `m̂(x)` with components `(-1)^{x_i}/|c_k|` on the
/// decoding axis of bit `i`, normalized.
pub fn encoding_directions(params: &BellDiagonalParams, n: usize) -> Result<Vec<[f64; 3]>> {
    check_n(n)?;
    params.ensure_physical()?;
    let c = params.c();
    let axes = decoding_axes(params, n);
    if let Some(&k) = axes.iter().find(|&&k| c[k] == 0.0) {
        return Err(Error::DegenerateAxis(k + 1));
    }
    let norm = axes.iter().map(|&k| c[k].powi(-2)).sum::<f64>().sqrt();
    Ok((0..1usize << n)
        .map(|x| {
            let mut m = [0.0; 3];
            for (i, &k) in axes.iter().enumerate() {
                let sign = if (x >> i) & 1 == 0 { 1.0 } else { -1.0 };
                m[k] = sign / (c[k].abs() * norm);
            }
            m
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RacSpec {
    pub n: usize,
    pub params: BellDiagonalParams,
    pub encodings: Vec<[f64; 3]>,
    /// Axis Bob measures for bit `i`.
    pub decode_axes: Vec<usize>,
    /// Set when `c_k < 0` on the decoding axis of bit `i`.
    pub decode_flips: Vec<bool>,
}

impl RacSpec {
    /// Spec with the given encodings and the standard decoding.
    pub fn new(params: BellDiagonalParams, n: usize, encodings: Vec<[f64; 3]>) -> Result<Self> {
        check_n(n)?;
        params.ensure_physical()?;
        if encodings.len() != 1 << n {
            return Err(Error::DimensionMismatch(format!(
                "{} encoding directions for n = {n}, need {}",
                encodings.len(),
                1 << n
            )));
        }
        for m in &encodings {
            let norm = m.iter().map(|v| v * v).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-12 {
                return Err(Error::NonUnitDirection(norm));
            }
        }
        let decode_axes = decoding_axes(&params, n);
        let decode_flips = decode_axes.iter().map(|&k| params.c()[k] < 0.0).collect();
        Ok(Self {
            n,
            params,
            encodings,
            decode_axes,
            decode_flips,
        })
    }

    /// Spec using [`encoding_directions`].
    pub fn standard(params: BellDiagonalParams, n: usize) -> Result<Self> {
        let encodings = encoding_directions(&params, n)?;
        Self::new(params, n, encodings)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RacResult {
    pub p_min: f64,
    /// `Pr(b_i = x_i)` indexed by input string, then bit.
    pub success: Vec<Vec<f64>>,
    pub encodings: Vec<[f64; 3]>,
}

/// Exact Born-rule success probabilities for one input string.
struct Protocol {
    tau: ComplexMatrix,
    axes: Vec<usize>,
    flips: Vec<bool>,
}

impl Protocol {
    fn new(params: &BellDiagonalParams, axes: Vec<usize>, flips: Vec<bool>) -> Result<Self> {
        Ok(Self {
            tau: bell_diagonal(params)?.matrix().clone(),
            axes,
            flips,
        })
    }

    /// `Pr(a ⊕ b ⊕ flip_i = x_i)` for each bit `i`, summed over the joint
    /// outcome projectors.
    fn success(&self, x: usize, m: [f64; 3]) -> Vec<f64> {
        let half = Complex64::new(0.5, 0.0);
        let alice = [
            (pauli(0) + bloch_operator(m)) * half,
            (pauli(0) - bloch_operator(m)) * half,
        ];
        self.axes
            .iter()
            .zip(&self.flips)
            .enumerate()
            .map(|(i, (&k, &flip))| {
                let sigma = pauli(k + 1);
                let bob = [(pauli(0) + &sigma) * half, (pauli(0) - &sigma) * half];
                let target = ((x >> i) & 1) ^ usize::from(flip);
                let mut p = 0.0;
                for (a, pa) in alice.iter().enumerate() {
                    for (b, pb) in bob.iter().enumerate() {
                        if a ^ b == target {
                            p += (&self.tau * kron(pa, pb)).trace().re;
                        }
                    }
                }
                p
            })
            .collect()
    }

    /// Same as [`Protocol::success`] through `Pr = (1 ± ⟨m̂·σ ⊗ σ_k⟩)/2`,
    /// with the correlation tensor computed once.
    fn fast(&self) -> impl Fn(usize, [f64; 3]) -> Vec<f64> + '_ {
        let t: Vec<[f64; 3]> = self
            .axes
            .iter()
            .map(|&k| std::array::from_fn(|j| (&self.tau * kron(&pauli(j + 1), &pauli(k + 1))).trace().re))
            .collect();
        move |x, m| {
            t.iter()
                .zip(&self.flips)
                .enumerate()
                .map(|(i, (tk, &flip))| {
                    let sign = if ((x >> i) & 1) ^ usize::from(flip) == 0 { 1.0 } else { -1.0 };
                    0.5 * (1.0 + sign * (m[0] * tk[0] + m[1] * tk[1] + m[2] * tk[2]))
                })
                .collect()
        }
    }
}

fn result_from_table(success: Vec<Vec<f64>>, encodings: Vec<[f64; 3]>) -> RacResult {
    let p_min = success.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    RacResult {
        p_min,
        success,
        encodings,
    }
}

pub fn simulate_rac(spec: &RacSpec) -> Result<RacResult> {
    let spec = RacSpec::new(spec.params, spec.n, spec.encodings.clone())?;
    let protocol = Protocol::new(&spec.params, spec.decode_axes.clone(), spec.decode_flips.clone())?;
    let success = spec
        .encodings
        .iter()
        .enumerate()
        .map(|(x, &m)| protocol.success(x, m))
        .collect();
    Ok(result_from_table(success, spec.encodings))
}

fn direction(theta: f64, phi: f64) -> [f64; 3] {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

/// Nelder–Mead minimization in two variables.
fn nelder_mead(f: &impl Fn([f64; 2]) -> f64, start: [f64; 2], scale: f64, max_iter: usize) -> ([f64; 2], f64) {
    let mut simplex: Vec<([f64; 2], f64)> = [start, [start[0] + scale, start[1]], [start[0], start[1] + scale]]
        .into_iter()
        .map(|p| (p, f(p)))
        .collect();
    let lerp = |a: [f64; 2], b: [f64; 2], t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = (simplex[2].1 - simplex[0].1).abs();
        let size = (0..2)
            .map(|k| (simplex[2].0[k] - simplex[0].0[k]).abs().max((simplex[1].0[k] - simplex[0].0[k]).abs()))
            .fold(0.0, f64::max);
        if spread < 1e-15 && size < 1e-12 {
            break;
        }
        let centroid = lerp(simplex[0].0, simplex[1].0, 0.5);
        let worst = simplex[2];
        let reflected = lerp(worst.0, centroid, 2.0);
        let fr = f(reflected);
        if fr < simplex[0].1 {
            let expanded = lerp(worst.0, centroid, 3.0);
            let fe = f(expanded);
            simplex[2] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < simplex[1].1 {
            simplex[2] = (reflected, fr);
        } else {
            let contracted = if fr < worst.1 {
                lerp(worst.0, centroid, 1.5)
            } else {
                lerp(worst.0, centroid, 0.5)
            };
            let fc = f(contracted);
            if fc < worst.1.min(fr) {
                simplex[2] = (contracted, fc);
            } else {
                let best = simplex[0].0;
                for v in simplex.iter_mut().skip(1) {
                    let p = lerp(best, v.0, 0.5);
                    *v = (p, f(p));
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex[0]
}

/// Seed of the random starting points; fixed so results are reproducible.
const OPTIMIZER_SEED: u64 = 0x5eed_0fac;

/// Maximizes the worst-case success over all encoding directions with the
/// standard decoding, by multi-start Nelder–Mead per input string.
pub fn optimize_rac(params: &BellDiagonalParams, n: usize, restarts: usize) -> Result<RacResult> {
    check_n(n)?;
    params.ensure_physical()?;
    let axes = decoding_axes(params, n);
    let flips = axes.iter().map(|&k| params.c()[k] < 0.0).collect();
    let protocol = Protocol::new(params, axes, flips)?;
    let fast = protocol.fast();
    let per_input: Vec<([f64; 3], Vec<f64>)> = (0..1usize << n)
        .into_par_iter()
        .map(|x| {
            let objective = |p: [f64; 2]| {
                -fast(x, direction(p[0], p[1]))
                    .into_iter()
                    .fold(f64::INFINITY, f64::min)
            };
            let mut rng = ChaCha8Rng::seed_from_u64(OPTIMIZER_SEED + x as u64);
            let mut best = ([0.0, 0.0], f64::INFINITY);
            for _ in 0..restarts.max(1) {
                let start = [rng.random::<f64>() * PI, rng.random::<f64>() * 2.0 * PI];
                let mut local = nelder_mead(&objective, start, 0.5, 400);
                let mut scale = 0.1;
                while scale > 1e-9 {
                    let next = nelder_mead(&objective, local.0, scale, 400);
                    if next.1 <= local.1 {
                        local = next;
                    }
                    scale *= 0.1;
                }
                if local.1 < best.1 {
                    best = local;
                }
            }
            let m = direction(best.0[0], best.0[1]);
            (m, protocol.success(x, m))
        })
        .collect();
    let (encodings, success) = per_input.into_iter().unzip();
    Ok(result_from_table(success, encodings))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub c: [f64; 3],
    pub separable: bool,
    pub strength: f64,
    pub efficiency: f64,
    pub discord: f64,
}

/// Two separable states whose discord and RAC efficiency are ordered
/// oppositely.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityWitness {
    pub lower_discord: SweepRow,
    pub higher_discord: SweepRow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub n: usize,
    pub step: f64,
    pub rows: Vec<SweepRow>,
    /// Maximizers over the separable rows.
    pub strength_max: SweepRow,
    pub efficiency_max: SweepRow,
    pub witness: Option<MonotonicityWitness>,
}

const TIE_TOL: f64 = 1e-12;

/// Scans the physical canonical triples `c1 ≥ c2 ≥ |c3|` on a grid of the
/// given step and locates the separable maximizers of strength and
/// efficiency.
pub fn sweep_separable_max(n: usize, step: f64) -> Result<SweepReport> {
    check_n(n)?;
    if !(step > 0.0 && step <= 0.1) {
        return Err(Error::OutOfRange {
            name: "step",
            value: step,
            range: "(0, 0.1]",
        });
    }
    let inverse = (1.0 / step).round();
    let exact = (inverse * step - 1.0).abs() < 1e-9;
    let top = if exact { inverse as i64 } else { (1.0 / step + 1e-9).floor() as i64 };
    let value = |i: i64| if exact { i as f64 / inverse } else { i as f64 * step };

    let rows: Vec<SweepRow> = (0..=top)
        .into_par_iter()
        .map(|i1| {
            let mut out = Vec::new();
            for i2 in 0..=i1 {
                for i3 in -i2..=i2 {
                    let params = BellDiagonalParams::unchecked([value(i1), value(i2), value(i3)]);
                    if !params.is_physical() {
                        continue;
                    }
                    out.push(SweepRow {
                        c: params.c(),
                        separable: is_separable_bd(&params).expect("physical"),
                        strength: crate::decomposition::schrodinger_strength_bd(&params, n).expect("physical"),
                        efficiency: rac_efficiency_bd(&params, n).expect("physical"),
                        discord: geometric_discord(&params),
                    });
                }
            }
            out
        })
        .flatten()
        .collect();

    let separable: Vec<&SweepRow> = rows.iter().filter(|r| r.separable).collect();
    let argmax = |key: fn(&SweepRow) -> f64| {
        let mut best = separable[0];
        for &r in &separable[1..] {
            if key(r) > key(best) + TIE_TOL {
                best = r;
            }
        }
        *best
    };
    let strength_max = argmax(|r| r.strength);
    let efficiency_max = argmax(|r| r.efficiency);
    let witness = monotonicity_witness(&separable);
    Ok(SweepReport {
        n,
        step,
        rows,
        strength_max,
        efficiency_max,
        witness,
    })
}

/// First pair, in order of increasing discord, where a state of strictly
/// smaller discord has strictly larger efficiency.
fn monotonicity_witness(rows: &[&SweepRow]) -> Option<MonotonicityWitness> {
    let mut sorted: Vec<&SweepRow> = rows.to_vec();
    sorted.sort_by(|a, b| a.discord.total_cmp(&b.discord));
    let mut best_below: Option<&SweepRow> = None;
    let mut group_start = 0;
    for i in 0..sorted.len() {
        if sorted[i].discord > sorted[group_start].discord + TIE_TOL {
            for &r in &sorted[group_start..i] {
                if best_below.is_none_or(|b| r.efficiency > b.efficiency + TIE_TOL) {
                    best_below = Some(r);
                }
            }
            group_start = i;
        }
        if let Some(b) = best_below {
            if b.efficiency > sorted[i].efficiency + TIE_TOL {
                return Some(MonotonicityWitness {
                    lower_discord: *b,
                    higher_discord: *sorted[i],
                });
            }
        }
    }
    None
}

impl SweepReport {
    pub fn csv_header(&self) -> String {
        format!("c1,c2,c3,separable,strength_{0},efficiency_{0},discord", self.n)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{}", self.csv_header())?;
        for r in &self.rows {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{},{:.16e},{:.16e},{:.16e}",
                r.c[0], r.c[1], r.c[2], r.separable, r.strength, r.efficiency, r.discord
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn bd(c1: f64, c2: f64, c3: f64) -> BellDiagonalParams {
        BellDiagonalParams::new(c1, c2, c3).unwrap()
    }

    #[test]
    fn classical_bounds() {
        assert_eq!(rac_classical_bound(2).unwrap(), 2.0 / 3.0);
        assert_eq!(rac_classical_bound(3).unwrap(), 0.5);
        assert!(matches!(rac_classical_bound(4), Err(Error::UnsupportedN(4))));
    }

    #[test]
    fn efficiency_examples() {
        let two = rac_efficiency_bd(&bd(0.5, 0.5, 0.0), 2).unwrap();
        assert!((two - 0.5 * (1.0 + FRAC_1_SQRT_2 / 2.0)).abs() < 1e-15);
        let third = 1.0 / 3.0;
        let three = rac_efficiency_bd(&bd(third, third, -third), 3).unwrap();
        assert!((three - 0.5 * (1.0 + 1.0 / 27f64.sqrt())).abs() < 1e-15);
        assert_eq!(rac_efficiency_bd(&bd(0.5, 0.5, 0.0), 3).unwrap(), 0.5);
        assert!(rac_efficiency_bd(&BellDiagonalParams::unchecked([0.9, 0.9, 0.9]), 2).is_err());
    }

    #[test]
    fn encoding_examples() {
        let dirs = encoding_directions(&bd(0.5, 0.5, 0.0), 2).unwrap();
        assert!((dirs[0][0] - FRAC_1_SQRT_2).abs() < 1e-15 && (dirs[0][1] - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((dirs[1][0] + FRAC_1_SQRT_2).abs() < 1e-15 && (dirs[1][1] - FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(dirs[0][2], 0.0);
        assert!(matches!(encoding_directions(&bd(0.5, 0.5, 0.0), 3), Err(Error::DegenerateAxis(3))));
    }

    #[test]
    fn simulation_matches_closed_form() {
        for c in [[0.5, 0.5, 0.0], [0.3, -0.6, 0.2], [-0.4, 0.1, -0.35], [1.0 / 3.0, 1.0 / 3.0, -1.0 / 3.0]] {
            let params = BellDiagonalParams::new(c[0], c[1], c[2]).unwrap();
            for n in [2, 3] {
                if c[..n].contains(&0.0) {
                    continue;
                }
                let spec = RacSpec::standard(params, n).unwrap();
                let sim = simulate_rac(&spec).unwrap();
                let closed = rac_efficiency_bd(&params, n).unwrap();
                assert!((sim.p_min - closed).abs() < 1e-12, "{c:?} n={n}");
                // every entry equals the minimum
                assert!(sim.success.iter().flatten().all(|p| (p - closed).abs() < 1e-12));
                let protocol = Protocol::new(&params, spec.decode_axes.clone(), spec.decode_flips.clone()).unwrap();
                let fast = protocol.fast();
                for x in 0..1 << n {
                    let m = direction(0.3 + x as f64, 1.1 * x as f64);
                    let (a, b) = (protocol.success(x, m), fast(x, m));
                    assert!(a.iter().zip(&b).all(|(p, q)| (p - q).abs() < 1e-14));
                }
            }
        }
    }

    #[test]
    fn maximally_mixed_is_guessing() {
        let spec = RacSpec::new(bd(0.0, 0.0, 0.0), 2, vec![[0.0, 0.0, 1.0]; 4]).unwrap();
        assert!((simulate_rac(&spec).unwrap().p_min - 0.5).abs() < 1e-15);
        assert!((optimize_rac(&bd(0.0, 0.0, 0.0), 2, 2).unwrap().p_min - 0.5).abs() < 1e-12);
    }

    #[test]
    fn optimizer_reaches_closed_form() {
        for (c, n) in [([0.5, 0.5, 0.0], 2), ([0.9, 0.2, -0.1], 3)] {
            let params = BellDiagonalParams::new(c[0], c[1], c[2]).unwrap();
            let opt = optimize_rac(&params, n, 5).unwrap();
            let closed = rac_efficiency_bd(&params, n).unwrap();
            assert!((opt.p_min - closed).abs() < 1e-6, "{c:?}: {} vs {closed}", opt.p_min);
        }
    }

    #[test]
    fn coarse_sweep() {
        let report = sweep_separable_max(2, 0.1).unwrap();
        assert_eq!(report.strength_max.c, [0.5, 0.5, 0.0]);
        assert_eq!(report.efficiency_max.c, [0.5, 0.5, 0.0]);
        let w = report.witness.expect("witness");
        assert!(w.lower_discord.discord < w.higher_discord.discord);
        assert!(w.lower_discord.efficiency > w.higher_discord.efficiency);
        let mut csv = Vec::new();
        report.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("c1,c2,c3,separable,strength_2,efficiency_2,discord\n"));
        assert_eq!(text.lines().count(), report.rows.len() + 1);
        assert!(sweep_separable_max(2, 0.2).is_err());
    }
}
