//! Steerable/unsteerable convex splits of boxes and entangled/separable
//! splits of Bell-diagonal states.

use crate::boxes::{box_from_state, white_noise_bb84, CorrelationBox, MeasurementSet};
use crate::error::{Error, Result};
use crate::quantum::{
    bd_eigenvalues, bell_diagonal, bell_state, canonical_form, BellDiagonalParams, DensityMatrix,
};
use std::f64::consts::FRAC_1_SQRT_2;

/// Tolerance for accepting a triple as already canonical.
const CANONICAL_TOL: f64 = 1e-12;

/// `target = weight·steerable_part + (1 - weight)·unsteerable_part`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSplit {
    pub weight: f64,
    pub steerable_part: CorrelationBox,
    pub unsteerable_part: CorrelationBox,
}

impl BoxSplit {
    pub fn reconstruct(&self) -> Result<CorrelationBox> {
        self.steerable_part.mix(self.weight, &self.unsteerable_part)
    }
}

/// `τ = weight·entangled_part + (1 - weight)·separable_part`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSplit {
    pub weight: f64,
    pub entangled_part: DensityMatrix,
    pub separable_part: DensityMatrix,
    /// Correlation triple of the separable part.
    pub separable_params: BellDiagonalParams,
}

impl StateSplit {
    pub fn reconstruct(&self) -> Result<DensityMatrix> {
        self.entangled_part.mix(self.weight, &self.separable_part)
    }
}

fn check_v(v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name: "V",
            value: v,
            range: "[0, 1]",
        })
    }
}

/// Minimal weight of the extremal box in a split of the white-noise BB84 box.
pub fn steering_cost_bb84(v: f64) -> Result<f64> {
    check_v(v)?;
    Ok(((2f64.sqrt() * v - 1.0) / (2f64.sqrt() - 1.0)).max(0.0))
}

/// The split realizing [`steering_cost_bb84`]: the extremal box mixed with the
/// `V = 1/√2` member of the family (or the box itself below that point).
pub fn steering_cost_split_bb84(v: f64) -> Result<BoxSplit> {
    let weight = steering_cost_bb84(v)?;
    let unsteerable_part = if weight > 0.0 {
        white_noise_bb84(FRAC_1_SQRT_2)?
    } else {
        white_noise_bb84(v)?
    };
    Ok(BoxSplit {
        weight,
        steerable_part: white_noise_bb84(1.0)?,
        unsteerable_part,
    })
}

/// Schrödinger strength `V` of the white-noise BB84 box, with the split
/// `V·P_Ext + (1 - V)·uniform`.
pub fn schrodinger_strength_bb84(v: f64) -> Result<(f64, BoxSplit)> {
    check_v(v)?;
    let split = BoxSplit {
        weight: v,
        steerable_part: white_noise_bb84(1.0)?,
        unsteerable_part: CorrelationBox::uniform(2)?,
    };
    Ok((v, split))
}

/// `|c2'|` for two settings and `|c3'|` for three, on the canonical triple.
pub fn schrodinger_strength_bd(params: &BellDiagonalParams, n: usize) -> Result<f64> {
    params.ensure_physical()?;
    let c = canonical_form(params).canonical.c();
    match n {
        2 => Ok(c[1].abs()),
        3 => Ok(c[2].abs()),
        _ => Err(Error::UnsupportedN(n)),
    }
}

fn require_canonical(params: &BellDiagonalParams) -> Result<()> {
    params.ensure_physical()?;
    if !params.is_canonical(CANONICAL_TOL) {
        return Err(Error::PreconditionViolated(format!(
            "{params} is not canonical (need c1 ≥ c2 ≥ |c3| with c1, c2 ≥ 0)"
        )));
    }
    Ok(())
}

/// Inverts the eigenvalue map: Bell-basis weights to correlation triple.
pub(crate) fn params_from_weights(mu: [f64; 4]) -> BellDiagonalParams {
    let [m00, m01, m10, m11] = mu;
    BellDiagonalParams::unchecked([
        m00 + m01 - m10 - m11,
        -m00 + m01 + m10 - m11,
        m00 - m01 + m10 - m11,
    ])
}

/// Mixture `Σ μ_ab |β_ab⟩⟨β_ab|` renormalized by `1 - weight`; the maximally
/// mixed state when nothing remains.
fn remainder(mu: [f64; 4], weight: f64) -> Result<(BellDiagonalParams, DensityMatrix)> {
    let rest = 1.0 - weight;
    if rest <= 0.0 {
        let p = BellDiagonalParams::unchecked([0.0; 3]);
        return Ok((p, DensityMatrix::maximally_mixed(4)));
    }
    let p = params_from_weights(mu.map(|m| m / rest));
    Ok((p, bell_diagonal(&p)?))
}

fn split_with(weight: f64, mu: [f64; 4]) -> Result<StateSplit> {
    let (separable_params, separable_part) = remainder(mu, weight)?;
    Ok(StateSplit {
        weight,
        entangled_part: DensityMatrix::from_pure(&bell_state(0, 1))?,
        separable_part,
        separable_params,
    })
}

/// `τ = c2 |β01⟩⟨β01| + (1 - c2) ρ_sep` for a canonical triple.
pub fn canonical_split_2set(params: &BellDiagonalParams) -> Result<StateSplit> {
    require_canonical(params)?;
    let [l00, _, l10, l11] = bd_eigenvalues(params);
    split_with(params.c2(), [l00, l00 - l10 + l11, l10, l11])
}

/// `τ = |c3| |β01⟩⟨β01| + (1 - |c3|) ρ_sep` for a canonical triple with `c3 ≤ 0`.
pub fn canonical_split_3set(params: &BellDiagonalParams) -> Result<StateSplit> {
    require_canonical(params)?;
    if params.c3() > 0.0 {
        return Err(Error::PreconditionViolated(format!(
            "{params} has c3 > 0; the three-setting split needs c3 ≤ 0"
        )));
    }
    let [l00, _, l10, l11] = bd_eigenvalues(params);
    split_with(params.c3().abs(), [l00, l00 + l10 - l11, l10, l11])
}

/// Box-level split from the state split, measured with aligned Pauli settings.
pub fn canonical_box_split(params: &BellDiagonalParams, n: usize) -> Result<BoxSplit> {
    let split = match n {
        2 => canonical_split_2set(params)?,
        3 => canonical_split_3set(params)?,
        _ => return Err(Error::UnsupportedN(n)),
    };
    let m = MeasurementSet::pauli(n)?;
    Ok(BoxSplit {
        weight: split.weight,
        steerable_part: box_from_state(&split.entangled_part, &m, &m)?,
        unsteerable_part: box_from_state(&split.separable_part, &m, &m)?,
    })
}
