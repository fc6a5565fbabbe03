//! Two-sided check of `δ̂_m` against `δ_m` over a finite family of toric
//! ℕ-filtrations of `R_m`.
//!
//! Candidates: for every ray `v_i` and `r = 1..m`, the weight of `χ^w` is
//! `⌊r · o_i(w) / (m T_m(v_i))⌋` where `o_i(w) = <w, v_i> + m c_i`. Each has
//! `T_m(F) = r/m <= 1`. For a candidate, `𝔞_j` is the base ideal of the
//! sections of weight `>= j`, written in the coordinates of a smooth chart,
//! and `lct(F̂)` is the minimum over charts of the stabilized graded lct.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::filtration::ideal::{gord_stabilize, lct_graded_sequence, MonomialIdeal, StabilizationSearch};
use crate::filtration::weights::GradedWeights;
use crate::geometry::NVector;
use crate::invariants::{alpha, delta_m_from_basis, SectionBasis};
use crate::rational::{int, is_integer, serde_str, Extended, Rational};
use crate::toric::ToricPair;

pub const MAX_SANDWICH_DIM: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SandwichReport {
    pub m: u64,
    #[serde(with = "serde_str")]
    pub delta_m: Rational,
    #[serde(with = "serde_str")]
    pub alpha: Rational,
    /// `1/δ_m − 1/(m α)`.
    #[serde(with = "serde_str")]
    pub lower: Rational,
    /// `max_F S_m(F) / lct(F̂)` over the candidates.
    #[serde(with = "serde_str")]
    pub inv_delta_hat: Rational,
    /// `1/δ_m`.
    #[serde(with = "serde_str")]
    pub upper: Rational,
    pub candidates: usize,
    pub charts: usize,
    /// `(ray, r)` of the maximizing candidate.
    pub witness: (usize, u64),
}

impl SandwichReport {
    pub fn holds(&self) -> bool {
        self.lower <= self.inv_delta_hat && self.inv_delta_hat <= self.upper
    }
}

/// A candidate filtration and where it came from.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub ray: usize,
    pub r: u64,
    pub weights: GradedWeights,
}

/// Exact angular order of nonzero plane vectors, starting at the positive x-axis.
fn angle_cmp(a: &NVector, b: &NVector) -> Ordering {
    let half = |v: &NVector| if v.0[1] > 0 || (v.0[1] == 0 && v.0[0] > 0) { 0 } else { 1 };
    half(a).cmp(&half(b)).then_with(|| {
        let cross = a.0[0] as i128 * b.0[1] as i128 - a.0[1] as i128 * b.0[0] as i128;
        0.cmp(&cross)
    })
}

/// Rays spanning the smooth maximal cones.
pub fn smooth_charts(pair: &ToricPair) -> Vec<Vec<usize>> {
    let rays = pair.rays();
    match pair.dim() {
        1 => (0..rays.len()).map(|i| vec![i]).collect(),
        2 => {
            let mut order: Vec<usize> = (0..rays.len()).collect();
            order.sort_by(|&i, &j| angle_cmp(&rays[i], &rays[j]));
            let k = order.len();
            (0..k)
                .filter_map(|s| {
                    let (i, j) = (order[s], order[(s + 1) % k]);
                    let (a, b) = (&rays[i].0, &rays[j].0);
                    let det = a[0] as i128 * b[1] as i128 - a[1] as i128 * b[0] as i128;
                    (det.abs() == 1).then(|| vec![i, j])
                })
                .collect()
        }
        _ => Vec::new(),
    }
}

fn order_u64(basis: &SectionBasis, pair: &ToricPair, ray: usize, w: &[i64]) -> Result<u64> {
    let o = basis.order(pair, ray, w);
    if !is_integer(&o) {
        return Err(Error::NonIntegralDegree { index: ray, m: basis.m });
    }
    o.to_integer()
        .to_u64()
        .ok_or_else(|| Error::CrossCheck("vanishing order out of range".into()))
}

/// The deduplicated, non-trivial ray candidates at level `m`.
pub fn candidates(pair: &ToricPair, basis: &SectionBasis) -> Result<Vec<Candidate>> {
    let m = basis.m;
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for ray in 0..pair.num_rays() {
        let orders = basis
            .points
            .iter()
            .map(|w| order_u64(basis, pair, ray, w))
            .collect::<Result<Vec<_>>>()?;
        let top = orders.iter().copied().max().unwrap_or(0);
        if top == 0 {
            continue;
        }
        for r in 1..=m {
            let weights: Vec<u64> = orders
                .iter()
                .map(|&o| ((r as u128 * o as u128) / top as u128) as u64)
                .collect();
            if weights.iter().all(|&w| w == 0) || !seen.insert(weights.clone()) {
                continue;
            }
            out.push(Candidate {
                ray,
                r,
                weights: GradedWeights::new(m, weights)?,
            });
        }
    }
    Ok(out)
}

/// `lct(X, Δ; 𝔟_•(F̂))` as a minimum over smooth charts.
pub fn extended_lct(
    pair: &ToricPair,
    basis: &SectionBasis,
    weights: &GradedWeights,
    charts: &[Vec<usize>],
    budget: &mut Budget,
) -> Result<Extended> {
    let top = weights.max_weight();
    let mut best = Extended::Infinity;
    for chart in charts {
        let exponents = basis
            .points
            .iter()
            .map(|w| {
                chart
                    .iter()
                    .map(|&i| order_u64(basis, pair, i, w).map(|o| o as u32))
                    .collect::<Result<Vec<u32>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let ideals = (1..=top)
            .map(|j| {
                let gens = weights.piece(j).map(|k| exponents[k].clone());
                MonomialIdeal::new(chart.len(), gens)
            })
            .collect::<Result<Vec<_>>>()?;
        let seq = gord_stabilize(&ideals, StabilizationSearch { p_max: 3, max_n: 12 }, budget)?;
        let local: Vec<Rational> = chart.iter().map(|&i| pair.boundary()[i].clone()).collect();
        best = best.min(lct_graded_sequence(&seq, &local)?);
    }
    Ok(best)
}

pub fn delta_hat_sandwich_check(pair: &ToricPair, m: u64, budget: &mut Budget) -> Result<SandwichReport> {
    pair.require_log_fano()?;
    if pair.dim() > MAX_SANDWICH_DIM {
        return Err(Error::DimensionTooLarge {
            dim: pair.dim(),
            max: MAX_SANDWICH_DIM,
        });
    }
    for (index, c) in pair.polarization().iter().enumerate() {
        if !is_integer(&(c * int(m as i64))) {
            return Err(Error::NonIntegralDegree { index, m });
        }
    }
    let basis = SectionBasis::new(pair, m)?;
    let delta_m = delta_m_from_basis(pair, &basis)?;
    let alpha = alpha(pair)?;
    let upper = Rational::one() / &delta_m;
    let lower = &upper - Rational::one() / (int(m as i64) * &alpha);
    let charts = smooth_charts(pair);
    if charts.is_empty() {
        return Err(Error::InvalidArgument("the fan has no smooth maximal cone".into()));
    }
    let cands = candidates(pair, &basis)?;
    let mut inv = Rational::zero();
    let mut witness = (0, 0);
    for cand in &cands {
        let lct = extended_lct(pair, &basis, &cand.weights, &charts, budget)?;
        let value = match lct {
            Extended::Infinity => Rational::zero(),
            Extended::Finite(l) => cand.weights.s_m() / l,
        };
        if value > inv {
            inv = value;
            witness = (cand.ray, cand.r);
        }
    }
    Ok(SandwichReport {
        m,
        delta_m,
        alpha,
        lower,
        inv_delta_hat: inv,
        upper,
        candidates: cands.len(),
        charts: charts.len(),
        witness,
    })
}
