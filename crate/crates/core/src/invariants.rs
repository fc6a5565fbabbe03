//! Stability and log canonical thresholds of toric pairs.
//!
//! `δ` is computed by the ray formula `min_i A_i / S_i`, which is exact for
//! toric pairs. `α`, `α_m`, `δ_m` and the lct of invariant divisors are the
//! same infima restricted to toric data (rays, torus-invariant divisors,
//! monomial bases); they are upper bounds for the unrestricted invariants and
//! are labelled "toric-reduced" in reports.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{LatticePoint, MPoint, NVector};
use crate::rational::{int, Extended, Rational};
use crate::toric::{ToricDivisor, ToricPair};

/// Invariants that are restrictions of an infimum to toric data.
pub const TORIC_REDUCED: [&str; 4] = ["alpha", "alpha_m", "delta_m", "lct"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RayData {
    pub ray: NVector,
    /// `A_{X,Δ}(v_i) = 1 - b_i`
    pub log_discrepancy: Rational,
    /// `S(L; v_i) = <ū, v_i> + c_i`
    pub expected_vanishing: Rational,
    /// `T(L; v_i) = max_{u in P} <u, v_i> + c_i`
    pub max_vanishing: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RayInvariants {
    pub rays: Vec<RayData>,
}

impl RayInvariants {
    pub fn a(&self) -> Vec<Rational> {
        self.rays.iter().map(|r| r.log_discrepancy.clone()).collect()
    }

    pub fn s(&self) -> Vec<Rational> {
        self.rays.iter().map(|r| r.expected_vanishing.clone()).collect()
    }

    pub fn t(&self) -> Vec<Rational> {
        self.rays.iter().map(|r| r.max_vanishing.clone()).collect()
    }
}

pub fn ray_invariants(pair: &ToricPair) -> Result<RayInvariants> {
    let p = pair.moment_polytope();
    let ubar = pair.barycenter();
    let rays = pair
        .rays()
        .iter()
        .zip(pair.boundary())
        .zip(pair.polarization())
        .map(|((v, b), c)| {
            Ok(RayData {
                ray: v.clone(),
                log_discrepancy: Rational::one() - b,
                expected_vanishing: ubar.pair(v) + c,
                max_vanishing: p.max_linear(v)? + c,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    for r in &rays {
        if !r.expected_vanishing.is_positive() || r.expected_vanishing > r.max_vanishing {
            return Err(Error::CrossCheck(format!(
                "ray {} violates 0 < S <= T",
                r.ray
            )));
        }
    }
    Ok(RayInvariants { rays })
}

/// Minimum of `ratios` with the lowest index among ties.
fn argmin(ratios: &[Rational]) -> (Rational, usize) {
    let mut best = 0;
    for (i, r) in ratios.iter().enumerate().skip(1) {
        if *r < ratios[best] {
            best = i;
        }
    }
    (ratios[best].clone(), best)
}

/// `δ(X, Δ; L) = min_i A_i / S_i` together with the lowest minimizing ray index.
pub fn delta_with_witness(pair: &ToricPair) -> Result<(Rational, usize)> {
    let inv = ray_invariants(pair)?;
    let ratios: Vec<Rational> = inv
        .rays
        .iter()
        .map(|r| &r.log_discrepancy / &r.expected_vanishing)
        .collect();
    let (value, witness) = argmin(&ratios);
    if pair.is_log_fano() {
        let other = delta_barycentric(pair)?;
        if other != value {
            return Err(Error::CrossCheck(format!(
                "ray formula gives {value}, barycentric formula gives {other}"
            )));
        }
    }
    Ok((value, witness))
}

pub fn delta(pair: &ToricPair) -> Result<Rational> {
    delta_with_witness(pair).map(|(d, _)| d)
}

/// Largest `c` with `-c ū in P`, or `None` when `ū = 0`.
pub fn barycentric_scale(pair: &ToricPair) -> Result<Option<Rational>> {
    pair.require_log_fano()?;
    let ubar = pair.barycenter();
    if ubar.is_zero() {
        return Ok(None);
    }
    let c = pair
        .rays()
        .iter()
        .zip(pair.boundary())
        .filter_map(|(v, b)| {
            let pairing = ubar.pair(v);
            pairing
                .is_positive()
                .then(|| (Rational::one() - b) / pairing)
        })
        .min()
        .ok_or_else(|| Error::CrossCheck("nonzero barycenter pairs nonpositively with every ray".into()))?;
    Ok(Some(c))
}

/// `δ = c / (1 + c)` where `c` is the largest real with `-c ū in P`; `1` when `ū = 0`.
pub fn delta_barycentric(pair: &ToricPair) -> Result<Rational> {
    Ok(match barycentric_scale(pair)? {
        None => Rational::one(),
        Some(c) => &c / (Rational::one() + &c),
    })
}

/// `min_i A_i / T_i` (toric-reduced).
pub fn alpha(pair: &ToricPair) -> Result<Rational> {
    alpha_with_witness(pair).map(|(a, _)| a)
}

pub fn alpha_with_witness(pair: &ToricPair) -> Result<(Rational, usize)> {
    let inv = ray_invariants(pair)?;
    let ratios: Vec<Rational> = inv
        .rays
        .iter()
        .map(|r| &r.log_discrepancy / &r.max_vanishing)
        .collect();
    Ok(argmin(&ratios))
}

/// `min_{i : a_i > 0} (1 - b_i) / (scale * a_i)`, or `+∞` for the zero divisor.
pub fn lct_invariant_divisor(pair: &ToricPair, divisor: &ToricDivisor, scale: &Rational) -> Result<Extended> {
    if divisor.coeffs.len() != pair.num_rays() {
        return Err(Error::DimensionMismatch {
            expected: pair.num_rays(),
            found: divisor.coeffs.len(),
        });
    }
    if let Some(index) = divisor.coeffs.iter().position(Signed::is_negative) {
        return Err(Error::NegativeCoefficient { index });
    }
    if !scale.is_positive() {
        return Err(Error::InvalidArgument("scale must be positive".into()));
    }
    Ok(divisor
        .coeffs
        .iter()
        .zip(pair.boundary())
        .filter(|(a, _)| a.is_positive())
        .map(|(a, b)| (Rational::one() - b) / (scale * a))
        .min()
        .map_or(Extended::Infinity, Extended::Finite))
}

/// Monomial basis of `H^0(X, mL)`: the lattice points of `mP`.
#[derive(Debug, Clone)]
pub struct SectionBasis {
    pub m: u64,
    pub points: Vec<LatticePoint>,
}

impl SectionBasis {
    pub fn new(pair: &ToricPair, m: u64) -> Result<Self> {
        let points = pair.moment_polytope().lattice_points(m)?;
        if points.is_empty() {
            return Err(Error::EmptyLinearSystem { m });
        }
        Ok(SectionBasis { m, points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Vanishing order of `χ^w` along `D_i` as a section of `mL`: `<w, v_i> + m c_i`.
    pub fn order(&self, pair: &ToricPair, ray: usize, w: &[i64]) -> Rational {
        let v = &pair.rays()[ray];
        Rational::from_integer(BigInt::from(v.pair_lattice(w))) + int(self.m as i64) * &pair.polarization()[ray]
    }

    /// `S_m(v_i) = Σ_w (<w, v_i> + m c_i) / (m N_m)`.
    pub fn expected_vanishing(&self, pair: &ToricPair, ray: usize) -> Rational {
        let v = &pair.rays()[ray];
        let sum: i128 = self.points.iter().map(|w| v.pair_lattice(w)).sum();
        let n = int(self.len() as i64);
        let m = int(self.m as i64);
        let total = Rational::from_integer(BigInt::from(sum)) + &n * &m * &pair.polarization()[ray];
        total / (m * n)
    }

    /// `T_m(v_i) = max_w (<w, v_i> + m c_i) / m`.
    pub fn max_vanishing(&self, pair: &ToricPair, ray: usize) -> Rational {
        let v = &pair.rays()[ray];
        let max = self.points.iter().map(|w| v.pair_lattice(w)).max().unwrap();
        let m = int(self.m as i64);
        (Rational::from_integer(BigInt::from(max)) + &m * &pair.polarization()[ray]) / m
    }
}

/// `S_m(v_i)` for every ray.
pub fn expected_vanishing_m(pair: &ToricPair, m: u64) -> Result<Vec<Rational>> {
    let basis = SectionBasis::new(pair, m)?;
    Ok((0..pair.num_rays())
        .map(|i| basis.expected_vanishing(pair, i))
        .collect())
}

/// `δ_m = min_i A_i / S_m(v_i)` over monomial bases (toric-reduced).
pub fn delta_m_toric(pair: &ToricPair, m: u64) -> Result<Rational> {
    let basis = SectionBasis::new(pair, m)?;
    delta_m_from_basis(pair, &basis)
}

pub fn delta_m_from_basis(pair: &ToricPair, basis: &SectionBasis) -> Result<Rational> {
    let ratios: Vec<Rational> = (0..pair.num_rays())
        .map(|i| (Rational::one() - &pair.boundary()[i]) / basis.expected_vanishing(pair, i))
        .collect();
    Ok(argmin(&ratios).0)
}

/// `α_m = min over w in mP ∩ M and rays i with positive order of m(1 - b_i) / (<w, v_i> + m c_i)`.
///
/// For each ray the minimum over `w` is attained at the largest order, so
/// this equals `min_i A_i / T_m(v_i)` over rays with `T_m > 0`.
pub fn alpha_m(pair: &ToricPair, m: u64) -> Result<Rational> {
    let basis = SectionBasis::new(pair, m)?;
    alpha_m_from_basis(pair, &basis)
}

pub fn alpha_m_from_basis(pair: &ToricPair, basis: &SectionBasis) -> Result<Rational> {
    (0..pair.num_rays())
        .filter_map(|i| {
            let t = basis.max_vanishing(pair, i);
            t.is_positive()
                .then(|| (Rational::one() - &pair.boundary()[i]) / t)
        })
        .min()
        .ok_or(Error::EmptyLinearSystem { m: basis.m })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    UniformlyKStable,
    KSemistableBoundary,
    NotKSemistable,
}

impl Classification {
    pub fn of(delta: &Rational) -> Self {
        match delta.cmp(&Rational::one()) {
            std::cmp::Ordering::Greater => Classification::UniformlyKStable,
            std::cmp::Ordering::Equal => Classification::KSemistableBoundary,
            std::cmp::Ordering::Less => Classification::NotKSemistable,
        }
    }

    pub fn describe(&self) -> &'static str {
        match self {
            Classification::UniformlyKStable => "uniformly K-stable",
            Classification::KSemistableBoundary => "K-semistable, not uniformly K-stable",
            Classification::NotKSemistable => "NOT K-semistable",
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::UniformlyKStable => "UniformlyKStable",
            Classification::KSemistableBoundary => "KSemistableBoundary",
            Classification::NotKSemistable => "NotKSemistable",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub delta: Rational,
    pub classification: Classification,
    pub witness_ray: usize,
}

pub fn verdict(pair: &ToricPair) -> Result<Verdict> {
    pair.require_log_fano()?;
    let (delta, witness_ray) = delta_with_witness(pair)?;
    Ok(Verdict {
        classification: Classification::of(&delta),
        delta,
        witness_ray,
    })
}

/// The divisor `D* = D_{-c ū}` for which `(X, Δ + (1-δ) D*)` has `δ = 1`.
#[derive(Debug, Clone)]
pub struct DStar {
    pub point: MPoint,
    pub divisor: ToricDivisor,
    pub delta: Rational,
    /// `(X, Δ + (1-δ) D*)`
    pub interpolated: ToricPair,
}

pub fn dstar(pair: &ToricPair) -> Result<DStar> {
    pair.require_log_fano()?;
    let c = barycentric_scale(pair)?.ok_or(Error::AlreadySemistable)?;
    let point = pair.barycenter().scale(&-c);
    let divisor = pair.divisor_from_point(&point)?;
    let delta = delta(pair)?;
    let interpolated = pair.attach_boundary(&divisor, &(Rational::one() - &delta))?;
    if !interpolated.barycenter().is_zero() {
        return Err(Error::CrossCheck(format!(
            "interpolated barycenter is {}, not the origin",
            interpolated.barycenter()
        )));
    }
    let new_delta = self::delta(&interpolated)?;
    if !new_delta.is_one() {
        return Err(Error::CrossCheck(format!("interpolated pair has δ = {new_delta}")));
    }
    Ok(DStar {
        point,
        divisor,
        delta,
        interpolated,
    })
}

/// `δ(X, Δ + (1-β) D_u)`, checked against the bound `δ(X, Δ) / β`.
pub fn interpolation_delta(pair: &ToricPair, u: &MPoint, beta: &Rational) -> Result<Rational> {
    pair.require_log_fano()?;
    let interpolated = pair.interpolated_pair(u, beta)?;
    let value = delta(&interpolated)?;
    let bound = delta(pair)? / beta;
    if value > bound {
        return Err(Error::CrossCheck(format!(
            "interpolated δ = {value} exceeds δ/β = {bound}"
        )));
    }
    Ok(value)
}

/// `(m - 1) min(1, δ) / (m - min(1, δ))`: every `β` below it gives a
/// uniformly K-stable pair `(X, Δ + (1-β) H/m)` for lc `(X, Δ + H)`.
pub fn sw_beta_bound(pair: &ToricPair, m: u64) -> Result<Rational> {
    pair.require_log_fano()?;
    if m < 2 {
        return Err(Error::InvalidArgument("m must be at least 2".into()));
    }
    Ok(sw_beta_bound_for(&delta(pair)?, m))
}

pub fn sw_beta_bound_for(delta: &Rational, m: u64) -> Rational {
    let d = delta.clone().min(Rational::one());
    let m = int(m as i64);
    (&m - Rational::one()) * &d / (m - d)
}

/// Exact evaluation of `α ≤ δ ≤ (n+1)α` and `((n+1)/n)α ≤ δ`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SandwichReport {
    #[serde(with = "crate::rational::serde_str")]
    pub alpha: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub delta: Rational,
    pub dim: usize,
    pub alpha_le_delta: bool,
    pub delta_le_n_plus_one_alpha: bool,
    pub ample_lower_bound: bool,
    /// Every half-space of `P_L` is a facet; the bound `((n+1)/n)α ≤ δ` is
    /// only claimed for ample `L`.
    pub every_ray_is_facet: bool,
}

impl SandwichReport {
    pub fn holds(&self) -> bool {
        self.alpha_le_delta
            && self.delta_le_n_plus_one_alpha
            && (self.ample_lower_bound || !self.every_ray_is_facet)
    }
}

pub fn sandwich_report(pair: &ToricPair) -> Result<SandwichReport> {
    let a = alpha(pair)?;
    let d = delta(pair)?;
    let n = pair.dim();
    let np1 = int(n as i64 + 1);
    let facets = pair.moment_polytope().facet_indices()?;
    Ok(SandwichReport {
        alpha_le_delta: a <= d,
        delta_le_n_plus_one_alpha: d <= &np1 * &a,
        ample_lower_bound: &np1 / int(n as i64) * &a <= d,
        every_ray_is_facet: facets.len() == pair.num_rays(),
        alpha: a,
        delta: d,
        dim: n,
    })
}

/// Machine-readable summary of a pair.
#[derive(Debug, Clone, Serialize)]
pub struct PairReport {
    pub dim: usize,
    #[serde(with = "crate::rational::serde_str")]
    pub delta: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub alpha: Rational,
    pub verdict: Option<Classification>,
    pub witness_ray: usize,
    pub barycenter: Vec<String>,
    pub rays: Vec<RayRow>,
    pub toric_reduced: Vec<&'static str>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RayRow {
    pub ray: Vec<i64>,
    #[serde(rename = "A", with = "crate::rational::serde_str")]
    pub a: Rational,
    #[serde(rename = "S", with = "crate::rational::serde_str")]
    pub s: Rational,
    #[serde(rename = "T", with = "crate::rational::serde_str")]
    pub t: Rational,
    #[serde(rename = "A_over_S", with = "crate::rational::serde_str")]
    pub a_over_s: Rational,
}

impl PairReport {
    pub fn new(pair: &ToricPair) -> Result<Self> {
        let inv = ray_invariants(pair)?;
        let (delta, witness_ray) = delta_with_witness(pair)?;
        Ok(PairReport {
            dim: pair.dim(),
            verdict: pair.is_log_fano().then(|| Classification::of(&delta)),
            delta,
            alpha: alpha(pair)?,
            witness_ray,
            barycenter: pair.barycenter().coords().iter().map(ToString::to_string).collect(),
            rays: inv
                .rays
                .into_iter()
                .map(|r| RayRow {
                    ray: r.ray.0.clone(),
                    a_over_s: &r.log_discrepancy / &r.expected_vanishing,
                    a: r.log_discrepancy,
                    s: r.expected_vanishing,
                    t: r.max_vanishing,
                })
                .collect(),
            toric_reduced: vec!["alpha"],
        })
    }
}

/// Smallest `m` with `m c_i` integral for all `i` (so `mL` is a divisor with integer coefficients).
pub fn cartier_index(pair: &ToricPair) -> u64 {
    use num_integer::Integer;
    use num_traits::ToPrimitive;
    pair.polarization()
        .iter()
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
        .to_u64()
        .unwrap_or(u64::MAX)
}
