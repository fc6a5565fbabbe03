//! Filtrations of a single graded piece `R_m`, diagonal in the monomial basis,
//! represented by one weight (jumping number) per basis vector.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::geometry::{LatticePoint, Polytope};
use crate::invariants::SectionBasis;
use crate::rational::{floor_int, int, Rational};
use crate::toric::ToricPair;

/// An ℕ-filtration of `R_m`: `F^p R_m` is spanned by the basis vectors of weight `>= p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedWeights {
    degree: u64,
    weights: Vec<u64>,
}

impl GradedWeights {
    pub fn new(degree: u64, weights: Vec<u64>) -> Result<Self> {
        if degree == 0 {
            return Err(Error::InvalidArgument("degree must be positive".into()));
        }
        if weights.is_empty() {
            return Err(Error::InvalidArgument("R_m must have a nonempty basis".into()));
        }
        Ok(GradedWeights { degree, weights })
    }

    pub fn degree(&self) -> u64 {
        self.degree
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn is_trivial(&self) -> bool {
        self.weights.iter().all(|&w| w == 0)
    }

    /// `a_{m,1} <= ... <= a_{m,N_m}`.
    pub fn jumping_numbers(&self) -> Vec<u64> {
        let mut w = self.weights.clone();
        w.sort_unstable();
        w
    }

    /// `S_m = (1 / (m N_m)) Σ_j a_{m,j}`.
    pub fn s_m(&self) -> Rational {
        let sum: u128 = self.weights.iter().map(|&w| w as u128).sum();
        Rational::new(BigInt::from(sum), BigInt::from(self.degree) * BigInt::from(self.len()))
    }

    /// `T_m = a_{m,N_m} / m`.
    pub fn t_m(&self) -> Rational {
        let max = self.max_weight();
        Rational::new(BigInt::from(max), BigInt::from(self.degree))
    }

    pub fn max_weight(&self) -> u64 {
        self.weights.iter().copied().max().unwrap_or(0)
    }

    /// Indices of basis vectors in `F^p R_m`.
    pub fn piece(&self, p: u64) -> impl Iterator<Item = usize> + '_ {
        self.weights
            .iter()
            .enumerate()
            .filter(move |(_, &w)| w >= p)
            .map(|(i, _)| i)
    }

    pub fn to_rational(&self) -> RationalWeights {
        RationalWeights {
            degree: self.degree,
            weights: self.weights.iter().map(|&w| int(w as i64)).collect(),
        }
    }
}

/// A filtration of `R_m` with arbitrary nonnegative rational jumping numbers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalWeights {
    degree: u64,
    weights: Vec<Rational>,
}

impl RationalWeights {
    pub fn new(degree: u64, weights: Vec<Rational>) -> Result<Self> {
        if degree == 0 {
            return Err(Error::InvalidArgument("degree must be positive".into()));
        }
        if weights.is_empty() {
            return Err(Error::InvalidArgument("R_m must have a nonempty basis".into()));
        }
        if weights.iter().any(Signed::is_negative) {
            return Err(Error::InvalidArgument("weights must be nonnegative".into()));
        }
        Ok(RationalWeights { degree, weights })
    }

    /// Filtration of `R_m` induced by `ord_{D_i}` scaled by `scale`:
    /// weight of `χ^w` is `scale * (<w, v_i> + m c_i)`.
    pub fn from_ray(pair: &ToricPair, basis: &SectionBasis, ray: usize, scale: &Rational) -> Result<Self> {
        let weights = basis
            .points
            .iter()
            .map(|w| basis.order(pair, ray, w) * scale)
            .collect();
        RationalWeights::new(basis.m, weights)
    }

    pub fn degree(&self) -> u64 {
        self.degree
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn jumping_numbers(&self) -> Vec<Rational> {
        let mut w = self.weights.clone();
        w.sort();
        w
    }

    pub fn s_m(&self) -> Rational {
        let sum: Rational = self.weights.iter().sum();
        sum / (int(self.degree as i64) * int(self.weights.len() as i64))
    }

    pub fn t_m(&self) -> Rational {
        self.weights.iter().max().cloned().unwrap_or_else(Rational::zero) / int(self.degree as i64)
    }

    /// `F_ℕ^λ = F^{⌈λ⌉}`: each jumping number is replaced by its floor.
    ///
    /// The identities `T_m(F_ℕ) = ⌊m T_m(F)⌋ / m` and
    /// `S_m(F) - 1/m <= S_m(F_ℕ) <= S_m(F)` are verified on the result.
    pub fn round_to_n(&self) -> Result<GradedWeights> {
        let weights = self
            .weights
            .iter()
            .map(|w| {
                floor_int(w)
                    .to_u64()
                    .ok_or_else(|| Error::InvalidArgument("weight does not fit in u64".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        let rounded = GradedWeights::new(self.degree, weights)?;
        let m = int(self.degree as i64);
        let t_expected = Rational::from_integer(floor_int(&(&m * self.t_m()))) / &m;
        if rounded.t_m() != t_expected {
            return Err(Error::CrossCheck("T_m(F_N) differs from floor(m T_m(F))/m".into()));
        }
        let s = self.s_m();
        let s_rounded = rounded.s_m();
        if s_rounded > s || s_rounded < &s - Rational::new(1.into(), BigInt::from(self.degree)) {
            return Err(Error::CrossCheck("S_m(F_N) outside [S_m(F) - 1/m, S_m(F)]".into()));
        }
        Ok(rounded)
    }
}

/// Weight table as CSV with columns `degree,lattice_point,weight`.
pub fn weight_table_csv(points: &[LatticePoint], weights: &GradedWeights) -> Result<String> {
    if points.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: points.len(),
            found: weights.len(),
        });
    }
    let mut out = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let io = |e: csv::Error| Error::InvalidArgument(e.to_string());
    out.write_record(["degree", "lattice_point", "weight"]).map_err(io)?;
    for (p, w) in points.iter().zip(weights.weights()) {
        let coords = p.iter().map(i64::to_string).collect::<Vec<_>>().join(" ");
        out.write_record([weights.degree().to_string(), coords, w.to_string()])
            .map_err(io)?;
    }
    let bytes = out.into_inner().map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// The minimal filtration `F̂` of the section ring agreeing with a toric
/// ℕ-filtration `F` of `R_{m'}`.
///
/// `F̂^p R_m` is spanned by the monomials `x_1 + ... + x_k + y` with `x_j` in
/// `F^{i_j} R_{m'}`, `Σ i_j = p`, `k m' <= m` and `y` any lattice point of
/// `(m - k m') P`.
#[derive(Debug, Clone)]
pub struct ExtendedFiltration<'a> {
    polytope: &'a Polytope,
    base: Vec<(LatticePoint, u64)>,
    base_degree: u64,
    base_weights: GradedWeights,
}

impl<'a> ExtendedFiltration<'a> {
    /// `points` must be the lattice points of `m' P` in the order of `weights`.
    pub fn new(polytope: &'a Polytope, points: Vec<LatticePoint>, weights: GradedWeights) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                found: weights.len(),
            });
        }
        let base = points
            .iter()
            .cloned()
            .zip(weights.weights().iter().copied())
            .filter(|&(_, w)| w > 0)
            .collect();
        Ok(ExtendedFiltration {
            polytope,
            base,
            base_degree: weights.degree(),
            base_weights: weights,
        })
    }

    /// Lattice points of `mP` and the `F̂` weight of each.
    pub fn weights_at(&self, m: u64, budget: &mut Budget) -> Result<(Vec<LatticePoint>, GradedWeights)> {
        let points = self.polytope.lattice_points(m)?;
        if m < self.base_degree {
            let n = points.len();
            return Ok((points, GradedWeights::new(m, vec![0; n])?));
        }
        if m == self.base_degree {
            return Ok((points, self.base_weights.clone()));
        }
        let dim = self.polytope.dim();
        let mut best: HashMap<LatticePoint, u64> = points.iter().map(|p| (p.clone(), 0)).collect();
        // sums of k level-m' points, keeping the best total weight per sum
        let mut layer: HashMap<LatticePoint, u64> = HashMap::from([(vec![0; dim], 0)]);
        let mut k = 0;
        while (k + 1) * self.base_degree <= m {
            k += 1;
            let mut next: HashMap<LatticePoint, u64> = HashMap::new();
            budget.spend((layer.len() * self.base.len()) as u64)?;
            for (z, g) in &layer {
                for (x, f) in &self.base {
                    let s: LatticePoint = z.iter().zip(x).map(|(a, b)| a + b).collect();
                    let e = next.entry(s).or_insert(0);
                    *e = (*e).max(g + f);
                }
            }
            layer = next;
            let rest = m - k * self.base_degree;
            let residual = if rest == 0 {
                vec![vec![0; dim]]
            } else {
                self.polytope.lattice_points(rest)?
            };
            budget.spend((layer.len() * residual.len()) as u64)?;
            for (z, g) in &layer {
                for y in &residual {
                    let s: LatticePoint = z.iter().zip(y).map(|(a, b)| a + b).collect();
                    if let Some(e) = best.get_mut(&s) {
                        *e = (*e).max(*g);
                    }
                }
            }
        }
        let weights = points.iter().map(|p| best[p]).collect();
        Ok((points, GradedWeights::new(m, weights)?))
    }
}
