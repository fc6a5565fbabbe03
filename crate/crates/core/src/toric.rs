//! Polarized toric pairs `(X, Δ; L)` described by rays, boundary and
//! polarization coefficients, and torus-invariant divisors on them.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::geometry::{HalfSpace, MPoint, NVector, Polytope};
use crate::rational::Rational;

/// Raw description of a toric pair. Nothing is checked until [`ToricPairSpec::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToricPairSpec {
    pub rays: Vec<NVector>,
    pub boundary: Vec<Rational>,
    pub polarization: Vec<Rational>,
    /// `L = -K_X - Δ`, i.e. `c_i = 1 - b_i`.
    pub log_fano: bool,
}

impl ToricPairSpec {
    /// The log Fano pair `(X, Δ)` polarized by `-K_X - Δ`.
    pub fn log_fano(rays: Vec<NVector>, boundary: Vec<Rational>) -> Self {
        let polarization = boundary.iter().map(|b| Rational::one() - b).collect();
        ToricPairSpec {
            rays,
            boundary,
            polarization,
            log_fano: true,
        }
    }

    pub fn polarized(rays: Vec<NVector>, boundary: Vec<Rational>, polarization: Vec<Rational>) -> Self {
        ToricPairSpec {
            rays,
            boundary,
            polarization,
            log_fano: false,
        }
    }

    /// Log Fano pair with empty boundary.
    pub fn fano(rays: &[&[i64]]) -> Self {
        let rays: Vec<NVector> = rays.iter().map(|r| NVector::new(r.to_vec())).collect();
        let zeros = vec![Rational::zero(); rays.len()];
        ToricPairSpec::log_fano(rays, zeros)
    }

    pub fn dim(&self) -> usize {
        self.rays.first().map_or(0, NVector::dim)
    }

    pub fn validate(self) -> Result<ToricPair> {
        let d = self.rays.len();
        let n = self.dim();
        if n == 0 {
            return Err(Error::InvalidArgument("at least one nonzero-dimensional ray is required".into()));
        }
        for ray in &self.rays {
            if ray.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: ray.dim(),
                });
            }
        }
        for len in [self.boundary.len(), self.polarization.len()] {
            if len != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: len,
                });
            }
        }
        for (index, ray) in self.rays.iter().enumerate() {
            if !ray.is_primitive() {
                return Err(Error::NotPrimitive { index });
            }
        }
        for (index, b) in self.boundary.iter().enumerate() {
            if b.is_negative() || *b >= Rational::one() {
                return Err(Error::NotKlt {
                    index,
                    value: b.to_string(),
                });
            }
        }
        if self.log_fano {
            if let Some(i) = (0..d).find(|&i| self.polarization[i] != Rational::one() - &self.boundary[i]) {
                return Err(Error::NotLogFano(format!(
                    "polarization c_{i} = {} differs from 1 - b_{i}",
                    self.polarization[i]
                )));
            }
        }

        let halfspaces = self
            .rays
            .iter()
            .zip(&self.polarization)
            .map(|(v, c)| HalfSpace::new(v.clone(), c.clone()))
            .collect();
        let polytope = Polytope::new(n, halfspaces)?;
        if polytope.is_empty()? {
            return Err(Error::EmptyPolytope);
        }
        if !polytope.is_full_dimensional()? {
            return Err(Error::DegeneratePolytope);
        }
        if self.log_fano && !self.polarization.iter().all(Signed::is_positive) {
            return Err(Error::NotLogFano("origin is not interior to the moment polytope".into()));
        }
        let barycenter = polytope.barycenter()?;
        Ok(ToricPair {
            spec: self,
            polytope,
            barycenter,
        })
    }
}

/// A validated pair with its moment polytope `P_L` and barycenter.
#[derive(Debug, Clone)]
pub struct ToricPair {
    spec: ToricPairSpec,
    polytope: Polytope,
    barycenter: MPoint,
}

impl PartialEq for ToricPair {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

/// `Σ a_i D_i`, indexed like the rays of its pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToricDivisor {
    pub coeffs: Vec<Rational>,
}

impl ToricDivisor {
    pub fn is_effective(&self) -> bool {
        self.coeffs.iter().all(|a| !a.is_negative())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }
}

impl ToricPair {
    pub fn spec(&self) -> &ToricPairSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    pub fn num_rays(&self) -> usize {
        self.spec.rays.len()
    }

    pub fn rays(&self) -> &[NVector] {
        &self.spec.rays
    }

    pub fn boundary(&self) -> &[Rational] {
        &self.spec.boundary
    }

    pub fn polarization(&self) -> &[Rational] {
        &self.spec.polarization
    }

    pub fn is_log_fano(&self) -> bool {
        self.spec.log_fano
    }

    /// `P_L = {u : <u, v_i> >= -c_i}`.
    pub fn moment_polytope(&self) -> &Polytope {
        &self.polytope
    }

    pub fn barycenter(&self) -> &MPoint {
        &self.barycenter
    }

    pub fn require_log_fano(&self) -> Result<()> {
        if self.spec.log_fano {
            Ok(())
        } else {
            Err(Error::NotLogFano("the pair is not polarized by -K-Δ".into()))
        }
    }

    /// `D_u = Σ (<u, v_i> + c_i) D_i`, effective and `Q`-linearly equivalent to `L`.
    pub fn divisor_from_point(&self, u: &MPoint) -> Result<ToricDivisor> {
        if u.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: u.dim(),
            });
        }
        let coeffs: Vec<Rational> = self
            .rays()
            .iter()
            .zip(self.polarization())
            .map(|(v, c)| u.pair(v) + c)
            .collect();
        let divisor = ToricDivisor { coeffs };
        if !divisor.is_effective() {
            return Err(Error::PointOutsidePolytope);
        }
        Ok(divisor)
    }

    /// The log Fano pair `(X, Δ + tD)` polarized by `-K - Δ - tD`.
    pub fn attach_boundary(&self, divisor: &ToricDivisor, weight: &Rational) -> Result<ToricPair> {
        self.require_log_fano()?;
        if divisor.coeffs.len() != self.num_rays() {
            return Err(Error::DimensionMismatch {
                expected: self.num_rays(),
                found: divisor.coeffs.len(),
            });
        }
        if let Some(index) = divisor.coeffs.iter().position(Signed::is_negative) {
            return Err(Error::NegativeCoefficient { index });
        }
        if weight.is_negative() {
            return Err(Error::InvalidArgument("boundary weight must be nonnegative".into()));
        }
        let boundary = self
            .boundary()
            .iter()
            .zip(&divisor.coeffs)
            .map(|(b, a)| b + weight * a)
            .collect();
        ToricPairSpec::log_fano(self.spec.rays.clone(), boundary).validate()
    }

    /// `(X, Δ + (1-β) D_u)`; its polytope is checked against `β P + (1-β) u`.
    pub fn interpolated_pair(&self, u: &MPoint, beta: &Rational) -> Result<ToricPair> {
        if !beta.is_positive() || *beta > Rational::one() {
            return Err(Error::InvalidArgument("β must lie in (0, 1]".into()));
        }
        let divisor = self.divisor_from_point(u)?;
        let t = Rational::one() - beta;
        let pair = self.attach_boundary(&divisor, &t)?;
        let expected = self.polytope.affine_image(beta, &u.scale(&t))?;
        if *pair.moment_polytope() != expected {
            return Err(Error::CrossCheck(
                "interpolated polytope differs from βP + (1-β)u".into(),
            ));
        }
        Ok(pair)
    }

    /// The same pair with `L` replaced by `kL` (no longer log Fano unless `k = 1`).
    pub fn with_scaled_polarization(&self, k: &Rational) -> Result<ToricPair> {
        if !k.is_positive() {
            return Err(Error::InvalidArgument("scale must be positive".into()));
        }
        if k.is_one() {
            return Ok(self.clone());
        }
        ToricPairSpec::polarized(
            self.spec.rays.clone(),
            self.spec.boundary.clone(),
            self.spec.polarization.iter().map(|c| c * k).collect(),
        )
        .validate()
    }
}

/// Corpus of standard examples.
pub mod corpus {
    use super::*;
    use crate::rational::rat;

    pub fn p1() -> ToricPairSpec {
        ToricPairSpec::fano(&[&[1], &[-1]])
    }

    pub fn p2() -> ToricPairSpec {
        ToricPairSpec::fano(&[&[1, 0], &[0, 1], &[-1, -1]])
    }

    pub fn p1xp1() -> ToricPairSpec {
        ToricPairSpec::fano(&[&[1, 0], &[-1, 0], &[0, 1], &[0, -1]])
    }

    /// Blow-up of the plane at one torus-fixed point.
    pub fn blp2() -> ToricPairSpec {
        ToricPairSpec::fano(&[&[1, 0], &[0, 1], &[-1, -1], &[1, 1]])
    }

    pub fn p3() -> ToricPairSpec {
        ToricPairSpec::fano(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1], &[-1, -1, -1]])
    }

    /// `P^1 x P^1` with boundary `1/2 D_1`.
    pub fn p1xp1_half_boundary() -> ToricPairSpec {
        let mut spec = p1xp1();
        spec.boundary[0] = rat(1, 2);
        ToricPairSpec::log_fano(spec.rays, spec.boundary)
    }
}
