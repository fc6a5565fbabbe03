//! Exact polyhedral geometry in `M_R = R^n` with integral normals from `N = Z^n`.

pub mod linalg;
mod polytope;

use std::fmt;

use num_integer::Integer;
use num_traits::Zero;

use crate::rational::{int, Rational};

pub use polytope::{Polytope, Simplex};

/// Integer point of a dilate `mP`.
pub type LatticePoint = Vec<i64>;

/// Point of `M_Q`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MPoint(pub Vec<Rational>);

impl MPoint {
    pub fn zero(dim: usize) -> Self {
        MPoint(vec![Rational::zero(); dim])
    }

    pub fn from_ints(coords: &[i64]) -> Self {
        MPoint(coords.iter().map(|&c| int(c)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Rational] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    /// The pairing `<u, v>` between `M` and `N`.
    pub fn pair(&self, v: &NVector) -> Rational {
        debug_assert_eq!(self.dim(), v.dim());
        self.0
            .iter()
            .zip(&v.0)
            .fold(Rational::zero(), |acc, (x, &y)| acc + x * int(y))
    }

    pub fn scale(&self, factor: &Rational) -> MPoint {
        MPoint(self.0.iter().map(|x| x * factor).collect())
    }

    pub fn add(&self, other: &MPoint) -> MPoint {
        MPoint(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &MPoint) -> MPoint {
        MPoint(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }
}

impl fmt::Display for MPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{x}")?;
        }
        f.write_str(")")
    }
}

/// Element of the lattice `N`; fan rays are primitive ones.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NVector(pub Vec<i64>);

impl NVector {
    pub fn new(coords: impl Into<Vec<i64>>) -> Self {
        NVector(coords.into())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    /// Coordinates are coprime.
    pub fn is_primitive(&self) -> bool {
        self.0.iter().fold(0i64, |g, &c| g.gcd(&c)) == 1
    }

    pub fn pair_lattice(&self, w: &[i64]) -> i128 {
        self.0
            .iter()
            .zip(w)
            .map(|(&a, &b)| a as i128 * b as i128)
            .sum()
    }

    pub fn as_rationals(&self) -> Vec<Rational> {
        self.0.iter().map(|&c| int(c)).collect()
    }
}

impl fmt::Display for NVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{x}")?;
        }
        f.write_str(")")
    }
}

/// The half-space `{u : <u, normal> >= -offset}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HalfSpace {
    pub normal: NVector,
    pub offset: Rational,
}

impl HalfSpace {
    pub fn new(normal: NVector, offset: Rational) -> Self {
        HalfSpace { normal, offset }
    }

    /// `<u, normal> + offset`, nonnegative exactly on the half-space.
    pub fn slack(&self, u: &MPoint) -> Rational {
        u.pair(&self.normal) + &self.offset
    }

    pub fn contains(&self, u: &MPoint) -> bool {
        self.slack(u) >= Rational::zero()
    }
}

/// `u ↦ <linear, u> + constant`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineFunctional {
    pub linear: Vec<Rational>,
    pub constant: Rational,
}

impl AffineFunctional {
    pub fn constant(dim: usize, value: Rational) -> Self {
        AffineFunctional {
            linear: vec![Rational::zero(); dim],
            constant: value,
        }
    }

    /// The ray functional `<u, v> + c`.
    pub fn from_ray(v: &NVector, c: &Rational) -> Self {
        AffineFunctional {
            linear: v.as_rationals(),
            constant: c.clone(),
        }
    }

    pub fn eval(&self, u: &MPoint) -> Rational {
        self.linear
            .iter()
            .zip(u.coords())
            .fold(self.constant.clone(), |acc, (a, x)| acc + a * x)
    }
}
