//! Monomial ideals, the graded sequences `𝔟_p = Σ 𝔞_1^{b_1} ⋯ 𝔞_r^{b_r}`,
//! their stabilization `𝔟_{Np} = 𝔟_N^p`, and log canonical thresholds
//! read off the Newton polyhedron.

use std::fmt;

use itertools::Itertools;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::geometry::linalg::solve;
use crate::rational::{int, Extended, Rational};

pub type Exponent = Vec<u32>;

fn divides(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

/// Monomial ideal stored by its unique minimal generating set, sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct MonomialIdeal {
    nvars: usize,
    generators: Vec<Exponent>,
}

impl MonomialIdeal {
    pub fn new(nvars: usize, generators: impl IntoIterator<Item = Exponent>) -> Result<Self> {
        let generators: Vec<Exponent> = generators.into_iter().collect();
        if let Some(g) = generators.iter().find(|g| g.len() != nvars) {
            return Err(Error::DimensionMismatch {
                expected: nvars,
                found: g.len(),
            });
        }
        Ok(MonomialIdeal {
            nvars,
            generators: minimize(generators),
        })
    }

    pub fn zero(nvars: usize) -> Self {
        MonomialIdeal {
            nvars,
            generators: Vec::new(),
        }
    }

    pub fn unit(nvars: usize) -> Self {
        MonomialIdeal {
            nvars,
            generators: vec![vec![0; nvars]],
        }
    }

    /// `(x_k^e)`.
    pub fn power_of_variable(nvars: usize, k: usize, e: u32) -> Self {
        let mut g = vec![0; nvars];
        g[k] = e;
        MonomialIdeal {
            nvars,
            generators: vec![g],
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn generators(&self) -> &[Exponent] {
        &self.generators
    }

    pub fn is_zero(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn is_unit(&self) -> bool {
        self.generators.iter().any(|g| g.iter().all(|&e| e == 0))
    }

    pub fn contains_monomial(&self, e: &[u32]) -> bool {
        self.generators.iter().any(|g| divides(g, e))
    }

    /// `self ⊆ other`.
    pub fn is_subset_of(&self, other: &MonomialIdeal) -> bool {
        self.generators.iter().all(|g| other.contains_monomial(g))
    }

    pub fn sum(&self, other: &MonomialIdeal) -> MonomialIdeal {
        MonomialIdeal {
            nvars: self.nvars,
            generators: minimize(self.generators.iter().chain(&other.generators).cloned().collect()),
        }
    }

    pub fn product(&self, other: &MonomialIdeal, budget: &mut Budget) -> Result<MonomialIdeal> {
        budget.spend((self.generators.len() * other.generators.len()) as u64)?;
        let gens = self
            .generators
            .iter()
            .cartesian_product(&other.generators)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
            .collect();
        Ok(MonomialIdeal {
            nvars: self.nvars,
            generators: minimize(gens),
        })
    }

    pub fn power(&self, k: u32, budget: &mut Budget) -> Result<MonomialIdeal> {
        let mut acc = MonomialIdeal::unit(self.nvars);
        for _ in 0..k {
            acc = acc.product(self, budget)?;
        }
        Ok(acc)
    }

    /// `self · other ⊆ target`, without minimizing the product.
    pub fn product_is_subset_of(
        &self,
        other: &MonomialIdeal,
        target: &MonomialIdeal,
        budget: &mut Budget,
    ) -> Result<bool> {
        budget.spend((self.generators.len() * other.generators.len()) as u64)?;
        Ok(self.generators.iter().cartesian_product(&other.generators).all(|(a, b)| {
            let s: Exponent = a.iter().zip(b).map(|(x, y)| x + y).collect();
            target.contains_monomial(&s)
        }))
    }
}

impl fmt::Display for MonomialIdeal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("(0)");
        }
        let names = ["x", "y", "z", "w"];
        let mono = |g: &Exponent| {
            let parts: Vec<String> = g
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(k, &e)| {
                    let name = names
                        .get(k)
                        .map(|s| s.to_string())
                        .unwrap_or_else(|| format!("x{k}"));
                    if e == 1 {
                        name
                    } else {
                        format!("{name}^{e}")
                    }
                })
                .collect();
            if parts.is_empty() {
                "1".to_string()
            } else {
                parts.join("*")
            }
        };
        write!(f, "({})", self.generators.iter().map(mono).join(", "))
    }
}

/// Minimal generators, sorted lexicographically.
fn minimize(mut gens: Vec<Exponent>) -> Vec<Exponent> {
    gens.sort_by_key(|g| (g.iter().map(|&e| e as u64).sum::<u64>(), g.clone()));
    gens.dedup();
    let mut kept: Vec<Exponent> = Vec::new();
    for g in gens {
        if !kept.iter().any(|k| divides(k, &g)) {
            kept.push(g);
        }
    }
    kept.sort();
    kept
}

/// `(N, p_max)`: `𝔟_{Np} = 𝔟_N^p` was verified for `1 <= p <= p_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub n: usize,
    pub p_max: usize,
}

/// `𝔟_p = Σ_{Σ i b_i = p} 𝔞_1^{b_1} ⋯ 𝔞_r^{b_r}` for `p` in a computed range.
#[derive(Debug, Clone)]
pub struct GradedIdealSequence {
    generators: Vec<MonomialIdeal>,
    /// `terms[p]` is `𝔟_p`, with `𝔟_0 = (1)`.
    terms: Vec<MonomialIdeal>,
    certificate: Option<Certificate>,
}

impl GradedIdealSequence {
    /// The sequence generated by `𝔞_1, ..., 𝔞_r` (`𝔞_i` sits in degree `i`).
    pub fn new(generators: Vec<MonomialIdeal>) -> Result<Self> {
        let Some(first) = generators.first() else {
            return Err(Error::InvalidArgument("at least one ideal is required".into()));
        };
        let nvars = first.nvars();
        for g in &generators {
            if g.nvars() != nvars {
                return Err(Error::DimensionMismatch {
                    expected: nvars,
                    found: g.nvars(),
                });
            }
            if g.is_zero() {
                return Err(Error::ZeroIdeal);
            }
        }
        Ok(GradedIdealSequence {
            generators,
            terms: vec![MonomialIdeal::unit(nvars)],
            certificate: None,
        })
    }

    pub fn nvars(&self) -> usize {
        self.terms[0].nvars()
    }

    pub fn computed_up_to(&self) -> usize {
        self.terms.len() - 1
    }

    pub fn certificate(&self) -> Option<Certificate> {
        self.certificate
    }

    /// `𝔟_p` for `p <= computed_up_to()`.
    pub fn term(&self, p: usize) -> Option<&MonomialIdeal> {
        self.terms.get(p)
    }

    pub fn terms(&self) -> &[MonomialIdeal] {
        &self.terms
    }

    /// Extends the range to `bound` via `𝔟_p = Σ_{i <= min(r, p)} 𝔞_i 𝔟_{p-i}`.
    pub fn extend_to(&mut self, bound: usize, budget: &mut Budget) -> Result<()> {
        while self.terms.len() <= bound {
            let p = self.terms.len();
            let mut acc = MonomialIdeal::zero(self.nvars());
            for (i, a) in self.generators.iter().enumerate().take(p) {
                let part = a.product(&self.terms[p - i - 1], budget)?;
                acc = acc.sum(&part);
            }
            self.terms.push(acc);
        }
        Ok(())
    }

    /// `𝔟_p 𝔟_q ⊆ 𝔟_{p+q}` on the computed range.
    pub fn check_graded(&self, budget: &mut Budget) -> Result<bool> {
        let top = self.computed_up_to();
        for p in 1..=top {
            for q in p..=top - p {
                if !self.terms[p].product_is_subset_of(&self.terms[q], &self.terms[p + q], budget)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// `𝔟_1, ..., 𝔟_bound` of the sequence generated by `ideals`, with the graded axiom checked.
pub fn base_ideal_sequence(
    ideals: &[MonomialIdeal],
    bound: usize,
    budget: &mut Budget,
) -> Result<GradedIdealSequence> {
    let mut seq = GradedIdealSequence::new(ideals.to_vec())?;
    seq.extend_to(bound, budget)?;
    if !seq.check_graded(budget)? {
        return Err(Error::CrossCheck("b_p b_q is not contained in b_(p+q)".into()));
    }
    Ok(seq)
}

/// Search limits for [`gord_stabilize`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StabilizationSearch {
    pub p_max: usize,
    pub max_n: usize,
}

impl Default for StabilizationSearch {
    fn default() -> Self {
        StabilizationSearch { p_max: 4, max_n: 12 }
    }
}

/// Smallest `N <= max_n` with `𝔟_{Np} = 𝔟_N^p` for `1 <= p <= p_max`.
pub fn gord_stabilize(
    ideals: &[MonomialIdeal],
    search: StabilizationSearch,
    budget: &mut Budget,
) -> Result<GradedIdealSequence> {
    if search.p_max == 0 || search.max_n == 0 {
        return Err(Error::InvalidArgument("p_max and max_n must be positive".into()));
    }
    let mut seq = GradedIdealSequence::new(ideals.to_vec())?;
    'outer: for n in 1..=search.max_n {
        seq.extend_to(n * search.p_max, budget)?;
        let base = seq.terms[n].clone();
        let mut power = base.clone();
        for p in 2..=search.p_max {
            power = power.product(&base, budget)?;
            if power != seq.terms[n * p] {
                continue 'outer;
            }
        }
        seq.certificate = Some(Certificate {
            n,
            p_max: search.p_max,
        });
        return Ok(seq);
    }
    Err(Error::SearchBudgetExceeded {
        largest_n: search.max_n,
    })
}

fn check_boundary(nvars: usize, boundary: &[Rational]) -> Result<()> {
    if boundary.len() != nvars {
        return Err(Error::DimensionMismatch {
            expected: nvars,
            found: boundary.len(),
        });
    }
    for (index, b) in boundary.iter().enumerate() {
        if b.is_negative() || *b >= Rational::one() {
            return Err(Error::NotKlt {
                index,
                value: b.to_string(),
            });
        }
    }
    Ok(())
}

/// Largest `λ` with `(1 - b_1, ..., 1 - b_n) ∈ λ · Newt(𝔞)`.
///
/// `Newt(𝔞) = {u >= 0 : <w, u> >= 1 for w in W}` where `W = {w >= 0 : <w, g> >= 1 for every
/// generator g}`, so the answer is `min_{w in W} <w, 1 - b>`, attained at a vertex of `W`.
pub fn lct_monomial(ideal: &MonomialIdeal, boundary: &[Rational]) -> Result<Extended> {
    let n = ideal.nvars();
    check_boundary(n, boundary)?;
    if ideal.is_zero() {
        return Err(Error::ZeroIdeal);
    }
    if ideal.is_unit() {
        return Ok(Extended::Infinity);
    }
    let target: Vec<Rational> = boundary.iter().map(|b| Rational::one() - b).collect();
    // constraint rows: generators (rhs 1) then coordinates (rhs 0)
    let mut rows: Vec<(Vec<Rational>, Rational)> = ideal
        .generators()
        .iter()
        .map(|g| (g.iter().map(|&e| int(e as i64)).collect(), Rational::one()))
        .collect();
    for k in 0..n {
        let mut e = vec![Rational::zero(); n];
        e[k] = Rational::one();
        rows.push((e, Rational::zero()));
    }
    let feasible = |w: &[Rational]| {
        rows.iter().all(|(a, rhs)| {
            let s: Rational = a.iter().zip(w).map(|(x, y)| x * y).sum();
            s >= *rhs
        })
    };
    let mut best: Option<Rational> = None;
    for subset in (0..rows.len()).combinations(n) {
        let a: Vec<Vec<Rational>> = subset.iter().map(|&i| rows[i].0.clone()).collect();
        let b: Vec<Rational> = subset.iter().map(|&i| rows[i].1.clone()).collect();
        let Some(w) = solve(&a, &b) else { continue };
        if !feasible(&w) {
            continue;
        }
        let value: Rational = w.iter().zip(&target).map(|(x, y)| x * y).sum();
        if best.as_ref().is_none_or(|b| value < *b) {
            best = Some(value);
        }
    }
    best.map(Extended::Finite)
        .ok_or_else(|| Error::CrossCheck("Newton polyhedron dual has no vertex".into()))
}

/// `lct(𝔟_•) = N · lct(𝔟_N)` for a certified sequence, checked to dominate
/// `p · lct(𝔟_p)` for every computed `p`.
pub fn lct_graded_sequence(seq: &GradedIdealSequence, boundary: &[Rational]) -> Result<Extended> {
    let cert = seq.certificate().ok_or(Error::NoCertificate)?;
    let value = lct_monomial(&seq.terms[cert.n], boundary)?.scale(&int(cert.n as i64));
    for p in 1..=seq.computed_up_to() {
        let lower = lct_monomial(&seq.terms[p], boundary)?.scale(&int(p as i64));
        if lower > value {
            return Err(Error::CrossCheck(format!(
                "{p} * lct(b_{p}) = {lower} exceeds the stabilized value {value}"
            )));
        }
    }
    Ok(value)
}

/// Parses `"1,0;0,1"` (generators separated by `;`, exponents by `,`).
pub fn parse_ideal(text: &str) -> Result<MonomialIdeal> {
    let bad = |m: String| Error::Parse {
        location: None,
        message: m,
    };
    let gens: Vec<Exponent> = text
        .split(';')
        .map(|g| {
            g.split(',')
                .map(|e| {
                    e.trim()
                        .parse::<u32>()
                        .map_err(|_| bad(format!("invalid exponent {e:?} in ideal {text:?}")))
                })
                .collect::<Result<Exponent>>()
        })
        .collect::<Result<_>>()?;
    let nvars = gens.first().map_or(0, Vec::len);
    MonomialIdeal::new(nvars, gens)
}
