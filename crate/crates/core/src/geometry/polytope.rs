use std::collections::BTreeSet;
use std::sync::OnceLock;

use itertools::Itertools;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use super::linalg::{determinant, kernel_line, rank, solve};
use super::{AffineFunctional, HalfSpace, LatticePoint, MPoint, NVector};
use crate::error::{Error, Result};
use crate::rational::{ceil_int, floor_int, int, Rational};

/// Vertex indices of an `n`-simplex of a triangulation.
pub type Simplex = Vec<usize>;

/// Bounded rational polyhedron given by half-spaces, with its vertex set
/// and triangulation computed on first use.
#[derive(Debug, Clone)]
pub struct Polytope {
    dim: usize,
    halfspaces: Vec<HalfSpace>,
    vertices: OnceLock<Result<Vec<MPoint>>>,
    simplices: OnceLock<Result<Vec<Simplex>>>,
}

impl PartialEq for Polytope {
    /// Equality of half-space data, in order.
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.halfspaces == other.halfspaces
    }
}

impl Polytope {
    pub fn new(dim: usize, halfspaces: Vec<HalfSpace>) -> Result<Self> {
        for (index, h) in halfspaces.iter().enumerate() {
            if h.normal.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: h.normal.dim(),
                });
            }
            if h.normal.is_zero() {
                return Err(Error::ZeroNormal { index });
            }
        }
        Ok(Polytope {
            dim,
            halfspaces,
            vertices: OnceLock::new(),
            simplices: OnceLock::new(),
        })
    }

    /// The box `[lo_1, hi_1] x ... x [lo_n, hi_n]`.
    pub fn cuboid(bounds: &[(Rational, Rational)]) -> Result<Self> {
        let dim = bounds.len();
        let mut hs = Vec::with_capacity(2 * dim);
        for (i, (lo, hi)) in bounds.iter().enumerate() {
            let mut e = vec![0; dim];
            e[i] = 1;
            hs.push(HalfSpace::new(NVector(e.clone()), -lo.clone()));
            e[i] = -1;
            hs.push(HalfSpace::new(NVector(e), hi.clone()));
        }
        Polytope::new(dim, hs)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn halfspaces(&self) -> &[HalfSpace] {
        &self.halfspaces
    }

    pub fn contains(&self, u: &MPoint) -> Result<bool> {
        self.check_dim(u.dim())?;
        Ok(self.halfspaces.iter().all(|h| h.contains(u)))
    }

    fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found,
            });
        }
        Ok(())
    }

    fn normal_rows(&self) -> Vec<Vec<Rational>> {
        self.halfspaces
            .iter()
            .map(|h| h.normal.as_rationals())
            .collect()
    }

    /// `true` when `{u : <u, v_i> >= 0 for all i}` is `{0}`.
    pub fn has_trivial_recession_cone(&self) -> bool {
        let n = self.dim;
        let rows = self.normal_rows();
        if rows.len() < n + 1 || rank(&rows) < n {
            return false;
        }
        // Rank n means the cone is pointed; a nonzero cone then has an extreme
        // ray cut out by n-1 independent tight normals.
        for subset in (0..rows.len()).combinations(n - 1) {
            let sub: Vec<Vec<Rational>> = subset.iter().map(|&i| rows[i].clone()).collect();
            let Some(dir) = kernel_line(&sub, n) else {
                continue;
            };
            let signs: Vec<Rational> = rows
                .iter()
                .map(|r| r.iter().zip(&dir).map(|(a, b)| a * b).sum())
                .collect();
            if signs.iter().all(|s| !s.is_negative()) || signs.iter().all(|s| !s.is_positive()) {
                return false;
            }
        }
        true
    }

    /// Exact vertex set, lexicographically sorted. Empty iff the polytope is empty.
    pub fn vertices(&self) -> Result<&[MPoint]> {
        self.vertices
            .get_or_init(|| self.enumerate_vertices())
            .as_ref()
            .map(Vec::as_slice)
            .map_err(Clone::clone)
    }

    fn enumerate_vertices(&self) -> Result<Vec<MPoint>> {
        if !self.has_trivial_recession_cone() {
            return Err(Error::UnboundedPolytope);
        }
        let n = self.dim;
        let rows = self.normal_rows();
        let mut found = BTreeSet::new();
        for subset in (0..rows.len()).combinations(n) {
            let a: Vec<Vec<Rational>> = subset.iter().map(|&i| rows[i].clone()).collect();
            let b: Vec<Rational> = subset
                .iter()
                .map(|&i| -self.halfspaces[i].offset.clone())
                .collect();
            let Some(x) = solve(&a, &b) else { continue };
            let u = MPoint(x);
            if self.halfspaces.iter().all(|h| h.contains(&u)) {
                found.insert(u);
            }
        }
        Ok(found.into_iter().collect())
    }

    pub fn is_empty(&self) -> Result<bool> {
        Ok(self.vertices()?.is_empty())
    }

    /// Halfspace indices tight at each vertex.
    fn tight_sets(&self, vertices: &[MPoint]) -> Vec<BTreeSet<usize>> {
        self.halfspaces
            .iter()
            .map(|h| {
                vertices
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| h.slack(v).is_zero())
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect()
    }

    pub fn is_full_dimensional(&self) -> Result<bool> {
        let vs = self.vertices()?;
        Ok(!vs.is_empty() && affine_dim(vs, &(0..vs.len()).collect::<Vec<_>>()) == self.dim)
    }

    /// Indices of half-spaces that cut out an `(n-1)`-dimensional facet.
    pub fn facet_indices(&self) -> Result<Vec<usize>> {
        let vs = self.vertices()?;
        Ok(self
            .tight_sets(vs)
            .iter()
            .enumerate()
            .filter(|(_, t)| {
                let idx: Vec<usize> = t.iter().copied().collect();
                !idx.is_empty() && affine_dim(vs, &idx) + 1 == self.dim
            })
            .map(|(i, _)| i)
            .collect())
    }

    /// Triangulation in which each face is coned from its lexicographically
    /// least vertex over a recursive triangulation of its own facets.
    pub fn triangulation(&self) -> Result<&[Simplex]> {
        self.simplices
            .get_or_init(|| {
                let n_vertices = self.vertices()?.len();
                self.triangulation_with_order(&(0..n_vertices).collect::<Vec<_>>())
            })
            .as_ref()
            .map(Vec::as_slice)
            .map_err(Clone::clone)
    }

    /// Same construction, but at every face the apex is the vertex that comes
    /// first in `order` (a permutation of vertex indices).
    pub fn triangulation_with_order(&self, order: &[usize]) -> Result<Vec<Simplex>> {
        let vs = self.vertices()?;
        if order.len() != vs.len() {
            return Err(Error::InvalidArgument(
                "vertex order must be a permutation of all vertices".into(),
            ));
        }
        if !self.is_full_dimensional()? {
            return Ok(Vec::new());
        }
        let mut rank_of = vec![0; vs.len()];
        for (r, &v) in order.iter().enumerate() {
            rank_of[v] = r;
        }
        let tight = self.tight_sets(vs);
        let all: Vec<usize> = (0..vs.len()).collect();
        Ok(triangulate_face(vs, &tight, &rank_of, &all, self.dim))
    }

    pub fn volume(&self) -> Result<Rational> {
        let vs = self.vertices()?;
        Ok(self
            .triangulation()?
            .iter()
            .map(|s| simplex_volume(vs, s))
            .sum())
    }

    pub fn barycenter(&self) -> Result<MPoint> {
        self.barycenter_from(self.triangulation()?)
    }

    /// Barycenter computed from an explicit triangulation.
    pub fn barycenter_from(&self, simplices: &[Simplex]) -> Result<MPoint> {
        let vs = self.vertices()?;
        let mut total = Rational::zero();
        let mut acc = MPoint::zero(self.dim);
        for s in simplices {
            let vol = simplex_volume(vs, s);
            let centroid = simplex_centroid(vs, s);
            acc = acc.add(&centroid.scale(&vol));
            total += vol;
        }
        if total.is_zero() {
            return Err(Error::DegeneratePolytope);
        }
        Ok(acc.scale(&(Rational::one() / total)))
    }

    pub fn volume_from(&self, simplices: &[Simplex]) -> Result<Rational> {
        let vs = self.vertices()?;
        Ok(simplices.iter().map(|s| simplex_volume(vs, s)).sum())
    }

    /// `∫_P ℓ du`, simplex by simplex: volume times the mean of `ℓ` on the vertices.
    pub fn integrate_linear(&self, f: &AffineFunctional) -> Result<Rational> {
        if f.linear.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: f.linear.len(),
            });
        }
        if !self.is_full_dimensional()? {
            return Err(Error::DegeneratePolytope);
        }
        let vs = self.vertices()?;
        let k = int(self.dim as i64 + 1);
        Ok(self
            .triangulation()?
            .iter()
            .map(|s| {
                let mean: Rational =
                    s.iter().map(|&i| f.eval(&vs[i])).sum::<Rational>() / &k;
                simplex_volume(vs, s) * mean
            })
            .sum())
    }

    /// `max_{u in P} <u, direction>`.
    pub fn max_linear(&self, direction: &NVector) -> Result<Rational> {
        self.check_dim(direction.dim())?;
        self.vertices()?
            .iter()
            .map(|v| v.pair(direction))
            .max()
            .ok_or(Error::EmptyPolytope)
    }

    /// Integer points of the dilate `mP`, sorted lexicographically.
    pub fn lattice_points(&self, m: u64) -> Result<Vec<LatticePoint>> {
        if m == 0 {
            return Err(Error::InvalidArgument("dilation factor must be positive".into()));
        }
        let vs = self.vertices()?;
        if vs.is_empty() {
            return Ok(Vec::new());
        }
        let mr = int(m as i64);
        let to_i64 = |x: num_bigint::BigInt| {
            x.to_i64()
                .ok_or_else(|| Error::InvalidArgument("lattice coordinates overflow i64".into()))
        };
        let mut lo = Vec::with_capacity(self.dim);
        let mut hi = Vec::with_capacity(self.dim);
        for k in 0..self.dim {
            let coords = vs.iter().map(|v| &v.0[k] * &mr);
            let min = coords.clone().min().unwrap();
            let max = coords.max().unwrap();
            lo.push(to_i64(ceil_int(&min))?);
            hi.push(to_i64(floor_int(&max))?);
        }
        // <w, v> >= -m c  <=>  <w, v> >= ceil(-m c) for integral w.
        let bounds: Vec<i128> = self
            .halfspaces
            .iter()
            .map(|h| to_i64(ceil_int(&(-&h.offset * &mr))).map(i128::from))
            .collect::<Result<_>>()?;
        let inside = |w: &[i64]| {
            self.halfspaces
                .iter()
                .zip(&bounds)
                .all(|(h, &b)| h.normal.pair_lattice(w) >= b)
        };
        let dim = self.dim;
        let rows: Vec<Vec<LatticePoint>> = (lo[0]..=hi[0])
            .into_par_iter()
            .map(|first| {
                let mut out = Vec::new();
                let mut w = lo.clone();
                w[0] = first;
                loop {
                    if inside(&w) {
                        out.push(w.clone());
                    }
                    // odometer over coordinates 1..dim
                    let mut k = dim;
                    loop {
                        if k == 1 {
                            return out;
                        }
                        k -= 1;
                        if w[k] < hi[k] {
                            w[k] += 1;
                            break;
                        }
                        w[k] = lo[k];
                    }
                }
            })
            .collect();
        Ok(rows.into_iter().flatten().collect())
    }

    /// Half-space description of `scale * P + shift`.
    pub fn affine_image(&self, scale: &Rational, shift: &MPoint) -> Result<Polytope> {
        if !scale.is_positive() {
            return Err(Error::InvalidArgument("scale must be positive".into()));
        }
        self.check_dim(shift.dim())?;
        // <(u'-s)/β, v> >= -c  <=>  <u', v> >= -(βc - <s, v>)
        let halfspaces = self
            .halfspaces
            .iter()
            .map(|h| HalfSpace::new(h.normal.clone(), scale * &h.offset - shift.pair(&h.normal)))
            .collect();
        let image = Polytope::new(self.dim, halfspaces)?;
        if let Some(Ok(vs)) = self.vertices.get() {
            let mapped: BTreeSet<MPoint> = vs.iter().map(|v| v.scale(scale).add(shift)).collect();
            let _ = image.vertices.set(Ok(mapped.into_iter().collect()));
        }
        Ok(image)
    }
}

fn affine_dim(vs: &[MPoint], idx: &[usize]) -> usize {
    let Some((&first, rest)) = idx.split_first() else {
        return 0;
    };
    let rows: Vec<Vec<Rational>> = rest.iter().map(|&i| vs[i].sub(&vs[first]).0).collect();
    if rows.is_empty() {
        0
    } else {
        rank(&rows)
    }
}

fn triangulate_face(
    vs: &[MPoint],
    tight: &[BTreeSet<usize>],
    rank_of: &[usize],
    face: &[usize],
    k: usize,
) -> Vec<Simplex> {
    let apex = *face.iter().min_by_key(|&&v| rank_of[v]).unwrap();
    if k == 0 {
        return vec![vec![apex]];
    }
    let face_set: BTreeSet<usize> = face.iter().copied().collect();
    let mut subfaces = BTreeSet::new();
    for t in tight {
        let sub: Vec<usize> = t.intersection(&face_set).copied().collect();
        if sub.len() >= k && !sub.contains(&apex) && affine_dim(vs, &sub) + 1 == k {
            subfaces.insert(sub);
        }
    }
    let mut out = Vec::new();
    for sub in subfaces {
        for mut s in triangulate_face(vs, tight, rank_of, &sub, k - 1) {
            s.push(apex);
            out.push(s);
        }
    }
    out
}

fn factorial(n: usize) -> Rational {
    (1..=n as i64).map(int).product()
}

fn simplex_volume(vs: &[MPoint], s: &Simplex) -> Rational {
    let base = &vs[s[0]];
    let rows: Vec<Vec<Rational>> = s[1..].iter().map(|&i| vs[i].sub(base).0).collect();
    determinant(&rows).abs() / factorial(rows.len())
}

fn simplex_centroid(vs: &[MPoint], s: &Simplex) -> MPoint {
    let dim = vs[s[0]].dim();
    let sum = s
        .iter()
        .fold(MPoint::zero(dim), |acc, &i| acc.add(&vs[i]));
    sum.scale(&(Rational::one() / int(s.len() as i64)))
}
