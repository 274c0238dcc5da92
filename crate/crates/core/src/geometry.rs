//! The moment polytope `M_n` (convex hull of `(i/n, (i/n)^2, (i/n)^3)`) and
//! the prismatoid obtained by lifting vertex `i` to height `1` when `i >= k`
//! and `0` otherwise.
//!
//! The upper and lower hulls of the prismatoid project onto two
//! subdivisions of `M_n` into tetrahedra. Both are pulling triangulations:
//! the upper one from `v_k`, the lower one from `v_{k-1}`, which is why a
//! single family generator parameterized by its apex covers both sides.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::moments::MomentTriple;
use crate::numeric::{det_affine_rows, sign, solve_exact, Rational};

/// Largest `n` accepted by the brute-force facet enumerator.
pub const BRUTE_FORCE_N_MAX: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MomentVertex {
    pub i: usize,
    pub n: usize,
    pub coords: Vec<Rational>,
}

pub fn moment_vertex(i: usize, n: usize, m: usize) -> MomentVertex {
    let t = Rational::new(BigInt::from(i), BigInt::from(n));
    let mut coords = Vec::with_capacity(m);
    let mut p = Rational::one();
    for _ in 0..m {
        p *= &t;
        coords.push(p.clone());
    }
    MomentVertex { i, n, coords }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrismatoidVertex {
    pub base: MomentVertex,
    pub lifted: bool,
}

impl PrismatoidVertex {
    pub fn new(i: usize, k: usize, n: usize, m: usize) -> Self {
        PrismatoidVertex { base: moment_vertex(i, n, m), lifted: i >= k }
    }

    pub fn coords(&self) -> Vec<Rational> {
        let mut c = self.base.coords.clone();
        c.push(if self.lifted { Rational::one() } else { Rational::zero() });
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Upper,
    Lower,
}

impl Side {
    pub fn tag(self) -> char {
        match self {
            Side::Upper => 'U',
            Side::Lower => 'L',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Block {
    One = 1,
    Two = 2,
    Three = 3,
    Four = 4,
}

impl Block {
    pub fn number(self) -> u8 {
        self as u8
    }

    pub fn from_number(b: u8) -> Option<Block> {
        match b {
            1 => Some(Block::One),
            2 => Some(Block::Two),
            3 => Some(Block::Three),
            4 => Some(Block::Four),
            _ => None,
        }
    }

    /// Labels a tetrahedron of the pulling triangulation from `v_apex` by its
    /// shape, returning the block and the index `i` or `t` of its edge pair.
    ///
    /// Blocks 1 and 2 are `<v0, v_apex, v_i, v_i+1>` with `i` below or above
    /// the apex; blocks 3 and 4 are `<v_t, v_t+1, v_apex, v_n>` likewise.
    pub fn classify(vertices: &[usize; 4], apex: usize, n: usize) -> Option<(Block, usize)> {
        let set: BTreeSet<usize> = vertices.iter().copied().collect();
        if set.len() != 4 || !set.contains(&apex) {
            return None;
        }
        let others: Vec<usize> = set.into_iter().filter(|&v| v != apex).collect();
        let has_zero = others.contains(&0);
        let has_n = others.contains(&n);
        let pair = |drop: usize| -> Option<usize> {
            let p: Vec<usize> = others.iter().copied().filter(|&v| v != drop).collect();
            (p.len() == 2 && p[1] == p[0] + 1).then_some(p[0])
        };
        let from_i = |i: usize| if i + 1 < apex { (Block::One, i) } else { (Block::Two, i) };
        let from_t = |t: usize| if t + 1 < apex { (Block::Three, t) } else { (Block::Four, t) };
        match (has_zero, has_n) {
            (true, false) => pair(0).filter(|&i| i >= 1).map(from_i),
            (false, true) => pair(n).map(from_t),
            (true, true) => {
                let middle = others[1];
                if middle == n - 1 && middle > apex {
                    Some(from_i(middle))
                } else if middle == 1 && middle < apex {
                    Some(from_t(0))
                } else {
                    None
                }
            }
            (false, false) => None,
        }
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// A tetrahedron of the upper or lower subdivision, vertices in the order of
/// its defining family.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Simplex {
    pub vertices: [usize; 4],
    pub side: Side,
    pub block: Block,
}

impl Simplex {
    pub fn sorted_vertices(&self) -> [usize; 4] {
        let mut v = self.vertices;
        v.sort_unstable();
        v
    }

    /// Identity of the simplex irrespective of vertex order and block label.
    pub fn key(&self) -> (Side, [usize; 4]) {
        (self.side, self.sorted_vertices())
    }
}

/// `U|L block a b c d`
impl fmt::Display for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.vertices;
        write!(f, "{} {} {} {} {} {}", self.side.tag(), self.block, a, b, c, d)
    }
}

impl FromStr for Simplex {
    type Err = Error;

    fn from_str(line: &str) -> Result<Self> {
        let bad = || Error::Parse(line.to_string());
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 6 {
            return Err(bad());
        }
        let side = match fields[0] {
            "U" => Side::Upper,
            "L" => Side::Lower,
            _ => return Err(bad()),
        };
        let block = fields[1].parse().ok().and_then(Block::from_number).ok_or_else(bad)?;
        let mut vertices = [0usize; 4];
        for (slot, text) in vertices.iter_mut().zip(&fields[2..]) {
            *slot = text.parse().map_err(|_| bad())?;
        }
        Ok(Simplex { vertices, side, block })
    }
}

pub fn format_facets(simplexes: &[Simplex]) -> String {
    simplexes.iter().map(|s| format!("{s}\n")).collect()
}

pub fn parse_facets(text: &str) -> Result<Vec<Simplex>> {
    text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).map(str::parse).collect()
}

/// Triangular facets of the cyclic polytope `M_n`: `<v0, v_i, v_i+1>` for
/// `i = 1..n-1` and `<v_t, v_t+1, v_n>` for `t = 0..n-2`.
pub fn cyclic_facets(n: usize) -> Result<Vec<[usize; 3]>> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("the moment polytope needs n >= 3, got {n}")));
    }
    let mut faces: Vec<[usize; 3]> = (1..n).map(|i| [0, i, i + 1]).collect();
    faces.extend((0..n - 1).map(|t| [t, t + 1, n]));
    Ok(faces)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MembershipResult {
    Interior,
    /// On the boundary; carries the vertex indices of the smallest face
    /// containing the point (a facet, an edge, or a single vertex).
    Boundary(Vec<usize>),
    /// Outside; carries the first facet whose supporting plane separates
    /// the point from the polytope.
    Outside([usize; 3]),
}

/// `M_n` with its facets and their orientation against the vertex centroid.
#[derive(Debug, Clone)]
pub struct MomentPolytope {
    n: usize,
    vertices: Vec<MomentVertex>,
    facets: Vec<[usize; 3]>,
    inward: Vec<i8>,
}

impl MomentPolytope {
    pub fn new(n: usize) -> Result<Self> {
        let facets = cyclic_facets(n)?;
        let vertices: Vec<MomentVertex> = (0..=n).map(|i| moment_vertex(i, n, 3)).collect();
        let centroid: Vec<Rational> = (0..3)
            .map(|j| vertices.iter().map(|v| &v.coords[j]).sum::<Rational>() / Rational::from_integer((n + 1).into()))
            .collect();
        let mut poly = MomentPolytope { n, vertices, facets, inward: Vec::new() };
        poly.inward = poly.facets.iter().map(|f| sign(&poly.facet_det(f, &centroid))).collect();
        debug_assert!(poly.inward.iter().all(|&s| s != 0));
        Ok(poly)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vertex(&self, i: usize) -> &MomentVertex {
        &self.vertices[i]
    }

    pub fn facets(&self) -> &[[usize; 3]] {
        &self.facets
    }

    fn facet_det(&self, f: &[usize; 3], x: &[Rational]) -> Rational {
        det_affine_rows(&[&self.vertices[f[0]].coords, &self.vertices[f[1]].coords, &self.vertices[f[2]].coords, x])
    }

    pub fn membership(&self, mu: &MomentTriple) -> Result<MembershipResult> {
        if mu.n() != self.n {
            return Err(Error::InvalidArgument(format!("query has n = {}, polytope has n = {}", mu.n(), self.n)));
        }
        Ok(self.classify_point(&mu.coords()))
    }

    pub fn classify_point(&self, x: &[Rational]) -> MembershipResult {
        let mut on: Vec<&[usize; 3]> = Vec::new();
        for (f, &s) in self.facets.iter().zip(&self.inward) {
            match sign(&self.facet_det(f, x)) * s {
                1 => {}
                0 => on.push(f),
                _ => return MembershipResult::Outside(*f),
            }
        }
        if on.is_empty() {
            return MembershipResult::Interior;
        }
        let mut face: BTreeSet<usize> = on[0].iter().copied().collect();
        for f in &on[1..] {
            face.retain(|v| f.contains(v));
        }
        MembershipResult::Boundary(face.into_iter().collect())
    }

    /// Convex weights of `x` over the given vertices (at most four), or an
    /// error if the vertices are affinely dependent or do not span `x`.
    pub fn weights(&self, vertices: &[usize], x: &[Rational]) -> Result<Vec<Rational>> {
        let mut a: Vec<Vec<Rational>> = vec![vec![Rational::one(); vertices.len()]];
        for j in 0..3 {
            a.push(vertices.iter().map(|&v| self.vertices[v].coords[j].clone()).collect());
        }
        let mut b = vec![Rational::one()];
        b.extend(x.iter().cloned());
        solve_exact(&a, &b).ok_or_else(|| Error::DegenerateSimplex(vertices.to_vec()))
    }
}

pub fn membership(mu: &MomentTriple) -> Result<MembershipResult> {
    MomentPolytope::new(mu.n())?.membership(mu)
}

/// Tetrahedra of the pulling triangulation of `M_n` from `v_apex`, listed
/// in four index families. Degenerate members (repeated vertices, which
/// arise for apex 0 or n) are skipped.
pub fn subdivision(apex: usize, n: usize, side: Side) -> Vec<Simplex> {
    let a = apex as isize;
    let n_i = n as isize;
    let range = |lo: isize, hi: isize| (lo.max(0)..=hi).filter(move |_| lo <= hi).map(|x| x as usize);
    let mut out = Vec::new();
    let mut push = |vertices: [usize; 4], block: Block| {
        let distinct: BTreeSet<usize> = vertices.iter().copied().collect();
        if distinct.len() == 4 {
            out.push(Simplex { vertices, side, block });
        }
    };
    for i in range(1, a - 2) {
        push([0, i, i + 1, apex], Block::One);
    }
    for i in range(a + 1, n_i - 1) {
        push([0, apex, i, i + 1], Block::Two);
    }
    for t in range(0, a - 2) {
        push([t, t + 1, apex, n], Block::Three);
    }
    for t in range(a + 1, n_i - 2) {
        push([apex, t, t + 1, n], Block::Four);
    }
    out
}

pub fn upper_facets(k: usize, n: usize) -> Vec<Simplex> {
    subdivision(k, n, Side::Upper)
}

pub fn lower_facets(k: usize, n: usize) -> Vec<Simplex> {
    match k.checked_sub(1) {
        Some(apex) => subdivision(apex, n, Side::Lower),
        None => Vec::new(),
    }
}

fn subsets<const R: usize>(pool: &[usize]) -> Vec<[usize; R]> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..R).collect();
    if pool.len() < R {
        return out;
    }
    loop {
        let mut pick = [0usize; R];
        for (slot, &i) in pick.iter_mut().zip(&idx) {
            *slot = pool[i];
        }
        out.push(pick);
        let Some(pos) = (0..R).rev().find(|&p| idx[p] != p + pool.len() - R) else {
            return out;
        };
        idx[pos] += 1;
        for p in pos + 1..R {
            idx[p] = idx[p - 1] + 1;
        }
    }
}

/// Facets of the prismatoid found by exhaustive supporting-hyperplane tests.
///
/// Every 4-subset that spans both bases is kept when `||r_a, r_b, r_c, r_d, r_x||`
/// has a constant weak sign over all other vertices `x`; its side follows from
/// how the determinant changes when the interior reference point is lifted.
/// Subsets inside one base are not facets of their own; each base with at
/// least four vertices is a 3-dimensional facet, triangulated here by
/// pulling from the base vertex adjacent to the other base (`v_{k-1}` or
/// `v_k`) over the base facets found by the same sign test one dimension down.
pub fn brute_force_facets(k: usize, n: usize) -> Result<Vec<Simplex>> {
    if !(4..=BRUTE_FORCE_N_MAX).contains(&n) {
        return Err(Error::InvalidArgument(format!(
            "brute-force facet enumeration needs 4 <= n <= {BRUTE_FORCE_N_MAX}"
        )));
    }
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("k must be in 1..={n}")));
    }
    let verts: Vec<Vec<Rational>> = (0..=n).map(|i| PrismatoidVertex::new(i, k, n, 3).coords()).collect();
    let count = Rational::from_integer((n + 1).into());
    let centroid: Vec<Rational> = (0..4).map(|j| verts.iter().map(|v| &v[j]).sum::<Rational>() / &count).collect();
    let mut lifted_centroid = centroid.clone();
    lifted_centroid[3] += Rational::one();

    let all: Vec<usize> = (0..=n).collect();
    let mut found: Vec<Simplex> = subsets::<4>(&all)
        .into_par_iter()
        .filter(|s| s.iter().any(|&i| i < k) && s.iter().any(|&i| i >= k))
        .filter_map(|s| {
            let det = |x: &[Rational]| det_affine_rows(&[&verts[s[0]], &verts[s[1]], &verts[s[2]], &verts[s[3]], x]);
            let mut seen = 0i8;
            for x in (0..=n).filter(|x| !s.contains(x)) {
                let d = sign(&det(&verts[x]));
                if d != 0 && seen != 0 && d != seen {
                    return None;
                }
                if d != 0 {
                    seen = d;
                }
            }
            let inside = sign(&det(&centroid));
            let above = sign(&(det(&lifted_centroid) - det(&centroid)));
            // lifting moves toward the interior side => the facet is below
            let side = if above == inside { Side::Lower } else { Side::Upper };
            let apex = if side == Side::Upper { k } else { k - 1 };
            Some(
                Block::classify(&s, apex, n)
                    .map(|(block, _)| Simplex { vertices: s, side, block })
                    .ok_or_else(|| Error::UnexpectedFacet(s.to_vec())),
            )
        })
        .collect::<Result<_>>()?;

    if k >= 4 {
        found.extend(base_triangulation(&(0..k).collect::<Vec<_>>(), k - 1, n, Side::Lower)?);
    }
    if n - k >= 3 {
        found.extend(base_triangulation(&(k..=n).collect::<Vec<_>>(), k, n, Side::Upper)?);
    }
    found.sort_by_key(Simplex::key);
    Ok(found)
}

/// Pulling triangulation of the cyclic polytope on `base` from `apex`.
fn base_triangulation(base: &[usize], apex: usize, n: usize, side: Side) -> Result<Vec<Simplex>> {
    let pts: Vec<Vec<Rational>> = (0..=n).map(|i| moment_vertex(i, n, 3).coords).collect();
    subsets::<3>(base)
        .into_iter()
        .filter(|f| !f.contains(&apex))
        .filter(|f| {
            let signs: BTreeSet<i8> = base
                .iter()
                .filter(|x| !f.contains(x))
                .map(|&x| sign(&det_affine_rows(&[&pts[f[0]], &pts[f[1]], &pts[f[2]], &pts[x]])))
                .collect();
            !(signs.contains(&1) && signs.contains(&-1))
        })
        .map(|f| {
            let vertices = [apex, f[0], f[1], f[2]];
            Block::classify(&vertices, apex, n)
                .map(|(block, _)| Simplex { vertices, side, block })
                .ok_or_else(|| Error::UnexpectedFacet(vertices.to_vec()))
        })
        .collect()
}

/// Whether `m + 2` prismatoid vertices (for moment dimension `m`) are
/// affinely independent, i.e. their bordered determinant is nonzero.
pub fn affinely_independent(vertices: &[PrismatoidVertex]) -> Result<bool> {
    let m = vertices.first().map_or(0, |v| v.base.coords.len());
    if vertices.len() != m + 2 {
        return Err(Error::DimensionMismatch { expected: m + 2, found: vertices.len() });
    }
    if vertices.iter().any(|v| v.base.coords.len() != m) {
        return Err(Error::InvalidArgument("vertices of mixed moment dimension".into()));
    }
    let coords: Vec<Vec<Rational>> = vertices.iter().map(PrismatoidVertex::coords).collect();
    let rows: Vec<&[Rational]> = coords.iter().map(Vec::as_slice).collect();
    Ok(!det_affine_rows(&rows).is_zero())
}

/// Barycentric coordinates of `mu` in a tetrahedron of `M_n`, ordered like
/// the simplex's vertices.
pub fn barycentric(simplex: &Simplex, mu: &MomentTriple) -> Result<[Rational; 4]> {
    let poly = MomentPolytope::new(mu.n())?;
    barycentric_in(&poly, &simplex.vertices, mu)
}

pub(crate) fn barycentric_in(poly: &MomentPolytope, vertices: &[usize; 4], mu: &MomentTriple) -> Result<[Rational; 4]> {
    if vertices.iter().any(|&v| v > poly.n()) {
        return Err(Error::IndexExceedsN { index: *vertices.iter().max().unwrap(), n: poly.n() });
    }
    let w = poly.weights(vertices, &mu.coords())?;
    Ok([w[0].clone(), w[1].clone(), w[2].clone(), w[3].clone()])
}
