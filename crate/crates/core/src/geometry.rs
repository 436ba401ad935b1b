//! Ordered simplices, the supporting hyperplane, clipping and simplicial
//! decompositions of the positivity polytope.
//!
//! Points are stored with all `N` coordinates. Computation happens in the
//! chart of a degeneracy face: for blocks `(k₁,…,k_s)` a face point has block
//! values `ρ₁ > … > ρ_s` and chart coordinates `xᵢ = ρᵢ − 1/N`, `i < s`. The
//! maximally mixed state is the chart origin.

use std::cmp::Ordering;

use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::polyalg::AffineChartMap;
use crate::scalar::{factorial, Scalar};
use crate::strata::{degeneracy_pattern, DegeneracyType, KernelSpectrum};

/// Margins with absolute value below this count as zero for float types.
pub const MARGIN_TOL: f64 = 1e-12;
/// Vertex merge tolerance in the chart metric.
pub const DEDUP_TOL: f64 = 1e-10;

/// Chart of the degeneracy face with the given block sizes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaceChart {
    blocks: Vec<usize>,
}

impl FaceChart {
    pub fn new(deg: &DegeneracyType) -> Self {
        Self {
            blocks: deg.multiplicities().to_vec(),
        }
    }

    pub fn n(&self) -> usize {
        self.blocks.iter().sum()
    }

    pub fn dim(&self) -> usize {
        self.blocks.len() - 1
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    /// Lebesgue weight `1/k_s` of the chart against `δ(1 − Σkᵢρᵢ)`.
    pub fn weight<S: Scalar>(&self) -> S {
        S::ratio(1, *self.blocks.last().unwrap() as i64)
    }

    pub fn block_values<S: Scalar>(&self, r: &[S]) -> Vec<S> {
        let mut out = Vec::with_capacity(self.blocks.len());
        let mut i = 0;
        for &k in &self.blocks {
            out.push(r[i].clone());
            i += k;
        }
        out
    }

    pub fn full_from_blocks<S: Scalar>(&self, rho: &[S]) -> Vec<S> {
        self.blocks
            .iter()
            .zip(rho)
            .flat_map(|(&k, v)| std::iter::repeat_n(v.clone(), k))
            .collect()
    }

    pub fn to_chart<S: Scalar>(&self, r: &[S]) -> Vec<S> {
        let c = S::ratio(1, self.n() as i64);
        self.block_values(r)
            .into_iter()
            .take(self.dim())
            .map(|v| v - c.clone())
            .collect()
    }

    pub fn from_chart<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let c = S::ratio(1, self.n() as i64);
        let ks = S::from_i64(*self.blocks.last().unwrap() as i64);
        let mut rho: Vec<S> = x.iter().map(|v| c.clone() + v.clone()).collect();
        let shift = x
            .iter()
            .zip(&self.blocks)
            .fold(S::zero(), |a, (v, &k)| a + S::from_i64(k as i64) * v.clone());
        rho.push(c - shift / ks);
        self.full_from_blocks(&rho)
    }

    /// Chart coordinates to block values, as an affine map based at the
    /// maximally mixed point.
    pub fn block_map<S: Scalar>(&self) -> AffineChartMap<S> {
        let s = self.blocks.len();
        let c = S::ratio(1, self.n() as i64);
        let ks = *self.blocks.last().unwrap() as i64;
        let dirs = (0..s - 1)
            .map(|i| {
                let mut d = vec![S::zero(); s];
                d[i] = S::one();
                d[s - 1] = S::ratio(-(self.blocks[i] as i64), ks);
                d
            })
            .collect();
        AffineChartMap {
            base: vec![c; s],
            directions: dirs,
        }
    }
}

/// Simplex on a degeneracy face, vertices in `N` coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Simplex<S> {
    pub vertices: Vec<Vec<S>>,
    pub blocks: DegeneracyType,
}

impl<S: Scalar> Simplex<S> {
    pub fn new(vertices: Vec<Vec<S>>, blocks: DegeneracyType) -> Result<Self> {
        let n = blocks.n();
        for v in &vertices {
            if v.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: v.len() });
            }
        }
        Ok(Self { vertices, blocks })
    }

    pub fn dim(&self) -> usize {
        self.vertices.len().saturating_sub(1)
    }

    pub fn chart(&self) -> FaceChart {
        FaceChart::new(&self.blocks)
    }

    pub fn chart_vertices(&self) -> Vec<Vec<S>> {
        let c = self.chart();
        self.vertices.iter().map(|v| c.to_chart(v)).collect()
    }

    pub fn block_vertices(&self) -> Vec<Vec<S>> {
        let c = self.chart();
        self.vertices.iter().map(|v| c.block_values(v)).collect()
    }
}

impl<S: Scalar> Serialize for Simplex<S> {
    fn serialize<Z: Serializer>(&self, serializer: Z) -> std::result::Result<Z::Ok, Z::Error> {
        let mut st = serializer.serialize_struct("Simplex", 3)?;
        st.serialize_field("vertices", &string_rows(&self.vertices))?;
        st.serialize_field("blocks", self.blocks.multiplicities())?;
        st.serialize_field("dim", &self.dim())?;
        st.end()
    }
}

fn string_rows<S: Scalar>(rows: &[Vec<S>]) -> Vec<Vec<String>> {
    rows.iter().map(|v| v.iter().map(Scalar::to_json_string).collect()).collect()
}

/// `(1/m,…,1/m, 0,…,0)` with `m` leading entries.
fn weight_vertex<S: Scalar>(n: usize, m: usize) -> Vec<S> {
    (0..n).map(|i| if i < m { S::ratio(1, m as i64) } else { S::zero() }).collect()
}

/// Ordered simplex `C_{N−1}` listed from the maximally mixed state towards
/// the pure state `(1,0,…,0)`.
pub fn ordered_simplex<S: Scalar>(n: usize) -> Result<Simplex<S>> {
    if n < 2 {
        return Err(Error::Domain(format!("dimension must be at least 2, got {n}")));
    }
    face_simplex(&DegeneracyType::regular(n))
}

/// Face of the ordered simplex where eigenvalues repeat according to the
/// composition, starting at the maximally mixed state.
pub fn face_simplex<S: Scalar>(deg: &DegeneracyType) -> Result<Simplex<S>> {
    let n = deg.n();
    let mut cumulative: Vec<usize> = deg
        .multiplicities()
        .iter()
        .scan(0, |acc, &k| {
            *acc += k;
            Some(*acc)
        })
        .collect();
    cumulative.reverse();
    let vertices = cumulative.into_iter().map(|m| weight_vertex(n, m)).collect();
    Simplex::new(vertices, deg.clone())
}

/// Supporting hyperplane: `π` in increasing order paired with `r` in
/// decreasing order.
#[derive(Clone, Debug, PartialEq)]
pub struct Hyperplane<S> {
    pub coefficients: Vec<S>,
}

impl<S: Scalar> Hyperplane<S> {
    pub fn from_spectrum(pi: &KernelSpectrum<S>) -> Self {
        Self {
            coefficients: pi.pi().iter().rev().cloned().collect(),
        }
    }

    pub fn eval(&self, r: &[S]) -> S {
        self.coefficients
            .iter()
            .zip(r)
            .fold(S::zero(), |a, (c, x)| a + c.clone() * x.clone())
    }
}

/// `Σ rᵢ π_{N+1−i}`; the state is classical iff this is non-negative.
pub fn classicality_margin<S: Scalar>(r: &[S], pi: &KernelSpectrum<S>) -> Result<S> {
    if r.len() != pi.n() {
        return Err(Error::DimensionMismatch { expected: pi.n(), got: r.len() });
    }
    for i in 1..r.len() {
        let gap = r[i - 1].clone() - r[i].clone();
        if gap.sign_tol(MARGIN_TOL) == Ordering::Less {
            return Err(Error::Contract(format!("r is not sorted: r_{} < r_{}", i, i + 1)));
        }
    }
    Ok(Hyperplane::from_spectrum(pi).eval(r))
}

fn margin_sign<S: Scalar>(m: &S) -> Ordering {
    m.sign_tol(MARGIN_TOL)
}

/// Convex region of classical spectra on one degeneracy face.
#[derive(Clone, Debug)]
pub struct Polytope<S> {
    pub vertices: Vec<Vec<S>>,
    pub tags: Vec<String>,
    pub dim: usize,
    pub source: Simplex<S>,
    pub hyperplane: Hyperplane<S>,
}

impl<S: Scalar> Serialize for Polytope<S> {
    fn serialize<Z: Serializer>(&self, serializer: Z) -> std::result::Result<Z::Ok, Z::Error> {
        let mut st = serializer.serialize_struct("Polytope", 3)?;
        st.serialize_field("vertices", &string_rows(&self.vertices))?;
        st.serialize_field("tags", &self.tags)?;
        st.serialize_field("dim", &self.dim)?;
        st.end()
    }
}

/// Clips the degeneracy face of `deg` by the half-space `(r↓, π↑) ≥ 0`.
pub fn positivity_polytope<S: Scalar>(pi: &KernelSpectrum<S>, deg: &DegeneracyType) -> Result<Polytope<S>> {
    if deg.n() != pi.n() {
        return Err(Error::DimensionMismatch { expected: pi.n(), got: deg.n() });
    }
    let source = face_simplex::<S>(deg)?;
    let hyperplane = Hyperplane::from_spectrum(pi);
    let chart = source.chart();
    let mut vertices: Vec<Vec<S>> = Vec::new();
    for v in &source.vertices {
        if margin_sign(&hyperplane.eval(v)) != Ordering::Less {
            vertices.push(v.clone());
        }
    }
    for (_, _, p) in edge_crossings(&source, &hyperplane) {
        vertices.push(p);
    }
    let mut unique: Vec<Vec<S>> = Vec::new();
    for v in vertices {
        let cv = chart.to_chart(&v);
        let dup = unique.iter().any(|u| {
            chart
                .to_chart(u)
                .iter()
                .zip(&cv)
                .all(|(a, b)| (a.clone() - b.clone()).to_f64().abs() <= DEDUP_TOL)
        });
        if !dup {
            unique.push(v);
        }
    }
    assert!(!unique.is_empty(), "the maximally mixed state is always classical");
    let tags = unique.iter().map(|v| degeneracy_pattern(v).label()).collect();
    Ok(Polytope {
        dim: source.dim(),
        vertices: unique,
        tags,
        source,
        hyperplane,
    })
}

/// Points where edges of `s` with strictly opposite margin signs cross the
/// hyperplane, as `(i, j, point)` with vertex indices `i < j`.
pub fn edge_crossings<S: Scalar>(s: &Simplex<S>, h: &Hyperplane<S>) -> Vec<(usize, usize, Vec<S>)> {
    let m: Vec<S> = s.vertices.iter().map(|v| h.eval(v)).collect();
    let mut out = Vec::new();
    for i in 0..s.vertices.len() {
        for j in i + 1..s.vertices.len() {
            let (si, sj) = (margin_sign(&m[i]), margin_sign(&m[j]));
            if si != Ordering::Equal && sj != Ordering::Equal && si != sj {
                out.push((i, j, crossing(&s.vertices[i], &m[i], &s.vertices[j], &m[j])));
            }
        }
    }
    out
}

fn crossing<S: Scalar>(vi: &[S], mi: &S, vj: &[S], mj: &S) -> Vec<S> {
    let den = mi.clone() - mj.clone();
    vi.iter()
        .zip(vj)
        .map(|(a, b)| (mi.clone() * b.clone() - mj.clone() * a.clone()) / den.clone())
        .collect()
}

/// `(sign, simplex)` pairs whose signed indicator sum is the region.
#[derive(Clone, Debug)]
pub struct SignedSimplexList<S> {
    pub terms: Vec<(i8, Simplex<S>)>,
    /// Set when the region has no interior.
    pub degenerate: bool,
}

impl<S: Scalar> SignedSimplexList<S> {
    pub fn volume(&self) -> S {
        self.terms.iter().fold(S::zero(), |acc, (sign, s)| {
            let v = euclidean_volume(s);
            if *sign < 0 {
                acc - v
            } else {
                acc + v
            }
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

impl<S: Scalar> Serialize for SignedSimplexList<S> {
    fn serialize<Z: Serializer>(&self, serializer: Z) -> std::result::Result<Z::Ok, Z::Error> {
        let mut st = serializer.serialize_struct("SignedSimplexList", 2)?;
        let terms: Vec<(i8, &Simplex<S>)> = self.terms.iter().map(|(s, x)| (*s, x)).collect();
        st.serialize_field("terms", &terms)?;
        st.serialize_field("degenerate", &self.degenerate)?;
        st.end()
    }
}

#[derive(Clone)]
struct Pt<S> {
    x: Vec<S>,
    m: S,
}

/// Fan triangulation of `polytope` from the maximally mixed state.
pub fn triangulate<S: Scalar>(p: &Polytope<S>) -> SignedSimplexList<S> {
    let chart = p.source.chart();
    let pts: Vec<Pt<S>> = p
        .source
        .vertices
        .iter()
        .map(|v| Pt {
            x: chart.to_chart(v),
            m: p.hyperplane.eval(v),
        })
        .collect();
    let mut terms = Vec::new();
    for cell in clip_fan(&pts) {
        let verts = cell.iter().map(|q| chart.from_chart(&q.x)).collect();
        let s = Simplex {
            vertices: verts,
            blocks: p.source.blocks.clone(),
        };
        if !is_degenerate(&s) {
            terms.push((1, s));
        }
    }
    SignedSimplexList {
        degenerate: terms.is_empty(),
        terms,
    }
}

/// Triangulates `simplex ∩ {m ≥ 0}` by coning from the first positive
/// vertex: the cross-section `simplex ∩ {m = 0}` is a product of two
/// simplices joined with the zero vertices and is split by staircase paths,
/// and the facet opposite the apex is handled recursively.
fn clip_fan<S: Scalar>(v: &[Pt<S>]) -> Vec<Vec<Pt<S>>> {
    let signs: Vec<Ordering> = v.iter().map(|p| margin_sign(&p.m)).collect();
    if !signs.contains(&Ordering::Less) {
        return vec![v.to_vec()];
    }
    let Some(apex) = signs.iter().position(|&s| s == Ordering::Greater) else {
        return Vec::new();
    };
    let pos: Vec<usize> = (0..v.len()).filter(|&i| signs[i] == Ordering::Greater).collect();
    let neg: Vec<usize> = (0..v.len()).filter(|&i| signs[i] == Ordering::Less).collect();
    let zero: Vec<&Pt<S>> = (0..v.len()).filter(|&i| signs[i] == Ordering::Equal).map(|i| &v[i]).collect();
    let mut out = Vec::new();
    for path in staircase(pos.len(), neg.len()) {
        let mut cell = vec![v[apex].clone()];
        for (a, b) in path {
            let (p, q) = (&v[pos[a]], &v[neg[b]]);
            cell.push(Pt {
                x: crossing(&p.x, &p.m, &q.x, &q.m),
                m: S::zero(),
            });
        }
        cell.extend(zero.iter().map(|p| (*p).clone()));
        out.push(cell);
    }
    let facet: Vec<Pt<S>> = (0..v.len()).filter(|&i| i != apex).map(|i| v[i].clone()).collect();
    for sub in clip_fan(&facet) {
        let mut cell = vec![v[apex].clone()];
        cell.extend(sub);
        out.push(cell);
    }
    out
}

/// Monotone lattice paths from `(0,0)` to `(a−1, b−1)`.
fn staircase(a: usize, b: usize) -> Vec<Vec<(usize, usize)>> {
    fn go(i: usize, j: usize, a: usize, b: usize, cur: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        cur.push((i, j));
        if i + 1 == a && j + 1 == b {
            out.push(cur.clone());
        } else {
            if i + 1 < a {
                go(i + 1, j, a, b, cur, out);
            }
            if j + 1 < b {
                go(i, j + 1, a, b, cur, out);
            }
        }
        cur.pop();
    }
    let mut out = Vec::new();
    if a > 0 && b > 0 {
        go(0, 0, a, b, &mut Vec::new(), &mut out);
    }
    out
}

/// Cross-section type of the four-level polytope.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CrossSection {
    /// Triangle; the polytope is a tetrahedron.
    AType,
    /// Quadrilateral.
    BType,
}

pub fn classify_cross_section<S: Scalar>(pi: &KernelSpectrum<S>) -> Result<CrossSection> {
    if pi.n() != 4 {
        return Err(Error::Domain("cross-section types are defined for N = 4".into()));
    }
    let d = pi.pi()[0].clone() - S::one();
    Ok(if d.sign_tol(MARGIN_TOL) == Ordering::Less {
        CrossSection::BType
    } else {
        CrossSection::AType
    })
}

/// `+conv(O, P_OC, P_OA, P_OB) − conv(C, P_OC, P_AC, P_BC)` for a B-type
/// four-level spectrum. `P_OC` lies beyond `C` on the ray from `O`.
pub fn signed_decomposition_b_type<S: Scalar>(pi: &KernelSpectrum<S>) -> Result<SignedSimplexList<S>> {
    if classify_cross_section(pi)? != CrossSection::BType {
        return Err(Error::Domain("signed decomposition needs a B-type spectrum (pi_1 < 1)".into()));
    }
    let blocks = DegeneracyType::regular(4);
    let plus = Simplex::new(
        vec![quatrit::o(), quatrit::p_oc(pi), quatrit::p_oa(pi), quatrit::p_ob(pi)],
        blocks.clone(),
    )?;
    let minus = Simplex::new(
        vec![quatrit::c(), quatrit::p_oc(pi), quatrit::p_ac(pi), quatrit::p_bc(pi)],
        blocks,
    )?;
    Ok(SignedSimplexList {
        terms: vec![(1, plus), (-1, minus)],
        degenerate: false,
    })
}

/// `|det[v₁−v₀, …, v_m−v₀]| / m!` in the face chart. A point counts as
/// volume one.
pub fn euclidean_volume<S: Scalar>(s: &Simplex<S>) -> S {
    chart_volume(&s.chart_vertices())
}

pub fn is_degenerate<S: Scalar>(s: &Simplex<S>) -> bool {
    s.dim() > 0 && chart_volume(&s.chart_vertices()).sign_tol(1e-300) == Ordering::Equal
}

/// Volume of a simplex given by `m + 1` points of `Rᵐ`.
pub fn chart_volume<S: Scalar>(verts: &[Vec<S>]) -> S {
    let m = verts.len().saturating_sub(1);
    if m == 0 {
        return S::one();
    }
    let rows: Vec<Vec<S>> = verts[1..]
        .iter()
        .map(|v| v.iter().zip(&verts[0]).map(|(a, b)| a.clone() - b.clone()).collect())
        .collect();
    determinant(rows).abs() / S::from_bigint(&factorial(m))
}

/// Determinant by Gaussian elimination (largest pivot for floats, first
/// non-zero pivot for exact types).
pub fn determinant<S: Scalar>(mut a: Vec<Vec<S>>) -> S {
    let n = a.len();
    let mut det = S::one();
    for col in 0..n {
        let pivot = if S::EXACT {
            (col..n).find(|&r| !a[r][col].is_zero())
        } else {
            (col..n)
                .max_by(|&x, &y| {
                    a[x][col]
                        .to_f64()
                        .abs()
                        .partial_cmp(&a[y][col].to_f64().abs())
                        .unwrap_or(Ordering::Equal)
                })
                .filter(|&r| !a[r][col].is_zero())
        };
        let Some(p) = pivot else {
            return S::zero();
        };
        if p != col {
            a.swap(p, col);
            det = -det;
        }
        let piv = a[col][col].clone();
        det = det * piv.clone();
        for r in col + 1..n {
            let f = a[r][col].clone() / piv.clone();
            if f.is_zero() {
                continue;
            }
            let (top, bottom) = a.split_at_mut(r);
            for (x, p) in bottom[0][col..].iter_mut().zip(&top[col][col..]) {
                *x = x.clone() - f.clone() * p.clone();
            }
        }
    }
    det
}

/// Closed-form points of the four-level positivity polytope.
pub mod quatrit {
    use super::*;

    fn scaled<S: Scalar>(v: [S; 4], den: S) -> Vec<S> {
        v.into_iter().map(|x| x / den.clone()).collect()
    }

    fn p<S: Scalar>(pi: &KernelSpectrum<S>) -> [S; 4] {
        let v = pi.pi();
        [v[0].clone(), v[1].clone(), v[2].clone(), v[3].clone()]
    }

    pub fn o<S: Scalar>() -> Vec<S> {
        weight_vertex(4, 4)
    }

    pub fn c<S: Scalar>() -> Vec<S> {
        weight_vertex(4, 3)
    }

    pub fn b<S: Scalar>() -> Vec<S> {
        weight_vertex(4, 2)
    }

    pub fn a<S: Scalar>() -> Vec<S> {
        weight_vertex(4, 1)
    }

    /// On edge `OC` when `π₁ ≥ 1`; beyond `C` otherwise.
    pub fn p_oc<S: Scalar>(pi: &KernelSpectrum<S>) -> Vec<S> {
        let [p1, ..] = p(pi);
        let den = S::from_i64(4) * p1.clone() - S::one();
        scaled([p1.clone(), p1.clone(), p1.clone(), p1 - S::one()], den)
    }

    /// Intersection with the line through `A` and `B`; never on the edge.
    pub fn p_ab<S: Scalar>(pi: &KernelSpectrum<S>) -> Vec<S> {
        let [_, _, p3, p4] = p(pi);
        let den = p3.clone() - p4.clone();
        scaled([p3, -p4, S::zero(), S::zero()], den)
    }

    /// On edge `AC` when `π₁ ≤ 1`.
    pub fn p_ac<S: Scalar>(pi: &KernelSpectrum<S>) -> Vec<S> {
        let [p1, _, _, p4] = p(pi);
        let den = S::one() - p1.clone() - S::from_i64(3) * p4.clone();
        scaled([S::one() - p1 - p4.clone(), -p4.clone(), -p4, S::zero()], den)
    }

    pub fn p_oa<S: Scalar>(pi: &KernelSpectrum<S>) -> Vec<S> {
        let [_, _, _, p4] = p(pi);
        let den = S::one() - S::from_i64(4) * p4.clone();
        scaled([S::one() - p4.clone(), -p4.clone(), -p4.clone(), -p4], den)
    }

    pub fn p_ob<S: Scalar>(pi: &KernelSpectrum<S>) -> Vec<S> {
        let [p1, p2, p3, p4] = p(pi);
        let hi = p1 + p2;
        let lo = -(p3 + p4);
        let den = S::from_i64(2) * (hi.clone() + lo.clone());
        scaled([hi.clone(), hi, lo.clone(), lo], den)
    }

    /// On edge `BC` when `½ ≤ π₂ ≤ π₁ ≤ 1`.
    pub fn p_bc<S: Scalar>(pi: &KernelSpectrum<S>) -> Vec<S> {
        let [p1, p2, _, _] = p(pi);
        let den = p1.clone() + S::from_i64(3) * p2.clone() - S::one();
        scaled([p2.clone(), p2.clone(), p1 + p2 - S::one(), S::zero()], den)
    }

    /// Whether the `AB` line point lies on the closed edge `AB`.
    pub fn p_ab_on_edge<S: Scalar>(pi: &KernelSpectrum<S>) -> bool {
        let [_, _, p3, p4] = p(pi);
        let den = p3.clone() - p4.clone();
        if den.sign_tol(MARGIN_TOL) != Ordering::Greater {
            return false;
        }
        let x = p3 / den.clone();
        let y = -p4 / den;
        x >= y && y >= S::zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{Rational, Surd};
    use num::{One, Zero};

    fn q(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }

    fn qutrit() -> KernelSpectrum<Rational> {
        KernelSpectrum::new(vec![q(1, 1), q(1, 1), q(-1, 1)]).unwrap()
    }

    fn a_type() -> KernelSpectrum<Surd> {
        KernelSpectrum::new(vec![
            Surd::parse("1/2+1/2*sqrt(7)").unwrap(),
            Surd::zero(),
            Surd::zero(),
            Surd::parse("1/2-1/2*sqrt(7)").unwrap(),
        ])
        .unwrap()
    }

    fn b_type() -> KernelSpectrum<Surd> {
        KernelSpectrum::new(vec![
            Surd::ratio(9, 10),
            Surd::ratio(9, 10),
            Surd::parse("-2/5+1/10*sqrt(103)").unwrap(),
            Surd::parse("-2/5-1/10*sqrt(103)").unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn ordered_simplices() {
        let s = ordered_simplex::<Rational>(3).unwrap();
        assert_eq!(
            s.vertices,
            vec![vec![q(1, 3), q(1, 3), q(1, 3)], vec![q(1, 2), q(1, 2), q(0, 1)], vec![q(1, 1), q(0, 1), q(0, 1)]]
        );
        let s2 = ordered_simplex::<Rational>(2).unwrap();
        assert_eq!(s2.vertices, vec![vec![q(1, 2), q(1, 2)], vec![q(1, 1), q(0, 1)]]);
        let s4 = ordered_simplex::<Rational>(4).unwrap();
        assert_eq!(s4.vertices[0], quatrit::o::<Rational>());
        assert_eq!(s4.vertices[1], quatrit::c::<Rational>());
        assert_eq!(s4.vertices[2], quatrit::b::<Rational>());
        assert_eq!(s4.vertices[3], quatrit::a::<Rational>());
        assert!(ordered_simplex::<Rational>(1).is_err());
    }

    #[test]
    fn face_chart_round_trip() {
        let deg = DegeneracyType::new(vec![1, 2, 1]).unwrap();
        let chart = FaceChart::new(&deg);
        let x = vec![q(1, 5), q(-1, 7)];
        let r = chart.from_chart(&x);
        assert_eq!(r.len(), 4);
        assert_eq!(r[1], r[2]);
        assert_eq!(r.iter().cloned().fold(q(0, 1), |a, b| a + b), q(1, 1));
        assert_eq!(chart.to_chart(&r), x);
        let via_map = chart.block_map::<Rational>().apply(&x);
        assert_eq!(chart.full_from_blocks(&via_map), r);
    }

    #[test]
    fn margins() {
        let pi = qutrit();
        let o = vec![q(1, 3), q(1, 3), q(1, 3)];
        assert_eq!(classicality_margin(&o, &pi).unwrap(), q(1, 3));
        let unsorted = vec![q(0, 1), q(1, 2), q(1, 2)];
        assert!(matches!(classicality_margin(&unsorted, &pi), Err(Error::Contract(_))));
        let qb = KernelSpectrum::<Surd>::qubit().unwrap();
        let r = vec![Surd::parse("1/2+1/6*sqrt(3)").unwrap(), Surd::parse("1/2-1/6*sqrt(3)").unwrap()];
        assert!(classicality_margin(&r, &qb).unwrap().is_zero());
    }

    #[test]
    fn qutrit_polytope_is_triangle() {
        let p = positivity_polytope(&qutrit(), &DegeneracyType::regular(3)).unwrap();
        assert_eq!(p.vertices.len(), 3);
        assert!(p.vertices.contains(&vec![q(1, 2), q(1, 2), q(0, 1)]));
        // crossing on OA at a quarter of the way from O
        assert!(p.vertices.contains(&vec![q(1, 2), q(1, 4), q(1, 4)]));
        for v in &p.vertices {
            assert!(classicality_margin(v, &qutrit()).unwrap() >= q(0, 1));
        }
        let t = triangulate(&p);
        assert_eq!(t.len(), 1);
        assert!(!t.degenerate);
    }

    #[test]
    fn a_type_is_tetrahedron_with_closed_form_vertices() {
        let pi = a_type();
        assert_eq!(classify_cross_section(&pi).unwrap(), CrossSection::AType);
        let p = positivity_polytope(&pi, &DegeneracyType::regular(4)).unwrap();
        assert_eq!(p.vertices.len(), 4);
        for v in [quatrit::o(), quatrit::p_oc(&pi), quatrit::p_oa(&pi), quatrit::p_ob(&pi)] {
            assert!(p.vertices.contains(&v), "{v:?}");
        }
        let den = quatrit::p_oc(&pi)[0].clone() / pi.pi()[0].clone();
        assert_eq!(Surd::one() / den, Surd::parse("1+2*sqrt(7)").unwrap());
        assert_eq!(p.tags[0], "SU(4)");
        let oc = p.vertices.iter().position(|v| *v == quatrit::p_oc(&pi)).unwrap();
        assert_eq!(p.tags[oc], "S(U(3)×U(1))");
        assert_eq!(triangulate(&p).len(), 1);
    }

    #[test]
    fn b_type_polytope_and_signed_decomposition() {
        let pi = b_type();
        assert_eq!(classify_cross_section(&pi).unwrap(), CrossSection::BType);
        let p = positivity_polytope(&pi, &DegeneracyType::regular(4)).unwrap();
        assert_eq!(p.vertices.len(), 6);
        for v in [quatrit::o(), quatrit::c(), quatrit::p_ac(&pi), quatrit::p_oa(&pi), quatrit::p_ob(&pi), quatrit::p_bc(&pi)] {
            assert!(p.vertices.contains(&v), "{v:?}");
        }
        let fan = triangulate(&p);
        assert_eq!(fan.len(), 3);
        let signed = signed_decomposition_b_type(&pi).unwrap();
        assert_eq!(signed.terms.iter().map(|t| t.0).collect::<Vec<_>>(), vec![1, -1]);
        assert_eq!(fan.volume(), signed.volume());
        for v in &signed.terms[1].1.vertices {
            assert!(v[3] <= Surd::zero() || v[3].is_zero());
        }
        assert!(signed_decomposition_b_type(&a_type()).is_err());
    }

    #[test]
    fn boundary_spectrum_is_a_type() {
        // π = (1, 1, (−1+√3)/2, (−1−√3)/2) sits on π₁ = 1
        let s3 = Surd::sqrt_of(3);
        let pi = KernelSpectrum::new(vec![
            Surd::one(),
            Surd::one(),
            (Surd::from_i64(-1) + s3.clone()) / Surd::from_i64(2),
            (Surd::from_i64(-1) - s3) / Surd::from_i64(2),
        ])
        .unwrap();
        assert_eq!(classify_cross_section(&pi).unwrap(), CrossSection::AType);
        let p = positivity_polytope(&pi, &DegeneracyType::regular(4)).unwrap();
        assert_eq!(quatrit::p_oc(&pi), quatrit::c());
        assert_eq!(quatrit::p_ac(&pi), quatrit::c());
        assert_eq!(p.vertices.len(), 4);
    }

    #[test]
    fn p_ab_never_on_edge() {
        assert!(!quatrit::p_ab_on_edge(&a_type()));
        assert!(!quatrit::p_ab_on_edge(&b_type()));
        let s = ordered_simplex::<Surd>(4).unwrap();
        let h = Hyperplane::from_spectrum(&b_type());
        assert!(edge_crossings(&s, &h).iter().all(|(i, j, _)| (*i, *j) != (2, 3)));
    }

    #[test]
    fn volumes() {
        let k2 = vec![vec![q(0, 1), q(0, 1)], vec![q(1, 1), q(0, 1)], vec![q(0, 1), q(1, 1)]];
        assert_eq!(chart_volume(&k2), q(1, 2));
        let k3 = vec![
            vec![q(0, 1), q(0, 1), q(0, 1)],
            vec![q(1, 1), q(0, 1), q(0, 1)],
            vec![q(0, 1), q(1, 1), q(0, 1)],
            vec![q(0, 1), q(0, 1), q(1, 1)],
        ];
        assert_eq!(chart_volume(&k3), q(1, 6));
        assert_eq!(euclidean_volume(&ordered_simplex::<Rational>(3).unwrap()), q(1, 12));
        let rep = Simplex::new(
            vec![vec![q(1, 3), q(1, 3), q(1, 3)], vec![q(1, 2), q(1, 2), q(0, 1)], vec![q(1, 2), q(1, 2), q(0, 1)]],
            DegeneracyType::regular(3),
        )
        .unwrap();
        assert!(euclidean_volume(&rep).is_zero());
        assert!(is_degenerate(&rep));
        assert_eq!(determinant(vec![vec![q(1, 1), q(2, 1)], vec![q(3, 1), q(4, 1)]]), q(-2, 1));
        assert_eq!(determinant(vec![vec![2.0, 1.0], vec![4.0, 2.0]]), 0.0);
        assert!(Rational::one() > Rational::zero());
    }

    #[test]
    fn staircase_counts() {
        assert_eq!(staircase(2, 2).len(), 2);
        assert_eq!(staircase(3, 2).len(), 3);
        assert_eq!(staircase(3, 3).len(), 6);
        assert_eq!(staircase(1, 4).len(), 1);
        assert!(staircase(0, 2).is_empty());
    }

    #[test]
    fn degenerate_face_clipping() {
        let pi = qutrit();
        for k in [vec![2, 1], vec![1, 2]] {
            let deg = DegeneracyType::new(k).unwrap();
            let p = positivity_polytope(&pi, &deg).unwrap();
            assert_eq!(p.dim, 1);
            let t = triangulate(&p);
            assert_eq!(t.len(), 1);
            assert!(euclidean_volume(&t.terms[0].1) > q(0, 1));
        }
        let full = positivity_polytope(&pi, &DegeneracyType::full(3)).unwrap();
        assert_eq!(full.vertices.len(), 1);
        assert_eq!(full.dim, 0);
    }

    #[test]
    fn polytope_serializes() {
        let p = positivity_polytope(&qutrit(), &DegeneracyType::regular(3)).unwrap();
        let j = serde_json::to_value(&p).unwrap();
        assert_eq!(j["dim"], 2);
        assert_eq!(j["vertices"][0][0], "1/3");
        assert_eq!(j["tags"][0], "SU(3)");
    }
}
