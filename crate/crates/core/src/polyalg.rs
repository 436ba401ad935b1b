//! Sparse multivariate polynomials, affine pullbacks and products of
//! linear forms.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::ser::{SerializeSeq, Serializer};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{factorial, Scalar};
use crate::strata::DegeneracyType;

/// Exponent vector ordered graded-lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SparsePolynomial<S> {
    nvars: usize,
    terms: BTreeMap<Monomial, S>,
}

impl<S: Scalar> SparsePolynomial<S> {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: S) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(e, S::one());
        p
    }

    /// `c + Σ aᵢ xᵢ`.
    pub fn affine(constant: S, coeffs: &[S]) -> Self {
        let n = coeffs.len();
        let mut p = Self::constant(n, constant);
        for (i, a) in coeffs.iter().enumerate() {
            let mut e = vec![0; n];
            e[i] = 1;
            p.add_term(e, a.clone());
        }
        p
    }

    pub fn from_terms<I>(nvars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, S)>,
    {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            if e.len() != nvars {
                return Err(Error::DimensionMismatch {
                    expected: nvars,
                    got: e.len(),
                });
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &S)> {
        self.terms.iter().map(|(m, c)| (m.0.as_slice(), c))
    }

    pub fn coefficient(&self, exps: &[u32]) -> Option<&S> {
        self.terms.get(&Monomial(exps.to_vec()))
    }

    /// Total degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(Monomial::degree);
        match degs.next() {
            None => true,
            Some(d) => degs.all(|e| e == d),
        }
    }

    pub fn add_term(&mut self, exps: Vec<u32>, c: S) {
        if c.is_zero() {
            return;
        }
        let key = Monomial(exps);
        match self.terms.get_mut(&key) {
            Some(v) => {
                let sum = v.clone() + c;
                if sum.is_zero() {
                    self.terms.remove(&key);
                } else {
                    *v = sum;
                }
            }
            None => {
                self.terms.insert(key, c);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.0.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-S::one()))
    }

    pub fn scale(&self, k: &S) -> Self {
        let mut out = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            out.add_term(m.0.clone(), c.clone() * k.clone());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let e = ma.0.iter().zip(&mb.0).map(|(a, b)| a + b).collect();
                out.add_term(e, ca.clone() * cb.clone());
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::constant(self.nvars, S::one());
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn eval(&self, x: &[S]) -> S {
        let mut acc = S::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &e) in x.iter().zip(&m.0) {
                if e > 0 {
                    t = t * xi.powi(e);
                }
            }
            acc = acc + t;
        }
        acc
    }

    pub fn map_coefficients<T: Scalar>(&self, f: impl Fn(&S) -> T) -> SparsePolynomial<T> {
        let mut out = SparsePolynomial::zero(self.nvars);
        for (m, c) in &self.terms {
            out.add_term(m.0.clone(), f(c));
        }
        out
    }

    /// Splits into homogeneous components `(j, p_j)` in increasing degree.
    pub fn homogeneous_parts(&self) -> Vec<(u32, SparsePolynomial<S>)> {
        let mut parts: Vec<(u32, SparsePolynomial<S>)> = Vec::new();
        for (m, c) in &self.terms {
            let d = m.degree();
            if parts.last().map(|(j, _)| *j) != Some(d) {
                parts.push((d, Self::zero(self.nvars)));
            }
            parts.last_mut().unwrap().1.terms.insert(m.clone(), c.clone());
        }
        parts
    }

    /// Multiplies each coefficient `p_α` by `α₁!⋯αₙ!`.
    pub fn bombieri(&self) -> Self {
        let mut out = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            let w = m.0.iter().fold(num::BigInt::from(1), |acc, &e| acc * factorial(e as usize));
            out.add_term(m.0.clone(), c.clone() * S::from_bigint(&w));
        }
        out
    }

    pub fn sum_of_coefficients(&self) -> S {
        self.terms.values().cloned().fold(S::zero(), |a, b| a + b)
    }
}

impl<S: Scalar> Serialize for SparsePolynomial<S> {
    fn serialize<Z: Serializer>(&self, serializer: Z) -> std::result::Result<Z::Ok, Z::Error> {
        let mut seq = serializer.serialize_seq(Some(self.terms.len()))?;
        for (m, c) in &self.terms {
            seq.serialize_element(&(&m.0, c.to_json_string()))?;
        }
        seq.end()
    }
}

/// `u ↦ base + Σ_α u_α·directions[α]`, mapping the canonical simplex onto
/// `conv(base, base + directions[0], …)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineChartMap<S> {
    pub base: Vec<S>,
    pub directions: Vec<Vec<S>>,
}

impl<S: Scalar> AffineChartMap<S> {
    pub fn new(base: Vec<S>, directions: Vec<Vec<S>>) -> Result<Self> {
        for d in &directions {
            if d.len() != base.len() {
                return Err(Error::DimensionMismatch {
                    expected: base.len(),
                    got: d.len(),
                });
            }
        }
        Ok(Self { base, directions })
    }

    /// Map with `base = v₀` and `directions = vᵢ − v₀`.
    pub fn from_simplex(vertices: &[Vec<S>]) -> Result<Self> {
        let (v0, rest) = vertices
            .split_first()
            .ok_or_else(|| Error::Domain("simplex without vertices".into()))?;
        let dirs = rest
            .iter()
            .map(|v| v.iter().zip(v0).map(|(a, b)| a.clone() - b.clone()).collect())
            .collect();
        Self::new(v0.clone(), dirs)
    }

    pub fn identity(n: usize) -> Self {
        let dirs = (0..n)
            .map(|i| (0..n).map(|j| if i == j { S::one() } else { S::zero() }).collect())
            .collect();
        Self {
            base: vec![S::zero(); n],
            directions: dirs,
        }
    }

    pub fn source_dim(&self) -> usize {
        self.directions.len()
    }

    pub fn target_dim(&self) -> usize {
        self.base.len()
    }

    pub fn apply(&self, u: &[S]) -> Vec<S> {
        let mut out = self.base.clone();
        for (ua, d) in u.iter().zip(&self.directions) {
            for (o, dj) in out.iter_mut().zip(d) {
                *o = o.clone() + ua.clone() * dj.clone();
            }
        }
        out
    }

    /// Target coordinate `j` as an affine polynomial in the source variables.
    pub fn component(&self, j: usize) -> SparsePolynomial<S> {
        let coeffs: Vec<S> = self.directions.iter().map(|d| d[j].clone()).collect();
        SparsePolynomial::affine(self.base[j].clone(), &coeffs)
    }
}

/// Composes `p` with an affine map and expands. Horner recursion over the
/// target variables keeps the work proportional to the number of terms.
pub fn pullback<S: Scalar>(p: &SparsePolynomial<S>, map: &AffineChartMap<S>) -> Result<SparsePolynomial<S>> {
    if p.nvars() != map.target_dim() {
        return Err(Error::DimensionMismatch {
            expected: map.target_dim(),
            got: p.nvars(),
        });
    }
    let comps: Vec<SparsePolynomial<S>> = (0..map.target_dim()).map(|j| map.component(j)).collect();
    let terms: Vec<(&[u32], &S)> = p.terms().collect();
    Ok(horner(&terms, 0, &comps, map.source_dim()))
}

fn horner<S: Scalar>(
    terms: &[(&[u32], &S)],
    var: usize,
    comps: &[SparsePolynomial<S>],
    nsrc: usize,
) -> SparsePolynomial<S> {
    if var == comps.len() {
        let c = terms.iter().fold(S::zero(), |a, (_, c)| a + (*c).clone());
        return SparsePolynomial::constant(nsrc, c);
    }
    let mut groups: BTreeMap<u32, Vec<(&[u32], &S)>> = BTreeMap::new();
    for t in terms {
        groups.entry(t.0[var]).or_default().push(*t);
    }
    let top = *groups.keys().next_back().unwrap_or(&0);
    let mut acc = SparsePolynomial::zero(nsrc);
    for k in (0..=top).rev() {
        if !acc.is_empty() {
            acc = acc.mul(&comps[var]);
        }
        if let Some(g) = groups.get(&k) {
            acc = acc.add(&horner(g, var + 1, comps, nsrc));
        }
    }
    acc
}

/// Product `Π (aₛ·u)^{mₛ}` of homogeneous linear forms.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearFormProduct<S> {
    pub nvars: usize,
    pub factors: Vec<(Vec<S>, u32)>,
}

impl<S: Scalar> LinearFormProduct<S> {
    pub fn degree(&self) -> u32 {
        self.factors.iter().map(|(_, m)| m).sum()
    }

    pub fn eval(&self, x: &[S]) -> S {
        self.factors.iter().fold(S::one(), |acc, (a, m)| {
            let v = a.iter().zip(x).fold(S::zero(), |s, (ai, xi)| s + ai.clone() * xi.clone());
            acc * v.powi(*m)
        })
    }

    pub fn expand(&self) -> SparsePolynomial<S> {
        let mut acc = SparsePolynomial::constant(self.nvars, S::one());
        for (a, m) in &self.factors {
            let f = SparsePolynomial::affine(S::zero(), a);
            for _ in 0..*m {
                acc = acc.mul(&f);
            }
        }
        acc
    }

    /// The `q` forms listed with repetition.
    pub fn forms(&self) -> Vec<&[S]> {
        self.factors
            .iter()
            .flat_map(|(a, m)| std::iter::repeat_n(a.as_slice(), *m as usize))
            .collect()
    }
}

/// Difference forms `ρᵢ − ρⱼ` of the stratum density composed with `map`,
/// each repeated `2kᵢkⱼ` times. The map must be based at a point with all
/// block values equal so every form is homogeneous.
pub fn as_linear_form_product<S: Scalar>(
    deg: &DegeneracyType,
    map: &AffineChartMap<S>,
) -> Result<LinearFormProduct<S>> {
    let k = deg.multiplicities();
    if map.target_dim() != k.len() {
        return Err(Error::DimensionMismatch {
            expected: k.len(),
            got: map.target_dim(),
        });
    }
    if let Some(b0) = map.base.first() {
        if map.base.iter().any(|b| !b.approx_eq(b0, 1e-12)) {
            return Err(Error::NonHomogeneous(
                "chart base point must have equal block values".into(),
            ));
        }
    }
    let mut factors = Vec::new();
    for i in 0..k.len() {
        for j in i + 1..k.len() {
            let a = map
                .directions
                .iter()
                .map(|d| d[i].clone() - d[j].clone())
                .collect();
            factors.push((a, (2 * k[i] * k[j]) as u32));
        }
    }
    Ok(LinearFormProduct {
        nvars: map.source_dim(),
        factors,
    })
}

/// Pullback of the stratum density built factor by factor, which is much
/// cheaper than expanding the density first. Works for any affine map.
pub fn pullback_density<S: Scalar>(deg: &DegeneracyType, map: &AffineChartMap<S>) -> Result<SparsePolynomial<S>> {
    let k = deg.multiplicities();
    if map.target_dim() != k.len() {
        return Err(Error::DimensionMismatch {
            expected: k.len(),
            got: map.target_dim(),
        });
    }
    let comps: Vec<SparsePolynomial<S>> = (0..k.len()).map(|j| map.component(j)).collect();
    let mut acc = SparsePolynomial::constant(map.source_dim(), S::one());
    for i in 0..k.len() {
        for j in i + 1..k.len() {
            let diff = comps[i].sub(&comps[j]);
            for _ in 0..2 * k[i] * k[j] {
                acc = acc.mul(&diff);
            }
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{Rational, Surd};
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }

    fn poly(nvars: usize, terms: &[(&[u32], i64)]) -> SparsePolynomial<Rational> {
        SparsePolynomial::from_terms(nvars, terms.iter().map(|(e, c)| (e.to_vec(), Rational::from_i64(*c)))).unwrap()
    }

    #[test]
    fn graded_lex_order() {
        let p = poly(2, &[(&[0, 2], 1), (&[1, 1], 2), (&[0, 0], 1), (&[2, 0], 1), (&[1, 0], 1)]);
        let order: Vec<Vec<u32>> = p.terms().map(|(e, _)| e.to_vec()).collect();
        assert_eq!(order, vec![vec![0, 0], vec![1, 0], vec![2, 0], vec![1, 1], vec![0, 2]]);
    }

    #[test]
    fn cancellation_drops_terms() {
        let x = SparsePolynomial::<Rational>::var(2, 0);
        assert!(x.sub(&x).is_empty());
        assert_eq!(x.sub(&x).degree(), None);
    }

    #[test]
    fn homogeneous_parts_split() {
        let p = poly(2, &[(&[0, 0], 1), (&[1, 1], 2), (&[2, 0], 1)]);
        let parts = p.homogeneous_parts();
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[0].0, 0);
        assert_eq!(parts[0].1, poly(2, &[(&[0, 0], 1)]));
        assert_eq!(parts[1].0, 2);
        assert_eq!(parts[1].1, poly(2, &[(&[1, 1], 2), (&[2, 0], 1)]));
        let h = poly(2, &[(&[3, 1], 1)]);
        assert_eq!(h.homogeneous_parts().len(), 1);
    }

    #[test]
    fn bombieri_multipliers() {
        assert_eq!(poly(2, &[(&[2, 2], 1)]).bombieri(), poly(2, &[(&[2, 2], 4)]));
        assert_eq!(poly(2, &[(&[3, 1], 1)]).bombieri(), poly(2, &[(&[3, 1], 6)]));
        assert_eq!(poly(2, &[(&[0, 0], 7)]).bombieri(), poly(2, &[(&[0, 0], 7)]));
    }

    #[test]
    fn identity_pullback_is_noop() {
        let p = poly(3, &[(&[1, 2, 0], 3), (&[0, 0, 4], -2), (&[0, 0, 0], 5)]);
        assert_eq!(pullback(&p, &AffineChartMap::identity(3)).unwrap(), p);
    }

    #[test]
    fn pullback_dimension_checked() {
        let p = poly(2, &[(&[1, 1], 1)]);
        assert!(matches!(
            pullback(&p, &AffineChartMap::<Rational>::identity(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn qubit_segment_pullback() {
        let h = Surd::parse("1/6*sqrt(3)").unwrap(); // 1/(2√3)
        let half = Surd::ratio(1, 2);
        let map = AffineChartMap::new(
            vec![half.clone(), half.clone()],
            vec![vec![h.clone(), -h.clone()]],
        )
        .unwrap();
        let density = SparsePolynomial::<Surd>::from_terms(
            2,
            [(vec![2, 0], Surd::from_i64(1)), (vec![1, 1], Surd::from_i64(-2)), (vec![0, 2], Surd::from_i64(1))],
        )
        .unwrap();
        let pulled = pullback(&density, &map).unwrap();
        assert_eq!(pulled.len(), 1);
        assert_eq!(pulled.coefficient(&[2]), Some(&Surd::ratio(1, 3)));
    }

    #[test]
    fn linear_form_product_expands() {
        let lf = LinearFormProduct {
            nvars: 2,
            factors: vec![(vec![r(1, 1), r(0, 1)], 2), (vec![r(0, 1), r(1, 1)], 2)],
        };
        assert_eq!(lf.degree(), 4);
        assert_eq!(lf.expand(), poly(2, &[(&[2, 2], 1)]));
        assert_eq!(lf.eval(&[r(2, 1), r(3, 1)]), r(36, 1));
        assert_eq!(lf.forms().len(), 4);
    }

    #[test]
    fn non_homogeneous_base_rejected() {
        let deg = DegeneracyType::new(vec![1, 1]).unwrap();
        let map = AffineChartMap::new(vec![r(1, 1), r(0, 1)], vec![vec![r(1, 1), r(0, 1)]]).unwrap();
        assert!(matches!(as_linear_form_product(&deg, &map), Err(Error::NonHomogeneous(_))));
        assert!(pullback_density(&deg, &map).is_ok());
    }

    fn small_poly(nvars: usize) -> impl Strategy<Value = SparsePolynomial<Rational>> {
        prop::collection::vec((prop::collection::vec(0u32..4, nvars), -5i64..6), 0..6).prop_map(move |ts| {
            SparsePolynomial::from_terms(nvars, ts.into_iter().map(|(e, c)| (e, Rational::from_i64(c)))).unwrap()
        })
    }

    fn small_map(src: usize, dst: usize, offset: bool) -> impl Strategy<Value = AffineChartMap<Rational>> {
        (
            prop::collection::vec(-4i64..5, dst),
            prop::collection::vec(prop::collection::vec(-4i64..5, dst), src),
        )
            .prop_map(move |(b, d)| {
                let base = b.iter().map(|&v| if offset { r(v, 3) } else { r(0, 1) }).collect();
                let dirs = d.iter().map(|row| row.iter().map(|&v| r(v, 2)).collect()).collect();
                AffineChartMap::new(base, dirs).unwrap()
            })
    }

    proptest! {
        #[test]
        fn bombieri_is_linear(p in small_poly(3), q in small_poly(3), k in -3i64..4) {
            let k = Rational::from_i64(k);
            let lhs = p.scale(&k).add(&q).bombieri();
            let rhs = p.bombieri().scale(&k).add(&q.bombieri());
            prop_assert_eq!(lhs, rhs);
            for (e, c) in p.bombieri().terms() {
                let orig = p.coefficient(e).unwrap().clone();
                let w = c.clone() / orig;
                prop_assert!(w >= Rational::from_i64(1));
                prop_assert!(w.is_integer());
            }
        }

        #[test]
        fn pullback_is_a_ring_map(p in small_poly(2), q in small_poly(2), map in small_map(3, 2, true)) {
            let lhs = pullback(&p.mul(&q), &map).unwrap();
            let rhs = pullback(&p, &map).unwrap().mul(&pullback(&q, &map).unwrap());
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn pullback_matches_pointwise(p in small_poly(3), map in small_map(2, 3, true), u in prop::collection::vec(-5i64..6, 2)) {
            let u: Vec<Rational> = u.iter().map(|&v| r(v, 7)).collect();
            let pulled = pullback(&p, &map).unwrap();
            prop_assert_eq!(pulled.eval(&u), p.eval(&map.apply(&u)));
        }

        #[test]
        fn linear_pullback_preserves_homogeneity(p in small_poly(3), map in small_map(3, 3, false)) {
            for (j, part) in p.homogeneous_parts() {
                let pulled = pullback(&part, &map).unwrap();
                prop_assert!(pulled.is_homogeneous());
                if let Some(d) = pulled.degree() {
                    prop_assert_eq!(d, j);
                }
            }
        }

        #[test]
        fn homogeneous_parts_reassemble(p in small_poly(3)) {
            let parts = p.homogeneous_parts();
            let sum = parts.iter().fold(SparsePolynomial::zero(3), |acc, (_, q)| acc.add(q));
            prop_assert_eq!(sum, p);
            for w in parts.windows(2) {
                prop_assert!(w[0].0 < w[1].0);
            }
        }
    }
}
