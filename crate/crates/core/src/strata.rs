//! Kernel spectra, degeneracy types and the Hilbert-Schmidt densities on each
//! stratum.

use std::fmt;

use serde::ser::{SerializeSeq, SerializeStruct, Serializer};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::polyalg::{pullback, AffineChartMap, SparsePolynomial};
use crate::scalar::{RealScalar, Scalar};

/// Relative tolerance under which two eigenvalues count as equal.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// Ordered spectrum of the kernel, `Σπ = 1`, `Σπ² = N`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelSpectrum<S> {
    pi: Vec<S>,
}

/// Residuals `(Σπ − 1, Σπ² − N)` as floats.
pub fn spectrum_residuals<S: Scalar>(pi: &[S]) -> (f64, f64) {
    let n = pi.len() as i64;
    let sum = pi.iter().cloned().fold(S::zero(), |a, b| a + b);
    let sq = pi.iter().fold(S::zero(), |a, b| a + b.clone() * b.clone());
    ((sum - S::one()).to_f64(), (sq - S::from_i64(n)).to_f64())
}

fn exact_residuals_vanish<S: Scalar>(pi: &[S]) -> bool {
    let n = pi.len() as i64;
    let sum = pi.iter().cloned().fold(S::zero(), |a, b| a + b);
    let sq = pi.iter().fold(S::zero(), |a, b| a + b.clone() * b.clone());
    sum == S::one() && sq == S::from_i64(n)
}

impl<S: Scalar> KernelSpectrum<S> {
    /// Validates at the library tolerance `1e-12·max(1, N)`; exact types
    /// must satisfy the constraints exactly.
    pub fn new(pi: Vec<S>) -> Result<Self> {
        let tol = 1e-12 * (pi.len().max(1) as f64);
        Self::with_tolerance(pi, tol)
    }

    pub fn with_tolerance(pi: Vec<S>, tol: f64) -> Result<Self> {
        let n = pi.len();
        if n < 2 {
            return Err(Error::Domain(format!("dimension must be at least 2, got {n}")));
        }
        let (tr, sq) = spectrum_residuals(&pi);
        let ok = if S::EXACT {
            exact_residuals_vanish(&pi)
        } else {
            tr.abs() <= tol && sq.abs() <= tol
        };
        if !ok {
            return Err(Error::InvalidSpectrum {
                message: format!("constraints sum = 1 and sum of squares = {n} violated"),
                trace_residual: tr,
                square_residual: sq,
            });
        }
        check_sorted(&pi, "pi")?;
        Ok(Self { pi })
    }

    /// Accepts residuals up to `tol` and projects a float spectrum back onto
    /// the constraint sphere.
    pub fn projected(pi: Vec<S>, tol: f64) -> Result<Self> {
        if S::EXACT {
            return Self::new(pi);
        }
        let n = pi.len();
        if n < 2 {
            return Err(Error::Domain(format!("dimension must be at least 2, got {n}")));
        }
        let (tr, sq) = spectrum_residuals(&pi);
        if tr.abs() > tol || sq.abs() > tol {
            return Err(Error::InvalidSpectrum {
                message: format!("constraint residual exceeds {tol:e}"),
                trace_residual: tr,
                square_residual: sq,
            });
        }
        let nn = S::from_i64(n as i64);
        let centre = S::one() / nn.clone();
        let mean = pi.iter().cloned().fold(S::zero(), |a, b| a + b) / nn.clone();
        let dev: Vec<S> = pi.iter().map(|p| p.clone() - mean.clone()).collect();
        let norm2 = dev.iter().fold(S::zero(), |a, d| a + d.clone() * d.clone());
        let target2 = nn.clone() - S::one() / nn;
        // one Newton step on the scale factor is ample for residuals ≤ 1e-9
        let ratio = target2 / norm2;
        let scale = (S::one() + ratio) / S::from_i64(2);
        let out = dev.into_iter().map(|d| centre.clone() + d * scale.clone()).collect();
        Self::new(out)
    }

    /// Exact spectrum of the two-level kernel, `((1+√3)/2, (1−√3)/2)`.
    pub fn qubit() -> Result<Self> {
        Self::new(vec![
            S::parse_str("1/2+1/2*sqrt(3)")?,
            S::parse_str("1/2-1/2*sqrt(3)")?,
        ])
    }

    pub fn n(&self) -> usize {
        self.pi.len()
    }

    pub fn pi(&self) -> &[S] {
        &self.pi
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.pi.iter().map(Scalar::to_f64).collect()
    }

    pub fn convert<T: Scalar>(&self, f: impl Fn(&S) -> T) -> KernelSpectrum<T> {
        KernelSpectrum {
            pi: self.pi.iter().map(f).collect(),
        }
    }

    /// Block structure of equal eigenvalues.
    pub fn degeneracy(&self) -> DegeneracyType {
        degeneracy_pattern(&self.pi)
    }
}

impl<S: Scalar> Serialize for KernelSpectrum<S> {
    fn serialize<Z: Serializer>(&self, serializer: Z) -> std::result::Result<Z::Ok, Z::Error> {
        let mut seq = serializer.serialize_seq(Some(self.pi.len()))?;
        for p in &self.pi {
            seq.serialize_element(&p.to_json_string())?;
        }
        seq.end()
    }
}

fn check_sorted<S: Scalar>(v: &[S], name: &str) -> Result<()> {
    for i in 1..v.len() {
        let gap = v[i - 1].clone() - v[i].clone();
        let bad = if S::EXACT {
            gap < S::zero()
        } else {
            gap.to_f64() < -1e-12
        };
        if bad {
            return Err(Error::Domain(format!(
                "ordering {name}_{} >= {name}_{} violated",
                i,
                i + 1
            )));
        }
    }
    Ok(())
}

/// Eigenvalues of a density matrix in non-increasing order.
#[derive(Clone, Debug, PartialEq)]
pub struct StateSpectrum<S> {
    r: Vec<S>,
}

impl<S: Scalar> StateSpectrum<S> {
    pub fn new(r: Vec<S>) -> Result<Self> {
        check_sorted(&r, "r")?;
        let tol = 1e-12;
        if let Some(last) = r.last() {
            if last.sign_tol(tol) == std::cmp::Ordering::Less {
                return Err(Error::Domain("negative eigenvalue".into()));
            }
        }
        let sum = r.iter().cloned().fold(S::zero(), |a, b| a + b);
        if !sum.approx_eq(&S::one(), tol) {
            return Err(Error::Domain("eigenvalues must sum to 1".into()));
        }
        Ok(Self { r })
    }

    pub fn r(&self) -> &[S] {
        &self.r
    }
}

/// Groups consecutive equal entries of a sorted vector.
pub fn degeneracy_pattern<S: Scalar>(v: &[S]) -> DegeneracyType {
    let mut blocks: Vec<usize> = Vec::new();
    for i in 0..v.len() {
        let same = i > 0 && {
            let a = &v[i - 1];
            let b = &v[i];
            if S::EXACT {
                a == b
            } else {
                let (x, y) = (a.to_f64(), b.to_f64());
                (x - y).abs() <= DEGENERACY_TOL * x.abs().max(1.0)
            }
        };
        if same {
            *blocks.last_mut().unwrap() += 1;
        } else {
            blocks.push(1);
        }
    }
    DegeneracyType { k: blocks }
}

/// Multiplicities `(k₁,…,k_s)` of a degeneracy pattern. As a stratum label
/// the order is irrelevant; as a face of the ordered simplex it is not, so
/// the type also represents compositions.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DegeneracyType {
    k: Vec<usize>,
}

impl DegeneracyType {
    pub fn new(k: Vec<usize>) -> Result<Self> {
        if k.is_empty() || k.contains(&0) {
            return Err(Error::Domain(format!("invalid multiplicities {k:?}")));
        }
        Ok(Self { k })
    }

    pub fn regular(n: usize) -> Self {
        Self { k: vec![1; n] }
    }

    pub fn full(n: usize) -> Self {
        Self { k: vec![n] }
    }

    /// Parses `"2,1,1"` (also accepts `+` as separator).
    pub fn parse(s: &str) -> Result<Self> {
        let k = s
            .split([',', '+'])
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad multiplicity list {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(k)
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.k
    }

    pub fn n(&self) -> usize {
        self.k.iter().sum()
    }

    pub fn blocks(&self) -> usize {
        self.k.len()
    }

    pub fn is_regular(&self) -> bool {
        self.k.iter().all(|&k| k == 1)
    }

    pub fn is_full(&self) -> bool {
        self.k.len() == 1
    }

    /// Sorted non-increasing copy.
    pub fn partition(&self) -> DegeneracyType {
        let mut k = self.k.clone();
        k.sort_unstable_by(|a, b| b.cmp(a));
        DegeneracyType { k }
    }

    /// Polynomial degree `2Σ_{i<j} kᵢkⱼ` of the stratum density.
    pub fn density_degree(&self) -> usize {
        let mut q = 0;
        for i in 0..self.k.len() {
            for j in i + 1..self.k.len() {
                q += 2 * self.k[i] * self.k[j];
            }
        }
        q
    }

    /// Name of the isotropy class, e.g. `S(U(2)×U(1)^2)`.
    pub fn label(&self) -> String {
        let n = self.n();
        let p = self.partition();
        if p.is_regular() {
            return format!("T^{n}");
        }
        if p.is_full() {
            return format!("SU({n})");
        }
        let ones = p.k.iter().filter(|&&k| k == 1).count();
        let mut parts: Vec<String> = p.k.iter().filter(|&&k| k > 1).map(|k| format!("U({k})")).collect();
        match ones {
            0 => {}
            1 => parts.push("U(1)".into()),
            m => parts.push(format!("U(1)^{m}")),
        }
        format!("S({})", parts.join("×"))
    }

    /// `2+1+1` style rendering used in tabular output.
    pub fn plus_string(&self) -> String {
        self.k.iter().map(ToString::to_string).collect::<Vec<_>>().join("+")
    }

    /// Strict refinement: every block of `self` fits into a block of
    /// `other` and the two differ.
    pub fn refines(&self, other: &DegeneracyType) -> bool {
        if self.n() != other.n() {
            return false;
        }
        let a = self.partition();
        let b = other.partition();
        if a == b || a.k.len() <= b.k.len() {
            return false;
        }
        let mut bins = b.k.clone();
        pack(&a.k, &mut bins)
    }
}

fn pack(items: &[usize], bins: &mut [usize]) -> bool {
    let Some((&first, rest)) = items.split_first() else {
        return bins.iter().all(|&b| b == 0);
    };
    for i in 0..bins.len() {
        if bins[i] >= first && !bins[..i].contains(&bins[i]) {
            bins[i] -= first;
            if pack(rest, bins) {
                return true;
            }
            bins[i] += first;
        }
    }
    false
}

impl fmt::Display for DegeneracyType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let inner: Vec<String> = self.k.iter().map(ToString::to_string).collect();
        write!(f, "({})", inner.join(","))
    }
}

impl Serialize for DegeneracyType {
    fn serialize<Z: Serializer>(&self, serializer: Z) -> std::result::Result<Z::Ok, Z::Error> {
        let mut st = serializer.serialize_struct("DegeneracyType", 2)?;
        st.serialize_field("multiplicities", &self.k)?;
        st.serialize_field("label", &self.label())?;
        st.end()
    }
}

/// All strata of dimension `n` with the refinement order.
#[derive(Clone, Debug)]
pub struct StrataPoset {
    pub strata: Vec<DegeneracyType>,
    /// Cover relations `(lower, upper)` as index pairs.
    pub covers: Vec<(usize, usize)>,
}

impl StrataPoset {
    pub fn less(&self, i: usize, j: usize) -> bool {
        self.strata[i].refines(&self.strata[j])
    }

    pub fn minimum(&self) -> usize {
        0
    }

    pub fn maximum(&self) -> usize {
        self.strata.len() - 1
    }

    /// Every chain from the torus to the full group along cover relations.
    pub fn maximal_chains(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut path = vec![self.minimum()];
        self.extend_chains(&mut path, &mut out);
        out
    }

    fn extend_chains(&self, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let last = *path.last().unwrap();
        if last == self.maximum() {
            out.push(path.clone());
            return;
        }
        for &(lo, hi) in &self.covers {
            if lo == last {
                path.push(hi);
                self.extend_chains(path, out);
                path.pop();
            }
        }
    }
}

/// Integer partitions of `n`, more blocks first, then lexicographically
/// ascending, together with the cover relations of the refinement order.
pub fn enumerate_strata(n: usize) -> Result<StrataPoset> {
    if n < 2 {
        return Err(Error::Domain(format!("dimension must be at least 2, got {n}")));
    }
    let mut parts = Vec::new();
    partitions(n, n, &mut Vec::new(), &mut parts);
    parts.sort_by(|a: &Vec<usize>, b: &Vec<usize>| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    let strata: Vec<DegeneracyType> = parts.into_iter().map(|k| DegeneracyType { k }).collect();
    let m = strata.len();
    let mut covers = Vec::new();
    for i in 0..m {
        for j in 0..m {
            if strata[i].refines(&strata[j])
                && !(0..m).any(|l| strata[i].refines(&strata[l]) && strata[l].refines(&strata[j]))
            {
                covers.push((i, j));
            }
        }
    }
    Ok(StrataPoset { strata, covers })
}

fn partitions(n: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if n == 0 {
        out.push(cur.clone());
        return;
    }
    for p in (1..=max.min(n)).rev() {
        cur.push(p);
        partitions(n - p, p, cur, out);
        cur.pop();
    }
}

/// Distinct orderings of the multiplicity vector, starting from the
/// non-increasing one.
pub fn degeneracy_orbit(deg: &DegeneracyType) -> Vec<DegeneracyType> {
    let mut k = deg.k.clone();
    k.sort_unstable();
    let mut out = vec![k.clone()];
    while next_permutation(&mut k) {
        out.push(k.clone());
    }
    out.reverse();
    out.into_iter().map(|k| DegeneracyType { k }).collect()
}

fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// `Π_{i<j}(rᵢ − rⱼ)^{2kᵢkⱼ}` on the block values, with the constraint
/// `Σ kᵢrᵢ = 1`.
#[derive(Clone, Debug)]
pub struct StratumDensity<S> {
    pub degeneracy: DegeneracyType,
    pub polynomial: SparsePolynomial<S>,
    pub weight_constraint: Vec<usize>,
}

pub fn stratum_density<S: Scalar>(deg: &DegeneracyType) -> StratumDensity<S> {
    let s = deg.blocks();
    let k = deg.multiplicities();
    let mut poly = SparsePolynomial::constant(s, S::one());
    for i in 0..s {
        for j in i + 1..s {
            let diff = SparsePolynomial::var(s, i).sub(&SparsePolynomial::var(s, j));
            for _ in 0..2 * k[i] * k[j] {
                poly = poly.mul(&diff);
            }
        }
    }
    StratumDensity {
        degeneracy: deg.clone(),
        polynomial: poly,
        weight_constraint: k.to_vec(),
    }
}

impl<S: Scalar> StratumDensity<S> {
    /// Density with the last block value eliminated through the constraint.
    pub fn eliminated(&self) -> Result<SparsePolynomial<S>> {
        let k = &self.weight_constraint;
        let s = k.len();
        let ks = S::from_i64(k[s - 1] as i64);
        let mut base = vec![S::zero(); s];
        base[s - 1] = S::one() / ks.clone();
        let dirs = (0..s - 1)
            .map(|i| {
                let mut d = vec![S::zero(); s];
                d[i] = S::one();
                d[s - 1] = -S::from_i64(k[i] as i64) / ks.clone();
                d
            })
            .collect();
        pullback(&self.polynomial, &AffineChartMap::new(base, dirs)?)
    }
}

/// Orthonormal basis of the trace-zero hyperplane obtained by Gram-Schmidt
/// on the fundamental weight directions `(N−k,…,N−k,−k,…,−k)`.
pub fn chamber_basis<S: RealScalar>(n: usize) -> Vec<Vec<S>> {
    let mut basis: Vec<Vec<S>> = Vec::new();
    for k in 1..n {
        let mut w: Vec<S> = (0..n)
            .map(|i| S::from_i64(if i < k { (n - k) as i64 } else { -(k as i64) }))
            .collect();
        for b in &basis {
            let dot = dot(&w, b);
            for (wi, bi) in w.iter_mut().zip(b) {
                *wi = wi.clone() - dot.clone() * bi.clone();
            }
        }
        let norm = dot(&w, &w).sqrt();
        basis.push(w.into_iter().map(|x| x / norm.clone()).collect());
    }
    basis
}

fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).fold(S::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

/// Unit direction in the trace-zero hyperplane for hyperspherical angles
/// relative to [`chamber_basis`].
fn hyperspherical<S: RealScalar>(basis: &[Vec<S>], angles: &[S]) -> Vec<S> {
    let m = basis.len();
    let mut coords = Vec::with_capacity(m);
    let mut prod = S::one();
    for a in angles {
        coords.push(prod.clone() * a.cos());
        prod = prod * a.sin();
    }
    coords.push(prod);
    let n = basis[0].len();
    (0..n)
        .map(|i| coords.iter().zip(basis).fold(S::zero(), |acc, (c, b)| acc + c.clone() * b[i].clone()))
        .collect()
}

/// Spectrum for moduli angles.
///
/// * `n = 2`: no angles, the unique spectrum.
/// * `n = 3`: one angle `ζ ∈ [0, π/3]`; `ζ = 0` gives `(1,1,−1)` and
///   `ζ = π/3` gives `(5/3,−1/3,−1/3)`.
/// * `n ≥ 4`: hyperspherical angles on the constraint sphere in the basis of
///   [`chamber_basis`]. For `n = 4` the chamber is `ψ₂ ∈ [0, π/3]`,
///   `ψ₁ ∈ [0, psi1_max(ψ₂)]`.
pub fn spectrum_from_moduli<S: RealScalar>(n: usize, angles: &[f64]) -> Result<KernelSpectrum<S>> {
    if n < 2 {
        return Err(Error::Domain(format!("dimension must be at least 2, got {n}")));
    }
    if angles.len() != n - 2 {
        return Err(Error::DimensionMismatch {
            expected: n - 2,
            got: angles.len(),
        });
    }
    if angles.iter().any(|a| !a.is_finite()) {
        return Err(Error::Domain("moduli angles must be finite".into()));
    }
    let pi: Vec<S> = match n {
        2 => return KernelSpectrum::qubit(),
        3 => {
            let zeta = angles[0];
            if zeta == 0.0 {
                vec![S::one(), S::one(), -S::one()]
            } else if (zeta - std::f64::consts::FRAC_PI_3).abs() <= 1e-15 {
                vec![S::ratio(5, 3), S::ratio(-1, 3), S::ratio(-1, 3)]
            } else {
                let z = S::from_f64(zeta);
                let (s, c) = (z.sin(), z.cos());
                let third = S::ratio(1, 3);
                let a = S::from_i64(2) / S::from_i64(3).sqrt() * s;
                let b = S::ratio(2, 3) * c.clone();
                vec![
                    third.clone() + a.clone() + b.clone(),
                    third.clone() - a + b,
                    third - S::ratio(4, 3) * c,
                ]
            }
        }
        _ => {
            let basis = chamber_basis::<S>(n);
            let ang: Vec<S> = angles.iter().map(|&a| S::from_f64(a)).collect();
            let e = hyperspherical(&basis, &ang);
            let nn = S::from_i64(n as i64);
            let radius = (nn.clone() - S::one() / nn.clone()).sqrt();
            let centre = S::one() / nn;
            e.into_iter().map(|x| centre.clone() + radius.clone() * x).collect()
        }
    };
    let pi = snap_order(pi)?;
    KernelSpectrum::new(pi)
}

/// Merges neighbours that are out of order by at most `1e-12`; larger
/// violations are reported.
fn snap_order<S: Scalar>(mut pi: Vec<S>) -> Result<Vec<S>> {
    for i in 1..pi.len() {
        let gap = (pi[i - 1].clone() - pi[i].clone()).to_f64();
        if gap < -1e-12 {
            return Err(Error::Domain(format!(
                "angles leave the ordering chamber: pi_{} >= pi_{} violated by {:e}",
                i,
                i + 1,
                -gap
            )));
        }
        if gap < 0.0 {
            let mid = (pi[i - 1].clone() + pi[i].clone()) / S::from_i64(2);
            pi[i - 1] = mid.clone();
            pi[i] = mid;
        }
    }
    Ok(pi)
}

/// Upper end of `ψ₁` for the four-level chart at azimuth `ψ₂`.
pub fn psi1_max(psi2: f64) -> f64 {
    let b = chamber_basis::<f64>(4);
    let u: Vec<f64> = (0..4).map(|i| psi2.cos() * b[1][i] + psi2.sin() * b[2][i]).collect();
    let nb = b[0][0] - b[0][1];
    let nu = u[0] - u[1];
    nb.atan2(-nu)
}

/// Grid of moduli angles with `g` points per angle, in row-major order.
/// For `n ≥ 5` the hyperspherical box is sampled and points outside the
/// chamber are dropped.
pub fn moduli_grid(n: usize, g: usize) -> Result<Vec<Vec<f64>>> {
    if g < 2 {
        return Err(Error::Domain("grid needs at least 2 points per angle".into()));
    }
    let lin = |i: usize, hi: f64| hi * i as f64 / (g - 1) as f64;
    Ok(match n {
        0 | 1 => return Err(Error::Domain(format!("dimension must be at least 2, got {n}"))),
        2 => vec![vec![]],
        3 => (0..g).map(|i| vec![lin(i, std::f64::consts::FRAC_PI_3)]).collect(),
        4 => {
            let mut out = Vec::with_capacity(g * g);
            for i in 0..g {
                for j in 0..g {
                    let psi2 = lin(j, std::f64::consts::FRAC_PI_3);
                    out.push(vec![lin(i, psi1_max(psi2)), psi2]);
                }
            }
            out
        }
        _ => {
            let m = n - 2;
            let total = g.pow(m as u32);
            let mut out = Vec::new();
            for idx in 0..total {
                let mut rem = idx;
                let mut ang = vec![0.0; m];
                for a in ang.iter_mut().rev() {
                    *a = lin(rem % g, std::f64::consts::PI);
                    rem /= g;
                }
                if let Some(last) = ang.last_mut() {
                    *last *= 2.0;
                }
                if spectrum_from_moduli::<f64>(n, &ang).is_ok() {
                    out.push(ang);
                }
            }
            out
        }
    })
}
