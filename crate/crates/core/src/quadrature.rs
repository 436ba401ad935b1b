//! Integration of polynomials over simplices.
//!
//! * [`integrate_la`]: polarization of a product of linear forms evaluated
//!   through permanents.
//! * [`integrate_lasserre`]: Bombieri transform evaluated at one point per
//!   homogeneous degree.
//! * [`integrate_dirichlet`]: monomial-by-monomial closed form, the oracle.
//! * [`integrate_mc`]: uniform sampling.

use std::fmt;
use std::str::FromStr;

use num::BigInt;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometry::{chart_volume, Simplex};
use crate::polyalg::{LinearFormProduct, SparsePolynomial};
use crate::scalar::{binomial, factorial, Scalar};

/// Largest permanent order accepted.
pub const PERMANENT_CAPACITY: usize = 24;
/// Degrees up to this use the permanent engine by default.
pub const LA_DEFAULT_MAX_DEGREE: usize = 14;
/// Smallest accepted Monte-Carlo sample count.
pub const MC_MIN_SAMPLES: usize = 1000;

const CHUNK: usize = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    La,
    Lasserre,
    MonteCarlo,
    Dirichlet,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::La => "la",
            Method::Lasserre => "lasserre",
            Method::MonteCarlo => "mc",
            Method::Dirichlet => "dirichlet",
        }
    }

    /// Exact engine chosen for a density of degree `q`.
    pub fn default_for_degree(q: usize) -> Method {
        if q <= LA_DEFAULT_MAX_DEGREE {
            Method::La
        } else {
            Method::Lasserre
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "la" => Ok(Method::La),
            "lasserre" => Ok(Method::Lasserre),
            "mc" => Ok(Method::MonteCarlo),
            "dirichlet" => Ok(Method::Dirichlet),
            _ => Err(Error::Parse(format!("unknown method {s:?}"))),
        }
    }
}

impl Serialize for Method {
    fn serialize<Z: Serializer>(&self, serializer: Z) -> std::result::Result<Z::Ok, Z::Error> {
        serializer.serialize_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureResult<S> {
    pub value: S,
    pub method: Method,
    /// Standard error, Monte-Carlo only.
    pub stderr: Option<f64>,
}

impl<S> QuadratureResult<S> {
    fn exact(value: S, method: Method) -> Self {
        Self {
            value,
            method,
            stderr: None,
        }
    }
}

/// All `a ∈ Nⁿ` with `Σaᵢ = q`, lexicographically decreasing.
pub fn compositions(q: usize, n: usize) -> Vec<Vec<usize>> {
    fn go(rem: usize, slots: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if slots == 1 {
            cur.push(rem);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for a in (0..=rem).rev() {
            cur.push(a);
            go(rem - a, slots - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        if q == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    go(q, n, &mut Vec::new(), &mut out);
    out
}

fn check_square<S>(m: &[Vec<S>]) -> Result<usize> {
    let q = m.len();
    for row in m {
        if row.len() != q {
            return Err(Error::DimensionMismatch { expected: q, got: row.len() });
        }
    }
    Ok(q)
}

/// Ryser's formula with Gray-code column updates, `O(2^q·q)`.
pub fn permanent<S: Scalar>(m: &[Vec<S>]) -> Result<S> {
    let q = check_square(m)?;
    if q > PERMANENT_CAPACITY {
        return Err(Error::Capacity(format!(
            "permanent of order {q} exceeds {PERMANENT_CAPACITY}; use the lasserre method"
        )));
    }
    if q == 0 {
        return Ok(S::one());
    }
    let mut sums = vec![S::zero(); q];
    let mut total = S::zero();
    let mut gray: u64 = 0;
    for k in 1u64..(1u64 << q) {
        let j = k.trailing_zeros() as usize;
        gray ^= 1 << j;
        let adding = gray & (1 << j) != 0;
        for (s, row) in sums.iter_mut().zip(m) {
            *s = if adding {
                s.clone() + row[j].clone()
            } else {
                s.clone() - row[j].clone()
            };
        }
        let prod = sums.iter().cloned().fold(S::one(), |a, b| a * b);
        if (q - gray.count_ones() as usize).is_multiple_of(2) {
            total = total + prod;
        } else {
            total = total - prod;
        }
    }
    Ok(total)
}

/// Sum over all permutations, `O(q!·q)`. Reference only.
pub fn permanent_naive<S: Scalar>(m: &[Vec<S>]) -> Result<S> {
    let q = check_square(m)?;
    fn go<S: Scalar>(m: &[Vec<S>], row: usize, used: &mut [bool], acc: S) -> S {
        if row == m.len() {
            return acc;
        }
        let mut total = S::zero();
        for c in 0..m.len() {
            if !used[c] && !m[row][c].is_zero() {
                used[c] = true;
                total = total + go(m, row + 1, used, acc.clone() * m[row][c].clone());
                used[c] = false;
            }
        }
        total
    }
    Ok(go(m, 0, &mut vec![false; q], S::one()))
}

/// Permanent of the matrix whose rows repeat row `r` of `a` `row_mult[r]`
/// times and whose columns repeat column `t` `col_mult[t]` times. Ryser's
/// formula collapses to a sum over `b ≤ col_mult`.
pub fn permanent_grouped<S: Scalar>(a: &[Vec<S>], row_mult: &[usize], col_mult: &[usize]) -> Result<S> {
    let q: usize = row_mult.iter().sum();
    if q != col_mult.iter().sum::<usize>() {
        return Err(Error::DimensionMismatch {
            expected: q,
            got: col_mult.iter().sum(),
        });
    }
    let cols = col_mult.len();
    let binoms: Vec<Vec<S>> = col_mult
        .iter()
        .map(|&c| (0..=c).map(|b| S::from_bigint(&binomial(c, b))).collect())
        .collect();
    let mut b = vec![0usize; cols];
    let mut total = S::zero();
    loop {
        let size: usize = b.iter().sum();
        let mut term = S::one();
        for t in 0..cols {
            term = term * binoms[t][b[t]].clone();
        }
        if !term.is_zero() {
            for (row, &m) in a.iter().zip(row_mult) {
                let s = row
                    .iter()
                    .zip(&b)
                    .fold(S::zero(), |acc, (x, &bt)| if bt == 0 { acc } else { acc + x.clone() * S::from_i64(bt as i64) });
                term = term * s.powi(m as u32);
                if term.is_zero() {
                    break;
                }
            }
            if (q - size).is_multiple_of(2) {
                total = total + term;
            } else {
                total = total - term;
            }
        }
        // odometer over 0 ≤ b ≤ col_mult
        let mut t = 0;
        while t < cols && b[t] == col_mult[t] {
            b[t] = 0;
            t += 1;
        }
        if t == cols {
            break;
        }
        b[t] += 1;
    }
    Ok(total)
}

/// `∫_simplex Π(aₛ·x)` via the permanent formula, over the face chart of
/// `simplex`.
pub fn integrate_la<S: Scalar>(forms: &LinearFormProduct<S>, simplex: &Simplex<S>) -> Result<QuadratureResult<S>> {
    integrate_la_chart(forms, &simplex.chart_vertices())
}

/// As [`integrate_la`] for `m + 1` vertices given directly in `Rᵐ`.
pub fn integrate_la_chart<S: Scalar>(forms: &LinearFormProduct<S>, verts: &[Vec<S>]) -> Result<QuadratureResult<S>> {
    let m = verts.len().saturating_sub(1);
    if verts.iter().any(|v| v.len() != forms.nvars) || forms.nvars != m {
        return Err(Error::DimensionMismatch {
            expected: forms.nvars,
            got: m,
        });
    }
    let q = forms.degree() as usize;
    if q > PERMANENT_CAPACITY {
        return Err(Error::Capacity(format!(
            "degree {q} exceeds the permanent capacity {PERMANENT_CAPACITY}; use the lasserre method"
        )));
    }
    let vol = chart_volume(verts);
    if vol.is_zero() {
        return Ok(QuadratureResult::exact(S::zero(), Method::La));
    }
    // the polarization vanishes whenever an argument is the zero vector
    let live: Vec<&Vec<S>> = verts.iter().filter(|v| v.iter().any(|x| !x.is_zero())).collect();
    let a: Vec<Vec<S>> = forms
        .factors
        .iter()
        .map(|(f, _)| {
            live.iter()
                .map(|v| f.iter().zip(v.iter()).fold(S::zero(), |s, (x, y)| s + x.clone() * y.clone()))
                .collect()
        })
        .collect();
    let row_mult: Vec<usize> = forms.factors.iter().map(|(_, k)| *k as usize).collect();
    let comps = compositions(q, live.len());
    let perms: Vec<S> = comps
        .par_iter()
        .map(|c| permanent_grouped(&a, &row_mult, c))
        .collect::<Result<Vec<S>>>()?;
    let sum = perms.into_iter().fold(S::zero(), |x, y| x + y);
    let norm = S::from_bigint(&(binomial(m + q, q) * factorial(q)));
    Ok(QuadratureResult::exact(vol * sum / norm, Method::La))
}

/// Permanent-method integral of an arbitrary homogeneous polynomial, each
/// monomial being a product of coordinate forms.
pub fn integrate_la_polynomial<S: Scalar>(p: &SparsePolynomial<S>, verts: &[Vec<S>]) -> Result<QuadratureResult<S>> {
    if !p.is_homogeneous() {
        return Err(Error::NonHomogeneous(
            "the permanent method needs a homogeneous integrand in a chart centred at the origin".into(),
        ));
    }
    let n = p.nvars();
    let mut total = S::zero();
    for (e, c) in p.terms() {
        let factors = e
            .iter()
            .enumerate()
            .filter(|(_, &k)| k > 0)
            .map(|(i, &k)| {
                let mut f = vec![S::zero(); n];
                f[i] = S::one();
                (f, k)
            })
            .collect();
        let lf = LinearFormProduct { nvars: n, factors };
        total = total + c.clone() * integrate_la_chart(&lf, verts)?.value;
    }
    Ok(QuadratureResult::exact(total, Method::La))
}

/// `((n+1)(n+2)⋯(n+j))^{−1/j}`, the coordinate of the evaluation point for
/// degree `j`. The exact engine uses its `j`-th power directly.
pub fn lasserre_point(n: usize, j: usize) -> f64 {
    let prod: f64 = (1..=j).map(|i| (n + i) as f64).product();
    prod.powf(-1.0 / j as f64)
}

/// `vol(Kₙ)·(p̂₀ + Σⱼ p̂ⱼ(sⱼ))` over the canonical simplex
/// `Kₙ = {u ≥ 0, Σu ≤ 1}`, with `p̂` the Bombieri transform.
pub fn integrate_lasserre<S: Scalar>(p: &SparsePolynomial<S>, n: usize) -> Result<QuadratureResult<S>> {
    if p.nvars() != n {
        return Err(Error::DimensionMismatch { expected: n, got: p.nvars() });
    }
    let hat = p.bombieri();
    let mut total = S::zero();
    for (j, part) in hat.homogeneous_parts() {
        // p̂ⱼ(sⱼ) = sⱼʲ·Σ coefficients with sⱼʲ = 1/((n+1)⋯(n+j))
        let rising = (1..=j as usize).fold(BigInt::from(1), |acc, i| acc * BigInt::from(n + i));
        total = total + part.sum_of_coefficients() / S::from_bigint(&rising);
    }
    Ok(QuadratureResult::exact(total / S::from_bigint(&factorial(n)), Method::Lasserre))
}

/// `Σ c_α Πα!/(n+|α|)!`.
pub fn integrate_dirichlet<S: Scalar>(p: &SparsePolynomial<S>, n: usize) -> Result<QuadratureResult<S>> {
    if p.nvars() != n {
        return Err(Error::DimensionMismatch { expected: n, got: p.nvars() });
    }
    let mut total = S::zero();
    for (e, c) in p.terms() {
        let num = e.iter().fold(BigInt::from(1), |acc, &k| acc * factorial(k as usize));
        let deg: u32 = e.iter().sum();
        let den = factorial(n + deg as usize);
        total = total + c.clone() * S::from_bigint(&num) / S::from_bigint(&den);
    }
    Ok(QuadratureResult::exact(total, Method::Dirichlet))
}

/// Running sums of a pair of sampled quantities.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PairMoments {
    pub count: u64,
    pub sa: f64,
    pub sb: f64,
    pub saa: f64,
    pub sbb: f64,
    pub sab: f64,
}

impl PairMoments {
    fn push(&mut self, a: f64, b: f64) {
        self.count += 1;
        self.sa += a;
        self.sb += b;
        self.saa += a * a;
        self.sbb += b * b;
        self.sab += a * b;
    }

    fn merge(mut self, o: PairMoments) -> PairMoments {
        self.count += o.count;
        self.sa += o.sa;
        self.sb += o.sb;
        self.saa += o.saa;
        self.sbb += o.sbb;
        self.sab += o.sab;
        self
    }

    pub fn mean_a(&self) -> f64 {
        self.sa / self.count as f64
    }

    pub fn mean_b(&self) -> f64 {
        self.sb / self.count as f64
    }

    /// Sample variances and covariance `(var a, var b, cov ab)`.
    pub fn covariance(&self) -> (f64, f64, f64) {
        let n = self.count as f64;
        let (ma, mb) = (self.mean_a(), self.mean_b());
        let k = n / (n - 1.0);
        (
            k * (self.saa / n - ma * ma).max(0.0),
            k * (self.sbb / n - mb * mb).max(0.0),
            k * (self.sab / n - ma * mb),
        )
    }
}

/// Samples `f` at uniform points of the simplex `verts ⊂ Rᵐ`.
///
/// Samples are drawn in chunks; chunk `c` uses its own ChaCha stream so the
/// result does not depend on the number of threads. `stream_base` separates
/// independent calls sharing a seed.
pub fn sample_simplex<F>(verts: &[Vec<f64>], samples: usize, seed: u64, stream_base: u64, f: F) -> PairMoments
where
    F: Fn(&[f64]) -> (f64, f64) + Sync,
{
    let m = verts.len() - 1;
    let dim = verts[0].len();
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<PairMoments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream_base.wrapping_mul(1 << 32).wrapping_add(c as u64));
            let count = CHUNK.min(samples - c * CHUNK);
            let mut acc = PairMoments::default();
            let mut u = vec![0.0f64; m];
            let mut x = vec![0.0f64; dim];
            for _ in 0..count {
                for ui in u.iter_mut() {
                    *ui = rng.random::<f64>();
                }
                u.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
                x.iter_mut().for_each(|xi| *xi = 0.0);
                let mut prev = 0.0;
                for t in 0..=m {
                    let next = if t < m { u[t] } else { 1.0 };
                    let w = next - prev;
                    prev = next;
                    for (xi, vi) in x.iter_mut().zip(&verts[t]) {
                        *xi += w * vi;
                    }
                }
                let (a, b) = f(&x);
                acc.push(a, b);
            }
            acc
        })
        .collect();
    parts.into_iter().fold(PairMoments::default(), PairMoments::merge)
}

/// Monte-Carlo integral of `p` over the simplex with chart vertices `verts`.
pub fn integrate_mc<S: Scalar>(
    p: &SparsePolynomial<S>,
    verts: &[Vec<S>],
    samples: usize,
    seed: u64,
) -> Result<QuadratureResult<S>> {
    if samples < MC_MIN_SAMPLES {
        return Err(Error::Domain(format!("at least {MC_MIN_SAMPLES} samples are required")));
    }
    let m = verts.len().saturating_sub(1);
    if verts.iter().any(|v| v.len() != p.nvars()) || m != p.nvars() {
        return Err(Error::DimensionMismatch { expected: p.nvars(), got: m });
    }
    let vol = chart_volume(verts).to_f64();
    let pf = p.map_coefficients(|c| c.to_f64());
    let vf: Vec<Vec<f64>> = verts.iter().map(|v| v.iter().map(Scalar::to_f64).collect()).collect();
    let mom = sample_simplex(&vf, samples, seed, 0, |x| (pf.eval(x), 0.0));
    let (var, _, _) = mom.covariance();
    Ok(QuadratureResult {
        value: S::from_f64(vol * mom.mean_a()),
        method: Method::MonteCarlo,
        stderr: Some(vol * (var / mom.count as f64).sqrt()),
    })
}
