//! Classicality indicators per stratum, closed-form references and the
//! hierarchy check.

use std::cmp::Ordering;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::geometry::{
    chart_volume, classify_cross_section, euclidean_volume, face_simplex, positivity_polytope,
    signed_decomposition_b_type, triangulate, CrossSection, FaceChart, Hyperplane, SignedSimplexList, Simplex,
    DEDUP_TOL, MARGIN_TOL,
};
use crate::polyalg::{as_linear_form_product, pullback_density, AffineChartMap, LinearFormProduct};
use crate::quadrature::{
    integrate_dirichlet, integrate_la, integrate_lasserre, sample_simplex, Method, MC_MIN_SAMPLES,
};
use crate::scalar::{factorial, Scalar};
use crate::strata::{degeneracy_orbit, enumerate_strata, DegeneracyType, KernelSpectrum, DEGENERACY_TOL};
use crate::DEFAULT_SEED;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IndicatorOptions {
    pub mc_samples: usize,
    pub seed: u64,
}

impl Default for IndicatorOptions {
    fn default() -> Self {
        Self {
            mc_samples: 1_000_000,
            seed: DEFAULT_SEED,
        }
    }
}

/// How the region was decomposed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    /// Full-group stratum, value one by convention.
    Trivial,
    /// Fan triangulation of the clipped face.
    Fan,
    /// Signed two-simplex decomposition of the four-level B-type polytope.
    SignedDecomposition,
    /// Ratio estimator over uniform samples of each face.
    Sampling,
}

#[derive(Clone, Debug)]
pub struct IndicatorResult<S> {
    pub n: usize,
    pub stratum: DegeneracyType,
    pub spectrum: KernelSpectrum<S>,
    pub value: S,
    pub numerator: S,
    pub denominator: S,
    pub method: Method,
    pub route: Route,
    pub stderr: Option<f64>,
    pub seed: Option<u64>,
}

impl<S: Scalar> IndicatorResult<S> {
    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "stratum": self.stratum,
            "spectrum": self.spectrum,
            "value": self.value.decimal_string(),
            "value_exact": self.value.exact_string(),
            "numerator": self.numerator.to_json_string(),
            "denominator": self.denominator.to_json_string(),
            "method": self.method,
            "route": self.route,
            "arithmetic": S::NAME,
            "seed": self.seed,
            "stderr": self.stderr,
            "tolerances": tolerances(),
        })
    }
}

impl<S: Scalar> Serialize for IndicatorResult<S> {
    fn serialize<Z: serde::Serializer>(&self, serializer: Z) -> std::result::Result<Z::Ok, Z::Error> {
        self.to_json().serialize(serializer)
    }
}

/// Tolerances used throughout, for provenance in reports.
pub fn tolerances() -> Value {
    json!({
        "spectrum": 1e-12,
        "margin": MARGIN_TOL,
        "vertex_dedup": DEDUP_TOL,
        "degeneracy": DEGENERACY_TOL,
    })
}

/// Measure of the stratum's classical part relative to the whole stratum.
///
/// Sums over every ordering of the multiplicities, each ordering being a
/// face of the ordered simplex with its own chart weight. A four-level
/// B-type spectrum on the regular stratum with the permanent engine goes
/// through the signed decomposition.
pub fn indicator<S: Scalar>(
    stratum: &DegeneracyType,
    pi: &KernelSpectrum<S>,
    method: Method,
    opts: &IndicatorOptions,
) -> Result<IndicatorResult<S>> {
    let n = pi.n();
    if stratum.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: stratum.n() });
    }
    let stratum = stratum.partition();
    let mut result = IndicatorResult {
        n,
        stratum: stratum.clone(),
        spectrum: pi.clone(),
        value: S::one(),
        numerator: S::one(),
        denominator: S::one(),
        method,
        route: Route::Trivial,
        stderr: None,
        seed: None,
    };
    if stratum.is_full() {
        return Ok(result);
    }
    if method == Method::MonteCarlo {
        return mc_indicator(&stratum, pi, opts, result);
    }
    let signed = n == 4
        && stratum.is_regular()
        && method == Method::La
        && classify_cross_section(pi)? == CrossSection::BType;
    let mut num = S::zero();
    let mut den = S::zero();
    for k in degeneracy_orbit(&stratum) {
        let face = face_simplex::<S>(&k)?;
        let weight: S = face.chart().weight();
        let pieces = if signed {
            signed_decomposition_b_type(pi)?
        } else {
            triangulate(&positivity_polytope(pi, &k)?)
        };
        let whole = SignedSimplexList {
            terms: vec![(1, face)],
            degenerate: false,
        };
        num = num + weight.clone() * integrate_density(&k, &pieces, method)?;
        den = den + weight * integrate_density(&k, &whole, method)?;
    }
    result.route = if signed { Route::SignedDecomposition } else { Route::Fan };
    result.value = num.clone() / den.clone();
    result.numerator = num;
    result.denominator = den;
    Ok(result)
}

/// Signed sum of the stratum density integrated over each simplex, in the
/// chart of the face `k`.
pub fn integrate_density<S: Scalar>(k: &DegeneracyType, pieces: &SignedSimplexList<S>, method: Method) -> Result<S> {
    let chart = FaceChart::new(k);
    let forms = if method == Method::La {
        Some(as_linear_form_product(k, &chart.block_map::<S>())?)
    } else {
        None
    };
    let mut total = S::zero();
    for (sign, simplex) in &pieces.terms {
        let v = integrate_simplex(k, forms.as_ref(), simplex, method)?;
        total = if *sign < 0 { total - v } else { total + v };
    }
    Ok(total)
}

fn integrate_simplex<S: Scalar>(
    k: &DegeneracyType,
    forms: Option<&LinearFormProduct<S>>,
    simplex: &Simplex<S>,
    method: Method,
) -> Result<S> {
    match method {
        Method::La => Ok(integrate_la(forms.expect("forms prepared"), simplex)?.value),
        Method::Lasserre | Method::Dirichlet => {
            let m = simplex.dim();
            let map = AffineChartMap::from_simplex(&simplex.block_vertices())?;
            let pulled = pullback_density(k, &map)?;
            let jac = chart_volume(&simplex.chart_vertices()) * S::from_bigint(&factorial(m));
            let canonical = if method == Method::Lasserre {
                integrate_lasserre(&pulled, m)?
            } else {
                integrate_dirichlet(&pulled, m)?
            };
            Ok(jac * canonical.value)
        }
        Method::MonteCarlo => Err(Error::Contract("sampling is handled by the indicator".into())),
    }
}

fn mc_indicator<S: Scalar>(
    stratum: &DegeneracyType,
    pi: &KernelSpectrum<S>,
    opts: &IndicatorOptions,
    mut result: IndicatorResult<S>,
) -> Result<IndicatorResult<S>> {
    if opts.mc_samples < MC_MIN_SAMPLES {
        return Err(Error::Domain(format!("at least {MC_MIN_SAMPLES} samples are required")));
    }
    let pif = pi.convert(|p| p.to_f64());
    let h = Hyperplane::from_spectrum(&pif);
    let orbit = degeneracy_orbit(stratum);
    let per_face = (opts.mc_samples / orbit.len()).max(MC_MIN_SAMPLES);
    let (mut num, mut den) = (0.0, 0.0);
    let (mut var_n, mut var_d, mut cov) = (0.0, 0.0, 0.0);
    for (idx, k) in orbit.iter().enumerate() {
        let face = face_simplex::<f64>(k)?;
        let chart = face.chart();
        let forms = as_linear_form_product(k, &chart.block_map::<f64>())?;
        let verts = face.chart_vertices();
        let c = chart.weight::<f64>() * euclidean_volume(&face);
        // the margin is affine in chart coordinates
        let dim = chart.dim();
        let m0 = h.eval(&chart.from_chart(&vec![0.0; dim]));
        let grad: Vec<f64> = (0..dim)
            .map(|i| {
                let mut e = vec![0.0; dim];
                e[i] = 1.0;
                h.eval(&chart.from_chart(&e)) - m0
            })
            .collect();
        let factors: Vec<(&[f64], i32)> = forms.factors.iter().map(|(a, e)| (a.as_slice(), *e as i32)).collect();
        let mom = sample_simplex(&verts, per_face, opts.seed, idx as u64, |x| {
            let dot = |a: &[f64]| a.iter().zip(x).map(|(ai, xi)| ai * xi).sum::<f64>();
            let f: f64 = factors.iter().map(|(a, e)| dot(a).powi(*e)).product();
            let inside = m0 + dot(&grad) >= 0.0;
            (if inside { f } else { 0.0 }, f)
        });
        let (va, vb, vab) = mom.covariance();
        let cnt = mom.count as f64;
        num += c * mom.mean_a();
        den += c * mom.mean_b();
        var_n += c * c * va / cnt;
        var_d += c * c * vb / cnt;
        cov += c * c * vab / cnt;
    }
    let q = num / den;
    let var_q = (var_n - 2.0 * q * cov + q * q * var_d).max(0.0) / (den * den);
    result.value = S::from_f64(q);
    result.numerator = S::from_f64(num);
    result.denominator = S::from_f64(den);
    result.route = Route::Sampling;
    result.stderr = Some(var_q.sqrt());
    result.seed = Some(opts.seed);
    Ok(result)
}

fn component<S: Scalar>(pi: &KernelSpectrum<S>, i: usize) -> S {
    pi.pi()[i].clone()
}

fn positive_guard<S: Scalar>(v: &S, name: &str) -> Result<()> {
    if v.sign_tol(MARGIN_TOL) != Ordering::Greater {
        return Err(Error::Domain(format!("{name} must be positive")));
    }
    Ok(())
}

/// Regular three-level indicator
/// `(ab)^{−3}·[4a^{−2} + 4b^{−2} + 6(ab)^{−1}]`, `a = 3π₁−1`, `b = 1−3π₃`.
pub fn q3_regular_closed_form<S: Scalar>(pi: &KernelSpectrum<S>) -> Result<S> {
    if pi.n() != 3 {
        return Err(Error::Domain("three-level closed form needs N = 3".into()));
    }
    let a = S::from_i64(3) * component(pi, 0) - S::one();
    let b = S::one() - S::from_i64(3) * component(pi, 2);
    positive_guard(&a, "3*pi_1 - 1")?;
    positive_guard(&b, "1 - 3*pi_3")?;
    let ab = a.clone() * b.clone();
    let bracket = S::from_i64(4) / (a.clone() * a) + S::from_i64(4) / (b.clone() * b) + S::from_i64(6) / ab.clone();
    Ok(bracket / ab.powi(3))
}

/// Whether the degenerate three-level closed form applies: both degenerate
/// segments are cut, `π₁ ≥ 1` and `π₃ ≤ 0`.
pub fn q3_degenerate_window<S: Scalar>(pi: &KernelSpectrum<S>) -> bool {
    pi.n() == 3
        && (component(pi, 0) - S::one()).sign_tol(MARGIN_TOL) != Ordering::Less
        && component(pi, 2).sign_tol(MARGIN_TOL) != Ordering::Greater
}

/// Degenerate three-level indicator `(32/33)·[a^{−5} + b^{−5}]`.
pub fn q3_degenerate_closed_form<S: Scalar>(pi: &KernelSpectrum<S>) -> Result<S> {
    if pi.n() != 3 {
        return Err(Error::Domain("three-level closed form needs N = 3".into()));
    }
    if !q3_degenerate_window(pi) {
        return Err(Error::Domain(
            "closed form valid only for pi_1 >= 1 and pi_3 <= 0; use the generic engine".into(),
        ));
    }
    let a = S::from_i64(3) * component(pi, 0) - S::one();
    let b = S::one() - S::from_i64(3) * component(pi, 2);
    Ok(S::ratio(32, 33) * (S::one() / a.powi(5) + S::one() / b.powi(5)))
}

/// The 22-term bracket of the four-level A-type integral over
/// `a³b³c³`, with `a = 4π₁−1`, `b = 1−4π₄`, `c = π₁+π₂−π₃−π₄`.
pub fn q4_a_type_bracket<S: Scalar>(a: &S, b: &S, c: &S) -> S {
    const TERMS: [(i64, u32, u32, u32); 22] = [
        (480, 2, 4, 0),
        (480, 4, 2, 0),
        (35, 0, 0, 6),
        (105, 1, 0, 5),
        (105, 0, 1, 5),
        (180, 2, 0, 4),
        (180, 0, 2, 4),
        (200, 3, 0, 3),
        (540, 1, 2, 3),
        (540, 2, 1, 3),
        (120, 4, 0, 2),
        (120, 0, 4, 2),
        (912, 2, 2, 2),
        (360, 1, 4, 1),
        (960, 2, 3, 1),
        (960, 3, 2, 1),
        (800, 3, 3, 0),
        (600, 1, 3, 2),
        (200, 0, 3, 3),
        (315, 1, 1, 4),
        (600, 3, 1, 2),
        (360, 4, 1, 1),
    ];
    let (ia, ib, ic) = (S::one() / a.clone(), S::one() / b.clone(), S::one() / c.clone());
    let bracket = TERMS.iter().fold(S::zero(), |acc, &(k, ea, eb, ec)| {
        acc + S::from_i64(k) * ia.powi(ea) * ib.powi(eb) * ic.powi(ec)
    });
    bracket * (ia * ib * ic).powi(3)
}

/// Regular four-level indicator for A-type spectra: the bracket divided by
/// its value at `π = (1,0,0,0)`, where the polytope is the whole simplex.
pub fn q4_a_type_closed_form<S: Scalar>(pi: &KernelSpectrum<S>) -> Result<S> {
    if classify_cross_section(pi)? != CrossSection::AType {
        return Err(Error::Domain("closed form needs an A-type spectrum (pi_1 >= 1)".into()));
    }
    let p: Vec<S> = pi.pi().to_vec();
    let a = S::from_i64(4) * p[0].clone() - S::one();
    let b = S::one() - S::from_i64(4) * p[3].clone();
    let c = p[0].clone() + p[1].clone() - p[2].clone() - p[3].clone();
    positive_guard(&a, "4*pi_1 - 1")?;
    positive_guard(&b, "1 - 4*pi_4")?;
    positive_guard(&c, "pi_1 + pi_2 - pi_3 - pi_4")?;
    let full = q4_a_type_bracket(&S::from_i64(3), &S::one(), &S::one());
    Ok(q4_a_type_bracket(&a, &b, &c) / full)
}

/// Closed-form reference for `(stratum, π)` when one is known.
pub fn closed_form<S: Scalar>(stratum: &DegeneracyType, pi: &KernelSpectrum<S>) -> Option<S> {
    let p = stratum.partition();
    if p.is_full() {
        return Some(S::one());
    }
    match (pi.n(), p.multiplicities()) {
        (2, [1, 1]) => {
            // the qubit kernel is unique; rationals cannot hold √3/9
            S::parse_str("1/9*sqrt(3)").ok()
        }
        (3, [1, 1, 1]) => q3_regular_closed_form(pi).ok(),
        (3, [2, 1]) => q3_degenerate_closed_form(pi).ok(),
        (4, [1, 1, 1, 1]) => q4_a_type_closed_form(pi).ok(),
        _ => None,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Comparison {
    pub lower: String,
    pub upper: String,
    pub margin: f64,
    pub holds: bool,
}

#[derive(Clone, Debug)]
pub struct HierarchyReport<S> {
    pub spectrum: KernelSpectrum<S>,
    pub values: Vec<(DegeneracyType, S)>,
    pub chains: Vec<Vec<String>>,
    pub comparisons: Vec<Comparison>,
    pub conjecture_holds: bool,
    pub violations: Vec<Comparison>,
}

impl<S: Scalar> HierarchyReport<S> {
    pub fn to_json(&self) -> Value {
        json!({
            "spectrum": self.spectrum,
            "values": self.values.iter().map(|(d, v)| json!({
                "stratum": d,
                "value": v.decimal_string(),
                "value_exact": v.exact_string(),
            })).collect::<Vec<_>>(),
            "chains": self.chains,
            "comparisons": self.comparisons,
            "conjecture_holds": self.conjecture_holds,
            "violations": self.violations,
        })
    }

    /// Smallest margin over all cover relations.
    pub fn min_margin(&self) -> f64 {
        self.comparisons.iter().map(|c| c.margin).fold(f64::INFINITY, f64::min)
    }
}

/// Computes every stratum's indicator and checks strict increase along each
/// cover relation of the refinement order, plus positivity of the torus
/// indicator.
pub fn hierarchy_check<S: Scalar>(
    pi: &KernelSpectrum<S>,
    method: Method,
    opts: &IndicatorOptions,
) -> Result<HierarchyReport<S>> {
    let poset = enumerate_strata(pi.n())?;
    let mut values = Vec::with_capacity(poset.strata.len());
    for s in &poset.strata {
        let m = if method == Method::MonteCarlo {
            method
        } else if method == Method::La && s.density_degree() > crate::quadrature::LA_DEFAULT_MAX_DEGREE {
            Method::Lasserre
        } else {
            method
        };
        values.push((s.clone(), indicator(s, pi, m, opts)?.value));
    }
    let mut comparisons = Vec::new();
    let torus = &values[poset.minimum()];
    comparisons.push(Comparison {
        lower: "0".into(),
        upper: torus.0.to_string(),
        margin: torus.1.to_f64(),
        holds: torus.1 > S::zero(),
    });
    for &(lo, hi) in &poset.covers {
        let d = values[hi].1.clone() - values[lo].1.clone();
        comparisons.push(Comparison {
            lower: values[lo].0.to_string(),
            upper: values[hi].0.to_string(),
            margin: d.to_f64(),
            holds: d > S::zero(),
        });
    }
    let violations: Vec<Comparison> = comparisons.iter().filter(|c| !c.holds).cloned().collect();
    let chains = poset
        .maximal_chains()
        .into_iter()
        .map(|c| c.into_iter().map(|i| poset.strata[i].to_string()).collect())
        .collect();
    Ok(HierarchyReport {
        spectrum: pi.clone(),
        conjecture_holds: violations.is_empty(),
        values,
        chains,
        comparisons,
        violations,
    })
}
