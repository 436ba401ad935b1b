use classicality::geometry::{determinant, FaceChart};
use classicality::polyalg::{as_linear_form_product, pullback, pullback_density, AffineChartMap, SparsePolynomial};
use classicality::quadrature::{integrate_dirichlet, integrate_la_polynomial, integrate_lasserre};
use classicality::scalar::{Rational, Scalar};
use classicality::strata::{degeneracy_orbit, enumerate_strata, stratum_density, DegeneracyType};
use proptest::prelude::*;

fn q(v: i64) -> Rational {
    Rational::from_i64(v)
}

fn standard_simplex(n: usize) -> Vec<Vec<Rational>> {
    let mut verts = vec![vec![q(0); n]];
    for i in 0..n {
        let mut e = vec![q(0); n];
        e[i] = q(1);
        verts.push(e);
    }
    verts
}

fn homogeneous(n: usize, deg: u32, raw: &[(Vec<u32>, i64)]) -> SparsePolynomial<Rational> {
    let mut p = SparsePolynomial::zero(n);
    for (e, c) in raw {
        // spread the leftover degree onto the last variable
        let mut exps: Vec<u32> = e.iter().take(n).map(|x| x % (deg + 1)).collect();
        exps.resize(n, 0);
        let mut total: u32 = 0;
        for x in exps.iter_mut() {
            *x = (*x).min(deg - total);
            total += *x;
        }
        exps[n - 1] += deg - total;
        p.add_term(exps, q(*c));
    }
    p
}

fn terms() -> impl Strategy<Value = Vec<(Vec<u32>, i64)>> {
    prop::collection::vec((prop::collection::vec(0u32..8, 3), -6i64..=6), 1..6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn three_engines_agree_on_homogeneous_polynomials(n in 1usize..=3, deg in 0u32..=7, raw in terms()) {
        let p = homogeneous(n, deg, &raw);
        let dir = integrate_dirichlet(&p, n).unwrap().value;
        prop_assert_eq!(integrate_lasserre(&p, n).unwrap().value, dir.clone());
        prop_assert_eq!(integrate_la_polynomial(&p, &standard_simplex(n)).unwrap().value, dir);
    }

    #[test]
    fn lasserre_handles_mixed_degrees(n in 1usize..=3, raw in terms()) {
        let mut p = SparsePolynomial::zero(n);
        for (e, c) in &raw {
            p.add_term(e.iter().take(n).map(|x| x % 4).collect(), q(*c));
        }
        prop_assert_eq!(integrate_lasserre(&p, n).unwrap().value, integrate_dirichlet(&p, n).unwrap().value);
    }

    #[test]
    fn la_matches_pullback_on_random_simplex(
        deg in 0u32..=5,
        raw in terms(),
        coords in prop::collection::vec(-4i64..=4, 6),
    ) {
        let n = 2;
        let p = homogeneous(n, deg, &raw);
        let verts = vec![
            vec![q(coords[0]), q(coords[1])],
            vec![q(coords[2]), q(coords[3])],
            vec![q(coords[4]), q(coords[5])],
        ];
        let det = determinant(vec![
            vec![verts[1][0].clone() - verts[0][0].clone(), verts[1][1].clone() - verts[0][1].clone()],
            vec![verts[2][0].clone() - verts[0][0].clone(), verts[2][1].clone() - verts[0][1].clone()],
        ]);
        prop_assume!(det != q(0));
        let pulled = pullback(&p, &AffineChartMap::from_simplex(&verts).unwrap()).unwrap();
        let want = integrate_dirichlet(&pulled, n).unwrap().value * det.abs();
        prop_assert_eq!(integrate_la_polynomial(&p, &verts).unwrap().value, want);
    }

    #[test]
    fn form_product_expands_to_pulled_back_density(
        base in -3i64..=3,
        dirs in prop::collection::vec(-3i64..=3, 12),
        pick in 0usize..64,
    ) {
        let mut all = Vec::new();
        for n in 2..=4 {
            for s in enumerate_strata(n).unwrap().strata {
                all.extend(degeneracy_orbit(&s));
            }
        }
        let k: &DegeneracyType = &all[pick % all.len()];
        let s = k.blocks();
        let m = 2;
        let directions: Vec<Vec<Rational>> = (0..m).map(|i| (0..s).map(|j| q(dirs[i * 4 + j])).collect()).collect();
        let map = AffineChartMap::new(vec![Rational::ratio(base, 5); s], directions).unwrap();
        let forms = as_linear_form_product(k, &map).unwrap();
        let density = stratum_density::<Rational>(k);
        let direct = pullback(&density.polynomial, &map).unwrap();
        prop_assert_eq!(forms.expand(), direct.clone());
        prop_assert_eq!(pullback_density(k, &map).unwrap(), direct.clone());
        for x in [[q(1), q(-2)], [Rational::ratio(1, 3), q(2)], [q(-1), Rational::ratio(-5, 7)]] {
            prop_assert!(direct.eval(&x) >= q(0));
        }
    }
}

#[test]
fn face_charts_keep_forms_homogeneous() {
    for n in 2..=4 {
        for s in enumerate_strata(n).unwrap().strata {
            if s.is_full() {
                continue;
            }
            for k in degeneracy_orbit(&s) {
                let chart = FaceChart::new(&k);
                let map = chart.block_map::<Rational>();
                let forms = as_linear_form_product(&k, &map).unwrap();
                let expanded = forms.expand();
                assert!(expanded.is_homogeneous(), "{k}");
                assert_eq!(expanded.degree(), Some(k.density_degree() as u32), "{k}");
                let eliminated = stratum_density::<Rational>(&k).eliminated().unwrap();
                let shifted = pullback(
                    &eliminated,
                    &AffineChartMap::new(
                        vec![Rational::ratio(1, n as i64); k.blocks() - 1],
                        (0..k.blocks() - 1)
                            .map(|i| (0..k.blocks() - 1).map(|j| q((i == j) as i64)).collect())
                            .collect(),
                    )
                    .unwrap(),
                )
                .unwrap();
                assert_eq!(shifted, expanded, "{k}");
            }
        }
    }
}
