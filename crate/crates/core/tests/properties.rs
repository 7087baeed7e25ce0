use minimax_cert::cones::{
    extreme_rays, lp_feasible, membership, sample_cone_directions, Bound, PolyhedralCone,
};
use minimax_cert::expr::{
    gradient, hessian, parse_expression, second_subderivative, subderivative, Expr, Point,
};
use proptest::prelude::*;

fn cone3() -> impl Strategy<Value = PolyhedralCone> {
    (
        prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 3), 0..5),
        prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 3), 0..2),
    )
        .prop_map(|(le, eq)| PolyhedralCone::new(3, le, eq).unwrap())
}

/// Random polynomial in `x1, y1` built from monomials of degree at most 4.
fn poly2() -> impl Strategy<Value = String> {
    prop::collection::vec(((0u32..3, 0u32..3), -2.0f64..2.0), 1..6).prop_map(|terms| {
        terms
            .iter()
            .map(|((a, b), c)| {
                let mut t = format!("({c})");
                for (v, k) in [("x1", a), ("y1", b)] {
                    if *k > 0 {
                        t.push_str(&format!("*{v}^{k}"));
                    }
                }
                t
            })
            .collect::<Vec<_>>()
            .join(" + ")
    })
}

fn neg(e: &Expr) -> Expr {
    e.clone().neg()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn generators_span_sampled_members(k in cone3(), seed in 0u64..500) {
        let rs = extreme_rays(&k).unwrap();
        let gens = rs.conic_generators();
        for g in &gens {
            prop_assert!(membership(&k, g, 1e-7));
        }
        for w in sample_cone_directions(&k, 16, seed) {
            // |Σ λ_i g_i − w| ≤ 1e-7 componentwise with λ ≥ 0.
            let mut a_le = Vec::new();
            let mut b_le = Vec::new();
            for r in 0..3 {
                let row: Vec<f64> = gens.iter().map(|g| g[r]).collect();
                a_le.push(row.iter().map(|v| -v).collect());
                b_le.push(1e-7 - w[r]);
                a_le.push(row);
                b_le.push(1e-7 + w[r]);
            }
            let sol = lp_feasible(&[], &[], &a_le, &b_le, &vec![Bound::NONNEG; gens.len()]).unwrap();
            prop_assert!(sol.is_some(), "{w:?} not generated by {gens:?}");
        }
    }

    #[test]
    fn gradient_matches_central_differences(text in poly2(), x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let f = parse_expression(&text, 1, 1).unwrap();
        let p = Point::new(vec![x], vec![y]).unwrap();
        let g = gradient(&f, &p).unwrap();
        let h = 1e-5;
        for i in 0..2 {
            let mut e = [0.0; 2];
            e[i] = 1.0;
            let fd = (f.evaluate(&p.offset(h, &e)).unwrap() - f.evaluate(&p.offset(-h, &e)).unwrap()) / (2.0 * h);
            prop_assert!((fd - g[i]).abs() <= 1e-6 * (1.0 + g[i].abs()), "{fd} vs {}", g[i]);
        }
        let hm = hessian(&f, &p).unwrap();
        prop_assert!((hm[(0, 1)] - hm[(1, 0)]).abs() < 1e-12);
    }

    #[test]
    fn second_subderivative_sign_flip(text in poly2(), u in -1.0f64..1.0, v in -1.0f64..1.0, t in 0.1f64..4.0) {
        let f = parse_expression(&text, 1, 1).unwrap();
        let p = Point::new(vec![0.3], vec![-0.2]).unwrap();
        let w = [u, v];
        let tw = [t * u, t * v];
        let d2 = second_subderivative(&f, &p, &w).unwrap().value;
        prop_assert_eq!(second_subderivative(&neg(&f), &p, &w).unwrap().value, -d2);
        let d1 = subderivative(&f, &p, &w).unwrap().value;
        let d1t = subderivative(&f, &p, &tw).unwrap().value;
        prop_assert!((d1t - t * d1).abs() <= 1e-12 * (1.0 + d1t.abs()));
        let d2t = second_subderivative(&f, &p, &tw).unwrap().value;
        prop_assert!((d2t - t * t * d2).abs() <= 1e-12 * (1.0 + d2t.abs()));
    }
}

#[test]
fn abs_kink_has_exact_directional_values() {
    let f = parse_expression("-abs(x1)^9 + 0.6*abs(x1)^3*abs(y1)^3 - abs(y1)^5", 1, 1).unwrap();
    let p = Point::new(vec![0.0], vec![0.0]).unwrap();
    for w in [[1.0, 0.0], [0.0, -1.0], [0.6, 0.8], [-0.3, 2.0]] {
        assert_eq!(subderivative(&f, &p, &w).unwrap().value, 0.0);
        assert_eq!(second_subderivative(&f, &p, &w).unwrap().value, 0.0);
    }
}
