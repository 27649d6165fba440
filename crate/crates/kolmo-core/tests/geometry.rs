use kolmo_core::geometry::{ConcaveMap, ConvexBody};
use kolmo_core::{dist, dot};
use proptest::prelude::*;

fn bodies() -> Vec<ConvexBody<f64>> {
    vec![
        ConvexBody::halfspace(vec![1.0, -2.0, 0.5], 0.3).unwrap(),
        ConvexBody::ellipsoid(vec![1.0, 4.0, 0.5], 1.2).unwrap(),
        ConvexBody::hypograph(
            1,
            ConcaveMap::NegQuadratic {
                curvature: vec![0.7, 2.0],
                linear: vec![0.1, -0.3],
                offset: 0.4,
            },
        )
        .unwrap(),
        ConvexBody::hypograph(
            2,
            ConcaveMap::Affine {
                coeffs: vec![0.5, -1.0],
                offset: -0.2,
            },
        )
        .unwrap(),
    ]
}

fn point() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-4.0..4.0f64, 3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn projection_is_a_metric_projection(x in point(), y in point()) {
        for b in bodies() {
            let p = b.project(&x).unwrap();
            prop_assert!(b.g(&p) <= 1e-9, "{:?} {}", b, b.g(&p));
            let pp = b.project(&p).unwrap();
            prop_assert!(dist(&p, &pp) <= 1e-9);
            // obtuse angle with every other point of C
            let q = b.project(&y).unwrap();
            let d: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a - b).collect();
            let e: Vec<f64> = q.iter().zip(&p).map(|(a, b)| a - b).collect();
            prop_assert!(dot(&d, &e) <= 1e-7 * (1.0 + dist(&x, &p)) * (1.0 + dist(&q, &p)));
            // non-expansive
            prop_assert!(dist(&p, &q) <= dist(&x, &y) + 1e-9);
        }
    }

    #[test]
    fn interior_points_are_fixed(x in point()) {
        for b in bodies() {
            if b.contains(&x) {
                prop_assert!(dist(&b.project(&x).unwrap(), &x) <= 1e-12);
                prop_assert!(b.distance(&x).unwrap() <= 1e-12);
            }
        }
    }
}
