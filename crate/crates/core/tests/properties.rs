//! Property tests for the invariants that must hold beyond the fixtures.

use fractool::curve::{expand, polyline, polyline_with, segment_census, ExpandOptions};
use fractool::dimension::{solve_dimension, solve_dimension_numeric, DimensionProblem};
use fractool::geom::Vec2;
use fractool::model::{GeneratorStep, DEFAULT_CLOSURE_TOLERANCE};
use fractool::parse::{eval_expr, parse_system, serialize_system, ParseErrorKind};
use fractool::spectral::{
    matrix_power, perron_eigen, primitivity, Primitivity, SubstitutionMatrix,
};
use fractool::testkit::{random_valid_system, TestRng};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn round_trip_preserves_every_field(seed: u64) {
        let mut rng = TestRng::new(seed);
        let system = random_valid_system(&mut rng, 4);
        let doc = serialize_system(&system);
        let back = parse_system(&doc).unwrap();

        prop_assert_eq!(&back.name, &system.name);
        prop_assert_eq!(back.initiator_type, system.initiator_type);
        prop_assert_eq!(back.types.len(), system.types.len());
        for (a, b) in back.types.iter().zip(&system.types) {
            prop_assert_eq!(&a.name, &b.name);
            prop_assert!((a.length - b.length).abs() <= 1e-12 * b.length.abs().max(1.0));
        }
        for (ga, gb) in back.generators.iter().zip(&system.generators) {
            prop_assert_eq!(ga.target_type, gb.target_type);
            prop_assert_eq!(ga.steps.len(), gb.steps.len());
            for (sa, sb) in ga.steps.iter().zip(&gb.steps) {
                prop_assert_eq!(sa.type_index(), sb.type_index());
                prop_assert_eq!(sa.reversed(), sb.reversed());
                prop_assert_eq!(sa.mirrored(), sb.mirrored());
                prop_assert!((sa.angle() - sb.angle()).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn census_always_equals_the_matrix_power_prediction(seed: u64) {
        let mut rng = TestRng::new(seed);
        let system = random_valid_system(&mut rng, 4);
        let matrix = SubstitutionMatrix::from_system(&system);
        for k in 0..=10 {
            let census = segment_census(&system, k).unwrap();
            let predicted = matrix_power(&matrix, k).column(system.initiator_type);
            prop_assert_eq!(census.counts(), predicted.as_slice());
        }
    }

    #[test]
    fn geometry_invariants_hold_for_random_systems(seed: u64) {
        let mut rng = TestRng::new(seed);
        let system = random_valid_system(&mut rng, 4);
        let length = system.types[system.initiator_type].length;
        for k in [0, 2, 5] {
            let p = polyline(&system, k).unwrap();
            prop_assert_eq!(p.vertices.len(), p.segment_count() + 1);
            prop_assert_eq!(p.vertices[0], Vec2::ZERO);
            let last = *p.vertices.last().unwrap();
            prop_assert!((last - Vec2::new(length, 0.0)).norm() <= 1e-6 * length);

            let mut previous: Option<Vec2> = None;
            expand(&system, k, |seg| {
                if let Some(prev) = previous {
                    assert_eq!(prev, seg.start);
                }
                previous = Some(seg.end);
            })
            .unwrap();
        }
    }

    #[test]
    fn reversed_initiator_is_the_exact_reverse(seed: u64) {
        let mut rng = TestRng::new(seed);
        let system = random_valid_system(&mut rng, 3);
        let forward = polyline(&system, 4).unwrap();
        let options = ExpandOptions { initiator_reversed: true, ..Default::default() };
        let backward = polyline_with(&system, 4, &options).unwrap();
        let mut expected = forward.vertices;
        expected.reverse();
        prop_assert_eq!(backward.vertices, expected);
    }

    #[test]
    fn scale_ratios_are_invariant_under_length_rescale(seed: u64, c in 0.01f64..100.0) {
        let mut rng = TestRng::new(seed);
        let base = random_valid_system(&mut rng, 4);
        let mut scaled = base.clone();
        for ty in &mut scaled.types {
            ty.length *= c;
        }
        let r0 = base.scales().unwrap();
        let r1 = scaled.scales().unwrap();
        for (a, b) in r0.iter().zip(&r1) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
        prop_assert_eq!(
            base.validate(DEFAULT_CLOSURE_TOLERANCE).is_valid(),
            scaled.validate(DEFAULT_CLOSURE_TOLERANCE).is_valid()
        );
    }

    #[test]
    fn step_angles_are_canonical_modulo_full_turns(ty in 0usize..4, angle in -20.0f64..20.0) {
        let a = GeneratorStep::new(ty, angle);
        let b = GeneratorStep::new(ty, angle + std::f64::consts::TAU);
        prop_assert!((a.angle() - b.angle()).abs() <= 1e-12);
        prop_assert!(a.angle() > -std::f64::consts::PI - 1e-15);
        prop_assert!(a.angle() <= std::f64::consts::PI + 1e-15);
    }
}

fn problem_strategy() -> impl Strategy<Value = DimensionProblem> {
    (1usize..=4)
        .prop_flat_map(|n| {
            (
                1.1f64..6.0,
                proptest::collection::vec(0.05f64..1.0, n),
                proptest::collection::vec(0.05f64..0.95, n),
            )
        })
        .prop_map(|(lambda, weights, scales)| {
            let total: f64 = weights.iter().sum();
            let freq: Vec<f64> = weights.iter().map(|w| w / total).collect();
            DimensionProblem::new(lambda, freq, scales).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scaling_sum_is_strictly_decreasing(problem in problem_strategy()) {
        let mut previous = problem.scaling_sum(0.0);
        for i in 1..=20 {
            let d = i as f64 * 0.25;
            let value = problem.scaling_sum(d);
            prop_assert!(value < previous, "not decreasing at d = {d}");
            previous = value;
        }
    }

    #[test]
    fn solver_meets_its_tolerance(problem in problem_strategy()) {
        let report = solve_dimension(problem.clone(), 1e-12).unwrap();
        prop_assert!(report.residual <= 1e-12);
        prop_assert!(report.dimension > 0.0);
        let recomputed = (problem.scaling_sum(report.dimension) - 1.0).abs();
        prop_assert_eq!(recomputed.to_bits(), report.residual.to_bits());
    }

    #[test]
    fn equal_scales_match_the_closed_form(lambda in 1.1f64..6.0, r in 0.05f64..0.95, n in 1usize..=4) {
        let freq = vec![1.0 / n as f64; n];
        let scales = vec![r; n];
        let problem = DimensionProblem::new(lambda, freq, scales).unwrap();
        let closed = solve_dimension(problem.clone(), 1e-12).unwrap();
        let numeric = solve_dimension_numeric(problem, 1e-12).unwrap();
        let reference = lambda.ln() / (1.0 / r).ln();
        prop_assert!((closed.dimension - reference).abs() <= 1e-12);
        prop_assert!((numeric.dimension - reference).abs() <= 1e-10);
    }
}

fn expression_strategy() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        (0.1f64..100.0).prop_map(|v| format!("{v:.3}")),
        Just("pi".to_string()),
        Just("phi".to_string()),
    ];
    leaf.prop_recursive(3, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}+{b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}-{b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}*{b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{a}/{b}")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{a}^{b}")),
            inner.clone().prop_map(|a| format!("sqrt({a})")),
            inner.clone().prop_map(|a| format!("sin({a})")),
            inner.clone().prop_map(|a| format!("cos({a})")),
            inner.prop_map(|a| format!("-{a}")),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    /// Every string the grammar produces either evaluates to a finite value
    /// or raises exactly one of the evaluation errors; never a syntax error.
    #[test]
    fn expressions_are_total_on_the_grammar(text in expression_strategy()) {
        match eval_expr(&text) {
            Ok(value) => prop_assert!(value.is_finite(), "{text} -> {value}"),
            Err(e) => prop_assert!(
                matches!(
                    e.kind,
                    ParseErrorKind::DivisionByZero
                        | ParseErrorKind::SqrtOfNegative
                        | ParseErrorKind::NonFiniteValue
                ),
                "{text} -> unexpected {e:?}"
            ),
        }
    }
}

/// Characteristic polynomial coefficients (monic, `det(xI - A)`) via the
/// Faddeev-LeVerrier recurrence. Independent of the power iteration.
fn characteristic_polynomial(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let mut coeffs = vec![0.0; n + 1];
    coeffs[n] = 1.0;
    let mut m = vec![vec![0.0; n]; n]; // M_0 = 0
    for k in 1..=n {
        // M_k = A * M_{k-1} + c_{n-k+1} * I
        let mut next = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for t in 0..n {
                    acc += a[i][t] * m[t][j];
                }
                next[i][j] = acc;
            }
            next[i][i] += coeffs[n - k + 1];
        }
        m = next;
        // c_{n-k} = -tr(A * M_k) / k
        let mut trace = 0.0;
        for i in 0..n {
            for t in 0..n {
                trace += a[i][t] * m[t][i];
            }
        }
        coeffs[n - k] = -trace / k as f64;
    }
    coeffs
}

fn poly_eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Largest real root by downward scanning plus bisection. The dominant
/// eigenvalue of a primitive matrix is real and simple, so the polynomial
/// crosses from positive to nonpositive there when coming down from above
/// the row-sum bound.
fn largest_root_by_bracketing(coeffs: &[f64], upper: f64) -> Option<f64> {
    for divisions in [2048u32, 65536] {
        let step = upper / divisions as f64;
        let mut hi = upper;
        let mut value_hi = poly_eval(coeffs, hi);
        while hi > step {
            let lo = hi - step;
            let value_lo = poly_eval(coeffs, lo);
            if value_hi > 0.0 && value_lo <= 0.0 {
                let (mut a, mut b) = (lo, hi);
                for _ in 0..200 {
                    let mid = 0.5 * (a + b);
                    if poly_eval(coeffs, mid) <= 0.0 {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                return Some(0.5 * (a + b));
            }
            hi = lo;
            value_hi = value_lo;
        }
    }
    None
}

fn matrix_strategy() -> impl Strategy<Value = SubstitutionMatrix> {
    (1usize..=4)
        .prop_flat_map(|n| proptest::collection::vec(0u64..4, n * n).prop_map(move |v| (n, v)))
        .prop_map(|(n, values)| {
            let rows: Vec<Vec<u64>> = values.chunks(n).map(|c| c.to_vec()).collect();
            let refs: Vec<&[u64]> = rows.iter().map(|r| r.as_slice()).collect();
            SubstitutionMatrix::from_rows(&refs)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn power_iteration_matches_the_characteristic_polynomial(m in matrix_strategy()) {
        prop_assume!(matches!(primitivity(&m), Primitivity::Primitive { .. }));
        let eigen = perron_eigen(&m, 1e-14, 1_000_000).unwrap();

        let n = m.n();
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| m.entry(i, j) as f64).collect())
            .collect();
        let coeffs = characteristic_polynomial(&rows);
        let upper = rows
            .iter()
            .map(|r| r.iter().sum::<f64>())
            .fold(0.0f64, f64::max)
            + 1.0;
        let oracle = largest_root_by_bracketing(&coeffs, upper)
            .expect("primitive matrix has a dominant real root");
        prop_assert!(
            (eigen.lambda - oracle).abs() <= 1e-8,
            "power {} vs charpoly {}",
            eigen.lambda,
            oracle
        );
    }

    #[test]
    fn exponent_one_iff_all_entries_positive(m in matrix_strategy()) {
        let n = m.n();
        let all_positive = (0..n).all(|r| (0..n).all(|c| m.entry(r, c) > 0));
        let got = primitivity(&m);
        prop_assert_eq!(
            matches!(got, Primitivity::Primitive { exponent: 1 }),
            all_positive
        );
    }
}
