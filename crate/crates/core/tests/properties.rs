use heatlab_core::bounds::{pang_envelope, universal_rhs, zeta};
use heatlab_core::exec::Sequential;
use heatlab_core::graph::{build_graph, EdgeSpec, Graph, VertexSpec};
use heatlab_core::heat::{heat_kernel_finite, Backend};
use heatlab_core::metric::{check_intrinsic, path_degree_metric};
use heatlab_core::verify::{fit_gaussian_constant, verify_universal};
use proptest::prelude::*;

/// Connected graphs on 2..=7 vertices: a spanning path plus random chords.
fn graphs() -> impl Strategy<Value = Graph> {
    (2usize..=7)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(0.2f64..3.0, n),
                prop::collection::vec(0.1f64..4.0, n - 1),
                prop::collection::vec((0..n, 0..n, 0.1f64..4.0), 0..n),
            )
        })
        .prop_map(|(m, path, chords)| {
            let vs: Vec<_> = m.iter().enumerate().map(|(i, &m)| VertexSpec::new(format!("v{i}"), m)).collect();
            let mut es: Vec<_> = path
                .iter()
                .enumerate()
                .map(|(i, &b)| EdgeSpec::new(format!("v{i}"), format!("v{}", i + 1), b))
                .collect();
            for (u, v, b) in chords {
                let (u, v) = (u.min(v), u.max(v));
                if v > u + 1 {
                    es.push(EdgeSpec::new(format!("v{u}"), format!("v{v}"), b));
                }
            }
            es.sort_by(|a, b| (&a.u, &a.v).cmp(&(&b.u, &b.v)));
            es.dedup_by(|a, b| a.u == b.u && a.v == b.v);
            build_graph(&vs, &es).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn zeta_is_monotone_and_below_its_quadratic(x in 0.0f64..50.0, h in 0.0f64..5.0) {
        let z = zeta(x).unwrap();
        prop_assert!(x == 0.0 || zeta(-x).is_err());
        prop_assert!(z >= 0.0 && z <= x * x / 2.0 + 1e-15);
        prop_assert!(zeta(x + h).unwrap() >= z);
    }

    #[test]
    fn pang_envelope_is_ordered(d in 0.0f64..40.0, t in 0.01f64..100.0, c in 1.0f64..10.0) {
        let (lo, hi) = pang_envelope(d, t, c).unwrap();
        prop_assert!(lo <= hi);
    }

    #[test]
    fn kernel_is_symmetric_and_stochastic(g in graphs(), t in 0.0f64..5.0) {
        let all: Vec<_> = g.vertices().collect();
        let s = heat_kernel_finite(&g, &[t], &all, &all, Backend::ExpmAction, &Sequential).unwrap();
        for (i, &x) in all.iter().enumerate() {
            let mut mass = 0.0;
            for (j, &y) in all.iter().enumerate() {
                let (a, b) = (s.value(0, i, j), s.value(0, j, i));
                prop_assert!(a >= 0.0);
                prop_assert!((a - b).abs() <= 1e-10 * a.max(b).max(1e-300));
                mass += a * g.measure(y);
            }
            prop_assert!((mass - 1.0).abs() < 1e-10, "mass at {} is {}", g.label(x), mass);
        }
    }

    #[test]
    fn backends_agree(g in graphs(), t in 0.05f64..5.0) {
        let all: Vec<_> = g.vertices().collect();
        let a = heat_kernel_finite(&g, &[t], &all, &all, Backend::ExpmAction, &Sequential).unwrap();
        let b = heat_kernel_finite(&g, &[t], &all, &all, Backend::DenseEig, &Sequential).unwrap();
        let top = a.log_values().iter().copied().fold(f64::NEG_INFINITY, f64::max).exp();
        for (u, v) in a.log_values().iter().zip(b.log_values()) {
            prop_assert!((u.exp() - v.exp()).abs() <= 1e-9 * top);
        }
    }

    #[test]
    fn path_degree_metric_is_intrinsic_with_its_jump(g in graphs(), s in 0.1f64..3.0) {
        let m = path_degree_metric(&g, s).unwrap();
        let r = check_intrinsic(&g, &m).unwrap();
        prop_assert!(r.is_intrinsic, "ratio {}", r.max_ratio);
        prop_assert!(r.jump <= s * (1.0 + 1e-12));
        prop_assert!(m.triangle_defect().unwrap_or(0.0) <= 1e-12);
    }

    #[test]
    fn universal_bound_never_fails(g in graphs(), s in 0.2f64..2.0) {
        let m = path_degree_metric(&g, s).unwrap();
        let all: Vec<_> = g.vertices().collect();
        let times = [0.05, 0.3, 1.0, 4.0, 20.0];
        let r = verify_universal(&g, &m, s, &times, &all, &all, Backend::ExpmAction, &Sequential).unwrap();
        prop_assert!(r.pass, "worst log-ratio {}", r.worst_log_ratio);
        for p in &r.points {
            let (x, y) = (g.require(r.label(p.x)).unwrap(), g.require(r.label(p.y)).unwrap());
            let rhs = universal_rhs(g.measure(x), g.measure(y), m.distance(x, y), p.t, s).unwrap();
            prop_assert!((rhs - p.rhs_log).abs() <= 1e-12 * rhs.abs().max(1.0));
        }
    }

    #[test]
    fn fitted_gaussian_constant_is_feasible_and_monotone(
        terms in prop::collection::vec((-5.0f64..5.0, 0.0f64..20.0), 1..30),
        extra in (-5.0f64..5.0, 0.0f64..20.0),
    ) {
        let c = fit_gaussian_constant(&terms).unwrap();
        for &(a, q) in &terms {
            prop_assert!(a + q / c <= c.ln() + 1e-9);
        }
        // a slightly smaller constant violates some requirement
        let smaller = c * (1.0 - 1e-6);
        prop_assert!(terms.iter().any(|&(a, q)| a + q / smaller > smaller.ln()));
        let mut more = terms.clone();
        more.push(extra);
        prop_assert!(fit_gaussian_constant(&more).unwrap() >= c * (1.0 - 1e-12));
    }
}
