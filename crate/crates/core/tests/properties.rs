use gapcert_core::certification::{
    bvp_threshold, certified_gap_size, holder_threshold, perturbation_radius,
};
use gapcert_core::interval_maps::{make_pomeau_manneville, min_matching_cost};
use gapcert_core::optimal_transport::{w1, w_alpha_lp, DiscreteMeasure};
use gapcert_core::regularity::{
    bvp_bruteforce_oracle, bvp_seminorm, holder_seminorm, seminorm, GridFunction, Interp, Space,
};
use gapcert_core::transfer_op::{assemble, eigendata, Basis};
use proptest::prelude::*;

fn grid_function(values: Vec<f64>) -> GridFunction {
    let grid = (0..values.len())
        .map(|i| i as f64 / (values.len() - 1) as f64)
        .collect();
    GridFunction::new(grid, values, Interp::PiecewiseLinear).unwrap()
}

fn values(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, 2..=max_len)
}

fn space() -> impl Strategy<Value = Space> {
    prop_oneof![
        (0.1f64..=1.0).prop_map(|alpha| Space::Holder { alpha }),
        (1.0f64..4.0).prop_map(|p| Space::Variation { p }),
    ]
}

fn measure(max_atoms: usize) -> impl Strategy<Value = DiscreteMeasure> {
    prop::collection::vec((0.0f64..1.0, 0.01f64..1.0), 1..=max_atoms).prop_map(|atoms| {
        DiscreteMeasure::from_atoms(atoms)
            .unwrap()
            .normalized()
            .unwrap()
    })
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #[test]
    fn seminorms_ignore_constants(v in values(40), c in -5.0f64..5.0, s in space()) {
        let f = grid_function(v);
        let g = f.map(|x| x + c).unwrap();
        prop_assert!(close(seminorm(&f, s).unwrap(), seminorm(&g, s).unwrap(), 1e-9));
    }

    #[test]
    fn seminorms_are_absolutely_homogeneous(v in values(40), a in -5.0f64..5.0, s in space()) {
        let f = grid_function(v);
        let g = f.map(|x| a * x).unwrap();
        prop_assert!(close(seminorm(&g, s).unwrap(), a.abs() * seminorm(&f, s).unwrap(), 1e-9));
    }

    #[test]
    fn p_variation_decreases_in_p(v in values(40), p in 1.0f64..4.0, dp in 0.0f64..2.0) {
        let f = grid_function(v);
        prop_assert!(bvp_seminorm(&f, p + dp).unwrap() <= bvp_seminorm(&f, p).unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn refining_the_grid_never_lowers_seminorms(v in values(30), s in space()) {
        let f = grid_function(v);
        let fine = GridFunction::sample((0.0, 1.0), 2 * f.len() - 1, Interp::PiecewiseLinear, |x| f.eval(x)).unwrap();
        prop_assert!(seminorm(&fine, s).unwrap() >= seminorm(&f, s).unwrap() * (1.0 - 1e-12));
    }

    #[test]
    fn lipschitz_seminorm_is_exact_for_interpolants(v in values(30)) {
        let f = grid_function(v);
        let fine = GridFunction::sample((0.0, 1.0), 4 * f.len() - 3, Interp::PiecewiseLinear, |x| f.eval(x)).unwrap();
        prop_assert!(close(holder_seminorm(&fine, 1.0).unwrap(), holder_seminorm(&f, 1.0).unwrap(), 1e-9));
    }

    #[test]
    fn p_variation_matches_exhaustive_search(v in values(12), p in 1.0f64..4.0) {
        let f = grid_function(v);
        let oracle = bvp_bruteforce_oracle(&f, p).unwrap();
        prop_assert!(close(bvp_seminorm(&f, p).unwrap(), oracle.value(), 1e-12));
        prop_assert!(close(oracle.anchored, oracle.free, 1e-12));
    }

    #[test]
    fn solved_gap_reproduces_the_radius(delta0 in 0.01f64..0.99, tau in 1.0f64..3.0, pi in 1.0f64..2.0, frac in 0.0f64..0.999) {
        let eps = frac * perturbation_radius(delta0, 0.0, tau, pi).unwrap();
        let delta = certified_gap_size(delta0, eps, tau, pi).unwrap().delta();
        prop_assert!(delta <= delta0);
        prop_assert!((perturbation_radius(delta0, delta, tau, pi).unwrap() - eps).abs() <= 1e-10);
    }

    #[test]
    fn solved_gap_decreases_with_distance(delta0 in 0.01f64..0.99, a in 0.0f64..0.99, b in 0.0f64..0.99) {
        let radius = perturbation_radius(delta0, 0.0, 1.0, 4.0 / 3.0).unwrap();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assume!(hi - lo > 1e-6);
        let d_lo = certified_gap_size(delta0, lo * radius, 1.0, 4.0 / 3.0).unwrap().delta();
        let d_hi = certified_gap_size(delta0, hi * radius, 1.0, 4.0 / 3.0).unwrap().delta();
        prop_assert!(d_hi < d_lo);
    }

    #[test]
    fn thresholds_are_monotone(t1 in 0.01f64..0.98, dt in 1e-3f64..0.01, k in 2usize..40, p in 1.0f64..4.0) {
        prop_assert!(holder_threshold(1.0, t1 + dt, 1.0).unwrap() < holder_threshold(1.0, t1, 1.0).unwrap());
        prop_assert!(bvp_threshold(k + 1, p).unwrap() > bvp_threshold(k, p).unwrap());
        prop_assert!(bvp_threshold(k, p + 0.1).unwrap() < bvp_threshold(k, p).unwrap());
    }

    #[test]
    fn w_alpha_is_symmetric_and_triangular(mu in measure(6), nu in measure(6), rho in measure(6), alpha in 0.2f64..=1.0) {
        let d = |a: &DiscreteMeasure, b: &DiscreteMeasure| w_alpha_lp(a, b, alpha).unwrap();
        prop_assert!(close(d(&mu, &nu), d(&nu, &mu), 1e-12));
        prop_assert!(d(&mu, &rho) <= d(&mu, &nu) + d(&nu, &rho) + 1e-12);
        prop_assert!(d(&mu, &mu).abs() <= 1e-15);
    }

    #[test]
    fn w_alpha_is_bounded_by_a_power_of_w1(mu in measure(8), nu in measure(8), alpha in 0.2f64..=1.0) {
        // Jensen for the concave map t ↦ t^α applied to the W1-optimal plan
        prop_assert!(w_alpha_lp(&mu, &nu, alpha).unwrap() <= w1(&mu, &nu).unwrap().powf(alpha) + 1e-12);
    }

    #[test]
    fn w_alpha_matches_assignment_for_uniform_weights(xs in prop::collection::vec(0.0f64..1.0, 1..=6), seed in any::<u64>(), alpha in 0.2f64..=1.0) {
        let n = xs.len();
        let ys: Vec<f64> = (0..n).map(|i| ((seed.rotate_left(7 * i as u32) % 10_007) as f64) / 10_007.0).collect();
        prop_assume!(distinct(&xs) && distinct(&ys));
        let mu = DiscreteMeasure::from_atoms(xs.iter().map(|&x| (x, 1.0 / n as f64))).unwrap();
        let nu = DiscreteMeasure::from_atoms(ys.iter().map(|&y| (y, 1.0 / n as f64))).unwrap();
        let cost: Vec<Vec<f64>> = xs.iter().map(|x| ys.iter().map(|y| (x - y).abs().powf(alpha) / n as f64).collect()).collect();
        prop_assert!(close(w_alpha_lp(&mu, &nu, alpha).unwrap(), min_matching_cost(&cost), 1e-10));
    }
}

fn distinct(v: &[f64]) -> bool {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s.windows(2).all(|w| w[1] > w[0])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn adding_a_constant_scales_the_eigendata(c in -2.0f64..2.0, slope in -0.5f64..0.5) {
        let pm = make_pomeau_manneville(1.0).unwrap();
        let m = 64;
        let phi = GridFunction::sample((0.0, 1.0), m, Interp::PiecewiseLinear, |x| slope * x).unwrap();
        let shifted = phi.map(|v| v + c).unwrap();
        let a = eigendata(&assemble(&pm, &phi, m, Basis::PiecewiseLinear).unwrap()).unwrap();
        let b = eigendata(&assemble(&pm, &shifted, m, Basis::PiecewiseLinear).unwrap()).unwrap();
        prop_assert!(close(b.lambda, c.exp() * a.lambda, 1e-9));
        for (x, y) in a.h.values().iter().zip(b.h.values()) {
            prop_assert!(close(*x, *y, 1e-8));
        }
        for (x, y) in a.nu.weights().iter().zip(b.nu.weights()) {
            prop_assert!((x - y).abs() <= 1e-9);
        }
    }
}
