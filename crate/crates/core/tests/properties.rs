use proptest::prelude::*;

use fraccomp_core::caputo::{caputo_derivative, CaputoOrder, SampledFn};
use fraccomp_core::montecarlo::{pre_limit_chain, ChainParams, Jumps};
use fraccomp_core::solver::{solve_direct, SolverConfig, SpaceSymbol, TimeProblemSpec};
use fraccomp_core::specfun::{mittag_leffler, MlParams};
use fraccomp_core::subordinator::{inverse_value, kernel_moment, subordinator_value, KernelKind, OrderVector};

fn orders() -> impl Strategy<Value = OrderVector> {
    prop::collection::vec((0.2f64..2.0, 0.15f64..0.95), 1..=3).prop_map(|p| OrderVector::new(p).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn caputo_derivative_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, alpha in 0.1f64..1.9, k in 51usize..=256) {
        let n = 256;
        let t = k as f64 / n as f64;
        let f = |s: f64| (-s).exp();
        let g = |s: f64| s * s + s.sin();
        let ord = CaputoOrder::new(alpha).unwrap();
        let mix = SampledFn::from_fn(|s| a * f(s) + b * g(s), 1.0, n).unwrap();
        let df = caputo_derivative(&SampledFn::from_fn(f, 1.0, n).unwrap(), ord, t).unwrap();
        let dg = caputo_derivative(&SampledFn::from_fn(g, 1.0, n).unwrap(), ord, t).unwrap();
        let dm = caputo_derivative(&mix, ord, t).unwrap();
        prop_assert!((dm - a * df - b * dg).abs() <= 1e-11 * (1.0 + df.abs() + dg.abs()) * (1.0 + a.abs() + b.abs()));
    }

    #[test]
    fn mittag_leffler_is_decreasing_on_the_negative_axis(alpha in 0.05f64..1.0, x in 0.0f64..30.0, dx in 0.01f64..5.0) {
        let p = MlParams::new(alpha, 1.0).unwrap();
        let (a, b) = (mittag_leffler(p, -x).unwrap(), mittag_leffler(p, -x - dx).unwrap());
        prop_assert!(b < a && b > 0.0, "E({}) = {a}, E({}) = {b}", -x, -x - dx);
    }

    #[test]
    fn subordinator_scaling(nu in 0.2f64..0.95, c in 0.25f64..4.0, x in 0.05f64..4.0) {
        let ov = OrderVector::single(nu).unwrap();
        let lhs = subordinator_value(&ov, 1.0, x).unwrap();
        let s = c.powf(-1.0 / nu);
        let rhs = s * subordinator_value(&ov, 1.0 / c, x * s).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-8 * (1.0 + lhs.abs()));
    }

    #[test]
    fn inverse_kernel_is_a_nonnegative_probability_density(ov in orders(), t in 0.3f64..3.0, x in 0.0f64..4.0) {
        prop_assert!(inverse_value(&ov, t, x).unwrap() >= -1e-12);
        let (mass, err) = kernel_moment(&ov, KernelKind::Inverse, t, 0).unwrap();
        prop_assert!((mass - 1.0).abs() <= 1e-6 + err, "mass {mass}");
    }

    #[test]
    fn chain_is_a_decreasing_laplace_transform(
        nu in 0.4f64..2.5,
        beta_frac in 0.1f64..0.9,
        mu in 0.1f64..3.0,
        dmu in 0.05f64..1.0,
        delta in 1e-3f64..0.2,
    ) {
        let beta = beta_frac * nu;
        let p = ChainParams { lambda: 1.0, t: 1.0, nu, beta, alpha: beta, jumps: Jumps::Pareto };
        let a = pre_limit_chain(&p, mu, delta).unwrap();
        let b = pre_limit_chain(&p, mu + dmu, delta).unwrap();
        prop_assert!((0.0..=1.0).contains(&a) && b <= a + 1e-12, "{a} then {b}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn symmetric_symbols_give_even_solutions(nu in 0.2f64..0.95, beta in 0.3f64..1.0, t in 0.3f64..2.0) {
        let sym = SpaceSymbol::frac_laplacian_sum(vec![(1.0, beta)], 1).unwrap();
        let cfg = SolverConfig::line(512, 40.0).unwrap().with_window(4.0);
        let u = solve_direct(&sym, &TimeProblemSpec::delta(OrderVector::single(nu).unwrap()), &[t], &cfg).unwrap();
        let xs = u.xs();
        let row = u.values.row(0);
        for (i, &x) in xs.iter().enumerate() {
            if let Some(j) = xs.iter().position(|&y| (x + y).abs() < 1e-9) {
                prop_assert!((row[i] - row[j]).abs() <= 1e-12 * (1.0 + row[i].abs()), "x = {x}");
            }
        }
    }
}
