use hermite_hadamard::bounds::{kernel_moments_closed, HolderParams};
use hermite_hadamard::oracle::{integrate, kernel_moment_numeric, Interval, Side, Weight};
use proptest::prelude::*;

fn side_and_shift() -> impl Strategy<Value = (Side, f64)> {
    prop_oneof![
        (0.0..=0.5f64).prop_map(|s| (Side::Left, s)),
        (0.5..=1.0f64).prop_map(|s| (Side::Right, s)),
    ]
}

fn holder() -> impl Strategy<Value = (f64, f64)> {
    (1.01..6.0f64, 0.001..=1.0f64).prop_map(|(q, frac)| (frac * q, q))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn polynomials_within_the_gauss_degree_are_exact(
        coeffs in prop::collection::vec(-3.0..3.0f64, 1..=14),
        a in -2.0..2.0f64,
        width in 0.01..3.0f64,
    ) {
        let b = a + width;
        let poly = |x: f64| coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c);
        let anti = |x: f64| {
            coeffs
                .iter()
                .enumerate()
                .rev()
                .fold(0.0, |acc, (k, c)| acc * x + c / (k as f64 + 1.0))
                * x
        };
        let exact = anti(b) - anti(a);
        let scale: f64 = coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c.abs() * a.abs().max(b.abs()).powi(k as i32))
            .sum::<f64>()
            * width;
        let r = integrate(poly, Interval::new(a, b).unwrap(), 1e-13).unwrap();
        prop_assert!((r.value - exact).abs() <= 1e-13 * scale.max(f64::MIN_POSITIVE), "{} vs {}", r.value, exact);
    }

    #[test]
    fn split_kernel_integral_matches_panels((side, shift) in side_and_shift(), e in 0.0..4.0f64) {
        let (lo, hi) = side.range();
        let exact = ((shift - lo).powf(e + 1.0) + (hi - shift).powf(e + 1.0)) / (e + 1.0);
        let numeric = kernel_moment_numeric(side, shift, e, Weight::One).unwrap();
        prop_assert!((numeric - exact).abs() <= 1e-12, "{numeric} vs {exact}");
    }

    #[test]
    fn closed_moments_match_quadrature((side, shift) in side_and_shift(), (p, q) in holder()) {
        let hp = HolderParams::new(p, q).unwrap();
        let closed = kernel_moments_closed(shift, side, hp).unwrap();
        let h = kernel_moment_numeric(side, shift, hp.kernel_exponent(), Weight::One).unwrap();
        let wa = kernel_moment_numeric(side, shift, p, Weight::T).unwrap();
        let wb = kernel_moment_numeric(side, shift, p, Weight::OneMinusT).unwrap();
        prop_assert!((closed.hoelder_factor - h).abs() <= 1e-10, "hoelder {} vs {}", closed.hoelder_factor, h);
        prop_assert!((closed.weight_a - wa).abs() <= 1e-10, "t-weight {} vs {}", closed.weight_a, wa);
        prop_assert!((closed.weight_b - wb).abs() <= 1e-10, "(1-t)-weight {} vs {}", closed.weight_b, wb);
    }
}
