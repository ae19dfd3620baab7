use proptest::prelude::*;

use tds_mid::dde_sim::simulate;
use tds_mid::mid_design::{f_omega, mid_coefficients, normalize, normalized_mid};
use tds_mid::rootfinder::{count_zeros, ComplexRectangle, RootFinder};
use tds_mid::{Complex64, Quasipolynomial};

fn coeff() -> impl Strategy<Value = f64> {
    prop_oneof![-3.0..-0.05, 0.05..3.0]
}

/// `s + b0 + b1 e^{-τ1 s} + b2 e^{-τ2 s}`.
fn two_delay() -> impl Strategy<Value = Quasipolynomial> {
    (coeff(), coeff(), coeff(), 0.5..3.0f64, 0.1..0.9f64).prop_map(|(b0, b1, b2, tau2, ratio)| {
        Quasipolynomial::from_two_delay(b0, b1, b2, ratio * tau2, tau2).unwrap()
    })
}

/// Up to three terms with polynomial parts of degree up to 2.
fn general() -> impl Strategy<Value = Quasipolynomial> {
    prop::collection::vec(
        (0.0..3.0f64, prop::collection::vec(-2.0..2.0f64, 1..=3)),
        1..=3,
    )
    .prop_filter_map("nonzero", |terms| Quasipolynomial::new(terms).ok())
}

fn point(r: f64) -> impl Strategy<Value = Complex64> {
    (-r..r, -r..r).prop_map(|(a, b)| Complex64::new(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn derivative_matches_central_difference(q in general(), s in point(3.0)) {
        let h = 1e-5;
        let fd = (q.eval(s + h) - q.eval(s - h)) / (2.0 * h);
        let d = q.derivative(1).eval(s);
        prop_assume!(d.norm() > 0.0);
        prop_assert!((fd - d).norm() <= 1e-6 * d.norm(), "fd {fd} vs {d}");
        prop_assert!((q.eval_derivative(s) - d).norm() <= 1e-12 * (1.0 + d.norm()));
    }

    #[test]
    fn two_delay_degree_is_three(q in two_delay()) {
        prop_assert_eq!(q.degree(), 3);
    }

    #[test]
    fn f_omega_is_even(w in 1e-3..500.0f64) {
        prop_assert_eq!(f_omega(-w).unwrap(), f_omega(w).unwrap());
    }

    #[test]
    fn f_omega_tail_estimate(w in 2.0 * std::f64::consts::PI..1e4) {
        prop_assert!(f_omega(w).unwrap() <= w * w / ((w - 1.0) * (w - 1.0)));
    }

    #[test]
    fn normalization_recovers_the_mid_coefficients(tau2 in 0.1..10.0f64, ratio in 0.05..0.95f64, s0 in -2.0..2.0f64) {
        let d = mid_coefficients(ratio * tau2, tau2, s0).unwrap();
        let n = normalize(&d.characteristic(), s0, tau2).unwrap();
        let (b0, b1, b2) = normalized_mid(d.lambda).unwrap();
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs().max(1.0);
        prop_assert!(close(n.term(0.0).unwrap().coeffs[0], b0));
        prop_assert!(close(n.term(0.0).unwrap().coeffs[1], 1.0));
        prop_assert!(close(n.term(d.lambda).unwrap().coeffs[0], b1));
        prop_assert!(close(n.term(1.0).unwrap().coeffs[0], b2));
    }

    #[test]
    fn simulation_is_homogeneous(a0 in -2.0..1.0f64, ratio in 0.1..0.9f64, c in -2.0..2.0f64) {
        let h = |t: f64| 1.0 + c * t;
        let one = simulate(a0, 0.7, -0.2, 2.0 * ratio, 2.0, h, 10.0, 0.05).unwrap();
        let two = simulate(a0, 0.7, -0.2, 2.0 * ratio, 2.0, |t| 2.0 * h(t), 10.0, 0.05).unwrap();
        for (a, b) in one.y.iter().zip(&two.y) {
            prop_assert!((b - 2.0 * a).abs() <= 1e-12 * (2.0 * a).abs().max(f64::MIN_POSITIVE));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn modulus_bound_is_sound(q in two_delay(), sigma in -1.0..1.0f64) {
        let b = q.root_modulus_bound(sigma).unwrap();
        let rect = ComplexRectangle::new(sigma, sigma.max(0.0) + b + 2.0, -b - 2.0, b + 2.0).unwrap();
        let search = RootFinder::default().find(&q, rect);
        prop_assume!(search.is_ok());
        for r in search.unwrap().roots {
            if r.location.re >= sigma {
                prop_assert!(r.location.norm() <= b, "root {} beyond bound {b}", r.location);
            }
        }
    }

    #[test]
    fn roots_respect_degree_conjugation_and_count(q in two_delay()) {
        let rect = ComplexRectangle::new(-4.0, 4.0, -15.0, 15.0).unwrap();
        let finder = RootFinder::default();
        let search = finder.find(&q, rect);
        prop_assume!(search.is_ok());
        let search = search.unwrap();
        let total: usize = search.roots.iter().map(|r| r.multiplicity).sum();
        prop_assert_eq!(total, search.count);
        prop_assert_eq!(count_zeros(&q, search.rect).unwrap(), search.count);
        for r in &search.roots {
            prop_assert!(r.multiplicity <= q.degree());
            let conj = r.location.conj();
            if r.location.im.abs() > 1e-6 {
                prop_assert!(
                    search.roots.iter().any(|o| (o.location - conj).norm() <= 1e-9),
                    "no conjugate for {}", r.location
                );
            }
        }
        // deterministic output
        prop_assert_eq!(finder.find(&q, rect).unwrap(), search);
    }

    #[test]
    fn counts_add_across_a_split(q in two_delay(), cut in 0.05..0.95f64) {
        let rect = ComplexRectangle::new(-3.0, 2.0, -12.0, 12.0).unwrap();
        let x = rect.re_min + cut * rect.width();
        let left = ComplexRectangle::new(rect.re_min, x, rect.im_min, rect.im_max).unwrap();
        let right = ComplexRectangle::new(x, rect.re_max, rect.im_min, rect.im_max).unwrap();
        let (whole, l, r) = (count_zeros(&q, rect), count_zeros(&q, left), count_zeros(&q, right));
        prop_assume!(whole.is_ok() && l.is_ok() && r.is_ok());
        prop_assert_eq!(whole.unwrap(), l.unwrap() + r.unwrap());
    }
}
