use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use proptest::prelude::*;

use onofri_lab::circle::mto_deficit_circle;
use onofri_lab::constants::{self, abc_coefficients, discriminant, fontenas_gap, theta0};
use onofri_lab::euclidean::{capital_lambda_quotient, lambda_star_weight, onofri_deficit_weighted, Weight};
use onofri_lab::geometry::{Geometry, Normalization, ScalarField};
use onofri_lab::sphere::{functional_f, lambda_star_quotient, mass_rate_terms};

fn circle() -> &'static Arc<Geometry> {
    static G: OnceLock<Arc<Geometry>> = OnceLock::new();
    G.get_or_init(|| Arc::new(Geometry::circle(64, 1.0).unwrap()))
}

fn sphere() -> &'static Arc<Geometry> {
    static G: OnceLock<Arc<Geometry>> = OnceLock::new();
    G.get_or_init(|| Arc::new(Geometry::sphere(48, Normalization::UnitRadius).unwrap()))
}

fn plane() -> &'static Arc<Geometry> {
    static G: OnceLock<Arc<Geometry>> = OnceLock::new();
    G.get_or_init(|| Arc::new(Geometry::plane(128, 20.0).unwrap()))
}

/// Trigonometric polynomial with a few modes.
fn circle_field(c: &[f64]) -> ScalarField {
    ScalarField::from_fn(circle(), |x| {
        c.iter()
            .enumerate()
            .map(|(k, a)| a * (2.0 * PI * (k / 2 + 1) as f64 * x + if k % 2 == 0 { 0.0 } else { 0.5 * PI }).cos())
            .sum()
    })
    .unwrap()
}

/// Σ c_l cos(lθ): zonal and smooth at the poles.
fn zonal_field(c: &[f64]) -> ScalarField {
    ScalarField::from_fn(sphere(), |t| c.iter().enumerate().map(|(l, a)| a * ((l + 1) as f64 * t).cos()).sum())
        .unwrap()
}

/// Σ c_k (1+r²)^{-k}: smooth radial field with a limit at infinity.
fn radial_field(c: &[f64]) -> ScalarField {
    ScalarField::from_fn(plane(), |r| {
        let q = 1.0 / (1.0 + r * r);
        c.iter().enumerate().map(|(k, a)| a * q.powi(k as i32 + 1)).sum()
    })
    .unwrap()
}

fn coeffs(n: usize, amp: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-amp..amp, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn theta0_matches_exact(num in 2i64..60, den in 1i64..10) {
        let d = num as f64 / den as f64;
        prop_assume!((1.0..6.0).contains(&d));
        let exact = constants::exact::theta0(constants::exact::parse(&format!("{num}/{den}")).unwrap()).unwrap();
        let float = theta0(d).unwrap();
        prop_assert!((exact - float).abs() <= 1e-14 * exact.abs().max(1.0));
    }

    #[test]
    fn discriminant_sign_tracks_factor(d in 1.01f64..5.99, theta in 0.0f64..=1.0) {
        let disc = discriminant(d, theta).unwrap();
        prop_assert!(disc.signs_agree, "{disc:?}");
        let t0 = theta0(d).unwrap();
        if theta < t0 - 1e-9 {
            prop_assert_eq!(disc.sign, 1);
        } else if theta > t0 + 1e-9 {
            prop_assert_eq!(disc.sign, -1);
        }
    }

    #[test]
    fn abc_square_ratio_is_finite(d in 1.01f64..5.99, theta in 0.0f64..=1.0) {
        let abc = abc_coefficients(d, theta).unwrap();
        prop_assert!(abc.square_ratio().is_finite());
    }

    #[test]
    fn fontenas_gap_nonnegative(d in 1.0f64..=2.0, x in 0.0f64..=1.0) {
        prop_assume!(d > 1.0);
        prop_assert!(fontenas_gap(d, x).unwrap() >= -1e-15);
    }

    #[test]
    fn circle_deficit_shift_invariant(c in coeffs(4, 1.0), shift in -5.0f64..5.0, lambda in 0.5f64..19.0) {
        let u = circle_field(&c);
        let a = mto_deficit_circle(&u, lambda).unwrap();
        let b = mto_deficit_circle(&u.shifted(shift).unwrap(), lambda).unwrap();
        prop_assert!((a - b).abs() <= 1e-11 * (1.0 + a.abs()));
    }

    #[test]
    fn circle_deficit_nonnegative_below_threshold(c in coeffs(4, 1.0), lambda in 0.1f64..(2.0 * PI * PI)) {
        prop_assert!(mto_deficit_circle(&circle_field(&c), lambda).unwrap() >= -1e-10);
    }

    #[test]
    fn sphere_functional_shift_invariant(c in coeffs(3, 1.0), shift in -5.0f64..5.0) {
        let u = zonal_field(&c);
        let a = functional_f(sphere(), 1.0, &u).unwrap();
        let b = functional_f(sphere(), 1.0, &u.shifted(shift).unwrap()).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
        prop_assert!(a >= -1e-10);
    }

    #[test]
    fn sphere_quotient_at_least_one(c in coeffs(4, 1.5)) {
        prop_assume!(c.iter().any(|v| v.abs() > 1e-3));
        let q = lambda_star_quotient(sphere(), &zonal_field(&c)).unwrap();
        prop_assert!(q.value >= 0.99, "{}", q.value);
    }

    #[test]
    fn mass_rate_halves_cancel(c in coeffs(3, 1.0)) {
        let (a, b) = mass_rate_terms(&zonal_field(&c)).unwrap();
        prop_assert!((a + b).abs() <= 1e-9 * (1.0 + a.abs()));
    }

    #[test]
    fn weighted_deficit_shift_invariant(c in coeffs(3, 2.0), shift in -5.0f64..5.0) {
        let w = Weight::stereographic(plane());
        let u = radial_field(&c);
        let a = onofri_deficit_weighted(&w, &u, 1.0).unwrap();
        let b = onofri_deficit_weighted(&w, &u.shifted(shift).unwrap(), 1.0).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
    }

    #[test]
    fn capital_lambda_above_threshold(c in coeffs(3, 2.0), spec in prop::sample::select(vec!["stereographic", "gaussian:1", "perturbed:0.05"])) {
        prop_assume!(c.iter().any(|v| v.abs() > 1e-2));
        let w = Weight::new(spec.parse().unwrap(), plane()).unwrap();
        let star = lambda_star_weight(&w).value;
        let cap = capital_lambda_quotient(&w, &radial_field(&c)).unwrap();
        prop_assert!(cap.value - star >= -1e-10, "{spec}: {} < {star}", cap.value);
    }

    #[test]
    fn field_csv_round_trip(c in coeffs(3, 3.0)) {
        let u = zonal_field(&c);
        let mut buf = Vec::new();
        u.write_csv(&mut buf).unwrap();
        let back = ScalarField::read_csv(&buf[..]).unwrap();
        prop_assert_eq!(back.values(), u.values());
        prop_assert_eq!(back.geometry().resolution(), u.geometry().resolution());
    }
}
