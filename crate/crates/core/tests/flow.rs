use std::sync::Arc;

use onofri_lab::geometry::{Geometry, Normalization, ScalarField};
use onofri_lab::sphere::{dissipation_g, flow_evolve, lambda_star_quotient, FlowConfig};
use onofri_lab::Error;

fn sphere(n: usize) -> Arc<Geometry> {
    Arc::new(Geometry::sphere(n, Normalization::UnitRadius).unwrap())
}

#[test]
fn slope_matches_dissipation_below_threshold() {
    let g = sphere(24);
    let u0 = ScalarField::from_fn(&g, |t| 0.8 * t.cos() + 0.2 * (2.0 * t).cos()).unwrap();
    for lambda in [0.5, 1.0] {
        let tr = flow_evolve(lambda, &u0, 1.0, &FlowConfig::default()).unwrap();
        assert!(tr.duality_error() < 1e-3, "λ={lambda}: {}", tr.duality_error());
        assert!(tr.mass_drift() < 1e-10);
        assert!(tr.monotone(1e-10 * tr.f_values[0].abs()));
        assert!(tr.g_values.iter().all(|&v| v >= -1e-10));
    }
}

#[test]
fn above_threshold_run_completes() {
    // monotonicity may fail here; the run itself must not
    let g = sphere(24);
    let u0 = ScalarField::from_fn(&g, f64::cos).unwrap();
    let tr = flow_evolve(1.5, &u0, 1.0, &FlowConfig::default()).unwrap();
    assert!(tr.mass_drift() < 1e-10);
    assert!(tr.energy_defect() < 1e-5 * tr.f_values[0].abs().max(1.0));
}

#[test]
fn dissipation_nonnegative_under_quotient() {
    let g = sphere(32);
    let u0 = ScalarField::from_fn(&g, |t| 1.5 * t.cos() - 0.4 * (3.0 * t).cos()).unwrap();
    let tr = flow_evolve(1.0, &u0, 0.5, &FlowConfig::default()).unwrap();
    let end = &tr.final_field;
    for f in [&u0, end] {
        let q = lambda_star_quotient(&g, f).unwrap().value;
        for lambda in [0.25 * q, 0.5 * q, q] {
            assert!(dissipation_g(&g, lambda, f).unwrap() >= -1e-10, "λ={lambda}, q={q}");
        }
    }
}

#[test]
fn flow_rejects_bad_input() {
    let g = sphere(16);
    let u0 = ScalarField::from_fn(&g, f64::cos).unwrap();
    assert!(flow_evolve(-1.0, &u0, 1.0, &FlowConfig::default()).is_err());
    assert!(flow_evolve(1.0, &u0, 0.0, &FlowConfig::default()).is_err());
    let bad = FlowConfig { safety: 2.0, ..Default::default() };
    assert!(flow_evolve(1.0, &u0, 1.0, &bad).is_err());
    let c = Arc::new(Geometry::circle(16, 1.0).unwrap());
    let v = ScalarField::constant(&c, 0.0).unwrap();
    assert!(matches!(
        flow_evolve(1.0, &v, 1.0, &FlowConfig::default()),
        Err(Error::GeometryMismatch { .. } | Error::UnsupportedGeometry(_))
    ));
}
