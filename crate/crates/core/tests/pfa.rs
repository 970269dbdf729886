mod common;

use casimir_core::constants::ideal_energy;
use casimir_core::pfa::{pfa_force, pfa_force_with_threshold, SpherePlate};
use casimir_core::*;
use common::*;
use std::f64::consts::PI;

fn quad() -> QuadratureConfig {
    QuadratureConfig::default()
}

#[test]
fn conductor_sphere() {
    let pc = MaterialResponse::perfect_conductor();
    let f = pfa_force(SpherePlate::new(1e-4, 1e-6).unwrap(), &pc, &pc, &quad()).unwrap();
    let expected = 2.0 * PI * 1e-4 * ideal_energy(1e-6);
    assert!(rel(f.force, expected) <= 1e-6);
    assert!((f.force - -2.723e-13).abs() < 1e-16);
    assert_eq!(f.a_over_r, 1e-6 / 1e-4);
    assert!(f.warnings.is_empty());
}

#[test]
fn boyer_sphere_repels() {
    let f = pfa_force(
        SpherePlate::new(1e-4, 1e-6).unwrap(),
        &MaterialResponse::perfect_conductor(),
        &MaterialResponse::infinitely_permeable(),
        &quad(),
    )
    .unwrap();
    assert!((f.force - 2.382e-13).abs() < 1e-16, "{:e}", f.force);
}

#[test]
fn vacuum_plate_is_force_free() {
    let f = pfa_force(SpherePlate::new(1e-4, 1e-6).unwrap(), &gold_drude(), &MaterialResponse::vacuum(), &quad()).unwrap();
    assert_eq!(f.force, 0.0);
}

#[test]
fn linear_in_radius_and_sign_inherited() {
    for (m1, m2) in [
        (gold_drude(), lorentz_dielectric()),
        (MaterialResponse::constant(100.0, 1.0).unwrap(), MaterialResponse::constant(1.01, 100.0).unwrap()),
    ] {
        let f1 = pfa_force(SpherePlate::new(5e-5, 3e-7).unwrap(), &m1, &m2, &quad()).unwrap();
        let f2 = pfa_force(SpherePlate::new(1e-4, 3e-7).unwrap(), &m1, &m2, &quad()).unwrap();
        assert_eq!(f2.force, 2.0 * f1.force);
        let e = energy_per_area(&GapConfig::new(3e-7, m1, m2).unwrap(), &quad()).unwrap();
        assert_eq!(f1.force.signum(), e.value.signum());
    }
}

#[test]
fn validity_warning() {
    let pc = MaterialResponse::perfect_conductor();
    let f = pfa_force(SpherePlate::new(5e-6, 1e-6).unwrap(), &pc, &pc, &quad()).unwrap();
    assert!(f.warnings.iter().any(|w| w.contains("a/R")));
    let g = pfa_force_with_threshold(SpherePlate::new(5e-6, 1e-6).unwrap(), &pc, &pc, &quad(), 0.5).unwrap();
    assert!(g.warnings.is_empty());
}
