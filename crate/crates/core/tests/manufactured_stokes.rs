//! Discrete consistency of the MAC Stokes solver.

mod common;

#[test]
fn periodic_velocity_converges_at_second_order() {
    let order = common::manufactured_order();
    assert!((order - 2.0).abs() <= 0.2, "order {order}");
}

#[test]
fn gradient_is_adjoint_of_divergence() {
    let d = common::duality_defect();
    assert!(d <= 1e-12, "{d:e}");
}

#[test]
fn energy_identity_holds() {
    let d = common::energy_identity_defect();
    assert!(d <= 1e-6, "{d:e}");
}
