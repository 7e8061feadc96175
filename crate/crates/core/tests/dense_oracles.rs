//! Matrix-free solvers against dense assemblies built from the mask flags.

mod common;

#[test]
fn divergence_lift_matches_dense_kkt() {
    let dev = common::lift_oracle_deviation();
    assert!(dev <= 1e-6, "relative deviation {dev:e}");
}

#[test]
fn smallest_eigenvalue_matches_dense_solver() {
    let dev = common::eigen_oracle_deviation();
    assert!(dev <= 1e-6, "relative deviation {dev:e}");
}
