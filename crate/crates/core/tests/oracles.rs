//! Leapfrog solutions against the two spectral routes.

use dwinv_core::fit::observed_order;
use dwinv_core::measure::velocity_trace;
use dwinv_core::wave::duhamel_boundary_solve;
use dwinv_core::{
    duhamel_spectral_solve, eigen_decompose, solve_damped, solve_neumann_forced, BoundaryTrace,
    CompatibilityPolicy, DampingField, DomainMesh, GridFunction, TimeGrid, WaveState,
};

fn line(n: usize) -> (DomainMesh, TimeGrid) {
    let mesh = DomainMesh::interval(n).unwrap();
    let tg = TimeGrid::for_mesh(&mesh, 2.0, 0.9).unwrap();
    (mesh, tg)
}

fn bump(mesh: &DomainMesh) -> GridFunction {
    GridFunction::from_fn(mesh, |x, _| (-((x - 0.5) / 0.1).powi(2)).exp())
}

/// `sin⁴(3t)` vanishes to fourth order at `t = 0`, so it is compatible with
/// starting from rest.
fn smooth_flux(t: f64) -> f64 {
    (3.0 * t).sin().powi(4)
}

#[test]
fn both_spectral_routes_converge_together() {
    let sizes = [32usize, 64, 128];
    let mut gaps = Vec::new();
    for &n in &sizes {
        let (mesh, tg) = line(n);
        let basis = eigen_decompose(&mesh, n).unwrap();
        let g = BoundaryTrace::from_fn(&mesh, &tg, |t, _| smooth_flux(t));
        let rest = WaveState::zeros(&mesh);
        let lifted = duhamel_spectral_solve(&basis, &tg, &g, &rest, &mesh).unwrap();
        let direct = duhamel_boundary_solve(&basis, &tg, &g, &rest, &mesh).unwrap();
        gaps.push(lifted.max_l2_gap(&direct, &mesh));
    }
    let hs: Vec<f64> = sizes.iter().map(|&n| 1.0 / n as f64).collect();
    assert!(observed_order(&hs, &gaps) > 1.8, "{gaps:?}");
}

#[test]
fn boundary_route_reproduces_the_forced_leapfrog() {
    let mut gaps = Vec::new();
    let sizes = [32usize, 64, 128];
    for &n in &sizes {
        let (mesh, tg) = line(n);
        let basis = eigen_decompose(&mesh, n).unwrap();
        let g = BoundaryTrace::from_fn(&mesh, &tg, |t, _| smooth_flux(t));
        let rest = WaveState::zeros(&mesh);
        let fd = solve_neumann_forced(&mesh, &tg, &g, &rest, CompatibilityPolicy::Enforce).unwrap();
        let sp = duhamel_boundary_solve(&basis, &tg, &g, &rest, &mesh).unwrap();
        gaps.push(fd.max_l2_gap(&sp, &mesh));
    }
    let hs: Vec<f64> = sizes.iter().map(|&n| 1.0 / n as f64).collect();
    assert!(observed_order(&hs, &gaps) > 1.8, "{gaps:?}");
}

fn damped_gap(n: usize, init: impl Fn(&DomainMesh) -> GridFunction) -> f64 {
    let (mesh, tg) = line(n);
    let basis = eigen_decompose(&mesh, n).unwrap();
    let state = WaveState::new(&mesh, init(&mesh), GridFunction::zeros(&mesh)).unwrap();
    let b = DampingField::constant(&mesh, 0.5).unwrap();
    let fd = solve_damped(&mesh, &tg, &b, &state).unwrap();
    let flux = velocity_trace(&fd, &mesh)
        .scale_nodes(b.values())
        .scaled(-1.0);
    let sp = duhamel_boundary_solve(&basis, &tg, &flux, &state, &mesh).unwrap();
    fd.max_l2_gap(&sp, &mesh)
}

#[test]
fn damped_leapfrog_converges_to_the_boundary_route() {
    let sizes = [32usize, 64, 128];
    let hs: Vec<f64> = sizes.iter().map(|&n| 1.0 / n as f64).collect();

    // The bump satisfies the compatibility conditions to all orders that
    // matter here, so the scheme keeps its second order.
    let smooth: Vec<f64> = sizes.iter().map(|&n| damped_gap(n, bump)).collect();
    assert!(observed_order(&hs, &smooth) > 1.8, "{smooth:?}");

    // (φ₀, 0) violates the second condition: ∂ν u_t = 0 but -b u_tt ≠ 0 at
    // the damped end. The flux has a kink at t = 0 and the order drops, yet
    // the scheme still converges.
    let mode = |mesh: &DomainMesh| eigen_decompose(mesh, 1).unwrap().phi(0).clone();
    let rough: Vec<f64> = sizes.iter().map(|&n| damped_gap(n, mode)).collect();
    assert!(rough.windows(2).all(|w| w[1] < w[0]), "{rough:?}");
    assert!(observed_order(&hs, &rough) > 1.0, "{rough:?}");
}

#[test]
fn lifting_route_rejects_a_truncated_basis_for_rough_data() {
    let (mesh, tg) = line(64);
    let basis = eigen_decompose(&mesh, 3).unwrap();
    let init = WaveState::new(&mesh, bump(&mesh), GridFunction::zeros(&mesh)).unwrap();
    let zero = BoundaryTrace::zeros(&mesh, &tg);
    let err = duhamel_spectral_solve(&basis, &tg, &zero, &init, &mesh).unwrap_err();
    assert!(
        matches!(err, dwinv_core::Error::InsufficientBasis { .. }),
        "{err}"
    );
    let err = duhamel_boundary_solve(&basis, &tg, &zero, &init, &mesh).unwrap_err();
    assert!(
        matches!(err, dwinv_core::Error::InsufficientBasis { .. }),
        "{err}"
    );
}

fn rectangle_gap(n: usize) -> f64 {
    let mesh = DomainMesh::rectangle(n, n).unwrap();
    let tg = TimeGrid::for_mesh(&mesh, 1.0, 0.6).unwrap();
    let basis = eigen_decompose(&mesh, mesh.dofs().len()).unwrap();
    let pi = std::f64::consts::PI;
    let u0 = GridFunction::from_fn(&mesh, |x, y| {
        (pi * y).sin() * (-((x - 0.5) / 0.15).powi(2)).exp()
    });
    let state = WaveState::new(&mesh, u0, GridFunction::zeros(&mesh)).unwrap();
    let b = DampingField::from_fn(&mesh, |y| 0.3 + 0.2 * (pi * y).sin());
    let fd = solve_damped(&mesh, &tg, &b, &state).unwrap();
    let flux = velocity_trace(&fd, &mesh)
        .scale_nodes(b.values())
        .scaled(-1.0);
    let sp = duhamel_boundary_solve(&basis, &tg, &flux, &state, &mesh).unwrap();
    fd.max_l2_gap(&sp, &mesh)
}

#[test]
fn rectangle_damped_solution_converges_to_the_boundary_route() {
    let sizes = [16usize, 32, 64];
    let gaps: Vec<f64> = sizes.iter().map(|&n| rectangle_gap(n)).collect();
    let hs: Vec<f64> = sizes.iter().map(|&n| 1.0 / n as f64).collect();
    assert!(observed_order(&hs, &gaps) > 1.8, "{gaps:?}");
}
