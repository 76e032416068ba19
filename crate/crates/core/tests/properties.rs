//! Invariants checked on random inputs.

use dwinv_core::elliptic::assemble_mixed_laplacian;
use dwinv_core::fit::loglog_slope;
use dwinv_core::inverse::{
    make_admissible, reconstruct_b, reference_solution_u0, relative_l2_error,
};
use dwinv_core::measure::add_noise;
use dwinv_core::{
    besov_half_norm, eigen_decompose, solve_damped, solve_neumann_forced, vanishing_set_fraction,
    BoundaryTrace, CompatibilityPolicy, DampingField, DomainMesh, GridFunction, TimeGrid,
    WaveState,
};
use proptest::prelude::*;

fn line(n: usize) -> (DomainMesh, TimeGrid) {
    let mesh = DomainMesh::interval(n).unwrap();
    let tg = TimeGrid::for_mesh(&mesh, 1.0, 0.9).unwrap();
    (mesh, tg)
}

fn square(n: usize) -> (DomainMesh, TimeGrid) {
    let mesh = DomainMesh::rectangle(n, n).unwrap();
    let tg = TimeGrid::for_mesh(&mesh, 1.0, 0.6).unwrap();
    (mesh, tg)
}

fn random_state(mesh: &DomainMesh, coeffs: &[f64]) -> WaveState {
    let basis = eigen_decompose(mesh, coeffs.len()).unwrap();
    let mut u = GridFunction::zeros(mesh);
    for (k, c) in coeffs.iter().enumerate() {
        for (a, p) in u.values.iter_mut().zip(&basis.phi(k).values) {
            *a += c * p;
        }
    }
    WaveState::new(mesh, u, GridFunction::zeros(mesh)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn staggered_energy_never_grows(
        coeffs in prop::collection::vec(-1.0f64..1.0, 3),
        b in prop::collection::vec(0.0f64..2.0, 15),
    ) {
        // ½‖(uⁿ⁺¹ - uⁿ)/dt‖²_M + ½⟨K uⁿ⁺¹, uⁿ⟩ is what the scheme dissipates
        // exactly; the reported energy follows it up to O(dt²).
        let (mesh, tg) = square(16);
        let init = random_state(&mesh, &coeffs);
        let damping = DampingField::new(&mesh, b).unwrap();
        let traj = solve_damped(&mesh, &tg, &damping, &init).unwrap();
        let op = assemble_mixed_laplacian(&mesh);
        let dt = tg.dt();
        let staggered: Vec<f64> = traj
            .states()
            .windows(2)
            .map(|w| {
                let (a, b) = (&w[0].u.values, &w[1].u.values);
                let kinetic: f64 = a
                    .iter()
                    .zip(b)
                    .zip(op.mass())
                    .map(|((x, y), m)| m * ((y - x) / dt).powi(2))
                    .sum();
                let potential: f64 = op.stiffness_apply(b).iter().zip(a).map(|(k, x)| k * x).sum();
                0.5 * (kinetic + potential)
            })
            .collect();
        let e0 = staggered[0];
        prop_assert!(staggered.windows(2).all(|w| w[1] <= w[0] + 1e-12 * e0));
        if damping.is_zero() {
            prop_assert!(staggered.iter().all(|e| (e - e0).abs() <= 1e-10 * e0));
        }
    }

    #[test]
    fn forced_solver_is_linear(
        alpha in -3.0f64..3.0,
        beta in -3.0f64..3.0,
        f1 in 0.5f64..5.0,
        f2 in 0.5f64..5.0,
    ) {
        let (mesh, tg) = line(32);
        let rest = WaveState::zeros(&mesh);
        let g1 = BoundaryTrace::from_fn(&mesh, &tg, |t, _| (f1 * t).sin().powi(2));
        let g2 = BoundaryTrace::from_fn(&mesh, &tg, |t, _| (f2 * t).sin().powi(2));
        let mix = g1.scaled(alpha).add(&g2.scaled(beta));
        let solve = |g: &BoundaryTrace| {
            solve_neumann_forced(&mesh, &tg, g, &rest, CompatibilityPolicy::Enforce).unwrap()
        };
        let (a, b, c) = (solve(&g1), solve(&g2), solve(&mix));
        let scale = 1.0 + a.l2_q_norm(&mesh) * alpha.abs() + b.l2_q_norm(&mesh) * beta.abs();
        for n in 0..tg.sample_count() {
            for k in 0..mesh.node_count() {
                let want = alpha * a.state(n).u.values[k] + beta * b.state(n).u.values[k];
                prop_assert!((c.state(n).u.values[k] - want).abs() <= 1e-11 * scale);
            }
        }
    }

    #[test]
    fn besov_surrogate_is_a_seminorm(
        a in prop::collection::vec(-1.0f64..1.0, 31),
        b in prop::collection::vec(-1.0f64..1.0, 31),
        c in -5.0f64..5.0,
    ) {
        // The surrogate is defined on any Γ₁ values; signs are allowed here
        // through the absolute values of the spectrum.
        let mesh = DomainMesh::rectangle(32, 32).unwrap();
        let field = |v: &[f64]| DampingField::new(&mesh, v.iter().map(|x| x.abs()).collect()).unwrap();
        let fa = field(&a);
        let fb = field(&b);
        let sum: Vec<f64> = fa.values().iter().zip(fb.values()).map(|(x, y)| x + y).collect();
        let fs = DampingField::new(&mesh, sum).unwrap();
        let na = besov_half_norm(&fa, &mesh);
        let nb = besov_half_norm(&fb, &mesh);
        prop_assert!(besov_half_norm(&fs, &mesh) <= na + nb + 1e-12 * (na + nb));
        let scaled = besov_half_norm(&fa.scaled(c.abs()), &mesh);
        prop_assert!((scaled - c.abs() * na).abs() <= 1e-12 * (1.0 + scaled));
        // It dominates the L²(Γ₁) norm of the same values.
        let l2 = relative_l2_error(&fa, &DampingField::zeros(&mesh), &mesh);
        prop_assert!(na + 1e-12 >= l2);
    }

    #[test]
    fn reconstruction_is_exact_for_linear_data(
        b in prop::collection::vec(0.05f64..1.0, 15),
        rho in 1e-4f64..1.0,
    ) {
        // A gap of exactly -ρ b ∂_t u₀ is returned unchanged.
        let (mesh, tg) = square(16);
        let basis = eigen_decompose(&mesh, 1).unwrap();
        let init = make_admissible(&basis, 0, &mesh).unwrap();
        let u0 = reference_solution_u0(&init, &mesh, &tg);
        let truth = DampingField::new(&mesh, b).unwrap();
        let v = dwinv_core::measure::velocity_trace(&u0, &mesh);
        let gap = v.scale_nodes(truth.values()).scaled(-rho);
        let rec = reconstruct_b(&mesh, &tg, &gap, rho, &u0).unwrap();
        prop_assert!(relative_l2_error(&rec.estimate, &truth, &mesh) < 1e-10);
        prop_assert!(rec.clamped.iter().all(|&c| !c));
    }

    #[test]
    fn estimates_are_never_negative(
        level in 0.0f64..0.5,
        seed in any::<u64>(),
    ) {
        let (mesh, tg) = square(12);
        let basis = eigen_decompose(&mesh, 1).unwrap();
        let init = make_admissible(&basis, 0, &mesh).unwrap();
        let u0 = reference_solution_u0(&init, &mesh, &tg);
        let v = dwinv_core::measure::velocity_trace(&u0, &mesh);
        let noisy = add_noise(&v.scaled(-0.01), level, seed).unwrap();
        let rec = reconstruct_b(&mesh, &tg, &noisy, 0.01, &u0).unwrap();
        prop_assert!(rec.estimate.values().iter().all(|&x| x >= 0.0));
        for (raw, (est, clamped)) in rec.raw.iter().zip(rec.estimate.values().iter().zip(&rec.clamped)) {
            prop_assert_eq!(*clamped, *raw < 0.0);
            prop_assert_eq!(*est, raw.max(0.0));
        }
    }

    #[test]
    fn noise_is_a_function_of_the_seed(level in 0.0f64..1.0, seed in any::<u64>()) {
        let (mesh, tg) = line(16);
        let trace = BoundaryTrace::from_fn(&mesh, &tg, |t, _| t.cos());
        let a = add_noise(&trace, level, seed).unwrap();
        let b = add_noise(&trace, level, seed).unwrap();
        prop_assert_eq!(a.values(), b.values());
        let amp = level * trace.max_abs();
        for (x, y) in a.values().iter().zip(trace.values()) {
            prop_assert!((x - y).abs() <= amp);
        }
    }

    #[test]
    fn vanishing_fraction_is_a_fraction(k in 0usize..12, eps in 1e-6f64..0.5) {
        let mesh = DomainMesh::rectangle(24, 31).unwrap();
        let basis = eigen_decompose(&mesh, 12).unwrap();
        let set = vanishing_set_fraction(basis.phi(k), &mesh, eps).unwrap();
        prop_assert!((0.0..=1.0).contains(&set.fraction));
    }

    #[test]
    fn slope_fit_recovers_power_laws(p in -3.0f64..3.0, c in 1e-3f64..1e3) {
        let x: Vec<f64> = (0..6).map(|i| 0.5f64.powi(i)).collect();
        let y: Vec<f64> = x.iter().map(|v| c * v.powf(p)).collect();
        prop_assert!((loglog_slope(&x, &y) - p).abs() < 1e-9);
    }
}
