//! The acceptance checklist, shared by `dwinv verify` and the test suite.
//!
//! Criteria 1 to 9 run here. Criterion 10 (byte-identical reruns of the
//! binary) lives with the CLI.

use std::f64::consts::PI;
use std::time::Instant;

use serde::Serialize;

use crate::domain::{DomainMesh, GridFunction, TimeGrid};
use crate::elliptic::{eigen_decompose, vanishing_set_fraction, EigenBasis, VANISHING_EPS};
use crate::error::Result;
use crate::fit::loglog_slope;
use crate::inverse::{
    default_rho_grid, make_admissible, noise_floor, reconstruct_b, reference_solution_u0,
    relative_l2_error, stability_sweep, uniqueness_experiment, StabilityReport,
    ADMISSIBLE_FRACTION,
};
use crate::measure::{add_noise, neumann_trace, BoundaryTrace};
use crate::wave::{
    dissipation_identity_residual, duhamel_spectral_solve, solve_damped, solve_neumann_forced,
    CompatibilityPolicy, DampingField, WaveState,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Full,
    Quick,
}

/// Grids and tolerances for one profile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tolerances {
    pub eigen_sizes: [usize; 3],
    pub eigen_rel_error: f64,
    pub forward_n: usize,
    pub energy_drift: f64,
    pub refine_sizes: [usize; 3],
    pub min_order: f64,
    pub oracle_gap: f64,
    pub sweep_n: usize,
    pub kappa_rel_error: f64,
    pub reconstruct_rel_error: f64,
    pub rect_n: usize,
    pub rect_rel_error: f64,
    pub runtime_eigen_s: f64,
    pub runtime_forward_s: f64,
}

impl Tolerances {
    pub fn for_profile(profile: Profile) -> Self {
        match profile {
            Profile::Full => Self {
                eigen_sizes: [64, 128, 256],
                eigen_rel_error: 1e-3,
                forward_n: 256,
                energy_drift: 1e-4,
                refine_sizes: [64, 128, 256],
                min_order: 1.8,
                oracle_gap: 1e-3,
                sweep_n: 256,
                kappa_rel_error: 0.02,
                reconstruct_rel_error: 0.05,
                rect_n: 64,
                // Frozen from the 128 × 128 calibration run, see CALIBRATION.md.
                rect_rel_error: RECT_REL_ERROR_64,
                runtime_eigen_s: 5.0,
                runtime_forward_s: 30.0,
            },
            Profile::Quick => Self {
                eigen_sizes: [32, 64, 128],
                eigen_rel_error: 2e-3,
                forward_n: 64,
                energy_drift: QUICK_ENERGY_DRIFT,
                refine_sizes: [32, 64, 128],
                min_order: 1.8,
                oracle_gap: 4e-3,
                sweep_n: 128,
                kappa_rel_error: 0.02,
                reconstruct_rel_error: 0.05,
                rect_n: 32,
                rect_rel_error: RECT_REL_ERROR_32,
                runtime_eigen_s: 5.0,
                runtime_forward_s: 30.0,
            },
        }
    }
}

/// 2-D reconstruction thresholds at 64² and 32² nodes (see CALIBRATION.md).
pub const RECT_REL_ERROR_64: f64 = 0.01;
pub const RECT_REL_ERROR_32: f64 = 0.015;
pub const QUICK_ENERGY_DRIFT: f64 = 1e-3;

/// Damping used by the two-dimensional reconstruction.
pub fn rect_profile(y: f64) -> f64 {
    0.3 + 0.2 * (PI * y).sin()
}

/// Inputs that a run configuration may override.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Settings {
    pub profile: Profile,
    /// Courant factor for the interval runs.
    pub cfl: f64,
    /// Courant factor for the rectangle runs; must stay below `1/√2`.
    pub cfl_rect: f64,
    pub tau: f64,
    pub b: f64,
    pub rho: f64,
    pub noise_level: f64,
    pub seed: u64,
}

impl Settings {
    pub fn new(profile: Profile) -> Self {
        Self {
            profile,
            cfl: 0.9,
            cfl_rect: 0.6,
            tau: 2.0,
            b: 0.5,
            rho: 0.01,
            noise_level: 0.01,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
    pub requirement: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub id: u32,
    pub title: &'static str,
    pub pass: bool,
    pub metrics: Vec<Metric>,
    pub error: Option<String>,
    #[serde(skip)]
    pub seconds: f64,
}

impl CriterionReport {
    pub fn summary(&self) -> String {
        let status = if self.pass { "PASS" } else { "FAIL" };
        let mut line = format!("criterion {:>2} {status}  {}", self.id, self.title);
        if let Some(e) = &self.error {
            line.push_str(&format!("  error: {e}"));
        }
        for m in self.metrics.iter().filter(|m| !m.pass) {
            line.push_str(&format!(
                "  [{} = {:.4e}, need {}]",
                m.name, m.value, m.requirement
            ));
        }
        line
    }
}

struct Collector {
    metrics: Vec<Metric>,
}

impl Collector {
    fn new() -> Self {
        Self {
            metrics: Vec::new(),
        }
    }

    fn at_most(&mut self, name: &str, value: f64, limit: f64) {
        self.push(name, value, format!("<= {limit:e}"), value <= limit);
    }

    fn at_least(&mut self, name: &str, value: f64, limit: f64) {
        self.push(name, value, format!(">= {limit}"), value >= limit);
    }

    fn within(&mut self, name: &str, value: f64, target: f64, tol: f64) {
        self.push(
            name,
            value,
            format!("{target} ± {tol}"),
            (value - target).abs() <= tol,
        );
    }

    fn check(&mut self, name: &str, value: f64, requirement: &str, pass: bool) {
        self.push(name, value, requirement.to_string(), pass);
    }

    fn info(&mut self, name: &str, value: f64) {
        self.push(name, value, "reported".into(), true);
    }

    fn push(&mut self, name: &str, value: f64, requirement: String, pass: bool) {
        self.metrics.push(Metric {
            name: name.to_string(),
            value,
            requirement,
            pass: pass && !value.is_nan(),
        });
    }
}

pub const TITLES: [&str; 9] = [
    "eigenvalues match the closed form",
    "energy conservation and dissipation",
    "leapfrog agrees with the spectral oracle",
    "directional derivative of the trace map",
    "second-order remainder",
    "Lipschitz lower bound certificate",
    "uniqueness in both directions",
    "reconstruction of b",
    "admissible modes rarely vanish on the damped side",
];

fn finish(
    id: u32,
    started: Instant,
    res: Result<Collector>,
    limit_s: Option<f64>,
) -> CriterionReport {
    let seconds = started.elapsed().as_secs_f64();
    let title = TITLES[id as usize - 1];
    match res {
        Ok(mut c) => {
            if let Some(limit) = limit_s {
                // Wall-clock is checked but not written, so reruns stay byte-identical.
                if seconds > limit {
                    c.push("runtime_s", seconds, format!("< {limit}"), false);
                }
            }
            CriterionReport {
                id,
                title,
                pass: c.metrics.iter().all(|m| m.pass),
                metrics: c.metrics,
                error: None,
                seconds,
            }
        }
        Err(e) => CriterionReport {
            id,
            title,
            pass: false,
            metrics: Vec::new(),
            error: Some(e.to_string()),
            seconds,
        },
    }
}

/// Runs criteria 1 to 9 in order.
pub fn run_all(settings: &Settings) -> Vec<CriterionReport> {
    let tol = Tolerances::for_profile(settings.profile);
    let mut out = vec![
        criterion_eigen(&tol),
        criterion_forward(settings, &tol),
        criterion_oracle(settings, &tol),
    ];
    let started = Instant::now();
    let sweep = sweep_1d(settings, tol.sweep_n);
    let sweep_s = started.elapsed().as_secs_f64();
    for (id, f) in [
        (
            4,
            criterion_derivative as fn(&StabilityReport, &Settings, &Tolerances) -> Collector,
        ),
        (5, criterion_remainder),
        (6, criterion_certificate),
    ] {
        let t = Instant::now();
        let res = match &sweep {
            Ok(rep) => Ok(f(rep, settings, &tol)),
            Err(e) => Err(e.clone()),
        };
        let mut rep = finish(id, t, res, None);
        rep.seconds += sweep_s / 3.0;
        out.push(rep);
    }
    out.push(criterion_uniqueness(settings, &tol));
    out.push(criterion_reconstruction(settings, &tol));
    out.push(criterion_vanishing());
    out
}

/// Runs a single criterion by number.
pub fn run_one(id: u32, settings: &Settings) -> Option<CriterionReport> {
    let tol = Tolerances::for_profile(settings.profile);
    let sweep_based = |f: fn(&StabilityReport, &Settings, &Tolerances) -> Collector| {
        let t = Instant::now();
        finish(
            id,
            t,
            sweep_1d(settings, tol.sweep_n).map(|r| f(&r, settings, &tol)),
            None,
        )
    };
    Some(match id {
        1 => criterion_eigen(&tol),
        2 => criterion_forward(settings, &tol),
        3 => criterion_oracle(settings, &tol),
        4 => sweep_based(criterion_derivative),
        5 => sweep_based(criterion_remainder),
        6 => sweep_based(criterion_certificate),
        7 => criterion_uniqueness(settings, &tol),
        8 => criterion_reconstruction(settings, &tol),
        9 => criterion_vanishing(),
        _ => return None,
    })
}

fn line_setup(
    n: usize,
    tau: f64,
    cfl: f64,
    modes: usize,
) -> Result<(DomainMesh, TimeGrid, EigenBasis)> {
    let mesh = DomainMesh::interval(n)?;
    let tg = TimeGrid::for_mesh(&mesh, tau, cfl)?;
    let basis = eigen_decompose(&mesh, modes)?;
    Ok((mesh, tg, basis))
}

fn combo(basis: &EigenBasis, terms: &[(usize, f64)], mesh: &DomainMesh) -> GridFunction {
    let mut f = GridFunction::zeros(mesh);
    for &(k, c) in terms {
        for (a, p) in f.values.iter_mut().zip(&basis.phi(k).values) {
            *a += c * p;
        }
    }
    f
}

pub fn criterion_eigen(tol: &Tolerances) -> CriterionReport {
    let started = Instant::now();
    let res = (|| {
        let mut c = Collector::new();
        let mut errs = Vec::new();
        for &n in &tol.eigen_sizes {
            let mesh = DomainMesh::interval(n)?;
            let basis = eigen_decompose(&mesh, 6)?;
            let worst = (0..6)
                .map(|k| {
                    let exact = ((k as f64 + 0.5) * PI).powi(2);
                    (basis.lambda(k) - exact).abs() / exact
                })
                .fold(0.0, f64::max);
            errs.push(worst);
        }
        let sizes: Vec<f64> = tol.eigen_sizes.iter().map(|&n| n as f64).collect();
        c.at_most("max_rel_error_finest", errs[2], tol.eigen_rel_error);
        c.within("order", -loglog_slope(&sizes, &errs), 2.0, 0.2);
        Ok(c)
    })();
    finish(1, started, res, Some(tol.runtime_eigen_s))
}

/// Gaussian pulse centered at `x = 0.5`, numerically zero near both ends.
pub fn compatible_bump(mesh: &DomainMesh) -> GridFunction {
    GridFunction::from_fn(mesh, |x, _| (-((x - 0.5) / 0.1).powi(2)).exp())
}

pub fn criterion_forward(s: &Settings, tol: &Tolerances) -> CriterionReport {
    let started = Instant::now();
    let res = (|| {
        let mut c = Collector::new();
        let (mesh, tg, basis) = line_setup(tol.forward_n, s.tau, s.cfl, 2)?;
        let init = WaveState {
            u: combo(&basis, &[(0, 1.0), (1, 0.5)], &mesh),
            v: GridFunction::zeros(&mesh),
        };
        let free = solve_damped(&mesh, &tg, &DampingField::zeros(&mesh), &init)?;
        let e = free.energy();
        let drift = e.iter().map(|x| (x - e[0]).abs()).fold(0.0, f64::max) / e[0];
        c.at_most("energy_drift_b0", drift, tol.energy_drift);

        let b = DampingField::constant(&mesh, s.b)?;
        let damped = solve_damped(&mesh, &tg, &b, &init)?;
        let e = damped.energy();
        let dt2 = tg.dt() * tg.dt();
        let worst_rise = e
            .windows(2)
            .map(|w| (w[1] - w[0]) / (dt2 * e[0]))
            .fold(f64::MIN, f64::max);
        c.at_most("max_step_increase_over_dt2_e0", worst_rise, 1.0);

        // The order is measured on data vanishing near Γ₁: (φ_k, 0) violates the
        // second compatibility condition of the damped problem, which slows the
        // observed order below 2 on these grids.
        let mut resid = Vec::new();
        for &n in &tol.refine_sizes {
            let mesh = DomainMesh::interval(n)?;
            let tg = TimeGrid::for_mesh(&mesh, s.tau, s.cfl)?;
            let init = WaveState {
                u: compatible_bump(&mesh),
                v: GridFunction::zeros(&mesh),
            };
            let b = DampingField::constant(&mesh, s.b)?;
            let traj = solve_damped(&mesh, &tg, &b, &init)?;
            resid.push(dissipation_identity_residual(&traj, &b, &mesh));
        }
        let sizes: Vec<f64> = tol.refine_sizes.iter().map(|&n| n as f64).collect();
        c.info("dissipation_residual_finest", resid[2]);
        c.at_least(
            "dissipation_residual_order",
            -loglog_slope(&sizes, &resid),
            tol.min_order,
        );
        Ok(c)
    })();
    finish(2, started, res, Some(tol.runtime_forward_s))
}

pub fn criterion_oracle(s: &Settings, tol: &Tolerances) -> CriterionReport {
    let started = Instant::now();
    let res = (|| {
        let mut c = Collector::new();
        let mut free_gaps = Vec::new();
        let mut forced_gaps = Vec::new();
        for &n in &tol.refine_sizes {
            let (mesh, tg, basis) = line_setup(n, s.tau, s.cfl, n)?;
            let init = WaveState {
                u: combo(&basis, &[(0, 1.0), (2, 0.5)], &mesh),
                v: combo(&basis, &[(1, 0.3)], &mesh),
            };
            let zero_g = BoundaryTrace::zeros(&mesh, &tg);
            let fd = solve_damped(&mesh, &tg, &DampingField::zeros(&mesh), &init)?;
            let sp = duhamel_spectral_solve(&basis, &tg, &zero_g, &init, &mesh)?;
            free_gaps.push(fd.max_l2_gap(&sp, &mesh));

            let g = BoundaryTrace::from_fn(&mesh, &tg, |t, _| (3.0 * t).sin());
            let rest = WaveState::zeros(&mesh);
            let fd = solve_neumann_forced(&mesh, &tg, &g, &rest, CompatibilityPolicy::Enforce)?;
            let sp = duhamel_spectral_solve(&basis, &tg, &g, &rest, &mesh)?;
            forced_gaps.push(fd.max_l2_gap(&sp, &mesh));
        }
        let sizes: Vec<f64> = tol.refine_sizes.iter().map(|&n| n as f64).collect();
        c.at_least(
            "order_unforced",
            -loglog_slope(&sizes, &free_gaps),
            tol.min_order,
        );
        c.at_least(
            "order_forced",
            -loglog_slope(&sizes, &forced_gaps),
            tol.min_order,
        );
        c.at_most("gap_unforced_finest", free_gaps[2], tol.oracle_gap);
        c.at_most("gap_forced_finest", forced_gaps[2], tol.oracle_gap);
        Ok(c)
    })();
    finish(3, started, res, None)
}

/// The interval sweep shared by criteria 4 to 6.
pub fn sweep_1d(s: &Settings, n: usize) -> Result<StabilityReport> {
    let (mesh, tg, basis) = line_setup(n, s.tau, s.cfl, 1)?;
    let init = make_admissible(&basis, 0, &mesh)?;
    let b = DampingField::constant(&mesh, s.b)?;
    stability_sweep(&mesh, &tg, &b, &init, &default_rho_grid())
}

/// `2κ = b π / √2` for the lowest mode over two time units; in general
/// `‖b ∂_t u₀‖² = b² · 2λ ∫₀^τ sin²(√λ t) dt`.
pub fn closed_form_two_kappa(b: f64, tau: f64) -> f64 {
    let om = PI / 2.0;
    let integral = tau / 2.0 - (2.0 * om * tau).sin() / (4.0 * om);
    b * (2.0 * om * om * integral).sqrt()
}

fn criterion_derivative(rep: &StabilityReport, s: &Settings, tol: &Tolerances) -> Collector {
    let mut c = Collector::new();
    let slope = rep.slope_between(1.25e-2, 1e-1, |p| p.deviation);
    c.within("deviation_slope", slope, 1.0, 0.2);
    c.info(
        "trace_deviation_slope",
        rep.slope_between(1.25e-2, 1e-1, |p| p.trace_deviation),
    );
    let exact = closed_form_two_kappa(s.b, s.tau);
    c.info("two_kappa_closed_form", exact);
    c.info("two_kappa_hat", 2.0 * rep.kappa_hat);
    c.at_most(
        "two_kappa_rel_error",
        (2.0 * rep.kappa_hat - exact).abs() / exact,
        tol.kappa_rel_error,
    );
    c
}

fn criterion_remainder(rep: &StabilityReport, _: &Settings, tol: &Tolerances) -> Collector {
    let mut c = Collector::new();
    // The five largest ρ span 0.1 down to 6.25e-3, just over a decade.
    c.at_least(
        "remainder_slope",
        rep.slope_between(6.25e-3, 1e-1, |p| p.remainder_norm),
        tol.min_order,
    );
    c.info("remainder_slope_full_grid", rep.remainder_slope);
    c
}

fn criterion_certificate(rep: &StabilityReport, _: &Settings, _: &Tolerances) -> Collector {
    let mut c = Collector::new();
    let rho0 = rep.rho0_hat.unwrap_or(0.0);
    c.check("rho0_hat", rho0, "> 0", rho0 > 0.0);
    c.info("kappa_tilde", rep.kappa_tilde);
    let certified = rep.points.iter().filter(|p| p.certified.is_some()).count();
    c.check(
        "certified_points",
        certified as f64,
        "every rho <= rho0_hat satisfies the bound",
        rep.certificate_holds && certified > 0,
    );
    let margin = rep
        .points
        .iter()
        .filter(|p| p.certified.is_some())
        .map(|p| p.gap_norm / p.certificate_lhs)
        .fold(f64::INFINITY, f64::min);
    c.info("min_gap_over_bound", margin);
    c
}

pub fn criterion_uniqueness(s: &Settings, tol: &Tolerances) -> CriterionReport {
    let started = Instant::now();
    let res = (|| {
        let mut c = Collector::new();
        let (mesh, tg, basis) = line_setup(tol.sweep_n, s.tau, s.cfl, 1)?;
        let init = make_admissible(&basis, 0, &mesh)?;
        let b_true = DampingField::constant(&mesh, s.b * s.rho)?;
        let v = uniqueness_experiment(&mesh, &tg, &init, &b_true, tol.reconstruct_rel_error)?;
        c.info("zero_floor", v.zero.floor);
        c.info("zero_raw_estimate_max", v.zero.raw_max);
        c.at_most("zero_besov_estimate", v.zero.besov_estimate, v.zero.bound);
        c.check(
            "nonzero_gap",
            v.nonzero.gap_norm,
            &format!("> {:e}", v.nonzero.lower_bound),
            v.nonzero.gap_norm > v.nonzero.lower_bound,
        );
        c.at_most(
            "nonzero_rel_error",
            v.nonzero.relative_error,
            v.nonzero.tolerance,
        );
        Ok(c)
    })();
    finish(7, started, res, None)
}

/// Relative errors of a clean and a noisy reconstruction on one mesh.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReconstructionRun {
    pub clean_error: f64,
    pub noisy_error: f64,
    /// L²(Γ₁) size of the predicted noise floor, relative to `‖b‖`.
    pub noise_floor: f64,
    pub estimate: Vec<f64>,
    pub truth: Vec<f64>,
}

/// Recovers `b` from synthetic data generated by a damped solve at `rho · b`.
pub fn reconstruction_run(
    mesh: &DomainMesh,
    tg: &TimeGrid,
    b: &DampingField,
    rho: f64,
    noise_level: f64,
    seed: u64,
) -> Result<ReconstructionRun> {
    let basis = eigen_decompose(mesh, 1)?;
    let init = make_admissible(&basis, 0, mesh)?;
    let u0 = reference_solution_u0(&init, mesh, tg);
    let damped = solve_damped(mesh, tg, &b.scaled(rho), u0.state(0))?;
    let measured = neumann_trace(&damped, mesh);
    let reference = neumann_trace(&u0, mesh);
    let clean = reconstruct_b(mesh, tg, &measured.sub(&reference), rho, &u0)?;
    let noisy_trace = add_noise(&measured, noise_level, seed)?;
    let noisy = reconstruct_b(mesh, tg, &noisy_trace.sub(&reference), rho, &u0)?;
    let amplitude = noise_level * measured.max_abs();
    let floor = noise_floor(amplitude, tg.dt(), rho, &clean.velocity_energy);
    let floor_field = DampingField::new(mesh, floor.iter().map(|f| f.min(1e300)).collect())?;
    let zero = DampingField::zeros(mesh);
    let b_norm = relative_l2_error(&zero, b, mesh);
    Ok(ReconstructionRun {
        clean_error: relative_l2_error(&clean.estimate, b, mesh),
        noisy_error: relative_l2_error(&noisy.estimate, b, mesh),
        noise_floor: relative_l2_error(&floor_field, &zero, mesh) / b_norm,
        estimate: clean.estimate.values().to_vec(),
        truth: b.values().to_vec(),
    })
}

/// Noisy error may exceed the clean one by at most this many noise floors.
pub const NOISE_FLOOR_MULTIPLE: f64 = 4.0;

pub fn criterion_reconstruction(s: &Settings, tol: &Tolerances) -> CriterionReport {
    let started = Instant::now();
    let res = (|| {
        let mut c = Collector::new();
        let mesh = DomainMesh::interval(tol.sweep_n)?;
        let tg = TimeGrid::for_mesh(&mesh, s.tau, s.cfl)?;
        let b = DampingField::constant(&mesh, s.b)?;
        let line = reconstruction_run(&mesh, &tg, &b, s.rho, s.noise_level, s.seed)?;
        c.at_most(
            "interval_rel_error",
            line.clean_error,
            tol.reconstruct_rel_error,
        );

        let rect = DomainMesh::rectangle(tol.rect_n, tol.rect_n)?;
        let tg2 = TimeGrid::for_mesh(&rect, s.tau, s.cfl_rect)?;
        let b2 = DampingField::from_fn(&rect, rect_profile);
        let sq = reconstruction_run(&rect, &tg2, &b2, s.rho, s.noise_level, s.seed)?;
        c.at_most("rectangle_rel_error", sq.clean_error, tol.rect_rel_error);

        for (name, run) in [("interval", &line), ("rectangle", &sq)] {
            c.info(
                &format!("{name}_noise_factor"),
                run.noisy_error / run.clean_error,
            );
            c.info(&format!("{name}_noise_floor"), run.noise_floor);
            let allowed = run.clean_error + NOISE_FLOOR_MULTIPLE * run.noise_floor;
            c.at_most(&format!("{name}_noisy_rel_error"), run.noisy_error, allowed);
        }
        Ok(c)
    })();
    finish(8, started, res, None)
}

/// Tested modes on the interval and on a rectangle whose Γ₁ nodes avoid the
/// zeros of the low tangential sines (`ny` prime).
pub fn criterion_vanishing() -> CriterionReport {
    let started = Instant::now();
    let res = (|| {
        let mut c = Collector::new();
        let line = DomainMesh::interval(256)?;
        let rect = DomainMesh::rectangle(32, 61)?;
        let mut worst: f64 = 0.0;
        let mut worst_scaled: f64 = 0.0;
        for mesh in [&line, &rect] {
            let basis = eigen_decompose(mesh, 6)?;
            for k in 0..6 {
                let phi = basis.phi(k);
                let v = vanishing_set_fraction(phi, mesh, VANISHING_EPS)?;
                worst = worst.max(if v.degenerate { 1.0 } else { v.fraction });
                for eps in [1e-2, 1e-3, 1e-4] {
                    let f = vanishing_set_fraction(phi, mesh, eps)?.fraction;
                    worst_scaled = worst_scaled.max(f / eps);
                }
            }
        }
        c.at_most("max_fraction", worst, ADMISSIBLE_FRACTION);
        // C = 50 makes the bound coincide with the admissibility threshold at eps = 1e-3.
        c.at_most("max_fraction_over_eps", worst_scaled, 50.0);
        Ok(c)
    })();
    finish(9, started, res, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_constant() {
        let v = closed_form_two_kappa(0.5, 2.0);
        assert!((v - 0.5 * PI / 2f64.sqrt()).abs() < 1e-14);
    }
}
