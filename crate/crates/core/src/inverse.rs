//! Linearized identification of the boundary damping coefficient.
//!
//! Starting from an eigenfunction `φ_k` at rest, the undamped solution is
//! `u₀ = cos(√λ_k t) φ_k`. Damping `ρ b` perturbs the Neumann trace by
//! `-ρ b ∂_t u₀ + O(ρ²)` on Γ₁ × (0, τ). [`stability_sweep`] measures that
//! expansion over a grid of `ρ`, [`reconstruct_b`] inverts its linear term
//! node by node and [`uniqueness_experiment`] checks that equal traces force
//! `b = 0`.

use log::warn;
use rayon::prelude::*;
use serde::Serialize;

use crate::domain::{DomainMesh, GridFunction, TimeGrid};
use crate::elliptic::{vanishing_set_fraction, EigenBasis, VanishingSet, VANISHING_EPS};
use crate::error::{Error, Result};
use crate::fit::loglog_slope;
use crate::measure::{
    besov_half_norm, l2_sigma1_norm, neumann_trace, velocity_trace, BoundaryTrace,
};
use crate::wave::{
    solve_damped, solve_neumann_forced, CompatibilityPolicy, DampingField, WaveState,
    WaveTrajectory,
};

/// Largest share of Γ₁ on which an admissible `φ_k` may (numerically) vanish.
pub const ADMISSIBLE_FRACTION: f64 = 0.05;
/// Safety factor applied to the extrapolated constant in the lower-bound certificate.
pub const CERTIFICATE_FACTOR: f64 = 0.9;
/// Nodes whose `∫(∂_t u₀)²` falls below this share of the largest are unreliable.
pub const RELIABILITY_THRESHOLD: f64 = 1e-6;

/// Geometric grid `0.1 · 2⁻ⁱ` down to about `1e-3`.
pub fn default_rho_grid() -> Vec<f64> {
    (0..8).map(|i| 0.1 * 0.5f64.powi(i)).collect()
}

/// Initial state `(φ_k, 0)` with its vanishing-set diagnostic.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibleInitialData {
    pub u0: GridFunction,
    pub v0: GridFunction,
    pub mode: usize,
    pub lambda: f64,
    pub vanishing: VanishingSet,
    pub admissible: bool,
}

impl AdmissibleInitialData {
    pub fn state(&self) -> WaveState {
        WaveState {
            u: self.u0.clone(),
            v: self.v0.clone(),
        }
    }

    /// The same mode with amplitude multiplied by `alpha`.
    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            u0: self.u0.scaled(alpha),
            v0: self.v0.scaled(alpha),
            ..self.clone()
        }
    }

    fn require_admissible(&self) -> Result<()> {
        if self.admissible {
            Ok(())
        } else {
            Err(Error::Inadmissible {
                fraction: self.vanishing.fraction,
                threshold: ADMISSIBLE_FRACTION,
            })
        }
    }
}

/// `(φ_k, 0)`, flagged inadmissible when `φ_k` nearly vanishes on too much of Γ₁.
pub fn make_admissible(
    basis: &EigenBasis,
    k: usize,
    mesh: &DomainMesh,
) -> Result<AdmissibleInitialData> {
    if k >= basis.count() {
        return Err(Error::InvalidArgument(format!(
            "mode {k} requested but the basis holds {} modes",
            basis.count()
        )));
    }
    let phi = basis.phi(k).clone();
    let vanishing = vanishing_set_fraction(&phi, mesh, VANISHING_EPS)?;
    let admissible = !vanishing.degenerate && vanishing.fraction < ADMISSIBLE_FRACTION;
    Ok(AdmissibleInitialData {
        u0: phi,
        v0: GridFunction::zeros(mesh),
        mode: k,
        lambda: basis.lambda(k),
        vanishing,
        admissible,
    })
}

/// `u₀ = cos(√λ t) u⁰`, evaluated in closed form at every sample.
pub fn reference_solution_u0(
    init: &AdmissibleInitialData,
    mesh: &DomainMesh,
    tg: &TimeGrid,
) -> WaveTrajectory {
    let omega = init.lambda.max(0.0).sqrt();
    let states = tg
        .times()
        .into_iter()
        .map(|t| {
            let (s, c) = (omega * t).sin_cos();
            WaveState {
                u: init.u0.scaled(c),
                v: init.u0.scaled(-omega * s),
            }
        })
        .collect();
    WaveTrajectory::from_states(mesh, *tg, states)
}

/// Linear response `w₀`: zero data and Neumann flux `-b ∂_t u₀` on Γ₁.
pub fn sensitivity_w0(
    mesh: &DomainMesh,
    tg: &TimeGrid,
    b: &DampingField,
    u0_traj: &WaveTrajectory,
) -> Result<WaveTrajectory> {
    let g = velocity_trace(u0_traj, mesh)
        .scale_nodes(b.values())
        .scaled(-1.0);
    solve_neumann_forced(
        mesh,
        tg,
        &g,
        &WaveState::zeros(mesh),
        CompatibilityPolicy::Enforce,
    )
}

/// `z = u_{ρb} - u₀ - ρ w₀` by subtraction of full solves, with `‖∂ν z‖_{L²(Σ₁)}`.
pub fn remainder_z(
    mesh: &DomainMesh,
    tg: &TimeGrid,
    b: &DampingField,
    rho: f64,
    u0_traj: &WaveTrajectory,
    w0_traj: &WaveTrajectory,
) -> Result<(WaveTrajectory, f64)> {
    let damped = solve_damped(mesh, tg, &b.scaled(rho), u0_traj.state(0))?;
    let z = WaveTrajectory::combine(mesh, &[(1.0, &damped), (-1.0, u0_traj), (-rho, w0_traj)]);
    let norm = l2_sigma1_norm(&neumann_trace(&z, mesh));
    Ok((z, norm))
}

/// Measurements at one value of `ρ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RhoPoint {
    pub rho: f64,
    /// `‖∂ν u_{ρb} - ∂ν u₀‖_{L²(Σ₁)}`.
    pub gap_norm: f64,
    pub ratio: f64,
    /// `|ratio - ‖b ∂_t u₀‖|`.
    pub deviation: f64,
    /// `‖gap/ρ + b ∂_t u₀‖_{L²(Σ₁)}`.
    pub trace_deviation: f64,
    /// `‖∂ν z‖_{L²(Σ₁)}`.
    pub remainder_norm: f64,
    /// `‖(u_{ρb} - u₀)/ρ - w₀‖_{L²(Q)}`.
    pub linearization_error: f64,
    pub besov_rho_b: f64,
    pub certificate_lhs: f64,
    pub certified: Option<bool>,
}

/// Outcome of [`stability_sweep`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub points: Vec<RhoPoint>,
    /// Half the extrapolated limit of `gap/ρ`.
    pub kappa_hat: f64,
    /// `‖b ∂_t u₀‖_{L²(Σ₁)} / 2`.
    pub kappa_ref: f64,
    /// Direction-specific constant `0.9 κ̂ / ‖b‖_B`.
    pub kappa_tilde: f64,
    pub besov_b: f64,
    pub extrapolated: bool,
    pub rho0_hat: Option<f64>,
    pub certificate_holds: bool,
    pub deviation_slope: f64,
    pub remainder_slope: f64,
    pub linearization_slope: f64,
}

impl StabilityReport {
    pub fn rho_values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.rho).collect()
    }

    pub fn ratios(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.ratio).collect()
    }

    pub fn gap_norms(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.gap_norm).collect()
    }

    pub fn remainder_norms(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.remainder_norm).collect()
    }

    /// Log-log slope of `select(point)` against `ρ` over `lo ≤ ρ ≤ hi`.
    pub fn slope_between(&self, lo: f64, hi: f64, select: impl Fn(&RhoPoint) -> f64) -> f64 {
        let tol = 1e-12 * hi;
        let (x, y): (Vec<f64>, Vec<f64>) = self
            .points
            .iter()
            .filter(|p| p.rho >= lo - tol && p.rho <= hi + tol)
            .map(|p| (p.rho, select(p)))
            .unzip();
        loglog_slope(&x, &y)
    }
}

fn validate_rho_grid(rho_grid: &[f64]) -> Result<()> {
    if rho_grid.is_empty() {
        return Err(Error::InvalidArgument("rho grid is empty".into()));
    }
    if rho_grid.iter().any(|r| !(*r > 0.0 && *r <= 1.0)) {
        return Err(Error::InvalidArgument(
            "rho values must lie in (0, 1]".into(),
        ));
    }
    if rho_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument(
            "rho grid must be strictly decreasing".into(),
        ));
    }
    Ok(())
}

/// Sweeps `ρ` over `rho_grid`, measuring the trace gap, the remainder and the
/// lower-bound certificate.
pub fn stability_sweep(
    mesh: &DomainMesh,
    tg: &TimeGrid,
    b: &DampingField,
    init: &AdmissibleInitialData,
    rho_grid: &[f64],
) -> Result<StabilityReport> {
    validate_rho_grid(rho_grid)?;
    if b.is_zero() {
        return Err(Error::Hypothesis(
            "the damping direction b must not vanish identically".into(),
        ));
    }
    init.require_admissible()?;

    let u0 = reference_solution_u0(init, mesh, tg);
    let v0_trace = velocity_trace(&u0, mesh);
    let bv0 = v0_trace.scale_nodes(b.values());
    let kappa_ref = l2_sigma1_norm(&bv0) / 2.0;
    if kappa_ref == 0.0 {
        return Err(Error::Hypothesis(
            "b ∂_t u₀ vanishes identically on Γ₁".into(),
        ));
    }
    let w0 = sensitivity_w0(mesh, tg, b, &u0)?;
    let u0_trace = neumann_trace(&u0, mesh);
    let besov_b = besov_half_norm(b, mesh);

    let mut points = rho_grid
        .par_iter()
        .map(|&rho| {
            let damped = solve_damped(mesh, tg, &b.scaled(rho), u0.state(0))?;
            let gap = neumann_trace(&damped, mesh).sub(&u0_trace);
            let gap_norm = l2_sigma1_norm(&gap);
            let ratio = gap_norm / rho;
            let z = WaveTrajectory::combine(mesh, &[(1.0, &damped), (-1.0, &u0), (-rho, &w0)]);
            Ok(RhoPoint {
                rho,
                gap_norm,
                ratio,
                deviation: (ratio - 2.0 * kappa_ref).abs(),
                trace_deviation: l2_sigma1_norm(&gap.scaled(1.0 / rho).add(&bv0)),
                remainder_norm: l2_sigma1_norm(&neumann_trace(&z, mesh)),
                linearization_error: z.l2_q_norm(mesh) / rho,
                besov_rho_b: besov_half_norm(&b.scaled(rho), mesh),
                certificate_lhs: 0.0,
                certified: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let n = points.len();
    let extrapolated = n >= 2;
    let limit = if extrapolated {
        let (p1, p2) = (&points[n - 2], &points[n - 1]);
        (p1.rho * p2.ratio - p2.rho * p1.ratio) / (p1.rho - p2.rho)
    } else {
        warn!("a single rho value cannot be extrapolated; using its ratio directly");
        points[0].ratio
    };
    let kappa_hat = limit / 2.0;
    let kappa_tilde = CERTIFICATE_FACTOR * kappa_hat / besov_b;

    // Largest ρ below which every swept ratio stays above 0.9 · 2κ̂.
    let floor = CERTIFICATE_FACTOR * 2.0 * kappa_hat;
    let mut rho0_hat = None;
    for p in points.iter().rev() {
        if p.ratio >= floor {
            rho0_hat = Some(p.rho);
        } else {
            break;
        }
    }
    let mut certificate_holds = rho0_hat.is_some();
    for p in points.iter_mut() {
        p.certificate_lhs = kappa_tilde * p.besov_rho_b;
        if rho0_hat.is_some_and(|r0| p.rho <= r0) {
            let ok = p.certificate_lhs <= p.gap_norm;
            p.certified = Some(ok);
            certificate_holds &= ok;
        }
    }

    let rhos: Vec<f64> = points.iter().map(|p| p.rho).collect();
    let series = |f: fn(&RhoPoint) -> f64| points.iter().map(f).collect::<Vec<_>>();
    let deviation_slope = loglog_slope(&rhos, &series(|p| p.deviation));
    let remainder_slope = loglog_slope(&rhos, &series(|p| p.remainder_norm));
    let linearization_slope = loglog_slope(&rhos, &series(|p| p.linearization_error));

    Ok(StabilityReport {
        points,
        kappa_hat,
        kappa_ref,
        kappa_tilde,
        besov_b,
        extrapolated,
        rho0_hat,
        certificate_holds,
        deviation_slope,
        remainder_slope,
        linearization_slope,
    })
}

/// `∂ν u_{ρb} - ∂ν u₀` on Γ₁ × (0, τ), from a damped solve against the
/// closed-form reference.
pub fn synthetic_gap(
    mesh: &DomainMesh,
    tg: &TimeGrid,
    b: &DampingField,
    rho: f64,
    u0_traj: &WaveTrajectory,
) -> Result<BoundaryTrace> {
    let damped = solve_damped(mesh, tg, &b.scaled(rho), u0_traj.state(0))?;
    Ok(neumann_trace(&damped, mesh).sub(&neumann_trace(u0_traj, mesh)))
}

/// Tuning for [`reconstruct_b_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructOptions {
    /// Added to the denominator `ρ ∫(∂_t u₀)²`.
    pub ridge: f64,
    pub reliability_threshold: f64,
}

impl Default for ReconstructOptions {
    fn default() -> Self {
        Self {
            ridge: 0.0,
            reliability_threshold: RELIABILITY_THRESHOLD,
        }
    }
}

/// Nodewise estimate of `b` with its diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub estimate: DampingField,
    /// Least-squares values before clamping.
    pub raw: Vec<f64>,
    pub clamped: Vec<bool>,
    pub unreliable: Vec<bool>,
    /// `∫₀^τ (∂_t u₀)² dt` per Γ₁ node.
    pub velocity_energy: Vec<f64>,
}

/// `b̂(y) = -∫ gap ∂_t u₀ dt / (ρ ∫ (∂_t u₀)² dt)` at each Γ₁ node.
pub fn reconstruct_b(
    mesh: &DomainMesh,
    tg: &TimeGrid,
    measured_gap: &BoundaryTrace,
    rho: f64,
    u0_traj: &WaveTrajectory,
) -> Result<Reconstruction> {
    reconstruct_b_with(
        mesh,
        tg,
        measured_gap,
        rho,
        u0_traj,
        ReconstructOptions::default(),
    )
}

pub fn reconstruct_b_with(
    mesh: &DomainMesh,
    tg: &TimeGrid,
    measured_gap: &BoundaryTrace,
    rho: f64,
    u0_traj: &WaveTrajectory,
    opts: ReconstructOptions,
) -> Result<Reconstruction> {
    if !(rho > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "rho must be positive, got {rho}"
        )));
    }
    if !(opts.ridge >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "ridge must be nonnegative, got {}",
            opts.ridge
        )));
    }
    if measured_gap.sample_count() != tg.sample_count()
        || measured_gap.node_count() != mesh.gamma1().len()
    {
        return Err(Error::Shape {
            what: "measured gap",
            expected: tg.sample_count() * mesh.gamma1().len(),
            found: measured_gap.values().len(),
        });
    }
    let v = velocity_trace(u0_traj, mesh);
    let nodes = mesh.gamma1().len();
    let velocity_energy: Vec<f64> = (0..nodes).map(|j| v.mul(&v).integrate_node(j)).collect();
    let cross: Vec<f64> = (0..nodes)
        .map(|j| measured_gap.mul(&v).integrate_node(j))
        .collect();
    let top = velocity_energy.iter().fold(0.0f64, |m, &e| m.max(e));

    let mut raw = Vec::with_capacity(nodes);
    let mut clamped = Vec::with_capacity(nodes);
    let mut unreliable = Vec::with_capacity(nodes);
    let mut values = Vec::with_capacity(nodes);
    for j in 0..nodes {
        let weak = !(velocity_energy[j] > opts.reliability_threshold * top);
        let est = if weak {
            0.0
        } else {
            -cross[j] / (rho * velocity_energy[j] + opts.ridge)
        };
        raw.push(est);
        clamped.push(est < 0.0);
        unreliable.push(weak);
        values.push(est.max(0.0));
    }
    Ok(Reconstruction {
        estimate: DampingField::new(mesh, values)?,
        raw,
        clamped,
        unreliable,
        velocity_energy,
    })
}

/// `‖b̂ - b‖_{L²(Γ₁)} / ‖b‖_{L²(Γ₁)}`.
pub fn relative_l2_error(estimate: &DampingField, truth: &DampingField, mesh: &DomainMesh) -> f64 {
    let sq = |f: &dyn Fn(usize) -> f64| -> f64 {
        (0..truth.values().len())
            .map(|j| mesh.gamma1_weights()[j] * f(j) * f(j))
            .sum::<f64>()
            .sqrt()
    };
    let diff = sq(&|j| estimate.values()[j] - truth.values()[j]);
    let norm = sq(&|j| truth.values()[j]);
    if norm > 0.0 {
        diff / norm
    } else {
        diff
    }
}

/// Standard deviation of each node's estimate under uniform noise of
/// amplitude `amplitude`: `a √(dt/3) / (ρ √∫(∂_t u₀)²)`.
pub fn noise_floor(amplitude: f64, dt: f64, rho: f64, velocity_energy: &[f64]) -> Vec<f64> {
    velocity_energy
        .iter()
        .map(|&e| {
            if e > 0.0 {
                amplitude * (dt / 3.0).sqrt() / (rho * e.sqrt())
            } else {
                f64::INFINITY
            }
        })
        .collect()
}

/// One entry of a reconstruction error scan over `ρ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanPoint {
    pub rho: f64,
    pub gap_norm: f64,
    pub relative_error: f64,
}

/// Reconstruction error against `ρ` for noise-free synthetic data.
///
/// The error behaves like `O(ρ)` (linearization) plus `floor/ρ`
/// (discretization), so a wide grid shows a U-shaped curve.
pub fn reconstruction_scan(
    mesh: &DomainMesh,
    tg: &TimeGrid,
    b_true: &DampingField,
    init: &AdmissibleInitialData,
    rhos: &[f64],
) -> Result<Vec<ScanPoint>> {
    init.require_admissible()?;
    let u0 = reference_solution_u0(init, mesh, tg);
    rhos.par_iter()
        .map(|&rho| {
            let gap = synthetic_gap(mesh, tg, b_true, rho, &u0)?;
            let rec = reconstruct_b(mesh, tg, &gap, rho, &u0)?;
            Ok(ScanPoint {
                rho,
                gap_norm: l2_sigma1_norm(&gap),
                relative_error: relative_l2_error(&rec.estimate, b_true, mesh),
            })
        })
        .collect()
}

/// Decade grid `10⁻¹ … 10⁻ᵐ` for [`reconstruction_scan`].
pub fn decade_grid(decades: i32) -> Vec<f64> {
    (1..=decades).map(|d| 10f64.powi(-d)).collect()
}

/// Zero-damping half of the uniqueness check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroCase {
    pub gap_norm: f64,
    pub velocity_norm: f64,
    /// `‖gap‖ / ‖∂_t u₀‖`, the coefficient scale the grids cannot resolve.
    pub floor: f64,
    pub besov_estimate: f64,
    /// Largest `|b̂|` before clamping to the admissible cone.
    pub raw_max: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Nonzero-damping half of the uniqueness check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonzeroCase {
    pub gap_norm: f64,
    /// `‖b ∂_t u₀‖ / 2`, i.e. `κ ρ` for `b = ρ b_dir`.
    pub lower_bound: f64,
    pub besov_true: f64,
    pub besov_estimate: f64,
    pub relative_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessVerdict {
    pub mode: usize,
    pub vanishing_fraction: f64,
    pub zero: ZeroCase,
    pub nonzero: NonzeroCase,
    pub pass: bool,
}

/// Multiple of the floor allowed for the zero-damping estimate.
pub const UNIQUENESS_FLOOR_FACTOR: f64 = 10.0;

/// Checks both directions of "equal traces iff `b = 0`".
///
/// With `b = 0` the estimate must stay within `10 ×` the measured floor;
/// with `b = b_true ≠ 0` the gap must exceed `‖b_true ∂_t u₀‖/2` and the
/// estimate must match `b_true` to relative L² error `tol`.
pub fn uniqueness_experiment(
    mesh: &DomainMesh,
    tg: &TimeGrid,
    init: &AdmissibleInitialData,
    b_true: &DampingField,
    tol: f64,
) -> Result<UniquenessVerdict> {
    init.require_admissible()?;
    if b_true.is_zero() {
        return Err(Error::InvalidArgument(
            "the nonzero case needs a nonzero b_true".into(),
        ));
    }
    let u0 = reference_solution_u0(init, mesh, tg);
    let v0 = velocity_trace(&u0, mesh);
    let velocity_norm = l2_sigma1_norm(&v0);

    let gap0 = synthetic_gap(mesh, tg, &DampingField::zeros(mesh), 1.0, &u0)?;
    let gap_norm0 = l2_sigma1_norm(&gap0);
    let floor = gap_norm0 / velocity_norm;
    let est0 = reconstruct_b(mesh, tg, &gap0, 1.0, &u0)?;
    let besov0 = besov_half_norm(&est0.estimate, mesh);
    let bound = UNIQUENESS_FLOOR_FACTOR * floor;
    let zero = ZeroCase {
        gap_norm: gap_norm0,
        velocity_norm,
        floor,
        besov_estimate: besov0,
        raw_max: est0.raw.iter().fold(0.0f64, |m, v| m.max(v.abs())),
        bound,
        pass: besov0 <= bound,
    };

    let gap1 = synthetic_gap(mesh, tg, b_true, 1.0, &u0)?;
    let gap_norm1 = l2_sigma1_norm(&gap1);
    let lower_bound = l2_sigma1_norm(&v0.scale_nodes(b_true.values())) / 2.0;
    let est1 = reconstruct_b(mesh, tg, &gap1, 1.0, &u0)?;
    let relative_error = relative_l2_error(&est1.estimate, b_true, mesh);
    let nonzero = NonzeroCase {
        gap_norm: gap_norm1,
        lower_bound,
        besov_true: besov_half_norm(b_true, mesh),
        besov_estimate: besov_half_norm(&est1.estimate, mesh),
        relative_error,
        tolerance: tol,
        pass: gap_norm1 > lower_bound && relative_error <= tol,
    };
    Ok(UniquenessVerdict {
        mode: init.mode,
        vanishing_fraction: init.vanishing.fraction,
        pass: zero.pass && nonzero.pass,
        zero,
        nonzero,
    })
}
