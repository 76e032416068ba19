//! Forward solvers for the wave equation on the mixed domain.
//!
//! * [`solve_damped`]: explicit leapfrog for `∂ν u + b ∂_t u = 0` on Γ₁.
//! * [`solve_neumann_forced`]: the same scheme with `∂ν u = g` on Γ₁.
//! * [`duhamel_spectral_solve`]: an independent route through the eigenbasis,
//!   lifting `g` harmonically and integrating each mode's Duhamel formula.
//! * [`duhamel_boundary_solve`]: the same modal integration with the flux
//!   `g` applied as a boundary source, for fluxes that are not smooth in time.
//!
//! Both leapfrog variants use the lumped form `M ü = -K u + boundary terms`
//! with the damping term centered in time, `(u⁺ - u⁻) / 2dt`, solved
//! pointwise for `u⁺` on Γ₁.

use log::debug;

use crate::domain::{DomainMesh, GridFunction, TimeGrid};
use crate::elliptic::{assemble_mixed_laplacian, extend_time_dependent, EigenBasis};
use crate::error::{Error, Result};
use crate::measure::BoundaryTrace;

/// Required share of the initial/forcing energy captured by a truncated basis.
pub const SPECTRAL_CAPTURE: f64 = 0.999;

/// Displacement and velocity at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveState {
    pub u: GridFunction,
    pub v: GridFunction,
}

impl WaveState {
    pub fn zeros(mesh: &DomainMesh) -> Self {
        Self {
            u: GridFunction::zeros(mesh),
            v: GridFunction::zeros(mesh),
        }
    }

    pub fn new(mesh: &DomainMesh, u: GridFunction, v: GridFunction) -> Result<Self> {
        for f in [&u, &v] {
            if f.len() != mesh.node_count() {
                return Err(Error::Shape {
                    what: "wave state",
                    expected: mesh.node_count(),
                    found: f.len(),
                });
            }
        }
        Ok(Self { u, v })
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            u: self.u.scaled(alpha),
            v: self.v.scaled(alpha),
        }
    }
}

/// Nonnegative damping coefficient, one value per Γ₁ node.
#[derive(Debug, Clone, PartialEq)]
pub struct DampingField {
    values: Vec<f64>,
}

impl DampingField {
    pub fn new(mesh: &DomainMesh, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.gamma1().len() {
            return Err(Error::Shape {
                what: "damping field",
                expected: mesh.gamma1().len(),
                found: values.len(),
            });
        }
        if let Some((node, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v >= 0.0) || !v.is_finite())
        {
            return Err(Error::NegativeDamping { node, value });
        }
        Ok(Self { values })
    }

    pub fn zeros(mesh: &DomainMesh) -> Self {
        Self {
            values: vec![0.0; mesh.gamma1().len()],
        }
    }

    pub fn constant(mesh: &DomainMesh, b: f64) -> Result<Self> {
        Self::new(mesh, vec![b; mesh.gamma1().len()])
    }

    /// Samples `f` at the tangential coordinate of each Γ₁ node: `y` on the
    /// rectangle, `0.5` on the interval (where Γ₁ is a single point).
    pub fn from_fn(mesh: &DomainMesh, f: impl Fn(f64) -> f64) -> Self {
        let values = mesh
            .gamma1_coords()
            .iter()
            .map(|p| if mesh.dim() == 1 { f(0.5) } else { f(p[1]) })
            .map(|v| v.max(0.0))
            .collect();
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `rho · b`; `rho` must be nonnegative to stay in the admissible cone.
    pub fn scaled(&self, rho: f64) -> Self {
        assert!(rho >= 0.0, "damping scale must be nonnegative");
        Self {
            values: self.values.iter().map(|v| rho * v).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, &v| m.max(v))
    }
}

/// States at every sample of a time grid, with the energy series.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveTrajectory {
    time: TimeGrid,
    states: Vec<WaveState>,
    energy: Vec<f64>,
}

impl WaveTrajectory {
    pub fn from_states(mesh: &DomainMesh, time: TimeGrid, states: Vec<WaveState>) -> Self {
        assert_eq!(
            states.len(),
            time.sample_count(),
            "one state per time sample"
        );
        let energy = states.iter().map(|s| energy(s, mesh)).collect();
        Self {
            time,
            states,
            energy,
        }
    }

    pub fn time_grid(&self) -> &TimeGrid {
        &self.time
    }

    pub fn states(&self) -> &[WaveState] {
        &self.states
    }

    pub fn state(&self, n: usize) -> &WaveState {
        &self.states[n]
    }

    pub fn last(&self) -> &WaveState {
        self.states.last().expect("trajectory is never empty")
    }

    pub fn energy(&self) -> &[f64] {
        &self.energy
    }

    /// `Σ cᵢ trajᵢ`, state by state.
    pub fn combine(mesh: &DomainMesh, terms: &[(f64, &WaveTrajectory)]) -> Self {
        let (_, first) = terms[0];
        let states = (0..first.states.len())
            .map(|n| {
                let mut u = vec![0.0; mesh.node_count()];
                let mut v = vec![0.0; mesh.node_count()];
                for (c, traj) in terms {
                    let s = &traj.states[n];
                    for k in 0..u.len() {
                        u[k] += c * s.u.values[k];
                        v[k] += c * s.v.values[k];
                    }
                }
                WaveState {
                    u: GridFunction { values: u },
                    v: GridFunction { values: v },
                }
            })
            .collect();
        Self::from_states(mesh, first.time, states)
    }

    /// `‖u‖_{L²(Q)}` with trapezoid weights in space and time.
    pub fn l2_q_norm(&self, mesh: &DomainMesh) -> f64 {
        self.time
            .weights()
            .iter()
            .zip(&self.states)
            .map(|(w, s)| w * s.u.dot(&s.u, mesh))
            .sum::<f64>()
            .sqrt()
    }

    /// Max over samples of the L²(Ω) distance between displacements.
    pub fn max_l2_gap(&self, other: &Self, mesh: &DomainMesh) -> f64 {
        self.states
            .iter()
            .zip(&other.states)
            .map(|(a, b)| {
                a.u.values
                    .iter()
                    .zip(&b.u.values)
                    .zip(mesh.weights())
                    .map(|((x, y), w)| w * (x - y) * (x - y))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }
}

enum Drive<'a> {
    Damped(&'a DampingField),
    Forced(&'a BoundaryTrace),
}

/// Whether [`solve_neumann_forced`] rejects or only logs incompatible data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CompatibilityPolicy {
    #[default]
    Enforce,
    Warn,
}

/// Leapfrog for the damped problem.
pub fn solve_damped(
    mesh: &DomainMesh,
    tg: &TimeGrid,
    b: &DampingField,
    init: &WaveState,
) -> Result<WaveTrajectory> {
    if b.values().len() != mesh.gamma1().len() {
        return Err(Error::Shape {
            what: "damping field",
            expected: mesh.gamma1().len(),
            found: b.values().len(),
        });
    }
    leapfrog(mesh, tg, init, Drive::Damped(b))
}

/// Leapfrog for the Neumann-forced problem `∂ν u = g` on Γ₁.
pub fn solve_neumann_forced(
    mesh: &DomainMesh,
    tg: &TimeGrid,
    g: &BoundaryTrace,
    init: &WaveState,
    policy: CompatibilityPolicy,
) -> Result<WaveTrajectory> {
    if g.sample_count() != tg.sample_count() || g.node_count() != mesh.gamma1().len() {
        return Err(Error::Shape {
            what: "Neumann forcing samples",
            expected: tg.sample_count() * mesh.gamma1().len(),
            found: g.values().len(),
        });
    }
    let (residual, tolerance) = compatibility_residual(mesh, &init.u, g.sample(0));
    if residual > tolerance {
        match policy {
            CompatibilityPolicy::Enforce => {
                return Err(Error::Compatibility {
                    residual,
                    tolerance,
                })
            }
            CompatibilityPolicy::Warn => log::warn!(
                "initial data incompatible with forcing: residual {residual:.3e} > {tolerance:.3e}"
            ),
        }
    }
    leapfrog(mesh, tg, init, Drive::Forced(g))
}

/// L²(Γ₁) size of `∂ν u⁰ - g(·,0)` and the tolerance it is held to.
///
/// `∂ν u⁰` uses the three-point one-sided stencil; the tolerance is
/// `1e-8 (1 + ‖g(·,0)‖)` plus twice that stencil's own truncation estimate
/// `(h²/3)|∂³u⁰|` (third difference along the normal), so smooth compatible
/// data pass at every resolution.
pub fn compatibility_residual(mesh: &DomainMesh, u0: &GridFunction, g0: &[f64]) -> (f64, f64) {
    let h = mesh.hx();
    let nx = mesh.nx();
    let u = &u0.values;
    let mut resid = Vec::with_capacity(g0.len());
    let mut allowance = Vec::with_capacity(g0.len());
    for (&node, &g) in mesh.gamma1().iter().zip(g0) {
        let (_, j) = mesh.ij(node);
        let at = |i: usize| u[mesh.index(i, j)];
        let d1 = (3.0 * at(nx) - 4.0 * at(nx - 1) + at(nx - 2)) / (2.0 * h);
        resid.push((d1 - g) * (d1 - g));
        let trunc = if nx >= 3 {
            let d3 = (at(nx) - 3.0 * at(nx - 1) + 3.0 * at(nx - 2) - at(nx - 3)) / (h * h * h);
            2.0 * h * h / 3.0 * d3.abs()
        } else {
            0.0
        };
        allowance.push(trunc * trunc);
    }
    let norm = |sq: &[f64]| {
        crate::domain::integrate_gamma1(sq, mesh)
            .unwrap_or(0.0)
            .sqrt()
    };
    let g_sq: Vec<f64> = g0.iter().map(|v| v * v).collect();
    (norm(&resid), 1e-8 * (1.0 + norm(&g_sq)) + norm(&allowance))
}

fn leapfrog(
    mesh: &DomainMesh,
    tg: &TimeGrid,
    init: &WaveState,
    drive: Drive<'_>,
) -> Result<WaveTrajectory> {
    tg.check_stability(mesh)?;
    if init.u.len() != mesh.node_count() || init.v.len() != mesh.node_count() {
        return Err(Error::Shape {
            what: "initial state",
            expected: mesh.node_count(),
            found: init.u.len(),
        });
    }
    if !init.u.is_in_v(mesh) {
        return Err(Error::InvalidArgument(
            "initial displacement must vanish on the Dirichlet boundary".into(),
        ));
    }
    let op = assemble_mixed_laplacian(mesh);
    let dofs = op.dofs();
    let mass = op.mass();
    let dt = tg.dt();
    let dt2 = dt * dt;
    let n_nodes = mesh.node_count();

    // β = b s dt / (2 M) on Γ₁, zero elsewhere.
    let mut beta = vec![0.0; n_nodes];
    if let Drive::Damped(b) = drive {
        for (&node, &bv) in mesh.gamma1().iter().zip(b.values()) {
            beta[node] = bv * op.boundary_weight()[node] * dt / (2.0 * mass[node]);
        }
    }
    let forcing = |n: usize, acc: &mut [f64]| {
        if let Drive::Forced(g) = drive {
            for (&node, &gv) in mesh.gamma1().iter().zip(g.sample(n)) {
                acc[node] += op.boundary_weight()[node] * gv / mass[node];
            }
        }
    };
    let accel = |u: &[f64], n: usize| {
        let mut acc = op.apply(u);
        forcing(n, &mut acc);
        acc
    };

    let scale = 1.0
        + init.u.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
        + tg.tau() * init.v.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
        + match drive {
            Drive::Forced(g) => tg.tau() * g.max_abs(),
            Drive::Damped(_) => 0.0,
        };
    let limit = 1e8 * scale;
    let check = |u: &[f64], step: usize| -> Result<()> {
        if u.iter().any(|v| !v.is_finite() || v.abs() > limit) {
            return Err(Error::BlowUp {
                step,
                time: tg.time(step),
            });
        }
        Ok(())
    };

    let mut us: Vec<Vec<f64>> = Vec::with_capacity(tg.sample_count());
    us.push(init.u.values.clone());
    let a0 = accel(&init.u.values, 0);
    let mut u1 = vec![0.0; n_nodes];
    for &k in dofs {
        u1[k] = init.u.values[k] + (1.0 - beta[k]) * dt * init.v.values[k] + 0.5 * dt2 * a0[k];
    }
    check(&u1, 1)?;
    us.push(u1);
    for n in 1..tg.n_steps() {
        let a = accel(&us[n], n);
        let mut next = vec![0.0; n_nodes];
        let (cur, prev) = (&us[n], &us[n - 1]);
        for &k in dofs {
            next[k] = (2.0 * cur[k] - (1.0 - beta[k]) * prev[k] + dt2 * a[k]) / (1.0 + beta[k]);
        }
        check(&next, n + 1)?;
        us.push(next);
    }

    let states = reconstruct_velocity(mesh, tg, &init.v, us);
    Ok(WaveTrajectory::from_states(mesh, *tg, states))
}

/// Velocities by centered differences inside, the given `v⁰` at `t = 0` and a
/// second-order backward difference at `t = τ`.
fn reconstruct_velocity(
    mesh: &DomainMesh,
    tg: &TimeGrid,
    v0: &GridFunction,
    us: Vec<Vec<f64>>,
) -> Vec<WaveState> {
    let dt = tg.dt();
    let last = us.len() - 1;
    let mut vs: Vec<Vec<f64>> = Vec::with_capacity(us.len());
    vs.push(v0.values.clone());
    for n in 1..last {
        vs.push(
            us[n + 1]
                .iter()
                .zip(&us[n - 1])
                .map(|(a, b)| (a - b) / (2.0 * dt))
                .collect(),
        );
    }
    vs.push(
        (0..mesh.node_count())
            .map(|k| (3.0 * us[last][k] - 4.0 * us[last - 1][k] + us[last - 2][k]) / (2.0 * dt))
            .collect(),
    );
    us.into_iter()
        .zip(vs)
        .map(|(u, v)| WaveState {
            u: GridFunction { values: u },
            v: GridFunction { values: v },
        })
        .collect()
}

/// Spectral solution of the Neumann-forced problem.
///
/// With `G(t)` the harmonic lifting of `g(t)`, `v = u - G` satisfies the
/// homogeneous-Neumann problem with source `-G''` and initial data
/// `(u⁰ - G(0), v⁰ - G'(0))`. Each mode is advanced by its exact Duhamel
/// formula with the convolution integral taken by the trapezoid rule.
pub fn duhamel_spectral_solve(
    basis: &EigenBasis,
    tg: &TimeGrid,
    g: &BoundaryTrace,
    init: &WaveState,
    mesh: &DomainMesh,
) -> Result<WaveTrajectory> {
    if g.sample_count() != tg.sample_count() {
        return Err(Error::Shape {
            what: "forcing samples",
            expected: tg.sample_count(),
            found: g.sample_count(),
        });
    }
    let lift = extend_time_dependent(mesh, g)?;

    let u1: Vec<f64> = sub(&init.u.values, &lift.g[0].values);
    let v1: Vec<f64> = sub(&init.v.values, &lift.g_dot[0].values);
    let a0 = basis.project(&u1, mesh);
    let b0 = basis.project(&v1, mesh);
    check_capture("initial displacement", &a0, &u1, mesh)?;
    check_capture("initial velocity", &b0, &v1, mesh)?;

    // Modal source F_k(t) = -⟨G''(t), φ_k⟩.
    let forcing: Vec<Vec<f64>> = lift
        .g_ddot
        .iter()
        .map(|gdd| {
            basis
                .project(&gdd.values, mesh)
                .into_iter()
                .map(|c| -c)
                .collect()
        })
        .collect();
    {
        let tw = tg.weights();
        let total: f64 = lift
            .g_ddot
            .iter()
            .zip(&tw)
            .map(|(f, w)| w * f.dot(f, mesh))
            .sum();
        let captured: f64 = forcing
            .iter()
            .zip(&tw)
            .map(|(c, w)| w * c.iter().map(|x| x * x).sum::<f64>())
            .sum();
        capture_ok("boundary forcing", captured, total)?;
    }

    let (coeff, coeff_dot) = modal_duhamel(basis, tg, &a0, &b0, &forcing);
    let states = synthesize(basis, &coeff, &coeff_dot, |n| {
        (lift.g[n].values.clone(), lift.g_dot[n].values.clone())
    });
    Ok(WaveTrajectory::from_states(mesh, *tg, states))
}

/// Spectral solution of the Neumann-forced problem with the boundary flux
/// entering each mode directly, `a_k'' + λ_k a_k = ∫_Γ₁ g φ_k`.
///
/// Unlike [`duhamel_spectral_solve`] this never differentiates `g` in time,
/// so it stays accurate when `g` has a kink, as the damped flux `-b ∂_t u`
/// does for data that violates the second-order compatibility condition.
/// The projection of the boundary functional is exact only in the full
/// discrete basis; a truncated basis fails the capture check.
pub fn duhamel_boundary_solve(
    basis: &EigenBasis,
    tg: &TimeGrid,
    g: &BoundaryTrace,
    init: &WaveState,
    mesh: &DomainMesh,
) -> Result<WaveTrajectory> {
    if g.sample_count() != tg.sample_count() || g.node_count() != mesh.gamma1().len() {
        return Err(Error::Shape {
            what: "forcing samples",
            expected: tg.sample_count() * mesh.gamma1().len(),
            found: g.values().len(),
        });
    }
    let a0 = basis.project(&init.u.values, mesh);
    let b0 = basis.project(&init.v.values, mesh);
    check_capture("initial displacement", &a0, &init.u.values, mesh)?;
    check_capture("initial velocity", &b0, &init.v.values, mesh)?;

    let mass = mesh.weights();
    let forcing: Vec<Vec<f64>> = (0..tg.sample_count())
        .map(|n| {
            let gn = g.sample(n);
            basis
                .phis()
                .iter()
                .map(|phi| {
                    mesh.gamma1()
                        .iter()
                        .zip(mesh.gamma1_weights())
                        .zip(gn)
                        .map(|((&node, w), gv)| w * gv * phi.values[node])
                        .sum()
                })
                .collect()
        })
        .collect();
    {
        // Dual norm of the boundary functional against what the basis sees.
        let tw = tg.weights();
        let mut total = 0.0;
        let mut captured = 0.0;
        for (n, w) in tw.iter().enumerate() {
            let gn = g.sample(n);
            total += w * mesh
                .gamma1()
                .iter()
                .zip(mesh.gamma1_weights())
                .zip(gn)
                .map(|((&node, bw), gv)| (bw * gv).powi(2) / mass[node])
                .sum::<f64>();
            captured += w * forcing[n].iter().map(|c| c * c).sum::<f64>();
        }
        capture_ok("boundary flux", captured, total)?;
    }

    let (coeff, coeff_dot) = modal_duhamel(basis, tg, &a0, &b0, &forcing);
    let nodes = mesh.node_count();
    let states = synthesize(basis, &coeff, &coeff_dot, |_| {
        (vec![0.0; nodes], vec![0.0; nodes])
    });
    Ok(WaveTrajectory::from_states(mesh, *tg, states))
}

/// Exact per-mode Duhamel integration of `a'' + λ a = f(t)` with the source
/// sampled on the time grid and integrated by running trapezoid sums.
fn modal_duhamel(
    basis: &EigenBasis,
    tg: &TimeGrid,
    a0: &[f64],
    b0: &[f64],
    forcing: &[Vec<f64>],
) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let ns = tg.sample_count();
    let nk = basis.count();
    let times = tg.times();
    let dt = tg.dt();
    let mut coeff = vec![vec![0.0; nk]; ns];
    let mut coeff_dot = vec![vec![0.0; nk]; ns];
    for k in 0..nk {
        let omega = basis.lambda(k).max(0.0).sqrt();
        // Running trapezoid sums of cos(ωs)F(s) and sin(ωs)F(s) (or F and sF when ω = 0).
        let (mut c_acc, mut s_acc) = (0.0, 0.0);
        let mut prev: Option<(f64, f64)> = None;
        for n in 0..ns {
            let t = times[n];
            let f = forcing[n][k];
            let cur = if omega > 1e-12 {
                ((omega * t).cos() * f, (omega * t).sin() * f)
            } else {
                (f, t * f)
            };
            if let Some(p) = prev {
                c_acc += 0.5 * dt * (p.0 + cur.0);
                s_acc += 0.5 * dt * (p.1 + cur.1);
            }
            prev = Some(cur);
            let (a, adot) = if omega > 1e-12 {
                let (sn, cs) = (omega * t).sin_cos();
                let conv_sin = sn * c_acc - cs * s_acc;
                let conv_cos = cs * c_acc + sn * s_acc;
                (
                    cs * a0[k] + sn / omega * b0[k] + conv_sin / omega,
                    -omega * sn * a0[k] + cs * b0[k] + conv_cos,
                )
            } else {
                (a0[k] + t * b0[k] + t * c_acc - s_acc, b0[k] + c_acc)
            };
            coeff[n][k] = a;
            coeff_dot[n][k] = adot;
        }
    }

    (coeff, coeff_dot)
}

fn synthesize(
    basis: &EigenBasis,
    coeff: &[Vec<f64>],
    coeff_dot: &[Vec<f64>],
    base: impl Fn(usize) -> (Vec<f64>, Vec<f64>),
) -> Vec<WaveState> {
    (0..coeff.len())
        .map(|n| {
            let (mut u, mut v) = base(n);
            for k in 0..basis.count() {
                let phi = &basis.phi(k).values;
                let (a, ad) = (coeff[n][k], coeff_dot[n][k]);
                for (idx, p) in phi.iter().enumerate() {
                    u[idx] += a * p;
                    v[idx] += ad * p;
                }
            }
            WaveState {
                u: GridFunction { values: u },
                v: GridFunction { values: v },
            }
        })
        .collect()
}
fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn check_capture(what: &'static str, coeffs: &[f64], f: &[f64], mesh: &DomainMesh) -> Result<()> {
    let total = mesh.integrate(&f.iter().map(|v| v * v).collect::<Vec<_>>());
    let captured: f64 = coeffs.iter().map(|c| c * c).sum();
    capture_ok(what, captured, total)
}

fn capture_ok(what: &'static str, captured: f64, total: f64) -> Result<()> {
    if total <= 1e-300 {
        return Ok(());
    }
    let share = captured / total;
    debug!("spectral basis captures {share:.8} of the {what} energy");
    if share < SPECTRAL_CAPTURE {
        return Err(Error::InsufficientBasis {
            what,
            captured: share,
            required: SPECTRAL_CAPTURE,
        });
    }
    Ok(())
}

/// Second-order derivative of a sampled line at index `i`.
fn line_derivative(f: impl Fn(usize) -> f64, len: usize, i: usize, h: f64) -> f64 {
    let last = len - 1;
    if i == 0 {
        (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * h)
    } else if i == last {
        (3.0 * f(last) - 4.0 * f(last - 1) + f(last - 2)) / (2.0 * h)
    } else {
        (f(i + 1) - f(i - 1)) / (2.0 * h)
    }
}

/// `E = ½ ∫ (v² + |∇u|²)` by the trapezoid rule, with centered differences
/// inside and one-sided second-order differences on the boundary.
pub fn energy(state: &WaveState, mesh: &DomainMesh) -> f64 {
    let u = &state.u.values;
    let v = &state.v.values;
    let w = mesh.weights();
    let mut total = 0.0;
    if mesh.dim() == 1 {
        let len = mesh.nx() + 1;
        for i in 0..len {
            let ux = line_derivative(|k| u[k], len, i, mesh.hx());
            total += w[i] * (v[i] * v[i] + ux * ux);
        }
    } else {
        let (lx, ly) = (mesh.nx() + 1, mesh.ny() + 1);
        for j in 0..ly {
            for i in 0..lx {
                let idx = mesh.index(i, j);
                let ux = line_derivative(|k| u[mesh.index(k, j)], lx, i, mesh.hx());
                let uy = line_derivative(|k| u[mesh.index(i, k)], ly, j, mesh.hy());
                total += w[idx] * (v[idx] * v[idx] + ux * ux + uy * uy);
            }
        }
    }
    0.5 * total
}

/// Max over time of `|E(t) - E(0) + ∫₀ᵗ ∫_Γ₁ b v²|`, normalized by `E(0)`.
pub fn dissipation_identity_residual(
    traj: &WaveTrajectory,
    b: &DampingField,
    mesh: &DomainMesh,
) -> f64 {
    let e = traj.energy();
    let e0 = e[0];
    let rate: Vec<f64> = traj
        .states()
        .iter()
        .map(|s| {
            mesh.gamma1()
                .iter()
                .zip(b.values())
                .zip(mesh.gamma1_weights())
                .map(|((&node, bv), sw)| bv * sw * s.v.values[node] * s.v.values[node])
                .sum()
        })
        .collect();
    let dt = traj.time_grid().dt();
    let mut dissipated = 0.0;
    let mut worst = (e[0] - e0).abs();
    for n in 1..e.len() {
        dissipated += 0.5 * dt * (rate[n - 1] + rate[n]);
        worst = worst.max((e[n] - e0 + dissipated).abs());
    }
    if e0 > 0.0 {
        worst / e0
    } else {
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::eigen_decompose;
    use std::f64::consts::PI;

    fn setup(n: usize, tau: f64) -> (DomainMesh, TimeGrid, EigenBasis) {
        let mesh = DomainMesh::interval(n).unwrap();
        let tg = TimeGrid::for_mesh(&mesh, tau, 0.9).unwrap();
        let basis = eigen_decompose(&mesh, n).unwrap();
        (mesh, tg, basis)
    }

    fn mode_state(basis: &EigenBasis, k: usize, mesh: &DomainMesh) -> WaveState {
        WaveState {
            u: basis.phi(k).clone(),
            v: GridFunction::zeros(mesh),
        }
    }

    #[test]
    fn undamped_mode_is_standing_wave() {
        let (mesh, tg, basis) = setup(128, 2.0);
        let traj = solve_damped(
            &mesh,
            &tg,
            &DampingField::zeros(&mesh),
            &mode_state(&basis, 0, &mesh),
        )
        .unwrap();
        let om = basis.lambda(0).sqrt();
        let mut worst = 0.0f64;
        for (n, s) in traj.states().iter().enumerate() {
            let c = (om * tg.time(n)).cos();
            for (a, p) in s.u.values.iter().zip(&basis.phi(0).values) {
                worst = worst.max((a - c * p).abs());
            }
        }
        assert!(worst < 1e-4, "{worst}");
    }

    #[test]
    fn zero_data_stays_zero() {
        let (mesh, tg, _) = setup(32, 1.0);
        let b = DampingField::constant(&mesh, 0.7).unwrap();
        let traj = solve_damped(&mesh, &tg, &b, &WaveState::zeros(&mesh)).unwrap();
        assert!(traj
            .states()
            .iter()
            .all(|s| s.u.values.iter().all(|&v| v == 0.0)));
        let g = BoundaryTrace::zeros(&mesh, &tg);
        let f = solve_neumann_forced(
            &mesh,
            &tg,
            &g,
            &WaveState::zeros(&mesh),
            CompatibilityPolicy::Enforce,
        )
        .unwrap();
        assert!(f
            .states()
            .iter()
            .all(|s| s.u.values.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn forced_with_zero_data_matches_undamped() {
        let (mesh, tg, basis) = setup(64, 1.5);
        let init = mode_state(&basis, 2, &mesh);
        let a = solve_damped(&mesh, &tg, &DampingField::zeros(&mesh), &init).unwrap();
        let g = BoundaryTrace::zeros(&mesh, &tg);
        let b = solve_neumann_forced(&mesh, &tg, &g, &init, CompatibilityPolicy::Enforce).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn damping_dissipates_and_self_converges() {
        let run = |n: usize| {
            let (mesh, tg, basis) = setup(n, 2.0);
            let b = DampingField::constant(&mesh, 0.5).unwrap();
            let traj = solve_damped(&mesh, &tg, &b, &mode_state(&basis, 0, &mesh)).unwrap();
            (traj.energy()[0], *traj.energy().last().unwrap())
        };
        let (e0, et) = run(128);
        assert!(et < e0);
        let (_, fine) = run(256);
        assert!((et - fine).abs() / fine < 0.01);
    }

    #[test]
    fn compatibility_is_enforced() {
        let (mesh, tg, _) = setup(32, 1.0);
        // u⁰ = x has ∂ν u⁰ = 1 but g(·,0) = 0.
        let init = WaveState {
            u: GridFunction::from_fn(&mesh, |x, _| x),
            v: GridFunction::zeros(&mesh),
        };
        let g = BoundaryTrace::zeros(&mesh, &tg);
        assert!(matches!(
            solve_neumann_forced(&mesh, &tg, &g, &init, CompatibilityPolicy::Enforce),
            Err(Error::Compatibility { .. })
        ));
        assert!(solve_neumann_forced(&mesh, &tg, &g, &init, CompatibilityPolicy::Warn).is_ok());
        let g1 = BoundaryTrace::from_fn(&mesh, &tg, |_, _| 1.0);
        assert!(solve_neumann_forced(&mesh, &tg, &g1, &init, CompatibilityPolicy::Enforce).is_ok());
    }

    #[test]
    fn cfl_violation_rejected() {
        let mesh = DomainMesh::rectangle(16, 16).unwrap();
        let tg = TimeGrid::for_mesh(&mesh, 1.0, 0.95).unwrap();
        let r = solve_damped(
            &mesh,
            &tg,
            &DampingField::zeros(&mesh),
            &WaveState::zeros(&mesh),
        );
        assert!(matches!(r, Err(Error::Cfl { .. })));
    }

    #[test]
    fn rejects_data_outside_v() {
        let (mesh, tg, _) = setup(16, 1.0);
        let init = WaveState {
            u: GridFunction {
                values: vec![1.0; 17],
            },
            v: GridFunction::zeros(&mesh),
        };
        assert!(solve_damped(&mesh, &tg, &DampingField::zeros(&mesh), &init).is_err());
        assert!(DampingField::new(&mesh, vec![-0.1]).is_err());
    }

    #[test]
    fn spectral_single_mode_formulas() {
        let (mesh, tg, basis) = setup(64, 2.0);
        let g = BoundaryTrace::zeros(&mesh, &tg);
        let om = basis.lambda(0).sqrt();
        let cos_run =
            duhamel_spectral_solve(&basis, &tg, &g, &mode_state(&basis, 0, &mesh), &mesh).unwrap();
        let sin_init = WaveState {
            u: GridFunction::zeros(&mesh),
            v: basis.phi(0).clone(),
        };
        let sin_run = duhamel_spectral_solve(&basis, &tg, &g, &sin_init, &mesh).unwrap();
        for n in 0..tg.sample_count() {
            let t = tg.time(n);
            for (k, p) in basis.phi(0).values.iter().enumerate() {
                assert!((cos_run.state(n).u.values[k] - (om * t).cos() * p).abs() < 1e-12);
                assert!((sin_run.state(n).u.values[k] - (om * t).sin() / om * p).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn spectral_and_leapfrog_agree_under_forcing() {
        let gap = |n: usize| {
            let (mesh, tg, basis) = setup(n, 2.0);
            let g = BoundaryTrace::from_fn(&mesh, &tg, |t, _| (3.0 * t).sin());
            let init = WaveState::zeros(&mesh);
            let fd =
                solve_neumann_forced(&mesh, &tg, &g, &init, CompatibilityPolicy::Enforce).unwrap();
            let sp = duhamel_spectral_solve(&basis, &tg, &g, &init, &mesh).unwrap();
            fd.max_l2_gap(&sp, &mesh)
        };
        let (g1, g2) = (gap(64), gap(128));
        assert!(g2 < 1e-3);
        assert!((g1 / g2).log2() > 1.8, "{g1} {g2}");
    }

    #[test]
    fn solvers_are_linear() {
        let (mesh, tg, basis) = setup(32, 1.0);
        let g1 = BoundaryTrace::from_fn(&mesh, &tg, |t, _| (2.0 * t).sin());
        let g2 = BoundaryTrace::from_fn(&mesh, &tg, |t, _| t * t);
        let z = WaveState::zeros(&mesh);
        let sp = |g: &BoundaryTrace| duhamel_spectral_solve(&basis, &tg, g, &z, &mesh).unwrap();
        let fd = |g: &BoundaryTrace| {
            solve_neumann_forced(&mesh, &tg, g, &z, CompatibilityPolicy::Enforce).unwrap()
        };
        for solve in [&sp as &dyn Fn(&BoundaryTrace) -> WaveTrajectory, &fd] {
            let (a, b, s) = (solve(&g1), solve(&g2), solve(&g1.add(&g2)));
            let sum = WaveTrajectory::combine(&mesh, &[(1.0, &a), (1.0, &b)]);
            assert!(s.max_l2_gap(&sum, &mesh) < 1e-12);
        }
        let b = DampingField::constant(&mesh, 0.3).unwrap();
        let i1 = mode_state(&basis, 0, &mesh);
        let i2 = mode_state(&basis, 3, &mesh);
        let both = WaveState {
            u: GridFunction {
                values: i1
                    .u
                    .values
                    .iter()
                    .zip(&i2.u.values)
                    .map(|(a, b)| a + b)
                    .collect(),
            },
            v: GridFunction::zeros(&mesh),
        };
        let r1 = solve_damped(&mesh, &tg, &b, &i1).unwrap();
        let r2 = solve_damped(&mesh, &tg, &b, &i2).unwrap();
        let r12 = solve_damped(&mesh, &tg, &b, &both).unwrap();
        let sum = WaveTrajectory::combine(&mesh, &[(1.0, &r1), (1.0, &r2)]);
        assert!(r12.max_l2_gap(&sum, &mesh) < 1e-12);
    }

    #[test]
    fn energy_examples() {
        let (mesh, _, basis) = setup(512, 1.0);
        let e = energy(&mode_state(&basis, 0, &mesh), &mesh);
        assert!((e - PI * PI / 8.0).abs() < 1e-4, "{e}");
        assert_eq!(energy(&WaveState::zeros(&mesh), &mesh), 0.0);
        let s = WaveState {
            u: basis.phi(1).clone(),
            v: basis.phi(2).clone(),
        };
        assert_eq!(energy(&s.scaled(2.0), &mesh), 4.0 * energy(&s, &mesh));
    }

    #[test]
    fn conservation_and_time_reversal() {
        let (mesh, tg, basis) = setup(128, 2.0);
        let init = WaveState {
            u: basis.phi(0).clone(),
            v: basis.phi(1).scaled(0.5),
        };
        let zero = DampingField::zeros(&mesh);
        let fwd = solve_damped(&mesh, &tg, &zero, &init).unwrap();
        assert!(dissipation_identity_residual(&fwd, &zero, &mesh) < 1e-3);
        let back_init = WaveState {
            u: fwd.last().u.clone(),
            v: fwd.last().v.scaled(-1.0),
        };
        let back = solve_damped(&mesh, &tg, &zero, &back_init).unwrap();
        let diff: Vec<f64> = back
            .last()
            .u
            .values
            .iter()
            .zip(&init.u.values)
            .map(|(a, b)| a - b)
            .collect();
        let err = GridFunction { values: diff }.l2_norm(&mesh);
        assert!(err < 1e-3, "{err}");
    }

    #[test]
    fn more_damping_never_adds_energy() {
        let (mesh, tg, basis) = setup(64, 2.0);
        let init = mode_state(&basis, 0, &mesh);
        let finals: Vec<f64> = [0.0, 0.25, 0.5, 1.0]
            .iter()
            .map(|&b| {
                let field = DampingField::constant(&mesh, b).unwrap();
                *solve_damped(&mesh, &tg, &field, &init)
                    .unwrap()
                    .energy()
                    .last()
                    .unwrap()
            })
            .collect();
        for w in finals.windows(2) {
            assert!(w[1] <= w[0], "{finals:?}");
        }
    }

    #[test]
    fn rectangle_damped_run_dissipates() {
        let mesh = DomainMesh::rectangle(24, 24).unwrap();
        let tg = TimeGrid::for_mesh(&mesh, 1.0, 0.6).unwrap();
        let basis = eigen_decompose(&mesh, 4).unwrap();
        let b = DampingField::from_fn(&mesh, |y| 0.3 + 0.2 * (PI * y).sin());
        let traj = solve_damped(&mesh, &tg, &b, &mode_state(&basis, 0, &mesh)).unwrap();
        let e = traj.energy();
        assert!(e.last().unwrap() < &e[0]);
        assert!(dissipation_identity_residual(&traj, &b, &mesh) < 1e-2);
    }

    #[test]
    fn rectangle_spectral_matches_leapfrog() {
        let mesh = DomainMesh::rectangle(16, 16).unwrap();
        let tg = TimeGrid::for_mesh(&mesh, 1.0, 0.6).unwrap();
        let basis = eigen_decompose(&mesh, mesh.dofs().len()).unwrap();
        let g = BoundaryTrace::from_fn(&mesh, &tg, |t, p| (2.0 * t).sin() * (PI * p[1]).sin());
        let z = WaveState::zeros(&mesh);
        let fd = solve_neumann_forced(&mesh, &tg, &g, &z, CompatibilityPolicy::Enforce).unwrap();
        let sp = duhamel_spectral_solve(&basis, &tg, &g, &z, &mesh).unwrap();
        assert!(fd.max_l2_gap(&sp, &mesh) < 2e-3);
    }

    #[test]
    fn truncated_basis_is_refused() {
        let (mesh, tg, _) = setup(32, 1.0);
        let small = eigen_decompose(&mesh, 2).unwrap();
        let g = BoundaryTrace::from_fn(&mesh, &tg, |t, _| (3.0 * t).sin());
        let r = duhamel_spectral_solve(&small, &tg, &g, &WaveState::zeros(&mesh), &mesh);
        assert!(matches!(r, Err(Error::InsufficientBasis { .. })));
    }
}
