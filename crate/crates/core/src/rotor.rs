//! Free asymmetric top built on the rotor model algebra `[ℝ⁶]so(3)`.
//!
//! Basis order of the algebra is `(ℑ₁₁, ℑ₂₂, ℑ₃₃, ℑ₂₃, ℑ₁₃, ℑ₁₂, L₁, L₂, L₃)`.
//! An orientation `Ω` maps space to body axes, so that the space-frame
//! inertia is `ℑ = ΩᵀĪΩ` and the space-frame angular momentum is
//! `ℒ = ΩᵀL̄`. In the sharp-orientation limit the energy is
//! `ℋ = ½ Σ_m L̄_m²/Ī_m`, the zero-point constant being irrelevant for the
//! motion.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use serde::Serialize;

use crate::algebra::{lie_poisson_rhs, orbit_analysis, Density, StructureConstants};
use crate::error::{Error, Result};
use crate::linalg::{levi_civita, polar_project, skew};
use crate::ode::{dopri5, Control, OdeOptions};

pub const ORIENTATION_TOL: f64 = 1e-10;
/// Smallest accepted ratio between the smallest and largest moment.
pub const MOMENT_CONDITION_MIN: f64 = 1e-8;
/// Orientations closer than this to orthogonal are left untouched.
const PROJECTION_SKIP: f64 = 1e-14;

/// Algebra index of the inertia component `ℑ_pq` (0-based, either order).
pub fn inertia_index(p: usize, q: usize) -> usize {
    match (p.min(q), p.max(q)) {
        (0, 0) => 0,
        (1, 1) => 1,
        (2, 2) => 2,
        (1, 2) => 3,
        (0, 2) => 4,
        (0, 1) => 5,
        _ => panic!("inertia index out of range: ({p}, {q})"),
    }
}

/// Algebra index of `L_k` (0-based).
pub fn angular_momentum_index(k: usize) -> usize {
    assert!(k < 3);
    6 + k
}

/// Structure constants of the rotor model algebra:
/// `[ℑ, ℑ] = 0`, `[L_i, L_j] = i ε_ijk L_k`,
/// `[ℑ_ij, L_k] = i Σ_l (ε_lik ℑ_lj + ε_ljk ℑ_li)`.
pub fn rma_structure_constants() -> StructureConstants {
    let n = 9;
    let mut c = vec![0.0; n * n * n];
    let idx = |a: usize, b: usize, k: usize| (a * n + b) * n + k;
    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                let k = 3 - i - j;
                c[idx(6 + i, 6 + j, 6 + k)] = levi_civita(i, j, k);
            }
        }
    }
    let pairs = [(0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1)];
    for (a, &(i, j)) in pairs.iter().enumerate() {
        for k in 0..3 {
            let b = angular_momentum_index(k);
            for l in 0..3 {
                let e1 = levi_civita(l, i, k);
                if e1 != 0.0 {
                    c[idx(a, b, inertia_index(l, j))] += e1;
                }
                let e2 = levi_civita(l, j, k);
                if e2 != 0.0 {
                    c[idx(a, b, inertia_index(l, i))] += e2;
                }
            }
            for m in 0..n {
                c[idx(b, a, m)] = -c[idx(a, b, m)];
            }
        }
    }
    StructureConstants::new(n, c).expect("rotor model algebra is a Lie algebra")
}

/// Principal (intrinsic) moments of inertia `Ī₁, Ī₂, Ī₃`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntrinsicMoments(pub [f64; 3]);

impl IntrinsicMoments {
    pub fn new(i1: f64, i2: f64, i3: f64) -> Result<Self> {
        let m = [i1, i2, i3];
        if m.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Validation(format!("moments of inertia must be positive, got {m:?}")));
        }
        let lo = m.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = m.iter().cloned().fold(0.0, f64::max);
        if lo / hi < MOMENT_CONDITION_MIN {
            return Err(Error::Validation(format!("moments {m:?} are too badly conditioned to invert")));
        }
        Ok(Self(m))
    }

    /// Warning text when two moments coincide (a symmetric top).
    pub fn distinctness_warning(&self) -> Option<String> {
        let m = self.0;
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.max(b);
        if close(m[0], m[1]) || close(m[1], m[2]) || close(m[0], m[2]) {
            Some(format!("moments {m:?} are not pairwise distinct: symmetric top"))
        } else {
            None
        }
    }

    /// For a symmetric top, the axis whose moment differs from the other
    /// two (the figure axis).
    pub fn symmetric_axis(&self) -> Option<usize> {
        let m = self.0;
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.max(b);
        (0..3).find(|&i| {
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            close(m[j], m[k]) && !close(m[i], m[j])
        })
    }

    pub fn diag(&self) -> Matrix3<f64> {
        Matrix3::from_diagonal(&Vector3::from(self.0))
    }

    /// Body angular velocity `ω̄_m = L̄_m / Ī_m`.
    pub fn angular_velocity(&self, lbar: &Vector3<f64>) -> Vector3<f64> {
        Vector3::new(lbar[0] / self.0[0], lbar[1] / self.0[1], lbar[2] / self.0[2])
    }
}

/// Proper rotation matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Orientation(Matrix3<f64>);

impl Orientation {
    pub fn new(r: Matrix3<f64>) -> Result<Self> {
        let defect = (r.transpose() * r - Matrix3::identity()).amax();
        let det = r.determinant();
        if defect > ORIENTATION_TOL || (det - 1.0).abs() > ORIENTATION_TOL {
            return Err(Error::Validation(format!(
                "not a rotation: |RᵀR − 1|max = {defect:.3e}, det R = {det}"
            )));
        }
        Ok(Self(r))
    }

    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    /// Rotation by `angle` about coordinate axis `axis` (0-based).
    pub fn axis_rotation(axis: usize, angle: f64) -> Self {
        let mut v = Vector3::zeros();
        v[axis] = angle;
        Self(nalgebra::Rotation3::new(v).into_inner())
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn orthogonality_defect(&self) -> f64 {
        (self.0.transpose() * self.0 - Matrix3::identity()).amax()
    }
}

/// Orientation plus body-frame angular momentum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotorState {
    pub omega: Orientation,
    pub lbar: Vector3<f64>,
}

impl RotorState {
    pub fn new(omega: Orientation, lbar: Vector3<f64>) -> Self {
        Self { omega, lbar }
    }

    /// Space-frame angular momentum `ℒ = ΩᵀL̄`.
    pub fn space_angular_momentum(&self) -> Vector3<f64> {
        self.omega.0.transpose() * self.lbar
    }

    /// The nine algebra coordinates `(ℑ(Ω), ℒ)`.
    pub fn density(&self, moments: &IntrinsicMoments) -> Density {
        let inertia = inertia_function(moments, &self.omega);
        let l = self.space_angular_momentum();
        let mut rho = vec![0.0; 9];
        for (p, q) in [(0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1)] {
            rho[inertia_index(p, q)] = inertia[(p, q)];
        }
        for k in 0..3 {
            rho[angular_momentum_index(k)] = l[k];
        }
        Density::new(rho)
    }

    fn to_vec(self) -> Vec<f64> {
        let mut y = Vec::with_capacity(12);
        y.extend(self.lbar.iter());
        for i in 0..3 {
            for j in 0..3 {
                y.push(self.omega.0[(i, j)]);
            }
        }
        y
    }

    fn from_slice(y: &[f64]) -> Self {
        Self {
            lbar: Vector3::new(y[0], y[1], y[2]),
            omega: Orientation(Matrix3::from_row_slice(&y[3..12])),
        }
    }
}

/// Symmetric matrix `Q` of the boost exponent `exp(i Σ Q_ij ℑ̂_ij)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoostParameters(Matrix3<f64>);

impl BoostParameters {
    pub fn new(q: Matrix3<f64>) -> Result<Self> {
        if (q - q.transpose()).amax() > 1e-12 * q.amax().max(1.0) {
            return Err(Error::Validation("boost matrix Q must be symmetric".into()));
        }
        Ok(Self(q))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }
}

/// `ℑ(Ω) = ΩᵀĪΩ`.
pub fn inertia_function(moments: &IntrinsicMoments, r: &Orientation) -> Matrix3<f64> {
    let m = r.0.transpose() * moments.diag() * r.0;
    (m + m.transpose()) * 0.5
}

/// Body angular momentum generated by the boost:
/// `ℒ̄_l = Σ_ij Q_ij (Ī_i − Ī_j) ε_ijl`.
pub fn lbar_from_q(moments: &IntrinsicMoments, q: &BoostParameters) -> Vector3<f64> {
    let ib = moments.0;
    Vector3::from_fn(|l, _| {
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                s += q.0[(i, j)] * (ib[i] - ib[j]) * levi_civita(i, j, l);
            }
        }
        s
    })
}

/// `ℋ = ½ Σ_m L̄_m² / Ī_m`.
pub fn classical_hamiltonian(moments: &IntrinsicMoments, state: &RotorState) -> f64 {
    body_energy(moments, &state.lbar)
}

fn body_energy(moments: &IntrinsicMoments, lbar: &Vector3<f64>) -> f64 {
    0.5 * (0..3).map(|m| lbar[m] * lbar[m] / moments.0[m]).sum::<f64>()
}

/// Space-frame form `½ ℒᵀ ℑ⁻¹ ℒ`.
pub fn space_frame_hamiltonian(inertia: &Matrix3<f64>, l: &Vector3<f64>) -> Result<f64> {
    let inv = checked_inverse(inertia)?;
    Ok(0.5 * l.dot(&(inv * l)))
}

fn checked_inverse(m: &Matrix3<f64>) -> Result<Matrix3<f64>> {
    let ev = m.symmetric_eigenvalues();
    let (lo, hi) = (ev.min(), ev.max());
    if !(lo > 0.0) || lo / hi < MOMENT_CONDITION_MIN {
        return Err(Error::Numerical(format!("inertia tensor not safely invertible (eigenvalues {ev:?})")));
    }
    m.try_inverse()
        .ok_or_else(|| Error::Numerical("inertia tensor inversion failed".into()))
}

/// Time derivatives `(Ω̇, L̄̇)` of the free top: `L̄̇ = L̄ × ω̄` and
/// `Ω̇ = −skew(ω̄) Ω`, the latter keeping `ℒ = ΩᵀL̄` fixed.
pub fn euler_rhs(moments: &IntrinsicMoments, state: &RotorState) -> (Matrix3<f64>, Vector3<f64>) {
    let w = moments.angular_velocity(&state.lbar);
    (-skew(&w) * state.omega.0, state.lbar.cross(&w))
}

/// `2π / |ω̄|`, the rotation period set by the initial angular velocity.
pub fn characteristic_period(moments: &IntrinsicMoments, lbar: &Vector3<f64>) -> Result<f64> {
    let w = moments.angular_velocity(lbar).norm();
    if w == 0.0 {
        return Err(Error::InvalidArgument("a resting top has no characteristic period".into()));
    }
    Ok(2.0 * PI / w)
}

/// Sampled free-top trajectory.
#[derive(Debug, Clone)]
pub struct RotorTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<RotorState>,
    pub energies: Vec<f64>,
    pub lsq: Vec<f64>,
}

impl RotorTrajectory {
    pub fn max_energy_drift(&self) -> f64 {
        max_dev(&self.energies)
    }

    pub fn max_lsq_drift(&self) -> f64 {
        max_dev(&self.lsq)
    }

    pub fn max_orthogonality_defect(&self) -> f64 {
        self.states.iter().map(|s| s.omega.orthogonality_defect()).fold(0.0, f64::max)
    }

    /// CSV with header `t,L1,L2,L3,R11..R33,H,Lsq`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,L1,L2,L3,R11,R12,R13,R21,R22,R23,R31,R32,R33,H,Lsq\n");
        for (((t, st), h), l2) in self.times.iter().zip(&self.states).zip(&self.energies).zip(&self.lsq) {
            let mut row = vec![t.to_string()];
            row.extend(st.to_vec().iter().map(|v| v.to_string()));
            row.push(h.to_string());
            row.push(l2.to_string());
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }
}

fn max_dev(v: &[f64]) -> f64 {
    let v0 = v.first().copied().unwrap_or(0.0);
    v.iter().fold(0.0, |m, x| m.max((x - v0).abs()))
}

/// Analytic precession rate `L̄₃(1/Ī₃ − 1/I⊥)` of the body angular momentum
/// about the figure axis of a symmetric top (figure axis relabelled as 3).
pub fn precession_rate(moments: &IntrinsicMoments, lbar: &Vector3<f64>) -> Result<f64> {
    let a = moments
        .symmetric_axis()
        .ok_or_else(|| Error::InvalidArgument("precession rate needs a symmetric top".into()))?;
    let perp = moments.0[(a + 1) % 3];
    Ok(lbar[a] * (1.0 / moments.0[a] - 1.0 / perp))
}

/// Precession rate read off a sampled symmetric-top trajectory: the
/// transverse components turn as `(L̄ₚ, L̄_q) ↦ R(−λt)(L̄ₚ, L̄_q)` with
/// `(p, q)` cyclic after the figure axis. Samples must be dense enough
/// that the angle moves by less than π between them.
pub fn measured_precession_rate(moments: &IntrinsicMoments, traj: &RotorTrajectory) -> Result<f64> {
    let a = moments
        .symmetric_axis()
        .ok_or_else(|| Error::InvalidArgument("precession rate needs a symmetric top".into()))?;
    let (p, q) = ((a + 1) % 3, (a + 2) % 3);
    if traj.times.len() < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    let angle = |s: &RotorState| s.lbar[q].atan2(s.lbar[p]);
    let mut total = 0.0;
    let mut prev = angle(&traj.states[0]);
    for s in &traj.states[1..] {
        let cur = angle(s);
        let mut d = cur - prev;
        d -= 2.0 * PI * (d / (2.0 * PI)).round();
        total += d;
        prev = cur;
    }
    let span = traj.times[traj.times.len() - 1] - traj.times[0];
    Ok(-total / span)
}

/// Integrates the free top with Dormand–Prince 5(4) at tolerance `tol`,
/// projecting `Ω` back onto the rotation group after every step, and
/// reports states at `outputs` (sorted, inside `[0, t_end]`).
pub fn evolve_rotor(
    moments: &IntrinsicMoments,
    state0: &RotorState,
    t_end: f64,
    tol: f64,
    outputs: &[f64],
) -> Result<RotorTrajectory> {
    let y0 = state0.to_vec();
    let m = *moments;
    let sol = dopri5(
        |_, y, dy| {
            let (dr, dl) = euler_rhs(&m, &RotorState::from_slice(y));
            dy[..3].copy_from_slice(dl.as_slice());
            for i in 0..3 {
                for j in 0..3 {
                    dy[3 + 3 * i + j] = dr[(i, j)];
                }
            }
            Ok(())
        },
        0.0,
        &y0,
        t_end,
        outputs,
        &OdeOptions::with_tol(tol),
        |y| {
            let raw = Matrix3::from_row_slice(&y[3..12]);
            if (raw.transpose() * raw - Matrix3::identity()).amax() <= PROJECTION_SKIP {
                return;
            }
            let r = polar_project(&raw);
            for i in 0..3 {
                for j in 0..3 {
                    y[3 + 3 * i + j] = r[(i, j)];
                }
            }
        },
        |_, _| Control::Continue,
    )
    .map_err(|e| match e {
        Error::StepSizeUnderflow { t, h } => {
            Error::Numerical(format!("rotor integration is too stiff: step {h:.3e} underflowed at t = {t}"))
        }
        other => other,
    })?;
    let states: Vec<RotorState> = sol.states.iter().map(|y| RotorState::from_slice(y)).collect();
    let energies: Vec<f64> = states.iter().map(|s| classical_hamiltonian(moments, s)).collect();
    let lsq: Vec<f64> = states.iter().map(|s| s.lbar.norm_squared()).collect();
    let traj = RotorTrajectory { times: sol.times, states, energies, lsq };
    let h0 = classical_hamiltonian(moments, state0);
    let l0 = state0.lbar.norm_squared();
    for (i, t) in traj.times.iter().enumerate() {
        let bound = |x0: f64| 100.0 * tol * t.abs() + 1e-14 * (1.0 + x0.abs());
        if (traj.energies[i] - h0).abs() > bound(h0) || (traj.lsq[i] - l0).abs() > bound(l0) {
            return Err(Error::Numerical(format!("Casimir drift beyond tolerance at t = {t}")));
        }
    }
    Ok(traj)
}

/// Gradient of `½ ℒᵀℑ⁻¹ℒ` in the nine algebra coordinates. An off-diagonal
/// coordinate stands for two equal matrix entries and collects both.
pub fn space_hamiltonian_gradient(rho: &Density) -> Result<DVector<f64>> {
    let (inertia, l) = split_density(rho)?;
    let w = checked_inverse(&inertia)? * l;
    let mut g = DVector::zeros(9);
    for (p, q) in [(0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1)] {
        let mult = if p == q { 1.0 } else { 2.0 };
        g[inertia_index(p, q)] = -0.5 * mult * w[p] * w[q];
    }
    for k in 0..3 {
        g[angular_momentum_index(k)] = w[k];
    }
    Ok(g)
}

fn split_density(rho: &Density) -> Result<(Matrix3<f64>, Vector3<f64>)> {
    crate::error::check_dim(9, rho.dim())?;
    let r = &rho.0;
    let m = Matrix3::from_fn(|p, q| r[inertia_index(p, q)]);
    let l = Vector3::new(r[6], r[7], r[8]);
    Ok((m, l))
}

/// Outcome of integrating the same motion two ways.
#[derive(Debug, Clone, Serialize)]
pub struct CrosscheckReport {
    pub t_end: f64,
    pub samples: usize,
    pub max_deviation: f64,
}

/// Integrates the body-frame Euler system and, independently, the
/// nine-dimensional Lie–Poisson flow of `(ℑ, ℒ)`, and returns the largest
/// coordinate difference between the two on `n_samples` equally spaced
/// times in `[0, t_end]`.
pub fn lie_poisson_crosscheck(
    moments: &IntrinsicMoments,
    state0: &RotorState,
    t_end: f64,
    tol: f64,
    n_samples: usize,
) -> Result<CrosscheckReport> {
    if !(t_end > 0.0) || n_samples < 2 {
        return Err(Error::InvalidArgument("crosscheck needs t_end > 0 and at least two samples".into()));
    }
    let times: Vec<f64> = (0..n_samples).map(|i| t_end * i as f64 / (n_samples - 1) as f64).collect();
    let sc = rma_structure_constants();
    let rho0 = state0.density(moments);
    let (direct, lp) = rayon::join(
        || evolve_rotor(moments, state0, t_end, tol, &times),
        || {
            dopri5(
                |_, y, dy| {
                    let rho = Density::new(y.to_vec());
                    let g = space_hamiltonian_gradient(&rho)?;
                    dy.copy_from_slice(lie_poisson_rhs(&sc, &rho, &g)?.as_slice());
                    Ok(())
                },
                0.0,
                rho0.0.as_slice(),
                t_end,
                &times,
                &OdeOptions::with_tol(tol),
                |_| {},
                |_, _| Control::Continue,
            )
        },
    );
    let (direct, lp) = (direct?, lp?);
    let mut dev = 0.0_f64;
    for (s, y) in direct.states.iter().zip(&lp.states) {
        let mapped = s.density(moments);
        for (a, b) in mapped.0.iter().zip(y) {
            dev = dev.max((a - b).abs());
        }
    }
    Ok(CrosscheckReport { t_end, samples: n_samples, max_deviation: dev })
}

/// Geometry of the coadjoint orbit through `ρ = (ℑ = diag Ī, ℒ = 0)`.
#[derive(Debug, Clone, Serialize)]
pub struct OrbitGeometryReport {
    pub moments: [f64; 3],
    pub manifold_dim: usize,
    pub orbit_dim: usize,
    pub kernel_dim: usize,
    /// Names of the generators spanning the kernel when it is spanned by
    /// basis vectors, otherwise empty.
    pub kernel: Vec<String>,
    pub kernel_is_diagonal_inertia: bool,
    pub degenerate: bool,
    pub singular_values: Vec<f64>,
}

pub const RMA_BASIS_NAMES: [&str; 9] = ["I11", "I22", "I33", "I23", "I13", "I12", "L1", "L2", "L3"];

pub fn orbit_geometry_report(moments: &IntrinsicMoments) -> Result<OrbitGeometryReport> {
    let sc = rma_structure_constants();
    let state = RotorState::new(Orientation::identity(), Vector3::zeros());
    let oa = orbit_analysis(&sc, &state.density(moments))?;
    let kernel_dim = oa.kernel_basis.len();
    // Kernel spanned by basis vectors: the projector onto it is diagonal.
    let mut proj = DMatrix::<f64>::zeros(9, 9);
    for k in &oa.kernel_basis {
        proj += &k.0 * k.0.transpose();
    }
    let off_diag = (0..9)
        .flat_map(|i| (0..9).map(move |j| (i, j)))
        .filter(|(i, j)| i != j)
        .fold(0.0_f64, |m, (i, j)| m.max(proj[(i, j)].abs()));
    let kernel = if off_diag < 1e-9 {
        (0..9).filter(|&i| proj[(i, i)] > 0.5).map(|i| RMA_BASIS_NAMES[i].to_string()).collect()
    } else {
        Vec::new()
    };
    let diagonal_inertia = ["I11", "I22", "I33"].map(String::from).to_vec();
    Ok(OrbitGeometryReport {
        moments: moments.0,
        manifold_dim: 9,
        orbit_dim: oa.rank,
        kernel_dim,
        kernel_is_diagonal_inertia: kernel == diagonal_inertia,
        degenerate: oa.rank < 6,
        kernel,
        singular_values: oa.singular_values,
    })
}
