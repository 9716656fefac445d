//! Dynamics constrained to a manifold of coherent states.
//!
//! A family `z ↦ |ψ(z)⟩` supplies its tangent overlaps `⟨∂_μψ|∂_νψ⟩` and the
//! energy `H(z) = ⟨ψ(z)|Ĥ|ψ(z)⟩`. The restricted Fubini–Study form is
//! `σ_μν = −2 Im⟨∂_μψ|∂_νψ⟩` (ħ = 1) and, where it is invertible, the
//! parameters move by `ż = σ⁻¹ ∇H`. The orientation of `σ⁻¹` is fixed so
//! that the Gaussian packet family moves with `ẋ̄ = +2k̄`.

use std::cell::RefCell;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::algebra::CMatrix;
use crate::barrier::{BarrierPotential, TransmissionTable};
use crate::error::{check_dim, Error, Result};
use crate::linalg::rank_kernel;
use crate::ode::{dopri5, Control, OdeOptions};

/// Parametrized family of normalized states with analytic overlap data.
pub trait CoherentFamily {
    fn n_params(&self) -> usize;

    /// Hermitian matrix `⟨∂_μψ|∂_νψ⟩` at `z`.
    fn tangent_overlaps(&self, z: &[f64]) -> Result<CMatrix>;

    fn energy(&self, z: &[f64]) -> Result<f64>;

    fn energy_gradient(&self, z: &[f64]) -> Result<DVector<f64>>;

    /// Upper bound on the integration step for a trajectory starting at
    /// `z0`. Families whose Hamiltonian has narrow features must bound it,
    /// or an adaptive step can jump across a feature that none of its
    /// stages sample.
    fn max_step(&self, _z0: &[f64]) -> Result<f64> {
        Ok(f64::INFINITY)
    }
}

/// Restricted symplectic form at one point of a family.
#[derive(Debug, Clone)]
pub struct SymplecticRestriction {
    pub sigma: DMatrix<f64>,
    pub rank: usize,
    pub kernel: Vec<DVector<f64>>,
}

impl SymplecticRestriction {
    pub fn is_symplectic(&self) -> bool {
        self.rank == self.sigma.nrows()
    }

    /// `σ⁻¹`, or `None` at a degenerate point.
    pub fn poisson_tensor(&self) -> Option<DMatrix<f64>> {
        if self.is_symplectic() {
            self.sigma.clone().try_inverse()
        } else {
            None
        }
    }

    fn degenerate_error(&self, z: &[f64]) -> Error {
        Error::DegenerateForm {
            z: z.to_vec(),
            rank: self.rank,
            dim: self.sigma.nrows(),
            kernel: self.kernel.iter().map(|v| v.iter().copied().collect()).collect(),
        }
    }
}

/// `σ_μν = −2 Im⟨∂_μψ|∂_νψ⟩`, antisymmetrized, with an SVD rank check.
pub fn form_restriction<F: CoherentFamily + ?Sized>(fam: &F, z: &[f64]) -> Result<SymplecticRestriction> {
    check_dim(fam.n_params(), z.len())?;
    let ov = fam.tangent_overlaps(z)?;
    let n = fam.n_params();
    if ov.nrows() != n || ov.ncols() != n {
        return Err(Error::Numerical(format!(
            "overlap oracle returned {}x{} at z = {z:?}, expected {n}x{n}",
            ov.nrows(),
            ov.ncols()
        )));
    }
    let raw = DMatrix::from_fn(n, n, |m, v| -2.0 * ov[(m, v)].im);
    let sigma = (&raw - raw.transpose()) * 0.5;
    let rk = rank_kernel(&sigma);
    Ok(SymplecticRestriction { sigma, rank: rk.rank, kernel: rk.kernel })
}

/// Parameter velocity `ż = σ⁻¹ ∇H`; a degenerate form is an error carrying
/// its kernel, never a pseudo-inverse.
pub fn eom_rhs<F: CoherentFamily + ?Sized>(fam: &F, z: &[f64]) -> Result<DVector<f64>> {
    let form = form_restriction(fam, z)?;
    if !form.is_symplectic() {
        return Err(form.degenerate_error(z));
    }
    let grad = fam.energy_gradient(z)?;
    form.sigma
        .clone()
        .lu()
        .solve(&grad)
        .ok_or_else(|| form.degenerate_error(z))
}

/// `{F, G}_𝒞 = ∂F · σ⁻¹ · ∂G` from the gradients of `F` and `G` at `z`.
pub fn bracket_on_family<F: CoherentFamily + ?Sized>(
    fam: &F,
    grad_f: &DVector<f64>,
    grad_g: &DVector<f64>,
    z: &[f64],
) -> Result<f64> {
    check_dim(fam.n_params(), grad_f.len())?;
    check_dim(fam.n_params(), grad_g.len())?;
    let form = form_restriction(fam, z)?;
    let p = form.poisson_tensor().ok_or_else(|| form.degenerate_error(z))?;
    Ok(grad_f.dot(&(p * grad_g)))
}

/// Constrained trajectory sampled at the requested times.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub energies: Vec<f64>,
}

impl Trajectory {
    pub fn max_energy_drift(&self) -> f64 {
        let e0 = self.energies.first().copied().unwrap_or(0.0);
        self.energies.iter().fold(0.0_f64, |m, e| m.max((e - e0).abs()))
    }

    /// CSV with header `t,xbar,kbar,H` (two-parameter families).
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,xbar,kbar,H\n");
        for ((t, z), h) in self.times.iter().zip(&self.states).zip(&self.energies) {
            let zs: Vec<String> = z.iter().map(|v| v.to_string()).collect();
            s.push_str(&format!("{t},{},{h}\n", zs.join(",")));
        }
        s
    }
}

/// Energy-drift allowance `100·tol·|t|` plus a rounding floor.
pub fn drift_bound(tol: f64, t: f64, h0: f64) -> f64 {
    100.0 * tol * t.abs() + 1e-14 * (1.0 + h0.abs())
}

/// Integrates the constrained equations with Dormand–Prince 5(4) at
/// per-step tolerance `tol`, returning states at `outputs` (sorted, within
/// `[t0, t1]`). Energy conservation is enforced after the fact.
pub fn integrate<F: CoherentFamily + ?Sized>(
    fam: &F,
    z0: &[f64],
    t_span: (f64, f64),
    tol: f64,
    outputs: &[f64],
) -> Result<Trajectory> {
    check_dim(fam.n_params(), z0.len())?;
    let (t0, t1) = t_span;
    let opts = OdeOptions { h_max: fam.max_step(z0)?, ..OdeOptions::with_tol(tol) };
    let last = RefCell::new((t0, z0.to_vec()));
    let sol = dopri5(
        |_, z, dz| {
            let v = eom_rhs(fam, z)?;
            dz.copy_from_slice(v.as_slice());
            Ok(())
        },
        t0,
        z0,
        t1,
        outputs,
        &opts,
        |_| {},
        |t, z| {
            *last.borrow_mut() = (t, z.to_vec());
            Control::Continue
        },
    )
    .map_err(|e| match e {
        Error::DegenerateForm { .. } => {
            let (t, z) = last.borrow().clone();
            Error::IntegrationAborted { t, last_state: z, reason: e.to_string() }
        }
        other => other,
    })?;
    let energies: Result<Vec<f64>> = sol.states.iter().map(|z| fam.energy(z)).collect();
    let traj = Trajectory { times: sol.times, states: sol.states, energies: energies? };
    let h0 = fam.energy(z0)?;
    for (t, e) in traj.times.iter().zip(&traj.energies) {
        let bound = drift_bound(tol, t - t0, h0);
        if (e - h0).abs() > bound {
            return Err(Error::Numerical(format!(
                "energy drift {:.3e} exceeds {bound:.3e} at t = {t}",
                (e - h0).abs()
            )));
        }
    }
    Ok(traj)
}

/// Minimal Gaussian packets `(πα)^{-1/4} exp(−(x−x̄)²/2α) exp(i k̄ x)` of fixed
/// width in front of a square barrier; parameters `z = (x̄, k̄)`.
#[derive(Debug, Clone, Copy)]
pub struct GaussianPacketFamily {
    pub alpha: f64,
    pub barrier: BarrierPotential,
}

impl GaussianPacketFamily {
    pub fn new(alpha: f64, barrier: BarrierPotential) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
        }
        Ok(Self { alpha, barrier })
    }

    /// Upstream starting position used for transmission runs.
    pub fn start_position(&self) -> f64 {
        -10.0 * self.alpha.sqrt() - 10.0
    }

    /// Position beyond which a run counts as transmitted.
    pub fn exit_position(&self) -> f64 {
        self.barrier.length + 10.0 * self.alpha.sqrt() + 10.0
    }
}

impl CoherentFamily for GaussianPacketFamily {
    fn n_params(&self) -> usize {
        2
    }

    fn tangent_overlaps(&self, z: &[f64]) -> Result<CMatrix> {
        check_dim(2, z.len())?;
        use num_complex::Complex64 as C;
        let (xbar, a) = (z[0], self.alpha);
        // ∂_x̄ψ = (x−x̄)/α ψ, ∂_k̄ψ = i x ψ; moments of |ψ|² with variance α/2
        Ok(CMatrix::from_row_slice(2, 2, &[
            C::new(0.5 / a, 0.0),
            C::new(0.0, 0.5),
            C::new(0.0, -0.5),
            C::new(0.5 * a + xbar * xbar, 0.0),
        ]))
    }

    fn energy(&self, z: &[f64]) -> Result<f64> {
        check_dim(2, z.len())?;
        self.barrier.effective_hamiltonian(self.alpha, z[0], z[1])
    }

    fn energy_gradient(&self, z: &[f64]) -> Result<DVector<f64>> {
        check_dim(2, z.len())?;
        let g = self.barrier.effective_hamiltonian_gradient(self.alpha, z[0], z[1])?;
        Ok(DVector::from_column_slice(&g))
    }

    /// A quarter of the packet width per step at the fastest speed energy
    /// conservation allows (`V̄ ≥ min(0, V0)`).
    fn max_step(&self, z0: &[f64]) -> Result<f64> {
        let h0 = self.energy(z0)?;
        let k_max = (h0 - 0.5 / self.alpha - self.barrier.v0.min(0.0)).max(0.0).sqrt();
        Ok(0.25 * self.alpha.sqrt() / (2.0 * k_max).max(0.1))
    }
}

/// Result of a constrained scattering run.
#[derive(Debug, Clone)]
pub struct ScatteringOutcome {
    pub transmitted: bool,
    pub exit_time: f64,
    pub final_state: Vec<f64>,
    pub energy_drift: f64,
}

/// Launches the packet centre from far upstream with wave number `kbar`
/// and integrates until it clears the barrier (transmitted) or returns
/// upstream moving left (reflected).
pub fn constrained_scattering(fam: &GaussianPacketFamily, kbar: f64, tol: f64) -> Result<ScatteringOutcome> {
    if !(kbar > 0.0) {
        return Err(Error::InvalidArgument(format!("kbar must be positive, got {kbar}")));
    }
    let x0 = fam.start_position();
    let x_exit = fam.exit_position();
    let z0 = [x0, kbar];
    let h0 = fam.energy(&z0)?;
    let distance = x_exit - x0;
    let t_max = 100.0 * distance / (2.0 * kbar) + 1e4;
    let decided = RefCell::new(None::<bool>);
    let sol = dopri5(
        |_, z, dz| {
            let v = eom_rhs(fam, z)?;
            dz.copy_from_slice(v.as_slice());
            Ok(())
        },
        0.0,
        &z0,
        t_max,
        &[],
        &OdeOptions { h_max: 0.25 * fam.alpha.sqrt().max(0.1) / kbar.max(0.1), ..OdeOptions::with_tol(tol) },
        |_| {},
        |_, z| {
            if z[0] > x_exit {
                *decided.borrow_mut() = Some(true);
                Control::Stop
            } else if z[0] < x0 && z[1] < 0.0 {
                *decided.borrow_mut() = Some(false);
                Control::Stop
            } else {
                Control::Continue
            }
        },
    )?;
    let transmitted = decided.into_inner().ok_or_else(|| {
        Error::Numerical(format!("scattering undecided at t = {t_max} (kbar = {kbar} is too close to threshold)"))
    })?;
    let drift = (fam.energy(&sol.y_final)? - h0).abs();
    if drift > drift_bound(tol, sol.t_final, h0) {
        return Err(Error::Numerical(format!("energy drift {drift:.3e} during scattering run")));
    }
    Ok(ScatteringOutcome { transmitted, exit_time: sol.t_final, final_state: sol.y_final, energy_drift: drift })
}

/// Transmission (0 or 1) of the constrained packet dynamics.
pub fn constrained_transmission(fam: &GaussianPacketFamily, kbar: f64) -> Result<f64> {
    Ok(if constrained_scattering(fam, kbar, 1e-10)?.transmitted { 1.0 } else { 0.0 })
}

/// Relative distance from the separatrix below which a run cannot decide
/// between passing and turning back within any practical time.
pub const SEPARATRIX_BAND: f64 = 1e-9;

/// Constrained transmission on a wave-number grid (parallel over points).
/// Points inside [`SEPARATRIX_BAND`] of the kinetic threshold take the
/// energy-conservation verdict instead of an undecidable integration.
pub fn constrained_curve(alpha: f64, k_grid: &[f64], barrier: &BarrierPotential) -> Result<TransmissionTable> {
    let fam = GaussianPacketFamily::new(alpha, *barrier)?;
    let gap = barrier.smeared_potential_max(alpha)? - barrier.smeared_potential(alpha, fam.start_position())?;
    let points: Result<Vec<(f64, f64)>> = k_grid
        .par_iter()
        .map(|&k| {
            let t = if (k * k - gap).abs() <= SEPARATRIX_BAND * (1.0 + gap.abs()) {
                predicted_transmission(&fam, k)?
            } else {
                constrained_transmission(&fam, k)?
            };
            Ok((k, t))
        })
        .collect();
    Ok(TransmissionTable { mode: "cqm".into(), alpha, barrier: *barrier, points: points? })
}

/// Kinetic threshold predicted by energy conservation:
/// transmission iff `k̄² > max V̄_α − V̄_α(x̄₀)`.
pub fn predicted_transmission(fam: &GaussianPacketFamily, kbar: f64) -> Result<f64> {
    let top = fam.barrier.smeared_potential_max(fam.alpha)?;
    let start = fam.barrier.smeared_potential(fam.alpha, fam.start_position())?;
    Ok(if kbar * kbar > top - start { 1.0 } else { 0.0 })
}
