//! Crank–Nicolson solver for the one-dimensional time-dependent
//! Schrödinger equation `i ∂_t ψ = (−∂_x² + V) ψ`, used to measure
//! wave-packet transmission independently of the closed-form formulas.

use std::f64::consts::PI;

use num_complex::Complex64 as C;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::barrier::BarrierPotential;
use crate::error::{Error, Result};

/// Real potential sampled on the grid.
pub trait Potential: Sync {
    fn value(&self, x: f64) -> f64;

    /// Value assigned to the grid point at `x` for spacing `dx`.
    fn sample(&self, x: f64, _dx: f64) -> f64 {
        self.value(x)
    }
}

impl Potential for BarrierPotential {
    fn value(&self, x: f64) -> f64 {
        self.potential(x)
    }

    /// Average over the cell `[x − dx/2, x + dx/2]`, so an edge sitting on
    /// a grid point gets half the barrier height.
    fn sample(&self, x: f64, dx: f64) -> f64 {
        let lo = (x - 0.5 * dx).max(0.0);
        let hi = (x + 0.5 * dx).min(self.length);
        self.v0 * (hi - lo).max(0.0) / dx
    }
}

/// `V(x) = strength · (x − centre)²`.
#[derive(Debug, Clone, Copy)]
pub struct Harmonic {
    pub strength: f64,
    pub centre: f64,
}

impl Potential for Harmonic {
    fn value(&self, x: f64) -> f64 {
        self.strength * (x - self.centre).powi(2)
    }
}

/// Uniform grid with Dirichlet walls just outside both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if !(x_max > x_min) || n < 3 {
            return Err(Error::Geometry(format!("invalid grid [{x_min}, {x_max}] with {n} points")));
        }
        Ok(Self { x_min, x_max, n })
    }

    /// Grid covering `[x_min, x_max]` with spacing at most `dx`.
    pub fn with_spacing(x_min: f64, x_max: f64, dx: f64) -> Result<Self> {
        let n = ((x_max - x_min) / dx).ceil() as usize + 1;
        Self::new(x_min, x_max, n)
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Index of the grid point nearest to `x`, clamped to the grid.
    pub fn index_of(&self, x: f64) -> usize {
        let i = ((x - self.x_min) / self.dx()).round();
        i.clamp(0.0, (self.n - 1) as f64) as usize
    }
}

/// Wave function samples at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridState {
    pub psi: Vec<C>,
    pub t: f64,
}

impl GridState {
    pub fn norm(&self, grid: &Grid) -> f64 {
        self.psi.iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.dx()
    }

    /// `∫_{x > x0} |ψ|² dx`.
    pub fn mass_right_of(&self, grid: &Grid, x0: f64) -> f64 {
        let dx = grid.dx();
        self.psi
            .iter()
            .enumerate()
            .filter(|(i, _)| grid.x(*i) > x0)
            .map(|(_, z)| z.norm_sqr())
            .sum::<f64>()
            * dx
    }

    /// Probability current `2 Im(ψ* ∂_x ψ)` at grid index `i` (interior).
    pub fn current(&self, grid: &Grid, i: usize) -> f64 {
        let d = (self.psi[i + 1] - self.psi[i - 1]) / (2.0 * grid.dx());
        2.0 * (self.psi[i].conj() * d).im
    }

    /// `⟨ψ|Ĥ|ψ⟩` with the same three-point Laplacian as the propagator.
    pub fn energy<V: Potential + ?Sized>(&self, grid: &Grid, v: &V) -> f64 {
        let n = grid.n;
        let dx = grid.dx();
        let inv = 1.0 / (dx * dx);
        let mut e = C::new(0.0, 0.0);
        for i in 0..n {
            let left = if i > 0 { self.psi[i - 1] } else { C::new(0.0, 0.0) };
            let right = if i + 1 < n { self.psi[i + 1] } else { C::new(0.0, 0.0) };
            let h = (self.psi[i] * 2.0 - left - right) * inv + self.psi[i] * v.sample(grid.x(i), dx);
            e += self.psi[i].conj() * h;
        }
        e.re * dx
    }

    /// CSV with header `x,re_psi,im_psi,abs2`.
    pub fn to_csv(&self, grid: &Grid) -> String {
        let mut s = String::from("x,re_psi,im_psi,abs2\n");
        for (i, z) in self.psi.iter().enumerate() {
            s.push_str(&format!("{},{},{},{}\n", grid.x(i), z.re, z.im, z.norm_sqr()));
        }
        s
    }
}

/// `(πα)^{-1/4} exp(−(x−x̄)²/2α) exp(i k̄ x)`.
pub fn gaussian_amplitude(alpha: f64, xbar: f64, kbar: f64, x: f64) -> C {
    let a = (PI * alpha).powf(-0.25) * (-(x - xbar).powi(2) / (2.0 * alpha)).exp();
    C::from_polar(a, kbar * x)
}

/// Samples the minimal Gaussian packet and normalizes it on the grid.
pub fn init_gaussian(grid: &Grid, alpha: f64, xbar: f64, kbar: f64) -> Result<GridState> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
    }
    let reach = 8.0 * alpha.sqrt();
    if xbar - grid.x_min <= reach || grid.x_max - xbar <= reach {
        return Err(Error::Geometry(format!(
            "packet at {xbar} with width parameter {alpha} does not fit inside [{}, {}]",
            grid.x_min, grid.x_max
        )));
    }
    let mut psi: Vec<C> = grid.xs().iter().map(|&x| gaussian_amplitude(alpha, xbar, kbar, x)).collect();
    let norm = (psi.iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.dx()).sqrt();
    psi.iter_mut().for_each(|z| *z /= norm);
    Ok(GridState { psi, t: 0.0 })
}

/// Crank–Nicolson propagator for fixed grid, time step and potential,
/// with the tridiagonal elimination factors precomputed.
#[derive(Debug, Clone)]
pub struct CnPropagator {
    grid: Grid,
    dt: f64,
    /// Diagonal of `Ĥ`.
    h_diag: Vec<f64>,
    h_off: f64,
    /// Modified super-diagonal of `1 + i dt Ĥ/2`.
    c_prime: Vec<C>,
    inv_denom: Vec<C>,
    lower: C,
}

impl CnPropagator {
    pub fn new<V: Potential + ?Sized>(grid: &Grid, dt: f64, v: &V) -> Result<Self> {
        if dt == 0.0 || !dt.is_finite() {
            return Err(Error::InvalidArgument(format!("time step must be finite and nonzero, got {dt}")));
        }
        let n = grid.n;
        let dx = grid.dx();
        let h_off = -1.0 / (dx * dx);
        let h_diag: Vec<f64> = (0..n).map(|i| 2.0 / (dx * dx) + v.sample(grid.x(i), dx)).collect();
        let half = C::new(0.0, 0.5 * dt);
        let off = half * h_off;
        let mut c_prime = vec![C::new(0.0, 0.0); n];
        let mut inv_denom = vec![C::new(0.0, 0.0); n];
        let mut prev_c = C::new(0.0, 0.0);
        for i in 0..n {
            let b = C::new(1.0, 0.0) + half * h_diag[i];
            let denom = b - off * prev_c;
            if denom.norm() < 1e-300 {
                return Err(Error::Numerical(format!("tridiagonal elimination broke down at row {i}")));
            }
            inv_denom[i] = denom.inv();
            c_prime[i] = off * inv_denom[i];
            prev_c = c_prime[i];
        }
        Ok(Self { grid: *grid, dt, h_diag, h_off, c_prime, inv_denom, lower: off })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Advances `state` by one step in place.
    pub fn step(&self, state: &mut GridState) -> Result<()> {
        let n = self.grid.n;
        if state.psi.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: state.psi.len() });
        }
        let half = C::new(0.0, 0.5 * self.dt);
        let psi = &mut state.psi;
        // right-hand side (1 − i dt Ĥ/2) ψ, then forward elimination
        let mut d = vec![C::new(0.0, 0.0); n];
        let mut prev = C::new(0.0, 0.0);
        for i in 0..n {
            let left = if i > 0 { psi[i - 1] } else { C::new(0.0, 0.0) };
            let right = if i + 1 < n { psi[i + 1] } else { C::new(0.0, 0.0) };
            let hpsi = psi[i] * self.h_diag[i] + (left + right) * self.h_off;
            let r = psi[i] - half * hpsi;
            let di = (r - self.lower * prev) * self.inv_denom[i];
            d[i] = di;
            prev = di;
        }
        psi[n - 1] = d[n - 1];
        for i in (0..n - 1).rev() {
            psi[i] = d[i] - self.c_prime[i] * psi[i + 1];
        }
        if !psi[n / 2].re.is_finite() {
            return Err(Error::Numerical("non-finite wave function after step".into()));
        }
        state.t += self.dt;
        Ok(())
    }
}

/// One Crank–Nicolson step.
pub fn step<V: Potential + ?Sized>(grid: &Grid, state: &GridState, dt: f64, v: &V) -> Result<GridState> {
    let prop = CnPropagator::new(grid, dt, v)?;
    let mut next = state.clone();
    prop.step(&mut next)?;
    Ok(next)
}

/// Resolution and stopping controls for packet scattering runs.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PacketRunOptions {
    /// Grid points per shortest de Broglie wavelength in the packet.
    pub points_per_wavelength: f64,
    /// Time step as a fraction of `1 / E_max`, `E_max` the largest kinetic
    /// energy carried by the packet.
    pub dt_energy_fraction: f64,
    /// Interaction is complete once `|j(0)| + |j(L)|` stays below this...
    pub flux_tol: f64,
    /// ...for this many consecutive probes.
    pub quiet_probes: usize,
    /// Mass tolerated in the outer edge strips before the run is rejected.
    pub edge_mass_tol: f64,
    /// Number of times the domain is doubled after edge contamination.
    pub domain_retries: usize,
}

impl Default for PacketRunOptions {
    fn default() -> Self {
        Self {
            points_per_wavelength: 40.0,
            dt_energy_fraction: 0.2,
            flux_tol: 1e-8,
            quiet_probes: 5,
            edge_mass_tol: 1e-9,
            domain_retries: 2,
        }
    }
}

impl PacketRunOptions {
    /// Same run with grid spacing and time step both divided by `factor`.
    pub fn refined(self, factor: f64) -> Self {
        Self {
            points_per_wavelength: self.points_per_wavelength * factor,
            dt_energy_fraction: self.dt_energy_fraction / factor,
            ..self
        }
    }
}

/// Outcome of a scattering run.
#[derive(Debug, Clone)]
pub struct PacketScattering {
    pub transmission: f64,
    pub reflection: f64,
    pub t_final: f64,
    pub steps: usize,
    pub grid: Grid,
    pub dt: f64,
    pub final_state: GridState,
}

/// Sends a minimal packet `|α, x̄₀, k̄⟩` from upstream onto the barrier and
/// evolves until the flux through both barrier edges has died out.
///
/// The packet starts with its tail clear of the barrier; the domain is
/// sized so that neither the reflected nor the transmitted part can reach
/// the walls before the interaction is over.
pub fn scatter_packet(
    alpha: f64,
    kbar: f64,
    barrier: &BarrierPotential,
    opts: &PacketRunOptions,
) -> Result<PacketScattering> {
    let mut scale = 1.0;
    let mut attempt = 0;
    loop {
        match scatter_in_domain(alpha, kbar, barrier, opts, scale) {
            Err(Error::Geometry(_)) if attempt < opts.domain_retries => {
                attempt += 1;
                scale *= 2.0;
            }
            other => return other,
        }
    }
}

fn scatter_in_domain(
    alpha: f64,
    kbar: f64,
    barrier: &BarrierPotential,
    opts: &PacketRunOptions,
    scale: f64,
) -> Result<PacketScattering> {
    if !(kbar > 0.0) {
        return Err(Error::InvalidArgument(format!("kbar must be positive, got {kbar}")));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
    }
    let sigma_k = 1.0 / (2.0 * alpha).sqrt();
    if sigma_k >= kbar / 4.0 {
        return Err(Error::InvalidArgument(format!(
            "wave-number spread {sigma_k:.4} is not below kbar/4 = {:.4}; increase alpha",
            kbar / 4.0
        )));
    }
    let k_hi = kbar + 8.0 * sigma_k;
    let k_lo = (kbar - 4.0 * sigma_k).max(0.5 * kbar);
    let width = alpha.sqrt();
    let x0 = -8.0 * width - 2.0;
    let l = barrier.length;
    // time for the slow edge of the packet to clear the barrier and move a
    // further eight widths away, with room for resonant dwelling
    let t_est = 1.5 * scale * (l - x0 + 16.0 * width) / (2.0 * k_lo);
    let travel = 2.0 * k_hi * t_est;
    let lambda_min = 2.0 * PI / k_hi;
    let margin = 10.0 * 2.0 * PI / kbar;
    let x_min = x0 - 8.0 * width - travel.max(margin);
    let x_max = l + 8.0 * width + travel.max(margin);
    // both barrier edges sit on grid points
    let cells = (l / (lambda_min / opts.points_per_wavelength)).ceil().max(1.0);
    let dx = l / cells;
    let (i_lo, i_hi) = ((x_min / dx).floor(), (x_max / dx).ceil());
    let grid = Grid::new(i_lo * dx, i_hi * dx, (i_hi - i_lo) as usize + 1)?;
    let e_max = k_hi * k_hi + barrier.v0.abs();
    let dt = opts.dt_energy_fraction / e_max;
    let prop = CnPropagator::new(&grid, dt, barrier)?;
    let mut state = init_gaussian(&grid, alpha, x0, kbar)?;

    let i0 = grid.index_of(0.0).max(1);
    let il = grid.index_of(l).min(grid.n - 2);
    let strip = (grid.n / 20).max(1);
    let edge_mass = |s: &GridState| {
        let dx = grid.dx();
        let left: f64 = s.psi[..strip].iter().map(|z| z.norm_sqr()).sum();
        let right: f64 = s.psi[grid.n - strip..].iter().map(|z| z.norm_sqr()).sum();
        (left + right) * dx
    };
    let t_arrive = -x0 / (2.0 * kbar);
    let probe_interval = 0.25 * width / (2.0 * kbar);
    let probe_steps = ((probe_interval / dt).ceil() as usize).max(1);
    let max_steps = (4.0 * t_est / dt).ceil() as usize;
    let mut quiet = 0;
    let mut steps = 0;
    loop {
        for _ in 0..probe_steps {
            prop.step(&mut state)?;
        }
        steps += probe_steps;
        if edge_mass(&state) > opts.edge_mass_tol {
            return Err(Error::Geometry(format!(
                "wave packet reached the domain edge at t = {:.3}; enlarge the grid",
                state.t
            )));
        }
        if state.t >= t_arrive {
            let flux = state.current(&grid, i0).abs() + state.current(&grid, il).abs();
            if flux < opts.flux_tol {
                quiet += 1;
                if quiet >= opts.quiet_probes {
                    break;
                }
            } else {
                quiet = 0;
            }
        }
        if steps >= max_steps {
            return Err(Error::Geometry(format!(
                "interaction not complete after t = {:.3}; enlarge the grid",
                state.t
            )));
        }
    }
    let transmission = state.mass_right_of(&grid, l);
    let reflection = state.norm(&grid) - state.mass_right_of(&grid, 0.0);
    Ok(PacketScattering { transmission, reflection, t_final: state.t, steps, grid, dt, final_state: state })
}

/// Transmitted probability `∫_{x>L} |ψ|² dx` after the interaction.
pub fn transmission_of_packet(
    alpha: f64,
    kbar: f64,
    barrier: &BarrierPotential,
    opts: &PacketRunOptions,
) -> Result<f64> {
    Ok(scatter_packet(alpha, kbar, barrier, opts)?.transmission)
}

/// Moments of one state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EhrenfestRow {
    pub t: f64,
    pub x_mean: f64,
    pub p_mean: f64,
    pub x_var: f64,
    pub p_var: f64,
}

/// Position moments by direct summation and momentum moments from the
/// discrete Fourier transform of each state.
pub fn ehrenfest_track(grid: &Grid, states: &[GridState]) -> Vec<EhrenfestRow> {
    let n = grid.n;
    let dx = grid.dx();
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n);
    let ks: Vec<f64> = (0..n)
        .map(|j| {
            let m = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
            2.0 * PI * m / (n as f64 * dx)
        })
        .collect();
    let xs = grid.xs();
    states
        .iter()
        .map(|s| {
            let w: Vec<f64> = s.psi.iter().map(|z| z.norm_sqr()).collect();
            let norm: f64 = w.iter().sum();
            let x_mean = w.iter().zip(&xs).map(|(a, x)| a * x).sum::<f64>() / norm;
            let x_var = w.iter().zip(&xs).map(|(a, x)| a * (x - x_mean).powi(2)).sum::<f64>() / norm;
            let mut buf = s.psi.clone();
            fft.process(&mut buf);
            let pw: Vec<f64> = buf.iter().map(|z| z.norm_sqr()).collect();
            let pn: f64 = pw.iter().sum();
            let p_mean = pw.iter().zip(&ks).map(|(a, k)| a * k).sum::<f64>() / pn;
            let p_var = pw.iter().zip(&ks).map(|(a, k)| a * (k - p_mean).powi(2)).sum::<f64>() / pn;
            EhrenfestRow { t: s.t, x_mean, p_mean, x_var, p_var }
        })
        .collect()
}

pub const EHRENFEST_CSV_HEADER: &str = "t,x_mean,p_mean,x_var,p_var";

pub fn ehrenfest_csv(rows: &[EhrenfestRow]) -> String {
    let mut s = format!("{EHRENFEST_CSV_HEADER}\n");
    for r in rows {
        s.push_str(&format!("{},{},{},{},{}\n", r.t, r.x_mean, r.p_mean, r.x_var, r.p_var));
    }
    s
}

/// Best approximation of a state within the fixed-width Gaussian family.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FidelityFit {
    pub xbar: f64,
    pub kbar: f64,
    pub fidelity: f64,
    pub converged: bool,
    /// Seed-point fidelity, kept for reference when the search fails.
    pub seed_fidelity: f64,
}

/// `|⟨α, x̄, k̄|ψ⟩|²`.
pub fn family_overlap(grid: &Grid, state: &GridState, alpha: f64, xbar: f64, kbar: f64) -> f64 {
    let dx = grid.dx();
    let reach = 12.0 * alpha.sqrt();
    let lo = grid.index_of(xbar - reach);
    let hi = grid.index_of(xbar + reach);
    let mut acc = C::new(0.0, 0.0);
    for i in lo..=hi {
        acc += gaussian_amplitude(alpha, xbar, kbar, grid.x(i)).conj() * state.psi[i];
    }
    (acc * dx).norm_sqr()
}

/// Maximizes the overlap with `|α, x̄, k̄⟩` over `(x̄, k̄)`, starting from
/// the state's mean position and momentum.
pub fn fidelity_to_family(grid: &Grid, state: &GridState, alpha: f64) -> FidelityFit {
    let row = ehrenfest_track(grid, std::slice::from_ref(state))[0];
    let seed = [row.x_mean, row.p_mean];
    let f = |z: &[f64; 2]| -family_overlap(grid, state, alpha, z[0], z[1]);
    let seed_fidelity = -f(&seed);
    let scale = [0.5 * alpha.sqrt(), 0.5 / alpha.sqrt()];
    let (best, value, converged) = nelder_mead(f, seed, scale, 1e-8, 2000);
    if converged && -value >= seed_fidelity {
        FidelityFit { xbar: best[0], kbar: best[1], fidelity: -value, converged, seed_fidelity }
    } else {
        FidelityFit { xbar: seed[0], kbar: seed[1], fidelity: seed_fidelity, converged: false, seed_fidelity }
    }
}

/// Two-dimensional Nelder–Mead minimization. Stops when the spread of the
/// simplex values falls below `ftol`; returns `(x, f(x), converged)`.
fn nelder_mead<F: Fn(&[f64; 2]) -> f64>(
    f: F,
    x0: [f64; 2],
    scale: [f64; 2],
    ftol: f64,
    max_iter: usize,
) -> ([f64; 2], f64, bool) {
    let mut s: Vec<([f64; 2], f64)> = vec![x0, [x0[0] + scale[0], x0[1]], [x0[0], x0[1] + scale[1]]]
        .into_iter()
        .map(|p| (p, f(&p)))
        .collect();
    let lerp = |a: &[f64; 2], b: &[f64; 2], t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
    for _ in 0..max_iter {
        s.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        if (s[2].1 - s[0].1).abs() <= ftol * (1.0 + s[0].1.abs()) * 1e-2 {
            return (s[0].0, s[0].1, true);
        }
        let c = [(s[0].0[0] + s[1].0[0]) / 2.0, (s[0].0[1] + s[1].0[1]) / 2.0];
        let xr = lerp(&c, &s[2].0, -1.0);
        let fr = f(&xr);
        if fr < s[0].1 {
            let xe = lerp(&c, &s[2].0, -2.0);
            let fe = f(&xe);
            s[2] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < s[1].1 {
            s[2] = (xr, fr);
        } else {
            let xc = if fr < s[2].1 { lerp(&c, &xr, 0.5) } else { lerp(&c, &s[2].0, 0.5) };
            let fc = f(&xc);
            if fc < s[2].1.min(fr) {
                s[2] = (xc, fc);
            } else {
                let best = s[0].0;
                for v in s.iter_mut().skip(1) {
                    v.0 = lerp(&best, &v.0, 0.5);
                    v.1 = f(&v.0);
                }
            }
        }
    }
    s.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
    (s[0].0, s[0].1, false)
}
