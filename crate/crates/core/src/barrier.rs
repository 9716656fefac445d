//! One-dimensional square barrier in units with ħ²/2m = 1: the smeared
//! potential seen by Gaussian ensembles, the effective Hamiltonian of the
//! minimal wave packets and the four transmission-probability families.

use std::f64::consts::PI;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use libm::{erf, erfc};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadOptions};

/// Half-width of the `t_quantum` guard band around the threshold where the
/// analytic limit replaces the 0/0 form.
pub const THRESHOLD_GUARD: f64 = 1e-6;
/// Momentum window of [`BarrierPotential::t_quantum_avg`] in standard
/// deviations of the packet's wave-number distribution.
pub const AVG_WINDOW_SIGMAS: f64 = 8.0;
pub const AVG_ABS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierPotential {
    pub v0: f64,
    pub length: f64,
}

impl Default for BarrierPotential {
    fn default() -> Self {
        Self { v0: 1.0, length: 8.0 }
    }
}

/// Gaussian phase-space ensemble `exp(-(x-x̄)²/α) exp(-α(k-k̄)²)/π`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianEnsemble {
    pub alpha: f64,
    pub xbar: f64,
    pub kbar: f64,
}

impl GaussianEnsemble {
    pub fn new(alpha: f64, xbar: f64, kbar: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self { alpha, xbar, kbar })
    }

    pub fn position_variance(&self) -> f64 {
        self.alpha / 2.0
    }

    pub fn wavenumber_variance(&self) -> f64 {
        1.0 / (2.0 * self.alpha)
    }
}

/// Argument convention for the momentum-eigenstate transmission formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransmissionFormula {
    /// Oscillation argument `2L√|k² − V0|`.
    #[default]
    SquareRoot,
    /// Oscillation argument `2L(k² − V0)` taken literally; kept only so the
    /// validation campaign can show that it disagrees with the wave solver.
    Linear,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && !alpha.is_nan() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")))
    }
}

impl BarrierPotential {
    pub fn new(v0: f64, length: f64) -> Result<Self> {
        if !(v0 > 0.0 && v0.is_finite()) {
            return Err(Error::InvalidArgument(format!("V0 must be positive, got {v0}")));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidArgument(format!("L must be positive, got {length}")));
        }
        Ok(Self { v0, length })
    }

    /// `V0` on the closed interval `[0, L]`, zero elsewhere.
    pub fn potential(&self, x: f64) -> f64 {
        if (0.0..=self.length).contains(&x) {
            self.v0
        } else {
            0.0
        }
    }

    /// Threshold wave number `√V0`.
    pub fn threshold(&self) -> f64 {
        self.v0.sqrt()
    }

    /// Potential averaged over a Gaussian of position variance `α/2`
    /// centred at `x̄`: `(V0/2)[erf((L−x̄)/√α) + erf(x̄/√α)]`.
    pub fn smeared_potential(&self, alpha: f64, xbar: f64) -> Result<f64> {
        check_alpha(alpha)?;
        let s = alpha.sqrt();
        Ok(0.5 * self.v0 * (erf((self.length - xbar) / s) + erf(xbar / s)))
    }

    /// `dV̄_α/dx̄`.
    pub fn smeared_potential_slope(&self, alpha: f64, xbar: f64) -> Result<f64> {
        check_alpha(alpha)?;
        let s = alpha.sqrt();
        let g = |u: f64| (-(u * u) / alpha).exp();
        Ok(self.v0 / (PI.sqrt() * s) * (g(xbar) - g(self.length - xbar)))
    }

    /// Maximum of the smeared potential, attained at `x̄ = L/2`.
    pub fn smeared_potential_max(&self, alpha: f64) -> Result<f64> {
        check_alpha(alpha)?;
        Ok(self.v0 * erf(self.length / (2.0 * alpha.sqrt())))
    }

    /// Energy of the minimal packet `|α, x, k⟩`: `k² + 1/(2α) + V̄_α(x)`.
    pub fn effective_hamiltonian(&self, alpha: f64, x: f64, k: f64) -> Result<f64> {
        Ok(k * k + 0.5 / alpha + self.smeared_potential(alpha, x)?)
    }

    /// Gradient `(∂H/∂x, ∂H/∂k)` of [`Self::effective_hamiltonian`].
    pub fn effective_hamiltonian_gradient(&self, alpha: f64, x: f64, k: f64) -> Result<[f64; 2]> {
        Ok([self.smeared_potential_slope(alpha, x)?, 2.0 * k])
    }

    /// Point-particle transmission: 1 above threshold, 0 at or below it.
    pub fn t_ideal(&self, k: f64) -> f64 {
        if k * k > self.v0 {
            1.0
        } else {
            0.0
        }
    }

    /// Ideal transmission averaged over the ensemble's wave-number spread:
    /// `½ erfc(√α (√V0 − k̄))`.
    pub fn t_classical_avg(&self, alpha: f64, kbar: f64) -> Result<f64> {
        if alpha == f64::INFINITY {
            return Ok(self.t_ideal(kbar));
        }
        check_alpha(alpha)?;
        Ok(0.5 * erfc(alpha.sqrt() * (self.threshold() - kbar)))
    }

    /// Transmission probability of a momentum eigenstate.
    pub fn t_quantum(&self, k: f64) -> f64 {
        self.t_quantum_with(k, TransmissionFormula::SquareRoot)
    }

    pub fn t_quantum_with(&self, k: f64, formula: TransmissionFormula) -> f64 {
        let k = k.abs();
        let k2 = k * k;
        let (v0, l) = (self.v0, self.length);
        let kt = self.threshold();
        if k == 0.0 {
            return 0.0;
        }
        if (k - kt).abs() < THRESHOLD_GUARD {
            return 4.0 * k2 / (4.0 * k2 + v0 * v0 * l * l);
        }
        let d = k2 - v0;
        let num = 8.0 * k2 * d;
        match formula {
            TransmissionFormula::SquareRoot => {
                // 1 − cos 2u = 2 sin² u, cosh 2u − 1 = 2 sinh² u
                if d > 0.0 {
                    let s = (l * d.sqrt()).sin();
                    num / (num + 2.0 * v0 * v0 * s * s)
                } else {
                    let s = (l * (-d).sqrt()).sinh();
                    let den = -num + 2.0 * v0 * v0 * s * s;
                    if den.is_finite() {
                        -num / den
                    } else {
                        0.0
                    }
                }
            }
            TransmissionFormula::Linear => {
                let c = if d > 0.0 { (2.0 * l * d).cos() } else { (2.0 * l * -d).cosh() };
                let den = num + v0 * v0 * (1.0 - c);
                if den.is_finite() {
                    num / den
                } else {
                    0.0
                }
            }
        }
    }

    /// Quantal transmission averaged over the wave-number distribution
    /// `√(α/π) exp(−α(k−k̄)²)` of the minimal packet, restricted to `k > 0`.
    pub fn t_quantum_avg(&self, alpha: f64, kbar: f64) -> Result<f64> {
        self.t_quantum_avg_with(alpha, kbar, TransmissionFormula::SquareRoot)
    }

    pub fn t_quantum_avg_with(&self, alpha: f64, kbar: f64, formula: TransmissionFormula) -> Result<f64> {
        if alpha == f64::INFINITY {
            return Ok(if kbar > 0.0 { self.t_quantum_with(kbar, formula) } else { 0.0 });
        }
        check_alpha(alpha)?;
        let half = AVG_WINDOW_SIGMAS / (2.0 * alpha).sqrt();
        let lo = (kbar - half).max(0.0);
        let hi = kbar + half;
        if hi <= 0.0 {
            return Ok(0.0);
        }
        let norm = (alpha / PI).sqrt();
        let f = |k: f64| self.t_quantum_with(k, formula) * norm * (-alpha * (k - kbar).powi(2)).exp();
        let opts = QuadOptions { abs_tol: AVG_ABS_TOL, rel_tol: 0.0, max_intervals: 5000 };
        // split at the threshold so neither piece straddles the guard band
        let kt = self.threshold();
        let v = if lo < kt && kt < hi {
            integrate(f, lo, kt, QuadOptions { abs_tol: 0.5 * AVG_ABS_TOL, ..opts })?.value
                + integrate(f, kt, hi, QuadOptions { abs_tol: 0.5 * AVG_ABS_TOL, ..opts })?.value
        } else {
            integrate(f, lo, hi, opts)?.value
        };
        Ok(v.clamp(0.0, 1.0))
    }
}

/// Transmission family selector for [`transmission_curve`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveMode {
    Icm,
    Cm,
    Qm,
    QmAvg,
}

impl CurveMode {
    pub fn name(&self) -> &'static str {
        match self {
            CurveMode::Icm => "icm",
            CurveMode::Cm => "cm",
            CurveMode::Qm => "qm",
            CurveMode::QmAvg => "qm_avg",
        }
    }
}

impl fmt::Display for CurveMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Sampled transmission curve together with its run parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionTable {
    pub mode: String,
    pub alpha: f64,
    pub barrier: BarrierPotential,
    pub points: Vec<(f64, f64)>,
}

pub const CURVE_CSV_HEADER: &str = "k,T,mode,alpha,V0,L";

/// Formats a float for CSV output; infinities are written as `inf`.
pub fn fmt_num(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".to_string()
    } else {
        format!("{x}")
    }
}

impl TransmissionTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(32 * (self.points.len() + 1));
        s.push_str(CURVE_CSV_HEADER);
        s.push('\n');
        let tail = format!(
            "{},{},{},{}",
            self.mode,
            fmt_num(self.alpha),
            fmt_num(self.barrier.v0),
            fmt_num(self.barrier.length)
        );
        for (k, t) in &self.points {
            s.push_str(&format!("{k},{t},{tail}\n"));
        }
        s
    }
}

/// Evaluates one transmission family on a strictly increasing, positive
/// wave-number grid. Points are computed in parallel; each point is a pure
/// function of its inputs so the table does not depend on the thread count.
pub fn transmission_curve(
    mode: CurveMode,
    alpha: f64,
    k_grid: &[f64],
    barrier: &BarrierPotential,
) -> Result<TransmissionTable> {
    if k_grid.is_empty() {
        return Err(Error::InvalidArgument("empty k grid".into()));
    }
    if k_grid.iter().any(|k| !(*k > 0.0)) || k_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("k grid must be positive and strictly increasing".into()));
    }
    if matches!(mode, CurveMode::Cm | CurveMode::QmAvg) && !(alpha > 0.0) {
        return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
    }
    let points: Result<Vec<(f64, f64)>> = k_grid
        .par_iter()
        .map(|&k| {
            let t = match mode {
                CurveMode::Icm => barrier.t_ideal(k),
                CurveMode::Cm => barrier.t_classical_avg(alpha, k)?,
                CurveMode::Qm => barrier.t_quantum(k),
                CurveMode::QmAvg => barrier.t_quantum_avg(alpha, k)?,
            };
            Ok((k, t))
        })
        .collect();
    Ok(TransmissionTable { mode: mode.name().to_string(), alpha, barrier: *barrier, points: points? })
}

/// Uniform grid of `n` points on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}
