//! Dormand–Prince 5(4) integrator with step-size control, continuous
//! output, an optional manifold projection after every accepted step and a
//! per-step observer that may stop the integration.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; chosen automatically when `None`.
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { rtol: tol, atol: tol, ..Default::default() }
    }
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-8,
            h_init: None,
            h_max: f64::INFINITY,
            h_min: 1e-14,
            max_steps: 50_000_000,
        }
    }
}

/// Returned by an observer after each accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

#[derive(Debug, Clone, Default)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone)]
pub struct OdeSolution {
    /// Requested output times actually reached.
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub t_final: f64,
    pub y_final: Vec<f64>,
    pub stopped_early: bool,
    pub stats: OdeStats,
}

fn error_norm(y0: &[f64], y1: &[f64], err: &[f64], opts: &OdeOptions) -> f64 {
    let n = y0.len().max(1) as f64;
    let s: f64 = y0
        .iter()
        .zip(y1)
        .zip(err)
        .map(|((a, b), e)| {
            let sc = opts.atol + opts.rtol * a.abs().max(b.abs());
            (e / sc).powi(2)
        })
        .sum();
    (s / n).sqrt()
}

/// Integrates `rhs(t, y, dy)` from `t0` to `t_end` (`t_end > t0`).
///
/// `outputs` must be sorted and lie in `[t0, t_end]`; states at those times
/// come from the continuous extension and are passed through `project`.
/// `project` is applied to the state after every accepted step.
/// `observe(t, y)` runs after every accepted step; `Control::Stop` ends the
/// run with `stopped_early = true`.
#[allow(clippy::too_many_arguments)]
pub fn dopri5<F, P, O>(
    mut rhs: F,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    outputs: &[f64],
    opts: &OdeOptions,
    mut project: P,
    mut observe: O,
) -> Result<OdeSolution>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    P: FnMut(&mut [f64]),
    O: FnMut(f64, &[f64]) -> Control,
{
    if !(t_end > t0) {
        return Err(Error::InvalidArgument(format!("t_end ({t_end}) must exceed t0 ({t0})")));
    }
    if outputs.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("output times must be sorted".into()));
    }
    let n = y0.len();
    let mut stats = OdeStats::default();
    let mut y = y0.to_vec();
    let mut t = t0;
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut k5 = vec![0.0; n];
    let mut k6 = vec![0.0; n];
    let mut k7 = vec![0.0; n];
    let mut ytmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];
    let mut err = vec![0.0; n];

    rhs(t, &y, &mut k1)?;
    stats.evaluations += 1;

    let mut out_times = Vec::new();
    let mut out_states = Vec::new();
    let mut next_out = 0;
    while next_out < outputs.len() && outputs[next_out] <= t0 {
        if outputs[next_out] == t0 {
            out_times.push(t0);
            out_states.push(y.clone());
        }
        next_out += 1;
    }

    let span = t_end - t0;
    let mut h = match opts.h_init {
        Some(h) => h,
        None => {
            let d0 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            let d1 = k1.iter().map(|v| v * v).sum::<f64>().sqrt();
            let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
            h0.min(span)
        }
    }
    .min(opts.h_max);

    let mut stopped = false;
    let mut steps = 0;
    while t < t_end {
        if steps >= opts.max_steps {
            return Err(Error::IntegrationAborted {
                t,
                last_state: y,
                reason: format!("exceeded {} steps", opts.max_steps),
            });
        }
        steps += 1;
        let mut last = false;
        if t + h >= t_end {
            h = t_end - t;
            last = true;
        }
        if h < opts.h_min * t.abs().max(1.0) {
            return Err(Error::StepSizeUnderflow { t, h });
        }

        for i in 0..n {
            ytmp[i] = y[i] + h * A21 * k1[i];
        }
        rhs(t + C2 * h, &ytmp, &mut k2)?;
        for i in 0..n {
            ytmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        rhs(t + C3 * h, &ytmp, &mut k3)?;
        for i in 0..n {
            ytmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        rhs(t + C4 * h, &ytmp, &mut k4)?;
        for i in 0..n {
            ytmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        rhs(t + C5 * h, &ytmp, &mut k5)?;
        for i in 0..n {
            ytmp[i] = y[i]
                + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        rhs(t + h, &ytmp, &mut k6)?;
        for i in 0..n {
            ynew[i] = y[i]
                + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        rhs(t + h, &ynew, &mut k7)?;
        stats.evaluations += 6;
        for i in 0..n {
            err[i] = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let en = error_norm(&y, &ynew, &err, opts);
        if !en.is_finite() {
            stats.rejected += 1;
            h *= 0.2;
            continue;
        }

        if en <= 1.0 {
            stats.accepted += 1;
            let t_new = if last { t_end } else { t + h };

            // continuous output on (t, t_new]
            while next_out < outputs.len() && outputs[next_out] <= t_new {
                let to = outputs[next_out];
                let theta = ((to - t) / h).clamp(0.0, 1.0);
                let theta1 = 1.0 - theta;
                let mut ys = vec![0.0; n];
                for i in 0..n {
                    let r2 = ynew[i] - y[i];
                    let r3 = h * k1[i] - r2;
                    let r4 = r2 - h * k7[i] - r3;
                    let r5 = h
                        * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i]
                            + D7 * k7[i]);
                    ys[i] = y[i] + theta * (r2 + theta1 * (r3 + theta * (r4 + theta1 * r5)));
                }
                project(&mut ys);
                out_times.push(to);
                out_states.push(ys);
                next_out += 1;
            }

            y.copy_from_slice(&ynew);
            project(&mut y);
            t = t_new;
            // FSAL unless the projection moved the state
            if y == ynew {
                k1.copy_from_slice(&k7);
            } else {
                rhs(t, &y, &mut k1)?;
                stats.evaluations += 1;
            }
            if observe(t, &y) == Control::Stop {
                stopped = true;
                break;
            }
            let fac = (0.9 * en.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
            h = (h * fac).min(opts.h_max);
        } else {
            stats.rejected += 1;
            let fac = (0.9 * en.powf(-0.2)).clamp(0.2, 1.0);
            h *= fac;
        }
    }

    Ok(OdeSolution {
        times: out_times,
        states: out_states,
        t_final: t,
        y_final: y,
        stopped_early: stopped,
        stats,
    })
}

/// Plain integration with no projection and no observer.
pub fn solve<F>(rhs: F, t0: f64, y0: &[f64], t_end: f64, outputs: &[f64], opts: &OdeOptions) -> Result<OdeSolution>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    dopri5(rhs, t0, y0, t_end, outputs, opts, |_| {}, |_, _| Control::Continue)
}
