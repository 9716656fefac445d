//! The five subcommands. Each reads a validated config, writes its files
//! through an [`OutputDir`] and reports which fixtures it relied on.

use std::f64::consts::PI;
use std::path::Path;

use cqm_core::algebra::{orbit_analysis, Density};
use cqm_core::barrier::{transmission_curve, BarrierPotential, CurveMode, TransmissionFormula, TransmissionTable};
use cqm_core::constrained::constrained_curve;
use cqm_core::fixtures::{self, AlgebraFixture};
use cqm_core::rotor::{
    characteristic_period, classical_hamiltonian, evolve_rotor, lie_poisson_crosscheck, measured_precession_rate,
    orbit_geometry_report, precession_rate, IntrinsicMoments, RotorState,
};
use cqm_core::schrodinger::{fidelity_to_family, init_gaussian, scatter_packet, PacketRunOptions};
use nalgebra::Vector3;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{
    Alpha, AlgebraReportConfig, ConfigError, Fig1Config, Fig2Config, Formula, Mode, OracleConfig, RotorConfig,
};
use crate::manifest::{sha256_hex, FixtureRecord, OutputDir};
use crate::svg::{Chart, Series};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("numerical failure: {0}")]
    Numerical(#[from] cqm_core::Error),
    #[error("validation suite failed: {0}")]
    SuiteFailed(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::SuiteFailed(_) => 4,
        }
    }
}

pub type CmdResult = Result<Vec<FixtureRecord>, CliError>;

fn curve_points(t: &TransmissionTable) -> Vec<(f64, f64)> {
    t.points.clone()
}

pub fn fig1(cfg: &Fig1Config, out: &mut OutputDir) -> CmdResult {
    let barrier = cfg.validate()?;
    let xs = cfg.x_grid.points();
    let curves: Vec<Vec<(f64, f64)>> = cfg
        .alphas
        .par_iter()
        .map(|a| xs.iter().map(|&x| Ok((x, barrier.smeared_potential(a.0, x)?))).collect::<Result<Vec<_>, cqm_core::Error>>())
        .collect::<Result<_, _>>()?;
    let mut csv = String::from("xbar,Vbar,alpha,V0,L\n");
    for (a, pts) in cfg.alphas.iter().zip(&curves) {
        for (x, v) in pts {
            csv.push_str(&format!("{x},{v},{},{},{}\n", a.0, barrier.v0, barrier.length));
        }
    }
    out.write("fig1.csv", csv.as_bytes())?;
    let chart = Chart {
        title: format!("smeared barrier, V0 = {}, L = {}", barrier.v0, barrier.length),
        x_label: "xbar".into(),
        y_label: "Vbar".into(),
        series: cfg.alphas.iter().zip(curves).map(|(a, p)| Series::new(format!("alpha = {}", a.tag()), p)).collect(),
        y_range: Some((0.0, 1.1 * barrier.v0)),
    };
    out.write("fig1.svg", chart.render().as_bytes())?;
    Ok(vec![])
}

/// One curve of the transmission figure.
struct Fig2Curve {
    mode: Mode,
    alpha: Alpha,
    table: TransmissionTable,
}

fn fig2_curve(mode: Mode, alpha: Alpha, ks: &[f64], barrier: &BarrierPotential) -> Result<TransmissionTable, cqm_core::Error> {
    let table = match mode {
        Mode::Icm => transmission_curve(CurveMode::Icm, f64::INFINITY, ks, barrier)?,
        Mode::Qm => transmission_curve(CurveMode::Qm, f64::INFINITY, ks, barrier)?,
        Mode::Cm => transmission_curve(CurveMode::Cm, alpha.0, ks, barrier)?,
        Mode::QmAvg => transmission_curve(CurveMode::QmAvg, alpha.0, ks, barrier)?,
        Mode::Cqm => constrained_curve(alpha.0, ks, barrier)?,
    };
    Ok(TransmissionTable { mode: mode.name().to_string(), ..table })
}

pub fn fig2(cfg: &Fig2Config, out: &mut OutputDir) -> CmdResult {
    let barrier = cfg.validate()?;
    let ks = cfg.k_grid.points();
    let mut modes = cfg.modes.clone();
    modes.sort();
    modes.dedup();
    // α-free modes appear once; the constrained family needs a finite width
    let mut jobs: Vec<(Mode, Alpha)> = Vec::new();
    for &m in &modes {
        if m.alpha_free() {
            jobs.push((m, Alpha(f64::INFINITY)));
        } else {
            for &a in &cfg.alphas {
                if m != Mode::Cqm || a.is_finite() {
                    jobs.push((m, a));
                }
            }
        }
    }
    let curves: Vec<Fig2Curve> = jobs
        .par_iter()
        .map(|&(mode, alpha)| Ok(Fig2Curve { mode, alpha, table: fig2_curve(mode, alpha, &ks, &barrier)? }))
        .collect::<Result<_, cqm_core::Error>>()?;
    for c in &curves {
        let name = if c.mode.alpha_free() {
            format!("fig2_{}.csv", c.mode.name())
        } else {
            format!("fig2_{}_alpha{}.csv", c.mode.name(), c.alpha.tag())
        };
        out.write(&name, c.table.to_csv().as_bytes())?;
    }
    let panel = |title: &str, members: &[Mode]| Chart {
        title: title.into(),
        x_label: "k".into(),
        y_label: "T".into(),
        series: curves
            .iter()
            .filter(|c| members.contains(&c.mode))
            .map(|c| {
                let label = if c.mode.alpha_free() {
                    c.mode.name().to_string()
                } else {
                    format!("{} a={}", c.mode.name(), c.alpha.tag())
                };
                Series::new(label, curve_points(&c.table))
            })
            .collect(),
        y_range: Some((0.0, 1.05)),
    };
    out.write("fig2_classical.svg", panel("classical transmission", &[Mode::Icm, Mode::Cm]).render().as_bytes())?;
    out.write(
        "fig2_quantum.svg",
        panel("quantum transmission", &[Mode::Qm, Mode::QmAvg, Mode::Cqm]).render().as_bytes(),
    )?;
    Ok(vec![])
}

#[derive(Debug, Serialize)]
struct PrecessionReport {
    moments: [f64; 3],
    lbar0: [f64; 3],
    t_end: f64,
    analytic_rate: f64,
    measured_rate: f64,
    relative_error: f64,
}

#[derive(Debug, Serialize)]
struct ConservationReport {
    moments: [f64; 3],
    lbar0: [f64; 3],
    characteristic_period: f64,
    t_end: f64,
    tol: f64,
    samples: usize,
    energy0: f64,
    lsq0: f64,
    max_energy_drift: f64,
    max_lsq_drift: f64,
    relative_energy_drift: f64,
    relative_lsq_drift: f64,
    max_orthogonality_defect: f64,
    space_angular_momentum_drift: f64,
    warning: Option<String>,
    crosscheck: cqm_core::rotor::CrosscheckReport,
    precession: Option<PrecessionReport>,
}

fn precession_report(
    moments: [f64; 3],
    lbar0: [f64; 3],
    periods: f64,
    tol: f64,
) -> Result<Option<PrecessionReport>, CliError> {
    let m = IntrinsicMoments::new(moments[0], moments[1], moments[2])
        .map_err(|e| ConfigError::at("precession_moments", e.to_string()))?;
    if m.symmetric_axis().is_none() {
        return Err(ConfigError::at("precession_moments", "must describe a symmetric top").into());
    }
    let lbar = Vector3::from(lbar0);
    let rate = precession_rate(&m, &lbar)?;
    if rate == 0.0 {
        return Ok(None);
    }
    let t_end = periods * 2.0 * PI / rate.abs();
    let n = (periods * 40.0).ceil() as usize;
    let times: Vec<f64> = (0..=n).map(|i| t_end * i as f64 / n as f64).collect();
    let s0 = RotorState::new(cqm_core::rotor::Orientation::identity(), lbar);
    let traj = evolve_rotor(&m, &s0, t_end, tol, &times)?;
    let measured = measured_precession_rate(&m, &traj)?;
    Ok(Some(PrecessionReport {
        moments,
        lbar0,
        t_end,
        analytic_rate: rate,
        measured_rate: measured,
        relative_error: (measured - rate).abs() / rate.abs(),
    }))
}

fn fixture_record(name: &str, text: &str) -> FixtureRecord {
    FixtureRecord { name: name.to_string(), sha256: sha256_hex(text.as_bytes()) }
}

fn shipped_text(name: &str) -> Option<&'static str> {
    fixtures::SHIPPED.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn rotor(cfg: &RotorConfig, out: &mut OutputDir) -> CmdResult {
    let (moments, orientation) = cfg.validate()?;
    let lbar = Vector3::from(cfg.lbar0);
    let s0 = RotorState::new(orientation, lbar);
    let period = characteristic_period(&moments, &lbar)?;
    let t_end = cfg.periods * period;
    let n = (cfg.periods * cfg.samples_per_period as f64).round().max(1.0) as usize;
    let times: Vec<f64> = (0..=n).map(|i| t_end * i as f64 / n as f64).collect();

    let ((traj, crosscheck), precession) = rayon::join(
        || {
            rayon::join(
                || evolve_rotor(&moments, &s0, t_end, cfg.tol, &times),
                || lie_poisson_crosscheck(&moments, &s0, cfg.crosscheck_periods * period, cfg.tol, cfg.crosscheck_samples),
            )
        },
        || match cfg.precession_moments {
            Some(pm) => precession_report(pm, cfg.lbar0, cfg.crosscheck_periods, cfg.tol),
            None => Ok(None),
        },
    );
    let (traj, crosscheck, precession) = (traj?, crosscheck?, precession?);

    out.write("rotor_trajectory.csv", traj.to_csv().as_bytes())?;
    let energy0 = classical_hamiltonian(&moments, &s0);
    let lsq0 = lbar.norm_squared();
    let l_space0 = s0.space_angular_momentum();
    let l_drift = traj.states.iter().map(|s| (s.space_angular_momentum() - l_space0).amax()).fold(0.0, f64::max);
    let report = ConservationReport {
        moments: moments.0,
        lbar0: cfg.lbar0,
        characteristic_period: period,
        t_end,
        tol: cfg.tol,
        samples: traj.times.len(),
        energy0,
        lsq0,
        max_energy_drift: traj.max_energy_drift(),
        max_lsq_drift: traj.max_lsq_drift(),
        relative_energy_drift: traj.max_energy_drift() / energy0,
        relative_lsq_drift: traj.max_lsq_drift() / lsq0,
        max_orthogonality_defect: traj.max_orthogonality_defect(),
        space_angular_momentum_drift: l_drift,
        warning: moments.distinctness_warning(),
        crosscheck,
        precession,
    };
    out.write_json("rotor_conservation.json", &report)?;
    out.write_json("orbit_geometry.json", &orbit_geometry_report(&moments)?)?;
    if cfg.svg {
        let series = (0..3)
            .map(|c| {
                Series::new(
                    format!("L{}", c + 1),
                    traj.times.iter().zip(&traj.states).map(|(t, s)| (t / period, s.lbar[c])).collect(),
                )
            })
            .collect();
        let chart = Chart {
            title: format!("body angular momentum, moments {:?}", moments.0),
            x_label: "t / period".into(),
            y_label: "Lbar".into(),
            series,
            y_range: None,
        };
        out.write("rotor_lbar.svg", chart.render().as_bytes())?;
    }
    Ok(vec![fixture_record("rma", shipped_text("rma").expect("rma fixture is shipped"))])
}

#[derive(Debug, Serialize)]
struct OraclePoint {
    kbar: f64,
    measured: f64,
    predicted: f64,
    discrepancy: f64,
    pass: bool,
}

#[derive(Debug, Serialize)]
struct FidelityReport {
    alpha: f64,
    kbar: f64,
    threshold: f64,
    after_scattering: f64,
    fresh_packet: f64,
    pass: bool,
}

#[derive(Debug, Serialize)]
struct OracleReport {
    alpha: f64,
    formula: Formula,
    tolerance: f64,
    points: Vec<OraclePoint>,
    max_discrepancy: f64,
    agreement_pass: bool,
    fidelity: FidelityReport,
    pass: bool,
}

pub fn oracle(cfg: &OracleConfig, out: &mut OutputDir) -> CmdResult {
    let barrier = cfg.validate()?;
    let opts = PacketRunOptions { points_per_wavelength: cfg.points_per_wavelength, ..PacketRunOptions::default() };
    let formula = match cfg.formula {
        Formula::SquareRoot => TransmissionFormula::SquareRoot,
        Formula::Linear => TransmissionFormula::Linear,
    };
    let fid = &cfg.fidelity;
    let (points, fidelity) = rayon::join(
        || {
            cfg.kbars
                .par_iter()
                .map(|&k| {
                    let measured = scatter_packet(cfg.alpha, k, &barrier, &opts)?.transmission;
                    let predicted = barrier.t_quantum_avg_with(cfg.alpha, k, formula)?;
                    let discrepancy = (measured - predicted).abs();
                    Ok(OraclePoint { kbar: k, measured, predicted, discrepancy, pass: discrepancy <= cfg.tolerance })
                })
                .collect::<Result<Vec<_>, cqm_core::Error>>()
        },
        || -> Result<FidelityReport, cqm_core::Error> {
            let run = scatter_packet(fid.alpha, fid.kbar, &barrier, &opts)?;
            let after = fidelity_to_family(&run.grid, &run.final_state, fid.alpha).fidelity;
            let centre = 0.5 * (run.grid.x_min + run.grid.x_max);
            let fresh_state = init_gaussian(&run.grid, fid.alpha, centre, fid.kbar)?;
            let fresh = fidelity_to_family(&run.grid, &fresh_state, fid.alpha).fidelity;
            Ok(FidelityReport {
                alpha: fid.alpha,
                kbar: fid.kbar,
                threshold: fid.threshold,
                after_scattering: after,
                fresh_packet: fresh,
                pass: after < fid.threshold && fresh >= fid.threshold,
            })
        },
    );
    let (points, fidelity) = (points?, fidelity?);
    let max_discrepancy = points.iter().map(|p| p.discrepancy).fold(0.0, f64::max);
    let agreement_pass = points.iter().all(|p| p.pass);
    let pass = agreement_pass && fidelity.pass;
    let report = OracleReport {
        alpha: cfg.alpha,
        formula: cfg.formula,
        tolerance: cfg.tolerance,
        points,
        max_discrepancy,
        agreement_pass,
        fidelity,
        pass,
    };
    out.write_json("oracle.json", &report)?;
    if !pass {
        return Err(CliError::SuiteFailed(format!(
            "max transmission discrepancy {max_discrepancy:.4} (tolerance {}), fidelity check {}",
            cfg.tolerance,
            if report.fidelity.pass { "passed" } else { "failed" }
        )));
    }
    Ok(vec![])
}

#[derive(Debug, Serialize)]
struct AlgebraEntryReport {
    fixture: String,
    dim: usize,
    hilbert_dim: Option<usize>,
    jacobi_residual: f64,
    density: Vec<f64>,
    orbit_dim: usize,
    kernel_dim: usize,
    singular_values: Vec<f64>,
}

fn load_fixture(name: &str, base: &Path, idx: usize) -> Result<(AlgebraFixture, FixtureRecord), CliError> {
    let path = format!("entries[{idx}].fixture");
    if let Some(text) = shipped_text(name) {
        let fx = AlgebraFixture::from_json(text).map_err(|e| ConfigError::at(&path, e.to_string()))?;
        return Ok((fx, fixture_record(name, text)));
    }
    let file = base.join(name);
    let text = std::fs::read_to_string(&file)
        .map_err(|e| ConfigError::at(&path, format!("not a shipped fixture and unreadable as a file: {e}")))?;
    let fx = AlgebraFixture::from_json(&text).map_err(|e| ConfigError::at(&path, e.to_string()))?;
    Ok((fx, fixture_record(name, &text)))
}

/// `base` resolves relative fixture paths (the config file's directory).
pub fn algebra_report(cfg: &AlgebraReportConfig, base: &Path, out: &mut OutputDir) -> CmdResult {
    cfg.validate()?;
    let mut reports = Vec::new();
    let mut records = Vec::new();
    for (i, e) in cfg.entries.iter().enumerate() {
        let (fx, rec) = load_fixture(&e.fixture, base, i)?;
        let sc = fx.structure_constants().map_err(|err| ConfigError::at(format!("entries[{i}].fixture"), err.to_string()))?;
        if e.density.len() != sc.dim() {
            return Err(ConfigError::at(
                format!("entries[{i}].density"),
                format!("expected {} components, got {}", sc.dim(), e.density.len()),
            )
            .into());
        }
        let oa = orbit_analysis(&sc, &Density::new(e.density.clone()))?;
        reports.push(AlgebraEntryReport {
            fixture: e.fixture.clone(),
            dim: sc.dim(),
            hilbert_dim: fx.hilbert_dim,
            jacobi_residual: sc.jacobi_residual(),
            density: e.density.clone(),
            orbit_dim: oa.rank,
            kernel_dim: oa.kernel_basis.len(),
            singular_values: oa.singular_values,
        });
        if !records.contains(&rec) {
            records.push(rec);
        }
    }
    out.write_json("algebra_report.json", &reports)?;
    Ok(records)
}
